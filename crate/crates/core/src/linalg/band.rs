use std::io::{Read, Write};

use super::LinalgError;
use crate::par;

/// Dense `p x n` data matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for k in 0..cols {
                data.push(f(i, k));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Symmetric matrix with half-bandwidth `d`, packed diagonal-major: diagonal
/// `k` occupies `bands[k*p .. (k+1)*p]` and holds `S[i+k][i]` at offset `i`
/// (the last `k` slots are padding and stay zero).
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymmetricMatrix {
    dim: usize,
    half_bandwidth: usize,
    bands: Vec<f64>,
}

impl BandedSymmetricMatrix {
    /// Zero matrix. The bandwidth is clamped to `dim - 1`.
    pub fn zeros(dim: usize, half_bandwidth: usize) -> Self {
        let half_bandwidth = half_bandwidth.min(dim.saturating_sub(1));
        Self {
            dim,
            half_bandwidth,
            bands: vec![0.0; (half_bandwidth + 1) * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            dim: diag.len(),
            half_bandwidth: 0,
            bands: diag.to_vec(),
        }
    }

    /// Builds from `f(i, j)` evaluated on the lower band `0 <= i - j <= d`.
    pub fn from_fn(
        dim: usize,
        half_bandwidth: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut m = Self::zeros(dim, half_bandwidth);
        for k in 0..=m.half_bandwidth {
            for j in 0..dim - k {
                m.bands[k * dim + j] = f(j + k, j);
            }
        }
        m
    }

    /// Masks a dense symmetric matrix (row-major) to the band.
    pub fn from_dense(
        dim: usize,
        half_bandwidth: usize,
        dense: &[f64],
    ) -> Result<Self, LinalgError> {
        if dense.len() != dim * dim {
            return Err(LinalgError::DimensionMismatch {
                expected: dim * dim,
                found: dense.len(),
            });
        }
        Ok(Self::from_fn(dim, half_bandwidth, |i, j| {
            dense[i * dim + j]
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    pub fn bands(&self) -> &[f64] {
        &self.bands
    }

    /// Entries of diagonal `k`, length `p - k`.
    pub fn diagonal(&self, k: usize) -> &[f64] {
        &self.bands[k * self.dim..k * self.dim + self.dim - k]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.half_bandwidth {
            0.0
        } else {
            self.bands[k * self.dim + lo]
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let p = self.dim;
        let mut dense = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                dense[i * p + j] = self.get(i, j);
            }
        }
        dense
    }

    pub fn trace(&self) -> f64 {
        self.diagonal(0).iter().sum()
    }

    /// `S v` in `O(p d)`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let p = self.dim;
        if v.len() != p {
            return Err(LinalgError::DimensionMismatch {
                expected: p,
                found: v.len(),
            });
        }
        let mut out: Vec<f64> = self.diagonal(0).iter().zip(v).map(|(a, b)| a * b).collect();
        for k in 1..=self.half_bandwidth {
            let band = self.diagonal(k);
            for (i, &b) in band.iter().enumerate() {
                out[i + k] += b * v[i];
                out[i] += b * v[i + k];
            }
        }
        Ok(out)
    }

    /// Product with another symmetric band matrix known to commute with it
    /// (e.g. powers of the same matrix), so the result is symmetric.
    fn commuting_product(&self, other: &Self) -> Self {
        let p = self.dim;
        let (wa, wb) = (self.half_bandwidth, other.half_bandwidth);
        let width = (wa + wb).min(p.saturating_sub(1));
        let diagonals = par::map_indexed(width + 1, |k| {
            (0..p - k)
                .map(|j| {
                    let i = j + k;
                    let lo = i.saturating_sub(wa).max(j.saturating_sub(wb));
                    let hi = (i + wa).min(j + wb).min(p - 1);
                    (lo..=hi)
                        .map(|m| self.get(i, m) * other.get(m, j))
                        .sum::<f64>()
                })
                .collect::<Vec<f64>>()
        });
        let mut out = Self::zeros(p, width);
        for (k, diag) in diagonals.into_iter().enumerate() {
            out.bands[k * p..k * p + diag.len()].copy_from_slice(&diag);
        }
        out
    }

    /// `sum_ij A_ij B_ij` for symmetric band matrices.
    fn frobenius_inner(&self, other: &Self) -> f64 {
        let common = self.half_bandwidth.min(other.half_bandwidth);
        (0..=common)
            .map(|k| {
                let s: f64 = self
                    .diagonal(k)
                    .iter()
                    .zip(other.diagonal(k))
                    .map(|(a, b)| a * b)
                    .sum();
                if k == 0 {
                    s
                } else {
                    2.0 * s
                }
            })
            .sum()
    }

    /// `tr(S^l)`. Uses banded powers while `l d < p`, the spectrum otherwise.
    pub fn trace_power(&self, l: u32) -> Result<f64, LinalgError> {
        Ok(*self
            .trace_powers(l)?
            .last()
            .expect("l >= 1 yields one value"))
    }

    /// `[tr(S), tr(S^2), ..., tr(S^lmax)]`.
    pub fn trace_powers(&self, lmax: u32) -> Result<Vec<f64>, LinalgError> {
        if lmax == 0 {
            return Err(LinalgError::ZeroPower);
        }
        let p = self.dim;
        let d = self.half_bandwidth;
        let banded_max = if d == 0 {
            lmax
        } else {
            lmax.min(((p - 1) / d) as u32).max(1)
        };
        let mut traces = Vec::with_capacity(lmax as usize);
        // powers[a] = S^a
        let mut powers = vec![Self::identity(p), self.clone()];
        for l in 1..=banded_max {
            let (a, b) = (l.div_ceil(2) as usize, (l / 2) as usize);
            while powers.len() <= a {
                let next = powers.last().expect("nonempty").commuting_product(self);
                powers.push(next);
            }
            traces.push(powers[a].frobenius_inner(&powers[b]));
        }
        if banded_max < lmax {
            let eigs = super::eigenvalues(self)?;
            for l in banded_max + 1..=lmax {
                traces.push(eigs.iter().map(|x| x.powi(l as i32)).sum());
            }
        }
        Ok(traces)
    }

    /// Binary dump: `p` and `d` as little-endian u64, then `(d+1) p` little-endian
    /// f64 values, diagonal 0 first.
    pub fn write_dump(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        w.write_all(&(self.half_bandwidth as u64).to_le_bytes())?;
        for x in &self.bands {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump(mut r: impl Read) -> Result<Self, LinalgError> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let dim = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let half_bandwidth = u64::from_le_bytes(word) as usize;
        if dim == 0 || half_bandwidth >= dim {
            return Err(LinalgError::BadDump(format!(
                "p = {dim}, d = {half_bandwidth}"
            )));
        }
        let mut bands = Vec::with_capacity((half_bandwidth + 1) * dim);
        for _ in 0..(half_bandwidth + 1) * dim {
            r.read_exact(&mut word)?;
            bands.push(f64::from_le_bytes(word));
        }
        Ok(Self {
            dim,
            half_bandwidth,
            bands,
        })
    }
}

/// `((1/n) X X') o 1_d`: only the `(d+1) p` band entries are formed, in
/// `O(p d n)`. Rows are processed in parallel.
pub fn banded_gram(
    x: &DataMatrix,
    half_bandwidth: usize,
) -> Result<BandedSymmetricMatrix, LinalgError> {
    let (p, n) = (x.rows(), x.cols());
    if p == 0 || n == 0 {
        return Err(LinalgError::Empty);
    }
    let mut s = BandedSymmetricMatrix::zeros(p, half_bandwidth);
    let d = s.half_bandwidth;
    let scale = 1.0 / n as f64;
    // rows[i][k] = S[i][i-k]
    let rows = par::map_indexed(p, |i| {
        let ri = x.row(i);
        (0..=d.min(i))
            .map(|k| {
                let rj = x.row(i - k);
                ri.iter().zip(rj).map(|(a, b)| a * b).sum::<f64>() * scale
            })
            .collect::<Vec<f64>>()
    });
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            s.bands[k * p + i - k] = v;
        }
    }
    Ok(s)
}
