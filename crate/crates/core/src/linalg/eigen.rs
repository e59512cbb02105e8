//! Eigenvalues of symmetric band matrices.
//!
//! Givens bulge chasing reduces the band to tridiagonal form in `O(p^2 d)`
//! while keeping the working set at `p (d + 2)` values, then implicit-shift
//! QL iteration extracts the eigenvalues.

use super::{BandedSymmetricMatrix, LinalgError};

/// Iteration cap of the QL sweep, per eigenvalue.
pub const MAX_QL_ITERATIONS: usize = 50;

/// Band working storage with one extra subdiagonal for the bulge.
struct BulgeBand {
    dim: usize,
    width: usize,
    // data[k * dim + j] = A[j + k][j]
    data: Vec<f64>,
}

impl BulgeBand {
    fn new(s: &BandedSymmetricMatrix) -> Self {
        let dim = s.dim();
        let width = (s.half_bandwidth() + 1).min(dim.saturating_sub(1));
        let mut data = vec![0.0; (width + 1) * dim];
        let copy = (s.half_bandwidth() + 1).min(width + 1) * dim;
        data[..copy].copy_from_slice(&s.bands()[..copy]);
        Self { dim, width, data }
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> Option<usize> {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        (k <= self.width).then_some(k * self.dim + lo)
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.index(i, j).map_or(0.0, |t| self.data[t])
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, value: f64) {
        match self.index(i, j) {
            Some(t) => self.data[t] = value,
            None => debug_assert!(value == 0.0, "fill outside the working band at ({i}, {j})"),
        }
    }

    /// Applies `G A G'` for the rotation in plane `(a, a + 1)` that zeroes
    /// `A[a + 1][col]` against `A[a][col]`.
    fn rotate(&mut self, a: usize, col: usize) {
        let b = a + 1;
        let x = self.get(a, col);
        let y = self.get(b, col);
        if y == 0.0 {
            return;
        }
        let r = x.hypot(y);
        let (c, s) = (x / r, y / r);
        let lo = a.saturating_sub(self.width);
        let hi = (b + self.width).min(self.dim - 1);
        for k in lo..=hi {
            if k == a || k == b {
                continue;
            }
            let (u, v) = (self.get(a, k), self.get(b, k));
            self.set(a, k, c * u + s * v);
            self.set(b, k, c * v - s * u);
        }
        let (aa, ab, bb) = (self.get(a, a), self.get(a, b), self.get(b, b));
        self.set(a, a, c * c * aa + 2.0 * c * s * ab + s * s * bb);
        self.set(b, b, s * s * aa - 2.0 * c * s * ab + c * c * bb);
        self.set(a, b, c * s * (bb - aa) + (c * c - s * s) * ab);
        self.set(b, col, 0.0);
    }
}

/// Orthogonal reduction to tridiagonal form.
/// Returns `(diagonal, offdiagonal)` with `offdiagonal.len() == p - 1`.
pub fn tridiagonalize(s: &BandedSymmetricMatrix) -> (Vec<f64>, Vec<f64>) {
    let p = s.dim();
    let d = s.half_bandwidth();
    if d <= 1 {
        let off = if d == 1 {
            s.diagonal(1).to_vec()
        } else {
            vec![0.0; p.saturating_sub(1)]
        };
        return (s.diagonal(0).to_vec(), off);
    }
    let mut w = BulgeBand::new(s);
    for j in 0..p.saturating_sub(2) {
        for k in (2..=d.min(p - 1 - j)).rev() {
            let row = j + k;
            w.rotate(row - 1, j);
            // chase the bulge created at (row + d, row - 1)
            let (mut bulge_row, mut bulge_col) = (row + d, row - 1);
            while bulge_row < p {
                w.rotate(bulge_row - 1, bulge_col);
                bulge_col = bulge_row - 1;
                bulge_row += d;
            }
        }
    }
    let diag = (0..p).map(|i| w.get(i, i)).collect();
    let off = (0..p - 1).map(|i| w.get(i + 1, i)).collect();
    (diag, off)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL,
/// sorted ascending. An off-diagonal entry is treated as zero once
/// `|e_i| <= eps (|d_i| + |d_{i+1}|)`.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = diag.len();
    if n > 0 && off.len() != n - 1 {
        return Err(LinalgError::DimensionMismatch {
            expected: n - 1,
            found: off.len(),
        });
    }
    if diag.iter().chain(off).any(|x| !x.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(LinalgError::NoConvergence {
                    index: l,
                    iterations: MAX_QL_ITERATIONS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// All eigenvalues of `s`, ascending.
pub fn eigenvalues(s: &BandedSymmetricMatrix) -> Result<Vec<f64>, LinalgError> {
    if s.bands().iter().any(|x| !x.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    if s.half_bandwidth() == 0 {
        let mut d = s.diagonal(0).to_vec();
        d.sort_by(f64::total_cmp);
        return Ok(d);
    }
    let (diag, off) = tridiagonalize(s);
    tridiagonal_eigenvalues(&diag, &off)
}
