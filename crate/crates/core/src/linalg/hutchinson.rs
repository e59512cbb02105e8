use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BandedSymmetricMatrix, LinalgError};

/// Stochastic trace estimate with its sample standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub probes: usize,
}

/// Hutchinson estimator of `tr(S^l)` from Rademacher probes `v' S^l v`.
/// Bit-reproducible for a fixed seed.
pub fn hutchinson_trace(
    s: &BandedSymmetricMatrix,
    l: u32,
    probes: usize,
    seed: u64,
) -> Result<TraceEstimate, LinalgError> {
    if probes < 2 {
        return Err(LinalgError::TooFewProbes(probes));
    }
    if l == 0 {
        return Err(LinalgError::ZeroPower);
    }
    let p = s.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (left, right) = (l.div_ceil(2), l / 2);
    let mut samples = Vec::with_capacity(probes);
    for _ in 0..probes {
        let v: Vec<f64> = (0..p)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let mut a = v.clone();
        for _ in 0..left {
            a = s.matvec(&a)?;
        }
        let mut b = v;
        for _ in 0..right {
            b = s.matvec(&b)?;
        }
        samples.push(a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>());
    }
    let count = probes as f64;
    let mean = samples.iter().sum::<f64>() / count;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0);
    Ok(TraceEstimate {
        estimate: mean,
        std_error: (var / count).sqrt(),
        probes,
    })
}
