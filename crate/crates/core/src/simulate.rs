//! Monte Carlo ensembles of band-masked sample covariance matrices.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::linalg::{banded_gram, eigenvalues, DataMatrix, LinalgError};
use crate::par;

/// Default number of moments computed per replicate.
pub const DEFAULT_MAX_ORDER: u32 = 8;
/// Default histogram resolution.
pub const DEFAULT_BINS: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum SimulateError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("work estimate {requested} exceeds the budget of {cap}")]
    BudgetExceeded { requested: u128, cap: u128 },
    #[error("replicate {replicate}: {source}")]
    Solver {
        replicate: usize,
        #[source]
        source: LinalgError,
    },
    #[error("no replicate carries eigenvalues")]
    NoEigenvalues,
    #[error("histogram needs at least one bin")]
    ZeroBins,
}

/// Entry law, always centred with unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryDistribution {
    Normal,
    Rademacher,
    Uniform,
}

impl EntryDistribution {
    fn draw(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            EntryDistribution::Normal => rng.sample(StandardNormal),
            EntryDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryDistribution::Uniform => (rng.random::<f64>() - 0.5) * 12f64.sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EntryDistribution::Normal => "normal",
            EntryDistribution::Rademacher => "rademacher",
            EntryDistribution::Uniform => "uniform",
        }
    }
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntryDistribution {
    type Err = SimulateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(EntryDistribution::Normal),
            "rademacher" | "sign" => Ok(EntryDistribution::Rademacher),
            "uniform" => Ok(EntryDistribution::Uniform),
            other => Err(SimulateError::InvalidConfig(format!(
                "unknown distribution {other:?} (expected normal, rademacher or uniform)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationConfig {
    pub p: usize,
    pub n: usize,
    pub d: usize,
    pub distribution: EntryDistribution,
    pub replicates: usize,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), SimulateError> {
        let bad = |msg: String| Err(SimulateError::InvalidConfig(msg));
        if self.p == 0 || self.n == 0 {
            return bad(format!(
                "p and n must be positive (p={}, n={})",
                self.p, self.n
            ));
        }
        if self.replicates == 0 {
            return bad("at least one replicate is required".into());
        }
        if self.d > self.p {
            return bad(format!("bandwidth d={} exceeds p={}", self.d, self.p));
        }
        Ok(())
    }

    /// `d / n`.
    pub fn gamma(&self) -> f64 {
        self.d as f64 / self.n as f64
    }

    /// `2d / n`.
    pub fn y(&self) -> f64 {
        2.0 * self.gamma()
    }

    /// `p (d + 1) n` per replicate times the replicate count.
    pub fn work(&self) -> u128 {
        self.p as u128 * (self.d as u128 + 1) * self.n as u128 * self.replicates as u128
    }
}

/// Cap on [`SimulationConfig::work`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_work: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_work: 20_000_000_000,
        }
    }
}

impl Budget {
    pub fn check(&self, config: &SimulationConfig) -> Result<(), SimulateError> {
        let requested = config.work();
        if requested > self.max_work {
            return Err(SimulateError::BudgetExceeded {
                requested,
                cap: self.max_work,
            });
        }
        Ok(())
    }
}

fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// The `p x n` data matrix of one replicate. Each replicate reads its own
/// ChaCha stream, so the result does not depend on scheduling.
pub fn generate(config: &SimulationConfig, replicate: usize) -> DataMatrix {
    let mut rng = replicate_rng(config.seed, replicate);
    let dist = config.distribution;
    DataMatrix::from_fn(config.p, config.n, |_, _| dist.draw(&mut rng))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSample {
    pub replicate: usize,
    /// Ascending, present when requested.
    pub eigenvalues: Option<Vec<f64>>,
    /// `tr(S^l) / p` for `l = 1..=L`.
    pub moments: Vec<f64>,
    pub config: SimulationConfig,
    /// Zero on targets without a clock.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SpectralSample {
    pub fn lambda_min(&self) -> Option<f64> {
        self.eigenvalues.as_ref().and_then(|e| e.first().copied())
    }

    pub fn lambda_max(&self) -> Option<f64> {
        self.eigenvalues.as_ref().and_then(|e| e.last().copied())
    }
}

struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        Stopwatch(
            #[cfg(not(target_arch = "wasm32"))]
            std::time::Instant::now(),
        )
    }

    fn elapsed(&self) -> Duration {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed();
        #[cfg(target_arch = "wasm32")]
        Duration::ZERO
    }
}

fn run_replicate(
    config: &SimulationConfig,
    replicate: usize,
    max_order: u32,
    want_eigenvalues: bool,
) -> Result<SpectralSample, SimulateError> {
    let start = Stopwatch::start();
    let solver = |source| SimulateError::Solver { replicate, source };
    let x = generate(config, replicate);
    let s = banded_gram(&x, config.d).map_err(solver)?;
    let p = config.p as f64;
    let moments = if max_order == 0 {
        Vec::new()
    } else {
        s.trace_powers(max_order)
            .map_err(solver)?
            .into_iter()
            .map(|t| t / p)
            .collect()
    };
    let eigenvalues = if want_eigenvalues {
        Some(eigenvalues(&s).map_err(solver)?)
    } else {
        None
    };
    Ok(SpectralSample {
        replicate,
        eigenvalues,
        moments,
        config: config.clone(),
        wall_time: start.elapsed(),
    })
}

/// One [`SpectralSample`] per replicate, in replicate order.
pub fn run_ensemble(
    config: &SimulationConfig,
    max_order: u32,
    want_eigenvalues: bool,
    budget: &Budget,
) -> Result<Vec<SpectralSample>, SimulateError> {
    config.validate()?;
    budget.check(config)?;
    par::map_indexed(config.replicates, |r| {
        run_replicate(config, r, max_order, want_eigenvalues)
    })
    .into_iter()
    .collect()
}

/// Replicate-averaged moments.
pub fn mean_moments(samples: &[SpectralSample]) -> Vec<f64> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let mut acc = vec![0.0; first.moments.len()];
    for s in samples {
        for (a, m) in acc.iter_mut().zip(&s.moments) {
            *a += m;
        }
    }
    acc.iter().map(|a| a / samples.len() as f64).collect()
}

/// Density histogram with equal-width bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl Histogram {
    /// Bins `values` over `[lo, hi]`; the last bin is closed on the right and
    /// values outside the range are dropped from the counts but not from the
    /// normalisation.
    pub fn from_values(
        values: &[f64],
        bins: usize,
        lo: f64,
        hi: f64,
    ) -> Result<Self, SimulateError> {
        if bins == 0 {
            return Err(SimulateError::ZeroBins);
        }
        if values.is_empty() {
            return Err(SimulateError::NoEigenvalues);
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|b| lo + b as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            if !(lo..=hi).contains(&v) {
                continue;
            }
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let total = values.len() as f64;
        let density = counts.iter().map(|&c| c as f64 / (total * width)).collect();
        Ok(Self { edges, density })
    }

    pub fn bins(&self) -> usize {
        self.density.len()
    }

    pub fn width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    /// `sum density * width`.
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.width()
    }

    /// `l`-th moment with each bin's mass placed at its midpoint.
    pub fn moment(&self, l: u32) -> f64 {
        let w = self.width();
        self.edges
            .windows(2)
            .zip(&self.density)
            .map(|(e, &rho)| rho * w * (0.5 * (e[0] + e[1])).powi(l as i32))
            .sum()
    }

    pub fn to_csv(&self, preamble: &[String]) -> String {
        let mut out = comment_block(preamble);
        out.push_str("bin_left,bin_right,density\n");
        for (e, rho) in self.edges.windows(2).zip(&self.density) {
            out.push_str(&format!("{},{},{}\n", e[0], e[1], rho));
        }
        out
    }
}

/// Pooled histogram over every replicate's eigenvalues, spanning the pooled
/// range.
pub fn histogram(samples: &[SpectralSample], bins: usize) -> Result<Histogram, SimulateError> {
    let pooled: Vec<f64> = samples
        .iter()
        .filter_map(|s| s.eigenvalues.as_deref())
        .flatten()
        .copied()
        .collect();
    if pooled.is_empty() {
        return Err(SimulateError::NoEigenvalues);
    }
    let lo = pooled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pooled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    };
    Histogram::from_values(&pooled, bins, lo, hi)
}

fn comment_block(preamble: &[String]) -> String {
    preamble.iter().map(|line| format!("# {line}\n")).collect()
}

/// Metadata rows, then `replicate,m1..mL,lambda_min,lambda_max`.
pub fn ensemble_csv(
    config: &SimulationConfig,
    samples: &[SpectralSample],
    preamble: &[String],
) -> String {
    let mut out = comment_block(preamble);
    out.push_str(&format!("p,{}\n", config.p));
    out.push_str(&format!("n,{}\n", config.n));
    out.push_str(&format!("d,{}\n", config.d));
    out.push_str(&format!("gamma,{}\n", config.gamma()));
    out.push_str(&format!("y,{}\n", config.y()));
    out.push_str(&format!("distribution,{}\n", config.distribution));
    out.push_str(&format!("seed,{}\n", config.seed));
    out.push_str(&format!("reps,{}\n", config.replicates));
    let orders = samples.first().map_or(0, |s| s.moments.len());
    out.push_str("replicate");
    for l in 1..=orders {
        out.push_str(&format!(",m{l}"));
    }
    out.push_str(",lambda_min,lambda_max\n");
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for s in samples {
        out.push_str(&s.replicate.to_string());
        for m in &s.moments {
            out.push_str(&format!(",{m}"));
        }
        out.push_str(&format!(
            ",{},{}\n",
            opt(s.lambda_min()),
            opt(s.lambda_max())
        ));
    }
    out
}

/// JSON mirror of [`ensemble_csv`]; eigenvalues are left to the histogram.
pub fn ensemble_json(
    config: &SimulationConfig,
    samples: &[SpectralSample],
    preamble: &[String],
) -> serde_json::Value {
    let replicates: Vec<_> = samples
        .iter()
        .map(|s| {
            serde_json::json!({
                "replicate": s.replicate,
                "moments": s.moments,
                "lambda_min": s.lambda_min(),
                "lambda_max": s.lambda_max(),
            })
        })
        .collect();
    serde_json::json!({
        "header": preamble,
        "config": config,
        "gamma": config.gamma(),
        "y": config.y(),
        "replicates": replicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(p: usize, n: usize, d: usize, distribution: EntryDistribution) -> SimulationConfig {
        SimulationConfig {
            p,
            n,
            d,
            distribution,
            replicates: 2,
            seed: 1,
        }
    }

    #[test]
    fn validation() {
        assert!(config(5, 3, 5, EntryDistribution::Normal)
            .validate()
            .is_ok());
        assert!(config(5, 3, 6, EntryDistribution::Normal)
            .validate()
            .is_err());
        assert!(config(0, 3, 0, EntryDistribution::Normal)
            .validate()
            .is_err());
        let mut c = config(5, 3, 0, EntryDistribution::Normal);
        c.replicates = 0;
        assert!(c.validate().is_err());
        assert_eq!(
            "Gaussian".parse::<EntryDistribution>().unwrap(),
            EntryDistribution::Normal
        );
        assert!("cauchy".parse::<EntryDistribution>().is_err());
    }

    #[test]
    fn rademacher_entries_are_signs() {
        let x = generate(&config(30, 20, 2, EntryDistribution::Rademacher), 0);
        assert!(x.as_slice().iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn budget_is_enforced() {
        let c = config(10, 10, 1, EntryDistribution::Normal);
        let tight = Budget {
            max_work: c.work() - 1,
        };
        assert!(matches!(
            run_ensemble(&c, 2, false, &tight),
            Err(SimulateError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn histogram_hand_normalisation() {
        let h = Histogram::from_values(&[0.0, 0.0, 1.0, 1.0], 2, 0.0, 1.0).unwrap();
        assert_eq!(h.density, vec![1.0, 1.0]);
        let single = Histogram::from_values(&[0.2, 0.4], 1, 0.0, 0.5).unwrap();
        assert_eq!(single.density, vec![2.0]);
        let sparse = Histogram::from_values(&[0.0, 1.0], 4, 0.0, 1.0).unwrap();
        assert_eq!(sparse.density, vec![2.0, 0.0, 0.0, 2.0]);
        assert!(matches!(
            Histogram::from_values(&[0.0], 0, 0.0, 1.0),
            Err(SimulateError::ZeroBins)
        ));
    }

    #[test]
    fn histogram_requires_eigenvalues() {
        let c = config(6, 4, 1, EntryDistribution::Normal);
        let samples = run_ensemble(&c, 2, false, &Budget::default()).unwrap();
        assert!(matches!(
            histogram(&samples, 10),
            Err(SimulateError::NoEigenvalues)
        ));
    }
}
