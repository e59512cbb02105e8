//! Distances between spectral distributions and the moment comparison report.

use std::fmt;

use serde::Serialize;

use crate::moments::MomentPolynomial;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("cannot build a distribution from an empty sample")]
    EmptySample,
    #[error("sample contains non-finite values")]
    NonFinite,
    #[error("{empirical} empirical moments but {theory} theoretical orders")]
    OrderMismatch { empirical: usize, theory: usize },
}

/// Right-continuous step CDF with finitely many jumps and total mass 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCdf {
    jumps: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepCdf {
    /// Empirical CDF; tied values accumulate their weight at a single jump.
    pub fn from_sample(values: &[f64]) -> Result<Self, MetricsError> {
        if values.is_empty() {
            return Err(MetricsError::EmptySample);
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(MetricsError::NonFinite);
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let total = sorted.len() as f64;
        let mut jumps = Vec::new();
        let mut cumulative = Vec::new();
        for (t, &x) in sorted.iter().enumerate() {
            if jumps.last() == Some(&x) {
                *cumulative.last_mut().expect("paired with jumps") = (t + 1) as f64 / total;
            } else {
                jumps.push(x);
                cumulative.push((t + 1) as f64 / total);
            }
        }
        *cumulative.last_mut().expect("nonempty") = 1.0;
        Ok(Self { jumps, cumulative })
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Number of distinct jump locations.
    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    /// `F(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let t = self.jumps.partition_point(|&j| j <= x);
        if t == 0 {
            0.0
        } else {
            self.cumulative[t - 1]
        }
    }
}

/// `sup_x |F(x) - G(x)|`, exact for step functions: both are constant between
/// merged jump points, so the right-continuous values there cover every
/// left limit as well.
pub fn kolmogorov_distance(f: &StepCdf, g: &StepCdf) -> f64 {
    f.jumps
        .iter()
        .chain(&g.jumps)
        .map(|&x| (f.eval(x) - g.eval(x)).abs())
        .fold(0.0, f64::max)
}

/// Whether `F(x - e) - e <= G(x) <= F(x + e) + e` for all `x`.
fn levy_feasible(f: &StepCdf, g: &StepCdf, eps: f64) -> bool {
    // Both sides are right-continuous step functions of x; their difference is
    // constant between the points where either jumps. At a shifted jump of F
    // the value of F is taken from the jump itself, not from a rounded
    // round trip through x - e.
    let lower = g
        .jumps
        .iter()
        .map(|&x| (x, f.eval(x - eps)))
        .chain(
            f.jumps
                .iter()
                .zip(&f.cumulative)
                .map(|(&t, &c)| (t + eps, c)),
        )
        .all(|(x, fx)| fx - eps <= g.eval(x));
    let upper = g
        .jumps
        .iter()
        .map(|&x| (x, f.eval(x + eps)))
        .chain(
            f.jumps
                .iter()
                .zip(&f.cumulative)
                .map(|(&t, &c)| (t - eps, c)),
        )
        .all(|(x, fx)| g.eval(x) <= fx + eps);
    lower && upper
}

/// Absolute tolerance of the Levy bisection.
pub const LEVY_TOLERANCE: f64 = 1e-12;

/// Levy distance `inf { e > 0 : F(x - e) - e <= G(x) <= F(x + e) + e }` by
/// bisection on `e in [0, 1]`.
pub fn levy_distance(f: &StepCdf, g: &StepCdf) -> f64 {
    if levy_feasible(f, g, 0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > LEVY_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if levy_feasible(f, g, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Which reading of the limiting moment a row favours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Convention {
    Gamma,
    Doubled,
    Tie,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Gamma => "gamma",
            Convention::Doubled => "doubled",
            Convention::Tie => "tie",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub order: u32,
    pub empirical: f64,
    pub gamma_convention: f64,
    pub doubled_convention: f64,
    pub rel_err_gamma: f64,
    pub rel_err_doubled: f64,
    pub closer: Convention,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub gamma: f64,
    pub rows: Vec<MomentRow>,
}

fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}

/// Compares empirical moments `m_1..m_L` with both conventions at `gamma`.
pub fn moment_report(
    sample_moments: &[f64],
    theory: &[MomentPolynomial],
    gamma: f64,
) -> Result<MomentReport, MetricsError> {
    if sample_moments.len() != theory.len() {
        return Err(MetricsError::OrderMismatch {
            empirical: sample_moments.len(),
            theory: theory.len(),
        });
    }
    let rows = sample_moments
        .iter()
        .zip(theory)
        .map(|(&empirical, poly)| {
            let a = poly.at_gamma(gamma);
            let b = poly.at_doubled(gamma);
            let (ea, eb) = (rel_err(empirical, a), rel_err(empirical, b));
            let closer = if ea < eb {
                Convention::Gamma
            } else if eb < ea {
                Convention::Doubled
            } else {
                Convention::Tie
            };
            MomentRow {
                order: poly.order(),
                empirical,
                gamma_convention: a,
                doubled_convention: b,
                rel_err_gamma: ea,
                rel_err_doubled: eb,
                closer,
            }
        })
        .collect();
    Ok(MomentReport { gamma, rows })
}

impl MomentReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "l,empirical,gamma_convention,doubled_convention,rel_err_gamma,rel_err_doubled,closer\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.order,
                r.empirical,
                r.gamma_convention,
                r.doubled_convention,
                r.rel_err_gamma,
                r.rel_err_doubled,
                r.closer
            ));
        }
        out
    }
}

impl fmt::Display for MomentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "gamma = {}, y = {}", self.gamma, 2.0 * self.gamma)?;
        writeln!(
            f,
            "{:>3}  {:>14}  {:>14}  {:>14}  {:>10}  {:>10}  closer",
            "l", "empirical", "gamma", "doubled", "err(g)", "err(y)"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>3}  {:>14.6}  {:>14.6}  {:>14.6}  {:>10.3e}  {:>10.3e}  {}",
                r.order,
                r.empirical,
                r.gamma_convention,
                r.doubled_convention,
                r.rel_err_gamma,
                r.rel_err_doubled,
                r.closer
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::Limits;
    use crate::moments::limit_moment_polynomial;

    fn cdf(xs: &[f64]) -> StepCdf {
        StepCdf::from_sample(xs).unwrap()
    }

    #[test]
    fn step_cdf_basics() {
        let f = cdf(&[1.0, 0.0, 1.0, 2.0]);
        assert_eq!(f.jumps(), &[0.0, 1.0, 2.0]);
        assert_eq!(f.cumulative(), &[0.25, 0.75, 1.0]);
        assert_eq!(f.eval(-1.0), 0.0);
        assert_eq!(f.eval(1.0), 0.75);
        assert_eq!(f.eval(1.5), 0.75);
        assert_eq!(f.eval(9.0), 1.0);
        assert!(matches!(
            StepCdf::from_sample(&[]),
            Err(MetricsError::EmptySample)
        ));
        assert!(matches!(
            StepCdf::from_sample(&[f64::NAN]),
            Err(MetricsError::NonFinite)
        ));
    }

    #[test]
    fn kolmogorov_examples() {
        let a = cdf(&[0.0, 1.0]);
        assert_eq!(kolmogorov_distance(&a, &a), 0.0);
        assert_eq!(kolmogorov_distance(&a, &cdf(&[0.0, 2.0])), 0.5);
        assert_eq!(kolmogorov_distance(&cdf(&[0.0]), &cdf(&[1.0])), 1.0);
    }

    #[test]
    fn levy_examples() {
        let a = cdf(&[0.3, -1.0, 4.0]);
        assert_eq!(levy_distance(&a, &a), 0.0);
        // point masses at 0 and a: the distance is min(a, 1)
        for shift in [0.5, 0.1, 1.0] {
            let got = levy_distance(&cdf(&[0.0]), &cdf(&[shift]));
            assert!((got - shift).abs() <= LEVY_TOLERANCE, "{got} vs {shift}");
        }
        let far = levy_distance(&cdf(&[0.0]), &cdf(&[3.0]));
        assert!((far - 1.0).abs() <= LEVY_TOLERANCE);
    }

    #[test]
    fn report_conventions() {
        let limits = Limits::default();
        let polys: Vec<_> = (1..=2)
            .map(|l| limit_moment_polynomial(l, &limits).unwrap())
            .collect();
        let gamma = 0.25;
        let exact = moment_report(&[1.0, 1.5], &polys, gamma).unwrap();
        assert_eq!(exact.rows[0].rel_err_gamma, 0.0);
        assert_eq!(exact.rows[0].gamma_convention, 1.0);
        assert_eq!(exact.rows[0].doubled_convention, 1.0);
        assert_eq!(exact.rows[1].rel_err_gamma, 0.0);
        assert_eq!(exact.rows[1].closer, Convention::Gamma);
        assert_eq!(exact.rows[0].closer, Convention::Tie);
        assert!(matches!(
            moment_report(&[1.0], &polys, gamma),
            Err(MetricsError::OrderMismatch { .. })
        ));
        assert!(exact.to_csv().lines().count() == 3);
    }
}
