//! Oracle cross-checks bundled as a runnable suite.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{
    catalan, count_ordered_trees, count_restricted_compositions, enumerate_canonical_trees,
    enumerate_restricted_compositions, narayana_count, Limits, PlaneTree,
};
use crate::metrics::{kolmogorov_distance, levy_distance, StepCdf};
use crate::moments::{degree_factor, limit_moment_polynomial_with, to_f64};
use crate::oracle::{
    brute_count_banded_trees, brute_levy, exact_expected_moment, EntryMoments, OracleBudget,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fast,
    Full,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            other => Err(format!("unknown suite {other:?} (expected fast or full)")),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Fast => "fast",
            Suite::Full => "full",
        })
    }
}

/// The formulas under test. Swapping the degree factor lets a test confirm
/// that the suite notices a wrong constant.
pub struct Subject<'a> {
    pub degree_factor: &'a dyn Fn(u32) -> BigRational,
}

impl Default for Subject<'_> {
    fn default() -> Self {
        Self {
            degree_factor: &|d| degree_factor(d).value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub suite: Suite,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<28} {:>8.2?}  {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.elapsed,
                c.detail
            )?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "{} suite: {} checks, {} failed",
            self.suite,
            self.checks.len(),
            failed
        )
    }
}

type Outcome = Result<String, String>;

fn run(name: &'static str, check: impl FnOnce() -> Outcome) -> CheckResult {
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    match outcome {
        Ok(detail) => CheckResult {
            name,
            passed: true,
            detail,
            elapsed,
        },
        Err(detail) => CheckResult {
            name,
            passed: false,
            detail,
            elapsed,
        },
    }
}

/// Tallies every tuple in `[1, m]^k` by its sum.
fn tally_compositions(k: usize, m: u64) -> Vec<u64> {
    let mut tally = vec![0u64; k * m as usize + 1];
    let mut parts = vec![1u64; k];
    loop {
        tally[parts.iter().sum::<u64>() as usize] += 1;
        let mut t = k;
        loop {
            if t == 0 {
                return tally;
            }
            t -= 1;
            parts[t] += 1;
            if parts[t] <= m {
                break;
            }
            parts[t] = 1;
        }
    }
}

fn check_compositions(max_n: u64) -> Outcome {
    let limits = Limits::default();
    let mut cases = 0;
    for k in 1..=6usize {
        for m in 1..=8u64 {
            let tally = tally_compositions(k, m);
            for n in 0..=max_n {
                let brute = tally.get(n as usize).copied().unwrap_or(0);
                let formula = count_restricted_compositions(n, k as u64, m);
                let streamed = enumerate_restricted_compositions(n, k as u64, m, &limits)
                    .map_err(|e| e.to_string())?
                    .count() as u64;
                if formula != BigUint::from(brute) || streamed != brute {
                    return Err(format!(
                        "F({n},{k},{m}): formula {formula}, stream {streamed}, brute {brute}"
                    ));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (n,k,m) triples"))
}

fn check_tree_census(max_l: u32) -> Outcome {
    let limits = Limits::default();
    let mut total = 0u64;
    for l in 1..=max_l {
        let mut per_r = vec![0u64; l as usize];
        let mut count = 0u64;
        for tree in enumerate_canonical_trees(l, &limits).map_err(|e| e.to_string())? {
            per_r[tree.r() as usize] += 1;
            count += 1;
        }
        if BigUint::from(count) != catalan(l) {
            return Err(format!("l={l}: {count} trees, Catalan {}", catalan(l)));
        }
        for (r, &c) in per_r.iter().enumerate() {
            if BigUint::from(c) != narayana_count(l, r as u32) {
                return Err(format!(
                    "l={l} r={r}: {c} trees, Narayana {}",
                    narayana_count(l, r as u32)
                ));
            }
        }
        total += count;
    }
    Ok(format!("{total} trees for l <= {max_l}"))
}

fn check_walk_roundtrip(max_l: u32) -> Outcome {
    let limits = Limits::default();
    let mut total = 0u64;
    for l in 1..=max_l {
        for tree in enumerate_canonical_trees(l, &limits).map_err(|e| e.to_string())? {
            let walk = tree.canonical_walk();
            match PlaneTree::from_walk(&walk) {
                Ok(back) if back == tree => total += 1,
                Ok(back) => {
                    return Err(format!(
                        "{:?} decoded as {:?}",
                        tree.child_counts(),
                        back.child_counts()
                    ))
                }
                Err(e) => return Err(format!("{:?}: {e}", tree.child_counts())),
            }
        }
    }
    Ok(format!("{total} walks"))
}

/// `F(D d, D, 2d) / (c_D d^(D-1)) - 1`.
fn degree_factor_deviation(subject: &Subject<'_>, degree: u32, d: u64) -> f64 {
    let deg = u64::from(degree);
    let count = count_restricted_compositions(deg * d, deg, 2 * d);
    let scale = (subject.degree_factor)(degree)
        * BigRational::from_integer(BigInt::from(d).pow(degree - 1));
    if scale.is_zero() {
        return f64::INFINITY;
    }
    to_f64(&(BigRational::from_integer(BigInt::from(count)) / scale)) - 1.0
}

fn check_degree_factor(subject: &Subject<'_>, bandwidths: &[u64]) -> Outcome {
    let mut worst = 0.0f64;
    for degree in 2..=5 {
        let devs: Vec<f64> = bandwidths
            .iter()
            .map(|&d| degree_factor_deviation(subject, degree, d).abs())
            .collect();
        let last = *devs.last().expect("at least one bandwidth");
        if last > 0.01 {
            return Err(format!(
                "D={degree}: deviation {last:.3e} at d={}",
                bandwidths[bandwidths.len() - 1]
            ));
        }
        if devs.windows(2).any(|w| w[1] >= w[0]) {
            return Err(format!("D={degree}: deviations {devs:?} not decreasing"));
        }
        worst = worst.max(last);
    }
    Ok(format!(
        "max deviation {worst:.2e} at d={}",
        bandwidths[bandwidths.len() - 1]
    ))
}

/// Exact `E m_{p,2}` against the limit at three growing sizes with `d/n` fixed.
/// The gap must shrink and stay within the explicit finite-size terms
/// `|E X^4 - 1|/n + d(d+1)/(p n)`; the `gamma` reading must beat `y = 2 gamma`.
fn check_moment_oracle(subject: &Subject<'_>) -> Outcome {
    let limits = Limits::default();
    let poly = limit_moment_polynomial_with(2, &limits, subject.degree_factor)
        .map_err(|e| e.to_string())?;
    let budget = OracleBudget {
        max_indices: 1 << 20,
    };
    let law = EntryMoments::rademacher(4);
    let mut previous = f64::INFINITY;
    let mut gaps = Vec::new();
    for (p, n, d) in [(8usize, 8usize, 4usize), (16, 12, 6), (32, 16, 8)] {
        let exact =
            to_f64(&exact_expected_moment(p, n, d, 2, &law, &budget).map_err(|e| e.to_string())?);
        let gamma = d as f64 / n as f64;
        let gap = (exact - poly.at_gamma(gamma)).abs();
        let gap_y = (exact - poly.at_doubled(gamma)).abs();
        let allowed = (d * (d + 1)) as f64 / (p * n) as f64 + 1e-12;
        if gap > allowed {
            return Err(format!(
                "(p,n,d)=({p},{n},{d}): gap {gap:.4} exceeds finite-size bound {allowed:.4}"
            ));
        }
        if gap >= previous {
            return Err(format!(
                "(p,n,d)=({p},{n},{d}): gap {gap:.4} did not shrink"
            ));
        }
        if gap >= gap_y {
            return Err(format!(
                "(p,n,d)=({p},{n},{d}): gamma gap {gap:.4} not below y gap {gap_y:.4}"
            ));
        }
        previous = gap;
        gaps.push(format!("{gap:.4}"));
    }
    Ok(format!("l=2 gaps {}", gaps.join(" > ")))
}

fn check_first_moment() -> Outcome {
    let budget = OracleBudget::default();
    let law = EntryMoments::gaussian(2);
    let mut cases = 0;
    for p in 1..=5 {
        for n in 1..=4 {
            for d in 0..p {
                let m =
                    exact_expected_moment(p, n, d, 1, &law, &budget).map_err(|e| e.to_string())?;
                if m != BigRational::from_integer(1.into()) {
                    return Err(format!("(p,n,d)=({p},{n},{d}): E m_1 = {m}"));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} configurations"))
}

fn random_cdf(rng: &mut ChaCha8Rng) -> StepCdf {
    let len = rng.random_range(1..=8);
    let xs: Vec<f64> = (0..len)
        .map(|_| rng.random_range(0..=40) as f64 / 16.0)
        .collect();
    StepCdf::from_sample(&xs).expect("non-empty finite sample")
}

fn check_levy_grid(pairs: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e5);
    let step = 1.0 / 256.0;
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let (f, g) = (random_cdf(&mut rng), random_cdf(&mut rng));
        let exact = levy_distance(&f, &g);
        let grid = brute_levy(&f, &g, step);
        let diff = (exact - grid).abs();
        if diff > step {
            return Err(format!("bisection {exact} vs grid {grid}"));
        }
        let dk = kolmogorov_distance(&f, &g);
        if exact > dk + 1e-12 {
            return Err(format!("levy {exact} exceeds kolmogorov {dk}"));
        }
        worst = worst.max(diff);
    }
    Ok(format!("{pairs} pairs, max |bisection - grid| {worst:.2e}"))
}

/// With the band constraint vacuous the brute census must reproduce the
/// labelled count of ordered trees.
fn check_full_band_census() -> Outcome {
    let budget = OracleBudget::default();
    let mut cases = 0;
    for (p, n, l) in [(3usize, 3usize, 2u32), (4, 2, 3), (2, 3, 3), (3, 2, 4)] {
        let census = brute_count_banded_trees(p, n, p - 1, l as usize, &budget)
            .map_err(|e| e.to_string())?;
        let expected = count_ordered_trees(p as u64, n as u64, l);
        if census.total != expected {
            return Err(format!(
                "(p,n,l)=({p},{n},{l}): brute {} vs {expected}",
                census.total
            ));
        }
        cases += 1;
    }
    Ok(format!("{cases} configurations"))
}

/// Full expansion of the `p = n = 2` unbanded Gram matrix at `l <= 3`,
/// carried out over a symbolic monomial basis.
fn check_symbolic_expansion() -> Outcome {
    use std::collections::BTreeMap;
    // monomial: exponent of each of the four entries x_{ik}
    type Poly = BTreeMap<[u8; 4], BigInt>;
    let var = |i: usize, k: usize| i * 2 + k;
    let mul = |a: &Poly, b: &Poly| {
        let mut out = Poly::new();
        for (ma, ca) in a {
            for (mb, cb) in b {
                let mut m = *ma;
                for t in 0..4 {
                    m[t] += mb[t];
                }
                *out.entry(m).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        out
    };
    // n S = X X', entry (i, j) = sum_k x_ik x_jk
    let mut s = vec![vec![Poly::new(); 2]; 2];
    for (i, row) in s.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            for k in 0..2 {
                let mut m = [0u8; 4];
                m[var(i, k)] += 1;
                m[var(j, k)] += 1;
                *entry.entry(m).or_insert_with(BigInt::zero) += 1;
            }
        }
    }
    let law = EntryMoments::gaussian(6);
    let budget = OracleBudget::default();
    let mut power = s.clone();
    for l in 1..=3usize {
        if l > 1 {
            let mut next = vec![vec![Poly::new(); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for t in 0..2 {
                        for (m, c) in mul(&power[i][t], &s[t][j]) {
                            *next[i][j].entry(m).or_insert_with(BigInt::zero) += c;
                        }
                    }
                }
            }
            power = next;
        }
        let mut expectation = BigRational::zero();
        for i in 0..2 {
            for (m, c) in &power[i][i] {
                let mut term = BigRational::from_integer(c.clone());
                for &e in m {
                    term *= law.moment(e as usize).map_err(|e| e.to_string())?;
                }
                expectation += term;
            }
        }
        let symbolic =
            expectation / BigRational::from_integer(BigInt::from(2 * 2u64.pow(l as u32)));
        let oracle = exact_expected_moment(2, 2, 1, l, &law, &budget).map_err(|e| e.to_string())?;
        if symbolic != oracle {
            return Err(format!("l={l}: symbolic {symbolic} vs oracle {oracle}"));
        }
    }
    Ok("p=n=2, l<=3".into())
}

fn check_mp_domination(subject: &Subject<'_>) -> Outcome {
    let limits = Limits::default();
    for l in 1..=8 {
        let poly = limit_moment_polynomial_with(l, &limits, subject.degree_factor)
            .map_err(|e| e.to_string())?;
        for gamma in [0.05, 0.25, 1.0, 3.0] {
            let ours = poly.at_gamma(gamma);
            let mp = crate::moments::mp_moment_f64(l, 2.0 * gamma);
            if ours > mp * (1.0 + 1e-12) {
                return Err(format!("l={l} gamma={gamma}: {ours} above MP {mp}"));
            }
        }
        if poly.coefficients().iter().any(|c| c.is_negative()) {
            return Err(format!("l={l}: negative coefficient"));
        }
    }
    Ok("l <= 8".into())
}

/// Runs every check of `suite` against `subject`.
pub fn run_suite(suite: Suite, subject: &Subject<'_>) -> Report {
    let full = suite == Suite::Full;
    let mut checks = vec![
        run("compositions", || {
            check_compositions(if full { 48 } else { 24 })
        }),
        run("tree-census", || {
            check_tree_census(if full { 12 } else { 10 })
        }),
        run("walk-roundtrip", || {
            check_walk_roundtrip(if full { 12 } else { 9 })
        }),
        run("degree-factor-limit", || {
            check_degree_factor(
                subject,
                if full {
                    &[100, 1000, 10_000]
                } else {
                    &[100, 1000]
                },
            )
        }),
        run("moment-oracle-l2", || check_moment_oracle(subject)),
        run("exact-moment-l1", check_first_moment),
        run("levy-grid", || {
            check_levy_grid(if full { 400 } else { 100 })
        }),
    ];
    if full {
        checks.push(run("full-band-census", check_full_band_census));
        checks.push(run("symbolic-expansion", check_symbolic_expansion));
        checks.push(run("mp-domination", || check_mp_domination(subject)));
    }
    Report { suite, checks }
}
