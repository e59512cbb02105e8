//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use banded_esd::combinatorics::{
    catalan, count_restricted_compositions, enumerate_canonical_trees,
    enumerate_restricted_compositions, narayana_count, Limits, PlaneTree,
};
use banded_esd::linalg::{eigenvalues, BandedSymmetricMatrix};
use banded_esd::metrics::{kolmogorov_distance, levy_distance, StepCdf, LEVY_TOLERANCE};
use banded_esd::moments::{degree_factor, limit_moment_polynomial, support_bound, to_f64};
use banded_esd::oracle::{
    brute_count_banded_trees, brute_levy, exact_expected_moment, EntryMoments, OracleBudget,
};
use banded_esd::simulate::{
    mean_moments, run_ensemble, Budget, EntryDistribution, SimulationConfig, SpectralSample,
};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn within(elapsed: Duration, cap: Duration, what: &str) -> Result<(), String> {
    if elapsed <= cap {
        Ok(())
    } else {
        Err(format!("{what} took {elapsed:.2?}, limit {cap:?}"))
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let limits = Limits::default();
    let mut checked = 0;
    for k in 1..=6usize {
        for m in 1..=8u64 {
            // odometer over [1, m]^k
            let mut tally = [0u64; 25];
            let mut parts = vec![1u64; k];
            'odometer: loop {
                let total = parts.iter().sum::<u64>() as usize;
                if total <= 24 {
                    tally[total] += 1;
                }
                let mut t = k;
                loop {
                    if t == 0 {
                        break 'odometer;
                    }
                    t -= 1;
                    parts[t] += 1;
                    if parts[t] <= m {
                        break;
                    }
                    parts[t] = 1;
                }
            }
            for n in 0..=24u64 {
                let formula = count_restricted_compositions(n, k as u64, m);
                let streamed = enumerate_restricted_compositions(n, k as u64, m, &limits)
                    .map_err(|e| e.to_string())?
                    .count() as u64;
                let brute = tally[n as usize];
                if formula != BigUint::from(brute) || streamed != brute {
                    return Err(format!(
                        "F({n},{k},{m}): formula {formula}, stream {streamed}, brute {brute}"
                    ));
                }
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1), "composition sweep")?;
    Ok(format!("{checked} triples, 0 mismatches, {elapsed:.2?}"))
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let limits = Limits::default();
    let mut total = 0u64;
    for l in 1..=12u32 {
        let mut per_r = vec![0u64; l as usize];
        let mut count = 0u64;
        for tree in enumerate_canonical_trees(l, &limits).map_err(|e| e.to_string())? {
            per_r[tree.r() as usize] += 1;
            count += 1;
            let back = PlaneTree::from_walk(&tree.canonical_walk()).map_err(|e| e.to_string())?;
            if back != tree {
                return Err(format!("roundtrip changed {:?}", tree.child_counts()));
            }
        }
        if BigUint::from(count) != catalan(l) {
            return Err(format!("l={l}: {count} trees vs Catalan {}", catalan(l)));
        }
        for (r, &c) in per_r.iter().enumerate() {
            // (1/(r+1)) C(l,r) C(l-1,r), written out independently
            let (lb, rb) = (u64::from(l), r as u64);
            let choose = |a: u64, b: u64| -> u64 {
                if b > a {
                    return 0;
                }
                (0..b).fold(1u64, |acc, t| acc * (a - t) / (t + 1))
            };
            let expected = choose(lb, rb) * choose(lb - 1, rb) / (rb + 1);
            if c != expected || BigUint::from(c) != narayana_count(l, r as u32) {
                return Err(format!("l={l} r={r}: {c} trees, expected {expected}"));
            }
        }
        total += count;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10), "tree census")?;
    Ok(format!(
        "{total} trees for l <= 12, all roundtrips exact, {elapsed:.2?}"
    ))
}

fn criterion_3() -> Verdict {
    let mut lines = Vec::new();
    for degree in 2u32..=5 {
        let c = degree_factor(degree).value;
        let mut devs = Vec::new();
        for d in [100u64, 1000, 10_000] {
            let deg = u64::from(degree);
            let count = count_restricted_compositions(deg * d, deg, 2 * d);
            let ratio = BigRational::from_integer(BigInt::from(count))
                / (c.clone() * BigRational::from_integer(BigInt::from(d).pow(degree - 1)));
            devs.push((to_f64(&ratio) - 1.0).abs());
        }
        if devs[2] > 0.01 {
            return Err(format!("D={degree}: deviation {:.3e} at d=1e4", devs[2]));
        }
        if !(devs[0] > devs[1] && devs[1] > devs[2]) {
            return Err(format!("D={degree}: deviations {devs:?} not decreasing"));
        }
        lines.push(format!("D={degree}: {:.1e}", devs[2]));
    }
    Ok(format!("deviation at d=1e4 {}", lines.join(", ")))
}

fn criterion_4() -> Verdict {
    let limits = Limits::default();
    let m = |l| limit_moment_polynomial(l, &limits).map_err(|e| e.to_string());
    let (m1, m2, m3) = (m(1)?, m(2)?, m(3)?);
    if m1.coefficients() != [q(1, 1)]
        || m2.coefficients() != [q(1, 1), q(2, 1)]
        || m3.coefficients() != [q(1, 1), q(6, 1), q(3, 1)]
    {
        return Err(format!("polynomials {m1}; {m2}; {m3}"));
    }
    let budget = OracleBudget {
        max_indices: 1 << 20,
    };
    let mut notes = Vec::new();
    for (name, law) in [
        ("rademacher", EntryMoments::rademacher(4)),
        ("normal", EntryMoments::gaussian(4)),
    ] {
        let mut previous = f64::INFINITY;
        let mut gaps = Vec::new();
        for (p, n, d) in [(8usize, 8usize, 4usize), (16, 12, 6), (32, 16, 8)] {
            let exact = to_f64(
                &exact_expected_moment(p, n, d, 2, &law, &budget).map_err(|e| e.to_string())?,
            );
            let gamma = d as f64 / n as f64;
            let gap = (exact - m2.at_gamma(gamma)).abs() / m2.at_gamma(gamma);
            let gap_y = (exact - m2.at_doubled(gamma)).abs() / m2.at_doubled(gamma);
            if gap >= gap_y {
                return Err(format!(
                    "{name} ({p},{n},{d}): gamma error {gap:.4} not below y error {gap_y:.4}"
                ));
            }
            if gap >= previous {
                return Err(format!("{name} ({p},{n},{d}): gap {gap:.4} did not shrink"));
            }
            previous = gap;
            gaps.push(format!("{gap:.3}/{gap_y:.3}"));
        }
        notes.push(format!("{name} gamma/y rel. errors {}", gaps.join(" ")));
    }
    Ok(format!("m1..m3 exact; {}", notes.join("; ")))
}

struct Ensemble {
    config: SimulationConfig,
    samples: Vec<SpectralSample>,
    elapsed: Duration,
}

fn criterion_5_ensemble() -> Result<Ensemble, String> {
    let config = SimulationConfig {
        p: 2000,
        n: 1000,
        d: 100,
        distribution: EntryDistribution::Normal,
        replicates: 5,
        seed: 2024,
    };
    let start = Instant::now();
    let samples = run_ensemble(&config, 4, true, &Budget::default()).map_err(|e| e.to_string())?;
    Ok(Ensemble {
        config,
        samples,
        elapsed: start.elapsed(),
    })
}

fn criterion_5(e: &Ensemble) -> Verdict {
    let limits = Limits::default();
    let means = mean_moments(&e.samples);
    let mut errs = Vec::new();
    for (l, &emp) in (1..=4).zip(&means) {
        let theory = limit_moment_polynomial(l, &limits)
            .map_err(|e| e.to_string())?
            .at_gamma(e.config.gamma());
        let rel = (emp - theory).abs() / theory;
        if rel > 0.03 {
            return Err(format!(
                "l={l}: empirical {emp:.5} vs {theory:.5} ({rel:.3})"
            ));
        }
        errs.push(format!("{rel:.4}"));
    }
    within(e.elapsed, Duration::from_secs(120), "ensemble")?;
    Ok(format!(
        "rel. errors l=1..4 {}; ensemble {:.1?}",
        errs.join(" "),
        e.elapsed
    ))
}

fn criterion_6(e: &Ensemble) -> Verdict {
    let y = e.config.y();
    let bound = support_bound(y) * 1.15;
    let max = e
        .samples
        .iter()
        .filter_map(|s| s.lambda_max())
        .fold(f64::NEG_INFINITY, f64::max);
    let min = e
        .samples
        .iter()
        .filter_map(|s| s.lambda_min())
        .fold(f64::INFINITY, f64::min);
    if max > bound {
        return Err(format!("max eigenvalue {max:.4} above {bound:.4}"));
    }
    Ok(format!(
        "max {max:.4} <= {bound:.4} ((1+sqrt y)^2 = {:.4}); reported min {min:.4}",
        support_bound(y)
    ))
}

/// Cyclic Jacobi on a dense symmetric matrix.
fn jacobi_eigenvalues(dim: usize, dense: &[f64]) -> Vec<f64> {
    let mut a = dense.to_vec();
    let total: f64 = a.iter().map(|x| x * x).sum();
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    off += a[i * dim + j].powi(2);
                }
            }
        }
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..dim {
            for r in p + 1..dim {
                let apr = a[p * dim + r];
                if apr == 0.0 {
                    continue;
                }
                let theta = (a[r * dim + r] - a[p * dim + p]) / (2.0 * apr);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let (akp, akr) = (a[k * dim + p], a[k * dim + r]);
                    a[k * dim + p] = c * akp - s * akr;
                    a[k * dim + r] = s * akp + c * akr;
                }
                for k in 0..dim {
                    let (apk, ark) = (a[p * dim + k], a[r * dim + k]);
                    a[p * dim + k] = c * apk - s * ark;
                    a[r * dim + k] = s * apk + c * ark;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..dim).map(|i| a[i * dim + i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let p = rng.random_range(1..=50);
        let d = rng.random_range(0..p);
        let s = BandedSymmetricMatrix::from_fn(p, d, |_, _| rng.random_range(-1.0..1.0));
        let ours = eigenvalues(&s).map_err(|e| e.to_string())?;
        let reference = jacobi_eigenvalues(p, &s.to_dense());
        let scale = reference
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        for (a, b) in ours.iter().zip(&reference) {
            let rel = (a - b).abs() / scale;
            if rel > 1e-8 {
                return Err(format!("case {case} (p={p}, d={d}): {a} vs {b}"));
            }
            worst = worst.max(rel);
        }
        let sum: f64 = ours.iter().sum();
        if (sum - s.trace()).abs() > 1e-8 * p as f64 {
            return Err(format!("case {case}: sum {sum} vs trace {}", s.trace()));
        }
    }
    Ok(format!("50 matrices, worst relative deviation {worst:.1e}"))
}

fn criterion_8() -> Verdict {
    let n = 3usize;
    let budget = OracleBudget::default();
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for p in [60usize, 120] {
        let mut devs = Vec::new();
        for d in [3usize, 6, 12] {
            let census =
                brute_count_banded_trees(p, n, d, 2, &budget).map_err(|e| e.to_string())?;
            let count = census
                .by_profile
                .iter()
                .find(|(profile, _)| profile.degrees() == [2])
                .map(|(_, c)| c.clone())
                .unwrap_or_default();
            let leading =
                BigUint::from(p * n) * count_restricted_compositions(2 * d as u64, 2, 2 * d as u64);
            let ratio = BigRational::new(count.into(), leading.into());
            devs.push((d, (to_f64(&ratio) - 1.0).abs()));
        }
        let fitted = devs
            .iter()
            .map(|&(d, dev)| d as f64 * dev)
            .fold(0.0, f64::max);
        let decreasing = devs.windows(2).all(|w| w[1].1 < w[0].1);
        let shown: Vec<String> = devs
            .iter()
            .map(|(d, dev)| format!("d={d}:{dev:.4}"))
            .collect();
        notes.push(format!("p={p} C={fitted:.3} [{}]", shown.join(" ")));
        if !decreasing {
            failures.push(format!(
                "p={p}: deviation not decreasing in d [{}]",
                shown.join(" ")
            ));
        }
    }
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{}; {}", failures.join("; "), notes.join("; ")))
    }
}

fn criterion_9(e: &Ensemble) -> Verdict {
    let cdf = |xs: &[f64]| StepCdf::from_sample(xs).expect("finite sample");
    let a = cdf(&[0.0, 1.0]);
    let hand = [
        ("d_K(F,F)", kolmogorov_distance(&a, &a), 0.0),
        (
            "d_K({0,1},{0,2})",
            kolmogorov_distance(&a, &cdf(&[0.0, 2.0])),
            0.5,
        ),
        (
            "d_K({0},{1})",
            kolmogorov_distance(&cdf(&[0.0]), &cdf(&[1.0])),
            1.0,
        ),
        ("d_L(F,F)", levy_distance(&a, &a), 0.0),
    ];
    for (name, got, want) in hand {
        if got != want {
            return Err(format!("{name} = {got}, expected {want}"));
        }
    }
    let (d0, dh) = (cdf(&[0.0]), cdf(&[0.5]));
    let levy_half = levy_distance(&d0, &dh);
    let grid = brute_levy(&d0, &dh, 1.0 / 4096.0);
    if (levy_half - 0.5).abs() > LEVY_TOLERANCE || (grid - 0.5).abs() > 1.0 / 4096.0 {
        return Err(format!(
            "d_L(delta_0, delta_0.5) = {levy_half}, grid {grid}"
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let mut draw = || {
            let len = rng.random_range(1..30);
            let xs: Vec<f64> = (0..len).map(|_| rng.random_range(-2.0..2.0)).collect();
            cdf(&xs)
        };
        let (f, g) = (draw(), draw());
        let (dl, dk) = (levy_distance(&f, &g), kolmogorov_distance(&f, &g));
        if dl > dk + LEVY_TOLERANCE {
            return Err(format!("levy {dl} > kolmogorov {dk}"));
        }
    }
    let spectra: Vec<&[f64]> = e
        .samples
        .iter()
        .filter_map(|s| s.eigenvalues.as_deref())
        .collect();
    let dk = kolmogorov_distance(&cdf(spectra[0]), &cdf(spectra[1]));
    if dk > 0.05 {
        return Err(format!("replicate spectra differ by d_K = {dk:.4}"));
    }
    Ok(format!(
        "hand values exact, d_L(delta_0, delta_0.5) = 0.5, 1000 pairs ok, replicate d_K = {dk:.4}"
    ))
}

fn histogram_moments(path: &Path) -> Result<[f64; 4], String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut moments = [0.0; 4];
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>().map_err(|e| format!("{line}: {e}")))
            .collect::<Result<_, _>>()?;
        let (lo, hi, density) = (fields[0], fields[1], fields[2]);
        let mid = 0.5 * (lo + hi);
        for (l, m) in moments.iter_mut().enumerate() {
            *m += density * (hi - lo) * mid.powi(l as i32 + 1);
        }
    }
    Ok(moments)
}

fn criterion_10() -> Verdict {
    let exe = env!("CARGO_BIN_EXE_banded-esd");
    let root: PathBuf =
        std::env::temp_dir().join(format!("banded-esd-acceptance-{}", std::process::id()));
    let limits = Limits::default();
    let mut notes = Vec::new();
    for (label, n) in [("n=360 (y=1/3)", 360usize), ("n=180 (y=2/3)", 180)] {
        let out = root.join(format!("n{n}"));
        let status = Command::new(exe)
            .args([
                "simulate",
                "--p",
                "1000",
                "--n",
                &n.to_string(),
                "--d",
                "60",
            ])
            .args([
                "--dist", "normal", "--reps", "5", "--seed", "7", "--eig", "--lmax", "4",
            ])
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!(
                "{label}: exit {:?}: {}",
                status.status.code(),
                String::from_utf8_lossy(&status.stderr)
            ));
        }
        let moments = histogram_moments(&out.join("histogram.csv"))?;
        let gamma = 60.0 / n as f64;
        let mut errs = Vec::new();
        for (l, &m) in (1..=4).zip(&moments) {
            let theory = limit_moment_polynomial(l, &limits)
                .map_err(|e| e.to_string())?
                .at_gamma(gamma);
            let rel = (m - theory).abs() / theory;
            if rel > 0.05 {
                return Err(format!("{label} l={l}: histogram {m:.4} vs {theory:.4}"));
            }
            errs.push(format!("{rel:.3}"));
        }
        notes.push(format!("{label} rel. errors {}", errs.join(" ")));
    }
    let _ = std::fs::remove_dir_all(&root);
    Ok(notes.join("; "))
}

fn main() {
    let start = Instant::now();
    let ensemble = criterion_5_ensemble();
    let shared = |f: fn(&Ensemble) -> Verdict| -> Verdict {
        match &ensemble {
            Ok(e) => f(e),
            Err(msg) => Err(format!("ensemble failed: {msg}")),
        }
    };
    let results: Vec<(u32, &str, Verdict)> = vec![
        (1, "composition counts", criterion_1()),
        (2, "tree census", criterion_2()),
        (3, "degree-factor limit", criterion_3()),
        (4, "exact-moment oracle agreement", criterion_4()),
        (5, "Monte Carlo moment convergence", shared(criterion_5)),
        (6, "support bound", shared(criterion_6)),
        (7, "eigensolver correctness", criterion_7()),
        (8, "leading term of banded class size", criterion_8()),
        (9, "distance metrics", shared(criterion_9)),
        (10, "figure reproduction at desk scale", criterion_10()),
    ];
    let mut failed = 0;
    for (id, name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1?}",
        results.len() - failed,
        start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
