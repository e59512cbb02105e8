//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string; errors surface as JS exceptions.

use banded_esd::combinatorics::{enumerate_canonical_trees, Limits};
use banded_esd::metrics::moment_report;
use banded_esd::moments::{
    degree_factor, format_rational, limit_moment_polynomial, mp_moment_f64, support_bound, to_f64,
    tree_contribution,
};
use banded_esd::simulate::{histogram, mean_moments, run_ensemble, Budget, SimulationConfig};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest dimension the page will simulate.
pub const MAX_DIMENSION: usize = 800;
/// Largest tree size the page will list.
pub const MAX_TREE_EDGES: u32 = 8;
const MAX_ORDER: u32 = 10;

pub fn moment_curves_value(lmax: u32, gamma_max: f64, points: u32) -> Result<Value, String> {
    if !(1..=MAX_ORDER).contains(&lmax) {
        return Err(format!("order must be between 1 and {MAX_ORDER}"));
    }
    if !(gamma_max.is_finite() && gamma_max > 0.0) || points < 2 {
        return Err("need a positive gamma range and at least two points".into());
    }
    let gammas: Vec<f64> = (0..points)
        .map(|t| gamma_max * f64::from(t) / f64::from(points - 1))
        .collect();
    let limits = Limits::default();
    let mut orders = Vec::new();
    for l in 1..=lmax {
        let poly = limit_moment_polynomial(l, &limits).map_err(|e| e.to_string())?;
        orders.push(json!({
            "l": l,
            "polynomial": poly.to_string(),
            "coefficients": poly.coefficients().iter().map(to_f64).collect::<Vec<_>>(),
            "gamma": gammas.iter().map(|&g| poly.at_gamma(g)).collect::<Vec<_>>(),
            "doubled": gammas.iter().map(|&g| poly.at_doubled(g)).collect::<Vec<_>>(),
            "marchenko_pastur": gammas.iter().map(|&g| mp_moment_f64(l, 2.0 * g)).collect::<Vec<_>>(),
        }));
    }
    Ok(json!({ "gammas": gammas, "orders": orders }))
}

pub fn simulate_histogram_value(
    p: usize,
    n: usize,
    d: usize,
    dist: &str,
    reps: usize,
    seed: u32,
    bins: usize,
) -> Result<Value, String> {
    if p > MAX_DIMENSION || n > 4 * MAX_DIMENSION {
        return Err(format!(
            "the demo caps p at {MAX_DIMENSION} and n at {}",
            4 * MAX_DIMENSION
        ));
    }
    let config = SimulationConfig {
        p,
        n,
        d,
        distribution: dist
            .parse()
            .map_err(|e: banded_esd::simulate::SimulateError| e.to_string())?,
        replicates: reps,
        seed: u64::from(seed),
    };
    let budget = Budget {
        max_work: 400_000_000,
    };
    let samples = run_ensemble(&config, 4, true, &budget).map_err(|e| e.to_string())?;
    let hist = histogram(&samples, bins).map_err(|e| e.to_string())?;
    let limits = Limits::default();
    let polys = (1..=4)
        .map(|l| limit_moment_polynomial(l, &limits))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let report = moment_report(&mean_moments(&samples), &polys, config.gamma())
        .map_err(|e| e.to_string())?;
    let lo = samples
        .iter()
        .filter_map(|s| s.lambda_min())
        .fold(f64::INFINITY, f64::min);
    let hi = samples
        .iter()
        .filter_map(|s| s.lambda_max())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(json!({
        "config": config,
        "gamma": config.gamma(),
        "y": config.y(),
        "histogram": hist,
        "report": report,
        "lambda_min": lo,
        "lambda_max": hi,
        "support_bound": support_bound(config.y()),
    }))
}

pub fn tree_listing_value(l: u32) -> Result<Value, String> {
    if l > MAX_TREE_EDGES {
        return Err(format!(
            "the demo lists trees with at most {MAX_TREE_EDGES} edges"
        ));
    }
    let limits = Limits::default();
    let factor = |d| degree_factor(d).value;
    let trees: Vec<Value> = enumerate_canonical_trees(l, &limits)
        .map_err(|e| e.to_string())?
        .map(|tree| {
            let (r, product) = tree_contribution(&tree, &factor);
            json!({
                "walk": tree.to_string(),
                "child_counts": tree.child_counts(),
                "r": r,
                "profile": tree.degree_profile().degrees(),
                "contribution": format_rational(&product),
            })
        })
        .collect();
    let poly = limit_moment_polynomial(l, &limits).map_err(|e| e.to_string())?;
    Ok(json!({ "l": l, "trees": trees, "polynomial": poly.to_string() }))
}

fn finish(value: Result<Value, String>) -> Result<String, JsError> {
    value.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

/// Limiting moment curves `m_l(gamma)` on `[0, gamma_max]` under both
/// conventions, with the Marchenko-Pastur moments for reference.
#[wasm_bindgen]
pub fn moment_curves(lmax: u32, gamma_max: f64, points: u32) -> Result<String, JsError> {
    finish(moment_curves_value(lmax, gamma_max, points))
}

/// Pooled eigenvalue histogram of a small ensemble plus its moment report.
#[wasm_bindgen]
pub fn simulate_histogram(
    p: usize,
    n: usize,
    d: usize,
    dist: &str,
    reps: usize,
    seed: u32,
    bins: usize,
) -> Result<String, JsError> {
    finish(simulate_histogram_value(p, n, d, dist, reps, seed, bins))
}

/// Canonical trees with `l` edges and their contributions.
#[wasm_bindgen]
pub fn tree_listing(l: u32) -> Result<String, JsError> {
    finish(tree_listing_value(l))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_start_at_one() {
        let v = moment_curves_value(3, 1.0, 5).unwrap();
        assert_eq!(v["gammas"].as_array().unwrap().len(), 5);
        let m3 = &v["orders"][2];
        assert_eq!(m3["gamma"][0], 1.0);
        // 1 + 6 + 3 at gamma = 1
        assert_eq!(m3["gamma"][4], 10.0);
        assert!(moment_curves_value(0, 1.0, 5).is_err());
    }

    #[test]
    fn histogram_is_normalised() {
        let v = simulate_histogram_value(60, 40, 4, "rademacher", 2, 3, 20).unwrap();
        let density: Vec<f64> = v["histogram"]["density"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        let edges = v["histogram"]["edges"].as_array().unwrap();
        let width = edges[1].as_f64().unwrap() - edges[0].as_f64().unwrap();
        let mass: f64 = density.iter().sum::<f64>() * width;
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(simulate_histogram_value(5000, 40, 4, "normal", 1, 0, 10).is_err());
        assert!(simulate_histogram_value(50, 40, 4, "cauchy", 1, 0, 10).is_err());
    }

    #[test]
    fn tree_listing_counts() {
        let v = tree_listing_value(3).unwrap();
        assert_eq!(v["trees"].as_array().unwrap().len(), 5);
        assert_eq!(v["polynomial"], "1 + 6*g + 3*g^2");
        assert!(tree_listing_value(0).is_err());
        assert!(tree_listing_value(9).is_err());
    }
}
