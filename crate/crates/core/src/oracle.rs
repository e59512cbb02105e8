//! Brute-force ground truth at desk scale.
//!
//! Everything here is exact and deliberately slow: plain enumeration over
//! multi-indices with hard budgets, no asymptotics.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::combinatorics::{DegreeProfile, PlaneTree, Vertex};
use crate::metrics::StepCdf;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("enumeration of {requested} multi-indices exceeds the budget of {cap}")]
    BudgetExceeded { requested: u128, cap: u128 },
    #[error("moment E X^{0} was needed but not supplied")]
    MissingMoment(usize),
    #[error("parameters must be positive")]
    Degenerate,
}

/// Hard cap on the number of enumerated multi-indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_indices: u128,
}

impl Default for OracleBudget {
    fn default() -> Self {
        // (p n)^l with p = n = 8, l = 4
        Self {
            max_indices: 64u128.pow(4),
        }
    }
}

impl OracleBudget {
    fn check(&self, requested: u128) -> Result<(), OracleError> {
        if requested > self.max_indices {
            Err(OracleError::BudgetExceeded {
                requested,
                cap: self.max_indices,
            })
        } else {
            Ok(())
        }
    }
}

/// Even moments of a symmetric entry law: `even[j] = E X^(2(j+1))`.
/// Odd moments are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryMoments {
    even: Vec<BigRational>,
}

impl EntryMoments {
    pub fn new(even: Vec<BigRational>) -> Self {
        Self { even }
    }

    /// `+-1` with equal probability: every even moment is 1.
    pub fn rademacher(max_order: usize) -> Self {
        Self::new(vec![BigRational::one(); max_order.div_ceil(2)])
    }

    /// Standard normal: `E X^(2j) = (2j - 1)!!`.
    pub fn gaussian(max_order: usize) -> Self {
        let mut even = Vec::new();
        let mut acc = BigInt::one();
        for j in 1..=max_order.div_ceil(2) {
            acc *= BigInt::from(2 * j - 1);
            even.push(BigRational::from_integer(acc.clone()));
        }
        Self::new(even)
    }

    /// `E X^order`.
    pub fn moment(&self, order: usize) -> Result<BigRational, OracleError> {
        if order == 0 {
            return Ok(BigRational::one());
        }
        if order % 2 == 1 {
            return Ok(BigRational::zero());
        }
        self.even
            .get(order / 2 - 1)
            .cloned()
            .ok_or(OracleError::MissingMoment(order))
    }
}

/// Calls `visit` on every `i in [p]^l` with `|i_s - i_{s+1}| <= d` cyclically.
fn for_each_banded_cycle(p: usize, d: usize, l: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(p: usize, d: usize, l: usize, prefix: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if prefix.len() == l {
            if prefix[l - 1].abs_diff(prefix[0]) <= d {
                visit(prefix);
            }
            return;
        }
        let range = match prefix.last() {
            Some(&last) => last.saturating_sub(d)..(last + d + 1).min(p),
            None => 0..p,
        };
        for next in range {
            prefix.push(next);
            rec(p, d, l, prefix, visit);
            prefix.pop();
        }
    }
    rec(p, d, l, &mut Vec::with_capacity(l), &mut visit);
}

/// Calls `visit` on every `k in [n]^l` in lexicographic order.
fn for_each_tuple(n: usize, l: usize, mut visit: impl FnMut(&[usize])) {
    let mut k = vec![0usize; l];
    loop {
        visit(&k);
        let mut t = l;
        loop {
            if t == 0 {
                return;
            }
            t -= 1;
            k[t] += 1;
            if k[t] < n {
                break;
            }
            k[t] = 0;
        }
    }
}

/// `E m_{p,l} = (1/(p n^l)) sum E prod X_{i_j k_j} X_{i_{j+1} k_j}` over banded
/// multi-indices, with each distinct entry of multiplicity `v` contributing
/// `E X^v`.
pub fn exact_expected_moment(
    p: usize,
    n: usize,
    d: usize,
    l: usize,
    moments: &EntryMoments,
    budget: &OracleBudget,
) -> Result<BigRational, OracleError> {
    if p == 0 || n == 0 || l == 0 {
        return Err(OracleError::Degenerate);
    }
    budget.check((p as u128 * n as u128).pow(l as u32))?;
    // multiplicity signature (sorted, all even) -> number of index pairs
    let mut signatures: HashMap<Vec<u8>, u64> = HashMap::new();
    let mut entries = Vec::with_capacity(2 * l);
    let mut signature = Vec::with_capacity(2 * l);
    for_each_banded_cycle(p, d, l, |i| {
        for_each_tuple(n, l, |k| {
            entries.clear();
            for j in 0..l {
                entries.push((i[j], k[j]));
                entries.push((i[(j + 1) % l], k[j]));
            }
            entries.sort_unstable();
            signature.clear();
            let mut run = 1u8;
            for t in 1..=entries.len() {
                if t < entries.len() && entries[t] == entries[t - 1] {
                    run += 1;
                } else {
                    if run % 2 == 1 {
                        return;
                    }
                    signature.push(run);
                    run = 1;
                }
            }
            signature.sort_unstable();
            *signatures.entry(signature.clone()).or_default() += 1;
        });
    });
    let mut total = BigRational::zero();
    for (signature, count) in signatures {
        let mut term = BigRational::from_integer(BigInt::from(count));
        for &v in &signature {
            term *= moments.moment(v as usize)?;
        }
        total += term;
    }
    let norm = BigInt::from(p) * BigInt::from(n).pow(l as u32);
    Ok(total / BigRational::from_integer(norm))
}

/// Brute-force census of d-banded tree walks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BandedTreeCensus {
    pub by_tree: BTreeMap<PlaneTree, BigUint>,
    pub by_profile: BTreeMap<DegreeProfile, BigUint>,
    pub total: BigUint,
}

/// Counts `(i, k) in [p]^l x [n]^l` whose walk `i1, k1, ..., il, kl, i1` is a
/// tree walk (every edge crossed exactly twice) with `|i_s - i_{s+1}| <= d`.
pub fn brute_count_banded_trees(
    p: usize,
    n: usize,
    d: usize,
    l: usize,
    budget: &OracleBudget,
) -> Result<BandedTreeCensus, OracleError> {
    if p == 0 || n == 0 || l == 0 {
        return Err(OracleError::Degenerate);
    }
    budget.check((p as u128).pow(l as u32) * (n as u128).pow(l as u32))?;
    let mut by_tree: BTreeMap<PlaneTree, u64> = BTreeMap::new();
    let mut walk = Vec::with_capacity(2 * l + 1);
    let mut distinct = Vec::with_capacity(2 * l);
    for_each_banded_cycle(p, d, l, |i| {
        for_each_tuple(n, l, |k| {
            distinct.clear();
            distinct.extend(i.iter().map(|&x| (0u8, x)));
            distinct.extend(k.iter().map(|&x| (1u8, x)));
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() != l + 1 {
                return;
            }
            walk.clear();
            for j in 0..l {
                walk.push(Vertex::i(i[j] as u32));
                walk.push(Vertex::k(k[j] as u32));
            }
            walk.push(Vertex::i(i[0] as u32));
            if let Ok(tree) = PlaneTree::from_walk(&walk) {
                *by_tree.entry(tree).or_default() += 1;
            }
        });
    });
    let mut census = BandedTreeCensus::default();
    for (tree, count) in by_tree {
        let count = BigUint::from(count);
        *census.by_profile.entry(tree.degree_profile()).or_default() += &count;
        census.total += &count;
        census.by_tree.insert(tree, count);
    }
    Ok(census)
}

/// Smallest multiple of `step` in `[0, 1]` for which the Levy sandwich
/// `F(x - e) - e <= G(x) <= F(x + e) + e` holds at every point of an
/// `x`-grid with spacing `step` covering both supports.
pub fn brute_levy(f: &StepCdf, g: &StepCdf, step: f64) -> f64 {
    assert!(step > 0.0, "grid step must be positive");
    let lo = f.jumps()[0].min(g.jumps()[0]) - 1.0 - step;
    let hi = f.jumps()[f.len() - 1].max(g.jumps()[g.len() - 1]) + 1.0 + step;
    let xs: Vec<f64> = (0..)
        .map(|t| lo + t as f64 * step)
        .take_while(|&x| x <= hi)
        .collect();
    let epsilons = (1.0 / step).ceil() as usize;
    for t in 0..=epsilons {
        let eps = (t as f64 * step).min(1.0);
        let ok = xs
            .iter()
            .all(|&x| f.eval(x - eps) - eps <= g.eval(x) && g.eval(x) <= f.eval(x + eps) + eps);
        if ok {
            return eps;
        }
    }
    1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn first_moment_is_one() {
        let budget = OracleBudget::default();
        for (p, n, d) in [(1, 1, 0), (3, 2, 1), (4, 3, 0), (5, 2, 4)] {
            let m = exact_expected_moment(p, n, d, 1, &EntryMoments::gaussian(2), &budget).unwrap();
            assert_eq!(m, q(1, 1));
        }
    }

    #[test]
    fn second_moment_closed_form() {
        // E m_2 = 1 + (E X^4 - 1)/n + (2pd - d(d+1))/(p n)
        let budget = OracleBudget::default();
        for (p, n, d) in [(3usize, 2usize, 1usize), (5, 3, 2), (4, 4, 3), (6, 2, 0)] {
            for (law, fourth) in [
                (EntryMoments::rademacher(4), 1),
                (EntryMoments::gaussian(4), 3),
            ] {
                let got = exact_expected_moment(p, n, d, 2, &law, &budget).unwrap();
                let (pi, ni, di) = (p as i64, n as i64, d as i64);
                let expected =
                    q(1, 1) + q(fourth - 1, ni) + q(2 * pi * di - di * (di + 1), pi * ni);
                assert_eq!(got, expected, "p={p} n={n} d={d}");
            }
        }
    }

    #[test]
    fn regression_rademacher_p3_n2_d1() {
        let m = exact_expected_moment(
            3,
            2,
            1,
            2,
            &EntryMoments::rademacher(4),
            &OracleBudget::default(),
        )
        .unwrap();
        assert_eq!(m, q(5, 3));
    }

    #[test]
    fn budgets_are_hard() {
        let tight = OracleBudget { max_indices: 10 };
        assert!(matches!(
            exact_expected_moment(3, 3, 1, 2, &EntryMoments::rademacher(4), &tight),
            Err(OracleError::BudgetExceeded {
                requested: 81,
                cap: 10
            })
        ));
        assert!(matches!(
            brute_count_banded_trees(3, 3, 1, 2, &tight),
            Err(OracleError::BudgetExceeded { .. })
        ));
        assert!(matches!(
            exact_expected_moment(
                2,
                2,
                1,
                2,
                &EntryMoments::rademacher(2),
                &OracleBudget::default()
            ),
            Err(OracleError::MissingMoment(4))
        ));
    }

    #[test]
    fn single_edge_census() {
        let census = brute_count_banded_trees(5, 4, 0, 1, &OracleBudget::default()).unwrap();
        assert_eq!(census.total, BigUint::from(20u32));
    }
}
