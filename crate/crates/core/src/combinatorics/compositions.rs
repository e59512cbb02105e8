//! Restricted integer compositions: `k`-tuples with parts in `1..=m` summing to `n`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::{CombinatoricsError, Limits};

/// Binomial coefficient over signed arguments, with `C(a, b) = 0` whenever
/// `a < b`, `a < 0` or `b < 0`.
pub fn binomial(a: i64, b: i64) -> BigUint {
    if a < 0 || b < 0 || a < b {
        return BigUint::zero();
    }
    let b = b.min(a - b) as u64;
    let a = a as u64;
    let mut acc = BigUint::one();
    for t in 0..b {
        acc *= a - t;
        acc /= t + 1;
    }
    acc
}

/// Number of `k`-compositions of `n` with every part in `1..=m`, via the
/// inclusion-exclusion closed form `sum_j (-1)^j C(k,j) C(n - jm - 1, k - 1)`.
pub fn count_restricted_compositions(n: u64, k: u64, m: u64) -> BigUint {
    if k == 0 {
        return if n == 0 {
            BigUint::one()
        } else {
            BigUint::zero()
        };
    }
    if m == 0 || n < k || n > k.saturating_mul(m) {
        return BigUint::zero();
    }
    let (n, k, m) = (n as i64, k as i64, m as i64);
    let mut total = BigInt::zero();
    for j in 0..=k {
        let top = n - j * m - 1;
        if top < k - 1 {
            break;
        }
        let term = BigInt::from(binomial(k, j) * binomial(top, k - 1));
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    debug_assert!(!total.is_negative());
    total.to_biguint().unwrap_or_default()
}

/// Lexicographic stream of restricted compositions.
#[derive(Debug, Clone)]
pub struct Compositions {
    target: u64,
    max_part: u64,
    current: Option<Vec<u64>>,
}

impl Compositions {
    fn first(n: u64, k: usize, m: u64) -> Option<Vec<u64>> {
        if k == 0 || m == 0 || n < k as u64 || n > k as u64 * m {
            return None;
        }
        let mut parts = vec![0; k];
        fill_min(&mut parts, 0, n, m);
        Some(parts)
    }

    fn advance(&mut self) {
        let Some(parts) = self.current.as_mut() else {
            return;
        };
        let k = parts.len();
        let mut prefix: u64 = parts[..k - 1].iter().sum();
        // Rightmost position that can grow while the suffix stays feasible.
        for i in (0..k.saturating_sub(1)).rev() {
            prefix -= parts[i];
            let rest = (k - 1 - i) as u64;
            let grown = parts[i] + 1;
            if grown > self.max_part || prefix + grown > self.target {
                continue;
            }
            let remaining = self.target - prefix - grown;
            if remaining >= rest && remaining <= rest * self.max_part {
                parts[i] = grown;
                fill_min(parts, i + 1, remaining, self.max_part);
                return;
            }
        }
        self.current = None;
    }
}

/// Fills `parts[from..]` with the lexicographically smallest tuple summing to `sum`.
fn fill_min(parts: &mut [u64], from: usize, mut sum: u64, m: u64) {
    let len = parts.len();
    for t in from..len {
        let after = (len - 1 - t) as u64;
        let part = sum.saturating_sub(after * m).max(1);
        parts[t] = part;
        sum -= part;
    }
}

impl Iterator for Compositions {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.current.clone()?;
        self.advance();
        Some(out)
    }
}

/// Streams every restricted composition counted by
/// [`count_restricted_compositions`] in lexicographic order.
pub fn enumerate_restricted_compositions(
    n: u64,
    k: u64,
    m: u64,
    limits: &Limits,
) -> Result<Compositions, CombinatoricsError> {
    let work = k.saturating_mul(m);
    if work > limits.max_composition_work {
        return Err(CombinatoricsError::BudgetExceeded {
            requested: work,
            cap: limits.max_composition_work,
        });
    }
    Ok(Compositions {
        target: n,
        max_part: m,
        current: Compositions::first(n, k as usize, m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(n: u64, k: u64, m: u64) -> Vec<Vec<u64>> {
        enumerate_restricted_compositions(n, k, m, &Limits::default())
            .unwrap()
            .collect()
    }

    #[test]
    fn counts_match_hand_values() {
        assert_eq!(count_restricted_compositions(4, 2, 3), BigUint::from(3u32));
        assert_eq!(count_restricted_compositions(7, 3, 2), BigUint::zero());
        for m in 1..6 {
            for n in 0..9 {
                let expected = u32::from((1..=m).contains(&n));
                assert_eq!(
                    count_restricted_compositions(n, 1, m),
                    BigUint::from(expected)
                );
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(collect(3, 2, 2), vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(collect(2, 2, 1), vec![vec![1, 1]]);
        assert!(collect(1, 2, 5).is_empty());
        assert_eq!(collect(4, 2, 3), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
    }

    #[test]
    fn budget_is_enforced() {
        let limits = Limits {
            max_composition_work: 10,
            ..Limits::default()
        };
        assert!(matches!(
            enumerate_restricted_compositions(6, 3, 4, &limits),
            Err(CombinatoricsError::BudgetExceeded {
                requested: 12,
                cap: 10
            })
        ));
    }

    #[test]
    fn binomial_conventions() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(2, 5), BigUint::zero());
        assert_eq!(binomial(-1, 0), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
    }
}
