//! Exact limiting moments of the banded sample covariance spectrum.
//!
//! The canonical parameter is `gamma = lim d/n`. The conventional
//! `y = lim 2d/n` is `2 * gamma`. A canonical tree with K-degrees
//! `D_1, ..., D_{l-r}` contributes `gamma^r * prod c_{D_s}`, where `c_D` is the
//! leading coefficient of `F(D d, D, 2d)` as a polynomial in `d`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinatorics::{
    count_restricted_compositions, enumerate_canonical_trees, narayana_count, CombinatoricsError,
    DegreeProfile, Limits, PlaneTree,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MomentError {
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
    #[error("outside the counting regime: need d >= l and p > 2 l d (p = {p}, d = {d}, l = {l})")]
    RegimeViolation { p: u64, d: u64, l: u32 },
    #[error("degree profile {profile} is inconsistent with r = {r}")]
    InconsistentProfile { profile: DegreeProfile, r: u32 },
    #[error("cannot parse {0:?} as an exact rational")]
    Parse(String),
}

/// `c_D` for a K-line vertex of degree `D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeFactor {
    pub degree: u32,
    pub value: BigRational,
}

fn factorial(x: u32) -> BigInt {
    (1..=x).fold(BigInt::one(), |acc, t| acc * t)
}

/// `c_D = sum_{j: D > 2j} (-1)^j D (D - 2j)^(D-1) / (j! (D - j)!)`.
pub fn degree_factor(degree: u32) -> DegreeFactor {
    assert!(degree >= 1, "degree must be positive");
    let big_d = BigInt::from(degree);
    let mut value = BigRational::zero();
    for j in (0..).take_while(|j| degree > 2 * j) {
        let numer = &big_d * BigInt::from(degree - 2 * j).pow(degree - 1);
        let denom = factorial(j) * factorial(degree - j);
        let term = BigRational::new(numer, denom);
        if j % 2 == 0 {
            value += term;
        } else {
            value -= term;
        }
    }
    DegreeFactor { degree, value }
}

/// Exact polynomial in `gamma`; `coefficients[r]` multiplies `gamma^r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentPolynomial {
    order: u32,
    coefficients: Vec<BigRational>,
}

impl MomentPolynomial {
    pub fn new(order: u32, mut coefficients: Vec<BigRational>) -> Self {
        while coefficients.len() > 1 && coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        Self {
            order,
            coefficients,
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    /// Horner evaluation at an exact point.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coefficients
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Value under the `gamma` convention.
    pub fn at_gamma(&self, gamma: f64) -> f64 {
        self.eval_f64(gamma)
    }

    /// Value of the same tree sum with `y = 2 gamma` substituted for `gamma`,
    /// i.e. the alternative `y`-convention reading.
    pub fn at_doubled(&self, gamma: f64) -> f64 {
        self.eval_f64(2.0 * gamma)
    }

    /// Coefficients as `a/b` strings separated by spaces.
    pub fn coefficient_string(&self) -> String {
        self.coefficients
            .iter()
            .map(format_rational)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for MomentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (power, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() && !(first && power + 1 == self.coefficients.len()) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match power {
                0 => write!(f, "{}", format_rational(c))?,
                1 => write!(f, "{}*g", format_rational(c))?,
                _ => write!(f, "{}*g^{power}", format_rational(c))?,
            }
        }
        Ok(())
    }
}

/// Renders an exact rational as `a` or `a/b`.
pub fn format_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `3`, `-2/7`, `0.125` or `1e-3` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, MomentError> {
    let err = || MomentError::Parse(text.to_string());
    let s = text.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| err())?;
        let b: BigInt = b.trim().parse().map_err(|_| err())?;
        if b.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(a, b));
    }
    let (mantissa, exponent) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let numer: BigInt = digits.parse().map_err(|_| err())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * ten.pow(scale as u32))
    } else {
        BigRational::new(numer, ten.pow(scale.unsigned_abs()))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Contribution `(r, prod c_D)` of one canonical tree.
pub fn tree_contribution(
    tree: &PlaneTree,
    factor: &dyn Fn(u32) -> BigRational,
) -> (u32, BigRational) {
    let product = tree
        .degree_profile()
        .degrees()
        .iter()
        .fold(BigRational::one(), |acc, &d| acc * factor(d));
    (tree.r(), product)
}

/// `m_l` as an exact polynomial in `gamma`.
pub fn limit_moment_polynomial(l: u32, limits: &Limits) -> Result<MomentPolynomial, MomentError> {
    limit_moment_polynomial_with(l, limits, &|d| degree_factor(d).value)
}

/// Same tree sum with a caller-supplied degree factor.
pub fn limit_moment_polynomial_with(
    l: u32,
    limits: &Limits,
    factor: &dyn Fn(u32) -> BigRational,
) -> Result<MomentPolynomial, MomentError> {
    let mut by_profile: HashMap<DegreeProfile, u64> = HashMap::new();
    for tree in enumerate_canonical_trees(l, limits)? {
        *by_profile.entry(tree.degree_profile()).or_default() += 1;
    }
    let mut factors: HashMap<u32, BigRational> = HashMap::new();
    let mut coefficients = vec![BigRational::zero(); l as usize];
    for (profile, count) in by_profile {
        let r = (profile.edge_count() as usize) - profile.len();
        let mut product = BigRational::from_integer(BigInt::from(count));
        for &d in profile.degrees() {
            product *= factors.entry(d).or_insert_with(|| factor(d)).clone();
        }
        coefficients[r] += product;
    }
    Ok(MomentPolynomial::new(l, coefficients))
}

/// Leading-order size of a d-banded isomorphy class:
/// `p n^(l-r) prod F(D d, D, 2d)`. The lower-order error terms are not modelled.
pub fn banded_class_size_leading(
    p: u64,
    n: u64,
    d: u64,
    profile: &DegreeProfile,
    r: u32,
) -> Result<BigUint, MomentError> {
    let l = profile.edge_count();
    if profile.is_empty() || profile.len() as u32 + r != l {
        return Err(MomentError::InconsistentProfile {
            profile: profile.clone(),
            r,
        });
    }
    if d < u64::from(l) || p <= 2 * u64::from(l) * d {
        return Err(MomentError::RegimeViolation { p, d, l });
    }
    let mut size = BigUint::from(p) * BigUint::from(n).pow(l - r);
    for &deg in profile.degrees() {
        let deg = u64::from(deg);
        size *= count_restricted_compositions(deg * d, deg, 2 * d);
    }
    Ok(size)
}

/// Marchenko-Pastur moment `sum_r C(l,r) C(l-1,r) / (r+1) * y^r`.
pub fn mp_moment(l: u32, y: &BigRational) -> BigRational {
    let mut power = BigRational::one();
    let mut total = BigRational::zero();
    for r in 0..l {
        total += BigRational::from_integer(BigInt::from(narayana_count(l, r))) * &power;
        power *= y;
    }
    total
}

pub fn mp_moment_f64(l: u32, y: f64) -> f64 {
    (0..l)
        .map(|r| narayana_count(l, r).to_f64().unwrap_or(f64::INFINITY) * y.powi(r as i32))
        .sum()
}

/// `(1 + sqrt(y))^2`, the bound on the support of the limit law.
pub fn support_bound(y: f64) -> f64 {
    let s = 1.0 + y.sqrt();
    s * s
}

/// Converts to `f64` for reporting.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(if x.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// Moment table CSV: `l,coefficients,gamma_convention,doubled_convention`.
/// With `exact`, values are printed as fractions.
pub fn moment_table_csv(polys: &[MomentPolynomial], gamma: &BigRational, exact: bool) -> String {
    let y = gamma * BigRational::from_integer(BigInt::from(2));
    let mut out = String::new();
    out.push_str(&format!(
        "# gamma={} y={}\n",
        format_rational(gamma),
        format_rational(&y)
    ));
    out.push_str("l,coefficients,gamma_convention,doubled_convention\n");
    for poly in polys {
        let (a, b) = (poly.eval(gamma), poly.eval(&y));
        let (a, b) = if exact {
            (format_rational(&a), format_rational(&b))
        } else {
            (to_f64(&a).to_string(), to_f64(&b).to_string())
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            poly.order(),
            poly.coefficient_string(),
            a,
            b
        ));
    }
    out
}
