//! Heuristic integer-relation search for frequencies known only as
//! decimals.
//!
//! A returned relation is checked against the exact decimal values, but
//! `None` only means the lattice reduction found nothing within the bounds;
//! it is not evidence of rational independence.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::lattice;
use crate::rational::{self, Rational};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_COEFF_BOUND: u64 = 1_000_000;
pub const MAX_VALUES: usize = 12;

/// A real number known to within `abs_err` of `value`.
#[derive(Debug, Clone, PartialEq)]
pub struct HpReal {
    pub value: Rational,
    pub abs_err: Rational,
}

impl HpReal {
    pub fn exact(value: Rational) -> Self {
        Self { value, abs_err: Rational::zero() }
    }

    /// Treats the literal as correct to half a unit in its last place.
    pub fn from_decimal(s: &str) -> Result<Self> {
        let d = rational::parse_decimal(s)?;
        Ok(Self { value: d.value, abs_err: d.half_ulp })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericRelation {
    pub coefficients: Vec<BigInt>,
    /// `|Σ n_k v_k|` evaluated on the given decimal values.
    pub residual: f64,
    /// Always true: the search cannot certify anything.
    pub heuristic: bool,
}

/// Searches for a nonzero integer vector `n` with `|Σ n_k v_k| < tol` and
/// `max |n_k| ≤ coeff_bound`, by LLL on the lattice spanned by
/// `(e_k, round(C·v_k))`.
pub fn detect_integer_relation_numeric(values: &[HpReal], coeff_bound: u64, tol: f64) -> Result<Option<NumericRelation>> {
    let n = values.len();
    if !(2..=MAX_VALUES).contains(&n) {
        return domain(format!("need between 2 and {MAX_VALUES} values, got {n}"));
    }
    if coeff_bound == 0 {
        return domain("coeff_bound must be at least 1");
    }
    if !(tol > 0.0) {
        return domain("tol must be positive");
    }
    let total_err: Rational = values.iter().map(|v| v.abs_err.clone()).sum();
    let error_bound = rational::to_f64(&(total_err * rational::int(coeff_bound as i64)));
    if error_bound >= tol {
        return Err(Error::InsufficientPrecision { error_bound, tol });
    }

    let max_err = values.iter().map(|v| v.abs_err.clone()).max().unwrap_or_else(Rational::zero);
    let scale = if max_err.is_zero() {
        Rational::from_integer(BigInt::from(10u32).pow(40))
    } else {
        max_err.recip().floor()
    };
    let half = rational::ratio(1, 2);
    let rows: Vec<Vec<BigInt>> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut row: Vec<BigInt> = (0..n).map(|j| BigInt::from((i == j) as u8)).collect();
            row.push((&scale * &v.value + &half).floor().to_integer());
            row
        })
        .collect();
    let reduced = lattice::lll(rows, &rational::ratio(99, 100));

    let bound = BigInt::from(coeff_bound);
    let mut best: Option<NumericRelation> = None;
    for row in reduced {
        let mut coeffs = row[..n].to_vec();
        if coeffs.iter().all(Zero::is_zero) || coeffs.iter().any(|c| c.abs() > bound) {
            continue;
        }
        lattice::normalize_primitive(&mut coeffs);
        let resid: Rational = coeffs.iter().zip(values).map(|(c, v)| Rational::from_integer(c.clone()) * &v.value).sum();
        let residual = rational::to_f64(&resid.abs());
        if residual >= tol {
            continue;
        }
        let size = |r: &NumericRelation| r.coefficients.iter().map(|c| c.abs()).max().and_then(|m| m.to_u64());
        let cand = NumericRelation { coefficients: coeffs, residual, heuristic: true };
        if best.as_ref().is_none_or(|b| size(&cand) < size(b)) {
            best = Some(cand);
        }
    }
    Ok(best)
}
