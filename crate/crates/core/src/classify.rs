//! Trajectory taxonomy: periodic, transitive projection, and trajectories
//! whose every finite projection is periodic while the whole is not.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{domain, Error, Result};
use crate::frequency::{family_generate, ArithmeticRule, Family, FrequencySystem, FrequencyVector, Period};
use crate::lattice;
use crate::rational;
use crate::torus::TorusSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    TypeIPeriodic,
    TypeIITransitiveProjection,
    TypeIIINew,
}

impl TrajectoryKind {
    pub fn roman(&self) -> &'static str {
        match self {
            TrajectoryKind::TypeIPeriodic => "I",
            TrajectoryKind::TypeIITransitiveProjection => "II",
            TrajectoryKind::TypeIIINew => "III",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certainty {
    FamilyCertified,
    PrefixCertified,
}

impl Certainty {
    pub fn as_str(&self) -> &'static str {
        match self {
            Certainty::FamilyCertified => "FamilyCertified",
            Certainty::PrefixCertified => "PrefixCertified",
        }
    }
}

pub type PeriodTable = Vec<(usize, Option<Period>)>;

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    Period(Period),
    /// 1-based indices of a relation-free subset of size at least two.
    Dense { subset: Vec<usize>, whole_prefix_independent: bool },
    /// Every projection is periodic; the table shows the periods growing.
    UnboundedPeriods(PeriodTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryClass {
    pub kind: TrajectoryKind,
    pub certificate: Certificate,
    pub certainty: Certainty,
    pub prefix_len: usize,
}

/// `prefix_period(N)` for `N = 1..=n_max`. Generative families are
/// extended past the stored prefix as needed.
pub fn projection_period_growth(sys: &FrequencySystem, n_max: usize) -> Result<PeriodTable> {
    if n_max == 0 {
        return domain("N_max must be at least 1");
    }
    let extended;
    let sys = if n_max <= sys.len() {
        sys
    } else {
        match sys.family() {
            Some(f @ (Family::Factorial | Family::PrimeRatio | Family::Arithmetic { .. })) => {
                extended = family_generate(f, n_max)?;
                &extended
            }
            _ => return Err(Error::PrefixTooShort { available: sys.len(), required: n_max }),
        }
    };
    (1..=n_max).map(|n| Ok((n, sys.prefix_period(n)?))).collect()
}

/// Period of a whole arithmetic family: `2π / (λ0 · gcd(n_k))`.
fn arithmetic_family_period(lambda0: &rational::Rational, rule: &ArithmeticRule) -> Period {
    let g = match rule {
        ArithmeticRule::Index => BigInt::one(),
        ArithmeticRule::List(ns) => ns.iter().fold(BigInt::from(0), |g, n| num_integer::Integer::gcd(&g, n)),
    };
    Period { lambda0: FrequencyVector::rational(lambda0 * rational::Rational::from_integer(g)) }
}

fn strictly_increasing(table: &PeriodTable) -> bool {
    table.windows(2).all(|w| match (&w[0].1, &w[1].1) {
        (Some(a), Some(b)) => a.ratio_to(b).is_some_and(|r| r > rational::int(1)),
        _ => false,
    })
}

fn independent_subset(sys: &FrequencySystem, upto: usize) -> Result<Vec<usize>> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut rows = Vec::new();
    for k in 0..upto {
        let coords: Vec<rational::Rational> = sys.basis().iter().map(|b| sys.prefix()[k].coeff(&b.id)).collect();
        rows.push(coords);
        if lattice::rank_q(&rows) > chosen.len() {
            chosen.push(k + 1);
        } else {
            rows.pop();
        }
    }
    Ok(chosen)
}

pub fn classify_trajectory(sys: &FrequencySystem, torus: &TorusSpec, upto: usize) -> Result<TrajectoryClass> {
    if upto < 2 {
        return domain("classification needs upto >= 2");
    }
    if upto > sys.len() {
        return Err(Error::PrefixTooShort { available: sys.len(), required: upto });
    }
    if torus.radius(upto).is_none() {
        return domain(format!("torus has fewer than {upto} circles"));
    }
    let class = |kind, certificate, certainty| TrajectoryClass { kind, certificate, certainty, prefix_len: upto };

    if let Some(Family::Arithmetic { lambda0, rule }) = sys.family() {
        return Ok(class(
            TrajectoryKind::TypeIPeriodic,
            Certificate::Period(arithmetic_family_period(lambda0, rule)),
            Certainty::FamilyCertified,
        ));
    }

    if sys.common_base(upto)?.is_none() {
        let subset = independent_subset(sys, upto)?;
        let declared = subset.iter().all(|&k| {
            sys.prefix()[k - 1]
                .coords()
                .keys()
                .all(|id| sys.basis().iter().any(|b| &b.id == id && b.independence_declared))
        });
        let certainty = if declared { Certainty::FamilyCertified } else { Certainty::PrefixCertified };
        let whole_prefix_independent = subset.len() == upto;
        return Ok(class(
            TrajectoryKind::TypeIITransitiveProjection,
            Certificate::Dense { subset, whole_prefix_independent },
            certainty,
        ));
    }

    let table = projection_period_growth(sys, upto)?;
    match sys.family() {
        Some(f) if f.has_unbounded_periods() => {
            Ok(class(TrajectoryKind::TypeIIINew, Certificate::UnboundedPeriods(table), Certainty::FamilyCertified))
        }
        Some(Family::Explicit) if upto == sys.len() => {
            let period = table.last().and_then(|(_, p)| p.clone()).expect("common base exists");
            Ok(class(TrajectoryKind::TypeIPeriodic, Certificate::Period(period), Certainty::FamilyCertified))
        }
        _ => {
            let n = table.len();
            let grew = strictly_increasing(&table[n - 2..].to_vec());
            if grew {
                Ok(class(TrajectoryKind::TypeIIINew, Certificate::UnboundedPeriods(table), Certainty::PrefixCertified))
            } else {
                let period = table[n - 1].1.clone().expect("common base exists");
                Ok(class(TrajectoryKind::TypeIPeriodic, Certificate::Period(period), Certainty::PrefixCertified))
            }
        }
    }
}

/// Checks that a class carries the certificate its kind requires.
pub fn certificate_matches_kind(class: &TrajectoryClass) -> bool {
    matches!(
        (&class.kind, &class.certificate),
        (TrajectoryKind::TypeIPeriodic, Certificate::Period(_))
            | (TrajectoryKind::TypeIITransitiveProjection, Certificate::Dense { .. })
            | (TrajectoryKind::TypeIIINew, Certificate::UnboundedPeriods(_))
    )
}

/// True when the table strictly grows at every step.
pub fn table_strictly_increasing(table: &PeriodTable) -> bool {
    strictly_increasing(table)
}
