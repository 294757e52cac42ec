//! The invariant torus, the linear flow on it, and its conserved
//! quantities.
//!
//! Angles are the primary state. A point stores angles for its first `N`
//! circles; everything beyond is a frozen tail whose only contribution to
//! distances is the radius budget `Σ_{k>N} r_k²`. The chart is
//! `q_k = r_k cos θ_k`, `p_k = −r_k sin θ_k`.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{domain, Error, Result};
use crate::frequency::FrequencySystem;
use crate::rational::{self, Rational};

/// Radii beyond the explicit head.
#[derive(Debug, Clone, PartialEq)]
pub enum TailRule {
    /// No circles beyond the head: a finite-dimensional torus.
    Zero,
    /// `r_{M+j} = first · ratio^{j−1}` for `j ≥ 1`, `0 < ratio < 1`.
    Geometric { first: f64, ratio: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusSpec {
    radii_head: Vec<f64>,
    tail: Option<TailRule>,
}

impl TorusSpec {
    pub fn new(radii_head: Vec<f64>, tail: Option<TailRule>) -> Result<Self> {
        if let Some((k, r)) = radii_head.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r > 0.0)) {
            return domain(format!("radius r_{} = {r} is not positive (degenerate torus)", k + 1));
        }
        if let Some(TailRule::Geometric { first, ratio }) = tail {
            if !(first.is_finite() && first > 0.0) {
                return domain(format!("geometric tail needs first > 0, got {first}"));
            }
            if !(ratio > 0.0 && ratio < 1.0) {
                return domain(format!("geometric tail needs 0 < ratio < 1, got {ratio}"));
            }
        }
        if radii_head.is_empty() && matches!(tail, Some(TailRule::Zero) | None) {
            return domain("torus has no circles");
        }
        Ok(Self { radii_head, tail })
    }

    /// `r_k = first · ratio^{k−1}` for all `k`.
    pub fn geometric(first: f64, ratio: f64) -> Result<Self> {
        Self::new(vec![], Some(TailRule::Geometric { first, ratio }))
    }

    /// Finitely many circles.
    pub fn finite(radii: Vec<f64>) -> Result<Self> {
        Self::new(radii, Some(TailRule::Zero))
    }

    pub fn radii_head(&self) -> &[f64] {
        &self.radii_head
    }

    pub fn tail(&self) -> Option<&TailRule> {
        self.tail.as_ref()
    }

    /// Number of circles, if finite.
    pub fn dimension(&self) -> Option<usize> {
        match self.tail {
            Some(TailRule::Zero) => Some(self.radii_head.len()),
            _ => None,
        }
    }

    /// Radius of circle `k` (1-based), if known.
    pub fn radius(&self, k: usize) -> Option<f64> {
        let m = self.radii_head.len();
        if k == 0 {
            return None;
        }
        if k <= m {
            return Some(self.radii_head[k - 1]);
        }
        match self.tail {
            Some(TailRule::Geometric { first, ratio }) => Some(first * ratio.powi((k - m - 1) as i32)),
            _ => None,
        }
    }

    /// Upper bound for `Σ_{k>n} r_k²`.
    pub fn tail_sq_sum(&self, n: usize) -> Result<f64> {
        let m = self.radii_head.len();
        let head: f64 = self.radii_head.iter().skip(n).map(|r| r * r).sum();
        match self.tail {
            Some(TailRule::Zero) => Ok(head),
            Some(TailRule::Geometric { first, ratio }) => {
                let q2 = ratio * ratio;
                let skipped = n.saturating_sub(m) as i32;
                Ok(head + first * first * q2.powi(skipped) / (1.0 - q2))
            }
            None => Err(Error::TailBoundUnavailable { head_len: m }),
        }
    }
}

/// Smallest `N` with `Σ_{k>N} r_k² < eps²/4`, so every point lies within
/// `eps/2` of its projection onto the first `N` circles.
pub fn truncation_index(torus: &TorusSpec, eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return domain("eps must be positive");
    }
    let target = eps * eps / 4.0;
    const MAX_N: usize = 10_000_000;
    for n in 0..MAX_N {
        if torus.tail_sq_sum(n)? < target {
            return Ok(n);
        }
        if let Some(d) = torus.dimension() {
            if n >= d {
                break;
            }
        }
    }
    domain(format!("no truncation level below {MAX_N} reaches eps = {eps}"))
}

/// One angle coordinate: an exact fraction of a turn in `[0, 1)`, or
/// radians in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Angle {
    Turns(Rational),
    Radians(f64),
}

impl Angle {
    pub fn turns(r: Rational) -> Self {
        Angle::Turns(rational::frac(&r))
    }

    pub fn radians(x: f64) -> Self {
        let r = x.rem_euclid(TAU);
        Angle::Radians(if r >= TAU { 0.0 } else { r })
    }

    pub fn to_radians(&self) -> f64 {
        match self {
            Angle::Turns(t) => TAU * rational::to_f64(t),
            Angle::Radians(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Angle::Turns(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    torus: Arc<TorusSpec>,
    angles: Vec<Angle>,
}

impl PhasePoint {
    pub fn new(torus: Arc<TorusSpec>, angles: Vec<Angle>) -> Result<Self> {
        if angles.is_empty() {
            return domain("a phase point needs at least one angle");
        }
        if torus.radius(angles.len()).is_none() {
            return domain(format!("torus has no circle {}", angles.len()));
        }
        let angles = angles
            .into_iter()
            .map(|a| match a {
                Angle::Turns(t) => Angle::turns(t),
                Angle::Radians(x) => Angle::radians(x),
            })
            .collect();
        Ok(Self { torus, angles })
    }

    /// All angles exactly zero.
    pub fn origin(torus: Arc<TorusSpec>, n: usize) -> Result<Self> {
        Self::new(torus, vec![Angle::Turns(Rational::zero()); n])
    }

    pub fn from_radians(torus: Arc<TorusSpec>, thetas: &[f64]) -> Result<Self> {
        Self::new(torus, thetas.iter().map(|&t| Angle::radians(t)).collect())
    }

    pub fn torus(&self) -> &Arc<TorusSpec> {
        &self.torus
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn trunc_level(&self) -> usize {
        self.angles.len()
    }

    pub fn radians(&self) -> Vec<f64> {
        self.angles.iter().map(Angle::to_radians).collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        (1..=self.trunc_level()).map(|k| self.torus.radius(k).expect("checked at construction")).collect()
    }

    pub fn is_exact(&self) -> bool {
        self.angles.iter().all(Angle::is_exact)
    }

    /// `(q, p)` of the truncated part.
    pub fn to_qp(&self) -> (Vec<f64>, Vec<f64>) {
        self.radii()
            .iter()
            .zip(&self.angles)
            .map(|(r, a)| {
                let (s, c) = a.to_radians().sin_cos();
                (r * c, -r * s)
            })
            .unzip()
    }

    /// Distance from the point to its projection onto the truncated circles.
    pub fn projection_distance(&self) -> Result<f64> {
        Ok(self.torus.tail_sq_sum(self.trunc_level())?.sqrt())
    }

    /// `r_k²` for each truncated circle.
    pub fn first_integrals(&self) -> Vec<f64> {
        self.radii().iter().map(|r| r * r).collect()
    }
}

/// Time `t = 2π · turns + radians`. Keeping whole turns as an exact
/// rational makes periodicity checks exact and long horizons drift-free.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTime {
    pub turns: Rational,
    pub radians: f64,
}

impl FlowTime {
    pub fn zero() -> Self {
        Self { turns: Rational::zero(), radians: 0.0 }
    }

    pub fn turns(turns: Rational) -> Self {
        Self { turns, radians: 0.0 }
    }

    pub fn seconds(t: f64) -> Self {
        Self { turns: Rational::zero(), radians: t }
    }

    pub fn is_exact(&self) -> bool {
        self.radians == 0.0
    }

    pub fn as_f64(&self) -> f64 {
        TAU * rational::to_f64(&self.turns) + self.radians
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self { turns: &self.turns + &other.turns, radians: self.radians + other.radians }
    }
}

/// The diagonal linear flow `θ_k ↦ θ_k + λ_k t`, with cached numeric
/// frequencies.
#[derive(Debug, Clone)]
pub struct LinearFlow {
    system: FrequencySystem,
    exact: Vec<Option<Rational>>,
    high_precision: Vec<Rational>,
    float: Vec<f64>,
}

impl LinearFlow {
    pub fn new(system: FrequencySystem) -> Self {
        let exact = system.prefix().iter().map(|v| v.as_rational()).collect();
        let high_precision: Vec<Rational> = (0..system.len()).map(|k| system.value(k)).collect();
        let float = high_precision.iter().map(rational::to_f64).collect();
        Self { system, exact, high_precision, float }
    }

    pub fn system(&self) -> &FrequencySystem {
        &self.system
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.float
    }

    fn check_covers(&self, n: usize) -> Result<()> {
        if n > self.system.len() {
            return Err(Error::PrefixTooShort { available: self.system.len(), required: n });
        }
        Ok(())
    }

    /// Advances every truncated angle by `λ_k t`. Exact angles stay exact
    /// when `λ_k` is rational and `t` is a rational number of turns.
    pub fn evolve(&self, x: &PhasePoint, t: &FlowTime) -> Result<PhasePoint> {
        self.check_covers(x.trunc_level())?;
        let angles = x
            .angles
            .iter()
            .enumerate()
            .map(|(k, a)| self.advance(k, a, t))
            .collect();
        Ok(PhasePoint { torus: Arc::clone(&x.torus), angles })
    }

    fn advance(&self, k: usize, a: &Angle, t: &FlowTime) -> Angle {
        if let (Angle::Turns(theta), Some(lam), true) = (a, &self.exact[k], t.is_exact()) {
            return Angle::turns(theta + lam * &t.turns);
        }
        let whole = if t.turns.is_zero() {
            0.0
        } else {
            let mut turns = &self.high_precision[k] * &t.turns;
            if let Angle::Turns(theta) = a {
                turns += theta;
            }
            TAU * rational::to_f64(&rational::frac(&turns))
        };
        let start = match a {
            Angle::Turns(_) if !t.turns.is_zero() => 0.0,
            _ => a.to_radians(),
        };
        Angle::radians(start + whole + (self.float[k] * t.radians).rem_euclid(TAU))
    }

    /// The rotation in the `(q, p)` chart:
    /// `q' = q cos λt + p sin λt`, `p' = p cos λt − q sin λt`.
    pub fn rotate_qp(&self, q: &[f64], p: &[f64], t: &FlowTime) -> Result<(Vec<f64>, Vec<f64>)> {
        if q.len() != p.len() {
            return Err(Error::LengthMismatch { expected: q.len(), got: p.len() });
        }
        self.check_covers(q.len())?;
        Ok(q.iter()
            .zip(p)
            .enumerate()
            .map(|(k, (q, p))| {
                let phase = self.advance(k, &Angle::Radians(0.0), t).to_radians();
                let (s, c) = phase.sin_cos();
                (q * c + p * s, p * c - q * s)
            })
            .unzip())
    }

    /// `H = Σ_{k≤N} (λ_k / 2) r_k²` on the truncated part.
    pub fn energy(&self, x: &PhasePoint) -> Result<f64> {
        self.check_covers(x.trunc_level())?;
        Ok(x.first_integrals().iter().zip(&self.float).map(|(i, l)| 0.5 * l * i).sum())
    }

    /// `H` evaluated in the `(q, p)` chart.
    pub fn energy_qp(&self, q: &[f64], p: &[f64]) -> Result<f64> {
        if q.len() != p.len() {
            return Err(Error::LengthMismatch { expected: q.len(), got: p.len() });
        }
        self.check_covers(q.len())?;
        Ok(first_integrals_qp(q, p).iter().zip(&self.float).map(|(i, l)| 0.5 * l * i).sum())
    }
}

/// `q_k² + p_k²`
pub fn first_integrals_qp(q: &[f64], p: &[f64]) -> Vec<f64> {
    q.iter().zip(p).map(|(q, p)| q * q + p * p).collect()
}

/// Realization of complex coordinates: `u = q + i p`.
pub fn realize(z: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    z.iter().map(|c| (c.re, c.im)).unzip()
}

pub fn complexify(q: &[f64], p: &[f64]) -> Result<Vec<Complex64>> {
    if q.len() != p.len() {
        return Err(Error::LengthMismatch { expected: q.len(), got: p.len() });
    }
    Ok(q.iter().zip(p).map(|(&q, &p)| Complex64::new(q, p)).collect())
}

/// Interval `[lower, upper]` containing the ℓ² distance between two points
/// of the same torus.
///
/// `lower` is the distance between the truncated parts. The unknown tail
/// coordinates differ by at most `2 r_k` each and are orthogonal to the
/// truncated ones, so `upper = sqrt(lower² + 4 Σ_{k>N} r_k²)`.
pub fn l2_distance(x: &PhasePoint, y: &PhasePoint) -> Result<(f64, f64)> {
    if !Arc::ptr_eq(&x.torus, &y.torus) && x.torus != y.torus {
        return Err(Error::TorusMismatch);
    }
    let n = x.trunc_level().min(y.trunc_level());
    let lower = x.angles[..n]
        .iter()
        .zip(&y.angles[..n])
        .enumerate()
        .map(|(k, (a, b))| {
            let r = x.torus.radius(k + 1).expect("checked at construction");
            let chord = 2.0 * r * half_angle_sin(a, b).abs();
            chord * chord
        })
        .sum::<f64>()
        .sqrt();
    let tail = x.torus.tail_sq_sum(n)?;
    Ok((lower, (lower * lower + 4.0 * tail).sqrt()))
}

/// `sin((a − b) / 2)`, exact zero for equal exact angles.
fn half_angle_sin(a: &Angle, b: &Angle) -> f64 {
    match (a, b) {
        (Angle::Turns(s), Angle::Turns(t)) => {
            let d = rational::frac(&(s - t));
            if d.is_zero() {
                0.0
            } else {
                (std::f64::consts::PI * rational::to_f64(&d)).sin()
            }
        }
        _ => (0.5 * (a.to_radians() - b.to_radians())).sin(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::{BasisSymbol, FrequencyVector};
    use crate::rational::{int, ratio};
    use std::f64::consts::PI;

    fn ints(xs: &[i64]) -> LinearFlow {
        LinearFlow::new(FrequencySystem::from_rationals(&xs.iter().map(|&x| int(x)).collect::<Vec<_>>()).unwrap())
    }

    fn unit_torus(n: usize) -> Arc<TorusSpec> {
        Arc::new(TorusSpec::finite(vec![1.0; n]).unwrap())
    }

    #[test]
    fn evolve_examples() {
        let flow = ints(&[1, 2]);
        let x = PhasePoint::origin(unit_torus(2), 2).unwrap();
        let y = flow.evolve(&x, &FlowTime::turns(ratio(1, 2))).unwrap();
        assert_eq!(y.angles(), &[Angle::Turns(ratio(1, 2)), Angle::Turns(int(0))]);
        assert!((y.radians()[0] - PI).abs() < 1e-15);

        let flow = ints(&[1]);
        let x = PhasePoint::origin(unit_torus(1), 1).unwrap();
        let t = FlowTime { turns: int(1_000_000), radians: 1.0 };
        let y = flow.evolve(&x, &t).unwrap();
        assert!((y.radians()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evolve_rejects_short_prefix() {
        let flow = ints(&[1]);
        let x = PhasePoint::origin(unit_torus(2), 2).unwrap();
        assert!(matches!(flow.evolve(&x, &FlowTime::zero()), Err(Error::PrefixTooShort { .. })));
    }

    #[test]
    fn irrational_frequency_uses_high_precision_turns() {
        let sys = FrequencySystem::new(vec![BasisSymbol::sqrt(2)], vec![FrequencyVector::symbol("sqrt2", int(1))], None).unwrap();
        let flow = LinearFlow::new(sys);
        let x = PhasePoint::origin(unit_torus(1), 1).unwrap();
        let y = flow.evolve(&x, &FlowTime::turns(int(985))).unwrap();
        // 985·√2 = 1393 − 0.000359…
        let expected = TAU * (985.0 * 2f64.sqrt() - 1393.0).rem_euclid(1.0);
        assert!((y.radians()[0] - expected).abs() < 1e-9);
    }

    #[test]
    fn rotation_examples() {
        let flow = ints(&[1]);
        let (q, p) = flow.rotate_qp(&[1.0], &[0.0], &FlowTime::seconds(PI / 2.0)).unwrap();
        assert!(q[0].abs() < 1e-15 && (p[0] + 1.0).abs() < 1e-15);
        let (q, p) = flow.rotate_qp(&[0.3], &[-0.7], &FlowTime::zero()).unwrap();
        assert_eq!((q[0], p[0]), (0.3, -0.7));
        assert!(flow.rotate_qp(&[1.0], &[], &FlowTime::zero()).is_err());
    }

    #[test]
    fn realize_examples() {
        assert_eq!(realize(&[Complex64::new(1.0, 0.0)]), (vec![1.0], vec![0.0]));
        assert_eq!(realize(&[Complex64::new(0.0, 1.0)]), (vec![0.0], vec![1.0]));
        let z = vec![Complex64::new(0.25, -3.5), Complex64::new(-1.0, 2.0)];
        let (q, p) = realize(&z);
        assert_eq!(complexify(&q, &p).unwrap(), z);
    }

    #[test]
    fn truncation_examples() {
        let geo = TorusSpec::geometric(0.5, 0.5).unwrap();
        // Σ_{k>N} 4^{-k} = 4^{-N}/3: N = 3 gives 0.0052 ≥ 0.0025, N = 4 gives 0.0013
        assert!((geo.tail_sq_sum(3).unwrap() - 4f64.powi(-3) / 3.0).abs() < 1e-15);
        assert_eq!(truncation_index(&geo, 0.1).unwrap(), 4);

        let fin = TorusSpec::finite(vec![0.3, 0.4]).unwrap();
        assert!(truncation_index(&fin, 1e-9).unwrap() <= 2);
        assert_eq!(truncation_index(&fin, 1.0001).unwrap(), 0);
        assert_eq!(truncation_index(&fin, 1.0).unwrap(), 1);

        let open = TorusSpec::new(vec![1.0], None).unwrap();
        assert!(matches!(truncation_index(&open, 0.1), Err(Error::TailBoundUnavailable { .. })));
        assert!(truncation_index(&geo, 0.0).is_err());
    }

    #[test]
    fn degenerate_tori_rejected() {
        assert!(TorusSpec::finite(vec![1.0, 0.0]).is_err());
        assert!(TorusSpec::geometric(1.0, 1.0).is_err());
        assert!(TorusSpec::finite(vec![]).is_err());
    }

    #[test]
    fn distance_examples() {
        let t = unit_torus(2);
        let x = PhasePoint::origin(t.clone(), 2).unwrap();
        assert_eq!(l2_distance(&x, &x).unwrap(), (0.0, 0.0));
        let y = PhasePoint::new(t.clone(), vec![Angle::Turns(ratio(1, 2)), Angle::Turns(int(0))]).unwrap();
        let (lo, hi) = l2_distance(&x, &y).unwrap();
        assert!((lo - 2.0).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);

        let geo = Arc::new(TorusSpec::geometric(1.0, 0.5).unwrap());
        let x = PhasePoint::origin(geo.clone(), 3).unwrap();
        let (lo, hi) = l2_distance(&x, &x).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 2.0 * geo.tail_sq_sum(3).unwrap().sqrt()).abs() < 1e-15);

        let other = PhasePoint::origin(Arc::new(TorusSpec::finite(vec![2.0]).unwrap()), 1).unwrap();
        assert!(matches!(l2_distance(&x, &other), Err(Error::TorusMismatch)));
    }

    #[test]
    fn energy_example() {
        let flow = ints(&[1, 2]);
        let x = PhasePoint::origin(unit_torus(2), 2).unwrap();
        assert_eq!(flow.energy(&x).unwrap(), 1.5);
        let (q, p) = x.to_qp();
        assert_eq!(flow.energy_qp(&q, &p).unwrap(), 1.5);
    }
}
