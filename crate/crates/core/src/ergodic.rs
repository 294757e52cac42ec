//! Characters of the torus, Birkhoff time averages, Monte Carlo averages
//! against the Kolmogorov product measure, and the ergodicity verdict.
//!
//! Only cylindrical integrands are ever evaluated: a character with finite
//! support depends on finitely many circles, so its integral against the
//! infinite product of uniform circle measures is a finite-dimensional
//! integral.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::exec::{Execution, BLOCK};
use crate::frequency::{Family, FrequencySystem};
use crate::rational::{self, Rational};
use crate::torus::{Angle, FlowTime, LinearFlow, PhasePoint, TorusSpec};

/// Largest `|n_k|` used by [`equidistribution_stat`].
pub const EQUIDIST_MAX_ORDER: i64 = 3;
/// Largest number of circles [`equidistribution_stat`] accepts.
pub const EQUIDIST_MAX_DIMS: usize = 4;

/// Finitely supported integer vector `n`, indexed by 1-based circle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct CharacterIndex {
    support: BTreeMap<usize, i64>,
}

impl CharacterIndex {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new<I: IntoIterator<Item = (usize, i64)>>(pairs: I) -> Result<Self> {
        let mut support = BTreeMap::new();
        for (k, n) in pairs {
            if k == 0 {
                return domain("circle indices start at 1");
            }
            if support.insert(k, n).is_some() {
                return domain(format!("circle {k} listed twice"));
            }
        }
        support.retain(|_, n| *n != 0);
        Ok(Self { support })
    }

    /// From a dense vector `(n_1, …, n_N)`.
    pub fn dense(ns: &[i64]) -> Self {
        Self { support: ns.iter().enumerate().filter(|(_, n)| **n != 0).map(|(k, &n)| (k + 1, n)).collect() }
    }

    pub fn pairs(&self) -> Vec<(usize, i64)> {
        self.support.iter().map(|(&k, &n)| (k, n)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn max_index(&self) -> usize {
        self.support.keys().next_back().copied().unwrap_or(0)
    }
}

fn check_support(x: &PhasePoint, n: &CharacterIndex) -> Result<()> {
    if n.max_index() > x.trunc_level() {
        return domain(format!(
            "character uses circle {} but the point is truncated at {}",
            n.max_index(),
            x.trunc_level()
        ));
    }
    Ok(())
}

/// `exp(i Σ n_k θ_k)`; exactly `1` when exact angles make the phase an
/// integer number of turns.
pub fn char_eval(x: &PhasePoint, n: &CharacterIndex) -> Result<Complex64> {
    check_support(x, n)?;
    Ok(phase_of(x.angles(), n))
}

/// `Σ n_k θ_k` in turns, reduced mod 1, when every angle involved is exact.
fn exact_phase(angles: &[Angle], n: &CharacterIndex) -> Option<Rational> {
    let turns: Rational = n
        .support
        .iter()
        .map(|(&k, &nk)| match &angles[k - 1] {
            Angle::Turns(t) => Some(t * rational::int(nk)),
            Angle::Radians(_) => None,
        })
        .sum::<Option<Rational>>()?;
    Some(rational::frac(&turns))
}

fn unit_phase(turns: &Rational) -> Complex64 {
    if turns.is_zero() {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, TAU * rational::to_f64(turns))
}

fn phase_of(angles: &[Angle], n: &CharacterIndex) -> Complex64 {
    match exact_phase(angles, n) {
        Some(turns) => unit_phase(&turns),
        None => Complex64::from_polar(1.0, n.support.iter().map(|(&k, &nk)| nk as f64 * angles[k - 1].to_radians()).sum()),
    }
}

/// `|mean_j exp(i Σ n_k θ_k(x_j))|`. Exact samples are tallied by phase so a
/// character constant along them gives exactly 1.
fn character_mean_modulus(samples: &[PhasePoint], n: &CharacterIndex) -> f64 {
    let exact: Option<BTreeMap<Rational, usize>> = samples.iter().try_fold(BTreeMap::new(), |mut tally, x| {
        *tally.entry(exact_phase(x.angles(), n)?).or_insert(0) += 1;
        Some(tally)
    });
    let sum: Complex64 = match exact {
        Some(tally) if tally.len() == 1 => return 1.0,
        Some(tally) => tally.iter().map(|(phase, &count)| unit_phase(phase) * count as f64).sum(),
        None => samples.iter().map(|x| phase_of(x.angles(), n)).sum(),
    };
    (sum / samples.len() as f64).norm()
}

/// `(λ, n)` as a float, and whether it vanishes exactly.
fn resonance(flow: &LinearFlow, n: &CharacterIndex) -> Result<(f64, bool)> {
    let pairing = flow.system().pairing(&n.pairs())?;
    let exact_zero = pairing.is_zero();
    let omega = if exact_zero { 0.0 } else { rational::to_f64(&pairing.value(flow.system().basis())) };
    Ok((omega, exact_zero))
}

/// `(1/T) ∫_0^T exp(i Σ n_k (θ_k + λ_k t)) dt` in closed form.
pub fn time_average_closed(n: &CharacterIndex, flow: &LinearFlow, theta0: &PhasePoint, horizon: f64) -> Result<Complex64> {
    if !(horizon > 0.0) {
        return domain("averaging horizon T must be positive");
    }
    let c0 = char_eval(theta0, n)?;
    let (omega, resonant) = resonance(flow, n)?;
    if resonant {
        return Ok(c0);
    }
    // (e^{ix} − 1) / (ix) = e^{ix/2} · sin(x/2) / (x/2)
    let half = 0.5 * omega * horizon;
    Ok(c0 * Complex64::from_polar(half.sin() / half, half))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    /// Trapezoid bound `h² · max|g''| / 12` with `h = T / steps`, plus an
    /// allowance for floating-point phase and summation error.
    pub error_bound: f64,
}

pub fn time_average_quadrature(
    n: &CharacterIndex,
    flow: &LinearFlow,
    theta0: &PhasePoint,
    horizon: f64,
    steps: usize,
) -> Result<Quadrature> {
    time_average_quadrature_with(n, flow, theta0, horizon, steps, Execution::default())
}

/// Composite trapezoid estimate of the same average as
/// [`time_average_closed`].
pub fn time_average_quadrature_with(
    n: &CharacterIndex,
    flow: &LinearFlow,
    theta0: &PhasePoint,
    horizon: f64,
    steps: usize,
    exec: Execution,
) -> Result<Quadrature> {
    if steps < 2 {
        return domain("quadrature needs at least 2 steps");
    }
    if !(horizon > 0.0) {
        return domain("averaging horizon T must be positive");
    }
    let c0 = char_eval(theta0, n)?;
    if n.is_zero() {
        return Ok(Quadrature { value: Complex64::new(1.0, 0.0), error_bound: 0.0 });
    }
    let (omega, _) = resonance(flow, n)?;
    let h = horizon / steps as f64;
    let partial = exec.map_blocks(steps + 1, BLOCK, |r| {
        r.map(|j| {
            let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
            Complex64::from_polar(w, omega * (j as f64 * h))
        })
        .sum::<Complex64>()
    });
    let sum: Complex64 = partial.into_iter().sum();
    let value = c0 * sum / steps as f64;
    let rounding = f64::EPSILON * (omega.abs() * horizon + steps as f64 + 2.0);
    Ok(Quadrature { value, error_bound: h * h * omega * omega / 12.0 + rounding })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: Complex64,
    pub stderr: f64,
    pub samples: usize,
}

pub fn space_average_mc(torus: &TorusSpec, n: &CharacterIndex, samples: usize, seed: u64) -> Result<McEstimate> {
    space_average_mc_with(torus, n, samples, seed, Execution::default())
}

/// Monte Carlo average of a character against the Kolmogorov measure.
///
/// Uniform angles come from ChaCha8 keyed by `seed`, one stream per circle
/// index, positioned by sample index. Each sample therefore sees the same
/// angles however the sample range is partitioned, and block sums are
/// reduced in block order, so the result is independent of `exec` and of
/// the worker count.
pub fn space_average_mc_with(
    torus: &TorusSpec,
    n: &CharacterIndex,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<McEstimate> {
    if samples == 0 {
        return domain("samples must be at least 1");
    }
    if let Some(k) = n.support.keys().find(|&&k| torus.radius(k).is_none()) {
        return domain(format!("torus has no circle {k}"));
    }
    if n.is_zero() {
        return Ok(McEstimate { estimate: Complex64::new(1.0, 0.0), stderr: 0.0, samples });
    }
    let pairs = n.pairs();
    let partial = exec.map_blocks(samples, BLOCK, |r| {
        let mut phases = vec![0.0f64; r.len()];
        for &(k, nk) in &pairs {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            rng.set_word_pos(2 * r.start as u128);
            for ph in phases.iter_mut() {
                *ph += nk as f64 * unit_interval(rng.next_u64());
            }
        }
        phases.iter().map(|t| Complex64::from_polar(1.0, TAU * t.fract())).sum::<Complex64>()
    });
    let sum: Complex64 = partial.into_iter().sum();
    let estimate = sum / samples as f64;
    let var = (1.0 - estimate.norm_sqr()).max(0.0);
    Ok(McEstimate { estimate, stderr: (var / samples as f64).sqrt(), samples })
}

fn unit_interval(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Norm of a cylindrical tensor product `⊗ u_k`: the product of per-circle
/// `L²` norms against the uniform probability measure. Each factor is given
/// by its Fourier coefficients `(m, c_m)`; characters are orthonormal, so
/// `‖u_k‖² = Σ |c_m|²`. Circles not listed carry the constant 1.
pub fn character_norm_product(factors: &[Vec<(i64, Complex64)>]) -> Result<f64> {
    let mut prod = 1.0;
    for (k, f) in factors.iter().enumerate() {
        let mut coeffs: BTreeMap<i64, Complex64> = BTreeMap::new();
        for &(m, c) in f {
            *coeffs.entry(m).or_default() += c;
        }
        let norm = coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return domain(format!("factor {} has zero norm", k + 1));
        }
        prod *= norm;
    }
    Ok(prod)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErgodicityStatus {
    Ergodic,
    NotErgodic,
    PrefixCertifiedOnly,
}

impl ErgodicityStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErgodicityStatus::Ergodic => "Ergodic",
            ErgodicityStatus::NotErgodic => "NotErgodic",
            ErgodicityStatus::PrefixCertifiedOnly => "PrefixCertifiedOnly",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityVerdict {
    pub status: ErgodicityStatus,
    /// An integer relation; its character is a nonconstant invariant
    /// function.
    pub witness: Option<Vec<BigInt>>,
    pub prefix_len: usize,
}

/// Ergodicity of the Kolmogorov measure under the flow.
///
/// Any integer relation among the inspected frequencies refutes ergodicity.
/// Without one, `Ergodic` is reported only for an explicit finite system
/// inspected in full whose symbols are declared independent.
pub fn ergodicity_verdict(sys: &FrequencySystem, upto: usize) -> Result<ErgodicityVerdict> {
    let lattice = sys.relation_lattice(upto)?;
    if let Some(w) = lattice.basis_vectors.first() {
        return Ok(ErgodicityVerdict { status: ErgodicityStatus::NotErgodic, witness: Some(w.clone()), prefix_len: upto });
    }
    let whole_system = matches!(sys.family(), Some(Family::Explicit)) && upto == sys.len();
    let status = if whole_system && sys.independence_declared(upto) {
        ErgodicityStatus::Ergodic
    } else {
        ErgodicityStatus::PrefixCertifiedOnly
    };
    Ok(ErgodicityVerdict { status, witness: None, prefix_len: upto })
}

/// Evaluates the flow at each time.
pub fn sample_trajectory(flow: &LinearFlow, x0: &PhasePoint, times: &[FlowTime], exec: Execution) -> Result<Vec<PhasePoint>> {
    exec.map(times, |t| flow.evolve(x0, t)).into_iter().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquidistributionStat {
    pub value: f64,
    /// The character attaining the maximum.
    pub worst: CharacterIndex,
}

pub fn equidistribution_stat(samples: &[PhasePoint], dims: &[usize]) -> Result<EquidistributionStat> {
    equidistribution_stat_with(samples, dims, Execution::default())
}

/// Largest `|mean_j exp(i Σ n_k θ_k(x_j))|` over all nonzero `n` supported
/// on `dims` with `|n_k| ≤ 3`. Small for equidistributed samples, 1 when a
/// character is constant along them.
pub fn equidistribution_stat_with(samples: &[PhasePoint], dims: &[usize], exec: Execution) -> Result<EquidistributionStat> {
    if samples.len() < 2 {
        return domain("need at least 2 samples");
    }
    if dims.is_empty() || dims.len() > EQUIDIST_MAX_DIMS {
        return domain(format!("dims must list between 1 and {EQUIDIST_MAX_DIMS} circles"));
    }
    let mut sorted = dims.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != dims.len() {
        return domain("dims contains duplicates");
    }
    let trunc = samples.iter().map(PhasePoint::trunc_level).min().unwrap_or(0);
    if let Some(&k) = sorted.iter().find(|&&k| k == 0 || k > trunc) {
        return Err(Error::Domain(format!("circle {k} is outside the samples' truncation {trunc}")));
    }
    let characters = enumerate_characters(&sorted);
    let means = exec.map(&characters, |n| character_mean_modulus(samples, n));
    let (best, value) = means
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &m)| if m > acc.1 { (i, m) } else { acc });
    Ok(EquidistributionStat { value, worst: characters[best].clone() })
}

fn enumerate_characters(dims: &[usize]) -> Vec<CharacterIndex> {
    let span = (2 * EQUIDIST_MAX_ORDER + 1) as usize;
    let total = span.pow(dims.len() as u32);
    (0..total)
        .filter_map(|mut code| {
            let pairs: Vec<(usize, i64)> = dims
                .iter()
                .map(|&k| {
                    let digit = (code % span) as i64 - EQUIDIST_MAX_ORDER;
                    code /= span;
                    (k, digit)
                })
                .collect();
            let n = CharacterIndex::new(pairs).expect("distinct nonzero indices");
            (!n.is_zero()).then_some(n)
        })
        .collect()
}
