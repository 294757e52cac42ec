//! Return-time search: numerical evidence that every point is
//! nonwandering.
//!
//! Structure is tried before brute force. A rational prefix returns
//! exactly at its joint period. Otherwise candidate return times are whole
//! periods `q` of the first oscillator for which `q · λ_k / λ_1` is close
//! to an integer for every other `k`: continued-fraction convergents for
//! two frequencies, LLL simultaneous approximation for more. Grid scanning
//! is the last resort. Every reported hit is re-evaluated before it is
//! returned; finding nothing is inconclusive, never a disproof.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::exec::{Execution, BLOCK};
use crate::lattice;
use crate::rational::{self, Rational};
use crate::torus::{l2_distance, FlowTime, LinearFlow, PhasePoint};

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnHit {
    /// Return time in seconds.
    pub t: f64,
    /// The same time with whole turns kept exact.
    pub time: FlowTime,
    pub dist_upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    ExactPeriod,
    Convergents,
    SimultaneousApproximation,
    GridScan,
}

impl SearchMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SearchMethod::ExactPeriod => "exact_period",
            SearchMethod::Convergents => "continued_fraction",
            SearchMethod::SimultaneousApproximation => "lll_simultaneous_approximation",
            SearchMethod::GridScan => "grid_scan",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnRecord {
    pub epsilon: f64,
    pub floor: f64,
    pub horizon: f64,
    /// Sorted by `t`, each with `floor < t ≤ horizon` and `dist_upper < epsilon`.
    pub hits: Vec<ReturnHit>,
    pub methods: Vec<SearchMethod>,
}

impl ReturnRecord {
    pub fn summary(&self) -> &'static str {
        if self.hits.is_empty() {
            "no hit found within horizon"
        } else {
            "returns found"
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    pub horizon: f64,
    pub max_hits: usize,
    /// Grid spacing for the fallback scan.
    pub grid_dt: f64,
    /// Length of the fallback scan window after the floor.
    pub grid_window: f64,
    pub exec: Execution,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { horizon: 1e6, max_hits: 16, grid_dt: 0.01, grid_window: 1e4, exec: Execution::default() }
    }
}

/// Scans `t_min + j·dt ∈ (t_min, t_max]` for the smallest upper distance
/// bound to `x0`; a step wider than the interval evaluates `t_max` alone.
pub fn min_return_distance(x0: &PhasePoint, flow: &LinearFlow, t_min: f64, t_max: f64, dt: f64) -> Result<(f64, f64)> {
    min_return_distance_with(x0, flow, t_min, t_max, dt, Execution::default())
}

pub fn min_return_distance_with(
    x0: &PhasePoint,
    flow: &LinearFlow,
    t_min: f64,
    t_max: f64,
    dt: f64,
    exec: Execution,
) -> Result<(f64, f64)> {
    if !(0.0 < t_min && t_min < t_max) {
        return domain("need 0 < t_min < t_max");
    }
    if !(dt > 0.0) {
        return domain("dt must be positive");
    }
    let steps = ((t_max - t_min) / dt).floor();
    if steps > 1e9 {
        return domain("time grid exceeds 1e9 points");
    }
    let steps = steps as usize;
    let grid = move |j: usize| if steps == 0 { t_max } else { t_min + (j + 1) as f64 * dt };
    let count = steps.max(1);
    let partial = exec.map_blocks(count, BLOCK, |r| {
        let mut best: Result<(f64, f64)> = Ok((f64::NAN, f64::INFINITY));
        for j in r {
            let t = grid(j);
            let d = flow.evolve(x0, &FlowTime::seconds(t)).and_then(|y| l2_distance(x0, &y)).map(|(_, hi)| hi);
            best = match (best, d) {
                (Ok(b), Ok(d)) => Ok(if d < b.1 { (t, d) } else { b }),
                (Err(e), _) | (_, Err(e)) => Err(e),
            };
        }
        best
    });
    let mut best = (f64::NAN, f64::INFINITY);
    for p in partial {
        let p = p?;
        if p.1 < best.1 {
            best = p;
        }
    }
    if best.0.is_nan() {
        return domain("empty time grid");
    }
    Ok(best)
}

pub fn nonwandering_evidence(x0: &PhasePoint, flow: &LinearFlow, eps: f64, t_floor: f64) -> Result<ReturnRecord> {
    nonwandering_evidence_with(x0, flow, eps, t_floor, &SearchOptions::default())
}

/// Looks for times `t_floor < t ≤ horizon` with `‖Φ_t x0 − x0‖ < eps`.
pub fn nonwandering_evidence_with(
    x0: &PhasePoint,
    flow: &LinearFlow,
    eps: f64,
    t_floor: f64,
    opts: &SearchOptions,
) -> Result<ReturnRecord> {
    let n = x0.trunc_level();
    let min_eps = 2.0 * x0.torus().tail_sq_sum(n)?.sqrt();
    if !(eps > min_eps) {
        return Err(Error::ToleranceBelowTail { eps, min_eps });
    }
    if !(t_floor > 0.0) {
        return domain("T_floor must be positive");
    }
    if !(opts.horizon > t_floor) {
        return domain("horizon must exceed T_floor");
    }
    if n > flow.system().len() {
        return Err(Error::PrefixTooShort { available: flow.system().len(), required: n });
    }
    let mut record = ReturnRecord { epsilon: eps, floor: t_floor, horizon: opts.horizon, hits: vec![], methods: vec![] };

    let system = flow.system();
    let (method, candidates) = match system.prefix_period(n)? {
        Some(period) => (SearchMethod::ExactPeriod, period_candidates(&period, system, t_floor, opts)),
        None => {
            let lambda1 = system.value(0);
            let ratios: Vec<Rational> = (1..n).map(|k| system.value(k) / &lambda1).collect();
            let q_max = (opts.horizon * rational::to_f64(&lambda1) / TAU).floor();
            let (method, qs) = if ratios.len() == 1 {
                (SearchMethod::Convergents, convergent_denominators(&ratios[0], q_max))
            } else {
                let weights: Vec<f64> = x0.radii()[1..].to_vec();
                (SearchMethod::SimultaneousApproximation, simultaneous_denominators(&ratios, &weights, q_max))
            };
            let times = multiples_of_first_period(&qs, &lambda1, t_floor, opts);
            (method, times)
        }
    };
    record.methods.push(method);
    record.hits = verify(x0, flow, candidates, eps, t_floor, opts)?;

    if record.hits.is_empty() {
        record.methods.push(SearchMethod::GridScan);
        record.hits = grid_hits(x0, flow, eps, t_floor, opts)?;
    }
    Ok(record)
}

fn period_candidates(period: &crate::frequency::Period, system: &crate::frequency::FrequencySystem, t_floor: f64, opts: &SearchOptions) -> Vec<FlowTime> {
    match period.over_two_pi() {
        Some(p) => {
            let seconds = TAU * rational::to_f64(&p);
            let first = (t_floor / seconds).floor() as i64 + 1;
            (first..)
                .map(|k| FlowTime::turns(&p * rational::int(k)))
                .take_while(|t| t.as_f64() <= opts.horizon)
                .take(opts.max_hits)
                .collect()
        }
        None => {
            let seconds = TAU * period.over_two_pi_f64(system.basis());
            let first = (t_floor / seconds).floor() as i64 + 1;
            (first..)
                .map(|k| FlowTime::seconds(k as f64 * seconds))
                .take_while(|t| t.as_f64() <= opts.horizon)
                .take(opts.max_hits)
                .collect()
        }
    }
}

/// Times `2π · m · q / λ_1` above the floor for each candidate `q`, using
/// the smallest few admissible multiples `m`.
fn multiples_of_first_period(qs: &[BigInt], lambda1: &Rational, t_floor: f64, opts: &SearchOptions) -> Vec<FlowTime> {
    const MULTIPLES: i64 = 3;
    let mut out = Vec::new();
    for q in qs {
        let turns = Rational::from_integer(q.clone()) / lambda1;
        let seconds = TAU * rational::to_f64(&turns);
        let first = (t_floor / seconds).floor() as i64 + 1;
        for m in first..first + MULTIPLES {
            let t = FlowTime::turns(&turns * rational::int(m));
            if t.as_f64() <= opts.horizon {
                out.push(t);
            }
        }
    }
    out
}

fn verify(
    x0: &PhasePoint,
    flow: &LinearFlow,
    candidates: Vec<FlowTime>,
    eps: f64,
    t_floor: f64,
    opts: &SearchOptions,
) -> Result<Vec<ReturnHit>> {
    let evaluated = opts.exec.map(&candidates, |time| -> Result<Option<ReturnHit>> {
        let t = time.as_f64();
        if !(t > t_floor && t <= opts.horizon) {
            return Ok(None);
        }
        let (_, hi) = l2_distance(x0, &flow.evolve(x0, time)?)?;
        Ok((hi < eps).then(|| ReturnHit { t, time: time.clone(), dist_upper: hi }))
    });
    let mut hits: Vec<ReturnHit> = evaluated.into_iter().filter_map(|r| r.transpose()).collect::<Result<_>>()?;
    hits.sort_by(|a, b| a.t.total_cmp(&b.t));
    hits.dedup_by(|a, b| a.time == b.time);
    hits.truncate(opts.max_hits);
    Ok(hits)
}

fn grid_hits(x0: &PhasePoint, flow: &LinearFlow, eps: f64, t_floor: f64, opts: &SearchOptions) -> Result<Vec<ReturnHit>> {
    let end = opts.horizon.min(t_floor + opts.grid_window);
    let steps = ((end - t_floor) / opts.grid_dt).floor() as usize;
    let partial = opts.exec.map_blocks(steps, BLOCK, |r| -> Result<Vec<ReturnHit>> {
        let mut out = Vec::new();
        for j in r {
            let t = t_floor + (j + 1) as f64 * opts.grid_dt;
            let time = FlowTime::seconds(t);
            let (_, hi) = l2_distance(x0, &flow.evolve(x0, &time)?)?;
            if hi < eps {
                out.push(ReturnHit { t, time, dist_upper: hi });
            }
        }
        Ok(out)
    });
    let mut hits = Vec::new();
    for p in partial {
        hits.extend(p?);
        if hits.len() >= opts.max_hits {
            break;
        }
    }
    hits.truncate(opts.max_hits);
    Ok(hits)
}

/// Denominators of the continued-fraction convergents of `alpha`, up to
/// `q_max`.
pub fn convergent_denominators(alpha: &Rational, q_max: f64) -> Vec<BigInt> {
    let mut out = Vec::new();
    let (mut q_prev, mut q) = (BigInt::one(), BigInt::zero());
    let mut x = alpha.clone();
    loop {
        let a = x.floor();
        let frac = &x - &a;
        let q_next = a.to_integer() * &q + &q_prev;
        if q_next.to_f64().is_none_or(|v| v > q_max) {
            break;
        }
        if q_next.is_positive() && out.last() != Some(&q_next) {
            out.push(q_next.clone());
        }
        (q_prev, q) = (q, q_next);
        if frac.is_zero() {
            break;
        }
        x = frac.recip();
    }
    out
}

/// Integers `q ≤ q_max` making every `q · α_k` nearly integral, weighted by
/// `w_k`, from LLL on the standard simultaneous-approximation lattice at a
/// ladder of target sizes.
pub fn simultaneous_denominators(alphas: &[Rational], weights: &[f64], q_max: f64) -> Vec<BigInt> {
    let d = alphas.len();
    let mut out: Vec<BigInt> = Vec::new();
    let w_max = weights.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let weights: Vec<Rational> = weights
        .iter()
        .map(|w| Rational::from_float(w / w_max).unwrap_or_else(Rational::one))
        .collect();
    let max_bits = q_max.max(2.0).log2().ceil() as u32;
    for bits in 1..=max_bits {
        let target = BigInt::one() << bits;
        let scale = Rational::from_integer(BigInt::one() << (bits * (d as u32 + 1) + 64));
        let round = |r: Rational| (r + rational::ratio(1, 2)).floor().to_integer();
        let lead = round(&scale / Rational::from_integer(target.clone()));
        let mut rows = Vec::with_capacity(d + 1);
        let mut row0 = vec![lead.clone()];
        row0.extend(alphas.iter().zip(&weights).map(|(a, w)| round(&scale * w * a)));
        rows.push(row0);
        for k in 0..d {
            let mut row = vec![BigInt::zero(); d + 1];
            row[k + 1] = round(&scale * &weights[k]);
            rows.push(row);
        }
        for v in lattice::lll(rows, &rational::ratio(3, 4)) {
            let q = (&v[0] / &lead).abs();
            if !q.is_zero() && q.to_f64().is_some_and(|x| x <= q_max) && !out.contains(&q) {
                out.push(q);
            }
        }
    }
    out.sort();
    out
}
