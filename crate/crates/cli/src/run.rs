//! The five pipelines. Each returns a JSON result plus any CSV artifacts;
//! nothing here depends on wall-clock time or worker count.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use inftorus::classify;
use inftorus::ergodic::{self, CharacterIndex, EQUIDIST_MAX_DIMS};
use inftorus::rational::{self, Rational};
use inftorus::recurrence::{self, SearchOptions};
use inftorus::schema;
use inftorus::torus;
use inftorus::{Angle, Execution, FlowTime, LinearFlow, PhasePoint, TorusSpec, VERSION};

use crate::config::{positive, Command, RunConfig};
use crate::error::CliError;

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub report: Value,
    pub artifacts: Vec<Artifact>,
}

macro_rules! note {
    ($verbose:expr, $($arg:tt)*) => {
        if $verbose {
            eprintln!("[inftorus] {}", format!($($arg)*));
        }
    };
}

pub fn execute(cfg: &RunConfig, verbose: bool) -> Result<Output, CliError> {
    note!(verbose, "{} on {} frequencies", cfg.command.name(), cfg.system.len());
    let (result, artifacts) = match cfg.command {
        Command::Classify => (run_classify(cfg)?, vec![]),
        Command::Simulate => run_simulate(cfg, verbose)?,
        Command::ErgodicTest => (run_ergodic(cfg, verbose)?, vec![]),
        Command::Recurrence => (run_recurrence(cfg, verbose)?, vec![]),
        Command::PeriodTable => run_period_table(cfg)?,
    };
    let report = json!({
        "command": cfg.command.name(),
        "config_sha256": cfg.hash(),
        "version": VERSION,
        "seed": cfg.params.seed,
        "result": result,
        "artifacts": artifacts.iter().map(|a| a.name.as_str()).collect::<Vec<_>>(),
    });
    Ok(Output { report, artifacts })
}

/// Writes the report and artifacts into `dir`, returning the paths.
pub fn write(dir: &Path, output: &Output) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("--out: cannot create {}: {e}", dir.display())))?;
    let mut text = serde_json::to_string_pretty(&output.report).expect("JSON values serialize");
    text.push('\n');
    let mut files = vec![(REPORT_FILE.to_string(), text.into_bytes())];
    files.extend(output.artifacts.iter().map(|a| (a.name.clone(), a.bytes.clone())));
    files
        .into_iter()
        .map(|(name, bytes)| {
            let path = dir.join(&name);
            fs::write(&path, bytes).map_err(|e| CliError::Io(format!("--out: cannot write {}: {e}", path.display())))?;
            Ok(path)
        })
        .collect()
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn default_trunc(cfg: &RunConfig, torus: &TorusSpec) -> usize {
    let n = cfg.params.upto.unwrap_or(cfg.system.len()).min(cfg.system.len());
    torus.dimension().map_or(n, |d| n.min(d))
}

fn initial_point(cfg: &RunConfig, torus: Arc<TorusSpec>) -> Result<PhasePoint, CliError> {
    let at = CliError::at("params.point");
    match &cfg.params.point {
        None => {
            let n = default_trunc(cfg, &torus);
            PhasePoint::origin(torus, n).map_err(at)
        }
        Some(p) => match (&p.radians, &p.turns) {
            (Some(r), None) => PhasePoint::from_radians(torus, r).map_err(at),
            (None, Some(t)) => {
                let angles = t
                    .iter()
                    .map(|s| rational::parse_rational(s).map(Angle::turns))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(&at)?;
                PhasePoint::new(torus, angles).map_err(at)
            }
            _ => Err(CliError::Config("params.point: give exactly one of radians or turns".into())),
        },
    }
}

fn csv_bytes(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(format!("csv: {e}"));
    w.write_record(&header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))
}

fn run_classify(cfg: &RunConfig) -> Result<Value, CliError> {
    let upto = cfg.params.upto.unwrap_or(cfg.system.len());
    let class = classify::classify_trajectory(&cfg.system, cfg.torus()?, upto).map_err(CliError::at("params.upto"))?;
    Ok(schema::class_json(&class))
}

fn run_period_table(cfg: &RunConfig) -> Result<(Value, Vec<Artifact>), CliError> {
    let n_max = cfg
        .params
        .n_max
        .ok_or_else(|| CliError::Config("params.n_max: missing".into()))?;
    let table = classify::projection_period_growth(&cfg.system, n_max).map_err(CliError::at("params.n_max"))?;
    let name = cfg.params.csv.clone().unwrap_or_else(|| "period_table.csv".into());
    let rows = table
        .iter()
        .map(|(n, p)| vec![n.to_string(), p.as_ref().map_or("none".to_string(), schema::period_cell)])
        .collect();
    let bytes = csv_bytes(vec!["N".into(), "period_over_2pi".into()], rows)?;
    let result = json!({
        "table": schema::period_table_json(&table),
        "strictly_increasing": classify::table_strictly_increasing(&table),
        "csv": name,
    });
    Ok((result, vec![Artifact { name, bytes }]))
}

fn simulation_times(cfg: &RunConfig) -> Result<Vec<FlowTime>, CliError> {
    let p = &cfg.params;
    let mut times = Vec::new();
    if let Some(ts) = &p.times {
        times.extend(ts.iter().map(|&t| FlowTime::seconds(t)));
    }
    if let Some(ts) = &p.turns {
        for s in ts {
            times.push(FlowTime::turns(rational::parse_rational(s).map_err(CliError::at("params.turns"))?));
        }
    }
    if let Some(g) = &p.grid {
        if !(g.t_max >= 0.0 && g.t_max.is_finite()) {
            return Err(CliError::Config(format!("params.grid.t_max: must be finite and nonnegative, got {}", g.t_max)));
        }
        let steps = g.steps.max(1);
        times.extend((0..=g.steps).map(|j| FlowTime::seconds(g.t_max * j as f64 / steps as f64)));
    }
    if times.is_empty() {
        return Err(CliError::Config("params.times: give times, turns or grid".into()));
    }
    Ok(times)
}

fn run_simulate(cfg: &RunConfig, verbose: bool) -> Result<(Value, Vec<Artifact>), CliError> {
    let torus = Arc::new(cfg.torus()?.clone());
    let x0 = initial_point(cfg, torus)?;
    let flow = LinearFlow::new(cfg.system.clone());
    let times = simulation_times(cfg)?;
    note!(verbose, "evolving {} samples", times.len());
    let samples =
        ergodic::sample_trajectory(&flow, &x0, &times, Execution::Parallel).map_err(CliError::at("params.point"))?;
    let n = x0.trunc_level();
    let include_qp = cfg.params.include_qp.unwrap_or(false);

    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|k| format!("theta_{k}")));
    if include_qp {
        header.extend((1..=n).map(|k| format!("q_{k}")));
        header.extend((1..=n).map(|k| format!("p_{k}")));
    }
    let (q0, p0) = x0.to_qp();
    let integrals0 = torus::first_integrals_qp(&q0, &p0);
    let energy0 = flow.energy_qp(&q0, &p0).map_err(CliError::at("system"))?;
    let (mut energy_drift, mut integral_drift) = (0.0f64, 0.0f64);
    let mut rows = Vec::with_capacity(samples.len());
    for (t, x) in times.iter().zip(&samples) {
        let mut row = vec![t.as_f64().to_string()];
        row.extend(x.radians().iter().map(f64::to_string));
        let (q, p) = x.to_qp();
        if include_qp {
            row.extend(q.iter().chain(&p).map(f64::to_string));
        }
        for (a, b) in torus::first_integrals_qp(&q, &p).iter().zip(&integrals0) {
            integral_drift = integral_drift.max((a - b).abs());
        }
        energy_drift = energy_drift.max((flow.energy_qp(&q, &p).map_err(CliError::at("system"))? - energy0).abs());
        rows.push(row);
    }
    let name = cfg.params.csv.clone().unwrap_or_else(|| "trajectory.csv".into());
    let bytes = csv_bytes(header, rows)?;
    let result = json!({
        "trunc": n,
        "samples": samples.len(),
        "initial_point": x0.radians(),
        "final_point": samples.last().map(PhasePoint::radians),
        "energy": energy0,
        "max_energy_drift": energy_drift,
        "max_first_integral_drift": integral_drift,
        "csv": name,
    });
    Ok((result, vec![Artifact { name, bytes }]))
}

fn run_ergodic(cfg: &RunConfig, verbose: bool) -> Result<Value, CliError> {
    let p = &cfg.params;
    let torus_spec = cfg.torus()?;
    let seed = cfg.seed()?;
    let upto = p.upto.unwrap_or(cfg.system.len());
    let verdict = ergodic::ergodicity_verdict(&cfg.system, upto).map_err(CliError::at("params.upto"))?;

    let character = match (&p.character, &verdict.witness) {
        (Some(pairs), _) => CharacterIndex::new(pairs.iter().copied()).map_err(CliError::at("params.character"))?,
        (None, Some(w)) => {
            let ns = w
                .iter()
                .map(i64::try_from)
                .collect::<Result<Vec<i64>, _>>()
                .map_err(|_| CliError::Config("params.character: witness too large; give a character".into()))?;
            CharacterIndex::dense(&ns)
        }
        (None, None) => CharacterIndex::dense(&[1, -1]),
    };
    let horizon = positive("T", p.average_horizon, Some(1e4))?;
    let steps = p.steps.unwrap_or(100_000);
    let samples = p.samples.unwrap_or(100_000);
    let flow = LinearFlow::new(cfg.system.clone());
    let torus = Arc::new(torus_spec.clone());
    let x0 = initial_point(cfg, torus.clone())?;

    let pairing = cfg.system.pairing(&character.pairs()).map_err(CliError::at("params.character"))?;
    let resonant = pairing.is_zero();
    let omega = rational::to_f64(&pairing.value(cfg.system.basis()));
    note!(verbose, "time average over T = {horizon}");
    let closed = ergodic::time_average_closed(&character, &flow, &x0, horizon).map_err(CliError::at("params.character"))?;
    let quad = ergodic::time_average_quadrature_with(&character, &flow, &x0, horizon, steps, Execution::Parallel)
        .map_err(CliError::at("params.steps"))?;
    note!(verbose, "space average with {samples} samples");
    let mc = ergodic::space_average_mc_with(torus_spec, &character, samples, seed, Execution::Parallel)
        .map_err(CliError::at("params.samples"))?;

    let dims = match &p.equidist_dims {
        Some(d) => d.clone(),
        None => {
            let support: Vec<usize> = character.pairs().iter().map(|&(k, _)| k).collect();
            if !support.is_empty() && support.len() <= EQUIDIST_MAX_DIMS {
                support
            } else {
                (1..=x0.trunc_level().min(EQUIDIST_MAX_DIMS)).collect()
            }
        }
    };
    let m = p.equidist_samples.unwrap_or(10_000);
    let times: Vec<FlowTime> = (0..m)
        .map(|j| FlowTime::turns(Rational::from_float(horizon / TAU * j as f64 / m as f64).unwrap_or_default()))
        .collect();
    note!(verbose, "equidistribution over {m} orbit samples");
    let orbit = ergodic::sample_trajectory(&flow, &x0, &times, Execution::Parallel).map_err(CliError::at("params.point"))?;
    let equi = ergodic::equidistribution_stat_with(&orbit, &dims, Execution::Parallel)
        .map_err(CliError::at("params.equidist_dims"))?;

    let stats = json!({
        "character": schema::character_json(&character),
        "pairing": pairing.to_string(),
        "resonant": resonant,
        "time_average": {
            "T": horizon,
            "closed": complex(closed),
            "closed_modulus": closed.norm(),
            "bound": (!resonant).then(|| 2.0 / (horizon * omega.abs())),
            "quadrature": {
                "value": complex(quad.value),
                "error_bound": quad.error_bound,
                "steps": steps,
                "difference": (quad.value - closed).norm(),
            },
        },
        "space_average": {
            "estimate": complex(mc.estimate),
            "modulus": mc.estimate.norm(),
            "stderr": mc.stderr,
            "samples": mc.samples,
            "within_3_stderr": mc.estimate.norm() <= 3.0 * mc.stderr,
        },
        "equidistribution": {
            "dims": dims,
            "samples": m,
            "value": equi.value,
            "worst": schema::character_json(&equi.worst),
        },
    });
    Ok(schema::verdict_json(&verdict, stats))
}

fn run_recurrence(cfg: &RunConfig, verbose: bool) -> Result<Value, CliError> {
    let p = &cfg.params;
    let torus = Arc::new(cfg.torus()?.clone());
    let x0 = initial_point(cfg, torus.clone())?;
    let eps = positive("eps", p.eps, None)?;
    let t_floor = positive("t_floor", p.t_floor, None)?;
    let defaults = SearchOptions::default();
    let opts = SearchOptions {
        horizon: positive("horizon", p.horizon, Some(defaults.horizon))?,
        max_hits: p.max_hits.unwrap_or(defaults.max_hits),
        grid_dt: positive("grid_dt", p.grid_dt, Some(defaults.grid_dt))?,
        grid_window: positive("grid_window", p.grid_window, Some(defaults.grid_window))?,
        exec: Execution::Parallel,
    };
    let flow = LinearFlow::new(cfg.system.clone());
    note!(verbose, "searching returns within {eps} after t = {t_floor}");
    let record = recurrence::nonwandering_evidence_with(&x0, &flow, eps, t_floor, &opts).map_err(CliError::at("params.eps"))?;
    let tail = torus.tail_sq_sum(x0.trunc_level()).map_err(CliError::at("torus"))?;
    let mut result = schema::return_record_json(&record);
    result["trunc"] = json!(x0.trunc_level());
    result["tail_budget"] = json!(2.0 * tail.sqrt());
    Ok(result)
}
