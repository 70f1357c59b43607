//! Trial-parallel execution and CSV / manifest output.
//!
//! CSV schemas (headers are fixed):
//!
//! * `nulling_prob.csv`: `q,alpha_max_sq_db,trial,residual_power,success`,
//!   plus `nulling_prob_summary.csv`: `q,alpha_max_sq_db,success_prob,trials`
//! * `sumrate_convergence.csv`:
//!   `trial,alpha_max_sq_db,scheme,status,iteration,sum_rate`
//! * `sumrate_vs_pk.csv`, `sumrate_vs_budget.csv`:
//!   `trial,alpha_max_sq_db,p_k_dbm,p_ris_dbm,scheme,status,feasible,sum_rate,power_w,active_res,iterations`
//! * `powermin_success.csv`, `powermin_power.csv`:
//!   `trial,alpha_max_sq_db,rate_req_bps_hz,scheme,status,feasible,power_w,active_res,dca_iters,outer_iters`
//!
//! Rows are ordered by sweep point, then trial, then scheme. A solver error
//! is recorded as status `error` with NaN values; the run continues.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use ris_core::nulling::{aggregate_success, nulling_trial, NullingSetup, NullingTrial};
use ris_core::powermin::{fully_active, passive_feasibility, powermin_sparse};
use ris_core::scenario::{sample_fading, sample_placement, trial_rng, ChannelRealization, ScenarioConfig};
use ris_core::sumrate::{
    fixed_active, passive_count, passive_upper, sumrate_init, sumrate_one_loop, sumrate_two_loop, zero_set_report,
};
use ris_core::{ReflectVector, Result as CoreResult, SolveReport, SystemParams};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::spec::{Experiment, ExperimentSpec, Scheme};
use crate::ExperimentError;

/// Command-line overrides applied on top of a spec file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub trial: u64,
    pub alpha_max_sq_db: f64,
    pub scheme: &'static str,
    pub status: String,
    pub iteration: usize,
    pub sum_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumrateRow {
    pub trial: u64,
    pub alpha_max_sq_db: f64,
    pub p_k_dbm: f64,
    pub p_ris_dbm: f64,
    pub scheme: &'static str,
    pub status: String,
    pub feasible: bool,
    pub sum_rate: f64,
    pub power_w: f64,
    pub active_res: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerminRow {
    pub trial: u64,
    pub alpha_max_sq_db: f64,
    pub rate_req_bps_hz: f64,
    pub scheme: &'static str,
    pub status: String,
    pub feasible: bool,
    pub power_w: f64,
    pub active_res: usize,
    pub dca_iters: usize,
    pub outer_iters: usize,
}

const ERROR_STATUS: &str = "error";

/// Channels of one trial: the configured surface and, when needed, a passive
/// surface at the same positions sharing the direct links.
#[derive(Debug, Clone)]
pub struct TrialChannels {
    pub active: ChannelRealization,
    pub passive: Option<ChannelRealization>,
}

/// Draws trial `trial`. The passive surface is a square array of
/// `passive_res` elements drawn after the active one from the same stream.
pub fn draw_trial(config: &ScenarioConfig, seed: u64, trial: u64, passive_res: usize) -> CoreResult<TrialChannels> {
    let mut rng = trial_rng(seed, trial);
    let placement = sample_placement(config, &mut rng);
    let active = sample_fading(config, &placement, config.q1, config.q2, config.q(), &mut rng)?;
    let passive = if passive_res > 0 {
        let side = (passive_res as f64).sqrt().ceil() as usize;
        let draw = sample_fading(config, &placement, side, side, passive_res, &mut rng)?;
        Some(ChannelRealization::from_parts(active.h_d.clone(), draw.h_t, draw.h_r)?)
    } else {
        None
    };
    Ok(TrialChannels { active, passive })
}

/// Scenario of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    alpha_max_sq_db: f64,
    p_k_dbm: Option<f64>,
    p_ris_dbm: Option<f64>,
    rate_req: Option<f64>,
}

impl Point {
    fn config(&self, base: &ScenarioConfig) -> ScenarioConfig {
        let mut c = base.clone();
        c.alpha_max_sq_db = self.alpha_max_sq_db;
        if let Some(p) = self.p_k_dbm {
            c = c.with_uniform_power(p);
        }
        if let Some(p) = self.p_ris_dbm {
            c.p_ris_budget_dbm = p;
        }
        if let Some(r) = self.rate_req {
            c = c.with_uniform_rate(r);
        }
        c
    }
}

fn points(spec: &ExperimentSpec) -> Vec<Point> {
    let s = &spec.sweep;
    let mut out = Vec::new();
    for &alpha in &s.alpha_max_sq_db {
        let base = Point {
            alpha_max_sq_db: alpha,
            p_k_dbm: None,
            p_ris_dbm: None,
            rate_req: None,
        };
        match spec.experiment {
            Experiment::SumratePk => out.extend(s.p_k_dbm.iter().map(|&p| Point { p_k_dbm: Some(p), ..base })),
            Experiment::SumrateBudget => out.extend(s.p_ris_dbm.iter().map(|&p| Point { p_ris_dbm: Some(p), ..base })),
            Experiment::PowerminSuccess | Experiment::PowerminPower => {
                out.extend(s.rate_req_bps_hz.iter().map(|&r| Point { rate_req: Some(r), ..base }))
            }
            _ => out.push(base),
        }
    }
    out
}

fn status_of(r: &CoreResult<SolveReport>) -> String {
    match r {
        Ok(rep) => rep.status.to_string(),
        Err(_) => ERROR_STATUS.to_string(),
    }
}

/// Lazily computed sum-rate reports of one (trial, point).
struct SumrateCell<'a> {
    ch: &'a ChannelRealization,
    params: &'a SystemParams,
    init: Option<CoreResult<ReflectVector>>,
    one: Option<CoreResult<SolveReport>>,
    two: Option<CoreResult<SolveReport>>,
}

impl<'a> SumrateCell<'a> {
    fn new(ch: &'a ChannelRealization, params: &'a SystemParams) -> Self {
        Self {
            ch,
            params,
            init: None,
            one: None,
            two: None,
        }
    }

    fn init(&mut self) -> CoreResult<ReflectVector> {
        let (ch, params) = (self.ch, self.params);
        let r = self
            .init
            .get_or_insert_with(|| sumrate_init(ch, params).map(ReflectVector::new));
        match r {
            Ok(a) => Ok(a.clone()),
            Err(e) => Err(ris_core::CoreError::Precondition(format!("initial point: {e}"))),
        }
    }

    fn one_loop(&mut self) -> CoreResult<SolveReport> {
        if self.one.is_none() {
            let r = self.init().and_then(|a| sumrate_one_loop(self.ch, self.params, &a.a));
            self.one = Some(r);
        }
        clone_result(self.one.as_ref().unwrap())
    }

    fn two_loop(&mut self) -> CoreResult<SolveReport> {
        if self.two.is_none() {
            let r = self.init().and_then(|a| sumrate_two_loop(self.ch, self.params, &a.a));
            self.two = Some(r);
        }
        clone_result(self.two.as_ref().unwrap())
    }
}

fn clone_result(r: &CoreResult<SolveReport>) -> CoreResult<SolveReport> {
    match r {
        Ok(rep) => Ok(rep.clone()),
        Err(e) => Err(ris_core::CoreError::Precondition(e.to_string())),
    }
}

fn run_sumrate_scheme(
    scheme: Scheme,
    cell: &mut SumrateCell<'_>,
    passive: Option<&ChannelRealization>,
) -> CoreResult<SolveReport> {
    let (ch, params) = (cell.ch, cell.params);
    match scheme {
        Scheme::SrbOneLoop => cell.one_loop(),
        Scheme::SrbOneLoopZs => cell.one_loop().and_then(|r| zero_set_report(&r, ch, params)),
        Scheme::SrbTwoLoop => cell.two_loop(),
        Scheme::SrbTwoLoopZs => cell.two_loop().and_then(|r| zero_set_report(&r, ch, params)),
        Scheme::RbFixedActive => fixed_active(ch, params),
        Scheme::PassiveUpper => {
            let full = passive.ok_or_else(|| ris_core::CoreError::Precondition("no passive surface drawn".into()))?;
            let qp = passive_count(params).clamp(1, full.q());
            passive_upper(&full.truncated(qp)?, params)
        }
        Scheme::Srb | Scheme::RbFullyActive | Scheme::Passive => {
            Err(ris_core::CoreError::InvalidArgument(format!("{} is a power-minimization scheme", scheme.name())))
        }
    }
}

fn run_powermin_scheme(scheme: Scheme, ch: &ChannelRealization, params: &SystemParams) -> CoreResult<SolveReport> {
    match scheme {
        Scheme::Srb => powermin_sparse(ch, params),
        Scheme::RbFullyActive => fully_active(ch, params),
        Scheme::Passive => passive_feasibility(ch, params),
        _ => Err(ris_core::CoreError::InvalidArgument(format!("{} is a sum-rate scheme", scheme.name()))),
    }
}

fn resolve_points(spec: &ExperimentSpec) -> Result<Vec<(Point, SystemParams)>, ExperimentError> {
    points(spec)
        .into_iter()
        .map(|p| {
            let params = p
                .config(&spec.base)
                .resolve()
                .map_err(|e| ExperimentError::Schema(format!("sweep point: {e}")))?;
            Ok((p, params))
        })
        .collect()
}

/// Passive surface size needed by a sum-rate spec (0 if no passive scheme).
fn passive_res_needed(spec: &ExperimentSpec, pts: &[(Point, SystemParams)]) -> usize {
    if !spec.schemes.contains(&Scheme::PassiveUpper) {
        return 0;
    }
    pts.iter()
        .map(|(_, p)| passive_count(p))
        .max()
        .unwrap_or(1)
        .clamp(1, spec.passive_max_res)
}

fn sumrate_trial(
    spec: &ExperimentSpec,
    pts: &[(Point, SystemParams)],
    passive_res: usize,
    seed: u64,
    trial: u64,
) -> Vec<(usize, SumrateRow)> {
    let drawn = draw_trial(&spec.base, seed, trial, passive_res);
    let mut rows = Vec::new();
    for (idx, (pt, params)) in pts.iter().enumerate() {
        let results: Vec<(Scheme, CoreResult<SolveReport>)> = match &drawn {
            Ok(tc) => {
                let mut cell = SumrateCell::new(&tc.active, params);
                spec.schemes
                    .iter()
                    .map(|&s| (s, run_sumrate_scheme(s, &mut cell, tc.passive.as_ref())))
                    .collect()
            }
            Err(e) => spec
                .schemes
                .iter()
                .map(|&s| (s, Err(ris_core::CoreError::Precondition(e.to_string()))))
                .collect(),
        };
        for (s, r) in results {
            let status = status_of(&r);
            let row = match r {
                Ok(rep) => SumrateRow {
                    trial,
                    alpha_max_sq_db: pt.alpha_max_sq_db,
                    p_k_dbm: pt.p_k_dbm.unwrap_or(spec.base.p_k_dbm[0]),
                    p_ris_dbm: pt.p_ris_dbm.unwrap_or(spec.base.p_ris_budget_dbm),
                    scheme: s.name(),
                    status,
                    feasible: rep.feasible,
                    sum_rate: rep.sum_rate,
                    power_w: rep.power_w,
                    active_res: rep.active_res,
                    iterations: rep.iterations,
                },
                Err(_) => SumrateRow {
                    trial,
                    alpha_max_sq_db: pt.alpha_max_sq_db,
                    p_k_dbm: pt.p_k_dbm.unwrap_or(spec.base.p_k_dbm[0]),
                    p_ris_dbm: pt.p_ris_dbm.unwrap_or(spec.base.p_ris_budget_dbm),
                    scheme: s.name(),
                    status,
                    feasible: false,
                    sum_rate: f64::NAN,
                    power_w: f64::NAN,
                    active_res: 0,
                    iterations: 0,
                },
            };
            rows.push((idx, row));
        }
    }
    rows
}

fn convergence_trial(spec: &ExperimentSpec, pts: &[(Point, SystemParams)], seed: u64, trial: u64) -> Vec<(usize, ConvergenceRow)> {
    let drawn = draw_trial(&spec.base, seed, trial, 0);
    let mut rows = Vec::new();
    for (idx, (pt, params)) in pts.iter().enumerate() {
        for &s in &spec.schemes {
            let r = match &drawn {
                Ok(tc) => {
                    let mut cell = SumrateCell::new(&tc.active, params);
                    run_sumrate_scheme(s, &mut cell, None)
                }
                Err(e) => Err(ris_core::CoreError::Precondition(e.to_string())),
            };
            let status = status_of(&r);
            let trajectory = r.map(|rep| rep.trajectory).unwrap_or_else(|_| vec![f64::NAN]);
            for (iteration, sum_rate) in trajectory.into_iter().enumerate() {
                rows.push((
                    idx,
                    ConvergenceRow {
                        trial,
                        alpha_max_sq_db: pt.alpha_max_sq_db,
                        scheme: s.name(),
                        status: status.clone(),
                        iteration,
                        sum_rate,
                    },
                ));
            }
        }
    }
    rows
}

fn powermin_trial(spec: &ExperimentSpec, pts: &[(Point, SystemParams)], seed: u64, trial: u64) -> Vec<(usize, PowerminRow)> {
    let drawn = draw_trial(&spec.base, seed, trial, 0);
    let mut rows = Vec::new();
    for (idx, (pt, params)) in pts.iter().enumerate() {
        for &s in &spec.schemes {
            let r = match &drawn {
                Ok(tc) => run_powermin_scheme(s, &tc.active, params),
                Err(e) => Err(ris_core::CoreError::Precondition(e.to_string())),
            };
            let status = status_of(&r);
            let row = match r {
                Ok(rep) => PowerminRow {
                    trial,
                    alpha_max_sq_db: pt.alpha_max_sq_db,
                    rate_req_bps_hz: pt.rate_req.unwrap_or(0.0),
                    scheme: s.name(),
                    status,
                    feasible: rep.feasible,
                    power_w: rep.power_w,
                    active_res: rep.active_res,
                    dca_iters: rep.dca_iterations,
                    outer_iters: rep.outer_iterations,
                },
                Err(_) => PowerminRow {
                    trial,
                    alpha_max_sq_db: pt.alpha_max_sq_db,
                    rate_req_bps_hz: pt.rate_req.unwrap_or(0.0),
                    scheme: s.name(),
                    status,
                    feasible: false,
                    power_w: f64::NAN,
                    active_res: 0,
                    dca_iters: 0,
                    outer_iters: 0,
                },
            };
            rows.push((idx, row));
        }
    }
    rows
}

/// Runs `f` for every trial on a pool of `workers` threads and returns the
/// rows ordered by (sweep point, trial), schemes in spec order.
fn gather<R: Send>(
    trials: u64,
    workers: Option<usize>,
    f: impl Fn(u64) -> Vec<(usize, R)> + Sync,
) -> Result<Vec<R>, ExperimentError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| ExperimentError::Io(std::io::Error::other(e.to_string())))?;
    let per_trial: Vec<Vec<(usize, R)>> = pool.install(|| (0..trials).into_par_iter().map(&f).collect());
    let mut keyed: Vec<(usize, u64, usize, R)> = per_trial
        .into_iter()
        .enumerate()
        .flat_map(|(t, rows)| rows.into_iter().enumerate().map(move |(i, (p, r))| (p, t as u64, i, r)))
        .collect();
    keyed.sort_by_key(|(p, t, i, _)| (*p, *t, *i));
    Ok(keyed.into_iter().map(|(_, _, _, r)| r).collect())
}

fn write_csv<R: Serialize>(path: &Path, rows: &[R], header: &[&str]) -> Result<(), ExperimentError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const NULLING_HEADER: [&str; 5] = ["q", "alpha_max_sq_db", "trial", "residual_power", "success"];
pub const NULLING_SUMMARY_HEADER: [&str; 4] = ["q", "alpha_max_sq_db", "success_prob", "trials"];
pub const CONVERGENCE_HEADER: [&str; 6] = ["trial", "alpha_max_sq_db", "scheme", "status", "iteration", "sum_rate"];
pub const SUMRATE_HEADER: [&str; 11] = [
    "trial",
    "alpha_max_sq_db",
    "p_k_dbm",
    "p_ris_dbm",
    "scheme",
    "status",
    "feasible",
    "sum_rate",
    "power_w",
    "active_res",
    "iterations",
];
pub const POWERMIN_HEADER: [&str; 10] = [
    "trial",
    "alpha_max_sq_db",
    "rate_req_bps_hz",
    "scheme",
    "status",
    "feasible",
    "power_w",
    "active_res",
    "dca_iters",
    "outer_iters",
];

/// Hex SHA-256 of `bytes` framed like a git blob (`blob <len>\0<bytes>`).
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    seed: u64,
    trials: u64,
    spec_sha256: String,
    spec: &'a ExperimentSpec,
    resolved_base: &'a SystemParams,
    outputs: Vec<String>,
    scale: String,
    package_version: &'static str,
}

/// Runs a parsed spec. `spec_bytes` is the original file content, hashed
/// into the manifest.
pub fn run_spec(spec: &ExperimentSpec, spec_bytes: &[u8], opts: &RunOptions) -> Result<RunOutput, ExperimentError> {
    let mut spec = spec.clone();
    if let Some(s) = opts.seed {
        spec.base.seed = s;
    }
    if let Some(t) = opts.trials {
        spec.trials = t;
    }
    if let Some(d) = &opts.out_dir {
        spec.output.dir = d.clone();
    }
    if spec.schemes.is_empty() {
        spec.schemes = spec.experiment.default_schemes();
    }
    spec.validate()?;
    let resolved_base = spec
        .base
        .resolve()
        .map_err(|e| ExperimentError::Schema(format!("base: {e}")))?;
    let seed = spec.base.seed;
    let dir = spec.output.dir.clone();
    std::fs::create_dir_all(&dir)?;
    let name = spec.experiment.name();
    let main_csv = dir.join(format!("{name}.csv"));
    let mut files = vec![main_csv.clone()];

    match spec.experiment {
        Experiment::NullingProb => {
            let setup = NullingSetup {
                k: spec.base.k,
                rank_tol: spec.base.tolerances.rank_tol,
                ..NullingSetup::default()
            };
            let (qs, alphas) = (&spec.sweep.q, &spec.sweep.alpha_max_sq_db);
            let mut rows: Vec<NullingTrial> = gather(spec.trials, opts.workers, |t| {
                match nulling_trial(&setup, qs, alphas, seed, t) {
                    Ok(rows) => rows.into_iter().map(|r| (0, r)).collect(),
                    Err(_) => qs
                        .iter()
                        .flat_map(|&q| {
                            alphas.iter().map(move |&a| {
                                (
                                    0,
                                    NullingTrial {
                                        q,
                                        alpha_max_sq_db: a,
                                        trial: t,
                                        residual_power: f64::NAN,
                                        success: false,
                                    },
                                )
                            })
                        })
                        .collect(),
                }
            })?;
            let cell = |r: &NullingTrial| {
                (
                    qs.iter().position(|&q| q == r.q).unwrap_or(usize::MAX),
                    alphas.iter().position(|&a| a == r.alpha_max_sq_db).unwrap_or(usize::MAX),
                )
            };
            rows.sort_by_key(|r| (cell(r), r.trial));
            write_csv(&main_csv, &rows, &NULLING_HEADER)?;
            let summary = dir.join(format!("{name}_summary.csv"));
            write_csv(&summary, &aggregate_success(&rows), &NULLING_SUMMARY_HEADER)?;
            files.push(summary);
        }
        Experiment::SumrateConvergence => {
            let pts = resolve_points(&spec)?;
            let rows = gather(spec.trials, opts.workers, |t| convergence_trial(&spec, &pts, seed, t))?;
            write_csv(&main_csv, &rows, &CONVERGENCE_HEADER)?;
        }
        Experiment::SumratePk | Experiment::SumrateBudget => {
            let pts = resolve_points(&spec)?;
            let passive_res = passive_res_needed(&spec, &pts);
            let rows = gather(spec.trials, opts.workers, |t| sumrate_trial(&spec, &pts, passive_res, seed, t))?;
            write_csv(&main_csv, &rows, &SUMRATE_HEADER)?;
        }
        Experiment::PowerminSuccess | Experiment::PowerminPower => {
            let pts = resolve_points(&spec)?;
            let rows = gather(spec.trials, opts.workers, |t| powermin_trial(&spec, &pts, seed, t))?;
            write_csv(&main_csv, &rows, &POWERMIN_HEADER)?;
        }
    }

    let manifest_path = dir.join(format!("{name}.manifest.json"));
    let manifest = Manifest {
        experiment: name,
        seed,
        trials: spec.trials,
        spec_sha256: content_hash(spec_bytes),
        spec: &spec,
        resolved_base: &resolved_base,
        outputs: files
            .iter()
            .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
            .collect(),
        scale: format!(
            "{} trials on a {}x{} surface ({} elements)",
            spec.trials,
            spec.base.q1,
            spec.base.q2,
            spec.base.q()
        ),
        package_version: env!("CARGO_PKG_VERSION"),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| ExperimentError::Io(e.into()))?;
    std::fs::write(&manifest_path, json + "\n")?;
    Ok(RunOutput {
        files,
        manifest: manifest_path,
    })
}
