//! Subcommand implementations. Each takes a validated [`Prepared`] config.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tepai_core::analytics::{nu_infinity, overhead_asymptotic, shots_bound};
use tepai_core::ftcost::{self, hierarchy_angle, Method, Table1, Table1Params};
use tepai_core::pai::{template_statistics, QDriftPlan};
use tepai_core::simulator::{
    block_count, block_range, exact_evolution, Accumulator, EstimatorMode, Experiment, NoiseModel,
    Protocol, BLOCK_SHOTS,
};
use tepai_core::{Hamiltonian, SamplingPlan, StateVector, TrotterTemplate};

use crate::config::{AngleSpec, Prepared, ProtocolKind, SweepAxis};
use crate::error::{AppError, AppResult};
use crate::runner::{build_pool, default_workers, execute, ShotLog, Totals};

pub const HEADER_FILE: &str = "header.json";
pub const SHOTS_FILE: &str = "shots.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMING_FILE: &str = "timing.json";

/// Exact-oracle starting step count for time-ordered integration.
const EXACT_START_STEPS: usize = 64;

/// Results that depend only on the config and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub protocol: String,
    pub mode: String,
    pub shots: u64,
    pub mean: Option<f64>,
    pub std_error: Option<f64>,
    pub mean_nu: Option<f64>,
    pub var_nu: Option<f64>,
    pub overhead: f64,
    pub delta: Option<f64>,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub config: crate::config::RunConfig,
    pub protocol: String,
    pub n_qubits: usize,
    pub n_terms: usize,
    pub c_norm_avg: Option<f64>,
    pub delta: Option<f64>,
    pub nu_inf: Option<f64>,
    pub nu_expected: f64,
    pub nu_variance: f64,
    /// Exact product of the per-gate one-norms; the `||g||_1` of the run.
    pub overhead: f64,
    pub overhead_asymptotic: Option<f64>,
    pub shots_bound: u64,
    pub precision: f64,
}

fn opt(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn summary_from(totals: &Totals, protocol: &str, mode: EstimatorMode, overhead: f64, delta: Option<f64>, seed: u64) -> Summary {
    let r = totals.values.result(mode);
    let any = totals.nu.count > 0;
    Summary {
        protocol: protocol.into(),
        mode: mode.name().into(),
        shots: r.shots,
        mean: opt(r.mean),
        std_error: opt(r.std_error),
        mean_nu: any.then_some(totals.nu.mean),
        var_nu: any.then(|| totals.nu.variance()),
        overhead,
        delta,
        master_seed: seed,
    }
}

/// Owns whichever sampler the protocol needs so experiments can borrow it.
pub struct Plans<'h> {
    pub kind: ProtocolKind,
    pub template: TrotterTemplate<'h>,
    pub tepai: Option<SamplingPlan<'h>>,
    pub qdrift: Option<QDriftPlan<'h>>,
}

impl<'h> Plans<'h> {
    pub fn new(h: &'h Hamiltonian, kind: ProtocolKind, time: f64, steps: usize, delta: Option<f64>) -> AppResult<Self> {
        let template = TrotterTemplate::new(h, time, steps)?;
        let mut plans = Plans {
            kind,
            template,
            tepai: None,
            qdrift: None,
        };
        match kind {
            ProtocolKind::Tepai => {
                let d = delta.ok_or_else(|| AppError::validation("delta", "required for tepai"))?;
                plans.tepai = Some(SamplingPlan::new(template, d).map_err(|e| match e {
                    tepai_core::Error::AngleExceedsDelta { .. } => AppError::validation("N", e.to_string()),
                    e => e.into(),
                })?);
            }
            ProtocolKind::Qdrift => plans.qdrift = Some(QDriftPlan::new(h, time, steps)?),
            ProtocolKind::Trotter => {}
        }
        Ok(plans)
    }

    pub fn protocol(&self) -> Protocol<'_, 'h> {
        match self.kind {
            ProtocolKind::Tepai => Protocol::TePai(self.tepai.as_ref().expect("built in new")),
            ProtocolKind::Qdrift => Protocol::QDrift(self.qdrift.as_ref().expect("built in new")),
            ProtocolKind::Trotter => Protocol::Trotter(self.template),
        }
    }

    pub fn overhead(&self) -> f64 {
        self.tepai.as_ref().map_or(1.0, |p| p.overhead())
    }

    /// Expected gate count and its variance.
    pub fn nu_moments(&self) -> (f64, f64) {
        match (&self.tepai, &self.qdrift) {
            (Some(p), _) => (p.expected_gate_count(), p.gate_count_variance()),
            (None, Some(_)) => (self.template.steps() as f64, 0.0),
            _ => (self.template.positions() as f64, 0.0),
        }
    }
}

pub fn experiment<'a, 'h>(
    prep: &'a Prepared,
    plans: &'a Plans<'h>,
    initial: &'a StateVector,
    noise: NoiseModel,
    seed: u64,
) -> Experiment<'a, 'h> {
    Experiment {
        protocol: plans.protocol(),
        observable: &prep.observable,
        initial,
        mode: prep.config.mode.into(),
        noise,
        master_seed: seed,
    }
}

fn workers(prep: &Prepared) -> usize {
    prep.config.workers.unwrap_or_else(default_workers)
}

fn output_dir(prep: &Prepared) -> PathBuf {
    prep.config.output.clone().unwrap_or_else(|| PathBuf::from("tepai-out"))
}

fn create_dir(dir: &Path) -> AppResult<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> AppResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> AppResult<T> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| AppError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn header(prep: &Prepared, plans: &Plans<'_>) -> AppResult<Header> {
    let cfg = &prep.config;
    let ct = prep.c_norm_avg.map(|c| c * cfg.time);
    let delta = (plans.kind == ProtocolKind::Tepai).then_some(prep.delta).flatten();
    let (nu_inf, asym) = match (ct, delta) {
        (Some(ct), Some(d)) => (Some(nu_infinity(ct, d)?), Some(overhead_asymptotic(ct, d)?)),
        (None, Some(_)) => (Some(0.0), Some(1.0)),
        _ => (None, None),
    };
    let (nu_expected, nu_variance) = plans.nu_moments();
    let overhead = plans.overhead();
    Ok(Header {
        config: cfg.clone(),
        protocol: plans.protocol().name().into(),
        n_qubits: prep.n_qubits(),
        n_terms: prep.hamiltonian.len(),
        c_norm_avg: prep.c_norm_avg,
        delta,
        nu_inf,
        nu_expected,
        nu_variance,
        overhead,
        overhead_asymptotic: asym,
        shots_bound: shots_bound(overhead, cfg.precision)?,
        precision: cfg.precision,
    })
}

/// `run` and `qdrift`: header, shot log and summary in the output directory.
/// Returns `None` when no shots were requested.
pub fn cmd_run(prep: &Prepared, kind: ProtocolKind) -> AppResult<Option<Summary>> {
    let started = Instant::now();
    let cfg = &prep.config;
    let plans = Plans::new(&prep.hamiltonian, kind, cfg.time, cfg.steps, prep.delta)?;
    let dir = output_dir(prep);
    create_dir(&dir)?;
    let head = header(prep, &plans)?;
    write_json(&dir.join(HEADER_FILE), &head)?;
    if cfg.shots == 0 {
        return Ok(None);
    }
    let initial = prep.initial.prepare(prep.n_qubits(), prep.statevector_limit)?;
    let exp = experiment(prep, &plans, &initial, prep.noise, cfg.master_seed);
    let n_workers = workers(prep);
    let pool = build_pool(n_workers)?;
    let shots_path = dir.join(SHOTS_FILE);
    let file = File::create(&shots_path).map_err(|e| AppError::io(&shots_path, e))?;
    let mut out = BufWriter::new(file);
    let totals = execute(
        &pool,
        &exp,
        cfg.shots,
        Some(ShotLog {
            out: &mut out,
            gates: cfg.log_gates,
        }),
    )?;
    out.flush().map_err(|e| AppError::io(&shots_path, e))?;
    let summary = summary_from(&totals, exp.protocol.name(), exp.mode, head.overhead, head.delta, cfg.master_seed);
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    write_json(
        &dir.join(TIMING_FILE),
        &serde_json::json!({
            "wall_seconds": started.elapsed().as_secs_f64(),
            "workers": n_workers,
        }),
    )?;
    Ok(Some(summary))
}

/// Runs without writing anything; used by the trajectory and in tests.
pub fn estimate(prep: &Prepared, kind: ProtocolKind, time: f64, seed: u64, pool: &rayon::ThreadPool) -> AppResult<Summary> {
    let cfg = &prep.config;
    let plans = Plans::new(&prep.hamiltonian, kind, time, cfg.steps, prep.delta)?;
    let initial = prep.initial.prepare(prep.n_qubits(), prep.statevector_limit)?;
    let exp = experiment(prep, &plans, &initial, prep.noise, seed);
    let totals = execute(pool, &exp, cfg.shots, None)?;
    let delta = (kind == ProtocolKind::Tepai).then_some(prep.delta).flatten();
    Ok(summary_from(&totals, exp.protocol.name(), exp.mode, plans.overhead(), delta, seed))
}

fn csv_writer(path: &Path) -> AppResult<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| AppError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> AppError + '_ {
    move |e| AppError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Time-series CSV. Row `i` uses seed `master_seed + i`.
pub fn cmd_trajectory(prep: &Prepared) -> AppResult<PathBuf> {
    let cfg = &prep.config;
    let traj = cfg
        .trajectory
        .as_ref()
        .ok_or_else(|| AppError::validation("trajectory", "missing trajectory section"))?;
    if cfg.protocol == ProtocolKind::Trotter {
        return Err(AppError::validation("protocol", "trajectory needs tepai or qdrift"));
    }
    let dir = output_dir(prep);
    create_dir(&dir)?;
    let path = dir.join("trajectory.csv");
    let mut w = csv_writer(&path)?;
    let err = csv_err(&path);
    let mut cols: Vec<String> = ["T", "mean", "std_error", "overhead", "mean_nu"].map(String::from).into();
    for n in &traj.reference_steps {
        cols.push(format!("trotter_{n}_mean"));
        cols.push(format!("trotter_{n}_std_error"));
    }
    if traj.exact {
        cols.push("exact".into());
    }
    w.write_record(&cols).map_err(&err)?;
    let pool = build_pool(workers(prep))?;
    let initial = prep.initial.prepare(prep.n_qubits(), prep.statevector_limit)?;
    let ref_noise = if traj.noisy_reference { prep.noise } else { NoiseModel::disabled() };
    for (i, &t) in traj.times.iter().enumerate() {
        let seed = cfg.master_seed.wrapping_add(i as u64);
        let s = estimate(prep, cfg.protocol, t, seed, &pool)?;
        let mut row = vec![t.to_string(), cell(s.mean), cell(s.std_error), s.overhead.to_string(), cell(s.mean_nu)];
        for &n in &traj.reference_steps {
            let template = TrotterTemplate::new(&prep.hamiltonian, t, n)?;
            let plans = Plans {
                kind: ProtocolKind::Trotter,
                template,
                tepai: None,
                qdrift: None,
            };
            let mut exp = experiment(prep, &plans, &initial, ref_noise, seed);
            exp.mode = EstimatorMode::PerCircuitExpectation;
            let shots = if ref_noise.is_active() { cfg.shots } else { 1 };
            let r = execute(&pool, &exp, shots, None)?.values.result(exp.mode);
            row.push(cell(opt(r.mean)));
            row.push(cell(opt(r.std_error)));
        }
        if traj.exact {
            let psi = exact_evolution(&prep.hamiltonian, t, &initial, EXACT_START_STEPS)?;
            row.push(psi.expectation(&prep.observable)?.to_string());
        }
        w.write_record(&row).map_err(&err)?;
    }
    w.flush().map_err(|e| AppError::io(&path, e))?;
    Ok(path.clone())
}

/// Analytic columns for each swept value, plus empirical gate-count
/// moments over `draws` sampled circuits.
pub fn cmd_sweep(prep: &Prepared) -> AppResult<PathBuf> {
    let cfg = &prep.config;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| AppError::validation("sweep", "missing sweep section"))?;
    let dir = output_dir(prep);
    create_dir(&dir)?;
    let path = dir.join("sweep.csv");
    let mut w = csv_writer(&path)?;
    let err = csv_err(&path);
    let mut cols = vec![
        "T", "delta", "N", "c_norm_avg", "nu_inf", "overhead_asymptotic", "shots_bound", "nu_expected", "nu_variance",
        "overhead",
    ];
    if sweep.draws > 0 {
        cols.extend(["nu_empirical_mean", "nu_empirical_var"]);
    }
    w.write_record(&cols).map_err(&err)?;
    let pool = build_pool(workers(prep))?;
    for (i, v) in sweep.values.iter().enumerate() {
        let field = format!("sweep.values[{i}]");
        let (mut time, mut delta, mut steps) = (cfg.time, prep.delta, cfg.steps);
        match sweep.axis {
            SweepAxis::Time => time = number(v, &field)?,
            SweepAxis::Delta => delta = Some(v.radians().map_err(|m| AppError::validation(&field, m))?),
            SweepAxis::N => {
                let x = number(v, &field)?;
                if !(x >= 1.0 && x.fract() == 0.0) {
                    return Err(AppError::validation(field, "N must be a positive integer"));
                }
                steps = x as usize;
            }
        }
        if !(time >= 0.0) {
            return Err(AppError::validation(field, "T must be non-negative"));
        }
        let d = delta.ok_or_else(|| AppError::validation("delta", "sweeps need delta or Q"))?;
        let c_norm = if time > 0.0 { prep.hamiltonian.l1_norm_avg(time)? } else { 0.0 };
        let ct = c_norm * time;
        let asym = overhead_asymptotic(ct, d).map_err(|e| AppError::validation(&field, e.to_string()))?;
        let template = TrotterTemplate::new(&prep.hamiltonian, time, steps)?;
        let stats = template_statistics(template, d).map_err(|e| AppError::validation(&field, e.to_string()))?;
        let overhead = stats.log_overhead.exp();
        let mut row = vec![
            time.to_string(),
            d.to_string(),
            steps.to_string(),
            c_norm.to_string(),
            nu_infinity(ct, d)?.to_string(),
            asym.to_string(),
            shots_bound(asym, cfg.precision)?.to_string(),
            stats.nu_mean.to_string(),
            stats.nu_var.to_string(),
            overhead.to_string(),
        ];
        if sweep.draws > 0 {
            let plan = SamplingPlan::new(template, d)?;
            let acc = gate_count_moments(&pool, &plan, cfg.master_seed.wrapping_add(i as u64), sweep.draws);
            row.push(acc.mean.to_string());
            row.push(acc.variance().to_string());
        }
        w.write_record(&row).map_err(&err)?;
    }
    w.flush().map_err(|e| AppError::io(&path, e))?;
    Ok(path.clone())
}

fn number(v: &AngleSpec, field: &str) -> AppResult<f64> {
    match v {
        AngleSpec::Radians(x) => Ok(*x),
        AngleSpec::Text(s) => s
            .trim()
            .parse()
            .map_err(|_| AppError::validation(field, format!("`{s}` is not a number"))),
    }
}

/// Gate-count mean and variance over `draws` circuits, block-merged.
pub fn gate_count_moments(pool: &rayon::ThreadPool, plan: &SamplingPlan<'_>, seed: u64, draws: u64) -> Accumulator {
    let blocks: Vec<Accumulator> = pool.install(|| {
        (0..block_count(draws))
            .into_par_iter()
            .map_init(tepai_core::SampledCircuit::default, |c, b| {
                let mut acc = Accumulator::default();
                for i in block_range(b, draws) {
                    plan.sample_into(tepai_core::rng::derive_seed(seed, tepai_core::rng::Domain::Circuit, i), c);
                    acc.push(c.nu() as f64);
                }
                acc
            })
            .collect()
    });
    let mut total = Accumulator::default();
    blocks.iter().for_each(|a| total.merge(a));
    total
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactReport {
    #[serde(rename = "T")]
    pub time: f64,
    pub observable: String,
    pub n_qubits: usize,
    pub expectation: f64,
}

pub fn cmd_exact(prep: &Prepared) -> AppResult<ExactReport> {
    let initial = prep.initial.prepare(prep.n_qubits(), prep.statevector_limit)?;
    let psi = exact_evolution(&prep.hamiltonian, prep.config.time, &initial, EXACT_START_STEPS)?;
    let report = ExactReport {
        time: prep.config.time,
        observable: prep.observable.to_string(),
        n_qubits: prep.n_qubits(),
        expectation: psi.expectation(&prep.observable)?,
    };
    if let Some(dir) = &prep.config.output {
        create_dir(dir)?;
        write_json(&dir.join("exact.json"), &report)?;
    }
    Ok(report)
}

/// Published Trotter-row total for the default costing, shown next to ours.
pub const TROTTER_REFERENCE_T_GATES: u64 = 356_000_000;

#[derive(Debug, Clone, Serialize)]
struct FtRow {
    method: &'static str,
    t_gates: u64,
    t_per_rotation: f64,
    t_per_nu_inf: f64,
    storage_qubits: Option<u64>,
    ancilla_qubits: Option<u64>,
    rounds: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_t_gates: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct FtJson {
    c_norm_avg: f64,
    #[serde(rename = "T")]
    time: f64,
    delta: f64,
    l0: u32,
    nu_inf: f64,
    rotations: u64,
    tower_t_per_round: u64,
    rows: Vec<FtRow>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FtOptions {
    pub params: Table1Params,
    /// Overrides `params.delta` with `pi 2^(1 - l0)`.
    pub l0: Option<u32>,
}

fn is_default_trotter(p: &Table1Params) -> bool {
    let d = Table1Params::default();
    p.trotter_steps == d.trotter_steps && p.n_terms == d.n_terms && p.eps_trotter == d.eps_trotter
}

fn trotter_note(p: &Table1Params, t: &Table1) -> Option<String> {
    let row = &t.rows[0];
    is_default_trotter(p).then(|| {
        format!(
            "{} rotations x {} T each = {}; the reference total {} implies {} T per rotation",
            row.rotations,
            row.t_per_rotation,
            row.t_gates,
            TROTTER_REFERENCE_T_GATES,
            TROTTER_REFERENCE_T_GATES / row.rotations
        )
    })
}

pub fn ftcost_table(opts: FtOptions) -> AppResult<Table1> {
    let mut p = opts.params;
    if let Some(l0) = opts.l0 {
        if !(4..=40).contains(&l0) {
            return Err(AppError::validation("l0", "must lie in 4..=40"));
        }
        p.delta = hierarchy_angle(l0);
    }
    ftcost::table1(p).map_err(|e| match e {
        tepai_core::Error::NotHierarchyAngle { .. } => AppError::validation("delta", e.to_string()),
        tepai_core::Error::InvalidParameter(m) => AppError::validation("l0", m),
        e => e.into(),
    })
}

pub fn ftcost_json(t: &Table1) -> AppResult<String> {
    let layout = ftcost::catalyst_tower_layout(t.l0)?;
    let rows = t
        .rows
        .iter()
        .map(|r| {
            let trotter = r.method == Method::TrotterDirect;
            FtRow {
                method: r.method.name(),
                t_gates: r.t_gates,
                t_per_rotation: r.t_per_rotation,
                t_per_nu_inf: r.t_gates as f64 / t.nu_inf,
                storage_qubits: r.storage_qubits,
                ancilla_qubits: r.ancilla_qubits,
                rounds: r.rounds,
                reference_t_gates: (trotter && is_default_trotter(&t.params)).then_some(TROTTER_REFERENCE_T_GATES),
                note: if trotter { trotter_note(&t.params, t) } else { None },
            }
        })
        .collect();
    let doc = FtJson {
        c_norm_avg: t.params.c_norm_avg,
        time: t.params.time,
        delta: t.params.delta,
        l0: t.l0,
        nu_inf: t.nu_inf,
        rotations: t.k,
        tower_t_per_round: layout.t_per_round,
        rows,
    };
    serde_json::to_string_pretty(&doc).map_err(|e| AppError::Format {
        path: "stdout".into(),
        message: e.to_string(),
    })
}

fn dash(x: Option<u64>) -> String {
    x.map_or_else(|| "-".into(), |v| v.to_string())
}

pub fn ftcost_text(t: &Table1) -> String {
    let mut s = format!(
        "nu_inf = {:.1} (K = {}), delta = pi/{}, l0 = {}\n\n",
        t.nu_inf,
        t.k,
        (std::f64::consts::PI / t.params.delta).round(),
        t.l0
    );
    s.push_str(&format!(
        "{:<18} {:>14} {:>10} {:>9} {:>8} {:>8}\n",
        "method", "T gates", "T/rot", "T/nu_inf", "storage", "ancilla"
    ));
    for r in &t.rows {
        s.push_str(&format!(
            "{:<18} {:>14} {:>10.3} {:>9.3} {:>8} {:>8}\n",
            r.method.name(),
            r.t_gates,
            r.t_per_rotation,
            r.t_gates as f64 / t.nu_inf,
            dash(r.storage_qubits),
            dash(r.ancilla_qubits)
        ));
    }
    if let Some(n) = trotter_note(&t.params, t) {
        s.push_str(&format!("\ntrotter_direct: {n}\n"));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub shots: u64,
    pub summary_matches: bool,
    pub value_mismatches: Vec<u64>,
    pub recomputed: Summary,
}

impl AuditReport {
    pub fn ok(&self) -> bool {
        self.summary_matches && self.value_mismatches.is_empty()
    }
}

#[derive(Deserialize)]
struct ShotIn {
    index: u64,
    sign: i8,
    nu: usize,
    outcome: f64,
    value: f64,
}

/// Recomputes a run's summary from its header and shot log.
pub fn cmd_audit(dir: &Path) -> AppResult<AuditReport> {
    let head: Header = read_json(&dir.join(HEADER_FILE))?;
    let summary: Summary = read_json(&dir.join(SUMMARY_FILE))?;
    let path = dir.join(SHOTS_FILE);
    let file = File::open(&path).map_err(|e| AppError::io(&path, e))?;
    let mode = EstimatorMode::from_name(&summary.mode).ok_or_else(|| AppError::Format {
        path: dir.join(SUMMARY_FILE).display().to_string(),
        message: format!("unknown mode {}", summary.mode),
    })?;
    let mut total = Totals::default();
    let mut block = Totals::default();
    let mut mismatches = Vec::new();
    let mut count = 0u64;
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| AppError::io(&path, e))?;
        let shot: ShotIn = serde_json::from_str(&line).map_err(|e| AppError::Format {
            path: format!("{}:{}", path.display(), n + 1),
            message: e.to_string(),
        })?;
        if shot.index != count {
            return Err(AppError::Format {
                path: format!("{}:{}", path.display(), n + 1),
                message: format!("expected shot {count}, found {}", shot.index),
            });
        }
        if head.overhead * shot.sign as f64 * shot.outcome != shot.value {
            mismatches.push(shot.index);
        }
        block.values.push(shot.value);
        block.nu.push(shot.nu as f64);
        count += 1;
        if count % BLOCK_SHOTS == 0 {
            total.merge(&block);
            block = Totals::default();
        }
    }
    total.merge(&block);
    let recomputed = summary_from(&total, &summary.protocol, mode, head.overhead, head.delta, head.config.master_seed);
    Ok(AuditReport {
        shots: count,
        summary_matches: recomputed == summary,
        value_mismatches: mismatches,
        recomputed,
    })
}
