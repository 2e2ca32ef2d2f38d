use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tepai::commands::{self, FtOptions};
use tepai::config::{AngleSpec, ProtocolKind, SweepAxis, SweepConfig, TrajectoryConfig};
use tepai::{AppError, AppResult, Prepared, RunConfig};
use tepai_core::ftcost::Table1Params;

#[derive(Parser)]
#[command(name = "tepai", version, about = "Randomized fixed-angle time evolution: sampling, simulation and cost estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    shots: Option<u64>,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Trotter steps N.
    #[arg(long)]
    steps: Option<usize>,
    /// Total time T.
    #[arg(long)]
    time: Option<f64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        if let Some(s) = self.shots {
            cfg.shots = s;
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        if let Some(n) = self.steps {
            cfg.steps = n;
        }
        if let Some(t) = self.time {
            cfg.time = t;
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured protocol and write header, shot log and summary.
    Run {
        config: PathBuf,
        #[command(flatten)]
        o: Overrides,
    },
    /// As `run`, with the qDRIFT baseline.
    Qdrift {
        config: PathBuf,
        #[command(flatten)]
        o: Overrides,
    },
    /// One CSV row of predictions per swept value.
    Sweep {
        config: PathBuf,
        /// T, delta or N; replaces the config's sweep section.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated values, e.g. `pi/2,pi/4`.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<String>>,
        /// Sampled circuits per row for empirical gate counts.
        #[arg(long)]
        draws: Option<u64>,
        #[command(flatten)]
        o: Overrides,
    },
    /// Estimates over a grid of times, with optional references.
    Trajectory {
        config: PathBuf,
        /// Comma-separated times; replaces the config's grid.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        #[command(flatten)]
        o: Overrides,
    },
    /// Fault-tolerant T-gate costs of the four compilation methods.
    Ftcost(FtArgs),
    /// Exact expectation value for small registers.
    Exact {
        config: PathBuf,
        #[command(flatten)]
        o: Overrides,
    },
    /// Recompute a run directory's summary from its shot log.
    Audit { dir: PathBuf },
}

#[derive(Args)]
struct FtArgs {
    #[arg(long)]
    c_norm_avg: Option<f64>,
    #[arg(long)]
    time: Option<f64>,
    /// Must be pi 2^(1-l) for some level l, e.g. `pi/256`.
    #[arg(long)]
    delta: Option<String>,
    /// Hierarchy level of delta; overrides --delta.
    #[arg(long)]
    l0: Option<u32>,
    #[arg(long)]
    trotter_steps: Option<u64>,
    #[arg(long)]
    terms: Option<u64>,
    #[arg(long)]
    eps_pai: Option<f64>,
    #[arg(long)]
    eps_trotter: Option<f64>,
    /// Print JSON instead of the aligned table.
    #[arg(long)]
    json: bool,
}

fn prepare(path: &Path, o: &Overrides) -> AppResult<Prepared> {
    let mut cfg = RunConfig::load(path)?;
    o.apply(&mut cfg);
    Prepared::new(cfg)
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn run(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Run { config, o } => {
            let prep = prepare(&config, &o)?;
            let kind = prep.config.protocol;
            report_run(commands::cmd_run(&prep, kind)?);
        }
        Command::Qdrift { config, o } => {
            let prep = prepare(&config, &o)?;
            report_run(commands::cmd_run(&prep, ProtocolKind::Qdrift)?);
        }
        Command::Sweep {
            config,
            axis,
            values,
            draws,
            o,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            o.apply(&mut cfg);
            if axis.is_some() || values.is_some() {
                let axis = match axis.as_deref() {
                    Some("T") | Some("t") => SweepAxis::Time,
                    Some("delta") => SweepAxis::Delta,
                    Some("N") | Some("n") => SweepAxis::N,
                    Some(other) => return Err(AppError::validation("axis", format!("`{other}` is not T, delta or N"))),
                    None => cfg
                        .sweep
                        .as_ref()
                        .map(|s| s.axis)
                        .ok_or_else(|| AppError::validation("axis", "required"))?,
                };
                cfg.sweep = Some(SweepConfig {
                    axis,
                    values: values
                        .unwrap_or_default()
                        .into_iter()
                        .filter(|v| !v.trim().is_empty())
                        .map(AngleSpec::Text)
                        .collect(),
                    draws: draws.or(cfg.sweep.as_ref().map(|s| s.draws)).unwrap_or(0),
                });
            } else if let (Some(d), Some(s)) = (draws, cfg.sweep.as_mut()) {
                s.draws = d;
            }
            let path = commands::cmd_sweep(&Prepared::new(cfg)?)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Trajectory { config, times, o } => {
            let mut cfg = RunConfig::load(&config)?;
            o.apply(&mut cfg);
            if let Some(times) = times {
                match cfg.trajectory.as_mut() {
                    Some(t) => t.times = times,
                    None => {
                        cfg.trajectory = Some(TrajectoryConfig {
                            times,
                            reference_steps: Vec::new(),
                            noisy_reference: true,
                            exact: false,
                        })
                    }
                }
            }
            let path = commands::cmd_trajectory(&Prepared::new(cfg)?)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Ftcost(a) => {
            let d = Table1Params::default();
            let delta = match &a.delta {
                Some(s) => tepai::config::parse_angle(s).map_err(|m| AppError::validation("delta", m))?,
                None => d.delta,
            };
            let params = Table1Params {
                c_norm_avg: a.c_norm_avg.unwrap_or(d.c_norm_avg),
                time: a.time.unwrap_or(d.time),
                delta,
                trotter_steps: a.trotter_steps.unwrap_or(d.trotter_steps),
                n_terms: a.terms.unwrap_or(d.n_terms),
                eps_pai: a.eps_pai.unwrap_or(d.eps_pai),
                eps_trotter: a.eps_trotter.unwrap_or(d.eps_trotter),
            };
            let table = commands::ftcost_table(FtOptions { params, l0: a.l0 })?;
            if a.json {
                println!("{}", commands::ftcost_json(&table)?);
            } else {
                print!("{}", commands::ftcost_text(&table));
            }
        }
        Command::Exact { config, o } => {
            let prep = prepare(&config, &o)?;
            print_json(&commands::cmd_exact(&prep)?);
        }
        Command::Audit { dir } => {
            let report = commands::cmd_audit(&dir)?;
            print_json(&report);
            if !report.ok() {
                return Err(AppError::Audit(format!(
                    "{} value mismatches, summary {}",
                    report.value_mismatches.len(),
                    if report.summary_matches { "matches" } else { "differs" }
                )));
            }
        }
    }
    Ok(())
}

fn report_run(summary: Option<commands::Summary>) {
    match summary {
        Some(s) => print_json(&s),
        None => eprintln!("no shots requested; wrote header only"),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
