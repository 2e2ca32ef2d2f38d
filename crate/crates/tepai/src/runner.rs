//! Parallel shot execution with deterministic, block-ordered merging.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use tepai_core::simulator::{block_count, block_range, Accumulator, Experiment};
use tepai_core::{Hamiltonian, SampledCircuit};

use crate::error::{AppError, AppResult};

/// Blocks handed to the pool per wave, per worker. Bounds the buffered log.
const BLOCKS_PER_WORKER: u64 = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Totals {
    pub values: Accumulator,
    pub nu: Accumulator,
}

impl Totals {
    pub fn merge(&mut self, other: &Totals) {
        self.values.merge(&other.values);
        self.nu.merge(&other.nu);
    }
}

#[derive(Serialize)]
struct GateLine {
    pauli: String,
    angle: String,
    step: u32,
}

#[derive(Serialize)]
struct ShotLine {
    index: u64,
    draw_seed: u64,
    sign: i8,
    nu: usize,
    outcome: f64,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gates: Option<Vec<GateLine>>,
}

/// Where per-shot records go, if anywhere.
pub struct ShotLog<'a> {
    pub out: &'a mut dyn Write,
    pub gates: bool,
}

pub fn build_pool(workers: usize) -> AppResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| AppError::validation("workers", e.to_string()))
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

struct BlockOut {
    totals: Totals,
    lines: Vec<u8>,
}

fn run_block(
    exp: &Experiment<'_, '_>,
    h: &Hamiltonian,
    block: u64,
    shots: u64,
    w: &mut tepai_core::simulator::Worker,
    log: Option<bool>,
) -> AppResult<BlockOut> {
    let mut nu = Accumulator::default();
    let mut lines = Vec::new();
    let mut write_err = None;
    let values = exp.run_range(block_range(block, shots), w, |rec, c: &SampledCircuit| {
        nu.push(rec.nu as f64);
        if let Some(gates) = log {
            let line = ShotLine {
                index: rec.index,
                draw_seed: rec.draw_seed,
                sign: rec.sign,
                nu: rec.nu,
                outcome: rec.outcome,
                value: rec.value,
                gates: gates.then(|| {
                    c.gates
                        .iter()
                        .map(|g| GateLine {
                            pauli: g.generator(h).to_string(),
                            angle: g.angle.label(),
                            step: g.step,
                        })
                        .collect()
                }),
            };
            if let Err(e) = serde_json::to_writer(&mut lines, &line) {
                write_err.get_or_insert(e);
            }
            lines.push(b'\n');
        }
    })?;
    if let Some(e) = write_err {
        return Err(AppError::Format {
            path: "shots.jsonl".into(),
            message: e.to_string(),
        });
    }
    Ok(BlockOut {
        totals: Totals { values, nu },
        lines,
    })
}

/// Runs `shots` shots on `pool`. Blocks are merged, and their log lines
/// written, strictly in block order.
pub fn execute(
    pool: &rayon::ThreadPool,
    exp: &Experiment<'_, '_>,
    shots: u64,
    mut log: Option<ShotLog<'_>>,
) -> AppResult<Totals> {
    exp.validate()?;
    let h = exp.protocol.hamiltonian();
    let blocks = block_count(shots);
    let wave = pool.current_num_threads() as u64 * BLOCKS_PER_WORKER;
    let mode = log.as_ref().map(|l| l.gates);
    let mut total = Totals::default();
    let mut start = 0;
    while start < blocks {
        let end = (start + wave).min(blocks);
        let outs: Vec<AppResult<BlockOut>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map_init(|| exp.worker(), |w, b| run_block(exp, h, b, shots, w, mode))
                .collect()
        });
        for out in outs {
            let out = out?;
            total.merge(&out.totals);
            if let Some(l) = log.as_mut() {
                l.out
                    .write_all(&out.lines)
                    .map_err(|e| AppError::io("shots.jsonl", e))?;
            }
        }
        start = end;
    }
    Ok(total)
}
