use alloc::vec::Vec;
use core::ops::Range;

#[allow(unused_imports)] // float methods when std is absent
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pai::{GateAngle, QDriftPlan, SampledCircuit, SamplingPlan};
use crate::pauli::PauliString;
use crate::rng::{self, Domain};
use crate::trotter::TrotterTemplate;

use super::noise::{apply_noise_trajectory, NoiseModel};
use super::StateVector;

/// Shots per accumulation block. Blocks are the unit of parallel work and
/// are merged in index order, so results do not depend on the worker count.
pub const BLOCK_SHOTS: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorMode {
    /// One `+-1` eigenvalue sample per circuit.
    SampledShot,
    /// The exact `<O>` of each sampled circuit.
    PerCircuitExpectation,
}

impl EstimatorMode {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorMode::SampledShot => "sampled_shot",
            EstimatorMode::PerCircuitExpectation => "per_circuit_expectation",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "sampled_shot" => Some(EstimatorMode::SampledShot),
            "per_circuit_expectation" => Some(EstimatorMode::PerCircuitExpectation),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorResult {
    /// NaN when no shots were taken.
    pub mean: f64,
    /// Sample standard deviation over `sqrt(shots)`.
    pub std_error: f64,
    pub shots: u64,
    pub mode: EstimatorMode,
}

/// Streaming count / mean / centred second moment.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Accumulator {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Appends `other` as if its samples followed ours.
    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn result(&self, mode: EstimatorMode) -> EstimatorResult {
        let (mean, std_error) = if self.count == 0 {
            (f64::NAN, f64::NAN)
        } else {
            (self.mean, (self.variance() / self.count as f64).sqrt())
        };
        EstimatorResult {
            mean,
            std_error,
            shots: self.count,
            mode,
        }
    }
}

pub fn block_count(shots: u64) -> u64 {
    shots.div_ceil(BLOCK_SHOTS)
}

pub fn block_range(block: u64, shots: u64) -> Range<u64> {
    let start = block * BLOCK_SHOTS;
    start..(start + BLOCK_SHOTS).min(shots)
}

/// Which circuits a run executes.
#[derive(Debug, Clone, Copy)]
pub enum Protocol<'a, 'h> {
    TePai(&'a SamplingPlan<'h>),
    QDrift(&'a QDriftPlan<'h>),
    /// The continuous-angle template itself.
    Trotter(TrotterTemplate<'h>),
}

impl<'a, 'h> Protocol<'a, 'h> {
    pub fn hamiltonian(&self) -> &'h Hamiltonian {
        match self {
            Protocol::TePai(p) => p.template().hamiltonian(),
            Protocol::QDrift(p) => p.hamiltonian(),
            Protocol::Trotter(t) => t.hamiltonian(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Protocol::TePai(_) => "tepai",
            Protocol::QDrift(_) => "qdrift",
            Protocol::Trotter(_) => "trotter",
        }
    }
}

/// Per-shot outcome, enough to recompute the estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotRecord {
    pub index: u64,
    pub draw_seed: u64,
    pub sign: i8,
    pub nu: usize,
    /// `+-1` sample or `<O>`, before weighting.
    pub outcome: f64,
    /// `overhead * sign * outcome`.
    pub value: f64,
}

/// Scratch space owned by one worker.
#[derive(Debug, Clone)]
pub struct Worker {
    pub state: StateVector,
    pub circuit: SampledCircuit,
    row: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct Experiment<'a, 'h> {
    pub protocol: Protocol<'a, 'h>,
    pub observable: &'a PauliString,
    pub initial: &'a StateVector,
    pub mode: EstimatorMode,
    pub noise: NoiseModel,
    pub master_seed: u64,
}

impl<'a, 'h> Experiment<'a, 'h> {
    pub fn validate(&self) -> Result<()> {
        let n = self.protocol.hamiltonian().n_qubits();
        for found in [self.observable.n_qubits(), self.initial.n_qubits()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        Ok(())
    }

    pub fn worker(&self) -> Worker {
        Worker {
            state: self.initial.clone(),
            circuit: SampledCircuit::default(),
            row: Vec::new(),
        }
    }

    /// Runs shot `index`; the sampled circuit is left in `worker.circuit`
    /// (empty for the Trotter protocol).
    pub fn run_shot(&self, index: u64, w: &mut Worker) -> Result<ShotRecord> {
        let h = self.protocol.hamiltonian();
        w.state.copy_from(self.initial);
        let mut noise_rng = self
            .noise
            .is_active()
            .then(|| rng::stream(rng::derive_seed(self.master_seed, Domain::Noise, index)));
        let nu;
        match self.protocol {
            Protocol::TePai(plan) => {
                plan.sample_into(
                    rng::derive_seed(self.master_seed, Domain::Circuit, index),
                    &mut w.circuit,
                );
                run_gates(h, &w.circuit, &mut w.state, &self.noise, noise_rng.as_mut())?;
                nu = w.circuit.nu();
            }
            Protocol::QDrift(plan) => {
                w.circuit = plan.sample_indexed(self.master_seed, index);
                run_gates(h, &w.circuit, &mut w.state, &self.noise, noise_rng.as_mut())?;
                nu = w.circuit.nu();
            }
            Protocol::Trotter(t) => {
                w.circuit = SampledCircuit {
                    sign: 1,
                    overhead: 1.0,
                    ..SampledCircuit::default()
                };
                for j in 1..=t.steps() {
                    t.step_angles_into(j, &mut w.row);
                    for (term, &theta) in h.terms().iter().zip(&w.row) {
                        w.state.apply_rotation(&term.pauli, theta)?;
                        if let Some(r) = noise_rng.as_mut() {
                            apply_noise_trajectory(&mut w.state, &term.pauli, &self.noise, r)?;
                        }
                    }
                }
                nu = t.positions();
            }
        }
        let outcome = match self.mode {
            EstimatorMode::PerCircuitExpectation => w.state.expectation(self.observable)?,
            EstimatorMode::SampledShot => {
                let u = rng::uniform_at(rng::derive_seed(self.master_seed, Domain::Shot, index), 0);
                w.state.measure_pauli_destructive(self.observable, u)?
            }
        };
        let weight = w.circuit.weight();
        Ok(ShotRecord {
            index,
            draw_seed: w.circuit.draw_seed,
            sign: w.circuit.sign,
            nu,
            outcome,
            value: weight * outcome,
        })
    }

    /// Serially accumulates shots in `range`, passing each to `sink`.
    pub fn run_range<F>(&self, range: Range<u64>, w: &mut Worker, mut sink: F) -> Result<Accumulator>
    where
        F: FnMut(&ShotRecord, &SampledCircuit),
    {
        let mut acc = Accumulator::default();
        for i in range {
            let rec = self.run_shot(i, w)?;
            if !rec.value.is_finite() {
                return Err(Error::Numerical(alloc::format!("shot {i} produced {}", rec.value)));
            }
            acc.push(rec.value);
            sink(&rec, &w.circuit);
        }
        Ok(acc)
    }

    pub fn run_block(&self, block: u64, shots: u64, w: &mut Worker) -> Result<Accumulator> {
        self.run_range(block_range(block, shots), w, |_, _| {})
    }

    /// Single-threaded run with the same block layout as a parallel one.
    pub fn run_serial(&self, shots: u64) -> Result<EstimatorResult> {
        self.validate()?;
        let mut w = self.worker();
        let mut total = Accumulator::default();
        for b in 0..block_count(shots) {
            total.merge(&self.run_block(b, shots, &mut w)?);
        }
        Ok(total.result(self.mode))
    }
}

fn run_gates(
    h: &Hamiltonian,
    c: &SampledCircuit,
    state: &mut StateVector,
    noise: &NoiseModel,
    mut noise_rng: Option<&mut rand_chacha::ChaCha8Rng>,
) -> Result<()> {
    for g in &c.gates {
        let p = g.generator(h);
        match g.angle {
            GateAngle::Pi => state.apply_pauli(p)?,
            a => state.apply_rotation(p, a.radians(c.delta))?,
        }
        if let Some(r) = noise_rng.as_mut() {
            apply_noise_trajectory(state, p, noise, r)?;
        }
    }
    Ok(())
}

/// TE-PAI estimate of `<O>` after the template's evolution.
#[allow(clippy::too_many_arguments)]
pub fn run_estimator(
    template: TrotterTemplate<'_>,
    delta: f64,
    observable: &PauliString,
    initial: &StateVector,
    shots: u64,
    mode: EstimatorMode,
    noise: NoiseModel,
    seed: u64,
) -> Result<EstimatorResult> {
    let plan = SamplingPlan::new(template, delta)?;
    Experiment {
        protocol: Protocol::TePai(&plan),
        observable,
        initial,
        mode,
        noise,
        master_seed: seed,
    }
    .run_serial(shots)
}

/// The continuous-angle template: one exact pass when noiseless, otherwise
/// `shots` noisy trajectories.
pub fn run_trotter_reference(
    template: TrotterTemplate<'_>,
    observable: &PauliString,
    initial: &StateVector,
    noise: NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<EstimatorResult> {
    let shots = if noise.is_active() { shots } else { 1 };
    Experiment {
        protocol: Protocol::Trotter(template),
        observable,
        initial,
        mode: EstimatorMode::PerCircuitExpectation,
        noise,
        master_seed: seed,
    }
    .run_serial(shots)
}
