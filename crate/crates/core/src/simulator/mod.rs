//! Statevector execution, noise trajectories and the exact oracle.

mod estimator;
mod exact;
mod noise;
mod statevector;

pub use estimator::{
    block_count, block_range, run_estimator, run_trotter_reference, Accumulator, EstimatorMode,
    EstimatorResult, Experiment, Protocol, ShotRecord, Worker, BLOCK_SHOTS,
};
pub use exact::{cfet4_evolve, exact_evolution, taylor_evolve, ExactPropagator, EXACT_TOLERANCE};
pub use noise::{apply_noise_trajectory, NoiseModel};
pub use statevector::{InitialState, StateVector, DEFAULT_STATEVECTOR_LIMIT};
