//! Randomized fixed-angle time evolution: Pauli algebra, product-formula
//! templates, the angle-interpolation sampler, closed-form analytics, a
//! statevector simulator and fault-tolerant cost models.
//!
//! The crate is `no_std` with `alloc`; file IO and the command line live in
//! the companion `tepai` crate.

#![no_std]

extern crate alloc;

pub mod analytics;
pub mod error;
pub mod ftcost;
pub mod hamiltonian;
pub mod pai;
pub mod pauli;
pub mod quadrature;
pub mod rng;
pub mod simulator;
pub mod trotter;

pub use error::{Error, Result};
pub use hamiltonian::{CoefficientSchedule, CommutatorMethod, Hamiltonian, Term};
pub use pai::{GammaWeights, GateAngle, SampledCircuit, SampledGate, SamplingPlan};
pub use pauli::{Axis, PauliString};
pub use simulator::{InitialState, StateVector};
pub use trotter::TrotterTemplate;
