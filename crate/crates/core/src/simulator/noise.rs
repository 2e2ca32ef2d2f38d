use alloc::format;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::rng;
use super::StateVector;

/// Depolarising noise after every gate, on the gate's support.
///
/// Weight-1 gates use `p1`; every heavier gate uses `p2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub enabled: bool,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for (name, p) in [("p1", p1), ("p2", p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("{name} = {p} must lie in [0, 1]")));
            }
        }
        Ok(NoiseModel {
            p1,
            p2,
            enabled: true,
        })
    }

    pub fn disabled() -> Self {
        NoiseModel::default()
    }

    pub fn is_active(&self) -> bool {
        self.enabled && (self.p1 > 0.0 || self.p2 > 0.0)
    }

    pub fn probability(&self, weight: usize) -> f64 {
        match weight {
            0 => 0.0,
            1 => self.p1,
            _ => self.p2,
        }
    }
}

/// With the model's probability, applies a uniformly chosen non-identity
/// Pauli on the support of `gate`. Returns whether an error was inserted.
pub fn apply_noise_trajectory(
    state: &mut StateVector,
    gate: &PauliString,
    noise: &NoiseModel,
    stream: &mut ChaCha8Rng,
) -> Result<bool> {
    if !noise.enabled {
        return Ok(false);
    }
    let w = gate.weight();
    let p = noise.probability(w);
    if p <= 0.0 || rng::next_unit(stream) >= p {
        return Ok(false);
    }
    // 4^w - 1 choices, base-4 digits pick I/X/Y/Z per support qubit
    let choices = (1u64 << (2 * w)) - 1;
    let mut r = 1 + (rng::next_unit(stream) * choices as f64) as u64;
    r = r.min(choices);
    let factors = gate.support().into_iter().filter_map(|q| {
        let d = r & 3;
        r >>= 2;
        match d {
            1 => Some((q, crate::pauli::Axis::X)),
            2 => Some((q, crate::pauli::Axis::Y)),
            3 => Some((q, crate::pauli::Axis::Z)),
            _ => None,
        }
    });
    let err = PauliString::from_factors(gate.n_qubits(), factors.collect::<alloc::vec::Vec<_>>())?;
    state.apply_pauli(&err)?;
    Ok(true)
}
