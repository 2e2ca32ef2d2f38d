//! First-order product-formula templates and their classical cost.
//!
//! The template rotation angles are `theta_kj = 2 c_k(t_j) T / N` with right
//! endpoints `t_j = j T / N`, `j = 1..=N`, applied step by step (`j` outer,
//! `k` inner).

use alloc::format;
use alloc::vec::Vec;


#[allow(unused_imports)] // float methods when std is absent
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::{CommutatorMethod, Hamiltonian};

/// Lazily evaluated angle schedule of `N` first-order Trotter steps.
#[derive(Debug, Clone, Copy)]
pub struct TrotterTemplate<'h> {
    hamiltonian: &'h Hamiltonian,
    steps: usize,
    time: f64,
}

impl<'h> TrotterTemplate<'h> {
    pub fn new(hamiltonian: &'h Hamiltonian, time: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !(time >= 0.0) || !time.is_finite() {
            return Err(Error::InvalidParameter(format!("T = {time} must be non-negative")));
        }
        Ok(TrotterTemplate {
            hamiltonian,
            steps,
            time,
        })
    }

    pub fn hamiltonian(&self) -> &'h Hamiltonian {
        self.hamiltonian
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn n_terms(&self) -> usize {
        self.hamiltonian.len()
    }

    /// Number of rotation positions `N * L`.
    pub fn positions(&self) -> usize {
        self.steps * self.hamiltonian.len()
    }

    pub fn step_time(&self, j: usize) -> f64 {
        self.time * j as f64 / self.steps as f64
    }

    /// `theta_kj` for step `j` in `1..=N` and term `k` in `0..L`.
    pub fn angle(&self, k: usize, j: usize) -> f64 {
        let dt = self.time / self.steps as f64;
        2.0 * self.hamiltonian.terms()[k].schedule.evaluate(self.step_time(j)) * dt
    }

    /// All `L` angles of step `j` written into `out`.
    pub fn step_angles_into(&self, j: usize, out: &mut Vec<f64>) {
        out.clear();
        let t = self.step_time(j);
        let dt = self.time / self.steps as f64;
        out.extend(
            self.hamiltonian
                .terms()
                .iter()
                .map(|term| 2.0 * term.schedule.evaluate(t) * dt),
        );
    }

    /// Streams `(k, j, theta_kj)` in application order.
    pub fn angles(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let l = self.n_terms();
        (1..=self.steps).flat_map(move |j| (0..l).map(move |k| (k, j, self.angle(k, j))))
    }

    pub fn max_abs_angle(&self) -> f64 {
        if self.hamiltonian.is_time_independent() {
            return (0..self.n_terms())
                .map(|k| self.angle(k, 1).abs())
                .fold(0.0, f64::max);
        }
        self.angles().map(|(_, _, a)| a.abs()).fold(0.0, f64::max)
    }

    /// Materialises all `N * L` angles in application order.
    pub fn dense_angles(&self) -> Vec<f64> {
        self.angles().map(|(_, _, a)| a).collect()
    }
}

/// First-order Trotter error bound for a time-independent Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterErrorBound {
    /// `T^2 / (2N) * ||c||_T^2`
    pub epsilon_t: f64,
    pub steps: usize,
    pub commutator_norm_sq: f64,
    /// `T^2 / (2N) * (||c||_1^2 - ||c||_2^2)`
    pub universal: f64,
}

pub fn trotter_error_bound(
    h: &Hamiltonian,
    time: f64,
    steps: usize,
    method: CommutatorMethod,
) -> Result<TrotterErrorBound> {
    let c = h.constant_coefficients()?;
    if steps == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let norm_sq = h.commutator_norm_sq(0.0, method)?;
    let l1: f64 = c.iter().map(|v| v.abs()).sum();
    let l2: f64 = c.iter().map(|v| v * v).sum();
    let prefactor = time * time / (2.0 * steps as f64);
    Ok(TrotterErrorBound {
        epsilon_t: prefactor * norm_sq,
        steps,
        commutator_norm_sq: norm_sq,
        universal: prefactor * (l1 * l1 - l2),
    })
}

/// `T^2 / (2N) * norm_sq` for a precomputed commutator norm.
pub fn trotter_error_from_norm(time: f64, steps: usize, norm_sq: f64) -> f64 {
    time * time / (2.0 * steps as f64) * norm_sq
}

/// Step count chosen from the l1 norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepChoice {
    pub steps: usize,
    /// Set when the time-averaged norm stood in for `||c||_1` of a
    /// time-dependent Hamiltonian.
    pub heuristic: bool,
}

fn ceil_count(x: f64) -> Result<usize> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Numerical(format!("step count {x} is not finite")));
    }
    // Absorb round-off so that exact integers are not bumped up.
    Ok(((x * (1.0 - 1e-12)).ceil() as usize).max(1))
}

fn check_precision(epsilon: f64, kappa: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
    }
    if !(kappa >= 1.0) {
        return Err(Error::InvalidParameter(format!("kappa = {kappa} must be >= 1")));
    }
    Ok(())
}

/// Smallest `N >= T^2 ||c||_1^2 / (2 epsilon / kappa)`.
pub fn choose_steps(h: &Hamiltonian, time: f64, epsilon: f64, kappa: f64) -> Result<StepChoice> {
    check_precision(epsilon, kappa)?;
    let (l1, heuristic) = match h.constant_l1_norm() {
        Some(l1) => (l1, false),
        None => (h.l1_norm_avg(time)?, true),
    };
    Ok(StepChoice {
        steps: steps_for_l1(l1, time, epsilon, kappa)?,
        heuristic,
    })
}

pub fn steps_for_l1(l1: f64, time: f64, epsilon: f64, kappa: f64) -> Result<usize> {
    check_precision(epsilon, kappa)?;
    ceil_count(time * time * l1 * l1 * kappa / (2.0 * epsilon))
}

/// Smallest `N >= T^2 norm_sq / (2 epsilon / kappa)` from a commutator norm (or bound).
pub fn steps_for_commutator_norm(norm_sq: f64, time: f64, epsilon: f64, kappa: f64) -> Result<usize> {
    check_precision(epsilon, kappa)?;
    ceil_count(time * time * norm_sq * kappa / (2.0 * epsilon))
}

/// `ceil(overhead^2 / epsilon^2)`
pub fn shots_for_precision(overhead: f64, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
    }
    let x = overhead * overhead / (epsilon * epsilon);
    if !x.is_finite() {
        return Err(Error::Numerical("shot count overflow".into()));
    }
    Ok(((x * (1.0 - 1e-12)).ceil() as u64).max(1))
}

/// Classical pre-processing cost `N * L * N_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassicalCost {
    pub steps: usize,
    pub terms: usize,
    pub shots: u64,
    pub samples: u128,
}

pub fn classical_cost(
    h: &Hamiltonian,
    time: f64,
    epsilon: f64,
    kappa: f64,
    overhead: f64,
) -> Result<ClassicalCost> {
    let steps = choose_steps(h, time, epsilon, kappa)?.steps;
    let shots = shots_for_precision(overhead, epsilon)?;
    Ok(classical_cost_from(steps, h.len(), shots))
}

pub fn classical_cost_from(steps: usize, terms: usize, shots: u64) -> ClassicalCost {
    ClassicalCost {
        steps,
        terms,
        shots,
        samples: steps as u128 * terms as u128 * shots as u128,
    }
}
