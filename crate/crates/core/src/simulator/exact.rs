use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // float methods when std is absent
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::DEFAULT_DENSE_LIMIT;
use super::StateVector;

/// Converged when successive step doublings move the state less than this.
pub const EXACT_TOLERANCE: f64 = 1e-8;
const MAX_STEPS: usize = 1 << 22;
/// Above this size constant Hamiltonians skip the dense eigensolver.
const SPECTRAL_LIMIT: usize = 8;

/// Spectral propagator `exp(-i H t)` of a time-independent Hamiltonian,
/// reusable across many `t`.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl ExactPropagator {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        if !h.is_time_independent() {
            return Err(Error::TimeDependentUnsupported);
        }
        let dense = h.to_dense_at(0.0)?;
        let eig = dense.symmetric_eigen();
        Ok(ExactPropagator {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        let dim = self.eigenvalues.len();
        if psi.amplitudes().len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim.trailing_zeros() as usize,
                found: psi.n_qubits(),
            });
        }
        let v = DVector::from_column_slice(psi.amplitudes());
        let mut coeffs = self.eigenvectors.adjoint() * v;
        for (c, &e) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        let out = &self.eigenvectors * coeffs;
        StateVector::from_amplitudes(out.iter().cloned().collect())
    }
}

struct SparseTerm {
    x: usize,
    z: usize,
    phase: Complex64,
}

fn sparse_terms(h: &Hamiltonian) -> Vec<SparseTerm> {
    h.terms()
        .iter()
        .map(|t| {
            let (x, z) = t.pauli.masks().expect("size checked against dense limit");
            let phase = match t.pauli.y_count() % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
            SparseTerm {
                x: x as usize,
                z: z as usize,
                phase,
            }
        })
        .collect()
}

/// `dst = scale * (sum_k w_k P_k) src`.
fn apply_sum(terms: &[SparseTerm], w: &[f64], scale: Complex64, src: &[Complex64], dst: &mut [Complex64]) {
    dst.iter_mut().for_each(|d| *d = Complex64::new(0.0, 0.0));
    for (t, &wk) in terms.iter().zip(w) {
        if wk == 0.0 {
            continue;
        }
        let f = scale * t.phase * wk;
        for (b, &a) in src.iter().enumerate() {
            let s = if (b & t.z).count_ones() & 1 == 1 { -f } else { f };
            dst[b ^ t.x] += s * a;
        }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `psi <- exp(-i h M) psi` for `M = sum_k w_k P_k`, by Taylor series on
/// sub-steps with `|h| ||w||_1 <= 1`.
fn expm_apply(terms: &[SparseTerm], w: &[f64], h: f64, psi: &mut [Complex64], buf: &mut [Vec<Complex64>; 2]) {
    let l1: f64 = w.iter().map(|x| x.abs()).sum();
    let sub = ((h.abs() * l1).ceil() as usize).max(1);
    let hs = h / sub as f64;
    for _ in 0..sub {
        buf[0].copy_from_slice(psi);
        for m in 1..64 {
            let (a, b) = buf.split_at_mut(1);
            apply_sum(terms, w, Complex64::new(0.0, -hs / m as f64), &a[0], &mut b[0]);
            buf.swap(0, 1);
            for (p, t) in psi.iter_mut().zip(buf[0].iter()) {
                *p += *t;
            }
            if norm(&buf[0]) < 1e-17 {
                break;
            }
        }
    }
}

/// `exp(-i H T) psi` for constant `H` via the sparse Taylor propagator.
pub fn taylor_evolve(h: &Hamiltonian, time: f64, initial: &StateVector) -> Result<StateVector> {
    let w = h.constant_coefficients()?;
    let terms = sparse_terms(h);
    let dim = initial.amplitudes().len();
    let mut psi = initial.amplitudes().to_vec();
    let mut buf = [vec![Complex64::new(0.0, 0.0); dim], vec![Complex64::new(0.0, 0.0); dim]];
    expm_apply(&terms, &w, time, &mut psi, &mut buf);
    StateVector::from_amplitudes(psi)
}

const SQRT3_6: f64 = 0.288_675_134_594_812_9; // sqrt(3)/6

/// Fourth-order commutator-free integration with a fixed step count.
pub fn cfet4_evolve(h: &Hamiltonian, time: f64, initial: &StateVector, steps: usize) -> Result<StateVector> {
    let terms = sparse_terms(h);
    let dim = initial.amplitudes().len();
    let mut psi = initial.amplitudes().to_vec();
    let mut buf = [vec![Complex64::new(0.0, 0.0); dim], vec![Complex64::new(0.0, 0.0); dim]];
    let dt = time / steps as f64;
    let (c1, c2) = (0.5 - SQRT3_6, 0.5 + SQRT3_6);
    let (a1, a2) = (0.25 - SQRT3_6, 0.25 + SQRT3_6);
    let mut w = vec![0.0; terms.len()];
    for s in 0..steps {
        let t0 = s as f64 * dt;
        let h1 = h.coefficients_at(t0 + c1 * dt);
        let h2 = h.coefficients_at(t0 + c2 * dt);
        // early-weighted factor first
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = a2 * h1[k] + a1 * h2[k];
        }
        expm_apply(&terms, &w, dt, &mut psi, &mut buf);
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = a1 * h1[k] + a2 * h2[k];
        }
        expm_apply(&terms, &w, dt, &mut psi, &mut buf);
    }
    StateVector::from_amplitudes(psi)
}

/// `psi(T)` under `H`. Constant Hamiltonians use the spectral propagator;
/// time-dependent ones double `steps` until the state moves by less than
/// [`EXACT_TOLERANCE`].
pub fn exact_evolution(h: &Hamiltonian, time: f64, initial: &StateVector, steps: usize) -> Result<StateVector> {
    let n = h.n_qubits();
    if n > DEFAULT_DENSE_LIMIT {
        return Err(Error::DenseLimit {
            n,
            limit: DEFAULT_DENSE_LIMIT,
        });
    }
    if initial.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: initial.n_qubits(),
        });
    }
    if h.is_time_independent() {
        if n > SPECTRAL_LIMIT {
            return taylor_evolve(h, time, initial);
        }
        return ExactPropagator::new(h)?.evolve(initial, time);
    }
    let mut steps = steps.max(1);
    let mut prev = cfet4_evolve(h, time, initial, steps)?;
    while steps < MAX_STEPS {
        steps *= 2;
        let next = cfet4_evolve(h, time, initial, steps)?;
        if next.distance(&prev) < EXACT_TOLERANCE {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Numerical(format!(
        "time-ordered integration did not reach {EXACT_TOLERANCE} within {MAX_STEPS} steps"
    )))
}
