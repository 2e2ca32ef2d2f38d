use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods when std is absent
use num_traits::Float;

use crate::error::{Error, Result};
use crate::pauli::{Axis, PauliString};

pub const DEFAULT_STATEVECTOR_LIMIT: usize = 24;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Amplitudes over `2^n` basis states; qubit `q` is bit `q` of the index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// Bitstring literal (character `i` is qubit `i`) or `plus_all`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialState {
    PlusAll,
    Bits(String),
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "plus_all" {
            return Ok(InitialState::PlusAll);
        }
        if !s.is_empty() && s.chars().all(|c| c == '0' || c == '1') {
            return Ok(InitialState::Bits(s.into()));
        }
        Err(Error::InvalidParameter(format!(
            "initial state '{s}' must be a 0/1 string or plus_all"
        )))
    }
}

impl core::fmt::Display for InitialState {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            InitialState::PlusAll => f.write_str("plus_all"),
            InitialState::Bits(b) => f.write_str(b),
        }
    }
}

impl InitialState {
    pub fn prepare(&self, n_qubits: usize, limit: usize) -> Result<StateVector> {
        match self {
            InitialState::PlusAll => StateVector::plus_all(n_qubits, limit),
            InitialState::Bits(b) => {
                if b.len() != n_qubits {
                    return Err(Error::DimensionMismatch {
                        expected: n_qubits,
                        found: b.len(),
                    });
                }
                let index = b
                    .bytes()
                    .enumerate()
                    .fold(0usize, |acc, (q, c)| acc | (((c == b'1') as usize) << q));
                StateVector::basis(n_qubits, index, limit)
            }
        }
    }
}

fn check_limit(n: usize, limit: usize) -> Result<()> {
    if n > limit || n >= usize::BITS as usize {
        return Err(Error::StatevectorLimit { n, limit });
    }
    Ok(())
}

fn masks_for(n: usize, p: &PauliString) -> Result<(usize, usize, u32)> {
    if p.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.n_qubits(),
        });
    }
    let (x, z) = p.masks().ok_or(Error::StatevectorLimit { n, limit: 64 })?;
    Ok((x as usize, z as usize, (p.y_count() % 4) as u32))
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

impl StateVector {
    pub fn basis(n_qubits: usize, index: usize, limit: usize) -> Result<Self> {
        check_limit(n_qubits, limit)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} >= 2^{n_qubits}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0, DEFAULT_STATEVECTOR_LIMIT)
    }

    pub fn plus_all(n_qubits: usize, limit: usize) -> Result<Self> {
        check_limit(n_qubits, limit)?;
        let dim = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(StateVector {
            n_qubits,
            amps: vec![a; dim],
        })
    }

    /// Wraps amplitudes as given (no normalisation).
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("length {dim} is not a power of two")));
        }
        Ok(StateVector {
            n_qubits: dim.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn copy_from(&mut self, other: &StateVector) {
        self.n_qubits = other.n_qubits;
        self.amps.clear();
        self.amps.extend_from_slice(&other.amps);
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `psi <- P psi`.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        let (x, z, ny) = masks_for(self.n_qubits, p)?;
        let phase = i_pow(ny);
        if x == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                if (b & z).count_ones() & 1 == 1 {
                    *a = -*a;
                }
            }
        } else {
            let low = x & x.wrapping_neg();
            for b in 0..self.amps.len() {
                if b & low != 0 {
                    continue;
                }
                let c = b ^ x;
                let sb = if (b & z).count_ones() & 1 == 1 { -phase } else { phase };
                let sc = if (c & z).count_ones() & 1 == 1 { -phase } else { phase };
                let (ab, ac) = (self.amps[b], self.amps[c]);
                self.amps[c] = sb * ab;
                self.amps[b] = sc * ac;
            }
        }
        Ok(())
    }

    /// `psi <- exp(-i P theta / 2) psi`.
    pub fn apply_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        let (x, z, ny) = masks_for(self.n_qubits, p)?;
        let (s, c) = (0.5 * theta).sin_cos();
        let cc = Complex64::new(c, 0.0);
        // -i sin * phase, the coupling factor
        let k = Complex64::new(0.0, -s) * i_pow(ny);
        if x == 0 {
            let plus = cc + k;
            let minus = cc - k;
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= if (b & z).count_ones() & 1 == 1 { minus } else { plus };
            }
        } else {
            let low = x & x.wrapping_neg();
            for b in 0..self.amps.len() {
                if b & low != 0 {
                    continue;
                }
                let c_idx = b ^ x;
                let kb = if (b & z).count_ones() & 1 == 1 { -k } else { k };
                let kc = if (c_idx & z).count_ones() & 1 == 1 { -k } else { k };
                let (ab, ac) = (self.amps[b], self.amps[c_idx]);
                self.amps[b] = cc * ab + kc * ac;
                self.amps[c_idx] = cc * ac + kb * ab;
            }
        }
        Ok(())
    }

    /// `<psi|P|psi>` (real for Hermitian `P`).
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        let (x, z, ny) = masks_for(self.n_qubits, p)?;
        let phase = i_pow(ny);
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in self.amps.iter().enumerate() {
            // P|b> = phase (-1)^{b.z} |b^x>
            let sign = if (b & z).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
            acc += self.amps[b ^ x].conj() * *a * sign;
        }
        Ok((acc * phase).re)
    }

    fn hadamard(&mut self, q: usize) {
        let m = 1usize << q;
        let r = core::f64::consts::FRAC_1_SQRT_2;
        for b in 0..self.amps.len() {
            if b & m == 0 {
                let (a0, a1) = (self.amps[b], self.amps[b | m]);
                self.amps[b] = (a0 + a1) * r;
                self.amps[b | m] = (a0 - a1) * r;
            }
        }
    }

    fn s_dagger(&mut self, q: usize) {
        let m = 1usize << q;
        for (b, a) in self.amps.iter_mut().enumerate() {
            if b & m != 0 {
                *a *= -I;
            }
        }
    }

    /// One `+-1` outcome of measuring `p`, given a uniform `u` in `[0, 1)`.
    ///
    /// Rotates the support into the computational basis, draws an index from
    /// the Born distribution and returns the parity of the support bits. The
    /// state is left in the rotated basis.
    pub fn measure_pauli_destructive(&mut self, p: &PauliString, u: f64) -> Result<f64> {
        masks_for(self.n_qubits, p)?;
        let mut support = 0usize;
        for (q, axis) in p.factors() {
            match axis {
                Axis::X => self.hadamard(q),
                Axis::Y => {
                    self.s_dagger(q);
                    self.hadamard(q);
                }
                Axis::Z => {}
            }
            support |= 1 << q;
        }
        let total: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        let target = u * total;
        let mut run = 0.0;
        let mut chosen = self.amps.len() - 1;
        for (b, a) in self.amps.iter().enumerate() {
            run += a.norm_sqr();
            if run > target {
                chosen = b;
                break;
            }
        }
        Ok(if (chosen & support).count_ones() & 1 == 1 { -1.0 } else { 1.0 })
    }
}
