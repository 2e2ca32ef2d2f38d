//! Sparse Pauli strings.
//!
//! A [`PauliString`] stores only its non-identity factors, keyed by qubit
//! index. The canonical text form lists factors as axis + index in ascending
//! index order, separated by single spaces (`"X0 Y3 Z7"`); the identity
//! string is written `"I"`.
//!
//! Qubit `q` corresponds to bit `q` of a computational-basis index.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest qubit count for which dense `2^n x 2^n` matrices are built.
pub const DEFAULT_DENSE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn symbol(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    fn from_symbol(c: char) -> Option<Axis> {
        match c {
            'X' | 'x' => Some(Axis::X),
            'Y' | 'y' => Some(Axis::Y),
            'Z' | 'z' => Some(Axis::Z),
            _ => None,
        }
    }

    /// Single-qubit product `self * other` as (phase, axis); `None` axis is identity.
    fn product(self, other: Axis) -> (Phase, Option<Axis>) {
        use Axis::*;
        match (self, other) {
            (a, b) if a == b => (Phase::One, None),
            (X, Y) => (Phase::I, Some(Z)),
            (Y, Z) => (Phase::I, Some(X)),
            (Z, X) => (Phase::I, Some(Y)),
            (Y, X) => (Phase::MinusI, Some(Z)),
            (Z, Y) => (Phase::MinusI, Some(X)),
            (X, Z) => (Phase::MinusI, Some(Y)),
            _ => unreachable!(),
        }
    }
}

/// A power of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    I,
    MinusOne,
    MinusI,
}

impl Phase {
    fn exponent(self) -> u8 {
        match self {
            Phase::One => 0,
            Phase::I => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    fn from_exponent(e: u8) -> Phase {
        match e % 4 {
            0 => Phase::One,
            1 => Phase::I,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::One => Complex64::new(1.0, 0.0),
            Phase::I => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_exponent(self.exponent() + rhs.exponent())
    }
}

/// Tensor product of single-qubit Paulis on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    factors: BTreeMap<usize, Axis>,
}

/// A Pauli string with a phase in `{+1, -1, +i, -i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasedPauli {
    pub phase: Phase,
    pub string: PauliString,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        PauliString {
            n_qubits,
            factors: BTreeMap::new(),
        }
    }

    /// Builds a string from `(qubit, axis)` pairs. Repeated qubits are rejected.
    pub fn from_factors<I>(n_qubits: usize, factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Axis)>,
    {
        let mut map = BTreeMap::new();
        for (q, a) in factors {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            if map.insert(q, a).is_some() {
                return Err(Error::InvalidParameter(alloc::format!(
                    "qubit {q} appears twice in Pauli string"
                )));
            }
        }
        Ok(PauliString {
            n_qubits,
            factors: map,
        })
    }

    pub fn single(n_qubits: usize, qubit: usize, axis: Axis) -> Result<Self> {
        Self::from_factors(n_qubits, [(qubit, axis)])
    }

    /// Parses the canonical text form, e.g. `"X0 Y3 Z7"` or `"I"`.
    ///
    /// Compact tokens such as `"X0Y3"` are not accepted; factors must be
    /// whitespace separated.
    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let factors = parse_factors(text)?;
        Self::from_factors(n_qubits, factors)
    }

    /// Parses the canonical text form, sizing the string to `max index + 1`.
    pub fn parse_minimal(text: &str) -> Result<Self> {
        let factors = parse_factors(text)?;
        let n = factors.iter().map(|&(q, _)| q + 1).max().unwrap_or(1);
        Self::from_factors(n, factors)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn axis(&self, qubit: usize) -> Option<Axis> {
        self.factors.get(&qubit).copied()
    }

    /// Non-identity factors in ascending qubit order.
    pub fn factors(&self) -> impl Iterator<Item = (usize, Axis)> + '_ {
        self.factors.iter().map(|(&q, &a)| (q, a))
    }

    /// Qubits carrying a non-identity factor.
    pub fn support(&self) -> Vec<usize> {
        self.factors.keys().copied().collect()
    }

    /// Same factors on a larger register.
    pub fn resized(&self, n_qubits: usize) -> Result<Self> {
        Self::from_factors(n_qubits, self.factors())
    }

    fn check_same_size(&self, other: &PauliString) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(())
    }

    /// Group product `self * other` with tracked phase.
    pub fn multiply(&self, other: &PauliString) -> Result<PhasedPauli> {
        self.check_same_size(other)?;
        let mut phase = Phase::One;
        let mut factors = self.factors.clone();
        for (&q, &b) in &other.factors {
            match factors.get(&q).copied() {
                None => {
                    factors.insert(q, b);
                }
                Some(a) => {
                    let (p, res) = a.product(b);
                    phase = phase * p;
                    match res {
                        Some(axis) => {
                            factors.insert(q, axis);
                        }
                        None => {
                            factors.remove(&q);
                        }
                    }
                }
            }
        }
        Ok(PhasedPauli {
            phase,
            string: PauliString {
                n_qubits: self.n_qubits,
                factors,
            },
        })
    }

    /// True iff the strings differ on an even number of shared non-identity sites.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_same_size(other)?;
        Ok(self.anticommuting_sites(other) % 2 == 0)
    }

    fn anticommuting_sites(&self, other: &PauliString) -> usize {
        let (small, large) = if self.weight() <= other.weight() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .factors
            .iter()
            .filter(|(q, a)| matches!(large.factors.get(q), Some(b) if b != *a))
            .count()
    }

    /// Bit masks `(x, z)` with bit `q` set where qubit `q` carries X/Y and Z/Y
    /// respectively. Only defined for registers of at most 64 qubits.
    pub fn masks(&self) -> Option<(u64, u64)> {
        if self.n_qubits > 64 {
            return None;
        }
        let mut x = 0u64;
        let mut z = 0u64;
        for (&q, &a) in &self.factors {
            match a {
                Axis::X => x |= 1 << q,
                Axis::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                Axis::Z => z |= 1 << q,
            }
        }
        Some((x, z))
    }

    pub fn y_count(&self) -> usize {
        self.factors.values().filter(|&&a| a == Axis::Y).count()
    }

    /// Dense `2^n x 2^n` matrix with the default size limit.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        self.to_dense_with_limit(DEFAULT_DENSE_LIMIT)
    }

    pub fn to_dense_with_limit(&self, limit: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > limit {
            return Err(Error::DenseLimit {
                n: self.n_qubits,
                limit,
            });
        }
        let dim = 1usize << self.n_qubits;
        let (x, z) = self.masks().expect("dense limit is below 64 qubits");
        let base = Phase::from_exponent(self.y_count() as u8).to_complex();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for col in 0..dim {
            let mut amp = base;
            if (col as u64 & z).count_ones() % 2 == 1 {
                amp = -amp;
            }
            m[((col as u64 ^ x) as usize, col)] = amp;
        }
        Ok(m)
    }
}

fn parse_factors(text: &str) -> Result<Vec<(usize, Axis)>> {
    let bad = |msg: String| Error::Parse {
        line: 0,
        message: msg,
    };
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(bad("empty Pauli string".to_string()));
    }
    if trimmed == "I" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for tok in trimmed.split_whitespace() {
        let mut chars = tok.chars();
        let axis = chars
            .next()
            .and_then(Axis::from_symbol)
            .ok_or_else(|| bad(alloc::format!("bad Pauli factor `{tok}`")))?;
        let index: usize = chars
            .as_str()
            .parse()
            .map_err(|_| bad(alloc::format!("bad qubit index in `{tok}`")))?;
        out.push((index, axis));
    }
    Ok(out)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("I");
        }
        for (i, (q, a)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", a.symbol(), q)?;
        }
        Ok(())
    }
}

impl PhasedPauli {
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        Ok(self.string.to_dense()? * self.phase.to_complex())
    }
}
