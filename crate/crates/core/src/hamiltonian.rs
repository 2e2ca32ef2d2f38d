//! Pauli-decomposed Hamiltonians `H(t) = sum_k c_k(t) h_k`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)] // float methods when std is absent
use num_traits::Float;

use crate::error::{Error, Result};
use crate::pauli::{Axis, PauliString, DEFAULT_DENSE_LIMIT};
use crate::quadrature::adaptive_simpson;

/// Relative tolerance for the time-averaged l1 norm.
pub const L1_REL_TOL: f64 = 1e-9;

/// Time dependence of one Hamiltonian coefficient.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientSchedule {
    Constant(f64),
    /// `amplitude * cos(angular_frequency * t)`
    Harmonic {
        amplitude: f64,
        angular_frequency: f64,
    },
    /// Piecewise-linear interpolation of `values` on a strictly increasing grid.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl CoefficientSchedule {
    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidParameter(
                "tabulated schedule needs at least two (time, value) pairs".to_string(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "tabulated schedule grid must be strictly increasing".to_string(),
            ));
        }
        if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "tabulated schedule contains non-finite entries".to_string(),
            ));
        }
        Ok(CoefficientSchedule::Tabulated { times, values })
    }

    pub fn is_constant(&self) -> bool {
        match self {
            CoefficientSchedule::Constant(_) => true,
            CoefficientSchedule::Harmonic {
                amplitude,
                angular_frequency,
            } => *amplitude == 0.0 || *angular_frequency == 0.0,
            CoefficientSchedule::Tabulated { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
        }
    }

    /// Value at time `t`. Tabulated schedules hold their end values outside the grid.
    pub fn evaluate(&self, t: f64) -> f64 {
        match self {
            CoefficientSchedule::Constant(v) => *v,
            CoefficientSchedule::Harmonic {
                amplitude,
                angular_frequency,
            } => amplitude * (angular_frequency * t).cos(),
            CoefficientSchedule::Tabulated { times, values } => {
                let last = times.len() - 1;
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[last] {
                    return values[last];
                }
                let i = times.partition_point(|&x| x <= t) - 1;
                let w = (t - times[i]) / (times[i + 1] - times[i]);
                values[i] + w * (values[i + 1] - values[i])
            }
        }
    }

    /// Whether the schedule is defined on all of `[0, t_end]`.
    pub fn defined_on(&self, t_end: f64) -> bool {
        match self {
            CoefficientSchedule::Tabulated { times, .. } => {
                times[0] <= 0.0 && times[times.len() - 1] >= t_end
            }
            _ => true,
        }
    }

    /// `[a, b]` split at points where `|c(t)|` has a kink: zero crossings and
    /// tabulated grid points.
    fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = Vec::new();
        pts.push(a);
        match self {
            CoefficientSchedule::Constant(_) => {}
            CoefficientSchedule::Harmonic {
                angular_frequency,
                amplitude,
            } => {
                let w = angular_frequency.abs();
                if w > 0.0 && *amplitude != 0.0 {
                    // zeros of cos(w t): t = (pi/2 + m pi) / w
                    let m0 = ((a * w - PI / 2.0) / PI).ceil().max(0.0) as u64;
                    let mut m = m0;
                    loop {
                        let t = (PI / 2.0 + m as f64 * PI) / w;
                        if t >= b {
                            break;
                        }
                        if t > a {
                            pts.push(t);
                        }
                        m += 1;
                    }
                }
            }
            CoefficientSchedule::Tabulated { times, values } => {
                for i in 0..times.len() {
                    let t = times[i];
                    if t > a && t < b {
                        pts.push(t);
                    }
                    if i + 1 < times.len() && values[i] * values[i + 1] < 0.0 {
                        let z = times[i] + (times[i + 1] - times[i]) * values[i] / (values[i] - values[i + 1]);
                        if z > a && z < b {
                            pts.push(z);
                        }
                    }
                }
                pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            }
        }
        pts.push(b);
        pts
    }

    /// `int_0^T |c(t)| dt` with kink-aware adaptive Simpson.
    pub fn abs_integral(&self, t_end: f64) -> Result<f64> {
        if !self.defined_on(t_end) {
            return Err(Error::ScheduleUndefined(t_end));
        }
        if let CoefficientSchedule::Constant(v) = self {
            return Ok(v.abs() * t_end);
        }
        let pts = self.breakpoints(0.0, t_end);
        let f = |t: f64| self.evaluate(t).abs();
        Ok(pts
            .windows(2)
            .map(|w| adaptive_simpson(&f, w[0], w[1], L1_REL_TOL * 0.1))
            .sum())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub pauli: PauliString,
    pub schedule: CoefficientSchedule,
}

/// How [`Hamiltonian::commutator_norm_sq`] evaluates commutator norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommutatorMethod {
    /// Spectral norms when `n <= dense_limit`, pair bound otherwise.
    Auto { dense_limit: usize },
    Dense,
    PairBound,
}

impl Default for CommutatorMethod {
    fn default() -> Self {
        CommutatorMethod::Auto {
            dense_limit: DEFAULT_DENSE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: Vec<Term>,
    label: String,
    constant_l1: Option<f64>,
}

impl Hamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<Term>, label: impl Into<String>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptyHamiltonian);
        }
        let mut seen = BTreeSet::new();
        for t in &terms {
            if t.pauli.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: n_qubits,
                    found: t.pauli.n_qubits(),
                });
            }
            if !seen.insert(&t.pauli) {
                return Err(Error::DuplicateTerm(t.pauli.to_string()));
            }
        }
        let constant_l1 = terms
            .iter()
            .all(|t| t.schedule.is_constant())
            .then(|| terms.iter().map(|t| t.schedule.evaluate(0.0).abs()).sum());
        Ok(Hamiltonian {
            n_qubits,
            terms,
            label: label.into(),
            constant_l1,
        })
    }

    /// Time-independent Hamiltonian from `(coefficient, string)` pairs.
    pub fn constant(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (f64, PauliString)>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let terms = terms
            .into_iter()
            .map(|(c, p)| Term {
                pauli: p,
                schedule: CoefficientSchedule::Constant(c),
            })
            .collect();
        Self::new(n_qubits, terms, label)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_time_independent(&self) -> bool {
        self.constant_l1.is_some()
    }

    /// `||c||_1` for time-independent Hamiltonians.
    pub fn constant_l1_norm(&self) -> Option<f64> {
        self.constant_l1
    }

    pub fn coefficients_at(&self, t: f64) -> Vec<f64> {
        self.terms.iter().map(|term| term.schedule.evaluate(t)).collect()
    }

    /// Constant coefficients, or `TimeDependentUnsupported`.
    pub fn constant_coefficients(&self) -> Result<Vec<f64>> {
        if !self.is_time_independent() {
            return Err(Error::TimeDependentUnsupported);
        }
        Ok(self.coefficients_at(0.0))
    }

    /// Time-averaged l1 norm `(1/T) int_0^T sum_k |c_k(t)| dt`.
    pub fn l1_norm_avg(&self, t_end: f64) -> Result<f64> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidParameter(format!("T = {t_end} must be positive")));
        }
        if let Some(l1) = self.constant_l1 {
            return Ok(l1);
        }
        let mut total = 0.0;
        for term in &self.terms {
            total += term.schedule.abs_integral(t_end)?;
        }
        Ok(total / t_end)
    }

    /// Upper bound `2 sum_{i<j} |c_i||c_j| [h_i, h_j anticommute]` at time `t`.
    pub fn commutator_pair_bound(&self, t: f64) -> f64 {
        let c = self.coefficients_at(t);
        let mut sum = 0.0;
        for i in 0..self.terms.len() {
            for j in (i + 1)..self.terms.len() {
                if !self.terms[i].pauli.commutes(&self.terms[j].pauli).unwrap() {
                    sum += c[i].abs() * c[j].abs();
                }
            }
        }
        2.0 * sum
    }

    /// Trotter error norm `sum_a || [sum_{b>a} c_b h_b, c_a h_a] ||` at time `t`.
    ///
    /// Only anticommuting pairs contribute, and for those `[h_b, h_a] = 2 h_b h_a`,
    /// so each summand is `2 |c_a| * || sum_{b>a, anticommuting} c_b h_b ||` with
    /// the spectral norm of the Hermitian partial sum.
    pub fn commutator_norm_sq(&self, t: f64, method: CommutatorMethod) -> Result<f64> {
        let dense = match method {
            CommutatorMethod::Dense => true,
            CommutatorMethod::PairBound => false,
            CommutatorMethod::Auto { dense_limit } => self.n_qubits <= dense_limit,
        };
        if !dense {
            return Ok(self.commutator_pair_bound(t));
        }
        if self.n_qubits > DEFAULT_DENSE_LIMIT {
            return Err(Error::DenseLimit {
                n: self.n_qubits,
                limit: DEFAULT_DENSE_LIMIT,
            });
        }
        let c = self.coefficients_at(t);
        let dense_terms: Vec<DMatrix<Complex64>> = self
            .terms
            .iter()
            .map(|term| term.pauli.to_dense())
            .collect::<Result<_>>()?;
        let dim = 1usize << self.n_qubits;
        let mut total = 0.0;
        for a in 0..self.terms.len() {
            if c[a] == 0.0 {
                continue;
            }
            let mut partial = DMatrix::<Complex64>::zeros(dim, dim);
            let mut any = false;
            for b in (a + 1)..self.terms.len() {
                if c[b] != 0.0 && !self.terms[a].pauli.commutes(&self.terms[b].pauli)? {
                    partial += &dense_terms[b] * Complex64::new(c[b], 0.0);
                    any = true;
                }
            }
            if any {
                total += 2.0 * c[a].abs() * hermitian_spectral_norm(partial);
            }
        }
        Ok(total)
    }

    /// Dense matrix of `H(t)`.
    pub fn to_dense_at(&self, t: f64) -> Result<DMatrix<Complex64>> {
        let dim = 1usize << self.n_qubits.min(63);
        if self.n_qubits > DEFAULT_DENSE_LIMIT {
            return Err(Error::DenseLimit {
                n: self.n_qubits,
                limit: DEFAULT_DENSE_LIMIT,
            });
        }
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (term, c) in self.terms.iter().zip(self.coefficients_at(t)) {
            m += term.pauli.to_dense()? * Complex64::new(c, 0.0);
        }
        Ok(m)
    }
}

fn hermitian_spectral_norm(m: DMatrix<Complex64>) -> f64 {
    m.symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Heisenberg spin ring `sum_k w_k Z_k + J(t) (X_k X_{k+1} + Y_k Y_{k+1} + Z_k Z_{k+1})`
/// with `J(t) = cos(99 pi t)` and `w_k ~ U[-1, 1]` drawn from a ChaCha8 stream seeded by `seed`.
///
/// Terms are ordered site by site: `Z_k, X_k X_{k+1}, Y_k Y_{k+1}, Z_k Z_{k+1}`.
pub fn build_spin_ring(n: usize, seed: u64) -> Result<Hamiltonian> {
    build_spin_ring_with_coupling(
        n,
        seed,
        CoefficientSchedule::Harmonic {
            amplitude: 1.0,
            angular_frequency: 99.0 * PI,
        },
    )
}

pub fn build_spin_ring_with_coupling(
    n: usize,
    seed: u64,
    coupling: CoefficientSchedule,
) -> Result<Hamiltonian> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("spin ring needs n >= 3, got {n}")));
    }
    let omegas = spin_ring_fields(n, seed);
    let mut terms = Vec::with_capacity(4 * n);
    for k in 0..n {
        let next = (k + 1) % n;
        terms.push(Term {
            pauli: PauliString::single(n, k, Axis::Z)?,
            schedule: CoefficientSchedule::Constant(omegas[k]),
        });
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            terms.push(Term {
                pauli: PauliString::from_factors(n, [(k, axis), (next, axis)])?,
                schedule: coupling.clone(),
            });
        }
    }
    Hamiltonian::new(n, terms, format!("spin_ring(n={n}, seed={seed})"))
}

/// On-site fields `w_k` used by [`build_spin_ring`].
pub fn spin_ring_fields(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Analytic commutator-norm bound for the spin ring, `2 (4 sum |w_k| + 6 n) <= 20 n`.
pub fn spin_ring_commutator_bound(n: usize, sum_abs_fields: f64) -> f64 {
    2.0 * (4.0 * sum_abs_fields + 6.0 * n as f64)
}

/// Parses a term file: one `<coeff> <pauli string>` per line, `#` comments.
///
/// The register size is `max index + 1` unless a `# qubits: <n>` line is present.
pub fn parse_term_file(text: &str, label: &str) -> Result<Hamiltonian> {
    let mut declared: Option<usize> = None;
    let mut entries: Vec<(usize, f64, PauliString)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("qubits:") {
                let n = rest.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad qubit count `{}`", rest.trim()),
                })?;
                declared = Some(n);
            }
            continue;
        }
        let line = match line.split_once('#') {
            Some((before, _)) => before.trim(),
            None => line,
        };
        if line.is_empty() {
            continue;
        }
        let (coeff, pauli) = line.split_once(char::is_whitespace).ok_or_else(|| Error::Parse {
            line: line_no,
            message: "expected `<coeff> <pauli string>`".to_string(),
        })?;
        let coeff: f64 = coeff.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad coefficient `{coeff}`"),
        })?;
        if !coeff.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                message: "coefficient is not finite".to_string(),
            });
        }
        let p = PauliString::parse_minimal(pauli).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                line: line_no,
                message,
            },
            other => other,
        })?;
        entries.push((line_no, coeff, p));
    }
    if entries.is_empty() {
        return Err(Error::EmptyHamiltonian);
    }
    let inferred = entries.iter().map(|(_, _, p)| p.n_qubits()).max().unwrap_or(1);
    let n = match declared {
        Some(n) if n < inferred => {
            return Err(Error::Parse {
                line: 0,
                message: format!("declared {n} qubits but terms act on {inferred}"),
            })
        }
        Some(n) => n,
        None => inferred,
    };
    let mut seen = BTreeSet::new();
    let mut terms = Vec::with_capacity(entries.len());
    for (line_no, coeff, p) in entries {
        let p = p.resized(n)?;
        if !seen.insert(p.clone()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate term {p}"),
            });
        }
        terms.push(Term {
            pauli: p,
            schedule: CoefficientSchedule::Constant(coeff),
        });
    }
    Hamiltonian::new(n, terms, label)
}
