//! Probabilistic angle interpolation of a product-formula template.
//!
//! A rotation `R(theta)` with `0 <= |theta| <= delta` is written as the signed
//! combination `g1 * I + g2 * R(sign(theta) delta) + g3 * R(pi)` of channels.
//! Sampling one variant per template position gives a random fixed-angle
//! circuit whose outcomes, weighted by `overhead * sign`, are unbiased for the
//! template.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)] // float methods when std is absent
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliString;
use crate::rng::{self, Domain};
use crate::trotter::TrotterTemplate;

/// Relative slack on `theta <= delta` that absorbs rounding in `2 c T / N`.
const ANGLE_SLACK: f64 = 1e-12;

/// Templates up to this many positions keep per-position thresholds in memory.
const FULL_CACHE_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaWeights {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub l1: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// `1 - p1`, computed without cancellation.
    pub p_gate: f64,
    /// `ln(l1)`, accurate for `theta -> 0`.
    pub ln_l1: f64,
}

pub fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < PI) {
        return Err(Error::InvalidDelta(delta));
    }
    Ok(())
}

/// Weights for `0 <= theta <= delta < pi`; pass `|theta_kj|`.
pub fn gamma_weights(theta: f64, delta: f64) -> Result<GammaWeights> {
    check_delta(delta)?;
    if !(theta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "angle {theta} must be non-negative (pass |theta|)"
        )));
    }
    if theta > delta * (1.0 + ANGLE_SLACK) {
        return Err(Error::AngleExceedsDelta { theta, delta });
    }
    let theta = theta.min(delta);
    let half_gap = 0.5 * (delta - theta);
    let s_gap = half_gap.sin();
    let (s_t, c_t) = (0.5 * theta).sin_cos();
    let (s_d, c_d) = (0.5 * delta).sin_cos();

    let gamma1 = c_t * s_gap / s_d;
    let gamma2 = theta.sin() / delta.sin();
    let gamma3 = -s_t * s_gap / c_d;
    let l1 = gamma1 + gamma2 - gamma3;
    // l1 - 1 = sin(theta) tan(delta/2) - 2 sin^2(theta/2)
    let ln_l1 = (theta.sin() * (s_d / c_d) - 2.0 * s_t * s_t).ln_1p();
    let p_gate = (gamma2 - gamma3) / l1;
    Ok(GammaWeights {
        gamma1,
        gamma2,
        gamma3,
        l1,
        p1: gamma1 / l1,
        p2: gamma2 / l1,
        p3: -gamma3 / l1,
        p_gate,
        ln_l1,
    })
}

/// Discrete angle carried by a sampled gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateAngle {
    PlusDelta,
    MinusDelta,
    /// Applied as the bare Pauli; the `-i` phase of `R(pi)` is dropped.
    Pi,
    /// Continuous angle (qDRIFT gates).
    Free(f64),
}

impl GateAngle {
    pub fn radians(self, delta: f64) -> f64 {
        match self {
            GateAngle::PlusDelta => delta,
            GateAngle::MinusDelta => -delta,
            GateAngle::Pi => PI,
            GateAngle::Free(a) => a,
        }
    }

    pub fn label(self) -> alloc::string::String {
        match self {
            GateAngle::PlusDelta => "+delta".into(),
            GateAngle::MinusDelta => "-delta".into(),
            GateAngle::Pi => "pi".into(),
            GateAngle::Free(a) => format!("{a:e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledGate {
    /// Term index `k` into the Hamiltonian.
    pub term: u32,
    /// Trotter step `j` (1-based; qDRIFT uses the draw index).
    pub step: u32,
    pub angle: GateAngle,
}

impl SampledGate {
    pub fn generator<'h>(&self, h: &'h Hamiltonian) -> &'h PauliString {
        &h.terms()[self.term as usize].pauli
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampledCircuit {
    pub gates: Vec<SampledGate>,
    pub sign: i8,
    pub overhead: f64,
    pub delta: f64,
    pub draw_seed: u64,
}

impl SampledCircuit {
    /// Gate count `nu`.
    pub fn nu(&self) -> usize {
        self.gates.len()
    }

    /// `overhead * sign`.
    pub fn weight(&self) -> f64 {
        self.overhead * self.sign as f64
    }
}

#[derive(Debug, Clone, Copy)]
struct Thresholds {
    identity: f64,
    not_pi: f64,
    delta_angle: GateAngle,
}

impl Thresholds {
    fn new(theta: f64, delta: f64) -> Result<(Self, GammaWeights)> {
        let w = gamma_weights(theta.abs(), delta)?;
        let t = Thresholds {
            identity: w.p1,
            not_pi: 1.0 - w.p3,
            delta_angle: if theta < 0.0 {
                GateAngle::MinusDelta
            } else {
                GateAngle::PlusDelta
            },
        };
        Ok((t, w))
    }
}

#[derive(Debug, Clone)]
enum Cache {
    /// One row of `L` thresholds shared by every step.
    Constant(Vec<Thresholds>),
    /// All `N * L` thresholds in application order.
    Full(Vec<Thresholds>),
    /// Rows recomputed per step while sampling.
    Lazy,
}

/// Template plus `delta`, validated once and reused across draws.
#[derive(Debug, Clone)]
pub struct SamplingPlan<'h> {
    template: TrotterTemplate<'h>,
    delta: f64,
    log_overhead: f64,
    nu_mean: f64,
    nu_var: f64,
    cache: Cache,
}

impl<'h> SamplingPlan<'h> {
    pub fn new(template: TrotterTemplate<'h>, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        let l = template.n_terms();
        let mut log_overhead = 0.0;
        let mut nu_mean = 0.0;
        let mut nu_var = 0.0;
        let mut acc = |w: &GammaWeights, times: f64| {
            log_overhead += times * w.ln_l1;
            nu_mean += times * w.p_gate;
            nu_var += times * w.p1 * w.p_gate;
        };
        let cache = if template.hamiltonian().is_time_independent() {
            let mut row = Vec::with_capacity(l);
            for k in 0..l {
                let (t, w) = Thresholds::new(template.angle(k, 1), delta)?;
                acc(&w, template.steps() as f64);
                row.push(t);
            }
            Cache::Constant(row)
        } else {
            let full = template.positions() <= FULL_CACHE_LIMIT;
            let mut all = Vec::new();
            let mut row = Vec::with_capacity(l);
            for j in 1..=template.steps() {
                template.step_angles_into(j, &mut row);
                for &theta in &row {
                    let (t, w) = Thresholds::new(theta, delta)?;
                    acc(&w, 1.0);
                    if full {
                        all.push(t);
                    }
                }
            }
            if full {
                Cache::Full(all)
            } else {
                Cache::Lazy
            }
        };
        Ok(SamplingPlan {
            template,
            delta,
            log_overhead,
            nu_mean,
            nu_var,
            cache,
        })
    }

    pub fn template(&self) -> &TrotterTemplate<'h> {
        &self.template
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `||g||_1`, the product of per-position `||gamma||_1`.
    pub fn overhead(&self) -> f64 {
        self.log_overhead.exp()
    }

    pub fn log_overhead(&self) -> f64 {
        self.log_overhead
    }

    /// Exact finite-template `E[nu]`.
    pub fn expected_gate_count(&self) -> f64 {
        self.nu_mean
    }

    /// Exact finite-template `Var[nu]`.
    pub fn gate_count_variance(&self) -> f64 {
        self.nu_var
    }

    /// Draws the circuit for `draw_seed`; position `p` consumes draw `p` of
    /// the seeded stream.
    pub fn sample(&self, draw_seed: u64) -> SampledCircuit {
        let mut out = SampledCircuit::default();
        self.sample_into(draw_seed, &mut out);
        out
    }

    /// Circuit `index` under `master_seed`.
    pub fn sample_indexed(&self, master_seed: u64, index: u64) -> SampledCircuit {
        self.sample(rng::derive_seed(master_seed, Domain::Circuit, index))
    }

    /// As [`sample`](Self::sample), reusing the gate buffer of `out`.
    pub fn sample_into(&self, draw_seed: u64, out: &mut SampledCircuit) {
        out.gates.clear();
        out.sign = 1;
        out.overhead = self.overhead();
        out.delta = self.delta;
        out.draw_seed = draw_seed;
        let mut stream = rng::stream(draw_seed);
        let l = self.template.n_terms();
        let steps = self.template.steps();
        match &self.cache {
            Cache::Constant(row) => {
                for j in 1..=steps {
                    for (k, t) in row.iter().enumerate() {
                        draw(&mut stream, t, k, j, out);
                    }
                }
            }
            Cache::Full(all) => {
                for (p, t) in all.iter().enumerate() {
                    draw(&mut stream, t, p % l, p / l + 1, out);
                }
            }
            Cache::Lazy => {
                let mut row = Vec::with_capacity(l);
                for j in 1..=steps {
                    self.template.step_angles_into(j, &mut row);
                    for (k, &theta) in row.iter().enumerate() {
                        // validated in `new`
                        let (t, _) = Thresholds::new(theta, self.delta)
                            .expect("angle validated at plan construction");
                        draw(&mut stream, &t, k, j, out);
                    }
                }
            }
        }
    }
}

#[inline]
fn draw(stream: &mut ChaCha8Rng, t: &Thresholds, k: usize, j: usize, out: &mut SampledCircuit) {
    let u = rng::next_unit(stream);
    if u < t.identity {
        return;
    }
    let angle = if u < t.not_pi {
        t.delta_angle
    } else {
        out.sign = -out.sign;
        GateAngle::Pi
    };
    out.gates.push(SampledGate {
        term: k as u32,
        step: j as u32,
        angle,
    });
}

/// Overhead and gate-count moments of a template without building a sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemplateStatistics {
    pub log_overhead: f64,
    pub nu_mean: f64,
    pub nu_var: f64,
}

pub fn template_statistics(template: TrotterTemplate<'_>, delta: f64) -> Result<TemplateStatistics> {
    check_delta(delta)?;
    let mut st = TemplateStatistics {
        log_overhead: 0.0,
        nu_mean: 0.0,
        nu_var: 0.0,
    };
    let mut add = |theta: f64, times: f64| -> Result<()> {
        let w = gamma_weights(theta.abs(), delta)?;
        st.log_overhead += times * w.ln_l1;
        st.nu_mean += times * w.p_gate;
        st.nu_var += times * w.p1 * w.p_gate;
        Ok(())
    };
    if template.hamiltonian().is_time_independent() {
        for k in 0..template.n_terms() {
            add(template.angle(k, 1), template.steps() as f64)?;
        }
    } else {
        let mut row = Vec::with_capacity(template.n_terms());
        for j in 1..=template.steps() {
            template.step_angles_into(j, &mut row);
            for &theta in &row {
                add(theta, 1.0)?;
            }
        }
    }
    Ok(st)
}

pub fn sample_circuit(template: TrotterTemplate<'_>, delta: f64, seed: u64) -> Result<SampledCircuit> {
    Ok(SamplingPlan::new(template, delta)?.sample(seed))
}

/// `||g||_1` of the template at `delta`.
pub fn exact_overhead(template: TrotterTemplate<'_>, delta: f64) -> Result<f64> {
    Ok(template_statistics(template, delta)?.log_overhead.exp())
}

/// qDRIFT sampler for a constant Hamiltonian.
#[derive(Debug, Clone)]
pub struct QDriftPlan<'h> {
    hamiltonian: &'h Hamiltonian,
    cumulative: Vec<f64>,
    signs: Vec<f64>,
    tau: f64,
    steps: usize,
}

impl<'h> QDriftPlan<'h> {
    pub fn new(h: &'h Hamiltonian, time: f64, steps: usize) -> Result<Self> {
        if !h.is_time_independent() {
            return Err(Error::TimeDependentUnsupported);
        }
        if steps == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !(time >= 0.0) || !time.is_finite() {
            return Err(Error::InvalidParameter(format!("T = {time} must be non-negative")));
        }
        let c = h.constant_coefficients()?;
        let l1: f64 = c.iter().map(|x| x.abs()).sum();
        if !(l1 > 0.0) {
            return Err(Error::InvalidParameter("all coefficients vanish".into()));
        }
        let mut run = 0.0;
        let cumulative = c
            .iter()
            .map(|x| {
                run += x.abs() / l1;
                run
            })
            .collect();
        Ok(QDriftPlan {
            hamiltonian: h,
            cumulative,
            signs: c.iter().map(|x| if *x < 0.0 { -1.0 } else { 1.0 }).collect(),
            tau: time * l1 / steps as f64,
            steps,
        })
    }

    pub fn hamiltonian(&self) -> &'h Hamiltonian {
        self.hamiltonian
    }

    /// Evolution segment `tau = T ||c||_1 / N`.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn sample(&self, draw_seed: u64) -> SampledCircuit {
        let mut stream = rng::stream(draw_seed);
        let last = self.cumulative.len() - 1;
        let gates = (1..=self.steps)
            .map(|j| {
                let u = rng::next_unit(&mut stream);
                let k = self.cumulative.partition_point(|&c| c <= u).min(last);
                SampledGate {
                    term: k as u32,
                    step: j as u32,
                    angle: GateAngle::Free(2.0 * self.signs[k] * self.tau),
                }
            })
            .collect();
        SampledCircuit {
            gates,
            sign: 1,
            overhead: 1.0,
            delta: 0.0,
            draw_seed,
        }
    }

    pub fn sample_indexed(&self, master_seed: u64, index: u64) -> SampledCircuit {
        self.sample(rng::derive_seed(master_seed, Domain::QDrift, index))
    }
}

pub fn sample_qdrift(h: &Hamiltonian, time: f64, steps: usize, seed: u64) -> Result<SampledCircuit> {
    Ok(QDriftPlan::new(h, time, steps)?.sample(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_spin_ring, CoefficientSchedule, Term};
    use crate::pauli::Axis;
    use alloc::vec;
    use nalgebra::{DMatrix, Matrix3, Vector3};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn rotation(p: &DMatrix<Complex64>, theta: f64) -> DMatrix<Complex64> {
        let d = p.nrows();
        let id = DMatrix::<Complex64>::identity(d, d);
        id * Complex64::new((theta / 2.0).cos(), 0.0) - p * Complex64::new(0.0, (theta / 2.0).sin())
    }

    fn superop(u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        u.map(|z| z.conj()).kronecker(u)
    }

    fn grid() -> Vec<(f64, f64)> {
        let mut g = Vec::new();
        for delta in [PI / 4.0, PI / 64.0, PI / 256.0] {
            for theta in [0.0, delta / 3.0, delta / 2.0, delta] {
                g.push((theta, delta));
            }
        }
        g
    }

    fn check_decomposition(p: &DMatrix<Complex64>, bare_pi: bool) {
        let d = p.nrows();
        let id = superop(&DMatrix::identity(d, d));
        let pi_gate = if bare_pi { p.clone() } else { rotation(p, PI) };
        let c = superop(&pi_gate);
        for (theta, delta) in grid() {
            for s in [1.0, -1.0] {
                let w = gamma_weights(theta, delta).unwrap();
                let b = superop(&rotation(p, s * delta));
                let lhs = &id * Complex64::from(w.gamma1)
                    + b * Complex64::from(w.gamma2)
                    + &c * Complex64::from(w.gamma3);
                let rhs = superop(&rotation(p, s * theta));
                let err = (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(err < 1e-12, "theta={theta} delta={delta} err={err}");
            }
        }
    }

    #[test]
    fn decomposition_single_qubit() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let p = PauliString::single(1, 0, axis).unwrap().to_dense().unwrap();
            check_decomposition(&p, false);
            check_decomposition(&p, true);
        }
    }

    #[test]
    fn decomposition_two_qubit() {
        for text in ["X0 X1", "Z0 Y1", "Y0"] {
            let p = PauliString::parse(text, 2).unwrap().to_dense().unwrap();
            check_decomposition(&p, true);
        }
    }

    #[test]
    fn weights_solve_linear_system() {
        // Rows: commuting component, cosine and sine of an anticommuting one.
        let delta = PI / 64.0;
        let theta = delta / 2.0;
        let a = Matrix3::new(
            1.0, 1.0, 1.0, //
            1.0, delta.cos(), -1.0, //
            0.0, delta.sin(), 0.0,
        );
        let b = Vector3::new(1.0, theta.cos(), theta.sin());
        let x = a.lu().solve(&b).unwrap();
        let w = gamma_weights(theta, delta).unwrap();
        assert!((x[0] - w.gamma1).abs() < 1e-14);
        assert!((x[1] - w.gamma2).abs() < 1e-14);
        assert!((x[2] - w.gamma3).abs() < 1e-14);
        let l1 = (delta / 2.0).cos().recip() * (delta / 2.0 - theta).cos();
        assert!((w.l1 - l1).abs() < 1e-15);
    }

    #[test]
    fn trivial_endpoints() {
        let w = gamma_weights(0.0, 0.3).unwrap();
        assert_eq!((w.gamma1, w.gamma2, w.gamma3), (1.0, 0.0, 0.0));
        assert_eq!((w.l1, w.p1, w.p_gate, w.ln_l1), (1.0, 1.0, 0.0, 0.0));
        let w = gamma_weights(0.3, 0.3).unwrap();
        assert!(w.gamma1.abs() < 1e-16 && (w.gamma2 - 1.0).abs() < 1e-15 && w.gamma3.abs() < 1e-16);
        assert!((w.l1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn angle_beyond_delta_is_rejected() {
        match gamma_weights(0.5, 0.4) {
            Err(e @ Error::AngleExceedsDelta { .. }) => {
                assert!(alloc::string::ToString::to_string(&e).contains("increase N"))
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(gamma_weights(0.1, PI), Err(Error::InvalidDelta(_))));
        assert!(matches!(gamma_weights(0.0, 0.0), Err(Error::InvalidDelta(_))));
    }

    proptest! {
        #[test]
        fn weight_invariants(delta in 1e-4f64..3.0, frac in 0.0f64..=1.0) {
            let theta = delta * frac;
            let w = gamma_weights(theta, delta).unwrap();
            prop_assert!(w.gamma3 <= 0.0);
            prop_assert!(w.gamma1 >= 0.0 && w.gamma2 >= 0.0);
            prop_assert!((w.p1 + w.p2 + w.p3 - 1.0).abs() < 1e-14);
            prop_assert!((w.p1 + w.p_gate - 1.0).abs() < 1e-14);
            let closed = (delta / 2.0 - theta).cos() / (delta / 2.0).cos();
            prop_assert!((w.l1 - closed).abs() < 1e-13 * closed);
            prop_assert!((w.ln_l1 - w.l1.ln()).abs() < 1e-13);
            // alternative closed form of p1
            let alt = ((delta - theta).sin() + delta.sin() - theta.sin())
                / (2.0 * ((delta - theta).sin() + theta.sin()));
            prop_assert!((w.p1 - alt).abs() < 1e-12);
        }
    }

    #[test]
    fn log_l1_tiny_angle() {
        let delta = PI / 128.0;
        let theta = 1e-9;
        let w = gamma_weights(theta, delta).unwrap();
        // ln(1+x) ~ x for x = theta tan(delta/2) - theta^2/2
        let x = theta * (delta / 2.0).tan() - theta * theta / 2.0;
        assert!((w.ln_l1 - x).abs() < 1e-6 * x);
    }

    fn constant_h(n: usize, terms: &[(f64, &str)]) -> Hamiltonian {
        Hamiltonian::constant(
            n,
            terms.iter().map(|(c, s)| (*c, PauliString::parse(s, n).unwrap())),
            "t",
        )
        .unwrap()
    }

    #[test]
    fn zero_template_gives_empty_circuit() {
        let h = constant_h(2, &[(0.0, "X0"), (0.0, "Z1")]);
        let tpl = TrotterTemplate::new(&h, 1.0, 50).unwrap();
        let c = sample_circuit(tpl, 0.1, 9).unwrap();
        assert!(c.gates.is_empty());
        assert_eq!((c.sign, c.overhead), (1, 1.0));
        assert_eq!(exact_overhead(tpl, 0.1).unwrap(), 1.0);
    }

    #[test]
    fn notch_template_has_unit_overhead_and_full_count() {
        // theta = 2 c T / N = delta exactly
        let delta = 0.01;
        let h = constant_h(1, &[(0.5 * delta * 100.0, "X0")]);
        let tpl = TrotterTemplate::new(&h, 1.0, 100).unwrap();
        let plan = SamplingPlan::new(tpl, delta).unwrap();
        assert!((plan.overhead() - 1.0).abs() < 1e-12);
        assert!((plan.expected_gate_count() - 100.0).abs() < 1e-9);
        let c = plan.sample(3);
        assert_eq!(c.nu(), 100);
        assert!(c.gates.iter().all(|g| g.angle == GateAngle::PlusDelta));
    }

    #[test]
    fn precondition_from_template() {
        let h = constant_h(1, &[(10.0, "X0")]);
        let tpl = TrotterTemplate::new(&h, 1.0, 10).unwrap();
        assert!(matches!(
            SamplingPlan::new(tpl, 0.5),
            Err(Error::AngleExceedsDelta { .. })
        ));
    }

    #[test]
    fn negative_coefficients_use_minus_delta() {
        let h = constant_h(1, &[(-1.0, "Z0")]);
        let tpl = TrotterTemplate::new(&h, 1.0, 100).unwrap();
        let plan = SamplingPlan::new(tpl, 0.1).unwrap();
        for s in 0..20 {
            let c = plan.sample(s);
            assert!(c
                .gates
                .iter()
                .all(|g| matches!(g.angle, GateAngle::MinusDelta | GateAngle::Pi)));
        }
    }

    #[test]
    fn sign_and_count_match_gate_list() {
        let h = build_spin_ring(4, 2).unwrap();
        let tpl = TrotterTemplate::new(&h, 1.0, 200).unwrap();
        let plan = SamplingPlan::new(tpl, PI / 16.0).unwrap();
        for i in 0..50 {
            let c = plan.sample_indexed(11, i);
            let pis = c.gates.iter().filter(|g| g.angle == GateAngle::Pi).count();
            assert_eq!(c.sign, if pis % 2 == 0 { 1 } else { -1 });
            assert_eq!(c.overhead, plan.overhead());
            let mut last = (0u32, 0u32);
            for g in &c.gates {
                assert!((g.step, g.term) > last || last == (0, 0));
                last = (g.step, g.term);
            }
        }
    }

    #[test]
    fn draws_are_reproducible_and_position_addressable() {
        let h = build_spin_ring(3, 5).unwrap();
        let tpl = TrotterTemplate::new(&h, 0.5, 40).unwrap();
        let plan = SamplingPlan::new(tpl, PI / 32.0).unwrap();
        let seed = rng::derive_seed(1, Domain::Circuit, 17);
        assert_eq!(plan.sample(seed), plan.sample(seed));
        // recompute each position independently from its stream offset
        let l = tpl.n_terms();
        let mut manual = Vec::new();
        for (p, (k, j, theta)) in tpl.angles().enumerate() {
            let (t, _) = Thresholds::new(theta, PI / 32.0).unwrap();
            let u = rng::uniform_at(seed, p as u64);
            if u >= t.identity {
                manual.push((k, j, u < t.not_pi));
            }
        }
        let got: Vec<_> = plan
            .sample(seed)
            .gates
            .iter()
            .map(|g| (g.term as usize, g.step as usize, g.angle != GateAngle::Pi))
            .collect();
        assert_eq!(manual, got);
        assert_eq!(l, 12);
    }

    #[test]
    fn time_dependent_caches_agree() {
        let h = build_spin_ring(3, 1).unwrap();
        let tpl = TrotterTemplate::new(&h, 1.0, 500).unwrap();
        let full = SamplingPlan::new(tpl, PI / 16.0).unwrap();
        assert!(matches!(full.cache, Cache::Full(_)));
        let mut lazy = full.clone();
        lazy.cache = Cache::Lazy;
        for s in 0..5 {
            assert_eq!(full.sample(s), lazy.sample(s));
        }
    }

    #[test]
    fn statistics_match_plan() {
        let h = build_spin_ring(3, 6).unwrap();
        let tpl = TrotterTemplate::new(&h, 0.7, 300).unwrap();
        let plan = SamplingPlan::new(tpl, PI / 32.0).unwrap();
        let st = template_statistics(tpl, PI / 32.0).unwrap();
        assert!((st.log_overhead - plan.log_overhead()).abs() < 1e-12);
        assert!((st.nu_mean - plan.expected_gate_count()).abs() < 1e-9);
        assert!((st.nu_var - plan.gate_count_variance()).abs() < 1e-9);
    }

    #[test]
    fn empirical_count_matches_expectation() {
        let h = build_spin_ring(4, 3).unwrap();
        let tpl = TrotterTemplate::new(&h, 1.0, 300).unwrap();
        let plan = SamplingPlan::new(tpl, PI / 32.0).unwrap();
        let m = 2000;
        let counts: Vec<f64> = (0..m).map(|i| plan.sample_indexed(4, i).nu() as f64).collect();
        let mean = counts.iter().sum::<f64>() / m as f64;
        let var = plan.gate_count_variance();
        assert!(var <= plan.expected_gate_count());
        assert!((mean - plan.expected_gate_count()).abs() < 4.0 * (var / m as f64).sqrt());
    }

    #[test]
    fn identity_observable_sign_average() {
        // E[overhead * sign] = 1 since the decomposition preserves the trace
        let h = constant_h(1, &[(1.0, "X0"), (0.7, "Z0")]);
        let tpl = TrotterTemplate::new(&h, 1.0, 100).unwrap();
        let plan = SamplingPlan::new(tpl, PI / 8.0).unwrap();
        let m = 20000;
        let s: Vec<f64> = (0..m).map(|i| plan.sample_indexed(8, i).weight()).collect();
        let mean = s.iter().sum::<f64>() / m as f64;
        let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        assert!((mean - 1.0).abs() < 4.0 * (var / m as f64).sqrt(), "{mean}");
    }

    #[test]
    fn qdrift_single_term_is_deterministic() {
        let h = constant_h(1, &[(-0.8, "Z0")]);
        let c = sample_qdrift(&h, 0.5, 10, 1).unwrap();
        assert_eq!(c.nu(), 10);
        for g in &c.gates {
            assert_eq!(g.term, 0);
            assert_eq!(g.angle, GateAngle::Free(-2.0 * 0.5 * 0.8 / 10.0));
        }
        assert_eq!((c.sign, c.overhead), (1, 1.0));
    }

    #[test]
    fn qdrift_equal_weights_split_evenly() {
        let h = constant_h(1, &[(1.0, "X0"), (-1.0, "Z0")]);
        let plan = QDriftPlan::new(&h, 1.0, 1).unwrap();
        let m = 10_000;
        let first = (0..m)
            .filter(|&i| plan.sample_indexed(2, i).gates[0].term == 0)
            .count() as f64;
        let sigma = (m as f64 * 0.25).sqrt();
        assert!((first - m as f64 / 2.0).abs() < 3.0 * sigma, "{first}");
    }

    #[test]
    fn qdrift_rejects_time_dependence() {
        let h = build_spin_ring(3, 1).unwrap();
        assert!(matches!(
            QDriftPlan::new(&h, 1.0, 10),
            Err(Error::TimeDependentUnsupported)
        ));
        let h = Hamiltonian::new(
            1,
            vec![Term {
                pauli: PauliString::parse("X0", 1).unwrap(),
                schedule: CoefficientSchedule::Constant(1.0),
            }],
            "x",
        )
        .unwrap();
        assert!(QDriftPlan::new(&h, 1.0, 0).is_err());
    }
}
