//! Fault-tolerant T-gate and qubit accounting for fixed-angle rotations.
//!
//! Rotations by `delta_l = pi 2^(1-l)` sit at level `l` of the Clifford
//! hierarchy and can be teleported repeat-until-success from stored resource
//! states, so circuits built from one fixed `delta` avoid per-gate synthesis.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // float methods when std is absent
use num_traits::Float;

use crate::analytics::nu_infinity;
use crate::error::{Error, Result};

/// Expected repeat-until-success trials, `sum_i i / 2^i = 2`.
pub fn rus_expected_trials() -> f64 {
    2.0
}

/// `sum_{i=1}^{n} i / 2^i`.
pub fn rus_partial_sum(n: u32) -> f64 {
    (1..=n).map(|i| i as f64 / (1u64 << i) as f64).sum()
}

/// At level `l` every failure doubles the angle, so after `l - 3` failures
/// the correction is a T gate, which is applied directly.
pub fn rus_max_failures(level: u32) -> u32 {
    level.saturating_sub(3)
}

/// Average T count of single-rotation synthesis to precision `epsilon`,
/// `3.02 log2(1/eps) + 1.77`, rounded to the nearest integer.
pub fn synthesis_t_count(epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    Ok((3.02 * (1.0 / epsilon).log2() + 1.77).round() as u64)
}

pub fn hierarchy_angle(level: u32) -> f64 {
    PI * 2f64.powi(1 - level as i32)
}

/// The level `l` with `delta = pi 2^(1-l)`.
pub fn hierarchy_level(delta: f64) -> Result<u32> {
    if !(delta > 0.0 && delta < PI) {
        return Err(Error::InvalidDelta(delta));
    }
    let exact = 1.0 - (delta / PI).log2();
    let nearest = exact.round().max(2.0) as u32;
    let nearest_delta = hierarchy_angle(nearest);
    if (delta / nearest_delta - 1.0).abs() > 1e-9 {
        return Err(Error::NotHierarchyAngle {
            delta,
            nearest_level: nearest,
            nearest_delta,
        });
    }
    Ok(nearest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    TrotterDirect,
    DirectSynthesis,
    HammingPhasing,
    CatalystTower,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::TrotterDirect => "trotter_direct",
            Method::DirectSynthesis => "direct_synthesis",
            Method::HammingPhasing => "hamming_phasing",
            Method::CatalystTower => "catalyst_tower",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceReport {
    pub method: Method,
    pub t_gates: u64,
    pub storage_qubits: Option<u64>,
    pub ancilla_qubits: Option<u64>,
    /// Rotations powered, `K`.
    pub rotations: u64,
    pub l0: Option<u32>,
    pub epsilon: Option<f64>,
    /// Amortised T gates per rotation.
    pub t_per_rotation: f64,
    /// Repetitions of the per-round preparation.
    pub rounds: Option<u64>,
}

/// `K` rotations each synthesised to precision `epsilon`.
pub fn direct_synthesis_report(k: u64, epsilon: f64) -> Result<ResourceReport> {
    let per = synthesis_t_count(epsilon)?;
    Ok(ResourceReport {
        method: Method::DirectSynthesis,
        t_gates: k * per,
        storage_qubits: None,
        ancilla_qubits: None,
        rotations: k,
        l0: None,
        epsilon: Some(epsilon),
        t_per_rotation: per as f64,
        rounds: None,
    })
}

/// Cost of phasing `n` identical rotations through a Hamming-weight register:
/// `c_syn floor(log2 n + 1) + 4 (n - 1)`.
pub fn hamming_weight_cost(n: u64, c_syn: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let bits = (u64::BITS - n.leading_zeros()) as u64;
    c_syn * bits + 4 * (n - 1)
}

/// Resource states kept at level `l`: `n_l = 2^(l-4)`.
pub fn storage_at_level(level: u32) -> u64 {
    1u64 << (level - 4)
}

fn check_l0(l0: u32) -> Result<()> {
    if !(4..=40).contains(&l0) {
        return Err(Error::InvalidParameter(format!("l0 = {l0} must lie in 4..=40")));
    }
    Ok(())
}

/// T-states consumed per round at level 3 by the Hamming-phasing chain.
pub const HAMMING_LEVEL3_STATES: u64 = 1;

/// Refills `n_l` states at every level `4..=l0` by Hamming-weight phasing,
/// once per `n_l0` rotations.
pub fn hamming_phasing_report(k: u64, l0: u32, c_syn: u64) -> Result<ResourceReport> {
    check_l0(l0)?;
    let per_round: u64 = (4..=l0)
        .map(|l| hamming_weight_cost(storage_at_level(l), c_syn))
        .sum::<u64>()
        + HAMMING_LEVEL3_STATES;
    let top = storage_at_level(l0);
    let rounds = k.div_ceil(top);
    Ok(ResourceReport {
        method: Method::HammingPhasing,
        t_gates: rounds * per_round,
        storage_qubits: Some((4..=l0).map(storage_at_level).sum()),
        ancilla_qubits: Some((4..=l0).map(|l| storage_at_level(l) - 1).sum()),
        rotations: k,
        l0: Some(l0),
        epsilon: None,
        t_per_rotation: per_round as f64 / top as f64,
        rounds: Some(rounds),
    })
}

/// Explicit catalyst-tower layout for one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerLayout {
    pub l0: u32,
    /// `(level, CT circuits)` from the top level down to level 4.
    pub ct_per_layer: Vec<(u32, u64)>,
    pub ct_total: u64,
    /// T gates fed directly into the bottom layer.
    pub final_t: u64,
    pub t_per_round: u64,
    pub ancilla: u64,
    pub storage: u64,
}

/// T gates per catalyst circuit.
pub const T_PER_CT: u64 = 4;

/// Builds the tower layer by layer. Layer `l` must supply the `n_l` stored
/// states plus one state per CT circuit of layer `l + 1`; each CT circuit
/// yields two states, so it holds `ceil((n_l + CT_{l+1}) / 2)` circuits.
pub fn catalyst_tower_layout(l0: u32) -> Result<TowerLayout> {
    check_l0(l0)?;
    let mut layers = Vec::new();
    let mut above = 0u64;
    for l in (4..=l0).rev() {
        let ct = (storage_at_level(l) + above).div_ceil(2);
        layers.push((l, ct));
        above = ct;
    }
    let ct_total: u64 = layers.iter().map(|&(_, c)| c).sum();
    let final_t = above;
    Ok(TowerLayout {
        l0,
        ct_per_layer: layers,
        ct_total,
        final_t,
        t_per_round: T_PER_CT * ct_total + final_t,
        ancilla: ct_total,
        storage: (4..=l0).map(storage_at_level).sum(),
    })
}

/// Closed form of `t_per_round`.
pub fn tower_t_per_round_closed(l0: u32) -> u64 {
    let p = 1u64 << l0;
    let l = l0 as u64;
    if l0 % 2 == 1 {
        (p + 1 - 3 * l) / 2
    } else {
        (p + 6 - 3 * l) / 2
    }
}

/// Closed form of the CT count (= ancilla), `ceil((2^(l0-2) - l0 + 1) / 2)`.
pub fn tower_ct_total_closed(l0: u32) -> u64 {
    ((1u64 << (l0 - 2)) + 1 - l0 as u64).div_ceil(2)
}

pub fn catalyst_tower_report(k: u64, l0: u32) -> Result<ResourceReport> {
    let layout = catalyst_tower_layout(l0)?;
    let top = storage_at_level(l0);
    let rounds = k.div_ceil(top);
    Ok(ResourceReport {
        method: Method::CatalystTower,
        t_gates: rounds * layout.t_per_round,
        storage_qubits: Some(layout.storage),
        ancilla_qubits: Some(layout.ancilla),
        rotations: k,
        l0: Some(l0),
        epsilon: None,
        t_per_rotation: layout.t_per_round as f64 / top as f64,
        rounds: Some(rounds),
    })
}

/// Every continuous Trotter rotation synthesised individually.
pub fn trotter_direct_report(steps: u64, terms: u64, epsilon: f64) -> Result<ResourceReport> {
    let mut r = direct_synthesis_report(steps * terms, epsilon)?;
    r.method = Method::TrotterDirect;
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Params {
    pub c_norm_avg: f64,
    pub time: f64,
    pub delta: f64,
    pub trotter_steps: u64,
    pub n_terms: u64,
    pub eps_pai: f64,
    pub eps_trotter: f64,
}

impl Default for Table1Params {
    /// The 100-qubit ring setting.
    fn default() -> Self {
        Table1Params {
            c_norm_avg: 241.3,
            time: 1.0,
            delta: PI / 256.0,
            trotter_steps: 10_000,
            n_terms: 400,
            eps_pai: 1e-6,
            eps_trotter: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub params: Table1Params,
    pub nu_inf: f64,
    /// `round(nu_inf)`
    pub k: u64,
    pub l0: u32,
    pub rows: Vec<ResourceReport>,
}

/// Compares the four costings; `delta` must be a hierarchy angle.
pub fn table1(p: Table1Params) -> Result<Table1> {
    let l0 = hierarchy_level(p.delta)?;
    check_l0(l0)?;
    let nu_inf = nu_infinity(p.c_norm_avg * p.time, p.delta)?;
    let k = nu_inf.round() as u64;
    let c_syn = synthesis_t_count(p.eps_pai)?;
    let rows = alloc::vec![
        trotter_direct_report(p.trotter_steps, p.n_terms, p.eps_trotter)?,
        direct_synthesis_report(k, p.eps_pai)?,
        hamming_phasing_report(k, l0, c_syn)?,
        catalyst_tower_report(k, l0)?,
    ];
    Ok(Table1 {
        params: p,
        nu_inf,
        k,
        l0,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rus_sums() {
        assert_eq!(rus_expected_trials(), 2.0);
        // tail of sum i/2^i after n terms is (n + 2) / 2^n
        let s = rus_partial_sum(20);
        assert!((2.0 - s - 22.0 / (1u64 << 20) as f64).abs() < 1e-15);
        assert_eq!(rus_max_failures(9), 6);
        assert_eq!(rus_max_failures(3), 0);
    }

    #[test]
    fn synthesis_counts() {
        assert_eq!(synthesis_t_count(1e-6).unwrap(), 62);
        assert_eq!(synthesis_t_count(1e-8).unwrap(), 82);
        assert_eq!(synthesis_t_count(0.5).unwrap(), 5);
        let a = synthesis_t_count(1e-10).unwrap() as i64;
        let b = synthesis_t_count(5e-11).unwrap() as i64;
        assert!((b - a - 3).abs() <= 1);
        assert!(synthesis_t_count(1.0).is_err());
    }

    #[test]
    fn hierarchy() {
        assert_eq!(hierarchy_angle(3), PI / 4.0);
        assert_eq!(hierarchy_level(PI / 256.0).unwrap(), 9);
        assert_eq!(hierarchy_level(PI / 4.0).unwrap(), 3);
        match hierarchy_level(PI / 250.0) {
            Err(Error::NotHierarchyAngle { nearest_level, .. }) => assert_eq!(nearest_level, 9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn direct_synthesis() {
        assert_eq!(direct_synthesis_report(39_328, 1e-6).unwrap().t_gates, 2_438_336);
        assert_eq!(direct_synthesis_report(0, 1e-6).unwrap().t_gates, 0);
        assert_eq!(trotter_direct_report(10_000, 400, 1e-8).unwrap().t_gates, 328_000_000);
    }

    #[test]
    fn hamming() {
        assert_eq!(hamming_weight_cost(32, 62), 62 * 6 + 4 * 31);
        assert_eq!(hamming_weight_cost(32, 62), 496);
        let r = hamming_phasing_report(39_328, 9, 62).unwrap();
        assert_eq!(r.storage_qubits, Some(63));
        assert_eq!(r.ancilla_qubits, Some(57));
        assert_eq!(r.rounds, Some(1229));
        let rel = (r.t_gates as f64 - 1_880_980.0).abs() / 1_880_980.0;
        assert!(rel < 0.01, "{} {rel}", r.t_gates);
    }

    #[test]
    fn tower_layout_top_layers() {
        let t = catalyst_tower_layout(9).unwrap();
        let counts: Vec<u64> = t.ct_per_layer.iter().map(|&(_, c)| c).collect();
        assert_eq!(counts, [16, 16, 12, 8, 5, 3]);
        assert_eq!((t.t_per_round, t.ancilla, t.storage), (243, 60, 63));
        let t = catalyst_tower_layout(4).unwrap();
        assert_eq!((t.t_per_round, t.ancilla), (5, 1));
    }

    #[test]
    fn tower_closed_forms() {
        for l0 in 4..=16 {
            let t = catalyst_tower_layout(l0).unwrap();
            assert_eq!(t.t_per_round, tower_t_per_round_closed(l0), "l0={l0}");
            assert_eq!(t.ct_total, tower_ct_total_closed(l0), "l0={l0}");
            assert_eq!(t.t_per_round, 4 * t.ct_total + (l0 as u64 - 3).div_ceil(2));
            assert_eq!(t.storage, (1u64 << (l0 - 3)) - 1);
            let per = catalyst_tower_report(1, l0).unwrap().t_per_rotation;
            assert!(per <= 8.0, "l0={l0} per={per}");
        }
    }

    #[test]
    fn tower_rounds() {
        let r = catalyst_tower_report(39_328, 9).unwrap();
        assert_eq!(r.t_gates, 298_647);
        assert!((r.t_per_rotation - 243.0 / 32.0).abs() < 1e-12);
        assert_eq!(catalyst_tower_report(64, 9).unwrap().t_gates, 486);
    }

    #[test]
    fn method_ordering() {
        // Towers always beat Hamming phasing; Hamming phasing only beats
        // direct synthesis once l0 >= 9, below that the small registers pay
        // a full synthesis per bit.
        let c_syn = 62;
        for l0 in 6..=12 {
            for k in [1_000u64, 10_000, 123_457] {
                let cat = catalyst_tower_report(k, l0).unwrap().t_gates;
                let ham = hamming_phasing_report(k, l0, c_syn).unwrap().t_gates;
                let dir = k * c_syn;
                assert!(cat <= ham, "l0={l0} k={k}: {cat} {ham}");
                assert_eq!(ham <= dir, l0 >= 9, "l0={l0} k={k}: {ham} {dir}");
            }
        }
    }

    #[test]
    fn default_table() {
        let t = table1(Table1Params::default()).unwrap();
        assert_eq!((t.k, t.l0), (39_328, 9));
        let g: Vec<u64> = t.rows.iter().map(|r| r.t_gates).collect();
        assert_eq!(g[0], 328_000_000);
        assert_eq!(g[1], 2_438_336);
        assert_eq!(g[3], 298_647);
        let zero = table1(Table1Params {
            c_norm_avg: 0.0,
            trotter_steps: 0,
            ..Table1Params::default()
        })
        .unwrap();
        assert!(zero.rows.iter().all(|r| r.t_gates == 0));
        assert!(table1(Table1Params {
            delta: 0.013,
            ..Table1Params::default()
        })
        .is_err());
    }
}
