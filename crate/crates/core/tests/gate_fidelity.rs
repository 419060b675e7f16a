use std::f64::consts::PI;

use zeno_gate::experiments::{
    computational_basis, decoherent_fidelity, dissipative_basis, gate_time, run_fig3, run_fig4,
    run_truth_table, unitary_fidelity, ExperimentConfig, TRUTH_FIDELITY,
};
use zeno_gate::gates::{wrap_phase, InputState};
use zeno_gate::hilbert::SystemLayout;
use zeno_gate::model::{
    Couplings, DecoherenceParams, GammaSpec, HamiltonianSpec, ModelConfig, PulseParams, RateSpec,
};
use zeno_gate::units::rate_from_lifetime;
use zeno_gate::zeno::Regime;

fn layout3() -> SystemLayout {
    SystemLayout::with_qubits(3).unwrap()
}

fn pulse(regime: Regime) -> PulseParams {
    match regime {
        Regime::NonResonant => PulseParams::new(0.1, 1.0).unwrap(),
        Regime::Resonant => PulseParams::new(0.1, 0.0).unwrap(),
    }
}

fn with_omega(omega: f64) -> ExperimentConfig {
    ExperimentConfig {
        model: ModelConfig {
            omega: Some(omega),
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn truth_table_phases_at_reference_drive() {
    let table = run_truth_table(&ExperimentConfig::default(), Regime::NonResonant).unwrap();
    for row in &table.rows {
        let target = if row.flagged { PI } else { 0.0 };
        assert!(wrap_phase(row.phase - target).abs() <= 0.05, "{row:?}");
        assert!(row.fidelity >= 0.95, "{row:?}");
    }
    // At Omega = 0.1 g the two mixed sectors f g s / g f s leak about 3.7 %
    // into the bright states at t = tau, short of the 0.98 mark; every other
    // row clears it.
    let failing: Vec<&str> = table
        .rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.input.as_str())
        .collect();
    assert_eq!(failing, vec!["f1 g2 sA | 0 0", "g1 f2 sA | 0 0"]);
    let fgs = table
        .rows
        .iter()
        .find(|r| r.input == "f1 g2 sA | 0 0")
        .unwrap();
    assert!((fgs.fidelity - 0.963).abs() < 1e-3);
    assert!(fgs.fidelity < TRUTH_FIDELITY);
}

#[test]
fn truth_table_passes_at_weaker_drive() {
    for omega in [0.05, 0.025] {
        let table = run_truth_table(&with_omega(omega), Regime::NonResonant).unwrap();
        assert!(table.all_pass(), "omega {omega}: {:?}", table.rows);
        let table = run_truth_table(&with_omega(omega), Regime::Resonant).unwrap();
        assert!(table.all_pass(), "omega {omega} resonant: {:?}", table.rows);
    }
}

#[test]
fn frozen_inputs_are_exactly_stationary() {
    let table = run_truth_table(&ExperimentConfig::default(), Regime::NonResonant).unwrap();
    for label in [
        "f1 f2 fA | 0 0",
        "f1 g2 fA | 0 0",
        "g1 f2 fA | 0 0",
        "g1 g2 fA | 0 0",
    ] {
        let row = table.rows.iter().find(|r| r.input == label).unwrap();
        assert_eq!(row.fidelity, 1.0);
        assert_eq!(row.phase, 0.0);
    }
}

#[test]
fn coupling_sweep_stays_above_ninety_five_percent() {
    for regime in [Regime::NonResonant, Regime::Resonant] {
        let out = run_fig3(&ExperimentConfig::default(), regime).unwrap();
        assert_eq!(out.rows.len(), 21 * 21);
        let center = out.fidelity_at(0.0, 0.0).unwrap();
        let min = out.min_fidelity();
        assert!(
            center >= 0.95 && min >= 0.95,
            "{regime:?}: center {center}, min {min}"
        );
        assert!(center - min <= 0.05);
    }
}

/// Input amplitudes relabelled under qubit 1 <-> 2. Bits are (q1, A, q2).
fn swapped(input: &InputState) -> InputState {
    let mut out = input.amplitudes.clone();
    for (i, c) in input.amplitudes.iter().enumerate() {
        let (q1, a, q2) = ((i >> 2) & 1, (i >> 1) & 1, i & 1);
        out[(q2 << 2) | (a << 1) | q1] = *c;
    }
    InputState::new(out).unwrap()
}

#[test]
fn coupling_sweep_exchange_symmetry() {
    let layout = layout3();
    let basis = computational_basis(&layout).unwrap();
    let c = InputState::reference_three_qubit();
    let c_swapped = swapped(&c);
    let uniform = InputState::uniform(3);
    for regime in [Regime::NonResonant, Regime::Resonant] {
        let p = pulse(regime);
        let t = gate_time(&p, 3, regime).unwrap();
        let f = |dg1: f64, dg2: f64, input: &InputState| {
            let spec = HamiltonianSpec::new(
                layout,
                p,
                Couplings::with_mismatch(&layout, &[dg1, dg2]).unwrap(),
            )
            .unwrap();
            unitary_fidelity(&spec, &basis, input, t).unwrap()
        };
        for (a, b) in [(0.1, -0.05), (-0.1, 0.03), (0.07, 0.1)] {
            assert!((f(a, b, &uniform) - f(b, a, &uniform)).abs() <= 1e-10);
            assert!((f(a, b, &c) - f(b, a, &c_swapped)).abs() <= 1e-10);
        }
        // the weighted input itself is not swap-symmetric
        assert!((f(-0.1, 0.0, &c) - f(0.0, -0.1, &c)).abs() > 1e-4);
    }
}

fn fig4_point(regime: Regime, kappa: f64, gamma: f64) -> f64 {
    let cfg = ExperimentConfig {
        model: ModelConfig {
            kappa: Some(RateSpec::Uniform(kappa)),
            gamma: Some(GammaSpec::Uniform(gamma)),
            ..Default::default()
        },
        ..Default::default()
    };
    let out = run_fig4(&cfg, regime).unwrap();
    assert_eq!(out.rows.len(), 1);
    out.rows[0][2]
}

#[test]
fn closed_limit_matches_unitary_fidelity() {
    let layout = layout3();
    let input = InputState::reference_three_qubit();
    for regime in [Regime::NonResonant, Regime::Resonant] {
        let p = pulse(regime);
        let t = gate_time(&p, 3, regime).unwrap();
        let spec = HamiltonianSpec::ideal(layout, p).unwrap();
        let unitary =
            unitary_fidelity(&spec, &computational_basis(&layout).unwrap(), &input, t).unwrap();
        let mixed = fig4_point(regime, 0.0, 0.0);
        assert!(
            (unitary - mixed).abs() <= 1e-4,
            "{regime:?}: {unitary} vs {mixed}"
        );
    }
}

#[test]
fn fidelity_falls_with_decoherence() {
    for regime in [Regime::NonResonant, Regime::Resonant] {
        let f: Vec<f64> = [0.0, 0.05, 0.1]
            .iter()
            .map(|&r| fig4_point(regime, r, r))
            .collect();
        assert!(f[0] >= f[1] && f[1] >= f[2], "{regime:?}: {f:?}");
    }
}

#[test]
fn dominant_decoherence_channel_depends_on_regime() {
    let a_cavity = fig4_point(Regime::NonResonant, 0.1, 0.0);
    let a_qudit = fig4_point(Regime::NonResonant, 0.0, 0.1);
    assert!(a_cavity < a_qudit, "dispersive: {a_cavity} vs {a_qudit}");
    let b_cavity = fig4_point(Regime::Resonant, 0.1, 0.0);
    let b_qudit = fig4_point(Regime::Resonant, 0.0, 0.1);
    assert!(b_qudit < b_cavity, "resonant: {b_cavity} vs {b_qudit}");
}

#[test]
fn laboratory_rates_give_high_fidelity() {
    let layout = layout3();
    let params = DecoherenceParams::uniform(
        &layout,
        rate_from_lifetime(1e-6, 360.0),
        rate_from_lifetime(25e-6, 360.0),
    );
    let regime = Regime::Resonant;
    let p = pulse(regime);
    let spec = HamiltonianSpec::ideal(layout, p).unwrap();
    let basis = dissipative_basis(&layout).unwrap();
    let t = gate_time(&p, 3, regime).unwrap();
    let f = decoherent_fidelity(
        &spec,
        &basis,
        &InputState::reference_three_qubit(),
        &params,
        t,
    )
    .unwrap();
    assert!(f > 0.95, "{f}");
}

#[test]
fn target_phase_is_tunable_in_the_dispersive_regime() {
    // evolve for half the gate time: the flagged state picks up pi/2
    let p = pulse(Regime::NonResonant);
    let t = gate_time(&p, 3, Regime::NonResonant).unwrap() / 2.0;
    let cfg = ExperimentConfig {
        duration: Some(t),
        ..Default::default()
    };
    let table = run_truth_table(&cfg, Regime::NonResonant).unwrap();
    let flagged = table.rows.iter().find(|r| r.flagged).unwrap();
    assert!(
        (flagged.phase - PI / 2.0).abs() <= 0.05,
        "{}",
        flagged.phase
    );
}
