//! Figure and table runners behind the command-line interface.
//!
//! Each runner resolves an [`ExperimentConfig`] against regime defaults, runs
//! the simulation, and returns a value that can be written as CSV. Every CSV
//! starts with `#` comment lines holding the resolved parameters as JSON.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    default_interval, propagate_density, propagate_state, DensityMatrix, Probe, StateVector,
    TimeSeries, DEFAULT_SAMPLES,
};
use crate::error::{Error, Result};
use crate::gates::{
    mixed_fidelity, partial_trace_modes, pure_fidelity, wrap_phase, ComputationalEncoding,
    GateSpec, InputState,
};
use crate::hilbert::{enumerate_reachable, BasisState, SubspaceBasis, SystemLayout};
use crate::model::{
    build_h2, build_hamiltonian, build_jump_operators, hamiltonian_generators, jump_generators,
    Couplings, DecoherenceParams, HamiltonianSpec, ModelConfig, PulseParams,
};
use crate::operator::OperatorMatrix;
use crate::units::ns_per_gt;
use crate::zeno::{
    dark_state, diagonalize_h2, nonresonant_gate_time, reference_eigenvectors, reference_spectrum,
    resonant_gate_time, Regime, Sector,
};

/// Default drive strength, in units of `g`.
pub const DEFAULT_OMEGA: f64 = 0.1;
/// Default detuning outside the resonant regime.
pub const DEFAULT_DELTA: f64 = 1.0;
pub const FIG3_GRID: usize = 21;
pub const FIG3_RANGE: f64 = 0.1;
pub const FIG4_GRID: usize = 11;
pub const FIG4_RANGE: f64 = 0.1;
/// Truth-table pass thresholds.
pub const TRUTH_FIDELITY: f64 = 0.98;
pub const TRUTH_PHASE: f64 = 0.05;

/// Run settings. Model keys live under `[model]`; everything is optional
/// and falls back to the defaults of the chosen experiment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: ModelConfig,
    /// Evolution time in `1/g`; defaults to the gate time.
    pub duration: Option<f64>,
    pub samples: Option<usize>,
    /// Points per sweep axis.
    pub grid_points: Option<usize>,
    /// Sweep axes run over `[-max, max]` (fig3) or `[0, max]` (fig4).
    pub sweep_max: Option<f64>,
    /// Fixed data-coupling mismatch `g_i - g`, used when `model.g_data` is unset.
    pub dg: Option<Vec<f64>>,
    /// Coupling strength in MHz; adds physical-time columns.
    pub g_mhz: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    fn layout(&self, default_qubits: usize) -> Result<SystemLayout> {
        SystemLayout::new(
            self.model.n_qubits.unwrap_or(default_qubits),
            self.model.n_max.unwrap_or(1),
        )
    }

    fn pulse(&self, regime: Regime) -> Result<PulseParams> {
        let delta = match regime {
            Regime::NonResonant => DEFAULT_DELTA,
            Regime::Resonant => 0.0,
        };
        PulseParams::new(
            self.model.omega.unwrap_or(DEFAULT_OMEGA),
            self.model.delta.unwrap_or(delta),
        )
    }

    fn couplings(&self, layout: &SystemLayout) -> Result<Couplings> {
        let mut c = match (&self.model.g_data, &self.dg) {
            (Some(g), _) => Couplings {
                g_data: g.clone(),
                g_central: 1.0,
            },
            (None, Some(dg)) => Couplings::with_mismatch(layout, dg)?,
            (None, None) => Couplings::uniform(layout),
        };
        if let Some(ga) = self.model.g_central {
            c.g_central = ga;
        }
        c.validate(layout)?;
        Ok(c)
    }

    fn spec(&self, regime: Regime, default_qubits: usize) -> Result<HamiltonianSpec> {
        let layout = self.layout(default_qubits)?;
        HamiltonianSpec::new(layout, self.pulse(regime)?, self.couplings(&layout)?)
    }

    fn decoherence(&self, layout: &SystemLayout) -> Result<DecoherenceParams> {
        let mut m = self.model.clone();
        m.n_qubits = Some(layout.n_qubits());
        m.decoherence()
    }
}

/// Gate time of the chosen regime: phase `pi` on the flagged state.
pub fn gate_time(pulse: &PulseParams, n_qubits: usize, regime: Regime) -> Result<f64> {
    match regime {
        Regime::NonResonant => nonresonant_gate_time(pulse, n_qubits, PI),
        Regime::Resonant => resonant_gate_time(pulse, n_qubits),
    }
}

/// Parameters as actually used, echoed into CSV headers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMeta {
    pub experiment: String,
    pub regime: Option<Regime>,
    pub n_qubits: usize,
    pub n_max: u8,
    pub omega: f64,
    pub delta: f64,
    pub g_data: Vec<f64>,
    pub g_central: f64,
    pub gate_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<[f64; 3]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_mhz: Option<f64>,
}

impl RunMeta {
    fn new(experiment: &str, regime: Option<Regime>, spec: &HamiltonianSpec) -> Self {
        Self {
            experiment: experiment.to_string(),
            regime,
            n_qubits: spec.layout.n_qubits(),
            n_max: spec.layout.n_max(),
            omega: spec.pulse.omega,
            delta: spec.pulse.delta,
            g_data: spec.couplings.g_data.clone(),
            g_central: spec.couplings.g_central,
            gate_time: None,
            duration: None,
            samples: None,
            grid_points: None,
            sweep_max: None,
            kappa: None,
            gamma: None,
            g_mhz: None,
        }
    }

    pub fn comment_lines(&self) -> Vec<String> {
        vec![
            format!("zeno-gate {}", self.experiment),
            format!(
                "config {}",
                serde_json::to_string(self).expect("meta serializes")
            ),
        ]
    }
}

fn write_comments<W: Write>(out: &mut W, meta: &RunMeta) -> std::io::Result<()> {
    for line in meta.comment_lines() {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

/// A sampled time series (figs. 2 and 6).
#[derive(Clone, Debug)]
pub struct SeriesOutput {
    pub meta: RunMeta,
    pub series: TimeSeries,
}

impl SeriesOutput {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        self.series.write_csv(
            out,
            &self.meta.comment_lines(),
            self.meta.g_mhz.map(ns_per_gt),
        )
    }
}

/// Fidelity over a two-parameter grid (figs. 3 and 4), rows in grid order.
#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub meta: RunMeta,
    pub axes: [&'static str; 2],
    pub rows: Vec<[f64; 3]>,
}

impl SweepOutput {
    pub fn fidelity_at(&self, x: f64, y: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| (r[0] - x).abs() < 1e-12 && (r[1] - y).abs() < 1e-12)
            .map(|r| r[2])
    }

    pub fn min_fidelity(&self) -> f64 {
        self.rows.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write_comments(out, &self.meta)?;
        writeln!(out, "{},{},fidelity", self.axes[0], self.axes[1])?;
        for r in &self.rows {
            writeln!(out, "{},{},{}", r[0], r[1], r[2])?;
        }
        Ok(())
    }
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    match n {
        0 => Err(Error::InvalidParameter(
            "grid needs at least one point".into(),
        )),
        1 => Ok(vec![lo]),
        _ => Ok((0..n)
            .map(|k| {
                // snap so that symmetric grids contain exact zeros and mirror values
                let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                (x * 1e12).round() / 1e12
            })
            .collect()),
    }
}

fn sector_basis(layout: &SystemLayout, seed: &BasisState) -> Result<Arc<SubspaceBasis>> {
    Ok(Arc::new(enumerate_reachable(
        *layout,
        std::slice::from_ref(seed),
        &hamiltonian_generators(layout),
    )?))
}

/// Closure of all computational states under the Hamiltonian.
pub fn computational_basis(layout: &SystemLayout) -> Result<Arc<SubspaceBasis>> {
    let seeds = ComputationalEncoding::new(*layout).states();
    Ok(Arc::new(enumerate_reachable(
        *layout,
        &seeds,
        &hamiltonian_generators(layout),
    )?))
}

/// Closure of all computational states under the Hamiltonian and every
/// dissipation channel.
pub fn dissipative_basis(layout: &SystemLayout) -> Result<Arc<SubspaceBasis>> {
    let seeds = ComputationalEncoding::new(*layout).states();
    let mut gens = hamiltonian_generators(layout);
    gens.extend(jump_generators(layout));
    Ok(Arc::new(enumerate_reachable(*layout, &seeds, &gens)?))
}

/// The unequal-weight input for three qubits, uniform otherwise.
pub fn default_input(n_qubits: usize) -> InputState {
    if n_qubits == 3 {
        InputState::reference_three_qubit()
    } else {
        InputState::uniform(n_qubits)
    }
}

fn interval(cfg: &ExperimentConfig, t: f64) -> f64 {
    match cfg.samples {
        Some(k) if k > 0 && t > 0.0 => t / k as f64,
        _ => default_interval(t),
    }
}

fn series_run(
    cfg: &ExperimentConfig,
    name: &str,
    regime: Regime,
    default_qubits: usize,
    seeds: &[&str],
) -> Result<SeriesOutput> {
    let spec = cfg.spec(regime, default_qubits)?;
    let tau = gate_time(&spec.pulse, spec.layout.n_qubits(), regime)?;
    let t = cfg.duration.unwrap_or(tau);
    let every = interval(cfg, t);
    let mut merged: Option<TimeSeries> = None;
    for levels in seeds {
        let seed = BasisState::vacuum(&spec.layout, levels)?;
        let basis = sector_basis(&spec.layout, &seed)?;
        let h = build_hamiltonian(&spec, &basis)?;
        let psi0 = StateVector::basis_state(basis, &seed)?;
        let (series, _) = propagate_state(&h, &psi0, t, every, &[Probe::Amplitude(seed)])?;
        match merged.as_mut() {
            None => merged = Some(series),
            Some(m) => m.merge(series)?,
        }
    }
    let mut meta = RunMeta::new(name, Some(regime), &spec);
    meta.gate_time = Some(tau);
    meta.duration = Some(t);
    meta.samples = Some(cfg.samples.unwrap_or(DEFAULT_SAMPLES));
    meta.g_mhz = cfg.g_mhz;
    Ok(SeriesOutput {
        meta,
        series: merged.expect("at least one seed"),
    })
}

/// Seed amplitudes of the three invariant sectors over one gate time.
pub fn run_fig2(cfg: &ExperimentConfig, regime: Regime) -> Result<SeriesOutput> {
    let name = match regime {
        Regime::NonResonant => "fig2a",
        Regime::Resonant => "fig2c",
    };
    series_run(cfg, name, regime, 3, &["ffs", "fgs", "ggs"])
}

/// Seed amplitude of `|g ... g s_A>` for seven qubits.
pub fn run_fig6(cfg: &ExperimentConfig, regime: Regime) -> Result<SeriesOutput> {
    let name = match regime {
        Regime::NonResonant => "fig6a",
        Regime::Resonant => "fig6b",
    };
    let n = cfg.model.n_qubits.unwrap_or(7);
    let flagged = ComputationalEncoding::new(cfg.layout(n)?).flagged();
    let levels: String = flagged.levels.iter().map(|l| l.symbol()).collect();
    series_run(cfg, name, regime, n, &[levels.as_str()])
}

/// Closed-system gate fidelity for one coupling configuration.
pub fn unitary_fidelity(
    spec: &HamiltonianSpec,
    basis: &Arc<SubspaceBasis>,
    input: &InputState,
    t: f64,
) -> Result<f64> {
    let gate = GateSpec::pi(spec.layout);
    let h = build_hamiltonian(spec, basis)?;
    let psi0 = input.to_state(basis.clone(), &gate.encoding)?;
    let (_, psi) = propagate_state(&h, &psi0, t, t.max(f64::MIN_POSITIVE), &[])?;
    pure_fidelity(&psi, input, &gate)
}

/// Fidelity surface over data-coupling mismatches `(dg1, dg2)`.
pub fn run_fig3(cfg: &ExperimentConfig, regime: Regime) -> Result<SweepOutput> {
    let name = match regime {
        Regime::NonResonant => "fig3a",
        Regime::Resonant => "fig3b",
    };
    let base = cfg.spec(regime, 3)?;
    let layout = base.layout;
    if layout.n_data() != 2 {
        return Err(Error::InvalidParameter(
            "the coupling sweep needs exactly two data qubits".into(),
        ));
    }
    let n = cfg.grid_points.unwrap_or(FIG3_GRID);
    let max = cfg.sweep_max.unwrap_or(FIG3_RANGE);
    let axis = grid(-max, max, n)?;
    let tau = gate_time(&base.pulse, layout.n_qubits(), regime)?;
    let t = cfg.duration.unwrap_or(tau);
    let basis = computational_basis(&layout)?;
    let input = default_input(layout.n_qubits());

    let points: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(dg1, dg2)| {
            let mut couplings = Couplings::with_mismatch(&layout, &[dg1, dg2])?;
            couplings.g_central = base.couplings.g_central;
            let spec = HamiltonianSpec::new(layout, base.pulse, couplings)?;
            Ok([dg1, dg2, unitary_fidelity(&spec, &basis, &input, t)?])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut meta = RunMeta::new(name, Some(regime), &base);
    meta.gate_time = Some(tau);
    meta.duration = Some(t);
    meta.grid_points = Some(n);
    meta.sweep_max = Some(max);
    Ok(SweepOutput {
        meta,
        axes: ["dg1", "dg2"],
        rows,
    })
}

/// Mixed-state gate fidelity under uniform photon loss `kappa` and qudit
/// relaxation `gamma` (every channel out of `|e>`).
pub fn decoherent_fidelity(
    spec: &HamiltonianSpec,
    basis: &Arc<SubspaceBasis>,
    input: &InputState,
    params: &DecoherenceParams,
    t: f64,
) -> Result<f64> {
    let gate = GateSpec::pi(spec.layout);
    let h = build_hamiltonian(spec, basis)?;
    let jumps = build_jump_operators(params, &spec.layout, basis)?;
    let psi0 = input.to_state(basis.clone(), &gate.encoding)?;
    let rho0 = DensityMatrix::pure(&psi0);
    let (_, rho) = propagate_density(&h, &jumps, &rho0, t, t.max(f64::MIN_POSITIVE), &[])?;
    mixed_fidelity(&partial_trace_modes(&rho), input, &gate)
}

/// Fidelity over `(kappa, gamma)`. When both rates are set in the model
/// config only that single point is evaluated.
pub fn run_fig4(cfg: &ExperimentConfig, regime: Regime) -> Result<SweepOutput> {
    let name = match regime {
        Regime::NonResonant => "fig4a",
        Regime::Resonant => "fig4b",
    };
    let spec = cfg.spec(regime, 3)?;
    let layout = spec.layout;
    let tau = gate_time(&spec.pulse, layout.n_qubits(), regime)?;
    let t = cfg.duration.unwrap_or(tau);
    let basis = dissipative_basis(&layout)?;
    let input = default_input(layout.n_qubits());

    let n = cfg.grid_points.unwrap_or(FIG4_GRID);
    let max = cfg.sweep_max.unwrap_or(FIG4_RANGE);
    let fixed = cfg.model.kappa.is_some() && cfg.model.gamma.is_some();
    let params: Vec<([f64; 2], DecoherenceParams)> = if fixed {
        let p = cfg.decoherence(&layout)?;
        vec![([p.kappa[0], p.gamma[0][0]], p)]
    } else {
        let axis = grid(0.0, max, n)?;
        axis.iter()
            .flat_map(|&k| axis.iter().map(move |&g| (k, g)))
            .map(|(k, g)| ([k, g], DecoherenceParams::uniform(&layout, k, g)))
            .collect()
    };
    let rows = params
        .par_iter()
        .map(|(xy, p)| {
            Ok([
                xy[0],
                xy[1],
                decoherent_fidelity(&spec, &basis, &input, p, t)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut meta = RunMeta::new(name, Some(regime), &spec);
    meta.gate_time = Some(tau);
    meta.duration = Some(t);
    if fixed {
        let p = &params[0].1;
        meta.kappa = Some(p.kappa.clone());
        meta.gamma = Some(p.gamma.clone());
    } else {
        meta.grid_points = Some(n);
        meta.sweep_max = Some(max);
    }
    Ok(SweepOutput {
        meta,
        axes: ["kappa", "gamma"],
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruthRow {
    pub input: String,
    pub flagged: bool,
    /// `|<x|psi(tau)>|^2` for input `|x>`.
    pub fidelity: f64,
    /// `arg <x|psi(tau)>`, wrapped into `(-pi, pi]`.
    pub phase: f64,
    pub expected_phase: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct TruthTable {
    pub meta: RunMeta,
    pub rows: Vec<TruthRow>,
}

impl TruthTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write_comments(out, &self.meta)?;
        writeln!(out, "input,flagged,fidelity,phase,expected_phase,pass")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.input, r.flagged, r.fidelity, r.phase, r.expected_phase, r.pass
            )?;
        }
        Ok(())
    }
}

/// Evolves every computational state on its own and reports the return
/// amplitude. The flagged state should come back with phase `pi`, all
/// others unchanged.
pub fn run_truth_table(cfg: &ExperimentConfig, regime: Regime) -> Result<TruthTable> {
    let spec = cfg.spec(regime, 3)?;
    let layout = spec.layout;
    let tau = gate_time(&spec.pulse, layout.n_qubits(), regime)?;
    let t = cfg.duration.unwrap_or(tau);
    let basis = computational_basis(&layout)?;
    let h = build_hamiltonian(&spec, &basis)?;
    let encoding = ComputationalEncoding::new(layout);
    let flagged = encoding.flagged();

    let rows = encoding
        .states()
        .into_iter()
        .map(|s| {
            let psi0 = StateVector::basis_state(basis.clone(), &s)?;
            let (_, psi) = propagate_state(&h, &psi0, t, t.max(f64::MIN_POSITIVE), &[])?;
            let a = psi.amplitude(&s).expect("state is in the basis");
            let is_flagged = s == flagged;
            let expected = if is_flagged { PI } else { 0.0 };
            let phase = wrap_phase(a.arg());
            let phase_ok = wrap_phase(phase - expected).abs() <= TRUTH_PHASE;
            let pass = if is_flagged {
                phase_ok
            } else {
                phase_ok && a.norm_sqr() >= TRUTH_FIDELITY
            };
            Ok(TruthRow {
                input: s.to_string(),
                flagged: is_flagged,
                fidelity: a.norm_sqr(),
                phase,
                expected_phase: expected,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut meta = RunMeta::new("truth-table", Some(regime), &spec);
    meta.gate_time = Some(tau);
    meta.duration = Some(t);
    Ok(TruthTable { meta, rows })
}

/// Spectral check of one three-qubit sector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZenoRow {
    pub sector: String,
    pub dim: usize,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    /// Largest `|analytic - numeric|` eigenvalue gap.
    pub eigenvalue_error: f64,
    /// Largest `||H2 v - lambda v||` over the closed-form eigenvectors.
    pub eigenvector_residual: f64,
    /// Largest `||P v - v||` for the normalized closed-form eigenvectors,
    /// `P` the numeric projector of their eigenvalue.
    pub projector_residual: f64,
    /// `||sum_k P_k - 1||`.
    pub completeness_residual: f64,
}

/// Eigen-analysis of `H2` on the three sectors against the closed forms.
pub fn run_zeno_check() -> Result<Vec<ZenoRow>> {
    let layout = SystemLayout::with_qubits(3)?;
    let spec = HamiltonianSpec::ideal(layout, PulseParams::new(DEFAULT_OMEGA, DEFAULT_DELTA)?)?;
    Sector::ALL
        .iter()
        .map(|&sector| {
            let seed = BasisState::vacuum(&layout, sector.seed_levels())?;
            let basis = sector_basis(&layout, &seed)?;
            let h2 = build_h2(&spec, &basis)?;
            let zeno = diagonalize_h2(&basis, &h2)?;
            let mut analytic = reference_spectrum(sector);
            analytic.sort_by(f64::total_cmp);
            let eigenvalue_error = analytic
                .iter()
                .zip(&zeno.eigenvalues)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let mut eigenvector_residual = 0.0f64;
            let mut projector_residual = 0.0f64;
            for r in reference_eigenvectors(sector) {
                let v = r.vector(&basis)?;
                let hv = h2.apply(&v);
                eigenvector_residual =
                    eigenvector_residual.max((hv - &v * C64::new(r.eigenvalue, 0.0)).norm());
                let branch = zeno.branch(r.eigenvalue).ok_or_else(|| {
                    Error::InvalidParameter(format!("no eigenvalue {} in sector", r.eigenvalue))
                })?;
                let unit = &v / C64::new(v.norm(), 0.0);
                projector_residual =
                    projector_residual.max((&branch.projector * &unit - &unit).norm());
            }
            Ok(ZenoRow {
                sector: seed.to_string(),
                dim: basis.len(),
                analytic,
                numeric: zeno.eigenvalues.clone(),
                eigenvalue_error,
                eigenvector_residual,
                projector_residual,
                completeness_residual: zeno.completeness_residual(),
            })
        })
        .collect()
}

pub fn format_zeno_table(rows: &[ZenoRow]) -> String {
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:+.6}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = String::new();
    for r in rows {
        s.push_str(&format!("sector {}  (dim {})\n", r.sector, r.dim));
        s.push_str(&format!("  analytic   {}\n", fmt(&r.analytic)));
        s.push_str(&format!("  numeric    {}\n", fmt(&r.numeric)));
        s.push_str(&format!(
            "  eigenvalue error {:.2e}  eigenvector residual {:.2e}  projector residual {:.2e}  completeness {:.2e}\n",
            r.eigenvalue_error, r.eigenvector_residual, r.projector_residual, r.completeness_residual
        ));
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateTimeReport {
    pub n_qubits: usize,
    pub omega: f64,
    pub delta: f64,
    pub g_mhz: f64,
    pub resonant_gt: f64,
    pub resonant_ns: f64,
    pub nonresonant_gt: Option<f64>,
    pub nonresonant_ns: Option<f64>,
}

pub fn gate_time_report(
    n_qubits: usize,
    omega: f64,
    delta: f64,
    g_mhz: f64,
) -> Result<GateTimeReport> {
    if g_mhz.is_nan() || g_mhz <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "g must be positive, got {g_mhz} MHz"
        )));
    }
    let _ = SystemLayout::with_qubits(n_qubits)?;
    let pulse = PulseParams::new(omega, delta)?;
    let scale = ns_per_gt(g_mhz);
    let resonant_gt = resonant_gate_time(&pulse, n_qubits)?;
    let nonresonant_gt = if delta != 0.0 {
        Some(nonresonant_gate_time(&pulse, n_qubits, PI)?)
    } else {
        None
    };
    Ok(GateTimeReport {
        n_qubits,
        omega,
        delta,
        g_mhz,
        resonant_gt,
        resonant_ns: resonant_gt * scale,
        nonresonant_gt,
        nonresonant_ns: nonresonant_gt.map(|t| t * scale),
    })
}

/// Largest population outside the `{seed, dark state}` plane over `[0, t]`,
/// for the flagged seed.
pub fn zeno_leakage(pulse: &PulseParams, n_qubits: usize, t: f64, samples: usize) -> Result<f64> {
    let layout = SystemLayout::with_qubits(n_qubits)?;
    let spec = HamiltonianSpec::ideal(layout, *pulse)?;
    let seed = ComputationalEncoding::new(layout).flagged();
    let basis = sector_basis(&layout, &seed)?;
    let zeno = diagonalize_h2(&basis, &build_h2(&spec, &basis)?)?;
    let dark =
        dark_state(&zeno, &seed).ok_or_else(|| Error::SeedNotInDarkBlock(seed.to_string()))?;
    let mut plane = DMatrix::<C64>::zeros(basis.len(), basis.len());
    plane += &dark * dark.adjoint();
    let i = basis.index_of(&seed).expect("seed is in its sector");
    plane[(i, i)] += C64::new(1.0, 0.0);
    let projector = OperatorMatrix::from_dense(&plane, true);

    let h = build_hamiltonian(&spec, &basis)?;
    let psi0 = StateVector::basis_state(basis, &seed)?;
    let probe = Probe::Expectation {
        label: "plane".into(),
        op: projector,
    };
    let (series, _) = propagate_state(&h, &psi0, t, t / samples.max(1) as f64, &[probe])?;
    Ok(series
        .series("plane")
        .expect("probe recorded")
        .iter()
        .map(|p| 1.0 - p.re)
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_symmetric() {
        let g = grid(-0.1, 0.1, 21).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[10], 0.0);
        assert_eq!(g[0], -g[20]);
        assert_eq!(g[3], -g[17]);
        assert!(grid(0.0, 1.0, 0).is_err());
        assert_eq!(grid(0.3, 1.0, 1).unwrap(), vec![0.3]);
    }

    #[test]
    fn regime_defaults() {
        let cfg = ExperimentConfig::default();
        let a = cfg.pulse(Regime::NonResonant).unwrap();
        let b = cfg.pulse(Regime::Resonant).unwrap();
        assert_eq!((a.omega, a.delta), (0.1, 1.0));
        assert_eq!((b.omega, b.delta), (0.1, 0.0));
        assert!((gate_time(&a, 3, Regime::NonResonant).unwrap() - 300.0 * PI).abs() < 1e-9);
        assert!(
            (gate_time(&b, 3, Regime::Resonant).unwrap() - 10.0 * 3f64.sqrt() * PI).abs() < 1e-9
        );
    }

    #[test]
    fn config_from_toml() {
        let cfg = ExperimentConfig::from_toml_str(
            "samples = 50\ndg = [0.05, -0.05]\n[model]\nomega = 0.05\nkappa = 0.01\n",
        )
        .unwrap();
        assert_eq!(cfg.samples, Some(50));
        let spec = cfg.spec(Regime::NonResonant, 3).unwrap();
        assert_eq!(spec.couplings.g_data, vec![1.05, 0.95]);
        assert_eq!(spec.pulse.omega, 0.05);
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn basis_sizes() {
        let l = SystemLayout::with_qubits(3).unwrap();
        // 4 + 5 + 5 + 6 driven states and four frozen ones
        assert_eq!(computational_basis(&l).unwrap().len(), 24);
        let d = dissipative_basis(&l).unwrap();
        assert!(d.len() > 24);
        assert!(computational_basis(&l)
            .unwrap()
            .states()
            .iter()
            .all(|s| d.contains(s)));
    }

    #[test]
    fn zeno_check_passes() {
        for row in run_zeno_check().unwrap() {
            assert!(row.eigenvalue_error < 1e-12, "{row:?}");
            assert!(row.eigenvector_residual < 1e-12, "{row:?}");
            assert!(row.projector_residual < 1e-10, "{row:?}");
            assert!(row.completeness_residual < 1e-12, "{row:?}");
        }
    }

    #[test]
    fn gate_time_in_nanoseconds() {
        let r = gate_time_report(3, 0.1, 1.0, 360.0).unwrap();
        assert!((r.resonant_ns - 24.06).abs() < 0.01);
        assert!((r.nonresonant_gt.unwrap() - 300.0 * PI).abs() < 1e-9);
        let r7 = gate_time_report(7, 0.1, 0.0, 360.0).unwrap();
        assert!((r7.resonant_ns - 36.75).abs() < 0.01);
        assert!(r7.nonresonant_gt.is_none());
    }

    #[test]
    fn sweep_csv_layout() {
        let out = SweepOutput {
            meta: RunMeta::new(
                "fig3a",
                Some(Regime::NonResonant),
                &HamiltonianSpec::ideal(
                    SystemLayout::with_qubits(3).unwrap(),
                    PulseParams::new(0.1, 1.0).unwrap(),
                )
                .unwrap(),
            ),
            axes: ["dg1", "dg2"],
            rows: vec![[0.0, 0.1, 0.97]],
        };
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# zeno-gate fig3a");
        assert!(
            lines[1].starts_with("# config {\"experiment\":\"fig3a\",\"regime\":\"non-resonant\"")
        );
        assert_eq!(lines[2], "dg1,dg2,fidelity");
        assert_eq!(lines[3], "0,0.1,0.97");
    }
}
