//! Interaction-picture Hamiltonian and Lindblad channels.
//!
//! All frequencies are in units of the reference coupling `g` and times in
//! units of `1/g`.
//!
//! ```text
//! H1 = Delta sum_q |e><e|_q + (Omega |s><e|_A + h.c.)
//! H2 = sum_i g_i a_i^dag |g><e|_i + g_A sum_i a_i^dag |g><e|_A + h.c.
//! ```
//!
//! Dissipation uses one photon-loss channel `a_i` per mode and the relaxation
//! channels `|n><e|` for every qudit and every `n in {g, s, f}`, including the
//! data-qudit paths into levels that the Hamiltonian never touches. The cavity
//! sum in the master equation runs over the modes only.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{OperatorTerm, QuditLevel, SiteAction, SubspaceBasis, SystemLayout};
use crate::operator::{build_operator, OperatorMatrix};

/// Relaxation targets from `|e>`, in the order used by [`DecoherenceParams::gamma`].
pub const RELAXATION_TARGETS: [QuditLevel; 3] = [QuditLevel::G, QuditLevel::S, QuditLevel::F];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    pub omega: f64,
    pub delta: f64,
}

impl PulseParams {
    pub fn new(omega: f64, delta: f64) -> Result<Self> {
        let p = Self { omega, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(
                "pulse parameters must be finite".into(),
            ));
        }
        if self.omega < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Rabi frequency must be non-negative, got {}",
                self.omega
            )));
        }
        Ok(())
    }

    pub fn is_resonant(&self) -> bool {
        self.delta == 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub g_data: Vec<f64>,
    pub g_central: f64,
}

impl Couplings {
    /// All couplings equal to `g = 1`.
    pub fn uniform(layout: &SystemLayout) -> Self {
        Self {
            g_data: vec![1.0; layout.n_data()],
            g_central: 1.0,
        }
    }

    /// Data couplings `g + dg_i` with `g_A` left at `g`.
    pub fn with_mismatch(layout: &SystemLayout, dg: &[f64]) -> Result<Self> {
        if dg.len() != layout.n_data() {
            return Err(Error::LengthMismatch {
                name: "dg",
                got: dg.len(),
                expected: layout.n_data(),
            });
        }
        Ok(Self {
            g_data: dg.iter().map(|d| 1.0 + d).collect(),
            g_central: 1.0,
        })
    }

    pub fn validate(&self, layout: &SystemLayout) -> Result<()> {
        if self.g_data.len() != layout.n_data() {
            return Err(Error::LengthMismatch {
                name: "g_data",
                got: self.g_data.len(),
                expected: layout.n_data(),
            });
        }
        if !self.g_central.is_finite() || self.g_data.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter("couplings must be finite".into()));
        }
        Ok(())
    }
}

/// Photon-loss rates per mode and relaxation rates per qudit, the latter
/// ordered as `[e->g, e->s, e->f]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceParams {
    pub kappa: Vec<f64>,
    pub gamma: Vec<[f64; 3]>,
}

impl DecoherenceParams {
    pub fn uniform(layout: &SystemLayout, kappa: f64, gamma: f64) -> Self {
        Self {
            kappa: vec![kappa; layout.n_modes()],
            gamma: vec![[gamma; 3]; layout.n_qudits()],
        }
    }

    pub fn none(layout: &SystemLayout) -> Self {
        Self::uniform(layout, 0.0, 0.0)
    }

    pub fn validate(&self, layout: &SystemLayout) -> Result<()> {
        if self.kappa.len() != layout.n_modes() {
            return Err(Error::LengthMismatch {
                name: "kappa",
                got: self.kappa.len(),
                expected: layout.n_modes(),
            });
        }
        if self.gamma.len() != layout.n_qudits() {
            return Err(Error::LengthMismatch {
                name: "gamma",
                got: self.gamma.len(),
                expected: layout.n_qudits(),
            });
        }
        let bad = |r: &f64| !r.is_finite() || *r < 0.0;
        if self.kappa.iter().any(bad) || self.gamma.iter().flatten().any(bad) {
            return Err(Error::InvalidParameter(
                "decay rates must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn is_closed(&self) -> bool {
        self.kappa
            .iter()
            .chain(self.gamma.iter().flatten())
            .all(|&r| r == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub layout: SystemLayout,
    pub pulse: PulseParams,
    pub couplings: Couplings,
}

impl HamiltonianSpec {
    pub fn new(layout: SystemLayout, pulse: PulseParams, couplings: Couplings) -> Result<Self> {
        pulse.validate()?;
        couplings.validate(&layout)?;
        Ok(Self {
            layout,
            pulse,
            couplings,
        })
    }

    /// Equal couplings `g_i = g_A = 1`.
    pub fn ideal(layout: SystemLayout, pulse: PulseParams) -> Result<Self> {
        Self::new(layout, pulse, Couplings::uniform(&layout))
    }

    pub fn h1_terms(&self) -> Vec<OperatorTerm> {
        h1_terms(&self.layout, self.pulse.omega, self.pulse.delta)
    }

    pub fn h2_terms(&self) -> Vec<OperatorTerm> {
        h2_terms(
            &self.layout,
            &self.couplings.g_data,
            self.couplings.g_central,
        )
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn dyad(qudit: usize, to: QuditLevel, from: QuditLevel) -> SiteAction {
    SiteAction::Transition { qudit, to, from }
}

fn term(actions: Vec<SiteAction>, amplitude: f64, with_hc: bool) -> OperatorTerm {
    OperatorTerm::new(actions, real(amplitude), with_hc).expect("distinct sites")
}

fn h1_terms(layout: &SystemLayout, omega: f64, delta: f64) -> Vec<OperatorTerm> {
    let a = layout.central();
    let mut terms: Vec<OperatorTerm> = (0..layout.n_qudits())
        .map(|q| term(vec![dyad(q, QuditLevel::E, QuditLevel::E)], delta, false))
        .collect();
    terms.push(term(
        vec![dyad(a, QuditLevel::S, QuditLevel::E)],
        omega,
        true,
    ));
    terms
}

fn h2_terms(layout: &SystemLayout, g_data: &[f64], g_central: f64) -> Vec<OperatorTerm> {
    let a = layout.central();
    let mut terms = Vec::with_capacity(2 * layout.n_modes());
    for (i, &g) in g_data.iter().enumerate() {
        terms.push(term(
            vec![
                SiteAction::Raise { mode: i },
                dyad(i, QuditLevel::G, QuditLevel::E),
            ],
            g,
            true,
        ));
    }
    for i in 0..layout.n_modes() {
        terms.push(term(
            vec![
                SiteAction::Raise { mode: i },
                dyad(a, QuditLevel::G, QuditLevel::E),
            ],
            g_central,
            true,
        ));
    }
    terms
}

/// Structural generator set of `H1 + H2`; closure under it is parameter independent.
pub fn hamiltonian_generators(layout: &SystemLayout) -> Vec<OperatorTerm> {
    let mut terms = h1_terms(layout, 1.0, 1.0);
    terms.extend(h2_terms(layout, &vec![1.0; layout.n_data()], 1.0));
    terms
}

/// Structural generator set of every jump operator.
pub fn jump_generators(layout: &SystemLayout) -> Vec<OperatorTerm> {
    jump_terms(layout).into_iter().map(|(_, _, t)| t).collect()
}

/// `(channel, label, term)` for every channel; `channel` indexes the rates as
/// modes first, then qudit relaxation in `RELAXATION_TARGETS` order.
fn jump_terms(layout: &SystemLayout) -> Vec<(Channel, String, OperatorTerm)> {
    let mut out = Vec::new();
    for i in 0..layout.n_modes() {
        out.push((
            Channel::Mode(i),
            format!("a_{}", i + 1),
            term(vec![SiteAction::Lower { mode: i }], 1.0, false),
        ));
    }
    for q in 0..layout.n_qudits() {
        for (k, &n) in RELAXATION_TARGETS.iter().enumerate() {
            out.push((
                Channel::Qudit(q, k),
                format!("sigma_{}{}", n, layout.qudit_name(q)),
                term(vec![dyad(q, n, QuditLevel::E)], 1.0, false),
            ));
        }
    }
    out
}

#[derive(Clone, Copy, Debug)]
enum Channel {
    Mode(usize),
    Qudit(usize, usize),
}

pub fn build_h1(spec: &HamiltonianSpec, basis: &SubspaceBasis) -> Result<OperatorMatrix> {
    build_drive(&spec.pulse, basis)
}

/// `H1` depends only on the pulse; this builds it on any basis.
pub fn build_drive(pulse: &PulseParams, basis: &SubspaceBasis) -> Result<OperatorMatrix> {
    pulse.validate()?;
    build_operator(&h1_terms(basis.layout(), pulse.omega, pulse.delta), basis)
}

pub fn build_h2(spec: &HamiltonianSpec, basis: &SubspaceBasis) -> Result<OperatorMatrix> {
    spec.couplings.validate(&spec.layout)?;
    build_operator(&spec.h2_terms(), basis)
}

/// `H = H1 + H2`.
pub fn build_hamiltonian(spec: &HamiltonianSpec, basis: &SubspaceBasis) -> Result<OperatorMatrix> {
    Ok(build_h1(spec, basis)?.add(&build_h2(spec, basis)?))
}

/// A Lindblad channel `rate * L[op]`.
#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub label: String,
    pub rate: f64,
    pub op: OperatorMatrix,
}

/// Every channel, zero-rate ones included: `N - 1` mode channels followed
/// by `3N` qudit channels.
pub fn build_jump_operators(
    params: &DecoherenceParams,
    layout: &SystemLayout,
    basis: &SubspaceBasis,
) -> Result<Vec<JumpOperator>> {
    params.validate(layout)?;
    jump_terms(layout)
        .into_iter()
        .map(|(channel, label, t)| {
            let rate = match channel {
                Channel::Mode(i) => params.kappa[i],
                Channel::Qudit(q, k) => params.gamma[q][k],
            };
            Ok(JumpOperator {
                label,
                rate,
                op: build_operator(&[t], basis)?,
            })
        })
        .collect()
}

/// Model parameters as read from a TOML file. Missing keys take the ideal
/// defaults; `kappa` and `gamma` accept a scalar (uniform) or a list.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n_qubits: Option<usize>,
    pub n_max: Option<u8>,
    pub omega: Option<f64>,
    pub delta: Option<f64>,
    pub g_data: Option<Vec<f64>>,
    pub g_central: Option<f64>,
    pub kappa: Option<RateSpec>,
    pub gamma: Option<GammaSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateSpec {
    Uniform(f64),
    PerMode(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Uniform(f64),
    /// One `[e->g, e->s, e->f]` triple per qudit, qudit A last.
    PerQudit(Vec<[f64; 3]>),
}

impl ModelConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn layout(&self) -> Result<SystemLayout> {
        SystemLayout::new(self.n_qubits.unwrap_or(3), self.n_max.unwrap_or(1))
    }

    pub fn hamiltonian_spec(&self) -> Result<HamiltonianSpec> {
        let layout = self.layout()?;
        let pulse = PulseParams::new(self.omega.unwrap_or(0.1), self.delta.unwrap_or(1.0))?;
        let couplings = Couplings {
            g_data: self
                .g_data
                .clone()
                .unwrap_or_else(|| vec![1.0; layout.n_data()]),
            g_central: self.g_central.unwrap_or(1.0),
        };
        HamiltonianSpec::new(layout, pulse, couplings)
    }

    pub fn decoherence(&self) -> Result<DecoherenceParams> {
        let layout = self.layout()?;
        let kappa = match &self.kappa {
            None => vec![0.0; layout.n_modes()],
            Some(RateSpec::Uniform(k)) => vec![*k; layout.n_modes()],
            Some(RateSpec::PerMode(v)) => v.clone(),
        };
        let gamma = match &self.gamma {
            None => vec![[0.0; 3]; layout.n_qudits()],
            Some(GammaSpec::Uniform(g)) => vec![[*g; 3]; layout.n_qudits()],
            Some(GammaSpec::PerQudit(v)) => v.clone(),
        };
        let params = DecoherenceParams { kappa, gamma };
        params.validate(&layout)?;
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{enumerate_reachable, BasisState};
    use crate::operator::excitation_operator;
    use nalgebra::DMatrix;

    fn layout3() -> SystemLayout {
        SystemLayout::with_qubits(3).unwrap()
    }

    fn sector(seed: &str) -> SubspaceBasis {
        let l = layout3();
        let seed = BasisState::vacuum(&l, seed).unwrap();
        enumerate_reachable(l, &[seed], &hamiltonian_generators(&l)).unwrap()
    }

    fn spec(omega: f64, delta: f64) -> HamiltonianSpec {
        HamiltonianSpec::ideal(layout3(), PulseParams::new(omega, delta).unwrap()).unwrap()
    }

    fn idx(b: &SubspaceBasis, label: &str) -> usize {
        b.index_of(&BasisState::parse(b.layout(), label).unwrap())
            .unwrap()
    }

    fn sorted_eigenvalues(m: &OperatorMatrix) -> Vec<f64> {
        let mut ev: Vec<f64> = m
            .to_dense()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn h1_entries() {
        let b = sector("ffs");
        let h1 = build_h1(&spec(0.0, 1.0), &b).unwrap();
        let e = idx(&b, "f1 f2 eA | 0 0");
        assert_eq!(h1.get(e, e), real(1.0));
        let h1 = build_h1(&spec(0.3, 1.0), &b).unwrap();
        assert_eq!(h1.get(idx(&b, "f1 f2 sA | 0 0"), e), real(0.3));
        assert_eq!(build_h1(&spec(0.0, 0.0), &b).unwrap().nnz(), 0);
    }

    #[test]
    fn h2_couples_central_qudit_to_every_mode() {
        let b = sector("ffs");
        let h2 = build_h2(&spec(0.1, 1.0), &b).unwrap();
        let e = idx(&b, "f1 f2 eA | 0 0");
        assert_eq!(h2.get(idx(&b, "f1 f2 gA | 1 0"), e), real(1.0));
        assert_eq!(h2.get(idx(&b, "f1 f2 gA | 0 1"), e), real(1.0));

        let l = layout3();
        let zero = HamiltonianSpec::new(
            l,
            PulseParams::new(0.1, 1.0).unwrap(),
            Couplings {
                g_data: vec![0.0, 0.0],
                g_central: 0.0,
            },
        )
        .unwrap();
        assert_eq!(build_h2(&zero, &b).unwrap().nnz(), 0);
    }

    #[test]
    fn h2_spectra_on_the_three_sectors() {
        let s2 = 2f64.sqrt();
        let s3 = 3f64.sqrt();
        let s5 = 5f64.sqrt();
        let mut cases = vec![
            ("ffs", vec![-s2, 0.0, 0.0, s2]),
            (
                "fgs",
                vec![
                    -(1.0 + s5) / 2.0,
                    (1.0 - s5) / 2.0,
                    0.0,
                    -(1.0 - s5) / 2.0,
                    (1.0 + s5) / 2.0,
                ],
            ),
            ("ggs", vec![-s3, -1.0, 0.0, 0.0, 1.0, s3]),
        ];
        for (seed, expected) in cases.drain(..) {
            let b = sector(seed);
            let ev = sorted_eigenvalues(&build_h2(&spec(0.1, 1.0), &b).unwrap());
            for (a, e) in ev.iter().zip(&expected) {
                assert!((a - e).abs() < 1e-12, "{seed}: {ev:?} vs {expected:?}");
            }
        }
    }

    #[test]
    fn hamiltonian_conserves_excitations() {
        let l = SystemLayout::new(3, 2).unwrap();
        let seeds: Vec<_> = ["ffs", "fgs", "gfs", "ggs", "ggf"]
            .iter()
            .map(|s| BasisState::vacuum(&l, s).unwrap())
            .collect();
        let b = enumerate_reachable(l, &seeds, &hamiltonian_generators(&l)).unwrap();
        let s = HamiltonianSpec::new(
            l,
            PulseParams::new(0.3, 0.7).unwrap(),
            Couplings {
                g_data: vec![1.1, 0.9],
                g_central: 1.05,
            },
        )
        .unwrap();
        let h = build_hamiltonian(&s, &b).unwrap();
        assert!(h.is_hermitian());
        assert!(h.hermiticity_deviation() <= 1e-14);
        assert!(h.commutator_norm(&excitation_operator(&b)) <= 1e-13);
    }

    #[test]
    fn exchange_of_qudits_one_and_two_permutes_h() {
        let l = layout3();
        let seeds: Vec<_> = ["fgs", "gfs", "ggs"]
            .iter()
            .map(|s| BasisState::vacuum(&l, s).unwrap())
            .collect();
        let b = enumerate_reachable(l, &seeds, &hamiltonian_generators(&l)).unwrap();
        let mk = |g1: f64, g2: f64| {
            HamiltonianSpec::new(
                l,
                PulseParams::new(0.1, 1.0).unwrap(),
                Couplings {
                    g_data: vec![g1, g2],
                    g_central: 1.0,
                },
            )
            .unwrap()
        };
        let h = build_hamiltonian(&mk(1.08, 0.95), &b).unwrap().to_dense();
        let h_swapped = build_hamiltonian(&mk(0.95, 1.08), &b).unwrap().to_dense();
        let n = b.len();
        let mut p = DMatrix::<C64>::zeros(n, n);
        for (i, s) in b.states().iter().enumerate() {
            let mut t = s.clone();
            t.levels.swap(0, 1);
            t.photons.swap(0, 1);
            p[(b.index_of(&t).unwrap(), i)] = real(1.0);
        }
        assert_eq!((&p * h * p.adjoint() - h_swapped).norm(), 0.0);
    }

    #[test]
    fn jump_channel_count_and_action() {
        let l = layout3();
        let mut gens = hamiltonian_generators(&l);
        gens.extend(jump_generators(&l));
        let seeds = [BasisState::vacuum(&l, "ffs").unwrap()];
        let b = enumerate_reachable(l, &seeds, &gens).unwrap();
        let jumps =
            build_jump_operators(&DecoherenceParams::uniform(&l, 0.1, 0.2), &l, &b).unwrap();
        assert_eq!(jumps.len(), 2 + 9);
        assert_eq!(jumps.iter().filter(|j| j.rate == 0.1).count(), 2);

        let a1 = &jumps[0].op;
        assert_eq!(
            a1.get(idx(&b, "f1 f2 gA | 0 0"), idx(&b, "f1 f2 gA | 1 0")),
            real(1.0)
        );

        let sigma_s_a = jumps.iter().find(|j| j.label == "sigma_sA").unwrap();
        assert_eq!(
            sigma_s_a
                .op
                .get(idx(&b, "f1 f2 sA | 0 0"), idx(&b, "f1 f2 eA | 0 0")),
            real(1.0)
        );
    }

    #[test]
    fn jumps_outside_a_hamiltonian_only_basis_are_rejected() {
        let b = sector("ffs");
        let l = layout3();
        let err = build_jump_operators(&DecoherenceParams::uniform(&l, 0.1, 0.1), &l, &b);
        assert!(matches!(err, Err(Error::ClosureViolation { .. })));
    }

    #[test]
    fn config_parsing() {
        let cfg = ModelConfig::from_toml_str(
            "n_qubits = 3\nomega = 0.2\ndelta = 0.0\ng_data = [1.1, 0.9]\nkappa = 0.05\ngamma = [[0.1, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.2, 0.0]]\n",
        )
        .unwrap();
        let spec = cfg.hamiltonian_spec().unwrap();
        assert_eq!(
            spec.pulse,
            PulseParams {
                omega: 0.2,
                delta: 0.0
            }
        );
        assert_eq!(spec.couplings.g_data, vec![1.1, 0.9]);
        let d = cfg.decoherence().unwrap();
        assert_eq!(d.kappa, vec![0.05, 0.05]);
        assert_eq!(d.gamma[2], [0.0, 0.2, 0.0]);

        assert!(ModelConfig::from_toml_str("omegaa = 1.0").is_err());
        let bad = ModelConfig::from_toml_str("g_data = [1.0]").unwrap();
        assert!(bad.hamiltonian_spec().is_err());
        let neg = ModelConfig::from_toml_str("kappa = -1.0").unwrap();
        assert!(neg.decoherence().is_err());
    }
}
