//! Zeno-block analysis of the coupling Hamiltonian `H2`.
//!
//! When `g >> Omega`, evolution is confined to the eigenspaces of `H2`. The
//! seed `|x...x s_A>|0...0>` is always an `H2` zero mode; whether it moves at
//! all depends on what else lives in the zero-eigenvalue block.
//!
//! Eigenvectors are compared as projectors, never as raw vectors, so sign and
//! phase conventions drop out.

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{BasisState, QuditLevel, SubspaceBasis};
use crate::model::{build_drive, PulseParams};
use crate::operator::OperatorMatrix;

/// Eigenvalues closer than this (in units of `g`) share a projector.
pub const GROUPING_TOLERANCE: f64 = 1e-9;

/// `Omega / g` (or `Omega / Delta`) above this triggers a validity warning.
pub const WEAK_DRIVE_LIMIT: f64 = 0.2;

#[derive(Clone, Debug)]
pub struct EigenBranch {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub projector: DMatrix<C64>,
}

#[derive(Clone, Debug)]
pub struct ZenoSubspace {
    pub basis: SubspaceBasis,
    /// Ascending, with multiplicity.
    pub eigenvalues: Vec<f64>,
    /// Columns are orthonormal eigenvectors, in `eigenvalues` order.
    pub eigenvectors: DMatrix<C64>,
    pub branches: Vec<EigenBranch>,
    /// Projector onto the zero-eigenvalue block (zero matrix if absent).
    pub dark_projector: DMatrix<C64>,
}

impl ZenoSubspace {
    pub fn branch(&self, eigenvalue: f64) -> Option<&EigenBranch> {
        self.branches
            .iter()
            .find(|b| (b.eigenvalue - eigenvalue).abs() <= GROUPING_TOLERANCE)
    }

    /// `|| sum_k P_k - 1 ||_F`.
    pub fn completeness_residual(&self) -> f64 {
        let n = self.basis.len();
        let sum = self
            .branches
            .iter()
            .fold(DMatrix::zeros(n, n), |acc, b| acc + &b.projector);
        (sum - DMatrix::identity(n, n)).norm()
    }

    /// Largest `|| P_k^2 - P_k ||_F`.
    pub fn idempotency_residual(&self) -> f64 {
        self.branches
            .iter()
            .map(|b| (&b.projector * &b.projector - &b.projector).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|| P_j P_k ||_F` over distinct branches.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (j, a) in self.branches.iter().enumerate() {
            for b in &self.branches[j + 1..] {
                worst = worst.max((&a.projector * &b.projector).norm());
            }
        }
        worst
    }
}

/// Full dense Hermitian eigendecomposition of `h2`, grouped into branches.
pub fn diagonalize_h2(basis: &SubspaceBasis, h2: &OperatorMatrix) -> Result<ZenoSubspace> {
    if h2.dim() != basis.len() {
        return Err(Error::BasisMismatch);
    }
    let deviation = h2.hermiticity_deviation();
    if !h2.is_hermitian() || deviation > 1e-12 {
        return Err(Error::NonHermitian { deviation });
    }
    let n = basis.len();
    let eig = h2.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);

    let mut branches: Vec<EigenBranch> = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[end] - eigenvalues[end - 1] <= GROUPING_TOLERANCE {
            end += 1;
        }
        let cols = eigenvectors.columns(start, end - start);
        let mean = eigenvalues[start..end].iter().sum::<f64>() / (end - start) as f64;
        branches.push(EigenBranch {
            eigenvalue: mean,
            multiplicity: end - start,
            projector: cols * cols.adjoint(),
        });
        start = end;
    }
    let dark_projector = branches
        .iter()
        .find(|b| b.eigenvalue.abs() <= GROUPING_TOLERANCE)
        .map(|b| b.projector.clone())
        .unwrap_or_else(|| DMatrix::zeros(n, n));

    Ok(ZenoSubspace {
        basis: basis.clone(),
        eigenvalues,
        eigenvectors,
        branches,
        dark_projector,
    })
}

/// Dark state of the seed's sector: the part of the zero-eigenvalue block that
/// lies in the zero-photon sector and is orthogonal to the seed. Its phase is
/// fixed so that the `|e_A>` component is real and negative.
pub fn dark_state(zeno: &ZenoSubspace, seed: &BasisState) -> Option<DVector<C64>> {
    let basis = &zeno.basis;
    let n = basis.len();
    let seed_idx = basis.index_of(seed)?;
    let keep: Vec<usize> = (0..n)
        .filter(|&i| i != seed_idx && basis.state(i).is_vacuum())
        .collect();
    if keep.is_empty() {
        return None;
    }
    let restricted = DMatrix::from_fn(keep.len(), keep.len(), |r, c| {
        zeno.dark_projector[(keep[r], keep[c])]
    });
    let eig = restricted.symmetric_eigen();
    let (k, top) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    if (top - 1.0).abs() > 1e-9 {
        return None;
    }
    let mut v = DVector::<C64>::zeros(n);
    for (r, &i) in keep.iter().enumerate() {
        v[i] = eig.eigenvectors[(r, k)];
    }
    let mut anchor = seed.clone();
    *anchor.levels.last_mut().expect("central qudit") = QuditLevel::E;
    let pivot = basis
        .index_of(&anchor)
        .filter(|&i| v[i].norm() > 1e-9)
        .unwrap_or_else(|| v.icamax());
    let phase = v[pivot] / v[pivot].norm();
    let sign = if basis.index_of(&anchor) == Some(pivot) {
        -1.0
    } else {
        1.0
    };
    Some(v * (phase.conj() * sign))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    NonResonant,
    Resonant,
}

/// Zeno-projected drive on at most two states: the seed and, if present, the
/// dark state it couples to.
#[derive(Clone, Debug)]
pub struct EffectiveModel {
    pub labels: Vec<String>,
    /// States as vectors on the sector basis.
    pub states: Vec<DVector<C64>>,
    pub hamiltonian: DMatrix<C64>,
    pub regime: Regime,
}

impl EffectiveModel {
    pub fn dim(&self) -> usize {
        self.states.len()
    }
}

/// Projects `H1` onto the zero-eigenvalue block of `H2` that contains `seed`.
pub fn effective_hamiltonian(
    zeno: &ZenoSubspace,
    pulse: &PulseParams,
    seed: &BasisState,
) -> Result<EffectiveModel> {
    if pulse.omega > WEAK_DRIVE_LIMIT {
        warn!(
            "Omega/g = {} exceeds {WEAK_DRIVE_LIMIT}; the Zeno approximation is unreliable",
            pulse.omega
        );
    }
    let basis = &zeno.basis;
    let n = basis.len();
    let seed_idx = basis
        .index_of(seed)
        .ok_or_else(|| Error::SeedNotInDarkBlock(seed.label()))?;
    let mut s = DVector::<C64>::zeros(n);
    s[seed_idx] = C64::new(1.0, 0.0);
    if (&zeno.dark_projector * &s - &s).norm() > 1e-9 {
        return Err(Error::SeedNotInDarkBlock(seed.label()));
    }

    let h1 = build_drive(pulse, basis)?.to_dense();
    let projected = &zeno.dark_projector * &h1 * &zeno.dark_projector;
    let regime = if pulse.is_resonant() {
        Regime::Resonant
    } else {
        Regime::NonResonant
    };

    let mut states = vec![s.clone()];
    let mut labels = vec![seed.label()];
    if let Some(dark) = dark_state(zeno, seed) {
        states.push(dark);
        labels.push("dark".to_string());
    }
    let dim = states.len();
    let hamiltonian = DMatrix::from_fn(dim, dim, |r, c| {
        (states[r].adjoint() * &projected * &states[c])[(0, 0)]
    });

    // Residual of the projected drive outside the returned span.
    let image = &projected * &s;
    let inside = states.iter().fold(DVector::zeros(n), |acc, v| {
        acc + v * (v.adjoint() * &image)[(0, 0)]
    });
    let leak = (image - inside).norm();
    if leak > 1e-9 * pulse.omega.max(pulse.delta.abs()).max(1.0) {
        warn!("projected drive leaves the effective span by {leak:e}");
    }

    Ok(EffectiveModel {
        labels,
        states,
        hamiltonian,
        regime,
    })
}

/// `Omega^2 / (N Delta)`: rate of the phase picked up by the flagged state.
pub fn effective_phase_rate(pulse: &PulseParams, n_qubits: usize) -> Result<f64> {
    pulse.validate()?;
    if pulse.delta == 0.0 {
        return Err(Error::ResonantRegime);
    }
    if (pulse.omega / pulse.delta).abs() > WEAK_DRIVE_LIMIT {
        warn!(
            "|Omega/Delta| = {} exceeds {WEAK_DRIVE_LIMIT}; second-order phase rate is unreliable",
            (pulse.omega / pulse.delta).abs()
        );
    }
    Ok(pulse.omega * pulse.omega / (n_qubits as f64 * pulse.delta))
}

/// Time for the flagged state to accumulate `phase` in the dispersive regime.
pub fn nonresonant_gate_time(pulse: &PulseParams, n_qubits: usize, phase: f64) -> Result<f64> {
    let rate = effective_phase_rate(pulse, n_qubits)?;
    if rate == 0.0 {
        return Err(Error::ZeroDrive);
    }
    Ok(phase / rate)
}

/// `sqrt(N) pi / Omega`: one full Rabi cycle between the seed and its dark state.
pub fn resonant_gate_time(pulse: &PulseParams, n_qubits: usize) -> Result<f64> {
    pulse.validate()?;
    if pulse.omega == 0.0 {
        return Err(Error::ZeroDrive);
    }
    Ok((n_qubits as f64).sqrt() * std::f64::consts::PI / pulse.omega)
}

/// The three-qubit invariant sectors, named after their seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sector {
    /// Seed `|f1 f2 sA>`, 4 states.
    Ffs,
    /// Seed `|f1 g2 sA>`, 5 states.
    Fgs,
    /// Seed `|g1 g2 sA>`, 6 states.
    Ggs,
}

impl Sector {
    pub const ALL: [Sector; 3] = [Sector::Ffs, Sector::Fgs, Sector::Ggs];

    pub fn seed_levels(self) -> &'static str {
        match self {
            Sector::Ffs => "ffs",
            Sector::Fgs => "fgs",
            Sector::Ggs => "ggs",
        }
    }
}

/// An eigenvector of `H2` written out term by term, coefficients in the
/// normalization they were derived with.
#[derive(Clone, Debug)]
pub struct ReferenceEigenvector {
    pub name: &'static str,
    pub eigenvalue: f64,
    pub components: Vec<(&'static str, f64)>,
}

impl ReferenceEigenvector {
    pub fn vector(&self, basis: &SubspaceBasis) -> Result<DVector<C64>> {
        let mut v = DVector::zeros(basis.len());
        for (label, coeff) in &self.components {
            let state = BasisState::parse(basis.layout(), label)?;
            let i = basis.index_of(&state).ok_or_else(|| Error::InvalidState {
                state: label.to_string(),
                reason: "not in sector basis".into(),
            })?;
            v[i] = C64::new(*coeff, 0.0);
        }
        Ok(v)
    }
}

/// Closed-form eigenvectors of `H2` (with `g = 1`) for each sector.
pub fn reference_eigenvectors(sector: Sector) -> Vec<ReferenceEigenvector> {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let s5 = 5f64.sqrt();
    let golden = (1.0 + s5) / 2.0;
    let conj = (1.0 - s5) / 2.0;
    match sector {
        Sector::Ffs => vec![
            ReferenceEigenvector {
                name: "phi1",
                eigenvalue: -s2,
                components: vec![
                    ("f1 f2 eA | 0 0", -s2 / 2.0),
                    ("f1 f2 gA | 1 0", 0.5),
                    ("f1 f2 gA | 0 1", 0.5),
                ],
            },
            ReferenceEigenvector {
                name: "phi2",
                eigenvalue: s2,
                components: vec![
                    ("f1 f2 eA | 0 0", s2 / 2.0),
                    ("f1 f2 gA | 1 0", 0.5),
                    ("f1 f2 gA | 0 1", 0.5),
                ],
            },
            ReferenceEigenvector {
                name: "phi3",
                eigenvalue: 0.0,
                components: vec![("f1 f2 gA | 1 0", -1.0 / s2), ("f1 f2 gA | 0 1", 1.0 / s2)],
            },
        ],
        Sector::Fgs => {
            let np = 1.0 / (5.0 + s5).sqrt();
            let nm = 1.0 / (5.0 - s5).sqrt();
            // (e_A, g_A|10>, g_A|01>, e_2) coefficients before normalization
            let build = |name, eigenvalue, norm: f64, c: [f64; 4]| ReferenceEigenvector {
                name,
                eigenvalue,
                components: vec![
                    ("f1 g2 eA | 0 0", norm * c[0]),
                    ("f1 g2 gA | 1 0", norm * c[1]),
                    ("f1 g2 gA | 0 1", norm * c[2]),
                    ("f1 e2 gA | 0 0", norm * c[3]),
                ],
            };
            vec![
                build("phi1'", -golden, np, [golden, -1.0, -golden, 1.0]),
                build("phi2'", golden, np, [golden, 1.0, golden, 1.0]),
                build("phi3'", conj, nm, [conj, 1.0, conj, 1.0]),
                build("phi4'", -conj, nm, [conj, -1.0, -conj, 1.0]),
            ]
        }
        Sector::Ggs => {
            let n12 = 1.0 / (2.0 * s3);
            let build = |name, eigenvalue, norm: f64, c: [f64; 5]| ReferenceEigenvector {
                name,
                eigenvalue,
                components: vec![
                    ("g1 g2 eA | 0 0", norm * c[0]),
                    ("g1 g2 gA | 1 0", norm * c[1]),
                    ("e1 g2 gA | 0 0", norm * c[2]),
                    ("g1 g2 gA | 0 1", norm * c[3]),
                    ("g1 e2 gA | 0 0", norm * c[4]),
                ],
            };
            vec![
                build("phi1''", -s3, n12, [2.0, -s3, 1.0, -s3, 1.0]),
                build("phi2''", s3, n12, [2.0, s3, 1.0, s3, 1.0]),
                build("phi3''", -1.0, 0.5, [0.0, 1.0, -1.0, -1.0, 1.0]),
                build("phi4''", 1.0, 0.5, [0.0, -1.0, -1.0, 1.0, 1.0]),
                build("phi5''", 0.0, 1.0 / s3, [-1.0, 0.0, 1.0, 0.0, 1.0]),
            ]
        }
    }
}

/// Closed-form spectrum of `H2` on each sector, seed zero mode included.
pub fn reference_spectrum(sector: Sector) -> Vec<f64> {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let s5 = 5f64.sqrt();
    let mut ev = match sector {
        Sector::Ffs => vec![-s2, 0.0, 0.0, s2],
        Sector::Fgs => vec![
            -(1.0 + s5) / 2.0,
            (1.0 + s5) / 2.0,
            (1.0 - s5) / 2.0,
            -(1.0 - s5) / 2.0,
            0.0,
        ],
        Sector::Ggs => vec![-s3, s3, -1.0, 1.0, 0.0, 0.0],
    };
    ev.sort_by(f64::total_cmp);
    ev
}
