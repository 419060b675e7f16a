//! Target phase gate, computational encoding, and state fidelities.
//!
//! Data qubits encode `0 -> |f>`, `1 -> |g>`; the central qubit encodes
//! `0 -> |f>`, `1 -> |s>`. The gate applies `e^{i delta}` to the all-ones state
//! `|g ... g s_A>` (vacuum modes) and leaves every other computational state
//! alone. The three-qubit truth table lists `|f1 g2 sA> -> |f1 f2 sA>`; that
//! line is read as the identity map, which is what the sector analysis gives.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::dynamics::{DensityMatrix, StateVector};
use crate::error::{Error, Result};
use crate::hilbert::{BasisState, QuditLevel, SubspaceBasis, SystemLayout};
use crate::operator::OperatorMatrix;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let mut p = phase % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Maps logical bit strings to zero-photon basis states.
///
/// Bit order, most significant first: data qudit 1, qudit A, then data qudits
/// 2..N-1. For three qubits this gives the ordering
/// `f1f2fA, f1g2fA, f1f2sA, f1g2sA, g1f2fA, g1g2fA, g1f2sA, g1g2sA`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComputationalEncoding {
    layout: SystemLayout,
}

impl ComputationalEncoding {
    pub fn new(layout: SystemLayout) -> Self {
        Self { layout }
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        1 << self.layout.n_qubits()
    }

    /// Qudit indices in bit order, most significant first.
    fn bit_sites(&self) -> Vec<usize> {
        let mut sites = vec![0, self.layout.central()];
        sites.extend(1..self.layout.n_data());
        sites
    }

    pub fn state(&self, index: usize) -> BasisState {
        let n = self.layout.n_qubits();
        let a = self.layout.central();
        let mut levels = vec![QuditLevel::F; n];
        for (pos, &site) in self.bit_sites().iter().enumerate() {
            let bit = (index >> (n - 1 - pos)) & 1 == 1;
            levels[site] = match (bit, site == a) {
                (false, _) => QuditLevel::F,
                (true, false) => QuditLevel::G,
                (true, true) => QuditLevel::S,
            };
        }
        BasisState::new(levels, vec![0; self.layout.n_modes()])
    }

    pub fn states(&self) -> Vec<BasisState> {
        (0..self.dim()).map(|i| self.state(i)).collect()
    }

    /// `|g ... g s_A>` with vacuum modes.
    pub fn flagged(&self) -> BasisState {
        self.state(self.dim() - 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    pub encoding: ComputationalEncoding,
    pub phase: f64,
}

impl GateSpec {
    pub fn new(layout: SystemLayout, phase: f64) -> Result<Self> {
        if !(phase > -PI && phase <= PI) {
            return Err(Error::InvalidParameter(format!(
                "gate phase must lie in (-pi, pi], got {phase}"
            )));
        }
        Ok(Self {
            encoding: ComputationalEncoding::new(layout),
            phase,
        })
    }

    /// The controlled-pi gate.
    pub fn pi(layout: SystemLayout) -> Self {
        Self::new(layout, PI).expect("pi is in range")
    }

    pub fn n_qubits(&self) -> usize {
        self.encoding.layout().n_qubits()
    }

    pub fn flagged_state(&self) -> BasisState {
        self.encoding.flagged()
    }
}

/// Identity on `basis` except `e^{i delta}` on the flagged state.
pub fn target_unitary(spec: &GateSpec, basis: &SubspaceBasis) -> Result<OperatorMatrix> {
    for s in spec.encoding.states() {
        if !basis.contains(&s) {
            return Err(Error::MissingComputationalState(s.label()));
        }
    }
    let flagged = basis
        .index_of(&spec.flagged_state())
        .expect("checked above");
    let phase = C64::from_polar(1.0, spec.phase);
    Ok(OperatorMatrix::from_triplets(
        basis.len(),
        (0..basis.len()).map(|i| {
            (
                i,
                i,
                if i == flagged {
                    phase
                } else {
                    C64::new(1.0, 0.0)
                },
            )
        }),
        true,
    ))
}

/// Input amplitudes over the computational states, in encoding order.
#[derive(Clone, Debug, PartialEq)]
pub struct InputState {
    pub amplitudes: Vec<C64>,
}

impl InputState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "input amplitudes have squared norm {norm}, expected 1"
            )));
        }
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "{} amplitudes is not a power of two",
                amplitudes.len()
            )));
        }
        Ok(Self { amplitudes })
    }

    /// The unequal-weight three-qubit input used for the fidelity studies:
    /// `c = (1, sqrt2, sqrt3, 2, sqrt5, sqrt6, sqrt7, 2 sqrt2) / 6`.
    pub fn reference_three_qubit() -> Self {
        let c = [
            1.0 / 6.0,
            2f64.sqrt() / 6.0,
            3f64.sqrt() / 6.0,
            1.0 / 3.0,
            5f64.sqrt() / 6.0,
            6f64.sqrt() / 6.0,
            7f64.sqrt() / 6.0,
            2f64.sqrt() / 3.0,
        ];
        Self::new(c.iter().map(|&x| C64::new(x, 0.0)).collect()).expect("normalized")
    }

    pub fn uniform(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            amplitudes: vec![a; dim],
        }
    }

    pub fn basis_input(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![C64::default(); 1 << n_qubits];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn to_state(
        &self,
        basis: Arc<SubspaceBasis>,
        encoding: &ComputationalEncoding,
    ) -> Result<StateVector> {
        if self.amplitudes.len() != encoding.dim() {
            return Err(Error::LengthMismatch {
                name: "input amplitudes",
                got: self.amplitudes.len(),
                expected: encoding.dim(),
            });
        }
        let mut v = DVector::zeros(basis.len());
        for (c, s) in self.amplitudes.iter().zip(encoding.states()) {
            let i = basis
                .index_of(&s)
                .ok_or_else(|| Error::MissingComputationalState(s.label()))?;
            v[i] = *c;
        }
        StateVector::new(basis, v)
    }
}

/// `U_p |Psi(0)>` as amplitudes over the computational states.
fn ideal_image(input: &InputState, spec: &GateSpec) -> Result<Vec<C64>> {
    if input.amplitudes.len() != spec.encoding.dim() {
        return Err(Error::LengthMismatch {
            name: "input amplitudes",
            got: input.amplitudes.len(),
            expected: spec.encoding.dim(),
        });
    }
    let last = input.amplitudes.len() - 1;
    Ok(input
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if i == last {
                c * C64::from_polar(1.0, spec.phase)
            } else {
                c
            }
        })
        .collect())
}

/// `|<psi(tau)| U_p |Psi(0)>|^2`, with no phase optimization.
pub fn pure_fidelity(
    final_state: &StateVector,
    input: &InputState,
    spec: &GateSpec,
) -> Result<f64> {
    let image = ideal_image(input, spec)?;
    let mut acc = C64::default();
    for (u, s) in image.iter().zip(spec.encoding.states()) {
        let i = final_state
            .basis
            .index_of(&s)
            .ok_or_else(|| Error::MissingComputationalState(s.label()))?;
        acc += final_state.amplitudes[i].conj() * u;
    }
    Ok(acc.norm_sqr())
}

/// Density matrix over qudit configurations only.
#[derive(Clone, Debug)]
pub struct ReducedDensityMatrix {
    pub configs: Vec<Vec<QuditLevel>>,
    pub matrix: DMatrix<C64>,
}

impl ReducedDensityMatrix {
    pub fn index_of(&self, levels: &[QuditLevel]) -> Option<usize> {
        self.configs.iter().position(|c| c == levels)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().min()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }
}

/// Traces out the resonator modes. Qudit configurations are ordered by first
/// appearance in the basis.
pub fn partial_trace_modes(rho: &DensityMatrix) -> ReducedDensityMatrix {
    let basis = &rho.basis;
    let mut configs: Vec<Vec<QuditLevel>> = Vec::new();
    let mut owner = Vec::with_capacity(basis.len());
    for s in basis.states() {
        let k = match configs.iter().position(|c| *c == s.levels) {
            Some(k) => k,
            None => {
                configs.push(s.levels.clone());
                configs.len() - 1
            }
        };
        owner.push(k);
    }
    let mut matrix = DMatrix::zeros(configs.len(), configs.len());
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            if basis.state(i).photons == basis.state(j).photons {
                matrix[(owner[i], owner[j])] += rho.matrix[(i, j)];
            }
        }
    }
    ReducedDensityMatrix { configs, matrix }
}

/// `<Psi(0)| U_p^dag rho' U_p |Psi(0)>` on the qudit-only density matrix.
pub fn mixed_fidelity(
    reduced: &ReducedDensityMatrix,
    input: &InputState,
    spec: &GateSpec,
) -> Result<f64> {
    let image = ideal_image(input, spec)?;
    let idx = spec
        .encoding
        .states()
        .iter()
        .map(|s| {
            reduced
                .index_of(&s.levels)
                .ok_or_else(|| Error::MissingComputationalState(s.label()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = C64::default();
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            acc += image[a].conj() * reduced.matrix[(i, j)] * image[b];
        }
    }
    Ok(acc.re)
}
