//! Unitary and Lindblad time evolution with sampled observables.

pub mod expm;
pub mod liouvillian;

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{BasisState, SubspaceBasis};
use crate::model::JumpOperator;
use crate::operator::OperatorMatrix;

pub use expm::{krylov_expv, ExpPropagator, KrylovOptions, DENSE_LIMIT};
pub use liouvillian::build_liouvillian;

/// Samples per run when the caller does not choose a cadence.
pub const DEFAULT_SAMPLES: usize = 400;

pub const NORM_FAILURE: f64 = 1e-6;
pub const TRACE_FAILURE: f64 = 1e-5;
pub const POSITIVITY_FAILURE: f64 = 1e-5;

fn same_basis(a: &Arc<SubspaceBasis>, b: &Arc<SubspaceBasis>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

#[derive(Clone, Debug)]
pub struct StateVector {
    pub basis: Arc<SubspaceBasis>,
    pub amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(basis: Arc<SubspaceBasis>, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::BasisMismatch);
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn basis_state(basis: Arc<SubspaceBasis>, state: &BasisState) -> Result<Self> {
        let i = basis.index_of(state).ok_or_else(|| Error::InvalidState {
            state: state.label(),
            reason: "not in basis".into(),
        })?;
        let mut amplitudes = DVector::zeros(basis.len());
        amplitudes[i] = C64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn amplitude(&self, state: &BasisState) -> Option<C64> {
        self.basis.index_of(state).map(|i| self.amplitudes[i])
    }
}

/// `<a|b>`.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<C64> {
    if !same_basis(&a.basis, &b.basis) {
        return Err(Error::BasisMismatch);
    }
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub basis: Arc<SubspaceBasis>,
    pub matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(basis: Arc<SubspaceBasis>, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::BasisMismatch);
        }
        Ok(Self { basis, matrix })
    }

    pub fn pure(state: &StateVector) -> Self {
        Self {
            basis: state.basis.clone(),
            matrix: &state.amplitudes * state.amplitudes.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().min()
    }

    pub fn symmetrize(&mut self) {
        self.matrix = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
    }

    pub fn population(&self, state: &BasisState) -> Option<f64> {
        self.basis.index_of(state).map(|i| self.matrix[(i, i)].re)
    }
}

/// Quantity recorded at each sample time.
#[derive(Clone, Debug)]
pub enum Probe {
    /// Complex amplitude on a basis state; state vectors only.
    Amplitude(BasisState),
    Population(BasisState),
    /// `<O>`, or `tr(O rho)` for densities.
    Expectation {
        label: String,
        op: OperatorMatrix,
    },
    /// `||psi||` for states, `tr(rho)` for densities.
    Norm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    Complex,
    Real,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub label: String,
    pub kind: ColumnKind,
}

enum Resolved<'a> {
    Amplitude(usize),
    Population(usize),
    Expectation(&'a OperatorMatrix),
    Norm,
}

fn resolve<'a>(
    probes: &'a [Probe],
    basis: &SubspaceBasis,
    allow_amplitudes: bool,
) -> Result<(Vec<Resolved<'a>>, Vec<Column>)> {
    let find = |s: &BasisState| {
        basis
            .index_of(s)
            .ok_or_else(|| Error::InvalidProbe(format!("state {s} is not in the basis")))
    };
    let mut resolved = Vec::new();
    let mut columns = Vec::new();
    for p in probes {
        let (r, col) = match p {
            Probe::Amplitude(s) => {
                if !allow_amplitudes {
                    return Err(Error::InvalidProbe(
                        "amplitudes are undefined for density matrices".into(),
                    ));
                }
                (
                    Resolved::Amplitude(find(s)?),
                    Column {
                        label: s.label(),
                        kind: ColumnKind::Complex,
                    },
                )
            }
            Probe::Population(s) => (
                Resolved::Population(find(s)?),
                Column {
                    label: format!("pop({s})"),
                    kind: ColumnKind::Real,
                },
            ),
            Probe::Expectation { label, op } => {
                if op.dim() != basis.len() {
                    return Err(Error::BasisMismatch);
                }
                (
                    Resolved::Expectation(op),
                    Column {
                        label: label.clone(),
                        kind: ColumnKind::Real,
                    },
                )
            }
            Probe::Norm => (
                Resolved::Norm,
                Column {
                    label: if allow_amplitudes { "norm" } else { "trace" }.to_string(),
                    kind: ColumnKind::Real,
                },
            ),
        };
        resolved.push(r);
        columns.push(col);
    }
    Ok((resolved, columns))
}

/// Sampled observables on a strictly increasing time grid (units of `1/g`).
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
    pub records: Vec<Vec<C64>>,
}

impl TimeSeries {
    fn new(columns: Vec<Column>) -> Self {
        Self {
            times: Vec::new(),
            columns,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.label == label)
    }

    /// One column over time.
    pub fn series(&self, label: &str) -> Option<Vec<C64>> {
        let k = self.column_index(label)?;
        Some(self.records.iter().map(|r| r[k]).collect())
    }

    pub fn last(&self, label: &str) -> Option<C64> {
        let k = self.column_index(label)?;
        self.records.last().map(|r| r[k])
    }

    /// Value at the sample closest to `t`.
    pub fn at(&self, label: &str, t: f64) -> Option<C64> {
        let k = self.column_index(label)?;
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))?
            .0;
        Some(self.records[i][k])
    }

    /// Appends the columns of `other`, which must share the time grid.
    pub fn merge(&mut self, other: TimeSeries) -> Result<()> {
        if self.times != other.times {
            return Err(Error::InvalidProbe("time grids differ".into()));
        }
        self.columns.extend(other.columns);
        for (r, o) in self.records.iter_mut().zip(other.records) {
            r.extend(o);
        }
        Ok(())
    }

    /// CSV: `gt`, optional `t_ns`, then `re(label)`/`im(label)` for complex
    /// columns, then real columns. `comment` lines are written first, `#`-prefixed.
    pub fn write_csv<W: Write>(
        &self,
        out: &mut W,
        comment: &[String],
        ns_per_gt: Option<f64>,
    ) -> std::io::Result<()> {
        for line in comment {
            writeln!(out, "# {line}")?;
        }
        let complex: Vec<usize> = (0..self.columns.len())
            .filter(|&k| self.columns[k].kind == ColumnKind::Complex)
            .collect();
        let real: Vec<usize> = (0..self.columns.len())
            .filter(|&k| self.columns[k].kind == ColumnKind::Real)
            .collect();
        let mut header = vec!["gt".to_string()];
        if ns_per_gt.is_some() {
            header.push("t_ns".to_string());
        }
        for &k in &complex {
            header.push(format!("re({})", self.columns[k].label));
            header.push(format!("im({})", self.columns[k].label));
        }
        for &k in &real {
            header.push(self.columns[k].label.clone());
        }
        writeln!(out, "{}", header.join(","))?;
        for (t, rec) in self.times.iter().zip(&self.records) {
            let mut row = vec![format!("{t}")];
            if let Some(scale) = ns_per_gt {
                row.push(format!("{}", t * scale));
            }
            for &k in &complex {
                row.push(format!("{}", rec[k].re));
                row.push(format!("{}", rec[k].im));
            }
            for &k in &real {
                row.push(format!("{}", rec[k].re));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Sample times `0, h, 2h, ...` with `t` always last.
pub fn sample_times(t: f64, sample_every: f64) -> Result<Vec<f64>> {
    if t.is_nan() || t < 0.0 || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "evolution time must be >= 0, got {t}"
        )));
    }
    if sample_every.is_nan() || sample_every <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sample interval must be positive, got {sample_every}"
        )));
    }
    let mut times = vec![0.0];
    if t == 0.0 {
        return Ok(times);
    }
    let mut k = 1usize;
    loop {
        let tk = k as f64 * sample_every;
        if tk >= t * (1.0 - 1e-12) {
            break;
        }
        times.push(tk);
        k += 1;
    }
    times.push(t);
    Ok(times)
}

/// Interval that yields [`DEFAULT_SAMPLES`] samples over `[0, t]`.
pub fn default_interval(t: f64) -> f64 {
    if t > 0.0 {
        t / DEFAULT_SAMPLES as f64
    } else {
        1.0
    }
}

/// `psi(t) = exp(-i H t) psi0`, sampled every `sample_every`.
pub fn propagate_state(
    h: &OperatorMatrix,
    psi0: &StateVector,
    t: f64,
    sample_every: f64,
    probes: &[Probe],
) -> Result<(TimeSeries, StateVector)> {
    if h.dim() != psi0.basis.len() {
        return Err(Error::BasisMismatch);
    }
    let deviation = h.hermiticity_deviation();
    if !h.is_hermitian() || deviation > 1e-12 {
        return Err(Error::NonHermitian { deviation });
    }
    let (resolved, columns) = resolve(probes, &psi0.basis, true)?;
    let times = sample_times(t, sample_every)?;
    let generator = h.scale(C64::new(0.0, -1.0));
    let mut prop = ExpPropagator::new(&generator);
    let norm0 = psi0.norm();

    let mut series = TimeSeries::new(columns);
    let mut psi = psi0.amplitudes.clone();
    let mut prev = 0.0;
    for &tk in &times {
        prop.step(&mut psi, tk - prev)?;
        prev = tk;
        let drift = (psi.norm() - norm0).abs();
        if drift > NORM_FAILURE {
            return Err(Error::IntegratorFailure { drift, time: tk });
        }
        let record = resolved
            .iter()
            .map(|r| match r {
                Resolved::Amplitude(i) => psi[*i],
                Resolved::Population(i) => C64::new(psi[*i].norm_sqr(), 0.0),
                Resolved::Expectation(op) => op.expectation(psi.as_slice()),
                Resolved::Norm => C64::new(psi.norm(), 0.0),
            })
            .collect();
        series.times.push(tk);
        series.records.push(record);
    }
    Ok((
        series,
        StateVector {
            basis: psi0.basis.clone(),
            amplitudes: psi,
        },
    ))
}

fn vectorize(m: &DMatrix<C64>) -> DVector<C64> {
    let d = m.nrows();
    DVector::from_fn(d * d, |idx, _| m[(idx / d, idx % d)])
}

fn unvectorize(v: &DVector<C64>, d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |r, c| v[r * d + c])
}

/// Lindblad evolution of `rho0`. The state is symmetrized and checked for
/// trace drift and negative eigenvalues at every sample.
pub fn propagate_density(
    h: &OperatorMatrix,
    jumps: &[JumpOperator],
    rho0: &DensityMatrix,
    t: f64,
    sample_every: f64,
    probes: &[Probe],
) -> Result<(TimeSeries, DensityMatrix)> {
    let d = rho0.basis.len();
    if h.dim() != d || jumps.iter().any(|j| j.op.dim() != d) {
        return Err(Error::BasisMismatch);
    }
    let (resolved, columns) = resolve(probes, &rho0.basis, false)?;
    let times = sample_times(t, sample_every)?;
    let liouvillian = build_liouvillian(h, jumps);
    let mut prop = ExpPropagator::new(&liouvillian);
    let trace0 = rho0.trace().re;

    let mut series = TimeSeries::new(columns);
    let mut rho = rho0.clone();
    let mut x = vectorize(&rho.matrix);
    let mut prev = 0.0;
    for &tk in &times {
        prop.step(&mut x, tk - prev)?;
        prev = tk;
        rho.matrix = unvectorize(&x, d);
        rho.symmetrize();
        x = vectorize(&rho.matrix);

        let drift = (rho.trace().re - trace0).abs();
        if drift > TRACE_FAILURE {
            return Err(Error::TraceDrift { drift, time: tk });
        }
        let min_eigenvalue = rho.min_eigenvalue();
        if min_eigenvalue < -POSITIVITY_FAILURE {
            return Err(Error::NegativeEigenvalue {
                min_eigenvalue,
                time: tk,
            });
        }
        let record = resolved
            .iter()
            .map(|r| match r {
                Resolved::Population(i) => C64::new(rho.matrix[(*i, *i)].re, 0.0),
                Resolved::Expectation(op) => {
                    let o = op.to_dense();
                    (o * &rho.matrix).trace()
                }
                Resolved::Norm => rho.trace(),
                Resolved::Amplitude(_) => unreachable!("rejected by resolve"),
            })
            .collect();
        series.times.push(tk);
        series.records.push(record);
    }
    Ok((series, rho))
}
