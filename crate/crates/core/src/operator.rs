//! Sparse complex operators on a [`SubspaceBasis`].

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{excitation_number, OperatorTerm, SubspaceBasis};

/// Entries with magnitude below this are dropped when assembling.
pub const DROP_TOLERANCE: f64 = 1e-15;

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
            hermitian: true,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))), true)
    }

    /// Sums duplicate entries and drops those below [`DROP_TOLERANCE`].
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
        hermitian: bool,
    ) -> Self {
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (r, c, v) in triplets {
            assert!(
                r < dim && c < dim,
                "triplet ({r}, {c}) outside dimension {dim}"
            );
            *acc.entry((r, c)).or_default() += v;
        }
        let mut row_ptr = vec![0; dim + 1];
        let mut col_idx = Vec::with_capacity(acc.len());
        let mut values = Vec::with_capacity(acc.len());
        for ((r, c), v) in acc {
            if v.norm() < DROP_TOLERANCE {
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            col_idx,
            values,
            hermitian,
        }
    }

    pub fn from_dense(m: &DMatrix<C64>, hermitian: bool) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        Self::from_triplets(
            n,
            (0..n).flat_map(|r| (0..n).map(move |c| (r, c, m[(r, c)]))),
            hermitian,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Nonzero entries of row `r` as `(column, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r)
            .find(|&(cc, _)| cc == c)
            .map(|(_, v)| v)
            .unwrap_or_default()
    }

    /// `y = M x`.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::default();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.dim);
        self.apply_into(x.as_slice(), y.as_mut_slice());
        y
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.dim,
            self.triplets().map(|(r, c, v)| (c, r, v.conj())),
            self.hermitian,
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_triplets(
            self.dim,
            self.triplets().map(|(r, c, v)| (r, c, v * s)),
            self.hermitian && s.im == 0.0,
        )
    }

    pub fn add(&self, other: &OperatorMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(
            self.dim,
            self.triplets().chain(other.triplets()),
            self.hermitian && other.hermitian,
        )
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &OperatorMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut trip = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    trip.push((r, c, a * b));
                }
            }
        }
        Self::from_triplets(self.dim, trip, false)
    }

    /// `max |M - M^dag|` over all entries.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of `[self, other]`.
    pub fn commutator_norm(&self, other: &OperatorMatrix) -> f64 {
        let a = self.to_dense();
        let b = other.to_dense();
        (&a * &b - &b * &a).norm()
    }

    /// Expectation `<x|M|x>`.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let mut acc = C64::default();
        for r in 0..self.dim {
            let mut row = C64::default();
            for (c, v) in self.row(r) {
                row += v * x[c];
            }
            acc += x[r].conj() * row;
        }
        acc
    }
}

/// Assembles `sum_terms <row|term|col>` on `basis`. A term that maps a basis
/// state outside the basis is a closure violation.
pub fn build_operator(terms: &[OperatorTerm], basis: &SubspaceBasis) -> Result<OperatorMatrix> {
    let n_max = basis.layout().n_max();
    let mut trip = Vec::new();
    for term in terms {
        for part in term.expanded() {
            for (col, state) in basis.states().iter().enumerate() {
                if let Some((amp, image)) = part.apply(state, n_max) {
                    let row = basis
                        .index_of(&image)
                        .ok_or_else(|| Error::ClosureViolation {
                            term: part.to_string(),
                            from: state.label(),
                            to: image.label(),
                        })?;
                    trip.push((row, col, amp));
                }
            }
        }
    }
    let hermitian = terms.iter().all(OperatorTerm::is_hermitian);
    Ok(OperatorMatrix::from_triplets(basis.len(), trip, hermitian))
}

/// Diagonal excitation-number operator on `basis`.
pub fn excitation_operator(basis: &SubspaceBasis) -> OperatorMatrix {
    OperatorMatrix::from_triplets(
        basis.len(),
        basis
            .states()
            .iter()
            .enumerate()
            .map(|(i, s)| (i, i, C64::new(excitation_number(s) as f64, 0.0))),
        true,
    )
}
