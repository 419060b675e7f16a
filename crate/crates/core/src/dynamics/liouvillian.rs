//! Sparse Lindblad superoperator acting on row-major vectorized `rho`.
//!
//! ```text
//! d rho/dt = -i (H_eff rho - rho H_eff^dag) + sum_k r_k J_k rho J_k^dag
//! H_eff    = H - (i/2) sum_k r_k J_k^dag J_k
//! ```

use num_complex::Complex64 as C64;

use crate::model::JumpOperator;
use crate::operator::OperatorMatrix;

/// Effective non-Hermitian Hamiltonian `H - (i/2) sum r J^dag J`.
pub fn effective_hamiltonian(h: &OperatorMatrix, jumps: &[JumpOperator]) -> OperatorMatrix {
    let mut heff = h.clone();
    for j in jumps.iter().filter(|j| j.rate != 0.0) {
        let jdj = j.op.adjoint().matmul(&j.op);
        heff = heff.add(&jdj.scale(C64::new(0.0, -0.5 * j.rate)));
    }
    heff
}

/// Builds the superoperator; `rho[i][j]` sits at index `i * d + j`.
pub fn build_liouvillian(h: &OperatorMatrix, jumps: &[JumpOperator]) -> OperatorMatrix {
    let d = h.dim();
    let heff = effective_hamiltonian(h, jumps);
    let minus_i = C64::new(0.0, -1.0);
    let plus_i = C64::new(0.0, 1.0);
    let mut trip = Vec::new();

    for (i, k, e) in heff.triplets() {
        // (-i H_eff rho)_{ij} += -i E_ik rho_kj
        for j in 0..d {
            trip.push((i * d + j, k * d + j, minus_i * e));
        }
        // (i rho H_eff^dag)_{ri} += i rho_rk conj(E_ik)
        for r in 0..d {
            trip.push((r * d + i, r * d + k, plus_i * e.conj()));
        }
    }
    for j in jumps.iter().filter(|j| j.rate != 0.0) {
        let entries: Vec<_> = j.op.triplets().collect();
        for &(i, k, a) in &entries {
            for &(jj, l, b) in &entries {
                trip.push((i * d + jj, k * d + l, a * b.conj() * j.rate));
            }
        }
    }
    OperatorMatrix::from_triplets(d * d, trip, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn vec_of(m: &DMatrix<C64>) -> DVector<C64> {
        let d = m.nrows();
        DVector::from_fn(d * d, |idx, _| m[(idx / d, idx % d)])
    }

    #[test]
    fn matches_dense_lindblad_formula() {
        let h = OperatorMatrix::from_triplets(
            3,
            vec![
                (0, 1, C64::new(0.4, 0.1)),
                (1, 0, C64::new(0.4, -0.1)),
                (2, 2, C64::new(0.7, 0.0)),
                (1, 2, C64::new(0.2, 0.0)),
                (2, 1, C64::new(0.2, 0.0)),
            ],
            true,
        );
        let jump = JumpOperator {
            label: "j".into(),
            rate: 0.3,
            op: OperatorMatrix::from_triplets(
                3,
                vec![(0, 2, C64::new(1.0, 0.0)), (1, 2, C64::new(0.0, 0.5))],
                false,
            ),
        };
        let rho = DMatrix::from_fn(3, 3, |r, c| {
            C64::new((r + 2 * c) as f64 * 0.1, r as f64 - c as f64)
        });
        let (hd, jd) = (h.to_dense(), jump.op.to_dense());
        let i = C64::new(0.0, 1.0);
        let expected = -(&hd * &rho - &rho * &hd) * i
            + (&jd * &rho * jd.adjoint()
                - (jd.adjoint() * &jd * &rho + &rho * jd.adjoint() * &jd) * C64::new(0.5, 0.0))
                * C64::new(0.3, 0.0);
        let l = build_liouvillian(&h, &[jump]);
        assert!((l.apply(&vec_of(&rho)) - vec_of(&expected)).norm() < 1e-13);
    }
}
