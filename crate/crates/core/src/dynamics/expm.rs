//! Exponential action `exp(t A) v` for a time-independent generator `A`.
//!
//! Small generators are exponentiated densely (scaling and squaring with a
//! Padé approximant) and the step propagator is cached; large ones use a
//! restarted Krylov (Arnoldi) projection with local error control.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;

/// Generators up to this dimension are exponentiated densely.
pub const DENSE_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    /// Krylov subspace dimension.
    pub dim: usize,
    /// Target local error per step.
    pub tolerance: f64,
    pub max_rejections: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            dim: 30,
            tolerance: 1e-10,
            max_rejections: 20,
        }
    }
}

/// Propagates `dx/dt = A x` in place.
pub enum ExpPropagator<'a> {
    Dense {
        generator: DMatrix<C64>,
        cache: Vec<(f64, DMatrix<C64>)>,
    },
    Krylov {
        generator: &'a OperatorMatrix,
        options: KrylovOptions,
    },
}

impl<'a> ExpPropagator<'a> {
    /// Picks the dense route up to [`DENSE_LIMIT`], Krylov beyond.
    pub fn new(generator: &'a OperatorMatrix) -> Self {
        if generator.dim() <= DENSE_LIMIT {
            Self::dense(generator)
        } else {
            Self::krylov(generator, KrylovOptions::default())
        }
    }

    pub fn dense(generator: &OperatorMatrix) -> Self {
        ExpPropagator::Dense {
            generator: generator.to_dense(),
            cache: Vec::new(),
        }
    }

    pub fn krylov(generator: &'a OperatorMatrix, options: KrylovOptions) -> Self {
        ExpPropagator::Krylov { generator, options }
    }

    /// Replaces `x` with `exp(dt A) x`.
    pub fn step(&mut self, x: &mut DVector<C64>, dt: f64) -> Result<()> {
        if dt == 0.0 {
            return Ok(());
        }
        match self {
            ExpPropagator::Dense { generator, cache } => {
                let idx = match cache.iter().position(|(t, _)| *t == dt) {
                    Some(i) => i,
                    None => {
                        let u = (&*generator * C64::new(dt, 0.0)).exp();
                        cache.push((dt, u));
                        cache.len() - 1
                    }
                };
                *x = &cache[idx].1 * &*x;
                Ok(())
            }
            ExpPropagator::Krylov { generator, options } => {
                *x = krylov_expv(generator, x, dt, options)?;
                Ok(())
            }
        }
    }
}

fn inf_norm(a: &OperatorMatrix) -> f64 {
    (0..a.dim())
        .map(|r| a.row(r).map(|(_, v)| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn round_step(t: f64) -> f64 {
    let s = 10f64.powf(t.log10().floor() - 1.0);
    (t / s).ceil() * s
}

/// `exp(t A) v` by restarted Arnoldi with the error estimate of the
/// augmented Hessenberg exponential.
pub fn krylov_expv(
    a: &OperatorMatrix,
    v: &DVector<C64>,
    t: f64,
    options: &KrylovOptions,
) -> Result<DVector<C64>> {
    let n = a.dim();
    let beta0 = v.norm();
    if beta0 == 0.0 || t == 0.0 {
        return Ok(v.clone());
    }
    let anorm = inf_norm(a);
    if anorm == 0.0 {
        return Ok(v.clone());
    }
    let m = options.dim.min(n).max(1);
    let tol = options.tolerance;
    let btol = 1e-7;
    let gamma = 0.9;
    let delta = 1.2;
    let t_out = t.abs();
    let sgn = t.signum();

    let mp1 = (m + 1) as f64;
    let fact = (mp1 / std::f64::consts::E).powf(mp1) * (2.0 * std::f64::consts::PI * mp1).sqrt();
    let mut xm = 1.0 / m as f64;
    let mut t_new = (1.0 / anorm) * ((fact * tol) / (4.0 * beta0 * anorm)).powf(xm);
    t_new = round_step(t_new);

    let mut w = v.clone();
    let mut beta = beta0;
    let mut t_now = 0.0;
    let mut basis: Vec<DVector<C64>> = Vec::with_capacity(m + 1);
    let mut p = DVector::<C64>::zeros(n);

    while t_now < t_out {
        let mut t_step = (t_out - t_now).min(t_new);
        basis.clear();
        basis.push(&w / C64::new(beta, 0.0));
        let mut h = DMatrix::<C64>::zeros(m + 2, m + 2);
        let mut mb = m;
        let mut happy = false;
        for j in 0..m {
            a.apply_into(basis[j].as_slice(), p.as_mut_slice());
            for (i, vi) in basis.iter().enumerate() {
                let hij = vi.dotc(&p);
                h[(i, j)] = hij;
                p.axpy(-hij, vi, C64::new(1.0, 0.0));
            }
            let s = p.norm();
            if s < btol {
                happy = true;
                mb = j + 1;
                t_step = t_out - t_now;
                break;
            }
            h[(j + 1, j)] = C64::new(s, 0.0);
            basis.push(&p / C64::new(s, 0.0));
        }
        let mut avnorm = 0.0;
        if !happy {
            h[(m + 1, m)] = C64::new(1.0, 0.0);
            a.apply_into(basis[m].as_slice(), p.as_mut_slice());
            avnorm = p.norm();
        }

        let mut rejections = 0;
        let (f, err_loc) = loop {
            let mx = if happy { mb } else { mb + 2 };
            let hm = h.view((0, 0), (mx, mx)) * C64::new(sgn * t_step, 0.0);
            let f = hm.exp();
            if happy {
                break (f, btol);
            }
            let phi1 = (beta * f[(m, 0)]).norm();
            let phi2 = (beta * f[(m + 1, 0)] * avnorm).norm();
            let err = if phi1 > 10.0 * phi2 {
                xm = 1.0 / m as f64;
                phi2
            } else if phi1 > phi2 {
                xm = 1.0 / m as f64;
                phi1 * phi2 / (phi1 - phi2)
            } else {
                xm = 1.0 / (m as f64 - 1.0).max(1.0);
                phi1
            };
            if err <= delta * t_step * tol {
                break (f, err);
            }
            if rejections == options.max_rejections {
                return Err(Error::IntegratorFailure {
                    drift: err,
                    time: t_now,
                });
            }
            t_step = round_step(gamma * t_step * (t_step * tol / err).powf(xm));
            rejections += 1;
        };

        let mx = if happy { mb } else { mb + 1 };
        let mut next = DVector::<C64>::zeros(n);
        for (i, vi) in basis.iter().take(mx).enumerate() {
            next.axpy(f[(i, 0)] * beta, vi, C64::new(1.0, 0.0));
        }
        w = next;
        beta = w.norm();
        t_now += t_step;
        if beta == 0.0 {
            break;
        }
        let err = err_loc.max(anorm * f64::EPSILON);
        t_new = round_step(gamma * t_step * (t_step * tol / err).powf(xm));
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference by eigendecomposition of a Hermitian `H`: `exp(-i t H)`.
    fn eig_propagator(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
        let e = h.clone().symmetric_eigen();
        let phases = DMatrix::from_diagonal(&e.eigenvalues.map(|l| C64::from_polar(1.0, -l * t)));
        &e.eigenvectors * phases * e.eigenvectors.adjoint()
    }

    fn chain(n: usize) -> OperatorMatrix {
        // tight-binding chain with an on-site gradient
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, C64::new(0.01 * i as f64, 0.0)));
            if i + 1 < n {
                trip.push((i, i + 1, C64::new(1.0, 0.0)));
                trip.push((i + 1, i, C64::new(1.0, 0.0)));
            }
        }
        OperatorMatrix::from_triplets(n, trip, true)
    }

    #[test]
    fn dense_and_krylov_agree_with_eigen_route() {
        let n = 80;
        let h = chain(n);
        let gen = h.scale(C64::new(0.0, -1.0));
        let mut v = DVector::<C64>::zeros(n);
        v[n / 2] = C64::new(1.0, 0.0);
        let t = 7.3;
        let reference = eig_propagator(&h.to_dense(), t) * &v;

        let krylov = krylov_expv(&gen, &v, t, &KrylovOptions::default()).unwrap();
        assert!((&krylov - &reference).norm() < 1e-9);

        let mut dense = ExpPropagator::dense(&gen);
        let mut x = v.clone();
        dense.step(&mut x, t).unwrap();
        assert!((&x - &reference).norm() < 1e-11);
    }

    #[test]
    fn krylov_handles_non_normal_generators() {
        // decay chain 0 -> 1 -> 2 with rates 1, 2
        let a = OperatorMatrix::from_triplets(
            3,
            vec![
                (0, 0, C64::new(-1.0, 0.0)),
                (1, 0, C64::new(1.0, 0.0)),
                (1, 1, C64::new(-2.0, 0.0)),
                (2, 1, C64::new(2.0, 0.0)),
            ],
            false,
        );
        let v = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::default(), C64::default()]);
        let t = 1.5;
        let w = krylov_expv(
            &a,
            &v,
            t,
            &KrylovOptions {
                dim: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let p0 = (-t).exp();
        // dp1/dt = p0 - 2 p1  =>  p1 = e^{-t} - e^{-2t}
        let p1 = (-t).exp() - (-2.0 * t).exp();
        assert!((w[0].re - p0).abs() < 1e-9);
        assert!((w[1].re - p1).abs() < 1e-9);
        assert!((w.iter().map(|c| c.re).sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_generator_is_identity() {
        let a = OperatorMatrix::zeros(100);
        let v = DVector::from_element(100, C64::new(0.1, 0.0));
        assert_eq!(
            krylov_expv(&a, &v, 3.0, &KrylovOptions::default()).unwrap(),
            v
        );
    }
}
