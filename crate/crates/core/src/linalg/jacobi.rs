//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! Two-sided Jacobi is quadratically convergent and, with a fixed sweep
//! order, fully deterministic — the properties the trace machinery needs.
//! Matrices here are small (n <= 32), so the O(n^3) per sweep cost is
//! irrelevant next to auditability.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

type Mat = DMatrix<Complex64>;

/// Sweep cap: exceeding it is a reported numerical failure, never a silent
/// wrong answer.
pub(crate) fn sweep_cap(n: usize) -> usize {
    100 * n.max(1)
}

/// A 2x2 unitary that diagonalizes the Hermitian block [[a, h], [conj(h), b]].
///
/// Returns `(c, s, phase, t)` describing
/// `J = [[c, s], [-s*conj(phase), c*conj(phase)]]` with `phase = h/|h|`,
/// plus the tangent `t` used to update the diagonal: the rotated block is
/// `diag(a - t*|h|, b + t*|h|)`.
fn hermitian_rotation(a: f64, b: f64, h: Complex64) -> (f64, f64, Complex64, f64) {
    let habs = h.norm();
    let phase = h / habs;
    let tau = (b - a) / (2.0 * habs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (tau - (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    (c, s, phase, t)
}

/// Raw Jacobi iteration: returns the eigenvalue diagonal (unsorted) and the
/// accumulated unitary. Callers are responsible for ordering conventions.
pub(crate) fn jacobi_hermitian(h: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = h.nrows();
    let mut a = h.clone();
    let mut u = Mat::identity(n, n);
    if n < 2 {
        let eigs = (0..n).map(|i| a[(i, i)].re).collect();
        return Ok((eigs, u));
    }

    let cap = sweep_cap(n);
    // Relative threshold keeps graded matrices accurate; the absolute floor
    // stops the sweep from chasing denormal junk next to exact-zero diagonal
    // entries.
    let floor = f64::EPSILON * h.norm();
    let mut converged = false;
    for _ in 0..cap {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if apq.norm() <= f64::EPSILON * (app.abs() * aqq.abs()).sqrt()
                    || apq.norm() <= floor
                {
                    continue;
                }
                rotated = true;
                let (c, s, phase, t) = hermitian_rotation(app, aqq, apq);
                let habs = apq.norm();
                let cs = Complex64::new(c, 0.0);
                let sp = phase.conj() * s;

                // A <- J* A J, J acting on the (p, q) plane.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * cs - aiq * sp;
                    a[(i, q)] = aip * s + aiq * phase.conj() * c;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * cs - aqj * phase * s;
                    a[(q, j)] = apj * s + aqj * phase * c;
                }
                // Pivot entries get their analytic values; the touched rows
                // are re-symmetrized so the threshold test never sees drift.
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(app - t * habs, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * habs, 0.0);
                for i in 0..n {
                    if i != p && i != q {
                        a[(p, i)] = a[(i, p)].conj();
                        a[(q, i)] = a[(i, q)].conj();
                    }
                }

                for i in 0..n {
                    let uip = u[(i, p)];
                    let uiq = u[(i, q)];
                    u[(i, p)] = uip * cs - uiq * sp;
                    u[(i, q)] = uip * s + uiq * phase.conj() * c;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }

    if !converged {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a[(p, q)].norm_sqr();
                }
            }
        }
        return Err(Error::NoConvergence {
            op: "hermitian_eig",
            cap,
            residual: off.sqrt(),
        });
    }

    let eigs = (0..n).map(|i| a[(i, i)].re).collect();
    Ok((eigs, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(v: &[f64], n: usize) -> Mat {
        Mat::from_fn(n, n, |i, j| Complex64::new(v[i * n + j], 0.0))
    }

    #[test]
    fn diagonal_input_is_fixed_point() {
        let (eigs, u) = jacobi_hermitian(&cm(&[3.0, 0.0, 0.0, -1.0], 2)).unwrap();
        assert_eq!(eigs, vec![3.0, -1.0]);
        assert_eq!(u, Mat::identity(2, 2));
    }

    #[test]
    fn symmetric_2x2_closed_form() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1.
        let (mut eigs, _) = jacobi_hermitian(&cm(&[2.0, 1.0, 1.0, 2.0], 2)).unwrap();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((eigs[0] - 3.0).abs() < 1e-14);
        assert!((eigs[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_offdiagonal() {
        // [[1, i], [-i, 1]] has eigenvalues 2 and 0.
        let mut m = Mat::zeros(2, 2);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        m[(1, 1)] = Complex64::new(1.0, 0.0);
        m[(0, 1)] = Complex64::new(0.0, 1.0);
        m[(1, 0)] = Complex64::new(0.0, -1.0);
        let (mut eigs, u) = jacobi_hermitian(&m).unwrap();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((eigs[0] - 2.0).abs() < 1e-14);
        assert!(eigs[1].abs() < 1e-14);
        // Unitarity of the accumulated transform.
        let r = (u.adjoint() * &u - Mat::identity(2, 2)).norm();
        assert!(r < 1e-14);
    }
}
