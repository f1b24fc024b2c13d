//! One-sided Jacobi SVD for dense complex matrices.
//!
//! Works directly on the columns of the input (never forming M*M), so the
//! computed singular values stay accurate for the margin checks that divide
//! or square-root them. The `M*M` eigenvalue route lives in the test suite
//! as the independent oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::jacobi::sweep_cap;

type Mat = DMatrix<Complex64>;

pub(crate) struct RawSvd {
    pub singulars: Vec<f64>,
    pub left: Mat,
    pub right: Mat,
}

/// One-sided Jacobi on an m x n matrix with m >= n: repeatedly applies right
/// rotations until all column pairs are orthogonal relative to their norms.
fn one_sided(m: &Mat) -> Result<(Mat, Mat)> {
    let (rows, cols) = m.shape();
    let mut w = m.clone();
    let mut v = Mat::identity(cols, cols);
    if cols < 2 {
        return Ok((w, v));
    }

    let cap = sweep_cap(rows.max(cols));
    let mut converged = false;
    for _ in 0..cap {
        let mut rotated = false;
        for p in 0..cols - 1 {
            for q in p + 1..cols {
                let mut alpha = 0.0f64;
                let mut beta = 0.0f64;
                let mut gamma = Complex64::new(0.0, 0.0);
                for i in 0..rows {
                    let wip = w[(i, p)];
                    let wiq = w[(i, q)];
                    alpha += wip.norm_sqr();
                    beta += wiq.norm_sqr();
                    gamma += wip.conj() * wiq;
                }
                if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;

                // Diagonalize the Gram block [[alpha, gamma], [conj, beta]].
                let gabs = gamma.norm();
                let phase = gamma / gabs;
                let tau = (beta - alpha) / (2.0 * gabs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cs = Complex64::new(c, 0.0);
                let sp = phase.conj() * s;
                let cq = phase.conj() * c;

                for i in 0..rows {
                    let wip = w[(i, p)];
                    let wiq = w[(i, q)];
                    w[(i, p)] = wip * cs - wiq * sp;
                    w[(i, q)] = wip * s + wiq * cq;
                }
                for i in 0..cols {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * cs - viq * sp;
                    v[(i, q)] = vip * s + viq * cq;
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
        for p in 0..cols - 1 {
            for q in p + 1..cols {
                let mut gamma = Complex64::new(0.0, 0.0);
                for i in 0..rows {
                    gamma += w[(i, p)].conj() * w[(i, q)];
                }
                off += gamma.norm_sqr();
            }
        }
        return Err(Error::NoConvergence {
            op: "svd",
            cap,
            residual: off.sqrt(),
        });
    }

    Ok((w, v))
}

/// Deterministic orthonormal completion: fills `u` columns with indices in
/// `missing` by Gram-Schmidt over the standard basis.
fn complete_basis(u: &mut Mat, missing: &[usize]) {
    let rows = u.nrows();
    let cols = u.ncols();
    let mut next = missing.iter().copied().peekable();
    'basis: for k in 0..rows {
        let Some(&slot) = next.peek() else {
            break;
        };
        let mut cand = Mat::zeros(rows, 1);
        cand[(k, 0)] = Complex64::new(1.0, 0.0);
        // Two passes of orthogonalization against the accepted columns.
        for _ in 0..2 {
            for j in 0..cols {
                if missing.contains(&j) && j >= slot {
                    continue;
                }
                let col = u.column(j);
                let proj: Complex64 = (0..rows).map(|i| col[i].conj() * cand[(i, 0)]).sum();
                for i in 0..rows {
                    let d = col[i] * proj;
                    cand[(i, 0)] -= d;
                }
            }
        }
        let norm = cand.norm();
        if norm < 0.5 {
            continue 'basis;
        }
        for i in 0..rows {
            u[(i, slot)] = cand[(i, 0)] / Complex64::new(norm, 0.0);
        }
        next.next();
    }
}

/// SVD with thin factors: `left` is m x k, `right` is n x k, k = min(m, n),
/// singular values sorted descending.
pub(crate) fn jacobi_svd(m: &Mat) -> Result<RawSvd> {
    let (rows, cols) = m.shape();
    if rows < cols {
        // Decompose the adjoint and swap the factors.
        let flipped = jacobi_svd(&m.adjoint())?;
        return Ok(RawSvd {
            singulars: flipped.singulars,
            left: flipped.right,
            right: flipped.left,
        });
    }
    let k = cols;
    if k == 0 {
        return Ok(RawSvd {
            singulars: Vec::new(),
            left: Mat::zeros(rows, 0),
            right: Mat::zeros(cols, 0),
        });
    }

    let (w, v) = one_sided(m)?;

    let mut order: Vec<usize> = (0..k).collect();
    let norms: Vec<f64> = (0..k).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());

    let sigma_max = norms[order[0]];
    let zero_cut = sigma_max * 1e-18;

    let mut singulars = Vec::with_capacity(k);
    let mut left = Mat::zeros(rows, k);
    let mut right = Mat::zeros(cols, k);
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        singulars.push(sigma);
        right.set_column(slot, &v.column(j));
        if sigma > zero_cut {
            let inv = Complex64::new(1.0 / sigma, 0.0);
            for i in 0..rows {
                left[(i, slot)] = w[(i, j)] * inv;
            }
        } else {
            missing.push(slot);
        }
    }
    if !missing.is_empty() {
        complete_basis(&mut left, &missing);
    }

    // Canonical phases: first significant entry of each left column made
    // positive real, compensated in the right factor.
    for j in 0..k {
        let col = left.column(j);
        let maxab = col.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if maxab == 0.0 {
            continue;
        }
        let lead = col.iter().find(|z| z.norm() > 1e-10 * maxab).copied();
        if let Some(z) = lead {
            let phase = z / z.norm();
            let adj = phase.conj();
            for i in 0..rows {
                left[(i, j)] *= adj;
            }
            for i in 0..cols {
                right[(i, j)] *= adj;
            }
        }
    }

    Ok(RawSvd {
        singulars,
        left,
        right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nilpotent_example() {
        // [[0,2],[0,0]] has singular values (2, 0).
        let mut m = Mat::zeros(2, 2);
        m[(0, 1)] = Complex64::new(2.0, 0.0);
        let svd = jacobi_svd(&m).unwrap();
        assert!((svd.singulars[0] - 2.0).abs() < 1e-15);
        assert!(svd.singulars[1].abs() < 1e-15);
        // Reconstruction.
        let sigma = Mat::from_fn(2, 2, |i, j| {
            if i == j {
                Complex64::new(svd.singulars[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let rec = &svd.left * sigma * svd.right.adjoint();
        assert!((rec - m).norm() < 1e-14);
    }

    #[test]
    fn rectangular_shapes() {
        let m = Mat::from_fn(3, 2, |i, j| Complex64::new((i + 2 * j) as f64, 1.0));
        let svd = jacobi_svd(&m).unwrap();
        assert_eq!(svd.left.shape(), (3, 2));
        assert_eq!(svd.right.shape(), (2, 2));
        let wide = m.adjoint();
        let svd_w = jacobi_svd(&wide).unwrap();
        for (a, b) in svd.singulars.iter().zip(&svd_w.singulars) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_matrix() {
        let m = Mat::zeros(3, 3);
        let svd = jacobi_svd(&m).unwrap();
        assert_eq!(svd.singulars, vec![0.0, 0.0, 0.0]);
        let r = (svd.left.adjoint() * &svd.left - Mat::identity(3, 3)).norm();
        assert!(r < 1e-14);
    }
}
