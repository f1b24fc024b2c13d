//! The catalogue of inequality checks, each returning per-index margins.
//!
//! Margins are reported per index j (not a single boolean) so equality cases
//! and near-violations stay observable; pass/fail derives from the minimum
//! margin against the centralized tolerance.
//!
//! Eigenvalues of non-Hermitian products of PSD factors (`AB`,
//! `A^{1/2}B^{1/2}`, `A^{1-t}B^t`) are always computed through the similar
//! Hermitian form `M^{1/2} N M^{1/2}`, which avoids a general nonsymmetric
//! eigensolver and guarantees a real spectrum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues_desc, geometric_mean, hermitian_eig, matrix_power, psd_sqrt, scale_mat,
    singular_values, HermitianMatrix, Mat, PdMatrix, PsdMatrix,
};
use crate::tol;

/// A PSD pair plus the weight parameter used by the weighted checks.
#[derive(Debug, Clone)]
pub struct InequalityInstance {
    a: PsdMatrix,
    b: PsdMatrix,
    t: f64,
}

impl InequalityInstance {
    pub fn new(a: PsdMatrix, b: PsdMatrix, t: f64) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                left: format!("{}x{}", a.dim(), a.dim()),
                right: format!("{}x{}", b.dim(), b.dim()),
            });
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!(
                "weight t must lie in [0, 1], got {t}"
            )));
        }
        Ok(Self { a, b, t })
    }

    /// The unweighted default `t = 1/2`.
    pub fn symmetric(a: PsdMatrix, b: PsdMatrix) -> Result<Self> {
        Self::new(a, b, 0.5)
    }

    pub fn a(&self) -> &PsdMatrix {
        &self.a
    }

    pub fn b(&self) -> &PsdMatrix {
        &self.b
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Norm scale `1 + ||A|| + ||B||` entering tolerances and shifts.
    pub fn scale(&self) -> f64 {
        1.0 + self.a.norm2() + self.b.norm2()
    }

    pub fn tolerance(&self) -> f64 {
        tol::check_tol(&[self.a.norm2(), self.b.norm2()])
    }
}

/// Per-index margins of one inequality check on one instance.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityResult {
    pub id: String,
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl InequalityResult {
    pub fn new(id: impl Into<String>, margins: Vec<f64>, tolerance: f64) -> Self {
        let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            id: id.into(),
            margins,
            min_margin,
            tolerance,
            passed: min_margin >= -tolerance,
        }
    }
}

/// Keys of the proven built-in checks; the conjecture is kept apart because
/// a negative margin there is a candidate violation, not a regression.
pub const PROVEN_CHECKS: [&str; 8] = [
    "eq1", "eq2", "weyl-gm", "eq3", "eq4", "eq5", "eq7", "eq8",
];

pub const CONJECTURE: &str = "conjecture";

// ---------------------------------------------------------------------------
// Shared evaluation helpers (also used by the DSL evaluator; both sides must
// produce bitwise-identical intermediates).
// ---------------------------------------------------------------------------

/// `wa*A + wb*B`, elementwise scale-then-add.
pub fn affine_pair(a: &Mat, wa: f64, b: &Mat, wb: f64) -> Mat {
    scale_mat(a, wa) + scale_mat(b, wb)
}

/// Elementwise `lambda^p` on a PSD spectrum: `p = 0` maps everything
/// (including zeros) to one, zeros otherwise stay zero, and certificate-band
/// negatives are clamped before the power.
fn powered_eigs(eigs: &[f64], p: f64) -> Result<Vec<f64>> {
    if p == 0.0 {
        return Ok(vec![1.0; eigs.len()]);
    }
    let mut out = Vec::with_capacity(eigs.len());
    for &l in eigs {
        let l = if l < 0.0 { 0.0 } else { l };
        if l == 0.0 {
            if p < 0.0 {
                return Err(Error::Domain {
                    op: "powered spectrum",
                    detail: format!("negative exponent {p} on a singular matrix"),
                });
            }
            out.push(0.0);
        } else if p == 1.0 {
            out.push(l);
        } else {
            out.push(l.powf(p));
        }
    }
    Ok(out)
}

/// `diag(row) * W * diag(col)` built entrywise, so exact zeros in the
/// scalings produce exact zero rows/columns.
fn scaled_core(row: &[f64], w: &Mat, col: &[f64]) -> Mat {
    let mut m = w.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] *= row[i] * col[j];
        }
    }
    m
}

/// Singular values of `A^p B^q` for PSD `A`, `B`, computed from the factored
/// form `sigma(D_A^p (U_A* U_B) D_B^q)`: unitary outer factors cannot change
/// singular values, and rank deficiency survives exactly instead of being
/// buried under `eps * ||A^p B^q||` reconstruction noise (which a square
/// root in a margin would amplify to sqrt(eps)).
pub fn psd_product_singulars(a: &PsdMatrix, p: f64, b: &PsdMatrix, q: f64) -> Result<Vec<f64>> {
    let sa = hermitian_eig(a.as_herm())?;
    let sb = hermitian_eig(b.as_herm())?;
    let w = sa.unitary().adjoint() * sb.unitary();
    let da = powered_eigs(sa.eigenvalues(), p)?;
    let db = powered_eigs(sb.eigenvalues(), q)?;
    singular_values(&scaled_core(&da, &w, &db))
}

/// Real eigenvalues of `A^p B^q` for PSD `A`, `B`, via the similar Hermitian
/// Gram form `M M*` with `M = D_A^{p/2} (U_A* U_B) D_B^{q/2}`.
pub fn psd_product_eigenvalues(a: &PsdMatrix, p: f64, b: &PsdMatrix, q: f64) -> Result<Vec<f64>> {
    let sa = hermitian_eig(a.as_herm())?;
    let sb = hermitian_eig(b.as_herm())?;
    let w = sa.unitary().adjoint() * sb.unitary();
    let da = powered_eigs(sa.eigenvalues(), p / 2.0)?;
    let db = powered_eigs(sb.eigenvalues(), q / 2.0)?;
    let m = scaled_core(&da, &w, &db);
    let h = HermitianMatrix::new(&m * m.adjoint())?;
    eigenvalues_desc(h.matrix())
}

/// Real eigenvalues of `M N` for PSD `M`, `N` without eigenstructure at
/// hand, via `M^{1/2} N M^{1/2}`.
pub fn psd_pair_eigenvalues(m: &PsdMatrix, n: &PsdMatrix) -> Result<Vec<f64>> {
    let s = psd_sqrt(m)?;
    let h = HermitianMatrix::new(s.matrix() * n.matrix() * s.matrix())?;
    eigenvalues_desc(h.matrix())
}

/// Elementwise square root with the PSD clamp band: entries in `[-tol, 0)`
/// count as zero, entries below `-tol` are a numerical failure.
pub fn sqrt_clamped(values: &[f64], tolerance: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(values.len());
    for &v in values {
        if v < -tolerance {
            return Err(Error::NumericalFailure {
                op: "sqrt",
                residual: -v,
                bound: tolerance,
            });
        }
        out.push(if v <= 0.0 { 0.0 } else { v.sqrt() });
    }
    Ok(out)
}

fn margins_of(lhs: &[f64], rhs: &[f64]) -> Vec<f64> {
    lhs.iter().zip(rhs).map(|(l, r)| l - r).collect()
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

/// `(A + B)/2 >= A # B` in the Loewner order.
pub fn check_amgm_loewner(a: &PdMatrix, b: &PdMatrix) -> Result<InequalityResult> {
    let gm = geometric_mean(a, b)?;
    let lhs = affine_pair(a.matrix(), 0.5, b.matrix(), 0.5);
    let diff = lhs - gm.matrix();
    let eigs = eigenvalues_desc(&diff)?;
    let margin = eigs.last().copied().unwrap_or(0.0);
    let tolerance = tol::check_tol(&[a.norm2(), b.norm2()]);
    Ok(InequalityResult::new("eq1", vec![margin], tolerance))
}

/// `A + S A^{-1} S >= 2 S` in the Loewner order.
pub fn check_amgm_variant(a: &PdMatrix, s: &PdMatrix) -> Result<InequalityResult> {
    if a.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            left: format!("{}x{}", a.dim(), a.dim()),
            right: format!("{}x{}", s.dim(), s.dim()),
        });
    }
    let a_inv = matrix_power(a.as_psd(), -1.0)?;
    let lhs = a.matrix() + (s.matrix() * a_inv.matrix()) * s.matrix();
    let diff = lhs - scale_mat(s.matrix(), 2.0);
    let eigs = eigenvalues_desc(&diff)?;
    let margin = eigs.last().copied().unwrap_or(0.0);
    let tolerance = tol::check_tol(&[a.norm2(), s.norm2()]);
    Ok(InequalityResult::new("eq2", vec![margin], tolerance))
}

/// `lambda_j(A + B) >= 2 lambda_j(A # B)` for every j (Weyl monotonicity
/// applied to the Loewner AM-GM).
pub fn check_weyl_gm(a: &PdMatrix, b: &PdMatrix) -> Result<InequalityResult> {
    let gm = geometric_mean(a, b)?;
    let lhs = eigenvalues_desc(&(a.matrix() + b.matrix()))?;
    let gm_eigs = eigenvalues_desc(gm.matrix())?;
    let rhs: Vec<f64> = gm_eigs.iter().map(|l| 2.0 * l).collect();
    let tolerance = tol::check_tol(&[a.norm2(), b.norm2()]);
    Ok(InequalityResult::new(
        "weyl-gm",
        margins_of(&lhs, &rhs),
        tolerance,
    ))
}

/// `lambda_j(A + B) >= 2 sqrt(lambda_j(AB))`, with the internal identity
/// `sqrt(lambda_j(AB)) = sigma_j(A^{1/2} B^{1/2})` cross-checked.
pub fn check_bk1(inst: &InequalityInstance) -> Result<InequalityResult> {
    let tolerance = inst.tolerance();
    let lhs = eigenvalues_desc(&(inst.a.matrix() + inst.b.matrix()))?;
    let lam_ab = psd_product_eigenvalues(&inst.a, 1.0, &inst.b, 1.0)?;
    let roots = sqrt_clamped(&lam_ab, tolerance)?;

    // sigma_j(A^{1/2} B^{1/2}) must reproduce sqrt(lambda_j(AB)).
    let sigma = psd_product_singulars(&inst.a, 0.5, &inst.b, 0.5)?;
    let id_bound = 1e-8 * inst.scale();
    for (r, s) in roots.iter().zip(&sigma) {
        if (r - s).abs() > id_bound {
            return Err(Error::NumericalFailure {
                op: "check_bk1 internal identity",
                residual: (r - s).abs(),
                bound: id_bound,
            });
        }
    }

    let rhs: Vec<f64> = roots.iter().map(|r| 2.0 * r).collect();
    Ok(InequalityResult::new(
        "eq3",
        margins_of(&lhs, &rhs),
        tolerance,
    ))
}

/// `lambda_j(A + B) >= 2 lambda_j(A^{1/2} B^{1/2})`.
pub fn check_bk2(inst: &InequalityInstance) -> Result<InequalityResult> {
    let tolerance = inst.tolerance();
    let lhs = eigenvalues_desc(&(inst.a.matrix() + inst.b.matrix()))?;
    let lam = psd_product_eigenvalues(&inst.a, 0.5, &inst.b, 0.5)?;
    let rhs: Vec<f64> = lam.iter().map(|l| 2.0 * l).collect();
    Ok(InequalityResult::new(
        "eq4",
        margins_of(&lhs, &rhs),
        tolerance,
    ))
}

/// `lambda_j(A + B) >= 2 sqrt(sigma_j(AB))` — the theorem this toolkit is
/// centered on.
pub fn check_bkd(inst: &InequalityInstance) -> Result<InequalityResult> {
    let tolerance = inst.tolerance();
    let lhs = eigenvalues_desc(&(inst.a.matrix() + inst.b.matrix()))?;
    let sigma = psd_product_singulars(&inst.a, 1.0, &inst.b, 1.0)?;
    let rhs: Vec<f64> = sigma.iter().map(|s| 2.0 * s.sqrt()).collect();
    Ok(InequalityResult::new(
        "eq5",
        margins_of(&lhs, &rhs),
        tolerance,
    ))
}

/// `lambda_j((1-t)A + tB) >= sigma_j(A^{1-t} B^t)`.
pub fn check_ando(inst: &InequalityInstance) -> Result<InequalityResult> {
    let t = inst.t;
    let tolerance = inst.tolerance();
    let lhs_mat = affine_pair(inst.a.matrix(), 1.0 - t, inst.b.matrix(), t);
    let lhs = eigenvalues_desc(&lhs_mat)?;
    let rhs = psd_product_singulars(&inst.a, 1.0 - t, &inst.b, t)?;
    Ok(InequalityResult::new(
        "eq7",
        margins_of(&lhs, &rhs),
        tolerance,
    ))
}

/// `lambda_j((1-t)A + tB) >= lambda_j(A^{1-t} B^t)`.
pub fn check_prop4(inst: &InequalityInstance) -> Result<InequalityResult> {
    let t = inst.t;
    let tolerance = inst.tolerance();
    let lhs_mat = affine_pair(inst.a.matrix(), 1.0 - t, inst.b.matrix(), t);
    let lhs = eigenvalues_desc(&lhs_mat)?;
    let rhs = psd_product_eigenvalues(&inst.a, 1.0 - t, &inst.b, t)?;
    Ok(InequalityResult::new(
        "eq8",
        margins_of(&lhs, &rhs),
        tolerance,
    ))
}

/// Open conjecture: `lambda_j((1-t)A + tB) >= sqrt(sigma_j(A^{2(1-t)} B^{2t}))`.
///
/// A minimum margin below `-tolerance` makes `passed` false — a candidate
/// violation to be surfaced, never an assertion failure.
pub fn check_conjecture(inst: &InequalityInstance) -> Result<InequalityResult> {
    let t = inst.t;
    let tolerance = inst.tolerance();
    let lhs_mat = affine_pair(inst.a.matrix(), 1.0 - t, inst.b.matrix(), t);
    let lhs = eigenvalues_desc(&lhs_mat)?;
    let sigma = psd_product_singulars(&inst.a, 2.0 * (1.0 - t), &inst.b, 2.0 * t)?;
    let rhs: Vec<f64> = sigma.iter().map(|s| s.sqrt()).collect();
    Ok(InequalityResult::new(
        CONJECTURE,
        margins_of(&lhs, &rhs),
        tolerance,
    ))
}

/// Runs the eight proven checks plus the conjecture on one instance.
///
/// PD-only checks (eq1, eq2, weyl-gm) evaluate on `P + eps*scale*I` copies
/// when an input is only semidefinite; the shift is the caller-visible
/// perturbation pathway, the kernels themselves stay strict.
pub fn verify_instance(inst: &InequalityInstance, eps: f64) -> Result<Vec<InequalityResult>> {
    let shift = eps * inst.scale();
    let pd_a = ensure_pd(inst.a(), shift)?;
    let pd_b = ensure_pd(inst.b(), shift)?;

    Ok(vec![
        check_amgm_loewner(&pd_a, &pd_b)?,
        check_amgm_variant(&pd_a, &pd_b)?,
        check_weyl_gm(&pd_a, &pd_b)?,
        check_bk1(inst)?,
        check_bk2(inst)?,
        check_bkd(inst)?,
        check_ando(inst)?,
        check_prop4(inst)?,
        check_conjecture(inst)?,
    ])
}

fn ensure_pd(p: &PsdMatrix, shift: f64) -> Result<PdMatrix> {
    if p.is_pd() {
        PdMatrix::from_psd(p.clone())
    } else {
        p.shifted(shift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, identity, mat_from_real};

    fn pd(vals: &[f64]) -> PdMatrix {
        PdMatrix::from_matrix(diag_real(vals)).unwrap()
    }

    fn psd(vals: &[f64]) -> PsdMatrix {
        PsdMatrix::from_matrix(diag_real(vals)).unwrap()
    }

    fn inst(a: &[f64], b: &[f64], t: f64) -> InequalityInstance {
        InequalityInstance::new(psd(a), psd(b), t).unwrap()
    }

    #[test]
    fn eq1_examples() {
        let i2 = PdMatrix::from_matrix(identity(2)).unwrap();
        let r = check_amgm_loewner(&i2, &i2).unwrap();
        assert!(r.min_margin.abs() < 1e-12);

        let r = check_amgm_loewner(&pd(&[1.0, 4.0]), &pd(&[4.0, 1.0])).unwrap();
        assert!((r.min_margin - 0.5).abs() < 1e-12);

        let r = check_amgm_loewner(&pd(&[4.0, 4.0]), &i2).unwrap();
        assert!((r.min_margin - 0.5).abs() < 1e-12);
    }

    #[test]
    fn eq2_examples() {
        let i2 = PdMatrix::from_matrix(identity(2)).unwrap();
        let r = check_amgm_variant(&i2, &i2).unwrap();
        assert!(r.min_margin.abs() < 1e-12);

        // A = diag(1,4), S = I: difference diag(0, 2.25).
        let r = check_amgm_variant(&pd(&[1.0, 4.0]), &i2).unwrap();
        assert!(r.min_margin.abs() < 1e-12);

        // Scalars A = 4, S = 2: 4 + 1 - 4 = 1.
        let r = check_amgm_variant(&pd(&[4.0]), &pd(&[2.0])).unwrap();
        assert!((r.min_margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weyl_examples() {
        let i2 = PdMatrix::from_matrix(identity(2)).unwrap();
        let r = check_weyl_gm(&i2, &i2).unwrap();
        assert!(r.margins.iter().all(|m| m.abs() < 1e-12));

        let r = check_weyl_gm(&pd(&[1.0, 4.0]), &pd(&[4.0, 1.0])).unwrap();
        assert!(r.margins.iter().all(|m| (m - 1.0).abs() < 1e-12));

        let r = check_weyl_gm(&pd(&[4.0]), &pd(&[1.0])).unwrap();
        assert!((r.margins[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eq3_examples() {
        let r = check_bk1(&inst(&[1.0, 1.0], &[1.0, 1.0], 0.5)).unwrap();
        assert!(r.margins.iter().all(|m| m.abs() < 1e-12));

        let r = check_bk1(&inst(&[4.0, 1.0], &[1.0, 4.0], 0.5)).unwrap();
        assert!(r.margins.iter().all(|m| (m - 1.0).abs() < 1e-12));

        // Rank-deficient: AB = 0, lambda(A+B) = (1,1).
        let r = check_bk1(&inst(&[1.0, 0.0], &[0.0, 1.0], 0.5)).unwrap();
        assert!(r.margins.iter().all(|m| (m - 1.0).abs() < 1e-12));
    }

    #[test]
    fn eq4_examples() {
        let r = check_bk2(&inst(&[1.0, 1.0], &[1.0, 1.0], 0.5)).unwrap();
        assert!(r.margins.iter().all(|m| m.abs() < 1e-12));

        let r = check_bk2(&inst(&[4.0, 1.0], &[1.0, 4.0], 0.5)).unwrap();
        assert!(r.margins.iter().all(|m| (m - 1.0).abs() < 1e-12));

        let r = check_bk2(&inst(&[1.0, 0.0], &[0.0, 1.0], 0.5)).unwrap();
        assert!(r.margins.iter().all(|m| (m - 1.0).abs() < 1e-12));
    }

    #[test]
    fn eq5_examples() {
        let r = check_bkd(&inst(&[2.0, 1.0], &[2.0, 1.0], 0.5)).unwrap();
        assert!(r.margins.iter().all(|m| m.abs() < 1e-10));

        let r = check_bkd(&inst(&[4.0, 1.0], &[1.0, 4.0], 0.5)).unwrap();
        assert!(r.margins.iter().all(|m| (m - 1.0).abs() < 1e-12));
    }

    // Independent 2x2 oracle: closed-form eigenvalues of [[a, c], [c, b]].
    fn eig2x2(a: f64, b: f64, c: f64) -> (f64, f64) {
        let tr = a + b;
        let disc = ((a - b).powi(2) + 4.0 * c * c).sqrt();
        ((tr + disc) / 2.0, (tr - disc) / 2.0)
    }

    #[test]
    fn eq5_noncommuting_2x2_against_closed_form() {
        let a = PsdMatrix::from_matrix(mat_from_real(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap();
        let b = PsdMatrix::from_matrix(mat_from_real(2, 2, &[1.0, -0.3, -0.3, 3.0])).unwrap();
        let i = InequalityInstance::symmetric(a.clone(), b.clone()).unwrap();
        let r = check_bkd(&i).unwrap();

        let sum = a.matrix() + b.matrix();
        let (l1, l2) = eig2x2(sum[(0, 0)].re, sum[(1, 1)].re, sum[(0, 1)].re);
        // sigma_j(AB) from the eigenvalues of (AB)(AB)^*.
        let ab = a.matrix() * b.matrix();
        let g = &ab * ab.adjoint();
        let (g1, g2) = eig2x2(g[(0, 0)].re, g[(1, 1)].re, g[(0, 1)].re);
        let expected = [l1 - 2.0 * g1.sqrt().sqrt(), l2 - 2.0 * g2.sqrt().sqrt()];
        assert!((r.margins[0] - expected[0]).abs() < 1e-10);
        assert!((r.margins[1] - expected[1]).abs() < 1e-10);
        assert!(r.min_margin >= -r.tolerance);
    }

    #[test]
    fn eq7_examples() {
        for t in [0.0, 1.0] {
            let r = check_ando(&inst(&[3.0, 1.0], &[2.0, 5.0], t)).unwrap();
            assert!(r.margins.iter().all(|m| m.abs() < 1e-10), "t={t}");
        }
        let r = check_ando(&inst(&[4.0, 1.0], &[1.0, 4.0], 0.5)).unwrap();
        assert!(r.margins.iter().all(|m| (m - 0.5).abs() < 1e-12));
    }

    #[test]
    fn eq8_examples() {
        let r = check_prop4(&inst(&[3.0, 1.0], &[2.0, 5.0], 0.0)).unwrap();
        assert!(r.margins.iter().all(|m| m.abs() < 1e-10));

        let r = check_prop4(&inst(&[4.0, 1.0], &[1.0, 4.0], 0.5)).unwrap();
        assert!(r.margins.iter().all(|m| (m - 0.5).abs() < 1e-12));

        for t in [0.0, 0.3, 0.5, 0.8, 1.0] {
            let r = check_prop4(&inst(&[3.0, 1.0], &[3.0, 1.0], t)).unwrap();
            assert!(r.margins.iter().all(|m| m.abs() < 1e-10), "t={t}");
        }
    }

    #[test]
    fn conjecture_examples() {
        let r = check_conjecture(&inst(&[3.0, 1.0], &[2.0, 5.0], 0.0)).unwrap();
        assert!(r.margins.iter().all(|m| m.abs() < 1e-10));

        for t in [0.0, 0.5, 1.0] {
            let r = check_conjecture(&inst(&[3.0, 1.0], &[3.0, 1.0], t)).unwrap();
            assert!(r.margins.iter().all(|m| m.abs() < 1e-10), "t={t}");
        }
    }

    #[test]
    fn conjecture_at_half_is_half_bkd() {
        let a = PsdMatrix::from_matrix(mat_from_real(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap();
        let b = PsdMatrix::from_matrix(mat_from_real(2, 2, &[1.0, -0.3, -0.3, 3.0])).unwrap();
        let i = InequalityInstance::new(a, b, 0.5).unwrap();
        let conj = check_conjecture(&i).unwrap();
        let bkd = check_bkd(&i).unwrap();
        for (c, k) in conj.margins.iter().zip(&bkd.margins) {
            assert!((c - k / 2.0).abs() <= 1e-12 * i.scale());
        }
    }

    #[test]
    fn verify_instance_shifts_semidefinite_inputs() {
        let i = inst(&[1.0, 0.0], &[0.0, 1.0], 0.5);
        let results = verify_instance(&i, 1e-8).unwrap();
        assert_eq!(results.len(), 9);
        for r in &results {
            assert!(r.passed, "{} failed: {}", r.id, r.min_margin);
        }
    }
}
