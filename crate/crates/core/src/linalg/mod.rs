//! Dense complex Hermitian/general matrix kernels: eigendecomposition, SVD,
//! matrix functions, polar decomposition, geometric mean, Loewner margins.
//!
//! Everything is complex throughout; real inputs embed with zero imaginary
//! parts. All operations are pure and deterministic for a fixed input.

mod jacobi;
mod svd_kernel;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

/// Dense complex matrix, the common currency of the crate.
pub type Mat = DMatrix<Complex64>;

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn mat_from_real(rows: usize, cols: usize, data: &[f64]) -> Mat {
    assert_eq!(data.len(), rows * cols, "row-major data length");
    Mat::from_fn(rows, cols, |i, j| Complex64::new(data[i * cols + j], 0.0))
}

pub fn mat_from_parts(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Mat {
    assert_eq!(re.len(), rows * cols);
    assert_eq!(im.len(), rows * cols);
    Mat::from_fn(rows, cols, |i, j| {
        Complex64::new(re[i * cols + j], im[i * cols + j])
    })
}

pub fn diag_real(vals: &[f64]) -> Mat {
    let n = vals.len();
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(vals[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Entrywise scaling by a real scalar. Shared by the native checks and the
/// DSL evaluator so both sides produce bitwise-identical intermediates.
pub fn scale_mat(m: &Mat, s: f64) -> Mat {
    m * Complex64::new(s, 0.0)
}

pub fn is_finite_mat(m: &Mat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Assembles [[a, b], [c, d]] from conforming blocks.
pub fn block2x2(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Mat {
    let (r1, c1) = a.shape();
    let (r2, c2) = d.shape();
    assert_eq!(b.shape(), (r1, c2));
    assert_eq!(c.shape(), (r2, c1));
    let mut out = Mat::zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(a);
    out.view_mut((0, c1), (r1, c2)).copy_from(b);
    out.view_mut((r1, 0), (r2, c1)).copy_from(c);
    out.view_mut((r1, c1), (r2, c2)).copy_from(d);
    out
}

fn dim_mismatch(left: usize, right: usize) -> Error {
    Error::DimensionMismatch {
        left: format!("{left}x{left}"),
        right: format!("{right}x{right}"),
    }
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Square complex matrix that is self-adjoint by construction: `new`
/// symmetrizes via `(H + H*)/2`, making the diagonal exactly real.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: Mat,
}

impl HermitianMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidArgument(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if !is_finite_mat(&m) {
            return Err(Error::InvalidArgument(
                "matrix entries must be finite".into(),
            ));
        }
        let sym = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self { mat: sym })
    }

    pub fn from_real(n: usize, data: &[f64]) -> Self {
        Self::new(mat_from_real(n, n, data)).expect("finite square data")
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.mat
    }

    pub fn into_matrix(self) -> Mat {
        self.mat
    }

    /// Largest singular value, equal to `max |lambda_j|` for Hermitian input.
    pub fn norm2(&self) -> f64 {
        match eigenvalues_desc(&self.mat) {
            Ok(eigs) if !eigs.is_empty() => {
                f64::max(eigs[0].abs(), eigs[eigs.len() - 1].abs())
            }
            _ => 0.0,
        }
    }
}

/// Hermitian matrix carrying its computed spectrum as a semidefiniteness
/// certificate (eigenvalues stored descending).
#[derive(Debug, Clone)]
pub struct PsdMatrix {
    herm: HermitianMatrix,
    eigenvalues: Vec<f64>,
}

impl PsdMatrix {
    pub fn new(herm: HermitianMatrix) -> Result<Self> {
        let eigenvalues = eigenvalues_desc(herm.matrix())?;
        let norm = spectral_from_eigs(&eigenvalues);
        let min_eig = eigenvalues.last().copied().unwrap_or(0.0);
        if min_eig < -tol::psd_tol(norm) {
            return Err(Error::NotPsd {
                min_eig,
                tol: tol::psd_tol(norm),
            });
        }
        Ok(Self { herm, eigenvalues })
    }

    pub fn from_matrix(m: Mat) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn dim(&self) -> usize {
        self.herm.dim()
    }

    pub fn matrix(&self) -> &Mat {
        self.herm.matrix()
    }

    pub fn as_herm(&self) -> &HermitianMatrix {
        &self.herm
    }

    /// Certificate spectrum, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min_eig(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn norm2(&self) -> f64 {
        spectral_from_eigs(&self.eigenvalues)
    }

    /// Numerical rank at the `1e-8 * lambda_max` cutoff.
    pub fn numerical_rank(&self) -> usize {
        let lmax = self.eigenvalues.first().copied().unwrap_or(0.0);
        let cut = tol::rank_cutoff(lmax);
        self.eigenvalues.iter().filter(|&&l| l > cut).count()
    }

    pub fn is_pd(&self) -> bool {
        self.min_eig() > tol::pd_tol(self.norm2())
    }

    /// `A + eps*I`, the standard definiteness shift for semidefinite inputs.
    pub fn shifted(&self, eps: f64) -> Result<PdMatrix> {
        let n = self.dim();
        let m = self.matrix() + scale_mat(&identity(n), eps);
        PdMatrix::new(HermitianMatrix::new(m)?)
    }
}

/// Positive definite refinement of [`PsdMatrix`].
#[derive(Debug, Clone)]
pub struct PdMatrix {
    inner: PsdMatrix,
}

impl PdMatrix {
    pub fn new(herm: HermitianMatrix) -> Result<Self> {
        let psd = PsdMatrix::new(herm)?;
        Self::from_psd(psd)
    }

    pub fn from_psd(psd: PsdMatrix) -> Result<Self> {
        let norm = psd.norm2();
        if psd.min_eig() <= tol::pd_tol(norm) {
            return Err(Error::NotPd {
                min_eig: psd.min_eig(),
                tol: tol::pd_tol(norm),
            });
        }
        Ok(Self { inner: psd })
    }

    pub fn from_matrix(m: Mat) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn matrix(&self) -> &Mat {
        self.inner.matrix()
    }

    pub fn as_psd(&self) -> &PsdMatrix {
        &self.inner
    }

    pub fn as_herm(&self) -> &HermitianMatrix {
        self.inner.as_herm()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.inner.eigenvalues()
    }

    pub fn min_eig(&self) -> f64 {
        self.inner.min_eig()
    }

    pub fn norm2(&self) -> f64 {
        self.inner.norm2()
    }
}

/// Eigendecomposition of a Hermitian matrix: `H = U diag(lambda) U*` with
/// eigenvalues sorted descending and deterministically phase-normalized
/// eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    unitary: Mat,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn unitary(&self) -> &Mat {
        &self.unitary
    }

    /// `sum_{k <= r} P_k`, the orthogonal projection onto the span of the
    /// leading `r` eigenvectors.
    pub fn leading_projection(&self, r: usize) -> Mat {
        let cols = self.unitary.columns(0, r);
        &cols * cols.adjoint()
    }

    /// Reassemble `U f(diag) U*`.
    pub fn apply_scalar(&self, f: impl Fn(f64) -> f64) -> Mat {
        let n = self.eigenvalues.len();
        let d = diag_real(&self.eigenvalues.iter().map(|&l| f(l)).collect::<Vec<_>>());
        if n == 0 {
            return Mat::zeros(0, 0);
        }
        &self.unitary * d * self.unitary.adjoint()
    }
}

/// Thin singular value decomposition `M = U diag(sigma) V*`.
#[derive(Debug, Clone)]
pub struct Svd {
    singulars: Vec<f64>,
    left: Mat,
    right: Mat,
}

impl Svd {
    pub fn singulars(&self) -> &[f64] {
        &self.singulars
    }

    pub fn left(&self) -> &Mat {
        &self.left
    }

    pub fn right(&self) -> &Mat {
        &self.right
    }
}

/// `S = U |S|` with unitary `U` (partial-isometry completion when `S` is
/// singular) and PSD modulus.
#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    unitary: Mat,
    modulus: PsdMatrix,
}

impl PolarDecomposition {
    pub fn unitary(&self) -> &Mat {
        &self.unitary
    }

    pub fn modulus(&self) -> &PsdMatrix {
        &self.modulus
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

fn spectral_from_eigs(eigs: &[f64]) -> f64 {
    match (eigs.first(), eigs.last()) {
        (Some(a), Some(b)) => f64::max(a.abs(), b.abs()),
        _ => 0.0,
    }
}

/// Eigenvalues of a Hermitian matrix, descending, without eigenvectors or
/// the full canonicalization pass.
pub fn eigenvalues_desc(m: &Mat) -> Result<Vec<f64>> {
    let (mut eigs, _) = jacobi::jacobi_hermitian(m)?;
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(eigs)
}

/// Full eigendecomposition with the deterministic ordering contract:
/// eigenvalues descending; within equal-eigenvalue clusters, columns are
/// phase-normalized (first significant entry positive real) and ordered
/// lexicographically.
pub fn hermitian_eig(h: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let (raw_eigs, raw_u) = jacobi::jacobi_hermitian(h.matrix())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_eigs[b].partial_cmp(&raw_eigs[a]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw_eigs[i]).collect();
    let mut unitary = Mat::zeros(n, n);
    for (slot, &i) in order.iter().enumerate() {
        unitary.set_column(slot, &raw_u.column(i));
    }

    for j in 0..n {
        normalize_column_phase(&mut unitary, j);
    }

    // Lexicographic ordering inside (numerically) equal eigenvalue clusters.
    let scale = spectral_from_eigs(&eigenvalues);
    let cluster_tol = 1e-12 * (1.0 + scale);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[start] - eigenvalues[end] <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let mut cols: Vec<Vec<Complex64>> = (start..end)
                .map(|j| unitary.column(j).iter().copied().collect())
                .collect();
            cols.sort_by(|a, b| lex_cmp(a, b));
            for (off, col) in cols.iter().enumerate() {
                for i in 0..n {
                    unitary[(i, start + off)] = col[i];
                }
            }
        }
        start = end;
    }

    if n > 0 {
        let northo = (unitary.adjoint() * &unitary - identity(n)).norm();
        if northo > 1e-10 * n as f64 {
            return Err(Error::NumericalFailure {
                op: "hermitian_eig",
                residual: northo,
                bound: 1e-10 * n as f64,
            });
        }
        let rec = &unitary * diag_real(&eigenvalues) * unitary.adjoint();
        let res = (rec - h.matrix()).norm();
        let bound = 1e-9 * (1.0 + scale) * n as f64;
        if res > bound {
            return Err(Error::NumericalFailure {
                op: "hermitian_eig",
                residual: res,
                bound,
            });
        }
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        unitary,
    })
}

fn normalize_column_phase(u: &mut Mat, j: usize) {
    let n = u.nrows();
    let col = u.column(j);
    let maxab = col.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if maxab == 0.0 {
        return;
    }
    if let Some(z) = col.iter().find(|z| z.norm() > 1e-10 * maxab).copied() {
        let adj = (z / z.norm()).conj();
        for i in 0..n {
            u[(i, j)] *= adj;
        }
    }
}

fn lex_cmp(a: &[Complex64], b: &[Complex64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.re.partial_cmp(&y.re).unwrap() {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
        match x.im.partial_cmp(&y.im).unwrap() {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Singular value decomposition of a general complex matrix.
pub fn svd(m: &Mat) -> Result<Svd> {
    if !is_finite_mat(m) {
        return Err(Error::InvalidArgument(
            "matrix entries must be finite".into(),
        ));
    }
    let raw = svd_kernel::jacobi_svd(m)?;
    let k = raw.singulars.len();
    if k > 0 {
        let sigma = diag_real(&raw.singulars);
        let rec = &raw.left * sigma * raw.right.adjoint();
        let res = (rec - m).norm();
        let bound = 1e-9 * (1.0 + raw.singulars[0]) * m.nrows().max(m.ncols()) as f64;
        if res > bound {
            return Err(Error::NumericalFailure {
                op: "svd",
                residual: res,
                bound,
            });
        }
    }
    Ok(Svd {
        singulars: raw.singulars,
        left: raw.left,
        right: raw.right,
    })
}

/// Singular values only, descending.
pub fn singular_values(m: &Mat) -> Result<Vec<f64>> {
    Ok(svd(m)?.singulars)
}

/// `P^t` for PSD `P` via the spectral decomposition; `t = 0` gives the exact
/// identity and `t = 1` returns the input unchanged. Negative exponents
/// require a positive definite input. `0^t = 0` for `t > 0`.
pub fn matrix_power(p: &PsdMatrix, t: f64) -> Result<HermitianMatrix> {
    if t == 0.0 {
        return HermitianMatrix::new(identity(p.dim()));
    }
    if t == 1.0 {
        return Ok(p.as_herm().clone());
    }
    let norm = p.norm2();
    if t < 0.0 && p.min_eig() <= tol::pd_tol(norm) {
        return Err(Error::Domain {
            op: "matrix_power",
            detail: format!(
                "negative exponent {t} requires a positive definite input (min eig {:.3e})",
                p.min_eig()
            ),
        });
    }
    let band = tol::psd_tol(norm);
    let sd = hermitian_eig(p.as_herm())?;
    for &l in sd.eigenvalues() {
        if l < -band {
            return Err(Error::Domain {
                op: "matrix_power",
                detail: format!("eigenvalue {l:.3e} below the PSD band -{band:.3e}"),
            });
        }
    }
    let powered = sd.apply_scalar(|l| {
        let l = if l < 0.0 { 0.0 } else { l };
        if l == 0.0 {
            0.0
        } else {
            l.powf(t)
        }
    });
    HermitianMatrix::new(powered)
}

/// PSD square root; eigenvalues in the `[-tol, 0)` band are clamped to zero.
pub fn psd_sqrt(p: &PsdMatrix) -> Result<PsdMatrix> {
    PsdMatrix::new(matrix_power(p, 0.5)?)
}

/// Geometric mean `A # B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}`, the
/// unique positive definite solution of `S A^{-1} S = B`.
pub fn geometric_mean(a: &PdMatrix, b: &PdMatrix) -> Result<PdMatrix> {
    if a.dim() != b.dim() {
        return Err(dim_mismatch(a.dim(), b.dim()));
    }
    let a_sqrt = matrix_power(a.as_psd(), 0.5)?;
    let a_isqrt = matrix_power(a.as_psd(), -0.5)?;
    let inner = HermitianMatrix::new(a_isqrt.matrix() * b.matrix() * a_isqrt.matrix())?;
    let inner_sqrt = psd_sqrt(&PsdMatrix::new(inner)?)?;
    let gm = HermitianMatrix::new(a_sqrt.matrix() * inner_sqrt.matrix() * a_sqrt.matrix())?;
    PdMatrix::new(gm)
}

/// Polar decomposition of a square matrix via its SVD; for singular input
/// the unitary factor is the closest completion `U_svd V_svd*`.
pub fn polar_decompose(s: &Mat) -> Result<PolarDecomposition> {
    if s.nrows() != s.ncols() {
        return Err(Error::InvalidArgument(format!(
            "polar decomposition needs a square matrix, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    let n = s.nrows();
    let dec = svd(s)?;
    let unitary = dec.left() * dec.right().adjoint();
    let modulus_mat = dec.right() * diag_real(dec.singulars()) * dec.right().adjoint();
    let modulus = PsdMatrix::new(HermitianMatrix::new(modulus_mat)?)?;
    if n > 0 {
        let res = (&unitary * modulus.matrix() - s).norm();
        let bound = 1e-9 * (1.0 + dec.singulars().first().copied().unwrap_or(0.0)) * n as f64;
        if res > bound {
            return Err(Error::NumericalFailure {
                op: "polar_decompose",
                residual: res,
                bound,
            });
        }
    }
    Ok(PolarDecomposition { unitary, modulus })
}

/// `lambda_min(A - B)`: nonnegative (within tolerance) iff `A >= B` in the
/// Loewner order.
pub fn loewner_margin(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(dim_mismatch(a.dim(), b.dim()));
    }
    let diff = a.matrix() - b.matrix();
    let eigs = eigenvalues_desc(&diff)?;
    Ok(eigs.last().copied().unwrap_or(0.0))
}

/// Convenience wrapper: `A >= B` up to `tol`.
pub fn loewner_geq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    Ok(loewner_margin(a, b)? >= -tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(n: usize, data: &[f64]) -> HermitianMatrix {
        HermitianMatrix::from_real(n, data)
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let sd = hermitian_eig(&herm(3, &[1., 0., 0., 0., 1., 0., 0., 0., 1.])).unwrap();
        assert_eq!(sd.eigenvalues(), &[1.0, 1.0, 1.0]);

        // diag(1,4): eigenvalues (4,1), unitary is the swap permutation.
        let sd = hermitian_eig(&herm(2, &[1., 0., 0., 4.])).unwrap();
        assert_eq!(sd.eigenvalues(), &[4.0, 1.0]);
        let swap = mat_from_real(2, 2, &[0., 1., 1., 0.]);
        assert_eq!(sd.unitary(), &swap);
    }

    #[test]
    fn eig_closed_form_2x2() {
        let sd = hermitian_eig(&herm(2, &[2., 1., 1., 2.])).unwrap();
        assert!((sd.eigenvalues()[0] - 3.0).abs() < 1e-14);
        assert!((sd.eigenvalues()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_deterministic() {
        let h = herm(3, &[2., 1., 0.5, 1., 3., -0.25, 0.5, -0.25, 1.0]);
        let a = hermitian_eig(&h).unwrap();
        let b = hermitian_eig(&h).unwrap();
        assert_eq!(a.eigenvalues(), b.eigenvalues());
        assert_eq!(a.unitary(), b.unitary());
    }

    #[test]
    fn svd_examples() {
        // Unitary input: all singular values one.
        let u = mat_from_real(2, 2, &[0., 1., -1., 0.]);
        let s = singular_values(&u).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14);

        // diag(-3, 2) -> (3, 2).
        let s = singular_values(&diag_real(&[-3.0, 2.0])).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn power_examples() {
        let p = PsdMatrix::from_matrix(diag_real(&[4.0, 9.0])).unwrap();
        let half = matrix_power(&p, 0.5).unwrap();
        assert!((half.matrix() - diag_real(&[2.0, 3.0])).norm() < 1e-14);

        let one = matrix_power(&p, 1.0).unwrap();
        assert_eq!(one.matrix(), p.matrix());

        let zero = matrix_power(&p, 0.0).unwrap();
        assert_eq!(zero.matrix(), &identity(2));

        // Negative power against the direct inversion oracle.
        let inv = matrix_power(&p, -1.0).unwrap();
        assert!((inv.matrix() - diag_real(&[0.25, 1.0 / 9.0])).norm() < 1e-15);
    }

    #[test]
    fn power_rejects_negative_on_singular() {
        let p = PsdMatrix::from_matrix(diag_real(&[1.0, 0.0])).unwrap();
        assert!(matrix_power(&p, -0.5).is_err());
        // 0^t = 0 for positive t.
        let r = matrix_power(&p, 0.5).unwrap();
        assert!((r.matrix() - diag_real(&[1.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn sqrt_closed_form() {
        // [[5,4],[4,5]] has sqrt [[2,1],[1,2]] (eigenpairs (9, 1)).
        let p = PsdMatrix::from_matrix(mat_from_real(2, 2, &[5., 4., 4., 5.])).unwrap();
        let s = psd_sqrt(&p).unwrap();
        assert!((s.matrix() - mat_from_real(2, 2, &[2., 1., 1., 2.])).norm() < 1e-13);
    }

    #[test]
    fn geometric_mean_examples() {
        // I # B = B^{1/2}.
        let i2 = PdMatrix::from_matrix(identity(2)).unwrap();
        let b = PdMatrix::from_matrix(mat_from_real(2, 2, &[5., 4., 4., 5.])).unwrap();
        let g = geometric_mean(&i2, &b).unwrap();
        let bs = psd_sqrt(b.as_psd()).unwrap();
        assert!((g.matrix() - bs.matrix()).norm() < 1e-12);

        // Commuting case: entrywise sqrt(ab).
        let a = PdMatrix::from_matrix(diag_real(&[1.0, 4.0])).unwrap();
        let b = PdMatrix::from_matrix(diag_real(&[4.0, 1.0])).unwrap();
        let g = geometric_mean(&a, &b).unwrap();
        assert!((g.matrix() - diag_real(&[2.0, 2.0])).norm() < 1e-13);

        // [[5,4],[4,5]] # I = sqrt of the first argument.
        let g = geometric_mean(&b_mat(), &i2).unwrap();
        let s = psd_sqrt(b_mat().as_psd()).unwrap();
        assert!((g.matrix() - s.matrix()).norm() < 1e-12);
    }

    fn b_mat() -> PdMatrix {
        PdMatrix::from_matrix(mat_from_real(2, 2, &[5., 4., 4., 5.])).unwrap()
    }

    #[test]
    fn polar_examples() {
        // PSD input: U = I, |S| = input.
        let p = mat_from_real(2, 2, &[2., 1., 1., 2.]);
        let pd = polar_decompose(&p).unwrap();
        assert!((pd.unitary() - identity(2)).norm() < 1e-12);
        assert!((pd.modulus().matrix() - &p).norm() < 1e-12);

        // Rotation input: U = R, |S| = I.
        let th = 0.7f64;
        let r = mat_from_real(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        let pd = polar_decompose(&r).unwrap();
        assert!((pd.unitary() - &r).norm() < 1e-12);
        assert!((pd.modulus().matrix() - identity(2)).norm() < 1e-12);

        // diag(-2, 3): entrywise sign and modulus.
        let pd = polar_decompose(&diag_real(&[-2.0, 3.0])).unwrap();
        assert!((pd.unitary() - diag_real(&[-1.0, 1.0])).norm() < 1e-14);
        assert!((pd.modulus().matrix() - diag_real(&[2.0, 3.0])).norm() < 1e-14);
    }

    #[test]
    fn loewner_examples() {
        let a = herm(2, &[2., 1., 1., 2.]);
        let i = herm(2, &[1., 0., 0., 1.]);
        assert_eq!(loewner_margin(&a, &a).unwrap(), 0.0);
        // diag(2,2) vs I has margin 1.
        let two = herm(2, &[2., 0., 0., 2.]);
        assert!((loewner_margin(&two, &i).unwrap() - 1.0).abs() < 1e-14);
        // [[2,1],[1,2]] - I has eigenvalues (2, 0).
        assert!(loewner_margin(&a, &i).unwrap().abs() < 1e-14);
        assert!(loewner_geq(&a, &i, 1e-12).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = herm(2, &[1., 0., 0., 1.]);
        let b = herm(3, &[1., 0., 0., 0., 1., 0., 0., 0., 1.]);
        assert!(matches!(
            loewner_margin(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
