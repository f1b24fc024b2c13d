//! Executable reconstruction of the rank-reduction argument behind the
//! eigenvalue/singular-value AM-GM theorem, with per-stage invariant
//! residuals, plus the block-matrix propositions and the key lemma.
//!
//! The pipeline fixes an index r, normalizes the pair so that
//! `sigma_r(AB) = 1`, builds the rank-r companion `B1`, splits the space
//! along range/kernel of `B1`, replaces `A` by the pinched `A1`, and hands
//! the surviving block inequality to the lemma. Every logical step of that
//! chain is re-checked numerically and recorded.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    block2x2, eigenvalues_desc, geometric_mean, hermitian_eig, identity, matrix_power,
    polar_decompose, psd_sqrt, singular_values, scale_mat, HermitianMatrix, Mat, PdMatrix,
    PsdMatrix,
};

#[cfg(test)]
use crate::linalg::diag_real;
use crate::suite::{check_bkd, InequalityInstance, InequalityResult};
use crate::tol;

// ---------------------------------------------------------------------------
// Instance types
// ---------------------------------------------------------------------------

/// Conformal partition of a PD matrix A against `B1 = diag(X, 0)`:
/// `A = [[A11, A12], [A12*, A22]]` with the defining constraint
/// `X (A11^2 + A12 A12*) X = I_r`.
#[derive(Debug, Clone)]
pub struct PartitionedPair {
    x: PdMatrix,
    a11: PdMatrix,
    a12: Mat,
    a22: HermitianMatrix,
    constraint_residual: f64,
}

impl PartitionedPair {
    pub fn new(x: PdMatrix, a11: PdMatrix, a12: Mat, a22: HermitianMatrix) -> Result<Self> {
        let r = x.dim();
        if a11.dim() != r || a12.nrows() != r || a12.ncols() != a22.dim() {
            return Err(Error::InvalidArgument(format!(
                "partition blocks do not conform: X {r}x{r}, A11 {}x{}, A12 {}x{}, A22 {}x{}",
                a11.dim(),
                a11.dim(),
                a12.nrows(),
                a12.ncols(),
                a22.dim(),
                a22.dim()
            )));
        }
        let gram = a11.matrix() * a11.matrix() + &a12 * a12.adjoint();
        let residual = (x.matrix() * gram * x.matrix() - identity(r)).norm();
        let a12_norm = singular_values(&a12)?.first().copied().unwrap_or(0.0);
        let bound = tol::proj_tol(r + a22.dim(), a11.norm2() + a12_norm, x.norm2());
        if residual > bound {
            return Err(Error::NumericalFailure {
                op: "partition constraint",
                residual,
                bound,
            });
        }
        Ok(Self {
            x,
            a11,
            a12,
            a22,
            constraint_residual: residual,
        })
    }

    pub fn r(&self) -> usize {
        self.x.dim()
    }

    pub fn full_dim(&self) -> usize {
        self.r() + self.a22.dim()
    }

    pub fn x(&self) -> &PdMatrix {
        &self.x
    }

    pub fn a11(&self) -> &PdMatrix {
        &self.a11
    }

    pub fn a12(&self) -> &Mat {
        &self.a12
    }

    pub fn a22(&self) -> &HermitianMatrix {
        &self.a22
    }

    pub fn constraint_residual(&self) -> f64 {
        self.constraint_residual
    }

    /// Reassembles `[[A11, A12], [A12*, A22]]`.
    pub fn assemble_a(&self) -> Mat {
        block2x2(
            self.a11.matrix(),
            &self.a12,
            &self.a12.adjoint(),
            self.a22.matrix(),
        )
    }
}

/// PD pair for the first block proposition.
#[derive(Debug, Clone)]
pub struct Prop2Instance {
    m: PdMatrix,
    n: PdMatrix,
}

impl Prop2Instance {
    pub fn new(m: PdMatrix, n: PdMatrix) -> Result<Self> {
        if m.dim() != n.dim() {
            return Err(Error::DimensionMismatch {
                left: format!("{}x{}", m.dim(), m.dim()),
                right: format!("{}x{}", n.dim(), n.dim()),
            });
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> &PdMatrix {
        &self.m
    }

    pub fn n(&self) -> &PdMatrix {
        &self.n
    }
}

/// Constrained triple for the second block proposition:
/// `M L (I + Z Z*) L M = I_r`.
#[derive(Debug, Clone)]
pub struct Prop3Instance {
    l: PdMatrix,
    m: PdMatrix,
    z: Mat,
    constraint_residual: f64,
}

impl Prop3Instance {
    pub fn new(l: PdMatrix, m: PdMatrix, z: Mat) -> Result<Self> {
        let r = l.dim();
        if m.dim() != r || z.nrows() != r || z.ncols() != r {
            return Err(Error::InvalidArgument(
                "prop3 blocks must all be r x r".into(),
            ));
        }
        let core = identity(r) + &z * z.adjoint();
        let residual =
            (m.matrix() * l.matrix() * core * l.matrix() * m.matrix() - identity(r)).norm();
        let z_norm = singular_values(&z)?.first().copied().unwrap_or(0.0);
        let bound = tol::proj_tol(r, l.norm2() + z_norm, m.norm2());
        if residual > bound {
            return Err(Error::NumericalFailure {
                op: "prop3 constraint",
                residual,
                bound,
            });
        }
        Ok(Self {
            l,
            m,
            z,
            constraint_residual: residual,
        })
    }

    pub fn l(&self) -> &PdMatrix {
        &self.l
    }

    pub fn m(&self) -> &PdMatrix {
        &self.m
    }

    pub fn z(&self) -> &Mat {
        &self.z
    }

    pub fn constraint_residual(&self) -> f64 {
        self.constraint_residual
    }
}

// ---------------------------------------------------------------------------
// Reduction trace
// ---------------------------------------------------------------------------

/// The r-th eigenvalue after each pinching stage of the reduction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StageEigenvalues {
    /// `lambda_r(A + B)` of the normalized pair.
    pub sum: f64,
    /// `lambda_r(A + B1)`.
    pub with_b1: f64,
    /// `lambda_r(A1 + B1)`.
    pub reduced: f64,
}

/// Every intermediate object of the reduction with per-stage residuals.
#[derive(Debug, Clone)]
pub struct ReductionTrace {
    pub r: usize,
    /// Normalization constant c with `sigma_r((cA)(cB)) = 1`.
    pub scale: f64,
    /// Rank-r companion of B in the normalized coordinates.
    pub b1: PsdMatrix,
    /// Unitary V with `V* B1 V = diag(X, 0)`.
    pub basis_unitary: Mat,
    pub partition: PartitionedPair,
    /// Pinched A in the V-coordinates.
    pub a1: PsdMatrix,
    pub stage_eigenvalues: StageEigenvalues,
    /// Named residuals; see `violations` for the acceptance thresholds.
    pub residuals: BTreeMap<String, f64>,
    pub prop1: InequalityResult,
    /// Margin of the theorem check at index r on the (possibly shifted)
    /// input pair — the quantity the whole chain certifies.
    pub bkd_margin_at_r: f64,
    pub bkd_tolerance: f64,
    /// Chain tolerance in normalized coordinates.
    pub tolerance: f64,
    pub proj_tolerance: f64,
}

impl ReductionTrace {
    /// Invariant breaches, empty when the trace certifies the theorem.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let t = self.tolerance;
        let s = &self.stage_eigenvalues;
        if s.sum < s.with_b1 - t {
            out.push(format!(
                "monotone chain: lambda_r(A+B) = {} < lambda_r(A+B1) - tol = {}",
                s.sum,
                s.with_b1 - t
            ));
        }
        if s.with_b1 < s.reduced - t {
            out.push(format!(
                "monotone chain: lambda_r(A+B1) = {} < lambda_r(A1+B1) - tol = {}",
                s.with_b1,
                s.reduced - t
            ));
        }
        if s.reduced < 2.0 - t {
            out.push(format!(
                "reduced bound: lambda_r(A1+B1) = {} < 2 - tol",
                s.reduced
            ));
        }
        for key in ["b1_loewner", "b1_sq_loewner", "a1_loewner"] {
            if let Some(&v) = self.residuals.get(key) {
                if v < -t {
                    out.push(format!("{key} = {v} below -tol"));
                }
            }
        }
        for key in ["proj_b1a2b1", "proj_ab12a", "partition_constraint"] {
            if let Some(&v) = self.residuals.get(key) {
                if v > self.proj_tolerance {
                    out.push(format!(
                        "{key} = {v} exceeds proj tol {}",
                        self.proj_tolerance
                    ));
                }
            }
        }
        if !self.prop1.passed {
            out.push(format!("prop1 margin {} below -tol", self.prop1.min_margin));
        }
        if self.bkd_margin_at_r < -self.bkd_tolerance {
            out.push(format!(
                "theorem margin at r: {} below -tol",
                self.bkd_margin_at_r
            ));
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.violations().is_empty()
    }

    /// Structured report with the fixed stage names.
    pub fn report(&self) -> ReductionReport {
        let mut stages = Vec::new();
        let mut normalize = BTreeMap::new();
        normalize.insert("scale".to_string(), self.scale);
        stages.push(StageRecord {
            name: "normalize",
            values: normalize,
        });

        let mut b1 = BTreeMap::new();
        b1.insert("rank".to_string(), self.b1.numerical_rank() as f64);
        b1.insert("lambda_r_sum".to_string(), self.stage_eigenvalues.sum);
        b1.insert(
            "lambda_r_with_b1".to_string(),
            self.stage_eigenvalues.with_b1,
        );
        for key in ["b1_loewner", "b1_sq_loewner", "proj_b1a2b1", "proj_ab12a"] {
            if let Some(&v) = self.residuals.get(key) {
                b1.insert(key.to_string(), v);
            }
        }
        stages.push(StageRecord {
            name: "b1",
            values: b1,
        });

        let mut partition = BTreeMap::new();
        partition.insert(
            "constraint_residual".to_string(),
            self.partition.constraint_residual(),
        );
        stages.push(StageRecord {
            name: "partition",
            values: partition,
        });

        let mut a1 = BTreeMap::new();
        a1.insert("lambda_r_reduced".to_string(), self.stage_eigenvalues.reduced);
        if let Some(&v) = self.residuals.get("a1_loewner") {
            a1.insert("a1_loewner".to_string(), v);
        }
        stages.push(StageRecord {
            name: "a1",
            values: a1,
        });

        let mut prop1 = BTreeMap::new();
        prop1.insert("margin".to_string(), self.prop1.min_margin);
        prop1.insert("bkd_margin_at_r".to_string(), self.bkd_margin_at_r);
        prop1.insert("tolerance".to_string(), self.tolerance);
        stages.push(StageRecord {
            name: "prop1",
            values: prop1,
        });

        ReductionReport {
            r: self.r,
            stages,
            violations: self.violations(),
            passed: self.passed(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub name: &'static str,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub r: usize,
    pub stages: Vec<StageRecord>,
    pub violations: Vec<String>,
    pub passed: bool,
}

// ---------------------------------------------------------------------------
// Pipeline operations
// ---------------------------------------------------------------------------

/// Rescales a PD pair so that `sigma_r(AB) = 1`; returns `(cA, cB, c)`.
pub fn normalize_pair(a: &PdMatrix, b: &PdMatrix, r: usize) -> Result<(PdMatrix, PdMatrix, f64)> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::DimensionMismatch {
            left: format!("{n}x{n}"),
            right: format!("{}x{}", b.dim(), b.dim()),
        });
    }
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!(
            "index r = {r} outside 1..={n}"
        )));
    }
    let sigma = singular_values(&(a.matrix() * b.matrix()))?;
    let sigma_r = sigma[r - 1];
    let tolerance = tol::check_tol(&[a.norm2(), b.norm2()]);
    if sigma_r <= tolerance {
        return Err(Error::Degenerate(format!(
            "sigma_{r}(AB) = {sigma_r:.3e} at or below tol {tolerance:.3e}"
        )));
    }
    let c = sigma_r.powf(-0.5);
    let ca = PdMatrix::from_matrix(scale_mat(a.matrix(), c))?;
    let cb = PdMatrix::from_matrix(scale_mat(b.matrix(), c))?;
    Ok((ca, cb, c))
}

/// `B1 = (A^{-1} (sum_{k<=r} P_k) A^{-1})^{1/2}` from the spectral
/// decomposition of `A B^2 A`; requires a normalized pair so that
/// `lambda_r(A B^2 A) >= 1`.
pub fn build_b1(a: &PdMatrix, b: &PdMatrix, r: usize) -> Result<PsdMatrix> {
    let n = a.dim();
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!(
            "index r = {r} outside 1..={n}"
        )));
    }
    let ab = a.matrix() * b.matrix();
    let m = HermitianMatrix::new(&ab * ab.adjoint())?;
    let sd = hermitian_eig(&m)?;
    let tolerance = tol::check_tol(&[a.norm2(), b.norm2()]);
    if sd.eigenvalues()[r - 1] < 1.0 - tolerance {
        return Err(Error::Precondition(format!(
            "lambda_{r}(AB^2A) = {} below 1; pair not normalized",
            sd.eigenvalues()[r - 1]
        )));
    }
    let proj = sd.leading_projection(r);
    let a_inv = matrix_power(a.as_psd(), -1.0)?;
    let core = PsdMatrix::new(HermitianMatrix::new(a_inv.matrix() * proj * a_inv.matrix())?)?;
    let b1 = psd_sqrt(&core)?;
    if b1.numerical_rank() != r {
        return Err(Error::NumericalFailure {
            op: "build_b1 rank",
            residual: b1.numerical_rank() as f64,
            bound: r as f64,
        });
    }
    Ok(b1)
}

/// Splits the space along range/kernel of `B1` and partitions `A`
/// conformally. Returns the partition and the basis unitary `V` with
/// `V* B1 V = diag(X, 0)`.
pub fn partition_basis(
    a: &PdMatrix,
    b1: &PsdMatrix,
    r: usize,
) -> Result<(PartitionedPair, Mat)> {
    let n = a.dim();
    if b1.dim() != n {
        return Err(Error::DimensionMismatch {
            left: format!("{n}x{n}"),
            right: format!("{}x{}", b1.dim(), b1.dim()),
        });
    }
    if b1.numerical_rank() != r {
        return Err(Error::Precondition(format!(
            "rank(B1) = {} but r = {r}",
            b1.numerical_rank()
        )));
    }
    let sd = hermitian_eig(b1.as_herm())?;
    let v = sd.unitary().clone();

    let vbv = v.adjoint() * b1.matrix() * &v;
    let x = PdMatrix::from_matrix(vbv.view((0, 0), (r, r)).into_owned())?;

    let vav = v.adjoint() * a.matrix() * &v;
    let a11 = PdMatrix::from_matrix(vav.view((0, 0), (r, r)).into_owned())?;
    let a12 = vav.view((0, r), (r, n - r)).into_owned();
    let a22 = HermitianMatrix::new(vav.view((r, r), (n - r, n - r)).into_owned())?;

    let pair = PartitionedPair::new(x, a11, a12, a22)?;
    Ok((pair, v))
}

/// `A1 = [[A11, A12], [A12*, A12* A11^{-1} A12]]`, the pinching of A that
/// pushes the Schur complement of A11 to zero.
pub fn build_a1(p: &PartitionedPair) -> Result<PsdMatrix> {
    let a11_inv = matrix_power(p.a11().as_psd(), -1.0)?;
    let corner = p.a12().adjoint() * a11_inv.matrix() * p.a12();
    let a1 = block2x2(p.a11().matrix(), p.a12(), &p.a12().adjoint(), &corner);
    PsdMatrix::new(HermitianMatrix::new(a1)?)
}

/// The surviving block inequality
/// `lambda_r([[A11 + X, A12], [A12*, A12* A11^{-1} A12]]) >= 2`, verified
/// together with its factorization proof chain.
pub fn verify_prop1(p: &PartitionedPair) -> Result<InequalityResult> {
    let r = p.r();
    let n = p.full_dim();
    let a12_norm = singular_values(p.a12())?.first().copied().unwrap_or(0.0);
    let tolerance = tol::check_tol(&[p.a11().norm2(), p.x().norm2(), a12_norm]);
    let proj_bound = tol::proj_tol(n, p.a11().norm2() + a12_norm, p.x().norm2());

    let a11_inv = matrix_power(p.a11().as_psd(), -1.0)?;
    let corner = p.a12().adjoint() * a11_inv.matrix() * p.a12();
    let top_left = p.a11().matrix() + p.x().matrix();
    let block = block2x2(&top_left, p.a12(), &p.a12().adjoint(), &corner);
    let block_eigs = eigenvalues_desc(&block)?;
    let margin = block_eigs[r - 1] - 2.0;

    // (a) The block factors as F F*.
    let a11_sqrt = matrix_power(p.a11().as_psd(), 0.5)?;
    let a11_isqrt = matrix_power(p.a11().as_psd(), -0.5)?;
    let x_sqrt = matrix_power(p.x().as_psd(), 0.5)?;
    let lower = p.a12().adjoint() * a11_isqrt.matrix();
    let f = block2x2(
        a11_sqrt.matrix(),
        x_sqrt.matrix(),
        &lower,
        &Mat::zeros(n - r, r),
    );
    let ff = &f * f.adjoint();
    let fact_residual = (&ff - &block).norm();
    if fact_residual > proj_bound {
        return Err(Error::NumericalFailure {
            op: "verify_prop1 factorization",
            residual: fact_residual,
            bound: proj_bound,
        });
    }

    // (b) F F* and F* F share their nonzero spectrum.
    let ftf = f.adjoint() * &f;
    let eigs_ff = eigenvalues_desc(&ff)?;
    let eigs_ftf = eigenvalues_desc(&ftf)?;
    let k = n.min(2 * r);
    for j in 0..k {
        if (eigs_ff[j] - eigs_ftf[j]).abs() > tolerance {
            return Err(Error::NumericalFailure {
                op: "verify_prop1 spectra",
                residual: (eigs_ff[j] - eigs_ftf[j]).abs(),
                bound: tolerance,
            });
        }
    }
    for &l in eigs_ff.iter().skip(k).chain(eigs_ftf.iter().skip(k)) {
        if l.abs() > tolerance {
            return Err(Error::NumericalFailure {
                op: "verify_prop1 spectra tail",
                residual: l.abs(),
                bound: tolerance,
            });
        }
    }

    // (c) F* F matches the lemma's block form with X^{-2} in the corner.
    let x_inv2 = matrix_power(p.x().as_psd(), -2.0)?;
    let claimed_tl = a11_isqrt.matrix() * x_inv2.matrix() * a11_isqrt.matrix();
    let claimed_tr = a11_sqrt.matrix() * x_sqrt.matrix();
    let claimed = block2x2(
        &claimed_tl,
        &claimed_tr,
        &claimed_tr.adjoint(),
        p.x().matrix(),
    );
    let form_residual = (&ftf - claimed).norm();
    if form_residual > proj_bound {
        return Err(Error::NumericalFailure {
            op: "verify_prop1 F*F form",
            residual: form_residual,
            bound: proj_bound,
        });
    }

    // (d) The lemma applied with S = A11^{-1/2} X^{-1/2} certifies >= 2.
    let x_isqrt = matrix_power(p.x().as_psd(), -0.5)?;
    let s = a11_isqrt.matrix() * x_isqrt.matrix();
    let lemma = lemma1_margin(p.x(), &s)?;
    if !lemma.passed {
        return Err(Error::NumericalFailure {
            op: "verify_prop1 lemma1 margin",
            residual: lemma.min_margin,
            bound: lemma.tolerance,
        });
    }

    Ok(InequalityResult::new("prop1", vec![margin], tolerance))
}

/// `lambda_r([[S X^{-1} S*, (S^{-1})*], [S^{-1}, X]]) >= 2` for PD X and
/// nonsingular S, verified alongside its polar/compression proof chain.
pub fn lemma1_margin(x: &PdMatrix, s: &Mat) -> Result<InequalityResult> {
    let r = x.dim();
    if s.nrows() != r || s.ncols() != r {
        return Err(Error::DimensionMismatch {
            left: format!("{r}x{r}"),
            right: format!("{}x{}", s.nrows(), s.ncols()),
        });
    }
    let sigma = singular_values(s)?;
    let s_norm = sigma.first().copied().unwrap_or(0.0);
    let tolerance = tol::check_tol(&[x.norm2(), s_norm]);
    let sigma_min = sigma.last().copied().unwrap_or(0.0);
    if sigma_min <= tolerance {
        return Err(Error::Singular {
            sigma_min,
            tol: tolerance,
        });
    }
    let s_inv = s.clone().try_inverse().ok_or(Error::Singular {
        sigma_min,
        tol: tolerance,
    })?;

    let x_inv = matrix_power(x.as_psd(), -1.0)?;
    let k_tl = s * x_inv.matrix() * s.adjoint();
    let k = HermitianMatrix::new(block2x2(
        &k_tl,
        &s_inv.adjoint(),
        &s_inv,
        x.matrix(),
    ))?;
    let k_eigs = eigenvalues_desc(k.matrix())?;
    let margin = k_eigs[r - 1] - 2.0;

    // (a) Unitary similarity onto the |S| form via the polar decomposition.
    let polar = polar_decompose(s)?;
    let s_abs = PdMatrix::from_psd(polar.modulus().clone())?;
    let s_abs_inv = matrix_power(s_abs.as_psd(), -1.0)?;
    let kt_tl = s_abs.matrix() * x_inv.matrix() * s_abs.matrix();
    let k_tilde = HermitianMatrix::new(block2x2(
        &kt_tl,
        s_abs_inv.matrix(),
        s_abs_inv.matrix(),
        x.matrix(),
    ))?;
    let kt_eigs = eigenvalues_desc(k_tilde.matrix())?;
    for (a, b) in k_eigs.iter().zip(&kt_eigs) {
        if (a - b).abs() > tolerance {
            return Err(Error::NumericalFailure {
                op: "lemma1 polar similarity",
                residual: (a - b).abs(),
                bound: tolerance,
            });
        }
    }

    // (b) Compression by the partial isometry (1/sqrt(2)) [I; I], then the
    // scalar AM-GM floor: lambda_r(K) >= lambda_r((X + |S|X^{-1}|S|)/2 +
    // |S|^{-1}) >= lambda_r(|S| + |S|^{-1}) >= 2.
    let compressed = scale_mat(&(x.matrix() + &kt_tl), 0.5) + s_abs_inv.matrix();
    let comp_eigs = eigenvalues_desc(&compressed)?;
    let floor_mat = s_abs.matrix() + s_abs_inv.matrix();
    let floor_eigs = eigenvalues_desc(&floor_mat)?;
    let chain = [
        k_eigs[r - 1],
        comp_eigs[r - 1],
        floor_eigs[r - 1],
        2.0,
    ];
    for w in chain.windows(2) {
        if w[0] < w[1] - tolerance {
            return Err(Error::NumericalFailure {
                op: "lemma1 compression chain",
                residual: w[1] - w[0],
                bound: tolerance,
            });
        }
    }

    Ok(InequalityResult::new("lemma1", vec![margin], tolerance))
}

/// `lambda_r([[M, (M#N)^{-1}], [(M#N)^{-1}, N]]) >= 2`. The block matrix is
/// Hermitian but generally indefinite.
pub fn check_prop2(inst: &Prop2Instance) -> Result<InequalityResult> {
    let r = inst.m().dim();
    let tolerance = tol::check_tol(&[inst.m().norm2(), inst.n().norm2()]);
    let gm = geometric_mean(inst.m(), inst.n())?;
    let gm_inv = matrix_power(gm.as_psd(), -1.0)?;
    let rmat = HermitianMatrix::new(block2x2(
        inst.m().matrix(),
        gm_inv.matrix(),
        gm_inv.matrix(),
        inst.n().matrix(),
    ))?;
    let eigs = eigenvalues_desc(rmat.matrix())?;
    Ok(InequalityResult::new(
        "prop2",
        vec![eigs[r - 1] - 2.0],
        tolerance,
    ))
}

/// Solves the constraint `M L (I + Z Z*) L M = I_r` for the unique PSD `M`.
pub fn make_prop3_instance(l: &PdMatrix, z: &Mat) -> Result<Prop3Instance> {
    let r = l.dim();
    if z.nrows() != r || z.ncols() != r {
        return Err(Error::DimensionMismatch {
            left: format!("{r}x{r}"),
            right: format!("{}x{}", z.nrows(), z.ncols()),
        });
    }
    let core = identity(r) + z * z.adjoint();
    let w = PdMatrix::from_matrix(l.matrix() * core * l.matrix())?;
    let m = PdMatrix::new(matrix_power(w.as_psd(), -0.5)?)?;
    Prop3Instance::new(l.clone(), m, z.clone())
}

/// `lambda_r(T) >= 2` for `T = [[L+M, LZ], [Z*L, Z*LZ]]`; also asserts that
/// `T` is positive semidefinite.
pub fn check_prop3(inst: &Prop3Instance) -> Result<InequalityResult> {
    let r = inst.l().dim();
    let z_norm = singular_values(inst.z())?.first().copied().unwrap_or(0.0);
    let tolerance = tol::check_tol(&[inst.l().norm2(), inst.m().norm2(), z_norm]);
    let lz = inst.l().matrix() * inst.z();
    let corner = inst.z().adjoint() * inst.l().matrix() * inst.z();
    let top_left = inst.l().matrix() + inst.m().matrix();
    let t = HermitianMatrix::new(block2x2(&top_left, &lz, &lz.adjoint(), &corner))?;
    let eigs = eigenvalues_desc(t.matrix())?;
    let min_eig = eigs.last().copied().unwrap_or(0.0);
    if min_eig < -tolerance {
        return Err(Error::NumericalFailure {
            op: "check_prop3 psd",
            residual: -min_eig,
            bound: tolerance,
        });
    }
    Ok(InequalityResult::new(
        "prop3",
        vec![eigs[r - 1] - 2.0],
        tolerance,
    ))
}

/// Residual of `W` against the orthogonal projection onto its leading-r
/// eigenspace; small iff `W` is a rank-r orthogonal projection.
fn projection_residual(w: &Mat, r: usize) -> Result<f64> {
    let h = HermitianMatrix::new(w.clone())?;
    let sd = hermitian_eig(&h)?;
    let proj = sd.leading_projection(r);
    Ok((w - proj).norm())
}

/// Executes the full reduction at index r, recording every stage and
/// residual. Semidefinite inputs are shifted by `eps * (1 + ||A|| + ||B||)`
/// first (the standard perturbation pathway, default `eps = 1e-8`).
pub fn run_reduction(a: &PsdMatrix, b: &PsdMatrix, r: usize, eps: f64) -> Result<ReductionTrace> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::DimensionMismatch {
            left: format!("{n}x{n}"),
            right: format!("{}x{}", b.dim(), b.dim()),
        });
    }
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!(
            "index r = {r} outside 1..={n}"
        )));
    }

    let scale_norm = 1.0 + a.norm2() + b.norm2();
    let (pa, pb) = if a.is_pd() && b.is_pd() {
        (
            PdMatrix::from_psd(a.clone())?,
            PdMatrix::from_psd(b.clone())?,
        )
    } else {
        let shift = eps * scale_norm;
        (a.shifted(shift)?, b.shifted(shift)?)
    };

    let (an, bn, scale) = normalize_pair(&pa, &pb, r)?;
    let b1 = build_b1(&an, &bn, r)?;
    let (partition, v) = partition_basis(&an, &b1, r)?;
    let a1 = build_a1(&partition)?;
    let prop1 = verify_prop1(&partition)?;

    let tolerance = tol::check_tol(&[an.norm2(), bn.norm2()]);
    let proj_tolerance = tol::proj_tol(n, an.norm2(), bn.norm2());

    let sum_eigs = eigenvalues_desc(&(an.matrix() + bn.matrix()))?;
    let with_b1_eigs = eigenvalues_desc(&(an.matrix() + b1.matrix()))?;
    // A1 lives in the V-coordinates; B1 there is diag(X, 0).
    let m = n - r;
    let b1_hat = block2x2(
        partition.x().matrix(),
        &Mat::zeros(r, m),
        &Mat::zeros(m, r),
        &Mat::zeros(m, m),
    );
    let reduced_eigs = eigenvalues_desc(&(a1.matrix() + &b1_hat))?;
    let stage_eigenvalues = StageEigenvalues {
        sum: sum_eigs[r - 1],
        with_b1: with_b1_eigs[r - 1],
        reduced: reduced_eigs[r - 1],
    };

    let mut residuals = BTreeMap::new();
    residuals.insert(
        "b1_loewner".to_string(),
        eigenvalues_desc(&(bn.matrix() - b1.matrix()))?
            .last()
            .copied()
            .unwrap_or(0.0),
    );
    let b_sq = bn.matrix() * bn.matrix();
    let b1_sq = b1.matrix() * b1.matrix();
    residuals.insert(
        "b1_sq_loewner".to_string(),
        eigenvalues_desc(&(b_sq - b1_sq.clone()))?
            .last()
            .copied()
            .unwrap_or(0.0),
    );
    let a_hat = v.adjoint() * an.matrix() * &v;
    residuals.insert(
        "a1_loewner".to_string(),
        eigenvalues_desc(&(&a_hat - a1.matrix()))?
            .last()
            .copied()
            .unwrap_or(0.0),
    );
    let a_sq = an.matrix() * an.matrix();
    residuals.insert(
        "proj_b1a2b1".to_string(),
        projection_residual(&(b1.matrix() * &a_sq * b1.matrix()), r)?,
    );
    residuals.insert(
        "proj_ab12a".to_string(),
        projection_residual(&(an.matrix() * &b1_sq * an.matrix()), r)?,
    );
    residuals.insert(
        "partition_constraint".to_string(),
        partition.constraint_residual(),
    );

    let bkd = check_bkd(&InequalityInstance::symmetric(
        pa.as_psd().clone(),
        pb.as_psd().clone(),
    )?)?;
    let bkd_margin_at_r = bkd.margins[r - 1];
    let bkd_tolerance = bkd.tolerance;

    Ok(ReductionTrace {
        r,
        scale,
        b1,
        basis_unitary: v,
        partition,
        a1,
        stage_eigenvalues,
        residuals,
        prop1,
        bkd_margin_at_r,
        bkd_tolerance,
        tolerance,
        proj_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::mat_from_real;

    fn pd_diag(vals: &[f64]) -> PdMatrix {
        PdMatrix::from_matrix(diag_real(vals)).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let i2 = pd_diag(&[1.0, 1.0]);
        // sigma_r(AB) already 1: unchanged.
        let (a, _, c) = normalize_pair(&i2, &i2, 1).unwrap();
        assert_eq!(c, 1.0);
        assert_eq!(a.matrix(), i2.matrix());

        // A = B = 2I, r = 1: sigma_1(4I) = 4, c = 1/2.
        let two = pd_diag(&[2.0, 2.0]);
        let (a, b, c) = normalize_pair(&two, &two, 1).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
        assert!((a.matrix() - identity(2)).norm() < 1e-15);
        assert!((b.matrix() - identity(2)).norm() < 1e-15);

        // A = I, B = diag(2,1), r = 2: sigma_2 = 1 already.
        let (_, b, c) = normalize_pair(&i2, &pd_diag(&[2.0, 1.0]), 2).unwrap();
        assert_eq!(c, 1.0);
        assert_eq!(b.matrix(), pd_diag(&[2.0, 1.0]).matrix());
    }

    #[test]
    fn build_b1_examples() {
        // A = B = I, r = n: B1 = I.
        let i2 = pd_diag(&[1.0, 1.0]);
        let b1 = build_b1(&i2, &i2, 2).unwrap();
        assert!((b1.matrix() - identity(2)).norm() < 1e-12);

        // A = I, B = diag(1, 1/2), r = 1: B1 = diag(1, 0).
        let b = pd_diag(&[1.0, 0.5]);
        let b1 = build_b1(&i2, &b, 1).unwrap();
        assert!((b1.matrix() - diag_real(&[1.0, 0.0])).norm() < 1e-12);

        // Degenerate top eigenvalue: only postconditions are asserted.
        let b1 = build_b1(&i2, &i2, 1).unwrap();
        assert_eq!(b1.numerical_rank(), 1);
        let margin = eigenvalues_desc(&(i2.matrix() - b1.matrix()))
            .unwrap()
            .last()
            .copied()
            .unwrap();
        assert!(margin > -1e-12);
    }

    #[test]
    fn build_b1_needs_normalization() {
        let i2 = pd_diag(&[1.0, 1.0]);
        let small = pd_diag(&[0.25, 0.25]);
        assert!(matches!(
            build_b1(&i2, &small, 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn partition_diag_example() {
        let i2 = pd_diag(&[1.0, 1.0]);
        let b1 = PsdMatrix::from_matrix(diag_real(&[1.0, 0.0])).unwrap();
        let (pair, v) = partition_basis(&i2, &b1, 1).unwrap();
        assert!((&v - identity(2)).norm() < 1e-12);
        assert!((pair.x().matrix() - diag_real(&[1.0])).norm() < 1e-12);
        assert!((pair.a11().matrix() - diag_real(&[1.0])).norm() < 1e-12);
        assert!(pair.a12().norm() < 1e-12);
        assert!((pair.a22().matrix() - diag_real(&[1.0])).norm() < 1e-12);
    }

    #[test]
    fn build_a1_examples() {
        // A12 = 0 gives A1 = diag(A11, 0).
        let pair = PartitionedPair::new(
            pd_diag(&[1.0]),
            pd_diag(&[1.0]),
            Mat::zeros(1, 1),
            HermitianMatrix::from_real(1, &[1.0]),
        )
        .unwrap();
        let a1 = build_a1(&pair).unwrap();
        assert!((a1.matrix() - diag_real(&[1.0, 0.0])).norm() < 1e-14);

        // A11 = [2], A12 = [1]: Schur corner 0.5, rank-1 PSD.
        let x = PdMatrix::from_matrix(diag_real(&[1.0])).unwrap();
        // Constraint does not hold for this ad-hoc block pair, so build the
        // A1 formula directly.
        let a11 = pd_diag(&[2.0]);
        let a12 = mat_from_real(1, 1, &[1.0]);
        let a11_inv = matrix_power(a11.as_psd(), -1.0).unwrap();
        let corner = a12.adjoint() * a11_inv.matrix() * &a12;
        let a1 = block2x2(a11.matrix(), &a12, &a12.adjoint(), &corner);
        let expected = mat_from_real(2, 2, &[2.0, 1.0, 1.0, 0.5]);
        assert!((&a1 - expected).norm() < 1e-14);
        let eigs = eigenvalues_desc(&a1).unwrap();
        assert!(eigs[1].abs() < 1e-14);
        let _ = x;
    }

    #[test]
    fn prop1_equality_case() {
        // n = 2, r = 1, A11 = [1], A12 = [0], X = [1]: block diag(2, 0).
        let pair = PartitionedPair::new(
            pd_diag(&[1.0]),
            pd_diag(&[1.0]),
            Mat::zeros(1, 1),
            HermitianMatrix::from_real(1, &[1.0]),
        )
        .unwrap();
        let r = verify_prop1(&pair).unwrap();
        assert!(r.min_margin.abs() < 1e-12);
    }

    #[test]
    fn prop1_closed_form() {
        // A11 = [1], A12 = [sqrt(3)] forces X = 1/2; the block
        // [[1.5, sqrt(3)], [sqrt(3), 3]] has lambda_1 = (4.5 + sqrt(14.25))/2.
        let s3 = 3.0f64.sqrt();
        let pair = PartitionedPair::new(
            pd_diag(&[0.5]),
            pd_diag(&[1.0]),
            mat_from_real(1, 1, &[s3]),
            HermitianMatrix::from_real(1, &[4.0]),
        )
        .unwrap();
        let r = verify_prop1(&pair).unwrap();
        let expected = (4.5 + 14.25f64.sqrt()) / 2.0 - 2.0;
        assert!((r.min_margin - expected).abs() < 1e-12);
    }

    #[test]
    fn lemma1_closed_forms() {
        // X = 1, S = 1: K = [[1,1],[1,1]], margin 0.
        let r = lemma1_margin(&pd_diag(&[1.0]), &mat_from_real(1, 1, &[1.0])).unwrap();
        assert!(r.min_margin.abs() < 1e-12);

        // X = 2, S = 1: K = [[0.5, 1], [1, 2]], lambda_1 = 2.5.
        let r = lemma1_margin(&pd_diag(&[2.0]), &mat_from_real(1, 1, &[1.0])).unwrap();
        assert!((r.min_margin - 0.5).abs() < 1e-12);

        // X = 1, S = 2: K = [[4, 0.5], [0.5, 1]], lambda_1 = (5 + sqrt(10))/2.
        let r = lemma1_margin(&pd_diag(&[1.0]), &mat_from_real(1, 1, &[2.0])).unwrap();
        let expected = (5.0 + 10.0f64.sqrt()) / 2.0 - 2.0;
        assert!((r.min_margin - expected).abs() < 1e-12);

        // Singular S is rejected.
        assert!(matches!(
            lemma1_margin(&pd_diag(&[1.0]), &mat_from_real(1, 1, &[0.0])),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn prop2_closed_forms() {
        // M = N = I_r: R = [[I, I], [I, I]], lambda_r = 2.
        let i2 = pd_diag(&[1.0, 1.0]);
        let r = check_prop2(&Prop2Instance::new(i2.clone(), i2).unwrap()).unwrap();
        assert!(r.min_margin.abs() < 1e-12);

        // M = 4, N = 1: R = [[4, 0.5], [0.5, 1]].
        let r = check_prop2(&Prop2Instance::new(pd_diag(&[4.0]), pd_diag(&[1.0])).unwrap())
            .unwrap();
        let expected = (5.0 + 10.0f64.sqrt()) / 2.0 - 2.0;
        assert!((r.min_margin - expected).abs() < 1e-12);

        // M = N = 0.1: R = [[0.1, 10], [10, 0.1]] is indefinite with
        // lambda_min = -9.9 and margin 8.1.
        let inst = Prop2Instance::new(pd_diag(&[0.1]), pd_diag(&[0.1])).unwrap();
        let r = check_prop2(&inst).unwrap();
        assert!((r.min_margin - 8.1).abs() < 1e-12);
        let gm_inv = diag_real(&[10.0]);
        let rmat = block2x2(
            &diag_real(&[0.1]),
            &gm_inv,
            &gm_inv,
            &diag_real(&[0.1]),
        );
        let eigs = eigenvalues_desc(&rmat).unwrap();
        assert!((eigs[1] + 9.9).abs() < 1e-12);
    }

    #[test]
    fn prop3_examples() {
        // L = I, Z = 0: M = I, T = diag(2, 0) blocks.
        let inst = make_prop3_instance(&pd_diag(&[1.0]), &Mat::zeros(1, 1)).unwrap();
        assert!((inst.m().matrix() - diag_real(&[1.0])).norm() < 1e-14);
        let r = check_prop3(&inst).unwrap();
        assert!(r.min_margin.abs() < 1e-12);

        // L = 1, Z = sqrt(3): M = 1/2, T = [[1.5, sqrt(3)], [sqrt(3), 3]].
        let s3 = 3.0f64.sqrt();
        let inst = make_prop3_instance(&pd_diag(&[1.0]), &mat_from_real(1, 1, &[s3])).unwrap();
        assert!((inst.m().matrix() - diag_real(&[0.5])).norm() < 1e-13);
        let r = check_prop3(&inst).unwrap();
        let expected = (4.5 + 14.25f64.sqrt()) / 2.0 - 2.0;
        assert!((r.min_margin - expected).abs() < 1e-12);
    }

    #[test]
    fn reduction_identity_pair() {
        let i3 = PsdMatrix::from_matrix(identity(3)).unwrap();
        for r in 1..=3 {
            let trace = run_reduction(&i3, &i3, r, 1e-8).unwrap();
            assert!((trace.scale - 1.0).abs() < 1e-12);
            assert_eq!(trace.b1.numerical_rank(), r);
            assert!((trace.stage_eigenvalues.sum - 2.0).abs() < 1e-10);
            assert!((trace.stage_eigenvalues.with_b1 - 2.0).abs() < 1e-10);
            assert!((trace.stage_eigenvalues.reduced - 2.0).abs() < 1e-10);
            assert!(trace.passed(), "violations: {:?}", trace.violations());
        }
    }

    #[test]
    fn reduction_worked_diagonal_example() {
        let a = PsdMatrix::from_matrix(identity(2)).unwrap();
        let b = PsdMatrix::from_matrix(diag_real(&[1.0, 0.5])).unwrap();
        let trace = run_reduction(&a, &b, 1, 1e-8).unwrap();
        assert!((trace.scale - 1.0).abs() < 1e-10);
        assert!((trace.b1.matrix() - diag_real(&[1.0, 0.0])).norm() < 1e-10);
        assert!((trace.a1.matrix() - diag_real(&[1.0, 0.0])).norm() < 1e-10);
        assert!((trace.stage_eigenvalues.reduced - 2.0).abs() < 1e-10);
        assert!(trace.passed(), "violations: {:?}", trace.violations());

        let report = trace.report();
        let names: Vec<_> = report.stages.iter().map(|s| s.name).collect();
        assert_eq!(names, ["normalize", "b1", "partition", "a1", "prop1"]);
    }

    #[test]
    fn reduction_rejects_bad_r() {
        let i2 = PsdMatrix::from_matrix(identity(2)).unwrap();
        assert!(run_reduction(&i2, &i2, 0, 1e-8).is_err());
        assert!(run_reduction(&i2, &i2, 3, 1e-8).is_err());
    }
}
