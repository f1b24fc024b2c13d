//! Deterministic, seeded instance generators.
//!
//! Every generator is a pure function of its spec/seed: trial i of a sweep
//! derives its stream from (master seed, i) via the ChaCha stream counter,
//! so parallel evaluation order cannot change results.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::drury::PartitionedPair;
use crate::error::{Error, Result};
use crate::linalg::{
    diag_real, matrix_power, singular_values, HermitianMatrix, Mat, PdMatrix, PsdMatrix,
};

#[cfg(test)]
use crate::linalg::identity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MatrixField {
    Real,
    #[default]
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumShape {
    #[default]
    LogUniform,
    Uniform,
    /// Few distinct eigenvalues with repetitions; exercises the degenerate
    /// tie-breaking paths.
    Clustered,
}

/// Specification of one random matrix draw.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GenSpec {
    pub dim: usize,
    pub rank: usize,
    /// Condition number target; eigenvalues are drawn from
    /// `[kappa^{-1/2}, kappa^{1/2}]`.
    pub condition: f64,
    pub field: MatrixField,
    pub seed: u64,
    pub shape: SpectrumShape,
}

impl GenSpec {
    pub fn pd(dim: usize, condition: f64, seed: u64) -> Self {
        Self {
            dim,
            rank: dim,
            condition,
            field: MatrixField::Complex,
            seed,
            shape: SpectrumShape::LogUniform,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if self.rank > self.dim {
            return Err(Error::InvalidArgument(format!(
                "rank {} exceeds dimension {}",
                self.rank, self.dim
            )));
        }
        if self.condition < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "condition number must be >= 1, got {}",
                self.condition
            )));
        }
        Ok(())
    }
}

/// ChaCha stream derived from a master seed and a trial counter.
pub fn derive_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_mat(rows: usize, cols: usize, field: MatrixField, rng: &mut ChaCha8Rng) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = match field {
                MatrixField::Real => 0.0,
                MatrixField::Complex => StandardNormal.sample(rng),
            };
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    m
}

/// Haar-ish unitary from the QR factorization of a Gaussian matrix, with the
/// R-diagonal phases absorbed.
fn haar_with_rng(n: usize, field: MatrixField, rng: &mut ChaCha8Rng) -> Mat {
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let g = gaussian_mat(n, n, field, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

pub fn haar_unitary(n: usize, seed: u64) -> Mat {
    let mut rng = derive_rng(seed, 0);
    haar_with_rng(n, MatrixField::Complex, &mut rng)
}

fn draw_spectrum(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let half_log = 0.5 * spec.condition.ln();
    let lo = (-half_log).exp();
    let hi = half_log.exp();
    let n = spec.rank;
    let mut vals: Vec<f64> = match spec.shape {
        SpectrumShape::LogUniform => (0..n)
            .map(|_| ((rng.gen::<f64>() * 2.0 - 1.0) * half_log).exp())
            .collect(),
        SpectrumShape::Uniform => (0..n).map(|_| lo + rng.gen::<f64>() * (hi - lo)).collect(),
        SpectrumShape::Clustered => {
            let k = rng.gen_range(1..=3.min(n.max(1)));
            let centers: Vec<f64> = (0..k)
                .map(|_| ((rng.gen::<f64>() * 2.0 - 1.0) * half_log).exp())
                .collect();
            (0..n).map(|_| centers[rng.gen_range(0..k)]).collect()
        }
    };
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}

fn assemble(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<HermitianMatrix> {
    let n = spec.dim;
    let mut eigs = draw_spectrum(spec, rng);
    eigs.resize(n, 0.0);
    let q = haar_with_rng(n, spec.field, rng);
    HermitianMatrix::new(&q * diag_real(&eigs) * q.adjoint())
}

/// Random PD matrix with eigenvalues in `[kappa^{-1/2}, kappa^{1/2}]`
/// conjugated by a Haar unitary. Requires `rank == dim`.
pub fn random_pd(spec: &GenSpec) -> Result<PdMatrix> {
    spec.validate()?;
    if spec.rank != spec.dim {
        return Err(Error::InvalidArgument(
            "random_pd requires rank == dim".into(),
        ));
    }
    let mut rng = derive_rng(spec.seed, 0);
    PdMatrix::new(assemble(spec, &mut rng)?)
}

/// Random PSD matrix with exactly `rank` nonzero eigenvalues.
pub fn random_psd_rank(spec: &GenSpec) -> Result<PsdMatrix> {
    spec.validate()?;
    let mut rng = derive_rng(spec.seed, 0);
    if spec.rank == 0 {
        return PsdMatrix::new(HermitianMatrix::new(Mat::zeros(spec.dim, spec.dim))?);
    }
    PsdMatrix::new(assemble(spec, &mut rng)?)
}

const NONSINGULAR_FLOOR: f64 = 1e-3;

/// Random complex matrix with `sigma_min >= 1e-3`, enforced by resampling
/// from the same stream (the retry count is folded into the stream).
pub fn random_nonsingular(n: usize, seed: u64) -> Result<Mat> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let mut rng = derive_rng(seed, 0);
    loop {
        let g = gaussian_mat(n, n, MatrixField::Complex, &mut rng);
        let sigma = singular_values(&g)?;
        if sigma.last().copied().unwrap_or(0.0) >= NONSINGULAR_FLOOR {
            return Ok(g);
        }
    }
}

/// Draws a constraint-satisfying partition instance: A11 PD, A12 Gaussian,
/// `X = (A11^2 + A12 A12*)^{-1/2}`, and A22 chosen so the full matrix is PD.
pub fn make_prop1_instance(n: usize, r: usize, seed: u64) -> Result<PartitionedPair> {
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!(
            "rank r = {r} outside 1..={n}"
        )));
    }
    let mut rng = derive_rng(seed, 0);
    let spec_r = GenSpec {
        dim: r,
        rank: r,
        condition: 10.0,
        field: MatrixField::Complex,
        seed: 0,
        shape: SpectrumShape::LogUniform,
    };
    let a11 = PdMatrix::new(assemble(&spec_r, &mut rng)?)?;
    let a12 = gaussian_mat(r, n - r, MatrixField::Complex, &mut rng);
    let gram = a11.matrix() * a11.matrix() + &a12 * a12.adjoint();
    let gram_pd = PdMatrix::from_matrix(gram)?;
    let x = PdMatrix::new(matrix_power(gram_pd.as_psd(), -0.5)?)?;

    let a22 = if n > r {
        let spec_m = GenSpec {
            dim: n - r,
            rank: n - r,
            condition: 10.0,
            field: MatrixField::Complex,
            seed: 0,
            shape: SpectrumShape::LogUniform,
        };
        let w = assemble(&spec_m, &mut rng)?;
        let a11_inv = matrix_power(a11.as_psd(), -1.0)?;
        let schur_part = a12.adjoint() * a11_inv.matrix() * &a12;
        HermitianMatrix::new(schur_part + w.matrix())?
    } else {
        HermitianMatrix::new(Mat::zeros(0, 0))?
    };

    let pair = PartitionedPair::new(x, a11, a12, a22)?;
    // The full matrix must be PD for the pipeline's hypotheses.
    PdMatrix::from_matrix(pair.assemble_a())?;
    Ok(pair)
}

/// Drawing helpers shared by the sweep and verify drivers: a PSD pair with
/// per-trial condition number, shape and rank drawn from the given stream.
pub fn random_pair_from_rng(
    n: usize,
    rng: &mut ChaCha8Rng,
    allow_rank_deficient: bool,
) -> Result<(PsdMatrix, PsdMatrix)> {
    let kappa_exp = rng.gen_range(0.0..=4.0f64);
    let condition = 10.0f64.powf(kappa_exp);
    let field = if rng.gen_bool(0.5) {
        MatrixField::Complex
    } else {
        MatrixField::Real
    };
    let shape = match rng.gen_range(0..3u8) {
        0 => SpectrumShape::LogUniform,
        1 => SpectrumShape::Uniform,
        _ => SpectrumShape::Clustered,
    };
    let draw = |rng: &mut ChaCha8Rng| -> Result<PsdMatrix> {
        let rank = if allow_rank_deficient && n > 1 && rng.gen_bool(0.25) {
            rng.gen_range(1..n)
        } else {
            n
        };
        let spec = GenSpec {
            dim: n,
            rank,
            condition,
            field,
            seed: 0,
            shape,
        };
        let mut eigs = draw_spectrum(&spec, rng);
        eigs.resize(n, 0.0);
        let q = haar_with_rng(n, field, rng);
        PsdMatrix::new(HermitianMatrix::new(&q * diag_real(&eigs) * q.adjoint())?)
    };
    Ok((draw(rng)?, draw(rng)?))
}

/// PD pair sharing no kernel, for the pipelines that need strict positivity.
pub fn random_pd_pair_from_rng(n: usize, rng: &mut ChaCha8Rng) -> Result<(PdMatrix, PdMatrix)> {
    let (a, b) = random_pair_from_rng(n, rng, false)?;
    Ok((PdMatrix::from_psd(a)?, PdMatrix::from_psd(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pd_is_deterministic_and_certified() {
        let spec = GenSpec::pd(5, 100.0, 42);
        let a = random_pd(&spec).unwrap();
        let b = random_pd(&spec).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert!(a.min_eig() > 0.0);
        // Eigenvalues confined to [kappa^{-1/2}, kappa^{1/2}].
        for &l in a.eigenvalues() {
            assert!(l >= 0.1 - 1e-9 && l <= 10.0 + 1e-9);
        }
    }

    #[test]
    fn kappa_one_gives_identity() {
        let spec = GenSpec::pd(4, 1.0, 7);
        let a = random_pd(&spec).unwrap();
        assert!((a.matrix() - identity(4)).norm() < 1e-12);
    }

    #[test]
    fn scalar_case() {
        let spec = GenSpec::pd(1, 16.0, 3);
        let a = random_pd(&spec).unwrap();
        let v = a.matrix()[(0, 0)].re;
        assert!(v >= 0.25 - 1e-12 && v <= 4.0 + 1e-12);
    }

    #[test]
    fn psd_rank_control() {
        let spec = GenSpec {
            dim: 4,
            rank: 2,
            condition: 10.0,
            field: MatrixField::Complex,
            seed: 11,
            shape: SpectrumShape::LogUniform,
        };
        let p = random_psd_rank(&spec).unwrap();
        assert_eq!(p.numerical_rank(), 2);
        // Trailing eigenvalues are numerically zero.
        assert!(p.eigenvalues()[2].abs() < 1e-12);
        assert!(p.eigenvalues()[3].abs() < 1e-12);

        let zero = random_psd_rank(&GenSpec {
            rank: 0,
            ..spec
        })
        .unwrap();
        assert_eq!(zero.matrix().norm(), 0.0);
    }

    #[test]
    fn rank_one_outer_product_shape() {
        let spec = GenSpec {
            dim: 2,
            rank: 1,
            condition: 1.0,
            field: MatrixField::Real,
            seed: 5,
            shape: SpectrumShape::Uniform,
        };
        let p = random_psd_rank(&spec).unwrap();
        assert_eq!(p.numerical_rank(), 1);
        assert!(p.eigenvalues()[1].abs() < 1e-12);
    }

    #[test]
    fn nonsingular_floor_and_determinism() {
        let a = random_nonsingular(3, 9).unwrap();
        let b = random_nonsingular(3, 9).unwrap();
        assert_eq!(a, b);
        let sigma = singular_values(&a).unwrap();
        assert!(sigma.last().unwrap() >= &1e-3);

        let s = random_nonsingular(1, 2).unwrap();
        assert!(s[(0, 0)].norm() >= 1e-3);
    }

    #[test]
    fn haar_unitary_contract() {
        let u = haar_unitary(6, 13);
        let r = (u.adjoint() * &u - identity(6)).norm();
        assert!(r < 1e-10 * 6.0);
        assert_eq!(u, haar_unitary(6, 13));

        let u1 = haar_unitary(1, 4);
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prop1_instance_constraint() {
        // r = n: X = A11^{-1}.
        let pair = make_prop1_instance(3, 3, 21).unwrap();
        let a11_inv = matrix_power(pair.a11().as_psd(), -1.0).unwrap();
        assert!((pair.x().matrix() - a11_inv.matrix()).norm() < 1e-8);

        // Scalar closed form: A11 = [1], A12 = [sqrt(3)] gives X = 1/2 —
        // verified through the solver on a hand-built instance.
        let a11 = PdMatrix::from_matrix(diag_real(&[1.0])).unwrap();
        let a12 = crate::linalg::mat_from_real(1, 1, &[3.0f64.sqrt()]);
        let gram = a11.matrix() * a11.matrix() + &a12 * a12.adjoint();
        let x = matrix_power(
            PdMatrix::from_matrix(gram).unwrap().as_psd(),
            -0.5,
        )
        .unwrap();
        assert!((x.matrix() - diag_real(&[0.5])).norm() < 1e-14);

        // Random instance: constraint residual within tolerance and the
        // assembled matrix is PD.
        let pair = make_prop1_instance(5, 2, 33).unwrap();
        assert!(pair.constraint_residual() <= 1e-8);
        assert!(PdMatrix::from_matrix(pair.assemble_a()).is_ok());
    }

    #[test]
    fn derive_rng_streams_are_independent() {
        let mut r1 = derive_rng(1, 0);
        let mut r2 = derive_rng(1, 1);
        let a: u64 = r1.gen();
        let b: u64 = r2.gen();
        assert_ne!(a, b);
        let mut r1b = derive_rng(1, 0);
        assert_eq!(a, r1b.gen::<u64>());
    }
}
