//! Evaluator: binds matrix variables and computes per-index margins.
//!
//! The numeric paths deliberately mirror the native checks (same kernels,
//! same operation order) so a catalogue statement and its native counterpart
//! produce identical margins down to the last bit.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues_desc, geometric_mean, matrix_power, scale_mat, singular_values, Mat, PdMatrix,
    PsdMatrix,
};
use crate::suite::{
    psd_pair_eigenvalues, psd_product_eigenvalues, psd_product_singulars, sqrt_clamped,
    InequalityResult,
};

use super::{Expr, Relation, ScalarExpr, Statement};

pub type Bindings = BTreeMap<String, Mat>;

enum Value {
    Matrix(Mat),
    Vector(Vec<f64>),
}

impl ScalarExpr {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            ScalarExpr::Lit(v) => *v,
            ScalarExpr::T => t,
            ScalarExpr::Add(a, b) => a.value(t) + b.value(t),
            ScalarExpr::Sub(a, b) => a.value(t) - b.value(t),
            ScalarExpr::Mul(a, b) => a.value(t) * b.value(t),
            ScalarExpr::Neg(a) => -a.value(t),
        }
    }
}

fn shape_err(op: &str, l: &Mat, r: &Mat) -> Error {
    Error::DimensionMismatch {
        left: format!("{}x{} ({op})", l.nrows(), l.ncols()),
        right: format!("{}x{}", r.nrows(), r.ncols()),
    }
}

/// Hermitian gate: the asymmetry must be negligible relative to the norm.
fn require_hermitian(m: &Mat, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Eval(format!(
            "{what} needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = (m - m.adjoint()).norm();
    if asym > 1e-10 * (1.0 + m.norm()) {
        return Err(Error::Eval(format!(
            "{what} needs a Hermitian matrix (asymmetry {asym:.3e})"
        )));
    }
    Ok(())
}

fn as_psd(m: &Mat, what: &str) -> Result<PsdMatrix> {
    require_hermitian(m, what)?;
    PsdMatrix::from_matrix(m.clone())
}

fn as_pd(m: &Mat, what: &str) -> Result<PdMatrix> {
    require_hermitian(m, what)?;
    PdMatrix::from_matrix(m.clone())
}

struct Evaluator<'a> {
    bindings: &'a Bindings,
    t: f64,
    tol: f64,
}

impl<'a> Evaluator<'a> {
    fn matrix(&self, e: &Expr) -> Result<Mat> {
        match self.eval(e)? {
            Value::Matrix(m) => Ok(m),
            Value::Vector(_) => Err(Error::Eval(
                "expected a matrix-typed expression".into(),
            )),
        }
    }

    fn vector(&self, e: &Expr) -> Result<Vec<f64>> {
        match self.eval(e)? {
            Value::Vector(v) => Ok(v),
            Value::Matrix(_) => Err(Error::Eval(
                "expected a vector-typed expression".into(),
            )),
        }
    }

    fn eval(&self, e: &Expr) -> Result<Value> {
        Ok(match e {
            Expr::MatVar(name) => {
                let m = self.bindings.get(name).ok_or_else(|| {
                    Error::Eval(format!("unbound matrix variable '{name}'"))
                })?;
                Value::Matrix(m.clone())
            }
            Expr::Add(l, r) => {
                let (lm, rm) = (self.matrix(l)?, self.matrix(r)?);
                if lm.shape() != rm.shape() {
                    return Err(shape_err("+", &lm, &rm));
                }
                Value::Matrix(lm + rm)
            }
            Expr::Sub(l, r) => {
                let (lm, rm) = (self.matrix(l)?, self.matrix(r)?);
                if lm.shape() != rm.shape() {
                    return Err(shape_err("-", &lm, &rm));
                }
                Value::Matrix(lm - rm)
            }
            Expr::ScalarMul(s, m) => {
                let mm = self.matrix(m)?;
                Value::Matrix(scale_mat(&mm, s.value(self.t)))
            }
            Expr::MatMul(l, r) => {
                let (lm, rm) = (self.matrix(l)?, self.matrix(r)?);
                if lm.ncols() != rm.nrows() {
                    return Err(shape_err("*", &lm, &rm));
                }
                Value::Matrix(lm * rm)
            }
            Expr::Adjoint(m) => Value::Matrix(self.matrix(m)?.adjoint()),
            Expr::Power(base, exp) => {
                let b = self.matrix(base)?;
                let p = as_psd(&b, "matrix power")?;
                Value::Matrix(matrix_power(&p, exp.value(self.t))?.into_matrix())
            }
            Expr::Gm(l, r) => {
                let (lm, rm) = (self.matrix(l)?, self.matrix(r)?);
                let a = as_pd(&lm, "gm")?;
                let b = as_pd(&rm, "gm")?;
                Value::Matrix(geometric_mean(&a, &b)?.matrix().clone())
            }
            Expr::Inv(m) => {
                let mm = self.matrix(m)?;
                let p = as_pd(&mm, "inv")?;
                Value::Matrix(matrix_power(p.as_psd(), -1.0)?.into_matrix())
            }
            Expr::Lam(inner) => Value::Vector(self.lam(inner)?),
            Expr::Sig(inner) => Value::Vector(self.sig(inner)?),
            Expr::VecSqrt(v) => {
                let vals = self.vector(v)?;
                Value::Vector(sqrt_clamped(&vals, self.tol)?)
            }
            Expr::VecScale(s, v) => {
                let vals = self.vector(v)?;
                let c = s.value(self.t);
                Value::Vector(vals.iter().map(|x| c * x).collect())
            }
            Expr::MatSqrt(m) => {
                let mm = self.matrix(m)?;
                let p = as_psd(&mm, "sqrt")?;
                Value::Matrix(matrix_power(&p, 0.5)?.into_matrix())
            }
        })
    }

    /// Splits `V` or `V^s` (with `V` a bound variable whose value is PSD)
    /// into the base and its exponent; powers the same paths the native
    /// checks take for `A^p B^q` products.
    fn power_factor(&self, e: &Expr) -> Option<(PsdMatrix, f64)> {
        let (base, exponent) = match e {
            Expr::MatVar(_) => (e, 1.0),
            Expr::Power(b, s) if matches!(**b, Expr::MatVar(_)) => {
                (b.as_ref(), s.value(self.t))
            }
            _ => return None,
        };
        let m = self.matrix(base).ok()?;
        as_psd(&m, "product factor").ok().map(|p| (p, exponent))
    }

    /// `lam` evaluates through the Hermitian-similarity rule when its
    /// argument is a product of PSD factors; otherwise the argument itself
    /// must be (numerically) Hermitian.
    fn lam(&self, inner: &Expr) -> Result<Vec<f64>> {
        if let Expr::MatMul(l, r) = inner {
            // Products of powers of PSD variables take the factored route
            // (exact rank preservation, identical to the native checks).
            if let (Some((lp, p)), Some((rp, q))) =
                (self.power_factor(l), self.power_factor(r))
            {
                return psd_product_eigenvalues(&lp, p, &rp, q);
            }
            let lm = self.matrix(l)?;
            let rm = self.matrix(r)?;
            if lm.ncols() != rm.nrows() {
                return Err(shape_err("*", &lm, &rm));
            }
            if let (Ok(lp), Ok(rp)) = (as_psd(&lm, "lam factor"), as_psd(&rm, "lam factor")) {
                return psd_pair_eigenvalues(&lp, &rp);
            }
            let prod = lm * rm;
            require_hermitian(&prod, "lam")?;
            return eigenvalues_desc(&prod);
        }
        let m = self.matrix(inner)?;
        require_hermitian(&m, "lam")?;
        eigenvalues_desc(&m)
    }

    /// `sig` of a product of powers of PSD variables follows the factored
    /// native route; everything else goes through the plain SVD.
    fn sig(&self, inner: &Expr) -> Result<Vec<f64>> {
        if let Expr::MatMul(l, r) = inner {
            if let (Some((lp, p)), Some((rp, q))) =
                (self.power_factor(l), self.power_factor(r))
            {
                return psd_product_singulars(&lp, p, &rp, q);
            }
        }
        let m = self.matrix(inner)?;
        singular_values(&m)
    }
}

/// Evaluates a statement against bound matrices at weight `t`.
///
/// `tol` is the acceptance tolerance recorded in the result (and the clamp
/// band for `sqrt` of spectral vectors); pass the instance tolerance from
/// the native suite to reproduce its behavior exactly.
pub fn evaluate(stmt: &Statement, bindings: &Bindings, t: f64, tol: f64) -> Result<InequalityResult> {
    let ev = Evaluator { bindings, t, tol };
    let margins = match stmt.relation {
        Relation::ForAllJGeq => {
            let lhs = ev.vector(&stmt.lhs)?;
            let rhs = ev.vector(&stmt.rhs)?;
            if lhs.len() != rhs.len() {
                return Err(Error::Eval(format!(
                    "spectral vectors have different lengths: {} vs {}",
                    lhs.len(),
                    rhs.len()
                )));
            }
            lhs.iter().zip(&rhs).map(|(l, r)| l - r).collect()
        }
        Relation::LoewnerGeq => {
            let lhs = ev.matrix(&stmt.lhs)?;
            let rhs = ev.matrix(&stmt.rhs)?;
            if lhs.shape() != rhs.shape() {
                return Err(shape_err(">=loewner", &lhs, &rhs));
            }
            require_hermitian(&lhs, "loewner lhs")?;
            require_hermitian(&rhs, "loewner rhs")?;
            let diff = lhs - rhs;
            let eigs = eigenvalues_desc(&diff)?;
            vec![eigs.last().copied().unwrap_or(0.0)]
        }
    };
    Ok(InequalityResult::new("dsl", margins, tol))
}
