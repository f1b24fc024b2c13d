//! A small textual language for spectral matrix inequalities.
//!
//! One statement per line; `#` starts a comment. Two relations exist:
//! `>=` compares descending spectral vectors index by index, `>=loewner`
//! compares Hermitian matrices in the Loewner order. The vocabulary covers
//! the paper-style displays: `lam`, `sig`, `gm`/`♯`, `sqrt`, `inv`, powers
//! with scalar exponents over literals and the weight `t`, and the postfix
//! adjoint `'`.
//!
//! Example: `lam(A + B) >= 2*sqrt(sig(A*B))`.

mod eval;
mod parse;
mod token;

use std::fmt;

pub use eval::{evaluate, Bindings};
pub use token::{tokenize, Keyword, Op, Token, TokenKind};

use crate::error::Result;

/// Lexical, syntactic or typing error with a character position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at position {}: {}",
            self.position, self.message
        )
    }
}

impl std::error::Error for ParseError {}

/// Scalar-typed subexpressions: literals, the weight `t`, and arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Lit(f64),
    T,
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Sub(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Neg(Box<ScalarExpr>),
}

/// Matrix- or vector-typed expressions (the sort is fixed by construction:
/// `Lam`, `Sig`, `VecSqrt`, `VecScale` are vector-typed, everything else is
/// matrix-typed).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    MatVar(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    ScalarMul(ScalarExpr, Box<Expr>),
    MatMul(Box<Expr>, Box<Expr>),
    Adjoint(Box<Expr>),
    Power(Box<Expr>, ScalarExpr),
    Gm(Box<Expr>, Box<Expr>),
    Inv(Box<Expr>),
    MatSqrt(Box<Expr>),
    Lam(Box<Expr>),
    Sig(Box<Expr>),
    VecSqrt(Box<Expr>),
    VecScale(ScalarExpr, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `>=` over all indices of two descending spectral vectors.
    ForAllJGeq,
    /// `>=loewner` between Hermitian matrices.
    LoewnerGeq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub lhs: Expr,
    pub relation: Relation,
    pub rhs: Expr,
}

/// Tokenize-and-parse in one step.
pub fn parse(source: &str) -> std::result::Result<Statement, ParseError> {
    let tokens = tokenize(source)?;
    parse::parse(&tokens, source.chars().count())
}

// ---------------------------------------------------------------------------
// Canonical printer
// ---------------------------------------------------------------------------

fn print_scalar(s: &ScalarExpr) -> String {
    match s {
        ScalarExpr::Lit(v) => format!("{v}"),
        ScalarExpr::T => "t".into(),
        ScalarExpr::Add(a, b) => format!("{} + {}", print_scalar(a), print_scalar_tight(b)),
        ScalarExpr::Sub(a, b) => format!("{} - {}", print_scalar(a), print_scalar_tight(b)),
        ScalarExpr::Mul(a, b) => {
            format!("{}*{}", print_scalar_factor(a), print_scalar_factor(b))
        }
        ScalarExpr::Neg(a) => format!("-{}", print_scalar_factor(a)),
    }
}

fn print_scalar_tight(s: &ScalarExpr) -> String {
    match s {
        ScalarExpr::Add(..) | ScalarExpr::Sub(..) => format!("({})", print_scalar(s)),
        _ => print_scalar(s),
    }
}

fn print_scalar_factor(s: &ScalarExpr) -> String {
    match s {
        ScalarExpr::Add(..) | ScalarExpr::Sub(..) | ScalarExpr::Mul(..) => {
            format!("({})", print_scalar(s))
        }
        _ => print_scalar(s),
    }
}

/// Exponent position: bare numbers (optionally signed) and `t` survive
/// unparenthesized, composite scalars get parentheses.
fn print_exponent(s: &ScalarExpr) -> String {
    match s {
        ScalarExpr::Lit(_) | ScalarExpr::T => print_scalar(s),
        ScalarExpr::Neg(inner) if matches!(**inner, ScalarExpr::Lit(_) | ScalarExpr::T) => {
            format!("-{}", print_scalar(inner))
        }
        _ => format!("({})", print_scalar(s)),
    }
}

fn print_expr(e: &Expr) -> String {
    match e {
        Expr::MatVar(name) => name.clone(),
        Expr::Add(l, r) => format!("{} + {}", print_expr(l), print_term(r)),
        Expr::Sub(l, r) => format!("{} - {}", print_expr(l), print_term(r)),
        Expr::ScalarMul(s, m) => format!("{}*{}", print_scalar_factor(s), print_factor(m)),
        Expr::MatMul(l, r) => format!("{}*{}", print_term(l), print_factor(r)),
        Expr::Adjoint(m) => format!("{}'", print_factor(m)),
        Expr::Power(b, s) => format!("{}^{}", print_factor(b), print_exponent(s)),
        Expr::Gm(l, r) => format!("gm({}, {})", print_expr(l), print_expr(r)),
        Expr::Inv(m) => format!("inv({})", print_expr(m)),
        Expr::MatSqrt(m) => format!("sqrt({})", print_expr(m)),
        Expr::Lam(m) => format!("lam({})", print_expr(m)),
        Expr::Sig(m) => format!("sig({})", print_expr(m)),
        Expr::VecSqrt(v) => format!("sqrt({})", print_expr(v)),
        Expr::VecScale(s, v) => format!("{}*{}", print_scalar_factor(s), print_factor(v)),
    }
}

fn print_term(e: &Expr) -> String {
    match e {
        Expr::Add(..) | Expr::Sub(..) => format!("({})", print_expr(e)),
        _ => print_expr(e),
    }
}

fn print_factor(e: &Expr) -> String {
    match e {
        Expr::Add(..) | Expr::Sub(..) | Expr::MatMul(..) | Expr::ScalarMul(..)
        | Expr::VecScale(..) => format!("({})", print_expr(e)),
        _ => print_expr(e),
    }
}

/// Canonical textual form; `parse(print(stmt))` is structurally `stmt`.
pub fn print(stmt: &Statement) -> String {
    let rel = match stmt.relation {
        Relation::ForAllJGeq => ">=",
        Relation::LoewnerGeq => ">=loewner",
    };
    format!("{} {} {}", print_expr(&stmt.lhs), rel, print_expr(&stmt.rhs))
}

// ---------------------------------------------------------------------------
// Built-in catalogue
// ---------------------------------------------------------------------------

/// Source texts of the built-in statements, keyed like the native checks.
pub const CATALOGUE_SOURCES: [(&str, &str); 9] = [
    ("eq1", "0.5*A + 0.5*B >=loewner gm(A, B)"),
    ("eq2", "A + B*inv(A)*B >=loewner 2*B"),
    ("weyl-gm", "lam(A + B) >= 2*lam(gm(A, B))"),
    ("eq3", "lam(A + B) >= 2*sqrt(lam(A*B))"),
    ("eq4", "lam(A + B) >= 2*lam(A^0.5*B^0.5)"),
    ("eq5", "lam(A + B) >= 2*sqrt(sig(A*B))"),
    ("eq7", "lam((1 - t)*A + t*B) >= sig(A^(1 - t)*B^t)"),
    ("eq8", "lam((1 - t)*A + t*B) >= lam(A^(1 - t)*B^t)"),
    (
        "conjecture",
        "lam((1 - t)*A + t*B) >= sqrt(sig(A^(2*(1 - t))*B^(2*t)))",
    ),
];

/// Parses the nine built-in statements. Each agrees with its native check
/// to within 1e-12 per index on identical inputs.
pub fn builtin_catalogue() -> Result<Vec<(String, Statement)>> {
    CATALOGUE_SOURCES
        .iter()
        .map(|(name, src)| Ok((name.to_string(), parse(src)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, identity, mat_from_real};

    #[test]
    fn theorem_statement_shape() {
        let stmt = parse("lam(A+B) >= 2*sqrt(sig(A*B))").unwrap();
        assert_eq!(stmt.relation, Relation::ForAllJGeq);
        match &stmt.lhs {
            Expr::Lam(inner) => match inner.as_ref() {
                Expr::Add(l, r) => {
                    assert_eq!(**l, Expr::MatVar("A".into()));
                    assert_eq!(**r, Expr::MatVar("B".into()));
                }
                other => panic!("unexpected lhs {other:?}"),
            },
            other => panic!("unexpected lhs {other:?}"),
        }
        match &stmt.rhs {
            Expr::VecScale(ScalarExpr::Lit(two), inner) => {
                assert_eq!(*two, 2.0);
                assert!(matches!(inner.as_ref(), Expr::VecSqrt(_)));
            }
            other => panic!("unexpected rhs {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_are_positioned() {
        let err = parse("lam(A+").unwrap_err();
        assert_eq!(err.position, 6);

        let err = parse("gm(A)").unwrap_err();
        assert!(err.message.contains("exactly 2"));

        let err = parse("A $ B").unwrap_err();
        assert_eq!(err.position, 2);
    }

    #[test]
    fn typing_rejects_mixed_relations() {
        // Vector vs matrix comparison.
        assert!(parse("lam(A) >= B").is_err());
        assert!(parse("A >=loewner lam(B)").is_err());
        // Matrix sides on the vector relation.
        assert!(parse("A + B >= gm(A, B)").is_err());
    }

    #[test]
    fn sharp_desugars_to_gm() {
        let a = parse("A \u{266f} B >=loewner gm(A, B)").unwrap();
        assert_eq!(a.lhs, a.rhs);
    }

    #[test]
    fn adjoint_postfix_parses() {
        let stmt = parse("A'*A >=loewner 0*A").unwrap();
        match &stmt.lhs {
            Expr::MatMul(l, _) => assert!(matches!(l.as_ref(), Expr::Adjoint(_))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn catalogue_round_trips() {
        for (name, stmt) in builtin_catalogue().unwrap() {
            let printed = print(&stmt);
            let reparsed = parse(&printed)
                .unwrap_or_else(|e| panic!("{name}: '{printed}' failed to reparse: {e}"));
            assert_eq!(stmt, reparsed, "{name}: round trip changed the tree");
        }
    }

    #[test]
    fn evaluate_theorem_on_identity() {
        let stmt = parse("lam(A+B) >= 2*sqrt(sig(A*B))").unwrap();
        let mut bindings = Bindings::new();
        bindings.insert("A".into(), identity(2));
        bindings.insert("B".into(), identity(2));
        let r = evaluate(&stmt, &bindings, 0.5, 1e-9).unwrap();
        assert_eq!(r.margins.len(), 2);
        assert!(r.margins.iter().all(|m| m.abs() < 1e-12));
    }

    #[test]
    fn evaluate_worked_diagonal_case() {
        let stmt = parse("lam(A+B) >= 2*sqrt(sig(A*B))").unwrap();
        let mut bindings = Bindings::new();
        bindings.insert("A".into(), diag_real(&[4.0, 1.0]));
        bindings.insert("B".into(), diag_real(&[1.0, 4.0]));
        let r = evaluate(&stmt, &bindings, 0.5, 1e-9).unwrap();
        assert!(r.margins.iter().all(|m| (m - 1.0).abs() < 1e-12));
    }

    #[test]
    fn loewner_equality_has_zero_margin() {
        let fwd = parse("0.5*A + 0.5*B >=loewner gm(A, B)").unwrap();
        let mut bindings = Bindings::new();
        bindings.insert("A".into(), identity(2));
        bindings.insert("B".into(), identity(2));
        let r = evaluate(&fwd, &bindings, 0.5, 1e-9).unwrap();
        assert!(r.margins[0].abs() < 1e-12);

        // Reversed statement evaluates to (minus) the same margin here.
        let rev = parse("gm(A, B) >=loewner 0.5*A + 0.5*B").unwrap();
        let r = evaluate(&rev, &bindings, 0.5, 1e-9).unwrap();
        assert!(r.margins[0].abs() < 1e-12);
    }

    #[test]
    fn unbound_variable_is_reported() {
        let stmt = parse("lam(C) >= lam(C)").unwrap();
        let bindings = Bindings::new();
        match evaluate(&stmt, &bindings, 0.5, 1e-9) {
            Err(crate::Error::Eval(msg)) => assert!(msg.contains("'C'")),
            other => panic!("expected eval error, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let stmt = parse("lam(A+B) >= lam(A+B)").unwrap();
        let mut bindings = Bindings::new();
        bindings.insert("A".into(), identity(2));
        bindings.insert("B".into(), identity(3));
        assert!(evaluate(&stmt, &bindings, 0.5, 1e-9).is_err());
    }

    #[test]
    fn eq7_zero_weight_margins_vanish() {
        let catalogue = builtin_catalogue().unwrap();
        let (_, eq7) = catalogue.iter().find(|(n, _)| n == "eq7").unwrap().clone();
        let mut bindings = Bindings::new();
        bindings.insert("A".into(), mat_from_real(2, 2, &[2.0, 0.5, 0.5, 1.0]));
        bindings.insert("B".into(), diag_real(&[3.0, 0.25]));
        let r = evaluate(&eq7, &bindings, 0.0, 1e-9).unwrap();
        assert!(r.margins.iter().all(|m| m.abs() < 1e-10));
    }
}
