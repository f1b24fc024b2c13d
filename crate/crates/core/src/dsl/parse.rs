//! Recursive-descent parser and the typing pass that splits the raw tree
//! into the two-sorted AST (scalar expressions vs matrix/vector expressions).
//!
//! Grammar:
//!
//! ```text
//! statement := expr (">=" | ">=loewner") expr
//! expr      := term (("+" | "-") term)*
//! term      := factor (("*" | "#") factor)*
//! factor    := primary ("'" | "^" exponent)*
//! exponent  := signed-number | "t" | "(" expr ")"
//! primary   := number | "t" | identifier | "-" primary
//!            | func "(" expr ("," expr)? ")" | "(" expr ")"
//! func      := gm | lam | sig | sqrt | inv
//! ```
//!
//! `>=` quantifies over all indices j of two spectral vectors; `>=loewner`
//! compares two Hermitian matrices.

use super::token::{Keyword, Op, Token, TokenKind};
use super::{Expr, ParseError, Relation, ScalarExpr, Statement};

/// Raw, untyped syntax tree; positions are kept for typing diagnostics.
#[derive(Debug, Clone)]
struct Raw {
    node: RawNode,
    pos: usize,
}

#[derive(Debug, Clone)]
enum RawNode {
    Num(f64),
    T,
    Var(String),
    Add(Box<Raw>, Box<Raw>),
    Sub(Box<Raw>, Box<Raw>),
    Mul(Box<Raw>, Box<Raw>),
    Neg(Box<Raw>),
    Pow(Box<Raw>, Box<Raw>),
    Adjoint(Box<Raw>),
    Call(Keyword, Vec<Raw>),
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn here(&self) -> usize {
        self.peek().map(|t| t.position).unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.here(),
            message: message.into(),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.next() {
            Some(Token {
                kind: TokenKind::RParen,
                ..
            }) => Ok(()),
            Some(t) => Err(ParseError {
                position: t.position,
                message: format!("expected ')', found '{}'", t.text),
            }),
            None => Err(ParseError {
                position: self.end,
                message: "expected ')', found end of input".into(),
            }),
        }
    }

    fn expr(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Op(Op::Plus)) => {
                    self.next();
                    let rhs = self.term()?;
                    let pos = lhs.pos;
                    lhs = Raw {
                        node: RawNode::Add(Box::new(lhs), Box::new(rhs)),
                        pos,
                    };
                }
                Some(TokenKind::Op(Op::Minus)) => {
                    self.next();
                    let rhs = self.term()?;
                    let pos = lhs.pos;
                    lhs = Raw {
                        node: RawNode::Sub(Box::new(lhs), Box::new(rhs)),
                        pos,
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Op(Op::Star)) => {
                    self.next();
                    let rhs = self.factor()?;
                    let pos = lhs.pos;
                    lhs = Raw {
                        node: RawNode::Mul(Box::new(lhs), Box::new(rhs)),
                        pos,
                    };
                }
                Some(TokenKind::Op(Op::Sharp)) => {
                    self.next();
                    let rhs = self.factor()?;
                    let pos = lhs.pos;
                    lhs = Raw {
                        node: RawNode::Call(Keyword::Gm, vec![lhs, rhs]),
                        pos,
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Raw, ParseError> {
        let mut base = self.primary()?;
        loop {
            match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Op(Op::Prime)) => {
                    self.next();
                    let pos = base.pos;
                    base = Raw {
                        node: RawNode::Adjoint(Box::new(base)),
                        pos,
                    };
                }
                Some(TokenKind::Op(Op::Caret)) => {
                    self.next();
                    let exp = self.exponent()?;
                    let pos = base.pos;
                    base = Raw {
                        node: RawNode::Pow(Box::new(base), Box::new(exp)),
                        pos,
                    };
                }
                _ => return Ok(base),
            }
        }
    }

    fn exponent(&mut self) -> Result<Raw, ParseError> {
        match self.peek() {
            Some(t) => match &t.kind {
                TokenKind::Number(v) => {
                    let pos = t.position;
                    let v = *v;
                    self.next();
                    Ok(Raw {
                        node: RawNode::Num(v),
                        pos,
                    })
                }
                TokenKind::Op(Op::Minus) => {
                    let pos = t.position;
                    self.next();
                    let inner = self.exponent()?;
                    Ok(Raw {
                        node: RawNode::Neg(Box::new(inner)),
                        pos,
                    })
                }
                TokenKind::Keyword(Keyword::T) => {
                    let pos = t.position;
                    self.next();
                    Ok(Raw {
                        node: RawNode::T,
                        pos,
                    })
                }
                TokenKind::LParen => {
                    self.next();
                    let inner = self.expr()?;
                    self.expect_rparen()?;
                    Ok(inner)
                }
                _ => Err(ParseError {
                    position: t.position,
                    message: format!("expected exponent, found '{}'", t.text),
                }),
            },
            None => Err(self.error("expected exponent, found end of input")),
        }
    }

    fn primary(&mut self) -> Result<Raw, ParseError> {
        let Some(t) = self.next() else {
            return Err(ParseError {
                position: self.end,
                message: "expected expression, found end of input".into(),
            });
        };
        let pos = t.position;
        match &t.kind {
            TokenKind::Number(v) => Ok(Raw {
                node: RawNode::Num(*v),
                pos,
            }),
            TokenKind::Ident(name) => Ok(Raw {
                node: RawNode::Var(name.clone()),
                pos,
            }),
            TokenKind::Keyword(Keyword::T) => Ok(Raw {
                node: RawNode::T,
                pos,
            }),
            TokenKind::Op(Op::Minus) => {
                let inner = self.primary()?;
                Ok(Raw {
                    node: RawNode::Neg(Box::new(inner)),
                    pos,
                })
            }
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Keyword(k @ (Keyword::Gm | Keyword::Lam | Keyword::Sig | Keyword::Sqrt | Keyword::Inv)) => {
                match self.next() {
                    Some(Token {
                        kind: TokenKind::LParen,
                        ..
                    }) => {}
                    Some(t) => {
                        return Err(ParseError {
                            position: t.position,
                            message: format!("expected '(' after function, found '{}'", t.text),
                        })
                    }
                    None => return Err(self.error("expected '(' after function")),
                }
                let mut args = vec![self.expr()?];
                if matches!(
                    self.peek().map(|t| &t.kind),
                    Some(TokenKind::Comma)
                ) {
                    self.next();
                    args.push(self.expr()?);
                }
                self.expect_rparen()?;
                let expected = if *k == Keyword::Gm { 2 } else { 1 };
                if args.len() != expected {
                    return Err(ParseError {
                        position: pos,
                        message: format!(
                            "'{}' takes exactly {expected} argument{}",
                            t.text,
                            if expected == 1 { "" } else { "s" }
                        ),
                    });
                }
                Ok(Raw {
                    node: RawNode::Call(*k, args),
                    pos,
                })
            }
            _ => Err(ParseError {
                position: pos,
                message: format!("unexpected token '{}'", t.text),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Typing pass
// ---------------------------------------------------------------------------

enum Typed {
    Scalar(ScalarExpr),
    Matrix(Expr),
    Vector(Expr),
}

fn sort_name(t: &Typed) -> &'static str {
    match t {
        Typed::Scalar(_) => "scalar",
        Typed::Matrix(_) => "matrix",
        Typed::Vector(_) => "vector",
    }
}

fn type_node(raw: &Raw) -> Result<Typed, ParseError> {
    let err = |message: String| ParseError {
        position: raw.pos,
        message,
    };
    Ok(match &raw.node {
        RawNode::Num(v) => Typed::Scalar(ScalarExpr::Lit(*v)),
        RawNode::T => Typed::Scalar(ScalarExpr::T),
        RawNode::Var(name) => Typed::Matrix(Expr::MatVar(name.clone())),
        RawNode::Add(l, r) => match (type_node(l)?, type_node(r)?) {
            (Typed::Scalar(a), Typed::Scalar(b)) => {
                Typed::Scalar(ScalarExpr::Add(Box::new(a), Box::new(b)))
            }
            (Typed::Matrix(a), Typed::Matrix(b)) => {
                Typed::Matrix(Expr::Add(Box::new(a), Box::new(b)))
            }
            (a, b) => {
                return Err(err(format!(
                    "cannot add {} and {}",
                    sort_name(&a),
                    sort_name(&b)
                )))
            }
        },
        RawNode::Sub(l, r) => match (type_node(l)?, type_node(r)?) {
            (Typed::Scalar(a), Typed::Scalar(b)) => {
                Typed::Scalar(ScalarExpr::Sub(Box::new(a), Box::new(b)))
            }
            (Typed::Matrix(a), Typed::Matrix(b)) => {
                Typed::Matrix(Expr::Sub(Box::new(a), Box::new(b)))
            }
            (a, b) => {
                return Err(err(format!(
                    "cannot subtract {} from {}",
                    sort_name(&b),
                    sort_name(&a)
                )))
            }
        },
        RawNode::Mul(l, r) => match (type_node(l)?, type_node(r)?) {
            (Typed::Scalar(a), Typed::Scalar(b)) => {
                Typed::Scalar(ScalarExpr::Mul(Box::new(a), Box::new(b)))
            }
            (Typed::Scalar(s), Typed::Matrix(m)) | (Typed::Matrix(m), Typed::Scalar(s)) => {
                Typed::Matrix(Expr::ScalarMul(s, Box::new(m)))
            }
            (Typed::Scalar(s), Typed::Vector(v)) | (Typed::Vector(v), Typed::Scalar(s)) => {
                Typed::Vector(Expr::VecScale(s, Box::new(v)))
            }
            (Typed::Matrix(a), Typed::Matrix(b)) => {
                Typed::Matrix(Expr::MatMul(Box::new(a), Box::new(b)))
            }
            (a, b) => {
                return Err(err(format!(
                    "cannot multiply {} by {}",
                    sort_name(&a),
                    sort_name(&b)
                )))
            }
        },
        RawNode::Neg(e) => match type_node(e)? {
            Typed::Scalar(s) => Typed::Scalar(ScalarExpr::Neg(Box::new(s))),
            other => {
                return Err(err(format!(
                    "unary minus applies to scalars, not {}",
                    sort_name(&other)
                )))
            }
        },
        RawNode::Pow(base, exp) => {
            let b = match type_node(base)? {
                Typed::Matrix(m) => m,
                other => {
                    return Err(err(format!(
                        "power base must be a matrix, not {}",
                        sort_name(&other)
                    )))
                }
            };
            let e = match type_node(exp)? {
                Typed::Scalar(s) => s,
                other => {
                    return Err(err(format!(
                        "exponent must be scalar, not {}",
                        sort_name(&other)
                    )))
                }
            };
            Typed::Matrix(Expr::Power(Box::new(b), e))
        }
        RawNode::Adjoint(e) => match type_node(e)? {
            Typed::Matrix(m) => Typed::Matrix(Expr::Adjoint(Box::new(m))),
            other => {
                return Err(err(format!(
                    "adjoint applies to matrices, not {}",
                    sort_name(&other)
                )))
            }
        },
        RawNode::Call(k, args) => match k {
            Keyword::Gm => {
                let (l, r) = (type_node(&args[0])?, type_node(&args[1])?);
                match (l, r) {
                    (Typed::Matrix(a), Typed::Matrix(b)) => {
                        Typed::Matrix(Expr::Gm(Box::new(a), Box::new(b)))
                    }
                    (a, b) => {
                        return Err(err(format!(
                            "gm takes two matrices, got {} and {}",
                            sort_name(&a),
                            sort_name(&b)
                        )))
                    }
                }
            }
            Keyword::Lam | Keyword::Sig => {
                let inner = match type_node(&args[0])? {
                    Typed::Matrix(m) => m,
                    other => {
                        return Err(err(format!(
                            "spectral map takes a matrix, not {}",
                            sort_name(&other)
                        )))
                    }
                };
                let e = if *k == Keyword::Lam {
                    Expr::Lam(Box::new(inner))
                } else {
                    Expr::Sig(Box::new(inner))
                };
                Typed::Vector(e)
            }
            Keyword::Sqrt => match type_node(&args[0])? {
                Typed::Vector(v) => Typed::Vector(Expr::VecSqrt(Box::new(v))),
                Typed::Matrix(m) => Typed::Matrix(Expr::MatSqrt(Box::new(m))),
                Typed::Scalar(_) => {
                    return Err(err(
                        "sqrt applies to spectral vectors or PSD matrices, not scalars".into(),
                    ))
                }
            },
            Keyword::Inv => match type_node(&args[0])? {
                Typed::Matrix(m) => Typed::Matrix(Expr::Inv(Box::new(m))),
                other => {
                    return Err(err(format!(
                        "inv applies to matrices, not {}",
                        sort_name(&other)
                    )))
                }
            },
            Keyword::T | Keyword::Loewner => unreachable!("not parsed as calls"),
        },
    })
}

/// Parses a token stream into a typed statement.
pub fn parse(tokens: &[Token], source_len: usize) -> Result<Statement, ParseError> {
    let mut p = Parser {
        tokens,
        pos: 0,
        end: source_len,
    };
    let lhs_raw = p.expr()?;
    let relation = match p.next() {
        Some(Token {
            kind: TokenKind::Op(Op::Geq),
            ..
        }) => {
            // Tolerate a spaced "loewner" keyword after ">=".
            if matches!(
                p.peek().map(|t| &t.kind),
                Some(TokenKind::Keyword(Keyword::Loewner))
            ) {
                p.next();
                Relation::LoewnerGeq
            } else {
                Relation::ForAllJGeq
            }
        }
        Some(Token {
            kind: TokenKind::Op(Op::GeqLoewner),
            ..
        }) => Relation::LoewnerGeq,
        Some(t) => {
            return Err(ParseError {
                position: t.position,
                message: format!("expected '>=' or '>=loewner', found '{}'", t.text),
            })
        }
        None => {
            return Err(ParseError {
                position: source_len,
                message: "expected '>=' or '>=loewner', found end of input".into(),
            })
        }
    };
    let rhs_raw = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(ParseError {
            position: t.position,
            message: format!("unexpected trailing token '{}'", t.text),
        });
    }

    let lhs_pos = lhs_raw.pos;
    let rhs_pos = rhs_raw.pos;
    let lhs = type_node(&lhs_raw)?;
    let rhs = type_node(&rhs_raw)?;
    match relation {
        Relation::ForAllJGeq => match (lhs, rhs) {
            (Typed::Vector(l), Typed::Vector(r)) => Ok(Statement {
                lhs: l,
                relation,
                rhs: r,
            }),
            (l, r) => Err(ParseError {
                position: if matches!(l, Typed::Vector(_)) {
                    rhs_pos
                } else {
                    lhs_pos
                },
                message: format!(
                    "'>=' compares spectral vectors; got {} vs {}",
                    sort_name(&l),
                    sort_name(&r)
                ),
            }),
        },
        Relation::LoewnerGeq => match (lhs, rhs) {
            (Typed::Matrix(l), Typed::Matrix(r)) => Ok(Statement {
                lhs: l,
                relation,
                rhs: r,
            }),
            (l, r) => Err(ParseError {
                position: if matches!(l, Typed::Matrix(_)) {
                    rhs_pos
                } else {
                    lhs_pos
                },
                message: format!(
                    "'>=loewner' compares matrices; got {} vs {}",
                    sort_name(&l),
                    sort_name(&r)
                ),
            }),
        },
    }
}
