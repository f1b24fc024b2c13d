//! Maximal-munch tokenizer for the inequality language.

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Gm,
    Lam,
    Sig,
    Sqrt,
    Inv,
    T,
    Loewner,
}

impl Keyword {
    fn lookup(word: &str) -> Option<Self> {
        match word {
            "gm" => Some(Self::Gm),
            "lam" => Some(Self::Lam),
            "sig" => Some(Self::Sig),
            "sqrt" => Some(Self::Sqrt),
            "inv" => Some(Self::Inv),
            "t" => Some(Self::T),
            "loewner" => Some(Self::Loewner),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Plus,
    Minus,
    Star,
    Caret,
    /// Postfix adjoint `'`.
    Prime,
    /// Infix alias for the geometric mean.
    Sharp,
    Geq,
    GeqLoewner,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Keyword(Keyword),
    Op(Op),
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Character offset into the source; strictly increasing.
    pub position: usize,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        // Comment to end of line.
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let kind = match c {
            '(' => {
                i += 1;
                TokenKind::LParen
            }
            ')' => {
                i += 1;
                TokenKind::RParen
            }
            ',' => {
                i += 1;
                TokenKind::Comma
            }
            '+' => {
                i += 1;
                TokenKind::Op(Op::Plus)
            }
            '-' => {
                i += 1;
                TokenKind::Op(Op::Minus)
            }
            '*' => {
                i += 1;
                TokenKind::Op(Op::Star)
            }
            '^' => {
                i += 1;
                TokenKind::Op(Op::Caret)
            }
            '\'' => {
                i += 1;
                TokenKind::Op(Op::Prime)
            }
            '\u{266f}' => {
                // '♯'
                i += 1;
                TokenKind::Op(Op::Sharp)
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    // Maximal munch: ">=loewner" is one operator.
                    let rest: String = chars[i + 2..].iter().take(7).collect();
                    if rest == "loewner" {
                        i += 9;
                        TokenKind::Op(Op::GeqLoewner)
                    } else {
                        i += 2;
                        TokenKind::Op(Op::Geq)
                    }
                } else {
                    return Err(ParseError {
                        position: i,
                        message: "expected '=' after '>'".into(),
                    });
                }
            }
            d if d.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '.' {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text: String = chars[i..j].iter().collect();
                let value = text.parse::<f64>().map_err(|_| ParseError {
                    position: i,
                    message: format!("invalid number '{text}'"),
                })?;
                i = j;
                TokenKind::Number(value)
            }
            a if a.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_alphanumeric() {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                i = j;
                match Keyword::lookup(&word) {
                    Some(k) => TokenKind::Keyword(k),
                    None => TokenKind::Ident(word),
                }
            }
            other => {
                return Err(ParseError {
                    position: i,
                    message: format!("illegal character '{other}'"),
                });
            }
        };
        let text: String = chars[start..i].iter().collect();
        tokens.push(Token {
            kind,
            text,
            position: start,
        });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_stream() {
        let toks = tokenize("lam(A+B)").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| &t.kind).collect();
        assert!(matches!(kinds[0], TokenKind::Keyword(Keyword::Lam)));
        assert!(matches!(kinds[1], TokenKind::LParen));
        assert!(matches!(kinds[2], TokenKind::Ident(s) if s == "A"));
        assert!(matches!(kinds[3], TokenKind::Op(Op::Plus)));
        assert!(matches!(kinds[4], TokenKind::Ident(s) if s == "B"));
        assert!(matches!(kinds[5], TokenKind::RParen));
        assert_eq!(toks.len(), 6);
        // Positions strictly increasing.
        for w in toks.windows(2) {
            assert!(w[0].position < w[1].position);
        }
    }

    #[test]
    fn eight_tokens_closing_parens() {
        let toks = tokenize("2*sqrt(sig(A*B))").unwrap();
        assert_eq!(toks.len(), 11);
        assert!(matches!(toks[9].kind, TokenKind::RParen));
        assert!(matches!(toks[10].kind, TokenKind::RParen));
    }

    #[test]
    fn illegal_character_is_positioned() {
        let err = tokenize("A $ B").unwrap_err();
        assert_eq!(err.position, 2);
    }

    #[test]
    fn loewner_relation_is_one_token() {
        let toks = tokenize("A >=loewner B").unwrap();
        assert!(matches!(toks[1].kind, TokenKind::Op(Op::GeqLoewner)));
        let toks = tokenize("A >= B").unwrap();
        assert!(matches!(toks[1].kind, TokenKind::Op(Op::Geq)));
    }

    #[test]
    fn sharp_alias() {
        let toks = tokenize("A \u{266f} B").unwrap();
        assert!(matches!(toks[1].kind, TokenKind::Op(Op::Sharp)));
    }
}
