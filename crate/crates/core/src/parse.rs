//! Text grammar for polynomials.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' INT)?
//! atom   := INT | 'Y' | 'X' INT | '(' expr ')'
//! ```
//!
//! Implicit multiplication and non-integer literals are rejected.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::poly::MPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Y,
    X(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(v) => write!(f, "integer {v}"),
            Tok::Y => f.write_str("variable Y"),
            Tok::X(i) => write!(f, "variable X{i}"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Caret => f.write_str("'^'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    nvars: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, offset: usize, expected: &str, found: impl Into<String>) -> ParseError {
        ParseError {
            offset: offset.min(self.src.len()),
            expected: expected.to_string(),
            found: found.into(),
        }
    }

    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        let digits_end = |from: usize| {
            let mut j = from;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            j
        };
        let tok = match b {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'Y' => Tok::Y,
            b'0'..=b'9' => {
                let end = digits_end(start);
                if end < bytes.len() && bytes[end] == b'.' {
                    return Err(self.err(end, "integer literal", "'.' (non-integer literal)"));
                }
                self.pos = end;
                let v: BigInt = self.src[start..end].parse().expect("ascii digits");
                return Ok((start, Tok::Int(v)));
            }
            b'X' => {
                let end = digits_end(start + 1);
                let name = &self.src[start..end];
                let idx = self.src[start + 1..end].parse::<usize>().ok();
                match idx {
                    Some(i) if i >= 1 && i <= self.nvars => {
                        self.pos = end;
                        return Ok((start, Tok::X(i)));
                    }
                    _ => {
                        let expected = if self.nvars == 0 {
                            "variable Y".to_string()
                        } else {
                            format!("variable Y or X1..X{}", self.nvars)
                        };
                        return Err(self.err(start, &expected, format!("unknown variable {name}")));
                    }
                }
            }
            _ => {
                let ch = self.src[start..].chars().next().expect("non-empty");
                if ch.is_alphabetic() {
                    let end = self.src[start..]
                        .char_indices()
                        .find(|(_, c)| !c.is_alphanumeric())
                        .map_or(self.src.len(), |(k, _)| start + k);
                    return Err(self.err(
                        start,
                        "variable Y or Xi",
                        format!("unknown variable {}", &self.src[start..end]),
                    ));
                }
                return Err(self.err(start, "integer, variable, operator or parenthesis", format!("'{ch}'")));
            }
        };
        self.pos += 1;
        Ok((start, tok))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: (usize, Tok),
    nvars: usize,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(usize, Tok), ParseError> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.peeked, next))
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.peeked.0,
            expected: expected.to_string(),
            found: self.peeked.1.to_string(),
        }
    }

    fn expr(&mut self) -> Result<MPoly, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peeked.1 {
                Tok::Plus => {
                    self.bump()?;
                    let rhs = self.term()?;
                    acc = acc.try_add(&rhs).expect("same variable space");
                }
                Tok::Minus => {
                    self.bump()?;
                    let rhs = self.term()?;
                    acc = acc.try_sub(&rhs).expect("same variable space");
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MPoly, ParseError> {
        let mut acc = self.unary()?;
        while self.peeked.1 == Tok::Star {
            self.bump()?;
            let rhs = self.unary()?;
            acc = acc.try_mul(&rhs).expect("same variable space");
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MPoly, ParseError> {
        match self.peeked.1 {
            Tok::Minus => {
                self.bump()?;
                Ok(self.unary()?.neg())
            }
            Tok::Plus => {
                self.bump()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MPoly, ParseError> {
        let base = self.atom()?;
        if self.peeked.1 != Tok::Caret {
            return Ok(base);
        }
        self.bump()?;
        let (off, tok) = self.bump()?;
        let Tok::Int(e) = tok else {
            return Err(ParseError {
                offset: off,
                expected: "non-negative integer exponent".into(),
                found: tok.to_string(),
            });
        };
        let overflow = || ParseError {
            offset: off,
            expected: format!("exponent at most {}", u32::MAX),
            found: format!("exponent {e} (overflow)"),
        };
        let e32 = u32::try_from(&e).map_err(|_| overflow())?;
        base.checked_pow(e32).ok_or_else(overflow)
    }

    fn atom(&mut self) -> Result<MPoly, ParseError> {
        match self.peeked.1.clone() {
            Tok::Int(v) => {
                self.bump()?;
                Ok(MPoly::constant(self.nvars, v))
            }
            Tok::Y => {
                self.bump()?;
                Ok(MPoly::y(self.nvars))
            }
            Tok::X(i) => {
                self.bump()?;
                Ok(MPoly::x(self.nvars, i))
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                if self.peeked.1 != Tok::RParen {
                    return Err(self.unexpected("')'"));
                }
                self.bump()?;
                Ok(inner)
            }
            _ => Err(self.unexpected("integer, variable or '('")),
        }
    }
}

/// Parses `text` as a polynomial in `Y, X1, ..., X{nvars}`.
pub fn parse_poly(text: &str, nvars: usize) -> Result<MPoly, ParseError> {
    let mut lexer = Lexer {
        src: text,
        pos: 0,
        nvars,
    };
    let first = lexer.next()?;
    if first.1 == Tok::End {
        return Err(ParseError {
            offset: first.0,
            expected: "expression".into(),
            found: "end of input".into(),
        });
    }
    let mut parser = Parser {
        lexer,
        peeked: first,
        nvars,
    };
    let poly = parser.expr()?;
    if parser.peeked.1 != Tok::End {
        return Err(parser.unexpected("operator or end of input"));
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::format_poly;

    #[test]
    fn parses_examples() {
        let f = parse_poly("Y^2 - (X1 + X2)", 2).unwrap();
        let expected = MPoly::from_terms(2, [(vec![2, 0, 0], 1), (vec![0, 1, 0], -1), (vec![0, 0, 1], -1)]);
        assert_eq!(f, expected);
        assert!(parse_poly("0", 1).unwrap().is_zero());
        let g = parse_poly("(Y-1)*(Y+1)", 0).unwrap();
        assert_eq!(g, MPoly::from_terms(0, [(vec![2], 1), (vec![0], -1)]));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(format_poly(&parse_poly("-X1^2", 1).unwrap()), "-X1^2");
        assert_eq!(format_poly(&parse_poly("(-X1)^3", 1).unwrap()), "-X1^3");
        assert_eq!(format_poly(&parse_poly("2^10 - 1", 0).unwrap()), "1023");
    }

    #[test]
    fn rejects_unknown_variable() {
        let e = parse_poly("Y + X3", 2).unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.found.contains("X3"));
        let e = parse_poly("Y + Z", 2).unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(parse_poly("X0", 2).is_err());
        assert!(parse_poly("X", 2).is_err());
    }

    #[test]
    fn rejects_malformed_input() {
        assert_eq!(parse_poly("", 1).unwrap_err().offset, 0);
        assert_eq!(parse_poly("   ", 1).unwrap_err().found, "end of input");
        // implicit multiplication
        let e = parse_poly("2Y", 0).unwrap_err();
        assert_eq!(e.offset, 1);
        assert!(parse_poly("Y X1", 1).is_err());
        assert!(parse_poly("1.5*Y", 0).is_err());
        assert!(parse_poly("(Y + 1", 0).is_err());
        assert!(parse_poly("Y^-1", 0).is_err());
        assert!(parse_poly("Y^X1", 1).is_err());
        assert!(parse_poly("Y +", 0).is_err());
        assert!(parse_poly("Y $ 1", 0).is_err());
    }

    #[test]
    fn exponent_overflow() {
        let e = parse_poly("Y^4294967296", 0).unwrap_err();
        assert!(e.found.contains("overflow"));
        assert!(parse_poly("(Y^65536)^65536", 0).is_err());
    }

    #[test]
    fn error_offsets_stay_in_bounds() {
        for s in ["(", "Y^", "Y*", "((Y)", "X12", "é"] {
            let e = parse_poly(s, 2).unwrap_err();
            assert!(e.offset <= s.len(), "{s:?} -> {e:?}");
        }
    }
}
