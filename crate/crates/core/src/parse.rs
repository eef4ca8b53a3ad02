//! Parser for the polynomial text grammar: terms joined by + and -, each term
//! a coefficient, a coefficient times a power product, or a bare power
//! product; power products are var^k factors joined by *; coefficients are
//! integers or p/q fractions. Variables are identifiers that may carry
//! trailing primes, so renamed coordinates like x' parse back in.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{KernelError, Result};
use crate::monomial::Monomial;
use crate::poly::Polynomial;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
}

fn tokenize(input: &str) -> Result<Vec<(usize, Token)>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => {
                i += 1;
                Token::Plus
            }
            '-' => {
                i += 1;
                Token::Minus
            }
            '*' => {
                i += 1;
                Token::Star
            }
            '^' => {
                i += 1;
                Token::Caret
            }
            '/' => {
                i += 1;
                Token::Slash
            }
            _ if c.is_ascii_digit() => {
                let mut s = String::new();
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    s.push(bytes[i]);
                    i += 1;
                }
                Token::Int(s.parse().expect("digit run parses as integer"))
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_' || bytes[i] == '\'')
                {
                    s.push(bytes[i]);
                    i += 1;
                }
                Token::Ident(s)
            }
            _ => {
                return Err(KernelError::Parse {
                    message: format!("unexpected character {c:?}"),
                    position: start,
                })
            }
        };
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    input_len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.input_len)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(KernelError::Parse { message: message.into(), position: self.here() })
    }

    fn integer(&mut self) -> Result<BigInt> {
        match self.bump() {
            Some(Token::Int(n)) => Ok(n),
            _ => {
                self.pos -= 1;
                self.fail("expected an integer")
            }
        }
    }

    /// coeff := int ['/' int]
    fn coefficient(&mut self, n: BigInt) -> Result<Rational> {
        if self.peek() == Some(&Token::Slash) {
            self.bump();
            let d = self.integer()?;
            if d.is_zero() {
                return self.fail("zero denominator");
            }
            Ok(Rational::new(n, d))
        } else {
            Ok(Rational::from_integer(n))
        }
    }

    /// factor := ident ['^' int]
    fn factor(&mut self) -> Result<(String, u32)> {
        let name = match self.bump() {
            Some(Token::Ident(s)) => s,
            _ => {
                self.pos -= 1;
                return self.fail("expected a variable");
            }
        };
        if self.peek() == Some(&Token::Caret) {
            self.bump();
            let k = self.integer()?;
            if k.is_negative() || k.is_zero() {
                return self.fail("exponent must be a positive integer");
            }
            let k = u32::try_from(&k).map_err(|_| KernelError::Parse {
                message: "exponent too large".into(),
                position: self.here(),
            })?;
            Ok((name, k))
        } else {
            Ok((name, 1))
        }
    }

    /// term := coeff | coeff '*' mono | mono
    fn term(&mut self, vars: &mut Vec<String>) -> Result<(Monomial, Rational)> {
        let coeff = match self.peek() {
            Some(Token::Int(_)) => {
                let n = self.integer()?;
                let c = self.coefficient(n)?;
                if self.peek() == Some(&Token::Star) {
                    self.bump();
                } else {
                    return Ok((Monomial::one(), c));
                }
                c
            }
            _ => Rational::one(),
        };
        let mut factors = Vec::new();
        loop {
            let (name, k) = self.factor()?;
            if !vars.contains(&name) {
                vars.push(name.clone());
            }
            factors.push((name, k));
            if self.peek() == Some(&Token::Star) {
                self.bump();
            } else {
                break;
            }
        }
        Ok((Monomial::from_exps(factors), coeff))
    }

    fn polynomial(&mut self) -> Result<Polynomial> {
        let mut vars: Vec<String> = Vec::new();
        let mut terms: Vec<(Monomial, Rational)> = Vec::new();
        let mut negate = false;
        if self.peek() == Some(&Token::Minus) {
            self.bump();
            negate = true;
        }
        loop {
            let (m, c) = self.term(&mut vars)?;
            terms.push((m, if negate { -c } else { c }));
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    negate = false;
                }
                Some(Token::Minus) => {
                    self.bump();
                    negate = true;
                }
                None => break,
                _ => return self.fail("expected + or - between terms"),
            }
        }
        Ok(Polynomial::from_terms(&vars, terms))
    }
}

/// Parses the text grammar. Variables are registered in first-occurrence
/// order, which becomes the polynomial's declared order.
pub fn parse_polynomial(input: &str) -> Result<Polynomial> {
    let tokens = tokenize(input)?;
    if tokens.is_empty() {
        return Err(KernelError::Parse { message: "empty input".into(), position: 0 });
    }
    let mut parser = Parser { tokens, pos: 0, input_len: input.len() };
    parser.polynomial()
}

/// Like [`parse_polynomial`] but with a caller-declared variable order; the
/// input may only use the declared variables.
pub fn parse_polynomial_in(input: &str, vars: &[String]) -> Result<Polynomial> {
    let p = parse_polynomial(input)?;
    for v in p.occurring_vars() {
        if !vars.contains(&v) {
            return Err(KernelError::Parse {
                message: format!("unknown variable {v}"),
                position: 0,
            });
        }
    }
    Ok(Polynomial::from_terms(vars, p.terms().iter().map(|(m, c)| (m.clone(), c.clone()))))
}
