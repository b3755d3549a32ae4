//! The Pauli-string observable language.
//!
//! ```text
//! expr := ['-'] term (('+' | '-') term)*
//! term := [coef '*'] letters
//! letters := ('I' | 'X' | 'Y' | 'Z')+
//! ```

use std::fmt;

use crate::algebra::{pauli_decomposition, pauli_string, AlgebraElement};
use crate::error::{Error, Result};

/// Parsed Pauli expression: weighted tensor products of single-site letters.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    terms: Vec<(f64, String)>,
}

impl PauliString {
    pub fn terms(&self) -> &[(f64, String)] {
        &self.terms
    }

    pub fn sites(&self) -> usize {
        self.terms[0].1.len()
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser { src: text.as_bytes(), pos: 0 }.expr()
    }

    /// Weighted sum of tensor products; the result is Hermitian.
    pub fn to_element(&self) -> AlgebraElement {
        let mut acc = AlgebraElement::zeros(1 << self.sites());
        for (c, letters) in &self.terms {
            let p = pauli_string(letters).expect("validated letters");
            acc = &acc + &p.scale(*c);
        }
        acc
    }

    /// Pauli expansion of a Hermitian element when `d = 2^k`; the zero matrix
    /// is written as `0*I…I`.
    pub fn from_element(m: &AlgebraElement) -> Option<Self> {
        let dec = pauli_decomposition(m)?;
        if dec.is_empty() {
            let n = m.dim().trailing_zeros() as usize;
            return Some(Self { terms: vec![(0.0, "I".repeat(n))] });
        }
        Some(Self { terms: dec.into_iter().map(|(l, c)| (c, l)).collect() })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (c, letters)) in self.terms.iter().enumerate() {
            let neg = c.is_sign_negative();
            match (k, neg) {
                (0, false) => {}
                (0, true) => write!(f, "-")?,
                (_, false) => write!(f, " + ")?,
                (_, true) => write!(f, " - ")?,
            }
            let a = c.abs();
            if a != 1.0 {
                write!(f, "{a:?}*")?;
            }
            write!(f, "{letters}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Parses straight to a matrix.
pub fn parse_pauli(text: &str) -> Result<AlgebraElement> {
    Ok(PauliString::parse(text)?.to_element())
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::SyntaxError { position: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<PauliString> {
        let mut terms: Vec<(f64, String)> = Vec::new();
        self.skip_ws();
        let mut sign = 1.0;
        if self.peek() == Some(b'-') {
            sign = -1.0;
            self.pos += 1;
        } else if self.peek() == Some(b'+') {
            self.pos += 1;
        }
        loop {
            self.skip_ws();
            let (c, letters) = self.term()?;
            if let Some((_, first)) = terms.first() {
                if first.len() != letters.len() {
                    return Err(Error::MixedArity { expected: first.len(), found: letters.len() });
                }
            }
            terms.push((sign * c, letters));
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'+') => sign = 1.0,
                Some(b'-') => sign = -1.0,
                Some(_) => return self.err("expected `+`, `-` or end of input"),
            }
            self.pos += 1;
        }
        Ok(PauliString { terms })
    }

    fn term(&mut self) -> Result<(f64, String)> {
        let coef = match self.peek() {
            Some(b) if b.is_ascii_digit() || b == b'.' => {
                let c = self.number()?;
                self.skip_ws();
                if self.peek() != Some(b'*') {
                    return self.err("expected `*` after coefficient");
                }
                self.pos += 1;
                self.skip_ws();
                c
            }
            _ => 1.0,
        };
        let start = self.pos;
        while let Some(b'I' | b'X' | b'Y' | b'Z') = self.peek() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected Pauli letters I, X, Y or Z");
        }
        if let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() {
                return self.err(format!("unexpected character `{}`", b as char));
            }
        }
        let letters = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii").to_string();
        Ok((coef, letters))
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.peek().is_some_and(|b| b.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return self.err("malformed coefficient");
        }
        if let Some(b'e' | b'E') = self.peek() {
            self.pos += 1;
            if let Some(b'+' | b'-') = self.peek() {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return self.err("malformed exponent");
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                self.err("coefficient out of range")
            }
        }
    }
}
