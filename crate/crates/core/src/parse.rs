//! Polynomial expressions over `ℚ(i)`.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   := ['+' | '-'] term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := number | 'i' | identifier | '(' expr ')'
//! ```
//!
//! Division is allowed by nonzero constants only. Numbers may carry a
//! decimal point (`0.25`), read exactly.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::coeff::GaussRational;
use crate::error::{Error, Result};
use crate::series::{TruncatedSeries, Vars, POLY_CAP};

/// Where the expression sits in its source file, for error positions.
#[derive(Clone, Copy, Debug, Default)]
pub struct Origin {
    pub line: usize,
    pub column: usize,
}

/// Parses `text` into an exact polynomial over `vars`. `tokens` maps every
/// accepted identifier to its variable index.
pub fn parse_polynomial(
    text: &str,
    vars: &Vars,
    tokens: &HashMap<String, usize>,
    origin: Origin,
) -> Result<TruncatedSeries> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        vars,
        tokens,
        origin,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(&format!("unexpected `{}`", p.chars[p.pos])));
    }
    Ok(e)
}

/// Identity token map: each variable name parses as itself.
pub fn token_map(vars: &Vars) -> HashMap<String, usize> {
    vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect()
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    vars: &'a Vars,
    tokens: &'a HashMap<String, usize>,
    origin: Origin,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            line: self.origin.line,
            column: self.origin.column + self.pos,
            message: msg.to_string(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn constant(&self, c: GaussRational) -> TruncatedSeries {
        TruncatedSeries::constant(self.vars, POLY_CAP, c)
    }

    fn expr(&mut self) -> Result<TruncatedSeries> {
        self.skip_ws();
        let negate = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let mut acc = self.term()?;
        if negate {
            acc = -&acc;
        }
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<TruncatedSeries> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat('/') {
                let at = self.pos;
                let d = self.unary()?;
                let c = d.constant_term();
                if d.nterms() > 1 || (d.nterms() == 1 && c.is_zero()) {
                    self.pos = at;
                    return Err(self.error("division by a non-constant expression"));
                }
                let Some(inv) = c.inv() else {
                    self.pos = at;
                    return Err(self.error("division by zero"));
                };
                acc = acc.scale(&inv);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<TruncatedSeries> {
        if self.eat('-') {
            let v = self.unary()?;
            return Ok(-&v);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<TruncatedSeries> {
        let base = self.atom()?;
        if self.eat('^') {
            self.skip_ws();
            let start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected a nonnegative integer exponent"));
            }
            let s: String = self.chars[start..self.pos].iter().collect();
            let k: u32 = s
                .parse()
                .ok()
                .filter(|&k| k <= 64)
                .ok_or_else(|| self.error("exponent too large"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<TruncatedSeries> {
        self.skip_ws();
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of expression"));
        };
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(e);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c.is_alphabetic() || c == '_' {
            let start = self.pos;
            while self
                .peek()
                .is_some_and(|c| c.is_alphanumeric() || c == '_')
            {
                self.pos += 1;
            }
            let name: String = self.chars[start..self.pos].iter().collect();
            if name == "i" {
                return Ok(self.constant(GaussRational::i()));
            }
            return match self.tokens.get(&name) {
                Some(&idx) => Ok(TruncatedSeries::var(self.vars, POLY_CAP, idx)),
                None => {
                    self.pos = start;
                    Err(self.error(&format!("unknown variable `{name}`")))
                }
            };
        }
        Err(self.error(&format!("unexpected `{c}`")))
    }

    fn number(&mut self) -> Result<TruncatedSeries> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let int_part: String = self.chars[start..self.pos].iter().collect();
        let mut frac_part = String::new();
        if self.peek() == Some('.') {
            self.pos += 1;
            let fs = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            frac_part = self.chars[fs..self.pos].iter().collect();
        }
        if int_part.is_empty() && frac_part.is_empty() {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = digits.parse().map_err(|_| self.error("malformed number"))?;
        let denom = BigInt::from(10).pow(frac_part.len() as u32);
        let r = BigRational::new(numer, denom);
        Ok(self.constant(GaussRational::real(r)))
    }
}

/// Renders a polynomial so that [`parse_polynomial`] reads it back exactly.
pub fn render(p: &TruncatedSeries) -> String {
    p.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::vars;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<TruncatedSeries> {
        let v = vars(["z1", "z2", "w1", "w2"]);
        let mut t = token_map(&v);
        t.insert("zb1".into(), 2);
        t.insert("zb2".into(), 3);
        parse_polynomial(text, &v, &t, Origin { line: 3, column: 12 })
    }

    #[test]
    fn lewy_defining_function() {
        let p = parse("(z2 - zb2)/(2*i) - z1*zb1").unwrap();
        assert_eq!(p.coeff(&[0, 1, 0, 0]), GaussRational::from_fracs(0, 1, -1, 2));
        assert_eq!(p.coeff(&[0, 0, 0, 1]), GaussRational::from_fracs(0, 1, 1, 2));
        assert_eq!(p.coeff(&[1, 0, 1, 0]), GaussRational::int(-1));
        assert_eq!(p.nterms(), 3);
    }

    #[test]
    fn coefficient_syntax() {
        let p = parse("-1/2*i*z1 + 0.25*z2^2 + (1 + 2*i)^2").unwrap();
        assert_eq!(p.coeff(&[1, 0, 0, 0]), GaussRational::from_fracs(0, 1, -1, 2));
        assert_eq!(p.coeff(&[0, 2, 0, 0]), GaussRational::from_fracs(1, 4, 0, 1));
        assert_eq!(p.constant_term(), GaussRational::from_ints(-3, 4));
    }

    #[test]
    fn errors_carry_positions() {
        match parse("z1 + q7") {
            Err(Error::Parse { line, column, message }) => {
                assert_eq!(line, 3);
                assert_eq!(column, 12 + 5);
                assert!(message.contains("q7"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("z1 / z2"), Err(Error::Parse { .. })));
        assert!(matches!(parse("z1 / 0"), Err(Error::Parse { .. })));
        assert!(matches!(parse("(z1 + "), Err(Error::Parse { .. })));
        assert!(matches!(parse(""), Err(Error::Parse { .. })));
        assert!(matches!(parse("z1 z2"), Err(Error::Parse { .. })));
    }

    fn arb_coeff() -> impl Strategy<Value = GaussRational> {
        (-20i64..20, 1i64..9, -20i64..20, 1i64..9)
            .prop_map(|(a, b, c, d)| GaussRational::from_fracs(a, b, c, d))
    }

    proptest! {
        #[test]
        fn render_round_trips(terms in prop::collection::vec(
            (prop::collection::vec(0u32..4, 4), arb_coeff()), 0..6)) {
            let v = vars(["z1", "z2", "w1", "w2"]);
            let p = TruncatedSeries::from_terms(&v, POLY_CAP, terms);
            let back = parse_polynomial(&render(&p), &v, &token_map(&v), Origin::default()).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
