//! Text form: terms joined by `+`/`-`, each `<coeff>*x<i>^<k>`; the `*`
//! before a variable and `^1` are optional, variables are 1-based.

use super::{Coefficient, Monomial, Multinomial};
use crate::error::{Error, Result};

pub(super) fn format<C: Coefficient>(p: &Multinomial<C>) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.terms().enumerate() {
        let neg = c.is_negative();
        match (k, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let mag = c.abs();
        let vars = format_monomial(m);
        if vars.is_empty() {
            out.push_str(&mag.format_abs());
        } else if mag.is_one() {
            out.push_str(&vars);
        } else {
            out.push_str(&mag.format_abs());
            out.push('*');
            out.push_str(&vars);
        }
    }
    out
}

fn format_monomial(m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.exponents().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("x{}", i + 1)),
            _ => parts.push(format!("x{}^{}", i + 1, e)),
        }
    }
    parts.join("*")
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits")
    }

    /// Unsigned number: digits, optional fraction, optional exponent, and an
    /// optional `/denominator`.
    fn number(&mut self) -> &'a str {
        let start = self.pos;
        self.digits();
        if self.eat(b'.') {
            self.digits();
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits().is_empty() {
                self.pos = save;
            }
        }
        if self.peek() == Some(b'/') {
            let save = self.pos;
            self.pos += 1;
            let before = self.pos;
            self.number_no_fraction();
            if self.pos == before {
                self.pos = save;
            }
        }
        std::str::from_utf8(&self.s[start..self.pos]).expect("ascii number")
    }

    fn number_no_fraction(&mut self) {
        self.digits();
        if self.eat(b'.') {
            self.digits();
        }
    }
}

pub(super) fn parse<C: Coefficient>(s: &str, nvars: Option<usize>) -> Result<Multinomial<C>> {
    let mut cur = Cursor {
        s: s.as_bytes(),
        pos: 0,
    };
    // (exponents by 0-based variable index, coefficient)
    let mut raw: Vec<(Vec<u32>, C)> = Vec::new();
    let mut max_var = 0usize;
    let mut first = true;
    loop {
        cur.skip_ws();
        if cur.peek().is_none() {
            if first {
                return Err(Error::parse(cur.pos, "empty polynomial"));
            }
            break;
        }
        let mut negative = false;
        if cur.eat(b'-') {
            negative = true;
        } else if !cur.eat(b'+') && !first {
            return Err(Error::parse(cur.pos, "expected '+' or '-' between terms"));
        }
        first = false;
        cur.skip_ws();

        let mut coeff = C::one();
        let mut exps: Vec<u32> = Vec::new();
        let mut have_factor = false;
        if cur.peek().is_some_and(|c| c.is_ascii_digit() || c == b'.') {
            let start = cur.pos;
            let lit = cur.number();
            coeff = C::parse_literal(lit)
                .ok_or_else(|| Error::parse(start, format!("invalid coefficient '{lit}'")))?;
            have_factor = true;
            cur.skip_ws();
            if !cur.eat(b'*') {
                // a bare number, possibly followed directly by a variable
                cur.skip_ws();
                if cur.peek() != Some(b'x') {
                    if negative {
                        coeff = -coeff;
                    }
                    raw.push((exps, coeff));
                    continue;
                }
            }
            cur.skip_ws();
        }
        loop {
            cur.skip_ws();
            let start = cur.pos;
            if !cur.eat(b'x') {
                return Err(Error::parse(
                    start,
                    if have_factor { "expected a variable after '*'" } else { "expected a coefficient or variable" },
                ));
            }
            let idx = cur.digits();
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::parse(cur.pos, "expected variable index after 'x'"))?;
            if idx == 0 {
                return Err(Error::parse(start, "variables are numbered from x1"));
            }
            if let Some(n) = nvars {
                if idx > n {
                    return Err(Error::parse(start, format!("variable x{idx} exceeds nvars = {n}")));
                }
            }
            cur.skip_ws();
            let mut e = 1u32;
            if cur.eat(b'^') {
                cur.skip_ws();
                let p = cur.pos;
                let d = cur.digits();
                e = d
                    .parse()
                    .map_err(|_| Error::parse(p, "expected exponent after '^'"))?;
            }
            max_var = max_var.max(idx);
            if exps.len() < idx {
                exps.resize(idx, 0);
            }
            exps[idx - 1] += e;
            have_factor = true;
            cur.skip_ws();
            if !cur.eat(b'*') {
                break;
            }
        }
        if negative {
            coeff = -coeff;
        }
        raw.push((exps, coeff));
    }

    let n = nvars.unwrap_or(max_var.max(1));
    let mut p = Multinomial::zero(n);
    for (mut e, c) in raw {
        e.resize(n, 0);
        p.add_term(Monomial(e), c);
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::super::{rational, FloatPoly, RationalPoly};
    use crate::error::Error;

    #[test]
    fn parses_and_prints_canonical_form() {
        let p = RationalPoly::parse("x1^3 - 3*x1*x2^2", None).unwrap();
        assert_eq!(p.nvars(), 2);
        assert_eq!(p.coefficient(&[1, 2]), rational(-3, 1));
        assert_eq!(p.to_string(), "x1^3 - 3*x1*x2^2");
        // reordering and implicit multiplication canonicalize
        let q = RationalPoly::parse("-3 x1^1*x2*x2 + x1^3", Some(2)).unwrap();
        assert_eq!(q, p);
        assert_eq!(q.to_string(), "x1^3 - 3*x1*x2^2");
    }

    #[test]
    fn constants_and_fractions() {
        let p = RationalPoly::parse("1/2*x1^2 - 1/2*x2^2 + 3", Some(2)).unwrap();
        assert_eq!(p.to_string(), "1/2*x1^2 - 1/2*x2^2 + 3");
        assert_eq!(RationalPoly::parse("0", Some(3)).unwrap().to_string(), "0");
        assert_eq!(RationalPoly::parse("x1 - x1", Some(1)).unwrap().to_string(), "0");
        assert_eq!(RationalPoly::parse("-x2", Some(2)).unwrap().to_string(), "-x2");
    }

    #[test]
    fn float_exponent_literals() {
        let p = FloatPoly::parse("1e-5*x1 - 2.5E+3*x2^2", Some(2)).unwrap();
        assert_eq!(p.coefficient(&[1, 0]), 1e-5);
        assert_eq!(p.coefficient(&[0, 2]), -2500.0);
        assert_eq!(FloatPoly::parse(&p.to_string(), Some(2)).unwrap(), p);
    }

    #[test]
    fn parse_errors_carry_positions() {
        match RationalPoly::parse("x1 + * x2", None) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(RationalPoly::parse("x3", Some(2)), Err(Error::Parse { position: 0, .. })));
        assert!(RationalPoly::parse("", None).is_err());
        assert!(RationalPoly::parse("x1 x2", None).is_err());
        assert!(RationalPoly::parse("x0", None).is_err());
        assert!(RationalPoly::parse("2*", None).is_err());
    }
}
