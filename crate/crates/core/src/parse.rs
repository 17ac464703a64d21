//! Text format for polynomials: `3.5*x1^2*x2 - x3^4`.
//!
//! Whitespace is ignored. A term is an optional sign followed by a
//! `*`-separated product of numbers and variables `x<k>` (1-based) with an
//! optional `^<int>` exponent. Errors carry the byte offset of the problem.

use crate::error::{Error, Result};
use crate::poly::Polynomial;

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn integer(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse().map_err(|_| Error::Parse {
            offset: start,
            message: "integer out of range".into(),
        })
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let digits = |c: &mut Self| {
            let s = c.pos;
            while c.pos < c.src.len() && c.src[c.pos].is_ascii_digit() {
                c.pos += 1;
            }
            c.pos > s
        };
        let mut any = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            any |= digits(self);
        }
        if !any {
            self.pos = start;
            return Err(self.error("expected a number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        text.parse().map_err(|_| Error::Parse {
            offset: start,
            message: format!("invalid number `{text}`"),
        })
    }
}

/// Parses the text format. `n` is the largest variable index used, raised
/// to `explicit_n` when given; an explicit `n` smaller than a used index is
/// an error.
pub fn parse_poly(text: &str, explicit_n: Option<usize>) -> Result<Polynomial> {
    let mut cur = Cursor {
        src: text.as_bytes(),
        pos: 0,
    };
    let mut terms: Vec<(Vec<(usize, u32)>, f64)> = Vec::new();
    let mut max_var = 0usize;
    if cur.peek().is_none() {
        return Err(cur.error("empty polynomial"));
    }
    let mut first = true;
    while cur.peek().is_some() {
        let mut sign = 1.0;
        match cur.peek() {
            Some(b'+') => cur.pos += 1,
            Some(b'-') => {
                sign = -1.0;
                cur.pos += 1;
            }
            _ if !first => return Err(cur.error("expected `+` or `-`")),
            _ => {}
        }
        first = false;
        let mut coeff = sign;
        let mut vars: Vec<(usize, u32)> = Vec::new();
        loop {
            match cur.peek() {
                Some(b'x') => {
                    cur.pos += 1;
                    let at = cur.pos;
                    let k = cur.integer()? as usize;
                    if k == 0 {
                        return Err(Error::Parse {
                            offset: at,
                            message: "variables are numbered from x1".into(),
                        });
                    }
                    let mut e = 1;
                    if cur.peek() == Some(b'^') {
                        cur.pos += 1;
                        e = cur.integer()?;
                    }
                    max_var = max_var.max(k);
                    vars.push((k, e));
                }
                Some(c) if c.is_ascii_digit() || c == b'.' => {
                    coeff *= cur.number()?;
                }
                _ => return Err(cur.error("expected a number or a variable")),
            }
            if cur.peek() == Some(b'*') {
                cur.pos += 1;
            } else {
                break;
            }
        }
        terms.push((vars, coeff));
    }
    let n = match explicit_n {
        Some(n) if n < max_var => {
            return Err(Error::InvalidArgument(format!(
                "explicit n = {n} but the polynomial uses x{max_var}"
            )))
        }
        Some(n) => n,
        None => max_var.max(1),
    };
    let mut poly = Polynomial::new(n);
    for (vars, c) in terms {
        let mut e = vec![0u32; n];
        for (k, p) in vars {
            e[k - 1] += p;
        }
        poly.add_term(e, c)?;
    }
    Ok(poly)
}
