//! Exact elements of `ℚ(i)(t)` with their `t`-adic valuation.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::algebra::{Field, GaussRational, Poly};
use crate::error::{Error, Result};

type G = GaussRational;

/// A rational function of `t` kept as `num/den` with `den` monic and
/// `gcd(num, den) = 1`, so equal values have equal representations.
#[derive(Clone, PartialEq, Eq)]
pub struct TParam {
    num: Vec<G>,
    den: Vec<G>,
}

fn poly(v: &[G]) -> Poly<G> {
    Poly::new(v.to_vec())
}

impl TParam {
    pub fn new(num: Poly<G>, den: Poly<G>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::BadInput("zero denominator in t".into()));
        }
        if num.is_zero() {
            return Ok(TParam::zero());
        }
        let g = num.gcd(&den)?;
        let (n, _) = num.div_rem(&g)?;
        let (d, _) = den.div_rem(&g)?;
        let lead = d.leading().expect("nonzero").clone();
        let inv = G::one() / lead;
        Ok(TParam {
            num: n.scale(&inv).into_coeffs(),
            den: d.scale(&inv).into_coeffs(),
        })
    }

    pub fn zero() -> Self {
        TParam {
            num: Vec::new(),
            den: vec![G::one()],
        }
    }

    pub fn one() -> Self {
        TParam::constant(G::one())
    }

    pub fn constant(c: G) -> Self {
        if c.is_zero() {
            return TParam::zero();
        }
        TParam {
            num: vec![c],
            den: vec![G::one()],
        }
    }

    pub fn from_i64(n: i64) -> Self {
        TParam::constant(G::from_i64(n))
    }

    pub fn t() -> Self {
        TParam::monomial(G::one(), 1)
    }

    /// `c·t^k` for any integer `k`.
    pub fn monomial(c: G, k: i64) -> Self {
        if c.is_zero() {
            return TParam::zero();
        }
        let shift = |c: G, k: usize| -> Vec<G> {
            let mut v = vec![G::zero(); k];
            v.push(c);
            v
        };
        if k >= 0 {
            TParam {
                num: shift(c, k as usize),
                den: vec![G::one()],
            }
        } else {
            TParam {
                num: vec![c],
                den: shift(G::one(), (-k) as usize),
            }
        }
    }

    pub fn numerator(&self) -> Poly<G> {
        poly(&self.num)
    }

    pub fn denominator(&self) -> Poly<G> {
        poly(&self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    /// `ord_{t=0}`; `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let low = |v: &[G]| v.iter().position(|c| !c.is_zero()).expect("nonzero") as i64;
        Some(low(&self.num) - low(&self.den))
    }

    /// `(v, c)` with `self = c·t^v + (higher order)`.
    pub fn leading_term(&self) -> Option<(i64, G)> {
        let v = self.valuation()?;
        let first = |p: &[G]| p.iter().find(|c| !c.is_zero()).expect("nonzero").clone();
        Some((v, first(&self.num) / first(&self.den)))
    }

    /// The value at `t = 0`, when the valuation is nonnegative.
    pub fn value_at_zero(&self) -> Option<G> {
        match self.leading_term() {
            None => Some(G::zero()),
            Some((v, _)) if v > 0 => Some(G::zero()),
            Some((0, c)) => Some(c),
            Some(_) => None,
        }
    }

    /// The constant in `ℚ(i)` when `self` does not depend on `t`.
    pub fn as_constant(&self) -> Option<G> {
        if self.is_zero() {
            return Some(G::zero());
        }
        (self.num.len() == 1 && self.den.len() == 1).then(|| self.num[0].clone())
    }

    /// `t ↦ t^n`.
    pub fn substitute_power(&self, n: usize) -> TParam {
        assert!(n >= 1);
        let spread = |v: &[G]| -> Vec<G> {
            if v.is_empty() {
                return Vec::new();
            }
            let mut out = vec![G::zero(); (v.len() - 1) * n + 1];
            for (k, c) in v.iter().enumerate() {
                out[k * n] = c.clone();
            }
            out
        };
        TParam {
            num: spread(&self.num),
            den: spread(&self.den),
        }
    }

    pub fn recip(&self) -> Result<TParam> {
        if self.is_zero() {
            return Err(Error::BadInput("division by zero in t".into()));
        }
        TParam::new(self.denominator(), self.numerator())
    }

    pub fn powi(&self, n: i64) -> Result<TParam> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut acc = TParam::one();
        for _ in 0..n.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Parses expressions in `t` and `i` over the rationals, e.g.
    /// `1/t`, `(1+t)/t^2`, `-1/2*t + 3i`, `2t^3`.
    pub fn parse(s: &str) -> Result<TParam> {
        let mut p = Parser {
            s: s.as_bytes(),
            pos: 0,
            src: s,
        };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(v)
    }

    fn combine(a: &TParam, b: &TParam, sign: bool) -> TParam {
        let (an, ad, bn, bd) = (
            a.numerator(),
            a.denominator(),
            b.numerator(),
            b.denominator(),
        );
        let cross = bn.mul(&ad);
        let num = if sign {
            an.mul(&bd).add(&cross)
        } else {
            an.mul(&bd).sub(&cross)
        };
        TParam::new(num, ad.mul(&bd)).expect("nonzero denominators")
    }
}

impl Default for TParam {
    fn default() -> Self {
        TParam::zero()
    }
}

impl<'a> Add<&'a TParam> for &'a TParam {
    type Output = TParam;
    fn add(self, o: &TParam) -> TParam {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        TParam::combine(self, o, true)
    }
}

impl<'a> Sub<&'a TParam> for &'a TParam {
    type Output = TParam;
    fn sub(self, o: &TParam) -> TParam {
        if o.is_zero() {
            return self.clone();
        }
        TParam::combine(self, o, false)
    }
}

impl<'a> Mul<&'a TParam> for &'a TParam {
    type Output = TParam;
    fn mul(self, o: &TParam) -> TParam {
        if self.is_zero() || o.is_zero() {
            return TParam::zero();
        }
        if let Some(c) = o.as_constant() {
            let s = |v: &[G]| v.iter().map(|x| x * &c).collect::<Vec<_>>();
            return TParam {
                num: s(&self.num),
                den: self.den.clone(),
            };
        }
        if let Some(c) = self.as_constant() {
            let s = |v: &[G]| v.iter().map(|x| x * &c).collect::<Vec<_>>();
            return TParam {
                num: s(&o.num),
                den: o.den.clone(),
            };
        }
        TParam::new(
            self.numerator().mul(&o.numerator()),
            self.denominator().mul(&o.denominator()),
        )
        .expect("nonzero denominators")
    }
}

impl<'a> Div<&'a TParam> for &'a TParam {
    type Output = TParam;
    fn div(self, o: &TParam) -> TParam {
        self * &o.recip().expect("division by zero in ℚ(i)(t)")
    }
}

impl Neg for &TParam {
    type Output = TParam;
    fn neg(self) -> TParam {
        TParam {
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for TParam {
            type Output = TParam;
            fn $m(self, o: TParam) -> TParam {
                (&self).$m(&o)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for TParam {
    type Output = TParam;
    fn neg(self) -> TParam {
        -&self
    }
}

impl Field for TParam {
    fn zero_like(&self) -> Self {
        TParam::zero()
    }
    fn one_like(&self) -> Self {
        TParam::one()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        TParam::from_i64(n)
    }
    fn is_zero(&self) -> bool {
        self.num.is_empty()
    }
    fn is_exact(&self) -> bool {
        true
    }
    /// Pivot preference for elimination: any nonzero entry is exact, so
    /// prefer the simplest.
    fn magnitude_log2(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            -((self.num.len() + self.den.len()) as f64)
        }
    }
}

fn fmt_coeff(c: &G) -> String {
    let s = c.to_string();
    if !c.re.is_zero() && !c.im.is_zero() {
        format!("({s})")
    } else {
        s
    }
}

fn fmt_tpoly(v: &[G]) -> (String, usize) {
    let mut out = String::new();
    let mut terms = 0;
    for (k, c) in v.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        terms += 1;
        let mut body = if k == 0 {
            fmt_coeff(c)
        } else if *c == G::one() {
            String::new()
        } else if *c == -G::one() {
            "-".to_string()
        } else {
            format!("{}*", fmt_coeff(c))
        };
        if k == 1 {
            body.push('t');
        } else if k > 1 {
            body.push_str(&format!("t^{k}"));
        }
        if !out.is_empty() && !body.starts_with('-') {
            out.push('+');
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    (out, terms)
}

impl fmt::Display for TParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, nt) = fmt_tpoly(&self.num);
        if self.den.len() == 1 {
            return write!(f, "{n}");
        }
        let (d, dt) = fmt_tpoly(&self.den);
        let n = if nt > 1 { format!("({n})") } else { n };
        let d = if dt > 1 || d.contains('*') {
            format!("({d})")
        } else {
            d
        };
        write!(f, "{n}/{d}")
    }
}

impl fmt::Debug for TParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl serde::Serialize for TParam {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::BadInput(format!(
            "cannot parse {:?} at {}: {what}",
            self.src, self.pos
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<TParam> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<TParam> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    if rhs.is_zero() {
                        return Err(self.err("division by zero"));
                    }
                    acc = &acc / &rhs;
                }
                // juxtaposition: 2t, 3i, 2(t+1)
                Some(b't' | b'i' | b'(') | Some(b'0'..=b'9') => acc = &acc * &self.power()?,
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<TParam> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<TParam> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let neg = if self.s.get(self.pos) == Some(&b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: i64 = self.src[start..self.pos]
                .parse()
                .map_err(|_| self.err("expected an exponent"))?;
            if e > 4096 {
                return Err(self.err("exponent too large"));
            }
            return base
                .powi(if neg { -e } else { e })
                .map_err(|_| self.err("zero to a negative power"));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<TParam> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b't') => {
                self.pos += 1;
                Ok(TParam::t())
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(TParam::constant(G::i()))
            }
            Some(b'0'..=b'9' | b'.') => {
                let start = self.pos;
                while self.pos < self.s.len()
                    && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                let g = G::parse(&self.src[start..self.pos]).map_err(|_| self.err("bad number"))?;
                Ok(TParam::constant(g))
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}
