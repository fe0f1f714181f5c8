//! Multiprecision complex scalars backed by MPFR floats.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::{Float, Rational};

use crate::error::{Error, Result};

/// Smallest precision accepted anywhere in the crate.
pub const MIN_PREC: u32 = 64;

/// A complex number with MPFR real and imaginary parts.
///
/// There is deliberately no `PartialEq`: comparisons go through
/// [`BigComplex::dist`] with an explicit tolerance.
#[derive(Clone)]
pub struct BigComplex {
    re: Float,
    im: Float,
}

impl BigComplex {
    pub fn zero(prec: u32) -> Self {
        let prec = prec.max(MIN_PREC);
        BigComplex {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_f64(prec, 1.0, 0.0)
    }

    pub fn i(prec: u32) -> Self {
        Self::from_f64(prec, 0.0, 1.0)
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        let prec = prec.max(MIN_PREC);
        BigComplex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_i64(prec: u32, n: i64) -> Self {
        let prec = prec.max(MIN_PREC);
        BigComplex {
            re: Float::with_val(prec, n),
            im: Float::new(prec),
        }
    }

    pub fn from_rationals(prec: u32, re: &Rational, im: &Rational) -> Self {
        let prec = prec.max(MIN_PREC);
        BigComplex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    /// Builds from two floats; the precision is the larger of the two.
    pub fn from_floats(re: Float, im: Float) -> Self {
        let prec = re.prec().max(im.prec()).max(MIN_PREC);
        let mut re = re;
        let mut im = im;
        re.set_prec(prec);
        im.set_prec(prec);
        BigComplex { re, im }
    }

    /// `r·e^{iθ}` at the given precision.
    pub fn from_polar(prec: u32, r: &Float, theta: &Float) -> Self {
        let prec = prec.max(MIN_PREC);
        let (s, c) = Float::with_val(prec, theta).sin_cos(Float::new(prec));
        BigComplex {
            re: Float::with_val(prec, &c * r),
            im: Float::with_val(prec, &s * r),
        }
    }

    /// `e^{2πi·k/n}`.
    pub fn root_of_unity(prec: u32, k: i64, n: i64) -> Self {
        let prec = prec.max(MIN_PREC);
        let pi = Float::with_val(prec, Constant::Pi);
        let theta = Float::with_val(prec, &pi * 2i64) * k / n;
        Self::from_polar(prec, &Float::with_val(prec, 1), &theta)
    }

    pub fn re(&self) -> &Float {
        &self.re
    }

    pub fn im(&self) -> &Float {
        &self.im
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(mut self, prec: u32) -> Self {
        let prec = prec.max(MIN_PREC);
        self.re.set_prec(prec);
        self.im.set_prec(prec);
        self
    }

    pub fn is_exact_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn to_c64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(&self) -> Self {
        BigComplex {
            re: self.re.clone(),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        Float::with_val(
            self.prec(),
            self.re.mul_add_mul_ref(&self.re, &self.im, &self.im),
        )
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    /// `log2 |z|`, `-inf` for zero. Safe for magnitudes outside the f64 range.
    pub fn log2_abs(&self) -> f64 {
        if self.is_exact_zero() {
            return f64::NEG_INFINITY;
        }
        let a = self.abs();
        let (m, e) = a.to_f64_exp();
        m.log2() + e as f64
    }

    pub fn ln_abs(&self) -> Float {
        self.abs().ln()
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn recip(&self) -> Self {
        let p = self.prec();
        let n = self.norm_sqr();
        BigComplex {
            re: Float::with_val(p, &self.re / &n),
            im: Float::with_val(p, -&self.im) / &n,
        }
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_exact_zero() {
            return BigComplex::zero(p);
        }
        let r = self.abs();
        let a = (Float::with_val(p, &r + &self.re) / 2u32).sqrt();
        let b = (Float::with_val(p, &r - &self.re) / 2u32).sqrt();
        if self.im.is_sign_negative() {
            BigComplex { re: a, im: -b }
        } else {
            BigComplex { re: a, im: b }
        }
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let r = Float::with_val(p, self.re.exp_ref());
        Self::from_polar(p, &r, &self.im)
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        BigComplex {
            re: self.ln_abs(),
            im: self.arg(),
        }
    }

    pub fn powi(&self, n: i64) -> Self {
        let p = self.prec();
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut base = self.clone();
        let mut acc = BigComplex::one(p);
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn mul_f64(&self, s: f64) -> Self {
        let p = self.prec();
        BigComplex {
            re: Float::with_val(p, &self.re * s),
            im: Float::with_val(p, &self.im * s),
        }
    }

    pub fn mul_i64(&self, s: i64) -> Self {
        let p = self.prec();
        BigComplex {
            re: Float::with_val(p, &self.re * s),
            im: Float::with_val(p, &self.im * s),
        }
    }

    pub fn mul_real(&self, s: &Float) -> Self {
        let p = self.prec().max(s.prec());
        BigComplex {
            re: Float::with_val(p, &self.re * s),
            im: Float::with_val(p, &self.im * s),
        }
    }

    pub fn div_real(&self, s: &Float) -> Self {
        let p = self.prec().max(s.prec());
        BigComplex {
            re: Float::with_val(p, &self.re / s),
            im: Float::with_val(p, &self.im / s),
        }
    }

    /// Euclidean distance `|self - other|`.
    pub fn dist(&self, other: &Self) -> Float {
        (self - other).abs()
    }

    pub fn dist_f64(&self, other: &Self) -> f64 {
        self.dist(other).to_f64()
    }

    /// Lexicographic order on (re, im), used for canonical sorting.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.re
            .partial_cmp(&other.re)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.im.partial_cmp(&other.im).unwrap_or(Ordering::Equal))
    }

    /// Decimal rendering `re±imi` with `digits` significant digits per part.
    pub fn to_string_digits(&self, digits: usize) -> String {
        let re = fmt_float(&self.re, digits);
        let im = fmt_float(&self.im, digits);
        if im.starts_with('-') {
            format!("{re}{im}i")
        } else {
            format!("{re}+{im}i")
        }
    }

    /// Parses `a`, `bi`, `a+bi`, `a-bi` with decimal or `p/q` parts.
    pub fn parse(s: &str, prec: u32) -> Result<Self> {
        let prec = prec.max(MIN_PREC);
        let (re, im) = split_complex(s)?;
        let re = match re {
            Some(t) => parse_real(t, prec)?,
            None => Float::new(prec),
        };
        let im = match im {
            Some(t) => parse_real(t, prec)?,
            None => Float::new(prec),
        };
        Ok(BigComplex { re, im })
    }
}

/// Decimal rendering of a real with `digits` significant digits; zero is `"0"`.
pub fn fmt_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits))
}

fn parse_real(t: &str, prec: u32) -> Result<Float> {
    let t = t.trim();
    if t.contains('/') {
        let q: Rational = t
            .parse()
            .map_err(|e| Error::BadInput(format!("{t}: {e}")))?;
        return Ok(Float::with_val(prec, &q));
    }
    let parsed = Float::parse(t).map_err(|e| Error::BadInput(format!("{t}: {e}")))?;
    Ok(Float::with_val(prec, parsed))
}

/// Splits a complex literal into optional real and imaginary textual parts.
///
/// Shared with the exact Gaussian-rational parser.
fn imag_text(t: &str) -> &str {
    match t.trim() {
        "" | "+" => "1",
        "-" => "-1",
        _ => t,
    }
}

pub(crate) fn split_complex(s: &str) -> Result<(Option<&str>, Option<&str>)> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::BadInput("empty scalar".into()));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok((Some(s), None));
    };
    let body = body.trim_end();
    // find the sign separating the real and imaginary parts
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        let c = bytes[k];
        if (c == b'+' || c == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    match split {
        Some(k) => {
            let re = body[..k].trim();
            let im = &body[k..];
            let im = match im.trim() {
                "+" => "1",
                "-" => "-1",
                x => x.strip_prefix('+').unwrap_or(x),
            };
            Ok((Some(re), Some(im)))
        }
        None => Ok((None, Some(imag_text(body)))),
    }
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_digits(20))
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(30);
        write!(f, "{}", self.to_string_digits(digits))
    }
}

impl<'a> Add<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn add(self, o: &BigComplex) -> BigComplex {
        let p = self.prec().max(o.prec());
        BigComplex {
            re: Float::with_val(p, &self.re + &o.re),
            im: Float::with_val(p, &self.im + &o.im),
        }
    }
}

impl<'a> Sub<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn sub(self, o: &BigComplex) -> BigComplex {
        let p = self.prec().max(o.prec());
        BigComplex {
            re: Float::with_val(p, &self.re - &o.re),
            im: Float::with_val(p, &self.im - &o.im),
        }
    }
}

impl<'a> Mul<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn mul(self, o: &BigComplex) -> BigComplex {
        let p = self.prec().max(o.prec());
        BigComplex {
            re: Float::with_val(p, self.re.mul_sub_mul_ref(&o.re, &self.im, &o.im)),
            im: Float::with_val(p, self.re.mul_add_mul_ref(&o.im, &self.im, &o.re)),
        }
    }
}

impl<'a> Div<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn div(self, o: &BigComplex) -> BigComplex {
        let p = self.prec().max(o.prec());
        let n = o.norm_sqr();
        let re = Float::with_val(p, self.re.mul_add_mul_ref(&o.re, &self.im, &o.im)) / &n;
        let im = Float::with_val(p, self.im.mul_sub_mul_ref(&o.re, &self.re, &o.im)) / &n;
        BigComplex { re, im }
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex {
            re: Float::with_val(self.re.prec(), -&self.re),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }
}

macro_rules! by_value {
    ($tr:ident, $m:ident) => {
        impl $tr for BigComplex {
            type Output = BigComplex;
            fn $m(self, o: BigComplex) -> BigComplex {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $m(self, o: &BigComplex) -> BigComplex {
                (&self).$m(o)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);
by_value!(Div, div);

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        -&self
    }
}
