//! Exact Gaussian rationals `p/q + (r/s) i`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::{Integer, Rational};

use super::complex::{split_complex, BigComplex};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussRational { re, im }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    pub fn i() -> Self {
        GaussRational {
            re: Rational::new(),
            im: Rational::from(1),
        }
    }

    pub fn from_i64(n: i64) -> Self {
        GaussRational {
            re: Rational::from(n),
            im: Rational::new(),
        }
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        GaussRational {
            re: Rational::from((p, q)),
            im: Rational::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRational {
            re: self.re.clone(),
            im: Rational::from(-&self.im),
        }
    }

    pub fn norm(&self) -> Rational {
        Rational::from(&self.re * &self.re) + Rational::from(&self.im * &self.im)
    }

    pub fn recip(&self) -> Self {
        let n = self.norm();
        GaussRational {
            re: Rational::from(&self.re / &n),
            im: Rational::from(-&self.im) / &n,
        }
    }

    pub fn to_big(&self, prec: u32) -> BigComplex {
        BigComplex::from_rationals(prec, &self.re, &self.im)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = GaussRational::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Least common multiple of the denominators of both parts.
    pub fn denominator_lcm(&self) -> Integer {
        self.re.denom().clone().lcm(self.im.denom())
    }

    /// Parses `p/q`, decimals like `0.25`, and complex forms such as `1/2-3i`.
    pub fn parse(s: &str) -> Result<Self> {
        let (re, im) = split_complex(s)?;
        let re = match re {
            Some(t) => parse_exact_real(t)?,
            None => Rational::new(),
        };
        let im = match im {
            Some(t) => parse_exact_real(t)?,
            None => Rational::new(),
        };
        Ok(GaussRational { re, im })
    }

    /// Rational approximation of a multiprecision value with bounded denominators,
    /// returned only when it is within `tol` of the input.
    pub fn approximate(z: &BigComplex, max_den: u64, tol: f64) -> Option<Self> {
        let re = best_rational(z.re(), max_den)?;
        let im = best_rational(z.im(), max_den)?;
        let g = GaussRational { re, im };
        let back = g.to_big(z.prec());
        if back.dist_f64(z) <= tol {
            Some(g)
        } else {
            None
        }
    }
}

/// Greatest common divisor in the Gaussian integers, up to a unit.
pub fn gaussian_gcd(a: (Integer, Integer), b: (Integer, Integer)) -> (Integer, Integer) {
    let (mut a, mut b) = (a, b);
    while !(b.0.is_zero() && b.1.is_zero()) {
        let r = gaussian_rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

fn gaussian_rem(a: &(Integer, Integer), b: &(Integer, Integer)) -> (Integer, Integer) {
    // a·conj(b) / N(b), rounded to the nearest Gaussian integer
    let n = Integer::from(&b.0 * &b.0) + Integer::from(&b.1 * &b.1);
    let re = Integer::from(&a.0 * &b.0) + Integer::from(&a.1 * &b.1);
    let im = Integer::from(&a.1 * &b.0) - Integer::from(&a.0 * &b.1);
    let q0 = Rational::from((re, n.clone())).round().into_numer_denom().0;
    let q1 = Rational::from((im, n)).round().into_numer_denom().0;
    let r0 = (&a.0 - Integer::from(&q0 * &b.0)) + Integer::from(&q1 * &b.1);
    let r1 = (&a.1 - Integer::from(&q0 * &b.1)) - Integer::from(&q1 * &b.0);
    (r0, r1)
}

fn best_rational(x: &rug::Float, max_den: u64) -> Option<Rational> {
    if x.is_zero() {
        return Some(Rational::new());
    }
    let exact = x.to_rational()?;
    // continued-fraction convergents until the denominator bound is reached
    let (mut p0, mut q0, mut p1, mut q1) = (
        Integer::from(0),
        Integer::from(1),
        Integer::from(1),
        Integer::from(0),
    );
    let mut r = exact;
    for _ in 0..64 {
        let a = r.clone().floor().into_numer_denom().0;
        let p2 = Integer::from(&a * &p1) + &p0;
        let q2 = Integer::from(&a * &q1) + &q0;
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = r - Rational::from(a);
        if frac.is_zero() {
            break;
        }
        r = frac.recip();
    }
    if q1.is_zero() {
        return None;
    }
    Some(Rational::from((p1, q1)))
}

fn parse_exact_real(t: &str) -> Result<Rational> {
    let t = t.trim();
    let bad = || Error::BadInput(format!("not an exact rational: {t}"));
    if t.contains('e') || t.contains('E') {
        let (mant, exp) = t.split_once(['e', 'E']).ok_or_else(bad)?;
        let m = parse_exact_real(mant)?;
        let e: i32 = exp.parse().map_err(|_| bad())?;
        let scale = if e >= 0 {
            Rational::from(Integer::from(Integer::u_pow_u(10, e as u32)))
        } else {
            Rational::from(Integer::from(Integer::u_pow_u(10, (-e) as u32))).recip()
        };
        return Ok(m * scale);
    }
    if let Some((int, frac)) = t.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_part: Integer = match int.trim_start_matches(['+', '-']) {
            "" => Integer::new(),
            x => x.parse().map_err(|_| bad())?,
        };
        let digits = frac.len() as u32;
        let frac_part: Integer = if frac.is_empty() {
            Integer::new()
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let den = Integer::from(Integer::u_pow_u(10, digits));
        let mut r = Rational::from(int_part) + Rational::from((frac_part, den));
        if neg {
            r = -r;
        }
        return Ok(r);
    }
    t.trim_start_matches('+')
        .parse::<Rational>()
        .map_err(|_| bad())
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            return write!(f, "{}i", self.im);
        }
        if self.im < 0 {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<'a> Add<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn add(self, o: &GaussRational) -> GaussRational {
        GaussRational {
            re: Rational::from(&self.re + &o.re),
            im: Rational::from(&self.im + &o.im),
        }
    }
}

impl<'a> Sub<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn sub(self, o: &GaussRational) -> GaussRational {
        GaussRational {
            re: Rational::from(&self.re - &o.re),
            im: Rational::from(&self.im - &o.im),
        }
    }
}

impl<'a> Mul<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn mul(self, o: &GaussRational) -> GaussRational {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRational {
                re: Rational::from(&self.re * &o.re),
                im: Rational::new(),
            };
        }
        let re = Rational::from(&self.re * &o.re) - Rational::from(&self.im * &o.im);
        let im = Rational::from(&self.re * &o.im) + Rational::from(&self.im * &o.re);
        GaussRational { re, im }
    }
}

impl<'a> Div<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn div(self, o: &GaussRational) -> GaussRational {
        assert!(!o.is_zero(), "division by exact zero");
        if o.im.is_zero() {
            return GaussRational {
                re: Rational::from(&self.re / &o.re),
                im: Rational::from(&self.im / &o.re),
            };
        }
        self * &o.recip()
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational {
            re: Rational::from(-&self.re),
            im: Rational::from(-&self.im),
        }
    }
}

macro_rules! by_value {
    ($tr:ident, $m:ident) => {
        impl $tr for GaussRational {
            type Output = GaussRational;
            fn $m(self, o: GaussRational) -> GaussRational {
                (&self).$m(&o)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);
by_value!(Div, div);

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let z = GaussRational::parse("1/2-3/4i").unwrap();
        assert_eq!(z.to_string(), "1/2-3/4i");
        assert_eq!(
            GaussRational::parse("0.25").unwrap(),
            GaussRational::from_ratio(1, 4)
        );
        assert_eq!(
            GaussRational::parse("-1.5e1").unwrap(),
            GaussRational::from_i64(-15)
        );
        assert_eq!(GaussRational::parse("i").unwrap(), GaussRational::i());
        assert_eq!(GaussRational::parse("2-i").unwrap().to_string(), "2-1i");
    }

    #[test]
    fn field_identities() {
        let a = GaussRational::parse("3/5+2i").unwrap();
        let b = GaussRational::parse("-1+1/7i").unwrap();
        assert_eq!(&(&a * &b) / &b, a);
        assert_eq!(&(&a + &b) - &b, a);
        assert_eq!(
            &GaussRational::i() * &GaussRational::i(),
            GaussRational::from_i64(-1)
        );
    }

    #[test]
    fn gaussian_gcd_finds_common_factor() {
        // (1+i)(2+i) = 1+3i and (1+i)(3) = 3+3i share 1+i
        let g = gaussian_gcd(
            (Integer::from(1), Integer::from(3)),
            (Integer::from(3), Integer::from(3)),
        );
        let norm = Integer::from(&g.0 * &g.0) + Integer::from(&g.1 * &g.1);
        assert_eq!(norm, 2);
    }

    #[test]
    fn approximation_recovers_small_fractions() {
        let z = BigComplex::parse("0.333333333333333333333333333333333333333-2.5i", 256).unwrap();
        let g = GaussRational::approximate(&z, 100, 1e-30).unwrap();
        assert_eq!(g, GaussRational::parse("1/3-5/2i").unwrap());
    }
}
