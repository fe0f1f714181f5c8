//! The field abstraction shared by the exact and multiprecision backends.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::complex::BigComplex;
use super::gauss::GaussRational;
use crate::error::Result;

/// Field operations needed by the generic polynomial and linear-algebra code.
///
/// Constructors take `&self` because multiprecision values need a precision
/// template to build constants.
pub trait Field:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_i64_like(&self, n: i64) -> Self;
    /// Exact zero test. Multiprecision values only report exact zeros.
    fn is_zero(&self) -> bool;
    fn is_exact(&self) -> bool;
    /// log2 of the magnitude, used for pivot selection; `-inf` for zero.
    fn magnitude_log2(&self) -> f64;
}

impl Field for BigComplex {
    fn zero_like(&self) -> Self {
        BigComplex::zero(self.prec())
    }
    fn one_like(&self) -> Self {
        BigComplex::one(self.prec())
    }
    fn from_i64_like(&self, n: i64) -> Self {
        BigComplex::from_i64(self.prec(), n)
    }
    fn is_zero(&self) -> bool {
        self.is_exact_zero()
    }
    fn is_exact(&self) -> bool {
        false
    }
    fn magnitude_log2(&self) -> f64 {
        self.log2_abs()
    }
}

impl Field for GaussRational {
    fn zero_like(&self) -> Self {
        GaussRational::zero()
    }
    fn one_like(&self) -> Self {
        GaussRational::one()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        GaussRational::from_i64(n)
    }
    fn is_zero(&self) -> bool {
        GaussRational::is_zero(self)
    }
    fn is_exact(&self) -> bool {
        true
    }
    fn magnitude_log2(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.to_big(64).log2_abs()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalarMode {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "mp")]
    Mp,
}

/// A coefficient that is either exact (Gaussian rational) or multiprecision.
///
/// Mixed operations promote to multiprecision at the precision of the
/// multiprecision operand.
#[derive(Clone)]
pub enum Scalar {
    Exact(GaussRational),
    Mp(BigComplex),
}

impl Scalar {
    pub fn exact_i64(n: i64) -> Self {
        Scalar::Exact(GaussRational::from_i64(n))
    }

    pub fn mode(&self) -> ScalarMode {
        match self {
            Scalar::Exact(_) => ScalarMode::Exact,
            Scalar::Mp(_) => ScalarMode::Mp,
        }
    }

    pub fn to_mp(&self, prec: u32) -> BigComplex {
        match self {
            Scalar::Exact(g) => g.to_big(prec),
            Scalar::Mp(z) => z.clone().with_prec(prec.max(z.prec())),
        }
    }

    pub fn as_exact(&self) -> Option<&GaussRational> {
        match self {
            Scalar::Exact(g) => Some(g),
            Scalar::Mp(_) => None,
        }
    }

    pub fn into_mode(self, mode: ScalarMode, prec: u32) -> Self {
        match (mode, self) {
            (ScalarMode::Mp, s) => Scalar::Mp(s.to_mp(prec)),
            (ScalarMode::Exact, s) => s,
        }
    }

    /// Parses a scalar string. In exact mode, inputs that are not exact
    /// rationals are rejected.
    pub fn parse(s: &str, mode: ScalarMode, prec: u32) -> Result<Self> {
        match mode {
            ScalarMode::Exact => GaussRational::parse(s).map(Scalar::Exact),
            ScalarMode::Mp => BigComplex::parse(s, prec).map(Scalar::Mp),
        }
    }

    /// Parses choosing exact mode when the literal is an exact rational.
    pub fn parse_auto(s: &str, prec: u32) -> Result<Self> {
        match GaussRational::parse(s) {
            Ok(g) => Ok(Scalar::Exact(g)),
            Err(_) => BigComplex::parse(s, prec).map(Scalar::Mp),
        }
    }

    pub fn render(&self, digits: usize) -> String {
        match self {
            Scalar::Exact(g) => g.to_string(),
            Scalar::Mp(z) => z.to_string_digits(digits),
        }
    }

    fn binary(
        self,
        other: Scalar,
        exact: impl FnOnce(GaussRational, GaussRational) -> GaussRational,
        mp: impl FnOnce(BigComplex, BigComplex) -> BigComplex,
    ) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(exact(a, b)),
            (Scalar::Mp(a), Scalar::Mp(b)) => Scalar::Mp(mp(a, b)),
            (Scalar::Exact(a), Scalar::Mp(b)) => {
                let a = a.to_big(b.prec());
                Scalar::Mp(mp(a, b))
            }
            (Scalar::Mp(a), Scalar::Exact(b)) => {
                let b = b.to_big(a.prec());
                Scalar::Mp(mp(a, b))
            }
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(g) => write!(f, "{g}"),
            Scalar::Mp(z) => write!(f, "{z:?}"),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(g) => write!(f, "{g}"),
            Scalar::Mp(z) => write!(f, "{z}"),
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        self.binary(o, |a, b| a + b, |a, b| a + b)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        self.binary(o, |a, b| a - b, |a, b| a - b)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        self.binary(o, |a, b| a * b, |a, b| a * b)
    }
}

impl Div for Scalar {
    type Output = Scalar;
    fn div(self, o: Scalar) -> Scalar {
        self.binary(o, |a, b| a / b, |a, b| a / b)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(-a),
            Scalar::Mp(a) => Scalar::Mp(-a),
        }
    }
}

impl Field for Scalar {
    fn zero_like(&self) -> Self {
        match self {
            Scalar::Exact(_) => Scalar::Exact(GaussRational::zero()),
            Scalar::Mp(z) => Scalar::Mp(z.zero_like()),
        }
    }
    fn one_like(&self) -> Self {
        match self {
            Scalar::Exact(_) => Scalar::Exact(GaussRational::one()),
            Scalar::Mp(z) => Scalar::Mp(z.one_like()),
        }
    }
    fn from_i64_like(&self, n: i64) -> Self {
        match self {
            Scalar::Exact(_) => Scalar::Exact(GaussRational::from_i64(n)),
            Scalar::Mp(z) => Scalar::Mp(z.from_i64_like(n)),
        }
    }
    fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(g) => g.is_zero(),
            Scalar::Mp(z) => z.is_exact_zero(),
        }
    }
    fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }
    fn magnitude_log2(&self) -> f64 {
        match self {
            Scalar::Exact(g) => g.magnitude_log2(),
            Scalar::Mp(z) => z.log2_abs(),
        }
    }
}
