//! Dense univariate polynomials over any [`Field`], lowest degree first.

use super::scalar::Field;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S> {
    coeffs: Vec<S>,
}

impl<S: Field> Poly<S> {
    /// Builds a polynomial and strips trailing exact zeros.
    pub fn new(coeffs: Vec<S>) -> Self {
        let mut p = Poly { coeffs };
        p.normalize();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: S) -> Self {
        Poly::new(vec![c])
    }

    /// `c·z^k`.
    pub fn monomial(c: S, k: usize) -> Self {
        let mut coeffs = vec![c.zero_like(); k];
        coeffs.push(c);
        Poly::new(coeffs)
    }

    pub fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn leading(&self) -> Option<&S> {
        self.coeffs.last()
    }

    /// Coefficient of `z^k`, or zero (built from `template`) past the degree.
    pub fn coeff_or_zero(&self, k: usize, template: &S) -> S {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| template.zero_like())
    }

    /// Multiplicity of `z = 0` as a root (number of leading zero coefficients).
    pub fn low_order(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_exact())
    }

    pub fn eval(&self, x: &S) -> S {
        let mut acc = x.zero_like();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.from_i64_like(k as i64) * c.clone())
            .collect();
        Poly::new(coeffs)
    }

    pub fn scale(&self, s: &S) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn neg(&self) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(match (self.coeffs.get(k), other.coeffs.get(k)) {
                (Some(a), Some(b)) => a.clone() + b.clone(),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let t = &self.coeffs[0];
        let mut out = vec![t.zero_like(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let prod = a.clone() * b.clone();
                let slot = std::mem::replace(&mut out[i + j], t.zero_like());
                out[i + j] = slot + prod;
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, n: usize, one: &S) -> Self {
        let mut acc = Poly::constant(one.one_like());
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `z^n·p(1/z)` for a formal degree `n ≥ deg p`.
    pub fn reversed(&self, formal_degree: usize) -> Self {
        assert!(self.degree().is_none_or(|d| d <= formal_degree));
        let Some(t) = self.coeffs.first() else {
            return Poly::zero();
        };
        let mut out = vec![t.zero_like(); formal_degree + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[formal_degree - k] = c.clone();
        }
        Poly::new(out)
    }

    /// `p(z + c)` by repeated synthetic division.
    pub fn taylor_shift(&self, c: &S) -> Self {
        let mut a = self.coeffs.clone();
        let n = a.len();
        for i in 0..n {
            for k in (i..n.saturating_sub(1)).rev() {
                let t = a[k + 1].clone() * c.clone();
                a[k] = a[k].clone() + t;
            }
        }
        Poly::new(a)
    }

    /// `p(s·z)`.
    pub fn scale_argument(&self, s: &S) -> Self {
        let mut pw = s.one_like();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c.clone() * pw.clone());
            pw = pw * s.clone();
        }
        Poly::new(out)
    }

    /// Euclidean division. Exact only when the coefficients are exact.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        let dd = divisor.degree().ok_or(Error::ZeroPolynomial)?;
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return Ok((Poly::zero(), Poly::zero()));
        };
        if nd < dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![lead.zero_like(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = rem[k + dd].clone() / lead.clone();
            if q.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                let t = q.clone() * dc.clone();
                rem[k + j] = rem[k + j].clone() - t;
            }
            // force the eliminated coefficient to an exact zero
            rem[k + dd] = lead.zero_like();
            quot[k] = q;
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// Monic gcd by the Euclidean algorithm. Meant for exact coefficients.
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r;
        }
        Ok(a.monic())
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => {
                let inv = l.one_like() / l.clone();
                self.scale(&inv)
            }
            None => Poly::zero(),
        }
    }

    pub fn map<T: Field>(&self, f: impl Fn(&S) -> T) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }
}
