//! Rational maps of the Riemann sphere as pairs of degree-`d` forms.
//!
//! A map is stored as its affine numerator and denominator together with the
//! formal degree `d`, so `P(x, y) = Σ a_k x^k y^(d-k)` and similarly for `Q`.
//! Points at infinity are handled in the chart `w = 1/z`.

use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::algebra::roots::horner;
use crate::algebra::{
    gaussian_gcd, homogeneous_resultant, poly_roots_scalar, BigComplex, Field, GaussRational, Poly,
    Scalar, ScalarMode,
};
use crate::error::{Error, Result};

pub const DEFAULT_PREC: u32 = 256;

/// Number of decimal digits that represent `prec` bits faithfully.
pub fn digits_for(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1
}

/// A point of P^1: a finite value or infinity.
#[derive(Clone, Debug)]
pub enum SpherePoint {
    Finite(Scalar),
    Infinity,
}

impl SpherePoint {
    pub fn mp(z: BigComplex) -> Self {
        SpherePoint::Finite(Scalar::Mp(z))
    }

    pub fn exact(g: GaussRational) -> Self {
        SpherePoint::Finite(Scalar::Exact(g))
    }

    pub fn from_i64(n: i64) -> Self {
        SpherePoint::Finite(Scalar::exact_i64(n))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn to_mp(&self, prec: u32) -> Option<BigComplex> {
        match self {
            SpherePoint::Finite(s) => Some(s.to_mp(prec)),
            SpherePoint::Infinity => None,
        }
    }

    /// Homogeneous representative `[x : y]` whose larger coordinate has modulus 1.
    pub fn homogeneous(&self, prec: u32) -> (BigComplex, BigComplex) {
        match self.to_mp(prec) {
            None => (BigComplex::one(prec), BigComplex::zero(prec)),
            Some(z) => {
                if z.abs() > 1 {
                    (BigComplex::one(prec), z.recip())
                } else {
                    (z, BigComplex::one(prec))
                }
            }
        }
    }

    /// Chordal distance `|z - w| / (sqrt(1+|z|^2) sqrt(1+|w|^2))`, at most 1.
    pub fn chordal_distance(&self, other: &SpherePoint, prec: u32) -> f64 {
        let (x1, y1) = self.homogeneous(prec);
        let (x2, y2) = other.homogeneous(prec);
        let cross = &(&x1 * &y2) - &(&x2 * &y1);
        let n1 = (x1.norm_sqr() + y1.norm_sqr()).sqrt();
        let n2 = (x2.norm_sqr() + y2.norm_sqr()).sqrt();
        let d = cross.abs() / n1 / n2;
        d.to_f64()
    }

    pub fn render(&self, digits: usize) -> String {
        match self {
            SpherePoint::Finite(s) => s.render(digits),
            SpherePoint::Infinity => "inf".to_string(),
        }
    }

    pub fn parse(s: &str, mode: ScalarMode, prec: u32) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(SpherePoint::Infinity),
            t => Scalar::parse(t, mode, prec).map(SpherePoint::Finite),
        }
    }
}

/// A critical point with its multiplicity as a zero of the Wronskian.
#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub point: SpherePoint,
    pub multiplicity: usize,
}

/// A rational map `z ↦ P(z)/Q(z)` of degree `d ≥ 1` with no common
/// projective zero of the homogenized `P` and `Q`.
#[derive(Clone, Debug)]
pub struct RationalMap {
    num: Poly<Scalar>,
    den: Poly<Scalar>,
    degree: usize,
    mode: ScalarMode,
    prec: u32,
}

impl RationalMap {
    /// Builds a map from affine coefficients (lowest degree first), cancelling
    /// common factors of numerator and denominator. In multiprecision mode
    /// only common factors `z^k` are detected, since they are exact zeros.
    pub fn from_affine(
        num: Vec<Scalar>,
        den: Vec<Scalar>,
        mode: ScalarMode,
        prec: u32,
    ) -> Result<Self> {
        Self::build(num, den, mode, prec, true)
    }

    /// Like [`RationalMap::from_affine`] but rejects inputs with a common factor.
    pub fn from_affine_strict(
        num: Vec<Scalar>,
        den: Vec<Scalar>,
        mode: ScalarMode,
        prec: u32,
    ) -> Result<Self> {
        Self::build(num, den, mode, prec, false)
    }

    /// Parses coefficient strings; convenient for literals such as `["-1", "0", "1"]`.
    pub fn from_strs(num: &[&str], den: &[&str], mode: ScalarMode, prec: u32) -> Result<Self> {
        let parse = |v: &[&str]| {
            v.iter()
                .map(|s| Scalar::parse(s, mode, prec))
                .collect::<Result<Vec<_>>>()
        };
        Self::from_affine(parse(num)?, parse(den)?, mode, prec)
    }

    fn build(
        num: Vec<Scalar>,
        den: Vec<Scalar>,
        mode: ScalarMode,
        prec: u32,
        clear: bool,
    ) -> Result<Self> {
        if num.is_empty() || den.is_empty() {
            return Err(Error::EmptyInput);
        }
        let prec = prec.max(crate::algebra::complex::MIN_PREC);
        let mode = if num.iter().chain(den.iter()).all(|c| c.is_exact()) {
            mode
        } else {
            ScalarMode::Mp
        };
        let conv =
            |v: Vec<Scalar>| Poly::new(v.into_iter().map(|c| c.into_mode(mode, prec)).collect());
        let (mut num, mut den) = (conv(num), conv(den));
        if den.is_zero() {
            return Err(Error::DegenerateMap("zero denominator".into()));
        }
        if num.is_zero() {
            return Err(Error::DegenerateMap("constant map".into()));
        }
        if clear {
            (num, den) = cancel_common(num, den)?;
        }
        let degree = num.degree().unwrap().max(den.degree().unwrap());
        if degree == 0 {
            return Err(Error::DegenerateMap("constant map".into()));
        }
        let map = RationalMap {
            num,
            den,
            degree,
            mode,
            prec,
        };
        map.check_resultant()?;
        Ok(map.normalized())
    }

    /// Assembles a map from forms already known to be coprime.
    fn from_parts(
        num: Poly<Scalar>,
        den: Poly<Scalar>,
        degree: usize,
        mode: ScalarMode,
        prec: u32,
    ) -> Self {
        RationalMap {
            num,
            den,
            degree,
            mode,
            prec,
        }
        .normalized()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn mode(&self) -> ScalarMode {
        self.mode
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn num(&self) -> &Poly<Scalar> {
        &self.num
    }

    pub fn den(&self) -> &Poly<Scalar> {
        &self.den
    }

    pub fn is_exact(&self) -> bool {
        self.mode == ScalarMode::Exact
    }

    /// Coefficient of `x^k y^(d-k)` in the numerator form.
    pub fn num_coeff(&self, k: usize) -> Scalar {
        self.num.coeff_or_zero(k, &self.template())
    }

    pub fn den_coeff(&self, k: usize) -> Scalar {
        self.den.coeff_or_zero(k, &self.template())
    }

    fn template(&self) -> Scalar {
        match self.mode {
            ScalarMode::Exact => Scalar::exact_i64(0),
            ScalarMode::Mp => Scalar::Mp(BigComplex::zero(self.prec)),
        }
    }

    /// The same map with multiprecision coefficients at `prec` bits.
    pub fn to_mp(&self, prec: u32) -> RationalMap {
        let conv = |p: &Poly<Scalar>| p.map(|c| Scalar::Mp(c.to_mp(prec)));
        RationalMap::from_parts(
            conv(&self.num),
            conv(&self.den),
            self.degree,
            ScalarMode::Mp,
            prec,
        )
    }

    /// Homogeneous resultant of `(P, Q)`.
    pub fn resultant(&self) -> Result<Scalar> {
        homogeneous_resultant(&self.num, &self.den, self.degree, &self.template())
    }

    fn check_resultant(&self) -> Result<()> {
        let res = match self.mode {
            ScalarMode::Exact => self.resultant()?,
            ScalarMode::Mp => {
                // scale to unit max coefficient so the threshold is meaningful
                let max = self
                    .num
                    .coeffs()
                    .iter()
                    .chain(self.den.coeffs())
                    .map(|c| c.magnitude_log2())
                    .fold(f64::NEG_INFINITY, f64::max);
                let s = Scalar::Mp(BigComplex::from_f64(self.prec, (-max).exp2(), 0.0));
                let num = self.num.scale(&s);
                let den = self.den.scale(&s);
                homogeneous_resultant(&num, &den, self.degree, &self.template())?
            }
        };
        let threshold = -(self.prec as f64) / 2.0;
        let degenerate = match &res {
            Scalar::Exact(g) => g.is_zero(),
            Scalar::Mp(z) => z.log2_abs() < threshold,
        };
        if degenerate {
            return Err(Error::DegenerateMap(
                "numerator and denominator share a root".into(),
            ));
        }
        Ok(())
    }

    fn normalized(mut self) -> Self {
        match self.mode {
            ScalarMode::Mp => {
                let lead = self.num.leading().or(self.den.leading()).cloned().unwrap();
                let inv = lead.one_like() / lead;
                self.num = self.num.scale(&inv);
                self.den = self.den.scale(&inv);
            }
            ScalarMode::Exact => {
                let (num, den) = clear_content(&self.num, &self.den);
                self.num = num;
                self.den = den;
            }
        }
        self
    }

    /// Evaluates the map; exact when both the map and the point are exact.
    pub fn evaluate(&self, p: &SpherePoint) -> SpherePoint {
        match p {
            SpherePoint::Finite(z) => {
                let z = z.clone();
                let den = self.den.eval(&z);
                if den.is_zero() {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.num.eval(&z) / den)
                }
            }
            SpherePoint::Infinity => {
                let b = self.den_coeff(self.degree);
                if b.is_zero() {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.num_coeff(self.degree) / b)
                }
            }
        }
    }

    /// Derivative in the affine chart when `p` and `f(p)` are finite, and in
    /// the chart `w = 1/z` at whichever of them is infinite. Along a cycle the
    /// product of these chart derivatives is the multiplier.
    pub fn derivative_at(&self, p: &SpherePoint) -> BigComplex {
        let prec = self.prec;
        let image = self.evaluate(p);
        let d = self.degree;
        let value = match (p, &image) {
            (SpherePoint::Finite(z), SpherePoint::Finite(_)) => {
                let (pv, qv) = (self.num.eval(z), self.den.eval(z));
                let (dp, dq) = (self.num.derivative().eval(z), self.den.derivative().eval(z));
                (dp * qv.clone() - pv * dq) / (qv.clone() * qv)
            }
            (SpherePoint::Finite(z), SpherePoint::Infinity) => {
                // d(Q/P) with Q(z) = 0
                self.den.derivative().eval(z) / self.num.eval(z)
            }
            (SpherePoint::Infinity, SpherePoint::Finite(_)) => {
                let (a0, a1) = (self.num_coeff(d), self.num_coeff(d - 1));
                let (b0, b1) = (self.den_coeff(d), self.den_coeff(d - 1));
                (a1 * b0.clone() - a0 * b1) / (b0.clone() * b0)
            }
            (SpherePoint::Infinity, SpherePoint::Infinity) => {
                self.den_coeff(d - 1) / self.num_coeff(d)
            }
        };
        value.to_mp(prec)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &RationalMap) -> RationalMap {
        let (f, g) = unify(self, other);
        let prec = f.prec.max(g.prec);
        let one = f.template().one_like();
        let d = f.degree;
        let mut pow1 = vec![Poly::constant(one.clone())];
        let mut pow2 = vec![Poly::constant(one.clone())];
        for k in 1..=d {
            pow1.push(pow1[k - 1].mul(&g.num));
            pow2.push(pow2[k - 1].mul(&g.den));
        }
        let mut num = Poly::zero();
        let mut den = Poly::zero();
        for k in 0..=d {
            let a = f.num_coeff(k);
            let b = f.den_coeff(k);
            if a.is_zero() && b.is_zero() {
                continue;
            }
            let term = pow1[k].mul(&pow2[d - k]);
            if !a.is_zero() {
                num = num.add(&term.scale(&a));
            }
            if !b.is_zero() {
                den = den.add(&term.scale(&b));
            }
        }
        // The resultant of a composition is a product of powers of the
        // factors' resultants, so it stays nonzero and is not recomputed.
        RationalMap::from_parts(num, den, d * g.degree, f.mode, prec)
    }

    /// `f^n` by repeated squaring of composition.
    pub fn iterate(&self, n: usize) -> Result<RationalMap> {
        if n == 0 {
            return Err(Error::BadParameter("iterate needs n >= 1".into()));
        }
        let mut acc: Option<RationalMap> = None;
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.compose(&base),
                });
            }
            k >>= 1;
            if k > 0 {
                base = base.compose(&base);
            }
        }
        Ok(acc.unwrap())
    }

    /// `M⁻¹ ∘ f ∘ M`, with the resultant checked again.
    pub fn conjugate(&self, m: &Mobius) -> Result<RationalMap> {
        let prec = self.prec;
        let h = m
            .inverse()
            .to_map(prec)?
            .compose(self)
            .compose(&m.to_map(prec)?);
        h.check_resultant()?;
        Ok(h)
    }

    /// Zeros of the Wronskian `P'Q - PQ'`, with infinity carrying the degree deficit.
    pub fn critical_points(&self, prec: u32) -> Result<Vec<CriticalPoint>> {
        let w = self
            .num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()));
        let total = 2 * self.degree - 2;
        let finite_deg = w.degree().unwrap_or(0);
        let mut out = Vec::new();
        if finite_deg >= 1 {
            for c in poly_roots_scalar(&w, prec)? {
                out.push(CriticalPoint {
                    point: SpherePoint::mp(c.center),
                    multiplicity: c.multiplicity,
                });
            }
        }
        if total > finite_deg {
            out.push(CriticalPoint {
                point: SpherePoint::Infinity,
                multiplicity: total - finite_deg,
            });
        }
        Ok(out)
    }

    /// All preimages of `target` with multiplicity, infinity included.
    pub fn preimages(&self, target: &SpherePoint, prec: u32) -> Result<Vec<(SpherePoint, usize)>> {
        let r = match target {
            SpherePoint::Finite(w) => self.num.sub(&self.den.scale(w)),
            SpherePoint::Infinity => self.den.clone(),
        };
        let deg = r.degree().ok_or(Error::ZeroPolynomial)?;
        let mut out = Vec::new();
        if deg >= 1 {
            for c in poly_roots_scalar(&r, prec)? {
                out.push((SpherePoint::mp(c.center), c.multiplicity));
            }
        }
        if deg < self.degree {
            out.push((SpherePoint::Infinity, self.degree - deg));
        }
        Ok(out)
    }

    /// Max coefficient distance to `other` after multiprecision normalization,
    /// or `None` if the degrees differ.
    pub fn coefficient_distance(&self, other: &RationalMap) -> Option<f64> {
        if self.degree != other.degree {
            return None;
        }
        let prec = self.prec.max(other.prec);
        let a = self.to_mp(prec);
        let b = other.to_mp(prec);
        let mut worst: f64 = 0.0;
        for k in 0..=self.degree {
            worst = worst.max(
                a.num_coeff(k)
                    .to_mp(prec)
                    .dist_f64(&b.num_coeff(k).to_mp(prec)),
            );
            worst = worst.max(
                a.den_coeff(k)
                    .to_mp(prec)
                    .dist_f64(&b.den_coeff(k).to_mp(prec)),
            );
        }
        Some(worst)
    }

    /// Multiprecision evaluation tables for tight numerical loops.
    pub fn numeric(&self, prec: u32) -> NumericMap {
        NumericMap::new(self, prec)
    }

    pub fn to_json(&self) -> MapJson {
        let digits = digits_for(self.prec);
        let render = |p: &Poly<Scalar>| {
            if p.is_zero() {
                vec!["0".to_string()]
            } else {
                p.coeffs().iter().map(|c| c.render(digits)).collect()
            }
        };
        MapJson {
            mode: Some(self.mode),
            prec_bits: Some(self.prec),
            num: render(&self.num),
            den: render(&self.den),
        }
    }

    pub fn from_json(j: &MapJson) -> Result<RationalMap> {
        let prec = j.prec_bits.unwrap_or(DEFAULT_PREC);
        let mode = match j.mode {
            Some(m) => m,
            None if j
                .num
                .iter()
                .chain(&j.den)
                .all(|s| GaussRational::parse(s).is_ok()) =>
            {
                ScalarMode::Exact
            }
            None => ScalarMode::Mp,
        };
        let num: Vec<&str> = j.num.iter().map(String::as_str).collect();
        let den: Vec<&str> = j.den.iter().map(String::as_str).collect();
        RationalMap::from_strs(&num, &den, mode, prec)
    }

    /// Human-readable `P(z) / Q(z)`.
    pub fn describe(&self) -> String {
        let digits = 12;
        let show = |p: &Poly<Scalar>| -> String {
            let mut terms = Vec::new();
            for (k, c) in p.coeffs().iter().enumerate().rev() {
                if c.is_zero() {
                    continue;
                }
                let coef = c.render(digits);
                terms.push(match k {
                    0 => format!("({coef})"),
                    1 => format!("({coef})z"),
                    _ => format!("({coef})z^{k}"),
                });
            }
            if terms.is_empty() {
                "0".into()
            } else {
                terms.join(" + ")
            }
        };
        format!("[{}] / [{}]", show(&self.num), show(&self.den))
    }
}

/// Brings two maps to a common scalar mode and precision.
fn unify(f: &RationalMap, g: &RationalMap) -> (RationalMap, RationalMap) {
    if f.mode == g.mode && f.prec == g.prec {
        return (f.clone(), g.clone());
    }
    let prec = f.prec.max(g.prec);
    if f.is_exact() && g.is_exact() {
        let mut f = f.clone();
        let mut g = g.clone();
        f.prec = prec;
        g.prec = prec;
        return (f, g);
    }
    (f.to_mp(prec), g.to_mp(prec))
}

fn cancel_common(num: Poly<Scalar>, den: Poly<Scalar>) -> Result<(Poly<Scalar>, Poly<Scalar>)> {
    let exact = |p: &Poly<Scalar>| p.map(|c| c.as_exact().cloned().unwrap_or_default());
    if num.is_exact() && den.is_exact() {
        let (n, d) = (exact(&num), exact(&den));
        let g = n.gcd(&d)?;
        if g.degree().unwrap_or(0) == 0 {
            return Ok((num, den));
        }
        let back = |p: Poly<GaussRational>| p.map(|c| Scalar::Exact(c.clone()));
        return Ok((back(n.div_rem(&g)?.0), back(d.div_rem(&g)?.0)));
    }
    let k = num.low_order().min(den.low_order());
    if k == 0 {
        return Ok((num, den));
    }
    let shift = |p: Poly<Scalar>| Poly::new(p.into_coeffs().split_off(k));
    Ok((shift(num), shift(den)))
}

/// Scales exact forms to coprime Gaussian-integer coefficients with the
/// leading coefficient (of `P`, else `Q`) in the first quadrant.
fn clear_content(num: &Poly<Scalar>, den: &Poly<Scalar>) -> (Poly<Scalar>, Poly<Scalar>) {
    let all: Vec<GaussRational> = num
        .coeffs()
        .iter()
        .chain(den.coeffs())
        .map(|c| c.as_exact().cloned().unwrap_or_default())
        .collect();
    let mut lcm = Integer::from(1);
    for c in &all {
        lcm = lcm.lcm(&c.denominator_lcm());
    }
    let lcm_g = GaussRational::new(lcm.into(), Default::default());
    let mut g = (Integer::new(), Integer::new());
    for c in &all {
        let s = &c.clone() * &lcm_g;
        let gi = (s.re.numer().clone(), s.im.numer().clone());
        g = gaussian_gcd(g, gi);
    }
    let g_rat = GaussRational::new(g.0.into(), g.1.into());
    let mut factor = &lcm_g / &g_rat;
    let lead = num
        .leading()
        .or(den.leading())
        .and_then(|c| c.as_exact())
        .cloned()
        .unwrap();
    let minus_i = -GaussRational::i();
    for _ in 0..4 {
        let l = &lead * &factor;
        if l.re > 0 && l.im >= 0 {
            break;
        }
        factor = &factor * &minus_i;
    }
    let f = Scalar::Exact(factor);
    (num.scale(&f), den.scale(&f))
}

/// A Möbius transformation `z ↦ (a z + b) / (c z + d)`.
#[derive(Clone, Debug)]
pub struct Mobius {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    pub d: Scalar,
}

impl Mobius {
    /// Requires `ad - bc ≠ 0`; multiprecision entries are scaled to determinant 1.
    pub fn new(a: Scalar, b: Scalar, c: Scalar, d: Scalar) -> Result<Self> {
        let det = a.clone() * d.clone() - b.clone() * c.clone();
        let singular = match &det {
            Scalar::Exact(g) => g.is_zero(),
            Scalar::Mp(z) => z.log2_abs() < -(z.prec() as f64) / 2.0,
        };
        if singular {
            return Err(Error::DegenerateMap(
                "singular Möbius transformation".into(),
            ));
        }
        let m = Mobius { a, b, c, d };
        Ok(match det {
            Scalar::Mp(z) => {
                let s = Scalar::Mp(z.sqrt().recip());
                Mobius {
                    a: m.a * s.clone(),
                    b: m.b * s.clone(),
                    c: m.c * s.clone(),
                    d: m.d * s,
                }
            }
            Scalar::Exact(_) => m,
        })
    }

    pub fn identity() -> Self {
        let (o, z) = (Scalar::exact_i64(1), Scalar::exact_i64(0));
        Mobius {
            a: o.clone(),
            b: z.clone(),
            c: z,
            d: o,
        }
    }

    /// `z ↦ z + t`.
    pub fn translation(t: Scalar) -> Self {
        Mobius {
            a: t.one_like(),
            b: t.clone(),
            c: t.zero_like(),
            d: t.one_like(),
        }
    }

    /// `z ↦ 1/z`.
    pub fn inversion() -> Self {
        let (o, z) = (Scalar::exact_i64(1), Scalar::exact_i64(0));
        Mobius {
            a: z.clone(),
            b: o.clone(),
            c: o,
            d: z,
        }
    }

    pub fn determinant(&self) -> Scalar {
        self.a.clone() * self.d.clone() - self.b.clone() * self.c.clone()
    }

    pub fn inverse(&self) -> Mobius {
        Mobius {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
    }

    pub fn to_map(&self, prec: u32) -> Result<RationalMap> {
        let mode = if [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .all(|s| s.is_exact())
        {
            ScalarMode::Exact
        } else {
            ScalarMode::Mp
        };
        RationalMap::from_affine_strict(
            vec![self.b.clone(), self.a.clone()],
            vec![self.d.clone(), self.c.clone()],
            mode,
            prec,
        )
    }

    pub fn apply(&self, p: &SpherePoint) -> SpherePoint {
        match p {
            SpherePoint::Infinity => {
                if self.c.is_zero() {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.a.clone() / self.c.clone())
                }
            }
            SpherePoint::Finite(z) => {
                let den = self.c.clone() * z.clone() + self.d.clone();
                if den.is_zero() {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite((self.a.clone() * z.clone() + self.b.clone()) / den)
                }
            }
        }
    }
}

/// Serialized form `{"mode", "prec_bits", "num", "den"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ScalarMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prec_bits: Option<u32>,
    pub num: Vec<String>,
    pub den: Vec<String>,
}

/// Multiprecision coefficient tables of a map and its derivative.
#[derive(Clone, Debug)]
pub struct NumericMap {
    prec: u32,
    degree: usize,
    p: Vec<BigComplex>,
    q: Vec<BigComplex>,
    dp: Vec<BigComplex>,
    dq: Vec<BigComplex>,
}

impl NumericMap {
    fn new(f: &RationalMap, prec: u32) -> Self {
        let table = |p: &Poly<Scalar>| -> Vec<BigComplex> {
            p.coeffs().iter().map(|c| c.to_mp(prec)).collect()
        };
        let deriv = |v: &[BigComplex]| -> Vec<BigComplex> {
            v.iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.mul_i64(k as i64))
                .collect()
        };
        let p = table(&f.num);
        let q = table(&f.den);
        let dp = deriv(&p);
        let dq = deriv(&q);
        NumericMap {
            prec,
            degree: f.degree,
            p,
            q,
            dp,
            dq,
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn eval_poly(c: &[BigComplex], z: &BigComplex) -> BigComplex {
        if c.is_empty() {
            BigComplex::zero(z.prec())
        } else {
            horner(c, z)
        }
    }

    /// `f(z)`, or `None` at a pole.
    pub fn eval(&self, z: &BigComplex) -> Option<BigComplex> {
        let q = Self::eval_poly(&self.q, z);
        if q.is_exact_zero() {
            return None;
        }
        Some(&Self::eval_poly(&self.p, z) / &q)
    }

    /// `(f(z), f'(z))`, or `None` at a pole.
    pub fn eval_with_derivative(&self, z: &BigComplex) -> Option<(BigComplex, BigComplex)> {
        let q = Self::eval_poly(&self.q, z);
        if q.is_exact_zero() {
            return None;
        }
        let p = Self::eval_poly(&self.p, z);
        let dp = Self::eval_poly(&self.dp, z);
        let dq = Self::eval_poly(&self.dq, z);
        let value = &p / &q;
        let deriv = &(&(&dp * &q) - &(&p * &dq)) / &(&q * &q);
        Some((value, deriv))
    }

    pub fn numerator(&self) -> &[BigComplex] {
        &self.p
    }

    pub fn denominator(&self) -> &[BigComplex] {
        &self.q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn exact(num: &[&str], den: &[&str]) -> RationalMap {
        RationalMap::from_strs(num, den, ScalarMode::Exact, P).unwrap()
    }

    fn pt(s: &str) -> SpherePoint {
        SpherePoint::parse(s, ScalarMode::Exact, P).unwrap()
    }

    fn assert_point(p: &SpherePoint, expect: &str) {
        assert_eq!(p.render(10), expect);
    }

    #[test]
    fn construction_and_gcd_clearing() {
        let f = exact(&["0", "0", "1"], &["1"]);
        assert_eq!(f.degree(), 2);
        let g = exact(&["0", "1"], &["0", "0", "1"]);
        assert_eq!(g.degree(), 1);
        assert_point(&g.evaluate(&pt("2")), "1/2");
        let strict = RationalMap::from_affine_strict(
            vec![Scalar::exact_i64(0), Scalar::exact_i64(1)],
            vec![
                Scalar::exact_i64(0),
                Scalar::exact_i64(0),
                Scalar::exact_i64(1),
            ],
            ScalarMode::Exact,
            P,
        );
        assert!(matches!(strict, Err(Error::DegenerateMap(_))));
        // (z^2 - 1)/(z - 1) = z + 1
        let h = exact(&["-1", "0", "1"], &["-1", "1"]);
        assert_eq!(h.degree(), 1);
        assert!(matches!(
            RationalMap::from_strs(&[], &["1"], ScalarMode::Exact, P),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn exact_normalization_is_canonical() {
        let a = exact(&["1/2", "0", "1/2"], &["1/3"]);
        let b = exact(&["-3", "0", "-3"], &["-2"]);
        assert_eq!(a.to_json(), b.to_json());
        let c = exact(&["1+i", "0", "2i"], &["1-i"]);
        let d = exact(&["1-i", "0", "2"], &["-1-i"]);
        assert_eq!(c.to_json(), d.to_json());
    }

    #[test]
    fn evaluation() {
        let sq = exact(&["0", "0", "1"], &["1"]);
        assert!(sq.evaluate(&SpherePoint::Infinity).is_infinity());
        let basilica = exact(&["-1", "0", "1"], &["1"]);
        let a = basilica.evaluate(&pt("0"));
        assert_point(&a, "-1");
        assert_point(&basilica.evaluate(&a), "0");
        let pole = exact(&["1", "0", "1"], &["-1", "0", "1"]);
        assert!(pole.evaluate(&pt("1")).is_infinity());
        assert_point(&pole.evaluate(&SpherePoint::Infinity), "1");
    }

    #[test]
    fn derivatives_in_charts() {
        let sq = exact(&["0", "0", "1"], &["1"]);
        assert!(
            sq.derivative_at(&pt("1"))
                .dist_f64(&BigComplex::from_i64(P, 2))
                < 1e-70
        );
        assert!(sq.derivative_at(&SpherePoint::Infinity).is_exact_zero());
        let basilica = exact(&["-1", "0", "1"], &["1"]);
        let chain = &basilica.derivative_at(&pt("0")) * &basilica.derivative_at(&pt("-1"));
        assert!(chain.is_exact_zero());
        // 2z has multiplier 1/2 at infinity
        let lin = exact(&["0", "2"], &["1"]);
        assert!(
            lin.derivative_at(&SpherePoint::Infinity)
                .dist_f64(&BigComplex::from_f64(P, 0.5, 0.0))
                < 1e-70
        );
        // 1/z^2 swaps 0 and infinity; the 2-cycle multiplier is 4 in either chart order
        let inv = exact(&["1"], &["0", "0", "1"]);
        let m = &inv.derivative_at(&pt("0")) * &inv.derivative_at(&SpherePoint::Infinity);
        assert!(m.is_exact_zero());
        let m1 = &inv.derivative_at(&pt("1")) * &BigComplex::one(P);
        assert!(m1.dist_f64(&BigComplex::from_i64(P, -2)) < 1e-70);
    }

    #[test]
    fn composition_iteration_conjugation() {
        let sq = exact(&["0", "0", "1"], &["1"]);
        let f8 = sq.iterate(3).unwrap();
        assert_eq!(f8.degree(), 8);
        assert_eq!(
            f8.to_json(),
            exact(&["0", "0", "0", "0", "0", "0", "0", "0", "1"], &["1"]).to_json()
        );
        let inv = sq.conjugate(&Mobius::inversion()).unwrap();
        assert_eq!(inv.to_json(), sq.to_json());
        let basilica = exact(&["-1", "0", "1"], &["1"]);
        let shifted = basilica
            .conjugate(&Mobius::translation(Scalar::exact_i64(1)))
            .unwrap();
        assert_eq!(
            shifted.to_json(),
            exact(&["-1", "2", "1"], &["1"]).to_json()
        );
    }

    #[test]
    fn mixed_modes_and_round_trip_through_conjugation() {
        let f = RationalMap::from_strs(
            &["0.3+0.1i", "1", "-0.7i"],
            &["1", "0.2"],
            ScalarMode::Mp,
            P,
        )
        .unwrap();
        let m = Mobius::new(
            Scalar::parse("1.5", ScalarMode::Mp, P).unwrap(),
            Scalar::parse("0.2-0.4i", ScalarMode::Mp, P).unwrap(),
            Scalar::parse("-0.3", ScalarMode::Mp, P).unwrap(),
            Scalar::parse("0.9+0.1i", ScalarMode::Mp, P).unwrap(),
        )
        .unwrap();
        assert!(m.determinant().to_mp(P).dist_f64(&BigComplex::one(P)) < 1e-70);
        let back = f.conjugate(&m).unwrap().conjugate(&m.inverse()).unwrap();
        assert!(back.coefficient_distance(&f).unwrap() < 2f64.powi(-128));
    }

    #[test]
    fn critical_points_count() {
        let sq = exact(&["0", "0", "1"], &["1"]);
        let cps = sq.critical_points(P).unwrap();
        assert_eq!(cps.len(), 2);
        assert!(cps[0].point.to_mp(P).unwrap().is_exact_zero());
        assert!(cps[1].point.is_infinity());
        let lattes = exact(&["4", "0", "-4", "0", "1"], &["0", "-8", "12", "-4"]);
        let total: usize = lattes
            .critical_points(P)
            .unwrap()
            .iter()
            .map(|c| c.multiplicity)
            .sum();
        assert_eq!(total, 6);
    }

    #[test]
    fn preimages_include_infinity() {
        let sq = exact(&["0", "0", "1"], &["1"]);
        let pre = sq.preimages(&SpherePoint::Infinity, P).unwrap();
        assert_eq!(pre.len(), 1);
        assert_eq!(pre[0].1, 2);
        let pre = sq.preimages(&pt("1"), P).unwrap();
        assert_eq!(pre.len(), 2);
    }

    #[test]
    fn json_round_trip() {
        let f = exact(&["-1", "0", "1"], &["1"]);
        let j = serde_json::to_string(&f.to_json()).unwrap();
        let back: MapJson = serde_json::from_str(&j).unwrap();
        assert_eq!(
            RationalMap::from_json(&back).unwrap().to_json(),
            f.to_json()
        );
        let g: MapJson = serde_json::from_str(r#"{"num":["0","0","1"],"den":["1"]}"#).unwrap();
        assert!(RationalMap::from_json(&g).unwrap().is_exact());
    }
}
