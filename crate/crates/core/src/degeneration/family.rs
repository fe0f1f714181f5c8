//! One-parameter families `f_t` over `ℚ(i)(t)` and their reduction at `t = 0`.

use serde::{Deserialize, Serialize};

use super::tparam::TParam;
use crate::algebra::{homogeneous_resultant, poly_roots, GaussRational, Poly, Scalar, ScalarMode};
use crate::error::{Error, Result};
use crate::ratmap::{MapJson, RationalMap, SpherePoint, DEFAULT_PREC};

type G = GaussRational;

/// Largest iterate degree `d^q` composed symbolically.
pub const DEFAULT_COMPOSE_BUDGET: usize = 64;

/// `z ↦ num(z)/den(z)` with coefficients in `ℚ(i)(t)`, read as the pair of
/// homogeneous forms `y^d num(x/y)`, `y^d den(x/y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMap {
    num: Poly<TParam>,
    den: Poly<TParam>,
    degree: usize,
}

/// Coefficient strings in `t`, lowest power of `z` first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyJson {
    pub num: Vec<String>,
    pub den: Vec<String>,
}

fn coeff(p: &Poly<TParam>, k: usize) -> TParam {
    p.coeffs().get(k).cloned().unwrap_or_default()
}

impl FamilyMap {
    /// Builds a family from affine coefficients, cancelling common factors
    /// over `ℚ(i)(t)`. Rejects families whose resultant vanishes identically.
    pub fn from_affine(num: Vec<TParam>, den: Vec<TParam>) -> Result<Self> {
        let (num, den) = (Poly::new(num), Poly::new(den));
        if num.is_zero() && den.is_zero() {
            return Err(Error::ZeroFamily);
        }
        if den.is_zero() {
            return Err(Error::DegenerateMap("zero denominator".into()));
        }
        if num.is_zero() {
            return Err(Error::DegenerateMap("constant family".into()));
        }
        let g = num.gcd(&den)?;
        let (num, _) = num.div_rem(&g)?;
        let (den, _) = den.div_rem(&g)?;
        let degree = num.degree().unwrap().max(den.degree().unwrap());
        if degree == 0 {
            return Err(Error::DegenerateMap("constant family".into()));
        }
        let f = FamilyMap { num, den, degree };
        if f.generic_resultant()?.is_zero() {
            return Err(Error::DegenerateMap(
                "resultant vanishes identically".into(),
            ));
        }
        Ok(f)
    }

    pub fn from_strs(num: &[&str], den: &[&str]) -> Result<Self> {
        let parse = |v: &[&str]| {
            v.iter()
                .map(|s| TParam::parse(s))
                .collect::<Result<Vec<_>>>()
        };
        FamilyMap::from_affine(parse(num)?, parse(den)?)
    }

    pub fn from_json(j: &FamilyJson) -> Result<Self> {
        if j.num.is_empty() || j.den.is_empty() {
            return Err(Error::EmptyInput);
        }
        let num: Vec<&str> = j.num.iter().map(String::as_str).collect();
        let den: Vec<&str> = j.den.iter().map(String::as_str).collect();
        FamilyMap::from_strs(&num, &den)
    }

    pub fn to_json(&self) -> FamilyJson {
        let render = |p: &Poly<TParam>| {
            if p.is_zero() {
                vec!["0".to_string()]
            } else {
                p.coeffs().iter().map(|c| c.to_string()).collect()
            }
        };
        FamilyJson {
            num: render(&self.num),
            den: render(&self.den),
        }
    }

    /// A constant family.
    pub fn from_map(f: &RationalMap) -> Result<Self> {
        let conv = |p: &Poly<Scalar>| -> Result<Vec<TParam>> {
            p.coeffs()
                .iter()
                .map(|c| {
                    c.as_exact()
                        .cloned()
                        .map(TParam::constant)
                        .ok_or_else(|| Error::BadInput("families need exact coefficients".into()))
                })
                .collect()
        };
        FamilyMap::from_affine(conv(f.num())?, conv(f.den())?)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num(&self) -> &Poly<TParam> {
        &self.num
    }

    pub fn den(&self) -> &Poly<TParam> {
        &self.den
    }

    /// Homogeneous resultant of the pair of forms.
    pub fn generic_resultant(&self) -> Result<TParam> {
        homogeneous_resultant(&self.num, &self.den, self.degree, &TParam::one())
    }

    /// `self ∘ other`, by substituting the forms of `other`.
    pub fn compose(&self, other: &FamilyMap) -> FamilyMap {
        let d = self.degree;
        let (g1, g2) = (&other.num, &other.den);
        let one = TParam::one();
        let p1: Vec<Poly<TParam>> = (0..=d).map(|k| g1.pow(k, &one)).collect();
        let p2: Vec<Poly<TParam>> = (0..=d).map(|k| g2.pow(k, &one)).collect();
        let subst = |p: &Poly<TParam>| -> Poly<TParam> {
            let mut acc = Poly::zero();
            for k in 0..=d {
                let a = coeff(p, k);
                if a.is_zero() {
                    continue;
                }
                acc = acc.add(&p1[k].mul(&p2[d - k]).scale(&a));
            }
            acc
        };
        FamilyMap {
            num: subst(&self.num),
            den: subst(&self.den),
            degree: d * other.degree,
        }
    }

    /// `f^q`, refusing when `d^q` exceeds `budget`.
    pub fn iterate(&self, q: usize, budget: usize) -> Result<FamilyMap> {
        if q == 0 {
            return Err(Error::BadParameter(
                "iterate count must be at least 1".into(),
            ));
        }
        let needed = (self.degree as u128).saturating_pow(q as u32);
        if needed > budget as u128 {
            return Err(Error::BudgetExceeded {
                needed: needed.min(usize::MAX as u128) as usize,
                cap: budget,
            });
        }
        let mut acc = self.clone();
        for _ in 1..q {
            acc = self.compose(&acc);
        }
        Ok(acc)
    }

    fn map_coeffs(&self, f: impl Fn(&TParam) -> TParam) -> FamilyMap {
        FamilyMap {
            num: self.num.map(&f),
            den: self.den.map(&f),
            degree: self.degree,
        }
    }

    /// Affine fixed-point polynomial `num - z·den` (formal degree `d + 1`).
    pub fn fixed_point_polynomial(&self) -> Poly<TParam> {
        let z = Poly::monomial(TParam::one(), 1);
        self.num.sub(&z.mul(&self.den))
    }

    /// Wronskian `num'·den - num·den'`, whose roots are the finite critical points.
    pub fn critical_polynomial(&self) -> Poly<TParam> {
        self.num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()))
    }

    pub fn describe(&self) -> String {
        let show = |p: &Poly<TParam>| -> String {
            let mut parts = Vec::new();
            for (k, c) in p.coeffs().iter().enumerate().rev() {
                if c.is_zero() {
                    continue;
                }
                let c = format!("({c})");
                parts.push(match k {
                    0 => c,
                    1 => format!("{c}*z"),
                    _ => format!("{c}*z^{k}"),
                });
            }
            if parts.is_empty() {
                "0".into()
            } else {
                parts.join(" + ")
            }
        };
        format!("[{}] / [{}]", show(&self.num), show(&self.den))
    }
}

/// `z ↦ (a z + b)/(c z + d)` over `ℚ(i)(t)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MobiusFamily {
    pub a: TParam,
    pub b: TParam,
    pub c: TParam,
    pub d: TParam,
}

impl MobiusFamily {
    pub fn new(a: TParam, b: TParam, c: TParam, d: TParam) -> Result<Self> {
        let det = &(&a * &d) - &(&b * &c);
        if det.is_zero() {
            return Err(Error::DegenerateMap(
                "Möbius determinant vanishes identically".into(),
            ));
        }
        Ok(MobiusFamily { a, b, c, d })
    }

    pub fn identity() -> Self {
        MobiusFamily {
            a: TParam::one(),
            b: TParam::zero(),
            c: TParam::zero(),
            d: TParam::one(),
        }
    }

    /// `z ↦ center + scale·z`.
    pub fn affine(center: TParam, scale: TParam) -> Result<Self> {
        MobiusFamily::new(scale, center, TParam::zero(), TParam::one())
    }

    pub fn inverse(&self) -> MobiusFamily {
        MobiusFamily {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    pub fn to_family(&self) -> FamilyMap {
        FamilyMap {
            num: Poly::new(vec![self.b.clone(), self.a.clone()]),
            den: Poly::new(vec![self.d.clone(), self.c.clone()]),
            degree: 1,
        }
    }

    pub fn base_change(&self, n: usize) -> MobiusFamily {
        let s = |x: &TParam| x.substitute_power(n);
        MobiusFamily {
            a: s(&self.a),
            b: s(&self.b),
            c: s(&self.c),
            d: s(&self.d),
        }
    }

    pub fn compose(&self, o: &MobiusFamily) -> MobiusFamily {
        MobiusFamily {
            a: &(&self.a * &o.a) + &(&self.b * &o.c),
            b: &(&self.a * &o.b) + &(&self.b * &o.d),
            c: &(&self.c * &o.a) + &(&self.d * &o.c),
            d: &(&self.c * &o.b) + &(&self.d * &o.d),
        }
    }
}

/// Multiplies both forms by `t^(-v)` where `v` is the least coefficient
/// valuation, and removes common factors in `z` (including a shared zero
/// at infinity).
pub fn normalize_family(f: &FamilyMap) -> Result<FamilyMap> {
    let vmin = f
        .num
        .coeffs()
        .iter()
        .chain(f.den.coeffs())
        .filter_map(TParam::valuation)
        .min()
        .ok_or(Error::ZeroFamily)?;
    let scale = TParam::monomial(G::one(), -vmin);
    let mut g = f.map_coeffs(|c| c * &scale);
    if !g.num.is_zero() && !g.den.is_zero() {
        let h = g.num.gcd(&g.den)?;
        if h.degree().unwrap_or(0) > 0 {
            g.num = g.num.div_rem(&h)?.0;
            g.den = g.den.div_rem(&h)?.0;
            g.degree -= h.degree().unwrap();
        }
        let top = g.num.degree().unwrap().max(g.den.degree().unwrap());
        g.degree = g.degree.min(top).max(1);
    }
    Ok(g)
}

/// `t ↦ t^n` in every coefficient.
pub fn base_change(f: &FamilyMap, n: usize) -> Result<FamilyMap> {
    if n == 0 {
        return Err(Error::BadParameter(
            "base change exponent must be at least 1".into(),
        ));
    }
    Ok(f.map_coeffs(|c| c.substitute_power(n)))
}

/// The fiber at `t = 0` of a normalized family.
#[derive(Clone, Debug)]
pub struct GoodReductionReport {
    /// Every coefficient has nonnegative valuation.
    pub integral: bool,
    pub resultant_valuation: i64,
    pub explicit_good: bool,
    /// The reduced map when its degree is at least 1.
    pub reduction: Option<RationalMap>,
    pub reduction_degree: usize,
    /// The constant a degree-0 reduction collapses to.
    pub constant_value: Option<SpherePoint>,
    /// Zeros of the common factor cleared from the reduced forms.
    pub indeterminacy: Vec<(SpherePoint, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionJson {
    pub integral: bool,
    pub resultant_valuation: i64,
    pub explicit_good: bool,
    pub reduction_degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<MapJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_value: Option<String>,
    pub indeterminacy: Vec<(String, usize)>,
}

impl GoodReductionReport {
    pub fn to_json(&self) -> ReductionJson {
        let digits = 30;
        ReductionJson {
            integral: self.integral,
            resultant_valuation: self.resultant_valuation,
            explicit_good: self.explicit_good,
            reduction_degree: self.reduction_degree,
            reduction: self.reduction.as_ref().map(|r| r.to_json()),
            reduction_text: self.reduction.as_ref().map(|r| r.describe()),
            constant_value: self.constant_value.as_ref().map(|p| p.render(digits)),
            indeterminacy: self
                .indeterminacy
                .iter()
                .map(|(p, m)| (p.render(digits), *m))
                .collect(),
        }
    }
}

/// Reduces a family at `t = 0` after normalizing it.
pub fn reduce_at_zero(f: &FamilyMap) -> Result<GoodReductionReport> {
    let g = normalize_family(f)?;
    let d = g.degree;
    let resultant_valuation = g
        .generic_resultant()?
        .valuation()
        .ok_or_else(|| Error::DegenerateMap("resultant vanishes identically".into()))?;
    let integral = g
        .num
        .coeffs()
        .iter()
        .chain(g.den.coeffs())
        .all(|c| c.valuation().is_none_or(|v| v >= 0));
    let at_zero = |p: &Poly<TParam>| -> Poly<G> {
        Poly::new(
            p.coeffs()
                .iter()
                .map(|c| c.value_at_zero().unwrap_or_else(G::zero))
                .collect(),
        )
    };
    let (pb, qb) = (at_zero(&g.num), at_zero(&g.den));
    let explicit_good = integral && resultant_valuation == 0;

    // common factor of the reduced forms: an affine gcd times a power of y
    let h = if pb.is_zero() {
        qb.monic()
    } else if qb.is_zero() {
        pb.monic()
    } else {
        pb.gcd(&qb)?
    };
    let top = pb
        .degree()
        .into_iter()
        .chain(qb.degree())
        .max()
        .unwrap_or(0);
    let at_infinity = d - top;
    let h_deg = h.degree().unwrap_or(0);
    let reduction_degree = d - h_deg - at_infinity;

    let mut indeterminacy = Vec::new();
    if h_deg == 1 {
        let c = h.coeffs();
        indeterminacy.push((SpherePoint::exact(-(c[0].clone() / c[1].clone())), 1));
    } else if h_deg > 1 {
        let hp = h.map(|c| c.to_big(DEFAULT_PREC));
        for r in poly_roots(&hp, DEFAULT_PREC)? {
            indeterminacy.push((SpherePoint::mp(r.center), r.multiplicity));
        }
    }
    if at_infinity > 0 {
        indeterminacy.push((SpherePoint::Infinity, at_infinity));
    }

    let (rn, rd) = (divide(&pb, &h)?, divide(&qb, &h)?);
    let (reduction, constant_value) = if reduction_degree >= 1 {
        let conv = |p: &Poly<G>| -> Vec<Scalar> {
            if p.is_zero() {
                vec![Scalar::Exact(G::zero())]
            } else {
                p.coeffs().iter().cloned().map(Scalar::Exact).collect()
            }
        };
        (
            Some(RationalMap::from_affine(
                conv(&rn),
                conv(&rd),
                ScalarMode::Exact,
                DEFAULT_PREC,
            )?),
            None,
        )
    } else {
        // both quotients are constants (up to the dropped power of y)
        let p0 = rn
            .coeffs()
            .iter()
            .rev()
            .find(|c| !c.is_zero())
            .cloned()
            .unwrap_or_else(G::zero);
        let q0 = rd
            .coeffs()
            .iter()
            .rev()
            .find(|c| !c.is_zero())
            .cloned()
            .unwrap_or_else(G::zero);
        let value = if q0.is_zero() {
            SpherePoint::Infinity
        } else {
            SpherePoint::exact(p0 / q0)
        };
        (None, Some(value))
    };
    Ok(GoodReductionReport {
        integral,
        resultant_valuation,
        explicit_good,
        reduction,
        reduction_degree,
        constant_value,
        indeterminacy,
    })
}

fn divide(p: &Poly<G>, h: &Poly<G>) -> Result<Poly<G>> {
    if p.is_zero() {
        return Ok(Poly::zero());
    }
    Ok(p.div_rem(h)?.0)
}

/// Result of conjugating an iterate by a Möbius family and reducing.
#[derive(Clone, Debug)]
pub struct RescalingLimit {
    /// `M⁻¹ ∘ f^q ∘ M` over `ℚ(i)(t)`.
    pub conjugated: FamilyMap,
    pub report: GoodReductionReport,
}

impl RescalingLimit {
    /// The limit map, or `None` when the reduction is degenerate.
    pub fn limit(&self) -> Option<&RationalMap> {
        self.report.reduction.as_ref()
    }
}

pub fn rescaling_limit(f: &FamilyMap, m: &MobiusFamily, q: usize) -> Result<RescalingLimit> {
    rescaling_limit_with_budget(f, m, q, DEFAULT_COMPOSE_BUDGET)
}

pub fn rescaling_limit_with_budget(
    f: &FamilyMap,
    m: &MobiusFamily,
    q: usize,
    budget: usize,
) -> Result<RescalingLimit> {
    let fq = f.iterate(q, budget)?;
    let h = m.inverse().to_family().compose(&fq.compose(&m.to_family()));
    let report = reduce_at_zero(&h)?;
    Ok(RescalingLimit {
        conjugated: normalize_family(&h)?,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(num: &[&str], den: &[&str]) -> FamilyMap {
        FamilyMap::from_strs(num, den).unwrap()
    }

    fn exact(num: &[&str], den: &[&str]) -> RationalMap {
        RationalMap::from_strs(num, den, ScalarMode::Exact, DEFAULT_PREC).unwrap()
    }

    fn same(a: &RationalMap, b: &RationalMap) -> bool {
        a.to_json() == b.to_json()
    }

    #[test]
    fn normalization_examples() {
        let f = fam(&["0", "0", "t"], &["t"]);
        assert_eq!(normalize_family(&f).unwrap(), fam(&["0", "0", "1"], &["1"]));
        let g = fam(&["1/t", "0", "1/t"], &["1"]);
        let n = normalize_family(&g).unwrap();
        assert_eq!(
            n.to_json(),
            FamilyJson {
                num: vec!["1".into(), "0".into(), "1".into()],
                den: vec!["t".into()]
            }
        );
        assert_eq!(normalize_family(&n).unwrap(), n);
    }

    #[test]
    fn reduction_examples() {
        let r = reduce_at_zero(&fam(&["t", "0", "1"], &["1"])).unwrap();
        assert!(r.explicit_good);
        assert_eq!(r.resultant_valuation, 0);
        assert!(same(
            r.reduction.as_ref().unwrap(),
            &exact(&["0", "0", "1"], &["1"])
        ));

        let r = reduce_at_zero(&fam(&["0", "1", "t"], &["1"])).unwrap();
        assert!(!r.explicit_good);
        assert_eq!(r.resultant_valuation, 2);
        assert_eq!(r.reduction_degree, 1);
        assert!(matches!(
            r.indeterminacy.as_slice(),
            [(SpherePoint::Infinity, 1)]
        ));

        let r = reduce_at_zero(&fam(&["0", "0", "1"], &["1"])).unwrap();
        assert!(r.explicit_good);
        assert_eq!(r.reduction_degree, 2);
    }

    #[test]
    fn rescaling_examples() {
        let f = fam(&["0", "1", "t"], &["1"]);
        let m = MobiusFamily::affine(TParam::zero(), TParam::parse("1/t").unwrap()).unwrap();
        let lim = rescaling_limit(&f, &m, 1).unwrap();
        assert!(same(lim.limit().unwrap(), &exact(&["0", "1", "1"], &["1"])));
        assert!(lim.report.indeterminacy.is_empty());

        let g = fam(&["t", "0", "1"], &["1"]);
        let lim = rescaling_limit(&g, &MobiusFamily::identity(), 1).unwrap();
        assert!(same(lim.limit().unwrap(), &exact(&["0", "0", "1"], &["1"])));

        let h = fam(&["1/t", "0", "1"], &["1"]);
        let lim = rescaling_limit(&h, &MobiusFamily::identity(), 1).unwrap();
        assert!(lim.limit().is_none());
        assert!(lim.report.constant_value.as_ref().unwrap().is_infinity());
    }

    #[test]
    fn rescaling_is_conjugation_coherent() {
        let f = fam(&["0", "1", "t"], &["1"]);
        let m = MobiusFamily::affine(TParam::zero(), TParam::parse("1/t").unwrap()).unwrap();
        // A(z) = 2z + 1 has valuation-0 entries and invertible reduction
        let a = MobiusFamily::affine(TParam::from_i64(1), TParam::from_i64(2)).unwrap();
        let lim = rescaling_limit(&f, &m.compose(&a), 1).unwrap();
        let g = exact(&["0", "1", "1"], &["1"]);
        let abar = crate::ratmap::Mobius::new(
            Scalar::exact_i64(2),
            Scalar::exact_i64(1),
            Scalar::exact_i64(0),
            Scalar::exact_i64(1),
        )
        .unwrap();
        assert!(same(lim.limit().unwrap(), &g.conjugate(&abar).unwrap()));
    }

    #[test]
    fn base_change_commutes_with_rescaling() {
        let f = fam(&["0", "1", "t"], &["1"]);
        let m = MobiusFamily::affine(TParam::zero(), TParam::parse("1/t").unwrap()).unwrap();
        let lim = rescaling_limit(&f, &m, 1).unwrap();
        let lim2 = rescaling_limit(&base_change(&f, 2).unwrap(), &m.base_change(2), 1).unwrap();
        assert!(same(lim.limit().unwrap(), lim2.limit().unwrap()));
        let g = base_change(&fam(&["t", "0", "1"], &["1"]), 2).unwrap();
        assert_eq!(g, fam(&["t^2", "0", "1"], &["1"]));
        let h = base_change(&fam(&["1/t", "0", "1"], &["1"]), 2).unwrap();
        assert_eq!(h, fam(&["t^-2", "0", "1"], &["1"]));
        let x = fam(&["1/(t+1)", "t", "1"], &["2", "t^2"]);
        assert_eq!(
            base_change(&base_change(&x, 2).unwrap(), 3).unwrap(),
            base_change(&x, 6).unwrap()
        );
    }

    #[test]
    fn iterate_respects_budget() {
        let f = fam(&["t", "0", "1"], &["1"]);
        assert!(f.iterate(6, 64).is_ok());
        assert!(matches!(
            f.iterate(7, 64),
            Err(Error::BudgetExceeded {
                needed: 128,
                cap: 64
            })
        ));
    }
}
