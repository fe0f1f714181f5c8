//! Newton polygons over `ℚ(i)(t)` and the search for rescalings.

use std::collections::BTreeSet;

use rug::Rational;
use serde::{Deserialize, Serialize};

use super::family::{
    base_change, rescaling_limit_with_budget, FamilyMap, GoodReductionReport, MobiusFamily,
    DEFAULT_COMPOSE_BUDGET,
};
use super::tparam::TParam;
use crate::algebra::{poly_roots, GaussRational, Poly};
use crate::error::{Error, Result};
use crate::ratmap::{RationalMap, DEFAULT_PREC};

type G = GaussRational;

/// One edge of the lower convex hull of `(k, v(a_k))`.
///
/// Roots attached to an edge of slope `σ` have valuation `-σ`. Roots at
/// `z = 0` (from the low-order zero coefficients) are reported as a
/// segment with `slope = None`.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonSegment {
    pub start: usize,
    pub length: usize,
    pub slope: Option<Rational>,
}

impl NewtonSegment {
    /// Valuation of each root on this segment; `None` means the root is `0`.
    pub fn root_valuation(&self) -> Option<Rational> {
        self.slope.as_ref().map(|s| Rational::from(-s))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentJson {
    pub slope: Option<String>,
    pub length: usize,
    pub root_valuation: String,
}

impl From<&NewtonSegment> for SegmentJson {
    fn from(s: &NewtonSegment) -> Self {
        SegmentJson {
            slope: s.slope.as_ref().map(|r| r.to_string()),
            length: s.length,
            root_valuation: s
                .root_valuation()
                .map_or_else(|| "inf".to_string(), |r| r.to_string()),
        }
    }
}

pub fn newton_polygon(p: &Poly<TParam>) -> Result<Vec<NewtonSegment>> {
    let deg = p.degree().ok_or(Error::ZeroPolynomial)?;
    let low = p.low_order();
    let mut out = Vec::new();
    if low > 0 {
        out.push(NewtonSegment {
            start: 0,
            length: low,
            slope: None,
        });
    }
    let pts: Vec<(i64, i64)> = (low..=deg)
        .filter_map(|k| p.coeffs()[k].valuation().map(|v| (k as i64, v)))
        .collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &q in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b unless it lies strictly below the chord a–q
            let cross = (b.0 - a.0) * (q.1 - a.1) - (b.1 - a.1) * (q.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(q);
    }
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        out.push(NewtonSegment {
            start: a.0 as usize,
            length: (b.0 - a.0) as usize,
            slope: Some(Rational::from((b.1 - a.1, b.0 - a.0))),
        });
    }
    Ok(out)
}

/// Finite root valuations with multiplicity, smallest first.
pub fn root_valuations(p: &Poly<TParam>) -> Result<Vec<(Rational, usize)>> {
    let mut v: Vec<(Rational, usize)> = newton_polygon(p)?
        .iter()
        .filter_map(|s| s.root_valuation().map(|r| (r, s.length)))
        .collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(v)
}

/// Exact nonzero roots in `ℚ(i)` of the residual polynomial of an
/// integral-slope segment, i.e. the leading coefficients `a` of roots
/// `a·t^β + …`.
fn residual_roots(p: &Poly<TParam>, seg: &NewtonSegment) -> Result<Vec<G>> {
    let Some(slope) = &seg.slope else {
        return Ok(Vec::new());
    };
    if *slope.denom() != 1 {
        return Ok(Vec::new());
    }
    let s = slope.numer().to_i64().unwrap_or(i64::MAX);
    let v0 = p.coeffs()[seg.start].valuation().expect("hull vertex");
    let mut coeffs = vec![G::zero(); seg.length + 1];
    for j in 0..=seg.length {
        let c = &p.coeffs()[seg.start + j];
        if let Some((v, lc)) = c.leading_term() {
            if v == v0 + s * j as i64 {
                coeffs[j] = lc;
            }
        }
    }
    let residual = Poly::new(coeffs);
    let prec = DEFAULT_PREC;
    let mut out: Vec<G> = Vec::new();
    for r in poly_roots(&residual.map(|c| c.to_big(prec)), prec)? {
        let Some(g) = GaussRational::approximate(&r.center, 1 << 20, 1e-30) else {
            continue;
        };
        if residual.eval(&g).is_zero() && !out.contains(&g) {
            out.push(g);
        }
    }
    Ok(out)
}

/// Truncated Puiseux expansions `c_1 t^{e_1} + … + c_k t^{e_k}` (`k ≤ depth`,
/// increasing integer exponents) of the roots of `p`, restricted to
/// terms with Gaussian-rational coefficients.
pub fn puiseux_centers(p: &Poly<TParam>, depth: usize) -> Result<Vec<(TParam, i64)>> {
    let mut out = Vec::new();
    expand(p, &TParam::zero(), None, depth, &mut out)?;
    Ok(out)
}

fn expand(
    p: &Poly<TParam>,
    prefix: &TParam,
    last: Option<i64>,
    depth: usize,
    out: &mut Vec<(TParam, i64)>,
) -> Result<()> {
    if depth == 0 {
        return Ok(());
    }
    for seg in newton_polygon(p)? {
        let Some(beta) = seg.root_valuation() else {
            continue;
        };
        if *beta.denom() != 1 {
            continue;
        }
        let e = beta.numer().to_i64().unwrap_or(i64::MAX);
        if last.is_some_and(|l| e <= l) {
            continue;
        }
        for a in residual_roots(p, &seg)? {
            let term = TParam::monomial(a, e);
            let center = prefix + &term;
            if out.iter().any(|(c, _)| *c == center) {
                continue;
            }
            out.push((center.clone(), e));
            expand(&p.taylor_shift(&term), &center, Some(e), depth - 1, out)?;
        }
    }
    Ok(())
}

/// A validated rescaling: after `t = u^n`, `M_u(z) = center + u^e·z`
/// conjugates `f^q` to a family whose reduction has degree at least 2.
#[derive(Clone, Debug)]
pub struct RescalingProposal {
    pub base_change: usize,
    pub center: TParam,
    pub scale_exponent: i64,
    pub mobius: MobiusFamily,
    pub limit: RationalMap,
    pub report: GoodReductionReport,
}

#[derive(Clone, Debug)]
pub struct ProposalOptions {
    pub max_denominator: u32,
    /// Number of Puiseux terms in a center.
    pub center_depth: usize,
    pub budget: usize,
}

impl Default for ProposalOptions {
    fn default() -> Self {
        ProposalOptions {
            max_denominator: 4,
            center_depth: 3,
            budget: DEFAULT_COMPOSE_BUDGET,
        }
    }
}

pub fn propose_rescalings(
    f: &FamilyMap,
    q: usize,
    max_denominator: u32,
) -> Result<Vec<RescalingProposal>> {
    propose_rescalings_with(
        f,
        q,
        &ProposalOptions {
            max_denominator,
            ..Default::default()
        },
    )
}

/// Candidates come from the root valuations of the fixed-point and
/// critical polynomials of `f^q`: each class `β = p/n` asks for the base
/// change `t = u^n`, and the scales `u^e` and centers are read off the
/// Newton polygons after that base change.
pub fn propose_rescalings_with(
    f: &FamilyMap,
    q: usize,
    opts: &ProposalOptions,
) -> Result<Vec<RescalingProposal>> {
    let fq = f.iterate(q, opts.budget)?;
    let polys = [fq.fixed_point_polynomial(), fq.critical_polynomial()];
    let mut dens: BTreeSet<u32> = BTreeSet::from([1]);
    let mut hints: BTreeSet<u32> = BTreeSet::new();
    for p in polys.iter().filter(|p| !p.is_zero()) {
        for (beta, _) in root_valuations(p)? {
            let n = beta.denom().to_u32().unwrap_or(u32::MAX);
            if n <= opts.max_denominator {
                dens.insert(n);
                if n > 1 {
                    hints.insert(n);
                }
            }
        }
    }

    let mut found = Vec::new();
    for &n in &dens {
        let n = n as usize;
        let fam = base_change(f, n)?;
        let shifted: Vec<Poly<TParam>> = polys
            .iter()
            .filter(|p| !p.is_zero())
            .map(|p| p.map(|c| c.substitute_power(n)))
            .collect();
        let mut centers = vec![TParam::zero()];
        for p in &shifted {
            for (c, _) in puiseux_centers(p, opts.center_depth)? {
                if !centers.contains(&c) {
                    centers.push(c);
                }
            }
        }
        let mut tried: BTreeSet<(i64, String)> = BTreeSet::new();
        for c in &centers {
            let mut exps: BTreeSet<i64> = BTreeSet::from([0]);
            for p in &shifted {
                for (beta, _) in root_valuations(&p.taylor_shift(c))? {
                    if *beta.denom() == 1 {
                        exps.insert(beta.numer().to_i64().unwrap_or(0));
                    }
                }
            }
            for e in exps {
                if n > 1 && is_pullback(c, e, n) {
                    continue;
                }
                if !tried.insert((e, c.to_string())) {
                    continue;
                }
                let m = MobiusFamily::affine(c.clone(), TParam::monomial(G::one(), e))?;
                let lim = match rescaling_limit_with_budget(&fam, &m, q, opts.budget) {
                    Ok(l) => l,
                    Err(Error::DegenerateMap(_)) => continue,
                    Err(e) => return Err(e),
                };
                if lim.report.reduction_degree >= 2 {
                    let limit = lim.report.reduction.clone().expect("degree at least 1");
                    found.push(RescalingProposal {
                        base_change: n,
                        center: c.clone(),
                        scale_exponent: e,
                        mobius: m,
                        limit,
                        report: lim.report,
                    });
                }
            }
        }
    }
    if found.is_empty() {
        return Err(Error::NoCandidates {
            hints: hints.into_iter().collect(),
        });
    }
    found.sort_by(|a, b| {
        let key = |p: &RescalingProposal| {
            (
                p.base_change,
                p.scale_exponent,
                !p.center.is_zero(),
                p.center.to_string(),
            )
        };
        key(a).cmp(&key(b))
    });
    Ok(found)
}

/// The candidate already exists before the base change `t = u^n`.
fn is_pullback(c: &TParam, e: i64, n: usize) -> bool {
    let spread = |p: Poly<G>| {
        p.coeffs()
            .iter()
            .enumerate()
            .all(|(k, a)| a.is_zero() || k % n == 0)
    };
    e % n as i64 == 0 && spread(c.numerator()) && spread(c.denominator())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ScalarMode;

    fn tpoly(cs: &[&str]) -> Poly<TParam> {
        Poly::new(cs.iter().map(|s| TParam::parse(s).unwrap()).collect())
    }

    fn vals(p: &Poly<TParam>) -> Vec<(String, usize)> {
        root_valuations(p)
            .unwrap()
            .into_iter()
            .map(|(r, m)| (r.to_string(), m))
            .collect()
    }

    fn fam(num: &[&str], den: &[&str]) -> FamilyMap {
        FamilyMap::from_strs(num, den).unwrap()
    }

    #[test]
    fn slope_convention() {
        // (z - 1)(z - t)
        assert_eq!(
            vals(&tpoly(&["t", "-(1+t)", "1"])),
            vec![("0".into(), 1), ("1".into(), 1)]
        );
        assert_eq!(vals(&tpoly(&["-t^3", "1"])), vec![("3".into(), 1)]);
        let p = tpoly(&["1/t", "-1", "1"]);
        assert_eq!(vals(&p), vec![("-1/2".into(), 2)]);
        let segs = newton_polygon(&p).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].slope, Some(Rational::from((1, 2))));
        assert_eq!(segs[0].length, 2);
    }

    #[test]
    fn zero_roots_are_reported_separately() {
        let segs = newton_polygon(&tpoly(&["0", "0", "t"])).unwrap();
        assert_eq!(
            segs,
            vec![NewtonSegment {
                start: 0,
                length: 2,
                slope: None
            }]
        );
        assert!(matches!(
            newton_polygon(&Poly::zero()),
            Err(Error::ZeroPolynomial)
        ));
    }

    #[test]
    fn puiseux_terms() {
        // z^2 + 1/u^2 - z after base change: roots ±i/u + 1/2 + …
        let p = tpoly(&["t^-2", "-1", "1"]);
        let centers = puiseux_centers(&p, 2).unwrap();
        let shown: Vec<String> = centers.iter().map(|(c, _)| c.to_string()).collect();
        assert!(shown.contains(&TParam::parse("i/t").unwrap().to_string()));
        assert!(shown.contains(&TParam::parse("i/t + 1/2").unwrap().to_string()));
        assert!(shown.contains(&TParam::parse("-i/t + 1/2").unwrap().to_string()));
    }

    #[test]
    fn proposal_examples() {
        let exact = |num: &[&str]| {
            RationalMap::from_strs(num, &["1"], ScalarMode::Exact, DEFAULT_PREC).unwrap()
        };
        let props = propose_rescalings(&fam(&["0", "1", "t"], &["1"]), 1, 4).unwrap();
        let target = exact(&["0", "1", "1"]).to_json();
        assert!(props.iter().any(|p| p.base_change == 1
            && p.center.is_zero()
            && p.scale_exponent == -1
            && p.limit.to_json() == target));

        let props = propose_rescalings(&fam(&["t", "0", "1"], &["1"]), 1, 4).unwrap();
        let first = &props[0];
        assert_eq!((first.base_change, first.scale_exponent), (1, 0));
        assert!(first.center.is_zero());
        assert_eq!(first.limit.to_json(), exact(&["0", "0", "1"]).to_json());

        match propose_rescalings(&fam(&["1/t", "0", "1"], &["1"]), 1, 4) {
            Err(Error::NoCandidates { hints }) => assert_eq!(hints, vec![2]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
