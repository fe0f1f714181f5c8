//! Exceptional maps (power, Chebyshev, flexible Lattès) and the
//! integrality and constant-Lyapunov detectors.

use serde::{Deserialize, Serialize};

use crate::algebra::{BigComplex, GaussRational, Scalar, ScalarMode};
use crate::error::{Error, Result};
use crate::periodic::{periodic_cycles, spectrum_table, CycleClass, SpectrumOptions};
use crate::ratmap::{digits_for, RationalMap, SpherePoint};

#[derive(Clone, Debug, PartialEq)]
pub enum ExceptionalKind {
    /// `z^m`; negative `m` gives `z^m = 1/z^|m|`.
    Power(i32),
    /// The degree-`m` Chebyshev polynomial `T_m`, with `T_m(cos θ) = cos(mθ)`.
    Chebyshev(u32),
    /// Multiplication by 2 on `y^2 = x(x-1)(x-a)` seen on the `x`-coordinate.
    FlexibleLattes(GaussRational),
}

const CHECK_SAMPLES: usize = 20;

pub fn make_exceptional(kind: &ExceptionalKind, prec: u32) -> Result<RationalMap> {
    let ex = |v: Vec<GaussRational>| v.into_iter().map(Scalar::Exact).collect::<Vec<_>>();
    let int = |n: i64| GaussRational::from_i64(n);
    match kind {
        ExceptionalKind::Power(m) => {
            if m.unsigned_abs() < 2 {
                return Err(Error::BadParameter(format!(
                    "power map needs |m| >= 2, got {m}"
                )));
            }
            let k = m.unsigned_abs() as usize;
            let mut mono = vec![int(0); k + 1];
            mono[k] = int(1);
            let (num, den) = if *m > 0 {
                (mono, vec![int(1)])
            } else {
                (vec![int(1)], mono)
            };
            RationalMap::from_affine(ex(num), ex(den), ScalarMode::Exact, prec)
        }
        ExceptionalKind::Chebyshev(m) => {
            if *m < 2 {
                return Err(Error::BadParameter(format!(
                    "Chebyshev map needs m >= 2, got {m}"
                )));
            }
            let f = RationalMap::from_affine(
                ex(chebyshev_coeffs(*m as usize)),
                ex(vec![int(1)]),
                ScalarMode::Exact,
                prec,
            )?;
            verify_chebyshev(&f, *m, prec)?;
            Ok(f)
        }
        ExceptionalKind::FlexibleLattes(a) => {
            if a.is_zero() || *a == GaussRational::one() {
                return Err(Error::BadParameter(
                    "flexible Lattès parameter must avoid 0 and 1".into(),
                ));
            }
            let f = RationalMap::from_affine(
                ex(lattes_num(a)),
                ex(lattes_den(a)),
                ScalarMode::Exact,
                prec,
            )?;
            verify_duplication(&f, a, prec)?;
            Ok(f)
        }
    }
}

/// Coefficients of `T_m` from `T_{k+1} = 2z T_k - T_{k-1}`.
fn chebyshev_coeffs(m: usize) -> Vec<GaussRational> {
    let mut prev = vec![GaussRational::one()];
    let mut cur = vec![GaussRational::zero(), GaussRational::one()];
    for _ in 1..m {
        let mut next = vec![GaussRational::zero(); cur.len() + 1];
        for (k, c) in cur.iter().enumerate() {
            next[k + 1] = &next[k + 1] + &(c * &GaussRational::from_i64(2));
        }
        for (k, c) in prev.iter().enumerate() {
            next[k] = &next[k] - c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// `(x^2 - a)^2`.
fn lattes_num(a: &GaussRational) -> Vec<GaussRational> {
    let a2 = a * a;
    vec![
        a2,
        GaussRational::zero(),
        -(a * &GaussRational::from_i64(2)),
        GaussRational::zero(),
        GaussRational::one(),
    ]
}

/// `4x(x - 1)(x - a) = 4x^3 - 4(1+a)x^2 + 4a x`.
fn lattes_den(a: &GaussRational) -> Vec<GaussRational> {
    let four = GaussRational::from_i64(4);
    let one_plus_a = a + &GaussRational::one();
    vec![
        GaussRational::zero(),
        a * &four,
        -(&one_plus_a * &four),
        four,
    ]
}

/// Sample points spread over an annulus, away from the real axis.
fn samples(prec: u32) -> Vec<BigComplex> {
    (0..CHECK_SAMPLES)
        .map(|k| {
            let r = BigComplex::from_f64(prec, 0.7 + 0.05 * k as f64, 0.0);
            &r * &BigComplex::root_of_unity(prec, 2 * k as i64 + 1, 2 * CHECK_SAMPLES as i64 + 3)
        })
        .collect()
}

/// `T_m((w + 1/w)/2) = (w^m + w^-m)/2` at sample points.
fn verify_chebyshev(f: &RationalMap, m: u32, prec: u32) -> Result<()> {
    let half = BigComplex::from_f64(prec, 0.5, 0.0);
    let tol = -(prec as f64) / 2.0;
    for w in samples(prec) {
        let h = |u: &BigComplex| &(u + &u.recip()) * &half;
        let lhs = f.evaluate(&SpherePoint::mp(h(&w))).to_mp(prec).unwrap();
        let rhs = h(&w.powi(m as i64));
        let scale = rhs.abs_f64().max(1.0);
        if (lhs.dist_f64(&rhs) / scale).log2() > tol {
            return Err(Error::BadParameter(
                "Chebyshev semiconjugacy check failed".into(),
            ));
        }
    }
    Ok(())
}

/// Compares the map with the tangent-line doubling `x ↦ λ^2 + (1 + a) - 2x`,
/// `λ = (3x^2 - 2(1+a)x + a) / (2y)`, on the curve `y^2 = x(x-1)(x-a)`.
fn verify_duplication(f: &RationalMap, a: &GaussRational, prec: u32) -> Result<()> {
    let a = a.to_big(prec);
    let one = BigComplex::one(prec);
    let one_plus_a = &one + &a;
    let tol = -(prec as f64) / 2.0;
    for x in samples(prec) {
        let y = (&(&x * &(&x - &one)) * &(&x - &a)).sqrt();
        let slope_num = &(&(&x * &x).mul_i64(3) - &(&one_plus_a * &x).mul_i64(2)) + &a;
        let slope = &slope_num / &y.mul_i64(2);
        let doubled = &(&(&slope * &slope) + &one_plus_a) - &x.mul_i64(2);
        let got = f.evaluate(&SpherePoint::mp(x)).to_mp(prec).unwrap();
        let scale = doubled.abs_f64().max(1.0);
        if (got.dist_f64(&doubled) / scale).log2() > tol {
            return Err(Error::BadParameter("duplication-law check failed".into()));
        }
    }
    Ok(())
}

/// The ring of integers of `Q(sqrt(-D))` as a lattice in the plane.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticRing {
    pub d: u64,
}

impl QuadraticRing {
    pub fn new(d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::BadParameter("D must be positive".into()));
        }
        let mut k = 2u64;
        while k * k <= d {
            if d.is_multiple_of(k * k) {
                return Err(Error::BadParameter(format!("D = {d} is not squarefree")));
            }
            k += 1;
        }
        Ok(QuadraticRing { d })
    }

    /// The generator `ω` with ring `Z[ω]`.
    pub fn omega(&self, prec: u32) -> BigComplex {
        let root = BigComplex::from_i64(prec, -(self.d as i64)).sqrt();
        if self.d % 4 == 3 {
            &(&BigComplex::one(prec) + &root) * &BigComplex::from_f64(prec, 0.5, 0.0)
        } else {
            root
        }
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn distance(&self, z: &BigComplex) -> f64 {
        let prec = z.prec();
        let w = self.omega(prec);
        let y0 = (z.im().clone() / w.im().clone()).round();
        let mut best = f64::INFINITY;
        for dy in -1i64..=1 {
            let y = rug::Float::with_val(prec, &y0 + dy);
            let rest = rug::Float::with_val(prec, z.re() - rug::Float::with_val(prec, &y * w.re()));
            let x = rest.round();
            for dx in -1i64..=1 {
                let xx = rug::Float::with_val(prec, &x + dx);
                let p = &w.mul_real(&y) + &BigComplex::from_floats(xx, rug::Float::new(prec));
                best = best.min(z.dist_f64(&p));
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// The entry that made a test fail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Period (or sequence index for the homoclinic criterion).
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
    pub multiplier: String,
    /// How far the entry is from satisfying the test.
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalVerdict {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub periods_checked: usize,
    /// Fitted base `a` of the law `|λ| = a^n` (Lyapunov test only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_base: Option<f64>,
    /// Periodic points violating the law (Lyapunov test only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violations: Option<usize>,
}

/// Passes iff every multiplier in `s_n`, `n ≤ nmax`, lies within `tol` of the
/// ring. A pass is evidence only; the hypothesis of the rigidity statement
/// involves all periods.
pub fn milnor_integrality_test(
    f: &RationalMap,
    ring: &QuadraticRing,
    nmax: usize,
    tol: f64,
    opts: &SpectrumOptions,
) -> Result<ExceptionalVerdict> {
    let table = spectrum_table(f, nmax, opts)?;
    let digits = digits_for(opts.prec_bits).min(40);
    let mut worst: Option<Witness> = None;
    for row in &table.rows {
        for m in &row.multipliers {
            let d = ring.distance(m);
            if d > tol && worst.as_ref().is_none_or(|w| d > w.distance) {
                worst = Some(Witness {
                    index: row.n,
                    point: None,
                    multiplier: m.to_string_digits(digits),
                    distance: d,
                });
            }
        }
        if worst.is_some() {
            break;
        }
    }
    Ok(ExceptionalVerdict {
        verdict: if worst.is_some() {
            Verdict::Fail
        } else {
            Verdict::Pass
        },
        witness: worst,
        periods_checked: nmax,
        fitted_base: None,
        violations: None,
    })
}

/// Fits one `a > 0` to `|λ| = a^n` over the repelling entries of `s_n`,
/// `n ≤ nmax`, and passes iff at most `exception_budget` entries violate it by
/// more than `tol` in `log |λ|`. A periodic point counts once for every `n`
/// with `f^n` fixing it, so a lone exceptional fixed point uses `nmax` of the
/// budget.
pub fn constant_lyapunov_test(
    f: &RationalMap,
    nmax: usize,
    tol: f64,
    exception_budget: usize,
    opts: &SpectrumOptions,
) -> Result<ExceptionalVerdict> {
    // (n, log|λ| for f^n, point, multiplier for f^n) per repelling entry of s_n
    let mut entries: Vec<(usize, rug::Float, SpherePoint, BigComplex)> = Vec::new();
    for n in 1..=nmax {
        for c in periodic_cycles(f, n, opts)? {
            if c.class != CycleClass::Repelling {
                continue;
            }
            let m = c.multiplier_for(n);
            for p in &c.points {
                for _ in 0..c.multiplicity {
                    entries.push((n, m.ln_abs(), p.clone(), m.clone()));
                }
            }
        }
    }
    if entries.is_empty() {
        return Ok(ExceptionalVerdict {
            verdict: Verdict::Inconclusive,
            witness: None,
            periods_checked: nmax,
            fitted_base: None,
            violations: None,
        });
    }
    let prec = opts.prec_bits;
    let violation = |log_a: &rug::Float, e: &(usize, rug::Float, SpherePoint, BigComplex)| -> f64 {
        let expected = rug::Float::with_val(prec, log_a * e.0 as u32);
        rug::Float::with_val(prec, &e.1 - &expected).abs().to_f64()
    };
    let mut best: Option<(usize, rug::Float)> = None;
    for cand in &entries {
        let log_a = rug::Float::with_val(prec, &cand.1 / cand.0 as u32);
        let count = entries
            .iter()
            .filter(|e| violation(&log_a, e) > tol)
            .count();
        if best.as_ref().is_none_or(|(c, _)| count < *c) {
            best = Some((count, log_a));
        }
    }
    let (count, log_a) = best.unwrap();
    let digits = digits_for(prec).min(40);
    let witness = entries
        .iter()
        .find(|e| violation(&log_a, e) > tol)
        .map(|e| Witness {
            index: e.0,
            point: Some(e.2.render(digits)),
            multiplier: e.3.to_string_digits(digits),
            distance: violation(&log_a, e),
        });
    let pass = count <= exception_budget;
    Ok(ExceptionalVerdict {
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        witness: if pass { None } else { witness },
        periods_checked: nmax,
        fitted_base: Some(log_a.exp().to_f64()),
        violations: Some(count),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    #[test]
    fn constructors() {
        let sq = make_exceptional(&ExceptionalKind::Power(2), P).unwrap();
        assert_eq!(sq.to_json().num, vec!["0", "0", "1"]);
        let inv = make_exceptional(&ExceptionalKind::Power(-3), P).unwrap();
        assert_eq!(inv.degree(), 3);
        assert!(make_exceptional(&ExceptionalKind::Power(1), P).is_err());
        let t2 = make_exceptional(&ExceptionalKind::Chebyshev(2), P).unwrap();
        assert_eq!(t2.to_json().num, vec!["-1", "0", "2"]);
        let t3 = make_exceptional(&ExceptionalKind::Chebyshev(3), P).unwrap();
        assert_eq!(t3.to_json().num, vec!["0", "-3", "0", "4"]);
        let l = make_exceptional(
            &ExceptionalKind::FlexibleLattes(GaussRational::from_i64(2)),
            P,
        )
        .unwrap();
        assert_eq!(l.degree(), 4);
        assert!(
            make_exceptional(&ExceptionalKind::FlexibleLattes(GaussRational::one()), P).is_err()
        );
    }

    #[test]
    fn wrong_lattes_formula_is_caught() {
        // a slightly wrong denominator must fail the duplication oracle
        let a = GaussRational::from_i64(2);
        let mut den = lattes_den(&a);
        den[1] = GaussRational::from_i64(9);
        let ex = |v: Vec<GaussRational>| v.into_iter().map(Scalar::Exact).collect::<Vec<_>>();
        let f =
            RationalMap::from_affine(ex(lattes_num(&a)), ex(den), ScalarMode::Exact, P).unwrap();
        assert!(verify_duplication(&f, &a, P).is_err());
    }

    #[test]
    fn lattice_distance() {
        let gauss = QuadraticRing::new(1).unwrap();
        let z = BigComplex::parse("3-2i", P).unwrap();
        assert!(gauss.distance(&z) < 1e-70);
        let eis = QuadraticRing::new(3).unwrap();
        // ω = (1 + sqrt(-3))/2 is in the Eisenstein lattice, i is not
        assert!(eis.distance(&eis.omega(P)) < 1e-70);
        assert!(eis.distance(&BigComplex::i(P)) > 0.1);
        assert!(QuadraticRing::new(12).is_err());
    }

    #[test]
    fn milnor_on_small_cases() {
        let opts = SpectrumOptions::default();
        let ring = QuadraticRing::new(1).unwrap();
        let sq = make_exceptional(&ExceptionalKind::Power(2), P).unwrap();
        assert_eq!(
            milnor_integrality_test(&sq, &ring, 3, 1e-20, &opts)
                .unwrap()
                .verdict,
            Verdict::Pass
        );
        let b = RationalMap::from_strs(&["-1", "0", "1"], &["1"], ScalarMode::Exact, P).unwrap();
        let v = milnor_integrality_test(&b, &ring, 1, 1e-20, &opts).unwrap();
        assert_eq!(v.verdict, Verdict::Fail);
        let w: f64 = v
            .witness
            .unwrap()
            .multiplier
            .split('+')
            .next()
            .unwrap()
            .parse()
            .unwrap();
        assert!(
            (w.abs() - (1.0 + 5f64.sqrt())).abs() < 1e-12
                || (w - (1.0 - 5f64.sqrt())).abs() < 1e-12
        );
    }

    #[test]
    fn lyapunov_on_small_cases() {
        let opts = SpectrumOptions::default();
        let sq = make_exceptional(&ExceptionalKind::Power(2), P).unwrap();
        let v = constant_lyapunov_test(&sq, 3, 1e-20, 4, &opts).unwrap();
        assert_eq!(v.verdict, Verdict::Pass);
        assert_eq!(v.violations, Some(0));
        assert!((v.fitted_base.unwrap() - 2.0).abs() < 1e-12);
        let b = RationalMap::from_strs(&["-1", "0", "1"], &["1"], ScalarMode::Exact, P).unwrap();
        assert_eq!(
            constant_lyapunov_test(&b, 3, 1e-20, 4, &opts)
                .unwrap()
                .verdict,
            Verdict::Fail
        );
    }
}
