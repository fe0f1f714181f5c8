//! Simultaneous polynomial root finding (Aberth–Ehrlich) with multiplicity
//! clustering and precision escalation.

use num_complex::Complex64;
use rug::ops::Pow;
use rug::Float;

use super::complex::BigComplex;
use super::poly::Poly;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// A root of a polynomial together with its multiplicity.
#[derive(Clone, Debug)]
pub struct RootCluster {
    pub center: BigComplex,
    pub multiplicity: usize,
    /// Radius of a disk around `center` that contains the clustered roots.
    pub radius: f64,
}

const F64_MAX_ITER: usize = 600;
const MP_MAX_ITER: usize = 400;

/// All complex roots of `p`, clustered and sorted by `(re, im)` of center.
///
/// Works at `prec_bits` and escalates to 2× and 4× if the residual check
/// `|p(c)| ≤ 2^(-prec/2)·max|a_k|` fails (for `|c| > 1` the check is applied
/// to `p(c)/c^n`, i.e. in the chart at infinity). Two roots are merged when
/// their distance is below `2^(-prec/4)·max(1, |z|)`.
pub fn poly_roots(p: &Poly<BigComplex>, prec_bits: u32) -> Result<Vec<RootCluster>> {
    let deg = p.degree().ok_or(Error::ZeroPolynomial)?;
    if deg == 0 {
        return Err(Error::BadParameter("poly_roots needs degree >= 1".into()));
    }
    let mut last_err = None;
    for factor in [1u32, 2, 4] {
        let work = prec_bits * factor;
        match roots_at(p, work, prec_bits) {
            Ok(mut clusters) => {
                for c in &mut clusters {
                    c.center = c.center.clone().with_prec(prec_bits);
                }
                clusters.sort_by(|a, b| a.center.lex_cmp(&b.center));
                return Ok(clusters);
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(Error::NonConvergence {
        iterations: 0,
        prec_bits,
    }))
}

/// Convenience wrapper for polynomials with exact or mixed coefficients.
pub fn poly_roots_scalar(p: &Poly<Scalar>, prec_bits: u32) -> Result<Vec<RootCluster>> {
    poly_roots(&p.map(|c| c.to_mp(prec_bits)), prec_bits)
}

fn roots_at(p: &Poly<BigComplex>, work: u32, nominal: u32) -> Result<Vec<RootCluster>> {
    let coeffs: Vec<BigComplex> = p
        .coeffs()
        .iter()
        .map(|c| c.clone().with_prec(work))
        .collect();
    let n = coeffs.len() - 1;
    let zeros = coeffs.iter().take_while(|c| c.is_exact_zero()).count();
    let reduced: Vec<BigComplex> = coeffs[zeros..].to_vec();
    let m = reduced.len() - 1;

    let mut roots: Vec<BigComplex> = vec![BigComplex::zero(work); zeros];
    if m == 1 {
        roots.push(&(-&reduced[0]) / &reduced[1]);
    } else if m >= 2 {
        let start = f64_stage(&reduced).unwrap_or_else(|| hull_start(&reduced, work));
        roots.extend(mp_aberth(&reduced, start, work)?);
    }

    let tol = Float::with_val(work, Float::i_exp(1, -((nominal / 4) as i32)));
    let mut clusters = cluster(&roots, &tol);
    let max_coef = coeffs
        .iter()
        .map(|c| c.abs())
        .fold(Float::new(work), |a, b| if b > a { b } else { a });
    let residual_tol = Float::with_val(
        work,
        &max_coef * Float::with_val(work, Float::i_exp(1, -((nominal / 2) as i32))),
    );
    let dp = derivative(&coeffs);

    for c in &mut clusters {
        if c.multiplicity == 1 && !c.center.is_exact_zero() {
            for _ in 0..2 {
                let (v, d) = horner2(&coeffs, &dp, &c.center);
                if d.is_exact_zero() {
                    break;
                }
                c.center = &c.center - &(&v / &d);
            }
            let (v, d) = horner2(&coeffs, &dp, &c.center);
            c.radius = if d.is_exact_zero() {
                c.radius
            } else {
                (&v / &d).abs_f64() * n as f64
            };
        }
        if !residual_ok(&coeffs, &c.center, &residual_tol, n) {
            return Err(Error::NonConvergence {
                iterations: MP_MAX_ITER,
                prec_bits: work,
            });
        }
    }
    debug_assert_eq!(clusters.iter().map(|c| c.multiplicity).sum::<usize>(), n);
    Ok(clusters)
}

fn residual_ok(coeffs: &[BigComplex], z: &BigComplex, tol: &Float, n: usize) -> bool {
    let v = horner(coeffs, z);
    let az = z.abs();
    if az <= 1 {
        v.abs() <= *tol
    } else {
        // chart at infinity: p(z)/z^n
        let scale = Float::with_val(az.prec(), az.pow(n as u32));
        Float::with_val(tol.prec(), v.abs() / scale) <= *tol
    }
}

fn derivative(coeffs: &[BigComplex]) -> Vec<BigComplex> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.mul_i64(k as i64))
        .collect()
}

pub(crate) fn horner(coeffs: &[BigComplex], z: &BigComplex) -> BigComplex {
    let mut acc = BigComplex::zero(z.prec());
    for c in coeffs.iter().rev() {
        acc = &(&acc * z) + c;
    }
    acc
}

fn horner2(
    coeffs: &[BigComplex],
    dcoeffs: &[BigComplex],
    z: &BigComplex,
) -> (BigComplex, BigComplex) {
    (horner(coeffs, z), horner(dcoeffs, z))
}

/// Value and derivative in one Horner pass.
fn horner_vd(coeffs: &[BigComplex], z: &BigComplex) -> (BigComplex, BigComplex) {
    let mut v = BigComplex::zero(z.prec());
    let mut d = BigComplex::zero(z.prec());
    for c in coeffs.iter().rev() {
        d = &(&d * z) + &v;
        v = &(&v * z) + c;
    }
    (v, d)
}

/// Initial approximations on circles given by the upper convex hull of
/// `(k, log2|a_k|)`.
fn hull_points(logs: &[f64]) -> Vec<(usize, f64)> {
    let pts: Vec<(usize, f64)> = logs
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_finite())
        .map(|(k, &l)| (k, l))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            let cross = (x2 as f64 - x1 as f64) * (p.1 - y1) - (y2 - y1) * (p.0 as f64 - x1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

fn start_circles(logs: &[f64]) -> Vec<(f64, f64)> {
    // (log2 radius, angle) for each root
    let hull = hull_points(logs);
    let n = logs.len() - 1;
    let mut out = Vec::with_capacity(n);
    for (s, w) in hull.windows(2).enumerate() {
        let (i, li) = w[0];
        let (j, lj) = w[1];
        let cnt = j - i;
        let lr = (li - lj) / cnt as f64;
        for l in 0..cnt {
            let ang = 2.0 * std::f64::consts::PI * l as f64 / cnt as f64
                + 0.4
                + 1.3 * s as f64 / n as f64;
            out.push((lr, ang));
        }
    }
    out
}

fn hull_start(coeffs: &[BigComplex], work: u32) -> Vec<BigComplex> {
    let logs: Vec<f64> = coeffs.iter().map(|c| c.log2_abs()).collect();
    start_circles(&logs)
        .into_iter()
        .map(|(lr, ang)| {
            let r = Float::with_val(work, Float::i_exp(1, 0)) * Float::with_val(work, lr).exp2();
            BigComplex::from_polar(work, &r, &Float::with_val(work, ang))
        })
        .collect()
}

/// Double-precision Aberth warm start; `None` when the coefficients do not
/// fit comfortably in the f64 range.
fn f64_stage(coeffs: &[BigComplex]) -> Option<Vec<BigComplex>> {
    let work = coeffs[0].prec();
    let logs: Vec<f64> = coeffs.iter().map(|c| c.log2_abs()).collect();
    let lmax = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if logs.iter().any(|&l| l.is_finite() && (l - lmax) < -900.0) || !lmax.is_finite() {
        return None;
    }
    let scale = Float::with_val(work, -lmax).exp2();
    let c: Vec<Complex64> = coeffs
        .iter()
        .map(|z| {
            let s = z.mul_real(&scale);
            let (re, im) = s.to_c64();
            Complex64::new(re, im)
        })
        .collect();
    if c.last().is_none_or(|l| l.norm() == 0.0) {
        return None;
    }
    let mut z: Vec<Complex64> = start_circles(&logs)
        .into_iter()
        .map(|(lr, a)| Complex64::from_polar(lr.exp2(), a))
        .collect();
    if z.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let n = z.len();
    let mut done = vec![false; n];
    for _ in 0..F64_MAX_ITER {
        let mut all = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (mut v, mut d) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for a in c.iter().rev() {
                d = d * z[k] + v;
                v = v * z[k] + a;
            }
            if v.norm() == 0.0 {
                done[k] = true;
                continue;
            }
            let ratio = v / d;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    let diff = z[k] - z[j];
                    if diff.norm() > 0.0 {
                        s += diff.inv();
                    }
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if !w.is_finite() {
                continue;
            }
            z[k] -= w;
            if w.norm() <= 1e-15 * z[k].norm().max(1e-300) {
                done[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    // separate coincident starts
    for k in 0..n {
        for j in 0..k {
            if (z[k] - z[j]).norm() <= 1e-13 * z[k].norm().max(1e-300) {
                let bump = Complex64::from_polar(
                    1e-10 * z[k].norm().max(1e-30) * (k + 1) as f64,
                    0.7 * k as f64,
                );
                z[k] += bump;
            }
        }
    }
    if z.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(
        z.into_iter()
            .map(|v| BigComplex::from_f64(work, v.re, v.im))
            .collect(),
    )
}

fn mp_aberth(coeffs: &[BigComplex], mut z: Vec<BigComplex>, work: u32) -> Result<Vec<BigComplex>> {
    let n = z.len();
    let eps = Float::with_val(work, Float::i_exp(1, -(work as i32 - 8)));
    let stall = Float::with_val(work, Float::i_exp(1, -((work / 3) as i32)));
    let mut done = vec![false; n];
    let mut prev_w: Vec<Option<Float>> = vec![None; n];
    let one = BigComplex::one(work);
    for _ in 0..MP_MAX_ITER {
        let mut all = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (v, d) = horner_vd(coeffs, &z[k]);
            if v.is_exact_zero() {
                done[k] = true;
                continue;
            }
            let ratio = &v / &d;
            let mut s = BigComplex::zero(work);
            for j in 0..n {
                if j != k {
                    let diff = &z[k] - &z[j];
                    if !diff.is_exact_zero() {
                        s = &s + &diff.recip();
                    }
                }
            }
            let w = &ratio / &(&one - &(&ratio * &s));
            if !w.is_finite() {
                all = false;
                continue;
            }
            z[k] = &z[k] - &w;
            let aw = w.abs();
            let scale = {
                let a = z[k].abs();
                if a > 1 {
                    a
                } else {
                    Float::with_val(work, 1)
                }
            };
            let rel = Float::with_val(work, &aw / &scale);
            let stalled = rel < stall
                && prev_w[k]
                    .as_ref()
                    .is_some_and(|p| aw > Float::with_val(work, p / 2u32));
            if rel <= eps || stalled {
                done[k] = true;
            } else {
                all = false;
            }
            prev_w[k] = Some(aw);
        }
        if all {
            return Ok(z);
        }
    }
    // Unconverged roots are still returned; the residual check decides.
    Ok(z)
}

fn cluster(roots: &[BigComplex], tol: &Float) -> Vec<RootCluster> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let nx = p[c];
            p[c] = r;
            c = nx;
        }
        r
    }
    for i in 0..n {
        for j in 0..i {
            let d = roots[i].dist(&roots[j]);
            let a = roots[i].abs();
            let scale = if a > 1 {
                a
            } else {
                Float::with_val(tol.prec(), 1)
            };
            if d < Float::with_val(tol.prec(), tol * &scale) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    groups
        .into_iter()
        .map(|(_, members)| {
            let k = members.len();
            let work = roots[members[0]].prec();
            let all_zero = members.iter().all(|&i| roots[i].is_exact_zero());
            let center = if all_zero {
                BigComplex::zero(work)
            } else {
                let mut acc = BigComplex::zero(work);
                for &i in &members {
                    acc = &acc + &roots[i];
                }
                acc.div_real(&Float::with_val(work, k as u32))
            };
            let radius = members
                .iter()
                .map(|&i| roots[i].dist_f64(&center))
                .fold(0.0, f64::max);
            RootCluster {
                center,
                multiplicity: k,
                radius,
            }
        })
        .collect()
}

/// Expands `∏ (z - c)^mult` over the clusters.
pub fn poly_from_roots(clusters: &[RootCluster], prec: u32) -> Poly<BigComplex> {
    let mut p = Poly::constant(BigComplex::one(prec));
    for c in clusters {
        let lin = Poly::new(vec![-&c.center, BigComplex::one(prec)]);
        for _ in 0..c.multiplicity {
            p = p.mul(&lin);
        }
    }
    p
}

impl RootCluster {
    pub fn is_at(&self, z: &BigComplex, tol: f64) -> bool {
        self.center.dist_f64(z) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_poly(prec: u32, c: &[i64]) -> Poly<BigComplex> {
        Poly::new(c.iter().map(|&x| BigComplex::from_i64(prec, x)).collect())
    }

    #[test]
    fn simple_and_multiple_roots() {
        let r = poly_roots(&real_poly(256, &[-1, 0, 1]), 256).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r[0].is_at(&BigComplex::from_i64(256, -1), 1e-60));
        assert!(r[1].is_at(&BigComplex::from_i64(256, 1), 1e-60));

        // (z-2)^3
        let r = poly_roots(&real_poly(256, &[-8, 12, -6, 1]), 256).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 3);
        assert!(r[0].is_at(&BigComplex::from_i64(256, 2), 1e-20));
    }

    #[test]
    fn zero_roots_are_exact() {
        let r = poly_roots(&real_poly(128, &[0, 0, -1, 1]), 128).unwrap();
        assert_eq!(r[0].multiplicity, 2);
        assert!(r[0].center.is_exact_zero());
    }

    #[test]
    fn plastic_number_against_bisection() {
        let prec = 256;
        let p = real_poly(prec, &[-1, -1, 0, 1]);
        // bisection oracle for the real root of z^3 - z - 1 in [1, 2]
        let (mut lo, mut hi) = (Float::with_val(prec, 1), Float::with_val(prec, 2));
        for _ in 0..250 {
            let mid = Float::with_val(prec, &lo + &hi) / 2u32;
            let v = Float::with_val(prec, mid.clone().pow(3u32)) - &mid - 1u32;
            if v > 0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let roots = poly_roots(&p, prec).unwrap();
        assert_eq!(roots.len(), 3);
        let real = roots
            .iter()
            .find(|c| c.center.im().clone().abs() < 1e-50)
            .unwrap();
        let err = Float::with_val(prec, real.center.re() - &lo).abs();
        assert!(err < Float::with_val(prec, Float::i_exp(1, -200)));
        let pair: Vec<_> = roots
            .iter()
            .filter(|c| c.center.im().clone().abs() > 1e-10)
            .collect();
        assert_eq!(pair.len(), 2);
        assert!(pair[0].center.dist_f64(&pair[1].center.conj()) < 1e-60);
        for c in &roots {
            assert!(horner(p.coeffs(), &c.center).abs_f64() < 2f64.powi(-128));
        }
    }

    #[test]
    fn huge_coefficient_range_uses_mp_start() {
        // (z - 10^-400)(z - 10^400) has coefficients outside f64 range
        let prec = 512;
        let small = BigComplex::parse("1e-400", prec).unwrap();
        let big = BigComplex::parse("1e400", prec).unwrap();
        let p = Poly::new(vec![
            BigComplex::one(prec),
            -&(&small + &big),
            BigComplex::one(prec),
        ]);
        let r = poly_roots(&p, prec).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r[0].center.dist(&small) < Float::with_val(prec, Float::i_exp(1, -1500)));
        let rel = Float::with_val(prec, r[1].center.dist(&big) / big.abs());
        assert!(rel < 1e-100);
    }

    #[test]
    fn reconstruction_round_trip() {
        let prec = 256;
        let p = Poly::new(
            ["3", "-1+2i", "1/7", "0.5i", "-2", "1"]
                .iter()
                .map(|s| BigComplex::parse(s, prec).unwrap())
                .collect(),
        );
        let q = poly_from_roots(&poly_roots(&p, prec).unwrap(), prec);
        for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
            assert!(a.dist_f64(b) < 2f64.powi(-100));
        }
    }
}
