//! Koenigs (Poincaré) linearization at a repelling fixed point.

use num_complex::Complex64;
use rug::Float;

use crate::algebra::{BigComplex, Poly};
use crate::error::{Error, Result};
use crate::ratmap::{RationalMap, SpherePoint};

/// Number of samples used for the functional-equation residual check.
pub const RESIDUAL_SAMPLES: usize = 32;
const NW_SAMPLES: usize = 128;

/// The series `ψ(z) = o + z + c_2 z^2 + … + c_N z^N` with `f(ψ(z)) = ψ(λz)`,
/// and a radius on which it is trusted to be injective.
#[derive(Clone, Debug)]
pub struct KoenigsChart {
    pub o: BigComplex,
    pub lambda: BigComplex,
    /// `[o, 1, c_2, …, c_N]`.
    pub coeffs: Vec<BigComplex>,
    deriv: Vec<BigComplex>,
    /// Injectivity radius: the smaller of the truncation-tail radius, the
    /// radius where `Re ψ' > 0` on sampled circles, and 1.
    pub r_inj: f64,
    pub prec: u32,
}

/// Taylor coefficients of `f(o + h)` up to `h^order`.
pub fn taylor_at(
    f: &RationalMap,
    o: &BigComplex,
    order: usize,
    prec: u32,
) -> Result<Vec<BigComplex>> {
    let to_mp = |p: &Poly<crate::algebra::Scalar>| -> Poly<BigComplex> { p.map(|c| c.to_mp(prec)) };
    let p = to_mp(f.num()).taylor_shift(o);
    let q = to_mp(f.den()).taylor_shift(o);
    let zero = BigComplex::zero(prec);
    let pk = |k: usize| p.coeffs().get(k).cloned().unwrap_or_else(|| zero.clone());
    let qk = |k: usize| q.coeffs().get(k).cloned().unwrap_or_else(|| zero.clone());
    let q0 = qk(0);
    if q0.is_exact_zero() {
        return Err(Error::BadParameter("point is a pole of the map".into()));
    }
    let mut a: Vec<BigComplex> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut acc = pk(k);
        for j in 1..=k.min(q.coeffs().len().saturating_sub(1)) {
            acc = &acc - &(&qk(j) * &a[k - j]);
        }
        a.push(&acc / &q0);
    }
    Ok(a)
}

/// Solves `(λ^k - λ) c_k = [z^k] Σ_{j≥2} a_j h^j` with `h = ψ - o`.
fn koenigs_coefficients(
    a: &[BigComplex],
    lambda: &BigComplex,
    order: usize,
    prec: u32,
) -> Vec<BigComplex> {
    let zero = BigComplex::zero(prec);
    // pw[j][k] = [z^k] h^j
    let mut pw = vec![vec![zero.clone(); order + 1]; order + 1];
    let mut c = vec![zero.clone(); order + 1];
    c[1] = BigComplex::one(prec);
    pw[1][1] = c[1].clone();
    let mut lam_k = lambda.clone();
    for k in 2..=order {
        lam_k = &lam_k * lambda;
        let mut rhs = zero.clone();
        for j in 2..=k {
            // h^j = h · h^(j-1); h^(j-1) starts at z^(j-1)
            let mut s = zero.clone();
            for i in 1..=k - (j - 1) {
                if !c[i].is_exact_zero() && !pw[j - 1][k - i].is_exact_zero() {
                    s = &s + &(&c[i] * &pw[j - 1][k - i]);
                }
            }
            pw[j][k] = s;
            if j < a.len() && !a[j].is_exact_zero() {
                rhs = &rhs + &(&a[j] * &pw[j][k]);
            }
        }
        c[k] = &rhs / &(&lam_k - lambda);
        pw[1][k] = c[k].clone();
    }
    c
}

pub fn koenigs_chart(
    f: &RationalMap,
    o: &SpherePoint,
    order: usize,
    prec: u32,
) -> Result<KoenigsChart> {
    let o = o.to_mp(prec).ok_or_else(|| {
        Error::BadParameter(
            "chart at infinity is not supported; conjugate the point to a finite one".into(),
        )
    })?;
    if order < 2 {
        return Err(Error::BadParameter(
            "series order must be at least 2".into(),
        ));
    }
    let a = taylor_at(f, &o, order, prec)?;
    let drift = a[0].dist_f64(&o);
    if drift > 2f64.powf(-(prec as f64) / 4.0) * o.abs_f64().max(1.0) {
        return Err(Error::BadParameter(format!(
            "point is not fixed (|f(o) - o| = {drift:e})"
        )));
    }
    let lambda = a[1].clone();
    if lambda.abs_f64() <= 1.0 + 1e-8 {
        return Err(Error::NotRepelling(lambda.abs_f64()));
    }
    let mut coeffs = koenigs_coefficients(&a, &lambda, order, prec);
    coeffs[0] = o.clone();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::SeriesDiverged(order));
    }
    let deriv: Vec<BigComplex> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.mul_i64(k as i64))
        .collect();
    let r_tail = tail_radius(&coeffs, prec);
    if !(r_tail > 1e-12) {
        return Err(Error::SeriesDiverged(order));
    }
    let r_nw = noshiro_radius(&deriv, r_tail.min(1.0));
    let mut chart = KoenigsChart {
        o,
        lambda,
        coeffs,
        deriv,
        r_inj: r_tail.min(r_nw).min(1.0),
        prec,
    };
    // shrink until the functional equation holds on the sample circle
    let start = chart.r_inj;
    let tol = 2f64.powf(-(prec as f64) / 2.0) * chart.o.abs_f64().max(1.0);
    while chart.functional_residual(f) > tol {
        chart.r_inj *= 0.8;
        if chart.r_inj < start * 1e-3 {
            return Err(Error::SeriesDiverged(order));
        }
    }
    Ok(chart)
}

/// Largest `r` with every trailing term `|c_k| r^k` below `2^(-prec/2 - 4)`.
fn tail_radius(coeffs: &[BigComplex], prec: u32) -> f64 {
    let n = coeffs.len() - 1;
    let target = -(prec as f64) / 2.0 - 4.0;
    let mut r = f64::INFINITY;
    for k in n.saturating_sub(7).max(2)..=n {
        let l = coeffs[k].log2_abs();
        if l == f64::NEG_INFINITY {
            continue;
        }
        r = r.min(((target - l) / k as f64).exp2());
    }
    r
}

/// Noshiro–Warschawski: `Re ψ' > 0` on a disk makes `ψ` injective there.
/// The minimum of the harmonic `Re ψ'` over a disk sits on its boundary, so
/// circles are sampled and the radius bisected.
fn noshiro_radius(deriv: &[BigComplex], r_max: f64) -> f64 {
    let d: Vec<Complex64> = deriv
        .iter()
        .map(|c| {
            let (re, im) = c.to_c64();
            Complex64::new(re, im)
        })
        .collect();
    let min_re = |r: f64| -> f64 {
        (0..NW_SAMPLES)
            .map(|k| {
                let z = Complex64::from_polar(
                    r,
                    2.0 * std::f64::consts::PI * k as f64 / NW_SAMPLES as f64,
                );
                d.iter()
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
                    .re
            })
            .fold(f64::INFINITY, f64::min)
    };
    // keep a little positivity margin for the sampling
    if min_re(r_max) > 0.05 {
        return r_max;
    }
    let (mut lo, mut hi) = (0.0, r_max);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if min_re(mid) > 0.05 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

impl KoenigsChart {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn psi(&self, z: &BigComplex) -> BigComplex {
        horner(&self.coeffs, z)
    }

    pub fn psi_prime(&self, z: &BigComplex) -> BigComplex {
        horner(&self.deriv, z)
    }

    /// Max of `|f(ψ(z)) - ψ(λz)|` over samples on `|z| = r_inj/|λ|`.
    pub fn functional_residual(&self, f: &RationalMap) -> f64 {
        let numeric = f.numeric(self.prec);
        let r = Float::with_val(self.prec, self.r_inj / self.lambda.abs_f64());
        let mut worst: f64 = 0.0;
        for k in 0..RESIDUAL_SAMPLES {
            let z =
                BigComplex::root_of_unity(self.prec, 2 * k as i64 + 1, 2 * RESIDUAL_SAMPLES as i64)
                    .mul_real(&r);
            let lhs = match numeric.eval(&self.psi(&z)) {
                Some(v) => v,
                None => return f64::INFINITY,
            };
            let rhs = self.psi(&(&z * &self.lambda));
            worst = worst.max(lhs.dist_f64(&rhs));
        }
        worst
    }

    /// `ψ⁻¹(x)` inside the disk of radius `r_inj`, by Newton from `x - o`
    /// with a straight-line homotopy as fallback.
    pub fn psi_inv(&self, x: &BigComplex) -> Option<BigComplex> {
        self.psi_inv_from(x, &(x - &self.o))
    }

    /// `ψ⁻¹(x)` with a caller-supplied starting guess.
    pub fn psi_inv_from(&self, x: &BigComplex, guess: &BigComplex) -> Option<BigComplex> {
        if let Some(w) = self.newton_inverse(x, guess) {
            return Some(w);
        }
        // homotopy x_t = o + t (x - o)
        let steps = 16;
        let mut w = BigComplex::zero(self.prec);
        for s in 1..=steps {
            let t = BigComplex::from_f64(self.prec, s as f64 / steps as f64, 0.0);
            let xt = &self.o + &(&(x - &self.o) * &t);
            w = self.newton_inverse(&xt, &w)?;
        }
        Some(w)
    }

    fn newton_inverse(&self, x: &BigComplex, guess: &BigComplex) -> Option<BigComplex> {
        let mut w = guess.clone();
        let eps = 2f64.powf(-(self.prec as f64) + 16.0);
        let limit = 1.5 * self.r_inj;
        for _ in 0..80 {
            let val = &self.psi(&w) - x;
            let d = self.psi_prime(&w);
            if d.is_exact_zero() {
                return None;
            }
            let mut step = &val / &d;
            // damp steps that would leave the chart
            let mut tries = 0;
            while (&w - &step).abs_f64() > limit && tries < 20 {
                step = step.mul_f64(0.5);
                tries += 1;
            }
            w = &w - &step;
            if step.abs_f64() <= eps * w.abs_f64().max(1e-30) || step.is_exact_zero() {
                let ok = w.abs_f64() <= self.r_inj * (1.0 + 1e-12)
                    && self.psi(&w).dist_f64(x)
                        <= 2f64.powf(-(self.prec as f64) / 2.0) * x.abs_f64().max(1.0);
                return ok.then_some(w);
            }
        }
        None
    }

    /// The inverse branch `g = ψ ∘ (w ↦ w/λ) ∘ ψ⁻¹` with `f ∘ g = id`.
    pub fn g(&self, x: &BigComplex) -> Option<BigComplex> {
        let w = self.psi_inv(x)?;
        Some(self.psi(&(&w / &self.lambda)))
    }
}

fn horner(c: &[BigComplex], z: &BigComplex) -> BigComplex {
    let mut acc = BigComplex::zero(z.prec());
    for a in c.iter().rev() {
        acc = &(&acc * z) + a;
    }
    acc
}
