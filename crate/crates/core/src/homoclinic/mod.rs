//! Homoclinic orbits of repelling fixed points, their adjoint periodic
//! points, and the asymptotic law of the adjoint multipliers.

mod adjoint;
mod chart;
mod orbit;

pub use adjoint::{
    adjoint_sequence, exceptional_criterion, fit_asymptotics, AdjointEntry, AdjointSequence,
    AsymptoticFit,
};
pub use chart::{koenigs_chart, taylor_at, KoenigsChart};
pub use orbit::{
    certify_return_time, find_homoclinic, find_homoclinic_with, good_return_time, HomoclinicOrbit,
    ReturnCertificate,
};

use serde::Serialize;

use crate::algebra::BigComplex;
use crate::error::{Error, Result};
use crate::exceptional::ExceptionalVerdict;
use crate::ratmap::{digits_for, NumericMap, RationalMap, SpherePoint};

/// Knobs shared by the homoclinic pipeline.
#[derive(Clone, Debug)]
pub struct HomoclinicOptions {
    pub prec_bits: u32,
    /// Truncation order of the Koenigs series.
    pub order: usize,
    /// The working domain is `U = ψ(D(safety · r_inj))`.
    pub safety: f64,
    /// `U_m` must sit inside `ψ(D((1 - margin) · R))`.
    pub margin: f64,
    pub depth_cap: usize,
    /// Candidates kept per level of the backward search.
    pub beam: usize,
    pub boundary_samples: usize,
    /// How far past the entry index a return time is searched for.
    pub return_cap: usize,
}

impl Default for HomoclinicOptions {
    fn default() -> Self {
        HomoclinicOptions {
            prec_bits: 256,
            order: 64,
            safety: 0.8,
            margin: 0.1,
            depth_cap: 40,
            beam: 64,
            boundary_samples: 64,
            return_cap: 40,
        }
    }
}

/// Everything the homoclinic test produces for one orbit.
#[derive(Clone, Debug)]
pub struct HomoclinicRun {
    pub chart: KoenigsChart,
    pub orbit: HomoclinicOrbit,
    pub return_time: usize,
    pub sequence: AdjointSequence,
    pub fit: AsymptoticFit,
    pub verdict: ExceptionalVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomoclinicReport {
    pub fixed_point: String,
    pub lambda: String,
    pub injectivity_radius: f64,
    pub orbit: Vec<String>,
    pub seed_index: usize,
    pub entry_index: usize,
    pub return_time: usize,
    /// `(i, μ_i)`.
    pub multipliers: Vec<(usize, String)>,
    pub fit: AsymptoticFit,
    pub verdict: ExceptionalVerdict,
}

impl HomoclinicRun {
    pub fn report(&self) -> HomoclinicReport {
        let digits = digits_for(self.chart.prec).min(40);
        HomoclinicReport {
            fixed_point: self.chart.o.to_string_digits(digits),
            lambda: self.chart.lambda.to_string_digits(digits),
            injectivity_radius: self.chart.r_inj,
            orbit: self
                .orbit
                .points
                .iter()
                .map(|p| p.to_string_digits(digits))
                .collect(),
            seed_index: self.orbit.seed_index,
            entry_index: self.orbit.entry_index,
            return_time: self.return_time,
            multipliers: self
                .sequence
                .entries
                .iter()
                .map(|e| (e.i, e.mu.to_string_digits(digits)))
                .collect(),
            fit: self.fit.clone(),
            verdict: self.verdict.clone(),
        }
    }
}

/// Newton-polishes an approximate fixed point of `f`.
pub fn polish_fixed_point(f: &RationalMap, o: &SpherePoint, prec: u32) -> Result<SpherePoint> {
    let Some(z) = o.to_mp(prec) else {
        return Ok(SpherePoint::Infinity);
    };
    let numeric = f.numeric(prec);
    let z = newton_fixed_point(&numeric, 1, &z)
        .ok_or_else(|| Error::BadParameter("no fixed point near the given point".into()))?;
    if z.dist_f64(&o.to_mp(prec).unwrap()) > 0.1 * z.abs_f64().max(1.0) {
        return Err(Error::BadParameter(
            "no fixed point near the given point".into(),
        ));
    }
    Ok(SpherePoint::mp(z))
}

/// Newton-polishes an approximate preimage `seed` of the fixed point `o`
/// under the first iterate (up to `depth`) that brings it near `o`.
pub fn polish_preimage(
    f: &RationalMap,
    o: &SpherePoint,
    seed: &SpherePoint,
    depth: usize,
    prec: u32,
) -> Result<SpherePoint> {
    let (Some(o), Some(s)) = (o.to_mp(prec), seed.to_mp(prec)) else {
        return Ok(seed.clone());
    };
    let numeric = f.numeric(prec);
    let near = 1e-2 * o.abs_f64().max(1.0);
    let mut y = s.clone();
    for k in 1..=depth {
        let Some(v) = numeric.eval(&y) else { break };
        y = v;
        if y.dist_f64(&o) < near {
            let polished = solve_iterate(&numeric, k, &o, &s)
                .ok_or_else(|| Error::BadParameter("seed preimage does not polish".into()))?;
            return Ok(SpherePoint::mp(polished));
        }
    }
    Err(Error::BadParameter(
        "seed does not reach the fixed point under iteration".into(),
    ))
}

/// Chart, homoclinic orbit from `seed`, good return time `m`, adjoint
/// sequence for `i ∈ m..=m + extra`, fit and criterion.
pub fn run_homoclinic(
    f: &RationalMap,
    o: &SpherePoint,
    seed: &SpherePoint,
    extra: usize,
    tol: f64,
    window: usize,
    opts: &HomoclinicOptions,
) -> Result<HomoclinicRun> {
    let prec = opts.prec_bits;
    let o = polish_fixed_point(f, o, prec)?;
    let seed = polish_preimage(f, &o, seed, opts.depth_cap, prec)?;
    let chart = koenigs_chart(f, &o, opts.order, prec)?;
    let orbit = find_homoclinic_with(f, &chart, &seed, opts.depth_cap, opts)?;
    let return_time = good_return_time(f, &orbit, &chart, opts)?;
    let sequence = adjoint_sequence(f, &orbit, &chart, return_time, return_time + extra)?;
    let fit = fit_asymptotics(&sequence.lambda, &sequence.multipliers())?;
    let verdict = exceptional_criterion(&sequence, tol, window);
    Ok(HomoclinicRun {
        chart,
        orbit,
        return_time,
        sequence,
        fit,
        verdict,
    })
}

/// `(f^n(z), (f^n)'(z))`, or `None` if the orbit meets a pole.
pub(crate) fn iterate_with_derivative(
    f: &NumericMap,
    z: &BigComplex,
    n: usize,
) -> Option<(BigComplex, BigComplex)> {
    let mut y = z.clone();
    let mut d = BigComplex::one(z.prec());
    for _ in 0..n {
        let (v, dv) = f.eval_with_derivative(&y)?;
        d = &d * &dv;
        y = v;
    }
    Some((y, d))
}

/// Newton on `f^n(y) = target` from `seed`. Returns the root once the
/// step stalls below `2^(-prec/2)` relative size.
pub(crate) fn solve_iterate(
    f: &NumericMap,
    n: usize,
    target: &BigComplex,
    seed: &BigComplex,
) -> Option<BigComplex> {
    let prec = seed.prec();
    let mut y = seed.clone();
    let fine = 2f64.powf(-(prec as f64) + 24.0);
    let coarse = 2f64.powf(-(prec as f64) / 2.0);
    let mut last = f64::INFINITY;
    for _ in 0..40 {
        let (v, d) = iterate_with_derivative(f, &y, n)?;
        if d.is_exact_zero() {
            return None;
        }
        let step = &(&v - target) / &d;
        let s = step.abs_f64();
        y = &y - &step;
        let scale = y.abs_f64().max(1e-300);
        if s <= fine * scale || step.is_exact_zero() {
            return Some(y);
        }
        if s >= last * 0.5 && s <= coarse * scale {
            return Some(y);
        }
        last = s;
    }
    None
}

/// Follows the solution of `f^n(y) = path(s)` from `s = 0` (where
/// `f^n(y0) = path(0)`) to `s = 1`.
pub(crate) fn continue_preimage(
    f: &NumericMap,
    n: usize,
    y0: &BigComplex,
    path: &dyn Fn(f64) -> BigComplex,
) -> Option<BigComplex> {
    let prec = y0.prec();
    let coarse = 2f64.powf(-(prec as f64) / 2.0);
    let mut s: f64 = 0.0;
    let mut ds: f64 = 1.0 / 16.0;
    let mut y = y0.clone();
    while s < 1.0 {
        let s1 = (s + ds).min(1.0);
        let x1 = path(s1);
        let attempt = (|| {
            let (v, d) = iterate_with_derivative(f, &y, n)?;
            let pred = &y - &(&(&v - &x1) / &d);
            let moved = pred.dist_f64(&y);
            let (v1, d1) = iterate_with_derivative(f, &pred, n)?;
            let first = (&(&v1 - &x1) / &d1).abs_f64();
            if first > 0.1 * moved + coarse * pred.abs_f64().max(1e-300) {
                return None;
            }
            solve_iterate(f, n, &x1, &pred)
        })();
        match attempt {
            Some(next) => {
                y = next;
                s = s1;
                ds = (ds * 1.5).min(0.25);
            }
            None => {
                ds *= 0.5;
                if ds < 1e-7 {
                    return None;
                }
            }
        }
    }
    Some(y)
}

/// Winding number of a closed sampled loop around 0; `None` when two
/// consecutive samples are more than a quarter turn apart.
pub(crate) fn winding_number(values: &[BigComplex]) -> Option<i64> {
    let n = values.len();
    let mut total = 0.0;
    for k in 0..n {
        let a = &values[k];
        let b = &values[(k + 1) % n];
        if a.is_exact_zero() || b.is_exact_zero() {
            return None;
        }
        let (re, im) = (b / a).to_c64();
        let step = im.atan2(re);
        if step.abs() > std::f64::consts::FRAC_PI_2 {
            return None;
        }
        total += step;
    }
    Some((total / std::f64::consts::TAU).round() as i64)
}

/// Damped Newton on `f^n(z) - z`.
pub(crate) fn newton_fixed_point(
    f: &NumericMap,
    n: usize,
    seed: &BigComplex,
) -> Option<BigComplex> {
    let prec = seed.prec();
    let one = BigComplex::one(prec);
    let residual = |z: &BigComplex| -> Option<(BigComplex, BigComplex)> {
        let (v, d) = iterate_with_derivative(f, z, n)?;
        Some((&v - z, &d - &one))
    };
    let mut z = seed.clone();
    let (mut r, mut dr) = residual(&z)?;
    let fine = 2f64.powf(-(prec as f64) + 32.0);
    for _ in 0..200 {
        if dr.is_exact_zero() {
            return None;
        }
        let mut step = &r / &dr;
        if step.abs_f64() <= fine * z.abs_f64().max(1.0) {
            return Some(&z - &step);
        }
        let size = r.abs_f64();
        let mut accepted = None;
        for _ in 0..30 {
            let cand = &z - &step;
            if let Some((rc, dc)) = residual(&cand) {
                if rc.abs_f64() < size {
                    accepted = Some((cand, rc, dc));
                    break;
                }
            }
            step = step.mul_f64(0.5);
        }
        let (zc, rc, dc) = accepted?;
        z = zc;
        r = rc;
        dr = dc;
    }
    None
}
