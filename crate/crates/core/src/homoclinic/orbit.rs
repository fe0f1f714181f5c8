//! Backward orbits from a repelling fixed point back into its chart, and
//! the return time after which the inverse branches nest.

use std::cmp::Ordering;

use rug::Float;
use serde::Serialize;

use super::{
    continue_preimage, iterate_with_derivative, winding_number, HomoclinicOptions, KoenigsChart,
};
use crate::algebra::BigComplex;
use crate::error::{Error, Result};
use crate::ratmap::{RationalMap, SpherePoint};

const MAX_BOUNDARY_SAMPLES: usize = 1024;

/// `o_0 = o, o_1, …` with `f(o_{i+1}) = o_i` and `o_i → o`. Points up to
/// the entry index are stored; later ones are `ψ(w_entry / λ^(i - entry))`.
#[derive(Clone, Debug)]
pub struct HomoclinicOrbit {
    pub o: BigComplex,
    pub lambda: BigComplex,
    /// `o_0, …, o_entry`.
    pub points: Vec<BigComplex>,
    /// Index of the seed preimage `a` in the orbit.
    pub seed_index: usize,
    /// First index whose point lies in the working domain `U`.
    pub entry_index: usize,
    /// Chart coordinate of `o_entry`.
    pub w_entry: BigComplex,
}

impl HomoclinicOrbit {
    /// Chart coordinate `ψ⁻¹(o_i)` for `i ≥ entry_index`.
    pub fn w(&self, i: usize) -> BigComplex {
        assert!(i >= self.entry_index);
        &self.w_entry / &self.lambda.powi((i - self.entry_index) as i64)
    }

    pub fn point(&self, chart: &KoenigsChart, i: usize) -> BigComplex {
        if i <= self.entry_index {
            self.points[i].clone()
        } else {
            chart.psi(&self.w(i))
        }
    }
}

fn working_radius(chart: &KoenigsChart, opts: &HomoclinicOptions) -> f64 {
    opts.safety * chart.r_inj
}

/// Largest `|ψ(w) - o|` on the circle `|w| = radius`, sampled.
fn image_radius(chart: &KoenigsChart, radius: f64) -> f64 {
    let r = Float::with_val(chart.prec, radius);
    (0..64)
        .map(|k| {
            chart
                .psi(&BigComplex::root_of_unity(chart.prec, k, 64).mul_real(&r))
                .dist_f64(&chart.o)
        })
        .fold(0.0, f64::max)
}

/// Walks backward from the seed `a` (a preimage of `o` under some iterate)
/// until a preimage lands in `U = ψ(D(safety · r_inj))`. The backward tree
/// is searched level by level keeping the candidates nearest to `o`; paths
/// through infinity are not explored.
pub fn find_homoclinic(
    f: &RationalMap,
    chart: &KoenigsChart,
    seed: &SpherePoint,
    depth_cap: usize,
) -> Result<HomoclinicOrbit> {
    find_homoclinic_with(
        f,
        chart,
        seed,
        depth_cap,
        &HomoclinicOptions {
            prec_bits: chart.prec,
            ..Default::default()
        },
    )
}

pub fn find_homoclinic_with(
    f: &RationalMap,
    chart: &KoenigsChart,
    seed: &SpherePoint,
    depth_cap: usize,
    opts: &HomoclinicOptions,
) -> Result<HomoclinicOrbit> {
    let prec = chart.prec;
    let o_pt = SpherePoint::mp(chart.o.clone());
    let same = 2f64.powf(-(prec as f64) / 4.0);
    if seed.is_infinity() {
        return Err(Error::BadParameter("seed preimage must be finite".into()));
    }
    if seed.chordal_distance(&o_pt, prec) < same {
        return Err(Error::BadParameter(
            "seed preimage coincides with the fixed point".into(),
        ));
    }
    // forward orbit of the seed until it reaches o
    let mut forward = vec![seed.clone()];
    let mut x = seed.clone();
    let mut seed_index = None;
    for step in 1..=depth_cap.max(1) {
        x = f.evaluate(&x);
        if x.chordal_distance(&o_pt, prec) < same {
            seed_index = Some(step);
            break;
        }
        forward.push(x.clone());
    }
    let seed_index = seed_index.ok_or_else(|| {
        Error::BadParameter("seed does not reach the fixed point under iteration".into())
    })?;
    let mut points = vec![chart.o.clone()];
    for p in forward.iter().rev() {
        points.push(
            p.to_mp(prec)
                .ok_or_else(|| Error::BadParameter("seed orbit passes through infinity".into()))?,
        );
    }

    let critical: Vec<SpherePoint> = f
        .critical_points(prec)?
        .into_iter()
        .map(|c| c.point)
        .collect();
    let exclusion = 2f64.powf(-(prec as f64) / 8.0);
    let near_critical = |z: &BigComplex| {
        critical
            .iter()
            .any(|c| c.chordal_distance(&SpherePoint::mp(z.clone()), prec) < exclusion)
    };
    for (i, p) in points.iter().enumerate().skip(1) {
        if near_critical(p) {
            return Err(Error::CriticalCollision(i));
        }
    }

    let radius = working_radius(chart, opts);
    let reach = image_radius(chart, radius) * 1.05;
    let land = |y: &BigComplex| -> Option<BigComplex> {
        if y.dist_f64(&chart.o) > reach {
            return None;
        }
        chart.psi_inv(y).filter(|w| w.abs_f64() <= radius)
    };

    if let Some(w) = land(&points[seed_index]) {
        return Ok(HomoclinicOrbit {
            o: chart.o.clone(),
            lambda: chart.lambda.clone(),
            points,
            seed_index,
            entry_index: seed_index,
            w_entry: w,
        });
    }

    let mut frontier: Vec<Vec<BigComplex>> = vec![Vec::new()];
    for _depth in 1..=depth_cap {
        let mut next: Vec<Vec<BigComplex>> = Vec::new();
        for path in &frontier {
            let tip = path.last().unwrap_or(&points[seed_index]);
            for (pre, mult) in f.preimages(&SpherePoint::mp(tip.clone()), prec)? {
                let Some(y) = pre.to_mp(prec) else { continue };
                if mult > 1 || near_critical(&y) || y.dist_f64(&chart.o) < same {
                    continue;
                }
                let mut p = path.clone();
                p.push(y);
                next.push(p);
            }
        }
        let mut landed: Vec<(BigComplex, Vec<BigComplex>)> = Vec::new();
        for p in &next {
            if let Some(w) = land(p.last().unwrap()) {
                landed.push((w, p.clone()));
            }
        }
        if let Some((w, path)) = landed.into_iter().min_by(|a, b| {
            a.0.abs_f64()
                .partial_cmp(&b.0.abs_f64())
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.1.last().unwrap().lex_cmp(b.1.last().unwrap()))
        }) {
            points.extend(path);
            let entry_index = points.len() - 1;
            return Ok(HomoclinicOrbit {
                o: chart.o.clone(),
                lambda: chart.lambda.clone(),
                points,
                seed_index,
                entry_index,
                w_entry: w,
            });
        }
        next.sort_by(|a, b| {
            let (ya, yb) = (a.last().unwrap(), b.last().unwrap());
            ya.dist_f64(&chart.o)
                .partial_cmp(&yb.dist_f64(&chart.o))
                .unwrap_or(Ordering::Equal)
                .then_with(|| ya.lex_cmp(yb))
        });
        next.truncate(opts.beam.max(1));
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Err(Error::DepthExceeded(depth_cap))
}

/// Evidence for (or against) `m` being a good return time.
#[derive(Clone, Debug, Serialize)]
pub struct ReturnCertificate {
    pub m: usize,
    pub samples: usize,
    /// Winding of `∂U_m` around `o_m`; 1 for a simple loop.
    pub winding_center: Option<i64>,
    /// Winding of `(f^m)'` along `∂U_m`; 0 when `U_m` holds no critical point.
    pub critical_winding: Option<i64>,
    /// `max |ψ⁻¹(y)| / R` over the boundary samples.
    pub containment: f64,
    pub ok: bool,
    #[serde(skip)]
    pub boundary: Vec<BigComplex>,
}

impl ReturnCertificate {
    /// Center and radius of a disk containing the sampled boundary.
    pub fn bounding_disk(&self) -> (BigComplex, f64) {
        bounding_disk(&self.boundary)
    }
}

pub(crate) fn bounding_disk(points: &[BigComplex]) -> (BigComplex, f64) {
    let prec = points[0].prec();
    let mut c = BigComplex::zero(prec);
    for p in points {
        c = &c + p;
    }
    let c = c.div_real(&Float::with_val(prec, points.len()));
    let r = points.iter().map(|p| p.dist_f64(&c)).fold(0.0, f64::max);
    (c, r)
}

/// Checks the return-time conditions for `m`: the component `U_m` of
/// `f^(-m)(U)` through `o_m` is traced as the continuation of `∂U`, must
/// sit inside `ψ(D((1 - margin) R))`, wind once around `o_m`, and carry no
/// critical point of `f^m`.
pub fn certify_return_time(
    f: &RationalMap,
    orbit: &HomoclinicOrbit,
    chart: &KoenigsChart,
    m: usize,
    opts: &HomoclinicOptions,
) -> Result<ReturnCertificate> {
    if m < orbit.entry_index {
        return Err(Error::BadParameter(format!(
            "return time {m} precedes the entry index {}",
            orbit.entry_index
        )));
    }
    let prec = chart.prec;
    let numeric = f.numeric(prec);
    let radius = working_radius(chart, opts);
    let r = Float::with_val(prec, radius);
    let o_m = orbit.point(chart, m);
    let w_m = orbit.w(m);
    let boundary_point = |k: usize, n: usize| -> Option<BigComplex> {
        let dir = BigComplex::root_of_unity(prec, k as i64, n as i64).mul_real(&r);
        let path = |s: f64| chart.psi(&dir.mul_f64(s));
        continue_preimage(&numeric, m, &o_m, &path)
    };
    let fail = |samples: usize| ReturnCertificate {
        m,
        samples,
        winding_center: None,
        critical_winding: None,
        containment: f64::INFINITY,
        ok: false,
        boundary: Vec::new(),
    };

    let mut n = opts.boundary_samples.max(8);
    let mut boundary: Vec<BigComplex> = Vec::with_capacity(n);
    for k in 0..n {
        match boundary_point(k, n) {
            Some(y) => boundary.push(y),
            None => return Ok(fail(n)),
        }
    }
    let (winding_center, critical_winding) = loop {
        let centered: Vec<BigComplex> = boundary.iter().map(|y| y - &o_m).collect();
        let derivs: Option<Vec<BigComplex>> = boundary
            .iter()
            .map(|y| iterate_with_derivative(&numeric, y, m).map(|(_, d)| d))
            .collect();
        let Some(derivs) = derivs else {
            return Ok(fail(n));
        };
        let wc = winding_number(&centered);
        let wd = winding_number(&derivs);
        if (wc.is_some() && wd.is_some()) || n >= MAX_BOUNDARY_SAMPLES {
            break (wc, wd);
        }
        // insert midpoints
        let mut refined = Vec::with_capacity(2 * n);
        for (k, y) in boundary.iter().enumerate() {
            refined.push(y.clone());
            match boundary_point(2 * k + 1, 2 * n) {
                Some(mid) => refined.push(mid),
                None => return Ok(fail(2 * n)),
            }
        }
        boundary = refined;
        n *= 2;
    };

    let mut containment: f64 = 0.0;
    let mut guess = w_m.clone();
    for y in &boundary {
        match chart.psi_inv_from(y, &guess) {
            Some(w) => {
                containment = containment.max(w.abs_f64() / radius);
                guess = w;
            }
            None => {
                containment = f64::INFINITY;
                break;
            }
        }
    }
    let ok = winding_center == Some(1)
        && critical_winding == Some(0)
        && containment <= 1.0 - opts.margin;
    Ok(ReturnCertificate {
        m,
        samples: n,
        winding_center,
        critical_winding,
        containment,
        ok,
        boundary,
    })
}

/// Smallest `m ≥ entry_index` passing [`certify_return_time`].
pub fn good_return_time(
    f: &RationalMap,
    orbit: &HomoclinicOrbit,
    chart: &KoenigsChart,
    opts: &HomoclinicOptions,
) -> Result<usize> {
    if !(opts.margin > 0.0 && opts.margin < 1.0) {
        return Err(Error::BadParameter(format!(
            "margin must lie in (0, 1), got {}",
            opts.margin
        )));
    }
    let last = orbit.entry_index + opts.return_cap;
    for m in orbit.entry_index..=last {
        if certify_return_time(f, orbit, chart, m, opts)?.ok {
            return Ok(m);
        }
    }
    Err(Error::NoReturnFound(last))
}
