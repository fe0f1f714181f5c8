//! Horseshoes built from homoclinic orbits, their coded periodic orbits,
//! and the Livsic test for linearity of `log |df|`.

use rug::Float;
use serde::Serialize;

use crate::algebra::BigComplex;
use crate::error::{Error, Result};
use crate::homoclinic::{
    certify_return_time, continue_preimage, iterate_with_derivative, newton_fixed_point,
    solve_iterate, HomoclinicOptions, HomoclinicOrbit, KoenigsChart,
};
use crate::ratmap::{digits_for, NumericMap, RationalMap};

/// Default Livsic variance threshold.
pub const LINEARITY_THRESHOLD: f64 = 1e-12;

const BOUNDARY_SAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    /// `g^m`, the local inverse through the fixed point.
    Local,
    /// The component of `f^(-m)(V)` through `o_m` of the given orbit.
    Orbit(usize),
}

/// An inverse branch of `f^m` from the base disk `V` into a disk.
#[derive(Clone, Debug)]
pub struct Branch {
    /// 1-based symbol.
    pub label: usize,
    pub kind: BranchKind,
    /// Image of `o` under the branch.
    pub anchor: BigComplex,
    pub disk_center: BigComplex,
    pub disk_radius: f64,
    /// `max |h'|` on `V`, read off the branch boundary.
    pub contraction: f64,
}

#[derive(Clone, Debug)]
pub struct Horseshoe {
    pub o: BigComplex,
    pub lambda: BigComplex,
    pub m: usize,
    /// Chart radius of `V = ψ(D(R))`.
    pub radius: f64,
    pub branches: Vec<Branch>,
    /// Largest branch contraction.
    pub kappa: f64,
    chart: KoenigsChart,
}

impl Horseshoe {
    pub fn k(&self) -> usize {
        self.branches.len()
    }

    /// Image of `x ∈ V` under branch `label`, seeded near `seed` if given.
    fn apply(
        &self,
        numeric: &NumericMap,
        label: usize,
        x: &BigComplex,
        seed: Option<&BigComplex>,
    ) -> Option<BigComplex> {
        let b = &self.branches[label - 1];
        let inside = |y: &BigComplex| y.dist_f64(&b.disk_center) <= b.disk_radius * 1.05;
        if b.kind == BranchKind::Local {
            let w = self.chart.psi_inv(x)?;
            return Some(self.chart.psi(&(&w / &self.lambda.powi(self.m as i64))));
        }
        if let Some(s) = seed {
            if let Some(y) = solve_iterate(numeric, self.m, x, s).filter(inside) {
                return Some(y);
            }
        }
        let w = self.chart.psi_inv(x)?;
        let path = |s: f64| self.chart.psi(&w.mul_f64(s));
        continue_preimage(numeric, self.m, &b.anchor, &path).filter(inside)
    }
}

fn chart_circle(chart: &KoenigsChart, radius: f64, n: usize) -> Vec<BigComplex> {
    let r = Float::with_val(chart.prec, radius);
    (0..n)
        .map(|k| chart.psi(&BigComplex::root_of_unity(chart.prec, k as i64, n as i64).mul_real(&r)))
        .collect()
}

fn bounding(points: &[BigComplex]) -> (BigComplex, f64) {
    let prec = points[0].prec();
    let mut c = BigComplex::zero(prec);
    for p in points {
        c = &c + p;
    }
    let c = c.div_real(&Float::with_val(prec, points.len()));
    let r = points.iter().map(|p| p.dist_f64(&c)).fold(0.0, f64::max);
    (c, r)
}

/// Inverse-branch contraction `max 1/|(f^m)'|` over the branch boundary.
fn contraction(numeric: &NumericMap, boundary: &[BigComplex], m: usize) -> f64 {
    boundary
        .iter()
        .map(|y| {
            iterate_with_derivative(numeric, y, m).map_or(f64::INFINITY, |(_, d)| 1.0 / d.abs_f64())
        })
        .fold(0.0, f64::max)
}

/// Builds the horseshoe whose branches are `g^m` through `o` and the
/// components `U_m^j` through each orbit's `o_m`. The return time is the
/// smallest `m` at which every orbit's return certificate holds, the branch
/// disks are pairwise disjoint, and every branch contracts.
pub fn build_horseshoe(
    f: &RationalMap,
    chart: &KoenigsChart,
    orbits: &[HomoclinicOrbit],
    opts: &HomoclinicOptions,
) -> Result<Horseshoe> {
    if orbits.is_empty() {
        return Err(Error::EmptyInput);
    }
    let prec = chart.prec;
    let same = 2f64.powf(-(prec as f64) / 4.0);
    for orbit in orbits {
        if orbit.o.dist_f64(&chart.o) > same * chart.o.abs_f64().max(1.0) {
            return Err(Error::BadParameter(
                "orbits must share the chart's fixed point".into(),
            ));
        }
    }
    let numeric = f.numeric(prec);
    let radius = opts.safety * chart.r_inj;
    let start = orbits.iter().map(|o| o.entry_index).max().unwrap().max(1);
    let mut overlap = None;
    'm: for m in start..=start + opts.return_cap {
        let local_boundary = chart_circle(
            chart,
            radius / chart.lambda.abs_f64().powi(m as i32),
            BOUNDARY_SAMPLES,
        );
        let (c, r) = bounding(&local_boundary);
        let mut branches = vec![Branch {
            label: 1,
            kind: BranchKind::Local,
            anchor: chart.o.clone(),
            disk_center: c,
            disk_radius: r,
            contraction: contraction(&numeric, &local_boundary, m),
        }];
        for (j, orbit) in orbits.iter().enumerate() {
            let cert = certify_return_time(f, orbit, chart, m, opts)?;
            if !cert.ok {
                continue 'm;
            }
            let (c, r) = bounding(&cert.boundary);
            branches.push(Branch {
                label: j + 2,
                kind: BranchKind::Orbit(j),
                anchor: orbit.point(chart, m),
                disk_center: c,
                disk_radius: r,
                contraction: contraction(&numeric, &cert.boundary, m),
            });
        }
        for a in 0..branches.len() {
            for b in a + 1..branches.len() {
                let (x, y) = (&branches[a], &branches[b]);
                if x.disk_center.dist_f64(&y.disk_center) <= x.disk_radius + y.disk_radius {
                    overlap = Some(format!(
                        "branches {} and {} overlap at m = {m}",
                        x.label, y.label
                    ));
                    continue 'm;
                }
            }
        }
        let kappa = branches.iter().map(|b| b.contraction).fold(0.0, f64::max);
        if kappa >= 1.0 {
            continue;
        }
        return Ok(Horseshoe {
            o: chart.o.clone(),
            lambda: chart.lambda.clone(),
            m,
            radius,
            branches,
            kappa,
            chart: chart.clone(),
        });
    }
    match overlap {
        Some(msg) => Err(Error::BranchOverlap(msg)),
        None => Err(Error::NoReturnFound(start + opts.return_cap)),
    }
}

/// The periodic point with itinerary `word` under `f^m`.
#[derive(Clone, Debug)]
pub struct CodedOrbit {
    /// Branch labels, 1-based.
    pub word: Vec<usize>,
    pub point: BigComplex,
    /// `(f^(n m))'` at the point, `n = word.len()`.
    pub multiplier: BigComplex,
    pub primitive: bool,
}

impl CodedOrbit {
    pub fn word_string(&self) -> String {
        self.word
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

fn is_primitive(word: &[usize]) -> bool {
    let n = word.len();
    (1..n)
        .filter(|p| n.is_multiple_of(*p))
        .all(|p| (0..n).any(|i| word[i] != word[i % p]))
}

/// All words of length `n` over `1..=k`, lexicographically.
fn words(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                (1..=k).map(move |s| {
                    let mut v = w.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    out
}

/// Every word of length `1..=max_len`: the composed inverse branches are
/// iterated to their fixed point, which is then polished by Newton on
/// `f^(n m)(z) - z` and checked against the itinerary.
pub fn periodic_words(h: &Horseshoe, f: &RationalMap, max_len: usize) -> Result<Vec<CodedOrbit>> {
    let prec = h.chart.prec;
    let numeric = f.numeric(prec);
    let mut out = Vec::new();
    for n in 1..=max_len {
        for word in words(h.k(), n) {
            out.push(coded_orbit(h, &numeric, word)?);
        }
    }
    Ok(out)
}

fn coded_orbit(h: &Horseshoe, numeric: &NumericMap, word: Vec<usize>) -> Result<CodedOrbit> {
    let n = word.len();
    let lost = || Error::BranchLost(format!("coded orbit {word:?} left its branch"));
    let mut xs: Vec<BigComplex> = word
        .iter()
        .map(|&s| h.branches[s - 1].anchor.clone())
        .collect();
    let mut seeded = false;
    for _ in 0..200 {
        let mut change: f64 = 0.0;
        for k in (0..n).rev() {
            let target = xs[(k + 1) % n].clone();
            let seed = seeded.then(|| xs[k].clone());
            let y = h
                .apply(numeric, word[k], &target, seed.as_ref())
                .ok_or_else(lost)?;
            change = change.max(y.dist_f64(&xs[k]));
            xs[k] = y;
        }
        seeded = true;
        if change <= 1e-12 * xs[0].abs_f64().max(1.0) {
            break;
        }
    }
    let period = n * h.m;
    let x = newton_fixed_point(numeric, period, &xs[0]).ok_or_else(lost)?;
    if x.dist_f64(&xs[0]) > 1e-9 * x.abs_f64().max(1.0) {
        return Err(lost());
    }
    // itinerary check
    let mut y = x.clone();
    for &s in &word {
        let b = &h.branches[s - 1];
        if y.dist_f64(&b.disk_center) > b.disk_radius * 1.05 {
            return Err(lost());
        }
        y = iterate_with_derivative(numeric, &y, h.m)
            .ok_or_else(lost)?
            .0;
    }
    let (_, multiplier) = iterate_with_derivative(numeric, &x, period).ok_or_else(lost)?;
    let primitive = is_primitive(&word);
    Ok(CodedOrbit {
        word,
        point: x,
        multiplier,
        primitive,
    })
}

/// `diam(V)·max_w 1/|μ_w|` over the words of each length: the first-order
/// size of the cylinders, evaluated at their periodic points.
pub fn cylinder_diameters(h: &Horseshoe, orbits: &[CodedOrbit]) -> Vec<(usize, f64)> {
    let diam = 2.0 * bounding(&chart_circle(&h.chart, h.radius, BOUNDARY_SAMPLES)).1;
    let max_len = orbits.iter().map(|o| o.word.len()).max().unwrap_or(0);
    (1..=max_len)
        .map(|n| {
            let worst = orbits
                .iter()
                .filter(|o| o.word.len() == n)
                .map(|o| 1.0 / o.multiplier.abs_f64())
                .fold(0.0, f64::max);
            (n, diam * worst)
        })
        .collect()
}

/// Smallest `|(f^m)'|` along the coded orbits.
pub fn expansion_min(h: &Horseshoe, f: &RationalMap, orbits: &[CodedOrbit]) -> f64 {
    let numeric = f.numeric(h.chart.prec);
    let mut least = f64::INFINITY;
    for o in orbits {
        let mut y = o.point.clone();
        for _ in 0..o.word.len() {
            let Some((v, d)) = iterate_with_derivative(&numeric, &y, h.m) else {
                return 0.0;
            };
            least = least.min(d.abs_f64());
            y = v;
        }
    }
    least
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearityVerdict {
    LinearConsistent,
    Nonlinear,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitMean {
    pub word: String,
    /// Period under `f`.
    pub period: usize,
    /// `log |μ| / period`.
    pub mean: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LivsicReport {
    pub m: usize,
    pub branches: usize,
    pub orbit_means: Vec<OrbitMean>,
    pub mean: f64,
    pub variance: f64,
    pub threshold: f64,
    pub verdict: LinearityVerdict,
}

/// Least rotation of a word.
fn necklace(word: &[usize]) -> Vec<usize> {
    (0..word.len())
        .map(|r| [&word[r..], &word[..r]].concat())
        .min()
        .unwrap_or_default()
}

/// Averages of `log |df|` over one orbit per primitive necklace of length
/// `≤ max_len`, and their variance.
pub fn livsic_linearity_test(
    h: &Horseshoe,
    f: &RationalMap,
    max_len: usize,
    threshold: f64,
) -> Result<LivsicReport> {
    let prec = h.chart.prec;
    let orbits = periodic_words(h, f, max_len)?;
    let mut seen = std::collections::BTreeSet::new();
    let mut means: Vec<(OrbitMean, Float)> = Vec::new();
    for o in orbits.iter().filter(|o| o.primitive) {
        if !seen.insert(necklace(&o.word)) {
            continue;
        }
        let period = o.word.len() * h.m;
        let mean = o.multiplier.ln_abs() / Float::with_val(prec, period);
        means.push((
            OrbitMean {
                word: o.word_string(),
                period,
                mean: mean.to_f64(),
            },
            mean,
        ));
    }
    let count = Float::with_val(prec, means.len());
    let mut total = Float::with_val(prec, 0);
    for (_, m) in &means {
        total += m;
    }
    let avg = total / &count;
    let mut var = Float::with_val(prec, 0);
    for (_, m) in &means {
        let d = Float::with_val(prec, m - &avg);
        var += Float::with_val(prec, &d * &d);
    }
    let variance = (var / &count).to_f64();
    let verdict = if variance <= threshold {
        LinearityVerdict::LinearConsistent
    } else {
        LinearityVerdict::Nonlinear
    };
    Ok(LivsicReport {
        m: h.m,
        branches: h.k(),
        orbit_means: means.into_iter().map(|(o, _)| o).collect(),
        mean: avg.to_f64(),
        variance,
        threshold,
        verdict,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchJson {
    pub label: usize,
    pub kind: BranchKind,
    pub anchor: String,
    pub disk_center: String,
    pub disk_radius: f64,
    pub contraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CodedOrbitJson {
    pub word: String,
    pub point: String,
    pub multiplier: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct HorseshoeJson {
    pub fixed_point: String,
    pub lambda: String,
    pub m: usize,
    pub k: usize,
    pub radius: f64,
    pub kappa: f64,
    pub branches: Vec<BranchJson>,
    pub words: Vec<CodedOrbitJson>,
    pub cylinder_diameters: Vec<(usize, f64)>,
    pub expansion_min: f64,
}

pub fn horseshoe_report(h: &Horseshoe, f: &RationalMap, max_len: usize) -> Result<HorseshoeJson> {
    let digits = digits_for(h.chart.prec);
    let orbits = periodic_words(h, f, max_len)?;
    Ok(HorseshoeJson {
        fixed_point: h.o.to_string_digits(digits),
        lambda: h.lambda.to_string_digits(digits),
        m: h.m,
        k: h.k(),
        radius: h.radius,
        kappa: h.kappa,
        branches: h
            .branches
            .iter()
            .map(|b| BranchJson {
                label: b.label,
                kind: b.kind.clone(),
                anchor: b.anchor.to_string_digits(digits),
                disk_center: b.disk_center.to_string_digits(digits),
                disk_radius: b.disk_radius,
                contraction: b.contraction,
            })
            .collect(),
        words: orbits
            .iter()
            .map(|o| CodedOrbitJson {
                word: o.word_string(),
                point: o.point.to_string_digits(digits),
                multiplier: o.multiplier.to_string_digits(digits),
            })
            .collect(),
        cylinder_diameters: cylinder_diameters(h, &orbits),
        expansion_min: expansion_min(h, f, &orbits),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ScalarMode;
    use crate::homoclinic::{find_homoclinic, koenigs_chart};
    use crate::periodic::{periodic_cycles, SpectrumOptions};
    use crate::ratmap::SpherePoint;

    const P: u32 = 256;

    fn map(num: &[&str]) -> RationalMap {
        RationalMap::from_strs(num, &["1"], ScalarMode::Exact, P).unwrap()
    }

    fn setup(f: &RationalMap, o: &str, seeds: &[&str]) -> (KoenigsChart, Vec<HomoclinicOrbit>) {
        let o = SpherePoint::parse(o, ScalarMode::Mp, P).unwrap();
        let chart = koenigs_chart(f, &o, 64, P).unwrap();
        let orbits = seeds
            .iter()
            .map(|s| {
                find_homoclinic(
                    f,
                    &chart,
                    &SpherePoint::parse(s, ScalarMode::Mp, P).unwrap(),
                    40,
                )
                .unwrap()
            })
            .collect();
        (chart, orbits)
    }

    #[test]
    fn square_map_single_orbit() {
        let f = map(&["0", "0", "1"]);
        let (chart, orbits) = setup(&f, "1", &["-1"]);
        let h = build_horseshoe(&f, &chart, &orbits, &HomoclinicOptions::default()).unwrap();
        assert_eq!(h.k(), 2);
        assert!(h.kappa < 1.0);
        let coded = periodic_words(&h, &f, 3).unwrap();
        assert_eq!(coded.len(), 2 + 4 + 8);
        // word (1) is the fixed point itself
        assert!(coded[0].point.dist_f64(&BigComplex::one(P)) < 1e-60);
        let want = BigComplex::from_i64(P, 2).powi(h.m as i64);
        assert!(coded[0].multiplier.dist_f64(&want) < 1e-50);
        for n in 1..=3 {
            let pts: Vec<&CodedOrbit> = coded.iter().filter(|o| o.word.len() == n).collect();
            for a in 0..pts.len() {
                assert!((pts[a].point.abs_f64() - 1.0).abs() < 1e-60);
                for b in a + 1..pts.len() {
                    assert!(pts[a].point.dist_f64(&pts[b].point) > 1e-6);
                }
            }
        }
        let cyl = cylinder_diameters(&h, &coded);
        assert!(cyl.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(expansion_min(&h, &f, &coded) > 1.0);

        let report = livsic_linearity_test(&h, &f, 3, LINEARITY_THRESHOLD).unwrap();
        assert!(report.variance < 1e-24);
        assert_eq!(report.verdict, LinearityVerdict::LinearConsistent);
        assert!((report.mean - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn square_map_two_orbits() {
        let f = map(&["0", "0", "1"]);
        let (chart, orbits) = setup(&f, "1", &["-1", "i"]);
        let h = build_horseshoe(&f, &chart, &orbits, &HomoclinicOptions::default()).unwrap();
        assert_eq!(h.k(), 3);
        for a in 0..3 {
            for b in a + 1..3 {
                let (x, y) = (&h.branches[a], &h.branches[b]);
                assert!(x.disk_center.dist_f64(&y.disk_center) > x.disk_radius + y.disk_radius);
            }
        }
        assert_eq!(periodic_words(&h, &f, 2).unwrap().len(), 3 + 9);
    }

    #[test]
    fn repeated_orbit_overlaps() {
        let f = map(&["0", "0", "1"]);
        let (chart, orbits) = setup(&f, "1", &["-1", "-1"]);
        let opts = HomoclinicOptions {
            return_cap: 4,
            ..Default::default()
        };
        assert!(matches!(
            build_horseshoe(&f, &chart, &orbits, &opts),
            Err(Error::BranchOverlap(_))
        ));
    }

    #[test]
    fn basilica_is_nonlinear_and_matches_cycles() {
        let f = map(&["-1", "0", "1"]);
        let phi = "1.6180339887498948482045868343656381177203091798057628621354486227";
        let (chart, orbits) = setup(
            &f,
            phi,
            &["-1.6180339887498948482045868343656381177203091798057628621354486227"],
        );
        let h = build_horseshoe(&f, &chart, &orbits, &HomoclinicOptions::default()).unwrap();
        assert_eq!(h.k(), 2);
        let report = livsic_linearity_test(&h, &f, 2, LINEARITY_THRESHOLD).unwrap();
        assert!(report.variance > 1e-3, "variance {}", report.variance);
        assert_eq!(report.verdict, LinearityVerdict::Nonlinear);

        let coded = periodic_words(&h, &f, 1).unwrap();
        let cycles = periodic_cycles(&f, h.m, &SpectrumOptions::with_prec(P)).unwrap();
        for o in &coded {
            let hit = cycles
                .iter()
                .any(|c| c.multiplier_for(h.m).dist_f64(&o.multiplier) < 1e-20);
            assert!(hit, "word {} not among the cycles", o.word_string());
        }
    }
}
