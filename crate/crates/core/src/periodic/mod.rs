//! Periodic cycles, multipliers and the per-period spectra `s_n`, `L_n`, `RL_n`.

pub mod matching;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::algebra::complex::fmt_float;
use crate::algebra::{poly_roots_scalar, BigComplex, Field, Poly, Scalar};
use crate::error::{Error, Result};
use crate::ratmap::{digits_for, NumericMap, RationalMap, SpherePoint};

pub const DEFAULT_DEGREE_BUDGET: usize = 1000;

/// Knobs shared by the cycle and spectrum computations.
#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    pub prec_bits: u32,
    /// Largest admissible divisor degree `d^n + 1`.
    pub degree_budget: usize,
    /// Tolerance for classifying multipliers as indifferent and for `RL_n`.
    pub class_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            prec_bits: 256,
            degree_budget: DEFAULT_DEGREE_BUDGET,
            class_tol: 1e-8,
        }
    }
}

impl SpectrumOptions {
    pub fn with_prec(prec_bits: u32) -> Self {
        SpectrumOptions {
            prec_bits,
            ..Default::default()
        }
    }
}

/// The fixed-point divisor `y·P_n − x·Q_n` of `f^n`, dehomogenized.
#[derive(Clone, Debug)]
pub struct FixedPointDivisor {
    pub poly: Poly<Scalar>,
    /// `d^n + 1`; the deficit `formal_degree - deg poly` is the multiplicity at infinity.
    pub formal_degree: usize,
}

impl FixedPointDivisor {
    pub fn infinity_multiplicity(&self) -> usize {
        self.formal_degree - self.poly.degree().unwrap_or(0)
    }
}

pub fn fixed_point_divisor(f: &RationalMap, n: usize, budget: usize) -> Result<FixedPointDivisor> {
    let (divisor, _) = divisor_and_iterate(f, n, budget)?;
    Ok(divisor)
}

fn divisor_and_iterate(
    f: &RationalMap,
    n: usize,
    budget: usize,
) -> Result<(FixedPointDivisor, RationalMap)> {
    if n == 0 {
        return Err(Error::BadParameter("period must be at least 1".into()));
    }
    let needed = (f.degree() as u128)
        .checked_pow(n as u32)
        .map(|v| v + 1)
        .unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: needed.min(usize::MAX as u128) as usize,
            cap: budget,
        });
    }
    let fnn = f.iterate(n)?;
    let z = Poly::monomial(fnn.num_coeff(0).one_like(), 1);
    let poly = fnn.num().sub(&fnn.den().mul(&z));
    if poly.is_zero() {
        return Err(Error::DegenerateMap("iterate is the identity".into()));
    }
    Ok((
        FixedPointDivisor {
            poly,
            formal_degree: fnn.degree() + 1,
        },
        fnn,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CycleClass {
    Attracting,
    Repelling,
    RationallyIndifferent,
    IrrationallyIndifferent,
}

impl CycleClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CycleClass::Attracting => "attracting",
            CycleClass::Repelling => "repelling",
            CycleClass::RationallyIndifferent => "rationally-indifferent",
            CycleClass::IrrationallyIndifferent => "irrationally-indifferent",
        }
    }
}

/// Classifies a multiplier; roots of unity are searched up to order 64.
pub fn classify(lambda: &BigComplex, tol: f64) -> CycleClass {
    let a = lambda.abs_f64();
    if a < 1.0 - tol {
        return CycleClass::Attracting;
    }
    if a > 1.0 + tol {
        return CycleClass::Repelling;
    }
    let one = BigComplex::one(lambda.prec());
    let mut p = lambda.clone();
    for _ in 1..=64 {
        if p.dist_f64(&one) < tol {
            return CycleClass::RationallyIndifferent;
        }
        p = &p * lambda;
    }
    CycleClass::IrrationallyIndifferent
}

/// A periodic cycle found among the fixed points of `f^n`.
#[derive(Clone, Debug)]
pub struct Cycle {
    /// Orbit in forward order, starting at the canonically smallest point.
    pub points: Vec<SpherePoint>,
    /// Minimal period.
    pub period: usize,
    /// Multiplier of the cycle itself, `(f^period)'` at any of its points.
    pub multiplier: BigComplex,
    pub class: CycleClass,
    /// Multiplicity of each cycle point in the divisor it was extracted from.
    pub multiplicity: usize,
}

impl Cycle {
    /// Multiplier of the points as fixed points of `f^n` (`n` a multiple of the period).
    pub fn multiplier_for(&self, n: usize) -> BigComplex {
        self.multiplier.powi((n / self.period) as i64)
    }
}

/// All cycles whose points are fixed by `f^n`, with multiplicity.
///
/// Retries once at twice the precision when orbit matching is ambiguous.
pub fn periodic_cycles(f: &RationalMap, n: usize, opts: &SpectrumOptions) -> Result<Vec<Cycle>> {
    let (divisor, _) = divisor_and_iterate(f, n, opts.degree_budget)?;
    match cycles_at(f, n, &divisor, opts.prec_bits, opts.class_tol) {
        Err(Error::OrbitMatchingAmbiguous(_)) => {
            cycles_at(f, n, &divisor, 2 * opts.prec_bits, opts.class_tol)
        }
        other => other,
    }
}

fn cycles_at(
    f: &RationalMap,
    n: usize,
    divisor: &FixedPointDivisor,
    prec: u32,
    tol: f64,
) -> Result<Vec<Cycle>> {
    let mut roots: Vec<(SpherePoint, usize)> = Vec::new();
    if divisor.poly.degree().unwrap_or(0) >= 1 {
        for c in poly_roots_scalar(&divisor.poly, prec)? {
            roots.push((SpherePoint::mp(c.center), c.multiplicity));
        }
    }
    let inf = divisor.infinity_multiplicity();
    if inf > 0 {
        roots.push((SpherePoint::Infinity, inf));
    }
    let radius = 2f64.powf(-(prec as f64) / 8.0);
    let numeric = f.numeric(prec);
    let step = |p: &SpherePoint| -> SpherePoint {
        match p.to_mp(prec) {
            Some(z) => match numeric.eval(&z) {
                Some(w) => SpherePoint::mp(w),
                None => SpherePoint::Infinity,
            },
            None => f.evaluate(p),
        }
    };
    let nearest = |p: &SpherePoint| -> Result<Option<usize>> {
        let mut hits = roots
            .iter()
            .enumerate()
            .filter(|(_, (r, _))| r.chordal_distance(p, prec) < radius);
        let first = hits.next().map(|(i, _)| i);
        if first.is_some() && hits.next().is_some() {
            return Err(Error::OrbitMatchingAmbiguous(format!(
                "two fixed points of f^{n} within {radius:e}"
            )));
        }
        Ok(first)
    };

    let mut assigned = vec![false; roots.len()];
    let mut cycles = Vec::new();
    for start in 0..roots.len() {
        if assigned[start] {
            continue;
        }
        // minimal period: smallest m | n returning to the start point
        let mut orbit = vec![roots[start].0.clone()];
        let mut period = None;
        for m in 1..=n {
            let next = step(orbit.last().unwrap());
            if n.is_multiple_of(m) && next.chordal_distance(&roots[start].0, prec) < radius {
                period = Some(m);
                break;
            }
            orbit.push(next);
        }
        let period = period.ok_or_else(|| {
            Error::OrbitMatchingAmbiguous(format!(
                "orbit of a fixed point of f^{n} does not close up"
            ))
        })?;
        let mut points = Vec::with_capacity(period);
        for p in orbit.iter().take(period) {
            let idx = nearest(p)?.ok_or_else(|| {
                Error::OrbitMatchingAmbiguous(format!(
                    "orbit point of period {period} not among fixed points of f^{n}"
                ))
            })?;
            if assigned[idx] && idx != start {
                return Err(Error::OrbitMatchingAmbiguous(
                    "fixed point claimed by two cycles".into(),
                ));
            }
            assigned[idx] = true;
            points.push(roots[idx].0.clone());
        }
        let multiplier = cycle_multiplier(f, &numeric, &points, prec);
        let class = classify(&multiplier, tol);
        cycles.push(Cycle {
            points,
            period,
            multiplier,
            class,
            multiplicity: roots[start].1,
        });
    }
    Ok(cycles)
}

/// Product of chart derivatives along a cycle.
pub fn cycle_multiplier(
    f: &RationalMap,
    numeric: &NumericMap,
    points: &[SpherePoint],
    prec: u32,
) -> BigComplex {
    let mut acc = BigComplex::one(prec);
    for p in points {
        let d = match p.to_mp(prec).and_then(|z| numeric.eval_with_derivative(&z)) {
            Some((_, d)) => d,
            None => f.derivative_at(p),
        };
        acc = &acc * &d;
    }
    acc
}

/// One period's spectra.
#[derive(Clone, Debug)]
pub struct SpectrumRow {
    pub n: usize,
    /// `s_n`, sorted by `(re, im)`.
    pub multipliers: Vec<BigComplex>,
    /// `L_n`: moduli of `s_n`, ascending.
    pub lengths: Vec<Float>,
    /// `RL_n`: the entries of `L_n` above `1 + tol`.
    pub repelling_lengths: Vec<Float>,
}

#[derive(Clone, Debug)]
pub struct SpectrumTable {
    pub degree: usize,
    pub nmax: usize,
    pub prec_bits: u32,
    pub rows: Vec<SpectrumRow>,
}

pub fn spectrum_table(
    f: &RationalMap,
    nmax: usize,
    opts: &SpectrumOptions,
) -> Result<SpectrumTable> {
    if nmax == 0 {
        return Err(Error::BadParameter("nmax must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(nmax);
    for n in 1..=nmax {
        let cycles = periodic_cycles(f, n, opts)?;
        rows.push(spectrum_row(n, &cycles, opts));
    }
    Ok(SpectrumTable {
        degree: f.degree(),
        nmax,
        prec_bits: opts.prec_bits,
        rows,
    })
}

/// Builds `s_n` from the cycles of the `n`-th divisor.
pub fn spectrum_row(n: usize, cycles: &[Cycle], opts: &SpectrumOptions) -> SpectrumRow {
    let mut multipliers = Vec::new();
    for c in cycles {
        let m = c.multiplier_for(n);
        for _ in 0..c.points.len() * c.multiplicity {
            multipliers.push(m.clone());
        }
    }
    multipliers.sort_by(|a, b| a.lex_cmp(b));
    let mut lengths: Vec<Float> = multipliers.iter().map(|m| m.abs()).collect();
    lengths.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let cut = 1.0 + opts.class_tol;
    let repelling_lengths = lengths.iter().filter(|l| **l > cut).cloned().collect();
    SpectrumRow {
        n,
        multipliers,
        lengths,
        repelling_lengths,
    }
}

impl SpectrumTable {
    pub fn row(&self, n: usize) -> Option<&SpectrumRow> {
        self.rows.get(n.checked_sub(1)?)
    }

    /// `RL*`: the rows at indices `k!` that fit within `nmax`.
    pub fn factorial_view(&self) -> Vec<&SpectrumRow> {
        let mut out = Vec::new();
        let mut fact = 1usize;
        for k in 1.. {
            fact *= k;
            match self.row(fact) {
                Some(r) => out.push(r),
                None => break,
            }
        }
        out
    }

    pub fn to_json(&self) -> SpectrumJson {
        let digits = digits_for(self.prec_bits);
        let real = |x: &Float| fmt_float(x, digits);
        SpectrumJson {
            degree: self.degree,
            nmax: self.nmax,
            prec_bits: self.prec_bits,
            rows: self
                .rows
                .iter()
                .map(|r| SpectrumRowJson {
                    n: r.n,
                    s: r.multipliers
                        .iter()
                        .map(|m| m.to_string_digits(digits))
                        .collect(),
                    l: r.lengths.iter().map(real).collect(),
                    rl: r.repelling_lengths.iter().map(real).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRowJson {
    pub n: usize,
    pub s: Vec<String>,
    pub l: Vec<String>,
    pub rl: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumJson {
    pub degree: usize,
    pub nmax: usize,
    pub prec_bits: u32,
    pub rows: Vec<SpectrumRowJson>,
}

/// A multiset entry left without a partner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnmatchedEntry {
    pub n: usize,
    /// `"a"` or `"b"`: the side the entry came from.
    pub side: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub matched: bool,
    /// Total distance of the minimum-cost assignment over all periods.
    pub cost: f64,
    /// Largest pair distance in the minimum-cost assignment.
    pub max_pair_distance: f64,
    pub unmatched: Vec<UnmatchedEntry>,
}

/// Compares two spectrum tables period by period.
///
/// `matched` holds iff for every `n` there is a perfect pairing with
/// `|a - b| ≤ tol·max(1, |a|)`; the cost is that of the minimum-cost
/// assignment under `|a - b|`.
pub fn match_spectra(a: &SpectrumTable, b: &SpectrumTable, tol: f64) -> MatchReport {
    let mut report = MatchReport {
        matched: true,
        cost: 0.0,
        max_pair_distance: 0.0,
        unmatched: Vec::new(),
    };
    if a.degree != b.degree || a.nmax != b.nmax {
        report.matched = false;
    }
    let digits = 20;
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        let (xa, xb) = (&ra.multipliers, &rb.multipliers);
        if xa.len() != xb.len() {
            report.matched = false;
        }
        let dist: Vec<Vec<f64>> = xa
            .iter()
            .map(|x| xb.iter().map(|y| x.dist_f64(y)).collect())
            .collect();
        if xa.len() <= xb.len() {
            let assign = matching::min_cost_assignment(&dist);
            for (i, &j) in assign.iter().enumerate() {
                report.cost += dist[i][j];
                report.max_pair_distance = report.max_pair_distance.max(dist[i][j]);
            }
        }
        let adj: Vec<Vec<usize>> = xa
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let scale = x.abs_f64().max(1.0);
                (0..xb.len())
                    .filter(|&j| dist[i][j] <= tol * scale)
                    .collect()
            })
            .collect();
        let m = matching::max_matching(&adj, xb.len());
        let mut used = vec![false; xb.len()];
        for (i, mj) in m.iter().enumerate() {
            match mj {
                Some(j) => used[*j] = true,
                None => {
                    report.matched = false;
                    report.unmatched.push(UnmatchedEntry {
                        n: ra.n,
                        side: "a".into(),
                        value: xa[i].to_string_digits(digits),
                    });
                }
            }
        }
        for (j, u) in used.iter().enumerate() {
            if !u {
                report.matched = false;
                report.unmatched.push(UnmatchedEntry {
                    n: rb.n,
                    side: "b".into(),
                    value: xb[j].to_string_digits(digits),
                });
            }
        }
    }
    report
}

/// Whether the multiset `a` embeds into `L_n(f)` with pairwise distance `≤ tol`.
pub fn length_subset_test(
    f: &RationalMap,
    n: usize,
    a: &[Float],
    tol: f64,
    opts: &SpectrumOptions,
) -> Result<bool> {
    let cycles = periodic_cycles(f, n, opts)?;
    let row = spectrum_row(n, &cycles, opts);
    Ok(lengths_embed(a, &row.lengths, tol))
}

pub fn lengths_embed(a: &[Float], lengths: &[Float], tol: f64) -> bool {
    if a.len() > lengths.len() {
        return false;
    }
    let adj: Vec<Vec<usize>> = a
        .iter()
        .map(|x| {
            (0..lengths.len())
                .filter(|&j| {
                    Float::with_val(x.prec().max(lengths[j].prec()), x - &lengths[j]).abs() <= tol
                })
                .collect()
        })
        .collect();
    matching::max_matching(&adj, lengths.len())
        .iter()
        .all(Option::is_some)
}

/// `Σ 1/(1 - λ)` over the fixed points, or `None` when some multiplier is
/// within `tol` of 1 (the sum is then undefined).
pub fn holomorphic_index_sum(
    f: &RationalMap,
    opts: &SpectrumOptions,
    tol: f64,
) -> Result<Option<BigComplex>> {
    let cycles = periodic_cycles(f, 1, opts)?;
    let one = BigComplex::one(opts.prec_bits);
    let mut sum = BigComplex::zero(opts.prec_bits);
    for c in &cycles {
        let gap = &one - &c.multiplier;
        if gap.abs_f64() < tol {
            return Ok(None);
        }
        for _ in 0..c.multiplicity {
            sum = &sum + &gap.recip();
        }
    }
    Ok(Some(sum))
}

/// One row of the cycle export table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub period: usize,
    pub point: String,
    pub multiplier_re: String,
    pub multiplier_im: String,
    pub multiplier_abs: String,
    pub class: CycleClass,
    pub multiplicity: usize,
}

pub fn cycle_records(cycles: &[Cycle], digits: usize) -> Vec<CycleRecord> {
    cycles
        .iter()
        .map(|c| CycleRecord {
            period: c.period,
            point: c.points[0].render(digits),
            multiplier_re: fmt_float(c.multiplier.re(), digits),
            multiplier_im: fmt_float(c.multiplier.im(), digits),
            multiplier_abs: fmt_float(&c.multiplier.abs(), digits),
            class: c.class,
            multiplicity: c.multiplicity,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ScalarMode;

    const P: u32 = 256;

    fn exact(num: &[&str], den: &[&str]) -> RationalMap {
        RationalMap::from_strs(num, den, ScalarMode::Exact, P).unwrap()
    }

    fn close(z: &BigComplex, re: f64, im: f64, tol: f64) -> bool {
        z.dist_f64(&BigComplex::from_f64(P, re, im)) < tol
    }

    #[test]
    fn divisor_of_square_map() {
        let sq = exact(&["0", "0", "1"], &["1"]);
        let d1 = fixed_point_divisor(&sq, 1, 1000).unwrap();
        assert_eq!(d1.formal_degree, 3);
        assert_eq!(d1.infinity_multiplicity(), 1);
        let d2 = fixed_point_divisor(&sq, 2, 1000).unwrap();
        assert_eq!(d2.formal_degree, 5);
        assert!(matches!(
            fixed_point_divisor(&sq, 10, 1000),
            Err(Error::BudgetExceeded {
                needed: 1025,
                cap: 1000
            })
        ));
    }

    #[test]
    fn cycles_of_square_map() {
        let sq = exact(&["0", "0", "1"], &["1"]);
        let cycles = periodic_cycles(&sq, 2, &SpectrumOptions::default()).unwrap();
        let periods: Vec<usize> = cycles.iter().map(|c| c.period).collect();
        assert_eq!(periods.iter().filter(|&&p| p == 1).count(), 3);
        let two: Vec<_> = cycles.iter().filter(|c| c.period == 2).collect();
        assert_eq!(two.len(), 1);
        assert!(close(&two[0].multiplier, 4.0, 0.0, 1e-60));
        assert_eq!(two[0].class, CycleClass::Repelling);
        // the 2-cycle is {ω, ω²}
        let w = BigComplex::root_of_unity(P, 1, 3);
        assert!(two[0]
            .points
            .iter()
            .any(|p| p.to_mp(P).unwrap().dist_f64(&w) < 1e-60));
    }

    #[test]
    fn basilica_two_cycle_is_superattracting() {
        let f = exact(&["-1", "0", "1"], &["1"]);
        let cycles = periodic_cycles(&f, 2, &SpectrumOptions::default()).unwrap();
        let two: Vec<_> = cycles.iter().filter(|c| c.period == 2).collect();
        assert_eq!(two.len(), 1);
        assert!(two[0].multiplier.is_exact_zero() || two[0].multiplier.abs_f64() < 1e-60);
        assert_eq!(two[0].class, CycleClass::Attracting);
    }

    #[test]
    fn spectra_of_square_and_basilica() {
        let opts = SpectrumOptions::default();
        let sq = exact(&["0", "0", "1"], &["1"]);
        let t = spectrum_table(&sq, 2, &opts).unwrap();
        let s1 = &t.row(1).unwrap().multipliers;
        assert_eq!(s1.len(), 3);
        assert!(
            close(&s1[0], 0.0, 0.0, 1e-60)
                && close(&s1[1], 0.0, 0.0, 1e-60)
                && close(&s1[2], 2.0, 0.0, 1e-60)
        );
        let s2 = &t.row(2).unwrap().multipliers;
        assert_eq!(s2.len(), 5);
        assert_eq!(s2.iter().filter(|m| close(m, 4.0, 0.0, 1e-60)).count(), 3);
        assert_eq!(t.row(2).unwrap().repelling_lengths.len(), 3);

        let b = exact(&["-1", "0", "1"], &["1"]);
        let tb = spectrum_table(&b, 1, &opts).unwrap();
        let sqrt5 = 5f64.sqrt();
        let s = &tb.row(1).unwrap().multipliers;
        assert!(close(&s[0], 1.0 - sqrt5, 0.0, 1e-14));
        assert!(close(&s[1], 0.0, 0.0, 1e-60));
        assert!(close(&s[2], 1.0 + sqrt5, 0.0, 1e-14));
    }

    #[test]
    fn parabolic_fixed_point_keeps_multiplicity() {
        // z + z^2 has a double fixed point at 0 with multiplier 1
        let f = exact(&["0", "1", "1"], &["1"]);
        let cycles = periodic_cycles(&f, 1, &SpectrumOptions::default()).unwrap();
        let para: Vec<_> = cycles.iter().filter(|c| c.multiplicity == 2).collect();
        assert_eq!(para.len(), 1);
        assert_eq!(para[0].class, CycleClass::RationallyIndifferent);
        let total: usize = cycles.iter().map(|c| c.points.len() * c.multiplicity).sum();
        assert_eq!(total, 3);
    }

    #[test]
    fn matching_and_subsets() {
        let opts = SpectrumOptions::default();
        let sq = exact(&["0", "0", "1"], &["1"]);
        let b = exact(&["-1", "0", "1"], &["1"]);
        let ta = spectrum_table(&sq, 1, &opts).unwrap();
        let tb = spectrum_table(&b, 1, &opts).unwrap();
        let same = match_spectra(&ta, &ta, 1e-20);
        assert!(same.matched);
        assert_eq!(same.cost, 0.0);
        let diff = match_spectra(&ta, &tb, 1e-3);
        assert!(!diff.matched);
        assert!(!diff.unmatched.is_empty());

        let f = |v: &[f64]| v.iter().map(|&x| Float::with_val(P, x)).collect::<Vec<_>>();
        assert!(length_subset_test(&sq, 1, &f(&[2.0]), 1e-20, &opts).unwrap());
        assert!(!length_subset_test(&sq, 1, &f(&[2.0, 2.0]), 1e-20, &opts).unwrap());
        assert!(length_subset_test(&sq, 2, &f(&[4.0, 4.0, 4.0]), 1e-20, &opts).unwrap());
    }

    #[test]
    fn factorial_view_picks_one_and_two() {
        let sq = exact(&["0", "0", "1"], &["1"]);
        let t = spectrum_table(&sq, 3, &SpectrumOptions::default()).unwrap();
        let v: Vec<usize> = t.factorial_view().iter().map(|r| r.n).collect();
        assert_eq!(v, vec![1, 2]);
    }
}
