//! Adjoint periodic points `q_i` of a homoclinic orbit and the fit of their
//! multipliers to `μ_i ≈ θ λ^i + offset`.

use serde::Serialize;

use super::{
    continue_preimage, iterate_with_derivative, newton_fixed_point, solve_iterate, HomoclinicOrbit,
    KoenigsChart,
};
use crate::algebra::{solve, BigComplex};
use crate::error::{Error, Result};
use crate::exceptional::{ExceptionalVerdict, Verdict, Witness};
use crate::ratmap::{digits_for, RationalMap};

/// Periods up to this are checked to be minimal.
const MINIMAL_PERIOD_CHECK: usize = 12;
/// Shortest adjoint sequence produced.
const MIN_TERMS: usize = 8;
/// Fewest multipliers the fit accepts.
const MIN_FIT: usize = 6;
/// Points used by the asymptotic fit.
const FIT_POINTS: usize = 10;

#[derive(Clone, Debug)]
pub struct AdjointEntry {
    pub i: usize,
    /// The fixed point of `f^i` in `U_i`.
    pub q: BigComplex,
    /// `(f^i)'(q)`.
    pub mu: BigComplex,
}

#[derive(Clone, Debug)]
pub struct AdjointSequence {
    pub lambda: BigComplex,
    pub return_time: usize,
    pub prec: u32,
    pub entries: Vec<AdjointEntry>,
}

impl AdjointSequence {
    pub fn multipliers(&self) -> Vec<(usize, BigComplex)> {
        self.entries.iter().map(|e| (e.i, e.mu.clone())).collect()
    }
}

/// For `i` in `m..=imax`, the periodic point `q_i` of period `i` shadowing
/// the homoclinic orbit: the attracting fixed point of the inverse branch
/// of `f^i` sending `o` to `o_i`. Found by iterating that branch from `o_i`
/// and cross-checked against damped Newton on `f^i(z) - z` from `o_i`.
pub fn adjoint_sequence(
    f: &RationalMap,
    orbit: &HomoclinicOrbit,
    chart: &KoenigsChart,
    m: usize,
    imax: usize,
) -> Result<AdjointSequence> {
    if m < orbit.entry_index {
        return Err(Error::BadParameter(format!(
            "return time {m} precedes the entry index {}",
            orbit.entry_index
        )));
    }
    if imax < m + MIN_TERMS {
        return Err(Error::BadParameter(format!(
            "imax must be at least m + {MIN_TERMS}, got m = {m}, imax = {imax}"
        )));
    }
    let prec = chart.prec;
    let numeric = f.numeric(prec);
    let agree = 2f64.powf(-(prec as f64) / 2.0);
    let mut entries = Vec::with_capacity(imax - m + 1);
    for i in m..=imax {
        let o_i = orbit.point(chart, i);
        let w_i = orbit.w(i);
        // the branch h_i with h_i(o) = o_i, carried to h_i(o_i)
        let path = |s: f64| chart.psi(&w_i.mul_f64(s));
        let mut y = continue_preimage(&numeric, i, &o_i, &path).ok_or_else(|| {
            Error::BranchLost(format!("continuation of the period-{i} branch failed"))
        })?;
        let mut converged = false;
        for _ in 0..2000 {
            let next = solve_iterate(&numeric, i, &y, &y)
                .ok_or_else(|| Error::BranchLost(format!("inverse step failed at period {i}")))?;
            let step = next.dist_f64(&y);
            y = next;
            if step <= 2f64.powf(-(prec as f64) + 32.0) * y.abs_f64().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::BranchLost(format!(
                "inverse iteration did not settle at period {i}"
            )));
        }
        let q_newton = newton_fixed_point(&numeric, i, &o_i).ok_or(Error::NewtonDisagreement {
            period: i,
            distance: f64::INFINITY,
        })?;
        let distance = q_newton.dist_f64(&y);
        if distance > agree * y.abs_f64().max(1.0) {
            return Err(Error::NewtonDisagreement {
                period: i,
                distance,
            });
        }
        if i <= MINIMAL_PERIOD_CHECK {
            for k in (1..i).filter(|k| i % k == 0) {
                let (v, _) =
                    iterate_with_derivative(&numeric, &q_newton, k).expect("orbit avoids poles");
                if v.dist_f64(&q_newton) <= agree * q_newton.abs_f64().max(1.0) {
                    return Err(Error::BranchLost(format!(
                        "adjoint point of period {i} has period {k}"
                    )));
                }
            }
        }
        let (_, mu) = iterate_with_derivative(&numeric, &q_newton, i)
            .ok_or_else(|| Error::BranchLost(format!("period-{i} orbit meets a pole")))?;
        entries.push(AdjointEntry { i, q: q_newton, mu });
    }
    Ok(AdjointSequence {
        lambda: chart.lambda.clone(),
        return_time: m,
        prec,
        entries,
    })
}

/// `θ` and `offset` in `μ_i = θ λ^i + offset + O(λ^(-i))`.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticFit {
    #[serde(serialize_with = "ser_complex")]
    pub theta: BigComplex,
    #[serde(serialize_with = "ser_complex")]
    pub offset: BigComplex,
    /// Geometric mean of `|res_(i+1) / res_i|` over the trailing window;
    /// `None` when the residuals are at the noise floor.
    pub error_decay_ratio: Option<f64>,
    /// `(i, |μ_i - θ λ^i - offset|)`.
    pub residuals: Vec<(usize, f64)>,
}

fn ser_complex<S: serde::Serializer>(z: &BigComplex, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&z.to_string_digits(digits_for(z.prec()).min(40)))
}

/// Fits `μ_i / λ^i = Σ_k β_k λ^(-k i)` through the trailing points by
/// interpolation in the node `λ^(-i)`; `θ = β_0`, `offset = β_1`.
pub fn fit_asymptotics(lambda: &BigComplex, mu: &[(usize, BigComplex)]) -> Result<AsymptoticFit> {
    if mu.len() < MIN_FIT {
        return Err(Error::FitUnstable(format!(
            "need at least {MIN_FIT} terms, got {}",
            mu.len()
        )));
    }
    let prec = lambda.prec().max(mu[0].1.prec());
    let used = &mu[mu.len() - mu.len().min(FIT_POINTS)..];
    let inv = lambda.recip();
    let mut rows = Vec::with_capacity(used.len());
    let mut rhs = Vec::with_capacity(used.len());
    for (i, m) in used {
        let node = inv.powi(*i as i64);
        let mut row = Vec::with_capacity(used.len());
        let mut p = BigComplex::one(prec);
        for _ in 0..used.len() {
            row.push(p.clone());
            p = &p * &node;
        }
        rows.push(row);
        rhs.push(m * &node);
    }
    let beta = solve(rows, rhs)?;
    let theta = beta[0].clone();
    let offset = beta[1].clone();

    let noise_bits = -(prec as f64) * 0.8;
    let mut residuals = Vec::with_capacity(mu.len());
    let mut floors = Vec::with_capacity(mu.len());
    for (i, m) in mu {
        let lam_i = lambda.powi(*i as i64);
        let res = &(m - &(&theta * &lam_i)) - &offset;
        residuals.push((*i, res.abs_f64()));
        let floor =
            noise_bits.exp2() * (lam_i.abs_f64() * theta.abs_f64().max(1.0) + offset.abs_f64());
        floors.push(64.0 * floor);
    }
    let start = residuals.len().saturating_sub(6);
    let window: Vec<(f64, f64)> = residuals[start..]
        .iter()
        .zip(&floors[start..])
        .map(|(r, f)| (r.1, *f))
        .collect();
    let above: Vec<bool> = window.iter().map(|(r, f)| r > f).collect();
    let error_decay_ratio = if above.iter().all(|a| !a) {
        None
    } else {
        // once at the floor the residuals must stay there
        if let Some(first_low) = above.iter().position(|a| !a) {
            if above[first_low..].iter().any(|a| *a) {
                return Err(Error::FitUnstable(
                    "residuals leave the noise floor again".into(),
                ));
            }
        }
        let live: Vec<f64> = window
            .iter()
            .zip(&above)
            .filter(|(_, a)| **a)
            .map(|((r, _), _)| *r)
            .collect();
        if live.len() < 2 {
            None
        } else {
            let mut log_sum = 0.0;
            for pair in live.windows(2) {
                let ratio = pair[1] / pair[0];
                if ratio >= 1.0 {
                    return Err(Error::FitUnstable(format!("residual grows by {ratio:.3}")));
                }
                log_sum += ratio.ln();
            }
            Some((log_sum / (live.len() - 1) as f64).exp())
        }
    };
    Ok(AsymptoticFit {
        theta,
        offset,
        error_decay_ratio,
        residuals,
    })
}

/// Passes iff over the trailing `window` indices `|μ_i - θ λ^i| ≤ tol |λ^i|`
/// and the fitted offset is below `tol · max(1, |θ|)`.
pub fn exceptional_criterion(seq: &AdjointSequence, tol: f64, window: usize) -> ExceptionalVerdict {
    let mu = seq.multipliers();
    let inconclusive = ExceptionalVerdict {
        verdict: Verdict::Inconclusive,
        witness: None,
        periods_checked: mu.len(),
        fitted_base: None,
        violations: None,
    };
    let Ok(fit) = fit_asymptotics(&seq.lambda, &mu) else {
        return inconclusive;
    };
    let digits = digits_for(seq.prec).min(40);
    let start = mu.len().saturating_sub(window.max(1));
    let mut violations = 0;
    let mut witness: Option<Witness> = None;
    for (i, m) in &mu[start..] {
        let lam_i = seq.lambda.powi(*i as i64);
        let dist = (m - &(&fit.theta * &lam_i)).abs_f64() / lam_i.abs_f64();
        if dist > tol {
            violations += 1;
            witness.get_or_insert(Witness {
                index: *i,
                point: None,
                multiplier: m.to_string_digits(digits),
                distance: dist,
            });
        }
    }
    let offset_size = fit.offset.abs_f64();
    if offset_size > tol * fit.theta.abs_f64().max(1.0) && witness.is_none() {
        let (i, m) = &mu[start];
        witness = Some(Witness {
            index: *i,
            point: None,
            multiplier: m.to_string_digits(digits),
            distance: offset_size,
        });
        violations += 1;
    }
    ExceptionalVerdict {
        verdict: if witness.is_none() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        witness,
        periods_checked: mu.len(),
        fitted_base: None,
        violations: Some(violations),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    #[test]
    fn fit_recovers_exact_law() {
        let lambda = BigComplex::from_i64(P, 3);
        let mu: Vec<(usize, BigComplex)> = (2..14)
            .map(|i| {
                (
                    i,
                    &lambda.powi(i as i64).mul_i64(2) + &BigComplex::from_i64(P, 5),
                )
            })
            .collect();
        let fit = fit_asymptotics(&lambda, &mu).unwrap();
        assert!(fit.theta.dist_f64(&BigComplex::from_i64(P, 2)) < 1e-60);
        assert!(fit.offset.dist_f64(&BigComplex::from_i64(P, 5)) < 1e-50);
        assert_eq!(fit.error_decay_ratio, None);
    }

    #[test]
    fn fit_reports_decay_of_correction_term() {
        let lambda = BigComplex::from_i64(P, 4);
        let mu: Vec<(usize, BigComplex)> = (2..18)
            .map(|i| {
                let l = lambda.powi(i as i64);
                (
                    i,
                    &(&l + &BigComplex::from_i64(P, 7)) + &l.recip().mul_i64(3),
                )
            })
            .collect();
        let fit = fit_asymptotics(&lambda, &mu).unwrap();
        assert!(fit.offset.dist_f64(&BigComplex::from_i64(P, 7)) < 1e-30);
        let r = fit.error_decay_ratio.unwrap();
        assert!((r - 0.25).abs() < 1e-6, "{r}");
    }

    #[test]
    fn fit_needs_six_terms() {
        let lambda = BigComplex::from_i64(P, 2);
        let mu: Vec<(usize, BigComplex)> = (1..6).map(|i| (i, lambda.powi(i as i64))).collect();
        assert!(matches!(
            fit_asymptotics(&lambda, &mu),
            Err(Error::FitUnstable(_))
        ));
    }
}
