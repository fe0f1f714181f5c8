//! `p1dyn`: spectra, exceptionality tests, homoclinic asymptotics,
//! horseshoes and degenerations from the command line.
//!
//! Exit status is 0 on success, 2 when a test verdict is negative and 1
//! on errors.

mod input;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use p1dyn::algebra::{GaussRational, Scalar};
use p1dyn::cer::{
    build_horseshoe, horseshoe_report, livsic_linearity_test, LinearityVerdict, LINEARITY_THRESHOLD,
};
use p1dyn::degeneration::{
    propose_rescalings_with, reduce_at_zero, rescaling_limit_with_budget, ProposalOptions,
    DEFAULT_COMPOSE_BUDGET,
};
use p1dyn::exceptional::{constant_lyapunov_test, milnor_integrality_test, QuadraticRing, Verdict};
use p1dyn::homoclinic::{
    find_homoclinic_with, koenigs_chart, polish_fixed_point, polish_preimage, run_homoclinic,
    HomoclinicOptions,
};
use p1dyn::periodic::{
    cycle_records, match_spectra, periodic_cycles, spectrum_table, SpectrumOptions,
    DEFAULT_DEGREE_BUDGET,
};
use p1dyn::ratmap::{digits_for, Mobius, RationalMap};
use p1dyn::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "p1dyn",
    version,
    about = "Dynamics of rational maps of the Riemann sphere"
)]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Config {
    /// Working precision in bits.
    #[arg(long, global = true, env = "P1DYN_PREC_BITS", default_value_t = 256)]
    prec_bits: u32,
    /// Largest period considered.
    #[arg(long, global = true, default_value_t = 3)]
    nmax: usize,
    #[arg(long, global = true, default_value_t = 1e-20)]
    tol: f64,
    /// Seed for randomized steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Largest fixed-point divisor degree `d^n + 1`.
    #[arg(long, global = true, env = "P1DYN_DEGREE_BUDGET", default_value_t = DEFAULT_DEGREE_BUDGET)]
    degree_budget: usize,
    /// Largest iterate degree `d^q` composed over `ℚ(i)(t)`.
    #[arg(long, global = true, env = "P1DYN_COMPOSE_BUDGET", default_value_t = DEFAULT_COMPOSE_BUDGET)]
    compose_budget: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Serialize)]
struct MapArg {
    /// Map as JSON `{"num":[...],"den":[...]}`, a JSON file, or a preset
    /// `power:m`, `chebyshev:m`, `lattes:a`.
    #[arg(long)]
    map: String,
}

#[derive(Args, Debug, Clone, Serialize)]
struct OrbitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    map: MapArg,
    /// Repelling fixed point (polished by Newton).
    #[arg(long, allow_hyphen_values = true)]
    fixed_point: String,
    /// Preimage of the fixed point starting the homoclinic orbit.
    #[arg(long = "preimage", allow_hyphen_values = true, required = true)]
    preimages: Vec<String>,
    /// Koenigs series order.
    #[arg(long, default_value_t = 64)]
    order: usize,
    /// Working chart radius as a fraction of the injectivity radius.
    #[arg(long, default_value_t = 0.8)]
    safety: f64,
    /// Containment margin for return times.
    #[arg(long, default_value_t = 0.1)]
    margin: f64,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Multiplier and length spectra `s_n`, `L_n`, `RL_n` for `n ≤ nmax`.
    Spectrum(MapArg),
    /// Periodic cycles up to `nmax` with their classes.
    Classify(MapArg),
    /// Integrality of all multipliers in the ring of integers of `ℚ(√-D)`.
    Milnor {
        #[command(flatten)]
        #[serde(flatten)]
        map: MapArg,
        #[arg(long = "D", default_value_t = 1)]
        d: u64,
    },
    /// Constant Lyapunov exponent test `|λ| = a^n`.
    Lyapunov {
        #[command(flatten)]
        #[serde(flatten)]
        map: MapArg,
        /// Periodic points allowed to violate the law.
        #[arg(long, default_value_t = 4)]
        exception_budget: usize,
        /// Tolerance in `log |λ|`.
        #[arg(long, default_value_t = 1e-12)]
        log_tol: f64,
    },
    /// Homoclinic orbit, adjoint multipliers and the asymptotic criterion.
    Homoclinic {
        #[command(flatten)]
        #[serde(flatten)]
        orbit: OrbitArgs,
        /// Adjoint periods `m..=m + extra`.
        #[arg(long, default_value_t = 16)]
        extra: usize,
        /// Trailing indices checked by the criterion.
        #[arg(long, default_value_t = 6)]
        window: usize,
    },
    /// Horseshoe built from homoclinic orbits, with its coded periodic orbits.
    Horseshoe {
        #[command(flatten)]
        #[serde(flatten)]
        orbit: OrbitArgs,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
    },
    /// Livsic linearity test on a horseshoe.
    Livsic {
        #[command(flatten)]
        #[serde(flatten)]
        orbit: OrbitArgs,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        #[arg(long, default_value_t = LINEARITY_THRESHOLD)]
        threshold: f64,
    },
    /// Rescaling limit `M⁻¹ ∘ f^q ∘ M` at `t = 0`, or proposals when no `M` is given.
    Rescale {
        /// Family JSON `{"num":[...],"den":[...]}` with coefficients in `t`.
        #[arg(long)]
        family: String,
        /// `{"a","b","c","d"}` meaning `z ↦ (a + b z)/(c z + d)`.
        #[arg(long)]
        mobius: Option<String>,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long, default_value_t = 4)]
        max_denominator: u32,
    },
    /// Reduction of a family at `t = 0`.
    Goodred {
        #[arg(long)]
        family: String,
    },
    /// Matches the spectra of two maps; without `--other`, a random conjugate.
    Match {
        #[command(flatten)]
        #[serde(flatten)]
        map: MapArg,
        #[arg(long)]
        other: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Classify(_) => "classify",
            Command::Milnor { .. } => "milnor",
            Command::Lyapunov { .. } => "lyapunov",
            Command::Homoclinic { .. } => "homoclinic",
            Command::Horseshoe { .. } => "horseshoe",
            Command::Livsic { .. } => "livsic",
            Command::Rescale { .. } => "rescale",
            Command::Goodred { .. } => "goodred",
            Command::Match { .. } => "match",
        }
    }
}

/// A finished report: JSON payload, optional CSV table, and whether the
/// verdict was negative.
struct Outcome {
    result: Value,
    table: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    negative: bool,
}

impl Outcome {
    fn json(result: Value, negative: bool) -> Self {
        Outcome {
            result,
            table: None,
            negative,
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn spectrum_options(cfg: &Config) -> SpectrumOptions {
    SpectrumOptions {
        prec_bits: cfg.prec_bits,
        degree_budget: cfg.degree_budget,
        ..Default::default()
    }
}

fn homoclinic_options(cfg: &Config, o: &OrbitArgs) -> HomoclinicOptions {
    HomoclinicOptions {
        prec_bits: cfg.prec_bits,
        order: o.order,
        safety: o.safety,
        margin: o.margin,
        ..Default::default()
    }
}

/// A Möbius map with small Gaussian-integer entries and nonzero determinant.
fn random_mobius(seed: u64) -> Mobius {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut entry = || {
            Scalar::Exact(GaussRational::new(
                rng.gen_range(-3..=3).into(),
                rng.gen_range(-3..=3).into(),
            ))
        };
        if let Ok(m) = Mobius::new(entry(), entry(), entry(), entry()) {
            return m;
        }
    }
}

fn run(cfg: &Config, cmd: &Command) -> Result<Outcome> {
    let prec = cfg.prec_bits;
    let digits = digits_for(prec);
    match cmd {
        Command::Spectrum(m) => {
            let f = input::map(&m.map, prec)?;
            let table = spectrum_table(&f, cfg.nmax, &spectrum_options(cfg))?;
            let mut rows = Vec::new();
            for n in 1..=cfg.nmax {
                for r in cycle_records(&periodic_cycles(&f, n, &spectrum_options(cfg))?, digits) {
                    rows.push(cycle_row(n, &r));
                }
            }
            Ok(Outcome {
                result: to_value(&table.to_json()),
                table: Some((cycle_header(), rows)),
                negative: false,
            })
        }
        Command::Classify(m) => {
            let f = input::map(&m.map, prec)?;
            let mut per_n = Vec::new();
            let mut rows = Vec::new();
            for n in 1..=cfg.nmax {
                let cycles = periodic_cycles(&f, n, &spectrum_options(cfg))?;
                let exact: Vec<_> = cycles.into_iter().filter(|c| c.period == n).collect();
                let records = cycle_records(&exact, digits);
                rows.extend(records.iter().map(|r| cycle_row(n, r)));
                per_n.push(json!({ "n": n, "cycles": records }));
            }
            Ok(Outcome {
                result: json!({ "periods": per_n }),
                table: Some((cycle_header(), rows)),
                negative: false,
            })
        }
        Command::Milnor { map, d } => {
            let f = input::map(&map.map, prec)?;
            let ring = QuadraticRing::new(*d)?;
            let v = milnor_integrality_test(&f, &ring, cfg.nmax, cfg.tol, &spectrum_options(cfg))?;
            Ok(Outcome::json(to_value(&v), v.verdict == Verdict::Fail))
        }
        Command::Lyapunov {
            map,
            exception_budget,
            log_tol,
        } => {
            let f = input::map(&map.map, prec)?;
            let v = constant_lyapunov_test(
                &f,
                cfg.nmax,
                *log_tol,
                *exception_budget,
                &spectrum_options(cfg),
            )?;
            Ok(Outcome::json(to_value(&v), v.verdict == Verdict::Fail))
        }
        Command::Homoclinic {
            orbit,
            extra,
            window,
        } => {
            let f = input::map(&orbit.map.map, prec)?;
            let o = input::point(&orbit.fixed_point, prec)?;
            let seed = input::point(&orbit.preimages[0], prec)?;
            let run = run_homoclinic(
                &f,
                &o,
                &seed,
                *extra,
                cfg.tol,
                *window,
                &homoclinic_options(cfg, orbit),
            )?;
            let report = run.report();
            let rows = report
                .multipliers
                .iter()
                .zip(&report.fit.residuals)
                .map(|((i, mu), (_, res))| vec![i.to_string(), mu.clone(), format!("{res:e}")])
                .collect();
            Ok(Outcome {
                negative: report.verdict.verdict == Verdict::Fail,
                result: to_value(&report),
                table: Some((vec!["i", "multiplier", "residual"], rows)),
            })
        }
        Command::Horseshoe { orbit, max_len } => {
            let (f, h) = horseshoe(cfg, orbit)?;
            let report = horseshoe_report(&h, &f, *max_len)?;
            let rows = report
                .words
                .iter()
                .map(|w| vec![w.word.clone(), w.point.clone(), w.multiplier.clone()])
                .collect();
            Ok(Outcome {
                result: to_value(&report),
                table: Some((vec!["word", "point", "multiplier"], rows)),
                negative: false,
            })
        }
        Command::Livsic {
            orbit,
            max_len,
            threshold,
        } => {
            let (f, h) = horseshoe(cfg, orbit)?;
            let report = livsic_linearity_test(&h, &f, *max_len, *threshold)?;
            let rows = report
                .orbit_means
                .iter()
                .map(|o| {
                    vec![
                        o.word.clone(),
                        o.period.to_string(),
                        format!("{:.17e}", o.mean),
                    ]
                })
                .collect();
            Ok(Outcome {
                negative: report.verdict == LinearityVerdict::Nonlinear,
                result: to_value(&report),
                table: Some((vec!["word", "period", "mean"], rows)),
            })
        }
        Command::Rescale {
            family,
            mobius,
            q,
            max_denominator,
        } => {
            let fam = input::family(family)?;
            let budget = cfg.compose_budget;
            match mobius {
                Some(m) => {
                    let m = input::mobius(m)?;
                    let lim = rescaling_limit_with_budget(&fam, &m, *q, budget)?;
                    let report = lim.report.to_json();
                    let degenerate = lim.report.reduction_degree == 0;
                    Ok(Outcome::json(
                        json!({
                            "limit": lim.limit().map(|g| g.to_json()),
                            "limit_text": lim.limit().map(|g| g.describe()),
                            "degenerate": degenerate,
                            "indeterminacy": report.indeterminacy,
                            "conjugated": lim.conjugated.to_json(),
                            "reduction": report,
                        }),
                        degenerate,
                    ))
                }
                None => {
                    let opts = ProposalOptions {
                        max_denominator: *max_denominator,
                        budget,
                        ..Default::default()
                    };
                    let props = propose_rescalings_with(&fam, *q, &opts)?;
                    let list: Vec<Value> = props
                        .iter()
                        .map(|p| {
                            json!({
                                "base_change": p.base_change,
                                "center": p.center,
                                "scale_exponent": p.scale_exponent,
                                "mobius": p.mobius,
                                "limit": p.limit.to_json(),
                                "limit_text": p.limit.describe(),
                                "reduction_degree": p.report.reduction_degree,
                            })
                        })
                        .collect();
                    Ok(Outcome::json(json!({ "proposals": list }), false))
                }
            }
        }
        Command::Goodred { family } => {
            let fam = input::family(family)?;
            let report = reduce_at_zero(&fam)?;
            Ok(Outcome::json(
                to_value(&report.to_json()),
                !report.explicit_good,
            ))
        }
        Command::Match { map, other } => {
            let f = input::map(&map.map, prec)?;
            let (g, conj) = match other {
                Some(o) => (input::map(o, prec)?, None),
                None => {
                    let m = random_mobius(cfg.seed);
                    let entries: Vec<String> = [&m.a, &m.b, &m.c, &m.d]
                        .iter()
                        .map(|s| s.to_string())
                        .collect();
                    (f.conjugate(&m)?, Some(entries))
                }
            };
            let opts = spectrum_options(cfg);
            let report = match_spectra(
                &spectrum_table(&f, cfg.nmax, &opts)?,
                &spectrum_table(&g, cfg.nmax, &opts)?,
                cfg.tol,
            );
            let mut v = to_value(&report);
            if let Some(c) = conj {
                v["conjugator"] = json!(c);
            }
            v["other"] = to_value(&g.to_json());
            Ok(Outcome::json(v, !report.matched))
        }
    }
}

fn horseshoe(cfg: &Config, orbit: &OrbitArgs) -> Result<(RationalMap, p1dyn::cer::Horseshoe)> {
    let prec = cfg.prec_bits;
    let f = input::map(&orbit.map.map, prec)?;
    let opts = homoclinic_options(cfg, orbit);
    let o = polish_fixed_point(&f, &input::point(&orbit.fixed_point, prec)?, prec)?;
    let chart = koenigs_chart(&f, &o, opts.order, prec)?;
    let orbits = orbit
        .preimages
        .iter()
        .map(|s| {
            let seed = polish_preimage(&f, &o, &input::point(s, prec)?, opts.depth_cap, prec)?;
            find_homoclinic_with(&f, &chart, &seed, opts.depth_cap, &opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let h = build_horseshoe(&f, &chart, &orbits, &opts)?;
    Ok((f, h))
}

fn cycle_header() -> Vec<&'static str> {
    vec![
        "n",
        "period",
        "point",
        "multiplier_re",
        "multiplier_im",
        "multiplier_abs",
        "class",
        "multiplicity",
    ]
}

fn cycle_row(n: usize, r: &p1dyn::periodic::CycleRecord) -> Vec<String> {
    vec![
        n.to_string(),
        r.period.to_string(),
        r.point.clone(),
        r.multiplier_re.clone(),
        r.multiplier_im.clone(),
        r.multiplier_abs.clone(),
        r.class.as_str().to_string(),
        r.multiplicity.to_string(),
    ]
}

fn echo(cfg: &Config, cmd: &Command) -> Value {
    let mut v = to_value(cfg);
    v["command"] = json!(cmd.name());
    let args = to_value(cmd);
    v["arguments"] = args
        .as_object()
        .and_then(|o| o.values().next().cloned())
        .unwrap_or(Value::Null);
    v
}

fn error_value(e: &Error) -> Value {
    let mut v = json!({ "code": e.code(), "message": e.to_string() });
    if let Error::NoCandidates { hints } = e {
        v["base_change_hints"] = json!(hints);
    }
    v
}

fn emit(cfg: &Config, cmd: &Command, outcome: &Result<Outcome>) -> std::io::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let config = echo(cfg, cmd);
    match (cfg.format, outcome) {
        (
            Format::Csv,
            Ok(Outcome {
                table: Some((header, rows)),
                ..
            }),
        ) => {
            writeln!(out, "# config: {}", serde_json::to_string(&config)?)?;
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        (_, Ok(o)) => {
            let doc = json!({ "config": config, "result": o.result });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        (_, Err(e)) => {
            let doc = json!({ "config": config, "error": error_value(e) });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut outcome = run(&cli.config, &cli.command);
    if cli.config.format == Format::Csv {
        if let Ok(Outcome { table: None, .. }) = outcome {
            outcome = Err(Error::BadInput(format!(
                "csv output is not available for {}",
                cli.command.name()
            )));
        }
    }
    if let Err(e) = &outcome {
        eprintln!("error [{}]: {e}", e.code());
    }
    if let Err(e) = emit(&cli.config, &cli.command, &outcome) {
        eprintln!("error writing output: {e}");
        return ExitCode::from(1);
    }
    match outcome {
        Ok(o) if o.negative => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(_) => ExitCode::from(1),
    }
}
