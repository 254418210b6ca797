//! Command line front end for the steinlab library.
//!
//! Subcommands: `bias` (distributional transforms), `distance` (exact or
//! empirical Wasserstein/Kolmogorov distances), `bound` (closed-form gamma
//! approximation bounds), `reproduce` (verification scenarios), `schema`
//! (JSON schemas of the output types).
//!
//! Output is JSON by default, with every floating-point number rounded to
//! 12 significant digits; `reproduce --out csv` switches to a stable CSV
//! layout. Identical arguments and seed produce byte-identical stdout.
//! Exit codes: 0 success, 1 usage or computation error, 2 when a
//! reproduction scenario has an unsatisfied row.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use steinlab::bounds::{self, BoundReport};
use steinlab::experiments::{self, round_sig12, ExperimentResult};
use steinlab::metrics;
use steinlab::transforms::{self, BiasKind};
use steinlab::{parse_dist, rng, Dist, NumericLaw, SteinError};

/// Default number of Monte Carlo draws for the `reproduce sum` scenario.
const SUM_DRAWS: usize = 100_000;

#[derive(Parser)]
#[command(name = "steinlab", version, about = "Gamma approximation toolkit: bias transforms, probability distances, and closed-form error bounds", max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a bias transform to a distribution.
    ///
    /// Prints `{"closed_form": "<spec>"}` when the transform has a closed
    /// form and `{"numeric": {...}}` (a gridded CDF table with knots and
    /// atoms) otherwise.
    Bias {
        /// Which transform to apply.
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Input distribution, e.g. `gamma:r=2,alpha=1` or
        /// `cp:lambda=1,jump=(scaled:c=0.1,inner=(logarithmic:p=0.1))`.
        #[arg(long)]
        dist: String,
    },
    /// Compute the distance between two distributions.
    Distance {
        /// Probability metric to use.
        #[arg(long, value_enum)]
        metric: MetricArg,
        /// First distribution spec.
        #[arg(long)]
        d1: String,
        /// Second distribution spec.
        #[arg(long)]
        d2: String,
        /// Absolute tolerance for the exact quadrature path.
        #[arg(long, default_value_t = metrics::DEFAULT_TOL)]
        tol: f64,
        /// Estimate from this many Monte Carlo draws instead of quadrature.
        #[arg(long, value_name = "N")]
        empirical: Option<usize>,
        /// Seed for the empirical path.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a closed-form bound.
    #[command(subcommand)]
    Bound(BoundCmd),
    /// Run a verification scenario and report per-row pass/fail verdicts.
    ///
    /// Exits 2 if any row is unsatisfied (output is still printed).
    Reproduce(ReproduceArgs),
    /// Print the JSON schemas of the output types.
    Schema,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Size,
    Zero,
    Equilibrium,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Wasserstein,
    Kolmogorov,
}

#[derive(Subcommand)]
enum BoundCmd {
    /// Wasserstein and Kolmogorov bounds for a law with the given moments
    /// and transform discrepancy theta.
    Theorem2 {
        /// Mean of the law.
        #[arg(long)]
        mu: f64,
        /// Variance of the law.
        #[arg(long)]
        var: f64,
        /// Wasserstein distance between the size-biased and zero-biased laws.
        #[arg(long)]
        theta: f64,
    },
    /// Wasserstein bound between two gamma laws.
    GammaPair {
        /// Shape of the first gamma law.
        #[arg(long)]
        r1: f64,
        /// Rate of the first gamma law.
        #[arg(long)]
        a1: f64,
        /// Shape of the second gamma law.
        #[arg(long)]
        r2: f64,
        /// Rate of the second gamma law.
        #[arg(long)]
        a2: f64,
    },
    /// Gamma approximation bounds for the negative binomial law.
    Nb {
        /// Shape parameter kappa (> 0).
        #[arg(long)]
        kappa: f64,
        /// Success probability p in (0,1).
        #[arg(long)]
        p: f64,
        /// Optional per-summand scale for the random-sum bound.
        #[arg(long)]
        nu: Option<f64>,
    },
    /// Exact values and bound for the compound Poisson law with
    /// truncated-exponential jumps of cutoff delta.
    Example1 {
        /// Jump cutoff delta (> 0).
        #[arg(long)]
        delta: f64,
    },
}

#[derive(Args)]
struct ReproduceArgs {
    /// Scenario to run.
    #[arg(value_enum)]
    scenario: Scenario,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutFmt::Json)]
    out: OutFmt,
    /// Master seed for Monte Carlo scenarios.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shape grid `start:stop:count` (characterization).
    #[arg(long, value_name = "START:STOP:COUNT")]
    r_grid: Option<String>,
    /// Rate grid `start:stop:count` (characterization).
    #[arg(long, value_name = "START:STOP:COUNT")]
    alpha_grid: Option<String>,
    /// Cutoff grid `start:stop:count` (example1).
    #[arg(long, value_name = "START:STOP:COUNT")]
    delta_grid: Option<String>,
    /// Kappa grid `start:stop:count` (nb).
    #[arg(long, value_name = "START:STOP:COUNT")]
    kappa_grid: Option<String>,
    /// p grid `start:stop:count` (nb).
    #[arg(long, value_name = "START:STOP:COUNT")]
    p_grid: Option<String>,
    /// Summand specs, `;`-separated (sum). Defaults to ten uniform(0,1) laws.
    #[arg(long, value_name = "SPEC;SPEC;...")]
    parts: Option<String>,
    /// Monte Carlo draws per coupling (sum).
    #[arg(long, default_value_t = SUM_DRAWS)]
    n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    Characterization,
    Example1,
    Nb,
    Counterexample,
    Sum,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OutFmt {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are "errors" to clap but successes to the shell
            if e.use_stderr() {
                let _ = e.print();
                return ExitCode::from(1);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let (category, detail) = match &e {
                SteinError::Parse { pos, msg } => {
                    ("parse".to_string(), format!("at position {pos}: {msg}"))
                }
                SteinError::Domain(m) => ("domain".to_string(), m.clone()),
                SteinError::Unsupported(m) => ("unsupported".to_string(), m.clone()),
                SteinError::Tolerance { msg, achieved } => (
                    "numerics".to_string(),
                    format!("{msg} (achieved error {achieved:.3e})"),
                ),
            };
            eprintln!("error: {category}: {detail}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<u8, SteinError> {
    match cmd {
        Command::Bias { kind, dist } => {
            let kind = match kind {
                KindArg::Size => BiasKind::SizeBias,
                KindArg::Zero => BiasKind::ZeroBias,
                KindArg::Equilibrium => BiasKind::Equilibrium,
            };
            let d = parse_dist(&dist)?;
            let transformed = transforms::apply(kind, &d)?;
            print_json(&bias_value(&transformed)?);
            Ok(0)
        }
        Command::Distance {
            metric,
            d1,
            d2,
            tol,
            empirical,
            seed,
        } => {
            let d1 = parse_dist(&d1)?;
            let d2 = parse_dist(&d2)?;
            let est = match (metric, empirical) {
                (MetricArg::Wasserstein, None) => metrics::wasserstein(&d1, &d2, tol)?,
                (MetricArg::Kolmogorov, None) => metrics::kolmogorov(&d1, &d2, tol)?,
                (MetricArg::Wasserstein, Some(n)) => {
                    let s1 = d1.sample(&mut rng::split_stream(seed, 0), n)?;
                    let s2 = d2.sample(&mut rng::split_stream(seed, 1), n)?;
                    metrics::wasserstein_empirical(&s1, &s2)?
                }
                (MetricArg::Kolmogorov, Some(n)) => {
                    let s = d1.sample(&mut rng::split_stream(seed, 0), n)?;
                    metrics::kolmogorov_empirical(&s, &d2)?
                }
            };
            print_json(&serde_json::to_value(est).expect("serializable"));
            Ok(0)
        }
        Command::Bound(bound) => {
            let value = match bound {
                BoundCmd::Theorem2 { mu, var, theta } => {
                    let report = BoundReport::new(mu, var, theta)?;
                    serde_json::to_value(report).expect("serializable")
                }
                BoundCmd::GammaPair { r1, a1, r2, a2 } => {
                    let bound = bounds::gamma_pair_bound(r1, a1, r2, a2)?;
                    json!({ "r1": r1, "a1": a1, "r2": r2, "a2": a2, "w_bound": bound })
                }
                BoundCmd::Nb { kappa, p, nu } => {
                    let (theta, w_bound, k_bound) = bounds::nb_bounds(kappa, p)?;
                    let mut v = json!({
                        "kappa": kappa,
                        "p": p,
                        "theta": theta,
                        "w_bound": w_bound,
                        "k_bound": k_bound,
                    });
                    if let Some(nu) = nu {
                        let sum_bound = bounds::nb_sum_bound(kappa, p, nu)?;
                        v["nu"] = json!(nu);
                        v["sum_bound"] = json!(sum_bound);
                    }
                    v
                }
                BoundCmd::Example1 { delta } => {
                    let (theta, w_bound, exact) = bounds::example1_values(delta)?;
                    json!({
                        "delta": delta,
                        "theta": theta,
                        "w_bound": w_bound,
                        "exact": exact,
                    })
                }
            };
            print_json(&value);
            Ok(0)
        }
        Command::Reproduce(args) => reproduce(args),
        Command::Schema => {
            print_json(&schemas());
            Ok(0)
        }
    }
}

/// Renders a transform result as a closed-form spec when one exists and as
/// a numeric table otherwise.
fn bias_value(d: &Dist) -> Result<Value, SteinError> {
    fn numeric(law: &NumericLaw) -> Value {
        json!({ "numeric": law })
    }
    match d {
        Dist::Numeric { law } => Ok(numeric(law)),
        Dist::Scaled { c, inner } => {
            if let Dist::Numeric { law } = inner.as_ref() {
                return Ok(numeric(&law.scaled(*c)));
            }
            match steinlab::format_dist(d) {
                Ok(s) => Ok(json!({ "closed_form": s })),
                Err(_) => Ok(numeric(&d.to_numeric(metrics::NUMERIC_TOL)?)),
            }
        }
        _ => match steinlab::format_dist(d) {
            Ok(s) => Ok(json!({ "closed_form": s })),
            Err(_) => Ok(numeric(&d.to_numeric(metrics::NUMERIC_TOL)?)),
        },
    }
}

fn reproduce(args: ReproduceArgs) -> Result<u8, SteinError> {
    let mut result: ExperimentResult = match args.scenario {
        Scenario::Characterization => {
            let rs = grid_or(&args.r_grid, &[0.5, 1.0, 2.0, 5.0])?;
            let alphas = grid_or(&args.alpha_grid, &[0.5, 1.0, 3.0])?;
            let grid: Vec<(f64, f64)> = rs
                .iter()
                .flat_map(|&r| alphas.iter().map(move |&a| (r, a)))
                .collect();
            experiments::run_characterization(&grid)?
        }
        Scenario::Example1 => {
            let deltas = grid_or(&args.delta_grid, &experiments::DEFAULT_EXAMPLE1_DELTAS)?;
            experiments::run_example1(&deltas)?
        }
        Scenario::Nb => {
            let (dk, dp) = experiments::default_nb_grid();
            let kappas = grid_or(&args.kappa_grid, &dk)?;
            let ps = grid_or(&args.p_grid, &dp)?;
            experiments::run_nb(&kappas, &ps)?
        }
        Scenario::Counterexample => experiments::run_counterexample()?,
        Scenario::Sum => {
            let parts: Vec<Dist> = match &args.parts {
                Some(spec) => spec
                    .split(';')
                    .map(parse_dist)
                    .collect::<Result<_, _>>()?,
                None => {
                    let uniform = NumericLaw::uniform(0.0, 1.0)?;
                    (0..10)
                        .map(|_| Dist::Numeric {
                            law: uniform.clone(),
                        })
                        .collect()
                }
            };
            experiments::run_sum(&parts, args.seed, args.n)?
        }
    };
    result.master_seed = args.seed;
    match args.out {
        OutFmt::Json => {
            print_json(&serde_json::to_value(&result).expect("serializable"));
        }
        OutFmt::Csv => print!("{}", result.to_csv()),
    }
    Ok(if result.all_satisfied() { 0 } else { 2 })
}

/// Parses `start:stop:count` into an inclusive linear grid; `None` yields
/// the scenario default.
fn grid_or(arg: &Option<String>, default: &[f64]) -> Result<Vec<f64>, SteinError> {
    let Some(s) = arg else {
        return Ok(default.to_vec());
    };
    let parts: Vec<&str> = s.split(':').collect();
    let fail = |msg: &str| SteinError::Parse {
        pos: 0,
        msg: format!("grid {s:?}: {msg}"),
    };
    if parts.len() != 3 {
        return Err(fail("expected start:stop:count"));
    }
    let start: f64 = parts[0].parse().map_err(|_| fail("bad start"))?;
    let stop: f64 = parts[1].parse().map_err(|_| fail("bad stop"))?;
    let count: usize = parts[2].parse().map_err(|_| fail("bad count"))?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(fail("count must be >= 1 and endpoints finite"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

/// Prints a JSON value with every float rounded to 12 significant digits.
fn print_json(v: &Value) {
    let mut v = v.clone();
    round_floats(&mut v);
    println!("{}", serde_json::to_string_pretty(&v).expect("valid JSON"));
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if !n.is_u64() && !n.is_i64() {
                if let Some(f) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig12(f)) {
                        *v = Value::Number(r);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn schemas() -> Value {
    let number = json!({ "type": "number" });
    let distance_estimate = json!({
        "type": "object",
        "required": ["value", "metric", "method", "error"],
        "properties": {
            "value": number,
            "metric": { "enum": ["wasserstein", "kolmogorov"] },
            "method": { "enum": ["exact-quadrature", "empirical"] },
            "error": number,
            "n": { "type": "integer", "minimum": 1 },
        },
        "additionalProperties": false,
    });
    let bound_report = json!({
        "type": "object",
        "required": ["mu", "sigma2", "r", "alpha", "theta",
                     "w_bound", "k_bound", "a_const", "b_const", "regime"],
        "properties": {
            "mu": number, "sigma2": number, "r": number, "alpha": number,
            "theta": number, "w_bound": number, "k_bound": number,
            "a_const": number, "b_const": number,
            "regime": { "enum": ["r<1", "r>=1"] },
        },
        "additionalProperties": false,
    });
    let experiment_result = json!({
        "type": "object",
        "required": ["scenario", "rows", "master_seed"],
        "properties": {
            "scenario": { "type": "string" },
            "master_seed": { "type": "integer", "minimum": 0 },
            "rows": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["params", "computed_distance", "paper_bound", "satisfied"],
                    "properties": {
                        "params": { "type": "object" },
                        "computed_distance": { "$ref": "#/DistanceEstimate" },
                        "paper_bound": number,
                        "exact_value": number,
                        "satisfied": { "type": "boolean" },
                    },
                    "additionalProperties": false,
                },
            },
        },
        "additionalProperties": false,
    });
    json!({
        "$schema": "http://json-schema.org/draft-07/schema#",
        "DistanceEstimate": distance_estimate,
        "BoundReport": bound_report,
        "ExperimentResult": experiment_result,
    })
}
