//! `betacf`: command-line front end for the exact β-expansion /
//! continued-fraction toolkit.
//!
//! Every run echoes its fully resolved configuration. JSON artifacts embed
//! that configuration under `"config"`, and `betacf rerun --config FILE`
//! re-executes it, so any JSON output doubles as a reproducible run recipe.
//!
//! Exit codes: 0 success, 2 usage, 3 domain/parse error, 4 resource or
//! budget refusal, 5 indeterminate sign under the requested certification.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use betacf_core::{
    approx_compare, beta_digits, cf_cylinder, cf_digits, cylinder_at, deviation_measure,
    fixture_by_name, kn, kn_series, lochs_mean, lyapunov_tau_at, pressure, rate_constants_at,
    rational_from_decimal, to_decimal_string, wilson_ci, zero_run_tail, ContainmentWitness,
    Error as CoreError, ExactRational, PrecisionPolicy, RateValue, SamplePlan, Sign, Tier,
};

/// Fractional digits used when rendering exact rationals as decimals.
const DECIMAL_DIGITS: usize = 30;
/// Fractional digits for interval endpoints inside certificates.
const WITNESS_DIGITS: usize = 40;
/// Guard bits attached to an explicit `--bits` budget.
const GUARD_BITS: usize = 256;
/// Normal-approximation z for mean confidence intervals.
const MEAN_Z: f64 = 1.96;

#[derive(Parser)]
#[command(
    name = "betacf",
    version,
    about = "Exact beta-expansions, continued fractions, digit-agreement counters, \
             and pressure-based rate constants"
)]
struct Cli {
    /// Worker threads for sampled experiments (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for sampled experiments.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Text)]
    out: OutFormat,

    /// Shorthand for `--out json`.
    #[arg(long, global = true)]
    json: bool,

    /// Write output atomically to this file instead of stdout.
    #[arg(long, global = true)]
    out_file: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Text,
    Json,
    Csv,
}

impl OutFormat {
    fn name(self) -> &'static str {
        match self {
            OutFormat::Text => "text",
            OutFormat::Json => "json",
            OutFormat::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TierArg {
    /// Fast grid; wide uncertainties.
    Coarse,
    /// Fine grid; reporting quality.
    Certify,
}

impl TierArg {
    fn name(self) -> &'static str {
        match self {
            TierArg::Coarse => "coarse",
            TierArg::Certify => "certify",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Digits, orbit tail, and cylinder of a β-expansion.
    Expand {
        /// Base β > 1, as "p/q" or a decimal.
        #[arg(long)]
        beta: String,
        /// Point in [0,1), as "p/q" or a decimal.
        #[arg(long)]
        x: String,
        /// Number of digits to compute.
        #[arg(long)]
        n: usize,
    },
    /// Continued-fraction quotients, convergents, and cylinder of a point.
    Cf {
        /// Point in (0,1), as "p/q" or a decimal.
        #[arg(long)]
        x: String,
        /// Maximum number of quotients to compute.
        #[arg(long, default_value_t = 64)]
        max_m: usize,
    },
    /// Digit-agreement counter k_n with exact containment certificates.
    Kn {
        /// Base β > 1, as "p/q" or a decimal.
        #[arg(long)]
        beta: String,
        /// Point in (0,1), as "p/q" or a decimal.
        #[arg(long)]
        x: Option<String>,
        /// Named built-in point (available: pi).
        #[arg(long)]
        fixture: Option<String>,
        /// β-expansion depth n.
        #[arg(long)]
        n: usize,
        /// Report k_1..k_n instead of k_n alone.
        #[arg(long)]
        series: bool,
    },
    /// Finite-level pressure estimate with explicit truncation brackets.
    Pressure {
        /// Exponent θ.
        #[arg(long)]
        theta: f64,
        /// Composition depth.
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Largest explicit quotient; larger ones go into the tail bound.
        #[arg(long, default_value_t = 100)]
        cutoff: u32,
    },
    /// The four rate exponents for one base and tolerance.
    Rates {
        /// Base β > 1, as "p/q" or a decimal.
        #[arg(long)]
        beta: String,
        /// Tolerance ε ∈ (0, a(β)).
        #[arg(long)]
        eps: f64,
        /// Accuracy tier.
        #[arg(long, value_enum, default_value_t = TierArg::Certify)]
        tier: TierArg,
        /// Exit with code 5 unless theta1 and theta2 are certifiably negative.
        #[arg(long)]
        require_signs: bool,
    },
    /// Large-deviation exponent τ(γ) for the denominator growth rate.
    Tau {
        /// Rate γ; must exceed twice the log golden ratio.
        #[arg(long)]
        gamma: f64,
        /// Accuracy tier.
        #[arg(long, value_enum, default_value_t = TierArg::Certify)]
        tier: TierArg,
    },
    /// Fraction of sampled points with |k_n/n − a(β)| ≥ ε, per depth.
    Deviation {
        /// Base β > 1, as "p/q" or a decimal.
        #[arg(long)]
        beta: String,
        /// Deviation tolerance ε > 0.
        #[arg(long)]
        eps: f64,
        /// Comma-separated strictly increasing depths, e.g. 100,200,300.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        /// Sample count.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Random bits per sampled point (default: sized from the depth).
        #[arg(long)]
        bits: Option<usize>,
    },
    /// Which expansion pins x down more tightly at equal digit depth.
    Approx {
        /// Base β > 1, as "p/q" or a decimal.
        #[arg(long)]
        beta: String,
        /// Comma-separated strictly increasing depths.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        /// Sample count.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Random bits per sampled point (default: sized from the depth).
        #[arg(long)]
        bits: Option<usize>,
    },
    /// Sample mean of k_n/n at one depth.
    LochsMean {
        /// Base β > 1, as "p/q" or a decimal.
        #[arg(long)]
        beta: String,
        /// Depth n.
        #[arg(long)]
        n: usize,
        /// Sample count.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Random bits per sampled point (default: sized from the depth).
        #[arg(long)]
        bits: Option<usize>,
    },
    /// Tail measure of the zero-run length after digit n.
    ZeroRuns {
        /// Base β > 1, as "p/q" or a decimal.
        #[arg(long)]
        beta: String,
        /// Digit position n.
        #[arg(long)]
        n: usize,
        /// Report run lengths 0..=i_max.
        #[arg(long, default_value_t = 8)]
        i_max: usize,
        /// Sample count.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Random bits per sampled point (default: sized from the depth).
        #[arg(long)]
        bits: Option<usize>,
    },
    /// Re-execute a run from a previously emitted JSON artifact.
    Rerun {
        /// JSON file holding either a full artifact or a bare config object.
        #[arg(long)]
        config: PathBuf,
    },
}

/// Fully resolved run parameters: what actually executed. Serialized into
/// every output header and accepted back by `rerun`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum RunConfig {
    Expand {
        beta: String,
        x: String,
        n: usize,
    },
    Cf {
        x: String,
        max_m: usize,
    },
    Kn {
        beta: String,
        x: Option<String>,
        fixture: Option<String>,
        n: usize,
        series: bool,
    },
    Pressure {
        theta: f64,
        depth: usize,
        cutoff: u32,
    },
    Rates {
        beta: String,
        eps: f64,
        tier: String,
        require_signs: bool,
    },
    Tau {
        gamma: f64,
        tier: String,
    },
    Deviation {
        beta: String,
        eps: f64,
        n_list: Vec<usize>,
        samples: usize,
        seed: u64,
        bits: Option<usize>,
    },
    Approx {
        beta: String,
        n_list: Vec<usize>,
        samples: usize,
        seed: u64,
        bits: Option<usize>,
    },
    LochsMean {
        beta: String,
        n: usize,
        samples: usize,
        seed: u64,
        bits: Option<usize>,
    },
    ZeroRuns {
        beta: String,
        n: usize,
        i_max: usize,
        samples: usize,
        seed: u64,
        bits: Option<usize>,
    },
}

impl RunConfig {
    fn supports_csv(&self) -> bool {
        matches!(
            self,
            RunConfig::Deviation { .. }
                | RunConfig::Approx { .. }
                | RunConfig::LochsMean { .. }
                | RunConfig::ZeroRuns { .. }
        )
    }
}

/// Rendered result in all three shapes; the caller picks one.
struct Rendered {
    json: Value,
    text: String,
    csv: Option<String>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(err: CoreError) -> Self {
        Failure {
            code: exit_code_for(&err),
            message: err.to_string(),
        }
    }
}

fn exit_code_for(err: &CoreError) -> u8 {
    match err {
        CoreError::Domain(_)
        | CoreError::Parse(_)
        | CoreError::Range(_)
        | CoreError::Window(_)
        | CoreError::DegenerateSample(_)
        | CoreError::Fit(_)
        | CoreError::Fixture(_) => 3,
        CoreError::Resource(_) | CoreError::Plan(_) => 4,
        CoreError::IndeterminateSign(_) => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore a second initialization (tests may drive main repeatedly).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match drive(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn drive(cli: Cli) -> Result<(), Failure> {
    let format = if cli.json { OutFormat::Json } else { cli.out };
    let run = match &cli.command {
        Command::Rerun { config } => load_rerun_config(config)?,
        other => to_run_config(other, cli.seed)?,
    };
    if format == OutFormat::Csv && !run.supports_csv() {
        return Err(Failure::usage(
            "--out csv is only available for deviation, approx, lochs-mean, and zero-runs",
        ));
    }
    let rendered = execute(&run)?;
    let config_value = serde_json::to_value(&run).expect("run config serializes");
    let payload = match format {
        OutFormat::Json => {
            let invocation = json!({
                "out": format.name(),
                "threads": cli.threads,
                "out_file": cli.out_file.as_ref().map(|p| p.display().to_string()),
            });
            let doc = json!({
                "config": config_value,
                "invocation": invocation,
                "result": rendered.json,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("artifact serializes");
            s.push('\n');
            s
        }
        OutFormat::Text => format!("# config {}\n{}", compact(&config_value), rendered.text),
        OutFormat::Csv => format!(
            "# config {}\n{}",
            compact(&config_value),
            rendered.csv.expect("csv support checked above")
        ),
    };
    match &cli.out_file {
        Some(path) => atomic_write(path, payload.as_bytes()).map_err(|e| Failure {
            code: 4,
            message: format!("writing {}: {e}", path.display()),
        })?,
        None => print!("{payload}"),
    }
    Ok(())
}

fn compact(v: &Value) -> String {
    serde_json::to_string(v).expect("value serializes")
}

/// Write through a temporary file in the destination directory and rename
/// into place, so readers never observe a partial file.
fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn to_run_config(cmd: &Command, seed: u64) -> Result<RunConfig, Failure> {
    Ok(match cmd {
        Command::Expand { beta, x, n } => RunConfig::Expand {
            beta: beta.clone(),
            x: x.clone(),
            n: *n,
        },
        Command::Cf { x, max_m } => RunConfig::Cf {
            x: x.clone(),
            max_m: *max_m,
        },
        Command::Kn {
            beta,
            x,
            fixture,
            n,
            series,
        } => {
            if x.is_some() == fixture.is_some() {
                return Err(Failure::usage("kn needs exactly one of --x or --fixture"));
            }
            RunConfig::Kn {
                beta: beta.clone(),
                x: x.clone(),
                fixture: fixture.clone(),
                n: *n,
                series: *series,
            }
        }
        Command::Pressure {
            theta,
            depth,
            cutoff,
        } => RunConfig::Pressure {
            theta: *theta,
            depth: *depth,
            cutoff: *cutoff,
        },
        Command::Rates {
            beta,
            eps,
            tier,
            require_signs,
        } => RunConfig::Rates {
            beta: beta.clone(),
            eps: *eps,
            tier: tier.name().to_string(),
            require_signs: *require_signs,
        },
        Command::Tau { gamma, tier } => RunConfig::Tau {
            gamma: *gamma,
            tier: tier.name().to_string(),
        },
        Command::Deviation {
            beta,
            eps,
            n_list,
            samples,
            bits,
        } => RunConfig::Deviation {
            beta: beta.clone(),
            eps: *eps,
            n_list: n_list.clone(),
            samples: *samples,
            seed,
            bits: *bits,
        },
        Command::Approx {
            beta,
            n_list,
            samples,
            bits,
        } => RunConfig::Approx {
            beta: beta.clone(),
            n_list: n_list.clone(),
            samples: *samples,
            seed,
            bits: *bits,
        },
        Command::LochsMean {
            beta,
            n,
            samples,
            bits,
        } => RunConfig::LochsMean {
            beta: beta.clone(),
            n: *n,
            samples: *samples,
            seed,
            bits: *bits,
        },
        Command::ZeroRuns {
            beta,
            n,
            i_max,
            samples,
            bits,
        } => RunConfig::ZeroRuns {
            beta: beta.clone(),
            n: *n,
            i_max: *i_max,
            samples: *samples,
            seed,
            bits: *bits,
        },
        Command::Rerun { .. } => unreachable!("rerun resolved by the caller"),
    })
}

fn load_rerun_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: 4,
        message: format!("reading {}: {e}", path.display()),
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure {
        code: 3,
        message: format!("{}: not valid JSON: {e}", path.display()),
    })?;
    let config = value.get("config").cloned().unwrap_or(value);
    serde_json::from_value(config).map_err(|e| Failure {
        code: 3,
        message: format!("{}: not a run config: {e}", path.display()),
    })
}

// ---------------------------------------------------------------------------
// Argument helpers
// ---------------------------------------------------------------------------

fn parse_rational_arg(name: &str, s: &str) -> Result<ExactRational, CoreError> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| CoreError::Parse(format!("{name}: bad integer '{}'", num.trim())))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| CoreError::Parse(format!("{name}: bad integer '{}'", den.trim())))?;
        if d.is_zero() {
            return Err(CoreError::Parse(format!("{name}: zero denominator")));
        }
        Ok(ExactRational::new(n, d))
    } else {
        rational_from_decimal(s).map_err(|e| CoreError::Parse(format!("{name}: {e}")))
    }
}

fn tier_of(name: &str) -> Result<Tier, CoreError> {
    match name {
        "coarse" => Ok(Tier::Coarse),
        "certify" => Ok(Tier::Certify),
        other => Err(CoreError::Parse(format!(
            "unknown tier '{other}'; expected coarse or certify"
        ))),
    }
}

fn make_plan(
    beta: ExactRational,
    seed: u64,
    samples: usize,
    bits: Option<usize>,
    depth: usize,
) -> Result<SamplePlan, CoreError> {
    let plan = match bits {
        Some(b) => SamplePlan::new(seed, samples, beta, PrecisionPolicy::new(b, GUARD_BITS)?)?,
        None => SamplePlan::for_depth(seed, samples, beta, depth)?,
    };
    plan.check_budget(depth)?;
    Ok(plan)
}

fn plan_json(plan: &SamplePlan) -> Value {
    json!({
        "seed": plan.seed,
        "count": plan.count,
        "input_bits": plan.policy.input_bits,
        "guard_bits": plan.policy.guard_bits,
        "beta": plan.beta.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Rendering helpers
// ---------------------------------------------------------------------------

fn rational_json(r: &ExactRational) -> Value {
    json!({
        "rational": r.to_string(),
        "decimal": to_decimal_string(r, DECIMAL_DIGITS),
    })
}

/// Exact form when short; decimal otherwise (the JSON output keeps the
/// full rational).
fn short_rational(r: &ExactRational) -> String {
    let exact = r.to_string();
    if exact.len() <= 48 {
        format!("{exact} ({})", to_decimal_string(r, DECIMAL_DIGITS))
    } else {
        format!("{}…", to_decimal_string(r, DECIMAL_DIGITS))
    }
}

fn sign_name(sign: Sign) -> &'static str {
    match sign {
        Sign::Negative => "negative",
        Sign::Positive => "positive",
        Sign::Indeterminate => "indeterminate",
    }
}

fn rate_value_json(v: &RateValue) -> Value {
    json!({
        "value": v.value,
        "uncertainty": v.uncertainty,
        "t_argmin": v.t_argmin,
        "sign": sign_name(v.sign()),
    })
}

fn rate_value_line(label: &str, v: &RateValue) -> String {
    format!(
        "{label:<10} = {:+.6} ± {:.2e}  at t = {:.4}  [{}]",
        v.value,
        v.uncertainty,
        v.t_argmin,
        sign_name(v.sign())
    )
}

fn witness_json(w: &ContainmentWitness) -> Value {
    json!({
        "cf_depth": w.cf_depth,
        "contained": w.contained,
        "boundary_collision": w.boundary_collision,
        "j_left": to_decimal_string(&w.j_left, WITNESS_DIGITS),
        "j_right": to_decimal_string(&w.j_right, WITNESS_DIGITS),
        "i_low": to_decimal_string(&w.i_low, WITNESS_DIGITS),
        "i_high": to_decimal_string(&w.i_high, WITNESS_DIGITS),
        "failed_side": w.failed_side.map(|s| format!("{s:?}").to_lowercase()),
    })
}

fn csv_table(rows: &[(usize, f64, f64, f64, u64)]) -> String {
    let mut out = String::from("n,estimate,ci_low,ci_high,discarded\n");
    for (n, est, lo, hi, discarded) in rows {
        out.push_str(&format!("{n},{est},{lo},{hi},{discarded}\n"));
    }
    out
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

fn execute(run: &RunConfig) -> Result<Rendered, CoreError> {
    match run {
        RunConfig::Expand { beta, x, n } => run_expand(beta, x, *n),
        RunConfig::Cf { x, max_m } => run_cf(x, *max_m),
        RunConfig::Kn {
            beta,
            x,
            fixture,
            n,
            series,
        } => run_kn(beta, x.as_deref(), fixture.as_deref(), *n, *series),
        RunConfig::Pressure {
            theta,
            depth,
            cutoff,
        } => run_pressure(*theta, *depth, *cutoff),
        RunConfig::Rates {
            beta,
            eps,
            tier,
            require_signs,
        } => run_rates(beta, *eps, tier, *require_signs),
        RunConfig::Tau { gamma, tier } => run_tau(*gamma, tier),
        RunConfig::Deviation {
            beta,
            eps,
            n_list,
            samples,
            seed,
            bits,
        } => run_deviation(beta, *eps, n_list, *samples, *seed, *bits),
        RunConfig::Approx {
            beta,
            n_list,
            samples,
            seed,
            bits,
        } => run_approx(beta, n_list, *samples, *seed, *bits),
        RunConfig::LochsMean {
            beta,
            n,
            samples,
            seed,
            bits,
        } => run_lochs_mean(beta, *n, *samples, *seed, *bits),
        RunConfig::ZeroRuns {
            beta,
            n,
            i_max,
            samples,
            seed,
            bits,
        } => run_zero_runs(beta, *n, *i_max, *samples, *seed, *bits),
    }
}

fn run_expand(beta: &str, x: &str, n: usize) -> Result<Rendered, CoreError> {
    let b = parse_rational_arg("beta", beta)?;
    let xr = parse_rational_arg("x", x)?;
    let orbit = beta_digits(&xr, &b, n)?;
    let depth = orbit.depth();
    let cyl = cylinder_at(&orbit, depth)?;
    let right = cyl.right();
    let tail = orbit.orbit.last().expect("orbit holds T^0 x").clone();
    let digits: Vec<String> = orbit.digits.iter().map(|d| d.to_string()).collect();

    let json = json!({
        "beta": rational_json(&b),
        "x": rational_json(&xr),
        "n": n,
        "depth": depth,
        "terminated_at": orbit.terminated_at(),
        "digits": digits,
        "orbit_tail": rational_json(&tail),
        "cylinder": {
            "depth": cyl.depth,
            "left": rational_json(&cyl.left),
            "right": rational_json(&right),
            "length": rational_json(&cyl.length),
        },
    });

    let mut text = String::new();
    text.push_str(&format!(
        "beta = {}  x = {}  n = {}\n",
        short_rational(&b),
        short_rational(&xr),
        n
    ));
    text.push_str(&format!("digits: {}\n", digits.join(" ")));
    if let Some(m) = orbit.terminated_at() {
        text.push_str(&format!("orbit terminated at step {m}\n"));
    }
    text.push_str(&format!("orbit tail = {}\n", short_rational(&tail)));
    text.push_str(&format!(
        "cylinder depth {}: left = {}  right = {}  length = {}\n",
        cyl.depth,
        short_rational(&cyl.left),
        short_rational(&right),
        short_rational(&cyl.length)
    ));
    Ok(Rendered {
        json,
        text,
        csv: None,
    })
}

fn run_cf(x: &str, max_m: usize) -> Result<Rendered, CoreError> {
    let xr = parse_rational_arg("x", x)?;
    let state = cf_digits(&xr, max_m)?;
    let depth = state.depth();
    let quotients: Vec<String> = state.quotients.iter().map(|q| q.to_string()).collect();
    let mut convergents = Vec::with_capacity(depth);
    for k in 1..=depth {
        let value = state.convergent(k);
        convergents.push(json!({
            "k": k,
            "p": state.p(k as isize).to_string(),
            "q": state.q(k as isize).to_string(),
            "decimal": to_decimal_string(&value, DECIMAL_DIGITS),
        }));
    }
    let cylinder = if depth >= 1 {
        let cyl = cf_cylinder(&state, depth)?;
        let (lo, hi) = cyl.hull();
        json!({
            "depth": cyl.depth,
            "endpoint_a": rational_json(&cyl.endpoint_a),
            "endpoint_b": rational_json(&cyl.endpoint_b),
            "length": rational_json(&cyl.length),
            "hull_low": rational_json(&lo),
            "hull_high": rational_json(&hi),
        })
    } else {
        Value::Null
    };

    let json = json!({
        "x": rational_json(&xr),
        "depth": depth,
        "exhausted": state.exhausted,
        "remainder": rational_json(&state.remainder),
        "quotients": quotients,
        "convergents": convergents,
        "cylinder": cylinder,
    });

    let mut text = String::new();
    text.push_str(&format!("x = {}\n", short_rational(&xr)));
    text.push_str(&format!(
        "depth = {depth}  exhausted = {}\n",
        state.exhausted
    ));
    let shown = quotients.len().min(24);
    text.push_str(&format!(
        "quotients: {}{}\n",
        quotients[..shown].join(" "),
        if quotients.len() > shown { " …" } else { "" }
    ));
    if depth >= 1 {
        let value = state.convergent(depth);
        text.push_str(&format!(
            "convergent p_{depth}/q_{depth} = {}\n",
            short_rational(&value)
        ));
    }
    Ok(Rendered {
        json,
        text,
        csv: None,
    })
}

fn resolve_point(x: Option<&str>, fixture: Option<&str>) -> Result<ExactRational, CoreError> {
    match (x, fixture) {
        (Some(s), None) => parse_rational_arg("x", s),
        (None, Some(name)) => fixture_by_name(name),
        _ => Err(CoreError::Parse(
            "kn needs exactly one of --x or --fixture".into(),
        )),
    }
}

fn run_kn(
    beta: &str,
    x: Option<&str>,
    fixture: Option<&str>,
    n: usize,
    series: bool,
) -> Result<Rendered, CoreError> {
    let b = parse_rational_arg("beta", beta)?;
    let xr = resolve_point(x, fixture)?;
    if series {
        let certs = kn_series(&xr, &b, n)?;
        let entries: Vec<Value> = certs
            .iter()
            .map(|c| {
                json!({
                    "n": c.n,
                    "k": c.k,
                    "truncated": c.truncated,
                    "boundary_collision": c.boundary_collision(),
                })
            })
            .collect();
        let last = certs.last().expect("series is nonempty");
        let json = json!({
            "entries": entries,
            "last": {
                "n": last.n,
                "k": last.k,
                "truncated": last.truncated,
                "boundary_collision": last.boundary_collision(),
                "witness_in": witness_json(&last.witness_in),
                "witness_out": last.witness_out.as_ref().map(witness_json),
            },
        });
        let mut text = String::new();
        for c in &certs {
            text.push_str(&format!("k_{} = {}\n", c.n, c.k));
        }
        if last.truncated {
            text.push_str(&format!(
                "note: continued fraction exhausted at depth {}; k_{} is a lower bound\n",
                last.k, last.n
            ));
        }
        Ok(Rendered {
            json,
            text,
            csv: None,
        })
    } else {
        let cert = kn(&xr, &b, n)?;
        let json = json!({
            "n": cert.n,
            "k": cert.k,
            "truncated": cert.truncated,
            "boundary_collision": cert.boundary_collision(),
            "witness_in": witness_json(&cert.witness_in),
            "witness_out": cert.witness_out.as_ref().map(witness_json),
        });
        let mut text = format!("k_{} = {}\n", cert.n, cert.k);
        text.push_str(&format!("truncated = {}\n", cert.truncated));
        text.push_str(&format!(
            "boundary_collision = {}\n",
            cert.boundary_collision()
        ));
        Ok(Rendered {
            json,
            text,
            csv: None,
        })
    }
}

fn run_pressure(theta: f64, depth: usize, cutoff: u32) -> Result<Rendered, CoreError> {
    let est = pressure(theta, depth, cutoff)?;
    let json = serde_json::to_value(&est).expect("estimate serializes");
    let text = format!(
        "P({}) at depth {} cutoff {}\nestimate = {:.9}\nbracket = [{:.9}, {:.9}]\n\
         step estimate = {:.9}\nstep bracket = [{:.9}, {:.9}]\ntail bound per level = {:.3e}\n\
         depth gap = {:.3e}\n",
        est.theta,
        est.depth,
        est.cutoff,
        est.estimate,
        est.bracket.0,
        est.bracket.1,
        est.step_estimate,
        est.step_bracket.0,
        est.step_bracket.1,
        est.tail_bound,
        est.depth_gap
    );
    Ok(Rendered {
        json,
        text,
        csv: None,
    })
}

fn run_rates(beta: &str, eps: f64, tier: &str, require_signs: bool) -> Result<Rendered, CoreError> {
    let b = parse_rational_arg("beta", beta)?;
    let t = tier_of(tier)?;
    let rc = rate_constants_at(&b, eps, t)?;
    if require_signs {
        rc.theta1.certify_negative("theta1")?;
        rc.theta2.certify_negative("theta2")?;
    }
    let json = json!({
        "beta": rc.beta,
        "epsilon": rc.epsilon,
        "a": rc.a,
        "tier": tier,
        "theta1": rate_value_json(&rc.theta1),
        "theta2": rate_value_json(&rc.theta2),
        "theta": rate_value_json(&rc.theta),
        "theta_star": rate_value_json(&rc.theta_star),
    });
    let text = format!(
        "beta = {}  eps = {}  a = {:.6}  tier = {}\n{}\n{}\n{}\n{}\n",
        rc.beta,
        rc.epsilon,
        rc.a,
        tier,
        rate_value_line("theta1", &rc.theta1),
        rate_value_line("theta2", &rc.theta2),
        rate_value_line("theta", &rc.theta),
        rate_value_line("theta_star", &rc.theta_star)
    );
    Ok(Rendered {
        json,
        text,
        csv: None,
    })
}

fn run_tau(gamma: f64, tier: &str) -> Result<Rendered, CoreError> {
    let t = tier_of(tier)?;
    let v = lyapunov_tau_at(gamma, t)?;
    let json = json!({
        "gamma": gamma,
        "tier": tier,
        "tau": rate_value_json(&v),
    });
    let text = format!(
        "gamma = {gamma}  tier = {tier}\n{}\n",
        rate_value_line("tau", &v)
    );
    Ok(Rendered {
        json,
        text,
        csv: None,
    })
}

fn run_deviation(
    beta: &str,
    eps: f64,
    n_list: &[usize],
    samples: usize,
    seed: u64,
    bits: Option<usize>,
) -> Result<Rendered, CoreError> {
    let b = parse_rational_arg("beta", beta)?;
    let max_n = *n_list
        .iter()
        .max()
        .ok_or_else(|| CoreError::Plan("deviation needs at least one depth in --n-list".into()))?;
    let plan = make_plan(b, seed, samples, bits, max_n)?;
    let series = deviation_measure(&plan, eps, n_list)?;

    let rows: Vec<(usize, f64, f64, f64, u64)> = series
        .entries
        .iter()
        .map(|e| (e.n, e.measure_estimate, e.ci_low, e.ci_high, e.discarded))
        .collect();
    let csv = csv_table(&rows);

    let json = json!({
        "plan": plan_json(&plan),
        "series": serde_json::to_value(&series).expect("series serializes"),
    });

    let mut text = format!(
        "beta = {:.6}  eps = {}  a = {:.6}  samples = {}\n",
        series.beta, series.epsilon, series.a, samples
    );
    for e in &series.entries {
        text.push_str(&format!(
            "n = {:>6}  measure = {:.6}  ci = [{:.6}, {:.6}]  used = {}  discarded = {}\n",
            e.n, e.measure_estimate, e.ci_low, e.ci_high, e.used, e.discarded
        ));
    }
    text.push_str(&format!("partial_sum = {:.6}\n", series.partial_sum));
    match &series.fit {
        Some(fit) => text.push_str(&format!(
            "log-measure fit: slope = {:.6} intercept = {:.4} over {} depths\n",
            fit.slope, fit.intercept, fit.used_points
        )),
        None => text.push_str("log-measure fit: unavailable (too few nonzero depths)\n"),
    }
    if let Some(bound) = series.theory_bound {
        text.push_str(&format!(
            "pressure-based exponent cap = {bound:.6} per digit\n"
        ));
    }
    Ok(Rendered {
        json,
        text,
        csv: Some(csv),
    })
}

fn run_approx(
    beta: &str,
    n_list: &[usize],
    samples: usize,
    seed: u64,
    bits: Option<usize>,
) -> Result<Rendered, CoreError> {
    let b = parse_rational_arg("beta", beta)?;
    let max_n = *n_list
        .iter()
        .max()
        .ok_or_else(|| CoreError::Plan("approx needs at least one depth in --n-list".into()))?;
    let plan = make_plan(b, seed, samples, bits, max_n)?;
    let entries = approx_compare(&plan, n_list)?;

    let rows: Vec<(usize, f64, f64, f64, u64)> = entries
        .iter()
        .map(|e| {
            let (lo, hi) = wilson_ci(e.cf_better, e.used, MEAN_Z);
            (e.n, e.fraction_cf_better, lo, hi, e.discarded)
        })
        .collect();
    let csv = csv_table(&rows);

    let json = json!({
        "plan": plan_json(&plan),
        "entries": serde_json::to_value(&entries).expect("entries serialize"),
    });

    let mut text = format!("samples = {samples}\n");
    for e in &entries {
        text.push_str(&format!(
            "n = {:>6}  cf_better = {:.6} ({})  beta_better = {:.6} ({})  ties = {:.6} ({})  \
             used = {}  discarded = {}\n",
            e.n,
            e.fraction_cf_better,
            e.cf_better,
            e.fraction_beta_better,
            e.beta_better,
            e.fraction_ties,
            e.ties,
            e.used,
            e.discarded
        ));
    }
    Ok(Rendered {
        json,
        text,
        csv: Some(csv),
    })
}

fn run_lochs_mean(
    beta: &str,
    n: usize,
    samples: usize,
    seed: u64,
    bits: Option<usize>,
) -> Result<Rendered, CoreError> {
    let b = parse_rational_arg("beta", beta)?;
    let plan = make_plan(b, seed, samples, bits, n)?;
    let report = lochs_mean(&plan, n)?;
    let sem = if report.used > 0 {
        report.std / (report.used as f64).sqrt()
    } else {
        f64::NAN
    };
    let ci_low = report.mean - MEAN_Z * sem;
    let ci_high = report.mean + MEAN_Z * sem;

    let csv = csv_table(&[(report.n, report.mean, ci_low, ci_high, report.discarded)]);
    let json = json!({
        "plan": plan_json(&plan),
        "report": serde_json::to_value(&report).expect("report serializes"),
        "ci_low": ci_low,
        "ci_high": ci_high,
    });
    let text = format!(
        "mean k_{}/{} = {:.6}  ci = [{:.6}, {:.6}]  std = {:.6}  used = {}  discarded = {}\n",
        report.n, report.n, report.mean, ci_low, ci_high, report.std, report.used, report.discarded
    );
    Ok(Rendered {
        json,
        text,
        csv: Some(csv),
    })
}

fn run_zero_runs(
    beta: &str,
    n: usize,
    i_max: usize,
    samples: usize,
    seed: u64,
    bits: Option<usize>,
) -> Result<Rendered, CoreError> {
    let b = parse_rational_arg("beta", beta)?;
    let i_list: Vec<usize> = (0..=i_max).collect();
    let plan = make_plan(b, seed, samples, bits, n + i_max + 1)?;
    let entries = zero_run_tail(&plan, n, &i_list)?;

    let rows: Vec<(usize, f64, f64, f64, u64)> = entries
        .iter()
        .map(|e| (e.i, e.measure_estimate, e.ci_low, e.ci_high, e.discarded))
        .collect();
    let csv = csv_table(&rows);

    let json = json!({
        "plan": plan_json(&plan),
        "n": n,
        "entries": serde_json::to_value(&entries).expect("entries serialize"),
    });

    let mut text = format!("digit position n = {n}  samples = {samples}\n");
    for e in &entries {
        text.push_str(&format!(
            "run ≥ {:>3}  measure = {:.6}  ci = [{:.6}, {:.6}]  bound = {:.6}  used = {}  \
             discarded = {}\n",
            e.i, e.measure_estimate, e.ci_low, e.ci_high, e.bound, e.used, e.discarded
        ));
    }
    Ok(Rendered {
        json,
        text,
        csv: Some(csv),
    })
}
