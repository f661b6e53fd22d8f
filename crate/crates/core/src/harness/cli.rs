//! Command-line front end.
//!
//! Every command emits an [`ExperimentReport`] as JSON, or a command-specific
//! CSV with `--format csv`. Exit codes: 0 success, 1 verdict failure, 2 usage
//! or infeasibility.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde_json::json;

use super::experiments::{experiment_beyond_johnson, experiment_corollary, profile_csv, CorollaryOptions};
use super::report::ExperimentReport;
use super::suite::invariant_suite;
use crate::bounds::{
    capacity_rate, corollary_blocklength, johnson_radius_gs, johnson_radius_ms, q_ary_entropy, rate_formulas,
    regime_row, BoundReport, Variant, REGIME_CSV_HEADER,
};
use crate::chaining::{build_nets, symmetrization_check, supremum_experiment, ChainParams};
use crate::config::Config;
use crate::error::{invalid, Error, Result};
use crate::galois::{Field, Symbol};
use crate::linear_code::{CodeFamily, EvaluationSet, LinearCode};
use crate::oracle::{self, decoding_radius_profile, verify_certificate, ListDecQuery, Mode};
use crate::plurality::{candidate_sets, max_agreement_sum, plurality_profile, quantity_q, MessageSet, QMode};
use crate::rng;

#[derive(Parser, Debug)]
#[command(name = "listdec", version, about = "List-decoding experiments for small linear codes")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON file with constants, budgets and defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Record wall-clock time in the JSON report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Describe GF(q) and its operation tables.
    Field {
        #[arg(long)]
        q: u32,
    },
    #[command(subcommand)]
    Code(CodeCmd),
    #[command(subcommand)]
    Oracle(OracleCmd),
    #[command(subcommand)]
    Bounds(BoundsCmd),
    #[command(subcommand)]
    Plurality(PluralityCmd),
    #[command(subcommand)]
    Chain(ChainCmd),
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Run the invariant checks.
    Suite {
        #[arg(long, default_value = "all")]
        scope: String,
        /// Standard errors allowed in statistical checks.
        #[arg(long, default_value_t = 3.0)]
        tolerance: f64,
    },
}

/// Selects a code: a JSON file written by `code serialize`, or a spec such as
/// `rs:q=7,k=2,n=5`, `hadamard:q=3,k=2` or `random:q=3,k=2,n=4`, optionally
/// shortened by `--sample` or `--puncture`.
#[derive(Args, Debug, Clone)]
struct CodeArgs {
    #[arg(long)]
    code: String,
    /// Sample this many generator columns with replacement.
    #[arg(long, conflicts_with = "puncture")]
    sample: Option<usize>,
    /// Keep this many distinct generator columns.
    #[arg(long)]
    puncture: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum CodeCmd {
    Make(CodeArgs),
    /// Parameters and exact minimum distance.
    Info(CodeArgs),
    /// Print the code as a JSON document readable by `--code`.
    Serialize(CodeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Standard,
    Average,
}

#[derive(Subcommand, Debug)]
enum OracleCmd {
    /// Decide `(rho, L)` list decodability; exits 1 on a violation.
    Check {
        #[command(flatten)]
        code: CodeArgs,
        /// A fraction `a/b` or a decimal.
        #[arg(long)]
        radius: String,
        #[arg(long)]
        list: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Standard)]
        mode: ModeArg,
        /// Check only this many random received words (standard mode).
        #[arg(long)]
        sampled: Option<usize>,
    },
    /// Largest decodable radius for each list size.
    Profile {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        max_list: usize,
    },
}

#[derive(Subcommand, Debug)]
enum BoundsCmd {
    /// Regime comparison over a grid of alphabet sizes and epsilons.
    Table {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u32, 4, 16, 256, 65536])]
        q: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.01f64, 0.05, 0.1, 0.2])]
        eps: Vec<f64>,
    },
    /// Evaluate the bounds at one point.
    Eval {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        eps: f64,
        /// Block length for the Johnson radii.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        list: Option<usize>,
        /// Relative distance for the Johnson radii.
        #[arg(long)]
        delta: Option<f64>,
        /// Message length for the corollary block length.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        variant: Option<String>,
    },
}

/// A message set: explicit message indices or a random set of a given size.
#[derive(Args, Debug, Clone)]
struct SetArgs {
    #[arg(long, value_delimiter = ',', conflicts_with = "random")]
    set: Vec<u64>,
    #[arg(long)]
    random: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum QModeArg {
    Exact,
    Greedy,
    Sampled,
}

#[derive(Subcommand, Debug)]
enum PluralityCmd {
    Profile {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        set: SetArgs,
    },
    Maxagr {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        set: SetArgs,
    },
    #[command(name = "Q", alias = "q")]
    Q {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        list: usize,
        #[arg(long, value_enum, default_value_t = QModeArg::Exact)]
        mode: QModeArg,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ChainCmd {
    /// Build the net hierarchy from a random set of size `--list`.
    Build {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        list: usize,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        t_max: Option<usize>,
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long)]
        retry_limit: Option<usize>,
    },
    /// Empirical supremum of the Gaussian process over candidate sets.
    Mc {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        list: usize,
        #[arg(long, default_value_t = 8)]
        candidates: usize,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
    },
    /// Symmetrization and Gaussian comparison over sampled codes.
    Symmetrize {
        #[command(flatten)]
        code: CodeArgs,
        /// Block length of the sampled codes.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        list: usize,
        #[arg(long, default_value_t = 6)]
        candidates: usize,
        #[arg(long, default_value_t = 400)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ExperimentCmd {
    Corollary {
        #[arg(long)]
        variant: String,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        draws: usize,
        #[arg(long)]
        blocklength: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
        /// Accept the sampled standard oracle when the exhaustive one is over budget.
        #[arg(long)]
        sampled_fallback: Option<usize>,
        #[arg(long)]
        require_success_rate: Option<f64>,
        #[arg(long)]
        no_profile: bool,
    },
    BeyondJohnson {
        #[arg(long, default_value_t = 7)]
        q: u32,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.2f64, 0.4, 0.6, 0.8])]
        rho_grid: Vec<f64>,
        #[arg(long, default_value_t = 4)]
        max_list: usize,
        /// Number of seeds, starting at `--seed`.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
    },
}

/// Output of one command.
struct Outcome {
    report: ExperimentReport,
    csv: Option<String>,
    /// Verdict failure: exit code 1.
    failed: bool,
}

impl Outcome {
    fn new(report: ExperimentReport) -> Self {
        Outcome {
            failed: !report.passed(),
            report,
            csv: None,
        }
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

fn kv(spec: &str) -> Result<Vec<(String, String)>> {
    spec.split(',')
        .filter(|s| !s.is_empty())
        .map(|p| {
            p.split_once('=')
                .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                .ok_or_else(|| invalid(format!("expected key=value in code spec, got {p:?}")))
        })
        .collect()
}

fn get<T: std::str::FromStr>(pairs: &[(String, String)], key: &str) -> Result<Option<T>> {
    match pairs.iter().find(|(k, _)| k == key) {
        None => Ok(None),
        Some((_, v)) => v
            .parse()
            .map(Some)
            .map_err(|_| invalid(format!("bad value {v:?} for {key}"))),
    }
}

fn need<T: std::str::FromStr>(pairs: &[(String, String)], key: &str) -> Result<T> {
    get(pairs, key)?.ok_or_else(|| invalid(format!("code spec needs {key}=")))
}

fn parse_code(spec: &str, seed: u64, cfg: &Config) -> Result<LinearCode> {
    let Some((kind, rest)) = spec.split_once(':') else {
        let text = std::fs::read_to_string(spec)?;
        return Ok(serde_json::from_str(&text)?);
    };
    let pairs = kv(rest)?;
    let field = Field::from_order(need(&pairs, "q")?)?;
    let k: usize = need(&pairs, "k")?;
    let code_seed = get(&pairs, "seed")?.unwrap_or(seed);
    match kind {
        "rs" => {
            let evals = match get::<usize>(&pairs, "n")? {
                None => EvaluationSet::full(&field),
                Some(n) if n == field.order() as usize => EvaluationSet::full(&field),
                Some(n) => EvaluationSet::random_distinct(&field, n, code_seed)?,
            };
            LinearCode::reed_solomon(&field, k, &evals)
        }
        "hadamard" => LinearCode::hadamard(&field, k, &cfg.budgets),
        "random" => {
            use rand::Rng;
            let n: usize = need(&pairs, "n")?;
            let q = field.order();
            let mut r = rng::stream_rng(code_seed, rng::streams::INSTANCE, 0);
            let rows: Vec<Vec<Symbol>> = (0..k)
                .map(|_| (0..n).map(|_| r.random_range(0..q) as Symbol).collect())
                .collect();
            LinearCode::from_rows(field, &rows)
        }
        other => Err(invalid(format!("unknown code kind {other:?}; expected rs, hadamard or random"))),
    }
}

fn load_code(args: &CodeArgs, seed: u64, cfg: &Config) -> Result<LinearCode> {
    let base = parse_code(&args.code, seed, cfg)?;
    let draw_seed = rng::derive_seed(seed, rng::streams::CODE_DRAW, 0);
    match (args.sample, args.puncture) {
        (Some(n), _) => base.sample(n, draw_seed),
        (None, Some(n)) => base.puncture(n, draw_seed),
        (None, None) => Ok(base),
    }
}

fn load_set(code: &LinearCode, args: &SetArgs, seed: u64) -> Result<MessageSet> {
    match args.random {
        Some(size) => MessageSet::random(code, size, rng::derive_seed(seed, rng::streams::INSTANCE, 1)),
        None if !args.set.is_empty() => MessageSet::from_indices(code, &args.set),
        None => Err(invalid("give --set i,j,... or --random SIZE")),
    }
}

fn parse_radius(text: &str, n: usize, list: usize) -> Result<Ratio<u64>> {
    if let Some((a, b)) = text.split_once('/') {
        let a: u64 = a.trim().parse().map_err(|_| invalid(format!("bad radius {text:?}")))?;
        let b: u64 = b.trim().parse().map_err(|_| invalid(format!("bad radius {text:?}")))?;
        if b == 0 {
            return Err(invalid("radius denominator is zero"));
        }
        return Ok(Ratio::new(a, b));
    }
    let rho: f64 = text.parse().map_err(|_| invalid(format!("bad radius {text:?}")))?;
    oracle::rational_radius(rho, n, list).ok_or_else(|| invalid(format!("radius {rho} is negative")))
}

fn csv_of_measured(report: &ExperimentReport) -> String {
    let mut out = String::from("name,value,std_error\n");
    for (name, m) in &report.measured {
        out.push_str(&format!(
            "{name},{},{}\n",
            m.value,
            m.std_error.map(|s| s.to_string()).unwrap_or_default()
        ));
    }
    out
}

fn cmd_field(q: u32, cli: &Cli, cfg: &Config) -> Result<Outcome> {
    let f = Field::from_order(q)?;
    let mut r = ExperimentReport::new("field", cli.seed, json!({ "q": q }), &cfg.constants);
    r.measure("order", q as f64, None);
    let d = f.descriptor();
    r.table("descriptor", &d)?;
    let els: Vec<Symbol> = f.elements().collect();
    let inverses: Vec<Option<Symbol>> = els.iter().map(|&a| f.inv(a).ok()).collect();
    r.table("inverses", &inverses)?;
    let mut csv = String::from("a,b,sum,product\n");
    if q <= 64 {
        let add: Vec<Vec<Symbol>> = els.iter().map(|&a| els.iter().map(|&b| f.add(a, b)).collect()).collect();
        let mul: Vec<Vec<Symbol>> = els.iter().map(|&a| els.iter().map(|&b| f.mul(a, b)).collect()).collect();
        r.table("add", &add)?;
        r.table("mul", &mul)?;
        for &a in &els {
            for &b in &els {
                csv.push_str(&format!("{a},{b},{},{}\n", f.add(a, b), f.mul(a, b)));
            }
        }
    } else {
        r.note("operation tables omitted for q > 64");
    }
    Ok(Outcome::new(r).with_csv(csv))
}

fn code_params(args: &CodeArgs) -> serde_json::Value {
    json!({ "code": args.code, "sample": args.sample, "puncture": args.puncture })
}

fn cmd_code(cmd: &CodeCmd, cli: &Cli, cfg: &Config) -> Result<Outcome> {
    match cmd {
        CodeCmd::Make(a) | CodeCmd::Serialize(a) => {
            let code = load_code(a, cli.seed, cfg)?;
            let mut r = ExperimentReport::new("code make", cli.seed, code_params(a), &cfg.constants);
            r.table("code", &code)?;
            r.measure("k", code.k() as f64, None);
            r.measure("n", code.n() as f64, None);
            let mut o = Outcome::new(r);
            if matches!(cmd, CodeCmd::Serialize(_)) {
                o.report.experiment = "code serialize".to_string();
                // the bare document, so that it can be passed back through --code
                o.csv = Some(serde_json::to_string_pretty(&code)? + "\n");
            }
            Ok(o)
        }
        CodeCmd::Info(a) => {
            let code = load_code(a, cli.seed, cfg)?;
            let mut r = ExperimentReport::new("code info", cli.seed, code_params(a), &cfg.constants);
            r.measure("k", code.k() as f64, None);
            r.measure("n", code.n() as f64, None);
            r.measure("rank", code.rank() as f64, None);
            let rate = code.rate();
            r.measure("rate", *rate.numer() as f64 / *rate.denom() as f64, None);
            r.measure("size", code.size() as f64, None);
            match code.min_distance_exact(&cfg.budgets) {
                Ok(d) => {
                    r.measure("min_distance", *d.numer() as f64 / *d.denom() as f64, None);
                    r.table("min_distance_fraction", &(*d.numer(), *d.denom()))?;
                }
                Err(Error::Infeasible { .. }) => r.note("minimum distance over budget"),
                Err(Error::DegenerateCode) => r.note("code has a single codeword; distance undefined"),
                Err(e) => return Err(e),
            }
            r.table("description", &code.describe())?;
            let csv = csv_of_measured(&r);
            Ok(Outcome::new(r).with_csv(csv))
        }
    }
}

fn cmd_oracle(cmd: &OracleCmd, cli: &Cli, cfg: &Config) -> Result<Outcome> {
    match cmd {
        OracleCmd::Check {
            code: a,
            radius,
            list,
            mode,
            sampled,
        } => {
            let code = load_code(a, cli.seed, cfg)?;
            let radius = parse_radius(radius, code.n(), *list)?;
            let mode = match mode {
                ModeArg::Standard => Mode::Standard,
                ModeArg::Average => Mode::AverageRadius,
            };
            let query = ListDecQuery::new(radius, *list, mode)?;
            let cert = match sampled {
                Some(s) if mode == Mode::Standard => oracle::is_list_decodable_sampled(
                    &code,
                    &query,
                    *s,
                    rng::derive_seed(cli.seed, rng::streams::RECEIVED, 0),
                    &cfg.budgets,
                )?,
                Some(_) => return Err(invalid("--sampled applies to the standard mode only")),
                None => oracle::check(&code, &query, &cfg.budgets)?,
            };
            let mut params = code_params(a);
            params["radius"] = json!([*radius.numer(), *radius.denom()]);
            params["list"] = json!(list);
            params["mode"] = json!(mode);
            let mut r = ExperimentReport::new("oracle check", cli.seed, params, &cfg.constants);
            let reverified = verify_certificate(&code, &cert, &cfg.budgets)?;
            r.verdict("certificate_verifies", reverified);
            r.verdict("decodable", cert.is_decodable());
            r.table("certificate", &cert)?;
            let csv = format!(
                "decodable,radius,list,mode\n{},{},{},{:?}\n",
                cert.is_decodable(),
                radius,
                list,
                mode
            );
            Ok(Outcome::new(r).with_csv(csv))
        }
        OracleCmd::Profile { code: a, max_list } => {
            let code = load_code(a, cli.seed, cfg)?;
            let rows = decoding_radius_profile(&code, *max_list, &cfg.budgets)?;
            let mut params = code_params(a);
            params["max_list"] = json!(max_list);
            let mut r = ExperimentReport::new("oracle profile", cli.seed, params, &cfg.constants);
            let mut csv = String::from("list_size,standard_errors,standard,average_errors,average\n");
            for row in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row.list_size, row.standard_errors, row.standard, row.average_errors, row.average
                ));
            }
            r.table("profile", &rows)?;
            Ok(Outcome::new(r).with_csv(csv))
        }
    }
}

fn cmd_bounds(cmd: &BoundsCmd, cli: &Cli, cfg: &Config) -> Result<Outcome> {
    match cmd {
        BoundsCmd::Table { q, eps } => {
            let mut r = ExperimentReport::new("bounds table", cli.seed, json!({ "q": q, "eps": eps }), &cfg.constants);
            let mut rows = Vec::new();
            let mut csv = format!("{REGIME_CSV_HEADER}\n");
            for &qq in q {
                for &e in eps {
                    let row = regime_row(qq, e)?;
                    csv.push_str(&row.csv());
                    csv.push('\n');
                    rows.push(row);
                }
            }
            r.table("regimes", &rows)?;
            Ok(Outcome::new(r).with_csv(csv))
        }
        BoundsCmd::Eval {
            q,
            eps,
            n,
            list,
            delta,
            k,
            variant,
        } => {
            let params = json!({ "q": q, "eps": eps, "n": n, "list": list, "delta": delta, "k": k, "variant": variant });
            let mut r = ExperimentReport::new("bounds eval", cli.seed, params, &cfg.constants);
            let top = 1.0 - 1.0 / *q as f64;
            if *eps > 0.0 && *eps <= top {
                r.bounds.push(BoundReport::new("capacity_rate", &[("q", *q as f64), ("epsilon", *eps)], capacity_rate(*q, *eps)?));
                r.bounds.push(BoundReport::new(
                    "entropy",
                    &[("q", *q as f64), ("x", top - eps)],
                    q_ary_entropy(*q, top - eps)?,
                ));
            }
            if *eps > 0.0 && *eps < 0.5 {
                let f = rate_formulas(*q, *eps, &cfg.constants)?;
                let inputs = [("q", *q as f64), ("epsilon", *eps)];
                r.bounds.push(BoundReport::new("rs_rate", &inputs, f.rs_rate));
                r.bounds.push(BoundReport::new("rlc_rate", &inputs, f.rlc_rate));
                r.bounds.push(BoundReport::new("johnson_rate", &inputs, f.johnson_rate));
            }
            if let (Some(n), Some(l), Some(d)) = (n, list, delta) {
                let inputs = [("n", *n as f64), ("list_size", *l as f64), ("delta", *d)];
                r.bounds.push(BoundReport::new("johnson_radius_gs", &inputs, johnson_radius_gs(*n, *q, *l, *d)?));
                r.bounds.push(BoundReport::new("johnson_radius_ms", &inputs, johnson_radius_ms(*n, *l, *d)?));
            }
            if let (Some(k), Some(v)) = (k, variant) {
                let v: Variant = v.parse()?;
                let p = corollary_blocklength(*q, *eps, v, *k, &cfg.constants)?;
                let inputs = [("q", *q as f64), ("epsilon", *eps), ("k", *k as f64)];
                r.bounds.push(BoundReport::new("corollary_blocklength", &inputs, p.blocklength as f64));
                r.bounds.push(BoundReport::new("corollary_list_size", &inputs, p.list_size as f64));
                r.bounds.push(BoundReport::new("corollary_radius", &inputs, p.radius));
            }
            let mut csv = String::from("name,value\n");
            for b in &r.bounds {
                csv.push_str(&format!("{},{}\n", b.name, b.value));
            }
            Ok(Outcome::new(r).with_csv(csv))
        }
    }
}

fn set_params(code: &CodeArgs, set: &SetArgs) -> serde_json::Value {
    let mut p = code_params(code);
    p["set"] = json!(set.set);
    p["random"] = json!(set.random);
    p
}

fn cmd_plurality(cmd: &PluralityCmd, cli: &Cli, cfg: &Config) -> Result<Outcome> {
    match cmd {
        PluralityCmd::Profile { code: a, set } => {
            let code = load_code(a, cli.seed, cfg)?;
            let s = load_set(&code, set, cli.seed)?;
            let p = plurality_profile(&code, &s)?;
            let mut r = ExperimentReport::new("plurality profile", cli.seed, set_params(a, set), &cfg.constants);
            let sum = p.sum_pl();
            r.measure("sum_pl", *sum.numer() as f64 / *sum.denom() as f64, None);
            r.measure("total_count", p.total_count() as f64, None);
            r.table("counts", &p.counts())?;
            r.table("witness", &p.witness())?;
            r.table("messages", &s.messages())?;
            let mut csv = String::from("coordinate,count,pl,symbol\n");
            for j in 0..p.n() {
                csv.push_str(&format!("{j},{},{},{}\n", p.count(j), p.pl(j), p.symbol(j)));
            }
            Ok(Outcome::new(r).with_csv(csv))
        }
        PluralityCmd::Maxagr { code: a, set } => {
            let code = load_code(a, cli.seed, cfg)?;
            let s = load_set(&code, set, cli.seed)?;
            let m = max_agreement_sum(&code, &s)?;
            let mut r = ExperimentReport::new("plurality maxagr", cli.seed, set_params(a, set), &cfg.constants);
            r.measure("max_agreement", m.value as f64, None);
            r.table("witness", &m.witness)?;
            let csv = csv_of_measured(&r);
            Ok(Outcome::new(r).with_csv(csv))
        }
        PluralityCmd::Q {
            code: a,
            list,
            mode,
            trials,
        } => {
            let code = load_code(a, cli.seed, cfg)?;
            let qmode = match mode {
                QModeArg::Exact => QMode::Exact,
                QModeArg::Greedy => QMode::Greedy,
                QModeArg::Sampled => QMode::Sampled {
                    trials: *trials,
                    seed: cli.seed,
                },
            };
            let q = quantity_q(&code, *list, qmode, &cfg.budgets)?;
            let mut params = code_params(a);
            params["list"] = json!(list);
            params["mode"] = json!(qmode);
            let mut r = ExperimentReport::new("plurality Q", cli.seed, params, &cfg.constants);
            r.measure("Q", q.value_f64(), None);
            r.measure("count_sum", q.count_sum as f64, None);
            if q.lower_bound {
                r.note("Q is a lower bound: the search was not exhaustive");
            }
            r.table("q", &q)?;
            let csv = csv_of_measured(&r);
            Ok(Outcome::new(r).with_csv(csv))
        }
    }
}

fn cmd_chain(cmd: &ChainCmd, cli: &Cli, cfg: &Config) -> Result<Outcome> {
    match cmd {
        ChainCmd::Build {
            code: a,
            list,
            eta,
            t_max,
            c1,
            retry_limit,
        } => {
            let code = load_code(a, cli.seed, cfg)?;
            let mut params = ChainParams::new(*list, cfg)?;
            if let Some(e) = eta {
                params = params.with_eta(*e)?;
            }
            if let Some(c) = c1 {
                params = params.with_heavy_threshold(*c)?;
            }
            if let Some(t) = t_max {
                params = params.with_t_max(*t);
            }
            if let Some(l) = retry_limit {
                params = params.with_retry_limit(*l)?;
            }
            let set = MessageSet::random(&code, *list, rng::derive_seed(cli.seed, rng::streams::INSTANCE, 1))?;
            let build = build_nets(&code, &set, &params, cli.seed)?;
            let mut p = code_params(a);
            p["list"] = json!(list);
            p["chain"] = serde_json::to_value(&params)?;
            let mut r = ExperimentReport::new("chain build", cli.seed, p, &cfg.constants);
            r.verdict("success", build.success);
            if build.success {
                r.verdict("postconditions", build.postconditions_hold());
            }
            if build.degenerate {
                r.note("t_max is zero at this list size: the chain is level 0 only");
            }
            r.measure("levels", build.levels.len() as f64, None);
            r.measure("c4_min", build.c4_min(), None);
            let csv = build.trace_csv();
            r.table("build", &build)?;
            Ok(Outcome::new(r).with_csv(csv))
        }
        ChainCmd::Mc {
            code: a,
            list,
            candidates,
            trials,
        } => {
            let code = load_code(a, cli.seed, cfg)?;
            let qv = match quantity_q(&code, *list, QMode::Exact, &cfg.budgets) {
                Err(Error::Infeasible { .. }) => quantity_q(&code, *list, QMode::Greedy, &cfg.budgets)?,
                other => other?,
            };
            let sets: Vec<MessageSet> = candidate_sets(&code, *list, *candidates, cli.seed)?
                .into_iter()
                .map(|(_, s)| s)
                .collect();
            let rep = supremum_experiment(&code, &sets, &qv, *trials, cli.seed, &cfg.constants)?;
            let mut p = code_params(a);
            p["list"] = json!(list);
            p["candidates"] = json!(candidates);
            p["trials"] = json!(trials);
            let mut r = ExperimentReport::new("chain mc", cli.seed, p, &cfg.constants);
            r.measure("empirical_max", rep.empirical.mean, Some(rep.empirical.std_error));
            r.measure("c3_min", rep.c3_min, None);
            r.measure("Q", rep.q_hat, None);
            r.bounds.push(BoundReport::new(
                "supremum_bound",
                &[("Q", rep.q_hat), ("code_size", rep.code_size), ("list_size", *list as f64)],
                rep.bound,
            ));
            if let Some(b) = rep.max_of_gaussians_bound {
                r.bounds.push(BoundReport::new("max_of_gaussians", &[("sigma", rep.sigma_max), ("m", *candidates as f64)], b));
            }
            r.table("report", &rep)?;
            let csv = csv_of_measured(&r);
            Ok(Outcome::new(r).with_csv(csv))
        }
        ChainCmd::Symmetrize {
            code: a,
            n,
            list,
            candidates,
            trials,
        } => {
            let parent = load_code(a, cli.seed, cfg)?;
            let family = CodeFamily::Sampled { parent, n: *n };
            let rep = symmetrization_check(&family, *list, *candidates, *trials, cli.seed)?;
            let mut p = code_params(a);
            p["n"] = json!(n);
            p["list"] = json!(list);
            p["candidates"] = json!(candidates);
            p["trials"] = json!(trials);
            let mut r = ExperimentReport::new("chain symmetrize", cli.seed, p, &cfg.constants);
            r.measure("D", rep.d.mean, Some(rep.d.std_error));
            r.measure("R", rep.r.mean, Some(rep.r.std_error));
            r.measure("G", rep.g.mean, Some(rep.g.std_error));
            r.verdict("d_le_2r", rep.d_vs_r.holds);
            r.verdict("r_le_sqrt_pi_over_2_g", rep.r_vs_g.holds);
            r.note("maxima run over a sampled family of candidate sets");
            r.table("report", &rep)?;
            let csv = csv_of_measured(&r);
            Ok(Outcome::new(r).with_csv(csv))
        }
    }
}

fn cmd_experiment(cmd: &ExperimentCmd, cli: &Cli, cfg: &Config) -> Result<Outcome> {
    match cmd {
        ExperimentCmd::Corollary {
            variant,
            q,
            eps,
            k,
            draws,
            blocklength,
            radius,
            sampled_fallback,
            require_success_rate,
            no_profile,
        } => {
            let opts = CorollaryOptions {
                draws: *draws,
                blocklength: *blocklength,
                radius: *radius,
                sampled_fallback: *sampled_fallback,
                require_success_rate: *require_success_rate,
                profile: !no_profile,
            };
            let r = experiment_corollary(variant.parse()?, *q, *eps, *k, &opts, cfg, cli.seed)?;
            let csv = csv_of_measured(&r);
            Ok(Outcome::new(r).with_csv(csv))
        }
        ExperimentCmd::BeyondJohnson {
            q,
            k,
            n,
            rho_grid,
            max_list,
            seeds,
        } => {
            let seeds: Vec<u64> = (0..*seeds).map(|i| cli.seed.wrapping_add(i)).collect();
            let r = experiment_beyond_johnson(*q, *k, *n, rho_grid, *max_list, &seeds, cfg)?;
            let csv = profile_csv(&r)?;
            Ok(Outcome::new(r).with_csv(csv))
        }
    }
}

fn cmd_suite(scope: &str, tolerance: f64, cli: &Cli, cfg: &Config) -> Result<Outcome> {
    let s = invariant_suite(scope, cli.seed, tolerance, cfg)?;
    let mut r = ExperimentReport::new(
        "suite",
        cli.seed,
        json!({ "scope": scope, "tolerance_se": tolerance }),
        &cfg.constants,
    );
    for c in &s.checks {
        r.verdict(&format!("{}::{}", c.module, c.name), c.passed);
    }
    let csv = s.csv();
    r.table("checks", &s.checks)?;
    Ok(Outcome::new(r).with_csv(csv))
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match &cli.command {
        Command::Field { q } => cmd_field(*q, cli, &cfg),
        Command::Code(c) => cmd_code(c, cli, &cfg),
        Command::Oracle(c) => cmd_oracle(c, cli, &cfg),
        Command::Bounds(c) => cmd_bounds(c, cli, &cfg),
        Command::Plurality(c) => cmd_plurality(c, cli, &cfg),
        Command::Chain(c) => cmd_chain(c, cli, &cfg),
        Command::Experiment(c) => cmd_experiment(c, cli, &cfg),
        Command::Suite { scope, tolerance } => cmd_suite(scope, *tolerance, cli, &cfg),
    }
}

fn emit(cli: &Cli, outcome: &Outcome, elapsed_ms: u64, out: &mut dyn Write) -> Result<()> {
    let serialize = matches!(&cli.command, Command::Code(CodeCmd::Serialize(_)));
    let text = if cli.format == Format::Csv || serialize {
        outcome.csv.clone().unwrap_or_else(|| csv_of_measured(&outcome.report))
    } else if cli.timing {
        let mut r = outcome.report.clone();
        r.wall_clock_ms = Some(elapsed_ms);
        serde_json::to_string_pretty(&r)? + "\n"
    } else {
        outcome.report.canonical_json()? + "\n"
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code. Output goes to `out` unless `--out` is given; diagnostics go
/// to stderr.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    eprint!("{}", e.render());
                    2
                }
            };
        }
    };
    let start = Instant::now();
    match execute(&cli) {
        Ok(outcome) => {
            if let Err(e) = emit(&cli, &outcome, start.elapsed().as_millis() as u64, out) {
                eprintln!("error: {e}");
                return 2;
            }
            if outcome.failed {
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let code = run(std::iter::once("listdec").chain(args.iter().copied()), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_str(&["frobnicate"]).0, 2);
        assert_eq!(run_str(&["field"]).0, 2);
        assert_eq!(run_str(&["field", "--q", "6"]).0, 2);
        assert_eq!(run_str(&["--help"]).0, 0);
    }

    #[test]
    fn code_specs() {
        let cfg = Config::default();
        assert_eq!(parse_code("rs:q=7,k=2,n=5", 1, &cfg).unwrap().n(), 5);
        assert_eq!(parse_code("rs:q=7,k=2", 1, &cfg).unwrap().n(), 7);
        assert_eq!(parse_code("hadamard:q=3,k=2", 1, &cfg).unwrap().n(), 9);
        assert_eq!(parse_code("random:q=3,k=2,n=4", 1, &cfg).unwrap().k(), 2);
        assert!(parse_code("rs:q=7", 1, &cfg).is_err());
        assert!(parse_code("weird:q=7,k=1", 1, &cfg).is_err());
    }

    #[test]
    fn violated_check_exits_one() {
        // every word is within radius 1 of all 7 codewords
        let (code, text) = run_str(&["oracle", "check", "--code", "rs:q=7,k=1", "--radius", "1/1", "--list", "2"]);
        assert_eq!(code, 1);
        assert!(text.contains("\"violated\""));
        let (code, _) = run_str(&["oracle", "check", "--code", "rs:q=7,k=1", "--radius", "0", "--list", "2"]);
        assert_eq!(code, 0);
    }
}
