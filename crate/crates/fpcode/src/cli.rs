//! Command-line front end over the library: generate and trace codes, run
//! pirate strategies, and drive the experiment harnesses from config files.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags or parameters),
//! 2 on data errors (missing, malformed, or inconsistent files). Every
//! randomized command takes `--seed`; when absent one is generated and
//! printed so the run can be replayed.

use crate::codebook::{marked_columns, Coalition, Codebook, CombinedWord};
use crate::bitrow::BitRow;
use crate::compose::{run_composed_experiment, ComposedConfig};
use crate::pirates::{
    inject_errors, pirate_gaussian_average, pirate_interleave, pirate_majority,
    pirate_row_copy, run_averaging_attack_experiment, ErrorMode,
};
use crate::reconstruct::{
    avg_error, grid_fit_fraction, grid_reconstruct, l1_objective, l1_reconstruct,
    vc_reconstruct, GridParams, ReconInstance,
};
use crate::reid::{run_reid_experiment, CodeSecret, ReidConfig};
use crate::report::ExperimentReport;
use crate::rng::{seed_or_entropy, Stream};
use crate::robust::gen_robust;
use crate::tardos::{self, marked_count_bound, TardosParams};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

enum CliError {
    Usage(String),
    Data(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn data(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {err}", path.display()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| data(path, e))?;
    serde_json::from_str(&text).map_err(|e| data(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| data(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| data(path, e))
}

/// Combined-word file: the same hex row encoding as codebooks.
#[derive(Serialize, Deserialize)]
struct WordFile {
    version: u32,
    d: usize,
    bits: String,
}

impl WordFile {
    fn from_word(word: &CombinedWord) -> WordFile {
        WordFile {
            version: 1,
            d: word.len(),
            bits: word.to_hex(),
        }
    }

    fn into_word(self, path: &Path) -> Result<CombinedWord, CliError> {
        if self.version != 1 {
            return Err(data(path, format!("unsupported word file version {}", self.version)));
        }
        BitRow::from_hex(&self.bits, self.d).map_err(|e| data(path, e))
    }
}

/// Parse a 1-indexed coalition spec: "all", or comma-separated users and
/// inclusive ranges like "1-5,8".
fn parse_coalition(spec: &str, n_users: usize) -> Result<Coalition, CliError> {
    if spec.trim() == "all" {
        return Ok(Coalition::full(n_users));
    }
    let mut members = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let parse = |s: &str| -> Result<usize, CliError> {
            let u: usize = s
                .trim()
                .parse()
                .map_err(|_| usage(format!("bad coalition member {s:?} in {spec:?}")))?;
            if u == 0 {
                return Err(usage("coalition members are 1-indexed"));
            }
            // Range-check here so the error echoes the 1-indexed user the
            // caller typed; the library reports 0-based row indices.
            if u > n_users {
                return Err(CliError::Data(format!(
                    "coalition member {u} out of range for {n_users} users"
                )));
            }
            Ok(u)
        };
        if let Some((a, b)) = part.split_once('-') {
            let (lo, hi) = (parse(a)?, parse(b)?);
            if hi < lo {
                return Err(usage(format!("empty coalition range {part:?}")));
            }
            members.extend((lo..=hi).map(|u| u - 1));
        } else {
            members.push(parse(part)? - 1);
        }
    }
    if members.is_empty() {
        return Err(usage("coalition is empty"));
    }
    Coalition::new(members, n_users).map_err(|e| CliError::Data(e.to_string()))
}

#[derive(Parser)]
#[command(
    name = "fpcode",
    version,
    about = "Fingerprinting codes, pirate strategies, and privacy attacks"
)]
struct Cli {
    /// Worker threads for trial-parallel commands (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a fingerprinting code; writes codebook and secret files.
    Gen(GenArgs),
    /// Trace a combined word back to a user.
    Trace(TraceArgs),
    /// Combine coalition codewords with a pirate strategy.
    Pirate(PirateArgs),
    /// Run the re-identification experiment from a config file.
    Reid(RunArgs),
    /// Run a reconstruction attack on an instance file.
    Reconstruct(ReconstructArgs),
    /// Run the composed re-identification experiment from a config file.
    Compose(RunArgs),
    /// Measure feasibility of the Gaussian averaging strategy.
    GaussianAttack(GaussianAttackArgs),
    /// Compare marked-column counts against the lemma bound.
    MarkedStats(MarkedStatsArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of users.
    #[arg(short)]
    n: usize,
    /// Failure probability of the code.
    #[arg(long)]
    sec: f64,
    /// Generate the error-robust variant (fake columns + permutation).
    #[arg(long)]
    robust: bool,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Codebook output path.
    #[arg(long, default_value = "codebook.json")]
    codebook: PathBuf,
    /// Secret output path.
    #[arg(long, default_value = "secret.json")]
    secret: PathBuf,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    codebook: PathBuf,
    #[arg(long)]
    secret: PathBuf,
    /// Combined-word file to trace.
    #[arg(long)]
    word: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Strategy {
    Majority,
    RowCopy,
    Interleave,
    GaussianAverage,
}

#[derive(Args)]
struct PirateArgs {
    #[arg(long)]
    codebook: PathBuf,
    #[arg(long, value_enum)]
    strategy: Strategy,
    /// Coalition: "all" or 1-indexed members/ranges like "1-5,8".
    #[arg(long, default_value = "all")]
    coalition: String,
    /// Noise parameter for gaussian-average.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Flip this many positions after combining.
    #[arg(long, default_value_t = 0)]
    errors: usize,
    /// Where injected errors land: marked-first or uniform.
    #[arg(long, default_value = "marked-first")]
    error_mode: ErrorMode,
    #[arg(long)]
    seed: Option<u64>,
    /// Output word file.
    #[arg(long, default_value = "word.json")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Report output (JSON).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-trial CSV output (implies keeping per-trial records).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Attack {
    Vc,
    Grid,
    L1,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Instance file (JSON).
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    attack: Attack,
    /// Per-answer accuracy promise (vc and grid).
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Target average error (grid).
    #[arg(long, default_value_t = 0.5)]
    alpha_prime: f64,
    /// Grid resolution override; defaults to ceil(1/alpha).
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Result output (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GaussianAttackArgs {
    /// Code length.
    #[arg(short)]
    d: usize,
    /// Noise parameter; defaults to 1/(6 e n) at the fixed-point n.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 200)]
    trials: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Report output (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MarkedStatsArgs {
    /// Number of users.
    #[arg(short)]
    n: usize,
    /// Failure probability of the code.
    #[arg(long)]
    sec: f64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-trial CSV output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Parse and dispatch; returns the process exit code. Factored off `main`
/// so tests can drive the full command path in process.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Some(jobs) = cli.jobs {
        // Ignore failure: the global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen(args) => cmd_gen(args),
        Command::Trace(args) => cmd_trace(args),
        Command::Pirate(args) => cmd_pirate(args),
        Command::Reid(args) => cmd_reid(args),
        Command::Reconstruct(args) => cmd_reconstruct(args),
        Command::Compose(args) => cmd_compose(args),
        Command::GaussianAttack(args) => cmd_gaussian_attack(args),
        Command::MarkedStats(args) => cmd_marked_stats(args),
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    TardosParams::new(args.n, args.sec).map_err(|e| usage(e.to_string()))?;
    let seed = seed_or_entropy(args.seed);
    let mut stream = Stream::seeded(seed);
    println!("seed: {seed}");
    if args.robust {
        let (cb, secret) =
            gen_robust(args.n, args.sec, &mut stream).map_err(|e| usage(e.to_string()))?;
        write_json(&args.codebook, &cb)?;
        write_json(&args.secret, &CodeSecret::Robust(secret))?;
        println!(
            "robust codebook: {} ({} users, {} columns)",
            args.codebook.display(),
            cb.n_users(),
            cb.len()
        );
    } else {
        let (cb, secret) =
            tardos::gen(args.n, args.sec, &mut stream).map_err(|e| usage(e.to_string()))?;
        write_json(&args.codebook, &cb)?;
        write_json(&args.secret, &CodeSecret::Plain(secret))?;
        println!(
            "codebook: {} ({} users, {} columns)",
            args.codebook.display(),
            cb.n_users(),
            cb.len()
        );
    }
    println!("secret: {}", args.secret.display());
    Ok(())
}

fn cmd_trace(args: TraceArgs) -> Result<(), CliError> {
    let cb: Codebook = read_json(&args.codebook)?;
    let secret: CodeSecret = read_json(&args.secret)?;
    let word = read_json::<WordFile>(&args.word)?.into_word(&args.word)?;
    if secret.n_users() != cb.n_users() {
        return Err(data(
            &args.secret,
            format!("secret is for {} users, codebook has {}", secret.n_users(), cb.n_users()),
        ));
    }
    if secret.code_len() != cb.len() {
        return Err(data(
            &args.secret,
            format!("secret expects {} columns, codebook has {}", secret.code_len(), cb.len()),
        ));
    }
    if word.len() != cb.len() {
        return Err(data(
            &args.word,
            format!("word has {} bits, codebook has {} columns", word.len(), cb.len()),
        ));
    }
    match secret.trace(&cb, &word) {
        Some(user) => println!("accused user {}", user + 1),
        None => println!("no accusation"),
    }
    Ok(())
}

fn cmd_pirate(args: PirateArgs) -> Result<(), CliError> {
    let cb: Codebook = read_json(&args.codebook)?;
    let coalition = parse_coalition(&args.coalition, cb.n_users())?;
    let seed = seed_or_entropy(args.seed);
    let mut stream = Stream::seeded(seed);
    println!("seed: {seed}");
    let word = match args.strategy {
        Strategy::Majority => pirate_majority(&cb, &coalition),
        Strategy::RowCopy => pirate_row_copy(&cb, &coalition, &mut stream),
        Strategy::Interleave => pirate_interleave(&cb, &coalition, &mut stream),
        Strategy::GaussianAverage => {
            pirate_gaussian_average(&cb, &coalition, args.delta, &mut stream)
                .map_err(|e| usage(e.to_string()))?
        }
    };
    let word = if args.errors > 0 {
        inject_errors(&word, &cb, &coalition, args.errors, args.error_mode, &mut stream)
            .map_err(|e| CliError::Data(e.to_string()))?
    } else {
        word
    };
    write_json(&args.out, &WordFile::from_word(&word))?;
    println!(
        "word: {} ({} bits, {} ones, coalition of {})",
        args.out.display(),
        word.len(),
        word.count_ones(),
        coalition.len()
    );
    Ok(())
}

fn emit_report(report: &ExperimentReport, args: &RunArgs) -> Result<(), CliError> {
    println!("{}", report.summary());
    for note in &report.notes {
        println!("note: {note}");
    }
    if let Some(path) = &args.report {
        write_json(path, report)?;
        println!("report: {}", path.display());
    }
    if let Some(path) = &args.csv {
        write_text(path, &report.to_csv())?;
        println!("csv: {}", path.display());
    }
    Ok(())
}

fn cmd_reid(args: RunArgs) -> Result<(), CliError> {
    let mut config: ReidConfig = read_json(&args.config)?;
    config.keep_records |= args.csv.is_some();
    let report = run_reid_experiment(&config).map_err(|e| data(&args.config, e))?;
    emit_report(&report, &args)
}

fn cmd_compose(args: RunArgs) -> Result<(), CliError> {
    let mut config: ComposedConfig = read_json(&args.config)?;
    config.keep_records |= args.csv.is_some();
    let report = run_composed_experiment(&config).map_err(|e| data(&args.config, e))?;
    emit_report(&report, &args)
}

#[derive(Serialize)]
struct ReconResult {
    attack: String,
    seed: u64,
    t: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    avg_error: Option<f64>,
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<(), CliError> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(usage(format!("alpha must lie in (0, 1), got {}", args.alpha)));
    }
    let inst: ReconInstance = read_json(&args.instance)?;
    inst.validate().map_err(|e| data(&args.instance, e))?;
    let seed = seed_or_entropy(args.seed);
    println!("seed: {seed}");
    let mut result = match args.attack {
        Attack::Vc => {
            let t = vc_reconstruct(&inst.db, &inst.queries, &inst.answers, args.alpha)
                .map_err(|e| data(&args.instance, e))?;
            ReconResult {
                attack: "vc".into(),
                seed,
                t,
                objective: None,
                fit_fraction: None,
                avg_error: None,
            }
        }
        Attack::Grid => {
            let params = GridParams {
                alpha: args.alpha,
                alpha_prime: args.alpha_prime,
                m: args.resolution.unwrap_or((1.0 / args.alpha).ceil() as usize),
                n: inst.db.n_rows(),
                kappa: args.alpha_prime / 2.0,
                query_constant: 8.0,
            };
            let t = grid_reconstruct(&inst.db, &inst.queries, &inst.answers, &params, seed)
                .map_err(|e| data(&args.instance, e))?;
            let fit = grid_fit_fraction(&inst.db, &inst.queries, &inst.answers, &t, args.alpha)
                .map_err(|e| data(&args.instance, e))?;
            ReconResult {
                attack: "grid".into(),
                seed,
                t,
                objective: None,
                fit_fraction: Some(fit),
                avg_error: None,
            }
        }
        Attack::L1 => {
            let res = l1_reconstruct(&inst.db, &inst.queries, &inst.answers)
                .map_err(|e| data(&args.instance, e))?;
            let direct = l1_objective(&inst.db, &inst.queries, &inst.answers, &res.t)
                .map_err(|e| data(&args.instance, e))?;
            println!("objective: {:.6} (direct {:.6})", res.objective, direct);
            ReconResult {
                attack: "l1".into(),
                seed,
                t: res.t,
                objective: Some(res.objective),
                fit_fraction: None,
                avg_error: None,
            }
        }
    };
    if let Some(truth) = &inst.truth {
        let err = avg_error(&result.t, truth);
        result.avg_error = Some(err);
        println!("avg error vs truth: {err:.6}");
    }
    println!("recovered {} coordinates", result.t.len());
    if let Some(path) = &args.out {
        write_json(path, &result)?;
        println!("result: {}", path.display());
    }
    Ok(())
}

fn cmd_gaussian_attack(args: GaussianAttackArgs) -> Result<(), CliError> {
    if args.d == 0 {
        return Err(usage("code length must be positive"));
    }
    if args.trials == 0 {
        return Err(usage("need at least one trial"));
    }
    let seed = seed_or_entropy(args.seed);
    println!("seed: {seed}");
    let report = run_averaging_attack_experiment(args.d, args.delta, args.trials, seed)
        .map_err(|e| usage(e.to_string()))?;
    println!(
        "d={} n={} delta={:.6} sigma={:.6}",
        report.d, report.n, report.delta, report.sigma
    );
    println!(
        "feasible: drop-one {:.4} [{:.4},{:.4}], full {:.4}",
        report.feasible_drop_one.rate,
        report.feasible_drop_one.wilson_low,
        report.feasible_drop_one.wilson_high,
        report.feasible_full.rate
    );
    if let Some(path) = &args.out {
        write_json(path, &report)?;
        println!("report: {}", path.display());
    }
    Ok(())
}

fn cmd_marked_stats(args: MarkedStatsArgs) -> Result<(), CliError> {
    TardosParams::new(args.n, args.sec).map_err(|e| usage(e.to_string()))?;
    if args.trials == 0 {
        return Err(usage("need at least one trial"));
    }
    let seed = seed_or_entropy(args.seed);
    println!("seed: {seed}");
    let bound = marked_count_bound(args.n, args.sec);
    let full = Coalition::full(args.n);
    let mut csv = String::from("trial,seed,zero_marked,one_marked,pass\n");
    let mut passes = 0u64;
    for trial in 0..args.trials {
        let mut stream = Stream::for_trial(seed, trial);
        let (cb, _) = tardos::gen(args.n, args.sec, &mut stream).expect("validated");
        let marked = marked_columns(&cb, &full);
        let pass = marked.zero.len() as f64 >= bound && marked.one.len() as f64 >= bound;
        passes += pass as u64;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            trial,
            seed ^ trial,
            marked.zero.len(),
            marked.one.len(),
            pass
        ));
    }
    println!(
        "bound m = {bound:.2}; both marked counts >= m in {passes}/{} trials",
        args.trials
    );
    if let Some(path) = &args.csv {
        write_text(path, &csv)?;
        println!("csv: {}", path.display());
    }
    Ok(())
}
