//! Re-identification adversary and its Monte-Carlo harness.
//!
//! The adversary is tracing in disguise: treat the codebook as a database,
//! ask a mechanism for all one-way marginals, round each answer to a bit, and
//! run the tracer on the rounded word. The harness estimates two rates. On
//! intact data, how often does the adversary come back empty-handed even
//! though the answers were accurate? With one row replaced by junk, how often
//! does it still accuse exactly that row? A mechanism that keeps both rates
//! small on accurate answers cannot exist once the code is long enough; the
//! experiment measures where a concrete mechanism lands.

use crate::codebook::{feasible, Coalition, Codebook, CombinedWord};
use crate::bitrow::BitRow;
use crate::mechanisms::{answer, whole_family_accuracy_probability, Mechanism, MechanismError};
use crate::query::{is_accurate, one_way_family};
use crate::report::{ExperimentReport, RateEstimate, TrialRecord};
use crate::rng::Stream;
use crate::robust::{gen_robust, trace_robust, RobustError, RobustSecret};
use crate::tardos::{self, gen_with_length, TardosError, TardosParams, TardosSecret};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReidError {
    #[error(transparent)]
    Code(#[from] TardosError),
    #[error(transparent)]
    RobustCode(#[from] RobustError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error("experiment needs at least one trial")]
    NoTrials,
    #[error("code length override applies to the plain code only")]
    LengthOverrideRobust,
}

/// Which code the experiment builds the database from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeKind {
    Plain,
    Robust,
}

impl std::fmt::Display for CodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CodeKind::Plain => "plain",
            CodeKind::Robust => "robust",
        })
    }
}

impl std::str::FromStr for CodeKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "plain" => Ok(CodeKind::Plain),
            "robust" => Ok(CodeKind::Robust),
            other => Err(format!("unknown code kind {other:?}, expected plain or robust")),
        }
    }
}

/// A tracing key of either kind, with uniform trace/score entry points.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeSecret {
    Plain(TardosSecret),
    Robust(RobustSecret),
}

impl CodeSecret {
    pub fn n_users(&self) -> usize {
        match self {
            CodeSecret::Plain(s) => s.n(),
            CodeSecret::Robust(s) => s.n(),
        }
    }

    /// Column count of the codebook this key traces (padded for robust).
    pub fn code_len(&self) -> usize {
        match self {
            CodeSecret::Plain(s) => s.d(),
            CodeSecret::Robust(s) => s.padded_len(),
        }
    }

    /// Error rate the code is built to absorb, as a fraction of its length.
    pub fn tolerated_error_rate(&self) -> f64 {
        match self {
            CodeSecret::Plain(_) => 0.0,
            CodeSecret::Robust(_) => 1.0 / 75.0,
        }
    }

    pub fn trace(&self, cb: &Codebook, word: &CombinedWord) -> Option<usize> {
        match self {
            CodeSecret::Plain(s) => tardos::trace(s, cb, word),
            CodeSecret::Robust(s) => trace_robust(s, cb, word),
        }
    }

    /// Per-user scores against the word (computed on the stripped word for
    /// the robust code).
    pub fn scores(&self, cb: &Codebook, word: &CombinedWord) -> Vec<f64> {
        match self {
            CodeSecret::Plain(s) => tardos::scores(s, cb, word),
            CodeSecret::Robust(s) => {
                let inner_cb = s.strip_codebook(cb);
                let inner_word = s.strip_word(word);
                tardos::scores(s.inner(), &inner_cb, &inner_word)
            }
        }
    }
}

/// Round an answer vector to a combined word: bit j is 1 iff a_j >= 1/2.
/// Out-of-range answers clamp naturally through the threshold.
pub fn round_answers(a: &[f64]) -> CombinedWord {
    let mut word = BitRow::zeros(a.len());
    for (j, &v) in a.iter().enumerate() {
        if v >= 0.5 {
            word.set(j, true);
        }
    }
    word
}

/// The adversary: round the answers and trace. The codebook is the intact
/// one; the adversary never sees which row (if any) was junked.
pub fn reid_adversary(secret: &CodeSecret, cb: &Codebook, answers: &[f64]) -> Option<usize> {
    secret.trace(cb, &round_answers(answers))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReidConfig {
    pub code: CodeKind,
    pub mechanism: Mechanism,
    pub n: usize,
    pub sec: f64,
    /// Plain-code length override; lengths below the formula leave the
    /// tracing guarantee behind (used to probe the accurate-but-private
    /// regime where the user count dwarfs the square root of the length).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code_length: Option<usize>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub keep_records: bool,
}

fn generate_code(config: &ReidConfig, stream: &mut Stream) -> (Codebook, CodeSecret) {
    match config.code {
        CodeKind::Plain => {
            let d = config
                .code_length
                .unwrap_or_else(|| TardosParams::new(config.n, config.sec).expect("validated").d);
            let (cb, secret) =
                gen_with_length(config.n, config.sec, d, stream).expect("validated");
            (cb, CodeSecret::Plain(secret))
        }
        CodeKind::Robust => {
            let (cb, secret) = gen_robust(config.n, config.sec, stream).expect("validated");
            (cb, CodeSecret::Robust(secret))
        }
    }
}

struct TrialOutput {
    intact: TrialRecord,
    removed: TrialRecord,
    traced: bool,
    bot_and_accurate: bool,
    accurate: bool,
    feasible: bool,
    false_accuse: bool,
}

fn run_trial(config: &ReidConfig, trial: u64) -> TrialOutput {
    let mut stream = Stream::for_trial(config.seed, trial);
    let (cb, secret) = generate_code(config, &mut stream);
    let beta = secret.tolerated_error_rate();
    let queries = one_way_family(cb.len());
    let full = Coalition::full(cb.n_users());

    // Condition 1: mechanism answers on the intact codebook-as-database.
    let db = cb.as_database();
    let answers = answer(&db, &config.mechanism, &mut stream).expect("validated");
    let word = round_answers(&answers);
    let accused = secret.trace(&cb, &word);
    let score_max = secret
        .scores(&cb, &word)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let accurate = is_accurate(&answers, &db, &queries, 1.0 / 3.0, beta).expect("valid queries");
    let word_feasible = feasible(&cb, &full, &word, beta);

    // Condition 2: one uniformly chosen row is replaced by the junk row
    // (all zeros) before answering; the adversary still traces against the
    // intact codebook.
    let removed = stream.index(cb.n_users());
    let removed_db = db.with_junk_row(removed);
    let removed_answers = answer(&removed_db, &config.mechanism, &mut stream).expect("validated");
    let removed_accused = reid_adversary(&secret, &cb, &removed_answers);
    let removed_score_max = secret
        .scores(&cb, &round_answers(&removed_answers))
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);

    let seed = config.seed ^ trial;
    TrialOutput {
        intact: TrialRecord {
            trial,
            seed,
            outcome: if accused.is_some() { "accused".into() } else { "bot".into() },
            accused,
            feasible: Some(word_feasible),
            accurate: Some(accurate),
            score_max: Some(score_max),
        },
        removed: TrialRecord {
            trial,
            seed,
            outcome: match removed_accused {
                Some(j) if j == removed => "removed_accused".into(),
                Some(_) => "removed_other".into(),
                None => "removed_bot".into(),
            },
            accused: removed_accused,
            feasible: None,
            accurate: None,
            score_max: Some(removed_score_max),
        },
        traced: accused.is_some(),
        bot_and_accurate: accused.is_none() && accurate,
        accurate,
        feasible: word_feasible,
        false_accuse: removed_accused == Some(removed),
    }
}

/// Notes describing which regime the configuration sits in, derived in closed
/// form before any trial runs.
fn regime_notes(config: &ReidConfig, code_len: usize) -> Vec<String> {
    let mut notes = Vec::new();
    let p = whole_family_accuracy_probability(&config.mechanism, code_len, config.n);
    let verdict = if p >= 2.0 / 3.0 {
        "expected accurate"
    } else {
        "not expected accurate"
    };
    notes.push(format!(
        "mechanism regime: probability {p:.4} that all {code_len} answers land within 1/3 ({verdict})"
    ));
    if let Some(len) = config.code_length {
        let formula = TardosParams::new(config.n, config.sec).expect("validated").d;
        if len < formula {
            notes.push(format!(
                "code length {len} is below the {formula} the length formula requires at n={}: \
                 outside the code's tracing guarantee",
                config.n
            ));
        }
    }
    notes
}

/// Run the two-condition experiment: `trials` independent codebooks, each
/// answered intact and with one junked row. Rates come back with Wilson 95%
/// intervals; reruns with the same config are bit-identical.
pub fn run_reid_experiment(config: &ReidConfig) -> Result<ExperimentReport, ReidError> {
    let params = TardosParams::new(config.n, config.sec)?;
    config.mechanism.validate()?;
    if config.trials == 0 {
        return Err(ReidError::NoTrials);
    }
    if config.code == CodeKind::Robust && config.code_length.is_some() {
        return Err(ReidError::LengthOverrideRobust);
    }
    if let Some(len) = config.code_length {
        if len == 0 {
            return Err(ReidError::Code(TardosError::BadLength(len)));
        }
    }
    let code_len = match config.code {
        CodeKind::Plain => config.code_length.unwrap_or(params.d),
        CodeKind::Robust => 5 * params.d,
    };

    let outputs: Vec<TrialOutput> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect();

    let count = |f: &dyn Fn(&TrialOutput) -> bool| outputs.iter().filter(|o| f(o)).count() as u64;
    let trials = config.trials;
    let mut records = Vec::new();
    if config.keep_records {
        records.extend(outputs.iter().map(|o| o.intact.clone()));
        records.extend(outputs.iter().map(|o| o.removed.clone()));
    }

    Ok(ExperimentReport {
        config: serde_json::to_value(config).expect("config serializes"),
        master_seed: config.seed,
        trials,
        removal_trials: trials,
        traced: RateEstimate::from_counts(count(&|o| o.traced), trials),
        bot_and_accurate: RateEstimate::from_counts(count(&|o| o.bot_and_accurate), trials),
        accurate: RateEstimate::from_counts(count(&|o| o.accurate), trials),
        feasible: RateEstimate::from_counts(count(&|o| o.feasible), trials),
        false_accuse: RateEstimate::from_counts(count(&|o| o.false_accuse), trials),
        notes: regime_notes(config, code_len),
        records,
    })
}
