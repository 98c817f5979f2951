//! One level of query composition: product databases, conjunction answers,
//! per-subdatabase reconstruction, and the lifted re-identification
//! adversary.
//!
//! A product database stacks n subdatabases behind n outer rows; a
//! conjunction query asks an outer query of the row identity and an inner
//! query of the subdatabase content. Because the conjunction average is a
//! subset sum of the vector (q'(D'_1), ..., q'(D'_n)), accurate answers to
//! the product family let an attacker reconstruct every inner answer
//! per subdatabase, then point the re-identification adversary at any one of
//! them. Privacy failures compose: protecting the big database is no easier
//! than protecting each small one.

use crate::codebook::Codebook;
use crate::mechanisms::{noisy_family, Mechanism, MechanismError};
use crate::query::{
    correlation, eval_query, one_way_family, violation_budget, CountingQuery, Database,
    QueryError,
};
use crate::reconstruct::vc_reconstruct;
use crate::reid::{reid_adversary, round_answers, CodeSecret};
use crate::report::{ExperimentReport, RateEstimate, TrialRecord};
use crate::rng::Stream;
use crate::tardos::{self, TardosError, TardosParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("need one inner database per outer row: {outer} rows, {inner} inner databases")]
    InnerCount { outer: usize, inner: usize },
    #[error("inner databases must share one shape (rows and width)")]
    RaggedInner,
    #[error("experiment needs at least one trial")]
    NoTrials,
    #[error("outer dimension {0} too large; the shattering family doubles per row (limit 12)")]
    OuterTooLarge(usize),
    #[error("composition slack parameter must be at least 6, got {0}")]
    BadSlack(f64),
    #[error("accuracy promise must lie in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error(transparent)]
    Code(#[from] TardosError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

/// n subdatabases of n' rows each, stacked behind an outer database of n
/// identity rows; product row (i, j) carries (x_i, x'_{ij}).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductDatabase {
    outer: Database,
    inner: Vec<Database>,
}

impl ProductDatabase {
    pub fn new(outer: Database, inner: Vec<Database>) -> Result<Self, ComposeError> {
        if inner.len() != outer.n_rows() {
            return Err(ComposeError::InnerCount {
                outer: outer.n_rows(),
                inner: inner.len(),
            });
        }
        let first = &inner[0];
        if inner
            .iter()
            .any(|d| d.n_rows() != first.n_rows() || d.width() != first.width())
        {
            return Err(ComposeError::RaggedInner);
        }
        Ok(ProductDatabase { outer, inner })
    }

    pub fn outer(&self) -> &Database {
        &self.outer
    }

    pub fn inner(&self) -> &[Database] {
        &self.inner
    }

    pub fn n_outer(&self) -> usize {
        self.outer.n_rows()
    }

    pub fn n_inner(&self) -> usize {
        self.inner[0].n_rows()
    }

    pub fn total_rows(&self) -> usize {
        self.n_outer() * self.n_inner()
    }

    pub fn flatten(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n_outer() && j < self.n_inner());
        i * self.n_inner() + j
    }

    pub fn unflatten(&self, k: usize) -> (usize, usize) {
        debug_assert!(k < self.total_rows());
        (k / self.n_inner(), k % self.n_inner())
    }

    /// Replace the content of inner row (i, j) with the junk row, leaving the
    /// outer identity untouched: position-based outer queries still see row
    /// i, but no inner query sees the removed individual's data.
    pub fn with_junk_inner_row(&self, i: usize, j: usize) -> ProductDatabase {
        let mut inner = self.inner.clone();
        inner[i] = inner[i].with_junk_row(j);
        ProductDatabase {
            outer: self.outer.clone(),
            inner,
        }
    }
}

/// The conjunction average (q and q')(D*), computed row by row over all
/// n * n' product rows. Equals `subset_sum_rhs` exactly.
pub fn eval_conjunction(
    q: &CountingQuery,
    q_inner: &CountingQuery,
    product: &ProductDatabase,
) -> Result<f64, ComposeError> {
    q.validate(product.n_outer(), product.outer.width())?;
    q_inner.validate(product.n_inner(), product.inner[0].width())?;
    let mut count = 0usize;
    for i in 0..product.n_outer() {
        if !q.evaluate_row(i, product.outer.row(i)) {
            continue;
        }
        for j in 0..product.n_inner() {
            if q_inner.evaluate_row(j, product.inner[i].row(j)) {
                count += 1;
            }
        }
    }
    Ok(count as f64 / product.total_rows() as f64)
}

/// The subset-sum side of the identity: (1/n) sum_i q(x_i) * q'(D'_i).
pub fn subset_sum_rhs(
    q: &CountingQuery,
    q_inner: &CountingQuery,
    product: &ProductDatabase,
) -> Result<f64, ComposeError> {
    q.validate(product.n_outer(), product.outer.width())?;
    let mut total = 0.0;
    for i in 0..product.n_outer() {
        if q.evaluate_row(i, product.outer.row(i)) {
            total += eval_query(q_inner, &product.inner[i])?;
        }
    }
    Ok(total / product.n_outer() as f64)
}

/// Exact answers to the whole product family, one slice per inner query:
/// `a[k][l]` answers (outer_queries[l] and inner_queries[k]). Computed
/// through the subset-sum identity; slices evaluate in parallel.
pub fn product_answers(
    product: &ProductDatabase,
    outer_queries: &[CountingQuery],
    inner_queries: &[CountingQuery],
) -> Result<Vec<Vec<f64>>, ComposeError> {
    for q in outer_queries {
        q.validate(product.n_outer(), product.outer.width())?;
    }
    for q in inner_queries {
        q.validate(product.n_inner(), product.inner[0].width())?;
    }
    inner_queries
        .par_iter()
        .map(|q_inner| {
            let s: Vec<f64> = product
                .inner
                .iter()
                .map(|d| eval_query(q_inner, d))
                .collect::<Result<_, _>>()?;
            outer_queries
                .iter()
                .map(|q| correlation(q, &product.outer, &s).map_err(ComposeError::from))
                .collect()
        })
        .collect()
}

/// Per-subdatabase reconstruction: `t[k][i]` estimates inner_queries[k] on
/// subdatabase i, and `good[k]` records whether slice k reconstructed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubReconstruction {
    pub t: Vec<Vec<f64>>,
    pub good: Vec<bool>,
}

impl SubReconstruction {
    /// All reconstructed inner answers for subdatabase i, in slice order.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.t.iter().map(|row| row[i]).collect()
    }

    pub fn good_count(&self) -> usize {
        self.good.iter().filter(|&&g| g).count()
    }
}

/// Run the box reconstruction once per inner-query slice. Individual slice
/// failures are data, not errors: the slice is flagged and filled with the
/// neutral value 1/2.
pub fn reconstruct_subanswers(
    outer: &Database,
    outer_queries: &[CountingQuery],
    answers: &[Vec<f64>],
    alpha: f64,
) -> SubReconstruction {
    let n = outer.n_rows();
    let slices: Vec<(Vec<f64>, bool)> = answers
        .par_iter()
        .map(|slice| match vc_reconstruct(outer, outer_queries, slice, alpha) {
            Ok(t) => (t, true),
            Err(_) => (vec![0.5; n], false),
        })
        .collect();
    let mut t = Vec::with_capacity(slices.len());
    let mut good = Vec::with_capacity(slices.len());
    for (row, ok) in slices {
        t.push(row);
        good.push(ok);
    }
    SubReconstruction { t, good }
}

/// Run the inner adversary on one chosen subdatabase and lift its accusation
/// to a product row.
pub fn composed_adversary_on(
    i: usize,
    secrets: &[CodeSecret],
    codebooks: &[Codebook],
    sub: &SubReconstruction,
) -> Option<(usize, usize)> {
    reid_adversary(&secrets[i], &codebooks[i], &sub.column(i)).map(|j| (i, j))
}

/// Choose a uniform subdatabase, run the inner re-identification adversary
/// on its reconstructed inner answers, and lift the accusation; an inner
/// no-accusation propagates.
pub fn composed_adversary(
    secrets: &[CodeSecret],
    codebooks: &[Codebook],
    sub: &SubReconstruction,
    stream: &mut Stream,
) -> Option<(usize, usize)> {
    let i = stream.index(secrets.len());
    composed_adversary_on(i, secrets, codebooks, sub)
}

fn default_slack() -> f64 {
    150.0
}

/// Configuration of the composed experiment: outer identity rows over
/// subdatabases of fingerprinted users, the product family = all outer
/// subsets crossed with all inner one-way marginals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComposedConfig {
    /// Subdatabase count (outer rows).
    pub n_outer: usize,
    /// Users per subdatabase.
    pub n_inner: usize,
    pub sec: f64,
    pub mechanism: Mechanism,
    /// Accuracy promise handed to each slice reconstruction.
    pub alpha: f64,
    /// Composition slack: answers may violate alpha on a 1/c fraction of the
    /// family, and good subdatabase columns are (6 c alpha', 2/c)-accurate.
    #[serde(default = "default_slack")]
    pub c: f64,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub keep_records: bool,
}

struct ComposedTrial {
    intact: TrialRecord,
    removed: TrialRecord,
    traced: bool,
    bot_and_accurate: bool,
    accurate: bool,
    all_slices_good: bool,
    false_accuse: bool,
}

fn run_composed_trial(
    config: &ComposedConfig,
    outer_db: &Database,
    outer_queries: &[CountingQuery],
    trial: u64,
) -> ComposedTrial {
    let mut stream = Stream::for_trial(config.seed, trial);
    let n = config.n_outer;

    let mut codebooks = Vec::with_capacity(n);
    let mut secrets = Vec::with_capacity(n);
    for _ in 0..n {
        let (cb, secret) =
            tardos::gen(config.n_inner, config.sec, &mut stream).expect("validated");
        codebooks.push(cb);
        secrets.push(CodeSecret::Plain(secret));
    }
    let inner_dbs: Vec<Database> = codebooks.iter().map(|cb| cb.as_database()).collect();
    let product =
        ProductDatabase::new(outer_db.clone(), inner_dbs).expect("matching shapes");
    let inner_queries = one_way_family(product.inner()[0].width());

    let answer_product = |p: &ProductDatabase, stream: &mut Stream| {
        let exact = product_answers(p, outer_queries, &inner_queries).expect("validated");
        let flat: Vec<f64> = exact.iter().flatten().copied().collect();
        let noisy =
            noisy_family(&flat, &config.mechanism, p.total_rows(), stream).expect("validated");
        let answers: Vec<Vec<f64>> = noisy
            .chunks(outer_queries.len())
            .map(|c| c.to_vec())
            .collect();
        (exact, answers)
    };

    // Condition 1: answers on the intact product database.
    let (exact, answers) = answer_product(&product, &mut stream);
    let budget = violation_budget(1.0 / config.c, exact.len() * outer_queries.len());
    let violations = exact
        .iter()
        .flatten()
        .zip(answers.iter().flatten())
        .filter(|(e, a)| (**a - **e).abs() > config.alpha)
        .count();
    let accurate = violations <= budget;
    let sub = reconstruct_subanswers(outer_db, outer_queries, &answers, config.alpha);
    let all_slices_good = sub.good_count() == sub.good.len();
    let picked = stream.index(n);
    let accused = composed_adversary_on(picked, &secrets, &codebooks, &sub);
    let score_max = secrets[picked]
        .scores(&codebooks[picked], &round_answers(&sub.column(picked)))
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);

    // Condition 2: one uniformly chosen individual's inner row is junked
    // before answering; the adversary keeps the intact codebooks.
    let removed = (stream.index(n), stream.index(config.n_inner));
    let junked = product.with_junk_inner_row(removed.0, removed.1);
    let (_, removed_answers) = answer_product(&junked, &mut stream);
    let removed_sub =
        reconstruct_subanswers(outer_db, outer_queries, &removed_answers, config.alpha);
    let removed_picked = stream.index(n);
    let removed_accused =
        composed_adversary_on(removed_picked, &secrets, &codebooks, &removed_sub);
    let removed_score_max = secrets[removed_picked]
        .scores(
            &codebooks[removed_picked],
            &round_answers(&removed_sub.column(removed_picked)),
        )
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);

    let seed = config.seed ^ trial;
    ComposedTrial {
        intact: TrialRecord {
            trial,
            seed,
            outcome: if accused.is_some() { "accused".into() } else { "bot".into() },
            accused: accused.map(|(i, j)| product.flatten(i, j)),
            feasible: Some(all_slices_good),
            accurate: Some(accurate),
            score_max: Some(score_max),
        },
        removed: TrialRecord {
            trial,
            seed,
            outcome: match removed_accused {
                Some(pair) if pair == removed => "removed_accused".into(),
                Some(_) => "removed_other".into(),
                None => "removed_bot".into(),
            },
            accused: removed_accused.map(|(i, j)| product.flatten(i, j)),
            feasible: None,
            accurate: None,
            score_max: Some(removed_score_max),
        },
        traced: accused.is_some(),
        bot_and_accurate: accused.is_none() && accurate,
        accurate,
        all_slices_good,
        false_accuse: removed_accused == Some(removed),
    }
}

/// Run the composed two-condition experiment: per trial, fresh inner codes
/// behind a fixed shattered outer database, answered intact and with one
/// junked inner row. The report's `feasible` column records whether every
/// inner-query slice reconstructed.
pub fn run_composed_experiment(config: &ComposedConfig) -> Result<ExperimentReport, ComposeError> {
    if config.n_outer == 0 || config.n_outer > 12 {
        return Err(ComposeError::OuterTooLarge(config.n_outer));
    }
    TardosParams::new(config.n_inner, config.sec)?;
    config.mechanism.validate()?;
    if config.trials == 0 {
        return Err(ComposeError::NoTrials);
    }
    if config.c.is_nan() || config.c < 6.0 {
        return Err(ComposeError::BadSlack(config.c));
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(ComposeError::BadAlpha(config.alpha));
    }

    let (outer_db, outer_queries) = crate::reconstruct::build_shattered_instance(config.n_outer)
        .expect("outer dimension validated");

    let outputs: Vec<ComposedTrial> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_composed_trial(config, &outer_db, &outer_queries, t))
        .collect();

    let count =
        |f: &dyn Fn(&ComposedTrial) -> bool| outputs.iter().filter(|o| f(o)).count() as u64;
    let trials = config.trials;
    let mut records = Vec::new();
    if config.keep_records {
        records.extend(outputs.iter().map(|o| o.intact.clone()));
        records.extend(outputs.iter().map(|o| o.removed.clone()));
    }

    let d_inner = TardosParams::new(config.n_inner, config.sec)?.d;
    let family = (1usize << config.n_outer) * d_inner;
    Ok(ExperimentReport {
        config: serde_json::to_value(config).expect("config serializes"),
        master_seed: config.seed,
        trials,
        removal_trials: trials,
        traced: RateEstimate::from_counts(count(&|o| o.traced), trials),
        bot_and_accurate: RateEstimate::from_counts(count(&|o| o.bot_and_accurate), trials),
        accurate: RateEstimate::from_counts(count(&|o| o.accurate), trials),
        feasible: RateEstimate::from_counts(count(&|o| o.all_slices_good), trials),
        false_accuse: RateEstimate::from_counts(count(&|o| o.false_accuse), trials),
        notes: vec![format!(
            "product family: {} outer subsets x {} inner marginals = {} conjunctions",
            1usize << config.n_outer,
            d_inner,
            family
        )],
        records,
    })
}
