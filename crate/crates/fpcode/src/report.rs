//! Experiment reports: rate estimates with confidence intervals, per-trial
//! records, and a deterministic CSV rendering.
//!
//! Reports are pure functions of (config, master seed): rerunning an
//! experiment with the same seed reproduces the CSV byte for byte.

use serde::{Deserialize, Serialize};

/// Empirical rate with a 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub count: u64,
    pub total: u64,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl RateEstimate {
    pub fn from_counts(count: u64, total: u64) -> Self {
        if total == 0 {
            return RateEstimate {
                count,
                total,
                rate: 0.0,
                wilson_low: 0.0,
                wilson_high: 1.0,
            };
        }
        let z = 1.96f64;
        let n = total as f64;
        let p = count as f64 / n;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        RateEstimate {
            count,
            total,
            rate: p,
            wilson_low: (center - half).max(0.0),
            wilson_high: (center + half).min(1.0),
        }
    }
}

/// One experiment trial in the CSV schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    /// Short outcome label, e.g. "accused", "bot", "removed_accused".
    pub outcome: String,
    /// Accused user, 0-indexed internally; rendered 1-indexed in the CSV.
    pub accused: Option<usize>,
    pub feasible: Option<bool>,
    pub accurate: Option<bool>,
    pub score_max: Option<f64>,
}

/// Aggregated result of a re-identification or composition experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: serde_json::Value,
    pub master_seed: u64,
    pub trials: u64,
    pub removal_trials: u64,
    /// Adversary accused somebody on intact data.
    pub traced: RateEstimate,
    /// Adversary returned no accusation while the answers were accurate.
    pub bot_and_accurate: RateEstimate,
    /// Answers on intact data were (alpha, beta)-accurate.
    pub accurate: RateEstimate,
    /// Wholeness flag: re-identification reports whether the rounded word
    /// was feasible for the full coalition; composition reports whether
    /// every inner-query slice reconstructed.
    pub feasible: RateEstimate,
    /// Adversary accused exactly the removed row in the removal experiment.
    pub false_accuse: RateEstimate,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<TrialRecord>,
}

fn cell_bool(v: Option<bool>) -> String {
    match v {
        Some(true) => "true".into(),
        Some(false) => "false".into(),
        None => "-".into(),
    }
}

fn cell_user(v: Option<usize>) -> String {
    match v {
        Some(u) => (u + 1).to_string(),
        None => "-".into(),
    }
}

fn cell_score(v: Option<f64>) -> String {
    match v {
        Some(s) => format!("{s:.6}"),
        None => "-".into(),
    }
}

impl ExperimentReport {
    /// CSV with one row per trial and a final aggregate row. All numeric cells
    /// use fixed-width formatting so reruns compare byte for byte.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("trial,seed,outcome,accused,feasible,accurate,score_max\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.trial,
                r.seed,
                r.outcome,
                cell_user(r.accused),
                cell_bool(r.feasible),
                cell_bool(r.accurate),
                cell_score(r.score_max),
            ));
        }
        let max_score = self
            .records
            .iter()
            .filter_map(|r| r.score_max)
            .fold(f64::NEG_INFINITY, f64::max);
        out.push_str(&format!(
            "aggregate,{},traced={:.6};bot_accurate={:.6};false_accuse={:.6},-,{:.6},{:.6},{}\n",
            self.master_seed,
            self.traced.rate,
            self.bot_and_accurate.rate,
            self.false_accuse.rate,
            self.feasible.rate,
            self.accurate.rate,
            if max_score.is_finite() {
                format!("{max_score:.6}")
            } else {
                "-".into()
            },
        ));
        out
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "trials={} traced={:.4} [{:.4},{:.4}] bot_accurate={:.4} accurate={:.4} \
             removal_trials={} false_accuse={:.4} [{:.4},{:.4}]",
            self.trials,
            self.traced.rate,
            self.traced.wilson_low,
            self.traced.wilson_high,
            self.bot_and_accurate.rate,
            self.accurate.rate,
            self.removal_trials,
            self.false_accuse.rate,
            self.false_accuse.wilson_low,
            self.false_accuse.wilson_high,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_interval_brackets_rate() {
        let r = RateEstimate::from_counts(190, 200);
        assert!((r.rate - 0.95).abs() < 1e-12);
        assert!(r.wilson_low < 0.95 && 0.95 < r.wilson_high);
        // Known value: Wilson 95% interval for 190/200 is about [0.911, 0.973].
        assert!((r.wilson_low - 0.9111).abs() < 5e-3, "{}", r.wilson_low);
        assert!((r.wilson_high - 0.9727).abs() < 5e-3, "{}", r.wilson_high);
    }

    #[test]
    fn zero_total_gives_vacuous_interval() {
        let r = RateEstimate::from_counts(0, 0);
        assert_eq!(r.rate, 0.0);
        assert_eq!((r.wilson_low, r.wilson_high), (0.0, 1.0));
    }

    #[test]
    fn csv_is_deterministic_and_one_indexed() {
        let report = ExperimentReport {
            config: serde_json::json!({"demo": true}),
            master_seed: 9,
            trials: 2,
            removal_trials: 0,
            traced: RateEstimate::from_counts(1, 2),
            bot_and_accurate: RateEstimate::from_counts(0, 2),
            accurate: RateEstimate::from_counts(2, 2),
            feasible: RateEstimate::from_counts(2, 2),
            false_accuse: RateEstimate::from_counts(0, 0),
            notes: vec![],
            records: vec![
                TrialRecord {
                    trial: 0,
                    seed: 9,
                    outcome: "accused".into(),
                    accused: Some(0),
                    feasible: Some(true),
                    accurate: Some(true),
                    score_max: Some(1.25),
                },
                TrialRecord {
                    trial: 1,
                    seed: 8,
                    outcome: "bot".into(),
                    accused: None,
                    feasible: Some(true),
                    accurate: Some(true),
                    score_max: Some(-0.5),
                },
            ],
        };
        let csv = report.to_csv();
        assert_eq!(csv, report.to_csv());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "trial,seed,outcome,accused,feasible,accurate,score_max");
        assert_eq!(lines[1], "0,9,accused,1,true,true,1.250000");
        assert!(lines[3].starts_with("aggregate,9,"));
    }
}
