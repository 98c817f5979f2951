//! Baseline mechanisms answering all one-way marginals of a database.
//!
//! These are the algorithms the re-identification experiments attack: exact
//! answers, Laplace noise calibrated for eps-differential privacy over the
//! whole d-query family (scale d/(eps n)), and Gaussian noise calibrated for
//! (eps, delta)-differential privacy (variance 2 d ln(1/delta) / (eps n)^2).
//! Answers are returned as-is, without clamping to [0, 1].

use crate::query::Database;
use crate::rng::{normal_upper_tail, Stream};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MechanismError {
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("delta must lie in (0, 1), got {0}")]
    BadDelta(f64),
}

/// Mechanism selector as it appears in experiment configs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Mechanism {
    Exact,
    Laplace { eps: f64 },
    Gaussian { eps: f64, delta: f64 },
}

impl Mechanism {
    pub fn validate(&self) -> Result<(), MechanismError> {
        match *self {
            Mechanism::Exact => Ok(()),
            Mechanism::Laplace { eps } => {
                if eps > 0.0 {
                    Ok(())
                } else {
                    Err(MechanismError::BadEpsilon(eps))
                }
            }
            Mechanism::Gaussian { eps, delta } => {
                if eps <= 0.0 {
                    Err(MechanismError::BadEpsilon(eps))
                } else if !(delta > 0.0 && delta < 1.0) {
                    Err(MechanismError::BadDelta(delta))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Exact answers to all one-way marginals, in attribute order.
pub fn answer_exact(db: &Database) -> Vec<f64> {
    let n = db.n_rows() as f64;
    db.one_way_counts()
        .into_iter()
        .map(|count| count as f64 / n)
        .collect()
}

/// Laplace noise scale for a d-query family: d / (eps * n).
pub fn laplace_scale(d: usize, n: usize, eps: f64) -> f64 {
    d as f64 / (eps * n as f64)
}

pub fn answer_laplace(db: &Database, eps: f64, stream: &mut Stream) -> Vec<f64> {
    let scale = laplace_scale(db.width(), db.n_rows(), eps);
    answer_exact(db)
        .into_iter()
        .map(|a| a + stream.laplace(scale))
        .collect()
}

/// Gaussian noise deviation for a d-query family:
/// sqrt(2 d ln(1/delta)) / (eps * n).
pub fn gaussian_sigma(d: usize, n: usize, eps: f64, delta: f64) -> f64 {
    (2.0 * d as f64 * (1.0 / delta).ln()).sqrt() / (eps * n as f64)
}

pub fn answer_gaussian(db: &Database, eps: f64, delta: f64, stream: &mut Stream) -> Vec<f64> {
    answer_with_sigma(db, gaussian_sigma(db.width(), db.n_rows(), eps, delta), stream)
}

/// Exact answers plus N(0, sigma^2) noise; the zero-noise limit is exact.
pub fn answer_with_sigma(db: &Database, sigma: f64, stream: &mut Stream) -> Vec<f64> {
    answer_exact(db)
        .into_iter()
        .map(|a| a + stream.normal(sigma))
        .collect()
}

/// Answer all one-way marginals with the selected mechanism.
pub fn answer(db: &Database, mechanism: &Mechanism, stream: &mut Stream) -> Result<Vec<f64>, MechanismError> {
    mechanism.validate()?;
    Ok(match *mechanism {
        Mechanism::Exact => answer_exact(db),
        Mechanism::Laplace { eps } => answer_laplace(db, eps, stream),
        Mechanism::Gaussian { eps, delta } => answer_gaussian(db, eps, delta, stream),
    })
}

/// Add mechanism noise to exact answers of an arbitrary counting-query
/// family over a database with `n_rows` rows, with the same whole-family
/// calibration as the one-way case (d = family size).
pub fn noisy_family(
    exact: &[f64],
    mechanism: &Mechanism,
    n_rows: usize,
    stream: &mut Stream,
) -> Result<Vec<f64>, MechanismError> {
    mechanism.validate()?;
    Ok(match *mechanism {
        Mechanism::Exact => exact.to_vec(),
        Mechanism::Laplace { eps } => {
            let scale = laplace_scale(exact.len(), n_rows, eps);
            exact.iter().map(|a| a + stream.laplace(scale)).collect()
        }
        Mechanism::Gaussian { eps, delta } => {
            let sigma = gaussian_sigma(exact.len(), n_rows, eps, delta);
            exact.iter().map(|a| a + stream.normal(sigma)).collect()
        }
    })
}

/// Probability that every one of the d answers lands within 1/3 of the exact
/// value, using the independence of per-query noise. Used to flag experiment
/// regimes where the mechanism is expected to be accurate.
pub fn whole_family_accuracy_probability(mechanism: &Mechanism, d: usize, n: usize) -> f64 {
    let per_query_miss = match *mechanism {
        Mechanism::Exact => 0.0,
        Mechanism::Laplace { eps } => {
            let scale = laplace_scale(d, n, eps);
            (-(1.0 / 3.0) / scale).exp()
        }
        Mechanism::Gaussian { eps, delta } => {
            let sigma = gaussian_sigma(d, n, eps, delta);
            2.0 * normal_upper_tail((1.0 / 3.0) / sigma)
        }
    };
    (1.0 - per_query_miss).powi(d as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitrow::BitRow;

    fn db_from_bits(rows: &[&[bool]]) -> Database {
        Database::new(rows.iter().map(|r| BitRow::from_bits(r)).collect()).unwrap()
    }

    #[test]
    fn exact_answers_are_column_fractions() {
        let db = db_from_bits(&[&[true, false, true], &[true, true, false]]);
        assert_eq!(answer_exact(&db), vec![1.0, 0.5, 0.5]);
    }

    #[test]
    fn width_zero_gives_empty_answers() {
        let db = Database::new(vec![BitRow::zeros(0), BitRow::zeros(0)]).unwrap();
        assert!(answer_exact(&db).is_empty());
        let mut stream = Stream::seeded(41);
        assert!(answer_laplace(&db, 1.0, &mut stream).is_empty());
    }

    #[test]
    fn huge_epsilon_laplace_is_nearly_exact() {
        let db = db_from_bits(&[&[true, false], &[false, false]]);
        let mut stream = Stream::seeded(42);
        let noisy = answer_laplace(&db, 1e15, &mut stream);
        let exact = answer_exact(&db);
        for (a, e) in noisy.iter().zip(&exact) {
            assert!((a - e).abs() < 1e-9);
        }
    }

    #[test]
    fn laplace_noise_has_calibrated_variance() {
        // d = 4, n = 2, eps = 2 gives scale 1 and variance 2.
        let db = db_from_bits(&[&[true; 4], &[false; 4]]);
        let exact = answer_exact(&db);
        let mut stream = Stream::seeded(43);
        let trials = 20_000;
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..trials {
            let noisy = answer_laplace(&db, 2.0, &mut stream);
            for (a, e) in noisy.iter().zip(&exact) {
                let err = a - e;
                sum += err;
                sumsq += err * err;
            }
        }
        let count = (trials * 4) as f64;
        let mean = sum / count;
        let var = sumsq / count - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 2.0).abs() < 0.06, "variance {var}");
    }

    #[test]
    fn gaussian_sigma_formula() {
        let sigma = gaussian_sigma(52984, 10, 1.0, 0.05);
        let expected = (2.0 * 52984.0 * 20.0f64.ln()).sqrt() / 10.0;
        assert!((sigma - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_sigma_hook_is_exact() {
        let db = db_from_bits(&[&[true, false, true]]);
        let mut stream = Stream::seeded(44);
        assert_eq!(answer_with_sigma(&db, 0.0, &mut stream), answer_exact(&db));
    }

    #[test]
    fn mechanism_validation() {
        assert_eq!(
            Mechanism::Laplace { eps: 0.0 }.validate().unwrap_err(),
            MechanismError::BadEpsilon(0.0)
        );
        assert_eq!(
            Mechanism::Gaussian { eps: 1.0, delta: 0.0 }.validate().unwrap_err(),
            MechanismError::BadDelta(0.0)
        );
        assert!(Mechanism::Exact.validate().is_ok());
    }

    #[test]
    fn mechanism_config_json_shape() {
        let m: Mechanism = serde_json::from_str(r#"{"name":"laplace","eps":0.5}"#).unwrap();
        assert_eq!(m, Mechanism::Laplace { eps: 0.5 });
        let m: Mechanism = serde_json::from_str(r#"{"name":"exact"}"#).unwrap();
        assert_eq!(m, Mechanism::Exact);
    }

    /// With n scaled a factor sqrt(2) above the self-consistent attack size,
    /// the whole family of answers is within 1/3 of exact with probability
    /// well above 2/3, and the Monte-Carlo rate matches the closed form.
    #[test]
    fn gaussian_accuracy_regime_monte_carlo() {
        let d = 64;
        let delta = 0.05f64;
        let eps = 1.0;
        let n_attack = (18.0 * d as f64 * (1.0 / delta).ln() * (1.5 * d as f64).ln()).sqrt();
        let n = (n_attack * std::f64::consts::SQRT_2).ceil() as usize; // 178
        assert_eq!(n, 178);

        let rows: Vec<BitRow> = (0..n)
            .map(|i| {
                let mut row = BitRow::zeros(d);
                for j in 0..d {
                    if (i + j) % 2 == 0 {
                        row.set(j, true);
                    }
                }
                row
            })
            .collect();
        let db = Database::new(rows).unwrap();
        let exact = answer_exact(&db);

        let trials = 300;
        let mut all_within = 0;
        for trial in 0..trials {
            let mut stream = Stream::for_trial(4242, trial);
            let noisy = answer_gaussian(&db, eps, delta, &mut stream);
            if noisy
                .iter()
                .zip(&exact)
                .all(|(a, e)| (a - e).abs() <= 1.0 / 3.0)
            {
                all_within += 1;
            }
        }
        let rate = all_within as f64 / trials as f64;
        assert!(rate >= 2.0 / 3.0, "accuracy rate {rate}");

        let predicted =
            whole_family_accuracy_probability(&Mechanism::Gaussian { eps, delta }, d, n);
        assert!((rate - predicted).abs() < 0.08, "rate {rate} vs predicted {predicted}");
    }
}
