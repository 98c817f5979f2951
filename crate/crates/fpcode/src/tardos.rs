//! Bias-based fingerprinting code: generation, scoring, and tracing.
//!
//! Each column j draws a bias p_j = sin^2(r_j) with r_j uniform in
//! [t', pi/2 - t'] where sin^2(t') = t = 1/(300n), then hands user i the bit
//! C_ij ~ Bernoulli(p_j). Tracing scores each user against a combined word and
//! accuses the lowest-indexed user whose score reaches Z/2. The score of an
//! innocent user is a zero-mean sum, while colluders' scores are pushed up by
//! every column where the word agrees with their bits.

use crate::codebook::{Codebook, CombinedWord};
use crate::rng::Stream;
use crate::bitrow::BitRow;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TardosError {
    #[error("user count must be at least 2, got {0}")]
    TooFewUsers(usize),
    #[error("security parameter must lie in (0, 1), got {0}")]
    BadSecurity(f64),
    #[error("bias vector has {got} entries, expected {want}")]
    BiasLength { got: usize, want: usize },
    #[error("bias {value} at column {column} outside (0, 1)")]
    BiasRange { column: usize, value: f64 },
    #[error("unsupported secret file version {0}")]
    Version(u32),
    #[error("code length must be at least 1, got {0}")]
    BadLength(usize),
}

/// Code parameters derived from the user count and security level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TardosParams {
    pub n: usize,
    pub sec: f64,
    /// Code length: ceil(100 n^2 ln(n/sec)).
    pub d: usize,
    /// Bias floor: 1/(300n); biases lie in [t, 1-t].
    pub t: f64,
    /// Angle floor: arcsin(sqrt(t)).
    pub t_prime: f64,
    /// Accusation threshold numerator: 20 n ln(n/sec); accuse at score >= z/2.
    pub z: f64,
}

impl TardosParams {
    pub fn new(n: usize, sec: f64) -> Result<Self, TardosError> {
        if n < 2 {
            return Err(TardosError::TooFewUsers(n));
        }
        if !(sec > 0.0 && sec < 1.0) {
            return Err(TardosError::BadSecurity(sec));
        }
        let nf = n as f64;
        let log_ratio = (nf / sec).ln();
        let t = 1.0 / (300.0 * nf);
        Ok(TardosParams {
            n,
            sec,
            d: (100.0 * nf * nf * log_ratio).ceil() as usize,
            t,
            t_prime: t.sqrt().asin(),
            z: 20.0 * nf * log_ratio,
        })
    }
}

/// Tracing key: the per-column biases the codebook was drawn from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SecretRepr", into = "SecretRepr")]
pub struct TardosSecret {
    n: usize,
    d: usize,
    sec: f64,
    p: Vec<f64>,
}

impl TardosSecret {
    pub fn from_raw(n: usize, d: usize, sec: f64, p: Vec<f64>) -> Result<Self, TardosError> {
        if p.len() != d {
            return Err(TardosError::BiasLength { got: p.len(), want: d });
        }
        for (column, &value) in p.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                return Err(TardosError::BiasRange { column, value });
            }
        }
        Ok(TardosSecret { n, d, sec, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sec(&self) -> f64 {
        self.sec
    }

    pub fn biases(&self) -> &[f64] {
        &self.p
    }

    pub fn params(&self) -> TardosParams {
        TardosParams::new(self.n, self.sec).expect("secret was built from valid params")
    }
}

#[derive(Serialize, Deserialize)]
struct SecretRepr {
    version: u32,
    n: usize,
    d: usize,
    sec: f64,
    p: Vec<f64>,
}

impl TryFrom<SecretRepr> for TardosSecret {
    type Error = String;
    fn try_from(repr: SecretRepr) -> Result<Self, String> {
        if repr.version != 1 {
            return Err(TardosError::Version(repr.version).to_string());
        }
        TardosSecret::from_raw(repr.n, repr.d, repr.sec, repr.p).map_err(|e| e.to_string())
    }
}

impl From<TardosSecret> for SecretRepr {
    fn from(secret: TardosSecret) -> Self {
        SecretRepr {
            version: 1,
            n: secret.n,
            d: secret.d,
            sec: secret.sec,
            p: secret.p,
        }
    }
}

/// Sample a fresh codebook and its tracing key.
pub fn gen(n: usize, sec: f64, stream: &mut Stream) -> Result<(Codebook, TardosSecret), TardosError> {
    let params = TardosParams::new(n, sec)?;
    gen_with_length(n, sec, params.d, stream)
}

/// Sample a codebook of an explicit length, keeping the bias range and
/// accusation threshold implied by (n, sec). Lengths below the standard
/// formula void the tracing guarantee; experiments use this to probe that
/// regime deliberately.
pub fn gen_with_length(
    n: usize,
    sec: f64,
    d: usize,
    stream: &mut Stream,
) -> Result<(Codebook, TardosSecret), TardosError> {
    let params = TardosParams::new(n, sec)?;
    if d == 0 {
        return Err(TardosError::BadLength(d));
    }
    let lo = params.t_prime;
    let hi = std::f64::consts::FRAC_PI_2 - params.t_prime;
    let p: Vec<f64> = (0..d)
        .map(|_| {
            let r = stream.range(lo, hi);
            let s = r.sin();
            s * s
        })
        .collect();
    let rows: Vec<BitRow> = (0..n)
        .map(|_| {
            let mut row = BitRow::zeros(d);
            for (j, &pj) in p.iter().enumerate() {
                if stream.bernoulli(pj) {
                    row.set(j, true);
                }
            }
            row
        })
        .collect();
    let cb = Codebook::new(rows).expect("generated rows are uniform");
    let secret = TardosSecret::from_raw(n, d, sec, p)?;
    Ok((cb, secret))
}

/// Score of every user against the combined word: sum over word-1 positions of
/// q_j for a matching 1-bit and -1/q_j for a 0-bit, q_j = sqrt((1-p_j)/p_j).
pub fn scores(secret: &TardosSecret, cb: &Codebook, word: &CombinedWord) -> Vec<f64> {
    assert_eq!(cb.n_users(), secret.n, "codebook user count must match secret");
    assert_eq!(cb.len(), secret.d, "codebook length must match secret");
    assert_eq!(word.len(), secret.d, "word length must match secret");
    let ones = word.one_positions();
    let q: Vec<(usize, f64)> = ones
        .iter()
        .map(|&j| {
            let pj = secret.p[j];
            (j, ((1.0 - pj) / pj).sqrt())
        })
        .collect();
    (0..secret.n)
        .map(|i| {
            let row = cb.row(i);
            let mut s = 0.0;
            for &(j, qj) in &q {
                if row.get(j) {
                    s += qj;
                } else {
                    s -= 1.0 / qj;
                }
            }
            s
        })
        .collect()
}

pub fn score_user(secret: &TardosSecret, cb: &Codebook, user: usize, word: &CombinedWord) -> f64 {
    scores(secret, cb, word)[user]
}

/// Accuse the lowest-indexed user whose score reaches Z/2, if any.
/// A score of exactly Z/2 accuses.
pub fn trace(secret: &TardosSecret, cb: &Codebook, word: &CombinedWord) -> Option<usize> {
    let threshold = secret.params().z / 2.0;
    scores(secret, cb, word)
        .iter()
        .position(|&s| s >= threshold)
}

/// Lower bound on the expected count of each kind of marked column under a
/// full coalition: 5 n^(3/2) ln(n/sec).
pub fn marked_count_bound(n: usize, sec: f64) -> f64 {
    let nf = n as f64;
    5.0 * nf.powf(1.5) * (nf / sec).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::Coalition;

    #[test]
    fn frozen_parameters_for_ten_users() {
        let p = TardosParams::new(10, 0.05).unwrap();
        assert_eq!(p.d, 52984);
        assert!((p.z - 1059.663473309607).abs() < 1e-9, "z = {}", p.z);
        assert!((p.t - 1.0 / 3000.0).abs() < 1e-18);
        let expected_t_prime = (1.0f64 / 3000.0).sqrt().asin();
        assert!((p.t_prime - expected_t_prime).abs() < 1e-15);
    }

    #[test]
    fn parameter_validation() {
        assert_eq!(TardosParams::new(1, 0.05).unwrap_err(), TardosError::TooFewUsers(1));
        assert_eq!(TardosParams::new(10, 0.0).unwrap_err(), TardosError::BadSecurity(0.0));
        assert_eq!(TardosParams::new(10, 1.0).unwrap_err(), TardosError::BadSecurity(1.0));
    }

    #[test]
    fn generated_biases_stay_inside_bias_floor() {
        let mut stream = Stream::seeded(11);
        let (cb, secret) = gen(4, 0.2, &mut stream).unwrap();
        let params = secret.params();
        assert_eq!(cb.n_users(), 4);
        assert_eq!(cb.len(), params.d);
        for &pj in secret.biases() {
            assert!(pj >= params.t - 1e-12 && pj <= 1.0 - params.t + 1e-12);
        }
    }

    #[test]
    fn column_sums_track_biases() {
        // Aggregate z-statistic over all columns of sum_i C_ij ~ Bin(n, p_j).
        let mut stream = Stream::seeded(12);
        let n = 6;
        let (cb, secret) = gen(n, 0.5, &mut stream).unwrap();
        let coalition = Coalition::full(n);
        let sums = cb.column_ones(&coalition);
        let mut centered = 0.0;
        let mut variance = 0.0;
        for (j, &pj) in secret.biases().iter().enumerate() {
            centered += sums[j] as f64 - n as f64 * pj;
            variance += n as f64 * pj * (1.0 - pj);
        }
        let z = centered / variance.sqrt();
        assert!(z.abs() < 5.0, "aggregate column-sum z-score {z}");
    }

    #[test]
    fn score_of_all_zero_word_is_zero_and_untraceable() {
        let mut stream = Stream::seeded(13);
        let (cb, secret) = gen(3, 0.3, &mut stream).unwrap();
        let word = BitRow::zeros(secret.d());
        assert!(scores(&secret, &cb, &word).iter().all(|&s| s == 0.0));
        assert_eq!(trace(&secret, &cb, &word), None);
    }

    #[test]
    fn score_at_half_bias_cancels() {
        // d = 2, p = (1/2, 1/2) so q = 1; row (1, 0) against word (1, 1)
        // scores +1 for the match and -1 for the miss.
        let secret = TardosSecret::from_raw(2, 2, 0.4, vec![0.5, 0.5]).unwrap();
        let cb = Codebook::new(vec![
            BitRow::from_bits(&[true, false]),
            BitRow::from_bits(&[false, true]),
        ])
        .unwrap();
        let word = BitRow::from_bits(&[true, true]);
        let s = scores(&secret, &cb, &word);
        assert!(s[0].abs() < 1e-12 && s[1].abs() < 1e-12);
    }

    #[test]
    fn tracing_a_copied_row_accuses_its_owner() {
        let mut hits = 0;
        for seed in 0..20 {
            let mut stream = Stream::seeded(1000 + seed);
            let (cb, secret) = gen(10, 0.05, &mut stream).unwrap();
            let word = cb.row(2).clone();
            if trace(&secret, &cb, &word) == Some(2) {
                hits += 1;
            }
        }
        assert!(hits >= 19, "row copy traced to owner in {hits}/20 runs");
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let (cb1, s1) = gen(5, 0.1, &mut Stream::seeded(77)).unwrap();
        let (cb2, s2) = gen(5, 0.1, &mut Stream::seeded(77)).unwrap();
        assert_eq!(cb1, cb2);
        assert_eq!(s1, s2);
        let (cb3, _) = gen(5, 0.1, &mut Stream::seeded(78)).unwrap();
        assert_ne!(cb1, cb3);
    }

    #[test]
    fn secret_rejects_bad_biases() {
        assert_eq!(
            TardosSecret::from_raw(2, 3, 0.1, vec![0.5, 0.5]).unwrap_err(),
            TardosError::BiasLength { got: 2, want: 3 }
        );
        assert!(matches!(
            TardosSecret::from_raw(2, 2, 0.1, vec![0.5, 1.0]).unwrap_err(),
            TardosError::BiasRange { column: 1, .. }
        ));
    }

    #[test]
    fn secret_json_roundtrip() {
        let secret = TardosSecret::from_raw(3, 4, 0.2, vec![0.1, 0.5, 0.9, 0.25]).unwrap();
        let json = serde_json::to_string(&secret).unwrap();
        assert!(json.contains("\"version\":1"));
        let back: TardosSecret = serde_json::from_str(&json).unwrap();
        assert_eq!(secret, back);
    }
}
