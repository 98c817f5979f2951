//! Error-robust hardening of the fingerprinting code.
//!
//! The robust code pads an inner codebook of length d with 2d all-zero and 2d
//! all-one fake columns, then applies a secret column permutation, giving
//! length d' = 5d. An adversary cannot tell fake columns from genuinely marked
//! real ones, so error budgets spent on marked columns land mostly on fakes;
//! stripping the fakes and un-permuting turns a small error fraction on the
//! padded word into a small error fraction on the inner code's marked columns.

use crate::bitrow::BitRow;
use crate::codebook::{Codebook, CombinedWord};
use crate::rng::Stream;
use crate::tardos::{self, TardosError, TardosSecret};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RobustError {
    #[error(transparent)]
    Inner(#[from] TardosError),
    #[error("permutation length {got} does not match padded length {want}")]
    PermLength { got: usize, want: usize },
    #[error("perm is not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("fake column list disagrees with the permutation")]
    FakeMismatch,
}

/// One padded fake column: its position in the permuted code and planted bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FakeColumn {
    pub pos: usize,
    pub bit: u8,
}

/// Tracing key for the robust code: the inner key, the column permutation,
/// and the planted fake columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RobustRepr", into = "RobustRepr")]
pub struct RobustSecret {
    inner: TardosSecret,
    /// Column j of the padded code holds augmented column perm[j], where
    /// augmented columns 0..d are real, d..3d fake zeros, 3d..5d fake ones.
    perm: Vec<usize>,
    fakes: Vec<FakeColumn>,
}

impl RobustSecret {
    fn from_parts(
        inner: TardosSecret,
        perm: Vec<usize>,
        fakes: Vec<FakeColumn>,
    ) -> Result<Self, RobustError> {
        let d = inner.d();
        let padded = 5 * d;
        if perm.len() != padded {
            return Err(RobustError::PermLength {
                got: perm.len(),
                want: padded,
            });
        }
        let mut seen = vec![false; padded];
        for &src in &perm {
            if src >= padded || seen[src] {
                return Err(RobustError::NotAPermutation(padded));
            }
            seen[src] = true;
        }
        let expected: Vec<FakeColumn> = perm
            .iter()
            .enumerate()
            .filter(|(_, &src)| src >= d)
            .map(|(pos, &src)| FakeColumn {
                pos,
                bit: u8::from(src >= 3 * d),
            })
            .collect();
        if fakes != expected {
            return Err(RobustError::FakeMismatch);
        }
        Ok(RobustSecret { inner, perm, fakes })
    }

    pub fn inner(&self) -> &TardosSecret {
        &self.inner
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn fakes(&self) -> &[FakeColumn] {
        &self.fakes
    }

    /// Padded code length d' = 5d.
    pub fn padded_len(&self) -> usize {
        5 * self.inner.d()
    }

    pub fn n(&self) -> usize {
        self.inner.n()
    }

    /// Recover the inner word from a padded word: drop fake positions and
    /// un-permute the real ones.
    pub fn strip_word(&self, word: &CombinedWord) -> CombinedWord {
        assert_eq!(word.len(), self.padded_len(), "padded word length mismatch");
        let d = self.inner.d();
        let mut inner = BitRow::zeros(d);
        for (j, &src) in self.perm.iter().enumerate() {
            if src < d {
                inner.set(src, word.get(j));
            }
        }
        inner
    }

    /// Recover the inner codebook from a padded codebook.
    pub fn strip_codebook(&self, cb: &Codebook) -> Codebook {
        assert_eq!(cb.len(), self.padded_len(), "padded codebook length mismatch");
        assert_eq!(cb.n_users(), self.inner.n(), "padded codebook user count mismatch");
        let rows = cb.rows().iter().map(|row| self.strip_word(row)).collect();
        Codebook::new(rows).expect("stripped rows are uniform")
    }
}

#[derive(Serialize, Deserialize)]
struct RobustRepr {
    inner: TardosSecret,
    perm: Vec<usize>,
    fake: Vec<FakeColumn>,
}

impl TryFrom<RobustRepr> for RobustSecret {
    type Error = String;
    fn try_from(repr: RobustRepr) -> Result<Self, String> {
        RobustSecret::from_parts(repr.inner, repr.perm, repr.fake).map_err(|e| e.to_string())
    }
}

impl From<RobustSecret> for RobustRepr {
    fn from(secret: RobustSecret) -> Self {
        RobustRepr {
            inner: secret.inner,
            perm: secret.perm,
            fake: secret.fakes,
        }
    }
}

/// Sample a robust codebook of length 5d and its tracing key.
pub fn gen_robust(
    n: usize,
    sec: f64,
    stream: &mut Stream,
) -> Result<(Codebook, RobustSecret), RobustError> {
    let (inner_cb, inner_secret) = tardos::gen(n, sec, stream)?;
    let d = inner_secret.d();
    let padded = 5 * d;
    let mut perm: Vec<usize> = (0..padded).collect();
    stream.shuffle(&mut perm);

    let rows: Vec<BitRow> = (0..n)
        .map(|i| {
            let mut row = BitRow::zeros(padded);
            for (j, &src) in perm.iter().enumerate() {
                let bit = if src < d {
                    inner_cb.get(i, src)
                } else {
                    src >= 3 * d
                };
                row.set(j, bit);
            }
            row
        })
        .collect();
    let cb = Codebook::new(rows).expect("generated rows are uniform");

    let fakes: Vec<FakeColumn> = perm
        .iter()
        .enumerate()
        .filter(|(_, &src)| src >= d)
        .map(|(pos, &src)| FakeColumn {
            pos,
            bit: u8::from(src >= 3 * d),
        })
        .collect();
    let secret = RobustSecret::from_parts(inner_secret, perm, fakes)?;
    Ok((cb, secret))
}

/// Trace a padded word: strip fakes from both the word and the codebook, then
/// run the inner tracer.
pub fn trace_robust(secret: &RobustSecret, cb: &Codebook, word: &CombinedWord) -> Option<usize> {
    let inner_cb = secret.strip_codebook(cb);
    let inner_word = secret.strip_word(word);
    tardos::trace(secret.inner(), &inner_cb, &inner_word)
}
