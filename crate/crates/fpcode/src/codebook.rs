//! Code matrices, coalitions, and feasibility of combined words.
//!
//! A column is *marked* for a coalition when every coalition row agrees on it;
//! a combined word can only disagree with the coalition on marked columns, so
//! feasibility counts exactly those disagreements. `feasible` budgets them
//! against the full length, `weakly_feasible` against the marked count only.

use crate::bitrow::BitRow;
use crate::query::{violation_budget, Database};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A combined word has the same packed layout as a codebook row.
pub type CombinedWord = BitRow;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodebookError {
    #[error("codebook must have at least one row")]
    Empty,
    #[error("codebook rows must share one length; row {row} has {got}, expected {want}")]
    RaggedRows { row: usize, got: usize, want: usize },
    #[error("coalition is empty")]
    EmptyCoalition,
    #[error("coalition member {user} out of range for {users} users")]
    UserOutOfRange { user: usize, users: usize },
    #[error("unsupported codebook file version {0}")]
    Version(u32),
}

/// n-by-d binary code matrix; row i is the codeword handed to user i.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CodebookRepr", into = "CodebookRepr")]
pub struct Codebook {
    d: usize,
    rows: Vec<BitRow>,
}

impl Codebook {
    pub fn new(rows: Vec<BitRow>) -> Result<Self, CodebookError> {
        let d = rows.first().ok_or(CodebookError::Empty)?.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(CodebookError::RaggedRows {
                    row: i,
                    got: row.len(),
                    want: d,
                });
            }
        }
        Ok(Codebook { d, rows })
    }

    pub fn n_users(&self) -> usize {
        self.rows.len()
    }

    pub fn len(&self) -> usize {
        self.d
    }

    pub fn is_empty(&self) -> bool {
        self.d == 0
    }

    pub fn row(&self, i: usize) -> &BitRow {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    #[inline]
    pub fn get(&self, user: usize, position: usize) -> bool {
        self.rows[user].get(position)
    }

    /// The codebook viewed as a database: one row per user.
    pub fn as_database(&self) -> Database {
        Database::new(self.rows.clone()).expect("codebook rows are uniform")
    }

    /// Number of coalition members holding a 1 in each column.
    pub fn column_ones(&self, coalition: &Coalition) -> Vec<usize> {
        let mut counts = vec![0usize; self.d];
        for &i in coalition.members() {
            let row = &self.rows[i];
            for (j, count) in counts.iter_mut().enumerate() {
                if row.get(j) {
                    *count += 1;
                }
            }
        }
        counts
    }
}

#[derive(Serialize, Deserialize)]
struct CodebookRepr {
    version: u32,
    n: usize,
    d: usize,
    rows: Vec<String>,
}

impl TryFrom<CodebookRepr> for Codebook {
    type Error = String;
    fn try_from(repr: CodebookRepr) -> Result<Self, String> {
        if repr.version != 1 {
            return Err(CodebookError::Version(repr.version).to_string());
        }
        if repr.rows.len() != repr.n {
            return Err(format!("expected {} rows, found {}", repr.n, repr.rows.len()));
        }
        let rows = repr
            .rows
            .iter()
            .map(|hex| BitRow::from_hex(hex, repr.d))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        Codebook::new(rows).map_err(|e| e.to_string())
    }
}

impl From<Codebook> for CodebookRepr {
    fn from(cb: Codebook) -> Self {
        CodebookRepr {
            version: 1,
            n: cb.n_users(),
            d: cb.d,
            rows: cb.rows.iter().map(BitRow::to_hex).collect(),
        }
    }
}

/// Nonempty set of colluding users, stored sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coalition(Vec<usize>);

impl Coalition {
    pub fn new(mut members: Vec<usize>, n_users: usize) -> Result<Self, CodebookError> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(CodebookError::EmptyCoalition);
        }
        if let Some(&user) = members.iter().find(|&&u| u >= n_users) {
            return Err(CodebookError::UserOutOfRange {
                user,
                users: n_users,
            });
        }
        Ok(Coalition(members))
    }

    /// All n users.
    pub fn full(n_users: usize) -> Self {
        Coalition((0..n_users).collect())
    }

    /// All users except `excluded`.
    pub fn all_but(n_users: usize, excluded: usize) -> Self {
        Coalition((0..n_users).filter(|&i| i != excluded).collect())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, user: usize) -> bool {
        self.0.binary_search(&user).is_ok()
    }
}

/// Columns on which every coalition member agrees, split by the shared bit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MarkedColumns {
    pub zero: Vec<usize>,
    pub one: Vec<usize>,
}

impl MarkedColumns {
    pub fn total(&self) -> usize {
        self.zero.len() + self.one.len()
    }

    /// All marked positions, ascending.
    pub fn all(&self) -> Vec<usize> {
        let mut all = Vec::with_capacity(self.total());
        all.extend_from_slice(&self.zero);
        all.extend_from_slice(&self.one);
        all.sort_unstable();
        all
    }
}

/// Positions where all coalition rows carry the same bit.
pub fn marked_columns(cb: &Codebook, coalition: &Coalition) -> MarkedColumns {
    let members = coalition.members();
    let first = &cb.rows[members[0]];
    let mut marked = MarkedColumns::default();
    'columns: for j in 0..cb.len() {
        let bit = first.get(j);
        for &i in &members[1..] {
            if cb.rows[i].get(j) != bit {
                continue 'columns;
            }
        }
        if bit {
            marked.one.push(j);
        } else {
            marked.zero.push(j);
        }
    }
    marked
}

/// Number of marked columns where the word disagrees with the coalition.
/// Unmarked columns always match some member, so these are all the mismatches.
pub fn marked_violations(cb: &Codebook, coalition: &Coalition, word: &CombinedWord) -> usize {
    assert_eq!(word.len(), cb.len(), "word length must match codebook");
    let members = coalition.members();
    let first = &cb.rows[members[0]];
    let mut violations = 0usize;
    'columns: for j in 0..cb.len() {
        let bit = first.get(j);
        for &i in &members[1..] {
            if cb.rows[i].get(j) != bit {
                continue 'columns;
            }
        }
        if word.get(j) != bit {
            violations += 1;
        }
    }
    violations
}

/// Word lies within a beta fraction of errors measured against the full length.
pub fn feasible(cb: &Codebook, coalition: &Coalition, word: &CombinedWord, beta: f64) -> bool {
    marked_violations(cb, coalition, word) <= violation_budget(beta, cb.len())
}

/// Word lies within a beta fraction of errors measured against the marked
/// columns only; vacuously true when no column is marked.
pub fn weakly_feasible(
    cb: &Codebook,
    coalition: &Coalition,
    word: &CombinedWord,
    beta: f64,
) -> bool {
    let marked = marked_columns(cb, coalition);
    let budget = violation_budget(beta, marked.total());
    let mut violations = 0usize;
    for &j in marked.zero.iter() {
        if word.get(j) {
            violations += 1;
        }
    }
    for &j in marked.one.iter() {
        if !word.get(j) {
            violations += 1;
        }
    }
    violations <= budget
}
