//! Databases of binary rows and counting queries over them.
//!
//! A counting query maps each row to {0,1}; its value on a database is the
//! fraction of rows mapped to 1, so answers are always multiples of 1/n.
//! Accuracy of an answer vector is judged per query with tolerance `alpha`,
//! allowing a `beta` fraction of queries (rounded down) to be violated.

use crate::bitrow::BitRow;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("attribute index {index} out of range for width {width}")]
    AttributeOutOfRange { index: usize, width: usize },
    #[error("row index {index} out of range for {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },
    #[error("database rows must share one width; row {row} has {got}, expected {want}")]
    RaggedRows { row: usize, got: usize, want: usize },
    #[error("database must contain at least one row")]
    Empty,
}

/// Database of n binary rows with a fixed attribute width.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DatabaseRepr", into = "DatabaseRepr")]
pub struct Database {
    width: usize,
    rows: Vec<BitRow>,
}

impl Database {
    pub fn new(rows: Vec<BitRow>) -> Result<Self, QueryError> {
        let width = rows.first().ok_or(QueryError::Empty)?.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(QueryError::RaggedRows {
                    row: i,
                    got: row.len(),
                    want: width,
                });
            }
        }
        Ok(Database { width, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &BitRow {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    /// Copy with row `i` replaced by the all-zeros junk row (size preserved).
    pub fn with_junk_row(&self, i: usize) -> Database {
        assert!(i < self.rows.len(), "junk row {i} out of range");
        let mut rows = self.rows.clone();
        rows[i] = BitRow::zeros(self.width);
        Database {
            width: self.width,
            rows,
        }
    }

    /// Number of ones in each column; `one_way_counts()[j] / n` is the exact
    /// answer to the j-th one-way marginal.
    pub fn one_way_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.width];
        for row in &self.rows {
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
struct DatabaseRepr {
    width: usize,
    rows: Vec<String>,
}

impl TryFrom<DatabaseRepr> for Database {
    type Error = String;
    fn try_from(repr: DatabaseRepr) -> Result<Self, String> {
        let rows = repr
            .rows
            .iter()
            .map(|hex| BitRow::from_hex(hex, repr.width))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        Database::new(rows).map_err(|e| e.to_string())
    }
}

impl From<Database> for DatabaseRepr {
    fn from(db: Database) -> Self {
        DatabaseRepr {
            width: db.width,
            rows: db.rows.iter().map(BitRow::to_hex).collect(),
        }
    }
}

/// Counting query: evaluates to 0 or 1 on each row.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountingQuery {
    /// Value of one attribute.
    OneWay { index: usize },
    /// Monotone conjunction over a set of attributes; empty set is constant 1.
    Marginal { indices: Vec<usize> },
    /// Membership of the row index in a fixed set; ignores row content.
    IndexedSubset { rows: Vec<usize> },
}

impl CountingQuery {
    pub fn one_way(index: usize) -> Self {
        CountingQuery::OneWay { index }
    }

    pub fn marginal(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        CountingQuery::Marginal { indices }
    }

    pub fn indexed_subset(mut rows: Vec<usize>) -> Self {
        rows.sort_unstable();
        rows.dedup();
        CountingQuery::IndexedSubset { rows }
    }

    pub fn validate(&self, n_rows: usize, width: usize) -> Result<(), QueryError> {
        match self {
            CountingQuery::OneWay { index } => {
                if *index >= width {
                    return Err(QueryError::AttributeOutOfRange {
                        index: *index,
                        width,
                    });
                }
            }
            CountingQuery::Marginal { indices } => {
                for &index in indices {
                    if index >= width {
                        return Err(QueryError::AttributeOutOfRange { index, width });
                    }
                }
            }
            CountingQuery::IndexedSubset { rows } => {
                for &index in rows {
                    if index >= n_rows {
                        return Err(QueryError::RowOutOfRange {
                            index,
                            rows: n_rows,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Query value on one row. The row index matters only for indexed-subset
    /// queries; the row content only for the attribute-based kinds.
    pub fn evaluate_row(&self, row_index: usize, row: &BitRow) -> bool {
        match self {
            CountingQuery::OneWay { index } => row.get(*index),
            CountingQuery::Marginal { indices } => indices.iter().all(|&j| row.get(j)),
            CountingQuery::IndexedSubset { rows } => rows.binary_search(&row_index).is_ok(),
        }
    }
}

/// Exact query answer: the fraction of rows satisfying the query.
pub fn eval_query(query: &CountingQuery, db: &Database) -> Result<f64, QueryError> {
    query.validate(db.n_rows(), db.width())?;
    let count = db
        .rows()
        .iter()
        .enumerate()
        .filter(|(i, row)| query.evaluate_row(*i, row))
        .count();
    Ok(count as f64 / db.n_rows() as f64)
}

/// Correlation (1/n) * sum_i q(x_i) * s_i between a query and a real vector
/// indexed by rows.
pub fn correlation(query: &CountingQuery, db: &Database, s: &[f64]) -> Result<f64, QueryError> {
    assert_eq!(s.len(), db.n_rows(), "weight vector length mismatch");
    query.validate(db.n_rows(), db.width())?;
    let sum: f64 = db
        .rows()
        .iter()
        .enumerate()
        .filter(|(i, row)| query.evaluate_row(*i, row))
        .map(|(i, _)| s[i])
        .sum();
    Ok(sum / db.n_rows() as f64)
}

/// All one-way marginals of a given width, in attribute order.
pub fn one_way_family(width: usize) -> Vec<CountingQuery> {
    (0..width).map(CountingQuery::one_way).collect()
}

/// Number of violated queries allowed at fraction `beta`: floor(beta * count).
pub fn violation_budget(beta: f64, count: usize) -> usize {
    assert!(beta >= 0.0, "beta must be nonnegative");
    (beta * count as f64).floor() as usize
}

/// Whether `answers` is (alpha, beta)-accurate for the query family on `db`:
/// all but floor(beta * |Q|) answers are within alpha of the exact value.
/// The boundary |a - q(D)| = alpha counts as accurate.
pub fn is_accurate(
    answers: &[f64],
    db: &Database,
    queries: &[CountingQuery],
    alpha: f64,
    beta: f64,
) -> Result<bool, QueryError> {
    assert_eq!(
        answers.len(),
        queries.len(),
        "answer vector length must match query family"
    );
    let mut violations = 0usize;
    for (a, q) in answers.iter().zip(queries) {
        let exact = eval_query(q, db)?;
        if (a - exact).abs() > alpha {
            violations += 1;
        }
    }
    Ok(violations <= violation_budget(beta, queries.len()))
}
