//! Dense two-phase tableau simplex for small linear programs.
//!
//! Minimizes c.x over x >= 0 subject to rows of the form a.x {<=,=,>=} b.
//! Phase 1 drives artificial variables out with a Big-M-free auxiliary
//! objective; phase 2 optimizes the real one. Entering columns follow
//! Dantzig's rule (most negative reduced cost) until a run of degenerate
//! pivots, then switch to Bland's rule, which cannot cycle. The solver is
//! deliberately dense and simple: reconstruction instances here are a few
//! thousand rows at most, and reproducibility matters more than speed.

use serde::{Deserialize, Serialize};

/// Comparisons allowed in a constraint row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Constraint { coeffs, relation, rhs }
    }
}

/// Minimize `objective . x` subject to `constraints`, x >= 0 componentwise.
/// Upper bounds must be stated as explicit rows.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn feasibility(n_vars: usize, constraints: Vec<Constraint>) -> Self {
        LinearProgram {
            n_vars,
            objective: vec![0.0; n_vars],
            constraints,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot budget exhausted; `x` holds the best feasible incumbent.
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural variable values (zeros when infeasible).
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

const EPS: f64 = 1e-9;
/// Dual feasibility tolerance: a column enters only if its reduced cost is
/// below -DUAL_EPS. Tighter thresholds chase accumulated round-off near the
/// optimum and stall instead of terminating.
const DUAL_EPS: f64 = 1e-7;
/// Stability floor for pivot elements. Coefficients here are O(1), so any
/// smaller entry is round-off noise, and dividing by it wrecks the tableau.
const PIVOT_MIN: f64 = 1e-7;
/// Consecutive zero-progress pivots tolerated before switching to Bland.
const DEGENERATE_STREAK: usize = 50;

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced costs and objective value for the active phase.
    cbar: Vec<f64>,
    z: f64,
    /// Phase-2 reduced costs carried through phase-1 pivots.
    cbar_next: Option<(Vec<f64>, f64)>,
    /// Columns barred from entering (artificials, permanently after phase 1).
    banned: Vec<bool>,
    n_structural: usize,
    iterations: usize,
    degenerate_streak: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col];
        debug_assert!(pivot.abs() > PIVOT_MIN, "pivot too small");
        let inv = 1.0 / pivot;
        for v in self.rows[row].iter_mut() {
            *v *= inv;
        }
        self.rhs[row] *= inv;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row];
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col];
            if factor == 0.0 {
                continue;
            }
            for (v, p) in self.rows[r].iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.rows[r][col] = 0.0;
            self.rhs[r] -= factor * pivot_rhs;
            if self.rhs[r].abs() < 1e-12 {
                self.rhs[r] = 0.0;
            }
        }
        let factor = self.cbar[col];
        if factor != 0.0 {
            for (v, p) in self.cbar.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.cbar[col] = 0.0;
            self.z += factor * pivot_rhs;
        }
        if let Some((next, znext)) = self.cbar_next.as_mut() {
            let factor = next[col];
            if factor != 0.0 {
                for (v, p) in next.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                next[col] = 0.0;
                *znext += factor * pivot_rhs;
            }
        }
        self.basis[row] = col;
        self.iterations += 1;
        if pivot_rhs.abs() <= EPS {
            self.degenerate_streak += 1;
        } else {
            self.degenerate_streak = 0;
        }
    }

    fn entering_column(&self) -> Option<usize> {
        if self.degenerate_streak >= DEGENERATE_STREAK {
            // Bland: lowest-index improving column.
            return (0..self.cbar.len())
                .find(|&j| !self.banned[j] && self.cbar[j] < -DUAL_EPS);
        }
        let mut best = None;
        let mut best_val = -DUAL_EPS;
        for j in 0..self.cbar.len() {
            if !self.banned[j] && self.cbar[j] < best_val {
                best_val = self.cbar[j];
                best = Some(j);
            }
        }
        best
    }

    fn leaving_row(&self, col: usize) -> Option<usize> {
        let bland = self.degenerate_streak >= DEGENERATE_STREAK;
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.rows.len() {
            let a = self.rows[r][col];
            if a > PIVOT_MIN {
                let ratio = self.rhs[r] / a;
                match best {
                    Some((_, b)) if ratio > b + 1e-12 => {}
                    // Ties: Bland needs the smallest basic variable index to
                    // guarantee termination; otherwise the largest pivot
                    // element keeps the tableau well scaled.
                    Some((br, b)) if (ratio - b).abs() <= 1e-12 => {
                        if bland {
                            if self.basis[r] < self.basis[br] {
                                best = Some((r, ratio));
                            }
                        } else if a > self.rows[br][col] {
                            best = Some((r, ratio));
                        }
                    }
                    _ => best = Some((r, ratio)),
                }
            }
        }
        best.map(|(r, _)| r)
    }

    /// Run simplex on the active objective. Returns None when optimal,
    /// otherwise the terminal status.
    fn optimize(&mut self, max_iterations: usize) -> Option<LpStatus> {
        loop {
            if self.iterations >= max_iterations {
                return Some(LpStatus::IterationLimit);
            }
            let col = self.entering_column()?;
            let Some(row) = self.leaving_row(col) else {
                return Some(LpStatus::Unbounded);
            };
            self.pivot(row, col);
        }
    }

    fn structural_values(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_structural];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n_structural {
                x[b] = self.rhs[r];
            }
        }
        x
    }
}

/// Solve with a pivot budget scaled to the instance size.
pub fn solve(lp: &LinearProgram) -> LpSolution {
    let m = lp.constraints.len();
    let cols = lp.n_vars + 2 * m;
    solve_with_limit(lp, 2000 + 20 * (m + cols))
}

pub fn solve_with_limit(lp: &LinearProgram, max_iterations: usize) -> LpSolution {
    assert_eq!(lp.objective.len(), lp.n_vars, "objective length mismatch");
    for c in &lp.constraints {
        assert_eq!(c.coeffs.len(), lp.n_vars, "constraint width mismatch");
    }

    let m = lp.constraints.len();
    let n = lp.n_vars;
    // Column layout: structural | one slack/surplus per row | one artificial
    // per row that needs one. Unused columns stay all-zero and banned.
    let total = n + 2 * m;
    let mut rows = vec![vec![0.0; total]; m];
    let mut rhs = vec![0.0; m];
    let mut basis = vec![0usize; m];
    let mut banned = vec![false; total];
    let mut artificial = vec![false; total];

    for (i, c) in lp.constraints.iter().enumerate() {
        let flip = c.rhs < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        for (j, &a) in c.coeffs.iter().enumerate() {
            rows[i][j] = sign * a;
        }
        rhs[i] = sign * c.rhs;
        let relation = match (c.relation, flip) {
            (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
            (Relation::Ge, false) | (Relation::Le, true) => Relation::Ge,
            (Relation::Eq, _) => Relation::Eq,
        };
        let slack = n + i;
        let art = n + m + i;
        match relation {
            Relation::Le => {
                rows[i][slack] = 1.0;
                basis[i] = slack;
            }
            Relation::Ge => {
                rows[i][slack] = -1.0;
                rows[i][art] = 1.0;
                basis[i] = art;
                artificial[art] = true;
            }
            Relation::Eq => {
                rows[i][art] = 1.0;
                basis[i] = art;
                artificial[art] = true;
            }
        }
    }
    for j in 0..total {
        if j >= n && !artificial[j] && rows.iter().all(|r| r[j] == 0.0) {
            banned[j] = true; // unused slack column slot
        }
    }

    // Phase-1 reduced costs: cost 1 on artificials, priced out over the rows
    // where an artificial starts basic.
    let mut cbar1 = vec![0.0; total];
    for (j, &a) in artificial.iter().enumerate() {
        if a {
            cbar1[j] = 1.0;
        }
    }
    let mut z1 = 0.0;
    for i in 0..m {
        if artificial[basis[i]] {
            for j in 0..total {
                cbar1[j] -= rows[i][j];
            }
            z1 += rhs[i];
        }
    }
    // z tracks the current objective with sign convention z = c_B . x_B.
    let mut cbar2 = vec![0.0; total];
    cbar2[..n].copy_from_slice(&lp.objective);

    let mut t = Tableau {
        rows,
        rhs,
        basis,
        cbar: cbar1,
        z: z1,
        cbar_next: Some((cbar2, 0.0)),
        banned,
        n_structural: n,
        iterations: 0,
        degenerate_streak: 0,
    };
    // z holds c_B . x_B for the active objective; phase 1 drives it to 0.
    let need_phase1 = t.basis.iter().any(|&b| artificial[b]);
    if need_phase1 {
        if let Some(status) = t.optimize(max_iterations) {
            return LpSolution {
                // A sum of nonnegative artificials cannot be unbounded below;
                // if numerics claim otherwise, report the budget as spent.
                status: if status == LpStatus::Unbounded {
                    debug_assert!(false, "phase-1 objective is bounded");
                    LpStatus::IterationLimit
                } else {
                    status
                },
                x: t.structural_values(),
                objective: f64::NAN,
                iterations: t.iterations,
            };
        }
        // Judge feasibility from the artificials still in the basis, not the
        // incrementally updated z, which drifts over long pivot runs.
        let leftover: f64 = t
            .basis
            .iter()
            .zip(&t.rhs)
            .filter(|(&b, _)| artificial[b])
            .map(|(_, &r)| r.max(0.0))
            .sum();
        if leftover > 1e-7 {
            return LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                objective: f64::NAN,
                iterations: t.iterations,
            };
        }
        // Kick lingering artificials out of the basis with degenerate pivots;
        // rows that offer no pivot are redundant and get dropped.
        let mut r = 0;
        while r < t.rows.len() {
            if artificial[t.basis[r]] {
                let col = (0..n + m).find(|&j| !artificial[j] && t.rows[r][j].abs() > PIVOT_MIN);
                match col {
                    Some(c) => t.pivot(r, c),
                    None => {
                        t.rows.remove(r);
                        t.rhs.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    for (j, &a) in artificial.iter().enumerate() {
        if a {
            t.banned[j] = true;
        }
    }
    let (cbar2, z2) = t.cbar_next.take().expect("phase-2 costs present");
    t.cbar = cbar2;
    t.z = z2;
    t.degenerate_streak = 0;

    let status = match t.optimize(max_iterations) {
        None => LpStatus::Optimal,
        Some(s) => s,
    };
    // Report the objective evaluated at the returned point rather than the
    // pivot-to-pivot running value, which accumulates round-off.
    let x = t.structural_values();
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpSolution {
        status,
        x,
        objective,
        iterations: t.iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn le(coeffs: &[f64], rhs: f64) -> Constraint {
        Constraint::new(coeffs.to_vec(), Relation::Le, rhs)
    }
    fn ge(coeffs: &[f64], rhs: f64) -> Constraint {
        Constraint::new(coeffs.to_vec(), Relation::Ge, rhs)
    }
    fn eq(coeffs: &[f64], rhs: f64) -> Constraint {
        Constraint::new(coeffs.to_vec(), Relation::Eq, rhs)
    }

    #[test]
    fn simple_maximization_as_min() {
        // max x + y over x + y <= 1 ==> min -(x + y) = -1.
        let lp = LinearProgram {
            n_vars: 2,
            objective: vec![-1.0, -1.0],
            constraints: vec![le(&[1.0, 1.0], 1.0)],
        };
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-9);
        assert!((sol.x[0] + sol.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fractional_vertex() {
        // min -2x - 3y s.t. x + 2y <= 4, 2x + y <= 5: optimum (2, 1), obj -7.
        let lp = LinearProgram {
            n_vars: 2,
            objective: vec![-2.0, -3.0],
            constraints: vec![le(&[1.0, 2.0], 4.0), le(&[2.0, 1.0], 5.0)],
        };
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 7.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9);
        assert!((sol.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_system() {
        // x <= -1 with x >= 0 has no solution.
        let lp = LinearProgram::feasibility(1, vec![le(&[1.0], -1.0)]);
        assert_eq!(solve(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded_objective() {
        let lp = LinearProgram {
            n_vars: 1,
            objective: vec![-1.0],
            constraints: vec![ge(&[1.0], 1.0)],
        };
        assert_eq!(solve(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_system_unique_point() {
        // x + y = 1, x - y = 0 has the single solution (1/2, 1/2).
        let lp = LinearProgram::feasibility(2, vec![eq(&[1.0, 1.0], 1.0), eq(&[1.0, -1.0], 0.0)]);
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 0.5).abs() < 1e-9);
        assert!((sol.x[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn redundant_equality_rows_are_dropped() {
        let lp = LinearProgram {
            n_vars: 2,
            objective: vec![1.0, 1.0],
            constraints: vec![
                eq(&[1.0, 1.0], 1.0),
                eq(&[1.0, 1.0], 1.0),
                eq(&[2.0, 2.0], 2.0),
            ],
        };
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixed_relations() {
        // min x + y s.t. x + y = 2, x >= 0.5: objective 2.
        let lp = LinearProgram {
            n_vars: 2,
            objective: vec![1.0, 1.0],
            constraints: vec![eq(&[1.0, 1.0], 2.0), ge(&[1.0, 0.0], 0.5)],
        };
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert!(sol.x[0] >= 0.5 - 1e-9);
    }

    #[test]
    fn negative_rhs_rows_are_normalized() {
        // -x <= -3 is x >= 3.
        let lp = LinearProgram {
            n_vars: 1,
            objective: vec![1.0],
            constraints: vec![le(&[-1.0], -3.0)],
        };
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn iteration_limit_reports_incumbent() {
        let lp = LinearProgram {
            n_vars: 2,
            objective: vec![-2.0, -3.0],
            constraints: vec![le(&[1.0, 2.0], 4.0), le(&[2.0, 1.0], 5.0)],
        };
        let sol = solve_with_limit(&lp, 1);
        assert_eq!(sol.status, LpStatus::IterationLimit);
        assert_eq!(sol.iterations, 1);
        // One pivot from the slack basis is still primal feasible.
        assert!(sol.x.iter().all(|&v| v >= -1e-9));
    }

    #[test]
    fn empty_program_is_trivially_optimal() {
        let lp = LinearProgram::feasibility(2, vec![]);
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.x, vec![0.0, 0.0]);
    }

    #[test]
    fn degenerate_ties_still_terminate() {
        // Klee-Minty-flavored box with duplicated rows forces degenerate
        // pivots; termination and the right optimum are what matter.
        let lp = LinearProgram {
            n_vars: 3,
            objective: vec![-100.0, -10.0, -1.0],
            constraints: vec![
                le(&[1.0, 0.0, 0.0], 1.0),
                le(&[1.0, 0.0, 0.0], 1.0),
                le(&[20.0, 1.0, 0.0], 100.0),
                le(&[20.0, 1.0, 0.0], 100.0),
                le(&[200.0, 20.0, 1.0], 10000.0),
            ],
        };
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.x.iter().all(|&v| v >= -1e-9));
        // Optimum of the Klee-Minty cube is the far vertex (0, 0, 10000).
        assert!((sol.objective + 10000.0).abs() < 1e-6, "objective {}", sol.objective);
    }
}
