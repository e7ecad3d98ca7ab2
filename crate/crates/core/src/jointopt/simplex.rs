//! Dense two-phase simplex for the small linear programs that arise in
//! degree-distribution optimization (tens of variables, at most a few
//! hundred rows). Maximizes `c·x` subject to `A_eq x = b_eq`,
//! `A_ub x ≤ b_ub`, `x ≥ 0`.
//!
//! Deterministic: Dantzig pricing with lowest-index tie-breaking, switching
//! to Bland's rule when an iteration budget suggests cycling.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub num_vars: usize,
    /// Coefficients of the maximization objective, length `num_vars`.
    pub objective: Vec<f64>,
    /// Equality rows `(a, b)`: `a·x = b`.
    pub eq: Vec<(Vec<f64>, f64)>,
    /// Inequality rows `(a, b)`: `a·x ≤ b`.
    pub ub: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

const PIVOT_EPS: f64 = 1e-10;
const FEAS_EPS: f64 = 1e-9;

struct Tableau {
    /// `rows × cols` coefficients; the last column is the right-hand side.
    a: Vec<Vec<f64>>,
    /// Objective row (reduced costs), length `cols`; maximization.
    obj: Vec<f64>,
    basis: Vec<usize>,
    rows: usize,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.a[row][col];
        let inv = 1.0 / piv;
        for v in self.a[row].iter_mut() {
            *v *= inv;
        }
        for r in 0..self.rows {
            if r == row {
                continue;
            }
            let factor = self.a[r][col];
            if factor != 0.0 {
                for c in 0..self.cols {
                    self.a[r][c] -= factor * self.a[row][c];
                }
                self.a[r][col] = 0.0;
            }
        }
        let factor = self.obj[col];
        if factor != 0.0 {
            for c in 0..self.cols {
                self.obj[c] -= factor * self.a[row][c];
            }
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Run simplex iterations on the current objective row until optimal or
    /// unbounded. `allowed` limits the entering columns (used to exclude
    /// artificials in phase 2). Returns `Ok(true)` on optimal, `Ok(false)`
    /// on unbounded.
    fn iterate(&mut self, allowed: usize) -> Result<bool> {
        let budget = 200 * (self.rows + allowed).max(16);
        for iter in 0..budget {
            let bland = iter > budget / 2;
            // Entering column: most positive reduced cost (Dantzig), or the
            // lowest-index positive one under Bland's rule.
            let mut enter = None;
            if bland {
                for c in 0..allowed {
                    if self.obj[c] > PIVOT_EPS {
                        enter = Some(c);
                        break;
                    }
                }
            } else {
                let mut best = PIVOT_EPS;
                for c in 0..allowed {
                    if self.obj[c] > best {
                        best = self.obj[c];
                        enter = Some(c);
                    }
                }
            }
            let Some(col) = enter else { return Ok(true) };
            // Ratio test over rows with positive pivot coefficients.
            let rhs = self.cols - 1;
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.a[r][col];
                if a > PIVOT_EPS {
                    let ratio = self.a[r][rhs] / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-12
                                || ((ratio - lratio).abs() <= 1e-12
                                    && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else { return Ok(false) };
            self.pivot(row, col);
        }
        Err(Error::numerical("simplex iteration budget exhausted"))
    }
}

/// Solve the linear program. Variables are implicitly nonnegative.
pub fn solve(p: &LpProblem) -> Result<LpOutcome> {
    let n = p.num_vars;
    if p.objective.len() != n {
        return Err(Error::validation("objective length does not match num_vars"));
    }
    for (a, _) in p.eq.iter().chain(p.ub.iter()) {
        if a.len() != n {
            return Err(Error::validation("constraint row length does not match num_vars"));
        }
    }
    let m = p.eq.len() + p.ub.len();
    let num_slack = p.ub.len();
    // Column layout: [vars | slacks | artificials | rhs].
    // Artificials are added for every equality row and for any inequality
    // row whose slack cannot start basic (negative right-hand side).
    let mut rows_a: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    let mut slack_sign: Vec<f64> = Vec::with_capacity(m);
    for (a, b) in &p.eq {
        rows_a.push(a.clone());
        rhs.push(*b);
        slack_sign.push(0.0);
    }
    for (a, b) in &p.ub {
        rows_a.push(a.clone());
        rhs.push(*b);
        slack_sign.push(1.0);
    }
    // Normalize to nonnegative rhs.
    for r in 0..m {
        if rhs[r] < 0.0 {
            rhs[r] = -rhs[r];
            slack_sign[r] = -slack_sign[r];
            for v in rows_a[r].iter_mut() {
                *v = -*v;
            }
        }
    }
    let needs_artificial: Vec<bool> = slack_sign.iter().map(|&s| s <= 0.0).collect();
    let num_art: usize = needs_artificial.iter().filter(|&&x| x).count();
    let cols = n + num_slack + num_art + 1;
    let mut t = Tableau {
        a: vec![vec![0.0; cols]; m],
        obj: vec![0.0; cols],
        basis: vec![0; m],
        rows: m,
        cols,
    };
    let mut slack_idx = 0usize;
    let mut art_idx = 0usize;
    for r in 0..m {
        t.a[r][..n].copy_from_slice(&rows_a[r]);
        t.a[r][cols - 1] = rhs[r];
        if slack_sign[r] != 0.0 {
            t.a[r][n + slack_idx] = slack_sign[r];
        }
        if needs_artificial[r] {
            let c = n + num_slack + art_idx;
            t.a[r][c] = 1.0;
            t.basis[r] = c;
            art_idx += 1;
        } else {
            t.basis[r] = n + slack_idx;
        }
        if r >= p.eq.len() {
            slack_idx += 1;
        }
    }

    if num_art > 0 {
        // Phase 1: maximize -Σ artificials, starting from the artificial
        // basis. The objective row must be expressed in terms of the
        // current basis: add each artificial row into it.
        for r in 0..m {
            if needs_artificial[r] {
                for c in 0..cols {
                    t.obj[c] += t.a[r][c];
                }
            }
        }
        for c in n + num_slack..cols - 1 {
            t.obj[c] = 0.0;
        }
        if !t.iterate(n + num_slack)? {
            return Err(Error::numerical("phase-1 objective unbounded"));
        }
        let scale = rhs.iter().fold(1.0f64, |acc, &b| acc.max(b.abs()));
        if t.obj[cols - 1].abs() > FEAS_EPS * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive any artificial still in the basis out of it (or drop the
        // row as redundant by leaving it; its rhs is zero).
        for r in 0..m {
            if t.basis[r] >= n + num_slack {
                if let Some(c) = (0..n + num_slack).find(|&c| t.a[r][c].abs() > PIVOT_EPS) {
                    t.pivot(r, c);
                }
            }
        }
    }

    // Phase 2: the real objective, reduced by the current basis.
    for c in 0..cols {
        t.obj[c] = 0.0;
    }
    t.obj[..n].copy_from_slice(&p.objective);
    for r in 0..m {
        let b = t.basis[r];
        if b < n {
            let factor = t.obj[b];
            if factor != 0.0 {
                for c in 0..cols {
                    t.obj[c] -= factor * t.a[r][c];
                }
                t.obj[b] = 0.0;
            }
        }
    }
    if !t.iterate(n + num_slack)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.a[r][cols - 1].max(0.0);
        }
    }
    let value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal { x, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(o: LpOutcome) -> (Vec<f64>, f64) {
        match o {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn two_variable_vertex() {
        // max x+y s.t. x+2y ≤ 4, 3x+y ≤ 6 → (8/5, 6/5), value 14/5.
        let p = LpProblem {
            num_vars: 2,
            objective: vec![1.0, 1.0],
            eq: vec![],
            ub: vec![(vec![1.0, 2.0], 4.0), (vec![3.0, 1.0], 6.0)],
        };
        let (x, v) = optimal(solve(&p).unwrap());
        assert!((x[0] - 1.6).abs() < 1e-9);
        assert!((x[1] - 1.2).abs() < 1e-9);
        assert!((v - 2.8).abs() < 1e-9);
    }

    #[test]
    fn equality_and_bound() {
        // max x s.t. x + y = 1, x ≤ 0.6 → x = 0.6, y = 0.4.
        let p = LpProblem {
            num_vars: 2,
            objective: vec![1.0, 0.0],
            eq: vec![(vec![1.0, 1.0], 1.0)],
            ub: vec![(vec![1.0, 0.0], 0.6)],
        };
        let (x, v) = optimal(solve(&p).unwrap());
        assert!((x[0] - 0.6).abs() < 1e-9);
        assert!((x[1] - 0.4).abs() < 1e-9);
        assert!((v - 0.6).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let p = LpProblem {
            num_vars: 2,
            objective: vec![1.0, 0.0],
            eq: vec![(vec![1.0, 1.0], 1.0)],
            ub: vec![(vec![1.0, 1.0], 0.5)],
        };
        assert_eq!(solve(&p).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let p = LpProblem {
            num_vars: 2,
            objective: vec![1.0, 0.0],
            eq: vec![],
            ub: vec![(vec![-1.0, 1.0], 1.0)],
        };
        assert_eq!(solve(&p).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_cycling_candidate_terminates() {
        // Beale's classic degenerate instance; optimum 0.05 at (0.04, 0, 1, 0).
        let p = LpProblem {
            num_vars: 4,
            objective: vec![0.75, -150.0, 0.02, -6.0],
            eq: vec![],
            ub: vec![
                (vec![0.25, -60.0, -0.04, 9.0], 0.0),
                (vec![0.5, -90.0, -0.02, 3.0], 0.0),
                (vec![0.0, 0.0, 1.0, 0.0], 1.0),
            ],
        };
        let (x, v) = optimal(solve(&p).unwrap());
        assert!((v - 0.05).abs() < 1e-9, "value {v}, x {x:?}");
    }

    #[test]
    fn negative_rhs_inequality() {
        // x ≥ 2 written as -x ≤ -2, minimize x (max -x) → x = 2.
        let p = LpProblem {
            num_vars: 1,
            objective: vec![-1.0],
            eq: vec![],
            ub: vec![(vec![-1.0], -2.0)],
        };
        let (x, v) = optimal(solve(&p).unwrap());
        assert!((x[0] - 2.0).abs() < 1e-9);
        assert!((v + 2.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equality_rows() {
        // Duplicated equality must not break phase 1.
        let p = LpProblem {
            num_vars: 2,
            objective: vec![0.0, 1.0],
            eq: vec![(vec![1.0, 1.0], 1.0), (vec![2.0, 2.0], 2.0)],
            ub: vec![],
        };
        let (x, _) = optimal(solve(&p).unwrap());
        assert!((x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn margin_shape_problem() {
        // A miniature of the degree-optimization LP: maximize the margin t
        // subject to mass and moment equalities and two envelope rows.
        // Hand-solved optimum: binding rows t = 0.25 with x = (0.5, 0.5).
        let p = LpProblem {
            num_vars: 3, // x1, x2, t
            objective: vec![0.0, 0.0, 1.0],
            eq: vec![
                (vec![1.0, 1.0, 0.0], 1.0),
                (vec![0.5, 0.25, 0.0], 0.375),
            ],
            ub: vec![
                (vec![0.5, 0.25, 0.5], 0.5),
                (vec![0.25, 0.5, 0.5], 0.5),
                (vec![0.0, 0.0, 1.0], 0.5),
            ],
        };
        let (x, v) = optimal(solve(&p).unwrap());
        assert!((x[0] - 0.5).abs() < 1e-9);
        assert!((x[1] - 0.5).abs() < 1e-9);
        assert!((v - 0.25).abs() < 1e-9);
    }

    #[test]
    fn deterministic_solution() {
        let p = LpProblem {
            num_vars: 3,
            objective: vec![1.0, 2.0, 0.5],
            eq: vec![(vec![1.0, 1.0, 1.0], 1.0)],
            ub: vec![(vec![1.0, 0.0, 0.0], 0.7), (vec![0.0, 1.0, 0.0], 0.4)],
        };
        let a = optimal(solve(&p).unwrap());
        let b = optimal(solve(&p).unwrap());
        assert_eq!(a.0, b.0);
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }
}
