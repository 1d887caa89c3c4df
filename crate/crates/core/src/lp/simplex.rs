//! Revised primal simplex with an explicit dense basis inverse.
//!
//! Handles `max c.x, A x <= b, x >= 0` with `b >= 0`, so the all-slack basis
//! is feasible and no phase one is needed. `>=` rows with a nonpositive
//! right-hand side are negated into that form.
//!
//! Pricing is Dantzig's largest reduced cost. After a run of degenerate
//! pivots the solver switches to Bland's rule (smallest index entering and
//! leaving) until a pivot makes progress, which rules out cycling.

use super::{LinearProgram, LpError, LpSolver, PrimalSolution, Sense};

#[derive(Debug, Clone)]
pub struct DenseSimplex {
    /// Reduced costs at or below this count as nonpositive.
    pub optimality_tol: f64,
    /// Smallest pivot element accepted in the ratio test.
    pub pivot_tol: f64,
    /// Consecutive degenerate pivots before Bland's rule takes over.
    pub bland_after: usize,
    /// Hard cap on pivots; `None` picks `50 (m + n)`.
    pub max_iterations: Option<usize>,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self {
            optimality_tol: 1e-10,
            pivot_tol: 1e-9,
            bland_after: 25,
            max_iterations: None,
        }
    }
}

struct Tableau {
    m: usize,
    n: usize,
    /// Structural columns, sparse.
    columns: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    /// Variable basic in each row; slacks are `n + row`.
    basis: Vec<usize>,
    /// Row of each basic variable, `usize::MAX` if nonbasic.
    row_of: Vec<usize>,
    /// Row-major `m x m` basis inverse.
    binv: Vec<f64>,
    xb: Vec<f64>,
}

impl Tableau {
    fn from_lp(lp: &LinearProgram) -> Result<Self, LpError> {
        let m = lp.constraints.len();
        let n = lp.n_vars;
        let mut columns = vec![Vec::new(); n];
        let mut rhs = Vec::with_capacity(m);
        for (r, c) in lp.constraints.iter().enumerate() {
            let sign = match c.sense {
                Sense::Le => 1.0,
                Sense::Ge => -1.0,
            };
            let b = sign * c.rhs;
            if b < 0.0 {
                return Err(LpError::Unsupported(format!(
                    "row {r} makes the origin infeasible (rhs {})",
                    c.rhs
                )));
            }
            rhs.push(b);
            for &(v, a) in &c.terms {
                if a != 0.0 {
                    columns[v].push((r, sign * a));
                }
            }
        }
        // Merge duplicate terms within a row.
        for col in &mut columns {
            col.sort_by_key(|&(r, _)| r);
            col.dedup_by(|a, b| {
                if a.0 == b.0 {
                    b.1 += a.1;
                    true
                } else {
                    false
                }
            });
        }
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = 1.0;
        }
        let mut row_of = vec![usize::MAX; n + m];
        for r in 0..m {
            row_of[n + r] = r;
        }
        Ok(Self {
            m,
            n,
            columns,
            cost: lp.objective.clone(),
            xb: rhs.clone(),
            rhs,
            basis: (n..n + m).collect(),
            row_of,
            binv,
        })
    }

    fn cost_of(&self, var: usize) -> f64 {
        if var < self.n {
            self.cost[var]
        } else {
            0.0
        }
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &var) in self.basis.iter().enumerate() {
            let c = self.cost_of(var);
            if c != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yk, &bk) in y.iter_mut().zip(row) {
                    *yk += c * bk;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, var: usize, y: &[f64]) -> f64 {
        if var < self.n {
            self.cost[var]
                - self.columns[var]
                    .iter()
                    .map(|&(r, a)| y[r] * a)
                    .sum::<f64>()
        } else {
            -y[var - self.n]
        }
    }

    /// `B^{-1} A_var`.
    fn ftran(&self, var: usize, out: &mut [f64]) {
        let m = self.m;
        if var < self.n {
            let col = &self.columns[var];
            for (i, o) in out.iter_mut().enumerate() {
                let row = &self.binv[i * m..(i + 1) * m];
                *o = col.iter().map(|&(r, a)| row[r] * a).sum();
            }
        } else {
            let r = var - self.n;
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.binv[i * m + r];
            }
        }
    }

    fn pivot(&mut self, leave_row: usize, enter: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[leave_row];
        let theta = self.xb[leave_row] / piv;
        for (i, x) in self.xb.iter_mut().enumerate() {
            if i != leave_row && alpha[i] != 0.0 {
                *x -= theta * alpha[i];
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
        }
        self.xb[leave_row] = theta.max(0.0);

        let (before, rest) = self.binv.split_at_mut(leave_row * m);
        let (prow, after) = rest.split_at_mut(m);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        let nz: Vec<usize> = (0..m).filter(|&k| prow[k] != 0.0).collect();
        let update = |row: &mut [f64], a: f64| {
            for &k in &nz {
                row[k] -= a * prow[k];
            }
        };
        for (i, row) in before.chunks_exact_mut(m).enumerate() {
            if alpha[i] != 0.0 {
                update(row, alpha[i]);
            }
        }
        for (off, row) in after.chunks_exact_mut(m).enumerate() {
            let i = leave_row + 1 + off;
            if alpha[i] != 0.0 {
                update(row, alpha[i]);
            }
        }

        let leaving = self.basis[leave_row];
        self.row_of[leaving] = usize::MAX;
        self.row_of[enter] = leave_row;
        self.basis[leave_row] = enter;
    }

    /// Recomputes the basis inverse from scratch and refreshes the basic values.
    fn reinvert(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (r, &var) in self.basis.iter().enumerate() {
            if var < self.n {
                for &(i, v) in &self.columns[var] {
                    a[i * m + r] = v;
                }
            } else {
                a[(var - self.n) * m + r] = 1.0;
            }
        }
        let mut inv = vec![0.0; m * m];
        for r in 0..m {
            inv[r * m + r] = 1.0;
        }
        for col in 0..m {
            let p = (col..m)
                .max_by(|&x, &y| a[x * m + col].abs().total_cmp(&a[y * m + col].abs()))
                .expect("nonempty range");
            if a[p * m + col].abs() < 1e-12 {
                return Err(LpError::Numerical(
                    "singular basis during reinversion".into(),
                ));
            }
            if p != col {
                for k in 0..m {
                    a.swap(p * m + k, col * m + k);
                    inv.swap(p * m + k, col * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for i in 0..m {
                if i == col {
                    continue;
                }
                let f = a[i * m + col];
                if f != 0.0 {
                    for k in 0..m {
                        a[i * m + k] -= f * a[col * m + k];
                        inv[i * m + k] -= f * inv[col * m + k];
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.xb[i] = row
                .iter()
                .zip(&self.rhs)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .max(0.0);
        }
        Ok(())
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (r, &var) in self.basis.iter().enumerate() {
            if var < self.n {
                x[var] = self.xb[r];
            }
        }
        x
    }
}

impl DenseSimplex {
    fn run(&self, t: &mut Tableau, iterations: &mut usize, limit: usize) -> Result<(), LpError> {
        let mut alpha = vec![0.0; t.m];
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run >= self.bland_after;
            let y = t.duals();

            let mut enter = None;
            let mut best = self.optimality_tol;
            for var in 0..t.n + t.m {
                if t.row_of[var] != usize::MAX {
                    continue;
                }
                let d = t.reduced_cost(var, &y);
                if d > best {
                    enter = Some(var);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(enter) = enter else {
                return Ok(());
            };

            if *iterations >= limit {
                return Err(LpError::IterationLimit(limit));
            }
            *iterations += 1;

            t.ftran(enter, &mut alpha);
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..t.m {
                if alpha[i] <= self.pivot_tol {
                    continue;
                }
                let ratio = t.xb[i] / alpha[i];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                        if ratio < best_ratio && !tie {
                            true
                        } else if tie {
                            if bland {
                                t.basis[i] < t.basis[l]
                            } else {
                                alpha[i] > alpha[l]
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some(i);
                    best_ratio = best_ratio.min(ratio);
                }
            }
            let Some(leave) = leave else {
                return Err(LpError::Unbounded);
            };
            if best_ratio <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            t.pivot(leave, enter, &alpha);
        }
    }
}

impl LpSolver for DenseSimplex {
    fn solve(&self, lp: &LinearProgram) -> Result<PrimalSolution, LpError> {
        let mut t = Tableau::from_lp(lp)?;
        let limit = self.max_iterations.unwrap_or(50 * (t.m + t.n).max(1));
        let mut iterations = 0;
        self.run(&mut t, &mut iterations, limit)?;

        // Accumulated round-off in the inverse shows up as a primal residual;
        // refactor and re-optimize once if it does.
        let scale = t.rhs.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        let x = t.primal();
        if lp.residual(&x) > 1e-10 * scale {
            t.reinvert()?;
            self.run(&mut t, &mut iterations, limit)?;
        }
        let x = t.primal();
        Ok(PrimalSolution {
            objective: lp.objective_value(&x),
            x,
            iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(lp: &LinearProgram) -> PrimalSolution {
        DenseSimplex::default().solve(lp).unwrap()
    }

    #[test]
    fn textbook_two_variable_problem() {
        // max 3x + 5y; x <= 4; 2y <= 12; 3x + 2y <= 18 -> (2, 6), 36.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![3.0, 5.0];
        lp.push(vec![(0, 1.0)], Sense::Le, 4.0);
        lp.push(vec![(1, 2.0)], Sense::Le, 12.0);
        lp.push(vec![(0, 3.0), (1, 2.0)], Sense::Le, 18.0);
        let sol = solve(&lp);
        assert!((sol.objective - 36.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9);
        assert!((sol.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn ge_rows_with_zero_rhs_are_accepted() {
        // max s; x <= 2; x >= 4s -> s = 0.5.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![0.0, 1.0];
        lp.push(vec![(0, 1.0)], Sense::Le, 2.0);
        lp.push(vec![(0, 1.0), (1, -4.0)], Sense::Ge, 0.0);
        let sol = solve(&lp);
        assert!((sol.objective - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unbounded_is_detected() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 0.0];
        lp.push(vec![(0, -1.0), (1, 1.0)], Sense::Le, 1.0);
        assert_eq!(DenseSimplex::default().solve(&lp), Err(LpError::Unbounded));
    }

    #[test]
    fn infeasible_origin_is_unsupported() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        lp.push(vec![(0, 1.0)], Sense::Ge, 1.0);
        assert!(matches!(
            DenseSimplex::default().solve(&lp),
            Err(LpError::Unsupported(_))
        ));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example cycles under naive Dantzig pricing with lowest-index ties.
        let mut lp = LinearProgram::new(4);
        lp.objective = vec![0.75, -150.0, 0.02, -6.0];
        lp.push(
            vec![(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)],
            Sense::Le,
            0.0,
        );
        lp.push(
            vec![(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)],
            Sense::Le,
            0.0,
        );
        lp.push(vec![(2, 1.0)], Sense::Le, 1.0);
        let solver = DenseSimplex {
            bland_after: 1,
            ..DenseSimplex::default()
        };
        let sol = solver.solve(&lp).unwrap();
        assert!((sol.objective - 0.05).abs() < 1e-9);
    }

    #[test]
    fn reinversion_reproduces_inverse() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![3.0, 5.0];
        lp.push(vec![(0, 1.0)], Sense::Le, 4.0);
        lp.push(vec![(1, 2.0)], Sense::Le, 12.0);
        lp.push(vec![(0, 3.0), (1, 2.0)], Sense::Le, 18.0);
        let mut t = Tableau::from_lp(&lp).unwrap();
        let mut it = 0;
        DenseSimplex::default().run(&mut t, &mut it, 100).unwrap();
        let before = t.binv.clone();
        t.reinvert().unwrap();
        for (a, b) in before.iter().zip(&t.binv) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
