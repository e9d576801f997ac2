//! Small dense two-phase simplex solver.
//!
//! Problems are `maximize c·x` subject to rows `a·x {≤, =, ≥} b` and `x ≥ 0`.
//! Every optimal solution carries dual values recovered from the final
//! tableau; the solver refuses to report an optimum whose duality gap or dual
//! infeasibility exceeds the configured tolerance.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
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

/// `maximize objective·x` over `x ≥ 0` subject to `constraints`.
#[derive(Clone, Debug, Default)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    pub pivot_tol: f64,
    /// Phase-one residual above which the problem is declared infeasible.
    pub feasibility_tol: f64,
    /// Relative duality-gap and dual-infeasibility tolerance.
    pub gap_tol: f64,
    pub max_pivots: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            pivot_tol: 1e-11,
            feasibility_tol: 1e-9,
            gap_tol: 1e-9,
            max_pivots: 50_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One dual value per constraint, in the original row orientation.
    pub duals: Vec<f64>,
    pub duality_gap: f64,
    pub pivots: usize,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.num_vars());
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution> {
        self.solve_with(&SimplexOptions::default())
    }

    pub fn solve_with(&self, opts: &SimplexOptions) -> Result<LpSolution> {
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars() {
                return Err(Error::Solver(format!(
                    "row {i} has {} coefficients, expected {}",
                    c.coeffs.len(),
                    self.num_vars()
                )));
            }
        }
        Tableau::build(self).solve(self, opts)
    }
}

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n: usize,
    cols: usize,
    /// Column holding the initial identity entry of each row.
    identity_col: Vec<usize>,
    /// Rows whose sign was flipped to make the right-hand side nonnegative.
    flipped: Vec<bool>,
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LpProblem) -> Self {
        let n = lp.num_vars();
        let m = lp.constraints.len();
        let mut rel = Vec::with_capacity(m);
        let mut flipped = Vec::with_capacity(m);
        for c in &lp.constraints {
            let flip = c.rhs < 0.0;
            flipped.push(flip);
            rel.push(match (c.relation, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            });
        }
        let slacks = rel.iter().filter(|r| **r != Relation::Eq).count();
        let artificials = rel.iter().filter(|r| **r != Relation::Le).count();
        let artificial_start = n + slacks;
        let cols = artificial_start + artificials;

        let mut t = vec![vec![0.0; cols + 1]; m];
        let mut basis = vec![0; m];
        let mut identity_col = vec![0; m];
        let (mut s, mut a) = (n, artificial_start);
        for (i, c) in lp.constraints.iter().enumerate() {
            let sgn = if flipped[i] { -1.0 } else { 1.0 };
            for (dst, &v) in t[i].iter_mut().zip(c.coeffs.iter()) {
                *dst = sgn * v;
            }
            t[i][cols] = sgn * c.rhs;
            match rel[i] {
                Relation::Le => {
                    t[i][s] = 1.0;
                    basis[i] = s;
                    identity_col[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    t[i][s] = -1.0;
                    s += 1;
                    t[i][a] = 1.0;
                    basis[i] = a;
                    identity_col[i] = a;
                    a += 1;
                }
                Relation::Eq => {
                    t[i][a] = 1.0;
                    basis[i] = a;
                    identity_col[i] = a;
                    a += 1;
                }
            }
        }
        Tableau {
            t,
            basis,
            n,
            cols,
            identity_col,
            flipped,
            artificial_start,
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pv = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= pv;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (x, p) in r.iter_mut().zip(pivot_row.iter()) {
                    *x -= f * p;
                }
            }
        }
        self.basis[row] = col;
    }

    fn reduced_cost(&self, cost: &[f64], col: usize) -> f64 {
        let mut r = cost[col];
        for (i, &b) in self.basis.iter().enumerate() {
            r -= cost[b] * self.t[i][col];
        }
        r
    }

    /// Maximizes `cost` from the current basic feasible solution.
    /// Columns at or beyond `allowed` never enter.
    fn optimize(&mut self, cost: &[f64], allowed: usize, opts: &SimplexOptions, pivots: &mut usize) -> Result<()> {
        let mut degenerate_run = 0usize;
        loop {
            if *pivots >= opts.max_pivots {
                return Err(Error::Solver(format!("pivot limit {} reached", opts.max_pivots)));
            }
            let bland = degenerate_run > 50;
            let mut enter = None;
            let mut best = opts.pivot_tol;
            for col in 0..allowed {
                let r = self.reduced_cost(cost, col);
                if r > best {
                    enter = Some(col);
                    if bland {
                        break;
                    }
                    best = r;
                }
            }
            let Some(col) = enter else { return Ok(()) };

            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = row[col];
                if a > opts.pivot_tol {
                    let ratio = row[self.cols] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((row, ratio)) = leave else {
                return Err(Error::Solver("problem is unbounded".into()));
            };
            degenerate_run = if ratio.abs() < 1e-14 { degenerate_run + 1 } else { 0 };
            self.pivot(row, col);
            *pivots += 1;
        }
    }

    fn solve(mut self, lp: &LpProblem, opts: &SimplexOptions) -> Result<LpSolution> {
        let mut pivots = 0;
        if self.artificial_start < self.cols {
            let mut phase1 = vec![0.0; self.cols];
            for c in phase1.iter_mut().skip(self.artificial_start) {
                *c = -1.0;
            }
            self.optimize(&phase1, self.cols, opts, &mut pivots)?;
            let residual: f64 = self
                .basis
                .iter()
                .enumerate()
                .filter(|(_, &b)| b >= self.artificial_start)
                .map(|(i, _)| self.t[i][self.cols])
                .sum();
            if residual > opts.feasibility_tol {
                return Err(Error::Solver(format!(
                    "problem is infeasible (phase-one residual {residual:e})"
                )));
            }
            // Drive zero-level artificials out of the basis where a real column allows it.
            for i in 0..self.basis.len() {
                if self.basis[i] >= self.artificial_start {
                    if let Some(col) = (0..self.artificial_start).find(|&c| self.t[i][c].abs() > 1e-9) {
                        self.pivot(i, col);
                    }
                }
            }
        }

        let mut cost = vec![0.0; self.cols];
        cost[..self.n].copy_from_slice(&lp.objective);
        self.optimize(&cost, self.artificial_start, opts, &mut pivots)?;

        let mut x = vec![0.0; self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.t[i][self.cols];
            }
        }
        let objective: f64 = lp.objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum();

        let duals: Vec<f64> = (0..lp.constraints.len())
            .map(|i| {
                let col = self.identity_col[i];
                let y: f64 = self
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(r, &b)| cost[b] * self.t[r][col])
                    .sum();
                if self.flipped[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        let dual_objective: f64 = lp.constraints.iter().zip(duals.iter()).map(|(c, y)| c.rhs * y).sum();
        let duality_gap = (objective - dual_objective).abs();
        let scale = 1.0 + objective.abs();

        let mut dual_violation: f64 = 0.0;
        for (j, &cj) in lp.objective.iter().enumerate() {
            let aty: f64 = lp
                .constraints
                .iter()
                .zip(duals.iter())
                .map(|(c, y)| c.coeffs[j] * y)
                .sum();
            dual_violation = dual_violation.max(cj - aty);
        }
        for (c, &y) in lp.constraints.iter().zip(duals.iter()) {
            dual_violation = dual_violation.max(match c.relation {
                Relation::Le => -y,
                Relation::Ge => y,
                Relation::Eq => 0.0,
            });
        }
        if duality_gap > opts.gap_tol * scale || dual_violation > opts.gap_tol * scale {
            return Err(Error::Solver(format!(
                "optimality certificate failed: duality gap {duality_gap:e}, dual infeasibility {dual_violation:e}"
            )));
        }
        Ok(LpSolution {
            x,
            objective,
            duals,
            duality_gap,
            pivots,
        })
    }
}
