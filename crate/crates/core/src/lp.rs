//! Exact rational linear programming (two-phase tableau simplex, Bland's rule).
//!
//! Problems here are tiny (a few dozen variables and constraints), so a dense
//! tableau is fine. Bland's rule makes the pivot sequence, and therefore every
//! returned certificate, a deterministic function of the input.

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Minimize `objective . x` subject to the constraints. Variables are
/// nonnegative unless marked free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub free: Vec<bool>,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            free: vec![false; n_vars],
            objective: vec![Rational::zero(); n_vars],
            constraints: Vec::new(),
        }
    }

    pub fn set_free(&mut self, j: usize) -> &mut Self {
        self.free[j] = true;
        self
    }

    pub fn all_free(mut self) -> Self {
        self.free = vec![true; self.n_vars];
        self
    }

    pub fn minimize(&mut self, objective: Vec<Rational>) -> &mut Self {
        assert_eq!(objective.len(), self.n_vars);
        self.objective = objective;
        self
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> &mut Self {
        assert_eq!(coeffs.len(), self.n_vars);
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run()
    }

    /// Feasibility only (objective ignored).
    pub fn feasible_point(&self) -> Option<Vec<Rational>> {
        let mut p = self.clone();
        p.objective = vec![Rational::zero(); self.n_vars];
        match p.solve() {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }
}

struct Tableau {
    // rows: constraints; last column is the right-hand side
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    n_cols: usize,
    n_structural: usize,
    artificial_start: usize,
    // maps original variable j to (positive column, optional negative column)
    var_cols: Vec<(usize, Option<usize>)>,
    cost: Vec<Rational>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let mut var_cols = Vec::with_capacity(lp.n_vars);
        let mut col = 0;
        for j in 0..lp.n_vars {
            if lp.free[j] {
                var_cols.push((col, Some(col + 1)));
                col += 2;
            } else {
                var_cols.push((col, None));
                col += 1;
            }
        }
        let n_structural = col;
        let n_slack = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let artificial_start = n_structural + n_slack;
        let m = lp.constraints.len();
        let n_cols = artificial_start + m;

        let mut rows = Vec::with_capacity(m);
        let mut slack = n_structural;
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![Rational::zero(); n_cols + 1];
            for (j, a) in c.coeffs.iter().enumerate() {
                let (p, neg) = var_cols[j];
                row[p] = a.clone();
                if let Some(nc) = neg {
                    row[nc] = -a;
                }
            }
            match c.relation {
                Relation::Ge => {
                    row[slack] = Rational::from_int(-1);
                    slack += 1;
                }
                Relation::Le => {
                    row[slack] = Rational::one();
                    slack += 1;
                }
                Relation::Eq => {}
            }
            row[n_cols] = c.rhs.clone();
            if c.rhs.is_negative() {
                for x in row.iter_mut() {
                    *x = -&*x;
                }
            }
            row[artificial_start + i] = Rational::one();
            rows.push(row);
        }

        let mut cost = vec![Rational::zero(); n_cols];
        for (j, c) in lp.objective.iter().enumerate() {
            let (p, neg) = var_cols[j];
            cost[p] = c.clone();
            if let Some(nc) = neg {
                cost[nc] = -c;
            }
        }

        Tableau {
            rows,
            basis: (artificial_start..artificial_start + m).collect(),
            n_cols,
            n_structural,
            artificial_start,
            var_cols,
            cost,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for x in self.rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs of all columns for cost vector `cost` given the basis.
    fn reduced_costs(&self, cost: &[Rational], allowed: usize) -> Vec<Rational> {
        let mut red: Vec<Rational> = cost[..allowed].to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, r) in red.iter_mut().enumerate() {
                if !self.rows[i][j].is_zero() {
                    *r -= cb * &self.rows[i][j];
                }
            }
        }
        red
    }

    /// Minimize `cost` over columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            let red = self.reduced_costs(cost, allowed);
            let Some(enter) = (0..allowed).find(|&j| red[j].is_negative()) else {
                return true;
            };
            let rhs = self.n_cols;
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[enter].is_positive() {
                    let ratio = &row[rhs] / &row[enter];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }

    fn run(mut self) -> LpOutcome {
        let rhs = self.n_cols;
        let mut phase1 = vec![Rational::zero(); self.n_cols];
        for c in phase1.iter_mut().skip(self.artificial_start) {
            *c = Rational::one();
        }
        self.optimize(&phase1, self.n_cols);
        let infeas: Rational = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= self.artificial_start)
            .map(|(i, _)| self.rows[i][rhs].clone())
            .sum();
        if infeas.is_positive() {
            return LpOutcome::Infeasible;
        }
        // drive remaining (zero-valued) artificials out of the basis
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.artificial_start {
                match (0..self.artificial_start).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        let cost = self.cost.clone();
        if !self.optimize(&cost, self.artificial_start) {
            return LpOutcome::Unbounded;
        }
        let mut values = vec![Rational::zero(); self.n_cols];
        for (i, &b) in self.basis.iter().enumerate() {
            values[b] = self.rows[i][rhs].clone();
        }
        let x: Vec<Rational> = self
            .var_cols
            .iter()
            .map(|&(p, neg)| match neg {
                Some(nc) => &values[p] - &values[nc],
                None => values[p].clone(),
            })
            .collect();
        let value = (0..self.n_structural)
            .map(|j| &cost[j] * &values[j])
            .sum();
        LpOutcome::Optimal { x, value }
    }
}
