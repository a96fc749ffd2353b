//! Dense two-phase primal simplex.
//!
//! A [`LinearModel`] is first mapped to standard form `max c.x, A x = b,
//! x >= 0, b >= 0`; [`ColumnKind`] and [`VarMap`] record how to map a
//! standard-form point back to the original variables. Pricing is Dantzig's
//! largest reduced cost, switching to Bland's rule after a run of degenerate
//! pivots so the method cannot cycle.

use log::trace;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LinearModel, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexOptions {
    /// Smallest reduced cost or pivot element considered nonzero.
    pub pivot_tol: f64,
    /// Phase-one residual above which a problem is declared infeasible.
    pub feas_tol: f64,
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_threshold: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            pivot_tol: 1e-9,
            feas_tol: 1e-6,
            max_iterations: 50_000,
            stall_threshold: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ColumnKind {
    /// Part of an original variable (see [`VarMap`]).
    Structural { var: usize },
    Slack { row: usize },
    Artificial { row: usize },
}

/// How an original variable is expressed through standard-form columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VarMap {
    /// `x = lower + col`
    Shifted { col: usize, lower: f64 },
    /// `x = upper - col`
    Reflected { col: usize, upper: f64 },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardLP {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows x cols`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Objective constant after substitution.
    pub constant: f64,
    pub columns: Vec<ColumnKind>,
    pub var_map: Vec<VarMap>,
    /// Original objective and constant, for re-evaluation.
    original_objective: Vec<f64>,
    original_constant: f64,
}

impl StandardLP {
    pub fn coeff(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.cols + c]
    }

    /// Maps a standard-form point back to the original variables.
    pub fn recover(&self, y: &[f64]) -> Vec<f64> {
        self.var_map
            .iter()
            .map(|m| match *m {
                VarMap::Shifted { col, lower } => lower + y[col],
                VarMap::Reflected { col, upper } => upper - y[col],
                VarMap::Split { pos, neg } => y[pos] - y[neg],
            })
            .collect()
    }

    pub fn original_objective(&self, x: &[f64]) -> f64 {
        self.original_constant
            + self
                .original_objective
                .iter()
                .zip(x)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }
}

struct RowDraft {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

/// Builds the standard-form image of `model`: bounds are shifted or
/// reflected, free variables split, finite upper bounds (after shifting)
/// become rows, inequalities get slack columns, rows are negated to make the
/// right-hand side nonnegative, and rows without a usable slack get an
/// artificial column.
pub fn to_standard_form(model: &LinearModel) -> Result<StandardLP> {
    model.validate()?;
    let mut var_map = Vec::with_capacity(model.n_vars());
    let mut structural_cols = 0usize;
    let mut structural_owner = Vec::new();
    let mut c = Vec::new();
    let mut constant = model.constant;
    let mut drafts: Vec<RowDraft> = Vec::new();

    for (v, var) in model.variables.iter().enumerate() {
        let obj = model.objective[v];
        if var.lower.is_finite() {
            let col = structural_cols;
            structural_cols += 1;
            structural_owner.push(v);
            c.push(obj);
            constant += obj * var.lower;
            var_map.push(VarMap::Shifted { col, lower: var.lower });
            if var.upper.is_finite() {
                drafts.push(RowDraft {
                    coeffs: vec![(col, 1.0)],
                    relation: Relation::Le,
                    rhs: var.upper - var.lower,
                });
            }
        } else if var.upper.is_finite() {
            let col = structural_cols;
            structural_cols += 1;
            structural_owner.push(v);
            c.push(-obj);
            constant += obj * var.upper;
            var_map.push(VarMap::Reflected { col, upper: var.upper });
        } else {
            let pos = structural_cols;
            let neg = structural_cols + 1;
            structural_cols += 2;
            structural_owner.extend([v, v]);
            c.extend([obj, -obj]);
            var_map.push(VarMap::Split { pos, neg });
        }
    }

    // Model constraints first, bound rows after.
    let mut rows: Vec<RowDraft> = Vec::with_capacity(model.constraints.len() + drafts.len());
    for con in &model.constraints {
        let mut coeffs = Vec::new();
        let mut rhs = con.rhs;
        for &(v, a) in &con.terms {
            match var_map[v] {
                VarMap::Shifted { col, lower } => {
                    rhs -= a * lower;
                    coeffs.push((col, a));
                }
                VarMap::Reflected { col, upper } => {
                    rhs -= a * upper;
                    coeffs.push((col, -a));
                }
                VarMap::Split { pos, neg } => {
                    coeffs.push((pos, a));
                    coeffs.push((neg, -a));
                }
            }
        }
        rows.push(RowDraft {
            coeffs,
            relation: con.relation,
            rhs,
        });
    }
    rows.extend(drafts);

    let n_rows = rows.len();
    let n_slack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
    // Decide signs and which rows need artificials before sizing the matrix.
    let mut negate = vec![false; n_rows];
    let mut needs_artificial = vec![false; n_rows];
    for (r, row) in rows.iter().enumerate() {
        negate[r] = row.rhs < 0.0;
        let slack_sign = match row.relation {
            Relation::Le => 1.0,
            Relation::Ge => -1.0,
            Relation::Eq => 0.0,
        };
        let effective = if negate[r] { -slack_sign } else { slack_sign };
        needs_artificial[r] = effective <= 0.0;
    }
    let n_art = needs_artificial.iter().filter(|&&x| x).count();
    let cols = structural_cols + n_slack + n_art;

    let mut a = vec![0.0; n_rows * cols];
    let mut b = vec![0.0; n_rows];
    let mut columns: Vec<ColumnKind> = structural_owner
        .iter()
        .map(|&var| ColumnKind::Structural { var })
        .collect();
    c.resize(cols, 0.0);

    let mut next_slack = structural_cols;
    let mut next_art = structural_cols + n_slack;
    let mut slack_kinds = Vec::with_capacity(n_slack);
    let mut art_kinds = Vec::with_capacity(n_art);
    for (r, row) in rows.iter().enumerate() {
        let sign = if negate[r] { -1.0 } else { 1.0 };
        for &(col, v) in &row.coeffs {
            a[r * cols + col] += sign * v;
        }
        b[r] = sign * row.rhs;
        match row.relation {
            Relation::Le => {
                a[r * cols + next_slack] = sign;
                slack_kinds.push(ColumnKind::Slack { row: r });
                next_slack += 1;
            }
            Relation::Ge => {
                a[r * cols + next_slack] = -sign;
                slack_kinds.push(ColumnKind::Slack { row: r });
                next_slack += 1;
            }
            Relation::Eq => {}
        }
        if needs_artificial[r] {
            a[r * cols + next_art] = 1.0;
            art_kinds.push(ColumnKind::Artificial { row: r });
            next_art += 1;
        }
    }
    columns.extend(slack_kinds);
    columns.extend(art_kinds);

    Ok(StandardLP {
        rows: n_rows,
        cols,
        a,
        b,
        c,
        constant,
        columns,
        var_map,
        original_objective: model.objective.clone(),
        original_constant: model.constant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Values of the original variables; empty unless optimal.
    pub x: Vec<f64>,
    /// Objective in the original space, constant included.
    pub objective: f64,
    pub iterations: usize,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows x (cols + 1)`, last column is the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.t[r * (self.cols + 1) + self.cols]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.t[pr * w + pc];
        for v in &mut self.t[pr * w..(pr + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[r * w..(r + 1) * w];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[pc] = 0.0;
            if row[w - 1] < 0.0 && row[w - 1] > -1e-11 {
                row[w - 1] = 0.0;
            }
        }
        self.basis[pr] = pc;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for (c, dc) in d.iter_mut().enumerate() {
                *dc -= cb * self.at(r, c);
            }
        }
        d
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        (0..self.rows).map(|r| cost[self.basis[r]] * self.rhs(r)).sum()
    }

    fn drop_row(&mut self, r: usize) {
        let w = self.cols + 1;
        self.t.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.rows -= 1;
    }

    /// Runs primal simplex iterations on `cost` over the allowed columns.
    /// Returns `false` if the problem is unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool], opts: &SimplexOptions, phase: u8) -> Result<bool> {
        let mut bland = false;
        let mut degenerate_run = 0usize;
        loop {
            let d = self.reduced_costs(cost);
            let entering = if bland {
                (0..self.cols).find(|&c| allowed[c] && d[c] > opts.pivot_tol)
            } else {
                let mut best: Option<usize> = None;
                for c in 0..self.cols {
                    if allowed[c] && d[c] > opts.pivot_tol && best.is_none_or(|b| d[c] > d[b]) {
                        best = Some(c);
                    }
                }
                best
            };
            let Some(e) = entering else {
                return Ok(true);
            };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, e);
                if a > opts.pivot_tol {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                            if (!tie && ratio < lratio) || (tie && self.basis[r] < self.basis[lr]) {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((l, ratio)) = leave else {
                return Ok(false);
            };

            if self.iterations >= opts.max_iterations {
                return Err(Error::IterationLimit {
                    limit: opts.max_iterations,
                });
            }
            self.iterations += 1;
            trace!(
                "phase {phase} iter {} enter {e} leave {} ratio {ratio:.6e}{}",
                self.iterations,
                self.basis[l],
                if bland { " bland" } else { "" }
            );
            if ratio * d[e] <= opts.pivot_tol {
                degenerate_run += 1;
                if degenerate_run >= opts.stall_threshold && !bland {
                    trace!("switching to Bland's rule after {degenerate_run} degenerate pivots");
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(l, e);
        }
    }
}

/// Solves `lp` to optimality, or reports infeasibility or unboundedness.
pub fn solve_lp(lp: &StandardLP, opts: &SimplexOptions) -> Result<LpOutcome> {
    if !(opts.pivot_tol > 0.0 && opts.feas_tol > 0.0) {
        return Err(Error::Validation("simplex tolerances must be positive".into()));
    }
    let w = lp.cols + 1;
    let mut t = vec![0.0; lp.rows * w];
    for r in 0..lp.rows {
        t[r * w..r * w + lp.cols].copy_from_slice(&lp.a[r * lp.cols..(r + 1) * lp.cols]);
        t[r * w + lp.cols] = lp.b[r];
    }
    // Initial basis: the artificial of each row, else its +1 slack.
    let mut basis = vec![usize::MAX; lp.rows];
    for (c, kind) in lp.columns.iter().enumerate() {
        match *kind {
            ColumnKind::Artificial { row } => basis[row] = c,
            ColumnKind::Slack { row } if basis[row] == usize::MAX && lp.coeff(row, c) > 0.0 => {
                basis[row] = c
            }
            _ => {}
        }
    }
    debug_assert!(basis.iter().all(|&c| c != usize::MAX));
    let mut tab = Tableau {
        rows: lp.rows,
        cols: lp.cols,
        t,
        basis,
        iterations: 0,
    };

    let is_art: Vec<bool> = lp
        .columns
        .iter()
        .map(|k| matches!(k, ColumnKind::Artificial { .. }))
        .collect();

    if is_art.iter().any(|&a| a) {
        let phase1: Vec<f64> = is_art.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect();
        let all = vec![true; lp.cols];
        tab.optimize(&phase1, &all, opts, 1)?;
        if tab.objective(&phase1) < -opts.feas_tol {
            return Ok(LpOutcome {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: f64::NAN,
                iterations: tab.iterations,
            });
        }
        // Drive remaining artificials out of the basis, dropping redundant rows.
        let mut r = 0;
        while r < tab.rows {
            if is_art[tab.basis[r]] {
                let replacement = (0..tab.cols)
                    .filter(|&c| !is_art[c])
                    .max_by(|&x, &y| tab.at(r, x).abs().total_cmp(&tab.at(r, y).abs()).then(y.cmp(&x)))
                    .filter(|&c| tab.at(r, c).abs() > opts.pivot_tol);
                match replacement {
                    Some(c) => {
                        tab.pivot(r, c);
                        r += 1;
                    }
                    None => tab.drop_row(r),
                }
            } else {
                r += 1;
            }
        }
    }

    let allowed: Vec<bool> = is_art.iter().map(|&a| !a).collect();
    let mut cost = lp.c.clone();
    for (c, &a) in is_art.iter().enumerate() {
        if a {
            cost[c] = 0.0;
        }
    }
    if !tab.optimize(&cost, &allowed, opts, 2)? {
        return Ok(LpOutcome {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective: f64::INFINITY,
            iterations: tab.iterations,
        });
    }

    let mut y = vec![0.0; lp.cols];
    for r in 0..tab.rows {
        y[tab.basis[r]] = tab.rhs(r).max(0.0);
    }
    let x = lp.recover(&y);
    let objective = lp.original_objective(&x);
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        x,
        objective,
        iterations: tab.iterations,
    })
}

/// Convenience: standard form followed by [`solve_lp`].
pub fn solve_model(model: &LinearModel, opts: &SimplexOptions) -> Result<LpOutcome> {
    solve_lp(&to_standard_form(model)?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp2() -> LinearModel {
        let mut m = LinearModel::new();
        let x = m.add_variable("x", 0.0, f64::INFINITY, false);
        let y = m.add_variable("y", 0.0, f64::INFINITY, false);
        m.set_objective(x, 3.0);
        m.set_objective(y, 2.0);
        m.add_constraint("sum", vec![(x, 1.0), (y, 1.0)], Relation::Le, 4.0).unwrap();
        m.add_constraint("xcap", vec![(x, 1.0)], Relation::Le, 2.0).unwrap();
        m
    }

    #[test]
    fn textbook_vertex() {
        let out = solve_model(&lp2(), &SimplexOptions::default()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 10.0).abs() < 1e-9);
        assert!((out.x[0] - 2.0).abs() < 1e-9 && (out.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn one_slack_for_one_row() {
        let mut m = LinearModel::new();
        let x = m.add_variable("x", 0.0, f64::INFINITY, false);
        m.set_objective(x, 1.0);
        m.add_constraint("c", vec![(x, 1.0)], Relation::Le, 2.0).unwrap();
        let lp = to_standard_form(&m).unwrap();
        assert_eq!(lp.rows, 1);
        assert_eq!(lp.cols, 2);
        assert_eq!(lp.columns[1], ColumnKind::Slack { row: 0 });
    }

    #[test]
    fn negative_rhs_is_negated() {
        let mut m = LinearModel::new();
        let x = m.add_variable("x", 0.0, f64::INFINITY, false);
        m.add_constraint("c", vec![(x, -1.0)], Relation::Le, -1.0).unwrap();
        let lp = to_standard_form(&m).unwrap();
        assert_eq!(lp.b, vec![1.0]);
        assert_eq!(lp.coeff(0, 0), 1.0);
        // The slack now has coefficient -1 and an artificial is needed.
        assert_eq!(lp.coeff(0, 1), -1.0);
        assert!(matches!(lp.columns[2], ColumnKind::Artificial { row: 0 }));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut m = LinearModel::new();
        let x = m.add_variable("x", 0.0, f64::INFINITY, false);
        m.set_objective(x, 1.0);
        m.add_constraint("lo", vec![(x, 1.0)], Relation::Ge, 1.0).unwrap();
        m.add_constraint("hi", vec![(x, 1.0)], Relation::Le, 0.0).unwrap();
        assert_eq!(solve_model(&m, &SimplexOptions::default()).unwrap().status, LpStatus::Infeasible);

        let mut m = LinearModel::new();
        let x = m.add_variable("x", 0.0, f64::INFINITY, false);
        m.set_objective(x, 1.0);
        assert_eq!(solve_model(&m, &SimplexOptions::default()).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn bounds_shift_reflect_and_split() {
        // max -|shifted| style: x in [1, 3], y <= 2 free below, z free.
        let mut m = LinearModel::new();
        let x = m.add_variable("x", 1.0, 3.0, false);
        let y = m.add_variable("y", f64::NEG_INFINITY, 2.0, false);
        let z = m.add_variable("z", f64::NEG_INFINITY, f64::INFINITY, false);
        m.set_objective(x, -1.0);
        m.set_objective(y, 1.0);
        m.set_objective(z, -1.0);
        m.constant = 5.0;
        m.add_constraint("zlo", vec![(z, 1.0)], Relation::Ge, -4.0).unwrap();
        m.add_constraint("mix", vec![(y, 1.0), (z, 1.0)], Relation::Le, 10.0).unwrap();
        let lp = to_standard_form(&m).unwrap();
        assert!(matches!(lp.var_map[0], VarMap::Shifted { lower, .. } if lower == 1.0));
        assert!(matches!(lp.var_map[1], VarMap::Reflected { upper, .. } if upper == 2.0));
        assert!(matches!(lp.var_map[2], VarMap::Split { .. }));
        let out = solve_lp(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        // x = 1, y = 2, z = -4 -> -1 + 2 + 4 + 5 = 10
        assert!((out.objective - 10.0).abs() < 1e-9, "{out:?}");
        assert!((out.x[2] + 4.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equality_rows_are_dropped() {
        let mut m = LinearModel::new();
        let x = m.add_variable("x", 0.0, f64::INFINITY, false);
        let y = m.add_variable("y", 0.0, f64::INFINITY, false);
        m.set_objective(x, 1.0);
        m.add_constraint("a", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 2.0).unwrap();
        m.add_constraint("b", vec![(x, 2.0), (y, 2.0)], Relation::Eq, 4.0).unwrap();
        let out = solve_model(&m, &SimplexOptions::default()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn iteration_limit_is_distinct() {
        let opts = SimplexOptions {
            max_iterations: 0,
            ..SimplexOptions::default()
        };
        assert!(matches!(solve_model(&lp2(), &opts), Err(Error::IterationLimit { .. })));
    }

    #[test]
    fn degenerate_problem_terminates_under_bland() {
        // Beale's classic cycling example for Dantzig's rule without safeguards.
        let mut m = LinearModel::new();
        let v: Vec<usize> = (0..4).map(|i| m.add_variable(format!("x{i}"), 0.0, f64::INFINITY, false)).collect();
        for (i, c) in [0.75, -150.0, 0.02, -6.0].into_iter().enumerate() {
            m.set_objective(v[i], c);
        }
        m.add_constraint("r1", vec![(v[0], 0.25), (v[1], -60.0), (v[2], -0.04), (v[3], 9.0)], Relation::Le, 0.0).unwrap();
        m.add_constraint("r2", vec![(v[0], 0.5), (v[1], -90.0), (v[2], -0.02), (v[3], 3.0)], Relation::Le, 0.0).unwrap();
        m.add_constraint("r3", vec![(v[2], 1.0)], Relation::Le, 1.0).unwrap();
        let opts = SimplexOptions {
            stall_threshold: 2,
            ..SimplexOptions::default()
        };
        let out = solve_model(&m, &opts).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 0.05).abs() < 1e-9, "{}", out.objective);
    }

    #[test]
    fn identical_inputs_give_identical_outputs() {
        let a = solve_model(&lp2(), &SimplexOptions::default()).unwrap();
        let b = solve_model(&lp2(), &SimplexOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn base_case_row_count() {
        let inst = crate::instance::paper_base_instance(1);
        let m = crate::schedule::build_linear_model(&inst, true);
        // 6 capacity rows and 36 balance rows.
        assert_eq!(m.constraints.len(), 42);
        let lp = to_standard_form(&m).unwrap();
        // Plus one upper-bound row per terminal stock variable fixed at zero.
        assert_eq!(lp.rows, 48);
        assert_eq!(lp.cols, 120);
    }
}
