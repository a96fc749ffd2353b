//! Branch-and-bound over the simplex core.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LinearModel, Relation};
use crate::simplex::{solve_model, LpStatus, SimplexOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branching {
    /// Fractional part closest to one half; ties go to the lowest index.
    MostFractional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeOrder {
    BestBound,
    DepthFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MilpConfig {
    pub int_tol: f64,
    pub node_limit: usize,
    /// Relative gap at which a node is pruned; 0 proves optimality.
    pub gap_tol: f64,
    pub branching: Branching,
    pub node_order: NodeOrder,
    pub simplex: SimplexOptions,
}

impl Default for MilpConfig {
    fn default() -> Self {
        Self {
            int_tol: 1e-6,
            node_limit: 100_000,
            gap_tol: 0.0,
            branching: Branching::MostFractional,
            node_order: NodeOrder::BestBound,
            simplex: SimplexOptions::default(),
        }
    }
}

impl MilpConfig {
    pub fn validate(&self) -> Result<()> {
        let positive_tol = self.int_tol.is_finite() && self.int_tol > 0.0;
        let valid_gap = self.gap_tol.is_finite() && self.gap_tol >= 0.0;
        if !positive_tol || self.node_limit == 0 || !valid_gap {
            return Err(Error::Validation(
                "integrality tolerance must be > 0, node limit >= 1, gap >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MilpStatus {
    Optimal,
    FeasibleGap,
    Infeasible,
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpOutcome {
    pub status: MilpStatus,
    /// Incumbent values with integer-tagged variables rounded.
    pub values: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub best_bound: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, Copy)]
struct BoundRow {
    var: usize,
    relation: Relation,
    value: f64,
}

struct Node {
    id: usize,
    depth: usize,
    /// Objective of the parent relaxation: an upper bound for this subtree.
    bound: f64,
    rows: Vec<BoundRow>,
    order: NodeOrder,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap: the greatest node is explored next.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.order {
            NodeOrder::BestBound => self
                .bound
                .total_cmp(&other.bound)
                .then_with(|| other.id.cmp(&self.id)),
            NodeOrder::DepthFirst => self.depth.cmp(&other.depth).then_with(|| self.id.cmp(&other.id)),
        }
    }
}

fn most_fractional(model: &LinearModel, x: &[f64], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for v in model.integer_vars() {
        let frac = x[v] - x[v].floor();
        let dist = frac.min(1.0 - frac);
        if dist > tol && best.is_none_or(|(_, d)| dist > d) {
            best = Some((v, dist));
        }
    }
    best.map(|(v, _)| v)
}

/// Maximizes `model` with integrality enforced on tagged variables.
///
/// Nodes are selected by best bound (ties: creation order); the branching
/// variable is the most fractional tagged variable, and children add the
/// rows `x <= floor` and `x >= ceil`.
pub fn solve_milp(model: &LinearModel, cfg: &MilpConfig) -> Result<MilpOutcome> {
    cfg.validate()?;
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        id: 0,
        depth: 0,
        bound: f64::INFINITY,
        rows: Vec::new(),
        order: cfg.node_order,
    });
    let mut next_id = 1;
    let mut nodes = 0usize;
    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut gap_pruned = false;
    let mut root_bound = f64::INFINITY;

    let prune_margin = |inc: f64| cfg.gap_tol * inc.abs().max(1.0);

    while let Some(node) = heap.pop() {
        if let Some((_, inc)) = &incumbent {
            if node.bound <= *inc + 1e-9 * inc.abs().max(1.0) {
                continue;
            }
            if node.bound <= *inc + prune_margin(*inc) {
                gap_pruned = true;
                continue;
            }
        }
        if nodes >= cfg.node_limit {
            heap.push(node);
            break;
        }
        nodes += 1;

        let mut child_model = model.clone();
        for row in &node.rows {
            child_model.add_constraint(
                format!("branch[{}]", row.var),
                vec![(row.var, 1.0)],
                row.relation,
                row.value,
            )?;
        }
        let lp = solve_model(&child_model, &cfg.simplex)?;
        match lp.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(Error::Unbounded),
            LpStatus::Optimal => {}
        }
        if node.id == 0 {
            root_bound = lp.objective;
        }
        if let Some((_, inc)) = &incumbent {
            if lp.objective <= *inc + 1e-9 * inc.abs().max(1.0) {
                continue;
            }
        }
        match most_fractional(model, &lp.x, cfg.int_tol) {
            None => {
                let mut values = lp.x.clone();
                for v in model.integer_vars() {
                    values[v] = values[v].round();
                }
                let obj = model.evaluate_objective(&values);
                if incumbent.as_ref().is_none_or(|(_, inc)| obj > *inc) {
                    incumbent = Some((values, obj));
                }
            }
            Some(var) => {
                let value = lp.x[var];
                for (relation, bound_value) in [(Relation::Le, value.floor()), (Relation::Ge, value.ceil())] {
                    let mut rows = node.rows.clone();
                    rows.push(BoundRow {
                        var,
                        relation,
                        value: bound_value,
                    });
                    heap.push(Node {
                        id: next_id,
                        depth: node.depth + 1,
                        bound: lp.objective,
                        rows,
                        order: cfg.node_order,
                    });
                    next_id += 1;
                }
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::NEG_INFINITY, f64::max);
    let limit_hit = !heap.is_empty() && nodes >= cfg.node_limit;
    let (values, objective) = match incumbent {
        Some((v, o)) => (Some(v), Some(o)),
        None => (None, None),
    };
    let status = match (&objective, limit_hit) {
        (_, true) => MilpStatus::NodeLimit,
        (None, false) => MilpStatus::Infeasible,
        (Some(_), false) if gap_pruned => MilpStatus::FeasibleGap,
        (Some(_), false) => MilpStatus::Optimal,
    };
    let best_bound = match status {
        MilpStatus::Optimal => objective.expect("optimal has incumbent"),
        MilpStatus::Infeasible => f64::NEG_INFINITY,
        _ => open_bound.max(objective.unwrap_or(f64::NEG_INFINITY)).min(root_bound),
    };
    Ok(MilpOutcome {
        status,
        values,
        objective,
        best_bound,
        nodes,
    })
}
