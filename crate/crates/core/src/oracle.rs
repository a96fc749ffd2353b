//! Exhaustive enumeration of every feasible integer schedule of a tiny
//! instance. Used as ground truth for the optimizers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::schedule::{linear_profit, ProductionSchedule};
use crate::search::true_profit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleObjective {
    /// Fractional material cost.
    Linear,
    /// Lot-quantized material cost.
    True,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub max_schedules: u64,
    pub objective: OracleObjective,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_schedules: 1_000_000,
            objective: OracleObjective::True,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactOutcome {
    pub value: f64,
    /// Lexicographically smallest optimal schedule (row-major).
    pub schedule: ProductionSchedule,
    pub feasible_count: u64,
}

/// Every production path of one product: whole packages per period with
/// nonnegative stock, per-period output within capacity, and zero stock at
/// the end. Paths come out in lexicographic order.
fn product_paths(inst: &Instance, i: usize) -> Vec<Vec<u64>> {
    let q = inst.n_periods();
    let total: f64 = inst.demand[i].iter().sum::<f64>() - inst.initial_inventory[i];
    let total = total.round() as i64;
    // Minimum cumulative production at the end of each period.
    let mut min_cum = Vec::with_capacity(q);
    let mut cum_demand = 0.0;
    for t in 0..q {
        cum_demand += inst.demand[i][t];
        min_cum.push(((cum_demand - inst.initial_inventory[i]).max(0.0)).round() as i64);
    }
    let mut out = Vec::new();
    let mut path = vec![0u64; q];
    fn walk(
        t: usize,
        produced: i64,
        total: i64,
        min_cum: &[i64],
        cap: &[f64],
        path: &mut Vec<u64>,
        out: &mut Vec<Vec<u64>>,
    ) {
        let q = min_cum.len();
        if t == q {
            if produced == total {
                out.push(path.clone());
            }
            return;
        }
        let lo = (min_cum[t] - produced).max(0);
        let hi = (total - produced).min(cap[t].floor() as i64);
        for x in lo..=hi {
            path[t] = x as u64;
            walk(t + 1, produced + x, total, min_cum, cap, path, out);
        }
    }
    if total >= 0 {
        walk(0, 0, total, &min_cum, &inst.capacity, &mut path, &mut out);
    }
    out
}

/// Number of production paths of one product, counted without materializing
/// them.
fn count_paths(inst: &Instance, i: usize) -> u128 {
    let q = inst.n_periods();
    let total = (inst.demand[i].iter().sum::<f64>() - inst.initial_inventory[i]).round() as i64;
    if total < 0 {
        return 0;
    }
    let total_u = total as usize;
    // ways[p] = number of partial paths having produced p so far.
    let mut ways = vec![0u128; total_u + 1];
    ways[0] = 1;
    let mut cum_demand = 0.0;
    for t in 0..q {
        cum_demand += inst.demand[i][t];
        let min_cum = ((cum_demand - inst.initial_inventory[i]).max(0.0)).round() as usize;
        let cap = inst.capacity[t].floor().max(0.0) as usize;
        let mut next = vec![0u128; total_u + 1];
        for (p, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for x in 0..=cap.min(total_u - p) {
                if p + x >= min_cum {
                    next[p + x] = next[p + x].saturating_add(w);
                }
            }
        }
        ways = next;
    }
    ways[total_u]
}

/// Upper bound on the schedules [`enumerate_exact`] would visit.
pub fn search_space(inst: &Instance) -> u128 {
    (0..inst.n_products())
        .map(|i| count_paths(inst, i))
        .fold(1u128, |acc, c| acc.saturating_mul(c))
}

/// Maximizes the selected objective over all feasible integer schedules with
/// zero terminal inventory. Products are enumerated independently and their
/// paths combined, keeping combinations within per-period capacity.
pub fn enumerate_exact(inst: &Instance, limits: &OracleLimits) -> Result<ExactOutcome> {
    if limits.max_schedules == 0 {
        return Err(Error::Validation("oracle limit must be at least 1".into()));
    }
    if !inst.has_integral_data() {
        return Err(Error::Validation("the oracle needs integral demand, inventory and capacity".into()));
    }
    let bound = search_space(inst);
    if bound > limits.max_schedules as u128 {
        return Err(Error::SpaceTooLarge {
            bound,
            limit: limits.max_schedules,
        });
    }
    let (n, q) = (inst.n_products(), inst.n_periods());
    let paths: Vec<Vec<Vec<u64>>> = (0..n).map(|i| product_paths(inst, i)).collect();
    if paths.iter().any(Vec::is_empty) {
        return Err(Error::Infeasible("some product has no feasible production path".into()));
    }

    let mut choice = vec![0usize; n];
    let mut best: Option<(f64, ProductionSchedule)> = None;
    let mut count = 0u64;
    'odometer: loop {
        let fits = (0..q).all(|t| {
            let load: u64 = (0..n).map(|i| paths[i][choice[i]][t]).sum();
            load as f64 <= inst.capacity[t]
        });
        if fits {
            count += 1;
            let x = (0..n)
                .map(|i| paths[i][choice[i]].iter().map(|&v| v as f64).collect())
                .collect();
            let sched = ProductionSchedule::new(x, true);
            let value = match limits.objective {
                OracleObjective::Linear => linear_profit(inst, &sched)?.profit,
                OracleObjective::True => true_profit(inst, &sched)?.profit,
            };
            // Visiting order is lexicographic, so the first optimum is kept.
            if best.as_ref().is_none_or(|(b, _)| value > *b + 1e-9 * b.abs().max(1.0)) {
                best = Some((value, sched));
            }
        }
        for i in (0..n).rev() {
            choice[i] += 1;
            if choice[i] < paths[i].len() {
                continue 'odometer;
            }
            choice[i] = 0;
        }
        break;
    }
    let (value, schedule) =
        best.ok_or_else(|| Error::Infeasible("no combination of product paths fits capacity".into()))?;
    Ok(ExactOutcome {
        value,
        schedule,
        feasible_count: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Dimensions;

    fn tiny() -> Instance {
        Instance {
            dims: Dimensions::new(1, 1, 2),
            prices: vec![10.0],
            demand: vec![vec![1.0, 1.0]],
            initial_inventory: vec![0.0],
            capacity: vec![2.0, 2.0],
            holding_cost: vec![1.0, 1.0],
            variable_cost: 1.0,
            fixed_cost: 0.0,
            lot_weights: vec![5.0],
            material_prices: vec![1.0],
            consumption: vec![vec![2.0]],
            utilization_floor: 0.9,
        }
    }

    #[test]
    fn tiny_true_optimum() {
        let out = enumerate_exact(&tiny(), &OracleLimits::default()).unwrap();
        assert_eq!(out.value, 13.0);
        assert_eq!(out.schedule.x, vec![vec![1.0, 1.0]]);
        assert_eq!(out.feasible_count, 2);
    }

    #[test]
    fn zero_demand_has_one_schedule() {
        let mut inst = tiny();
        inst.demand = vec![vec![0.0, 0.0]];
        inst.fixed_cost = 7.0;
        let out = enumerate_exact(&inst, &OracleLimits::default()).unwrap();
        assert_eq!(out.feasible_count, 1);
        assert_eq!(out.value, -14.0);
        assert_eq!(out.schedule.x, vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn space_bound_is_enforced() {
        let limits = OracleLimits {
            max_schedules: 1,
            ..OracleLimits::default()
        };
        match enumerate_exact(&tiny(), &limits) {
            Err(Error::SpaceTooLarge { bound, limit }) => {
                assert_eq!(bound, 2);
                assert_eq!(limit, 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn path_count_matches_enumeration() {
        let mut inst = tiny();
        inst.dims = Dimensions::new(1, 1, 3);
        inst.demand = vec![vec![1.0, 2.0, 2.0]];
        inst.capacity = vec![3.0, 2.0, 4.0];
        inst.holding_cost = vec![1.0; 3];
        inst.initial_inventory = vec![1.0];
        assert_eq!(count_paths(&inst, 0), product_paths(&inst, 0).len() as u128);
        for p in product_paths(&inst, 0) {
            assert_eq!(p.iter().sum::<u64>(), 4);
        }
    }
}
