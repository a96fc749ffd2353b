//! Material lot rounding: converts a schedule's fractional material needs
//! into whole-lot purchases, carrying unused lot fractions forward, and
//! re-prices the schedule with the lots actually bought.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::milp::{solve_milp, MilpConfig, MilpStatus};
use crate::schedule::{
    build_linear_model, ensure_feasible, linear_profit, material_kg, operating_terms, ModelLayout,
    ProductionSchedule, ProfitBreakdown,
};
use crate::{zeros, Matrix};

/// Values this close to an integer are treated as that integer before
/// rounding up.
pub const SNAP_TOL: f64 = 1e-9;

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= SNAP_TOL {
        r
    } else {
        v
    }
}

/// Lots needed per material and period, `kg / lot weight`.
pub fn fractional_lots(inst: &Instance, sched: &ProductionSchedule) -> Result<Matrix> {
    sched.check_shape(inst)?;
    Ok(fractional_lots_of(inst, &sched.x))
}

pub(crate) fn fractional_lots_of(inst: &Instance, x: &Matrix) -> Matrix {
    (0..inst.n_materials())
        .map(|j| {
            (0..inst.n_periods())
                .map(|t| material_kg(inst, x, j, t) / inst.lot_weights[j])
                .collect()
        })
        .collect()
}

/// One period of the purchase chain for a single material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ChainStep {
    /// Need net of the carried leftover.
    pub updated_need: f64,
    pub purchased: f64,
    pub leftover: f64,
}

#[inline]
pub(crate) fn chain_step(carried: f64, need: f64) -> ChainStep {
    let updated_need = need - carried;
    let purchased = if updated_need > 0.0 { snap(updated_need).ceil() } else { 0.0 };
    let mut leftover = carried + purchased - need;
    if leftover.abs() <= SNAP_TOL {
        leftover = 0.0;
    }
    ChainStep {
        updated_need,
        purchased,
        leftover,
    }
}

/// Whole-lot purchases with leftover carry-over, materials x periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurchasePlan {
    pub fractional_need: Matrix,
    pub purchased_lots: Matrix,
    /// Unused lot fraction at the end of each period.
    pub leftover: Matrix,
    /// Need net of the previous period's leftover; equals the fractional
    /// need in the first period.
    pub updated_need: Matrix,
}

impl PurchasePlan {
    pub fn total_lots(&self, material: usize) -> f64 {
        self.purchased_lots[material].iter().sum()
    }
}

/// Runs the purchase chain: period one buys `ceil(E)`, every later period
/// buys `ceil(E - leftover)` clamped at zero, and the unused remainder of
/// each purchase carries into the next period.
pub fn purchase_plan(need: &Matrix) -> Result<PurchasePlan> {
    let m = need.len();
    let q = need.first().map_or(0, Vec::len);
    if need.iter().any(|r| r.len() != q) {
        return Err(Error::Shape("need matrix rows differ in length".into()));
    }
    if let Some((j, t)) = (0..m)
        .flat_map(|j| (0..q).map(move |t| (j, t)))
        .find(|&(j, t)| need[j][t].is_nan() || need[j][t] < 0.0)
    {
        return Err(Error::Validation(format!(
            "material need [{j}][{t}] = {} must be nonnegative",
            need[j][t]
        )));
    }
    let mut purchased_lots = zeros(m, q);
    let mut leftover = zeros(m, q);
    let mut updated_need = zeros(m, q);
    for j in 0..m {
        let mut carried = 0.0;
        for t in 0..q {
            let step = chain_step(carried, need[j][t]);
            purchased_lots[j][t] = step.purchased;
            leftover[j][t] = step.leftover;
            updated_need[j][t] = step.updated_need;
            carried = step.leftover;
        }
    }
    Ok(PurchasePlan {
        fractional_need: need.clone(),
        purchased_lots,
        leftover,
        updated_need,
    })
}

/// Lot-quantized material cost and utilization for a production matrix.
/// This is the only place the purchase chain is priced.
pub(crate) fn lot_costing(inst: &Instance, x: &Matrix) -> (f64, f64) {
    let mut cost = 0.0;
    let mut consumed_kg = 0.0;
    let mut purchased_kg = 0.0;
    for j in 0..inst.n_materials() {
        let w = inst.lot_weights[j];
        let mut carried = 0.0;
        let mut lots = 0.0;
        for t in 0..inst.n_periods() {
            let kg = material_kg(inst, x, j, t);
            let step = chain_step(carried, kg / w);
            lots += step.purchased;
            carried = step.leftover;
            consumed_kg += kg;
        }
        cost += inst.material_prices[j] * w * lots;
        purchased_kg += w * lots;
    }
    (cost, utilization(consumed_kg, purchased_kg))
}

fn utilization(consumed_kg: f64, purchased_kg: f64) -> f64 {
    if purchased_kg > 0.0 {
        (consumed_kg / purchased_kg).min(1.0)
    } else {
        1.0
    }
}

/// Profit of a feasible production matrix under lot-quantized purchasing,
/// without re-checking feasibility.
pub(crate) fn lot_profit_unchecked(inst: &Instance, x: &Matrix) -> ProfitBreakdown {
    let ops = operating_terms(inst, x);
    let (material_cost, util) = lot_costing(inst, x);
    ProfitBreakdown::assemble(
        ops.revenue,
        material_cost,
        ops.inventory_cost,
        ops.variable_cost,
        ops.fixed_cost,
        util,
    )
}

/// Re-prices `sched` with the lots bought by `plan`. The plan must have been
/// derived from the same schedule.
pub fn updated_profit(inst: &Instance, sched: &ProductionSchedule, plan: &PurchasePlan) -> Result<ProfitBreakdown> {
    ensure_feasible(inst, sched)?;
    let expected = fractional_lots_of(inst, &sched.x);
    let shape_ok = plan.fractional_need.len() == expected.len()
        && plan.purchased_lots.len() == expected.len()
        && plan
            .fractional_need
            .iter()
            .zip(&expected)
            .all(|(a, b)| a.len() == b.len());
    if !shape_ok {
        return Err(Error::PlanMismatch("plan dimensions differ from the instance".into()));
    }
    for (j, (row, want)) in plan.fractional_need.iter().zip(&expected).enumerate() {
        for (t, (a, b)) in row.iter().zip(want).enumerate() {
            if (a - b).abs() > 1e-9 * b.abs().max(1.0) {
                return Err(Error::PlanMismatch(format!(
                    "need [{j}][{t}] is {a} but the schedule requires {b}"
                )));
            }
        }
    }
    let ops = operating_terms(inst, &sched.x);
    let mut cost = 0.0;
    let mut consumed_kg = 0.0;
    let mut purchased_kg = 0.0;
    for j in 0..inst.n_materials() {
        let w = inst.lot_weights[j];
        let lots: f64 = plan.purchased_lots[j].iter().sum();
        cost += inst.material_prices[j] * w * lots;
        purchased_kg += w * lots;
        consumed_kg += (0..inst.n_periods()).map(|t| material_kg(inst, &sched.x, j, t)).sum::<f64>();
    }
    let breakdown = ProfitBreakdown::assemble(
        ops.revenue,
        cost,
        ops.inventory_cost,
        ops.variable_cost,
        ops.fixed_cost,
        utilization(consumed_kg, purchased_kg),
    );
    if breakdown.below_floor(inst.utilization_floor) {
        warn!(
            "material utilization {:.4} is below the floor {:.4}",
            breakdown.utilization, inst.utilization_floor
        );
    }
    Ok(breakdown)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicSolution {
    pub schedule: ProductionSchedule,
    pub plan: PurchasePlan,
    /// Linear-model profit with fractional material cost.
    pub model_profit: f64,
    /// Profit after rounding purchases to whole lots.
    pub updated_profit: f64,
    pub breakdown: ProfitBreakdown,
    /// Objective reported by branch-and-bound.
    pub milp_objective: f64,
    pub milp_nodes: usize,
}

/// Solves the integer linear model, then rounds its material purchases.
pub fn run_heuristic(inst: &Instance, cfg: &MilpConfig) -> Result<HeuristicSolution> {
    let model = build_linear_model(inst, true);
    let out = solve_milp(&model, cfg)?;
    let (values, objective) = match (out.status, out.values, out.objective) {
        (MilpStatus::Infeasible, _, _) => {
            return Err(Error::Infeasible("the integer linear model has no solution".into()))
        }
        (_, Some(v), Some(o)) => (v, o),
        _ => {
            return Err(Error::NodeLimit {
                limit: cfg.node_limit,
            })
        }
    };
    let schedule = ModelLayout::of(inst).schedule(&values, true);
    let model_profit = linear_profit(inst, &schedule)?.profit;
    let plan = purchase_plan(&fractional_lots_of(inst, &schedule.x))?;
    let breakdown = updated_profit(inst, &schedule, &plan)?;
    Ok(HeuristicSolution {
        schedule,
        plan,
        model_profit,
        updated_profit: breakdown.profit,
        breakdown,
        milp_objective: objective,
        milp_nodes: out.nodes,
    })
}
