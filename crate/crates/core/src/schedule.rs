//! Production schedules: inventory recursion, feasibility, material
//! requirements, the linear-cost profit, and the linear model builder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{LinearModel, Relation};
use crate::{zeros, Matrix};

/// Absolute tolerance for feasibility checks on package counts.
pub const FEAS_TOL: f64 = 1e-6;

/// Packages to produce, products x periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductionSchedule {
    pub integer_mode: bool,
    pub x: Matrix,
}

impl ProductionSchedule {
    pub fn new(x: Matrix, integer_mode: bool) -> Self {
        Self { integer_mode, x }
    }

    pub fn zeros(inst: &Instance, integer_mode: bool) -> Self {
        Self::new(zeros(inst.n_products(), inst.n_periods()), integer_mode)
    }

    pub fn check_shape(&self, inst: &Instance) -> Result<()> {
        let (n, q) = (inst.n_products(), inst.n_periods());
        if self.x.len() != n || self.x.iter().any(|r| r.len() != q) {
            return Err(Error::Shape(format!(
                "schedule must be {n} products x {q} periods"
            )));
        }
        Ok(())
    }

    /// Total packages per period.
    pub fn period_totals(&self) -> Vec<f64> {
        let q = self.x.first().map_or(0, Vec::len);
        (0..q).map(|t| self.x.iter().map(|r| r[t]).sum()).collect()
    }

    /// Total packages per product over the horizon.
    pub fn product_totals(&self) -> Vec<f64> {
        self.x.iter().map(|r| r.iter().sum()).collect()
    }
}

/// On-disk form of a schedule; `note` carries free-text annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDocument {
    pub integer_mode: bool,
    pub x: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn parse_schedule(doc: &str) -> Result<ScheduleDocument> {
    let d: ScheduleDocument = serde_json::from_str(doc)?;
    if d.x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Validation("schedule entries must be finite".into()));
    }
    Ok(d)
}

pub fn render_schedule(sched: &ProductionSchedule, note: Option<&str>) -> String {
    let doc = ScheduleDocument {
        integer_mode: sched.integer_mode,
        x: sched.x.clone(),
        note: note.map(str::to_owned),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("schedule serializes");
    s.push('\n');
    s
}

impl From<ScheduleDocument> for ProductionSchedule {
    fn from(d: ScheduleDocument) -> Self {
        ProductionSchedule::new(d.x, d.integer_mode)
    }
}

/// End-of-period inventory levels, products x periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryTrajectory {
    pub levels: Matrix,
}

impl InventoryTrajectory {
    /// Stock at the start of each period, i.e. the initial inventory followed
    /// by the end-of-period levels shifted one period.
    pub fn start_of_period(&self, inst: &Instance) -> Matrix {
        start_of_period(inst, &self.levels)
    }
}

fn start_of_period(inst: &Instance, levels: &Matrix) -> Matrix {
    levels
        .iter()
        .enumerate()
        .map(|(i, row)| {
            std::iter::once(inst.initial_inventory[i])
                .chain(row.iter().take(row.len().saturating_sub(1)).copied())
                .collect()
        })
        .collect()
}

/// Balance recursion `I_t = I_{t-1} + X_t - D_t`, without sign checks.
pub fn inventory_trajectory(inst: &Instance, sched: &ProductionSchedule) -> Result<InventoryTrajectory> {
    sched.check_shape(inst)?;
    let levels = sched
        .x
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut level = inst.initial_inventory[i];
            row.iter()
                .zip(&inst.demand[i])
                .map(|(x, d)| {
                    level = level + x - d;
                    level
                })
                .collect()
        })
        .collect();
    Ok(InventoryTrajectory { levels })
}

/// Inventory recursion in which unmet demand is recorded as shortfall and
/// stock restarts from zero. For feasible schedules it agrees with
/// [`inventory_trajectory`] and the shortfall is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampedInventory {
    pub levels: Matrix,
    pub shortfall: Matrix,
}

pub fn clamped_inventory(inst: &Instance, sched: &ProductionSchedule) -> Result<ClampedInventory> {
    sched.check_shape(inst)?;
    let (n, q) = (inst.n_products(), inst.n_periods());
    let mut levels = zeros(n, q);
    let mut shortfall = zeros(n, q);
    for i in 0..n {
        let mut level = inst.initial_inventory[i];
        for t in 0..q {
            let next = level + sched.x[i][t] - inst.demand[i][t];
            level = next.max(0.0);
            levels[i][t] = level;
            shortfall[i][t] = (-next).max(0.0);
        }
    }
    Ok(ClampedInventory { levels, shortfall })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    NegativeProduction { product: usize, period: usize, value: f64 },
    CapacityExceeded { period: usize, load: f64, capacity: f64 },
    NegativeInventory { product: usize, period: usize, level: f64 },
    NonzeroTerminalInventory { product: usize, level: f64 },
    Fractional { product: usize, period: usize, value: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let label = crate::product_label;
        match self {
            Violation::NegativeProduction { product, period, value } => {
                write!(f, "negative production {value} for product {} in period {}", label(*product), period + 1)
            }
            Violation::CapacityExceeded { period, load, capacity } => {
                write!(f, "period {} loads {load} packages against capacity {capacity}", period + 1)
            }
            Violation::NegativeInventory { product, period, level } => {
                write!(f, "inventory of product {} falls to {level} at the end of period {}", label(*product), period + 1)
            }
            Violation::NonzeroTerminalInventory { product, level } => {
                write!(f, "product {} ends the horizon with {level} packages in stock", label(*product))
            }
            Violation::Fractional { product, period, value } => {
                write!(f, "fractional production {value} for product {} in period {}", label(*product), period + 1)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn feasibility_report(inst: &Instance, sched: &ProductionSchedule) -> Result<FeasibilityReport> {
    let traj = inventory_trajectory(inst, sched)?;
    let (n, q) = (inst.n_products(), inst.n_periods());
    let mut violations = Vec::new();
    for i in 0..n {
        for t in 0..q {
            let v = sched.x[i][t];
            if v < -FEAS_TOL {
                violations.push(Violation::NegativeProduction { product: i, period: t, value: v });
            }
            if sched.integer_mode && (v - v.round()).abs() > FEAS_TOL {
                violations.push(Violation::Fractional { product: i, period: t, value: v });
            }
        }
    }
    for (t, load) in sched.period_totals().into_iter().enumerate() {
        if load > inst.capacity[t] + FEAS_TOL {
            violations.push(Violation::CapacityExceeded {
                period: t,
                load,
                capacity: inst.capacity[t],
            });
        }
    }
    for (i, row) in traj.levels.iter().enumerate() {
        for (t, &level) in row.iter().enumerate() {
            if level < -FEAS_TOL {
                violations.push(Violation::NegativeInventory { product: i, period: t, level });
            }
        }
        let terminal = row[q - 1];
        if terminal.abs() > FEAS_TOL {
            violations.push(Violation::NonzeroTerminalInventory { product: i, level: terminal });
        }
    }
    Ok(FeasibilityReport { violations })
}

pub(crate) fn ensure_feasible(inst: &Instance, sched: &ProductionSchedule) -> Result<()> {
    let report = feasibility_report(inst, sched)?;
    match report.violations.first() {
        None => Ok(()),
        Some(v) => Err(Error::Infeasible(format!(
            "schedule has {} violation(s), first: {v}",
            report.violations.len()
        ))),
    }
}

/// Kilograms of material needed per period, materials x periods.
pub fn material_requirements(inst: &Instance, sched: &ProductionSchedule) -> Result<Matrix> {
    sched.check_shape(inst)?;
    Ok((0..inst.n_materials())
        .map(|j| {
            (0..inst.n_periods())
                .map(|t| material_kg(inst, &sched.x, j, t))
                .collect()
        })
        .collect())
}

/// Kilograms of material `j` used by period `t` of `x`.
#[inline]
pub(crate) fn material_kg(inst: &Instance, x: &Matrix, j: usize, t: usize) -> f64 {
    inst.consumption[j]
        .iter()
        .zip(x)
        .map(|(w, row)| w * row[t])
        .sum()
}

/// Revenue, cost and profit figures for one schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfitBreakdown {
    pub revenue: f64,
    pub material_cost: f64,
    pub inventory_cost: f64,
    pub variable_cost: f64,
    pub fixed_cost: f64,
    pub profit: f64,
    /// Kilograms consumed over kilograms purchased.
    pub utilization: f64,
}

impl ProfitBreakdown {
    pub(crate) fn assemble(
        revenue: f64,
        material_cost: f64,
        inventory_cost: f64,
        variable_cost: f64,
        fixed_cost: f64,
        utilization: f64,
    ) -> Self {
        Self {
            revenue,
            material_cost,
            inventory_cost,
            variable_cost,
            fixed_cost,
            profit: revenue - material_cost - inventory_cost - variable_cost - fixed_cost,
            utilization,
        }
    }

    pub fn below_floor(&self, floor: f64) -> bool {
        self.utilization < floor
    }
}

/// Holding cost charged on start-of-period stock, initial inventory included.
pub fn inventory_cost(inst: &Instance, start_levels: &Matrix) -> f64 {
    (0..inst.n_periods())
        .map(|t| inst.holding_cost[t] * start_levels.iter().map(|r| r[t]).sum::<f64>())
        .sum()
}

/// Schedule-dependent terms other than material cost: revenue, inventory,
/// variable and fixed cost.
pub(crate) struct OperatingTerms {
    pub revenue: f64,
    pub inventory_cost: f64,
    pub variable_cost: f64,
    pub fixed_cost: f64,
}

pub(crate) fn operating_terms(inst: &Instance, x: &Matrix) -> OperatingTerms {
    let (n, q) = (inst.n_products(), inst.n_periods());
    let mut revenue = 0.0;
    let mut produced = 0.0;
    for (i, row) in x.iter().enumerate() {
        let total: f64 = row.iter().sum();
        revenue += inst.prices[i] * total;
        produced += total;
    }
    let mut inventory_cost = 0.0;
    for t in 0..q {
        let mut stock = 0.0;
        for i in 0..n {
            stock += start_stock(inst, x, i, t);
        }
        inventory_cost += inst.holding_cost[t] * stock;
    }
    OperatingTerms {
        revenue,
        inventory_cost,
        variable_cost: inst.variable_cost * produced,
        fixed_cost: inst.fixed_cost * q as f64,
    }
}

/// Stock of product `i` at the start of period `t`.
#[inline]
fn start_stock(inst: &Instance, x: &Matrix, i: usize, t: usize) -> f64 {
    x[i][..t]
        .iter()
        .zip(&inst.demand[i][..t])
        .fold(inst.initial_inventory[i], |level, (made, demand)| level + made - demand)
}

/// Profit with material charged per kilogram actually used (no lot rounding).
pub fn linear_profit(inst: &Instance, sched: &ProductionSchedule) -> Result<ProfitBreakdown> {
    ensure_feasible(inst, sched)?;
    let ops = operating_terms(inst, &sched.x);
    let mut material_cost = 0.0;
    for j in 0..inst.n_materials() {
        let kg: f64 = (0..inst.n_periods()).map(|t| material_kg(inst, &sched.x, j, t)).sum();
        material_cost += inst.material_prices[j] * kg;
    }
    Ok(ProfitBreakdown::assemble(
        ops.revenue,
        material_cost,
        ops.inventory_cost,
        ops.variable_cost,
        ops.fixed_cost,
        1.0,
    ))
}

/// Options for [`build_linear_model_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelOptions {
    /// Tag production variables as integer.
    pub integer: bool,
    /// Also tag inventory variables; only needed for non-integral data.
    pub tag_inventory: bool,
}

/// Index helpers for the variables of [`build_linear_model`].
#[derive(Debug, Clone, Copy)]
pub struct ModelLayout {
    pub n_products: usize,
    pub n_periods: usize,
}

impl ModelLayout {
    pub fn of(inst: &Instance) -> Self {
        Self {
            n_products: inst.n_products(),
            n_periods: inst.n_periods(),
        }
    }

    pub fn production(&self, i: usize, t: usize) -> usize {
        i * self.n_periods + t
    }

    pub fn inventory(&self, i: usize, t: usize) -> usize {
        self.n_products * self.n_periods + i * self.n_periods + t
    }

    /// Reads the production matrix out of a solution vector.
    pub fn schedule(&self, values: &[f64], integer_mode: bool) -> ProductionSchedule {
        let x = (0..self.n_products)
            .map(|i| {
                (0..self.n_periods)
                    .map(|t| {
                        let v = values[self.production(i, t)];
                        let v = if integer_mode { v.round() } else { v };
                        // Avoid -0.0 and tiny negatives from the solver.
                        if v.abs() < 1e-12 { 0.0 } else { v }
                    })
                    .collect()
            })
            .collect();
        ProductionSchedule::new(x, integer_mode)
    }
}

pub fn build_linear_model(inst: &Instance, integer: bool) -> LinearModel {
    build_linear_model_with(
        inst,
        ModelOptions {
            integer,
            tag_inventory: false,
        },
    )
}

/// Production `X[i][t]` and end-of-period inventory `I[i][t]` variables with
/// capacity rows, balance equalities `I[t-1] + X[t] - I[t] = D[t]`, and
/// terminal inventory fixed at zero. The objective is the linear profit:
/// `I[i][t]` carries the holding cost of period `t + 1`, and the holding cost
/// of the initial inventory sits in the constant next to the fixed cost.
pub fn build_linear_model_with(inst: &Instance, opts: ModelOptions) -> LinearModel {
    let (n, q) = (inst.n_products(), inst.n_periods());
    let layout = ModelLayout::of(inst);
    let mut model = LinearModel::new();
    for i in 0..n {
        let unit_material: f64 = (0..inst.n_materials())
            .map(|j| inst.material_prices[j] * inst.consumption[j][i])
            .sum();
        for t in 0..q {
            let v = model.add_variable(format!("X[{i}][{t}]"), 0.0, f64::INFINITY, opts.integer);
            model.set_objective(v, inst.prices[i] - inst.variable_cost - unit_material);
        }
    }
    for i in 0..n {
        for t in 0..q {
            let upper = if t + 1 == q { 0.0 } else { f64::INFINITY };
            let v = model.add_variable(
                format!("I[{i}][{t}]"),
                0.0,
                upper,
                opts.integer && opts.tag_inventory,
            );
            if t + 1 < q {
                model.set_objective(v, -inst.holding_cost[t + 1]);
            }
        }
    }
    let initial_stock: f64 = inst.initial_inventory.iter().sum();
    model.constant = -(inst.fixed_cost * q as f64) - inst.holding_cost[0] * initial_stock;

    for t in 0..q {
        let terms = (0..n).map(|i| (layout.production(i, t), 1.0)).collect();
        model
            .add_constraint(format!("capacity[{t}]"), terms, Relation::Le, inst.capacity[t])
            .expect("indices in range");
    }
    for i in 0..n {
        for t in 0..q {
            let mut terms = vec![(layout.production(i, t), 1.0), (layout.inventory(i, t), -1.0)];
            let mut rhs = inst.demand[i][t];
            if t == 0 {
                rhs -= inst.initial_inventory[i];
            } else {
                terms.push((layout.inventory(i, t - 1), 1.0));
            }
            model
                .add_constraint(format!("balance[{i}][{t}]"), terms, Relation::Eq, rhs)
                .expect("indices in range");
        }
    }
    model
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{paper_base_instance, Dimensions};

    fn single(d: Vec<f64>, i0: f64, cap: Vec<f64>) -> Instance {
        let q = d.len();
        Instance {
            dims: Dimensions::new(1, 0, q),
            prices: vec![10.0],
            demand: vec![d],
            initial_inventory: vec![i0],
            capacity: cap,
            holding_cost: vec![1.0; q],
            variable_cost: 1.0,
            fixed_cost: 0.0,
            lot_weights: vec![],
            material_prices: vec![],
            consumption: vec![],
            utilization_floor: 0.9,
        }
    }

    #[test]
    fn two_step_recursion() {
        let inst = single(vec![4.0, 5.0], 2.0, vec![10.0, 10.0]);
        let s = ProductionSchedule::new(vec![vec![3.0, 4.0]], true);
        assert_eq!(inventory_trajectory(&inst, &s).unwrap().levels, vec![vec![1.0, 0.0]]);
    }

    #[test]
    fn producing_demand_keeps_zero_stock() {
        let inst = single(vec![3.0, 1.0, 2.0], 0.0, vec![5.0; 3]);
        let s = ProductionSchedule::new(vec![vec![3.0, 1.0, 2.0]], true);
        let traj = inventory_trajectory(&inst, &s).unwrap();
        assert!(traj.levels[0].iter().all(|&v| v == 0.0));
        assert!(feasibility_report(&inst, &s).unwrap().is_feasible());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let inst = single(vec![1.0, 1.0], 0.0, vec![2.0, 2.0]);
        let s = ProductionSchedule::new(vec![vec![1.0]], true);
        assert!(matches!(inventory_trajectory(&inst, &s), Err(Error::Shape(_))));
    }

    #[test]
    fn starvation_is_reported() {
        let inst = paper_base_instance(1);
        let s = ProductionSchedule::zeros(&inst, true);
        let report = feasibility_report(&inst, &s).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NegativeInventory { .. })));
    }

    #[test]
    fn all_violation_kinds_are_detected() {
        let inst = single(vec![1.0, 1.0], 0.0, vec![2.0, 2.0]);
        let s = ProductionSchedule::new(vec![vec![3.5, -0.5]], true);
        let r = feasibility_report(&inst, &s).unwrap();
        let has = |f: fn(&Violation) -> bool| r.violations.iter().any(f);
        assert!(has(|v| matches!(v, Violation::NegativeProduction { .. })));
        assert!(has(|v| matches!(v, Violation::CapacityExceeded { .. })));
        assert!(has(|v| matches!(v, Violation::Fractional { .. })));
        assert!(has(|v| matches!(v, Violation::NonzeroTerminalInventory { .. })));
    }

    #[test]
    fn fixed_cost_only_when_nothing_happens() {
        let mut inst = single(vec![0.0, 0.0, 0.0], 0.0, vec![1.0; 3]);
        inst.fixed_cost = 50.0;
        let p = linear_profit(&inst, &ProductionSchedule::zeros(&inst, true)).unwrap();
        assert_eq!(p.profit, -150.0);
        assert_eq!(p.utilization, 1.0);
    }

    #[test]
    fn single_package_profit() {
        let inst = single(vec![1.0], 0.0, vec![1.0]);
        let p = linear_profit(&inst, &ProductionSchedule::new(vec![vec![1.0]], true)).unwrap();
        assert_eq!(p.profit, 9.0);
    }

    #[test]
    fn infeasible_schedule_has_no_profit() {
        let inst = single(vec![1.0], 0.0, vec![1.0]);
        let err = linear_profit(&inst, &ProductionSchedule::new(vec![vec![0.0]], true)).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn scalar_material_requirement() {
        let mut inst = single(vec![3.0], 0.0, vec![3.0]);
        inst.dims.n_materials = 1;
        inst.lot_weights = vec![5.0];
        inst.material_prices = vec![1.0];
        inst.consumption = vec![vec![2.0]];
        let s = ProductionSchedule::new(vec![vec![3.0]], true);
        assert_eq!(material_requirements(&inst, &s).unwrap(), vec![vec![6.0]]);
        let z = ProductionSchedule::zeros(&inst, true);
        assert_eq!(material_requirements(&inst, &z).unwrap(), vec![vec![0.0]]);
    }

    #[test]
    fn single_period_model_shape() {
        let inst = single(vec![2.0], 0.0, vec![5.0]);
        let m = build_linear_model(&inst, true);
        let xs: Vec<_> = m.variables.iter().filter(|v| v.name.starts_with('X')).collect();
        assert_eq!(xs.len(), 1);
        assert_eq!(m.constraints.iter().filter(|c| c.name.starts_with("capacity")).count(), 1);
        assert_eq!(m.constraints.iter().filter(|c| c.name.starts_with("balance")).count(), 1);
        // X - I = 2 with I fixed at zero.
        assert!(m.is_feasible(&[2.0, 0.0], 1e-12));
        assert!(!m.is_feasible(&[3.0, 0.0], 1e-12));
    }

    #[test]
    fn base_model_counts_and_constant() {
        let inst = paper_base_instance(1);
        let m = build_linear_model(&inst, true);
        assert_eq!(m.variables.iter().filter(|v| v.name.starts_with('X')).count(), 36);
        assert_eq!(m.variables.iter().filter(|v| v.name.starts_with('I')).count(), 36);
        assert_eq!(m.integer_vars().count(), 36);
        assert_eq!(m.constraints.iter().filter(|c| c.name.starts_with("capacity")).count(), 6);
        assert_eq!(m.constraints.iter().filter(|c| c.name.starts_with("balance")).count(), 36);
        let mut free = inst.clone();
        free.fixed_cost = 0.0;
        let shift = m.constant - build_linear_model(&free, true).constant;
        assert_eq!(shift, -532800.0);
        assert_eq!(m.constant, -532800.0 - 3.0 * 15178.0);
    }

    #[test]
    fn model_objective_equals_linear_profit() {
        let inst = paper_base_instance(3);
        let layout = ModelLayout::of(&inst);
        let s = crate::search::seed_schedule(&inst, 5, true).unwrap();
        let traj = inventory_trajectory(&inst, &s).unwrap();
        let mut values = vec![0.0; 72];
        for i in 0..6 {
            for t in 0..6 {
                values[layout.production(i, t)] = s.x[i][t];
                values[layout.inventory(i, t)] = traj.levels[i][t];
            }
        }
        let m = build_linear_model(&inst, true);
        assert!(m.is_feasible(&values, 1e-9));
        let profit = linear_profit(&inst, &s).unwrap().profit;
        assert!((m.evaluate_objective(&values) - profit).abs() < 1e-6 * profit.abs());
    }
}
