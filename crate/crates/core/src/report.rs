//! Side-by-side comparison of the three solution paths, fixture replay, and
//! rendering to text tables, CSV, or JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristic::{fractional_lots, purchase_plan, run_heuristic};
use crate::instance::Instance;
use crate::milp::MilpConfig;
use crate::product_label;
use crate::schedule::{
    clamped_inventory, feasibility_report, inventory_cost, inventory_trajectory, ProductionSchedule, ProfitBreakdown,
};
use crate::search::{integer_ladder, multi_start_from, true_profit, SearchConfig, StartKind};
use crate::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    MilpHeuristic,
    NlpInteger,
    NlpRelaxed,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::MilpHeuristic => "milp-heuristic",
            ModelKind::NlpInteger => "nlp-integer",
            ModelKind::NlpRelaxed => "nlp-relaxed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: ModelKind,
    pub schedule: ProductionSchedule,
    /// Stock at the start of each period, products x periods.
    pub start_inventory: Matrix,
    pub production_totals: Vec<f64>,
    pub inventory_totals: Vec<f64>,
    pub purchased_lots: Matrix,
    pub leftover_lots: Matrix,
    pub breakdown: ProfitBreakdown,
}

impl ModelResult {
    fn evaluate(inst: &Instance, model: ModelKind, schedule: ProductionSchedule) -> Result<Self> {
        let breakdown = true_profit(inst, &schedule)?;
        let plan = purchase_plan(&fractional_lots(inst, &schedule)?)?;
        let start_inventory = inventory_trajectory(inst, &schedule)?.start_of_period(inst);
        Ok(Self {
            model,
            production_totals: schedule.period_totals(),
            inventory_totals: column_sums(&start_inventory),
            start_inventory,
            purchased_lots: plan.purchased_lots,
            leftover_lots: plan.leftover,
            schedule,
            breakdown,
        })
    }
}

fn column_sums(m: &Matrix) -> Vec<f64> {
    let q = m.first().map_or(0, Vec::len);
    (0..q).map(|t| m.iter().map(|r| r[t]).sum()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub milp: MilpConfig,
    pub search: SearchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub instance_digest: String,
    pub n_products: usize,
    pub n_periods: usize,
    pub config: ConfigEcho,
    /// Fixed order: heuristic, integer search, relaxed search.
    pub models: Vec<ModelResult>,
    pub warnings: Vec<String>,
}

/// Runs the heuristic, integer multi-start, and relaxed multi-start (seeded
/// with the integer incumbent) on the same instance.
pub fn compare_models(inst: &Instance, milp_cfg: &MilpConfig, search_cfg: &SearchConfig) -> Result<ComparisonReport> {
    let attribute = |model: ModelKind| move |e: Error| match e {
        Error::Infeasible(msg) => Error::Infeasible(format!("{}: {msg}", model.label())),
        Error::Validation(msg) => Error::Validation(format!("{}: {msg}", model.label())),
        other => other,
    };
    let heuristic = run_heuristic(inst, milp_cfg).map_err(attribute(ModelKind::MilpHeuristic))?;

    let milp_start = || {
        if search_cfg.include_milp_start {
            vec![(StartKind::Milp, heuristic.schedule.clone())]
        } else {
            Vec::new()
        }
    };
    let int_cfg = SearchConfig {
        integer_mode: true,
        ladder: integer_ladder(&search_cfg.ladder),
        ..search_cfg.clone()
    };
    let integer = multi_start_from(inst, &int_cfg, milp_start()).map_err(attribute(ModelKind::NlpInteger))?;

    let rel_cfg = SearchConfig {
        integer_mode: false,
        ..search_cfg.clone()
    };
    let mut injected = milp_start();
    injected.push((StartKind::Incumbent, integer.best_schedule.clone()));
    let relaxed = multi_start_from(inst, &rel_cfg, injected).map_err(attribute(ModelKind::NlpRelaxed))?;

    let models = vec![
        ModelResult::evaluate(inst, ModelKind::MilpHeuristic, heuristic.schedule.clone())?,
        ModelResult::evaluate(inst, ModelKind::NlpInteger, integer.best_schedule)?,
        ModelResult::evaluate(inst, ModelKind::NlpRelaxed, relaxed.best_schedule)?,
    ];
    let mut warnings = Vec::new();
    for m in &models {
        if m.breakdown.below_floor(inst.utilization_floor) {
            warnings.push(format!(
                "{}: material utilization {} is below the floor {}",
                m.model.label(),
                fmt_percent(m.breakdown.utilization),
                fmt_percent(inst.utilization_floor)
            ));
        }
    }
    warnings.push(format!(
        "milp-heuristic: linear-model profit before lot rounding is {}",
        fmt_num(heuristic.model_profit)
    ));
    Ok(ComparisonReport {
        instance_digest: inst.digest(),
        n_products: inst.n_products(),
        n_periods: inst.n_periods(),
        config: ConfigEcho {
            milp: *milp_cfg,
            search: search_cfg.clone(),
        },
        models,
        warnings,
    })
}

/// Arithmetic replay of a given schedule, feasible or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub instance_digest: String,
    pub schedule: ProductionSchedule,
    pub note: Option<String>,
    /// Start-of-period stock with shortfalls clamped to zero.
    pub start_inventory: Matrix,
    /// Unmet demand per product and period.
    pub shortfall: Matrix,
    pub production_totals: Vec<f64>,
    pub inventory_totals: Vec<f64>,
    pub product_totals: Vec<f64>,
    /// Demand net of initial inventory per product.
    pub net_demand: Vec<f64>,
    pub inventory_cost: f64,
    pub violations: Vec<String>,
    /// Lot-quantized profit, only for feasible schedules.
    pub breakdown: Option<ProfitBreakdown>,
}

/// Recomputes per-period totals, inventory and holding cost for `sched`.
/// Unmet demand does not drive stock negative; it is reported as shortfall
/// and as feasibility violations.
pub fn replay(inst: &Instance, sched: &ProductionSchedule, note: Option<String>) -> Result<ReplayReport> {
    let clamped = clamped_inventory(inst, sched)?;
    let start_inventory: Matrix = clamped
        .levels
        .iter()
        .enumerate()
        .map(|(i, row)| {
            std::iter::once(inst.initial_inventory[i])
                .chain(row[..row.len() - 1].iter().copied())
                .collect()
        })
        .collect();
    let report = feasibility_report(inst, sched)?;
    let breakdown = if report.is_feasible() {
        Some(true_profit(inst, sched)?)
    } else {
        None
    };
    let net_demand = inst
        .demand
        .iter()
        .zip(&inst.initial_inventory)
        .map(|(row, i0)| row.iter().sum::<f64>() - i0)
        .collect();
    Ok(ReplayReport {
        instance_digest: inst.digest(),
        note,
        production_totals: sched.period_totals(),
        inventory_totals: column_sums(&start_inventory),
        product_totals: sched.product_totals(),
        net_demand,
        inventory_cost: inventory_cost(inst, &start_inventory),
        start_inventory,
        shortfall: clamped.shortfall,
        violations: report.violations.iter().map(ToString::to_string).collect(),
        breakdown,
        schedule: sched.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    TableText,
    Csv,
    Structured,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table-text" | "text" => Ok(ReportFormat::TableText),
            "csv" => Ok(ReportFormat::Csv),
            "structured" | "json" => Ok(ReportFormat::Structured),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Integers print without decimals, other values with up to four.
pub fn fmt_num(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 && v.abs() < 1e15 {
        format!("{}", v.round() as i64)
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn fmt_percent(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(product_label).collect()
}

/// Writes `m` (rows = products) transposed so periods run down the page.
fn text_by_period(out: &mut String, m: &Matrix) {
    let n = m.len();
    let q = m.first().map_or(0, Vec::len);
    let _ = writeln!(out, "Period, {}", labels(n).join(", "));
    for t in 0..q {
        let row: Vec<String> = m.iter().map(|r| fmt_num(r[t])).collect();
        let _ = writeln!(out, "{}, {}", t + 1, row.join(", "));
    }
}

fn render_comparison_text(r: &ComparisonReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Instance: {}", r.instance_digest);
    let _ = writeln!(out);
    let _ = writeln!(out, "Master schedule (packages)");
    for m in &r.models {
        let _ = writeln!(out, "Model: {}", m.model.label());
        text_by_period(&mut out, &m.schedule.x);
        let _ = writeln!(out, "Profit, {}", fmt_num(m.breakdown.profit));
        let _ = writeln!(out, "Material cost, {}", fmt_num(m.breakdown.material_cost));
        let _ = writeln!(out, "Utilization, {}", fmt_percent(m.breakdown.utilization));
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "Inventory levels (start of period)");
    for m in &r.models {
        let _ = writeln!(out, "Model: {}", m.model.label());
        text_by_period(&mut out, &m.start_inventory);
        let _ = writeln!(out, "Total Cost, {}", fmt_num(m.breakdown.inventory_cost));
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "Totals per period");
    let header: Vec<String> = r
        .models
        .iter()
        .flat_map(|m| {
            [
                format!("Production {}", m.model.label()),
                format!("Inventory {}", m.model.label()),
            ]
        })
        .collect();
    let _ = writeln!(out, "Period, {}", header.join(", "));
    for t in 0..r.n_periods {
        let cells: Vec<String> = r
            .models
            .iter()
            .flat_map(|m| [fmt_num(m.production_totals[t]), fmt_num(m.inventory_totals[t])])
            .collect();
        let _ = writeln!(out, "{}, {}", t + 1, cells.join(", "));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Profit breakdown");
    let _ = writeln!(
        out,
        "Model, Revenue, Material cost, Inventory cost, Variable cost, Fixed cost, Profit, Utilization"
    );
    for m in &r.models {
        let b = &m.breakdown;
        let _ = writeln!(
            out,
            "{}, {}, {}, {}, {}, {}, {}, {}",
            m.model.label(),
            fmt_num(b.revenue),
            fmt_num(b.material_cost),
            fmt_num(b.inventory_cost),
            fmt_num(b.variable_cost),
            fmt_num(b.fixed_cost),
            fmt_num(b.profit),
            fmt_percent(b.utilization)
        );
    }
    if !r.warnings.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "Warnings");
        for w in &r.warnings {
            let _ = writeln!(out, "- {w}");
        }
    }
    out
}

fn render_replay_text(r: &ReplayReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Instance: {}", r.instance_digest);
    if let Some(note) = &r.note {
        let _ = writeln!(out, "Note: {note}");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Master schedule (packages)");
    text_by_period(&mut out, &r.schedule.x);
    let _ = writeln!(out);
    let _ = writeln!(out, "Inventory levels (start of period)");
    text_by_period(&mut out, &r.start_inventory);
    let _ = writeln!(out, "Total Cost, {}", fmt_num(r.inventory_cost));
    let _ = writeln!(out);
    let _ = writeln!(out, "Totals per period");
    let _ = writeln!(out, "Period, Total Production, Total Inventory");
    for (t, (p, i)) in r.production_totals.iter().zip(&r.inventory_totals).enumerate() {
        let _ = writeln!(out, "{}, {}, {}", t + 1, fmt_num(*p), fmt_num(*i));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Horizon totals per product");
    let _ = writeln!(out, "Product, Produced, Demand net of initial inventory");
    for (i, (p, d)) in r.product_totals.iter().zip(&r.net_demand).enumerate() {
        let _ = writeln!(out, "{}, {}, {}", product_label(i), fmt_num(*p), fmt_num(*d));
    }
    if let Some(b) = &r.breakdown {
        let _ = writeln!(out);
        let _ = writeln!(out, "Profit, {}", fmt_num(b.profit));
        let _ = writeln!(out, "Material cost, {}", fmt_num(b.material_cost));
        let _ = writeln!(out, "Utilization, {}", fmt_percent(b.utilization));
    }
    if !r.violations.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "Violations");
        for v in &r.violations {
            let _ = writeln!(out, "- {v}");
        }
    }
    out
}

/// Named CSV sections. Each starts with `# <name>`, then a header row whose
/// first cell names the row label, then data rows; sections are separated by
/// a blank line. Values use Rust's shortest round-trip formatting.
#[derive(Debug, Default)]
struct CsvWriter {
    out: String,
}

impl CsvWriter {
    fn section(&mut self, name: &str, header: &[String], rows: Vec<(String, Vec<f64>)>) {
        if !self.out.is_empty() {
            self.out.push('\n');
        }
        let _ = writeln!(self.out, "# {name}");
        let _ = writeln!(self.out, "{}", header.join(","));
        for (label, values) in rows {
            let cells: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(self.out, "{label},{}", cells.join(","));
        }
    }

    /// Products as columns, one row per period.
    fn by_period(&mut self, name: &str, m: &Matrix, col_labels: Vec<String>) {
        let q = m.first().map_or(0, Vec::len);
        let mut header = vec!["period".to_string()];
        header.extend(col_labels);
        let rows = (0..q)
            .map(|t| ((t + 1).to_string(), m.iter().map(|r| r[t]).collect()))
            .collect();
        self.section(name, &header, rows);
    }
}

fn material_labels(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("M{}", j + 1)).collect()
}

fn render_comparison_csv(r: &ComparisonReport) -> String {
    let mut w = CsvWriter::default();
    for m in &r.models {
        let label = m.model.label();
        w.by_period(&format!("schedule/{label}"), &m.schedule.x, labels(r.n_products));
        w.by_period(&format!("inventory/{label}"), &m.start_inventory, labels(r.n_products));
        let n_mat = m.purchased_lots.len();
        w.by_period(&format!("purchased-lots/{label}"), &m.purchased_lots, material_labels(n_mat));
        w.by_period(&format!("leftover-lots/{label}"), &m.leftover_lots, material_labels(n_mat));
    }
    let totals: Matrix = r
        .models
        .iter()
        .flat_map(|m| [m.production_totals.clone(), m.inventory_totals.clone()])
        .collect();
    let totals_header: Vec<String> = r
        .models
        .iter()
        .flat_map(|m| [format!("production/{}", m.model.label()), format!("inventory/{}", m.model.label())])
        .collect();
    w.by_period("totals", &totals, totals_header);
    let header: Vec<String> = [
        "model",
        "revenue",
        "material_cost",
        "inventory_cost",
        "variable_cost",
        "fixed_cost",
        "profit",
        "utilization",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows = r
        .models
        .iter()
        .map(|m| {
            let b = &m.breakdown;
            (
                m.model.label().to_string(),
                vec![
                    b.revenue,
                    b.material_cost,
                    b.inventory_cost,
                    b.variable_cost,
                    b.fixed_cost,
                    b.profit,
                    b.utilization,
                ],
            )
        })
        .collect();
    w.section("summary", &header, rows);
    w.out
}

fn render_replay_csv(r: &ReplayReport) -> String {
    let mut w = CsvWriter::default();
    let n = r.schedule.x.len();
    w.by_period("schedule", &r.schedule.x, labels(n));
    w.by_period("inventory", &r.start_inventory, labels(n));
    w.by_period("shortfall", &r.shortfall, labels(n));
    w.by_period(
        "totals",
        &vec![r.production_totals.clone(), r.inventory_totals.clone()],
        vec!["production".into(), "inventory".into()],
    );
    let rows = vec![("inventory_cost".to_string(), vec![r.inventory_cost])];
    w.section("summary", &["item".to_string(), "value".to_string()], rows);
    w.out
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

pub fn render_report(report: &ComparisonReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::TableText => render_comparison_text(report),
        ReportFormat::Csv => render_comparison_csv(report),
        ReportFormat::Structured => to_json(report),
    }
}

pub fn render_replay(report: &ReplayReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::TableText => render_replay_text(report),
        ReportFormat::Csv => render_replay_csv(report),
        ReportFormat::Structured => to_json(report),
    }
}

/// Parses CSV produced by the renderers back into named sections. Each
/// section is returned column-major as written: one vector per data row,
/// row labels dropped.
pub fn parse_csv_sections(text: &str) -> Result<BTreeMap<String, Vec<Vec<f64>>>> {
    let mut out = BTreeMap::new();
    let mut current: Option<(String, Vec<Vec<f64>>)> = None;
    let mut header_pending = false;
    for line in text.lines() {
        if let Some(name) = line.strip_prefix("# ") {
            if let Some((k, v)) = current.take() {
                out.insert(k, v);
            }
            current = Some((name.to_string(), Vec::new()));
            header_pending = true;
        } else if line.is_empty() {
            continue;
        } else if header_pending {
            header_pending = false;
        } else {
            let (_, rows) = current
                .as_mut()
                .ok_or_else(|| Error::Schema("csv data before a section header".into()))?;
            let values = line
                .split(',')
                .skip(1)
                .map(|c| c.parse::<f64>().map_err(|e| Error::Schema(format!("bad csv cell `{c}`: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(values);
        }
    }
    if let Some((k, v)) = current {
        out.insert(k, v);
    }
    Ok(out)
}
