//! Lot-quantized ("true") profit and its optimization by multi-start local
//! search over production transfers between periods.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristic::{fractional_lots, lot_profit_unchecked, purchase_plan, run_heuristic, updated_profit};
use crate::instance::Instance;
use crate::milp::MilpConfig;
use crate::schedule::{ensure_feasible, ProductionSchedule, ProfitBreakdown, FEAS_TOL};
use crate::{zeros, Matrix};

/// Profit with material bought in whole lots and leftovers carried forward.
pub fn true_profit(inst: &Instance, sched: &ProductionSchedule) -> Result<ProfitBreakdown> {
    let plan = purchase_plan(&fractional_lots(inst, sched)?)?;
    updated_profit(inst, sched, &plan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub starts: usize,
    pub seed: u64,
    /// Objective evaluations allowed per start.
    pub budget: usize,
    pub integer_mode: bool,
    /// Transfer sizes in packages, strictly decreasing.
    pub ladder: Vec<f64>,
    pub include_milp_start: bool,
    /// Worker threads for independent starts; 0 uses the global pool, 1 runs
    /// sequentially. Never changes results, so it is not serialized.
    #[serde(skip_serializing, default)]
    pub threads: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            seed: 0,
            budget: 20_000,
            integer_mode: true,
            ladder: vec![1000.0, 100.0, 10.0, 1.0],
            include_milp_start: true,
            threads: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 || self.budget == 0 {
            return Err(Error::Validation("starts and budget must be at least 1".into()));
        }
        if self.ladder.is_empty()
            || self.ladder.iter().any(|s| !(s.is_finite() && *s > 0.0))
            || self.ladder.windows(2).any(|w| w[0] <= w[1])
        {
            return Err(Error::Validation("ladder must be strictly decreasing and positive".into()));
        }
        if self.integer_mode && self.ladder.iter().any(|s| s.fract() != 0.0) {
            return Err(Error::Validation("integer mode needs whole-package ladder steps".into()));
        }
        Ok(())
    }

    /// Steps actually swept: in relaxed mode the ladder continues below its
    /// last rung with tenths and hundredths of it.
    pub fn effective_ladder(&self) -> Vec<f64> {
        let mut ladder = self.ladder.clone();
        if !self.integer_mode {
            let last = *ladder.last().expect("validated non-empty");
            ladder.extend([last / 10.0, last / 100.0]);
        }
        ladder
    }
}

/// Origin of a local-search start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "seed", rename_all = "kebab-case")]
pub enum StartKind {
    /// Schedule of the integer linear model.
    Milp,
    /// Best schedule of an integer-mode run, injected into a relaxed run.
    Incumbent,
    Seeded(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub start: StartKind,
    pub start_value: f64,
    pub final_value: f64,
    pub evaluations: usize,
    /// Accepted objective values, in order.
    pub trajectory: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best_schedule: ProductionSchedule,
    pub best: ProfitBreakdown,
    /// Index into `starts` of the winning start.
    pub best_start: usize,
    pub starts: Vec<StartSummary>,
    #[serde(skip)]
    pub wall_time: Duration,
}

// Wall time is excluded: equal outcomes may take different time.
impl PartialEq for SearchOutcome {
    fn eq(&self, other: &Self) -> bool {
        self.best_schedule == other.best_schedule
            && self.best == other.best
            && self.best_start == other.best_start
            && self.starts == other.starts
    }
}

impl SearchOutcome {
    /// Line-oriented trace of every start: kind, start and final value, then
    /// the accepted values.
    pub fn trace(&self) -> String {
        let mut out = String::new();
        for (k, s) in self.starts.iter().enumerate() {
            let kind = match s.start {
                StartKind::Milp => "milp".to_string(),
                StartKind::Incumbent => "incumbent".to_string(),
                StartKind::Seeded(seed) => format!("seed={seed}"),
            };
            out.push_str(&format!(
                "start {k} {kind} from {} to {} evals {}:",
                s.start_value, s.final_value, s.evaluations
            ));
            for v in &s.trajectory {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Builds a feasible start: just-in-time production, capacity overflow pushed
/// to earlier periods, then a random number of random early shifts.
pub fn seed_schedule(inst: &Instance, seed: u64, integer_mode: bool) -> Result<ProductionSchedule> {
    if integer_mode && !inst.has_integral_data() {
        return Err(Error::Validation(
            "integer-mode starts need integral demand, inventory and capacity".into(),
        ));
    }
    let (n, q) = (inst.n_products(), inst.n_periods());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = zeros(n, q);
    for (i, row) in x.iter_mut().enumerate() {
        let mut stock = inst.initial_inventory[i];
        for (cell, &d) in row.iter_mut().zip(&inst.demand[i]) {
            if stock >= d {
                stock -= d;
            } else {
                *cell = d - stock;
                stock = 0.0;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    for t in (1..q).rev() {
        let load: f64 = x.iter().map(|r| r[t]).sum();
        let mut excess = load - inst.capacity[t];
        if excess <= 0.0 {
            continue;
        }
        order.shuffle(&mut rng);
        for &i in &order {
            if excess <= 0.0 {
                break;
            }
            let moved = x[i][t].min(excess);
            x[i][t] -= moved;
            x[i][t - 1] += moved;
            excess -= moved;
        }
    }
    let first_load: f64 = x.iter().map(|r| r[0]).sum();
    if first_load > inst.capacity[0] + FEAS_TOL {
        return Err(Error::Infeasible("capacity cannot absorb the forced production".into()));
    }

    if q > 1 {
        let mut load: Vec<f64> = (0..q).map(|t| x.iter().map(|r| r[t]).sum()).collect();
        let shifts = rng.gen_range(0..=2 * n * q);
        for _ in 0..shifts {
            let i = rng.gen_range(0..n);
            let late = rng.gen_range(1..q);
            let early = rng.gen_range(0..late);
            let room = (inst.capacity[early] - load[early]).min(x[i][late]).max(0.0);
            let mut amount = rng.gen_range(0.0..=1.0) * room;
            if integer_mode {
                amount = amount.floor();
            }
            if amount <= 0.0 {
                continue;
            }
            x[i][late] -= amount;
            x[i][early] += amount;
            load[late] -= amount;
            load[early] += amount;
        }
    }
    let sched = ProductionSchedule::new(x, integer_mode);
    ensure_feasible(inst, &sched)?;
    Ok(sched)
}

/// Working state of one descent: the schedule, its per-period loads, and
/// end-of-period inventory.
struct Walker<'a> {
    inst: &'a Instance,
    x: Matrix,
    load: Vec<f64>,
    stock: Matrix,
    value: f64,
    evaluations: usize,
    budget: usize,
    trajectory: Vec<f64>,
}

impl<'a> Walker<'a> {
    fn new(inst: &'a Instance, start: &ProductionSchedule, budget: usize) -> Self {
        let q = inst.n_periods();
        let load = (0..q).map(|t| start.x.iter().map(|r| r[t]).sum()).collect();
        let mut w = Walker {
            inst,
            x: start.x.clone(),
            load,
            stock: Vec::new(),
            value: 0.0,
            evaluations: 0,
            budget,
            trajectory: Vec::new(),
        };
        w.refresh_stock();
        w.value = lot_profit_unchecked(inst, &w.x).profit;
        w
    }

    fn refresh_stock(&mut self) {
        self.stock = self
            .x
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut level = self.inst.initial_inventory[i];
                row.iter()
                    .zip(&self.inst.demand[i])
                    .map(|(x, d)| {
                        level = level + x - d;
                        level
                    })
                    .collect()
            })
            .collect();
    }

    /// Moving `amount` of product `i` from period `from` to period `to`
    /// keeps capacity and nonnegative stock.
    fn can_move(&self, i: usize, from: usize, to: usize, amount: f64) -> bool {
        if self.x[i][from] < amount - 1e-12 {
            return false;
        }
        if self.load[to] + amount > self.inst.capacity[to] + 1e-9 {
            return false;
        }
        if to > from {
            // Producing later drains stock held over [from, to).
            (from..to).all(|t| self.stock[i][t] >= amount - 1e-9)
        } else {
            true
        }
    }

    fn apply(&mut self, i: usize, from: usize, to: usize, amount: f64) {
        self.x[i][from] -= amount;
        self.x[i][to] += amount;
        if self.x[i][from].abs() < 1e-9 {
            self.x[i][from] = 0.0;
        }
        self.load[from] -= amount;
        self.load[to] += amount;
    }

    /// Tries one move; keeps it only if it strictly improves the value.
    fn try_move(&mut self, i: usize, from: usize, to: usize, amount: f64) -> bool {
        let before_from = self.x[i][from];
        let before_to = self.x[i][to];
        let (load_from, load_to) = (self.load[from], self.load[to]);
        self.apply(i, from, to, amount);
        self.evaluations += 1;
        let v = lot_profit_unchecked(self.inst, &self.x).profit;
        if v > self.value + 1e-9 * self.value.abs().max(1.0) {
            self.value = v;
            self.refresh_stock();
            self.trajectory.push(v);
            true
        } else {
            self.x[i][from] = before_from;
            self.x[i][to] = before_to;
            self.load[from] = load_from;
            self.load[to] = load_to;
            false
        }
    }

    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }

    /// First-improvement sweeps at each ladder step until no move improves.
    fn descend(&mut self, ladder: &[f64]) {
        let (n, q) = (self.inst.n_products(), self.inst.n_periods());
        for &step in ladder {
            loop {
                let mut improved = false;
                for i in 0..n {
                    for from in 0..q {
                        for to in 0..q {
                            if from == to || !self.can_move(i, from, to, step) {
                                continue;
                            }
                            if self.exhausted() {
                                return;
                            }
                            improved |= self.try_move(i, from, to, step);
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
        }
    }
}

/// Descends from a feasible `start` using the move families "produce
/// earlier" and "produce later", sweeping the ladder from large to small
/// steps. The result is never worse than the start.
pub fn local_search(inst: &Instance, start: &ProductionSchedule, cfg: &SearchConfig) -> Result<ProductionSchedule> {
    Ok(descend_from(inst, start, cfg)?.0)
}

fn descend_from(inst: &Instance, start: &ProductionSchedule, cfg: &SearchConfig) -> Result<(ProductionSchedule, StartSummary)> {
    cfg.validate()?;
    ensure_feasible(inst, start)?;
    let mut walker = Walker::new(inst, start, cfg.budget);
    let start_value = walker.value;
    walker.descend(&cfg.effective_ladder());
    let sched = ProductionSchedule::new(walker.x, cfg.integer_mode);
    let summary = StartSummary {
        start: StartKind::Seeded(0),
        start_value,
        final_value: walker.value,
        evaluations: walker.evaluations,
        trajectory: walker.trajectory,
    };
    Ok((sched, summary))
}

/// Runs local search from each given start and from `cfg.starts` seeded
/// schedules, in that order, and keeps the best (ties: earliest start).
pub fn multi_start_from(
    inst: &Instance,
    cfg: &SearchConfig,
    injected: Vec<(StartKind, ProductionSchedule)>,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    let clock = Instant::now();
    let mut starts = injected;
    for k in 0..cfg.starts {
        let seed = cfg.seed.wrapping_add(k as u64);
        starts.push((StartKind::Seeded(seed), seed_schedule(inst, seed, cfg.integer_mode)?));
    }
    for (_, s) in &mut starts {
        s.integer_mode = cfg.integer_mode;
    }

    let run = |(kind, start): &(StartKind, ProductionSchedule)| -> Result<(ProductionSchedule, StartSummary)> {
        let (sched, mut summary) = descend_from(inst, start, cfg)?;
        summary.start = *kind;
        Ok((sched, summary))
    };
    let results: Vec<Result<(ProductionSchedule, StartSummary)>> = match cfg.threads {
        1 => starts.iter().map(run).collect(),
        0 => starts.par_iter().map(run).collect(),
        threads => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?
            .install(|| starts.par_iter().map(run).collect()),
    };
    let results: Vec<(ProductionSchedule, StartSummary)> = results.into_iter().collect::<Result<_>>()?;

    let mut best_idx = 0;
    for (k, (_, s)) in results.iter().enumerate() {
        if s.final_value > results[best_idx].1.final_value {
            best_idx = k;
        }
    }
    let best_schedule = results[best_idx].0.clone();
    let best = true_profit(inst, &best_schedule)?;
    Ok(SearchOutcome {
        best_schedule,
        best,
        best_start: best_idx,
        starts: results.into_iter().map(|(_, s)| s).collect(),
        wall_time: clock.elapsed(),
    })
}

/// Multi-start search. Includes the integer linear model's schedule when
/// `include_milp_start` is set; in relaxed mode an integer-mode run with the
/// same configuration is done first and its best schedule injected, so the
/// relaxed result is never worse than the integer one.
pub fn multi_start(inst: &Instance, cfg: &SearchConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    let mut injected = Vec::new();
    if cfg.include_milp_start {
        let h = run_heuristic(inst, &MilpConfig::default())?;
        injected.push((StartKind::Milp, h.schedule));
    }
    if !cfg.integer_mode {
        let int_cfg = SearchConfig {
            integer_mode: true,
            ladder: integer_ladder(&cfg.ladder),
            ..cfg.clone()
        };
        let int = multi_start_from(inst, &int_cfg, injected.clone())?;
        injected.push((StartKind::Incumbent, int.best_schedule));
    }
    multi_start_from(inst, cfg, injected)
}

/// Whole-package rungs of `ladder`, with 1 appended if missing.
pub fn integer_ladder(ladder: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = ladder.iter().copied().filter(|s| s.fract() == 0.0 && *s >= 1.0).collect();
    if out.last() != Some(&1.0) {
        out.push(1.0);
    }
    out
}
