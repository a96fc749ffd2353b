//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use mps_core::instance::{generate_instance, Dimensions, GeneratorRanges, Interval};
use mps_core::model::{LinearModel, Relation};
use mps_core::oracle::search_space;
use mps_core::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random LP with 1 to 3 boxed variables and 1 to 6 constraints. Boxes keep
/// every feasible instance bounded.
pub fn random_lp(seed: u64) -> LinearModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=6);
    let mut model = LinearModel::new();
    for j in 0..n {
        let lo = if rng.gen_bool(0.3) { rng.gen_range(-3..=0) as f64 } else { 0.0 };
        let hi = lo + rng.gen_range(1..=10) as f64;
        let v = model.add_variable(format!("x{j}"), lo, hi, false);
        model.set_objective(v, rng.gen_range(-5..=5) as f64);
    }
    // Constraints are built around a point of the box so most models are
    // feasible; a few right-hand sides are pushed past it.
    let anchor: Vec<f64> = model
        .variables
        .iter()
        .map(|v| rng.gen_range(v.lower..=v.upper))
        .collect();
    for k in 0..m {
        let terms: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(-4..=4) as f64)).collect();
        let at_anchor: f64 = terms.iter().map(|&(j, a)| a * anchor[j]).sum();
        let slack = rng.gen_range(0..=6) as f64;
        let (relation, rhs) = match rng.gen_range(0..10) {
            0 => (Relation::Eq, at_anchor.round()),
            1..=3 => (Relation::Ge, (at_anchor - slack).floor()),
            _ => (Relation::Le, (at_anchor + slack).ceil()),
        };
        let rhs = if rng.gen_bool(0.1) { -rhs - 5.0 } else { rhs };
        model.add_constraint(format!("c{k}"), terms, relation, rhs).unwrap();
    }
    model
}

/// Hyperplanes `a·x = b` bounding the feasible region of `model`.
fn hyperplanes(model: &LinearModel) -> Vec<(Vec<f64>, f64)> {
    let n = model.variables.len();
    let mut planes = Vec::new();
    for c in &model.constraints {
        let mut a = vec![0.0; n];
        for &(j, v) in &c.terms {
            a[j] += v;
        }
        planes.push((a, c.rhs));
    }
    for (j, var) in model.variables.iter().enumerate() {
        for bound in [var.lower, var.upper] {
            if bound.is_finite() {
                let mut a = vec![0.0; n];
                a[j] = 1.0;
                planes.push((a, bound));
            }
        }
    }
    planes
}

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (pivot_row, pivot_b) = (a[col].clone(), b[col]);
        for (r, (row, rhs)) in a.iter_mut().zip(b.iter_mut()).enumerate() {
            if r != col {
                let f = row[col] / pivot_row[col];
                for (v, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *v -= f * p;
                }
                *rhs -= f * pivot_b;
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Best objective over all vertices of a bounded model, or `None` when no
/// vertex is feasible.
pub fn vertex_optimum(model: &LinearModel) -> Option<f64> {
    let n = model.variables.len();
    let planes = hyperplanes(model);
    let mut best: Option<f64> = None;
    for pick in combinations(planes.len(), n) {
        let a = pick.iter().map(|&p| planes[p].0.clone()).collect();
        let b = pick.iter().map(|&p| planes[p].1).collect();
        if let Some(x) = solve_square(a, b) {
            if model.is_feasible(&x, 1e-7) {
                let v = model.evaluate_objective(&x);
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
    }
    best
}

/// Generator ranges yielding instances small enough to enumerate.
pub fn tiny_ranges() -> GeneratorRanges {
    GeneratorRanges {
        demand_range: Interval::new(0.0, 6.0),
        consumption_range: Interval::new(0.5, 3.0),
        lot_weight_range: Interval::new(2.0, 9.0),
        slack_factor: 1.3,
        ..GeneratorRanges::default()
    }
}

/// The first `count` generated tiny instances whose schedule space is at
/// most `max_space` and at least 50, scanning seeds upward from 1.
pub fn tiny_instances(count: usize, max_space: u128) -> Vec<Instance> {
    let ranges = tiny_ranges();
    let mut out = Vec::new();
    let mut seed = 1u64;
    while out.len() < count {
        let dims = Dimensions::new(1 + (seed % 3) as usize, 2, 2 + (seed % 3) as usize);
        if let Ok(inst) = generate_instance(seed, dims, &ranges) {
            let space = search_space(&inst);
            if space >= 50 && space <= max_space {
                out.push(inst);
            }
        }
        seed += 1;
    }
    out
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
