//! Problem instances: validation, JSON documents, the seeded generator and
//! the six-product base case.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::Matrix;

/// Tolerance used by the aggregate feasibility check.
const FEAS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dimensions {
    pub n_products: usize,
    pub n_materials: usize,
    pub n_periods: usize,
}

impl Dimensions {
    pub fn new(n_products: usize, n_materials: usize, n_periods: usize) -> Self {
        Self {
            n_products,
            n_materials,
            n_periods,
        }
    }
}

/// A complete problem datum. Matrices are row-major: `demand` has one row per
/// product, `consumption` one row per material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub dims: Dimensions,
    /// Selling price per package.
    pub prices: Vec<f64>,
    /// Packages demanded, products x periods.
    pub demand: Matrix,
    pub initial_inventory: Vec<f64>,
    /// Packages that can be produced per period, all products combined.
    pub capacity: Vec<f64>,
    /// Cost per package held, per period.
    pub holding_cost: Vec<f64>,
    /// Cost per package produced.
    pub variable_cost: f64,
    /// Cost per period.
    pub fixed_cost: f64,
    /// Kilograms per purchasable lot, per material.
    pub lot_weights: Vec<f64>,
    /// Price per kilogram, per material.
    pub material_prices: Vec<f64>,
    /// Kilograms of material per package, materials x products.
    pub consumption: Matrix,
    #[serde(default = "default_utilization_floor")]
    pub utilization_floor: f64,
}

fn default_utilization_floor() -> f64 {
    0.90
}

impl Instance {
    pub fn n_products(&self) -> usize {
        self.dims.n_products
    }

    pub fn n_materials(&self) -> usize {
        self.dims.n_materials
    }

    pub fn n_periods(&self) -> usize {
        self.dims.n_periods
    }

    /// Checks every invariant: shapes, signs, and the existence of at least
    /// one backlog-free schedule that ends with zero inventory.
    pub fn validate(&self) -> Result<()> {
        self.validate_shapes()?;
        self.validate_values()?;
        self.validate_feasibility()
    }

    fn validate_shapes(&self) -> Result<()> {
        let Dimensions {
            n_products: n,
            n_materials: m,
            n_periods: q,
        } = self.dims;
        if n == 0 || q == 0 {
            return Err(Error::Validation(format!(
                "dims must have at least one product and one period, got ({n}, {m}, {q})"
            )));
        }
        let check_len = |name: &str, len: usize, want: usize| {
            if len == want {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "{name} has length {len}, expected {want}"
                )))
            }
        };
        check_len("prices", self.prices.len(), n)?;
        check_len("initial_inventory", self.initial_inventory.len(), n)?;
        check_len("capacity", self.capacity.len(), q)?;
        check_len("holding_cost", self.holding_cost.len(), q)?;
        check_len("lot_weights", self.lot_weights.len(), m)?;
        check_len("material_prices", self.material_prices.len(), m)?;
        check_len("demand", self.demand.len(), n)?;
        for (i, row) in self.demand.iter().enumerate() {
            check_len(&format!("demand[{i}]"), row.len(), q)?;
        }
        check_len("consumption", self.consumption.len(), m)?;
        for (j, row) in self.consumption.iter().enumerate() {
            check_len(&format!("consumption[{j}]"), row.len(), n)?;
        }
        Ok(())
    }

    fn validate_values(&self) -> Result<()> {
        fn nonneg(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "{name} = {v} violates nonnegativity"
                )))
            }
        }
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "{name} = {v} must be strictly positive"
                )))
            }
        }
        for (i, &p) in self.prices.iter().enumerate() {
            positive(&format!("prices[{i}]"), p)?;
        }
        for (i, row) in self.demand.iter().enumerate() {
            for (t, &d) in row.iter().enumerate() {
                nonneg(&format!("demand[{i}][{t}]"), d)?;
            }
        }
        for (i, &v) in self.initial_inventory.iter().enumerate() {
            nonneg(&format!("initial_inventory[{i}]"), v)?;
        }
        for (t, &v) in self.capacity.iter().enumerate() {
            nonneg(&format!("capacity[{t}]"), v)?;
        }
        for (t, &v) in self.holding_cost.iter().enumerate() {
            nonneg(&format!("holding_cost[{t}]"), v)?;
        }
        nonneg("variable_cost", self.variable_cost)?;
        nonneg("fixed_cost", self.fixed_cost)?;
        for (j, &w) in self.lot_weights.iter().enumerate() {
            positive(&format!("lot_weights[{j}]"), w)?;
        }
        for (j, &c) in self.material_prices.iter().enumerate() {
            nonneg(&format!("material_prices[{j}]"), c)?;
        }
        for (j, row) in self.consumption.iter().enumerate() {
            for (i, &w) in row.iter().enumerate() {
                nonneg(&format!("consumption[{j}][{i}]"), w)?;
            }
        }
        if !(0.0..=1.0).contains(&self.utilization_floor) {
            return Err(Error::Validation(format!(
                "utilization_floor = {} must lie in [0, 1]",
                self.utilization_floor
            )));
        }
        Ok(())
    }

    /// Every product's stock must be consumable by the horizon end, and for
    /// every prefix of periods the production forced by demand must fit the
    /// cumulative capacity. Together these are necessary and sufficient
    /// because every package takes one unit of the shared capacity.
    fn validate_feasibility(&self) -> Result<()> {
        for (i, row) in self.demand.iter().enumerate() {
            let total: f64 = row.iter().sum();
            if self.initial_inventory[i] > total + FEAS_EPS {
                return Err(Error::Infeasible(format!(
                    "aggregate feasibility: initial inventory {} of product {i} exceeds its horizon demand {total}, so terminal inventory cannot reach zero",
                    self.initial_inventory[i]
                )));
            }
        }
        let forced = self.forced_cumulative_production();
        let mut cum_capacity = 0.0;
        for (t, need) in forced.iter().enumerate() {
            cum_capacity += self.capacity[t];
            if *need > cum_capacity + FEAS_EPS {
                return Err(Error::Infeasible(format!(
                    "aggregate feasibility: through period {t} demand net of initial inventory needs {need} packages but cumulative capacity is {cum_capacity}"
                )));
            }
        }
        Ok(())
    }

    /// Cumulative packages that must have been produced by the end of each
    /// period, summed over products.
    pub fn forced_cumulative_production(&self) -> Vec<f64> {
        let q = self.n_periods();
        let mut out = vec![0.0; q];
        for (i, row) in self.demand.iter().enumerate() {
            let mut cum = 0.0;
            for (t, d) in row.iter().enumerate() {
                cum += d;
                out[t] += (cum - self.initial_inventory[i]).max(0.0);
            }
        }
        out
    }

    /// True when demand, initial inventory and capacity are all whole numbers.
    pub fn has_integral_data(&self) -> bool {
        let int = |v: &f64| v.fract() == 0.0;
        self.demand.iter().flatten().all(int)
            && self.initial_inventory.iter().all(int)
            && self.capacity.iter().all(int)
    }

    /// Deterministic canonical JSON rendering.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    /// Hex SHA-256 of the canonical rendering.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses and validates an instance document.
pub fn parse_instance(doc: &str) -> Result<Instance> {
    let inst: Instance = serde_json::from_str(doc)?;
    inst.validate()?;
    Ok(inst)
}

pub fn render_instance(inst: &Instance) -> String {
    inst.to_json()
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn check(&self, name: &str) -> Result<()> {
        if self.lo.is_finite() && self.hi.is_finite() && 0.0 <= self.lo && self.lo <= self.hi {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "{name} range [{}, {}] must satisfy 0 <= lo <= hi",
                self.lo, self.hi
            )))
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.gen_range(self.lo..=self.hi)
        }
    }
}

/// Sampling ranges for [`generate_instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorRanges {
    /// Kilograms per package.
    pub consumption_range: Interval,
    /// Kilograms per lot.
    pub lot_weight_range: Interval,
    /// Money per kilogram.
    pub material_price_range: Interval,
    /// Packages per product and period; sampled values are rounded.
    pub demand_range: Interval,
    /// Money per package; sampled values are rounded to cents.
    pub price_range: Interval,
    /// Initial inventory as a fraction of first-period demand.
    pub initial_inventory_fraction: Interval,
    /// Capacity headroom over mean net demand per period, at least 1.
    pub slack_factor: f64,
    pub holding_cost: f64,
    pub variable_cost: f64,
    pub fixed_cost: f64,
}

impl Default for GeneratorRanges {
    /// Ranges shaped after the six-product case: demand of a few thousand
    /// packages, prices 20-30, and lots sized so a typical material needs
    /// between one and fifty lots per period.
    fn default() -> Self {
        Self {
            consumption_range: Interval::new(0.005, 0.5),
            lot_weight_range: Interval::new(200.0, 2000.0),
            material_price_range: Interval::new(0.5, 3.0),
            demand_range: Interval::new(1200.0, 6000.0),
            price_range: Interval::new(20.0, 30.0),
            initial_inventory_fraction: Interval::new(0.2, 0.8),
            slack_factor: 1.1,
            holding_cost: 3.0,
            variable_cost: 3.08,
            fixed_cost: 88800.0,
        }
    }
}

impl GeneratorRanges {
    pub fn validate(&self) -> Result<()> {
        self.consumption_range.check("consumption")?;
        self.lot_weight_range.check("lot_weight")?;
        if self.lot_weight_range.lo <= 0.0 {
            return Err(Error::Validation("lot_weight range must be strictly positive".into()));
        }
        self.material_price_range.check("material_price")?;
        self.demand_range.check("demand")?;
        self.price_range.check("price")?;
        if self.price_range.lo < 0.01 {
            return Err(Error::Validation("price range must be at least 0.01".into()));
        }
        self.initial_inventory_fraction.check("initial_inventory_fraction")?;
        if self.initial_inventory_fraction.hi > 1.0 {
            return Err(Error::Validation(
                "initial_inventory_fraction must not exceed 1".into(),
            ));
        }
        if !(self.slack_factor.is_finite() && self.slack_factor >= 1.0) {
            return Err(Error::Validation(format!(
                "slack_factor = {} must be >= 1",
                self.slack_factor
            )));
        }
        for (name, v) in [
            ("holding_cost", self.holding_cost),
            ("variable_cost", self.variable_cost),
            ("fixed_cost", self.fixed_cost),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Validation(format!("{name} = {v} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Material data drawn from the generator: lot weights, prices per kilogram,
/// and consumption per package.
struct MaterialData {
    lot_weights: Vec<f64>,
    material_prices: Vec<f64>,
    consumption: Matrix,
}

fn sample_materials(rng: &mut ChaCha8Rng, dims: Dimensions, ranges: &GeneratorRanges) -> MaterialData {
    let consumption = (0..dims.n_materials)
        .map(|_| {
            (0..dims.n_products)
                .map(|_| round_to(ranges.consumption_range.sample(rng), 1e-4))
                .collect()
        })
        .collect();
    let lot_weights = (0..dims.n_materials)
        .map(|_| round_to(ranges.lot_weight_range.sample(rng), 1.0).max(ranges.lot_weight_range.lo))
        .collect();
    let material_prices = (0..dims.n_materials)
        .map(|_| round_to(ranges.material_price_range.sample(rng), 0.01))
        .collect();
    MaterialData {
        lot_weights,
        material_prices,
        consumption,
    }
}

fn round_to(v: f64, quantum: f64) -> f64 {
    let r = (v / quantum).round() * quantum;
    // Clean representation for decimal quanta (e.g. 0.01).
    let digits = (-quantum.log10()).ceil().max(0.0) as i32;
    let scale = 10f64.powi(digits);
    (r * scale).round() / scale
}

/// Draws a random instance. The result is a pure function of the inputs and
/// always passes [`Instance::validate`].
///
/// Capacity per period is `ceil(slack * (total demand - total initial
/// inventory) / periods)`, raised when needed to the smallest uniform value
/// under which every prefix of forced production fits.
pub fn generate_instance(seed: u64, dims: Dimensions, ranges: &GeneratorRanges) -> Result<Instance> {
    ranges.validate()?;
    if dims.n_products == 0 || dims.n_periods == 0 {
        return Err(Error::Validation(format!(
            "dims must have at least one product and one period, got ({}, {}, {})",
            dims.n_products, dims.n_materials, dims.n_periods
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prices: Vec<f64> = (0..dims.n_products)
        .map(|_| round_to(ranges.price_range.sample(&mut rng), 0.01).max(0.01))
        .collect();
    let demand: Matrix = (0..dims.n_products)
        .map(|_| {
            (0..dims.n_periods)
                .map(|_| ranges.demand_range.sample(&mut rng).round())
                .collect()
        })
        .collect();
    let initial_inventory: Vec<f64> = demand
        .iter()
        .map(|row| (row[0] * ranges.initial_inventory_fraction.sample(&mut rng)).floor())
        .collect();
    let materials = sample_materials(&mut rng, dims, ranges);

    let mut inst = Instance {
        dims,
        prices,
        demand,
        initial_inventory,
        capacity: vec![0.0; dims.n_periods],
        holding_cost: vec![ranges.holding_cost; dims.n_periods],
        variable_cost: ranges.variable_cost,
        fixed_cost: ranges.fixed_cost,
        lot_weights: materials.lot_weights,
        material_prices: materials.material_prices,
        consumption: materials.consumption,
        utilization_floor: default_utilization_floor(),
    };
    inst.capacity = vec![uniform_capacity(&inst, ranges.slack_factor); dims.n_periods];
    inst.validate()?;
    Ok(inst)
}

fn uniform_capacity(inst: &Instance, slack: f64) -> f64 {
    let q = inst.n_periods() as f64;
    let total_demand: f64 = inst.demand.iter().flatten().sum();
    let total_inventory: f64 = inst.initial_inventory.iter().sum();
    let mut cap = (slack * (total_demand - total_inventory).max(0.0) / q).ceil();
    for (t, need) in inst.forced_cumulative_production().iter().enumerate() {
        cap = cap.max((need / (t + 1) as f64).ceil());
    }
    cap
}

/// Demand per product (rows A-F) over six months.
const BASE_DEMAND: [[f64; 6]; 6] = [
    [4660.0, 2982.0, 3832.0, 1293.0, 1896.0, 2357.0],
    [3256.0, 3565.0, 4574.0, 3286.0, 4748.0, 3593.0],
    [3407.0, 4914.0, 3083.0, 3993.0, 3706.0, 3327.0],
    [3966.0, 2791.0, 2873.0, 2251.0, 3550.0, 3019.0],
    [5852.0, 4031.0, 3043.0, 2990.0, 2519.0, 4125.0],
    [4531.0, 5041.0, 4748.0, 4985.0, 5167.0, 3580.0],
];
const BASE_INITIAL_INVENTORY: [f64; 6] = [3308.0, 1839.0, 2478.0, 1673.0, 3716.0, 2164.0];
const BASE_PRICES: [f64; 6] = [20.0, 25.0, 27.0, 20.0, 30.0, 21.0];
const BASE_CAPACITY: f64 = 20800.0;
const BASE_HOLDING: f64 = 3.0;
const BASE_VARIABLE: f64 = 3.08;
const BASE_FIXED: f64 = 88800.0;

/// The six-product, six-month case with 27 synthetic materials drawn from
/// `material_seed` under the default generator ranges.
pub fn paper_base_instance(material_seed: u64) -> Instance {
    let dims = Dimensions::new(6, 27, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(material_seed);
    let materials = sample_materials(&mut rng, dims, &GeneratorRanges::default());
    let inst = Instance {
        dims,
        prices: BASE_PRICES.to_vec(),
        demand: BASE_DEMAND.iter().map(|r| r.to_vec()).collect(),
        initial_inventory: BASE_INITIAL_INVENTORY.to_vec(),
        capacity: vec![BASE_CAPACITY; 6],
        holding_cost: vec![BASE_HOLDING; 6],
        variable_cost: BASE_VARIABLE,
        fixed_cost: BASE_FIXED,
        lot_weights: materials.lot_weights,
        material_prices: materials.material_prices,
        consumption: materials.consumption,
        utilization_floor: default_utilization_floor(),
    };
    debug_assert!(inst.validate().is_ok());
    inst
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn base_instance_matches_published_tables() {
        let inst = paper_base_instance(7);
        assert_eq!(inst.dims, Dimensions::new(6, 27, 6));
        assert_eq!(inst.prices, vec![20.0, 25.0, 27.0, 20.0, 30.0, 21.0]);
        assert_eq!(
            inst.initial_inventory,
            vec![3308.0, 1839.0, 2478.0, 1673.0, 3716.0, 2164.0]
        );
        assert!(inst.holding_cost.iter().all(|&h| h == 3.0));
        assert!(inst.capacity.iter().all(|&c| c == 20800.0));
        assert_eq!(inst.variable_cost, 3.08);
        assert_eq!(inst.fixed_cost, 88800.0);
        assert_eq!(inst.demand[0][0], 4660.0);
        assert_eq!(inst.demand[5][4], 5167.0);
        inst.validate().unwrap();
    }

    #[test]
    fn base_instance_materials_follow_seed() {
        let a = paper_base_instance(1);
        let b = paper_base_instance(2);
        assert_eq!(a.demand, b.demand);
        assert_ne!(a.consumption, b.consumption);
        assert_eq!(a, paper_base_instance(1));
    }

    #[test]
    fn negative_demand_is_rejected() {
        let mut inst = tiny();
        inst.demand[0][0] = -1.0;
        let err = inst.validate().unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("demand[0][0]"));
        assert!(err.to_string().contains("nonnegativity"));
    }

    #[test]
    fn overloaded_horizon_is_infeasible() {
        let mut inst = tiny();
        inst.demand[0] = vec![1.0, 4.0];
        let err = inst.validate().unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
        assert!(err.to_string().contains("aggregate feasibility"));
    }

    #[test]
    fn front_loaded_demand_can_be_infeasible_even_if_totals_fit() {
        let mut inst = tiny();
        inst.demand[0] = vec![3.0, 0.0];
        assert!(matches!(inst.validate(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn stock_exceeding_demand_is_infeasible() {
        let mut inst = tiny();
        inst.initial_inventory[0] = 3.0;
        assert!(matches!(inst.validate(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn shape_errors_name_the_field() {
        let mut inst = tiny();
        inst.consumption[0].push(1.0);
        let err = inst.validate().unwrap_err().to_string();
        assert!(err.contains("consumption[0]"), "{err}");
    }

    #[test]
    fn zero_lot_weight_is_rejected() {
        let mut inst = tiny();
        inst.lot_weights[0] = 0.0;
        assert!(inst.validate().is_err());
    }

    #[test]
    fn missing_field_is_a_schema_error() {
        let mut v: serde_json::Value = serde_json::from_str(&tiny().to_json()).unwrap();
        v.as_object_mut().unwrap().remove("capacity");
        let err = parse_instance(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err}");
    }

    #[test]
    fn mistyped_field_is_a_schema_error() {
        let doc = tiny().to_json().replace("\"fixed_cost\": 0.0", "\"fixed_cost\": \"zero\"");
        assert!(matches!(parse_instance(&doc), Err(Error::Schema(_))));
    }

    #[test]
    fn utilization_floor_defaults() {
        let mut v: serde_json::Value = serde_json::from_str(&tiny().to_json()).unwrap();
        v.as_object_mut().unwrap().remove("utilization_floor");
        let inst = parse_instance(&v.to_string()).unwrap();
        assert_eq!(inst.utilization_floor, 0.90);
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        let dims = Dimensions::new(6, 27, 6);
        let ranges = GeneratorRanges::default();
        let a = generate_instance(1, dims, &ranges).unwrap();
        let b = generate_instance(1, dims, &ranges).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = generate_instance(2, dims, &ranges).unwrap();
        assert_ne!(a, c);
        parse_instance(&a.to_json()).unwrap();
    }

    #[test]
    fn generator_capacity_formula() {
        let dims = Dimensions::new(4, 3, 5);
        let ranges = GeneratorRanges::default();
        let inst = generate_instance(11, dims, &ranges).unwrap();
        let net: f64 = inst.demand.iter().flatten().sum::<f64>()
            - inst.initial_inventory.iter().sum::<f64>();
        let formula = (ranges.slack_factor * net / 5.0).ceil();
        assert!(inst.capacity.iter().all(|&c| c >= formula));
        assert!(inst.capacity.iter().all(|&c| c == inst.capacity[0]));
    }

    #[test]
    fn invalid_ranges_are_rejected() {
        let ranges = GeneratorRanges {
            demand_range: Interval::new(5.0, 1.0),
            ..GeneratorRanges::default()
        };
        assert!(generate_instance(1, Dimensions::new(2, 2, 2), &ranges).is_err());
        let ranges = GeneratorRanges {
            slack_factor: 0.5,
            ..GeneratorRanges::default()
        };
        assert!(generate_instance(1, Dimensions::new(2, 2, 2), &ranges).is_err());
    }

    #[test]
    fn generated_lots_land_in_a_useful_range() {
        let inst = generate_instance(1, Dimensions::new(6, 27, 6), &GeneratorRanges::default()).unwrap();
        // Typical per-period lot need should be between 1 and 50 lots.
        let mean_demand: f64 = inst.demand.iter().flatten().sum::<f64>() / 36.0;
        let mut typical = Vec::new();
        for j in 0..27 {
            let kg: f64 = inst.consumption[j].iter().map(|w| w * mean_demand).sum();
            typical.push(kg / inst.lot_weights[j]);
        }
        typical.sort_by(f64::total_cmp);
        let median = typical[13];
        assert!((1.0..=50.0).contains(&median), "median lots {median}");
    }
}
