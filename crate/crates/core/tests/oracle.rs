mod common;

use mps_core::milp::{solve_milp, MilpConfig, MilpStatus, NodeOrder};
use mps_core::oracle::{enumerate_exact, OracleLimits, OracleObjective};
use mps_core::schedule::{build_linear_model, feasibility_report, linear_profit, ModelLayout};
use mps_core::search::{multi_start, true_profit, SearchConfig};

use common::{rel_close, tiny_instances};

fn linear_limits() -> OracleLimits {
    OracleLimits {
        objective: OracleObjective::Linear,
        ..OracleLimits::default()
    }
}

#[test]
fn integer_solver_matches_linear_oracle() {
    for order in [NodeOrder::BestBound, NodeOrder::DepthFirst] {
        let cfg = MilpConfig {
            node_order: order,
            ..MilpConfig::default()
        };
        for (k, inst) in tiny_instances(20, 10_000).iter().enumerate() {
            let exact = enumerate_exact(inst, &linear_limits()).unwrap();
            let out = solve_milp(&build_linear_model(inst, true), &cfg).unwrap();
            assert_eq!(out.status, MilpStatus::Optimal, "instance {k}");
            let sched = ModelLayout::of(inst).schedule(out.values.as_ref().unwrap(), true);
            assert!(feasibility_report(inst, &sched).unwrap().is_feasible());
            let value = linear_profit(inst, &sched).unwrap().profit;
            assert!(rel_close(value, exact.value, 1e-12), "instance {k}: {value} vs {}", exact.value);
            assert!(rel_close(out.objective.unwrap(), exact.value, 1e-9));
        }
    }
}

#[test]
fn search_never_beats_true_oracle() {
    for (k, inst) in tiny_instances(20, 10_000).iter().enumerate() {
        let exact = enumerate_exact(inst, &OracleLimits::default()).unwrap();
        assert!(rel_close(true_profit(inst, &exact.schedule).unwrap().profit, exact.value, 1e-12));
        let cfg = SearchConfig {
            starts: 4,
            include_milp_start: false,
            ..SearchConfig::default()
        };
        let found = multi_start(inst, &cfg).unwrap();
        assert!(found.best.profit <= exact.value + 1e-9 * exact.value.abs(), "instance {k}");
    }
}

#[test]
fn oracle_counts_every_feasible_schedule_once() {
    for inst in tiny_instances(5, 2_000) {
        let a = enumerate_exact(&inst, &linear_limits()).unwrap();
        let b = enumerate_exact(&inst, &OracleLimits::default()).unwrap();
        assert_eq!(a.feasible_count, b.feasible_count);
        assert!(a.feasible_count >= 1);
        assert!(b.value <= a.value + 1e-9 * a.value.abs());
    }
}

#[test]
fn fixed_cost_does_not_move_the_optimum() {
    for inst in tiny_instances(8, 5_000) {
        let base = enumerate_exact(&inst, &OracleLimits::default()).unwrap();
        let base_milp = solve_milp(&build_linear_model(&inst, true), &MilpConfig::default()).unwrap();
        for fixed in [0.0, 1.0, 250_000.0] {
            let mut shifted = inst.clone();
            shifted.fixed_cost = fixed;
            let exact = enumerate_exact(&shifted, &OracleLimits::default()).unwrap();
            assert_eq!(exact.schedule, base.schedule);
            let q = inst.n_periods() as f64;
            assert!(rel_close(exact.value - base.value, (inst.fixed_cost - fixed) * q, 1e-9));
            let milp = solve_milp(&build_linear_model(&shifted, true), &MilpConfig::default()).unwrap();
            assert_eq!(milp.values, base_milp.values);
        }
    }
}
