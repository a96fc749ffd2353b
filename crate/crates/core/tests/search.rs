use mps_core::heuristic::run_heuristic;
use mps_core::instance::paper_base_instance;
use mps_core::milp::MilpConfig;
use mps_core::search::{multi_start, SearchConfig, StartKind};

fn cfg(threads: usize, integer_mode: bool) -> SearchConfig {
    SearchConfig {
        starts: 6,
        seed: 42,
        budget: 4_000,
        integer_mode,
        threads,
        ..SearchConfig::default()
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let inst = paper_base_instance(7);
    let one = multi_start(&inst, &cfg(1, true)).unwrap();
    let many = multi_start(&inst, &cfg(4, true)).unwrap();
    let pool = multi_start(&inst, &cfg(0, true)).unwrap();
    assert_eq!(one, many);
    assert_eq!(one, pool);
    assert_eq!(one.trace(), many.trace());
}

#[test]
fn injected_starts_bound_the_result() {
    let inst = paper_base_instance(7);
    let uz = run_heuristic(&inst, &MilpConfig::default()).unwrap().updated_profit;
    let int = multi_start(&inst, &cfg(1, true)).unwrap();
    let rel = multi_start(&inst, &cfg(1, false)).unwrap();
    assert_eq!(int.starts[0].start, StartKind::Milp);
    assert!(rel.starts.iter().any(|s| s.start == StartKind::Incumbent));
    assert!(int.best.profit >= uz);
    assert!(rel.best.profit >= int.best.profit);
    for s in &int.starts {
        assert!(s.final_value >= s.start_value);
        assert!(s.trajectory.windows(2).all(|w| w[1] > w[0]));
        assert!(s.evaluations <= 4_000);
    }
}

#[test]
fn invalid_config_is_rejected() {
    let inst = paper_base_instance(1);
    let mut bad = cfg(1, true);
    bad.ladder = vec![1.0, 10.0];
    assert!(multi_start(&inst, &bad).is_err());
    bad = cfg(1, true);
    bad.starts = 0;
    assert!(multi_start(&inst, &bad).is_err());
}
