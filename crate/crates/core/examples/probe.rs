use oadiff::gen::gen_pathological;
use oadiff::solver::{solve, PropMode, SolveConfig, SolveStatus, ValueOrder};
use std::time::Duration;

fn main() {
    for n in [3usize, 4, 5, 6] {
        for seed in [0u64, 1, 2] {
            let problem = gen_pathological(n);
            let config = SolveConfig {
                propagation: PropMode::DecompDc,
                var_order_seed: seed,
                value_order: ValueOrder::Ascending,
                timeout: Some(Duration::from_secs(120)),
                node_limit: None,
            };
            let (_, stats) = solve(&problem, &config).unwrap();
            println!(
                "I_{n} seed={seed}: status={:?} nodes={} backtracks={} time={:.2}s",
                stats.status, stats.nodes, stats.backtracks, stats.wall_time.as_secs_f64()
            );
            if stats.status == SolveStatus::Timeout { break; }
        }
    }
}
