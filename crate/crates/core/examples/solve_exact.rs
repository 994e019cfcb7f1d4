//! Solve an instance to optimality and compare the pruning strategies.
//!
//! ```bash
//! cargo run --release --example solve_exact
//! ```

use dwsched::heuristics::best_heuristic;
use dwsched::instgen::{example_instance, EXAMPLE_OPTIMAL_MAKESPAN};
use dwsched::solver::{initial_bounds, solve_exact, SolveOptions};

fn main() {
    let inst = example_instance();
    let warm = best_heuristic(&inst, 0);
    let (lb, ub) = initial_bounds(&inst, &warm).unwrap();
    println!("bounds before search: [{lb}, {ub}]");

    for (label, opts) in [("all strategies", SolveOptions::tabc()), ("bound only", SolveOptions::plain())] {
        let (schedule, report) = solve_exact(&inst, &opts, &warm).unwrap();
        println!(
            "{label:>14}: makespan {} ({}), {} nodes, {:?}",
            schedule.makespan,
            report.status.as_str(),
            report.nodes_explored,
            report.prunes
        );
        assert_eq!(schedule.makespan, EXAMPLE_OPTIMAL_MAKESPAN);
    }

    // A node budget still returns the best schedule seen so far.
    let (s, report) = solve_exact(&inst, &SolveOptions::tabc().with_node_limit(3), &warm).unwrap();
    println!("with 3 nodes: makespan {} ({})", s.makespan, report.status.as_str());
    for (node, ub) in report.ub_trajectory {
        println!("  incumbent {ub} at node {node}");
    }
}
