//! Build a small job graph by hand, validate it and look at its structure.
//!
//! ```bash
//! cargo run --example validate_graph
//! ```

use dwsched::dwdag::{critical_path_bound, equivalent_siblings, Edge, JobGraph};

fn main() {
    // A fork-join: task 0 feeds two workers that both feed task 3.
    let graph = JobGraph::new(
        vec![2, 5, 5, 1],
        vec![
            Edge::new(0, 1, 3, 0),
            Edge::new(0, 2, 3, 0),
            Edge::new(1, 3, 4, 1),
            Edge::new(2, 3, 4, 1),
        ],
    );
    let report = graph.validate();
    println!("valid: {}", report.ok());
    println!("topological order: {:?}", graph.topo_order().unwrap());
    println!("critical path bound: {}", critical_path_bound(&graph).unwrap());
    println!("interchangeable siblings: {:?}", equivalent_siblings(&graph));

    let broken = JobGraph::new(vec![1, 0], vec![Edge::new(0, 1, 1, 0), Edge::new(1, 0, 1, 0)]);
    println!("broken graph: {}", broken.validate());
}
