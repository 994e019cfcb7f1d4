//! Place tasks and flows by hand, compute start times and run the feasibility checker,
//! then break the schedule on purpose and read the violation list.
//!
//! ```bash
//! cargo run --example check_schedule
//! ```

use dwsched::instgen::example_instance;
use dwsched::schedule::{check_feasible, earliest_start_schedule, normalized_makespan, Channel};

fn main() {
    let inst = example_instance();
    let g = &inst.graph;
    println!("{} tasks, {} flows, {} machines", g.task_count(), g.edge_count(), inst.machines);

    // Alternate machines along the topological order, one channel for every external flow.
    let order = g.topo_order().unwrap();
    let mut placement = vec![0; g.task_count()];
    let mut machine_orders = vec![Vec::new(); inst.machines];
    for (k, &j) in order.iter().enumerate() {
        placement[j] = 1 + k % inst.machines;
        machine_orders[k % inst.machines].push(j);
    }
    let mut channel_orders = vec![Vec::new(); inst.channels];
    for &j in &order {
        for &f in g.out_edges(j) {
            if placement[g.edge(f).u] != placement[g.edge(f).v] {
                channel_orders[0].push(f);
            }
        }
    }
    let schedule = earliest_start_schedule(&inst, &placement, &machine_orders, &channel_orders).unwrap();
    println!(
        "makespan {} (normalized {:.3})",
        schedule.makespan,
        normalized_makespan(&inst, &schedule).unwrap()
    );
    println!("checker: {}", check_feasible(&inst, &schedule).unwrap());

    // Pull a consumer forward and send a cross-machine flow over the virtual channel.
    let mut bad = schedule.clone();
    let f = (0..g.edge_count())
        .find(|&f| !bad.flows[f].channel.is_virtual())
        .expect("some flow crosses machines");
    bad.tasks[g.edge(f).v].start = 0;
    bad.flows[f].channel = Channel::Virtual;
    for v in check_feasible(&inst, &bad).unwrap().violations {
        println!("{} {}", v.constraint, v.detail);
    }
}
