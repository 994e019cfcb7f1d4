//! Build the time-indexed integer model of an instance, encode a known schedule into it
//! and write it as an LP file that any MILP solver can read.
//!
//! ```bash
//! cargo run --example export_lp -- model.lp
//! ```

use std::fs::File;
use std::io::BufWriter;

use dwsched::formulation::{
    build_default, constraint_counts, decode_solution, encode_schedule, export_lp, validate_assignment,
};
use dwsched::dwdag::{Edge, JobGraph};
use dwsched::instgen::Instance;
use dwsched::schedule::baseline_schedule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = Instance::new(
        JobGraph::new(vec![2, 3, 1], vec![Edge::new(0, 1, 2, 1), Edge::new(0, 2, 1, 0)]),
        2,
        1,
        None,
    )?;
    let model = build_default(&inst, inst.horizon())?;
    println!("{} columns, big-M {}, hash {}", model.var_count(), model.big_m(), model.instance_hash());
    for (family, rows) in constraint_counts(&model) {
        println!("  {:<24} {rows}", family.as_str());
    }

    // Any feasible schedule is a feasible point of the model, and decodes back to itself.
    let schedule = baseline_schedule(&inst);
    let point = encode_schedule(&model, &schedule)?;
    println!("baseline violates {} rows", validate_assignment(&model, &point)?.len());
    assert_eq!(decode_solution(&model, &point)?, schedule);

    let path = std::env::args().nth(1).unwrap_or_else(|| "model.lp".into());
    export_lp(&model, BufWriter::new(File::create(&path)?))?;
    println!("wrote {path}");
    Ok(())
}
