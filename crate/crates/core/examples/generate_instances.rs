//! Draw reproducible random instances and round-trip them through the JSON format.
//!
//! ```bash
//! cargo run --example generate_instances
//! ```

use dwsched::instgen::{generate, read_instance_str, write_instance_string, GenParams};

fn main() {
    let params = GenParams {
        task_count: 6,
        r_range: 0..=3,
        ..GenParams::default()
    };
    let inst = generate(&params, 42).unwrap();
    let text = write_instance_string(&inst);
    print!("{text}");
    assert_eq!(read_instance_str(&text).unwrap(), inst);
    assert_eq!(generate(&params, 42).unwrap(), inst, "same seed, same instance");

    let edges: usize = (0..100).map(|s| generate(&params, s).unwrap().graph.edge_count()).sum();
    println!("mean edge count over 100 seeds: {:.2}", edges as f64 / 100.0);
}
