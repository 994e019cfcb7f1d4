//! Run every heuristic on one random instance for a range of machine counts.
//!
//! ```bash
//! cargo run --example heuristics_compare -- 7
//! ```

use dwsched::heuristics::HeuristicKind;
use dwsched::instgen::{generate, GenParams};
use dwsched::schedule::{check_feasible, normalized_makespan};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let base = generate(&GenParams::default(), seed).unwrap();
    print!("{:>10}", "M");
    for k in HeuristicKind::ALL {
        print!("{:>11}", k.name());
    }
    println!();
    for m in 1..=4 {
        let inst = base.with_resources(m, 1).unwrap();
        print!("{m:>10}");
        for k in HeuristicKind::ALL {
            let s = k.run(&inst, seed);
            assert!(check_feasible(&inst, &s).unwrap().feasible());
            print!("{:>11.3}", normalized_makespan(&inst, &s).unwrap());
        }
        println!();
    }
}
