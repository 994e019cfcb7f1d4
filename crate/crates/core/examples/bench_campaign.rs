//! A desk-scale version of the scheme comparison: every scheme on a batch of
//! ten-task instances, one channel, one to four machines, then the aggregate report.
//!
//! ```bash
//! cargo run --release --example bench_campaign -- 40
//! ```

use dwsched::bench::{csv_string, report, run_bench, BenchConfig, InstanceSource};
use dwsched::instgen::GenParams;

fn main() {
    let count = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let config = BenchConfig {
        source: InstanceSource::Generated {
            params: GenParams::default(),
            count,
        },
        ..BenchConfig::campaign_defaults()
    };
    let rows = run_bench(&config).unwrap();
    let csv = csv_string(&rows);
    println!("{} rows, first lines:", rows.len());
    for line in csv.lines().take(4) {
        println!("  {line}");
    }
    println!("\nmean normalized makespan");
    for r in report(&rows).iter().filter(|r| r.metric == "mean_normalized_makespan") {
        println!("  {:<10} M={} {}", r.scheme, r.machines.unwrap(), r.value);
    }
}
