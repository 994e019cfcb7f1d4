use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use dwsched::bench::{self, BenchConfig, ExitStatus, InstanceSource, Scheme};
use dwsched::instgen::GenParams;
use dwsched::solver::SolveOptions;

#[derive(Parser)]
#[command(name = "dwsched", version, about = "Schedule dual-weighted DAG jobs on machines and channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolverArgs {
    /// Stop after this many search nodes.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Stop after this many seconds (ignored with --deterministic).
    #[arg(long)]
    time_limit: Option<f64>,
    /// Single-threaded search with reproducible output.
    #[arg(long)]
    deterministic: bool,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            node_limit: self.node_limit,
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            deterministic: self.deterministic,
            ..SolveOptions::tabc()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instance files.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        tasks: usize,
        #[arg(long, default_value_t = 2)]
        machines: usize,
        #[arg(long, default_value_t = 1)]
        channels: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Schedule one instance file.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "exact")]
        scheme: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a schedule file against its instance.
    Check { instance: PathBuf, schedule: PathBuf },
    /// Export the integer model in LP format.
    ExportLp {
        instance: PathBuf,
        #[arg(long)]
        t_max: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark campaign and write its CSV.
    Bench {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3000)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        tasks: usize,
        /// Read instances from this directory instead of generating them.
        #[arg(long)]
        instances: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        machines: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        channels: usize,
        #[arg(long, value_delimiter = ',', default_value = "random,list,glist,partition,exact")]
        scheme: Vec<String>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate a campaign CSV.
    Report {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> ExitStatus {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Gen { seed, count, tasks, machines, channels, out } => {
            let params = GenParams {
                task_count: tasks,
                machines,
                channels,
                ..GenParams::default()
            };
            bench::cmd_gen(&params, count, seed, &out, &mut stdout)
        }
        Command::Solve { instance, scheme, seed, solver, out } => {
            bench::cmd_solve(&instance, &scheme, &solver.options(), seed, out.as_deref(), &mut stdout)
        }
        Command::Check { instance, schedule } => bench::cmd_check(&instance, &schedule, &mut stdout),
        Command::ExportLp { instance, t_max, out } => {
            bench::cmd_export_lp(&instance, t_max, out.as_deref(), &mut stdout)
        }
        Command::Bench { seed, count, tasks, instances, machines, channels, scheme, solver, out } => {
            let mut schemes = Vec::new();
            for name in &scheme {
                match Scheme::parse(name) {
                    Some(s) => schemes.push(s),
                    None => {
                        eprintln!("error: unknown scheme `{name}`");
                        return ExitStatus::Usage;
                    }
                }
            }
            let source = match instances {
                Some(dir) => InstanceSource::Directory(dir),
                None => InstanceSource::Generated {
                    params: GenParams {
                        task_count: tasks,
                        ..GenParams::default()
                    },
                    count,
                },
            };
            let config = BenchConfig {
                source,
                machines,
                channels,
                schemes,
                base_seed: seed,
                solver: solver.options(),
            };
            bench::cmd_bench(&config, out.as_deref(), &mut stdout)
        }
        Command::Report { csv, out } => bench::cmd_report(&csv, out.as_deref(), &mut stdout),
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, matching the documented codes.
    let cli = Cli::parse();
    ExitCode::from(run(cli).code() as u8)
}
