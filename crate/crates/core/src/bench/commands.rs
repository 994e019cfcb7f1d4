//! The subcommands behind the `dwsched` binary, callable in-process.
//!
//! Every command writes its human-readable output to `stdout` and returns the process
//! exit status: 0 for success or a feasible schedule, 1 for violations or failed runs,
//! 2 for usage and parse errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::dwdag::Time;
use crate::formulation::{build_default, constraint_counts, export_lp};
use crate::heuristics::best_heuristic;
use crate::instgen::{generate, read_instance_str, write_instance_string, GenParams, Instance};
use crate::schedule::check_feasible;
use crate::solver::{solve_exact, SolveOptions};

use super::{
    csv_string, read_csv, read_schedule_str, report, run_bench, write_report,
    write_schedule_string, BenchConfig, Scheme,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Failure = 1,
    Usage = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

type CmdResult = Result<ExitStatus, (ExitStatus, String)>;

fn usage(msg: impl ToString) -> (ExitStatus, String) {
    (ExitStatus::Usage, msg.to_string())
}

fn failure(msg: impl ToString) -> (ExitStatus, String) {
    (ExitStatus::Failure, msg.to_string())
}

fn read_text(path: &Path) -> Result<String, (ExitStatus, String)> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, (ExitStatus, String)> {
    read_instance_str(&read_text(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), (ExitStatus, String)> {
    fs::write(path, text).map_err(|e| failure(format!("{}: {e}", path.display())))
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<(), (ExitStatus, String)> {
    stdout.write_all(text.as_bytes()).map_err(failure)
}

// Collapses a command body into an exit status, reporting the message on `stdout`.
fn finish(stdout: &mut dyn Write, r: CmdResult) -> ExitStatus {
    match r {
        Ok(s) => s,
        Err((s, msg)) => {
            let _ = writeln!(stdout, "error: {msg}");
            s
        }
    }
}

/// Writes `count` instances to `out_dir` as `n{tasks}_{k:05}.json`, instance `k`
/// drawn with seed `seed + k`.
pub fn cmd_gen(
    params: &GenParams,
    count: usize,
    seed: u64,
    out_dir: &Path,
    stdout: &mut dyn Write,
) -> ExitStatus {
    let body = |stdout: &mut dyn Write| -> CmdResult {
        params.validate().map_err(usage)?;
        fs::create_dir_all(out_dir).map_err(|e| failure(format!("{}: {e}", out_dir.display())))?;
        for k in 0..count {
            let inst = generate(params, seed + k as u64).map_err(failure)?;
            let path = out_dir.join(format!("{}.json", super::instance_id(params.task_count, k)));
            write_file(&path, &write_instance_string(&inst))?;
        }
        emit(stdout, &format!("wrote {count} instances to {}\n", out_dir.display()))?;
        Ok(ExitStatus::Success)
    };
    let r = body(stdout);
    finish(stdout, r)
}

/// Solves one instance file with one scheme. The schedule goes to `out` when given,
/// otherwise to `stdout` after the report line.
pub fn cmd_solve(
    instance_file: &Path,
    scheme: &str,
    options: &SolveOptions,
    seed: u64,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> ExitStatus {
    let body = |stdout: &mut dyn Write| -> CmdResult {
        let scheme = Scheme::parse(scheme).ok_or_else(|| usage(format!("unknown scheme `{scheme}`")))?;
        options.validate().map_err(usage)?;
        let inst = load_instance(instance_file)?;
        let (schedule, line) = match scheme {
            Scheme::Heuristic(k) => {
                let s = k.run(&inst, seed);
                let line = format!("scheme={} status=feasible makespan={}\n", k.name(), s.makespan);
                (s, line)
            }
            Scheme::Exact | Scheme::ExactPlain => {
                let mask = if scheme == Scheme::Exact { 7 } else { 0 };
                let opts = SolveOptions {
                    node_limit: options.node_limit,
                    time_limit: options.time_limit,
                    deterministic: options.deterministic,
                    ..SolveOptions::from_mask(mask)
                };
                let (s, rep) = solve_exact(&inst, &opts, &best_heuristic(&inst, seed)).map_err(failure)?;
                let line = format!(
                    "scheme={} status={} makespan={} nodes={}\n",
                    scheme.name(),
                    rep.status.as_str(),
                    s.makespan,
                    rep.nodes_explored
                );
                (s, line)
            }
            Scheme::GListMaster => return Err(usage("scheme `glist-master` is not supported")),
        };
        emit(stdout, &line)?;
        let doc = write_schedule_string(&schedule);
        match out {
            Some(path) => write_file(path, &doc)?,
            None => emit(stdout, &doc)?,
        }
        Ok(ExitStatus::Success)
    };
    let r = body(stdout);
    finish(stdout, r)
}

/// Checks a schedule file against an instance file, one violation per line.
pub fn cmd_check(instance_file: &Path, schedule_file: &Path, stdout: &mut dyn Write) -> ExitStatus {
    let body = |stdout: &mut dyn Write| -> CmdResult {
        let inst = load_instance(instance_file)?;
        let schedule = read_schedule_str(&inst, &read_text(schedule_file)?)
            .map_err(|e| usage(format!("{}: {e}", schedule_file.display())))?;
        let report = check_feasible(&inst, &schedule).map_err(usage)?;
        if report.feasible() {
            emit(stdout, &format!("feasible makespan={}\n", schedule.makespan))?;
            return Ok(ExitStatus::Success);
        }
        for v in &report.violations {
            emit(stdout, &format!("{} {}\n", v.constraint, v.detail))?;
        }
        Ok(ExitStatus::Failure)
    };
    let r = body(stdout);
    finish(stdout, r)
}

/// Writes the integer model to `out` (or `stdout`) and prints row counts per family.
/// Without `t_max` the instance's own horizon is used.
pub fn cmd_export_lp(
    instance_file: &Path,
    t_max: Option<Time>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> ExitStatus {
    let body = |stdout: &mut dyn Write| -> CmdResult {
        let inst = load_instance(instance_file)?;
        let model = build_default(&inst, t_max.unwrap_or_else(|| inst.horizon())).map_err(usage)?;
        let mut lp = Vec::new();
        export_lp(&model, &mut lp).map_err(failure)?;
        match out {
            Some(path) => fs::write(path, &lp).map_err(|e| failure(format!("{}: {e}", path.display())))?,
            None => stdout.write_all(&lp).map_err(failure)?,
        }
        let mut table = String::from("family,rows\n");
        let mut total = 0;
        for (fam, n) in constraint_counts(&model) {
            table.push_str(&format!("{},{n}\n", fam.as_str()));
            total += n;
        }
        table.push_str(&format!("total,{total}\n"));
        emit(stdout, &table)?;
        Ok(ExitStatus::Success)
    };
    let r = body(stdout);
    finish(stdout, r)
}

/// Runs a campaign and writes its CSV to `out` (or `stdout`). Per-row failures are
/// recorded in the status column and do not change the exit status.
pub fn cmd_bench(config: &BenchConfig, out: Option<&Path>, stdout: &mut dyn Write) -> ExitStatus {
    let body = |stdout: &mut dyn Write| -> CmdResult {
        config.validate().map_err(usage)?;
        let rows = run_bench(config).map_err(failure)?;
        let text = csv_string(&rows);
        match out {
            Some(path) => {
                write_file(path, &text)?;
                emit(stdout, &format!("wrote {} rows to {}\n", rows.len(), path.display()))?;
            }
            None => emit(stdout, &text)?,
        }
        Ok(ExitStatus::Success)
    };
    let r = body(stdout);
    finish(stdout, r)
}

/// Aggregates a campaign CSV into plot-ready long-format CSV.
pub fn cmd_report(csv_file: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> ExitStatus {
    let body = |stdout: &mut dyn Write| -> CmdResult {
        let rows = read_csv(read_text(csv_file)?.as_bytes())
            .map_err(|e| usage(format!("{}: {e}", csv_file.display())))?;
        let mut buf = Vec::new();
        write_report(&report(&rows), &mut buf).map_err(failure)?;
        match out {
            Some(path) => fs::write(path, &buf).map_err(|e| failure(format!("{}: {e}", path.display())))?,
            None => stdout.write_all(&buf).map_err(failure)?,
        }
        Ok(ExitStatus::Success)
    };
    let r = body(stdout);
    finish(stdout, r)
}

/// Convenience for callers that keep the generated file list.
pub fn generated_paths(params: &GenParams, count: usize, out_dir: &Path) -> Vec<PathBuf> {
    (0..count)
        .map(|k| out_dir.join(format!("{}.json", super::instance_id(params.task_count, k))))
        .collect()
}
