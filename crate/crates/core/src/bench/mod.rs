//! Benchmark campaigns: every scheme on every instance for a sweep of machine counts,
//! written as CSV, plus the aggregates behind the scheme and pruning comparisons.

mod commands;
mod files;

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dwdag::Time;
use crate::heuristics::{best_heuristic, HeuristicKind};
use crate::instgen::{generate, read_instance, GenParams, Instance, InstanceError};
use crate::schedule::{normalized_makespan, Schedule};
use crate::solver::{solve_exact, SolveOptions};

pub use commands::{
    cmd_bench, cmd_check, cmd_export_lp, cmd_gen, cmd_report, cmd_solve, generated_paths,
    ExitStatus,
};
pub use files::{read_schedule, read_schedule_str, write_schedule_string, ScheduleFile};

pub const CSV_HEADER: &str =
    "instance_id,seed,scheme,machines,channels,makespan,normalized_makespan,nodes_explored,status,wall_time_ms";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("CSV header mismatch: expected `{CSV_HEADER}`")]
    Header,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Heuristic(HeuristicKind),
    /// Branch-and-bound with every pruning strategy.
    Exact,
    /// Branch-and-bound with bound pruning only.
    ExactPlain,
    /// A variant without a published description; reported as unsupported.
    GListMaster,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Heuristic(k) => k.name(),
            Scheme::Exact => "exact",
            Scheme::ExactPlain => "exact-plain",
            Scheme::GListMaster => "glist-master",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "exact" => Some(Scheme::Exact),
            "exact-plain" => Some(Scheme::ExactPlain),
            "glist-master" => Some(Scheme::GListMaster),
            other => HeuristicKind::from_name(other).map(Scheme::Heuristic),
        }
    }

    pub fn is_solver(&self) -> bool {
        matches!(self, Scheme::Exact | Scheme::ExactPlain)
    }
}

/// Where campaign instances come from.
#[derive(Debug, Clone)]
pub enum InstanceSource {
    /// `count` instances drawn with seeds `base_seed + k`.
    Generated { params: GenParams, count: usize },
    /// Every `*.json` file of a directory, in file-name order.
    Directory(PathBuf),
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub source: InstanceSource,
    pub machines: Vec<usize>,
    pub channels: usize,
    pub schemes: Vec<Scheme>,
    pub base_seed: u64,
    /// Limits and mode for the exact schemes; the strategy switches are set per scheme.
    pub solver: SolveOptions,
}

impl BenchConfig {
    /// Full-size campaign: 3000 ten-task instances, one channel, `M` in 1..=4.
    pub fn campaign_defaults() -> Self {
        BenchConfig {
            source: InstanceSource::Generated {
                params: GenParams::default(),
                count: 3000,
            },
            machines: vec![1, 2, 3, 4],
            channels: 1,
            schemes: vec![
                Scheme::Heuristic(HeuristicKind::Random),
                Scheme::Heuristic(HeuristicKind::List),
                Scheme::Heuristic(HeuristicKind::GList),
                Scheme::Heuristic(HeuristicKind::Partition),
                Scheme::Exact,
            ],
            base_seed: 0,
            solver: SolveOptions::tabc(),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.schemes.is_empty() {
            return Err(BenchError::Config("no schemes selected".into()));
        }
        if self.machines.is_empty() || self.machines.contains(&0) || self.channels == 0 {
            return Err(BenchError::Config("machines and channels must be positive".into()));
        }
        if let InstanceSource::Generated { params, count } = &self.source {
            if *count == 0 {
                return Err(BenchError::Config("instance count must be at least 1".into()));
            }
            params.validate()?;
        }
        self.solver
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance_id: String,
    pub seed: u64,
    pub scheme: String,
    pub machines: usize,
    pub channels: usize,
    pub makespan: Option<Time>,
    /// Six decimals, so that CSV bytes do not depend on float printing.
    pub normalized_makespan: Option<String>,
    pub nodes_explored: Option<u64>,
    pub status: String,
    pub wall_time_ms: u64,
}

impl BenchRow {
    pub fn normalized(&self) -> Option<f64> {
        self.normalized_makespan.as_deref().and_then(|s| s.parse().ok())
    }

    /// Task count encoded in generated ids (`n10_00042` -> 10).
    pub fn task_bucket(&self) -> Option<usize> {
        self.instance_id
            .strip_prefix('n')?
            .split('_')
            .next()?
            .parse()
            .ok()
    }
}

pub fn instance_id(task_count: usize, index: usize) -> String {
    format!("n{task_count}_{index:05}")
}

/// `(id, seed, instance)` for every campaign instance, in campaign order.
pub fn load_instances(config: &BenchConfig) -> Result<Vec<(String, u64, Instance)>, BenchError> {
    match &config.source {
        InstanceSource::Generated { params, count } => (0..*count)
            .map(|k| {
                let seed = config.base_seed + k as u64;
                Ok((instance_id(params.task_count, k), seed, generate(params, seed)?))
            })
            .collect(),
        InstanceSource::Directory(dir) => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            paths
                .into_iter()
                .enumerate()
                .map(|(k, path)| {
                    let id = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    let inst = read_instance(std::fs::File::open(&path)?)?;
                    Ok((id, config.base_seed + k as u64, inst))
                })
                .collect()
        }
    }
}

fn row_for(
    id: &str,
    seed: u64,
    scheme: Scheme,
    inst: &Instance,
    outcome: Result<(Schedule, Option<u64>, &'static str), String>,
    millis: u64,
) -> BenchRow {
    let mut row = BenchRow {
        instance_id: id.to_string(),
        seed,
        scheme: scheme.name().to_string(),
        machines: inst.machines,
        channels: inst.channels,
        makespan: None,
        normalized_makespan: None,
        nodes_explored: None,
        status: String::new(),
        wall_time_ms: millis,
    };
    match outcome {
        Ok((s, nodes, status)) => match normalized_makespan(inst, &s) {
            Ok(norm) => {
                row.makespan = Some(s.makespan);
                row.normalized_makespan = Some(format!("{norm:.6}"));
                row.nodes_explored = nodes;
                row.status = status.to_string();
            }
            Err(e) => row.status = format!("infeasible: {e}"),
        },
        Err(msg) => row.status = msg,
    }
    row
}

/// All rows of one instance: machine counts ascending, each exact scheme warm-started
/// from the best heuristic and from its own schedule at the previous machine count.
fn instance_rows(config: &BenchConfig, id: &str, seed: u64, base: &Instance) -> Vec<BenchRow> {
    let mut machines = config.machines.clone();
    machines.sort_unstable();
    machines.dedup();
    let mut previous: BTreeMap<Scheme, Schedule> = BTreeMap::new();
    let mut rows = Vec::new();
    for &m in &machines {
        let inst = match base.with_resources(m, config.channels) {
            Ok(i) => i,
            Err(e) => {
                for &scheme in &config.schemes {
                    rows.push(row_for(id, seed, scheme, base, Err(format!("error: {e}")), 0));
                    rows.last_mut().expect("just pushed").machines = m;
                }
                continue;
            }
        };
        let warm = config
            .schemes
            .iter()
            .any(|s| s.is_solver())
            .then(|| best_heuristic(&inst, seed));
        for &scheme in &config.schemes {
            let clock = Instant::now();
            let outcome = match scheme {
                Scheme::Heuristic(k) => Ok((k.run(&inst, seed), None, "feasible")),
                Scheme::GListMaster => Err("unsupported".to_string()),
                Scheme::Exact | Scheme::ExactPlain => {
                    let mask = if scheme == Scheme::Exact { 7 } else { 0 };
                    let opts = SolveOptions {
                        node_limit: config.solver.node_limit,
                        time_limit: config.solver.time_limit,
                        deterministic: config.solver.deterministic,
                        ..SolveOptions::from_mask(mask)
                    };
                    let mut start = warm.clone().expect("computed for solver schemes");
                    if let Some(p) = previous.get(&scheme) {
                        if p.makespan < start.makespan {
                            start = p.clone();
                        }
                    }
                    match solve_exact(&inst, &opts, &start) {
                        Ok((s, report)) => {
                            previous.insert(scheme, s.clone());
                            Ok((s, Some(report.nodes_explored), report.status.as_str()))
                        }
                        Err(e) => Err(format!("error: {e}")),
                    }
                }
            };
            let millis = if config.solver.deterministic {
                0
            } else {
                clock.elapsed().as_millis() as u64
            };
            rows.push(row_for(id, seed, scheme, &inst, outcome, millis));
        }
    }
    rows
}

/// Runs the campaign. Rows come back sorted by `(instance_id, scheme, machines)`;
/// in deterministic mode wall times are written as 0 so output bytes repeat exactly.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    config.validate()?;
    let instances = load_instances(config)?;
    let mut rows: Vec<BenchRow> = if config.solver.deterministic {
        instances
            .iter()
            .flat_map(|(id, seed, inst)| instance_rows(config, id, *seed, inst))
            .collect()
    } else {
        instances
            .par_iter()
            .flat_map_iter(|(id, seed, inst)| instance_rows(config, id, *seed, inst))
            .collect()
    };
    rows.sort_by(|a, b| {
        (&a.instance_id, &a.scheme, a.machines).cmp(&(&b.instance_id, &b.scheme, b.machines))
    });
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], sink: W) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    w.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[BenchRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

pub fn read_csv<R: Read>(source: R) -> Result<Vec<BenchRow>, BenchError> {
    let mut r = csv::Reader::from_reader(source);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(BenchError::Header);
    }
    r.deserialize()
        .map(|row| row.map_err(BenchError::from))
        .collect()
}

/// One aggregate: a mean over `count` rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub metric: &'static str,
    pub scheme: String,
    /// Machine count for makespan means; empty for node-count means.
    pub machines: Option<usize>,
    /// Task-count bucket for node-count means; empty for makespan means.
    pub tasks: Option<usize>,
    pub value: String,
    pub count: usize,
}

/// Mean normalized makespan per `(scheme, machines)` and, for the exact schemes, mean
/// nodes explored per task-count bucket. Rows without a makespan are skipped.
pub fn report(rows: &[BenchRow]) -> Vec<ReportRow> {
    let mut makespans: BTreeMap<(String, usize), (f64, usize)> = BTreeMap::new();
    let mut nodes: BTreeMap<(String, Option<usize>), (f64, usize)> = BTreeMap::new();
    for row in rows {
        let Some(norm) = row.normalized() else { continue };
        let e = makespans
            .entry((row.scheme.clone(), row.machines))
            .or_insert((0.0, 0));
        e.0 += norm;
        e.1 += 1;
        if let Some(n) = row.nodes_explored {
            let e = nodes.entry((row.scheme.clone(), row.task_bucket())).or_insert((0.0, 0));
            e.0 += n as f64;
            e.1 += 1;
        }
    }
    let mut out: Vec<ReportRow> = makespans
        .into_iter()
        .map(|((scheme, machines), (sum, count))| ReportRow {
            metric: "mean_normalized_makespan",
            scheme,
            machines: Some(machines),
            tasks: None,
            value: format!("{:.6}", sum / count as f64),
            count,
        })
        .collect();
    out.extend(nodes.into_iter().map(|((scheme, tasks), (sum, count))| ReportRow {
        metric: "mean_nodes_explored",
        scheme,
        machines: None,
        tasks,
        value: format!("{:.3}", sum / count as f64),
        count,
    }));
    out
}

pub fn write_report<W: Write>(rows: &[ReportRow], sink: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(sink);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(schemes: Vec<Scheme>, machines: Vec<usize>, count: usize) -> BenchConfig {
        BenchConfig {
            source: InstanceSource::Generated {
                params: GenParams {
                    task_count: 5,
                    ..GenParams::default()
                },
                count,
            },
            machines,
            channels: 1,
            schemes,
            base_seed: 100,
            solver: SolveOptions::tabc(),
        }
    }

    #[test]
    fn cardinality_and_order() {
        let cfg = small(
            vec![Scheme::Heuristic(HeuristicKind::List), Scheme::Exact],
            vec![2, 1],
            2,
        );
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 8);
        let keys: Vec<_> = rows
            .iter()
            .map(|r| (r.instance_id.as_str(), r.scheme.as_str(), r.machines))
            .collect();
        assert_eq!(keys[0], ("n5_00000", "exact", 1));
        assert_eq!(keys[3], ("n5_00000", "list", 2));
        let text = csv_string(&rows);
        assert!(text.starts_with(&format!("{CSV_HEADER}\n")));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn exact_beats_heuristics_and_is_one_on_a_single_machine() {
        let mut schemes: Vec<Scheme> = HeuristicKind::ALL.map(Scheme::Heuristic).to_vec();
        schemes.push(Scheme::Exact);
        let rows = run_bench(&small(schemes, vec![1, 2, 3], 4)).unwrap();
        for r in rows.iter().filter(|r| r.scheme == "exact") {
            if r.machines == 1 {
                assert_eq!(r.normalized(), Some(1.0));
            }
            for other in rows
                .iter()
                .filter(|o| o.instance_id == r.instance_id && o.machines == r.machines)
            {
                assert!(r.makespan <= other.makespan, "{r:?} vs {other:?}");
            }
        }
    }

    #[test]
    fn unsupported_scheme_rows() {
        let rows = run_bench(&small(vec![Scheme::GListMaster], vec![2], 1)).unwrap();
        assert_eq!(rows[0].status, "unsupported");
        assert_eq!(rows[0].makespan, None);
    }

    #[test]
    fn report_means() {
        let rows = run_bench(&small(vec![Scheme::Exact], vec![2], 1)).unwrap();
        let rep = report(&rows);
        assert_eq!(rep[0].value, rows[0].normalized_makespan.clone().unwrap());
        assert_eq!(rep[0].count, 1);
        assert_eq!(rep[1].metric, "mean_nodes_explored");
        assert_eq!(rep[1].tasks, Some(5));
    }

    #[test]
    fn bad_configs() {
        assert!(run_bench(&small(vec![], vec![1], 1)).is_err());
        assert!(run_bench(&small(vec![Scheme::Exact], vec![0], 1)).is_err());
        assert!(run_bench(&small(vec![Scheme::Exact], vec![1], 0)).is_err());
        assert!(matches!(read_csv("a,b\n1,2\n".as_bytes()), Err(BenchError::Header)));
    }

    #[test]
    fn scheme_names() {
        for name in ["random", "list", "glist", "partition", "exact", "exact-plain", "glist-master"] {
            assert_eq!(Scheme::parse(name).unwrap().name(), name);
        }
        assert_eq!(Scheme::parse("simplex"), None);
    }
}
