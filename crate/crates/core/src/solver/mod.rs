//! Exact makespan minimization.
//!
//! [`solve_exact`] is a depth-first branch-and-bound. It places tasks in topological
//! order (machines ascending), then assigns real channels to the external flows, then
//! sequences same-resource pairs that are still unordered. Three optional strategies
//! cut the tree:
//!
//! * chain pruning: pairs already ordered by a path through the job graph, or by
//!   transitivity over earlier decisions, are never branched on;
//! * interval pruning: start windows `[EST, LST]` derived from longest paths and the
//!   incumbent force pair orders, prune nodes whose pairs cannot be ordered at all,
//!   and close a node as soon as its earliest-start realization is conflict free;
//! * symmetry breaking: machines and channels are opened in first-use order and
//!   interchangeable sibling tasks start in id order.
//!
//! Every node is also bounded by the critical path through its current precedence
//! network, per-resource committed load and the global load bound `⌈ΣP / M⌉`.
//!
//! [`solve_bruteforce`] is an independent oracle for tiny instances that enumerates
//! placements, sequences and channel orders and evaluates each through
//! [`earliest_start_schedule`](crate::schedule::earliest_start_schedule).

mod bruteforce;
mod search;

use std::time::Duration;

use thiserror::Error;

use crate::dwdag::{equivalent_siblings, reachability, FlowId, GraphError, JobGraph, TaskId, Time};
use crate::instgen::Instance;
use crate::schedule::{
    baseline_schedule, check_feasible, FeasibilityReport, Schedule, ScheduleError,
};

pub use bruteforce::{solve_bruteforce, BruteForceLimits};
pub use search::{solve_exact, SearchNode};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("warm start is infeasible: {0}")]
    InfeasibleWarmStart(FeasibilityReport),
    #[error("instance exceeds the enumeration caps: {0}")]
    TooLarge(String),
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub enable_chain_pruning: bool,
    pub enable_interval_pruning: bool,
    pub enable_symmetry_breaking: bool,
    /// Maximum number of evaluated nodes.
    pub node_limit: Option<u64>,
    /// Wall-clock budget. Ignored in deterministic mode so that node counts repeat.
    pub time_limit: Option<Duration>,
    /// Single-threaded search with reproducible node counts and incumbents.
    pub deterministic: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions::tabc()
    }
}

impl SolveOptions {
    /// All three strategies on, deterministic, unlimited.
    pub fn tabc() -> Self {
        SolveOptions {
            enable_chain_pruning: true,
            enable_interval_pruning: true,
            enable_symmetry_breaking: true,
            node_limit: None,
            time_limit: None,
            deterministic: true,
        }
    }

    /// Bound pruning only.
    pub fn plain() -> Self {
        SolveOptions {
            enable_chain_pruning: false,
            enable_interval_pruning: false,
            enable_symmetry_breaking: false,
            ..SolveOptions::tabc()
        }
    }

    /// The strategy subset encoded in the low three bits of `mask`
    /// (chain = 1, interval = 2, symmetry = 4).
    pub fn from_mask(mask: u8) -> Self {
        SolveOptions {
            enable_chain_pruning: mask & 1 != 0,
            enable_interval_pruning: mask & 2 != 0,
            enable_symmetry_breaking: mask & 4 != 0,
            ..SolveOptions::tabc()
        }
    }

    pub fn with_node_limit(self, limit: u64) -> Self {
        SolveOptions {
            node_limit: Some(limit),
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if self.node_limit == Some(0) {
            return Err(SolveError::InvalidOptions("node_limit must be positive".into()));
        }
        if self.time_limit == Some(Duration::ZERO) {
            return Err(SolveError::InvalidOptions("time_limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    FeasibleIncumbent,
    /// Kept for completeness: a feasible warm start is required, so the search never
    /// ends without a schedule.
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleIncumbent => "feasible",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Counts of subtrees or branchings removed, by cause.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PruneCounts {
    /// Pair decisions settled by precedence chains instead of branching.
    pub chain: u64,
    /// Nodes cut or pair orders forced by start windows, plus nodes closed early.
    pub interval: u64,
    /// Machine or channel options skipped as relabelings of explored ones.
    pub symmetry: u64,
    /// Nodes whose lower bound reached the incumbent.
    pub bound: u64,
    /// Nodes whose decisions formed a positive cycle.
    pub infeasible: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub best_makespan: Time,
    pub nodes_explored: u64,
    pub prunes: PruneCounts,
    /// `(node index, bound)`, non-decreasing.
    pub lb_trajectory: Vec<(u64, Time)>,
    /// `(node index, incumbent)`, non-increasing.
    pub ub_trajectory: Vec<(u64, Time)>,
    pub wall_time: Duration,
}

/// Ceiling of `a / b` for positive `b`.
fn div_ceil(a: Time, b: Time) -> Time {
    (a + b - 1).div_euclid(b)
}

/// `lb = max(⌈ΣP / M⌉, critical path)`, `ub = min(makespan(warm), baseline)`.
pub fn initial_bounds(instance: &Instance, warm: &Schedule) -> Result<(Time, Time), SolveError> {
    let report = check_feasible(instance, warm)?;
    if !report.feasible() {
        return Err(SolveError::InfeasibleWarmStart(report));
    }
    let g = &instance.graph;
    let cp = crate::dwdag::critical_path_bound(g).expect("instances hold acyclic graphs");
    let lb = div_ceil(g.total_duration(), instance.machines as Time).max(cp);
    let ub = warm.makespan.min(baseline_schedule(instance).makespan);
    Ok((lb, ub))
}

/// Orders implied by the job graph alone.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixedPrecedences {
    /// `(a, b)`: task `a` finishes before `b` starts (every reachable pair).
    pub sigma: Vec<(TaskId, TaskId)>,
    /// `(f, g)`: flow `f` ends before flow `g` starts, because the consumer of `f`
    /// is or reaches the producer of `g`.
    pub phi: Vec<(FlowId, FlowId)>,
}

pub fn fixed_precedences(graph: &JobGraph) -> Result<FixedPrecedences, GraphError> {
    let reach = reachability(graph)?;
    let n = graph.task_count();
    let mut out = FixedPrecedences::default();
    for a in 0..n {
        for b in 0..n {
            if reach.get(a, b) {
                out.sigma.push((a, b));
            }
        }
    }
    for (f, ef) in graph.edges().iter().enumerate() {
        for (h, eh) in graph.edges().iter().enumerate() {
            if f != h && (ef.v == eh.u || reach.get(ef.v, eh.u)) {
                out.phi.push((f, h));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryFixes {
    /// First task in topological order; always placed on machine 1.
    pub pinned_task: Option<TaskId>,
    /// `(a, b)` with `a < b` interchangeable: `a` starts no later than `b`.
    pub sibling_order: Vec<(TaskId, TaskId)>,
}

impl SymmetryFixes {
    /// Highest machine (or channel) index worth trying when `used` is the highest
    /// one already in use (0 when none) out of `available`.
    pub fn first_use_limit(used: usize, available: usize) -> usize {
        (used + 1).min(available)
    }
}

pub fn symmetry_constraints(instance: &Instance) -> SymmetryFixes {
    let g = &instance.graph;
    let topo = g.topo_order().expect("instances hold acyclic graphs");
    let sibling_order = equivalent_siblings(g)
        .iter()
        .flat_map(|class| class.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>())
        .collect();
    SymmetryFixes {
        pinned_task: topo.first().copied(),
        sibling_order,
    }
}

/// Whether a node was closed by its start windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pruned;

/// Start windows `[EST, LST]` of every activity (tasks first, then flows) at `node`,
/// for schedules finishing by `ub`. Undetermined transfers count as `min(r, q)`.
/// Windows are intersected with the node's current ones, so they never widen.
pub fn tighten_intervals(
    instance: &Instance,
    lb: Time,
    ub: Time,
    node: &SearchNode,
) -> Result<Vec<(Time, Time)>, Pruned> {
    if lb > ub {
        return Err(Pruned);
    }
    let net = search::Network::build(instance, node, &[]).ok_or(Pruned)?;
    let mut out = Vec::with_capacity(net.head.len());
    for a in 0..net.head.len() {
        let mut w = (net.head[a], ub - net.tail[a]);
        if let Some(&(lo, hi)) = node.windows.get(a) {
            w = (w.0.max(lo), w.1.min(hi));
        }
        if w.0 > w.1 {
            return Err(Pruned);
        }
        out.push(w);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dwdag::Edge;
    use crate::schedule::{earliest_start_schedule, Channel, FlowPlacement, TaskPlacement};

    fn inst(p: Vec<Time>, edges: Vec<Edge>, m: usize, n: usize) -> Instance {
        Instance::new(JobGraph::new(p, edges), m, n, None).unwrap()
    }

    pub(crate) fn chain() -> Instance {
        inst(vec![2, 3], vec![Edge::new(0, 1, 4, 1)], 2, 1)
    }

    pub(crate) fn fork() -> Instance {
        inst(
            vec![1, 4, 4],
            vec![Edge::new(0, 1, 2, 0), Edge::new(0, 2, 2, 0)],
            2,
            1,
        )
    }

    #[test]
    fn bounds_meet_for_independent_tasks() {
        let i = inst(vec![5, 7], vec![], 2, 1);
        let warm = Schedule::new(
            &i,
            vec![
                TaskPlacement { machine: 1, start: 0 },
                TaskPlacement { machine: 2, start: 0 },
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(initial_bounds(&i, &warm).unwrap(), (7, 7));
    }

    #[test]
    fn baseline_dominates_a_poor_warm_start() {
        let i = chain();
        let warm = earliest_start_schedule(&i, &[1, 2], &[vec![0], vec![1]], &[vec![0]]).unwrap();
        assert_eq!(warm.makespan, 9);
        assert_eq!(initial_bounds(&i, &warm).unwrap(), (6, 6));
    }

    #[test]
    fn fork_bounds() {
        let i = fork();
        let warm = baseline_schedule(&i);
        assert_eq!(warm.makespan, 9);
        // ⌈9 / 2⌉ = 5 and the critical path 1 + 0 + 4 = 5
        assert_eq!(initial_bounds(&i, &warm).unwrap(), (5, 9));
    }

    #[test]
    fn infeasible_warm_start_is_rejected() {
        let i = chain();
        let bad = Schedule {
            tasks: vec![
                TaskPlacement { machine: 1, start: 0 },
                TaskPlacement { machine: 2, start: 0 },
            ],
            flows: vec![FlowPlacement {
                channel: Channel::Virtual,
                start: 2,
            }],
            makespan: 3,
        };
        assert!(matches!(
            initial_bounds(&i, &bad),
            Err(SolveError::InfeasibleWarmStart(_))
        ));
    }

    #[test]
    fn chain_and_fork_precedences() {
        let chain3 = JobGraph::new(
            vec![1, 1, 1],
            vec![Edge::new(0, 1, 1, 0), Edge::new(1, 2, 1, 0)],
        );
        let fp = fixed_precedences(&chain3).unwrap();
        assert_eq!(fp.sigma, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(fp.phi, vec![(0, 1)]);
        let fp = fixed_precedences(&fork().graph).unwrap();
        assert_eq!(fp.sigma, vec![(0, 1), (0, 2)]);
        assert!(fp.phi.is_empty());
    }

    #[test]
    fn symmetry_fixes() {
        let i = fork().with_resources(3, 1).unwrap();
        let s = symmetry_constraints(&i);
        assert_eq!(s.pinned_task, Some(0));
        assert_eq!(s.sibling_order, vec![(1, 2)]);
        assert_eq!(SymmetryFixes::first_use_limit(0, 2), 1);
        assert_eq!(SymmetryFixes::first_use_limit(1, 2), 2);
        assert_eq!(SymmetryFixes::first_use_limit(2, 2), 2);
    }

    #[test]
    fn chain_windows() {
        let i = chain();
        let root = SearchNode::root(&i);
        let w = tighten_intervals(&i, 6, 6, &root).unwrap();
        assert_eq!(w[1], (3, 3));
        assert_eq!(w[0], (0, 0));
        assert_eq!(tighten_intervals(&i, 5, 5, &root), Err(Pruned));
        let single = inst(vec![5], vec![], 1, 1);
        assert_eq!(
            tighten_intervals(&single, 5, 5, &SearchNode::root(&single)).unwrap(),
            vec![(0, 0)]
        );
    }

    #[test]
    fn windows_never_widen() {
        let i = chain();
        let mut node = SearchNode::root(&i);
        node.windows = vec![(0, 0), (3, 3), (2, 2)];
        let w = tighten_intervals(&i, 6, 20, &node).unwrap();
        assert_eq!(w, vec![(0, 0), (3, 3), (2, 2)]);
    }

    #[test]
    fn option_masks() {
        assert_eq!(SolveOptions::from_mask(7), SolveOptions::tabc());
        assert_eq!(SolveOptions::from_mask(0), SolveOptions::plain());
        assert!(SolveOptions::tabc().with_node_limit(0).validate().is_err());
    }
}
