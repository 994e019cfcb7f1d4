//! Dual-weighted DAG job model.
//!
//! A job is a set of computation tasks with integer processing times and a set of
//! dependency edges. Every edge carries two transfer times: `r` when producer and
//! consumer share a machine (internal transfer) and `q` when the data crosses a
//! network channel (external transfer). Each edge is also the identity of the
//! general flow carried on it, so flow ids and edge ids coincide.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt;

use thiserror::Error;

/// Time measured in whole slots.
pub type Time = i64;
/// Dense task index, `0..task_count`.
pub type TaskId = usize;
/// Dense flow index; identical to the index of the edge carrying it.
pub type FlowId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    /// Producer.
    pub u: TaskId,
    /// Consumer.
    pub v: TaskId,
    /// External transfer time.
    pub q: Time,
    /// Internal transfer time.
    pub r: Time,
}

impl Edge {
    pub fn new(u: TaskId, v: TaskId, q: Time, r: Time) -> Self {
        Edge { u, v, q, r }
    }

    /// The smaller of the two transfer times, a placement-independent lower bound.
    pub fn min_transfer(&self) -> Time {
        self.q.min(self.r)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("job graph contains a cycle")]
    Cyclic,
}

/// Immutable job graph. Adjacency is computed once at construction; no
/// validation happens there, see [`JobGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobGraph {
    durations: Vec<Time>,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<FlowId>>,
    in_edges: Vec<Vec<FlowId>>,
}

impl JobGraph {
    /// Builds a graph. Edges whose endpoints are out of range are kept (so they can
    /// be reported by `validate`) but are left out of the adjacency lists.
    pub fn new(durations: Vec<Time>, edges: Vec<Edge>) -> Self {
        let n = durations.len();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            if e.u < n && e.v < n {
                out_edges[e.u].push(id);
                in_edges[e.v].push(id);
            }
        }
        JobGraph {
            durations,
            edges,
            out_edges,
            in_edges,
        }
    }

    pub fn task_count(&self) -> usize {
        self.durations.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn duration(&self, task: TaskId) -> Time {
        self.durations[task]
    }

    pub fn durations(&self) -> &[Time] {
        &self.durations
    }

    pub fn edge(&self, flow: FlowId) -> &Edge {
        &self.edges[flow]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Ids of the edges leaving `task`, ascending.
    pub fn out_edges(&self, task: TaskId) -> &[FlowId] {
        &self.out_edges[task]
    }

    /// Ids of the edges entering `task`, ascending.
    pub fn in_edges(&self, task: TaskId) -> &[FlowId] {
        &self.in_edges[task]
    }

    pub fn total_duration(&self) -> Time {
        self.durations.iter().sum()
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn topo_order(&self) -> Result<Vec<TaskId>, GraphError> {
        topo_order(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationCode {
    Cycle,
    NonpositiveDuration,
    NegativeWeight,
    SelfLoop,
    DuplicateEdge,
    UnknownTask,
}

impl ViolationCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationCode::Cycle => "CYCLE",
            ViolationCode::NonpositiveDuration => "NONPOSITIVE_DURATION",
            ViolationCode::NegativeWeight => "NEGATIVE_WEIGHT",
            ViolationCode::SelfLoop => "SELF_LOOP",
            ViolationCode::DuplicateEdge => "DUPLICATE_EDGE",
            ViolationCode::UnknownTask => "UNKNOWN_TASK",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    fn push(&mut self, code: ViolationCode, message: String) {
        self.violations.push(Violation { code, message });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", v.code, v.message)?;
        }
        Ok(())
    }
}

/// Reports every structural problem of `graph` instead of stopping at the first.
pub fn validate(graph: &JobGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = graph.task_count();
    for (j, &p) in graph.durations.iter().enumerate() {
        if p < 1 {
            report.push(
                ViolationCode::NonpositiveDuration,
                format!("task {j} has processing time {p}"),
            );
        }
    }
    let mut seen = BTreeSet::new();
    for (id, e) in graph.edges.iter().enumerate() {
        if e.u >= n || e.v >= n {
            report.push(
                ViolationCode::UnknownTask,
                format!("edge {id} ({} -> {}) references a missing task", e.u, e.v),
            );
        }
        if e.u == e.v {
            report.push(
                ViolationCode::SelfLoop,
                format!("edge {id} is a self-loop on task {}", e.u),
            );
        }
        if e.q < 0 || e.r < 0 {
            report.push(
                ViolationCode::NegativeWeight,
                format!("edge {id} ({} -> {}) has q={} r={}", e.u, e.v, e.q, e.r),
            );
        }
        if !seen.insert((e.u, e.v)) {
            report.push(
                ViolationCode::DuplicateEdge,
                format!("edge {id} duplicates dependency {} -> {}", e.u, e.v),
            );
        }
    }
    if let Err(stuck) = kahn(graph) {
        report.push(
            ViolationCode::Cycle,
            format!("tasks {stuck:?} lie on or behind a cycle"),
        );
    }
    report
}

// Kahn's algorithm with a min-heap, so ties resolve to the smallest id. On failure
// returns the tasks that never became ready.
fn kahn(graph: &JobGraph) -> Result<Vec<TaskId>, Vec<TaskId>> {
    let n = graph.task_count();
    let mut indeg: Vec<usize> = (0..n).map(|j| graph.in_edges[j].len()).collect();
    let mut heap: BinaryHeap<Reverse<TaskId>> =
        (0..n).filter(|&j| indeg[j] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = heap.pop() {
        order.push(u);
        for &e in &graph.out_edges[u] {
            let v = graph.edges[e].v;
            indeg[v] -= 1;
            if indeg[v] == 0 {
                heap.push(Reverse(v));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&j| indeg[j] > 0).collect())
    }
}

/// Deterministic topological order, ties broken by ascending id.
pub fn topo_order(graph: &JobGraph) -> Result<Vec<TaskId>, GraphError> {
    kahn(graph).map_err(|_| GraphError::Cyclic)
}

/// Longest path counting every task's processing time and, per traversed edge,
/// `min(r, q)`. No placement can beat it.
pub fn critical_path_bound(graph: &JobGraph) -> Result<Time, GraphError> {
    let order = topo_order(graph)?;
    let mut finish = vec![0; graph.task_count()];
    for &v in &order {
        let ready = graph.in_edges[v]
            .iter()
            .map(|&e| {
                let edge = &graph.edges[e];
                finish[edge.u] + edge.min_transfer()
            })
            .max()
            .unwrap_or(0);
        finish[v] = ready + graph.durations[v];
    }
    Ok(finish.into_iter().max().unwrap_or(0))
}

/// Dense transitive-closure matrix; `get(u, v)` is true iff a directed path
/// `u -> ... -> v` exists. The diagonal is always false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reachability {
    n: usize,
    bits: Vec<bool>,
}

impl Reachability {
    pub fn get(&self, u: TaskId, v: TaskId) -> bool {
        self.bits[u * self.n + v]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Either task reaches the other.
    pub fn related(&self, a: TaskId, b: TaskId) -> bool {
        self.get(a, b) || self.get(b, a)
    }
}

pub fn reachability(graph: &JobGraph) -> Result<Reachability, GraphError> {
    let n = graph.task_count();
    let order = topo_order(graph)?;
    let mut bits = vec![false; n * n];
    // reverse topological sweep: a task reaches its successors and everything they reach
    for &u in order.iter().rev() {
        for &e in &graph.out_edges[u] {
            let v = graph.edges[e].v;
            bits[u * n + v] = true;
            for w in 0..n {
                if bits[v * n + w] {
                    bits[u * n + w] = true;
                }
            }
        }
    }
    Ok(Reachability { n, bits })
}

// Sorted (neighbour, q, r) signature of one side of a task.
fn signature(graph: &JobGraph, task: TaskId, incoming: bool) -> Vec<(TaskId, Time, Time)> {
    let ids = if incoming {
        &graph.in_edges[task]
    } else {
        &graph.out_edges[task]
    };
    let mut sig: Vec<_> = ids
        .iter()
        .map(|&e| {
            let edge = &graph.edges[e];
            let other = if incoming { edge.u } else { edge.v };
            (other, edge.q, edge.r)
        })
        .collect();
    sig.sort_unstable();
    sig
}

/// Groups tasks that are interchangeable: equal processing time and identical
/// predecessor and successor sets with matching edge weights. Classes are sorted
/// by their smallest member; singletons are omitted.
pub fn equivalent_siblings(graph: &JobGraph) -> Vec<Vec<TaskId>> {
    let n = graph.task_count();
    let keys: Vec<_> = (0..n)
        .map(|j| {
            (
                graph.durations[j],
                signature(graph, j, true),
                signature(graph, j, false),
            )
        })
        .collect();
    let mut assigned = vec![false; n];
    let mut classes = Vec::new();
    for a in 0..n {
        if assigned[a] {
            continue;
        }
        let mut class = vec![a];
        for b in a + 1..n {
            if !assigned[b] && keys[a] == keys[b] {
                assigned[b] = true;
                class.push(b);
            }
        }
        if class.len() > 1 {
            classes.push(class);
        }
    }
    classes
}
