use std::sync::atomic::{AtomicBool, AtomicI64, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;

use super::{
    fixed_precedences, initial_bounds, symmetry_constraints, PruneCounts, SolveError,
    SolveOptions, SolveReport, SolveStatus, SymmetryFixes,
};
use crate::dwdag::{TaskId, Time};
use crate::instgen::Instance;
use crate::schedule::{baseline_schedule, Channel, FlowPlacement, Schedule, TaskPlacement};

/// A partial solution. Activities are indexed tasks first (`0..J`), then flows
/// (`J..J+F`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchNode {
    /// Machine of each task, once placed.
    pub placement: Vec<Option<usize>>,
    /// Channel of each flow, once known: virtual as soon as both endpoints share a
    /// machine, real once assigned.
    pub channels: Vec<Option<Channel>>,
    /// `(a, b)`: activity `a` finishes before activity `b` starts.
    pub before: Vec<(usize, usize)>,
    /// Start windows from the last tightening; empty until computed.
    pub windows: Vec<(Time, Time)>,
}

impl SearchNode {
    pub fn root(instance: &Instance) -> Self {
        SearchNode {
            placement: vec![None; instance.graph.task_count()],
            channels: vec![None; instance.graph.edge_count()],
            before: Vec::new(),
            windows: Vec::new(),
        }
    }

    fn place(&self, instance: &Instance, task: TaskId, machine: usize) -> Self {
        let mut next = self.clone();
        next.placement[task] = Some(machine);
        let g = &instance.graph;
        for &f in g.in_edges(task).iter().chain(g.out_edges(task)) {
            let e = g.edge(f);
            if let (Some(mu), Some(mv)) = (next.placement[e.u], next.placement[e.v]) {
                next.channels[f] = if mu == mv {
                    Some(Channel::Virtual)
                } else if instance.channels == 1 {
                    Some(Channel::Real(1))
                } else {
                    None
                };
            }
        }
        next
    }
}

/// Longest-path view of a node: durations, earliest starts and tails (longest
/// distance from an activity's start to the end of the schedule).
pub(crate) struct Network {
    pub dur: Vec<Time>,
    pub head: Vec<Time>,
    pub tail: Vec<Time>,
    /// `(from, to, lag)`: `start(to) >= start(from) + lag`.
    pub arcs: Vec<(usize, usize, Time)>,
}

impl Network {
    /// `None` when the node's decisions form a positive cycle.
    pub fn build(
        instance: &Instance,
        node: &SearchNode,
        siblings: &[(TaskId, TaskId)],
    ) -> Option<Network> {
        let g = &instance.graph;
        let nj = g.task_count();
        let n = nj + g.edge_count();
        let mut dur: Vec<Time> = g.durations().to_vec();
        for (f, e) in g.edges().iter().enumerate() {
            dur.push(match (node.placement[e.u], node.placement[e.v]) {
                (Some(a), Some(b)) if a == b => e.r,
                (Some(_), Some(_)) => e.q,
                _ => e.min_transfer(),
            });
            debug_assert_eq!(dur.len(), nj + f + 1);
        }
        let mut arcs = Vec::with_capacity(2 * g.edge_count() + node.before.len() + siblings.len());
        for (f, e) in g.edges().iter().enumerate() {
            arcs.push((e.u, nj + f, dur[e.u]));
            arcs.push((nj + f, e.v, dur[nj + f]));
        }
        for &(a, b) in siblings {
            let same = node.placement[a].is_some() && node.placement[a] == node.placement[b];
            arcs.push((a, b, if same { dur[a] } else { 0 }));
        }
        // a zero-length flow still holds its channel for the slot it starts in
        for &(a, b) in &node.before {
            arcs.push((a, b, dur[a].max(1)));
        }

        let mut head = vec![0; n];
        if !relax(n, &mut head, arcs.iter().map(|&(a, b, l)| (a, b, l))) {
            return None;
        }
        let mut tail = dur.clone();
        // reversed arcs: tail(a) >= lag + tail(b)
        if !relax(n, &mut tail, arcs.iter().map(|&(a, b, l)| (b, a, l))) {
            return None;
        }
        Some(Network {
            dur,
            head,
            tail,
            arcs,
        })
    }

    pub fn makespan_bound(&self) -> Time {
        (0..self.head.len())
            .map(|a| self.head[a] + self.tail[a])
            .max()
            .unwrap_or(0)
    }
}

// Bellman-Ford style longest paths; false on a positive cycle.
fn relax(
    n: usize,
    dist: &mut [Time],
    arcs: impl Iterator<Item = (usize, usize, Time)> + Clone,
) -> bool {
    for _ in 0..=n {
        let mut changed = false;
        for (a, b, lag) in arcs.clone() {
            if dist[a] + lag > dist[b] {
                dist[b] = dist[a] + lag;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
    false
}

// Square bit matrix for transitive closure of "finishes before".
struct Closure {
    words: usize,
    bits: Vec<u64>,
}

impl Closure {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Closure {
            words,
            bits: vec![0; n * words],
        }
    }

    fn set(&mut self, a: usize, b: usize) {
        self.bits[a * self.words + b / 64] |= 1 << (b % 64);
    }

    fn get(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    fn close(&mut self, n: usize) {
        for k in 0..n {
            for i in 0..n {
                if i != k && self.get(i, k) {
                    for w in 0..self.words {
                        let v = self.bits[k * self.words + w];
                        self.bits[i * self.words + w] |= v;
                    }
                }
            }
        }
    }
}

enum Outcome {
    Pruned,
    Leaf(Schedule),
    Branch(Vec<SearchNode>),
}

#[derive(Default)]
struct Counters {
    chain: AtomicU64,
    interval: AtomicU64,
    symmetry: AtomicU64,
    bound: AtomicU64,
    infeasible: AtomicU64,
}

impl Counters {
    fn snapshot(&self) -> PruneCounts {
        PruneCounts {
            chain: self.chain.load(Ordering::Relaxed),
            interval: self.interval.load(Ordering::Relaxed),
            symmetry: self.symmetry.load(Ordering::Relaxed),
            bound: self.bound.load(Ordering::Relaxed),
            infeasible: self.infeasible.load(Ordering::Relaxed),
        }
    }
}

fn bump(c: &AtomicU64, by: u64) {
    c.fetch_add(by, Ordering::Relaxed);
}

struct Incumbent {
    schedule: Schedule,
    trajectory: Vec<(u64, Time)>,
}

// State shared by all workers.
struct Shared {
    ub: AtomicI64,
    best: Mutex<Incumbent>,
    nodes: AtomicU64,
    stopped: AtomicBool,
    counters: Counters,
    root_lb: Time,
    node_limit: Option<u64>,
    deadline: Option<Instant>,
}

impl Shared {
    fn ub(&self) -> Time {
        self.ub.load(Ordering::Acquire)
    }

    fn done(&self) -> bool {
        self.stopped.load(Ordering::Relaxed) || self.ub() <= self.root_lb
    }

    /// Claims the next node index, or stops the search at a limit.
    fn enter(&self) -> Option<u64> {
        if let Some(d) = self.deadline {
            if Instant::now() >= d {
                self.stopped.store(true, Ordering::Relaxed);
                return None;
            }
        }
        let idx = self.nodes.fetch_add(1, Ordering::Relaxed);
        if self.node_limit.is_some_and(|l| idx >= l) {
            self.nodes.fetch_sub(1, Ordering::Relaxed);
            self.stopped.store(true, Ordering::Relaxed);
            return None;
        }
        Some(idx)
    }

    fn offer(&self, schedule: Schedule, node: u64) {
        let mut best = self.best.lock().expect("incumbent lock");
        if schedule.makespan < best.schedule.makespan {
            best.trajectory.push((node, schedule.makespan));
            self.ub.store(schedule.makespan, Ordering::Release);
            best.schedule = schedule;
        }
    }
}

struct Search<'a> {
    inst: &'a Instance,
    opts: &'a SolveOptions,
    nj: usize,
    topo: Vec<TaskId>,
    /// Graph-implied "finishes before" over activities, for chain pruning.
    fixed: Vec<(usize, usize)>,
    siblings: Vec<(TaskId, TaskId)>,
    load_bound: Time,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, opts: &'a SolveOptions) -> Self {
        let g = &inst.graph;
        let nj = g.task_count();
        let fp = fixed_precedences(g).expect("instances hold acyclic graphs");
        let mut fixed = fp.sigma.clone();
        fixed.extend(fp.phi.iter().map(|&(f, h)| (nj + f, nj + h)));
        for (f, e) in g.edges().iter().enumerate() {
            fixed.push((e.u, nj + f));
            fixed.push((nj + f, e.v));
        }
        let siblings = if opts.enable_symmetry_breaking {
            symmetry_constraints(inst).sibling_order
        } else {
            Vec::new()
        };
        Search {
            inst,
            opts,
            nj,
            topo: g.topo_order().expect("instances hold acyclic graphs"),
            fixed,
            siblings,
            load_bound: super::div_ceil(g.total_duration(), inst.machines as Time),
        }
    }

    fn activity_count(&self) -> usize {
        self.nj + self.inst.graph.edge_count()
    }

    /// Same-resource pairs `(a, b)`, `a < b`, whose resources are both known.
    fn resource_pairs(&self, node: &SearchNode) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for a in 0..self.nj {
            for b in a + 1..self.nj {
                if node.placement[a].is_some() && node.placement[a] == node.placement[b] {
                    pairs.push((a, b));
                }
            }
        }
        let nf = self.inst.graph.edge_count();
        for f in 0..nf {
            for h in f + 1..nf {
                if let (Some(Channel::Real(x)), Some(Channel::Real(y))) =
                    (node.channels[f], node.channels[h])
                {
                    if x == y {
                        pairs.push((self.nj + f, self.nj + h));
                    }
                }
            }
        }
        pairs
    }

    fn lower_bound(&self, node: &SearchNode, net: &Network) -> Time {
        let mut lb = net.makespan_bound().max(self.load_bound);
        let mut per_resource = |members: &[usize]| {
            if members.is_empty() {
                return;
            }
            let head = members.iter().map(|&a| net.head[a]).min().unwrap();
            let tail = members.iter().map(|&a| net.tail[a] - net.dur[a]).min().unwrap();
            let load: Time = members.iter().map(|&a| net.dur[a]).sum();
            lb = lb.max(head + load + tail);
        };
        for m in 1..=self.inst.machines {
            let members: Vec<usize> = (0..self.nj).filter(|&j| node.placement[j] == Some(m)).collect();
            per_resource(&members);
        }
        for k in 1..=self.inst.channels {
            let members: Vec<usize> = (0..node.channels.len())
                .filter(|&f| node.channels[f] == Some(Channel::Real(k)))
                .map(|f| self.nj + f)
                .collect();
            per_resource(&members);
        }
        lb
    }

    fn closure(&self, node: &SearchNode, net: &Network) -> Closure {
        let n = self.activity_count();
        let mut c = Closure::new(n);
        for &(a, b) in self.fixed.iter().chain(&node.before) {
            c.set(a, b);
        }
        for &(a, b, lag) in &net.arcs {
            if a < self.nj && b < self.nj && lag > 0 {
                // a sibling pair sharing a machine
                c.set(a, b);
            }
        }
        c.close(n);
        c
    }

    fn schedule_from(&self, node: &SearchNode, net: &Network) -> Schedule {
        let tasks = (0..self.nj)
            .map(|j| TaskPlacement {
                machine: node.placement[j].expect("leaf has every task placed"),
                start: net.head[j],
            })
            .collect();
        let flows = node
            .channels
            .iter()
            .enumerate()
            .map(|(f, c)| FlowPlacement {
                channel: c.expect("leaf has every channel decided"),
                start: net.head[self.nj + f],
            })
            .collect();
        Schedule::new(self.inst, tasks, flows).expect("leaf schedules have the right shape")
    }

    fn evaluate(&self, mut node: SearchNode, ub: Time, c: &Counters) -> Outcome {
        let opts = self.opts;
        loop {
            let Some(net) = Network::build(self.inst, &node, &self.siblings) else {
                bump(&c.infeasible, 1);
                return Outcome::Pruned;
            };
            if self.lower_bound(&node, &net) >= ub {
                bump(&c.bound, 1);
                return Outcome::Pruned;
            }
            let pairs = self.resource_pairs(&node);
            let explicit = |a: usize, b: usize| {
                node.before.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
            };
            let mut open: Vec<(usize, usize)> =
                pairs.iter().copied().filter(|&(a, b)| !explicit(a, b)).collect();
            if opts.enable_chain_pruning && !open.is_empty() {
                let cl = self.closure(&node, &net);
                let before = open.len();
                open.retain(|&(a, b)| !cl.get(a, b) && !cl.get(b, a));
                bump(&c.chain, (before - open.len()) as u64);
            }

            if opts.enable_interval_pruning {
                // windows for schedules strictly better than the incumbent
                let lst = |a: usize| ub - 1 - net.tail[a];
                let mut forced = Vec::new();
                for &(a, b) in &open {
                    let a_first = net.head[a] + net.dur[a].max(1) <= lst(b);
                    let b_first = net.head[b] + net.dur[b].max(1) <= lst(a);
                    match (a_first, b_first) {
                        (false, false) => {
                            bump(&c.interval, 1);
                            return Outcome::Pruned;
                        }
                        (true, false) => forced.push((a, b)),
                        (false, true) => forced.push((b, a)),
                        (true, true) => {}
                    }
                }
                if !forced.is_empty() {
                    bump(&c.interval, forced.len() as u64);
                    node.before.extend(forced);
                    continue;
                }
                node.windows = (0..net.head.len()).map(|a| (net.head[a], lst(a))).collect();
            }

            if let Some(&task) = self.topo.iter().find(|&&j| node.placement[j].is_none()) {
                let mut limit = self.inst.machines;
                if opts.enable_symmetry_breaking {
                    let used = node.placement.iter().flatten().copied().max().unwrap_or(0);
                    limit = SymmetryFixes::first_use_limit(used, limit);
                    bump(&c.symmetry, (self.inst.machines - limit) as u64);
                }
                return Outcome::Branch(
                    (1..=limit).map(|m| node.place(self.inst, task, m)).collect(),
                );
            }
            if let Some(flow) = node.channels.iter().position(|c| c.is_none()) {
                let mut limit = self.inst.channels;
                if opts.enable_symmetry_breaking {
                    let used = node
                        .channels
                        .iter()
                        .filter_map(|c| match c {
                            Some(Channel::Real(k)) => Some(*k),
                            _ => None,
                        })
                        .max()
                        .unwrap_or(0);
                    limit = SymmetryFixes::first_use_limit(used, limit);
                    bump(&c.symmetry, (self.inst.channels - limit) as u64);
                }
                return Outcome::Branch(
                    (1..=limit)
                        .map(|k| {
                            let mut next = node.clone();
                            next.channels[flow] = Some(Channel::Real(k));
                            next
                        })
                        .collect(),
                );
            }

            let conflict = |&(a, b): &(usize, usize)| {
                net.head[a] == net.head[b]
                    || (net.head[a] + net.dur[a] > net.head[b] && net.head[b] + net.dur[b] > net.head[a])
            };
            let conflict_free = opts.enable_interval_pruning && !pairs.iter().any(conflict);
            if open.is_empty() || conflict_free {
                if conflict_free && !open.is_empty() {
                    bump(&c.interval, 1);
                }
                debug_assert!(!pairs.iter().any(conflict));
                return Outcome::Leaf(self.schedule_from(&node, &net));
            }

            // earliest window first, ties by id
            let &(a, b) = open
                .iter()
                .min_by_key(|&&(a, b)| {
                    let (ha, hb) = (net.head[a], net.head[b]);
                    (ha.min(hb), ha.max(hb), a, b)
                })
                .expect("open is nonempty");
            let (first, second) = if net.head[b] < net.head[a] { (b, a) } else { (a, b) };
            let mut x = node.clone();
            x.before.push((first, second));
            let mut y = node;
            y.before.push((second, first));
            return Outcome::Branch(vec![x, y]);
        }
    }

    fn dfs(&self, node: SearchNode, sh: &Shared) {
        if sh.done() {
            return;
        }
        let Some(idx) = sh.enter() else { return };
        match self.evaluate(node, sh.ub(), &sh.counters) {
            Outcome::Pruned => {}
            Outcome::Leaf(s) => sh.offer(s, idx),
            Outcome::Branch(children) => {
                for child in children {
                    self.dfs(child, sh);
                }
            }
        }
    }

    // Breadth-first expansion into independent subtrees for parallel workers.
    fn frontier(&self, sh: &Shared, want: usize) -> Vec<SearchNode> {
        let mut frontier = vec![SearchNode::root(self.inst)];
        for _ in 0..8 {
            if frontier.len() >= want || sh.done() {
                break;
            }
            let mut next = Vec::new();
            for node in frontier {
                let Some(idx) = sh.enter() else { return Vec::new() };
                match self.evaluate(node, sh.ub(), &sh.counters) {
                    Outcome::Pruned => {}
                    Outcome::Leaf(s) => sh.offer(s, idx),
                    Outcome::Branch(children) => next.extend(children),
                }
            }
            frontier = next;
        }
        frontier
    }
}

/// Branch-and-bound from a feasible warm start. See the module docs for the search
/// order and pruning rules.
pub fn solve_exact(
    instance: &Instance,
    options: &SolveOptions,
    warm: &Schedule,
) -> Result<(Schedule, SolveReport), SolveError> {
    options.validate()?;
    let started = Instant::now();
    let (lb, ub) = initial_bounds(instance, warm)?;
    let incumbent = if warm.makespan <= ub {
        warm.clone()
    } else {
        baseline_schedule(instance)
    };
    let deadline = match (options.deterministic, options.time_limit) {
        (false, Some(t)) => Some(started + t),
        _ => None,
    };
    let shared = Shared {
        ub: AtomicI64::new(incumbent.makespan),
        best: Mutex::new(Incumbent {
            schedule: incumbent,
            trajectory: vec![(0, ub)],
        }),
        nodes: AtomicU64::new(0),
        stopped: AtomicBool::new(false),
        counters: Counters::default(),
        root_lb: lb,
        node_limit: options.node_limit,
        deadline,
    };
    let search = Search::new(instance, options);
    if options.deterministic {
        search.dfs(SearchNode::root(instance), &shared);
    } else {
        let want = 4 * rayon::current_num_threads();
        let frontier = search.frontier(&shared, want);
        frontier
            .into_par_iter()
            .for_each(|node| search.dfs(node, &shared));
    }

    let best = shared.best.into_inner().expect("incumbent lock");
    let best_makespan = best.schedule.makespan;
    let stopped = shared.stopped.load(Ordering::Relaxed);
    let optimal = !stopped || best_makespan <= lb;
    let nodes = shared.nodes.load(Ordering::Relaxed);
    let mut lb_trajectory = vec![(0, lb)];
    if optimal && best_makespan > lb {
        lb_trajectory.push((nodes, best_makespan));
    }
    let report = SolveReport {
        status: if optimal {
            SolveStatus::Optimal
        } else {
            SolveStatus::FeasibleIncumbent
        },
        best_makespan,
        nodes_explored: nodes,
        prunes: shared.counters.snapshot(),
        lb_trajectory,
        ub_trajectory: best.trajectory,
        wall_time: started.elapsed(),
    };
    Ok((best.schedule, report))
}
