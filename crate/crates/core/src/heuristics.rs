//! Baseline schedulers used for comparison and as warm starts.
//!
//! All of them append work to per-resource timelines, so their output is feasible by
//! construction. Flows that cross machines go first-come-first-served to the real
//! channel that frees up first; ties everywhere go to the lowest id or index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dwdag::{TaskId, Time};
use crate::instgen::Instance;
use crate::schedule::{
    baseline_schedule, earliest_start_schedule, Channel, FlowPlacement, Schedule, TaskPlacement,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeuristicKind {
    Random,
    List,
    GList,
    Partition,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 4] = [
        HeuristicKind::Random,
        HeuristicKind::List,
        HeuristicKind::GList,
        HeuristicKind::Partition,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            HeuristicKind::Random => "random",
            HeuristicKind::List => "list",
            HeuristicKind::GList => "glist",
            HeuristicKind::Partition => "partition",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        HeuristicKind::ALL.into_iter().find(|k| k.name() == name)
    }

    /// `seed` only matters for [`HeuristicKind::Random`].
    pub fn run(&self, instance: &Instance, seed: u64) -> Schedule {
        match self {
            HeuristicKind::Random => schedule_random(instance, seed),
            HeuristicKind::List => schedule_list(instance),
            HeuristicKind::GList => schedule_glist(instance),
            HeuristicKind::Partition => schedule_partition(instance),
        }
    }
}

/// Shortest schedule over every heuristic, ties broken in [`HeuristicKind::ALL`] order.
pub fn best_heuristic(instance: &Instance, seed: u64) -> Schedule {
    HeuristicKind::ALL
        .iter()
        .map(|k| k.run(instance, seed))
        .reduce(|a, b| if b.makespan < a.makespan { b } else { a })
        .expect("at least one heuristic")
}

// Append-only machine and channel timelines.
#[derive(Clone)]
struct Timeline<'a> {
    inst: &'a Instance,
    machine_free: Vec<Time>,
    channel_free: Vec<Time>,
    tasks: Vec<Option<TaskPlacement>>,
    flows: Vec<Option<FlowPlacement>>,
}

impl<'a> Timeline<'a> {
    fn new(inst: &'a Instance) -> Self {
        Timeline {
            inst,
            machine_free: vec![0; inst.machines],
            channel_free: vec![0; inst.channels],
            tasks: vec![None; inst.graph.task_count()],
            flows: vec![None; inst.graph.edge_count()],
        }
    }

    fn end(&self, task: TaskId) -> Time {
        let tp = self.tasks[task].expect("predecessor placed");
        tp.start + self.inst.graph.duration(task)
    }

    fn scheduled(&self, task: TaskId) -> bool {
        self.tasks[task].is_some()
    }

    // Inbound flows of `task` if it ran on `machine`, and the time they all arrive.
    fn inbound(&self, task: TaskId, machine: usize) -> (Time, Vec<(usize, FlowPlacement)>, Vec<Time>) {
        let g = &self.inst.graph;
        let mut channel_free = self.channel_free.clone();
        let mut ready = 0;
        let mut placed = Vec::new();
        for &f in g.in_edges(task) {
            let e = g.edge(f);
            let src = self.tasks[e.u].expect("predecessor placed");
            let u_end = self.end(e.u);
            let fp = if src.machine == machine {
                ready = ready.max(u_end + e.r);
                FlowPlacement {
                    channel: Channel::Virtual,
                    start: u_end,
                }
            } else {
                let k = (0..channel_free.len())
                    .min_by_key(|&k| (channel_free[k].max(u_end), k))
                    .expect("at least one channel");
                let start = channel_free[k].max(u_end);
                channel_free[k] = start + e.q.max(1);
                ready = ready.max(start + e.q);
                FlowPlacement {
                    channel: Channel::Real(k + 1),
                    start,
                }
            };
            placed.push((f, fp));
        }
        (ready, placed, channel_free)
    }

    fn start_on(&self, task: TaskId, machine: usize, earliest: Time) -> Time {
        let (ready, _, _) = self.inbound(task, machine);
        ready.max(earliest).max(self.machine_free[machine - 1])
    }

    fn commit(&mut self, task: TaskId, machine: usize, earliest: Time) -> Time {
        let (ready, placed, channel_free) = self.inbound(task, machine);
        let start = ready.max(earliest).max(self.machine_free[machine - 1]);
        for (f, fp) in placed {
            self.flows[f] = Some(fp);
        }
        self.channel_free = channel_free;
        self.tasks[task] = Some(TaskPlacement { machine, start });
        let end = start + self.inst.graph.duration(task);
        self.machine_free[machine - 1] = end;
        end
    }

    fn finish(self) -> Schedule {
        let tasks = self.tasks.into_iter().map(|t| t.expect("every task placed")).collect();
        let flows = self.flows.into_iter().map(|f| f.expect("every flow placed")).collect();
        Schedule::new(self.inst, tasks, flows).expect("timelines cover every task and flow")
    }
}

/// Longest path from the start of each task to the end of the job, counting each
/// edge at `min(r, q)`.
pub fn bottom_levels(instance: &Instance) -> Vec<Time> {
    let g = &instance.graph;
    let order = g.topo_order().expect("instances hold acyclic graphs");
    let mut level = vec![0; g.task_count()];
    for &u in order.iter().rev() {
        let below = g
            .out_edges(u)
            .iter()
            .map(|&f| g.edge(f).min_transfer() + level[g.edge(f).v])
            .max()
            .unwrap_or(0);
        level[u] = g.duration(u) + below;
    }
    level
}

/// Uniform random machine per task, drawn in task-id order from ChaCha8 seeded with
/// `seed`; tasks are then released in topological order as early as possible.
pub fn schedule_random(instance: &Instance, seed: u64) -> Schedule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let machine: Vec<usize> = (0..instance.graph.task_count())
        .map(|_| rng.gen_range(1..=instance.machines))
        .collect();
    let mut tl = Timeline::new(instance);
    for j in instance.graph.topo_order().expect("instances hold acyclic graphs") {
        tl.commit(j, machine[j], 0);
    }
    tl.finish()
}

/// Event-driven list scheduling. At each event the idle machines, lowest index first,
/// take the ready tasks (all predecessors finished) with the largest bottom level.
/// Placement ignores transfers; a flow is internal only when its endpoints happen to
/// share a machine.
pub fn schedule_list(instance: &Instance) -> Schedule {
    let g = &instance.graph;
    let level = bottom_levels(instance);
    let mut tl = Timeline::new(instance);
    let mut left = g.task_count();
    let mut t = 0;
    while left > 0 {
        let mut ready: Vec<TaskId> = (0..g.task_count())
            .filter(|&j| {
                !tl.scheduled(j)
                    && g.in_edges(j)
                        .iter()
                        .all(|&f| tl.scheduled(g.edge(f).u) && tl.end(g.edge(f).u) <= t)
            })
            .collect();
        ready.sort_by_key(|&j| (std::cmp::Reverse(level[j]), j));
        let idle: Vec<usize> = (1..=instance.machines)
            .filter(|&m| tl.machine_free[m - 1] <= t)
            .collect();
        for (&m, &j) in idle.iter().zip(&ready) {
            tl.commit(j, m, t);
            left -= 1;
        }
        // next event: a machine frees up or a task finishes
        let ends = (0..g.task_count()).filter(|&j| tl.scheduled(j)).map(|j| tl.end(j));
        match tl.machine_free.iter().copied().chain(ends).filter(|&x| x > t).min() {
            Some(next) => t = next,
            None if left == 0 => {}
            None => unreachable!("unscheduled tasks always have a future event"),
        }
    }
    tl.finish()
}

/// Communication-aware list scheduling: ready tasks in bottom-level order each go to
/// the machine where they would finish first, counting their inbound transfers on
/// the current channel timelines. The single-machine baseline is kept when better.
pub fn schedule_glist(instance: &Instance) -> Schedule {
    let g = &instance.graph;
    let level = bottom_levels(instance);
    let mut tl = Timeline::new(instance);
    for _ in 0..g.task_count() {
        let j = (0..g.task_count())
            .filter(|&j| !tl.scheduled(j) && g.in_edges(j).iter().all(|&f| tl.scheduled(g.edge(f).u)))
            .min_by_key(|&j| (std::cmp::Reverse(level[j]), j))
            .expect("a DAG always has a ready task");
        let m = (1..=instance.machines)
            .min_by_key(|&m| (tl.start_on(j, m, 0), m))
            .expect("at least one machine");
        tl.commit(j, m, 0);
    }
    let greedy = tl.finish();
    let base = baseline_schedule(instance);
    if base.makespan < greedy.makespan {
        base
    } else {
        greedy
    }
}

/// Greedy min-cut partitioning. Edges are visited by decreasing `q`; the two groups
/// at its ends merge when the transfer saved exceeds how far the merged group would
/// overshoot the balanced load `⌈ΣP / M⌉`. Groups are then packed largest first onto
/// the least loaded machine and sequenced in topological order; external flows go to
/// channels round-robin in producer order.
pub fn schedule_partition(instance: &Instance) -> Schedule {
    let g = &instance.graph;
    let n = g.task_count();
    let m = instance.machines as Time;
    let target = (g.total_duration() + m - 1) / m;

    let mut group: Vec<usize> = (0..n).collect();
    let mut load: Vec<Time> = g.durations().to_vec();
    let mut by_q: Vec<usize> = (0..g.edge_count()).collect();
    by_q.sort_by_key(|&f| (std::cmp::Reverse(g.edge(f).q), f));
    for f in by_q {
        let e = g.edge(f);
        let (a, b) = (group[e.u], group[e.v]);
        if a == b {
            continue;
        }
        let merged = load[a] + load[b];
        if e.q > merged - target {
            let (keep, gone) = (a.min(b), a.max(b));
            for x in group.iter_mut() {
                if *x == gone {
                    *x = keep;
                }
            }
            load[keep] = merged;
            load[gone] = 0;
        }
    }

    let mut groups: Vec<usize> = (0..n).filter(|&x| group.contains(&x)).collect();
    groups.sort_by_key(|&x| (std::cmp::Reverse(load[x]), x));
    let mut machine_load = vec![0; instance.machines];
    let mut machine_of_group = vec![0; n];
    for x in groups {
        let i = (0..instance.machines)
            .min_by_key(|&i| (machine_load[i], i))
            .expect("at least one machine");
        machine_load[i] += load[x];
        machine_of_group[x] = i + 1;
    }
    let placement: Vec<usize> = (0..n).map(|j| machine_of_group[group[j]]).collect();

    let order = g.topo_order().expect("instances hold acyclic graphs");
    let mut rank = vec![0; n];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r;
    }
    let mut machine_orders = vec![Vec::new(); instance.machines];
    for &j in &order {
        machine_orders[placement[j] - 1].push(j);
    }
    let mut external: Vec<usize> = (0..g.edge_count())
        .filter(|&f| placement[g.edge(f).u] != placement[g.edge(f).v])
        .collect();
    external.sort_by_key(|&f| (rank[g.edge(f).u], rank[g.edge(f).v], f));
    let mut channel_orders = vec![Vec::new(); instance.channels];
    for (k, f) in external.into_iter().enumerate() {
        channel_orders[k % instance.channels].push(f);
    }
    earliest_start_schedule(instance, &placement, &machine_orders, &channel_orders)
        .expect("producer-ordered channels are consistent with topological machine orders")
}
