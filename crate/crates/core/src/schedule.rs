//! Decoded schedules and their executable semantics.
//!
//! Time is 0-based: an activity of duration `d` started at `s` occupies `[s, s + d)`.
//! Machines are numbered `1..=M`, real channels `1..=N`. Internal transfers run on a
//! contention-free virtual channel with duration `r`; external transfers run on a
//! real channel with duration `q`. Both kinds start no earlier than the producer's
//! end and finish no later than the consumer's start.

use std::fmt;

use thiserror::Error;

use crate::dwdag::{FlowId, TaskId, Time};
use crate::instgen::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Virtual,
    /// 1-based real channel index.
    Real(usize),
}

impl Channel {
    pub fn is_virtual(&self) -> bool {
        matches!(self, Channel::Virtual)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Virtual => f.write_str("virtual"),
            Channel::Real(k) => write!(f, "channel {k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TaskPlacement {
    /// 1-based machine index.
    pub machine: usize,
    pub start: Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FlowPlacement {
    pub channel: Channel,
    pub start: Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub tasks: Vec<TaskPlacement>,
    pub flows: Vec<FlowPlacement>,
    pub makespan: Time,
}

impl Schedule {
    /// Builds a schedule and computes its makespan from `instance`.
    pub fn new(
        instance: &Instance,
        tasks: Vec<TaskPlacement>,
        flows: Vec<FlowPlacement>,
    ) -> Result<Self, ScheduleError> {
        let mut s = Schedule {
            tasks,
            flows,
            makespan: 0,
        };
        s.makespan = makespan(instance, &s)?;
        Ok(s)
    }

    pub fn task_end(&self, instance: &Instance, task: TaskId) -> Time {
        self.tasks[task].start + instance.graph.duration(task)
    }

    pub fn flow_end(&self, instance: &Instance, flow: FlowId) -> Time {
        self.flows[flow].start + flow_duration(instance, flow, self.flows[flow].channel)
    }
}

/// Duration of a flow on the given channel kind.
pub fn flow_duration(instance: &Instance, flow: FlowId, channel: Channel) -> Time {
    let e = instance.graph.edge(flow);
    if channel.is_virtual() {
        e.r
    } else {
        e.q
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("schedule has {got_tasks} tasks and {got_flows} flows, instance has {tasks} and {flows}")]
    ShapeMismatch {
        tasks: usize,
        flows: usize,
        got_tasks: usize,
        got_flows: usize,
    },
    #[error("invalid sequencing input: {0}")]
    InvalidOrder(String),
    #[error("precedences and resource sequences form a cycle")]
    InconsistentOrder,
    #[error("schedule is infeasible: {0}")]
    Infeasible(FeasibilityReport),
}

/// Identifiers of the scheduling constraints checked by [`check_feasible`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintId {
    /// Every task runs once, on an existing machine, inside the horizon.
    C1,
    /// Every flow runs once, on an existing channel, inside the horizon.
    C2,
    /// Task starts are nonnegative.
    C3,
    /// Tasks on one machine do not overlap.
    C4,
    /// A flow is virtual exactly when its endpoints share a machine.
    C5,
    /// Internal transfer fits between producer end and consumer start.
    C6,
    /// External flow starts after its producer ends.
    C7,
    /// Consumer starts after its external flow ends.
    C8,
    /// Flow starts are nonnegative.
    C9,
    /// Flows on one real channel neither overlap nor share a start time.
    C10,
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintViolation {
    pub constraint: ConstraintId,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub violations: Vec<ConstraintViolation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, c: ConstraintId) -> bool {
        self.violations.iter().any(|v| v.constraint == c)
    }

    fn push(&mut self, constraint: ConstraintId, detail: String) {
        self.violations.push(ConstraintViolation { constraint, detail });
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.feasible() {
            return f.write_str("feasible");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", v.constraint, v.detail)?;
        }
        Ok(())
    }
}

fn check_shape(instance: &Instance, schedule: &Schedule) -> Result<(), ScheduleError> {
    let g = &instance.graph;
    if schedule.tasks.len() != g.task_count() || schedule.flows.len() != g.edge_count() {
        return Err(ScheduleError::ShapeMismatch {
            tasks: g.task_count(),
            flows: g.edge_count(),
            got_tasks: schedule.tasks.len(),
            got_flows: schedule.flows.len(),
        });
    }
    Ok(())
}

// Two activities on one resource conflict when their half-open intervals intersect or
// when they start together. The second clause only matters for zero-length flows: the
// integer model orders equal starts both ways, so it cannot place them side by side.
fn overlaps(a_start: Time, a_len: Time, b_start: Time, b_len: Time) -> bool {
    a_start == b_start || (a_start < b_start + b_len && b_start < a_start + a_len)
}

/// Checks every scheduling constraint and lists all violations.
///
/// The horizon is only enforced when the instance carries an explicit `t_max`.
pub fn check_feasible(
    instance: &Instance,
    schedule: &Schedule,
) -> Result<FeasibilityReport, ScheduleError> {
    check_shape(instance, schedule)?;
    let g = &instance.graph;
    let horizon = instance.t_max;
    let mut report = FeasibilityReport::default();

    for (j, tp) in schedule.tasks.iter().enumerate() {
        if tp.machine < 1 || tp.machine > instance.machines {
            report.push(
                ConstraintId::C1,
                format!("task {j} on machine {} of {}", tp.machine, instance.machines),
            );
        }
        if tp.start < 0 {
            report.push(ConstraintId::C3, format!("task {j} starts at {}", tp.start));
        }
        if let Some(t) = horizon {
            if tp.start + g.duration(j) > t {
                report.push(
                    ConstraintId::C1,
                    format!("task {j} ends at {} past t_max {t}", tp.start + g.duration(j)),
                );
            }
        }
    }

    for a in 0..g.task_count() {
        for b in a + 1..g.task_count() {
            let (ta, tb) = (schedule.tasks[a], schedule.tasks[b]);
            if ta.machine == tb.machine
                && overlaps(ta.start, g.duration(a), tb.start, g.duration(b))
            {
                report.push(
                    ConstraintId::C4,
                    format!("tasks {a} and {b} overlap on machine {}", ta.machine),
                );
            }
        }
    }

    for (f, fp) in schedule.flows.iter().enumerate() {
        let e = g.edge(f);
        let (mu, mv) = (schedule.tasks[e.u].machine, schedule.tasks[e.v].machine);
        if let Channel::Real(k) = fp.channel {
            if k < 1 || k > instance.channels {
                report.push(
                    ConstraintId::C2,
                    format!("flow {f} on channel {k} of {}", instance.channels),
                );
            }
        }
        let co_located = mu == mv;
        if co_located != fp.channel.is_virtual() {
            report.push(
                ConstraintId::C5,
                format!(
                    "flow {f} ({} -> {}) on {} with tasks on machines {mu} and {mv}",
                    e.u, e.v, fp.channel
                ),
            );
        }
        if fp.start < 0 {
            report.push(ConstraintId::C9, format!("flow {f} starts at {}", fp.start));
        }
        let u_end = schedule.tasks[e.u].start + g.duration(e.u);
        let v_start = schedule.tasks[e.v].start;
        let dur = flow_duration(instance, f, fp.channel);
        if fp.channel.is_virtual() {
            if u_end > fp.start || fp.start + dur > v_start {
                report.push(
                    ConstraintId::C6,
                    format!(
                        "internal flow {f}: producer ends {u_end}, flow [{}, {}), consumer starts {v_start}",
                        fp.start,
                        fp.start + dur
                    ),
                );
            }
        } else {
            if u_end > fp.start {
                report.push(
                    ConstraintId::C7,
                    format!("flow {f} starts {} before producer {} ends at {u_end}", fp.start, e.u),
                );
            }
            if fp.start + dur > v_start {
                report.push(
                    ConstraintId::C8,
                    format!(
                        "flow {f} ends {} after consumer {} starts at {v_start}",
                        fp.start + dur,
                        e.v
                    ),
                );
            }
        }
        if let Some(t) = horizon {
            if fp.start + dur > t {
                report.push(
                    ConstraintId::C2,
                    format!("flow {f} ends at {} past t_max {t}", fp.start + dur),
                );
            }
        }
    }

    for a in 0..g.edge_count() {
        for b in a + 1..g.edge_count() {
            let (fa, fb) = (schedule.flows[a], schedule.flows[b]);
            if let (Channel::Real(ka), Channel::Real(kb)) = (fa.channel, fb.channel) {
                if ka == kb && overlaps(fa.start, g.edge(a).q, fb.start, g.edge(b).q) {
                    report.push(
                        ConstraintId::C10,
                        format!("flows {a} and {b} overlap on channel {ka}"),
                    );
                }
            }
        }
    }
    Ok(report)
}

/// Maximum end time over all tasks and flows.
pub fn makespan(instance: &Instance, schedule: &Schedule) -> Result<Time, ScheduleError> {
    check_shape(instance, schedule)?;
    let g = &instance.graph;
    let tasks = schedule
        .tasks
        .iter()
        .enumerate()
        .map(|(j, tp)| tp.start + g.duration(j));
    let flows = schedule
        .flows
        .iter()
        .enumerate()
        .map(|(f, fp)| fp.start + flow_duration(instance, f, fp.channel));
    Ok(tasks.chain(flows).max().unwrap_or(0))
}

// Activity graph used for start-time propagation: nodes 0..J are tasks, J..J+F flows.
// An arc (a, b, lag) means start(b) >= start(a) + lag.
struct Propagation {
    succ: Vec<Vec<(usize, Time)>>,
    indeg: Vec<usize>,
}

impl Propagation {
    fn new(n: usize) -> Self {
        Propagation {
            succ: vec![Vec::new(); n],
            indeg: vec![0; n],
        }
    }

    fn arc(&mut self, a: usize, b: usize, lag: Time) {
        self.succ[a].push((b, lag));
        self.indeg[b] += 1;
    }

    fn earliest_starts(mut self) -> Option<Vec<Time>> {
        let n = self.succ.len();
        let mut start = vec![0; n];
        let mut stack: Vec<usize> = (0..n).filter(|&x| self.indeg[x] == 0).collect();
        let mut done = 0;
        while let Some(a) = stack.pop() {
            done += 1;
            for &(b, lag) in &self.succ[a] {
                start[b] = start[b].max(start[a] + lag);
                self.indeg[b] -= 1;
                if self.indeg[b] == 0 {
                    stack.push(b);
                }
            }
        }
        (done == n).then_some(start)
    }
}

/// Semi-active schedule for fully resolved placement and sequencing decisions.
///
/// `placement[j]` is the 1-based machine of task `j`; `machine_orders[i - 1]` lists the
/// tasks of machine `i` in execution order; `channel_orders[k - 1]` lists the external
/// flows sent on channel `k`. Internal flows must not appear in any channel order.
pub fn earliest_start_schedule(
    instance: &Instance,
    placement: &[usize],
    machine_orders: &[Vec<TaskId>],
    channel_orders: &[Vec<FlowId>],
) -> Result<Schedule, ScheduleError> {
    let g = &instance.graph;
    let (nt, nf) = (g.task_count(), g.edge_count());
    if placement.len() != nt {
        return Err(ScheduleError::InvalidOrder(format!(
            "placement covers {} of {nt} tasks",
            placement.len()
        )));
    }
    if machine_orders.len() != instance.machines || channel_orders.len() != instance.channels {
        return Err(ScheduleError::InvalidOrder(format!(
            "expected {} machine orders and {} channel orders",
            instance.machines, instance.channels
        )));
    }
    if let Some(j) = placement
        .iter()
        .position(|&m| m < 1 || m > instance.machines)
    {
        return Err(ScheduleError::InvalidOrder(format!(
            "task {j} placed on machine {}",
            placement[j]
        )));
    }

    let mut seen = vec![false; nt];
    for (i, order) in machine_orders.iter().enumerate() {
        for &j in order {
            if j >= nt || seen[j] || placement[j] != i + 1 {
                return Err(ScheduleError::InvalidOrder(format!(
                    "task {j} misplaced in the order of machine {}",
                    i + 1
                )));
            }
            seen[j] = true;
        }
    }
    if let Some(j) = seen.iter().position(|s| !s) {
        return Err(ScheduleError::InvalidOrder(format!(
            "task {j} missing from machine orders"
        )));
    }

    let mut channel = vec![Channel::Virtual; nf];
    let mut listed = vec![false; nf];
    for (k, order) in channel_orders.iter().enumerate() {
        for &f in order {
            if f >= nf || listed[f] {
                return Err(ScheduleError::InvalidOrder(format!(
                    "flow {f} listed twice or unknown"
                )));
            }
            let e = g.edge(f);
            if placement[e.u] == placement[e.v] {
                return Err(ScheduleError::InvalidOrder(format!(
                    "internal flow {f} listed on channel {}",
                    k + 1
                )));
            }
            listed[f] = true;
            channel[f] = Channel::Real(k + 1);
        }
    }
    for (f, e) in g.edges().iter().enumerate() {
        if placement[e.u] != placement[e.v] && !listed[f] {
            return Err(ScheduleError::InvalidOrder(format!(
                "external flow {f} has no channel"
            )));
        }
    }

    let mut prop = Propagation::new(nt + nf);
    for (f, e) in g.edges().iter().enumerate() {
        prop.arc(e.u, nt + f, g.duration(e.u));
        prop.arc(nt + f, e.v, flow_duration(instance, f, channel[f]));
    }
    for order in machine_orders {
        for w in order.windows(2) {
            prop.arc(w[0], w[1], g.duration(w[0]));
        }
    }
    for order in channel_orders {
        for w in order.windows(2) {
            prop.arc(nt + w[0], nt + w[1], g.edge(w[0]).q.max(1));
        }
    }
    let start = prop
        .earliest_starts()
        .ok_or(ScheduleError::InconsistentOrder)?;

    let tasks = (0..nt)
        .map(|j| TaskPlacement {
            machine: placement[j],
            start: start[j],
        })
        .collect();
    let flows = (0..nf)
        .map(|f| FlowPlacement {
            channel: channel[f],
            start: start[nt + f],
        })
        .collect();
    Schedule::new(instance, tasks, flows)
}

/// All tasks on machine 1 in topological order with every flow internal.
pub fn baseline_schedule(instance: &Instance) -> Schedule {
    let order = instance
        .graph
        .topo_order()
        .expect("instances hold acyclic graphs");
    let placement = vec![1; instance.graph.task_count()];
    let mut machine_orders = vec![Vec::new(); instance.machines];
    machine_orders[0] = order;
    let channel_orders = vec![Vec::new(); instance.channels];
    earliest_start_schedule(instance, &placement, &machine_orders, &channel_orders)
        .expect("a topological single-machine sequence is always consistent")
}

/// Makespan of [`baseline_schedule`]; equals the total processing time when all `r = 0`.
pub fn single_machine_baseline(instance: &Instance) -> Time {
    baseline_schedule(instance).makespan
}

/// Makespan divided by the single-machine baseline. Infeasible schedules are rejected.
pub fn normalized_makespan(instance: &Instance, schedule: &Schedule) -> Result<f64, ScheduleError> {
    let report = check_feasible(instance, schedule)?;
    if !report.feasible() {
        return Err(ScheduleError::Infeasible(report));
    }
    let ms = makespan(instance, schedule)?;
    Ok(ms as f64 / single_machine_baseline(instance) as f64)
}
