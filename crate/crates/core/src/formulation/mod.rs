//! Time-indexed integer model of the joint scheduling problem.
//!
//! Columns, with `t` a 0-based start slot in `0..t_max`:
//!
//! | family | name           | meaning                                                    |
//! |--------|----------------|------------------------------------------------------------|
//! | X      | `X_j_i_t`      | task `j` starts at `t` on machine `i`                      |
//! | Y      | `Y_f_c_t`      | flow `f` starts at `t` on channel `c` (`c = 0` is virtual) |
//! | ψ      | `PSI_j_jp_i`   | tasks `j < jp` both on machine `i`                         |
//! | σ      | `SIG_j_jp`     | task `j` starts no later than `jp` (ordered pairs)         |
//! | χ      | `CHI_f_fp_k`   | flows `f < fp` both on real channel `k`                    |
//! | φ      | `PHI_f_fp`     | flow `f` starts no later than `fp` (ordered pairs)         |
//! | Cmax   | `CMAX`         | makespan, integer in `[0, t_max]`                          |
//!
//! With `s_j = Σ t·X_j_i_t`, `S_f = Σ t·Y_f_c_t`, `V_f = Σ_t Y_f_0_t` and `M` the
//! Big-M constant, the row families and their sizes for `J` tasks, `F` flows,
//! `M` machines and `N` channels are:
//!
//! | family                | rows             | form                                              |
//! |-----------------------|------------------|---------------------------------------------------|
//! | task completion       | `J`              | `Σ_{i,t} X_j_i_t = 1`                             |
//! | flow completion       | `F`              | `Σ_{c,t} Y_f_c_t = 1`                             |
//! | task co-location      | `2·C(J,2)·M`     | `0 <= Σ_t X_j_i_t + Σ_t X_jp_i_t − 2ψ <= 1`       |
//! | task order indicator  | `J(J−1)`         | `s_jp − s_j <= M·σ − ε(1 − σ)`                    |
//! | task disjunction      | `J(J−1)`         | `s_j + p_j − s_jp <= M(2 − σ − Σ_i ψ)`            |
//! | flow sharing          | `2·C(F,2)·N`     | `0 <= Σ_t Y_f_k_t + Σ_t Y_fp_k_t − 2χ <= 1`       |
//! | flow order indicator  | `F(F−1)`         | `S_fp − S_f <= M·φ − ε(1 − φ)`                    |
//! | flow disjunction      | `F(F−1)`         | `S_f + q_f − S_fp <= M(2 − φ − Σ_k χ)`            |
//! | causality             | `F`              | `Σ_i ψ_uvi = V_f`                                 |
//! | flow after producer   | `F`              | `s_u + p_u <= S_f`                                |
//! | consumer after flow   | `F`              | `S_f + r·V_f + q(1 − V_f) <= s_v`                 |
//! | makespan (tasks)      | `J`              | `Cmax >= s_j + p_j`                               |
//! | makespan (external)   | `F`              | `Cmax >= S_f + q(1 − V_f)`                        |
//! | makespan (internal)   | `F`              | `Cmax >= S_f + r·V_f`                             |
//!
//! `M = max(t_max, max_f q_f)`, which equals `t_max` whenever every external transfer
//! fits in the horizon.

mod lp;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::Rational64;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dwdag::{critical_path_bound, FlowId, TaskId, Time};
use crate::instgen::{write_instance_string, Instance};
use crate::schedule::{Channel, FlowPlacement, Schedule, ScheduleError, TaskPlacement};

pub use lp::export_lp;

#[derive(Debug, Error)]
pub enum FormulationError {
    #[error("t_max {t_max} is below the critical path bound {bound}")]
    HorizonTooSmall { t_max: Time, bound: Time },
    #[error("epsilon must lie strictly between 0 and 1")]
    InvalidEpsilon,
    #[error("assignment has {got} values, model has {expected} columns")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("{0} does not start exactly once")]
    MultipleStarts(String),
    #[error("schedule does not fit the model: {0}")]
    OutOfModel(String),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("write failed: {0}")]
    SinkFailure(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X { task: TaskId, machine: usize, t: Time },
    Y { flow: FlowId, channel: usize, t: Time },
    Psi { a: TaskId, b: TaskId, machine: usize },
    Sigma { a: TaskId, b: TaskId },
    Chi { f: FlowId, g: FlowId, channel: usize },
    Phi { f: FlowId, g: FlowId },
    Cmax,
}

impl Var {
    pub fn is_binary(&self) -> bool {
        !matches!(self, Var::Cmax)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::X { task, machine, t } => write!(f, "X_{task}_{machine}_{t}"),
            Var::Y { flow, channel, t } => write!(f, "Y_{flow}_{channel}_{t}"),
            Var::Psi { a, b, machine } => write!(f, "PSI_{a}_{b}_{machine}"),
            Var::Sigma { a, b } => write!(f, "SIG_{a}_{b}"),
            Var::Chi { f: a, g, channel } => write!(f, "CHI_{a}_{g}_{channel}"),
            Var::Phi { f: a, g } => write!(f, "PHI_{a}_{g}"),
            Var::Cmax => f.write_str("CMAX"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    TaskCompletion,
    FlowCompletion,
    TaskColocation,
    TaskOrderIndicator,
    TaskDisjunction,
    FlowSharing,
    FlowOrderIndicator,
    FlowDisjunction,
    Causality,
    FlowAfterProducer,
    ConsumerAfterFlow,
    MakespanTask,
    MakespanExternal,
    MakespanInternal,
}

impl Family {
    pub const ALL: [Family; 14] = [
        Family::TaskCompletion,
        Family::FlowCompletion,
        Family::TaskColocation,
        Family::TaskOrderIndicator,
        Family::TaskDisjunction,
        Family::FlowSharing,
        Family::FlowOrderIndicator,
        Family::FlowDisjunction,
        Family::Causality,
        Family::FlowAfterProducer,
        Family::ConsumerAfterFlow,
        Family::MakespanTask,
        Family::MakespanExternal,
        Family::MakespanInternal,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::TaskCompletion => "task_completion",
            Family::FlowCompletion => "flow_completion",
            Family::TaskColocation => "task_colocation",
            Family::TaskOrderIndicator => "task_order_indicator",
            Family::TaskDisjunction => "task_disjunction",
            Family::FlowSharing => "flow_sharing",
            Family::FlowOrderIndicator => "flow_order_indicator",
            Family::FlowDisjunction => "flow_disjunction",
            Family::Causality => "causality",
            Family::FlowAfterProducer => "flow_after_producer",
            Family::ConsumerAfterFlow => "consumer_after_flow",
            Family::MakespanTask => "makespan_task",
            Family::MakespanExternal => "makespan_external",
            Family::MakespanInternal => "makespan_internal",
        }
    }

    /// Row count of this family for `j` tasks, `f` flows, `m` machines, `n` channels.
    pub fn closed_form_count(&self, j: usize, f: usize, m: usize, n: usize) -> usize {
        let pairs = |k: usize| k * k.saturating_sub(1) / 2;
        match self {
            Family::TaskCompletion | Family::MakespanTask => j,
            Family::FlowCompletion
            | Family::Causality
            | Family::FlowAfterProducer
            | Family::ConsumerAfterFlow
            | Family::MakespanExternal
            | Family::MakespanInternal => f,
            Family::TaskColocation => 2 * pairs(j) * m,
            Family::TaskOrderIndicator | Family::TaskDisjunction => 2 * pairs(j),
            Family::FlowSharing => 2 * pairs(f) * n,
            Family::FlowOrderIndicator | Family::FlowDisjunction => 2 * pairs(f),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub family: Family,
    pub name: String,
    /// Column index and coefficient, sorted by column, no zero coefficients.
    pub terms: Vec<(usize, Rational64)>,
    pub sense: Sense,
    pub rhs: Rational64,
}

impl Row {
    pub fn holds(&self, values: &[i64]) -> bool {
        let lhs: Rational64 = self
            .terms
            .iter()
            .map(|&(v, c)| c * Rational64::from_integer(values[v]))
            .sum();
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

/// A value for every column of an [`IlpModel`], indexed like [`IlpModel::vars`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub values: Vec<i64>,
}

/// Something an assignment got wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violated {
    /// Index into [`IlpModel::rows`].
    Row(usize),
    /// A column outside its domain (binary not in {0, 1}, or Cmax outside `[0, t_max]`).
    Bound(usize),
}

#[derive(Debug, Clone)]
pub struct IlpModel {
    instance: Instance,
    t_max: Time,
    big_m: Time,
    epsilon: Rational64,
    instance_hash: String,
    vars: Vec<Var>,
    index: HashMap<Var, usize>,
    rows: Vec<Row>,
}

impl IlpModel {
    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn t_max(&self) -> Time {
        self.t_max
    }

    pub fn big_m(&self) -> Time {
        self.big_m
    }

    pub fn epsilon(&self) -> Rational64 {
        self.epsilon
    }

    /// First 16 hex digits of the SHA-256 of the instance document.
    pub fn instance_hash(&self) -> &str {
        &self.instance_hash
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn var_index(&self, var: &Var) -> Option<usize> {
        self.index.get(var).copied()
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    /// Columns belonging to one family, e.g. `"X"` or `"PSI"`.
    pub fn count_vars(&self, pred: impl Fn(&Var) -> bool) -> usize {
        self.vars.iter().filter(|v| pred(v)).count()
    }

    fn col(&self, var: Var) -> usize {
        self.index[&var]
    }

    pub fn zero_assignment(&self) -> Assignment {
        Assignment {
            values: vec![0; self.vars.len()],
        }
    }
}

// Linear expression under construction: column -> coefficient.
#[derive(Default)]
struct Expr(BTreeMap<usize, Rational64>);

impl Expr {
    fn add(&mut self, col: usize, coef: impl Into<Rational64>) -> &mut Self {
        let c = self.0.entry(col).or_insert_with(|| Rational64::from_integer(0));
        *c += coef.into();
        self
    }

    fn add_expr(&mut self, other: &Expr, scale: i64) -> &mut Self {
        for (&col, &c) in &other.0 {
            self.add(col, c * scale);
        }
        self
    }

    fn into_terms(self) -> Vec<(usize, Rational64)> {
        self.0.into_iter().filter(|(_, c)| *c != 0.into()).collect()
    }
}

struct Builder {
    vars: Vec<Var>,
    index: HashMap<Var, usize>,
    rows: Vec<Row>,
}

impl Builder {
    fn var(&mut self, v: Var) -> usize {
        let id = self.vars.len();
        self.vars.push(v);
        self.index.insert(v, id);
        id
    }

    fn row(&mut self, family: Family, name: String, expr: Expr, sense: Sense, rhs: impl Into<Rational64>) {
        self.rows.push(Row {
            family,
            name,
            terms: expr.into_terms(),
            sense,
            rhs: rhs.into(),
        });
    }
}

/// Builds the linearized model for `instance` with horizon `t_max` and the given `ε`.
pub fn build_p2(
    instance: &Instance,
    t_max: Time,
    epsilon: Rational64,
) -> Result<IlpModel, FormulationError> {
    let g = &instance.graph;
    let bound = critical_path_bound(g).expect("instances hold acyclic graphs");
    if t_max < bound {
        return Err(FormulationError::HorizonTooSmall { t_max, bound });
    }
    if epsilon <= 0.into() || epsilon >= 1.into() {
        return Err(FormulationError::InvalidEpsilon);
    }
    let (nj, nf, nm, nc) = (g.task_count(), g.edge_count(), instance.machines, instance.channels);
    let big_m = g.edges().iter().map(|e| e.q).fold(t_max, Time::max);
    let m = Rational64::from_integer(big_m);

    let mut b = Builder {
        vars: Vec::new(),
        index: HashMap::new(),
        rows: Vec::new(),
    };

    for task in 0..nj {
        for machine in 1..=nm {
            for t in 0..t_max {
                b.var(Var::X { task, machine, t });
            }
        }
    }
    for flow in 0..nf {
        for channel in 0..=nc {
            for t in 0..t_max {
                b.var(Var::Y { flow, channel, t });
            }
        }
    }
    for a in 0..nj {
        for bb in a + 1..nj {
            for machine in 1..=nm {
                b.var(Var::Psi { a, b: bb, machine });
            }
        }
    }
    for a in 0..nj {
        for bb in 0..nj {
            if a != bb {
                b.var(Var::Sigma { a, b: bb });
            }
        }
    }
    for f in 0..nf {
        for g2 in f + 1..nf {
            for channel in 1..=nc {
                b.var(Var::Chi { f, g: g2, channel });
            }
        }
    }
    for f in 0..nf {
        for g2 in 0..nf {
            if f != g2 {
                b.var(Var::Phi { f, g: g2 });
            }
        }
    }
    let cmax = b.var(Var::Cmax);

    let idx = b.index.clone();
    let col = |v: Var| idx[&v];
    let start_task = |j: TaskId| {
        let mut e = Expr::default();
        for machine in 1..=nm {
            for t in 0..t_max {
                e.add(col(Var::X { task: j, machine, t }), t);
            }
        }
        e
    };
    let placed = |j: TaskId, machine: usize| {
        let mut e = Expr::default();
        for t in 0..t_max {
            e.add(col(Var::X { task: j, machine, t }), 1);
        }
        e
    };
    let start_flow = |f: FlowId| {
        let mut e = Expr::default();
        for channel in 0..=nc {
            for t in 0..t_max {
                e.add(col(Var::Y { flow: f, channel, t }), t);
            }
        }
        e
    };
    let on_channel = |f: FlowId, channel: usize| {
        let mut e = Expr::default();
        for t in 0..t_max {
            e.add(col(Var::Y { flow: f, channel, t }), 1);
        }
        e
    };
    let psi = |a: TaskId, bb: TaskId, machine: usize| {
        let (a, bb) = (a.min(bb), a.max(bb));
        col(Var::Psi { a, b: bb, machine })
    };
    let chi = |f: FlowId, g2: FlowId, channel: usize| {
        let (f, g2) = (f.min(g2), f.max(g2));
        col(Var::Chi { f, g: g2, channel })
    };

    for j in 0..nj {
        let mut e = Expr::default();
        for machine in 1..=nm {
            e.add_expr(&placed(j, machine), 1);
        }
        b.row(Family::TaskCompletion, format!("c1_{j}"), e, Sense::Eq, 1);
    }
    for f in 0..nf {
        let mut e = Expr::default();
        for channel in 0..=nc {
            e.add_expr(&on_channel(f, channel), 1);
        }
        b.row(Family::FlowCompletion, format!("c11_{f}"), e, Sense::Eq, 1);
    }
    for a in 0..nj {
        for bb in a + 1..nj {
            for machine in 1..=nm {
                for (tag, sense, rhs) in [("lo", Sense::Ge, 0), ("hi", Sense::Le, 1)] {
                    let mut e = Expr::default();
                    e.add_expr(&placed(a, machine), 1)
                        .add_expr(&placed(bb, machine), 1)
                        .add(psi(a, bb, machine), -2);
                    b.row(Family::TaskColocation, format!("c12{tag}_{a}_{bb}_{machine}"), e, sense, rhs);
                }
            }
        }
    }
    // s_b - s_a - (M + ε)σ_ab <= -ε
    for a in 0..nj {
        for bb in 0..nj {
            if a == bb {
                continue;
            }
            let mut e = Expr::default();
            e.add_expr(&start_task(bb), 1)
                .add_expr(&start_task(a), -1)
                .add(col(Var::Sigma { a, b: bb }), -(m + epsilon));
            b.row(Family::TaskOrderIndicator, format!("c13_{a}_{bb}"), e, Sense::Le, -epsilon);
        }
    }
    // s_a - s_b + Mσ_ab + M Σψ <= 2M - p_a
    for a in 0..nj {
        for bb in 0..nj {
            if a == bb {
                continue;
            }
            let mut e = Expr::default();
            e.add_expr(&start_task(a), 1)
                .add_expr(&start_task(bb), -1)
                .add(col(Var::Sigma { a, b: bb }), m);
            for machine in 1..=nm {
                e.add(psi(a, bb, machine), m);
            }
            b.row(
                Family::TaskDisjunction,
                format!("c14_{a}_{bb}"),
                e,
                Sense::Le,
                m * 2 - g.duration(a),
            );
        }
    }
    for f in 0..nf {
        for g2 in f + 1..nf {
            for channel in 1..=nc {
                for (tag, sense, rhs) in [("lo", Sense::Ge, 0), ("hi", Sense::Le, 1)] {
                    let mut e = Expr::default();
                    e.add_expr(&on_channel(f, channel), 1)
                        .add_expr(&on_channel(g2, channel), 1)
                        .add(chi(f, g2, channel), -2);
                    b.row(Family::FlowSharing, format!("c15{tag}_{f}_{g2}_{channel}"), e, sense, rhs);
                }
            }
        }
    }
    for f in 0..nf {
        for g2 in 0..nf {
            if f == g2 {
                continue;
            }
            let mut e = Expr::default();
            e.add_expr(&start_flow(g2), 1)
                .add_expr(&start_flow(f), -1)
                .add(col(Var::Phi { f, g: g2 }), -(m + epsilon));
            b.row(Family::FlowOrderIndicator, format!("c16_{f}_{g2}"), e, Sense::Le, -epsilon);
        }
    }
    for f in 0..nf {
        for g2 in 0..nf {
            if f == g2 {
                continue;
            }
            let mut e = Expr::default();
            e.add_expr(&start_flow(f), 1)
                .add_expr(&start_flow(g2), -1)
                .add(col(Var::Phi { f, g: g2 }), m);
            for channel in 1..=nc {
                e.add(chi(f, g2, channel), m);
            }
            b.row(
                Family::FlowDisjunction,
                format!("c17_{f}_{g2}"),
                e,
                Sense::Le,
                m * 2 - g.edge(f).q,
            );
        }
    }
    for (f, edge) in g.edges().iter().enumerate() {
        let mut e = Expr::default();
        for machine in 1..=nm {
            e.add(psi(edge.u, edge.v, machine), 1);
        }
        e.add_expr(&on_channel(f, 0), -1);
        b.row(Family::Causality, format!("c18_{f}"), e, Sense::Eq, 0);
    }
    for (f, edge) in g.edges().iter().enumerate() {
        let mut e = Expr::default();
        e.add_expr(&start_task(edge.u), 1).add_expr(&start_flow(f), -1);
        b.row(Family::FlowAfterProducer, format!("c19_{f}"), e, Sense::Le, -g.duration(edge.u));
    }
    for (f, edge) in g.edges().iter().enumerate() {
        let mut e = Expr::default();
        e.add_expr(&start_flow(f), 1)
            .add_expr(&on_channel(f, 0), edge.r - edge.q)
            .add_expr(&start_task(edge.v), -1);
        b.row(Family::ConsumerAfterFlow, format!("c20_{f}"), e, Sense::Le, -edge.q);
    }
    for j in 0..nj {
        let mut e = Expr::default();
        e.add(cmax, 1).add_expr(&start_task(j), -1);
        b.row(Family::MakespanTask, format!("cmax_task_{j}"), e, Sense::Ge, g.duration(j));
    }
    for (f, edge) in g.edges().iter().enumerate() {
        let mut e = Expr::default();
        e.add(cmax, 1)
            .add_expr(&start_flow(f), -1)
            .add_expr(&on_channel(f, 0), edge.q);
        b.row(Family::MakespanExternal, format!("cmax_ext_{f}"), e, Sense::Ge, edge.q);
    }
    for (f, edge) in g.edges().iter().enumerate() {
        let mut e = Expr::default();
        e.add(cmax, 1)
            .add_expr(&start_flow(f), -1)
            .add_expr(&on_channel(f, 0), -edge.r);
        b.row(Family::MakespanInternal, format!("cmax_int_{f}"), e, Sense::Ge, 0);
    }

    let digest = Sha256::digest(write_instance_string(instance).as_bytes());
    let instance_hash = digest[..8].iter().map(|x| format!("{x:02x}")).collect();

    Ok(IlpModel {
        instance: instance.clone(),
        t_max,
        big_m,
        epsilon,
        instance_hash,
        vars: b.vars,
        index: b.index,
        rows: b.rows,
    })
}

/// `build_p2` with `ε = 1/2`.
pub fn build_default(instance: &Instance, t_max: Time) -> Result<IlpModel, FormulationError> {
    build_p2(instance, t_max, Rational64::new(1, 2))
}

/// Rows per family, in [`Family::ALL`] order, zero-count families included.
pub fn constraint_counts(model: &IlpModel) -> Vec<(Family, usize)> {
    Family::ALL
        .iter()
        .map(|&fam| (fam, model.rows.iter().filter(|r| r.family == fam).count()))
        .collect()
}

/// Evaluates every row and column domain exactly; empty iff `a` is feasible.
pub fn validate_assignment(
    model: &IlpModel,
    a: &Assignment,
) -> Result<Vec<Violated>, FormulationError> {
    if a.values.len() != model.vars.len() {
        return Err(FormulationError::ShapeMismatch {
            expected: model.vars.len(),
            got: a.values.len(),
        });
    }
    let mut out = Vec::new();
    for (i, (var, &val)) in model.vars.iter().zip(&a.values).enumerate() {
        let ok = if var.is_binary() {
            val == 0 || val == 1
        } else {
            (0..=model.t_max).contains(&val)
        };
        if !ok {
            out.push(Violated::Bound(i));
        }
    }
    out.extend(
        model
            .rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.holds(&a.values))
            .map(|(i, _)| Violated::Row(i)),
    );
    Ok(out)
}

/// Column values describing `schedule`: start indicators, co-location and order
/// indicators (`σ_ab = 1` iff `s_a <= s_b`), and `Cmax` equal to the makespan.
pub fn encode_schedule(model: &IlpModel, schedule: &Schedule) -> Result<Assignment, FormulationError> {
    let inst = &model.instance;
    let g = &inst.graph;
    if schedule.tasks.len() != g.task_count() || schedule.flows.len() != g.edge_count() {
        return Err(ScheduleError::ShapeMismatch {
            tasks: g.task_count(),
            flows: g.edge_count(),
            got_tasks: schedule.tasks.len(),
            got_flows: schedule.flows.len(),
        }
        .into());
    }
    let mut a = model.zero_assignment();
    let mut set = |var: Var, what: &dyn Fn() -> String| -> Result<(), FormulationError> {
        match model.index.get(&var) {
            Some(&c) => {
                a.values[c] = 1;
                Ok(())
            }
            None => Err(FormulationError::OutOfModel(what())),
        }
    };
    for (task, tp) in schedule.tasks.iter().enumerate() {
        set(
            Var::X {
                task,
                machine: tp.machine,
                t: tp.start,
            },
            &|| format!("task {task} at {} on machine {}", tp.start, tp.machine),
        )?;
    }
    let channel_index = |c: Channel| match c {
        Channel::Virtual => 0,
        Channel::Real(k) => k,
    };
    for (flow, fp) in schedule.flows.iter().enumerate() {
        set(
            Var::Y {
                flow,
                channel: channel_index(fp.channel),
                t: fp.start,
            },
            &|| format!("flow {flow} at {} on {}", fp.start, fp.channel),
        )?;
    }
    let nj = g.task_count();
    for x in 0..nj {
        for y in 0..nj {
            if x == y {
                continue;
            }
            let (tx, ty) = (schedule.tasks[x], schedule.tasks[y]);
            if x < y && tx.machine == ty.machine {
                set(
                    Var::Psi {
                        a: x,
                        b: y,
                        machine: tx.machine,
                    },
                    &|| format!("machine {}", tx.machine),
                )?;
            }
            if tx.start <= ty.start {
                set(Var::Sigma { a: x, b: y }, &|| String::new())?;
            }
        }
    }
    let nf = g.edge_count();
    for f in 0..nf {
        for h in 0..nf {
            if f == h {
                continue;
            }
            let (pf, ph) = (schedule.flows[f], schedule.flows[h]);
            if let (true, Channel::Real(k)) = (f < h && pf.channel == ph.channel, pf.channel) {
                set(Var::Chi { f, g: h, channel: k }, &|| format!("channel {k}"))?;
            }
            if pf.start <= ph.start {
                set(Var::Phi { f, g: h }, &|| String::new())?;
            }
        }
    }
    let ms = crate::schedule::makespan(inst, schedule)?;
    a.values[model.col(Var::Cmax)] = ms;
    Ok(a)
}

/// Reads starts, machines and channels back out of the start indicators.
pub fn decode_solution(model: &IlpModel, a: &Assignment) -> Result<Schedule, FormulationError> {
    if a.values.len() != model.vars.len() {
        return Err(FormulationError::ShapeMismatch {
            expected: model.vars.len(),
            got: a.values.len(),
        });
    }
    let g = &model.instance.graph;
    let mut tasks: Vec<Option<TaskPlacement>> = vec![None; g.task_count()];
    let mut flows: Vec<Option<FlowPlacement>> = vec![None; g.edge_count()];
    for (var, &val) in model.vars.iter().zip(&a.values) {
        if val == 0 {
            continue;
        }
        match *var {
            Var::X { task, machine, t } => {
                if val != 1 || tasks[task].is_some() {
                    return Err(FormulationError::MultipleStarts(format!("task {task}")));
                }
                tasks[task] = Some(TaskPlacement { machine, start: t });
            }
            Var::Y { flow, channel, t } => {
                if val != 1 || flows[flow].is_some() {
                    return Err(FormulationError::MultipleStarts(format!("flow {flow}")));
                }
                let channel = if channel == 0 {
                    Channel::Virtual
                } else {
                    Channel::Real(channel)
                };
                flows[flow] = Some(FlowPlacement { channel, start: t });
            }
            _ => {}
        }
    }
    let tasks = tasks
        .into_iter()
        .enumerate()
        .map(|(j, t)| t.ok_or_else(|| FormulationError::MultipleStarts(format!("task {j}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let flows = flows
        .into_iter()
        .enumerate()
        .map(|(f, x)| x.ok_or_else(|| FormulationError::MultipleStarts(format!("flow {f}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Schedule::new(&model.instance, tasks, flows)?)
}
