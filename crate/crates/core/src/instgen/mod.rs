//! Problem instances: a job graph plus the machines and channels reserved for it.
//!
//! Random instances are layered DAGs drawn with ChaCha8 (`rand_chacha::ChaCha8Rng`)
//! seeded via `SeedableRng::seed_from_u64`. The draw sequence is fixed:
//!
//! 1. one processing time per task, in task order;
//! 2. one inclusion coin per candidate edge `(u, v)`, `u` ascending then `v` ascending,
//!    over every pair whose layer of `v` is strictly above the layer of `u`;
//! 3. for each task left without any incident edge (ascending id), one uniform pick
//!    among the tasks of later layers (or of earlier layers when it sits in the last
//!    one) to connect it;
//! 4. `q` then `r` for every edge, in final edge order.
//!
//! Together with the pinned generator this makes `generate` a pure function of its
//! parameters and seed on every platform.

pub(crate) mod format;

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dwdag::{Edge, JobGraph, Time, ValidationReport};
use crate::schedule::single_machine_baseline;

pub use format::{read_instance, read_instance_str, write_instance, write_instance_string};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("parse error ({code}) at line {line}, column {column}: {message}")]
    Parse {
        code: ParseErrorCode,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("instance failed validation: {0}")]
    ValidationFailed(ValidationReport),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorCode {
    Syntax,
    MissingField,
    UnknownField,
    InvalidValue,
    UnsupportedVersion,
    NonDenseIds,
}

impl std::fmt::Display for ParseErrorCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ParseErrorCode::Syntax => "SYNTAX",
            ParseErrorCode::MissingField => "MISSING_FIELD",
            ParseErrorCode::UnknownField => "UNKNOWN_FIELD",
            ParseErrorCode::InvalidValue => "INVALID_VALUE",
            ParseErrorCode::UnsupportedVersion => "UNSUPPORTED_VERSION",
            ParseErrorCode::NonDenseIds => "NON_DENSE_IDS",
        })
    }
}

/// A validated job graph with `machines >= 1` identical machines and `channels >= 1`
/// identical real channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: JobGraph,
    pub machines: usize,
    pub channels: usize,
    /// Explicit horizon. When absent, [`Instance::horizon`] derives one.
    pub t_max: Option<Time>,
}

impl Instance {
    pub fn new(
        graph: JobGraph,
        machines: usize,
        channels: usize,
        t_max: Option<Time>,
    ) -> Result<Self, InstanceError> {
        let report = graph.validate();
        if !report.ok() {
            return Err(InstanceError::ValidationFailed(report));
        }
        if machines < 1 || channels < 1 {
            return Err(InstanceError::Invalid(format!(
                "need at least one machine and one channel, got {machines} and {channels}"
            )));
        }
        let instance = Instance {
            graph,
            machines,
            channels,
            t_max: None,
        };
        if let Some(t) = t_max {
            let base = single_machine_baseline(&instance);
            if t < base {
                return Err(InstanceError::Invalid(format!(
                    "t_max {t} is below the single-machine baseline {base}"
                )));
            }
        }
        Ok(Instance { t_max, ..instance })
    }

    /// Same job on a different resource environment.
    pub fn with_resources(&self, machines: usize, channels: usize) -> Result<Self, InstanceError> {
        Instance::new(self.graph.clone(), machines, channels, self.t_max)
    }

    /// The explicit `t_max`, or the baseline makespan plus `max(q, r)` of every edge,
    /// which no optimal schedule exceeds.
    pub fn horizon(&self) -> Time {
        self.t_max.unwrap_or_else(|| {
            single_machine_baseline(self)
                + self
                    .graph
                    .edges()
                    .iter()
                    .map(|e| e.q.max(e.r))
                    .sum::<Time>()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub task_count: usize,
    pub edge_probability: f64,
    pub p_range: RangeInclusive<Time>,
    pub q_range: RangeInclusive<Time>,
    pub r_range: RangeInclusive<Time>,
    pub machines: usize,
    pub channels: usize,
    pub layers: usize,
}

impl Default for GenParams {
    /// Ten tasks in three layers, `p` in `[1, 100]`, `q` in `[1, 50]`, `r = 0`.
    fn default() -> Self {
        GenParams {
            task_count: 10,
            edge_probability: 0.35,
            p_range: 1..=100,
            q_range: 1..=50,
            r_range: 0..=0,
            machines: 2,
            channels: 1,
            layers: 3,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), InstanceError> {
        let bad = |m: &str| Err(InstanceError::InvalidParams(m.to_string()));
        if self.task_count < 1 {
            return bad("task_count must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.edge_probability) {
            return bad("edge_probability must lie in [0, 1]");
        }
        for (name, r, min) in [
            ("p_range", &self.p_range, 1),
            ("q_range", &self.q_range, 0),
            ("r_range", &self.r_range, 0),
        ] {
            if r.is_empty() || *r.start() < min {
                return Err(InstanceError::InvalidParams(format!(
                    "{name} must be nonempty with lower bound >= {min}"
                )));
            }
        }
        if self.machines < 1 || self.channels < 1 || self.layers < 1 {
            return bad("machines, channels and layers must be at least 1");
        }
        Ok(())
    }

    /// Layer of a task when `task_count` tasks are split evenly over `layers`.
    pub fn layer_of(&self, task: usize) -> usize {
        task * self.layers / self.task_count
    }
}

/// Draws a layered random instance. See the module docs for the exact draw order.
pub fn generate(params: &GenParams, seed: u64) -> Result<Instance, InstanceError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.task_count;
    let p: Vec<Time> = (0..n)
        .map(|_| rng.gen_range(params.p_range.clone()))
        .collect();

    let layer: Vec<usize> = (0..n).map(|j| params.layer_of(j)).collect();
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if layer[v] > layer[u] && rng.gen_bool(params.edge_probability) {
                pairs.push((u, v));
            }
        }
    }
    let multi_rank = layer.first() != layer.last();
    if multi_rank {
        let top = layer[n - 1];
        for j in 0..n {
            if pairs.iter().any(|&(u, v)| u == j || v == j) {
                continue;
            }
            if layer[j] < top {
                let later: Vec<usize> = (j + 1..n).filter(|&v| layer[v] > layer[j]).collect();
                let v = later[rng.gen_range(0..later.len())];
                pairs.push((j, v));
            } else {
                let earlier: Vec<usize> = (0..j).filter(|&u| layer[u] < layer[j]).collect();
                let u = earlier[rng.gen_range(0..earlier.len())];
                pairs.push((u, j));
            }
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(u, v)| {
            let q = rng.gen_range(params.q_range.clone());
            let r = rng.gen_range(params.r_range.clone());
            Edge::new(u, v, q, r)
        })
        .collect();
    Instance::new(
        JobGraph::new(p, edges),
        params.machines,
        params.channels,
        None,
    )
}

/// Optimal makespan of [`example_instance`], fixed by exhaustive enumeration.
pub const EXAMPLE_OPTIMAL_MAKESPAN: Time = 21;

/// Hand-built six-task, eight-flow job on two machines and one channel.
///
/// Task 0 feeds two parallel branches (1 -> 3 and 2 -> 4) that are cross-linked
/// (1 -> 4, 2 -> 3) and merge into task 5. The weights are invented for this crate.
pub fn example_instance() -> Instance {
    let p = vec![3, 5, 4, 6, 5, 2];
    let edges = vec![
        Edge::new(0, 1, 4, 1),
        Edge::new(0, 2, 3, 0),
        Edge::new(1, 3, 6, 1),
        Edge::new(1, 4, 2, 0),
        Edge::new(2, 3, 2, 0),
        Edge::new(2, 4, 5, 1),
        Edge::new(3, 5, 3, 0),
        Edge::new(4, 5, 2, 1),
    ];
    Instance::new(JobGraph::new(p, edges), 2, 1, None).expect("fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_task_has_no_edges() {
        let params = GenParams {
            task_count: 1,
            ..GenParams::default()
        };
        let i = generate(&params, 7).unwrap();
        assert_eq!(i.graph.task_count(), 1);
        assert_eq!(i.graph.edge_count(), 0);
    }

    #[test]
    fn zero_probability_single_layer_is_independent() {
        let params = GenParams {
            task_count: 6,
            edge_probability: 0.0,
            layers: 1,
            ..GenParams::default()
        };
        let i = generate(&params, 3).unwrap();
        assert_eq!(i.graph.edge_count(), 0);
    }

    #[test]
    fn isolated_tasks_get_connected_in_layered_graphs() {
        let params = GenParams {
            task_count: 9,
            edge_probability: 0.0,
            layers: 3,
            ..GenParams::default()
        };
        let i = generate(&params, 11).unwrap();
        for j in 0..9 {
            assert!(
                !i.graph.in_edges(j).is_empty() || !i.graph.out_edges(j).is_empty(),
                "task {j} isolated"
            );
        }
        for e in i.graph.edges() {
            assert!(params.layer_of(e.u) < params.layer_of(e.v));
        }
    }

    #[test]
    fn layers_split_evenly() {
        let params = GenParams::default();
        let layers: Vec<_> = (0..10).map(|j| params.layer_of(j)).collect();
        assert_eq!(layers, vec![0, 0, 0, 0, 1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn same_seed_same_instance() {
        let params = GenParams::default();
        assert_eq!(generate(&params, 42).unwrap(), generate(&params, 42).unwrap());
        assert_ne!(generate(&params, 42).unwrap(), generate(&params, 43).unwrap());
    }

    #[test]
    fn bad_params_are_rejected() {
        let params = GenParams {
            p_range: 0..=5,
            ..GenParams::default()
        };
        assert!(matches!(generate(&params, 1), Err(InstanceError::InvalidParams(_))));
        let params = GenParams {
            edge_probability: 1.5,
            ..GenParams::default()
        };
        assert!(generate(&params, 1).is_err());
    }

    #[test]
    fn example_shape() {
        let i = example_instance();
        assert_eq!(i.graph.task_count(), 6);
        assert_eq!(i.graph.edge_count(), 8);
    }

    #[test]
    fn horizon_default_and_explicit() {
        let g = JobGraph::new(vec![2, 3], vec![Edge::new(0, 1, 4, 1)]);
        let i = Instance::new(g.clone(), 2, 1, None).unwrap();
        assert_eq!(i.horizon(), 6 + 4);
        assert_eq!(Instance::new(g.clone(), 2, 1, Some(7)).unwrap().horizon(), 7);
        assert!(Instance::new(g.clone(), 2, 1, Some(5)).is_err());
        assert!(Instance::new(g, 0, 1, None).is_err());
    }
}
