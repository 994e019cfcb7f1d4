#![allow(dead_code)]

use dwsched::dwdag::{Edge, JobGraph, Time};
use dwsched::formulation::{IlpModel, Var};
use dwsched::instgen::Instance;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shape of a small random DAG: edges only go from lower to higher task id.
#[derive(Debug, Clone)]
pub struct TinySpec {
    pub tasks: (usize, usize),
    pub max_edges: usize,
    pub p: (Time, Time),
    pub q: (Time, Time),
    pub r: (Time, Time),
    pub machines: (usize, usize),
    pub channels: usize,
}

impl TinySpec {
    /// 3-5 tasks, up to 5 edges, p in [1, 10], q in [0, 6], r in {0, 1}, one or two machines.
    pub fn oracle() -> Self {
        TinySpec {
            tasks: (3, 5),
            max_edges: 5,
            p: (1, 10),
            q: (0, 6),
            r: (0, 1),
            machines: (1, 2),
            channels: 1,
        }
    }

    /// At most 3 tasks and 2 edges with weights small enough for a 12-slot horizon.
    pub fn model() -> Self {
        TinySpec {
            tasks: (2, 3),
            max_edges: 2,
            p: (1, 3),
            q: (0, 3),
            r: (0, 1),
            machines: (1, 2),
            channels: 1,
        }
    }
}

pub fn tiny_instance(spec: &TinySpec, seed: u64, t_max: Option<Time>) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(spec.tasks.0..=spec.tasks.1);
    let p = (0..n).map(|_| rng.gen_range(spec.p.0..=spec.p.1)).collect();
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    pairs.shuffle(&mut rng);
    let k = rng.gen_range(0..=spec.max_edges.min(pairs.len()));
    let mut chosen = pairs[..k].to_vec();
    chosen.sort_unstable();
    let edges = chosen
        .into_iter()
        .map(|(u, v)| {
            let q = rng.gen_range(spec.q.0..=spec.q.1);
            let r = rng.gen_range(spec.r.0..=spec.r.1);
            Edge::new(u, v, q, r)
        })
        .collect();
    let m = rng.gen_range(spec.machines.0..=spec.machines.1);
    Instance::new(JobGraph::new(p, edges), m, spec.channels, t_max).expect("valid tiny instance")
}

/// Smallest `CMAX` over every integer point satisfying all rows of `model`.
///
/// Start indicators are enumerated one-hot per task and per flow (the completion rows
/// force exactly one), every other binary column takes both values, and `CMAX` is
/// fixed first and raised until a point exists. A row is checked as soon as its last
/// column is fixed.
pub fn model_min_cmax(model: &IlpModel) -> Option<Time> {
    let vars = model.vars();
    let cmax = model.var_index(&Var::Cmax).expect("model has a makespan column");
    let j = model.instance().graph.task_count();
    let f = model.instance().graph.edge_count();

    // Stages: each task's start block, then the pair binaries it completes; then flows likewise.
    let mut stages: Vec<Stage> = Vec::new();
    for task in 0..j {
        stages.push(Stage::OneHot(
            (0..vars.len()).filter(|&c| matches!(vars[c], Var::X { task: t, .. } if t == task)).collect(),
        ));
        for (c, var) in vars.iter().enumerate() {
            let pair = match *var {
                Var::Psi { a, b, .. } | Var::Sigma { a, b } => Some(a.max(b)),
                _ => None,
            };
            if pair == Some(task) {
                stages.push(Stage::Binary(c));
            }
        }
    }
    for flow in 0..f {
        stages.push(Stage::OneHot(
            (0..vars.len()).filter(|&c| matches!(vars[c], Var::Y { flow: g, .. } if g == flow)).collect(),
        ));
        for (c, var) in vars.iter().enumerate() {
            let pair = match *var {
                Var::Chi { f, g, .. } | Var::Phi { f, g } => Some(f.max(g)),
                _ => None,
            };
            if pair == Some(flow) {
                stages.push(Stage::Binary(c));
            }
        }
    }
    let covered: usize = stages
        .iter()
        .map(|s| match s {
            Stage::OneHot(cs) => cs.len(),
            Stage::Binary(_) => 1,
        })
        .sum();
    assert_eq!(covered + 1, vars.len(), "every column belongs to exactly one stage");

    let mut stage_of = vec![0usize; vars.len()];
    for (k, s) in stages.iter().enumerate() {
        match s {
            Stage::OneHot(cs) => cs.iter().for_each(|&c| stage_of[c] = k + 1),
            Stage::Binary(c) => stage_of[*c] = k + 1,
        }
    }
    let mut rows_at = vec![Vec::new(); stages.len() + 1];
    for (r, row) in model.rows().iter().enumerate() {
        let last = row.terms.iter().map(|&(c, _)| stage_of[c]).max().unwrap_or(0);
        rows_at[last].push(r);
    }

    let mut values = vec![0i64; vars.len()];
    for c in 0..=model.t_max() {
        values.iter_mut().for_each(|v| *v = 0);
        values[cmax] = c;
        let ok_root = rows_at[0].iter().all(|&r| model.rows()[r].holds(&values));
        if ok_root && dfs(model, &stages, &rows_at, 0, &mut values) {
            return Some(c);
        }
    }
    None
}

enum Stage {
    OneHot(Vec<usize>),
    Binary(usize),
}

fn dfs(model: &IlpModel, stages: &[Stage], rows_at: &[Vec<usize>], k: usize, values: &mut [i64]) -> bool {
    if k == stages.len() {
        return true;
    }
    let check = |values: &[i64]| rows_at[k + 1].iter().all(|&r| model.rows()[r].holds(values));
    match &stages[k] {
        Stage::OneHot(cs) => {
            for &c in cs {
                values[c] = 1;
                if check(values) && dfs(model, stages, rows_at, k + 1, values) {
                    return true;
                }
                values[c] = 0;
            }
            false
        }
        Stage::Binary(c) => {
            for v in [0, 1] {
                values[*c] = v;
                if check(values) && dfs(model, stages, rows_at, k + 1, values) {
                    return true;
                }
            }
            values[*c] = 0;
            false
        }
    }
}

/// Median of a nonempty list, averaging the middle pair for even lengths.
pub fn median(mut xs: Vec<u64>) -> f64 {
    xs.sort_unstable();
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2] as f64
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) as f64 / 2.0
    }
}
