use super::SolveError;
use crate::dwdag::reachability;
use crate::instgen::Instance;
use crate::schedule::{earliest_start_schedule, Schedule, ScheduleError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceLimits {
    pub max_tasks: usize,
    pub max_machines: usize,
    pub max_channels: usize,
    /// Cap on semi-active schedules evaluated before giving up.
    pub max_evaluations: u64,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        BruteForceLimits {
            max_tasks: 6,
            max_machines: 3,
            max_channels: 2,
            max_evaluations: 5_000_000,
        }
    }
}

// Every ordering of `items` in which `before(a, b)` pairs keep their order.
fn linear_extensions(items: &[usize], before: &dyn Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    fn rec(
        left: &mut Vec<usize>,
        prefix: &mut Vec<usize>,
        before: &dyn Fn(usize, usize) -> bool,
        out: &mut Vec<Vec<usize>>,
    ) {
        if left.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..left.len() {
            let x = left[k];
            if left.iter().any(|&y| y != x && before(y, x)) {
                continue;
            }
            left.remove(k);
            prefix.push(x);
            rec(left, prefix, before, out);
            prefix.pop();
            left.insert(k, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut items.to_vec(), &mut Vec::new(), before, &mut out);
    out
}

// Calls `f` with one choice from every list, odometer order (last list fastest).
fn product<F: FnMut(&[&Vec<usize>]) -> Result<(), SolveError>>(
    lists: &[Vec<Vec<usize>>],
    f: &mut F,
) -> Result<(), SolveError> {
    let mut idx = vec![0usize; lists.len()];
    if lists.iter().any(|l| l.is_empty()) {
        return Ok(());
    }
    loop {
        let pick: Vec<&Vec<usize>> = lists.iter().zip(&idx).map(|(l, &i)| &l[i]).collect();
        f(&pick)?;
        let mut k = lists.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

// Advances a base-`radix` counter of digits `1..=radix`; false after the last value.
fn next_assignment(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        if *d < radix {
            *d += 1;
            return true;
        }
        *d = 1;
    }
    false
}

/// Minimum-makespan schedule by exhaustive enumeration of placements, per-machine
/// task orders, channel assignments and per-channel flow orders. Ties keep the first
/// schedule found.
pub fn solve_bruteforce(
    instance: &Instance,
    limits: &BruteForceLimits,
) -> Result<Schedule, SolveError> {
    let g = &instance.graph;
    let (nj, m, n) = (g.task_count(), instance.machines, instance.channels);
    if nj > limits.max_tasks || m > limits.max_machines || n > limits.max_channels {
        return Err(SolveError::TooLarge(format!(
            "{nj} tasks, {m} machines, {n} channels (caps {}, {}, {})",
            limits.max_tasks, limits.max_machines, limits.max_channels
        )));
    }
    let reach = reachability(g).expect("instances hold acyclic graphs");
    let task_before = |a: usize, b: usize| reach.get(a, b);
    let flow_before = |f: usize, h: usize| {
        let (ef, eh) = (g.edge(f), g.edge(h));
        ef.v == eh.u || reach.get(ef.v, eh.u)
    };

    let mut best: Option<Schedule> = None;
    let mut evaluations = 0u64;
    let mut placement = vec![1usize; nj];
    loop {
        let machine_orders: Vec<Vec<Vec<usize>>> = (1..=m)
            .map(|i| {
                let on: Vec<usize> = (0..nj).filter(|&j| placement[j] == i).collect();
                linear_extensions(&on, &task_before)
            })
            .collect();
        let external: Vec<usize> = (0..g.edge_count())
            .filter(|&f| placement[g.edge(f).u] != placement[g.edge(f).v])
            .collect();
        let mut assign = vec![1usize; external.len()];
        loop {
            let mut lists = machine_orders.clone();
            for k in 1..=n {
                let on: Vec<usize> = external
                    .iter()
                    .zip(&assign)
                    .filter(|&(_, &c)| c == k)
                    .map(|(&f, _)| f)
                    .collect();
                lists.push(linear_extensions(&on, &flow_before));
            }
            product(&lists, &mut |pick| {
                evaluations += 1;
                if evaluations > limits.max_evaluations {
                    return Err(SolveError::TooLarge(format!(
                        "more than {} schedules to evaluate",
                        limits.max_evaluations
                    )));
                }
                let machine: Vec<Vec<usize>> = pick[..m].iter().map(|v| v.to_vec()).collect();
                let channel: Vec<Vec<usize>> = pick[m..].iter().map(|v| v.to_vec()).collect();
                match earliest_start_schedule(instance, &placement, &machine, &channel) {
                    Ok(s) => {
                        if best.as_ref().is_none_or(|b| s.makespan < b.makespan) {
                            best = Some(s);
                        }
                        Ok(())
                    }
                    Err(ScheduleError::InconsistentOrder) => Ok(()),
                    Err(e) => Err(e.into()),
                }
            })?;
            if !next_assignment(&mut assign, n) {
                break;
            }
        }
        if !next_assignment(&mut placement, m) {
            break;
        }
    }
    Ok(best.expect("the single-machine topological schedule is always enumerated"))
}
