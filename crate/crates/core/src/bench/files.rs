//! JSON schedule documents, in the same conventions as instance files.
//!
//! ```json
//! {"version": 1, "makespan": 9,
//!  "tasks": [{"id": 0, "machine": 1, "start": 0}, {"id": 1, "machine": 2, "start": 6}],
//!  "flows": [{"id": 0, "channel": 1, "start": 2}]}
//! ```
//!
//! Machines and real channels are 1-based; channel 0 is the virtual (same-machine) channel.
//! The stored makespan is informational and recomputed on read.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::dwdag::Time;
use crate::instgen::format::{doc_error, parse_error};
use crate::instgen::{Instance, InstanceError, ParseErrorCode};
use crate::schedule::{makespan, Channel, FlowPlacement, Schedule, TaskPlacement};

const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub version: u32,
    pub makespan: Time,
    pub tasks: Vec<TaskEntry>,
    pub flows: Vec<FlowEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskEntry {
    pub id: usize,
    pub machine: usize,
    pub start: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowEntry {
    pub id: usize,
    pub channel: usize,
    pub start: Time,
}

impl From<&Schedule> for ScheduleFile {
    fn from(s: &Schedule) -> Self {
        ScheduleFile {
            version: VERSION,
            makespan: s.makespan,
            tasks: s
                .tasks
                .iter()
                .enumerate()
                .map(|(id, t)| TaskEntry {
                    id,
                    machine: t.machine,
                    start: t.start,
                })
                .collect(),
            flows: s
                .flows
                .iter()
                .enumerate()
                .map(|(id, f)| FlowEntry {
                    id,
                    channel: match f.channel {
                        Channel::Virtual => 0,
                        Channel::Real(k) => k,
                    },
                    start: f.start,
                })
                .collect(),
        }
    }
}

// Ids must be exactly 0..n, in any order.
fn dense<T: Copy>(entries: impl Iterator<Item = (usize, T)>, n: usize, what: &str) -> Result<Vec<T>, InstanceError> {
    let mut out = vec![None; n];
    for (id, v) in entries {
        match out.get_mut(id) {
            Some(slot @ None) => *slot = Some(v),
            _ => {
                return Err(doc_error(
                    ParseErrorCode::NonDenseIds,
                    format!("{what} id {id} is duplicated or out of range"),
                ))
            }
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(id, v)| {
            v.ok_or_else(|| doc_error(ParseErrorCode::NonDenseIds, format!("{what} {id} is missing")))
        })
        .collect()
}

/// Parses a schedule for `instance`. Only the document shape is checked here;
/// feasibility is [`crate::schedule::check_feasible`]'s job.
pub fn read_schedule_str(instance: &Instance, text: &str) -> Result<Schedule, InstanceError> {
    let doc: ScheduleFile = serde_json::from_str(text).map_err(|e| parse_error(&e))?;
    if doc.version != VERSION {
        return Err(doc_error(
            ParseErrorCode::UnsupportedVersion,
            format!("version {} (expected {VERSION})", doc.version),
        ));
    }
    let g = &instance.graph;
    let tasks = dense(
        doc.tasks.iter().map(|t| {
            (t.id, TaskPlacement {
                machine: t.machine,
                start: t.start,
            })
        }),
        g.task_count(),
        "task",
    )?;
    let flows = dense(
        doc.flows.iter().map(|f| {
            (f.id, FlowPlacement {
                channel: if f.channel == 0 {
                    Channel::Virtual
                } else {
                    Channel::Real(f.channel)
                },
                start: f.start,
            })
        }),
        g.edge_count(),
        "flow",
    )?;
    let mut s = Schedule {
        tasks,
        flows,
        makespan: 0,
    };
    s.makespan = makespan(instance, &s).map_err(|e| InstanceError::Invalid(e.to_string()))?;
    Ok(s)
}

pub fn read_schedule<R: Read>(instance: &Instance, mut source: R) -> Result<Schedule, InstanceError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    read_schedule_str(instance, &text)
}

pub fn write_schedule_string(schedule: &Schedule) -> String {
    let mut s = serde_json::to_string_pretty(&ScheduleFile::from(schedule))
        .expect("schedule documents serialize");
    s.push('\n');
    s
}
