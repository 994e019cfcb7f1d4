//! JSON instance documents.
//!
//! ```json
//! {"version": 1, "machines": 2, "channels": 1, "t_max": 20,
//!  "tasks": [{"id": 0, "p": 2}, {"id": 1, "p": 3}],
//!  "edges": [{"u": 0, "v": 1, "q": 4, "r": 1}]}
//! ```
//!
//! `t_max` is optional, task ids must be dense and 0-based, unknown fields are rejected.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Instance, InstanceError, ParseErrorCode};
use crate::dwdag::{Edge, JobGraph, Time};

const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    version: u32,
    machines: usize,
    channels: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_max: Option<Time>,
    tasks: Vec<TaskDoc>,
    edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskDoc {
    id: usize,
    p: Time,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    u: usize,
    v: usize,
    q: Time,
    r: Time,
}

pub(crate) fn parse_error(e: &serde_json::Error) -> InstanceError {
    let msg = e.to_string();
    let code = if msg.starts_with("missing field") {
        ParseErrorCode::MissingField
    } else if msg.starts_with("unknown field") {
        ParseErrorCode::UnknownField
    } else if e.is_data() {
        ParseErrorCode::InvalidValue
    } else {
        ParseErrorCode::Syntax
    };
    InstanceError::Parse {
        code,
        line: e.line(),
        column: e.column(),
        message: msg,
    }
}

pub(crate) fn doc_error(code: ParseErrorCode, message: String) -> InstanceError {
    InstanceError::Parse {
        code,
        line: 0,
        column: 0,
        message,
    }
}

pub fn read_instance_str(text: &str) -> Result<Instance, InstanceError> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| parse_error(&e))?;
    if doc.version != VERSION {
        return Err(doc_error(
            ParseErrorCode::UnsupportedVersion,
            format!("version {} (expected {VERSION})", doc.version),
        ));
    }
    let mut p = vec![None; doc.tasks.len()];
    for t in &doc.tasks {
        match p.get_mut(t.id) {
            Some(slot @ None) => *slot = Some(t.p),
            _ => {
                return Err(doc_error(
                    ParseErrorCode::NonDenseIds,
                    format!("task id {} is duplicated or out of range", t.id),
                ))
            }
        }
    }
    let p = p.into_iter().map(|x| x.expect("dense ids")).collect();
    let edges = doc
        .edges
        .iter()
        .map(|e| Edge::new(e.u, e.v, e.q, e.r))
        .collect();
    Instance::new(JobGraph::new(p, edges), doc.machines, doc.channels, doc.t_max)
}

pub fn read_instance<R: Read>(mut source: R) -> Result<Instance, InstanceError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    read_instance_str(&text)
}

pub fn write_instance_string(instance: &Instance) -> String {
    let g = &instance.graph;
    let doc = InstanceDoc {
        version: VERSION,
        machines: instance.machines,
        channels: instance.channels,
        t_max: instance.t_max,
        tasks: (0..g.task_count())
            .map(|id| TaskDoc {
                id,
                p: g.duration(id),
            })
            .collect(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                u: e.u,
                v: e.v,
                q: e.q,
                r: e.r,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("instance documents serialize");
    s.push('\n');
    s
}

pub fn write_instance<W: Write>(instance: &Instance, mut sink: W) -> Result<(), InstanceError> {
    sink.write_all(write_instance_string(instance).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dwdag::ViolationCode;
    use crate::instgen::{example_instance, generate, GenParams};

    #[test]
    fn example_round_trips() {
        let i = example_instance();
        let text = write_instance_string(&i);
        assert_eq!(read_instance_str(&text).unwrap(), i);
    }

    #[test]
    fn explicit_horizon_round_trips() {
        let i = generate(&GenParams::default(), 5).unwrap();
        let i = Instance {
            t_max: Some(i.horizon() + 3),
            ..i
        };
        let mut buf = Vec::new();
        write_instance(&i, &mut buf).unwrap();
        assert_eq!(read_instance(buf.as_slice()).unwrap(), i);
    }

    #[test]
    fn negative_weight_is_rejected() {
        let quoted = r#"{"version":1,"machines":2,"channels":1,
            "tasks":[{"id":0,"p":1},{"id":1,"p":1}],"edges":[{"u":0,"v":1,"q":"-3","r":0}]}"#;
        assert!(matches!(
            read_instance_str(quoted),
            Err(InstanceError::Parse {
                code: ParseErrorCode::InvalidValue,
                ..
            })
        ));
        let numeric = quoted.replace("\"-3\"", "-3");
        match read_instance_str(&numeric) {
            Err(InstanceError::ValidationFailed(r)) => assert!(r.has(ViolationCode::NegativeWeight)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_machines_is_a_parse_error() {
        let doc = r#"{"version":1,"channels":1,"tasks":[{"id":0,"p":1}],"edges":[]}"#;
        match read_instance_str(doc) {
            Err(InstanceError::Parse { code, line, .. }) => {
                assert_eq!(code, ParseErrorCode::MissingField);
                assert_eq!(line, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_sparse_ids_and_versions() {
        let unknown = r#"{"version":1,"machines":1,"channels":1,"tasks":[],"edges":[],"color":3}"#;
        assert!(matches!(
            read_instance_str(unknown),
            Err(InstanceError::Parse {
                code: ParseErrorCode::UnknownField,
                ..
            })
        ));
        let sparse = r#"{"version":1,"machines":1,"channels":1,"tasks":[{"id":1,"p":1}],"edges":[]}"#;
        assert!(matches!(
            read_instance_str(sparse),
            Err(InstanceError::Parse {
                code: ParseErrorCode::NonDenseIds,
                ..
            })
        ));
        let v2 = r#"{"version":2,"machines":1,"channels":1,"tasks":[],"edges":[]}"#;
        assert!(matches!(
            read_instance_str(v2),
            Err(InstanceError::Parse {
                code: ParseErrorCode::UnsupportedVersion,
                ..
            })
        ));
        assert!(matches!(
            read_instance_str("{"),
            Err(InstanceError::Parse {
                code: ParseErrorCode::Syntax,
                ..
            })
        ));
    }
}
