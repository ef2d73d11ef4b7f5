//! Frame-stream extraction: one frame per graphical-store change, serialized
//! as line-delimited JSON with a stable field order.

use serde::Serialize;
use serde_json::Value;

use chrvis_core::graphics::{GraphicalAction, GraphicalObject, Visual};
use chrvis_core::vis::{VisLabel, VisRunOutcome, VisStackEntry};
use chrvis_core::Term;

#[derive(Debug, Clone, Serialize)]
pub struct ObjectJson {
    pub kind: String,
    pub name: String,
    pub id: u64,
    pub actuals: Vec<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ActionJson {
    pub kind: String,
    pub actuals: Vec<Value>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Object(ObjectJson),
    Action(ActionJson),
    Removed { removed_ids: Vec<u64> },
}

/// One animation frame: `store_snapshot` is the graphical store right after
/// the event.
#[derive(Debug, Clone, Serialize)]
pub struct Frame {
    pub seq: u64,
    pub time: usize,
    pub event: String,
    pub payload: Payload,
    pub store_snapshot: Vec<ObjectJson>,
}

pub fn term_value(term: &Term) -> Value {
    match term {
        Term::Int(n) => Value::from(*n),
        other => Value::String(other.to_string()),
    }
}

pub fn object_json(obj: &GraphicalObject) -> ObjectJson {
    ObjectJson {
        kind: obj.kind.name().to_string(),
        name: obj.name.clone(),
        id: obj.id,
        actuals: obj.actuals.iter().map(term_value).collect(),
    }
}

fn action_json(action: &GraphicalAction) -> ActionJson {
    ActionJson {
        kind: action.kind.name().to_string(),
        actuals: action.actuals.iter().map(term_value).collect(),
    }
}

/// Walk a visual run and emit frames for draws, store updates and
/// communicated-head removals.
pub fn frames_of(outcome: &VisRunOutcome) -> Vec<Frame> {
    let mut frames = Vec::new();
    let mut seq = 0u64;
    for (k, (label, after)) in outcome.trace.iter().enumerate() {
        let before = outcome.state_before(k);
        let payload = match label {
            VisLabel::Draw { object_id } => after
                .gr
                .objects()
                .iter()
                .find(|o| o.id == *object_id)
                .map(|o| Payload::Object(object_json(o))),
            VisLabel::UpdateStore { .. } => match before.stack.last() {
                Some(VisStackEntry::Pending(Visual::Action(action), _)) => {
                    Some(Payload::Action(action_json(action)))
                }
                _ => None,
            },
            VisLabel::Apply { .. } => {
                let removed: Vec<u64> = before
                    .gr
                    .objects()
                    .iter()
                    .map(|o| o.id)
                    .filter(|id| after.gr.objects().iter().all(|o| o.id != *id))
                    .collect();
                if removed.is_empty() {
                    None
                } else {
                    Some(Payload::Removed { removed_ids: removed })
                }
            }
            _ => None,
        };
        if let Some(payload) = payload {
            seq += 1;
            let event = match &payload {
                Payload::Object(_) => "draw",
                Payload::Action(_) => "update",
                Payload::Removed { .. } => "remove",
            };
            frames.push(Frame {
                seq,
                time: k,
                event: event.to_string(),
                payload,
                store_snapshot: after.gr.objects().iter().map(object_json).collect(),
            });
        }
    }
    frames
}

pub fn frames_jsonl(frames: &[Frame]) -> String {
    let mut out = String::new();
    for frame in frames {
        out.push_str(&serde_json::to_string(frame).expect("frames serialize"));
        out.push('\n');
    }
    out
}
