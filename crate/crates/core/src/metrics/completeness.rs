use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::IdMapping;
use crate::mot_io::TrackSet;

pub const MISSING_MATCH: &str = "Missing match";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Completeness {
    MissingMatch,
    /// Ground-truth frames without a matching prediction of the mapped id.
    Missing(Vec<u32>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub entries: BTreeMap<u32, Completeness>,
}

impl CompletenessReport {
    pub fn counts_json(&self) -> Value {
        self.to_json(|frames| json!(frames.len()))
    }

    pub fn frames_json(&self) -> Value {
        self.to_json(|frames| json!(frames))
    }

    fn to_json(&self, f: impl Fn(&[u32]) -> Value) -> Value {
        let mut map = Map::new();
        for (id, entry) in &self.entries {
            let v = match entry {
                Completeness::MissingMatch => json!(MISSING_MATCH),
                Completeness::Missing(frames) => f(frames),
            };
            map.insert(id.to_string(), v);
        }
        Value::Object(map)
    }
}

/// Frames of each ground-truth id where its mapped prediction is absent or
/// outside the mapping criterion.
pub fn completeness(gt: &TrackSet, pred: &TrackSet, mapping: &IdMapping) -> CompletenessReport {
    let to_pred = mapping.gt_to_pred();
    let mut entries = BTreeMap::new();
    for (gid, recs) in gt.by_id() {
        let entry = match to_pred.get(&gid) {
            None => Completeness::MissingMatch,
            Some(pid) => Completeness::Missing(
                recs.iter()
                    .filter(|g| !pred.get(g.frame, *pid).is_some_and(|p| mapping.criterion.accepts(g, p)))
                    .map(|g| g.frame)
                    .collect(),
            ),
        };
        entries.insert(gid, entry);
    }
    CompletenessReport { entries }
}
