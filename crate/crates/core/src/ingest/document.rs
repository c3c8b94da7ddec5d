//! The native map document: one JSON object per seed holding all three acts.
//!
//! ```json
//! {"seed":"42","acts":[{"act":1,
//!   "nodes":[{"floor":1,"column":3,"type":"M"}, ...],
//!   "edges":[{"from":[1,3],"to":[2,2]}, ...]}, ...]}
//! ```
//!
//! `act` inside an act object and the top-level `meta` object are optional.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActMap, RoomType, ACT_COUNT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDocument {
    pub seed: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, serde_json::Value>,
    pub acts: Vec<ActDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub act: Option<u8>,
    pub nodes: Vec<NodeDocument>,
    pub edges: Vec<EdgeDocument>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDocument {
    pub floor: u8,
    pub column: u8,
    #[serde(rename = "type")]
    pub room: RoomType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDocument {
    pub from: [u8; 2],
    pub to: [u8; 2],
}

/// All act maps generated from one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedMaps {
    pub seed: String,
    pub acts: Vec<ActMap>,
}

impl SeedMaps {
    pub fn act(&self, act: u8) -> Option<&ActMap> {
        self.acts.iter().find(|m| m.act() == act)
    }
}

/// Parses a native map document and validates every act.
pub fn parse_map(text: &str) -> Result<SeedMaps> {
    let doc: MapDocument = serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    doc.into_maps()
}

pub fn load_map(path: &Path) -> Result<SeedMaps> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_map(&text)
}

impl MapDocument {
    pub fn into_maps(self) -> Result<SeedMaps> {
        if self.acts.len() != ACT_COUNT as usize {
            return Err(Error::MalformedDocument(format!(
                "expected {ACT_COUNT} acts, found {}",
                self.acts.len()
            )));
        }
        let acts = self
            .acts
            .into_iter()
            .enumerate()
            .map(|(i, act_doc)| {
                let act = i as u8 + 1;
                if let Some(declared) = act_doc.act {
                    if declared != act {
                        return Err(Error::MalformedDocument(format!(
                            "act entry {} declares act {declared}",
                            i + 1
                        )));
                    }
                }
                ActMap::new(
                    act,
                    act_doc.nodes.iter().map(|n| (n.floor, n.column, n.room)),
                    act_doc
                        .edges
                        .iter()
                        .map(|e| ((e.from[0], e.from[1]), (e.to[0], e.to[1]))),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SeedMaps { seed: self.seed, acts })
    }

    pub fn from_maps(maps: &SeedMaps) -> Self {
        let acts = maps
            .acts
            .iter()
            .map(|map| ActDocument {
                act: Some(map.act()),
                nodes: map
                    .nodes()
                    .iter()
                    .map(|n| NodeDocument {
                        floor: n.floor,
                        column: n.column,
                        room: n.room_type,
                    })
                    .collect(),
                edges: map
                    .edges()
                    .map(|(a, b)| {
                        let (a, b) = (map.node(a), map.node(b));
                        EdgeDocument {
                            from: [a.floor, a.column],
                            to: [b.floor, b.column],
                        }
                    })
                    .collect(),
            })
            .collect();
        MapDocument {
            seed: maps.seed.clone(),
            meta: BTreeMap::new(),
            acts,
        }
    }

    /// Compact single-line JSON followed by a newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("map document serializes");
        s.push('\n');
        s
    }
}
