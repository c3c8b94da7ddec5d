//! Adapter for map dumps in the game's own coordinate layout, as produced by
//! the community map oracle.
//!
//! Expected input, one object per seed:
//!
//! ```json
//! {"seed": "123", "acts": [
//!   [ [ {"x":0,"y":0,"symbol":"M","edges":[{"dst_x":1,"dst_y":1}]}, ... ],  // row y = 0
//!     ... ],                                                                // 15 rows
//!   ...]}
//! ```
//!
//! Each act is a list of rows; row `y` becomes floor `y + 1` and `x` is the
//! column. Slots with an empty or missing `symbol`, or with neither outgoing
//! nor incoming edges, are dropped. Every node on the top row is wired to a
//! boss node inserted one floor above it, and edges whose destination lies
//! beyond the top row are folded into that boss edge. Acts past the third
//! (the heart) are ignored.

use std::collections::BTreeSet;

use serde::Deserialize;

use super::document::{ActDocument, EdgeDocument, MapDocument, NodeDocument};
use crate::error::{Error, Result};
use crate::model::{RoomType, ACT_COUNT};

#[derive(Debug, Deserialize)]
struct OracleDump {
    seed: serde_json::Value,
    acts: Vec<Vec<Vec<OracleNode>>>,
}

#[derive(Debug, Deserialize)]
struct OracleNode {
    x: u8,
    y: u8,
    #[serde(default)]
    symbol: Option<String>,
    #[serde(default)]
    edges: Vec<OracleEdge>,
}

fn symbol_of(n: &OracleNode) -> Option<&str> {
    n.symbol.as_deref().map(str::trim).filter(|s| !s.is_empty())
}

#[derive(Debug, Deserialize)]
struct OracleEdge {
    dst_x: u8,
    dst_y: u8,
}

/// Converts an oracle dump to a native [`MapDocument`].
pub fn convert_oracle(text: &str) -> Result<MapDocument> {
    let dump: OracleDump = serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    let seed = match dump.seed {
        serde_json::Value::String(s) => s,
        serde_json::Value::Number(n) => n.to_string(),
        other => return Err(Error::MalformedDocument(format!("unsupported seed value {other}"))),
    };
    let acts = dump
        .acts
        .iter()
        .take(ACT_COUNT as usize)
        .enumerate()
        .map(|(i, rows)| convert_act(i as u8 + 1, rows))
        .collect::<Result<Vec<_>>>()?;
    Ok(MapDocument {
        seed,
        meta: [("source".to_string(), serde_json::Value::from("oracle"))].into(),
        acts,
    })
}

fn convert_act(act: u8, rows: &[Vec<OracleNode>]) -> Result<ActDocument> {
    let top = rows
        .iter()
        .flatten()
        .map(|n| n.y)
        .max()
        .ok_or_else(|| Error::MalformedDocument(format!("act {act} has no rows")))?;

    let mut incoming = BTreeSet::new();
    for n in rows.iter().flatten() {
        for e in &n.edges {
            incoming.insert((e.dst_y, e.dst_x));
        }
    }

    let mut kept = BTreeSet::new();
    let mut nodes = Vec::new();
    for n in rows.iter().flatten() {
        let Some(sym) = symbol_of(n) else { continue };
        if n.edges.is_empty() && !incoming.contains(&(n.y, n.x)) && n.y != top {
            continue;
        }
        let room = RoomType::from_str_symbol(sym)
            .map_err(|_| Error::MalformedDocument(format!("act {act}: unknown symbol {sym:?}")))?;
        if kept.insert((n.y, n.x)) {
            nodes.push(NodeDocument {
                floor: n.y + 1,
                column: n.x,
                room,
            });
        }
    }

    let boss_floor = top + 2;
    let boss_column = 3;
    let mut edges = BTreeSet::new();
    for n in rows.iter().flatten() {
        if !kept.contains(&(n.y, n.x)) {
            continue;
        }
        let from = [n.y + 1, n.x];
        if n.y == top {
            edges.insert((from, [boss_floor, boss_column]));
            continue;
        }
        for e in &n.edges {
            if e.dst_y > top {
                edges.insert((from, [boss_floor, boss_column]));
            } else if kept.contains(&(e.dst_y, e.dst_x)) {
                edges.insert((from, [e.dst_y + 1, e.dst_x]));
            }
        }
    }
    nodes.push(NodeDocument {
        floor: boss_floor,
        column: boss_column,
        room: RoomType::Boss,
    });

    Ok(ActDocument {
        act: Some(act),
        nodes,
        edges: edges.into_iter().map(|(from, to)| EdgeDocument { from, to }).collect(),
    })
}
