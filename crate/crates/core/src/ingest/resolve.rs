//! Matching a run's logged room symbols onto map nodes.
//!
//! Logs carry room symbols only, so several node sequences can fit one act.
//! The default policy keeps the lexicographically smallest column sequence
//! and flags the trace as ambiguous; entropy depends only on room types and
//! visit order, so the choice never changes a score.

use crate::error::{Error, Result};
use crate::model::{format_symbols, ActMap, NodeId, PathTrace, RoomType, RunRecord, ACT_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmbiguityPolicy {
    /// Keep the leftmost matching sequence and set `PathTrace::ambiguous`.
    #[default]
    Leftmost,
    /// Fail with [`Error::AmbiguousPath`].
    Strict,
}

/// Splits a run's symbols into per-act segments. Each boss symbol closes the
/// current act; anything after the third boss is ignored.
pub fn split_acts(symbols: &[RoomType]) -> Vec<&[RoomType]> {
    let mut segments = Vec::new();
    let mut start = 0;
    for (i, &room) in symbols.iter().enumerate() {
        if segments.len() == ACT_COUNT as usize {
            break;
        }
        if room == RoomType::Boss {
            segments.push(&symbols[start..=i]);
            start = i + 1;
        }
    }
    if segments.len() < ACT_COUNT as usize && start < symbols.len() {
        segments.push(&symbols[start..]);
    }
    segments
}

/// Resolves every act the run entered. `maps` must hold acts 1..=3 in order.
pub fn resolve_path(maps: &[ActMap], run: &RunRecord) -> Result<Vec<PathTrace>> {
    resolve_path_with(maps, run, AmbiguityPolicy::Leftmost)
}

pub fn resolve_path_with(maps: &[ActMap], run: &RunRecord, policy: AmbiguityPolicy) -> Result<Vec<PathTrace>> {
    if run.path_symbols.is_empty() {
        return Err(Error::EmptyPath);
    }
    split_acts(&run.path_symbols)
        .into_iter()
        .enumerate()
        .map(|(i, rooms)| {
            let act = i as u8 + 1;
            let map = maps
                .iter()
                .find(|m| m.act() == act)
                .ok_or_else(|| Error::mismatch(act, "no map for this act"))?;
            resolve_act(map, rooms, policy)
        })
        .collect()
}

/// Finds the node sequence on `map` whose room types equal `rooms`, starting
/// on floor 1.
pub fn resolve_act(map: &ActMap, rooms: &[RoomType], policy: AmbiguityPolicy) -> Result<PathTrace> {
    let act = map.act();
    let len = rooms.len();
    if len == 0 {
        return Err(Error::EmptyPath);
    }
    if len > map.boss_floor() as usize {
        return Err(Error::mismatch(
            act,
            format!("{len} rooms logged but the act has {} floors", map.boss_floor()),
        ));
    }

    // completions[n] = number of ways to finish the logged segment from node n
    // (saturating), given that n sits on the floor matching its position.
    let mut completions = vec![0u64; map.len()];
    for floor in (1..=len as u8).rev() {
        let want = rooms[floor as usize - 1];
        for node in map.floor_nodes(floor) {
            if node.room_type != want {
                continue;
            }
            completions[node.id.index()] = if floor as usize == len {
                1
            } else {
                map.successors(node.id)
                    .iter()
                    .fold(0u64, |acc, s| acc.saturating_add(completions[s.index()]))
            };
        }
    }

    let total = map
        .start_nodes()
        .iter()
        .fold(0u64, |acc, n| acc.saturating_add(completions[n.id.index()]));
    if total == 0 {
        return Err(Error::mismatch(
            act,
            format!("no edge-consistent node sequence spells {}", format_symbols(rooms)),
        ));
    }
    if total > 1 && policy == AmbiguityPolicy::Strict {
        return Err(Error::AmbiguousPath { act, matches: total });
    }

    let viable = |id: NodeId| completions[id.index()] > 0;
    let mut current = map
        .start_nodes()
        .iter()
        .map(|n| n.id)
        .find(|&id| viable(id))
        .expect("total > 0 implies a viable start");
    let mut nodes = vec![*map.node(current)];
    for _ in 1..len {
        current = *map
            .successors(current)
            .iter()
            .find(|&&s| viable(s))
            .expect("viable node has a viable successor");
        nodes.push(*map.node(current));
    }

    Ok(PathTrace {
        act,
        complete: current == map.boss().id,
        nodes,
        ambiguous: total > 1,
    })
}
