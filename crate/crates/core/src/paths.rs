//! Enumeration of the routes a player could have taken through an act map.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{ActMap, NodeId};

/// Which end nodes form a defeated run's choice set in its final act.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndSetMode {
    /// Any node on the floor where the run ended.
    #[default]
    Wide,
    /// Only the node where the run ended.
    Narrow,
}

/// Start and end node sets that describe a family of paths without
/// materializing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceSet {
    pub starts: BTreeSet<NodeId>,
    pub ends: BTreeSet<NodeId>,
}

impl ChoiceSet {
    pub fn new(starts: impl IntoIterator<Item = NodeId>, ends: impl IntoIterator<Item = NodeId>) -> Self {
        ChoiceSet {
            starts: starts.into_iter().collect(),
            ends: ends.into_iter().collect(),
        }
    }

    /// Every start node to the boss.
    pub fn full(map: &ActMap) -> Self {
        Self::new(map.start_nodes().iter().map(|n| n.id), [map.boss().id])
    }

    /// Every start node to any node on `floor`.
    pub fn prefix(map: &ActMap, floor: u8) -> Self {
        Self::new(
            map.start_nodes().iter().map(|n| n.id),
            map.floor_nodes(floor).iter().map(|n| n.id),
        )
    }

    /// Every start node to `end` only.
    pub fn to_node(map: &ActMap, end: NodeId) -> Self {
        Self::new(map.start_nodes().iter().map(|n| n.id), [end])
    }

    /// Choice set for a path that stopped at `last`.
    pub fn for_endpoint(map: &ActMap, last: NodeId, mode: EndSetMode) -> Self {
        match mode {
            EndSetMode::Wide => Self::prefix(map, map.node(last).floor),
            EndSetMode::Narrow => Self::to_node(map, last),
        }
    }

    /// `mask[n]` is true when some end node is reachable from `n` (inclusive).
    pub(crate) fn reach_mask(&self, map: &ActMap) -> Vec<bool> {
        let mut mask = vec![false; map.len()];
        for node in map.nodes().iter().rev() {
            let id = node.id;
            mask[id.index()] = self.ends.contains(&id) || map.successors(id).iter().any(|s| mask[s.index()]);
        }
        mask
    }
}

/// A materialized, duplicate-free list of paths.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathSet {
    pub paths: Vec<Vec<NodeId>>,
    pub start_set: BTreeSet<NodeId>,
    pub end_set: BTreeSet<NodeId>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[NodeId]> {
        self.paths.iter().map(Vec::as_slice)
    }
}

/// Streams every path of `choice` to `visit` in lexicographic node-id order.
///
/// Depth-first from each start; a set of nodes on the current path blocks
/// revisits. A path is reported whenever it lands on an end node, and the
/// walk keeps extending it in case further end nodes lie above.
pub fn for_each_path<F: FnMut(&[NodeId])>(map: &ActMap, choice: &ChoiceSet, mut visit: F) {
    let reach = choice.reach_mask(map);
    let mut on_path = vec![false; map.len()];
    let mut stack = Vec::with_capacity(map.boss_floor() as usize);
    for &start in &choice.starts {
        if start.index() < map.len() && reach[start.index()] {
            dfs(map, choice, &reach, start, &mut on_path, &mut stack, &mut visit);
        }
    }
}

fn dfs<F: FnMut(&[NodeId])>(
    map: &ActMap,
    choice: &ChoiceSet,
    reach: &[bool],
    node: NodeId,
    on_path: &mut [bool],
    stack: &mut Vec<NodeId>,
    visit: &mut F,
) {
    on_path[node.index()] = true;
    stack.push(node);
    if choice.ends.contains(&node) {
        visit(stack);
    }
    for &next in map.successors(node) {
        if reach[next.index()] && !on_path[next.index()] {
            dfs(map, choice, reach, next, on_path, stack, visit);
        }
    }
    stack.pop();
    on_path[node.index()] = false;
}

/// Number of paths in `choice`, counted by enumeration.
pub fn count_paths(map: &ActMap, choice: &ChoiceSet) -> u64 {
    let mut n = 0u64;
    for_each_path(map, choice, |_| n += 1);
    n
}

/// All unique paths from any node of `starts` to any node of `ends`.
pub fn all_paths(
    map: &ActMap,
    starts: impl IntoIterator<Item = NodeId>,
    ends: impl IntoIterator<Item = NodeId>,
) -> PathSet {
    materialize(map, ChoiceSet::new(starts, ends))
}

/// Paths from every start node to any node on `death_floor`: the same-length
/// alternatives available to a run that ended there.
pub fn prefix_paths(map: &ActMap, death_floor: u8) -> PathSet {
    materialize(map, ChoiceSet::prefix(map, death_floor))
}

/// Start-to-`end` paths only (the narrow reading of a defeat's choice set).
pub fn paths_to_node(map: &ActMap, end: NodeId) -> PathSet {
    materialize(map, ChoiceSet::to_node(map, end))
}

pub fn materialize(map: &ActMap, choice: ChoiceSet) -> PathSet {
    // Each start owns a disjoint slice of the output; gather them in start order.
    let paths: Vec<Vec<NodeId>> = choice
        .starts
        .par_iter()
        .map(|&start| {
            let single = ChoiceSet {
                starts: BTreeSet::from([start]),
                ends: choice.ends.clone(),
            };
            let mut out = Vec::new();
            for_each_path(map, &single, |p| out.push(p.to_vec()));
            out
        })
        .flatten_iter()
        .collect();
    PathSet {
        paths,
        start_set: choice.starts,
        end_set: choice.ends,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{chain, diamond};
    use crate::model::RoomType::*;

    #[test]
    fn chain_has_one_path() {
        let map = chain(1, &[Monster, Rest]);
        let set = all_paths(&map, [NodeId(0)], [NodeId(2)]);
        assert_eq!(set.paths, vec![vec![NodeId(0), NodeId(1), NodeId(2)]]);
    }

    #[test]
    fn diamond_has_two_paths() {
        let map = diamond(1, Monster, Shop, Elite);
        let set = all_paths(&map, [NodeId(0)], [map.boss().id]);
        assert_eq!(set.len(), 2);
        assert_eq!(set.paths[0][1], NodeId(1));
        assert_eq!(set.paths[1][1], NodeId(2));
    }

    #[test]
    fn empty_when_unreachable() {
        let map = diamond(1, Monster, Shop, Elite);
        assert!(all_paths(&map, [NodeId(1)], [NodeId(2)]).is_empty());
        assert!(all_paths(&map, [NodeId(3)], [NodeId(0)]).is_empty());
    }

    #[test]
    fn ends_on_several_floors_yield_nested_paths() {
        let map = chain(1, &[Monster, Monster, Rest]);
        let set = all_paths(&map, [NodeId(0)], [NodeId(1), NodeId(3)]);
        assert_eq!(set.len(), 2);
        assert_eq!(set.paths[0].len(), 2);
        assert_eq!(set.paths[1].len(), 4);
    }

    #[test]
    fn prefix_floor_one_is_single_nodes() {
        let map = diamond(1, Monster, Shop, Elite);
        let set = prefix_paths(&map, 1);
        assert_eq!(set.paths, vec![vec![NodeId(0)]]);
    }

    #[test]
    fn prefix_at_boss_floor_equals_full_set() {
        let map = diamond(2, Monster, Shop, Elite);
        let full = all_paths(&map, map.start_nodes().iter().map(|n| n.id), [map.boss().id]);
        assert_eq!(prefix_paths(&map, map.boss_floor()), full);
        assert_eq!(prefix_paths(&map, 2).len(), 2);
        assert_eq!(paths_to_node(&map, NodeId(2)).len(), 1);
    }

    #[test]
    fn set_semantics_ignore_input_order() {
        let map = diamond(1, Monster, Shop, Elite);
        let a = all_paths(&map, [NodeId(0)], [NodeId(1), NodeId(2)]);
        let b = all_paths(&map, [NodeId(0), NodeId(0)], [NodeId(2), NodeId(1), NodeId(2)]);
        assert_eq!(a, b);
        assert_eq!(count_paths(&map, &ChoiceSet::full(&map)), 2);
    }
}
