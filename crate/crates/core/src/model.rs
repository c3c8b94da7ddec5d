//! Domain types shared across the crate: rooms, act maps, runs and resolved paths.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest act-local floor number; the boss sits on the last floor of an act.
pub const MAX_FLOOR: u8 = 16;
/// Map columns are numbered `0..MAX_COLUMNS`.
pub const MAX_COLUMNS: u8 = 7;
/// Number of acts analysed per run.
pub const ACT_COUNT: u8 = 3;

/// Kind of location on an act map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "char", into = "char")]
pub enum RoomType {
    Monster,
    Elite,
    Unknown,
    Shop,
    Treasure,
    Rest,
    Boss,
}

impl RoomType {
    pub const ALL: [RoomType; 7] = [
        RoomType::Monster,
        RoomType::Elite,
        RoomType::Unknown,
        RoomType::Shop,
        RoomType::Treasure,
        RoomType::Rest,
        RoomType::Boss,
    ];

    /// Canonical log symbol.
    pub fn symbol(self) -> char {
        match self {
            RoomType::Monster => 'M',
            RoomType::Elite => 'E',
            RoomType::Unknown => '?',
            RoomType::Shop => '$',
            RoomType::Treasure => 'T',
            RoomType::Rest => 'R',
            RoomType::Boss => 'B',
        }
    }

    pub fn from_symbol(symbol: char) -> Result<Self> {
        Ok(match symbol {
            'M' => RoomType::Monster,
            'E' => RoomType::Elite,
            '?' => RoomType::Unknown,
            '$' => RoomType::Shop,
            'T' => RoomType::Treasure,
            'R' => RoomType::Rest,
            'B' => RoomType::Boss,
            other => return Err(Error::UnknownSymbol(other.to_string())),
        })
    }

    /// Parses a one-character string such as `"?"`.
    pub fn from_str_symbol(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Self::from_symbol(c),
            _ => Err(Error::UnknownSymbol(s.to_string())),
        }
    }
}

pub fn symbol_to_room(symbol: char) -> Result<RoomType> {
    RoomType::from_symbol(symbol)
}

pub fn room_to_symbol(room: RoomType) -> char {
    room.symbol()
}

impl TryFrom<char> for RoomType {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        RoomType::from_symbol(c)
    }
}

impl From<RoomType> for char {
    fn from(r: RoomType) -> char {
        r.symbol()
    }
}

impl fmt::Display for RoomType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Parses a compact symbol string. Commas and whitespace are ignored, so
/// `"MM?R"` and `"M, M, ?, R"` are equivalent.
pub fn parse_symbols(s: &str) -> Result<Vec<RoomType>> {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(RoomType::from_symbol)
        .collect()
}

pub fn format_symbols(rooms: &[RoomType]) -> String {
    rooms.iter().map(|r| r.symbol()).collect()
}

/// Index of a node inside its [`ActMap`]. Ids follow `(floor, column)` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MapNode {
    pub id: NodeId,
    pub act: u8,
    pub floor: u8,
    pub column: u8,
    pub room_type: RoomType,
}

/// One act's map: a layered DAG in which every edge climbs exactly one floor
/// and the last floor holds a single boss node.
#[derive(Debug, Clone, PartialEq)]
pub struct ActMap {
    act: u8,
    nodes: Vec<MapNode>,
    successors: Vec<Vec<NodeId>>,
    predecessors: Vec<Vec<NodeId>>,
    /// `floor_start[f]..floor_start[f + 1]` are the node indices on floor `f`
    /// (index 0 unused).
    floor_start: Vec<usize>,
    boss: NodeId,
}

impl ActMap {
    /// Builds and validates an act map from `(floor, column, room)` triples and
    /// `((floor, column), (floor, column))` edges.
    pub fn new(
        act: u8,
        nodes: impl IntoIterator<Item = (u8, u8, RoomType)>,
        edges: impl IntoIterator<Item = ((u8, u8), (u8, u8))>,
    ) -> Result<Self> {
        if !(1..=ACT_COUNT).contains(&act) {
            return Err(Error::topology(
                act,
                format!("act number {act} outside 1..={ACT_COUNT}"),
            ));
        }
        let mut raw: Vec<(u8, u8, RoomType)> = nodes.into_iter().collect();
        if raw.is_empty() {
            return Err(Error::topology(act, "map has no nodes"));
        }
        raw.sort_by_key(|&(floor, column, _)| (floor, column));
        for pair in raw.windows(2) {
            if (pair[0].0, pair[0].1) == (pair[1].0, pair[1].1) {
                return Err(Error::topology(
                    act,
                    format!("duplicate node at floor {} column {}", pair[0].0, pair[0].1),
                ));
            }
        }
        for &(floor, column, _) in &raw {
            if !(1..=MAX_FLOOR).contains(&floor) {
                return Err(Error::topology(act, format!("floor {floor} outside 1..={MAX_FLOOR}")));
            }
            if column >= MAX_COLUMNS {
                return Err(Error::topology(
                    act,
                    format!("column {column} outside 0..{MAX_COLUMNS}"),
                ));
            }
        }

        let boss_floor = raw.last().map(|n| n.0).unwrap_or(0);
        if boss_floor < 2 {
            return Err(Error::topology(act, "an act needs at least one floor below the boss"));
        }
        let mut floor_start = vec![0usize; boss_floor as usize + 2];
        {
            let mut idx = 0;
            for (f, start) in floor_start.iter_mut().enumerate().skip(1).take(boss_floor as usize) {
                *start = idx;
                while idx < raw.len() && raw[idx].0 as usize == f {
                    idx += 1;
                }
                if *start == idx {
                    return Err(Error::topology(act, format!("floor {f} has no nodes")));
                }
            }
            floor_start[boss_floor as usize + 1] = idx;
        }

        let nodes: Vec<MapNode> = raw
            .iter()
            .enumerate()
            .map(|(i, &(floor, column, room_type))| MapNode {
                id: NodeId(i as u32),
                act,
                floor,
                column,
                room_type,
            })
            .collect();

        let boss_nodes: Vec<&MapNode> = nodes.iter().filter(|n| n.room_type == RoomType::Boss).collect();
        match boss_nodes.as_slice() {
            [] => return Err(Error::topology(act, "missing boss node")),
            [only] if only.floor == boss_floor => {}
            [only] => {
                return Err(Error::topology(
                    act,
                    format!("boss on floor {} but the last floor is {boss_floor}", only.floor),
                ))
            }
            _ => return Err(Error::topology(act, "more than one boss node")),
        }
        let boss = boss_nodes[0].id;
        if floor_start[boss_floor as usize + 1] - floor_start[boss_floor as usize] != 1 {
            return Err(Error::topology(act, "boss floor must hold only the boss"));
        }

        let lookup = |floor: u8, column: u8| -> Option<NodeId> {
            let f = floor as usize;
            if f == 0 || f > boss_floor as usize {
                return None;
            }
            nodes[floor_start[f]..floor_start[f + 1]]
                .iter()
                .find(|n| n.column == column)
                .map(|n| n.id)
        };

        let mut successors = vec![Vec::new(); nodes.len()];
        let mut predecessors = vec![Vec::new(); nodes.len()];
        for ((ff, fc), (tf, tc)) in edges {
            if tf != ff.wrapping_add(1) {
                return Err(Error::topology(
                    act,
                    format!("edge ({ff},{fc}) -> ({tf},{tc}) does not climb exactly one floor"),
                ));
            }
            let from =
                lookup(ff, fc).ok_or_else(|| Error::topology(act, format!("edge source ({ff},{fc}) is not a node")))?;
            let to =
                lookup(tf, tc).ok_or_else(|| Error::topology(act, format!("edge target ({tf},{tc}) is not a node")))?;
            successors[from.index()].push(to);
            predecessors[to.index()].push(from);
        }
        for list in successors.iter_mut().chain(predecessors.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }

        let map = ActMap {
            act,
            nodes,
            successors,
            predecessors,
            floor_start,
            boss,
        };
        map.check_rest_before_boss()?;
        map.check_boss_reachability()?;
        Ok(map)
    }

    fn check_rest_before_boss(&self) -> Result<()> {
        let before = self.boss_floor() - 1;
        if let Some(bad) = self.floor_nodes(before).iter().find(|n| n.room_type != RoomType::Rest) {
            return Err(Error::topology(
                self.act,
                format!(
                    "node at floor {} column {} is {:?}; the floor before the boss must be all rest sites",
                    bad.floor, bad.column, bad.room_type
                ),
            ));
        }
        Ok(())
    }

    fn check_boss_reachability(&self) -> Result<()> {
        let mut reaches = vec![false; self.nodes.len()];
        reaches[self.boss.index()] = true;
        let mut queue = VecDeque::from([self.boss]);
        while let Some(n) = queue.pop_front() {
            for &p in &self.predecessors[n.index()] {
                if !reaches[p.index()] {
                    reaches[p.index()] = true;
                    queue.push_back(p);
                }
            }
        }
        for node in &self.nodes {
            if !reaches[node.id.index()] && !self.successors[node.id.index()].is_empty() {
                return Err(Error::topology(
                    self.act,
                    format!(
                        "node at floor {} column {} has exits but cannot reach the boss",
                        node.floor, node.column
                    ),
                ));
            }
        }
        if !self.start_nodes().iter().any(|n| reaches[n.id.index()]) {
            return Err(Error::topology(self.act, "no start node reaches the boss"));
        }
        Ok(())
    }

    pub fn act(&self) -> u8 {
        self.act
    }

    pub fn nodes(&self) -> &[MapNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &MapNode {
        &self.nodes[id.index()]
    }

    pub fn get(&self, id: NodeId) -> Option<&MapNode> {
        self.nodes.get(id.index())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn successors(&self, id: NodeId) -> &[NodeId] {
        &self.successors[id.index()]
    }

    pub fn predecessors(&self, id: NodeId) -> &[NodeId] {
        &self.predecessors[id.index()]
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.successors
            .get(from.index())
            .is_some_and(|s| s.binary_search(&to).is_ok())
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    /// Edges as `(from, to)` pairs in node-id order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&t| (NodeId(i as u32), t)))
    }

    pub fn boss_floor(&self) -> u8 {
        self.nodes[self.boss.index()].floor
    }

    pub fn boss(&self) -> &MapNode {
        &self.nodes[self.boss.index()]
    }

    /// Nodes on `floor`, ordered by column. Empty for floors outside the map.
    pub fn floor_nodes(&self, floor: u8) -> &[MapNode] {
        let f = floor as usize;
        if f == 0 || f + 1 >= self.floor_start.len() {
            return &[];
        }
        &self.nodes[self.floor_start[f]..self.floor_start[f + 1]]
    }

    pub fn start_nodes(&self) -> &[MapNode] {
        self.floor_nodes(1)
    }

    pub fn find(&self, floor: u8, column: u8) -> Option<&MapNode> {
        self.floor_nodes(floor).iter().find(|n| n.column == column)
    }
}

/// One logged run, already mapped onto the canonical symbol alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub victory: bool,
    #[serde(rename = "ascension_level")]
    pub ascension: u8,
    #[serde(rename = "seed_played")]
    pub seed: String,
    #[serde(rename = "path_per_floor")]
    pub path_symbols: Vec<RoomType>,
    #[serde(flatten)]
    pub mode_flags: ModeFlags,
    #[serde(rename = "character_chosen")]
    pub character: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModeFlags {
    pub is_ascension_mode: bool,
    pub is_trial: bool,
    pub is_daily: bool,
    pub chose_seed: bool,
    pub is_beta: bool,
    pub is_endless: bool,
}

impl RunRecord {
    pub fn validate(&self) -> Result<()> {
        if self.path_symbols.is_empty() {
            return Err(Error::EmptyPath);
        }
        if self.ascension > 20 {
            return Err(Error::InvalidRecord(format!(
                "ascension level {} outside 0..=20",
                self.ascension
            )));
        }
        Ok(())
    }
}

/// A run's path through one act, resolved onto map nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTrace {
    pub act: u8,
    pub nodes: Vec<MapNode>,
    /// The path ends on the act's boss node.
    pub complete: bool,
    /// More than one node sequence matched the logged symbols; the
    /// lexicographically smallest column sequence was kept.
    pub ambiguous: bool,
}

impl PathTrace {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_ids(&self) -> Vec<NodeId> {
        self.nodes.iter().map(|n| n.id).collect()
    }

    pub fn rooms(&self) -> Vec<RoomType> {
        self.nodes.iter().map(|n| n.room_type).collect()
    }

    pub fn last_floor(&self) -> u8 {
        self.nodes.last().map_or(0, |n| n.floor)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Straight column-0 chain with the given non-boss rooms, closed by a boss.
    pub fn chain(act: u8, rooms: &[RoomType]) -> ActMap {
        let mut nodes: Vec<(u8, u8, RoomType)> = rooms.iter().enumerate().map(|(i, &r)| (i as u8 + 1, 0, r)).collect();
        let boss_floor = rooms.len() as u8 + 1;
        nodes.push((boss_floor, 0, RoomType::Boss));
        let edges = (1..boss_floor).map(|f| ((f, 0), (f + 1, 0)));
        ActMap::new(act, nodes, edges).unwrap()
    }

    /// Floor 1 `a`, floor 2 `left`/`right` in columns 0/2, floor 3 rest, floor 4 boss.
    pub fn diamond(act: u8, a: RoomType, left: RoomType, right: RoomType) -> ActMap {
        ActMap::new(
            act,
            [
                (1, 1, a),
                (2, 0, left),
                (2, 2, right),
                (3, 1, RoomType::Rest),
                (4, 1, RoomType::Boss),
            ],
            [
                ((1, 1), (2, 0)),
                ((1, 1), (2, 2)),
                ((2, 0), (3, 1)),
                ((2, 2), (3, 1)),
                ((3, 1), (4, 1)),
            ],
        )
        .unwrap()
    }
}
