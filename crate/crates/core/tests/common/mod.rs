//! Oracles and generators shared by the integration tests. Everything here
//! works on the serialized map document, not on `ActMap` internals.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use spire_entropy::ingest::{MapDocument, SeedMaps};
use spire_entropy::model::{ActMap, RoomType};
use spire_entropy::synth::SynthParams;

pub type Coord = (u8, u8);

/// Random but feasible generator parameters: 1–15 floors, 1–7 columns.
pub fn random_params(rng: &mut impl Rng) -> SynthParams {
    let columns = rng.gen_range(1..=7);
    SynthParams {
        floors_per_act: rng.gen_range(1..=15),
        columns,
        start_node_count: rng.gen_range(1..=columns),
        edge_density: rng.gen_range(0.05..=1.0),
        ..SynthParams::default()
    }
}

pub struct DocAct {
    pub rooms: BTreeMap<Coord, RoomType>,
    pub succ: BTreeMap<Coord, Vec<Coord>>,
    pub boss: Coord,
}

pub fn doc_act(maps: &SeedMaps, act: u8) -> DocAct {
    let doc = MapDocument::from_maps(maps);
    let a = &doc.acts[act as usize - 1];
    let rooms: BTreeMap<Coord, RoomType> = a.nodes.iter().map(|n| ((n.floor, n.column), n.room)).collect();
    let mut succ: BTreeMap<Coord, Vec<Coord>> = BTreeMap::new();
    for e in &a.edges {
        succ.entry((e.from[0], e.from[1])).or_default().push((e.to[0], e.to[1]));
    }
    let boss = *rooms.iter().find(|(_, r)| **r == RoomType::Boss).unwrap().0;
    DocAct { rooms, succ, boss }
}

impl DocAct {
    pub fn starts(&self) -> Vec<Coord> {
        self.rooms.keys().filter(|c| c.0 == 1).copied().collect()
    }

    /// Start-to-boss path count by dynamic programming over floors.
    pub fn dp_count(&self) -> u64 {
        let mut ways: BTreeMap<Coord, u64> = BTreeMap::new();
        for &c in self.rooms.keys().rev() {
            let w = if c == self.boss {
                1
            } else {
                self.succ.get(&c).map_or(0, |s| s.iter().map(|n| ways[n]).sum())
            };
            ways.insert(c, w);
        }
        self.starts().iter().map(|c| ways[c]).sum()
    }

    /// Every start-to-`ends` path, grown breadth-first one floor at a time.
    pub fn brute_paths(&self, ends: &BTreeSet<Coord>) -> Vec<Vec<Coord>> {
        let mut done = Vec::new();
        let mut frontier: Vec<Vec<Coord>> = self.starts().into_iter().map(|c| vec![c]).collect();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for path in frontier {
                let last = *path.last().unwrap();
                if ends.contains(&last) {
                    done.push(path.clone());
                }
                for &s in self.succ.get(&last).into_iter().flatten() {
                    let mut longer = path.clone();
                    longer.push(s);
                    next.push(longer);
                }
            }
            frontier = next;
        }
        done.sort();
        done
    }
}

pub fn coords(map: &ActMap, path: &[spire_entropy::NodeId]) -> Vec<Coord> {
    path.iter()
        .map(|&id| {
            let n = map.node(id);
            (n.floor, n.column)
        })
        .collect()
}
