//! Seeded generator of act maps with the same structure as the game's maps.
//!
//! It does not reproduce the game's layouts. It only guarantees what the
//! scoring pipeline relies on: layered floors, a single boss on the top
//! floor, rest sites right below it, and a route to the boss from every node
//! that has exits.
//!
//! Randomness comes from `ChaCha8Rng` (rand_chacha 0.3) seeded with
//! `seed_from_u64(seed)`, drawing the three acts in order from one stream.
//! Output is therefore identical on every platform for a given
//! `(seed, SynthParams)`.

mod runs;

use std::collections::BTreeSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{MapDocument, SeedMaps};
use crate::model::{ActMap, RoomType, ACT_COUNT, MAX_COLUMNS, MAX_FLOOR};

pub use runs::{
    sample_uniform_path, synth_path, synth_run, CorpusRecipe, DeathModel, Outcome, PathPolicy, SyntheticCorpus,
};

pub const PRNG_NAME: &str = "ChaCha8Rng/rand_chacha-0.3/seed_from_u64";
pub const GENERATOR_NAME: &str = "spire-entropy-synth/1";

/// Room probabilities for an inclusive band of floors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomBand {
    pub floors: [u8; 2],
    pub weights: Vec<(RoomType, f64)>,
}

impl RoomBand {
    fn new(lo: u8, hi: u8, weights: &[(RoomType, f64)]) -> Self {
        RoomBand {
            floors: [lo, hi],
            weights: weights.to_vec(),
        }
    }

    fn covers(&self, floor: u8) -> bool {
        (self.floors[0]..=self.floors[1]).contains(&floor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    /// Floors below the boss; the boss sits on floor `floors_per_act + 1`.
    pub floors_per_act: u8,
    pub columns: u8,
    pub start_node_count: u8,
    /// Chance of each extra diagonal/straight edge beyond the one every node gets.
    pub edge_density: f64,
    pub room_mix: Vec<RoomBand>,
}

impl Default for SynthParams {
    fn default() -> Self {
        use RoomType::*;
        let mid = [
            (Monster, 0.45),
            (Unknown, 0.22),
            (Shop, 0.05),
            (Elite, 0.16),
            (Rest, 0.12),
        ];
        SynthParams {
            floors_per_act: 15,
            columns: MAX_COLUMNS,
            start_node_count: 3,
            edge_density: 0.35,
            room_mix: vec![
                RoomBand::new(1, 1, &[(Monster, 1.0)]),
                RoomBand::new(2, 5, &[(Monster, 0.6), (Unknown, 0.3), (Shop, 0.1)]),
                RoomBand::new(6, 8, &mid),
                RoomBand::new(9, 9, &[(Treasure, 1.0)]),
                RoomBand::new(10, 14, &mid),
            ],
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let infeasible = |s: String| Err(Error::InfeasibleParams(s));
        if self.floors_per_act == 0 || self.floors_per_act >= MAX_FLOOR {
            return infeasible(format!(
                "floors_per_act must be in 1..={}, got {}",
                MAX_FLOOR - 1,
                self.floors_per_act
            ));
        }
        if self.columns == 0 || self.columns > MAX_COLUMNS {
            return infeasible(format!("columns must be in 1..={MAX_COLUMNS}, got {}", self.columns));
        }
        if self.start_node_count == 0 {
            return infeasible("start_node_count must be at least 1".into());
        }
        if !(self.edge_density > 0.0 && self.edge_density <= 1.0) {
            return infeasible(format!("edge_density must be in (0, 1], got {}", self.edge_density));
        }
        for band in &self.room_mix {
            if band
                .weights
                .iter()
                .any(|(r, p)| *r == RoomType::Boss || !(0.0..=1.0).contains(p))
            {
                return infeasible(format!("band {:?} has a boss or an invalid weight", band.floors));
            }
            let sum: f64 = band.weights.iter().map(|(_, p)| p).sum();
            if (sum - 1.0).abs() > 1e-9 {
                return infeasible(format!("band {:?} sums to {sum}", band.floors));
            }
        }
        for floor in 1..self.floors_per_act {
            if !self.room_mix.iter().any(|b| b.covers(floor)) {
                return infeasible(format!("no room mix covers floor {floor}"));
            }
        }
        Ok(())
    }

    fn band(&self, floor: u8) -> &RoomBand {
        self.room_mix
            .iter()
            .find(|b| b.covers(floor))
            .expect("validated params cover every floor")
    }
}

/// Generates all three act maps for `seed`.
pub fn generate_map(seed: u64, params: &SynthParams) -> Result<SeedMaps> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let acts = (1..=ACT_COUNT)
        .map(|act| generate_act(act, params, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeedMaps {
        seed: seed.to_string(),
        acts,
    })
}

/// Map document for `seed`, with generator and PRNG recorded under `meta`.
pub fn generate_document(seed: u64, params: &SynthParams) -> Result<MapDocument> {
    let maps = generate_map(seed, params)?;
    let mut doc = MapDocument::from_maps(&maps);
    doc.meta.insert("generator".into(), GENERATOR_NAME.into());
    doc.meta.insert("prng".into(), PRNG_NAME.into());
    doc.meta.insert("seed".into(), seed.into());
    doc.meta
        .insert("params".into(), serde_json::to_value(params).expect("params serialize"));
    Ok(doc)
}

fn generate_act(act: u8, params: &SynthParams, rng: &mut ChaCha8Rng) -> Result<ActMap> {
    let columns = params.columns;
    let top = params.floors_per_act;
    let starts = params.start_node_count.min(columns);

    let mut floors: Vec<BTreeSet<u8>> = Vec::with_capacity(top as usize);
    floors.push(
        index::sample(rng, columns as usize, starts as usize)
            .into_iter()
            .map(|c| c as u8)
            .collect(),
    );
    let mut edges = Vec::new();
    for floor in 1..top {
        let mut next = BTreeSet::new();
        for &col in &floors[floor as usize - 1] {
            let candidates: Vec<u8> = [col.checked_sub(1), Some(col), Some(col + 1)]
                .into_iter()
                .flatten()
                .filter(|&c| c < columns)
                .collect();
            let primary = candidates[rng.gen_range(0..candidates.len())];
            for &c in &candidates {
                if c == primary || rng.gen_bool(params.edge_density) {
                    edges.push(((floor, col), (floor + 1, c)));
                    next.insert(c);
                }
            }
        }
        floors.push(next);
    }

    let boss_column = (columns - 1) / 2;
    let mut nodes = Vec::new();
    for (i, cols) in floors.iter().enumerate() {
        let floor = i as u8 + 1;
        for &col in cols {
            let room = if floor == top {
                edges.push(((floor, col), (top + 1, boss_column)));
                RoomType::Rest
            } else {
                draw_room(&params.band(floor).weights, rng)
            };
            nodes.push((floor, col, room));
        }
    }
    nodes.push((top + 1, boss_column, RoomType::Boss));
    ActMap::new(act, nodes, edges)
}

fn draw_room(weights: &[(RoomType, f64)], rng: &mut ChaCha8Rng) -> RoomType {
    let mut u: f64 = rng.gen();
    for &(room, p) in weights {
        if u < p {
            return room;
        }
        u -= p;
    }
    weights
        .iter()
        .rev()
        .find(|(_, p)| *p > 0.0)
        .map(|&(r, _)| r)
        .expect("band has positive weight")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{count_paths, ChoiceSet};

    #[test]
    fn single_column_is_a_chain() {
        let params = SynthParams {
            columns: 1,
            edge_density: 1.0,
            ..SynthParams::default()
        };
        let maps = generate_map(1, &params).unwrap();
        for map in &maps.acts {
            assert_eq!(map.len(), 16);
            assert_eq!(count_paths(map, &ChoiceSet::full(map)), 1);
        }
    }

    #[test]
    fn deterministic_documents() {
        let p = SynthParams::default();
        assert_eq!(
            generate_document(42, &p).unwrap().to_json(),
            generate_document(42, &p).unwrap().to_json()
        );
        assert_ne!(generate_map(42, &p).unwrap(), generate_map(43, &p).unwrap());
    }

    #[test]
    fn document_records_prng() {
        let doc = generate_document(5, &SynthParams::default()).unwrap();
        assert_eq!(doc.meta["prng"], PRNG_NAME);
        let reparsed = crate::ingest::parse_map(&doc.to_json()).unwrap();
        assert_eq!(reparsed, generate_map(5, &SynthParams::default()).unwrap());
    }

    #[test]
    fn infeasible_params() {
        let bad = [
            SynthParams {
                columns: 0,
                ..SynthParams::default()
            },
            SynthParams {
                columns: 8,
                ..SynthParams::default()
            },
            SynthParams {
                floors_per_act: 16,
                ..SynthParams::default()
            },
            SynthParams {
                edge_density: 0.0,
                ..SynthParams::default()
            },
            SynthParams {
                start_node_count: 0,
                ..SynthParams::default()
            },
            SynthParams {
                room_mix: vec![],
                ..SynthParams::default()
            },
        ];
        for p in bad {
            assert!(matches!(generate_map(1, &p), Err(Error::InfeasibleParams(_))), "{p:?}");
        }
        let mut unbalanced = SynthParams::default();
        unbalanced.room_mix[1].weights[0].1 = 0.7;
        assert!(generate_map(1, &unbalanced).is_err());
    }

    #[test]
    fn every_start_reaches_the_boss() {
        for seed in 0..50 {
            let maps = generate_map(seed, &SynthParams::default()).unwrap();
            for map in &maps.acts {
                for s in map.start_nodes() {
                    let c = ChoiceSet::new([s.id], [map.boss().id]);
                    assert!(count_paths(map, &c) > 0, "seed {seed} act {}", map.act());
                }
            }
        }
    }
}
