//! Path scoring, choice-set bounds and normalization.

use serde::Serialize;

use super::model::{EntropyModel, VisitCounters};
use crate::error::{Error, Result};
use crate::model::{ActMap, NodeId, PathTrace, RoomType};
use crate::paths::{ChoiceSet, EndSetMode, PathSet};

/// Bounds closer than this are treated as equal.
pub const DEGENERATE_EPSILON: f64 = 1e-9;
/// Played entropy may sit this far outside its bounds before it is an error.
pub const RANGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PathEntropy {
    pub total: f64,
    pub per_node: Vec<(NodeId, f64)>,
}

/// Extreme path entropies over a choice set, with one witness path each.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
    pub min_path: Vec<NodeId>,
    pub max_path: Vec<NodeId>,
}

/// Scores for one act of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub act: u8,
    pub per_node: Vec<(NodeId, f64)>,
    /// Entropy of the path actually played.
    pub total: f64,
    pub min_possible: f64,
    pub max_possible: f64,
    pub normalized: f64,
    pub per_step: f64,
    pub path_length: usize,
    /// Every alternative had the same entropy; `normalized` is 0 and carries no signal.
    pub degenerate: bool,
    pub complete: bool,
}

/// Rescales `played` into `[0, 1]` against `[min, max]`. Returns 0 when the
/// range is empty.
pub fn normalize(played: f64, min: f64, max: f64) -> Result<f64> {
    if played < min - RANGE_TOLERANCE || played > max + RANGE_TOLERANCE {
        return Err(Error::OutOfRange { played, min, max });
    }
    if max - min <= DEGENERATE_EPSILON {
        return Ok(0.0);
    }
    Ok(((played - min) / (max - min)).clamp(0.0, 1.0))
}

/// Normalized entropy divided by path length.
pub fn per_step(normalized: f64, path_length: usize) -> Result<f64> {
    if path_length == 0 {
        return Err(Error::ZeroLength);
    }
    Ok(normalized / path_length as f64)
}

impl EntropyModel {
    /// Per-room contributions for a sequence of rooms entered in order within `act`.
    pub fn score_rooms(&self, act: u8, rooms: &[RoomType]) -> Vec<f64> {
        let mut counters = VisitCounters::default();
        let mut chain = self.unknown_chain();
        rooms
            .iter()
            .map(|&room| {
                let bits = if room == RoomType::Unknown {
                    let (bits, next) = super::chain::unknown_step_entropy(&chain, counters.unknown + 1);
                    chain = next;
                    bits
                } else {
                    self.location_entropy(room, act, &counters)
                };
                counters.record(room);
                bits
            })
            .collect()
    }

    /// Sum of location entropies along `path`, which must follow map edges.
    pub fn path_entropy(&self, map: &ActMap, path: &[NodeId]) -> Result<PathEntropy> {
        if path.is_empty() {
            return Err(Error::InvalidPath("empty path".into()));
        }
        if let Some(bad) = path.iter().find(|id| map.get(**id).is_none()) {
            return Err(Error::InvalidPath(format!("{bad} is not a node of act {}", map.act())));
        }
        if let Some(w) = path.windows(2).find(|w| !map.has_edge(w[0], w[1])) {
            return Err(Error::InvalidPath(format!("no edge {} -> {}", w[0], w[1])));
        }
        let rooms: Vec<RoomType> = path.iter().map(|&id| map.node(id).room_type).collect();
        let contributions = self.score_rooms(map.act(), &rooms);
        let total = contributions.iter().fold(0.0, |acc, b| acc + b);
        Ok(PathEntropy {
            total,
            per_node: path.iter().copied().zip(contributions).collect(),
        })
    }

    /// Min and max path entropy over a materialized path set.
    pub fn entropy_bounds(&self, map: &ActMap, choice_set: &PathSet) -> Result<Bounds> {
        let mut best: Option<Bounds> = None;
        for path in choice_set.iter() {
            let total = self.path_entropy(map, path)?.total;
            match &mut best {
                None => {
                    best = Some(Bounds {
                        min: total,
                        max: total,
                        min_path: path.to_vec(),
                        max_path: path.to_vec(),
                    })
                }
                Some(b) => {
                    if total < b.min {
                        b.min = total;
                        b.min_path = path.to_vec();
                    }
                    if total > b.max {
                        b.max = total;
                        b.max_path = path.to_vec();
                    }
                }
            }
        }
        best.ok_or(Error::EmptyChoiceSet)
    }

    /// Min and max path entropy over every path of `choice`, without
    /// enumerating them.
    ///
    /// A room's contribution depends only on the act and on how many
    /// monsters, elites and Unknown rooms came before it, with the monster
    /// count saturating at the act's first-visit threshold and the elite
    /// count at one. Sweeping floors upward while keeping, for each node and
    /// each such visit state, the smallest and largest partial sum gives the
    /// exact extremes.
    pub fn choice_bounds(&self, map: &ActMap, choice: &ChoiceSet) -> Result<Bounds> {
        let act = map.act();
        let monster_cap = self.monster_first_visits(act);
        let cap = |mut c: VisitCounters| {
            c.monster = c.monster.min(monster_cap);
            c.elite = c.elite.min(1);
            c
        };
        let reach = choice.reach_mask(map);
        let mut slots: Vec<Vec<Slot>> = vec![Vec::new(); map.len()];

        for &start in &choice.starts {
            if start.index() >= map.len() || !reach[start.index()] {
                continue;
            }
            let room = map.node(start).room_type;
            let bits = 0.0 + self.location_entropy(room, act, &VisitCounters::default());
            let mut key = VisitCounters::default();
            key.record(room);
            merge(&mut slots[start.index()], cap(key), bits, bits, None, None);
        }

        let mut best: Option<(f64, Link, f64, Link)> = None;
        for node in map.nodes() {
            let here = node.id;
            if slots[here.index()].is_empty() {
                continue;
            }
            if choice.ends.contains(&here) {
                for (i, s) in slots[here.index()].iter().enumerate() {
                    let link = (here, i as u32);
                    match &mut best {
                        None => best = Some((s.min, link, s.max, link)),
                        Some(b) => {
                            if s.min < b.0 {
                                (b.0, b.1) = (s.min, link);
                            }
                            if s.max > b.2 {
                                (b.2, b.3) = (s.max, link);
                            }
                        }
                    }
                }
            }
            for &next in map.successors(here) {
                if !reach[next.index()] {
                    continue;
                }
                let room = map.node(next).room_type;
                for i in 0..slots[here.index()].len() {
                    let s = slots[here.index()][i];
                    let bits = self.location_entropy(room, act, &s.key);
                    let mut key = s.key;
                    key.record(room);
                    merge(
                        &mut slots[next.index()],
                        cap(key),
                        s.min + bits,
                        s.max + bits,
                        Some((here, i as u32)),
                        Some((here, i as u32)),
                    );
                }
            }
        }

        let (min, min_end, max, max_end) = best.ok_or(Error::EmptyChoiceSet)?;
        Ok(Bounds {
            min,
            max,
            min_path: backtrack(&slots, min_end, |s| s.min_from),
            max_path: backtrack(&slots, max_end, |s| s.max_from),
        })
    }

    /// Full report for one resolved act. The choice set is every start-to-boss
    /// path for a completed act, or the defeat choice set selected by `mode`.
    pub fn report(&self, map: &ActMap, trace: &PathTrace, mode: EndSetMode) -> Result<EntropyReport> {
        let ids = trace.node_ids();
        let played = self.path_entropy(map, &ids)?;
        let last = *ids.last().expect("path_entropy rejects empty paths");
        let choice = if trace.complete {
            ChoiceSet::full(map)
        } else {
            ChoiceSet::for_endpoint(map, last, mode)
        };
        let bounds = self.choice_bounds(map, &choice)?;
        let degenerate = bounds.max - bounds.min <= DEGENERATE_EPSILON;
        let normalized = normalize(played.total, bounds.min, bounds.max)?;
        Ok(EntropyReport {
            act: map.act(),
            total: played.total,
            per_node: played.per_node,
            min_possible: bounds.min,
            max_possible: bounds.max,
            normalized,
            per_step: per_step(normalized, ids.len())?,
            path_length: ids.len(),
            degenerate,
            complete: trace.complete,
        })
    }
}

type Link = (NodeId, u32);

#[derive(Debug, Clone, Copy)]
struct Slot {
    key: VisitCounters,
    min: f64,
    max: f64,
    min_from: Option<Link>,
    max_from: Option<Link>,
}

fn merge(
    slots: &mut Vec<Slot>,
    key: VisitCounters,
    min: f64,
    max: f64,
    min_from: Option<Link>,
    max_from: Option<Link>,
) {
    match slots.iter_mut().find(|s| s.key == key) {
        Some(s) => {
            if min < s.min {
                s.min = min;
                s.min_from = min_from;
            }
            if max > s.max {
                s.max = max;
                s.max_from = max_from;
            }
        }
        None => slots.push(Slot {
            key,
            min,
            max,
            min_from,
            max_from,
        }),
    }
}

fn backtrack(slots: &[Vec<Slot>], end: Link, from: impl Fn(&Slot) -> Option<Link>) -> Vec<NodeId> {
    let mut path = vec![end.0];
    let mut at = end;
    while let Some(prev) = from(&slots[at.0.index()][at.1 as usize]) {
        path.push(prev.0);
        at = prev;
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{chain, diamond};
    use crate::model::parse_symbols;
    use crate::paths::{all_paths, materialize};
    use RoomType::*;

    fn total(act: u8, symbols: &str) -> f64 {
        EntropyModel::bundled()
            .score_rooms(act, &parse_symbols(symbols).unwrap())
            .iter()
            .sum()
    }

    #[test]
    fn zero_entropy_path() {
        let map = chain(1, &[Shop, Rest]);
        let ids: Vec<NodeId> = map.nodes()[..2].iter().map(|n| n.id).collect();
        let pe = EntropyModel::bundled().path_entropy(&map, &ids).unwrap();
        assert_eq!(pe.total, 0.0);
        assert_eq!(pe.per_node.len(), 2);
    }

    fn treasure_bits() -> f64 {
        -[0.5f64, 0.33, 0.17].iter().map(|p| p * p.log2()).sum::<f64>()
    }

    #[test]
    fn act1_constant_sums() {
        // Unrounded terms sum to 10.632; the rounded constants give 10.62.
        let exact = 3.0 * 2.0 + 3f64.log2() + treasure_bits() + 0.0 + 3f64.log2();
        assert!((total(1, "MMMETRB") - exact).abs() < 1e-12);
        assert!((total(1, "MMMETRB") - 10.62).abs() < 0.015);
        assert!((total(1, "MMMM") - 9.265).abs() < 0.01);
    }

    #[test]
    fn rejects_disconnected_path() {
        let map = diamond(1, Monster, Shop, Elite);
        let err = EntropyModel::bundled().path_entropy(&map, &[NodeId(1), NodeId(2)]);
        assert!(matches!(err, Err(Error::InvalidPath(_))));
        assert!(EntropyModel::bundled().path_entropy(&map, &[]).is_err());
        assert!(EntropyModel::bundled().path_entropy(&map, &[NodeId(99)]).is_err());
    }

    #[test]
    fn singleton_bounds() {
        let map = chain(2, &[Monster, Unknown, Rest]);
        let set = all_paths(&map, [NodeId(0)], [map.boss().id]);
        let b = EntropyModel::bundled().entropy_bounds(&map, &set).unwrap();
        assert_eq!(b.min, b.max);
        let played = EntropyModel::bundled().path_entropy(&map, &set.paths[0]).unwrap();
        assert_eq!(b.min, played.total);
    }

    #[test]
    fn two_path_bounds() {
        // Shop→Rest→Boss vs Monster→Elite→Boss, both act 1 (boss floor 3).
        let map = ActMap::new(
            1,
            [(1, 0, Shop), (1, 2, Monster), (2, 0, Rest), (2, 2, Rest), (3, 1, Boss)],
            [((1, 0), (2, 0)), ((1, 2), (2, 2)), ((2, 0), (3, 1)), ((2, 2), (3, 1))],
        )
        .unwrap();
        // {[$, R, B], [M, R, B]}: the rest-before-boss rule replaces the second
        // path's elite with a rest site, so max = 2 + 0 + 1.58.
        let model = EntropyModel::bundled();
        let b = model.choice_bounds(&map, &ChoiceSet::full(&map)).unwrap();
        assert!((b.min - 1.58).abs() < 0.01);
        assert!((b.max - 3.58).abs() < 0.01);
        assert_eq!(map.node(b.max_path[0]).room_type, Monster);

        let elite_map = ActMap::new(
            1,
            [
                (1, 0, Shop),
                (1, 2, Monster),
                (2, 0, Rest),
                (2, 2, Elite),
                (3, 0, Rest),
                (3, 2, Rest),
                (4, 1, Boss),
            ],
            [
                ((1, 0), (2, 0)),
                ((1, 2), (2, 2)),
                ((2, 0), (3, 0)),
                ((2, 2), (3, 2)),
                ((3, 0), (4, 1)),
                ((3, 2), (4, 1)),
            ],
        )
        .unwrap();
        let b = model.choice_bounds(&elite_map, &ChoiceSet::full(&elite_map)).unwrap();
        assert!((b.min - 1.58).abs() < 0.01);
        assert!((b.max - 5.16).abs() < 0.01);
    }

    #[test]
    fn dp_bounds_match_materialized_bounds() {
        let map = diamond(3, Unknown, Monster, Elite);
        let model = EntropyModel::bundled();
        for choice in [
            ChoiceSet::full(&map),
            ChoiceSet::prefix(&map, 2),
            ChoiceSet::prefix(&map, 1),
        ] {
            let dp = model.choice_bounds(&map, &choice).unwrap();
            let brute = model.entropy_bounds(&map, &materialize(&map, choice)).unwrap();
            assert_eq!(dp.min, brute.min);
            assert_eq!(dp.max, brute.max);
        }
    }

    #[test]
    fn empty_choice_set() {
        let map = diamond(1, Monster, Shop, Elite);
        let model = EntropyModel::bundled();
        let none = ChoiceSet::new([NodeId(1)], [NodeId(2)]);
        assert!(matches!(model.choice_bounds(&map, &none), Err(Error::EmptyChoiceSet)));
        assert!(matches!(
            model.entropy_bounds(&map, &PathSet::default()),
            Err(Error::EmptyChoiceSet)
        ));
    }

    #[test]
    fn normalize_boundaries() {
        assert_eq!(normalize(1.0, 1.0, 3.0).unwrap(), 0.0);
        assert_eq!(normalize(3.0, 1.0, 3.0).unwrap(), 1.0);
        assert_eq!(normalize(2.0, 1.0, 3.0).unwrap(), 0.5);
        assert_eq!(normalize(2.0, 2.0, 2.0).unwrap(), 0.0);
        assert!(matches!(normalize(3.5, 1.0, 3.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn per_step_division() {
        assert_eq!(per_step(1.0, 16).unwrap(), 0.0625);
        assert_eq!(per_step(0.0, 7).unwrap(), 0.0);
        assert!((per_step(0.5, 10).unwrap() - 0.05).abs() < 1e-15);
        assert!(matches!(per_step(0.5, 0), Err(Error::ZeroLength)));
    }

    #[test]
    fn degenerate_report() {
        let map = chain(1, &[Monster, Rest]);
        let trace = crate::ingest::resolve_act(&map, &parse_symbols("MRB").unwrap(), Default::default()).unwrap();
        let r = EntropyModel::bundled().report(&map, &trace, EndSetMode::Wide).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.normalized, 0.0);
        assert_eq!(r.path_length, 3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn normalize_is_affine_invariant(
                lo in -50.0f64..50.0, width in 0.01f64..50.0, t in 0.0f64..=1.0,
                a in 0.1f64..10.0, b in -20.0f64..20.0,
            ) {
                let hi = lo + width;
                let x = lo + t * width;
                let base = normalize(x, lo, hi).unwrap();
                let moved = normalize(a * x + b, a * lo + b, a * hi + b).unwrap();
                prop_assert!((base - moved).abs() < 1e-9);
            }

            #[test]
            fn room_order_only_matters_through_counts(
                rooms in prop::collection::vec(prop::sample::select(vec![Monster, Elite, Unknown, Shop, Treasure, Rest]), 1..15),
                act in 1u8..=3,
                seed in any::<u64>(),
            ) {
                use rand::seq::SliceRandom;
                use rand::SeedableRng;
                let model = EntropyModel::bundled();
                let mut shuffled = rooms.clone();
                shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                let a: f64 = model.score_rooms(act, &rooms).iter().sum();
                let b: f64 = model.score_rooms(act, &shuffled).iter().sum();
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
