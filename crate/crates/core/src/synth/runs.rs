//! Synthetic runs and corpora with a controlled path-selection policy.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{generate_map, SynthParams};
use crate::entropy::EntropyModel;
use crate::error::{Error, Result};
use crate::ingest::SeedMaps;
use crate::model::{ActMap, ModeFlags, NodeId, RunRecord, ACT_COUNT};
use crate::paths::ChoiceSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathPolicy {
    MaxEntropy,
    MinEntropy,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Victory,
    /// Died on `floor` of `act`; a death on the boss floor means the boss won.
    Defeat {
        act: u8,
        floor: u8,
    },
}

/// Where synthetic defeats end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeathModel {
    /// Uniform act, then uniform floor within it.
    Anywhere,
    /// At the last boss, so defeats walk the same maps as victories.
    FinalBoss,
}

/// Draws one path of `choice` according to `policy`.
pub fn synth_path(
    model: &EntropyModel,
    map: &ActMap,
    choice: &ChoiceSet,
    policy: PathPolicy,
    rng: &mut impl Rng,
) -> Result<Vec<NodeId>> {
    match policy {
        PathPolicy::MaxEntropy => Ok(model.choice_bounds(map, choice)?.max_path),
        PathPolicy::MinEntropy => Ok(model.choice_bounds(map, choice)?.min_path),
        PathPolicy::Uniform => sample_uniform_path(map, choice, rng),
    }
}

/// Draws a path uniformly from all paths of `choice`.
pub fn sample_uniform_path(map: &ActMap, choice: &ChoiceSet, rng: &mut impl Rng) -> Result<Vec<NodeId>> {
    // ways[n]: paths that start at n and end at some end node (stopping or continuing).
    let mut ways = vec![0f64; map.len()];
    for node in map.nodes().iter().rev() {
        let id = node.id;
        let stop = if choice.ends.contains(&id) { 1.0 } else { 0.0 };
        ways[id.index()] = stop + map.successors(id).iter().map(|s| ways[s.index()]).sum::<f64>();
    }
    let starts: Vec<NodeId> = choice
        .starts
        .iter()
        .copied()
        .filter(|s| s.index() < map.len())
        .collect();
    let mut current = pick(rng, &starts, |s| ways[s.index()]).ok_or(Error::EmptyChoiceSet)?;
    let mut path = vec![current];
    loop {
        let stop = if choice.ends.contains(&current) { 1.0 } else { 0.0 };
        if stop > 0.0 && rng.gen::<f64>() * ways[current.index()] < stop {
            return Ok(path);
        }
        current = pick(rng, map.successors(current), |s| ways[s.index()])
            .expect("a node with remaining ways has a viable successor");
        path.push(current);
    }
}

fn pick(rng: &mut impl Rng, items: &[NodeId], weight: impl Fn(NodeId) -> f64) -> Option<NodeId> {
    let total: f64 = items.iter().map(|&i| weight(i)).sum();
    if total <= 0.0 {
        return None;
    }
    let mut u = rng.gen::<f64>() * total;
    for &i in items {
        let w = weight(i);
        if u < w {
            return Some(i);
        }
        u -= w;
    }
    items.iter().rev().copied().find(|&i| weight(i) > 0.0)
}

/// Builds a run record whose logged path follows `policy(act)` in every act.
pub fn synth_run(
    model: &EntropyModel,
    maps: &SeedMaps,
    outcome: Outcome,
    ascension: u8,
    mut policy: impl FnMut(u8) -> PathPolicy,
    rng: &mut impl Rng,
) -> Result<RunRecord> {
    let last_act = match outcome {
        Outcome::Victory => ACT_COUNT,
        Outcome::Defeat { act, .. } => act,
    };
    let mut symbols = Vec::new();
    for act in 1..=last_act {
        let map = maps
            .act(act)
            .ok_or_else(|| Error::InvalidRecord(format!("no map for act {act}")))?;
        let choice = match outcome {
            Outcome::Defeat { act: a, floor } if a == act => ChoiceSet::prefix(map, floor.clamp(1, map.boss_floor())),
            _ => ChoiceSet::full(map),
        };
        let path = synth_path(model, map, &choice, policy(act), rng)?;
        symbols.extend(path.iter().map(|&id| map.node(id).room_type));
    }
    Ok(RunRecord {
        victory: outcome == Outcome::Victory,
        ascension,
        seed: maps.seed.clone(),
        path_symbols: symbols,
        mode_flags: ModeFlags {
            is_ascension_mode: true,
            ..ModeFlags::default()
        },
        character: "IRONCLAD".into(),
    })
}

/// Recipe for a synthetic corpus whose outcome groups follow different
/// path policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecipe {
    pub runs: usize,
    pub seed: u64,
    pub params: SynthParams,
    pub victory_rate: f64,
    pub victory_policy: PathPolicy,
    pub defeat_policy: PathPolicy,
    /// Chance that an act follows the group policy rather than a uniform path.
    pub fidelity: f64,
    pub death: DeathModel,
}

impl Default for CorpusRecipe {
    fn default() -> Self {
        CorpusRecipe {
            runs: 1000,
            seed: 0,
            params: SynthParams::default(),
            victory_rate: 0.5,
            victory_policy: PathPolicy::MaxEntropy,
            defeat_policy: PathPolicy::MinEntropy,
            fidelity: 1.0,
            death: DeathModel::Anywhere,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub runs: Vec<RunRecord>,
    pub maps: BTreeMap<String, SeedMaps>,
}

impl CorpusRecipe {
    pub fn build(&self, model: &EntropyModel) -> Result<SyntheticCorpus> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut runs = Vec::with_capacity(self.runs);
        let mut maps = BTreeMap::new();
        for _ in 0..self.runs {
            let map_seed: u64 = rng.gen();
            let seed_maps = generate_map(map_seed, &self.params)?;
            let victory = rng.gen_bool(self.victory_rate);
            let outcome = if victory {
                Outcome::Victory
            } else {
                match self.death {
                    DeathModel::FinalBoss => Outcome::Defeat {
                        act: ACT_COUNT,
                        floor: seed_maps.acts[ACT_COUNT as usize - 1].boss_floor(),
                    },
                    DeathModel::Anywhere => {
                        let act = rng.gen_range(1..=ACT_COUNT);
                        let top = seed_maps.acts[act as usize - 1].boss_floor();
                        Outcome::Defeat {
                            act,
                            floor: rng.gen_range(1..=top),
                        }
                    }
                }
            };
            let ascension = rng.gen_range(0..=20);
            let group = if victory {
                self.victory_policy
            } else {
                self.defeat_policy
            };
            let mut policy_rng = ChaCha8Rng::seed_from_u64(rng.gen());
            let fidelity = self.fidelity;
            let mut policy = move |_act: u8| {
                if policy_rng.gen_bool(fidelity) {
                    group
                } else {
                    PathPolicy::Uniform
                }
            };
            let run = synth_run(model, &seed_maps, outcome, ascension, &mut policy, &mut rng)?;
            maps.insert(seed_maps.seed.clone(), seed_maps);
            runs.push(run);
        }
        Ok(SyntheticCorpus { runs, maps })
    }
}

impl SyntheticCorpus {
    /// Runs as JSON lines in the canonical corpus schema.
    pub fn runs_jsonl(&self) -> String {
        let mut out = String::new();
        for run in &self.runs {
            out.push_str(&serde_json::to_string(run).expect("run serializes"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::resolve_path;
    use crate::paths::materialize;

    #[test]
    fn uniform_sampling_covers_all_paths_evenly() {
        let maps = generate_map(
            3,
            &SynthParams {
                floors_per_act: 4,
                ..SynthParams::default()
            },
        )
        .unwrap();
        let map = &maps.acts[0];
        let choice = ChoiceSet::full(map);
        let all = materialize(map, choice.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let draws = 4000 * all.len();
        let mut hits = BTreeMap::new();
        for _ in 0..draws {
            *hits
                .entry(sample_uniform_path(map, &choice, &mut rng).unwrap())
                .or_insert(0usize) += 1;
        }
        assert_eq!(hits.len(), all.len());
        for (path, n) in hits {
            assert!(all.paths.contains(&path));
            assert!((n as f64 / 4000.0 - 1.0).abs() < 0.1, "{n}");
        }
    }

    #[test]
    fn synthetic_runs_resolve_on_their_maps() {
        let model = EntropyModel::bundled();
        let corpus = CorpusRecipe {
            runs: 40,
            ..CorpusRecipe::default()
        }
        .build(model)
        .unwrap();
        for run in &corpus.runs {
            let maps = &corpus.maps[&run.seed];
            let traces = resolve_path(&maps.acts, run).unwrap();
            assert_eq!(traces.iter().map(|t| t.len()).sum::<usize>(), run.path_symbols.len());
            if run.victory {
                assert_eq!(traces.len(), 3);
                assert!(traces.iter().all(|t| t.complete));
            }
        }
    }

    #[test]
    fn policies_pick_extremes() {
        let model = EntropyModel::bundled();
        let maps = generate_map(11, &SynthParams::default()).unwrap();
        let map = &maps.acts[1];
        let choice = ChoiceSet::full(map);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let hi = synth_path(model, map, &choice, PathPolicy::MaxEntropy, &mut rng).unwrap();
        let lo = synth_path(model, map, &choice, PathPolicy::MinEntropy, &mut rng).unwrap();
        let b = model.choice_bounds(map, &choice).unwrap();
        assert_eq!(model.path_entropy(map, &hi).unwrap().total, b.max);
        assert_eq!(model.path_entropy(map, &lo).unwrap().total, b.min);
    }
}
