mod common;

use std::collections::BTreeSet;

use common::{coords, doc_act, random_params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spire_entropy::entropy::EntropyModel;
use spire_entropy::paths::{count_paths, materialize, ChoiceSet};
use spire_entropy::synth::generate_map;

#[test]
fn enumeration_matches_brute_force_on_prefixes() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbee);
    let mut checked = 0;
    while checked < 40 {
        let params = random_params(&mut rng);
        let maps = generate_map(rng.gen(), &params).unwrap();
        let act = rng.gen_range(1..=3);
        let map = &maps.acts[act as usize - 1];
        let doc = doc_act(&maps, act);
        let floor = rng.gen_range(1..=map.boss_floor());
        let ends: BTreeSet<_> = doc.rooms.keys().filter(|c| c.0 == floor).copied().collect();
        let expected = doc.brute_paths(&ends);
        if expected.len() > 5_000 {
            continue;
        }
        let got = materialize(map, ChoiceSet::prefix(map, floor));
        let got: Vec<_> = got.iter().map(|p| coords(map, p)).collect();
        assert_eq!(got, expected, "floor {floor} of {params:?}");
        checked += 1;
    }
}

#[test]
fn counts_match_dp() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
    for _ in 0..60 {
        let params = random_params(&mut rng);
        let maps = generate_map(rng.gen(), &params).unwrap();
        for act in 1..=3 {
            let map = &maps.acts[act as usize - 1];
            assert_eq!(count_paths(map, &ChoiceSet::full(map)), doc_act(&maps, act).dp_count());
        }
    }
}

#[test]
fn profile_bounds_match_exhaustive_scoring() {
    let model = EntropyModel::bundled();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    while checked < 60 {
        let params = random_params(&mut rng);
        let maps = generate_map(rng.gen(), &params).unwrap();
        let map = &maps.acts[rng.gen_range(0..3)];
        let choice = if rng.gen_bool(0.5) {
            ChoiceSet::full(map)
        } else {
            ChoiceSet::prefix(map, rng.gen_range(1..=map.boss_floor()))
        };
        if count_paths(map, &choice) > 3_000 {
            continue;
        }
        let set = materialize(map, choice.clone());
        let totals: Vec<f64> = set.iter().map(|p| model.path_entropy(map, p).unwrap().total).collect();
        let min = totals.iter().copied().fold(f64::INFINITY, f64::min);
        let max = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let dp = model.choice_bounds(map, &choice).unwrap();
        assert_eq!((dp.min, dp.max), (min, max));
        assert_eq!(model.path_entropy(map, &dp.min_path).unwrap().total, min);
        assert_eq!(model.path_entropy(map, &dp.max_path).unwrap().total, max);
        checked += 1;
    }
}
