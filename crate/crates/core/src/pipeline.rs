//! Corpus filtering, per-run scoring and corpus-wide analysis.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::entropy::{EntropyModel, EntropyReport};
use crate::error::{Error, Result};
use crate::ingest::{convert_oracle, parse_map, resolve_path_with, AmbiguityPolicy, SeedMaps};
use crate::model::{RoomType, RunRecord};
use crate::paths::EndSetMode;

/// Position of a run in the input corpus (0-based, counting every record).
pub type RunId = u64;

/// Fixed run settings a record must match to enter the analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFilter {
    pub is_ascension_mode: bool,
    pub is_trial: bool,
    pub is_daily: bool,
    pub chose_seed: bool,
    pub is_beta: bool,
    pub is_endless: bool,
    pub character: String,
}

impl Default for CorpusFilter {
    fn default() -> Self {
        CorpusFilter {
            is_ascension_mode: true,
            is_trial: false,
            is_daily: false,
            chose_seed: false,
            is_beta: false,
            is_endless: false,
            character: "IRONCLAD".into(),
        }
    }
}

/// Uppercase alphanumerics only, so "Iron Clad" and "IRONCLAD" compare equal.
pub fn normalize_character(name: &str) -> String {
    name.chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_uppercase())
        .collect()
}

/// Rejection counts. Each rejected record is charged to the first predicate
/// it fails, in field order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct FilterStats {
    pub input: usize,
    pub passed: usize,
    /// Empty path or ascension level outside 0..=20.
    pub malformed: usize,
    pub ascension_mode: usize,
    pub trial: usize,
    pub daily: usize,
    pub chose_seed: usize,
    pub beta: usize,
    pub endless: usize,
    pub character: usize,
}

impl FilterStats {
    pub fn rejected(&self) -> usize {
        self.malformed
            + self.ascension_mode
            + self.trial
            + self.daily
            + self.chose_seed
            + self.beta
            + self.endless
            + self.character
    }
}

impl CorpusFilter {
    /// The counter of the first failing predicate, or `None` if the record passes.
    fn reject<'a>(&self, run: &RunRecord, stats: &'a mut FilterStats) -> Option<&'a mut usize> {
        let f = &run.mode_flags;
        if run.validate().is_err() {
            Some(&mut stats.malformed)
        } else if f.is_ascension_mode != self.is_ascension_mode {
            Some(&mut stats.ascension_mode)
        } else if f.is_trial != self.is_trial {
            Some(&mut stats.trial)
        } else if f.is_daily != self.is_daily {
            Some(&mut stats.daily)
        } else if f.chose_seed != self.chose_seed {
            Some(&mut stats.chose_seed)
        } else if f.is_beta != self.is_beta {
            Some(&mut stats.beta)
        } else if f.is_endless != self.is_endless {
            Some(&mut stats.endless)
        } else if normalize_character(&run.character) != normalize_character(&self.character) {
            Some(&mut stats.character)
        } else {
            None
        }
    }

    pub fn accepts(&self, run: &RunRecord) -> bool {
        self.reject(run, &mut FilterStats::default()).is_none()
    }
}

/// Keeps the records that satisfy `filter`, tagged with their input position.
pub fn filter_runs(
    records: impl IntoIterator<Item = RunRecord>,
    filter: &CorpusFilter,
) -> (Vec<(RunId, RunRecord)>, FilterStats) {
    let mut stats = FilterStats::default();
    let mut passed = Vec::new();
    for (i, run) in records.into_iter().enumerate() {
        stats.input += 1;
        match filter.reject(&run, &mut stats) {
            Some(counter) => *counter += 1,
            None => {
                stats.passed += 1;
                passed.push((i as RunId, run));
            }
        }
    }
    (passed, stats)
}

/// Layout of a run corpus file. Both are one JSON value per line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunFormat {
    /// Records in the canonical schema ([`RunRecord`]).
    #[default]
    Canonical,
    /// Public run-history dumps: each record is `{"event": {...}}` (or a
    /// bare event), a line may hold an array of them, `path_per_floor` may
    /// contain nulls, seeds may be numeric and absent flags count as false.
    Dataset,
}

/// Reads every record of a corpus. Blank lines are skipped; errors carry the
/// 1-based line number.
pub fn read_runs(reader: impl BufRead, format: RunFormat) -> Result<Vec<RunRecord>> {
    let mut runs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::Parse { line: lineno, reason };
        match format {
            RunFormat::Canonical => runs.push(serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?),
            RunFormat::Dataset => {
                let value: Value = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
                let events = match value {
                    Value::Array(items) => items,
                    single => vec![single],
                };
                for event in events {
                    runs.push(adapt_event(event).map_err(parse_err)?);
                }
            }
        }
    }
    Ok(runs)
}

pub fn load_runs(path: &Path, format: RunFormat) -> Result<Vec<RunRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_runs(std::io::BufReader::new(file), format)
}

fn adapt_event(value: Value) -> std::result::Result<RunRecord, String> {
    let mut event = match value {
        Value::Object(mut outer) if outer.contains_key("event") => outer.remove("event").unwrap(),
        other => other,
    };
    let obj = event.as_object_mut().ok_or("record is not an object")?;
    let flag = |key: &str| obj.get(key).and_then(Value::as_bool).unwrap_or(false);
    let seed = match obj.get("seed_played") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => return Err("missing seed_played".into()),
    };
    let path = obj
        .get("path_per_floor")
        .and_then(Value::as_array)
        .ok_or("missing path_per_floor")?
        .iter()
        .filter_map(Value::as_str)
        .map(|s| RoomType::from_str_symbol(s).map_err(|e| e.to_string()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let ascension = obj.get("ascension_level").and_then(Value::as_u64).unwrap_or(0);
    Ok(RunRecord {
        victory: flag("victory"),
        ascension: u8::try_from(ascension).map_err(|_| format!("ascension level {ascension}"))?,
        seed,
        path_symbols: path,
        mode_flags: crate::model::ModeFlags {
            is_ascension_mode: flag("is_ascension_mode"),
            is_trial: flag("is_trial"),
            is_daily: flag("is_daily"),
            chose_seed: flag("chose_seed"),
            is_beta: flag("is_beta"),
            is_endless: flag("is_endless"),
        },
        character: obj
            .get("character_chosen")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string(),
    })
}

/// Why a filtered run produced no reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardReason {
    PathMismatch,
    MissingMap,
    SeedMismatch,
    InvalidMap,
    AmbiguousPath,
}

impl DiscardReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DiscardReason::PathMismatch => "path_mismatch",
            DiscardReason::MissingMap => "missing_map",
            DiscardReason::SeedMismatch => "seed_mismatch",
            DiscardReason::InvalidMap => "invalid_map",
            DiscardReason::AmbiguousPath => "ambiguous_path",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunAnalysis {
    pub run_id: RunId,
    pub seed: String,
    pub victory: bool,
    pub ascension: u8,
    /// One report per act entered, in act order.
    pub per_act: Vec<EntropyReport>,
    /// Mean normalized entropy over the non-degenerate acts entered.
    pub avg_normalized: Option<f64>,
    /// Mean per-step entropy over the same acts.
    pub avg_per_step: Option<f64>,
    pub discarded: Option<DiscardReason>,
    /// Some act's logged rooms fit more than one node sequence.
    pub ambiguous: bool,
}

impl RunAnalysis {
    pub fn act(&self, act: u8) -> Option<&EntropyReport> {
        self.per_act.iter().find(|r| r.act == act)
    }

    fn discarded(run_id: RunId, run: &RunRecord, reason: DiscardReason) -> Self {
        RunAnalysis {
            run_id,
            seed: run.seed.clone(),
            victory: run.victory,
            ascension: run.ascension,
            per_act: Vec::new(),
            avg_normalized: None,
            avg_per_step: None,
            discarded: Some(reason),
            ambiguous: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub end_set: EndSetMode,
    #[serde(skip)]
    pub ambiguity: AmbiguityPolicy,
}

/// Scores every act `run` entered on `maps`.
///
/// Logs that do not fit the maps yield a discarded row rather than an error.
pub fn analyze_run(
    model: &EntropyModel,
    maps: &SeedMaps,
    run_id: RunId,
    run: &RunRecord,
    config: AnalysisConfig,
) -> Result<RunAnalysis> {
    if maps.seed != run.seed {
        return Err(Error::SeedMismatch {
            map_seed: maps.seed.clone(),
            run_seed: run.seed.clone(),
        });
    }
    let traces = match resolve_path_with(&maps.acts, run, config.ambiguity) {
        Ok(t) => t,
        Err(Error::AmbiguousPath { .. }) => {
            return Ok(RunAnalysis::discarded(run_id, run, DiscardReason::AmbiguousPath))
        }
        Err(Error::PathMismatch { .. } | Error::EmptyPath) => {
            return Ok(RunAnalysis::discarded(run_id, run, DiscardReason::PathMismatch))
        }
        Err(e) => return Err(e),
    };
    let per_act = traces
        .iter()
        .map(|trace| {
            let map = maps.act(trace.act).expect("resolved acts have maps");
            model.report(map, trace, config.end_set)
        })
        .collect::<Result<Vec<_>>>()?;
    let informative: Vec<&EntropyReport> = per_act.iter().filter(|r| !r.degenerate).collect();
    let mean = |f: fn(&EntropyReport) -> f64| {
        (!informative.is_empty()).then(|| informative.iter().map(|r| f(r)).sum::<f64>() / informative.len() as f64)
    };
    Ok(RunAnalysis {
        run_id,
        seed: run.seed.clone(),
        victory: run.victory,
        ascension: run.ascension,
        avg_normalized: mean(|r| r.normalized),
        avg_per_step: mean(|r| r.per_step),
        ambiguous: traces.iter().any(|t| t.ambiguous),
        per_act,
        discarded: None,
    })
}

/// Source of map documents, keyed by seed.
pub trait MapStore: Sync {
    /// `Ok(None)` when no maps exist for `seed`; `Err` when they exist but
    /// cannot be read or validated.
    fn lookup(&self, seed: &str) -> Result<Option<Arc<SeedMaps>>>;
}

#[derive(Debug, Clone, Default)]
pub struct MemoryStore {
    maps: BTreeMap<String, Arc<SeedMaps>>,
}

impl MemoryStore {
    pub fn new(maps: impl IntoIterator<Item = SeedMaps>) -> Self {
        MemoryStore {
            maps: maps.into_iter().map(|m| (m.seed.clone(), Arc::new(m))).collect(),
        }
    }

    pub fn insert(&mut self, maps: SeedMaps) {
        self.maps.insert(maps.seed.clone(), Arc::new(maps));
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
}

impl MapStore for MemoryStore {
    fn lookup(&self, seed: &str) -> Result<Option<Arc<SeedMaps>>> {
        Ok(self.maps.get(seed).cloned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapFormat {
    /// Native documents, or oracle dumps recognized by their row-list acts.
    #[default]
    Auto,
    Native,
    Oracle,
}

/// Parses a map file's text in the given format.
pub fn parse_map_as(text: &str, format: MapFormat) -> Result<SeedMaps> {
    let oracle = match format {
        MapFormat::Native => false,
        MapFormat::Oracle => true,
        MapFormat::Auto => serde_json::from_str::<Value>(text)
            .map_err(|e| Error::MalformedDocument(e.to_string()))?
            .get("acts")
            .and_then(|acts| acts.get(0))
            .is_some_and(Value::is_array),
    };
    if oracle {
        convert_oracle(text)?.into_maps()
    } else {
        parse_map(text)
    }
}

/// Directory of `<seed>.json` map files, read on demand.
#[derive(Debug, Clone)]
pub struct DirectoryStore {
    root: PathBuf,
    format: MapFormat,
}

impl DirectoryStore {
    pub fn new(root: impl Into<PathBuf>, format: MapFormat) -> Self {
        DirectoryStore {
            root: root.into(),
            format,
        }
    }

    pub fn path_for(&self, seed: &str) -> Option<PathBuf> {
        let safe = !seed.is_empty() && seed.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        safe.then(|| self.root.join(format!("{seed}.json")))
    }
}

impl MapStore for DirectoryStore {
    fn lookup(&self, seed: &str) -> Result<Option<Arc<SeedMaps>>> {
        let Some(path) = self.path_for(seed) else {
            return Ok(None);
        };
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(path, e)),
        };
        parse_map_as(&text, self.format).map(|m| Some(Arc::new(m)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct DiscardCounts {
    pub path_mismatch: usize,
    pub missing_map: usize,
    pub seed_mismatch: usize,
    pub invalid_map: usize,
    pub ambiguous_path: usize,
}

impl DiscardCounts {
    pub fn total(&self) -> usize {
        self.path_mismatch + self.missing_map + self.seed_mismatch + self.invalid_map + self.ambiguous_path
    }

    fn add(&mut self, reason: DiscardReason) {
        *match reason {
            DiscardReason::PathMismatch => &mut self.path_mismatch,
            DiscardReason::MissingMap => &mut self.missing_map,
            DiscardReason::SeedMismatch => &mut self.seed_mismatch,
            DiscardReason::InvalidMap => &mut self.invalid_map,
            DiscardReason::AmbiguousPath => &mut self.ambiguous_path,
        } += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusAnalysis {
    /// One row per input run, in input order; discarded runs included.
    pub rows: Vec<RunAnalysis>,
    pub discards: DiscardCounts,
}

impl CorpusAnalysis {
    pub fn analyzed(&self) -> usize {
        self.rows.len() - self.discards.total()
    }
}

/// Analyzes `runs` in parallel. Output order follows input order.
pub fn analyze_corpus(
    model: &EntropyModel,
    runs: &[(RunId, RunRecord)],
    store: &dyn MapStore,
    config: AnalysisConfig,
) -> Result<CorpusAnalysis> {
    let rows = runs
        .par_iter()
        .map(|(id, run)| {
            let maps = match store.lookup(&run.seed) {
                Ok(Some(m)) => m,
                Ok(None) => return Ok(RunAnalysis::discarded(*id, run, DiscardReason::MissingMap)),
                Err(_) => return Ok(RunAnalysis::discarded(*id, run, DiscardReason::InvalidMap)),
            };
            match analyze_run(model, &maps, *id, run, config) {
                Err(Error::SeedMismatch { .. }) => Ok(RunAnalysis::discarded(*id, run, DiscardReason::SeedMismatch)),
                other => other,
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut discards = DiscardCounts::default();
    for reason in rows.iter().filter_map(|r| r.discarded) {
        discards.add(reason);
    }
    Ok(CorpusAnalysis { rows, discards })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::chain;
    use crate::model::{parse_symbols, ModeFlags};
    use RoomType::*;

    fn record(symbols: &str, victory: bool) -> RunRecord {
        RunRecord {
            victory,
            ascension: 12,
            seed: "7".into(),
            path_symbols: parse_symbols(symbols).unwrap(),
            mode_flags: ModeFlags {
                is_ascension_mode: true,
                ..ModeFlags::default()
            },
            character: "IRONCLAD".into(),
        }
    }

    fn chain_maps() -> SeedMaps {
        SeedMaps {
            seed: "7".into(),
            acts: vec![
                chain(1, &[Monster, Elite, Rest]),
                chain(2, &[Unknown, Rest]),
                chain(3, &[Treasure, Rest]),
            ],
        }
    }

    #[test]
    fn filter_counts_first_failure() {
        let mut runs = Vec::new();
        let ok = record("M", true);
        runs.push(ok.clone());
        runs.push(RunRecord {
            character: "Iron clad".into(),
            ..ok.clone()
        });
        let mut trial = ok.clone();
        trial.mode_flags.is_trial = true;
        trial.mode_flags.is_daily = true;
        runs.push(trial);
        let mut silent = ok.clone();
        silent.character = "THE_SILENT".into();
        runs.push(silent);
        let mut casual = ok.clone();
        casual.mode_flags.is_ascension_mode = false;
        runs.push(casual);
        runs.push(RunRecord {
            path_symbols: vec![],
            ..ok.clone()
        });

        let (passed, stats) = filter_runs(runs, &CorpusFilter::default());
        assert_eq!(passed.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(stats.trial, 1);
        assert_eq!(stats.daily, 0);
        assert_eq!(stats.character, 1);
        assert_eq!(stats.ascension_mode, 1);
        assert_eq!(stats.malformed, 1);
        assert_eq!(stats.input, stats.passed + stats.rejected());
    }

    #[test]
    fn chain_victory_is_degenerate() {
        let run = record("MERB?RBTRB", true);
        let row = analyze_run(
            EntropyModel::bundled(),
            &chain_maps(),
            0,
            &run,
            AnalysisConfig::default(),
        )
        .unwrap();
        assert_eq!(row.per_act.len(), 3);
        assert!(row.per_act.iter().all(|r| r.degenerate && r.normalized == 0.0));
        assert_eq!(row.avg_normalized, None);
        assert_eq!(row.discarded, None);
    }

    #[test]
    fn floor_one_defeat() {
        let run = record("M", false);
        let row = analyze_run(
            EntropyModel::bundled(),
            &chain_maps(),
            0,
            &run,
            AnalysisConfig::default(),
        )
        .unwrap();
        assert_eq!(row.per_act.len(), 1);
        assert_eq!(row.per_act[0].path_length, 1);
        assert!(!row.per_act[0].complete);
    }

    #[test]
    fn seed_mismatch_is_an_error() {
        let mut run = record("M", false);
        run.seed = "8".into();
        assert!(matches!(
            analyze_run(
                EntropyModel::bundled(),
                &chain_maps(),
                0,
                &run,
                AnalysisConfig::default()
            ),
            Err(Error::SeedMismatch { .. })
        ));
    }

    #[test]
    fn corpus_discards_are_soft() {
        let store = MemoryStore::new([chain_maps()]);
        let mut missing = record("M", true);
        missing.seed = "nope".into();
        let runs = vec![(0, record("MERB", true)), (1, record("MMRB", false)), (2, missing)];
        let out = analyze_corpus(EntropyModel::bundled(), &runs, &store, AnalysisConfig::default()).unwrap();
        assert_eq!(out.rows.len(), 3);
        assert_eq!(out.rows[1].discarded, Some(DiscardReason::PathMismatch));
        assert_eq!(out.rows[2].discarded, Some(DiscardReason::MissingMap));
        assert!(out.rows[1].per_act.is_empty());
        assert_eq!(out.discards.total(), 2);
        assert_eq!(out.analyzed(), 1);
    }

    #[test]
    fn dataset_adapter() {
        let text = concat!(
            r#"{"event":{"victory":false,"ascension_level":3,"seed_played":-4411,"#,
            r#""path_per_floor":["M","?",null,"B"],"is_ascension_mode":true,"character_chosen":"IRONCLAD"}}"#,
            "\n\n",
            r#"[{"seed_played":"9","path_per_floor":["M"]},{"event":{"seed_played":"10","path_per_floor":[]}}]"#,
            "\n",
        );
        let runs = read_runs(text.as_bytes(), RunFormat::Dataset).unwrap();
        assert_eq!(runs.len(), 3);
        assert_eq!(runs[0].seed, "-4411");
        assert_eq!(runs[0].path_symbols, vec![Monster, Unknown, Boss]);
        assert!(runs[0].mode_flags.is_ascension_mode && !runs[0].mode_flags.is_trial);
        assert!(!runs[1].victory);

        let err = read_runs("{}\n{\"seed_played\":1}".as_bytes(), RunFormat::Dataset).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = read_runs("\n{\"victory\":1}".as_bytes(), RunFormat::Canonical).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn directory_store_rejects_unsafe_seeds() {
        let store = DirectoryStore::new("/tmp", MapFormat::Native);
        assert!(store.path_for("../etc/passwd").is_none());
        assert!(store.path_for("").is_none());
        assert_eq!(store.path_for("-12").unwrap(), Path::new("/tmp/-12.json"));
    }
}
