use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::chain::UnknownChain;
use super::table::{table_entropy, EncounterTable};
use crate::error::{Error, Result};
use crate::model::{RoomType, ACT_COUNT, MAX_FLOOR};

const BUNDLED_TABLES: &str = include_str!("../../data/encounter_tables.json");

/// On-disk layout of the probability tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableFile {
    pub version: u32,
    pub monsters: Vec<MonsterTables>,
    pub elite_first: EncounterTable,
    pub elite_rest: EncounterTable,
    pub boss: EncounterTable,
    pub treasure: EncounterTable,
    pub shop: EncounterTable,
    pub rest_site: EncounterTable,
    pub unknown: ChainTables,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonsterTables {
    pub act: u8,
    /// Monster rooms that draw from `first` before switching to `rest`.
    pub first_visits: u32,
    pub first: EncounterTable,
    pub rest: EncounterTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTables {
    pub states: Vec<String>,
    pub initial: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct MonsterTier {
    first_visits: u32,
    first: f64,
    rest: f64,
}

/// Rooms visited so far in the current act, for the room kinds whose
/// entropy depends on visit order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VisitCounters {
    pub monster: u32,
    pub elite: u32,
    pub unknown: u32,
}

impl VisitCounters {
    pub fn record(&mut self, room: RoomType) {
        match room {
            RoomType::Monster => self.monster += 1,
            RoomType::Elite => self.elite += 1,
            RoomType::Unknown => self.unknown += 1,
            _ => {}
        }
    }
}

/// Location entropies derived from a [`TableFile`].
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyModel {
    tables: TableFile,
    monsters: [MonsterTier; ACT_COUNT as usize],
    elite_first: f64,
    elite_rest: f64,
    boss: f64,
    treasure: f64,
    shop: f64,
    rest: f64,
    chain: UnknownChain,
    /// `unknown_steps[k - 1]` is the entropy of the k-th Unknown room in an act.
    unknown_steps: Vec<f64>,
}

impl EntropyModel {
    /// The tables shipped with the crate.
    pub fn bundled() -> &'static EntropyModel {
        static MODEL: OnceLock<EntropyModel> = OnceLock::new();
        MODEL.get_or_init(|| EntropyModel::from_json(BUNDLED_TABLES).expect("bundled encounter tables are valid"))
    }

    pub fn bundled_json() -> &'static str {
        BUNDLED_TABLES
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let tables: TableFile = serde_json::from_str(text).map_err(|e| Error::InvalidTable {
            name: "table file".into(),
            reason: e.to_string(),
        })?;
        Self::from_tables(tables)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_tables(tables: TableFile) -> Result<Self> {
        let mut monsters = [None; ACT_COUNT as usize];
        for m in &tables.monsters {
            let slot = monsters
                .get_mut((m.act as usize).wrapping_sub(1))
                .ok_or_else(|| Error::InvalidTable {
                    name: "monsters".into(),
                    reason: format!("act {} outside 1..={ACT_COUNT}", m.act),
                })?;
            *slot = Some(MonsterTier {
                first_visits: m.first_visits,
                first: table_entropy(&m.first)?,
                rest: table_entropy(&m.rest)?,
            });
        }
        let monsters = monsters.map(|m| {
            m.ok_or_else(|| Error::InvalidTable {
                name: "monsters".into(),
                reason: "every act needs monster tables".into(),
            })
        });
        let [m1, m2, m3] = monsters;
        let monsters = [m1?, m2?, m3?];

        let chain = UnknownChain::new(
            tables.unknown.states.clone(),
            tables.unknown.initial.clone(),
            tables.unknown.transition.clone(),
        )?;
        let mut unknown_steps = Vec::with_capacity(MAX_FLOOR as usize);
        let mut state = chain.clone();
        for _ in 0..MAX_FLOOR {
            let (bits, next) = state.step();
            unknown_steps.push(bits);
            state = next;
        }

        Ok(EntropyModel {
            monsters,
            elite_first: table_entropy(&tables.elite_first)?,
            elite_rest: table_entropy(&tables.elite_rest)?,
            boss: table_entropy(&tables.boss)?,
            treasure: table_entropy(&tables.treasure)?,
            shop: table_entropy(&tables.shop)?,
            rest: table_entropy(&tables.rest_site)?,
            chain,
            unknown_steps,
            tables,
        })
    }

    pub fn tables(&self) -> &TableFile {
        &self.tables
    }

    /// A fresh Unknown-room chain for the start of an act.
    pub fn unknown_chain(&self) -> UnknownChain {
        self.chain.clone()
    }

    /// Entropy of the k-th Unknown room of an act (`k >= 1`).
    pub fn unknown_step(&self, k: u32) -> f64 {
        match self.unknown_steps.get(k.saturating_sub(1) as usize) {
            Some(&bits) => bits,
            None => {
                let mut state = self.chain.clone();
                let mut bits = 0.0;
                for _ in 0..k {
                    (bits, state) = state.step();
                }
                bits
            }
        }
    }

    pub(crate) fn monster_first_visits(&self, act: u8) -> u32 {
        self.tier(act).first_visits
    }

    fn tier(&self, act: u8) -> &MonsterTier {
        let idx = (act.clamp(1, ACT_COUNT) - 1) as usize;
        &self.monsters[idx]
    }

    /// Entropy of entering `room` in `act`, given the rooms already visited
    /// this act.
    pub fn location_entropy(&self, room: RoomType, act: u8, counters: &VisitCounters) -> f64 {
        match room {
            RoomType::Monster => {
                let tier = self.tier(act);
                if counters.monster < tier.first_visits {
                    tier.first
                } else {
                    tier.rest
                }
            }
            RoomType::Elite => {
                if counters.elite == 0 {
                    self.elite_first
                } else {
                    self.elite_rest
                }
            }
            RoomType::Unknown => self.unknown_step(counters.unknown + 1),
            RoomType::Boss => self.boss,
            RoomType::Treasure => self.treasure,
            RoomType::Shop => self.shop,
            RoomType::Rest => self.rest,
        }
    }
}
