//! Location entropies, path entropy and its normalization against the
//! alternatives a map offered.
//!
//! All entropies are in bits. Visit counters and the Unknown-room chain are
//! per act: every act starts from zero visits.

mod chain;
mod model;
mod score;
mod table;

pub use chain::{unknown_step_entropy, UnknownChain};
pub use model::{ChainTables, EntropyModel, MonsterTables, TableFile, VisitCounters};
pub use score::{normalize, per_step, Bounds, EntropyReport, PathEntropy, DEGENERATE_EPSILON, RANGE_TOLERANCE};
pub use table::{shannon_bits, table_entropy, EncounterTable, SUM_TOLERANCE};
