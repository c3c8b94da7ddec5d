//! Map documents and run-to-map resolution.

mod document;
mod oracle;
mod resolve;

pub use document::{load_map, parse_map, ActDocument, EdgeDocument, MapDocument, NodeDocument, SeedMaps};
pub use oracle::convert_oracle;
pub use resolve::{resolve_act, resolve_path, resolve_path_with, split_acts, AmbiguityPolicy};
