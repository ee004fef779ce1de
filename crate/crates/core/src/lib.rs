//! Dynamic succinct ordinal trees in balanced-parentheses form.
//!
//! The parentheses string lives in a min-max B-tree whose internal nodes
//! keep small searchable partial-sums structures, so that forward and
//! backward excess searches, range minimum counts and the level-wise tree
//! queries descend the tree with constant work per level. Node degrees of
//! very high-degree nodes are stored explicitly in a separate index.
//!
//! [`DynamicTree`] is the entry point; [`OracleTree`] is a slow reference
//! implementation of the same interface.

pub mod bits;
pub mod cartesian;
pub mod fuzz;
pub mod heavy;
pub mod kernel;
pub mod minmax;
pub mod oracle;
pub mod partial_sums;
pub mod query;
pub mod script;
pub mod stats;
pub mod tree;

pub use kernel::{BitBlock, MaxFamily, MinFamily, Summary, WeightFn};
pub use minmax::{Config, MinMaxError, MinMaxTree, Probe, SpaceBreakdown};
pub use oracle::{OracleSnapshot, OracleTree, ScanOracle};
pub use partial_sums::{PartialSumsError, RangeAddArray, SearchableSignedSums, SmallNonNegSums, SmallSignedPrefixSums};
pub use query::{Answer, NodeId, Query, QUERY_NAMES};
pub use tree::{format_bp, heavy_threshold, parse_bp, DynamicTree, SpaceReport, TreeConfig, TreeError};
