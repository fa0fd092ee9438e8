//! A text index answering pattern queries with wildcards and
//! variable-length gaps.
//!
//! A pattern like `b*{0,4}cc*{3,5}d` consists of literal subpatterns
//! separated by gaps; the gap `*{a,b}` matches between `a` and `b`
//! arbitrary text symbols, and `*` alone matches exactly one. The crate
//! builds one of several index structures over a fixed text and reports
//! every occurrence of such patterns:
//!
//! - `SIMPLE`: a suffix tree searched directly, branching on wildcards.
//! - `ART_LINEAR`: a suffix tree split into a small top part and many
//!   shallow bottom parts, with subpattern matching done through
//!   constant-size longest-common-prefix queries.
//! - `TRADEOFF(beta, k)`: a tree of tries joined by STAR edges, trading
//!   space (grows with `beta` and the gap budget `k`) for query
//!   branching (at most `beta` branches per consumed wildcard).
//! - `LINEAR_TIME(k)`: a short-pattern structure over windowed suffixes
//!   plus an `ART_LINEAR` fallback, with routing on pattern length.
//!
//! Positions are 1-indexed throughout; see [`text`] for conventions.

pub mod decomposition;
pub mod error;
pub mod index;
pub mod lcp;
pub mod oracle;
pub mod serialize;
pub mod sweep;
pub mod text;
pub mod trie;
pub mod wildcard_tree;

pub use error::{Error, Result};
pub use index::{
    build_index, build_index_guarded, Index, IndexVariant, OccurrenceSet, QueryStats,
    ResolvedParams, Route,
};
pub use oracle::{oracle_match, oracle_match_capped, OracleResult, ORACLE_GAP_CAP};
pub use serialize::{load_index, load_index_from, save_index, save_index_to};
pub use text::{GapPattern, IndexedText, Occurrence, SubstringRef, Symbol, TextHandle};
pub use trie::{CompressedTrie, EdgeKind, Location, TrieStats, VertexId};
