//! Crate-wide error type.

use std::fmt;

/// Errors reported by index construction, queries, and the on-disk format.
#[derive(Debug)]
pub enum Error {
    /// Pattern text could not be parsed; `offset` is the 1-based byte
    /// position in the pattern string where the problem was detected.
    Parse { offset: usize, reason: String },
    /// A structurally invalid pattern (e.g. a gap with `a > b`, or a
    /// pattern with no literal symbols at all).
    Pattern(String),
    /// `build_trie` was handed an empty string set.
    EmptyStringSet,
    /// `build_trie` was handed a zero-length string.
    EmptyString { label: usize },
    /// The string set is not prefix-free: one stored string is a proper
    /// prefix of another, so it cannot be represented by leaf vertices.
    NotPrefixFree { label: usize },
    /// A decomposition operation was asked to run on a trie containing
    /// STAR edges; decompositions are defined on plain tries only.
    StarEdge,
    /// Vertices from a different trie were passed to a structure built
    /// over another trie.
    TrieMismatch,
    /// A vertex or location id is out of range for the trie.
    InvalidVertex { vertex: usize },
    /// An LCP query named a trie id that was never registered.
    NotRegistered { trie: usize },
    /// `register_trie` found a stored string that is not a substring of
    /// the indexed text.
    NotSubstring { label: usize },
    /// The pattern's gap budget exceeds what the index was built for:
    /// `a` is the pattern's total mandatory gap length, `opt` its total
    /// optional slack, versus the index budgets `k` and `o`.
    Budget { a: usize, opt: usize, k: usize, o: usize },
    /// Wildcard-tree construction exceeded its stored-string guard.
    Guard { stored: u64, guard: u64 },
    /// The oracle refused to enumerate a gap-length product this large.
    OracleCap { product: u64, cap: u64 },
    /// `beta` outside the permitted `[1, sigma)` range for this text.
    BetaRange { beta: usize, sigma: usize },
    /// A query was forced onto the special index although the pattern's
    /// maximal span exceeds the index window `g`.
    SpecialWindow { needed: usize, g: u64 },
    /// Invalid parameter combination.
    Param(String),
    /// The index file is malformed or carries an unknown format version.
    Format(String),
    /// Underlying I/O failure.
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse { offset, reason } => {
                write!(f, "pattern parse error at offset {offset}: {reason}")
            }
            Error::Pattern(reason) => write!(f, "invalid pattern: {reason}"),
            Error::EmptyStringSet => write!(f, "cannot build a trie over an empty string set"),
            Error::EmptyString { label } => {
                write!(f, "zero-length string (label {label}) in trie input")
            }
            Error::NotPrefixFree { label } => write!(
                f,
                "string set is not prefix-free: string labeled {label} is a proper prefix of another"
            ),
            Error::StarEdge => write!(f, "operation is defined on plain tries, found a STAR edge"),
            Error::TrieMismatch => write!(f, "vertex belongs to a different trie"),
            Error::InvalidVertex { vertex } => write!(f, "vertex id {vertex} out of range"),
            Error::NotRegistered { trie } => write!(f, "trie {trie} is not registered"),
            Error::NotSubstring { label } => write!(
                f,
                "stored string (label {label}) is not a substring of the indexed text"
            ),
            Error::Budget { a, opt, k, o } => write!(
                f,
                "pattern gap budget exceeded: total mandatory gap length {a} (budget k={k}), \
                 optional slack {opt} (budget o={o})"
            ),
            Error::Guard { stored, guard } => write!(
                f,
                "wildcard tree construction exceeded its guard: {stored} stored strings > {guard}"
            ),
            Error::OracleCap { product, cap } => write!(
                f,
                "oracle refused: gap-length combination count {product} exceeds cap {cap}"
            ),
            Error::BetaRange { beta, sigma } => write!(
                f,
                "beta={beta} outside the permitted range [1, {sigma}) for this text"
            ),
            Error::SpecialWindow { needed, g } => write!(
                f,
                "pattern needs a window of {needed} symbols but the special index covers {g}"
            ),
            Error::Param(reason) => write!(f, "invalid parameter: {reason}"),
            Error::Format(reason) => write!(f, "index format error: {reason}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
