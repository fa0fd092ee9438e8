//! Brute-force reference matcher.
//!
//! Enumerates every start position and every combination of gap lengths,
//! comparing subpatterns symbol by symbol. Deliberately unindexed and
//! simple: the index implementations are tested against this module.

use crate::error::{Error, Result};
use crate::text::{GapPattern, IndexedText, Occurrence};
use std::collections::BTreeSet;

/// Default refusal threshold for the number of gap-length combinations
/// (`prod (b_i - a_i + 1)`) the oracle will enumerate per query.
pub const ORACLE_GAP_CAP: u64 = 4096;

/// One concrete proof of a match: a start position plus the chosen length
/// of every gap.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Witness {
    pub start: usize,
    pub gap_lens: Vec<usize>,
}

/// Everything the oracle found for one query.
#[derive(Clone, Debug, Default)]
pub struct OracleResult {
    /// Distinct occurrence start positions, ascending.
    pub starts: Vec<usize>,
    /// Distinct `(start, end)` spans, ascending. One span may be proven by
    /// several witnesses.
    pub spans: Vec<Occurrence>,
    /// Every matching gap-length assignment, in enumeration order.
    pub witnesses: Vec<Witness>,
}

/// Runs the oracle with the default combination cap.
pub fn oracle_match(t: &IndexedText, p: &GapPattern) -> Result<OracleResult> {
    oracle_match_capped(t, p, ORACLE_GAP_CAP)
}

/// Runs the oracle, refusing queries whose gap-length combination count
/// exceeds `cap`.
pub fn oracle_match_capped(t: &IndexedText, p: &GapPattern, cap: u64) -> Result<OracleResult> {
    let product = p.gap_combinations();
    if product > cap {
        return Err(Error::OracleCap { product, cap });
    }
    let n = t.n();
    let mut spans = BTreeSet::new();
    let mut starts = BTreeSet::new();
    let mut witnesses = Vec::new();
    let mut gap_lens = vec![0usize; p.gap_count()];
    for l in 1..=n {
        try_from(t, p, 0, l, &mut gap_lens, &mut |end, lens| {
            starts.insert(l);
            spans.insert(Occurrence { start: l, end });
            witnesses.push(Witness {
                start: l,
                gap_lens: lens.to_vec(),
            });
        });
    }
    Ok(OracleResult {
        starts: starts.into_iter().collect(),
        spans: spans.into_iter().collect(),
        witnesses,
    })
}

/// Tries to match subpatterns `i..` with the next symbol at `pos`,
/// invoking `found(end, gap_lens)` for every completed assignment.
fn try_from(
    t: &IndexedText,
    p: &GapPattern,
    i: usize,
    pos: usize,
    gap_lens: &mut Vec<usize>,
    found: &mut impl FnMut(usize, &[usize]),
) {
    let n = t.n();
    let sub = &p.subpatterns()[i];
    // The subpattern (possibly empty) must fit inside the real text; this
    // also keeps every span end at or before position n, since gaps below
    // never step past n either.
    if pos + sub.len() > n + 1 {
        return;
    }
    for (d, &sym) in sub.iter().enumerate() {
        if t.at(pos + d) != sym {
            return;
        }
    }
    let pos = pos + sub.len();
    if i == p.gap_count() {
        found(pos - 1, gap_lens);
        return;
    }
    let (a, b) = p.gaps()[i];
    for g in a..=b {
        // Gap symbols must be real text symbols: pos + g - 1 <= n.
        if pos + g > n + 1 {
            break;
        }
        gap_lens[i] = g;
        try_from(t, p, i + 1, pos + g, gap_lens, found);
    }
}
