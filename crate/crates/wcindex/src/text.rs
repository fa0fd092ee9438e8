//! Indexed text, substring references, and gap patterns.
//!
//! Conventions used across the crate:
//!
//! - Text positions are 1-indexed. A text of length `n` occupies positions
//!   `1..=n`; a sentinel symbol greater than every ordinary symbol sits at
//!   position `n + 1`. The sentinel never occurs elsewhere and no pattern
//!   symbol can equal it.
//! - A pattern is a sequence of literal subpatterns separated by gaps. The
//!   gap `(a, b)` matches at least `a` and at most `b` arbitrary text
//!   symbols (never the sentinel). A single wildcard is the gap `(1, 1)`.
//!
//! Pattern string syntax: literal bytes match themselves; `*` is a single
//! wildcard; `*{a,b}` is a variable-length gap; backslash escapes the four
//! metacharacters `*`, `{`, `}` and `\`. Consecutive gaps merge by summing
//! their bounds, so `a**a` parses as `a*{2,2}a`.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// One text or pattern symbol. Ordinary symbols are raw byte values; the
/// sentinel is a reserved value strictly greater than every byte.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(u32);

impl Symbol {
    /// Terminator stored at position `n + 1`; compares greater than all
    /// ordinary symbols and is never produced by [`Symbol::from_byte`].
    pub const SENTINEL: Symbol = Symbol(u32::MAX);

    pub fn from_byte(b: u8) -> Symbol {
        Symbol(b as u32)
    }

    pub fn is_sentinel(self) -> bool {
        self == Symbol::SENTINEL
    }

    /// Raw code for ordering and hashing; the sentinel maps to `u32::MAX`.
    pub fn code(self) -> u32 {
        self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_sentinel() {
            write!(f, "'$'")
        } else if self.0 < 128 && (self.0 as u8).is_ascii_graphic() {
            write!(f, "{:?}", self.0 as u8 as char)
        } else {
            write!(f, "#{}", self.0)
        }
    }
}

/// Renders a symbol slice for humans; the sentinel prints as `$`.
pub fn symbols_to_string(syms: &[Symbol]) -> String {
    let mut out = String::new();
    for s in syms {
        if s.is_sentinel() {
            out.push('$');
        } else if s.0 < 256 {
            out.push(s.0 as u8 as char);
        } else {
            out.push('\u{fffd}');
        }
    }
    out
}

pub fn symbols_from_bytes(bytes: &[u8]) -> Vec<Symbol> {
    bytes.iter().map(|&b| Symbol::from_byte(b)).collect()
}

/// A text prepared for indexing: the raw symbols plus the sentinel.
#[derive(Clone)]
pub struct IndexedText {
    /// `syms[i]` is the symbol at 1-indexed position `i + 1`; the last
    /// entry is the sentinel.
    syms: Vec<Symbol>,
    /// Number of distinct non-sentinel symbols present.
    sigma: usize,
}

impl IndexedText {
    pub fn from_bytes(bytes: &[u8]) -> IndexedText {
        let mut syms = symbols_from_bytes(bytes);
        syms.push(Symbol::SENTINEL);
        let mut seen = [false; 256];
        let mut sigma = 0;
        for &b in bytes {
            if !seen[b as usize] {
                seen[b as usize] = true;
                sigma += 1;
            }
        }
        IndexedText { syms, sigma }
    }

    // Inherent rather than the `FromStr` trait: construction never fails.
    #[allow(clippy::should_implement_trait)]
    pub fn from_str(s: &str) -> IndexedText {
        IndexedText::from_bytes(s.as_bytes())
    }

    /// Length excluding the sentinel.
    pub fn n(&self) -> usize {
        self.syms.len() - 1
    }

    /// Length including the sentinel, i.e. `n + 1`.
    pub fn len_with_sentinel(&self) -> usize {
        self.syms.len()
    }

    /// Number of distinct non-sentinel symbols in the text.
    pub fn sigma(&self) -> usize {
        self.sigma
    }

    /// Symbol at 1-indexed position `pos`, `1 <= pos <= n + 1`.
    pub fn at(&self, pos: usize) -> Symbol {
        self.syms[pos - 1]
    }

    /// The substring selected by `r`, after clamping: a start before the
    /// text is moved to position 1, an end past the sentinel is moved to
    /// `n + 1`, and an inverted range yields the empty string.
    pub fn substring(&self, r: SubstringRef) -> &[Symbol] {
        let start = r.start.max(1);
        let end = r.end.min(self.len_with_sentinel());
        if start > end {
            &[]
        } else {
            &self.syms[start - 1..end]
        }
    }

    /// All symbols including the sentinel.
    pub fn symbols(&self) -> &[Symbol] {
        &self.syms
    }

    /// The raw bytes of the text (sentinel excluded).
    pub fn to_bytes(&self) -> Vec<u8> {
        self.syms[..self.n()].iter().map(|s| s.0 as u8).collect()
    }
}

impl fmt::Debug for IndexedText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexedText({:?})", symbols_to_string(self.symbols()))
    }
}

/// Convenience alias used when several structures share one text.
pub type TextHandle = Arc<IndexedText>;

/// A half-open reference into the indexed text, both endpoints 1-indexed
/// and inclusive. `start > end` denotes the empty string; the canonical
/// empty reference is `(1, 0)`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct SubstringRef {
    pub start: usize,
    pub end: usize,
}

impl SubstringRef {
    pub fn new(start: usize, end: usize) -> SubstringRef {
        SubstringRef { start, end }
    }

    pub fn empty() -> SubstringRef {
        SubstringRef { start: 1, end: 0 }
    }

    pub fn len(&self) -> usize {
        if self.start > self.end {
            0
        } else {
            self.end - self.start + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.start > self.end
    }
}

/// An occurrence of a pattern: the 1-indexed, inclusive span of text it
/// covers. `end - start + 1 = m + (chosen gap lengths)` where `m` is the
/// total literal length of the pattern.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Occurrence {
    pub start: usize,
    pub end: usize,
}

impl Occurrence {
    pub fn span_len(&self) -> usize {
        self.end - self.start + 1
    }
}

/// A pattern `p_0 gap_1 p_1 ... gap_j p_j`: literal subpatterns separated
/// by variable-length gaps. Interior subpatterns between two gaps are
/// never empty (such gaps are merged at construction); the leading and
/// trailing subpatterns may be empty.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GapPattern {
    subs: Vec<Vec<Symbol>>,
    gaps: Vec<(usize, usize)>,
}

impl GapPattern {
    /// Builds a pattern, merging any gap pair separated by an empty
    /// interior subpattern by summing bounds. Requires at least one
    /// literal symbol overall and `a <= b` for every gap.
    pub fn new(subs: Vec<Vec<Symbol>>, gaps: Vec<(usize, usize)>) -> Result<GapPattern> {
        if subs.len() != gaps.len() + 1 {
            return Err(Error::Pattern(format!(
                "{} subpatterns require {} gaps, got {}",
                subs.len(),
                subs.len() - 1,
                gaps.len()
            )));
        }
        for &(a, b) in &gaps {
            if a > b {
                return Err(Error::Pattern(format!(
                    "gap lower bound {a} exceeds upper bound {b}"
                )));
            }
        }
        for sub in &subs {
            if sub.iter().any(|s| s.is_sentinel()) {
                return Err(Error::Pattern("pattern contains the sentinel".into()));
            }
        }
        // Merge gaps separated by an empty interior subpattern by summing
        // bounds componentwise; an empty FIRST subpattern is a leading gap
        // and is kept as-is.
        let mut it = subs.into_iter();
        let mut merged_subs: Vec<Vec<Symbol>> = vec![it.next().unwrap()];
        let mut merged_gaps: Vec<(usize, usize)> = Vec::new();
        for (gap, sub) in gaps.into_iter().zip(it) {
            if !merged_gaps.is_empty() && merged_subs.last().unwrap().is_empty() {
                let last = merged_gaps.last_mut().unwrap();
                last.0 += gap.0;
                last.1 += gap.1;
                *merged_subs.last_mut().unwrap() = sub;
            } else {
                merged_gaps.push(gap);
                merged_subs.push(sub);
            }
        }
        // A trailing empty subpattern is legal (trailing gap); interior
        // empties were merged away above except when the FIRST subpattern
        // is empty (leading gap), which is also legal.
        let m: usize = merged_subs.iter().map(|s| s.len()).sum();
        if m == 0 {
            return Err(Error::Pattern(
                "pattern has no literal symbols (m = 0)".into(),
            ));
        }
        Ok(GapPattern {
            subs: merged_subs,
            gaps: merged_gaps,
        })
    }

    /// Parses the pattern meta-syntax; see the module docs for the rules.
    pub fn parse(s: &str) -> Result<GapPattern> {
        parse_pattern(s.as_bytes())
    }

    pub fn subpatterns(&self) -> &[Vec<Symbol>] {
        &self.subs
    }

    pub fn gaps(&self) -> &[(usize, usize)] {
        &self.gaps
    }

    /// Number of gaps, `j`.
    pub fn gap_count(&self) -> usize {
        self.gaps.len()
    }

    /// Total literal length, `m`.
    pub fn m(&self) -> usize {
        self.subs.iter().map(|s| s.len()).sum()
    }

    /// Sum of all gap lower bounds, `A`.
    pub fn a_total(&self) -> usize {
        self.gaps.iter().map(|g| g.0).sum()
    }

    /// Sum of all gap upper bounds, `B`.
    pub fn b_total(&self) -> usize {
        self.gaps.iter().map(|g| g.1).sum()
    }

    /// Sum of the first `i` gap lower bounds (`i <= j`).
    pub fn a_prefix(&self, i: usize) -> usize {
        self.gaps[..i].iter().map(|g| g.0).sum()
    }

    /// Sum of the first `i` gap upper bounds (`i <= j`).
    pub fn b_prefix(&self, i: usize) -> usize {
        self.gaps[..i].iter().map(|g| g.1).sum()
    }

    /// True when every gap is exactly one wildcard `(1, 1)` (or there are
    /// no gaps); such queries report start positions only.
    pub fn is_wildcard_only(&self) -> bool {
        self.gaps.iter().all(|&g| g == (1, 1))
    }

    /// Smallest possible occurrence span, `m + A`.
    pub fn min_span(&self) -> usize {
        self.m() + self.a_total()
    }

    /// Largest possible occurrence span, `m + B`.
    pub fn max_span(&self) -> usize {
        self.m() + self.b_total()
    }

    /// Number of gap-length combinations, `prod (b_i - a_i + 1)`,
    /// saturating at `u64::MAX`.
    pub fn gap_combinations(&self) -> u64 {
        let mut prod: u64 = 1;
        for &(a, b) in &self.gaps {
            prod = prod.saturating_mul((b - a + 1) as u64);
        }
        prod
    }

    /// Canonical rendering; `parse(render(p)) == p` for every pattern.
    pub fn render_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (i, sub) in self.subs.iter().enumerate() {
            if i > 0 {
                let (a, b) = self.gaps[i - 1];
                if (a, b) == (1, 1) {
                    out.push(b'*');
                } else {
                    out.extend_from_slice(format!("*{{{a},{b}}}").as_bytes());
                }
            }
            for sym in sub {
                let c = sym.code();
                if c < 256 {
                    let byte = c as u8;
                    if matches!(byte, b'*' | b'{' | b'}' | b'\\') {
                        out.push(b'\\');
                    }
                    out.push(byte);
                }
            }
        }
        out
    }

    pub fn render(&self) -> String {
        String::from_utf8_lossy(&self.render_bytes()).into_owned()
    }
}

/// Parses the byte form of the pattern meta-syntax. Offsets in errors are
/// 1-based byte positions.
pub fn parse_pattern(bytes: &[u8]) -> Result<GapPattern> {
    if bytes.is_empty() {
        return Err(Error::Pattern("empty pattern".into()));
    }
    let mut subs: Vec<Vec<Symbol>> = vec![Vec::new()];
    let mut gaps: Vec<(usize, usize)> = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let off = i + 1;
        match bytes[i] {
            b'\\' => {
                if i + 1 >= bytes.len() {
                    return Err(Error::Parse {
                        offset: off,
                        reason: "dangling backslash".into(),
                    });
                }
                let next = bytes[i + 1];
                if !matches!(next, b'*' | b'{' | b'}' | b'\\') {
                    return Err(Error::Parse {
                        offset: off,
                        reason: format!(
                            "unknown escape '\\{}' (only *, {{, }} and \\ can be escaped)",
                            next as char
                        ),
                    });
                }
                subs.last_mut().unwrap().push(Symbol::from_byte(next));
                i += 2;
            }
            b'*' => {
                let star_off = off;
                if i + 1 < bytes.len() && bytes[i + 1] == b'{' {
                    i += 2;
                    let (a, ni) = parse_bound(bytes, i)?;
                    i = ni;
                    if i >= bytes.len() || bytes[i] != b',' {
                        return Err(Error::Parse {
                            offset: i + 1,
                            reason: "expected ',' between gap bounds".into(),
                        });
                    }
                    i += 1;
                    let (b, ni) = parse_bound(bytes, i)?;
                    i = ni;
                    if i >= bytes.len() || bytes[i] != b'}' {
                        return Err(Error::Parse {
                            offset: i + 1,
                            reason: "expected '}' after gap bounds".into(),
                        });
                    }
                    i += 1;
                    if a > b {
                        return Err(Error::Parse {
                            offset: star_off,
                            reason: format!("gap lower bound {a} exceeds upper bound {b}"),
                        });
                    }
                    gaps.push((a, b));
                } else {
                    gaps.push((1, 1));
                    i += 1;
                }
                subs.push(Vec::new());
            }
            b'{' | b'}' => {
                return Err(Error::Parse {
                    offset: off,
                    reason: format!("unescaped '{}'", bytes[i] as char),
                });
            }
            c => {
                subs.last_mut().unwrap().push(Symbol::from_byte(c));
                i += 1;
            }
        }
    }
    GapPattern::new(subs, gaps)
}

fn parse_bound(bytes: &[u8], mut i: usize) -> Result<(usize, usize)> {
    let start = i;
    let mut value: usize = 0;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add((bytes[i] - b'0') as usize))
            .ok_or(Error::Parse {
                offset: start + 1,
                reason: "gap bound too large".into(),
            })?;
        i += 1;
    }
    if i == start {
        return Err(Error::Parse {
            offset: i + 1,
            reason: "expected a number in gap bounds".into(),
        });
    }
    Ok((value, i))
}
