//! Index variants and the gap-pattern query engine.
//!
//! Four interchangeable index shapes answer the same queries:
//!
//! * `Simple` — the bare suffix tree, walked symbol by symbol. Wildcards
//!   branch on every child edge.
//! * `ArtLinear` — the suffix tree split into a top tree and bottom trees
//!   of at most `chi` leaves. Subpatterns advance through whole regions
//!   with LCP queries (at most two per subpattern per active location)
//!   instead of symbol comparisons.
//! * `Tradeoff` — a layered wildcard tree with branching bound `beta`.
//!   Wildcards consume either the STAR edge (covering every light
//!   continuation at once) or one of the `beta - 1` frozen heavy edges.
//! * `LinearTime` — a composite: a `beta = 1` wildcard tree over the
//!   length-`g` windows of the text serves patterns whose maximal span
//!   fits in a window; everything else is routed to an `ArtLinear`
//!   fallback over the full text.
//!
//! All variants run the same staged search: match the current subpattern
//! from every active location, then expand the gap — first the mandatory
//! wildcard steps, then the optional ones (each optional step forks into
//! "skip" and "consume"). Occurrences are read off the surviving
//! locations: every source position stored below a terminal location
//! matched, and the match ends `depth - 1` symbols later.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::decomposition::{art_decompose, ArtDecomposition};
use crate::error::{Error, Result};
use crate::lcp::{LcpAnswer, LcpMode, LcpStructure, PreprocessedPattern, TrieId};
use crate::text::{GapPattern, Occurrence, SubstringRef, Symbol, TextHandle};
use crate::trie::{build_suffix_tree, CompressedTrie, EdgeKind, Location, VertexId, ROOT};
use crate::wildcard_tree::{build_wildcard_tree, ceil_log2, wildcard_step, WildcardTree};

/// Which sub-index a composite query ran on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Route {
    /// The windowed wildcard tree (pattern span fits in one window).
    Special,
    /// The full-text fallback index.
    Fallback,
    /// The index is not a composite; no routing happened.
    #[default]
    NotApplicable,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Route::Special => write!(f, "SPECIAL"),
            Route::Fallback => write!(f, "FALLBACK"),
            Route::NotApplicable => write!(f, "n/a"),
        }
    }
}

/// Index shape selector. `None` parameters take their defaults at build
/// time: `chi = max(1, ceil(log2 n))` and `opt = k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexVariant {
    /// Plain suffix tree, direct descent, full branching on wildcards.
    Simple,
    /// Suffix tree + top/bottom decomposition, LCP-query navigation.
    ArtLinear { chi: Option<usize> },
    /// Layered wildcard tree with branching bound `beta`, `k` mandatory
    /// and `opt` optional wildcard levels.
    Tradeoff { beta: usize, k: usize, opt: Option<usize> },
    /// Windowed `beta = 1` wildcard tree plus `ArtLinear` fallback.
    /// `g` overrides the derived window length.
    LinearTime { k: usize, opt: Option<usize>, g: Option<usize>, chi: Option<usize> },
}

/// Counters filled in by one query.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// LCP queries issued (ART and tradeoff navigation only).
    pub lcp_queries: usize,
    /// Steps at which one active location continued more than one way.
    pub branch_events: usize,
    /// Largest number of simultaneously active locations.
    pub active_location_peak: usize,
    /// Heavy-path transitions summed over all LCP queries.
    pub heavy_hops_total: usize,
    /// Predecessor lookups summed over all LCP queries.
    pub predecessor_uses: usize,
    /// Direct symbol comparisons spent in LCP queries on foreign-text
    /// tries (always 0 for the indexes built here).
    pub fallback_comparisons: usize,
    /// Which sub-index a composite ran on; `n/a` elsewhere.
    pub routed_to: Route,
    /// Duplicate locations or spans removed by set semantics. Stays 0
    /// unless the pattern has optional wildcards.
    pub dedup_removed: usize,
    /// Active-location count entering each subpattern.
    pub subpattern_starts: Vec<usize>,
}

impl QueryStats {
    fn absorb(&mut self, ans: &LcpAnswer) {
        self.lcp_queries += 1;
        self.heavy_hops_total += ans.hops;
        self.predecessor_uses += usize::from(ans.used_predecessor);
        self.fallback_comparisons += ans.fallback_comparisons;
    }
}

/// Query result. Wildcard-only patterns have a fixed match length, so
/// only starts are reported; patterns with a real gap report full spans.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OccurrenceSet {
    /// Sorted distinct match start positions.
    Starts(Vec<usize>),
    /// Sorted distinct `(start, end)` spans, `end` inclusive.
    Spans(Vec<Occurrence>),
}

impl OccurrenceSet {
    pub fn len(&self) -> usize {
        match self {
            OccurrenceSet::Starts(s) => s.len(),
            OccurrenceSet::Spans(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Distinct start positions regardless of representation.
    pub fn starts(&self) -> Vec<usize> {
        match self {
            OccurrenceSet::Starts(s) => s.clone(),
            OccurrenceSet::Spans(s) => {
                let mut out: Vec<usize> = s.iter().map(|o| o.start).collect();
                out.dedup();
                out
            }
        }
    }
}

/// One gap, expanded into executable wildcard steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GapStep {
    /// Mandatory wildcards: each consumes exactly one symbol.
    pub normal: usize,
    /// Optional wildcards: each consumes one symbol or nothing.
    pub optional: usize,
}

/// The per-gap schedule for a pattern, with running wildcard budgets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapSchedule {
    steps: Vec<GapStep>,
    a_prefix: Vec<usize>,
    b_prefix: Vec<usize>,
}

impl GapSchedule {
    pub fn steps(&self) -> &[GapStep] {
        &self.steps
    }

    /// Mandatory wildcards before subpattern `i` (`A_i`).
    pub fn mandatory_before(&self, i: usize) -> usize {
        self.a_prefix[i]
    }

    /// Total wildcard budget before subpattern `i` (`B_i`).
    pub fn budget_before(&self, i: usize) -> usize {
        self.b_prefix[i]
    }
}

/// Expands each gap `(a, b)` into `a` mandatory plus `b - a` optional
/// wildcard steps and records the running budgets.
pub fn vlg_expand(p: &GapPattern) -> GapSchedule {
    let steps = p
        .gaps()
        .iter()
        .map(|&(a, b)| GapStep { normal: a, optional: b - a })
        .collect();
    let a_prefix = (0..=p.gap_count()).map(|i| p.a_prefix(i)).collect();
    let b_prefix = (0..=p.gap_count()).map(|i| p.b_prefix(i)).collect();
    GapSchedule { steps, a_prefix, b_prefix }
}

/// Effective parameters after defaults are resolved (0 where a
/// parameter does not apply to the variant).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ResolvedParams {
    pub beta: usize,
    pub k: usize,
    pub opt: usize,
    pub chi: usize,
    pub g: usize,
}

pub(crate) struct ArtIndex {
    pub(crate) tree: Arc<CompressedTrie>,
    pub(crate) chi: usize,
    pub(crate) art: ArtDecomposition,
    pub(crate) lcp: LcpStructure,
    pub(crate) top_id: Option<TrieId>,
    pub(crate) bottom_ids: HashMap<VertexId, TrieId>,
}

pub(crate) struct TradeoffIndex {
    pub(crate) wt: WildcardTree,
    pub(crate) lcp: LcpStructure,
    pub(crate) k: usize,
    pub(crate) opt: usize,
    pub(crate) region_ids: HashMap<VertexId, TrieId>,
    pub(crate) region_root_of: Vec<VertexId>,
}

pub(crate) enum IndexKind {
    Simple {
        tree: Arc<CompressedTrie>,
    },
    ArtLinear(ArtIndex),
    Tradeoff(TradeoffIndex),
    LinearTime {
        special: WildcardTree,
        g: usize,
        k: usize,
        opt: usize,
        fallback: ArtIndex,
    },
}

/// A built index over one text.
pub struct Index {
    pub(crate) text: TextHandle,
    pub(crate) variant: IndexVariant,
    pub(crate) kind: IndexKind,
}

/// Builds an index with the default construction guard.
pub fn build_index(text: &TextHandle, variant: IndexVariant) -> Result<Index> {
    build_index_guarded(text, variant, None)
}

/// Builds an index, refusing wildcard-tree constructions that would
/// store more than `guard` strings (`None` = the generous default).
pub fn build_index_guarded(
    text: &TextHandle,
    variant: IndexVariant,
    guard: Option<u64>,
) -> Result<Index> {
    let kind = match variant {
        IndexVariant::Simple => IndexKind::Simple {
            tree: Arc::new(build_suffix_tree(text)),
        },
        IndexVariant::ArtLinear { chi } => IndexKind::ArtLinear(build_art(text, chi)?),
        IndexVariant::Tradeoff { beta, k, opt } => {
            IndexKind::Tradeoff(build_tradeoff(text, beta, k, opt, guard)?)
        }
        IndexVariant::LinearTime { k, opt, g, chi } => {
            let o = opt.unwrap_or(k);
            if g == Some(0) {
                return Err(Error::Param("window length g must be at least 1".into()));
            }
            let g = g.unwrap_or_else(|| special_window(text, k));
            let special = build_special(text, g, k + o, guard)?;
            let fallback = build_art(text, chi)?;
            IndexKind::LinearTime { special, g, k, opt: o, fallback }
        }
    };
    Ok(Index {
        text: text.clone(),
        variant,
        kind,
    })
}

/// Window length for the composite variant:
/// `sigma^k * max(1, ceil(log2 log2 n))`.
fn special_window(text: &TextHandle, k: usize) -> usize {
    let inner = ceil_log2(text.n().max(2)) as usize;
    let loglog = (ceil_log2(inner.max(2)) as usize).max(1);
    text.sigma()
        .saturating_pow(k as u32)
        .saturating_mul(loglog)
        .max(1)
}

fn suffix_items(text: &TextHandle) -> Vec<(SubstringRef, Vec<u32>)> {
    (1..=text.n() + 1)
        .map(|i| (SubstringRef::new(i, text.n() + 1), vec![i as u32]))
        .collect()
}

fn window_items(text: &TextHandle, g: usize) -> Vec<(SubstringRef, Vec<u32>)> {
    let last = text.n() + 1;
    (1..=last)
        .map(|i| {
            let end = (i + g - 1).min(last);
            (SubstringRef::new(i, end), vec![i as u32])
        })
        .collect()
}

fn build_art(text: &TextHandle, chi: Option<usize>) -> Result<ArtIndex> {
    let tree = Arc::new(build_suffix_tree(text));
    let chi = chi.unwrap_or_else(|| (ceil_log2(text.n().max(1)) as usize).max(1));
    art_from_tree(text, tree, chi)
}

/// Decomposes an existing suffix tree and registers its LCP regions.
pub(crate) fn art_from_tree(
    text: &TextHandle,
    tree: Arc<CompressedTrie>,
    chi: usize,
) -> Result<ArtIndex> {
    if chi == 0 {
        return Err(Error::Param("chi must be at least 1".into()));
    }
    let art = art_decompose(&tree, chi)?;
    let mut lcp = LcpStructure::with_reference(text, tree.clone());
    // The edge into a bottom root still belongs to the top region; the
    // top region therefore ends exactly at the bottom roots.
    let boundary: HashSet<VertexId> = art.bottom_roots().iter().copied().collect();
    let top_id = if art.bottom_root_of(ROOT).is_some() {
        None
    } else {
        Some(lcp.register_region_bounded(tree.clone(), ROOT, LcpMode::Full, boundary)?)
    };
    let mut bottom_ids = HashMap::new();
    for &b in art.bottom_roots() {
        bottom_ids.insert(b, lcp.register_region(tree.clone(), b, LcpMode::Light)?);
    }
    Ok(ArtIndex { tree, chi, art, lcp, top_id, bottom_ids })
}

fn build_tradeoff(
    text: &TextHandle,
    beta: usize,
    k: usize,
    opt: Option<usize>,
    guard: Option<u64>,
) -> Result<TradeoffIndex> {
    let sigma = text.sigma();
    if beta < 1 || beta >= sigma {
        return Err(Error::BetaRange { beta, sigma });
    }
    let o = opt.unwrap_or(k);
    let wt = build_wildcard_tree(text, suffix_items(text), beta, k + o, guard)?;
    tradeoff_from_tree(text, wt, k, o)
}

/// Registers an existing layered tree's star regions for LCP queries.
pub(crate) fn tradeoff_from_tree(
    text: &TextHandle,
    wt: WildcardTree,
    k: usize,
    opt: usize,
) -> Result<TradeoffIndex> {
    let trie = wt.trie().clone();
    let mut lcp = LcpStructure::new(text);
    let mut region_ids = HashMap::new();
    region_ids.insert(ROOT, lcp.register_region(trie.clone(), ROOT, LcpMode::Full)?);
    for &s in wt.star_roots() {
        region_ids.insert(s, lcp.register_region(trie.clone(), s, LcpMode::Full)?);
    }
    let region_root_of = region_roots(&trie);
    Ok(TradeoffIndex { wt, lcp, k, opt, region_ids, region_root_of })
}

fn build_special(text: &TextHandle, g: usize, levels: usize, guard: Option<u64>) -> Result<WildcardTree> {
    build_wildcard_tree(text, window_items(text, g), 1, levels, guard)
}

/// Star region root of every vertex (`ROOT` for the level-k trie).
fn region_roots(trie: &CompressedTrie) -> Vec<VertexId> {
    let mut out = vec![ROOT; trie.vertex_count()];
    let mut stack = vec![ROOT];
    while let Some(v) = stack.pop() {
        for &c in trie.children(v) {
            out[c as usize] = if trie.kind(c) == EdgeKind::Star {
                c
            } else {
                out[v as usize]
            };
            stack.push(c);
        }
    }
    out
}

impl ArtIndex {
    /// Region that answers an LCP query from `loc`. Locations strictly
    /// inside a bottom root's incoming edge still belong to the top.
    fn region_for(&self, loc: Location) -> TrieId {
        match self.art.bottom_root_of(loc.vertex) {
            None => self.top_id.expect("a top vertex implies a registered top region"),
            Some(b) => {
                if loc.vertex == b && (loc.offset as usize) < self.tree.edge_len(b) {
                    self.top_id.expect("an edge into a bottom root starts in the top region")
                } else {
                    self.bottom_ids[&b]
                }
            }
        }
    }

    /// Matches pattern symbols `lo..hi` from `loc`, crossing from the
    /// top region into a bottom region when the piece spans both.
    fn match_piece(
        &self,
        pp: &PreprocessedPattern,
        lo: usize,
        hi: usize,
        mut loc: Location,
        stats: &mut QueryStats,
    ) -> Result<Option<Location>> {
        let mut j = lo;
        loop {
            let id = self.region_for(loc);
            let ans = self.lcp.lcp_query_bounded(pp, j, hi, id, loc)?;
            stats.absorb(&ans);
            j += self.tree.location_depth(ans.location) - self.tree.location_depth(loc);
            loc = ans.location;
            if j == hi {
                return Ok(Some(loc));
            }
            if self.region_for(loc) == id {
                // Stopped inside the same region with symbols left:
                // a genuine mismatch, not a boundary artifact.
                return Ok(None);
            }
        }
    }
}

impl TradeoffIndex {
    /// Matches pattern symbols `lo..hi` from `loc` with one LCP query.
    /// Star regions contain every non-star continuation down to their
    /// leaves, so a subpattern never leaves its region.
    fn match_piece(
        &self,
        pp: &PreprocessedPattern,
        lo: usize,
        hi: usize,
        loc: Location,
        stats: &mut QueryStats,
    ) -> Result<Option<Location>> {
        let id = self.region_ids[&self.region_root_of[loc.vertex as usize]];
        let ans = self.lcp.lcp_query_bounded(pp, lo, hi, id, loc)?;
        stats.absorb(&ans);
        let trie = self.wt.trie();
        let advanced = trie.location_depth(ans.location) - trie.location_depth(loc);
        Ok((lo + advanced == hi).then_some(ans.location))
    }
}

/// Navigation strategy: how one variant matches a subpattern from a
/// location and where a wildcard can move it.
enum Nav<'a> {
    Simple(&'a CompressedTrie),
    Art(&'a ArtIndex),
    Tradeoff(&'a TradeoffIndex),
    Special(&'a WildcardTree),
}

impl Nav<'_> {
    fn trie(&self) -> &CompressedTrie {
        match self {
            Nav::Simple(t) => t,
            Nav::Art(a) => &a.tree,
            Nav::Tradeoff(ti) => ti.wt.trie(),
            Nav::Special(wt) => wt.trie(),
        }
    }

    fn needs_preprocess(&self) -> bool {
        matches!(self, Nav::Art(_) | Nav::Tradeoff(_))
    }

    fn match_piece(
        &self,
        ctx: &QueryCtx,
        lo: usize,
        hi: usize,
        loc: Location,
        stats: &mut QueryStats,
    ) -> Result<Option<Location>> {
        if lo == hi {
            return Ok(Some(loc));
        }
        match self {
            Nav::Simple(t) => Ok(descend_piece(t, &ctx.syms, lo, hi, loc)),
            Nav::Special(wt) => Ok(descend_piece(wt.trie(), &ctx.syms, lo, hi, loc)),
            Nav::Art(a) => a.match_piece(ctx.pp(), lo, hi, loc, stats),
            Nav::Tradeoff(ti) => ti.match_piece(ctx.pp(), lo, hi, loc, stats),
        }
    }

    fn wildcard_targets(&self, loc: Location, out: &mut Vec<Location>) {
        match self {
            Nav::Simple(t) => all_children_step(t, loc, out),
            Nav::Art(a) => all_children_step(&a.tree, loc, out),
            Nav::Tradeoff(ti) => wildcard_step(&ti.wt, loc, out),
            Nav::Special(wt) => wildcard_step(wt, loc, out),
        }
    }
}

struct QueryCtx {
    syms: Vec<Symbol>,
    pp: Option<PreprocessedPattern>,
}

impl QueryCtx {
    fn pp(&self) -> &PreprocessedPattern {
        self.pp.as_ref().expect("LCP-navigated variants preprocess the pattern")
    }
}

/// Direct descent over `syms[lo-1..hi-1]` (1-based bounds).
fn descend_piece(
    trie: &CompressedTrie,
    syms: &[Symbol],
    lo: usize,
    hi: usize,
    loc: Location,
) -> Option<Location> {
    let piece = &syms[lo - 1..hi - 1];
    let (stop, matched) = trie.descend(loc, piece);
    (matched == piece.len()).then_some(stop)
}

/// Full-branching wildcard step: one symbol along every child edge
/// (or along the current edge mid-label), never onto the sentinel.
fn all_children_step(trie: &CompressedTrie, loc: Location, out: &mut Vec<Location>) {
    if !trie.is_explicit(loc) {
        let span = trie
            .edge_span(loc.vertex)
            .expect("implicit locations sit on labeled edges");
        if !trie.text().at(span.start + loc.offset as usize).is_sentinel() {
            out.push(Location {
                vertex: loc.vertex,
                offset: loc.offset + 1,
            });
        }
        return;
    }
    for &c in trie.sub_children(loc.vertex) {
        let first = trie.first_symbol(c).expect("child edge has a label");
        if first.is_sentinel() {
            continue;
        }
        out.push(trie.first_location_on_edge(c));
    }
}

fn dedup_locations(mut locs: Vec<Location>, stats: &mut QueryStats) -> Vec<Location> {
    let before = locs.len();
    locs.sort_unstable_by_key(|l| (l.vertex, l.offset));
    locs.dedup();
    stats.dedup_removed += before - locs.len();
    locs
}

/// Staged search: subpattern, gap, subpattern, ... Returns the
/// locations surviving the last subpattern.
fn run_engine(
    nav: &Nav<'_>,
    ctx: &QueryCtx,
    p: &GapPattern,
    schedule: &GapSchedule,
    stats: &mut QueryStats,
) -> Result<Vec<Location>> {
    let mut frontier = vec![nav.trie().root_location()];
    stats.active_location_peak = 1;
    let subs = p.subpatterns();
    let mut piece_lo = 1usize;
    for (i, sub) in subs.iter().enumerate() {
        stats.subpattern_starts.push(frontier.len());
        let piece_hi = piece_lo + sub.len();
        let mut matched = Vec::new();
        for &loc in &frontier {
            if let Some(stop) = nav.match_piece(ctx, piece_lo, piece_hi, loc, stats)? {
                matched.push(stop);
            }
        }
        piece_lo = piece_hi;
        frontier = matched;
        stats.active_location_peak = stats.active_location_peak.max(frontier.len());
        if i + 1 == subs.len() {
            break;
        }
        let step = schedule.steps()[i];
        for _ in 0..step.normal {
            let mut targets = Vec::new();
            for &loc in &frontier {
                let before = targets.len();
                nav.wildcard_targets(loc, &mut targets);
                if targets.len() - before > 1 {
                    stats.branch_events += 1;
                }
            }
            frontier = targets;
            stats.active_location_peak = stats.active_location_peak.max(frontier.len());
        }
        for _ in 0..step.optional {
            let mut targets = Vec::new();
            for &loc in &frontier {
                let before = targets.len();
                targets.push(loc);
                nav.wildcard_targets(loc, &mut targets);
                if targets.len() - before > 1 {
                    stats.branch_events += 1;
                }
            }
            frontier = dedup_locations(targets, stats);
            stats.active_location_peak = stats.active_location_peak.max(frontier.len());
        }
    }
    Ok(frontier)
}

impl Index {
    pub fn text(&self) -> &TextHandle {
        &self.text
    }

    pub fn variant(&self) -> IndexVariant {
        self.variant
    }

    pub fn n(&self) -> usize {
        self.text.n()
    }

    pub fn sigma(&self) -> usize {
        self.text.sigma()
    }

    /// Effective parameters with defaults filled in.
    pub fn resolved(&self) -> ResolvedParams {
        match &self.kind {
            IndexKind::Simple { .. } => ResolvedParams::default(),
            IndexKind::ArtLinear(a) => ResolvedParams {
                chi: a.chi,
                ..ResolvedParams::default()
            },
            IndexKind::Tradeoff(ti) => ResolvedParams {
                beta: ti.wt.beta(),
                k: ti.k,
                opt: ti.opt,
                ..ResolvedParams::default()
            },
            IndexKind::LinearTime { g, k, opt, fallback, .. } => ResolvedParams {
                beta: 1,
                k: *k,
                opt: *opt,
                chi: fallback.chi,
                g: *g,
            },
        }
    }

    /// Key/value description of the built structure, for reporting.
    pub fn stats_pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            (
                "variant",
                match self.variant {
                    IndexVariant::Simple => "simple".to_string(),
                    IndexVariant::ArtLinear { .. } => "art-linear".to_string(),
                    IndexVariant::Tradeoff { .. } => "tradeoff".to_string(),
                    IndexVariant::LinearTime { .. } => "linear-time".to_string(),
                },
            ),
            ("n", self.n().to_string()),
            ("sigma", self.sigma().to_string()),
        ];
        match &self.kind {
            IndexKind::Simple { tree } => {
                out.push(("vertices", tree.vertex_count().to_string()));
                out.push(("leaves", tree.leaf_count().to_string()));
            }
            IndexKind::ArtLinear(a) => {
                out.push(("vertices", a.tree.vertex_count().to_string()));
                out.push(("chi", a.chi.to_string()));
                out.push(("bottom_trees", a.art.bottom_roots().len().to_string()));
                out.push(("top_leaves", a.art.top_leaf_count().to_string()));
            }
            IndexKind::Tradeoff(ti) => {
                let s = ti.wt.stats();
                out.push(("vertices", ti.wt.trie().vertex_count().to_string()));
                out.push(("beta", ti.wt.beta().to_string()));
                out.push(("k", ti.k.to_string()));
                out.push(("opt", ti.opt.to_string()));
                out.push(("stored_strings", s.stored_strings.to_string()));
                out.push(("star_regions", s.star_regions.to_string()));
                out.push(("lightheight_max", s.lightheight_max.to_string()));
            }
            IndexKind::LinearTime { special, g, k, opt, fallback } => {
                let s = special.stats();
                out.push(("g", g.to_string()));
                out.push(("k", k.to_string()));
                out.push(("opt", opt.to_string()));
                out.push(("special_vertices", special.trie().vertex_count().to_string()));
                out.push(("special_stored_strings", s.stored_strings.to_string()));
                out.push(("fallback_chi", fallback.chi.to_string()));
                out.push(("fallback_vertices", fallback.tree.vertex_count().to_string()));
            }
        }
        out
    }

    /// Where a query for `p` would run on this index.
    pub fn route(&self, p: &GapPattern) -> Route {
        match &self.kind {
            IndexKind::LinearTime { g, .. } => {
                if p.max_span() <= *g {
                    Route::Special
                } else {
                    Route::Fallback
                }
            }
            _ => Route::NotApplicable,
        }
    }

    /// Runs a query with default routing.
    pub fn query(&self, p: &GapPattern) -> Result<(OccurrenceSet, QueryStats)> {
        self.query_routed(p, None)
    }

    /// Runs a query, optionally forcing a composite onto one sub-index.
    pub fn query_routed(
        &self,
        p: &GapPattern,
        force: Option<Route>,
    ) -> Result<(OccurrenceSet, QueryStats)> {
        let a = p.a_total();
        let slack = p.b_total() - a;
        let budget = match &self.kind {
            IndexKind::Tradeoff(ti) => Some((ti.k, ti.opt)),
            IndexKind::LinearTime { k, opt, .. } => Some((*k, *opt)),
            _ => None,
        };
        if let Some((k, o)) = budget {
            if a > k || slack > o {
                return Err(Error::Budget { a, opt: slack, k, o });
            }
        }
        if force.is_some() && !matches!(self.kind, IndexKind::LinearTime { .. }) {
            return Err(Error::Param(
                "forced routing applies to the composite variant only".into(),
            ));
        }
        if force == Some(Route::NotApplicable) {
            return Err(Error::Param("cannot force a query onto no sub-index".into()));
        }

        let mut stats = QueryStats::default();
        let nav = match &self.kind {
            IndexKind::Simple { tree } => Nav::Simple(tree),
            IndexKind::ArtLinear(a) => Nav::Art(a),
            IndexKind::Tradeoff(ti) => Nav::Tradeoff(ti),
            IndexKind::LinearTime { special, g, fallback, .. } => {
                let route = force.unwrap_or_else(|| self.route(p));
                if route == Route::Special && p.max_span() > *g {
                    return Err(Error::SpecialWindow {
                        needed: p.max_span(),
                        g: *g as u64,
                    });
                }
                stats.routed_to = route;
                match route {
                    Route::Special => Nav::Special(special),
                    Route::Fallback => Nav::Art(fallback),
                    Route::NotApplicable => unreachable!("guarded above"),
                }
            }
        };

        let syms: Vec<Symbol> = p.subpatterns().concat();
        let pp = if nav.needs_preprocess() {
            let lcp = match &nav {
                Nav::Art(a) => &a.lcp,
                Nav::Tradeoff(ti) => &ti.lcp,
                _ => unreachable!(),
            };
            Some(lcp.preprocess_pattern(&syms))
        } else {
            None
        };
        let ctx = QueryCtx { syms, pp };
        let schedule = vlg_expand(p);
        let terminals = run_engine(&nav, &ctx, p, &schedule, &mut stats)?;

        let trie = nav.trie();
        let mut pairs = Vec::new();
        for &loc in &terminals {
            let depth = trie.location_depth(loc);
            for s in trie.collect_occurrences(loc) {
                pairs.push((s, s + depth - 1));
            }
        }
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        stats.dedup_removed += before - pairs.len();

        let set = if p.is_wildcard_only() {
            OccurrenceSet::Starts(pairs.into_iter().map(|(s, _)| s).collect())
        } else {
            OccurrenceSet::Spans(
                pairs
                    .into_iter()
                    .map(|(start, end)| Occurrence { start, end })
                    .collect(),
            )
        };
        Ok((set, stats))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_match;
    use crate::text::IndexedText;
    use proptest::prelude::*;

    fn handle(s: &str) -> TextHandle {
        Arc::new(IndexedText::from_str(s))
    }

    fn pattern(s: &str) -> GapPattern {
        GapPattern::parse(s).unwrap()
    }

    const GOLDEN_TEXT: &str = "acbccbacccddabdaabcdccbccdaa";
    const GOLDEN_PATTERN: &str = "b*{0,4}cc*{3,5}d";

    fn golden_variants() -> Vec<IndexVariant> {
        vec![
            IndexVariant::Simple,
            IndexVariant::ArtLinear { chi: None },
            IndexVariant::Tradeoff { beta: 2, k: 3, opt: Some(6) },
            IndexVariant::LinearTime { k: 3, opt: Some(6), g: None, chi: None },
        ]
    }

    fn spans_of(set: &OccurrenceSet) -> Vec<(usize, usize)> {
        match set {
            OccurrenceSet::Spans(s) => s.iter().map(|o| (o.start, o.end)).collect(),
            OccurrenceSet::Starts(_) => panic!("expected spans"),
        }
    }

    fn starts_of(set: &OccurrenceSet) -> Vec<usize> {
        match set {
            OccurrenceSet::Starts(s) => s.clone(),
            OccurrenceSet::Spans(_) => panic!("expected starts"),
        }
    }

    #[test]
    fn golden_example_matches_on_every_variant() {
        let t = handle(GOLDEN_TEXT);
        let p = pattern(GOLDEN_PATTERN);
        let expected = vec![(3, 11), (3, 15), (6, 15), (18, 26)];
        for variant in golden_variants() {
            let idx = build_index(&t, variant).unwrap();
            let (set, stats) = idx.query(&p).unwrap();
            assert_eq!(spans_of(&set), expected, "variant {variant:?}");
            match variant {
                IndexVariant::LinearTime { .. } => {
                    assert_eq!(stats.routed_to, Route::Special);
                    assert_eq!(idx.resolved().g, 192);
                }
                _ => assert_eq!(stats.routed_to, Route::NotApplicable),
            }
        }
    }

    #[test]
    fn gap_free_and_single_wildcard_patterns_report_starts() {
        let t = handle("bananas");
        let variants = vec![
            IndexVariant::Simple,
            IndexVariant::ArtLinear { chi: None },
            IndexVariant::Tradeoff { beta: 2, k: 2, opt: Some(0) },
            IndexVariant::LinearTime { k: 2, opt: Some(0), g: None, chi: None },
        ];
        for variant in variants {
            let idx = build_index(&t, variant).unwrap();
            let (set, _) = idx.query(&pattern("ana")).unwrap();
            assert_eq!(starts_of(&set), vec![2, 4], "variant {variant:?}");
            let (set, stats) = idx.query(&pattern("a*a")).unwrap();
            assert_eq!(starts_of(&set), vec![2, 4], "variant {variant:?}");
            if matches!(variant, IndexVariant::Tradeoff { .. }) {
                // One wildcard: at most 1 + beta locations ever active.
                assert!(stats.lcp_queries <= 3, "got {}", stats.lcp_queries);
            }
        }
    }

    #[test]
    fn vlg_expand_splits_gaps_into_mandatory_and_optional_steps() {
        let p = pattern("a*b*{0,4}c*{3,5}d");
        let s = vlg_expand(&p);
        assert_eq!(
            s.steps(),
            &[
                GapStep { normal: 1, optional: 0 },
                GapStep { normal: 0, optional: 4 },
                GapStep { normal: 3, optional: 2 },
            ]
        );
        assert_eq!(s.mandatory_before(0), 0);
        assert_eq!(s.mandatory_before(3), 4);
        assert_eq!(s.budget_before(2), 5);
        assert_eq!(s.budget_before(3), 10);
    }

    #[test]
    fn composite_routes_on_the_window_boundary() {
        let t = handle("bananas");
        let idx = build_index(&t, IndexVariant::LinearTime { k: 1, opt: Some(5), g: None, chi: None }).unwrap();
        // sigma = 4, k = 1, n = 7: g = 4 * max(1, ceil(log2 ceil(log2 7))) = 8.
        assert_eq!(idx.resolved().g, 8);

        // m + B = 3 + 5 = 8 = g: routed to the windowed tree.
        let at_boundary = pattern("an*{1,5}a");
        assert_eq!(idx.route(&at_boundary), Route::Special);
        let (set, stats) = idx.query(&at_boundary).unwrap();
        assert_eq!(stats.routed_to, Route::Special);

        // Forcing the other route must give the same answer.
        let (forced, fstats) = idx.query_routed(&at_boundary, Some(Route::Fallback)).unwrap();
        assert_eq!(fstats.routed_to, Route::Fallback);
        assert_eq!(set, forced);

        // m + B = 9 > g: falls back.
        let over = pattern("ana*{1,5}s");
        assert_eq!(idx.route(&over), Route::Fallback);
        let (_, stats) = idx.query(&over).unwrap();
        assert_eq!(stats.routed_to, Route::Fallback);

        // Forcing an over-window pattern onto the windowed tree refuses.
        match idx.query_routed(&over, Some(Route::Special)) {
            Err(Error::SpecialWindow { needed: 9, g: 8 }) => {}
            other => panic!("expected SpecialWindow, got {other:?}"),
        }

        // Non-composite variants refuse forced routing outright.
        let simple = build_index(&t, IndexVariant::Simple).unwrap();
        assert!(matches!(
            simple.query_routed(&at_boundary, Some(Route::Special)),
            Err(Error::Param(_))
        ));
        assert!(matches!(
            idx.query_routed(&at_boundary, Some(Route::NotApplicable)),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn window_override_replaces_the_derived_g() {
        let t = handle("bananas");
        let small =
            build_index(&t, IndexVariant::LinearTime { k: 1, opt: Some(5), g: Some(3), chi: None }).unwrap();
        assert_eq!(small.resolved().g, 3);
        // m + B = 2 + 1 = 3 = g stays on the window; one more symbol falls back.
        assert_eq!(small.route(&pattern("a*a")), Route::Special);
        assert_eq!(small.route(&pattern("an*a")), Route::Fallback);
        let (set, _) = small.query(&pattern("a*a")).unwrap();
        assert_eq!(set.starts(), vec![2, 4]);

        assert!(matches!(
            build_index(&t, IndexVariant::LinearTime { k: 1, opt: None, g: Some(0), chi: None }),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn budgets_are_enforced_before_routing() {
        let t = handle("bananas");
        let idx = build_index(&t, IndexVariant::Tradeoff { beta: 1, k: 1, opt: None }).unwrap();
        match idx.query(&pattern("a*a*a")) {
            Err(Error::Budget { a: 2, opt: 0, k: 1, o: 1 }) => {}
            other => panic!("expected Budget, got {other:?}"),
        }
        match idx.query(&pattern("a*{0,3}a")) {
            Err(Error::Budget { a: 0, opt: 3, k: 1, o: 1 }) => {}
            other => panic!("expected Budget, got {other:?}"),
        }

        // The composite refuses even when the fallback could cope.
        let lt = build_index(&t, IndexVariant::LinearTime { k: 1, opt: Some(0), g: None, chi: None }).unwrap();
        match lt.query(&pattern("a*a*a")) {
            Err(Error::Budget { a: 2, opt: 0, k: 1, o: 0 }) => {}
            other => panic!("expected Budget, got {other:?}"),
        }

        // Unlimited variants accept any gap pattern.
        let simple = build_index(&t, IndexVariant::Simple).unwrap();
        assert!(simple.query(&pattern("a*{0,9}a*{0,9}a*{0,9}a")).is_ok());
    }

    #[test]
    fn tradeoff_rejects_beta_outside_the_branching_range() {
        let t = handle("bananas"); // sigma = 4
        for beta in [0, 4, 7] {
            match build_index(&t, IndexVariant::Tradeoff { beta, k: 1, opt: None }) {
                Err(Error::BetaRange { beta: b, sigma: 4 }) if b == beta => {}
                Err(other) => panic!("beta {beta}: expected BetaRange, got {other:?}"),
                Ok(_) => panic!("beta {beta}: expected BetaRange, got an index"),
            }
        }
        for beta in [1, 2, 3] {
            assert!(build_index(&t, IndexVariant::Tradeoff { beta, k: 1, opt: None }).is_ok());
        }
    }

    #[test]
    fn art_with_oversized_chi_degenerates_to_one_bottom_tree() {
        let t = handle("ab");
        let idx = build_index(&t, IndexVariant::ArtLinear { chi: Some(10) }).unwrap();
        match &idx.kind {
            IndexKind::ArtLinear(a) => {
                assert_eq!(a.art.bottom_roots(), &[ROOT]);
                assert!(a.top_id.is_none());
            }
            _ => unreachable!(),
        }
        let (set, _) = idx.query(&pattern("b")).unwrap();
        assert_eq!(starts_of(&set), vec![2]);
        let (set, _) = idx.query(&pattern("*b")).unwrap();
        assert_eq!(starts_of(&set), vec![1]);
    }

    #[test]
    fn art_crossing_costs_at_most_two_queries_per_piece() {
        let t = handle(GOLDEN_TEXT);
        let idx = build_index(&t, IndexVariant::ArtLinear { chi: None }).unwrap();
        let (set, stats) = idx.query(&pattern("ccd")).unwrap();
        assert_eq!(starts_of(&set), vec![9, 24]);
        assert_eq!(stats.subpattern_starts, vec![1]);
        assert!(stats.lcp_queries <= 2, "got {}", stats.lcp_queries);
    }

    #[test]
    fn trailing_optional_gaps_extend_spans_only_when_consumed() {
        let t = handle("abc");
        for variant in [IndexVariant::Simple, IndexVariant::ArtLinear { chi: None }] {
            let idx = build_index(&t, variant).unwrap();
            let (set, _) = idx.query(&pattern("ab*{0,2}")).unwrap();
            // The sentinel is never consumed, so the span stops at n.
            assert_eq!(spans_of(&set), vec![(1, 2), (1, 3)]);
            let (set, _) = idx.query(&pattern("*bc")).unwrap();
            assert_eq!(starts_of(&set), vec![1]);
        }
    }

    #[test]
    fn optional_convergence_is_deduplicated() {
        let t = handle("aaaa");
        let idx = build_index(&t, IndexVariant::Simple).unwrap();
        let p = pattern("a*{0,2}a");
        let (set, stats) = idx.query(&p).unwrap();
        assert_eq!(
            spans_of(&set),
            vec![(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
        );
        assert!(stats.dedup_removed > 0);

        // Without optionals the search never produces duplicates.
        let (_, stats) = idx.query(&pattern("a*a")).unwrap();
        assert_eq!(stats.dedup_removed, 0);
    }

    /// A pattern sampled from the text: interior symbols at a fixed
    /// stride are replaced by gaps that allow length 1, so the sampled
    /// window always matches.
    fn blanked_vlg(
        t: &IndexedText,
        start: usize,
        len: usize,
        stride: usize,
        kinds: &[(usize, usize)],
    ) -> GapPattern {
        let mut subs: Vec<Vec<Symbol>> = vec![Vec::new()];
        let mut gaps = Vec::new();
        for off in 0..len {
            let pos = start + off;
            if off > 0 && off + 1 < len && off % stride == 0 {
                gaps.push(kinds[(off / stride - 1) % kinds.len()]);
                subs.push(Vec::new());
            } else {
                subs.last_mut().unwrap().push(t.at(pos));
            }
        }
        GapPattern::new(subs, gaps).unwrap()
    }

    fn assert_matches_oracle(
        idx: &Index,
        t: &TextHandle,
        p: &GapPattern,
        set: &OccurrenceSet,
        label: &str,
    ) {
        let expected = oracle_match(t, p).unwrap();
        match set {
            OccurrenceSet::Starts(s) => {
                assert!(p.is_wildcard_only(), "{label}: starts imply wildcard-only");
                assert_eq!(s, &expected.starts, "{label}");
            }
            OccurrenceSet::Spans(s) => {
                assert!(!p.is_wildcard_only(), "{label}: spans imply a real gap");
                assert_eq!(s, &expected.spans, "{label}");
                for o in s {
                    let span = o.end + 1 - o.start;
                    assert!(span >= p.min_span() && span <= p.max_span(), "{label}");
                    assert!(o.end <= idx.n(), "{label}");
                }
            }
        }
    }

    fn assert_counter_bounds(
        p: &GapPattern,
        stats: &QueryStats,
        branch_factor: usize,
        label: &str,
    ) {
        assert_eq!(stats.subpattern_starts.len(), p.subpatterns().len(), "{label}");
        for (i, &starts) in stats.subpattern_starts.iter().enumerate() {
            let slack = (p.b_prefix(i) - p.a_prefix(i)) as u32;
            let bound = 2u128.pow(slack)
                * (branch_factor.max(1) as u128).pow(p.b_prefix(i) as u32);
            assert!(
                (starts as u128) <= bound,
                "{label}: subpattern {i} had {starts} starts, bound {bound}"
            );
        }
        if p.b_total() == p.a_total() {
            assert_eq!(stats.dedup_removed, 0, "{label}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn every_variant_matches_the_oracle(
            text in proptest::collection::vec(prop_oneof![Just(b'a'), Just(b'b'), Just(b'c')], 4..28),
            start_seed in 0usize..1000,
            len_seed in 2usize..9,
            stride in 2usize..4,
            kind_seed in 0usize..5,
        ) {
            let t: TextHandle = Arc::new(IndexedText::from_bytes(&text));
            let n = t.n();
            let sigma = t.sigma();
            let len = len_seed.min(n);
            let start = 1 + start_seed % (n - len + 1);
            let kind_sets: [&[(usize, usize)]; 5] = [
                &[(1, 1)],
                &[(0, 1)],
                &[(1, 2)],
                &[(0, 1), (1, 1)],
                &[(1, 2), (1, 1)],
            ];
            let p = blanked_vlg(&t, start, len, stride, kind_sets[kind_seed]);
            let a = p.a_total();
            let slack = p.b_total() - a;

            let mut variants = vec![
                (IndexVariant::Simple, sigma),
                (IndexVariant::ArtLinear { chi: None }, sigma),
                (IndexVariant::LinearTime { k: a.max(1), opt: Some(slack), g: None, chi: None }, sigma),
            ];
            if sigma >= 2 {
                variants.push((IndexVariant::Tradeoff { beta: 1, k: a, opt: Some(slack) }, 1));
            }
            if sigma >= 3 {
                variants.push((IndexVariant::Tradeoff { beta: 2, k: a, opt: Some(slack) }, 2));
            }

            for (variant, factor) in variants {
                let idx = build_index(&t, variant).unwrap();
                let label = format!("{variant:?} text={:?} p={}", String::from_utf8_lossy(&text), p.render());
                let (set, stats) = idx.query(&p).unwrap();
                assert_matches_oracle(&idx, &t, &p, &set, &label);
                let routed_factor = if stats.routed_to == Route::Special { 1 } else { factor };
                assert_counter_bounds(&p, &stats, routed_factor, &label);
                match variant {
                    IndexVariant::LinearTime { .. } => {
                        prop_assert!(idx.route(&p) != Route::NotApplicable);
                        // Both halves of the composite agree with the oracle.
                        let (fset, _) = idx.query_routed(&p, Some(Route::Fallback)).unwrap();
                        prop_assert_eq!(&set, &fset, "{}", label);
                        if p.max_span() <= idx.resolved().g {
                            let (sset, sstats) = idx.query_routed(&p, Some(Route::Special)).unwrap();
                            prop_assert_eq!(&set, &sset, "{}", label);
                            prop_assert_eq!(sstats.routed_to, Route::Special);
                        }
                    }
                    _ => prop_assert_eq!(idx.route(&p), Route::NotApplicable),
                }
            }
        }

        #[test]
        fn tradeoff_query_counts_respect_the_branching_bound(
            text in proptest::collection::vec(prop_oneof![Just(b'a'), Just(b'b'), Just(b'c'), Just(b'd')], 6..24),
            start_seed in 0usize..1000,
            len_seed in 3usize..7,
            beta in 1usize..3,
        ) {
            let t: TextHandle = Arc::new(IndexedText::from_bytes(&text));
            prop_assume!(t.sigma() > beta);
            let n = t.n();
            let len = len_seed.min(n);
            let start = 1 + start_seed % (n - len + 1);
            // Wildcard-only: every interior odd offset becomes a `*`.
            let p = blanked_vlg(&t, start, len, 2, &[(1, 1)]);
            prop_assume!(p.is_wildcard_only());
            let j = p.gap_count();

            let idx = build_index(&t, IndexVariant::Tradeoff { beta, k: j, opt: Some(0) }).unwrap();
            let (set, stats) = idx.query(&p).unwrap();
            assert_matches_oracle(&idx, &t, &p, &set, "tradeoff bound");

            let query_bound: usize = (0..=j).map(|i| beta.pow(i as u32)).sum();
            prop_assert!(stats.lcp_queries <= query_bound,
                "{} queries, bound {}", stats.lcp_queries, query_bound);
            prop_assert!(stats.active_location_peak <= query_bound);
            if beta == 1 {
                prop_assert_eq!(stats.branch_events, 0);
            }
        }
    }
}
