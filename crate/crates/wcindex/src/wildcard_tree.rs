//! Layered tries with wildcard branch points.
//!
//! A level-`k` structure over a prefix-free string collection stores the
//! collection in a compressed trie and classifies each vertex's child
//! edges as heavy or light: the `beta - 1` largest-weight children are
//! heavy. Every vertex with light continuations gets a STAR child whose
//! subtree is a level-`(k-1)` structure over those continuations with
//! their first symbol removed (labels inherited). Consuming a
//! single-symbol wildcard at an explicit vertex then needs only the STAR
//! child plus the first locations on the heavy edges, so a search
//! branches at most `beta` ways per wildcard; with `beta == 1` it never
//! branches at all.
//!
//! Light continuations of length one shrink to the empty string when the
//! first symbol is removed. For terminator-ended collections the only
//! such continuation is the terminator itself, which no wildcard can
//! match, so it is dropped. For truncated collections (fixed-length text
//! windows) the final symbol can be ordinary; its empty tail is kept as
//! labels attached directly to the STAR region root, so a wildcard that
//! consumes the final symbol of a stored string still reports it.

use std::collections::HashMap;
use std::sync::Arc;

use crate::decomposition::select_heavy;
use crate::error::{Error, Result};
use crate::text::{GapPattern, SubstringRef, TextHandle};
use crate::trie::{CompressedTrie, EdgeKind, Location, VertexId, ROOT};

/// Construction totals for one layered trie.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WildcardTreeStats {
    /// Strings stored across every level, duplicates merged per trie.
    pub stored_strings: u64,
    /// Stored strings per level, indexed by the number of STAR edges
    /// above the level's tries (entry 0 is the top trie).
    pub per_level_strings: Vec<u64>,
    /// Largest light height observed over all constructed level tries.
    pub lightheight_max: usize,
    /// Number of STAR regions joined during construction.
    pub star_regions: usize,
}

/// A compressed trie augmented with STAR subtrees so that patterns with
/// up to `k` single-symbol wildcards can be matched with bounded
/// branching.
#[derive(Debug)]
pub struct WildcardTree {
    trie: Arc<CompressedTrie>,
    beta: usize,
    k: usize,
    guard: u64,
    /// Heavy flags frozen at construction time, aligned with the arena.
    /// Queries must branch on these, not on a fresh decomposition: edge
    /// weights include STAR subtrees added later.
    heavy: Vec<bool>,
    /// STAR edges between the root and each vertex, aligned with the arena.
    wheight: Vec<u32>,
    /// STAR region roots in construction order.
    star_roots: Vec<VertexId>,
    stored_strings: u64,
    per_level_strings: Vec<u64>,
    lightheight_max: usize,
}

impl WildcardTree {
    pub fn trie(&self) -> &Arc<CompressedTrie> {
        &self.trie
    }

    /// Branching parameter `beta`.
    pub fn beta(&self) -> usize {
        self.beta
    }

    /// Wildcard budget `k`: the number of STAR levels below the top trie.
    pub fn max_wildcards(&self) -> usize {
        self.k
    }

    pub fn guard(&self) -> u64 {
        self.guard
    }

    /// Whether the edge into `v` was heavy when its region was built.
    pub fn is_construction_heavy(&self, v: VertexId) -> bool {
        self.heavy[v as usize]
    }

    /// Number of STAR edges between the root and `v`.
    pub fn wildcard_height(&self, v: VertexId) -> usize {
        self.wheight[v as usize] as usize
    }

    /// Roots of all STAR regions, in construction order.
    pub fn star_roots(&self) -> &[VertexId] {
        &self.star_roots
    }

    pub fn stats(&self) -> WildcardTreeStats {
        WildcardTreeStats {
            stored_strings: self.stored_strings,
            per_level_strings: self.per_level_strings.clone(),
            lightheight_max: self.lightheight_max,
            star_regions: self.star_roots.len(),
        }
    }

    /// Reconstructs the wrapper around an already-built layered trie
    /// (e.g. one loaded from a file). Star attachment never changes a
    /// region's own sub-structure, so re-running the per-region heavy
    /// selection reproduces exactly the flags frozen at construction
    /// time; all counters are recomputed the same way. The construction
    /// guard is re-derived from the stored set size.
    pub(crate) fn from_finalized(
        trie: Arc<CompressedTrie>,
        beta: usize,
        k: usize,
    ) -> Result<WildcardTree> {
        if beta == 0 {
            return Err(Error::Param(
                "branching parameter beta must be at least 1".into(),
            ));
        }
        let nv = trie.vertex_count();
        let mut wheight = vec![0u32; nv];
        let mut stack = vec![ROOT];
        while let Some(v) = stack.pop() {
            let w = wheight[v as usize];
            for &c in trie.children(v) {
                let star = trie.kind(c) == EdgeKind::Star;
                wheight[c as usize] = w + u32::from(star);
                stack.push(c);
            }
        }
        let mut per_level = vec![0u64; k + 1];
        let mut stored = 0u64;
        let mut hmax = 0usize;
        let mut heavy = vec![false; nv];
        let mut star_roots = Vec::new();
        region_pass(
            &trie,
            beta,
            ROOT,
            &wheight,
            &mut per_level,
            &mut stored,
            &mut hmax,
            &mut heavy,
            &mut star_roots,
        )?;
        let guard = default_guard(per_level[0] as usize, k);
        Ok(WildcardTree {
            trie,
            beta,
            k,
            guard,
            heavy,
            wheight,
            star_roots,
            stored_strings: stored,
            per_level_strings: per_level,
            lightheight_max: hmax,
        })
    }
}

/// One region of [`WildcardTree::from_finalized`]'s reconstruction:
/// repeats the builder's per-region accounting and heavy selection,
/// then recurses into star regions in construction order.
#[allow(clippy::too_many_arguments)]
fn region_pass(
    trie: &CompressedTrie,
    beta: usize,
    root: VertexId,
    wheight: &[u32],
    per_level: &mut [u64],
    stored: &mut u64,
    hmax: &mut usize,
    heavy: &mut [bool],
    star_roots: &mut Vec<VertexId>,
) -> Result<()> {
    let level = wheight[root as usize] as usize;
    if level >= per_level.len() {
        return Err(Error::Format(
            "trie has more wildcard levels than its descriptor claims".into(),
        ));
    }
    let counts = trie.region_leaf_counts(root);
    *stored = stored.saturating_add(u64::from(counts[0].1));
    per_level[level] += u64::from(counts[0].1);
    let weight: HashMap<VertexId, u32> = counts.iter().copied().collect();
    let mut lightdepth: HashMap<VertexId, usize> = HashMap::new();
    lightdepth.insert(root, 0);
    for &(v, _) in &counts {
        let subs: Vec<(VertexId, u32)> = trie
            .sub_children(v)
            .iter()
            .map(|&c| (c, weight[&c]))
            .collect();
        if !subs.is_empty() {
            let mask = select_heavy(&subs, beta - 1);
            let vd = lightdepth[&v];
            for (i, &(c, _)) in subs.iter().enumerate() {
                let ld = if mask[i] {
                    heavy[c as usize] = true;
                    vd
                } else {
                    vd + 1
                };
                lightdepth.insert(c, ld);
                *hmax = (*hmax).max(ld);
            }
        }
        if let Some(star) = trie.star_child(v) {
            star_roots.push(star);
            region_pass(
                trie, beta, star, wheight, per_level, stored, hmax, heavy, star_roots,
            )?;
        }
    }
    Ok(())
}

pub(crate) fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        (x - 1).ilog2() + 1
    }
}

/// Default construction guard: generous slack over the expected
/// `|C| * (1 + ceil(log2 |C|))^k` growth, saturating on overflow.
pub fn default_guard(set_size: usize, k: usize) -> u64 {
    let base = 1u128 + u128::from(ceil_log2(set_size.max(2)));
    let pow = base.checked_pow(k as u32).unwrap_or(u128::MAX);
    let total = (set_size as u128).saturating_mul(pow).saturating_mul(64);
    u64::try_from(total).unwrap_or(u64::MAX)
}

struct Builder {
    trie: CompressedTrie,
    beta: usize,
    guard: u64,
    stored: u64,
    per_level: Vec<u64>,
    hmax: usize,
    /// Vertices whose incoming edge is heavy (true entries only).
    heavy: HashMap<VertexId, bool>,
    star_roots: Vec<VertexId>,
}

impl Builder {
    /// Inserts one region's strings, freezes its heavy/light split, and
    /// recurses into a STAR region for every vertex that has light
    /// continuations. `eps_labels` are labels of empty-string members,
    /// attached to the region root.
    fn build_level(
        &mut self,
        region_root: VertexId,
        items: Vec<(SubstringRef, Vec<u32>)>,
        eps_labels: Vec<u32>,
        levels_left: usize,
        level_index: usize,
    ) -> Result<()> {
        for (span, labels) in &items {
            self.trie.insert_string(region_root, *span, labels)?;
        }
        if !eps_labels.is_empty() {
            self.trie.attach_labels(region_root, &eps_labels);
        }

        // Region snapshot: preorder vertices with region-local leaf counts.
        let counts = self.trie.region_leaf_counts(region_root);
        debug_assert_eq!(counts[0].0, region_root);
        self.stored = self.stored.saturating_add(u64::from(counts[0].1));
        self.per_level[level_index] += u64::from(counts[0].1);
        if self.stored > self.guard {
            return Err(Error::Guard {
                stored: self.stored,
                guard: self.guard,
            });
        }

        // Freeze the heavy/light split from region-local weights and
        // track the region's light height.
        let weight: HashMap<VertexId, u32> = counts.iter().copied().collect();
        let mut lightdepth: HashMap<VertexId, usize> = HashMap::new();
        lightdepth.insert(region_root, 0);
        for &(v, _) in &counts {
            let subs: Vec<(VertexId, u32)> = self
                .trie
                .sub_children(v)
                .iter()
                .map(|&c| (c, weight[&c]))
                .collect();
            if subs.is_empty() {
                continue;
            }
            let mask = select_heavy(&subs, self.beta - 1);
            let vd = lightdepth[&v];
            for (i, &(c, _)) in subs.iter().enumerate() {
                let ld = if mask[i] {
                    self.heavy.insert(c, true);
                    vd
                } else {
                    vd + 1
                };
                lightdepth.insert(c, ld);
                self.hmax = self.hmax.max(ld);
            }
        }

        if levels_left == 0 {
            return Ok(());
        }

        for &(v, _) in &counts {
            let (trie, heavy) = (&self.trie, &self.heavy);
            if trie.sub_children(v).is_empty() {
                continue;
            }
            let light_items = trie.lightstrings_suffixes(v, |c| heavy.contains_key(&c));
            // One-symbol light continuations shrink to the empty string;
            // keep them as labels on the STAR region root unless the
            // symbol is the terminator (no wildcard matches it).
            let mut eps = Vec::new();
            for &c in trie.sub_children(v) {
                if heavy.contains_key(&c) || !trie.is_leaf(c) || trie.edge_len(c) != 1 {
                    continue;
                }
                let first = trie.first_symbol(c).expect("child edge has a label");
                if !first.is_sentinel() {
                    eps.extend_from_slice(trie.labels(c));
                }
            }
            if light_items.is_empty() && eps.is_empty() {
                continue;
            }
            let star = self.trie.add_star_child(v);
            self.star_roots.push(star);
            self.build_level(star, light_items, eps, levels_left - 1, level_index + 1)?;
        }
        Ok(())
    }
}

/// Builds a level-`k` layered trie over the labeled text spans `items`.
/// The spans must form a prefix-free set. `guard` caps the total number
/// of stored strings across all levels (a resource refusal, not a
/// correctness limit); `None` uses [`default_guard`].
pub fn build_wildcard_tree(
    text: &TextHandle,
    items: Vec<(SubstringRef, Vec<u32>)>,
    beta: usize,
    k: usize,
    guard: Option<u64>,
) -> Result<WildcardTree> {
    if beta == 0 {
        return Err(Error::Param(
            "branching parameter beta must be at least 1".into(),
        ));
    }
    if items.is_empty() {
        return Err(Error::EmptyStringSet);
    }
    let sigma = text.sigma();
    if beta >= sigma && sigma > 0 {
        log::warn!(
            "beta={beta} >= sigma={sigma}: every child of every vertex is heavy, \
             so STAR subtrees are built but wildcard branching gains nothing"
        );
    }
    let guard = guard.unwrap_or_else(|| default_guard(items.len(), k));
    let mut b = Builder {
        trie: CompressedTrie::new_empty(text.clone()),
        beta,
        guard,
        stored: 0,
        per_level: vec![0; k + 1],
        hmax: 0,
        heavy: HashMap::new(),
        star_roots: Vec::new(),
    };
    b.build_level(ROOT, items, Vec::new(), k, 0)?;
    let mut trie = b.trie;
    trie.finalize();

    let nv = trie.vertex_count();
    let mut heavy = vec![false; nv];
    for &v in b.heavy.keys() {
        heavy[v as usize] = true;
    }
    let mut wheight = vec![0u32; nv];
    let mut stack = vec![ROOT];
    while let Some(v) = stack.pop() {
        let w = wheight[v as usize];
        for &c in trie.children(v) {
            let star = trie.kind(c) == EdgeKind::Star;
            wheight[c as usize] = w + u32::from(star);
            stack.push(c);
        }
    }

    Ok(WildcardTree {
        trie: Arc::new(trie),
        beta,
        k,
        guard,
        heavy,
        wheight,
        star_roots: b.star_roots,
        stored_strings: b.stored,
        per_level_strings: b.per_level,
        lightheight_max: b.hmax,
    })
}

/// Counters from one raw layered search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RawSearchStats {
    /// Wildcard consumptions that produced more than one target.
    pub branch_events: usize,
    /// Largest number of simultaneously active locations.
    pub active_location_peak: usize,
    /// Total locations materialized (the root start plus every wildcard
    /// target). Bounded by `sum over i in 0..=j of beta^i`.
    pub locations_explored: usize,
}

/// All locations a single wildcard can move `loc` to.
pub(crate) fn wildcard_step(wt: &WildcardTree, loc: Location, out: &mut Vec<Location>) {
    let trie = wt.trie();
    if !trie.is_explicit(loc) {
        // Mid-edge the wildcard matches the next edge symbol, unless
        // that symbol is the terminator.
        let span = trie.edge_span(loc.vertex).expect("implicit locations sit on labeled edges");
        let next = trie.text().at(span.start + loc.offset as usize);
        if !next.is_sentinel() {
            out.push(Location {
                vertex: loc.vertex,
                offset: loc.offset + 1,
            });
        }
        return;
    }
    let v = loc.vertex;
    // Light continuations were re-rooted one symbol shorter under the
    // STAR child, so landing there consumes the wildcard against every
    // light edge at once. Heavy edges are entered directly.
    if let Some(star) = trie.star_child(v) {
        out.push(trie.location_of(star));
    }
    for &c in trie.sub_children(v) {
        if !wt.is_construction_heavy(c) {
            continue;
        }
        let first = trie.first_symbol(c).expect("child edge has a label");
        if first.is_sentinel() {
            continue;
        }
        out.push(trie.first_location_on_edge(c));
    }
}

/// Matches `p` — whose gaps must all be single mandatory wildcards —
/// against the stored collection. Returns the terminal locations; the
/// caller collects occurrences below them. Requires `p` to use at most
/// the tree's wildcard budget.
pub fn wildcard_tree_search(
    wt: &WildcardTree,
    p: &GapPattern,
) -> Result<(Vec<Location>, RawSearchStats)> {
    if !p.is_wildcard_only() {
        return Err(Error::Pattern(
            "the raw layered search handles single mandatory wildcards only".into(),
        ));
    }
    let j = p.gap_count();
    if j > wt.max_wildcards() {
        return Err(Error::Budget {
            a: j,
            opt: 0,
            k: wt.max_wildcards(),
            o: 0,
        });
    }
    let trie = wt.trie();
    let subs = p.subpatterns();
    let mut stats = RawSearchStats {
        locations_explored: 1,
        ..RawSearchStats::default()
    };
    let mut active: Vec<Location> = Vec::new();
    let (stop, matched) = trie.descend(trie.root_location(), &subs[0]);
    if matched == subs[0].len() {
        active.push(stop);
    }
    stats.active_location_peak = stats.active_location_peak.max(active.len());
    for piece in &subs[1..] {
        let mut targets = Vec::new();
        for &loc in &active {
            let before = targets.len();
            wildcard_step(wt, loc, &mut targets);
            if targets.len() - before > 1 {
                stats.branch_events += 1;
            }
        }
        stats.locations_explored += targets.len();
        stats.active_location_peak = stats.active_location_peak.max(targets.len());
        active = targets
            .into_iter()
            .filter_map(|l| {
                let (stop, m) = trie.descend(l, piece);
                (m == piece.len()).then_some(stop)
            })
            .collect();
        stats.active_location_peak = stats.active_location_peak.max(active.len());
    }
    Ok((active, stats))
}
