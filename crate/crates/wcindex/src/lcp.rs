//! Longest-common-prefix queries over a collection of registered tries.
//!
//! The structure owns a reference suffix tree over the indexed text and a
//! nearest-common-ancestor table for it. Client tries (whole tries, or
//! single STAR-free regions of larger tries) register as numbered
//! collection members. A pattern is preprocessed once; afterwards, for
//! any suffix of the pattern, any registered trie, and any start location
//! in it, `lcp_query` returns where a plain descent of that suffix would
//! stop — without rescanning the suffix symbol by symbol.
//!
//! Mechanics: each registered region carries a heavy-path decomposition
//! (every vertex's largest-weight child continues its path). One query
//! walks a chain of heavy paths. Per path, the number of symbols the
//! suffix follows it is computed with a single nearest-common-ancestor
//! lookup (via the precomputed per-suffix anchors); leaving a path always
//! consumes exactly one symbol on a light edge, so a region with `c`
//! leaves is crossed in at most `ceil(log2 c) + 1` hops. Only the final
//! stop needs a depth-to-vertex resolution on its path's explicit-vertex
//! list, reported as `used_predecessor`.
//!
//! Registered tries whose text differs from the reference text fall back
//! to direct symbol comparison for the per-path distance; those
//! comparisons are counted separately in `fallback_comparisons`.

use crate::decomposition::{select_heavy, NcaStructure};
use crate::error::{Error, Result};
use crate::text::{SubstringRef, Symbol, TextHandle};
use crate::trie::{build_suffix_tree, CompressedTrie, Location, VertexId, ROOT};
use std::collections::{HashMap, HashSet};
use std::sync::Arc;

/// Unrooted-query support level of a registered trie.
///
/// Both modes answer every query; `Full` additionally precomputes a
/// symbol-indexed jump table for leaving a heavy path, where `Light`
/// re-derives the exit edge from the child list at query time. The
/// promised hop bound (`ceil(log2 leaves) + 1`) is part of the `Light`
/// contract.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum LcpMode {
    Full,
    Light,
}

pub type TrieId = usize;

/// Result of one LCP query.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LcpAnswer {
    /// Where the descent of the suffix stops; equals the plain
    /// `descend` stop location.
    pub location: Location,
    /// Heavy-path transitions taken (light edges entered).
    pub hops: usize,
    /// Whether the final stop needed a lookup over the last path's
    /// explicit-vertex depth list.
    pub used_predecessor: bool,
    /// Direct symbol comparisons spent on tries whose backing text is
    /// not the reference text (0 for same-text tries).
    pub fallback_comparisons: usize,
}

/// One maximal heavy path: explicit vertices in strictly increasing
/// region depth, plus the span anchor of its deepest vertex (a leaf),
/// whose representative string spells the whole path.
struct HeavyPath {
    vertices: Vec<VertexId>,
    rdepths: Vec<u32>,
    leaf_repr: u32,
    leaf_rdepth: u32,
}

struct RegisteredTrie {
    trie: Arc<CompressedTrie>,
    region_root: VertexId,
    mode: LcpMode,
    /// Trie text is the reference text (anchors and NCA usable).
    same_text: bool,
    region_leaves: usize,
    /// Region vertex -> index into `paths`.
    path_of: HashMap<VertexId, u32>,
    paths: Vec<HeavyPath>,
    /// FULL mode only: (vertex, first symbol code) -> child.
    jump: Option<HashMap<(VertexId, u32), VertexId>>,
    /// Vertices that close the region from below: they act as region
    /// leaves, and queries never step past them even though the trie
    /// continues underneath.
    boundary: HashSet<VertexId>,
}

/// Per-suffix anchor: the longest prefix of the suffix occurring in the
/// reference text, and one text position where it does.
#[derive(Copy, Clone, Debug)]
struct Anchor {
    mu: u32,
    pos: u32,
}

/// A pattern readied for suffix LCP queries: one anchor per suffix,
/// derived by descending each suffix in the reference suffix tree.
pub struct PreprocessedPattern {
    syms: Vec<Symbol>,
    anchors: Vec<Anchor>,
}

impl PreprocessedPattern {
    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    /// Longest prefix of the suffix starting at `suffix_start` (1-based)
    /// that occurs in the reference text.
    pub fn anchor_mu(&self, suffix_start: usize) -> usize {
        self.anchors[suffix_start - 1].mu as usize
    }

    fn symbol(&self, pos: usize) -> Symbol {
        self.syms[pos - 1]
    }
}

pub struct LcpStructure {
    text: TextHandle,
    reference: Arc<CompressedTrie>,
    nca: NcaStructure,
    /// Text position (1-based, sentinel included) -> its suffix leaf.
    leaf_of_pos: Vec<VertexId>,
    tries: Vec<RegisteredTrie>,
}

impl LcpStructure {
    /// Builds the structure, including its own reference suffix tree.
    pub fn new(text: &TextHandle) -> LcpStructure {
        Self::with_reference(text, Arc::new(build_suffix_tree(text)))
    }

    /// Builds the structure around an existing suffix tree of `text`
    /// (callers that already have one avoid a second construction).
    pub fn with_reference(text: &TextHandle, reference: Arc<CompressedTrie>) -> LcpStructure {
        assert_eq!(
            reference.leaf_count(),
            text.len_with_sentinel(),
            "reference must be the suffix tree of the text"
        );
        let nca = NcaStructure::new(&reference);
        let mut leaf_of_pos = vec![0u32; text.len_with_sentinel() + 1];
        for v in 0..reference.vertex_count() as u32 {
            for &label in reference.labels(v) {
                leaf_of_pos[label as usize] = v;
            }
        }
        LcpStructure {
            text: text.clone(),
            reference,
            nca,
            leaf_of_pos,
            tries: Vec::new(),
        }
    }

    pub fn text(&self) -> &TextHandle {
        &self.text
    }

    pub fn reference(&self) -> &Arc<CompressedTrie> {
        &self.reference
    }

    /// Registers a whole trie as a collection member.
    pub fn register_trie(&mut self, trie: Arc<CompressedTrie>, mode: LcpMode) -> Result<TrieId> {
        self.register_region(trie, ROOT, mode)
    }

    /// Registers the STAR-free region of `trie` rooted at `region_root`
    /// (the vertices reachable without crossing STAR edges). Every
    /// string stored in the region must be a substring of the reference
    /// text.
    pub fn register_region(
        &mut self,
        trie: Arc<CompressedTrie>,
        region_root: VertexId,
        mode: LcpMode,
    ) -> Result<TrieId> {
        self.register_region_bounded(trie, region_root, mode, HashSet::new())
    }

    /// As [`register_region`](Self::register_region), additionally
    /// closing the region at the `boundary` vertices: they become region
    /// leaves and queries stop there instead of stepping onto their
    /// child edges. This carves the top part of a weight decomposition
    /// out of a trie whose lower subtrees are registered separately.
    pub fn register_region_bounded(
        &mut self,
        trie: Arc<CompressedTrie>,
        region_root: VertexId,
        mode: LcpMode,
        boundary: HashSet<VertexId>,
    ) -> Result<TrieId> {
        if region_root as usize >= trie.vertex_count() {
            return Err(Error::InvalidVertex {
                vertex: region_root as usize,
            });
        }
        let same_text = Arc::ptr_eq(trie.text(), &self.text)
            || trie.text().symbols() == self.text.symbols();
        let counts = trie.region_leaf_counts_until(region_root, |v| boundary.contains(&v));
        let weight: HashMap<VertexId, u32> = counts.iter().copied().collect();
        let region_leaves = weight[&region_root] as usize;
        if !same_text {
            // Verify every stored string occurs in the reference text.
            for &(v, _) in &counts {
                if !trie.is_leaf(v) && !boundary.contains(&v) {
                    continue;
                }
                let span = SubstringRef::new(
                    trie.repr_start(v),
                    trie.repr_start(v) + trie.rdepth(v) - 1,
                );
                let s = trie.text().substring(span);
                let (_, matched) = self.reference.descend(self.reference.root_location(), s);
                if matched < s.len() {
                    return Err(Error::NotSubstring {
                        label: trie.first_label_below(v) as usize,
                    });
                }
            }
        }
        // Heavy child per vertex from region-local weights; every light
        // (or region-root) vertex starts a path that follows heavy
        // children down to a leaf.
        let mut heavy_child: HashMap<VertexId, VertexId> = HashMap::new();
        for &(v, _) in &counts {
            if boundary.contains(&v) {
                continue;
            }
            let kids: Vec<(VertexId, u32)> = trie
                .sub_children(v)
                .iter()
                .map(|&c| (c, weight[&c]))
                .collect();
            let mask = select_heavy(&kids, 1);
            for (&(c, _), &m) in kids.iter().zip(mask.iter()) {
                if m {
                    heavy_child.insert(v, c);
                }
            }
        }
        let mut paths = Vec::new();
        let mut path_of = HashMap::new();
        for &(v, _) in &counts {
            let starts_path =
                v == region_root || heavy_child.get(&trie.parent(v).unwrap()) != Some(&v);
            if !starts_path {
                continue;
            }
            let mut vertices = vec![v];
            let mut u = v;
            while let Some(&hc) = heavy_child.get(&u) {
                vertices.push(hc);
                u = hc;
            }
            let rdepths = vertices.iter().map(|&x| trie.rdepth(x) as u32).collect();
            let leaf = *vertices.last().unwrap();
            let idx = paths.len() as u32;
            for &x in &vertices {
                path_of.insert(x, idx);
            }
            paths.push(HeavyPath {
                vertices,
                rdepths,
                leaf_repr: trie.repr_start(leaf) as u32,
                leaf_rdepth: trie.rdepth(leaf) as u32,
            });
        }
        let jump = (mode == LcpMode::Full).then(|| {
            let mut table = HashMap::new();
            for &(v, _) in &counts {
                if boundary.contains(&v) {
                    continue;
                }
                for &c in trie.sub_children(v) {
                    let sym = trie.first_symbol(c).expect("sub child has a label");
                    table.insert((v, sym.code()), c);
                }
            }
            table
        });
        self.tries.push(RegisteredTrie {
            trie,
            region_root,
            mode,
            same_text,
            region_leaves,
            path_of,
            paths,
            jump,
            boundary,
        });
        Ok(self.tries.len() - 1)
    }

    pub fn mode(&self, id: TrieId) -> Option<LcpMode> {
        self.tries.get(id).map(|r| r.mode)
    }

    /// Leaf count of the registered region (the `|C_i|` of hop bounds).
    pub fn registered_leaf_count(&self, id: TrieId) -> Option<usize> {
        self.tries.get(id).map(|r| r.region_leaves)
    }

    /// Readies `x` for suffix queries: descends every suffix of `x` in
    /// the reference tree once, recording how far it matches and a text
    /// position where that prefix occurs.
    pub fn preprocess_pattern(&self, x: &[Symbol]) -> PreprocessedPattern {
        let mut anchors = Vec::with_capacity(x.len() + 1);
        for i in 0..x.len() {
            let (stop, matched) = self
                .reference
                .descend(self.reference.root_location(), &x[i..]);
            let pos = if matched == 0 {
                0
            } else {
                // Every leaf below the stop shares the matched prefix.
                self.reference.first_label_below(stop.vertex)
            };
            anchors.push(Anchor {
                mu: matched as u32,
                pos,
            });
        }
        anchors.push(Anchor { mu: 0, pos: 0 }); // empty suffix
        PreprocessedPattern {
            syms: x.to_vec(),
            anchors,
        }
    }

    /// Longest common prefix of the pattern tail `x[j..]` (clamped to
    /// `limit` symbols) and the trie-text span starting at `start` of
    /// length `len`. Constant-time via anchor + NCA when the trie shares
    /// the reference text, symbol-by-symbol otherwise.
    #[allow(clippy::too_many_arguments)]
    fn tail_vs_span(
        &self,
        pp: &PreprocessedPattern,
        j: usize,
        reg: &RegisteredTrie,
        start: usize,
        len: usize,
        limit: usize,
        fallback: &mut usize,
    ) -> usize {
        let len = len.min(limit);
        if len == 0 {
            return 0;
        }
        if !reg.same_text {
            let other = reg.trie.text();
            let mut d = 0;
            while d < len {
                *fallback += 1;
                if pp.symbol(j + d) != other.at(start + d) {
                    break;
                }
                d += 1;
            }
            return d;
        }
        let anchor = pp.anchors[j - 1];
        if anchor.mu == 0 {
            return 0;
        }
        let a = self.leaf_of_pos[anchor.pos as usize];
        let b = self.leaf_of_pos[start];
        let shared = self
            .nca
            .nca(&self.reference, a, b)
            .expect("leaves of the reference tree");
        let l = self.reference.depth(shared);
        (anchor.mu as usize).min(l).min(len)
    }

    /// Where the descent of `x[suffix_start..]` from `loc` in registered
    /// trie `id` stops, with hop and predecessor accounting. `loc` must
    /// lie in the registered region; the root location of the region is
    /// always accepted (rooted query).
    pub fn lcp_query(
        &self,
        pp: &PreprocessedPattern,
        suffix_start: usize,
        id: TrieId,
        loc: Location,
    ) -> Result<LcpAnswer> {
        self.lcp_query_bounded(pp, suffix_start, pp.len() + 1, id, loc)
    }

    /// As [`lcp_query`](Self::lcp_query) for the pattern piece
    /// `x[suffix_start .. suffix_end]` (half-open end, 1-based), letting
    /// one preprocessing serve sub-piece descents.
    pub fn lcp_query_bounded(
        &self,
        pp: &PreprocessedPattern,
        suffix_start: usize,
        suffix_end: usize,
        id: TrieId,
        mut loc: Location,
    ) -> Result<LcpAnswer> {
        let reg = self
            .tries
            .get(id)
            .ok_or(Error::NotRegistered { trie: id })?;
        if suffix_start < 1 || suffix_end < suffix_start || suffix_end > pp.len() + 1 {
            return Err(Error::Param(format!(
                "suffix range {}..{} outside pattern of length {}",
                suffix_start,
                suffix_end,
                pp.len()
            )));
        }
        let trie = &reg.trie;
        if !reg.path_of.contains_key(&loc.vertex) {
            return Err(Error::InvalidVertex {
                vertex: loc.vertex as usize,
            });
        }
        let edge_len = trie.edge_len(loc.vertex);
        let min_offset = if loc.vertex == reg.region_root { edge_len } else { 1 };
        if (loc.offset as usize) > edge_len || (loc.offset as usize) < min_offset {
            return Err(Error::InvalidVertex {
                vertex: loc.vertex as usize,
            });
        }
        let mut j = suffix_start;
        let mut hops = 0usize;
        let mut used_predecessor = false;
        let mut fallback = 0usize;
        loop {
            let remaining = suffix_end - j;
            if remaining == 0 {
                break;
            }
            let path = &reg.paths[reg.path_of[&loc.vertex] as usize];
            let d = trie.location_rdepth(loc);
            let h = self.tail_vs_span(
                pp,
                j,
                reg,
                path.leaf_repr as usize + d,
                path.leaf_rdepth as usize - d,
                remaining,
                &mut fallback,
            );
            let stop_rdepth = (d + h) as u32;
            if h == 0 {
                // Stop is the current location; maybe leave on a light
                // edge without touching the depth list.
                if h == remaining || !trie.is_explicit(loc) {
                    break;
                }
            }
            let (stop, explicit) = if h == 0 {
                (loc, true)
            } else {
                locate_on_path(trie, path, stop_rdepth)
            };
            if h == remaining || !explicit {
                // Suffix exhausted on this path, or diverged mid-edge.
                loc = stop;
                used_predecessor = h > 0;
                break;
            }
            // Explicit stop with suffix left: the next symbol either
            // leaves on a light edge (one-symbol step onto the next
            // path) or matches nothing. Boundary vertices end the
            // region, so nothing is stepped onto below them.
            let sym = pp.symbol(j + h);
            let child = if reg.boundary.contains(&stop.vertex) {
                None
            } else {
                match &reg.jump {
                    Some(table) => table.get(&(stop.vertex, sym.code())).copied(),
                    None => trie.child_by_symbol(stop.vertex, sym),
                }
            };
            match child {
                None => {
                    loc = stop;
                    used_predecessor = h > 0;
                    break;
                }
                Some(c) => {
                    debug_assert_ne!(
                        reg.path_of.get(&c),
                        reg.path_of.get(&stop.vertex),
                        "maximal per-path distance cannot continue heavy"
                    );
                    loc = trie.first_location_on_edge(c);
                    j += h + 1;
                    hops += 1;
                }
            }
        }
        Ok(LcpAnswer {
            location: loc,
            hops,
            used_predecessor,
            fallback_comparisons: fallback,
        })
    }
}

/// The location at region depth `rdepth` along `path`: an explicit
/// vertex when the depth list contains it, otherwise a mid-edge point.
fn locate_on_path(trie: &CompressedTrie, path: &HeavyPath, rdepth: u32) -> (Location, bool) {
    match path.rdepths.binary_search(&rdepth) {
        Ok(i) => (trie.location_of(path.vertices[i]), true),
        Err(0) => {
            // Above the first explicit vertex: on its incoming edge.
            let v = path.vertices[0];
            let top = (trie.rdepth(v) - trie.edge_len(v)) as u32;
            (
                Location {
                    vertex: v,
                    offset: rdepth - top,
                },
                false,
            )
        }
        Err(i) => {
            let v = path.vertices[i];
            (
                Location {
                    vertex: v,
                    offset: rdepth - path.rdepths[i - 1],
                },
                false,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{symbols_from_bytes, IndexedText};
    use crate::trie::build_trie;
    use proptest::prelude::*;

    fn handle(s: &str) -> TextHandle {
        Arc::new(IndexedText::from_str(s))
    }

    fn syms(s: &str) -> Vec<Symbol> {
        symbols_from_bytes(s.as_bytes())
    }

    /// Every explicit location of a region, plus each mid-edge point.
    fn all_locations(trie: &CompressedTrie, region_root: VertexId) -> Vec<Location> {
        let mut out = vec![trie.location_of(region_root)];
        let mut stack = vec![region_root];
        while let Some(v) = stack.pop() {
            for &c in trie.sub_children(v) {
                for off in 1..=trie.edge_len(c) as u32 {
                    out.push(Location { vertex: c, offset: off });
                }
                stack.push(c);
            }
        }
        out
    }

    #[test]
    fn rooted_query_matches_descend() {
        let t = handle("bananas");
        let mut lcp = LcpStructure::new(&t);
        let st = lcp.reference().clone();
        let id = lcp.register_trie(st.clone(), LcpMode::Full).unwrap();
        let pp = lcp.preprocess_pattern(&syms("ana"));
        let ans = lcp.lcp_query(&pp, 1, id, st.root_location()).unwrap();
        let (want, matched) = st.descend(st.root_location(), &syms("ana"));
        assert_eq!(matched, 3);
        assert_eq!(ans.location, want);
        assert_eq!(st.location_depth(ans.location), 3);
        assert_eq!(ans.fallback_comparisons, 0);
    }

    #[test]
    fn empty_suffix_returns_start_location() {
        let t = handle("bananas");
        let mut lcp = LcpStructure::new(&t);
        let st = lcp.reference().clone();
        let id = lcp.register_trie(st.clone(), LcpMode::Light).unwrap();
        let pp = lcp.preprocess_pattern(&syms("ana"));
        for loc in all_locations(&st, ROOT) {
            let ans = lcp.lcp_query(&pp, 4, id, loc).unwrap();
            assert_eq!(ans.location, loc);
            assert_eq!(ans.hops, 0);
            assert!(!ans.used_predecessor);
        }
    }

    #[test]
    fn absent_symbols_stop_at_depth_zero() {
        let t = handle("bananas");
        let mut lcp = LcpStructure::new(&t);
        let st = lcp.reference().clone();
        let id = lcp.register_trie(st.clone(), LcpMode::Light).unwrap();
        let pp = lcp.preprocess_pattern(&syms("zzz"));
        assert_eq!(pp.anchor_mu(1), 0);
        let ans = lcp.lcp_query(&pp, 1, id, st.root_location()).unwrap();
        assert_eq!(ans.location, st.root_location());
        assert_eq!(ans.hops, 0);
        // Empty pattern preprocesses fine and only serves empty suffixes.
        let pp = lcp.preprocess_pattern(&[]);
        assert_eq!(pp.len(), 0);
        let ans = lcp.lcp_query(&pp, 1, id, st.root_location()).unwrap();
        assert_eq!(ans.location, st.root_location());
    }

    #[test]
    fn single_string_trie_has_one_path() {
        let t = handle("bananas");
        let mut lcp = LcpStructure::new(&t);
        // The single string "anana" (positions 2..6).
        let single = Arc::new(
            build_trie(&t, vec![(SubstringRef::new(2, 6), vec![2])]).unwrap(),
        );
        let id = lcp.register_trie(single.clone(), LcpMode::Light).unwrap();
        assert_eq!(lcp.registered_leaf_count(id), Some(1));
        let pp = lcp.preprocess_pattern(&syms("nana"));
        for loc in all_locations(&single, ROOT) {
            for start in 1..=5 {
                let ans = lcp.lcp_query(&pp, start, id, loc).unwrap();
                assert!(ans.hops <= 1);
                let (want, _) = single.descend(loc, &syms("nana")[start - 1..]);
                assert_eq!(ans.location, want);
            }
        }
    }

    #[test]
    fn mid_edge_divergence_keeps_location() {
        let t = handle("bananas");
        let mut lcp = LcpStructure::new(&t);
        let st = lcp.reference().clone();
        let id = lcp.register_trie(st.clone(), LcpMode::Light).unwrap();
        // Location at depth 2 inside the "ana" edge path: descend "an".
        let (loc, m) = st.descend(st.root_location(), &syms("an"));
        assert_eq!(m, 2);
        assert!(!st.is_explicit(loc));
        let pp = lcp.preprocess_pattern(&syms("x"));
        let ans = lcp.lcp_query(&pp, 1, id, loc).unwrap();
        assert_eq!(ans.location, loc);
        assert_eq!(ans.hops, 0);
        assert!(!ans.used_predecessor);
    }

    #[test]
    fn foreign_text_tries_fall_back_to_comparisons() {
        let t = handle("bananas");
        let mut lcp = LcpStructure::new(&t);
        // A trie over a different text storing "ana" and "nas", both
        // substrings of bananas.
        let other = handle("anas");
        let foreign = Arc::new(
            build_trie(
                &other,
                vec![
                    (SubstringRef::new(1, 3), vec![1]),
                    (SubstringRef::new(2, 4), vec![2]),
                ],
            )
            .unwrap(),
        );
        let id = lcp.register_trie(foreign.clone(), LcpMode::Light).unwrap();
        let pp = lcp.preprocess_pattern(&syms("anan"));
        let ans = lcp.lcp_query(&pp, 1, id, foreign.root_location()).unwrap();
        let (want, _) = foreign.descend(foreign.root_location(), &syms("anan"));
        assert_eq!(ans.location, want);
        assert!(ans.fallback_comparisons > 0);
        // A trie storing a string absent from bananas is refused.
        let bad = Arc::new(
            build_trie(&handle("xyz"), vec![(SubstringRef::new(1, 3), vec![7])]).unwrap(),
        );
        let err = lcp.register_trie(bad, LcpMode::Light).unwrap_err();
        assert!(matches!(err, Error::NotSubstring { label: 7 }));
    }

    #[test]
    fn unregistered_and_invalid_inputs_are_refused() {
        let t = handle("ab");
        let mut lcp = LcpStructure::new(&t);
        let st = lcp.reference().clone();
        let id = lcp.register_trie(st.clone(), LcpMode::Light).unwrap();
        let pp = lcp.preprocess_pattern(&syms("a"));
        assert!(matches!(
            lcp.lcp_query(&pp, 1, id + 1, st.root_location()),
            Err(Error::NotRegistered { .. })
        ));
        assert!(matches!(
            lcp.lcp_query(&pp, 1, id, Location { vertex: 999, offset: 1 }),
            Err(Error::InvalidVertex { .. })
        ));
        assert!(matches!(
            lcp.lcp_query(&pp, 3, id, st.root_location()),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn bounded_region_stops_at_the_boundary() {
        let t = handle("bananas");
        let mut lcp = LcpStructure::new(&t);
        let st = lcp.reference().clone();
        let (a_loc, m) = st.descend(st.root_location(), &syms("a"));
        assert_eq!(m, 1);
        assert!(st.is_explicit(a_loc));
        let a = a_loc.vertex;
        let top = lcp
            .register_region_bounded(st.clone(), ROOT, LcpMode::Full, HashSet::from([a]))
            .unwrap();
        let bottom = lcp.register_region(st.clone(), a, LcpMode::Light).unwrap();
        // The top region treats the boundary vertex as a leaf: matching
        // stops at its canonical location even though the suffix
        // continues below.
        let pp = lcp.preprocess_pattern(&syms("anas"));
        let top_ans = lcp.lcp_query(&pp, 1, top, st.root_location()).unwrap();
        assert_eq!(top_ans.location, st.location_of(a));
        // The region below the boundary picks up the rest.
        let bot_ans = lcp.lcp_query(&pp, 2, bottom, st.location_of(a)).unwrap();
        let (want, wm) = st.descend(st.root_location(), &syms("anas"));
        assert_eq!(wm, 4);
        assert_eq!(bot_ans.location, want);
        // Locations below the boundary are not part of the top region.
        let below = Location {
            vertex: st.sub_children(a)[0],
            offset: 1,
        };
        assert!(matches!(
            lcp.lcp_query(&pp, 1, top, below),
            Err(Error::InvalidVertex { .. })
        ));
    }

    #[test]
    fn star_regions_register_separately() {
        // A hand-built trie with one STAR edge; each region registers as
        // its own collection member.
        let t = handle("abab");
        let mut trie = crate::trie::CompressedTrie::new_empty(t.clone());
        trie.insert_string(ROOT, SubstringRef::new(1, 5), &[1]).unwrap();
        trie.insert_string(ROOT, SubstringRef::new(2, 5), &[2]).unwrap();
        let star = trie.add_star_child(ROOT);
        trie.insert_string(star, SubstringRef::new(4, 5), &[9]).unwrap();
        trie.insert_string(star, SubstringRef::new(5, 5), &[10]).unwrap();
        trie.finalize();
        let trie = Arc::new(trie);

        let mut lcp = LcpStructure::new(&t);
        let top = lcp.register_region(trie.clone(), ROOT, LcpMode::Light).unwrap();
        let bot = lcp.register_region(trie.clone(), star, LcpMode::Light).unwrap();
        assert_eq!(lcp.registered_leaf_count(top), Some(2));
        assert_eq!(lcp.registered_leaf_count(bot), Some(2));
        // Pattern "b" + the true terminator symbol.
        let x = vec![syms("b")[0], Symbol::SENTINEL];
        let pp = lcp.preprocess_pattern(&x);
        // In the star region, "b$" matches fully from the region root.
        let root_loc = trie.location_of(star);
        let ans = lcp.lcp_query(&pp, 1, bot, root_loc).unwrap();
        assert_eq!(trie.location_rdepth(ans.location), 2);
        // The top region only follows "b" one symbol (edge is "bab$").
        let ans = lcp.lcp_query(&pp, 1, top, trie.root_location()).unwrap();
        assert_eq!(trie.location_rdepth(ans.location), 1);
        // Star-region vertices are invalid for the top registration.
        assert!(matches!(
            lcp.lcp_query(&pp, 1, top, root_loc),
            Err(Error::InvalidVertex { .. })
        ));
    }

    /// Drives every (mode, location, suffix) combination over a text and
    /// pattern, comparing against plain descend and checking counters.
    fn check_equivalence(text: &str, pattern: &str) {
        let t = handle(text);
        let mut lcp = LcpStructure::new(&t);
        let st = lcp.reference().clone();
        let full = lcp.register_trie(st.clone(), LcpMode::Full).unwrap();
        let light = lcp.register_trie(st.clone(), LcpMode::Light).unwrap();
        let x = syms(pattern);
        let pp = lcp.preprocess_pattern(&x);
        let hop_cap = (st.leaf_count() as f64).log2().ceil() as usize + 1;
        for loc in all_locations(&st, ROOT) {
            for start in 1..=x.len() + 1 {
                let (want, _) = st.descend(loc, &x[start - 1..]);
                for id in [full, light] {
                    let ans = lcp.lcp_query(&pp, start, id, loc).unwrap();
                    assert_eq!(
                        ans.location, want,
                        "text={} pattern={} start={} loc={:?}",
                        text, pattern, start, loc
                    );
                    assert_eq!(ans.fallback_comparisons, 0);
                    if id == light {
                        assert!(ans.hops <= hop_cap, "hops {} > cap {}", ans.hops, hop_cap);
                    }
                }
            }
        }
    }

    #[test]
    fn equivalence_on_fixed_texts() {
        check_equivalence("bananas", "anana");
        check_equivalence("bananas", "nas");
        check_equivalence("abababab", "babab");
        check_equivalence("aaaa", "aaaaa");
        check_equivalence("abcabcabc", "cabx");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(80))]

        /// LCP answers equal plain descends from every location, for
        /// every suffix of a pattern assembled from text pieces (so it
        /// partially matches), on both modes; LIGHT obeys the hop bound.
        #[test]
        fn equivalence_on_random_texts(
            text in proptest::collection::vec(0u8..3, 1..40),
            i in 0usize..30,
            j in 0usize..30,
            flip in 0usize..6,
        ) {
            let t = Arc::new(IndexedText::from_bytes(&text));
            let n = t.n();
            // Pattern: two text windows glued, one byte possibly bent.
            let mut pat: Vec<u8> = Vec::new();
            pat.extend_from_slice(&text[i % n..((i % n) + 5).min(n)]);
            pat.extend_from_slice(&text[j % n..((j % n) + 4).min(n)]);
            if !pat.is_empty() && flip < pat.len() {
                pat[flip] ^= 1;
            }
            let x = symbols_from_bytes(&pat);

            let mut lcp = LcpStructure::new(&t);
            let st = lcp.reference().clone();
            let full = lcp.register_trie(st.clone(), LcpMode::Full).unwrap();
            let light = lcp.register_trie(st.clone(), LcpMode::Light).unwrap();
            let pp = lcp.preprocess_pattern(&x);
            let hop_cap = (st.leaf_count() as f64).log2().ceil() as usize + 1;
            for loc in all_locations(&st, ROOT) {
                for start in 1..=x.len() + 1 {
                    let (want, _) = st.descend(loc, &x[start - 1..]);
                    for id in [full, light] {
                        let ans = lcp.lcp_query(&pp, start, id, loc).unwrap();
                        prop_assert_eq!(ans.location, want);
                        if id == light {
                            prop_assert!(ans.hops <= hop_cap);
                        }
                    }
                }
            }
        }
    }
}
