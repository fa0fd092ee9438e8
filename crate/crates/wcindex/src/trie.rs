//! Compressed tries over substrings of one indexed text.
//!
//! Every edge label is a reference into the text (`O(1)` words per edge),
//! never an owned string. Leaves carry lists of position labels; equal
//! strings inserted twice merge into one leaf with both labels. A trie may
//! additionally contain STAR edges: label-less edges that stand for "any
//! single symbol" and join a vertex to the root of a nested trie region.
//! Plain string matching never follows STAR edges.
//!
//! Vertices are arena indices. Children are kept sorted by the first
//! symbol of their edge label, with the STAR child (at most one) last, so
//! every traversal order in the crate is deterministic.

use crate::error::{Error, Result};
use crate::text::{Symbol, SubstringRef, TextHandle};
use std::sync::atomic::{AtomicU64, Ordering};

pub type VertexId = u32;

pub const ROOT: VertexId = 0;
const NO_PARENT: u32 = u32::MAX;

static NEXT_TRIE_UID: AtomicU64 = AtomicU64::new(1);

/// Edge classification: an ordinary substring-labeled edge or a STAR edge.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum EdgeKind {
    Sub,
    Star,
}

#[derive(Clone, Debug)]
struct Vertex {
    parent: u32,
    kind: EdgeKind,
    /// Children sorted by first edge symbol; the STAR child, if any, last.
    children: Vec<u32>,
    /// 1-based text position anchoring this vertex's region path:
    /// `t[repr_start ..= repr_start + rdepth - 1]` spells the string from
    /// the region root down to this vertex.
    repr_start: u32,
    /// String depth counting every STAR edge as one symbol.
    depth: u32,
    /// String depth within the enclosing region (STAR edges reset it).
    rdepth: u32,
    /// Number of leaves in the subtree (STAR subtrees included).
    weight: u32,
    /// Position labels; non-empty exactly for leaves.
    labels: Vec<u32>,
}

/// A position inside the trie: either an explicit vertex or a point on the
/// edge entering `vertex`. `offset` counts the edge-label symbols consumed;
/// `offset == edge_len(vertex)` is the canonical form for the explicit
/// vertex itself, and the root is `(ROOT, 0)`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct Location {
    pub vertex: VertexId,
    pub offset: u32,
}

/// Size and shape counters for one trie.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TrieStats {
    pub vertices: usize,
    pub leaves: usize,
    pub internal: usize,
    /// Edges on the longest root-to-leaf path.
    pub height: usize,
    /// Largest string depth of any leaf (symbols, STAR edges count 1).
    pub deepest_string: usize,
    pub star_edges: usize,
}

#[derive(Debug)]
pub struct CompressedTrie {
    uid: u64,
    text: TextHandle,
    vertices: Vec<Vertex>,
    star_edges: usize,
}

impl CompressedTrie {
    pub(crate) fn new_empty(text: TextHandle) -> CompressedTrie {
        CompressedTrie {
            uid: NEXT_TRIE_UID.fetch_add(1, Ordering::Relaxed),
            text,
            vertices: vec![Vertex {
                parent: NO_PARENT,
                kind: EdgeKind::Sub,
                children: Vec::new(),
                repr_start: 1,
                depth: 0,
                rdepth: 0,
                weight: 0,
                labels: Vec::new(),
            }],
            star_edges: 0,
        }
    }

    /// Identity token; structures derived from a trie remember it and
    /// refuse vertices from any other trie.
    pub fn uid(&self) -> u64 {
        self.uid
    }

    pub fn text(&self) -> &TextHandle {
        &self.text
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        let p = self.vertices[v as usize].parent;
        (p != NO_PARENT).then_some(p)
    }

    pub fn kind(&self, v: VertexId) -> EdgeKind {
        self.vertices[v as usize].kind
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.vertices[v as usize].children
    }

    /// Children reachable by ordinary matching: all but the STAR child.
    pub fn sub_children(&self, v: VertexId) -> &[VertexId] {
        let c = &self.vertices[v as usize].children;
        match c.last() {
            Some(&last) if self.kind(last) == EdgeKind::Star => &c[..c.len() - 1],
            _ => c,
        }
    }

    pub fn star_child(&self, v: VertexId) -> Option<VertexId> {
        let c = &self.vertices[v as usize].children;
        match c.last() {
            Some(&last) if self.kind(last) == EdgeKind::Star => Some(last),
            _ => None,
        }
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        !self.vertices[v as usize].labels.is_empty()
    }

    pub fn labels(&self, v: VertexId) -> &[u32] {
        &self.vertices[v as usize].labels
    }

    /// Global string depth (STAR edges count one symbol).
    pub fn depth(&self, v: VertexId) -> usize {
        self.vertices[v as usize].depth as usize
    }

    /// String depth within the vertex's region.
    pub fn rdepth(&self, v: VertexId) -> usize {
        self.vertices[v as usize].rdepth as usize
    }

    pub fn repr_start(&self, v: VertexId) -> usize {
        self.vertices[v as usize].repr_start as usize
    }

    /// Number of leaves below `v` (STAR subtrees included).
    pub fn weight(&self, v: VertexId) -> usize {
        self.vertices[v as usize].weight as usize
    }

    pub fn leaf_count(&self) -> usize {
        self.weight(ROOT)
    }

    /// Linear scan for the leaf carrying `label` (test/diagnostic aid;
    /// query paths precompute their own label maps).
    pub fn leaf_with_label(&self, label: u32) -> Option<VertexId> {
        (0..self.vertices.len() as u32).find(|&v| self.labels(v).contains(&label))
    }

    /// Label of one leaf at or below `v` within the region (first in
    /// child order). Every region vertex has a leaf below it.
    pub fn first_label_below(&self, v: VertexId) -> u32 {
        let mut u = v;
        loop {
            if self.is_leaf(u) {
                return self.labels(u)[0];
            }
            u = self.sub_children(u)[0];
        }
    }

    pub fn star_edge_count(&self) -> usize {
        self.star_edges
    }

    /// Length of the edge label entering `v` (0 for the root, 1 for STAR).
    pub fn edge_len(&self, v: VertexId) -> usize {
        let vx = &self.vertices[v as usize];
        if vx.parent == NO_PARENT {
            0
        } else if vx.kind == EdgeKind::Star {
            1
        } else {
            (vx.rdepth - self.vertices[vx.parent as usize].rdepth) as usize
        }
    }

    /// The text span spelling the edge label entering `v`; `None` for the
    /// root and for STAR edges.
    pub fn edge_span(&self, v: VertexId) -> Option<SubstringRef> {
        let vx = &self.vertices[v as usize];
        if vx.parent == NO_PARENT || vx.kind == EdgeKind::Star {
            return None;
        }
        let pd = self.vertices[vx.parent as usize].rdepth as usize;
        let start = vx.repr_start as usize + pd;
        Some(SubstringRef::new(start, start + self.edge_len(v) - 1))
    }

    /// First symbol of the edge label entering `v` (`None` for STAR/root).
    pub fn first_symbol(&self, v: VertexId) -> Option<Symbol> {
        self.edge_span(v).map(|s| self.text.at(s.start))
    }

    /// Symbol at 1-based position `offset` of the edge label entering `v`.
    fn edge_symbol(&self, v: VertexId, offset: usize) -> Symbol {
        let span = self.edge_span(v).expect("no label on this edge");
        self.text.at(span.start + offset - 1)
    }

    /// Child of `v` whose edge label starts with `sym`, ignoring STAR.
    pub fn child_by_symbol(&self, v: VertexId, sym: Symbol) -> Option<VertexId> {
        let subs = self.sub_children(v);
        subs.binary_search_by_key(&sym.code(), |&c| {
            self.first_symbol(c).expect("sub child has a label").code()
        })
        .ok()
        .map(|i| subs[i])
    }

    pub fn location_of(&self, v: VertexId) -> Location {
        Location {
            vertex: v,
            offset: self.edge_len(v) as u32,
        }
    }

    pub fn root_location(&self) -> Location {
        Location { vertex: ROOT, offset: 0 }
    }

    pub fn is_explicit(&self, loc: Location) -> bool {
        loc.offset as usize == self.edge_len(loc.vertex)
    }

    /// Global string depth of a location.
    pub fn location_depth(&self, loc: Location) -> usize {
        let vx = &self.vertices[loc.vertex as usize];
        if vx.parent == NO_PARENT {
            loc.offset as usize
        } else {
            self.vertices[vx.parent as usize].depth as usize + loc.offset as usize
        }
    }

    /// Region string depth of a location.
    pub fn location_rdepth(&self, loc: Location) -> usize {
        let vx = &self.vertices[loc.vertex as usize];
        if vx.kind == EdgeKind::Star {
            // Only the explicit region root lies on a STAR edge.
            0
        } else if vx.parent == NO_PARENT {
            loc.offset as usize
        } else {
            self.vertices[vx.parent as usize].rdepth as usize + loc.offset as usize
        }
    }

    /// The location one symbol into the edge entering `c`, normalized to
    /// the explicit child when the edge has length one.
    pub fn first_location_on_edge(&self, c: VertexId) -> Location {
        Location { vertex: c, offset: 1 }
    }

    /// Walks `s` from `from` using ordinary edges only (STAR edges are
    /// invisible to plain matching). Returns the stop location and the
    /// number of symbols matched.
    pub fn descend(&self, from: Location, s: &[Symbol]) -> (Location, usize) {
        let mut matched = 0usize;
        let mut loc = from;
        while matched < s.len() {
            if self.is_explicit(loc) {
                let v = loc.vertex;
                match self.child_by_symbol(v, s[matched]) {
                    None => break,
                    Some(c) => {
                        loc = Location { vertex: c, offset: 1 };
                        matched += 1;
                    }
                }
            } else {
                let next = self.edge_symbol(loc.vertex, loc.offset as usize + 1);
                if next != s[matched] {
                    break;
                }
                loc.offset += 1;
                matched += 1;
            }
        }
        (loc, matched)
    }

    /// All position labels on leaves at or below `loc`, within the current
    /// region (STAR edges are not crossed), sorted and deduplicated.
    pub fn collect_occurrences(&self, loc: Location) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![loc.vertex];
        while let Some(v) = stack.pop() {
            let vx = &self.vertices[v as usize];
            if !vx.labels.is_empty() {
                out.extend(vx.labels.iter().map(|&p| p as usize));
            }
            for &c in self.sub_children(v) {
                stack.push(c);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// For every light (non-heavy, non-STAR) edge out of `v`: takes each
    /// stored string continuing from the first location on that edge and
    /// drops its first symbol, inheriting the leaf labels. Strings that
    /// become empty are excluded. `is_heavy` classifies child vertices.
    pub fn lightstrings_suffixes(
        &self,
        v: VertexId,
        mut is_heavy: impl FnMut(VertexId) -> bool,
    ) -> Vec<(SubstringRef, Vec<u32>)> {
        let vd = self.vertices[v as usize].rdepth as usize;
        let mut out = Vec::new();
        for &c in self.sub_children(v) {
            if is_heavy(c) {
                continue;
            }
            let mut stack = vec![c];
            while let Some(u) = stack.pop() {
                let ux = &self.vertices[u as usize];
                if !ux.labels.is_empty() {
                    // Leaf string from region depth vd + 2 onwards.
                    let start = ux.repr_start as usize + vd + 1;
                    let end = ux.repr_start as usize + ux.rdepth as usize - 1;
                    if start <= end {
                        out.push((SubstringRef::new(start, end), ux.labels.clone()));
                    }
                }
                for &g in self.sub_children(u) {
                    stack.push(g);
                }
            }
        }
        out
    }

    pub fn stats(&self) -> TrieStats {
        let mut leaves = 0;
        let mut height = 0usize;
        let mut deepest = 0usize;
        // Edge splits reparent vertices under newer ones, so arena order
        // is not topological; walk the tree instead.
        let mut stack = vec![(ROOT, 0u32)];
        while let Some((v, d)) = stack.pop() {
            let vx = &self.vertices[v as usize];
            if !vx.labels.is_empty() {
                leaves += 1;
                height = height.max(d as usize);
                deepest = deepest.max(vx.depth as usize);
            }
            for &c in &vx.children {
                stack.push((c, d + 1));
            }
        }
        TrieStats {
            vertices: self.vertices.len(),
            leaves,
            internal: self.vertices.len() - leaves,
            height,
            deepest_string: deepest,
            star_edges: self.star_edges,
        }
    }

    /// Leaf counts within one region: `(vertex, leaves-below)` for every
    /// vertex reachable from `region_root` without crossing STAR edges,
    /// in DFS preorder.
    pub(crate) fn region_leaf_counts(&self, region_root: VertexId) -> Vec<(VertexId, u32)> {
        self.region_leaf_counts_until(region_root, |_| false)
    }

    /// As [`region_leaf_counts`](Self::region_leaf_counts), but vertices
    /// for which `is_boundary` returns true close the region: they count
    /// as leaves and nothing below them is visited. Lets a caller carve
    /// a sub-region (e.g. the top part of a decomposition) out of a
    /// larger trie.
    pub(crate) fn region_leaf_counts_until(
        &self,
        region_root: VertexId,
        mut is_boundary: impl FnMut(VertexId) -> bool,
    ) -> Vec<(VertexId, u32)> {
        // Post-order accumulation over the region.
        let mut order = Vec::new();
        let mut boundary = Vec::new();
        let mut stack = vec![region_root];
        while let Some(v) = stack.pop() {
            order.push(v);
            if v != region_root && is_boundary(v) {
                boundary.push(v);
                continue;
            }
            for &c in self.sub_children(v) {
                stack.push(c);
            }
        }
        let boundary: std::collections::HashSet<VertexId> = boundary.into_iter().collect();
        let mut count: std::collections::HashMap<VertexId, u32> =
            order.iter().map(|&v| (v, 0)).collect();
        for &v in order.iter().rev() {
            let mut w = if self.is_leaf(v) || boundary.contains(&v) {
                1
            } else {
                0
            };
            if !boundary.contains(&v) {
                for &c in self.sub_children(v) {
                    w += count[&c];
                }
            }
            *count.get_mut(&v).unwrap() = w;
        }
        order.into_iter().map(|v| (v, count[&v])).collect()
    }

    /// Inserts the string `t[span]` with the given labels below
    /// `region_root`. Maintains prefix-freeness: merging an exact
    /// duplicate is fine, a proper-prefix relation is an error.
    pub(crate) fn insert_string(
        &mut self,
        region_root: VertexId,
        span: SubstringRef,
        labels: &[u32],
    ) -> Result<()> {
        debug_assert!(!labels.is_empty());
        if span.is_empty() {
            return Err(Error::EmptyString {
                label: labels[0] as usize,
            });
        }
        let mut v = region_root;
        let mut i = span.start;
        loop {
            if i > span.end {
                // String exhausted at explicit vertex v.
                return if self.is_leaf(v) {
                    self.vertices[v as usize]
                        .labels
                        .extend(labels.iter().copied());
                    Ok(())
                } else {
                    Err(Error::NotPrefixFree {
                        label: labels[0] as usize,
                    })
                };
            }
            if self.is_leaf(v) {
                // Existing stored string is a proper prefix of this one.
                return Err(Error::NotPrefixFree {
                    label: self.vertices[v as usize].labels[0] as usize,
                });
            }
            let sym = self.text.at(i);
            let Some(c) = self.child_by_symbol(v, sym) else {
                // Fresh leaf holding the whole remaining suffix of span.
                let tail = (span.end - i + 1) as u32;
                let leaf = self.push_vertex(Vertex {
                    parent: v,
                    kind: EdgeKind::Sub,
                    children: Vec::new(),
                    repr_start: span.start as u32,
                    depth: self.vertices[v as usize].depth + tail,
                    rdepth: self.vertices[v as usize].rdepth + tail,
                    weight: 0,
                    labels: labels.to_vec(),
                });
                self.attach_child(v, leaf);
                return Ok(());
            };
            // Walk the edge into c; symbol 1 already matched via lookup.
            let elen = self.edge_len(c);
            let espan = self.edge_span(c).expect("sub edge has a span");
            let mut k = 1usize;
            while k < elen && i + k <= span.end && self.text.at(espan.start + k) == self.text.at(i + k)
            {
                k += 1;
            }
            if k == elen {
                v = c;
                i += elen;
                continue;
            }
            // Split the edge after k symbols.
            if i + k > span.end {
                // New string ends mid-edge: proper prefix of a stored one.
                return Err(Error::NotPrefixFree {
                    label: labels[0] as usize,
                });
            }
            let vdepth = self.vertices[v as usize].depth;
            let vrdepth = self.vertices[v as usize].rdepth;
            let mid = self.push_vertex(Vertex {
                parent: v,
                kind: EdgeKind::Sub,
                children: Vec::new(),
                repr_start: self.vertices[c as usize].repr_start,
                depth: vdepth + k as u32,
                rdepth: vrdepth + k as u32,
                weight: 0,
                labels: Vec::new(),
            });
            // Reparent c under mid; its own repr/depths are unchanged.
            let pos = self.vertices[v as usize]
                .children
                .iter()
                .position(|&x| x == c)
                .expect("child listed under parent");
            self.vertices[v as usize].children[pos] = mid;
            self.vertices[c as usize].parent = mid;
            self.vertices[mid as usize].children.push(c);
            let tail = (span.end - (i + k) + 1) as u32;
            let leaf = self.push_vertex(Vertex {
                parent: mid,
                kind: EdgeKind::Sub,
                children: Vec::new(),
                repr_start: span.start as u32,
                depth: vdepth + k as u32 + tail,
                rdepth: vrdepth + k as u32 + tail,
                weight: 0,
                labels: labels.to_vec(),
            });
            self.attach_child(mid, leaf);
            return Ok(());
        }
    }

    /// Attaches extra position labels to a vertex out-of-band. Used for
    /// empty-string members of a nested string set, which have no path
    /// of their own and live on the region root.
    pub(crate) fn attach_labels(&mut self, v: VertexId, labels: &[u32]) {
        debug_assert!(!labels.is_empty());
        self.vertices[v as usize].labels.extend(labels.iter().copied());
    }

    /// Adds a STAR child under `v`, returning the new region root.
    pub(crate) fn add_star_child(&mut self, v: VertexId) -> VertexId {
        debug_assert!(self.star_child(v).is_none(), "one STAR child per vertex");
        debug_assert!(!self.is_leaf(v), "STAR edges join internal vertices only");
        let star = self.push_vertex(Vertex {
            parent: v,
            kind: EdgeKind::Star,
            children: Vec::new(),
            repr_start: 1,
            depth: self.vertices[v as usize].depth + 1,
            rdepth: 0,
            weight: 0,
            labels: Vec::new(),
        });
        self.vertices[v as usize].children.push(star);
        self.star_edges += 1;
        star
    }

    /// Sorts label lists and computes subtree weights; call once after the
    /// last insertion.
    pub(crate) fn finalize(&mut self) {
        for vx in &mut self.vertices {
            vx.labels.sort_unstable();
            vx.labels.dedup();
        }
        // Children of each vertex are already sorted by construction;
        // compute weights bottom-up (children always have larger ids than
        // their parent except reparented split vertices, so use a stack).
        let mut order: Vec<u32> = Vec::with_capacity(self.vertices.len());
        let mut stack = vec![ROOT];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &c in self.children(v).iter() {
                stack.push(c);
            }
        }
        for &v in order.iter().rev() {
            let mut w = if self.is_leaf(v) { 1u32 } else { 0 };
            for ci in 0..self.vertices[v as usize].children.len() {
                let c = self.vertices[v as usize].children[ci];
                w += self.vertices[c as usize].weight;
            }
            self.vertices[v as usize].weight = w;
        }
    }

    fn push_vertex(&mut self, v: Vertex) -> VertexId {
        let id = self.vertices.len() as u32;
        self.vertices.push(v);
        id
    }

    /// Inserts `c` into `v`'s child list keeping first-symbol order, with
    /// any STAR child pinned at the end.
    fn attach_child(&mut self, v: VertexId, c: VertexId) {
        let key = self.child_sort_key(c);
        let pos = {
            let children = &self.vertices[v as usize].children;
            children
                .binary_search_by_key(&key, |&x| self.child_sort_key(x))
                .unwrap_err()
        };
        self.vertices[v as usize].children.insert(pos, c);
    }

    fn child_sort_key(&self, c: VertexId) -> u64 {
        match self.kind(c) {
            EdgeKind::Star => u64::MAX,
            EdgeKind::Sub => self
                .first_symbol(c)
                .expect("sub child has a label")
                .code() as u64,
        }
    }
}

/// Builds a compressed trie over `t[span]` strings with label lists.
/// Duplicate strings merge; a proper prefix relation is an error.
pub fn build_trie(
    text: &TextHandle,
    items: impl IntoIterator<Item = (SubstringRef, Vec<u32>)>,
) -> Result<CompressedTrie> {
    let mut trie = CompressedTrie::new_empty(text.clone());
    let mut any = false;
    for (span, labels) in items {
        any = true;
        trie.insert_string(ROOT, span, &labels)?;
    }
    if !any {
        return Err(Error::EmptyStringSet);
    }
    trie.finalize();
    Ok(trie)
}

/// Per-vertex persistent state. Together with the backing text these
/// records reproduce a finalized trie exactly (same vertex ids): child
/// lists, depths, and weights are all derived.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct VertexRecord {
    pub parent: u32,
    pub kind: EdgeKind,
    pub repr_start: u32,
    pub rdepth: u32,
    pub labels: Vec<u32>,
}

impl CompressedTrie {
    pub(crate) fn vertex_records(&self) -> Vec<VertexRecord> {
        self.vertices
            .iter()
            .map(|vx| VertexRecord {
                parent: vx.parent,
                kind: vx.kind,
                repr_start: vx.repr_start,
                rdepth: vx.rdepth,
                labels: vx.labels.clone(),
            })
            .collect()
    }

    /// Rebuilds a finalized trie from per-vertex records, preserving
    /// vertex ids. Tree shape, edge labels, and label positions are
    /// validated against the text; the records are otherwise trusted.
    pub(crate) fn from_vertex_records(
        text: TextHandle,
        records: Vec<VertexRecord>,
    ) -> Result<CompressedTrie> {
        if records.is_empty() {
            return Err(Error::Format("trie has no root vertex".into()));
        }
        if records.len() > u32::MAX as usize {
            return Err(Error::Format("trie vertex count exceeds u32".into()));
        }
        let root = &records[0];
        if root.parent != NO_PARENT || root.kind != EdgeKind::Sub || root.rdepth != 0 {
            return Err(Error::Format("root vertex record is malformed".into()));
        }
        let last = (text.n() + 1) as u64;
        let mut star_edges = 0usize;
        for (i, r) in records.iter().enumerate().skip(1) {
            if r.parent as usize >= records.len() || r.parent as usize == i {
                return Err(Error::Format(format!(
                    "vertex {i} has parent {} out of range",
                    r.parent
                )));
            }
            let prd = records[r.parent as usize].rdepth;
            match r.kind {
                EdgeKind::Star => {
                    if r.rdepth != 0 {
                        return Err(Error::Format(format!(
                            "vertex {i}: a star edge must reset region depth"
                        )));
                    }
                    star_edges += 1;
                }
                EdgeKind::Sub => {
                    if r.rdepth <= prd {
                        return Err(Error::Format(format!("vertex {i} has an empty edge label")));
                    }
                    let elen = (r.rdepth - prd) as u64;
                    let start = r.repr_start as u64 + prd as u64;
                    if r.repr_start == 0 || start + elen - 1 > last {
                        return Err(Error::Format(format!(
                            "vertex {i} has an edge label outside the text"
                        )));
                    }
                }
            }
            for &l in &r.labels {
                if l == 0 || l as u64 > last {
                    return Err(Error::Format(format!(
                        "vertex {i} carries label {l} outside the text"
                    )));
                }
            }
        }
        let mut vertices: Vec<Vertex> = records
            .iter()
            .map(|r| Vertex {
                parent: r.parent,
                kind: r.kind,
                children: Vec::new(),
                repr_start: r.repr_start,
                depth: 0,
                rdepth: r.rdepth,
                weight: 0,
                labels: r.labels.clone(),
            })
            .collect();
        for (i, r) in records.iter().enumerate().skip(1) {
            vertices[r.parent as usize].children.push(i as u32);
        }
        let mut trie = CompressedTrie {
            uid: NEXT_TRIE_UID.fetch_add(1, Ordering::Relaxed),
            text,
            vertices,
            star_edges,
        };
        for v in 0..trie.vertices.len() {
            let mut children = std::mem::take(&mut trie.vertices[v].children);
            children.sort_unstable_by_key(|&c| trie.child_sort_key(c));
            for pair in children.windows(2) {
                if trie.child_sort_key(pair[0]) == trie.child_sort_key(pair[1]) {
                    return Err(Error::Format(format!(
                        "vertex {v} has two children on the same first symbol"
                    )));
                }
            }
            trie.vertices[v].children = children;
        }
        // Reachability doubles as a cycle check and fills derived depths.
        let mut seen = 0usize;
        let mut stack = vec![ROOT];
        while let Some(v) = stack.pop() {
            seen += 1;
            let d = trie.vertices[v as usize].depth;
            for ci in 0..trie.vertices[v as usize].children.len() {
                let c = trie.vertices[v as usize].children[ci];
                let step = match trie.kind(c) {
                    EdgeKind::Star => 1,
                    EdgeKind::Sub => trie.edge_len(c) as u32,
                };
                trie.vertices[c as usize].depth = d + step;
                stack.push(c);
            }
        }
        if seen != trie.vertices.len() {
            return Err(Error::Format("trie records do not form one tree".into()));
        }
        trie.finalize();
        Ok(trie)
    }
}

/// Suffix tree of `t$`: the compressed trie over every suffix of the text
/// including the sentinel, the leaf for the suffix at position `i`
/// labeled `i`. Plain quadratic construction; the builder is an isolated
/// boundary and can be swapped for a linear one without affecting users.
pub fn build_suffix_tree(text: &TextHandle) -> CompressedTrie {
    let end = text.len_with_sentinel();
    let mut trie = CompressedTrie::new_empty(text.clone());
    for i in 1..=end {
        trie.insert_string(ROOT, SubstringRef::new(i, end), &[i as u32])
            .expect("suffixes of t$ are prefix-free");
    }
    trie.finalize();
    trie
}
