//! Tree decompositions over compressed tries.
//!
//! Two decompositions are provided. The heavy-alpha decomposition marks,
//! at every vertex, the edges to its `alpha` largest-weight children as
//! heavy and the rest as light; `alpha = 1` gives classic heavy paths,
//! `alpha = 0` makes every edge light. Its payoff is the light-depth
//! bound: a vertex passes through at most `log_{alpha+1}(leaves)` light
//! edges on the way up to the root.
//!
//! The ART decomposition splits a trie at the highest vertices whose
//! subtrees hold at most `chi` leaves: those subtrees become bottom
//! trees, the residue is the top tree, and the top tree can only have
//! `leaves / (chi + 1)` leaves of its own.
//!
//! Both are defined for plain tries; tries containing STAR edges are
//! rejected (their regions are decomposed individually by the
//! wildcard-tree builder). [`NcaStructure`] adds nearest-common-ancestor
//! queries via an Euler tour and a sparse range-minimum table.

use crate::error::{Error, Result};
use crate::trie::{CompressedTrie, VertexId, ROOT};

/// Per-edge heavy/light classification of one trie.
pub struct HeavyAlphaDecomposition {
    trie_uid: u64,
    alpha: usize,
    /// `heavy[v]`: the edge entering `v` is heavy (false for the root).
    heavy: Vec<bool>,
    /// Number of light edges between each vertex and the root.
    lightdepth: Vec<u32>,
    lightheight: usize,
}

impl HeavyAlphaDecomposition {
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn is_heavy(&self, v: VertexId) -> bool {
        self.heavy[v as usize]
    }

    pub fn lightdepth(&self, v: VertexId) -> usize {
        self.lightdepth[v as usize] as usize
    }

    /// Maximum light depth over all vertices.
    pub fn lightheight(&self) -> usize {
        self.lightheight
    }

    pub fn trie_uid(&self) -> u64 {
        self.trie_uid
    }
}

/// Marks, among `children` given as `(vertex, weight)` in first-symbol
/// order, the `alpha` heaviest as heavy. Ties prefer the earlier child,
/// so the result is deterministic. Returns a mask aligned with the input.
pub(crate) fn select_heavy(children: &[(VertexId, u32)], alpha: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..children.len()).collect();
    order.sort_by(|&a, &b| {
        children[b].1.cmp(&children[a].1).then(a.cmp(&b))
    });
    let mut mask = vec![false; children.len()];
    for &i in order.iter().take(alpha) {
        mask[i] = true;
    }
    mask
}

/// Classifies every edge of `trie` as heavy or light: at each vertex the
/// edges to its `alpha` largest-weight children (ties to the smaller
/// first symbol) are heavy. The trie must be free of STAR edges.
pub fn heavy_alpha_decompose(
    trie: &CompressedTrie,
    alpha: usize,
) -> Result<HeavyAlphaDecomposition> {
    if trie.star_edge_count() > 0 {
        return Err(Error::StarEdge);
    }
    let count = trie.vertex_count();
    let mut heavy = vec![false; count];
    let mut lightdepth = vec![0u32; count];
    let mut lightheight = 0usize;
    let mut stack = vec![ROOT];
    while let Some(v) = stack.pop() {
        let children: Vec<(VertexId, u32)> = trie
            .children(v)
            .iter()
            .map(|&c| (c, trie.weight(c) as u32))
            .collect();
        let mask = select_heavy(&children, alpha);
        for (&(c, _), &h) in children.iter().zip(mask.iter()) {
            heavy[c as usize] = h;
            lightdepth[c as usize] = lightdepth[v as usize] + (!h) as u32;
            lightheight = lightheight.max(lightdepth[c as usize] as usize);
            stack.push(c);
        }
    }
    Ok(HeavyAlphaDecomposition {
        trie_uid: trie.uid(),
        alpha,
        heavy,
        lightdepth,
        lightheight,
    })
}

/// Which part of an ART decomposition a vertex belongs to.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum ArtPart {
    Top,
    Bottom,
}

/// Top/bottom split of one trie at leaf-count threshold `chi`.
pub struct ArtDecomposition {
    trie_uid: u64,
    chi: usize,
    /// Roots of the bottom trees, in DFS preorder: the minimal-depth
    /// vertices whose subtrees hold at most `chi` leaves.
    bottom_roots: Vec<VertexId>,
    part: Vec<ArtPart>,
    /// For bottom-part vertices, the root of their bottom tree.
    bottom_root_of: Vec<u32>,
    top_leaf_count: usize,
}

impl ArtDecomposition {
    pub fn chi(&self) -> usize {
        self.chi
    }

    pub fn bottom_roots(&self) -> &[VertexId] {
        &self.bottom_roots
    }

    pub fn part(&self, v: VertexId) -> ArtPart {
        self.part[v as usize]
    }

    pub fn bottom_root_of(&self, v: VertexId) -> Option<VertexId> {
        match self.part[v as usize] {
            ArtPart::Top => None,
            ArtPart::Bottom => Some(self.bottom_root_of[v as usize]),
        }
    }

    /// Number of top-tree vertices with no child in the top tree.
    pub fn top_leaf_count(&self) -> usize {
        self.top_leaf_count
    }

    pub fn trie_uid(&self) -> u64 {
        self.trie_uid
    }
}

/// Splits `trie` into a top tree and bottom trees of at most `chi`
/// leaves each, cutting as high as possible: a vertex roots a bottom
/// tree iff its subtree has ≤ `chi` leaves and its parent's has more.
pub fn art_decompose(trie: &CompressedTrie, chi: usize) -> Result<ArtDecomposition> {
    if chi == 0 {
        return Err(Error::Param("chi must be at least 1".into()));
    }
    if trie.star_edge_count() > 0 {
        return Err(Error::StarEdge);
    }
    let count = trie.vertex_count();
    let mut part = vec![ArtPart::Top; count];
    let mut bottom_root_of = vec![u32::MAX; count];
    let mut bottom_roots = Vec::new();
    let mut has_top_child = vec![false; count];
    let mut stack = vec![ROOT];
    while let Some(v) = stack.pop() {
        if trie.weight(v) <= chi {
            // Highest qualifying vertex on this path: the whole subtree
            // becomes one bottom tree.
            bottom_roots.push(v);
            let mut inner = vec![v];
            while let Some(u) = inner.pop() {
                part[u as usize] = ArtPart::Bottom;
                bottom_root_of[u as usize] = v;
                inner.extend(trie.children(u).iter().copied());
            }
        } else {
            stack.extend(trie.children(v).iter().copied());
        }
    }
    for v in 0..count as u32 {
        if part[v as usize] == ArtPart::Top {
            if let Some(p) = trie.parent(v) {
                has_top_child[p as usize] = true;
            }
        }
    }
    let top_leaf_count = (0..count)
        .filter(|&v| part[v] == ArtPart::Top && !has_top_child[v])
        .count();
    // DFS with a stack visits children in reverse; restore preorder.
    bottom_roots.sort_unstable();
    Ok(ArtDecomposition {
        trie_uid: trie.uid(),
        chi,
        bottom_roots,
        part,
        bottom_root_of,
        top_leaf_count,
    })
}

/// Nearest-common-ancestor queries over one trie: Euler tour plus a
/// sparse table of range-minimum positions, answering in constant time.
pub struct NcaStructure {
    trie_uid: u64,
    euler: Vec<u32>,
    /// Edge depth of each tour entry; strictly changes by 1 per step.
    tour_depth: Vec<u32>,
    first_pos: Vec<u32>,
    /// `table[j][i]`: index of the minimum-depth entry in
    /// `tour[i .. i + 2^j]`.
    table: Vec<Vec<u32>>,
}

impl NcaStructure {
    pub fn new(trie: &CompressedTrie) -> NcaStructure {
        let count = trie.vertex_count();
        let mut euler = Vec::with_capacity(2 * count);
        let mut tour_depth = Vec::with_capacity(2 * count);
        let mut first_pos = vec![u32::MAX; count];
        // Iterative Euler tour; frames carry (vertex, next-child-index).
        let mut frames: Vec<(u32, usize, u32)> = vec![(ROOT, 0, 0)];
        while let Some((v, ci, d)) = frames.pop() {
            if ci == 0 {
                first_pos[v as usize] = euler.len() as u32;
            }
            euler.push(v);
            tour_depth.push(d);
            if let Some(&c) = trie.children(v).get(ci) {
                frames.push((v, ci + 1, d));
                frames.push((c, 0, d + 1));
            }
        }
        let len = euler.len();
        let levels = usize::BITS as usize - len.leading_zeros() as usize;
        let mut table: Vec<Vec<u32>> = Vec::with_capacity(levels);
        table.push((0..len as u32).collect());
        let mut span = 1;
        while 2 * span <= len {
            let prev = table.last().unwrap();
            let mut next = Vec::with_capacity(len - 2 * span + 1);
            for i in 0..=len - 2 * span {
                let a = prev[i];
                let b = prev[i + span];
                next.push(if tour_depth[a as usize] <= tour_depth[b as usize] {
                    a
                } else {
                    b
                });
            }
            table.push(next);
            span *= 2;
        }
        NcaStructure {
            trie_uid: trie.uid(),
            euler,
            tour_depth,
            first_pos,
            table,
        }
    }

    /// Deepest common ancestor of `u` and `v`; `nca(u, u) = u`.
    pub fn nca(&self, trie: &CompressedTrie, u: VertexId, v: VertexId) -> Result<VertexId> {
        if trie.uid() != self.trie_uid {
            return Err(Error::TrieMismatch);
        }
        for x in [u, v] {
            if x as usize >= self.first_pos.len() {
                return Err(Error::InvalidVertex { vertex: x as usize });
            }
        }
        let (mut lo, mut hi) = (self.first_pos[u as usize], self.first_pos[v as usize]);
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        let width = (hi - lo + 1) as usize;
        let j = usize::BITS as usize - 1 - width.leading_zeros() as usize;
        let a = self.table[j][lo as usize];
        let b = self.table[j][hi as usize + 1 - (1 << j)];
        let best = if self.tour_depth[a as usize] <= self.tour_depth[b as usize] {
            a
        } else {
            b
        };
        Ok(self.euler[best as usize])
    }

    pub fn trie_uid(&self) -> u64 {
        self.trie_uid
    }
}
