//! Index persistence: the `WCIDX1` on-disk format.
//!
//! A file is a fixed header, the raw text, and one or two trie payloads:
//!
//! ```text
//! magic        8 bytes   "WCIDX1\0\0"
//! variant tag  u8        0 simple | 1 art-linear | 2 tradeoff | 3 linear-time
//! beta         u64       \
//! k            u64        |  resolved parameters; fields that do not
//! opt          u64        |  apply to the variant are written as 0
//! chi          u64        |
//! g            u64       /
//! sigma        u64       alphabet size of the text (checked on load)
//! n            u64       text length in bytes
//! text         n bytes
//! trie count   u8        2 for linear-time, 1 otherwise
//! per trie:
//!   vertex count u64
//!   per vertex:  parent u32 | kind u8 (0 sub, 1 star) | repr_start u32
//!                | rdepth u32 | label count u32 | labels u32 ...
//! ```
//!
//! All integers are little-endian. Vertex ids are positions in the
//! payload, so a loaded trie reproduces the original arena exactly;
//! decompositions, LCP structures, and wildcard-tree annotations are
//! re-derived deterministically from the tries. Loading validates
//! structure (magic, bounds, tree shape) and refuses anything
//! inconsistent with a [`crate::error::Error::Format`]; the semantic
//! content of a well-formed file is trusted.

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::index::{art_from_tree, tradeoff_from_tree, Index, IndexKind, IndexVariant};
use crate::text::{IndexedText, TextHandle};
use crate::trie::{CompressedTrie, EdgeKind, VertexRecord};
use crate::wildcard_tree::WildcardTree;

const MAGIC: &[u8; 8] = b"WCIDX1\0\0";

fn put_u8(out: &mut Vec<u8>, x: u8) {
    out.push(x);
}

fn put_u32(out: &mut Vec<u8>, x: u32) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, x: u64) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn put_trie(out: &mut Vec<u8>, trie: &CompressedTrie) {
    let records = trie.vertex_records();
    put_u64(out, records.len() as u64);
    for r in records {
        put_u32(out, r.parent);
        put_u8(out, match r.kind {
            EdgeKind::Sub => 0,
            EdgeKind::Star => 1,
        });
        put_u32(out, r.repr_start);
        put_u32(out, r.rdepth);
        put_u32(out, r.labels.len() as u32);
        for l in r.labels {
            put_u32(out, l);
        }
    }
}

/// Serializes a built index to bytes.
pub fn save_index(idx: &Index) -> Vec<u8> {
    let rp = idx.resolved();
    let (tag, tries): (u8, Vec<&CompressedTrie>) = match &idx.kind {
        IndexKind::Simple { tree } => (0, vec![tree]),
        IndexKind::ArtLinear(a) => (1, vec![&a.tree]),
        IndexKind::Tradeoff(ti) => (2, vec![ti.wt.trie()]),
        IndexKind::LinearTime { special, fallback, .. } => {
            (3, vec![special.trie(), &fallback.tree])
        }
    };
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u8(&mut out, tag);
    for x in [rp.beta, rp.k, rp.opt, rp.chi, rp.g, idx.sigma(), idx.n()] {
        put_u64(&mut out, x as u64);
    }
    out.extend_from_slice(&idx.text().to_bytes());
    put_u8(&mut out, tries.len() as u8);
    for t in tries {
        put_trie(&mut out, t);
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format("unexpected end of index data".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn len_field(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?)
            .map_err(|_| Error::Format("length field exceeds the address space".into()))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

/// Smallest possible encoded vertex: parent, kind, repr_start, rdepth,
/// empty label list.
const MIN_VERTEX_BYTES: usize = 4 + 1 + 4 + 4 + 4;

fn read_trie(r: &mut Reader<'_>, text: &TextHandle) -> Result<CompressedTrie> {
    let count = r.len_field()?;
    if count.saturating_mul(MIN_VERTEX_BYTES) > r.remaining() {
        return Err(Error::Format(
            "trie vertex count exceeds the remaining payload".into(),
        ));
    }
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let parent = r.u32()?;
        let kind = match r.u8()? {
            0 => EdgeKind::Sub,
            1 => EdgeKind::Star,
            other => {
                return Err(Error::Format(format!("unknown edge kind {other}")));
            }
        };
        let repr_start = r.u32()?;
        let rdepth = r.u32()?;
        let nlabels = r.u32()? as usize;
        if nlabels.saturating_mul(4) > r.remaining() {
            return Err(Error::Format(
                "label count exceeds the remaining payload".into(),
            ));
        }
        let mut labels = Vec::with_capacity(nlabels);
        for _ in 0..nlabels {
            labels.push(r.u32()?);
        }
        records.push(VertexRecord { parent, kind, repr_start, rdepth, labels });
    }
    CompressedTrie::from_vertex_records(text.clone(), records)
}

fn expect(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Format(format!("inconsistent header: {what}")))
    }
}

/// Deserializes an index, re-deriving every navigation structure.
pub fn load_index(bytes: &[u8]) -> Result<Index> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Format("not an index file (bad magic)".into()));
    }
    let tag = r.u8()?;
    let beta = r.len_field()?;
    let k = r.len_field()?;
    let opt = r.len_field()?;
    let chi = r.len_field()?;
    let g = r.len_field()?;
    let sigma = r.len_field()?;
    let n = r.len_field()?;
    let text: TextHandle = Arc::new(IndexedText::from_bytes(r.take(n)?));
    if text.sigma() != sigma {
        return Err(Error::Format(
            "header alphabet size does not match the text".into(),
        ));
    }
    let trie_count = r.u8()? as usize;
    expect(trie_count == if tag == 3 { 2 } else { 1 }, "wrong trie count")?;
    let mut tries = Vec::with_capacity(trie_count);
    for _ in 0..trie_count {
        tries.push(read_trie(&mut r, &text)?);
    }
    if r.remaining() != 0 {
        return Err(Error::Format("trailing bytes after the index payload".into()));
    }

    let (variant, kind) = match tag {
        0 => {
            expect(
                beta == 0 && k == 0 && opt == 0 && chi == 0 && g == 0,
                "the simple variant takes no parameters",
            )?;
            (
                IndexVariant::Simple,
                IndexKind::Simple { tree: Arc::new(tries.remove(0)) },
            )
        }
        1 => {
            expect(
                beta == 0 && k == 0 && opt == 0 && g == 0,
                "art-linear takes only chi",
            )?;
            let art = art_from_tree(&text, Arc::new(tries.remove(0)), chi)?;
            (
                IndexVariant::ArtLinear { chi: Some(chi) },
                IndexKind::ArtLinear(art),
            )
        }
        2 => {
            expect(chi == 0 && g == 0, "tradeoff takes beta, k, and opt")?;
            if beta < 1 || beta >= text.sigma() {
                return Err(Error::BetaRange { beta, sigma: text.sigma() });
            }
            let wt = WildcardTree::from_finalized(Arc::new(tries.remove(0)), beta, k + opt)?;
            let ti = tradeoff_from_tree(&text, wt, k, opt)?;
            (
                IndexVariant::Tradeoff { beta, k, opt: Some(opt) },
                IndexKind::Tradeoff(ti),
            )
        }
        3 => {
            expect(beta == 1 && g >= 1, "linear-time stores beta = 1 and g >= 1")?;
            let special = WildcardTree::from_finalized(Arc::new(tries.remove(0)), 1, k + opt)?;
            let fallback = art_from_tree(&text, Arc::new(tries.remove(0)), chi)?;
            (
                IndexVariant::LinearTime { k, opt: Some(opt), g: Some(g), chi: Some(chi) },
                IndexKind::LinearTime { special, g, k, opt, fallback },
            )
        }
        other => {
            return Err(Error::Format(format!("unknown index variant tag {other}")));
        }
    };
    Ok(Index { text, variant, kind })
}

/// Writes an index to a file.
pub fn save_index_to(idx: &Index, path: &Path) -> Result<()> {
    std::fs::write(path, save_index(idx)).map_err(Error::Io)
}

/// Reads an index from a file.
pub fn load_index_from(path: &Path) -> Result<Index> {
    load_index(&std::fs::read(path).map_err(Error::Io)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{build_index, OccurrenceSet, Route};
    use crate::text::GapPattern;
    use proptest::prelude::*;

    fn handle(s: &str) -> TextHandle {
        Arc::new(IndexedText::from_str(s))
    }

    fn pattern(s: &str) -> GapPattern {
        GapPattern::parse(s).unwrap()
    }

    const GOLDEN_TEXT: &str = "acbccbacccddabdaabcdccbccdaa";
    const GOLDEN_PATTERN: &str = "b*{0,4}cc*{3,5}d";

    fn variants() -> Vec<IndexVariant> {
        vec![
            IndexVariant::Simple,
            IndexVariant::ArtLinear { chi: None },
            IndexVariant::Tradeoff { beta: 2, k: 3, opt: Some(6) },
            IndexVariant::LinearTime { k: 3, opt: Some(6), g: None, chi: None },
        ]
    }

    #[test]
    fn round_trip_is_byte_identical_on_every_variant() {
        let t = handle(GOLDEN_TEXT);
        let p = pattern(GOLDEN_PATTERN);
        for variant in variants() {
            let built = build_index(&t, variant).unwrap();
            let bytes = save_index(&built);
            let loaded = load_index(&bytes).unwrap();
            assert_eq!(save_index(&loaded), bytes, "variant {variant:?}");
            assert_eq!(loaded.resolved(), built.resolved(), "variant {variant:?}");
            let (want, want_stats) = built.query(&p).unwrap();
            let (got, got_stats) = loaded.query(&p).unwrap();
            assert_eq!(got, want, "variant {variant:?}");
            assert_eq!(got_stats, want_stats, "variant {variant:?}");
        }
    }

    #[test]
    fn reloading_reproduces_the_frozen_wildcard_tree_annotations() {
        let t = handle(GOLDEN_TEXT);
        let built = build_index(&t, IndexVariant::Tradeoff { beta: 2, k: 2, opt: Some(1) }).unwrap();
        let loaded = load_index(&save_index(&built)).unwrap();
        let (IndexKind::Tradeoff(b), IndexKind::Tradeoff(l)) = (&built.kind, &loaded.kind) else {
            unreachable!();
        };
        assert_eq!(l.wt.stats(), b.wt.stats());
        assert_eq!(l.wt.star_roots(), b.wt.star_roots());
        for v in 0..b.wt.trie().vertex_count() as u32 {
            assert_eq!(
                l.wt.is_construction_heavy(v),
                b.wt.is_construction_heavy(v),
                "heavy flag of {v}"
            );
            assert_eq!(l.wt.wildcard_height(v), b.wt.wildcard_height(v));
        }
        assert_eq!(l.region_ids, b.region_ids);
        assert_eq!(l.region_root_of, b.region_root_of);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let t = handle("bananas");
        let idx = build_index(&t, IndexVariant::Simple).unwrap();
        let good = save_index(&idx);

        assert!(matches!(load_index(&[]), Err(Error::Format(_))));

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(load_index(&bad_magic), Err(Error::Format(_))));

        let mut bad_tag = good.clone();
        bad_tag[8] = 9;
        assert!(matches!(load_index(&bad_tag), Err(Error::Format(_))));

        // A simple index must not carry tradeoff parameters.
        let mut smuggled_beta = good.clone();
        smuggled_beta[9] = 2;
        assert!(matches!(load_index(&smuggled_beta), Err(Error::Format(_))));

        let mut wrong_sigma = good.clone();
        let sigma_off = 8 + 1 + 5 * 8;
        wrong_sigma[sigma_off] = wrong_sigma[sigma_off].wrapping_add(1);
        assert!(matches!(load_index(&wrong_sigma), Err(Error::Format(_))));

        for cut in [4, 9, 40, good.len() / 2, good.len() - 1] {
            assert!(
                matches!(load_index(&good[..cut]), Err(Error::Format(_))),
                "cut at {cut}"
            );
        }

        let mut trailing = good.clone();
        trailing.push(0);
        assert!(matches!(load_index(&trailing), Err(Error::Format(_))));
    }

    #[test]
    fn files_round_trip_through_the_filesystem() {
        let t = handle("bananas");
        let idx = build_index(&t, IndexVariant::ArtLinear { chi: Some(2) }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bananas.wcidx");
        save_index_to(&idx, &path).unwrap();
        let loaded = load_index_from(&path).unwrap();
        assert_eq!(save_index(&loaded), save_index(&idx));

        assert!(matches!(
            load_index_from(&dir.path().join("missing.wcidx")),
            Err(Error::Io(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn round_trips_preserve_query_answers(
            text in proptest::collection::vec(prop_oneof![Just(b'a'), Just(b'b'), Just(b'c')], 4..24),
            which in 0usize..4,
            start_seed in 0usize..100,
            len in 2usize..6,
        ) {
            let t: TextHandle = Arc::new(IndexedText::from_bytes(&text));
            let variant = match which {
                0 => IndexVariant::Simple,
                1 => IndexVariant::ArtLinear { chi: None },
                2 if t.sigma() >= 2 => IndexVariant::Tradeoff { beta: 1, k: 1, opt: Some(1) },
                _ => IndexVariant::LinearTime { k: 1, opt: Some(1), g: None, chi: None },
            };
            let built = build_index(&t, variant).unwrap();
            let bytes = save_index(&built);
            let loaded = load_index(&bytes).unwrap();
            prop_assert_eq!(save_index(&loaded), bytes);

            let n = t.n();
            let len = len.min(n);
            let start = 1 + start_seed % (n - len + 1);
            let mut subs = vec![vec![t.at(start)], Vec::new()];
            for off in 2..len {
                subs[1].push(t.at(start + off));
            }
            let p = GapPattern::new(subs, vec![(0, 1)]).unwrap();
            let (want, _) = built.query(&p).unwrap();
            let (got, stats) = loaded.query(&p).unwrap();
            prop_assert_eq!(got, want);
            if matches!(variant, IndexVariant::LinearTime { .. }) {
                prop_assert!(stats.routed_to != Route::NotApplicable);
            }
            match built.query(&p).unwrap().0 {
                OccurrenceSet::Starts(_) => prop_assert!(p.is_wildcard_only()),
                OccurrenceSet::Spans(_) => prop_assert!(!p.is_wildcard_only()),
            }
        }
    }
}
