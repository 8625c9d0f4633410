//! Canonical forms for stranded graphs.
//!
//! Two graphs are isomorphic when a color-preserving relabeling of vertices,
//! combined with swaps of the two melonic pairs at individual vertices, maps
//! one onto the other. The canonical code is the lexicographically smallest
//! serialization over that group; it is stable across processes and doubles
//! as a compact wire format (codes decode back into their representative).

use crate::graph::{Color, SlotId, TensorGraph};

/// Relabel-invariant identifier of an isomorphism class.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CanonicalCode(pub Vec<u8>);

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

fn map_slot(s: SlotId, perm: &[usize], pair_mask: u16) -> SlotId {
    let v = s.vertex();
    let swapped = if pair_mask >> v & 1 == 1 {
        s.pair_swapped()
    } else {
        s
    };
    SlotId(perm[v] as u8 * 4 + swapped.0 % 4)
}

/// Apply a vertex relabeling (`perm[v]` is the new index of vertex `v`) and a
/// per-vertex pair-swap mask. Propagators are re-sorted; external leg order
/// (and hence leg labels) is preserved.
pub fn relabeled(g: &TensorGraph, perm: &[usize], pair_mask: u16) -> TensorGraph {
    let mut colors = vec![g.vertex_colors()[0]; g.num_vertices()];
    for (v, &c) in g.vertex_colors().iter().enumerate() {
        colors[perm[v]] = c;
    }
    let mut props: Vec<(SlotId, SlotId)> = g
        .propagators()
        .iter()
        .map(|p| {
            (
                map_slot(p.tbar, perm, pair_mask),
                map_slot(p.t, perm, pair_mask),
            )
        })
        .collect();
    props.sort();
    let externals = g
        .externals()
        .iter()
        .map(|&e| map_slot(e, perm, pair_mask))
        .collect();
    TensorGraph::build(colors, props, externals).expect("relabeling preserves validity")
}

fn encode(
    colors: &[Color],
    props: &mut [(u8, u8)],
    externals: &[u8],
    sort_externals: bool,
) -> Vec<u8> {
    props.sort_unstable();
    let mut out = Vec::with_capacity(3 + colors.len() + props.len() * 2 + externals.len());
    out.push(colors.len() as u8);
    out.push(props.len() as u8);
    out.push(externals.len() as u8);
    out.extend(colors.iter().map(|c| c.index()));
    for &(a, b) in props.iter() {
        out.push(a);
        out.push(b);
    }
    let mut ext = externals.to_vec();
    if sort_externals {
        ext.sort_unstable();
    }
    out.extend(ext);
    out
}

fn canonical(g: &TensorGraph, sort_externals: bool) -> CanonicalCode {
    let n = g.num_vertices();
    if n == 0 {
        return CanonicalCode(encode(&[], &mut [], &[], sort_externals));
    }
    let mut best: Option<Vec<u8>> = None;
    let mut perm: Vec<usize> = (0..n).collect();
    let colors = g.vertex_colors();
    // iterate color-preserving permutations and all pair-swap masks
    permute(&mut perm, 0, &mut |perm| {
        // colors travel with their vertices under relabeling
        let mut new_colors = vec![colors[0]; n];
        for v in 0..n {
            new_colors[perm[v]] = colors[v];
        }
        for mask in 0..(1u16 << n) {
            let mut props: Vec<(u8, u8)> = g
                .propagators()
                .iter()
                .map(|p| (map_slot(p.tbar, perm, mask).0, map_slot(p.t, perm, mask).0))
                .collect();
            let ext: Vec<u8> = g
                .externals()
                .iter()
                .map(|&e| map_slot(e, perm, mask).0)
                .collect();
            let cand = encode(&new_colors, &mut props, &ext, sort_externals);
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    });
    CanonicalCode(best.unwrap())
}

fn permute(perm: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        f(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, f);
        perm.swap(k, i);
    }
}

/// Canonical code with external legs kept labeled (isomorphisms must fix each
/// leg).
pub fn canonical_form(g: &TensorGraph) -> CanonicalCode {
    canonical(g, false)
}

/// Canonical code with external legs treated as an unlabeled set. This is the
/// class notion used for inventories and Hopf generators.
pub fn canonical_form_unlabeled(g: &TensorGraph) -> CanonicalCode {
    canonical(g, true)
}

/// Decode a code back into its representative graph.
pub fn decode(code: &CanonicalCode) -> TensorGraph {
    let b = &code.0;
    let (nv, np, ne) = (b[0] as usize, b[1] as usize, b[2] as usize);
    let mut at = 3;
    let colors: Vec<Color> = b[at..at + nv]
        .iter()
        .map(|&c| Color::new(c).unwrap())
        .collect();
    at += nv;
    let mut props = Vec::with_capacity(np);
    for _ in 0..np {
        props.push((SlotId(b[at]), SlotId(b[at + 1])));
        at += 2;
    }
    let externals = b[at..at + ne].iter().map(|&s| SlotId(s)).collect();
    TensorGraph::build(colors, props, externals).expect("canonical codes decode to valid graphs")
}

/// Cheap isomorphism-invariant fingerprint used to pre-bucket graphs before
/// full canonicalization.
pub fn fingerprint(g: &TensorGraph) -> u64 {
    let mut feats: Vec<u32> = g
        .propagators()
        .iter()
        .map(|p| {
            let same_vertex = (p.tbar.vertex() == p.t.vertex()) as u32;
            let same_pair = (same_vertex == 1 && p.tbar.pair() == p.t.pair()) as u32;
            let ca = g.vertex_colors()[p.tbar.vertex()].index() as u32;
            let cb = g.vertex_colors()[p.t.vertex()].index() as u32;
            let (lo, hi) = (ca.min(cb), ca.max(cb));
            same_vertex << 10 | same_pair << 9 | lo << 4 | hi
        })
        .collect();
    feats.sort_unstable();
    let mut ext: Vec<u32> = g
        .externals()
        .iter()
        .map(|e| (g.vertex_colors()[e.vertex()].index() as u32) << 1 | (e.0 % 2) as u32)
        .collect();
    ext.sort_unstable();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut mix = |x: u64| {
        h ^= x;
        h = h.wrapping_mul(0x1000_0000_01b3);
    };
    mix(g.num_vertices() as u64);
    for f in feats {
        mix(f as u64 + 1);
    }
    mix(0xffff);
    for e in ext {
        mix(e as u64 + 1);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    #[test]
    fn relabeling_invariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for g in sample::witnesses() {
            let code = canonical_form(&g);
            let ucode = canonical_form_unlabeled(&g);
            let n = g.num_vertices();
            for _ in 0..50 {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                let mask: u16 = rng.gen_range(0..(1 << n));
                let h = relabeled(&g, &perm, mask);
                assert_eq!(canonical_form(&h), code);
                assert_eq!(canonical_form_unlabeled(&h), ucode);
                if g.is_connected() {
                    assert_eq!(h.is_one_pi().ok(), g.is_one_pi().ok());
                }
            }
        }
    }

    #[test]
    fn distinct_colors_distinct_codes() {
        let c1 = crate::graph::Color::new(1).unwrap();
        let c2 = crate::graph::Color::new(2).unwrap();
        assert_ne!(
            canonical_form_unlabeled(&sample::melon_2pt(c1)),
            canonical_form_unlabeled(&sample::melon_2pt(c2))
        );
        // nested tadpoles with swapped inner/outer colors are inequivalent
        assert_ne!(
            canonical_form_unlabeled(&sample::nested_2pt(c1, c2)),
            canonical_form_unlabeled(&sample::nested_2pt(c2, c1))
        );
        // standard vs pair-crossing tadpole
        assert_ne!(
            canonical_form_unlabeled(&sample::melon_2pt(c1)),
            canonical_form_unlabeled(&sample::crossed_tadpole(c1))
        );
    }

    #[test]
    fn decode_round_trip() {
        for g in sample::witnesses() {
            let code = canonical_form(&g);
            let h = decode(&code);
            assert_eq!(canonical_form(&h), code);
        }
    }

    #[test]
    fn pair_swap_is_an_isomorphism() {
        let c1 = crate::graph::Color::new(1).unwrap();
        let g = sample::melon_4pt(c1);
        let h = relabeled(&g, &[0, 1], 0b01);
        assert_eq!(canonical_form_unlabeled(&g), canonical_form_unlabeled(&h));
    }
}
