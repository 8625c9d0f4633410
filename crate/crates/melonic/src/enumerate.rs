//! Wick-contraction generation of stranded graphs and isomorphism-class
//! inventories.
//!
//! Configurations are generated by choosing external slots and a typed
//! perfect matching of the remaining `T̄`/`T` slots over all vertex color
//! assignments, then grouped by canonical code. Multiplicities count labeled
//! configurations divided by the `n!` vertex-exchange factor, kept as exact
//! rationals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use thiserror::Error;

use crate::canon::{self, CanonicalCode};
use crate::graph::{Color, Residue, ResidueKind, SlotId, SlotKind, TensorGraph};
use crate::topology;
use crate::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerateError {
    #[error("requested {0} vertices exceeds the configured bound {1}")]
    BoundExceeded(usize, usize),
}

/// Default vertex bound for generation (three loops in every sector).
pub const DEFAULT_VERTEX_BOUND: usize = 4;

/// An isomorphism class with its Wick multiplicity.
#[derive(Clone, Debug)]
pub struct WeightedClass {
    pub code: CanonicalCode,
    pub representative: TensorGraph,
    /// labeled Wick configurations / n!
    pub multiplicity: Rat,
}

/// One class of the 1PI superficially divergent inventory.
#[derive(Clone, Debug)]
pub struct ClassEntry {
    pub code: CanonicalCode,
    pub loops: usize,
    pub residue: Residue,
    pub omega: i64,
    pub melonic: bool,
}

impl ClassEntry {
    pub fn graph(&self) -> TensorGraph {
        canon::decode(&self.code)
    }
}

/// Deduplicated inventory of 1PI superficially divergent classes, grouped by
/// loop number and residue kind.
#[derive(Clone, Debug, Default)]
pub struct Inventory {
    classes: BTreeMap<(usize, ResidueKind), Vec<ClassEntry>>,
    /// Divergent classes whose external strands pair in no melonic pattern.
    pub anomalous: Vec<CanonicalCode>,
}

impl Inventory {
    pub fn classes(&self, loops: usize, kind: ResidueKind) -> &[ClassEntry] {
        self.classes
            .get(&(loops, kind))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = &ClassEntry> {
        self.classes.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.classes.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn max_loops(&self) -> usize {
        self.classes.keys().map(|k| k.0).max().unwrap_or(0)
    }
}

/// Vertex counts contributing graphs with `loops <= k` for a residue kind.
/// Slot counting gives `L = (4V - E)/2`, so the loop number `L - V + 1` is
/// `V` for two-point graphs, `V - 1` for four-point and `V + 1` for vacuum.
fn vertex_range(kind: ResidueKind, k_loops: usize) -> Vec<usize> {
    match kind {
        ResidueKind::TwoPoint => (1..=k_loops).collect(),
        ResidueKind::FourPoint => (2..=k_loops + 1).collect(),
        ResidueKind::Vacuum => (1..=k_loops.saturating_sub(1)).collect(),
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn color_assignments(n: usize, sorted_only: bool) -> Vec<Vec<Color>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(n: usize, sorted_only: bool, cur: &mut Vec<Color>, out: &mut Vec<Vec<Color>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let lo = if sorted_only {
            cur.last().map(|c| c.index()).unwrap_or(1)
        } else {
            1
        };
        for c in lo..=5 {
            cur.push(Color::new(c).unwrap());
            rec(n, sorted_only, cur, out);
            cur.pop();
        }
    }
    rec(n, sorted_only, &mut cur, &mut out);
    out
}

/// Scan every connected configuration with `n` vertices and `e` externals and
/// return class counts keyed by unlabeled canonical code. When `sorted_colors`
/// is set only non-decreasing color words are visited, which still reaches
/// every isomorphism class but spoils multiplicities. `keep` prunes graphs
/// before canonicalization.
fn scan_classes(
    n: usize,
    e: usize,
    sorted_colors: bool,
    keep: impl Fn(&TensorGraph) -> bool + Sync,
) -> BTreeMap<CanonicalCode, u64> {
    assert!(e.is_multiple_of(2));
    let half = e / 2;
    let tbar_slots: Vec<SlotId> = (0..n)
        .flat_map(|v| {
            [
                SlotId::new(v, 0, SlotKind::TBar),
                SlotId::new(v, 1, SlotKind::TBar),
            ]
        })
        .collect();
    let t_slots: Vec<SlotId> = (0..n)
        .flat_map(|v| {
            [
                SlotId::new(v, 0, SlotKind::T),
                SlotId::new(v, 1, SlotKind::T),
            ]
        })
        .collect();
    let ext_tbar = combinations(2 * n, half);
    let ext_t = combinations(2 * n, half);

    color_assignments(n, sorted_colors)
        .into_par_iter()
        .map(|colors| {
            let mut local: BTreeMap<CanonicalCode, u64> = BTreeMap::new();
            for et in &ext_t {
                for eb in &ext_tbar {
                    let free_tbar: Vec<SlotId> = (0..2 * n)
                        .filter(|i| !eb.contains(i))
                        .map(|i| tbar_slots[i])
                        .collect();
                    let free_t: Vec<SlotId> = (0..2 * n)
                        .filter(|i| !et.contains(i))
                        .map(|i| t_slots[i])
                        .collect();
                    let mut externals: Vec<SlotId> = et.iter().map(|&i| t_slots[i]).collect();
                    externals.extend(eb.iter().map(|&i| tbar_slots[i]));
                    let m = free_t.len();
                    let mut perm: Vec<usize> = (0..m).collect();
                    loop {
                        let props: Vec<(SlotId, SlotId)> =
                            (0..m).map(|i| (free_tbar[i], free_t[perm[i]])).collect();
                        if connected(n, &props) {
                            let g = TensorGraph::build(colors.clone(), props, externals.clone())
                                .expect("scanned configurations are valid");
                            if keep(&g) {
                                *local
                                    .entry(canon::canonical_form_unlabeled(&g))
                                    .or_insert(0) += 1;
                            }
                        }
                        if !next_permutation(&mut perm) {
                            break;
                        }
                    }
                }
            }
            local
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        })
}

fn connected(n: usize, props: &[(SlotId, SlotId)]) -> bool {
    if n <= 1 {
        return true;
    }
    let mut dsu = crate::graph::Dsu::new(n);
    for (a, b) in props {
        dsu.union(a.vertex(), b.vertex());
    }
    (1..n).all(|v| dsu.find(v) == dsu.find(0))
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// All connected classes with `n_vertices` vertices and the external count of
/// `kind`, with exact Wick multiplicities (labeled count / n!).
pub fn wick_graphs(
    n_vertices: usize,
    kind: ResidueKind,
    bound: usize,
) -> Result<Vec<WeightedClass>, EnumerateError> {
    if n_vertices > bound {
        return Err(EnumerateError::BoundExceeded(n_vertices, bound));
    }
    if n_vertices == 0 {
        return Ok(vec![WeightedClass {
            code: canon::canonical_form_unlabeled(&TensorGraph::empty()),
            representative: TensorGraph::empty(),
            multiplicity: Rat::from_integer(BigInt::from(1)),
        }]);
    }
    let counts = scan_classes(n_vertices, kind.external_count(), false, |_| true);
    let factorial: u64 = (1..=n_vertices as u64).product();
    Ok(counts
        .into_iter()
        .map(|(code, count)| WeightedClass {
            representative: canon::decode(&code),
            code,
            multiplicity: BigRational::new(BigInt::from(count), BigInt::from(factorial)),
        })
        .collect())
}

/// Deduplicated 1PI superficially divergent classes up to `k_loops` loops,
/// across all residue sectors.
pub fn one_pi_divergent_up_to(k_loops: usize, bound: usize) -> Result<Inventory, EnumerateError> {
    let mut inv = Inventory::default();
    for kind in [
        ResidueKind::TwoPoint,
        ResidueKind::FourPoint,
        ResidueKind::Vacuum,
    ] {
        for v in vertex_range(kind, k_loops) {
            if v > bound {
                return Err(EnumerateError::BoundExceeded(v, bound));
            }
            let found = scan_classes(v, kind.external_count(), true, |g| {
                topology::is_divergent(g) && g.is_one_pi().unwrap_or(false)
            });
            for (code, _) in found {
                let g = canon::decode(&code);
                let loops = g.loop_number().expect("inventory graphs are connected");
                let omega = topology::degree_direct(&g).unwrap();
                match g.residue() {
                    Ok(residue) => {
                        inv.classes
                            .entry((loops, residue.kind()))
                            .or_default()
                            .push(ClassEntry {
                                code,
                                loops,
                                residue,
                                omega,
                                melonic: topology::degree_formula(&g)
                                    .map(|r| r.melonic)
                                    .unwrap_or(false),
                            });
                    }
                    Err(_) => inv.anomalous.push(code),
                }
            }
        }
    }
    Ok(inv)
}

/// All connected classes (any divergence) with the given vertex count and
/// residue kind; class codes only. Used by cross-checks that want convergent
/// graphs too.
pub fn connected_classes(n_vertices: usize, kind: ResidueKind) -> Vec<CanonicalCode> {
    scan_classes(n_vertices, kind.external_count(), true, |_| true)
        .into_keys()
        .collect()
}
