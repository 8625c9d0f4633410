//! Grafting operators and the combinatorial Dyson–Schwinger equations.
//!
//! A primitive divergent graph `γ` defines an insertion operator `B+^γ`:
//! two-point arguments dress an internal line of `γ`, four-point arguments
//! replace a vertex of matching color. The normalization
//!
//! `B+^γ(X) = Σ_G bij(γ, X, G) / ((γ|X) · |X|_V · maxf(G)) · G`
//!
//! counts leg bijections onto each target `G`, divided by the number of
//! insertion places, the number of classes sharing `X`'s amputated core and
//! residue, and the number of ways `G` shrinks onto a primitive. Outputs are
//! projected onto superficially divergent classes.
//!
//! Line dressings split into an aligned channel and the *two-color-breaking*
//! companion sector: tadpole insertions whose output no vertex dressing can
//! produce. The grade-one tower argument needs the companions for both the
//! Dyson–Schwinger recursion and the Hochschild cocycle identity to close at
//! two loops; dropping them breaks both, and the checks verify the two
//! outcomes separately.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::canon::{self, CanonicalCode};
use crate::enumerate::{self, Inventory};
use crate::graph::{Color, Residue, ResidueKind, SlotId, SlotKind, TensorGraph};
use crate::hopf::{self, GraphPoly, Monomial, TensorPoly};
use crate::topology;
use crate::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DysonError {
    #[error("argument residue admits no insertion place in this primitive")]
    IncompatibleResidue,
    #[error("leg matching does not respect slot kinds")]
    StrandMismatch,
    #[error("B+ arguments must be single connected classes or the unit")]
    CompositeArgument,
}

/// Where an argument may be grafted into a primitive.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum InsertionPlace {
    /// internal line index (two-point arguments).
    Line(usize),
    /// vertex index (four-point arguments, color-matched).
    Vertex(usize),
}

/// The combinatorial factors entering one `B+` coefficient.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BPlusFactors {
    pub bij: u64,
    pub places: u64,
    pub x_v: u64,
    pub maxf: u64,
}

impl BPlusFactors {
    pub fn coefficient(&self) -> Rat {
        BigRational::new(
            BigInt::from(self.bij),
            BigInt::from(self.places * self.x_v * self.maxf),
        )
    }
}

/// Insertion places of an argument with residue `res` inside `γ`.
pub fn insertion_places(gamma: &TensorGraph, res: Residue) -> Vec<InsertionPlace> {
    match res {
        Residue::TwoPoint => (0..gamma.num_propagators())
            .map(InsertionPlace::Line)
            .collect(),
        Residue::FourPoint(c) => gamma
            .vertex_colors()
            .iter()
            .enumerate()
            .filter(|&(_, &vc)| vc == c)
            .map(|(v, _)| InsertionPlace::Vertex(v))
            .collect(),
        Residue::Vacuum => Vec::new(),
    }
}

/// Leg matching for a vertex insertion: the argument's external leg index for
/// each of the removed vertex's slots `(p1.T, p1.T̄, p2.T, p2.T̄)`. Line
/// insertions are forced by slot kinds and take no matching data.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LegMatching {
    Line,
    Vertex([usize; 4]),
}

/// All kind-respecting vertex matchings for a four-point argument.
pub fn vertex_matchings(x: &TensorGraph) -> Vec<[usize; 4]> {
    let t_legs: Vec<usize> = x
        .externals()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.kind() == SlotKind::T)
        .map(|(i, _)| i)
        .collect();
    let tb_legs: Vec<usize> = x
        .externals()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.kind() == SlotKind::TBar)
        .map(|(i, _)| i)
        .collect();
    let mut out = Vec::with_capacity(4);
    for ti in 0..2 {
        for bi in 0..2 {
            out.push([t_legs[ti], tb_legs[bi], t_legs[1 - ti], tb_legs[1 - bi]]);
        }
    }
    out
}

/// Graft `x` into `gamma` at `place`. The loop numbers add.
pub fn insert(
    gamma: &TensorGraph,
    x: &TensorGraph,
    place: InsertionPlace,
    matching: LegMatching,
) -> Result<TensorGraph, DysonError> {
    match (place, matching) {
        (InsertionPlace::Line(i), LegMatching::Line) => insert_line(gamma, i, x),
        (InsertionPlace::Vertex(v), LegMatching::Vertex(m)) => insert_vertex(gamma, v, x, m),
        _ => Err(DysonError::StrandMismatch),
    }
}

fn insert_line(
    gamma: &TensorGraph,
    line: usize,
    x: &TensorGraph,
) -> Result<TensorGraph, DysonError> {
    if x.num_externals() != 2 {
        return Err(DysonError::IncompatibleResidue);
    }
    let x_t = x
        .externals()
        .iter()
        .copied()
        .find(|s| s.kind() == SlotKind::T)
        .ok_or(DysonError::StrandMismatch)?;
    let x_tb = x
        .externals()
        .iter()
        .copied()
        .find(|s| s.kind() == SlotKind::TBar)
        .ok_or(DysonError::StrandMismatch)?;
    let offset = gamma.num_vertices();
    let shift = |s: SlotId| SlotId(s.0 + 4 * offset as u8);
    let mut colors = gamma.vertex_colors().to_vec();
    colors.extend_from_slice(x.vertex_colors());
    let cut = gamma.propagators()[line];
    let mut props: Vec<(SlotId, SlotId)> = gamma
        .propagators()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != line)
        .map(|(_, p)| (p.tbar, p.t))
        .collect();
    props.push((cut.tbar, shift(x_t)));
    props.push((shift(x_tb), cut.t));
    props.extend(x.propagators().iter().map(|p| (shift(p.tbar), shift(p.t))));
    TensorGraph::build(colors, props, gamma.externals().to_vec())
        .map_err(|_| DysonError::StrandMismatch)
}

fn insert_vertex(
    gamma: &TensorGraph,
    vertex: usize,
    x: &TensorGraph,
    matching: [usize; 4],
) -> Result<TensorGraph, DysonError> {
    if x.num_externals() != 4 {
        return Err(DysonError::IncompatibleResidue);
    }
    // the matching must map T slots to T legs and T̄ slots to T̄ legs
    for (k, &leg) in matching.iter().enumerate() {
        let want = if k % 2 == 0 {
            SlotKind::T
        } else {
            SlotKind::TBar
        };
        if x.externals().get(leg).map(|s| s.kind()) != Some(want) {
            return Err(DysonError::StrandMismatch);
        }
    }
    let mut colors: Vec<Color> = gamma
        .vertex_colors()
        .iter()
        .enumerate()
        .filter(|&(v, _)| v != vertex)
        .map(|(_, &c)| c)
        .collect();
    let offset = colors.len();
    colors.extend_from_slice(x.vertex_colors());
    let shift = |s: SlotId| SlotId(s.0 + 4 * offset as u8);
    // where each slot of the removed vertex lands inside x
    let landing = |s: SlotId| -> SlotId {
        let local = (s.pair() * 2 + if s.kind() == SlotKind::T { 0 } else { 1 }) as usize;
        shift(x.externals()[matching[local]])
    };
    let move_slot = |s: SlotId| -> SlotId {
        if s.vertex() == vertex {
            landing(s)
        } else if s.vertex() > vertex {
            SlotId(s.0 - 4)
        } else {
            s
        }
    };
    let mut props: Vec<(SlotId, SlotId)> = gamma
        .propagators()
        .iter()
        .map(|p| (move_slot(p.tbar), move_slot(p.t)))
        .collect();
    props.extend(x.propagators().iter().map(|p| (shift(p.tbar), shift(p.t))));
    let externals = gamma.externals().iter().map(|&e| move_slot(e)).collect();
    TensorGraph::build(colors, props, externals).map_err(|_| DysonError::StrandMismatch)
}

/// `maxf(G)`: the number of subdivergence families whose contraction leaves a
/// primitive graph (1 when `G` is itself primitive).
pub fn maxf(g: &TensorGraph) -> u64 {
    let families = hopf::divergent_subgraph_sets(g);
    if families.is_empty() {
        return 1;
    }
    let count = families
        .iter()
        .filter(|family| {
            hopf::contract(g, family)
                .map(|q| hopf::divergent_subgraph_sets(&q).is_empty())
                .unwrap_or(false)
        })
        .count() as u64;
    count.max(1)
}

/// Whether a graph is primitive: no superficially divergent proper subgraph.
pub fn is_primitive(g: &TensorGraph) -> bool {
    hopf::divergent_subgraph_sets(g).is_empty()
}

/// Canonical code of the amputated core: external legs removed and the
/// melonic pair structure forgotten. Two dressings of the same core differ
/// only in how the external strands leave it.
fn amputated_core_code(g: &TensorGraph) -> Vec<u8> {
    let n = g.num_vertices();
    let mut best: Option<Vec<u8>> = None;
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |perm| {
        let mut colors = vec![0u8; n];
        for v in 0..n {
            colors[perm[v]] = g.vertex_colors()[v].index();
        }
        let mut edges: Vec<(u8, u8)> = g
            .propagators()
            .iter()
            .map(|p| (perm[p.tbar.vertex()] as u8, perm[p.t.vertex()] as u8))
            .collect();
        edges.sort_unstable();
        let mut free = vec![[0u8; 2]; n];
        for e in g.externals() {
            free[perm[e.vertex()]][if e.kind() == SlotKind::T { 0 } else { 1 }] += 1;
        }
        let mut cand = colors;
        for (a, b) in edges {
            cand.push(a);
            cand.push(b);
        }
        for f in free {
            cand.extend_from_slice(&f);
        }
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    });
    best.unwrap_or_default()
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

/// `|X|_V`: the number of classes equal to `X` upon removal of external legs
/// — same vertex count, same residue and the same amputated core. Cached.
pub fn x_v_count(x: &TensorGraph) -> u64 {
    if x.num_vertices() == 0 {
        return 1;
    }
    static CACHE: OnceLock<Mutex<HashMap<CanonicalCode, u64>>> = OnceLock::new();
    let key = canon::canonical_form_unlabeled(x);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().unwrap().get(&key) {
        return v;
    }
    let kind = match x.residue() {
        Ok(r) => r.kind(),
        Err(_) => ResidueKind::Vacuum,
    };
    let res = x.residue().ok();
    let core = amputated_core_code(x);
    let count = enumerate::connected_classes(x.num_vertices(), kind)
        .into_iter()
        .filter(|code| {
            let y = canon::decode(code);
            y.residue().ok() == res && amputated_core_code(&y) == core
        })
        .count() as u64;
    cache.lock().unwrap().insert(key, count);
    count
}

/// `B+^γ(X)` for a single primitive. The unit argument returns `γ` itself;
/// composite monomials are rejected. Outputs are projected onto
/// superficially divergent classes.
pub fn b_plus(gamma: &TensorGraph, x: &GraphPoly) -> Result<GraphPoly, DysonError> {
    let mut out = GraphPoly::zero();
    for (mono, coeff) in x.terms() {
        if mono.is_unit() {
            out.add_term(
                Monomial::single(canon::canonical_form_unlabeled(gamma)),
                coeff.clone(),
            );
            continue;
        }
        if mono.factors().len() != 1 {
            return Err(DysonError::CompositeArgument);
        }
        let xg = canon::decode(&mono.factors()[0]);
        for (code, factors) in b_plus_targets(gamma, &xg) {
            out.add_term(Monomial::single(code), coeff * factors.coefficient());
        }
    }
    Ok(out)
}

/// Divergent targets of grafting the single class `x` into `gamma`, with
/// their combinatorial factors.
pub fn b_plus_targets(gamma: &TensorGraph, x: &TensorGraph) -> Vec<(CanonicalCode, BPlusFactors)> {
    let res = match x.residue() {
        Ok(r) => r,
        Err(_) => return Vec::new(),
    };
    let places = insertion_places(gamma, res);
    if places.is_empty() {
        return Vec::new();
    }
    let mut bij: BTreeMap<CanonicalCode, u64> = BTreeMap::new();
    for &place in &places {
        let matchings: Vec<LegMatching> = match place {
            InsertionPlace::Line(_) => vec![LegMatching::Line],
            InsertionPlace::Vertex(_) => vertex_matchings(x)
                .into_iter()
                .map(LegMatching::Vertex)
                .collect(),
        };
        for m in matchings {
            let target = insert(gamma, x, place, m).expect("enumerated matchings are valid");
            if topology::is_divergent(&target) {
                *bij.entry(canon::canonical_form_unlabeled(&target))
                    .or_insert(0) += 1;
            }
        }
    }
    let x_v = x_v_count(x);
    bij.into_iter()
        .map(|(code, b)| {
            let target = canon::decode(&code);
            (
                code,
                BPlusFactors {
                    bij: b,
                    places: places.len() as u64,
                    x_v,
                    maxf: maxf(&target),
                },
            )
        })
        .collect()
}

/// Primitives with `k` loops and residue kind `r` in the inventory.
pub fn primitives(inv: &Inventory, k: usize, kind: ResidueKind) -> Vec<TensorGraph> {
    inv.classes(k, kind)
        .iter()
        .map(|e| e.graph())
        .filter(is_primitive)
        .collect()
}

/// Graded operator `B+^{k;r} = Σ_{|γ|=k, res γ = r} B+^γ` on a regular
/// argument.
pub fn b_plus_graded(
    inv: &Inventory,
    k: usize,
    kind: ResidueKind,
    x: &GraphPoly,
) -> Result<GraphPoly, DysonError> {
    let mut out = GraphPoly::zero();
    for gamma in primitives(inv, k, kind) {
        out = out.add(&b_plus(&gamma, x)?);
    }
    Ok(out)
}

/// A companion dressing: a tadpole class grafted on a specific line of a
/// specific primitive through its second attachment orientation.
#[derive(Clone, Debug)]
pub struct Companion {
    pub host: CanonicalCode,
    pub line: usize,
    pub tadpole: CanonicalCode,
    pub target: CanonicalCode,
    /// Whether the dressing interrupts faces of two different colors (the
    /// tadpole color differs from the open-face color of the host line).
    pub two_color_breaking: bool,
    pub coefficient: Rat,
}

/// The companion sector of one primitive host: every line dressing enters
/// once more through the tadpole's other melonic pair. Mixed-color entries
/// are the two-color-breaking configurations; the aligned entry is the
/// pair-swapped copy of the regular dressing.
pub fn breaking_companions(gamma: &TensorGraph) -> Vec<Companion> {
    let host_code = canon::canonical_form_unlabeled(gamma);
    let lines = gamma.num_propagators() as u64;
    let mut out = Vec::new();
    for line in 0..gamma.num_propagators() {
        // the open-face colors running along this line
        let p = gamma.propagators()[line];
        let open_colors: BTreeSet<Color> = gamma
            .open_faces()
            .filter(|f| f.slots.contains(&p.tbar))
            .map(|f| f.color)
            .collect();
        for c in Color::all() {
            let tad = crate::sample::melon_2pt(c);
            let target = insert(gamma, &tad, InsertionPlace::Line(line), LegMatching::Line)
                .expect("line insertions are valid");
            if !topology::is_divergent(&target) {
                continue;
            }
            let code = canon::canonical_form_unlabeled(&target);
            let factors = BPlusFactors {
                bij: 1,
                places: lines,
                x_v: x_v_count(&tad),
                maxf: maxf(&target),
            };
            out.push(Companion {
                host: host_code.clone(),
                line,
                tadpole: canon::canonical_form_unlabeled(&tad),
                target: code,
                two_color_breaking: !open_colors.contains(&c),
                coefficient: factors.coefficient(),
            });
        }
    }
    out
}

/// The grade-one tower argument for residue kind `r`: one two-point dressing
/// per line plus the vertex-function dressing counted once per vertex place.
pub fn tower_argument(inv: &Inventory, kind: ResidueKind) -> GraphPoly {
    let h2 = hopf::h_sum(inv, 1, ResidueKind::TwoPoint);
    let h4 = hopf::h_sum(inv, 1, ResidueKind::FourPoint);
    let vertex_places = match kind {
        ResidueKind::TwoPoint => 1,
        ResidueKind::FourPoint => 2,
        ResidueKind::Vacuum => 0,
    };
    h2.add(&h4.scale(&Rat::from_integer(BigInt::from(vertex_places))))
}

/// Apply the full grade-one tower operator: regular insertions of the
/// argument plus, optionally, the companion sector.
pub fn apply_tower(
    inv: &Inventory,
    kind: ResidueKind,
    x: &GraphPoly,
    include_breaking: bool,
) -> Result<GraphPoly, DysonError> {
    let mut out = b_plus_graded(inv, 1, kind, x)?;
    if include_breaking {
        for gamma in primitives(inv, 1, kind) {
            for comp in breaking_companions(&gamma) {
                out.add_term(Monomial::single(comp.target), comp.coefficient);
            }
        }
    }
    Ok(out)
}

/// Outcome of one Hochschild-cocycle check.
#[derive(Clone, Debug)]
pub struct CocycleReport {
    pub loops: usize,
    pub kind: ResidueKind,
    pub include_breaking: bool,
    pub holds: bool,
    pub lhs: TensorPoly,
    pub rhs: TensorPoly,
    pub discrepancy: TensorPoly,
}

/// Verify `Δ(B+^{1;r}(X)) = B+^{1;r}(X) ⊗ 1 + (id ⊗ B+^{1;r})Δ(X)` at output
/// grade `loops` (1 or 2). The `a ⊗ 1_H` terms of `Δ(X)` pair the class `a`
/// with the sum of primitives that admit it as an insertion; companion terms
/// contribute only through the `1_H ⊗ a` channel.
pub fn check_cocycle(
    inv: &Inventory,
    loops: usize,
    kind: ResidueKind,
    include_breaking: bool,
) -> Result<CocycleReport, DysonError> {
    let arg = match loops {
        1 => GraphPoly::one(),
        2 => tower_argument(inv, kind),
        _ => return Err(DysonError::CompositeArgument),
    };
    // the companion sector dresses lines; there are no dressings at grade 0
    let include_breaking = include_breaking && loops >= 2;
    let applied = apply_tower(inv, kind, &arg, include_breaking)?;
    let lhs = hopf::coproduct(&applied);

    let mut rhs = TensorPoly::tensor(&applied, &GraphPoly::one());
    let prims = primitives(inv, 1, kind);
    for (mono, coeff) in arg.terms() {
        if mono.is_unit() {
            // Δ(1) = 1 ⊗ 1; every primitive hosts the empty insertion
            let mut hosts = GraphPoly::zero();
            for gamma in &prims {
                hosts.add_term(
                    Monomial::single(canon::canonical_form_unlabeled(gamma)),
                    Rat::one(),
                );
            }
            rhs = rhs.add(&TensorPoly::tensor(&GraphPoly::one().scale(coeff), &hosts));
            continue;
        }
        let a = canon::decode(&mono.factors()[0]);
        let res = a.residue().map_err(|_| DysonError::IncompatibleResidue)?;
        // a ⊗ 1 term: pair a with its admissible hosts
        let mut hosts = GraphPoly::zero();
        for gamma in &prims {
            if !insertion_places(gamma, res).is_empty() {
                hosts.add_term(
                    Monomial::single(canon::canonical_form_unlabeled(gamma)),
                    Rat::one(),
                );
            }
        }
        rhs = rhs.add(&TensorPoly::tensor(
            &GraphPoly::from_monomial(mono.clone()).scale(coeff),
            &hosts,
        ));
        // 1 ⊗ a term: regular insertion of a
        let image = b_plus_graded(inv, 1, kind, &GraphPoly::from_monomial(mono.clone()))?;
        rhs = rhs.add(&TensorPoly::tensor(&GraphPoly::one(), &image.scale(coeff)));
        // grade-one arguments are primitive: Δ' contributes nothing here
        debug_assert!(hopf::reduced_coproduct(&GraphPoly::from_monomial(mono.clone())).is_zero());
    }
    if include_breaking {
        // companions are primitive and contribute only 1 ⊗ B(companion)
        let mut companion_image = GraphPoly::zero();
        for gamma in &prims {
            for comp in breaking_companions(gamma) {
                companion_image.add_term(Monomial::single(comp.target), comp.coefficient);
            }
        }
        rhs = rhs.add(&TensorPoly::tensor(&GraphPoly::one(), &companion_image));
    }
    let discrepancy = lhs.sub(&rhs);
    Ok(CocycleReport {
        loops,
        kind,
        include_breaking,
        holds: discrepancy.is_zero(),
        lhs,
        rhs,
        discrepancy,
    })
}

/// Outcome of the combinatorial Dyson–Schwinger check at a loop order.
#[derive(Clone, Debug)]
pub struct DseReport {
    pub loops: usize,
    pub kind: ResidueKind,
    pub include_breaking: bool,
    pub holds: bool,
    pub expected: GraphPoly,
    pub produced: GraphPoly,
    pub difference: GraphPoly,
}

/// Verify that the grafting tower reproduces the full graph sum:
/// `h_k^r = Σ_j B+^{j;r}(X_j)` truncated at `k ∈ {1, 2}` loops.
pub fn check_dse(
    inv: &Inventory,
    loops: usize,
    kind: ResidueKind,
    include_breaking: bool,
) -> Result<DseReport, DysonError> {
    let expected = hopf::h_sum(inv, loops, kind);
    let produced = match loops {
        1 => apply_tower(inv, kind, &GraphPoly::one(), false)?,
        2 => {
            let mut p = apply_tower(inv, kind, &tower_argument(inv, kind), include_breaking)?;
            // grade-two primitives enter through B+^{2;r}(1_H)
            for gamma in primitives(inv, 2, kind) {
                p.add_term(
                    Monomial::single(canon::canonical_form_unlabeled(&gamma)),
                    Rat::one(),
                );
            }
            p
        }
        _ => return Err(DysonError::CompositeArgument),
    };
    let difference = expected.sub(&produced);
    Ok(DseReport {
        loops,
        kind,
        include_breaking,
        holds: difference.is_zero(),
        expected,
        produced,
        difference,
    })
}
