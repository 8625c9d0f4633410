//! The Connes–Kreimer Hopf algebra of 1PI superficially divergent graphs.
//!
//! The algebra is the free commutative algebra on isomorphism classes of
//! connected 1PI graphs; the product is disjoint union and the unit is the
//! empty graph. The coproduct splits a graph over families of pairwise
//! disjoint 1PI superficially divergent subgraphs,
//!
//! `Δ(G) = G ⊗ 1 + 1 ⊗ G + Σ_γ γ ⊗ G/γ`,
//!
//! with two-point subgraphs shrinking to a line and four-point subgraphs to a
//! vertex of their residue color. All coefficients are exact rationals.
//!
//! Vacuum graphs carry a divergence degree but are excluded from the algebra.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::canon::{self, CanonicalCode};
use crate::enumerate::Inventory;
use crate::graph::{Color, GraphError, Residue, ResidueKind, SlotId, SlotKind, TensorGraph};
use crate::topology;
use crate::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HopfError {
    #[error("contraction requires a two- or four-point subgraph")]
    NonContractibleResidue,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Commutative monomial: a multiset of connected class codes. The empty
/// multiset is the unit `1_H`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(Vec<CanonicalCode>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn single(code: CanonicalCode) -> Self {
        Monomial(vec![code])
    }

    pub fn from_codes(mut codes: Vec<CanonicalCode>) -> Self {
        codes.sort();
        Monomial(codes)
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[CanonicalCode] {
        &self.0
    }

    pub fn product(&self, other: &Monomial) -> Monomial {
        let mut codes = self.0.clone();
        codes.extend(other.0.iter().cloned());
        codes.sort();
        Monomial(codes)
    }

    /// Total loop grade: sum of component loop numbers.
    pub fn grade(&self) -> usize {
        self.0
            .iter()
            .map(|c| {
                canon::decode(c)
                    .loop_number()
                    .expect("components are connected")
            })
            .sum()
    }
}

/// Formal linear combination of monomials with rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GraphPoly(BTreeMap<Monomial, Rat>);

impl GraphPoly {
    pub fn zero() -> Self {
        GraphPoly(BTreeMap::new())
    }

    pub fn one() -> Self {
        let mut m = BTreeMap::new();
        m.insert(Monomial::unit(), Rat::one());
        GraphPoly(m)
    }

    pub fn from_graph(g: &TensorGraph) -> Self {
        Self::from_code(canon::canonical_form_unlabeled(g))
    }

    pub fn from_code(code: CanonicalCode) -> Self {
        Self::from_monomial(Monomial::single(code))
    }

    pub fn from_monomial(m: Monomial) -> Self {
        let mut t = BTreeMap::new();
        t.insert(m, Rat::one());
        GraphPoly(t)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.0.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.0.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rat {
        self.0.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.0.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &GraphPoly) -> GraphPoly {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &GraphPoly) -> GraphPoly {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, k: &Rat) -> GraphPoly {
        if k.is_zero() {
            return GraphPoly::zero();
        }
        GraphPoly(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    pub fn mul(&self, other: &GraphPoly) -> GraphPoly {
        let mut out = GraphPoly::zero();
        for (m1, c1) in self.terms() {
            for (m2, c2) in other.terms() {
                out.add_term(m1.product(m2), c1 * c2);
            }
        }
        out
    }
}

/// Element of `H ⊗ H`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TensorPoly(BTreeMap<(Monomial, Monomial), Rat>);

impl TensorPoly {
    pub fn zero() -> Self {
        TensorPoly(BTreeMap::new())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Monomial, Monomial), &Rat)> {
        self.0.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.0.len()
    }

    pub fn add_term(&mut self, l: Monomial, r: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.0.entry((l, r)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &TensorPoly) -> TensorPoly {
        let mut out = self.clone();
        for ((l, r), c) in other.terms() {
            out.add_term(l.clone(), r.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &TensorPoly) -> TensorPoly {
        let mut out = self.clone();
        for ((l, r), c) in other.terms() {
            out.add_term(l.clone(), r.clone(), -c.clone());
        }
        out
    }

    /// Componentwise product in `H ⊗ H`.
    pub fn mul(&self, other: &TensorPoly) -> TensorPoly {
        let mut out = TensorPoly::zero();
        for ((l1, r1), c1) in self.terms() {
            for ((l2, r2), c2) in other.terms() {
                out.add_term(l1.product(l2), r1.product(r2), c1 * c2);
            }
        }
        out
    }

    pub fn tensor(a: &GraphPoly, b: &GraphPoly) -> TensorPoly {
        let mut out = TensorPoly::zero();
        for (m1, c1) in a.terms() {
            for (m2, c2) in b.terms() {
                out.add_term(m1.clone(), m2.clone(), c1 * c2);
            }
        }
        out
    }
}

/// One 1PI divergent subgraph inside a host.
#[derive(Clone, Debug)]
pub struct Subgraph {
    /// host propagator indices, sorted.
    pub props: Vec<usize>,
    /// host vertices, sorted.
    pub vertices: Vec<usize>,
    /// uncovered host slots, sorted: the subgraph's external legs.
    pub uncovered: Vec<SlotId>,
    /// standalone extraction (vertices reindexed).
    pub graph: TensorGraph,
    pub code: CanonicalCode,
    pub residue: Residue,
}

/// Extract the standalone graph of one connected propagator subset.
fn extract(g: &TensorGraph, props: &[usize], vertices: &[usize]) -> (TensorGraph, Vec<SlotId>) {
    let vmap: HashMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let remap = |s: SlotId| SlotId::new(vmap[&s.vertex()], s.pair(), s.kind());
    let colors = vertices.iter().map(|&v| g.vertex_colors()[v]).collect();
    let pairings: Vec<(SlotId, SlotId)> = props
        .iter()
        .map(|&i| {
            let p = g.propagators()[i];
            (remap(p.tbar), remap(p.t))
        })
        .collect();
    let mut covered: Vec<SlotId> = Vec::new();
    for &i in props {
        covered.push(g.propagators()[i].tbar);
        covered.push(g.propagators()[i].t);
    }
    let mut uncovered: Vec<SlotId> = vertices
        .iter()
        .flat_map(|&v| (0..4).map(move |k| SlotId((v * 4 + k) as u8)))
        .filter(|s| !covered.contains(s))
        .collect();
    uncovered.sort();
    let externals = uncovered.iter().map(|&s| remap(s)).collect();
    (
        TensorGraph::build(colors, pairings, externals).expect("component extraction is valid"),
        uncovered,
    )
}

/// All families of pairwise disjoint 1PI superficially divergent proper
/// subgraphs of `g`. Subgraphs are sets of internal lines, so every component
/// carries at least one loop; the full graph is excluded (it is the trivial
/// coproduct term).
pub fn divergent_subgraph_sets(g: &TensorGraph) -> Vec<Vec<Subgraph>> {
    let l = g.num_propagators();
    let mut families = Vec::new();
    if l == 0 {
        return families;
    }
    'subsets: for mask in 1u32..(1u32 << l) {
        if mask == (1u32 << l) - 1 {
            continue;
        }
        let props: Vec<usize> = (0..l).filter(|i| mask >> i & 1 == 1).collect();
        let mut dsu = crate::graph::Dsu::new(g.num_vertices());
        for &i in &props {
            let p = g.propagators()[i];
            dsu.union(p.tbar.vertex(), p.t.vertex());
        }
        let mut comp_props: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &i in &props {
            let root = dsu.find(g.propagators()[i].tbar.vertex());
            comp_props.entry(root).or_default().push(i);
        }
        let mut family = Vec::new();
        for (_, comp) in comp_props {
            let mut vertices: Vec<usize> = comp
                .iter()
                .flat_map(|&i| {
                    let p = g.propagators()[i];
                    [p.tbar.vertex(), p.t.vertex()]
                })
                .collect();
            vertices.sort_unstable();
            vertices.dedup();
            if comp.len() < vertices.len() {
                continue 'subsets; // tree component: no loop
            }
            let (sub, uncovered) = extract(g, &comp, &vertices);
            if !sub.is_one_pi().unwrap_or(false) {
                continue 'subsets;
            }
            if topology::degree_direct(&sub).map(|w| w < 0).unwrap_or(true) {
                continue 'subsets;
            }
            let residue = match sub.residue() {
                Ok(r @ (Residue::TwoPoint | Residue::FourPoint(_))) => r,
                _ => continue 'subsets,
            };
            family.push(Subgraph {
                props: comp.clone(),
                vertices,
                uncovered,
                code: canon::canonical_form_unlabeled(&sub),
                graph: sub,
                residue,
            });
        }
        families.push(family);
    }
    families
}

/// The melonic pairing of a four-point subgraph's legs, in host slot ids:
/// `[(t1, tb1), (t2, tb2)]`, the pairs joined by the four aligned colors.
fn melonic_pairs(sub: &Subgraph) -> [(SlotId, SlotId); 2] {
    let c = match sub.residue {
        Residue::FourPoint(c) => c,
        _ => unreachable!("only four-point subgraphs have melonic pairs"),
    };
    let mut pairs: Vec<(usize, usize)> = sub
        .graph
        .boundary_edges()
        .iter()
        .filter(|e| e.2 != c)
        .map(|e| (e.0, e.1))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    debug_assert_eq!(pairs.len(), 2);
    let ordered = |(a, b): (usize, usize)| {
        let (sa, sb) = (sub.uncovered[a], sub.uncovered[b]);
        if sa.kind() == SlotKind::T {
            (sa, sb)
        } else {
            (sb, sa)
        }
    };
    [ordered(pairs[0]), ordered(pairs[1])]
}

/// Contract a family of disjoint divergent subgraphs inside `g`: two-point
/// components shrink to a line segment, four-point components to a vertex of
/// their residue color. External leg labels are preserved.
pub fn contract(g: &TensorGraph, family: &[Subgraph]) -> Result<TensorGraph, HopfError> {
    let mut comp_of: HashMap<usize, usize> = HashMap::new();
    for (ci, sub) in family.iter().enumerate() {
        for &v in &sub.vertices {
            comp_of.insert(v, ci);
        }
    }
    let kept: Vec<usize> = (0..g.num_vertices())
        .filter(|v| !comp_of.contains_key(v))
        .collect();
    let mut new_colors: Vec<Color> = kept.iter().map(|&v| g.vertex_colors()[v]).collect();
    let kept_index: HashMap<usize, usize> = kept.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut redirect: HashMap<SlotId, SlotId> = HashMap::new();
    let mut two_in: HashMap<SlotId, usize> = HashMap::new(); // uncovered T slot -> comp
    let mut two_out: HashMap<SlotId, usize> = HashMap::new(); // uncovered T̄ slot -> comp
    let mut comp_ports: Vec<Option<(SlotId, SlotId)>> = vec![None; family.len()];
    for (ci, sub) in family.iter().enumerate() {
        match sub.residue {
            Residue::FourPoint(c) => {
                let w = new_colors.len();
                new_colors.push(c);
                let [(t1, tb1), (t2, tb2)] = melonic_pairs(sub);
                redirect.insert(t1, SlotId::new(w, 0, SlotKind::T));
                redirect.insert(tb1, SlotId::new(w, 0, SlotKind::TBar));
                redirect.insert(t2, SlotId::new(w, 1, SlotKind::T));
                redirect.insert(tb2, SlotId::new(w, 1, SlotKind::TBar));
            }
            Residue::TwoPoint => {
                let t = sub
                    .uncovered
                    .iter()
                    .copied()
                    .find(|s| s.kind() == SlotKind::T)
                    .expect("two-point subgraph has a T leg");
                let tb = sub
                    .uncovered
                    .iter()
                    .copied()
                    .find(|s| s.kind() == SlotKind::TBar)
                    .expect("two-point subgraph has a T̄ leg");
                two_in.insert(t, ci);
                two_out.insert(tb, ci);
                comp_ports[ci] = Some((t, tb));
            }
            Residue::Vacuum => return Err(HopfError::NonContractibleResidue),
        }
    }
    for &v in &kept {
        for k in 0..4 {
            let s = SlotId((v * 4 + k) as u8);
            redirect.insert(s, SlotId::new(kept_index[&v], s.pair(), s.kind()));
        }
    }

    let mut in_family = vec![false; g.num_propagators()];
    for sub in family {
        for &i in &sub.props {
            in_family[i] = true;
        }
    }
    let mut cover: HashMap<SlotId, usize> = HashMap::new();
    for (i, p) in g.propagators().iter().enumerate() {
        if !in_family[i] {
            cover.insert(p.tbar, i);
            cover.insert(p.t, i);
        }
    }
    let is_external = |s: SlotId| g.externals().contains(&s);

    // follow a line forward through contracted two-point components
    let walk_forward = |mut t_slot: SlotId| -> Result<SlotId, SlotId> {
        loop {
            match two_in.get(&t_slot) {
                None => return Ok(t_slot),
                Some(&ci) => {
                    let (_, tb) = comp_ports[ci].unwrap();
                    if is_external(tb) {
                        return Err(tb);
                    }
                    t_slot = g.propagators()[cover[&tb]].t;
                }
            }
        }
    };
    let walk_backward = |mut tb_slot: SlotId| -> Result<SlotId, SlotId> {
        loop {
            match two_out.get(&tb_slot) {
                None => return Ok(tb_slot),
                Some(&ci) => {
                    let (t, _) = comp_ports[ci].unwrap();
                    if is_external(t) {
                        return Err(t);
                    }
                    tb_slot = g.propagators()[cover[&t]].tbar;
                }
            }
        }
    };

    let mut new_props = Vec::new();
    for (i, p) in g.propagators().iter().enumerate() {
        if in_family[i] || two_out.contains_key(&p.tbar) {
            continue; // inside a component, or mid-chain
        }
        if let Ok(t_end) = walk_forward(p.t) {
            new_props.push((redirect[&p.tbar], redirect[&t_end]));
        }
        // chains ending on an external leg are handled with the externals
    }
    let mut new_externals = Vec::with_capacity(g.num_externals());
    for &leg in g.externals() {
        if let Some(&ci) = two_in.get(&leg) {
            let (_, tb) = comp_ports[ci].unwrap();
            debug_assert!(!is_external(tb), "a chain may not span two legs");
            let start = g.propagators()[cover[&tb]].t;
            let t_end = walk_forward(start).expect("chains cannot end on two legs");
            new_externals.push(redirect[&t_end]);
        } else if let Some(&ci) = two_out.get(&leg) {
            let (t, _) = comp_ports[ci].unwrap();
            debug_assert!(!is_external(t));
            let start = g.propagators()[cover[&t]].tbar;
            let tb_end = walk_backward(start).expect("chains cannot end on two legs");
            new_externals.push(redirect[&tb_end]);
        } else {
            new_externals.push(redirect[&leg]);
        }
    }
    Ok(TensorGraph::build(new_colors, new_props, new_externals)?)
}

/// Coproduct of a single connected 1PI class.
pub fn coproduct_graph(g: &TensorGraph) -> TensorPoly {
    let code = canon::canonical_form_unlabeled(g);
    let mut out = TensorPoly::zero();
    out.add_term(Monomial::single(code.clone()), Monomial::unit(), Rat::one());
    out.add_term(Monomial::unit(), Monomial::single(code), Rat::one());
    for family in divergent_subgraph_sets(g) {
        let left = Monomial::from_codes(family.iter().map(|s| s.code.clone()).collect());
        let contracted = contract(g, &family).expect("divergent families contract");
        let right = Monomial::single(canon::canonical_form_unlabeled(&contracted));
        out.add_term(left, right, Rat::one());
    }
    out
}

fn coproduct_monomial(m: &Monomial) -> TensorPoly {
    let mut out = TensorPoly::zero();
    out.add_term(Monomial::unit(), Monomial::unit(), Rat::one());
    for code in m.factors() {
        let g = canon::decode(code);
        out = out.mul(&coproduct_graph(&g));
    }
    out
}

/// Coproduct, extended to products as an algebra morphism; `Δ(1_H) = 1 ⊗ 1`.
pub fn coproduct(x: &GraphPoly) -> TensorPoly {
    let mut out = TensorPoly::zero();
    for (m, c) in x.terms() {
        for ((l, r), k) in coproduct_monomial(m).terms() {
            out.add_term(l.clone(), r.clone(), c * k);
        }
    }
    out
}

/// Non-trivial part `Δ'`: the coproduct of each monomial with its two trivial
/// terms removed.
pub fn reduced_coproduct(x: &GraphPoly) -> TensorPoly {
    let mut out = coproduct(x);
    for (m, c) in x.terms() {
        if m.is_unit() {
            out.add_term(Monomial::unit(), Monomial::unit(), -c.clone());
        } else {
            out.add_term(m.clone(), Monomial::unit(), -c.clone());
            out.add_term(Monomial::unit(), m.clone(), -c.clone());
        }
    }
    out
}

/// Counit: the coefficient of the empty monomial.
pub fn counit(x: &GraphPoly) -> Rat {
    x.coefficient(&Monomial::unit())
}

/// Antipode by the connected-graded recursion
/// `S(G) = −G − Σ S(γ)·(G/γ)` over the reduced coproduct, extended
/// multiplicatively over monomials.
pub fn antipode(x: &GraphPoly) -> GraphPoly {
    let mut memo: HashMap<CanonicalCode, GraphPoly> = HashMap::new();
    let mut out = GraphPoly::zero();
    for (m, c) in x.terms() {
        let s = antipode_monomial(m, &mut memo);
        out = out.add(&s.scale(c));
    }
    out
}

fn antipode_monomial(m: &Monomial, memo: &mut HashMap<CanonicalCode, GraphPoly>) -> GraphPoly {
    let mut out = GraphPoly::one();
    for code in m.factors() {
        let s = antipode_class(code, memo);
        out = out.mul(&s);
    }
    out
}

fn antipode_class(code: &CanonicalCode, memo: &mut HashMap<CanonicalCode, GraphPoly>) -> GraphPoly {
    if let Some(s) = memo.get(code) {
        return s.clone();
    }
    let g = canon::decode(code);
    let mut s = GraphPoly::from_code(code.clone()).scale(&-Rat::one());
    for family in divergent_subgraph_sets(&g) {
        let left = Monomial::from_codes(family.iter().map(|f| f.code.clone()).collect());
        let contracted = contract(&g, &family).expect("divergent families contract");
        let right = canon::canonical_form_unlabeled(&contracted);
        let term = antipode_monomial(&left, memo).mul(&GraphPoly::from_code(right));
        s = s.sub(&term);
    }
    memo.insert(code.clone(), s.clone());
    s
}

/// Unweighted sum of inventory classes at a given loop number and residue
/// kind. Vacuum graphs are not algebra generators.
pub fn h_sum(inv: &Inventory, loops: usize, kind: ResidueKind) -> GraphPoly {
    assert_ne!(
        kind,
        ResidueKind::Vacuum,
        "vacuum graphs are not algebra generators"
    );
    if loops == 0 {
        return GraphPoly::one();
    }
    let mut out = GraphPoly::zero();
    for e in inv.classes(loops, kind) {
        out.add_term(Monomial::single(e.code.clone()), Rat::one());
    }
    out
}

/// Outcome of decomposing `Δ'(h_k^r)` as `Σ_j P_j ⊗ h_{k-j}^r`.
#[derive(Clone, Debug)]
pub struct SubalgebraReport {
    pub loops: usize,
    pub kind: ResidueKind,
    /// left polynomial per co-grade `j >= 1`, as extracted from the coproduct.
    pub left_factors: Vec<(usize, GraphPoly)>,
    /// terms that do not fit the `P_j ⊗ h_{k-j}^r` pattern.
    pub residual: TensorPoly,
    /// whether every left factor lies in the polynomial span of the `h` sums.
    pub left_in_h_span: bool,
    pub ok: bool,
}

/// Decompose `Δ'(h_k^r)` in the `h` basis. Succeeds when the reduced
/// coproduct equals `Σ_j P_j ⊗ h_{k-j}^r` with every `P_j` a polynomial in
/// the `h_m^{r'}` sums; otherwise the offending terms are reported.
pub fn check_subalgebra(inv: &Inventory, k: usize, kind: ResidueKind) -> SubalgebraReport {
    let h = h_sum(inv, k, kind);
    let delta = reduced_coproduct(&h);
    let mut residual = delta.clone();
    let mut left_factors = Vec::new();
    for j in 1..k {
        let h_right = h_sum(inv, k - j, kind);
        let right_classes: Vec<Monomial> = h_right.terms().map(|(m, _)| m.clone()).collect();
        if right_classes.is_empty() {
            continue;
        }
        // candidate P_j: the left polynomial attached to the first right class
        let mut candidate = GraphPoly::zero();
        for ((l, r), c) in delta.terms() {
            if *r == right_classes[0] && l.grade() == j {
                candidate.add_term(l.clone(), c.clone());
            }
        }
        residual = residual.sub(&TensorPoly::tensor(&candidate, &h_right));
        left_factors.push((j, candidate));
    }
    let left_in_h_span = left_factors
        .iter()
        .all(|(j, p)| in_h_polynomial_span(inv, *j, p));
    let ok = residual.is_zero() && left_in_h_span;
    SubalgebraReport {
        loops: k,
        kind,
        left_factors,
        residual,
        left_in_h_span,
        ok,
    }
}

/// Membership of a grade-`j` polynomial in the span of products of `h` sums
/// of total grade `j`.
fn in_h_polynomial_span(inv: &Inventory, j: usize, p: &GraphPoly) -> bool {
    let singles: Vec<(usize, GraphPoly)> = (1..=j)
        .flat_map(|m| {
            [ResidueKind::TwoPoint, ResidueKind::FourPoint]
                .into_iter()
                .map(move |kind| (m, kind))
        })
        .map(|(m, kind)| (m, h_sum(inv, m, kind)))
        .filter(|(_, h)| !h.is_zero())
        .collect();
    let mut basis: Vec<GraphPoly> = Vec::new();
    fn products(
        singles: &[(usize, GraphPoly)],
        target: usize,
        from: usize,
        acc: GraphPoly,
        out: &mut Vec<GraphPoly>,
    ) {
        if target == 0 {
            out.push(acc);
            return;
        }
        for (i, (g, poly)) in singles.iter().enumerate().skip(from) {
            if *g <= target {
                products(singles, target - g, i, acc.mul(poly), out);
            }
        }
    }
    products(singles.as_slice(), j, 0, GraphPoly::one(), &mut basis);
    if basis.is_empty() {
        return p.is_zero();
    }
    // gaussian elimination over monomial coordinates
    let mut rows: Vec<BTreeMap<Monomial, Rat>> = basis
        .iter()
        .map(|b| b.terms().map(|(m, c)| (m.clone(), c.clone())).collect())
        .collect();
    let mut target: BTreeMap<Monomial, Rat> =
        p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
    let mut used = vec![false; rows.len()];
    loop {
        let pivot = match target.keys().next().cloned() {
            Some(m) => m,
            None => return true,
        };
        let row_idx = match rows
            .iter()
            .enumerate()
            .find(|(i, r)| !used[*i] && r.keys().next() == Some(&pivot))
        {
            Some((i, _)) => i,
            None => return false,
        };
        used[row_idx] = true;
        let k = target[&pivot].clone() / rows[row_idx][&pivot].clone();
        let scaled: Vec<(Monomial, Rat)> = rows[row_idx]
            .iter()
            .map(|(m, c)| (m.clone(), c * &k))
            .collect();
        for (m, c) in scaled {
            let e = target.entry(m).or_insert_with(Rat::zero);
            *e -= c;
        }
        target.retain(|_, c| !c.is_zero());
        // reduce remaining rows by the used pivot so leading terms stay fresh
        for i in 0..rows.len() {
            if used[i] || !rows[i].contains_key(&pivot) {
                continue;
            }
            let f = rows[i][&pivot].clone() / rows[row_idx][&pivot].clone();
            let scaled: Vec<(Monomial, Rat)> = rows[row_idx]
                .iter()
                .map(|(m, c)| (m.clone(), c * &f))
                .collect();
            for (m, c) in scaled {
                let e = rows[i].entry(m).or_insert_with(Rat::zero);
                *e -= c;
            }
            rows[i].retain(|_, c| !c.is_zero());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate;
    use crate::sample;

    fn c(i: u8) -> Color {
        Color::new(i).unwrap()
    }

    fn mono(g: &TensorGraph) -> Monomial {
        Monomial::single(canon::canonical_form_unlabeled(g))
    }

    #[test]
    fn coproduct_of_unit() {
        let d = coproduct(&GraphPoly::one());
        assert_eq!(d.num_terms(), 1);
        let ((l, r), k) = d.terms().next().unwrap();
        assert!(l.is_unit() && r.is_unit());
        assert_eq!(*k, Rat::one());
    }

    #[test]
    fn nested_mixed_reduced_coproduct_single_term() {
        let g = sample::nested_2pt(c(1), c(2));
        let d = reduced_coproduct(&GraphPoly::from_graph(&g));
        assert_eq!(d.num_terms(), 1);
        let ((l, r), k) = d.terms().next().unwrap();
        assert_eq!(*l, mono(&sample::melon_2pt(c(2))));
        assert_eq!(*r, mono(&sample::melon_2pt(c(1))));
        assert_eq!(*k, Rat::one());
    }

    #[test]
    fn nested_same_color_reduced_coproduct_two_terms() {
        let g = sample::nested_2pt(c(4), c(4));
        let d = reduced_coproduct(&GraphPoly::from_graph(&g));
        assert_eq!(d.num_terms(), 2);
        let tad = mono(&sample::melon_2pt(c(4)));
        let m4 = mono(&sample::melon_4pt(c(4)));
        assert!(d.terms().any(|((l, r), _)| *l == tad && *r == tad));
        assert!(d.terms().any(|((l, r), _)| *l == m4 && *r == tad));
    }

    #[test]
    fn chain_reduced_coproduct() {
        let g = sample::chain_4pt(c(2), 2);
        let d = reduced_coproduct(&GraphPoly::from_graph(&g));
        let m4 = mono(&sample::melon_4pt(c(2)));
        assert_eq!(d.num_terms(), 1);
        let ((l, r), k) = d.terms().next().unwrap();
        assert_eq!((l, r), (&m4, &m4));
        assert_eq!(*k, Rat::from_integer(2.into()));
    }

    #[test]
    fn decorated_reduced_coproduct() {
        let g = sample::decorated_4pt(c(1), c(3));
        let d = reduced_coproduct(&GraphPoly::from_graph(&g));
        assert_eq!(d.num_terms(), 1);
        let ((l, r), _) = d.terms().next().unwrap();
        assert_eq!(*l, mono(&sample::melon_2pt(c(3))));
        assert_eq!(*r, mono(&sample::melon_4pt(c(1))));
    }

    #[test]
    fn primitive_melons() {
        for g in [sample::melon_2pt(c(1)), sample::melon_4pt(c(5))] {
            assert!(reduced_coproduct(&GraphPoly::from_graph(&g)).is_zero());
            let s = antipode(&GraphPoly::from_graph(&g));
            assert_eq!(s, GraphPoly::from_graph(&g).scale(&-Rat::one()));
        }
        assert_eq!(antipode(&GraphPoly::one()), GraphPoly::one());
    }

    #[test]
    fn counit_values() {
        assert_eq!(counit(&GraphPoly::one()), Rat::one());
        let g = GraphPoly::from_graph(&sample::melon_2pt(c(1)));
        assert_eq!(counit(&g), Rat::zero());
        let x = GraphPoly::one()
            .scale(&Rat::from_integer(3.into()))
            .add(&g.scale(&Rat::from_integer(2.into())));
        assert_eq!(counit(&x), Rat::from_integer(3.into()));
    }

    #[test]
    fn antipode_defining_identity_small() {
        // m(S ⊗ id)Δ(G) = ε(G)·1 on two-loop classes
        for g in [
            sample::nested_2pt(c(1), c(2)),
            sample::nested_2pt(c(3), c(3)),
            sample::chain_4pt(c(1), 2),
            sample::decorated_4pt(c(2), c(2)),
        ] {
            let x = GraphPoly::from_graph(&g);
            let d = coproduct(&x);
            let mut acc = GraphPoly::zero();
            for ((l, r), k) in d.terms() {
                let s_l = antipode(&GraphPoly::from_monomial(l.clone()));
                acc = acc.add(&s_l.mul(&GraphPoly::from_monomial(r.clone())).scale(k));
            }
            assert!(acc.is_zero(), "antipode identity failed for {:?}", g);
        }
    }

    #[test]
    fn grading_respected() {
        let g = sample::nested_2pt(c(1), c(2));
        let total = mono(&g).grade();
        for ((l, r), _) in coproduct(&GraphPoly::from_graph(&g)).terms() {
            assert_eq!(l.grade() + r.grade(), total);
        }
    }

    #[test]
    fn two_loop_closure() {
        // every contraction of an inventory class lands back in the inventory
        let inv = enumerate::one_pi_divergent_up_to(2, 4).unwrap();
        let codes: std::collections::BTreeSet<_> = inv.iter().map(|e| e.code.clone()).collect();
        for e in inv.iter() {
            if e.residue.kind() == ResidueKind::Vacuum {
                continue;
            }
            let g = e.graph();
            for family in divergent_subgraph_sets(&g) {
                let contracted = contract(&g, &family).unwrap();
                let code = canon::canonical_form_unlabeled(&contracted);
                assert!(codes.contains(&code), "contraction escaped the inventory");
            }
        }
    }

    #[test]
    fn two_loop_four_point_classes() {
        // chains (one per color) plus every tadpole-decorated melon
        let inv = enumerate::one_pi_divergent_up_to(2, 4).unwrap();
        let h = h_sum(&inv, 2, ResidueKind::FourPoint);
        assert_eq!(h.num_terms(), 30);
        for cc in Color::all() {
            let chain = mono(&sample::chain_4pt(cc, 2));
            assert_eq!(h.coefficient(&chain), Rat::one());
            for dd in Color::all() {
                let deco = mono(&sample::decorated_4pt(cc, dd));
                assert_eq!(h.coefficient(&deco), Rat::one());
            }
        }
    }

    #[test]
    fn two_loop_h_sums() {
        let inv = enumerate::one_pi_divergent_up_to(2, 4).unwrap();
        let h2_2 = h_sum(&inv, 2, ResidueKind::TwoPoint);
        assert_eq!(h2_2.num_terms(), 25);
        let h1_2 = h_sum(&inv, 1, ResidueKind::TwoPoint);
        assert_eq!(h1_2.num_terms(), 5);
        // reduced coproduct of h_2^{2pt}: full tadpole ⊗ tadpole square plus
        // the same-color melon terms
        let d = reduced_coproduct(&h2_2);
        let tad_sq = TensorPoly::tensor(&h1_2, &h1_2);
        let diff = d.sub(&tad_sq);
        assert_eq!(diff.num_terms(), 5);
        for ((l, r), k) in diff.terms() {
            assert_eq!(*k, Rat::one());
            // each leftover is melon4_c ⊗ tadpole_c with matching color
            let lg = canon::decode(&l.factors()[0]);
            let rg = canon::decode(&r.factors()[0]);
            assert_eq!(lg.num_externals(), 4);
            assert_eq!(rg.num_externals(), 2);
            assert_eq!(lg.vertex_colors()[0], rg.vertex_colors()[0]);
        }
    }
}
