//! Value-semantic stranded Feynman graphs of the rank-5 quartic melonic model.
//!
//! A vertex of color `c` has two melonic pairs, each with one `T` and one `T̄`
//! slot. Inside the vertex the five strands are routed so that every color
//! other than `c` is identified within each pair while the color `c` strand is
//! swapped across the pairs. Propagators connect a `T̄` slot to a `T` slot and
//! carry five parallel strands, one per color. Unattached slots are external
//! legs. Faces are the monochromatic walks obtained by following strands
//! through vertices and propagators.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of strand colors.
pub const NCOLORS: usize = 5;

/// Strand color, `1..=5`. Color `0` is reserved for propagators in the
/// colored extension (see [`crate::topology`]).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Color(u8);

impl Color {
    pub fn new(index: u8) -> Result<Self, GraphError> {
        if (1..=5).contains(&index) {
            Ok(Color(index))
        } else {
            Err(GraphError::BadColor(index))
        }
    }

    /// All five colors in order.
    pub fn all() -> impl Iterator<Item = Color> {
        (1..=5).map(Color)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// Zero-based index into color-indexed tables.
    pub fn idx(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl fmt::Debug for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Slot kind: tensor or conjugate tensor.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SlotKind {
    T,
    TBar,
}

/// One of the four slots of a vertex, packed as `vertex*4 + pair*2 + kind`.
///
/// `pair` is 0 or 1 (the two melonic pairs), `kind` 0 for `T`, 1 for `T̄`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SlotId(pub u8);

impl SlotId {
    pub fn new(vertex: usize, pair: u8, kind: SlotKind) -> Self {
        debug_assert!(vertex < 64 && pair < 2);
        let k = match kind {
            SlotKind::T => 0,
            SlotKind::TBar => 1,
        };
        SlotId((vertex as u8) * 4 + pair * 2 + k)
    }

    pub fn vertex(self) -> usize {
        (self.0 / 4) as usize
    }

    pub fn pair(self) -> u8 {
        (self.0 / 2) % 2
    }

    pub fn kind(self) -> SlotKind {
        if self.0.is_multiple_of(2) {
            SlotKind::T
        } else {
            SlotKind::TBar
        }
    }

    /// Same slot on the other melonic pair of the same vertex.
    pub fn pair_swapped(self) -> SlotId {
        SlotId(self.0 ^ 2)
    }
}

impl fmt::Debug for SlotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind() {
            SlotKind::T => "t",
            SlotKind::TBar => "tbar",
        };
        write!(f, "{}.{}.{}", self.vertex(), self.pair() + 1, k)
    }
}

/// Internal line, directed from a `T̄` slot to a `T` slot.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Propagator {
    pub tbar: SlotId,
    pub t: SlotId,
}

/// Residue: the graph with all internal lines contracted to a point.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Residue {
    Vacuum,
    TwoPoint,
    FourPoint(Color),
}

/// Residue kind, ignoring the color tag of four-point residues.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum ResidueKind {
    Vacuum,
    TwoPoint,
    FourPoint,
}

impl Residue {
    pub fn kind(self) -> ResidueKind {
        match self {
            Residue::Vacuum => ResidueKind::Vacuum,
            Residue::TwoPoint => ResidueKind::TwoPoint,
            Residue::FourPoint(_) => ResidueKind::FourPoint,
        }
    }
}

impl ResidueKind {
    /// Number of external legs for this residue kind.
    pub fn external_count(self) -> usize {
        match self {
            ResidueKind::Vacuum => 0,
            ResidueKind::TwoPoint => 2,
            ResidueKind::FourPoint => 4,
        }
    }
}

/// A monochromatic face: the walk of one strand through the graph.
///
/// `slots` lists the slots visited in order. Closed faces are cyclic walks;
/// open faces start and end on external slots.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Face {
    pub color: Color,
    pub closed: bool,
    pub slots: Vec<SlotId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("color index {0} outside 1..=5")]
    BadColor(u8),
    #[error("slot {0:?} used more than once or with the wrong kind")]
    SlotConflict(SlotId),
    #[error("slot {0:?} is neither a propagator endpoint nor an external leg")]
    DanglingSlot(SlotId),
    #[error("operation requires a connected graph")]
    Disconnected,
    #[error("external leg count {0} unsupported (want 0, 2 or 4) or boundary pairing is not of melonic type")]
    UnsupportedExternalCount(usize),
}

/// Immutable stranded tensor graph. Derived data is memoized on the value.
#[derive(Debug)]
pub struct TensorGraph {
    colors: Vec<Color>,
    props: Vec<Propagator>,
    externals: Vec<SlotId>,
    faces: OnceLock<Vec<Face>>,
}

impl Clone for TensorGraph {
    fn clone(&self) -> Self {
        TensorGraph {
            colors: self.colors.clone(),
            props: self.props.clone(),
            externals: self.externals.clone(),
            faces: OnceLock::new(),
        }
    }
}

impl PartialEq for TensorGraph {
    fn eq(&self, other: &Self) -> bool {
        self.colors == other.colors
            && self.props == other.props
            && self.externals == other.externals
    }
}
impl Eq for TensorGraph {}

impl TensorGraph {
    /// Validate and build a graph from vertex colors, propagator pairings
    /// `(T̄ slot, T slot)` and external slots.
    ///
    /// Every slot must be covered exactly once, either by a propagator
    /// endpoint of the right kind or by an external leg.
    pub fn build(
        vertex_colors: Vec<Color>,
        pairings: Vec<(SlotId, SlotId)>,
        externals: Vec<SlotId>,
    ) -> Result<Self, GraphError> {
        let nslots = vertex_colors.len() * 4;
        let mut used = vec![false; nslots];
        let mut claim = |s: SlotId| -> Result<(), GraphError> {
            let i = s.0 as usize;
            if i >= nslots || used[i] {
                return Err(GraphError::SlotConflict(s));
            }
            used[i] = true;
            Ok(())
        };
        let mut props = Vec::with_capacity(pairings.len());
        for (tbar, t) in pairings {
            if tbar.kind() != SlotKind::TBar {
                return Err(GraphError::SlotConflict(tbar));
            }
            if t.kind() != SlotKind::T {
                return Err(GraphError::SlotConflict(t));
            }
            claim(tbar)?;
            claim(t)?;
            props.push(Propagator { tbar, t });
        }
        for &e in &externals {
            claim(e)?;
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(GraphError::DanglingSlot(SlotId(i as u8)));
        }
        debug_assert_eq!(4 * vertex_colors.len(), 2 * props.len() + externals.len());
        Ok(TensorGraph {
            colors: vertex_colors,
            props,
            externals,
            faces: OnceLock::new(),
        })
    }

    /// The empty graph (the Hopf unit `1_H` as a graph).
    pub fn empty() -> Self {
        TensorGraph::build(vec![], vec![], vec![]).unwrap()
    }

    pub fn vertex_colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn propagators(&self) -> &[Propagator] {
        &self.props
    }

    pub fn externals(&self) -> &[SlotId] {
        &self.externals
    }

    pub fn num_vertices(&self) -> usize {
        self.colors.len()
    }

    /// Number of internal lines `L`.
    pub fn num_propagators(&self) -> usize {
        self.props.len()
    }

    /// Number of external legs `E`.
    pub fn num_externals(&self) -> usize {
        self.externals.len()
    }

    /// Propagator index covering `slot`, if any.
    pub fn propagator_at(&self, slot: SlotId) -> Option<usize> {
        self.props
            .iter()
            .position(|p| p.tbar == slot || p.t == slot)
    }

    fn strand_end(slot: SlotId, color: Color) -> usize {
        slot.0 as usize * NCOLORS + color.idx()
    }

    /// Partner of `(slot, color)` through the vertex-internal routing.
    fn vertex_link(&self, slot: SlotId, color: Color) -> SlotId {
        let vc = self.colors[slot.vertex()];
        if color == vc {
            // distinguished color crosses to the other pair, flipping kind
            SlotId(slot.0 ^ 2 ^ 1)
        } else {
            // other colors stay within the pair, flipping kind
            SlotId(slot.0 ^ 1)
        }
    }

    /// All faces, computed once and cached. Every `(slot, color)` strand end
    /// belongs to exactly one face.
    pub fn faces(&self) -> &[Face] {
        self.faces.get_or_init(|| self.compute_faces())
    }

    fn compute_faces(&self) -> Vec<Face> {
        let nslots = self.colors.len() * 4;
        // propagator partner per slot
        let mut pslot: Vec<Option<SlotId>> = vec![None; nslots];
        for p in &self.props {
            pslot[p.tbar.0 as usize] = Some(p.t);
            pslot[p.t.0 as usize] = Some(p.tbar);
        }
        let mut visited = vec![false; nslots * NCOLORS];
        let mut faces = Vec::new();

        // open faces first, starting from external strand ends
        for &ext in &self.externals {
            for color in Color::all() {
                let start = Self::strand_end(ext, color);
                if visited[start] {
                    continue;
                }
                let mut walk = vec![ext];
                visited[start] = true;
                let mut cur = ext;
                loop {
                    let next = self.vertex_link(cur, color);
                    visited[Self::strand_end(next, color)] = true;
                    walk.push(next);
                    match pslot[next.0 as usize] {
                        Some(over) => {
                            visited[Self::strand_end(over, color)] = true;
                            walk.push(over);
                            cur = over;
                        }
                        None => break,
                    }
                }
                faces.push(Face {
                    color,
                    closed: false,
                    slots: walk,
                });
            }
        }

        // remaining ends lie on closed faces
        for s in 0..nslots {
            for color in Color::all() {
                if visited[Self::strand_end(SlotId(s as u8), color)] {
                    continue;
                }
                let mut walk = Vec::new();
                let mut cur = SlotId(s as u8);
                loop {
                    visited[Self::strand_end(cur, color)] = true;
                    walk.push(cur);
                    let next = self.vertex_link(cur, color);
                    visited[Self::strand_end(next, color)] = true;
                    walk.push(next);
                    let over = pslot[next.0 as usize].expect("closed walk hit an external slot");
                    if over == walk[0] {
                        break;
                    }
                    cur = over;
                }
                faces.push(Face {
                    color,
                    closed: true,
                    slots: walk,
                });
            }
        }
        faces
    }

    /// Number of closed faces `F`.
    pub fn closed_face_count(&self) -> usize {
        self.faces().iter().filter(|f| f.closed).count()
    }

    /// Open faces, each running between two external legs.
    pub fn open_faces(&self) -> impl Iterator<Item = &Face> {
        self.faces().iter().filter(|f| !f.closed)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.colors.len();
        if n <= 1 {
            return true;
        }
        let mut dsu = Dsu::new(n);
        for p in &self.props {
            dsu.union(p.tbar.vertex(), p.t.vertex());
        }
        (1..n).all(|v| dsu.find(v) == dsu.find(0))
    }

    /// First Betti number `L - V + 1` of the propagator multigraph.
    pub fn loop_number(&self) -> Result<usize, GraphError> {
        if !self.is_connected() {
            return Err(GraphError::Disconnected);
        }
        if self.colors.is_empty() {
            return Ok(0);
        }
        Ok(self.props.len() + 1 - self.colors.len())
    }

    /// One-particle irreducibility: no internal line is a bridge.
    pub fn is_one_pi(&self) -> Result<bool, GraphError> {
        if !self.is_connected() {
            return Err(GraphError::Disconnected);
        }
        let n = self.colors.len();
        for skip in 0..self.props.len() {
            let p = &self.props[skip];
            if p.tbar.vertex() == p.t.vertex() {
                continue; // self-loops are never bridges
            }
            let mut dsu = Dsu::new(n);
            for (i, q) in self.props.iter().enumerate() {
                if i != skip {
                    dsu.union(q.tbar.vertex(), q.t.vertex());
                }
            }
            if dsu.find(p.tbar.vertex()) != dsu.find(p.t.vertex()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Boundary edges: for each open face, the pair of external leg indices it
    /// joins, per color. Leg indices refer to positions in `externals()`.
    pub fn boundary_edges(&self) -> Vec<(usize, usize, Color)> {
        let leg_of = |s: SlotId| self.externals.iter().position(|&e| e == s).unwrap();
        self.open_faces()
            .map(|f| {
                let a = leg_of(*f.slots.first().unwrap());
                let b = leg_of(*f.slots.last().unwrap());
                (a.min(b), a.max(b), f.color)
            })
            .collect()
    }

    /// Residue after contracting all internal lines.
    ///
    /// Four-point graphs must expose the melonic boundary pattern of some
    /// `V_c`: four colors pair the legs one way, the fifth crosses them.
    pub fn residue(&self) -> Result<Residue, GraphError> {
        match self.externals.len() {
            0 => Ok(Residue::Vacuum),
            2 => Ok(Residue::TwoPoint),
            4 => {
                let edges = self.boundary_edges();
                // per color, the perfect matching of the 4 legs given by open faces
                let mut matchings: Vec<(Color, [(usize, usize); 2])> = Vec::new();
                for color in Color::all() {
                    let mut pairs: Vec<(usize, usize)> = edges
                        .iter()
                        .filter(|e| e.2 == color)
                        .map(|e| (e.0, e.1))
                        .collect();
                    pairs.sort();
                    if pairs.len() != 2 {
                        return Err(GraphError::UnsupportedExternalCount(4));
                    }
                    matchings.push((color, [pairs[0], pairs[1]]));
                }
                for c in Color::all() {
                    let base = matchings.iter().find(|m| m.0 != c).unwrap().1;
                    let aligned = matchings.iter().filter(|m| m.0 != c).all(|m| m.1 == base);
                    if !aligned {
                        continue;
                    }
                    // the distinguished color must straddle the two base pairs
                    let in_first = |leg: usize| leg == base[0].0 || leg == base[0].1;
                    let crossed = matchings.iter().find(|m| m.0 == c).unwrap().1;
                    if crossed.iter().all(|&(u, v)| in_first(u) != in_first(v)) {
                        return Ok(Residue::FourPoint(c));
                    }
                }
                Err(GraphError::UnsupportedExternalCount(4))
            }
            n => Err(GraphError::UnsupportedExternalCount(n)),
        }
    }
}

/// Disjoint-set union on vertex indices.
pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    #[test]
    fn two_point_melon_faces() {
        let g = sample::melon_2pt(Color::new(1).unwrap());
        // four closed faces, one per color != 1; all five colors open once
        assert_eq!(g.closed_face_count(), 4);
        let open: Vec<_> = g.open_faces().collect();
        assert_eq!(open.len(), 5);
        for f in g.faces().iter().filter(|f| f.closed) {
            assert_ne!(f.color, Color::new(1).unwrap());
        }
        // the color-1 open strand runs through the internal line
        let c1 = g
            .open_faces()
            .find(|f| f.color == Color::new(1).unwrap())
            .unwrap();
        assert!(c1.slots.len() > 2);
    }

    #[test]
    fn vacuum_melon_faces() {
        let g = sample::vacuum_melon(Color::new(2).unwrap());
        assert_eq!(g.closed_face_count(), 9);
        assert_eq!(g.open_faces().count(), 0);
    }

    #[test]
    fn empty_graph() {
        let g = TensorGraph::empty();
        assert_eq!(g.faces().len(), 0);
        assert_eq!(g.residue().unwrap(), Residue::Vacuum);
    }

    #[test]
    fn slot_accounting() {
        for c in Color::all() {
            let g = sample::melon_4pt(c);
            assert_eq!(
                4 * g.num_vertices(),
                2 * g.num_propagators() + g.num_externals()
            );
        }
    }

    #[test]
    fn loop_numbers() {
        let c1 = Color::new(1).unwrap();
        assert_eq!(sample::melon_2pt(c1).loop_number().unwrap(), 1);
        assert_eq!(sample::melon_4pt(c1).loop_number().unwrap(), 1);
        let c2 = Color::new(2).unwrap();
        assert_eq!(sample::nested_2pt(c1, c2).loop_number().unwrap(), 2);
        assert_eq!(sample::nested_2pt(c1, c1).loop_number().unwrap(), 2);
    }

    #[test]
    fn one_pi() {
        let c1 = Color::new(1).unwrap();
        assert!(sample::melon_2pt(c1).is_one_pi().unwrap());
        assert!(sample::chain_4pt(c1, 2).is_one_pi().unwrap());
        // two tadpoles in series: the middle line is a bridge
        let g = sample::two_tadpoles_in_series(c1, c1);
        assert!(!g.is_one_pi().unwrap());
    }

    #[test]
    fn residues() {
        let c1 = Color::new(1).unwrap();
        assert_eq!(sample::melon_2pt(c1).residue().unwrap(), Residue::TwoPoint);
        assert_eq!(sample::vacuum_melon(c1).residue().unwrap(), Residue::Vacuum);
        for c in Color::all() {
            assert_eq!(
                sample::melon_4pt(c).residue().unwrap(),
                Residue::FourPoint(c)
            );
        }
    }

    #[test]
    fn build_rejects_conflicts() {
        let c1 = Color::new(1).unwrap();
        // same slot used twice
        let err = TensorGraph::build(
            vec![c1],
            vec![(
                SlotId::new(0, 1, SlotKind::TBar),
                SlotId::new(0, 1, SlotKind::T),
            )],
            vec![
                SlotId::new(0, 0, SlotKind::T),
                SlotId::new(0, 0, SlotKind::TBar),
                SlotId::new(0, 1, SlotKind::T),
            ],
        );
        assert!(matches!(err, Err(GraphError::SlotConflict(_))));
        // missing coverage
        let err = TensorGraph::build(vec![c1], vec![], vec![SlotId::new(0, 0, SlotKind::T)]);
        assert!(matches!(err, Err(GraphError::DanglingSlot(_))));
    }

    #[test]
    fn every_strand_end_in_exactly_one_face() {
        for g in sample::witnesses() {
            let mut seen = std::collections::HashSet::new();
            for f in g.faces() {
                for &s in &f.slots {
                    assert!(seen.insert((s, f.color)), "strand end repeated");
                }
            }
            assert_eq!(seen.len(), g.num_vertices() * 4 * NCOLORS);
            // open faces pair external strand ends
            assert_eq!(g.open_faces().count(), g.num_externals() * NCOLORS / 2);
        }
    }
}
