//! Colored extension, jackets, boundary graphs and power counting.
//!
//! Every stranded graph extends to a 6-colored bipartite graph: one node per
//! slot, the vertex-internal strands become edges of colors `1..=5` and each
//! propagator becomes a color-`0` edge. A *jacket* is the ribbon graph singled
//! out by a cyclic order of the six colors up to inversion (60 of them); its
//! faces are the bicolored cycles of adjacent color pairs. For open graphs the
//! jacket genus is taken after capping every boundary circle of the ribbon
//! surface with a disk, which closes each open strand walk; this is the
//! "pinched" genus entering the degree formula
//!
//! `ω = 4 − E − (C_∂ − 1) − (Σ g̃ − Σ g_∂)/12`,
//!
//! cross-validated against the direct count `ω = −2L + F`.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Color, Dsu, GraphError, Residue, SlotId, SlotKind, TensorGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("jackets require a closed colored graph; pinch first")]
    OpenGraph,
    #[error("genus sums are not divisible by 12; convention bug")]
    NonIntegerDegree,
    #[error("jacket Euler characteristic is odd; non-orientable input rejected")]
    NonOrientable,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// 6-colored bipartite graph: one node per slot, one edge per color per node
/// (color 0 missing exactly at external legs).
#[derive(Clone, Debug)]
pub struct ColoredGraph {
    /// adjacency: `adj[node][color]` is the neighbor through that color.
    adj: Vec<[Option<u32>; 6]>,
    /// nodes with no color-0 edge, in external-leg order.
    open: Vec<u32>,
}

impl ColoredGraph {
    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        let deg: usize = self.adj.iter().flatten().filter(|n| n.is_some()).count();
        deg / 2
    }

    pub fn is_closed(&self) -> bool {
        self.open.is_empty()
    }

    pub fn open_nodes(&self) -> &[u32] {
        &self.open
    }

    pub fn neighbor(&self, node: u32, color: usize) -> Option<u32> {
        self.adj[node as usize][color]
    }
}

/// A cyclic order of the six colors up to inversion, with its faces and genus
/// on a given colored graph.
#[derive(Clone, Debug, Serialize)]
pub struct Jacket {
    /// Cyclic order, normalized to start at color 0.
    pub cycle: [u8; 6],
    /// Total face count (closed bicolored cycles plus capped boundary circles).
    pub faces: usize,
    pub genus: usize,
}

/// Build the colored extension of a stranded graph.
pub fn colored_extension(g: &TensorGraph) -> ColoredGraph {
    let n = g.num_vertices() * 4;
    let mut adj = vec![[None; 6]; n];
    let link = |adj: &mut Vec<[Option<u32>; 6]>, a: SlotId, b: SlotId, color: usize| {
        adj[a.0 as usize][color] = Some(b.0 as u32);
        adj[b.0 as usize][color] = Some(a.0 as u32);
    };
    for (v, &c) in g.vertex_colors().iter().enumerate() {
        for d in Color::all() {
            if d == c {
                link(
                    &mut adj,
                    SlotId::new(v, 0, SlotKind::T),
                    SlotId::new(v, 1, SlotKind::TBar),
                    d.index() as usize,
                );
                link(
                    &mut adj,
                    SlotId::new(v, 1, SlotKind::T),
                    SlotId::new(v, 0, SlotKind::TBar),
                    d.index() as usize,
                );
            } else {
                for pair in 0..2 {
                    link(
                        &mut adj,
                        SlotId::new(v, pair, SlotKind::T),
                        SlotId::new(v, pair, SlotKind::TBar),
                        d.index() as usize,
                    );
                }
            }
        }
    }
    for p in g.propagators() {
        link(&mut adj, p.tbar, p.t, 0);
    }
    let open = g.externals().iter().map(|e| e.0 as u32).collect();
    ColoredGraph { adj, open }
}

/// Close an open colored graph by adding color-0 edges that pair external
/// legs, `T` against `T̄`, preferring the partner reached by the most open
/// strands. For melonic boundaries this closes every open strand onto its own
/// stub.
pub fn pinch(g: &TensorGraph) -> ColoredGraph {
    let mut cg = colored_extension(g);
    if cg.is_closed() {
        return cg;
    }
    let legs = g.externals();
    let mut weight = vec![vec![0usize; legs.len()]; legs.len()];
    for (a, b, _) in g.boundary_edges() {
        weight[a][b] += 1;
        weight[b][a] = weight[a][b];
    }
    let mut unmatched: Vec<usize> = (0..legs.len()).collect();
    while let Some(&i) = unmatched.first() {
        let best = unmatched
            .iter()
            .copied()
            .filter(|&j| legs[j].kind() != legs[i].kind())
            .max_by_key(|&j| (weight[i][j], std::cmp::Reverse(j)))
            .expect("typed legs always admit a partner");
        let (a, b) = (legs[i].0 as usize, legs[best].0 as usize);
        cg.adj[a][0] = Some(b as u32);
        cg.adj[b][0] = Some(a as u32);
        unmatched.retain(|&j| j != i && j != best);
    }
    cg.open.clear();
    cg
}

/// Count bicolored components for the color pair `(a, b)`: closed cycles, and
/// open paths (which can only appear when `0 ∈ {a, b}` at external legs).
/// Open paths are returned as their two endpoint nodes.
fn cycles_of_colors(cg: &ColoredGraph, a: usize, b: usize) -> (usize, Vec<(u32, u32)>) {
    let n = cg.num_nodes();
    let mut seen = vec![false; n];
    let mut closed = 0;
    let mut paths = Vec::new();
    let zero_in = a == 0 || b == 0;
    if zero_in {
        let d = a + b; // the non-zero color of the pair
        for &start in &cg.open {
            if seen[start as usize] {
                continue;
            }
            // walk away from the missing 0-edge, starting with color d
            let mut cur = start;
            let mut color = d;
            seen[cur as usize] = true;
            while let Some(next) = cg.neighbor(cur, color) {
                cur = next;
                seen[cur as usize] = true;
                color = a + b - color;
            }
            paths.push((start, cur));
        }
    }
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut cur = s as u32;
        let mut color = a;
        loop {
            seen[cur as usize] = true;
            cur = cg
                .neighbor(cur, color)
                .expect("component without open nodes is a cycle");
            color = a + b - color;
            if cur == s as u32 && color == a {
                break;
            }
        }
        closed += 1;
    }
    (closed, paths)
}

/// Faces and capped genus of the jacket given by `cycle` (a cyclic order of
/// colors 0..=5). Open graphs are handled by capping each boundary circle of
/// the ribbon surface with a disk.
fn jacket_genus(cg: &ColoredGraph, cycle: [u8; 6]) -> Result<Jacket, TopologyError> {
    let n = cg.num_nodes();
    let e = cg.num_edges();
    let mut f_closed = 0;
    let mut zero_paths: Vec<Vec<(u32, u32)>> = Vec::new();
    for i in 0..6 {
        let a = cycle[i] as usize;
        let b = cycle[(i + 1) % 6] as usize;
        let (closed, paths) = cycles_of_colors(cg, a, b);
        f_closed += closed;
        if a == 0 || b == 0 {
            zero_paths.push(paths);
        } else {
            debug_assert!(paths.is_empty());
        }
    }
    // boundary circles: each open node carries one free arc joining its two
    // 0-adjacent open walks; circles are components of that 2-regular graph
    let boundary = if cg.is_closed() {
        0
    } else {
        let mut id = std::collections::HashMap::new();
        for (i, &u) in cg.open.iter().enumerate() {
            id.insert(u, i);
        }
        let mut dsu = Dsu::new(cg.open.len());
        for side in &zero_paths {
            for &(x, y) in side {
                dsu.union(id[&x], id[&y]);
            }
        }
        let mut roots: Vec<usize> = (0..cg.open.len()).map(|i| dsu.find(i)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    };
    let faces = f_closed + boundary;
    let chi = faces as i64 - e as i64 + n as i64;
    if chi % 2 != 0 || chi > 2 {
        return Err(TopologyError::NonOrientable);
    }
    Ok(Jacket {
        cycle,
        faces,
        genus: ((2 - chi) / 2) as usize,
    })
}

/// The 60 cyclic orders of the six colors up to inversion.
fn six_color_cycles() -> Vec<[u8; 6]> {
    let mut cycles = Vec::with_capacity(60);
    let mut rest = [1u8, 2, 3, 4, 5];
    permute_all(&mut rest, 0, &mut |p| {
        if p[0] < p[4] {
            cycles.push([0, p[0], p[1], p[2], p[3], p[4]]);
        }
    });
    cycles
}

fn permute_all(xs: &mut [u8], k: usize, f: &mut impl FnMut(&[u8])) {
    if k == xs.len() {
        f(xs);
        return;
    }
    for i in k..xs.len() {
        xs.swap(k, i);
        permute_all(xs, k + 1, f);
        xs.swap(k, i);
    }
}

/// All 60 jackets of a closed colored graph.
pub fn jackets(cg: &ColoredGraph) -> Result<Vec<Jacket>, TopologyError> {
    if !cg.is_closed() {
        return Err(TopologyError::OpenGraph);
    }
    six_color_cycles()
        .into_iter()
        .map(|cy| jacket_genus(cg, cy))
        .collect()
}

/// The 60 pinched-jacket genera of a (possibly open) stranded graph, computed
/// on the capped ribbon surfaces of the colored extension.
pub fn pinched_jackets(g: &TensorGraph) -> Result<Vec<Jacket>, TopologyError> {
    let cg = colored_extension(g);
    six_color_cycles()
        .into_iter()
        .map(|cy| jacket_genus(&cg, cy))
        .collect()
}

/// 5-colored boundary graph: one node per external leg, one edge of color `c`
/// per open face.
#[derive(Clone, Debug)]
pub struct BoundaryGraph {
    adj: Vec<[Option<u32>; 5]>,
    component_of: Vec<usize>,
    num_components: usize,
}

impl BoundaryGraph {
    pub fn num_legs(&self) -> usize {
        self.adj.len()
    }

    pub fn num_components(&self) -> usize {
        self.num_components
    }
}

pub fn boundary_graph(g: &TensorGraph) -> BoundaryGraph {
    let legs = g.num_externals();
    let mut adj = vec![[None; 5]; legs];
    for (a, b, c) in g.boundary_edges() {
        adj[a][c.idx()] = Some(b as u32);
        adj[b][c.idx()] = Some(a as u32);
    }
    let mut dsu = Dsu::new(legs.max(1));
    for (a, row) in adj.iter().enumerate() {
        for n in row.iter().flatten() {
            dsu.union(a, *n as usize);
        }
    }
    let component_of: Vec<usize> = (0..legs).map(|i| dsu.find(i)).collect();
    let mut roots = component_of.clone();
    roots.sort_unstable();
    roots.dedup();
    BoundaryGraph {
        adj,
        component_of,
        num_components: if legs == 0 { 0 } else { roots.len() },
    }
}

/// The 12 cyclic orders of colors 1..=5 up to inversion.
fn five_color_cycles() -> Vec<[u8; 5]> {
    let mut cycles = Vec::with_capacity(12);
    let mut rest = [2u8, 3, 4, 5];
    permute_all(&mut rest, 0, &mut |p| {
        if p[0] < p[3] {
            cycles.push([1, p[0], p[1], p[2], p[3]]);
        }
    });
    cycles
}

/// Per-jacket genus sums of the boundary graph (summed over its connected
/// components), for all 12 boundary jackets.
pub fn boundary_jacket_genera(bg: &BoundaryGraph) -> Result<Vec<usize>, TopologyError> {
    if bg.num_legs() == 0 {
        return Ok(vec![0; 12]);
    }
    let mut comp_size = std::collections::HashMap::new();
    for &c in &bg.component_of {
        *comp_size.entry(c).or_insert(0usize) += 1;
    }
    let mut out = Vec::with_capacity(12);
    for cy in five_color_cycles() {
        let mut faces_per_comp: std::collections::HashMap<usize, usize> =
            std::collections::HashMap::new();
        for i in 0..5 {
            let a = (cy[i] - 1) as usize;
            let b = (cy[(i + 1) % 5] - 1) as usize;
            let mut seen = vec![false; bg.num_legs()];
            for s in 0..bg.num_legs() {
                if seen[s] {
                    continue;
                }
                let mut cur = s as u32;
                let mut color = a;
                loop {
                    seen[cur as usize] = true;
                    cur = bg.adj[cur as usize][color].expect("boundary graphs are 5-regular");
                    color = a + b - color;
                    if cur == s as u32 && color == a {
                        break;
                    }
                }
                *faces_per_comp.entry(bg.component_of[s]).or_insert(0) += 1;
            }
        }
        let mut total = 0usize;
        for (&comp, &v) in &comp_size {
            let f = faces_per_comp.get(&comp).copied().unwrap_or(0);
            let e = 5 * v / 2;
            let chi = f as i64 - e as i64 + v as i64;
            if chi % 2 != 0 || chi > 2 {
                return Err(TopologyError::NonOrientable);
            }
            total += ((2 - chi) / 2) as usize;
        }
        out.push(total);
    }
    Ok(out)
}

/// Per-graph power-counting record.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    pub e: usize,
    pub v: usize,
    pub l: usize,
    pub f_closed: usize,
    pub sum_pinched_genera: usize,
    pub sum_boundary_genera: usize,
    pub c_boundary: usize,
    pub omega: i64,
    pub melonic: bool,
    pub divergent: bool,
    /// Row of the divergent-graph table this matches, if any.
    pub table1_row: Option<usize>,
}

/// Divergence degree by direct face counting: `ω = −2L + F`.
pub fn degree_direct(g: &TensorGraph) -> Result<i64, GraphError> {
    if !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    Ok(-2 * g.num_propagators() as i64 + g.closed_face_count() as i64)
}

/// Divergence degree via jacket genera and the boundary graph, with all
/// intermediate sums recorded.
pub fn degree_formula(g: &TensorGraph) -> Result<DegreeReport, TopologyError> {
    if !g.is_connected() {
        return Err(GraphError::Disconnected.into());
    }
    let pj = pinched_jackets(g)?;
    let sum_pinched: usize = pj.iter().map(|j| j.genus).sum();
    let bg = boundary_graph(g);
    let bj = boundary_jacket_genera(&bg)?;
    let sum_boundary: usize = bj.iter().sum();
    let c_boundary = bg.num_components();
    let e = g.num_externals() as i64;
    let diff = sum_pinched as i64 - sum_boundary as i64;
    if diff % 12 != 0 {
        return Err(TopologyError::NonIntegerDegree);
    }
    let omega = 4 - e - (c_boundary as i64 - 1) - diff / 12;
    let melonic = sum_pinched == 0 && sum_boundary == 0;
    const TABLE1: [(usize, usize, i64, usize, i64); 5] = [
        (4, 0, 0, 0, 0),
        (2, 0, 0, 0, 2),
        (0, 0, -1, 0, 5),
        (0, 0, -1, 36, 2),
        (0, 0, -1, 60, 0),
    ];
    let key = (
        g.num_externals(),
        sum_boundary,
        c_boundary as i64 - 1,
        sum_pinched,
        omega,
    );
    let table1_row = TABLE1.iter().position(|&r| r == key);
    Ok(DegreeReport {
        e: g.num_externals(),
        v: g.num_vertices(),
        l: g.num_propagators(),
        f_closed: g.closed_face_count(),
        sum_pinched_genera: sum_pinched,
        sum_boundary_genera: sum_boundary,
        c_boundary,
        omega,
        melonic,
        divergent: omega >= 0,
        table1_row,
    })
}

/// Full classification of a connected graph: degree by both routes (they must
/// agree), melonicity and table matching.
pub fn classify(g: &TensorGraph) -> Result<DegreeReport, TopologyError> {
    let report = degree_formula(g)?;
    let direct = degree_direct(g)?;
    if direct != report.omega {
        return Err(TopologyError::NonIntegerDegree);
    }
    Ok(report)
}

/// Superficial divergence by the direct route.
pub fn is_divergent(g: &TensorGraph) -> bool {
    degree_direct(g).map(|w| w >= 0).unwrap_or(false)
}

/// Residue of a superficially divergent graph; `None` when convergent or of
/// non-melonic boundary type.
pub fn divergent_residue(g: &TensorGraph) -> Option<Residue> {
    if is_divergent(g) {
        g.residue().ok()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    fn c(i: u8) -> Color {
        Color::new(i).unwrap()
    }

    #[test]
    fn sixty_jackets() {
        assert_eq!(six_color_cycles().len(), 60);
        assert_eq!(five_color_cycles().len(), 12);
        let g = sample::vacuum_melon(c(1));
        let cg = colored_extension(&g);
        // closed, 4 nodes, 6-regular
        assert!(cg.is_closed());
        assert_eq!(cg.num_nodes(), 4);
        assert_eq!(cg.num_edges(), 12);
        assert_eq!(jackets(&cg).unwrap().len(), 60);
        // the open extension of the two-point melon misses two 0-edges
        let open = colored_extension(&sample::melon_2pt(c(1)));
        assert_eq!(open.num_nodes(), 4);
        assert_eq!(open.open_nodes().len(), 2);
        // nothing to extend on the empty graph
        assert_eq!(colored_extension(&TensorGraph::empty()).num_nodes(), 0);
    }

    #[test]
    fn vacuum_melon_all_genera_zero() {
        let g = sample::vacuum_melon(c(3));
        let js = jackets(&colored_extension(&g)).unwrap();
        assert!(js.iter().all(|j| j.genus == 0));
    }

    type TableCase = (TensorGraph, (usize, usize, i64, usize, i64), Option<usize>);

    #[test]
    fn table_rows() {
        let cases: Vec<TableCase> = vec![
            (sample::melon_4pt(c(1)), (4, 0, 0, 0, 0), Some(0)),
            (sample::melon_2pt(c(1)), (2, 0, 0, 0, 2), Some(1)),
            (sample::vacuum_melon(c(1)), (0, 0, -1, 0, 5), Some(2)),
            (sample::necklace(&[c(1)]), (0, 0, -1, 36, 2), Some(3)),
            (
                sample::necklace(&[c(1), c(2), c(1), c(2)]),
                (0, 0, -1, 60, 0),
                Some(4),
            ),
        ];
        for (g, want, row) in cases {
            let r = classify(&g).unwrap();
            assert_eq!(
                (
                    r.e,
                    r.sum_boundary_genera,
                    r.c_boundary as i64 - 1,
                    r.sum_pinched_genera,
                    r.omega
                ),
                want,
                "graph {:?}",
                g
            );
            assert_eq!(r.table1_row, row);
        }
    }

    #[test]
    fn degree_cross_check_on_witnesses() {
        for g in sample::witnesses() {
            if !g.is_connected() {
                continue;
            }
            let direct = degree_direct(&g).unwrap();
            let rep = degree_formula(&g).unwrap();
            assert_eq!(direct, rep.omega, "mismatch on {:?}", g);
        }
    }

    #[test]
    fn boundary_of_two_point_melon() {
        let g = sample::melon_2pt(c(1));
        let bg = boundary_graph(&g);
        assert_eq!(bg.num_legs(), 2);
        assert_eq!(bg.num_components(), 1);
        let genera = boundary_jacket_genera(&bg).unwrap();
        assert_eq!(genera.len(), 12);
        assert!(genera.iter().all(|&g| g == 0));
    }

    #[test]
    fn pinch_closes_and_matches_capping_for_melonic_graphs() {
        for g in [sample::melon_2pt(c(2)), sample::melon_4pt(c(4))] {
            let closed = pinch(&g);
            assert!(closed.is_closed());
            let via_pinch: usize = jackets(&closed).unwrap().iter().map(|j| j.genus).sum();
            let via_cap: usize = pinched_jackets(&g).unwrap().iter().map(|j| j.genus).sum();
            assert_eq!(via_pinch, via_cap);
            assert_eq!(via_pinch, 0);
        }
    }

    #[test]
    fn mixed_chain_is_convergent_same_color_divergent() {
        let same = sample::chain_4pt_colored([c(1), c(1)]);
        let mixed = sample::chain_4pt_colored([c(1), c(2)]);
        assert_eq!(degree_direct(&same).unwrap(), 0);
        assert!(degree_direct(&mixed).unwrap() < 0);
    }

    #[test]
    fn nested_graphs_quadratically_divergent() {
        for (a, b) in [(1, 1), (1, 2), (3, 5)] {
            let g = sample::nested_2pt(c(a), c(b));
            assert_eq!(g.closed_face_count(), 8);
            assert_eq!(degree_direct(&g).unwrap(), 2);
            let r = classify(&g).unwrap();
            assert!(r.melonic);
        }
    }

    #[test]
    fn euler_relation_every_jacket() {
        for g in sample::witnesses() {
            let cg = colored_extension(&g);
            for j in pinched_jackets(&g).unwrap() {
                let chi = j.faces as i64 - cg.num_edges() as i64 + cg.num_nodes() as i64;
                assert_eq!(chi, 2 - 2 * j.genus as i64);
            }
        }
    }
}
