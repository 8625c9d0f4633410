//! Witness graph constructors shared by tests, fixtures and documentation.

use crate::graph::{Color, SlotId, SlotKind, TensorGraph};

fn t(v: usize, pair: u8) -> SlotId {
    SlotId::new(v, pair, SlotKind::T)
}

fn tb(v: usize, pair: u8) -> SlotId {
    SlotId::new(v, pair, SlotKind::TBar)
}

/// Fundamental two-point melon: one vertex of color `c`, second pair
/// self-contracted, first pair external.
pub fn melon_2pt(c: Color) -> TensorGraph {
    TensorGraph::build(vec![c], vec![(tb(0, 1), t(0, 1))], vec![t(0, 0), tb(0, 0)]).unwrap()
}

/// Fundamental vacuum melon: one vertex, both pairs self-contracted.
pub fn vacuum_melon(c: Color) -> TensorGraph {
    TensorGraph::build(
        vec![c],
        vec![(tb(0, 0), t(0, 0)), (tb(0, 1), t(0, 1))],
        vec![],
    )
    .unwrap()
}

/// Fundamental four-point melon: two vertices of color `c` joined by two
/// parallel lines across one pair each.
pub fn melon_4pt(c: Color) -> TensorGraph {
    TensorGraph::build(
        vec![c, c],
        vec![(tb(0, 1), t(1, 1)), (tb(1, 1), t(0, 1))],
        vec![t(0, 0), tb(0, 0), t(1, 0), tb(1, 0)],
    )
    .unwrap()
}

/// One-loop two-point graph whose self-loop crosses the melonic pairs.
/// Convergent; its external legs interrupt faces of the four colors `!= c`.
pub fn crossed_tadpole(c: Color) -> TensorGraph {
    TensorGraph::build(vec![c], vec![(tb(0, 0), t(0, 1))], vec![t(0, 0), tb(0, 1)]).unwrap()
}

/// Two-loop two-point graph: the fundamental two-point melon of color
/// `inner` inserted on the internal line of the melon of color `outer`.
pub fn nested_2pt(outer: Color, inner: Color) -> TensorGraph {
    TensorGraph::build(
        vec![outer, inner],
        vec![
            (tb(0, 1), t(1, 0)),
            (tb(1, 0), t(0, 1)),
            (tb(1, 1), t(1, 1)),
        ],
        vec![t(0, 0), tb(0, 0)],
    )
    .unwrap()
}

/// Melonic four-point chain with `links + 1` vertices of color `c`.
/// `chain_4pt(c, 1)` is the fundamental four-point melon (up to pair swaps).
pub fn chain_4pt(c: Color, links: usize) -> TensorGraph {
    let n = links + 1;
    let mut props = Vec::new();
    for i in 0..links {
        props.push((tb(i, 1), t(i + 1, 0)));
        props.push((tb(i + 1, 0), t(i, 1)));
    }
    TensorGraph::build(
        vec![c; n],
        props,
        vec![t(0, 0), tb(0, 0), t(n - 1, 1), tb(n - 1, 1)],
    )
    .unwrap()
}

/// Four-point chain of length two with per-vertex colors (divergent only when
/// all colors agree).
pub fn chain_4pt_colored(colors: [Color; 2]) -> TensorGraph {
    TensorGraph::build(
        vec![colors[0], colors[1]],
        vec![(tb(0, 1), t(1, 0)), (tb(1, 0), t(0, 1))],
        vec![t(0, 0), tb(0, 0), t(1, 1), tb(1, 1)],
    )
    .unwrap()
}

/// Four-point melon of color `c` with the two-point melon of color `deco`
/// spliced into one of its two internal lines.
pub fn decorated_4pt(c: Color, deco: Color) -> TensorGraph {
    TensorGraph::build(
        vec![c, c, deco],
        vec![
            (tb(0, 1), t(2, 0)),
            (tb(2, 0), t(1, 1)),
            (tb(1, 1), t(0, 1)),
            (tb(2, 1), t(2, 1)),
        ],
        vec![t(0, 0), tb(0, 0), t(1, 0), tb(1, 0)],
    )
    .unwrap()
}

/// Two tadpoles joined in series by a single line (not 1PI).
pub fn two_tadpoles_in_series(a: Color, b: Color) -> TensorGraph {
    TensorGraph::build(
        vec![a, b],
        vec![
            (tb(0, 1), t(0, 1)),
            (tb(1, 1), t(1, 1)),
            (tb(0, 0), t(1, 0)),
        ],
        vec![t(0, 0), tb(1, 0)],
    )
    .unwrap()
}

/// Vacuum necklace chain of length `colors.len()`: a closed ring in which
/// consecutive vertices are joined by a pair-to-pair double link. At length
/// one this degenerates to a single vertex with two pair-crossing self-loops.
/// Divergent as `N^2` when all colors agree and as `log N` otherwise.
pub fn necklace(colors: &[Color]) -> TensorGraph {
    let n = colors.len();
    let mut props = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        props.push((tb(i, 1), t(j, 0)));
        props.push((tb(j, 0), t(i, 1)));
    }
    TensorGraph::build(colors.to_vec(), props, vec![]).unwrap()
}

/// The five power-counting witnesses plus a few companions, for property
/// tests that want a varied pool.
pub fn witnesses() -> Vec<TensorGraph> {
    let c1 = Color::new(1).unwrap();
    let c2 = Color::new(2).unwrap();
    vec![
        melon_4pt(c1),
        melon_2pt(c1),
        vacuum_melon(c1),
        necklace(&[c1]),
        necklace(&[c1, c2, c1, c2]),
        crossed_tadpole(c2),
        nested_2pt(c1, c2),
        nested_2pt(c2, c2),
        chain_4pt(c2, 2),
        decorated_4pt(c1, c2),
        chain_4pt_colored([c1, c2]),
    ]
}
