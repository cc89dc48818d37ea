//! Extended persistence of a graph by boundary-matrix reduction over GF(2).
//!
//! The extended filtration is realised as an ordinary filtration of the cone
//! over the graph: the cone apex `ω` first, then the graph in sublevel order,
//! then the cone cells `ω∗σ` in superlevel order. Adding `ω∗σ` for every cell
//! of the superlevel subgraph `G≥r` is the same as passing to the relative
//! pair `(G, G≥r)`. In the superlevel sweep an edge enters at its weight and
//! a vertex enters with its heaviest incident edge, so that `G≥r` is always
//! a subgraph.
//!
//! Reading the pairs back:
//! * vertex → edge (both ascending): ordinary `Dg0` point,
//! * vertex → `ω∗v`: a component that survives the whole sublevel sweep,
//!   reported as an essential `(birth, ∞)` point,
//! * edge → `ω∗e`: an extended `ExDg1` point `(f(edge), f(e))`,
//! * pairs inside the cone part belong to the relative diagram and are
//!   dropped.

use alloc::format;
use alloc::vec::Vec;

use super::dg0::{sublevel_order, Cell};
use super::{check_invariants, FilteredGraph, PersistenceDiagram, PersistencePoint};
use crate::error::{Error, Result};

/// Largest vertex count the reduction accepts by default.
pub const DEFAULT_ORACLE_BOUND: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
enum ConeCell {
    Apex,
    Vertex(usize),
    Edge(usize),
    ConeVertex(usize),
    ConeEdge(usize),
}

struct ExtendedFiltration {
    cells: Vec<ConeCell>,
    columns: Vec<Vec<usize>>,
}

fn superlevel_vertex_values(fg: &FilteredGraph) -> Vec<f64> {
    let mut h = alloc::vec![f64::NEG_INFINITY; fg.n_vertices()];
    for &(u, v, w) in fg.edges() {
        h[u] = h[u].max(w);
        h[v] = h[v].max(w);
    }
    for (hv, &fv) in h.iter_mut().zip(fg.vertex_values()) {
        if *hv == f64::NEG_INFINITY {
            *hv = fv;
        }
    }
    h
}

fn build(fg: &FilteredGraph) -> ExtendedFiltration {
    let n = fg.n_vertices();
    let m = fg.n_edges();
    let mut cells = Vec::with_capacity(1 + 2 * (n + m));
    cells.push(ConeCell::Apex);
    for c in sublevel_order(fg) {
        cells.push(match c {
            Cell::Vertex(v) => ConeCell::Vertex(v),
            Cell::Edge(e) => ConeCell::Edge(e),
        });
    }

    let h = superlevel_vertex_values(fg);
    let mut cone: Vec<ConeCell> = (0..n)
        .map(ConeCell::ConeVertex)
        .chain((0..m).map(ConeCell::ConeEdge))
        .collect();
    let key = |c: &ConeCell| match *c {
        ConeCell::ConeVertex(v) => (h[v], 0u8, v, 0usize),
        ConeCell::ConeEdge(e) => {
            let (u, v, w) = fg.edges()[e];
            (w, 1u8, u, v)
        }
        _ => unreachable!(),
    };
    cone.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        kb.0.total_cmp(&ka.0)
            .then(ka.1.cmp(&kb.1))
            .then(ka.2.cmp(&kb.2))
            .then(ka.3.cmp(&kb.3))
    });
    cells.extend(cone);

    let mut index_of_vertex = alloc::vec![0usize; n];
    let mut index_of_edge = alloc::vec![0usize; m];
    let mut index_of_cone_vertex = alloc::vec![0usize; n];
    for (idx, c) in cells.iter().enumerate() {
        match *c {
            ConeCell::Vertex(v) => index_of_vertex[v] = idx,
            ConeCell::Edge(e) => index_of_edge[e] = idx,
            ConeCell::ConeVertex(v) => index_of_cone_vertex[v] = idx,
            _ => {}
        }
    }

    let columns = cells
        .iter()
        .map(|c| {
            let mut col = match *c {
                ConeCell::Apex | ConeCell::Vertex(_) => Vec::new(),
                ConeCell::Edge(e) => {
                    let (u, v, _) = fg.edges()[e];
                    alloc::vec![index_of_vertex[u], index_of_vertex[v]]
                }
                ConeCell::ConeVertex(v) => alloc::vec![0, index_of_vertex[v]],
                ConeCell::ConeEdge(e) => {
                    let (u, v, _) = fg.edges()[e];
                    alloc::vec![index_of_edge[e], index_of_cone_vertex[u], index_of_cone_vertex[v]]
                }
            };
            col.sort_unstable();
            col
        })
        .collect();
    ExtendedFiltration { cells, columns }
}

/// Symmetric difference of two sorted index lists.
fn add_column(target: &mut Vec<usize>, source: &[usize]) {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < source.len() {
        match target[i].cmp(&source[j]) {
            core::cmp::Ordering::Less => {
                out.push(target[i]);
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                out.push(source[j]);
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&target[i..]);
    out.extend_from_slice(&source[j..]);
    *target = out;
}

/// Standard left-to-right column reduction. Returns `(birth, death)` index
/// pairs and the set of unpaired (essential) indices.
fn reduce(mut columns: Vec<Vec<usize>>) -> (Vec<(usize, usize)>, Vec<bool>) {
    let n = columns.len();
    let mut pivot_owner: Vec<Option<usize>> = alloc::vec![None; n];
    let mut pairs = Vec::new();
    let mut paired = alloc::vec![false; n];
    for j in 0..n {
        while let Some(&low) = columns[j].last() {
            match pivot_owner[low] {
                Some(k) => {
                    let (left, right) = columns.split_at_mut(j);
                    add_column(&mut right[0], &left[k]);
                }
                None => {
                    pivot_owner[low] = Some(j);
                    pairs.push((low, j));
                    paired[low] = true;
                    paired[j] = true;
                    break;
                }
            }
        }
    }
    (pairs, paired)
}

fn check_bound(fg: &FilteredGraph, bound: usize) -> Result<()> {
    if fg.n_vertices() > bound {
        return Err(Error::OracleBound {
            vertices: fg.n_vertices(),
            bound,
        });
    }
    Ok(())
}

/// Full extended-persistence computation: `Dg0` (ordinary pairs plus one
/// essential point per component) and `ExDg1`.
pub fn extended_persistence_oracle(fg: &FilteredGraph, oracle_bound: usize) -> Result<PersistenceDiagram> {
    check_bound(fg, oracle_bound)?;
    let filtration = build(fg);
    let (pairs, paired) = reduce(filtration.columns);
    let cells = &filtration.cells;
    let vertex_value = |v: usize| fg.vertex_values()[v];
    let edge_value = |e: usize| fg.edges()[e].2;

    let mut diagram = PersistenceDiagram::default();
    for (b, d) in pairs {
        match (cells[b], cells[d]) {
            (ConeCell::Vertex(v), ConeCell::Edge(e)) => {
                diagram.dim0.push(PersistencePoint::ordinary(vertex_value(v), edge_value(e)));
            }
            (ConeCell::Vertex(v), ConeCell::ConeVertex(_)) => {
                diagram.dim0.push(PersistencePoint::essential(vertex_value(v)));
            }
            (ConeCell::Edge(e), ConeCell::ConeEdge(f)) => {
                diagram.dim1.push(PersistencePoint::extended(edge_value(e), edge_value(f)));
            }
            (ConeCell::ConeVertex(_), ConeCell::ConeEdge(_)) => {}
            (b, d) => {
                return Err(Error::Invariant(format!("unexpected extended pair {b:?} -> {d:?}")));
            }
        }
    }
    if let Some(i) = (1..cells.len()).find(|&i| !paired[i]) {
        return Err(Error::Invariant(format!("cell {:?} left unpaired", cells[i])));
    }
    diagram.canonicalize();
    check_invariants(fg, &diagram, true, true)?;
    Ok(diagram)
}

/// `ExDg1` of the graph (the `dim0` field of the result is empty).
pub fn compute_exdg1(fg: &FilteredGraph, oracle_bound: usize) -> Result<PersistenceDiagram> {
    let full = extended_persistence_oracle(fg, oracle_bound)?;
    Ok(PersistenceDiagram {
        dim0: Vec::new(),
        dim1: full.dim1,
    })
}
