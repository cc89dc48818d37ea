//! Graph filtrations and their persistence diagrams.
//!
//! Edges are filtered by weight and every vertex enters at the smallest
//! weight among its incident edges. The 0-dimensional ordinary diagram comes
//! from a union-find sweep ([`compute_dg0`]); the 1-dimensional extended
//! diagram comes from reducing the boundary matrix of the coned extended
//! filtration ([`extended_persistence_oracle`]), which also reproduces the
//! 0-dimensional diagram and serves as its cross-check.

mod dg0;
mod extended;

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

pub use dg0::{compute_dg0, UnionFind};
pub use extended::{compute_exdg1, extended_persistence_oracle, DEFAULT_ORACLE_BOUND};

use crate::corrnet::VisualNetwork;
use crate::error::{Error, Result};

/// Filter value assigned to vertices without incident edges.
pub const DEFAULT_ISOLATED_VALUE: f64 = 0.0;

/// Edge-weighted graph with vertex filter values `f(v) = min_e∋v f(e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredGraph {
    vertex_values: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

impl FilteredGraph {
    /// Builds a filtration from raw edges; isolated vertices get
    /// `isolated_value`.
    pub fn from_edges(n_vertices: usize, edges: &[(usize, usize, f64)], isolated_value: f64) -> Result<Self> {
        let mut vertex_values = alloc::vec![f64::INFINITY; n_vertices];
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v, w) in edges {
            if u == v || u >= n_vertices || v >= n_vertices {
                return Err(Error::Shape(format!("invalid edge ({u}, {v}) on {n_vertices} vertices")));
            }
            if !w.is_finite() {
                return Err(Error::NonFinite(format!("weight of edge ({u}, {v})")));
            }
            vertex_values[u] = vertex_values[u].min(w);
            vertex_values[v] = vertex_values[v].min(w);
            norm.push((u.min(v), u.max(v), w));
        }
        for f in vertex_values.iter_mut() {
            if *f == f64::INFINITY {
                *f = isolated_value;
            }
        }
        Ok(Self {
            vertex_values,
            edges: norm,
        })
    }

    pub fn vertex_values(&self) -> &[f64] {
        &self.vertex_values
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertex_values.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.n_vertices());
        let mut count = self.n_vertices();
        for &(u, v, _) in &self.edges {
            if uf.union(u, v).is_some() {
                count -= 1;
            }
        }
        count
    }

    /// Largest filter value over all cells (0 for the empty graph).
    pub fn max_value(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.2)
            .chain(self.vertex_values.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
    }
}

/// `f(e) = w(e)`, `f(v) = min` over incident edges, isolated vertices at
/// `isolated_value`.
pub fn build_filtration(network: &VisualNetwork, isolated_value: f64) -> FilteredGraph {
    let edges: Vec<_> = network.edges().iter().map(|e| (e.i, e.j, e.weight)).collect();
    FilteredGraph::from_edges(network.n_vertices(), &edges, isolated_value)
        .expect("VisualNetwork edges are validated on construction")
}

/// A point of a persistence diagram. Essential dimension-0 points have
/// `death == f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePoint {
    pub birth: f64,
    pub death: f64,
    pub dimension: u8,
    pub essential: bool,
}

impl PersistencePoint {
    pub fn ordinary(birth: f64, death: f64) -> Self {
        Self {
            birth,
            death,
            dimension: 0,
            essential: false,
        }
    }

    pub fn essential(birth: f64) -> Self {
        Self {
            birth,
            death: f64::INFINITY,
            dimension: 0,
            essential: true,
        }
    }

    pub fn extended(birth: f64, death: f64) -> Self {
        Self {
            birth,
            death,
            dimension: 1,
            essential: false,
        }
    }

    /// `|death − birth|`; infinite for essential points.
    pub fn lifespan(&self) -> f64 {
        (self.death - self.birth).abs()
    }

    /// Zero-persistence point on the diagonal.
    pub fn is_diagonal(&self) -> bool {
        !self.essential && self.birth == self.death
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.birth
            .total_cmp(&other.birth)
            .then(self.death.total_cmp(&other.death))
    }
}

/// Dimension-0 ordinary and dimension-1 extended points of one graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    pub dim0: Vec<PersistencePoint>,
    pub dim1: Vec<PersistencePoint>,
}

/// Which points survive into a filtered view of a diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointFilter {
    pub keep_diagonal: bool,
    pub keep_essential: bool,
}

impl Default for PointFilter {
    fn default() -> Self {
        Self {
            keep_diagonal: false,
            keep_essential: true,
        }
    }
}

impl PersistenceDiagram {
    /// Sorts both multisets by `(birth, death)`.
    pub fn canonicalize(&mut self) {
        self.dim0.sort_by(PersistencePoint::canonical_cmp);
        self.dim1.sort_by(PersistencePoint::canonical_cmp);
    }

    pub fn essential_count(&self) -> usize {
        self.dim0.iter().filter(|p| p.essential).count()
    }

    pub fn filtered(&self, filter: PointFilter) -> PersistenceDiagram {
        let keep = |p: &&PersistencePoint| {
            (filter.keep_diagonal || !p.is_diagonal()) && (filter.keep_essential || !p.essential)
        };
        PersistenceDiagram {
            dim0: self.dim0.iter().filter(keep).copied().collect(),
            dim1: self.dim1.iter().filter(keep).copied().collect(),
        }
    }
}

/// Cardinality and sidedness identities of a full (unfiltered) diagram.
pub fn check_invariants(fg: &FilteredGraph, diagram: &PersistenceDiagram, check_dim0: bool, check_dim1: bool) -> Result<()> {
    let v = fg.n_vertices();
    let e = fg.n_edges();
    let c = fg.components();
    if check_dim0 {
        if diagram.dim0.len() != v {
            return Err(Error::Invariant(format!("|Dg0| = {} but |V| = {v}", diagram.dim0.len())));
        }
        if diagram.essential_count() != c {
            return Err(Error::Invariant(format!(
                "{} essential points but {c} components",
                diagram.essential_count()
            )));
        }
        if let Some(p) = diagram.dim0.iter().find(|p| p.dimension != 0 || p.death < p.birth) {
            return Err(Error::Invariant(format!("Dg0 point ({}, {}) below the diagonal", p.birth, p.death)));
        }
    }
    if check_dim1 {
        let loops = e + c - v;
        if diagram.dim1.len() != loops {
            return Err(Error::Invariant(format!(
                "|ExDg1| = {} but |E| - |V| + c = {loops}",
                diagram.dim1.len()
            )));
        }
        if let Some(p) = diagram
            .dim1
            .iter()
            .find(|p| p.dimension != 1 || p.birth < p.death || !p.death.is_finite())
        {
            return Err(Error::Invariant(format!("ExDg1 point ({}, {}) above the diagonal", p.birth, p.death)));
        }
    }
    Ok(())
}

/// Both diagrams: union-find for dimension 0, the extended reduction for
/// dimension 1. Invariants are checked before returning.
pub fn compute_diagrams(fg: &FilteredGraph, oracle_bound: usize) -> Result<PersistenceDiagram> {
    let dim0 = compute_dg0(fg).dim0;
    let dim1 = compute_exdg1(fg, oracle_bound)?.dim1;
    let diagram = PersistenceDiagram { dim0, dim1 };
    check_invariants(fg, &diagram, true, true)?;
    Ok(diagram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrnet::Edge;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn filtration_min_rule() {
        let tri = FilteredGraph::from_edges(3, &[(0, 1, 1.0), (0, 2, 2.0), (1, 2, 3.0)], 0.0).unwrap();
        let mut vals = tri.vertex_values().to_vec();
        assert_eq!(vals, vec![1.0, 1.0, 2.0]);
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![1.0, 1.0, 2.0]);

        let single = FilteredGraph::from_edges(2, &[(0, 1, 0.7)], 0.0).unwrap();
        assert_eq!(single.vertex_values(), &[0.7, 0.7]);

        let star = FilteredGraph::from_edges(3, &[(0, 1, 2.0), (0, 2, 5.0)], 0.0).unwrap();
        assert_eq!(star.vertex_values(), &[2.0, 2.0, 5.0]);
    }

    #[test]
    fn filtration_from_network_with_isolated_vertex() {
        let net = VisualNetwork::new(
            (0..3).map(|i| i.to_string()).collect(),
            vec![Edge { i: 0, j: 1, weight: 0.3 }],
        )
        .unwrap();
        let fg = build_filtration(&net, DEFAULT_ISOLATED_VALUE);
        assert_eq!(fg.vertex_values(), &[0.3, 0.3, 0.0]);
        assert_eq!(fg.components(), 2);
    }
}
