use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{FilteredGraph, PersistenceDiagram, PersistencePoint};

/// Disjoint-set forest with path halving and union by rank.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: alloc::vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns the new root, or `None` if
    /// they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.rank[ra] < self.rank[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        if self.rank[ra] == self.rank[rb] {
            self.rank[ra] += 1;
        }
        Some(ra)
    }
}

/// A cell of the sublevel filtration, in sweep order.
#[derive(Debug, Clone, Copy)]
pub(super) enum Cell {
    Vertex(usize),
    Edge(usize),
}

/// Sublevel order: by value, vertices before edges at equal value, then by
/// vertex index or by `(u, v)`.
pub(super) fn sublevel_order(fg: &FilteredGraph) -> Vec<Cell> {
    let mut cells: Vec<Cell> = (0..fg.n_vertices())
        .map(Cell::Vertex)
        .chain((0..fg.n_edges()).map(Cell::Edge))
        .collect();
    let key = |c: &Cell| match *c {
        Cell::Vertex(v) => (fg.vertex_values[v], 0u8, v, 0usize),
        Cell::Edge(e) => {
            let (u, v, w) = fg.edges[e];
            (w, 1u8, u, v)
        }
    };
    cells.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0)
            .then(ka.1.cmp(&kb.1))
            .then(ka.2.cmp(&kb.2))
            .then(ka.3.cmp(&kb.3))
    });
    cells
}

/// 0-dimensional ordinary persistence by the elder rule.
///
/// When an edge joins two components, the one whose oldest vertex entered
/// the sweep later dies at the edge value. Surviving components become
/// essential points `(birth, ∞)`. Zero-persistence points are kept; see
/// [`PersistencePoint::is_diagonal`].
pub fn compute_dg0(fg: &FilteredGraph) -> PersistenceDiagram {
    let order = sublevel_order(fg);
    let mut position = alloc::vec![0usize; fg.n_vertices()];
    for (pos, cell) in order.iter().enumerate() {
        if let Cell::Vertex(v) = *cell {
            position[v] = pos;
        }
    }
    let mut uf = UnionFind::new(fg.n_vertices());
    // Oldest vertex of the component rooted at each root.
    let mut oldest: Vec<usize> = (0..fg.n_vertices()).collect();
    let mut dim0 = Vec::with_capacity(fg.n_vertices());

    for cell in &order {
        let Cell::Edge(e) = *cell else { continue };
        let (u, v, w) = fg.edges[e];
        let (ru, rv) = (uf.find(u), uf.find(v));
        if ru == rv {
            continue;
        }
        let (ou, ov) = (oldest[ru], oldest[rv]);
        let (elder, younger) = match position[ou].cmp(&position[ov]) {
            Ordering::Less => (ou, ov),
            _ => (ov, ou),
        };
        dim0.push(PersistencePoint::ordinary(fg.vertex_values[younger], w));
        let root = uf.union(ru, rv).expect("distinct roots");
        oldest[root] = elder;
    }

    let mut roots: Vec<usize> = (0..fg.n_vertices()).filter(|&v| uf.find(v) == v).collect();
    roots.sort_by_key(|&r| position[oldest[r]]);
    for r in roots {
        dim0.push(PersistencePoint::essential(fg.vertex_values[oldest[r]]));
    }
    let mut diagram = PersistenceDiagram { dim0, dim1: Vec::new() };
    diagram.canonicalize();
    diagram
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn fig4() -> FilteredGraph {
        // A-B:1, C-D:2, B-C:4, C-E:6, E-B:7 with A..E = 0..4
        FilteredGraph::from_edges(5, &[(0, 1, 1.0), (2, 3, 2.0), (1, 2, 4.0), (2, 4, 6.0), (4, 1, 7.0)], 0.0).unwrap()
    }

    #[test]
    fn figure_four_dim0() {
        let dg = compute_dg0(&fig4());
        assert_eq!(dg.dim0.len(), 5);
        let off: Vec<(f64, f64)> = dg
            .dim0
            .iter()
            .filter(|p| !p.is_diagonal())
            .map(|p| (p.birth, p.death))
            .collect();
        assert_eq!(off, vec![(1.0, f64::INFINITY), (2.0, 4.0)]);
        let diag: Vec<f64> = dg.dim0.iter().filter(|p| p.is_diagonal()).map(|p| p.birth).collect();
        assert_eq!(diag, vec![1.0, 2.0, 6.0]);
    }

    #[test]
    fn single_edge_and_isolated_vertices() {
        let one = FilteredGraph::from_edges(2, &[(0, 1, 0.4)], 0.0).unwrap();
        let dg = compute_dg0(&one);
        let kept: Vec<_> = dg.dim0.iter().filter(|p| !p.is_diagonal()).collect();
        assert_eq!(kept.len(), 1);
        assert_eq!((kept[0].birth, kept[0].death), (0.4, f64::INFINITY));

        let two = FilteredGraph::from_edges(2, &[], 0.0).unwrap();
        let dg = compute_dg0(&two);
        assert_eq!(dg.dim0, vec![PersistencePoint::essential(0.0); 2]);
    }

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(4);
        assert!(uf.union(0, 1).is_some());
        assert!(uf.union(2, 3).is_some());
        assert!(uf.union(1, 0).is_none());
        assert!(uf.union(1, 3).is_some());
        assert_eq!(uf.find(0), uf.find(2));
    }
}
