//! Labeled multigraphs with stable, ordered edge indexing.
//!
//! Every polynomial in this crate lives over a [`LabeledGraph`]: edge `e`
//! carries the variable `α_e`, and the orientation of an edge is the order
//! in which its endpoints were given.

mod enumerate;
mod partition;
mod text;

use std::collections::BTreeMap;

use thiserror::Error;

pub use enumerate::SpanningForests;
pub use partition::VertexSubsetPartition;

pub type VertexId = usize;
pub type EdgeId = usize;

/// Old edge id → new edge id (`None` for removed edges).
pub type EdgeMap = Vec<Option<EdgeId>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge {edge} has endpoint {vertex}, but the graph has {vertex_count} vertices")]
    EndpointOutOfRange {
        edge: EdgeId,
        vertex: VertexId,
        vertex_count: usize,
    },
    #[error("edge {0} is a self-loop")]
    SelfLoop(EdgeId),
    #[error("vertex {vertex} does not exist (graph has {vertex_count} vertices)")]
    InvalidVertex {
        vertex: VertexId,
        vertex_count: usize,
    },
    #[error("edge {edge} does not exist (graph has {edge_count} edges)")]
    InvalidEdge { edge: EdgeId, edge_count: usize },
    #[error("edge {0} selected more than once")]
    DuplicateEdge(EdgeId),
    #[error("contracting the selected edges collapses a cycle")]
    CycleCollapse,
    #[error("contraction turns edge {0} into a self-loop")]
    LoopCreated(EdgeId),
    #[error("permutation has {got} entries, graph has {expected} vertices")]
    PermutationSize { got: usize, expected: usize },
    #[error("vertex map is not a bijection")]
    NotAPermutation,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A multigraph on vertices `0..vertex_count` with an ordered edge list.
///
/// Edge ids are positions in the list. Parallel edges are allowed,
/// self-loops are not.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledGraph {
    vertex_count: usize,
    edges: Vec<(VertexId, VertexId)>,
}

/// Result of [`LabeledGraph::contract_edges`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contraction {
    pub graph: LabeledGraph,
    /// Old vertex id → new vertex id.
    pub vertex_map: Vec<VertexId>,
    /// Old edge id → new edge id; contracted edges map to `None`.
    pub edge_map: EdgeMap,
}

impl LabeledGraph {
    pub fn new(vertex_count: usize, edges: Vec<(VertexId, VertexId)>) -> Result<Self, GraphError> {
        for (e, &(t, h)) in edges.iter().enumerate() {
            for v in [t, h] {
                if v >= vertex_count {
                    return Err(GraphError::EndpointOutOfRange {
                        edge: e,
                        vertex: v,
                        vertex_count,
                    });
                }
            }
            if t == h {
                return Err(GraphError::SelfLoop(e));
            }
        }
        Ok(Self {
            vertex_count,
            edges,
        })
    }

    pub fn edgeless(vertex_count: usize) -> Self {
        Self {
            vertex_count,
            edges: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// `(tail, head)` of edge `e`. Panics on an invalid id.
    pub fn edge(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.edges
            .iter()
            .filter(|&&(t, h)| t == v || h == v)
            .count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for &(t, h) in &self.edges {
            deg[t] += 1;
            deg[h] += 1;
        }
        deg
    }

    /// Loop number `|E| - |V| + #components`.
    pub fn loop_number(&self) -> usize {
        self.edges.len() + self.component_count() - self.vertex_count
    }

    pub fn component_count(&self) -> usize {
        let mut uf = UnionFind::new(self.vertex_count);
        for &(t, h) in &self.edges {
            uf.union(t, h);
        }
        (0..self.vertex_count).filter(|&v| uf.find(v) == v).count()
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count > 0 && self.component_count() == 1
    }

    pub(crate) fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v < self.vertex_count {
            Ok(())
        } else {
            Err(GraphError::InvalidVertex {
                vertex: v,
                vertex_count: self.vertex_count,
            })
        }
    }

    pub(crate) fn check_edge_set(&self, ids: &[EdgeId]) -> Result<Vec<bool>, GraphError> {
        let mut selected = vec![false; self.edges.len()];
        for &e in ids {
            if e >= self.edges.len() {
                return Err(GraphError::InvalidEdge {
                    edge: e,
                    edge_count: self.edges.len(),
                });
            }
            if selected[e] {
                return Err(GraphError::DuplicateEdge(e));
            }
            selected[e] = true;
        }
        Ok(selected)
    }

    /// Full signed incidence matrix: rows are vertices, columns are edges,
    /// `+1` at the head and `-1` at the tail of every edge.
    pub fn signed_incidence(&self) -> Vec<Vec<i64>> {
        let mut rows = vec![vec![0i64; self.edges.len()]; self.vertex_count];
        for (e, &(t, h)) in self.edges.iter().enumerate() {
            rows[h][e] = 1;
            rows[t][e] = -1;
        }
        rows
    }

    /// Signed incidence matrix with the row of `dropped_vertex` removed.
    /// Remaining rows are in ascending vertex order.
    pub fn incidence_matrix(&self, dropped_vertex: VertexId) -> Result<Vec<Vec<i64>>, GraphError> {
        self.check_vertex(dropped_vertex)?;
        let mut rows = self.signed_incidence();
        rows.remove(dropped_vertex);
        Ok(rows)
    }

    /// Removes the given edges. Remaining edges keep their relative order.
    pub fn delete_edges(&self, ids: &[EdgeId]) -> Result<(LabeledGraph, EdgeMap), GraphError> {
        let selected = self.check_edge_set(ids)?;
        let mut map = vec![None; self.edges.len()];
        let mut kept = Vec::with_capacity(self.edges.len() - ids.len());
        for (e, &edge) in self.edges.iter().enumerate() {
            if !selected[e] {
                map[e] = Some(kept.len());
                kept.push(edge);
            }
        }
        let graph = LabeledGraph {
            vertex_count: self.vertex_count,
            edges: kept,
        };
        Ok((graph, map))
    }

    /// Contracts a cycle-free edge set. Merged vertex classes are numbered
    /// by their smallest original member; parallel edges are retained.
    pub fn contract_edges(&self, ids: &[EdgeId]) -> Result<Contraction, GraphError> {
        let selected = self.check_edge_set(ids)?;
        let mut uf = UnionFind::new(self.vertex_count);
        for &e in ids {
            let (t, h) = self.edges[e];
            if !uf.union(t, h) {
                return Err(GraphError::CycleCollapse);
            }
        }
        let mut class_id = BTreeMap::new();
        let mut vertex_map = vec![0; self.vertex_count];
        for v in 0..self.vertex_count {
            let root = uf.find(v);
            let next = class_id.len();
            vertex_map[v] = *class_id.entry(root).or_insert(next);
        }
        let mut edge_map = vec![None; self.edges.len()];
        let mut kept = Vec::new();
        for (e, &(t, h)) in self.edges.iter().enumerate() {
            if selected[e] {
                continue;
            }
            let (nt, nh) = (vertex_map[t], vertex_map[h]);
            if nt == nh {
                return Err(GraphError::LoopCreated(e));
            }
            edge_map[e] = Some(kept.len());
            kept.push((nt, nh));
        }
        Ok(Contraction {
            graph: LabeledGraph {
                vertex_count: class_id.len(),
                edges: kept,
            },
            vertex_map,
            edge_map,
        })
    }

    /// Removes vertex `v` with its incident edges. Vertices above `v` shift
    /// down by one; edges keep their relative order.
    pub fn delete_vertex(&self, v: VertexId) -> Result<LabeledGraph, GraphError> {
        self.check_vertex(v)?;
        let shift = |x: VertexId| if x > v { x - 1 } else { x };
        let edges = self
            .edges
            .iter()
            .filter(|&&(t, h)| t != v && h != v)
            .map(|&(t, h)| (shift(t), shift(h)))
            .collect();
        Ok(LabeledGraph {
            vertex_count: self.vertex_count - 1,
            edges,
        })
    }

    /// Relabels vertices: vertex `v` becomes `perm[v]`. Edge order is kept.
    pub fn relabel(&self, perm: &[VertexId]) -> Result<LabeledGraph, GraphError> {
        check_permutation(perm, self.vertex_count)?;
        let edges = self
            .edges
            .iter()
            .map(|&(t, h)| (perm[t], perm[h]))
            .collect();
        Ok(LabeledGraph {
            vertex_count: self.vertex_count,
            edges,
        })
    }

    /// Undirected edge multiset as sorted pairs.
    pub fn edge_multiset(&self) -> Vec<(VertexId, VertexId)> {
        let mut pairs: Vec<_> = self
            .edges
            .iter()
            .map(|&(t, h)| (t.min(h), t.max(h)))
            .collect();
        pairs.sort_unstable();
        pairs
    }

    /// Whether `perm` maps the undirected edge multiset onto itself.
    pub fn is_automorphism(&self, perm: &[VertexId]) -> Result<bool, GraphError> {
        self.maps_onto(perm, self)
    }

    /// Whether `perm` (a vertex bijection `self → other`) carries the edge
    /// multiset of `self` exactly onto that of `other`.
    pub fn maps_onto(&self, perm: &[VertexId], other: &LabeledGraph) -> Result<bool, GraphError> {
        check_permutation(perm, self.vertex_count)?;
        if other.vertex_count != self.vertex_count || other.edge_count() != self.edge_count() {
            return Ok(false);
        }
        let mut image: Vec<_> = self
            .edges
            .iter()
            .map(|&(t, h)| {
                let (a, b) = (perm[t], perm[h]);
                (a.min(b), a.max(b))
            })
            .collect();
        image.sort_unstable();
        Ok(image == other.edge_multiset())
    }

    /// Whether `edges` form a spanning forest whose trees correspond
    /// one-to-one with the blocks of `partition`.
    pub fn is_partition_forest(&self, edges: &[EdgeId], partition: &VertexSubsetPartition) -> bool {
        let n = self.vertex_count;
        if edges.len() + partition.block_count() != n {
            return false;
        }
        let mut uf = UnionFind::new(n);
        for &e in edges {
            let (t, h) = self.edges[e];
            if !uf.union(t, h) {
                return false;
            }
        }
        let mut root_label: Vec<Option<usize>> = vec![None; n];
        for (b, block) in partition.blocks().iter().enumerate() {
            for &v in block {
                let r = uf.find(v);
                match root_label[r] {
                    Some(other) if other != b => return false,
                    _ => root_label[r] = Some(b),
                }
            }
        }
        (0..n).all(|v| uf.find(v) != v || root_label[v].is_some())
    }

    /// Spanning trees as sorted edge-id sets, in lexicographic order.
    pub fn spanning_trees(&self) -> SpanningForests<'_> {
        SpanningForests::trees(self)
    }

    /// Spanning forests whose trees correspond one-to-one with the blocks
    /// of `partition`, each block lying inside its tree.
    pub fn spanning_forests(
        &self,
        partition: &VertexSubsetPartition,
    ) -> Result<SpanningForests<'_>, GraphError> {
        partition.check_within(self.vertex_count)?;
        Ok(SpanningForests::forests(self, partition))
    }
}

pub(crate) fn check_permutation(perm: &[VertexId], n: usize) -> Result<(), GraphError> {
    if perm.len() != n {
        return Err(GraphError::PermutationSize {
            got: perm.len(),
            expected: n,
        });
    }
    let mut seen = vec![false; n];
    for &x in perm {
        if x >= n || seen[x] {
            return Err(GraphError::NotAPermutation);
        }
        seen[x] = true;
    }
    Ok(())
}

/// Plain union-find with path halving.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> LabeledGraph {
        LabeledGraph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn rejects_self_loops_and_bad_endpoints() {
        assert_eq!(
            LabeledGraph::new(2, vec![(0, 1), (1, 1)]),
            Err(GraphError::SelfLoop(1))
        );
        assert!(matches!(
            LabeledGraph::new(2, vec![(0, 2)]),
            Err(GraphError::EndpointOutOfRange { vertex: 2, .. })
        ));
        assert!(LabeledGraph::new(2, vec![(0, 1), (1, 0)]).is_ok());
    }

    #[test]
    fn incidence_of_triangle() {
        let m = triangle().incidence_matrix(2).unwrap();
        assert_eq!(m, vec![vec![-1, 0, 1], vec![1, -1, 0]]);
    }

    #[test]
    fn incidence_of_single_edge() {
        let g = LabeledGraph::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(g.incidence_matrix(1).unwrap(), vec![vec![-1]]);
        assert!(g.incidence_matrix(2).is_err());
    }

    #[test]
    fn incidence_columns_sum_to_zero() {
        let g = LabeledGraph::new(4, vec![(0, 1), (1, 2), (3, 1), (2, 0), (0, 1)]).unwrap();
        let m = g.signed_incidence();
        for e in 0..g.edge_count() {
            assert_eq!(m.iter().map(|row| row[e]).sum::<i64>(), 0);
        }
    }

    #[test]
    fn delete_edges_reindexes() {
        let (g, map) = triangle().delete_edges(&[1]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (2, 0)]);
        assert_eq!(map, vec![Some(0), None, Some(1)]);

        let (same, id) = triangle().delete_edges(&[]).unwrap();
        assert_eq!(same, triangle());
        assert_eq!(id, vec![Some(0), Some(1), Some(2)]);

        let (bare, map) = triangle().delete_edges(&[0, 1, 2]).unwrap();
        assert_eq!(bare.edge_count(), 0);
        assert_eq!(bare.vertex_count(), 3);
        assert!(map.iter().all(Option::is_none));

        assert_eq!(
            triangle().delete_edges(&[1, 1]),
            Err(GraphError::DuplicateEdge(1))
        );
        assert!(triangle().delete_edges(&[3]).is_err());
    }

    #[test]
    fn contract_edges_cases() {
        let c = triangle().contract_edges(&[0]).unwrap();
        assert_eq!(c.graph.vertex_count(), 2);
        assert_eq!(c.graph.edges(), &[(0, 1), (1, 0)]);
        assert_eq!(c.vertex_map, vec![0, 0, 1]);
        assert_eq!(c.edge_map, vec![None, Some(0), Some(1)]);

        assert_eq!(
            triangle().contract_edges(&[0, 1, 2]),
            Err(GraphError::CycleCollapse)
        );
        assert_eq!(
            triangle().contract_edges(&[0, 1]),
            Err(GraphError::LoopCreated(2))
        );

        let path = LabeledGraph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let c = path.contract_edges(&[0]).unwrap();
        assert_eq!(c.graph.vertex_count(), 2);
        assert_eq!(c.graph.edges(), &[(0, 1)]);
    }

    #[test]
    fn automorphisms() {
        let t = triangle();
        assert!(t.is_automorphism(&[0, 1, 2]).unwrap());
        assert!(t.is_automorphism(&[1, 0, 2]).unwrap());
        assert!(t.is_automorphism(&[0, 2, 1]).unwrap());
        let path = LabeledGraph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        assert!(path.is_automorphism(&[2, 1, 0]).unwrap());
        assert!(!path.is_automorphism(&[1, 0, 2]).unwrap());
        assert_eq!(
            path.is_automorphism(&[0, 1]),
            Err(GraphError::PermutationSize {
                got: 2,
                expected: 3
            })
        );
        assert_eq!(
            path.is_automorphism(&[0, 0, 1]),
            Err(GraphError::NotAPermutation)
        );
    }

    #[test]
    fn delete_vertex_shifts_ids() {
        let k4 =
            LabeledGraph::new(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let g = k4.delete_vertex(1).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn loop_number_counts_components() {
        assert_eq!(triangle().loop_number(), 1);
        let two = LabeledGraph::new(4, vec![(0, 1), (2, 3), (3, 2)]).unwrap();
        assert_eq!(two.component_count(), 2);
        assert_eq!(two.loop_number(), 1);
        assert!(!two.is_connected());
    }
}
