use super::{EdgeId, LabeledGraph, VertexSubsetPartition};

/// Union-find with undo, used by the forest enumerator. No path
/// compression so that every union can be rolled back.
#[derive(Debug, Clone)]
struct RollbackUf {
    parent: Vec<usize>,
    size: Vec<usize>,
    label: Vec<Option<u32>>,
    // (attached root, root it was attached to, label of that root before)
    log: Vec<(usize, usize, Option<u32>)>,
}

impl RollbackUf {
    fn new(labels: Vec<Option<u32>>) -> Self {
        let n = labels.len();
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            label: labels,
            log: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Joins the components of `a` and `b` unless that would close a cycle
    /// or merge two differently labeled components.
    fn try_union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if let (Some(x), Some(y)) = (self.label[ra], self.label[rb]) {
            if x != y {
                return false;
            }
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.log.push((rb, ra, self.label[ra]));
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        if self.label[ra].is_none() {
            self.label[ra] = self.label[rb];
        }
        true
    }

    fn undo(&mut self) {
        let (child, root, old_label) = self.log.pop().expect("undo without union");
        self.parent[child] = child;
        self.size[root] -= self.size[child];
        self.label[root] = old_label;
    }

    fn all_components_labeled(&self) -> bool {
        (0..self.parent.len()).all(|v| self.parent[v] != v || self.label[v].is_some())
    }
}

/// Lazy enumerator of spanning forests compatible with a vertex partition.
///
/// Yields sorted edge-id sets in lexicographic order. Depth-first search
/// over edges in index order, trying inclusion before exclusion.
#[derive(Debug, Clone)]
pub struct SpanningForests<'g> {
    graph: &'g LabeledGraph,
    uf: RollbackUf,
    target: usize,
    chosen: Vec<EdgeId>,
    // Decisions taken so far: (edge, included).
    stack: Vec<(EdgeId, bool)>,
    pos: usize,
    resume: bool,
    done: bool,
}

impl<'g> SpanningForests<'g> {
    pub(super) fn trees(graph: &'g LabeledGraph) -> Self {
        let n = graph.vertex_count();
        if n == 0 {
            return Self::exhausted(graph);
        }
        Self::with_labels(graph, vec![Some(0); n], n - 1)
    }

    pub(super) fn forests(graph: &'g LabeledGraph, partition: &VertexSubsetPartition) -> Self {
        let n = graph.vertex_count();
        let b = partition.block_count();
        Self::with_labels(graph, partition.labels(n), n - b)
    }

    fn exhausted(graph: &'g LabeledGraph) -> Self {
        let mut it = Self::with_labels(graph, Vec::new(), 0);
        it.done = true;
        it
    }

    fn with_labels(graph: &'g LabeledGraph, labels: Vec<Option<u32>>, target: usize) -> Self {
        Self {
            graph,
            uf: RollbackUf::new(labels),
            target,
            chosen: Vec::with_capacity(target),
            stack: Vec::new(),
            pos: 0,
            resume: false,
            done: target > graph.edge_count(),
        }
    }

    /// Undo decisions back to the most recent inclusion and flip it to an
    /// exclusion. Returns false when the search space is exhausted.
    fn backtrack(&mut self) -> bool {
        while let Some((e, included)) = self.stack.pop() {
            if included {
                self.uf.undo();
                self.chosen.pop();
                self.stack.push((e, false));
                self.pos = e + 1;
                return true;
            }
        }
        false
    }
}

impl Iterator for SpanningForests<'_> {
    type Item = Vec<EdgeId>;

    fn next(&mut self) -> Option<Vec<EdgeId>> {
        if self.done {
            return None;
        }
        if self.resume {
            self.resume = false;
            if !self.backtrack() {
                self.done = true;
                return None;
            }
        }
        let m = self.graph.edge_count();
        loop {
            if self.chosen.len() == self.target {
                if self.uf.all_components_labeled() {
                    self.resume = true;
                    return Some(self.chosen.clone());
                }
            } else if m - self.pos >= self.target - self.chosen.len() {
                let e = self.pos;
                let (t, h) = self.graph.edge(e);
                let included = self.uf.try_union(t, h);
                if included {
                    self.chosen.push(e);
                }
                self.stack.push((e, included));
                self.pos += 1;
                continue;
            }
            if !self.backtrack() {
                self.done = true;
                return None;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LabeledGraph;

    fn k4() -> LabeledGraph {
        LabeledGraph::new(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn triangle_trees_in_order() {
        let g = LabeledGraph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let trees: Vec<_> = g.spanning_trees().collect();
        assert_eq!(trees, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn k4_has_sixteen_trees() {
        assert_eq!(k4().spanning_trees().count(), 16);
    }

    #[test]
    fn parallel_edges_count_separately() {
        let g = LabeledGraph::new(2, vec![(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(g.spanning_trees().count(), 3);
    }

    #[test]
    fn disconnected_graph_has_no_trees() {
        let g = LabeledGraph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        assert_eq!(g.spanning_trees().count(), 0);
    }

    #[test]
    fn single_vertex_has_empty_tree() {
        let g = LabeledGraph::edgeless(1);
        assert_eq!(
            g.spanning_trees().collect::<Vec<_>>(),
            vec![Vec::<usize>::new()]
        );
        assert_eq!(LabeledGraph::edgeless(0).spanning_trees().count(), 0);
    }

    #[test]
    fn forests_match_singleton_partition() {
        let g = k4();
        let p = VertexSubsetPartition::singleton(2);
        let a: Vec<_> = g.spanning_forests(&p).unwrap().collect();
        let b: Vec<_> = g.spanning_trees().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn two_block_forests_of_a_square() {
        // 4-cycle 0-1-2-3-0 with blocks {0},{2}: each forest has two trees,
        // one through 0 and one through 2.
        let g = LabeledGraph::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let p = VertexSubsetPartition::new(vec![vec![0], vec![2]]).unwrap();
        let forests: Vec<_> = g.spanning_forests(&p).unwrap().collect();
        assert_eq!(
            forests,
            vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]]
        );
    }

    #[test]
    fn unmarked_isolated_vertex_kills_forests() {
        let g = LabeledGraph::new(3, vec![(0, 1)]).unwrap();
        let p = VertexSubsetPartition::new(vec![vec![0], vec![1]]).unwrap();
        assert_eq!(g.spanning_forests(&p).unwrap().count(), 0);
        let p = VertexSubsetPartition::new(vec![vec![0], vec![2]]).unwrap();
        assert_eq!(
            g.spanning_forests(&p).unwrap().collect::<Vec<_>>(),
            vec![vec![0]]
        );
    }

    #[test]
    fn partition_out_of_range_is_rejected() {
        let g = LabeledGraph::edgeless(2);
        let p = VertexSubsetPartition::singleton(5);
        assert!(g.spanning_forests(&p).is_err());
    }
}
