//! Family specs for the grid and circulant families, built in code.

use super::{Deletion, Endpoint, RecursiveFamilySpec, TemplateEdge};
use crate::graph::LabeledGraph;

fn layer(back: usize, index: usize) -> Endpoint {
    Endpoint::Layer { back, index }
}

impl RecursiveFamilySpec {
    /// Decompleted non-skew toroidal grids `(k,0),(0,m)` for fixed `m ≥ 3`,
    /// indexed by `k ≥ 3`.
    ///
    /// Layer `ℓ` is column `ℓ` of the grid; `W_0` is column 0 without the
    /// deleted vertex `(0,0)`, so `B<y-1>` is `(0,y)`. The newest column
    /// closes the torus through the wrap edges to `W_0`, which are removed
    /// once the next column arrives.
    pub fn nonskew_grid(m: usize) -> Self {
        assert!(m >= 3, "grid needs m >= 3");
        let base_edges = (0..m - 2).map(|y| (y, y + 1)).collect();
        let mut edges = Vec::new();
        for y in 0..m {
            edges.push(TemplateEdge::new(layer(0, y), layer(0, (y + 1) % m)));
        }
        for y in 0..m {
            edges.push(TemplateEdge::new(layer(1, y), layer(0, y)));
        }
        let mut deletions = Vec::new();
        for y in 1..m {
            deletions.push(Deletion {
                after: 1,
                template: edges.len(),
            });
            edges.push(TemplateEdge::new(layer(0, y), Endpoint::Base(y - 1)));
        }
        let mut prelayer = vec![None];
        prelayer.extend((0..m - 1).map(Some));
        let mut boundary: Vec<Endpoint> = (0..m - 1).map(Endpoint::Base).collect();
        for back in 0..=1 {
            boundary.extend((0..m).map(|y| layer(back, y)));
        }
        Self {
            name: format!("nonskew_grid_m{m}"),
            offset: 3,
            offset_layers: 2,
            stride: 1,
            formula: 2,
            warmup: None,
            base: LabeledGraph::new(m - 1, base_edges).expect("valid base"),
            prelayers: vec![prelayer],
            width: m,
            edges,
            deletions,
            boundary,
        }
    }

    /// Decompleted circulants `C_{3k}(1,3)`, indexed by `k ≥ 3`.
    ///
    /// `G_ℓ` is `C_{ℓ+3}(1,3)` without vertex 0: `W_0` holds circulant
    /// vertices 1 and 2, and layer `ℓ` is vertex `ℓ+2`. The two wrap edges
    /// of the newest vertex pair go back to `W_0`.
    pub fn skew_circulant_1_3() -> Self {
        Self {
            name: "skew_circulant_1_3".into(),
            offset: 3,
            offset_layers: 6,
            stride: 3,
            formula: 2,
            warmup: None,
            base: LabeledGraph::new(2, vec![(0, 1)]).expect("valid base"),
            prelayers: vec![vec![Some(1)], vec![Some(0)], vec![None]],
            width: 1,
            edges: vec![
                TemplateEdge::new(layer(1, 0), layer(0, 0)),
                TemplateEdge::new(layer(3, 0), layer(0, 0)),
                TemplateEdge::new(layer(1, 0), Endpoint::Base(0)),
                TemplateEdge::new(layer(0, 0), Endpoint::Base(1)),
            ],
            deletions: vec![
                Deletion {
                    after: 1,
                    template: 2,
                },
                Deletion {
                    after: 1,
                    template: 3,
                },
            ],
            boundary: vec![
                Endpoint::Base(0),
                Endpoint::Base(1),
                layer(0, 0),
                layer(1, 0),
                layer(2, 0),
                layer(3, 0),
            ],
        }
    }

    /// The constant family `G_n = K_4`: empty layers, no template edges.
    pub fn constant_k4() -> Self {
        let k4 = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        Self {
            name: "constant_k4".into(),
            offset: 0,
            offset_layers: 0,
            stride: 1,
            formula: 2,
            warmup: None,
            base: LabeledGraph::new(4, k4).expect("valid base"),
            prelayers: Vec::new(),
            width: 0,
            edges: Vec::new(),
            deletions: Vec::new(),
            boundary: (0..4).map(Endpoint::Base).collect(),
        }
    }
}
