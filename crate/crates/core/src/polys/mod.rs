//! Kirchhoff, Dodgson and spanning forest polynomials.
//!
//! Kirchhoff and Dodgson polynomials are only ever evaluated, through the
//! determinant of the expanded matrix
//!
//! ```text
//!     M = [  Λ   Eᵀ ]
//!         [ -E   0  ]
//! ```
//!
//! where `Λ = diag(α_0, …, α_{m-1})` and `E` is the signed incidence matrix
//! with one vertex row dropped. Edge rows/columns come first, in edge-id
//! order, followed by the remaining vertex rows/columns in ascending vertex
//! order. `det M = Ψ_G` exactly.
//!
//! The Dodgson polynomial `Ψ^{I,J}_K` is the determinant of `M` with edge
//! rows `I` and edge columns `J` deleted and `α_e = 0` for `e ∈ K`. Rows and
//! columns are deleted without any sign correction; the remaining ones keep
//! their relative order.

mod forest;

use thiserror::Error;

use crate::fp::{det_in_place, FpError, PrimeField};
use crate::graph::{EdgeId, GraphError, LabeledGraph, VertexId};

pub use forest::{
    dodgson_to_forest, dodgson_to_forest_mod2, eval_forest_poly, set_partitions, EdgeFate,
    ForestPolyExpr,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Field(#[from] FpError),
    #[error("invalid Dodgson index sets: {0}")]
    InvalidSpec(String),
    #[error("point has {got} coordinates, expected {expected}")]
    PointSize { got: usize, expected: usize },
    #[error("the mod-2 forest decomposition needs p = 2, got p = {0}")]
    UnsupportedCharacteristic(u64),
    #[error("edge {0} is not present in the expression's host graph")]
    EdgeNotPresent(EdgeId),
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("forest term {partition} has coefficient {value}, expected ±1")]
    ForestSign { partition: String, value: u64 },
}

/// Index sets `(I, J, K)` selecting `Ψ^{I,J}_K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DodgsonSpec {
    pub i: Vec<EdgeId>,
    pub j: Vec<EdgeId>,
    pub k: Vec<EdgeId>,
}

impl DodgsonSpec {
    pub fn new(i: Vec<EdgeId>, j: Vec<EdgeId>, k: Vec<EdgeId>) -> Self {
        let mut s = Self { i, j, k };
        s.i.sort_unstable();
        s.j.sort_unstable();
        s.k.sort_unstable();
        s
    }

    /// The Kirchhoff polynomial itself.
    pub fn kirchhoff() -> Self {
        Self::default()
    }

    pub fn validate(&self, g: &LabeledGraph) -> Result<(), PolyError> {
        if self.i.len() != self.j.len() {
            return Err(PolyError::InvalidSpec(format!(
                "|I| = {} but |J| = {}",
                self.i.len(),
                self.j.len()
            )));
        }
        for (name, set) in [("I", &self.i), ("J", &self.j), ("K", &self.k)] {
            let mut sorted = set.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(PolyError::InvalidSpec(format!("{name} repeats an edge")));
            }
            if let Some(&e) = sorted.iter().find(|&&e| e >= g.edge_count()) {
                return Err(PolyError::Graph(GraphError::InvalidEdge {
                    edge: e,
                    edge_count: g.edge_count(),
                }));
            }
        }
        if let Some(e) = self
            .k
            .iter()
            .find(|e| self.i.contains(e) || self.j.contains(e))
        {
            return Err(PolyError::InvalidSpec(format!(
                "edge {e} is in K and in I or J"
            )));
        }
        Ok(())
    }

    /// Membership mask of `I ∪ J ∪ K`.
    pub fn removed_mask(&self, edge_count: usize) -> Vec<bool> {
        let mut mask = vec![false; edge_count];
        for &e in self.i.iter().chain(&self.j).chain(&self.k) {
            mask[e] = true;
        }
        mask
    }

    /// Edges the polynomial depends on: those outside `I ∪ J ∪ K`.
    pub fn variables(&self, edge_count: usize) -> Vec<EdgeId> {
        let mask = self.removed_mask(edge_count);
        (0..edge_count).filter(|&e| !mask[e]).collect()
    }

    /// Homogeneous degree for a connected graph, when the polynomial is
    /// nonzero: `|E| - |I∪J∪K| - |V| + |J∖I| + |K| + 1`.
    pub fn degree(&self, g: &LabeledGraph) -> i64 {
        let union = self
            .removed_mask(g.edge_count())
            .iter()
            .filter(|&&b| b)
            .count();
        let j_only = self.j.iter().filter(|e| !self.i.contains(e)).count();
        g.edge_count() as i64 - union as i64 - g.vertex_count() as i64
            + j_only as i64
            + self.k.len() as i64
            + 1
    }
}

/// Precomputed `M(I,J)` for repeated evaluation at many points.
#[derive(Debug, Clone)]
pub struct DodgsonMatrix {
    field: PrimeField,
    edge_count: usize,
    size: usize,
    template: Vec<u64>,
    // (position in the flat matrix, edge whose value goes there)
    diagonal: Vec<(usize, EdgeId)>,
}

impl DodgsonMatrix {
    pub fn new(g: &LabeledGraph, spec: &DodgsonSpec, field: PrimeField) -> Result<Self, PolyError> {
        if g.vertex_count() == 0 {
            return Err(PolyError::EmptyGraph);
        }
        Self::with_dropped_vertex(g, spec, field, g.vertex_count() - 1)
    }

    pub fn with_dropped_vertex(
        g: &LabeledGraph,
        spec: &DodgsonSpec,
        field: PrimeField,
        dropped: VertexId,
    ) -> Result<Self, PolyError> {
        spec.validate(g)?;
        let incidence = g.incidence_matrix(dropped)?;
        let m = g.edge_count();
        let full = m + incidence.len();
        let mut row_removed = vec![false; full];
        let mut col_removed = vec![false; full];
        for &e in &spec.i {
            row_removed[e] = true;
        }
        for &e in &spec.j {
            col_removed[e] = true;
        }
        let rows: Vec<usize> = (0..full).filter(|&r| !row_removed[r]).collect();
        let cols: Vec<usize> = (0..full).filter(|&c| !col_removed[c]).collect();
        let size = rows.len();
        let mut col_pos = vec![usize::MAX; full];
        for (ci, &c) in cols.iter().enumerate() {
            col_pos[c] = ci;
        }
        let k_mask = {
            let mut mask = vec![false; m];
            for &e in &spec.k {
                mask[e] = true;
            }
            mask
        };
        let mut template = vec![0u64; size * size];
        let mut diagonal = Vec::new();
        for (ri, &r) in rows.iter().enumerate() {
            if r < m {
                if col_pos[r] != usize::MAX && !k_mask[r] {
                    diagonal.push((ri * size + col_pos[r], r));
                }
                for (vr, inc_row) in incidence.iter().enumerate() {
                    let c = m + vr;
                    if inc_row[r] != 0 {
                        template[ri * size + col_pos[c]] = field.from_i64(inc_row[r]);
                    }
                }
            } else {
                let inc_row = &incidence[r - m];
                for e in 0..m {
                    if inc_row[e] != 0 && col_pos[e] != usize::MAX {
                        template[ri * size + col_pos[e]] = field.from_i64(-inc_row[e]);
                    }
                }
            }
        }
        Ok(Self {
            field,
            edge_count: m,
            size,
            template,
            diagonal,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Evaluates at `point` (indexed by edge id, residues mod p). Values at
    /// edges of `I ∪ J ∪ K` are ignored. `scratch` is reused between calls.
    pub fn eval_with(&self, point: &[u64], scratch: &mut Vec<u64>) -> u64 {
        debug_assert_eq!(point.len(), self.edge_count);
        scratch.clear();
        scratch.extend_from_slice(&self.template);
        for &(pos, e) in &self.diagonal {
            scratch[pos] = point[e];
        }
        det_in_place(self.field, scratch, self.size)
    }

    pub fn eval(&self, point: &[u64]) -> Result<u64, PolyError> {
        if point.len() != self.edge_count {
            return Err(PolyError::PointSize {
                got: point.len(),
                expected: self.edge_count,
            });
        }
        let reduced: Vec<u64> = point.iter().map(|&x| self.field.reduce(x)).collect();
        Ok(self.eval_with(&reduced, &mut Vec::new()))
    }
}

/// `Ψ_G` at a point, via `det M`.
pub fn eval_kirchhoff(
    g: &LabeledGraph,
    point: &[u64],
    field: PrimeField,
) -> Result<u64, PolyError> {
    DodgsonMatrix::new(g, &DodgsonSpec::kirchhoff(), field)?.eval(point)
}

/// `Ψ^{I,J}_K` at a point, via `det M(I,J)` with `K` set to zero.
pub fn eval_dodgson(
    g: &LabeledGraph,
    spec: &DodgsonSpec,
    point: &[u64],
    field: PrimeField,
) -> Result<u64, PolyError> {
    DodgsonMatrix::new(g, spec, field)?.eval(point)
}

/// `Ψ_G` at a point by summing over spanning trees. Exponential; kept as an
/// independent check of the determinant route.
pub fn eval_kirchhoff_by_trees(
    g: &LabeledGraph,
    point: &[u64],
    field: PrimeField,
) -> Result<u64, PolyError> {
    if point.len() != g.edge_count() {
        return Err(PolyError::PointSize {
            got: point.len(),
            expected: g.edge_count(),
        });
    }
    Ok(sum_complement_products(g.spanning_trees(), point, field))
}

/// `Σ_F Π_{e∉F} α_e` over the given edge sets `F`.
pub(crate) fn sum_complement_products(
    sets: impl Iterator<Item = Vec<EdgeId>>,
    point: &[u64],
    field: PrimeField,
) -> u64 {
    let mut total = 0;
    let mut in_set = vec![false; point.len()];
    for set in sets {
        for &e in &set {
            in_set[e] = true;
        }
        let mut term = 1 % field.modulus();
        for (e, &x) in point.iter().enumerate() {
            if !in_set[e] {
                term = field.mul(term, field.reduce(x));
            }
        }
        total = field.add(total, term);
        for &e in &set {
            in_set[e] = false;
        }
    }
    total
}
