//! Recursively constructible graph families and their c₂ recurrences.
//!
//! A family is described by a base graph on `W_0`, a layer of `width`
//! vertices that is repeated, a list of template edges attached to each new
//! layer, and a list of deletions that remove older template edges once the
//! family has grown past them. Member `G_n` has layers `1..=n`.
//!
//! Template endpoints are `B<v>` (vertex `v` of `W_0`) or `L<i>.<j>` (vertex
//! `j` of the layer `i` steps back). An endpoint in a layer at or below
//! zero resolves through the prelayer table: `prelayers[d][j]` is the `W_0`
//! vertex standing for vertex `j` of layer `-d`, or `None` if the edge is
//! left out.
//!
//! Vertex ids of `G_n`: `W_0` is `0..n0`, vertex `j` of layer `ℓ` is
//! `n0 + (ℓ-1)·width + j`. Edge ids: base edges first, then the surviving
//! template instances ordered by layer and template index.

mod builtin;
mod engine;
mod format;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::c2::C2Error;
use crate::fp::FpError;
use crate::graph::{GraphError, LabeledGraph, VertexId};

pub use engine::{
    seed_states, solve_family, transfer_matrix, DirectValue, OverlapEntry, RecurrenceSolution,
    SeedStates, SolveOptions, StateTuple, TransferMatrix, DEFAULT_STATE_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("template error: {0}")]
    Template(String),
    #[error("neighbourhood condition fails in G_{n}: vertex {vertex} of the newest layer is adjacent to {neighbor}, outside W_0 and the last r+1 layers")]
    Neighborhood {
        n: usize,
        vertex: VertexId,
        neighbor: VertexId,
    },
    #[error("induced boundary graph condition fails in G_{n}: {detail}")]
    InducedMismatch { n: usize, detail: String },
    #[error("edge count condition 2|V| = |E| + 2 fails in G_{n}: |V| = {vertices}, |E| = {edges}")]
    EdgeCount {
        n: usize,
        vertices: usize,
        edges: usize,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecurrenceError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    C2(#[from] C2Error),
    #[error(transparent)]
    Field(#[from] FpError),
    #[error("no choice of {needed} edges from the top layers and W_0 gives nonvanishing factors for formula {formula}")]
    NoSeedChoice { formula: u8, needed: usize },
    #[error("state at level {level} mentions vertex {vertex}, which is not a boundary vertex")]
    Hygiene { level: usize, vertex: VertexId },
    #[error("more than {cap} reachable states")]
    StateOverflow { cap: usize },
    #[error("recurrence predicts {predicted} for n = {n}, direct computation gives {direct}")]
    OverlapMismatch {
        n: usize,
        direct: u64,
        predicted: u64,
    },
    #[error("the recurrence engine for p = {0} is experimental; enable it explicitly")]
    ExperimentalPrime(u64),
    #[error("invalid solver option: {0}")]
    Options(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    /// Vertex of `W_0`.
    Base(VertexId),
    /// Vertex `index` of the layer `back` steps below the current one.
    Layer { back: usize, index: usize },
}

impl std::fmt::Display for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Endpoint::Base(v) => write!(f, "B{v}"),
            Endpoint::Layer { back, index } => write!(f, "L{back}.{index}"),
        }
    }
}

impl std::str::FromStr for Endpoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad endpoint {s:?} (expected B<v> or L<i>.<j>)");
        if let Some(rest) = s.strip_prefix('B') {
            return rest.parse().map(Endpoint::Base).map_err(|_| bad());
        }
        let rest = s.strip_prefix('L').ok_or_else(bad)?;
        let (i, j) = rest.split_once('.').ok_or_else(bad)?;
        Ok(Endpoint::Layer {
            back: i.parse().map_err(|_| bad())?,
            index: j.parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateEdge {
    pub tail: Endpoint,
    pub head: Endpoint,
}

impl TemplateEdge {
    pub fn new(tail: Endpoint, head: Endpoint) -> Self {
        Self { tail, head }
    }

    fn max_back(&self) -> usize {
        [self.tail, self.head]
            .iter()
            .map(|e| match e {
                Endpoint::Base(_) => 0,
                Endpoint::Layer { back, .. } => *back,
            })
            .max()
            .unwrap()
    }

    fn touches_newest(&self) -> bool {
        [self.tail, self.head]
            .iter()
            .any(|e| matches!(e, Endpoint::Layer { back: 0, .. }))
    }
}

/// The instance of `template` attached at layer `ℓ` is removed when the
/// family reaches layer `ℓ + after`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deletion {
    pub after: usize,
    pub template: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursiveFamilySpec {
    pub name: String,
    /// Smallest family index `n` covered by the solution.
    pub offset: usize,
    /// Number of layers of the member with index `offset`.
    pub offset_layers: usize,
    /// Layers added between consecutive members.
    pub stride: usize,
    /// Which c₂ formula seeds the recurrence (1, 2 or 3).
    pub formula: u8,
    /// Members computed directly; `None` means `r + stride + 5`, extended
    /// if needed to overlap the recurrence on at least three members.
    pub warmup: Option<usize>,
    /// `G_0`, on the vertex set `W_0`.
    pub base: LabeledGraph,
    pub prelayers: Vec<Vec<Option<VertexId>>>,
    pub width: usize,
    pub edges: Vec<TemplateEdge>,
    pub deletions: Vec<Deletion>,
    /// Vertices of the boundary graph `M`.
    pub boundary: Vec<Endpoint>,
}

/// Where an edge of a materialized member comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeOrigin {
    Base(usize),
    Instance { layer: usize, template: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Materialized {
    pub graph: LabeledGraph,
    pub origins: Vec<EdgeOrigin>,
}

impl RecursiveFamilySpec {
    /// The window depth `r`: the deepest layer offset in the boundary.
    pub fn r(&self) -> usize {
        self.boundary
            .iter()
            .map(|e| match e {
                Endpoint::Base(_) => 0,
                Endpoint::Layer { back, .. } => *back,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn base_size(&self) -> usize {
        self.base.vertex_count()
    }

    /// Number of layers of member `n`.
    pub fn layers_of(&self, n: usize) -> usize {
        self.offset_layers + (n - self.offset) * self.stride
    }

    pub fn vertex_count(&self, layers: usize) -> usize {
        self.base_size() + layers * self.width
    }

    pub(crate) fn layer_vertex(&self, layer: usize, index: usize) -> VertexId {
        self.base_size() + (layer - 1) * self.width + index
    }

    /// Layer of a vertex id, `0` for `W_0`.
    pub(crate) fn layer_of(&self, v: VertexId) -> (usize, usize) {
        let n0 = self.base_size();
        if v < n0 {
            (0, v)
        } else {
            ((v - n0) / self.width + 1, (v - n0) % self.width)
        }
    }

    fn resolve(&self, layer: usize, e: Endpoint) -> Option<VertexId> {
        match e {
            Endpoint::Base(v) => Some(v),
            Endpoint::Layer { back, index } if back < layer => {
                Some(self.layer_vertex(layer - back, index))
            }
            Endpoint::Layer { back, index } => {
                self.prelayers.get(back - layer).and_then(|row| row[index])
            }
        }
    }

    /// The template instance at `layer`, if both endpoints exist.
    pub(crate) fn instance(&self, layer: usize, template: usize) -> Option<(VertexId, VertexId)> {
        let t = self.edges[template];
        Some((self.resolve(layer, t.tail)?, self.resolve(layer, t.head)?))
    }

    pub(crate) fn is_deletable(&self, template: usize) -> bool {
        self.deletions.iter().any(|d| d.template == template)
    }

    fn alive_in(&self, layer: usize, template: usize, n: usize) -> bool {
        !self
            .deletions
            .iter()
            .any(|d| d.template == template && layer + d.after <= n)
    }

    /// `G_n` with the origin of every edge.
    pub fn materialize(&self, n: usize) -> Result<Materialized, SpecError> {
        self.check_template()?;
        let mut edges = self.base.edges().to_vec();
        let mut origins: Vec<EdgeOrigin> = (0..edges.len()).map(EdgeOrigin::Base).collect();
        for layer in 1..=n {
            for t in 0..self.edges.len() {
                if !self.alive_in(layer, t, n) {
                    continue;
                }
                if let Some(e) = self.instance(layer, t) {
                    edges.push(e);
                    origins.push(EdgeOrigin::Instance { layer, template: t });
                }
            }
        }
        let graph = LabeledGraph::new(self.vertex_count(n), edges)?;
        Ok(Materialized { graph, origins })
    }

    /// The member with family index `n`.
    pub fn member(&self, n: usize) -> Result<LabeledGraph, SpecError> {
        if n < self.offset {
            return Err(SpecError::Template(format!(
                "member {n} lies below the offset {}",
                self.offset
            )));
        }
        Ok(self.materialize(self.layers_of(n))?.graph)
    }

    /// Boundary label (`B<v>` or `L<i>.<j>`) of a local vertex id, where
    /// local ids number `W_0` first and then layer offsets `0, 1, …`.
    pub fn local_label(&self, local: VertexId) -> String {
        let (layer, index) = self.layer_of(local);
        if layer == 0 {
            Endpoint::Base(index).to_string()
        } else {
            Endpoint::Layer {
                back: layer - 1,
                index,
            }
            .to_string()
        }
    }

    fn check_template(&self) -> Result<(), SpecError> {
        let err = |msg: String| Err(SpecError::Template(msg));
        let n0 = self.base_size();
        let r = self.r();
        if self.stride == 0 {
            return err("stride must be at least 1".into());
        }
        if !(1..=3).contains(&self.formula) {
            return err(format!(
                "formula {} does not exist (use 1, 2 or 3)",
                self.formula
            ));
        }
        if self.width == 0 && !self.edges.is_empty() {
            return err("template edges need a layer of positive width".into());
        }
        let check_endpoint = |t: usize, e: Endpoint| -> Result<(), SpecError> {
            match e {
                Endpoint::Base(v) if v >= n0 => Err(SpecError::Template(format!(
                    "template edge {t}: W_0 has no vertex {v}"
                ))),
                Endpoint::Layer { index, .. } if index >= self.width => Err(SpecError::Template(
                    format!("template edge {t}: layer has no vertex {index}"),
                )),
                _ => Ok(()),
            }
        };
        for (t, edge) in self.edges.iter().enumerate() {
            check_endpoint(t, edge.tail)?;
            check_endpoint(t, edge.head)?;
            if edge.tail == edge.head {
                return err(format!("template edge {t} is a self-loop"));
            }
            if edge.max_back() > r && !edge.touches_newest() {
                return err(format!(
                    "template edge {t} reaches {} layers back, beyond r = {r}",
                    edge.max_back()
                ));
            }
            if edge.max_back() > self.prelayers.len() {
                return err(format!(
                    "template edge {t} reaches {} layers back but only {} prelayers are given",
                    edge.max_back(),
                    self.prelayers.len()
                ));
            }
        }
        for (d, row) in self.prelayers.iter().enumerate() {
            if row.len() != self.width {
                return err(format!(
                    "prelayer {d} has {} entries, width is {}",
                    row.len(),
                    self.width
                ));
            }
            if let Some(&v) = row.iter().flatten().find(|&&v| v >= n0) {
                return err(format!("prelayer {d} names vertex {v}, W_0 has {n0}"));
            }
        }
        for d in &self.deletions {
            if d.template >= self.edges.len() {
                return err(format!(
                    "deletion of template edge {}, which does not exist",
                    d.template
                ));
            }
            if d.after == 0 || d.after > r {
                return err(format!(
                    "deletion of template edge {} after {} layers: deleted edges must come from the last r = {r} layers",
                    d.template, d.after
                ));
            }
        }
        for e in &self.boundary {
            check_endpoint(usize::MAX, *e)
                .map_err(|_| SpecError::Template(format!("boundary vertex {e} does not exist")))?;
        }
        Ok(())
    }
}

/// Checks the definition of a recursively constructible family on
/// `G_n` for `n = 2r+1, 2r+2, 2r+3`, reporting the first violated
/// condition: template sanity, the neighbourhood of the newest layer, the
/// induced boundary graph, and `2|V| = |E| + 2`.
pub fn validate_family(spec: &RecursiveFamilySpec) -> Result<(), SpecError> {
    spec.check_template()?;
    let r = spec.r();
    let levels = [2 * r + 1, 2 * r + 2, 2 * r + 3];
    let members: Vec<Materialized> = levels
        .iter()
        .map(|&n| spec.materialize(n))
        .collect::<Result<_, _>>()?;
    let n0 = spec.base_size();
    let in_window = |n: usize, v: VertexId| {
        let (layer, _) = spec.layer_of(v);
        v < n0 || layer + r >= n
    };

    for (&n, m) in levels.iter().zip(&members) {
        for &(a, b) in m.graph.edges() {
            for (x, y) in [(a, b), (b, a)] {
                if spec.width > 0 && x >= n0 && spec.layer_of(x).0 == n && !in_window(n, y) {
                    return Err(SpecError::Neighborhood {
                        n,
                        vertex: x,
                        neighbor: y,
                    });
                }
            }
        }
    }

    let mut declared = spec.boundary.clone();
    declared.sort();
    declared.dedup();
    let mut expected: Vec<Endpoint> = (0..n0).map(Endpoint::Base).collect();
    for back in 0..=r {
        expected.extend((0..spec.width).map(|index| Endpoint::Layer { back, index }));
    }
    if spec.width == 0 {
        expected.retain(|e| matches!(e, Endpoint::Base(_)));
    }
    expected.sort();
    if declared != expected {
        return Err(SpecError::InducedMismatch {
            n: levels[0],
            detail: format!(
                "declared boundary has {} vertices, W_0 and the last {} layers have {}",
                declared.len(),
                r + 1,
                expected.len()
            ),
        });
    }
    let mut reference: Option<Vec<(Endpoint, Endpoint)>> = None;
    for (&n, m) in levels.iter().zip(&members) {
        let label = |v: VertexId| {
            let (layer, index) = spec.layer_of(v);
            if layer == 0 {
                Endpoint::Base(index)
            } else {
                Endpoint::Layer {
                    back: n - layer,
                    index,
                }
            }
        };
        let mut induced: Vec<(Endpoint, Endpoint)> = m
            .graph
            .edges()
            .iter()
            .filter(|&&(a, b)| in_window(n, a) && in_window(n, b))
            .map(|&(a, b)| {
                let (x, y) = (label(a), label(b));
                (x.min(y), x.max(y))
            })
            .collect();
        induced.sort();
        match &reference {
            None => reference = Some(induced),
            Some(first) if *first != induced => {
                return Err(SpecError::InducedMismatch {
                    n,
                    detail: format!(
                        "{} induced edges, G_{} has {}",
                        induced.len(),
                        levels[0],
                        first.len()
                    ),
                })
            }
            Some(_) => {}
        }
    }

    for (&n, m) in levels.iter().zip(&members) {
        let (v, e) = (m.graph.vertex_count(), m.graph.edge_count());
        if 2 * v != e + 2 {
            return Err(SpecError::EdgeCount {
                n,
                vertices: v,
                edges: e,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{decomplete, gen_circulant, gen_toroidal_grid};

    fn layer(back: usize, index: usize) -> Endpoint {
        Endpoint::Layer { back, index }
    }

    #[test]
    fn grid_members_are_decompleted_grids() {
        for m in 3..=5 {
            let spec = RecursiveFamilySpec::nonskew_grid(m);
            for k in 3..=7 {
                let g = spec.member(k).unwrap();
                let grid = decomplete(&gen_toroidal_grid(k, 0, m).unwrap(), 0).unwrap();
                // (0,y) is B<y-1>, (x,y) is vertex y of layer x; grid ids are x + y·k - 1
                let map: Vec<VertexId> = (0..g.vertex_count())
                    .map(|v| {
                        let (x, y) = match spec.layer_of(v) {
                            (0, i) => (0, i + 1),
                            (layer, y) => (layer, y),
                        };
                        x + y * k - 1
                    })
                    .collect();
                assert!(g.maps_onto(&map, &grid).unwrap(), "m={m} k={k}");
            }
        }
    }

    #[test]
    fn skew_members_are_decompleted_circulants() {
        let spec = RecursiveFamilySpec::skew_circulant_1_3();
        for layers in 4..=15 {
            let g = spec.materialize(layers).unwrap().graph;
            let c = decomplete(&gen_circulant(layers + 3, &[1, 3]).unwrap(), 0).unwrap();
            let id: Vec<VertexId> = (0..g.vertex_count()).collect();
            assert!(g.maps_onto(&id, &c).unwrap(), "n={}", layers + 3);
        }
        assert_eq!(spec.member(4).unwrap().vertex_count(), 11);
    }

    #[test]
    fn builtins_validate() {
        for spec in [
            RecursiveFamilySpec::nonskew_grid(3),
            RecursiveFamilySpec::nonskew_grid(4),
            RecursiveFamilySpec::skew_circulant_1_3(),
            RecursiveFamilySpec::constant_k4(),
        ] {
            validate_family(&spec).unwrap();
        }
    }

    #[test]
    fn text_round_trip() {
        for spec in [
            RecursiveFamilySpec::nonskew_grid(3),
            RecursiveFamilySpec::nonskew_grid(5),
            RecursiveFamilySpec::skew_circulant_1_3(),
            RecursiveFamilySpec::constant_k4(),
        ] {
            let text = spec.to_text();
            assert_eq!(RecursiveFamilySpec::parse_text(&text).unwrap(), spec);
        }
    }

    #[test]
    fn parse_errors_carry_lines() {
        let good = RecursiveFamilySpec::nonskew_grid(3).to_text();
        let bad = good.replace("edge: L0.0 L0.1", "edge: L0.0 X1");
        assert!(matches!(
            RecursiveFamilySpec::parse_text(&bad),
            Err(SpecError::Parse { line, .. }) if line > 1
        ));
        let no_format = good.replace("format: 1\n", "");
        assert!(RecursiveFamilySpec::parse_text(&no_format).is_err());
        let v2 = good.replace("format: 1", "format: 2");
        assert!(RecursiveFamilySpec::parse_text(&v2).is_err());
        let graph_ref = good.replace("vertices: 2\nedge: 0 1\n", "graph: base.graph\n");
        assert!(RecursiveFamilySpec::parse_text(&graph_ref).is_err());
    }

    #[test]
    fn each_condition_has_its_own_error() {
        let mut deep = RecursiveFamilySpec::nonskew_grid(3);
        deep.deletions[0].after = 2;
        assert!(matches!(
            validate_family(&deep),
            Err(SpecError::Template(_))
        ));

        // an edge from the newest layer two layers back, with r = 1
        let mut far = RecursiveFamilySpec::nonskew_grid(3);
        far.edges[3] = TemplateEdge::new(layer(2, 0), layer(0, 0));
        far.prelayers.push(vec![None; 3]);
        assert!(matches!(
            validate_family(&far),
            Err(SpecError::Neighborhood { .. })
        ));

        // parallel edges inside W_0 pile up
        let mut piling = RecursiveFamilySpec::nonskew_grid(3);
        piling
            .edges
            .push(TemplateEdge::new(Endpoint::Base(0), Endpoint::Base(1)));
        assert!(matches!(
            validate_family(&piling),
            Err(SpecError::InducedMismatch { .. })
        ));

        let mut short = RecursiveFamilySpec::nonskew_grid(3);
        short.boundary.pop();
        assert!(matches!(
            validate_family(&short),
            Err(SpecError::InducedMismatch { .. })
        ));

        let mut extra = RecursiveFamilySpec::nonskew_grid(3);
        extra
            .edges
            .push(TemplateEdge::new(layer(0, 0), layer(1, 1)));
        assert!(matches!(
            validate_family(&extra),
            Err(SpecError::EdgeCount { .. })
        ));
    }
}
