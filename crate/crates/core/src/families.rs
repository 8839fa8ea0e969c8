//! Generators for toroidal grids, circulants and X-ladders, plus
//! decompletion and the two grid-to-circulant labelings.
//!
//! All labels are 0-based.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, LabeledGraph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("parameter out of range: {0}")]
    Bounds(String),
    #[error("gcd({0}, {1}) = {2}, the labeling needs coprime parameters")]
    NotCoprime(usize, usize, usize),
    #[error("decompletion needs a 4-regular graph (vertex {vertex} has degree {degree})")]
    NotFourRegular { vertex: VertexId, degree: usize },
    #[error("decompletion needs a connected graph")]
    Disconnected,
    #[error("labeling failed to preserve edges")]
    LabelingMismatch,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Toroidal grid for the lattice vectors `(k,0)` and `(l,m)`.
///
/// Vertex `(a,b)`, `0 ≤ a < k`, `0 ≤ b < m`, has id `a + b·k`. Edges: first
/// all horizontal edges `(a,b)–(a+1,b)` (row by row), then all vertical
/// edges `(a,b)–(a,b+1)`. Since `(a,m) ≡ (a-l,0)`, an edge leaving the top
/// row lands `l` columns to the left.
pub fn gen_toroidal_grid(k: usize, l: usize, m: usize) -> Result<LabeledGraph, FamilyError> {
    if k < 3 || m < 3 {
        return Err(FamilyError::Bounds(format!(
            "toroidal grid needs k >= 3 and m >= 3, got k={k}, m={m}"
        )));
    }
    let id = |a: usize, b: usize| a + b * k;
    let mut edges = Vec::with_capacity(2 * k * m);
    for b in 0..m {
        for a in 0..k {
            edges.push((id(a, b), id((a + 1) % k, b)));
        }
    }
    for b in 0..m {
        for a in 0..k {
            let shift = if b == m - 1 { k - l % k } else { 0 };
            edges.push((id(a, b), id((a + shift) % k, (b + 1) % m)));
        }
    }
    Ok(LabeledGraph::new(k * m, edges)?)
}

/// Circulant `C_n(g_1, …)`: edges `{i, i+g mod n}`, deduplicated, ordered by
/// gap (in the order given) and then by `i`.
pub fn gen_circulant(n: usize, gaps: &[usize]) -> Result<LabeledGraph, FamilyError> {
    if n < 3 {
        return Err(FamilyError::Bounds(format!(
            "circulant needs n >= 3, got {n}"
        )));
    }
    let mut seen_gaps = Vec::new();
    for &g in gaps {
        if g == 0 || g >= n {
            return Err(FamilyError::Bounds(format!(
                "gap {g} must satisfy 0 < gap < {n}"
            )));
        }
        let canon = g.min(n - g);
        if seen_gaps.contains(&canon) {
            return Err(FamilyError::Bounds(format!(
                "gap {g} repeats an earlier gap"
            )));
        }
        seen_gaps.push(canon);
    }
    let mut edges = Vec::new();
    let mut present = std::collections::HashSet::new();
    for &g in gaps {
        for i in 0..n {
            let j = (i + g) % n;
            if present.insert((i.min(j), i.max(j))) {
                edges.push((i, j));
            }
        }
    }
    Ok(LabeledGraph::new(n, edges)?)
}

fn verified(
    grid: &LabeledGraph,
    circ: &LabeledGraph,
    labels: Vec<VertexId>,
) -> Result<Vec<VertexId>, FamilyError> {
    match grid.maps_onto(&labels, circ) {
        Ok(true) => Ok(labels),
        Ok(false) | Err(_) => Err(FamilyError::LabelingMismatch),
    }
}

/// The map `(a,b) ↦ (am + (m-b-1)l) mod km` from the skew grid `(k,0),(l,m)`
/// onto `C_{km}(l,m)`, as a vector indexed by grid vertex id.
pub fn iso_skew_labeling(k: usize, l: usize, m: usize) -> Result<Vec<VertexId>, FamilyError> {
    if l == 0 {
        return Err(FamilyError::Bounds("skew labeling needs l > 0".into()));
    }
    let d = gcd(m, l);
    if d != 1 {
        return Err(FamilyError::NotCoprime(m, l, d));
    }
    let grid = gen_toroidal_grid(k, l, m)?;
    let n = k * m;
    let circ = gen_circulant(n, &[l % n, m])
        .map_err(|e| FamilyError::Bounds(format!("target circulant: {e}")))?;
    let labels = (0..n)
        .map(|v| {
            let (a, b) = (v % k, v / k);
            (a * m + (m - b - 1) * l) % n
        })
        .collect();
    verified(&grid, &circ, labels)
}

/// The map `(a,b) ↦ (am + bk) mod km` from the grid `(k,0),(0,m)` onto
/// `C_{km}(k,m)`.
pub fn iso_nonskew_labeling(k: usize, m: usize) -> Result<Vec<VertexId>, FamilyError> {
    let d = gcd(k, m);
    if d != 1 {
        return Err(FamilyError::NotCoprime(k, m, d));
    }
    let grid = gen_toroidal_grid(k, 0, m)?;
    let n = k * m;
    let circ = gen_circulant(n, &[k, m])?;
    let labels = (0..n)
        .map(|v| {
            let (a, b) = (v % k, v / k);
            (a * m + b * k) % n
        })
        .collect();
    verified(&grid, &circ, labels)
}

/// Completed X-ladder whose decompletion has `size` vertices.
///
/// The ladder is a chain of `t = (size+1)/2` vertex pairs `{2i, 2i+1}`;
/// consecutive pairs are completely joined (the two sides of a square and
/// its two diagonals). Edges run pair by pair, then the end gadget:
///
/// * capped: a rung inside each end pair, `0–1` and `(2t-2)–(2t-1)`, and
///   the end pairs joined by the matching `0–(2t-2)`, `1–(2t-1)`;
/// * symmetric: the last pair completely joined back to the first, so the
///   chain closes into a cycle of pairs.
///
/// Every vertex of the result has degree 4.
pub fn gen_x_ladder(size: usize, capped: bool) -> Result<LabeledGraph, FamilyError> {
    if size < 7 || size.is_multiple_of(2) {
        return Err(FamilyError::Bounds(format!(
            "X-ladder size counts vertices after decompletion and must be odd and >= 7, got {size}"
        )));
    }
    let t = size.div_ceil(2);
    let mut edges = Vec::with_capacity(4 * t);
    for i in 0..t - 1 {
        let (u, w, u2, w2) = (2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3);
        edges.extend([(u, u2), (w, w2), (u, w2), (w, u2)]);
    }
    let (ul, wl) = (2 * t - 2, 2 * t - 1);
    if capped {
        edges.extend([(0, 1), (ul, wl), (0, ul), (1, wl)]);
    } else {
        edges.extend([(ul, 0), (wl, 1), (ul, 1), (wl, 0)]);
    }
    Ok(LabeledGraph::new(2 * t, edges)?)
}

/// Removes vertex `v` from a connected 4-regular graph.
pub fn decomplete(g: &LabeledGraph, v: VertexId) -> Result<LabeledGraph, FamilyError> {
    g.check_vertex(v)?;
    if let Some((vertex, &degree)) = g.degrees().iter().enumerate().find(|&(_, &d)| d != 4) {
        return Err(FamilyError::NotFourRegular { vertex, degree });
    }
    if !g.is_connected() {
        return Err(FamilyError::Disconnected);
    }
    let out = g.delete_vertex(v)?;
    assert_eq!(2 + out.edge_count(), 2 * out.vertex_count());
    Ok(out)
}

/// A named member of one of the generated families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    ToroidalGrid { k: usize, l: usize, m: usize },
    Circulant { n: usize, gaps: Vec<usize> },
    CappedXLadder { size: usize },
    SymmetricXLadder { size: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyId {
    pub kind: FamilyKind,
    /// `None` for the completed graph, `Some(v)` to remove vertex `v`.
    pub decompletion_vertex: Option<VertexId>,
}

impl FamilyId {
    pub fn decompleted(kind: FamilyKind) -> Self {
        Self {
            kind,
            decompletion_vertex: Some(0),
        }
    }

    pub fn build(&self) -> Result<LabeledGraph, FamilyError> {
        let full = match &self.kind {
            FamilyKind::ToroidalGrid { k, l, m } => gen_toroidal_grid(*k, *l, *m)?,
            FamilyKind::Circulant { n, gaps } => gen_circulant(*n, gaps)?,
            FamilyKind::CappedXLadder { size } => gen_x_ladder(*size, true)?,
            FamilyKind::SymmetricXLadder { size } => gen_x_ladder(*size, false)?,
        };
        match self.decompletion_vertex {
            Some(v) => decomplete(&full, v),
            None => Ok(full),
        }
    }
}

impl FamilyId {
    /// Name in the census of primitive graphs, for members the literature
    /// identifies by name.
    pub fn census_name(&self) -> Option<&'static str> {
        match (&self.kind, self.decompletion_vertex) {
            (FamilyKind::CappedXLadder { size: 7 }, Some(_)) => Some("P_{6,3}"),
            _ => None,
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::ToroidalGrid { k, l, m } => write!(f, "toroidal({k},{l},{m})"),
            FamilyKind::Circulant { n, gaps } => {
                let g: Vec<String> = gaps.iter().map(ToString::to_string).collect();
                write!(f, "C_{n}({})", g.join(","))
            }
            FamilyKind::CappedXLadder { size } => write!(f, "capped_x_ladder({size})"),
            FamilyKind::SymmetricXLadder { size } => write!(f, "symmetric_x_ladder({size})"),
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(v) = self.decompletion_vertex {
            write!(f, " minus {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// γ_k × γ_m built from two cycles, vertex (a,b) ↦ a + b·k.
    fn cycle_product(k: usize, m: usize) -> LabeledGraph {
        let mut edges = Vec::new();
        for b in 0..m {
            for a in 0..k {
                edges.push((a + b * k, (a + 1) % k + b * k));
                edges.push((a + b * k, a + ((b + 1) % m) * k));
            }
        }
        LabeledGraph::new(k * m, edges).unwrap()
    }

    #[test]
    fn grid_shape() {
        for (k, l, m) in [(3, 0, 3), (4, 1, 3), (5, 2, 4), (3, 7, 5)] {
            let g = gen_toroidal_grid(k, l, m).unwrap();
            assert_eq!(g.vertex_count(), k * m);
            assert_eq!(g.edge_count(), 2 * k * m);
            assert!(g.degrees().iter().all(|&d| d == 4));
            assert!(g.is_connected());
        }
        assert!(gen_toroidal_grid(2, 0, 3).is_err());
        assert!(gen_toroidal_grid(3, 0, 2).is_err());
    }

    #[test]
    fn nonskew_grid_is_cycle_product() {
        for (k, m) in [(3, 3), (4, 3), (5, 4)] {
            let g = gen_toroidal_grid(k, 0, m).unwrap();
            let id: Vec<usize> = (0..k * m).collect();
            assert!(g.maps_onto(&id, &cycle_product(k, m)).unwrap());
        }
    }

    #[test]
    fn circulant_examples() {
        let c6 = gen_circulant(6, &[1]).unwrap();
        assert_eq!(c6.edge_count(), 6);
        assert!(c6.degrees().iter().all(|&d| d == 2));
        let matching = gen_circulant(6, &[3]).unwrap();
        assert_eq!(matching.edges(), &[(0, 3), (1, 4), (2, 5)]);
        let c12 = gen_circulant(12, &[4, 3]).unwrap();
        assert_eq!(c12.edge_count(), 24);
        assert!(c12.degrees().iter().all(|&d| d == 4));
        assert!(gen_circulant(6, &[0]).is_err());
        assert!(gen_circulant(6, &[6]).is_err());
        assert!(gen_circulant(6, &[1, 5]).is_err());
    }

    #[test]
    fn labelings() {
        assert!(iso_skew_labeling(4, 1, 3).is_ok());
        assert!(iso_skew_labeling(3, 2, 3).is_ok());
        assert_eq!(
            iso_skew_labeling(3, 3, 3),
            Err(FamilyError::NotCoprime(3, 3, 3))
        );
        assert!(iso_nonskew_labeling(4, 3).is_ok());
        assert!(iso_nonskew_labeling(5, 3).is_ok());
        assert_eq!(
            iso_nonskew_labeling(3, 3),
            Err(FamilyError::NotCoprime(3, 3, 3))
        );
    }

    #[test]
    fn x_ladders_are_four_regular() {
        for size in [7, 9, 11, 13] {
            for capped in [true, false] {
                let g = gen_x_ladder(size, capped).unwrap();
                assert_eq!(g.vertex_count(), size + 1);
                assert!(g.degrees().iter().all(|&d| d == 4));
                assert!(g.is_connected());
                let d = decomplete(&g, 0).unwrap();
                assert_eq!(d.vertex_count(), size);
            }
        }
        assert!(gen_x_ladder(5, true).is_err());
        assert!(gen_x_ladder(8, true).is_err());
    }

    #[test]
    fn symmetric_ladder_is_circulant() {
        // closing the chain of pairs into a cycle gives C_{2t}(1, t-1) up
        // to relabeling: pair i sits at positions i and i+t
        let g = gen_x_ladder(9, false).unwrap();
        let t = 5;
        let perm: Vec<usize> = (0..2 * t).map(|v| v / 2 + (v % 2) * t).collect();
        let c = gen_circulant(2 * t, &[1, t - 1]).unwrap();
        assert!(g.maps_onto(&perm, &c).unwrap());
    }

    #[test]
    fn decompletion() {
        let g = gen_toroidal_grid(3, 0, 3).unwrap();
        let d = decomplete(&g, 4).unwrap();
        assert_eq!((d.vertex_count(), d.edge_count()), (8, 14));
        let k5 = gen_circulant(5, &[1, 2]).unwrap();
        let k4 = decomplete(&k5, 0).unwrap();
        assert_eq!(k4.edge_count(), 6);
        let path = LabeledGraph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        assert!(matches!(
            decomplete(&path, 0),
            Err(FamilyError::NotFourRegular { .. })
        ));
    }
}
