use std::collections::BTreeMap;

use crate::fp::PrimeField;
use crate::graph::{EdgeId, LabeledGraph, UnionFind, VertexId, VertexSubsetPartition};

use super::{sum_complement_products, DodgsonMatrix, DodgsonSpec, PolyError};

/// What happens to an edge in one factor's spanning structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeFate {
    /// The edge is outside the forest: its variable divides the monomial.
    Cut,
    /// The edge belongs to the forest.
    InForest,
}

/// An F_p-linear combination of spanning forest polynomials `Φ^P` over a
/// common host graph.
///
/// The host is a base graph with some edges and vertices switched off.
/// Edge and vertex ids always refer to the base graph, so they stay stable
/// while edges are assigned one by one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestPolyExpr {
    base: LabeledGraph,
    edge_present: Vec<bool>,
    vertex_present: Vec<bool>,
    field: PrimeField,
    terms: BTreeMap<VertexSubsetPartition, u64>,
}

impl ForestPolyExpr {
    /// The zero expression with the full base graph as host.
    pub fn zero(base: LabeledGraph, field: PrimeField) -> Self {
        Self {
            edge_present: vec![true; base.edge_count()],
            vertex_present: vec![true; base.vertex_count()],
            base,
            field,
            terms: BTreeMap::new(),
        }
    }

    /// A single polynomial `Φ^P` on the full base graph.
    pub fn single(
        base: LabeledGraph,
        partition: VertexSubsetPartition,
        field: PrimeField,
    ) -> Result<Self, PolyError> {
        partition.check_within(base.vertex_count())?;
        let mut e = Self::zero(base, field);
        e.add_term(partition, 1);
        Ok(e)
    }

    /// `Ψ` of the base graph, written as `Φ^{{v}}`.
    pub fn kirchhoff(
        base: LabeledGraph,
        field: PrimeField,
        v: VertexId,
    ) -> Result<Self, PolyError> {
        Self::single(base, VertexSubsetPartition::singleton(v), field)
    }

    /// Removes edges from the host without touching any term.
    pub fn remove_edges(&mut self, edges: &[EdgeId]) -> Result<(), PolyError> {
        for &e in edges {
            if !self.edge_is_present(e) {
                return Err(PolyError::EdgeNotPresent(e));
            }
            self.edge_present[e] = false;
        }
        Ok(())
    }

    pub fn add_term(&mut self, partition: VertexSubsetPartition, coeff: u64) {
        let f = self.field;
        let c = f.reduce(coeff);
        if c == 0 {
            return;
        }
        let sum = f.add(self.terms.get(&partition).copied().unwrap_or(0), c);
        if sum == 0 {
            self.terms.remove(&partition);
        } else {
            self.terms.insert(partition, sum);
        }
    }

    pub fn base(&self) -> &LabeledGraph {
        &self.base
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn terms(&self) -> &BTreeMap<VertexSubsetPartition, u64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn edge_is_present(&self, e: EdgeId) -> bool {
        e < self.edge_present.len() && self.edge_present[e]
    }

    pub fn present_edges(&self) -> Vec<EdgeId> {
        (0..self.edge_present.len())
            .filter(|&e| self.edge_present[e])
            .collect()
    }

    pub fn present_vertices(&self) -> Vec<VertexId> {
        (0..self.vertex_present.len())
            .filter(|&v| self.vertex_present[v])
            .collect()
    }

    /// The host as a standalone graph, with base-edge → host-edge and
    /// base-vertex → host-vertex maps.
    pub fn host(&self) -> (LabeledGraph, Vec<Option<EdgeId>>, Vec<Option<VertexId>>) {
        let mut vmap = vec![None; self.base.vertex_count()];
        let mut n = 0;
        for v in 0..self.base.vertex_count() {
            if self.vertex_present[v] {
                vmap[v] = Some(n);
                n += 1;
            }
        }
        let mut emap = vec![None; self.base.edge_count()];
        let mut edges = Vec::new();
        for (e, &(t, h)) in self.base.edges().iter().enumerate() {
            if self.edge_present[e] {
                emap[e] = Some(edges.len());
                edges.push((vmap[t].unwrap(), vmap[h].unwrap()));
            }
        }
        let g = LabeledGraph::new(n, edges).expect("host inherits a valid base graph");
        (g, emap, vmap)
    }

    /// Evaluates at a point indexed by base edge ids; entries for absent
    /// edges are ignored.
    pub fn eval(&self, point: &[u64]) -> Result<u64, PolyError> {
        if point.len() != self.base.edge_count() {
            return Err(PolyError::PointSize {
                got: point.len(),
                expected: self.base.edge_count(),
            });
        }
        let (host, emap, vmap) = self.host();
        let mut host_point = vec![0; host.edge_count()];
        for (e, slot) in emap.iter().enumerate() {
            if let Some(he) = slot {
                host_point[*he] = point[e];
            }
        }
        let f = self.field;
        let mut total = 0;
        for (partition, &coeff) in &self.terms {
            let blocks: Vec<Vec<VertexId>> = partition
                .blocks()
                .iter()
                .map(|b| {
                    b.iter()
                        .map(|&v| vmap[v].expect("term mentions a removed vertex"))
                        .collect()
                })
                .collect();
            let p = VertexSubsetPartition::new(blocks)?;
            let value = eval_forest_poly(&host, &p, &host_point, f)?;
            total = f.add(total, f.mul(coeff, value));
        }
        Ok(total)
    }

    fn present_degree(&self, v: VertexId) -> usize {
        self.base
            .edges()
            .iter()
            .enumerate()
            .filter(|&(e, &(t, h))| self.edge_present[e] && (t == v || h == v))
            .count()
    }

    /// Assigns edge `e` in every term and rewrites the result as forest
    /// polynomials on the host without `e`.
    ///
    /// `Cut` keeps the partitions. `InForest` replaces `Φ^P_{G/e}` by forests
    /// of `G∖e` that keep the endpoints in separate trees which the edge
    /// would join. Afterwards an endpoint left without edges is dropped
    /// together with its part if that part is exactly `{v}`; otherwise the
    /// term vanishes.
    pub fn assign_edge(&self, e: EdgeId, fate: EdgeFate) -> Result<ForestPolyExpr, PolyError> {
        if !self.edge_is_present(e) {
            return Err(PolyError::EdgeNotPresent(e));
        }
        let (u, v) = self.base.edge(e);
        let mut out = ForestPolyExpr {
            base: self.base.clone(),
            edge_present: self.edge_present.clone(),
            vertex_present: self.vertex_present.clone(),
            field: self.field,
            terms: BTreeMap::new(),
        };
        out.edge_present[e] = false;
        let isolated: Vec<VertexId> = [u, v]
            .into_iter()
            .filter(|&x| out.present_degree(x) == 0)
            .collect();
        for x in &isolated {
            out.vertex_present[*x] = false;
        }
        for (partition, &coeff) in &self.terms {
            let blocks = partition.blocks().to_vec();
            let rewritten = match fate {
                EdgeFate::Cut => vec![blocks],
                EdgeFate::InForest => split_for_contraction(&blocks, u, v),
            };
            for mut bl in rewritten {
                if drop_isolated(&mut bl, &isolated) {
                    out.add_term(VertexSubsetPartition::new(bl)?, coeff);
                }
            }
        }
        Ok(out)
    }
}

/// Removes isolated vertices that form singleton blocks. Returns false when
/// some isolated vertex is unmarked or shares its block.
fn drop_isolated(blocks: &mut Vec<Vec<VertexId>>, isolated: &[VertexId]) -> bool {
    for &x in isolated {
        match blocks.iter().position(|b| b.contains(&x)) {
            Some(i) if blocks[i].len() == 1 => {
                blocks.remove(i);
            }
            _ => return false,
        }
    }
    true
}

/// All ways to write `Φ^P_{G/e}`, `e = uv`, as forest polynomials on `G∖e`.
fn split_for_contraction(
    blocks: &[Vec<VertexId>],
    u: VertexId,
    v: VertexId,
) -> Vec<Vec<Vec<VertexId>>> {
    let bu = blocks.iter().position(|b| b.contains(&u));
    let bv = blocks.iter().position(|b| b.contains(&v));
    let mut out = Vec::new();
    match (bu, bv) {
        (Some(a), Some(b)) if a != b => {}
        (Some(a), Some(_)) => split_block(blocks, a, &[], u, v, &mut out),
        (Some(a), None) => split_block(blocks, a, &[v], u, v, &mut out),
        (None, Some(b)) => split_block(blocks, b, &[u], u, v, &mut out),
        (None, None) => {
            for i in 0..blocks.len() {
                split_block(blocks, i, &[u, v], u, v, &mut out);
            }
        }
    }
    out
}

/// Replaces block `idx` (plus `extra`) by every pair `{u}∪S, {v}∪T` with
/// `S ⊔ T` the remaining members.
fn split_block(
    blocks: &[Vec<VertexId>],
    idx: usize,
    extra: &[VertexId],
    u: VertexId,
    v: VertexId,
    out: &mut Vec<Vec<Vec<VertexId>>>,
) {
    let rest: Vec<VertexId> = blocks[idx]
        .iter()
        .chain(extra)
        .copied()
        .filter(|&x| x != u && x != v)
        .collect();
    for mask in 0u64..(1 << rest.len()) {
        let mut side_u = vec![u];
        let mut side_v = vec![v];
        for (bit, &x) in rest.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                side_v.push(x);
            } else {
                side_u.push(x);
            }
        }
        let mut bl: Vec<Vec<VertexId>> = blocks
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != idx)
            .map(|(_, b)| b.clone())
            .collect();
        bl.push(side_u);
        bl.push(side_v);
        out.push(bl);
    }
}

/// `Φ^P_G` at a point, by forest enumeration.
pub fn eval_forest_poly(
    g: &LabeledGraph,
    partition: &VertexSubsetPartition,
    point: &[u64],
    field: PrimeField,
) -> Result<u64, PolyError> {
    if point.len() != g.edge_count() {
        return Err(PolyError::PointSize {
            got: point.len(),
            expected: g.edge_count(),
        });
    }
    let forests = g.spanning_forests(partition)?;
    Ok(sum_complement_products(forests, point, field))
}

/// Every set partition of `items`, blocks listed in order of first element.
pub fn set_partitions(items: &[VertexId]) -> Vec<Vec<Vec<VertexId>>> {
    let n = items.len();
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    // restricted growth strings: rgs[0] = 0, rgs[i] <= 1 + max(rgs[..i])
    let mut rgs = vec![0usize; n];
    loop {
        let blocks_count = rgs.iter().max().unwrap() + 1;
        let mut blocks = vec![Vec::new(); blocks_count];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(items[i]);
        }
        out.push(blocks);
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            let max_before = rgs[..i].iter().copied().max().unwrap();
            if rgs[i] <= max_before {
                rgs[i] += 1;
                for r in &mut rgs[i + 1..] {
                    *r = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Whether `edges` (given by endpoints' block indices) form a spanning tree
/// of the multigraph on `block_count` vertices.
fn is_quotient_tree(block_count: usize, edges: &[(usize, usize)]) -> bool {
    if edges.len() + 1 != block_count {
        return false;
    }
    let mut uf = UnionFind::new(block_count);
    edges.iter().all(|&(a, b)| uf.union(a, b))
}

/// The host `G∖(I∪J∪K)` (as an empty expression) and the set partitions
/// `P` with `Φ^P` appearing in the forest expansion of `Ψ^{I,J}_K`.
///
/// With `I' = I∖J`, `J' = J∖I`, the sum runs over set partitions of the
/// endpoints of `(I∪J∪K)∖(I∩J)` for which both `J'∪K` and `I'∪K` form
/// spanning trees on the graph whose vertices are the blocks. A forest for
/// such a partition completes to a spanning tree of `G∖I/(J∪K)` and of
/// `G∖J/(I∪K)` at the same time, which is exactly what the minor
/// `M(I,J)` counts up to sign. Partitions whose polynomial is identically
/// zero because a host-isolated vertex shares a block are skipped.
fn forest_expansion(
    g: &LabeledGraph,
    spec: &DodgsonSpec,
    field: PrimeField,
) -> Result<(ForestPolyExpr, Vec<VertexSubsetPartition>), PolyError> {
    spec.validate(g)?;
    let i_only: Vec<EdgeId> = spec
        .i
        .iter()
        .copied()
        .filter(|e| !spec.j.contains(e))
        .collect();
    let j_only: Vec<EdgeId> = spec
        .j
        .iter()
        .copied()
        .filter(|e| !spec.i.contains(e))
        .collect();
    let mut marked: Vec<VertexId> = i_only
        .iter()
        .chain(&j_only)
        .chain(&spec.k)
        .flat_map(|&e| {
            let (t, h) = g.edge(e);
            [t, h]
        })
        .collect();
    marked.sort_unstable();
    marked.dedup();

    let mut expr = ForestPolyExpr::zero(g.clone(), field);
    let removed: Vec<EdgeId> = (0..g.edge_count())
        .filter(|&e| spec.i.contains(&e) || spec.j.contains(&e) || spec.k.contains(&e))
        .collect();
    expr.remove_edges(&removed)?;

    if marked.is_empty() {
        // only I∩J was removed: the minor is the Kirchhoff polynomial of the rest
        let parts = if g.vertex_count() > 0 {
            vec![VertexSubsetPartition::singleton(0)]
        } else {
            Vec::new()
        };
        return Ok((expr, parts));
    }
    let mut isolated = vec![true; g.vertex_count()];
    for (e, &(t, h)) in g.edges().iter().enumerate() {
        if !removed.contains(&e) {
            isolated[t] = false;
            isolated[h] = false;
        }
    }

    let mut parts = Vec::new();
    let mut block_of = vec![usize::MAX; g.vertex_count()];
    for blocks in set_partitions(&marked) {
        // an isolated vertex sharing a block admits no forest
        if blocks
            .iter()
            .any(|b| b.len() > 1 && b.iter().any(|&x| isolated[x]))
        {
            continue;
        }
        for (bi, b) in blocks.iter().enumerate() {
            for &x in b {
                block_of[x] = bi;
            }
        }
        let quotient = |set: &mut dyn Iterator<Item = &EdgeId>| -> Vec<(usize, usize)> {
            set.map(|&e| {
                let (t, h) = g.edge(e);
                (block_of[t], block_of[h])
            })
            .collect()
        };
        let with_j = quotient(&mut j_only.iter().chain(&spec.k));
        let with_i = quotient(&mut i_only.iter().chain(&spec.k));
        if is_quotient_tree(blocks.len(), &with_j) && is_quotient_tree(blocks.len(), &with_i) {
            parts.push(VertexSubsetPartition::new(blocks)?);
        }
    }
    Ok((expr, parts))
}

/// Rewrites `Ψ^{I,J}_K` as a sum of forest polynomials on `G∖(I∪J∪K)`,
/// valid modulo 2.
pub fn dodgson_to_forest_mod2(
    g: &LabeledGraph,
    spec: &DodgsonSpec,
    field: PrimeField,
) -> Result<ForestPolyExpr, PolyError> {
    if field.modulus() != 2 {
        return Err(PolyError::UnsupportedCharacteristic(field.modulus()));
    }
    let (mut expr, parts) = forest_expansion(g, spec, field)?;
    for p in parts {
        expr.add_term(p, 1);
    }
    Ok(expr)
}

/// Rewrites `Ψ^{I,J}_K` (the minor of [`DodgsonMatrix::new`]) as a signed
/// sum of forest polynomials on `G∖(I∪J∪K)` over any F_p.
///
/// The polynomial is homogeneous, so setting the variables of one forest
/// `F` to 0 and all others to 1 leaves exactly the coefficient of the
/// monomial of `F`, which is the sign of its partition's term.
pub fn dodgson_to_forest(
    g: &LabeledGraph,
    spec: &DodgsonSpec,
    field: PrimeField,
) -> Result<ForestPolyExpr, PolyError> {
    let (mut expr, parts) = forest_expansion(g, spec, field)?;
    if parts.is_empty() {
        return Ok(expr);
    }
    let matrix = DodgsonMatrix::new(g, spec, field)?;
    let (host, emap, vmap) = expr.host();
    let mut to_base = vec![0; host.edge_count()];
    for (e, slot) in emap.iter().enumerate() {
        if let Some(he) = slot {
            to_base[*he] = e;
        }
    }
    let mut scratch = Vec::new();
    for p in parts {
        let local = VertexSubsetPartition::new(
            p.blocks()
                .iter()
                .map(|b| {
                    b.iter()
                        .map(|&v| vmap[v].expect("host keeps every vertex"))
                        .collect()
                })
                .collect(),
        )?;
        let Some(forest) = host.spanning_forests(&local)?.next() else {
            continue;
        };
        let mut point = vec![1u64; g.edge_count()];
        for he in forest {
            point[to_base[he]] = 0;
        }
        let sign = matrix.eval_with(&point, &mut scratch);
        if sign != 1 && sign != field.neg(1) {
            return Err(PolyError::ForestSign {
                partition: p.to_string(),
                value: sign,
            });
        }
        expr.add_term(p, sign);
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polys::eval_dodgson;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn part(blocks: &[&[usize]]) -> VertexSubsetPartition {
        VertexSubsetPartition::new(blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    fn all_points(n: usize, p: u64) -> impl Iterator<Item = Vec<u64>> {
        (0..p.pow(n as u32)).map(move |mut idx| {
            (0..n)
                .map(|_| {
                    let d = idx % p;
                    idx /= p;
                    d
                })
                .collect()
        })
    }

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (0..7)
            .map(|n| set_partitions(&(0..n).collect::<Vec<_>>()).len())
            .collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn triangle_two_block_forests() {
        // vertices a=0, b=1, c=2; edges ab, bc, ca
        let g = LabeledGraph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let p = part(&[&[0], &[1]]);
        let k = f(2);
        assert_eq!(eval_forest_poly(&g, &p, &[1, 1, 1], k).unwrap(), 0);
        // Φ = α_ab α_ca + α_ab α_bc
        let k5 = f(5);
        for pt in all_points(3, 5) {
            let expect = k5.add(k5.mul(pt[0], pt[2]), k5.mul(pt[0], pt[1]));
            assert_eq!(eval_forest_poly(&g, &p, &pt, k5).unwrap(), expect);
        }
        let all = part(&[&[0, 1, 2]]);
        let psi = crate::polys::eval_kirchhoff(&g, &[2, 3, 4], k5).unwrap();
        assert_eq!(eval_forest_poly(&g, &all, &[2, 3, 4], k5).unwrap(), psi);
        let bad = part(&[&[0], &[1], &[2], &[3]]);
        assert!(eval_forest_poly(&g, &bad, &[1, 1, 1], k5).is_err());
    }

    #[test]
    fn impossible_partition_is_zero() {
        let g = LabeledGraph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let p = part(&[&[0, 2], &[1]]);
        assert_eq!(eval_forest_poly(&g, &p, &[1, 1], f(3)).unwrap(), 0);
    }

    #[test]
    fn decomposition_needs_p2() {
        let g = LabeledGraph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(
            dodgson_to_forest_mod2(&g, &DodgsonSpec::kirchhoff(), f(3)),
            Err(PolyError::UnsupportedCharacteristic(3))
        );
    }

    /// Decompleted γ₃×γ₃ labelled so that b=(1,0) and e=(2,0) are the two
    /// degree-3 neighbours of the removed vertex (0,0) joined by an edge.
    /// Returns the graph and edge ids 1..5 of the worked example plus the
    /// vertex ids a, b, c, d, e, f.
    fn three_grid_example() -> (LabeledGraph, [usize; 5], [usize; 6]) {
        let full = crate::families::gen_toroidal_grid(3, 0, 3).unwrap();
        let g = full.delete_vertex(0).unwrap();
        // after deleting vertex 0, grid vertex (a,b) -> a + 3b - 1
        let id = |a: usize, b: usize| a + 3 * b - 1;
        let (vb, ve) = (id(1, 0), id(2, 0));
        let (va, vc) = (id(1, 1), id(1, 2));
        let (vd, vf) = (id(2, 1), id(2, 2));
        let find = |x: usize, y: usize| {
            g.edges()
                .iter()
                .position(|&(t, h)| (t, h) == (x, y) || (t, h) == (y, x))
                .unwrap()
        };
        let e1 = find(vb, va);
        let e2 = find(vb, vc);
        let e3 = find(vb, ve);
        let e4 = find(ve, vd);
        let e5 = find(ve, vf);
        (g, [e1, e2, e3, e4, e5], [va, vb, vc, vd, ve, vf])
    }

    #[test]
    fn three_grid_decompositions() {
        let (g, [e1, e2, e3, e4, e5], [a, b, c, d, e, ff]) = three_grid_example();
        assert_eq!(g.degree(b), 3);
        assert_eq!(g.degree(e), 3);
        let k = f(2);
        let expr = dodgson_to_forest_mod2(
            &g,
            &DodgsonSpec::new(vec![e1, e2], vec![e4, e5], vec![e3]),
            k,
        )
        .unwrap();
        let got: Vec<_> = expr.terms().keys().cloned().collect();
        let mut want = vec![
            part(&[&[a, d], &[c, ff], &[b], &[e]]),
            part(&[&[a, ff], &[c, d], &[b], &[e]]),
        ];
        want.sort();
        assert_eq!(got, want);

        let expr = dodgson_to_forest_mod2(
            &g,
            &DodgsonSpec::new(vec![e1, e3, e4], vec![e2, e3, e5], vec![]),
            k,
        )
        .unwrap();
        let got: Vec<_> = expr.terms().keys().cloned().collect();
        assert_eq!(got, vec![part(&[&[a, c, d, ff], &[b], &[e]])]);

        // Ψ^{123,345} vanishes: its admissible partitions put b or e, which
        // are isolated once the five edges are gone, into larger blocks.
        let expr = dodgson_to_forest_mod2(
            &g,
            &DodgsonSpec::new(vec![e1, e2, e3], vec![e3, e4, e5], vec![]),
            k,
        )
        .unwrap();
        for pt in all_points(g.edge_count(), 2) {
            assert_eq!(expr.eval(&pt).unwrap(), 0);
        }
    }

    fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> LabeledGraph {
        let mut edges = Vec::new();
        for v in 1..n {
            edges.push((rng.gen_range(0..v), v));
        }
        for _ in 0..extra {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            edges.push((a, b));
        }
        for i in (1..edges.len()).rev() {
            edges.swap(i, rng.gen_range(0..=i));
        }
        LabeledGraph::new(n, edges).unwrap()
    }

    fn random_spec(rng: &mut ChaCha8Rng, m: usize) -> DodgsonSpec {
        let mut ids: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            ids.swap(i, rng.gen_range(0..=i));
        }
        let size = rng.gen_range(0..=2.min(m / 2));
        let shared = rng.gen_range(0..=1.min(m.saturating_sub(2 * size)));
        let kn = rng.gen_range(0..=2.min(m - 2 * size - shared));
        let mut it = ids.into_iter();
        let common: Vec<usize> = it.by_ref().take(shared).collect();
        let mut i: Vec<usize> = it.by_ref().take(size).collect();
        let mut j: Vec<usize> = it.by_ref().take(size).collect();
        let k: Vec<usize> = it.by_ref().take(kn).collect();
        i.extend(&common);
        j.extend(&common);
        DodgsonSpec::new(i, j, k)
    }

    #[test]
    fn decomposition_matches_determinant_mod2() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = f(2);
        for _ in 0..60 {
            let n = rng.gen_range(3..=6);
            let extra = rng.gen_range(1..=5);
            let g = random_connected(&mut rng, n, extra);
            let spec = random_spec(&mut rng, g.edge_count());
            let expr = dodgson_to_forest_mod2(&g, &spec, k).unwrap();
            for pt in all_points(g.edge_count(), 2) {
                assert_eq!(
                    expr.eval(&pt).unwrap(),
                    eval_dodgson(&g, &spec, &pt, k).unwrap(),
                    "{g:?} {spec:?} {pt:?}"
                );
            }
        }
    }

    #[test]
    fn signed_decomposition_matches_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for p in [3u64, 5] {
            let k = f(p);
            for _ in 0..25 {
                let n = rng.gen_range(3..=5);
                let extra = rng.gen_range(1..=3);
                let g = random_connected(&mut rng, n, extra);
                if g.edge_count() > 8 {
                    continue;
                }
                let spec = random_spec(&mut rng, g.edge_count());
                let expr = dodgson_to_forest(&g, &spec, k).unwrap();
                for pt in all_points(g.edge_count(), p) {
                    assert_eq!(
                        expr.eval(&pt).unwrap(),
                        eval_dodgson(&g, &spec, &pt, k).unwrap(),
                        "{g:?} {spec:?} {pt:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn cut_bridge_to_singleton_keeps_polynomial() {
        // path 0-1-2 with pendant 3 hanging off 2; cut 2-3 with {3} a block
        let g = LabeledGraph::new(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let k = f(3);
        let expr = ForestPolyExpr::single(g, part(&[&[0], &[3]]), k).unwrap();
        let cut = expr.assign_edge(2, EdgeFate::Cut).unwrap();
        assert_eq!(
            cut.terms().keys().cloned().collect::<Vec<_>>(),
            vec![part(&[&[0]])]
        );
        assert_eq!(cut.present_vertices(), vec![0, 1, 2]);
    }

    #[test]
    fn contract_between_blocks_is_zero() {
        let g = LabeledGraph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let expr = ForestPolyExpr::single(g, part(&[&[0], &[1]]), f(2)).unwrap();
        assert!(expr.assign_edge(0, EdgeFate::InForest).unwrap().is_zero());
        assert!(expr.assign_edge(5, EdgeFate::Cut).is_err());
    }

    #[test]
    fn assign_edge_pointwise() {
        // Φ_G = α_e Φ_{G∖e} + Φ_{G/e}: at α_e = 0 only the forest side
        // survives, and the α_e-slope is the cut side.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in [2u64, 3] {
            let k = f(p);
            for _ in 0..40 {
                let n = rng.gen_range(3..=5);
                let extra = rng.gen_range(0..=3);
                let g = random_connected(&mut rng, n, extra);
                let m = g.edge_count();
                let nb = rng.gen_range(1..=3.min(n));
                let mut vs: Vec<usize> = (0..n).collect();
                for i in (1..n).rev() {
                    vs.swap(i, rng.gen_range(0..=i));
                }
                let mut blocks = vec![Vec::new(); nb];
                for &v in vs.iter().take(rng.gen_range(nb..=n)) {
                    blocks[rng.gen_range(0..nb)].push(v);
                }
                blocks.retain(|b| !b.is_empty());
                let expr = ForestPolyExpr::single(
                    g.clone(),
                    VertexSubsetPartition::new(blocks).unwrap(),
                    k,
                )
                .unwrap();
                let e = rng.gen_range(0..m);
                let cut = expr.assign_edge(e, EdgeFate::Cut).unwrap();
                let tree = expr.assign_edge(e, EdgeFate::InForest).unwrap();
                for mut pt in all_points(m, p) {
                    pt[e] = 0;
                    let at0 = expr.eval(&pt).unwrap();
                    assert_eq!(at0, tree.eval(&pt).unwrap(), "{g:?} {e}");
                    pt[e] = 1;
                    let at1 = expr.eval(&pt).unwrap();
                    assert_eq!(k.sub(at1, at0), cut.eval(&pt).unwrap(), "{g:?} {e}");
                }
            }
        }
    }

    #[test]
    fn full_assignment_gives_coefficient() {
        // Assign every edge: the constant left over is the coefficient of
        // the chosen monomial Π_{cut} α_e, read off by direct expansion.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let k = f(5);
        for _ in 0..30 {
            let n = rng.gen_range(3..=5);
            let extra = rng.gen_range(0..=3);
            let g = random_connected(&mut rng, n, extra);
            let m = g.edge_count();
            let expr = ForestPolyExpr::kirchhoff(g.clone(), k, 0).unwrap();
            let fates: Vec<EdgeFate> = (0..m)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        EdgeFate::Cut
                    } else {
                        EdgeFate::InForest
                    }
                })
                .collect();
            let mut cur = expr;
            for (e, &fate) in fates.iter().enumerate() {
                cur = cur.assign_edge(e, fate).unwrap();
            }
            let got = if cur.is_zero() {
                0
            } else {
                assert!(cur.present_vertices().is_empty());
                *cur.terms().get(&part(&[])).unwrap()
            };
            let tree: Vec<usize> = (0..m).filter(|&e| fates[e] == EdgeFate::InForest).collect();
            let want = g.spanning_trees().filter(|t| *t == tree).count() as u64;
            assert_eq!(got, want, "{g:?} {fates:?}");
        }
    }
}
