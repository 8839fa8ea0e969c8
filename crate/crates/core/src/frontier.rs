//! Edge-by-edge assignment over tuples of spanning forest partitions.
//!
//! A state is a tuple of `k` vertex partitions, one per factor, standing for
//! the product `Φ^{P_1}·…·Φ^{P_k}` on the graph of still unassigned edges.
//! Assigning an edge picks which `m` factors cut it (the rest keep it in
//! their forest) and rewrites each factor with the deletion/contraction
//! rule. After every edge has been assigned, the coefficient of the empty
//! state is the coefficient of `Π α_e^m` in the original product.
//!
//! Individual partitions are interned, and their per-edge rewrites are
//! computed once per distinct partition, so the cost of a step is
//! dominated by recombining tuples of small integers.

use std::collections::hash_map::Entry;
use std::hash::Hash;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::fp::PrimeField;

/// Partition of a vertex subset, canonical: sorted by vertex, block labels
/// numbered by first appearance. Each entry is `vertex << 8 | block`.
pub(crate) type PartKey = Box<[u32]>;

/// Interned partition ids, one per factor.
pub(crate) type StateKey = SmallVec<[u32; 4]>;

const BLOCK_BITS: u32 = 8;
const BLOCK_MASK: u32 = (1 << BLOCK_BITS) - 1;

pub(crate) fn encode_blocks(blocks: &[Vec<u32>]) -> PartKey {
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for (b, block) in blocks.iter().enumerate() {
        for &v in block {
            pairs.push((v, b as u32));
        }
    }
    canonical(pairs)
}

/// Sorts `(vertex, block)` pairs and renumbers blocks by first appearance.
fn canonical(mut pairs: Vec<(u32, u32)>) -> PartKey {
    pairs.sort_unstable();
    let mut relabel: SmallVec<[(u32, u32); 16]> = SmallVec::new();
    pairs
        .into_iter()
        .map(|(v, b)| {
            let nb = match relabel.iter().find(|&&(old, _)| old == b) {
                Some(&(_, new)) => new,
                None => {
                    let new = relabel.len() as u32;
                    relabel.push((b, new));
                    new
                }
            };
            assert!(nb <= BLOCK_MASK, "too many blocks in one partition");
            v << BLOCK_BITS | nb
        })
        .collect()
}

pub(crate) fn decode_blocks(key: &[u32]) -> Vec<Vec<u32>> {
    let mut blocks: Vec<Vec<u32>> = Vec::new();
    for &x in key {
        let (v, b) = ((x >> BLOCK_BITS), (x & BLOCK_MASK) as usize);
        if b == blocks.len() {
            blocks.push(Vec::new());
        }
        blocks[b].push(v);
    }
    blocks
}

fn unpack(key: &[u32]) -> Vec<(u32, u32)> {
    key.iter()
        .map(|&x| (x >> BLOCK_BITS, x & BLOCK_MASK))
        .collect()
}

fn block_of(pairs: &[(u32, u32)], v: u32) -> Option<u32> {
    pairs.iter().find(|&&(x, _)| x == v).map(|&(_, b)| b)
}

/// Drops isolated vertices sitting alone in their block; `None` if some
/// isolated vertex is unmarked or shares its block.
fn cleanup(mut pairs: Vec<(u32, u32)>, isolated: &[u32]) -> Option<Vec<(u32, u32)>> {
    for &x in isolated {
        let b = block_of(&pairs, x)?;
        if pairs.iter().filter(|&&(_, c)| c == b).count() != 1 {
            return None;
        }
        pairs.retain(|&(y, _)| y != x);
    }
    Some(pairs)
}

/// Rewrites `Φ^P_{G/e}` for `e = uv` as partitions on `G∖e`.
fn contract(pairs: &[(u32, u32)], u: u32, v: u32, out: &mut Vec<Vec<(u32, u32)>>) {
    let bu = block_of(pairs, u);
    let bv = block_of(pairs, v);
    let fresh = pairs.iter().map(|&(_, b)| b + 1).max().unwrap_or(0);
    let mut split = |target: u32, extra: &[u32]| {
        let rest: SmallVec<[u32; 16]> = pairs
            .iter()
            .filter(|&&(x, b)| b == target && x != u && x != v)
            .map(|&(x, _)| x)
            .chain(extra.iter().copied().filter(|&x| x != u && x != v))
            .collect();
        let base: Vec<(u32, u32)> = pairs
            .iter()
            .copied()
            .filter(|&(x, b)| b != target && x != u && x != v)
            .collect();
        // u keeps label `target`, v gets label `fresh`
        for mask in 0u64..(1u64 << rest.len()) {
            let mut p = base.clone();
            p.push((u, target));
            p.push((v, fresh));
            for (bit, &x) in rest.iter().enumerate() {
                p.push((x, if mask >> bit & 1 == 1 { fresh } else { target }));
            }
            out.push(p);
        }
    };
    match (bu, bv) {
        (Some(a), Some(b)) if a != b => {}
        (Some(a), _) => split(a, &[]),
        (None, Some(b)) => split(b, &[]),
        (None, None) => {
            let mut labels: SmallVec<[u32; 16]> = pairs.iter().map(|&(_, b)| b).collect();
            labels.sort_unstable();
            labels.dedup();
            for b in labels {
                split(b, &[]);
            }
        }
    }
}

#[derive(Debug, Default, Clone)]
pub(crate) struct Interner {
    keys: Vec<PartKey>,
    ids: FxHashMap<PartKey, u32>,
}

impl Interner {
    pub(crate) fn intern(&mut self, key: PartKey) -> u32 {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.keys.len() as u32;
        self.keys.push(key.clone());
        self.ids.insert(key, id);
        id
    }

    pub(crate) fn get(&self, id: u32) -> &[u32] {
        &self.keys[id as usize]
    }

    pub(crate) fn len(&self) -> usize {
        self.keys.len()
    }
}

/// A formal F_p-combination of partition tuples.
#[derive(Debug, Clone)]
pub(crate) struct StateSum {
    field: PrimeField,
    factors: usize,
    pub(crate) parts: Interner,
    pub(crate) states: FxHashMap<StateKey, u64>,
}

impl StateSum {
    pub(crate) fn new(field: PrimeField, factors: usize) -> Self {
        Self {
            field,
            factors,
            parts: Interner::default(),
            states: FxHashMap::default(),
        }
    }

    /// Adds `coeff · Π Φ^{P_i}` with the partitions given as block lists.
    pub(crate) fn add(&mut self, tuple: &[PartKey], coeff: u64) {
        assert_eq!(tuple.len(), self.factors);
        let key: StateKey = tuple.iter().map(|p| self.parts.intern(p.clone())).collect();
        add_coeff(&mut self.states, key, coeff, self.field);
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.states.is_empty()
    }

    pub(crate) fn len(&self) -> usize {
        self.states.len()
    }

    /// Coefficient of the tuple of empty partitions.
    pub(crate) fn constant(&self) -> u64 {
        self.states
            .iter()
            .find(|(k, _)| k.iter().all(|&id| self.parts.get(id).is_empty()))
            .map_or(0, |(_, &c)| c)
    }

    /// States as explicit partition tuples, sorted.
    pub(crate) fn entries(&self) -> Vec<(Vec<PartKey>, u64)> {
        let mut out: Vec<(Vec<PartKey>, u64)> = self
            .states
            .iter()
            .map(|(k, &c)| {
                let t = k
                    .iter()
                    .map(|&id| PartKey::from(self.parts.get(id)))
                    .collect();
                (t, c)
            })
            .collect();
        out.sort();
        out
    }

    /// Every vertex mentioned by some state.
    pub(crate) fn mentioned_vertices(&self) -> Vec<u32> {
        let mut vs: Vec<u32> = Vec::new();
        for k in self.states.keys() {
            for &id in k {
                vs.extend(self.parts.get(id).iter().map(|&x| x >> BLOCK_BITS));
            }
        }
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Applies a per-partition rewrite to every factor independently.
    /// Only parts referenced by a live state are rewritten.
    fn map_parts<F>(&self, mut rewrite: F) -> StateSum
    where
        F: FnMut(&[u32]) -> Option<PartKey>,
    {
        let mut out = StateSum::new(self.field, self.factors);
        let mut images: Vec<Option<Option<u32>>> = vec![None; self.parts.len()];
        for (k, &c) in &self.states {
            let mapped: Option<StateKey> = k
                .iter()
                .map(|&id| {
                    *images[id as usize].get_or_insert_with(|| {
                        rewrite(self.parts.get(id)).map(|p| out.parts.intern(p))
                    })
                })
                .collect();
            if let Some(key) = mapped {
                add_coeff(&mut out.states, key, c, self.field);
            }
        }
        out
    }

    /// Removes isolated vertices (see [`cleanup`]) without assigning an edge.
    pub(crate) fn drop_isolated(&self, isolated: &[u32]) -> StateSum {
        if isolated.is_empty() {
            return self.clone();
        }
        self.map_parts(|key| cleanup(unpack(key), isolated).map(canonical))
    }

    /// Renames vertices. `rename` must be injective on mentioned vertices.
    pub(crate) fn relabel(&self, rename: impl Fn(u32) -> u32) -> StateSum {
        self.map_parts(|key| {
            Some(canonical(
                unpack(key)
                    .into_iter()
                    .map(|(v, b)| (rename(v), b))
                    .collect(),
            ))
        })
    }

    /// Assigns edge `uv`: each term splits over the ways to choose `cut`
    /// factors that cut the edge. `isolated` lists endpoints left without
    /// unassigned edges.
    pub(crate) fn assign_edge(&self, u: u32, v: u32, cut: usize, isolated: &[u32]) -> StateSum {
        let f = self.field;
        let mut out = StateSum::new(f, self.factors);
        let n = self.parts.len();
        let mut cut_img: Vec<Option<u32>> = Vec::with_capacity(n);
        let mut forest_img: Vec<SmallVec<[u32; 8]>> = Vec::with_capacity(n);
        let mut scratch = Vec::new();
        for id in 0..n as u32 {
            let pairs = unpack(self.parts.get(id));
            cut_img.push(cleanup(pairs.clone(), isolated).map(|p| out.parts.intern(canonical(p))));
            scratch.clear();
            contract(&pairs, u, v, &mut scratch);
            forest_img.push(
                scratch
                    .drain(..)
                    .filter_map(|p| cleanup(p, isolated))
                    .map(|p| out.parts.intern(canonical(p)))
                    .collect(),
            );
        }
        let choices = cut_patterns(self.factors, cut);
        let mut options: Vec<SmallVec<[u32; 8]>> = vec![SmallVec::new(); self.factors];
        for (k, &c) in &self.states {
            'pattern: for pattern in &choices {
                for (i, &id) in k.iter().enumerate() {
                    options[i].clear();
                    if pattern[i] {
                        options[i].extend(cut_img[id as usize]);
                    } else {
                        options[i].extend_from_slice(&forest_img[id as usize]);
                    }
                    if options[i].is_empty() {
                        continue 'pattern;
                    }
                }
                for_each_product(&options, |key| add_coeff(&mut out.states, key, c, f));
            }
        }
        out
    }

    /// Sum of two combinations over the same field and factor count.
    pub(crate) fn merge(&mut self, other: &StateSum) {
        assert_eq!(self.factors, other.factors);
        for (k, &c) in &other.states {
            let key: StateKey = k
                .iter()
                .map(|&id| self.parts.intern(PartKey::from(other.parts.get(id))))
                .collect();
            add_coeff(&mut self.states, key, c, self.field);
        }
    }

    pub(crate) fn scale(&mut self, s: u64) {
        let f = self.field;
        self.states.values_mut().for_each(|c| *c = f.mul(*c, s));
        self.states.retain(|_, c| *c != 0);
    }
}

fn add_coeff<K: Hash + Eq>(map: &mut FxHashMap<K, u64>, key: K, c: u64, f: PrimeField) {
    if c == 0 {
        return;
    }
    match map.entry(key) {
        Entry::Occupied(mut slot) => {
            let sum = f.add(*slot.get(), c);
            if sum == 0 {
                slot.remove();
            } else {
                *slot.get_mut() = sum;
            }
        }
        Entry::Vacant(slot) => {
            slot.insert(c);
        }
    }
}

/// All length-`k` boolean patterns with exactly `cut` trues, in lexicographic
/// order of the true positions.
fn cut_patterns(k: usize, cut: usize) -> Vec<Vec<bool>> {
    (0u32..(1 << k))
        .filter(|m| m.count_ones() as usize == cut)
        .map(|m| (0..k).map(|i| m >> i & 1 == 1).collect())
        .collect()
}

fn for_each_product(options: &[SmallVec<[u32; 8]>], mut visit: impl FnMut(StateKey)) {
    let k = options.len();
    let mut idx = vec![0usize; k];
    loop {
        visit(
            idx.iter()
                .enumerate()
                .map(|(i, &j)| options[i][j])
                .collect(),
        );
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < options[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Greedy edge order keeping few vertices half-processed. Vertices flagged
/// in `active` count as already touched.
pub(crate) fn frontier_order(
    vertex_count: usize,
    edges: &[(u32, u32)],
    active: &[bool],
) -> Vec<usize> {
    let mut active = active.to_vec();
    active.resize(vertex_count, false);
    let mut remaining = vec![0usize; vertex_count];
    for &(a, b) in edges {
        remaining[a as usize] += 1;
        remaining[b as usize] += 1;
    }
    let mut done = vec![false; edges.len()];
    let mut order = Vec::with_capacity(edges.len());
    for _ in 0..edges.len() {
        let mut best: Option<(i64, usize, usize)> = None;
        for (e, &(a, b)) in edges.iter().enumerate() {
            if done[e] {
                continue;
            }
            let (a, b) = (a as usize, b as usize);
            let opened = i64::from(!active[a]) + i64::from(!active[b]);
            let closes = i64::from(remaining[a] == 1) + i64::from(remaining[b] == 1);
            let tie = remaining[a].min(remaining[b]);
            let key = (opened - closes, tie, e);
            if best.is_none_or(|bk| key < bk) {
                best = Some(key);
            }
        }
        let (_, _, e) = best.unwrap();
        let (a, b) = edges[e];
        done[e] = true;
        active[a as usize] = true;
        active[b as usize] = true;
        remaining[a as usize] -= 1;
        remaining[b as usize] -= 1;
        order.push(e);
    }
    order
}

/// Assigns the edges listed in `order` (indices into `edges`) starting from
/// `start`, with `cut` factors cutting each edge. Edges missing from
/// `order` stay unassigned but still count towards vertex degrees, so a
/// vertex is cleaned up exactly when its last edge is gone. Mentioned
/// vertices of degree zero are cleaned up first. Returns the final combination and the
/// largest number of live states along the way.
pub(crate) fn assign_all(
    start: &StateSum,
    vertex_count: usize,
    edges: &[(u32, u32)],
    order: &[usize],
    cut: usize,
) -> (StateSum, usize) {
    let mut remaining = vec![0usize; vertex_count];
    for &(a, b) in edges {
        remaining[a as usize] += 1;
        remaining[b as usize] += 1;
    }
    let mentioned = start.mentioned_vertices();
    let initially_isolated: Vec<u32> = mentioned
        .into_iter()
        .filter(|&v| (v as usize) >= vertex_count || remaining[v as usize] == 0)
        .collect();
    let mut cur = start.drop_isolated(&initially_isolated);
    let mut peak = cur.len();
    for &e in order {
        if cur.is_zero() {
            break;
        }
        let (a, b) = edges[e];
        remaining[a as usize] -= 1;
        remaining[b as usize] -= 1;
        let isolated: SmallVec<[u32; 2]> = [a, b]
            .into_iter()
            .filter(|&x| remaining[x as usize] == 0)
            .collect();
        cur = cur.assign_edge(a, b, cut, &isolated);
        peak = peak.max(cur.len());
    }
    (cur, peak)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn encoding_round_trip() {
        let blocks = vec![vec![7, 2], vec![5], vec![1, 9]];
        let key = encode_blocks(&blocks);
        assert_eq!(decode_blocks(&key), vec![vec![1, 9], vec![2, 7], vec![5]]);
        assert_eq!(key, encode_blocks(&[vec![5], vec![9, 1], vec![2, 7]]));
    }

    #[test]
    fn patterns() {
        assert_eq!(
            cut_patterns(2, 1),
            vec![vec![true, false], vec![false, true]]
        );
        assert_eq!(cut_patterns(4, 2).len(), 6);
    }

    #[test]
    fn triangle_psi_squared() {
        // coefficient of abc in Ψ_K3 · Ψ_K3 = (a+b+c)^2: zero (degree 2 vs 3),
        // use Ψ · Φ^{{0},{1}} instead: (a+b+c)(ab+ac) → abc appears twice
        let k = f(5);
        let mut s = StateSum::new(k, 2);
        s.add(
            &[
                encode_blocks(&[vec![0]]),
                encode_blocks(&[vec![0], vec![1]]),
            ],
            1,
        );
        let edges = [(0, 1), (1, 2), (2, 0)];
        let order = frontier_order(3, &edges, &[]);
        let (out, _) = assign_all(&s, 3, &edges, &order, 1);
        assert_eq!(out.constant(), 2);
    }

    #[test]
    fn order_is_a_permutation() {
        let edges: Vec<(u32, u32)> = vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)];
        let mut o = frontier_order(4, &edges, &[]);
        o.sort();
        assert_eq!(o, (0..6).collect::<Vec<_>>());
    }
}
