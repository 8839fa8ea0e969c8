//! Seed, transfer map and output functional of a family, and the solver.
//!
//! With `r` the window depth, let `R_j` be the graph left after stripping
//! everything above layer `j`: the base edges not used by the formula,
//! plus every template instance at layers `≤ j` that is never deleted.
//! For `m ≥ j + r`, removing the formula edges from `G_m` and assigning
//! the surviving instances of layers `m-r+1..m` leaves exactly `R_{m-r}`.
//! States at level `j` only mention `W_0` and layers `j-r+1..j`, and are
//! stored in local coordinates: layer `j-o` becomes offset `o`.
//!
//! Levels at least `2r+2` all look alike, so the seed is computed in
//! `G_{3r+2}`, the transfer map (assign layer `j`, land on level `j-1`) at
//! level `2r+2`, and the output functional assigns all of `R_{2r+1}`. For
//! `m ≥ 3r+2` this gives `c₂(G_m) = f · T^{m-3r-1} · s`.

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{validate_family, EdgeOrigin, RecurrenceError, RecursiveFamilySpec};
use crate::c2::{
    c2_assign, c2_scale, check_degrees, check_formula_graph, formula_edge_count, formula_factors,
    formula_problems, merged_states, vanishes_identically,
};
use crate::fp::{iterate_until_periodic_with, FpMatrix, PrimeField};
use crate::frontier::{assign_all, decode_blocks, frontier_order, PartKey, StateSum};
use crate::graph::{EdgeId, LabeledGraph, VertexId};

/// Default cap on the number of reachable states.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    /// Overrides the formula named in the spec.
    pub formula: Option<u8>,
    /// Overrides the warmup width named in the spec.
    pub warmup: Option<usize>,
    pub state_cap: usize,
    /// Allows p > 2.
    pub experimental: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            formula: None,
            warmup: None,
            state_cap: DEFAULT_STATE_CAP,
            experimental: false,
        }
    }
}

/// A tuple of partitions, one per factor, in local vertex ids (see
/// [`RecursiveFamilySpec::local_label`]).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateTuple(pub Vec<Vec<Vec<VertexId>>>);

impl StateTuple {
    fn from_keys(keys: &[PartKey]) -> Self {
        StateTuple(
            keys.iter()
                .map(|k| {
                    decode_blocks(k)
                        .into_iter()
                        .map(|b| b.into_iter().map(|v| v as VertexId).collect())
                        .collect()
                })
                .collect(),
        )
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.0.iter().flatten().flatten().copied()
    }

    /// Readable form, e.g. `{B0,L1.2}{L0.0} | {B1}`.
    pub fn describe(&self, spec: &RecursiveFamilySpec) -> String {
        self.0
            .iter()
            .map(|blocks| {
                if blocks.is_empty() {
                    return "∅".to_string();
                }
                blocks
                    .iter()
                    .map(|b| {
                        let names: Vec<String> = b.iter().map(|&v| spec.local_label(v)).collect();
                        format!("{{{}}}", names.join(","))
                    })
                    .collect::<String>()
            })
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedStates {
    pub formula: u8,
    /// Member `G_m` the seed was computed in.
    pub layers: usize,
    /// Formula edges, as `L<o>:t<i>` (template `i` at offset `o` from the
    /// top layer) or `base:e<i>`.
    pub edges: Vec<String>,
    /// Combination of states at level `layers - r`, sorted.
    pub terms: Vec<(StateTuple, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferMatrix {
    /// Reachable states, sorted.
    pub states: Vec<StateTuple>,
    /// Column `c` is the image of state `c`.
    pub matrix: FpMatrix,
    pub seed: Vec<u64>,
    pub functional: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectValue {
    pub n: usize,
    pub value: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapEntry {
    pub n: usize,
    pub direct: u64,
    pub predicted: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrenceSolution {
    pub family: String,
    pub p: u64,
    /// Smallest family index covered.
    pub offset: usize,
    pub stride: usize,
    pub preperiod: Vec<u64>,
    pub period: Vec<u64>,
    pub formula: u8,
    pub seed_edges: Vec<String>,
    pub state_count: usize,
    /// First family index predicted by the recurrence.
    pub recurrence_from: usize,
    /// Members computed directly by edge assignment.
    pub direct: Vec<DirectValue>,
    /// Members computed both ways.
    pub overlap: Vec<OverlapEntry>,
}

impl RecurrenceSolution {
    /// c₂ of the member with index `n`.
    pub fn value(&self, n: usize) -> Option<u64> {
        let i = n.checked_sub(self.offset)?;
        Some(if i < self.preperiod.len() {
            self.preperiod[i]
        } else {
            self.period[(i - self.preperiod.len()) % self.period.len()]
        })
    }
}

/// Level bookkeeping shared by the seed, transfer and functional.
struct Levels<'a> {
    spec: &'a RecursiveFamilySpec,
    r: usize,
    /// Base edges used as formula edges.
    excluded_base: Vec<usize>,
}

impl<'a> Levels<'a> {
    fn functional_level(&self) -> usize {
        2 * self.r + 1
    }

    fn transfer_level(&self) -> usize {
        2 * self.r + 2
    }

    fn seed_layers(&self) -> usize {
        3 * self.r + 2
    }

    /// Edges of `R_j` and the positions of the layer-`j` instances.
    fn edges(&self, j: usize) -> (Vec<(u32, u32)>, Vec<usize>) {
        let spec = self.spec;
        let mut edges: Vec<(u32, u32)> = spec
            .base
            .edges()
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.excluded_base.contains(i))
            .map(|(_, &(a, b))| (a as u32, b as u32))
            .collect();
        let mut top = Vec::new();
        for layer in 1..=j {
            for t in 0..spec.edges.len() {
                if spec.is_deletable(t) {
                    continue;
                }
                if let Some((a, b)) = spec.instance(layer, t) {
                    if layer == j {
                        top.push(edges.len());
                    }
                    edges.push((a as u32, b as u32));
                }
            }
        }
        (edges, top)
    }

    fn to_absolute(&self, level: usize, local: u32) -> u32 {
        let spec = self.spec;
        // local layer slot `s` is offset `s - 1`
        let (slot, index) = spec.layer_of(local as VertexId);
        if slot == 0 {
            local
        } else {
            spec.layer_vertex(level - (slot - 1), index) as u32
        }
    }

    /// Moves a combination at `level` to local ids, checking that every
    /// mentioned vertex is a boundary vertex.
    fn to_local(&self, level: usize, sum: &StateSum) -> Result<StateSum, RecurrenceError> {
        let spec = self.spec;
        for v in sum.mentioned_vertices() {
            let (layer, _) = spec.layer_of(v as VertexId);
            if layer != 0 && (layer > level || level - layer >= self.r) {
                return Err(RecurrenceError::Hygiene {
                    level,
                    vertex: v as VertexId,
                });
            }
        }
        Ok(sum.relabel(|v| {
            let (layer, index) = spec.layer_of(v as VertexId);
            if layer == 0 {
                v
            } else {
                (spec.base_size() + (level - layer) * spec.width + index) as u32
            }
        }))
    }

    fn single(&self, field: PrimeField, keys: &[PartKey], level: usize) -> StateSum {
        let mut s = StateSum::new(field, keys.len());
        s.add(keys, 1);
        s.relabel(|v| self.to_absolute(level, v))
    }
}

struct Seed {
    formula: u8,
    layers: usize,
    edge_labels: Vec<String>,
    excluded_base: Vec<usize>,
    states: StateSum,
}

fn build_seed(
    spec: &RecursiveFamilySpec,
    field: PrimeField,
    which: u8,
) -> Result<Seed, RecurrenceError> {
    let r = spec.r();
    let mut levels = Levels {
        spec,
        r,
        excluded_base: Vec::new(),
    };
    let m = levels.seed_layers();
    let member = spec.materialize(m)?;
    let g = &member.graph;
    check_formula_graph(g)?;
    let is_top = |o: &EdgeOrigin| matches!(o, EdgeOrigin::Instance { layer, .. } if *layer + r > m);
    let mut candidates: Vec<EdgeId> = (0..g.edge_count())
        .filter(|&e| is_top(&member.origins[e]))
        .collect();
    candidates
        .extend((0..g.edge_count()).filter(|&e| matches!(member.origins[e], EdgeOrigin::Base(_))));
    let needed = formula_edge_count(which)?;
    let edges = first_nondegenerate(g, which, &candidates, needed)?.ok_or(
        RecurrenceError::NoSeedChoice {
            formula: which,
            needed,
        },
    )?;
    let vars = check_degrees(g, which, &formula_factors(which, &edges)?)?;
    let problems = formula_problems(g, field, which, &edges)?;
    let mut start = merged_states(&problems);
    start.scale(c2_scale(field, which, vars));

    let host = problems[0].1.host_edges();
    let host_edges: Vec<(u32, u32)> = host
        .iter()
        .map(|&e| {
            let (a, b) = g.edge(e);
            (a as u32, b as u32)
        })
        .collect();
    let order: Vec<usize> = (0..host.len())
        .filter(|&i| is_top(&member.origins[host[i]]))
        .collect();
    let cut = (field.modulus() - 1) as usize;
    let (out, _) = assign_all(&start, g.vertex_count(), &host_edges, &order, cut);

    let excluded_base: Vec<usize> = edges
        .iter()
        .filter_map(|&e| match member.origins[e] {
            EdgeOrigin::Base(i) => Some(i),
            EdgeOrigin::Instance { .. } => None,
        })
        .collect();
    levels.excluded_base = excluded_base.clone();
    let states = levels.to_local(m - r, &out)?;
    let edge_labels = edges
        .iter()
        .map(|&e| match member.origins[e] {
            EdgeOrigin::Base(i) => format!("base:e{i}"),
            EdgeOrigin::Instance { layer, template } => format!("L{}:t{template}", m - layer),
        })
        .collect();
    Ok(Seed {
        formula: which,
        layers: m,
        edge_labels,
        excluded_base,
        states,
    })
}

/// Lexicographically first `needed` candidates (by position in the list)
/// for which every Dodgson factor of the formula is nonzero and the degrees
/// fit.
fn first_nondegenerate(
    g: &LabeledGraph,
    which: u8,
    candidates: &[EdgeId],
    needed: usize,
) -> Result<Option<Vec<EdgeId>>, RecurrenceError> {
    if candidates.len() < needed {
        return Ok(None);
    }
    let mut comb: Vec<usize> = (0..needed).collect();
    loop {
        let edges: Vec<EdgeId> = comb.iter().map(|&i| candidates[i]).collect();
        let specs = formula_factors(which, &edges)?;
        if check_degrees(g, which, &specs).is_ok() {
            let mut ok = true;
            for s in &specs {
                if vanishes_identically(g, s)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(Some(edges));
            }
        }
        let k = candidates.len();
        let mut i = needed;
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            if comb[i] < k - needed + i {
                comb[i] += 1;
                for j in i + 1..needed {
                    comb[j] = comb[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Seed states of a validated family.
pub fn seed_states(
    spec: &RecursiveFamilySpec,
    field: PrimeField,
    formula: u8,
) -> Result<SeedStates, RecurrenceError> {
    let seed = build_seed(spec, field, formula)?;
    Ok(SeedStates {
        formula: seed.formula,
        layers: seed.layers,
        edges: seed.edge_labels,
        terms: seed
            .states
            .entries()
            .into_iter()
            .map(|(k, c)| (StateTuple::from_keys(&k), c))
            .collect(),
    })
}

/// The closed transfer system: states, sparse columns, seed vector and
/// output functional.
struct System {
    seed: Seed,
    states: Vec<Vec<PartKey>>,
    columns: Vec<Vec<(usize, u64)>>,
    seed_vector: Vec<u64>,
    functional: Vec<u64>,
    field: PrimeField,
}

impl System {
    fn apply(&self, v: &[u64]) -> Vec<u64> {
        let f = self.field;
        let mut out = vec![0u64; v.len()];
        for (j, col) in self.columns.iter().enumerate() {
            if v[j] == 0 {
                continue;
            }
            for &(i, c) in col {
                out[i] = f.add(out[i], f.mul(c, v[j]));
            }
        }
        out
    }

    fn dot(&self, v: &[u64]) -> u64 {
        let f = self.field;
        v.iter()
            .zip(&self.functional)
            .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
    }
}

fn build_system(
    spec: &RecursiveFamilySpec,
    field: PrimeField,
    which: u8,
    cap: usize,
) -> Result<System, RecurrenceError> {
    let seed = build_seed(spec, field, which)?;
    let levels = Levels {
        spec,
        r: spec.r(),
        excluded_base: seed.excluded_base.clone(),
    };
    let cut = (field.modulus() - 1) as usize;
    let jt = levels.transfer_level();
    let (t_edges, t_order) = levels.edges(jt);
    let t_vertices = spec.vertex_count(jt);
    let column = |keys: &Vec<PartKey>| -> Result<Vec<(Vec<PartKey>, u64)>, RecurrenceError> {
        let start = levels.single(field, keys, jt);
        let (out, _) = assign_all(&start, t_vertices, &t_edges, &t_order, cut);
        Ok(levels.to_local(jt - 1, &out)?.entries())
    };

    let mut index: FxHashMap<Vec<PartKey>, usize> = FxHashMap::default();
    let mut states: Vec<Vec<PartKey>> = Vec::new();
    let mut intern =
        |keys: Vec<PartKey>, states: &mut Vec<Vec<PartKey>>| -> Result<usize, RecurrenceError> {
            if let Some(&i) = index.get(&keys) {
                return Ok(i);
            }
            if states.len() >= cap {
                return Err(RecurrenceError::StateOverflow { cap });
            }
            index.insert(keys.clone(), states.len());
            states.push(keys);
            Ok(states.len() - 1)
        };
    let seed_entries = seed.states.entries();
    let mut seed_sparse = Vec::with_capacity(seed_entries.len());
    for (keys, c) in seed_entries {
        seed_sparse.push((intern(keys, &mut states)?, c));
    }
    let mut columns: Vec<Vec<(usize, u64)>> = Vec::new();
    let mut done = 0;
    while done < states.len() {
        let wave: Vec<Vec<(Vec<PartKey>, u64)>> = states[done..]
            .par_iter()
            .map(&column)
            .collect::<Result<_, _>>()?;
        done = states.len();
        for image in wave {
            let mut col = Vec::with_capacity(image.len());
            for (keys, c) in image {
                col.push((intern(keys, &mut states)?, c));
            }
            columns.push(col);
        }
    }

    // canonical order
    let mut perm: Vec<usize> = (0..states.len()).collect();
    perm.sort_by(|&a, &b| states[a].cmp(&states[b]));
    let mut rank = vec![0usize; states.len()];
    for (new, &old) in perm.iter().enumerate() {
        rank[old] = new;
    }
    let states: Vec<Vec<PartKey>> = perm.iter().map(|&old| states[old].clone()).collect();
    let columns: Vec<Vec<(usize, u64)>> = perm
        .iter()
        .map(|&old| {
            let mut col: Vec<(usize, u64)> =
                columns[old].iter().map(|&(i, c)| (rank[i], c)).collect();
            col.sort_unstable();
            col
        })
        .collect();
    let mut seed_vector = vec![0u64; states.len()];
    for (i, c) in seed_sparse {
        seed_vector[rank[i]] = c;
    }

    let j0 = levels.functional_level();
    let (f_edges, _) = levels.edges(j0);
    let f_vertices = spec.vertex_count(j0);
    let functional: Vec<u64> = states
        .par_iter()
        .map(|keys| {
            let start = levels.single(field, keys, j0);
            let mut active = vec![false; f_vertices];
            for v in start.mentioned_vertices() {
                active[v as usize] = true;
            }
            let order = frontier_order(f_vertices, &f_edges, &active);
            assign_all(&start, f_vertices, &f_edges, &order, cut)
                .0
                .constant()
        })
        .collect();

    Ok(System {
        seed,
        states,
        columns,
        seed_vector,
        functional,
        field,
    })
}

fn check_prime(field: PrimeField, options: &SolveOptions) -> Result<(), RecurrenceError> {
    if field.modulus() > 2 && !options.experimental {
        return Err(RecurrenceError::ExperimentalPrime(field.modulus()));
    }
    Ok(())
}

/// The transfer system of a family as a dense matrix over the reachable
/// states.
pub fn transfer_matrix(
    spec: &RecursiveFamilySpec,
    field: PrimeField,
    options: &SolveOptions,
) -> Result<TransferMatrix, RecurrenceError> {
    validate_family(spec)?;
    check_prime(field, options)?;
    let which = options.formula.unwrap_or(spec.formula);
    let sys = build_system(spec, field, which, options.state_cap)?;
    let n = sys.states.len();
    let mut matrix = FpMatrix::zeros(field, n, n);
    for (j, col) in sys.columns.iter().enumerate() {
        for &(i, c) in col {
            matrix.set(i, j, c);
        }
    }
    Ok(TransferMatrix {
        states: sys
            .states
            .iter()
            .map(|k| StateTuple::from_keys(k))
            .collect(),
        matrix,
        seed: sys.seed_vector,
        functional: sys.functional,
    })
}

/// c₂ of every member of a validated family, as an eventually periodic
/// sequence in the family index.
///
/// Members up to the warmup bound are computed directly by edge
/// assignment; from `G_{3r+2}` on the transfer system predicts them, and
/// both must agree on at least three members.
pub fn solve_family(
    spec: &RecursiveFamilySpec,
    field: PrimeField,
    options: &SolveOptions,
) -> Result<RecurrenceSolution, RecurrenceError> {
    validate_family(spec)?;
    check_prime(field, options)?;
    let which = options.formula.unwrap_or(spec.formula);
    let r = spec.r();
    let sys = build_system(spec, field, which, options.state_cap)?;

    let m_rec = 3 * r + 2;
    let first = if spec.offset_layers >= m_rec {
        spec.offset
    } else {
        spec.offset + (m_rec - spec.offset_layers).div_ceil(spec.stride)
    };
    let warmup = options
        .warmup
        .or(spec.warmup)
        .unwrap_or(r + spec.stride + 5);
    let last = (spec.offset + warmup).max(first + 2);

    let direct: Vec<DirectValue> = (spec.offset..=last)
        .into_par_iter()
        .map(|n| {
            let g = spec.member(n)?;
            Ok(DirectValue {
                n,
                value: c2_assign(&g, field, which, None)?.value,
            })
        })
        .collect::<Result<_, RecurrenceError>>()?;

    let mut u0 = sys.seed_vector.clone();
    for _ in 0..spec.layers_of(first) - (3 * r + 1) {
        u0 = sys.apply(&u0);
    }
    let orbit = iterate_until_periodic_with(u0, |v| {
        let mut w = v.to_vec();
        for _ in 0..spec.stride {
            w = sys.apply(&w);
        }
        Ok(w)
    })?;
    let predicted = |k: usize| sys.dot(orbit.at(k));

    let mut overlap = Vec::new();
    for d in &direct[first - spec.offset..] {
        let p = predicted(d.n - first);
        if p != d.value {
            return Err(RecurrenceError::OverlapMismatch {
                n: d.n,
                direct: d.value,
                predicted: p,
            });
        }
        overlap.push(OverlapEntry {
            n: d.n,
            direct: d.value,
            predicted: p,
        });
    }

    // direct values below `first`, then the predicted orbit
    let head = first - spec.offset;
    let (pre, cycle) = (orbit.preperiod.len(), orbit.period.len());
    let mut seq: Vec<u64> = direct[..head].iter().map(|d| d.value).collect();
    seq.extend((0..pre + cycle).map(predicted));
    let period = (1..=cycle)
        .filter(|d| cycle % d == 0)
        .find(|&d| (0..cycle).all(|i| seq[head + pre + i] == seq[head + pre + (i + d) % cycle]))
        .unwrap();
    let mut start = head + pre;
    while start > 0 && seq[start - 1] == seq[start - 1 + period] {
        start -= 1;
    }

    Ok(RecurrenceSolution {
        family: spec.name.clone(),
        p: field.modulus(),
        offset: spec.offset,
        stride: spec.stride,
        preperiod: seq[..start].to_vec(),
        period: seq[start..start + period].to_vec(),
        formula: which,
        seed_edges: sys.seed.edge_labels.clone(),
        state_count: sys.states.len(),
        recurrence_from: first,
        direct,
        overlap,
    })
}
