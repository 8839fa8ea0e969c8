//! c₂ at p = 2 by counting edge assignments between spanning structures.

use crate::fp::PrimeField;
use crate::frontier::{assign_all, encode_blocks, frontier_order, PartKey, StateSum};
use crate::graph::{EdgeId, LabeledGraph, VertexSubsetPartition};
use crate::polys::{dodgson_to_forest, dodgson_to_forest_mod2, ForestPolyExpr};

use super::{
    check_degrees, check_edges, check_formula_graph, default_edge_choice, formula3_sigma,
    formula_factors, C2Error, C2Result, Diagnostics, Method,
};

/// A product of `2(p-1)` forest-polynomial factors on one host graph,
/// together with the rule that every host edge is cut by exactly `p-1` of
/// them. The count is the coefficient of `Π α_e^{p-1}` in the product.
#[derive(Debug, Clone)]
pub struct AssignmentProblem {
    factors: Vec<ForestPolyExpr>,
    field: PrimeField,
}

impl AssignmentProblem {
    pub fn new(factors: Vec<ForestPolyExpr>) -> Result<Self, C2Error> {
        let first = factors
            .first()
            .ok_or_else(|| C2Error::BadProblem("no factors".into()))?;
        let field = first.field();
        let p = field.modulus();
        if factors.len() as u64 != 2 * (p - 1) {
            return Err(C2Error::BadProblem(format!(
                "{} factors given, p = {p} needs {}",
                factors.len(),
                2 * (p - 1)
            )));
        }
        for f in &factors[1..] {
            if f.field() != field
                || f.base() != first.base()
                || f.present_edges() != first.present_edges()
                || f.present_vertices() != first.present_vertices()
            {
                return Err(C2Error::BadProblem(
                    "factors live on different hosts".into(),
                ));
            }
        }
        Ok(Self { factors, field })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn factors(&self) -> &[ForestPolyExpr] {
        &self.factors
    }

    pub fn multiplicity(&self) -> usize {
        (self.field.modulus() - 1) as usize
    }

    pub fn host_edges(&self) -> Vec<EdgeId> {
        self.factors[0].present_edges()
    }

    /// The product expanded into a sum of partition tuples.
    pub(crate) fn initial_states(&self) -> StateSum {
        let f = self.field;
        let mut sum = StateSum::new(f, self.factors.len());
        let lists: Vec<Vec<(PartKey, u64)>> = self
            .factors
            .iter()
            .map(|e| {
                e.terms()
                    .iter()
                    .map(|(p, &c)| (partition_key(p), c))
                    .collect()
            })
            .collect();
        if lists.iter().any(Vec::is_empty) {
            return sum;
        }
        let mut idx = vec![0usize; lists.len()];
        loop {
            let tuple: Vec<PartKey> = idx
                .iter()
                .enumerate()
                .map(|(i, &j)| lists[i][j].0.clone())
                .collect();
            let coeff = idx
                .iter()
                .enumerate()
                .fold(1, |acc, (i, &j)| f.mul(acc, lists[i][j].1));
            sum.add(&tuple, coeff);
            let mut i = lists.len();
            loop {
                if i == 0 {
                    return sum;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < lists[i].len() {
                    break;
                }
                idx[i] = 0;
            }
        }
    }

    /// Coefficient of `Π α_e^{p-1}` (mod p) and the largest number of live
    /// states seen, by assigning edges one at a time.
    pub fn count(&self) -> (u64, usize) {
        let base = self.factors[0].base();
        let host = self.host_edges();
        let edges: Vec<(u32, u32)> = host
            .iter()
            .map(|&e| {
                let (t, h) = base.edge(e);
                (t as u32, h as u32)
            })
            .collect();
        let start = self.initial_states();
        let mut active = vec![false; base.vertex_count()];
        for v in start.mentioned_vertices() {
            active[v as usize] = true;
        }
        let order = frontier_order(base.vertex_count(), &edges, &active);
        let (end, peak) = assign_all(
            &start,
            base.vertex_count(),
            &edges,
            &order,
            self.multiplicity(),
        );
        (end.constant(), peak)
    }

    /// The same coefficient for p = 2 by enumerating the forests of the
    /// first factor and testing whether the complement is a valid forest
    /// for the second. Exponential; meant for small hosts.
    pub fn count_by_enumeration(&self) -> Result<u64, C2Error> {
        if self.field.modulus() != 2 {
            return Err(C2Error::UnsupportedPrime(self.field.modulus()));
        }
        let (host, _, vmap) = self.factors[0].host();
        let remap = |p: &VertexSubsetPartition| {
            VertexSubsetPartition::new(
                p.blocks()
                    .iter()
                    .map(|b| {
                        b.iter()
                            .map(|&v| vmap[v].expect("term mentions a removed vertex"))
                            .collect()
                    })
                    .collect(),
            )
        };
        let all: Vec<EdgeId> = (0..host.edge_count()).collect();
        let mut total = 0u64;
        for (p1, &c1) in self.factors[0].terms() {
            let p1 = remap(p1).map_err(|e| C2Error::BadProblem(e.to_string()))?;
            for (p2, &c2) in self.factors[1].terms() {
                let p2 = remap(p2).map_err(|e| C2Error::BadProblem(e.to_string()))?;
                let forests = host
                    .spanning_forests(&p1)
                    .map_err(|e| C2Error::BadProblem(e.to_string()))?;
                let mut pairs = 0u64;
                for f1 in forests {
                    let rest: Vec<EdgeId> = all
                        .iter()
                        .copied()
                        .filter(|e| f1.binary_search(e).is_err())
                        .collect();
                    if host.is_partition_forest(&rest, &p2) {
                        pairs += 1;
                    }
                }
                total += c1 * c2 * pairs;
            }
        }
        Ok(total % 2)
    }
}

fn partition_key(p: &VertexSubsetPartition) -> PartKey {
    let blocks: Vec<Vec<u32>> = p
        .blocks()
        .iter()
        .map(|b| b.iter().map(|&v| v as u32).collect())
        .collect();
    encode_blocks(&blocks)
}

/// c₂ at p = 2 of an assignment problem built from a c₂ formula.
pub fn c2_assign_mod2(problem: &AssignmentProblem) -> Result<C2Result, C2Error> {
    if problem.field().modulus() != 2 {
        return Err(C2Error::UnsupportedPrime(problem.field().modulus()));
    }
    let (value, peak) = problem.count();
    Ok(C2Result {
        p: 2,
        method: Method::Assign,
        value,
        valid: true,
        edge_choice: Vec::new(),
        diagnostics: Diagnostics {
            assignment_coefficient: Some(value),
            peak_states: Some(peak),
            ..Default::default()
        },
    })
}

/// Weighted assignment problems whose combined coefficient is the
/// coefficient of `Π α_e^{p-1}` in `F^{p-1}`, for the product `F` of
/// formula `which`.
///
/// Formulas 1 and 2 give the single product `A^{p-1} B^{p-1}`. For formula 3,
/// `F = AB - sCD` with the cofactor sign `s` of [`c2_formula`], and since
/// `binom(p-1, k) ≡ (-1)^k`, `F^{p-1} = Σ_k s^k (AB)^{p-1-k} (CD)^k`.
///
/// [`c2_formula`]: super::c2_formula
pub fn formula_problems(
    g: &LabeledGraph,
    field: PrimeField,
    which: u8,
    edges: &[EdgeId],
) -> Result<Vec<(u64, AssignmentProblem)>, C2Error> {
    let specs = formula_factors(which, edges)?;
    let exprs: Vec<ForestPolyExpr> = specs
        .iter()
        .map(|s| {
            if field.modulus() == 2 {
                dodgson_to_forest_mod2(g, s, field)
            } else {
                dodgson_to_forest(g, s, field)
            }
        })
        .collect::<Result<_, _>>()?;
    let m = (field.modulus() - 1) as usize;
    let product = |a: usize, b: usize, k: usize| -> Vec<ForestPolyExpr> {
        let mut v = Vec::with_capacity(2 * m);
        v.extend(std::iter::repeat_n(exprs[a].clone(), m - k));
        v.extend(std::iter::repeat_n(exprs[b].clone(), m - k));
        if k > 0 {
            v.extend(std::iter::repeat_n(exprs[2].clone(), k));
            v.extend(std::iter::repeat_n(exprs[3].clone(), k));
        }
        v
    };
    if which < 3 {
        return Ok(vec![(1, AssignmentProblem::new(product(0, 1, 0))?)]);
    }
    let s = if formula3_sigma(&specs).is_multiple_of(2) {
        1
    } else {
        field.neg(1)
    };
    (0..=m)
        .map(|k| {
            let factors = product(0, 1, k);
            Ok((field.pow(s, k as u64), AssignmentProblem::new(factors)?))
        })
        .collect()
}

/// The weighted problems merged into one combination of partition tuples
/// over their common host.
pub(crate) fn merged_states(problems: &[(u64, AssignmentProblem)]) -> StateSum {
    let mut start = problems[0].1.initial_states();
    start.scale(problems[0].0);
    for (w, problem) in &problems[1..] {
        let mut s = problem.initial_states();
        s.scale(*w);
        start.merge(&s);
    }
    start
}

/// Converts the coefficient of `Π α_e^{p-1}` into c₂: the zero count is
/// `(-1)^{N+1}` times the coefficient, and formulas 1 and 3 carry a minus.
pub(crate) fn c2_scale(field: PrimeField, which: u8, vars: usize) -> u64 {
    let lemma_minus = vars.is_multiple_of(2);
    let formula_minus = which != 2;
    if lemma_minus != formula_minus {
        field.neg(1)
    } else {
        1
    }
}

/// Coefficient of `Π α_e^{p-1}` summed over weighted problems sharing one
/// host, and the peak number of live states.
fn count_weighted(problems: &[(u64, AssignmentProblem)]) -> (u64, usize) {
    let first = &problems[0].1;
    let field = first.field();
    let start = merged_states(problems);
    let base = first.factors()[0].base();
    let edges: Vec<(u32, u32)> = first
        .host_edges()
        .iter()
        .map(|&e| {
            let (t, h) = base.edge(e);
            (t as u32, h as u32)
        })
        .collect();
    let mut active = vec![false; base.vertex_count()];
    for v in start.mentioned_vertices() {
        active[v as usize] = true;
    }
    let order = frontier_order(base.vertex_count(), &edges, &active);
    let cut = (field.modulus() - 1) as usize;
    let (end, peak) = assign_all(&start, base.vertex_count(), &edges, &order, cut);
    (end.constant(), peak)
}

/// c₂ from formula `which` by counting edge assignments: the Dodgson
/// factors become forest polynomials (mod 2, or with signs for p > 2) and
/// every remaining edge is cut by exactly `p-1` of the `2(p-1)` factors.
///
/// For p > 2 this path is experimental: the forest signs are computed, not
/// taken from a closed rule, and the state space grows quickly with p.
pub fn c2_assign(
    g: &LabeledGraph,
    field: PrimeField,
    which: u8,
    edges: Option<&[EdgeId]>,
) -> Result<C2Result, C2Error> {
    check_formula_graph(g)?;
    let edges = match edges {
        Some(e) => e.to_vec(),
        None => default_edge_choice(g, which)?,
    };
    check_edges(g, which, &edges)?;
    let vars = check_degrees(g, which, &formula_factors(which, &edges)?)?;
    let problems = formula_problems(g, field, which, &edges)?;
    let (coefficient, peak) = count_weighted(&problems);
    let value = field.mul(c2_scale(field, which, vars), coefficient);
    Ok(C2Result {
        p: field.modulus(),
        method: Method::Assign,
        value,
        valid: true,
        edge_choice: edges,
        diagnostics: Diagnostics {
            assignment_coefficient: Some(coefficient),
            peak_states: Some(peak),
            formula: Some(which),
            ..Default::default()
        },
    })
}
