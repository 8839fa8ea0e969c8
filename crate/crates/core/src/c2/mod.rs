//! The c₂ invariant at a prime p, by three independent routes: counting the
//! zeros of `Ψ_G`, counting zeros of a product of Dodgson polynomials, and
//! (for p = 2) counting edge assignments between spanning forest factors.

mod assign;
mod count;
mod lemma;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fp::{FpError, PrimeField};
use crate::graph::{EdgeId, LabeledGraph};
use crate::polys::{DodgsonMatrix, DodgsonSpec, PolyError};

pub use assign::{c2_assign, c2_assign_mod2, formula_problems, AssignmentProblem};
pub(crate) use assign::{c2_scale, merged_states};
pub use count::{count_points, count_zeros, DEFAULT_BUDGET};
pub use lemma::{coeff_lemma_check, LemmaCheck, SparsePoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum C2Error {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Field(#[from] FpError),
    #[error("c2 needs at least 3 vertices, graph has {0}")]
    TooFewVertices(usize),
    #[error("2+|E| <= 2|V| violated: |E| = {edges}, |V| = {vertices}")]
    TooManyEdges { edges: usize, vertices: usize },
    #[error("2+|E| = 2|V| violated: |E| = {edges}, |V| = {vertices}; the formula products need degree equal to their number of variables")]
    NotLogDivergent { edges: usize, vertices: usize },
    #[error("formula {which} needs {needed} distinct edges, got {got}")]
    EdgeChoice {
        which: u8,
        needed: usize,
        got: usize,
    },
    #[error("edge {0} chosen twice or out of range")]
    BadEdge(EdgeId),
    #[error("formula {0} does not exist (use 1, 2 or 3)")]
    UnknownFormula(u8),
    #[error(
        "product has degree {degree} in {vars} variables; the coefficient lemma needs them equal"
    )]
    DegreeMismatch { degree: i64, vars: usize },
    #[error("{needed} evaluations exceed the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("edge assignment counting is implemented for p = 2 only, got p = {0}")]
    UnsupportedPrime(u64),
    #[error("assignment problem: {0}")]
    BadProblem(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Brute,
    Formula1,
    Formula2,
    Formula3,
    Assign,
}

impl Method {
    pub fn formula(which: u8) -> Result<Method, C2Error> {
        match which {
            1 => Ok(Method::Formula1),
            2 => Ok(Method::Formula2),
            3 => Ok(Method::Formula3),
            _ => Err(C2Error::UnknownFormula(which)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Brute => "brute",
            Method::Formula1 => "formula1",
            Method::Formula2 => "formula2",
            Method::Formula3 => "formula3",
            Method::Assign => "assign",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brute" => Ok(Method::Brute),
            "formula1" => Ok(Method::Formula1),
            "formula2" => Ok(Method::Formula2),
            "formula3" => Ok(Method::Formula3),
            "assign" => Ok(Method::Assign),
            _ => Err(format!("unknown method {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Number of zeros found by point counting.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub point_count: Option<u64>,
    /// Number of polynomial evaluations performed.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub evaluations: Option<u64>,
    /// For the 5-invariant: zero counts of `AB - CD` and `AB + CD` with
    /// the raw minors `A, B, C, D`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sign_variant_counts: Option<[u64; 2]>,
    /// Coefficient left after assigning every edge (mod p).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub assignment_coefficient: Option<u64>,
    /// Largest number of live states during edge assignment.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub peak_states: Option<usize>,
    /// Which formula fed the assignment count.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub formula: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct C2Result {
    pub p: u64,
    pub method: Method,
    pub value: u64,
    /// False when a brute-force count was not divisible by p².
    pub valid: bool,
    pub edge_choice: Vec<EdgeId>,
    pub diagnostics: Diagnostics,
}

/// The factors `(A, B)` of the product for formulas 1 and 2, or
/// `(A, B, C, D)` with `⁵Ψ = ±(AB - CD)` for formula 3.
pub fn formula_factors(which: u8, edges: &[EdgeId]) -> Result<Vec<DodgsonSpec>, C2Error> {
    let needed = formula_edge_count(which)?;
    if edges.len() != needed {
        return Err(C2Error::EdgeChoice {
            which,
            needed,
            got: edges.len(),
        });
    }
    let e = edges;
    let d = |i: &[usize], j: &[usize], k: &[usize]| {
        DodgsonSpec::new(
            i.iter().map(|&x| e[x]).collect(),
            j.iter().map(|&x| e[x]).collect(),
            k.iter().map(|&x| e[x]).collect(),
        )
    };
    Ok(match which {
        // −[Ψ_k^{i,j} Ψ^{ik,jk}]
        1 => vec![d(&[0], &[1], &[2]), d(&[0, 2], &[1, 2], &[])],
        // [Ψ^{ij,kl} Ψ^{ik,jl}]
        2 => vec![d(&[0, 1], &[2, 3], &[]), d(&[0, 2], &[1, 3], &[])],
        // −[Ψ_m^{ij,kl} Ψ^{ikm,jlm} − Ψ_m^{ik,jl} Ψ^{ijm,klm}]
        _ => vec![
            d(&[0, 1], &[2, 3], &[4]),
            d(&[0, 2, 4], &[1, 3, 4], &[]),
            d(&[0, 2], &[1, 3], &[4]),
            d(&[0, 1, 4], &[2, 3, 4], &[]),
        ],
    })
}

pub fn formula_edge_count(which: u8) -> Result<usize, C2Error> {
    match which {
        1 => Ok(3),
        2 => Ok(4),
        3 => Ok(5),
        _ => Err(C2Error::UnknownFormula(which)),
    }
}

fn check_graph(g: &LabeledGraph) -> Result<(), C2Error> {
    if g.vertex_count() < 3 {
        return Err(C2Error::TooFewVertices(g.vertex_count()));
    }
    Ok(())
}

pub(crate) fn check_formula_graph(g: &LabeledGraph) -> Result<(), C2Error> {
    check_graph(g)?;
    if 2 + g.edge_count() > 2 * g.vertex_count() {
        return Err(C2Error::TooManyEdges {
            edges: g.edge_count(),
            vertices: g.vertex_count(),
        });
    }
    Ok(())
}

pub(crate) fn check_edges(g: &LabeledGraph, which: u8, edges: &[EdgeId]) -> Result<(), C2Error> {
    let needed = formula_edge_count(which)?;
    if edges.len() != needed {
        return Err(C2Error::EdgeChoice {
            which,
            needed,
            got: edges.len(),
        });
    }
    for (i, &e) in edges.iter().enumerate() {
        if e >= g.edge_count() || edges[..i].contains(&e) {
            return Err(C2Error::BadEdge(e));
        }
    }
    Ok(())
}

/// Degrees of the two factors of each product must add up to the number
/// of variables.
pub(crate) fn check_degrees(
    g: &LabeledGraph,
    which: u8,
    specs: &[DodgsonSpec],
) -> Result<usize, C2Error> {
    if 2 + g.edge_count() != 2 * g.vertex_count() {
        return Err(C2Error::NotLogDivergent {
            edges: g.edge_count(),
            vertices: g.vertex_count(),
        });
    }
    let vars = g.edge_count() - formula_edge_count(which)?;
    for pair in specs.chunks(2) {
        let degree = pair[0].degree(g) + pair[1].degree(g);
        if degree != vars as i64 {
            return Err(C2Error::DegreeMismatch { degree, vars });
        }
    }
    Ok(vars)
}

/// Large prime used to decide whether a Dodgson polynomial vanishes
/// identically (random evaluation, fixed seed).
const PROBE_PRIME: u64 = (1 << 31) - 1;
const PROBE_POINTS: usize = 4;

pub(crate) fn vanishes_identically(g: &LabeledGraph, spec: &DodgsonSpec) -> Result<bool, C2Error> {
    use rand::{Rng, SeedableRng};
    let field = PrimeField::new(PROBE_PRIME)?;
    let m = DodgsonMatrix::new(g, spec, field)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_c2c2);
    let mut scratch = Vec::new();
    for _ in 0..PROBE_POINTS {
        let pt: Vec<u64> = (0..g.edge_count())
            .map(|_| rng.gen_range(1..PROBE_PRIME))
            .collect();
        if m.eval_with(&pt, &mut scratch) != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn all_nonvanishing(g: &LabeledGraph, specs: &[DodgsonSpec]) -> Result<bool, C2Error> {
    for s in specs {
        if vanishes_identically(g, s)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Lexicographically first choice of distinct edges for which no Dodgson
/// factor of the formula vanishes identically. Falls back to the first
/// choice with at least one nonzero product, then to `0, 1, 2, …`.
pub fn default_edge_choice(g: &LabeledGraph, which: u8) -> Result<Vec<EdgeId>, C2Error> {
    let r = formula_edge_count(which)?;
    let m = g.edge_count();
    if m < r {
        return Err(C2Error::EdgeChoice {
            which,
            needed: r,
            got: m,
        });
    }
    let mut fallback = None;
    let mut comb: Vec<usize> = (0..r).collect();
    loop {
        let specs = formula_factors(which, &comb)?;
        if all_nonvanishing(g, &specs)? {
            return Ok(comb);
        }
        if fallback.is_none() && which == 3 {
            let nonzero_product =
                all_nonvanishing(g, &specs[..2])? || all_nonvanishing(g, &specs[2..])?;
            if nonzero_product {
                fallback = Some(comb.clone());
            }
        }
        // next combination
        let mut i = r;
        loop {
            if i == 0 {
                return Ok(fallback.unwrap_or_else(|| (0..r).collect()));
            }
            i -= 1;
            if comb[i] < m - r + i {
                comb[i] += 1;
                for j in i + 1..r {
                    comb[j] = comb[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `c₂^{(p)}(G) = [Ψ_G]_p / p² mod p` by counting zeros of `Ψ_G` over all of
/// `F_p^{|E|}`.
pub fn c2_brute(g: &LabeledGraph, field: PrimeField, budget: u64) -> Result<C2Result, C2Error> {
    check_graph(g)?;
    let matrix = DodgsonMatrix::new(g, &DodgsonSpec::kirchhoff(), field)?;
    let n = g.edge_count();
    let count = count_zeros(n, field, budget, Vec::new, |pt, scratch| {
        matrix.eval_with(pt, scratch)
    })?;
    let p = field.modulus();
    let p2 = p * p;
    Ok(C2Result {
        p,
        method: Method::Brute,
        value: (count / p2) % p,
        valid: count % p2 == 0,
        edge_choice: Vec::new(),
        diagnostics: Diagnostics {
            point_count: Some(count),
            evaluations: Some(p.pow(n as u32)),
            ..Default::default()
        },
    })
}

/// c₂ from one of the three Dodgson-product formulas, by counting the
/// zeros of the product over `F_p^N`, `N = |E| - #chosen edges`.
///
/// For formula 3 both relative signs between the two products are
/// counted. The reported value uses the sign that makes the minors true
/// signed cofactors: a raw minor with rows `I` and columns `J` removed
/// carries `(-1)^{ΣI + ΣJ}`.
pub fn c2_formula(
    g: &LabeledGraph,
    field: PrimeField,
    which: u8,
    edges: Option<&[EdgeId]>,
    budget: u64,
) -> Result<C2Result, C2Error> {
    check_formula_graph(g)?;
    let method = Method::formula(which)?;
    let edges = match edges {
        Some(e) => e.to_vec(),
        None => default_edge_choice(g, which)?,
    };
    check_edges(g, which, &edges)?;
    let specs = formula_factors(which, &edges)?;
    let vars = check_degrees(g, which, &specs)?;
    let matrices: Vec<DodgsonMatrix> = specs
        .iter()
        .map(|s| DodgsonMatrix::new(g, s, field))
        .collect::<Result<_, _>>()?;
    let var_edges: Vec<EdgeId> = (0..g.edge_count()).filter(|e| !edges.contains(e)).collect();
    let m = g.edge_count();
    let f = field;
    let p = field.modulus();
    let to_full = |pt: &[u64], full: &mut Vec<u64>| {
        full.clear();
        full.resize(m, 0);
        for (i, &e) in var_edges.iter().enumerate() {
            full[e] = pt[i];
        }
    };
    let init = || (Vec::<u64>::new(), Vec::<u64>::new());
    let mut diagnostics = Diagnostics {
        evaluations: Some(p.pow(vars as u32)),
        ..Default::default()
    };
    let count = if which < 3 {
        count_zeros(vars, field, budget, init, |pt, (full, scratch)| {
            to_full(pt, full);
            let a = matrices[0].eval_with(full, scratch);
            if a == 0 {
                return 0;
            }
            f.mul(a, matrices[1].eval_with(full, scratch))
        })?
    } else {
        let [minus, plus] = formula3_counts(&matrices, vars, field, budget, &to_full)?;
        diagnostics.sign_variant_counts = Some([minus, plus]);
        let sigma = formula3_sigma(&specs);
        // cofactor convention: ⁵Ψ = AB − (−1)^σ CD
        if sigma.is_multiple_of(2) {
            minus
        } else {
            plus
        }
    };
    diagnostics.point_count = Some(count);
    let residue = count % p;
    let value = if which == 2 { residue } else { f.neg(residue) };
    Ok(C2Result {
        p,
        method,
        value,
        valid: true,
        edge_choice: edges,
        diagnostics,
    })
}

/// Parity source for the relative sign of the two products of formula 3:
/// a raw minor with rows `I` and columns `J` removed differs from the
/// signed cofactor by `(-1)^{ΣI + ΣJ}`.
pub(crate) fn formula3_sigma(specs: &[DodgsonSpec]) -> usize {
    specs
        .iter()
        .map(|s| s.i.iter().chain(&s.j).sum::<usize>())
        .sum()
}

fn formula3_counts(
    matrices: &[DodgsonMatrix],
    vars: usize,
    field: PrimeField,
    budget: u64,
    to_full: &(dyn Fn(&[u64], &mut Vec<u64>) + Sync),
) -> Result<[u64; 2], C2Error> {
    let f = field;
    const SHIFT: u32 = 32;
    let eval_pair = |pt: &[u64], full: &mut Vec<u64>, scratch: &mut Vec<u64>| {
        to_full(pt, full);
        let ab = f.mul(
            matrices[0].eval_with(full, scratch),
            matrices[1].eval_with(full, scratch),
        );
        let cd = f.mul(
            matrices[2].eval_with(full, scratch),
            matrices[3].eval_with(full, scratch),
        );
        (ab, cd)
    };
    let points = (field.modulus() as u128).checked_pow(vars as u32);
    if points.is_none_or(|n| n >> SHIFT != 0) {
        // a packed half could overflow: one pass per sign
        let pass = |sign_plus: bool| {
            count::sum_over_points(
                vars,
                field,
                budget,
                || (Vec::<u64>::new(), Vec::<u64>::new()),
                |pt, (full, scratch)| {
                    let (ab, cd) = eval_pair(pt, full, scratch);
                    let v = if sign_plus {
                        f.add(ab, cd)
                    } else {
                        f.sub(ab, cd)
                    };
                    u64::from(v == 0)
                },
            )
        };
        return Ok([pass(false)?, pass(true)?]);
    }
    // Pack both zero indicators into one count: low half for AB − CD,
    // high half for AB + CD.
    let packed = count::sum_over_points(
        vars,
        field,
        budget,
        || (Vec::<u64>::new(), Vec::<u64>::new()),
        |pt, (full, scratch)| {
            let (ab, cd) = eval_pair(pt, full, scratch);
            u64::from(f.sub(ab, cd) == 0) | u64::from(f.add(ab, cd) == 0) << SHIFT
        },
    )?;
    Ok([packed & ((1 << SHIFT) - 1), packed >> SHIFT])
}
