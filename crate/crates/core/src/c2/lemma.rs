//! Checking the coefficient form of the zero count on explicit polynomials.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{count_points, C2Error};
use crate::fp::PrimeField;

/// Sparse polynomial over F_p: exponent vector → nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly {
    vars: usize,
    field: PrimeField,
    terms: BTreeMap<Vec<u32>, u64>,
}

impl SparsePoly {
    pub fn zero(vars: usize, field: PrimeField) -> Self {
        Self {
            vars,
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, field: PrimeField, c: u64) -> Self {
        let mut p = Self::zero(vars, field);
        p.add_term(vec![0; vars], c);
        p
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, coeff: u64) {
        assert_eq!(exponents.len(), self.vars);
        let f = self.field;
        let sum = f.add(
            self.terms.get(&exponents).copied().unwrap_or(0),
            f.reduce(coeff),
        );
        if sum == 0 {
            self.terms.remove(&exponents);
        } else {
            self.terms.insert(exponents, sum);
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, u64> {
        &self.terms
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> u64 {
        self.terms.get(exponents).copied().unwrap_or(0)
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        assert_eq!(self.vars, other.vars);
        let f = self.field;
        let mut out = SparsePoly::zero(self.vars, f);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, f.mul(ca, cb));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> SparsePoly {
        let mut acc = SparsePoly::constant(self.vars, self.field, 1);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, point: &[u64]) -> u64 {
        let f = self.field;
        self.terms.iter().fold(0, |acc, (e, &c)| {
            let term = e
                .iter()
                .zip(point)
                .fold(c, |t, (&k, &x)| f.mul(t, f.pow(x, u64::from(k))));
            f.add(acc, term)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LemmaCheck {
    /// Coefficient of `Π x_i^{p-1}` in `F^{p-1}`, mod p.
    pub coefficient: u64,
    /// Number of zeros of F, mod p.
    pub count_mod_p: u64,
    /// Whether `count ≡ (-1)^{N+1} · coefficient (mod p)`.
    pub holds: bool,
}

/// Compares the coefficient of `Π x_i^{p-1}` in `F^{p-1}` with the zero
/// count `[F]_p`, for `F` of degree N in N variables.
///
/// Summing `1 - F^{p-1}` over F_p^N gives
/// `[F]_p ≡ (-1)^{N+1} · coeff (mod p)`; the sign is invisible when p = 2
/// or N is odd.
pub fn coeff_lemma_check(
    poly: &SparsePoly,
    p: PrimeField,
    budget: u64,
) -> Result<LemmaCheck, C2Error> {
    let n = poly.vars();
    if poly.field != p {
        return Err(C2Error::BadProblem(
            "polynomial lives over a different field".into(),
        ));
    }
    match poly.degree() {
        Some(d) if d as usize == n => {}
        d => {
            return Err(C2Error::DegreeMismatch {
                degree: d.map_or(-1, i64::from),
                vars: n,
            })
        }
    }
    let q = p.modulus();
    let power = poly.pow((q - 1) as u32);
    let coefficient = power.coefficient(&vec![(q - 1) as u32; n]);
    let count = count_points(|pt| poly.eval(pt), n, p, budget)?;
    let count_mod_p = count % q;
    let expected = if n % 2 == 1 {
        coefficient
    } else {
        p.neg(coefficient)
    };
    Ok(LemmaCheck {
        coefficient,
        count_mod_p,
        holds: expected == count_mod_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn monomial(n: usize, field: PrimeField) -> SparsePoly {
        let mut m = SparsePoly::zero(n, field);
        m.add_term(vec![1; n], 1);
        m
    }

    #[test]
    fn product_of_variables() {
        for p in [2, 3, 5] {
            for n in 1..=4 {
                let k = f(p);
                let c = coeff_lemma_check(&monomial(n, k), k, 1 << 20).unwrap();
                assert_eq!(c.coefficient, 1);
                let q = p.pow(n as u32) - (p - 1).pow(n as u32);
                assert_eq!(c.count_mod_p, q % p);
                assert!(c.holds);
            }
        }
    }

    #[test]
    fn sign_shows_for_even_n() {
        // x1·x2 over F_3: coefficient 1, but 9 - 4 = 5 ≡ 2 zeros mod 3
        let k = f(3);
        let c = coeff_lemma_check(&monomial(2, k), k, 100).unwrap();
        assert_eq!((c.coefficient, c.count_mod_p), (1, 2));
        assert!(c.holds);
    }

    #[test]
    fn single_variable() {
        let k = f(2);
        let c = coeff_lemma_check(&monomial(1, k), k, 100).unwrap();
        assert_eq!((c.coefficient, c.count_mod_p), (1, 1));
    }

    #[test]
    fn degree_must_match() {
        let k = f(3);
        let mut g = SparsePoly::zero(3, k);
        g.add_term(vec![1, 1, 0], 1);
        assert!(matches!(
            coeff_lemma_check(&g, k, 1000),
            Err(C2Error::DegreeMismatch { degree: 2, vars: 3 })
        ));
    }

    #[test]
    fn random_polynomials() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..40 {
            let p = if rng.gen_bool(0.5) { 2 } else { 3 };
            let k = f(p);
            let n = rng.gen_range(1..=4);
            let mut poly = SparsePoly::zero(n, k);
            while poly.degree() != Some(n as u32) {
                let mut e = vec![0u32; n];
                for _ in 0..n {
                    e[rng.gen_range(0..n)] += 1;
                }
                poly.add_term(e, rng.gen_range(1..p));
            }
            assert!(coeff_lemma_check(&poly, k, 1 << 16).unwrap().holds);
        }
    }
}
