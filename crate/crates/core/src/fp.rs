//! Arithmetic and dense linear algebra over a prime field F_p chosen at runtime.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest accepted modulus. Residues stay below 2³¹, so products fit in u64.
pub const MAX_PRIME: u64 = (1 << 31) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FpError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported maximum {MAX_PRIME}")]
    TooLarge(u64),
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operands live over different fields (p={0} and p={1})")]
    ModulusMismatch(u64, u64),
}

/// Handle for F_p. Cheap to copy; all arithmetic goes through it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    p: u64,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FpError> {
        if p > MAX_PRIME {
            return Err(FpError::TooLarge(p));
        }
        if !is_prime(p) {
            return Err(FpError::NotPrime(p));
        }
        Ok(Self { p })
    }

    pub fn modulus(self) -> u64 {
        self.p
    }

    pub fn reduce(self, x: u64) -> u64 {
        x % self.p
    }

    pub fn from_i64(self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(self, a: u64) -> u64 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero in F_{}", self.p);
        self.pow(a, self.p - 2)
    }

    pub fn element(self, x: u64) -> FpElement {
        FpElement {
            residue: x % self.p,
            modulus: self.p,
        }
    }
}

/// A residue together with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpElement {
    residue: u64,
    modulus: u64,
}

impl FpElement {
    pub fn residue(self) -> u64 {
        self.residue
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.residue == 0
    }
}

impl fmt::Display for FpElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.residue)
    }
}

/// Dense row-major matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
    field: PrimeField,
}

impl FpMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
            field,
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % field.modulus();
        }
        m
    }

    /// Builds a matrix from rows of arbitrary integers, reducing mod p.
    pub fn from_rows(field: PrimeField, rows: &[Vec<i64>]) -> Result<Self, FpError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(FpError::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend(r.iter().map(|&x| field.from_i64(x)));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
            field,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: u64) {
        self.data[r * self.cols + c] = self.field.reduce(value);
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn det(&self) -> Result<FpElement, FpError> {
        if self.rows != self.cols {
            return Err(FpError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut a = self.data.clone();
        Ok(self
            .field
            .element(det_in_place(self.field, &mut a, self.rows)))
    }

    pub fn mat_vec(&self, v: &[u64]) -> Result<Vec<u64>, FpError> {
        if v.len() != self.cols {
            return Err(FpError::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let f = self.field;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect())
    }

    pub fn mul(&self, other: &FpMatrix) -> Result<FpMatrix, FpError> {
        if self.field != other.field {
            return Err(FpError::ModulusMismatch(
                self.field.modulus(),
                other.field.modulus(),
            ));
        }
        if self.cols != other.rows {
            return Err(FpError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = FpMatrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, mut exp: u64) -> Result<FpMatrix, FpError> {
        if self.rows != self.cols {
            return Err(FpError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut acc = FpMatrix::identity(self.field, self.rows);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }
}

/// Determinant of the `n`×`n` row-major matrix `a` by pivoted Gaussian
/// elimination. Destroys `a`.
pub(crate) fn det_in_place(f: PrimeField, a: &mut [u64], n: usize) -> u64 {
    let mut det = 1 % f.modulus();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| a[r * n + col] != 0) else {
            return 0;
        };
        if pivot != col {
            for c in col..n {
                a.swap(pivot * n + c, col * n + c);
            }
            det = f.neg(det);
        }
        let pv = a[col * n + col];
        det = f.mul(det, pv);
        let inv = f.inv(pv);
        for r in col + 1..n {
            let factor = a[r * n + col];
            if factor == 0 {
                continue;
            }
            let scale = f.mul(factor, inv);
            for c in col..n {
                let sub = f.mul(scale, a[col * n + c]);
                a[r * n + c] = f.sub(a[r * n + c], sub);
            }
        }
    }
    det
}

/// The orbit of a vector under repeated multiplication, split into a
/// transient part and a cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub preperiod: Vec<Vec<u64>>,
    pub period: Vec<Vec<u64>>,
}

impl Orbit {
    /// The vector `m^n v0`.
    pub fn at(&self, n: usize) -> &[u64] {
        if n < self.preperiod.len() {
            &self.preperiod[n]
        } else {
            &self.period[(n - self.preperiod.len()) % self.period.len()]
        }
    }
}

/// Iterates `v ↦ m v` from `v0` until a vector repeats. The returned
/// preperiod and period lengths are minimal.
pub fn iterate_until_periodic(m: &FpMatrix, v0: &[u64]) -> Result<Orbit, FpError> {
    if m.rows != m.cols {
        return Err(FpError::NonSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if v0.len() != m.cols {
        return Err(FpError::DimensionMismatch(format!(
            "start vector of length {} for a {}x{} matrix",
            v0.len(),
            m.rows,
            m.cols
        )));
    }
    let f = m.field;
    let start: Vec<u64> = v0.iter().map(|&x| f.reduce(x)).collect();
    iterate_until_periodic_with(start, |v| m.mat_vec(v))
}

/// [`iterate_until_periodic`] for a map given as a closure, e.g. a sparse
/// matrix. The map must be deterministic.
pub fn iterate_until_periodic_with<F>(v0: Vec<u64>, mut step: F) -> Result<Orbit, FpError>
where
    F: FnMut(&[u64]) -> Result<Vec<u64>, FpError>,
{
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut orbit: Vec<Vec<u64>> = Vec::new();
    let mut v = v0;
    loop {
        if let Some(&start) = seen.get(&v) {
            let period = orbit.split_off(start);
            return Ok(Orbit {
                preperiod: orbit,
                period,
            });
        }
        seen.insert(v.clone(), orbit.len());
        let next = step(&v)?;
        orbit.push(std::mem::replace(&mut v, next));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn cofactor_det(field: PrimeField, m: &[Vec<u64>]) -> u64 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        let mut total = 0;
        for c in 0..n {
            let minor: Vec<Vec<u64>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != c)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let term = field.mul(m[0][c], cofactor_det(field, &minor));
            total = if c % 2 == 0 {
                field.add(total, term)
            } else {
                field.sub(total, term)
            };
        }
        total
    }

    fn matrix(field: PrimeField, rows: &[Vec<u64>]) -> FpMatrix {
        let signed: Vec<Vec<i64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| x as i64).collect())
            .collect();
        FpMatrix::from_rows(field, &signed).unwrap()
    }

    #[test]
    fn field_construction() {
        assert!(PrimeField::new(2).is_ok());
        assert!(PrimeField::new(MAX_PRIME).is_ok());
        assert_eq!(PrimeField::new(4), Err(FpError::NotPrime(4)));
        assert_eq!(PrimeField::new(1), Err(FpError::NotPrime(1)));
        assert_eq!(PrimeField::new(1 << 31), Err(FpError::TooLarge(1 << 31)));
    }

    #[test]
    fn inverse_and_negation() {
        let k = f(7);
        for a in 1..7 {
            assert_eq!(k.mul(a, k.inv(a)), 1);
            assert_eq!(k.add(a, k.neg(a)), 0);
        }
        assert_eq!(k.from_i64(-1), 6);
    }

    #[test]
    fn det_examples() {
        assert_eq!(FpMatrix::identity(f(5), 3).det().unwrap().residue(), 1);
        let singular = matrix(f(5), &[vec![1, 2], vec![1, 2]]);
        assert_eq!(singular.det().unwrap().residue(), 0);
        let m = FpMatrix::zeros(f(5), 2, 3);
        assert!(matches!(m.det(), Err(FpError::NonSquare { .. })));
        assert_eq!(FpMatrix::zeros(f(3), 0, 0).det().unwrap().residue(), 1);
    }

    #[test]
    fn mat_vec_examples() {
        let k = f(2);
        let m = matrix(k, &[vec![1, 1], vec![0, 1]]);
        assert_eq!(m.mat_vec(&[1, 1]).unwrap(), vec![0, 1]);
        assert_eq!(
            FpMatrix::identity(k, 2).mat_vec(&[1, 0]).unwrap(),
            vec![1, 0]
        );
        assert_eq!(
            FpMatrix::zeros(k, 2, 2).mat_vec(&[1, 1]).unwrap(),
            vec![0, 0]
        );
        assert!(m.mat_vec(&[1]).is_err());
    }

    #[test]
    fn orbit_examples() {
        let k = f(2);
        let id = FpMatrix::identity(k, 2);
        let o = iterate_until_periodic(&id, &[1, 0]).unwrap();
        assert!(o.preperiod.is_empty());
        assert_eq!(o.period, vec![vec![1, 0]]);

        let zero = FpMatrix::zeros(k, 2, 2);
        let o = iterate_until_periodic(&zero, &[1, 1]).unwrap();
        assert_eq!(o.preperiod, vec![vec![1, 1]]);
        assert_eq!(o.period, vec![vec![0, 0]]);

        // (F_{n+1}, F_n) ↦ (F_{n+1}+F_n, F_{n+1}); compare against direct iteration
        let fib = matrix(k, &[vec![1, 1], vec![1, 0]]);
        let o = iterate_until_periodic(&fib, &[1, 1]).unwrap();
        assert!(o.preperiod.is_empty());
        assert_eq!(o.period.len(), 3);
        let (mut a, mut b) = (1u64, 1u64);
        for n in 0..12 {
            assert_eq!(o.at(n), &[a, b]);
            (a, b) = ((a + b) % 2, a);
        }
    }

    fn square(p: u64, n: usize) -> impl Strategy<Value = Vec<Vec<u64>>> {
        prop::collection::vec(prop::collection::vec(0..p, n), n)
    }

    proptest! {
        #[test]
        fn det_matches_cofactor(p in prop::sample::select(vec![2u64, 3, 5, 7]), n in 0usize..5, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let k = f(p);
            let rows: Vec<Vec<u64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..p)).collect()).collect();
            let m = matrix(k, &rows);
            prop_assert_eq!(m.det().unwrap().residue(), cofactor_det(k, &rows));
        }

        #[test]
        fn det_is_multiplicative(a in square(3, 4), b in square(3, 4)) {
            let k = f(3);
            let (ma, mb) = (matrix(k, &a), matrix(k, &b));
            let prod = ma.mul(&mb).unwrap();
            let lhs = prod.det().unwrap().residue();
            let rhs = k.mul(ma.det().unwrap().residue(), mb.det().unwrap().residue());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn orbit_is_consistent(a in square(3, 3), v in prop::collection::vec(0u64..3, 3)) {
            let k = f(3);
            let m = matrix(k, &a);
            let o = iterate_until_periodic(&m, &v).unwrap();
            prop_assert!(!o.period.is_empty());
            let seq: Vec<&Vec<u64>> = o.preperiod.iter().chain(o.period.iter()).collect();
            for w in seq.windows(2) {
                prop_assert_eq!(&m.mat_vec(w[0]).unwrap(), w[1]);
            }
            prop_assert_eq!(&m.mat_vec(seq[seq.len() - 1]).unwrap(), &o.period[0]);
            // minimality: all listed vectors are distinct
            let mut all: Vec<&Vec<u64>> = seq.clone();
            all.sort();
            all.dedup();
            prop_assert_eq!(all.len(), seq.len());
        }
    }
}
