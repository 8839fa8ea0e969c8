//! Exhaustive point counting over F_p^N.
//!
//! The first `c` coordinates select a chunk (`p^c ≥ 256` chunks, or all
//! coordinates when N is small); chunks run in parallel and the remaining
//! coordinates are walked with an odometer. Totals do not depend on the
//! thread count.

use rayon::prelude::*;

use super::C2Error;
use crate::fp::PrimeField;

/// Default cap on the number of evaluations: 2²⁶.
pub const DEFAULT_BUDGET: u64 = 1 << 26;

const MIN_CHUNKS: u64 = 256;

fn total_points(p: u64, n: usize, budget: u64) -> Result<u64, C2Error> {
    let needed = (p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(C2Error::BudgetExceeded { needed, budget });
    }
    Ok(needed as u64)
}

/// `Σ_x visit(x)` over all `x ∈ F_p^n`. `init` builds per-worker scratch.
pub(crate) fn sum_over_points<S, I, F>(
    n: usize,
    field: PrimeField,
    budget: u64,
    init: I,
    visit: F,
) -> Result<u64, C2Error>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&[u64], &mut S) -> u64 + Sync + Send,
{
    let p = field.modulus();
    total_points(p, n, budget)?;
    let mut c = 0;
    let mut chunks = 1u64;
    while c < n && chunks < MIN_CHUNKS {
        chunks *= p;
        c += 1;
    }
    let total = (0..chunks)
        .into_par_iter()
        .map_init(
            || (init(), vec![0u64; n]),
            |(scratch, pt), chunk| {
                let mut idx = chunk;
                for x in pt.iter_mut().take(c) {
                    *x = idx % p;
                    idx /= p;
                }
                for x in pt.iter_mut().skip(c) {
                    *x = 0;
                }
                let mut acc = 0u64;
                loop {
                    acc += visit(pt, scratch);
                    // odometer over coordinates c..n
                    let mut i = c;
                    loop {
                        if i == n {
                            return acc;
                        }
                        pt[i] += 1;
                        if pt[i] < p {
                            break;
                        }
                        pt[i] = 0;
                        i += 1;
                    }
                }
            },
        )
        .sum();
    Ok(total)
}

/// Number of points of F_p^n where `eval` returns 0.
pub fn count_zeros<S, I, F>(
    n: usize,
    field: PrimeField,
    budget: u64,
    init: I,
    eval: F,
) -> Result<u64, C2Error>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&[u64], &mut S) -> u64 + Sync + Send,
{
    sum_over_points(n, field, budget, init, |pt, s| u64::from(eval(pt, s) == 0))
}

/// `[F]_p` for an evaluator of `F` on `F_p^n`.
pub fn count_points<F>(eval: F, n: usize, field: PrimeField, budget: u64) -> Result<u64, C2Error>
where
    F: Fn(&[u64]) -> u64 + Sync + Send,
{
    count_zeros(n, field, budget, || (), |pt, _| eval(pt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let f2 = PrimeField::new(2).unwrap();
        let sum3 = |pt: &[u64]| (pt[0] + pt[1] + pt[2]) % 2;
        assert_eq!(count_points(sum3, 3, f2, 1 << 10).unwrap(), 4);
        let f3 = PrimeField::new(3).unwrap();
        assert_eq!(count_points(|_| 0, 4, f3, 1 << 10).unwrap(), 81);
        assert_eq!(count_points(|_| 1, 4, f3, 1 << 10).unwrap(), 0);
        assert_eq!(count_points(|_| 0, 0, f3, 1).unwrap(), 1);
    }

    #[test]
    fn budget() {
        let f3 = PrimeField::new(3).unwrap();
        assert_eq!(
            count_points(|_| 0, 5, f3, 100),
            Err(C2Error::BudgetExceeded {
                needed: 243,
                budget: 100
            })
        );
    }

    #[test]
    fn product_of_coordinates() {
        // x1·…·xN vanishes unless every coordinate is nonzero
        for (p, n) in [(2u64, 5usize), (3, 4), (5, 3), (7, 4)] {
            let f = PrimeField::new(p).unwrap();
            let count = count_points(
                |pt: &[u64]| pt.iter().fold(1, |a, &x| f.mul(a, x)),
                n,
                f,
                1 << 20,
            )
            .unwrap();
            assert_eq!(count, p.pow(n as u32) - (p - 1).pow(n as u32));
        }
    }
}
