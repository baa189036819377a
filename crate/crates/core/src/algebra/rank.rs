//! Exact rank of non-negative integer matrices.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::prime::{inv_mod, random_prime_62, sub_mul_mod};

/// Seed used when a caller does not supply one.
pub const DEFAULT_RANK_SEED: u64 = 0x5eed_cafe;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankPath {
    /// The modular rank was already full, hence exact.
    Modular,
    /// Confirmed by fraction-free elimination over the integers.
    Bareiss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankResult {
    pub rank: usize,
    pub modular_rank: usize,
    pub prime: u64,
    pub seed: u64,
    pub path: RankPath,
}

fn reduce(rows: &[Vec<BigUint>], p: u64) -> Vec<Vec<u64>> {
    let modulus = BigUint::from(p);
    rows.iter().map(|r| r.iter().map(|x| (x % &modulus).to_u64().expect("reduced below p")).collect()).collect()
}

/// Row echelon form mod `p`; returns the rows that produced pivots, in input order.
fn modular_pivot_rows(rows: &[Vec<BigUint>], p: u64) -> Vec<usize> {
    let cols = rows.first().map_or(0, Vec::len);
    // reduced basis rows, each with its pivot column, normalized to pivot 1
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut chosen = Vec::new();
    for (idx, mut row) in reduce(rows, p).into_iter().enumerate() {
        for (pc, b) in &basis {
            let f = row[*pc];
            if f != 0 {
                for c in 0..cols {
                    row[c] = sub_mul_mod(row[c], f, b[c], p);
                }
            }
        }
        if let Some(pc) = row.iter().position(|&x| x != 0) {
            let inv = inv_mod(row[pc], p);
            for x in row.iter_mut() {
                *x = (*x as u128 * inv as u128 % p as u128) as u64;
            }
            basis.push((pc, row));
            chosen.push(idx);
            if basis.len() == cols {
                break;
            }
        }
    }
    chosen
}

/// Rank modulo `p`, a lower bound on the rational rank.
pub fn modular_rank(rows: &[Vec<BigUint>], p: u64) -> usize {
    modular_pivot_rows(rows, p).len()
}

/// Rational rank by fraction-free (Bareiss) elimination.
pub fn bareiss_rank(rows: &[Vec<BigUint>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|x| BigInt::from(x.clone())).collect()).collect();
    let n_rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::from(1);
    let mut r = 0;
    for c in 0..cols {
        if r == n_rows {
            break;
        }
        let Some(pivot) = (r..n_rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, pivot);
        let (top, rest) = a.split_at_mut(r + 1);
        let prow = &top[r];
        for row in rest.iter_mut() {
            for j in c + 1..cols {
                // every entry stays an integer minor, so the division is exact
                row[j] = (&prow[c] * &row[j] - &row[c] * &prow[j]) / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = prow[c].clone();
        r += 1;
    }
    r
}

/// Rank over the rationals.
///
/// Computed modulo a random 62-bit prime drawn from `seed`. A modular rank
/// below `min(rows, cols)` is confirmed by exact elimination.
pub fn rank_exact(rows: &[Vec<BigUint>], seed: u64) -> RankResult {
    let prime = random_prime_62(&mut ChaCha8Rng::seed_from_u64(seed));
    let modular = modular_rank(rows, prime);
    let full = rows.len().min(rows.first().map_or(0, Vec::len));
    if modular == full {
        RankResult { rank: modular, modular_rank: modular, prime, seed, path: RankPath::Modular }
    } else {
        RankResult { rank: bareiss_rank(rows), modular_rank: modular, prime, seed, path: RankPath::Bareiss }
    }
}

/// Greedy maximal independent subset of rows, scanning in input order.
///
/// Independence mod a prime implies rational independence, so the result is
/// certified independent; it is retried with fresh primes until its size
/// equals the exact rank.
pub fn independent_rows(rows: &[Vec<BigUint>], seed: u64) -> (Vec<usize>, RankResult) {
    let exact = rank_exact(rows, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prime = random_prime_62(&mut rng);
    loop {
        let chosen = modular_pivot_rows(rows, prime);
        if chosen.len() == exact.rank {
            return (chosen, exact);
        }
        prime = random_prime_62(&mut rng);
    }
}
