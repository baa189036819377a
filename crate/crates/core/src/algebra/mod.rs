//! Monomial spanning sets, exact ranks and the direction-subspace argument.

mod audit;
mod monomial;
pub mod prime;
mod rank;

pub use audit::{audit_theorem, AuditChecks, AuditOptions, AuditReport, BasisCount, SpanningRecord, Verdict};
pub use monomial::{
    alphabet_sizes, eval_matrix, monomial_count, monomial_set, EvalMatrix, Monomial, DEFAULT_MONOMIAL_BUDGET,
};
pub use rank::{bareiss_rank, independent_rows, modular_rank, rank_exact, RankPath, RankResult, DEFAULT_RANK_SEED};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hclass::HypothesisClass;
use crate::oig::build_oig;

/// Outcome of testing whether `M^ℓ_s(W)` spans all functions on `W`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spanning {
    pub spans: bool,
    pub rank: usize,
    pub size: usize,
    pub monomials: usize,
    pub rank_info: RankResult,
}

pub fn check_spanning(w: &HypothesisClass, ell: usize, s: usize, budget: u128, seed: u64) -> Result<Spanning> {
    let monomials = monomial_set(w, ell, s, budget)?;
    let m = eval_matrix(w, &monomials)?;
    let rank_info = rank_exact(&m.entries, seed);
    Ok(Spanning {
        spans: rank_info.rank == w.len(),
        rank: rank_info.rank,
        size: w.len(),
        monomials: monomials.len(),
        rank_info,
    })
}

/// Dimension of the space of functions that are a polynomial of degree
/// below `ℓ` in coordinate `dir` along every edge of that direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceDim {
    /// `Σ_a min(ℓ, |e_a|)` over the edges of the direction.
    pub formula: usize,
    /// Rank of the stacked per-edge Vandermonde columns.
    pub rank: usize,
}

impl SubspaceDim {
    pub fn agrees(&self) -> bool {
        self.formula == self.rank
    }
}

fn check_dir(w: &HypothesisClass, dir: usize) -> Result<()> {
    if dir >= w.n() {
        return Err(Error::CoordOutOfRange { index: dir, n: w.n() });
    }
    Ok(())
}

/// `z^p` on the members of one edge, zero elsewhere, for `p < ℓ`.
fn edge_vandermonde(w: &HypothesisClass, dir: usize, members: &[usize], ell: usize) -> Vec<Vec<BigUint>> {
    (0..ell as u32)
        .map(|p| {
            let mut v = vec![BigUint::from(0u32); w.len()];
            for &m in members {
                v[m] = BigUint::from(w.row(m)[dir]).pow(p);
            }
            v
        })
        .collect()
}

/// Dimension of the direction-`dir` subspace (0-based direction).
pub fn direction_subspace_dim(w: &HypothesisClass, dir: usize, ell: usize, seed: u64) -> Result<SubspaceDim> {
    check_dir(w, dir)?;
    let g = build_oig(w);
    let mut formula = 0;
    let mut rows = Vec::new();
    for e in g.direction(dir) {
        formula += ell.min(e.len());
        rows.extend(edge_vandermonde(w, dir, &e.members, ell));
    }
    Ok(SubspaceDim { formula, rank: rank_exact(&rows, seed).rank })
}

/// Whether `values` restricted to each direction-`dir` edge is a polynomial
/// of degree below `ℓ` in that coordinate's label.
pub fn in_direction_subspace(w: &HypothesisClass, dir: usize, ell: usize, values: &[BigUint]) -> Result<bool> {
    check_dir(w, dir)?;
    if values.len() != w.len() {
        return Err(Error::InvalidParameter(format!("{} values for {} hypotheses", values.len(), w.len())));
    }
    let g = build_oig(w);
    for e in g.direction(dir) {
        let restrict = |v: &[BigUint]| -> Vec<BigUint> { e.members.iter().map(|&m| v[m].clone()).collect() };
        let mut system: Vec<Vec<BigUint>> =
            edge_vandermonde(w, dir, &e.members, ell).iter().map(|r| restrict(r)).collect();
        let base = bareiss_rank(&system);
        system.push(restrict(values));
        if bareiss_rank(&system) != base {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-direction tally for a basis `B ⊆ M^ℓ_s(W)` of all functions on `W`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionCount {
    /// Basis monomials with exponent `≥ ℓ` in this direction.
    pub high: usize,
    /// `Σ_a (|e_a| − ℓ)_+` over the direction's edges.
    pub excess: usize,
    pub subspace: SubspaceDim,
    /// Every low basis monomial passed the membership test.
    pub low_in_subspace: bool,
}

impl DirectionCount {
    pub fn holds(&self) -> bool {
        self.high >= self.excess && self.subspace.agrees() && self.low_in_subspace
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisCounting {
    pub s: usize,
    pub basis: Vec<Monomial>,
    pub directions: Vec<DirectionCount>,
}

impl BasisCounting {
    pub fn holds(&self) -> bool {
        self.directions.iter().all(DirectionCount::holds)
    }
}

/// Extracts a basis from `M^ℓ_s(W)` (first independent monomials in
/// lexicographic order) and tallies it direction by direction.
///
/// Returns `None` when `M^ℓ_s(W)` does not span.
pub fn basis_counting(
    w: &HypothesisClass,
    ell: usize,
    s: usize,
    budget: u128,
    seed: u64,
) -> Result<Option<BasisCounting>> {
    let monomials = monomial_set(w, ell, s, budget)?;
    let m = eval_matrix(w, &monomials)?;
    let (chosen, rank) = independent_rows(&m.entries, seed);
    if rank.rank < w.len() {
        return Ok(None);
    }
    let g = build_oig(w);
    let mut directions = Vec::with_capacity(w.n());
    for dir in 0..w.n() {
        let mut high = 0;
        let mut low_in_subspace = true;
        for &b in &chosen {
            if m.monomials[b].alpha[dir] as usize >= ell {
                high += 1;
            } else if low_in_subspace {
                low_in_subspace = in_direction_subspace(w, dir, ell, &m.entries[b])?;
            }
        }
        let excess = g.direction(dir).map(|e| e.len().saturating_sub(ell)).sum();
        directions.push(DirectionCount {
            high,
            excess,
            subspace: direction_subspace_dim(w, dir, ell, seed)?,
            low_in_subspace,
        });
    }
    Ok(Some(BasisCounting { s, basis: chosen.into_iter().map(|i| m.monomials[i].clone()).collect(), directions }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dims::ds_dimension;
    use crate::hclass::{full_cube, gen_random};
    use crate::oig::density;
    use proptest::prelude::*;

    const B: u128 = u128::MAX;

    #[test]
    fn spanning_examples() {
        let sq = full_cube(2, 2).unwrap();
        let r = check_spanning(&sq, 1, 0, B, 1).unwrap();
        assert_eq!((r.spans, r.rank, r.size), (false, 1, 4));
        assert!(check_spanning(&sq, 1, 2, B, 1).unwrap().spans);
        // full tensor Vandermonde
        for (k, n) in [(2, 3), (3, 2), (3, 3)] {
            let c = full_cube(k, n).unwrap();
            let r = check_spanning(&c, 1, n, B, 7).unwrap();
            assert_eq!(r.rank, (k as usize).pow(n as u32));
        }
    }

    #[test]
    fn subspace_examples() {
        let line = full_cube(3, 1).unwrap();
        assert_eq!(direction_subspace_dim(&line, 0, 1, 1).unwrap(), SubspaceDim { formula: 1, rank: 1 });
        assert_eq!(direction_subspace_dim(&line, 0, 2, 1).unwrap(), SubspaceDim { formula: 2, rank: 2 });
        let sq = full_cube(2, 2).unwrap();
        assert_eq!(direction_subspace_dim(&sq, 0, 1, 1).unwrap(), SubspaceDim { formula: 2, rank: 2 });
        assert!(direction_subspace_dim(&sq, 2, 1, 1).is_err());
    }

    #[test]
    fn membership_examples() {
        let line = full_cube(3, 1).unwrap();
        let v = |xs: [u32; 3]| xs.map(BigUint::from).to_vec();
        assert!(in_direction_subspace(&line, 0, 1, &v([5, 5, 5])).unwrap());
        assert!(!in_direction_subspace(&line, 0, 1, &v([1, 2, 3])).unwrap());
        assert!(in_direction_subspace(&line, 0, 2, &v([1, 2, 3])).unwrap());
        assert!(!in_direction_subspace(&line, 0, 2, &v([1, 4, 9])).unwrap());
    }

    fn small_class() -> impl Strategy<Value = HypothesisClass> {
        (2u32..5, 1usize..4, 1usize..14, any::<u64>())
            .prop_map(|(k, n, size, seed)| gen_random(k, n, size.min((k as usize).pow(n as u32)), seed).unwrap())
    }

    proptest! {
        #[test]
        fn spanning_at_ds_dimension(w in small_class(), ell in 1usize..4) {
            let s = ds_dimension(&w, ell).value;
            prop_assert!(check_spanning(&w, ell, s, B, 3).unwrap().spans);
        }

        #[test]
        fn subspace_formula(w in small_class(), ell in 1usize..4, seed: u64) {
            for dir in 0..w.n() {
                prop_assert!(direction_subspace_dim(&w, dir, ell, seed).unwrap().agrees());
            }
        }

        #[test]
        fn counting_bounds_density(w in small_class(), ell in 1usize..3) {
            let s = ds_dimension(&w, ell).value;
            let c = basis_counting(&w, ell, s, B, 5).unwrap().expect("spans at the DS dimension");
            prop_assert_eq!(c.basis.len(), w.len());
            prop_assert!(c.holds());
            // Σ_i |B^{≥ℓ}_i| ≤ s|W| and each term bounds the direction's excess
            let excess: usize = c.directions.iter().map(|d| d.excess).sum();
            prop_assert!(excess <= s * w.len());
            prop_assert!(density(&w, ell).ratio() <= num_rational::Ratio::from_integer(s as u64));
        }
    }
}
