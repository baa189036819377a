//! Bounded-support monomials and their evaluation on a class.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hclass::HypothesisClass;

/// Default cap on the number of monomials enumerated at once.
pub const DEFAULT_MONOMIAL_BUDGET: u128 = 1 << 16;

/// Exponent vector of `w_1^a_1 ⋯ w_n^a_n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub alpha: Vec<u32>,
}

impl Monomial {
    /// Coordinates whose exponent is at least `ell`.
    pub fn support_ge(&self, ell: usize) -> usize {
        self.alpha.iter().filter(|&&a| a as usize >= ell).count()
    }

    /// Value on one label vector.
    pub fn eval(&self, row: &[u32]) -> BigUint {
        self.alpha.iter().zip(row).fold(BigUint::from(1u32), |acc, (&a, &w)| acc * BigUint::from(w).pow(a))
    }
}

/// Number of labels realized at each coordinate.
pub fn alphabet_sizes(w: &HypothesisClass) -> Vec<usize> {
    (0..w.n()).map(|i| w.labels_at(i).len()).collect()
}

/// `|M^ℓ_s(W)|` without enumerating it.
pub fn monomial_count(w: &HypothesisClass, ell: usize, s: usize) -> u128 {
    // by[j] = number of exponent prefixes with exactly j high coordinates
    let mut by = vec![0u128; s + 1];
    by[0] = 1;
    for k in alphabet_sizes(w) {
        let low = ell.min(k) as u128;
        let high = k.saturating_sub(ell) as u128;
        for j in (0..=s).rev() {
            let keep = by[j].saturating_mul(low);
            let step = if j > 0 { by[j - 1].saturating_mul(high) } else { 0 };
            by[j] = keep.saturating_add(step);
        }
    }
    by.into_iter().fold(0u128, u128::saturating_add)
}

/// `M^ℓ_s(W)`: exponents `0 ≤ a_i < k_i`, with `k_i` the number of labels
/// realized at coordinate `i`, and at most `s` exponents `≥ ℓ`.
///
/// Lexicographic order of exponent vectors.
pub fn monomial_set(w: &HypothesisClass, ell: usize, s: usize, budget: u128) -> Result<Vec<Monomial>> {
    if ell == 0 {
        return Err(Error::InvalidParameter("list size must be at least 1".into()));
    }
    if s > w.n() {
        return Err(Error::InvalidParameter(format!("support bound {s} exceeds the {} coordinates", w.n())));
    }
    let needed = monomial_count(w, ell, s);
    if needed > budget {
        return Err(Error::BudgetExceeded { what: "monomial set size", needed, cap: budget });
    }
    let sizes = alphabet_sizes(w);
    let mut out = Vec::with_capacity(needed as usize);
    let mut alpha = Vec::with_capacity(w.n());
    fill(&sizes, ell, s, &mut alpha, &mut out);
    Ok(out)
}

fn fill(sizes: &[usize], ell: usize, budget: usize, alpha: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    let i = alpha.len();
    if i == sizes.len() {
        out.push(Monomial { alpha: alpha.clone() });
        return;
    }
    for a in 0..sizes[i] {
        let high = a >= ell;
        if high && budget == 0 {
            break;
        }
        alpha.push(a as u32);
        fill(sizes, ell, budget - high as usize, alpha, out);
        alpha.pop();
    }
}

/// Monomials evaluated on every hypothesis: one row per monomial, one column per hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalMatrix {
    pub monomials: Vec<Monomial>,
    pub entries: Vec<Vec<BigUint>>,
}

impl EvalMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }
}

pub fn eval_matrix(w: &HypothesisClass, monomials: &[Monomial]) -> Result<EvalMatrix> {
    if let Some(m) = monomials.iter().find(|m| m.alpha.len() != w.n()) {
        return Err(Error::InvalidParameter(format!(
            "monomial of arity {} on a class with {} coordinates",
            m.alpha.len(),
            w.n()
        )));
    }
    let entries = monomials.par_iter().map(|m| w.rows().iter().map(|row| m.eval(row)).collect()).collect();
    Ok(EvalMatrix { monomials: monomials.to_vec(), entries })
}
