//! ℓ-DS, ℓ-Natarajan and VC dimensions of finite classes.
//!
//! A coordinate set `S` is ℓ-DS shattered when some non-empty `F ⊆ H|_S` has,
//! for every member and every direction, at least ℓ neighbors in `F` differing
//! only in that direction. Valid subfamilies are closed under union, so the
//! largest one is the fixed point of peeling away any vector that lacks ℓ
//! neighbors in some direction. It does not depend on the peeling order.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, Combinations};
use crate::error::{Error, Result};
use crate::hclass::{HypothesisClass, Label};
use crate::oig::build_oig;

/// Default cap on coordinate subsets examined by a dimension search.
pub const DEFAULT_SUBSET_BUDGET: u128 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    Ds,
    Natarajan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShatterWitness {
    pub kind: WitnessKind,
    pub ell: usize,
    /// 0-based coordinates of the shattered sequence.
    pub coords: Vec<usize>,
    /// Witnessing subfamily of `H|_coords`.
    pub subfamily: HypothesisClass,
}

#[derive(Debug, Clone)]
pub struct Dimension {
    pub value: usize,
    pub witness: Option<ShatterWitness>,
    /// False when the search budget ran out; `value` is then a lower bound.
    pub exact: bool,
}

/// Rows of the unique maximal ℓ-DS valid subfamily of `W`, or an empty list.
pub fn ds_shatter_core(w: &HypothesisClass, ell: usize) -> Vec<usize> {
    let order: Vec<usize> = (0..w.len()).collect();
    ds_shatter_core_in_order(w, ell, &order)
}

/// As [`ds_shatter_core`], visiting candidates for removal in `order`.
pub fn ds_shatter_core_in_order(w: &HypothesisClass, ell: usize, order: &[usize]) -> Vec<usize> {
    assert!(ell >= 1, "list size must be at least 1");
    let graph = build_oig(w);
    let mut alive = vec![true; w.len()];
    let mut count: Vec<usize> = graph.edges().iter().map(|e| e.len()).collect();
    let weak = |v: usize, count: &[usize]| graph.incident(v).iter().any(|&e| count[e] <= ell);
    let mut queue: VecDeque<usize> = order.iter().copied().filter(|&v| weak(v, &count)).collect();
    while let Some(v) = queue.pop_front() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &e in graph.incident(v) {
            count[e] -= 1;
            if count[e] == ell {
                queue.extend(graph.edge(e).members.iter().copied().filter(|&u| alive[u]));
            }
        }
    }
    (0..w.len()).filter(|&v| alive[v]).collect()
}

/// Whether `F` is a valid ℓ-DS witness on its own coordinates.
pub fn is_ds_pseudocube(f: &HypothesisClass, ell: usize) -> bool {
    build_oig(f).edges().iter().all(|e| e.len() > ell)
}

/// Descends through coordinate-set sizes and returns at the first success.
/// On budget exhaustion, falls back to a greedy chain which yields a lower bound.
fn descend<F>(h: &HypothesisClass, budget: u128, mut check: F) -> Dimension
where
    F: FnMut(&[usize]) -> Option<HypothesisClass>,
{
    let mut spent: u128 = 0;
    for d in (1..=h.n()).rev() {
        let cost = binomial(h.n(), d);
        if spent.saturating_add(cost) > budget {
            return greedy_lower_bound(h, check);
        }
        spent += cost;
        for coords in Combinations::new(h.n(), d) {
            if let Some(subfamily) = check(&coords) {
                return Dimension {
                    value: d,
                    witness: Some(ShatterWitness { kind: WitnessKind::Ds, ell: 0, coords, subfamily }),
                    exact: true,
                };
            }
        }
    }
    Dimension { value: 0, witness: None, exact: true }
}

fn greedy_lower_bound<F>(h: &HypothesisClass, mut check: F) -> Dimension
where
    F: FnMut(&[usize]) -> Option<HypothesisClass>,
{
    let mut coords: Vec<usize> = Vec::new();
    let mut witness = None;
    for c in 0..h.n() {
        coords.push(c);
        match check(&coords) {
            Some(f) => witness = Some(f),
            None => {
                coords.pop();
            }
        }
    }
    Dimension {
        value: coords.len(),
        witness: witness.map(|subfamily| ShatterWitness { kind: WitnessKind::Ds, ell: 0, coords, subfamily }),
        exact: false,
    }
}

fn tag(mut dim: Dimension, kind: WitnessKind, ell: usize) -> Dimension {
    if let Some(w) = dim.witness.as_mut() {
        w.kind = kind;
        w.ell = ell;
    }
    dim
}

/// Exact `d^ℓ_DS(H)`.
pub fn ds_dimension(h: &HypothesisClass, ell: usize) -> Dimension {
    ds_dimension_with_budget(h, ell, DEFAULT_SUBSET_BUDGET)
}

pub fn ds_dimension_with_budget(h: &HypothesisClass, ell: usize, budget: u128) -> Dimension {
    assert!(ell >= 1, "list size must be at least 1");
    if ell as u64 >= h.k() as u64 {
        return Dimension { value: 0, witness: None, exact: true };
    }
    let dim = descend(h, budget, |coords| {
        let w = h.project(coords);
        let core = ds_shatter_core(&w, ell);
        (!core.is_empty()).then(|| w.subfamily(core).expect("non-empty core"))
    });
    tag(dim, WitnessKind::Ds, ell)
}

/// Searches `(ℓ+1)`-label lists per coordinate whose product lies inside `w`.
fn find_product(w: &HypothesisClass, ell: usize) -> Option<Vec<Vec<Label>>> {
    let d = w.n();
    let side = ell + 1;
    let volume = side.checked_pow(d as u32)?;
    if volume > w.len() {
        return None;
    }
    // a label can sit in a product list only if it heads at least side^(d-1) rows
    let per_slice = volume / side;
    let candidates: Vec<Vec<Label>> = (0..d)
        .map(|i| {
            w.labels_at(i).into_iter().filter(|&a| w.rows().iter().filter(|r| r[i] == a).count() >= per_slice).collect()
        })
        .collect();
    if candidates.iter().any(|c| c.len() < side) {
        return None;
    }
    let mut chosen: Vec<Vec<Label>> = Vec::with_capacity(d);
    extend_product(w, &candidates, side, &mut chosen).then_some(chosen)
}

fn extend_product(w: &HypothesisClass, cands: &[Vec<Label>], side: usize, chosen: &mut Vec<Vec<Label>>) -> bool {
    let j = chosen.len();
    if j == cands.len() {
        return true;
    }
    for pick in Combinations::new(cands[j].len(), side) {
        let list: Vec<Label> = pick.iter().map(|&p| cands[j][p]).collect();
        chosen.push(list);
        // prefix test: all side^(j+1) prefix patterns must occur among rows in the box
        let patterns: HashSet<&[Label]> = w
            .rows()
            .iter()
            .filter(|r| chosen.iter().enumerate().all(|(i, y)| y.contains(&r[i])))
            .map(|r| &r[..=j])
            .collect();
        if patterns.len() == side.pow(j as u32 + 1) && extend_product(w, cands, side, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn product_rows(lists: &[Vec<Label>]) -> Vec<Vec<Label>> {
    lists.iter().fold(vec![Vec::new()], |acc, list| {
        acc.into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |&a| {
                    let mut row = prefix.clone();
                    row.push(a);
                    row
                })
            })
            .collect()
    })
}

/// Exact `d^ℓ_Nat(H)`. Zero when `ℓ + 1 > k`.
pub fn natarajan_dimension(h: &HypothesisClass, ell: usize) -> Dimension {
    natarajan_dimension_with_budget(h, ell, DEFAULT_SUBSET_BUDGET)
}

pub fn natarajan_dimension_with_budget(h: &HypothesisClass, ell: usize, budget: u128) -> Dimension {
    assert!(ell >= 1, "list size must be at least 1");
    if ell as u64 + 1 > h.k() as u64 {
        return Dimension { value: 0, witness: None, exact: true };
    }
    let dim = descend(h, budget, |coords| {
        let w = h.project(coords);
        find_product(&w, ell).map(|lists| HypothesisClass::from_valid_rows(h.k(), coords.len(), product_rows(&lists)))
    });
    tag(dim, WitnessKind::Natarajan, ell)
}

/// VC dimension of a binary class.
pub fn vc_dimension(h: &HypothesisClass) -> Result<usize> {
    if h.k() != 2 {
        return Err(Error::InvalidParameter(format!("VC dimension needs k = 2, got k = {}", h.k())));
    }
    for d in (1..=h.n()).rev() {
        if Combinations::new(h.n(), d).any(|coords| h.project(&coords).len() == 1 << d) {
            return Ok(d);
        }
    }
    Ok(0)
}

/// Re-checks a witness against `H` under its own definition.
pub fn validate_witness(h: &HypothesisClass, witness: &ShatterWitness) -> Result<()> {
    let fail = |msg: String| Err(Error::InvalidWitness(msg));
    if witness.coords.is_empty() {
        return fail("empty coordinate sequence".into());
    }
    if let Some(&c) = witness.coords.iter().find(|&&c| c >= h.n()) {
        return Err(Error::CoordOutOfRange { index: c, n: h.n() });
    }
    let mut seen = HashSet::new();
    if witness.coords.iter().any(|c| !seen.insert(*c)) {
        return fail("repeated coordinate".into());
    }
    let restricted = h.project(&witness.coords);
    if !restricted.is_superset_of(&witness.subfamily) {
        return fail("subfamily is not contained in the restriction".into());
    }
    match witness.kind {
        WitnessKind::Ds => {
            if !is_ds_pseudocube(&witness.subfamily, witness.ell) {
                return fail(format!("some member has fewer than {} neighbors in a direction", witness.ell));
            }
        }
        WitnessKind::Natarajan => {
            let lists: Vec<Vec<Label>> = (0..witness.subfamily.n()).map(|i| witness.subfamily.labels_at(i)).collect();
            if lists.iter().any(|l| l.len() != witness.ell + 1) {
                return fail(format!("label lists must have size {}", witness.ell + 1));
            }
            if witness.subfamily.len() != lists.iter().map(Vec::len).product::<usize>() {
                return fail("subfamily is not a full product".into());
            }
        }
    }
    Ok(())
}

/// JSON form of a witness; coordinates are 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessFile {
    pub kind: WitnessKind,
    pub ell: usize,
    pub k: Label,
    pub coords: Vec<usize>,
    pub rows: Vec<Vec<Label>>,
}

impl ShatterWitness {
    pub fn to_file(&self) -> WitnessFile {
        WitnessFile {
            kind: self.kind,
            ell: self.ell,
            k: self.subfamily.k(),
            coords: self.coords.iter().map(|c| c + 1).collect(),
            rows: self.subfamily.rows().to_vec(),
        }
    }

    pub fn from_file(file: WitnessFile) -> Result<Self> {
        if file.coords.contains(&0) {
            return Err(Error::InvalidWitness("coordinates are 1-based".into()));
        }
        let subfamily = HypothesisClass::new(file.k, file.coords.len(), file.rows)?;
        Ok(ShatterWitness {
            kind: file.kind,
            ell: file.ell,
            coords: file.coords.iter().map(|c| c - 1).collect(),
            subfamily,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hclass::{full_cube, gen_cube, gen_random, CoordSeq};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn class(k: Label, rows: &[&[Label]]) -> HypothesisClass {
        HypothesisClass::new(k, rows[0].len(), rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    /// Oracle: ℓ-DS shattering of all of `w`'s coordinates by enumerating every
    /// subfamily.
    fn brute_shattered(w: &HypothesisClass, ell: usize) -> bool {
        (1u64..1 << w.len()).any(|m| {
            let f = w.subfamily((0..w.len()).filter(|&v| m >> v & 1 == 1)).unwrap();
            (0..f.len()).all(|a| {
                (0..f.n()).all(|i| {
                    let nbrs = (0..f.len())
                        .filter(|&b| {
                            f.row(a)[i] != f.row(b)[i] && (0..f.n()).all(|j| j == i || f.row(a)[j] == f.row(b)[j])
                        })
                        .count();
                    nbrs >= ell
                })
            })
        })
    }

    fn brute_ds_dimension(h: &HypothesisClass, ell: usize) -> usize {
        (1..=h.n())
            .rev()
            .find(|&d| Combinations::new(h.n(), d).any(|c| brute_shattered(&h.project(&c), ell)))
            .unwrap_or(0)
    }

    /// Oracle: Natarajan shattering by trying every tuple of (ℓ+1)-lists from [k].
    fn brute_natarajan(h: &HypothesisClass, ell: usize) -> usize {
        let k = h.k() as usize;
        let lists: Vec<Vec<Label>> =
            Combinations::new(k, ell + 1).map(|c| c.iter().map(|&a| a as Label + 1).collect()).collect();
        (1..=h.n())
            .rev()
            .find(|&d| {
                Combinations::new(h.n(), d).any(|coords| {
                    let w = h.project(&coords);
                    let mut idx = vec![0usize; d];
                    loop {
                        let pick: Vec<Vec<Label>> = idx.iter().map(|&i| lists[i].clone()).collect();
                        if product_rows(&pick).iter().all(|r| w.contains(r)) {
                            return true;
                        }
                        let mut p = 0;
                        loop {
                            if p == d {
                                return false;
                            }
                            idx[p] += 1;
                            if idx[p] < lists.len() {
                                break;
                            }
                            idx[p] = 0;
                            p += 1;
                        }
                    }
                })
            })
            .unwrap_or(0)
    }

    #[test]
    fn core_examples() {
        let cube = full_cube(2, 2).unwrap();
        assert_eq!(ds_shatter_core(&cube, 1), vec![0, 1, 2, 3]);

        let corner = class(2, &[&[1, 1], &[1, 2], &[2, 1]]);
        assert!(ds_shatter_core(&corner, 1).is_empty());
        assert!(!brute_shattered(&corner, 1));

        let line = full_cube(3, 1).unwrap();
        assert_eq!(ds_shatter_core(&line, 2), vec![0, 1, 2]);
    }

    #[test]
    fn ds_examples() {
        let cube = full_cube(2, 2).unwrap();
        let d = ds_dimension(&cube, 1);
        assert_eq!(d.value, 2);
        validate_witness(&cube, d.witness.as_ref().unwrap()).unwrap();
        assert_eq!(ds_dimension(&cube, 2).value, 0);
        let c = gen_cube(4, 2, 2, 3).unwrap();
        let d = ds_dimension(&c, 2);
        assert_eq!(d.value, 2);
        assert!(d.exact);
        validate_witness(&c, d.witness.as_ref().unwrap()).unwrap();
    }

    #[test]
    fn natarajan_examples() {
        assert_eq!(natarajan_dimension(&full_cube(2, 2).unwrap(), 1).value, 2);
        let diag = class(2, &[&[1, 1], &[2, 2]]);
        assert_eq!(brute_natarajan(&diag, 1), 1);
        let d = natarajan_dimension(&diag, 1);
        assert_eq!(d.value, 1);
        validate_witness(&diag, d.witness.as_ref().unwrap()).unwrap();
        assert_eq!(natarajan_dimension(&full_cube(2, 2).unwrap(), 2).value, 0);
    }

    #[test]
    fn vc_examples() {
        assert_eq!(vc_dimension(&full_cube(2, 2).unwrap()).unwrap(), 2);
        assert_eq!(vc_dimension(&class(2, &[&[1, 2, 1]])).unwrap(), 0);
        assert!(vc_dimension(&full_cube(3, 1).unwrap()).is_err());
    }

    #[test]
    fn vc_equals_ds_on_all_binary_classes_of_three_points() {
        let cube = full_cube(2, 3).unwrap();
        for mask in 1u32..256 {
            let h = cube.subfamily((0..8).filter(|&v| mask >> v & 1 == 1)).unwrap();
            assert_eq!(vc_dimension(&h).unwrap(), ds_dimension(&h, 1).value, "mask {mask}");
        }
    }

    #[test]
    fn witness_rejections() {
        let cube = full_cube(2, 2).unwrap();
        let bad = ShatterWitness {
            kind: WitnessKind::Ds,
            ell: 1,
            coords: vec![0, 1],
            subfamily: class(2, &[&[1, 1], &[1, 2], &[2, 1]]),
        };
        assert!(validate_witness(&cube, &bad).is_err());
        let outside =
            ShatterWitness { kind: WitnessKind::Ds, ell: 1, coords: vec![0], subfamily: full_cube(3, 1).unwrap() };
        assert!(validate_witness(&cube, &outside).is_err());
        let not_product = ShatterWitness {
            kind: WitnessKind::Natarajan,
            ell: 1,
            coords: vec![0, 1],
            subfamily: class(2, &[&[1, 1], &[2, 2]]),
        };
        assert!(validate_witness(&cube, &not_product).is_err());
    }

    #[test]
    fn witness_file_roundtrip() {
        let c = gen_cube(3, 1, 2, 3).unwrap();
        let w = ds_dimension(&c, 1).witness.unwrap();
        let json = serde_json::to_string(&w.to_file()).unwrap();
        let back = ShatterWitness::from_file(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, w);
        validate_witness(&c, &back).unwrap();
    }

    #[test]
    fn budget_falls_back_to_lower_bound() {
        let c = gen_cube(3, 1, 3, 5).unwrap();
        let d = ds_dimension_with_budget(&c, 1, 3);
        assert!(!d.exact);
        assert_eq!(d.value, 3);
        validate_witness(&c, d.witness.as_ref().unwrap()).unwrap();
        assert_eq!(ds_dimension(&c, 1).value, 3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_class() -> impl Strategy<Value = HypothesisClass> {
            (2u32..5, 1usize..4, 1usize..11, any::<u64>()).prop_map(|(k, n, size, seed)| {
                let size = size.min((k as usize).pow(n as u32));
                gen_random(k, n, size, seed).unwrap()
            })
        }

        proptest! {
            #[test]
            fn core_is_order_independent(w in small_class(), ell in 1usize..3, seed: u64) {
                let base = ds_shatter_core(&w, ell);
                let mut order: Vec<usize> = (0..w.len()).collect();
                order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                prop_assert_eq!(ds_shatter_core_in_order(&w, ell, &order), base.clone());
                prop_assert_eq!(!base.is_empty(), brute_shattered(&w, ell));
            }

            #[test]
            fn dimensions_match_oracles(h in small_class(), ell in 1usize..3) {
                let ds = ds_dimension(&h, ell);
                prop_assert_eq!(ds.value, brute_ds_dimension(&h, ell));
                let nat = natarajan_dimension(&h, ell);
                prop_assert_eq!(nat.value, if ell < h.k() as usize { brute_natarajan(&h, ell) } else { 0 });
                prop_assert!(nat.value <= ds.value);
                if let Some(w) = &ds.witness { validate_witness(&h, w).unwrap(); }
                if let Some(w) = &nat.witness { validate_witness(&h, w).unwrap(); }
            }

            #[test]
            fn ds_monotone(h in small_class(), keep in proptest::collection::vec(any::<bool>(), 3)) {
                let coords: Vec<usize> = (0..h.n()).filter(|&i| keep[i]).collect();
                prop_assume!(!coords.is_empty());
                let r = h.restrict(&CoordSeq::new(coords, h.n()).unwrap()).unwrap();
                for ell in 1..3 {
                    prop_assert!(ds_dimension(&r, ell).value <= ds_dimension(&h, ell).value);
                    prop_assert!(ds_dimension(&h, ell + 1).value <= ds_dimension(&h, ell).value);
                }
            }
        }
    }
}
