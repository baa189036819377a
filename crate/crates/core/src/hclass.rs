//! Finite multiclass hypothesis classes.
//!
//! A class is a table of distinct label vectors over `n` coordinates, labels in
//! `1..=k`. Rows are kept in lexicographic order so that equal classes compare,
//! hash and serialize identically. Coordinates are 0-based inside the library;
//! the JSON and CSV formats only carry labels, which are 1-based.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Label = u32;

/// A finite hypothesis class `H ⊆ [k]^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HypothesisClass {
    k: Label,
    n: usize,
    hyps: Vec<Vec<Label>>,
}

/// On-disk representation of a class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassFile {
    pub k: Label,
    pub n: usize,
    pub hyps: Vec<Vec<Label>>,
}

/// A class together with the number of duplicate rows dropped while loading it.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub class: HypothesisClass,
    pub duplicates: usize,
}

impl HypothesisClass {
    /// Validates and canonicalizes `rows`. Duplicates are dropped silently; use
    /// [`HypothesisClass::with_duplicate_count`] to observe them.
    pub fn new(k: Label, n: usize, rows: Vec<Vec<Label>>) -> Result<Self> {
        Self::with_duplicate_count(k, n, rows).map(|l| l.class)
    }

    pub fn with_duplicate_count(k: Label, n: usize, mut rows: Vec<Vec<Label>>) -> Result<Loaded> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if rows.is_empty() {
            return Err(Error::EmptyClass);
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::RaggedRow { row: r, len: row.len(), expected: n });
            }
            if let Some(&label) = row.iter().find(|&&l| l == 0 || l > k) {
                return Err(Error::LabelOutOfRange { label, k });
            }
        }
        let before = rows.len();
        rows.sort_unstable();
        rows.dedup();
        let duplicates = before - rows.len();
        Ok(Loaded { class: HypothesisClass { k, n, hyps: rows }, duplicates })
    }

    /// Internal constructor for rows already known to be valid.
    pub(crate) fn from_valid_rows(k: Label, n: usize, mut rows: Vec<Vec<Label>>) -> Self {
        debug_assert!(!rows.is_empty());
        rows.sort_unstable();
        rows.dedup();
        HypothesisClass { k, n, hyps: rows }
    }

    pub fn k(&self) -> Label {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.hyps.len()
    }

    /// Always false; classes are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        self.hyps.is_empty()
    }

    pub fn rows(&self) -> &[Vec<Label>] {
        &self.hyps
    }

    pub fn row(&self, i: usize) -> &[Label] {
        &self.hyps[i]
    }

    pub fn index_of(&self, row: &[Label]) -> Option<usize> {
        self.hyps.binary_search_by(|h| h.as_slice().cmp(row)).ok()
    }

    /// Distinct labels realized at coordinate `i`, ascending.
    pub fn labels_at(&self, i: usize) -> Vec<Label> {
        let mut seen: Vec<Label> = self.hyps.iter().map(|h| h[i]).collect();
        seen.sort_unstable();
        seen.dedup();
        seen
    }

    /// `H|_S`. Duplicated coordinates are allowed only if `coords` permits them.
    pub fn restrict(&self, coords: &CoordSeq) -> Result<HypothesisClass> {
        if let Some(&bad) = coords.as_slice().iter().find(|&&c| c >= self.n) {
            return Err(Error::CoordOutOfRange { index: bad, n: self.n });
        }
        Ok(self.project(coords.as_slice()))
    }

    /// Projection onto already validated coordinates (may be empty).
    pub(crate) fn project(&self, coords: &[usize]) -> HypothesisClass {
        let rows = self.hyps.iter().map(|h| coords.iter().map(|&c| h[c]).collect()).collect();
        HypothesisClass::from_valid_rows(self.k, coords.len(), rows)
    }

    /// Subfamily made of the rows at `indices`.
    pub fn subfamily(&self, indices: impl IntoIterator<Item = usize>) -> Result<HypothesisClass> {
        let rows: Vec<Vec<Label>> = indices.into_iter().map(|i| self.hyps[i].clone()).collect();
        if rows.is_empty() {
            return Err(Error::EmptyClass);
        }
        Ok(HypothesisClass::from_valid_rows(self.k, self.n, rows))
    }

    pub fn contains(&self, row: &[Label]) -> bool {
        self.index_of(row).is_some()
    }

    /// Whether every row of `other` is a row of `self` (same `n`).
    pub fn is_superset_of(&self, other: &HypothesisClass) -> bool {
        self.n == other.n && other.hyps.iter().all(|r| self.contains(r))
    }

    pub fn to_file(&self) -> ClassFile {
        ClassFile { k: self.k, n: self.n, hyps: self.hyps.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("class serializes")
    }

    pub fn from_json(text: &str) -> Result<Loaded> {
        let file: ClassFile = serde_json::from_str(text)?;
        HypothesisClass::with_duplicate_count(file.k, file.n, file.hyps)
    }

    /// One hypothesis per row, labels comma separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for h in &self.hyps {
            for (j, l) in h.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{l}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

pub fn load_class(path: impl AsRef<Path>) -> Result<Loaded> {
    let text = std::fs::read_to_string(path)?;
    HypothesisClass::from_json(&text)
}

/// Ordered sequence of coordinate indices (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoordSeq(Vec<usize>);

impl CoordSeq {
    /// Distinct coordinates, each below `n`.
    pub fn new(coords: Vec<usize>, n: usize) -> Result<Self> {
        let seq = Self::with_repeats(coords, n)?;
        let mut seen = HashSet::new();
        if let Some(&dup) = seq.0.iter().find(|&&c| !seen.insert(c)) {
            return Err(Error::RepeatedCoord(dup));
        }
        Ok(seq)
    }

    pub fn with_repeats(coords: Vec<usize>, n: usize) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyCoords);
        }
        if let Some(&bad) = coords.iter().find(|&&c| c >= n) {
            return Err(Error::CoordOutOfRange { index: bad, n });
        }
        Ok(CoordSeq(coords))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).collect(), n)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A labeled sample over the instances (columns) of a class.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub points: Vec<(usize, Label)>,
}

impl LabeledSample {
    pub fn new(points: Vec<(usize, Label)>) -> Self {
        LabeledSample { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn prefix(&self, t: usize) -> LabeledSample {
        LabeledSample { points: self.points[..t].to_vec() }
    }

    pub fn validate(&self, class: &HypothesisClass) -> Result<()> {
        for &(x, y) in &self.points {
            if x >= class.n() {
                return Err(Error::CoordOutOfRange { index: x, n: class.n() });
            }
            if y == 0 || y > class.k() {
                return Err(Error::LabelOutOfRange { label: y, k: class.k() });
            }
        }
        Ok(())
    }

    /// Indices of hypotheses consistent with every point.
    pub fn consistent_hypotheses(&self, class: &HypothesisClass) -> Vec<usize> {
        (0..class.len()).filter(|&h| self.points.iter().all(|&(x, y)| class.row(h)[x] == y)).collect()
    }

    pub fn is_realizable_by(&self, class: &HypothesisClass) -> bool {
        (0..class.len()).any(|h| self.points.iter().all(|&(x, y)| class.row(h)[x] == y))
    }
}

/// The product class `[k]^s × [ell]^(m-s)`.
pub fn gen_cube(k: Label, ell: Label, s: usize, m: usize) -> Result<HypothesisClass> {
    if ell < 1 || ell >= k {
        return Err(Error::InvalidParameter(format!("need 1 <= ell < k, got ell = {ell}, k = {k}")));
    }
    if s > m {
        return Err(Error::InvalidParameter(format!("need s <= m, got s = {s}, m = {m}")));
    }
    let size = (k as u128).pow(s as u32) * (ell as u128).pow((m - s) as u32);
    if size > 1 << 24 {
        return Err(Error::BudgetExceeded { what: "cube size", needed: size, cap: 1 << 24 });
    }
    let radix: Vec<Label> = (0..m).map(|i| if i < s { k } else { ell }).collect();
    let mut rows = Vec::with_capacity(size as usize);
    let mut cur = vec![1 as Label; m];
    loop {
        rows.push(cur.clone());
        // odometer, last coordinate fastest
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(HypothesisClass::from_valid_rows(k, m, rows));
            }
            i -= 1;
            if cur[i] < radix[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = 1;
        }
    }
}

/// The full cube `[k]^n`.
pub fn full_cube(k: Label, n: usize) -> Result<HypothesisClass> {
    if k < 2 {
        return Ok(HypothesisClass::from_valid_rows(k.max(1), n, vec![vec![1; n]]));
    }
    gen_cube(k, 1, n, n)
}

/// `target_size` distinct vectors drawn uniformly from `[k]^n`, reproducible from `seed`.
pub fn gen_random(k: Label, n: usize, target_size: usize, seed: u64) -> Result<HypothesisClass> {
    if k == 0 || target_size == 0 {
        return Err(Error::InvalidParameter("need k >= 1 and target_size >= 1".into()));
    }
    let total = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if target_size as u128 > total {
        return Err(Error::InvalidParameter(format!("target_size {target_size} exceeds k^n = {total}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decode = |mut code: u128| -> Vec<Label> {
        let mut row = vec![0; n];
        for slot in row.iter_mut().rev() {
            *slot = (code % k as u128) as Label + 1;
            code /= k as u128;
        }
        row
    };
    let rows: Vec<Vec<Label>> = if total <= u32::MAX as u128 {
        index::sample(&mut rng, total as usize, target_size).into_iter().map(|c| decode(c as u128)).collect()
    } else {
        let mut seen = HashSet::with_capacity(target_size);
        while seen.len() < target_size {
            let row: Vec<Label> = (0..n).map(|_| rng.gen_range(1..=k)).collect();
            seen.insert(row);
        }
        seen.into_iter().collect()
    };
    Ok(HypothesisClass::from_valid_rows(k, n, rows))
}
