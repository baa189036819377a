//! One-inclusion hypergraphs, ℓ-density and min-max list orientations.
//!
//! The graph of `W ⊆ [k]^n` has one vertex per row of `W`. For every direction
//! `i` the rows are partitioned into edges by their behavior off coordinate `i`,
//! so each vertex lies on exactly `n` edges. The ℓ-density of `W` is
//! `(1/|W|) Σ_e (|e| - ℓ)_+`.
//!
//! An ℓ-orientation assigns each edge at most ℓ of its members. A vertex pays
//! one unit of outdegree for every incident edge that does not assign it. The
//! smallest achievable maximum outdegree is found by binary search over `t`
//! with a max-flow feasibility test, and it always equals the ceiling of the
//! largest subfamily density.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::Combinations;
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::hclass::{HypothesisClass, Label};

/// Default cap on `|W|` for exhaustive subfamily search.
pub const DEFAULT_SUBSET_CAP: usize = 22;

/// An exact non-negative rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Density(Ratio<u64>);

impl Density {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "density denominator must be positive");
        Density(Ratio::new(num, den))
    }

    pub fn zero() -> Self {
        Density(Ratio::zero())
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn ceil(&self) -> u64 {
        self.0.ceil().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn ratio(&self) -> Ratio<u64> {
        self.0
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Density {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("not a num/den rational: {s:?}"));
        let (n, d) = s.split_once('/').ok_or_else(bad)?;
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Ok(Density::new(n, d))
    }
}

impl Serialize for Density {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Density {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An edge `e_{i,a}`: the rows agreeing with `a` off direction `dir`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub dir: usize,
    /// Off-`dir` labels. For frozen directions (see
    /// [`OneInclusionGraph::with_multiplicities`]) this is the full row.
    pub key: Vec<Label>,
    /// Vertex indices, ascending.
    pub members: Vec<usize>,
}

impl Edge {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct OneInclusionGraph {
    class: HypothesisClass,
    edges: Vec<Edge>,
    /// `incidence[v][i]` is the edge of direction `i` containing `v`.
    incidence: Vec<Vec<usize>>,
}

impl OneInclusionGraph {
    pub fn new(class: &HypothesisClass) -> Self {
        Self::build(class, &vec![1; class.n()])
    }

    /// Graph of the class obtained by repeating coordinate `i` of `class`
    /// `multiplicity[i]` times. A repeated coordinate can never change on its
    /// own, so every edge in its direction is a singleton; those directions are
    /// represented once, by singleton edges, since further copies only add more
    /// singleton edges and never affect outdegrees or densities.
    pub fn with_multiplicities(class: &HypothesisClass, multiplicity: &[usize]) -> Self {
        assert_eq!(multiplicity.len(), class.n());
        assert!(multiplicity.iter().all(|&m| m >= 1));
        Self::build(class, multiplicity)
    }

    fn build(class: &HypothesisClass, multiplicity: &[usize]) -> Self {
        let n = class.n();
        let per_dir: Vec<Vec<Edge>> = (0..n)
            .into_par_iter()
            .map(|dir| {
                if multiplicity[dir] > 1 {
                    return (0..class.len())
                        .map(|v| Edge { dir, key: class.row(v).to_vec(), members: vec![v] })
                        .collect();
                }
                let mut groups: HashMap<Vec<Label>, Vec<usize>> = HashMap::new();
                for (v, row) in class.rows().iter().enumerate() {
                    let key: Vec<Label> = row.iter().enumerate().filter(|&(j, _)| j != dir).map(|(_, &l)| l).collect();
                    groups.entry(key).or_default().push(v);
                }
                let mut edges: Vec<Edge> =
                    groups.into_iter().map(|(key, members)| Edge { dir, key, members }).collect();
                edges.sort_unstable_by(|a, b| a.key.cmp(&b.key));
                edges
            })
            .collect();
        let edges: Vec<Edge> = per_dir.into_iter().flatten().collect();
        let mut incidence = vec![vec![usize::MAX; n]; class.len()];
        for (id, e) in edges.iter().enumerate() {
            for &v in &e.members {
                incidence[v][e.dir] = id;
            }
        }
        OneInclusionGraph { class: class.clone(), edges, incidence }
    }

    pub fn class(&self) -> &HypothesisClass {
        &self.class
    }

    pub fn vertex_count(&self) -> usize {
        self.class.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// Edge ids incident to `v`, one per direction.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn edge_at(&self, v: usize, dir: usize) -> usize {
        self.incidence[v][dir]
    }

    /// Edges in direction `dir`.
    pub fn direction(&self, dir: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.dir == dir)
    }
}

pub fn build_oig(class: &HypothesisClass) -> OneInclusionGraph {
    OneInclusionGraph::new(class)
}

/// How an edge contributes to a subfamily score, as a function of `|e ∩ F|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeWeight {
    /// `(|e| - ℓ)_+`, the ℓ-density.
    Excess(usize),
    /// `|e|` when `|e| > 1`, else 0.
    NonTrivialSize,
}

impl EdgeWeight {
    fn apply(self, size: usize) -> u64 {
        match self {
            EdgeWeight::Excess(ell) => size.saturating_sub(ell) as u64,
            EdgeWeight::NonTrivialSize => {
                if size > 1 {
                    size as u64
                } else {
                    0
                }
            }
        }
    }

    /// Edges at or below this size never contribute.
    fn threshold(self) -> usize {
        match self {
            EdgeWeight::Excess(ell) => ell,
            EdgeWeight::NonTrivialSize => 1,
        }
    }
}

fn score(graph: &OneInclusionGraph, weight: EdgeWeight) -> Density {
    let total: u64 = graph.edges().iter().map(|e| weight.apply(e.len())).sum();
    Density::new(total, graph.vertex_count() as u64)
}

/// ℓ-density of `W`.
pub fn density(class: &HypothesisClass, ell: usize) -> Density {
    assert!(ell >= 1, "list size must be at least 1");
    score(&build_oig(class), EdgeWeight::Excess(ell))
}

/// The `μ′` score of `W`: `(1/|W|) Σ_{|e|>1} |e|`.
pub fn nontrivial_edge_mass(class: &HypothesisClass) -> Density {
    score(&build_oig(class), EdgeWeight::NonTrivialSize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub mode: SearchMode,
    /// Largest `|W|` searched exhaustively.
    pub subset_cap: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { mode: SearchMode::Exact, subset_cap: DEFAULT_SUBSET_CAP }
    }
}

impl SearchOptions {
    pub fn heuristic() -> Self {
        SearchOptions { mode: SearchMode::Heuristic, ..Self::default() }
    }
}

/// Best subfamily found by [`max_density_subfamily`].
#[derive(Debug, Clone)]
pub struct Subfamily {
    pub value: Density,
    /// Row indices into the searched class, ascending.
    pub members: Vec<usize>,
    pub class: HypothesisClass,
    /// False when the value is only a lower bound (heuristic mode).
    pub exact: bool,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    num: u64,
    size: u32,
    mask: u64,
}

impl Candidate {
    /// Total order: higher value first, then fewer members, then the
    /// lexicographically smaller member list.
    fn better_than(&self, other: &Candidate) -> bool {
        let lhs = self.num as u128 * other.size as u128;
        let rhs = other.num as u128 * self.size as u128;
        match lhs.cmp(&rhs) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => match self.size.cmp(&other.size) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => {
                    let diff = self.mask ^ other.mask;
                    diff != 0 && self.mask & (diff & diff.wrapping_neg()) != 0
                }
            },
        }
    }
}

fn pick(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.better_than(&x) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Masks of the edges that can contribute under `weight`.
fn edge_masks(graph: &OneInclusionGraph, weight: EdgeWeight) -> Vec<u64> {
    graph
        .edges()
        .iter()
        .filter(|e| e.len() > weight.threshold())
        .map(|e| e.members.iter().fold(0u64, |m, &v| m | 1 << v))
        .collect()
}

fn mask_score(masks: &[u64], mask: u64, weight: EdgeWeight) -> u64 {
    masks.iter().map(|&em| weight.apply((em & mask).count_ones() as usize)).sum()
}

fn exhaustive(graph: &OneInclusionGraph, weight: EdgeWeight) -> Candidate {
    let n = graph.vertex_count();
    let masks = edge_masks(graph, weight);
    let total: u64 = 1 << n;
    let chunk = (total / 256).max(1 << 12);
    (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let lo = (c * chunk).max(1);
            let hi = ((c + 1) * chunk).min(total);
            let mut best: Option<Candidate> = None;
            for mask in lo..hi {
                let cand = Candidate { num: mask_score(&masks, mask, weight), size: mask.count_ones(), mask };
                if best.is_none_or(|b| cand.better_than(&b)) {
                    best = Some(cand);
                }
            }
            best
        })
        .reduce(|| None, pick)
        .expect("class is non-empty")
}

/// Steepest-ascent single add/remove moves, starting from the full family.
fn local_search(graph: &OneInclusionGraph, weight: EdgeWeight) -> Candidate {
    let n = graph.vertex_count();
    let masks = edge_masks(graph, weight);
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let eval = |mask: u64| Candidate { num: mask_score(&masks, mask, weight), size: mask.count_ones(), mask };
    let denser = |a: &Candidate, b: &Candidate| a.num as u128 * b.size as u128 > b.num as u128 * a.size as u128;
    let mut cur = eval(full);
    loop {
        let step = (0..n)
            .map(|v| cur.mask ^ (1u64 << v))
            .filter(|&m| m != 0)
            .map(eval)
            .filter(|c| denser(c, &cur))
            .fold(None, |best, c| pick(best, Some(c)));
        match step {
            Some(c) => cur = c,
            None => return cur,
        }
    }
}

fn best_subfamily(class: &HypothesisClass, weight: EdgeWeight, opts: SearchOptions) -> Result<Subfamily> {
    best_subfamily_in(&build_oig(class), weight, opts)
}

fn best_subfamily_in(graph: &OneInclusionGraph, weight: EdgeWeight, opts: SearchOptions) -> Result<Subfamily> {
    let class = graph.class();
    let (cand, exact) = match opts.mode {
        SearchMode::Exact => {
            let cap = opts.subset_cap.min(40);
            if class.len() > cap {
                return Err(Error::BudgetExceeded {
                    what: "exact subfamily search |W|",
                    needed: class.len() as u128,
                    cap: cap as u128,
                });
            }
            (exhaustive(graph, weight), true)
        }
        SearchMode::Heuristic if class.len() > 64 => {
            // no local search beyond 64 vertices; the full family is still a valid lower bound
            return Ok(Subfamily {
                value: score(graph, weight),
                members: (0..class.len()).collect(),
                class: class.clone(),
                exact: false,
            });
        }
        SearchMode::Heuristic => (local_search(graph, weight), false),
    };
    let members: Vec<usize> = (0..class.len()).filter(|&v| cand.mask >> v & 1 == 1).collect();
    Ok(Subfamily {
        value: Density::new(cand.num, cand.size as u64),
        class: class.subfamily(members.iter().copied())?,
        members,
        exact,
    })
}

/// Upper bound on any subfamily score: within one direction the score is a
/// mediant of per-edge ratios `w(|e ∩ F|)/|e ∩ F|`, each at most `w(|e|)/|e|`.
fn score_upper_bound(graph: &OneInclusionGraph, weight: EdgeWeight) -> Ratio<u64> {
    let mut best_per_dir: HashMap<usize, Ratio<u64>> = HashMap::new();
    for e in graph.edges() {
        let r = Ratio::new(weight.apply(e.len()), e.len() as u64);
        let slot = best_per_dir.entry(e.dir).or_insert_with(Ratio::zero);
        if r > *slot {
            *slot = r;
        }
    }
    best_per_dir.into_values().fold(Ratio::zero(), |acc, r| acc + r)
}

/// Largest ℓ-density over non-empty subfamilies of `W`.
pub fn max_density_subfamily(class: &HypothesisClass, ell: usize, opts: SearchOptions) -> Result<Subfamily> {
    assert!(ell >= 1, "list size must be at least 1");
    best_subfamily(class, EdgeWeight::Excess(ell), opts)
}

/// As [`max_density_subfamily`], on an already built graph.
pub fn max_density_subfamily_in(graph: &OneInclusionGraph, ell: usize, opts: SearchOptions) -> Result<Subfamily> {
    assert!(ell >= 1, "list size must be at least 1");
    best_subfamily_in(graph, EdgeWeight::Excess(ell), opts)
}

/// Maximizer of [`mu`] or [`mu_prime`].
///
/// The maximizing sequence visits each of `coords` once, except `repeated`
/// (when set), which fills the remaining slots.
#[derive(Debug, Clone)]
pub struct MuResult {
    pub value: Density,
    /// Distinct coordinates of the maximizing sequence, ascending.
    pub coords: Vec<usize>,
    /// Position in `coords` of the coordinate that occurs more than once.
    pub repeated: Option<usize>,
    /// Maximizing subfamily of `H|_coords`.
    pub subfamily: HypothesisClass,
    pub exact: bool,
}

impl MuResult {
    /// Multiplicity of each entry of `coords` in the maximizing sequence.
    pub fn multiplicities(&self, n_samples: usize) -> Vec<usize> {
        let mut mult = vec![1; self.coords.len()];
        if let Some(r) = self.repeated {
            mult[r] += n_samples - self.coords.len();
        }
        mult
    }

    /// The maximizing sequence itself.
    pub fn sequence(&self, n_samples: usize) -> Vec<usize> {
        let mult = self.multiplicities(n_samples);
        self.coords.iter().zip(mult).flat_map(|(&c, m)| std::iter::repeat_n(c, m)).collect()
    }

    /// The one-inclusion graph of `H|_sequence`, with repeats folded.
    pub fn graph(&self, class: &HypothesisClass, n_samples: usize) -> OneInclusionGraph {
        OneInclusionGraph::with_multiplicities(&class.project(&self.coords), &self.multiplicities(n_samples))
    }
}

/// Maximum of the subfamily score over every sequence `S ∈ [n]^n_samples`.
///
/// A sequence is determined up to score by its distinct coordinates `U` and
/// the set of coordinates it repeats. Repeating a coordinate turns all edges
/// of that direction into singletons, so scores only drop as more coordinates
/// are repeated: either `|U| = n_samples`, or `|U| < n_samples` with exactly
/// one repeated coordinate.
fn maximize_over_sequences(
    class: &HypothesisClass,
    n_samples: usize,
    weight: EdgeWeight,
    opts: SearchOptions,
) -> Result<MuResult> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let mut best: Option<MuResult> = None;
    for u in (1..=n_samples.min(class.n())).rev() {
        let repeats: Vec<Option<usize>> = if u == n_samples { vec![None] } else { (0..u).map(Some).collect() };
        for coords in Combinations::new(class.n(), u) {
            let w = class.project(&coords);
            for &repeated in &repeats {
                let mut mult = vec![1; u];
                if let Some(r) = repeated {
                    mult[r] = 2;
                }
                let graph = OneInclusionGraph::with_multiplicities(&w, &mult);
                if let Some(b) = &best {
                    if score_upper_bound(&graph, weight) <= b.value.ratio() {
                        continue;
                    }
                }
                let sub = best_subfamily_in(&graph, weight, opts)?;
                if best.as_ref().is_none_or(|b| sub.value > b.value) {
                    best = Some(MuResult {
                        value: sub.value,
                        coords: coords.clone(),
                        repeated,
                        subfamily: sub.class,
                        exact: sub.exact,
                    });
                }
            }
        }
    }
    // n = 0: the only restriction is the single empty vector
    Ok(best.unwrap_or_else(|| MuResult {
        value: Density::zero(),
        coords: Vec::new(),
        repeated: None,
        subfamily: class.project(&[]),
        exact: true,
    }))
}

/// `μ^ℓ_H(n)`: the largest ℓ-density of a subfamily of `H|_S` over all
/// sequences `S` of `n` coordinates, repeats allowed.
pub fn mu(class: &HypothesisClass, n_samples: usize, ell: usize, opts: SearchOptions) -> Result<MuResult> {
    assert!(ell >= 1, "list size must be at least 1");
    maximize_over_sequences(class, n_samples, EdgeWeight::Excess(ell), opts)
}

/// `μ′_H(n)`, the `|e|`-weighted variant over edges with `|e| > 1`.
pub fn mu_prime(class: &HypothesisClass, n_samples: usize, opts: SearchOptions) -> Result<MuResult> {
    maximize_over_sequences(class, n_samples, EdgeWeight::NonTrivialSize, opts)
}

/// Per-edge assigned vertex sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    pub ell: usize,
    /// `assign[e]` lists vertex indices, ascending.
    pub assign: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OrientedEdge {
    /// 1-based direction.
    pub dir: usize,
    pub key: Vec<Label>,
    pub assign: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OrientationFile {
    pub edges: Vec<OrientedEdge>,
}

impl Orientation {
    pub fn validate(&self, graph: &OneInclusionGraph) -> Result<()> {
        if self.assign.len() != graph.edges().len() {
            return Err(Error::OrientationMismatch(format!(
                "{} assignments for {} edges",
                self.assign.len(),
                graph.edges().len()
            )));
        }
        for (id, (a, e)) in self.assign.iter().zip(graph.edges()).enumerate() {
            if a.len() > self.ell {
                return Err(Error::OrientationMismatch(format!("edge {id} assigns {} > ℓ vertices", a.len())));
            }
            if let Some(v) = a.iter().find(|v| e.members.binary_search(v).is_err()) {
                return Err(Error::OrientationMismatch(format!("edge {id} assigns non-member {v}")));
            }
        }
        Ok(())
    }

    pub fn to_file(&self, graph: &OneInclusionGraph) -> OrientationFile {
        OrientationFile {
            edges: graph
                .edges()
                .iter()
                .zip(&self.assign)
                .map(|(e, a)| OrientedEdge { dir: e.dir + 1, key: e.key.clone(), assign: a.clone() })
                .collect(),
        }
    }
}

/// ℓ-outdegree of every vertex.
pub fn outdegrees(graph: &OneInclusionGraph, sigma: &Orientation) -> Result<Vec<usize>> {
    sigma.validate(graph)?;
    Ok((0..graph.vertex_count())
        .map(|v| graph.incident(v).iter().filter(|&&e| sigma.assign[e].binary_search(&v).is_err()).count())
        .collect())
}

/// Edges larger than ℓ; the others are assigned whole.
fn large_edges(graph: &OneInclusionGraph, ell: usize) -> Vec<usize> {
    (0..graph.edges().len()).filter(|&e| graph.edge(e).len() > ell).collect()
}

/// Tries to cover every vertex `v` at least `large_deg(v) - t` times using at
/// most ℓ members per large edge. Returns the covered sets on success.
fn try_orient(
    graph: &OneInclusionGraph,
    ell: usize,
    large: &[usize],
    large_deg: &[usize],
    t: usize,
) -> Option<Vec<Vec<usize>>> {
    let nv = graph.vertex_count();
    let demand: Vec<u64> = large_deg.iter().map(|&d| d.saturating_sub(t) as u64).collect();
    let need: u64 = demand.iter().sum();
    // node layout: source, large edges, vertices, sink
    let source = 0;
    let sink = 1 + large.len() + nv;
    let mut net = FlowNetwork::new(sink + 1);
    let mut arcs = Vec::with_capacity(large.len());
    for (slot, &e) in large.iter().enumerate() {
        net.add_arc(source, 1 + slot, ell as u64);
        let members: Vec<_> =
            graph.edge(e).members.iter().map(|&v| (v, net.add_arc(1 + slot, 1 + large.len() + v, 1))).collect();
        arcs.push(members);
    }
    for (v, &d) in demand.iter().enumerate() {
        if d > 0 {
            net.add_arc(1 + large.len() + v, sink, d);
        }
    }
    if net.max_flow(source, sink) != need {
        return None;
    }
    Some(
        arcs.into_iter()
            .map(|members| members.into_iter().filter(|&(_, a)| net.flow_on(a) == 1).map(|(v, _)| v).collect())
            .collect(),
    )
}

/// Orientation minimizing the maximum ℓ-outdegree, and that minimum `t*`.
///
/// `t*` is certified minimal: the flow test fails at `t* - 1`.
pub fn min_max_orientation(graph: &OneInclusionGraph, ell: usize) -> (Orientation, usize) {
    assert!(ell >= 1, "list size must be at least 1");
    let large = large_edges(graph, ell);
    let mut large_deg = vec![0usize; graph.vertex_count()];
    for &e in &large {
        for &v in &graph.edge(e).members {
            large_deg[v] += 1;
        }
    }
    let (mut lo, mut hi) = (0usize, large_deg.iter().copied().max().unwrap_or(0));
    let mut best = try_orient(graph, ell, &large, &large_deg, hi).expect("t = max degree is always feasible");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match try_orient(graph, ell, &large, &large_deg, mid) {
            Some(cover) => {
                hi = mid;
                best = cover;
            }
            None => lo = mid + 1,
        }
    }
    let mut assign: Vec<Vec<usize>> = graph.edges().iter().map(|e| e.members.clone()).collect();
    for (&e, mut chosen) in large.iter().zip(best) {
        // pad to exactly ℓ members; extra members only lower outdegrees
        for &v in &graph.edge(e).members {
            if chosen.len() >= ell {
                break;
            }
            if !chosen.contains(&v) {
                chosen.push(v);
            }
        }
        chosen.sort_unstable();
        assign[e] = chosen;
    }
    (Orientation { ell, assign }, hi)
}
