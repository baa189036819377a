//! Realizable list learning with one-inclusion graph predictors.

use std::collections::{BTreeMap, HashMap};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Verdict;
use crate::dims::ds_dimension;
use crate::error::{Error, Result};
use crate::hclass::{HypothesisClass, Label, LabeledSample};
use crate::oig::{min_max_orientation, outdegrees, OneInclusionGraph};

/// A domain point: the index of its label column in the class table.
pub type Instance = usize;

/// Constant of the list PAC bound, per unit of `ℓ + 1`.
pub const PAC_CONSTANT: f64 = 4.82;

/// Supports larger than this are evaluated by sampling.
pub const EXACT_SUPPORT_LIMIT: usize = 100_000;

const ERROR_SAMPLES: usize = 100_000;

/// Distinct labels, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ListPrediction {
    labels: Vec<Label>,
}

impl ListPrediction {
    pub fn new(mut labels: Vec<Label>) -> Result<Self> {
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!("repeated label in list {labels:?}")));
        }
        Ok(ListPrediction { labels })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, y: Label) -> bool {
        self.labels.binary_search(&y).is_ok()
    }
}

/// The `ℓ` most frequent labels; ties go to the smaller label.
pub fn topk_vote(lists: &[ListPrediction], ell: usize) -> Result<ListPrediction> {
    if lists.is_empty() {
        return Err(Error::InvalidParameter("no lists to vote over".into()));
    }
    let mut counts: BTreeMap<Label, u64> = BTreeMap::new();
    for list in lists {
        for &y in list.labels() {
            *counts.entry(y).or_default() += 1;
        }
    }
    Ok(top_counts(counts, ell))
}

fn top_counts(counts: BTreeMap<Label, u64>, ell: usize) -> ListPrediction {
    let mut ranked: Vec<(Label, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut labels: Vec<Label> = ranked.into_iter().take(ell).map(|(y, _)| y).collect();
    labels.sort_unstable();
    ListPrediction { labels }
}

/// Training data in canonical form: each distinct instance with its label
/// and multiplicity. Realizability guarantees one label per instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Canonical {
    points: BTreeMap<Instance, (Label, usize)>,
}

impl Canonical {
    fn new(h: &HypothesisClass, sample: &LabeledSample) -> Result<Self> {
        sample.validate(h)?;
        if !sample.is_realizable_by(h) {
            return Err(Error::NotRealizable);
        }
        let mut points = BTreeMap::new();
        for &(x, y) in &sample.points {
            points.entry(x).or_insert((y, 0)).1 += 1;
        }
        Ok(Canonical { points })
    }

    /// Multiplicities capped at two: all the graph depends on.
    fn shape(&self) -> Vec<(Instance, usize)> {
        self.points.iter().map(|(&x, &(_, c))| (x, c.min(2))).collect()
    }

    fn push(&mut self, x: Instance, y: Label) {
        self.points.entry(x).or_insert((y, 0)).1 += 1;
    }
}

/// Sorted coordinates of train ∪ {x}, their multiplicities, and the position of `x`.
fn layout(train: &Canonical, x: Instance) -> (Vec<Instance>, Vec<usize>, usize) {
    let mut coords: Vec<Instance> = train.points.keys().copied().collect();
    let mut mult: Vec<usize> = train.points.values().map(|&(_, c)| c).collect();
    match coords.binary_search(&x) {
        Ok(p) => {
            mult[p] += 1;
            (coords, mult, p)
        }
        Err(p) => {
            coords.insert(p, x);
            mult.insert(p, 1);
            (coords, mult, p)
        }
    }
}

/// One-inclusion prediction for `x` from canonical training data.
fn predict_canonical(h: &HypothesisClass, train: &Canonical, x: Instance, ell: usize) -> ListPrediction {
    let (coords, mult, pos) = layout(train, x);
    let w = h.project(&coords);
    let graph = OneInclusionGraph::with_multiplicities(&w, &mult);
    let (sigma, _) = min_max_orientation(&graph, ell);
    let anchor = (0..w.len())
        .find(|&v| coords.iter().enumerate().all(|(j, c)| train.points.get(c).is_none_or(|&(y, _)| w.row(v)[j] == y)))
        .expect("realizable training data has a consistent vertex");
    let e = graph.edge_at(anchor, pos);
    ListPrediction::new(sigma.assign[e].iter().map(|&v| w.row(v)[pos]).collect()).expect("edge members differ at pos")
}

/// The one-inclusion graph list predictor trained on `train`, queried at `x`.
///
/// The graph is built on the sorted distinct instances of the training data
/// together with `x`; repeated instances are folded into a single direction
/// with singleton edges. The result does not depend on the order of `train`.
pub fn oig_list_predict(h: &HypothesisClass, train: &LabeledSample, x: Instance, ell: usize) -> Result<ListPrediction> {
    check_ell(ell)?;
    if x >= h.n() {
        return Err(Error::CoordOutOfRange { index: x, n: h.n() });
    }
    Ok(predict_canonical(h, &Canonical::new(h, train)?, x, ell))
}

fn check_ell(ell: usize) -> Result<()> {
    if ell == 0 {
        return Err(Error::InvalidParameter("list size must be at least 1".into()));
    }
    Ok(())
}

/// Reusable one-inclusion predictor for one training sample.
#[derive(Debug, Clone)]
pub struct OigPredictor {
    class: HypothesisClass,
    train: Canonical,
    ell: usize,
}

impl OigPredictor {
    pub fn new(h: &HypothesisClass, train: &LabeledSample, ell: usize) -> Result<Self> {
        check_ell(ell)?;
        Ok(OigPredictor { class: h.clone(), train: Canonical::new(h, train)?, ell })
    }

    pub fn predict(&self, x: Instance) -> ListPrediction {
        predict_canonical(&self.class, &self.train, x, self.ell)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LooReport {
    /// Held-out points whose label escapes the list predicted from the rest.
    pub mistakes: usize,
    /// Outdegree of the ground-truth vertex in the shared orientation.
    pub truth_outdegree: usize,
    pub t_star: usize,
}

impl LooReport {
    pub fn holds(&self) -> bool {
        self.mistakes <= self.truth_outdegree && self.truth_outdegree <= self.t_star
    }
}

/// Leave-one-out mistakes of the one-inclusion predictor.
///
/// Every held-out prediction uses the same graph, that of the full sample, so
/// one orientation suffices: point `i` is a mistake exactly when its edge at
/// the ground-truth vertex is oriented away from it.
pub fn loo_error(h: &HypothesisClass, sample: &LabeledSample, ell: usize) -> Result<LooReport> {
    check_ell(ell)?;
    let train = Canonical::new(h, sample)?;
    let coords: Vec<Instance> = train.points.keys().copied().collect();
    let mult: Vec<usize> = train.points.values().map(|&(_, c)| c).collect();
    let w = h.project(&coords);
    let graph = OneInclusionGraph::with_multiplicities(&w, &mult);
    let (sigma, t_star) = min_max_orientation(&graph, ell);
    let labels: Vec<Label> = train.points.values().map(|&(y, _)| y).collect();
    let truth = w.index_of(&labels).expect("realizable sample is a vertex");
    let mut mistakes = 0;
    for &(x, _) in &sample.points {
        let pos = coords.binary_search(&x).expect("sample instance");
        if mult[pos] == 1 && sigma.assign[graph.edge_at(truth, pos)].binary_search(&truth).is_err() {
            mistakes += 1;
        }
    }
    Ok(LooReport { mistakes, truth_outdegree: outdegrees(&graph, &sigma)?[truth], t_star })
}

/// Top-ℓ vote over the one-inclusion predictors of the prefixes
/// `S_{≤t}`, `⌈n/4⌉ ≤ t ≤ n − 1`.
#[derive(Debug, Clone)]
pub struct PrefixVotePredictor {
    class: HypothesisClass,
    ell: usize,
    /// Consecutive prefixes sharing a canonical shape, with the number of prefixes in each run.
    runs: Vec<(Canonical, u64)>,
    n: usize,
}

pub fn prefix_vote_predictor(h: &HypothesisClass, sample: &LabeledSample, ell: usize) -> Result<PrefixVotePredictor> {
    check_ell(ell)?;
    let n = sample.len();
    if n < 8 {
        return Err(Error::InvalidParameter(format!("prefix voting needs at least 8 points, got {n}")));
    }
    Canonical::new(h, sample)?;
    let start = n.div_ceil(4);
    let mut cur = Canonical { points: BTreeMap::new() };
    for &(x, y) in &sample.points[..start] {
        cur.push(x, y);
    }
    let mut runs: Vec<(Canonical, u64)> = vec![(cur.clone(), 1)];
    for &(x, y) in &sample.points[start..n - 1] {
        cur.push(x, y);
        let last = runs.last_mut().expect("non-empty");
        if last.0.shape() == cur.shape() {
            last.1 += 1;
        } else {
            runs.push((cur.clone(), 1));
        }
    }
    Ok(PrefixVotePredictor { class: h.clone(), ell, runs, n })
}

impl PrefixVotePredictor {
    /// Prefix lengths voting.
    pub fn prefixes(&self) -> std::ops::Range<usize> {
        self.n.div_ceil(4)..self.n
    }

    pub fn predict(&self, x: Instance) -> ListPrediction {
        let mut counts: BTreeMap<Label, u64> = BTreeMap::new();
        for (train, times) in &self.runs {
            for &y in predict_canonical(&self.class, train, x, self.ell).labels() {
                *counts.entry(y).or_default() += times;
            }
        }
        top_counts(counts, self.ell)
    }

    /// Each prefix predictor's list at `x`, in prefix order.
    pub fn prefix_predictions(&self, x: Instance) -> Vec<ListPrediction> {
        self.runs
            .iter()
            .flat_map(|(train, times)| {
                let p = predict_canonical(&self.class, train, x, self.ell);
                std::iter::repeat_n(p, *times as usize)
            })
            .collect()
    }
}

/// Finite distribution over (instance, label) pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticDistribution {
    atoms: Vec<(Instance, Label, f64)>,
    /// Hypothesis index labelling every atom, when the distribution is realizable by construction.
    target: Option<usize>,
}

impl SyntheticDistribution {
    fn checked(h: &HypothesisClass, atoms: Vec<(Instance, Label, f64)>, target: Option<usize>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("empty support".into()));
        }
        for &(x, y, p) in &atoms {
            if x >= h.n() {
                return Err(Error::CoordOutOfRange { index: x, n: h.n() });
            }
            if y == 0 || y > h.k() {
                return Err(Error::LabelOutOfRange { label: y, k: h.k() });
            }
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::InvalidParameter(format!("weight {p} is not a probability")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.2).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        Ok(SyntheticDistribution { atoms, target })
    }

    /// Instances drawn by `weights`, labelled by hypothesis `target`.
    pub fn realizable(h: &HypothesisClass, target: usize, instances: &[Instance], weights: &[f64]) -> Result<Self> {
        if target >= h.len() {
            return Err(Error::InvalidParameter(format!("target {target} outside a class of {}", h.len())));
        }
        if instances.len() != weights.len() {
            return Err(Error::InvalidParameter("one weight per instance required".into()));
        }
        if let Some(&x) = instances.iter().find(|&&x| x >= h.n()) {
            return Err(Error::CoordOutOfRange { index: x, n: h.n() });
        }
        let atoms = instances.iter().zip(weights).map(|(&x, &p)| (x, h.row(target)[x], p)).collect();
        Self::checked(h, atoms, Some(target))
    }

    /// Uniform over every instance, labelled by `target`.
    pub fn uniform_realizable(h: &HypothesisClass, target: usize) -> Result<Self> {
        let instances: Vec<Instance> = (0..h.n()).collect();
        Self::realizable(h, target, &instances, &vec![1.0 / h.n() as f64; h.n()])
    }

    /// As [`Self::realizable`], but each label is replaced with probability
    /// `noise` by one of the other `k − 1` labels, uniformly.
    pub fn noisy(
        h: &HypothesisClass,
        target: usize,
        instances: &[Instance],
        weights: &[f64],
        noise: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&noise) {
            return Err(Error::InvalidParameter(format!("noise rate {noise} outside [0, 1]")));
        }
        let clean = Self::realizable(h, target, instances, weights)?;
        if noise == 0.0 || h.k() < 2 {
            return Ok(clean);
        }
        let others = (h.k() - 1) as f64;
        let mut atoms = Vec::new();
        for &(x, y, p) in &clean.atoms {
            atoms.push((x, y, p * (1.0 - noise)));
            atoms.extend((1..=h.k()).filter(|&z| z != y).map(|z| (x, z, p * noise / others)));
        }
        Self::checked(h, atoms, None)
    }

    /// Arbitrary joint weights over (instance, label).
    pub fn joint(h: &HypothesisClass, atoms: Vec<(Instance, Label, f64)>) -> Result<Self> {
        Self::checked(h, atoms, None)
    }

    pub fn atoms(&self) -> &[(Instance, Label, f64)] {
        &self.atoms
    }

    pub fn target(&self) -> Option<usize> {
        self.target
    }

    /// Distinct instances carrying positive mass, ascending.
    pub fn support(&self) -> Vec<Instance> {
        let mut xs: Vec<Instance> = self.atoms.iter().filter(|a| a.2 > 0.0).map(|a| a.0).collect();
        xs.sort_unstable();
        xs.dedup();
        xs
    }

    /// Some hypothesis labels every positive-mass atom correctly.
    pub fn is_realizable_by(&self, h: &HypothesisClass) -> bool {
        h.rows().iter().any(|row| self.atoms.iter().all(|&(x, y, p)| p == 0.0 || row[x] == y))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, m: usize) -> LabeledSample {
        let pick = WeightedIndex::new(self.atoms.iter().map(|a| a.2)).expect("validated weights");
        LabeledSample::new(
            (0..m)
                .map(|_| {
                    let (x, y, _) = self.atoms[pick.sample(rng)];
                    (x, y)
                })
                .collect(),
        )
    }

    /// Probability that the label escapes the predicted list, with its
    /// standard error when estimated by sampling.
    pub fn list_error<R, F>(&self, mut predict: F, rng: &mut R) -> (f64, Option<f64>)
    where
        R: Rng + ?Sized,
        F: FnMut(Instance) -> ListPrediction,
    {
        let support = self.support();
        if support.len() <= EXACT_SUPPORT_LIMIT {
            let lists: HashMap<Instance, ListPrediction> = support.into_iter().map(|x| (x, predict(x))).collect();
            let err =
                self.atoms.iter().filter(|&&(x, y, p)| p > 0.0 && !lists[&x].contains(y)).fold(0.0, |acc, a| acc + a.2);
            return (err, None);
        }
        let draws = self.sample(rng, ERROR_SAMPLES);
        let misses = draws.points.iter().filter(|&&(x, y)| !predict(x).contains(y)).count() as f64;
        let p = misses / ERROR_SAMPLES as f64;
        (p, Some((p * (1.0 - p) / ERROR_SAMPLES as f64).sqrt()))
    }
}

/// `4.82 (ℓ + 1) (d + ln(2/δ)) / m`.
pub fn pac_bound(ell: usize, d_ds: usize, delta: f64, m: usize) -> f64 {
    PAC_CONSTANT * (ell + 1) as f64 * (d_ds as f64 + (2.0 / delta).ln()) / m as f64
}

/// Nearest-rank quantile of `values`, `q` in `(0, 1]`.
pub fn nearest_rank_quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64) - 1e-9).ceil().clamp(1.0, sorted.len() as f64) as usize;
    sorted[rank - 1]
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub class: Option<String>,
    pub ell: usize,
    pub m: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub d_ds: usize,
    pub d_ds_exact: bool,
    /// `1 − δ` quantile of the per-trial errors.
    pub quantile_err: f64,
    pub mean_err: f64,
    pub bound: f64,
    /// Base of the logarithm in `bound`.
    pub log_base: String,
    pub errors: Vec<f64>,
    /// Present when errors were estimated by sampling.
    pub error_std: Option<Vec<f64>>,
    pub verdict: Verdict,
}

/// Monte-Carlo run of the prefix-vote learner against the PAC bound.
pub fn pac_experiment(
    h: &HypothesisClass,
    dist: &SyntheticDistribution,
    ell: usize,
    m: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    check_ell(ell)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence parameter {delta} outside (0, 1)")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial required".into()));
    }
    if !dist.is_realizable_by(h) {
        return Err(Error::NotRealizable);
    }
    let ds = ds_dimension(h, ell);
    let outcomes: Vec<(f64, Option<f64>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let sample = dist.sample(&mut rng, m);
            let predictor = prefix_vote_predictor(h, &sample, ell)?;
            Ok(dist.list_error(|x| predictor.predict(x), &mut rng))
        })
        .collect::<Result<_>>()?;
    let errors: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let error_std = outcomes.iter().map(|o| o.1).collect::<Option<Vec<f64>>>();
    let quantile_err = nearest_rank_quantile(&errors, 1.0 - delta);
    let bound = pac_bound(ell, ds.value, delta, m);
    let verdict = match (ds.exact, quantile_err <= bound) {
        (false, _) => Verdict::Incomplete,
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::Fail,
    };
    Ok(ExperimentReport {
        class: None,
        ell,
        m,
        delta,
        trials,
        seed,
        d_ds: ds.value,
        d_ds_exact: ds.exact,
        quantile_err,
        mean_err: errors.iter().sum::<f64>() / trials as f64,
        bound,
        log_base: "e".into(),
        errors,
        error_std,
        verdict,
    })
}
