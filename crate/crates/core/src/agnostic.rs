//! Agnostic list learning: finite list cover, multiplicative-weights menu,
//! inside-menu ERM, and the end-to-end pipeline.

use std::collections::{BTreeMap, BTreeSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dims::ds_dimension;
use crate::error::{Error, Result};
use crate::hclass::{HypothesisClass, Label, LabeledSample};
use crate::learn::{trial_rng, Instance, ListPrediction, OigPredictor, SyntheticDistribution};

/// Weighted miss-rate a subsample's predictor must reach to count as weak.
pub const WEAK_MISS_RATE: f64 = 1.0 / 3.0;

/// Size knobs of the cover construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverConfig {
    /// Points per training subsample.
    pub d: usize,
    /// Maximum number of subsamples united into one member.
    pub j: usize,
    /// Candidate subsamples drawn per boosting round.
    pub attempts: usize,
}

impl CoverConfig {
    /// `d = 4ℓ·d_DS` (at least 1), `j = ⌈log2 n1⌉` (at least 1), 32 attempts.
    pub fn defaults(ell: usize, d_ds: usize, n1: usize) -> Self {
        let j = (n1.max(2) as f64).log2().ceil() as usize;
        CoverConfig { d: (4 * ell * d_ds).max(1), j: j.max(1), attempts: 32 }
    }
}

/// One cover member: the union of one-inclusion predictors trained on its subsamples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverMember {
    pub subsamples: Vec<LabeledSample>,
    /// The member's list at every instance.
    pub lists: Vec<Vec<Label>>,
}

impl CoverMember {
    pub fn contains(&self, x: Instance, y: Label) -> bool {
        self.lists[x].binary_search(&y).is_ok()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ListCover {
    pub members: Vec<CoverMember>,
    /// Member covering `S1(h)` for each hypothesis; `None` when `S1(h)` is empty or boosting failed.
    pub designated: Vec<Option<usize>>,
    /// Hypotheses whose subsample stayed uncovered after `j` rounds.
    pub failures: Vec<usize>,
    /// Declared bound on every member's list size, `j·ℓ`.
    pub list_bound: usize,
    pub config: CoverConfig,
}

impl ListCover {
    /// Every designated member covers its hypothesis' consistent subsample.
    pub fn verify(&self, h: &HypothesisClass, s1: &LabeledSample) -> bool {
        self.members.iter().all(|m| m.lists.iter().all(|l| l.len() <= self.list_bound))
            && (0..h.len()).all(|v| match self.designated[v] {
                Some(m) => consistent_part(h, v, s1).iter().all(|&(x, y)| self.members[m].contains(x, y)),
                None => self.failures.contains(&v) || consistent_part(h, v, s1).is_empty(),
            })
    }
}

/// `S(h)`: the points of `s` that hypothesis `v` labels correctly.
fn consistent_part(h: &HypothesisClass, v: usize, s: &LabeledSample) -> Vec<(Instance, Label)> {
    s.points.iter().copied().filter(|&(x, y)| h.row(v)[x] == y).collect()
}

fn all_lists(predictor: &OigPredictor, n: usize) -> Vec<ListPrediction> {
    (0..n).map(|x| predictor.predict(x)).collect()
}

/// Boosts one-inclusion predictors on `points` until their union covers every point.
fn boost<R: Rng + ?Sized>(
    h: &HypothesisClass,
    points: &[(Instance, Label)],
    ell: usize,
    config: CoverConfig,
    rng: &mut R,
) -> Result<Option<CoverMember>> {
    let mut weights = vec![1.0f64; points.len()];
    let mut covered = vec![false; points.len()];
    let mut member = CoverMember { subsamples: Vec::new(), lists: vec![Vec::new(); h.n()] };
    for _ in 0..config.j {
        let pick = WeightedIndex::new(&weights).expect("positive weights");
        let total: f64 = weights.iter().sum();
        let mut best: Option<(f64, LabeledSample, Vec<ListPrediction>)> = None;
        for _ in 0..config.attempts {
            let sub = LabeledSample::new((0..config.d).map(|_| points[pick.sample(rng)]).collect());
            let lists = all_lists(&OigPredictor::new(h, &sub, ell)?, h.n());
            let miss: f64 =
                points.iter().zip(&weights).filter(|((x, y), _)| !lists[*x].contains(*y)).map(|(_, w)| w).sum::<f64>()
                    / total;
            if best.as_ref().is_none_or(|b| miss < b.0) {
                best = Some((miss, sub, lists));
            }
        }
        let (miss, sub, lists) = best.expect("at least one attempt");
        if miss > WEAK_MISS_RATE {
            return Err(Error::NoWeakSubsample { attempts: config.attempts, d: config.d });
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            if lists[x].contains(y) {
                weights[i] /= 2.0;
                covered[i] = true;
            }
        }
        for (x, l) in lists.iter().enumerate() {
            let merged: BTreeSet<Label> = member.lists[x].iter().chain(l.labels()).copied().collect();
            member.lists[x] = merged.into_iter().collect();
        }
        member.subsamples.push(sub);
        if covered.iter().all(|&c| c) {
            return Ok(Some(member));
        }
    }
    Ok(None)
}

/// Finite list cover of `H` on `S1`: for each hypothesis `h`, a member whose
/// lists contain every label of `S1(h)`.
///
/// Members come from multiplicative-weights boosting over the points of each
/// distinct `S1(h)`; coverage is checked, never assumed, and hypotheses whose
/// subsample stays uncovered after `j` rounds are listed in `failures`.
pub fn build_list_cover<R: Rng + ?Sized>(
    h: &HypothesisClass,
    s1: &LabeledSample,
    ell: usize,
    config: CoverConfig,
    rng: &mut R,
) -> Result<ListCover> {
    if ell == 0 || config.d == 0 || config.j == 0 || config.attempts == 0 {
        return Err(Error::InvalidParameter("cover sizes and list size must be positive".into()));
    }
    s1.validate(h)?;
    let mut groups: BTreeMap<Vec<(Instance, Label)>, Vec<usize>> = BTreeMap::new();
    for v in 0..h.len() {
        groups.entry(consistent_part(h, v, s1)).or_default().push(v);
    }
    let mut cover = ListCover {
        members: Vec::new(),
        designated: vec![None; h.len()],
        failures: Vec::new(),
        list_bound: config.j * ell,
        config,
    };
    for (points, hyps) in groups {
        if points.is_empty() {
            continue;
        }
        match boost(h, &points, ell, config, rng)? {
            Some(member) => {
                let id = match cover.members.iter().position(|m| m.lists == member.lists) {
                    Some(id) => id,
                    None => {
                        cover.members.push(member);
                        cover.members.len() - 1
                    }
                };
                for v in hyps {
                    cover.designated[v] = Some(id);
                }
            }
            None => cover.failures.extend(hyps),
        }
    }
    Ok(cover)
}

/// One multiplicative-weights round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MenuRound {
    pub chosen: usize,
    /// `p_t` over cover members.
    pub probabilities: Vec<f64>,
    /// `log w_t` per member, before this round's update.
    pub log_weights: Vec<f64>,
    pub rewards: Vec<u8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Menu {
    /// `ν(x)` per instance: union of the members chosen in rounds `1..T−1`.
    pub nu: Vec<Vec<Label>>,
    pub trace: Vec<MenuRound>,
}

impl Menu {
    pub fn contains(&self, x: Instance, y: Label) -> bool {
        self.nu[x].binary_search(&y).is_ok()
    }
}

/// Multiplicative weights over the cover, one round per point of `S2`.
///
/// Weights are `exp(c/2)` for a member's integer reward count `c`, so every
/// update by `exp(r/2)` is exact.
pub fn mw_menu<R: Rng + ?Sized>(cover: &ListCover, s2: &LabeledSample, rng: &mut R) -> Result<Menu> {
    if cover.members.is_empty() {
        return Err(Error::InvalidParameter("empty list cover".into()));
    }
    if s2.is_empty() {
        return Err(Error::InvalidParameter("menu construction needs at least one round".into()));
    }
    let n = cover.members[0].lists.len();
    let mut counts = vec![0u64; cover.members.len()];
    let mut union: Vec<BTreeSet<Label>> = vec![BTreeSet::new(); n];
    let mut trace = Vec::with_capacity(s2.len());
    let mut nu = Vec::new();
    for (t, &(x, y)) in s2.points.iter().enumerate() {
        if t + 1 == s2.len() {
            nu = union.iter().map(|s| s.iter().copied().collect()).collect();
        }
        let log_weights: Vec<f64> = counts.iter().map(|&c| c as f64 / 2.0).collect();
        let top = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<f64> = log_weights.iter().map(|&l| (l - top).exp()).collect();
        let z: f64 = raw.iter().sum();
        let probabilities: Vec<f64> = raw.iter().map(|r| r / z).collect();
        let chosen = WeightedIndex::new(&probabilities).expect("valid distribution").sample(rng);
        let rewards: Vec<u8> =
            cover.members.iter().map(|m| (m.contains(x, y) && !union[x].contains(&y)) as u8).collect();
        for (c, &r) in counts.iter_mut().zip(&rewards) {
            *c += r as u64;
        }
        for (xi, l) in cover.members[chosen].lists.iter().enumerate() {
            union[xi].extend(l.iter().copied());
        }
        trace.push(MenuRound { chosen, probabilities, log_weights, rewards });
    }
    Ok(Menu { nu, trace })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InsideMenuResult {
    /// Index of the inside-menu ERM hypothesis.
    pub erm: usize,
    /// Empirical inside-menu loss of every hypothesis on `S3`.
    pub hypothesis_losses: Vec<f64>,
    /// Empirical inside-menu loss of `predictions` on `S3`.
    pub predictor_loss: f64,
    pub s_plus: LabeledSample,
    /// Hypotheses whose labels on `S^+` all lie in the menu.
    pub menu_consistent: Vec<usize>,
    /// `μ̂(x)` per instance.
    pub predictions: Vec<ListPrediction>,
    /// `S^+` was empty and the empty-list predictor was returned.
    pub empty_s_plus: bool,
}

impl InsideMenuResult {
    pub fn within_menu(&self, menu: &Menu) -> bool {
        self.predictions.iter().enumerate().all(|(x, p)| p.labels().iter().all(|&y| menu.contains(x, y)))
    }

    pub fn is_optimal(&self) -> bool {
        self.hypothesis_losses.iter().all(|&l| self.predictor_loss <= l)
    }
}

fn inside_loss(menu: &Menu, s: &LabeledSample, misses: impl Fn(Instance, Label) -> bool) -> f64 {
    s.points.iter().filter(|&&(x, y)| menu.contains(x, y) && misses(x, y)).count() as f64 / s.len() as f64
}

/// Inside-menu ERM on `S3`, then the one-inclusion list predictor on `S^+`
/// over the menu-consistent subclass, intersected with the menu.
pub fn inside_menu_erm(h: &HypothesisClass, menu: &Menu, s3: &LabeledSample, ell: usize) -> Result<InsideMenuResult> {
    if s3.is_empty() {
        return Err(Error::InvalidParameter("inside-menu ERM needs a non-empty sample".into()));
    }
    s3.validate(h)?;
    let hypothesis_losses: Vec<f64> = (0..h.len()).map(|v| inside_loss(menu, s3, |x, y| h.row(v)[x] != y)).collect();
    let erm = (0..h.len())
        .min_by(|&a, &b| hypothesis_losses[a].total_cmp(&hypothesis_losses[b]).then(a.cmp(&b)))
        .expect("non-empty class");
    let s_plus = LabeledSample::new(
        s3.points.iter().copied().filter(|&(x, y)| menu.contains(x, y) && h.row(erm)[x] == y).collect(),
    );
    let (menu_consistent, predictions) = if s_plus.is_empty() {
        (Vec::new(), vec![ListPrediction::new(Vec::new())?; h.n()])
    } else {
        let keep: Vec<usize> =
            (0..h.len()).filter(|&v| s_plus.points.iter().all(|&(x, _)| menu.contains(x, h.row(v)[x]))).collect();
        let sub = h.subfamily(keep.iter().copied())?;
        let predictor = OigPredictor::new(&sub, &s_plus, ell)?;
        let predictions = (0..h.n())
            .map(|x| {
                let labels = predictor.predict(x).labels().iter().copied().filter(|&y| menu.contains(x, y)).collect();
                ListPrediction::new(labels)
            })
            .collect::<Result<_>>()?;
        (keep, predictions)
    };
    let predictor_loss = inside_loss(menu, s3, |x, y| !predictions[x].contains(y));
    Ok(InsideMenuResult {
        erm,
        hypothesis_losses,
        predictor_loss,
        empty_s_plus: s_plus.is_empty(),
        s_plus,
        menu_consistent,
        predictions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineSizes {
    pub n1: usize,
    pub t: usize,
    pub n3: usize,
}

/// Terms bounding `Pr[h*(x) = y, y ∉ ν(x)]` through the cover member `μ*` of `h*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// `Pr[h*(x)=y, y∉ν(x)]`.
    pub a: f64,
    /// `Pr[h*(x)=y, y∉ν(x), y∉μ*(x)]`.
    pub a1: f64,
    /// `Pr[h*(x)=y, y∉ν(x), y∈μ*(x)]`.
    pub a2: f64,
    /// `Pr[h*(x)=y, y∉μ*(x)]`, at least `a1`.
    pub b1: f64,
    /// `Pr[y∉ν(x), y∈μ*(x)]`, at least `a2`.
    pub b2: f64,
}

impl Decomposition {
    pub fn holds(&self) -> bool {
        const TOL: f64 = 1e-12;
        (self.a - self.a1 - self.a2).abs() <= TOL && self.a1 <= self.b1 + TOL && self.a2 <= self.b2 + TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineChecks {
    pub cover_valid: bool,
    pub rewards_binary: bool,
    pub weights_exact: bool,
    pub probabilities_valid: bool,
    pub menu_size_bound: bool,
    pub within_menu: bool,
    pub inside_menu_optimal: bool,
    pub decomposition: bool,
}

impl PipelineChecks {
    pub fn all(&self) -> bool {
        self.cover_valid
            && self.rewards_binary
            && self.weights_exact
            && self.probabilities_valid
            && self.menu_size_bound
            && self.within_menu
            && self.inside_menu_optimal
            && self.decomposition
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgnosticReport {
    pub ell: usize,
    pub sizes: PipelineSizes,
    pub delta: f64,
    pub seed: u64,
    /// Seeds of the three stages, in order.
    pub stage_seeds: [u64; 3],
    pub d_ds: usize,
    pub config: CoverConfig,
    pub cover_size: usize,
    pub cover_failures: usize,
    /// Instances by `|ν(x)|`, over the support of the distribution.
    pub menu_size_histogram: BTreeMap<usize, usize>,
    pub error: f64,
    pub best_error: f64,
    pub best_hypothesis: usize,
    pub excess_error: f64,
    /// `L^ν_D` of the learned predictor and the best inside-menu loss over `H`.
    pub inside_menu_error: f64,
    pub best_inside_menu_error: f64,
    pub empty_s_plus: bool,
    pub decomposition: Decomposition,
    pub checks: PipelineChecks,
}

fn menu_checks(cover: &ListCover, menu: &Menu, ell: usize) -> (bool, bool, bool, bool) {
    let rewards_binary = menu.trace.iter().all(|r| r.rewards.iter().all(|&x| x <= 1));
    let mut weights_exact = menu.trace.iter().all(|r| r.log_weights.iter().all(|&l| l >= 0.0));
    for pair in menu.trace.windows(2) {
        for m in 0..cover.members.len() {
            // log-weights are halves of integers, so this is exact
            weights_exact &= pair[1].log_weights[m] - pair[0].log_weights[m] == pair[0].rewards[m] as f64 / 2.0;
        }
    }
    let probabilities_valid = menu.trace.iter().all(|r| {
        let top = r.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = r.log_weights.iter().map(|l| (l - top).exp()).sum();
        (r.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9
            && r.probabilities
                .iter()
                .zip(&r.log_weights)
                .all(|(p, l)| *p > 0.0 && (p - (l - top).exp() / z).abs() < 1e-12)
    });
    let rounds = menu.trace.len().saturating_sub(1);
    let size_bound = menu.nu.iter().all(|l| l.len() <= rounds * cover.config.j * ell);
    (rewards_binary, weights_exact, probabilities_valid, size_bound)
}

/// One run of the three-stage agnostic learner, measured exactly on `dist`.
pub fn agnostic_pipeline(
    h: &HypothesisClass,
    dist: &SyntheticDistribution,
    ell: usize,
    sizes: PipelineSizes,
    delta: f64,
    seed: u64,
    config: Option<CoverConfig>,
) -> Result<AgnosticReport> {
    if sizes.n1 == 0 || sizes.t == 0 || sizes.n3 == 0 {
        return Err(Error::InvalidParameter("sample sizes must be at least 1".into()));
    }
    if ell == 0 {
        return Err(Error::InvalidParameter("list size must be at least 1".into()));
    }
    let d_ds = ds_dimension(h, ell).value;
    let config = config.unwrap_or_else(|| CoverConfig::defaults(ell, d_ds, sizes.n1));
    let stage_seeds = [0, 1, 2].map(|s| trial_rng(seed, s).next_u64());
    let mut rngs = stage_seeds.map(|s| trial_rng(s, 0));

    let s1 = dist.sample(&mut rngs[0], sizes.n1);
    let cover = build_list_cover(h, &s1, ell, config, &mut rngs[0])?;
    let s2 = dist.sample(&mut rngs[1], sizes.t);
    let menu = mw_menu(&cover, &s2, &mut rngs[1])?;
    let s3 = dist.sample(&mut rngs[2], sizes.n3);
    let erm = inside_menu_erm(h, &menu, &s3, ell)?;

    let atoms: Vec<(Instance, Label, f64)> = dist.atoms().iter().copied().filter(|a| a.2 > 0.0).collect();
    let mass = |f: &dyn Fn(Instance, Label) -> bool| -> f64 {
        atoms.iter().filter(|a| f(a.0, a.1)).fold(0.0, |acc, a| acc + a.2)
    };
    let error = mass(&|x, y| !erm.predictions[x].contains(y));
    let hyp_errors: Vec<f64> = (0..h.len()).map(|v| mass(&|x, y| h.row(v)[x] != y)).collect();
    let best_hypothesis =
        (0..h.len()).min_by(|&a, &b| hyp_errors[a].total_cmp(&hyp_errors[b]).then(a.cmp(&b))).expect("non-empty");
    let best_error = hyp_errors[best_hypothesis];
    let inside_menu_error = mass(&|x, y| menu.contains(x, y) && !erm.predictions[x].contains(y));
    let best_inside_menu_error =
        (0..h.len()).map(|v| mass(&|x, y| menu.contains(x, y) && h.row(v)[x] != y)).fold(f64::INFINITY, f64::min);

    let star = h.row(best_hypothesis);
    let in_star =
        |x: Instance, y: Label| cover.designated[best_hypothesis].is_some_and(|m| cover.members[m].contains(x, y));
    let decomposition = Decomposition {
        a: mass(&|x, y| star[x] == y && !menu.contains(x, y)),
        a1: mass(&|x, y| star[x] == y && !menu.contains(x, y) && !in_star(x, y)),
        a2: mass(&|x, y| star[x] == y && !menu.contains(x, y) && in_star(x, y)),
        b1: mass(&|x, y| star[x] == y && !in_star(x, y)),
        b2: mass(&|x, y| !menu.contains(x, y) && in_star(x, y)),
    };

    let mut menu_size_histogram = BTreeMap::new();
    for x in dist.support() {
        *menu_size_histogram.entry(menu.nu[x].len()).or_insert(0) += 1;
    }
    let (rewards_binary, weights_exact, probabilities_valid, menu_size_bound) = menu_checks(&cover, &menu, ell);
    let checks = PipelineChecks {
        cover_valid: cover.verify(h, &s1),
        rewards_binary,
        weights_exact,
        probabilities_valid,
        menu_size_bound,
        within_menu: erm.within_menu(&menu),
        inside_menu_optimal: erm.is_optimal(),
        decomposition: decomposition.holds(),
    };
    Ok(AgnosticReport {
        ell,
        sizes,
        delta,
        seed,
        stage_seeds,
        d_ds,
        config,
        cover_size: cover.members.len(),
        cover_failures: cover.failures.len(),
        menu_size_histogram,
        error,
        best_error,
        best_hypothesis,
        excess_error: error - best_error,
        inside_menu_error,
        best_inside_menu_error,
        empty_s_plus: erm.empty_s_plus,
        decomposition,
        checks,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgnosticSummary {
    pub trials: usize,
    pub seed: u64,
    pub median_excess: f64,
    pub mean_error: f64,
    /// Standard error of `mean_error`.
    pub error_std_err: f64,
    pub all_checks: bool,
    pub runs: Vec<AgnosticReport>,
}

/// Independent pipeline runs, trial `t` seeded from stream `t` of `seed`.
#[allow(clippy::too_many_arguments)]
pub fn agnostic_trials(
    h: &HypothesisClass,
    dist: &SyntheticDistribution,
    ell: usize,
    sizes: PipelineSizes,
    delta: f64,
    trials: usize,
    seed: u64,
    config: Option<CoverConfig>,
) -> Result<AgnosticSummary> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial required".into()));
    }
    let runs: Vec<AgnosticReport> = (0..trials)
        .into_par_iter()
        .map(|t| agnostic_pipeline(h, dist, ell, sizes, delta, trial_rng(seed, t as u64).next_u64(), config))
        .collect::<Result<_>>()?;
    let mut excess: Vec<f64> = runs.iter().map(|r| r.excess_error).collect();
    excess.sort_by(f64::total_cmp);
    let median_excess =
        if trials % 2 == 1 { excess[trials / 2] } else { (excess[trials / 2 - 1] + excess[trials / 2]) / 2.0 };
    let (mean_error, error_std_err) = mean_and_std_err(runs.iter().map(|r| r.error));
    Ok(AgnosticSummary {
        trials,
        seed,
        median_excess,
        mean_error,
        error_std_err,
        all_checks: runs.iter().all(|r| r.checks.all()),
        runs,
    })
}

/// Sample mean and its standard error.
pub fn mean_and_std_err(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hclass::{full_cube, gen_cube};
    use crate::learn::trial_rng;

    fn cover_with(lists: Vec<Vec<Vec<Label>>>) -> ListCover {
        ListCover {
            members: lists.into_iter().map(|lists| CoverMember { subsamples: Vec::new(), lists }).collect(),
            designated: vec![Some(0)],
            failures: Vec::new(),
            list_bound: 1,
            config: CoverConfig { d: 1, j: 1, attempts: 1 },
        }
    }

    #[test]
    fn cover_examples() {
        let single = HypothesisClass::new(3, 3, vec![vec![2, 1, 3]]).unwrap();
        let s1 = LabeledSample::new(vec![(0, 2), (1, 1), (2, 3), (0, 2)]);
        let mut rng = trial_rng(1, 0);
        let cover = build_list_cover(&single, &s1, 1, CoverConfig { d: 2, j: 4, attempts: 8 }, &mut rng).unwrap();
        assert_eq!(cover.members.len(), 1);
        assert!(cover.verify(&single, &s1));
        assert!(cover.failures.is_empty());

        let empty =
            build_list_cover(&single, &LabeledSample::default(), 1, CoverConfig::defaults(1, 0, 1), &mut rng).unwrap();
        assert!(empty.members.is_empty());
        assert!(empty.verify(&single, &LabeledSample::default()));
    }

    #[test]
    fn cube_cover_is_complete() {
        let h = gen_cube(3, 1, 1, 3).unwrap();
        let dist = SyntheticDistribution::uniform_realizable(&h, 1).unwrap();
        let mut rng = trial_rng(7, 0);
        let s1 = dist.sample(&mut rng, 30);
        let d_ds = ds_dimension(&h, 1).value;
        let cover = build_list_cover(&h, &s1, 1, CoverConfig::defaults(1, d_ds, 30), &mut rng).unwrap();
        assert!(cover.failures.is_empty());
        assert!(cover.verify(&h, &s1));
    }

    #[test]
    fn menu_examples() {
        // one member always offering label 1 at the single instance
        let cover = cover_with(vec![vec![vec![1]]]);
        let s2 = LabeledSample::new(vec![(0, 1), (0, 1), (0, 2)]);
        let menu = mw_menu(&cover, &s2, &mut trial_rng(0, 0)).unwrap();
        assert_eq!(menu.nu, vec![vec![1]]);
        assert_eq!(menu.trace[0].rewards, vec![1]);
        // y already in the union: no reward
        assert_eq!(menu.trace[1].rewards, vec![0]);
        assert_eq!(menu.trace[1].log_weights, vec![0.5]);
        assert!((menu.trace[1].log_weights[0].exp() - 0.5f64.exp()).abs() < 1e-15);

        let two = cover_with(vec![vec![vec![1]], vec![vec![2]]]);
        let s2 = LabeledSample::new(vec![(0, 3); 4]);
        let menu = mw_menu(&two, &s2, &mut trial_rng(0, 0)).unwrap();
        assert!(menu.trace.iter().all(|r| r.probabilities == vec![0.5, 0.5]));
        assert!(mw_menu(&two, &LabeledSample::default(), &mut trial_rng(0, 0)).is_err());
    }

    fn full_menu(h: &HypothesisClass) -> Menu {
        Menu { nu: vec![(1..=h.k()).collect(); h.n()], trace: Vec::new() }
    }

    #[test]
    fn inside_menu_examples() {
        let h = full_cube(2, 2).unwrap();
        let s3 = LabeledSample::new(vec![(0, 1), (1, 2), (0, 2)]);
        let r = inside_menu_erm(&h, &full_menu(&h), &s3, 1).unwrap();
        // full menu: the inside-menu loss is the plain 0-1 loss
        for v in 0..h.len() {
            let plain = s3.points.iter().filter(|&&(x, y)| h.row(v)[x] != y).count() as f64 / 3.0;
            assert_eq!(r.hypothesis_losses[v], plain);
        }
        assert!(r.is_optimal());

        let single = HypothesisClass::new(2, 2, vec![vec![1, 2]]).unwrap();
        let r = inside_menu_erm(&single, &full_menu(&single), &s3, 1).unwrap();
        assert_eq!(r.erm, 0);
        assert_eq!(r.s_plus.points, vec![(0, 1), (1, 2)]);

        let empty_menu = Menu { nu: vec![Vec::new(); 2], trace: Vec::new() };
        let r = inside_menu_erm(&single, &empty_menu, &s3, 1).unwrap();
        assert!(r.empty_s_plus);
        assert!(r.predictions.iter().all(ListPrediction::is_empty));
    }

    #[test]
    fn noisy_inside_menu_is_optimal() {
        let h = gen_cube(3, 1, 1, 2).unwrap();
        let dist = SyntheticDistribution::noisy(&h, 2, &[0, 1], &[0.5, 0.5], 0.2).unwrap();
        let mut rng = trial_rng(11, 0);
        let s3 = dist.sample(&mut rng, 40);
        let menu = Menu { nu: vec![vec![1, 3], vec![1]], trace: Vec::new() };
        let r = inside_menu_erm(&h, &menu, &s3, 1).unwrap();
        assert!(r.within_menu(&menu));
        assert!(r.is_optimal());
        assert!(r.predictor_loss <= r.hypothesis_losses[r.erm]);
    }

    #[test]
    fn singleton_has_no_excess() {
        let h = HypothesisClass::new(3, 2, vec![vec![1, 2]]).unwrap();
        let dist = SyntheticDistribution::noisy(&h, 0, &[0, 1], &[0.5, 0.5], 0.3).unwrap();
        let sizes = PipelineSizes { n1: 20, t: 20, n3: 20 };
        let r = agnostic_pipeline(&h, &dist, 1, sizes, 0.1, 3, None).unwrap();
        assert!(r.excess_error.abs() < 1e-12, "{r:?}");
        assert!(r.checks.all(), "{:?}", r.checks);
    }

    #[test]
    fn pipeline_is_deterministic_and_sound() {
        let h = gen_cube(3, 1, 2, 4).unwrap();
        let dist = SyntheticDistribution::noisy(&h, 4, &[0, 1, 2, 3], &[0.25; 4], 0.1).unwrap();
        let sizes = PipelineSizes { n1: 60, t: 60, n3: 120 };
        let a = agnostic_trials(&h, &dist, 1, sizes, 0.1, 6, 5, None).unwrap();
        let b = agnostic_trials(&h, &dist, 1, sizes, 0.1, 6, 5, None).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.all_checks);
    }
}
