//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero on any failure.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use dslab::agnostic::{agnostic_trials, mean_and_std_err, PipelineSizes};
use dslab::algebra::{audit_theorem, direction_subspace_dim, AuditOptions, AuditReport, Verdict};
use dslab::dims::{ds_dimension, vc_dimension};
use dslab::hclass::full_cube;
use dslab::learn::{loo_error, oig_list_predict, pac_bound, pac_experiment, trial_rng, SyntheticDistribution};
use dslab::oig::{max_density_subfamily, min_max_orientation, mu, mu_prime, SearchOptions};
use dslab::{build_oig, density, gen_cube, gen_random, HypothesisClass, Label, LabeledSample, OneInclusionGraph};
use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;

type Rows = Vec<Vec<Label>>;

// ---------------------------------------------------------------- oracles

/// Density by pairwise grouping, straight from the definition.
fn oracle_density(rows: &Rows, ell: usize) -> Ratio<u64> {
    let n = rows[0].len();
    let mut total = 0u64;
    for i in 0..n {
        let mut seen = vec![false; rows.len()];
        for a in 0..rows.len() {
            if seen[a] {
                continue;
            }
            let mut size = 0usize;
            for b in 0..rows.len() {
                if (0..n).all(|j| j == i || rows[a][j] == rows[b][j]) {
                    seen[b] = true;
                    size += 1;
                }
            }
            total += size.saturating_sub(ell) as u64;
        }
    }
    Ratio::new(total, rows.len() as u64)
}

fn subsets(rows: &Rows) -> impl Iterator<Item = Rows> + '_ {
    (1u64..1 << rows.len())
        .map(move |m| (0..rows.len()).filter(|&v| m >> v & 1 == 1).map(|v| rows[v].clone()).collect())
}

fn oracle_max_density(rows: &Rows, ell: usize) -> Ratio<u64> {
    subsets(rows).map(|f| oracle_density(&f, ell)).max().unwrap()
}

/// Literal restriction to a coordinate sequence, repeats allowed.
fn restrict(rows: &Rows, seq: &[usize]) -> Rows {
    let set: BTreeSet<Vec<Label>> = rows.iter().map(|r| seq.iter().map(|&c| r[c]).collect()).collect();
    set.into_iter().collect()
}

/// μ over every sequence in `[n]^n_samples` and every subfamily.
fn oracle_mu(rows: &Rows, n_samples: usize, ell: usize) -> Ratio<u64> {
    let n = rows[0].len();
    let total = n.pow(n_samples as u32);
    (0..total)
        .map(|code| {
            let seq: Vec<usize> = (0..n_samples).map(|p| code / n.pow(p as u32) % n).collect();
            oracle_max_density(&restrict(rows, &seq), ell)
        })
        .max()
        .unwrap()
}

/// Rows of `rows` whose every direction-`i` neighbourhood (itself included) exceeds ℓ inside `f`.
fn is_pseudocube(f: &Rows, ell: usize) -> bool {
    let n = f[0].len();
    f.iter().all(|a| (0..n).all(|i| f.iter().filter(|b| (0..n).all(|j| j == i || a[j] == b[j])).count() > ell))
}

/// DS dimension by trying every coordinate set and every subfamily.
fn oracle_ds(rows: &Rows, ell: usize) -> usize {
    let n = rows[0].len();
    let mut best = 0;
    for mask in 1u32..1 << n {
        let coords: Vec<usize> = (0..n).filter(|&c| mask >> c & 1 == 1).collect();
        if coords.len() <= best {
            continue;
        }
        let r = restrict(rows, &coords);
        if r.len() <= 16 && subsets(&r).any(|f| is_pseudocube(&f, ell)) {
            best = coords.len();
        }
    }
    best
}

fn oracle_vc(rows: &Rows) -> usize {
    let n = rows[0].len();
    (0u32..1 << n)
        .filter(|&mask| {
            let coords: Vec<usize> = (0..n).filter(|&c| mask >> c & 1 == 1).collect();
            restrict(rows, &coords).len() == 1 << coords.len()
        })
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// Minimum max-outdegree over every orientation assigning `min(ℓ,|e|)` members per edge.
fn oracle_t_star(g: &OneInclusionGraph, ell: usize) -> usize {
    let choices: Vec<Vec<Vec<usize>>> = g
        .edges()
        .iter()
        .map(|e| {
            let k = ell.min(e.len());
            (0u32..1 << e.len())
                .filter(|m| m.count_ones() as usize == k)
                .map(|m| (0..e.len()).filter(|&i| m >> i & 1 == 1).map(|i| e.members[i]).collect())
                .collect()
        })
        .collect();
    let mut best = usize::MAX;
    let mut idx = vec![0usize; choices.len()];
    loop {
        let mut out = vec![0usize; g.vertex_count()];
        for (e, c) in choices.iter().enumerate() {
            for &v in &g.edge(e).members {
                if !c[idx[e]].contains(&v) {
                    out[v] += 1;
                }
            }
        }
        best = best.min(out.into_iter().max().unwrap_or(0));
        let mut i = 0;
        loop {
            if i == idx.len() {
                return best;
            }
            idx[i] += 1;
            if idx[i] < choices[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------- corpus

fn all_classes_3x3() -> Vec<HypothesisClass> {
    let cube = full_cube(3, 2).unwrap();
    (1u32..1 << 9).map(|m| cube.subfamily((0..9).filter(|&v| m >> v & 1 == 1)).unwrap()).collect()
}

fn random_classes(count: usize, seed: u64) -> Vec<HypothesisClass> {
    (0..count)
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let k = rng.gen_range(2u32..=4);
            let n = rng.gen_range(1usize..=4);
            let size = rng.gen_range(1..=18usize.min((k as usize).pow(n as u32)));
            gen_random(k, n, size, rng.gen()).unwrap()
        })
        .collect()
}

fn nontrivial_edges(g: &OneInclusionGraph) -> usize {
    g.edges().iter().filter(|e| e.len() > 1).count()
}

// ---------------------------------------------------------------- criteria

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn audit_all(
    classes: &[HypothesisClass],
    ells: &[usize],
    n_samples: impl Fn(&HypothesisClass) -> usize + Sync,
) -> Vec<(usize, AuditReport)> {
    let jobs: Vec<(usize, usize)> = (0..classes.len()).flat_map(|c| ells.iter().map(move |&l| (c, l))).collect();
    jobs.par_iter()
        .map(|&(c, ell)| {
            (c, audit_theorem(&classes[c], ell, n_samples(&classes[c]), &AuditOptions::default()).unwrap())
        })
        .collect()
}

fn criterion_1(classes: &[HypothesisClass]) -> Outcome {
    let reports = audit_all(classes, &[1, 2], |_| 2);
    let failed = reports.iter().filter(|(_, r)| r.verdict != Verdict::Pass).count();
    let mismatched = reports
        .par_iter()
        .filter(|(c, r)| {
            let rows = classes[*c].rows().to_vec();
            r.mu.ratio() != oracle_mu(&rows, 2, r.ell) || r.d_ds != oracle_ds(&rows, r.ell)
        })
        .count();
    outcome(
        failed == 0 && mismatched == 0,
        format!(
            "{} audits over 511 classes, {failed} not PASS, {mismatched} disagree with brute-force mu/d_DS",
            reports.len()
        ),
    )
}

fn criterion_2(classes: &[HypothesisClass]) -> Outcome {
    let reports = audit_all(classes, &[1, 2, 3], HypothesisClass::n);
    let failed: Vec<&AuditReport> = reports.iter().map(|(_, r)| r).filter(|r| r.verdict != Verdict::Pass).collect();
    let spanning = reports.iter().all(|(_, r)| r.checks.spanning && r.checks.basis_counting);
    let nat = reports.iter().all(|(_, r)| r.d_nat <= r.d_ds);
    outcome(
        failed.is_empty() && spanning && nat,
        format!(
            "{} audits, {} not PASS, spanning at d_DS {spanning}, d_Nat <= d_DS {nat}",
            reports.len(),
            failed.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, ell, s, m) in [(4u32, 1u32, 2usize, 3usize), (6, 2, 2, 3), (8, 1, 3, 4)] {
        let h = gen_cube(k, ell, s, m).unwrap();
        let got = density(&h, ell as usize);
        let expect = Ratio::new(s as u64 * (k - ell) as u64, k as u64);
        let ds = ds_dimension(&h, ell as usize);
        ok &= got.ratio() == expect && ds.value == s && ds.exact;
        parts.push(format!("({k},{ell},{s},{m}) dens {got} d_DS {}", ds.value));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_4(c1: &[HypothesisClass], c2: &[HypothesisClass]) -> Outcome {
    let classes: Vec<&HypothesisClass> = c1.iter().chain(c2).collect();
    let results: Vec<(bool, usize)> = classes
        .par_iter()
        .flat_map_iter(|h| [1usize, 2, 3].map(|ell| (*h, ell)))
        .map(|(h, ell)| {
            let g = build_oig(h);
            let (_, t) = min_max_orientation(&g, ell);
            let best = max_density_subfamily(h, ell, SearchOptions::default()).unwrap().value;
            let mut ok = t as u64 == best.ceil();
            let small = nontrivial_edges(&g) <= 6;
            if small {
                ok &= t == oracle_t_star(&g, ell);
            }
            (ok, small as usize)
        })
        .collect();
    let bad = results.iter().filter(|r| !r.0).count();
    let exhaustive: usize = results.iter().map(|r| r.1).sum();
    outcome(
        bad == 0,
        format!("{} graphs, {exhaustive} checked against exhaustive orientation, {bad} mismatches", results.len()),
    )
}

fn criterion_5(classes: &[HypothesisClass]) -> Outcome {
    let o = SearchOptions::default();
    let bad = classes
        .par_iter()
        .filter(|h| {
            let m = mu(h, 2, 1, o).unwrap().value.ratio();
            let p = mu_prime(h, 2, o).unwrap().value.ratio();
            !(p <= m * 2 && m <= p)
        })
        .count();
    outcome(bad == 0, format!("{} classes, {bad} violate mu'/2 <= mu <= mu'", classes.len()))
}

fn criterion_6() -> Outcome {
    let cube = full_cube(2, 3).unwrap();
    let mut bad = 0;
    for mask in 1u32..1 << 8 {
        let h = cube.subfamily((0..8).filter(|&v| mask >> v & 1 == 1)).unwrap();
        let vc = vc_dimension(&h).unwrap();
        let rows = h.rows().to_vec();
        if vc != oracle_vc(&rows) || ds_dimension(&h, 1).value != vc {
            bad += 1;
            continue;
        }
        if subsets(&rows).any(|f| oracle_density(&f, 1) > Ratio::from_integer(vc as u64)) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("255 binary classes, {bad} failures"))
}

fn criterion_7() -> Outcome {
    let classes = [
        gen_cube(3, 1, 2, 4).unwrap(),
        full_cube(2, 3).unwrap(),
        gen_random(3, 3, 12, 17).unwrap(),
        gen_random(4, 3, 20, 23).unwrap(),
        gen_cube(4, 2, 2, 3).unwrap(),
    ];
    let results: Vec<bool> = (0..200u64)
        .into_par_iter()
        .map(|run| {
            let h = &classes[run as usize % classes.len()];
            let mut rng = trial_rng(0x100, run);
            let ell = rng.gen_range(1..=2usize);
            let target = rng.gen_range(0..h.len());
            let m = rng.gen_range(1..=24usize);
            let sample =
                LabeledSample::new((0..m).map(|_| rng.gen_range(0..h.n())).map(|x| (x, h.row(target)[x])).collect());
            let r = loo_error(h, &sample, ell).unwrap();
            let direct = (0..m)
                .filter(|&i| {
                    let mut rest = sample.clone();
                    let (x, y) = rest.points.remove(i);
                    !oig_list_predict(h, &rest, x, ell).unwrap().contains(y)
                })
                .count();
            r.mistakes == direct && r.mistakes <= r.t_star && r.t_star <= ds_dimension(h, ell).value
        })
        .collect();
    let bad = results.iter().filter(|&&ok| !ok).count();
    outcome(bad == 0, format!("200 samples over 5 classes, {bad} violate M_n <= t_star <= d_DS"))
}

fn criterion_8() -> Outcome {
    let h = gen_cube(3, 1, 2, 4).unwrap();
    let dist = SyntheticDistribution::uniform_realizable(&h, 4).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for ell in [1usize, 2] {
        for m in [200usize, 500, 1000] {
            let r = pac_experiment(&h, &dist, ell, m, 0.1, 200, 0x8000 + m as u64).unwrap();
            debug_assert_eq!(r.bound, pac_bound(ell, r.d_ds, 0.1, m));
            ok &= r.verdict == Verdict::Pass;
            parts.push(format!("l={ell} m={m} q90={:.4} bound={:.4}", r.quantile_err, r.bound));
        }
    }
    outcome(ok, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let classes = random_classes(100, 0x900);
    let bad = classes
        .par_iter()
        .enumerate()
        .filter(|(i, h)| {
            (1..=3usize)
                .any(|ell| (0..h.n()).any(|dir| !direction_subspace_dim(h, dir, ell, *i as u64).unwrap().agrees()))
        })
        .count();
    outcome(bad == 0, format!("100 classes, every direction and l in 1..=3, {bad} mismatches"))
}

fn criterion_10() -> Outcome {
    let h = gen_cube(3, 1, 2, 4).unwrap();
    let instances = [0, 1, 2, 3];
    let noisy = SyntheticDistribution::noisy(&h, 4, &instances, &[0.25; 4], 0.1).unwrap();
    let sizes = PipelineSizes { n1: 200, t: 200, n3: 800 };
    let agn = agnostic_trials(&h, &noisy, 1, sizes, 0.1, 50, 0xA0, None).unwrap();
    let invariants = agn.all_checks;

    // realizable sanity path: a skewed distribution so both learners make mistakes
    let weights = [0.94, 0.02, 0.02, 0.02];
    let clean = SyntheticDistribution::realizable(&h, 4, &instances, &weights).unwrap();
    let small = PipelineSizes { n1: 40, t: 40, n3: 40 };
    let pipe = agnostic_trials(&h, &clean, 1, small, 0.1, 50, 0xA1, None).unwrap();
    let real = pac_experiment(&h, &clean, 1, small.n3, 0.1, 50, 0xA2).unwrap();
    let (real_mean, real_se) = mean_and_std_err(real.errors.iter().copied());
    let gap = (pipe.mean_error - real_mean).abs();
    let noise = 2.0 * (pipe.error_std_err.powi(2) + real_se.powi(2)).sqrt();
    let comparable = gap <= noise;
    outcome(
        invariants && pipe.all_checks && comparable,
        format!(
            "50 noisy runs invariants {invariants}, median excess {:.4}; realizable pipeline {:.4} vs prefix vote {:.4}, gap {:.4} <= 2se {:.4}",
            agn.median_excess, pipe.mean_error, real_mean, gap, noise
        ),
    )
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let c1 = all_classes_3x3();
    let c2 = random_classes(500, 0x200);
    let mut all = true;
    let mut tally = BTreeMap::new();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("exhaustive theorem audit", Box::new(|| criterion_1(&c1))),
        ("randomized theorem audit", Box::new(|| criterion_2(&c2))),
        ("tightness family", Box::new(criterion_3)),
        ("orientation equality", Box::new(|| criterion_4(&c1, &c2))),
        ("mu vs mu'", Box::new(|| criterion_5(&c1))),
        ("binary cross-check", Box::new(criterion_6)),
        ("leave-one-out bound", Box::new(criterion_7)),
        ("PAC bound", Box::new(criterion_8)),
        ("direction-subspace formula", Box::new(criterion_9)),
        ("agnostic pipeline", Box::new(criterion_10)),
    ];
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        all &= o.pass;
        tally.insert(i + 1, o.pass);
        println!(
            "criterion {:>2} {} {name}: {} [{:.1}s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    let passed = tally.values().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", tally.len());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
