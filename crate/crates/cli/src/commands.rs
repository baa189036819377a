use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use dslab::agnostic::{agnostic_trials, PipelineSizes};
use dslab::algebra::{audit_theorem, basis_counting, check_spanning, AuditOptions, AuditReport, Verdict};
use dslab::dims::{
    ds_dimension_with_budget, natarajan_dimension_with_budget, validate_witness, vc_dimension, Dimension,
    ShatterWitness, WitnessFile,
};
use dslab::learn::{loo_error, pac_experiment, trial_rng, SyntheticDistribution};
use dslab::oig::{max_density_subfamily, min_max_orientation, mu, mu_prime, outdegrees};
use dslab::{build_oig, density, gen_cube, gen_random, load_class, HypothesisClass, Label, SearchMode, SearchOptions};

use crate::output::{envelope, open, write_csv_config, write_json, write_text};
use crate::{ClassArgs, Cli, Command, Format, Outcome};

pub fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Gen { cube, random } => gen(cli, cube.as_deref(), random.as_deref()),
        Command::Dims { class, witness_out } => dims(cli, class, witness_out.as_deref()),
        Command::Density { class } => density_cmd(cli, class),
        Command::Mu { class, n, prime } => mu_cmd(cli, class, *n, *prime),
        Command::Orient { class, n } => orient(cli, class, *n),
        Command::Span { class, s, basis } => span(cli, class, *s, *basis),
        Command::Audit { class, dir, ell, n } => match (class, dir) {
            (Some(path), None) if ell.len() == 1 && format(cli, Format::Json) != Format::Csv => {
                audit_one(cli, path, ell[0], *n)
            }
            (Some(path), None) => audit_batch(cli, std::slice::from_ref(path), ell, *n),
            (None, Some(dir)) => audit_batch(cli, &class_files(dir)?, ell, *n),
            _ => bail!("give exactly one of --class or --dir"),
        },
        Command::Loo { class, m, target, samples } => loo(cli, class, *m, *target, *samples),
        Command::Pac { class, m, delta, trials, target } => pac(cli, class, m, *delta, *trials, *target),
        Command::Agnostic { class, n1, t, n3, noise, target, delta, trials } => {
            let sizes = PipelineSizes { n1: *n1, t: *t, n3: *n3 };
            agnostic(cli, class, sizes, *noise, *target, *delta, *trials)
        }
        Command::ValidateWitness { class, witness } => validate(cli, class, witness),
    }
}

/// Remediation advice for errors a flag can fix.
pub fn hint(err: &anyhow::Error) -> Option<&'static str> {
    match err.downcast_ref::<dslab::Error>()? {
        dslab::Error::BudgetExceeded { what, .. } if what.starts_with("exact subfamily") => {
            Some("raise --max-family (at most 40) or pass --heuristic for a lower bound")
        }
        dslab::Error::BudgetExceeded { what, .. } if what.starts_with("monomial") => {
            Some("raise --budget-matrix or lower --s")
        }
        dslab::Error::BudgetExceeded { .. } => Some("reduce the requested size"),
        dslab::Error::NoWeakSubsample { .. } => Some("increase --n1 or the list size"),
        _ => None,
    }
}

fn format(cli: &Cli, default: Format) -> Format {
    cli.common.format.unwrap_or(default)
}

fn search(cli: &Cli) -> SearchOptions {
    SearchOptions {
        mode: if cli.common.heuristic { SearchMode::Heuristic } else { SearchMode::Exact },
        subset_cap: cli.common.max_family,
    }
}

fn load(path: &Path) -> Result<HypothesisClass> {
    let loaded = load_class(path).with_context(|| format!("cannot load class {}", path.display()))?;
    if loaded.duplicates > 0 {
        eprintln!("warning: dropped {} duplicate rows from {}", loaded.duplicates, path.display());
    }
    Ok(loaded.class)
}

fn check_ell(ell: usize) -> Result<()> {
    if ell == 0 {
        bail!("--ell must be at least 1");
    }
    Ok(())
}

fn target_index(h: &HypothesisClass, target: usize) -> Result<usize> {
    if target == 0 || target > h.len() {
        bail!("--target must be a row number in 1..={}", h.len());
    }
    Ok(target - 1)
}

fn verdict_outcome(v: Verdict) -> Outcome {
    if v == Verdict::Fail {
        Outcome::Fail
    } else {
        Outcome::Ok
    }
}

/// Emits `result` as JSON, or `text` when text output was requested.
fn emit(cli: &Cli, result: serde_json::Value, text: Option<String>, default: Format) -> Result<()> {
    match format(cli, default) {
        Format::Json => write_json(cli, &envelope(cli, result)?),
        Format::Text => match text {
            Some(t) => write_text(cli, &t),
            None => bail!("text output is not available for this command"),
        },
        Format::Csv => bail!("CSV output is only available for batch commands (audit, pac) and gen"),
    }
}

fn parse_params(text: &str, keys: &[&str]) -> Result<BTreeMap<String, u64>> {
    let mut out = BTreeMap::new();
    for part in text.split(',').filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| anyhow!("expected key=value, got {part:?}"))?;
        let key = key.trim();
        if !keys.contains(&key) {
            bail!("unknown parameter {key:?}; expected {}", keys.join(", "));
        }
        let value = value.trim().parse().with_context(|| format!("parameter {key} is not a non-negative integer"))?;
        out.insert(key.to_string(), value);
    }
    for key in keys {
        if !out.contains_key(*key) {
            bail!("missing parameter {key}");
        }
    }
    Ok(out)
}

fn label(v: u64) -> Result<Label> {
    Label::try_from(v).map_err(|_| anyhow!("label count {v} too large"))
}

fn gen(cli: &Cli, cube: Option<&str>, random: Option<&str>) -> Result<Outcome> {
    let class = match (cube, random) {
        (Some(text), _) => {
            let p = parse_params(text, &["k", "ell", "s", "m"])?;
            gen_cube(label(p["k"])?, label(p["ell"])?, p["s"] as usize, p["m"] as usize)?
        }
        (None, Some(text)) => {
            let p = parse_params(text, &["k", "n", "size"])?;
            gen_random(label(p["k"])?, p["n"] as usize, p["size"] as usize, cli.common.seed)?
        }
        (None, None) => bail!("give --cube or --random"),
    };
    match format(cli, Format::Json) {
        Format::Csv => write_text(cli, class.to_csv().trim_end()),
        Format::Json => {
            let mut value = serde_json::to_value(class.to_file())?;
            value["config"] = serde_json::to_value(cli)?;
            value["generated_at"] = json!(crate::output::timestamp());
            write_json(cli, &value)
        }
        Format::Text => bail!("gen writes json or csv"),
    }?;
    Ok(Outcome::Ok)
}

fn dimension_json(d: &Dimension) -> serde_json::Value {
    json!({
        "value": d.value,
        "exact": d.exact,
        "witness": d.witness.as_ref().map(ShatterWitness::to_file),
    })
}

fn dims(cli: &Cli, args: &ClassArgs, witness_out: Option<&Path>) -> Result<Outcome> {
    check_ell(args.ell)?;
    let h = load(&args.class)?;
    let ds = ds_dimension_with_budget(&h, args.ell, cli.common.budget_subsets);
    let nat = natarajan_dimension_with_budget(&h, args.ell, cli.common.budget_subsets);
    let vc = if h.k() == 2 { Some(vc_dimension(&h)?) } else { None };
    if let Some(path) = witness_out {
        let w = ds.witness.as_ref().ok_or_else(|| anyhow!("DS dimension is 0, there is no witness to write"))?;
        let mut out = open(Some(path))?;
        serde_json::to_writer_pretty(&mut out, &w.to_file())?;
        out.flush()?;
    }
    if !ds.exact || !nat.exact {
        eprintln!("warning: subset budget exhausted; reported dimensions are lower bounds (raise --budget-subsets)");
    }
    let text = format!("d_ds={} d_nat={}", ds.value, nat.value);
    let result = json!({ "ell": args.ell, "ds": dimension_json(&ds), "natarajan": dimension_json(&nat), "vc": vc });
    emit(cli, result, Some(text), Format::Json)?;
    Ok(Outcome::Ok)
}

fn density_cmd(cli: &Cli, args: &ClassArgs) -> Result<Outcome> {
    check_ell(args.ell)?;
    let h = load(&args.class)?;
    let whole = density(&h, args.ell);
    let best = max_density_subfamily(&h, args.ell, search(cli))?;
    let result = json!({
        "ell": args.ell,
        "density": whole,
        "max_density": best.value,
        "exact": best.exact,
        "members": best.members.iter().map(|m| m + 1).collect::<Vec<_>>(),
        "subfamily": best.class.rows(),
    });
    emit(cli, result, Some(best.value.to_string()), Format::Json)?;
    Ok(Outcome::Ok)
}

fn mu_cmd(cli: &Cli, args: &ClassArgs, n: usize, prime: bool) -> Result<Outcome> {
    check_ell(args.ell)?;
    let h = load(&args.class)?;
    let res = if prime { mu_prime(&h, n, search(cli))? } else { mu(&h, n, args.ell, search(cli))? };
    let sequence: Vec<usize> = res.sequence(n).iter().map(|c| c + 1).collect();
    let result = json!({
        "ell": args.ell,
        "n": n,
        "variant": if prime { "nontrivial-edges" } else { "list-weighted" },
        "mu": res.value,
        "ceil_mu": res.value.ceil(),
        "exact": res.exact,
        "sequence": sequence,
        "subfamily": res.subfamily.rows(),
    });
    emit(cli, result, Some(res.value.to_string()), Format::Text)?;
    Ok(Outcome::Ok)
}

fn orient(cli: &Cli, args: &ClassArgs, n: Option<usize>) -> Result<Outcome> {
    check_ell(args.ell)?;
    let h = load(&args.class)?;
    let (graph, sequence) = match n {
        Some(n) => {
            let res = mu(&h, n, args.ell, search(cli))?;
            let seq: Vec<usize> = res.sequence(n).iter().map(|c| c + 1).collect();
            (res.graph(&h, n), Some(seq))
        }
        None => (build_oig(&h), None),
    };
    let (sigma, t_star) = min_max_orientation(&graph, args.ell);
    let result = json!({
        "ell": args.ell,
        "sequence": sequence,
        "vertices": graph.class().rows(),
        "t_star": t_star,
        "outdegrees": outdegrees(&graph, &sigma)?,
        "orientation": sigma.to_file(&graph),
    });
    emit(cli, result, Some(t_star.to_string()), Format::Json)?;
    Ok(Outcome::Ok)
}

fn span(cli: &Cli, args: &ClassArgs, s: Option<usize>, basis: bool) -> Result<Outcome> {
    check_ell(args.ell)?;
    let h = load(&args.class)?;
    let ds = ds_dimension_with_budget(&h, args.ell, cli.common.budget_subsets);
    let s = s.unwrap_or(ds.value);
    let sp = check_spanning(&h, args.ell, s, cli.common.budget_matrix, cli.common.seed)?;
    let counting =
        if basis { basis_counting(&h, args.ell, s, cli.common.budget_matrix, cli.common.seed)? } else { None };
    // spanning is only claimed from the DS dimension upward
    let claimed = ds.exact && s >= ds.value;
    let verdict = match (claimed, sp.spans) {
        (true, true) => Some(Verdict::Pass),
        (true, false) => Some(Verdict::Fail),
        _ => None,
    };
    let text = format!("spans={} rank={} size={}", sp.spans, sp.rank, sp.size);
    let result = json!({
        "ell": args.ell,
        "s": s,
        "d_ds": ds.value,
        "spanning": sp,
        "basis_counting": counting,
        "verdict": verdict,
    });
    emit(cli, result, Some(text), Format::Json)?;
    Ok(verdict.map_or(Outcome::Ok, verdict_outcome))
}

fn audit_options(cli: &Cli) -> AuditOptions {
    AuditOptions {
        search: search(cli),
        subset_budget: cli.common.budget_subsets,
        monomial_budget: cli.common.budget_matrix,
        seed: cli.common.seed,
    }
}

fn audit_class(cli: &Cli, path: &Path, ell: usize, n: Option<usize>) -> Result<AuditReport> {
    check_ell(ell)?;
    let h = load(path)?;
    let mut report = audit_theorem(&h, ell, n.unwrap_or(h.n()), &audit_options(cli))?;
    report.class_id = Some(path.display().to_string());
    Ok(report)
}

fn audit_one(cli: &Cli, path: &Path, ell: usize, n: Option<usize>) -> Result<Outcome> {
    let report = audit_class(cli, path, ell, n)?;
    if report.verdict == Verdict::Incomplete {
        eprintln!("warning: audit incomplete: {}", report.notes.join("; "));
    }
    let text = report.verdict.to_string();
    let outcome = verdict_outcome(report.verdict);
    emit(cli, serde_json::to_value(&report)?, Some(text), Format::Json)?;
    Ok(outcome)
}

fn class_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

const AUDIT_COLUMNS: [&str; 12] = [
    "class",
    "ell",
    "n_samples",
    "mu_num",
    "mu_den",
    "ceil_mu",
    "d_ds",
    "d_nat",
    "t_star",
    "spanning",
    "verdict",
    "error",
];

/// Streams one row per (class, ℓ); a class that fails to load or audit gets an
/// ERROR row and the run continues.
fn audit_batch(cli: &Cli, files: &[PathBuf], ells: &[usize], n: Option<usize>) -> Result<Outcome> {
    write_csv_config(cli)?;
    let mut out = csv::Writer::from_writer(open(cli.common.output.as_deref())?);
    out.write_record(AUDIT_COLUMNS)?;
    out.flush()?;
    let (mut failed, mut errored) = (false, false);
    for path in files {
        for &ell in ells {
            let name = path.display().to_string();
            let row = match audit_class(cli, path, ell, n) {
                Ok(r) => {
                    failed |= r.verdict == Verdict::Fail;
                    let spanning =
                        match r.spanning.iter().map(|s| s.result.as_ref().map(|x| x.spans)).collect::<Option<Vec<_>>>()
                        {
                            Some(v) => v.iter().all(|&b| b).to_string(),
                            None => "unknown".to_string(),
                        };
                    vec![
                        name,
                        ell.to_string(),
                        r.n_samples.to_string(),
                        r.mu.numer().to_string(),
                        r.mu.denom().to_string(),
                        r.ceil_mu.to_string(),
                        r.d_ds.to_string(),
                        r.d_nat.to_string(),
                        r.t_star.to_string(),
                        spanning,
                        r.verdict.to_string(),
                        String::new(),
                    ]
                }
                Err(e) => {
                    errored = true;
                    let mut row = vec![name, ell.to_string()];
                    row.extend(std::iter::repeat_n(String::new(), 8));
                    row.extend(["ERROR".to_string(), format!("{e:#}")]);
                    row
                }
            };
            out.write_record(&row)?;
            out.flush()?;
        }
    }
    if errored {
        bail!("some classes could not be audited; see the error column");
    }
    Ok(if failed { Outcome::Fail } else { Outcome::Ok })
}

fn loo(cli: &Cli, args: &ClassArgs, m: usize, target: usize, samples: usize) -> Result<Outcome> {
    check_ell(args.ell)?;
    let h = load(&args.class)?;
    let dist = SyntheticDistribution::uniform_realizable(&h, target_index(&h, target)?)?;
    let mut runs = Vec::with_capacity(samples);
    for i in 0..samples {
        let sample = dist.sample(&mut trial_rng(cli.common.seed, i as u64), m);
        runs.push(loo_error(&h, &sample, args.ell)?);
    }
    let holds = runs.iter().all(|r| r.holds());
    let verdict = if holds { Verdict::Pass } else { Verdict::Fail };
    let mistakes: usize = runs.iter().map(|r| r.mistakes).sum();
    let text = format!("{verdict} mistakes={mistakes} over {samples} samples of size {m}");
    let result = json!({ "ell": args.ell, "m": m, "target": target, "runs": runs, "verdict": verdict });
    emit(cli, result, Some(text), Format::Json)?;
    Ok(verdict_outcome(verdict))
}

fn pac(cli: &Cli, args: &ClassArgs, sizes: &[usize], delta: f64, trials: usize, target: usize) -> Result<Outcome> {
    check_ell(args.ell)?;
    let h = load(&args.class)?;
    let dist = SyntheticDistribution::uniform_realizable(&h, target_index(&h, target)?)?;
    let fmt = format(cli, if sizes.len() > 1 { Format::Csv } else { Format::Json });
    let mut reports = Vec::new();
    let mut writer = None;
    if fmt == Format::Csv {
        write_csv_config(cli)?;
        let mut w = csv::Writer::from_writer(open(cli.common.output.as_deref())?);
        w.write_record(["m", "quantile_err", "mean_err", "bound", "verdict"])?;
        w.flush()?;
        writer = Some(w);
    }
    for &m in sizes {
        let mut report = pac_experiment(&h, &dist, args.ell, m, delta, trials, cli.common.seed)?;
        report.class = Some(args.class.display().to_string());
        if let Some(w) = writer.as_mut() {
            w.write_record([
                m.to_string(),
                report.quantile_err.to_string(),
                report.mean_err.to_string(),
                report.bound.to_string(),
                report.verdict.to_string(),
            ])?;
            w.flush()?;
        }
        reports.push(report);
    }
    let failed = reports.iter().any(|r| r.verdict == Verdict::Fail);
    if writer.is_none() {
        let text = reports
            .iter()
            .map(|r| format!("m={} quantile={:.4} bound={:.4} {}", r.m, r.quantile_err, r.bound, r.verdict))
            .collect::<Vec<_>>()
            .join("\n");
        let result =
            if reports.len() == 1 { serde_json::to_value(&reports[0])? } else { serde_json::to_value(&reports)? };
        emit(cli, result, Some(text), Format::Json)?;
    }
    Ok(if failed { Outcome::Fail } else { Outcome::Ok })
}

fn agnostic(
    cli: &Cli,
    args: &ClassArgs,
    sizes: PipelineSizes,
    noise: f64,
    target: usize,
    delta: f64,
    trials: usize,
) -> Result<Outcome> {
    check_ell(args.ell)?;
    let h = load(&args.class)?;
    let instances: Vec<usize> = (0..h.n()).collect();
    let weights = vec![1.0 / h.n() as f64; h.n()];
    let dist = SyntheticDistribution::noisy(&h, target_index(&h, target)?, &instances, &weights, noise)?;
    let summary = agnostic_trials(&h, &dist, args.ell, sizes, delta, trials, cli.common.seed, None)?;
    let verdict = if summary.all_checks { Verdict::Pass } else { Verdict::Fail };
    let text = format!(
        "{verdict} median_excess={:.4} mean_error={:.4}±{:.4}",
        summary.median_excess, summary.mean_error, summary.error_std_err
    );
    let mut result = serde_json::to_value(&summary)?;
    result["verdict"] = serde_json::to_value(verdict)?;
    emit(cli, result, Some(text), Format::Json)?;
    Ok(verdict_outcome(verdict))
}

fn validate(cli: &Cli, class: &Path, witness: &Path) -> Result<Outcome> {
    let h = load(class)?;
    let text =
        std::fs::read_to_string(witness).with_context(|| format!("cannot read witness {}", witness.display()))?;
    let file: WitnessFile =
        serde_json::from_str(&text).with_context(|| format!("malformed witness {}", witness.display()))?;
    let check = ShatterWitness::from_file(file).and_then(|w| validate_witness(&h, &w).map(|_| w));
    let (valid, reason, dimension) = match &check {
        Ok(w) => (true, None, Some(w.coords.len())),
        Err(e) => (false, Some(e.to_string()), None),
    };
    let verdict = if valid { Verdict::Pass } else { Verdict::Fail };
    let line = match &reason {
        Some(r) => format!("{verdict}: {r}"),
        None => verdict.to_string(),
    };
    let result = json!({ "valid": valid, "reason": reason, "shattered": dimension, "verdict": verdict });
    emit(cli, result, Some(line), Format::Json)?;
    Ok(verdict_outcome(verdict))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_parse_and_reject() {
        let p = parse_params("k=3, ell=1,s=1,m=2", &["k", "ell", "s", "m"]).unwrap();
        assert_eq!((p["k"], p["ell"], p["s"], p["m"]), (3, 1, 1, 2));
        assert!(parse_params("k=3,ell=1,s=1", &["k", "ell", "s", "m"]).is_err());
        assert!(parse_params("k=3,x=1", &["k"]).is_err());
        assert!(parse_params("k=-1", &["k"]).is_err());
        assert!(parse_params("k", &["k"]).is_err());
    }

    #[test]
    fn budget_errors_get_hints() {
        let err: anyhow::Error = dslab::Error::BudgetExceeded { what: "monomial set size", needed: 10, cap: 5 }.into();
        assert!(hint(&err).unwrap().contains("--budget-matrix"));
        assert!(hint(&anyhow!("plain")).is_none());
    }
}
