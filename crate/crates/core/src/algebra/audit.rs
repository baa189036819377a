//! End-to-end audit of `⌈μ^ℓ_H(n)⌉ ≤ d^ℓ_DS(H)` on one class.

use serde::{Deserialize, Serialize};

use super::{basis_counting, check_spanning, DirectionCount, Spanning, DEFAULT_MONOMIAL_BUDGET, DEFAULT_RANK_SEED};
use crate::dims::{ds_dimension_with_budget, natarajan_dimension_with_budget, DEFAULT_SUBSET_BUDGET};
use crate::error::{Error, Result};
use crate::hclass::{HypothesisClass, Label};
use crate::oig::{min_max_orientation, mu, outdegrees, Density, SearchMode, SearchOptions};

#[derive(Debug, Clone, Copy)]
pub struct AuditOptions {
    pub search: SearchOptions,
    pub subset_budget: u128,
    pub monomial_budget: u128,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            search: SearchOptions::default(),
            subset_budget: DEFAULT_SUBSET_BUDGET,
            monomial_budget: DEFAULT_MONOMIAL_BUDGET,
            seed: DEFAULT_RANK_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Incomplete,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Incomplete => "INCOMPLETE",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpanningRecord {
    /// `"class"` for `H` itself, `"witness"` for the maximizing subfamily.
    pub target: String,
    pub s: usize,
    /// `None` when the monomial budget was exceeded.
    pub result: Option<Spanning>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisCount {
    pub s: usize,
    pub basis_size: usize,
    pub directions: Vec<DirectionCount>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditChecks {
    pub ceil_mu_le_ds: bool,
    pub nat_le_ds: bool,
    pub t_star_eq_ceil_mu: bool,
    pub spanning: bool,
    pub basis_counting: bool,
}

impl AuditChecks {
    pub fn all(&self) -> bool {
        self.ceil_mu_le_ds && self.nat_le_ds && self.t_star_eq_ceil_mu && self.spanning && self.basis_counting
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub class_id: Option<String>,
    pub k: Label,
    pub n: usize,
    pub size: usize,
    pub ell: usize,
    pub n_samples: usize,
    pub mu: Density,
    pub ceil_mu: u64,
    pub mu_exact: bool,
    /// 1-based coordinate sequence attaining `mu`.
    pub mu_sequence: Vec<usize>,
    pub mu_witness: Vec<Vec<Label>>,
    pub d_ds: usize,
    pub d_ds_exact: bool,
    pub d_nat: usize,
    pub d_nat_exact: bool,
    /// Min-max outdegree on the maximizing graph.
    pub t_star: usize,
    pub spanning: Vec<SpanningRecord>,
    pub basis: Option<BasisCount>,
    pub checks: AuditChecks,
    pub authoritative: bool,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl AuditReport {
    /// Checks derived from the stored raw values alone.
    pub fn recompute_checks(&self) -> AuditChecks {
        AuditChecks {
            ceil_mu_le_ds: self.mu.ceil() <= self.d_ds as u64,
            nat_le_ds: self.d_nat <= self.d_ds,
            t_star_eq_ceil_mu: self.t_star as u64 == self.mu.ceil(),
            spanning: self.spanning.iter().all(|r| r.result.as_ref().is_none_or(|s| s.spans && s.rank == s.size)),
            basis_counting: self.basis.as_ref().is_none_or(|b| {
                b.directions.iter().all(DirectionCount::holds)
                    && b.directions.iter().map(|d| d.high).sum::<usize>() <= b.s * b.basis_size
            }),
        }
    }

    pub fn recompute_verdict(&self) -> Verdict {
        let checks = self.recompute_checks();
        match (self.authoritative, checks.all()) {
            (true, true) => Verdict::Pass,
            (true, false) => Verdict::Fail,
            (false, _) => Verdict::Incomplete,
        }
    }
}

fn spanning_record(
    target: &str,
    w: &HypothesisClass,
    ell: usize,
    s: usize,
    opts: &AuditOptions,
) -> Result<SpanningRecord> {
    let result = match check_spanning(w, ell, s, opts.monomial_budget, opts.seed) {
        Ok(r) => Some(r),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(SpanningRecord { target: target.into(), s, result })
}

/// Computes `μ^ℓ_H(n)`, both dimensions, the optimal orientation of the
/// maximizing graph and the spanning/basis certificates, then judges them.
///
/// Budget overruns fall back to bounds and mark the report non-authoritative.
pub fn audit_theorem(h: &HypothesisClass, ell: usize, n_samples: usize, opts: &AuditOptions) -> Result<AuditReport> {
    if ell == 0 {
        return Err(Error::InvalidParameter("list size must be at least 1".into()));
    }
    let mut notes = Vec::new();
    let m = match mu(h, n_samples, ell, opts.search) {
        Ok(m) => m,
        Err(Error::BudgetExceeded { what, needed, cap }) if opts.search.mode == SearchMode::Exact => {
            notes.push(format!("{what}: {needed} over cap {cap}; heuristic lower bound on mu"));
            mu(h, n_samples, ell, SearchOptions { mode: SearchMode::Heuristic, ..opts.search })?
        }
        Err(e) => return Err(e),
    };
    let ds = ds_dimension_with_budget(h, ell, opts.subset_budget);
    let nat = natarajan_dimension_with_budget(h, ell, opts.subset_budget);
    if !ds.exact {
        notes.push("DS dimension search exceeded its budget; value is a lower bound".into());
    }
    if !nat.exact {
        notes.push("Natarajan dimension search exceeded its budget; value is a lower bound".into());
    }

    let graph = m.graph(h, n_samples);
    let (sigma, t_star) = min_max_orientation(&graph, ell);
    let realized = outdegrees(&graph, &sigma)?.into_iter().max().unwrap_or(0);
    if realized != t_star {
        notes.push(format!("orientation realizes outdegree {realized}, solver reported {t_star}"));
    }

    let witness = &m.subfamily;
    let witness_ds = ds_dimension_with_budget(witness, ell, opts.subset_budget);
    let spanning = vec![
        spanning_record("class", h, ell, ds.value, opts)?,
        spanning_record("witness", witness, ell, witness_ds.value, opts)?,
    ];
    if spanning.iter().any(|r| r.result.is_none()) {
        notes.push("monomial budget exceeded; spanning check skipped".into());
    }
    let basis = match basis_counting(witness, ell, witness_ds.value, opts.monomial_budget, opts.seed) {
        Ok(Some(b)) => Some(BasisCount { s: b.s, basis_size: b.basis.len(), directions: b.directions }),
        Ok(None) => {
            notes.push("witness monomials do not span; no basis to count".into());
            None
        }
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };

    let authoritative = m.exact
        && ds.exact
        && nat.exact
        && witness_ds.exact
        && spanning.iter().all(|r| r.result.is_some())
        && (basis.is_some() || spanning[1].result.as_ref().is_some_and(|s| !s.spans))
        && realized == t_star;

    let mut report = AuditReport {
        class_id: None,
        k: h.k(),
        n: h.n(),
        size: h.len(),
        ell,
        n_samples,
        mu: m.value,
        ceil_mu: m.value.ceil(),
        mu_exact: m.exact,
        mu_sequence: m.sequence(n_samples).into_iter().map(|c| c + 1).collect(),
        mu_witness: witness.rows().to_vec(),
        d_ds: ds.value,
        d_ds_exact: ds.exact,
        d_nat: nat.value,
        d_nat_exact: nat.exact,
        t_star,
        spanning,
        basis,
        checks: AuditChecks {
            ceil_mu_le_ds: false,
            nat_le_ds: false,
            t_star_eq_ceil_mu: false,
            spanning: false,
            basis_counting: false,
        },
        authoritative,
        verdict: Verdict::Incomplete,
        notes,
    };
    report.checks = report.recompute_checks();
    report.verdict = report.recompute_verdict();
    Ok(report)
}
