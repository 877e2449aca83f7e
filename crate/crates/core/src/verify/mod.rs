//! Executable checks of the structure theorems, with brute-force oracles on
//! finite spaces.
//!
//! Each theorem id runs a suite of instances drawn from a catalog. Instances
//! whose hypotheses fail (declared flags, or a counterexample found by
//! [`classify`]) are reported as skipped with the reason; some are also run as
//! negative controls. Reports are ordered by instance label, and every
//! instance records the seed it ran with.

mod algebra;
mod brute;
mod integrals;
mod measures;

use std::cell::RefCell;
use std::collections::BTreeMap;

use serde::Serialize;

pub use brute::{brute_force_finite_gould, set_partitions, BruteForceGould, BRUTE_FORCE_MAX};
pub use integrals::scalar_chain_integral;

use crate::catalog::Catalog;
use crate::config::IntegratorConfig;
use crate::error::{Error, Result};
use crate::spaces::analysis::{classify, Evidence, PropertyReport};
use crate::spaces::{Property, SetFunction};

/// Trials used when hypotheses are checked with [`classify`].
pub const CLASSIFY_TRIALS: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "camelCase")]
pub enum Outcome {
    Pass,
    Fail { reason: String },
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InstanceOutcome {
    pub instance: String,
    pub seed: u64,
    #[serde(flatten)]
    pub outcome: Outcome,
    /// The measured quantity compared against `allowed`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allowed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Evidence>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl InstanceOutcome {
    fn new(instance: impl Into<String>, seed: u64, outcome: Outcome) -> Self {
        Self {
            instance: instance.into(),
            seed,
            outcome,
            discrepancy: None,
            allowed: None,
            evidence: None,
            detail: String::new(),
        }
    }

    /// Pass iff `discrepancy ≤ allowed`.
    fn measured(instance: impl Into<String>, seed: u64, discrepancy: f64, allowed: f64, evidence: Evidence) -> Self {
        let outcome = if discrepancy <= allowed {
            Outcome::Pass
        } else {
            Outcome::Fail { reason: format!("discrepancy {discrepancy:.3e} exceeds {allowed:.3e}") }
        };
        Self {
            discrepancy: Some(discrepancy),
            allowed: Some(allowed),
            evidence: Some(evidence),
            ..Self::new(instance, seed, outcome)
        }
    }

    fn skipped(instance: impl Into<String>, seed: u64, reason: impl Into<String>) -> Self {
        Self::new(instance, seed, Outcome::Skipped { reason: reason.into() })
    }

    fn failed(instance: impl Into<String>, seed: u64, reason: impl Into<String>) -> Self {
        Self::new(instance, seed, Outcome::Fail { reason: reason.into() })
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    fn with_evidence(mut self, e: Evidence) -> Self {
        self.evidence = Some(e);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TheoremReport {
    pub theorem_id: String,
    pub statement: String,
    pub seed: u64,
    pub tol: f64,
    pub instances: Vec<InstanceOutcome>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    /// Largest discrepancy among passing and failing instances.
    pub worst_discrepancy: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl TheoremReport {
    /// No failures and at least one pass.
    pub fn success(&self) -> bool {
        self.failed == 0 && self.passed > 0
    }

    pub fn summary(&self) -> SummaryRow {
        SummaryRow {
            theorem_id: self.theorem_id.clone(),
            instances: self.instances.len(),
            passed: self.passed,
            failed: self.failed,
            skipped: self.skipped,
            worst_discrepancy: self.worst_discrepancy,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryRow {
    pub theorem_id: String,
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub worst_discrepancy: f64,
}

/// One summary row per report, with a header.
pub fn summary_csv(reports: &[TheoremReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(r.summary()).map_err(|e| Error::Unsupported(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Unsupported(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub struct TheoremInfo {
    pub id: &'static str,
    pub statement: &'static str,
}

pub const THEOREMS: &[TheoremInfo] = &[
    TheoremInfo { id: "2.6", statement: "on an atom A of a null-additive monotone μ exactly one part of any partition of A carries μ(A), and the variation of μ on A is μ(A)" },
    TheoremInfo { id: "2.8", statement: "h(αA, βA) ≤ |α-β| |A|; h(A⊕B, C⊕D) ≤ h(A,C) + h(B,D); h(A⊕C, B⊕C) ≤ h(A,B); h(A,B) ≤ |A| + |B|" },
    TheoremInfo { id: "ex3.7", statement: "Birkhoff-simple integrals on disjoint A, B add up to the integral on A ∪ B" },
    TheoremInfo { id: "ex4.1", statement: "for bounded F and countably additive μ, F is Gould integrable iff it is Birkhoff-simple integrable, with the same integral" },
    TheoremInfo { id: "ex4.3", statement: "on an atom of a σ-null-null-additive monotone μ both integrals of a continuous F equal F(t0) μ(T)" },
    TheoremInfo { id: "finite-oracle", statement: "on a finite space every integral equals the brute-force Gould value Σ F(t) μ({t})" },
    TheoremInfo { id: "general", statement: "for monotone, integrable μ continuous from below, Gould and Birkhoff-simple integrability with respect to μ and to Ψ coincide, with the same integral" },
    TheoremInfo { id: "integraleck", statement: "every converged integral is a box" },
    TheoremInfo { id: "labu", statement: "j(A) = (hi, -lo) is an isometry for h, additive under ⊕ and non-negative scaling, and maps co(A ∪ C) to max(j(A), j(C))" },
    TheoremInfo { id: "metric", statement: "h is a metric on boxes" },
    TheoremInfo { id: "mupsiwb", statement: "F is Gould integrable with respect to μ iff it is with respect to Ψ, with the same integral" },
    TheoremInfo { id: "negative-controls", statement: "hypotheses matter: √λ is not integrable, λ² is not additive, atoms block the free-tag argument, jumps at an atom block convergence" },
    TheoremInfo { id: "prop-h", statement: "|h(A⊕B, C) - h(A, C)| ≤ |B|" },
    TheoremInfo { id: "psisigmaadd", statement: "for monotone integrable μ continuous from below, Ψ is continuous along increasing chains" },
    TheoremInfo { id: "scalarization", statement: "each embedding coordinate of the integral is the scalar integral of that coordinate of j∘F" },
    TheoremInfo { id: "wbvms-ca", statement: "for pointwise non-atomic countably additive μ a Birkhoff-simple integrable F is Mc Shane integrable with the same integral; u.t. and general sums agree" },
    TheoremInfo { id: "wbvms-fa", statement: "the finitely additive case for F with compact support" },
];

pub fn theorem_ids() -> impl Iterator<Item = &'static str> {
    THEOREMS.iter().map(|t| t.id)
}

/// Shared state of one suite run.
pub(crate) struct Ctx<'a> {
    pub catalog: &'a Catalog,
    pub cfg: &'a IntegratorConfig,
    filter: Option<&'a str>,
    classified: RefCell<BTreeMap<String, PropertyReport>>,
    pub out: Vec<InstanceOutcome>,
    pub notes: Vec<String>,
}

impl<'a> Ctx<'a> {
    pub fn seed(&self) -> u64 {
        self.cfg.seed
    }

    pub fn wants(&self, label: &str) -> bool {
        self.filter.is_none_or(|f| label.contains(f))
    }

    pub fn push(&mut self, o: InstanceOutcome) {
        if self.wants(&o.instance) {
            self.out.push(o);
        }
    }

    /// The first unmet hypothesis among `required`: either not declared, or
    /// refuted by a witness from [`classify`].
    pub fn unmet(&self, mu: &SetFunction, required: &[Property]) -> Option<String> {
        let declared = mu.declared();
        if let Some(p) = required.iter().find(|&&p| !declared.get(p)) {
            return Some(format!("{} is not declared {}", mu.id(), p.name()));
        }
        let mut cache = self.classified.borrow_mut();
        let report = cache
            .entry(mu.id().to_string())
            .or_insert_with(|| classify(mu, CLASSIFY_TRIALS, self.cfg.seed));
        required.iter().find_map(|&p| {
            let c = report.check(p);
            (c.observed == Some(false)).then(|| {
                let note = c.witness.as_ref().map_or(String::new(), |w| format!(": {}", w.note));
                format!("classify refutes {} for {}{note}", p.name(), mu.id())
            })
        })
    }
}

/// Runs the suite of `theorem_id` on `catalog`. `filter` keeps the instances
/// whose label contains it.
pub fn check_theorem(
    theorem_id: &str,
    catalog: &Catalog,
    filter: Option<&str>,
    cfg: &IntegratorConfig,
) -> Result<TheoremReport> {
    cfg.validate()?;
    let info = THEOREMS
        .iter()
        .find(|t| t.id == theorem_id)
        .ok_or_else(|| Error::UnknownTheorem(theorem_id.to_string()))?;
    let mut ctx = Ctx { catalog, cfg, filter, classified: RefCell::new(BTreeMap::new()), out: vec![], notes: vec![] };
    match theorem_id {
        "2.8" => algebra::prop_2_8(&mut ctx),
        "prop-h" => algebra::prop_h(&mut ctx),
        "metric" => algebra::metric(&mut ctx),
        "labu" => algebra::labu(&mut ctx),
        "2.6" => measures::atom_collapse(&mut ctx)?,
        "psisigmaadd" => measures::psi_sigma_additive(&mut ctx)?,
        "negative-controls" => measures::negative_controls(&mut ctx)?,
        "finite-oracle" => integrals::finite_oracle(&mut ctx)?,
        "ex4.1" => integrals::gould_vs_birkhoff(&mut ctx)?,
        "ex4.3" => integrals::atom_equivalence(&mut ctx)?,
        "general" => integrals::general(&mut ctx)?,
        "mupsiwb" => integrals::mu_vs_psi(&mut ctx)?,
        "wbvms-ca" => integrals::birkhoff_vs_mcshane(&mut ctx, false)?,
        "wbvms-fa" => integrals::birkhoff_vs_mcshane(&mut ctx, true)?,
        "ex3.7" => integrals::additivity(&mut ctx)?,
        "scalarization" => integrals::scalarization(&mut ctx)?,
        "integraleck" => integrals::integral_is_a_box(&mut ctx)?,
        _ => unreachable!("registry and dispatch list the same ids"),
    }
    let mut instances = ctx.out;
    instances.sort_by(|a, b| a.instance.cmp(&b.instance));
    let count = |f: fn(&Outcome) -> bool| instances.iter().filter(|o| f(&o.outcome)).count();
    let passed = count(|o| matches!(o, Outcome::Pass));
    let failed = count(|o| matches!(o, Outcome::Fail { .. }));
    let skipped = count(|o| matches!(o, Outcome::Skipped { .. }));
    let worst_discrepancy = instances
        .iter()
        .filter(|o| !matches!(o.outcome, Outcome::Skipped { .. }))
        .filter_map(|o| o.discrepancy)
        .fold(0.0, f64::max);
    Ok(TheoremReport {
        theorem_id: theorem_id.to_string(),
        statement: info.statement.to_string(),
        seed: cfg.seed,
        tol: cfg.tol,
        instances,
        passed,
        failed,
        skipped,
        worst_discrepancy,
        notes: ctx.notes,
    })
}

/// The negative-control suite on its own.
pub fn negative_controls(catalog: &Catalog, cfg: &IntegratorConfig) -> Result<TheoremReport> {
    check_theorem("negative-controls", catalog, None, cfg)
}
