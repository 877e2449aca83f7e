//! Riemann-type sums and the Gould, Birkhoff-simple and Mc Shane integrators.
//!
//! Every integrator is a pure function of `(F, μ, domain, config)`; all
//! randomness comes from streams keyed by the config seed and the instance ids.
//! On finite spaces the singleton partition refines every partition, so all
//! three integrals are computed exactly as `Σ_t μ({t}) F(t)`.

pub mod birkhoff;
pub mod gould;
pub mod mcshane;
pub mod measurability;
pub mod multifunction;
pub mod result;
pub mod riemann;
pub mod sweep;

pub use birkhoff::birkhoff_simple_integral;
pub use gould::gould_integral;
pub use mcshane::mcshane_integral;
pub use measurability::{totally_measurable_witness, MeasurabilityWitness};
pub use multifunction::{MultiSpec, Multifunction, ScalarFn};
pub use result::{Certificate, IntegralResult, Method, Status, TraceEntry};
pub use riemann::{riemann_sum, weighted_sum, RiemannSum};
pub use sweep::{sweep, SweepRow, SweepTable};

use crate::bodies::AxisBox;
use crate::config::IntegratorConfig;
use crate::error::{Error, Result};
use crate::spaces::analysis::Evidence;
use crate::spaces::psi::finite_chain;
use crate::spaces::{MeasurableSet, SetFunction};

/// Runs `method` for the restriction of `F` and `μ` to `A`.
pub fn integrate_on_set(
    method: Method,
    f: &Multifunction,
    mu: &SetFunction,
    domain: &MeasurableSet,
    cfg: &IntegratorConfig,
) -> Result<IntegralResult> {
    match method {
        Method::Gould => gould::gould_on(f, mu, domain, cfg),
        Method::BirkhoffSimple => birkhoff::birkhoff_on(f, mu, domain, cfg),
        Method::McShane => mcshane::mcshane_on(f, mu, domain, cfg),
    }
}

/// Runs `method` on the whole space.
pub fn integrate(method: Method, f: &Multifunction, mu: &SetFunction, cfg: &IntegratorConfig) -> Result<IntegralResult> {
    integrate_on_set(method, f, mu, &mu.space().full(), cfg)
}

pub(crate) fn check_inputs(f: &Multifunction, mu: &SetFunction, domain: &MeasurableSet, cfg: &IntegratorConfig) -> Result<()> {
    cfg.validate()?;
    if !mu.space().admits(domain) || !f.fits_space(mu.space()) {
        return Err(Error::SpaceMismatch);
    }
    Ok(())
}

pub(crate) fn blank_result(
    method: Method,
    f: &Multifunction,
    mu: &SetFunction,
    domain: &MeasurableSet,
    cfg: &IntegratorConfig,
) -> IntegralResult {
    IntegralResult {
        method,
        multifunction: f.id().to_string(),
        set_function: mu.id().to_string(),
        domain: domain.clone(),
        tol: cfg.tol,
        seed: cfg.seed,
        value: AxisBox::zero(f.dim()),
        status: Status::Inconclusive,
        error_bound: 0.0,
        tag_oscillation: 0.0,
        depth: None,
        trace: vec![],
        certificate: Certificate::default(),
    }
}

/// Shortcuts shared by all integrators: finite spaces are exact, and a
/// monotone `μ` with `μ(A) = 0` integrates to `{0}`.
pub(crate) fn shortcut(
    method: Method,
    f: &Multifunction,
    mu: &SetFunction,
    domain: &MeasurableSet,
    cfg: &IntegratorConfig,
) -> Option<IntegralResult> {
    if mu.declared().monotone && mu.eval(domain) == 0.0 {
        let mut r = blank_result(method, f, mu, domain, cfg);
        r.status = Status::Converged;
        r.trace.push(TraceEntry {
            partition: "trivial".into(),
            sum: r.value.clone(),
            h_to_value: 0.0,
            tag_oscillation: Some(0.0),
            tail_bound: None,
        });
        r.certificate.evidence = Some(Evidence::Exhaustive);
        r.certificate.stabilization_index = Some(0);
        r.certificate.notes.push("μ(A) = 0 and μ is monotone: every sum is {0}".into());
        return Some(r);
    }
    matches!(domain, MeasurableSet::Finite { .. }).then(|| finite_exact(method, f, mu, domain, cfg))
}

/// `Σ_t μ({t}) F(t)` in increasing `t`, with the finite refinement chain as trace.
pub fn finite_singleton_sum(f: &Multifunction, mu: &SetFunction, domain: &MeasurableSet) -> AxisBox {
    let MeasurableSet::Finite { n, .. } = *domain else { panic!("singleton sum of a dyadic set") };
    let mut value = AxisBox::zero(f.dim());
    for t in domain.points() {
        value.add_scaled(mu.eval(&MeasurableSet::Finite { mask: 1 << t, n }), &f.eval(t as f64));
    }
    value
}

fn finite_exact(
    method: Method,
    f: &Multifunction,
    mu: &SetFunction,
    domain: &MeasurableSet,
    cfg: &IntegratorConfig,
) -> IntegralResult {
    let mut r = blank_result(method, f, mu, domain, cfg);
    r.value = finite_singleton_sum(f, mu, domain);
    let k = domain.count();
    for j in 0..k {
        let cells = finite_chain(domain, j);
        let tags: Vec<f64> = cells.iter().map(MeasurableSet::representative).collect();
        let masses: Vec<f64> = cells.iter().map(|c| mu.eval(c)).collect();
        let sum = weighted_sum(f, &masses, &tags);
        let h = sum.distance(&r.value);
        r.trace.push(TraceEntry {
            partition: format!("chain:{j}"),
            sum,
            h_to_value: h,
            tag_oscillation: None,
            tail_bound: None,
        });
    }
    if let Some(last) = r.trace.last_mut() {
        // the last chain level is the singleton partition itself
        last.tag_oscillation = Some(0.0);
    }
    r.status = Status::Converged;
    r.depth = Some(k.saturating_sub(1) as u32);
    r.certificate.evidence = Some(Evidence::Exhaustive);
    r.certificate.stabilization_index = Some(r.trace.len().saturating_sub(1));
    r.certificate.notes.push("finite space: the singleton partition refines every partition".into());
    r
}
