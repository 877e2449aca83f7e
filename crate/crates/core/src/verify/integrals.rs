//! Suites comparing the integrators with each other and with oracles.

use rand::Rng;

use super::algebra::random_box;
use super::brute::brute_force_finite_gould;
use super::{Ctx, InstanceOutcome, Outcome};
use crate::bodies::EmbeddedVector;
use crate::error::Result;
use crate::integrate::{integrate_on_set, IntegralResult, Method, MultiSpec, Multifunction, Status};
use crate::rng;
use crate::spaces::analysis::{is_atom, random_dyadic_set, Evidence};
use crate::spaces::{DyadicCell, MeasurableSet, Property, SetFunction, RESOLUTION};

/// Multifunctions used with the expensive Ψ-based set functions.
pub const SAMPLE_F: [&str; 3] = ["box-linear", "point-identity", "step-half"];
/// Random instances of the finite oracle suite.
pub const RANDOM_FINITE: usize = 20;
/// Disjoint pairs of the additivity suite.
pub const PAIRS: usize = 20;

/// `∫ g dμ` over `domain` by midpoint-tagged sums along the dyadic chain,
/// stopping once two successive differences fall below `tol / 8`. Finite
/// domains sum over singletons. `None` when `max_depth` is reached first.
pub fn scalar_chain_integral(
    g: impl Fn(f64) -> f64,
    mu: &SetFunction,
    domain: &MeasurableSet,
    tol: f64,
    max_depth: u32,
) -> Option<f64> {
    if let MeasurableSet::Finite { n, .. } = *domain {
        let s = domain.points().into_iter().map(|t| mu.eval(&MeasurableSet::Finite { mask: 1 << t, n }) * g(t as f64));
        return Some(s.sum());
    }
    let level = |m: u32| -> f64 { domain.split_at_depth(m).iter().map(|c| mu.eval(c) * g(c.representative())).sum() };
    let mut prev = level(0);
    let mut calm = 0;
    for m in 1..=max_depth.min(RESOLUTION) {
        let s = level(m);
        calm = if (s - prev).abs() < tol / 8.0 { calm + 1 } else { 0 };
        if calm == 2 {
            return Some(s);
        }
        prev = s;
    }
    None
}

fn run(method: Method, f: &Multifunction, mu: &SetFunction, domain: &MeasurableSet, ctx: &Ctx) -> Result<IntegralResult> {
    integrate_on_set(method, f, mu, domain, ctx.cfg)
}

fn status_note(r: &IntegralResult) -> String {
    format!("{} {:?}, value {}, bound {:.2e}", r.method, r.status, r.value, r.error_bound)
}

/// The multifunctions on `mu`'s space, cut down to [`SAMPLE_F`] when `mu` is Ψ-based.
fn fitting<'a>(ctx: &Ctx<'a>, mu: &SetFunction, sample_only: bool) -> Vec<&'a Multifunction> {
    ctx.catalog
        .multifunctions()
        .filter(|f| f.fits_space(mu.space()))
        .filter(|f| !sample_only || SAMPLE_F.contains(&f.id()))
        .collect()
}

fn is_psi_based(mu: &SetFunction) -> bool {
    fn walk(spec: &crate::spaces::MeasureSpec) -> bool {
        use crate::spaces::MeasureSpec as S;
        match spec {
            S::Psi { .. } => true,
            S::Sum { terms } => terms.iter().any(walk),
            _ => false,
        }
    }
    walk(mu.spec())
}

fn random_finite_mu(rng: &mut rng::Rng, n: usize, kind: usize) -> Result<SetFunction> {
    let weights: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..2.0) }).collect();
    match kind % 3 {
        0 => SetFunction::finite_weights(&weights),
        1 => SetFunction::finite_power(&weights, if rng.gen_bool(0.5) { 0.5 } else { 2.0 }),
        _ => {
            // monotone and maxitive, far from additive
            let values: Vec<f64> = (0..1u64 << n)
                .map(|mask| (0..n).filter(|t| mask & (1 << t) != 0).map(|t| weights[t]).fold(0.0, f64::max))
                .collect();
            SetFunction::finite_table(&values)
        }
    }
}

pub(super) fn finite_oracle(ctx: &mut Ctx) -> Result<()> {
    let seed = ctx.seed();
    let mut cases: Vec<(String, Multifunction, SetFunction)> = vec![];
    for inst in ctx.catalog.instances() {
        let (f, mu, domain) = ctx.catalog.resolve(&inst.id)?;
        if mu.space().is_dyadic() {
            continue;
        }
        if domain != mu.space().full() {
            ctx.push(InstanceOutcome::skipped(inst.id.clone(), seed, "the oracle enumerates whole spaces only"));
            continue;
        }
        cases.push((inst.id.clone(), f.clone(), mu.clone()));
    }
    let mut rng = rng::stream(seed, "finite-oracle");
    for i in 0..RANDOM_FINITE {
        let n = rng.gen_range(1..=6);
        let d = rng.gen_range(1..=2);
        let values = (0..n).map(|_| random_box(&mut rng, d)).collect();
        let f = Multifunction::new(format!("random#{i}"), MultiSpec::Table { values })?;
        let mu = random_finite_mu(&mut rng, n, i)?;
        cases.push((format!("random#{i:02}/n={n}"), f, mu));
    }
    for (label, f, mu) in cases {
        if !ctx.wants(&label) {
            continue;
        }
        let MultiSpec::Table { values } = f.spec() else { unreachable!("finite instances use tables") };
        let oracle = brute_force_finite_gould(values, &mu)?;
        let full = mu.space().full();
        let mut worst: f64 = 0.0;
        let mut notes = vec![];
        for m in Method::ALL {
            let r = run(m, &f, &mu, &full, ctx)?;
            if r.status != Status::Converged {
                notes.push(format!("{m} did not converge"));
                worst = f64::INFINITY;
            } else {
                worst = worst.max(r.value.distance(&oracle.value));
            }
        }
        let mut o = InstanceOutcome::measured(&label, seed, worst, 0.0, Evidence::Exhaustive).with_detail(format!(
            "{} partitions, {} tagged sums, value {}",
            oracle.partitions, oracle.tagged_sums, oracle.value
        ));
        if !oracle.singletons_dominate || oracle.violations > 0 {
            o.outcome = Outcome::Fail { reason: "the singleton partition does not determine the sums".into() };
        } else if !notes.is_empty() {
            o.outcome = Outcome::Fail { reason: notes.join("; ") };
        }
        ctx.push(o);
    }
    Ok(())
}

pub(super) fn gould_vs_birkhoff(ctx: &mut Ctx) -> Result<()> {
    let (seed, tol) = (ctx.seed(), ctx.cfg.tol);
    let mus: Vec<SetFunction> = ctx.catalog.set_functions().cloned().collect();
    for mu in &mus {
        if let Some(reason) = ctx.unmet(mu, &[Property::CountablyAdditive, Property::Monotone]) {
            ctx.push(InstanceOutcome::skipped(format!("*/{}", mu.id()), seed, reason));
            continue;
        }
        let full = mu.space().full();
        for f in fitting(ctx, mu, is_psi_based(mu)) {
            let label = format!("{}/{}", f.id(), mu.id());
            if !ctx.wants(&label) {
                continue;
            }
            let g = run(Method::Gould, f, mu, &full, ctx);
            let b = run(Method::BirkhoffSimple, f, mu, &full, ctx);
            let o = match (g, b) {
                (Err(e), _) | (_, Err(e)) => InstanceOutcome::failed(&label, seed, e.to_string()),
                (Ok(g), Ok(b)) => match (g.converged(), b.converged()) {
                    (true, true) => InstanceOutcome::measured(&label, seed, g.value.distance(&b.value), 2.0 * tol, Evidence::Sampled)
                        .with_detail(format!("Gould {}, Birkhoff {}", g.value, b.value)),
                    (false, false) => InstanceOutcome::new(&label, seed, Outcome::Pass)
                        .with_detail(format!("neither converges: {}; {}", status_note(&g), status_note(&b))),
                    _ => InstanceOutcome::failed(&label, seed, format!("only one converges: {}; {}", status_note(&g), status_note(&b))),
                },
            };
            ctx.push(o);
        }
    }
    Ok(())
}

/// The point carrying an atom `T`, by following the non-null half.
fn atom_point(mu: &SetFunction) -> f64 {
    let full = mu.space().full();
    if let MeasurableSet::Finite { n, .. } = full {
        let t = full.points().into_iter().find(|&t| mu.eval(&MeasurableSet::Finite { mask: 1 << t, n }) > 0.0);
        return t.unwrap_or(0) as f64;
    }
    let mut c = DyadicCell::root();
    while c.depth < RESOLUTION {
        let [l, r] = c.children();
        c = if mu.eval(&l.to_set()) > 0.0 { l } else { r };
    }
    c.lo()
}

/// Continuity of `F` at `x`, judged on points `2^-30` away on either side.
fn continuous_at(f: &Multifunction, x: f64) -> bool {
    if f.is_continuous() || f.space().is_some_and(|s| !s.is_dyadic()) {
        return true;
    }
    let h = 2f64.powi(-30);
    let v = f.eval(x);
    [x - h, x + h].into_iter().filter(|t| (0.0..=1.0).contains(t)).all(|t| f.eval(t).distance(&v) <= 1e-6)
}

pub(super) fn atom_equivalence(ctx: &mut Ctx) -> Result<()> {
    let (seed, tol) = (ctx.seed(), ctx.cfg.tol);
    let mus: Vec<SetFunction> = ctx.catalog.set_functions().cloned().collect();
    for mu in &mus {
        let full = mu.space().full();
        let check = is_atom(mu, &full, 12)?;
        if !check.atom {
            ctx.push(InstanceOutcome::skipped(format!("*/{}", mu.id()), seed, format!("T is not an atom ({})", check.note)));
            continue;
        }
        if let Some(reason) = ctx.unmet(mu, &[Property::SigmaNullNullAdditive, Property::Monotone]) {
            ctx.push(InstanceOutcome::skipped(format!("*/{}", mu.id()), seed, reason));
            continue;
        }
        let x = atom_point(mu);
        let mass = mu.eval(&full);
        for f in fitting(ctx, mu, is_psi_based(mu)) {
            let label = format!("{}/{}", f.id(), mu.id());
            if !ctx.wants(&label) {
                continue;
            }
            let expected = f.eval(x).scale(mass)?;
            let g = run(Method::Gould, f, mu, &full, ctx)?;
            if !continuous_at(f, x) {
                let reason = format!("F jumps at the atom; recorded as a control: {}", status_note(&g));
                ctx.push(InstanceOutcome::skipped(&label, seed, reason));
                continue;
            }
            let b = run(Method::BirkhoffSimple, f, mu, &full, ctx)?;
            let mut o = if g.converged() && b.converged() {
                let worst = g.value.distance(&expected).max(b.value.distance(&expected)).max(g.value.distance(&b.value) / 2.0);
                InstanceOutcome::measured(&label, seed, worst, tol, Evidence::Sampled)
            } else {
                InstanceOutcome::failed(&label, seed, format!("{}; {}", status_note(&g), status_note(&b)))
            };
            o.detail = format!("atom at {x}, μ(T) = {mass}, F(x)μ(T) = {expected}");
            ctx.push(o);
        }
    }
    Ok(())
}

/// Non-additive, monotone, continuous-from-below dyadic set functions with their Ψ.
fn non_additive_with_psi(ctx: &mut Ctx) -> Vec<(SetFunction, SetFunction)> {
    let seed = ctx.seed();
    let mus: Vec<SetFunction> = ctx.catalog.set_functions().filter(|m| m.space().is_dyadic()).cloned().collect();
    let mut out = vec![];
    for mu in mus {
        if ctx.unmet(&mu, &[Property::FinitelyAdditive]).is_none() {
            continue;
        }
        if let Some(reason) = ctx.unmet(&mu, &[Property::Monotone, Property::ContinuousFromBelow]) {
            ctx.push(InstanceOutcome::skipped(format!("*/{}", mu.id()), seed, reason));
            continue;
        }
        match SetFunction::psi_of(mu.spec(), 1e-9, 20) {
            Ok(psi) => {
                let psi = psi.with_id(format!("psi[{}]", mu.id()));
                out.push((mu, psi));
            }
            Err(e) => ctx.push(InstanceOutcome::skipped(format!("*/{}", mu.id()), seed, format!("Ψ does not exist: {e}"))),
        }
    }
    ctx.notes.push("finitely additive set functions have Ψ = μ and are covered by ex4.1".into());
    out
}

/// Runs `methods` against `μ` and `Ψ` and checks that all converged values
/// agree within `(1 + M) tol`.
fn agreement(ctx: &mut Ctx, methods: &[Method], all_f: bool) -> Result<()> {
    let (seed, tol) = (ctx.seed(), ctx.cfg.tol);
    for (mu, psi) in non_additive_with_psi(ctx) {
        let full = mu.space().full();
        for f in fitting(ctx, &mu, !all_f) {
            let label = format!("{}/{}", f.id(), mu.id());
            if !ctx.wants(&label) {
                continue;
            }
            let mut results = vec![];
            for m in methods {
                for nu in [&mu, &psi] {
                    results.push(run(*m, f, nu, &full, ctx)?);
                }
            }
            let allowed = (1.0 + f.bound()) * tol;
            let o = if let Some(r) = results.iter().find(|r| !r.converged()) {
                InstanceOutcome::failed(&label, seed, format!("{} on {}", status_note(r), r.set_function))
            } else {
                let mut worst: f64 = 0.0;
                for (i, a) in results.iter().enumerate() {
                    for b in &results[i + 1..] {
                        worst = worst.max(a.value.distance(&b.value));
                    }
                }
                let values: Vec<String> =
                    results.iter().map(|r| format!("{} on {}: {}", r.method, r.set_function, r.value)).collect();
                InstanceOutcome::measured(&label, seed, worst, allowed, Evidence::Sampled).with_detail(values.join("; "))
            };
            ctx.push(o);
        }
    }
    Ok(())
}

pub(super) fn general(ctx: &mut Ctx) -> Result<()> {
    agreement(ctx, &[Method::Gould, Method::BirkhoffSimple], false)
}

pub(super) fn mu_vs_psi(ctx: &mut Ctx) -> Result<()> {
    agreement(ctx, &[Method::Gould], true)
}

pub(super) fn birkhoff_vs_mcshane(ctx: &mut Ctx, finitely_additive: bool) -> Result<()> {
    let (seed, tol) = (ctx.seed(), ctx.cfg.tol);
    let required: &[Property] = if finitely_additive {
        &[Property::FinitelyAdditive, Property::PointwiseNonAtomic, Property::Monotone]
    } else {
        &[Property::CountablyAdditive, Property::PointwiseNonAtomic]
    };
    if finitely_additive {
        ctx.notes.push(
            "every catalog set function meeting the hypotheses is also countably additive, so the finitely \
             additive case is exercised only through multifunctions with a support"
                .into(),
        );
    }
    let mus: Vec<SetFunction> = ctx.catalog.set_functions().filter(|m| m.space().is_dyadic()).cloned().collect();
    for mu in &mus {
        if let Some(reason) = ctx.unmet(mu, required) {
            ctx.push(InstanceOutcome::skipped(format!("*/{}", mu.id()), seed, reason));
            continue;
        }
        if is_psi_based(mu) {
            let reason = "each Ψ evaluation sums a refinement chain, which makes the gauge search too slow to run here";
            ctx.push(InstanceOutcome::skipped(format!("*/{}", mu.id()), seed, reason));
            continue;
        }
        let full = mu.space().full();
        for f in fitting(ctx, mu, false) {
            if finitely_additive != f.support().is_some() {
                continue;
            }
            let label = format!("{}/{}", f.id(), mu.id());
            if !ctx.wants(&label) {
                continue;
            }
            let b = run(Method::BirkhoffSimple, f, mu, &full, ctx)?;
            let m = run(Method::McShane, f, mu, &full, ctx)?;
            let o = if b.converged() && m.converged() {
                let univocal = m.certificate.univocal_agreement.unwrap_or(0.0);
                let mut o = InstanceOutcome::measured(&label, seed, b.value.distance(&m.value), 3.0 * tol, Evidence::Sampled)
                    .with_detail(format!("Birkhoff {}, Mc Shane {}, univocal gap {univocal:.2e}", b.value, m.value));
                if univocal > tol {
                    o.outcome = Outcome::Fail { reason: format!("glued univocal sums differ by {univocal}") };
                }
                o
            } else {
                InstanceOutcome::failed(&label, seed, format!("{}; {}", status_note(&b), status_note(&m)))
            };
            ctx.push(o);
        }
    }
    Ok(())
}

pub(super) fn additivity(ctx: &mut Ctx) -> Result<()> {
    let (seed, tol) = (ctx.seed(), ctx.cfg.tol);
    let (Ok(f), Ok(mu)) = (ctx.catalog.multifunction("box-linear"), ctx.catalog.set_function("lebesgue")) else {
        ctx.push(InstanceOutcome::skipped("box-linear/lebesgue", seed, "box-linear or lebesgue is not in the catalog"));
        return Ok(());
    };
    let (f, mu) = (f.clone(), mu.clone());
    let mut rng = rng::stream(seed, "ex3.7");
    for i in 0..PAIRS {
        let (a, b) = loop {
            let a = random_dyadic_set(&mut rng, 4);
            let b = random_dyadic_set(&mut rng, 4).difference(&a);
            if !a.is_empty() && !b.is_empty() {
                break (a, b);
            }
        };
        let label = format!("pair#{i:02}");
        if !ctx.wants(&label) {
            continue;
        }
        let u = a.union(&b);
        let [ia, ib, iu] = [&a, &b, &u].map(|s| run(Method::BirkhoffSimple, &f, &mu, s, ctx));
        let (ia, ib, iu) = (ia?, ib?, iu?);
        let o = if ia.converged() && ib.converged() && iu.converged() {
            let sum = ia.value.minkowski_sum(&ib.value)?;
            InstanceOutcome::measured(&label, seed, iu.value.distance(&sum), 3.0 * tol, Evidence::Sampled)
                .with_detail(format!("A = {a}, B = {b}, I(A ∪ B) = {}, I(A) + I(B) = {sum}", iu.value))
        } else {
            InstanceOutcome::failed(&label, seed, "a Birkhoff integral did not converge")
        };
        ctx.push(o);
    }
    Ok(())
}

pub(super) fn scalarization(ctx: &mut Ctx) -> Result<()> {
    let (seed, tol) = (ctx.seed(), ctx.cfg.tol);
    let mus: Vec<SetFunction> = ctx.catalog.set_functions().cloned().collect();
    for mu in &mus {
        if is_psi_based(mu) {
            ctx.push(InstanceOutcome::skipped(format!("*/{}", mu.id()), seed, "Ψ-based set functions are covered by mupsiwb"));
            continue;
        }
        if let Some(reason) = ctx.unmet(mu, &[Property::FinitelyAdditive]) {
            ctx.push(InstanceOutcome::skipped(format!("*/{}", mu.id()), seed, reason));
            continue;
        }
        let full = mu.space().full();
        for f in fitting(ctx, mu, false) {
            let label = format!("{}/{}", f.id(), mu.id());
            if !ctx.wants(&label) {
                continue;
            }
            let r = run(Method::Gould, f, mu, &full, ctx)?;
            if !r.converged() {
                ctx.push(InstanceOutcome::skipped(&label, seed, status_note(&r)));
                continue;
            }
            let j = r.value.embed();
            let mut worst: f64 = 0.0;
            let mut missing = false;
            for (k, &c) in j.coords().iter().enumerate() {
                match scalar_chain_integral(|t| f.eval(t).embed().coords()[k], mu, &full, tol, ctx.cfg.max_depth) {
                    Some(s) => worst = worst.max((s - c).abs()),
                    None => missing = true,
                }
            }
            let o = if missing {
                InstanceOutcome::skipped(&label, seed, "a scalar chain integral did not settle")
            } else {
                InstanceOutcome::measured(&label, seed, worst, tol, Evidence::Sampled)
                    .with_detail(format!("{} embedding coordinates, Gould {}", j.coords().len(), r.value))
            };
            ctx.push(o);
        }
    }
    Ok(())
}

pub(super) fn integral_is_a_box(ctx: &mut Ctx) -> Result<()> {
    let seed = ctx.seed();
    let ids: Vec<String> = ctx.catalog.instances().map(|i| i.id.clone()).collect();
    for id in ids {
        if !ctx.wants(&id) {
            continue;
        }
        let (f, mu, domain) = ctx.catalog.resolve(&id)?;
        let r = run(Method::Gould, f, mu, &domain, ctx)?;
        if !r.converged() {
            ctx.push(InstanceOutcome::skipped(&id, seed, status_note(&r)));
            continue;
        }
        let ordered = r.value.lo().iter().zip(r.value.hi()).all(|(l, h)| l <= h);
        let round_trip = EmbeddedVector::new(r.value.embed().coords()).map(|v| v.to_box());
        let o = match round_trip {
            Ok(b) if ordered => InstanceOutcome::measured(&id, seed, b.distance(&r.value), 0.0, Evidence::Exhaustive)
                .with_detail(format!("value {}", r.value)),
            _ => InstanceOutcome::failed(&id, seed, format!("{} is not a box in the embedding cone", r.value)),
        };
        ctx.push(o);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_integral_of_identity() {
        let mu = SetFunction::lebesgue();
        let v = scalar_chain_integral(|t| t, &mu, &MeasurableSet::unit_interval(), 1e-6, 24).unwrap();
        assert!((v - 0.5).abs() < 1e-6);
    }

    #[test]
    fn chain_integral_on_finite_sets() {
        let mu = SetFunction::finite_weights(&[1.0, 2.0, 3.0]).unwrap();
        let v = scalar_chain_integral(|t| t, &mu, &MeasurableSet::finite(3, 0b110).unwrap(), 1e-9, 0).unwrap();
        assert_eq!(v, 2.0 + 6.0);
    }

    #[test]
    fn point_of_a_dirac_atom() {
        let mu = SetFunction::dirac(0.3, 1.0).unwrap();
        assert!((atom_point(&mu) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn psi_detection() {
        let psi = SetFunction::psi_of(&crate::spaces::MeasureSpec::Lebesgue, 1e-9, 20).unwrap();
        assert!(is_psi_based(&psi));
        assert!(!is_psi_based(&SetFunction::lebesgue()));
    }
}
