//! Suites about set functions: atom collapse, continuity of Ψ, negative controls.

use rand::Rng;

use super::brute::set_partitions;
use super::{Ctx, InstanceOutcome, Outcome};
use crate::error::Result;
use crate::integrate::{gould_integral, Status};
use crate::partitions::{random_refinement, CountableGenerator, CountablePartition, Partition};
use crate::rng;
use crate::spaces::analysis::{
    check_atom_collapse, classify, is_atom, random_dyadic_set, variation, CollapseOutcome, Evidence, ZERO_TOL,
};
use crate::spaces::psi::{psi_integral, PsiStatus};
use crate::spaces::{MeasurableSet, Property, PsiFunction, SetFunction, SpaceModel};

/// Partitions tried per atom.
pub const COLLAPSE_PARTITIONS: usize = 50;
/// Depth cap of the dyadic atom and variation checks.
pub const ATOM_DEPTH: u32 = 8;
/// Chains per set function, and steps per chain.
pub const CHAINS: usize = 5;
pub const CHAIN_STEPS: u32 = 20;

fn dyadic_partitions(rng: &mut rng::Rng) -> Result<Vec<Partition>> {
    let t = MeasurableSet::unit_interval();
    let mut out = Vec::with_capacity(COLLAPSE_PARTITIONS);
    for i in 0..COLLAPSE_PARTITIONS {
        if i % 2 == 0 {
            let level = Partition::chain_level(&t, rng.gen_range(0..=5))?;
            out.push(random_refinement(&level, rng, 3));
        } else {
            let x0 = rng.gen_range(0..=256u32) as f64 / 256.0;
            let cp = CountablePartition::new(CountableGenerator::Geometric { x0 }, &t)?;
            out.push(cp.truncate(rng.gen_range(1..=cp.len())));
        }
    }
    Ok(out)
}

fn finite_partitions(a: &MeasurableSet) -> Result<Vec<Partition>> {
    let MeasurableSet::Finite { n, .. } = *a else { unreachable!("finite set expected") };
    let mut blocks_list = Vec::new();
    set_partitions(&a.points(), |blocks| {
        if blocks_list.len() < COLLAPSE_PARTITIONS {
            blocks_list.push(blocks.to_vec());
        }
    });
    blocks_list
        .into_iter()
        .map(|b| Partition::new(a.clone(), b.into_iter().map(|mask| MeasurableSet::Finite { mask, n }).collect()))
        .collect()
}

/// Atoms with at least two points, so that their partitions are not trivial.
fn finite_atoms(mu: &SetFunction, n: usize) -> Result<Vec<MeasurableSet>> {
    let mut out = Vec::new();
    for mask in 1u64..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let a = MeasurableSet::finite(n, mask)?;
        if is_atom(mu, &a, 0)?.atom {
            out.push(a);
        }
    }
    Ok(out)
}

pub(super) fn atom_collapse(ctx: &mut Ctx) -> Result<()> {
    let mus: Vec<SetFunction> = ctx.catalog.set_functions().cloned().collect();
    let seed = ctx.seed();
    for mu in &mus {
        let atoms = match mu.space() {
            SpaceModel::FiniteSpace { n } if n <= 6 => {
                let atoms = finite_atoms(mu, n)?;
                if atoms.is_empty() {
                    ctx.push(InstanceOutcome::skipped(format!("{}/*", mu.id()), seed, "no atom with two or more points"));
                }
                atoms
            }
            SpaceModel::FiniteSpace { .. } => {
                ctx.push(InstanceOutcome::skipped(format!("{}/*", mu.id()), seed, "space too large to search for atoms"));
                vec![]
            }
            SpaceModel::DyadicUnitInterval { .. } => {
                let t = MeasurableSet::unit_interval();
                let check = is_atom(mu, &t, ATOM_DEPTH)?;
                if !check.atom {
                    let label = format!("{}/{t}", mu.id());
                    ctx.push(InstanceOutcome::skipped(label, seed, format!("T is not an atom ({})", check.note)));
                    continue;
                }
                vec![t]
            }
        };
        for a in atoms {
            let label = format!("{}/{a}", mu.id());
            if !ctx.wants(&label) {
                continue;
            }
            let mut rng = rng::stream(seed, &format!("2.6:{label}"));
            let partitions = match a {
                MeasurableSet::Dyadic(_) => dyadic_partitions(&mut rng)?,
                MeasurableSet::Finite { .. } => finite_partitions(&a)?,
            };
            let mass = mu.eval(&a);
            let mut worst: f64 = 0.0;
            let mut verdict = Outcome::Pass;
            for p in &partitions {
                let r = check_atom_collapse(mu, &a, p, ATOM_DEPTH)?;
                match r.outcome {
                    CollapseOutcome::Verified { carrier } => {
                        let others: f64 =
                            r.part_masses.iter().enumerate().filter(|&(i, _)| i != carrier).map(|(_, m)| m).sum();
                        worst = worst.max((r.part_masses[carrier] - mass).abs() + others);
                    }
                    CollapseOutcome::Failed { reason } => {
                        verdict = Outcome::Fail { reason: format!("{reason} on a partition with {} parts", r.part_masses.len()) };
                        break;
                    }
                    CollapseOutcome::Skipped { reason } => {
                        verdict = Outcome::Skipped { reason };
                        break;
                    }
                }
            }
            let evidence = if a.is_dyadic() { Evidence::Sampled } else { Evidence::Exhaustive };
            let mut o = InstanceOutcome::new(label, seed, verdict).with_evidence(evidence).with_detail(format!(
                "{} partitions, μ(A) = {mass}",
                partitions.len()
            ));
            if !matches!(o.outcome, Outcome::Skipped { .. }) {
                o.discrepancy = Some(worst);
                o.allowed = Some(ZERO_TOL);
            }
            ctx.push(o);
        }
    }
    Ok(())
}

/// `A ∩ ([0, x0 - 2^-k) ∪ [x0, 1])`; these increase in `k` to `A`.
fn chain_member(a: &MeasurableSet, x0: f64, k: u32) -> Result<MeasurableSet> {
    let gap = MeasurableSet::interval(x0 - 2f64.powi(-(k as i32)), x0)?;
    Ok(a.difference(&gap))
}

pub(super) fn psi_sigma_additive(ctx: &mut Ctx) -> Result<()> {
    let mus: Vec<SetFunction> = ctx.catalog.set_functions().filter(|m| m.space().is_dyadic()).cloned().collect();
    let (seed, tol) = (ctx.seed(), ctx.cfg.tol);
    for mu in &mus {
        let label = format!("{}/*", mu.id());
        if let Some(reason) = ctx.unmet(mu, &[Property::Monotone, Property::ContinuousFromBelow]) {
            ctx.push(InstanceOutcome::skipped(label, seed, reason));
            continue;
        }
        let psi = match PsiFunction::build(mu, tol, 20) {
            Ok(p) => p,
            Err(e) => {
                ctx.push(InstanceOutcome::skipped(label, seed, format!("μ is not integrable: {e}")));
                continue;
            }
        };
        let mut rng = rng::stream(seed, &format!("psisigmaadd:{}", mu.id()));
        for i in 0..CHAINS {
            let a = random_dyadic_set(&mut rng, 6);
            let x0 = rng.gen_range(1..64u32) as f64 / 64.0;
            let label = format!("{}/chain#{i}", mu.id());
            if !ctx.wants(&label) {
                continue;
            }
            let target = psi.eval(&a);
            let values =
                (7..7 + CHAIN_STEPS).map(|k| Ok(psi.eval(&chain_member(&a, x0, k)?))).collect::<Result<Vec<f64>>>()?;
            let slack = 2.0 * psi.certified_error();
            let increasing = values.windows(2).all(|w| w[1] >= w[0] - slack);
            let last = *values.last().expect("non-empty chain");
            let mut o = InstanceOutcome::measured(label, seed, (target - last).abs(), 2.0 * tol, Evidence::Sampled)
                .with_detail(format!("A = {a}, chain accumulating at {x0} from the left, Ψ(A) = {target}"));
            if !increasing {
                o.outcome = Outcome::Fail { reason: "Ψ decreased along the chain".into() };
            }
            ctx.push(o);
        }
    }
    Ok(())
}

fn control(label: &str, seed: u64, ok: bool, detail: String) -> InstanceOutcome {
    let outcome = if ok {
        Outcome::Pass
    } else {
        Outcome::Fail { reason: format!("control did not behave as expected: {detail}") }
    };
    InstanceOutcome::new(label, seed, outcome).with_evidence(Evidence::Sampled).with_detail(detail)
}

pub(super) fn negative_controls(ctx: &mut Ctx) -> Result<()> {
    let (seed, tol) = (ctx.seed(), ctx.cfg.tol);
    let t = MeasurableSet::unit_interval();
    let catalog = ctx.catalog;
    let missing = |ids: &[&str]| ids.iter().find(|id| catalog.set_function(id).is_err() && catalog.multifunction(id).is_err()).map(|s| s.to_string());

    let label = "sqrt-lebesgue:psi";
    if ctx.wants(label) {
        match catalog.set_function("sqrt-lebesgue") {
            Ok(mu) => {
                let v = psi_integral(mu, &t, tol, 20)?;
                ctx.push(control(label, seed, v.status == PsiStatus::NotIntegrable, format!("Ψ status {:?}", v.status)));
            }
            Err(_) => ctx.push(InstanceOutcome::skipped(label, seed, "sqrt-lebesgue is not in the catalog")),
        }
    }
    let label = "sqrt-lebesgue:variation";
    if ctx.wants(label) {
        if let Ok(mu) = catalog.set_function("sqrt-lebesgue") {
            let v = variation(mu, &t, 20)?;
            ctx.push(control(label, seed, v.diverging, format!("variation sequence ends at {:.3e}", v.value)));
        }
    }
    let label = "lebesgue-sq:finitely-additive";
    if ctx.wants(label) {
        if let Ok(mu) = catalog.set_function("lebesgue-sq") {
            let r = classify(mu, super::CLASSIFY_TRIALS, seed);
            let c = r.check(Property::FinitelyAdditive);
            let detail = c.witness.as_ref().map_or("no witness".to_string(), |w| w.note.clone());
            ctx.push(control(label, seed, c.observed == Some(false) && c.witness.is_some(), detail));
            let label = "lebesgue-sq:psi";
            let v = psi_integral(mu, &t, tol, 20)?;
            ctx.push(control(
                label,
                seed,
                v.status == PsiStatus::Converged && v.value.abs() <= tol,
                format!("Ψ(T) = {} ({:?}) although μ(T) = 1", v.value, v.status),
            ));
        }
    }
    let label = "dirac-third:wbvms-ca";
    if ctx.wants(label) {
        if let Ok(mu) = catalog.set_function("dirac-third") {
            let reason = ctx.unmet(mu, &[Property::CountablyAdditive, Property::PointwiseNonAtomic]);
            let ok = reason.is_some();
            ctx.push(control(label, seed, ok, reason.unwrap_or_else(|| "hypotheses reported as met".into())));
        }
    }
    for (f_id, mu_id, expect) in [("step-third", "dirac-third", "no convergence"), ("constant-one", "sqrt-lebesgue", "divergence")] {
        let label = format!("{f_id}/{mu_id}:gould");
        if !ctx.wants(&label) {
            continue;
        }
        if let Some(id) = missing(&[f_id, mu_id]) {
            ctx.push(InstanceOutcome::skipped(label, seed, format!("{id} is not in the catalog")));
            continue;
        }
        let r = gould_integral(catalog.multifunction(f_id)?, catalog.set_function(mu_id)?, ctx.cfg)?;
        let ok = match expect {
            "divergence" => r.status == Status::Diverged,
            _ => r.status != Status::Converged,
        };
        ctx.push(control(&label, seed, ok, format!("expected {expect}; Gould status {:?} at depth {:?}", r.status, r.depth)));
    }
    Ok(())
}
