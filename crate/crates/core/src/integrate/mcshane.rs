//! Generalized Mc Shane integral over gauge-fine countable partitions with free tags.

use rand::seq::SliceRandom;

use super::birkhoff::birkhoff_on;
use super::multifunction::Multifunction;
use super::result::{IntegralResult, Method, Status, TraceEntry};
use super::riemann::riemann_sum;
use super::{blank_result, check_inputs, shortcut};
use crate::config::IntegratorConfig;
use crate::error::{Error, Result};
use crate::partitions::{
    cousin_fine, glue_univocal, mcshane_generalized, sample_fine, Gauge, GaugePiece, Partition, TagDiscipline,
    TaggedPartition,
};
use crate::rng;
use crate::spaces::analysis::Evidence;
use crate::spaces::sets::{to_point, FULL};
use crate::spaces::{MeasurableSet, SetFunction, RESOLUTION};

/// Mc Shane integral of `F` over the whole space.
pub fn mcshane_integral(f: &Multifunction, mu: &SetFunction, cfg: &IntegratorConfig) -> Result<IntegralResult> {
    mcshane_on(f, mu, &mu.space().full(), cfg)
}

/// The gauge `Δ*` built on the traces `E_n` of the depth-`m` dyadic cells on
/// `A`: each maximal dyadic cell of each `E_n` gets an open collar of width
/// `c = 2^-j`, the widest for which `M μ(collar ∩ A) ≤ tol λ(cell) / 3`.
/// Summed over the cells the collars cost at most `tol / 3` for additive `μ`.
pub fn delta_star(
    bound: f64,
    mu: &SetFunction,
    domain: &MeasurableSet,
    m: u32,
    tol: f64,
) -> Result<Gauge> {
    let mut pieces = Vec::new();
    for (label, e) in domain.split_at_depth(m).into_iter().enumerate() {
        for cell in e.cells() {
            let (a, b) = cell.span();
            let budget = tol * cell.length() / 3.0;
            let collar_at = |j: u32| {
                let w = 1u64 << (RESOLUTION - j);
                let left = MeasurableSet::from_spans([(a.saturating_sub(w), a)]).expect("dyadic span");
                let right = MeasurableSet::from_spans([(b, (b + w).min(FULL))]).expect("dyadic span");
                bound * mu.eval(&left.union(&right).intersection(domain))
            };
            let j = if bound == 0.0 {
                Some(cell.depth + 2)
            } else {
                (cell.depth + 2..=RESOLUTION).find(|&j| collar_at(j) <= budget)
            };
            let Some(j) = j.map(|j| j.min(RESOLUTION)) else {
                return Err(Error::GaugeTooFine { max_depth: RESOLUTION });
            };
            let c = 2f64.powi(-(j as i32));
            pieces.push(GaugePiece { home: cell.to_set(), open: (to_point(a) - c, to_point(b) + c), label });
        }
    }
    Gauge::piecewise(pieces, None)
}

/// Runs the Birkhoff-simple integrator at `tol / 3` to find the depth `m*`
/// of an ε-partition, builds `Δ*` on it and takes the Cousin sum as the
/// candidate. Trials alternate Henstock and free tags (free tags only for
/// pointwise non-atomic `μ`); every fifth trial is a countable generalized
/// partition accumulating at a random point, charged with its tail bound.
/// Free-tag sums are also compared with the sums of their glued univocal
/// versions.
pub(crate) fn mcshane_on(
    f: &Multifunction,
    mu: &SetFunction,
    domain: &MeasurableSet,
    cfg: &IntegratorConfig,
) -> Result<IntegralResult> {
    check_inputs(f, mu, domain, cfg)?;
    if let Some(r) = shortcut(Method::McShane, f, mu, domain, cfg) {
        return Ok(r);
    }
    let mut r = blank_result(Method::McShane, f, mu, domain, cfg);
    let b = birkhoff_on(f, mu, domain, &cfg.clone().with_tol(cfg.tol / 3.0))?;
    r.certificate.reference = Some(b.value.clone());
    if !b.converged() {
        r.status = b.status;
        r.value = b.value;
        r.error_bound = b.error_bound;
        r.certificate.notes.push("the Birkhoff-simple ε-partition did not converge".into());
        return Ok(r);
    }
    let m = b.depth.expect("converged runs record their depth");
    let bound = f.bound();
    let gauge = delta_star(bound, mu, domain, m, cfg.tol)?;
    let cousin = cousin_fine(&gauge, domain, TagDiscipline::Henstock, RESOLUTION)?;
    r.value = riemann_sum(f, &cousin, mu).value;
    r.depth = Some(m);
    r.trace.push(TraceEntry {
        partition: "cousin".into(),
        sum: r.value.clone(),
        h_to_value: 0.0,
        tag_oscillation: None,
        tail_bound: Some(0.0),
    });
    let free = mu.declared().pointwise_non_atomic;
    let null_tol = if bound > 0.0 { cfg.tol / (4.0 * bound) } else { cfg.tol };
    let mut rng = rng::stream(cfg.seed, &format!("mcshane:{}:{}", f.id(), mu.id()));
    let mut univocal: f64 = 0.0;
    for i in 0..cfg.trials {
        let discipline = if free && i % 2 == 1 { TagDiscipline::McShane } else { TagDiscipline::Henstock };
        let kind = if discipline == TagDiscipline::McShane { "free" } else { "henstock" };
        let (tp, label) = if i % 5 == 4 {
            let x0 = domain.sample_point(&mut rng);
            let tp = mcshane_generalized(&gauge, domain, null_tol, discipline, Some(x0), mu, RESOLUTION)?;
            (tp, format!("generalized-{kind}:{i}"))
        } else {
            let mut cells = sample_fine(&gauge, &mut rng, discipline)?;
            cells.shuffle(&mut rng);
            let tags = cells.iter().map(|c| c.tag).collect();
            let p = Partition::new(domain.clone(), cells.into_iter().map(|c| c.set).collect())?;
            (TaggedPartition::new(p, tags, discipline)?, format!("{kind}:{i}"))
        };
        debug_assert!(gauge.is_fine(&tp));
        let s = riemann_sum(f, &tp, mu);
        if discipline == TagDiscipline::McShane {
            let glued = glue_univocal(&tp)?;
            univocal = univocal.max(riemann_sum(f, &glued, mu).value.distance(&s.value));
        }
        r.trace.push(TraceEntry {
            partition: label,
            h_to_value: s.value.distance(&r.value) + s.tail_bound,
            sum: s.value,
            tag_oscillation: None,
            tail_bound: Some(s.tail_bound),
        });
    }
    let worst = r.trace.iter().map(|e| e.h_to_value).fold(0.0, f64::max);
    r.status = if worst <= cfg.tol { Status::Converged } else { Status::Inconclusive };
    r.error_bound = worst;
    r.certificate.evidence = Some(Evidence::Sampled);
    r.certificate.stabilization_index = Some(0);
    r.certificate.partitions_checked = cfg.trials;
    r.certificate.tag_draws = 1;
    r.certificate.worst_h = worst;
    r.certificate.free_tags = Some(free);
    r.certificate.univocal_agreement = free.then_some(univocal);
    r.certificate.notes.push(format!("gauge built on the depth-{m} ε-partition of the Birkhoff-simple run"));
    if !free {
        r.certificate.notes.push("μ is not pointwise non-atomic: only Henstock tags were sampled".into());
    }
    Ok(r)
}
