//! Convergence tables: one row per refinement depth.

use serde::Serialize;

use super::birkhoff::tail_rule;
use super::gould::gould_integral;
use super::multifunction::Multifunction;
use super::result::Status;
use super::riemann::sampled_sum;
use crate::bodies::AxisBox;
use crate::config::IntegratorConfig;
use crate::error::{Error, Result};
use crate::partitions::{CountablePartition, Partition};
use crate::rng;
use crate::spaces::{MeasurableSet, SetFunction};
use crate::trend;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub depth: u32,
    /// Cells of the chain partition at this depth.
    pub cells: usize,
    pub sum: AxisBox,
    /// `h(sum, I)` against the Gould value, or `h(sum, previous sum)` when
    /// there is none; absent for the first row in the latter case.
    pub h: Option<f64>,
    pub tag_oscillation: f64,
    pub tail_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepTable {
    pub multifunction: String,
    pub set_function: String,
    pub reference: Option<AxisBox>,
    pub rows: Vec<SweepRow>,
    /// The `h` column never increases.
    pub monotone: bool,
    /// The sums blow up or the Gould run diverged.
    pub diverging: bool,
}

/// Sums over the refinement chain at each depth, with the tail bound of the
/// countable partition refining that depth after the tail rule
/// `M μ(tail) ≤ tol / 4` (the core's bound when the rule cannot be met).
pub fn sweep(f: &Multifunction, mu: &SetFunction, depths: &[u32], cfg: &IntegratorConfig) -> Result<SweepTable> {
    cfg.validate()?;
    if !f.fits_space(mu.space()) {
        return Err(Error::SpaceMismatch);
    }
    let full = mu.space().full();
    let reference = gould_integral(f, mu, cfg)?;
    let bound = f.bound();
    let mut rng = rng::stream(cfg.seed, &format!("sweep:{}:{}", f.id(), mu.id()));
    let mut rows: Vec<SweepRow> = Vec::new();
    for &k in depths {
        let level = Partition::chain_level(&full, k)?;
        let cells: Vec<(MeasurableSet, f64)> = level.cells().iter().map(|c| (c.clone(), mu.eval(c))).collect();
        let tail_bound = match &full {
            MeasurableSet::Dyadic(_) => {
                let cp = CountablePartition::refining(cfg.generator, &full, k)?;
                tail_rule(&cp, mu, bound, cfg.tol / 4.0).map_or_else(|| bound * mu.eval(cp.core()), |(_, tb)| tb)
            }
            MeasurableSet::Finite { .. } => 0.0,
        };
        let s = sampled_sum(f, cells.iter().map(|(c, m)| (c, *m)), cfg.tag_samples, &mut rng);
        let h = match (reference.status, rows.last()) {
            (Status::Converged, _) => Some(s.sum.distance(&reference.value)),
            (_, Some(prev)) => Some(s.sum.distance(&prev.sum)),
            _ => None,
        };
        rows.push(SweepRow { depth: k, cells: cells.len(), sum: s.sum, h, tag_oscillation: s.oscillation, tail_bound });
    }
    let hs: Vec<f64> = rows.iter().filter_map(|r| r.h).collect();
    let norms: Vec<f64> = rows.iter().map(|r| r.sum.norm()).collect();
    let diverging = reference.status == Status::Diverged
        || trend::blows_up(&norms, cfg.divergence_factor * bound, cfg.tol)
        || (reference.status != Status::Converged && trend::blows_up(&hs, f64::INFINITY, cfg.tol));
    Ok(SweepTable {
        multifunction: f.id().to_string(),
        set_function: mu.id().to_string(),
        reference: reference.converged().then_some(reference.value),
        monotone: hs.windows(2).all(|w| w[1] <= w[0]),
        diverging,
        rows,
    })
}
