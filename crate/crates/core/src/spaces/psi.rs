//! The integral `Ψ(A) = ∫_A 1 dμ` of a monotone set function.
//!
//! `Ψ(A)` is the limit of `s_m(A) = Σ_{c ∈ P_m} μ(c ∩ A)` along the dyadic
//! chain `P_m`. When the increments `d_m = s_m - s_{m-1}` decay geometrically
//! with a stable ratio `r`, the tail `d_m r / (1 - r)` is added (Richardson
//! extrapolation) and the error is the change of the extrapolated value.

use serde::{Deserialize, Serialize};

use super::measure::SetFunction;
use super::sets::{MeasurableSet, SpaceModel, RESOLUTION};
use crate::error::{Error, Result};
use crate::trend::blows_up;

/// Values beyond this are treated as divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;
/// Largest ratio `d_m / d_{m-1}` accepted for extrapolation.
const MAX_RATIO: f64 = 0.9;
/// Largest change between consecutive ratios accepted as a stable rate.
const RATIO_DRIFT: f64 = 0.1;
/// Refinement levels always inspected beyond the finest depth of the set.
const MIN_LEVELS: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PsiStatus {
    Converged,
    NotIntegrable,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PsiValue {
    pub value: f64,
    pub status: PsiStatus,
    pub error: f64,
    /// Depth of the last chain member used.
    pub depth: u32,
    /// Extrapolation ratio used for the value, if any.
    pub ratio: Option<f64>,
    /// `s_m(A)` for each inspected depth, starting at the finest depth of `A`.
    pub sequence: Vec<f64>,
}

/// `s_m(A)`: the sum of `μ` over the traces of the depth-`m` cells on `A`.
pub fn chain_sum(mu: &SetFunction, set: &MeasurableSet, m: u32) -> f64 {
    match set {
        MeasurableSet::Dyadic(_) => set.split_at_depth(m).iter().map(|p| mu.eval(p)).sum(),
        MeasurableSet::Finite { .. } => finite_chain(set, m as usize).iter().map(|p| mu.eval(p)).sum(),
    }
}

/// Level `j` of the finite refinement chain of `A = {e_0 < .. < e_{k-1}}`:
/// the singletons `{e_0}, .., {e_{j-1}}` followed by the rest.
pub fn finite_chain(set: &MeasurableSet, j: usize) -> Vec<MeasurableSet> {
    let MeasurableSet::Finite { n, .. } = *set else { panic!("finite chain of a dyadic set") };
    let pts = set.points();
    let j = j.min(pts.len().saturating_sub(1));
    let mut out: Vec<MeasurableSet> = pts[..j].iter().map(|&p| MeasurableSet::Finite { mask: 1 << p, n }).collect();
    let rest = pts[j..].iter().fold(0u64, |m, &p| m | 1 << p);
    if rest != 0 {
        out.push(MeasurableSet::Finite { mask: rest, n });
    }
    out
}

/// Evaluates `Ψ(A)` by refining the dyadic chain from the finest depth of `A`
/// up to `depth_cap` (at least [`MIN_LEVELS`] levels).
pub fn psi_integral(mu: &SetFunction, set: &MeasurableSet, tol: f64, depth_cap: u32) -> Result<PsiValue> {
    if !mu.declared().monotone {
        return Err(Error::NotMonotone(mu.id().to_string()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tol must be positive, got {tol}")));
    }
    if !mu.space().admits(set) {
        return Err(Error::SpaceMismatch);
    }
    if let MeasurableSet::Finite { .. } = set {
        let sequence: Vec<f64> = (0..set.count().max(1)).map(|j| chain_sum(mu, set, j as u32)).collect();
        let value = *sequence.last().unwrap();
        return Ok(PsiValue {
            value,
            status: PsiStatus::Converged,
            error: 0.0,
            depth: sequence.len() as u32 - 1,
            ratio: None,
            sequence,
        });
    }
    let m0 = set.finest_depth();
    let last = depth_cap.max(m0 + MIN_LEVELS).min(RESOLUTION);
    let mut seq: Vec<f64> = Vec::new();
    let mut extrapolated: Vec<(f64, Option<f64>)> = Vec::new();
    let mut ratios: Vec<Option<f64>> = Vec::new();
    for m in m0..=last {
        let s = chain_sum(mu, set, m);
        seq.push(s);
        let k = seq.len();
        let ratio = (k >= 3)
            .then(|| {
                let (d1, d0) = (seq[k - 1] - seq[k - 2], seq[k - 2] - seq[k - 3]);
                (d0 != 0.0).then(|| d1 / d0)
            })
            .flatten();
        ratios.push(ratio);
        let d = if k >= 2 { seq[k - 1] - seq[k - 2] } else { f64::NAN };
        let r_ok = ratio.filter(|r| r.is_finite() && r.abs() <= MAX_RATIO);
        let stable = match (r_ok, ratios.len().checked_sub(2).and_then(|i| ratios[i])) {
            (Some(r), Some(p)) => (r - p).abs() <= RATIO_DRIFT,
            _ => false,
        };
        let rich = if stable { (s + d * r_ok.unwrap() / (1.0 - r_ok.unwrap()), r_ok) } else { (s, None) };
        extrapolated.push(rich);

        if blows_up(&seq, DIVERGENCE_THRESHOLD, tol) {
            return Ok(PsiValue {
                value: s,
                status: PsiStatus::NotIntegrable,
                error: f64::INFINITY,
                depth: m,
                ratio: None,
                sequence: seq,
            });
        }
        if k >= 3 {
            let exact = d == 0.0 && seq[k - 2] == seq[k - 3];
            let (rv, rr) = extrapolated[k - 1];
            let (pv, _) = extrapolated[k - 2];
            let rich_err = (rv - pv).abs();
            let plain_err = d.abs().max((seq[k - 2] - seq[k - 3]).abs());
            let (value, error, ratio) = if exact {
                (s, 0.0, None)
            } else if rr.is_some() && rich_err < tol {
                (rv, rich_err, rr)
            } else if plain_err < tol {
                (s, plain_err, None)
            } else {
                continue;
            };
            return Ok(PsiValue { value, status: PsiStatus::Converged, error, depth: m, ratio, sequence: seq });
        }
    }
    let value = *seq.last().unwrap();
    Ok(PsiValue { value, status: PsiStatus::Inconclusive, error: f64::INFINITY, depth: last, ratio: None, sequence: seq })
}

/// `Ψ` as a set function.
///
/// The chain is run once on `T`. Every later evaluation splits `A` into its
/// maximal dyadic cells and refines each one by the same relative depth,
/// extrapolating with the rate found on `T`. Values are recomputed on demand,
/// so concurrent readers observe exactly the sequential results.
#[derive(Clone, Debug)]
pub struct PsiFunction {
    base: SetFunction,
    tol: f64,
    depth_cap: u32,
    relative_depth: u32,
    ratio: Option<f64>,
    error: f64,
    on_whole_space: PsiValue,
}

impl PsiFunction {
    pub fn build(base: &SetFunction, tol: f64, depth_cap: u32) -> Result<Self> {
        let whole = base.space().full();
        let v = psi_integral(base, &whole, tol, depth_cap)?;
        match v.status {
            PsiStatus::Converged => {}
            PsiStatus::NotIntegrable => {
                return Err(Error::NotIntegrable(format!("{}: chain sums diverge ({:?})", base.id(), v.sequence)))
            }
            PsiStatus::Inconclusive => {
                return Err(Error::NotIntegrable(format!(
                    "{}: chain sums did not settle within tol {tol} by depth {}",
                    base.id(),
                    v.depth
                )))
            }
        }
        Ok(Self {
            base: base.clone(),
            tol,
            depth_cap,
            relative_depth: v.depth,
            ratio: v.ratio,
            error: 2.0 * v.error,
            on_whole_space: v,
        })
    }

    pub fn base(&self) -> &SetFunction {
        &self.base
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn depth_cap(&self) -> u32 {
        self.depth_cap
    }

    /// Error bound attached to every value.
    pub fn certified_error(&self) -> f64 {
        self.error
    }

    /// Refinement depth used below each maximal cell.
    pub fn relative_depth(&self) -> u32 {
        self.relative_depth
    }

    /// The chain run on the whole space.
    pub fn whole_space(&self) -> &PsiValue {
        &self.on_whole_space
    }

    pub fn eval(&self, set: &MeasurableSet) -> f64 {
        match set {
            MeasurableSet::Finite { .. } => set.points().iter().map(|&p| self.base.eval(&single(set, p))).sum(),
            MeasurableSet::Dyadic(_) => set.cells().iter().map(|c| self.eval_cell(&c.to_set(), c.depth)).sum(),
        }
    }

    fn eval_cell(&self, cell: &MeasurableSet, depth: u32) -> f64 {
        let l = (depth + self.relative_depth).min(RESOLUTION);
        let s = chain_sum(&self.base, cell, l);
        match self.ratio {
            Some(r) if l > depth => {
                let prev = chain_sum(&self.base, cell, l - 1);
                s + (s - prev) * r / (1.0 - r)
            }
            _ => s,
        }
    }

    pub fn space(&self) -> SpaceModel {
        self.base.space()
    }
}

fn single(set: &MeasurableSet, p: usize) -> MeasurableSet {
    let MeasurableSet::Finite { n, .. } = *set else { unreachable!() };
    MeasurableSet::Finite { mask: 1 << p, n }
}
