//! Riemann-type sums `⊕ μ(A_i) F(t_i)`.

use rand::Rng;

use super::multifunction::Multifunction;
use crate::bodies::AxisBox;
use crate::partitions::TaggedPartition;
use crate::spaces::sets::{to_point, FULL};
use crate::spaces::{MeasurableSet, SetFunction};

#[derive(Clone, Debug, PartialEq)]
pub struct RiemannSum {
    pub value: AxisBox,
    /// `M * μ(tail)`; zero for finite partitions.
    pub tail_bound: f64,
}

/// `⊕_i μ(A_i) F(t_i)` in cell order; null cells contribute `{0}` exactly.
pub fn riemann_sum(f: &Multifunction, tp: &TaggedPartition, mu: &SetFunction) -> RiemannSum {
    let mut value = AxisBox::zero(f.dim());
    for (c, t) in tp.pairs() {
        let m = mu.eval(c);
        if m != 0.0 {
            value.add_scaled(m, &f.eval(t));
        }
    }
    let tail_bound = tp.partition().tail().map_or(0.0, |tail| f.bound() * mu.eval(tail));
    RiemannSum { value, tail_bound }
}

/// `⊕_i masses[i] F(tags[i])`.
pub fn weighted_sum(f: &Multifunction, masses: &[f64], tags: &[f64]) -> AxisBox {
    let mut value = AxisBox::zero(f.dim());
    for (&m, &t) in masses.iter().zip(tags) {
        if m != 0.0 {
            value.add_scaled(m, &f.eval(t));
        }
    }
    value
}

/// Lowest and highest point of a nonempty set.
pub(crate) fn extreme_points(set: &MeasurableSet) -> (f64, f64) {
    match set {
        MeasurableSet::Dyadic(s) => {
            let end = s[s.len() - 1].1;
            (to_point(s[0].0), if end == FULL { 1.0 } else { to_point(end - 1) })
        }
        MeasurableSet::Finite { .. } => {
            let p = set.points();
            (p[0] as f64, p[p.len() - 1] as f64)
        }
    }
}

/// Sum over cells with several tag draws per cell.
#[derive(Clone, Debug)]
pub(crate) struct SampledSum {
    /// Sum with the first (random) draw.
    pub sum: AxisBox,
    /// `max_c Σ_i μ(A_i) (max_s j_c(F(s)) - min_s j_c(F(s)))` over the drawn
    /// tags `s` of each cell: the largest `h` between two sums whose tags are
    /// chosen among the draws. A lower bound on the true tag oscillation.
    pub oscillation: f64,
}

/// Draws `samples` tags per cell: one random, the two extreme points, then
/// more random ones.
pub(crate) fn sampled_sum<'a, R: Rng + ?Sized>(
    f: &Multifunction,
    cells: impl IntoIterator<Item = (&'a MeasurableSet, f64)>,
    samples: usize,
    rng: &mut R,
) -> SampledSum {
    let d = f.dim();
    let mut sum = AxisBox::zero(d);
    let mut spread = vec![0.0; 2 * d];
    let mut lo = vec![0.0; 2 * d];
    let mut hi = vec![0.0; 2 * d];
    for (cell, m) in cells {
        if m == 0.0 {
            continue;
        }
        let first = f.eval(cell.sample_point(rng));
        sum.add_scaled(m, &first);
        let j = first.embed();
        lo.copy_from_slice(j.coords());
        hi.copy_from_slice(j.coords());
        let (a, b) = extreme_points(cell);
        for k in 1..samples {
            let t = match k {
                1 => a,
                2 => b,
                _ => cell.sample_point(rng),
            };
            for (c, v) in f.eval(t).embed().coords().iter().enumerate() {
                lo[c] = f64::min(lo[c], *v);
                hi[c] = f64::max(hi[c], *v);
            }
        }
        for c in 0..2 * d {
            spread[c] += m * (hi[c] - lo[c]);
        }
    }
    SampledSum { sum, oscillation: spread.into_iter().fold(0.0, f64::max) }
}
