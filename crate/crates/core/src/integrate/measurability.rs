//! Witnesses of total measurability: a small exceptional set and cells of small oscillation.

use serde::Serialize;

use super::multifunction::Multifunction;
use super::riemann::extreme_points;
use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::spaces::{MeasurableSet, SetFunction};

/// Half the number of grid points per cell used to estimate oscillation.
pub const GRID_HALF: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MeasurabilityWitness {
    pub depth: u32,
    /// `A_0`: the union of the cells whose oscillation reached `eps`.
    pub exceptional: MeasurableSet,
    pub exceptional_mass: f64,
    pub cells: Vec<MeasurableSet>,
    /// Grid estimate of `osc(F, A_i)` for each cell; a lower bound on the
    /// true oscillation.
    pub oscillations: Vec<f64>,
}

/// `max_c (max - min)` of the embedding coordinates of `F` on `2 GRID_HALF`
/// evenly spaced points between the extremes of `cell`.
pub fn grid_oscillation(f: &Multifunction, cell: &MeasurableSet) -> f64 {
    let (a, b) = extreme_points(cell);
    let n = 2 * GRID_HALF;
    let mut lo = vec![f64::INFINITY; 2 * f.dim()];
    let mut hi = vec![f64::NEG_INFINITY; 2 * f.dim()];
    let points: Vec<f64> = match cell {
        MeasurableSet::Finite { .. } => cell.points().into_iter().map(|p| p as f64).collect(),
        MeasurableSet::Dyadic(_) => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    };
    for t in points {
        for (c, v) in f.eval(t).embed().coords().iter().enumerate() {
            lo[c] = lo[c].min(*v);
            hi[c] = hi[c].max(*v);
        }
    }
    lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max)
}

/// Searches the dyadic chain of `T` down to `max_depth` for a partition whose
/// high-oscillation cells have `υ`-mass below `eps`.
pub fn totally_measurable_witness(
    f: &Multifunction,
    upsilon: &SetFunction,
    eps: f64,
    max_depth: u32,
) -> Result<Option<MeasurabilityWitness>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig(format!("eps must be positive, got {eps}")));
    }
    let space = upsilon.space();
    if !f.fits_space(space) {
        return Err(Error::SpaceMismatch);
    }
    let full = space.full();
    let levels = if space.is_dyadic() { max_depth } else { full.count().saturating_sub(1) as u32 };
    for k in 0..=levels {
        let level = Partition::chain_level(&full, k)?;
        let mut exceptional = space.empty();
        let mut cells = Vec::new();
        let mut oscillations = Vec::new();
        for c in level.cells() {
            let osc = grid_oscillation(f, c);
            if osc < eps {
                cells.push(c.clone());
                oscillations.push(osc);
            } else {
                exceptional = exceptional.union(c);
            }
        }
        let mass = upsilon.eval(&exceptional);
        if mass < eps {
            return Ok(Some(MeasurabilityWitness { depth: k, exceptional, exceptional_mass: mass, cells, oscillations }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::AxisBox;
    use crate::integrate::multifunction::{MultiSpec, ScalarFn};

    fn iv(a: f64, b: f64) -> AxisBox {
        AxisBox::interval(a, b).unwrap()
    }

    #[test]
    fn constant_needs_no_refinement() {
        let f = Multifunction::new("c", MultiSpec::Constant { value: iv(0.0, 1.0) }).unwrap();
        let w = totally_measurable_witness(&f, &SetFunction::lebesgue(), 1e-6, 10).unwrap().unwrap();
        assert_eq!(w.depth, 0);
        assert!(w.exceptional.is_empty());
        assert_eq!(w.cells, vec![MeasurableSet::unit_interval()]);
    }

    #[test]
    fn identity_box_at_depth_four() {
        let f = Multifunction::new(
            "box-linear",
            MultiSpec::Coordinatewise {
                lo: vec![ScalarFn::Poly { coeffs: vec![] }],
                hi: vec![ScalarFn::Poly { coeffs: vec![0.0, 1.0] }],
            },
        )
        .unwrap();
        let w = totally_measurable_witness(&f, &SetFunction::lebesgue(), 0.1, 10).unwrap().unwrap();
        assert_eq!(w.depth, 4);
        assert!(w.exceptional.is_empty());
        assert!(w.oscillations.iter().all(|&o| o <= 1.0 / 16.0));
    }

    #[test]
    fn jump_is_isolated_in_a_small_cell() {
        let spec = MultiSpec::Step { breakpoints: vec![1.0 / 3.0], values: vec![iv(0.0, 1.0), iv(1.0, 2.0)] };
        let f = Multifunction::new("step-third", spec).unwrap();
        let w = totally_measurable_witness(&f, &SetFunction::lebesgue(), 0.1, 10).unwrap().unwrap();
        assert_eq!(w.depth, 4);
        assert_eq!(w.exceptional, MeasurableSet::interval(0.3125, 0.375).unwrap());
        assert!(w.exceptional_mass < 0.1);
        // the definition itself: every remaining cell has oscillation below eps
        for c in &w.cells {
            assert!(!c.contains(1.0 / 3.0));
        }
    }

    #[test]
    fn no_witness_below_the_search_depth() {
        let f = Multifunction::new(
            "wave",
            MultiSpec::Coordinatewise {
                lo: vec![ScalarFn::Sin { amplitude: 1.0, frequency: 64.0, phase: 0.0, offset: -1.0 }],
                hi: vec![ScalarFn::Sin { amplitude: 1.0, frequency: 64.0, phase: 0.0, offset: 1.0 }],
            },
        )
        .unwrap();
        assert!(totally_measurable_witness(&f, &SetFunction::lebesgue(), 0.01, 3).unwrap().is_none());
    }
}
