//! Bounded box-valued multifunctions `F: T -> boxes`.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::bodies::AxisBox;
use crate::error::{Error, Result};
use crate::spaces::{MeasurableSet, SpaceModel};

/// Points used by the bound and validity spot check.
pub const SPOT_CHECKS: usize = 10_000;

/// Scalar building blocks for coordinatewise multifunctions on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ScalarFn {
    /// `Σ_k c_k t^k`.
    Poly { coeffs: Vec<f64> },
    /// `offset + amplitude * sin(2π frequency t + phase)`.
    Sin {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `scale * sqrt(t)`.
    Sqrt { scale: f64 },
    /// `scale * exp(rate t)`.
    Exp { scale: f64, rate: f64 },
}

impl ScalarFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarFn::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            ScalarFn::Sin { amplitude, frequency, phase, offset } => {
                offset + amplitude * (std::f64::consts::TAU * frequency * t + phase).sin()
            }
            ScalarFn::Sqrt { scale } => scale * t.sqrt(),
            ScalarFn::Exp { scale, rate } => scale * (rate * t).exp(),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            ScalarFn::Poly { coeffs } => coeffs.iter().all(|c| c.is_finite()),
            ScalarFn::Sin { amplitude, frequency, phase, offset } => {
                [amplitude, frequency, phase, offset].iter().all(|c| c.is_finite())
            }
            ScalarFn::Sqrt { scale } => scale.is_finite(),
            ScalarFn::Exp { scale, rate } => scale.is_finite() && rate.is_finite(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum MultiSpec {
    /// `F(t) = Π_i [lo_i(t), hi_i(t)]`.
    Coordinatewise { lo: Vec<ScalarFn>, hi: Vec<ScalarFn> },
    Constant { value: AxisBox },
    /// `values[i]` on `[b_{i-1}, b_i)`, with `b_{-1} = 0` and the last value up to `1`.
    Step { breakpoints: Vec<f64>, values: Vec<AxisBox> },
    /// `F(i) = values[i]` on a finite space.
    Table { values: Vec<AxisBox> },
}

/// A multifunction with its uniform bound `M`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Multifunction {
    id: String,
    spec: MultiSpec,
    dim: usize,
    bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    support: Option<MeasurableSet>,
}

impl Multifunction {
    /// Validates `spec` and measures `M` on [`SPOT_CHECKS`] grid points.
    pub fn new(id: impl Into<String>, spec: MultiSpec) -> Result<Self> {
        let id = id.into();
        let dim = match &spec {
            MultiSpec::Coordinatewise { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() {
                    return Err(Error::Catalog(format!("{id}: lo and hi need the same positive length")));
                }
                if !lo.iter().chain(hi).all(ScalarFn::is_finite) {
                    return Err(Error::Catalog(format!("{id}: non-finite coefficient")));
                }
                lo.len()
            }
            MultiSpec::Constant { value } => value.dim(),
            MultiSpec::Step { breakpoints, values } => {
                if values.len() != breakpoints.len() + 1 {
                    return Err(Error::Catalog(format!("{id}: a step function needs one more value than breakpoints")));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) || breakpoints.iter().any(|b| !(*b > 0.0 && *b < 1.0)) {
                    return Err(Error::Catalog(format!("{id}: breakpoints must increase inside (0, 1)")));
                }
                Self::common_dim(&id, values)?
            }
            MultiSpec::Table { values } => Self::common_dim(&id, values)?,
        };
        let mut f = Self { id, spec, dim, bound: 0.0, support: None };
        let mut bound: f64 = 0.0;
        for t in f.spot_points() {
            bound = bound.max(f.try_eval(t)?.norm());
        }
        if !bound.is_finite() {
            return Err(Error::Catalog(format!("{}: unbounded on the spot-check grid", f.id)));
        }
        f.bound = bound;
        Ok(f)
    }

    fn common_dim(id: &str, values: &[AxisBox]) -> Result<usize> {
        let d = values.first().ok_or_else(|| Error::Catalog(format!("{id}: no values")))?.dim();
        if values.iter().any(|v| v.dim() != d) {
            return Err(Error::Catalog(format!("{id}: values of different dimensions")));
        }
        Ok(d)
    }

    fn spot_points(&self) -> Vec<f64> {
        match &self.spec {
            MultiSpec::Table { values } => (0..values.len()).map(|i| i as f64).collect(),
            MultiSpec::Step { breakpoints, .. } => {
                let mut v: Vec<f64> = (0..SPOT_CHECKS).map(|i| i as f64 / (SPOT_CHECKS - 1) as f64).collect();
                v.extend_from_slice(breakpoints);
                v
            }
            _ => (0..SPOT_CHECKS).map(|i| i as f64 / (SPOT_CHECKS - 1) as f64).collect(),
        }
    }

    /// Replaces the measured bound by a declared one, which must not be smaller.
    pub fn with_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound >= self.bound) || !bound.is_finite() {
            return Err(Error::Catalog(format!(
                "{}: declared bound {bound} is below the observed sup {}",
                self.id, self.bound
            )));
        }
        self.bound = bound;
        Ok(self)
    }

    /// `F` on `support`, `{0}` elsewhere.
    pub fn with_support(mut self, support: MeasurableSet) -> Result<Self> {
        if let Some(space) = self.space() {
            if !space.admits(&support) {
                return Err(Error::SpaceMismatch);
            }
        }
        self.support = Some(support);
        Ok(self)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn spec(&self) -> &MultiSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `M` with `|F(t)| ≤ M`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn support(&self) -> Option<&MeasurableSet> {
        self.support.as_ref()
    }

    /// The space `F` lives on; `None` for constants, which live on any space.
    pub fn space(&self) -> Option<SpaceModel> {
        match &self.spec {
            MultiSpec::Table { values } => SpaceModel::finite(values.len()).ok(),
            MultiSpec::Constant { .. } => None,
            _ => Some(SpaceModel::dyadic()),
        }
    }

    pub fn fits_space(&self, space: SpaceModel) -> bool {
        self.space().is_none_or(|s| s == space)
    }

    /// Continuous on `[0, 1]` (constants and tables trivially).
    pub fn is_continuous(&self) -> bool {
        match &self.spec {
            MultiSpec::Step { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
            _ => self.support.is_none(),
        }
    }

    /// Jump locations of a step multifunction.
    pub fn breakpoints(&self) -> &[f64] {
        match &self.spec {
            MultiSpec::Step { breakpoints, .. } => breakpoints,
            _ => &[],
        }
    }

    fn try_eval(&self, t: f64) -> Result<AxisBox> {
        if let Some(s) = &self.support {
            if !s.contains(t) {
                return Ok(AxisBox::zero(self.dim));
            }
        }
        match &self.spec {
            MultiSpec::Coordinatewise { lo, hi } => {
                let l: SmallVec<[f64; 3]> = lo.iter().map(|f| f.eval(t)).collect();
                let h: SmallVec<[f64; 3]> = hi.iter().map(|f| f.eval(t)).collect();
                AxisBox::new(&l, &h).map_err(|_| Error::Catalog(format!("{}: lo > hi at t = {t}", self.id)))
            }
            MultiSpec::Constant { value } => Ok(value.clone()),
            MultiSpec::Step { breakpoints, values } => Ok(values[breakpoints.partition_point(|b| *b <= t)].clone()),
            MultiSpec::Table { values } => values
                .get(t as usize)
                .cloned()
                .ok_or_else(|| Error::Catalog(format!("{}: no value at point {t}", self.id))),
        }
    }

    /// `F(t)`; panics where `spec` does not define a box.
    pub fn eval(&self, t: f64) -> AxisBox {
        self.try_eval(t).unwrap_or_else(|e| panic!("{e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> AxisBox {
        AxisBox::interval(a, b).unwrap()
    }

    fn box_linear() -> Multifunction {
        let spec = MultiSpec::Coordinatewise {
            lo: vec![ScalarFn::Poly { coeffs: vec![0.0] }],
            hi: vec![ScalarFn::Poly { coeffs: vec![0.0, 1.0] }],
        };
        Multifunction::new("box-linear", spec).unwrap()
    }

    #[test]
    fn linear_box_and_bound() {
        let f = box_linear();
        assert_eq!(f.eval(0.25), iv(0.0, 0.25));
        assert_eq!(f.bound(), 1.0);
        assert!(f.is_continuous());
        assert_eq!(f.space(), Some(SpaceModel::dyadic()));
    }

    #[test]
    fn step_values_are_right_continuous() {
        let spec = MultiSpec::Step { breakpoints: vec![0.5], values: vec![iv(0.0, 1.0), iv(1.0, 2.0)] };
        let f = Multifunction::new("step", spec).unwrap();
        assert_eq!(f.eval(0.4999), iv(0.0, 1.0));
        assert_eq!(f.eval(0.5), iv(1.0, 2.0));
        assert_eq!(f.eval(1.0), iv(1.0, 2.0));
        assert!(!f.is_continuous());
        assert_eq!(f.bound(), 2.0);
    }

    #[test]
    fn crossing_bounds_are_rejected() {
        let spec = MultiSpec::Coordinatewise {
            lo: vec![ScalarFn::Poly { coeffs: vec![0.0, 1.0] }],
            hi: vec![ScalarFn::Poly { coeffs: vec![0.5] }],
        };
        assert!(matches!(Multifunction::new("bad", spec), Err(Error::Catalog(_))));
    }

    #[test]
    fn declared_bound_must_dominate() {
        assert!(box_linear().with_bound(0.5).is_err());
        assert_eq!(box_linear().with_bound(2.0).unwrap().bound(), 2.0);
    }

    #[test]
    fn support_zeroes_outside() {
        let f = box_linear().with_support(MeasurableSet::interval(0.0, 0.5).unwrap()).unwrap();
        assert_eq!(f.eval(0.75), AxisBox::zero(1));
        assert_eq!(f.eval(0.25), iv(0.0, 0.25));
    }

    #[test]
    fn table_on_finite_space() {
        let f = Multifunction::new("t", MultiSpec::Table { values: vec![iv(1.0, 1.0), iv(0.0, 3.0)] }).unwrap();
        assert_eq!(f.space(), Some(SpaceModel::finite(2).unwrap()));
        assert_eq!(f.eval(1.0), iv(0.0, 3.0));
        assert_eq!(f.bound(), 3.0);
    }

    #[test]
    fn spec_json() {
        let s: MultiSpec = serde_json::from_str(
            r#"{"kind":"coordinatewise","lo":[{"kind":"sqrt","scale":-1}],"hi":[{"kind":"sin","amplitude":1,"frequency":1}]}"#,
        )
        .unwrap();
        assert!(matches!(s, MultiSpec::Coordinatewise { .. }));
    }
}
