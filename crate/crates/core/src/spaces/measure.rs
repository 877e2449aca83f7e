//! Non-negative set functions with declared structural properties.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::analysis;
use super::psi::PsiFunction;
use super::sets::{MeasurableSet, SpaceModel, MAX_FINITE};
use crate::error::{Error, Result};

/// Structural properties a set function may have.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Property {
    FinitelyAdditive,
    CountablyAdditive,
    Monotone,
    NullAdditive,
    NullNullAdditive,
    SigmaNullNullAdditive,
    ContinuousFromBelow,
    PointwiseNonAtomic,
    FinitelyPurelyAtomic,
}

impl Property {
    pub const ALL: [Property; 9] = [
        Property::FinitelyAdditive,
        Property::CountablyAdditive,
        Property::Monotone,
        Property::NullAdditive,
        Property::NullNullAdditive,
        Property::SigmaNullNullAdditive,
        Property::ContinuousFromBelow,
        Property::PointwiseNonAtomic,
        Property::FinitelyPurelyAtomic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::FinitelyAdditive => "finitelyAdditive",
            Property::CountablyAdditive => "countablyAdditive",
            Property::Monotone => "monotone",
            Property::NullAdditive => "nullAdditive",
            Property::NullNullAdditive => "nullNullAdditive",
            Property::SigmaNullNullAdditive => "sigmaNullNullAdditive",
            Property::ContinuousFromBelow => "continuousFromBelow",
            Property::PointwiseNonAtomic => "pointwiseNonAtomic",
            Property::FinitelyPurelyAtomic => "finitelyPurelyAtomic",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One boolean per [`Property`]. Absent JSON keys read as `false`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct PropertyFlags {
    pub finitely_additive: bool,
    pub countably_additive: bool,
    pub monotone: bool,
    pub null_additive: bool,
    pub null_null_additive: bool,
    pub sigma_null_null_additive: bool,
    pub continuous_from_below: bool,
    pub pointwise_non_atomic: bool,
    pub finitely_purely_atomic: bool,
}

impl PropertyFlags {
    pub fn get(&self, p: Property) -> bool {
        match p {
            Property::FinitelyAdditive => self.finitely_additive,
            Property::CountablyAdditive => self.countably_additive,
            Property::Monotone => self.monotone,
            Property::NullAdditive => self.null_additive,
            Property::NullNullAdditive => self.null_null_additive,
            Property::SigmaNullNullAdditive => self.sigma_null_null_additive,
            Property::ContinuousFromBelow => self.continuous_from_below,
            Property::PointwiseNonAtomic => self.pointwise_non_atomic,
            Property::FinitelyPurelyAtomic => self.finitely_purely_atomic,
        }
    }

    pub fn set(&mut self, p: Property, v: bool) {
        match p {
            Property::FinitelyAdditive => self.finitely_additive = v,
            Property::CountablyAdditive => self.countably_additive = v,
            Property::Monotone => self.monotone = v,
            Property::NullAdditive => self.null_additive = v,
            Property::NullNullAdditive => self.null_null_additive = v,
            Property::SigmaNullNullAdditive => self.sigma_null_null_additive = v,
            Property::ContinuousFromBelow => self.continuous_from_below = v,
            Property::PointwiseNonAtomic => self.pointwise_non_atomic = v,
            Property::FinitelyPurelyAtomic => self.finitely_purely_atomic = v,
        }
    }

    /// Every property except finite pure atomicity.
    pub fn countably_additive_measure() -> Self {
        let mut f = Self::default();
        for p in Property::ALL {
            f.set(p, p != Property::FinitelyPurelyAtomic);
        }
        f
    }

    fn and(self, other: Self) -> Self {
        let mut f = Self::default();
        for p in Property::ALL {
            f.set(p, self.get(p) && other.get(p));
        }
        f
    }
}

fn one() -> f64 {
    1.0
}

fn default_psi_tol() -> f64 {
    1e-9
}

fn default_depth_cap() -> u32 {
    20
}

/// Serializable description of a set function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum MeasureSpec {
    /// Lebesgue measure on dyadic sets.
    Lebesgue,
    /// `scale · λ(A)^exponent`.
    LebesguePower {
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `mass · 1[point ∈ A]`.
    Dirac { point: f64, mass: f64 },
    /// Pointwise sum of set functions on the same space.
    Sum { terms: Vec<MeasureSpec> },
    /// Weighted counting measure on `{0, .., weights.len() - 1}`.
    FiniteWeights { weights: Vec<f64> },
    /// `(Σ_{i ∈ A} w_i)^exponent`.
    FinitePower { weights: Vec<f64>, exponent: f64 },
    /// Explicit table indexed by bitmask; `values.len()` must be `2^n`.
    FiniteTable { values: Vec<f64> },
    /// The additive set function obtained by integrating `1` against `base`.
    #[serde(rename_all = "camelCase")]
    Psi {
        base: Box<MeasureSpec>,
        #[serde(default = "default_psi_tol")]
        tol: f64,
        #[serde(default = "default_depth_cap")]
        depth_cap: u32,
    },
}

enum Eval {
    Lebesgue,
    LebesguePower { exponent: f64, scale: f64 },
    Dirac { point: f64, mass: f64 },
    Sum(Vec<SetFunction>),
    FiniteWeights(Vec<f64>),
    FinitePower { weights: Vec<f64>, exponent: f64 },
    FiniteTable(Vec<f64>),
    Psi(PsiFunction),
}

struct Inner {
    id: String,
    space: SpaceModel,
    spec: MeasureSpec,
    eval: Eval,
    declared: PropertyFlags,
}

/// A non-negative set function with `μ(∅) = 0`, cheap to clone.
#[derive(Clone)]
pub struct SetFunction(Arc<Inner>);

impl fmt::Debug for SetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetFunction").field("id", &self.0.id).field("spec", &self.0.spec).finish()
    }
}

fn check_nonneg(what: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::Catalog(format!("{what} must be finite and non-negative, got {v}")));
    }
    Ok(())
}

fn check_finite_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_FINITE {
        return Err(Error::TooLarge { n, max: MAX_FINITE });
    }
    Ok(())
}

/// Largest finite space whose properties are derived by exhaustive search.
const EXACT_FLAGS_MAX_N: usize = 12;

impl SetFunction {
    /// Builds a set function whose declared flags are the ones its construction guarantees.
    pub fn from_spec(id: impl Into<String>, spec: MeasureSpec) -> Result<Self> {
        let id = id.into();
        let (space, eval, declared) = match &spec {
            MeasureSpec::Lebesgue => {
                (SpaceModel::dyadic(), Eval::Lebesgue, PropertyFlags::countably_additive_measure())
            }
            MeasureSpec::LebesguePower { exponent, scale } => {
                if !(exponent.is_finite() && *exponent > 0.0) {
                    return Err(Error::Catalog(format!("exponent must be positive, got {exponent}")));
                }
                check_nonneg("scale", *scale)?;
                let mut f = PropertyFlags::countably_additive_measure();
                if *exponent != 1.0 && *scale > 0.0 {
                    f.finitely_additive = false;
                    f.countably_additive = false;
                }
                (SpaceModel::dyadic(), Eval::LebesguePower { exponent: *exponent, scale: *scale }, f)
            }
            MeasureSpec::Dirac { point, mass } => {
                if !(0.0..=1.0).contains(point) {
                    return Err(Error::Catalog(format!("Dirac point {point} outside [0, 1]")));
                }
                check_nonneg("mass", *mass)?;
                let mut f = PropertyFlags::countably_additive_measure();
                f.pointwise_non_atomic = *mass == 0.0;
                (SpaceModel::dyadic(), Eval::Dirac { point: *point, mass: *mass }, f)
            }
            MeasureSpec::Sum { terms } => {
                if terms.is_empty() {
                    return Err(Error::Catalog("a sum needs at least one term".into()));
                }
                let parts = terms
                    .iter()
                    .enumerate()
                    .map(|(i, t)| SetFunction::from_spec(format!("{id}/{i}"), t.clone()))
                    .collect::<Result<Vec<_>>>()?;
                let space = parts[0].space();
                if parts.iter().any(|p| p.space() != space) {
                    return Err(Error::SpaceMismatch);
                }
                let flags = parts.iter().map(|p| p.declared()).reduce(PropertyFlags::and).unwrap();
                (space, Eval::Sum(parts), flags)
            }
            MeasureSpec::FiniteWeights { weights } => {
                check_finite_size(weights.len())?;
                for &w in weights {
                    check_nonneg("weight", w)?;
                }
                (SpaceModel::finite(weights.len())?, Eval::FiniteWeights(weights.clone()), PropertyFlags::default())
            }
            MeasureSpec::FinitePower { weights, exponent } => {
                check_finite_size(weights.len())?;
                for &w in weights {
                    check_nonneg("weight", w)?;
                }
                if !(exponent.is_finite() && *exponent > 0.0) {
                    return Err(Error::Catalog(format!("exponent must be positive, got {exponent}")));
                }
                let eval = Eval::FinitePower { weights: weights.clone(), exponent: *exponent };
                (SpaceModel::finite(weights.len())?, eval, PropertyFlags::default())
            }
            MeasureSpec::FiniteTable { values } => {
                let n = values.len().trailing_zeros() as usize;
                if values.len() < 2 || values.len() != 1 << n || n > 20 {
                    return Err(Error::Catalog(format!(
                        "a finite table needs 2^n entries with 1 ≤ n ≤ 20, got {}",
                        values.len()
                    )));
                }
                for &v in values {
                    check_nonneg("table value", v)?;
                }
                if values[0] != 0.0 {
                    return Err(Error::Catalog("the empty set must have value 0".into()));
                }
                (SpaceModel::finite(n)?, Eval::FiniteTable(values.clone()), PropertyFlags::default())
            }
            MeasureSpec::Psi { base, tol, depth_cap } => {
                let base = SetFunction::from_spec(format!("{id}/base"), (**base).clone())?;
                let psi = PsiFunction::build(&base, *tol, *depth_cap)?;
                let b = base.declared();
                let mut f = PropertyFlags::countably_additive_measure();
                f.countably_additive = b.continuous_from_below;
                f.continuous_from_below = b.continuous_from_below;
                f.pointwise_non_atomic = b.pointwise_non_atomic;
                (base.space(), Eval::Psi(psi), f)
            }
        };
        let mut mu = SetFunction(Arc::new(Inner { id, space, spec, eval, declared }));
        if let SpaceModel::FiniteSpace { n } = space {
            if n <= EXACT_FLAGS_MAX_N {
                let flags = analysis::exact_finite_flags(&mu);
                mu = mu.with_declared(flags);
            }
        }
        Ok(mu)
    }

    /// Replaces the declared flags (catalog entries state their own claims).
    pub fn with_declared(self, declared: PropertyFlags) -> Self {
        let inner = Arc::try_unwrap(self.0).unwrap_or_else(|arc| Inner {
            id: arc.id.clone(),
            space: arc.space,
            spec: arc.spec.clone(),
            eval: arc.eval.duplicate(),
            declared: arc.declared,
        });
        SetFunction(Arc::new(Inner { declared, ..inner }))
    }

    pub fn with_id(self, id: impl Into<String>) -> Self {
        let id = id.into();
        let inner = Arc::try_unwrap(self.0).unwrap_or_else(|arc| Inner {
            id: arc.id.clone(),
            space: arc.space,
            spec: arc.spec.clone(),
            eval: arc.eval.duplicate(),
            declared: arc.declared,
        });
        SetFunction(Arc::new(Inner { id, ..inner }))
    }

    pub fn lebesgue() -> Self {
        Self::from_spec("lebesgue", MeasureSpec::Lebesgue).expect("valid spec")
    }

    pub fn lebesgue_power(exponent: f64) -> Result<Self> {
        Self::from_spec(format!("lebesgue^{exponent}"), MeasureSpec::LebesguePower { exponent, scale: 1.0 })
    }

    pub fn dirac(point: f64, mass: f64) -> Result<Self> {
        Self::from_spec(format!("{mass}*dirac({point})"), MeasureSpec::Dirac { point, mass })
    }

    pub fn finite_weights(weights: &[f64]) -> Result<Self> {
        Self::from_spec("finite-weights", MeasureSpec::FiniteWeights { weights: weights.to_vec() })
    }

    pub fn finite_power(weights: &[f64], exponent: f64) -> Result<Self> {
        Self::from_spec("finite-power", MeasureSpec::FinitePower { weights: weights.to_vec(), exponent })
    }

    pub fn finite_table(values: &[f64]) -> Result<Self> {
        Self::from_spec("finite-table", MeasureSpec::FiniteTable { values: values.to_vec() })
    }

    pub fn psi_of(base: &MeasureSpec, tol: f64, depth_cap: u32) -> Result<Self> {
        Self::from_spec("psi", MeasureSpec::Psi { base: Box::new(base.clone()), tol, depth_cap })
    }

    pub fn id(&self) -> &str {
        &self.0.id
    }

    pub fn space(&self) -> SpaceModel {
        self.0.space
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.0.spec
    }

    pub fn declared(&self) -> PropertyFlags {
        self.0.declared
    }

    /// The underlying Ψ when this set function was built as one.
    pub fn as_psi(&self) -> Option<&PsiFunction> {
        match &self.0.eval {
            Eval::Psi(p) => Some(p),
            _ => None,
        }
    }

    /// `μ(T)`.
    pub fn total(&self) -> f64 {
        self.eval(&self.space().full())
    }

    /// `μ(A)`; panics when `A` belongs to another space model.
    pub fn eval(&self, set: &MeasurableSet) -> f64 {
        assert!(self.space().admits(set), "set {set} does not belong to the space of `{}`", self.id());
        if set.is_empty() {
            return 0.0;
        }
        match &self.0.eval {
            Eval::Lebesgue => set.length(),
            Eval::LebesguePower { exponent, scale } => scale * set.length().powf(*exponent),
            Eval::Dirac { point, mass } => {
                if set.contains(*point) {
                    *mass
                } else {
                    0.0
                }
            }
            Eval::Sum(parts) => parts.iter().map(|p| p.eval(set)).sum(),
            Eval::FiniteWeights(w) => set.points().iter().map(|&i| w[i]).sum(),
            Eval::FinitePower { weights, exponent } => {
                set.points().iter().map(|&i| weights[i]).sum::<f64>().powf(*exponent)
            }
            Eval::FiniteTable(v) => v[set.mask() as usize],
            Eval::Psi(p) => p.eval(set),
        }
    }

    /// Like [`SetFunction::eval`] but reports a space mismatch as an error.
    pub fn try_eval(&self, set: &MeasurableSet) -> Result<f64> {
        if !self.space().admits(set) {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.eval(set))
    }
}

impl Eval {
    fn duplicate(&self) -> Eval {
        match self {
            Eval::Lebesgue => Eval::Lebesgue,
            Eval::LebesguePower { exponent, scale } => Eval::LebesguePower { exponent: *exponent, scale: *scale },
            Eval::Dirac { point, mass } => Eval::Dirac { point: *point, mass: *mass },
            Eval::Sum(p) => Eval::Sum(p.clone()),
            Eval::FiniteWeights(w) => Eval::FiniteWeights(w.clone()),
            Eval::FinitePower { weights, exponent } => {
                Eval::FinitePower { weights: weights.clone(), exponent: *exponent }
            }
            Eval::FiniteTable(v) => Eval::FiniteTable(v.clone()),
            Eval::Psi(p) => Eval::Psi(p.clone()),
        }
    }
}
