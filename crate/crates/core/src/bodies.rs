//! Convex bodies modeled as axis-aligned boxes in `(R^d, sup-norm)`.
//!
//! Under the sup-norm every quantity the integrators need is exact and
//! coordinatewise: the excess, the Hausdorff distance, Minkowski sums,
//! nonnegative scaling and the convex hull of a union. Boxes also embed
//! isometrically into `R^{2d}` (with the sup-norm) through their corner
//! coordinates `(hi, -lo)`; the embedding is additive, positively homogeneous
//! and maps hulls of unions to componentwise maxima.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Coords = SmallVec<[f64; 3]>;

/// A nonempty compact axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]`.
///
/// Serializes as a JSON array of `[lo, hi]` pairs, one per coordinate.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct AxisBox {
    lo: Coords,
    hi: Coords,
}

impl AxisBox {
    pub fn new(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        if lo.is_empty() {
            return Err(Error::InvalidBox("dimension must be at least 1".into()));
        }
        for (i, (a, b)) in lo.iter().zip(hi).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidBox(format!("non-finite bound in coordinate {i}")));
            }
            if a > b {
                return Err(Error::InvalidBox(format!("lo > hi in coordinate {i}: {a} > {b}")));
            }
        }
        Ok(Self { lo: lo.iter().copied().collect(), hi: hi.iter().copied().collect() })
    }

    /// One-dimensional box `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(&[lo], &[hi])
    }

    /// Degenerate box `{x}`.
    pub fn point(x: &[f64]) -> Result<Self> {
        Self::new(x, x)
    }

    /// The singleton `{0}` in dimension `d`.
    pub fn zero(d: usize) -> Self {
        assert!(d >= 1, "dimension must be at least 1");
        Self { lo: SmallVec::from_elem(0.0, d), hi: SmallVec::from_elem(0.0, d) }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    /// Excess `e(self, other) = sup_{x in self} d(x, other)`.
    pub fn excess(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.excess_unchecked(other))
    }

    fn excess_unchecked(&self, other: &Self) -> f64 {
        let mut e = 0.0f64;
        for i in 0..self.dim() {
            e = e.max(other.lo[i] - self.lo[i]).max(self.hi[i] - other.hi[i]);
        }
        e
    }

    /// Hausdorff distance, the larger of the two excesses.
    pub fn hausdorff(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.hausdorff_unchecked(other))
    }

    /// Hausdorff distance; panics on a dimension mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.hausdorff_unchecked(other)
    }

    fn hausdorff_unchecked(&self, other: &Self) -> f64 {
        self.excess_unchecked(other).max(other.excess_unchecked(self))
    }

    /// `|A| = h(A, {0}) = sup_{x in A} |x|`.
    pub fn norm(&self) -> f64 {
        self.lo.iter().chain(&self.hi).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn minkowski_sum(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        out.add_scaled(1.0, other);
        Ok(out)
    }

    /// `c * A` for `c >= 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if c < 0.0 || c.is_nan() {
            return Err(Error::NegativeScale(c));
        }
        let f = |v: &f64| c * v + 0.0;
        Ok(Self { lo: self.lo.iter().map(f).collect(), hi: self.hi.iter().map(f).collect() })
    }

    /// In-place `self <- self (+) c * other`; `c` must be nonnegative.
    ///
    /// A zero factor contributes `{0}` exactly and leaves `self` untouched.
    pub fn add_scaled(&mut self, c: f64, other: &Self) {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        debug_assert!(c >= 0.0, "negative factor {c}");
        if c == 0.0 {
            return;
        }
        for i in 0..self.dim() {
            self.lo[i] += c * other.lo[i];
            self.hi[i] += c * other.hi[i];
        }
    }

    /// Convex hull of `self` union `other`.
    pub fn hull_union(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && (0..self.dim()).all(|i| self.lo[i] <= x[i] && x[i] <= self.hi[i])
    }

    pub fn embed(&self) -> EmbeddedVector {
        let mut coords: SmallVec<[f64; 6]> = self.hi.iter().copied().collect();
        coords.extend(self.lo.iter().map(|v| -v + 0.0));
        EmbeddedVector { coords }
    }
}

impl fmt::Debug for AxisBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for AxisBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            if i > 0 {
                write!(f, "x")?;
            }
            write!(f, "[{}, {}]", self.lo[i], self.hi[i])?;
        }
        Ok(())
    }
}

impl TryFrom<Vec<[f64; 2]>> for AxisBox {
    type Error = Error;

    fn try_from(pairs: Vec<[f64; 2]>) -> Result<Self> {
        let lo: Vec<f64> = pairs.iter().map(|p| p[0]).collect();
        let hi: Vec<f64> = pairs.iter().map(|p| p[1]).collect();
        Self::new(&lo, &hi)
    }
}

impl From<AxisBox> for Vec<[f64; 2]> {
    fn from(b: AxisBox) -> Self {
        b.lo.iter().zip(&b.hi).map(|(a, c)| [*a, *c]).collect()
    }
}

/// Image of a box under the corner embedding: `(hi_1..hi_d, -lo_1..-lo_d)`.
///
/// The direction set `{+e_i, -e_i}` plays the role of the compact space on
/// which the support function lives; for boxes under the sup-norm it is exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddedVector {
    coords: SmallVec<[f64; 6]>,
}

impl EmbeddedVector {
    /// Checks `coords[i] + coords[d + i] >= 0`, i.e. that the vector is the
    /// image of some box.
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(Error::InvalidBox(format!("embedded vector has odd length {}", coords.len())));
        }
        let d = coords.len() / 2;
        for i in 0..d {
            if coords[i] + coords[d + i] < 0.0 {
                return Err(Error::InvalidBox(format!("coordinate {i} is outside the embedded cone")));
            }
        }
        Ok(Self { coords: coords.iter().copied().collect() })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn box_dim(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        if self.coords.len() != other.coords.len() {
            return Err(Error::DimensionMismatch { expected: self.box_dim(), found: other.box_dim() });
        }
        Ok(self.coords.iter().zip(&other.coords).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// `a * self + b * other` for nonnegative `a`, `b`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if a < 0.0 {
            return Err(Error::NegativeScale(a));
        }
        if b < 0.0 {
            return Err(Error::NegativeScale(b));
        }
        if self.coords.len() != other.coords.len() {
            return Err(Error::DimensionMismatch { expected: self.box_dim(), found: other.box_dim() });
        }
        Ok(Self { coords: self.coords.iter().zip(&other.coords).map(|(x, y)| a * x + b * y).collect() })
    }

    pub fn max(&self, other: &Self) -> Result<Self> {
        if self.coords.len() != other.coords.len() {
            return Err(Error::DimensionMismatch { expected: self.box_dim(), found: other.box_dim() });
        }
        Ok(Self { coords: self.coords.iter().zip(&other.coords).map(|(x, y)| x.max(*y)).collect() })
    }

    pub fn to_box(&self) -> AxisBox {
        let d = self.box_dim();
        let hi: Vec<f64> = self.coords[..d].to_vec();
        let lo: Vec<f64> = self.coords[d..].iter().map(|v| -v + 0.0).collect();
        AxisBox::new(&lo, &hi).expect("embedded vector invariant guarantees lo <= hi")
    }
}

impl TryFrom<Vec<f64>> for EmbeddedVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(&v)
    }
}

impl From<EmbeddedVector> for Vec<f64> {
    fn from(v: EmbeddedVector) -> Self {
        v.coords.to_vec()
    }
}
