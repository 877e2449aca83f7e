//! Measurable spaces, set functions and their analysis.

pub mod analysis;
pub mod measure;
pub mod psi;
pub mod sets;

pub use measure::{MeasureSpec, Property, PropertyFlags, SetFunction};
pub use psi::{psi_integral, PsiFunction, PsiStatus, PsiValue};
pub use sets::{DyadicCell, MeasurableSet, SpaceModel, FULL, RESOLUTION};
