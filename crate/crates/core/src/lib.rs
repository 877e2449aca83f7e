//! Integration of box-valued multifunctions with respect to monotone set functions.

pub mod bodies;
pub mod catalog;
pub mod config;
pub mod error;
pub mod integrate;
pub mod partitions;
pub mod rng;
pub mod spaces;
pub mod trend;
pub mod verify;

pub use bodies::{AxisBox, EmbeddedVector};
pub use catalog::Catalog;
pub use config::IntegratorConfig;
pub use error::{Error, Result};
pub use integrate::{IntegralResult, Method, Multifunction, Status};
pub use partitions::{Partition, TagDiscipline, TaggedPartition};
pub use spaces::{MeasurableSet, SetFunction, SpaceModel};
