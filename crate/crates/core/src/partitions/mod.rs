//! Partitions, tags and gauges.

pub mod countable;
pub mod gauge;
pub mod partition;

pub use countable::{CountableGenerator, CountablePartition};
pub use gauge::{cousin_fine, glue_univocal, mcshane_generalized, sample_fine, FineCell, Gauge, GaugePiece};
pub use partition::{
    common_refinement, dyadic_chain, is_finer, random_refinement, Partition, TagDiscipline, TaggedPartition,
};
