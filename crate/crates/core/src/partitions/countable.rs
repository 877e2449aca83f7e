//! Countable partitions accumulating at a point.
//!
//! A countable partition is an explicit finite head followed by the shells a
//! generator produces inside a root dyadic cell. Shells are generated down to
//! the model resolution; the finest cell around the accumulation point (the
//! core) is never enumerated and always belongs to the tail.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::partition::{random_refinement, Partition};
use crate::error::{Error, Result};
use crate::spaces::{DyadicCell, MeasurableSet, RESOLUTION};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum CountableGenerator {
    /// Shells `D_{n-1} ∖ D_n` of the dyadic cells `D_n` containing `x0`.
    Geometric { x0: f64 },
    /// All but the last of the `2^d` subcells of the current cell, then
    /// recursion into the last one; accumulates at `1`.
    #[serde(rename_all = "camelCase")]
    DyadicTail { depth_per_index: u32 },
}

impl Default for CountableGenerator {
    fn default() -> Self {
        CountableGenerator::Geometric { x0: 1.0 }
    }
}

impl CountableGenerator {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CountableGenerator::Geometric { x0 } if !(0.0..=1.0).contains(&x0) => {
                Err(Error::InvalidConfig(format!("accumulation point {x0} outside [0, 1]")))
            }
            CountableGenerator::DyadicTail { depth_per_index: d } if d == 0 || d > 8 => {
                Err(Error::InvalidConfig(format!("depth per index must be in 1..=8, got {d}")))
            }
            _ => Ok(()),
        }
    }

    pub fn id(&self) -> String {
        match self {
            CountableGenerator::Geometric { x0 } => format!("geometric({x0})"),
            CountableGenerator::DyadicTail { depth_per_index } => format!("dyadicTail({depth_per_index})"),
        }
    }

    pub fn accumulation_point(&self) -> f64 {
        match *self {
            CountableGenerator::Geometric { x0 } => x0,
            CountableGenerator::DyadicTail { .. } => 1.0,
        }
    }

    /// Shells inside `root` in enumeration order, and the core cell.
    pub fn shells(&self, root: DyadicCell) -> (Vec<DyadicCell>, DyadicCell) {
        let x0 = self.accumulation_point();
        let mut out = Vec::new();
        let mut current = root;
        match *self {
            CountableGenerator::Geometric { .. } => {
                while current.depth < RESOLUTION {
                    let inner = DyadicCell::containing(x0, current.depth + 1);
                    let [l, r] = current.children();
                    out.push(if inner == l { r } else { l });
                    current = inner;
                }
            }
            CountableGenerator::DyadicTail { depth_per_index: d } => {
                while current.depth + d <= RESOLUTION {
                    let depth = current.depth + d;
                    let first = current.index << d;
                    let count = 1u64 << d;
                    out.extend((0..count - 1).map(|k| DyadicCell { depth, index: first + k }));
                    current = DyadicCell { depth, index: first + count - 1 };
                }
            }
        }
        (out, current)
    }
}

/// A countable partition of `domain`: `head`, then `shells`, with `core` left over.
#[derive(Clone, Debug, PartialEq)]
pub struct CountablePartition {
    domain: MeasurableSet,
    head: Vec<MeasurableSet>,
    shells: Vec<MeasurableSet>,
    core: MeasurableSet,
    generator: CountableGenerator,
}

impl CountablePartition {
    /// The generator's shells around its accumulation point, starting from `T`.
    pub fn new(generator: CountableGenerator, domain: &MeasurableSet) -> Result<Self> {
        Self::refining(generator, domain, 0)
    }

    /// The traces of the depth-`m` cells on `domain`, except the cell holding
    /// the accumulation point, which is replaced by the generator's shells.
    pub fn refining(generator: CountableGenerator, domain: &MeasurableSet, m: u32) -> Result<Self> {
        generator.validate()?;
        if !domain.is_dyadic() {
            return Err(Error::Unsupported("countable generators live on the dyadic model".into()));
        }
        let root = DyadicCell::containing(generator.accumulation_point(), m.min(RESOLUTION));
        let root_set = root.to_set();
        let head: Vec<MeasurableSet> = domain
            .difference(&root_set)
            .split_at_depth(m)
            .into_iter()
            .collect();
        Self::with_head(generator, domain, head, root)
    }

    /// An explicit head covering `domain ∖ root`, followed by the shells in `root`.
    pub fn with_head(
        generator: CountableGenerator,
        domain: &MeasurableSet,
        head: Vec<MeasurableSet>,
        root: DyadicCell,
    ) -> Result<Self> {
        generator.validate()?;
        if !root.contains(generator.accumulation_point()) {
            return Err(Error::InvalidPartition("the root cell must hold the accumulation point".into()));
        }
        let (cells, core) = generator.shells(root);
        let shells: Vec<MeasurableSet> =
            cells.iter().map(|c| c.to_set().intersection(domain)).filter(|s| !s.is_empty()).collect();
        let core = core.to_set().intersection(domain);
        let cp = Self { domain: domain.clone(), head, shells, core, generator };
        // validation through the finite view
        Partition::truncated(domain.clone(), cp.head.clone(), cp.tail_after(cp.head.len()), generator.id())?;
        Ok(cp)
    }

    pub fn domain(&self) -> &MeasurableSet {
        &self.domain
    }

    pub fn generator(&self) -> CountableGenerator {
        self.generator
    }

    pub fn head(&self) -> &[MeasurableSet] {
        &self.head
    }

    pub fn shells(&self) -> &[MeasurableSet] {
        &self.shells
    }

    /// The never-enumerated remainder around the accumulation point.
    pub fn core(&self) -> &MeasurableSet {
        &self.core
    }

    /// Number of enumerated cells.
    pub fn len(&self) -> usize {
        self.head.len() + self.shells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell(&self, i: usize) -> &MeasurableSet {
        if i < self.head.len() {
            &self.head[i]
        } else {
            &self.shells[i - self.head.len()]
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = &MeasurableSet> {
        self.head.iter().chain(self.shells.iter())
    }

    /// Union of the cells from index `n` on, and the core.
    pub fn tail_after(&self, n: usize) -> MeasurableSet {
        let n = n.min(self.len());
        // the cells cover the domain, so build whichever side is smaller
        if n == 0 {
            return self.domain.clone();
        }
        if n < self.len() - n {
            let covered = MeasurableSet::union_all(self.cell(0), (1..n).map(|i| self.cell(i)));
            return self.domain.difference(&covered);
        }
        let rest: Vec<&MeasurableSet> = (n..self.len()).map(|i| self.cell(i)).collect();
        MeasurableSet::union_all(&self.core, rest)
    }

    /// The first `n` cells and the tail.
    pub fn truncate(&self, n: usize) -> Partition {
        let n = n.min(self.len());
        let cells: Vec<MeasurableSet> = (0..n).map(|i| self.cell(i).clone()).collect();
        Partition::truncated(self.domain.clone(), cells, self.tail_after(n), self.generator.id())
            .expect("truncations of a valid countable partition are valid")
    }

    /// A random refinement of the head in random order; the shells are kept.
    pub fn refine_head<R: Rng + ?Sized>(&self, rng: &mut R, extra_depth: u32) -> Self {
        let rest = MeasurableSet::union_all(&self.core, self.shells.iter());
        let head_domain = self.domain.difference(&rest);
        let mut head = random_refinement(
            &Partition::new(head_domain, self.head.clone()).expect("head is a partition"),
            rng,
            extra_depth,
        )
        .cells()
        .to_vec();
        head.shuffle(rng);
        Self { head, ..self.clone() }
    }
}
