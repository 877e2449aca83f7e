//! Finite and truncated countable partitions, and tagged partitions.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::psi::finite_chain;
use crate::spaces::{MeasurableSet, SpaceModel, RESOLUTION};

/// A partition of `domain`: pairwise disjoint nonempty cells whose union,
/// together with the tail of a truncated countable partition, is `domain`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct Partition {
    domain: MeasurableSet,
    cells: Vec<MeasurableSet>,
    tail: Option<MeasurableSet>,
    generator: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct PartitionRepr {
    domain: MeasurableSet,
    cells: Vec<MeasurableSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<MeasurableSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truncation: Option<usize>,
}

impl TryFrom<PartitionRepr> for Partition {
    type Error = Error;

    fn try_from(r: PartitionRepr) -> Result<Self> {
        if r.truncation.is_some_and(|n| n != r.cells.len()) {
            return Err(Error::InvalidPartition("truncation index differs from the cell count".into()));
        }
        match r.tail {
            Some(tail) => Partition::truncated(r.domain, r.cells, tail, r.generator.unwrap_or_default()),
            None => Partition::new(r.domain, r.cells),
        }
    }
}

impl From<Partition> for PartitionRepr {
    fn from(p: Partition) -> Self {
        let truncation = p.tail.as_ref().map(|_| p.cells.len());
        PartitionRepr { domain: p.domain, cells: p.cells, tail: p.tail, generator: p.generator, truncation }
    }
}

fn same_model(a: &MeasurableSet, b: &MeasurableSet) -> bool {
    match (a, b) {
        (MeasurableSet::Dyadic(_), MeasurableSet::Dyadic(_)) => true,
        (MeasurableSet::Finite { n, .. }, MeasurableSet::Finite { n: m, .. }) => n == m,
        _ => false,
    }
}

fn size(s: &MeasurableSet) -> u64 {
    match s {
        MeasurableSet::Dyadic(_) => s.numerator_length(),
        MeasurableSet::Finite { .. } => s.count() as u64,
    }
}

fn validate(domain: &MeasurableSet, parts: &[&MeasurableSet]) -> Result<()> {
    if parts.iter().any(|c| !same_model(c, domain)) {
        return Err(Error::SpaceMismatch);
    }
    let total: u64 = parts.iter().map(|c| size(c)).sum();
    let union = MeasurableSet::union_all(&domain.difference(domain), parts.iter().copied());
    if total != size(&union) {
        return Err(Error::InvalidPartition("cells overlap".into()));
    }
    if &union != domain {
        return Err(Error::InvalidPartition(format!("cells cover {union}, not {domain}")));
    }
    Ok(())
}

impl Partition {
    /// A finite partition of `domain`.
    pub fn new(domain: MeasurableSet, cells: Vec<MeasurableSet>) -> Result<Self> {
        if cells.iter().any(MeasurableSet::is_empty) {
            return Err(Error::InvalidPartition("empty cell".into()));
        }
        validate(&domain, &cells.iter().collect::<Vec<_>>())?;
        Ok(Self { domain, cells, tail: None, generator: None })
    }

    /// The first cells of a countable partition; `tail` is the union of the rest.
    pub fn truncated(
        domain: MeasurableSet,
        cells: Vec<MeasurableSet>,
        tail: MeasurableSet,
        generator: impl Into<String>,
    ) -> Result<Self> {
        if cells.iter().any(MeasurableSet::is_empty) {
            return Err(Error::InvalidPartition("empty cell".into()));
        }
        let mut all: Vec<&MeasurableSet> = cells.iter().collect();
        all.push(&tail);
        validate(&domain, &all)?;
        Ok(Self { domain, cells, tail: Some(tail), generator: Some(generator.into()) })
    }

    /// `{A}` (or no cells when `A` is empty).
    pub fn trivial(domain: MeasurableSet) -> Self {
        let cells = if domain.is_empty() { vec![] } else { vec![domain.clone()] };
        Self { domain, cells, tail: None, generator: None }
    }

    /// Member `m` of the refinement chain of `domain`: the traces of the
    /// depth-`m` dyadic cells, or the first `m` points as singletons followed
    /// by the remaining points on a finite space.
    pub fn chain_level(domain: &MeasurableSet, m: u32) -> Result<Self> {
        let cells = match domain {
            MeasurableSet::Dyadic(_) => {
                if m > RESOLUTION {
                    return Err(Error::GaugeTooFine { max_depth: RESOLUTION });
                }
                domain.split_at_depth(m)
            }
            MeasurableSet::Finite { .. } => finite_chain(domain, m as usize),
        };
        Ok(Self { domain: domain.clone(), cells, tail: None, generator: None })
    }

    pub fn domain(&self) -> &MeasurableSet {
        &self.domain
    }

    pub fn cells(&self) -> &[MeasurableSet] {
        &self.cells
    }

    pub fn tail(&self) -> Option<&MeasurableSet> {
        self.tail.as_ref()
    }

    pub fn generator(&self) -> Option<&str> {
        self.generator.as_deref()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_countable(&self) -> bool {
        self.tail.is_some()
    }

    /// The cells followed by the tail, when it is nonempty.
    pub fn parts(&self) -> impl Iterator<Item = &MeasurableSet> {
        self.cells.iter().chain(self.tail.iter().filter(|t| !t.is_empty()))
    }

    /// Index of the cell containing `t`.
    pub fn locate(&self, t: f64) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(t))
    }

    /// The same cells in another order.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.cells.len());
        Self { cells: order.iter().map(|&i| self.cells[i].clone()).collect(), ..self.clone() }
    }
}

/// `P_0, .., P_max_depth` of the refinement chain of the whole space.
pub fn dyadic_chain(space: SpaceModel, max_depth: u32) -> Result<Vec<Partition>> {
    if space.is_dyadic() && max_depth > space.max_depth() {
        return Err(Error::InvalidConfig(format!("max depth {max_depth} exceeds the space resolution")));
    }
    let full = space.full();
    let last = match space {
        SpaceModel::DyadicUnitInterval { .. } => max_depth,
        SpaceModel::FiniteSpace { n } => max_depth.min(n as u32 - 1),
    };
    (0..=last).map(|m| Partition::chain_level(&full, m)).collect()
}

/// Looks up which part of a partition contains a given point.
struct Locator<'a> {
    parts: Vec<&'a MeasurableSet>,
    spans: Vec<(u64, u64, usize)>,
    owner: Vec<Option<usize>>,
}

impl<'a> Locator<'a> {
    fn new(p: &'a Partition) -> Self {
        let parts: Vec<&MeasurableSet> = p.parts().collect();
        let mut spans = Vec::new();
        let mut owner = vec![None; 64];
        for (i, c) in parts.iter().enumerate() {
            spans.extend(c.spans().iter().map(|&(a, b)| (a, b, i)));
            for q in c.points() {
                owner[q] = Some(i);
            }
        }
        spans.sort_unstable();
        Self { parts, spans, owner }
    }

    /// The part that would have to contain `c` for `c` to lie in a single part.
    fn candidate(&self, c: &MeasurableSet) -> Option<usize> {
        match c {
            MeasurableSet::Dyadic(s) => {
                let x = s.first()?.0;
                let i = self.spans.partition_point(|&(a, _, _)| a <= x).checked_sub(1)?;
                let (a, b, o) = self.spans[i];
                (a <= x && x < b).then_some(o)
            }
            MeasurableSet::Finite { mask, .. } => self.owner[mask.trailing_zeros() as usize],
        }
    }

    fn container(&self, c: &MeasurableSet) -> Option<usize> {
        self.candidate(c).filter(|&o| c.is_subset_of(self.parts[o]))
    }
}

/// Is every part of `p2` contained in some part of `p1`? (The tail of a
/// truncated countable partition counts as a part.)
pub fn is_finer(p2: &Partition, p1: &Partition) -> bool {
    if p1.domain != p2.domain {
        return false;
    }
    let loc = Locator::new(p1);
    p2.parts().all(|c| loc.container(c).is_some())
}

/// `P ∧ Q = {A ∩ B : A ∈ P, B ∈ Q, A ∩ B ≠ ∅}`, ordered by the index in `P` then in `Q`.
pub fn common_refinement(p: &Partition, q: &Partition) -> Result<Partition> {
    if p.domain != q.domain {
        return Err(Error::InvalidPartition("partitions of different domains".into()));
    }
    let mut cells = Vec::new();
    let qb: Vec<Option<(f64, f64)>> = q.parts().map(|b| b.bounds()).collect();
    for a in p.parts() {
        let ab = a.bounds();
        for (j, b) in q.parts().enumerate() {
            if let (Some((a0, a1)), Some((b0, b1))) = (ab, qb[j]) {
                if a1 <= b0 || b1 <= a0 {
                    continue;
                }
            }
            let c = a.intersection(b);
            if !c.is_empty() {
                cells.push(c);
            }
        }
    }
    Ok(Partition { domain: p.domain.clone(), cells, tail: None, generator: None })
}

/// A random partition finer than `p`: each cell is cut at a depth up to
/// `extra_depth` below its own finest depth and the pieces are regrouped into
/// random runs. Finite cells are split into random groups of points. The tail
/// of a truncated partition is kept.
pub fn random_refinement<R: Rng + ?Sized>(p: &Partition, rng: &mut R, extra_depth: u32) -> Partition {
    let mut cells = Vec::with_capacity(p.cells.len());
    for c in &p.cells {
        match c {
            MeasurableSet::Dyadic(_) => {
                let m = (c.finest_depth() + rng.gen_range(0..=extra_depth)).min(RESOLUTION);
                let pieces = c.split_at_depth(m);
                let mut group: Option<MeasurableSet> = None;
                for piece in pieces {
                    group = Some(match group {
                        Some(g) if rng.gen_bool(0.5) => g.union(&piece),
                        Some(g) => {
                            cells.push(g);
                            piece
                        }
                        None => piece,
                    });
                }
                cells.extend(group);
            }
            MeasurableSet::Finite { n, .. } => {
                let mut pts = c.points();
                pts.shuffle(rng);
                let groups = rng.gen_range(1..=pts.len());
                let mut masks = vec![0u64; groups];
                for (i, q) in pts.into_iter().enumerate() {
                    let g = if i < groups { i } else { rng.gen_range(0..groups) };
                    masks[g] |= 1 << q;
                }
                cells.extend(masks.into_iter().map(|mask| MeasurableSet::Finite { mask, n: *n }));
            }
        }
    }
    Partition { cells, ..p.clone() }
}

/// How tags relate to their cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TagDiscipline {
    /// Each tag lies in its cell.
    Henstock,
    /// Tags are free.
    McShane,
    /// Tags are free but pairwise distinct.
    Univocal,
}

/// A partition with one tag per cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TaggedRepr", into = "TaggedRepr")]
pub struct TaggedPartition {
    partition: Partition,
    tags: Vec<f64>,
    discipline: TagDiscipline,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct TaggedRepr {
    partition: Partition,
    tags: Vec<f64>,
    discipline: TagDiscipline,
}

impl TryFrom<TaggedRepr> for TaggedPartition {
    type Error = Error;

    fn try_from(r: TaggedRepr) -> Result<Self> {
        TaggedPartition::new(r.partition, r.tags, r.discipline)
    }
}

impl From<TaggedPartition> for TaggedRepr {
    fn from(t: TaggedPartition) -> Self {
        TaggedRepr { partition: t.partition, tags: t.tags, discipline: t.discipline }
    }
}

fn tag_in_space(domain: &MeasurableSet, t: f64) -> bool {
    match domain {
        MeasurableSet::Dyadic(_) => (0.0..=1.0).contains(&t),
        MeasurableSet::Finite { n, .. } => t >= 0.0 && t.fract() == 0.0 && t < *n as f64,
    }
}

impl TaggedPartition {
    pub fn new(partition: Partition, tags: Vec<f64>, discipline: TagDiscipline) -> Result<Self> {
        if tags.len() != partition.cells.len() {
            return Err(Error::InvalidPartition(format!(
                "{} tags for {} cells",
                tags.len(),
                partition.cells.len()
            )));
        }
        if let Some(t) = tags.iter().find(|&&t| !tag_in_space(&partition.domain, t)) {
            return Err(Error::InvalidPartition(format!("tag {t} is not a point of the space")));
        }
        match discipline {
            TagDiscipline::Henstock => {
                if let Some(i) = (0..tags.len()).find(|&i| !partition.cells[i].contains(tags[i])) {
                    return Err(Error::InvalidPartition(format!(
                        "tag {} outside its cell {}",
                        tags[i], partition.cells[i]
                    )));
                }
            }
            TagDiscipline::Univocal => {
                let mut sorted = tags.clone();
                sorted.sort_by(f64::total_cmp);
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::InvalidPartition("univocal tags must be pairwise distinct".into()));
                }
            }
            TagDiscipline::McShane => {}
        }
        Ok(Self { partition, tags, discipline })
    }

    /// Tags drawn uniformly from their cells.
    pub fn random_henstock<R: Rng + ?Sized>(partition: Partition, rng: &mut R) -> Self {
        let tags = partition.cells.iter().map(|c| c.sample_point(rng)).collect();
        Self { partition, tags, discipline: TagDiscipline::Henstock }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn tags(&self) -> &[f64] {
        &self.tags
    }

    pub fn discipline(&self) -> TagDiscipline {
        self.discipline
    }

    pub fn cells(&self) -> &[MeasurableSet] {
        &self.partition.cells
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Does every tag belong to exactly one cell?
    pub fn is_univocal(&self) -> bool {
        let mut sorted = self.tags.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).all(|w| w[0] != w[1])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&MeasurableSet, f64)> {
        self.partition.cells.iter().zip(self.tags.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn iv(a: f64, b: f64) -> MeasurableSet {
        MeasurableSet::interval(a, b).unwrap()
    }

    fn t() -> MeasurableSet {
        MeasurableSet::unit_interval()
    }

    #[test]
    fn validation() {
        assert!(Partition::new(t(), vec![iv(0.0, 0.5), iv(0.5, 1.0)]).is_ok());
        assert!(Partition::new(t(), vec![iv(0.0, 0.75), iv(0.5, 1.0)]).is_err());
        assert!(Partition::new(t(), vec![iv(0.0, 0.5)]).is_err());
        assert!(Partition::truncated(t(), vec![iv(0.0, 0.5)], iv(0.5, 1.0), "g").is_ok());
        let f = MeasurableSet::finite(3, 0b111).unwrap();
        assert!(Partition::new(f.clone(), vec![MeasurableSet::finite(3, 0b011).unwrap()]).is_err());
        assert!(Partition::new(f, vec![t()]).is_err());
    }

    #[test]
    fn chain_and_refinement_order() {
        let chain = dyadic_chain(SpaceModel::dyadic(), 3).unwrap();
        assert_eq!(chain[0].cells(), &[t()]);
        assert_eq!(chain[3].len(), 8);
        assert!(chain[3].cells().iter().all(|c| c.length() == 0.125));
        for w in chain.windows(2) {
            assert!(is_finer(&w[1], &w[0]));
            assert!(!is_finer(&w[0], &w[1]));
        }
        assert!(is_finer(&chain[2], &chain[2]));
        let finite = dyadic_chain(SpaceModel::finite(4).unwrap(), 10).unwrap();
        assert_eq!(finite.len(), 4);
        assert_eq!(finite[3].len(), 4);
    }

    #[test]
    fn common_refinement_example() {
        let p = Partition::new(t(), vec![iv(0.0, 0.5), iv(0.5, 1.0)]).unwrap();
        let q = Partition::new(t(), vec![iv(0.0, 0.25), iv(0.25, 1.0)]).unwrap();
        let r = common_refinement(&p, &q).unwrap();
        assert_eq!(r.cells(), &[iv(0.0, 0.25), iv(0.25, 0.5), iv(0.5, 1.0)]);
        assert_eq!(common_refinement(&p, &p).unwrap(), p);
    }

    #[test]
    fn json_round_trip() {
        let p = Partition::truncated(t(), vec![iv(0.0, 0.5)], iv(0.5, 1.0), "geometric(1)").unwrap();
        let j = serde_json::to_string(&p).unwrap();
        assert!(j.contains(r#""truncation":1"#));
        assert_eq!(serde_json::from_str::<Partition>(&j).unwrap(), p);
        let bad = j.replace(r#"[1,1]"#, r#"[2,3]"#);
        assert!(serde_json::from_str::<Partition>(&bad).is_err());
    }

    #[test]
    fn tag_disciplines() {
        let p = Partition::new(t(), vec![iv(0.0, 0.5), iv(0.5, 1.0)]).unwrap();
        assert!(TaggedPartition::new(p.clone(), vec![0.25, 1.0], TagDiscipline::Henstock).is_ok());
        assert!(TaggedPartition::new(p.clone(), vec![0.75, 1.0], TagDiscipline::Henstock).is_err());
        assert!(TaggedPartition::new(p.clone(), vec![0.75, 0.75], TagDiscipline::McShane).is_ok());
        assert!(TaggedPartition::new(p.clone(), vec![0.75, 0.75], TagDiscipline::Univocal).is_err());
        assert!(TaggedPartition::new(p, vec![0.75], TagDiscipline::McShane).is_err());
    }

    fn random_partition(seed: u64, extra: u32) -> Partition {
        let mut r = rng::stream(seed, "test");
        random_refinement(&Partition::trivial(t()), &mut r, extra)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn refinement_is_a_partial_order(a in any::<u64>(), b in any::<u64>()) {
            let p = random_partition(a, 5);
            let q = random_partition(b, 5);
            let mut r = rng::stream(a ^ b, "refine");
            let pr = random_refinement(&p, &mut r, 3);
            let prr = random_refinement(&pr, &mut r, 3);
            prop_assert!(is_finer(&p, &p));
            prop_assert!(is_finer(&pr, &p));
            prop_assert!(is_finer(&prr, &p));
            if is_finer(&p, &q) && is_finer(&q, &p) {
                prop_assert_eq!(p.cells().len(), q.cells().len());
            }
            let m = common_refinement(&p, &q).unwrap();
            prop_assert!(Partition::new(t(), m.cells().to_vec()).is_ok());
            prop_assert!(is_finer(&m, &p) && is_finer(&m, &q));
            prop_assert!(m.len() <= p.len() * q.len());
            let both = common_refinement(&pr, &q).unwrap();
            prop_assert!(is_finer(&both, &m));
        }

        #[test]
        fn finite_refinements_are_partitions(seed in any::<u64>(), n in 1usize..9) {
            let full = MeasurableSet::finite(n, (1 << n) - 1).unwrap();
            let mut r = rng::stream(seed, "finite");
            let p = random_refinement(&Partition::trivial(full.clone()), &mut r, 0);
            prop_assert!(Partition::new(full, p.cells().to_vec()).is_ok());
        }
    }
}
