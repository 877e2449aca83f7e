//! Measurable sets of the two space models.
//!
//! The dyadic model works on `[0, 1]` with the algebra generated by half-open
//! dyadic intervals `[k 2^-m, (k+1) 2^-m)`. Endpoints are stored as integer
//! numerators over `2^RESOLUTION`, so every set operation is exact. The point
//! `1` belongs to whichever set contains the rightmost cell; this keeps every
//! partition an exact set-theoretic partition of the closed interval.
//!
//! The finite model is the power set of `{0, .., n-1}`, stored as a bitmask.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Finest dyadic depth representable by the model.
pub const RESOLUTION: u32 = 48;
/// Numerator of the right endpoint `1`.
pub const FULL: u64 = 1 << RESOLUTION;
const SCALE: f64 = FULL as f64;
/// Largest finite space supported by the bitmask representation.
pub const MAX_FINITE: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SpaceModel {
    /// `[0, 1]` with the dyadic algebra down to `max_depth`.
    #[serde(rename_all = "camelCase")]
    DyadicUnitInterval { max_depth: u32 },
    /// `{0, .., n-1}` with its power set.
    FiniteSpace { n: usize },
}

impl SpaceModel {
    pub fn dyadic() -> Self {
        SpaceModel::DyadicUnitInterval { max_depth: RESOLUTION }
    }

    pub fn finite(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_FINITE {
            return Err(Error::TooLarge { n, max: MAX_FINITE });
        }
        Ok(SpaceModel::FiniteSpace { n })
    }

    pub fn is_dyadic(&self) -> bool {
        matches!(self, SpaceModel::DyadicUnitInterval { .. })
    }

    pub fn max_depth(&self) -> u32 {
        match self {
            SpaceModel::DyadicUnitInterval { max_depth } => *max_depth,
            SpaceModel::FiniteSpace { .. } => 0,
        }
    }

    pub fn full(&self) -> MeasurableSet {
        match self {
            SpaceModel::DyadicUnitInterval { .. } => MeasurableSet::unit_interval(),
            SpaceModel::FiniteSpace { n } => MeasurableSet::Finite { mask: full_mask(*n), n: *n as u32 },
        }
    }

    pub fn empty(&self) -> MeasurableSet {
        match self {
            SpaceModel::DyadicUnitInterval { .. } => MeasurableSet::Dyadic(SmallVec::new()),
            SpaceModel::FiniteSpace { n } => MeasurableSet::Finite { mask: 0, n: *n as u32 },
        }
    }

    /// Whether `set` lives in this model.
    pub fn admits(&self, set: &MeasurableSet) -> bool {
        match (self, set) {
            (SpaceModel::DyadicUnitInterval { max_depth }, MeasurableSet::Dyadic(_)) => {
                set.finest_depth() <= *max_depth
            }
            (SpaceModel::FiniteSpace { n }, MeasurableSet::Finite { n: m, .. }) => *n == *m as usize,
            _ => false,
        }
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Converts a point of `[0, 1]` to its numerator, if it is representable.
pub fn numerator(x: f64) -> Result<u64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::NotDyadic(x));
    }
    let v = x * SCALE;
    if v.fract() != 0.0 {
        return Err(Error::NotDyadic(x));
    }
    Ok(v as u64)
}

#[inline]
pub fn to_point(numerator: u64) -> f64 {
    numerator as f64 / SCALE
}

/// A dyadic interval `[index 2^-depth, (index+1) 2^-depth)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCell {
    pub depth: u32,
    pub index: u64,
}

impl DyadicCell {
    pub fn new(depth: u32, index: u64) -> Result<Self> {
        if depth > RESOLUTION || index >= (1u64 << depth) {
            return Err(Error::InvalidSet(format!("no dyadic cell ({depth}, {index})")));
        }
        Ok(Self { depth, index })
    }

    pub fn root() -> Self {
        Self { depth: 0, index: 0 }
    }

    /// The depth-`depth` cell containing `t`; the point `1` maps to the last cell.
    pub fn containing(t: f64, depth: u32) -> Self {
        assert!((0.0..=1.0).contains(&t), "point {t} outside [0, 1]");
        let count = 1u64 << depth;
        let idx = ((t * count as f64).floor() as u64).min(count - 1);
        Self { depth, index: idx }
    }

    pub fn width(&self) -> u64 {
        FULL >> self.depth
    }

    pub fn span(&self) -> (u64, u64) {
        let w = self.width();
        (self.index * w, (self.index + 1) * w)
    }

    pub fn lo(&self) -> f64 {
        to_point(self.span().0)
    }

    pub fn hi(&self) -> f64 {
        to_point(self.span().1)
    }

    pub fn length(&self) -> f64 {
        to_point(self.width())
    }

    pub fn midpoint(&self) -> f64 {
        let (a, b) = self.span();
        to_point(a + (b - a) / 2)
    }

    pub fn children(&self) -> [DyadicCell; 2] {
        let d = self.depth + 1;
        [Self { depth: d, index: 2 * self.index }, Self { depth: d, index: 2 * self.index + 1 }]
    }

    pub fn parent(&self) -> Option<DyadicCell> {
        (self.depth > 0).then(|| Self { depth: self.depth - 1, index: self.index / 2 })
    }

    pub fn is_last(&self) -> bool {
        self.index + 1 == (1u64 << self.depth)
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = self.span();
        span_contains(a, b, t)
    }

    pub fn to_set(&self) -> MeasurableSet {
        MeasurableSet::Dyadic(smallvec::smallvec![self.span()])
    }
}

#[inline]
fn span_contains(a: u64, b: u64, t: f64) -> bool {
    let v = t * SCALE;
    (a as f64) <= v && (v < b as f64 || (b == FULL && t == 1.0))
}

type Spans = SmallVec<[(u64, u64); 2]>;

/// An element of the algebra of one of the two space models.
///
/// Dyadic sets hold sorted, disjoint, non-adjacent spans `[a, b)` of
/// numerators, so equal sets have equal representations.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SetRepr", into = "SetRepr")]
pub enum MeasurableSet {
    Dyadic(Spans),
    Finite { mask: u64, n: u32 },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SetRepr {
    Cells { cells: Vec<(u32, u64)> },
    Mask { mask: u64, n: u32 },
}

impl TryFrom<SetRepr> for MeasurableSet {
    type Error = Error;

    fn try_from(r: SetRepr) -> Result<Self> {
        match r {
            SetRepr::Cells { cells } => {
                let cells =
                    cells.into_iter().map(|(d, k)| DyadicCell::new(d, k)).collect::<Result<Vec<_>>>()?;
                MeasurableSet::from_cells(&cells)
            }
            SetRepr::Mask { mask, n } => MeasurableSet::finite(n as usize, mask),
        }
    }
}

impl From<MeasurableSet> for SetRepr {
    fn from(s: MeasurableSet) -> Self {
        match s {
            MeasurableSet::Dyadic(_) => {
                SetRepr::Cells { cells: s.cells().into_iter().map(|c| (c.depth, c.index)).collect() }
            }
            MeasurableSet::Finite { mask, n } => SetRepr::Mask { mask, n },
        }
    }
}

impl MeasurableSet {
    /// `[0, 1]` in the dyadic model.
    pub fn unit_interval() -> Self {
        MeasurableSet::Dyadic(smallvec::smallvec![(0, FULL)])
    }

    pub fn cell(depth: u32, index: u64) -> Result<Self> {
        Ok(DyadicCell::new(depth, index)?.to_set())
    }

    /// `[a, b)` (or `[a, 1]` when `b == 1`) for dyadic rationals `a < b`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        let (na, nb) = (numerator(a)?, numerator(b)?);
        if na >= nb {
            return Err(Error::InvalidSet(format!("empty interval [{a}, {b})")));
        }
        Ok(MeasurableSet::Dyadic(smallvec::smallvec![(na, nb)]))
    }

    /// Builds a dyadic set from arbitrary spans (overlaps and adjacency allowed).
    pub fn from_spans(spans: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let mut v: Vec<(u64, u64)> = Vec::new();
        for (a, b) in spans {
            if a > b || b > FULL {
                return Err(Error::InvalidSet(format!("bad span ({a}, {b})")));
            }
            if a < b {
                v.push((a, b));
            }
        }
        Ok(MeasurableSet::Dyadic(normalize(v)))
    }

    pub fn from_cells(cells: &[DyadicCell]) -> Result<Self> {
        Self::from_spans(cells.iter().map(|c| c.span()))
    }

    pub fn finite(n: usize, mask: u64) -> Result<Self> {
        if n == 0 || n > MAX_FINITE {
            return Err(Error::TooLarge { n, max: MAX_FINITE });
        }
        if mask & !full_mask(n) != 0 {
            return Err(Error::InvalidSet(format!("mask {mask:#x} has bits beyond n = {n}")));
        }
        Ok(MeasurableSet::Finite { mask, n: n as u32 })
    }

    pub fn finite_points(n: usize, points: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &p in points {
            if p >= n {
                return Err(Error::InvalidSet(format!("point {p} outside a space of size {n}")));
            }
            mask |= 1 << p;
        }
        Self::finite(n, mask)
    }

    pub fn is_dyadic(&self) -> bool {
        matches!(self, MeasurableSet::Dyadic(_))
    }

    pub fn spans(&self) -> &[(u64, u64)] {
        match self {
            MeasurableSet::Dyadic(s) => s,
            MeasurableSet::Finite { .. } => &[],
        }
    }

    pub fn mask(&self) -> u64 {
        match self {
            MeasurableSet::Finite { mask, .. } => *mask,
            MeasurableSet::Dyadic(_) => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            MeasurableSet::Dyadic(s) => s.is_empty(),
            MeasurableSet::Finite { mask, .. } => *mask == 0,
        }
    }

    /// Lebesgue length of a dyadic set (exact: lengths are dyadic rationals).
    pub fn length(&self) -> f64 {
        to_point(self.numerator_length())
    }

    pub fn numerator_length(&self) -> u64 {
        self.spans().iter().map(|(a, b)| b - a).sum()
    }

    /// Number of points of a finite set.
    pub fn count(&self) -> usize {
        self.mask().count_ones() as usize
    }

    /// Elements of a finite set in increasing order.
    pub fn points(&self) -> Vec<usize> {
        let m = self.mask();
        (0..64).filter(|i| m >> i & 1 == 1).collect()
    }

    /// Does the set contain the point `t`? Finite points are given as `i as f64`.
    pub fn contains(&self, t: f64) -> bool {
        match self {
            MeasurableSet::Dyadic(s) => {
                if !(0.0..=1.0).contains(&t) {
                    return false;
                }
                s.iter().any(|&(a, b)| span_contains(a, b, t))
            }
            MeasurableSet::Finite { mask, n } => {
                t >= 0.0 && t.fract() == 0.0 && (t as u64) < *n as u64 && mask >> (t as u64) & 1 == 1
            }
        }
    }

    fn same_space(&self, other: &Self) {
        match (self, other) {
            (MeasurableSet::Dyadic(_), MeasurableSet::Dyadic(_)) => {}
            (MeasurableSet::Finite { n: a, .. }, MeasurableSet::Finite { n: b, .. }) if a == b => {}
            _ => panic!("set operation across different space models"),
        }
    }

    /// Set union; panics if the operands live in different space models.
    pub fn union(&self, other: &Self) -> Self {
        self.same_space(other);
        match (self, other) {
            (MeasurableSet::Dyadic(a), MeasurableSet::Dyadic(b)) => {
                let mut v: Vec<(u64, u64)> = a.iter().chain(b.iter()).copied().collect();
                v.sort_unstable();
                MeasurableSet::Dyadic(coalesce(v))
            }
            (MeasurableSet::Finite { mask: a, n }, MeasurableSet::Finite { mask: b, .. }) => {
                MeasurableSet::Finite { mask: a | b, n: *n }
            }
            _ => unreachable!(),
        }
    }

    pub fn union_all<'a>(first: &Self, rest: impl IntoIterator<Item = &'a MeasurableSet>) -> Self {
        match first {
            MeasurableSet::Dyadic(_) => {
                let mut v: Vec<(u64, u64)> = first.spans().to_vec();
                for s in rest {
                    first.same_space(s);
                    v.extend_from_slice(s.spans());
                }
                v.sort_unstable();
                MeasurableSet::Dyadic(coalesce(v))
            }
            MeasurableSet::Finite { mask, n } => {
                let mut m = *mask;
                for s in rest {
                    first.same_space(s);
                    m |= s.mask();
                }
                MeasurableSet::Finite { mask: m, n: *n }
            }
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.same_space(other);
        match (self, other) {
            (MeasurableSet::Dyadic(a), MeasurableSet::Dyadic(b)) => {
                let mut out = Spans::new();
                let (mut i, mut j) = (0, 0);
                while i < a.len() && j < b.len() {
                    let lo = a[i].0.max(b[j].0);
                    let hi = a[i].1.min(b[j].1);
                    if lo < hi {
                        out.push((lo, hi));
                    }
                    if a[i].1 < b[j].1 {
                        i += 1;
                    } else {
                        j += 1;
                    }
                }
                MeasurableSet::Dyadic(out)
            }
            (MeasurableSet::Finite { mask: a, n }, MeasurableSet::Finite { mask: b, .. }) => {
                MeasurableSet::Finite { mask: a & b, n: *n }
            }
            _ => unreachable!(),
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.same_space(other);
        match (self, other) {
            (MeasurableSet::Dyadic(a), MeasurableSet::Dyadic(b)) => {
                let mut out = Spans::new();
                let mut j = 0;
                for &(mut lo, hi) in a.iter() {
                    while j < b.len() && b[j].1 <= lo {
                        j += 1;
                    }
                    let mut k = j;
                    while k < b.len() && b[k].0 < hi {
                        if b[k].0 > lo {
                            out.push((lo, b[k].0));
                        }
                        lo = lo.max(b[k].1);
                        k += 1;
                    }
                    if lo < hi {
                        out.push((lo, hi));
                    }
                }
                MeasurableSet::Dyadic(out)
            }
            (MeasurableSet::Finite { mask: a, n }, MeasurableSet::Finite { mask: b, .. }) => {
                MeasurableSet::Finite { mask: a & !b, n: *n }
            }
            _ => unreachable!(),
        }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.intersection(other).is_empty()
    }

    /// Smallest depth `m` such that the set is a union of depth-`m` cells.
    pub fn finest_depth(&self) -> u32 {
        self.spans()
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .map(|x| if x == 0 { 0 } else { RESOLUTION - x.trailing_zeros().min(RESOLUTION) })
            .max()
            .unwrap_or(0)
    }

    /// Canonical decomposition into maximal dyadic cells, left to right.
    pub fn cells(&self) -> Vec<DyadicCell> {
        let mut out = Vec::new();
        for &(mut a, b) in self.spans() {
            while a < b {
                let align = if a == 0 { RESOLUTION } else { a.trailing_zeros().min(RESOLUTION) };
                let mut w = 1u64 << align;
                while a + w > b {
                    w >>= 1;
                }
                let depth = RESOLUTION - w.trailing_zeros();
                out.push(DyadicCell { depth, index: a / w });
                a += w;
            }
        }
        out
    }

    /// The nonempty traces `c ∩ self` of the depth-`m` cells `c`, left to right.
    pub fn split_at_depth(&self, m: u32) -> Vec<MeasurableSet> {
        let m = m.min(RESOLUTION);
        let w = FULL >> m;
        let mut out: Vec<MeasurableSet> = Vec::new();
        let mut current: Option<(u64, Spans)> = None;
        for &(a, b) in self.spans() {
            let mut k = a / w;
            while k * w < b {
                let lo = a.max(k * w);
                let hi = b.min((k + 1) * w);
                match &mut current {
                    Some((idx, spans)) if *idx == k => spans.push((lo, hi)),
                    _ => {
                        if let Some((_, spans)) = current.take() {
                            out.push(MeasurableSet::Dyadic(spans));
                        }
                        current = Some((k, smallvec::smallvec![(lo, hi)]));
                    }
                }
                k += 1;
            }
        }
        if let Some((_, spans)) = current {
            out.push(MeasurableSet::Dyadic(spans));
        }
        out
    }

    /// Uniform random point of the set (on the resolution grid for dyadic sets).
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            MeasurableSet::Dyadic(s) => {
                assert!(!s.is_empty(), "sampling from the empty set");
                if s.len() == 1 {
                    return to_point(rng.gen_range(s[0].0..s[0].1));
                }
                let total = self.numerator_length();
                let mut off = rng.gen_range(0..total);
                for &(a, b) in s.iter() {
                    if off < b - a {
                        return to_point(a + off);
                    }
                    off -= b - a;
                }
                unreachable!()
            }
            MeasurableSet::Finite { mask, .. } => {
                let pts: SmallVec<[usize; 16]> = (0..64).filter(|i| mask >> i & 1 == 1).collect();
                assert!(!pts.is_empty(), "sampling from the empty set");
                pts[rng.gen_range(0..pts.len())] as f64
            }
        }
    }

    /// A deterministic point of the set: the midpoint of its first span, or its
    /// smallest element.
    pub fn representative(&self) -> f64 {
        match self {
            MeasurableSet::Dyadic(s) => {
                let (a, b) = s[0];
                to_point(a + (b - a) / 2)
            }
            MeasurableSet::Finite { mask, .. } => mask.trailing_zeros() as f64,
        }
    }

    /// `(inf, sup)` of a dyadic set.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        let s = self.spans();
        Some((to_point(s.first()?.0), to_point(s.last()?.1)))
    }

    /// Does the set contain the right endpoint `1`?
    pub fn touches_one(&self) -> bool {
        self.spans().last().is_some_and(|s| s.1 == FULL)
    }
}

fn normalize(mut v: Vec<(u64, u64)>) -> Spans {
    v.sort_unstable();
    coalesce(v)
}

fn coalesce(v: Vec<(u64, u64)>) -> Spans {
    let mut out = Spans::new();
    for (a, b) in v {
        if a >= b {
            continue;
        }
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

impl fmt::Debug for MeasurableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MeasurableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasurableSet::Dyadic(s) => {
                if s.is_empty() {
                    return write!(f, "∅");
                }
                for (i, &(a, b)) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ∪ ")?;
                    }
                    let close = if b == FULL { ']' } else { ')' };
                    write!(f, "[{}, {}{}", to_point(a), to_point(b), close)?;
                }
                Ok(())
            }
            MeasurableSet::Finite { mask, .. } => {
                let pts: Vec<String> = (0..64).filter(|i| mask >> i & 1 == 1).map(|i| i.to_string()).collect();
                write!(f, "{{{}}}", pts.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn iv(a: f64, b: f64) -> MeasurableSet {
        MeasurableSet::interval(a, b).unwrap()
    }

    #[test]
    fn right_endpoint_belongs_to_last_cell() {
        let last = DyadicCell::containing(1.0, 3);
        assert!(last.is_last());
        assert!(last.contains(1.0));
        assert!(!DyadicCell::new(3, 6).unwrap().contains(1.0));
        assert!(iv(0.5, 1.0).contains(1.0));
        assert!(!iv(0.0, 0.5).contains(0.5));
        assert!(MeasurableSet::unit_interval().contains(0.0));
    }

    #[test]
    fn non_dyadic_endpoints_are_rejected() {
        assert!(matches!(MeasurableSet::interval(0.0, 0.3), Err(Error::NotDyadic(_))));
        assert!(MeasurableSet::interval(0.5, 0.5).is_err());
        assert!(MeasurableSet::interval(0.0, 1.5).is_err());
    }

    #[test]
    fn boolean_operations() {
        let a = iv(0.0, 0.5);
        let b = iv(0.25, 0.75);
        assert_eq!(a.union(&b), iv(0.0, 0.75));
        assert_eq!(a.intersection(&b), iv(0.25, 0.5));
        assert_eq!(a.difference(&b), iv(0.0, 0.25));
        assert_eq!(b.difference(&a), iv(0.5, 0.75));
        assert!(iv(0.25, 0.5).is_subset_of(&a));
        assert!(iv(0.5, 0.75).is_disjoint(&a));
        // adjacent spans merge into the canonical form
        assert_eq!(iv(0.0, 0.25).union(&iv(0.25, 0.5)), a);
        let holes = iv(0.0, 1.0).difference(&iv(0.25, 0.5));
        assert_eq!(holes.spans().len(), 2);
        assert_eq!(holes.length(), 0.75);
    }

    #[test]
    fn finite_sets() {
        let a = MeasurableSet::finite_points(4, &[0, 2]).unwrap();
        let b = MeasurableSet::finite_points(4, &[2, 3]).unwrap();
        assert_eq!(a.union(&b).points(), vec![0, 2, 3]);
        assert_eq!(a.intersection(&b).points(), vec![2]);
        assert!(a.contains(2.0) && !a.contains(1.0));
        assert!(MeasurableSet::finite(2, 0b100).is_err());
        assert!(MeasurableSet::finite_points(3, &[3]).is_err());
    }

    #[test]
    #[should_panic(expected = "different space models")]
    fn mixing_models_panics() {
        let _ = MeasurableSet::unit_interval().union(&MeasurableSet::finite(2, 1).unwrap());
    }

    #[test]
    fn cell_decomposition_and_depth() {
        let s = iv(0.25, 1.0);
        let cells = s.cells();
        assert_eq!(cells, vec![DyadicCell { depth: 2, index: 1 }, DyadicCell { depth: 1, index: 1 }]);
        assert_eq!(s.finest_depth(), 2);
        assert_eq!(MeasurableSet::unit_interval().finest_depth(), 0);
        assert_eq!(MeasurableSet::from_cells(&cells).unwrap(), s);
    }

    #[test]
    fn split_groups_pieces_by_cell() {
        let s = iv(0.0, 0.125).union(&iv(0.25, 0.375)).union(&iv(0.75, 1.0));
        let pieces = s.split_at_depth(1);
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0], iv(0.0, 0.125).union(&iv(0.25, 0.375)));
        assert_eq!(pieces[1], iv(0.75, 1.0));
        assert_eq!(MeasurableSet::unit_interval().split_at_depth(3).len(), 8);
    }

    #[test]
    fn json_uses_cells_or_masks() {
        let s = iv(0.25, 1.0);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"cells":[[2,1],[1,1]]}"#);
        assert_eq!(serde_json::from_str::<MeasurableSet>(&j).unwrap(), s);
        let f = MeasurableSet::finite(5, 0b10110).unwrap();
        let j = serde_json::to_string(&f).unwrap();
        assert_eq!(j, r#"{"mask":22,"n":5}"#);
        assert_eq!(serde_json::from_str::<MeasurableSet>(&j).unwrap(), f);
    }

    #[test]
    fn sampled_points_lie_in_the_set() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let s = iv(0.0, 0.125).union(&iv(0.5, 0.625));
        for _ in 0..1000 {
            assert!(s.contains(s.sample_point(&mut rng)));
        }
        let f = MeasurableSet::finite_points(6, &[1, 4]).unwrap();
        for _ in 0..100 {
            assert!(f.contains(f.sample_point(&mut rng)));
        }
    }

    fn arb_set() -> impl Strategy<Value = MeasurableSet> {
        prop::collection::vec((1u32..8, any::<u64>()), 0..6).prop_map(|cells| {
            let cells: Vec<DyadicCell> =
                cells.into_iter().map(|(d, k)| DyadicCell { depth: d, index: k % (1 << d) }).collect();
            MeasurableSet::from_cells(&cells).unwrap()
        })
    }

    proptest! {
        #[test]
        fn algebra_laws(a in arb_set(), b in arb_set()) {
            let u = a.union(&b);
            let i = a.intersection(&b);
            prop_assert_eq!(u.numerator_length() + i.numerator_length(), a.numerator_length() + b.numerator_length());
            prop_assert_eq!(a.difference(&b).union(&i), a.clone());
            prop_assert!(a.difference(&b).is_disjoint(&b));
            prop_assert_eq!(MeasurableSet::from_cells(&u.cells()).unwrap(), u.clone());
            let pieces = u.split_at_depth(3);
            let back = pieces.iter().fold(MeasurableSet::Dyadic(SmallVec::new()), |acc, p| acc.union(p));
            prop_assert_eq!(back, u);
        }
    }
}
