//! Gauges, Cousin constructions and Δ-fine generalized Mc Shane partitions.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::countable::CountableGenerator;
use super::partition::{Partition, TagDiscipline, TaggedPartition};
use crate::error::{Error, Result};
use crate::spaces::sets::{to_point, FULL};
use crate::spaces::{DyadicCell, MeasurableSet, SetFunction, RESOLUTION};

/// A gauge value on a piece of `[0, 1]`: every point of `home` gets `open`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GaugePiece {
    /// A single span `[a, b)` (or `[a, 1]`).
    pub home: MeasurableSet,
    /// Open interval `(l, h)` containing `home`.
    pub open: (f64, f64),
    /// Caller-defined group of the piece.
    pub label: usize,
}

/// `Δ(t)`: an exceptional ball, else the piece holding `t`, else the default ball.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Gauge {
    pieces: Vec<GaugePiece>,
    default_radius: Option<f64>,
    exceptions: Vec<(f64, f64)>,
}

/// Does `set` lie in the open interval `(l, h)`?
pub fn fits(open: (f64, f64), set: &MeasurableSet) -> bool {
    let Some((a, b)) = set.bounds() else { return true };
    let (l, h) = open;
    a > l && if set.touches_one() { 1.0 < h } else { b <= h }
}

impl Gauge {
    /// `Δ(t) = (t - r, t + r)`.
    pub fn ball(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig(format!("gauge radius must be positive, got {radius}")));
        }
        Ok(Self { pieces: vec![], default_radius: Some(radius), exceptions: vec![] })
    }

    /// Piecewise-constant gauge. Pieces are single spans, pairwise disjoint,
    /// and each open interval contains its home.
    pub fn piecewise(mut pieces: Vec<GaugePiece>, default_radius: Option<f64>) -> Result<Self> {
        pieces.sort_by_key(|p| p.home.spans().first().map(|s| s.0));
        for p in &pieces {
            if p.home.spans().len() != 1 {
                return Err(Error::InvalidConfig(format!("gauge piece {} is not a single span", p.home)));
            }
            if !fits(p.open, &p.home) {
                return Err(Error::InvalidConfig(format!("({}, {}) does not contain {}", p.open.0, p.open.1, p.home)));
            }
        }
        if pieces.windows(2).any(|w| w[0].home.spans()[0].1 > w[1].home.spans()[0].0) {
            return Err(Error::InvalidConfig("gauge pieces overlap".into()));
        }
        if let Some(r) = default_radius {
            if !(r > 0.0) {
                return Err(Error::InvalidConfig(format!("gauge radius must be positive, got {r}")));
            }
        }
        Ok(Self { pieces, default_radius, exceptions: vec![] })
    }

    /// Overrides the gauge at `t` with `(t - r, t + r)`.
    pub fn with_exception(mut self, t: f64, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidConfig(format!("gauge radius must be positive, got {r}")));
        }
        self.exceptions.push((t, r));
        Ok(self)
    }

    pub fn pieces(&self) -> &[GaugePiece] {
        &self.pieces
    }

    pub fn exception_points(&self) -> impl Iterator<Item = f64> + '_ {
        self.exceptions.iter().map(|e| e.0)
    }

    fn piece_index(&self, t: f64) -> Option<usize> {
        let v = t * FULL as f64;
        let i = self.pieces.partition_point(|p| (p.home.spans()[0].0 as f64) <= v).checked_sub(1)?;
        self.pieces[i].home.contains(t).then_some(i)
    }

    /// Indices of the pieces whose homes meet `[a, b]`, widened by one piece
    /// on each side.
    fn pieces_near(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let start = |x: f64| self.pieces.partition_point(|p| (p.home.spans()[0].0 as f64) <= x * FULL as f64);
        start(a).saturating_sub(2)..(start(b) + 1).min(self.pieces.len())
    }

    /// `Δ(t)`; panics when no rule covers `t`.
    pub fn at(&self, t: f64) -> (f64, f64) {
        if let Some(&(_, r)) = self.exceptions.iter().find(|e| e.0 == t) {
            return (t - r, t + r);
        }
        if let Some(i) = self.piece_index(t) {
            return self.pieces[i].open;
        }
        let r = self.default_radius.unwrap_or_else(|| panic!("gauge undefined at {t}"));
        (t - r, t + r)
    }

    /// Is `set ⊆ Δ(t)`?
    pub fn admits(&self, t: f64, set: &MeasurableSet) -> bool {
        fits(self.at(t), set)
    }

    /// Is every cell inside the gauge value at its tag?
    pub fn is_fine(&self, tp: &TaggedPartition) -> bool {
        tp.pairs().all(|(c, t)| self.admits(t, c))
    }
}

// ---------------------------------------------------------------------------
// Cousin construction

struct CousinCell {
    cell: DyadicCell,
    piece: MeasurableSet,
    tag: f64,
}

fn candidate_tags(gauge: &Gauge, piece: &MeasurableSet, cell: DyadicCell, discipline: TagDiscipline) -> Vec<f64> {
    let mut c = vec![cell.midpoint(), piece.representative()];
    if let Some((a, _)) = piece.bounds() {
        c.push(a);
    }
    if let Some(&(_, b)) = piece.spans().last() {
        c.push(if b == FULL { 1.0 } else { to_point(b - 1) });
    }
    c.extend(gauge.exception_points());
    match discipline {
        TagDiscipline::Henstock | TagDiscipline::Univocal => c.retain(|&t| piece.contains(t)),
        TagDiscipline::McShane => {
            let near = piece.bounds().map_or(0..0, |(a, b)| gauge.pieces_near(a, b));
            c.extend(gauge.pieces[near].iter().map(|p| p.home.representative()));
        }
    }
    c
}

fn cousin_cells(
    gauge: &Gauge,
    domain: &MeasurableSet,
    discipline: TagDiscipline,
    max_depth: u32,
) -> Result<Vec<CousinCell>> {
    if !domain.is_dyadic() {
        return Err(Error::Unsupported("gauges live on the dyadic model".into()));
    }
    let max_depth = max_depth.min(RESOLUTION);
    let mut out = Vec::new();
    let mut stack = vec![DyadicCell::root()];
    while let Some(cell) = stack.pop() {
        let piece = cell.to_set().intersection(domain);
        if piece.is_empty() {
            continue;
        }
        if let Some(tag) = candidate_tags(gauge, &piece, cell, discipline).into_iter().find(|&t| gauge.admits(t, &piece)) {
            out.push(CousinCell { cell, piece, tag });
        } else if cell.depth >= max_depth {
            return Err(Error::GaugeTooFine { max_depth });
        } else {
            let [l, r] = cell.children();
            stack.push(r);
            stack.push(l);
        }
    }
    if discipline == TagDiscipline::Univocal {
        let mut seen = std::collections::HashSet::new();
        if !out.iter().all(|c| seen.insert(c.tag.to_bits())) {
            return Err(Error::InvalidPartition("Cousin tags collide under the univocal discipline".into()));
        }
    }
    Ok(out)
}

/// A finite Δ-fine tagged partition of `domain` by dyadic cells. Cells are
/// scanned left to right and bisected until the first admissible candidate
/// tag is found.
pub fn cousin_fine(
    gauge: &Gauge,
    domain: &MeasurableSet,
    discipline: TagDiscipline,
    max_depth: u32,
) -> Result<TaggedPartition> {
    let cells = cousin_cells(gauge, domain, discipline, max_depth)?;
    let tags = cells.iter().map(|c| c.tag).collect();
    let partition = Partition::new(domain.clone(), cells.into_iter().map(|c| c.piece).collect())?;
    TaggedPartition::new(partition, tags, discipline)
}

/// A truncated generalized Mc Shane partition of `domain`.
///
/// Without an accumulation point this is the Cousin partition (complement
/// mass 0). With one, the Cousin cell holding it is replaced by geometric
/// shells around the point; the shells are enumerated until the remainder has
/// `μ`-mass at most `null_tol`. Under the Mc Shane discipline the shells share
/// the tag of the cell they replace.
pub fn mcshane_generalized(
    gauge: &Gauge,
    domain: &MeasurableSet,
    null_tol: f64,
    discipline: TagDiscipline,
    accumulation: Option<f64>,
    mu: &SetFunction,
    max_depth: u32,
) -> Result<TaggedPartition> {
    if !(null_tol >= 0.0) {
        return Err(Error::InvalidConfig(format!("null tolerance must be non-negative, got {null_tol}")));
    }
    let mut cells = cousin_cells(gauge, domain, discipline, max_depth)?;
    let empty = domain.difference(domain);
    let split = accumulation.and_then(|x0| cells.iter().position(|c| c.piece.contains(x0)).map(|k| (x0, k)));
    let Some((x0, k)) = split else {
        let tags = cells.iter().map(|c| c.tag).collect();
        let p = Partition::truncated(domain.clone(), cells.into_iter().map(|c| c.piece).collect(), empty, "cousin")?;
        return TaggedPartition::new(p, tags, discipline);
    };
    let replaced = cells.remove(k);
    let generator = CountableGenerator::Geometric { x0 };
    let (shell_cells, core_cell) = generator.shells(replaced.cell);
    let core = core_cell.to_set().intersection(domain);
    let shells: Vec<MeasurableSet> =
        shell_cells.iter().map(|c| c.to_set().intersection(domain)).filter(|s| !s.is_empty()).collect();
    // remainder after j shells
    let mut remainder_mass = Vec::with_capacity(shells.len() + 1);
    let mut rest = core.clone();
    remainder_mass.push(mu.eval(&rest));
    for s in shells.iter().rev() {
        rest = rest.union(s);
        remainder_mass.push(mu.eval(&rest));
    }
    remainder_mass.reverse();
    let Some(j) = remainder_mass.iter().position(|&m| m <= null_tol) else {
        return Err(Error::TailMassNotSummable { mass: *remainder_mass.last().unwrap() });
    };
    let mut pieces: Vec<MeasurableSet> = cells.iter().map(|c| c.piece.clone()).collect();
    let mut tags: Vec<f64> = cells.iter().map(|c| c.tag).collect();
    for s in &shells[..j] {
        match discipline {
            TagDiscipline::McShane => {
                pieces.push(s.clone());
                tags.push(replaced.tag);
            }
            _ => {
                let sub = cousin_fine(gauge, s, discipline, max_depth)?;
                pieces.extend(sub.cells().iter().cloned());
                tags.extend_from_slice(sub.tags());
            }
        }
    }
    let tail = MeasurableSet::union_all(&core, shells[j..].iter());
    let p = Partition::truncated(domain.clone(), pieces, tail, format!("cousin+{}", generator.id()))?;
    let tp = TaggedPartition::new(p, tags, discipline)?;
    debug_assert!(gauge.is_fine(&tp));
    Ok(tp)
}

/// Merges the cells that share a tag; the result is univocal.
pub fn glue_univocal(tp: &TaggedPartition) -> Result<TaggedPartition> {
    let mut order: Vec<f64> = Vec::new();
    let mut groups: HashMap<u64, MeasurableSet> = HashMap::new();
    for (c, t) in tp.pairs() {
        groups
            .entry(t.to_bits())
            .and_modify(|g| *g = g.union(c))
            .or_insert_with(|| {
                order.push(t);
                c.clone()
            });
    }
    let cells: Vec<MeasurableSet> = order.iter().map(|t| groups.remove(&t.to_bits()).unwrap()).collect();
    let p = tp.partition();
    let partition = match p.tail() {
        Some(tail) => Partition::truncated(p.domain().clone(), cells, tail.clone(), p.generator().unwrap_or(""))?,
        None => Partition::new(p.domain().clone(), cells)?,
    };
    TaggedPartition::new(partition, order, TagDiscipline::Univocal)
}

// ---------------------------------------------------------------------------
// random Δ-fine partitions of a piecewise gauge

/// One cell of a sampled fine partition.
#[derive(Clone, Debug, PartialEq)]
pub struct FineCell {
    pub set: MeasurableSet,
    pub tag: f64,
    /// Index of the gauge piece the cell grew from.
    pub piece: usize,
}

fn largest_power_of_two_at_most(x: u64) -> u64 {
    if x == 0 {
        0
    } else {
        1 << (63 - x.leading_zeros())
    }
}

/// A random Δ-fine partition of the union of the gauge pieces.
///
/// Boundaries between touching pieces move by a random dyadic amount the
/// growing piece's open interval allows (at most a quarter of the donor).
/// Each resulting interval is cut into one to three cells. Henstock tags are
/// drawn inside each cell from a piece whose open interval covers it. Free
/// tags are drawn anywhere in the home piece, sometimes shared by all cells of
/// the piece.
pub fn sample_fine<R: Rng + ?Sized>(gauge: &Gauge, rng: &mut R, discipline: TagDiscipline) -> Result<Vec<FineCell>> {
    let pieces = &gauge.pieces;
    let homes: Vec<(u64, u64)> = pieces.iter().map(|p| p.home.spans()[0]).collect();
    let mut bounds = homes.clone();
    let num = |x: f64| x * FULL as f64;
    for i in 0..pieces.len().saturating_sub(1) {
        let b = bounds[i].1;
        if b != bounds[i + 1].0 {
            continue;
        }
        let grow_right = match rng.gen_range(0..3) {
            0 => continue,
            1 => true,
            _ => false,
        };
        let (limit, donor) = if grow_right {
            let h = num(pieces[i].open.1);
            (((h - b as f64).floor()).max(0.0) as u64, bounds[i + 1])
        } else {
            let l = num(pieces[i + 1].open.0);
            (((b as f64 - l).ceil() - 1.0).max(0.0) as u64, bounds[i])
        };
        let s = largest_power_of_two_at_most(limit.min((donor.1 - donor.0) / 4)) >> rng.gen_range(0..3);
        if s == 0 {
            continue;
        }
        if grow_right {
            bounds[i].1 += s;
            bounds[i + 1].0 += s;
        } else {
            bounds[i].1 -= s;
            bounds[i + 1].0 -= s;
        }
    }
    let mut out = Vec::new();
    for (i, &(a, b)) in bounds.iter().enumerate() {
        let q = rng.gen_range(1..=3u64).min(b - a);
        let mut cuts: Vec<u64> = Vec::new();
        while (cuts.len() as u64) < q - 1 {
            let c = rng.gen_range(a + 1..b);
            if !cuts.contains(&c) {
                cuts.push(c);
            }
        }
        cuts.sort_unstable();
        let edges: Vec<u64> = std::iter::once(a).chain(cuts).chain(std::iter::once(b)).collect();
        let home = &pieces[i].home;
        let shared = (discipline == TagDiscipline::McShane && rng.gen_bool(0.5)).then(|| home.sample_point(rng));
        for w in edges.windows(2) {
            let set = MeasurableSet::from_spans([(w[0], w[1])])?;
            let tag = match discipline {
                TagDiscipline::McShane => shared.unwrap_or_else(|| home.sample_point(rng)),
                TagDiscipline::Henstock | TagDiscipline::Univocal => {
                    let own = set.intersection(home);
                    if own.is_empty() {
                        set.sample_point(rng)
                    } else {
                        own.sample_point(rng)
                    }
                }
            };
            if !gauge.admits(tag, &set) {
                return Err(Error::InvalidPartition(format!("sampled cell {set} is not fine at tag {tag}")));
            }
            out.push(FineCell { set, tag, piece: i });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn t() -> MeasurableSet {
        MeasurableSet::unit_interval()
    }

    fn iv(a: f64, b: f64) -> MeasurableSet {
        MeasurableSet::interval(a, b).unwrap()
    }

    #[test]
    fn constant_gauge_cousin() {
        let g = Gauge::ball(0.1).unwrap();
        let tp = cousin_fine(&g, &t(), TagDiscipline::Henstock, 20).unwrap();
        assert_eq!(tp.len(), 8);
        assert!(tp.cells().iter().all(|c| c.length() == 0.125));
        for (c, tag) in tp.pairs() {
            let (a, b) = c.bounds().unwrap();
            assert_eq!(tag, (a + b) / 2.0);
        }
        assert!(g.is_fine(&tp));
        assert!(tp.is_univocal());
    }

    #[test]
    fn gauge_below_resolution_is_too_fine() {
        let g = Gauge::ball(2f64.powi(-11)).unwrap();
        assert!(matches!(cousin_fine(&g, &t(), TagDiscipline::Henstock, 10), Err(Error::GaugeTooFine { max_depth: 10 })));
    }

    #[test]
    fn exception_points_are_used_as_tags() {
        let g = Gauge::ball(0.1).unwrap().with_exception(1.0 / 3.0, 1e-3).unwrap();
        let tp = cousin_fine(&g, &t(), TagDiscipline::Henstock, 30).unwrap();
        assert!(g.is_fine(&tp));
        assert!(tp.pairs().all(|(c, t)| c.contains(t)));
    }

    #[test]
    fn lebesgue_mcshane_covers_fully() {
        let g = Gauge::ball(0.1).unwrap();
        let l = SetFunction::lebesgue();
        let tp = mcshane_generalized(&g, &t(), 0.0, TagDiscipline::Henstock, None, &l, 20).unwrap();
        assert!(tp.partition().tail().unwrap().is_empty());
    }

    #[test]
    fn complement_shrinks_with_the_null_tolerance() {
        let g = Gauge::ball(0.1).unwrap().with_exception(1.0 / 3.0, 1e-4).unwrap();
        let l = SetFunction::lebesgue();
        let mut last = f64::INFINITY;
        let mut lens = vec![];
        for tol in [1e-2, 1e-4, 1e-6, 1e-8] {
            let tp = mcshane_generalized(&g, &t(), tol, TagDiscipline::McShane, Some(1.0 / 3.0), &l, 30).unwrap();
            let tail = l.eval(tp.partition().tail().unwrap());
            assert!(tail <= tol && tail <= last);
            assert!(g.is_fine(&tp));
            last = tail;
            lens.push(tp.len());
        }
        assert!(lens.windows(2).all(|w| w[0] < w[1]));
        let d = SetFunction::dirac(1.0 / 3.0, 2.0).unwrap();
        assert!(matches!(
            mcshane_generalized(&g, &t(), 1e-3, TagDiscipline::McShane, Some(1.0 / 3.0), &d, 30),
            Err(Error::TailMassNotSummable { .. })
        ));
    }

    #[test]
    fn gluing_shared_tags() {
        let g = Gauge::ball(0.1).unwrap();
        let l = SetFunction::lebesgue();
        let tp = mcshane_generalized(&g, &t(), 1e-6, TagDiscipline::McShane, Some(1.0 / 3.0), &l, 30).unwrap();
        assert!(!tp.is_univocal());
        let glued = glue_univocal(&tp).unwrap();
        assert!(glued.is_univocal());
        assert!(g.is_fine(&glued));
        assert_eq!(glued.partition().tail(), tp.partition().tail());
    }

    #[test]
    fn sampled_partitions_are_fine_and_tile() {
        let pieces = vec![
            GaugePiece { home: iv(0.0, 0.5), open: (-0.01, 0.6), label: 0 },
            GaugePiece { home: iv(0.5, 0.75), open: (0.45, 0.8), label: 1 },
            GaugePiece { home: iv(0.75, 1.0), open: (0.7, 1.1), label: 2 },
        ];
        let g = Gauge::piecewise(pieces, None).unwrap();
        let mut r = rng::stream(5, "fine");
        for k in 0..200 {
            let d = if k % 2 == 0 { TagDiscipline::Henstock } else { TagDiscipline::McShane };
            let cells = sample_fine(&g, &mut r, d).unwrap();
            let sets: Vec<MeasurableSet> = cells.iter().map(|c| c.set.clone()).collect();
            assert!(Partition::new(t(), sets).is_ok());
            for c in &cells {
                assert!(g.admits(c.tag, &c.set));
                if d == TagDiscipline::Henstock {
                    assert!(c.set.contains(c.tag));
                }
            }
        }
    }

    #[test]
    fn piecewise_validation() {
        let bad = vec![GaugePiece { home: iv(0.0, 0.5), open: (0.0, 0.6), label: 0 }];
        assert!(Gauge::piecewise(bad, None).is_err());
        let last = vec![GaugePiece { home: iv(0.5, 1.0), open: (0.4, 1.0), label: 0 }];
        assert!(Gauge::piecewise(last, None).is_err());
    }
}
