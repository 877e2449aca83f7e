//! Variation, atoms and structural classification of set functions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::measure::{Property, PropertyFlags, SetFunction};
use super::psi::PsiFunction;
use super::sets::{DyadicCell, MeasurableSet, SpaceModel, FULL, RESOLUTION};
use crate::error::{Error, Result};
use crate::partitions::{random_refinement, Partition};
use crate::rng;
use crate::trend::blows_up;

/// Values at or below this count as zero.
pub const ZERO_TOL: f64 = 1e-12;
/// Largest set handled by the exact finite enumerations.
pub const FINITE_EXACT_MAX: usize = 12;
/// Depth of the cells used as stand-ins for points.
const POINT_DEPTH: u32 = 46;
/// Threshold for deep-cell masses and chain limits.
const LIMIT_TOL: f64 = 1e-9;
/// Mass ratio between resolution and half-resolution cells below which point masses count as absent.
const DECAY: f64 = 1e-3;

fn is_null(v: f64) -> bool {
    v <= ZERO_TOL
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= ZERO_TOL * (1.0 + a.abs().max(b.abs()))
}

/// Sets and values that refute a property.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct Witness {
    pub sets: Vec<MeasurableSet>,
    pub values: Vec<f64>,
    pub note: String,
}

impl Witness {
    fn new(mu: &SetFunction, sets: Vec<MeasurableSet>, note: impl Into<String>) -> Self {
        let values = sets.iter().map(|s| mu.eval(s)).collect();
        Self { sets, values, note: note.into() }
    }
}

// ---------------------------------------------------------------------------
// finite spaces: exhaustive checks

fn finite_table(mu: &SetFunction) -> (u32, Vec<f64>) {
    let SpaceModel::FiniteSpace { n } = mu.space() else { panic!("finite table of a dyadic set function") };
    let n = n as u32;
    let vals = (0..1u64 << n).map(|m| mu.eval(&MeasurableSet::Finite { mask: m, n })).collect();
    (n, vals)
}

fn fset(n: u32, mask: u64) -> MeasurableSet {
    MeasurableSet::Finite { mask, n }
}

/// Sub-masks of `m`, including `0` and `m`.
fn submasks(m: u64) -> impl Iterator<Item = u64> {
    let mut s = Some(m);
    std::iter::from_fn(move || {
        let cur = s?;
        s = if cur == 0 { None } else { Some((cur - 1) & m) };
        Some(cur)
    })
}

fn finite_check(mu: &SetFunction, p: Property) -> Option<Witness> {
    let (n, v) = finite_table(mu);
    let full = (1u64 << n) - 1;
    let nulls: Vec<u64> = (0..=full).filter(|&m| is_null(v[m as usize])).collect();
    match p {
        Property::FinitelyAdditive | Property::CountablyAdditive => {
            for a in 0..=full {
                for b in submasks(full & !a) {
                    if !close(v[(a | b) as usize], v[a as usize] + v[b as usize]) {
                        return Some(Witness::new(mu, vec![fset(n, a), fset(n, b)], "μ(A∪B) ≠ μ(A) + μ(B)"));
                    }
                }
            }
            None
        }
        Property::Monotone => {
            for b in 0..=full {
                for a in submasks(b) {
                    if v[a as usize] > v[b as usize] + ZERO_TOL {
                        return Some(Witness::new(mu, vec![fset(n, a), fset(n, b)], "A ⊆ B but μ(A) > μ(B)"));
                    }
                }
            }
            None
        }
        Property::NullAdditive => {
            for a in 0..=full {
                for &b in &nulls {
                    if !close(v[(a | b) as usize], v[a as usize]) {
                        return Some(Witness::new(mu, vec![fset(n, a), fset(n, b)], "μ(B) = 0 but μ(A∪B) ≠ μ(A)"));
                    }
                }
            }
            None
        }
        Property::NullNullAdditive | Property::SigmaNullNullAdditive => {
            for &a in &nulls {
                for &b in &nulls {
                    if !is_null(v[(a | b) as usize]) {
                        return Some(Witness::new(mu, vec![fset(n, a), fset(n, b)], "null sets with a non-null union"));
                    }
                }
            }
            None
        }
        Property::ContinuousFromBelow => None,
        Property::PointwiseNonAtomic => (0..n)
            .find(|&i| !is_null(v[1 << i]))
            .map(|i| Witness::new(mu, vec![fset(n, 1 << i)], "a singleton with positive mass")),
        Property::FinitelyPurelyAtomic => {
            let atom: Vec<bool> = (0..=full).map(|a| finite_atom_witness(&v, a).is_ok()).collect();
            let mut ok = vec![false; (full + 1) as usize];
            ok[0] = true;
            for s in 1..=full {
                let low = s & s.wrapping_neg();
                ok[s as usize] = submasks(s).any(|a| a & low != 0 && atom[a as usize] && ok[(s & !a) as usize]);
            }
            (!ok[full as usize]).then(|| Witness::new(mu, vec![fset(n, full)], "T is not a finite disjoint union of atoms"))
        }
    }
}

/// `Ok(())` when `a` is an atom of the table `v`; otherwise the splitting subset (or `None` for a null set).
fn finite_atom_witness(v: &[f64], a: u64) -> std::result::Result<(), Option<u64>> {
    if is_null(v[a as usize]) {
        return Err(None);
    }
    match submasks(a).find(|&b| !is_null(v[b as usize]) && !is_null(v[(a & !b) as usize])) {
        Some(b) => Err(Some(b)),
        None => Ok(()),
    }
}

/// Exact structural flags of a set function on a finite space.
pub fn exact_finite_flags(mu: &SetFunction) -> PropertyFlags {
    let mut f = PropertyFlags::default();
    for p in Property::ALL {
        f.set(p, finite_check(mu, p).is_none());
    }
    f
}

// ---------------------------------------------------------------------------
// variation

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VariationResult {
    pub value: f64,
    pub diverging: bool,
    /// Depth cap the value is relative to (`None` for exact finite results).
    pub depth_cap: Option<u32>,
    /// Variation restricted to cells of depth at most `m`, for increasing `m`.
    pub sequence: Vec<f64>,
}

/// Supremum of `Σ μ(A_i)` over disjoint families `A_i ⊆ E`.
///
/// Exact on finite spaces (`|E| ≤ 12`); on the dyadic model the families are
/// made of `E` itself and dyadic cells of depth at most `depth_cap`.
pub fn variation(mu: &SetFunction, set: &MeasurableSet, depth_cap: u32) -> Result<VariationResult> {
    if !mu.space().admits(set) {
        return Err(Error::SpaceMismatch);
    }
    match set {
        MeasurableSet::Finite { n, mask } => {
            let pts = set.points();
            if pts.len() > FINITE_EXACT_MAX {
                return Err(Error::TooLarge { n: pts.len(), max: FINITE_EXACT_MAX });
            }
            let _ = mask;
            let k = pts.len();
            let lift = |sub: u64| -> u64 {
                (0..k).filter(|i| sub >> i & 1 == 1).fold(0u64, |m, i| m | 1 << pts[i])
            };
            let val: Vec<f64> = (0..1u64 << k).map(|s| mu.eval(&fset(*n, lift(s)))).collect();
            let mut best = vec![0.0f64; 1 << k];
            for s in 1..(1u64 << k) {
                let low = s & s.wrapping_neg();
                let mut b = best[(s & !low) as usize];
                for a in submasks(s) {
                    if a & low != 0 {
                        b = b.max(val[a as usize] + best[(s & !a) as usize]);
                    }
                }
                best[s as usize] = b;
            }
            let value = best[(1u64 << k) as usize - 1];
            Ok(VariationResult { value, diverging: false, depth_cap: None, sequence: vec![value] })
        }
        MeasurableSet::Dyadic(_) => {
            let cells = set.cells();
            let whole = mu.eval(set);
            let first = set.finest_depth();
            let cap = depth_cap.max(first).min(RESOLUTION);
            let mut sequence = Vec::new();
            for m in first..=cap {
                let v = cells.iter().map(|c| cell_variation(mu, *c, m)).sum::<f64>().max(whole);
                sequence.push(v);
                if blows_up(&sequence, super::psi::DIVERGENCE_THRESHOLD, ZERO_TOL) {
                    return Ok(VariationResult { value: v, diverging: true, depth_cap: Some(m), sequence });
                }
            }
            let value = *sequence.last().unwrap();
            Ok(VariationResult { value, diverging: false, depth_cap: Some(cap), sequence })
        }
    }
}

fn cell_variation(mu: &SetFunction, c: DyadicCell, m: u32) -> f64 {
    let own = mu.eval(&c.to_set());
    if c.depth >= m {
        return own;
    }
    let [l, r] = c.children();
    own.max(cell_variation(mu, l, m) + cell_variation(mu, r, m))
}

// ---------------------------------------------------------------------------
// atoms

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AtomCheck {
    pub atom: bool,
    /// Depth cap the dyadic verdict is relative to (`None` for exact finite checks).
    pub depth_cap: Option<u32>,
    /// A subset `B` with `μ(B) > 0` and `μ(A∖B) > 0`, when one was found.
    pub witness: Option<MeasurableSet>,
    pub note: String,
}

/// Is `A` an atom: `μ(A) > 0` and every `B ⊆ A` has `μ(B) = 0` or `μ(A∖B) = 0`?
pub fn is_atom(mu: &SetFunction, set: &MeasurableSet, depth_cap: u32) -> Result<AtomCheck> {
    if !mu.space().admits(set) {
        return Err(Error::SpaceMismatch);
    }
    if is_null(mu.eval(set)) {
        return Ok(AtomCheck { atom: false, depth_cap: None, witness: None, note: "μ(A) = 0".into() });
    }
    match set {
        MeasurableSet::Finite { n, mask } => {
            if set.count() > 20 {
                return Err(Error::TooLarge { n: set.count(), max: 20 });
            }
            let b = submasks(*mask).find(|&b| {
                !is_null(mu.eval(&fset(*n, b))) && !is_null(mu.eval(&fset(*n, mask & !b)))
            });
            Ok(AtomCheck {
                atom: b.is_none(),
                depth_cap: None,
                witness: b.map(|b| fset(*n, b)),
                note: "all subsets enumerated".into(),
            })
        }
        MeasurableSet::Dyadic(_) => {
            let cap = depth_cap.min(RESOLUTION);
            for m in set.finest_depth()..=cap.max(set.finest_depth()) {
                for piece in set.split_at_depth(m) {
                    if !is_null(mu.eval(&piece)) && !is_null(mu.eval(&set.difference(&piece))) {
                        return Ok(AtomCheck {
                            atom: false,
                            depth_cap: Some(m),
                            witness: Some(piece),
                            note: format!("split by a depth-{m} cell"),
                        });
                    }
                }
            }
            Ok(AtomCheck {
                atom: true,
                depth_cap: Some(cap),
                witness: None,
                note: format!("no splitting dyadic subset down to depth {cap}"),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// classification

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Evidence {
    /// Every instance was enumerated.
    Exhaustive,
    /// Random and canonical probes found no counterexample.
    Sampled,
    /// The property is not examined on this space model.
    NotApplicable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyCheck {
    pub property: Property,
    pub declared: bool,
    /// `None` when not applicable.
    pub observed: Option<bool>,
    pub evidence: Evidence,
    pub witness: Option<Witness>,
}

impl PropertyCheck {
    pub fn consistent(&self) -> bool {
        self.observed.is_none_or(|o| o == self.declared)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyReport {
    pub set_function: String,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn consistent(&self) -> bool {
        self.checks.iter().all(PropertyCheck::consistent)
    }

    pub fn check(&self, p: Property) -> &PropertyCheck {
        self.checks.iter().find(|c| c.property == p).expect("every property is checked")
    }
}

/// A random union of one to four dyadic cells of depth at most `max_depth`.
pub fn random_dyadic_set<R: Rng + ?Sized>(rng: &mut R, max_depth: u32) -> MeasurableSet {
    let k = rng.gen_range(1..=4);
    let cells: Vec<DyadicCell> = (0..k)
        .map(|_| {
            let d = rng.gen_range(1..=max_depth);
            DyadicCell { depth: d, index: rng.gen_range(0..1u64 << d) }
        })
        .collect();
    MeasurableSet::from_cells(&cells).expect("valid cells")
}

fn random_set<R: Rng + ?Sized>(space: SpaceModel, rng: &mut R) -> MeasurableSet {
    match space {
        SpaceModel::DyadicUnitInterval { .. } => random_dyadic_set(rng, 6),
        SpaceModel::FiniteSpace { n } => fset(n as u32, rng.gen_range(0..1u64 << n)),
    }
}

/// Tests every flag against random and canonical probes. Finite spaces with
/// `n ≤ 12` are enumerated exhaustively instead.
pub fn classify(mu: &SetFunction, trials: usize, seed: u64) -> PropertyReport {
    let declared = mu.declared();
    let mut rng = rng::stream(seed, &format!("classify:{}", mu.id()));
    let checks = Property::ALL
        .iter()
        .map(|&p| {
            let (observed, evidence, witness) = match mu.space() {
                SpaceModel::FiniteSpace { n } if n <= FINITE_EXACT_MAX => {
                    let w = finite_check(mu, p);
                    (Some(w.is_none()), Evidence::Exhaustive, w)
                }
                _ if p == Property::FinitelyPurelyAtomic => (None, Evidence::NotApplicable, None),
                _ => {
                    let w = sampled_check(mu, p, trials.max(1), &mut rng);
                    (Some(w.is_none()), Evidence::Sampled, w)
                }
            };
            PropertyCheck { property: p, declared: declared.get(p), observed, evidence, witness }
        })
        .collect();
    PropertyReport { set_function: mu.id().to_string(), trials, seed, checks }
}

fn null_sets<R: Rng + ?Sized>(mu: &SetFunction, rng: &mut R, wanted: usize) -> Vec<MeasurableSet> {
    let space = mu.space();
    let mut out = vec![space.empty()];
    for _ in 0..20 * wanted {
        if out.len() > wanted {
            break;
        }
        let s = match space {
            SpaceModel::DyadicUnitInterval { .. } => random_dyadic_set(rng, 10),
            _ => random_set(space, rng),
        };
        if is_null(mu.eval(&s)) {
            out.push(s);
        }
    }
    out
}

/// A dyadic point `x0 ∈ (0, 1]` and a depth `n0` with `x0 - 2^-n0 ≥ 0`.
fn random_accumulation<R: Rng + ?Sized>(rng: &mut R) -> (u64, u32) {
    let d = rng.gen_range(1..=8u32);
    let w = FULL >> d;
    let x0 = rng.gen_range(1..=1u64 << d) * w;
    let n0 = rng.gen_range(d..=d + 4);
    (x0, n0)
}

fn span(a: u64, b: u64) -> MeasurableSet {
    MeasurableSet::from_spans([(a, b)]).expect("valid span")
}

fn sampled_check<R: Rng + ?Sized>(mu: &SetFunction, p: Property, trials: usize, rng: &mut R) -> Option<Witness> {
    let space = mu.space();
    let full = space.full();
    let probes_pair: Vec<(MeasurableSet, MeasurableSet)> = match space {
        SpaceModel::DyadicUnitInterval { .. } => {
            let h = MeasurableSet::interval(0.0, 0.5).unwrap();
            vec![(h.clone(), full.difference(&h))]
        }
        SpaceModel::FiniteSpace { n } => {
            vec![(fset(n as u32, 1), full.difference(&fset(n as u32, 1)))]
        }
    };
    let random_pair = |rng: &mut R| (random_set(space, rng), random_set(space, rng));
    match p {
        Property::FinitelyAdditive => {
            let pairs = probes_pair.into_iter().chain((0..trials).map(|_| {
                let (a, b) = random_pair(rng);
                let b = b.difference(&a);
                (a, b)
            }));
            for (a, b) in pairs {
                if !close(mu.eval(&a.union(&b)), mu.eval(&a) + mu.eval(&b)) {
                    return Some(Witness::new(mu, vec![a, b], "disjoint A, B with μ(A∪B) ≠ μ(A) + μ(B)"));
                }
            }
            None
        }
        Property::CountablyAdditive => {
            if let Some(w) = sampled_check(mu, Property::FinitelyAdditive, trials, rng) {
                return Some(w);
            }
            if !space.is_dyadic() {
                return None;
            }
            for _ in 0..trials {
                let (x0, n0) = random_accumulation(rng);
                let union = span(x0 - (FULL >> n0), x0);
                let shells: Vec<MeasurableSet> =
                    (n0..POINT_DEPTH).map(|n| span(x0 - (FULL >> n), x0 - (FULL >> (n + 1)))).collect();
                let tail = span(x0 - (FULL >> POINT_DEPTH), x0);
                let total: f64 = shells.iter().map(|s| mu.eval(s)).sum();
                let rest = mu.eval(&tail);
                if (mu.eval(&union) - total).abs() > rest + ZERO_TOL * (1.0 + total) || rest > LIMIT_TOL {
                    return Some(Witness::new(
                        mu,
                        vec![union, shells[0].clone(), tail],
                        format!("μ(∪ shells) ≠ Σ μ(shell) for shells accumulating at {}", x0 as f64 / FULL as f64),
                    ));
                }
            }
            None
        }
        Property::Monotone => {
            for _ in 0..trials {
                let (a, b) = random_pair(rng);
                let i = a.intersection(&b);
                let u = a.union(&b);
                if mu.eval(&i) > mu.eval(&a) + ZERO_TOL {
                    return Some(Witness::new(mu, vec![i, a], "A ⊆ B but μ(A) > μ(B)"));
                }
                if mu.eval(&a) > mu.eval(&u) + ZERO_TOL {
                    return Some(Witness::new(mu, vec![a, u], "A ⊆ B but μ(A) > μ(B)"));
                }
            }
            None
        }
        Property::NullAdditive => {
            let nulls = null_sets(mu, rng, 8);
            for _ in 0..trials {
                let a = random_set(space, rng);
                for b in &nulls {
                    if !close(mu.eval(&a.union(b)), mu.eval(&a)) {
                        return Some(Witness::new(mu, vec![a, b.clone()], "μ(B) = 0 but μ(A∪B) ≠ μ(A)"));
                    }
                }
            }
            None
        }
        Property::NullNullAdditive => {
            let nulls = null_sets(mu, rng, trials.min(64));
            for a in &nulls {
                for b in &nulls {
                    if !is_null(mu.eval(&a.union(b))) {
                        return Some(Witness::new(mu, vec![a.clone(), b.clone()], "null sets with a non-null union"));
                    }
                }
            }
            None
        }
        Property::SigmaNullNullAdditive => {
            let nulls = null_sets(mu, rng, 30);
            let all = MeasurableSet::union_all(&space.empty(), &nulls);
            if !is_null(mu.eval(&all)) {
                return Some(Witness::new(mu, vec![all], "a union of null sets is not null"));
            }
            if !space.is_dyadic() {
                return None;
            }
            for _ in 0..trials {
                let (x0, n0) = random_accumulation(rng);
                let all_null = (n0..RESOLUTION)
                    .all(|n| is_null(mu.eval(&span(x0 - (FULL >> n), x0 - (FULL >> (n + 1))))));
                let union = span(x0 - (FULL >> n0), x0);
                if all_null && !is_null(mu.eval(&union)) {
                    return Some(Witness::new(mu, vec![union], "null shells with a non-null union"));
                }
            }
            None
        }
        Property::ContinuousFromBelow => {
            if !space.is_dyadic() {
                return None;
            }
            for _ in 0..trials {
                let (x0, n0) = random_accumulation(rng);
                let b = random_set(space, rng);
                let a = x0 - (FULL >> n0);
                let limit = b.union(&span(a, x0));
                let chain: Vec<f64> =
                    (n0 + 1..=POINT_DEPTH).map(|k| mu.eval(&b.union(&span(a, x0 - (FULL >> k))))).collect();
                let increasing = chain.windows(2).all(|w| w[1] >= w[0] - ZERO_TOL);
                let last = *chain.last().unwrap();
                if !increasing || (mu.eval(&limit) - last).abs() > LIMIT_TOL {
                    return Some(Witness::new(
                        mu,
                        vec![b.union(&span(a, x0 - (FULL >> POINT_DEPTH))), limit],
                        "μ(A_k) does not tend to μ(∪ A_k)",
                    ));
                }
            }
            None
        }
        Property::PointwiseNonAtomic => match space {
            SpaceModel::FiniteSpace { n } => (0..n)
                .map(|i| fset(n as u32, 1 << i))
                .find(|s| !is_null(mu.eval(s)))
                .map(|s| Witness::new(mu, vec![s], "a singleton with positive mass")),
            SpaceModel::DyadicUnitInterval { .. } => {
                if let Ok(AtomCheck { atom: true, .. }) = is_atom(mu, &full, 10) {
                    return Some(Witness::new(mu, vec![full], "T is an atom up to depth 10"));
                }
                let probes = [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0];
                let points: Vec<f64> =
                    probes.into_iter().chain((0..trials).map(|_| rng.gen_range(0.0..=1.0))).collect();
                // μ({x}) > 0 shows as cell masses that stop decaying towards the resolution
                for x in points {
                    let mid = DyadicCell::containing(x, RESOLUTION / 2).to_set();
                    let deep = DyadicCell::containing(x, RESOLUTION).to_set();
                    let (m_mid, m_deep) = (mu.eval(&mid), mu.eval(&deep));
                    if m_deep > LIMIT_TOL && m_deep > DECAY * m_mid {
                        return Some(Witness::new(mu, vec![mid, deep], format!("cells shrinking to {x} keep their mass")));
                    }
                }
                None
            }
        },
        Property::FinitelyPurelyAtomic => None,
    }
}

// ---------------------------------------------------------------------------
// ε-approximated partitions and the Henstock residual

/// Number of random refinements checked by [`eps_approx_partition`].
pub const REFINEMENT_CHECKS: usize = 100;

/// The coarsest chain partition `P` of `T` such that `|Ψ(T) - Σ μ(C)| ≤ eps`
/// for `P` and for [`REFINEMENT_CHECKS`] random refinements of `P`.
pub fn eps_approx_partition(mu: &SetFunction, psi: &PsiFunction, eps: f64, seed: u64) -> Result<Partition> {
    eps_approx_partition_on(mu, psi, &mu.space().full(), eps, seed)
}

/// [`eps_approx_partition`] for the restriction of `μ` to `A`.
pub fn eps_approx_partition_on(
    mu: &SetFunction,
    psi: &PsiFunction,
    set: &MeasurableSet,
    eps: f64,
    seed: u64,
) -> Result<Partition> {
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig(format!("eps must be positive, got {eps}")));
    }
    let target = psi.eval(set);
    let mut rng = rng::stream(seed, &format!("eps-partition:{}", mu.id()));
    let levels = match set {
        MeasurableSet::Dyadic(_) => RESOLUTION.min(psi.depth_cap().max(set.finest_depth()) + 8),
        MeasurableSet::Finite { .. } => set.count().saturating_sub(1) as u32,
    };
    for m in 0..=levels {
        let p = Partition::chain_level(set, m)?;
        let sum = |p: &Partition| p.cells().iter().map(|c| mu.eval(c)).sum::<f64>();
        if (target - sum(&p)).abs() > eps {
            continue;
        }
        let ok = (0..REFINEMENT_CHECKS).all(|_| {
            let q = random_refinement(&p, &mut rng, 3);
            (target - sum(&q)).abs() <= eps
        });
        if ok {
            return Ok(p);
        }
    }
    Err(Error::NotIntegrable(format!("{}: no {eps}-approximated chain partition found", mu.id())))
}

/// `Σ_i |Ψ(C_i ∩ A) - μ(C_i ∩ A)|` over the parts of `P`.
pub fn henstock_residual(mu: &SetFunction, psi: &PsiFunction, partition: &Partition, set: &MeasurableSet) -> f64 {
    partition
        .parts()
        .map(|c| {
            let piece = c.intersection(set);
            (psi.eval(&piece) - mu.eval(&piece)).abs()
        })
        .sum()
}

// ---------------------------------------------------------------------------
// atom collapse

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "outcome", rename_all = "camelCase")]
pub enum CollapseOutcome {
    /// Exactly one part carries `μ(A)`; all others carry exactly 0.
    Verified { carrier: usize },
    Failed { reason: String },
    Skipped { reason: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CollapseReport {
    pub outcome: CollapseOutcome,
    pub mass: f64,
    /// `μ` of each part, the tail last for truncated countable partitions.
    pub part_masses: Vec<f64>,
    /// Variation of `μ` on `A` (should equal `μ(A)`).
    pub variation: Option<f64>,
}

/// Checks that a partition of the atom `A` puts all of `μ(A)` on one part.
pub fn check_atom_collapse(
    mu: &SetFunction,
    set: &MeasurableSet,
    partition: &Partition,
    depth_cap: u32,
) -> Result<CollapseReport> {
    let d = mu.declared();
    let skipped = |reason: String| CollapseReport {
        outcome: CollapseOutcome::Skipped { reason },
        mass: mu.eval(set),
        part_masses: vec![],
        variation: None,
    };
    if !(d.null_additive && d.monotone) {
        return Ok(skipped("μ is not declared null-additive and monotone".into()));
    }
    if partition.tail().is_some() && !d.sigma_null_null_additive {
        return Ok(skipped("countable partition but μ is not declared σ-null-null-additive".into()));
    }
    if partition.domain() != set {
        return Err(Error::InvalidPartition(format!("partition of {} used for {set}", partition.domain())));
    }
    let atom = is_atom(mu, set, depth_cap)?;
    if !atom.atom {
        return Ok(skipped(format!("A is not an atom ({})", atom.note)));
    }
    let mass = mu.eval(set);
    let part_masses: Vec<f64> = partition.parts().map(|c| mu.eval(c)).collect();
    let carriers: Vec<usize> = (0..part_masses.len()).filter(|&i| (part_masses[i] - mass).abs() <= ZERO_TOL).collect();
    let zeros = part_masses.iter().filter(|&&m| m == 0.0).count();
    let var = variation(mu, set, depth_cap.min(12))?;
    let outcome = if carriers.len() != 1 || zeros + 1 != part_masses.len() {
        CollapseOutcome::Failed {
            reason: format!("{} parts carry μ(A), {} parts are exactly null", carriers.len(), zeros),
        }
    } else if (var.value - mass).abs() > ZERO_TOL {
        CollapseOutcome::Failed { reason: format!("variation {} differs from μ(A) = {mass}", var.value) }
    } else {
        CollapseOutcome::Verified { carrier: carriers[0] }
    };
    Ok(CollapseReport { outcome, mass, part_masses, variation: Some(var.value) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::measure::MeasureSpec;

    fn l_plus_l2() -> SetFunction {
        SetFunction::from_spec(
            "l+l2",
            MeasureSpec::Sum { terms: vec![MeasureSpec::Lebesgue, MeasureSpec::LebesguePower { exponent: 2.0, scale: 1.0 }] },
        )
        .unwrap()
    }

    /// Brute-force variation over all disjoint families of depth-`m` cells.
    fn variation_oracle(mu: &SetFunction, m: u32) -> f64 {
        // every disjoint family of dyadic cells of depth ≤ m is a set of nodes of
        // the binary tree with no ancestor relation; enumerate antichains recursively
        fn best(mu: &SetFunction, c: DyadicCell, m: u32) -> Vec<f64> {
            // all achievable sums inside c (including the empty family)
            let own = mu.eval(&c.to_set());
            if c.depth == m {
                return vec![0.0, own];
            }
            let [l, r] = c.children();
            let (a, b) = (best(mu, l, m), best(mu, r, m));
            let mut out = vec![own];
            for x in &a {
                for y in &b {
                    out.push(x + y);
                }
            }
            out
        }
        best(mu, DyadicCell::root(), m).into_iter().fold(0.0, f64::max)
    }

    #[test]
    fn variation_examples() {
        let t = MeasurableSet::unit_interval();
        assert_eq!(variation(&SetFunction::lebesgue(), &t, 10).unwrap().value, 1.0);
        let sq = SetFunction::lebesgue_power(2.0).unwrap();
        assert_eq!(variation(&sq, &t, 6).unwrap().value, 1.0);
        let root = SetFunction::lebesgue_power(0.5).unwrap();
        let v = variation(&root, &t, 20).unwrap();
        assert!(v.diverging);
        for (m, s) in v.sequence.iter().enumerate() {
            assert!((s - 2f64.powf(m as f64 / 2.0)).abs() < 1e-9);
        }
        for m in 1..=3 {
            let v = variation(&root, &t, m).unwrap();
            assert!((v.value - variation_oracle(&root, m)).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_variation_is_exact() {
        // subadditive: singletons win
        let mu = SetFunction::finite_power(&[1.0, 1.0, 1.0], 0.5).unwrap();
        let v = variation(&mu, &mu.space().full(), 0).unwrap();
        assert!((v.value - 3.0).abs() < 1e-12);
        // superadditive: the whole set wins
        let mu = SetFunction::finite_power(&[1.0, 1.0, 1.0], 2.0).unwrap();
        assert_eq!(variation(&mu, &mu.space().full(), 0).unwrap().value, 9.0);
    }

    #[test]
    fn variation_is_monotone_in_the_set() {
        let mu = SetFunction::lebesgue_power(0.5).unwrap();
        let a = MeasurableSet::interval(0.0, 0.25).unwrap();
        let b = MeasurableSet::interval(0.0, 0.5).unwrap();
        assert!(variation(&mu, &a, 8).unwrap().value <= variation(&mu, &b, 8).unwrap().value);
    }

    #[test]
    fn atoms() {
        let two_point = SetFunction::finite_weights(&[1.0, 0.0]).unwrap();
        assert!(is_atom(&two_point, &two_point.space().full(), 0).unwrap().atom);
        let d = SetFunction::dirac(1.0 / 3.0, 2.0).unwrap();
        let c = is_atom(&d, &MeasurableSet::unit_interval(), 8).unwrap();
        assert!(c.atom);
        assert_eq!(c.depth_cap, Some(8));
        let l = SetFunction::lebesgue();
        let c = is_atom(&l, &MeasurableSet::interval(0.25, 0.5).unwrap(), 8).unwrap();
        assert!(!c.atom && c.witness.is_some());
    }

    #[test]
    fn classify_examples() {
        let r = classify(&SetFunction::lebesgue(), 50, 1);
        assert!(r.consistent(), "{r:?}");
        assert!(r.checks.iter().all(|c| c.observed != Some(false)));

        let sq = SetFunction::lebesgue_power(2.0).unwrap();
        let r = classify(&sq, 50, 1);
        let fa = r.check(Property::FinitelyAdditive);
        assert_eq!(fa.observed, Some(false));
        let w = fa.witness.as_ref().unwrap();
        assert_eq!(w.sets[0], MeasurableSet::interval(0.0, 0.5).unwrap());
        assert_eq!(w.values, vec![0.25, 0.25]);
        assert_eq!(r.check(Property::NullAdditive).observed, Some(true));
        assert!(r.consistent(), "{r:?}");

        let d = SetFunction::dirac(1.0 / 3.0, 2.0).unwrap();
        let r = classify(&d, 50, 1);
        assert_eq!(r.check(Property::CountablyAdditive).observed, Some(true));
        let pna = r.check(Property::PointwiseNonAtomic);
        assert_eq!(pna.observed, Some(false));
        assert_eq!(pna.witness.as_ref().unwrap().sets[0], MeasurableSet::unit_interval());
        assert!(r.consistent(), "{r:?}");

        for mu in [SetFunction::lebesgue_power(0.5).unwrap(), l_plus_l2()] {
            let r = classify(&mu, 50, 2);
            assert!(r.consistent(), "{r:?}");
        }
    }

    #[test]
    fn finite_classification_is_exhaustive() {
        let mu = SetFunction::finite_table(&[0.0, 1.0, 1.0, 1.0]).unwrap();
        let r = classify(&mu, 1, 0);
        assert!(r.checks.iter().all(|c| c.evidence == Evidence::Exhaustive));
        assert_eq!(r.check(Property::FinitelyAdditive).observed, Some(false));
        assert_eq!(r.check(Property::Monotone).observed, Some(true));
    }

    #[test]
    fn eps_partition_and_residual() {
        let mu = l_plus_l2();
        let psi = PsiFunction::build(&mu, 1e-9, 20).unwrap();
        let p = eps_approx_partition(&mu, &psi, 0.01, 3).unwrap();
        assert_eq!(p.cells().len(), 128);
        let t = MeasurableSet::unit_interval();
        for m in 0..10 {
            let p = Partition::chain_level(&t, m).unwrap();
            let r = henstock_residual(&mu, &psi, &p, &t);
            assert!((r - 2f64.powi(-(m as i32))).abs() < 1e-12, "{m}: {r}");
        }
        let l = SetFunction::lebesgue();
        let psi_l = PsiFunction::build(&l, 1e-9, 20).unwrap();
        assert_eq!(eps_approx_partition(&l, &psi_l, 1e-6, 3).unwrap().cells().len(), 1);
    }

    #[test]
    fn atom_collapse() {
        let d = SetFunction::dirac(1.0 / 3.0, 2.0).unwrap();
        let t = MeasurableSet::unit_interval();
        let p = Partition::chain_level(&t, 4).unwrap();
        let r = check_atom_collapse(&d, &t, &p, 8).unwrap();
        assert_eq!(r.outcome, CollapseOutcome::Verified { carrier: 5 });
        assert_eq!(r.variation, Some(2.0));
        let l = SetFunction::lebesgue();
        let r = check_atom_collapse(&l, &t, &p, 8).unwrap();
        assert!(matches!(r.outcome, CollapseOutcome::Skipped { .. }));
    }
}
