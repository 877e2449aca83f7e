//! Birkhoff simple integral: limsup of partial sums over countable partitions.

use rand::Rng;

use super::multifunction::Multifunction;
use super::result::{IntegralResult, Method, Status, TraceEntry};
use super::riemann::sampled_sum;
use super::{blank_result, check_inputs, gould, shortcut};
use crate::bodies::AxisBox;
use crate::config::IntegratorConfig;
use crate::error::{Error, Result};
use crate::partitions::CountablePartition;
use crate::rng;
use crate::spaces::{MeasurableSet, SetFunction};
use crate::trend;

/// Birkhoff simple integral of `F` over the whole space.
pub fn birkhoff_simple_integral(f: &Multifunction, mu: &SetFunction, cfg: &IntegratorConfig) -> Result<IntegralResult> {
    birkhoff_on(f, mu, &mu.space().full(), cfg)
}

/// Smallest `N` with `M μ(tail after N) ≤ cap`, and that bound. `μ` is
/// monotone, so the tail mass decreases in `N`. The search gallops down from
/// the end, where tails are cheap to build, then bisects the last gap.
pub fn tail_rule(cp: &CountablePartition, mu: &SetFunction, bound: f64, cap: f64) -> Option<(usize, f64)> {
    let tb = |n: usize| bound * mu.eval(&cp.tail_after(n));
    let len = cp.len();
    if tb(len) > cap {
        return None;
    }
    // invariant: tb(hi) <= cap, and tb(n) > cap for n < lo
    let (mut lo, mut hi) = (0, len);
    let mut step = 1;
    while hi > 0 {
        let probe = hi.saturating_sub(step);
        if tb(probe) <= cap {
            hi = probe;
            step *= 2;
        } else {
            lo = probe + 1;
            break;
        }
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if tb(mid) <= cap {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some((lo, tb(lo)))
}

/// Worst `h(S_n, I)` over `n ∈ [N, min(N + window, len)]` for one tag draw,
/// and the sum `S_N`.
fn window_h<R: Rng + ?Sized>(
    f: &Multifunction,
    cp: &CountablePartition,
    masses: &[f64],
    n0: usize,
    window: usize,
    value: &AxisBox,
    rng: &mut R,
) -> (f64, AxisBox) {
    let end = cp.len().min(n0 + window);
    let mut s = AxisBox::zero(f.dim());
    let mut at_n0 = s.clone();
    let mut worst: f64 = if n0 == 0 { s.distance(value) } else { 0.0 };
    for i in 0..end {
        if masses[i] != 0.0 {
            s.add_scaled(masses[i], &f.eval(cp.cell(i).sample_point(rng)));
        }
        if i + 1 == n0 {
            at_n0 = s.clone();
        }
        if i + 1 >= n0 {
            worst = worst.max(s.distance(value));
        }
    }
    (worst, at_n0)
}

/// Candidate from the countable partitions that refine the depth-`m` dyadic
/// cells (accepted when `oscillation + h(I_{m-1}, I_m) < tol / 2` twice in a
/// row), truncated by the tail rule `M μ(tail) ≤ tol / 4`. Certification runs
/// the window of partial sums past `N` on random refinements of the head, in
/// random order, over several tag draws; the limsup estimate is the worst
/// window distance plus the tail bound.
pub(crate) fn birkhoff_on(
    f: &Multifunction,
    mu: &SetFunction,
    domain: &MeasurableSet,
    cfg: &IntegratorConfig,
) -> Result<IntegralResult> {
    check_inputs(f, mu, domain, cfg)?;
    if let Some(r) = shortcut(Method::BirkhoffSimple, f, mu, domain, cfg) {
        return Ok(r);
    }
    if !mu.declared().monotone {
        return Err(Error::NotMonotone(mu.id().to_string()));
    }
    let g = cfg.generator;
    let bound = f.bound();
    let cap = cfg.tol / 4.0;
    let threshold = cfg.divergence_factor * bound;
    let mut rng = rng::stream(cfg.seed, &format!("birkhoff:{}:{}:{}", g.id(), f.id(), mu.id()));
    let mut r = blank_result(Method::BirkhoffSimple, f, mu, domain, cfg);
    let mut norms = Vec::new();
    let mut prev: Option<AxisBox> = None;
    let mut streak = 0;
    let mut gap = f64::INFINITY;
    for m in 0..=cfg.max_depth {
        let cp = CountablePartition::refining(g, domain, m)?;
        let Some((n0, tb)) = tail_rule(&cp, mu, bound, cap) else {
            return Err(Error::TailMassNotSummable { mass: mu.eval(cp.core()) });
        };
        let s = sampled_sum(f, (0..n0).map(|i| (cp.cell(i), mu.eval(cp.cell(i)))), cfg.tag_samples, &mut rng);
        norms.push(s.sum.norm());
        gap = prev.as_ref().map_or(f64::INFINITY, |p| p.distance(&s.sum)) + s.oscillation;
        r.trace.push(TraceEntry {
            partition: format!("{}:{m}", g.id()),
            sum: s.sum.clone(),
            h_to_value: 0.0,
            tag_oscillation: Some(s.oscillation),
            tail_bound: Some(tb),
        });
        r.value = s.sum.clone();
        r.tag_oscillation = s.oscillation;
        r.depth = Some(m);
        r.certificate.truncation = Some(n0);
        r.certificate.tail_bound = Some(tb);
        if s.sum.norm() > threshold || trend::blows_up(&norms, threshold, cfg.tol) {
            r.status = Status::Diverged;
            break;
        }
        streak = if gap < cfg.tol / 2.0 { streak + 1 } else { 0 };
        prev = Some(s.sum);
        if streak < 2 {
            continue;
        }
        let stabilization = r.trace.len() - 2;
        let mut checks = Vec::with_capacity(cfg.partitions_checked);
        for i in 0..cfg.partitions_checked {
            let q = cp.refine_head(&mut rng, gould::REFINEMENT_DEPTH);
            let Some((nq, tbq)) = tail_rule(&q, mu, bound, cap) else {
                return Err(Error::TailMassNotSummable { mass: mu.eval(q.core()) });
            };
            // only the cells the window visits
            let masses: Vec<f64> = q.cells().take(nq + cfg.window).map(|c| mu.eval(c)).collect();
            let mut worst: f64 = 0.0;
            let mut first = None;
            for _ in 0..cfg.tag_draws {
                let (h, s_n) = window_h(f, &q, &masses, nq, cfg.window, &r.value, &mut rng);
                worst = worst.max(h);
                first.get_or_insert(s_n);
            }
            checks.push(TraceEntry {
                partition: format!("refined-{}:{m}:{i}", g.id()),
                sum: first.expect("at least one tag draw"),
                h_to_value: worst + tbq,
                tag_oscillation: None,
                tail_bound: Some(tbq),
            });
        }
        let worst = checks.iter().map(|e| e.h_to_value).fold(0.0, f64::max);
        if worst <= cfg.tol {
            r.trace.extend(checks);
            r.status = Status::Converged;
            r.certificate.stabilization_index = Some(stabilization);
            r.certificate.worst_h = worst;
            break;
        }
        r.certificate.notes.push(format!("depth {m}: limsup estimate {worst:.3e} above tol; refining further"));
    }
    gould::finish(&mut r, gap, cfg);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::multifunction::{MultiSpec, ScalarFn};
    use crate::partitions::CountableGenerator;

    fn box_linear() -> Multifunction {
        Multifunction::new(
            "box-linear",
            MultiSpec::Coordinatewise {
                lo: vec![ScalarFn::Poly { coeffs: vec![] }],
                hi: vec![ScalarFn::Poly { coeffs: vec![0.0, 1.0] }],
            },
        )
        .unwrap()
    }

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default().with_seed(5)
    }

    #[test]
    fn constant_against_lebesgue() {
        let c = AxisBox::interval(1.0, 2.0).unwrap();
        let f = Multifunction::new("c", MultiSpec::Constant { value: c.clone() }).unwrap();
        let r = birkhoff_simple_integral(&f, &SetFunction::lebesgue(), &cfg()).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!(r.value.distance(&c) <= 1e-3);
        assert!(r.certificate.worst_h <= 1e-3);
    }

    #[test]
    fn identity_box_matches_the_quadrature() {
        let r = birkhoff_simple_integral(&box_linear(), &SetFunction::lebesgue(), &cfg()).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!(r.value.distance(&AxisBox::interval(0.0, 0.5).unwrap()) <= 1e-3, "{}", r.value);
        assert!(r.trace_is_consistent());
        assert!(r.certificate.tail_bound.unwrap() <= 2.5e-4);
    }

    #[test]
    fn atom_with_partial_sums_constant_after_the_carrier() {
        let mu = SetFunction::dirac(1.0 / 3.0, 2.0).unwrap();
        let r = birkhoff_simple_integral(&box_linear(), &mu, &cfg()).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!(r.value.distance(&AxisBox::interval(0.0, 2.0 / 3.0).unwrap()) <= 1e-3);
    }

    #[test]
    fn atom_at_the_accumulation_point_is_reported() {
        let mu = SetFunction::dirac(1.0, 1.0).unwrap();
        let err = birkhoff_simple_integral(&box_linear(), &mu, &cfg()).unwrap_err();
        assert!(matches!(err, Error::TailMassNotSummable { mass } if mass == 1.0));
        let other = IntegratorConfig { generator: CountableGenerator::Geometric { x0: 0.0 }, ..cfg() };
        let r = birkhoff_simple_integral(&box_linear(), &mu, &other).unwrap();
        assert!(r.value.distance(&AxisBox::interval(0.0, 1.0).unwrap()) <= 1e-3);
    }

    #[test]
    fn tail_rule_is_the_smallest_truncation() {
        let cp = CountablePartition::new(CountableGenerator::Geometric { x0: 1.0 }, &MeasurableSet::unit_interval()).unwrap();
        let (n, tb) = tail_rule(&cp, &SetFunction::lebesgue(), 1.0, 0.001 / 4.0).unwrap();
        // tail after n cells has length 2^-n
        assert_eq!(n, 12);
        assert_eq!(tb, 2f64.powi(-12));
    }
}
