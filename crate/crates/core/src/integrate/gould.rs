//! Gould integral: the limit of Riemann-type sums along the net of finite
//! partitions ordered by refinement.

use super::multifunction::Multifunction;
use super::result::{IntegralResult, Method, Status, TraceEntry};
use super::riemann::{sampled_sum, weighted_sum};
use super::{blank_result, check_inputs, shortcut};
use crate::bodies::AxisBox;
use crate::config::IntegratorConfig;
use crate::error::Result;
use crate::partitions::{random_refinement, Partition};
use crate::rng;
use crate::spaces::analysis::Evidence;
use crate::spaces::{MeasurableSet, SetFunction};
use crate::trend;

/// Extra depth of the random refinements used for certification.
pub const REFINEMENT_DEPTH: u32 = 3;

/// Gould integral of `F` over the whole space.
pub fn gould_integral(f: &Multifunction, mu: &SetFunction, cfg: &IntegratorConfig) -> Result<IntegralResult> {
    gould_on(f, mu, &mu.space().full(), cfg)
}

/// Walks the dyadic chain of `A`. At each depth the sum is taken with one
/// random tag per cell and the tag oscillation is estimated from
/// `tag_samples` draws. The candidate is accepted once `oscillation + h(S_{k-1}, S_k) < tol`
/// at two consecutive depths, and certified when sums over random
/// refinements of the stabilized partition stay within `tol`.
pub(crate) fn gould_on(
    f: &Multifunction,
    mu: &SetFunction,
    domain: &MeasurableSet,
    cfg: &IntegratorConfig,
) -> Result<IntegralResult> {
    check_inputs(f, mu, domain, cfg)?;
    if let Some(r) = shortcut(Method::Gould, f, mu, domain, cfg) {
        return Ok(r);
    }
    let mut rng = rng::stream(cfg.seed, &format!("gould:{}:{}", f.id(), mu.id()));
    let threshold = cfg.divergence_factor * f.bound();
    let mut r = blank_result(Method::Gould, f, mu, domain, cfg);
    let mut norms = Vec::new();
    let mut prev: Option<AxisBox> = None;
    let mut streak = 0;
    let mut gap = f64::INFINITY;
    for k in 0..=cfg.max_depth {
        let level = Partition::chain_level(domain, k)?;
        let s = sampled_sum(f, level.cells().iter().map(|c| (c, mu.eval(c))), cfg.tag_samples, &mut rng);
        norms.push(s.sum.norm());
        gap = prev.as_ref().map_or(f64::INFINITY, |p| p.distance(&s.sum)) + s.oscillation;
        r.trace.push(TraceEntry {
            partition: format!("chain:{k}"),
            sum: s.sum.clone(),
            h_to_value: 0.0,
            tag_oscillation: Some(s.oscillation),
            tail_bound: None,
        });
        r.value = s.sum.clone();
        r.tag_oscillation = s.oscillation;
        r.depth = Some(k);
        if s.sum.norm() > threshold || trend::blows_up(&norms, threshold, cfg.tol) {
            r.status = Status::Diverged;
            break;
        }
        streak = if gap < cfg.tol { streak + 1 } else { 0 };
        prev = Some(s.sum);
        if streak < 2 {
            continue;
        }
        let stabilization = r.trace.len() - 2;
        let checks = certify(f, mu, &level, &r.value, cfg, &mut rng);
        let worst = checks.iter().map(|e| e.h_to_value).fold(0.0, f64::max);
        if worst <= cfg.tol {
            r.trace.extend(checks);
            r.status = Status::Converged;
            r.certificate.stabilization_index = Some(stabilization);
            r.certificate.worst_h = worst;
            break;
        }
        r.certificate.notes.push(format!("depth {k}: a refinement sum was {worst:.3e} away; refining further"));
    }
    finish(&mut r, gap, cfg);
    Ok(r)
}

/// Sums over `partitions_checked` random refinements of `level` with
/// `tag_draws` random Henstock tag draws each; one trace entry per refinement
/// holding its worst `h` to `value`.
fn certify<R: rand::Rng + ?Sized>(
    f: &Multifunction,
    mu: &SetFunction,
    level: &Partition,
    value: &AxisBox,
    cfg: &IntegratorConfig,
    rng: &mut R,
) -> Vec<TraceEntry> {
    (0..cfg.partitions_checked)
        .map(|i| {
            let q = random_refinement(level, rng, REFINEMENT_DEPTH);
            let masses: Vec<f64> = q.cells().iter().map(|c| mu.eval(c)).collect();
            let mut first = None;
            let mut worst: f64 = 0.0;
            for _ in 0..cfg.tag_draws {
                let tags: Vec<f64> = q.cells().iter().map(|c| c.sample_point(rng)).collect();
                let sum = weighted_sum(f, &masses, &tags);
                worst = worst.max(sum.distance(value));
                first.get_or_insert(sum);
            }
            TraceEntry {
                partition: format!("refinement:{i}"),
                sum: first.unwrap_or_else(|| AxisBox::zero(f.dim())),
                h_to_value: worst,
                tag_oscillation: None,
                tail_bound: None,
            }
        })
        .collect()
}

/// Fills `h_to_value` of the refinement-level entries (those carrying a tag
/// oscillation) and the error bound.
pub(crate) fn finish(r: &mut IntegralResult, gap: f64, cfg: &IntegratorConfig) {
    for e in r.trace.iter_mut().filter(|e| e.tag_oscillation.is_some()) {
        e.h_to_value = e.sum.distance(&r.value);
    }
    r.certificate.evidence = Some(Evidence::Sampled);
    r.certificate.partitions_checked = cfg.partitions_checked;
    r.certificate.tag_draws = cfg.tag_draws;
    r.error_bound = match (r.status, r.certificate.stabilization_index) {
        (Status::Converged, Some(s)) => r.trace[s..].iter().map(|e| e.h_to_value).fold(0.0, f64::max),
        _ if gap.is_finite() => gap,
        _ => r.value.norm(),
    };
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::multifunction::{MultiSpec, ScalarFn};
    use crate::spaces::measure::MeasureSpec;

    fn poly(c: &[f64]) -> ScalarFn {
        ScalarFn::Poly { coeffs: c.to_vec() }
    }

    fn box_linear() -> Multifunction {
        Multifunction::new("box-linear", MultiSpec::Coordinatewise { lo: vec![poly(&[])], hi: vec![poly(&[0.0, 1.0])] })
            .unwrap()
    }

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default().with_seed(11)
    }

    #[test]
    fn constant_is_exact() {
        let c = AxisBox::interval(-2.0, 3.0).unwrap();
        let f = Multifunction::new("c", MultiSpec::Constant { value: c.clone() }).unwrap();
        let r = gould_integral(&f, &SetFunction::lebesgue(), &cfg()).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert_eq!(r.value, c);
        assert_eq!(r.error_bound, 0.0);
    }

    #[test]
    fn identity_box_against_lebesgue() {
        let r = gould_integral(&box_linear(), &SetFunction::lebesgue(), &cfg()).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!(r.value.distance(&AxisBox::interval(0.0, 0.5).unwrap()) <= 1e-3);
        assert!(r.error_bound <= 1e-3 && r.tag_oscillation <= 1e-3);
        assert!(r.trace_is_consistent());
        let depth = r.depth.unwrap();
        assert!((9..=12).contains(&depth), "depth {depth}");
    }

    #[test]
    fn atom_collapses_to_the_tag_value() {
        let f = Multifunction::new(
            "quad",
            MultiSpec::Coordinatewise { lo: vec![poly(&[0.0, 0.0, 1.0])], hi: vec![poly(&[0.0, 1.0])] },
        )
        .unwrap();
        let mu = SetFunction::dirac(1.0 / 3.0, 2.0).unwrap();
        let r = gould_integral(&f, &mu, &cfg()).unwrap();
        assert_eq!(r.status, Status::Converged);
        let expected = f.eval(1.0 / 3.0).scale(2.0).unwrap();
        assert!(r.value.distance(&expected) <= 1e-3, "{}", r.value);
    }

    #[test]
    fn sqrt_lebesgue_diverges() {
        let f = Multifunction::new("one", MultiSpec::Constant { value: AxisBox::point(&[1.0]).unwrap() }).unwrap();
        let mu = SetFunction::lebesgue_power(0.5).unwrap();
        let r = gould_integral(&f, &mu, &cfg()).unwrap();
        assert_eq!(r.status, Status::Diverged);
    }

    #[test]
    fn lebesgue_squared_integrates_to_zero() {
        let mu = SetFunction::from_spec("l2", MeasureSpec::LebesguePower { exponent: 2.0, scale: 1.0 }).unwrap();
        let r = gould_integral(&box_linear(), &mu, &cfg()).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!(r.value.norm() <= 1e-3);
    }

    #[test]
    fn restriction_to_a_half() {
        let a = MeasurableSet::interval(0.0, 0.5).unwrap();
        let r = gould_on(&box_linear(), &SetFunction::lebesgue(), &a, &cfg()).unwrap();
        assert!(r.value.distance(&AxisBox::interval(0.0, 0.125).unwrap()) <= 1e-3);
    }

    #[test]
    fn deterministic_given_the_seed() {
        let a = gould_integral(&box_linear(), &SetFunction::lebesgue(), &cfg()).unwrap();
        let b = gould_integral(&box_linear(), &SetFunction::lebesgue(), &cfg()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
