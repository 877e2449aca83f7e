//! Box identities on random tuples.

use rand::Rng;

use super::{Ctx, InstanceOutcome};
use crate::bodies::AxisBox;
use crate::rng;
use crate::spaces::analysis::Evidence;

pub const TUPLES: usize = 10_000;
/// Absolute tolerance of every identity.
pub const EXACT_TOL: f64 = 1e-12;

/// A box in dimension `d` with corners in `[-3, 5]`; one in ten is degenerate.
pub fn random_box<R: Rng + ?Sized>(rng: &mut R, d: usize) -> AxisBox {
    let degenerate = rng.gen_bool(0.1);
    let lo: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let hi: Vec<f64> = lo.iter().map(|l| if degenerate { *l } else { l + rng.gen_range(0.0..2.0) }).collect();
    AxisBox::new(&lo, &hi).expect("lo <= hi")
}

/// A scalar in `[0, 3]`, exactly zero one time in ten.
fn random_scalar<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.1) {
        0.0
    } else {
        rng.gen_range(0.0..3.0)
    }
}

/// Runs `excess` on [`TUPLES`] tuples cycling `d` through 1, 2, 3. The
/// closure returns how far the identity is from holding (≤ 0 when it holds
/// as an inequality).
fn suite<F>(ctx: &mut Ctx, label: &str, mut excess: F)
where
    F: FnMut(&mut rng::Rng, usize) -> f64,
{
    if !ctx.wants(label) {
        return;
    }
    let mut rng = rng::stream(ctx.seed(), label);
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for i in 0..TUPLES {
        let e = excess(&mut rng, 1 + i % 3);
        worst = worst.max(e);
        if !(e <= EXACT_TOL) {
            violations += 1;
        }
    }
    let o = InstanceOutcome::measured(label, ctx.seed(), worst, EXACT_TOL, Evidence::Sampled)
        .with_detail(format!("{TUPLES} tuples, d in {{1, 2, 3}}, {violations} violations"));
    ctx.push(o);
}

fn sum(a: &AxisBox, b: &AxisBox) -> AxisBox {
    a.minkowski_sum(b).expect("same dimension")
}

pub(super) fn prop_2_8(ctx: &mut Ctx) {
    suite(ctx, "2.8(i)", |r, d| {
        let (a, x, y) = (random_box(r, d), random_scalar(r), random_scalar(r));
        let lhs = a.scale(x).unwrap().distance(&a.scale(y).unwrap());
        lhs - (x - y).abs() * a.norm()
    });
    suite(ctx, "2.8(ii)", |r, d| {
        let [a, b, c, e] = [(); 4].map(|_| random_box(r, d));
        sum(&a, &b).distance(&sum(&c, &e)) - a.distance(&c) - b.distance(&e)
    });
    suite(ctx, "2.8(iii)", |r, d| {
        let [a, b, c] = [(); 3].map(|_| random_box(r, d));
        sum(&a, &c).distance(&sum(&b, &c)) - a.distance(&b)
    });
    suite(ctx, "2.8(iv)", |r, d| {
        let [a, b] = [(); 2].map(|_| random_box(r, d));
        a.distance(&b) - a.norm() - b.norm()
    });
}

pub(super) fn prop_h(ctx: &mut Ctx) {
    suite(ctx, "prop-h", |r, d| {
        let [a, b, c] = [(); 3].map(|_| random_box(r, d));
        (sum(&a, &b).distance(&c) - a.distance(&c)).abs() - b.norm()
    });
}

pub(super) fn metric(ctx: &mut Ctx) {
    suite(ctx, "metric:non-negative", |r, d| {
        let [a, b] = [(); 2].map(|_| random_box(r, d));
        -a.distance(&b)
    });
    suite(ctx, "metric:identity", |r, d| {
        let a = random_box(r, d);
        let copy = AxisBox::new(a.lo(), a.hi()).unwrap();
        a.distance(&copy)
    });
    suite(ctx, "metric:separation", |r, d| {
        let [a, b] = [(); 2].map(|_| random_box(r, d));
        // distinct boxes are at positive distance
        if a != b && a.distance(&b) == 0.0 {
            1.0
        } else {
            0.0
        }
    });
    suite(ctx, "metric:symmetry", |r, d| {
        let [a, b] = [(); 2].map(|_| random_box(r, d));
        (a.distance(&b) - b.distance(&a)).abs()
    });
    suite(ctx, "metric:triangle", |r, d| {
        let [a, b, c] = [(); 3].map(|_| random_box(r, d));
        a.distance(&c) - a.distance(&b) - b.distance(&c)
    });
}

pub(super) fn labu(ctx: &mut Ctx) {
    suite(ctx, "labu:isometry", |r, d| {
        let [a, b] = [(); 2].map(|_| random_box(r, d));
        (a.embed().sup_distance(&b.embed()).unwrap() - a.distance(&b)).abs()
    });
    suite(ctx, "labu:additivity", |r, d| {
        let [a, c] = [(); 2].map(|_| random_box(r, d));
        let (x, y) = (random_scalar(r), random_scalar(r));
        let lhs = sum(&a.scale(x).unwrap(), &c.scale(y).unwrap()).embed();
        let rhs = a.embed().combine(x, &c.embed(), y).unwrap();
        lhs.sup_distance(&rhs).unwrap()
    });
    suite(ctx, "labu:hull", |r, d| {
        let [a, c] = [(); 2].map(|_| random_box(r, d));
        let lhs = a.hull_union(&c).unwrap().embed();
        lhs.sup_distance(&a.embed().max(&c.embed()).unwrap()).unwrap()
    });
    suite(ctx, "labu:cone", |r, d| {
        // the image is closed under the cone invariant and inverts exactly
        let a = random_box(r, d);
        let j = a.embed();
        let back = crate::bodies::EmbeddedVector::new(j.coords()).map(|v| v.to_box());
        match back {
            Ok(b) => b.distance(&a),
            Err(_) => 1.0,
        }
    });
}
