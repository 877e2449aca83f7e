//! Exhaustive Gould oracle on small finite spaces.

use serde::Serialize;

use crate::bodies::AxisBox;
use crate::error::{Error, Result};
use crate::spaces::{MeasurableSet, SetFunction, SpaceModel};

/// Largest space enumerated (115975 set partitions).
pub const BRUTE_FORCE_MAX: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BruteForceGould {
    /// `Σ_t F(t) μ({t})`, summed in increasing `t`.
    pub value: AxisBox,
    pub partitions: usize,
    pub tagged_sums: usize,
    /// The singleton partition refines every enumerated partition.
    pub singletons_dominate: bool,
    /// Tagged sums over partitions finer than the singletons that miss the value.
    pub violations: usize,
    /// Largest `h(sum, value)` over all partitions and tags.
    pub max_h: f64,
}

/// Calls `visit` with the blocks (as bitmasks over `points`) of every set
/// partition of `points`, in restricted-growth-string order.
pub fn set_partitions(points: &[usize], mut visit: impl FnMut(&[u64])) {
    fn go(points: &[usize], i: usize, blocks: &mut Vec<u64>, visit: &mut dyn FnMut(&[u64])) {
        if i == points.len() {
            visit(blocks);
            return;
        }
        let bit = 1u64 << points[i];
        for b in 0..blocks.len() {
            blocks[b] |= bit;
            go(points, i + 1, blocks, visit);
            blocks[b] &= !bit;
        }
        blocks.push(bit);
        go(points, i + 1, blocks, visit);
        blocks.pop();
    }
    go(points, 0, &mut Vec::with_capacity(points.len()), &mut visit);
}

/// Enumerates every partition of `{0, .., n-1}` and every tag choice,
/// confirming that the singleton partition is the finest one and that its
/// sums (the only ones finer than it) all equal the returned value.
pub fn brute_force_finite_gould(values: &[AxisBox], mu: &SetFunction) -> Result<BruteForceGould> {
    let n = values.len();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge { n, max: BRUTE_FORCE_MAX });
    }
    if mu.space() != SpaceModel::finite(n)? {
        return Err(Error::SpaceMismatch);
    }
    let d = values[0].dim();
    if let Some(v) = values.iter().find(|v| v.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: v.dim() });
    }
    let set = |mask: u64| MeasurableSet::Finite { mask, n: n as u32 };
    let mut value = AxisBox::zero(d);
    for (t, v) in values.iter().enumerate() {
        value.add_scaled(mu.eval(&set(1 << t)), v);
    }
    let points: Vec<usize> = (0..n).collect();
    let mut out = BruteForceGould {
        value: value.clone(),
        partitions: 0,
        tagged_sums: 0,
        singletons_dominate: true,
        violations: 0,
        max_h: 0.0,
    };
    set_partitions(&points, |blocks| {
        out.partitions += 1;
        // every singleton lies in some block
        let covered = blocks.iter().fold(0u64, |m, b| m | b);
        out.singletons_dominate &= covered.count_ones() as usize == n;
        let finer_than_singletons = blocks.iter().all(|b| b.count_ones() == 1);
        let masses: Vec<f64> = blocks.iter().map(|&b| mu.eval(&set(b))).collect();
        let members: Vec<Vec<usize>> =
            blocks.iter().map(|&b| (0..n).filter(|t| b & (1 << t) != 0).collect()).collect();
        // mixed-radix counter over the tag choices
        let mut choice = vec![0usize; blocks.len()];
        loop {
            let mut s = AxisBox::zero(d);
            for (k, m) in masses.iter().enumerate() {
                s.add_scaled(*m, &values[members[k][choice[k]]]);
            }
            let h = s.distance(&value);
            out.tagged_sums += 1;
            out.max_h = out.max_h.max(h);
            if finer_than_singletons && h > 0.0 {
                out.violations += 1;
            }
            let Some(k) = (0..choice.len()).find(|&k| choice[k] + 1 < members[k].len()) else { break };
            choice[k] += 1;
            choice[..k].iter_mut().for_each(|c| *c = 0);
        }
    });
    Ok(out)
}
