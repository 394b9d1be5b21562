//! Envelopes of stability regions over power and access-probability grids.
//!
//! The union of regions over a continuum of parameters is approximated by a
//! grid sweep: for every `lambda1` on an evaluation grid the curve records the
//! largest stable `lambda2` over all swept `(p1, p2, q1, q2)` and the
//! parameters attaining it. Ties go to the lexicographically smallest tuple,
//! so the result does not depend on evaluation order.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{success_profile, PowerAllocation, SinrThresholds, StrategyPair, Topology};
use crate::error::{config, domain, Result};
use crate::region::{region_general, region_random_access, StabilityRegion};

/// `points` evenly spaced values on `[lo, hi]`; a single point is `hi`.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![hi],
        n => (0..n)
            .map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Parameter grids of a closure sweep. The swept tuples are the Cartesian
/// product of the four value lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub p_max: f64,
    pub p1_values: Vec<f64>,
    pub p2_values: Vec<f64>,
    pub q1_values: Vec<f64>,
    pub q2_values: Vec<f64>,
    pub lambda1: Vec<f64>,
}

impl SweepSpec {
    pub const DEFAULT_POWER_POINTS: usize = 41;
    pub const DEFAULT_ACCESS_POINTS: usize = 21;
    pub const DEFAULT_LAMBDA1_POINTS: usize = 101;

    /// Uniform power grid on `[0, p_max]` for both sources, access fixed at 1.
    pub fn power_sweep(p_max: f64, power_points: usize, lambda1_points: usize) -> Self {
        let grid = uniform_grid(0.0, p_max, power_points);
        SweepSpec {
            p_max,
            p1_values: grid.clone(),
            p2_values: grid,
            q1_values: vec![1.0],
            q2_values: vec![1.0],
            lambda1: uniform_grid(0.0, 1.0, lambda1_points),
        }
    }

    /// Fixed powers, uniform access grid on `[0, 1]` for both sources.
    pub fn access_sweep(
        pw: PowerAllocation,
        p_max: f64,
        access_points: usize,
        lambda1_points: usize,
    ) -> Self {
        let grid = uniform_grid(0.0, 1.0, access_points);
        SweepSpec {
            p_max,
            p1_values: vec![pw.p1],
            p2_values: vec![pw.p2],
            q1_values: grid.clone(),
            q2_values: grid,
            lambda1: uniform_grid(0.0, 1.0, lambda1_points),
        }
    }

    /// Single parameter tuple.
    pub fn singleton(pw: PowerAllocation, q1: f64, q2: f64, lambda1_points: usize) -> Self {
        SweepSpec {
            p_max: pw.p1.max(pw.p2),
            p1_values: vec![pw.p1],
            p2_values: vec![pw.p2],
            q1_values: vec![q1],
            q2_values: vec![q2],
            lambda1: uniform_grid(0.0, 1.0, lambda1_points),
        }
    }

    pub fn has_unit_access(&self) -> bool {
        self.q1_values == [1.0] && self.q2_values == [1.0]
    }

    pub fn cells(&self) -> usize {
        self.p1_values.len() * self.p2_values.len() * self.q1_values.len() * self.q2_values.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_max >= 0.0) || !self.p_max.is_finite() {
            return Err(config(format!("p_max must be non-negative, got {}", self.p_max)));
        }
        let grids = [
            ("p1", &self.p1_values, self.p_max),
            ("p2", &self.p2_values, self.p_max),
            ("q1", &self.q1_values, 1.0),
            ("q2", &self.q2_values, 1.0),
        ];
        for (name, values, max) in grids {
            if values.is_empty() {
                return Err(config(format!("{name} grid is empty")));
            }
            if let Some(v) = values.iter().find(|v| !(0.0..=max).contains(*v)) {
                return Err(config(format!("{name} grid value {v} is outside [0, {max}]")));
            }
        }
        if self.lambda1.is_empty() {
            return Err(config("lambda1 grid is empty"));
        }
        if let Some(v) = self.lambda1.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(config(format!("lambda1 grid value {v} must be non-negative")));
        }
        Ok(())
    }
}

/// One row of a closure curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosurePoint {
    pub lambda1: f64,
    pub lambda2_max: f64,
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
}

/// Grid resolution a curve was computed at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridResolution {
    pub p1_points: usize,
    pub p2_points: usize,
    pub q1_points: usize,
    pub q2_points: usize,
    pub lambda1_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureCurve {
    pub points: Vec<ClosurePoint>,
    pub p_max: f64,
    pub resolution: GridResolution,
}

impl ClosureCurve {
    pub fn lambda2_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda2_max).collect()
    }

    /// Largest gap between the curve and its least concave majorant over the
    /// points with positive `lambda2`. Zero (up to grid effects) for a convex
    /// region.
    pub fn concavity_defect(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.lambda2_max > 0.0)
            .map(|p| (p.lambda1, p.lambda2_max))
            .collect();
        concavity_defect(&pts)
    }
}

/// Largest vertical gap between points sorted by `x` and their upper concave
/// hull.
pub fn concavity_defect(points: &[(f64, f64)]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut defect: f64 = 0.0;
    let mut seg = 0;
    for &(x, y) in points {
        while seg + 1 < hull.len() - 1 && x > hull[seg + 1].0 {
            seg += 1;
        }
        let (a, b) = (hull[seg], hull[(seg + 1).min(hull.len() - 1)]);
        let h = if b.0 > a.0 { a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0) } else { a.1 };
        defect = defect.max(h - y);
    }
    defect
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Candidate {
    lambda2: f64,
    key: [f64; 4],
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        match self.lambda2.total_cmp(&other.lambda2) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => {
                let ord = self
                    .key
                    .iter()
                    .zip(&other.key)
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal);
                ord == Ordering::Less
            }
        }
    }
}

fn merge(mut acc: Vec<Option<Candidate>>, other: Vec<Option<Candidate>>) -> Vec<Option<Candidate>> {
    for (slot, cand) in acc.iter_mut().zip(other) {
        if let Some(c) = cand {
            if slot.is_none_or(|s| c.beats(&s)) {
                *slot = Some(c);
            }
        }
    }
    acc
}

fn sweep(
    strategies: &StrategyPair,
    topo: &Topology,
    th: &SinrThresholds,
    spec: &SweepSpec,
    random_access: bool,
) -> Result<ClosureCurve> {
    spec.validate()?;
    strategies.validate()?;
    topo.validate()?;
    th.validate()?;
    let n = spec.lambda1.len();
    let powers: Vec<(f64, f64)> = spec
        .p1_values
        .iter()
        .flat_map(|&p1| spec.p2_values.iter().map(move |&p2| (p1, p2)))
        .collect();

    let best = powers
        .par_iter()
        .map(|&(p1, p2)| -> Result<Vec<Option<Candidate>>> {
            let profile = success_profile(strategies, topo, &PowerAllocation { p1, p2 }, th)?;
            let mut acc = vec![None; n];
            for &q1 in &spec.q1_values {
                for &q2 in &spec.q2_values {
                    let region: StabilityRegion = if random_access {
                        region_random_access(&profile, q1, q2)?
                    } else {
                        region_general(&profile)?
                    };
                    let cands = spec
                        .lambda1
                        .iter()
                        .map(|&l1| {
                            Some(Candidate { lambda2: region.boundary_lambda2(l1), key: [p1, p2, q1, q2] })
                        })
                        .collect();
                    acc = merge(acc, cands);
                }
            }
            Ok(acc)
        })
        .try_reduce(|| vec![None; n], |a, b| Ok(merge(a, b)))?;

    let points = spec
        .lambda1
        .iter()
        .zip(best)
        .map(|(&lambda1, cand)| {
            let c = cand.expect("sweep grids are non-empty");
            ClosurePoint {
                lambda1,
                lambda2_max: c.lambda2,
                p1: c.key[0],
                p2: c.key[1],
                q1: c.key[2],
                q2: c.key[3],
            }
        })
        .collect();
    Ok(ClosureCurve {
        points,
        p_max: spec.p_max,
        resolution: GridResolution {
            p1_points: spec.p1_values.len(),
            p2_points: spec.p2_values.len(),
            q1_points: spec.q1_values.len(),
            q2_points: spec.q2_values.len(),
            lambda1_points: n,
        },
    })
}

/// Envelope of the saturated-access regions over the power grid.
pub fn closure_over_power(
    strategies: &StrategyPair,
    topo: &Topology,
    th: &SinrThresholds,
    spec: &SweepSpec,
) -> Result<ClosureCurve> {
    if !spec.has_unit_access() {
        return Err(config("power closure needs the unit access grid {(1, 1)}"));
    }
    sweep(strategies, topo, th, spec, false)
}

/// Envelope of the random-access regions over the joint access and power
/// grid.
pub fn closure_over_access_and_power(
    strategies: &StrategyPair,
    topo: &Topology,
    th: &SinrThresholds,
    spec: &SweepSpec,
) -> Result<ClosureCurve> {
    sweep(strategies, topo, th, spec, true)
}

/// Boundary of a single region sampled on a `lambda1` grid.
pub fn boundary_trace(region: &StabilityRegion, lambda1: &[f64]) -> Result<Vec<(f64, f64)>> {
    if let Some(v) = lambda1.iter().find(|v| !(**v >= 0.0)) {
        return Err(domain(format!("lambda1 value {v} must be non-negative")));
    }
    Ok(lambda1.iter().map(|&l| (l, region.boundary_lambda2(l))).collect())
}
