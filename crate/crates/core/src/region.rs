//! Stability regions from the two dominant systems.
//!
//! In the first dominant system source 1 always transmits (dummy packets
//! when its queue is empty). Queue 2 is then stable iff its arrival rate is
//! below its service rate, and plugging the resulting busy probability of
//! queue 2 into the service rate of queue 1 gives a line constraint on
//! `(lambda1, lambda2)`. The second dominant system is the mirror image.
//! The stability region is the union of the two resulting sub-regions.
//!
//! Regions are open: a rate pair on a boundary line is reported unstable.

use serde::{Deserialize, Serialize};

use crate::channel::{
    ian_success, sic_success, Link, PowerAllocation, SinrThresholds, SuccessProfile, Topology,
};
use crate::error::{domain, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    Lambda1,
    Lambda2,
}

/// `{ c1*lambda1 + c2*lambda2 < 1, lambda_axis < bound }` within the
/// non-negative quadrant.
///
/// Coefficients of an empty sub-region may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubRegion {
    pub c1: f64,
    pub c2: f64,
    pub bound_axis: Axis,
    pub bound: f64,
    // Each coefficient as `(numerator, denominator)`, so that points on the
    // boundary line evaluate to exactly 1 whenever the division is exact.
    fractions: [(f64, f64); 2],
}

/// `num * x / den` with `0 * x / den = 0` and `x / 0 = inf`.
fn scaled(num: f64, den: f64, x: f64) -> f64 {
    if num == 0.0 || x == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num * x / den
    }
}

impl SubRegion {
    fn new(c1: (f64, f64), c2: (f64, f64), bound_axis: Axis, bound: f64) -> Self {
        SubRegion {
            c1: ratio(c1.0, c1.1),
            c2: ratio(c2.0, c2.1),
            bound_axis,
            bound,
            fractions: [c1, c2],
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.bound > 0.0) || !self.c1.is_finite() || !self.c2.is_finite()
    }

    fn line(&self, lambda1: f64, lambda2: f64) -> f64 {
        let [(n1, d1), (n2, d2)] = self.fractions;
        scaled(n1, d1, lambda1) + scaled(n2, d2, lambda2)
    }

    pub fn contains(&self, lambda1: f64, lambda2: f64) -> bool {
        if self.is_empty() || lambda1 < 0.0 || lambda2 < 0.0 {
            return false;
        }
        let boxed = match self.bound_axis {
            Axis::Lambda1 => lambda1,
            Axis::Lambda2 => lambda2,
        };
        boxed < self.bound && self.line(lambda1, lambda2) < 1.0
    }

    /// Supremum of the member `lambda2` values at `lambda1`, if any.
    fn sup_lambda2(&self, lambda1: f64) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        if self.bound_axis == Axis::Lambda1 && !(lambda1 < self.bound) {
            return None;
        }
        let slack = 1.0 - self.line(lambda1, 0.0);
        if !(slack > 0.0) {
            return None;
        }
        let (n2, d2) = self.fractions[1];
        let mut sup = if n2 > 0.0 { slack * d2 / n2 } else { f64::INFINITY };
        if self.bound_axis == Axis::Lambda2 {
            sup = sup.min(self.bound);
        }
        // Rounding may leave the computed edge just inside the open region.
        while sup.is_finite() && self.contains(lambda1, sup) {
            sup = sup.next_up();
        }
        (sup > 0.0).then_some(sup)
    }
}

/// Medium access of the two sources.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Access {
    /// A backlogged source transmits in every slot.
    Saturated,
    /// A backlogged source transmits with probability `q_i`.
    RandomAccess { q1: f64, q2: f64 },
}

impl Access {
    pub fn probabilities(&self) -> (f64, f64) {
        match *self {
            Access::Saturated => (1.0, 1.0),
            Access::RandomAccess { q1, q2 } => (q1, q2),
        }
    }
}

/// Union of the two dominant-system sub-regions.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRegion {
    pub sub1: SubRegion,
    pub sub2: SubRegion,
    pub profile: SuccessProfile,
    pub access: Access,
    degenerate: bool,
}

/// `num / den` with `0/x = 0` and `x/0 = inf`.
fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn validate_profile(profile: &SuccessProfile) -> Result<()> {
    for p in profile.entries() {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!("success probability {p} is outside [0, 1]")));
        }
    }
    for link in Link::BOTH {
        if profile.both(link) > profile.alone(link) {
            return Err(domain(format!(
                "link {link}: success with interference ({}) exceeds success alone ({})",
                profile.both(link),
                profile.alone(link)
            )));
        }
    }
    Ok(())
}

fn build(profile: &SuccessProfile, access: Access) -> Result<StabilityRegion> {
    validate_profile(profile)?;
    let (q1, q2) = access.probabilities();
    for q in [q1, q2] {
        if !(0.0..=1.0).contains(&q) {
            return Err(domain(format!("access probability {q} is outside [0, 1]")));
        }
    }
    let (a1, a2) = (profile.p1_alone, profile.p2_alone);
    let (b1, b2) = (profile.p1_both, profile.p2_both);

    // Per-slot success of source 2 (resp. 1) while the other one is saturated.
    let served2 = (1.0 - q1) * a2 + q1 * b2;
    let served1 = (1.0 - q2) * a1 + q2 * b1;
    let sub1 = SubRegion::new((1.0, q1 * a1), (a1 - b1, a1 * served2), Axis::Lambda2, q2 * served2);
    let sub2 = SubRegion::new((a2 - b2, a2 * served1), (1.0, q2 * a2), Axis::Lambda1, q1 * served1);
    let degenerate = profile.entries().contains(&0.0) || q1 == 0.0 || q2 == 0.0;
    Ok(StabilityRegion { sub1, sub2, profile: *profile, access, degenerate })
}

/// Stability region with both sources transmitting whenever backlogged.
pub fn region_general(profile: &SuccessProfile) -> Result<StabilityRegion> {
    build(profile, Access::Saturated)
}

/// Stability region when a backlogged source `i` transmits with probability
/// `q_i`.
pub fn region_random_access(profile: &SuccessProfile, q1: f64, q2: f64) -> Result<StabilityRegion> {
    build(profile, Access::RandomAccess { q1, q2 })
}

/// Point shared by both sub-region boundary lines under saturated access.
pub fn corner_point(profile: &SuccessProfile) -> (f64, f64) {
    (profile.p1_both, profile.p2_both)
}

/// Whether the saturated-access region is convex.
pub fn is_convex(profile: &SuccessProfile) -> bool {
    if profile.p1_alone == 0.0 || profile.p2_alone == 0.0 {
        return false;
    }
    profile.p1_both / profile.p1_alone + profile.p2_both / profile.p2_alone >= 1.0
}

/// Bound on `gamma1 * gamma2` under which the IAN region is convex, for any
/// powers.
pub fn ian_convexity_threshold(topo: &Topology) -> f64 {
    let l = |tx, rx| topo.gain(tx, rx);
    l(Link::One, Link::One) * l(Link::Two, Link::Two)
        / (l(Link::One, Link::Two) * l(Link::Two, Link::One))
}

/// Whether SIC beats IAN at destination `link`, via the closed-form
/// inequality (the common `exp(-phi)` factor divided out).
pub fn sic_preferred(link: Link, topo: &Topology, pw: &PowerAllocation, th: &SinrThresholds) -> bool {
    let (i, j) = (link, link.other());
    let own = pw.power(i) * topo.gain(i, i);
    let cross = pw.power(j) * topo.gain(j, i);
    let (gamma_i, gamma_j) = (th.gamma(i), th.gamma(j));
    if own == 0.0 && gamma_i > 0.0 {
        // Neither strategy can decode a silent source.
        return false;
    }
    let lhs = (1.0 + gamma_j * ratio(own, cross)) / (1.0 + gamma_i * ratio(cross, own));
    let rhs = (-gamma_j * (1.0 + gamma_i) * ratio(1.0, cross)).exp();
    lhs < rhs
}

/// Direct comparison of the two success probabilities.
pub fn sic_beats_ian(link: Link, topo: &Topology, pw: &PowerAllocation, th: &SinrThresholds) -> bool {
    ian_success(link, topo, pw, th) < sic_success(link, topo, pw, th)
}

impl StabilityRegion {
    /// True when a success or access probability is zero; such regions may
    /// be empty or collapse onto an axis.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Shared corner of the two sub-regions.
    pub fn corner(&self) -> (f64, f64) {
        let (q1, q2) = self.access.probabilities();
        let p = &self.profile;
        (
            q1 * ((1.0 - q2) * p.p1_alone + q2 * p.p1_both),
            q2 * ((1.0 - q1) * p.p2_alone + q1 * p.p2_both),
        )
    }

    /// Axis intercepts `(lambda1 max, lambda2 max)` of the region's closure.
    pub fn intercepts(&self) -> (f64, f64) {
        let (q1, q2) = self.access.probabilities();
        (q1 * self.profile.p1_alone, q2 * self.profile.p2_alone)
    }

    pub fn contains(&self, lambda1: f64, lambda2: f64) -> bool {
        self.sub1.contains(lambda1, lambda2) || self.sub2.contains(lambda1, lambda2)
    }

    /// `sup { lambda2 : contains(lambda1, lambda2) }`, or 0 when no rate pair
    /// with this `lambda1` is stable.
    pub fn boundary_lambda2(&self, lambda1: f64) -> f64 {
        if lambda1 < 0.0 {
            return 0.0;
        }
        let a = self.sub1.sup_lambda2(lambda1);
        let b = self.sub2.sup_lambda2(lambda1);
        a.into_iter().chain(b).fold(0.0, f64::max)
    }

    /// Vertices of the closure's outer boundary, from the `lambda2` axis to
    /// the `lambda1` axis.
    pub fn vertices(&self) -> Vec<(f64, f64)> {
        let (x_max, y_max) = self.intercepts();
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(3);
        for v in [(0.0, y_max), self.corner(), (x_max, 0.0)] {
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
        out
    }

    /// Convexity of the region's closure: the corner lies on or above the
    /// chord joining the two axis intercepts.
    pub fn is_convex(&self) -> bool {
        let (x_max, y_max) = self.intercepts();
        if x_max == 0.0 || y_max == 0.0 {
            return true;
        }
        let (cx, cy) = self.corner();
        cx / x_max + cy / y_max >= 1.0
    }
}
