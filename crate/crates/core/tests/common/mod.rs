#![allow(dead_code)]

use icstab_core::channel::{Link, PowerAllocation, SinrThresholds, StrategyPair, Topology};

pub fn t1() -> (Topology, PowerAllocation) {
    (Topology::new(10.0, 5.0, 5.0, 10.0, 2.0).unwrap(), PowerAllocation::new(800.0, 800.0).unwrap())
}

pub fn t2() -> (Topology, PowerAllocation) {
    (Topology::new(14.0, 15.0, 10.0, 14.0, 2.0).unwrap(), PowerAllocation::new(600.0, 450.0).unwrap())
}

pub fn low_gamma() -> SinrThresholds {
    SinrThresholds::new(0.5, 0.4).unwrap()
}

pub fn high_gamma() -> SinrThresholds {
    SinrThresholds::new(2.0, 1.4).unwrap()
}

pub fn strategy_pairs() -> [(&'static str, StrategyPair); 3] {
    [("IAN-IAN", StrategyPair::ian()), ("SIC-SIC", StrategyPair::sic()), ("SIC-IAN", StrategyPair::sic_ian())]
}

/// Both reference topologies at both threshold pairs.
pub fn settings() -> Vec<(&'static str, Topology, PowerAllocation, SinrThresholds)> {
    let mut out = Vec::new();
    for (name, (topo, pw)) in [("T1", t1()), ("T2", t2())] {
        for th in [low_gamma(), high_gamma()] {
            out.push((name, topo, pw, th));
        }
    }
    out
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    adapt(f, a, fa, b, fb, m, fm, whole, tol, 60)
}

/// SIC success probability at destination `link` as the integral over the
/// normalized own-signal gain `x >= gamma_i / (p_i l_ii)` of
/// `Pr(interferer decodable | x) * e^-x`.
pub fn sic_by_quadrature(link: Link, topo: &Topology, pw: &PowerAllocation, th: &SinrThresholds) -> f64 {
    let (i, j) = (link, link.other());
    let own = pw.power(i) * topo.gain(i, i);
    let cross = pw.power(j) * topo.gain(j, i);
    let (gi, gj) = (th.gamma(i), th.gamma(j));
    let phi = gi / own;
    let integrand = move |x: f64| (-(gj + gj * own * x) / cross).exp() * (-x).exp();
    // The integrand is decreasing, so its value at the left end sets the scale.
    let tol = 1e-13 * integrand(phi);
    integrate(&integrand, phi, phi + 60.0, tol)
}
