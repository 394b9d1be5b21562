//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line to
//! stdout (bypassing the test harness capture) and the test fails if any of
//! them fails.

mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use icstab_core::channel::{
    general_success, ian_success, mc_success, sic_success, success_probability, success_profile,
    FadingCoefficientSpec, Link, PowerAllocation, RayleighInterference, ReceiverStrategy,
    Scenario, SinrThresholds, StrategyPair, SuccessProfile, Topology,
};
use icstab_core::closure::{boundary_trace, closure_over_power, SweepSpec};
use icstab_core::region::{
    ian_convexity_threshold, is_convex, region_general, region_random_access, sic_preferred,
};
use icstab_core::sim::{
    empirical_boundary, run_seeds, saturated_service, DominantMode, SimConfig, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn closed_form_validation() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    let mut seed = 1000;
    for (name, topo, pw, th) in settings() {
        for (label, pair) in strategy_pairs() {
            let profile = success_profile(&pair, &topo, &pw, &th).unwrap();
            for link in Link::BOTH {
                for scenario in [Scenario::Alone, Scenario::Both] {
                    seed += 1;
                    let mc = mc_success(&pair, link, scenario, &topo, &pw, &th, 1_000_000, seed).unwrap();
                    let gap = (mc - profile.get(link, scenario)).abs();
                    if gap > worst {
                        worst = gap;
                        worst_at = format!("{name} {label} gamma=({},{}) link {link} {}", th.gamma1, th.gamma2, scenario.as_str());
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 0.005 && within(elapsed, 60),
        format!("48 entries, max |mc - closed| = {worst:.5} at {worst_at} (limit 0.005), {elapsed:.1?} (limit 60 s)"),
    )
}

fn sic_integral_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    while accepted < 100 {
        let topo = Topology::new(
            rng.random_range(2.0..20.0),
            rng.random_range(2.0..20.0),
            rng.random_range(2.0..20.0),
            rng.random_range(2.0..20.0),
            rng.random_range(2.0..4.0),
        )
        .unwrap();
        let pw = PowerAllocation::new(rng.random_range(10.0..1000.0), rng.random_range(10.0..1000.0)).unwrap();
        let th = SinrThresholds::new(rng.random_range(0.05..3.0), rng.random_range(0.05..3.0)).unwrap();
        let link = if rng.random::<bool>() { Link::One } else { Link::Two };
        let closed = sic_success(link, &topo, &pw, &th);
        // Relative error is meaningless once the probability underflows.
        if closed < 1e-12 {
            continue;
        }
        accepted += 1;
        worst = worst.max(rel_err(closed, sic_by_quadrature(link, &topo, &pw, &th)));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && within(elapsed, 10),
        format!("100 draws, max relative error {worst:.2e} (limit 1e-6), {elapsed:.1?} (limit 10 s)"),
    )
}

fn general_success_reductions() -> Outcome {
    let mut worst_k0: f64 = 0.0;
    let mut worst_mrt1: f64 = 0.0;
    let mrt1 = StrategyPair::uniform(ReceiverStrategy::mrt(1));
    for (_, topo, pw, th) in settings() {
        for link in Link::BOTH {
            let (i, j) = (link, link.other());
            let ian = ian_success(link, &topo, &pw, &th);
            let phi = th.gamma(i) / (pw.power(i) * topo.gain(i, i));
            let lt = RayleighInterference::new(pw.power(j) * topo.gain(j, i));
            let k0 = general_success(&FadingCoefficientSpec::rayleigh(), phi, &lt).unwrap();
            worst_k0 = worst_k0.max(rel_err(k0, ian));
            let m1 = success_probability(&mrt1, link, Scenario::Both, &topo, &pw, &th).unwrap();
            worst_mrt1 = worst_mrt1.max(rel_err(m1, ian));
        }
    }
    let (topo, pw) = t1();
    let th = low_gamma();
    let mrt2 = StrategyPair::uniform(ReceiverStrategy::mrt(2));
    let closed = success_probability(&mrt2, Link::One, Scenario::Both, &topo, &pw, &th).unwrap();
    let mc = mc_success(&mrt2, Link::One, Scenario::Both, &topo, &pw, &th, 1_000_000, 77).unwrap();
    let gap = (closed - mc).abs();
    outcome(
        worst_k0 <= 1e-12 && worst_mrt1 <= 1e-12 && gap <= 0.005,
        format!(
            "K={{0}} vs IAN rel err {worst_k0:.1e}, MRT M=1 vs IAN rel err {worst_mrt1:.1e} (limit 1e-12); \
             MRT M=2 closed {closed:.6} vs MC {mc:.6}, gap {gap:.5} (limit 0.005)"
        ),
    )
}

fn random_profile(rng: &mut ChaCha8Rng) -> SuccessProfile {
    let a1 = rng.random_range(0.01..=1.0);
    let a2 = rng.random_range(0.01..=1.0);
    SuccessProfile::new(a1, a2, a1 * rng.random_range(0.001..=1.0), a2 * rng.random_range(0.001..=1.0))
}

fn region_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut residual: f64 = 0.0;
    for _ in 0..10_000 {
        let p = random_profile(&mut rng);
        let r = region_general(&p).unwrap();
        let (cx, cy) = r.corner();
        residual = residual
            .max((r.sub1.c1 * cx + r.sub1.c2 * cy - 1.0).abs())
            .max((r.sub2.c1 * cx + r.sub2.c2 * cy - 1.0).abs());
    }

    let mut profiles = Vec::new();
    for (_, topo, pw, th) in settings() {
        for (_, pair) in strategy_pairs() {
            profiles.push(success_profile(&pair, &topo, &pw, &th).unwrap());
        }
    }
    profiles.extend((0..8).map(|_| random_profile(&mut rng)));
    let mut mismatches = 0;
    for p in &profiles {
        let general = region_general(p).unwrap();
        let ra = region_random_access(p, 1.0, 1.0).unwrap();
        for i in 0..200 {
            for j in 0..200 {
                let (l1, l2) = (i as f64 / 199.0, j as f64 / 199.0);
                if general.contains(l1, l2) != ra.contains(l1, l2) {
                    mismatches += 1;
                }
            }
        }
    }

    let mut disagreements = 0;
    let mut drawn = 0;
    while drawn < 1000 {
        let topo = Topology::new(
            rng.random_range(1.0..30.0),
            rng.random_range(1.0..30.0),
            rng.random_range(1.0..30.0),
            rng.random_range(1.0..30.0),
            rng.random_range(2.0..5.0),
        )
        .unwrap();
        let pw = PowerAllocation::new(rng.random_range(1.0..1000.0), rng.random_range(1.0..1000.0)).unwrap();
        let th = SinrThresholds::new(rng.random_range(0.01..5.0), rng.random_range(0.01..5.0)).unwrap();
        let profile = success_profile(&StrategyPair::ian(), &topo, &pw, &th).unwrap();
        // The ratio condition needs non-vanishing single-user success.
        if profile.p1_alone < 1e-100 || profile.p2_alone < 1e-100 {
            continue;
        }
        drawn += 1;
        let by_threshold = th.gamma1 * th.gamma2 <= ian_convexity_threshold(&topo);
        if by_threshold != is_convex(&profile) {
            disagreements += 1;
        }
    }
    outcome(
        residual <= 1e-12 && mismatches == 0 && disagreements == 0,
        format!(
            "corner residual {residual:.1e} (limit 1e-12); RA(1,1) vs general: {mismatches} mismatches over {} grids of 200x200; \
             IAN convexity threshold vs general condition: {disagreements}/1000 disagreements",
            profiles.len()
        ),
    )
}

fn qualitative_findings() -> Outcome {
    let (topo, pw) = t1();
    let th = low_gamma();
    let sic = success_profile(&StrategyPair::sic(), &topo, &pw, &th).unwrap();
    let ian = success_profile(&StrategyPair::ian(), &topo, &pw, &th).unwrap();
    let sic_convex = is_convex(&sic);
    let ian_convex = is_convex(&ian);
    let pref = Link::BOTH.map(|l| sic_preferred(l, &topo, &pw, &th));

    let (topo2, _) = t2();
    let th2 = high_gamma();
    let spec = SweepSpec::power_sweep(800.0, SweepSpec::DEFAULT_POWER_POINTS, SweepSpec::DEFAULT_LAMBDA1_POINTS);
    let mut defects = Vec::new();
    for (label, pair) in strategy_pairs() {
        let curve = closure_over_power(&pair, &topo2, &th2, &spec).unwrap();
        defects.push((label, curve.concavity_defect()));
    }
    let all_nonconvex = defects.iter().all(|&(_, d)| d > 0.02);
    let listed: Vec<String> = defects.iter().map(|(l, d)| format!("{l} {d:.3}")).collect();
    outcome(
        sic_convex && !ian_convex && pref == [true, true] && all_nonconvex,
        format!(
            "T1: convex SIC={sic_convex} IAN={ian_convex}, SIC preferred at D1={} D2={}; \
             T2 closure concavity defects [{}] (non-convex if > 0.02)",
            pref[0],
            pref[1],
            listed.join(", ")
        ),
    )
}

fn ian_t1_base() -> (SimConfig, icstab_core::region::StabilityRegion) {
    let (topo, pw) = t1();
    let th = low_gamma();
    let profile = success_profile(&StrategyPair::ian(), &topo, &pw, &th).unwrap();
    let base = SimConfig::new(topo, pw, th, StrategyPair::ian(), 1_000_000, 0);
    (base, region_general(&profile).unwrap())
}

fn simulator_agreement() -> Outcome {
    let start = Instant::now();
    let mut worst_mu: f64 = 0.0;
    let mut seed = 500;
    for (_, topo, pw, th) in settings() {
        for (_, pair) in strategy_pairs() {
            seed += 1;
            let profile = success_profile(&pair, &topo, &pw, &th).unwrap();
            let config = SimConfig::new(topo, pw, th, pair, 1_000_000, seed)
                .with_dominant(DominantMode::BothSaturated);
            let (mu1, mu2) = saturated_service(&config).unwrap();
            worst_mu = worst_mu.max((mu1 - profile.p1_both).abs()).max((mu2 - profile.p2_both).abs());
        }
    }

    let (base, region) = ian_t1_base();
    let seeds = [11, 12, 13];
    let mut worst_boundary: f64 = 0.0;
    let mut boundary_notes = Vec::new();
    for l1 in [0.0, 0.15, 0.313] {
        let emp = empirical_boundary(&base, l1, 0.005, &seeds).unwrap();
        let exact = region.boundary_lambda2(l1);
        worst_boundary = worst_boundary.max((emp - exact).abs());
        boundary_notes.push(format!("{l1}: {emp:.4}/{exact:.4}"));
    }

    let seeds5 = [21, 22, 23, 24, 25];
    let mut min_correct = 5;
    let (cx, _) = region.corner();
    for l1 in [0.1, cx, 0.6] {
        let l2 = region.boundary_lambda2(l1);
        for (scale, expect) in [(0.9, Verdict::Stable), (1.1, Verdict::Unstable)] {
            let (a, b) = (scale * l1, scale * l2);
            assert_eq!(region.contains(a, b), expect == Verdict::Stable, "probe ({a}, {b})");
            let results = run_seeds(&base, a, b, &seeds5).unwrap();
            let correct = results.iter().filter(|r| r.system_verdict() == expect).count();
            min_correct = min_correct.min(correct);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst_mu <= 0.01 && worst_boundary <= 0.02 && min_correct >= 4 && within(elapsed, 300),
        format!(
            "saturated max |mu_hat - closed| = {worst_mu:.4} over 12 configs (limit 0.01); \
             boundary lambda1: empirical/exact [{}] max gap {worst_boundary:.4} (limit 0.02); \
             verdicts at 0.9x/1.1x of 3 boundary points: min {min_correct}/5 correct (need 4); {elapsed:.1?} (limit 300 s)",
            boundary_notes.join(", ")
        ),
    )
}

fn closure_reproduction() -> Outcome {
    let start = Instant::now();
    let (topo, pw) = t1();
    let th = low_gamma();
    let spec = SweepSpec::power_sweep(800.0, SweepSpec::DEFAULT_POWER_POINTS, SweepSpec::DEFAULT_LAMBDA1_POINTS);
    let cell = spec.lambda1[1] - spec.lambda1[0];
    let excess = |pair: StrategyPair| -> (f64, f64) {
        let curve = closure_over_power(&pair, &topo, &th, &spec).unwrap();
        let profile = success_profile(&pair, &topo, &pw, &th).unwrap();
        let fixed = boundary_trace(&region_general(&profile).unwrap(), &spec.lambda1).unwrap();
        let gaps: Vec<f64> = curve.points.iter().zip(&fixed).map(|(c, f)| c.lambda2_max - f.1).collect();
        (gaps.iter().copied().fold(f64::INFINITY, f64::min), gaps.iter().copied().fold(0.0, f64::max))
    };
    let (sic_min, sic_max) = excess(StrategyPair::sic());
    let (_, ian_max) = excess(StrategyPair::ian());
    let elapsed = start.elapsed();
    outcome(
        sic_min >= 0.0 && sic_max <= cell && ian_max > cell && within(elapsed, 120),
        format!(
            "grid cell {cell}; SIC envelope - max-power boundary in [{sic_min:.4}, {sic_max:.4}]; \
             IAN max excess {ian_max:.4} (must exceed one cell); {elapsed:.1?} (limit 120 s)"
        ),
    )
}

#[test]
fn acceptance_criteria() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 7] = [
        ("closed-form vs Monte Carlo", closed_form_validation),
        ("SIC integral oracle", sic_integral_oracle),
        ("general success reductions", general_success_reductions),
        ("region structure", region_structure),
        ("qualitative findings", qualitative_findings),
        ("simulator agreement", simulator_agreement),
        ("closure reproduction", closure_reproduction),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let n = k + 1;
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if result.pass { "PASS" } else { "FAIL" };
        writeln!(out, "acceptance criterion {n} [{tag}] {name}: {}", result.detail).unwrap();
        out.flush().unwrap();
        if !result.pass {
            failed.push(n);
        }
    }
    assert!(failed.is_empty(), "failed acceptance criteria: {failed:?}");
}
