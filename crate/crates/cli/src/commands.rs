use std::path::Path;

use icstab_core::channel::{
    mc_success, success_probability, success_profile, Link, Scenario, SuccessProfile,
};
use icstab_core::closure::{
    boundary_trace, closure_over_access_and_power, closure_over_power, uniform_grid, GridResolution,
};
use icstab_core::region::{region_general, region_random_access, StabilityRegion};
use icstab_core::sim::{
    empirical_boundary, majority_verdict, run_seeds, run_traced, SimConfig, SimResult, Verdict,
};
use icstab_core::Error;
use serde::Serialize;

use crate::config::{ExperimentConfig, SweepKind};
use crate::format::{float, write_csv, write_json};
use crate::CliError;

pub const REGION_HEADER: [&str; 2] = ["lambda1", "lambda2"];
pub const CLOSURE_HEADER: [&str; 6] = ["lambda1", "lambda2_max", "p1", "p2", "q1", "q2"];
pub const VALIDATE_HEADER: [&str; 7] =
    ["strategy", "link", "scenario", "closed_form", "mc_estimate", "abs_gap", "pass"];
pub const SIMULATE_HEADER: [&str; 9] = [
    "seed", "mu1_hat", "mu2_hat", "q1_mean_len", "q2_mean_len", "drift1", "drift2", "verdict1", "verdict2",
];
pub const BOUNDARY_HEADER: [&str; 4] = ["lambda1", "lambda2_empirical", "lambda2_analytical", "abs_gap"];

fn require_seed(seed: Option<u64>, command: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Config(format!("{command} needs an explicit --seed")))
}

fn analytical_region(config: &ExperimentConfig) -> Result<(SuccessProfile, StabilityRegion), CliError> {
    let profile = success_profile(&config.strategy, &config.topology, &config.powers, &config.thresholds)?;
    let region = match config.access {
        Some(a) => region_random_access(&profile, a.q1, a.q2)?,
        None => region_general(&profile)?,
    };
    Ok((profile, region))
}

/// Closed forms against Monte Carlo for every link and scenario. A row
/// passes when the gap is within five binomial standard deviations.
pub fn validate(config: &ExperimentConfig, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let seed = require_seed(seed, "validate")?;
    let section = config.validate.clone().unwrap_or_default();
    let n = section.samples;
    let pairs = section.strategies.unwrap_or_else(|| vec![config.strategy]);
    let (topo, pw, th) = (&config.topology, &config.powers, &config.thresholds);

    let mut rows = Vec::new();
    let mut failures = 0;
    for pair in &pairs {
        for link in Link::BOTH {
            for scenario in [Scenario::Alone, Scenario::Both] {
                let stream = seed.wrapping_add(rows.len() as u64);
                let closed = success_probability(pair, link, scenario, topo, pw, th)?;
                let mc = mc_success(pair, link, scenario, topo, pw, th, n, stream)?;
                let gap = (closed - mc).abs();
                let sigma = (closed * (1.0 - closed) / n as f64).sqrt().max(1.0 / n as f64);
                let pass = gap <= 5.0 * sigma;
                if !pass {
                    failures += 1;
                }
                rows.push(vec![
                    pair.label(),
                    link.to_string(),
                    scenario.as_str().to_string(),
                    float(closed),
                    float(mc),
                    float(gap),
                    pass.to_string(),
                ]);
            }
        }
    }
    write_csv(&out.join("validate.csv"), &VALIDATE_HEADER, &rows)?;
    println!("validate: {} rows, {failures} outside 5 sigma", rows.len());
    if failures > 0 {
        return Err(CliError::Failed(format!("{failures} closed-form checks failed")));
    }
    Ok(())
}

#[derive(Serialize)]
struct RegionSummary {
    strategy: String,
    access: [f64; 2],
    profile: SuccessProfile,
    convex: bool,
    degenerate: bool,
    corner: [f64; 2],
    intercepts: [f64; 2],
}

pub fn region(config: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let (profile, region) = analytical_region(config)?;
    let grid = uniform_grid(0.0, 1.0, config.lambda1_points());
    let trace = boundary_trace(&region, &grid)?;
    let pair_rows = |pts: &[(f64, f64)]| pts.iter().map(|&(x, y)| vec![float(x), float(y)]).collect::<Vec<_>>();
    write_csv(&out.join("region.csv"), &REGION_HEADER, &pair_rows(&trace))?;
    write_csv(&out.join("vertices.csv"), &REGION_HEADER, &pair_rows(&region.vertices()))?;

    let (q1, q2) = region.access.probabilities();
    let (cx, cy) = region.corner();
    let (ix, iy) = region.intercepts();
    let summary = RegionSummary {
        strategy: config.strategy.label(),
        access: [q1, q2],
        profile,
        convex: region.is_convex(),
        degenerate: region.is_degenerate(),
        corner: [cx, cy],
        intercepts: [ix, iy],
    };
    write_json(&out.join("summary.json"), &summary)?;
    println!(
        "region {}: corner ({}, {}), convex={}{}",
        summary.strategy,
        float(cx),
        float(cy),
        summary.convex,
        if summary.degenerate { ", degenerate" } else { "" }
    );
    Ok(())
}

#[derive(Serialize)]
struct ClosureMeta {
    strategy: String,
    kind: SweepKind,
    p_max: f64,
    resolution: GridResolution,
    tie_break: &'static str,
    concavity_defect: f64,
}

pub fn closure(config: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let (kind, spec) = config.sweep_spec()?;
    let (topo, th) = (&config.topology, &config.thresholds);
    let curve = match kind {
        SweepKind::Power => closure_over_power(&config.strategy, topo, th, &spec)?,
        SweepKind::Access | SweepKind::AccessAndPower => {
            closure_over_access_and_power(&config.strategy, topo, th, &spec)?
        }
    };
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|p| [p.lambda1, p.lambda2_max, p.p1, p.p2, p.q1, p.q2].map(float).to_vec())
        .collect();
    write_csv(&out.join("closure.csv"), &CLOSURE_HEADER, &rows)?;
    let meta = ClosureMeta {
        strategy: config.strategy.label(),
        kind,
        p_max: curve.p_max,
        resolution: curve.resolution,
        tie_break: "largest lambda2, then lexicographically smallest (p1, p2, q1, q2)",
        concavity_defect: curve.concavity_defect(),
    };
    write_json(&out.join("closure_meta.json"), &meta)?;
    println!("closure {}: {} points over {} cells", meta.strategy, rows.len(), spec.cells());
    Ok(())
}

#[derive(Serialize)]
struct BoundaryPoint {
    lambda1: f64,
    lambda2_empirical: Option<f64>,
    lambda2_analytical: f64,
    /// Bracketing interval when the bisection could not decide.
    inconclusive: Option<[f64; 2]>,
}

#[derive(Serialize)]
struct SimSummary {
    strategy: String,
    lambda: [f64; 2],
    horizon: u64,
    seeds: Vec<u64>,
    verdict: Verdict,
    boundary: Vec<BoundaryPoint>,
}

fn sim_row(r: &SimResult) -> Vec<String> {
    vec![
        r.seed.to_string(),
        float(r.mu_hat[0]),
        float(r.mu_hat[1]),
        float(r.mean_len[0]),
        float(r.mean_len[1]),
        float(r.drift[0]),
        float(r.drift[1]),
        r.verdict[0].as_str().to_string(),
        r.verdict[1].as_str().to_string(),
    ]
}

pub fn simulate(config: &ExperimentConfig, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let seed = require_seed(seed, "simulate")?;
    let section = config.sim.clone().unwrap_or_default();
    let mut base = SimConfig::new(
        config.topology,
        config.powers,
        config.thresholds,
        config.strategy,
        section.horizon,
        seed,
    )
    .with_dominant(section.dominant);
    if let Some(a) = config.access {
        base = base.with_access(a.q1, a.q2);
    }
    let seeds: Vec<u64> = (0..section.runs as u64).map(|k| seed.wrapping_add(k)).collect();
    let results = run_seeds(&base, section.lambda1, section.lambda2, &seeds)?;
    write_csv(&out.join("sim.csv"), &SIMULATE_HEADER, &results.iter().map(sim_row).collect::<Vec<_>>())?;

    if let Some(every) = section.trace_every {
        let first = base.clone().with_arrivals(section.lambda1, section.lambda2);
        let (_, trace) = run_traced(&first, every)?;
        let rows: Vec<Vec<String>> =
            trace.iter().map(|&(t, a, b)| vec![t.to_string(), a.to_string(), b.to_string()]).collect();
        write_csv(&out.join("trace.csv"), &["slot", "q1", "q2"], &rows)?;
    }

    let mut boundary = Vec::new();
    if let Some(b) = &section.boundary {
        let (_, region) = analytical_region(config)?;
        // Majority votes need at least three runs.
        let votes: Vec<u64> = (0..seeds.len().max(3) as u64).map(|k| seed.wrapping_add(k)).collect();
        let mut rows = Vec::new();
        for &l1 in &b.lambda1 {
            let exact = region.boundary_lambda2(l1);
            let point = match empirical_boundary(&base, l1, b.tol, &votes) {
                Ok(emp) => {
                    rows.push(vec![float(l1), float(emp), float(exact), float((emp - exact).abs())]);
                    BoundaryPoint { lambda1: l1, lambda2_empirical: Some(emp), lambda2_analytical: exact, inconclusive: None }
                }
                Err(Error::Inconclusive { lo, hi }) => {
                    rows.push(vec![float(l1), String::new(), float(exact), String::new()]);
                    BoundaryPoint { lambda1: l1, lambda2_empirical: None, lambda2_analytical: exact, inconclusive: Some([lo, hi]) }
                }
                Err(e) => return Err(e.into()),
            };
            boundary.push(point);
        }
        write_csv(&out.join("boundary.csv"), &BOUNDARY_HEADER, &rows)?;
    }

    let summary = SimSummary {
        strategy: config.strategy.label(),
        lambda: [section.lambda1, section.lambda2],
        horizon: section.horizon,
        seeds,
        verdict: majority_verdict(&results),
        boundary,
    };
    write_json(&out.join("simulate_summary.json"), &summary)?;
    println!("simulate {}: majority verdict {}", summary.strategy, summary.verdict.as_str());
    if summary.verdict == Verdict::Inconclusive {
        return Err(CliError::Inconclusive("majority verdict is inconclusive".into()));
    }
    if summary.boundary.iter().any(|p| p.inconclusive.is_some()) {
        return Err(CliError::Inconclusive("empirical boundary search was inconclusive".into()));
    }
    Ok(())
}
