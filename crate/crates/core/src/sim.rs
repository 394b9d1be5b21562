//! Slot-level simulation of the two coupled queues.
//!
//! Each slot: a source transmits if it holds a packet (or is in dummy mode)
//! and its access coin comes up; fading gains are redrawn independently;
//! decoded head-of-line packets leave the queue, failed ones stay for the
//! next slot. Bernoulli arrivals of slot `t` join the queue after the
//! transmissions of slot `t`, so they can be served from slot `t + 1` on.
//!
//! Stability is judged from the least-squares slope of the queue length
//! over the second half of the run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    decodes, Link, PowerAllocation, ReceiverStrategy, SinrThresholds, StrategyPair, Topology,
};
use crate::error::{config, domain, Error, Result};

/// Which sources send dummy packets when their queue is empty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominantMode {
    #[default]
    None,
    Source1Dummy,
    Source2Dummy,
    BothSaturated,
}

impl DominantMode {
    fn dummy(self, link: Link) -> bool {
        matches!(
            (self, link),
            (DominantMode::BothSaturated, _)
                | (DominantMode::Source1Dummy, Link::One)
                | (DominantMode::Source2Dummy, Link::Two)
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub topo: Topology,
    pub pw: PowerAllocation,
    pub th: SinrThresholds,
    pub strategies: StrategyPair,
    /// Bernoulli arrival probabilities per slot.
    pub lambda: [f64; 2],
    /// Transmission probabilities of a backlogged source.
    pub access: [f64; 2],
    pub dominant: DominantMode,
    pub horizon: u64,
    pub seed: u64,
}

impl SimConfig {
    /// Saturated access, no dummy packets, no arrivals.
    pub fn new(
        topo: Topology,
        pw: PowerAllocation,
        th: SinrThresholds,
        strategies: StrategyPair,
        horizon: u64,
        seed: u64,
    ) -> Self {
        SimConfig {
            topo,
            pw,
            th,
            strategies,
            lambda: [0.0, 0.0],
            access: [1.0, 1.0],
            dominant: DominantMode::None,
            horizon,
            seed,
        }
    }

    pub fn with_arrivals(mut self, lambda1: f64, lambda2: f64) -> Self {
        self.lambda = [lambda1, lambda2];
        self
    }

    pub fn with_access(mut self, q1: f64, q2: f64) -> Self {
        self.access = [q1, q2];
        self
    }

    pub fn with_dominant(mut self, mode: DominantMode) -> Self {
        self.dominant = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.topo.validate()?;
        self.pw.validate()?;
        self.th.validate()?;
        self.strategies.validate()?;
        for l in self.lambda {
            if !(0.0..=1.0).contains(&l) {
                return Err(domain(format!("arrival rate {l} is outside [0, 1]")));
            }
        }
        for q in self.access {
            if !(0.0..=1.0).contains(&q) {
                return Err(domain(format!("access probability {q} is outside [0, 1]")));
            }
        }
        if self.horizon == 0 {
            return Err(config("horizon must be at least one slot"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "Stable",
            Verdict::Unstable => "Unstable",
            Verdict::Inconclusive => "Inconclusive",
        }
    }

    /// Joint verdict of both queues: any unstable queue makes the system
    /// unstable.
    pub fn combine(a: Verdict, b: Verdict) -> Verdict {
        match (a, b) {
            (Verdict::Unstable, _) | (_, Verdict::Unstable) => Verdict::Unstable,
            (Verdict::Stable, Verdict::Stable) => Verdict::Stable,
            _ => Verdict::Inconclusive,
        }
    }
}

/// Drift and backlog thresholds of the stability test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictThresholds {
    /// Largest second-half drift (packets/slot) still called stable.
    pub stable_drift: f64,
    /// Smallest drift called unstable.
    pub unstable_drift: f64,
    /// Stable runs must end with at most `cap_factor * sqrt(horizon)` packets.
    pub cap_factor: f64,
    pub min_horizon: u64,
}

impl Default for VerdictThresholds {
    fn default() -> Self {
        VerdictThresholds {
            stable_drift: 1e-3,
            unstable_drift: 5e-3,
            cap_factor: 10.0,
            min_horizon: 10_000,
        }
    }
}

/// Classifies one queue from its trajectory statistics.
pub fn verdict(drift: f64, final_len: u64, horizon: u64, th: &VerdictThresholds) -> Verdict {
    if horizon < th.min_horizon {
        return Verdict::Inconclusive;
    }
    let cap = th.cap_factor * (horizon as f64).sqrt();
    if drift <= th.stable_drift && final_len as f64 <= cap {
        Verdict::Stable
    } else if drift >= th.unstable_drift {
        Verdict::Unstable
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub seed: u64,
    pub horizon: u64,
    /// Successes per slot in which the source held a packet (or a dummy).
    pub mu_hat: [f64; 2],
    pub final_len: [u64; 2],
    pub mean_len: [f64; 2],
    /// Least-squares slope of the queue length over the second half.
    pub drift: [f64; 2],
    pub verdict: [Verdict; 2],
}

impl SimResult {
    pub fn system_verdict(&self) -> Verdict {
        Verdict::combine(self.verdict[0], self.verdict[1])
    }
}

/// Online least-squares slope of `y` against `x`.
#[derive(Default)]
struct Slope {
    n: f64,
    mean_x: f64,
    mean_y: f64,
    sxx: f64,
    sxy: f64,
}

impl Slope {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        let dx = x - self.mean_x;
        self.mean_x += dx / self.n;
        self.mean_y += (y - self.mean_y) / self.n;
        self.sxx += dx * (x - self.mean_x);
        self.sxy += dx * (y - self.mean_y);
    }

    fn slope(&self) -> f64 {
        if self.n < 2.0 || self.sxx == 0.0 {
            0.0
        } else {
            self.sxy / self.sxx
        }
    }
}

fn signal_gain<R: Rng + ?Sized>(rx: &ReceiverStrategy, rng: &mut R) -> f64 {
    (0..rx.signal_shape()).map(|_| rng.sample::<f64, _>(Exp1)).sum()
}

/// Runs the simulation, calling `observe(slot, queues)` with the queue
/// lengths at the start of every slot.
fn simulate(config: &SimConfig, mut observe: impl FnMut(u64, [u64; 2])) -> Result<SimResult> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rx = [config.strategies.receiver1, config.strategies.receiver2];
    let horizon = config.horizon;
    let half = horizon / 2;

    let mut queue = [0u64; 2];
    let mut opportunities = [0u64; 2];
    let mut successes = [0u64; 2];
    let mut len_sum = [0f64; 2];
    let mut slopes = [Slope::default(), Slope::default()];

    for t in 0..horizon {
        observe(t, queue);
        for i in 0..2 {
            len_sum[i] += queue[i] as f64;
            if t >= half {
                slopes[i].push(t as f64, queue[i] as f64);
            }
        }

        let mut active = [false; 2];
        for link in Link::BOTH {
            let i = link.index();
            let backlogged = queue[i] > 0 || config.dominant.dummy(link);
            if backlogged {
                opportunities[i] += 1;
                let q = config.access[i];
                active[i] = q >= 1.0 || (q > 0.0 && rng.random::<f64>() < q);
            }
        }

        let mut delivered = [false; 2];
        for link in Link::BOTH {
            let (i, j) = (link.index(), link.other().index());
            if !active[i] {
                continue;
            }
            let own = signal_gain(&rx[i], &mut rng);
            let cross = active[j].then(|| {
                if rx[j].leaks_interference() {
                    rng.sample::<f64, _>(Exp1)
                } else {
                    0.0
                }
            });
            delivered[i] =
                decodes(&rx[i], link, &config.topo, &config.pw, &config.th, own, cross);
        }

        for i in 0..2 {
            if delivered[i] {
                successes[i] += 1;
                queue[i] = queue[i].saturating_sub(1);
            }
            if rng.random::<f64>() < config.lambda[i] {
                queue[i] += 1;
            }
        }
    }

    let th = VerdictThresholds::default();
    let mut result = SimResult {
        seed: config.seed,
        horizon,
        mu_hat: [0.0; 2],
        final_len: queue,
        mean_len: [0.0; 2],
        drift: [0.0; 2],
        verdict: [Verdict::Inconclusive; 2],
    };
    for i in 0..2 {
        if opportunities[i] > 0 {
            result.mu_hat[i] = successes[i] as f64 / opportunities[i] as f64;
        }
        result.mean_len[i] = len_sum[i] / horizon as f64;
        result.drift[i] = slopes[i].slope();
        result.verdict[i] = verdict(result.drift[i], queue[i], horizon, &th);
    }
    Ok(result)
}

/// Sampled `(slot, q1, q2)` queue lengths.
pub type Trace = Vec<(u64, u64, u64)>;

/// Simulates `config.horizon` slots. Identical configs give identical
/// results.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    simulate(config, |_, _| {})
}

/// Like [`run`], also returning `(slot, q1, q2)` every `every` slots.
pub fn run_traced(config: &SimConfig, every: u64) -> Result<(SimResult, Trace)> {
    if every == 0 {
        return Err(config_err("trace interval must be positive"));
    }
    let mut trace = Vec::new();
    let result = simulate(config, |t, q| {
        if t % every == 0 {
            trace.push((t, q[0], q[1]));
        }
    })?;
    Ok((result, trace))
}

fn config_err(msg: &str) -> Error {
    config(msg)
}

/// Service rates with both sources forced to transmit dummy packets.
pub fn saturated_service(config: &SimConfig) -> Result<(f64, f64)> {
    if config.dominant != DominantMode::BothSaturated {
        return Err(config_err("saturated service needs the both-saturated dominant mode"));
    }
    let r = run(config)?;
    Ok((r.mu_hat[0], r.mu_hat[1]))
}

/// Majority verdict over independent runs.
pub fn majority_verdict(results: &[SimResult]) -> Verdict {
    let count = |v| results.iter().filter(|r| r.system_verdict() == v).count();
    let half = results.len() / 2;
    if count(Verdict::Stable) > half {
        Verdict::Stable
    } else if count(Verdict::Unstable) > half {
        Verdict::Unstable
    } else {
        Verdict::Inconclusive
    }
}

/// Runs `base` at the given arrival rates once per seed, in parallel.
pub fn run_seeds(base: &SimConfig, lambda1: f64, lambda2: f64, seeds: &[u64]) -> Result<Vec<SimResult>> {
    seeds
        .par_iter()
        .map(|&seed| run(&base.clone().with_arrivals(lambda1, lambda2).with_seed(seed)))
        .collect()
}

/// Largest stable `lambda2` at `lambda1`, found by bisection on `[0, 1]`
/// against the majority verdict over `seeds`.
///
/// A probe without a stable majority moves the upper end down. Returns 0
/// when `lambda2 = 0` is already unstable, and [`Error::Inconclusive`] when
/// even that probe is inconclusive.
pub fn empirical_boundary(base: &SimConfig, lambda1: f64, tol: f64, seeds: &[u64]) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(domain(format!("bisection tolerance must be positive, got {tol}")));
    }
    if seeds.len() < 3 {
        return Err(config("empirical boundary needs at least three seeds"));
    }
    match majority_verdict(&run_seeds(base, lambda1, 0.0, seeds)?) {
        Verdict::Stable => {}
        Verdict::Unstable => return Ok(0.0),
        Verdict::Inconclusive => return Err(Error::Inconclusive { lo: 0.0, hi: 1.0 }),
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if majority_verdict(&run_seeds(base, lambda1, mid, seeds)?) == Verdict::Stable {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
