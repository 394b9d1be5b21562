//! Monte Carlo estimates of the decoding events.
//!
//! Channels are drawn as circularly symmetric complex Gaussian vectors and
//! the beamformers are formed explicitly, so MISO estimates do not rely on
//! the Gamma laws used by the closed forms.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{
    decodes, Antennas, Link, PowerAllocation, ReceiverStrategy, Scenario, SinrThresholds,
    StrategyPair, Topology,
};
use crate::error::{domain, Result};

/// Samples per independently seeded Monte Carlo task.
pub const MC_CHUNK: u64 = 1 << 16;

/// Random stream `stream` of the master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

fn cn_vec<R: Rng + ?Sized>(rng: &mut R, len: u32) -> Vec<Complex64> {
    (0..len).map(|_| cn(rng)).collect()
}

/// `a^H b`
fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Unit-norm projection of `h` onto the orthogonal complement of `g`.
fn zero_forcing_beam(h: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let coeff = inner(g, h) / norm_sqr(g);
    let v: Vec<Complex64> = h.iter().zip(g).map(|(hk, gk)| hk - gk * coeff).collect();
    let norm = norm_sqr(&v).sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// Power gain `|h_own^H w|^2` of a source's own link.
fn own_gain<R: Rng + ?Sized>(tx: &ReceiverStrategy, rng: &mut R) -> f64 {
    match tx.antennas {
        Antennas::Single => cn(rng).norm_sqr(),
        Antennas::Mrt(m) => norm_sqr(&cn_vec(rng, m)),
        Antennas::Zf(m) => {
            let own = cn_vec(rng, m);
            let cross = cn_vec(rng, m);
            inner(&own, &zero_forcing_beam(&own, &cross)).norm_sqr()
        }
    }
}

/// Power gain `|h_cross^H w|^2` that a source leaks into the other
/// destination.
fn leaked_gain<R: Rng + ?Sized>(tx: &ReceiverStrategy, rng: &mut R) -> f64 {
    match tx.antennas {
        Antennas::Single => cn(rng).norm_sqr(),
        Antennas::Mrt(m) => {
            let own = cn_vec(rng, m);
            let cross = cn_vec(rng, m);
            let scale = norm_sqr(&own).sqrt();
            (inner(&cross, &own) / scale).norm_sqr()
        }
        Antennas::Zf(m) => {
            let own = cn_vec(rng, m);
            let cross = cn_vec(rng, m);
            inner(&cross, &zero_forcing_beam(&own, &cross)).norm_sqr()
        }
    }
}

/// Empirical frequency of the decoding event of `link` over `n` independent
/// fading realizations. The result depends only on `(seed, n)`, not on how
/// the work is scheduled across threads.
#[allow(clippy::too_many_arguments)]
pub fn mc_success(
    strategies: &StrategyPair,
    link: Link,
    scenario: Scenario,
    topo: &Topology,
    pw: &PowerAllocation,
    th: &SinrThresholds,
    n: u64,
    seed: u64,
) -> Result<f64> {
    if n == 0 {
        return Err(domain("sample count must be positive"));
    }
    strategies.validate()?;
    topo.validate()?;
    pw.validate()?;
    th.validate()?;
    let rx = strategies.get(link);
    let interferer = strategies.get(link.other());
    let tasks = n.div_ceil(MC_CHUNK);
    let hits: u64 = (0..tasks)
        .into_par_iter()
        .map(|task| {
            let count = MC_CHUNK.min(n - task * MC_CHUNK);
            let mut rng = stream_rng(seed, task);
            let mut hits = 0u64;
            for _ in 0..count {
                let own = own_gain(&rx, &mut rng);
                let cross = match scenario {
                    Scenario::Alone => None,
                    Scenario::Both => Some(leaked_gain(&interferer, &mut rng)),
                };
                if decodes(&rx, link, topo, pw, th, own, cross) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(hits as f64 / n as f64)
}
