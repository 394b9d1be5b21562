//! Per-link success probabilities.
//!
//! Fading power gains are unit-mean exponential (Rayleigh amplitudes) and the
//! noise power is 1, so transmit powers are noise-normalized. Link `i` runs
//! from source `S_i` to destination `D_i`; the cross link `S_j -> D_i` carries
//! the interference seen by `D_i`.
//!
//! Closed forms live here and in [`laplace`]; [`montecarlo`] estimates the
//! same quantities by sampling the decoding events directly.

mod laplace;
mod montecarlo;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub use laplace::{
    gamma_tail, general_success, FadingCoefficientSpec, LaplaceTable, LaplaceTransform,
    NoInterference, RayleighInterference,
};
pub use montecarlo::{mc_success, stream_rng, MC_CHUNK};

/// One of the two source/destination pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Link {
    One,
    Two,
}

impl Link {
    pub const BOTH: [Link; 2] = [Link::One, Link::Two];

    pub fn other(self) -> Link {
        match self {
            Link::One => Link::Two,
            Link::Two => Link::One,
        }
    }

    /// Zero-based index, handy for `[T; 2]` storage.
    pub fn index(self) -> usize {
        match self {
            Link::One => 0,
            Link::Two => 1,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Which transmitters are active in the slot, seen from one link.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Only the link's own source transmits.
    Alone,
    /// Both sources transmit.
    Both,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Alone => "alone",
            Scenario::Both => "both",
        }
    }
}

/// Power-law pathloss `r^(-alpha)`.
pub fn pathloss(r: f64, alpha: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain(format!("distance must be positive and finite, got {r}")));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(domain(format!("pathloss exponent must be non-negative, got {alpha}")));
    }
    Ok(r.powf(-alpha))
}

/// Link distances; `rij` is the distance from source `i` to destination `j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub r11: f64,
    pub r12: f64,
    pub r21: f64,
    pub r22: f64,
    pub alpha: f64,
}

impl Topology {
    pub fn new(r11: f64, r12: f64, r21: f64, r22: f64, alpha: f64) -> Result<Self> {
        let topo = Topology { r11, r12, r21, r22, alpha };
        topo.validate()?;
        Ok(topo)
    }

    pub fn validate(&self) -> Result<()> {
        for r in [self.r11, self.r12, self.r21, self.r22] {
            pathloss(r, self.alpha)?;
        }
        Ok(())
    }

    /// Distance from source `tx` to destination `rx`.
    pub fn distance(&self, tx: Link, rx: Link) -> f64 {
        match (tx, rx) {
            (Link::One, Link::One) => self.r11,
            (Link::One, Link::Two) => self.r12,
            (Link::Two, Link::One) => self.r21,
            (Link::Two, Link::Two) => self.r22,
        }
    }

    /// Pathloss gain from source `tx` to destination `rx`.
    pub fn gain(&self, tx: Link, rx: Link) -> f64 {
        self.distance(tx, rx).powf(-self.alpha)
    }
}

/// Noise-normalized transmit powers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerAllocation {
    pub p1: f64,
    pub p2: f64,
}

impl PowerAllocation {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        let pw = PowerAllocation { p1, p2 };
        pw.validate()?;
        Ok(pw)
    }

    pub fn validate(&self) -> Result<()> {
        for p in [self.p1, self.p2] {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(domain(format!("transmit power must be non-negative, got {p}")));
            }
        }
        Ok(())
    }

    pub fn power(&self, link: Link) -> f64 {
        match link {
            Link::One => self.p1,
            Link::Two => self.p2,
        }
    }
}

/// Linear-scale SINR decoding thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinrThresholds {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl SinrThresholds {
    pub fn new(gamma1: f64, gamma2: f64) -> Result<Self> {
        let th = SinrThresholds { gamma1, gamma2 };
        th.validate()?;
        Ok(th)
    }

    pub fn validate(&self) -> Result<()> {
        for g in [self.gamma1, self.gamma2] {
            if !(g >= 0.0) {
                return Err(domain(format!("SINR threshold must be non-negative, got {g}")));
            }
        }
        Ok(())
    }

    pub fn gamma(&self, link: Link) -> f64 {
        match link {
            Link::One => self.gamma1,
            Link::Two => self.gamma2,
        }
    }
}

/// How a receiver handles the interfering stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decoding {
    /// Treat interference as noise.
    Ian,
    /// Decode and cancel the interferer first, then decode on the SNR.
    Sic,
}

/// Transmit antenna configuration of a link's source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Antennas {
    Single,
    /// Maximum ratio transmission over `M` antennas.
    Mrt(u32),
    /// Zero forcing towards the other destination over `M` antennas.
    Zf(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Beamformer {
    Mrt,
    Zf,
}

/// Decoding rule of destination `i` together with the antenna setup of
/// source `i`.
///
/// Textual form: `ian`, `sic`, `mrt:M`, `zf:M`. Beamforming links always
/// treat interference as noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ReceiverStrategy {
    pub decoding: Decoding,
    pub antennas: Antennas,
}

impl ReceiverStrategy {
    pub const IAN: ReceiverStrategy =
        ReceiverStrategy { decoding: Decoding::Ian, antennas: Antennas::Single };
    pub const SIC: ReceiverStrategy =
        ReceiverStrategy { decoding: Decoding::Sic, antennas: Antennas::Single };

    pub fn mrt(antennas: u32) -> Self {
        ReceiverStrategy { decoding: Decoding::Ian, antennas: Antennas::Mrt(antennas) }
    }

    pub fn zf(antennas: u32) -> Self {
        ReceiverStrategy { decoding: Decoding::Ian, antennas: Antennas::Zf(antennas) }
    }

    pub fn validate(&self) -> Result<()> {
        match self.antennas {
            Antennas::Single => {}
            Antennas::Mrt(m) if m < 1 => {
                return Err(domain("MRT needs at least one antenna"));
            }
            Antennas::Zf(m) if m < 2 => {
                return Err(domain(format!("zero forcing needs at least two antennas, got {m}")));
            }
            _ => {}
        }
        if self.decoding == Decoding::Sic && self.antennas != Antennas::Single {
            return Err(Error::Unsupported(
                "SIC is only modelled for single-antenna links".into(),
            ));
        }
        Ok(())
    }

    /// Shape of the Gamma law of the own-link signal power gain.
    pub fn signal_shape(&self) -> u32 {
        match self.antennas {
            Antennas::Single => 1,
            Antennas::Mrt(m) => m,
            Antennas::Zf(m) => m.saturating_sub(1),
        }
    }

    /// Whether this source's transmission reaches the other destination.
    pub fn leaks_interference(&self) -> bool {
        !matches!(self.antennas, Antennas::Zf(_))
    }
}

impl fmt::Display for ReceiverStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.decoding, self.antennas) {
            (Decoding::Ian, Antennas::Single) => f.write_str("ian"),
            (Decoding::Sic, Antennas::Single) => f.write_str("sic"),
            (Decoding::Ian, Antennas::Mrt(m)) => write!(f, "mrt:{m}"),
            (Decoding::Ian, Antennas::Zf(m)) => write!(f, "zf:{m}"),
            (Decoding::Sic, Antennas::Mrt(m)) => write!(f, "sic+mrt:{m}"),
            (Decoding::Sic, Antennas::Zf(m)) => write!(f, "sic+zf:{m}"),
        }
    }
}

impl FromStr for ReceiverStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let parse_m = |v: &str| {
            v.parse::<u32>()
                .map_err(|_| domain(format!("bad antenna count {v:?} in strategy {s:?}")))
        };
        let strategy = match s.split_once(':') {
            None if s == "ian" => ReceiverStrategy::IAN,
            None if s == "sic" => ReceiverStrategy::SIC,
            Some(("mrt", m)) => ReceiverStrategy::mrt(parse_m(m)?),
            Some(("zf", m)) => ReceiverStrategy::zf(parse_m(m)?),
            _ => return Err(domain(format!("unknown receiver strategy {s:?}"))),
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

impl TryFrom<String> for ReceiverStrategy {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<ReceiverStrategy> for String {
    fn from(value: ReceiverStrategy) -> Self {
        value.to_string()
    }
}

/// Strategies of both receivers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyPair {
    pub receiver1: ReceiverStrategy,
    pub receiver2: ReceiverStrategy,
}

impl StrategyPair {
    pub fn new(receiver1: ReceiverStrategy, receiver2: ReceiverStrategy) -> Self {
        StrategyPair { receiver1, receiver2 }
    }

    pub fn uniform(strategy: ReceiverStrategy) -> Self {
        StrategyPair::new(strategy, strategy)
    }

    pub fn ian() -> Self {
        Self::uniform(ReceiverStrategy::IAN)
    }

    pub fn sic() -> Self {
        Self::uniform(ReceiverStrategy::SIC)
    }

    /// SIC at the first destination, IAN at the second.
    pub fn sic_ian() -> Self {
        StrategyPair::new(ReceiverStrategy::SIC, ReceiverStrategy::IAN)
    }

    pub fn get(&self, link: Link) -> ReceiverStrategy {
        match link {
            Link::One => self.receiver1,
            Link::Two => self.receiver2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.receiver1.validate()?;
        self.receiver2.validate()?;
        for link in Link::BOTH {
            if self.get(link).decoding == Decoding::Sic
                && !self.get(link.other()).leaks_interference()
            {
                return Err(Error::Unsupported(format!(
                    "receiver {link} cannot cancel a zero-forced interferer"
                )));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.receiver1, self.receiver2)
    }
}

/// The four success probabilities that parameterize a stability region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuccessProfile {
    pub p1_alone: f64,
    pub p2_alone: f64,
    pub p1_both: f64,
    pub p2_both: f64,
}

impl SuccessProfile {
    pub fn new(p1_alone: f64, p2_alone: f64, p1_both: f64, p2_both: f64) -> Self {
        SuccessProfile { p1_alone, p2_alone, p1_both, p2_both }
    }

    pub fn alone(&self, link: Link) -> f64 {
        match link {
            Link::One => self.p1_alone,
            Link::Two => self.p2_alone,
        }
    }

    pub fn both(&self, link: Link) -> f64 {
        match link {
            Link::One => self.p1_both,
            Link::Two => self.p2_both,
        }
    }

    pub fn get(&self, link: Link, scenario: Scenario) -> f64 {
        match scenario {
            Scenario::Alone => self.alone(link),
            Scenario::Both => self.both(link),
        }
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.p1_alone, self.p2_alone, self.p1_both, self.p2_both]
    }
}

/// Normalized threshold `gamma_i / (p_i l(r_ii))`, with the conventions
/// `0` for a zero threshold and `+inf` for a silent source.
fn normalized_threshold(gamma: f64, power: f64, gain: f64) -> f64 {
    if gamma == 0.0 {
        0.0
    } else if power == 0.0 || gain == 0.0 {
        f64::INFINITY
    } else {
        gamma / (power * gain)
    }
}

/// Power ratio `num / den` where a zero numerator wins over a zero denominator.
fn power_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `Pr(SNR_i >= gamma_i)` when only source `i` transmits.
pub fn snr_success(link: Link, topo: &Topology, pw: &PowerAllocation, th: &SinrThresholds) -> f64 {
    let phi = normalized_threshold(th.gamma(link), pw.power(link), topo.gain(link, link));
    (-phi).exp()
}

/// `Pr(SINR_i >= gamma_i)` with both sources active and the interference
/// treated as noise.
pub fn ian_success(link: Link, topo: &Topology, pw: &PowerAllocation, th: &SinrThresholds) -> f64 {
    let (i, j) = (link, link.other());
    let gamma = th.gamma(i);
    if gamma == 0.0 {
        return 1.0;
    }
    let phi = normalized_threshold(gamma, pw.power(i), topo.gain(i, i));
    if phi.is_infinite() {
        return 0.0;
    }
    let inr_ratio = power_ratio(pw.power(j) * topo.gain(j, i), pw.power(i) * topo.gain(i, i));
    (-phi).exp() / (1.0 + gamma * inr_ratio)
}

/// Success probability at destination `i` under SIC with both sources
/// active: the interferer's packet must clear `gamma_j` against the own
/// signal, then the own packet must clear `gamma_i` on the SNR.
///
/// A silent interferer (`p_j = 0`) with `gamma_j > 0` cannot be decoded, so
/// the probability is 0; that is also the limit of the closed form.
pub fn sic_success(link: Link, topo: &Topology, pw: &PowerAllocation, th: &SinrThresholds) -> f64 {
    let (i, j) = (link, link.other());
    let (gamma_i, gamma_j) = (th.gamma(i), th.gamma(j));
    if gamma_j == 0.0 {
        return snr_success(link, topo, pw, th);
    }
    let own = pw.power(i) * topo.gain(i, i);
    let cross = pw.power(j) * topo.gain(j, i);
    if cross == 0.0 {
        return 0.0;
    }
    let phi = normalized_threshold(gamma_i, pw.power(i), topo.gain(i, i));
    if phi.is_infinite() {
        return 0.0;
    }
    let cancel = (-gamma_j * (1.0 + gamma_i) / cross).exp();
    (-phi).exp() * cancel / (1.0 + gamma_j * own / cross)
}

/// Success probability of a MISO link where both sources use the same
/// beamformer with `antennas` transmit antennas.
///
/// MRT yields a `Gamma(M, 1)` signal gain and exponential interference; ZF
/// yields a `Gamma(M - 1, 1)` signal gain and no interference, in either
/// scenario.
pub fn miso_success(
    beamformer: Beamformer,
    antennas: u32,
    link: Link,
    topo: &Topology,
    pw: &PowerAllocation,
    th: &SinrThresholds,
    scenario: Scenario,
) -> Result<f64> {
    let (i, j) = (link, link.other());
    let phi = normalized_threshold(th.gamma(i), pw.power(i), topo.gain(i, i));
    match beamformer {
        Beamformer::Mrt => {
            if antennas < 1 {
                return Err(domain("MRT needs at least one antenna"));
            }
            match scenario {
                Scenario::Alone => Ok(gamma_tail(antennas, phi)),
                Scenario::Both => {
                    if phi.is_infinite() {
                        return Ok(0.0);
                    }
                    let interferer = RayleighInterference::new(pw.power(j) * topo.gain(j, i));
                    general_success(&FadingCoefficientSpec::gamma(antennas), phi, &interferer)
                }
            }
        }
        Beamformer::Zf => {
            if antennas < 2 {
                return Err(domain(format!("zero forcing needs at least two antennas, got {antennas}")));
            }
            Ok(gamma_tail(antennas - 1, phi))
        }
    }
}

/// Closed-form success probability of one link for an arbitrary strategy
/// pair. The interferer's antenna setup decides whether interference reaches
/// the receiver at all.
pub fn success_probability(
    strategies: &StrategyPair,
    link: Link,
    scenario: Scenario,
    topo: &Topology,
    pw: &PowerAllocation,
    th: &SinrThresholds,
) -> Result<f64> {
    strategies.validate()?;
    let rx = strategies.get(link);
    let interferer = strategies.get(link.other());
    let phi = normalized_threshold(th.gamma(link), pw.power(link), topo.gain(link, link));
    let shape = rx.signal_shape();

    if scenario == Scenario::Alone || !interferer.leaks_interference() {
        return Ok(match rx.antennas {
            Antennas::Single => snr_success(link, topo, pw, th),
            _ => gamma_tail(shape, phi),
        });
    }
    match (rx.decoding, rx.antennas) {
        (Decoding::Ian, Antennas::Single) => Ok(ian_success(link, topo, pw, th)),
        (Decoding::Sic, Antennas::Single) => Ok(sic_success(link, topo, pw, th)),
        (Decoding::Ian, _) => {
            if phi.is_infinite() {
                return Ok(0.0);
            }
            let j = link.other();
            let laplace = RayleighInterference::new(pw.power(j) * topo.gain(j, link));
            general_success(&FadingCoefficientSpec::gamma(shape), phi, &laplace)
        }
        (Decoding::Sic, _) => unreachable!("rejected by StrategyPair::validate"),
    }
}

/// The four success probabilities for a strategy pair at fixed powers.
pub fn success_profile(
    strategies: &StrategyPair,
    topo: &Topology,
    pw: &PowerAllocation,
    th: &SinrThresholds,
) -> Result<SuccessProfile> {
    let p = |link, scenario| success_probability(strategies, link, scenario, topo, pw, th);
    Ok(SuccessProfile {
        p1_alone: p(Link::One, Scenario::Alone)?,
        p2_alone: p(Link::Two, Scenario::Alone)?,
        p1_both: p(Link::One, Scenario::Both)?,
        p2_both: p(Link::Two, Scenario::Both)?,
    })
}

/// Decoding event at destination `link` for one fading realization.
///
/// `own` is the own-link signal power gain and `cross` the interferer's
/// power gain at this destination (`None` when the interferer is silent).
pub fn decodes(
    rx: &ReceiverStrategy,
    link: Link,
    topo: &Topology,
    pw: &PowerAllocation,
    th: &SinrThresholds,
    own: f64,
    cross: Option<f64>,
) -> bool {
    let (i, j) = (link, link.other());
    let signal = own * topo.gain(i, i) * pw.power(i);
    let Some(cross) = cross else {
        return signal >= th.gamma(i);
    };
    let interference = cross * topo.gain(j, i) * pw.power(j);
    match rx.decoding {
        Decoding::Ian => signal / (1.0 + interference) >= th.gamma(i),
        Decoding::Sic => {
            interference / (1.0 + signal) >= th.gamma(j) && signal >= th.gamma(i)
        }
    }
}
