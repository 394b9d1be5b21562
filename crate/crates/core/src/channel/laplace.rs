//! Success probability for signal laws of the form
//! `1 - F(x) = e^(-x) * sum_k a_k x^k` against an interferer described by
//! its Laplace transform and derivatives.

use std::fmt;

use crate::error::{config, domain, Result};

/// Complementary CDF coefficients `{(k, a_k)}` of the own-link signal gain.
#[derive(Clone, Debug, PartialEq)]
pub struct FadingCoefficientSpec {
    terms: Vec<(u32, f64)>,
}

impl FadingCoefficientSpec {
    /// Builds a spec and spot-checks that it induces a valid CDF.
    pub fn new(terms: Vec<(u32, f64)>) -> Result<Self> {
        let spec = FadingCoefficientSpec { terms };
        spec.validate()?;
        Ok(spec)
    }

    /// Exponential signal gain (single-antenna Rayleigh fading).
    pub fn rayleigh() -> Self {
        FadingCoefficientSpec { terms: vec![(0, 1.0)] }
    }

    /// `Gamma(shape, 1)` signal gain, `a_k = 1/k!` for `k < shape`.
    pub fn gamma(shape: u32) -> Self {
        let mut terms = Vec::with_capacity(shape as usize);
        let mut coeff = 1.0;
        for k in 0..shape {
            if k > 0 {
                coeff /= f64::from(k);
            }
            terms.push((k, coeff));
        }
        FadingCoefficientSpec { terms }
    }

    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    pub fn max_order(&self) -> u32 {
        self.terms.iter().map(|&(k, _)| k).max().unwrap_or(0)
    }

    /// `Pr(X > x)`.
    pub fn ccdf(&self, x: f64) -> f64 {
        let poly: f64 = self.terms.iter().map(|&(k, a)| a * x.powi(k as i32)).sum();
        (-x).exp() * poly
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.ccdf(x)
    }

    fn validate(&self) -> Result<()> {
        if self.terms.iter().any(|&(_, a)| !a.is_finite()) {
            return Err(domain("fading coefficients must be finite"));
        }
        const TOL: f64 = 1e-12;
        let mut prev = self.cdf(0.0);
        if prev < -TOL {
            return Err(domain(format!("induced CDF is negative at 0 ({prev})")));
        }
        for step in 1..=2000 {
            let x = step as f64 * 0.05;
            let f = self.cdf(x);
            if f < prev - TOL || f > 1.0 + TOL {
                return Err(domain(format!("induced CDF is not a distribution near x = {x}")));
            }
            prev = f;
        }
        let far = (10.0 * f64::from(self.max_order())).max(200.0);
        if (self.cdf(far) - 1.0).abs() > 1e-9 {
            return Err(domain("induced CDF does not tend to 1"));
        }
        Ok(())
    }
}

/// Laplace transform `L_I(s) = E[exp(-s I)]` of the interference power with
/// closed-form derivatives.
pub trait LaplaceTransform {
    /// The `order`-th derivative at `s`, or `None` if that order is not
    /// available.
    fn derivative(&self, order: u32, s: f64) -> Option<f64>;
}

/// Exponentially distributed interference power with mean `mean`:
/// `L(s) = 1/(1 + mean * s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayleighInterference {
    pub mean: f64,
}

impl RayleighInterference {
    pub fn new(mean: f64) -> Self {
        RayleighInterference { mean }
    }
}

impl LaplaceTransform for RayleighInterference {
    fn derivative(&self, order: u32, s: f64) -> Option<f64> {
        // d^m/ds^m (1 + c s)^-1 = (-1)^m m! c^m / (1 + c s)^(m + 1)
        let denom = 1.0 + self.mean * s;
        let mut value = 1.0 / denom;
        let ratio = -self.mean / denom;
        for m in 1..=order {
            value *= f64::from(m) * ratio;
        }
        Some(value)
    }
}

/// No interference: `L(s) = 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NoInterference;

impl LaplaceTransform for NoInterference {
    fn derivative(&self, order: u32, _s: f64) -> Option<f64> {
        Some(if order == 0 { 1.0 } else { 0.0 })
    }
}

type Derivative = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Laplace transform given as an explicit table of derivative closures,
/// index `m` holding the `m`-th derivative.
#[derive(Default)]
pub struct LaplaceTable {
    derivatives: Vec<Derivative>,
}

impl LaplaceTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, derivative: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivatives.push(Box::new(derivative));
        self
    }

    pub fn len(&self) -> usize {
        self.derivatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.derivatives.is_empty()
    }
}

impl fmt::Debug for LaplaceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaplaceTable").field("orders", &self.derivatives.len()).finish()
    }
}

impl LaplaceTransform for LaplaceTable {
    fn derivative(&self, order: u32, s: f64) -> Option<f64> {
        self.derivatives.get(order as usize).map(|d| d(s))
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, i| acc * f64::from(n - k + i) / f64::from(i))
}

/// `Pr(X >= phi (1 + I))` for a signal gain `X` with the given coefficient
/// spec and interference `I` independent of it:
///
/// `sum_k sum_{m<=k} a_k C(k, m) (-1)^(2k-m) phi^k e^(-phi) L_I^(m)(phi)`.
pub fn general_success(
    spec: &FadingCoefficientSpec,
    phi: f64,
    interference: &dyn LaplaceTransform,
) -> Result<f64> {
    if phi.is_nan() || phi < 0.0 {
        return Err(domain(format!("normalized threshold must be non-negative, got {phi}")));
    }
    if phi.is_infinite() {
        return Ok(0.0);
    }
    let decay = (-phi).exp();
    let mut total = 0.0;
    for &(k, a) in spec.terms() {
        let lead = a * phi.powi(k as i32) * decay;
        for m in 0..=k {
            let d = interference.derivative(m, phi).ok_or_else(|| {
                config(format!("Laplace derivative of order {m} is not available"))
            })?;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            total += lead * binomial(k, m) * sign * d;
        }
    }
    Ok(total)
}

/// Tail `Pr(X >= phi)` of a `Gamma(shape, 1)` variable with integer shape.
/// Shape 0 is a point mass at zero.
pub fn gamma_tail(shape: u32, phi: f64) -> f64 {
    if shape == 0 {
        return if phi <= 0.0 { 1.0 } else { 0.0 };
    }
    if phi.is_infinite() {
        return 0.0;
    }
    let mut term = (-phi).exp();
    let mut sum = term;
    for k in 1..shape {
        term *= phi / f64::from(k);
        sum += term;
    }
    sum.min(1.0)
}
