//! Velocity x(θ), rate I(x(θ)), fluctuation coefficient σ(θ), the exponent
//! function h(z) and its derivatives, plus numeric verifiers for the
//! steep-descent inequalities used in the asymptotic analysis.

use crate::specfun::{self, frak_g, log_gamma, polygamma, polygamma_real, SpecError};
use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

mod verify;

pub use verify::{
    h_bound_rhs, newproof_lhs, phi_series, script_p, steep_vertical_h, verify_polygamma, verify_steep_descent, SteepDescentReport,
    SteepGrid, Witness,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("sigma^3 = {0} is not positive")]
    NonPositiveSigma(f64),
    #[error("derivative order {0} unsupported")]
    Order(usize),
    #[error(transparent)]
    Special(#[from] SpecError),
}

pub type Result<T> = std::result::Result<T, RateError>;

/// Beta walk parameters and the steep-descent point θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
}

impl ModelParams {
    /// Parameters with `0 < θ < min(α + β, 1/2)`.
    pub fn new(alpha: f64, beta: f64, theta: f64) -> Result<Self> {
        let p = Self { alpha, beta, theta };
        if !(alpha > 0.0 && beta > 0.0 && theta > 0.0) {
            return Err(RateError::InvalidParams(format!("alpha, beta, theta must be positive: {p:?}")));
        }
        if !(theta < (alpha + beta).min(0.5)) {
            return Err(RateError::InvalidParams(format!("theta = {theta} must be below min(alpha + beta, 1/2)")));
        }
        Ok(p)
    }

    /// No window check; the closed forms make sense for any positive θ.
    pub fn unchecked(alpha: f64, beta: f64, theta: f64) -> Self {
        Self { alpha, beta, theta }
    }

    /// θ < min(0.5, 0.72 α), where the fixed-parameter fluctuation theorem applies.
    pub fn theorem_one_range(&self) -> bool {
        self.theta < (0.72 * self.alpha).min(0.5)
    }
}

/// x(θ), I(x(θ)) and σ(θ) at one θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftPoint {
    pub theta: f64,
    pub x_theta: f64,
    pub rate_i: f64,
    pub sigma: f64,
}

/// Precomputed coefficients of h for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub params: ModelParams,
    pub x: f64,
    pub rate_i: f64,
    /// (1 - x)/2 = (Ψ1(θ+α) - Ψ1(θ+α+β)) / (Ψ1(θ) - Ψ1(θ+α+β))
    pub minus: f64,
    /// (1 + x)/2 = (Ψ1(θ) - Ψ1(θ+α)) / (Ψ1(θ) - Ψ1(θ+α+β))
    pub plus: f64,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        let ModelParams { alpha: a, beta: b, theta: th } = params;
        let p1 = |x: f64| polygamma_real(1, x);
        let (t0, ta, tab) = (p1(th)?, p1(th + a)?, p1(th + a + b)?);
        let den = t0 - tab;
        let x = (tab + t0 - 2.0 * ta) / den;
        let minus = (ta - tab) / den;
        let plus = (t0 - ta) / den;
        let d = |x: f64| polygamma_real(0, x);
        let (d0, da, dab) = (d(th)?, d(th + a)?, d(th + a + b)?);
        // ((Ψ1(θ+α+β) - Ψ1(θ+α)) / den) (Ψ(θ+α+β) - Ψ(θ)) + Ψ(θ+α+β) - Ψ(θ+α)
        let rate_i = -minus * (dab - d0) + dab - da;
        Ok(Self { params, x, rate_i, minus, plus })
    }

    /// h(z) = I z + ((1-x)/2) log(Γ(α+z)/Γ(z)) + ((1+x)/2) log(Γ(α+z)/Γ(α+β+z)),
    /// principal log-gamma branch.
    pub fn h(&self, z: C64) -> Result<C64> {
        let (a, b) = (self.params.alpha, self.params.beta);
        let la = log_gamma(z + a)?;
        Ok(z * self.rate_i + (la - log_gamma(z)?) * self.minus + (la - log_gamma(z + a + b)?) * self.plus)
    }

    /// h'(z) from digamma differences.
    pub fn h_prime(&self, z: C64) -> Result<C64> {
        let (a, b) = (self.params.alpha, self.params.beta);
        let pa = polygamma(0, z + a)?;
        Ok((pa - polygamma(0, z)?) * self.minus + (pa - polygamma(0, z + a + b)?) * self.plus + self.rate_i)
    }

    /// h^{(k)}(θ) for 2 <= k <= 9.
    pub fn h_deriv(&self, k: usize) -> Result<f64> {
        if !(2..=specfun::MAX_ORDER + 1).contains(&k) {
            return Err(RateError::Order(k));
        }
        let ModelParams { alpha: a, beta: b, theta: th } = self.params;
        let p = |x: f64| polygamma_real(k - 1, x);
        let (q0, qa, qab) = (p(th)?, p(th + a)?, p(th + a + b)?);
        Ok(qa - qab + self.minus * (qab - q0))
    }

    pub fn sigma_cubed(&self) -> Result<f64> {
        Ok(0.5 * self.h_deriv(3)?)
    }

    pub fn sigma(&self) -> Result<f64> {
        let s3 = self.sigma_cubed()?;
        if !(s3 > 0.0) {
            return Err(RateError::NonPositiveSigma(s3));
        }
        Ok(s3.cbrt())
    }

    pub fn drift_point(&self) -> Result<DriftPoint> {
        Ok(DriftPoint { theta: self.params.theta, x_theta: self.x, rate_i: self.rate_i, sigma: self.sigma()? })
    }
}

/// x(θ) = [Ψ1(θ+α+β) + Ψ1(θ) - 2Ψ1(θ+α)] / [Ψ1(θ) - Ψ1(θ+α+β)].
pub fn x_of_theta(p: &ModelParams) -> Result<f64> {
    Ok(Model::new(*p)?.x)
}

/// I(x(θ)), the quenched large deviation rate at velocity x(θ), in nats per step.
pub fn rate_i(p: &ModelParams) -> Result<f64> {
    Ok(Model::new(*p)?.rate_i)
}

/// σ(θ) = (h'''(θ)/2)^{1/3}.
pub fn sigma_of_theta(p: &ModelParams) -> Result<f64> {
    Model::new(*p)?.sigma()
}

pub fn drift_point(p: &ModelParams) -> Result<DriftPoint> {
    Model::new(*p)?.drift_point()
}

pub fn h_eval(z: C64, p: &ModelParams) -> Result<C64> {
    Model::new(*p)?.h(z)
}

/// h along a path, with 2πi jumps of the logarithms removed in path order.
pub fn h_along(path: &[C64], p: &ModelParams) -> Result<Vec<C64>> {
    let m = Model::new(*p)?;
    let mut out = path.iter().map(|&z| m.h(z)).collect::<Result<Vec<_>>>()?;
    specfun::unwrap_log_branch(&mut out);
    Ok(out)
}

pub fn h_prime(z: C64, p: &ModelParams) -> Result<C64> {
    Model::new(*p)?.h_prime(z)
}

/// h^{(k)}(θ) for k >= 3.
pub fn h_deriv_theta(k: usize, p: &ModelParams) -> Result<f64> {
    if k < 3 {
        return Err(RateError::Order(k));
    }
    Model::new(*p)?.h_deriv(k)
}

/// Re(iθe^{iφ} h'(θe^{iφ})) and its ratio to θ² sinφ (1 - cosφ) 𝔤(α+1, β).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleMargin {
    pub value: f64,
    /// NaN where sinφ (1 - cosφ) vanishes.
    pub ratio: f64,
}

pub fn steep_circle_margin(phi: f64, p: &ModelParams) -> Result<CircleMargin> {
    circle_margin(&Model::new(*p)?, phi)
}

pub(crate) fn circle_margin(m: &Model, phi: f64) -> Result<CircleMargin> {
    let th = m.params.theta;
    let z = C64::from_polar(th, phi);
    let value = (C64::i() * z * m.h_prime(z)?).re;
    let scale = th * th * phi.sin() * (1.0 - phi.cos()) * frak_g(m.params.alpha + 1.0, m.params.beta)?;
    let ratio = if scale.abs() > 1e-300 { value / scale } else { f64::NAN };
    Ok(CircleMargin { value, ratio })
}

/// Im h'(θ + iy).
pub fn steep_vertical(y: f64, p: &ModelParams) -> Result<f64> {
    Ok(Model::new(*p)?.h_prime(C64::new(p.theta, y))?.im)
}

/// θ grid "start:stop:step" helper shared with the command line.
pub fn theta_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}
