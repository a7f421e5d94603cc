//! Complex log-gamma and polygamma functions, the weight `frak_g`, and the
//! polygamma bracketing inequalities as checkable predicates.
//!
//! Evaluation shifts the argument right with the functional recurrence until
//! `Re z >= shift_threshold`, then sums the Stirling / polygamma asymptotic
//! series with Bernoulli coefficients up to B30.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use thiserror::Error;

/// Highest polygamma order supported.
pub const MAX_ORDER: usize = 8;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// B_2, B_4, ..., B_30.
const BERNOULLI: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("pole at z = {0}")]
    Pole(C64),
    #[error("polygamma order {0} out of range (max {MAX_ORDER})")]
    OrderOutOfRange(usize),
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, SpecError>;

/// Accuracy knobs shared by the special-function routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyPolicy {
    pub rel_tol: f64,
    pub shift_threshold: f64,
    pub max_terms: usize,
}

impl Default for AccuracyPolicy {
    fn default() -> Self {
        Self { rel_tol: 1e-12, shift_threshold: 10.0, max_terms: 200_000 }
    }
}

impl AccuracyPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.shift_threshold >= 8.0) || self.max_terms < 64 {
            return Err(SpecError::Domain(format!("invalid accuracy policy {self:?}")));
        }
        Ok(())
    }
}

fn is_pole(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0
}

fn shift_count(z: C64, threshold: f64) -> usize {
    if z.re >= threshold {
        0
    } else {
        (threshold - z.re).ceil() as usize
    }
}

/// Principal branch of log Γ(z): analytic on the plane cut along (-inf, 0],
/// real on the positive axis.
pub fn log_gamma(z: C64) -> Result<C64> {
    log_gamma_with(z, &AccuracyPolicy::default())
}

pub fn log_gamma_with(z: C64, policy: &AccuracyPolicy) -> Result<C64> {
    if is_pole(z) {
        return Err(SpecError::Pole(z));
    }
    let n = shift_count(z, policy.shift_threshold);
    // Summing principal logs of z+j keeps the result on the principal branch:
    // every factor has an imaginary part of the same sign as z.
    let shift = if z.im == 0.0 && z.re > 0.0 {
        // one real logarithm of the product is more accurate than n of them
        C64::new((0..n).map(|j| z.re + j as f64).product::<f64>().ln(), 0.0)
    } else {
        (0..n).map(|j| (z + j as f64).ln()).sum()
    };
    let w = z + n as f64;
    Ok(stirling(w, policy.rel_tol) - shift)
}

fn stirling(w: C64, tol: f64) -> C64 {
    let mut s = (w - 0.5) * w.ln() - w + LN_SQRT_2PI;
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut p = inv;
    for (i, b) in BERNOULLI.iter().enumerate() {
        let k = (i + 1) as f64;
        let term = p * (b / (2.0 * k * (2.0 * k - 1.0)));
        s += term;
        if term.norm() <= tol * 1e-3 * s.norm().max(1.0) {
            break;
        }
        p *= inv2;
    }
    s
}

/// Real log Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(SpecError::Domain(format!("ln_gamma needs x > 0, got {x}")));
    }
    Ok(log_gamma(C64::new(x, 0.0))?.re)
}

/// Polygamma Ψ_k(z) = d^{k+1}/dz^{k+1} log Γ(z); k = 0 is the digamma function.
pub fn polygamma(k: usize, z: C64) -> Result<C64> {
    polygamma_with(k, z, &AccuracyPolicy::default())
}

pub fn polygamma_with(k: usize, z: C64, policy: &AccuracyPolicy) -> Result<C64> {
    if k > MAX_ORDER {
        return Err(SpecError::OrderOutOfRange(k));
    }
    if is_pole(z) {
        return Err(SpecError::Pole(z));
    }
    let n = shift_count(z, policy.shift_threshold);
    let kf = factorial(k);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    // Psi_k(z) = Psi_k(z+n) - sum_j (-1)^k k! / (z+j)^{k+1}
    let mut shift = C64::new(0.0, 0.0);
    for j in 0..n {
        shift += (z + j as f64).powi(-(k as i32 + 1));
    }
    let w = z + n as f64;
    Ok(polygamma_asymptotic(k, w, policy.rel_tol) - shift * (sign * kf))
}

fn polygamma_asymptotic(k: usize, w: C64, tol: f64) -> C64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    if k == 0 {
        let mut s = w.ln() - inv * 0.5;
        let mut p = inv2;
        for (i, b) in BERNOULLI.iter().enumerate() {
            let j2 = 2.0 * (i + 1) as f64;
            let term = p * (b / j2);
            s -= term;
            if term.norm() <= tol * 1e-3 * s.norm() {
                break;
            }
            p *= inv2;
        }
        return s;
    }
    // (-1)^{k+1} [ (k-1)!/w^k + k!/(2 w^{k+1}) + sum_j B_2j (2j+k-1)!/((2j)! w^{2j+k}) ]
    let wk = inv.powi(k as i32);
    let mut s = wk * factorial(k - 1) + wk * inv * (factorial(k) * 0.5);
    let mut p = wk * inv2;
    // ratio (2j+k-1)!/(2j)! built incrementally
    for (i, b) in BERNOULLI.iter().enumerate() {
        let j2 = 2 * (i + 1);
        let mut c = 1.0;
        for m in (j2 + 1)..=(j2 + k - 1) {
            c *= m as f64;
        }
        let term = p * (b * c);
        s += term;
        if term.norm() <= tol * 1e-3 * s.norm() {
            break;
        }
        p *= inv2;
    }
    if k % 2 == 1 {
        s
    } else {
        -s
    }
}

pub fn digamma(x: f64) -> Result<f64> {
    Ok(polygamma(0, C64::new(x, 0.0))?.re)
}

/// Real polygamma Ψ_k(x).
pub fn polygamma_real(k: usize, x: f64) -> Result<f64> {
    Ok(polygamma(k, C64::new(x, 0.0))?.re)
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// 𝔤(x, y) = y / (x (x + y)).
pub fn frak_g(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(SpecError::Domain(format!("frak_g needs positive arguments, got ({x}, {y})")));
    }
    Ok(y / (x * (x + y)))
}

/// Unwrap 2πi jumps in a sequence of log values sampled in contour order.
pub fn unwrap_log_branch(values: &mut [C64]) {
    for i in 1..values.len() {
        let d = values[i].im - values[i - 1].im;
        let turns = (d / (2.0 * PI)).round();
        if turns != 0.0 {
            values[i].im -= turns * 2.0 * PI;
        }
    }
}

/// log Γ along a path, made continuous in path order.
pub fn log_gamma_along(path: &[C64]) -> Result<Vec<C64>> {
    let mut out = path.iter().map(|&z| log_gamma(z)).collect::<Result<Vec<_>>>()?;
    unwrap_log_branch(&mut out);
    Ok(out)
}

/// One bracketing inequality lower <= value <= upper.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PolyBoundReport {
    pub k: usize,
    pub x: f64,
    pub y: f64,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub holds: bool,
}

impl PolyBoundReport {
    fn new(k: usize, x: f64, y: f64, lower: f64, value: f64, upper: f64) -> Self {
        Self { k, x, y, lower, value, upper, holds: lower <= value && value <= upper }
    }

    /// Smallest relative slack of the two inequalities.
    pub fn margin(&self) -> f64 {
        let s = self.value.abs().max(f64::MIN_POSITIVE);
        ((self.value - self.lower) / s).min((self.upper - self.value) / s)
    }
}

/// The four members of the difference chain
/// A <= B <= (-1)^{k+1}(Ψ_k(x) - Ψ_k(x+y)) <= C, returned as [A, B, value, C].
pub fn difference_chain(k: usize, x: f64, y: f64) -> Result<[f64; 4]> {
    if k == 0 {
        return Err(SpecError::Domain("difference bound needs k >= 1".into()));
    }
    let kf = factorial(k);
    let g0 = frak_g(x, y)?;
    let g1 = frak_g(x + 1.0, y)?;
    let kk = k as f64;
    let xk = x.powi(k as i32);
    let x1k1 = (x + 1.0).powi(k as i32 - 1);
    let a = kf * g1 * (1.0 / xk + 1.0 / (kk * x1k1));
    let b = kf * g0 / xk + factorial(k - 1) * g1 / x1k1;
    let c = factorial(k + 1) * g0 * (1.0 / xk + 1.0 / ((kk + 1.0) * x.powi(k as i32 - 1)));
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    let v = sign * (polygamma_real(k, x)? - polygamma_real(k, x + y)?);
    Ok([a, b, v, c])
}

/// Evaluate the single-argument bracket and the difference bracket.
/// The difference report uses the sharper lower end of the chain; the weaker
/// one is available through [`difference_chain`].
pub fn check_polygamma_bounds(k: usize, x: f64, y: f64) -> Result<(PolyBoundReport, PolyBoundReport)> {
    if k == 0 {
        return Err(SpecError::Domain("polygamma bounds need k >= 1".into()));
    }
    if !(x > 0.0 && y > 0.0) {
        return Err(SpecError::Domain(format!("bounds need x, y > 0, got ({x}, {y})")));
    }
    let kf = factorial(k);
    let kk = k as f64;
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    let v = sign * polygamma_real(k, x)?;
    let lo = kf * (1.0 / x.powi(k as i32 + 1) + 1.0 / (kk * (x + 1.0).powi(k as i32)));
    let hi = kf * (1.0 / x.powi(k as i32 + 1) + 1.0 / (kk * x.powi(k as i32)));
    let single = PolyBoundReport::new(k, x, y, lo, v, hi);
    let [a, b, dv, c] = difference_chain(k, x, y)?;
    let mut diff = PolyBoundReport::new(k, x, y, b, dv, c);
    diff.holds &= a <= b;
    Ok((single, diff))
}
