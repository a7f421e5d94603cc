//! The finite-time kernel `K_u` whose Fredholm determinant on a small circle
//! around 0 equals `E[exp(u P(t, x))]` for the Beta random walk.

use super::contour::{discretize, gauss_legendre_interval, Contour};
use super::{nystrom_det, FredholmError, FredholmResult, Kernel, Result};
use crate::specfun::log_gamma;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Discretized line `Re s = 1/2`, `|Im s| <= half_height`.
#[derive(Debug, Clone)]
pub struct SLine {
    pub nodes: Vec<C64>,
    /// Includes the factor `ds = i dy`.
    pub weights: Vec<C64>,
    pub half_height: f64,
}

impl SLine {
    /// `m_s` nodes in total, spread over panels of height about one.
    pub fn new(half_height: f64, m_s: usize) -> Self {
        let panels = (2.0 * half_height).ceil().max(1.0) as usize;
        let per = m_s.div_ceil(panels).max(4);
        let h = 2.0 * half_height / panels as f64;
        let mut nodes = Vec::with_capacity(panels * per);
        let mut weights = Vec::with_capacity(panels * per);
        for p in 0..panels {
            let a = -half_height + h * p as f64;
            let (y, w) = gauss_legendre_interval(per, a, a + h);
            for (yi, wi) in y.into_iter().zip(w) {
                nodes.push(C64::new(0.5, yi));
                weights.push(C64::new(0.0, wi));
            }
        }
        Self { nodes, weights, half_height }
    }

    /// Default truncation for a target tolerance. The integrand decays like
    /// `exp(-pi |Im s| / 2)` times a power, so the height is twice what the
    /// bare `pi / sin(pi s)` decay would suggest.
    pub fn default_height(tol: f64) -> f64 {
        2.0 * (1.0 / tol).ln() / PI + 4.0
    }
}

/// Knobs for [`laplace_transform`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceResolution {
    /// Gauss-Legendre nodes per quarter of the circle.
    pub m: usize,
    /// Target truncation error for the s-integral.
    pub tol: f64,
    /// Nodes on the s-line per unit height.
    pub s_density: usize,
    /// Overrides the default circle radius `min(1, a + b) / 8`.
    pub radius: Option<f64>,
}

impl Default for LaplaceResolution {
    fn default() -> Self {
        Self { m: 16, tol: 1e-12, s_density: 12, radius: None }
    }
}

/// `K_u` for fixed model data, with the s-line and log-gamma values cached per node set.
#[derive(Debug, Clone)]
pub struct LaplaceKernel {
    pub t: u32,
    pub x: i64,
    pub u: C64,
    pub alpha: f64,
    pub beta: f64,
    pub sline: SLine,
}

fn check_args(t: u32, x: i64, u: C64, alpha: f64, beta: f64) -> Result<()> {
    if x.abs() > t as i64 || (x - t as i64).rem_euclid(2) != 0 {
        return Err(FredholmError::Parity { t, x });
    }
    if u.im == 0.0 && u.re > 0.0 {
        return Err(FredholmError::PositiveU(u));
    }
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(FredholmError::Invalid(format!("alpha, beta must be positive ({alpha}, {beta})")));
    }
    Ok(())
}

impl LaplaceKernel {
    pub fn new(t: u32, x: i64, u: C64, alpha: f64, beta: f64, sline: SLine) -> Result<Self> {
        check_args(t, x, u, alpha, beta)?;
        Ok(Self { t, x, u, alpha, beta, sline })
    }

    /// log g(v) = ((t-x)/2) log(G(v)/G(a+v)) + ((t+x)/2) log(G(a+b+v)/G(a+v)) + log G(v).
    /// The exponents are integers, so any branch of log-gamma gives the same exp.
    fn log_g(&self, v: C64) -> Result<C64> {
        let lm = (self.t as f64 - self.x as f64) / 2.0;
        let lp = (self.t as f64 + self.x as f64) / 2.0;
        let g0 = log_gamma(v)?;
        let ga = log_gamma(v + self.alpha)?;
        let gab = log_gamma(v + self.alpha + self.beta)?;
        Ok((g0 - ga) * lm + (gab - ga) * lp + g0)
    }

    /// `A[i][k]`: everything in the s-integrand except `1/(s + v - v')`,
    /// including the quadrature weight and the 1/(2 pi i) prefactor.
    fn prefactors(&self, vs: &[C64]) -> Result<Vec<Vec<C64>>> {
        let log_mu = (-self.u).ln();
        let two_pi_i = C64::new(0.0, 2.0 * PI);
        let mut out = Vec::with_capacity(vs.len());
        for &v in vs {
            let lv = self.log_g(v)?;
            let row = self
                .sline
                .nodes
                .iter()
                .zip(&self.sline.weights)
                .map(|(&s, &w)| {
                    let lvs = self.log_g(v + s)?;
                    let f = C64::new(PI, 0.0) / (s * PI).sin() * (s * log_mu + lv - lvs).exp();
                    Ok(f * w / two_pi_i)
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(row);
        }
        Ok(out)
    }

    /// Largest integrand modulus at the ends of the truncated line, over the given v's.
    pub fn tail_size(&self, vs: &[C64]) -> Result<f64> {
        let log_mu = (-self.u).ln();
        let mut worst: f64 = 0.0;
        for &v in vs {
            let lv = self.log_g(v)?;
            for y in [-self.sline.half_height, self.sline.half_height] {
                let s = C64::new(0.5, y);
                let f = C64::new(PI, 0.0) / (s * PI).sin() * (s * log_mu + lv - self.log_g(v + s)?).exp();
                worst = worst.max(f.norm());
            }
        }
        Ok(worst)
    }
}

impl Kernel for LaplaceKernel {
    fn matrix(&self, vs: &[C64]) -> Result<DMatrix<C64>> {
        let n = vs.len();
        if self.u == C64::new(0.0, 0.0) {
            return Ok(DMatrix::zeros(n, n));
        }
        let a = self.prefactors(vs)?;
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let d = vs[i] - vs[j];
                let mut acc = C64::new(0.0, 0.0);
                for (s, aik) in self.sline.nodes.iter().zip(&a[i]) {
                    let den = s + d;
                    let dn = den.norm();
                    if dn < 1e-8 {
                        return Err(FredholmError::PoleProximity(dn));
                    }
                    acc += aik / den;
                }
                k[(i, j)] = acc;
            }
        }
        Ok(k)
    }
}

/// One entry of `K_u(v, v')` with the s-line truncated at `|Im s| <= s_truncation`
/// and `m_s` Gauss-Legendre nodes.
#[allow(clippy::too_many_arguments)]
pub fn kernel_ku_rw(
    v: C64,
    vp: C64,
    t: u32,
    x: i64,
    u: C64,
    alpha: f64,
    beta: f64,
    s_truncation: f64,
    m_s: usize,
) -> Result<C64> {
    let k = LaplaceKernel::new(t, x, u, alpha, beta, SLine::new(s_truncation, m_s))?;
    if u == C64::new(0.0, 0.0) {
        return Ok(C64::new(0.0, 0.0));
    }
    let a = k.prefactors(&[v])?;
    let mut acc = C64::new(0.0, 0.0);
    for (s, a0) in k.sline.nodes.iter().zip(&a[0]) {
        let den = s + v - vp;
        if den.norm() < 1e-8 {
            return Err(FredholmError::PoleProximity(den.norm()));
        }
        acc += a0 / den;
    }
    // `prefactors` already divided by 2 pi i, which is the kernel's own prefactor.
    Ok(acc)
}

/// `E[exp(u P(t, x))] = det(I - K_u)` on `L^2` of a small positively oriented
/// circle around 0, with the measure `dv / (2 pi i)`.
pub fn laplace_transform(t: u32, x: i64, u: C64, alpha: f64, beta: f64, res: &LaplaceResolution) -> Result<FredholmResult> {
    check_args(t, x, u, alpha, beta)?;
    let r0 = res.radius.unwrap_or(alpha_beta_radius(alpha, beta));
    // Keep |Re(v - v')| <= 2 r0 well away from the s-line at Re s = 1/2.
    if !(r0 > 0.0 && 2.0 * r0 < 0.5 && r0 < 1.0 && r0 < alpha + beta) {
        return Err(FredholmError::Invalid(format!("circle radius {r0} unusable")));
    }
    let contour = Contour::circle(C64::new(0.0, 0.0), r0, 4);
    let grid = discretize(&contour, res.m)?;
    let mut height = SLine::default_height(res.tol);
    let mut kernel;
    loop {
        let m_s = (2.0 * height * res.s_density as f64).ceil() as usize;
        kernel = LaplaceKernel::new(t, x, u, alpha, beta, SLine::new(height, m_s))?;
        if u == C64::new(0.0, 0.0) || kernel.tail_size(&grid.nodes)? < res.tol || height > 200.0 {
            break;
        }
        height *= 2.0;
    }
    let scaled = Scaled { inner: &kernel, factor: C64::new(0.0, -1.0 / (2.0 * PI)) };
    nystrom_det(&scaled, &grid, -1.0)
}

fn alpha_beta_radius(alpha: f64, beta: f64) -> f64 {
    (alpha + beta).min(1.0) / 8.0
}

struct Scaled<'a, K: Kernel> {
    inner: &'a K,
    factor: C64,
}

impl<K: Kernel> Kernel for Scaled<'_, K> {
    fn matrix(&self, nodes: &[C64]) -> Result<DMatrix<C64>> {
        Ok(self.inner.matrix(nodes)? * self.factor)
    }
}

/// Nearest integer to `xf` with the parity of `t`, ties going to the even
/// offset, clamped to `[-t, t]`.
pub fn parity_adjusted_site(xf: f64, t: u32) -> i64 {
    let p = (t % 2) as f64;
    let k = ((xf - p) / 2.0).round_ties_even();
    let x = (p + 2.0 * k) as i64;
    x.clamp(-(t as i64), t as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res() -> LaplaceResolution {
        LaplaceResolution::default()
    }

    #[test]
    fn zero_time_is_exp_u() {
        // P(0, 0) = 1, so the transform is e^u.
        for u in [-0.5, -1.0, -3.0] {
            let r = laplace_transform(0, 0, C64::new(u, 0.0), 1.0, 1.0, &res()).unwrap();
            assert!((r.value - u.exp()).abs() < 1e-9, "u={u}: {}", r.value);
            assert!(r.imag_residual < 1e-10);
        }
    }

    #[test]
    fn one_step_is_explicit() {
        // t = 1, x = 1: P = B with B ~ Beta(a, b); E[e^{uB}] for a = b = 1 is (e^u - 1)/u.
        let u = -1.0f64;
        let r = laplace_transform(1, 1, C64::new(u, 0.0), 1.0, 1.0, &res()).unwrap();
        assert!((r.value - (u.exp() - 1.0) / u).abs() < 1e-9, "{}", r.value);
        // x = -1: P = 1.
        let r = laplace_transform(1, -1, C64::new(u, 0.0), 1.0, 1.0, &res()).unwrap();
        assert!((r.value - u.exp()).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn u_zero_gives_one() {
        let r = laplace_transform(8, 4, C64::new(0.0, 0.0), 1.0, 1.0, &res()).unwrap();
        assert_eq!(r.value, 1.0);
        let k = kernel_ku_rw(C64::new(0.1, 0.0), C64::new(0.0, 0.1), 8, 4, C64::new(0.0, 0.0), 1.0, 1.0, 20.0, 200).unwrap();
        assert_eq!(k, C64::new(0.0, 0.0));
    }

    #[test]
    fn kernel_conjugation_symmetry() {
        let v = C64::new(0.05, 0.07);
        let vp = C64::new(-0.1, 0.02);
        let u = C64::new(-1.0, 0.3);
        let a = kernel_ku_rw(v, vp, 8, 4, u, 1.0, 1.0, 20.0, 400).unwrap();
        let b = kernel_ku_rw(v.conj(), vp.conj(), 8, 4, u.conj(), 1.0, 1.0, 20.0, 400).unwrap();
        assert!((a - b.conj()).norm() < 1e-13 * a.norm().max(1.0));
    }

    #[test]
    fn kernel_self_convergence() {
        let v = C64::from_polar(0.125, 0.4);
        let vp = C64::from_polar(0.125, 2.5);
        let u = C64::new(-1.0, 0.0);
        let a = kernel_ku_rw(v, vp, 8, 4, u, 1.0, 1.0, 22.0, 528).unwrap();
        let b = kernel_ku_rw(v, vp, 8, 4, u, 1.0, 1.0, 44.0, 2112).unwrap();
        assert!((a - b).norm() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn transform_decreases_in_u() {
        let a = laplace_transform(8, 4, C64::new(-1.0, 0.0), 1.0, 1.0, &res()).unwrap();
        let b = laplace_transform(8, 4, C64::new(-5.0, 0.0), 1.0, 1.0, &res()).unwrap();
        assert!(0.0 < b.value && b.value < a.value && a.value < 1.0);
        assert!(a.err_est < 1e-8 && b.err_est < 1e-8, "{a:?} {b:?}");
    }

    #[test]
    fn parity_errors_and_rounding() {
        assert!(matches!(
            laplace_transform(8, 3, C64::new(-1.0, 0.0), 1.0, 1.0, &res()),
            Err(FredholmError::Parity { .. })
        ));
        assert!(laplace_transform(8, 4, C64::new(1.0, 0.0), 1.0, 1.0, &res()).is_err());
        assert_eq!(parity_adjusted_site(7363.6, 8192), 7364);
        assert_eq!(parity_adjusted_site(4.9, 7), 5);
        assert_eq!(parity_adjusted_site(4.0, 7), 5);
        assert_eq!(parity_adjusted_site(6.0, 7), 5);
        assert_eq!(parity_adjusted_site(100.0, 7), 7);
    }
}
