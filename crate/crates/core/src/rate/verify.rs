//! Falsification-style sweeps over parameter grids. Every check reports a
//! margin that is positive exactly when the inequality holds.

use super::{circle_margin, Model, ModelParams, Result};
use crate::fredholm::gauss_legendre_interval;
use crate::specfun::{check_polygamma_bounds, frak_g, polygamma_real};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// `sum_{n >= 0} f(x0 + n)`: `head` terms directly, the rest by Euler-Maclaurin
/// with the tail integral done by Gauss-Legendre after `u = X/s`.
/// `f` must be smooth and decay at least like `u^-2` beyond `x0 + head`.
pub(crate) fn series_sum<F: Fn(f64) -> f64>(f: F, x0: f64, head: usize) -> f64 {
    let head_sum: f64 = (0..head).map(|n| f(x0 + n as f64)).sum();
    let x = x0 + head as f64;
    let (s, w) = gauss_legendre_interval(30, 0.0, 1.0);
    let integral: f64 = s.iter().zip(&w).map(|(&s, &w)| w * f(x / s) * x / (s * s)).sum();
    let h = 1e-3 * x;
    let fp = (f(x + h) - f(x - h)) / (2.0 * h);
    let h = 0.05 * x;
    let f3 = (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h);
    head_sum + integral + 0.5 * f(x) - fp / 12.0 + f3 / 720.0
}

/// Φ(x, y) = Σ 1 / ((n + x)^2 + y^2).
pub fn phi_series(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(super::RateError::InvalidParams(format!("phi_series needs x > 0, got {x}")));
    }
    let head = 64 + (20.0 * y.abs()).ceil() as usize;
    Ok(series_sum(|u| 1.0 / (u * u + y * y), x, head))
}

/// 𝒫(x) = -Σ (θ² + 2θ x_n cosφ) / ((θ² + 2θ x_n cosφ + x_n²)(θ + x_n)²), x_n = x + n.
/// `x = 0` is allowed: the first term is then 1/θ².
pub fn script_p(x: f64, phi: f64, theta: f64) -> Result<f64> {
    if !(x >= 0.0 && theta > 0.0) {
        return Err(super::RateError::InvalidParams(format!("script_p needs x >= 0, theta > 0 (got {x}, {theta})")));
    }
    let c = phi.cos();
    let f = |u: f64| {
        let num = theta * theta + 2.0 * theta * u * c;
        num / ((num + u * u) * (theta + u) * (theta + u))
    };
    Ok(-series_sum(f, x, 64))
}

/// 𝒫(α) - 𝒫(α+β) + r (𝒫(α+β) - 𝒫(0)), r = (Ψ1(α+θ) - Ψ1(α+β+θ)) / (Ψ1(θ) - Ψ1(α+β+θ)).
pub fn newproof_lhs(phi: f64, p: &ModelParams) -> Result<f64> {
    newproof(&Model::new(*p)?, phi)
}

fn newproof(m: &Model, phi: f64) -> Result<f64> {
    let ModelParams { alpha: a, beta: b, theta: th } = m.params;
    let pa = script_p(a, phi, th)?;
    let pab = script_p(a + b, phi, th)?;
    let p0 = script_p(0.0, phi, th)?;
    Ok(pa - pab + m.minus * (pab - p0))
}

/// 8 r ∫_θ^{θ+α} Σ_n y² (x - θ) / ((x + n)² + y²)³ dx.
pub fn h_bound_rhs(y: f64, p: &ModelParams) -> Result<f64> {
    rhs(&Model::new(*p)?, y)
}

fn rhs(m: &Model, y: f64) -> Result<f64> {
    let ModelParams { alpha: a, theta: th, .. } = m.params;
    let y2 = y * y;
    let inner = |x: f64| series_sum(|u| y2 * (x - th) / (u * u + y2).powi(3), x, 32);
    // panels refine geometrically toward x = θ
    let levels = 14;
    let mut total = 0.0;
    let mut lo = th;
    for k in (0..levels).rev() {
        let hi = th + a / 2f64.powi(k);
        let (xs, ws) = gauss_legendre_interval(16, lo, hi);
        total += xs.iter().zip(&ws).map(|(&x, &w)| w * inner(x)).sum::<f64>();
        lo = hi;
    }
    Ok(8.0 * m.minus * total)
}

/// `(H, rhs)` with `H = Im h'(θ + iy) / y`.
pub fn steep_vertical_h(y: f64, p: &ModelParams) -> Result<(f64, f64)> {
    let m = Model::new(*p)?;
    let h = m.h_prime(C64::new(p.theta, y))?.im / y;
    Ok((h, rhs(&m, y)?))
}

/// A grid point and its margin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub point: String,
    pub margin: f64,
}

/// Outcome of one inequality suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteepDescentReport {
    pub suite: String,
    pub grid: String,
    pub evaluated: usize,
    pub min_margin: f64,
    /// The tightest points found, smallest margin first.
    pub witnesses: Vec<Witness>,
    pub pass: bool,
}

impl SteepDescentReport {
    pub fn from_margins(suite: &str, grid: &str, mut points: Vec<Witness>) -> Self {
        // NaN margins count as failures
        for w in &mut points {
            if w.margin.is_nan() {
                w.margin = f64::NEG_INFINITY;
            }
        }
        points.sort_by(|a, b| a.margin.total_cmp(&b.margin));
        let min_margin = points.first().map_or(f64::NEG_INFINITY, |w| w.margin);
        let evaluated = points.len();
        points.truncate(3);
        Self { suite: suite.into(), grid: grid.into(), evaluated, min_margin, witnesses: points, pass: min_margin > 0.0 }
    }
}

/// Parameter and sampling grids for the sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SteepGrid {
    pub thetas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Angles in (0, π).
    pub phis: Vec<f64>,
    /// Nonzero heights for the vertical-line checks.
    pub ys: Vec<f64>,
    /// Highest order for the h^{(k)} bound.
    pub k_max: usize,
    /// Points for the 𝒫 monotonicity checks.
    pub xs: Vec<f64>,
    /// Multiply the analytic h' by 1.5 at this index of the consistency suite.
    pub perturb_h_prime: Option<usize>,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

impl Default for SteepGrid {
    fn default() -> Self {
        let pos = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0];
        Self {
            thetas: (1..=9).map(|i| 0.05 * i as f64).collect(),
            alphas: vec![0.7, 1.0, 2.0, 10.0],
            betas: vec![0.5, 1.0, 5.0],
            phis: (0..25).map(|i| PI * (i as f64 + 0.5) / 25.0).collect(),
            ys: pos.iter().flat_map(|&y| [y, -y]).collect(),
            k_max: 4,
            xs: log_grid(0.05, 50.0, 25),
            perturb_h_prime: None,
        }
    }
}

impl SteepGrid {
    fn params(&self) -> Vec<ModelParams> {
        let mut v = Vec::new();
        for &a in &self.alphas {
            for &b in &self.betas {
                for &th in &self.thetas {
                    v.push(ModelParams::unchecked(a, b, th));
                }
            }
        }
        v
    }

    fn describe(&self) -> String {
        format!(
            "theta={:?} alpha={:?} beta={:?} |phi|={} |y|={} k<={}",
            self.thetas,
            self.alphas,
            self.betas,
            self.phis.len(),
            self.ys.len(),
            self.k_max
        )
    }
}

fn label(p: &ModelParams, extra: &str) -> String {
    format!("alpha={} beta={} theta={} {extra}", p.alpha, p.beta, p.theta)
}

fn fail(point: String) -> Witness {
    Witness { point, margin: f64::NEG_INFINITY }
}

fn per_params<F>(grid: &SteepGrid, f: F) -> Vec<Witness>
where
    F: Fn(&Model) -> Result<Vec<Witness>> + Sync,
{
    grid.params()
        .par_iter()
        .map(|p| match Model::new(*p) {
            Ok(m) => f(&m).unwrap_or_else(|e| vec![fail(label(p, &format!("error: {e}")))]),
            Err(e) => vec![fail(label(p, &format!("error: {e}")))],
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Both polygamma bracketing inequalities over k and an (x, y) grid.
pub fn verify_polygamma(ks: &[usize], xs: &[f64]) -> Vec<SteepDescentReport> {
    let grid = format!("k={ks:?} x,y in {} log-spaced points [{}, {}]", xs.len(), xs[0], xs[xs.len() - 1]);
    let mut single = Vec::new();
    let mut diff = Vec::new();
    for &k in ks {
        for &x in xs {
            for &y in xs {
                let pt = format!("k={k} x={x} y={y}");
                match check_polygamma_bounds(k, x, y) {
                    Ok((s, d)) => {
                        if y == xs[0] {
                            single.push(Witness { point: format!("k={k} x={x}"), margin: s.margin() });
                        }
                        let m = if d.holds { d.margin() } else { -d.margin().abs().max(f64::MIN_POSITIVE) };
                        diff.push(Witness { point: pt, margin: m });
                    }
                    Err(e) => diff.push(fail(format!("{pt} error: {e}"))),
                }
            }
        }
    }
    vec![
        SteepDescentReport::from_margins("poly_single", &grid, single),
        SteepDescentReport::from_margins("poly_difference", &grid, diff),
    ]
}

/// Run every steep-descent suite on the grid.
pub fn verify_steep_descent(grid: &SteepGrid) -> Vec<SteepDescentReport> {
    let g = grid.describe();
    let mut out = Vec::new();

    out.push(SteepDescentReport::from_margins(
        "corcor_i",
        &g,
        per_params(grid, |m| {
            let ModelParams { alpha: a, beta: b, .. } = m.params;
            let lhs = polygamma_real(1, a)? - polygamma_real(1, a + b)?;
            let g1 = frak_g(a + 1.0, b)?;
            Ok(vec![Witness { point: label(&m.params, ""), margin: (lhs - g1) / g1 }])
        }),
    ));

    out.push(SteepDescentReport::from_margins(
        "corcor_ii",
        &g,
        per_params(grid, |m| {
            let ModelParams { alpha: a, beta: b, theta: th } = m.params;
            let g0 = frak_g(a, b)?;
            let mut v = Vec::new();
            for k in 1..=grid.k_max {
                let d = (polygamma_real(k, th + a)? - polygamma_real(k, th + a + b)?).abs();
                let bound = crate::specfun::factorial(k + 1) * g0 * (1.0 + 1.0 / th) / th.powi(k as i32 - 1);
                v.push(Witness { point: label(&m.params, &format!("k={k}")), margin: (bound - d) / bound });
            }
            Ok(v)
        }),
    ));

    out.push(SteepDescentReport::from_margins(
        "corcor_iii",
        &g,
        per_params(grid, |m| {
            let ModelParams { alpha: a, beta: b, theta: th } = m.params;
            let g0 = frak_g(a, b)?;
            let mut v = Vec::new();
            for k in 3..=grid.k_max.max(3) {
                let hk = m.h_deriv(k)?.abs();
                let bound = 64.0 * g0 * crate::specfun::factorial(k) / th.powi(k as i32 + 2);
                v.push(Witness { point: label(&m.params, &format!("k={k}")), margin: (bound - hk) / bound });
            }
            Ok(v)
        }),
    ));

    out.push(SteepDescentReport::from_margins(
        "corcor_iv",
        &g,
        per_params(grid, |m| {
            let th = m.params.theta;
            let s3 = m.sigma_cubed()?;
            let q = s3 / (2.0 * th) + m.h_deriv(4)? / 24.0;
            Ok(vec![Witness { point: label(&m.params, ""), margin: q / (s3 / (2.0 * th)) }])
        }),
    ));

    // No explicit constant here: the margin is the ratio to 𝔤(α, β).
    out.push(SteepDescentReport::from_margins(
        "corcor_v",
        &g,
        per_params(grid, |m| {
            let th = m.params.theta;
            let q = m.sigma_cubed()? / (2.0 * th) + m.h_deriv(4)? / 24.0;
            Ok(vec![Witness { point: label(&m.params, ""), margin: q / frak_g(m.params.alpha, m.params.beta)? }])
        }),
    ));

    out.push(SteepDescentReport::from_margins(
        "corcor_vi",
        &g,
        per_params(grid, |m| {
            let s3 = m.sigma_cubed()?;
            let h4 = m.h_deriv(4)?;
            Ok(vec![
                Witness { point: label(&m.params, "sigma^3"), margin: s3 },
                Witness { point: label(&m.params, "-h4"), margin: -h4 },
            ])
        }),
    ));

    out.push(SteepDescentReport::from_margins(
        "fo_circle",
        &g,
        per_params(grid, |m| {
            grid.phis
                .iter()
                .map(|&phi| Ok(Witness { point: label(&m.params, &format!("phi={phi:.4}")), margin: circle_margin(m, phi)?.ratio }))
                .collect()
        }),
    ));

    out.push(SteepDescentReport::from_margins(
        "fo_newproof",
        &g,
        per_params(grid, |m| {
            grid.phis
                .iter()
                .map(|&phi| Ok(Witness { point: label(&m.params, &format!("phi={phi:.4}")), margin: newproof(m, phi)? }))
                .collect()
        }),
    ));

    out.push(SteepDescentReport::from_margins(
        "im_sign",
        &g,
        per_params(grid, |m| {
            grid.ys
                .iter()
                .map(|&y| {
                    let im = m.h_prime(C64::new(m.params.theta, y))?.im;
                    Ok(Witness { point: label(&m.params, &format!("y={y}")), margin: im / y })
                })
                .collect()
        }),
    ));

    out.push(SteepDescentReport::from_margins(
        "im_h_bound",
        &g,
        per_params(grid, |m| {
            grid.ys
                .iter()
                .map(|&y| {
                    let h = m.h_prime(C64::new(m.params.theta, y))?.im / y;
                    let r = rhs(m, y)?;
                    Ok(Witness { point: label(&m.params, &format!("y={y}")), margin: (h - r) / h.abs() })
                })
                .collect()
        }),
    ));

    out.push(pestimate(grid, &g));
    out.push(pestimate_negative(grid, &g));
    out.push(taylor(grid, &g));
    out.push(h_prime_consistency(grid, &g));
    out
}

fn pestimate(grid: &SteepGrid, g: &str) -> SteepDescentReport {
    let mut pts = Vec::new();
    for &th in &grid.thetas {
        for &phi in grid.phis.iter().filter(|p| p.cos() >= 0.0) {
            let vals: Vec<Result<f64>> = grid.xs.iter().map(|&x| script_p(x, phi, th).map(|p| -p)).collect();
            for (i, v) in vals.iter().enumerate() {
                let pt = format!("theta={th} phi={phi:.4} x={}", grid.xs[i]);
                match v {
                    Ok(v) => {
                        pts.push(Witness { point: format!("{pt} positive"), margin: *v });
                        if let Some(Ok(next)) = vals.get(i + 1) {
                            pts.push(Witness { point: format!("{pt} decreasing"), margin: (v - next) / v.abs() });
                        }
                    }
                    Err(e) => pts.push(fail(format!("{pt} error: {e}"))),
                }
            }
        }
    }
    SteepDescentReport::from_margins("pestimate_i", g, pts)
}

fn pestimate_negative(grid: &SteepGrid, g: &str) -> SteepDescentReport {
    let mut pts = Vec::new();
    for &th in &grid.thetas {
        for &phi in &grid.phis {
            for &x in &grid.xs {
                if phi.cos() <= -th / (2.0 * x) {
                    let pt = format!("theta={th} phi={phi:.4} x={x}");
                    match script_p(x, phi, th) {
                        // -𝒫 <= 0
                        Ok(p) => pts.push(Witness { point: pt, margin: p }),
                        Err(e) => pts.push(fail(format!("{pt} error: {e}"))),
                    }
                }
            }
        }
    }
    SteepDescentReport::from_margins("pestimate_ii", g, pts)
}

/// Near θ, on the semicircle of radius 1/(σ t^{1/3}), |h(z) - h(θ)| must stay below
/// 128 𝔤(α, β) / (θ⁵ σ³ t); on the vertical rays beyond it, Re(h(z) - h(θ)) must.
fn taylor(grid: &SteepGrid, g: &str) -> SteepDescentReport {
    let pts = per_params(grid, |m| {
        let ModelParams { alpha: a, beta: b, theta: th } = m.params;
        let sigma = m.sigma()?;
        let s3 = sigma.powi(3);
        let t0 = (2.0 / (sigma * th)).powi(3).ceil().max(1.0);
        let h0 = m.h(C64::new(th, 0.0))?;
        let mut v = Vec::new();
        for t in [t0, 4.0 * t0] {
            let rho = 1.0 / (sigma * t.cbrt());
            let bound = 128.0 * frak_g(a, b)? / (th.powi(5) * s3 * t);
            for i in 0..=32 {
                let psi = -PI / 2.0 + PI * i as f64 / 32.0;
                let z = C64::new(th, 0.0) + C64::from_polar(rho, psi);
                let d = (m.h(z)? - h0).norm();
                v.push(Witness { point: label(&m.params, &format!("t={t} arc psi={psi:.3}")), margin: (bound - d) / bound });
            }
            for j in 0..=24 {
                let y = rho * (50.0 / rho).powf(j as f64 / 24.0);
                for y in [y, -y] {
                    let d = (m.h(C64::new(th, y))? - h0).re;
                    v.push(Witness { point: label(&m.params, &format!("t={t} line y={y:.4}")), margin: (bound - d) / bound });
                }
            }
        }
        Ok(v)
    });
    SteepDescentReport::from_margins("taylor1", g, pts)
}

/// Analytic h' against a central difference of h on the circle |z| = θ.
fn h_prime_consistency(grid: &SteepGrid, g: &str) -> SteepDescentReport {
    let params = grid.params();
    let nphi = grid.phis.len();
    let mut pts = Vec::new();
    for (pi, p) in params.iter().enumerate() {
        let m = match Model::new(*p) {
            Ok(m) => m,
            Err(e) => {
                pts.push(fail(label(p, &format!("error: {e}"))));
                continue;
            }
        };
        for (k, &phi) in grid.phis.iter().enumerate() {
            let idx = pi * nphi + k;
            let z = C64::from_polar(p.theta, phi);
            let e = 1e-4 * p.theta;
            let r = (|| -> Result<(C64, C64)> {
                let fd = (m.h(z + e)? - m.h(z - e)?) / (2.0 * e);
                let mut an = m.h_prime(z)?;
                if grid.perturb_h_prime == Some(idx) {
                    an *= 1.5;
                }
                Ok((fd, an))
            })();
            let pt = label(p, &format!("phi={phi:.4} index={idx}"));
            match r {
                Ok((fd, an)) => {
                    let err = (fd - an).norm() / an.norm().max(1.0);
                    pts.push(Witness { point: pt, margin: 1.0 - err / 1e-6 });
                }
                Err(e) => pts.push(fail(format!("{pt} error: {e}"))),
            }
        }
    }
    SteepDescentReport::from_margins("h_prime_consistency", g, pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::polygamma;

    #[test]
    fn phi_matches_trigamma_and_digamma() {
        assert!((phi_series(0.7, 0.0).unwrap() - polygamma_real(1, 0.7).unwrap()).abs() < 1e-12);
        let im = polygamma(0, C64::new(2.0, 3.0)).unwrap().im;
        assert!((im - 3.0 * phi_series(2.0, 3.0).unwrap()).abs() < 1e-10);
        let a = phi_series(0.5, 1.0).unwrap();
        let b = phi_series(0.6, 1.0).unwrap();
        assert!(a > b);
        assert!(phi_series(0.0, 1.0).is_err());
    }

    #[test]
    fn script_p_brute_force() {
        // direct partial sum with a crude integral tail as an independent check
        let (x, phi, th): (f64, f64, f64) = (0.8, 1.1, 0.3);
        let c: f64 = phi.cos();
        let f = |u: f64| (th * th + 2.0 * th * u * c) / ((th * th + 2.0 * th * u * c + u * u) * (th + u) * (th + u));
        let n = 200_000;
        let head: f64 = (0..n).map(|k| f(x + k as f64)).sum();
        let xn = x + n as f64;
        let tail = th * c / (xn * xn) + 0.5 * f(xn);
        let v = script_p(x, phi, th).unwrap();
        assert!((v + head + tail).abs() < 1e-11, "{v} vs {}", -(head + tail));
    }

    #[test]
    fn newproof_equals_rescaled_circle_value() {
        let p = ModelParams::new(1.0, 1.0, 0.25).unwrap();
        let m = Model::new(p).unwrap();
        for phi in [0.3, 1.0, 2.0, 3.0] {
            let lhs = newproof(&m, phi).unwrap();
            let c = circle_margin(&m, phi).unwrap().value;
            let scaled = c / (2.0 * p.theta * p.theta * phi.sin() * (1.0 - phi.cos()));
            assert!((lhs - scaled).abs() < 1e-9 * lhs.abs().max(1.0), "phi={phi}: {lhs} vs {scaled}");
        }
    }

    #[test]
    fn vertical_small_y_asymptotic() {
        let p = ModelParams::new(1.0, 1.0, 0.3).unwrap();
        let m = Model::new(p).unwrap();
        let y = 1e-3;
        let im = m.h_prime(C64::new(p.theta, y)).unwrap().im;
        let want = -m.h_deriv(4).unwrap() / 6.0;
        assert!((im / y.powi(3) - want).abs() < 0.05 * want.abs());
    }

    #[test]
    fn small_grid_passes() {
        let grid = SteepGrid {
            thetas: vec![0.1, 0.3],
            alphas: vec![0.7, 2.0],
            betas: vec![1.0],
            phis: vec![0.5, 1.5, 2.5],
            ys: vec![0.1, -0.1, 3.0, -3.0],
            k_max: 4,
            xs: vec![0.1, 1.0, 10.0],
            perturb_h_prime: None,
        };
        for r in verify_steep_descent(&grid) {
            assert!(r.pass, "{r:?}");
        }
        let bad = SteepGrid { perturb_h_prime: Some(2), ..grid };
        let r = verify_steep_descent(&bad);
        let c = r.iter().find(|r| r.suite == "h_prime_consistency").unwrap();
        assert!(!c.pass);
    }

    #[test]
    fn polygamma_suite() {
        let xs = log_grid(0.1, 10.0, 5);
        for r in verify_polygamma(&[1, 2, 3, 4], &xs) {
            assert!(r.pass, "{r:?}");
        }
    }
}
