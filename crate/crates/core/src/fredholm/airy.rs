//! Airy kernel by double contour quadrature, F_GUE, and the wedge kernel `K_y`.
//!
//! Both double integrals factor through the matrix `1/(z_a - w_b)` between the
//! two wedge discretizations, so a full kernel matrix costs two matrix products.

use super::contour::{discretize, half_line, Contour};
use super::{nystrom_det, FredholmError, FredholmResult, Kernel, QuadratureGrid, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Vertex of the z-wedge (rays at ±pi/3); w-wedges sit at `-Z_VERTEX`.
const Z_VERTEX: f64 = 0.5;
/// Nodes per unit length along the wedge rays.
const NODES_PER_UNIT: usize = 12;

fn wedge_grid(vertex: f64, angle: f64, radius: f64) -> QuadratureGrid {
    let pieces = radius.ceil().max(1.0) as usize;
    let c = Contour::wedge(C64::new(vertex, 0.0), angle, radius, pieces);
    let m = ((NODES_PER_UNIT as f64 * radius / pieces as f64).ceil() as usize).max(4);
    discretize(&c, m).expect("wedge contour is well formed")
}

/// Discretized z- and w-wedges of the Airy double integral
/// `K(u, v) = (2 pi i)^-2 int int exp(z^3/3 - z u) / exp(w^3/3 - w v) / (z - w) dz dw`.
#[derive(Debug, Clone)]
pub struct AiryQuadrature {
    pub radius: f64,
    z: Vec<C64>,
    cz: Vec<C64>,
    w: Vec<C64>,
    cw: Vec<C64>,
    middle: DMatrix<C64>,
}

impl AiryQuadrature {
    pub fn new(radius: f64) -> Self {
        let two_pi_i = C64::new(0.0, 2.0 * PI);
        let zg = wedge_grid(Z_VERTEX, PI / 3.0, radius);
        let wg = wedge_grid(-Z_VERTEX, 2.0 * PI / 3.0, radius);
        let cz: Vec<C64> = zg.nodes.iter().zip(&zg.weights).map(|(z, q)| q * (z * z * z / 3.0).exp() / two_pi_i).collect();
        let cw: Vec<C64> = wg.nodes.iter().zip(&wg.weights).map(|(w, q)| q * (-(w * w * w) / 3.0).exp() / two_pi_i).collect();
        let middle = DMatrix::from_fn(zg.len(), wg.len(), |a, b| (zg.nodes[a] - wg.nodes[b]).inv());
        Self { radius, z: zg.nodes, cz, w: wg.nodes, cw, middle }
    }

    /// Kernel matrix `K(u_i, v_j)`.
    pub fn matrix_real(&self, us: &[f64], vs: &[f64]) -> DMatrix<C64> {
        let ez = DMatrix::from_fn(us.len(), self.z.len(), |i, a| self.cz[a] * (-self.z[a] * us[i]).exp());
        let ew = DMatrix::from_fn(self.w.len(), vs.len(), |b, j| self.cw[b] * (self.w[b] * vs[j]).exp());
        ez * &self.middle * ew
    }

    pub fn value(&self, u: f64, v: f64) -> f64 {
        self.matrix_real(&[u], &[v])[(0, 0)].re
    }
}

impl Default for AiryQuadrature {
    fn default() -> Self {
        Self::new(8.0)
    }
}

impl AiryQuadrature {
    /// (Ai(u), Ai'(u)) from the single z-integral.
    pub fn airy_pair(&self, u: f64) -> (f64, f64) {
        let (mut a, mut d) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for (z, c) in self.z.iter().zip(&self.cz) {
            let e = c * (-z * u).exp();
            a += e;
            d -= e * z;
        }
        (a.re, d.re)
    }
}

/// On real nodes the double integral collapses to
/// `(Ai(u) Ai'(v) - Ai'(u) Ai(v)) / (u - v)`, so only the Airy pair is integrated.
impl Kernel for AiryQuadrature {
    fn matrix(&self, nodes: &[C64]) -> Result<DMatrix<C64>> {
        let pairs: Vec<(f64, f64, f64)> = nodes
            .iter()
            .map(|z| {
                let (a, d) = self.airy_pair(z.re);
                (z.re, a, d)
            })
            .collect();
        Ok(DMatrix::from_fn(nodes.len(), nodes.len(), |i, j| {
            let (u, au, du) = pairs[i];
            let (v, av, dv) = pairs[j];
            let k = if i == j || u == v { du * du - u * au * au } else { (au * dv - du * av) / (u - v) };
            C64::new(k, 0.0)
        }))
    }
}

/// Airy kernel value with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValue {
    pub value: f64,
    pub radius: f64,
    /// False when doubling the radius still moved the value by more than 1e-9.
    pub converged: bool,
}

/// `K_Ai(u, v)`, doubling the ray truncation radius (from `truncation`) until
/// the value settles to 1e-9.
pub fn airy_kernel(u: f64, v: f64, truncation: f64) -> Result<AiryValue> {
    if !(truncation > 0.0) {
        return Err(FredholmError::Invalid(format!("truncation radius {truncation}")));
    }
    let mut r = truncation;
    let mut prev = AiryQuadrature::new(r).value(u, v);
    for _ in 0..3 {
        let next = AiryQuadrature::new(2.0 * r).value(u, v);
        r *= 2.0;
        if (next - prev).abs() < 1e-9 {
            return Ok(AiryValue { value: next, radius: r, converged: true });
        }
        prev = next;
    }
    Ok(AiryValue { value: prev, radius: r, converged: false })
}

/// Scale of the algebraic map `u = y + L/(1 - tau) - L` used for `(y, inf)`.
pub const HALF_LINE_SCALE: f64 = 6.0;

/// F_GUE(y) = det(I - K_Ai) on `L^2(y, inf)` with `m` Gauss-Legendre nodes.
pub fn f_gue(y: f64, m: usize) -> Result<FredholmResult> {
    if !y.is_finite() {
        return Err(FredholmError::Invalid(format!("y = {y}")));
    }
    f_gue_with(&AiryQuadrature::default(), y, m)
}

/// F_GUE with a caller-owned (reusable) Airy quadrature.
pub fn f_gue_with(airy: &AiryQuadrature, y: f64, m: usize) -> Result<FredholmResult> {
    let grid = half_line(y, HALF_LINE_SCALE, m)?;
    nystrom_det(airy, &grid, -1.0)
}

/// `K_y(w, w') / (2 pi i)`, so that the determinant uses plain `dw`.
#[derive(Debug, Clone)]
pub struct LimitKernel {
    pub y: f64,
    z: Vec<C64>,
    cz: Vec<C64>,
}

impl LimitKernel {
    pub fn new(y: f64, radius: f64) -> Self {
        let two_pi_i = C64::new(0.0, 2.0 * PI);
        let zg = wedge_grid(Z_VERTEX, PI / 3.0, radius);
        let cz = zg
            .nodes
            .iter()
            .zip(&zg.weights)
            .map(|(z, q)| q * (z * z * z / 3.0 - z * y).exp() / (two_pi_i * two_pi_i))
            .collect();
        Self { y, z: zg.nodes, cz }
    }
}

impl Kernel for LimitKernel {
    fn matrix(&self, ws: &[C64]) -> Result<DMatrix<C64>> {
        let n = ws.len();
        let pre: Vec<C64> = ws.iter().map(|w| (-(w * w * w) / 3.0 + w * self.y).exp()).collect();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for (z, c) in self.z.iter().zip(&self.cz) {
                    acc += c / ((z - ws[j]) * (ws[i] - z));
                }
                k[(i, j)] = acc * pre[i];
            }
        }
        Ok(k)
    }
}

/// det(I + K_y) on the wedge with vertex -1/2 and rays in the directions
/// `exp(±i(pi - phi))`, traversed upward. The z-wedge has vertex +1/2.
pub fn limit_det(y: f64, phi: f64, m: usize) -> Result<FredholmResult> {
    if !(phi > PI / 6.0 && phi < PI / 2.0) {
        return Err(FredholmError::Invalid(format!("wedge angle {phi} outside (pi/6, pi/2)")));
    }
    let open = PI - phi;
    // The w-rays head left of the vertex -1/2, the z-rays right of +1/2.
    if open.cos() >= 0.0 || -Z_VERTEX >= Z_VERTEX {
        return Err(FredholmError::Intersect(format!("phi = {phi}")));
    }
    // exp(-w^3/3) decays like exp(r^3 cos(3 phi) / 3) along the rays.
    let decay = -(3.0 * phi).cos() / 3.0;
    let length = (60.0 / decay).cbrt().max(6.0);
    let pieces = length.ceil() as usize;
    let w = Contour::wedge(C64::new(-Z_VERTEX, 0.0), open, length, pieces);
    let grid = discretize(&w, m)?;
    let kernel = LimitKernel::new(y, 8.0);
    nystrom_det(&kernel, &grid, 1.0)
}
