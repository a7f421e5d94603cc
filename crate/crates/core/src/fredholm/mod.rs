//! Fredholm determinants on complex contours by the Nystrom method:
//! the finite-time Laplace transform kernel of the Beta walk, the Airy
//! kernel with F_GUE, and the wedge kernel whose determinant recovers F_GUE.

mod airy;
mod contour;
mod laplace;

pub use airy::{airy_kernel, f_gue, f_gue_with, limit_det, AiryQuadrature, AiryValue, LimitKernel, HALF_LINE_SCALE};
pub use contour::{discretize, gauss_legendre, gauss_legendre_interval, half_line, Contour, GridSource, QuadratureGrid, Segment};
pub use laplace::{
    kernel_ku_rw, laplace_transform, parity_adjusted_site, LaplaceKernel, LaplaceResolution, SLine,
};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FredholmError {
    #[error("degenerate contour: {0}")]
    Degenerate(String),
    #[error("resolution {0} too small (need at least 4 nodes per segment)")]
    Resolution(usize),
    #[error("non-finite kernel entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("x = {x} does not match the parity of t = {t} or lies outside [-t, t]")]
    Parity { t: u32, x: i64 },
    #[error("s-node too close to the pole of 1/(s + v - v'): distance {0:e}")]
    PoleProximity(f64),
    #[error("u must not lie on the positive real axis (got {0})")]
    PositiveU(C64),
    #[error("contours intersect: {0}")]
    Intersect(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Special(#[from] crate::specfun::SpecError),
}

pub type Result<T> = std::result::Result<T, FredholmError>;

/// A determinant value with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FredholmResult {
    pub value: f64,
    /// |Im det|, discarded.
    pub imag_residual: f64,
    pub m: usize,
    /// |value(m) - value(m/2)|; NaN when no coarser grid exists.
    pub err_est: f64,
}

impl FredholmResult {
    /// Value clipped to [0, 1] for reporting CDF-type determinants.
    pub fn clipped(&self) -> f64 {
        self.value.clamp(0.0, 1.0)
    }
}

/// Something that can fill a kernel matrix on a node set.
pub trait Kernel {
    fn matrix(&self, nodes: &[C64]) -> Result<DMatrix<C64>>;
}

impl<F> Kernel for F
where
    F: Fn(C64, C64) -> C64,
{
    fn matrix(&self, nodes: &[C64]) -> Result<DMatrix<C64>> {
        let n = nodes.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                k[(i, j)] = self(nodes[i], nodes[j]);
            }
        }
        Ok(k)
    }
}

/// det(I + sign * K) with entries `sqrt(w_i) K(z_i, z_j) sqrt(w_j)`.
pub fn det_on_grid<K: Kernel + ?Sized>(kernel: &K, grid: &QuadratureGrid, sign: f64) -> Result<C64> {
    let mut k = kernel.matrix(&grid.nodes)?;
    let n = grid.len();
    let sw: Vec<C64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            let v = k[(i, j)];
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(FredholmError::NonFinite(i, j));
            }
            k[(i, j)] = sw[i] * v * sw[j] * sign;
        }
        k[(i, i)] += 1.0;
    }
    Ok(k.lu().determinant())
}

/// Nystrom approximation of det(I + sign K) on L^2 of the grid's contour.
/// The error estimate compares against the same source at half resolution.
pub fn nystrom_det<K: Kernel + ?Sized>(kernel: &K, grid: &QuadratureGrid, sign: f64) -> Result<FredholmResult> {
    let d = det_on_grid(kernel, grid, sign)?;
    let err_est = match (grid.m / 2 >= 4).then(|| grid.rebuild(grid.m / 2)).flatten() {
        Some(coarse) => (det_on_grid(kernel, &coarse, sign)?.re - d.re).abs(),
        None => f64::NAN,
    };
    Ok(FredholmResult { value: d.re, imag_residual: d.im.abs(), m: grid.m, err_est })
}
