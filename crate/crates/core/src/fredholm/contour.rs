//! Piecewise contours in the complex plane and their Gauss-Legendre
//! discretizations.

use super::{FredholmError, Result};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let n = m as f64;
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_m.
        let mut z = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_interval(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line { a: C64, b: C64 },
    Arc { center: C64, radius: f64, start: f64, end: f64 },
    /// `origin + direction * s` for `s` in `[0, length]`; `direction` has unit modulus.
    Ray { origin: C64, direction: C64, length: f64 },
}

impl Segment {
    fn point(&self, s: f64) -> C64 {
        match *self {
            Segment::Line { a, b } => a + (b - a) * s,
            Segment::Arc { center, radius, start, end } => {
                center + C64::from_polar(radius, start + (end - start) * s)
            }
            Segment::Ray { origin, direction, length } => origin + direction * (length * s),
        }
    }

    fn derivative(&self, s: f64) -> C64 {
        match *self {
            Segment::Line { a, b } => b - a,
            Segment::Arc { radius, start, end, .. } => {
                let phi = start + (end - start) * s;
                C64::i() * C64::from_polar(radius, phi) * (end - start)
            }
            Segment::Ray { direction, length, .. } => direction * length,
        }
    }

    pub fn start(&self) -> C64 {
        self.point(0.0)
    }

    pub fn end(&self) -> C64 {
        self.point(1.0)
    }

    fn degenerate(&self) -> bool {
        match *self {
            Segment::Line { a, b } => (b - a).norm() == 0.0,
            Segment::Arc { radius, start, end, .. } => radius <= 0.0 || start == end,
            Segment::Ray { direction, length, .. } => length <= 0.0 || (direction.norm() - 1.0).abs() > 1e-12,
        }
    }
}

/// An ordered chain of segments. Rays record the truncation tail estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub segments: Vec<Segment>,
    /// Traverse the segments backwards when set.
    pub reversed: bool,
    pub tail_bound: Option<f64>,
}

impl Contour {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments, reversed: false, tail_bound: None }
    }

    /// Positively oriented circle split into `pieces` arcs.
    pub fn circle(center: C64, radius: f64, pieces: usize) -> Self {
        let pieces = pieces.max(1);
        let segs = (0..pieces)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / pieces as f64;
                let b = 2.0 * PI * (i + 1) as f64 / pieces as f64;
                Segment::Arc { center, radius, start: a, end: b }
            })
            .collect();
        Self::new(segs)
    }

    /// Vertical line `Re z = re` from `re - i*half_height` up to `re + i*half_height`,
    /// split into `pieces` equal segments.
    pub fn vertical_line(re: f64, half_height: f64, pieces: usize) -> Self {
        let pieces = pieces.max(1);
        let h = 2.0 * half_height / pieces as f64;
        let segs = (0..pieces)
            .map(|i| Segment::Line {
                a: C64::new(re, -half_height + h * i as f64),
                b: C64::new(re, -half_height + h * (i + 1) as f64),
            })
            .collect();
        Self::new(segs)
    }

    /// Wedge with the given vertex, rays at angles `±angle`, truncated at `length`,
    /// traversed from the lower ray end through the vertex to the upper ray end.
    pub fn wedge(vertex: C64, angle: f64, length: f64, pieces_per_ray: usize) -> Self {
        let p = pieces_per_ray.max(1);
        let mut segs = Vec::with_capacity(2 * p);
        let lower = C64::from_polar(1.0, -angle);
        let upper = C64::from_polar(1.0, angle);
        let h = length / p as f64;
        for i in (0..p).rev() {
            segs.push(Segment::Line { a: vertex + lower * (h * (i + 1) as f64), b: vertex + lower * (h * i as f64) });
        }
        for i in 0..p {
            segs.push(Segment::Ray { origin: vertex + upper * (h * i as f64), direction: upper, length: h });
        }
        Self::new(segs)
    }

    pub fn is_closed(&self) -> bool {
        match (self.segments.first(), self.segments.last()) {
            (Some(f), Some(l)) => (f.start() - l.end()).norm() < 1e-12,
            _ => false,
        }
    }

    /// Check that consecutive segments share endpoints.
    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(FredholmError::Degenerate("empty contour".into()));
        }
        for s in &self.segments {
            if s.degenerate() {
                return Err(FredholmError::Degenerate(format!("{s:?}")));
            }
        }
        for w in self.segments.windows(2) {
            if (w[0].end() - w[1].start()).norm() > 1e-10 {
                return Err(FredholmError::Degenerate(format!("segments do not join: {:?} -> {:?}", w[0], w[1])));
            }
        }
        Ok(())
    }
}

/// How a grid was produced, so a coarser companion can be rebuilt.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSource {
    Contour(Contour),
    /// `(y, inf)` through `u = y + l / (1 - tau) - l`, tau in [0, 1).
    HalfLine { y: f64, l: f64 },
    Custom,
}

/// Nodes and complex weights (rule weight times parametrization derivative).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub nodes: Vec<C64>,
    pub weights: Vec<C64>,
    /// Nodes per segment.
    pub m: usize,
    pub source: GridSource,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` against the grid.
    pub fn integrate<F: Fn(C64) -> C64>(&self, f: F) -> C64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| f(z) * w).sum()
    }

    /// The same source at `m`; `None` for custom grids.
    pub fn rebuild(&self, m: usize) -> Option<QuadratureGrid> {
        match &self.source {
            GridSource::Contour(c) => discretize(c, m).ok(),
            GridSource::HalfLine { y, l } => half_line(*y, *l, m).ok(),
            GridSource::Custom => None,
        }
    }
}

/// Gauss-Legendre nodes pushed through each segment's parametrization.
pub fn discretize(contour: &Contour, m: usize) -> Result<QuadratureGrid> {
    if m < 4 {
        return Err(FredholmError::Resolution(m));
    }
    contour.validate()?;
    let (x, w) = gauss_legendre_interval(m, 0.0, 1.0);
    let n = contour.segments.len() * m;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for seg in &contour.segments {
        for (s, ws) in x.iter().zip(&w) {
            nodes.push(seg.point(*s));
            weights.push(seg.derivative(*s) * *ws);
        }
    }
    if contour.reversed {
        nodes.reverse();
        weights.reverse();
        for w in &mut weights {
            *w = -*w;
        }
    }
    Ok(QuadratureGrid { nodes, weights, m, source: GridSource::Contour(contour.clone()) })
}

/// Real half-line `(y, inf)` mapped from `tau` in `[0, 1)`.
pub fn half_line(y: f64, l: f64, m: usize) -> Result<QuadratureGrid> {
    if m < 4 {
        return Err(FredholmError::Resolution(m));
    }
    let (x, w) = gauss_legendre_interval(m, 0.0, 1.0);
    let nodes = x.iter().map(|&tau| C64::new(y + l / (1.0 - tau) - l, 0.0)).collect();
    let weights = x.iter().zip(&w).map(|(&tau, &wi)| C64::new(wi * l / ((1.0 - tau) * (1.0 - tau)), 0.0)).collect();
    Ok(QuadratureGrid { nodes, weights, m, source: GridSource::HalfLine { y, l } })
}
