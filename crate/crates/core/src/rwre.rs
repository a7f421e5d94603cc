//! Seeded random environments and exact quenched probabilities.
//!
//! Site weights are a pure function of `(seed, site, time)`: a splitmix-style
//! hash of the triple seeds a small per-site generator, so environments never
//! need to be stored and any sample can be regenerated in isolation.

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RwreError {
    #[error("time {t} is beyond the horizon t_max = {t_max}")]
    Horizon { t: u32, t_max: u32 },
    #[error("invalid environment: {0}")]
    Invalid(String),
    #[error("enumeration over {t} steps is too large (limit {limit})")]
    Size { t: u32, limit: u32 },
    #[error("operation needs a {0} environment")]
    Kind(&'static str),
}

pub type Result<T> = std::result::Result<T, RwreError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnvKind {
    /// Right-step probability Beta(alpha, beta) at every space-time site.
    Beta1D { alpha: f64, beta: f64 },
    /// Static Dirichlet weights on Z^2, in the order e1, e2, -e1, -e2.
    Dirichlet2D { alpha: [f64; 4] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub kind: EnvKind,
    pub seed: u64,
    pub t_max: u32,
}

impl EnvSpec {
    pub fn beta(alpha: f64, beta: f64, seed: u64, t_max: u32) -> Result<Self> {
        let s = Self { kind: EnvKind::Beta1D { alpha, beta }, seed, t_max };
        s.validate()?;
        Ok(s)
    }

    pub fn dirichlet(alpha: [f64; 4], seed: u64, t_max: u32) -> Result<Self> {
        let s = Self { kind: EnvKind::Dirichlet2D { alpha }, seed, t_max };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            EnvKind::Beta1D { alpha, beta } => alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite(),
            EnvKind::Dirichlet2D { alpha } => alpha.iter().all(|a| *a > 0.0 && a.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(RwreError::Invalid(format!("{:?}", self.kind)))
        }
    }

    /// Same environment law, different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }

    fn check_time(&self, t: u32) -> Result<()> {
        if t < self.t_max {
            Ok(())
        } else {
            Err(RwreError::Horizon { t, t_max: self.t_max })
        }
    }
}

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn site_hash(seed: u64, a: i64, b: i64) -> u64 {
    mix64(seed ^ mix64((a as u64) ^ mix64(b as u64).rotate_left(17)))
}

/// Seed for the `index`-th environment drawn under `master`.
pub fn sample_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// Uniform on the open interval (0, 1) from 53 hash bits.
fn open_unit(h: u64) -> f64 {
    ((h >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// log of a Gamma(a, 1) variate (Marsaglia-Tsang, with the U^{1/a} boost below 1),
/// kept in log space so that tiny shapes do not underflow.
fn log_gamma_variate<R: Rng>(a: f64, rng: &mut R) -> f64 {
    if a < 1.0 {
        let u: f64 = rng.sample(Open01);
        return log_gamma_variate(a + 1.0, rng) + u.ln() / a;
    }
    let d = a - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let lv = 3.0 * v.ln();
        let u: f64 = rng.sample(Open01);
        if u.ln() < 0.5 * x * x + d - d * lv.exp() + d * lv {
            return d.ln() + lv;
        }
    }
}

pub(crate) fn lse(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (m, n) = if a > b { (a, b) } else { (b, a) };
    m + (n - m).exp().ln_1p()
}

/// log-sum-exp of a slice; -inf for an empty or all -inf slice.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// (log B, log(1 - B)) at space-time site (x, t) of a Beta environment.
pub fn site_weight(spec: &EnvSpec, x: i64, t: u32) -> Result<(f64, f64)> {
    spec.check_time(t)?;
    match spec.kind {
        EnvKind::Beta1D { alpha, beta } => Ok(beta_log_weight(alpha, beta, spec.seed, x, t)),
        EnvKind::Dirichlet2D { .. } => Err(RwreError::Kind("Beta1D")),
    }
}

#[inline]
fn beta_log_weight(alpha: f64, beta: f64, seed: u64, x: i64, t: u32) -> (f64, f64) {
    let h = site_hash(seed, x, t as i64);
    if alpha == 1.0 && beta == 1.0 {
        let u = open_unit(h);
        return (u.ln(), (-u).ln_1p());
    }
    let mut rng = SmallRng::seed_from_u64(h);
    loop {
        let lx = log_gamma_variate(alpha, &mut rng);
        let ly = log_gamma_variate(beta, &mut rng);
        let s = lse(lx, ly);
        let (lb, l1b) = (lx - s, ly - s);
        // B must stay strictly inside (0, 1)
        if lb < 0.0 && l1b < 0.0 && lb.is_finite() && l1b.is_finite() {
            return (lb, l1b);
        }
    }
}

/// Log Dirichlet weights at site z of a static 2D environment, order e1, e2, -e1, -e2.
/// `t` is only checked against the horizon: the environment does not depend on time.
pub fn dirichlet_weight(spec: &EnvSpec, z: (i64, i64), t: u32) -> Result<[f64; 4]> {
    spec.check_time(t)?;
    match spec.kind {
        EnvKind::Dirichlet2D { alpha } => Ok(dirichlet_log_weight(&alpha, spec.seed, z)),
        EnvKind::Beta1D { .. } => Err(RwreError::Kind("Dirichlet2D")),
    }
}

fn dirichlet_log_weight(alpha: &[f64; 4], seed: u64, z: (i64, i64)) -> [f64; 4] {
    let mut rng = SmallRng::seed_from_u64(site_hash(seed ^ 0x2d2d_2d2d, z.0, z.1));
    let mut g = [0.0; 4];
    for (g, a) in g.iter_mut().zip(alpha) {
        *g = log_gamma_variate(*a, &mut rng);
    }
    let s = log_sum_exp(&g);
    g.map(|v| v - s)
}

/// log P_ω(X_t = x) over x = x_min, x_min + 2, ..., -x_min.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuenchedRow {
    pub t: u32,
    pub x_min: i64,
    pub log_probs: Vec<f64>,
}

impl QuenchedRow {
    pub fn log_prob(&self, x: i64) -> f64 {
        let d = x - self.x_min;
        if d < 0 || d % 2 != 0 {
            return f64::NEG_INFINITY;
        }
        self.log_probs.get((d / 2) as usize).copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.log_probs.iter().enumerate().map(move |(i, &l)| (self.x_min + 2 * i as i64, l))
    }

    pub fn total(&self) -> f64 {
        log_sum_exp(&self.log_probs)
    }
}

/// log P_ω(X_t >= x).
pub fn tail_logprob(row: &QuenchedRow, x: i64) -> f64 {
    let t = row.t as i64;
    if x <= -t {
        return 0.0;
    }
    if x > t {
        return f64::NEG_INFINITY;
    }
    let start = ((x - row.x_min + 1).max(0) / 2) as usize;
    log_sum_exp(&row.log_probs[start.min(row.log_probs.len())..])
}

/// Rows t = 0, 1, ..., t_max of the forward recursion
/// P(t+1, x) = P(t, x-1) B(x-1, t) + P(t, x+1) (1 - B(x+1, t)).
pub struct QuenchedForward {
    spec: EnvSpec,
    alpha: f64,
    beta: f64,
    row: Option<QuenchedRow>,
}

pub fn quenched_forward(spec: &EnvSpec) -> Result<QuenchedForward> {
    spec.validate()?;
    let EnvKind::Beta1D { alpha, beta } = spec.kind else {
        return Err(RwreError::Kind("Beta1D"));
    };
    Ok(QuenchedForward { spec: *spec, alpha, beta, row: Some(QuenchedRow { t: 0, x_min: 0, log_probs: vec![0.0] }) })
}

impl Iterator for QuenchedForward {
    type Item = QuenchedRow;

    fn next(&mut self) -> Option<QuenchedRow> {
        let row = self.row.take()?;
        if row.t < self.spec.t_max {
            let t = row.t;
            let mut next = vec![f64::NEG_INFINITY; row.log_probs.len() + 1];
            for (i, &lp) in row.log_probs.iter().enumerate() {
                let x = row.x_min + 2 * i as i64;
                let (lb, l1b) = beta_log_weight(self.alpha, self.beta, self.spec.seed, x, t);
                next[i] = lse(next[i], lp + l1b);
                next[i + 1] = lse(next[i + 1], lp + lb);
            }
            self.row = Some(QuenchedRow { t: t + 1, x_min: row.x_min - 1, log_probs: next });
        }
        Some(row)
    }
}

/// The row at time `t` (streaming, O(t) memory).
pub fn quenched_row(spec: &EnvSpec, t: u32) -> Result<QuenchedRow> {
    if t > spec.t_max {
        return Err(RwreError::Horizon { t, t_max: spec.t_max });
    }
    Ok(quenched_forward(spec)?.nth(t as usize).expect("row within horizon"))
}

/// log P_ω(X_t >= x) computed only on sites that can still reach [x, ∞) by time t.
/// Exact: every path ending at or above x stays inside that band.
pub fn tail_logprob_direct(spec: &EnvSpec, t: u32, x: i64) -> Result<f64> {
    spec.validate()?;
    if t > spec.t_max {
        return Err(RwreError::Horizon { t, t_max: spec.t_max });
    }
    let EnvKind::Beta1D { alpha, beta } = spec.kind else {
        return Err(RwreError::Kind("Beta1D"));
    };
    let ti = t as i64;
    if x <= -ti {
        return Ok(0.0);
    }
    if x > ti {
        return Ok(f64::NEG_INFINITY);
    }
    // smallest useful site at time s, on the parity of s
    let lo = |s: i64| -> i64 {
        let b = x - (ti - s);
        let b = if (b - s).rem_euclid(2) != 0 { b + 1 } else { b };
        b.max(-s)
    };
    let mut cur_lo = 0i64;
    let mut cur = vec![0.0f64];
    let mut next = Vec::new();
    for s in 0..ti {
        let nlo = lo(s + 1);
        let n = ((s + 1 - nlo) / 2 + 1) as usize;
        next.clear();
        next.resize(n, f64::NEG_INFINITY);
        for (i, &lp) in cur.iter().enumerate() {
            let y = cur_lo + 2 * i as i64;
            let (lb, l1b) = beta_log_weight(alpha, beta, spec.seed, y, s as u32);
            let up = (y + 1 - nlo) / 2;
            next[up as usize] = lse(next[up as usize], lp + lb);
            if y - 1 >= nlo {
                let dn = ((y - 1 - nlo) / 2) as usize;
                next[dn] = lse(next[dn], lp + l1b);
            }
        }
        std::mem::swap(&mut cur, &mut next);
        cur_lo = nlo;
    }
    let start = ((x - cur_lo + 1).max(0) / 2) as usize;
    Ok(log_sum_exp(&cur[start.min(cur.len())..]))
}

/// log P(X_t ∈ A_{t,y}), A_{t,y} = {z : |z|_1 = t, z_1 >= (t + t y)/2}, for a
/// static Dirichlet environment. Such endpoints are only reached by paths with
/// steps in {e1, e2} or in {e1, -e2}; the pure-e1 path lies in both and is
/// subtracted once.
pub fn dirichlet_event_logprob(spec: &EnvSpec, t: u32, y: f64) -> Result<f64> {
    spec.validate()?;
    let EnvKind::Dirichlet2D { alpha } = spec.kind else {
        return Err(RwreError::Kind("Dirichlet2D"));
    };
    if t > spec.t_max {
        return Err(RwreError::Horizon { t, t_max: spec.t_max });
    }
    if !(y > 0.0 && y <= 1.0) {
        return Err(RwreError::Invalid(format!("y must lie in (0, 1], got {y}")));
    }
    if t == 0 {
        return Ok(0.0);
    }
    let threshold = (t as f64 + t as f64 * y) / 2.0;
    let w = |z: (i64, i64)| dirichlet_log_weight(&alpha, spec.seed, z);

    // directed DP; p[k] = log P(k steps e1 and s - k steps sgn*e2)
    let directed = |sgn: i64| -> f64 {
        let mut p = vec![0.0f64];
        for s in 0..t as i64 {
            let mut q = vec![f64::NEG_INFINITY; p.len() + 1];
            for (k, &lp) in p.iter().enumerate() {
                let k = k as i64;
                let lw = w((k, sgn * (s - k)));
                let second = if sgn > 0 { lw[1] } else { lw[3] };
                q[k as usize + 1] = lse(q[k as usize + 1], lp + lw[0]);
                q[k as usize] = lse(q[k as usize], lp + second);
            }
            p = q;
        }
        let tail: Vec<f64> = p.iter().enumerate().filter(|(k, _)| *k as f64 >= threshold).map(|(_, v)| *v).collect();
        log_sum_exp(&tail)
    };
    let a = directed(1);
    let b = directed(-1);
    let pure: f64 = (0..t as i64).map(|j| w((j, 0))[0]).sum();
    let s = lse(a, b);
    // log(e^a + e^b - e^pure)
    Ok(s + (-(pure - s).exp()).ln_1p())
}

pub const MAX_ENUM_1D: u32 = 12;
pub const MAX_ENUM_2D: u32 = 8;

/// log of the total weight of all 2^t step sequences whose endpoint satisfies `pred`.
pub fn brute_force_1d<P: Fn(i64) -> bool>(spec: &EnvSpec, t: u32, pred: P) -> Result<f64> {
    if t > MAX_ENUM_1D {
        return Err(RwreError::Size { t, limit: MAX_ENUM_1D });
    }
    if t > spec.t_max {
        return Err(RwreError::Horizon { t, t_max: spec.t_max });
    }
    let EnvKind::Beta1D { alpha, beta } = spec.kind else {
        return Err(RwreError::Kind("Beta1D"));
    };
    let mut total = 0.0;
    for bits in 0u32..(1 << t) {
        let (mut x, mut w) = (0i64, 1.0);
        for s in 0..t {
            let (lb, l1b) = beta_log_weight(alpha, beta, spec.seed, x, s);
            if bits >> s & 1 == 1 {
                w *= lb.exp();
                x += 1;
            } else {
                w *= l1b.exp();
                x -= 1;
            }
        }
        if pred(x) {
            total += w;
        }
    }
    Ok(total.ln())
}

/// log of the total weight of all 4^t step sequences (static 2D environment)
/// whose endpoint satisfies `pred`.
pub fn brute_force_2d<P: Fn((i64, i64)) -> bool>(spec: &EnvSpec, t: u32, pred: P) -> Result<f64> {
    if t > MAX_ENUM_2D {
        return Err(RwreError::Size { t, limit: MAX_ENUM_2D });
    }
    if t > spec.t_max {
        return Err(RwreError::Horizon { t, t_max: spec.t_max });
    }
    let EnvKind::Dirichlet2D { alpha } = spec.kind else {
        return Err(RwreError::Kind("Dirichlet2D"));
    };
    const STEPS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
    let mut total = 0.0;
    for code in 0u32..(1 << (2 * t)) {
        let (mut z, mut w) = ((0i64, 0i64), 1.0);
        for s in 0..t {
            let d = (code >> (2 * s) & 3) as usize;
            w *= dirichlet_log_weight(&alpha, spec.seed, z)[d].exp();
            z = (z.0 + STEPS[d].0, z.1 + STEPS[d].1);
        }
        if pred(z) {
            total += w;
        }
    }
    Ok(total.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_deterministic_and_inside() {
        let s = EnvSpec::beta(0.7, 2.0, 11, 100).unwrap();
        let a = site_weight(&s, 3, 5).unwrap();
        assert_eq!(a, site_weight(&s, 3, 5).unwrap());
        assert_ne!(a, site_weight(&s, 3, 6).unwrap());
        assert!(a.0 < 0.0 && a.1 < 0.0);
        assert!((a.0.exp() + a.1.exp() - 1.0).abs() < 1e-15);
        assert!(matches!(site_weight(&s, 0, 100), Err(RwreError::Horizon { .. })));
        assert!(EnvSpec::beta(0.0, 1.0, 0, 1).is_err());
    }

    #[test]
    fn beta_mean() {
        for (a, b) in [(1.0, 1.0), (0.7, 2.0), (5.0, 0.5)] {
            let s = EnvSpec::beta(a, b, 99, 2).unwrap();
            let n = 100_000;
            let v: Vec<f64> = (0..n).map(|x| site_weight(&s, x, 1).unwrap().0.exp()).collect();
            let mean = v.iter().sum::<f64>() / n as f64;
            let var = v.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            assert!((mean - a / (a + b)).abs() < 3.0 * se, "{a} {b}: {mean}");
        }
    }

    #[test]
    fn dirichlet_normalized_even_for_tiny_shapes() {
        let s = EnvSpec::dirichlet([2.0, 2.0, 1e-5, 1e-5], 4, 10).unwrap();
        for x in 0..50 {
            let w = dirichlet_weight(&s, (x, -x), 0).unwrap();
            assert!(w.iter().all(|v| v.is_finite() && *v <= 0.0));
            assert!((w.iter().map(|v| v.exp()).sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn first_rows() {
        let s = EnvSpec::beta(1.0, 1.0, 5, 20).unwrap();
        let rows: Vec<_> = quenched_forward(&s).unwrap().take(3).collect();
        let (lb, _) = site_weight(&s, 0, 0).unwrap();
        assert_eq!(rows[1].log_prob(1), lb);
        assert_eq!(rows[1].log_prob(0), f64::NEG_INFINITY);
        for r in quenched_forward(&s).unwrap() {
            assert_eq!(r.log_probs.len(), r.t as usize + 1);
            assert!(r.total().abs() < 1e-12);
        }
    }

    #[test]
    fn tail_edges() {
        let s = EnvSpec::beta(2.0, 3.0, 8, 12).unwrap();
        let r = quenched_row(&s, 9).unwrap();
        assert_eq!(tail_logprob(&r, -9), 0.0);
        assert_eq!(tail_logprob(&r, -20), 0.0);
        assert_eq!(tail_logprob(&r, 10), f64::NEG_INFINITY);
        let all_right: f64 = (0..9).map(|k| site_weight(&s, k, k as u32).unwrap().0).sum();
        assert!((tail_logprob(&r, 9) - all_right).abs() < 1e-13);
        let mut prev = 0.0;
        for x in -9..=9 {
            let v = tail_logprob(&r, x);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn banded_tail_matches_full_row() {
        for (seed, a, b) in [(1, 1.0, 1.0), (2, 0.7, 5.0), (3, 8.0, 8.0)] {
            let s = EnvSpec::beta(a, b, seed, 200).unwrap();
            let r = quenched_row(&s, 200).unwrap();
            for x in [-250, -200, -37, 0, 2, 100, 161, 200, 201] {
                let d = tail_logprob_direct(&s, 200, x).unwrap();
                let f = tail_logprob(&r, x);
                assert!((d - f).abs() < 1e-12 * f.abs().max(1.0) || d == f, "{x}: {d} vs {f}");
            }
        }
    }

    #[test]
    fn two_step_tail() {
        let s = EnvSpec::beta(1.5, 0.5, 3, 4).unwrap();
        let b00 = site_weight(&s, 0, 0).unwrap().0.exp();
        let bm11 = site_weight(&s, -1, 1).unwrap().0.exp();
        let want = (b00 + (1.0 - b00) * bm11).ln();
        let got = brute_force_1d(&s, 2, |x| x >= 0).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert_eq!(brute_force_1d(&s, 4, |_| true).unwrap().abs() < 1e-15, true);
        assert!(matches!(brute_force_1d(&s, 13, |_| true), Err(RwreError::Size { .. })));
    }

    #[test]
    fn event_single_step() {
        let s = EnvSpec::dirichlet([1.0, 2.0, 0.5, 0.3], 17, 5).unwrap();
        let w = dirichlet_weight(&s, (0, 0), 0).unwrap();
        for y in [0.1, 0.5, 1.0] {
            assert!((dirichlet_event_logprob(&s, 1, y).unwrap() - w[0]).abs() < 1e-15);
        }
    }
}
