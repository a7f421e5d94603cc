//! Monte Carlo fluctuation experiments for the normalized log tail
//! probability, Kolmogorov-Smirnov comparison against F_GUE, parameter
//! schedules for intermediate disorder, and the Dirichlet log-moment calculus.

use crate::fredholm::{det_on_grid, half_line, parity_adjusted_site, AiryQuadrature, FredholmError, HALF_LINE_SCALE};
use crate::rate::{Model, ModelParams, RateError};
use crate::rwre::{self, EnvSpec, RwreError};
use crate::specfun::{frak_g, polygamma_real, SpecError, MAX_ORDER};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("empty sample")]
    Empty,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("moment order {0} exceeds the cap of {MAX_ORDER}")]
    Order(usize),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Rwre(#[from] RwreError),
    #[error(transparent)]
    Fredholm(#[from] FredholmError),
    #[error(transparent)]
    Special(#[from] SpecError),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

// ---------------------------------------------------------------------------
// schedules

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    Fixed { alpha: f64, beta: f64 },
    /// alpha_t = c1 t^r, beta_t = c2 t^s.
    Power { r: f64, s: f64, c1: f64, c2: f64 },
}

/// Validity flags of a schedule. A fixed schedule violates none of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleFlags {
    pub as1_ok: bool,
    pub as2_ok: bool,
    pub gcond_ok: bool,
}

impl Schedule {
    pub fn flags(&self) -> ScheduleFlags {
        match *self {
            Schedule::Fixed { .. } => ScheduleFlags { as1_ok: true, as2_ok: true, gcond_ok: true },
            Schedule::Power { r, s, .. } => {
                let gcond_ok = r + (r - s).max(0.0) < 1.0;
                // for power laws t g(alpha_t, beta_t) diverges whenever gcond holds
                ScheduleFlags { as1_ok: r > 0.0 && s > 0.0, as2_ok: gcond_ok, gcond_ok }
            }
        }
    }

    pub fn params_at(&self, t: f64) -> (f64, f64) {
        match *self {
            Schedule::Fixed { alpha, beta } => (alpha, beta),
            Schedule::Power { r, s, c1, c2 } => (c1 * t.powf(r), c2 * t.powf(s)),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Schedule::Fixed { alpha, beta } => alpha > 0.0 && beta > 0.0,
            Schedule::Power { c1, c2, .. } => {
                let f = self.flags();
                c1 > 0.0 && c2 > 0.0 && f.as1_ok && f.gcond_ok
            }
        };
        if ok {
            Ok(())
        } else {
            Err(ExperimentError::Schedule(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleEval {
    pub t: f64,
    pub alpha_t: f64,
    pub beta_t: f64,
    pub x_theta: f64,
    pub rate_i: f64,
    pub sigma_t: f64,
    pub sigma3_t: f64,
    /// t 𝔤(alpha_t, beta_t).
    pub t_g: f64,
    pub valid: bool,
}

pub fn schedule_eval(schedule: &Schedule, t: f64, theta: f64) -> Result<ScheduleEval> {
    if !(t >= 1.0) {
        return Err(ExperimentError::Config(format!("t must be >= 1, got {t}")));
    }
    let (a, b) = schedule.params_at(t);
    let f = schedule.flags();
    let p = ModelParams::new(a, b, theta);
    let valid = p.is_ok() && f.as1_ok && f.as2_ok && f.gcond_ok;
    let m = Model::new(p.unwrap_or(ModelParams::unchecked(a, b, theta)))?;
    let sigma = m.sigma()?;
    Ok(ScheduleEval {
        t,
        alpha_t: a,
        beta_t: b,
        x_theta: m.x,
        rate_i: m.rate_i,
        sigma_t: sigma,
        sigma3_t: sigma.powi(3) * t,
        t_g: t * frak_g(a, b)?,
        valid,
    })
}

// ---------------------------------------------------------------------------
// statistics

/// (log_tail + I t) / (t^{1/3} σ).
pub fn normalized_statistic(log_tail: f64, t: f64, rate_i: f64, sigma: f64) -> f64 {
    (log_tail + rate_i * t) / (t.cbrt() * sigma)
}

/// sup_x |F_n(x) - F(x)| evaluated at the sample points.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(ExperimentError::Empty);
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    Ok(d.clamp(0.0, 1.0))
}

/// F_GUE tabulated on a uniform grid and linearly interpolated.
#[derive(Debug, Clone)]
pub struct GueTable {
    pub y0: f64,
    pub dy: f64,
    pub values: Vec<f64>,
}

impl GueTable {
    pub fn build(lo: f64, hi: f64, n: usize, m: usize) -> Result<Self> {
        let airy = AiryQuadrature::default();
        let dy = (hi - lo) / (n - 1) as f64;
        let raw = (0..n)
            .into_par_iter()
            .map(|i| {
                let grid = half_line(lo + dy * i as f64, HALF_LINE_SCALE, m)?;
                Ok(det_on_grid(&airy, &grid, -1.0)?.re.clamp(0.0, 1.0))
            })
            .collect::<std::result::Result<Vec<f64>, FredholmError>>()?;
        // enforce monotonicity against rounding noise in the far tails
        let mut values = raw;
        for i in 1..values.len() {
            values[i] = values[i].max(values[i - 1]);
        }
        Ok(Self { y0: lo, dy, values })
    }

    pub fn eval(&self, y: f64) -> f64 {
        let s = (y - self.y0) / self.dy;
        if s <= 0.0 {
            return self.values[0];
        }
        let i = s.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let f = s - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

/// Shared table: 2000 points on [-10, 6] at 120 nodes, built on first use.
pub fn gue_table() -> &'static GueTable {
    static TABLE: OnceLock<GueTable> = OnceLock::new();
    TABLE.get_or_init(|| GueTable::build(-10.0, 6.0, 2000, 120).expect("F_GUE table"))
}

// ---------------------------------------------------------------------------
// fluctuation experiments

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnvChoice {
    #[default]
    Beta1d,
    /// Static Dirichlet on Z^2 with weights (alpha_t, beta_t, t^-p, t^-p).
    Dirichlet2d,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub env: EnvChoice,
    pub schedule: Schedule,
    pub theta: f64,
    pub t_list: Vec<u32>,
    pub n_samples: usize,
    pub master_seed: u64,
    /// Decay exponent of the two small Dirichlet weights.
    #[serde(default)]
    pub dirichlet_p: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if self.n_samples < 50 {
            return Err(ExperimentError::Config(format!("n_samples must be >= 50, got {}", self.n_samples)));
        }
        if self.t_list.is_empty() || self.t_list.contains(&0) {
            return Err(ExperimentError::Config("t_list must be nonempty and positive".into()));
        }
        if !(self.theta > 0.0 && self.theta < 0.5) {
            return Err(ExperimentError::Config(format!("theta must lie in (0, 0.5), got {}", self.theta)));
        }
        if let Schedule::Fixed { alpha, beta } = self.schedule {
            ModelParams::new(alpha, beta, self.theta)?;
        }
        match (self.env, self.dirichlet_p) {
            (EnvChoice::Dirichlet2d, Some(p)) if p >= 0.0 => Ok(()),
            (EnvChoice::Dirichlet2d, _) => Err(ExperimentError::Config("dirichlet2d needs dirichlet_p >= 0".into())),
            (EnvChoice::Beta1d, None) => Ok(()),
            (EnvChoice::Beta1d, Some(_)) => Err(ExperimentError::Config("dirichlet_p only applies to dirichlet2d".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatSample {
    pub t: u32,
    pub sample_index: usize,
    pub seed: u64,
    pub x_target: i64,
    pub log_tail_prob: f64,
    pub x_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KSReport {
    pub t: u32,
    pub n_samples: usize,
    pub ks_distance: f64,
    pub sample_mean: f64,
    pub sample_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub samples: Vec<StatSample>,
    pub ks: Vec<KSReport>,
    pub schedule: Vec<ScheduleEval>,
}

/// Environment seed of sample `index` at horizon `t`.
pub fn experiment_seed(master: u64, t: u32, index: usize) -> u64 {
    rwre::sample_seed(master ^ rwre::mix64(t as u64), index as u64)
}

fn one_sample(cfg: &ExperimentConfig, ev: &ScheduleEval, t: u32, index: usize) -> Result<StatSample> {
    let seed = experiment_seed(cfg.master_seed, t, index);
    let tf = t as f64;
    let (x_target, log_tail) = match cfg.env {
        EnvChoice::Beta1d => {
            let spec = EnvSpec::beta(ev.alpha_t, ev.beta_t, seed, t)?;
            let x = parity_adjusted_site(ev.x_theta * tf, t);
            (x, rwre::tail_logprob_direct(&spec, t, x)?)
        }
        EnvChoice::Dirichlet2d => {
            let small = tf.powf(-cfg.dirichlet_p.unwrap_or(0.0));
            let spec = EnvSpec::dirichlet([ev.alpha_t, ev.beta_t, small, small], seed, t)?;
            // effective integer threshold of the real event, on the parity of t
            let mut x = (ev.x_theta * tf).ceil() as i64;
            if (x - t as i64).rem_euclid(2) != 0 {
                x += 1;
            }
            (x, rwre::dirichlet_event_logprob(&spec, t, ev.x_theta)?)
        }
    };
    let x_t = normalized_statistic(log_tail, tf, ev.rate_i, ev.sigma_t);
    Ok(StatSample { t, sample_index: index, seed, x_target, log_tail_prob: log_tail, x_t })
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Draw `n_samples` environments per t, evaluate the normalized statistic and
/// compare its empirical law with F_GUE.
pub fn run_fluctuation_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let table = gue_table();
    let mut out = ExperimentOutput { samples: Vec::new(), ks: Vec::new(), schedule: Vec::new() };
    for &t in &cfg.t_list {
        let ev = schedule_eval(&cfg.schedule, t as f64, cfg.theta)?;
        if !ev.valid {
            return Err(ExperimentError::Schedule(format!("parameters at t = {t} are outside the admissible window: {ev:?}")));
        }
        let samples = (0..cfg.n_samples)
            .into_par_iter()
            .map(|i| one_sample(cfg, &ev, t, i))
            .collect::<Result<Vec<_>>>()?;
        let xs: Vec<f64> = samples.iter().map(|s| s.x_t).collect();
        if let Some(bad) = samples.iter().find(|s| !s.x_t.is_finite()) {
            return Err(ExperimentError::Config(format!("non-finite statistic: {bad:?}")));
        }
        let (mean, sd) = mean_sd(&xs);
        out.ks.push(KSReport {
            t,
            n_samples: xs.len(),
            ks_distance: ks_distance(&xs, |y| table.eval(y))?,
            sample_mean: mean,
            sample_sd: sd,
        });
        out.samples.extend(samples);
        out.schedule.push(ev);
    }
    Ok(out)
}

pub const SAMPLE_COLUMNS: &str = "t,sample_index,seed,x_target,log_tail_prob,x_t_statistic";
pub const KS_COLUMNS: &str = "t,n_samples,ks_distance,sample_mean,sample_sd";

pub fn samples_csv(samples: &[StatSample]) -> String {
    let mut s = String::from(SAMPLE_COLUMNS);
    s.push('\n');
    for r in samples {
        writeln!(s, "{},{},{},{},{:.16e},{:.16e}", r.t, r.sample_index, r.seed, r.x_target, r.log_tail_prob, r.x_t).unwrap();
    }
    s
}

pub fn ks_csv(reports: &[KSReport]) -> String {
    let mut s = String::from(KS_COLUMNS);
    s.push('\n');
    for r in reports {
        writeln!(s, "{},{},{:.16e},{:.16e},{:.16e}", r.t, r.n_samples, r.ks_distance, r.sample_mean, r.sample_sd).unwrap();
    }
    s
}

// ---------------------------------------------------------------------------
// Dirichlet log moments

/// A partial derivative of the log partition function, as a multi-index.
type Deriv = Vec<usize>;
/// Sum of coefficient * product of derivatives; factors kept sorted.
type Poly = BTreeMap<Vec<Deriv>, f64>;

fn unit(k: usize, i: usize) -> Deriv {
    let mut d = vec![0; k];
    d[i] = 1;
    d
}

/// L_{n + e_i} = A_{e_i} L_n + ∂_i L_n, expanded symbolically.
fn raise(poly: &Poly, k: usize, i: usize) -> Poly {
    let mut out = Poly::new();
    for (factors, c) in poly {
        let mut f = factors.clone();
        f.push(unit(k, i));
        f.sort();
        *out.entry(f).or_insert(0.0) += c;
        for j in 0..factors.len() {
            let mut f = factors.clone();
            f[j][i] += 1;
            f.sort();
            *out.entry(f).or_insert(0.0) += c;
        }
    }
    out
}

/// The moment as a polynomial in derivatives of A, by the recursion.
fn moment_poly(multi_index: &[usize]) -> Poly {
    let k = multi_index.len();
    let mut p = Poly::new();
    p.insert(Vec::new(), 1.0);
    for (i, &n) in multi_index.iter().enumerate() {
        for _ in 0..n {
            p = raise(&p, k, i);
        }
    }
    p
}

/// ∂^d A for A(α) = Σ (log Γ(α_i) - α_i M_i) - log Γ(Σ α).
fn a_deriv(d: &[usize], alpha: &[f64], shifts: &[f64], total: f64) -> Result<f64> {
    let n: usize = d.iter().sum();
    let nonzero: Vec<usize> = (0..d.len()).filter(|&i| d[i] > 0).collect();
    let mut v = -polygamma_real(n - 1, total)?;
    if nonzero.len() == 1 {
        let i = nonzero[0];
        v += polygamma_real(n - 1, alpha[i])?;
        if n == 1 {
            v -= shifts[i];
        }
    }
    Ok(v)
}

/// E[Π (log X_i - M_i)^{n_i}] for X ~ Dirichlet(alpha).
pub fn dirichlet_log_moments(alpha: &[f64], multi_index: &[usize], shifts: &[f64]) -> Result<f64> {
    if alpha.len() != multi_index.len() || alpha.len() != shifts.len() || alpha.is_empty() {
        return Err(ExperimentError::Config("alpha, multi_index and shifts must have equal nonzero length".into()));
    }
    if alpha.iter().any(|a| !(*a > 0.0)) {
        return Err(ExperimentError::Config(format!("alpha must be positive: {alpha:?}")));
    }
    let degree: usize = multi_index.iter().sum();
    if degree > MAX_ORDER {
        return Err(ExperimentError::Order(degree));
    }
    let total: f64 = alpha.iter().sum();
    let mut cache: BTreeMap<Deriv, f64> = BTreeMap::new();
    let mut sum = 0.0;
    for (factors, c) in moment_poly(multi_index) {
        let mut term = c;
        for f in &factors {
            let v = match cache.get(f) {
                Some(v) => *v,
                None => {
                    let v = a_deriv(f, alpha, shifts, total)?;
                    cache.insert(f.clone(), v);
                    v
                }
            };
            term *= v;
        }
        sum += term;
    }
    Ok(sum)
}

// ---------------------------------------------------------------------------
// moment decay along a schedule

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub multi_index: [usize; 2],
    pub degree: usize,
    /// |L| alpha^{ceil(k/2)} at each t.
    pub products: Vec<f64>,
    /// max/min of the products.
    pub drift: f64,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentDecayReport {
    pub r: f64,
    /// ceil(5/(3r) - 1/3).
    pub c: u64,
    /// Minimal k with ceil(k/2) = c.
    pub k_min: u64,
    /// Threshold r c - r for the decay exponent of the small weights.
    pub p_threshold: f64,
    /// Smallest c with c > 5/(3r) + 1, the literal limit condition on the t-scaling.
    pub c_limit_condition: u64,
    pub ts: Vec<f64>,
    pub rows: Vec<DecayRow>,
    pub pass: bool,
}

/// `r` as an exact fraction with denominator at most 10^6.
fn rational(r: f64) -> Result<(u64, u64)> {
    for q in 1..=1_000_000u64 {
        let p = (r * q as f64).round();
        if (r * q as f64 - p).abs() < 1e-9 * q as f64 && p >= 1.0 {
            return Ok((p as u64, q));
        }
    }
    Err(ExperimentError::Schedule(format!("r = {r} is not a simple fraction")))
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Integer part of the check: (c, k_min, p_threshold numerator, denominator).
pub fn decay_thresholds(r: f64) -> Result<(u64, u64, f64)> {
    if !(r > 0.0 && r < 1.0) {
        return Err(ExperimentError::Schedule(format!("r must lie in (0, 1), got {r}")));
    }
    let (p, q) = rational(r)?;
    // ceil(5/(3r) - 1/3) = ceil((5q - p) / (3p))
    let c = ceil_div(5 * q - p, 3 * p);
    let k_min = 2 * c - 1;
    let p_thr = (p * (c - 1)) as f64 / q as f64;
    Ok((c, k_min, p_thr))
}

/// Decay of the shifted log moments of Dirichlet(α_t, α_t, t^-p, t^-p) with
/// α_t = c1 t^r, shifts log(1/2), along t = 10^2, 10^3, 10^4.
pub fn moment_decay_check(schedule: &Schedule, k_max: usize) -> Result<MomentDecayReport> {
    let Schedule::Power { r, s, c1, c2 } = *schedule else {
        return Err(ExperimentError::Schedule("moment decay needs a power schedule".into()));
    };
    if r != s || c1 != c2 || !(c1 > 0.0) {
        return Err(ExperimentError::Schedule("moment decay needs r = s and c1 = c2".into()));
    }
    if k_max == 0 || k_max > MAX_ORDER {
        return Err(ExperimentError::Order(k_max));
    }
    let (c, k_min, p_thr) = decay_thresholds(r)?;
    let (p, q) = rational(r)?;
    // smallest integer strictly above (5q + 3p) / (3p)
    let c_limit_condition = (5 * q + 3 * p) / (3 * p) + 1;
    let ts: Vec<f64> = vec![1e2, 1e3, 1e4];
    let m = (0.5f64).ln();
    let mut rows = Vec::new();
    for k in 1..=k_max {
        for i1 in (0..=k).rev() {
            let idx = [i1, k - i1, 0, 0];
            let mut products = Vec::new();
            for &t in &ts {
                let a = c1 * t.powf(r);
                let small = t.powf(-p_thr);
                let l = dirichlet_log_moments(&[a, a, small, small], &idx, &[m, m, 0.0, 0.0])?;
                products.push(l.abs() * a.powi(k.div_ceil(2) as i32));
            }
            let hi = products.iter().copied().fold(f64::MIN, f64::max);
            let lo = products.iter().copied().fold(f64::MAX, f64::min);
            let first = products[0];
            let bounded = lo > 0.0 && products.iter().all(|v| (v / first - 1.0).abs() <= 0.5);
            rows.push(DecayRow { multi_index: [i1, k - i1], degree: k, products, drift: hi / lo, bounded });
        }
    }
    let pass = rows.iter().all(|r| r.bounded);
    Ok(MomentDecayReport { r, c, k_min, p_threshold: p_thr, c_limit_condition, ts, rows, pass })
}
