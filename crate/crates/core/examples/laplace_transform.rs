//! Quenched Laplace transform E[exp(u P(X_t >= x))] as a Fredholm determinant,
//! checked against a small Monte Carlo average over environments.
//!
//! Usage: cargo run --release --example laplace_transform -- [t] [x] [alpha] [beta]

use betawalk::fredholm::{laplace_transform, LaplaceResolution};
use betawalk::rwre::{quenched_row, sample_seed, tail_logprob, EnvSpec};
use num_complex::Complex64 as C64;

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("number")).collect();
    let t = args.first().map_or(8, |v| *v as u32);
    let x = args.get(1).map_or(4, |v| *v as i64);
    let alpha = args.get(2).copied().unwrap_or(1.0);
    let beta = args.get(3).copied().unwrap_or(1.0);

    let n = 50_000;
    let probs: Vec<f64> = (0..n)
        .map(|i| {
            let spec = EnvSpec::beta(alpha, beta, sample_seed(99, i), t).unwrap();
            tail_logprob(&quenched_row(&spec, t).unwrap(), x).exp()
        })
        .collect();

    println!("t = {t}, x = {x}, alpha = {alpha}, beta = {beta}");
    for u in [-0.25, -1.0, -4.0, -16.0] {
        let det = laplace_transform(t, x, C64::new(u, 0.0), alpha, beta, &LaplaceResolution::default()).unwrap();
        let mc = probs.iter().map(|p| (u * p).exp()).sum::<f64>() / n as f64;
        println!("  u = {u:>6}: determinant {:.6} (err {:.1e}), Monte Carlo {mc:.6}", det.value, det.err_est);
    }
}
