//! Drift x(θ), rate I(x(θ)) and fluctuation scale σ(θ) for a few Beta laws.

use betawalk::rate::{drift_point, theta_grid, Model, ModelParams};

fn main() {
    for (alpha, beta) in [(1.0, 1.0), (0.7, 2.0), (2.0, 5.0)] {
        println!("alpha = {alpha}, beta = {beta}");
        println!("  {:>6} {:>12} {:>12} {:>12} {:>12}", "theta", "x", "I", "sigma", "h'''");
        for th in theta_grid(0.05, 0.45, 0.1) {
            let p = ModelParams::new(alpha, beta, th).unwrap();
            let d = drift_point(&p).unwrap();
            let h3 = Model::new(p).unwrap().h_deriv(3).unwrap();
            println!("  {th:>6.2} {:>12.8} {:>12.8} {:>12.8} {:>12.6}", d.x_theta, d.rate_i, d.sigma, h3);
        }
        println!();
    }
}
