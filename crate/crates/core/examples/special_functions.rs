//! Complex log-gamma, polygamma and the polygamma bracketing inequalities.

use betawalk::specfun::{check_polygamma_bounds, log_gamma, log_gamma_along, polygamma, polygamma_real};
use num_complex::Complex64 as C64;

fn main() {
    for z in [C64::new(0.5, 0.0), C64::new(1.0, 5.0), C64::new(0.3, -20.0)] {
        println!("log Gamma({z}) = {:.14}", log_gamma(z).unwrap());
        println!("psi({z})       = {:.14}", polygamma(0, z).unwrap());
    }

    // continuous branch along a vertical line, compared to the principal value
    let path: Vec<C64> = (0..=64).map(|k| C64::new(-2.5, 0.25 * k as f64)).collect();
    let along = log_gamma_along(&path).unwrap();
    for (z, v) in path.iter().zip(&along).step_by(8) {
        println!("  z = {z:>8}: principal {:+.6}i, continuous {:+.6}i", log_gamma(*z).unwrap().im, v.im);
    }

    println!("\n{:>3} {:>6} {:>6} {:>14} {:>12} {:>12}", "k", "x", "y", "value", "single", "difference");
    for k in 1..=4 {
        for (x, y) in [(0.1, 0.5), (1.0, 1.0), (7.5, 0.2)] {
            let (s, d) = check_polygamma_bounds(k, x, y).unwrap();
            println!(
                "{k:>3} {x:>6} {y:>6} {:>14.6e} {:>12.3e} {:>12.3e}",
                polygamma_real(k, x).unwrap(),
                s.margin(),
                d.margin()
            );
        }
    }
}
