//! Shifted log moments of Dirichlet vectors and their decay along a power schedule.

use betawalk::experiments::{dirichlet_log_moments, moment_decay_check, Schedule};
use betawalk::specfun::digamma;

fn main() {
    let alpha = [0.7, 2.0, 1.5];
    let total: f64 = alpha.iter().sum();
    let centered: Vec<f64> = alpha.iter().map(|a| digamma(*a).unwrap() - digamma(total).unwrap()).collect();
    println!("Dirichlet{alpha:?}, centered at E[log X_i]");
    for idx in [[2, 0, 0], [1, 1, 0], [3, 0, 0], [2, 1, 1], [4, 0, 0]] {
        let l = dirichlet_log_moments(&alpha, &idx, &centered).unwrap();
        println!("  L{idx:?} = {l:+.12}");
    }

    for r in [0.3, 0.5, 0.6, 0.9] {
        let rep = moment_decay_check(&Schedule::Power { r, s: r, c1: 1.0, c2: 1.0 }, 4).unwrap();
        println!("\nr = {r}: c = {}, k_min = {}, p >= {}  (pass: {})", rep.c, rep.k_min, rep.p_threshold, rep.pass);
        for row in &rep.rows {
            println!(
                "  L[{}, {}]  |L| a^ceil(k/2) at t = 1e2, 1e3, 1e4: {:.4e} {:.4e} {:.4e}",
                row.multi_index[0], row.multi_index[1], row.products[0], row.products[1], row.products[2]
            );
        }
    }
}
