//! Quenched transition probabilities in one fixed environment: the forward
//! recursion, its tail, and the Dirichlet corner event in two dimensions.

use betawalk::rwre::{dirichlet_event_logprob, quenched_forward, tail_logprob, tail_logprob_direct, EnvSpec};

fn main() {
    let spec = EnvSpec::beta(1.0, 1.0, 2024, 2048).unwrap();
    for row in quenched_forward(&spec).unwrap() {
        if row.t.is_power_of_two() && row.t >= 64 {
            let x = (0.9 * row.t as f64) as i64;
            let x = x + (x - row.t as i64).rem_euclid(2);
            let tail = tail_logprob(&row, x);
            let band = tail_logprob_direct(&spec, row.t, x).unwrap();
            println!(
                "t = {:>5}: log mass {:+.1e}, log P(X >= {x:>5}) = {tail:>10.4} (banded {band:>10.4}), per step {:.4}",
                row.t,
                row.total(),
                -tail / row.t as f64
            );
        }
    }

    let d = EnvSpec::dirichlet([1.0, 1.0, 0.05, 0.05], 7, 512).unwrap();
    for t in [64, 128, 256, 512] {
        println!("2D t = {t:>3}: log P(corner event, y = 0.5) = {:.4}", dirichlet_event_logprob(&d, t, 0.5).unwrap());
    }
}
