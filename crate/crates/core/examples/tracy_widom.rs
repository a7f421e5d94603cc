//! The GUE Tracy-Widom distribution as a Fredholm determinant, and the
//! wedge-contour limit kernel that reproduces it.

use betawalk::fredholm::{f_gue, limit_det};
use std::f64::consts::PI;

fn main() {
    println!("{:>6} {:>20} {:>10} {:>20}", "y", "F_GUE(y)", "err", "limit kernel");
    for i in 0..=10 {
        let y = -5.0 + i as f64 * 0.7;
        let f = f_gue(y, 80).unwrap();
        let l = limit_det(y, PI / 3.0, 12).unwrap();
        println!("{y:>6.2} {:>20.15} {:>10.1e} {:>20.15}", f.value, f.err_est, l.value);
    }

    // mean and variance from the tabulated density
    let (lo, hi, n) = (-8.0, 5.0, 260);
    let h = (hi - lo) / n as f64;
    let fs: Vec<f64> = (0..=n).map(|i| f_gue(lo + i as f64 * h, 60).unwrap().value).collect();
    let (mut m1, mut m2) = (0.0, 0.0);
    for i in 0..n {
        let y = lo + (i as f64 + 0.5) * h;
        let p = fs[i + 1] - fs[i];
        m1 += y * p;
        m2 += y * y * p;
    }
    println!("\nmean {m1:.4}, variance {:.4}", m2 - m1 * m1);
}
