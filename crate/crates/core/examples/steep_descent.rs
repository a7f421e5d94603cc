//! Sweep the steep-descent inequalities over the default parameter grid.

use betawalk::rate::{verify_polygamma, verify_steep_descent, SteepGrid};

fn main() {
    let grid = SteepGrid::default();
    let mut reports = verify_polygamma(&[1, 2, 3, 4], &grid.xs);
    reports.extend(verify_steep_descent(&grid));
    for r in &reports {
        let w = r.witnesses.first().map_or("-", |w| w.point.as_str());
        println!(
            "{:<20} {:>6} points  min margin {:>12.4e}  {}  [{}]",
            r.suite,
            r.evaluated,
            r.min_margin,
            if r.pass { "ok  " } else { "FAIL" },
            w
        );
    }
}
