//! Beta random walk in random environment: exact rate functions, Fredholm
//! determinant formulas, Tracy-Widom limits, quenched dynamic programming and
//! Monte Carlo fluctuation experiments.

pub mod cli;
pub mod experiments;
pub mod fredholm;
pub mod rate;
pub mod rwre;
pub mod specfun;
