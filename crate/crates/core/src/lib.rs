//! Approximation algorithms for the asymmetric traveling salesman path
//! problem (ATSPP), its k-person variant and the directed latency problem,
//! together with the LP relaxations they are measured against and exact
//! exponential-time baselines.
//!
//! All arithmetic is exact: distances, LP values and flows are
//! [`Rational`]s, so every approximation bound is checked with `<=` rather
//! than with a tolerance.
//!
//! The crate is organised bottom-up:
//!
//! * [`metric`]: instances, validation, metric closure and generators.
//! * [`graph`]: matching, max-flow, flow decomposition, Euler tours and
//!   friends.
//! * [`lp`]: an exact simplex solver and the cutting-plane drivers for
//!   LP(α) and the directed latency LP.
//! * [`cover`]: minimum path-cycle covers and the α > ½ rounding.
//! * [`atspp`]: the iterated cover algorithm, multi-path covers and the
//!   k-person algorithm.
//! * [`latency`]: the bucketed directed latency algorithm.
//! * [`oracle`]: subset dynamic programs used as ground truth.
//! * [`report`]: batch gap reports.

pub mod atspp;
pub mod check;
pub mod cover;
pub mod error;
pub mod graph;
pub mod latency;
pub mod lp;
pub mod metric;
pub mod oracle;
pub mod par;
pub mod rational;
pub mod report;

pub use error::{Error, Result};
pub use metric::MetricInstance;
pub use rational::Rational;

/// `⌈log₂ n⌉`, the logarithm used throughout the algorithms. `ceil_log2(1) == 0`.
pub fn ceil_log2(n: usize) -> u32 {
    assert!(n > 0, "ceil_log2 of zero");
    usize::BITS - (n - 1).leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::ceil_log2;

    #[test]
    fn ceil_log2_small_values() {
        let expected = [
            (1, 0),
            (2, 1),
            (3, 2),
            (4, 2),
            (5, 3),
            (8, 3),
            (9, 4),
            (16, 4),
            (17, 5),
        ];
        for (n, lg) in expected {
            assert_eq!(ceil_log2(n), lg, "n = {n}");
        }
    }
}
