//! Shared fixtures for the benchmarks.

use pivotlab::{Electorate, VoteProfile};

/// `k` groups of equal size, all voting for A at the same rate.
pub fn equal_groups(n_total: f64, k: usize, p: f64) -> (VoteProfile, Electorate) {
    (
        VoteProfile::uniform(k, p, 0.0),
        Electorate::uniform(n_total, k).expect("valid electorate"),
    )
}
