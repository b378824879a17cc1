//! Turning a recovered low-rank matrix back into clusters.

use crate::error::{Error, Result};
use crate::matops::SymMatrix;
use crate::model::{region_r, ClusterLayout, CoordSet};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
/// Entries this close to the threshold are reported as ambiguous.
pub const AMBIGUITY_BAND: f64 = 0.05;

/// Coordinates with `L_ij >= threshold`.
pub fn round_region(low_rank: &SymMatrix, threshold: f64) -> CoordSet {
    assert!(
        threshold > 0.0 && threshold < 1.0,
        "threshold {threshold} outside (0, 1)"
    );
    let n = low_rank.order();
    CoordSet::from_fn(n, n, |i, j| low_rank.get(i, j) >= threshold)
}

/// Number of entries within `band` of `threshold`.
pub fn ambiguous_count(low_rank: &SymMatrix, threshold: f64, band: f64) -> usize {
    low_rank
        .as_dense()
        .iter()
        .filter(|&&v| (v - threshold).abs() <= band)
        .count()
}

/// Reads clusters off a block-structured region: the support of each column
/// is one cluster. Nodes with an empty column go to the background.
pub fn extract_clusters(region: &CoordSet) -> Result<ClusterLayout> {
    let n = region.rows();
    if region.cols() != n {
        return Err(Error::Shape {
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", region.rows(), region.cols()),
        });
    }
    if let Some((i, j)) = region.first_asymmetry() {
        return Err(Error::InconsistentBlocks {
            first: i,
            second: j,
            reason: "region is not symmetric",
        });
    }
    let supports: Vec<Vec<usize>> = (0..n).map(|j| region.column(j).collect()).collect();
    let mut assigned = vec![false; n];
    let mut clusters = Vec::new();
    for node in 0..n {
        if assigned[node] || supports[node].is_empty() {
            continue;
        }
        let support = &supports[node];
        if !region.contains(node, node) {
            return Err(Error::InconsistentBlocks {
                first: node,
                second: node,
                reason: "node is missing from its own column support",
            });
        }
        for &other in support {
            if supports[other] != *support {
                return Err(Error::InconsistentBlocks {
                    first: node,
                    second: other,
                    reason: "column supports overlap without being identical",
                });
            }
            assigned[other] = true;
        }
        clusters.push(support.clone());
    }
    ClusterLayout::new(n, clusters)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryOutcome {
    /// Clusters read off the rounded region, when it has block structure.
    pub recovered: Option<ClusterLayout>,
    pub exact: bool,
    pub rounded_region: CoordSet,
    /// Coordinates where the rounded region and the planted region differ.
    pub mismatch_count: usize,
    pub ambiguous: usize,
}

/// Rounds `low_rank` and compares it with the planted layout.
pub fn assess(low_rank: &SymMatrix, planted: &ClusterLayout, threshold: f64) -> RecoveryOutcome {
    let rounded_region = round_region(low_rank, threshold);
    let truth = region_r(planted);
    let mismatch_count =
        rounded_region.difference(&truth).len() + truth.difference(&rounded_region).len();
    let recovered = extract_clusters(&rounded_region).ok();
    let exact = mismatch_count == 0
        && recovered
            .as_ref()
            .is_some_and(|layout| layout.same_partition(planted));
    RecoveryOutcome {
        recovered,
        exact,
        rounded_region,
        mismatch_count,
        ambiguous: ambiguous_count(low_rank, threshold, AMBIGUITY_BAND),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Score {
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_mismatch: f64,
}

pub fn score(outcomes: &[RecoveryOutcome]) -> Score {
    assert!(!outcomes.is_empty(), "scoring needs at least one trial");
    let trials = outcomes.len();
    let successes = outcomes.iter().filter(|o| o.exact).count();
    let mismatches: usize = outcomes.iter().map(|o| o.mismatch_count).sum();
    Score {
        trials,
        successes,
        success_rate: successes as f64 / trials as f64,
        mean_mismatch: mismatches as f64 / trials as f64,
    }
}
