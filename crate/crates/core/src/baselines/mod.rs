//! Reference algorithms the engine is measured and validated against.

mod brute;
mod inverted;
mod rtree;

pub use brute::{brute_force_top_k, Kernel};
pub use inverted::InvertedFile;
pub use rtree::{IrTree, RTree, RtNode, DEFAULT_FANOUT};

use crate::matching::{match_min_dist_instrumented, QueryView};
use crate::model::{MatchResult, Query, Trajectory};

/// Work counters shared by the baselines.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BaselineStats {
    /// Trajectories handed to the match kernel.
    pub candidates: usize,
    /// Tree nodes expanded.
    pub nodes_visited: usize,
    /// Posting-list entries read.
    pub postings_scanned: u64,
}

/// True when the trajectory's keyword union covers the query.
pub(crate) fn covers(q: &Query, union: &[u32]) -> bool {
    q.keywords().iter().all(|w| union.binary_search(w).is_ok())
}

pub(crate) fn score(q: &Query, t: &Trajectory, threshold: f64, stats: &mut BaselineStats) -> MatchResult {
    stats.candidates += 1;
    match_min_dist_instrumented(&QueryView::from_trajectory(q, t), t.id(), threshold).0
}
