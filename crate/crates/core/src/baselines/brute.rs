use crate::matching::{match_trajectory, naive_min_match_dist};
use crate::model::{Query, TopK, TopKAnswer, Trajectory};

use super::covers;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// Exhaustive window enumeration.
    #[default]
    Naive,
    /// The linear sweep without a threshold.
    Linear,
}

/// Scores every trajectory, no pruning of any kind.
pub fn brute_force_top_k(q: &Query, trajectories: &[Trajectory], kernel: Kernel) -> TopKAnswer {
    let mut heap = TopK::new(q.k);
    for t in trajectories {
        if !covers(q, &t.keyword_union()) {
            continue;
        }
        let r = match kernel {
            Kernel::Naive => naive_min_match_dist(q, t),
            Kernel::Linear => match_trajectory(q, t, f64::INFINITY),
        };
        heap.offer(r);
    }
    heap.into_answer()
}
