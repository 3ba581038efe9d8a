use crate::model::{Query, TopK, TopKAnswer, TrajId, Trajectory, WordId};

use super::{score, BaselineStats};

/// Trajectory-level inverted file: word to the sorted ids of trajectories
/// whose keyword union contains it.
#[derive(Debug, Clone, Default)]
pub struct InvertedFile {
    postings: Vec<Vec<TrajId>>,
}

impl InvertedFile {
    pub fn build(trajectories: &[Trajectory]) -> Self {
        let mut postings: Vec<Vec<TrajId>> = Vec::new();
        for t in trajectories {
            for w in t.keyword_union() {
                let w = w as usize;
                if postings.len() <= w {
                    postings.resize_with(w + 1, Vec::new);
                }
                postings[w].push(t.id());
            }
        }
        for list in &mut postings {
            list.sort_unstable();
        }
        InvertedFile { postings }
    }

    pub fn postings(&self, word: WordId) -> &[TrajId] {
        self.postings.get(word as usize).map_or(&[], Vec::as_slice)
    }

    /// Trajectories containing every query word, ascending.
    pub fn candidates(&self, q: &Query, stats: &mut BaselineStats) -> Vec<TrajId> {
        let mut lists: Vec<&[TrajId]> = q.keywords().iter().map(|&w| self.postings(w)).collect();
        lists.sort_by_key(|l| l.len());
        let mut out = lists[0].to_vec();
        stats.postings_scanned += out.len() as u64;
        for list in &lists[1..] {
            if out.is_empty() {
                break;
            }
            stats.postings_scanned += list.len() as u64;
            out.retain(|t| list.binary_search(t).is_ok());
        }
        out
    }

    /// Intersects the query's posting lists and scores each survivor.
    /// `trajectories[i]` must have id `i`.
    pub fn top_k(&self, q: &Query, trajectories: &[Trajectory]) -> (TopKAnswer, BaselineStats) {
        let mut stats = BaselineStats::default();
        let mut heap = TopK::new(q.k);
        for t in self.candidates(q, &mut stats) {
            let r = score(q, &trajectories[t as usize], heap.threshold(), &mut stats);
            heap.offer(r);
        }
        (heap.into_answer(), stats)
    }
}
