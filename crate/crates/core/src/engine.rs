//! Top-k query processing over the index by incremental window expansion.
//!
//! A square window of half-side `r` centred on the query grows by the side of
//! the smallest leaf per round. Candidates are trajectories with every query
//! word posted in some leaf meeting the window. Since a match of distance
//! `d <= r` lies entirely inside the window, every trajectory that could beat
//! `r` is a candidate, and the search may stop as soon as the k-th best
//! distance drops below `r`.

use std::collections::{HashMap, HashSet};

use crate::grid::{subtract_intervals, Rect, ZInterval};
use crate::index::{Index, IndexStats};
use crate::matching::{match_min_dist_instrumented, QueryView};
use crate::model::{Query, TopK, TopKAnswer, TrajId, WordId};
use crate::vocab::Vocabulary;

/// How candidates are gathered per round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CtrMode {
    /// Keyword coverage accumulated over the whole window so far.
    #[default]
    Cumulative,
    /// Coverage required within the newly added ring alone. Cheaper, but a
    /// trajectory whose query words post in different rings is never found.
    Ring,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SearchOptions {
    pub mode: CtrMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SearchStats {
    pub rounds: usize,
    pub initial_radius: f64,
    pub final_radius: f64,
    /// Trajectories handed to the match kernel.
    pub candidates: usize,
    /// Component 1 entries read.
    pub cells_scanned: u64,
    /// Trajectory ids read from Component 1 postings.
    pub postings_scanned: u64,
    /// Place indices read from Component 2.
    pub place_postings_read: u64,
    pub counter_updates: u64,
}

/// Probability that a trajectory carries every query word, from document
/// frequencies. Zero when some word occurs nowhere.
pub fn keyword_probability(q: &Query, vocab: &Vocabulary, trajectories: usize) -> f64 {
    if trajectories == 0 {
        return 0.0;
    }
    q.keywords()
        .iter()
        .map(|&w| vocab.df(w) as f64 / trajectories as f64)
        .product()
}

/// Starting half-side: the radius of a disc expected to hold `k` trajectories
/// carrying all query words under uniform placement. `None` when some query
/// word occurs in no trajectory.
pub fn initial_radius(q: &Query, stats: &IndexStats, vocab: &Vocabulary) -> Option<f64> {
    let p = keyword_probability(q, vocab, stats.trajectory_count);
    if p <= 0.0 {
        return None;
    }
    Some(radius_formula(q.k as f64, stats.area, stats.trajectory_count as f64, p).clamp(stats.tau, stats.diagonal().max(stats.tau)))
}

/// `sqrt(k * area / (pi * n * p))`.
pub fn radius_formula(k: f64, area: f64, n: f64, p: f64) -> f64 {
    (k * area / (std::f64::consts::PI * n * p)).sqrt()
}

/// Query words with posting data, rarest first.
fn words_by_frequency(q: &Query, vocab: &Vocabulary) -> Vec<(usize, WordId)> {
    let mut words: Vec<(usize, WordId)> = q.keywords().iter().copied().enumerate().collect();
    words.sort_by_key(|&(_, w)| (vocab.df(w), w));
    words
}

/// Trajectories with every query word posted in some leaf meeting the
/// intervals. Words are processed rarest first and each later word filters
/// the survivors of the earlier ones.
pub fn ctr(q: &Query, intervals: &[ZInterval], index: &Index) -> Vec<TrajId> {
    let mut scratch = SearchStats::default();
    ctr_counted(q, intervals, index, &mut scratch)
}

fn ctr_counted(q: &Query, intervals: &[ZInterval], index: &Index, stats: &mut SearchStats) -> Vec<TrajId> {
    let mut survivors: Option<Vec<TrajId>> = None;
    for (_, w) in words_by_frequency(q, index.vocab()) {
        let mut found = Vec::new();
        for iv in intervals {
            for (_, list) in index.postings_in_interval(w, *iv) {
                stats.cells_scanned += 1;
                stats.postings_scanned += list.len() as u64;
                found.extend_from_slice(list);
            }
        }
        found.sort_unstable();
        found.dedup();
        let next = match survivors {
            None => found,
            Some(prev) => intersect_sorted(&prev, &found),
        };
        if next.is_empty() {
            return next;
        }
        survivors = Some(next);
    }
    survivors.unwrap_or_default()
}

fn intersect_sorted(a: &[TrajId], b: &[TrajId]) -> Vec<TrajId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub fn top_k(index: &Index, q: &Query) -> TopKAnswer {
    top_k_with(index, q, SearchOptions::default()).0
}

pub fn top_k_with(index: &Index, q: &Query, options: SearchOptions) -> (TopKAnswer, SearchStats) {
    let mut stats = SearchStats::default();
    let mut heap = TopK::new(q.k);
    if index.is_empty() {
        return (heap.into_answer(), stats);
    }
    let istats = index.stats();
    let Some(r0) = initial_radius(q, &istats, index.vocab()) else {
        return (heap.into_answer(), stats);
    };
    stats.initial_radius = r0;

    let full = if q.keywords().len() == 64 {
        u64::MAX
    } else {
        (1u64 << q.keywords().len()) - 1
    };
    let words = words_by_frequency(q, index.vocab());
    let mut coverage: HashMap<TrajId, u64> = HashMap::new();
    let mut seen: HashSet<TrajId> = HashSet::new();
    let mut scanned: Vec<ZInterval> = Vec::new();
    let mut radius = r0;

    loop {
        stats.rounds += 1;
        stats.final_radius = radius;
        let window = Rect::square(q.point, radius);
        let intervals = index.grid().window_to_intervals(&window);
        let ring = subtract_intervals(&intervals, &scanned);

        let mut candidates = match options.mode {
            CtrMode::Cumulative => {
                let mut fresh = Vec::new();
                for &(slot, w) in &words {
                    let bit = 1u64 << slot;
                    for iv in &ring {
                        for (_, list) in index.postings_in_interval(w, *iv) {
                            stats.cells_scanned += 1;
                            stats.postings_scanned += list.len() as u64;
                            for &t in list {
                                let mask = coverage.entry(t).or_insert(0);
                                if *mask & bit == 0 {
                                    *mask |= bit;
                                    if *mask == full {
                                        fresh.push(t);
                                    }
                                }
                            }
                        }
                    }
                }
                fresh
            }
            CtrMode::Ring => ctr_counted(q, &ring, index, &mut stats),
        };
        candidates.retain(|t| seen.insert(*t));
        candidates.sort_unstable();

        for t in candidates {
            let rec = &index.trajs[t as usize];
            let lists = index
                .place_postings(t, q.keywords())
                .expect("candidate ids come from the index");
            stats.place_postings_read += lists.iter().map(|l| l.len() as u64).sum::<u64>();
            let view = QueryView::from_place_lists(q, &rec.points, &rec.cum, &lists);
            let (result, ms) = match_min_dist_instrumented(&view, t, heap.threshold());
            stats.candidates += 1;
            stats.counter_updates += ms.counter_updates;
            heap.offer(result);
        }

        if heap.threshold() < radius || index.grid().window_covers_bounds(&window) {
            break;
        }
        scanned = intervals;
        radius += istats.tau;
    }
    (heap.into_answer(), stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Bounds;
    use crate::index::{GridConfig, WordPolicy};
    use crate::ingest::{generate_corpus, generate_queries, CorpusSpec, WorkloadSpec};
    use crate::matching::naive_min_match_dist;
    use crate::model::Point;

    fn stats(area: f64, n: usize, tau: f64, side: f64) -> IndexStats {
        IndexStats {
            trajectory_count: n,
            area,
            side,
            tau,
            leaf_count: 1,
            vocabulary_size: 1,
            total_places: n,
            max_places: 1,
            keyword_slots: n as u64,
            total_path_length: 0.0,
            component1_entries: 0,
            component2_entries: 0,
        }
    }

    #[test]
    fn radius_examples() {
        assert!((radius_formula(1.0, std::f64::consts::PI, 1.0, 1.0) - 1.0).abs() < 1e-15);
        let r1 = radius_formula(1.0, 100.0, 10.0, 0.3);
        let r4 = radius_formula(4.0, 100.0, 10.0, 0.3);
        assert!((r4 - 2.0 * r1).abs() < 1e-12);

        let mut vocab = Vocabulary::new();
        let a = vocab.intern("a");
        let b = vocab.intern("b");
        let q = Query::new(Point::new(0.0, 0.0), vec![a], 1).unwrap();
        assert_eq!(initial_radius(&q, &stats(100.0, 1, 0.5, 10.0), &vocab), None);
        let t = crate::model::Trajectory::new(
            0,
            vec![crate::model::Place::new(Point::new(0.0, 0.0), vec![a])],
        )
        .unwrap();
        vocab.count(&t);
        let r = initial_radius(&q, &stats(std::f64::consts::PI, 1, 0.01, 10.0), &vocab).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        // Clamped to [tau, diagonal].
        let r = initial_radius(&q, &stats(1e12, 1, 0.01, 10.0), &vocab).unwrap();
        assert!((r - 10.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
        let r = initial_radius(&q, &stats(1e-6, 1, 0.5, 10.0), &vocab).unwrap();
        assert_eq!(r, 0.5);
        let qb = Query::new(Point::new(0.0, 0.0), vec![a, b], 1).unwrap();
        assert_eq!(initial_radius(&qb, &stats(1.0, 1, 0.5, 10.0), &vocab), None);
    }

    fn sample(clustering: f64, seed: u64) -> (Index, crate::ingest::Corpus) {
        let spec = CorpusSpec {
            trajectories: 150,
            places_min: 5,
            places_max: 30,
            vocab_size: 40,
            clustering,
            side: 1000.0,
            step_mean: 15.0,
            seed,
            ..CorpusSpec::default()
        };
        let corpus = generate_corpus(&spec);
        let config = GridConfig {
            segment_limit: 40,
            ..GridConfig::default()
        };
        let index = Index::build(&corpus, &config, WordPolicy::default()).unwrap();
        (index, corpus)
    }

    fn brute(corpus: &crate::ingest::Corpus, q: &Query) -> Vec<(TrajId, f64)> {
        let mut all: Vec<_> = corpus
            .trajectories
            .iter()
            .map(|t| naive_min_match_dist(q, t))
            .filter(|r| r.is_match())
            .collect();
        all.sort_by(|a, b| a.rank_cmp(b));
        all.truncate(q.k);
        all.iter().map(|r| (r.traj, r.distance)).collect()
    }

    #[test]
    fn matches_brute_force() {
        for (seed, clustering) in [(3, 0.0), (4, 0.9)] {
            let (index, corpus) = sample(clustering, seed);
            for kw in 1..=3 {
                let spec = WorkloadSpec {
                    queries: 15,
                    keywords_per_query: kw,
                    k: 5,
                    location_radius: 100.0,
                    seed: seed + kw as u64,
                };
                for q in generate_queries(&corpus, &spec).unwrap() {
                    assert_eq!(top_k(&index, &q).digest(), brute(&corpus, &q), "{q:?}");
                }
            }
        }
    }

    #[test]
    fn exhaustion_returns_every_match_sorted() {
        let (index, corpus) = sample(0.5, 9);
        let q = generate_queries(&corpus, &WorkloadSpec { queries: 1, keywords_per_query: 2, k: 10_000, ..WorkloadSpec::default() })
            .unwrap()
            .remove(0);
        let got = top_k(&index, &q).digest();
        assert_eq!(got, brute(&corpus, &q));
        assert!(got.len() < 10_000);
    }

    #[test]
    fn unknown_word_and_empty_index() {
        let (index, _) = sample(0.5, 2);
        let q = Query::new(Point::new(0.0, 0.0), vec![9999], 3).unwrap();
        assert!(top_k(&index, &q).is_empty());
        let empty = Index::build(
            &crate::ingest::Corpus::new(),
            &GridConfig {
                bounds: Some(Bounds::new(0.0, 0.0, 1.0).unwrap()),
                ..GridConfig::default()
            },
            WordPolicy::default(),
        )
        .unwrap();
        assert!(top_k(&empty, &q).is_empty());
    }

    #[test]
    fn whole_space_ctr_matches_fragment_recount() {
        let (index, corpus) = sample(0.5, 5);
        let all = vec![ZInterval::new(0, (1u64 << (2 * index.grid().max_level() as u32)) as u32 - 1)];
        for q in generate_queries(&corpus, &WorkloadSpec { queries: 10, keywords_per_query: 2, ..WorkloadSpec::default() }).unwrap() {
            let expect: Vec<TrajId> = corpus
                .trajectories
                .iter()
                .filter(|t| {
                    let u = t.keyword_union();
                    q.keywords().iter().all(|w| u.binary_search(w).is_ok())
                })
                .map(|t| t.id())
                .collect();
            assert_eq!(ctr(&q, &all, &index), expect);
            assert!(ctr(&q, &[], &index).is_empty());
        }
    }

    #[test]
    fn rounds_grow_by_tau_and_each_candidate_is_scored_once() {
        let (index, corpus) = sample(0.9, 6);
        let tau = index.stats().tau;
        for q in generate_queries(&corpus, &WorkloadSpec { queries: 10, keywords_per_query: 2, ..WorkloadSpec::default() }).unwrap() {
            let (_, s) = top_k_with(&index, &q, SearchOptions::default());
            let expect = s.initial_radius + (s.rounds - 1) as f64 * tau;
            assert!((s.final_radius - expect).abs() <= 1e-9 * expect.max(1.0));
            assert!(s.candidates <= corpus.len());
        }
    }

    #[test]
    fn ring_mode_never_beats_cumulative() {
        let (index, corpus) = sample(0.5, 8);
        for q in generate_queries(&corpus, &WorkloadSpec { queries: 10, keywords_per_query: 3, ..WorkloadSpec::default() }).unwrap() {
            let (cum, _) = top_k_with(&index, &q, SearchOptions::default());
            let (ring, _) = top_k_with(&index, &q, SearchOptions { mode: CtrMode::Ring });
            for (a, b) in cum.results.iter().zip(&ring.results) {
                assert!(a.distance <= b.distance);
            }
        }
    }
}
