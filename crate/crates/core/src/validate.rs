//! Randomized self-check: every algorithm against its oracle on seeded random
//! instances. A failure carries a shrunken reproducer as JSON.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::baselines::{brute_force_top_k, InvertedFile, IrTree, Kernel, RTree, DEFAULT_FANOUT};
use crate::costmodel::{self, CostParams};
use crate::engine;
use crate::grid::Rect;
use crate::index::{GridConfig, Index, WordPolicy};
use crate::ingest::{query_to_record, trajectory_to_record, Corpus, CorpusSpec};
use crate::matching::{match_trajectory, naive_min_match_dist};
use crate::model::{Place, Point, Query, TopKAnswer, TrajId, Trajectory, WordId};
use crate::snapshot;
use crate::vocab::Vocabulary;

/// Random trajectory of `n` places in the unit-100 square; each place gets
/// up to three keywords from `0..vocab`, possibly none.
pub fn random_trajectory(rng: &mut impl Rng, id: TrajId, n: usize, vocab: u32) -> Trajectory {
    let places = (0..n)
        .map(|_| {
            let count = rng.random_range(0..=3usize);
            let kw = (0..count).map(|_| rng.random_range(0..vocab)).collect();
            Place::new(
                Point::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)),
                kw,
            )
        })
        .collect();
    Trajectory::new(id, places).expect("generated trajectory is valid")
}

/// Random query over `0..vocab` with `1..=max_kw` distinct words.
pub fn random_query(rng: &mut impl Rng, vocab: u32, max_kw: usize, k: usize) -> Query {
    let count = rng.random_range(1..=max_kw.min(vocab as usize));
    let kw: Vec<WordId> = rand::seq::index::sample(rng, vocab as usize, count)
        .into_iter()
        .map(|w| w as WordId)
        .collect();
    Query::new(
        Point::new(rng.random_range(-10.0..110.0), rng.random_range(-10.0..110.0)),
        kw,
        k,
    )
    .expect("generated query is valid")
}

fn word_vocab(size: u32) -> Vocabulary {
    let mut v = Vocabulary::new();
    for w in 0..size {
        v.intern(&format!("k{w}"));
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub instance: usize,
    pub check: &'static str,
    pub message: String,
    /// JSON description of the smallest failing input found.
    pub reproducer: String,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "instance {} failed {}: {}\nreproducer: {}",
            self.instance, self.check, self.message, self.reproducer
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SuiteReport {
    pub instances: usize,
    pub checks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SuiteOptions {
    pub instances: usize,
    pub seed: u64,
    /// Corrupts one Component 1 posting of every built index. Exists to
    /// prove the suite notices.
    pub inject_fault: bool,
}

pub fn run_suite(options: SuiteOptions) -> Result<SuiteReport, Failure> {
    let mut report = SuiteReport::default();
    for i in 0..options.instances {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        report.checks += check_match(i, &mut rng)?;
        report.checks += check_topk(i, &mut rng, options.inject_fault)?;
        report.checks += check_cost(i, &mut rng)?;
        report.instances += 1;
    }
    Ok(report)
}

fn match_mismatch(q: &Query, t: &Trajectory) -> Option<String> {
    let naive = naive_min_match_dist(q, t);
    let fast = match_trajectory(q, t, f64::INFINITY);
    if fast.distance.to_bits() != naive.distance.to_bits() {
        return Some(format!("sweep {} vs naive {}", fast.distance, naive.distance));
    }
    let tau = naive.distance * 0.75;
    let pruned = match_trajectory(q, t, tau);
    if pruned.distance < naive.distance {
        return Some(format!("threshold {tau}: {} below true {}", pruned.distance, naive.distance));
    }
    None
}

fn check_match(instance: usize, rng: &mut impl Rng) -> Result<usize, Failure> {
    let vocab = rng.random_range(1..=8u32);
    let n = rng.random_range(1..=30usize);
    let t = random_trajectory(rng, 0, n, vocab);
    let q = random_query(rng, vocab, 4, 1);
    let Some(message) = match_mismatch(&q, &t) else {
        return Ok(1);
    };
    // Shrink by dropping places while the mismatch persists.
    let mut places = t.places().to_vec();
    let mut i = 0;
    while i < places.len() && places.len() > 1 {
        let mut fewer = places.clone();
        fewer.remove(i);
        let cand = Trajectory::new(0, fewer.clone()).unwrap();
        if match_mismatch(&q, &cand).is_some() {
            places = fewer;
        } else {
            i += 1;
        }
    }
    let small = Trajectory::new(0, places).unwrap();
    let v = word_vocab(vocab);
    Err(Failure {
        instance,
        check: "match",
        message,
        reproducer: json!({
            "trajectory": trajectory_to_record(&small, "t0", &v),
            "query": query_to_record(&v, &q),
        })
        .to_string(),
    })
}

fn answers(index: &Index, corpus: &Corpus, q: &Query) -> Vec<(&'static str, TopKAnswer)> {
    let ts = &corpus.trajectories;
    vec![
        ("brute", brute_force_top_k(q, ts, Kernel::Naive)),
        ("ie", engine::top_k(index, q)),
        ("if", InvertedFile::build(ts).top_k(q, ts).0),
        ("rt", RTree::from_trajectories(ts, 4).top_k(q, ts).0),
        ("irt", IrTree::build(ts, DEFAULT_FANOUT).top_k(q, ts).0),
    ]
}

fn disagreement(index: &Index, corpus: &Corpus, q: &Query) -> Option<String> {
    let all = answers(index, corpus, q);
    let expect = all[0].1.digest();
    all[1..]
        .iter()
        .find(|(_, a)| a.digest() != expect)
        .map(|(name, a)| format!("{name} returned {:?}, brute force {:?}", a.digest(), expect))
}

fn check_topk(instance: usize, rng: &mut impl Rng, inject_fault: bool) -> Result<usize, Failure> {
    let spec = CorpusSpec {
        trajectories: rng.random_range(20..=60),
        places_min: 2,
        places_max: 25,
        vocab_size: rng.random_range(5..=30),
        clustering: [0.0, 0.5, 0.9][rng.random_range(0..3usize)],
        side: 1000.0,
        step_mean: 20.0,
        seed: rng.random(),
        ..CorpusSpec::default()
    };
    let corpus = crate::ingest::generate_corpus(&spec);
    let policy = WordPolicy::ALL[rng.random_range(0..3usize)];
    let config = GridConfig {
        segment_limit: rng.random_range(4..=40),
        max_level: rng.random_range(2..=8),
        bounds: None,
    };
    let mut index = Index::build(&corpus, &config, policy).expect("generated corpus indexes");
    if inject_fault {
        let victim = rng.random_range(0..corpus.len()) as TrajId;
        index.inject_posting_fault(victim);
    }
    let repro = |message: String, check: &'static str, q: Option<&Query>| Failure {
        instance,
        check,
        message,
        reproducer: json!({
            "corpus_spec": format!("{spec:?}"),
            "segment_limit": config.segment_limit,
            "max_level": config.max_level,
            "policy": policy.to_string(),
            "query": q.map(|q| query_to_record(&corpus.vocab, q)),
        })
        .to_string(),
    };
    let mut checks = 0;

    if let Err(message) = index.check_consistency() {
        return Err(repro(message, "index", None));
    }
    checks += 1;

    let bytes = snapshot::to_bytes(&index);
    match snapshot::from_bytes(&bytes) {
        Ok(back) if back == index && snapshot::to_bytes(&back) == bytes => checks += 1,
        Ok(_) => return Err(repro("snapshot round trip changed the index".into(), "snapshot", None)),
        Err(e) => return Err(repro(e.to_string(), "snapshot", None)),
    }

    let b = index.grid().bounds().rect();
    for _ in 0..3 {
        let (x, y) = (rng.random_range(b.min_x..=b.max_x), rng.random_range(b.min_y..=b.max_y));
        let window = Rect::square(Point::new(x, y), rng.random_range(0.0..b.max_x - b.min_x));
        if let Err(message) = check_intervals(&index, &window) {
            return Err(repro(message, "grid", None));
        }
        checks += 1;
    }

    let vocab = corpus.vocab.len() as u32;
    for _ in 0..3 {
        let k = rng.random_range(1..=8);
        let q = random_query(rng, vocab, 3, k);
        if let Some(message) = disagreement(&index, &corpus, &q) {
            return Err(repro(message, "top-k", Some(&q)));
        }
        checks += 1;
    }
    Ok(checks)
}

/// The merged intervals must select exactly the leaves whose box meets the
/// window, as found by testing every leaf.
pub fn check_intervals(index: &Index, window: &Rect) -> Result<(), String> {
    let grid = index.grid();
    let intervals = grid.window_to_intervals(window);
    if intervals.windows(2).any(|w| w[0].end as u64 + 1 >= w[1].start as u64) {
        return Err(format!("intervals not disjoint and merged: {intervals:?}"));
    }
    let b = grid.bounds().rect();
    let clipped = Rect::new(
        window.min_x.max(b.min_x),
        window.min_y.max(b.min_y),
        window.max_x.min(b.max_x),
        window.max_y.min(b.max_y),
    );
    for leaf in grid.leaves() {
        let r = grid.cell_rect(leaf);
        let hit = clipped.min_x <= clipped.max_x
            && clipped.min_y <= clipped.max_y
            && r.min_x <= clipped.max_x
            && r.min_y <= clipped.max_y
            && (r.max_x > clipped.min_x || r.max_x >= b.max_x)
            && (r.max_y > clipped.min_y || r.max_y >= b.max_y);
        let range = grid.code_range(leaf);
        let selected = intervals.iter().any(|iv| iv.intersects(&range));
        if hit != selected {
            return Err(format!("leaf {leaf:?} exhaustive {hit}, intervals {selected}"));
        }
    }
    Ok(())
}

fn check_cost(instance: usize, rng: &mut impl Rng) -> Result<usize, Failure> {
    let q = rng.random_range(1..=4usize);
    let params = CostParams {
        keywords: rng.random_range(q..=200) as f64,
        max_places: rng.random_range(2..=30),
        keywords_per_place: rng.random_range(1.0..6.0),
        trajectories: 100.0,
        side: 1000.0,
        segment_length: 10.0,
        pr: (0..q).map(|_| rng.random_range(0.001..0.2)).collect(),
    };
    let fail = |message: String| Failure {
        instance,
        check: "cost model",
        message,
        reproducer: format!("{params:?}"),
    };
    let h = costmodel::pr_hat1(&params);
    for i in 1..=params.max_places {
        let closed = 1.0 - (1.0 - h).powi(i as i32);
        if (costmodel::p1(i, &params) - closed).abs() > 1e-12 {
            return Err(fail(format!("p1({i}) differs from its closed form")));
        }
    }
    let two = costmodel::pr_joint(2, &params) - 2.0 * h * (1.0 - h) - h * h;
    if (costmodel::pr_hat_i(2, &params) - two).abs() > 1e-12 {
        return Err(fail("two-place expansion".into()));
    }
    Ok(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_instances_pass_vacuously() {
        let r = run_suite(SuiteOptions { instances: 0, seed: 1, inject_fault: false }).unwrap();
        assert_eq!(r, SuiteReport::default());
    }

    #[test]
    fn seeded_runs_pass_and_repeat() {
        let opts = SuiteOptions { instances: 4, seed: 11, inject_fault: false };
        let a = run_suite(opts).unwrap();
        assert_eq!(a, run_suite(opts).unwrap());
        assert_eq!(a.instances, 4);
    }

    #[test]
    fn injected_fault_is_caught() {
        let err = run_suite(SuiteOptions { instances: 3, seed: 5, inject_fault: true }).unwrap_err();
        assert_eq!(err.check, "index");
        assert!(err.reproducer.contains("segment_limit"));
    }
}
