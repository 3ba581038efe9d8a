//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported, not turned into a failing exit status,
//! unless `ACCEPTANCE_STRICT=1` is set.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trajkw::baselines::{brute_force_top_k, InvertedFile, IrTree, Kernel, RTree, DEFAULT_FANOUT};
use trajkw::costmodel::{self, noise_clamp, simulate_single_place, CostParams};
use trajkw::engine::{self, SearchOptions};
use trajkw::grid::{deinterleave, interleave, Bounds, Rect};
use trajkw::index::{GridConfig, Index, WordPolicy};
use trajkw::ingest::{eligible_trajectories, generate_corpus, generate_records, sample_query, Corpus, CorpusSpec};
use trajkw::matching::{enumerate_minimum_matches, match_trajectory, naive_min_match_dist};
use trajkw::model::{match_dist, Place, Point, Query, TopKAnswer, Trajectory, WordId};
use trajkw::snapshot;
use trajkw::validate::{check_intervals, random_query, random_trajectory};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

// ---------------------------------------------------------------- kernel

/// Sweep against the exhaustive oracle: bit-equal distance and a witness that
/// is a minimum match attaining it.
fn kernel_agrees(q: &Query, t: &Trajectory) -> Result<(), String> {
    let naive = naive_min_match_dist(q, t);
    let fast = match_trajectory(q, t, f64::INFINITY);
    if fast.distance.to_bits() != naive.distance.to_bits() {
        return Err(format!("distance {} vs naive {}", fast.distance, naive.distance));
    }
    match fast.window {
        None if naive.window.is_none() => Ok(()),
        None => Err("sweep found no match".into()),
        Some(w) => {
            if !enumerate_minimum_matches(q, t).contains(&w) {
                return Err(format!("witness {w:?} is not a minimum match"));
            }
            let d = match_dist(q, t, w.start, w.end).map_err(|e| e.to_string())?;
            if d.to_bits() != fast.distance.to_bits() {
                return Err(format!("witness scores {d}, reported {}", fast.distance));
            }
            Ok(())
        }
    }
}

fn all_queries(vocab: u32) -> Vec<Vec<WordId>> {
    (1u32..(1 << vocab))
        .map(|m| (0..vocab).filter(|b| m >> b & 1 == 1).collect())
        .collect()
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let mut random_pairs = 0;
    for _ in 0..10_000 {
        let vocab = r.random_range(1..=16u32);
        let n = r.random_range(1..=50usize);
        let t = random_trajectory(&mut r, 0, n, vocab);
        let q = random_query(&mut r, vocab, 5, 1);
        if let Err(e) = kernel_agrees(&q, &t) {
            return outcome(false, format!("random pair {random_pairs}: {e}"));
        }
        random_pairs += 1;
    }

    // Exhaustive: every keyword-set assignment over 4 words for n <= 4, and
    // every empty/single-word assignment for n <= 8, against every query.
    let queries: Vec<Query> = all_queries(4)
        .into_iter()
        .map(|kw| Query::new(Point::new(50.0, 50.0), kw, 1).unwrap())
        .collect();
    let subsets: Vec<Vec<WordId>> = (0u32..16).map(|m| (0..4).filter(|b| m >> b & 1 == 1).collect()).collect();
    let singles: Vec<Vec<WordId>> = std::iter::once(vec![]).chain((0..4).map(|w| vec![w])).collect();
    let mut exhaustive = 0u64;
    for n in 1..=8usize {
        let choices = if n <= 4 { &subsets } else { &singles };
        let total = choices.len().pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let places: Vec<Place> = (0..n)
                .map(|_| {
                    let kw = choices[c % choices.len()].clone();
                    c /= choices.len();
                    Place::new(Point::new(r.random_range(0.0..100.0), r.random_range(0.0..100.0)), kw)
                })
                .collect();
            let t = Trajectory::new(0, places).unwrap();
            for q in &queries {
                if let Err(e) = kernel_agrees(q, &t) {
                    return outcome(false, format!("exhaustive n={n} assignment {code} query {:?}: {e}", q.keywords()));
                }
                exhaustive += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        elapsed < Duration::from_secs(60),
        format!("{random_pairs} random pairs and {exhaustive} exhaustive pairs bit-equal with minimum-match witnesses in {} (limit 60s)", secs(elapsed)),
    )
}

fn criterion2() -> Outcome {
    let mut r = rng(202);
    let mut checks = 0;
    for pair in 0..1000 {
        let vocab = r.random_range(1..=12u32);
        let n = r.random_range(1..=50usize);
        let t = random_trajectory(&mut r, 0, n, vocab);
        let q = random_query(&mut r, vocab, 4, 1);
        let naive = naive_min_match_dist(&q, &t).distance;
        let base = if naive.is_finite() { naive } else { r.random_range(1.0..300.0) };
        let factors = [0.0, 0.3, 0.7, 0.99, 1.0, 1.0 + 1e-14, 1.01, 1.5, 3.0];
        let thresholds: Vec<f64> = factors
            .iter()
            .map(|f| f * base)
            .chain(std::iter::once(r.random_range(0.0..400.0)))
            .collect();
        for xi in thresholds {
            let got = match_trajectory(&q, &t, xi).distance;
            let bad_value = got <= xi && got.to_bits() != naive.to_bits();
            let missed = naive <= xi && got.to_bits() != naive.to_bits();
            if bad_value || missed || got < naive {
                return outcome(false, format!("pair {pair}, threshold {xi}: returned {got}, true {naive}"));
            }
            checks += 1;
        }
    }
    outcome(true, format!("{checks} (pair, threshold) checks: values within threshold exact, exact whenever the true distance is within"))
}

// ---------------------------------------------------------------- top-k

fn same_answer(a: &TopKAnswer, b: &TopKAnswer) -> bool {
    a.len() == b.len()
        && a.results.iter().zip(&b.results).all(|(x, y)| {
            x.traj == y.traj && (x.distance - y.distance).abs() <= 1e-9 * x.distance.abs().max(y.distance.abs()).max(1.0)
        })
}

struct CorpusRun {
    corpus_mismatches: Vec<String>,
    policy_mismatches: Vec<String>,
    queries: usize,
}

fn criteria3_and_4() -> (Outcome, Outcome) {
    let start = Instant::now();
    let sizes = [500, 800, 1100, 1400, 1700, 2000];
    let clusterings = [0.0, 0.5, 0.9];
    let mut run = CorpusRun {
        corpus_mismatches: Vec::new(),
        policy_mismatches: Vec::new(),
        queries: 0,
    };
    let corpora = 21;
    for c in 0..corpora {
        let spec = CorpusSpec {
            trajectories: sizes[c % sizes.len()],
            places_min: 20,
            places_max: 100,
            clustering: clusterings[c % clusterings.len()],
            seed: 3000 + c as u64,
            ..CorpusSpec::default()
        };
        let corpus = generate_corpus(&spec);
        let ts = &corpus.trajectories;
        let config = GridConfig::default();
        let indexes: Vec<(WordPolicy, Index)> = WordPolicy::ALL
            .iter()
            .map(|&p| (p, Index::build(&corpus, &config, p).unwrap()))
            .collect();
        let inverted = InvertedFile::build(ts);
        let rtree = RTree::from_trajectories(ts, DEFAULT_FANOUT);
        let irtree = IrTree::build(ts, DEFAULT_FANOUT);

        let mut r = rng(4000 + c as u64);
        let eligible: Vec<Vec<usize>> = (2..=5).map(|m| eligible_trajectories(&corpus, m)).collect();
        for qi in 0..100 {
            let k = [5, 10, 15, 20, 25][qi % 5];
            let m = 2 + (qi / 5) % 4;
            let q = sample_query(&corpus, &eligible[m - 2], &mut r, m, k, 200.0);
            run.queries += 1;
            let truth = brute_force_top_k(&q, ts, Kernel::Naive);
            let ie = engine::top_k(&indexes[1].1, &q);
            let others = [
                ("ie", ie),
                ("if", inverted.top_k(&q, ts).0),
                ("rt", rtree.top_k(&q, ts).0),
                ("irt", irtree.top_k(&q, ts).0),
            ];
            for (name, a) in &others {
                if !same_answer(a, &truth) {
                    run.corpus_mismatches.push(format!("corpus {c} query {qi} {name}"));
                }
            }
            for (p, idx) in &indexes {
                if *p == WordPolicy::NeighborUnion {
                    continue;
                }
                if !same_answer(&engine::top_k(idx, &q), &truth) {
                    run.policy_mismatches.push(format!("corpus {c} query {qi} policy {p}"));
                }
            }
        }
    }
    let elapsed = secs(start.elapsed());
    let c3 = outcome(
        run.corpus_mismatches.is_empty(),
        format!(
            "{corpora} corpora x 100 queries: IE, IF, RT, IRT vs brute force, {} mismatches {:?} ({elapsed})",
            run.corpus_mismatches.len(),
            run.corpus_mismatches.iter().take(5).collect::<Vec<_>>()
        ),
    );
    let c4 = outcome(
        run.policy_mismatches.is_empty(),
        format!(
            "{} queries under plain, neighbor-union, prefix: {} mismatches {:?}",
            run.queries,
            run.policy_mismatches.len(),
            run.policy_mismatches.iter().take(5).collect::<Vec<_>>()
        ),
    );
    (c3, c4)
}

// ---------------------------------------------------------------- grid and index

fn grid_invariants(index: &Index, r: &mut ChaCha8Rng, exhaustive: bool) -> Result<usize, String> {
    let grid = index.grid();
    let max = grid.max_level();
    let mut checks = 0;
    let total = 1u64 << (2 * max as u32);
    let codes: Box<dyn Iterator<Item = u32>> = if exhaustive {
        Box::new(0..total as u32)
    } else {
        Box::new((0..100_000).map(|_| r.random_range(0..total) as u32).collect::<Vec<_>>().into_iter())
    };
    for code in codes {
        let leaf = grid.leaf_of_code(code);
        let shift = max - leaf.level;
        let (cx, cy) = deinterleave(code);
        let min_code = interleave(cx >> shift << shift, cy >> shift << shift, max).unwrap();
        if min_code != leaf.code || !grid.code_range(leaf).contains(code) {
            return Err(format!("base code {code} in leaf {leaf:?}, cell minimum {min_code}"));
        }
        checks += 1;
    }
    let b = grid.bounds().rect();
    let side = b.max_x - b.min_x;
    for _ in 0..200 {
        let c = Point::new(r.random_range(b.min_x - 0.1 * side..b.max_x + 0.1 * side), r.random_range(b.min_y - 0.1 * side..b.max_y + 0.1 * side));
        let w = Rect::square(c, r.random_range(0.0..0.6) * side);
        check_intervals(index, &w)?;
        checks += 1;
    }
    let mut prev: Option<(u32, u32)> = None;
    for (key, list) in index.component1().iter() {
        let pair = (key.first(), key.second());
        if prev.is_some_and(|p| p >= pair) || !list.windows(2).all(|w| w[0] < w[1]) {
            return Err(format!("component 1 order broken at {pair:?}"));
        }
        prev = Some(pair);
    }
    checks += 1;
    let bytes = snapshot::to_bytes(index);
    let back = snapshot::from_bytes(&bytes).map_err(|e| e.to_string())?;
    if snapshot::to_bytes(&back) != bytes || &back != index {
        return Err("snapshot round trip is not a fixpoint".into());
    }
    index.check_consistency()?;
    Ok(checks + 2)
}

fn criterion5() -> Outcome {
    let mut r = rng(505);
    let mut checks = 0;
    let mut grids = 0;
    for (max_level, exhaustive, reps) in [(1, true, 4), (2, true, 4), (3, true, 4), (4, true, 4), (5, true, 4), (6, true, 6), (12, false, 6)] {
        for rep in 0..reps {
            let spec = CorpusSpec {
                trajectories: r.random_range(50..300),
                places_min: 3,
                places_max: 40,
                vocab_size: 60,
                clustering: [0.0, 0.5, 0.9][rep % 3],
                side: 1000.0,
                step_mean: 10.0,
                seed: r.random(),
                ..CorpusSpec::default()
            };
            let corpus = generate_corpus(&spec);
            let config = GridConfig {
                segment_limit: r.random_range(2..60),
                max_level,
                bounds: None,
            };
            let policy = WordPolicy::ALL[rep % 3];
            let index = Index::build(&corpus, &config, policy).unwrap();
            match grid_invariants(&index, &mut r, exhaustive) {
                Ok(n) => checks += n,
                Err(e) => return outcome(false, format!("max level {max_level} grid {rep}: {e}")),
            }
            grids += 1;
        }
    }
    outcome(true, format!("{grids} grids (levels 1-6 exhaustive, level 12 sampled), {checks} checks: min-code, interval vs leaf scan, key order, snapshot fixpoint"))
}

// ---------------------------------------------------------------- incremental

fn criterion6() -> Outcome {
    let mut workloads = 0;
    let mut split_runs = 0;
    let mut queries = 0;
    for run in 0..10u64 {
        let spec = CorpusSpec {
            trajectories: 400,
            places_min: 10,
            places_max: 40,
            vocab_size: 200,
            clustering: 0.7,
            seed: 6000 + run,
            ..CorpusSpec::default()
        };
        let records = generate_records(&spec);
        let split = 150 + 20 * run as usize;
        let all = Corpus::from_records(&records).unwrap();
        let bounds = Bounds::covering(all.trajectories.iter().flat_map(|t| t.points()));
        let config = GridConfig {
            segment_limit: 60,
            max_level: 12,
            bounds: Some(bounds),
        };
        let policy = WordPolicy::ALL[run as usize % 3];
        let a = Corpus::from_records(&records[..split]).unwrap();
        let mut inc = Index::build(&a, &config, policy).unwrap();
        let mut splits = 0;
        for rec in &records[split..] {
            let before = inc.grid().leaf_count();
            inc.insert(rec).unwrap();
            if inc.grid().leaf_count() != before {
                splits += 1;
            }
        }
        let fresh = Index::build(&all, &config, policy).unwrap();
        if splits >= 3 {
            split_runs += 1;
        }
        if inc.grid() != fresh.grid() || inc.component1() != fresh.component1() || inc.component2() != fresh.component2() {
            return outcome(false, format!("run {run}: incremental index differs structurally from a fresh build"));
        }
        let mut r = rng(6500 + run);
        let eligible = eligible_trajectories(&all, 2);
        for w in 0..5 {
            for _ in 0..10 {
                let m = r.random_range(1..=3);
                let k = r.random_range(1..=15);
                let q = sample_query(&all, &eligible, &mut r, m, k, 300.0);
                if engine::top_k(&inc, &q) != engine::top_k(&fresh, &q) {
                    return outcome(false, format!("run {run} workload {w}: answers differ for {q:?}"));
                }
                queries += 1;
            }
            workloads += 1;
        }
    }
    outcome(
        split_runs >= 1,
        format!("{workloads} workloads ({queries} queries) identical; {split_runs} of 10 runs forced at least 3 leaf splits; incremental structure equals fresh build"),
    )
}

// ---------------------------------------------------------------- cost model

fn criterion7() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let uniform = CostParams::uniform(20, 5.0, 2, 10);
    let formula = costmodel::pr_hat1(&uniform);
    let sim = simulate_single_place(20, 5, 2, 2_000_000, 77);
    let sigmas = sim.sigmas(formula);
    let ok = sigmas <= 3.0;
    pass &= ok;
    notes.push(format!(
        "Eq.1 {:.5} vs simulated places {:.5} +- {:.5} ({:.1} sigma, {})",
        formula,
        sim.estimate,
        sim.std_error,
        sigmas,
        if ok { "ok" } else { "over 3" }
    ));

    let mut worst_identity = 0.0f64;
    let mut r = rng(707);
    for _ in 0..1000 {
        let q = r.random_range(1..=5);
        let p = CostParams {
            keywords: 1000.0,
            max_places: 10,
            keywords_per_place: r.random_range(1.0..8.0),
            trajectories: 1.0,
            side: 1.0,
            segment_length: 1.0,
            pr: (0..q).map(|_| r.random_range(0.0..0.5)).collect(),
        };
        let h = costmodel::pr_hat1(&p);
        let expect = costmodel::pr_joint(2, &p) - 2.0 * h * (1.0 - h) - h * h;
        worst_identity = worst_identity.max((costmodel::pr_hat_i(2, &p) - expect).abs());
    }
    let ok = worst_identity <= 1e-12;
    pass &= ok;
    notes.push(format!("two-place expansion max error {worst_identity:.1e}"));

    let mut bad_points = Vec::new();
    let mut points = 0;
    for k in [20usize, 50, 100, 1000, 10_000] {
        for w in [1.0, 2.0, 5.0, 10.0] {
            for (q, c) in [(1usize, 10usize), (2, 20), (3, 50), (4, 100), (5, 30)] {
                points += 1;
                let p = CostParams::uniform(k, w, q, c);
                let table = costmodel::pr_hat_table(c - 1, &p);
                let mut values: Vec<f64> = table.clone();
                for i in 1..c {
                    values.push(costmodel::pr_joint(i, &p));
                    values.push(costmodel::p1(i, &p));
                    values.push(costmodel::p2(i, &p));
                }
                let out_of_range = values.iter().filter(|v| noise_clamp(**v).is_err()).count();
                let sum: f64 = table.iter().sum();
                if out_of_range > 0 || sum.is_nan() || sum > 1.0 + 1e-9 {
                    bad_points.push((k, w, q, c, out_of_range, sum));
                }
            }
        }
    }
    let ok = bad_points.is_empty();
    pass &= ok;
    let worst = bad_points
        .iter()
        .max_by(|a, b| a.5.abs().total_cmp(&b.5.abs()))
        .map(|b| format!("; e.g. K={} w={} Q={} C={}: {} values outside [0,1], sum {:.3e}", b.0, b.1, b.2, b.3, b.4, b.5))
        .unwrap_or_default();
    notes.push(format!("{} of {points} grid points violate range or sum{worst}", bad_points.len()));
    outcome(pass, notes.join("; "))
}

// ---------------------------------------------------------------- trends

fn criterion8() -> Outcome {
    let start = Instant::now();
    let spec = CorpusSpec {
        trajectories: 20_000,
        clustering: 0.9,
        seed: 808,
        ..CorpusSpec::default()
    };
    let corpus = generate_corpus(&spec);
    let ts = &corpus.trajectories;
    let inverted = InvertedFile::build(ts);
    let limits = [400, 800, 1200];
    let indexes: Vec<Index> = limits
        .iter()
        .map(|&l| {
            let config = GridConfig {
                segment_limit: l,
                ..GridConfig::default()
            };
            Index::build(&corpus, &config, WordPolicy::default()).unwrap()
        })
        .collect();

    let eligible = eligible_trajectories(&corpus, 5);
    let mut r = rng(818);
    let mut fewer = 0;
    let mut compared = 0;
    let mut fewer_by_size = [0usize; 4];
    let (mut ties, mut more, mut clamped_ties) = (0, 0, 0);
    let mut monotone_chains = 0;
    let mut chains = 0;
    let mut if_by_size = [0usize; 4];
    let mut granularity_answers_agree = true;
    let mut candidates = [0usize; 3];
    let mut ie_time = Duration::ZERO;
    let mut if_time = Duration::ZERO;
    for _ in 0..100 {
        let base = sample_query(&corpus, &eligible, &mut r, 5, 10, 200.0);
        let mut prev = usize::MAX;
        let mut monotone = true;
        for m in 2..=5 {
            let q = Query::new(base.point, base.keywords()[..m].to_vec(), base.k).unwrap();
            let t0 = Instant::now();
            let (if_answer, if_stats) = inverted.top_k(&q, ts);
            if_time += t0.elapsed();
            if_by_size[m - 2] += if_stats.candidates;
            monotone &= if_stats.candidates <= prev;
            prev = if_stats.candidates;

            let mut answers = Vec::new();
            for (i, idx) in indexes.iter().enumerate() {
                let t0 = Instant::now();
                let (a, s) = engine::top_k_with(idx, &q, SearchOptions::default());
                if i == 1 {
                    ie_time += t0.elapsed();
                    compared += 1;
                    if s.candidates < if_stats.candidates {
                        fewer += 1;
                        fewer_by_size[m - 2] += 1;
                    } else if s.candidates == if_stats.candidates {
                        ties += 1;
                        if s.initial_radius >= idx.stats().diagonal() {
                            clamped_ties += 1;
                        }
                    } else {
                        more += 1;
                    }
                }
                candidates[i] += s.candidates;
                answers.push(a);
            }
            granularity_answers_agree &= answers.iter().all(|a| same_answer(a, &if_answer));
        }
        chains += 1;
        if monotone {
            monotone_chains += 1;
        }
    }
    let share = fewer as f64 / compared as f64;
    let (lo, hi) = (
        *candidates.iter().min().unwrap() as f64,
        *candidates.iter().max().unwrap() as f64,
    );
    let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let a = share >= 0.8;
    let b = monotone_chains == chains;
    let c = granularity_answers_agree && spread < 2.0;
    outcome(
        a && b && c,
        format!(
            "(a) IE fewer candidates than IF on {:.0}% of {compared} queries (need 80%), by |q|=2..5 {fewer_by_size:?} of 100 each, {ties} ties ({clamped_ties} with the initial radius clamped to the diagonal), {more} with more; (b) IF candidates non-increasing on {monotone_chains}/{chains} keyword chains, totals by |q|=2..5 {:?}; (c) answers equal across 400/800/1200: {granularity_answers_agree}, candidate totals {:?} spread {:.2}x (need < 2x); wall clock IE {} vs IF {} ({} total)",
            share * 100.0,
            if_by_size,
            candidates,
            spread,
            secs(ie_time),
            secs(if_time),
            secs(start.elapsed())
        ),
    )
}

// ---------------------------------------------------------------- scale

fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find(|l| l.starts_with("VmHWM:"))?
        .split_whitespace()
        .nth(1)?
        .parse()
        .ok()
}

fn criterion9() -> Outcome {
    // Resets the peak-RSS counter where the kernel allows it.
    let _ = std::fs::write("/proc/self/clear_refs", "5");
    let spec = CorpusSpec {
        trajectories: 40_000,
        places_min: 50,
        places_max: 50,
        seed: 909,
        ..CorpusSpec::default()
    };
    let g0 = Instant::now();
    let corpus = generate_corpus(&spec);
    let generated = g0.elapsed();
    let start = Instant::now();
    let index = Index::build(&corpus, &GridConfig::default(), WordPolicy::default()).unwrap();
    let built = start.elapsed();
    let eligible = eligible_trajectories(&corpus, 3);
    let mut r = rng(919);
    let mut answered = 0;
    for _ in 0..50 {
        let q = sample_query(&corpus, &eligible, &mut r, 3, 10, 200.0);
        answered += engine::top_k(&index, &q).len();
    }
    let total = start.elapsed();
    let peak = peak_rss_kib();
    let peak_mib = peak.map(|k| k as f64 / 1024.0);
    let mem_ok = peak_mib.is_some_and(|m| m < 2048.0);
    outcome(
        total < Duration::from_secs(300) && mem_ok,
        format!(
            "40000 x 50 places: build {} + 50 queries {} = {} (limit 300s, generation {} extra); peak RSS {} (limit 2048 MiB); {answered} results",
            secs(built),
            secs(total - built),
            secs(total),
            secs(generated),
            peak_mib.map_or("unavailable".to_string(), |m| format!("{m:.0} MiB"))
        ),
    )
}

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut report = |n: u32, o: Outcome| {
        println!("criterion {n}: {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, o));
    };
    // ACCEPTANCE_ONLY=3,8 restricts the run to the listed criteria.
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let wanted = |n: u32| only.as_ref().is_none_or(|o| o.contains(&n));
    // Scale first, so the peak-memory reading belongs to it alone.
    if wanted(9) {
        report(9, criterion9());
    }
    if wanted(1) {
        report(1, criterion1());
    }
    if wanted(2) {
        report(2, criterion2());
    }
    if wanted(3) || wanted(4) {
        let (c3, c4) = criteria3_and_4();
        report(3, c3);
        report(4, c4);
    }
    let rest: [(u32, fn() -> Outcome); 4] = [(5, criterion5), (6, criterion6), (7, criterion7), (8, criterion8)];
    for (n, f) in rest {
        if wanted(n) {
            report(n, f());
        }
    }

    results.sort_by_key(|r| r.0);
    println!("summary:");
    for (n, o) in &results {
        println!("  criterion {n}: {}", if o.pass { "PASS" } else { "FAIL" });
    }
    let failed = results.iter().filter(|r| !r.1.pass).count();
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
