//! Analytical estimate of the minimum match distance of the top-1 answer and
//! of the window query that retrieves it.
//!
//! The model assumes places carry `w` keywords each, placed uniformly, with
//! per-word probability `pr(w)` (the chance that one keyword slot of a place
//! holds `w`). Probabilities here are computed exactly as the formulas read;
//! [`noise_clamp`] is the only post-processing and it refuses to hide
//! anything larger than rounding error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, QuadCount, Rect};
use crate::index::IndexStats;
use crate::model::{Point, Query};
use crate::vocab::Vocabulary;

/// Largest deviation outside `[0, 1]` treated as rounding noise.
pub const PROBABILITY_NOISE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CostParams {
    /// Distinct keywords in the space (`K`).
    pub keywords: f64,
    /// Maximum places per trajectory (`C`).
    pub max_places: usize,
    /// Mean keywords per place (`w`).
    pub keywords_per_place: f64,
    /// Trajectory count (`Y`).
    pub trajectories: f64,
    /// Side of the space (`L`).
    pub side: f64,
    /// Mean segment length.
    pub segment_length: f64,
    /// `pr(w)` for each query word; `Q` is its length.
    pub pr: Vec<f64>,
}

impl CostParams {
    /// Parameters for `q` over an indexed corpus. `pr(w)` is the share of all
    /// keyword slots taken by `w`.
    pub fn from_index(stats: &IndexStats, vocab: &Vocabulary, q: &Query) -> CostParams {
        let slots = stats.keyword_slots.max(1) as f64;
        CostParams {
            keywords: stats.vocabulary_size as f64,
            max_places: stats.max_places,
            keywords_per_place: stats.mean_keywords_per_place(),
            trajectories: stats.trajectory_count as f64,
            side: stats.side,
            segment_length: stats.mean_segment_length(),
            pr: q
                .keywords()
                .iter()
                .map(|&w| vocab.place_freq(w) as f64 / slots)
                .collect(),
        }
    }

    /// Same-probability query words: `pr(w) = 1/K`.
    pub fn uniform(keywords: usize, keywords_per_place: f64, query_words: usize, max_places: usize) -> CostParams {
        CostParams {
            keywords: keywords as f64,
            max_places,
            keywords_per_place,
            trajectories: 1.0,
            side: 1.0,
            segment_length: 1.0,
            pr: vec![1.0 / keywords as f64; query_words],
        }
    }

    pub fn query_words(&self) -> usize {
        self.pr.len()
    }

    pub fn is_valid(&self) -> bool {
        self.keywords > 0.0
            && self.max_places > 0
            && self.keywords_per_place > 0.0
            && self.trajectories > 0.0
            && self.side > 0.0
            && self.segment_length >= 0.0
            && !self.pr.is_empty()
            && self.pr.len() as f64 <= self.keywords
            && self.pr.iter().all(|p| (0.0..=1.0).contains(p))
    }
}

/// Maps values within [`PROBABILITY_NOISE`] of `[0, 1]` into it; anything
/// further out is returned as `Err` with the raw value.
pub fn noise_clamp(p: f64) -> Result<f64, f64> {
    if (-PROBABILITY_NOISE..=1.0 + PROBABILITY_NOISE).contains(&p) {
        Ok(p.clamp(0.0, 1.0))
    } else {
        Err(p)
    }
}

/// Probability that one place holds every query word.
pub fn pr_hat1(params: &CostParams) -> f64 {
    pr_joint(1, params)
}

/// Probability that `i` places together hold every query word.
pub fn pr_joint(i: usize, params: &CostParams) -> f64 {
    let slots = i as f64 * params.keywords_per_place;
    params
        .pr
        .iter()
        .map(|&p| 1.0 - (1.0 - p).powf(slots))
        .product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Probability that at least one of `i` places holds every query word on
/// its own, as the binomial sum.
pub fn p1(i: usize, params: &CostParams) -> f64 {
    let h = pr_hat1(params);
    (1..=i)
        .map(|j| binomial(i, j) * h.powi(j as i32) * (1.0 - h).powi((i - j) as i32))
        .sum()
}

/// The joint-containment probabilities `P̂r(1..=n)`.
pub fn pr_hat_table(n: usize, params: &CostParams) -> Vec<f64> {
    let mut table = Vec::with_capacity(n);
    for i in 1..=n {
        let v = if i == 1 {
            pr_hat1(params)
        } else {
            pr_joint(i, params) - p1(i, params) - p2_from(i, params, &table)
        };
        table.push(v);
    }
    table
}

/// `p2` given `P̂r(1..i)` in `lower`.
fn p2_from(i: usize, params: &CostParams, lower: &[f64]) -> f64 {
    if i <= 2 {
        return 0.0;
    }
    (2..i)
        .map(|j| (binomial(i, j) - binomial(i - 2, j - 2)) * lower[j - 1] * (1.0 - pr_joint(i - j, params)))
        .sum()
}

/// Probability that a proper subset of `i` places, excluding both ends,
/// jointly holds the query words. Zero for `i <= 2`.
pub fn p2(i: usize, params: &CostParams) -> f64 {
    if i <= 2 {
        return 0.0;
    }
    p2_from(i, params, &pr_hat_table(i - 1, params))
}

/// `P̂r(i)`; `i = 1` is Eq. 1 itself.
pub fn pr_hat_i(i: usize, params: &CostParams) -> f64 {
    assert!(i >= 1, "place counts start at 1");
    pr_hat_table(i, params)[i - 1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub expected_places: f64,
    /// Distance from the query to the first relevant place.
    pub approach_distance: f64,
    pub distance: f64,
}

/// Expected places visited on the answer trajectory and estimated minimum
/// match distance.
pub fn expected_estimate(params: &CostParams) -> Estimate {
    let c = params.max_places;
    let table = pr_hat_table(c.saturating_sub(1), params);
    let expected_places: f64 = table.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
    let places = params.trajectories * c as f64;
    let spacing = params.side / places.sqrt();
    let visits = (params.keywords / (params.keywords_per_place * params.query_words() as f64)).ceil();
    let approach_distance = spacing * visits;
    Estimate {
        expected_places,
        approach_distance,
        distance: approach_distance + params.segment_length * expected_places,
    }
}

/// Leaves touched by the window of half-side `half_side` around `center`.
pub fn quad_count_estimate(grid: &Grid, center: Point, half_side: f64) -> QuadCount {
    grid.count_quads(&Rect::square(center, half_side.max(0.0)))
}

/// Monte Carlo frequency with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampled {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Sampled {
    fn from_hits(hits: usize, samples: usize) -> Sampled {
        let p = hits as f64 / samples as f64;
        Sampled {
            estimate: p,
            std_error: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
        }
    }

    /// Distance from `value` in standard errors; a zero-variance sample
    /// counts any difference as infinitely far.
    pub fn sigmas(&self, value: f64) -> f64 {
        let d = (self.estimate - value).abs();
        if self.std_error == 0.0 {
            if d == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            d / self.std_error
        }
    }
}

/// A random place: `slots` keyword draws from `keywords` equally likely
/// words. Returns the bitmask of query words (words `0..q`) present.
fn random_place(rng: &mut impl Rng, keywords: usize, slots: usize, q: usize) -> u64 {
    let mut mask = 0u64;
    for _ in 0..slots {
        let w = rng.random_range(0..keywords);
        if w < q {
            mask |= 1 << w;
        }
    }
    mask
}

/// Frequency with which a random place holds all `q` query words, each of its
/// `slots` keywords drawn uniformly from `keywords` words.
pub fn simulate_single_place(keywords: usize, slots: usize, q: usize, samples: usize, seed: u64) -> Sampled {
    assert!(q <= 64 && q <= keywords);
    let full = if q == 64 { u64::MAX } else { (1u64 << q) - 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..samples)
        .filter(|_| random_place(&mut rng, keywords, slots, q) == full)
        .count();
    Sampled::from_hits(hits, samples)
}

/// Frequency of the "jointly contain" event for `i` random places: together
/// they hold every query word, both end places hold some query word, and no
/// proper subset of them holds every query word.
pub fn simulate_joint(i: usize, keywords: usize, slots: usize, q: usize, samples: usize, seed: u64) -> Sampled {
    assert!(i >= 1 && q <= 64 && q <= keywords);
    let full = if q == 64 { u64::MAX } else { (1u64 << q) - 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut masks = vec![0u64; i];
    let mut hits = 0;
    for _ in 0..samples {
        for m in masks.iter_mut() {
            *m = random_place(&mut rng, keywords, slots, q);
        }
        if joint_event(&masks, full) {
            hits += 1;
        }
    }
    Sampled::from_hits(hits, samples)
}

fn joint_event(masks: &[u64], full: u64) -> bool {
    let union = masks.iter().fold(0, |a, m| a | m);
    if union != full || masks[0] == 0 || masks[masks.len() - 1] == 0 {
        return false;
    }
    // A covering proper subset exists iff dropping a single place still covers.
    (0..masks.len()).all(|skip| {
        let rest = masks
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != skip)
            .fold(0, |a, (_, m)| a | m);
        rest != full
    })
}
