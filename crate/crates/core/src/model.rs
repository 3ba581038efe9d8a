//! Trajectories, places, queries and the match-distance definitions everything
//! else is built on.
//!
//! Place indices in the public API are 1-based: a window `(s, e)` covers places
//! `s..=e` of a trajectory with `n` places, `1 <= s <= e <= n`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

pub type WordId = u32;
pub type TrajId = u32;

/// Queries carry at most this many distinct keywords (one bit per keyword in
/// the coverage masks used during candidate retrieval).
pub const MAX_QUERY_KEYWORDS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("trajectory {0} has no places")]
    EmptyTrajectory(TrajId),
    #[error("non-finite coordinate ({x}, {y})")]
    NonFiniteCoordinate { x: f64, y: f64 },
    #[error("window ({s}, {e}) out of range for a trajectory of {n} places")]
    WindowOutOfRange { s: usize, e: usize, n: usize },
    #[error("query has no keywords")]
    EmptyQuery,
    #[error("query k must be at least 1")]
    ZeroK,
    #[error("query has {0} keywords, at most {MAX_QUERY_KEYWORDS} are supported")]
    TooManyKeywords(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Euclidean distance.
#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// A location with a keyword set. Keywords are kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct Place {
    pub point: Point,
    keywords: Vec<WordId>,
}

impl Place {
    pub fn new(point: Point, mut keywords: Vec<WordId>) -> Self {
        keywords.sort_unstable();
        keywords.dedup();
        Place { point, keywords }
    }

    pub fn keywords(&self) -> &[WordId] {
        &self.keywords
    }

    pub fn contains(&self, word: WordId) -> bool {
        self.keywords.binary_search(&word).is_ok()
    }
}

/// An immutable, non-empty sequence of places.
///
/// Cumulative path lengths are computed once at construction; the path length
/// of a window is the difference of two prefix sums, so every algorithm in the
/// crate scores a window with the exact same floating-point value.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    id: TrajId,
    places: Vec<Place>,
    cum: Vec<f64>,
}

impl Trajectory {
    pub fn new(id: TrajId, places: Vec<Place>) -> Result<Self, ModelError> {
        if places.is_empty() {
            return Err(ModelError::EmptyTrajectory(id));
        }
        if let Some(p) = places.iter().find(|p| !p.point.is_finite()) {
            return Err(ModelError::NonFiniteCoordinate {
                x: p.point.x,
                y: p.point.y,
            });
        }
        let cum = cumulative_lengths(places.iter().map(|p| p.point));
        Ok(Trajectory { id, places, cum })
    }

    pub fn id(&self) -> TrajId {
        self.id
    }

    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    /// 1-based place accessor.
    pub fn place(&self, i: usize) -> &Place {
        &self.places[i - 1]
    }

    /// Prefix sums of segment lengths; `cum[0] == 0`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.places.iter().map(|p| p.point)
    }

    /// Union of the place keyword sets, sorted.
    pub fn keyword_union(&self) -> Vec<WordId> {
        let mut all: Vec<WordId> = self
            .places
            .iter()
            .flat_map(|p| p.keywords.iter().copied())
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    fn check_window(&self, s: usize, e: usize) -> Result<(), ModelError> {
        if s == 0 || s > e || e > self.len() {
            return Err(ModelError::WindowOutOfRange { s, e, n: self.len() });
        }
        Ok(())
    }

    /// Path length of the window `(s, e)`.
    pub fn path_length(&self, s: usize, e: usize) -> Result<f64, ModelError> {
        self.check_window(s, e)?;
        Ok(path_length(&self.cum, s - 1, e - 1))
    }
}

pub(crate) fn cumulative_lengths(points: impl Iterator<Item = Point>) -> Vec<f64> {
    let mut cum = Vec::new();
    let mut prev: Option<Point> = None;
    let mut acc = 0.0;
    for p in points {
        if let Some(q) = prev {
            acc += dist(q, p);
        }
        cum.push(acc);
        prev = Some(p);
    }
    cum
}

/// Path length between 0-based places `s0..=e0`.
#[inline]
pub(crate) fn path_length(cum: &[f64], s0: usize, e0: usize) -> f64 {
    cum[e0] - cum[s0]
}

/// Match distance of the 0-based window `s0..=e0` given precomputed distances
/// from the query to its end places.
#[inline]
pub(crate) fn window_distance(cum: &[f64], ds: f64, de: f64, s0: usize, e0: usize) -> f64 {
    ds.min(de) + path_length(cum, s0, e0)
}

/// A query: location, keyword set and result size.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub point: Point,
    keywords: Vec<WordId>,
    pub k: usize,
}

impl Query {
    pub fn new(point: Point, mut keywords: Vec<WordId>, k: usize) -> Result<Self, ModelError> {
        if !point.is_finite() {
            return Err(ModelError::NonFiniteCoordinate {
                x: point.x,
                y: point.y,
            });
        }
        keywords.sort_unstable();
        keywords.dedup();
        if keywords.is_empty() {
            return Err(ModelError::EmptyQuery);
        }
        if keywords.len() > MAX_QUERY_KEYWORDS {
            return Err(ModelError::TooManyKeywords(keywords.len()));
        }
        if k == 0 {
            return Err(ModelError::ZeroK);
        }
        Ok(Query {
            point,
            keywords,
            k,
        })
    }

    pub fn keywords(&self) -> &[WordId] {
        &self.keywords
    }

    /// Position of `word` among the query keywords.
    pub fn slot(&self, word: WordId) -> Option<usize> {
        self.keywords.binary_search(&word).ok()
    }
}

/// True iff the union of keywords of places `s..=e` covers `keywords`.
pub fn sub_matches(
    traj: &Trajectory,
    s: usize,
    e: usize,
    keywords: &[WordId],
) -> Result<bool, ModelError> {
    if keywords.is_empty() {
        return Err(ModelError::EmptyQuery);
    }
    traj.check_window(s, e)?;
    let window = &traj.places[s - 1..e];
    Ok(keywords
        .iter()
        .all(|w| window.iter().any(|p| p.contains(*w))))
}

/// Match distance of window `(s, e)`: nearer end place plus path length, or
/// infinity when the window does not cover the query keywords.
pub fn match_dist(q: &Query, traj: &Trajectory, s: usize, e: usize) -> Result<f64, ModelError> {
    if !sub_matches(traj, s, e, q.keywords())? {
        return Ok(f64::INFINITY);
    }
    let ds = dist(q.point, traj.place(s).point);
    let de = dist(q.point, traj.place(e).point);
    Ok(window_distance(&traj.cum, ds, de, s - 1, e - 1))
}

/// 1-based inclusive place window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn new(start: usize, end: usize) -> Self {
        Window { start, end }
    }

    /// `self` contains `other` (`self.start <= other.start`, `self.end >= other.end`).
    pub fn contains(&self, other: &Window) -> bool {
        self.start <= other.start && self.end >= other.end
    }
}

/// A scored trajectory with the witness window that attains the distance.
/// `window` is `None` exactly when `distance` is infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchResult {
    pub traj: TrajId,
    pub window: Option<Window>,
    pub distance: f64,
}

impl MatchResult {
    pub fn no_match(traj: TrajId) -> Self {
        MatchResult {
            traj,
            window: None,
            distance: f64::INFINITY,
        }
    }

    pub fn is_match(&self) -> bool {
        self.window.is_some()
    }

    /// Total order by `(distance, traj)`.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.traj.cmp(&other.traj))
    }
}

/// Top-k answer sorted ascending by `(distance, traj)`, distinct trajectories.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TopKAnswer {
    pub results: Vec<MatchResult>,
}

impl TopKAnswer {
    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    /// `(traj, distance)` pairs, the part every algorithm must agree on.
    pub fn digest(&self) -> Vec<(TrajId, f64)> {
        self.results.iter().map(|r| (r.traj, r.distance)).collect()
    }
}

struct Ranked(MatchResult);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.rank_cmp(&other.0)
    }
}

/// Bounded collector of the k best results; `threshold` is the k-th best
/// distance, infinite until k results have been admitted.
pub struct TopK {
    k: usize,
    heap: BinaryHeap<Ranked>,
}

impl TopK {
    pub fn new(k: usize) -> Self {
        TopK {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    pub fn threshold(&self) -> f64 {
        if self.heap.len() < self.k {
            f64::INFINITY
        } else {
            self.heap.peek().map_or(f64::INFINITY, |r| r.0.distance)
        }
    }

    pub fn is_full(&self) -> bool {
        self.heap.len() >= self.k
    }

    /// Admits a finite result if it ranks ahead of the current k-th. Callers
    /// offer each trajectory at most once.
    pub fn offer(&mut self, result: MatchResult) -> bool {
        if !result.is_match() {
            return false;
        }
        if self.heap.len() < self.k {
            self.heap.push(Ranked(result));
            return true;
        }
        let worse = self
            .heap
            .peek()
            .is_some_and(|worst| result.rank_cmp(&worst.0) == Ordering::Less);
        if worse {
            self.heap.pop();
            self.heap.push(Ranked(result));
        }
        worse
    }

    pub fn into_answer(self) -> TopKAnswer {
        let mut results: Vec<MatchResult> = self.heap.into_iter().map(|r| r.0).collect();
        results.sort_by(|a, b| a.rank_cmp(b));
        TopKAnswer { results }
    }
}
