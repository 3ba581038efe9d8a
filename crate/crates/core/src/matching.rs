//! Minimum match distance of one trajectory to a query.
//!
//! [`match_min_dist`] is the linear two-pointer sweep: for each start place it
//! finds the shortest covering window, reusing keyword counters from the
//! previous start. Four pruning rules cut the sweep short once the running
//! threshold (the current k-th best distance) is known. [`naive_min_match_dist`]
//! is the exhaustive quadratic oracle it is tested against.

use crate::model::{
    dist, path_length, window_distance, MatchResult, Point, Query, TrajId, Trajectory, Window,
};

/// Relative slack applied to the threshold before pruning. Pruning only ever
/// fires on bounds that exceed the threshold by more than rounding noise.
const PRUNE_SLACK: f64 = 1e-12;

/// A trajectory restricted to one query: distance from the query to every
/// place, cumulative path lengths, and for each place the query-keyword slots
/// it carries.
#[derive(Debug, Clone)]
pub struct QueryView<'a> {
    dq: Vec<f64>,
    cum: &'a [f64],
    offsets: Vec<u32>,
    slots: Vec<u8>,
    slot_count: usize,
}

impl<'a> QueryView<'a> {
    pub fn from_trajectory(q: &Query, traj: &'a Trajectory) -> Self {
        let mut offsets = Vec::with_capacity(traj.len() + 1);
        let mut slots = Vec::new();
        offsets.push(0);
        for place in traj.places() {
            for &w in place.keywords() {
                if let Some(s) = q.slot(w) {
                    slots.push(s as u8);
                }
            }
            offsets.push(slots.len() as u32);
        }
        QueryView {
            dq: traj.points().map(|p| dist(q.point, p)).collect(),
            cum: traj.cumulative(),
            offsets,
            slots,
            slot_count: q.keywords().len(),
        }
    }

    /// Builds the view from per-keyword place lists (1-based place indices),
    /// one list per query slot, as read from the place postings of an index.
    pub fn from_place_lists(
        q: &Query,
        points: &[Point],
        cum: &'a [f64],
        lists: &[&[u32]],
    ) -> Self {
        debug_assert_eq!(lists.len(), q.keywords().len());
        let n = points.len();
        let mut per_place = vec![0u32; n + 1];
        for list in lists {
            for &p in list.iter() {
                per_place[p as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0u32);
        let mut acc = 0u32;
        for c in &per_place[1..] {
            acc += c;
            offsets.push(acc);
        }
        let mut fill = offsets.clone();
        let mut slots = vec![0u8; acc as usize];
        for (slot, list) in lists.iter().enumerate() {
            for &p in list.iter() {
                let i = p as usize - 1;
                slots[fill[i] as usize] = slot as u8;
                fill[i] += 1;
            }
        }
        QueryView {
            dq: points.iter().map(|&p| dist(q.point, p)).collect(),
            cum,
            offsets,
            slots,
            slot_count: q.keywords().len(),
        }
    }

    pub fn len(&self) -> usize {
        self.dq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dq.is_empty()
    }

    #[inline]
    fn slots_at(&self, i: usize) -> &[u8] {
        &self.slots[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    /// Total query-keyword occurrences over all places.
    pub fn keyword_occurrences(&self) -> usize {
        self.slots.len()
    }
}

/// Per-query-keyword occurrence counts over the current window. A count is
/// the number of places in the window carrying the keyword.
#[derive(Debug, Clone)]
pub struct KeywordCounters {
    counts: Vec<u32>,
    covered: usize,
    updates: u64,
}

impl KeywordCounters {
    fn new(slot_count: usize) -> Self {
        KeywordCounters {
            counts: vec![0; slot_count],
            covered: 0,
            updates: 0,
        }
    }

    #[inline]
    fn add(&mut self, slots: &[u8]) {
        for &s in slots {
            let c = &mut self.counts[s as usize];
            if *c == 0 {
                self.covered += 1;
            }
            *c += 1;
        }
        self.updates += slots.len() as u64;
    }

    #[inline]
    fn remove(&mut self, slots: &[u8]) {
        for &s in slots {
            let c = &mut self.counts[s as usize];
            *c -= 1;
            if *c == 0 {
                self.covered -= 1;
            }
        }
        self.updates += slots.len() as u64;
    }

    /// Drops the whole window; charged as one decrement per occurrence.
    fn reset(&mut self) {
        self.updates += self.counts.iter().map(|&c| c as u64).sum::<u64>();
        self.counts.fill(0);
        self.covered = 0;
    }

    #[inline]
    fn all_covered(&self) -> bool {
        self.covered == self.counts.len()
    }

    pub fn count(&self, slot: usize) -> u32 {
        self.counts[slot]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchStats {
    /// Counter increments plus decrements performed by the sweep.
    pub counter_updates: u64,
    /// Covering windows scored.
    pub windows_scored: u64,
}

/// Minimum match distance with pruning against `threshold`.
///
/// The returned distance is never below the true minimum; it equals the true
/// minimum whenever that minimum is `<= threshold`, and it is infinite when the
/// trajectory does not cover the query. Among equal-distance minimum matches the
/// lexicographically smallest window is reported.
pub fn match_min_dist(view: &QueryView<'_>, traj: TrajId, threshold: f64) -> MatchResult {
    match_min_dist_instrumented(view, traj, threshold).0
}

pub fn match_min_dist_instrumented(
    view: &QueryView<'_>,
    traj: TrajId,
    threshold: f64,
) -> (MatchResult, MatchStats) {
    let n = view.len();
    let limit = threshold * (1.0 + PRUNE_SLACK);
    let dq = &view.dq;
    let cum = view.cum;
    let mut counters = KeywordCounters::new(view.slot_count);
    let mut stats = MatchStats::default();
    let mut best: Option<(f64, usize, usize)> = None;

    // The window is `b..next` (0-based, exclusive end).
    let mut b = 0usize;
    let mut next = 0usize;
    loop {
        if counters.all_covered() && b < next {
            let e = next - 1;
            let md = window_distance(cum, dq[b], dq[e], b, e);
            stats.windows_scored += 1;
            let better = match best {
                None => true,
                // A contained window with equal distance replaces its container.
                Some((d, s, be)) => md < d || (md == d && be == e && b > s),
            };
            if better {
                best = Some((md, b, e));
            }
            // Extending further right only adds path length: advance the start.
            counters.remove(view.slots_at(b));
            b += 1;
            continue;
        }
        if next == n {
            // Nothing to the right can complete the window.
            break;
        }
        let ll = next;
        next += 1;
        if dq[ll] > limit {
            // Every window through this place scores above the threshold.
            counters.reset();
            b = next;
            continue;
        }
        counters.add(view.slots_at(ll));
        while b < ll && dq[b].min(dq[ll]) + path_length(cum, b, ll) > limit {
            counters.remove(view.slots_at(b));
            b += 1;
        }
    }
    stats.counter_updates = counters.updates;

    let result = match best {
        Some((distance, s, e)) => MatchResult {
            traj,
            window: Some(Window::new(s + 1, e + 1)),
            distance,
        },
        None => MatchResult::no_match(traj),
    };
    (result, stats)
}

/// Convenience wrapper building the view from a full trajectory.
pub fn match_trajectory(q: &Query, traj: &Trajectory, threshold: f64) -> MatchResult {
    match_min_dist(&QueryView::from_trajectory(q, traj), traj.id(), threshold)
}

/// Smallest end (0-based) of a covering window starting at each start place.
fn shortest_ends(q: &Query, traj: &Trajectory) -> Vec<Option<usize>> {
    let kw = q.keywords();
    let n = traj.len();
    let mut ends = vec![None; n];
    for (s, end) in ends.iter_mut().enumerate() {
        let mut seen = vec![false; kw.len()];
        let mut covered = 0;
        for e in s..n {
            for (i, w) in kw.iter().enumerate() {
                if !seen[i] && traj.places()[e].contains(*w) {
                    seen[i] = true;
                    covered += 1;
                }
            }
            if covered == kw.len() {
                *end = Some(e);
                break;
            }
        }
    }
    ends
}

/// Exhaustive evaluation of every window. The minimum is reported with the
/// lexicographically smallest minimum match attaining it.
pub fn naive_min_match_dist(q: &Query, traj: &Trajectory) -> MatchResult {
    let kw = q.keywords();
    let n = traj.len();
    let dq: Vec<f64> = traj.points().map(|p| dist(q.point, p)).collect();
    let cum = traj.cumulative();

    let union = traj.keyword_union();
    if kw.iter().any(|w| union.binary_search(w).is_err()) {
        return MatchResult::no_match(traj.id());
    }

    let mut best = f64::INFINITY;
    let mut covering = vec![vec![false; n]; n];
    for s in 0..n {
        let mut seen = vec![false; kw.len()];
        let mut covered = 0;
        for e in s..n {
            for (i, w) in kw.iter().enumerate() {
                if !seen[i] && traj.places()[e].contains(*w) {
                    seen[i] = true;
                    covered += 1;
                }
            }
            if covered == kw.len() {
                covering[s][e] = true;
                let md = window_distance(cum, dq[s], dq[e], s, e);
                if md < best {
                    best = md;
                }
            }
        }
    }
    if best == f64::INFINITY {
        return MatchResult::no_match(traj.id());
    }

    let is_minimum = |s: usize, e: usize| {
        covering[s][e] && (e == s || !covering[s][e - 1]) && (s == e || !covering[s + 1][e])
    };
    let mut fallback = None;
    for s in 0..n {
        for e in s..n {
            if covering[s][e] && window_distance(cum, dq[s], dq[e], s, e) == best {
                if is_minimum(s, e) {
                    return MatchResult {
                        traj: traj.id(),
                        window: Some(Window::new(s + 1, e + 1)),
                        distance: best,
                    };
                }
                fallback.get_or_insert((s, e));
            }
        }
    }
    let (s, e) = fallback.expect("best distance comes from a covering window");
    MatchResult {
        traj: traj.id(),
        window: Some(Window::new(s + 1, e + 1)),
        distance: best,
    }
}

/// All minimum matches: covering windows with no properly contained covering
/// window, ascending by `(start, end)`.
pub fn enumerate_minimum_matches(q: &Query, traj: &Trajectory) -> Vec<Window> {
    let ends = shortest_ends(q, traj);
    let n = traj.len();
    (0..n)
        .filter_map(|s| {
            let e = ends[s]?;
            let next_end = if s + 1 < n { ends[s + 1] } else { None };
            // (s+1, e) covering would be contained in (s, e).
            if next_end == Some(e) {
                None
            } else {
                Some(Window::new(s + 1, e + 1))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Place, WordId};

    fn traj(kws: &[&[WordId]], pts: &[(f64, f64)]) -> Trajectory {
        let places = kws
            .iter()
            .zip(pts)
            .map(|(k, &(x, y))| Place::new(Point::new(x, y), k.to_vec()))
            .collect();
        Trajectory::new(7, places).unwrap()
    }

    fn query(x: f64, y: f64, kw: &[WordId]) -> Query {
        Query::new(Point::new(x, y), kw.to_vec(), 1).unwrap()
    }

    #[test]
    fn missing_keyword_is_no_match() {
        let t = traj(&[&[0], &[1]], &[(0.0, 0.0), (1.0, 0.0)]);
        let q = query(0.0, 0.0, &[0, 2]);
        let r = match_trajectory(&q, &t, f64::INFINITY);
        assert_eq!(r, MatchResult::no_match(7));
        assert_eq!(naive_min_match_dist(&q, &t), MatchResult::no_match(7));
    }

    #[test]
    fn three_place_example() {
        let t = traj(&[&[0], &[1], &[2]], &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let q = query(0.0, 1.0, &[1, 2]);
        let r = match_trajectory(&q, &t, f64::INFINITY);
        assert_eq!(r.window, Some(Window::new(2, 3)));
        assert_eq!(r.distance, 2f64.sqrt() + 1.0);
        assert_eq!(naive_min_match_dist(&q, &t), r);
    }

    #[test]
    fn single_place_distance() {
        let t = traj(&[&[0, 1]], &[(3.0, 4.0)]);
        let q = query(0.0, 0.0, &[0, 1]);
        assert_eq!(naive_min_match_dist(&q, &t).distance, 5.0);
        assert_eq!(match_trajectory(&q, &t, f64::INFINITY).distance, 5.0);
    }

    #[test]
    fn minimum_matches_listing() {
        let t = traj(&[&[0], &[1]], &[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(
            enumerate_minimum_matches(&query(0.0, 0.0, &[0, 1]), &t),
            vec![Window::new(1, 2)]
        );
        let t = traj(&[&[0, 1]], &[(0.0, 0.0)]);
        assert_eq!(
            enumerate_minimum_matches(&query(0.0, 0.0, &[0]), &t),
            vec![Window::new(1, 1)]
        );
        // a b a b: (1,2), (2,3), (3,4) are all minimal.
        let t = traj(
            &[&[0], &[1], &[0], &[1]],
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)],
        );
        assert_eq!(
            enumerate_minimum_matches(&query(0.0, 0.0, &[0, 1]), &t),
            vec![Window::new(1, 2), Window::new(2, 3), Window::new(3, 4)]
        );
    }

    #[test]
    fn pruning_one_skips_far_place() {
        // The far place carries keyword 1; the near run covers both.
        let t = traj(
            &[&[0], &[1], &[0], &[1]],
            &[(0.0, 0.0), (100.0, 0.0), (1.0, 0.0), (1.0, 1.0)],
        );
        let q = query(0.0, 0.0, &[0, 1]);
        let naive = naive_min_match_dist(&q, &t);
        assert_eq!(naive.window, Some(Window::new(3, 4)));
        let pruned = match_trajectory(&q, &t, 10.0);
        assert_eq!(pruned, naive);
    }

    #[test]
    fn threshold_below_optimum_never_undercuts() {
        let t = traj(&[&[0], &[1]], &[(10.0, 0.0), (11.0, 0.0)]);
        let q = query(0.0, 0.0, &[0, 1]);
        let exact = naive_min_match_dist(&q, &t).distance;
        assert_eq!(exact, 11.0);
        for xi in [0.5, 5.0, 10.5] {
            let r = match_trajectory(&q, &t, xi);
            assert!(r.distance > xi);
            assert!(r.distance >= exact);
        }
        assert_eq!(match_trajectory(&q, &t, 11.0).distance, 11.0);
    }

    #[test]
    fn view_from_place_lists_matches_direct_view() {
        let t = traj(
            &[&[0, 3], &[1], &[3], &[0, 1]],
            &[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)],
        );
        let q = query(1.0, 1.0, &[0, 3]);
        let points: Vec<Point> = t.points().collect();
        let w0: Vec<u32> = vec![1, 4];
        let w3: Vec<u32> = vec![1, 3];
        let v1 = QueryView::from_place_lists(&q, &points, t.cumulative(), &[&w0, &w3]);
        let v2 = QueryView::from_trajectory(&q, &t);
        assert_eq!(v1.offsets, v2.offsets);
        assert_eq!(v1.slots, v2.slots);
        assert_eq!(
            match_min_dist(&v1, 7, f64::INFINITY),
            match_min_dist(&v2, 7, f64::INFINITY)
        );
    }

    #[test]
    fn counter_updates_are_linear() {
        let t = traj(
            &[&[0], &[1], &[0], &[2], &[1], &[0]],
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0), (5.0, 0.0)],
        );
        let q = query(0.0, 0.0, &[0, 1, 2]);
        let view = QueryView::from_trajectory(&q, &t);
        let (_, stats) = match_min_dist_instrumented(&view, 7, f64::INFINITY);
        assert!(stats.counter_updates <= 2 * view.keyword_occurrences() as u64);
    }
}
