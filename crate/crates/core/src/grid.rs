//! Z-order cell codes and the adaptive quadtree partition of the data space.
//!
//! The space is a square divided into `2^max_level x 2^max_level` base cells.
//! A base cell's code interleaves its column and row bits (column bit `i` at
//! code bit `2i`, row bit `i` at `2i + 1`). A quad cell at level `l` covers a
//! contiguous code range and is identified by the smallest code in it, so the
//! leaves of the quadtree tile the code space `[0, 4^max_level)` with disjoint
//! ranges.
//!
//! Cells are half-open boxes `[x0, x1) x [y0, y1)`; the maximum edge of the
//! whole space is closed.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::Point;

pub const MAX_SUPPORTED_LEVEL: u8 = 16;
pub const DEFAULT_MAX_LEVEL: u8 = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("cell coordinate ({cx}, {cy}) outside a grid of level {max_level}")]
    CoordinateOutOfGrid { cx: u32, cy: u32, max_level: u8 },
    #[error("point ({x}, {y}) lies outside the grid bounds")]
    OutOfBounds { x: f64, y: f64 },
    #[error("max level {0} exceeds {MAX_SUPPORTED_LEVEL}")]
    LevelTooDeep(u8),
    #[error("segment limit must be at least 1")]
    ZeroSegmentLimit,
    #[error("invalid bounds: side {0}")]
    InvalidBounds(f64),
}

/// Interleaves column and row into a base-resolution code.
pub fn interleave(cx: u32, cy: u32, max_level: u8) -> Result<u32, GridError> {
    if max_level > MAX_SUPPORTED_LEVEL {
        return Err(GridError::LevelTooDeep(max_level));
    }
    let limit = 1u64 << max_level;
    if cx as u64 >= limit || cy as u64 >= limit {
        return Err(GridError::CoordinateOutOfGrid { cx, cy, max_level });
    }
    Ok(spread(cx) | (spread(cy) << 1))
}

/// Inverse of [`interleave`]: `(column, row)`.
pub fn deinterleave(code: u32) -> (u32, u32) {
    (compact(code), compact(code >> 1))
}

#[inline]
fn spread(v: u32) -> u32 {
    let mut x = v & 0x0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333;
    x = (x | (x << 1)) & 0x5555_5555;
    x
}

#[inline]
fn compact(v: u32) -> u32 {
    let mut x = v & 0x5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333;
    x = (x | (x >> 2)) & 0x0f0f_0f0f;
    x = (x | (x >> 4)) & 0x00ff_00ff;
    x = (x | (x >> 8)) & 0x0000_ffff;
    x
}

/// Axis-aligned rectangle, closed for containment tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Rect {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    /// Square of half-side `r` centred on `p`.
    pub fn square(p: Point, r: f64) -> Self {
        Rect::new(p.x - r, p.y - r, p.x + r, p.y + r)
    }

    pub fn min_dist(&self, p: Point) -> f64 {
        let dx = (self.min_x - p.x).max(0.0).max(p.x - self.max_x);
        let dy = (self.min_y - p.y).max(0.0).max(p.y - self.max_y);
        (dx * dx + dy * dy).sqrt()
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.min_x <= other.min_x
            && self.min_y <= other.min_y
            && self.max_x >= other.max_x
            && self.max_y >= other.max_y
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(
            self.min_x.min(other.min_x),
            self.min_y.min(other.min_y),
            self.max_x.max(other.max_x),
            self.max_y.max(other.max_y),
        )
    }

    pub fn of_points(points: impl IntoIterator<Item = Point>) -> Option<Rect> {
        points.into_iter().fold(None, |acc, p| {
            let r = Rect::new(p.x, p.y, p.x, p.y);
            Some(acc.map_or(r, |a: Rect| a.union(&r)))
        })
    }
}

/// The square data space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub side: f64,
}

impl Bounds {
    pub fn new(min_x: f64, min_y: f64, side: f64) -> Result<Self, GridError> {
        if !(side.is_finite() && side > 0.0 && min_x.is_finite() && min_y.is_finite()) {
            return Err(GridError::InvalidBounds(side));
        }
        Ok(Bounds { min_x, min_y, side })
    }

    /// Smallest square anchored at the data minimum that covers `points`.
    pub fn covering(points: impl IntoIterator<Item = Point>) -> Bounds {
        match Rect::of_points(points) {
            None => Bounds {
                min_x: 0.0,
                min_y: 0.0,
                side: 1.0,
            },
            Some(r) => {
                let side = (r.max_x - r.min_x).max(r.max_y - r.min_y);
                let mut side = if side > 0.0 { side } else { 1.0 };
                // min + (max - min) can round below max.
                while r.min_x + side < r.max_x || r.min_y + side < r.max_y {
                    side = side.next_up();
                }
                Bounds {
                    min_x: r.min_x,
                    min_y: r.min_y,
                    side,
                }
            }
        }
    }

    pub fn rect(&self) -> Rect {
        Rect::new(
            self.min_x,
            self.min_y,
            self.min_x + self.side,
            self.min_y + self.side,
        )
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn diagonal(&self) -> f64 {
        self.side * std::f64::consts::SQRT_2
    }

    pub fn contains(&self, p: Point) -> bool {
        let r = self.rect();
        p.x >= r.min_x && p.x <= r.max_x && p.y >= r.min_y && p.y <= r.max_y
    }
}

/// A quad cell: smallest base code it covers plus its depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId {
    pub code: u32,
    pub level: u8,
}

/// Inclusive range of base codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZInterval {
    pub start: u32,
    pub end: u32,
}

impl ZInterval {
    pub fn new(start: u32, end: u32) -> Self {
        debug_assert!(start <= end);
        ZInterval { start, end }
    }

    pub fn contains(&self, code: u32) -> bool {
        self.start <= code && code <= self.end
    }

    pub fn intersects(&self, other: &ZInterval) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// Removes `old` from `new`, both sorted disjoint lists. Used to find the ring
/// of codes a grown window adds.
pub fn subtract_intervals(new: &[ZInterval], old: &[ZInterval]) -> Vec<ZInterval> {
    let mut out = Vec::new();
    let mut j = 0;
    for iv in new {
        let mut start = iv.start as u64;
        let end = iv.end as u64;
        while j < old.len() && (old[j].end as u64) < start {
            j += 1;
        }
        let mut k = j;
        while start <= end {
            match old.get(k) {
                Some(o) if (o.start as u64) <= end => {
                    if (o.start as u64) > start {
                        out.push(ZInterval::new(start as u32, o.start - 1));
                    }
                    start = start.max(o.end as u64 + 1);
                    k += 1;
                }
                _ => {
                    out.push(ZInterval::new(start as u32, end as u32));
                    break;
                }
            }
        }
    }
    out
}

/// A maximal run of consecutive places of one trajectory inside one leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fragment {
    pub cell: CellId,
    /// 1-based first place.
    pub first: usize,
    /// 1-based last place, inclusive.
    pub last: usize,
    /// 1-based position among the trajectory's fragments.
    pub ordinal: usize,
}

/// Number of leaves a window overlaps, split into partially and fully covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QuadCount {
    pub overlapping: usize,
    pub enclosed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    bounds: Bounds,
    max_level: u8,
    segment_limit: usize,
    /// leaf code -> leaf level
    leaves: BTreeMap<u32, u8>,
}

/// Inclusive range of base columns and rows.
#[derive(Debug, Clone, Copy)]
struct BaseBox {
    x0: u32,
    y0: u32,
    x1: u32,
    y1: u32,
}

impl Grid {
    /// Single-leaf grid over `bounds`.
    pub fn root(bounds: Bounds, segment_limit: usize, max_level: u8) -> Result<Grid, GridError> {
        if max_level > MAX_SUPPORTED_LEVEL {
            return Err(GridError::LevelTooDeep(max_level));
        }
        if segment_limit == 0 {
            return Err(GridError::ZeroSegmentLimit);
        }
        let mut leaves = BTreeMap::new();
        leaves.insert(0, 0);
        Ok(Grid {
            bounds,
            max_level,
            segment_limit,
            leaves,
        })
    }

    /// Top-down build: a cell splits into four while it holds more than
    /// `segment_limit` places and is above `max_level`.
    pub fn build(
        points: impl IntoIterator<Item = Point>,
        bounds: Bounds,
        segment_limit: usize,
        max_level: u8,
    ) -> Result<Grid, GridError> {
        let mut grid = Grid::root(bounds, segment_limit, max_level)?;
        let mut codes = points
            .into_iter()
            .map(|p| grid.base_code(p))
            .collect::<Result<Vec<_>, _>>()?;
        codes.sort_unstable();
        grid.leaves.clear();
        grid.refine_into(CellId { code: 0, level: 0 }, &codes);
        Ok(grid)
    }

    /// Builds with bounds covering every point.
    pub fn build_covering(
        points: &[Point],
        segment_limit: usize,
        max_level: u8,
    ) -> Result<Grid, GridError> {
        let bounds = Bounds::covering(points.iter().copied());
        Grid::build(points.iter().copied(), bounds, segment_limit, max_level)
    }

    /// Inserts leaves for the subtree of `cell` given the sorted base codes
    /// of all places inside it.
    fn refine_into(&mut self, cell: CellId, codes: &[u32]) {
        let mut stack = vec![cell];
        while let Some(c) = stack.pop() {
            let range = self.code_range(c);
            let lo = codes.partition_point(|&x| x < range.start);
            let hi = codes.partition_point(|&x| x <= range.end);
            if hi - lo > self.segment_limit && c.level < self.max_level {
                stack.extend(self.children(c).into_iter().rev());
            } else {
                self.leaves.insert(c.code, c.level);
            }
        }
    }

    /// Re-partitions an existing leaf given the base codes of all places now
    /// inside it. Returns the leaves that replace it (the leaf itself when it
    /// stays within the limit).
    pub fn split_leaf(&mut self, leaf: CellId, mut codes: Vec<u32>) -> Vec<CellId> {
        debug_assert_eq!(self.leaves.get(&leaf.code), Some(&leaf.level));
        codes.sort_unstable();
        self.leaves.remove(&leaf.code);
        self.refine_into(leaf, &codes);
        let range = self.code_range(leaf);
        self.leaves
            .range(range.start..=range.end)
            .map(|(&code, &level)| CellId { code, level })
            .collect()
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn max_level(&self) -> u8 {
        self.max_level
    }

    pub fn segment_limit(&self) -> usize {
        self.segment_limit
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaves(&self) -> impl Iterator<Item = CellId> + '_ {
        self.leaves
            .iter()
            .map(|(&code, &level)| CellId { code, level })
    }

    pub(crate) fn from_parts(
        bounds: Bounds,
        max_level: u8,
        segment_limit: usize,
        leaves: BTreeMap<u32, u8>,
    ) -> Grid {
        Grid {
            bounds,
            max_level,
            segment_limit,
            leaves,
        }
    }

    /// Side length of a cell at `level`.
    pub fn cell_side(&self, level: u8) -> f64 {
        self.bounds.side / (1u64 << level) as f64
    }

    /// Side length of the smallest leaf.
    pub fn smallest_leaf_side(&self) -> f64 {
        let deepest = self.leaves.values().copied().max().unwrap_or(0);
        self.cell_side(deepest)
    }

    fn base_cells(&self) -> u64 {
        1u64 << self.max_level
    }

    fn span(&self, level: u8) -> u64 {
        1u64 << (2 * (self.max_level - level) as u32)
    }

    /// Base codes covered by `cell`.
    pub fn code_range(&self, cell: CellId) -> ZInterval {
        let span = self.span(cell.level);
        ZInterval::new(cell.code, (cell.code as u64 + span - 1) as u32)
    }

    pub fn children(&self, cell: CellId) -> [CellId; 4] {
        let quarter = (self.span(cell.level) / 4) as u32;
        let level = cell.level + 1;
        [0, 1, 2, 3].map(|i| CellId {
            code: cell.code + i * quarter,
            level,
        })
    }

    #[inline]
    fn to_base(&self, v: f64, origin: f64) -> i64 {
        ((v - origin) / self.bounds.side * self.base_cells() as f64).floor() as i64
    }

    /// Base-resolution column and row of a point inside the bounds.
    pub fn base_coords(&self, p: Point) -> Result<(u32, u32), GridError> {
        if !self.bounds.contains(p) {
            return Err(GridError::OutOfBounds { x: p.x, y: p.y });
        }
        let max = self.base_cells() as i64 - 1;
        let cx = self.to_base(p.x, self.bounds.min_x).clamp(0, max) as u32;
        let cy = self.to_base(p.y, self.bounds.min_y).clamp(0, max) as u32;
        Ok((cx, cy))
    }

    pub fn base_code(&self, p: Point) -> Result<u32, GridError> {
        let (cx, cy) = self.base_coords(p)?;
        interleave(cx, cy, self.max_level)
    }

    /// Leaf whose code range contains `code`.
    pub fn leaf_of_code(&self, code: u32) -> CellId {
        let (&c, &level) = self
            .leaves
            .range(..=code)
            .next_back()
            .expect("leaves tile the code space");
        CellId { code: c, level }
    }

    pub fn leaf_of(&self, p: Point) -> Result<CellId, GridError> {
        Ok(self.leaf_of_code(self.base_code(p)?))
    }

    pub fn is_leaf(&self, cell: CellId) -> bool {
        self.leaves.get(&cell.code) == Some(&cell.level)
    }

    pub fn cell_rect(&self, cell: CellId) -> Rect {
        let (cx, cy) = deinterleave(cell.code);
        let unit = self.bounds.side / self.base_cells() as f64;
        let size = (1u64 << (self.max_level - cell.level)) as f64;
        let x0 = self.bounds.min_x + cx as f64 * unit;
        let y0 = self.bounds.min_y + cy as f64 * unit;
        Rect::new(x0, y0, x0 + size * unit, y0 + size * unit)
    }

    /// Distance from `p` to the cell rectangle, zero inside.
    pub fn min_dist_to_cell(&self, p: Point, cell: CellId) -> f64 {
        self.cell_rect(cell).min_dist(p)
    }

    /// Maximal runs of consecutive places in the same leaf.
    pub fn fragment(&self, points: &[Point]) -> Result<Vec<Fragment>, GridError> {
        let mut out: Vec<Fragment> = Vec::new();
        for (i, &p) in points.iter().enumerate() {
            let cell = self.leaf_of(p)?;
            match out.last_mut() {
                Some(f) if f.cell == cell => f.last = i + 1,
                _ => {
                    let ordinal = out.len() + 1;
                    out.push(Fragment {
                        cell,
                        first: i + 1,
                        last: i + 1,
                        ordinal,
                    })
                }
            }
        }
        Ok(out)
    }

    fn window_box(&self, window: &Rect) -> Option<BaseBox> {
        let b = self.bounds.rect();
        if window.max_x < b.min_x
            || window.min_x > b.max_x
            || window.max_y < b.min_y
            || window.min_y > b.max_y
        {
            return None;
        }
        let max = self.base_cells() as i64 - 1;
        Some(BaseBox {
            x0: self.to_base(window.min_x, b.min_x).clamp(0, max) as u32,
            y0: self.to_base(window.min_y, b.min_y).clamp(0, max) as u32,
            x1: self.to_base(window.max_x, b.min_x).clamp(0, max) as u32,
            y1: self.to_base(window.max_y, b.min_y).clamp(0, max) as u32,
        })
    }

    /// Walks the quadtree over the window, calling `visit(leaf_or_node, enclosed)`
    /// for every maximal node that is either fully inside the window or a
    /// partially overlapped leaf.
    fn walk_window(&self, window: &Rect, mut visit: impl FnMut(CellId, bool)) {
        let Some(w) = self.window_box(window) else {
            return;
        };
        let mut stack = vec![CellId { code: 0, level: 0 }];
        while let Some(c) = stack.pop() {
            let (bx, by) = deinterleave(c.code);
            let size = 1u32 << (self.max_level - c.level);
            let ex = bx + (size - 1);
            let ey = by + (size - 1);
            if bx > w.x1 || ex < w.x0 || by > w.y1 || ey < w.y0 {
                continue;
            }
            let enclosed = bx >= w.x0 && ex <= w.x1 && by >= w.y0 && ey <= w.y1;
            if enclosed || self.is_leaf(c) {
                visit(c, enclosed);
            } else {
                stack.extend(self.children(c).into_iter().rev());
            }
        }
    }

    /// Sorted, disjoint, maximally merged code intervals such that a leaf
    /// intersects `window` iff its code range meets one of them.
    pub fn window_to_intervals(&self, window: &Rect) -> Vec<ZInterval> {
        let mut out: Vec<ZInterval> = Vec::new();
        self.walk_window(window, |c, _| {
            let r = self.code_range(c);
            match out.last_mut() {
                Some(last) if last.end as u64 + 1 == r.start as u64 => last.end = r.end,
                _ => out.push(r),
            }
        });
        out
    }

    /// True when the window reaches every edge of the bounds.
    pub fn window_covers_bounds(&self, window: &Rect) -> bool {
        window.contains_rect(&self.bounds.rect())
    }

    /// Leaves the window overlaps partially and leaves it encloses.
    pub fn count_quads(&self, window: &Rect) -> QuadCount {
        let mut count = QuadCount::default();
        self.walk_window(window, |c, enclosed| {
            if enclosed {
                let r = self.code_range(c);
                count.enclosed += self.leaves.range(r.start..=r.end).count();
            } else {
                count.overlapping += 1;
            }
        });
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_bounds_contain_their_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100_000 {
            let a = Point::new(rng.random_range(-1e3..1e3), rng.random_range(-1e3..1e3));
            let b = Point::new(rng.random_range(-1e3..1e3), rng.random_range(-1e3..1e3));
            let bounds = Bounds::covering([a, b]);
            assert!(bounds.contains(a) && bounds.contains(b), "{a:?} {b:?} {bounds:?}");
        }
    }

    #[test]
    fn interleave_examples() {
        assert_eq!(interleave(0, 0, 3).unwrap(), 0);
        assert_eq!(interleave(3, 5, 3).unwrap(), 39);
        assert_eq!(deinterleave(39), (3, 5));
        assert!(matches!(
            interleave(8, 0, 3),
            Err(GridError::CoordinateOutOfGrid { .. })
        ));
    }

    #[test]
    fn interleave_bijection() {
        for level in 0..=8u8 {
            let n = 1u32 << level;
            let mut seen = vec![false; (n * n) as usize];
            for cx in 0..n {
                for cy in 0..n {
                    let c = interleave(cx, cy, level).unwrap();
                    assert!(!seen[c as usize]);
                    seen[c as usize] = true;
                    assert_eq!(deinterleave(c), (cx, cy));
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    fn unit_bounds() -> Bounds {
        Bounds::new(0.0, 0.0, 16.0).unwrap()
    }

    #[test]
    fn empty_and_light_data_give_root_leaf() {
        let g = Grid::build(std::iter::empty(), unit_bounds(), 3, 4).unwrap();
        assert_eq!(g.leaves().collect::<Vec<_>>(), vec![CellId { code: 0, level: 0 }]);
        let pts = [Point::new(1.0, 1.0), Point::new(9.0, 9.0)];
        let g = Grid::build(pts, unit_bounds(), 3, 4).unwrap();
        assert_eq!(g.leaf_count(), 1);
    }

    #[test]
    fn clustered_data_splits_where_needed() {
        let pts: Vec<Point> = (0..10).map(|i| Point::new(0.5 + i as f64 * 0.01, 0.5)).collect();
        let g = Grid::build(pts.iter().copied(), unit_bounds(), 3, 4).unwrap();
        assert!(g.leaf_count() > 1);
        // The hot corner reaches max level; the rest stays coarse.
        assert_eq!(g.leaf_of(pts[0]).unwrap().level, 4);
        assert_eq!(g.leaf_of(Point::new(15.0, 15.0)).unwrap().level, 1);
        for leaf in g.leaves() {
            let r = g.code_range(leaf);
            let load = pts
                .iter()
                .filter(|p| r.contains(g.base_code(**p).unwrap()))
                .count();
            assert!(load <= 3 || leaf.level == 4);
        }
    }

    #[test]
    fn out_of_bounds_point() {
        let g = Grid::root(unit_bounds(), 1, 4).unwrap();
        assert!(matches!(
            g.leaf_of(Point::new(-1.0, 0.0)),
            Err(GridError::OutOfBounds { .. })
        ));
        // The max edge is closed.
        assert!(g.leaf_of(Point::new(16.0, 16.0)).is_ok());
    }

    #[test]
    fn fragments_follow_maximal_runs() {
        let pts = [
            Point::new(1.0, 1.0),
            Point::new(2.0, 1.0),
            Point::new(12.0, 1.0),
            Point::new(1.0, 2.0),
        ];
        let g = Grid::build(pts, unit_bounds(), 1, 1).unwrap();
        let f = g.fragment(&pts).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!((f[0].first, f[0].last, f[0].ordinal), (1, 2, 1));
        assert_eq!((f[1].first, f[1].last, f[1].ordinal), (3, 3, 2));
        assert_eq!((f[2].first, f[2].last, f[2].ordinal), (4, 4, 3));
        assert_eq!(f[0].cell, f[2].cell);

        let single = Grid::root(unit_bounds(), 10, 4).unwrap();
        let f = single.fragment(&pts).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!((f[0].first, f[0].last), (1, 4));
    }

    #[test]
    fn window_intervals_basic() {
        let pts: Vec<Point> = (0..40)
            .map(|i| Point::new((i % 7) as f64 * 2.1, (i / 7) as f64 * 2.5))
            .collect();
        let g = Grid::build(pts.iter().copied(), unit_bounds(), 2, 3).unwrap();
        assert_eq!(
            g.window_to_intervals(&g.bounds().rect()),
            vec![ZInterval::new(0, 63)]
        );
        // One finest cell: base cell (0,0) has side 2.
        let g = Grid::build(
            (0..20).map(|_| Point::new(0.1, 0.1)),
            unit_bounds(),
            1,
            3,
        )
        .unwrap();
        let iv = g.window_to_intervals(&Rect::new(0.2, 0.2, 1.0, 1.0));
        assert_eq!(iv, vec![ZInterval::new(0, 0)]);
    }

    #[test]
    fn min_dist_to_cell_examples() {
        let g = Grid::root(unit_bounds(), 1, 2).unwrap();
        let cell = CellId { code: 0, level: 1 }; // [0,8)x[0,8)
        assert_eq!(g.min_dist_to_cell(Point::new(3.0, 3.0), cell), 0.0);
        assert_eq!(g.min_dist_to_cell(Point::new(-1.0, 3.0), cell), 1.0);
        assert_eq!(g.min_dist_to_cell(Point::new(11.0, 12.0), cell), 5.0);
    }

    #[test]
    fn subtract_intervals_cases() {
        let a = [ZInterval::new(0, 10), ZInterval::new(20, 30)];
        let b = [ZInterval::new(2, 3), ZInterval::new(8, 22), ZInterval::new(30, 30)];
        assert_eq!(
            subtract_intervals(&a, &b),
            vec![
                ZInterval::new(0, 1),
                ZInterval::new(4, 7),
                ZInterval::new(23, 29)
            ]
        );
        assert_eq!(subtract_intervals(&a, &[]), a.to_vec());
        assert!(subtract_intervals(&a, &a).is_empty());
    }

    #[test]
    fn split_leaf_matches_fresh_build() {
        let mut pts: Vec<Point> = (0..6).map(|i| Point::new(1.0 + i as f64, 1.0)).collect();
        let mut g = Grid::build(pts.iter().copied(), unit_bounds(), 6, 4).unwrap();
        assert_eq!(g.leaf_count(), 1);
        pts.extend((0..6).map(|i| Point::new(1.0, 1.0 + i as f64 * 0.3)));
        let codes = pts.iter().map(|p| g.base_code(*p).unwrap()).collect();
        g.split_leaf(CellId { code: 0, level: 0 }, codes);
        let fresh = Grid::build(pts.iter().copied(), unit_bounds(), 6, 4).unwrap();
        assert_eq!(g, fresh);
    }

    #[test]
    fn quad_count_whole_space() {
        let pts: Vec<Point> = (0..30).map(|i| Point::new(i as f64 * 0.5, 1.0)).collect();
        let g = Grid::build(pts.iter().copied(), unit_bounds(), 4, 4).unwrap();
        let c = g.count_quads(&g.bounds().rect());
        assert_eq!(c.enclosed, g.leaf_count());
        assert_eq!(c.overlapping, 0);
    }
}
