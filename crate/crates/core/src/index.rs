//! The cell-keyword conscious index.
//!
//! Component 1 maps `(word, cell)` to the sorted ids of trajectories that have
//! a fragment in the cell whose *associated* word set contains the word.
//! Component 2 maps `(trajectory, word)` to the sorted 1-based places of the
//! trajectory carrying the word. Both live in an [`OrderedKv`] whose keys sort
//! by `(first, second)`, so all cells of one word are adjacent and ordered by
//! Z-order code.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::grid::{Bounds, CellId, Fragment, Grid, GridError, ZInterval, DEFAULT_MAX_LEVEL};
use crate::ingest::{Corpus, IngestError, TrajectoryRecord};
use crate::model::{cumulative_lengths, ModelError, Place, Point, TrajId, Trajectory, WordId};
use crate::snapshot::SnapshotError;
use crate::store::{Key, OrderedKv};
use crate::vocab::{normalize_keyword, Vocabulary};

pub const DEFAULT_SEGMENT_LIMIT: usize = 800;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown trajectory {0}")]
    UnknownTrajectory(TrajId),
    #[error("trajectory id {0:?} already indexed")]
    DuplicateName(String),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// How words are attached to the fragments of a trajectory in Component 1.
/// Odd fragments always carry their own words; the policies differ on even
/// fragments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum WordPolicy {
    /// Every fragment carries only its own words.
    Plain,
    /// Even fragment `i` carries the words of fragments `i-1..=i+1`.
    #[default]
    NeighborUnion,
    /// Even fragment `i` carries the words of fragments `1..=i+1`.
    Prefix,
}

impl WordPolicy {
    pub const ALL: [WordPolicy; 3] = [WordPolicy::Plain, WordPolicy::NeighborUnion, WordPolicy::Prefix];

    pub(crate) fn code(self) -> u8 {
        match self {
            WordPolicy::Plain => 0,
            WordPolicy::NeighborUnion => 1,
            WordPolicy::Prefix => 2,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.code() == code)
    }
}

impl fmt::Display for WordPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WordPolicy::Plain => "plain",
            WordPolicy::NeighborUnion => "neighbor-union",
            WordPolicy::Prefix => "prefix",
        })
    }
}

impl FromStr for WordPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(WordPolicy::Plain),
            "neighbor-union" | "neighbor" => Ok(WordPolicy::NeighborUnion),
            "prefix" => Ok(WordPolicy::Prefix),
            other => Err(format!(
                "unknown word policy {other:?} (expected plain, neighbor-union or prefix)"
            )),
        }
    }
}

/// Associated word set of every fragment, given each fragment's own words
/// in fragment order.
pub fn associate_fragment_words(raw: &[Vec<WordId>], policy: WordPolicy) -> Vec<Vec<WordId>> {
    let m = raw.len();
    (1..=m)
        .map(|i| {
            if i % 2 == 1 || policy == WordPolicy::Plain {
                return raw[i - 1].clone();
            }
            let lo = match policy {
                WordPolicy::Prefix => 1,
                _ => i - 1,
            };
            let hi = (i + 1).min(m);
            let mut words: Vec<WordId> = raw[lo - 1..hi].iter().flatten().copied().collect();
            words.sort_unstable();
            words.dedup();
            words
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub segment_limit: usize,
    pub max_level: u8,
    /// Defaults to the square covering the data.
    pub bounds: Option<Bounds>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            segment_limit: DEFAULT_SEGMENT_LIMIT,
            max_level: DEFAULT_MAX_LEVEL,
            bounds: None,
        }
    }
}

impl GridConfig {
    pub fn build_grid(&self, corpus: &Corpus) -> Result<Grid, GridError> {
        let points = || corpus.trajectories.iter().flat_map(|t| t.points());
        let bounds = match self.bounds {
            Some(b) => b,
            None => Bounds::covering(points()),
        };
        let points = points();
        Grid::build(points, bounds, self.segment_limit, self.max_level)
    }
}

/// Geometry of an indexed trajectory. Keywords live in Component 2.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajRecord {
    pub name: String,
    pub points: Vec<Point>,
    pub cum: Vec<f64>,
}

impl TrajRecord {
    pub(crate) fn new(name: String, points: Vec<Point>) -> Self {
        let cum = cumulative_lengths(points.iter().copied());
        TrajRecord { name, points, cum }
    }
}

/// Corpus-level figures used by radius estimation and the cost model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexStats {
    pub trajectory_count: usize,
    /// Area of the data space.
    pub area: f64,
    pub side: f64,
    /// Side of the smallest leaf; the radius expansion step.
    pub tau: f64,
    pub leaf_count: usize,
    pub vocabulary_size: usize,
    pub total_places: usize,
    pub max_places: usize,
    pub keyword_slots: u64,
    pub total_path_length: f64,
    pub component1_entries: usize,
    pub component2_entries: usize,
}

impl IndexStats {
    pub fn diagonal(&self) -> f64 {
        self.side * std::f64::consts::SQRT_2
    }

    pub fn mean_keywords_per_place(&self) -> f64 {
        if self.total_places == 0 {
            0.0
        } else {
            self.keyword_slots as f64 / self.total_places as f64
        }
    }

    pub fn mean_segment_length(&self) -> f64 {
        let segments = self.total_places.saturating_sub(self.trajectory_count);
        if segments == 0 {
            0.0
        } else {
            self.total_path_length / segments as f64
        }
    }
}

/// Per-leaf bookkeeping for insertions: member trajectories and place load.
#[derive(Debug, Clone, Default, PartialEq)]
struct Occupancy {
    members: HashMap<u32, Vec<TrajId>>,
    loads: HashMap<u32, usize>,
}

impl Occupancy {
    fn add(&mut self, traj: TrajId, fragments: &[Fragment]) {
        for f in fragments {
            *self.loads.entry(f.cell.code).or_default() += f.last - f.first + 1;
            let m = self.members.entry(f.cell.code).or_default();
            if let Err(pos) = m.binary_search(&traj) {
                m.insert(pos, traj);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    pub(crate) grid: Grid,
    pub(crate) policy: WordPolicy,
    pub(crate) vocab: Vocabulary,
    pub(crate) trajs: Vec<TrajRecord>,
    pub(crate) comp1: OrderedKv,
    pub(crate) comp2: OrderedKv,
    occupancy: Occupancy,
    names: HashMap<String, TrajId>,
}

impl Index {
    /// Builds the grid from `config` and indexes the corpus.
    pub fn build(corpus: &Corpus, config: &GridConfig, policy: WordPolicy) -> Result<Index, IndexError> {
        let grid = config.build_grid(corpus)?;
        Index::build_with_grid(corpus, grid, policy)
    }

    /// Indexes the corpus over an existing grid.
    pub fn build_with_grid(corpus: &Corpus, grid: Grid, policy: WordPolicy) -> Result<Index, IndexError> {
        let mut vocab = corpus.vocab.clone();
        vocab.reset_counts();
        let mut index = Index {
            grid,
            policy,
            vocab,
            trajs: Vec::with_capacity(corpus.len()),
            comp1: OrderedKv::new(),
            comp2: OrderedKv::new(),
            occupancy: Occupancy::default(),
            names: HashMap::with_capacity(corpus.len()),
        };
        for (t, name) in corpus.trajectories.iter().zip(&corpus.names) {
            if index.names.insert(name.clone(), t.id()).is_some() {
                return Err(IndexError::DuplicateName(name.clone()));
            }
            debug_assert_eq!(t.id() as usize, index.trajs.len());
            index.vocab.count(t);
            let points: Vec<Point> = t.points().collect();
            let fragments = index.grid.fragment(&points)?;
            let keywords: Vec<Vec<WordId>> =
                t.places().iter().map(|p| p.keywords().to_vec()).collect();
            index.post_fragments(t.id(), &fragments, &keywords);
            index.occupancy.add(t.id(), &fragments);
            for (i, kws) in keywords.iter().enumerate() {
                for &w in kws {
                    index.comp2.insert_value(Key::new(t.id(), w), (i + 1) as u32);
                }
            }
            index.trajs.push(TrajRecord::new(name.clone(), points));
        }
        Ok(index)
    }

    /// Component 1 postings of one trajectory: `(word, cell code)` pairs.
    fn fragment_postings(
        &self,
        fragments: &[Fragment],
        keywords: &[Vec<WordId>],
    ) -> Vec<(WordId, u32)> {
        let raw: Vec<Vec<WordId>> = fragments
            .iter()
            .map(|f| {
                let mut w: Vec<WordId> = keywords[f.first - 1..f.last].iter().flatten().copied().collect();
                w.sort_unstable();
                w.dedup();
                w
            })
            .collect();
        let assoc = associate_fragment_words(&raw, self.policy);
        let mut pairs: Vec<(WordId, u32)> = fragments
            .iter()
            .zip(&assoc)
            .flat_map(|(f, words)| words.iter().map(move |&w| (w, f.cell.code)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    fn post_fragments(&mut self, traj: TrajId, fragments: &[Fragment], keywords: &[Vec<WordId>]) {
        for (w, cell) in self.fragment_postings(fragments, keywords) {
            self.comp1.insert_value(Key::new(w, cell), traj);
        }
    }

    fn unpost_fragments(&mut self, traj: TrajId, fragments: &[Fragment], keywords: &[Vec<WordId>]) {
        for (w, cell) in self.fragment_postings(fragments, keywords) {
            let removed = self.comp1.remove_value(Key::new(w, cell), traj);
            debug_assert!(removed);
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn policy(&self) -> WordPolicy {
        self.policy
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.trajs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajs.is_empty()
    }

    pub fn component1(&self) -> &OrderedKv {
        &self.comp1
    }

    pub fn component2(&self) -> &OrderedKv {
        &self.comp2
    }

    pub fn record(&self, traj: TrajId) -> Result<&TrajRecord, IndexError> {
        self.trajs
            .get(traj as usize)
            .ok_or(IndexError::UnknownTrajectory(traj))
    }

    pub fn name(&self, traj: TrajId) -> Option<&str> {
        self.trajs.get(traj as usize).map(|r| r.name.as_str())
    }

    pub fn id_of(&self, name: &str) -> Option<TrajId> {
        self.names.get(name).copied()
    }

    pub fn stats(&self) -> IndexStats {
        let bounds = self.grid.bounds();
        let total_places = self.trajs.iter().map(|r| r.points.len()).sum();
        IndexStats {
            trajectory_count: self.trajs.len(),
            area: bounds.area(),
            side: bounds.side,
            tau: self.grid.smallest_leaf_side(),
            leaf_count: self.grid.leaf_count(),
            vocabulary_size: self.vocab.len(),
            total_places,
            max_places: self.trajs.iter().map(|r| r.points.len()).max().unwrap_or(0),
            keyword_slots: (0..self.vocab.len() as WordId).map(|w| self.vocab.place_freq(w)).sum(),
            total_path_length: self
                .trajs
                .iter()
                .map(|r| r.cum.last().copied().unwrap_or(0.0))
                .sum(),
            component1_entries: self.comp1.len(),
            component2_entries: self.comp2.len(),
        }
    }

    /// Cells in `interval` with a posting for `word`, and the tightest
    /// interval around them (`None` when there are none).
    pub fn cells_in_interval(&self, word: WordId, interval: ZInterval) -> (Vec<u32>, Option<ZInterval>) {
        let cells: Vec<u32> = self
            .comp1
            .scan(word, interval.start..=interval.end)
            .map(|(k, _)| k.second())
            .collect();
        let shrunk = match (cells.first(), cells.last()) {
            (Some(&a), Some(&b)) => Some(ZInterval::new(a, b)),
            _ => None,
        };
        (cells, shrunk)
    }

    /// `(cell code, trajectory ids)` postings of `word` with cell in `interval`.
    pub fn postings_in_interval(
        &self,
        word: WordId,
        interval: ZInterval,
    ) -> impl Iterator<Item = (u32, &[TrajId])> + '_ {
        self.comp1
            .scan(word, interval.start..=interval.end)
            .map(|(k, v)| (k.second(), v))
    }

    /// Place lists of `traj` for each requested word; empty for absent words.
    pub fn place_postings(&self, traj: TrajId, words: &[WordId]) -> Result<Vec<&[u32]>, IndexError> {
        self.record(traj)?;
        Ok(words
            .iter()
            .map(|&w| self.comp2.get(Key::new(traj, w)).unwrap_or(&[]))
            .collect())
    }

    /// Keyword set of every place of `traj`, rebuilt from Component 2.
    pub fn place_keywords(&self, traj: TrajId) -> Result<Vec<Vec<WordId>>, IndexError> {
        let rec = self.record(traj)?;
        let mut out = vec![Vec::new(); rec.points.len()];
        for (k, places) in self.comp2.scan(traj, 0..=u32::MAX) {
            for &p in places {
                out[p as usize - 1].push(k.second());
            }
        }
        Ok(out)
    }

    pub fn trajectory(&self, traj: TrajId) -> Result<Trajectory, IndexError> {
        let rec = self.record(traj)?;
        let kws = self.place_keywords(traj)?;
        let places = rec
            .points
            .iter()
            .zip(kws)
            .map(|(&p, k)| Place::new(p, k))
            .collect();
        Ok(Trajectory::new(traj, places)?)
    }

    /// The indexed data as a corpus sharing this index's vocabulary.
    pub fn to_corpus(&self) -> Corpus {
        let mut kws: Vec<Vec<Vec<WordId>>> = self
            .trajs
            .iter()
            .map(|r| vec![Vec::new(); r.points.len()])
            .collect();
        for (k, places) in self.comp2.iter() {
            for &p in places {
                kws[k.first() as usize][p as usize - 1].push(k.second());
            }
        }
        let trajectories = self
            .trajs
            .iter()
            .zip(kws)
            .enumerate()
            .map(|(i, (r, k))| {
                let places = r.points.iter().zip(k).map(|(&p, k)| Place::new(p, k)).collect();
                Trajectory::new(i as TrajId, places).expect("indexed trajectories are valid")
            })
            .collect();
        Corpus {
            trajectories,
            names: self.trajs.iter().map(|r| r.name.clone()).collect(),
            vocab: self.vocab.clone(),
        }
    }

    /// Appends a trajectory. Leaves pushed over the segment limit split into
    /// quadrants; every trajectory through a split leaf is re-fragmented and
    /// its Component 1 postings recomputed.
    pub fn insert(&mut self, record: &TrajectoryRecord) -> Result<TrajId, IndexError> {
        if self.names.contains_key(&record.id) {
            return Err(IndexError::DuplicateName(record.id.clone()));
        }
        let traj = self.trajs.len() as TrajId;
        if record.places.is_empty() {
            return Err(ModelError::EmptyTrajectory(traj).into());
        }
        let points: Vec<Point> = record.places.iter().map(|p| Point::new(p.x, p.y)).collect();
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(ModelError::NonFiniteCoordinate { x: p.x, y: p.y }.into());
        }
        let fragments = self.grid.fragment(&points)?;

        let keywords: Vec<Vec<WordId>> = record
            .places
            .iter()
            .map(|p| {
                let mut k: Vec<WordId> = p
                    .kw
                    .iter()
                    .map(|w| normalize_keyword(w))
                    .filter(|w| !w.is_empty())
                    .map(|w| self.vocab.intern(&w))
                    .collect();
                k.sort_unstable();
                k.dedup();
                k
            })
            .collect();
        let places = points
            .iter()
            .zip(&keywords)
            .map(|(&p, k)| Place::new(p, k.clone()))
            .collect();
        self.vocab.count(&Trajectory::new(traj, places)?);
        for (i, kws) in keywords.iter().enumerate() {
            for &w in kws {
                self.comp2.insert_value(Key::new(traj, w), (i + 1) as u32);
            }
        }
        self.trajs.push(TrajRecord::new(record.id.clone(), points));
        self.names.insert(record.id.clone(), traj);
        self.occupancy.add(traj, &fragments);

        let limit = self.grid.segment_limit();
        let max_level = self.grid.max_level();
        let mut overflowing: Vec<CellId> = fragments
            .iter()
            .map(|f| f.cell)
            .filter(|c| c.level < max_level && self.occupancy.loads[&c.code] > limit)
            .collect();
        overflowing.sort_unstable();
        overflowing.dedup();

        if overflowing.is_empty() {
            self.post_fragments(traj, &fragments, &keywords);
            return Ok(traj);
        }

        let mut affected: HashSet<TrajId> = HashSet::new();
        for c in &overflowing {
            affected.extend(self.occupancy.members[&c.code].iter().copied());
        }
        let mut affected: Vec<TrajId> = affected.into_iter().collect();
        affected.sort_unstable();

        // Retract postings computed under the old partition.
        let mut affected_keywords = HashMap::with_capacity(affected.len());
        for &t in &affected {
            let kws = if t == traj { keywords.clone() } else { self.place_keywords(t)? };
            if t != traj {
                let old = self.grid.fragment(&self.trajs[t as usize].points)?;
                self.unpost_fragments(t, &old, &kws);
            }
            affected_keywords.insert(t, kws);
        }

        for leaf in overflowing {
            let range = self.grid.code_range(leaf);
            let members = self.occupancy.members.remove(&leaf.code).unwrap_or_default();
            self.occupancy.loads.remove(&leaf.code);
            let mut codes = Vec::new();
            for &t in &members {
                for &p in &self.trajs[t as usize].points {
                    let code = self.grid.base_code(p)?;
                    if range.contains(code) {
                        codes.push(code);
                    }
                }
            }
            self.grid.split_leaf(leaf, codes);
            for &t in &members {
                let points = &self.trajs[t as usize].points;
                for (i, &p) in points.iter().enumerate() {
                    let code = self.grid.base_code(p)?;
                    if range.contains(code) {
                        let cell = self.grid.leaf_of_code(code);
                        let frag = Fragment {
                            cell,
                            first: i + 1,
                            last: i + 1,
                            ordinal: 0,
                        };
                        self.occupancy.add(t, &[frag]);
                    }
                }
            }
        }

        for &t in &affected {
            let fragments = self.grid.fragment(&self.trajs[t as usize].points)?;
            let kws = &affected_keywords[&t];
            self.post_fragments(t, &fragments, kws);
        }
        Ok(traj)
    }

    pub(crate) fn from_parts(
        grid: Grid,
        policy: WordPolicy,
        vocab: Vocabulary,
        trajs: Vec<TrajRecord>,
        comp1: OrderedKv,
        comp2: OrderedKv,
    ) -> Result<Index, IndexError> {
        let mut occupancy = Occupancy::default();
        let mut names = HashMap::with_capacity(trajs.len());
        for (i, r) in trajs.iter().enumerate() {
            let fragments = grid.fragment(&r.points)?;
            occupancy.add(i as TrajId, &fragments);
            if names.insert(r.name.clone(), i as TrajId).is_some() {
                return Err(IndexError::DuplicateName(r.name.clone()));
            }
        }
        Ok(Index {
            grid,
            policy,
            vocab,
            trajs,
            comp1,
            comp2,
            occupancy,
            names,
        })
    }

    /// Rebuilds both components from the stored data over the same grid and
    /// reports the first disagreement.
    pub fn check_consistency(&self) -> Result<(), String> {
        let mut next = 0u64;
        let max = self.grid.max_level();
        for leaf in self.grid.leaves() {
            let r = self.grid.code_range(leaf);
            if r.start as u64 != next || !(leaf.code as u64).is_multiple_of(r.end as u64 - r.start as u64 + 1) {
                return Err(format!("leaf {leaf:?} breaks the tiling"));
            }
            next = r.end as u64 + 1;
        }
        if next != 1u64 << (2 * max as u32) {
            return Err("leaves do not cover the code space".into());
        }
        for (k, places) in self.comp2.iter() {
            let n = self
                .trajs
                .get(k.first() as usize)
                .map(|r| r.points.len())
                .ok_or_else(|| format!("place posting for unknown trajectory {}", k.first()))?;
            if places.iter().any(|&p| p == 0 || p as usize > n) {
                return Err(format!("place posting out of range for trajectory {}", k.first()));
            }
        }
        let fresh = Index::build_with_grid(&self.to_corpus(), self.grid.clone(), self.policy)
            .map_err(|e| e.to_string())?;
        let mut a = self.comp1.iter();
        let mut b = fresh.comp1.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => break,
                (x, y) if x == y => continue,
                (x, y) => {
                    return Err(format!(
                        "component 1 differs from a rebuild: stored {:?}, expected {:?}",
                        x.map(|(k, v)| (k.first(), k.second(), v.to_vec())),
                        y.map(|(k, v)| (k.first(), k.second(), v.to_vec()))
                    ))
                }
            }
        }
        if self.vocab != fresh.vocab {
            return Err("vocabulary counts differ from a recount".into());
        }
        Ok(())
    }

    /// Drops one trajectory from one Component 1 posting list. Only for
    /// exercising the validators; returns the affected `(word, cell, traj)`.
    #[doc(hidden)]
    pub fn inject_posting_fault(&mut self, traj: TrajId) -> Option<(WordId, u32, TrajId)> {
        let key = self
            .comp1
            .iter()
            .find(|(_, v)| v.contains(&traj))
            .map(|(k, _)| k)?;
        self.comp1.remove_value(key, traj);
        Some((key.first(), key.second(), traj))
    }
}
