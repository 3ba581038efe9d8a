//! Corpus and workload files, synthetic corpora and query workloads.
//!
//! Corpus files hold one JSON object per line:
//! `{"id": "t1", "places": [{"x": 1.0, "y": 2.0, "kw": ["cafe", "park"]}]}`.
//! Workload files hold one query per line:
//! `{"x": 1.0, "y": 2.0, "kw": ["cafe"], "k": 10}`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Zipf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Rect;
use crate::model::{ModelError, Place, Point, Query, TrajId, Trajectory};
use crate::vocab::{normalize_keyword, Vocabulary};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate trajectory id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("no trajectory has {0} distinct keywords")]
    NoEligibleTrajectory(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceRecord {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub kw: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub id: String,
    pub places: Vec<PlaceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadRecord {
    pub x: f64,
    pub y: f64,
    pub kw: Vec<String>,
    pub k: usize,
}

/// Trajectories with dense ids (their position), external names and the
/// shared vocabulary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub trajectories: Vec<Trajectory>,
    pub names: Vec<String>,
    pub vocab: Vocabulary,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Interns the record's keywords and appends it. Vocabulary frequency
    /// counts are left untouched; indexes recount them at build time.
    pub fn push_record(&mut self, record: &TrajectoryRecord) -> Result<TrajId, ModelError> {
        let id = self.trajectories.len() as TrajId;
        let traj = record_to_trajectory(record, id, &mut self.vocab)?;
        self.trajectories.push(traj);
        self.names.push(record.id.clone());
        Ok(id)
    }

    pub fn from_records<'a>(
        records: impl IntoIterator<Item = &'a TrajectoryRecord>,
    ) -> Result<Corpus, IngestError> {
        let mut corpus = Corpus::new();
        let mut seen = HashSet::new();
        for (i, r) in records.into_iter().enumerate() {
            if !seen.insert(r.id.clone()) {
                return Err(IngestError::DuplicateId {
                    line: i + 1,
                    id: r.id.clone(),
                });
            }
            corpus.push_record(r).map_err(|e| IngestError::Malformed {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(corpus)
    }

    pub fn to_records(&self) -> Vec<TrajectoryRecord> {
        self.trajectories
            .iter()
            .zip(&self.names)
            .map(|(t, name)| trajectory_to_record(t, name, &self.vocab))
            .collect()
    }

    /// Resolves a workload line against the vocabulary. `Ok(None)` when a
    /// keyword is unknown, so no trajectory can match.
    pub fn resolve_query(&self, record: &WorkloadRecord) -> Result<Option<Query>, ModelError> {
        resolve_query(&self.vocab, record)
    }

    pub fn query_record(&self, q: &Query) -> WorkloadRecord {
        query_to_record(&self.vocab, q)
    }
}

pub fn resolve_query(vocab: &Vocabulary, r: &WorkloadRecord) -> Result<Option<Query>, ModelError> {
    if r.kw.is_empty() {
        return Err(ModelError::EmptyQuery);
    }
    let point = Point::new(r.x, r.y);
    match vocab.resolve(&r.kw) {
        Some(ids) => Query::new(point, ids, r.k).map(Some),
        None => {
            // Still validate the rest of the query.
            Query::new(point, vec![0], r.k)?;
            Ok(None)
        }
    }
}

pub fn query_to_record(vocab: &Vocabulary, q: &Query) -> WorkloadRecord {
    WorkloadRecord {
        x: q.point.x,
        y: q.point.y,
        kw: q
            .keywords()
            .iter()
            .map(|&w| vocab.word(w).unwrap_or_default().to_owned())
            .collect(),
        k: q.k,
    }
}

fn record_to_trajectory(
    record: &TrajectoryRecord,
    id: TrajId,
    vocab: &mut Vocabulary,
) -> Result<Trajectory, ModelError> {
    let places = record
        .places
        .iter()
        .map(|p| {
            let kws = p
                .kw
                .iter()
                .map(|w| normalize_keyword(w))
                .filter(|w| !w.is_empty())
                .map(|w| vocab.intern(&w))
                .collect();
            Place::new(Point::new(p.x, p.y), kws)
        })
        .collect();
    Trajectory::new(id, places)
}

pub fn trajectory_to_record(t: &Trajectory, name: &str, vocab: &Vocabulary) -> TrajectoryRecord {
    TrajectoryRecord {
        id: name.to_owned(),
        places: t
            .places()
            .iter()
            .map(|p| PlaceRecord {
                x: p.point.x,
                y: p.point.y,
                kw: p
                    .keywords()
                    .iter()
                    .map(|&w| vocab.word(w).unwrap_or_default().to_owned())
                    .collect(),
            })
            .collect(),
    }
}

fn parse_lines<T: for<'de> Deserialize<'de>>(reader: impl BufRead) -> Result<Vec<T>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| IngestError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn parse_corpus(reader: impl BufRead) -> Result<Corpus, IngestError> {
    let records: Vec<TrajectoryRecord> = parse_lines(reader)?;
    Corpus::from_records(&records)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, IngestError> {
    parse_corpus(BufReader::new(File::open(path)?))
}

fn write_lines<T: Serialize>(path: &Path, items: &[T]) -> Result<(), IngestError> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_corpus(path: impl AsRef<Path>, corpus: &Corpus) -> Result<(), IngestError> {
    write_lines(path.as_ref(), &corpus.to_records())
}

pub fn load_workload(path: impl AsRef<Path>) -> Result<Vec<WorkloadRecord>, IngestError> {
    parse_lines(BufReader::new(File::open(path)?))
}

pub fn save_workload(path: impl AsRef<Path>, records: &[WorkloadRecord]) -> Result<(), IngestError> {
    write_lines(path.as_ref(), records)
}

/// Parameters of a synthetic corpus: random walks over a square space with
/// Zipf-distributed place keywords.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub trajectories: usize,
    pub places_min: usize,
    pub places_max: usize,
    pub vocab_size: usize,
    pub zipf_exponent: f64,
    pub keywords_min: usize,
    pub keywords_max: usize,
    /// 0 places walk starts uniformly, 1 places all of them at hotspots.
    pub clustering: f64,
    pub hotspots: usize,
    /// Hotspot standard deviation as a fraction of the side.
    pub hotspot_spread: f64,
    pub side: f64,
    pub step_mean: f64,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            trajectories: 1000,
            places_min: 20,
            places_max: 100,
            vocab_size: 1000,
            zipf_exponent: 1.0,
            keywords_min: 1,
            keywords_max: 3,
            clustering: 0.5,
            hotspots: 8,
            hotspot_spread: 0.03,
            side: 10_000.0,
            step_mean: 40.0,
            seed: 1,
        }
    }
}

/// Vocabulary word for a Zipf rank (rank 1 is the most frequent).
pub fn synthetic_word(rank: usize) -> String {
    format!("w{rank}")
}

pub fn generate_records(spec: &CorpusSpec) -> Vec<TrajectoryRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let side = spec.side;
    let hotspots: Vec<Point> = (0..spec.hotspots.max(1))
        .map(|_| {
            Point::new(
                rng.random_range(0.1 * side..0.9 * side),
                rng.random_range(0.1 * side..0.9 * side),
            )
        })
        .collect();
    let spread = Normal::new(0.0, (spec.hotspot_spread * side).max(f64::MIN_POSITIVE))
        .expect("finite spread");
    let zipf = Zipf::new(spec.vocab_size.max(1) as f64, spec.zipf_exponent).expect("valid zipf");
    let clamp = |v: f64| v.clamp(0.0, side);

    (0..spec.trajectories)
        .map(|t| {
            let n = rng.random_range(spec.places_min.max(1)..=spec.places_max.max(spec.places_min.max(1)));
            let start = if rng.random_bool(spec.clustering.clamp(0.0, 1.0)) {
                let h = hotspots[rng.random_range(0..hotspots.len())];
                Point::new(clamp(h.x + spread.sample(&mut rng)), clamp(h.y + spread.sample(&mut rng)))
            } else {
                Point::new(rng.random_range(0.0..=side), rng.random_range(0.0..=side))
            };
            let mut p = start;
            let places = (0..n)
                .map(|i| {
                    if i > 0 {
                        let angle = rng.random_range(0.0..std::f64::consts::TAU);
                        let step = spec.step_mean * rng.random_range(0.5..1.5);
                        p = Point::new(clamp(p.x + step * angle.cos()), clamp(p.y + step * angle.sin()));
                    }
                    let kmax = spec.keywords_max.max(spec.keywords_min);
                    let nk = rng.random_range(spec.keywords_min..=kmax);
                    let kw: Vec<String> = (0..nk)
                        .map(|_| synthetic_word(zipf.sample(&mut rng) as usize))
                        .collect();
                    PlaceRecord { x: p.x, y: p.y, kw }
                })
                .collect();
            TrajectoryRecord {
                id: format!("t{t}"),
                places,
            }
        })
        .collect()
}

/// Deterministic synthetic corpus for a seed.
pub fn generate_corpus(spec: &CorpusSpec) -> Corpus {
    Corpus::from_records(&generate_records(spec)).expect("generated records are valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub queries: usize,
    pub keywords_per_query: usize,
    pub k: usize,
    /// Query locations fall within this distance of the source trajectory's MBR.
    pub location_radius: f64,
    pub seed: u64,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec {
            queries: 50,
            keywords_per_query: 3,
            k: 10,
            location_radius: 200.0,
            seed: 7,
        }
    }
}

/// Samples one query from a random trajectory with at least
/// `keywords_per_query` distinct keywords, so it has at least one match.
pub fn sample_query(
    corpus: &Corpus,
    eligible: &[usize],
    rng: &mut impl Rng,
    keywords_per_query: usize,
    k: usize,
    radius: f64,
) -> Query {
    let t = &corpus.trajectories[eligible[rng.random_range(0..eligible.len())]];
    let union = t.keyword_union();
    let kw: Vec<_> = sample(rng, union.len(), keywords_per_query)
        .into_iter()
        .map(|i| union[i])
        .collect();
    let mbr = Rect::of_points(t.points()).expect("non-empty trajectory");
    let point = Point::new(
        rng.random_range(mbr.min_x - radius..=mbr.max_x + radius),
        rng.random_range(mbr.min_y - radius..=mbr.max_y + radius),
    );
    Query::new(point, kw, k).expect("sampled query is valid")
}

/// Trajectory positions with at least `keywords` distinct keywords.
pub fn eligible_trajectories(corpus: &Corpus, keywords: usize) -> Vec<usize> {
    corpus
        .trajectories
        .iter()
        .enumerate()
        .filter(|(_, t)| t.keyword_union().len() >= keywords)
        .map(|(i, _)| i)
        .collect()
}

pub fn generate_queries(corpus: &Corpus, spec: &WorkloadSpec) -> Result<Vec<Query>, IngestError> {
    if spec.queries == 0 {
        return Ok(Vec::new());
    }
    let eligible = eligible_trajectories(corpus, spec.keywords_per_query.max(1));
    if eligible.is_empty() {
        return Err(IngestError::NoEligibleTrajectory(spec.keywords_per_query));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..spec.queries)
        .map(|_| {
            sample_query(
                corpus,
                &eligible,
                &mut rng,
                spec.keywords_per_query.max(1),
                spec.k.max(1),
                spec.location_radius,
            )
        })
        .collect())
}
