//! The `trajkw` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::baselines::{brute_force_top_k, BaselineStats, InvertedFile, IrTree, Kernel, RTree, DEFAULT_FANOUT};
use crate::costmodel::{expected_estimate, quad_count_estimate, CostParams};
use crate::engine::{self, SearchOptions};
use crate::grid::DEFAULT_MAX_LEVEL;
use crate::index::{GridConfig, Index, WordPolicy, DEFAULT_SEGMENT_LIMIT};
use crate::ingest::{self, Corpus, CorpusSpec, WorkloadRecord, WorkloadSpec};
use crate::model::{Point, Query, TopKAnswer, TrajId};
use crate::snapshot;
use crate::validate::{run_suite, SuiteOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "trajkw", version, about = "Top-k spatial keyword search over trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic corpus and optionally a query workload.
    Generate(GenerateArgs),
    /// Index a corpus file into a snapshot.
    Build(BuildArgs),
    /// Answer one query.
    Query(QueryArgs),
    /// Time algorithms on a workload, refusing to report if answers differ.
    Bench(BenchArgs),
    /// Run the randomized oracle suite.
    Validate(ValidateArgs),
    /// Compare the cost model's distance estimate with measured answers.
    Estimate(EstimateArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    trajectories: usize,
    #[arg(long, default_value_t = 20)]
    places_min: usize,
    #[arg(long, default_value_t = 100)]
    places_max: usize,
    #[arg(long, default_value_t = 1000)]
    vocab: usize,
    #[arg(long, default_value_t = 1.0)]
    zipf: f64,
    #[arg(long, default_value_t = 0.5)]
    clustering: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write a workload sampled from the corpus.
    #[arg(long)]
    workload: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    queries: usize,
    #[arg(long, default_value_t = 3)]
    query_keywords: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEGMENT_LIMIT)]
    segments_per_cell: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_LEVEL)]
    max_level: u8,
    #[arg(long, default_value_t = WordPolicy::NeighborUnion)]
    word_policy: WordPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Algo {
    Ie,
    If,
    Rt,
    Irt,
    Brute,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Ie => "ie",
            Algo::If => "if",
            Algo::Rt => "rt",
            Algo::Irt => "irt",
            Algo::Brute => "brute",
        }
    }
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    #[arg(long, allow_negative_numbers = true)]
    y: f64,
    /// Query keywords, comma separated or repeated.
    #[arg(long, value_delimiter = ',', required = true)]
    kw: Vec<String>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Algo::Ie)]
    algo: Algo,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    workload: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ie,if,rt,irt")]
    algos: Vec<Algo>,
    #[arg(long, default_value_t = 1)]
    repeat: usize,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    workload: PathBuf,
}

/// A failed command: message and exit code.
struct Fail(i32, String);

fn data<E: std::fmt::Display>(e: E) -> Fail {
    Fail(EXIT_DATA, e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a, out),
        Command::Build(a) => build(a, out),
        Command::Query(a) => query(a, out),
        Command::Bench(a) => bench(a, out),
        Command::Validate(a) => validate(a, out),
        Command::Estimate(a) => estimate(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Fail(code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> Result<(), Fail> {
    if a.places_min == 0 || a.places_min > a.places_max {
        return Err(Fail(EXIT_USAGE, "need 1 <= --places-min <= --places-max".into()));
    }
    let spec = CorpusSpec {
        trajectories: a.trajectories,
        places_min: a.places_min,
        places_max: a.places_max,
        vocab_size: a.vocab.max(1),
        zipf_exponent: a.zipf,
        clustering: a.clustering.clamp(0.0, 1.0),
        seed: a.seed,
        ..CorpusSpec::default()
    };
    let corpus = ingest::generate_corpus(&spec);
    ingest::save_corpus(&a.out, &corpus).map_err(data)?;
    writeln!(out, "wrote {} trajectories to {}", corpus.len(), a.out.display()).map_err(data)?;
    if let Some(path) = a.workload {
        let wspec = WorkloadSpec {
            queries: a.queries,
            keywords_per_query: a.query_keywords,
            k: a.k,
            seed: a.seed.wrapping_add(1),
            ..WorkloadSpec::default()
        };
        let queries = ingest::generate_queries(&corpus, &wspec).map_err(data)?;
        let records: Vec<WorkloadRecord> = queries.iter().map(|q| corpus.query_record(q)).collect();
        ingest::save_workload(&path, &records).map_err(data)?;
        writeln!(out, "wrote {} queries to {}", records.len(), path.display()).map_err(data)?;
    }
    Ok(())
}

fn build(a: BuildArgs, out: &mut dyn Write) -> Result<(), Fail> {
    let corpus = ingest::load_corpus(&a.input).map_err(data)?;
    let config = GridConfig {
        segment_limit: a.segments_per_cell,
        max_level: a.max_level,
        bounds: None,
    };
    let start = Instant::now();
    let index = Index::build(&corpus, &config, a.word_policy).map_err(data)?;
    let elapsed = start.elapsed();
    snapshot::save(&index, &a.out).map_err(data)?;
    let s = index.stats();
    writeln!(
        out,
        "trajectories {}\nplaces {}\nvocabulary {}\nleaves {}\ntau {:.6}\ncomponent1 entries {}\ncomponent2 entries {}\nword policy {}\nbuild seconds {:.3}",
        s.trajectory_count,
        s.total_places,
        s.vocabulary_size,
        s.leaf_count,
        s.tau,
        s.component1_entries,
        s.component2_entries,
        index.policy(),
        elapsed.as_secs_f64()
    )
    .map_err(data)
}

/// Everything the five algorithms need, built once per snapshot.
struct Engines {
    index: Index,
    corpus: Corpus,
    inverted: Option<InvertedFile>,
    rtree: Option<RTree>,
    irtree: Option<IrTree>,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
struct Work {
    candidates: usize,
    postings_scanned: u64,
    nodes_visited: usize,
}

impl From<BaselineStats> for Work {
    fn from(s: BaselineStats) -> Work {
        Work {
            candidates: s.candidates,
            postings_scanned: s.postings_scanned,
            nodes_visited: s.nodes_visited,
        }
    }
}

impl Engines {
    fn load(path: &PathBuf, algos: &[Algo]) -> Result<Engines, Fail> {
        let index = snapshot::load(path).map_err(data)?;
        let corpus = index.to_corpus();
        let ts = &corpus.trajectories;
        Ok(Engines {
            inverted: algos.contains(&Algo::If).then(|| InvertedFile::build(ts)),
            rtree: algos.contains(&Algo::Rt).then(|| RTree::from_trajectories(ts, DEFAULT_FANOUT)),
            irtree: algos.contains(&Algo::Irt).then(|| IrTree::build(ts, DEFAULT_FANOUT)),
            index,
            corpus,
        })
    }

    fn run(&self, algo: Algo, q: &Query) -> (TopKAnswer, Work) {
        let ts = &self.corpus.trajectories;
        match algo {
            Algo::Ie => {
                let (a, s) = engine::top_k_with(&self.index, q, SearchOptions::default());
                let work = Work {
                    candidates: s.candidates,
                    postings_scanned: s.postings_scanned,
                    nodes_visited: s.cells_scanned as usize,
                };
                (a, work)
            }
            Algo::If => {
                let (a, s) = self.inverted.as_ref().expect("built on load").top_k(q, ts);
                (a, s.into())
            }
            Algo::Rt => {
                let (a, s) = self.rtree.as_ref().expect("built on load").top_k(q, ts);
                (a, s.into())
            }
            Algo::Irt => {
                let (a, s) = self.irtree.as_ref().expect("built on load").top_k(q, ts);
                (a, s.into())
            }
            Algo::Brute => {
                let a = brute_force_top_k(q, ts, Kernel::Naive);
                let work = Work {
                    candidates: a.len(),
                    ..Work::default()
                };
                (a, work)
            }
        }
    }

    fn name(&self, t: TrajId) -> &str {
        self.index.name(t).unwrap_or("?")
    }
}

fn query(a: QueryArgs, out: &mut dyn Write) -> Result<(), Fail> {
    if a.k == 0 {
        return Err(Fail(EXIT_USAGE, "--k must be at least 1".into()));
    }
    let engines = Engines::load(&a.index, &[a.algo])?;
    let record = WorkloadRecord {
        x: a.x,
        y: a.y,
        kw: a.kw,
        k: a.k,
    };
    let Some(q) = ingest::resolve_query(engines.index.vocab(), &record).map_err(|e| Fail(EXIT_USAGE, e.to_string()))? else {
        return Ok(());
    };
    let (answer, _) = engines.run(a.algo, &q);
    for (rank, r) in answer.results.iter().enumerate() {
        let w = r.window.expect("answers are matches");
        writeln!(out, "{} {} {} {} {:.6}", rank + 1, engines.name(r.traj), w.start, w.end, r.distance).map_err(data)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchRow<'a> {
    algo: &'a str,
    query: usize,
    seconds: f64,
    results: usize,
    #[serde(flatten)]
    work: Work,
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn load_queries(engines: &Engines, path: &PathBuf) -> Result<Vec<Option<Query>>, Fail> {
    ingest::load_workload(path)
        .map_err(data)?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            ingest::resolve_query(engines.index.vocab(), r)
                .map_err(|e| Fail(EXIT_DATA, format!("workload line {}: {e}", i + 1)))
        })
        .collect()
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> Result<(), Fail> {
    let mut algos = a.algos.clone();
    algos.dedup();
    if algos.is_empty() {
        return Err(Fail(EXIT_USAGE, "no algorithms selected".into()));
    }
    let engines = Engines::load(&a.index, &algos)?;
    let queries = load_queries(&engines, &a.workload)?;
    let repeat = a.repeat.max(1);

    let mut rows: Vec<Vec<(f64, usize, Work)>> = vec![Vec::new(); algos.len()];
    for (qi, q) in queries.iter().enumerate() {
        let mut reference: Option<(Algo, Vec<(TrajId, f64)>)> = None;
        for (ai, &algo) in algos.iter().enumerate() {
            let (answer, work, secs) = match q {
                None => (TopKAnswer::default(), Work::default(), 0.0),
                Some(q) => {
                    let mut total = 0.0;
                    let mut last = None;
                    for _ in 0..repeat {
                        let start = Instant::now();
                        let r = engines.run(algo, q);
                        total += start.elapsed().as_secs_f64();
                        last = Some(r);
                    }
                    let (answer, work) = last.expect("repeat >= 1");
                    (answer, work, total / repeat as f64)
                }
            };
            let digest = answer.digest();
            match &reference {
                None => reference = Some((algo, digest)),
                Some((first, expect)) if *expect != digest => {
                    return Err(Fail(
                        EXIT_VALIDATION,
                        format!(
                            "query {}: {} returned {:?} but {} returned {:?}; no timings reported",
                            qi + 1,
                            algo.name(),
                            digest,
                            first.name(),
                            expect
                        ),
                    ));
                }
                Some(_) => {}
            }
            rows[ai].push((secs, answer.len(), work));
        }
    }

    for (ai, &algo) in algos.iter().enumerate() {
        for (qi, &(seconds, results, work)) in rows[ai].iter().enumerate() {
            let row = BenchRow {
                algo: algo.name(),
                query: qi + 1,
                seconds,
                results,
                work,
            };
            writeln!(out, "{}", serde_json::to_string(&row).expect("serializable")).map_err(data)?;
        }
    }
    writeln!(
        out,
        "{:<6} {:>8} {:>12} {:>12} {:>12} {:>12} {:>14}",
        "algo", "queries", "mean_ms", "median_ms", "p95_ms", "candidates", "postings"
    )
    .map_err(data)?;
    for (ai, &algo) in algos.iter().enumerate() {
        let r = &rows[ai];
        let mut times: Vec<f64> = r.iter().map(|x| x.0 * 1e3).collect();
        times.sort_by(f64::total_cmp);
        let n = r.len().max(1) as f64;
        writeln!(
            out,
            "{:<6} {:>8} {:>12.3} {:>12.3} {:>12.3} {:>12.1} {:>14.1}",
            algo.name(),
            r.len(),
            times.iter().sum::<f64>() / n,
            percentile(&times, 0.5),
            percentile(&times, 0.95),
            r.iter().map(|x| x.2.candidates as f64).sum::<f64>() / n,
            r.iter().map(|x| x.2.postings_scanned as f64).sum::<f64>() / n,
        )
        .map_err(data)?;
    }
    Ok(())
}

fn validate(a: ValidateArgs, out: &mut dyn Write) -> Result<(), Fail> {
    let report = run_suite(SuiteOptions {
        instances: a.n,
        seed: a.seed,
        inject_fault: a.inject_fault,
    })
    .map_err(|f| Fail(EXIT_VALIDATION, f.to_string()))?;
    writeln!(out, "ok: {} instances, {} checks passed", report.instances, report.checks).map_err(data)
}

fn estimate(a: EstimateArgs, out: &mut dyn Write) -> Result<(), Fail> {
    let engines = Engines::load(&a.index, &[])?;
    let records = ingest::load_workload(&a.workload).map_err(data)?;
    let stats = engines.index.stats();
    writeln!(
        out,
        "query expected_places est_distance empirical_top1 ratio quads_overlapping quads_enclosed"
    )
    .map_err(data)?;
    for (i, r) in records.iter().enumerate() {
        let q = ingest::resolve_query(engines.index.vocab(), r)
            .map_err(|e| Fail(EXIT_DATA, format!("workload line {}: {e}", i + 1)))?;
        let q = match q {
            Some(q) if q.keywords().iter().all(|&w| engines.index.vocab().df(w) > 0) => q,
            _ => {
                writeln!(out, "{} no-match", i + 1).map_err(data)?;
                continue;
            }
        };
        let params = CostParams::from_index(&stats, engines.index.vocab(), &q);
        let est = expected_estimate(&params);
        let top1 = Query::new(q.point, q.keywords().to_vec(), 1).expect("valid query");
        let answer = engine::top_k(&engines.index, &top1);
        let quads = quad_count_estimate(engines.index.grid(), Point::new(r.x, r.y), est.distance);
        match answer.results.first() {
            Some(best) => writeln!(
                out,
                "{} {:.6e} {:.6e} {:.4} {:.6e} {} {}",
                i + 1,
                est.expected_places,
                est.distance,
                best.distance,
                est.distance / best.distance,
                quads.overlapping,
                quads.enclosed
            ),
            None => writeln!(
                out,
                "{} {:.6e} {:.6e} no-match - {} {}",
                i + 1,
                est.expected_places,
                est.distance,
                quads.overlapping,
                quads.enclosed
            ),
        }
        .map_err(data)?;
    }
    Ok(())
}
