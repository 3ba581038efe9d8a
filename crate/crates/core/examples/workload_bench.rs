//! Generate a corpus and workload on disk, then time IE against the inverted
//! file over the whole workload.

use std::time::{Duration, Instant};

use trajkw::baselines::InvertedFile;
use trajkw::ingest::{generate_corpus, generate_queries, load_corpus, query_to_record, save_corpus, save_workload, CorpusSpec, WorkloadSpec};
use trajkw::{top_k, GridConfig, Index, WordPolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir();
    let corpus_path = dir.join("trajkw-bench-corpus.jsonl");
    let workload_path = dir.join("trajkw-bench-workload.jsonl");

    let corpus = generate_corpus(&CorpusSpec { trajectories: 3000, clustering: 0.8, seed: 21, ..CorpusSpec::default() });
    save_corpus(&corpus_path, &corpus)?;
    let queries = generate_queries(&corpus, &WorkloadSpec { queries: 40, keywords_per_query: 3, k: 10, ..WorkloadSpec::default() })?;
    let records: Vec<_> = queries.iter().map(|q| query_to_record(&corpus.vocab, q)).collect();
    save_workload(&workload_path, &records)?;

    let corpus = load_corpus(&corpus_path)?;
    let index = Index::build(&corpus, &GridConfig::default(), WordPolicy::default())?;
    let inverted = InvertedFile::build(&corpus.trajectories);
    let (mut ie, mut inv) = (Duration::ZERO, Duration::ZERO);
    let mut mismatches = 0;
    for q in &queries {
        let t = Instant::now();
        let a = top_k(&index, q);
        ie += t.elapsed();
        let t = Instant::now();
        let b = inverted.top_k(q, &corpus.trajectories).0;
        inv += t.elapsed();
        mismatches += usize::from(a.digest() != b.digest());
    }
    println!("{} queries: ie {:?}, inverted file {:?}, mismatches {mismatches}", queries.len(), ie, inv);
    std::fs::remove_file(corpus_path)?;
    std::fs::remove_file(workload_path)?;
    Ok(())
}
