//! Growing an index one trajectory at a time gives the same index as a bulk
//! build over the same bounds.

use trajkw::grid::Bounds;
use trajkw::ingest::{generate_records, Corpus, CorpusSpec};
use trajkw::{GridConfig, Index, WordPolicy};

fn main() {
    let records = generate_records(&CorpusSpec { trajectories: 600, places_min: 10, places_max: 30, seed: 5, ..CorpusSpec::default() });
    let all = Corpus::from_records(&records).unwrap();
    // Insertion cannot grow the root cell, so fix bounds that cover everything.
    let bounds = Bounds::covering(all.trajectories.iter().flat_map(|t| t.points()));
    let config = GridConfig { segment_limit: 100, bounds: Some(bounds), ..GridConfig::default() };

    let mut index = Index::build(&Corpus::from_records(&records[..200]).unwrap(), &config, WordPolicy::default()).unwrap();
    println!("after 200: {} leaves", index.grid().leaf_count());
    for r in &records[200..] {
        index.insert(r).unwrap();
    }
    println!("after 600: {} leaves", index.grid().leaf_count());

    let bulk = Index::build(&all, &config, WordPolicy::default()).unwrap();
    println!("identical to a bulk build: {}", index == bulk);
    println!("consistency check: {:?}", index.check_consistency());
}
