//! Index a handful of trajectories and ask for the two nearest ones that
//! pass a cafe and a museum.

use trajkw::ingest::{Corpus, PlaceRecord, TrajectoryRecord};
use trajkw::{top_k, GridConfig, Index, Point, Query, WordPolicy};

fn place(x: f64, y: f64, kw: &[&str]) -> PlaceRecord {
    PlaceRecord { x, y, kw: kw.iter().map(|s| s.to_string()).collect() }
}

fn main() {
    let records = vec![
        TrajectoryRecord {
            id: "old-town".into(),
            places: vec![place(0.0, 0.0, &["cafe"]), place(1.0, 0.5, &["museum"]), place(2.0, 1.0, &["park"])],
        },
        TrajectoryRecord {
            id: "riverside".into(),
            places: vec![place(5.0, 5.0, &["museum", "cafe"]), place(6.0, 5.0, &["bakery"])],
        },
        TrajectoryRecord {
            id: "uptown".into(),
            places: vec![place(20.0, 3.0, &["cafe"]), place(22.0, 3.0, &[]), place(24.0, 3.0, &["museum"])],
        },
    ];
    let corpus = Corpus::from_records(&records).expect("valid records");
    let index = Index::build(&corpus, &GridConfig::default(), WordPolicy::default()).expect("index builds");

    let words = corpus.vocab.resolve(&["cafe", "museum"]).expect("both words occur");
    let q = Query::new(Point::new(4.0, 4.0), words, 2).unwrap();
    for (rank, r) in top_k(&index, &q).results.iter().enumerate() {
        let w = r.window.unwrap();
        println!("{} {} places {}..={} distance {:.3}", rank + 1, index.name(r.traj).unwrap_or("?"), w.start, w.end, r.distance);
    }
}
