//! All five algorithms on one synthetic corpus, with their work counters.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trajkw::baselines::{brute_force_top_k, InvertedFile, IrTree, Kernel, RTree, DEFAULT_FANOUT};
use trajkw::engine;
use trajkw::ingest::{eligible_trajectories, generate_corpus, sample_query, CorpusSpec};
use trajkw::{GridConfig, Index, WordPolicy};

fn main() {
    let spec = CorpusSpec { trajectories: 5000, clustering: 0.9, seed: 11, ..CorpusSpec::default() };
    let corpus = generate_corpus(&spec);
    let ts = &corpus.trajectories;
    let index = Index::build(&corpus, &GridConfig::default(), WordPolicy::default()).unwrap();
    let inverted = InvertedFile::build(ts);
    let rtree = RTree::from_trajectories(ts, DEFAULT_FANOUT);
    let irtree = IrTree::build(ts, DEFAULT_FANOUT);

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let eligible = eligible_trajectories(&corpus, 3);
    for _ in 0..5 {
        let q = sample_query(&corpus, &eligible, &mut rng, 3, 10, 300.0);
        let t = Instant::now();
        let (ie, stats) = engine::top_k_with(&index, &q, Default::default());
        let ie_time = t.elapsed();
        let (a_if, s_if) = inverted.top_k(&q, ts);
        let (a_rt, s_rt) = rtree.top_k(&q, ts);
        let (a_irt, s_irt) = irtree.top_k(&q, ts);
        let brute = brute_force_top_k(&q, ts, Kernel::Linear);
        let agree = [&a_if, &a_rt, &a_irt, &brute].iter().all(|a| a.digest() == ie.digest());
        println!(
            "words {:?}: candidates ie {} ({} rounds, {:?}) if {} rt {} irt {}; all agree: {agree}",
            q.keywords(), stats.candidates, stats.rounds, ie_time, s_if.candidates, s_rt.candidates, s_irt.candidates
        );
    }
}
