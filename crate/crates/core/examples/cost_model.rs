//! The analytical cost model next to a simulation of the same keyword
//! assignment, and its estimate for a real query.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trajkw::costmodel::{self, simulate_single_place, CostParams};
use trajkw::ingest::{eligible_trajectories, generate_corpus, sample_query, CorpusSpec};
use trajkw::{top_k, GridConfig, Index, WordPolicy};

fn main() {
    let p = CostParams::uniform(20, 5.0, 2, 10);
    let sim = simulate_single_place(20, 5, 2, 200_000, 1);
    println!("one place covers the query: formula {:.5}, simulated {:.5} +- {:.5}", costmodel::pr_hat1(&p), sim.estimate, sim.std_error);
    for (i, v) in costmodel::pr_hat_table(6, &p).iter().enumerate() {
        println!("  first cover after {} places: {v:.4e}", i + 1);
    }

    let corpus = generate_corpus(&CorpusSpec { trajectories: 2000, seed: 9, ..CorpusSpec::default() });
    let index = Index::build(&corpus, &GridConfig::default(), WordPolicy::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let q = sample_query(&corpus, &eligible_trajectories(&corpus, 2), &mut rng, 2, 1, 200.0);
    let params = CostParams::from_index(&index.stats(), index.vocab(), &q);
    let est = costmodel::expected_estimate(&params);
    let measured = top_k(&index, &q).results.first().map(|r| r.distance);
    println!("estimate {:.4e} (places {:.3e}), measured {:?}", est.distance, est.expected_places, measured);
}
