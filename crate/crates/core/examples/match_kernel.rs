//! The linear-time minimum match versus the exhaustive definition.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trajkw::matching::{enumerate_minimum_matches, match_trajectory, naive_min_match_dist};
use trajkw::validate::{random_query, random_trajectory};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = random_trajectory(&mut rng, 0, 30, 6);
    let q = random_query(&mut rng, 6, 3, 1);
    println!("query words {:?} at ({:.1}, {:.1})", q.keywords(), q.point.x, q.point.y);

    let minimal = enumerate_minimum_matches(&q, &t);
    println!("{} minimum matches: {:?}", minimal.len(), minimal);

    let fast = match_trajectory(&q, &t, f64::INFINITY);
    let slow = naive_min_match_dist(&q, &t);
    println!("sweep   {:?} {:.6}", fast.window, fast.distance);
    println!("naive   {:?} {:.6}", slow.window, slow.distance);

    // A threshold below the answer lets the sweep give up early.
    let pruned = match_trajectory(&q, &t, fast.distance * 0.5);
    println!("with threshold {:.3}: {}", fast.distance * 0.5, pruned.distance);
}
