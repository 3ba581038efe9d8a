//! Top-k spatial keyword search over trajectories.
//!
//! A query is a location, a keyword set and `k`; the answer is the `k`
//! trajectories with the smallest minimum match distance, where a match is a
//! run of consecutive places covering every keyword and its distance is the
//! distance from the query to the nearer end of the run plus the run's path
//! length.
//!
//! [`index::Index`] partitions space with an adaptive quadtree addressed by
//! Z-order codes and stores `(word, cell) -> trajectories` and
//! `(trajectory, word) -> places` in one ordered key space.
//! [`engine::top_k`] answers queries over it by growing a search window until
//! the k-th best distance falls inside. [`baselines`] holds the inverted-file,
//! R-tree and IR-tree competitors plus a brute-force oracle.

pub mod baselines;
pub mod cli;
pub mod costmodel;
pub mod engine;
pub mod grid;
pub mod index;
pub mod ingest;
pub mod matching;
pub mod model;
pub mod snapshot;
pub mod store;
pub mod validate;
pub mod vocab;

pub use engine::top_k;
pub use index::{GridConfig, Index, WordPolicy};
pub use ingest::Corpus;
pub use model::{MatchResult, Place, Point, Query, TopKAnswer, Trajectory, Window};
