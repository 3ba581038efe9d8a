//! Save an index to disk, load it back and show that damage is detected.

use trajkw::ingest::{generate_corpus, CorpusSpec};
use trajkw::snapshot;
use trajkw::{GridConfig, Index, WordPolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_corpus(&CorpusSpec { trajectories: 500, ..CorpusSpec::default() });
    let index = Index::build(&corpus, &GridConfig::default(), WordPolicy::Prefix)?;

    let path = std::env::temp_dir().join("trajkw-example.idx");
    snapshot::save(&index, &path)?;
    let loaded = snapshot::load(&path)?;
    println!("{} bytes, reloaded equal: {}", std::fs::metadata(&path)?.len(), loaded == index);

    let mut bytes = std::fs::read(&path)?;
    let n = bytes.len();
    bytes[n / 3] ^= 1;
    match snapshot::from_bytes(&bytes) {
        Ok(_) => println!("flipped bit went unnoticed"),
        Err(e) => println!("flipped bit rejected: {e}"),
    }
    std::fs::remove_file(path)?;
    Ok(())
}
