//! Writes a planted-signal corpus as JSON lines, ready for the CLI.
//!
//!     cargo run --example synthetic_corpus -- corpus.jsonl [n_instances] [seed]

use std::fs::File;
use std::io::BufWriter;

use convabuse::synthetic::{planted_signal_corpus, SyntheticConfig};

fn main() -> convabuse::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "synthetic.jsonl".to_string());
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(2_000);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let corpus = planted_signal_corpus(&SyntheticConfig {
        n_instances: n,
        seed,
        ..SyntheticConfig::default()
    });
    let file = File::create(&path).map_err(|e| convabuse::Error::io(&path, e))?;
    corpus.write_jsonl(BufWriter::new(file))?;
    eprintln!("wrote {} instances to {path}", corpus.len());
    Ok(())
}
