//! Shows each preprocessing stage for a reply.
//!
//!     cargo run --example preprocess_text -- "Some reply text"

use convabuse::preprocess::{stem, Preprocessor};

fn main() {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "@MP_Smith You are CLEARLY lying again!! Resign now... https://t.co/x #liar".into());
    let p = Preprocessor::default().process(&text);
    println!("raw tokens:   {:?}", p.tokens_raw);
    println!("clean tokens: {:?}", p.tokens_clean);
    println!("stems:        {:?}", p.stems);
    println!("sentences:    {:?}", p.sentences);
    println!("counts:       {:#?}", p.counts);
    for w in ["generalization", "hopefully", "relational"] {
        println!("stem({w}) = {}", stem(w));
    }
}
