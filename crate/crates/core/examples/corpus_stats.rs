//! Parses a corpus, reports bad records and invariant violations, and
//! prints the summary counts.
//!
//!     cargo run --example corpus_stats -- path/to/corpus.jsonl

use convabuse::corpus::{corpus_stats, parse_str, read_corpus_file, validate_corpus};

const SAMPLE: &str = r#"{"conversation_id":"c1","parent_text":"Proud of the new bill.","reply_text":"you are a disgrace","label":"abusive","parent_retweet_count":4,"parent_favourite_count":20,"account_id":"mp_1","followers_count":5000,"friends_count":300,"favourites_count":120,"listed_count":40,"statuses_count":9000,"geo_enabled":false,"verified":true,"contributors_enabled":false,"is_translator":false,"is_translation_enabled":false,"default_profile":true,"default_profile_image":false,"has_extended_profile":true}
{"conversation_id":"c1","parent_text":"Proud of the new bill.","reply_text":"congrats, well done","label":"non_abusive","parent_retweet_count":4,"parent_favourite_count":20,"account_id":"mp_1","followers_count":5000,"friends_count":300,"favourites_count":120,"listed_count":40,"statuses_count":9000,"geo_enabled":false,"verified":true,"contributors_enabled":false,"is_translator":false,"is_translation_enabled":false,"default_profile":true,"default_profile_image":false,"has_extended_profile":true}
{"conversation_id":"c2","reply_text":"missing parent","label":"abusive"}
"#;

fn main() -> convabuse::Result<()> {
    let ingested = match std::env::args().nth(1) {
        Some(p) => read_corpus_file(p.as_ref())?,
        None => parse_str(SAMPLE)?,
    };
    for e in &ingested.errors {
        println!("skipped {e}");
    }
    for v in validate_corpus(&ingested.corpus) {
        println!("violation: {v}");
    }
    print!("{}", corpus_stats(&ingested.corpus).to_aligned_text());
    Ok(())
}
