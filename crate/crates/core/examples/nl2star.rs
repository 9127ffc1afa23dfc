//! Converts the stored annotations of the phone story to STAR and prints
//! the per-sentence trace, without needing a CoreNLP server.
//!
//! With a server running, pass its URL and some text instead:
//!
//!     cargo run -p star-core --example nl2star http://localhost:9000 "Bob called Mary."

use star_core::nl2star::corenlp::fetch_annotations;
use star_core::nl2star::{convert, AnnotatedStory};
use star_core::parser::format_domain;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let story: AnnotatedStory = match args.as_slice() {
        [url, text] => fetch_annotations(text, url).unwrap_or_else(|e| {
            eprintln!("{e}");
            std::process::exit(5);
        }),
        _ => serde_json::from_str(include_str!("../fixtures/phone_annotations.json")).expect("fixture is valid"),
    };
    let (domain, trace) = convert(&story).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(3);
    });
    print!("{trace}");
    println!();
    print!("{}", format_domain(&domain));
}
