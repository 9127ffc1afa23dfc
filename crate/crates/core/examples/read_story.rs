//! Reads the phone story session by session and prints what the reader
//! accepted, as `star read --acceptable` would.
//!
//!     cargo run -p star-core --example read_story [FILE]

use star_core::parser::parse_domain;
use star_core::reasoner::{read_story, render_story, ProgressEvent, ReaderOptions};

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}")),
        None => include_str!("../fixtures/phone.star").to_string(),
    };
    let domain = match parse_domain(&text).into_result() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(3);
        }
    };
    let options = ReaderOptions { acceptable: true, ..Default::default() };
    let reports = read_story(&domain, &options, &mut |e| {
        if let ProgressEvent::ArgumentsBuilt { session, arguments, attacks } = e {
            eprintln!("session {session}: {arguments} arguments, {attacks} attacks");
        }
    })
    .unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(4);
    });
    print!("{}", render_story(&reports, &options));
}
