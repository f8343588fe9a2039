//! Running the shipped script corpus through the library API.
//!
//! Run with `cargo run --example corpus_runner` from the repository root.

use incortype::frontend::{corpus_report, run_corpus};
use std::path::Path;

fn main() {
    let results = run_corpus(Path::new("corpus"), 2).expect("run from the repository root");
    print!("{}", corpus_report(&results, true));
}
