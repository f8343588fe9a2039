//! Loading, elaborating and checking one of the shipped refutation scripts.
//!
//! Run with `cargo run --example check_script` from the repository root.

use incortype::frontend::{parse_script, run_script, ScriptStatus};
use std::fs;
use std::path::Path;

fn main() {
    let path = Path::new("corpus/hebert1.script");
    let src = fs::read_to_string(path).expect("run from the repository root");
    let script = parse_script(&src).expect("script parses");
    let outcome = run_script(&script);
    match &outcome.status {
        ScriptStatus::Accepted => println!("{}: accepted", path.display()),
        ScriptStatus::Rejected(why) => println!("{}: rejected: {}", path.display(), why),
    }
    if let Some((before, after)) = outcome.elaboration {
        println!("derived rules elaborated: {} -> {} nodes", before, after);
    }
    if let Some(dv) = outcome.dynamic {
        println!("dynamic check: {:?}", dv);
    }
}
