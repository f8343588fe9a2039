//! Classifying closed terms by the value and stuck grammars, without
//! running them.
//!
//! Run with `cargo run --example classify_normal_forms`.

use incortype::frontend::parse_term;
use incortype::reduction::classify_nf;

fn main() {
    let samples = [
        "fun x -> 2 x",                          // a value with a stuck body
        "(3, div)",                              // a value-and-arbitrary pair? no: 3 is a value, div reduces
        "(1 (fun x -> x), div)",                 // stuck: the left component is stuck
        "match ('a, 3) with | ('b, x) -> x end", // stuck: no branch matches
        "(fun x -> x) 1",                        // a redex
        "3 + 'you",                              // stuck arithmetic
    ];
    for src in samples {
        let term = parse_term(src).expect("example term parses");
        println!("{:10?}  {}", classify_nf(&term).expect("closed"), src);
    }
}
