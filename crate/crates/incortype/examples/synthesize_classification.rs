//! Every closed normal form is certifiably a value or a stuck term: the
//! synthesiser builds the derivation, the checker accepts it.
//!
//! Run with `cargo run --example synthesize_classification`.

use incortype::frontend::parse_term;
use incortype::typing::{check, classify_and_derive, dynamic_soundness_check, NfTag};

fn main() {
    let samples = [
        "fun x -> 2 x",
        "('give, (5, 'you))",
        "3 (1, 2)",
        "match ('a, 3) with | ('b, x) -> x end",
        "(1 (fun x -> x), div)",
        "3 + 'you",
    ];
    for src in samples {
        let term = parse_term(src).expect("example term parses");
        let (tag, root, d) = classify_and_derive(&term).expect("normal form");
        let verdict = check(&root, &d);
        let dynamic = dynamic_soundness_check(&root, 1000);
        println!(
            "{:6}  nodes={:3}  check={:?}  dynamic={:?}  {}",
            match tag {
                NfTag::Value => "value",
                NfTag::Stuck => "stuck",
            },
            d.count_nodes(),
            verdict,
            dynamic,
            src
        );
    }
}
