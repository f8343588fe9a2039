//! The bounded semantics oracle: enumerate the closed normal forms of a
//! small universe and probe type membership directly.
//!
//! Run with `cargo run --example oracle_membership`.

use incortype::frontend::parse_type;
use incortype::oracle::{enum_normal_forms, member_nf, NfUniverse};
use incortype::subtyping::subtype;

fn main() {
    let universe = NfUniverse::new(2, &["a", "b"], &[0, 1]);
    let nfs = enum_normal_forms(&universe);
    println!("enumerated {} normal forms at depth 2", nfs.len());

    for src in ["Ok", "~Ok", "Int", "(Ok, Ok)", "Fun"] {
        let ty = parse_type(src).unwrap();
        let count = nfs
            .iter()
            .filter(|u| member_nf(u, &ty, universe.fuel()).unwrap())
            .count();
        println!("{:10}  {} members", src, count);
    }

    // spot-check decider soundness against the model
    let a = parse_type("('a, Int)").unwrap();
    let b = parse_type("PairVal").unwrap();
    assert!(subtype(&a, &b));
    let violations = nfs
        .iter()
        .filter(|u| {
            member_nf(u, &a, universe.fuel()).unwrap()
                && !member_nf(u, &b, universe.fuel()).unwrap()
        })
        .count();
    println!("('a, Int) <= PairVal counterexamples: {}", violations);
}
