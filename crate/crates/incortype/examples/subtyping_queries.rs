//! The subtype decider on some instructive queries, including the ones that
//! exercise the complement operator as an order-reversing involution.
//!
//! Run with `cargo run --example subtyping_queries`.

use incortype::frontend::parse_type;
use incortype::subtyping::{subtype, type_equiv, universe};

fn query(a: &str, b: &str) {
    let ta = parse_type(a).expect("type parses");
    let tb = parse_type(b).expect("type parses");
    println!("{:5}  {} <= {}", subtype(&ta, &tb), a, b);
}

fn main() {
    query("Int", "Ok");
    query("Int -> Int", "Int -> Ok");
    query("Atoms -> Int", "Int");
    query("~~('give, Int)", "('give, Int)");
    query("Int -> Int", "~(Int -> Ok)");
    query("~Ok", "~Int");
    query("Int /\\ Ok", "Int");
    query("'a", "~Int");

    let a = parse_type("(Int, 'a)").unwrap();
    let b = parse_type("Ok").unwrap();
    println!(
        "universe for the last pair has {} types",
        universe(&a, &b).len()
    );
    let c = parse_type("~~(Int \\/ 'a)").unwrap();
    let d = parse_type("Int \\/ 'a").unwrap();
    println!("double complement is an involution: {}", type_equiv(&c, &d));
}
