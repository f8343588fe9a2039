//! Building a derivation with derived rules in memory, expanding it into
//! primitives, and checking the result.
//!
//! Run with `cargo run --example elaborate_derived_rules`.

use incortype::frontend::parse_term;
use incortype::types::Type;
use incortype::typing::{
    check, elaborate, formula, Derivation, RuleName, Sequent, Witnesses,
};

fn main() {
    // 3 : ~Int |-  via SwapL over |- 3 : ~~Int
    let three = parse_term("3").unwrap();
    let root = Sequent::refutes(vec![formula(three.clone(), Type::comp(Type::Int))]);
    let num = Derivation::node(
        RuleName::Num,
        formula(three.clone(), Type::Int),
        Witnesses::none(),
        vec![],
    );
    let subr = Derivation::node(
        RuleName::SubR,
        formula(three.clone(), Type::comp(Type::comp(Type::Int))),
        Witnesses::via(Type::Int),
        vec![num],
    );
    let swap = Derivation::node(
        RuleName::SwapL,
        formula(three, Type::comp(Type::Int)),
        Witnesses::none(),
        vec![subr],
    );

    println!("before elaboration: {} nodes", swap.count_nodes());
    let prim = elaborate(&root, &swap).expect("SwapL elaborates");
    println!("after elaboration:  {} nodes", prim.count_nodes());
    println!("primitive only:     {}", prim.uses_only_primitive_rules());
    println!("check:              {:?}", check(&root, &prim));
}
