//! Round-tripping a derivation between the two-sided and one-sided systems.
//!
//! Run with `cargo run --example translate_systems` from the repository
//! root.

use incortype::frontend::{parse_script, serialize_script, Expectation, Script, ScriptDerivation, ScriptSystem};
use incortype::onesided::{check_one_sided, translate_one_to_two, translate_two_to_one};
use incortype::typing::{check, elaborate};
use std::fs;

fn main() {
    let src = fs::read_to_string("corpus/ope_display.script").expect("run from the repo root");
    let script = parse_script(&src).expect("script parses");
    let (root, d) = match &script.derivation {
        ScriptDerivation::Two(root, d) => (root.clone(), d.clone()),
        _ => unreachable!("ope_display is two-sided"),
    };
    let prim = elaborate(&root, &d).expect("elaborates");
    assert!(check(&root, &prim).is_accepted());

    let (root1, d1) = translate_two_to_one(&root, &prim).expect("translates");
    println!("one-sided conclusion: {}", root1);
    assert!(check_one_sided(&root1, &d1).is_accepted());

    let (root2, d2) = translate_one_to_two(&root1, &d1).expect("translates back");
    let prim2 = elaborate(&root2, &d2).expect("elaborates");
    assert!(check(&root2, &prim2).is_accepted());
    println!("two-sided conclusion: {}", root2);

    let out = Script {
        system: ScriptSystem::OneSided,
        expect: Expectation::Accept,
        derivation: ScriptDerivation::One(root1, d1),
    };
    println!("--- translated script ---");
    print!("{}", serialize_script(&out));
}
