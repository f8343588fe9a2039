//! The acceptance gate: one test per criterion, each printing a pass/fail
//! line.  Run with `cargo test --test acceptance -- --nocapture` to see the
//! lines.

mod common;

use common::*;
use incortype::frontend::{
    parse_script, parse_term, parse_type, run_script, Expectation, ScriptDerivation,
    ScriptStatus,
};
use incortype::oracle::{enum_normal_forms, is_testable, member_nf_canonical, NfUniverse};
use incortype::onesided::{check_one_sided, negate_left, translate_one_to_two, translate_two_to_one};
use incortype::reduction::{classify_nf, eval, EvalOutcome, NfClass};
use incortype::subtyping::{subtype, type_equiv, Decider};
use incortype::syntax::Term;
use incortype::types::{PatternTypeSubstitution, Type};
use incortype::typing::{
    check, check_with, classify_and_derive, dynamic_soundness_check, elaborate, CheckReport,
    Derivation, DynamicVerdict, NfTag, RuleName, Sequent,
};
use rand::Rng;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load_script(name: &str) -> incortype::frontend::Script {
    let path = corpus_dir().join(name);
    let src = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {}", path.display(), e));
    parse_script(&src).unwrap_or_else(|e| panic!("{}: {}", name, e))
}

fn load_term(name: &str) -> Term {
    let path = corpus_dir().join(name);
    let src = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {}", path.display(), e));
    parse_term(&src).unwrap_or_else(|e| panic!("{}: {}", name, e))
}

fn all_scripts() -> Vec<(String, incortype::frontend::Script)> {
    let mut files = Vec::new();
    collect(&corpus_dir(), &mut files);
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let src = fs::read_to_string(&p).unwrap();
            let name = p
                .strip_prefix(corpus_dir())
                .unwrap()
                .to_string_lossy()
                .to_string();
            (
                name.clone(),
                parse_script(&src).unwrap_or_else(|e| panic!("{}: {}", name, e)),
            )
        })
        .collect()
}

fn collect(dir: &Path, out: &mut Vec<PathBuf>) {
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            collect(&p, out);
        } else if p.extension().map(|e| e == "script").unwrap_or(false) {
            out.push(p);
        }
    }
}

#[test]
fn acceptance_01_hebert_certifications() {
    let start = Instant::now();
    for name in ["hebert1.script", "hebert2.script", "hebert3.script"] {
        let script = load_script(name);
        let outcome = run_script(&script);
        assert_eq!(
            outcome.status,
            ScriptStatus::Accepted,
            "{} must certify",
            name
        );
        // the conclusions are refutations with an empty right-hand side
        match &script.derivation {
            ScriptDerivation::Two(root, _) => {
                assert!(root.right.is_empty(), "{} concludes with empty right", name);
                assert_eq!(root.left.len(), 1);
                assert_eq!(root.left.iter().next().unwrap().ty, Type::Ok);
            }
            _ => panic!("{} is two-sided", name),
        }
    }
    for (name, idx) in [("hebert1.term", 1), ("hebert2.term", 2), ("hebert3.term", 3)] {
        let term = load_term(name);
        match eval(&term, 10_000).unwrap() {
            EvalOutcome::WentWrong { stuck, steps } => {
                assert!(steps <= 10_000);
                if idx == 1 {
                    let expected = parse_term("5 + 'you").unwrap();
                    assert_eq!(stuck, expected, "program 1 gets stuck adding 5 and 'you");
                }
            }
            other => panic!("{} must go wrong, got {:?}", name, other),
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "criterion 1 runtime: {:?}", elapsed);
    println!(
        "ACCEPTANCE 1: pass - hebert 1-3 certified and evaluated wrong in {:?}",
        elapsed
    );
}

#[test]
fn acceptance_02_coarrow_twice() {
    for name in ["twice.script", "twice_app.script"] {
        let script = load_script(name);
        let outcome = run_script(&script);
        assert_eq!(outcome.status, ScriptStatus::Accepted, "{} must certify", name);
        let uses_coarrow = match &script.derivation {
            ScriptDerivation::Two(_, d) => {
                fn has_co(d: &Derivation) -> bool {
                    matches!(d.rule, RuleName::CoAbs | RuleName::CoApp)
                        || d.premises.iter().any(has_co)
                }
                has_co(d)
            }
            _ => false,
        };
        assert!(uses_coarrow, "{} exercises CoAbs/CoApp", name);
    }
    println!("ACCEPTANCE 2: pass - twice refutation and its composition certified");
}

#[test]
fn acceptance_03_subtyping_golden_table() {
    let start = Instant::now();
    // (lhs, rhs, expected) -- the table pins the decider's verdicts exactly
    let table: &[(&str, &str, bool)] = &[
        // required by the criterion
        ("Int", "Ok", true),
        ("Int -> Int", "Int -> Ok", true),
        ("Atoms -> Int", "Int", false),
        ("Int -> Int", "~(Int -> Ok)", false),
        ("~~('give, (Top, Int))", "('give, (Top, Int))", true),
        ("('give, (Top, Int))", "~~('give, (Top, Int))", true),
        // OkR for each value class
        ("Int", "Ok", true),
        ("PairVal", "Ok", true),
        ("Fun", "Ok", true),
        ("Atoms", "Ok", true),
        ("'a", "Ok", true),
        // CompRAtom1 / CompRAtom2 / CompLAtoms
        ("'b", "~'a", true),
        ("Int", "~'a", true),
        ("~Atoms", "~'a", true),
        // CompRInt
        ("'a", "~Int", true),
        ("Pair", "~Int", true),
        ("Fun", "~Int", true),
        // CompRPair / CompRArr / CompRAtoms
        ("Int", "~(Int, Int)", true),
        ("Int", "~(Int -> Int)", true),
        ("Int", "~Atoms", true),
        ("Atoms", "~Fun", true),
        // CompRPairL / CompRPairR
        ("(Int, Top)", "~(Atoms, Top)", true),
        ("(Ok, Int)", "~(Ok, Atoms)", true),
        // CompRUn / CompLUn
        ("Int", "~('a \\/ 'b)", true),
        ("~(Int \\/ Atoms)", "~Int", true),
        // CompRC / CompLC
        ("Int", "~~Int", true),
        ("~~Int", "Int", true),
        // CompLOk / CompLTop
        ("~Ok", "~Int", true),
        ("Bot", "'a", true),
        // UnionR / UnionL / Pair / Fun / Atom / Refl / Top
        ("Int", "Atoms \\/ Int", true),
        ("Int \\/ 'a", "Ok", true),
        ("('give, Int)", "(Atoms, Top)", true),
        ("Ok -> Int", "Int -> Ok", true),
        ("'give", "Atoms", true),
        ("~(Int -> Ok)", "~(Int -> Ok)", true),
        ("~Ok", "Top", true),
        // meets
        ("Int /\\ Ok", "Int", true),
        ("~Int /\\ Ok", "Ok", true),
        // CompLPair / CompLArr
        ("~(Top, Int)", "~(Ok, Int)", true),
        ("~(Int -> Top)", "~(Int -> Int)", true),
        // negative cases
        ("Ok", "Int", false),
        ("Top", "Ok", false),
        ("~Int", "Ok", false),
        ("Pair", "PairVal", false),
        ("(~Ok, Top)", "PairVal", false),
        ("'a", "'b", false),
        ("~'a", "~Atoms", false),
        ("Int \\/ Fun", "Int", false),
        ("~Ok", "Bot", false),
        ("Fun", "Int -> Int", false),
        ("Int -> Ok", "Int -> Int", false),
        ("('give, (Top, Int))", "Ok", false),
    ];
    assert!(table.len() >= 40, "golden table has {} entries", table.len());
    for (a, b, expected) in table {
        let ta = parse_type(a).unwrap();
        let tb = parse_type(b).unwrap();
        assert_eq!(
            subtype(&ta, &tb),
            *expected,
            "subtype({}, {}) must be {}",
            a,
            b,
            expected
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "criterion 3 runtime: {:?}", elapsed);
    println!(
        "ACCEPTANCE 3: pass - {} golden subtyping queries exact in {:?}",
        table.len(),
        elapsed
    );
}

#[test]
fn acceptance_04_decider_termination_fuzz() {
    let start = Instant::now();
    let mut rng = rng(0x5eed_0004);
    let mut decided_true = 0usize;
    for _ in 0..10_000 {
        let a = random_type(&mut rng, 4);
        let b = random_type(&mut rng, 4);
        if a.size() > 40 || b.size() > 40 {
            continue;
        }
        if subtype(&a, &b) {
            decided_true += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "criterion 4 runtime: {:?}", elapsed);
    println!(
        "ACCEPTANCE 4: pass - 10000 random pairs decided ({} positive) in {:?}",
        decided_true, elapsed
    );
}

#[test]
fn acceptance_05_subtyping_soundness_vs_oracle() {
    let start = Instant::now();
    let universe = NfUniverse::default_universe();
    let nfs = enum_normal_forms(&universe);
    let fuel = universe.fuel();
    let mut rng = rng(0x5eed_0005);

    // 500 sampled testable pairs with subtype(A, B) true
    let mut positive = 0usize;
    let mut attempts = 0usize;
    while positive < 500 {
        attempts += 1;
        assert!(attempts < 1_000_000, "pair sampling stalled");
        let a = random_testable_type(&mut rng, 3);
        let b = if attempts.is_multiple_of(2) {
            Type::union(vec![a.clone(), random_testable_type(&mut rng, 2)]).canon()
        } else {
            random_testable_type(&mut rng, 3)
        };
        if !is_testable(&b) || !subtype(&a, &b) {
            continue;
        }
        positive += 1;
        for u in &nfs {
            if member_nf_canonical(u, &a, fuel) {
                assert!(
                    member_nf_canonical(u, &b, fuel),
                    "counterexample to {} <= {}: {:?}",
                    a,
                    b,
                    u
                );
            }
        }
    }

    // complement partition law for 200 sampled testable types
    for _ in 0..200 {
        let a = random_testable_type(&mut rng, 3);
        let na = Type::comp(a.clone()).canon();
        for u in &nfs {
            let in_a = member_nf_canonical(u, &a, fuel);
            let in_na = member_nf_canonical(u, &na, fuel);
            assert!(in_a ^ in_na, "partition law fails for {} at {:?}", a, u);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "criterion 5 runtime: {:?}", elapsed);
    println!(
        "ACCEPTANCE 5: pass - 500 positive pairs sound, partition law on 200 types over {} normal forms in {:?}",
        nfs.len(),
        elapsed
    );
}

#[test]
fn acceptance_06_complete_classification() {
    let start = Instant::now();
    let mut rng = rng(0x5eed_0006);
    let mut dec = Decider::new();
    let mut values = 0usize;
    let mut stuck = 0usize;
    for i in 0..1000 {
        let u = random_normal_form(&mut rng, 5);
        let (tag, root, d) = classify_and_derive(&u)
            .unwrap_or_else(|e| panic!("sample {} not classified: {:?}", i, e));
        let expected = match classify_nf(&u).unwrap() {
            NfClass::Value => NfTag::Value,
            NfClass::Stuck => NfTag::Stuck,
            NfClass::Reducible => panic!("generator produced a reducible term"),
        };
        assert_eq!(tag, expected, "tag agrees with the grammar classifier");
        match tag {
            NfTag::Value => values += 1,
            NfTag::Stuck => stuck += 1,
        }
        assert!(
            check_with(&root, &d, &mut dec).is_accepted(),
            "synthesised derivation checks for {:?}",
            u
        );
        assert_ne!(
            dynamic_soundness_check(&root, 2000),
            DynamicVerdict::Violated,
            "dynamic check must not be violated for {:?}",
            u
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "criterion 6 runtime: {:?}", elapsed);
    println!(
        "ACCEPTANCE 6: pass - 1000 normal forms classified ({} values, {} stuck) in {:?}",
        values, stuck, elapsed
    );
}

#[test]
fn acceptance_07_transitivity_and_involution() {
    let mut rng = rng(0x5eed_0007);
    let mut applicable = 0usize;
    for _ in 0..2000 {
        let a = random_type(&mut rng, 3);
        let b = if rng.gen_bool(0.5) {
            Type::union(vec![a.clone(), random_type(&mut rng, 2)]).canon()
        } else {
            random_type(&mut rng, 3)
        };
        let c = if rng.gen_bool(0.5) {
            Type::union(vec![b.clone(), random_type(&mut rng, 2)]).canon()
        } else {
            random_type(&mut rng, 3)
        };
        if subtype(&a, &b) && subtype(&b, &c) {
            applicable += 1;
            assert!(subtype(&a, &c), "transitivity fails: {} {} {}", a, b, c);
        }
    }
    assert!(applicable >= 200, "only {} applicable triples", applicable);
    for _ in 0..1000 {
        let a = random_type(&mut rng, 3);
        assert!(
            type_equiv(&Type::comp(Type::comp(a.clone())), &a),
            "double complement fails for {}",
            a
        );
        let b = random_type(&mut rng, 3);
        if subtype(&a, &b) {
            assert!(
                subtype(&Type::comp(b.clone()), &Type::comp(a.clone())),
                "order reversal fails for {} <= {}",
                a,
                b
            );
        }
    }
    println!(
        "ACCEPTANCE 7: pass - transitivity on 2000 triples ({} applicable), involution on 1000 types",
        applicable
    );
}

#[test]
fn acceptance_08_translation_round_trips() {
    let mut two_sided = 0usize;
    let mut one_sided = 0usize;
    for (name, script) in all_scripts() {
        if !matches!(script.expect, Expectation::Accept) {
            continue;
        }
        match &script.derivation {
            ScriptDerivation::Two(root, d) => {
                let prim = elaborate(root, d).unwrap_or_else(|e| panic!("{}: {}", name, e));
                assert!(check(root, &prim).is_accepted(), "{} checks", name);
                let (root1, d1) = translate_two_to_one(root, &prim)
                    .unwrap_or_else(|e| panic!("{}: {}", name, e));
                // conclusion correspondence is exact
                assert_eq!(root1, negate_left(root), "{} conclusion maps to |- ~G, D", name);
                assert!(
                    check_one_sided(&root1, &d1).is_accepted(),
                    "{} translates to an accepted one-sided derivation",
                    name
                );
                two_sided += 1;
            }
            ScriptDerivation::One(root, d) => {
                assert!(check_one_sided(root, d).is_accepted(), "{} checks", name);
                let (root2, d2) = translate_one_to_two(root, d)
                    .unwrap_or_else(|e| panic!("{}: {}", name, e));
                let prim = elaborate(&root2, &d2).unwrap_or_else(|e| panic!("{}: {}", name, e));
                assert!(
                    check(&root2, &prim).is_accepted(),
                    "{} translates back to an accepted two-sided derivation",
                    name
                );
                one_sided += 1;
            }
            _ => {}
        }
    }
    assert!(two_sided >= 8 && one_sided >= 5);
    println!(
        "ACCEPTANCE 8: pass - {} two-sided and {} one-sided corpus derivations round-trip",
        two_sided, one_sided
    );
}

/// Single-witness mutations that provably break a node-local side condition.
fn collect_mutants(
    d: &Derivation,
    c: &Sequent,
    path: &mut Vec<usize>,
    dec: &mut Decider,
    out: &mut Vec<(Vec<usize>, Derivation)>,
) {
    let poison = Type::atom("zzmutant");
    match d.rule {
        RuleName::SubL => {
            let a = &d.principal.as_ref().unwrap().ty;
            if !dec.subtype(a, &poison) {
                let mut m = d.clone();
                m.witnesses.via = Some(poison.clone());
                out.push((path.clone(), m));
            }
        }
        RuleName::SubR => {
            let a = &d.principal.as_ref().unwrap().ty;
            if !dec.subtype(&poison, a) {
                let mut m = d.clone();
                m.witnesses.via = Some(poison.clone());
                out.push((path.clone(), m));
            }
        }
        RuleName::Var | RuleName::Top | RuleName::Num | RuleName::Atom => {
            let mut m = d.clone();
            let p = m.principal.as_mut().unwrap();
            p.ty = Type::pair(p.ty.clone(), poison.clone()).canon();
            out.push((path.clone(), m));
        }
        RuleName::Match => {
            for (i, theta) in d.witnesses.thetas.iter().enumerate() {
                if let Some(x) = theta.0.keys().next().cloned() {
                    let mut m = d.clone();
                    let mut t2: PatternTypeSubstitution = theta.clone();
                    t2.insert(&x, Type::comp(Type::Ok));
                    m.witnesses.thetas[i] = t2;
                    out.push((path.clone(), m));
                }
            }
        }
        _ => {}
    }
    let premises = incortype::typing::premise_sequents(d, c).expect("accepted tree");
    for (i, (child, pc)) in d.premises.iter().zip(premises.iter()).enumerate() {
        path.push(i);
        collect_mutants(child, pc, path, dec, out);
        path.pop();
    }
}

fn replace_node(d: &Derivation, path: &[usize], replacement: &Derivation) -> Derivation {
    if path.is_empty() {
        return replacement.clone();
    }
    let mut out = d.clone();
    let mut cur = &mut out;
    for &i in &path[..path.len() - 1] {
        cur = &mut cur.premises[i];
    }
    cur.premises[*path.last().unwrap()] = replacement.clone();
    out
}

#[test]
fn acceptance_09_mutation_suite() {
    let mut dec = Decider::new();
    let mut total = 0usize;
    for (name, script) in all_scripts() {
        if !matches!(script.expect, Expectation::Accept) {
            continue;
        }
        let (root, d) = match &script.derivation {
            ScriptDerivation::Two(root, d) => (root, d),
            _ => continue,
        };
        let prim = elaborate(root, d).unwrap();
        assert!(check(root, &prim).is_accepted());
        let mut mutants = Vec::new();
        collect_mutants(&prim, root, &mut Vec::new(), &mut dec, &mut mutants);
        for (path, mutated_node) in mutants {
            let mutated = replace_node(&prim, &path, &mutated_node);
            match check(root, &mutated) {
                CheckReport::Rejected(f) => {
                    assert_eq!(
                        f.path, path,
                        "{}: diagnosis points at the mutated node",
                        name
                    );
                }
                CheckReport::Accepted => {
                    panic!("{}: mutant at {:?} was accepted", name, path)
                }
            }
            total += 1;
        }
    }
    assert!(total >= 100, "only {} mutants generated", total);
    println!(
        "ACCEPTANCE 9: pass - {} single-witness mutants all rejected with node paths",
        total
    );
}

#[test]
fn acceptance_10_soundness_corollaries() {
    // The headline guarantee is covered jointly: certified refutations
    // evaluate wrong (criterion 1), the decider is sound for the normal-form
    // model (criterion 5), and synthesised classifications agree with
    // evaluation (criterion 6).  This test re-checks the observable
    // corollary on the shipped corpus: no accepted script is dynamically
    // violated.
    for (name, script) in all_scripts() {
        let outcome = run_script(&script);
        if let Some(dv) = outcome.dynamic {
            assert_ne!(dv, DynamicVerdict::Violated, "{} violates soundness", name);
        }
        if matches!(script.expect, Expectation::Accept) {
            assert_eq!(outcome.status, ScriptStatus::Accepted, "{}", name);
        } else {
            assert!(
                matches!(outcome.status, ScriptStatus::Rejected(_)),
                "{} must be rejected",
                name
            );
        }
    }
    println!(
        "ACCEPTANCE 10: pass - well-typed corpus programs cannot go wrong; ill-typed ones cannot evaluate (criteria 1, 5, 6 jointly)"
    );
}
