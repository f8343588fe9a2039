//! Property suites for the toolkit's invariants: substitution and binding,
//! reduction trichotomy, pattern-type instantiation, decider laws, the
//! bounded semantics model, and printer round trips.

mod common;

use common::*;
use incortype::frontend::{parse_term, parse_type};
use incortype::oracle::{enum_normal_forms, member_nf, member_nf_canonical, NfUniverse};
use incortype::reduction::{classify_nf, eval, is_stuck, is_value, step, EvalOutcome, NfClass, StepResult};
use incortype::subtyping::{disjoint, subtype, type_equiv, universe, Decider};
use incortype::syntax::{
    alpha_eq, apply_subst, free_vars, patterns_disjoint, Pattern, Term, TermSubstitution,
};
use incortype::types::{instantiate_pattern, pattern_ok_type, theta_ok, Type};
use proptest::prelude::*;

// -------------------------------------------------------------------------
// syntax

#[test]
fn subst_free_vars_inclusion() {
    let mut rng = rng(11);
    for _ in 0..2000 {
        let t = random_closed_term(&mut rng, 4);
        // open the term up by replacing some numerals with variables
        let t = open_up(&t);
        let mut sub = TermSubstitution::new();
        sub.insert("u0", random_closed_term(&mut rng, 2));
        sub.insert("u1", Term::var("u0"));
        let result = apply_subst(&t, &sub);
        let fv_t = free_vars(&t);
        let fv_r = free_vars(&result);
        for x in &fv_r {
            let mut allowed = fv_t.contains(x) && !sub.domain().contains(x);
            for y in fv_t.intersection(&sub.domain()) {
                if free_vars(sub.get(y).unwrap()).contains(x) {
                    allowed = true;
                }
            }
            assert!(allowed, "{} escaped the substitution", x);
        }
    }
}

fn open_up(t: &Term) -> Term {
    match t {
        Term::Num(n) if *n == 0.into() => Term::var("u0"),
        Term::Num(n) if *n == 1.into() => Term::var("u1"),
        Term::Pair(a, b) => Term::pair(open_up(a), open_up(b)),
        Term::App(a, b) => Term::app(open_up(a), open_up(b)),
        Term::BinOp(op, a, b) => Term::binop(*op, open_up(a), open_up(b)),
        Term::RelOp(op, a, b) => Term::relop(*op, open_up(a), open_up(b)),
        Term::Abs(x, b) => Term::Abs(x.clone(), Box::new(open_up(b))),
        Term::Fix(x, b) => Term::Fix(x.clone(), Box::new(open_up(b))),
        Term::Match(s, br) => Term::Match(
            Box::new(open_up(s)),
            br.iter().map(|(p, n)| (p.clone(), open_up(n))).collect(),
        ),
        _ => t.clone(),
    }
}

#[test]
fn alpha_eq_is_an_equivalence() {
    let mut rng = rng(12);
    let mut terms = Vec::new();
    for _ in 0..300 {
        terms.push(random_closed_term(&mut rng, 4));
    }
    for t in &terms {
        assert!(alpha_eq(t, t));
    }
    // symmetric and transitive through alpha-variants
    for t in &terms {
        let renamed = rename_all(t, "r");
        let renamed2 = rename_all(t, "s");
        assert!(alpha_eq(t, &renamed));
        assert!(alpha_eq(&renamed, t));
        assert!(alpha_eq(&renamed, &renamed2));
        // substitution respects alpha equivalence
        let sub = TermSubstitution::single("zz", Term::num(7));
        assert!(alpha_eq(&apply_subst(t, &sub), &apply_subst(&renamed, &sub)));
    }
}

fn rename_all(t: &Term, prefix: &str) -> Term {
    fn go(t: &Term, prefix: &str, depth: &mut usize) -> Term {
        match t {
            Term::Abs(x, b) | Term::Fix(x, b) => {
                let fresh = format!("{}{}", prefix, depth);
                *depth += 1;
                let renamed = apply_subst(b, &TermSubstitution::single(x, Term::var(&fresh)));
                let body = go(&renamed, prefix, depth);
                if matches!(t, Term::Abs(_, _)) {
                    Term::abs(&fresh, body)
                } else {
                    Term::fix(&fresh, body)
                }
            }
            Term::Pair(a, b) => Term::pair(go(a, prefix, depth), go(b, prefix, depth)),
            Term::App(a, b) => Term::app(go(a, prefix, depth), go(b, prefix, depth)),
            Term::BinOp(op, a, b) => Term::binop(*op, go(a, prefix, depth), go(b, prefix, depth)),
            Term::RelOp(op, a, b) => Term::relop(*op, go(a, prefix, depth), go(b, prefix, depth)),
            Term::Match(s, br) => Term::Match(
                Box::new(go(s, prefix, depth)),
                br.iter()
                    .map(|(p, n)| (p.clone(), go(n, prefix, depth)))
                    .collect(),
            ),
            _ => t.clone(),
        }
    }
    go(t, prefix, &mut 0)
}

/// Ground instances of a pattern over a tiny universe, for the brute-force
/// disjointness cross-check.
fn ground_instances(p: &Pattern, depth: usize) -> Vec<Term> {
    match p {
        Pattern::Atom(a) => vec![Term::Atom(a.clone())],
        Pattern::Var(_) => {
            let mut out = vec![
                Term::atom("a"),
                Term::atom("b"),
                Term::num(0),
                Term::num(1),
            ];
            if depth > 0 {
                let inner = ground_instances(&Pattern::pvar("_"), depth - 1);
                for x in &inner {
                    for y in &inner {
                        out.push(Term::pair(x.clone(), y.clone()));
                    }
                }
            }
            out
        }
        Pattern::Pair(a, b) => {
            let xs = ground_instances(a, depth.saturating_sub(1));
            let ys = ground_instances(b, depth.saturating_sub(1));
            let mut out = Vec::new();
            for x in &xs {
                for y in &ys {
                    out.push(Term::pair(x.clone(), y.clone()));
                }
            }
            out
        }
    }
}

fn pattern_atoms(p: &Pattern, out: &mut Vec<String>) {
    match p {
        Pattern::Atom(a) => out.push(a.clone()),
        Pattern::Var(_) => {}
        Pattern::Pair(a, b) => {
            pattern_atoms(a, out);
            pattern_atoms(b, out);
        }
    }
}

/// A random pattern over the two-atom alphabet of the brute-force universe.
fn random_pattern_2(rng: &mut rand::rngs::StdRng, depth: usize) -> Pattern {
    loop {
        let p = random_pattern(rng, depth);
        let mut atoms = Vec::new();
        pattern_atoms(&p, &mut atoms);
        if atoms.iter().all(|a| a == "a" || a == "b") {
            return p;
        }
    }
}

#[test]
fn disjointness_agrees_with_brute_force() {
    let mut rng = rng(13);
    for _ in 0..300 {
        let p = random_pattern_2(&mut rng, 2);
        let q = random_pattern_2(&mut rng, 2);
        let verdict = patterns_disjoint(&p, &q);
        assert_eq!(verdict, patterns_disjoint(&q, &p), "symmetry");
        let overlap_at = |depth: usize| {
            let ip: std::collections::BTreeSet<Term> =
                ground_instances(&p, depth).into_iter().collect();
            let iq: std::collections::BTreeSet<Term> =
                ground_instances(&q, depth).into_iter().collect();
            ip.intersection(&iq).next().is_some()
        };
        if verdict {
            // disjoint: the full depth-3 intersection must be empty
            assert!(!overlap_at(3), "{:?} vs {:?}", p, q);
        } else {
            // non-disjoint linear patterns share an instance; try the
            // cheap universe first
            assert!(overlap_at(2) || overlap_at(3), "{:?} vs {:?}", p, q);
        }
    }
}

// -------------------------------------------------------------------------
// reduction

#[test]
fn trichotomy_and_classifier_agree() {
    let mut rng = rng(21);
    for _ in 0..10_000 {
        let t = random_closed_term(&mut rng, 6);
        let by_step = step(&t).unwrap();
        let by_grammar = classify_nf(&t).unwrap();
        match (&by_step, by_grammar) {
            (StepResult::Stepped(_), NfClass::Reducible) => {}
            (StepResult::Value, NfClass::Value) => {}
            (StepResult::Stuck(_), NfClass::Stuck) => {}
            other => panic!("disagreement on {:?}: {:?}", t, other),
        }
    }
}

#[test]
fn pairs_are_left_strict() {
    let mut rng = rng(22);
    for _ in 0..2000 {
        let a = random_closed_term(&mut rng, 4);
        let b = random_closed_term(&mut rng, 3);
        if let StepResult::Stepped(a2) = step(&a).unwrap() {
            let pair = Term::pair(a.clone(), b.clone());
            match step(&pair).unwrap() {
                StepResult::Stepped(next) => {
                    assert_eq!(next, Term::pair(a2, b.clone()), "right component untouched")
                }
                other => panic!("pair must step left first: {:?}", other),
            }
        }
    }
}

#[test]
fn binop_right_operand_waits_for_numeral() {
    let mut rng = rng(23);
    for _ in 0..2000 {
        let a = random_closed_term(&mut rng, 3);
        let b = random_closed_term(&mut rng, 3);
        let t = Term::binop(incortype::syntax::BinOp::Add, a.clone(), b.clone());
        if let StepResult::Stepped(next) = step(&t).unwrap() {
            match (&next, step(&a).unwrap()) {
                // left stepped
                (Term::BinOp(_, l, r), StepResult::Stepped(a2)) => {
                    assert_eq!(**l, a2);
                    assert_eq!(**r, b);
                }
                // left is already a numeral: the right may move
                (_, StepResult::Value) => {
                    assert!(matches!(a, Term::Num(_)), "only numerals let the right move")
                }
                (_, other) => panic!("unexpected: {:?}", other),
            }
        }
    }
}

#[test]
fn stuck_terms_are_preserved() {
    let mut rng = rng(24);
    for _ in 0..2000 {
        let s = random_stuck(&mut rng, 4);
        assert!(matches!(step(&s).unwrap(), StepResult::Stuck(_)));
        match eval(&s, 10).unwrap() {
            EvalOutcome::WentWrong { stuck, steps } => {
                assert_eq!(steps, 0);
                assert_eq!(stuck, s);
            }
            other => panic!("{:?}", other),
        }
    }
}

// -------------------------------------------------------------------------
// types and subtyping

#[test]
fn pattern_ok_types_are_below_ok() {
    let mut rng = rng(31);
    for _ in 0..1000 {
        let p = random_pattern(&mut rng, 4);
        let ty = instantiate_pattern(&p, &theta_ok(&p)).unwrap();
        assert!(subtype(&ty, &Type::Ok), "{:?}", p);
        assert_eq!(ty, pattern_ok_type(&p));
    }
}

#[test]
fn coto_is_complement_of_onlyto() {
    let mut rng = rng(32);
    for _ in 0..500 {
        let a = random_type(&mut rng, 3);
        let b = random_type(&mut rng, 3);
        assert_eq!(
            Type::coto(a.clone(), b.clone()).canon(),
            Type::comp(Type::onlyto(a, b)).canon()
        );
    }
}

#[test]
fn canon_is_idempotent_and_verdict_preserving() {
    let mut rng = rng(33);
    for _ in 0..2000 {
        let a = random_type(&mut rng, 4);
        let b = random_type(&mut rng, 4);
        assert_eq!(a.canon(), a.canon().canon());
        assert_eq!(subtype(&a, &b), subtype(&a.canon(), &b.canon()));
    }
}

#[test]
fn subtyping_is_reflexive() {
    let mut rng = rng(34);
    let mut dec = Decider::new();
    for _ in 0..2000 {
        let a = random_type(&mut rng, 4);
        assert!(dec.subtype(&a, &a), "{}", a);
    }
}

#[test]
fn universe_shape() {
    let mut rng = rng(35);
    for _ in 0..300 {
        let a = random_type(&mut rng, 3);
        let b = random_type(&mut rng, 3);
        let u = universe(&a, &b);
        assert_eq!(u, universe(&b, &a), "symmetric");
        for t in [Type::Top, Type::Int, Type::pair_any(), Type::pair_val(), Type::fun_any(), Type::Atoms, Type::Ok] {
            assert!(u.contains(&t) && u.contains(&Type::comp(t)));
        }
        // the fixed base contributes at most eight types (including ~Top,
        // needed so the space is closed under the rule premises)
        let bound = 2 * (a.canon().subexpressions().len() + b.canon().subexpressions().len() + 8);
        assert!(u.len() <= bound, "{} > {}", u.len(), bound);
    }
}

#[test]
fn disjoint_types_share_no_normal_forms() {
    let universe = NfUniverse::new(2, &["a", "b"], &[0, 1]);
    let nfs = enum_normal_forms(&universe);
    let testables = [
        Type::Int,
        Type::pair_any(),
        Type::fun_any(),
        Type::Atoms,
        Type::atom("a"),
        Type::atom("b"),
    ];
    for a in &testables {
        for b in &testables {
            if disjoint(a, b) {
                for u in &nfs {
                    assert!(
                        !(member_nf_canonical(u, a, 100) && member_nf_canonical(u, b, 100)),
                        "{} and {} overlap at {:?}",
                        a,
                        b,
                        u
                    );
                }
            }
        }
    }
}

// -------------------------------------------------------------------------
// the bounded model

#[test]
fn oracle_golden_count_and_base_sets() {
    let universe = NfUniverse::new(2, &["a", "b"], &[0, 1]);
    let nfs = enum_normal_forms(&universe);
    // frozen from the first enumeration run
    assert_eq!(nfs.len(), 197);
    for u in &nfs {
        assert!(member_nf(u, &Type::Top, 100).unwrap());
        assert_eq!(member_nf(u, &Type::Ok, 100).unwrap(), is_value(u));
        assert_eq!(
            member_nf(u, &Type::comp(Type::Ok), 100).unwrap(),
            is_stuck(u)
        );
    }
}

#[test]
fn subtype_equivalent_types_have_equal_members() {
    let universe = NfUniverse::new(2, &["a", "b"], &[0, 1]);
    let nfs = enum_normal_forms(&universe);
    let mut rng = rng(41);
    let mut checked = 0usize;
    for _ in 0..400 {
        let a = random_testable_type(&mut rng, 2);
        let b = random_testable_type(&mut rng, 2);
        if !type_equiv(&a, &b) {
            continue;
        }
        checked += 1;
        for u in &nfs {
            assert_eq!(
                member_nf_canonical(u, &a, 100),
                member_nf_canonical(u, &b, 100),
                "{} ~ {} disagree at {:?}",
                a,
                b,
                u
            );
        }
    }
    assert!(checked > 0);
}

// -------------------------------------------------------------------------
// printer round trips (proptest drives the type strategy; the term side
// uses the seeded generator to keep match invariants)

fn type_strategy() -> impl Strategy<Value = Type> {
    let leaf = prop_oneof![
        Just(Type::Top),
        Just(Type::Ok),
        Just(Type::Atoms),
        Just(Type::Int),
        Just(Type::atom("a")),
        Just(Type::atom("give")),
        Just(Type::fun_any()),
        Just(Type::bot()),
    ];
    leaf.prop_recursive(4, 64, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::pair(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::arrow(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::onlyto(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::coto(a, b)),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Type::union),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Type::meet),
            inner.prop_map(Type::comp),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]
    #[test]
    fn type_print_parse_round_trip(ty in type_strategy()) {
        let canonical = ty.canon();
        let printed = canonical.to_string();
        let reparsed = parse_type(&printed)
            .unwrap_or_else(|e| panic!("print of {:?} unparseable: {} ({})", canonical, printed, e));
        prop_assert_eq!(reparsed, canonical);
    }
}

#[test]
fn term_print_parse_round_trip() {
    let mut rng = rng(51);
    for _ in 0..10_000 {
        let t = random_closed_term(&mut rng, 5);
        let printed = t.to_string();
        let reparsed = parse_term(&printed)
            .unwrap_or_else(|e| panic!("print of {:?} unparseable: {} ({})", t, printed, e));
        assert!(alpha_eq(&t, &reparsed), "{}", printed);
    }
}

#[test]
fn type_print_parse_many_random() {
    let mut rng = rng(52);
    for _ in 0..10_000 {
        let ty = random_type(&mut rng, 4);
        let printed = ty.to_string();
        let reparsed = parse_type(&printed).unwrap();
        assert_eq!(reparsed, ty, "{}", printed);
    }
}

#[test]
fn random_terms_round_trip_through_eval_shapes() {
    // evaluation outputs print back to parseable terms (negative numerals
    // included)
    let t = parse_term("0 - 5").unwrap();
    match eval(&t, 10).unwrap() {
        EvalOutcome::Converged { value, .. } => {
            let printed = value.to_string();
            assert_eq!(parse_term(&printed).unwrap(), value);
            let in_pair = Term::pair(value.clone(), Term::num(1));
            let reparsed = parse_term(&in_pair.to_string()).unwrap();
            assert_eq!(reparsed, in_pair);
        }
        other => panic!("{:?}", other),
    }
}
