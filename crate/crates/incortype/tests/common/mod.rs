//! Seeded random generators shared by the integration suites.

#![allow(dead_code)]

use incortype::syntax::{BinOp, Pattern, RelOp, Term};
use incortype::types::Type;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub const ATOMS: [&str; 3] = ["a", "b", "give"];

pub fn random_type(rng: &mut StdRng, depth: usize) -> Type {
    if depth == 0 || rng.gen_bool(0.35) {
        return match rng.gen_range(0..7) {
            0 => Type::Top,
            1 => Type::Ok,
            2 => Type::Atoms,
            3 => Type::Int,
            4 => Type::atom(ATOMS[rng.gen_range(0..ATOMS.len())]),
            5 => Type::fun_any(),
            _ => Type::pair_val(),
        };
    }
    match rng.gen_range(0..4) {
        0 => Type::pair(random_type(rng, depth - 1), random_type(rng, depth - 1)),
        1 => Type::arrow(random_type(rng, depth - 1), random_type(rng, depth - 1)),
        2 => {
            let k = rng.gen_range(2..=3);
            Type::union((0..k).map(|_| random_type(rng, depth - 1)).collect())
        }
        _ => Type::comp(random_type(rng, depth - 1)),
    }
    .canon()
}

/// A type in the oracle-decidable fragment (arrows only of shape C -> Top).
pub fn random_testable_type(rng: &mut StdRng, depth: usize) -> Type {
    if depth == 0 || rng.gen_bool(0.35) {
        return match rng.gen_range(0..6) {
            0 => Type::Top,
            1 => Type::Ok,
            2 => Type::Atoms,
            3 => Type::Int,
            4 => Type::atom(ATOMS[rng.gen_range(0..ATOMS.len())]),
            _ => Type::fun_any(),
        };
    }
    match rng.gen_range(0..4) {
        0 => Type::pair(
            random_testable_type(rng, depth - 1),
            random_testable_type(rng, depth - 1),
        ),
        1 => Type::arrow(random_testable_type(rng, depth - 1), Type::Top),
        2 => {
            let k = rng.gen_range(2..=3);
            Type::union(
                (0..k)
                    .map(|_| random_testable_type(rng, depth - 1))
                    .collect(),
            )
        }
        _ => Type::comp(random_testable_type(rng, depth - 1)),
    }
    .canon()
}

/// A closed term; branches are built with disjoint patterns so the term
/// satisfies the match invariants.
pub fn random_closed_term(rng: &mut StdRng, depth: usize) -> Term {
    let mut env = Vec::new();
    random_term(rng, depth, &mut env)
}

fn random_term(rng: &mut StdRng, depth: usize, env: &mut Vec<String>) -> Term {
    if depth == 0 || (env.is_empty() && rng.gen_bool(0.15)) || rng.gen_bool(0.2) {
        return random_leaf(rng, env);
    }
    match rng.gen_range(0..8) {
        0 => Term::pair(
            random_term(rng, depth - 1, env),
            random_term(rng, depth - 1, env),
        ),
        1 => {
            let x = fresh_var(env);
            env.push(x.clone());
            let body = random_term(rng, depth - 1, env);
            env.pop();
            Term::abs(&x, body)
        }
        2 => Term::app(
            random_term(rng, depth - 1, env),
            random_term(rng, depth - 1, env),
        ),
        3 => {
            let x = fresh_var(env);
            env.push(x.clone());
            let body = random_term(rng, depth - 1, env);
            env.pop();
            Term::fix(&x, body)
        }
        4 => Term::binop(
            [BinOp::Add, BinOp::Sub, BinOp::Mul][rng.gen_range(0..3)],
            random_term(rng, depth - 1, env),
            random_term(rng, depth - 1, env),
        ),
        5 => Term::relop(
            [RelOp::Eq, RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge][rng.gen_range(0..5)],
            random_term(rng, depth - 1, env),
            random_term(rng, depth - 1, env),
        ),
        _ => {
            let scrut = random_term(rng, depth - 1, env);
            let branches = random_branches(rng, depth - 1, env);
            Term::Match(Box::new(scrut), branches)
        }
    }
}

fn random_leaf(rng: &mut StdRng, env: &[String]) -> Term {
    if !env.is_empty() && rng.gen_bool(0.4) {
        return Term::var(&env[rng.gen_range(0..env.len())]);
    }
    match rng.gen_range(0..3) {
        0 => Term::atom(ATOMS[rng.gen_range(0..ATOMS.len())]),
        1 => Term::num(rng.gen_range(0..2)),
        _ => Term::div(),
    }
}

fn fresh_var(env: &[String]) -> String {
    format!("v{}", env.len())
}

/// Pairwise-disjoint linear patterns with their bound variables.
fn random_branches(rng: &mut StdRng, depth: usize, env: &mut Vec<String>) -> Vec<(Pattern, Term)> {
    // pools of mutually disjoint pattern shapes
    let shapes: Vec<Pattern> = vec![
        Pattern::patom("a"),
        Pattern::patom("b"),
        Pattern::ppair(Pattern::pvar("p0"), Pattern::pvar("p1")),
    ];
    let k = rng.gen_range(1..=2);
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() < k {
        let i = rng.gen_range(0..shapes.len());
        if !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    chosen
        .into_iter()
        .map(|i| {
            let pat = shapes[i].clone();
            let vars = pat.vars();
            for v in &vars {
                env.push(v.clone());
            }
            let body = random_term(rng, depth, env);
            for _ in &vars {
                env.pop();
            }
            (pat, body)
        })
        .collect()
}

/// A random closed normal form built directly from the value and stuck
/// grammars.
pub fn random_normal_form(rng: &mut StdRng, depth: usize) -> Term {
    if rng.gen_bool(0.5) {
        random_value(rng, depth)
    } else {
        random_stuck(rng, depth)
    }
}

pub fn random_value(rng: &mut StdRng, depth: usize) -> Term {
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..3) {
            0 => Term::atom(ATOMS[rng.gen_range(0..ATOMS.len())]),
            1 => Term::num(rng.gen_range(0..2)),
            _ => random_abs(rng),
        };
    }
    if rng.gen_bool(0.5) {
        Term::pair(random_value(rng, depth - 1), random_value(rng, depth - 1))
    } else {
        random_abs(rng)
    }
}

fn random_abs(rng: &mut StdRng) -> Term {
    match rng.gen_range(0..3) {
        0 => Term::abs("w", Term::var("w")),
        1 => Term::abs("w", Term::div()),
        _ => Term::abs("w", Term::app(Term::num(2), Term::var("w"))),
    }
}

fn random_inert(rng: &mut StdRng, depth: usize) -> Term {
    if rng.gen_bool(0.3) {
        Term::div()
    } else {
        random_normal_form(rng, depth)
    }
}

pub fn random_stuck(rng: &mut StdRng, depth: usize) -> Term {
    let d = depth.saturating_sub(1);
    match rng.gen_range(0..8) {
        0 if depth > 1 => Term::pair(random_stuck(rng, d), random_inert(rng, d)),
        1 if depth > 1 => Term::pair(random_value(rng, d), random_stuck(rng, d)),
        2 => {
            // operation stuck on the left operand
            let left = random_non_num_nf(rng, d);
            if rng.gen_bool(0.5) {
                Term::binop(BinOp::Add, left, random_inert(rng, d))
            } else {
                Term::relop(RelOp::Eq, left, random_inert(rng, d))
            }
        }
        3 => {
            // operation stuck on the right operand
            let right = random_non_num_nf(rng, d);
            if rng.gen_bool(0.5) {
                Term::binop(BinOp::Mul, Term::num(0), right)
            } else {
                Term::relop(RelOp::Le, Term::num(0), right)
            }
        }
        4 => Term::app(random_non_abs_nf(rng, d), random_inert(rng, d)),
        5 if depth > 1 => Term::match_term(
            random_stuck(rng, d),
            vec![(Pattern::patom("a"), Term::num(0))],
        ),
        _ => {
            // a value that matches none of the branch patterns
            let branches = vec![
                (Pattern::patom("a"), Term::num(0)),
                (
                    Pattern::ppair(Pattern::patom("b"), Pattern::pvar("q")),
                    Term::var("q"),
                ),
            ];
            loop {
                let v = random_value(rng, d);
                let matches = matches!(&v, Term::Atom(x) if x == "a")
                    || matches!(&v, Term::Pair(l, _) if matches!(l.as_ref(), Term::Atom(x) if x == "b"));
                if !matches {
                    return Term::Match(Box::new(v), branches);
                }
            }
        }
    }
}

fn random_non_num_nf(rng: &mut StdRng, depth: usize) -> Term {
    loop {
        let t = if depth > 0 && rng.gen_bool(0.3) {
            random_stuck(rng, depth)
        } else {
            random_value(rng, depth)
        };
        if !matches!(t, Term::Num(_)) {
            return t;
        }
    }
}

fn random_non_abs_nf(rng: &mut StdRng, depth: usize) -> Term {
    loop {
        let t = if depth > 0 && rng.gen_bool(0.3) {
            random_stuck(rng, depth)
        } else {
            random_value(rng, depth)
        };
        if !matches!(t, Term::Abs(_, _)) {
            return t;
        }
    }
}

/// A random linear pattern; variable names are numbered left to right.
pub fn random_pattern(rng: &mut StdRng, depth: usize) -> Pattern {
    let mut counter = 0;
    random_pattern_go(rng, depth, &mut counter)
}

fn random_pattern_go(rng: &mut StdRng, depth: usize, counter: &mut usize) -> Pattern {
    if depth == 0 || rng.gen_bool(0.4) {
        return if rng.gen_bool(0.5) {
            let p = Pattern::Var(format!("p{}", *counter));
            *counter += 1;
            p
        } else {
            Pattern::patom(ATOMS[rng.gen_range(0..ATOMS.len())])
        };
    }
    Pattern::ppair(
        random_pattern_go(rng, depth - 1, counter),
        random_pattern_go(rng, depth - 1, counter),
    )
}
