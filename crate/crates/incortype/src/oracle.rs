//! A bounded, brute-force realisation of the type semantics, used by the
//! test suites to cross-check the subtype decider and the classification
//! theorems on small instances.  Nothing in the checkers or the decider
//! depends on this module.
//!
//! Types are interpreted as sets of closed normal forms.  Arrows are only
//! testable in the shape `C -> Top` (membership is then "is an
//! abstraction"); anything else raises [`UntestableTypeError`] rather than
//! approximating.

use crate::reduction::{classify_nf, eval, is_stuck, is_value, EvalOutcome, NfClass};
use crate::syntax::{BinOp, Pattern, RelOp, Term};
use crate::types::Type;
use std::fmt;

/// Bounds for the normal-form enumeration.
///
/// `depth` limits the active structure: atoms, numerals and abstractions
/// have depth 1, and each compound layer adds one.  Inert second operands
/// (the `M` of a stuck `(S, M)`, `U + M` or `U M`) are drawn from the
/// depth-1 normal forms plus `div`, since their shape never affects
/// normality.
#[derive(Clone, Debug)]
pub struct NfUniverse {
    pub depth: usize,
    pub atoms: Vec<String>,
    pub numerals: Vec<i64>,
}

impl NfUniverse {
    pub fn new(depth: usize, atoms: &[&str], numerals: &[i64]) -> Self {
        NfUniverse {
            depth,
            atoms: atoms.iter().map(|s| s.to_string()).collect(),
            numerals: numerals.to_vec(),
        }
    }

    /// The universe pinned by the acceptance tests.
    pub fn default_universe() -> Self {
        NfUniverse::new(3, &["a", "b", "give"], &[0, 1])
    }

    /// Step budget used when the pair clause needs to evaluate an inert
    /// second component.
    pub fn fuel(&self) -> usize {
        1000
    }

    fn abs_bodies(&self) -> Vec<Term> {
        vec![
            Term::var("x"),
            Term::div(),
            Term::app(Term::num(2), Term::var("x")),
        ]
    }

    fn match_branch_pool(&self) -> Vec<Vec<(Pattern, Term)>> {
        vec![
            vec![(Pattern::patom("a"), Term::atom("a"))],
            vec![(
                Pattern::ppair(Pattern::pvar("x"), Pattern::pvar("y")),
                Term::var("x"),
            )],
            vec![
                (Pattern::patom("a"), Term::atom("a")),
                (
                    Pattern::ppair(Pattern::patom("b"), Pattern::pvar("x")),
                    Term::var("x"),
                ),
            ],
        ]
    }
}

/// Every closed normal form buildable within the bounds, values first at
/// each depth, in a fixed deterministic order.
pub fn enum_normal_forms(u: &NfUniverse) -> Vec<Term> {
    let mut values: Vec<Term> = Vec::new();
    let mut stuck: Vec<Term> = Vec::new();

    // depth 1
    for a in &u.atoms {
        values.push(Term::Atom(a.clone()));
    }
    for n in &u.numerals {
        values.push(Term::num(*n));
    }
    for body in u.abs_bodies() {
        values.push(Term::abs("x", body));
    }
    let depth1: Vec<Term> = values.clone();
    let mut inert: Vec<Term> = depth1.clone();
    inert.push(Term::div());

    let mut values_prev = values.clone();
    let mut stuck_prev: Vec<Term> = Vec::new();

    for _ in 2..=u.depth {
        let nf_prev: Vec<Term> = values_prev.iter().chain(stuck_prev.iter()).cloned().collect();
        let mut values_new: Vec<Term> = Vec::new();
        let mut stuck_new: Vec<Term> = Vec::new();

        // value pairs
        for v in &values_prev {
            for w in &values_prev {
                values_new.push(Term::pair(v.clone(), w.clone()));
            }
        }
        // stuck pairs
        for s in &stuck_prev {
            for m in &inert {
                stuck_new.push(Term::pair(s.clone(), m.clone()));
            }
        }
        for v in &values_prev {
            for s in &stuck_prev {
                stuck_new.push(Term::pair(v.clone(), s.clone()));
            }
        }
        // operations stuck on a non-numeral or stuck operand
        for nf in &nf_prev {
            if matches!(nf, Term::Num(_)) {
                continue;
            }
            for m in &inert {
                stuck_new.push(Term::binop(BinOp::Add, nf.clone(), m.clone()));
                stuck_new.push(Term::relop(RelOp::Eq, nf.clone(), m.clone()));
            }
            stuck_new.push(Term::binop(BinOp::Add, Term::num(0), nf.clone()));
            stuck_new.push(Term::relop(RelOp::Eq, Term::num(0), nf.clone()));
        }
        // applications of a non-abstraction
        for nf in &nf_prev {
            if matches!(nf, Term::Abs(_, _)) {
                continue;
            }
            for m in &inert {
                stuck_new.push(Term::app(nf.clone(), m.clone()));
            }
        }
        // stuck matches
        for nf in &nf_prev {
            for branches in u.match_branch_pool() {
                let candidate = Term::Match(Box::new(nf.clone()), branches);
                if is_stuck(&candidate) {
                    stuck_new.push(candidate);
                }
            }
        }

        values.extend(values_new.iter().cloned());
        stuck.extend(stuck_new.iter().cloned());
        values_prev = [values_prev, values_new].concat();
        stuck_prev = [stuck_prev, stuck_new].concat();
    }

    let mut out = values;
    out.extend(stuck);
    debug_assert!(out
        .iter()
        .all(|t| matches!(classify_nf(t), Ok(NfClass::Value) | Ok(NfClass::Stuck))));
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UntestableTypeError(pub Type);

impl fmt::Display for UntestableTypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type {:?} is outside the oracle-decidable fragment", self.0)
    }
}

/// Checks that membership in the type is decidable on enumerated normal
/// forms: arrows must have codomain `Top` after expansion.
pub fn is_testable(ty: &Type) -> bool {
    match ty {
        Type::Top | Type::Ok | Type::Atoms | Type::Int | Type::AtomLit(_) => true,
        Type::Pair(a, b) => is_testable(a) && is_testable(b),
        Type::Arrow(_, b) => matches!(b.canon(), Type::Top),
        Type::Union(ms) => ms.iter().all(is_testable),
        Type::Comp(a) => is_testable(a),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

/// Decides `u` in the meaning of `ty`, for `u` a closed normal form and
/// `ty` testable.
pub fn member_nf(u: &Term, ty: &Type, fuel: usize) -> Result<bool, UntestableTypeError> {
    let ty = ty.canon();
    if !is_testable(&ty) {
        return Err(UntestableTypeError(ty));
    }
    member_nf_go(u, &ty, fuel)
}

/// As [`member_nf`] but assumes the type is canonical and already validated
/// as testable; the harnesses call this in their inner loops.
pub fn member_nf_canonical(u: &Term, ty: &Type, fuel: usize) -> bool {
    member_nf_go(u, ty, fuel).expect("caller validated testability")
}

fn member_nf_go(u: &Term, ty: &Type, fuel: usize) -> Result<bool, UntestableTypeError> {
    Ok(match ty {
        Type::Top => true,
        Type::Ok => is_value(u),
        Type::Atoms => matches!(u, Term::Atom(_)),
        Type::Int => matches!(u, Term::Num(_)),
        Type::AtomLit(a) => matches!(u, Term::Atom(b) if b == a),
        Type::Arrow(_, _) => matches!(u, Term::Abs(_, _)),
        Type::Union(ms) => {
            for m in ms {
                if member_nf_go(u, m, fuel)? {
                    return Ok(true);
                }
            }
            false
        }
        Type::Comp(a) => !member_nf_go(u, a, fuel)?,
        Type::Pair(a, b) => match u {
            Term::Pair(x, y) => {
                if is_value(x) {
                    // left summand: both components are normal forms here
                    member_nf_go(x, a, fuel)? && member_nf_go(y, b, fuel)?
                } else {
                    // right summand: x stuck in A, y arbitrary in the term
                    // semantics of B
                    member_nf_go(x, a, fuel)?
                        && match member_term(y, b, fuel)? {
                            Tri::Yes => true,
                            Tri::No => false,
                            // no normal form reached: the conditional holds
                            // vacuously
                            Tri::Unknown => true,
                        }
                }
            }
            _ => false,
        },
    })
}

/// Term-level membership: evaluate, then consult the normal-form semantics.
pub fn member_term(m: &Term, ty: &Type, fuel: usize) -> Result<Tri, UntestableTypeError> {
    let ty = ty.canon();
    if !is_testable(&ty) {
        return Err(UntestableTypeError(ty));
    }
    match eval(m, fuel) {
        Err(_) => Ok(Tri::Unknown),
        Ok(EvalOutcome::Converged { value, .. }) => {
            Ok(if member_nf_go(&value, &ty, fuel)? { Tri::Yes } else { Tri::No })
        }
        Ok(EvalOutcome::WentWrong { stuck, .. }) => {
            Ok(if member_nf_go(&stuck, &ty, fuel)? { Tri::Yes } else { Tri::No })
        }
        Ok(EvalOutcome::FuelExhausted { .. }) => Ok(Tri::Unknown),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::alpha_eq;

    #[test]
    fn enum_small_universe() {
        let u = NfUniverse::new(1, &["a"], &[0]);
        let nfs = enum_normal_forms(&u);
        assert!(nfs.contains(&Term::atom("a")));
        assert!(nfs.contains(&Term::num(0)));
    }

    #[test]
    fn enum_depth2_has_stuck_pairs() {
        let u = NfUniverse::new(3, &["a"], &[0, 1]);
        let nfs = enum_normal_forms(&u);
        let target_shape = |t: &Term| match t {
            Term::Pair(l, _) => matches!(
                l.as_ref(),
                Term::App(f, _) if matches!(f.as_ref(), Term::Num(_))
            ),
            _ => false,
        };
        assert!(nfs.iter().any(target_shape));
        for t in &nfs {
            assert!(matches!(
                classify_nf(t).unwrap(),
                NfClass::Value | NfClass::Stuck
            ));
        }
    }

    #[test]
    fn member_examples() {
        assert!(member_nf(&Term::num(3), &Type::Int, 100).unwrap());
        assert!(member_nf(&Term::abs("x", Term::var("x")), &Type::fun_any(), 100).unwrap());

        // (1 (fun x -> x), div) : (~Ok, ~Int)
        let s = Term::pair(
            Term::app(Term::num(1), Term::abs("x", Term::var("x"))),
            Term::div(),
        );
        let ty = Type::pair(Type::comp(Type::Ok), Type::comp(Type::Int));
        assert!(member_nf(&s, &ty, 100).unwrap());

        // general arrows are untestable
        assert!(member_nf(&Term::num(0), &Type::arrow(Type::Int, Type::Int), 100).is_err());
    }

    #[test]
    fn member_term_examples() {
        let t = Term::app(Term::abs("x", Term::var("x")), Term::num(3));
        assert_eq!(member_term(&t, &Type::Int, 100).unwrap(), Tri::Yes);
        assert_eq!(
            member_term(&Term::div(), &Type::comp(Type::Top), 100).unwrap(),
            Tri::Unknown
        );
        let crash = Term::binop(BinOp::Add, Term::num(5), Term::atom("you"));
        assert_eq!(
            member_term(&crash, &Type::comp(Type::Ok), 100).unwrap(),
            Tri::Yes
        );
    }

    #[test]
    fn alpha_insensitive_value_check() {
        let v1 = Term::abs("x", Term::var("x"));
        let v2 = Term::abs("y", Term::var("y"));
        assert!(alpha_eq(&v1, &v2));
        assert!(member_nf(&v2, &Type::fun_any(), 10).unwrap());
    }
}
