//! Call-by-name small-step semantics.
//!
//! Pairs are strict left to right, matching is strict, and the right operand
//! of an arithmetic or relational operation only reduces once the left is a
//! numeral.  Closed normal forms split into values and stuck terms;
//! [`classify_nf`] decides the split directly from the grammars, without
//! probing [`step`].

use crate::syntax::{apply_subst, free_vars, Pattern, Term, TermSubstitution};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Stepped(Term),
    Value,
    /// The stuck-grammar production that matched.
    Stuck(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalOutcome {
    Converged { value: Term, steps: usize },
    WentWrong { stuck: Term, steps: usize },
    FuelExhausted { last: Term, steps: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReductionError {
    OpenTerm(Term),
    NotAValue(Term),
}

impl fmt::Display for ReductionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionError::OpenTerm(t) => write!(f, "term has free variables: {:?}", free_vars(t)),
            ReductionError::NotAValue(_) => write!(f, "pattern matching requires a value"),
        }
    }
}

/// Default step budget for evaluation.
pub const DEFAULT_FUEL: usize = 100_000;

pub fn is_value(t: &Term) -> bool {
    match t {
        Term::Atom(_) | Term::Num(_) | Term::Abs(_, _) => true,
        Term::Pair(a, b) => is_value(a) && is_value(b),
        _ => false,
    }
}

/// Stuckness per the explicit grammar; meaningful for closed terms.
pub fn is_stuck(t: &Term) -> bool {
    match t {
        Term::Pair(a, b) => is_stuck(a) || (is_value(a) && is_stuck(b)),
        Term::BinOp(_, a, b) | Term::RelOp(_, a, b) => {
            (is_normal_form(a) && !matches!(**a, Term::Num(_)))
                || (matches!(**a, Term::Num(_)) && is_normal_form(b) && !matches!(**b, Term::Num(_)))
        }
        Term::App(f, _) => is_normal_form(f) && !matches!(**f, Term::Abs(_, _)),
        Term::Match(s, branches) => {
            if is_stuck(s) {
                true
            } else if is_value(s) {
                branches.iter().all(|(p, _)| match_value(p, s).is_none())
            } else {
                false
            }
        }
        _ => false,
    }
}

fn is_normal_form(t: &Term) -> bool {
    is_value(t) || is_stuck(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NfClass {
    Value,
    Stuck,
    Reducible,
}

/// Classifies a closed term by the value and stuck grammars.
pub fn classify_nf(t: &Term) -> Result<NfClass, ReductionError> {
    if !t.is_closed() {
        return Err(ReductionError::OpenTerm(t.clone()));
    }
    Ok(if is_value(t) {
        NfClass::Value
    } else if is_stuck(t) {
        NfClass::Stuck
    } else {
        NfClass::Reducible
    })
}

fn match_value(p: &Pattern, v: &Term) -> Option<TermSubstitution> {
    match (p, v) {
        (Pattern::Var(x), _) => Some(TermSubstitution::single(x, v.clone())),
        (Pattern::Atom(a), Term::Atom(b)) if a == b => Some(TermSubstitution::new()),
        (Pattern::Pair(p1, p2), Term::Pair(v1, v2)) => {
            let s1 = match_value(p1, v1)?;
            let s2 = match_value(p2, v2)?;
            let mut out = s1;
            for (k, t) in s2.0 {
                out.0.insert(k, t);
            }
            Some(out)
        }
        _ => None,
    }
}

/// The unique substitution with `v = p sigma`, if any.  `v` must be a closed
/// value.
pub fn match_pattern(p: &Pattern, v: &Term) -> Result<Option<TermSubstitution>, ReductionError> {
    if !is_value(v) {
        return Err(ReductionError::NotAValue(v.clone()));
    }
    Ok(match_value(p, v))
}

/// One reduction step under the unique evaluation context.
pub fn step(t: &Term) -> Result<StepResult, ReductionError> {
    if !t.is_closed() {
        return Err(ReductionError::OpenTerm(t.clone()));
    }
    Ok(step_closed(t))
}

fn step_closed(t: &Term) -> StepResult {
    match t {
        Term::Var(_) => unreachable!("closed term"),
        Term::Atom(_) | Term::Num(_) | Term::Abs(_, _) => StepResult::Value,
        Term::Fix(x, body) => {
            let unrolled = apply_subst(body, &TermSubstitution::single(x, t.clone()));
            StepResult::Stepped(unrolled)
        }
        Term::Pair(a, b) => match step_closed(a) {
            StepResult::Stepped(a2) => StepResult::Stepped(Term::pair(a2, (**b).clone())),
            StepResult::Stuck(_) => StepResult::Stuck("pair: left component is stuck"),
            StepResult::Value => match step_closed(b) {
                StepResult::Stepped(b2) => StepResult::Stepped(Term::pair((**a).clone(), b2)),
                StepResult::Stuck(_) => StepResult::Stuck("pair: right component is stuck"),
                StepResult::Value => StepResult::Value,
            },
        },
        Term::App(f, arg) => match step_closed(f) {
            StepResult::Stepped(f2) => StepResult::Stepped(Term::app(f2, (**arg).clone())),
            StepResult::Stuck(_) => StepResult::Stuck("application: operator is stuck"),
            StepResult::Value => match f.as_ref() {
                Term::Abs(x, body) => StepResult::Stepped(apply_subst(
                    body,
                    &TermSubstitution::single(x, (**arg).clone()),
                )),
                _ => StepResult::Stuck("application: operator is not an abstraction"),
            },
        },
        Term::BinOp(op, a, b) => match step_closed(a) {
            StepResult::Stepped(a2) => {
                StepResult::Stepped(Term::binop(*op, a2, (**b).clone()))
            }
            StepResult::Stuck(_) => StepResult::Stuck("binop: left operand is stuck"),
            StepResult::Value => match a.as_ref() {
                Term::Num(n) => match step_closed(b) {
                    StepResult::Stepped(b2) => {
                        StepResult::Stepped(Term::binop(*op, (**a).clone(), b2))
                    }
                    StepResult::Stuck(_) => StepResult::Stuck("binop: right operand is stuck"),
                    StepResult::Value => match b.as_ref() {
                        Term::Num(m) => StepResult::Stepped(Term::Num(op.apply(n, m))),
                        _ => StepResult::Stuck("binop: right operand is a non-numeral value"),
                    },
                },
                _ => StepResult::Stuck("binop: left operand is a non-numeral value"),
            },
        },
        Term::RelOp(op, a, b) => match step_closed(a) {
            StepResult::Stepped(a2) => {
                StepResult::Stepped(Term::relop(*op, a2, (**b).clone()))
            }
            StepResult::Stuck(_) => StepResult::Stuck("relop: left operand is stuck"),
            StepResult::Value => match a.as_ref() {
                Term::Num(n) => match step_closed(b) {
                    StepResult::Stepped(b2) => {
                        StepResult::Stepped(Term::relop(*op, (**a).clone(), b2))
                    }
                    StepResult::Stuck(_) => StepResult::Stuck("relop: right operand is stuck"),
                    StepResult::Value => match b.as_ref() {
                        Term::Num(m) => {
                            let name = if op.apply(n, m) { "true" } else { "false" };
                            StepResult::Stepped(Term::atom(name))
                        }
                        _ => StepResult::Stuck("relop: right operand is a non-numeral value"),
                    },
                },
                _ => StepResult::Stuck("relop: left operand is a non-numeral value"),
            },
        },
        Term::Match(scrut, branches) => match step_closed(scrut) {
            StepResult::Stepped(s2) => {
                StepResult::Stepped(Term::Match(Box::new(s2), branches.clone()))
            }
            StepResult::Stuck(_) => StepResult::Stuck("match: scrutinee is stuck"),
            StepResult::Value => {
                for (p, n) in branches {
                    if let Some(sigma) = match_value(p, scrut) {
                        return StepResult::Stepped(apply_subst(n, &sigma));
                    }
                }
                StepResult::Stuck("match: no branch pattern matches the scrutinee")
            }
        },
    }
}

/// Iterates [`step`] at most `fuel` times.
pub fn eval(t: &Term, fuel: usize) -> Result<EvalOutcome, ReductionError> {
    if !t.is_closed() {
        return Err(ReductionError::OpenTerm(t.clone()));
    }
    let mut cur = t.clone();
    for steps in 0..=fuel {
        match step_closed(&cur) {
            StepResult::Value => return Ok(EvalOutcome::Converged { value: cur, steps }),
            StepResult::Stuck(_) => return Ok(EvalOutcome::WentWrong { stuck: cur, steps }),
            StepResult::Stepped(next) => {
                if steps == fuel {
                    break;
                }
                cur = next;
            }
        }
    }
    Ok(EvalOutcome::FuelExhausted {
        last: cur,
        steps: fuel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::BinOp;

    #[test]
    fn step_examples() {
        let beta = Term::app(Term::abs("x", Term::var("x")), Term::num(3));
        assert_eq!(step(&beta).unwrap(), StepResult::Stepped(Term::num(3)));

        let s = Term::binop(BinOp::Mul, Term::num(3), Term::abs("x", Term::var("x")));
        assert!(matches!(step(&s).unwrap(), StepResult::Stuck(_)));

        // (1 (fun x -> x), div) is stuck: pairs reduce left first
        let s = Term::pair(
            Term::app(Term::num(1), Term::abs("x", Term::var("x"))),
            Term::div(),
        );
        let mut cur = s;
        loop {
            match step(&cur).unwrap() {
                StepResult::Stepped(n) => cur = n,
                StepResult::Stuck(_) => break,
                StepResult::Value => panic!("should get stuck"),
            }
        }
    }

    #[test]
    fn open_terms_error() {
        assert!(step(&Term::var("x")).is_err());
        assert!(eval(&Term::app(Term::var("f"), Term::num(1)), 10).is_err());
        assert!(classify_nf(&Term::var("x")).is_err());
    }

    #[test]
    fn eval_power() {
        // power = fix f. fun x -> fun y -> if y = 0 then 1 else x * (f x (y - 1))
        let power = Term::fix(
            "f",
            Term::abs(
                "x",
                Term::abs(
                    "y",
                    Term::if_then_else(
                        Term::relop(crate::syntax::RelOp::Eq, Term::var("y"), Term::num(0)),
                        Term::num(1),
                        Term::binop(
                            BinOp::Mul,
                            Term::var("x"),
                            Term::app(
                                Term::app(Term::var("f"), Term::var("x")),
                                Term::binop(BinOp::Sub, Term::var("y"), Term::num(1)),
                            ),
                        ),
                    ),
                ),
            ),
        );
        let call = Term::app(Term::app(power, Term::num(2)), Term::num(3));
        match eval(&call, 10_000).unwrap() {
            EvalOutcome::Converged { value, .. } => assert_eq!(value, Term::num(8)),
            other => panic!("expected convergence, got {:?}", other),
        }
    }

    #[test]
    fn eval_divergence_and_wrong() {
        assert!(matches!(
            eval(&Term::div(), 50).unwrap(),
            EvalOutcome::FuelExhausted { .. }
        ));

        // let op = fun x -> fun y -> x + y in op 5 'you
        let h1 = Term::let_in(
            "op",
            Term::abs("x", Term::abs("y", Term::binop(BinOp::Add, Term::var("x"), Term::var("y")))),
            Term::app(Term::app(Term::var("op"), Term::num(5)), Term::atom("you")),
        );
        match eval(&h1, 10_000).unwrap() {
            EvalOutcome::WentWrong { stuck, .. } => {
                assert_eq!(stuck, Term::binop(BinOp::Add, Term::num(5), Term::atom("you")));
            }
            other => panic!("expected WentWrong, got {:?}", other),
        }
    }

    #[test]
    fn classify_examples() {
        let v = Term::abs("x", Term::app(Term::num(2), Term::var("x")));
        assert_eq!(classify_nf(&v).unwrap(), NfClass::Value);

        let s = Term::match_term(
            Term::pair(Term::atom("a"), Term::num(3)),
            vec![(
                Pattern::ppair(Pattern::patom("b"), Pattern::pvar("x")),
                Term::var("x"),
            )],
        );
        assert_eq!(classify_nf(&s).unwrap(), NfClass::Stuck);

        let r = Term::app(Term::abs("x", Term::var("x")), Term::num(1));
        assert_eq!(classify_nf(&r).unwrap(), NfClass::Reducible);
    }

    #[test]
    fn match_pattern_examples() {
        let p = Pattern::ppair(Pattern::pvar("x"), Pattern::pvar("y"));
        let v = Term::pair(Term::num(1), Term::num(2));
        let sigma = match_pattern(&p, &v).unwrap().unwrap();
        assert_eq!(sigma.get("x"), Some(&Term::num(1)));
        assert_eq!(sigma.get("y"), Some(&Term::num(2)));

        assert_eq!(match_pattern(&Pattern::patom("a"), &Term::atom("b")).unwrap(), None);

        let p = Pattern::ppair(
            Pattern::patom("give"),
            Pattern::ppair(Pattern::pvar("y"), Pattern::pvar("z")),
        );
        let v = Term::pair(Term::atom("give"), Term::pair(Term::num(5), Term::atom("you")));
        let sigma = match_pattern(&p, &v).unwrap().unwrap();
        assert_eq!(sigma.get("y"), Some(&Term::num(5)));
        assert_eq!(sigma.get("z"), Some(&Term::atom("you")));

        assert!(match_pattern(&p, &Term::app(Term::num(1), Term::num(2))).is_err());
    }
}
