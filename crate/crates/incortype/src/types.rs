//! The type language and its abbreviations.
//!
//! Abbreviations (`Bot`, `Pair`, `PairVal`, `Fun`, `Bool`, `onlyto`, `coto`,
//! `meet`) expand immediately; checkers and the subtype decider only ever see
//! core types.  Types are kept in a canonical form in which union members are
//! sorted by a fixed total order, so sequents-as-sets compare and hash
//! deterministically.

use crate::syntax::{Ident, Pattern};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Top,
    Ok,
    Atoms,
    Int,
    AtomLit(Ident),
    Pair(Box<Type>, Box<Type>),
    Arrow(Box<Type>, Box<Type>),
    Union(Vec<Type>),
    Comp(Box<Type>),
}

impl Type {
    pub fn atom(name: &str) -> Type {
        Type::AtomLit(name.to_string())
    }

    pub fn pair(a: Type, b: Type) -> Type {
        Type::Pair(Box::new(a), Box::new(b))
    }

    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn union(members: Vec<Type>) -> Type {
        assert!(!members.is_empty(), "unions have at least one member");
        Type::Union(members)
    }

    pub fn comp(a: Type) -> Type {
        Type::Comp(Box::new(a))
    }

    /// `Bot = ~Top`
    pub fn bot() -> Type {
        Type::comp(Type::Top)
    }

    /// `Pair = (Top, Top)`, all normal forms built with pairing.
    pub fn pair_any() -> Type {
        Type::pair(Type::Top, Type::Top)
    }

    /// `PairVal = (Ok, Ok)`, all pair values.
    pub fn pair_val() -> Type {
        Type::pair(Type::Ok, Type::Ok)
    }

    /// `Fun = Bot -> Top`, all functions.
    pub fn fun_any() -> Type {
        Type::arrow(Type::bot(), Type::Top)
    }

    /// `Bool = 'true \/ 'false`.
    pub fn bool_ty() -> Type {
        Type::union(vec![Type::atom("true"), Type::atom("false")]).canon()
    }

    /// `A onlyto B = ~A -> ~B`.
    pub fn onlyto(a: Type, b: Type) -> Type {
        Type::arrow(Type::comp(a), Type::comp(b))
    }

    /// `A coto B = ~(A onlyto B)`.
    pub fn coto(a: Type, b: Type) -> Type {
        Type::comp(Type::onlyto(a, b))
    }

    /// `meet([A1..Ak]) = ~(~A1 \/ .. \/ ~Ak)`.
    pub fn meet(members: Vec<Type>) -> Type {
        assert!(!members.is_empty());
        Type::comp(Type::union(members.into_iter().map(Type::comp).collect()))
    }

    /// Canonical form: unions sorted recursively by the derived total order,
    /// with one-member unions collapsed to their member.
    pub fn canon(&self) -> Type {
        match self {
            Type::Top | Type::Ok | Type::Atoms | Type::Int | Type::AtomLit(_) => self.clone(),
            Type::Pair(a, b) => Type::pair(a.canon(), b.canon()),
            Type::Arrow(a, b) => Type::arrow(a.canon(), b.canon()),
            Type::Comp(a) => Type::comp(a.canon()),
            Type::Union(ms) => {
                let mut ms: Vec<Type> = ms.iter().map(|m| m.canon()).collect();
                if ms.len() == 1 {
                    return ms.pop().unwrap();
                }
                ms.sort();
                Type::Union(ms)
            }
        }
    }

    /// All subexpressions, including the type itself.
    pub fn subexpressions(&self) -> Vec<Type> {
        let mut out = Vec::new();
        fn go(t: &Type, out: &mut Vec<Type>) {
            out.push(t.clone());
            match t {
                Type::Top | Type::Ok | Type::Atoms | Type::Int | Type::AtomLit(_) => {}
                Type::Pair(a, b) | Type::Arrow(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Type::Comp(a) => go(a, out),
                Type::Union(ms) => {
                    for m in ms {
                        go(m, out);
                    }
                }
            }
        }
        go(self, &mut out);
        out
    }

    pub fn size(&self) -> usize {
        match self {
            Type::Top | Type::Ok | Type::Atoms | Type::Int | Type::AtomLit(_) => 1,
            Type::Pair(a, b) | Type::Arrow(a, b) => 1 + a.size() + b.size(),
            Type::Comp(a) => 1 + a.size(),
            Type::Union(ms) => 1 + ms.iter().map(Type::size).sum::<usize>(),
        }
    }
}

/// A finite map from term variables to types, as used by the `Match` rule.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PatternTypeSubstitution(pub BTreeMap<Ident, Type>);

impl PatternTypeSubstitution {
    pub fn new() -> Self {
        PatternTypeSubstitution(BTreeMap::new())
    }

    pub fn single(x: &str, t: Type) -> Self {
        let mut m = BTreeMap::new();
        m.insert(x.to_string(), t);
        PatternTypeSubstitution(m)
    }

    pub fn insert(&mut self, x: &str, t: Type) {
        self.0.insert(x.to_string(), t);
    }

    pub fn get(&self, x: &str) -> Option<&Type> {
        self.0.get(x)
    }

    pub fn domain(&self) -> std::collections::BTreeSet<Ident> {
        self.0.keys().cloned().collect()
    }

    pub fn canon(&self) -> Self {
        PatternTypeSubstitution(self.0.iter().map(|(k, v)| (k.clone(), v.canon())).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainMismatchError {
    pub expected: std::collections::BTreeSet<Ident>,
    pub got: std::collections::BTreeSet<Ident>,
}

impl fmt::Display for DomainMismatchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "substitution domain {:?} does not match pattern variables {:?}",
            self.got, self.expected
        )
    }
}

/// The type `p theta`: variables map through `theta`, atoms become atom
/// literals, pairs become pair types.  Requires `dom(theta) = fv(p)`.
pub fn instantiate_pattern(
    p: &Pattern,
    theta: &PatternTypeSubstitution,
) -> Result<Type, DomainMismatchError> {
    let expected = p.var_set();
    let got = theta.domain();
    if expected != got {
        return Err(DomainMismatchError { expected, got });
    }
    Ok(instantiate_unchecked(p, theta).canon())
}

fn instantiate_unchecked(p: &Pattern, theta: &PatternTypeSubstitution) -> Type {
    match p {
        Pattern::Var(x) => theta.get(x).expect("domain checked").clone(),
        Pattern::Atom(a) => Type::AtomLit(a.clone()),
        Pattern::Pair(a, b) => Type::pair(
            instantiate_unchecked(a, theta),
            instantiate_unchecked(b, theta),
        ),
    }
}

/// `[Ok / x | x in fv(p)]`.
pub fn theta_ok(p: &Pattern) -> PatternTypeSubstitution {
    let mut out = PatternTypeSubstitution::new();
    for x in p.vars() {
        out.insert(&x, Type::Ok);
    }
    out
}

/// The type `p theta_ok(p)`, total because the domain always matches.
pub fn pattern_ok_type(p: &Pattern) -> Type {
    instantiate_pattern(p, &theta_ok(p)).expect("theta_ok covers fv(p)")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abbreviations_expand() {
        assert_eq!(Type::fun_any(), Type::arrow(Type::comp(Type::Top), Type::Top));
        assert_eq!(
            Type::onlyto(Type::Int, Type::Ok),
            Type::arrow(Type::comp(Type::Int), Type::comp(Type::Ok))
        );
        // meet([A]) unfolds to ~(~A)... wrapped in the union
        assert_eq!(
            Type::meet(vec![Type::Int]),
            Type::comp(Type::union(vec![Type::comp(Type::Int)]))
        );
        assert_eq!(
            Type::coto(Type::Int, Type::Ok),
            Type::comp(Type::onlyto(Type::Int, Type::Ok))
        );
    }

    #[test]
    fn instantiate_examples() {
        let p = Pattern::ppair(Pattern::pvar("x"), Pattern::pvar("y"));
        let mut theta = PatternTypeSubstitution::new();
        theta.insert("x", Type::arrow(Type::Int, Type::Int));
        theta.insert("y", Type::Int);
        assert_eq!(
            instantiate_pattern(&p, &theta).unwrap(),
            Type::pair(Type::arrow(Type::Int, Type::Int), Type::Int)
        );

        assert_eq!(
            instantiate_pattern(&Pattern::patom("give"), &PatternTypeSubstitution::new()).unwrap(),
            Type::atom("give")
        );

        let p = Pattern::ppair(
            Pattern::patom("give"),
            Pattern::ppair(Pattern::pvar("y"), Pattern::pvar("z")),
        );
        let mut theta = PatternTypeSubstitution::new();
        theta.insert("y", Type::Ok);
        theta.insert("z", Type::Ok);
        assert_eq!(
            instantiate_pattern(&p, &theta).unwrap(),
            Type::pair(Type::atom("give"), Type::pair(Type::Ok, Type::Ok))
        );

        // domain mismatch
        let bad = PatternTypeSubstitution::single("w", Type::Int);
        assert!(instantiate_pattern(&p, &bad).is_err());
    }

    #[test]
    fn theta_ok_examples() {
        assert_eq!(
            theta_ok(&Pattern::pvar("x")),
            PatternTypeSubstitution::single("x", Type::Ok)
        );
        assert!(theta_ok(&Pattern::patom("a")).0.is_empty());
        let p = Pattern::ppair(Pattern::pvar("y"), Pattern::pvar("z"));
        let t = theta_ok(&p);
        assert_eq!(t.get("y"), Some(&Type::Ok));
        assert_eq!(t.get("z"), Some(&Type::Ok));
    }

    #[test]
    fn canon_sorts_unions_and_is_idempotent() {
        let u = Type::union(vec![Type::pair_val(), Type::Int, Type::atom("b"), Type::atom("a")]);
        let c = u.canon();
        assert_eq!(c, c.canon());
        if let Type::Union(ms) = &c {
            let mut sorted = ms.clone();
            sorted.sort();
            assert_eq!(*ms, sorted);
        } else {
            panic!("canon of a union is a union");
        }
    }
}
