//! The subtype relation.
//!
//! [`subtype`] decides `A <= B` by depth-first bottom-up search over the
//! alternative rule set, with a branch-local visited set for cycle avoidance
//! and a memo table for decided goals.  A negative result is memoised only
//! when its failure did not depend on a cycle cut, which keeps the memo
//! sound.  All goals reachable from a query stay inside the finite closed
//! universe returned by [`universe`], so the search terminates.
//!
//! [`check_legacy_subderivation`] validates explicit derivations in the
//! original axiomatisation (Refl/Top/Ok/Disj/Atom/PairC/Pair/Fun/UnionL/
//! UnionR/CompL/CompR/Trans).

use crate::types::Type;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// `B` in the side conditions: the four disjoint value classes.
fn value_classes() -> [Type; 4] {
    [Type::Int, Type::pair_val(), Type::fun_any(), Type::Atoms]
}

/// The classes mentioned by `Disj`: Int, Pair, Fun, Atoms.
fn disj_classes() -> [Type; 4] {
    [Type::Int, Type::pair_any(), Type::fun_any(), Type::Atoms]
}

/// `A >< B`: both distinct atom literals, or both drawn (after expansion)
/// from {Int, Pair, Fun, Atoms} and distinct.
pub fn disjoint(a: &Type, b: &Type) -> bool {
    let a = a.canon();
    let b = b.canon();
    if a == b {
        return false;
    }
    match (&a, &b) {
        (Type::AtomLit(_), Type::AtomLit(_)) => true,
        _ => {
            let classes = disj_classes();
            classes.contains(&a) && classes.contains(&b)
        }
    }
}

/// The closed search space for deciding `a <= b`: the subexpressions of both
/// inputs and of the fixed base types, plus all their complements.
pub fn universe(a: &Type, b: &Type) -> BTreeSet<Type> {
    let mut base: BTreeSet<Type> = BTreeSet::new();
    let add_subexps = |t: &Type, base: &mut BTreeSet<Type>| {
        for s in t.canon().subexpressions() {
            base.insert(s);
        }
    };
    add_subexps(a, &mut base);
    add_subexps(b, &mut base);
    for t in [
        Type::Top,
        Type::Int,
        Type::pair_any(),
        Type::pair_val(),
        Type::fun_any(),
        Type::Atoms,
        Type::Ok,
    ] {
        add_subexps(&t, &mut base);
    }
    let mut out = base.clone();
    for t in base {
        out.insert(Type::comp(t));
    }
    out
}

/// Decides the subtype relation.  Total and terminating on all inputs.
pub fn subtype(a: &Type, b: &Type) -> bool {
    Decider::new().subtype(a, b)
}

/// `A ~ B`: subtyping in both directions.
pub fn type_equiv(a: &Type, b: &Type) -> bool {
    let mut d = Decider::new();
    d.subtype(a, b) && d.subtype(b, a)
}

/// A subtype decider with a reusable memo table.  Queries are pure; keeping
/// one around amortises repeated goals across a checking run.
#[derive(Default)]
pub struct Decider {
    memo: HashMap<(Type, Type), bool>,
}

impl Decider {
    pub fn new() -> Self {
        Decider::default()
    }

    pub fn subtype(&mut self, a: &Type, b: &Type) -> bool {
        let goal = (a.canon(), b.canon());
        let mut path = Vec::new();
        self.solve(&goal, &mut path).0
    }

    /// Returns (result, depended_on_cycle_cut).  Results that did not depend
    /// on a cut are absolute and safe to memoise.
    fn solve(&mut self, goal: &(Type, Type), path: &mut Vec<(Type, Type)>) -> (bool, bool) {
        if let Some(&r) = self.memo.get(goal) {
            return (r, false);
        }
        if path.iter().any(|g| g == goal) {
            return (false, true);
        }
        path.push(goal.clone());
        let (res, dep) = self.try_rules(goal, path);
        path.pop();
        if res || !dep {
            self.memo.insert(goal.clone(), res);
        }
        (res, dep)
    }

    fn all(
        &mut self,
        goals: &[(Type, Type)],
        path: &mut Vec<(Type, Type)>,
    ) -> (bool, bool) {
        let mut dep = false;
        for g in goals {
            let (r, d) = self.solve(g, path);
            dep |= d;
            if !r {
                return (false, dep);
            }
        }
        (true, false)
    }

    fn try_rules(&mut self, goal: &(Type, Type), path: &mut Vec<(Type, Type)>) -> (bool, bool) {
        let (l, r) = goal;
        let mut dep = false;
        let mut attempt = |this: &mut Self, premises: &[(Type, Type)], dep: &mut bool| -> bool {
            let (ok, d) = this.all(premises, path);
            *dep |= d;
            ok
        };

        // Refl
        if l == r {
            return (true, false);
        }
        // Top
        if *r == Type::Top {
            return (true, false);
        }
        // CompLTop
        if *l == Type::bot() {
            return (true, false);
        }
        // Atom
        if matches!(l, Type::AtomLit(_)) && *r == Type::Atoms {
            return (true, false);
        }
        // CompRAtom1 / CompLAtoms
        if let Type::Comp(inner) = r {
            if let Type::AtomLit(ra) = inner.as_ref() {
                if let Type::AtomLit(la) = l {
                    if la != ra {
                        return (true, false);
                    }
                }
                if *l == Type::comp(Type::Atoms) {
                    return (true, false);
                }
            }
        }

        // Structural left rules.
        match l {
            Type::Pair(a1, a2) => {
                if let Type::Pair(b1, b2) = r {
                    // Pair
                    if attempt(
                        self,
                        &[
                            ((**a1).clone(), (**b1).clone()),
                            ((**a2).clone(), (**b2).clone()),
                        ],
                        &mut dep,
                    ) {
                        return (true, dep);
                    }
                }
                if let Type::Comp(inner) = r {
                    if let Type::Pair(c, d) = inner.as_ref() {
                        // CompRPairL
                        if attempt(
                            self,
                            &[((**a1).clone(), Type::comp((**c).clone()))],
                            &mut dep,
                        ) {
                            return (true, dep);
                        }
                        // CompRPairR
                        if attempt(
                            self,
                            &[
                                ((**a1).clone(), Type::Ok),
                                ((**a2).clone(), Type::comp((**d).clone())),
                            ],
                            &mut dep,
                        ) {
                            return (true, dep);
                        }
                    }
                }
            }
            Type::Arrow(a1, a2) => {
                if let Type::Arrow(b1, b2) = r {
                    // Fun
                    if attempt(
                        self,
                        &[
                            ((**b1).clone(), (**a1).clone()),
                            ((**a2).clone(), (**b2).clone()),
                        ],
                        &mut dep,
                    ) {
                        return (true, dep);
                    }
                }
            }
            Type::Union(ms) => {
                // UnionL
                let goals: Vec<_> = ms.iter().map(|m| (m.clone(), r.clone())).collect();
                if attempt(self, &goals, &mut dep) {
                    return (true, dep);
                }
            }
            Type::Comp(inner) => match inner.as_ref() {
                Type::Comp(a) => {
                    // CompLC
                    if attempt(self, &[((**a).clone(), r.clone())], &mut dep) {
                        return (true, dep);
                    }
                }
                Type::Union(ms) => {
                    // CompLUn: some member's complement suffices
                    for m in ms {
                        if attempt(self, &[(Type::comp(m.clone()), r.clone())], &mut dep) {
                            return (true, dep);
                        }
                    }
                }
                Type::Ok => {
                    // CompLOk
                    for c in value_classes() {
                        if attempt(self, &[(Type::comp(c), r.clone())], &mut dep) {
                            return (true, dep);
                        }
                    }
                }
                Type::Pair(a1, a2) => {
                    if let Type::Comp(rin) = r {
                        if let Type::Pair(b1, b2) = rin.as_ref() {
                            // CompLPair
                            if attempt(
                                self,
                                &[
                                    (Type::comp((**a1).clone()), Type::comp((**b1).clone())),
                                    (Type::comp((**a2).clone()), Type::comp((**b2).clone())),
                                ],
                                &mut dep,
                            ) {
                                return (true, dep);
                            }
                        }
                    }
                }
                Type::Arrow(a1, a2) => {
                    if let Type::Comp(rin) = r {
                        if let Type::Arrow(b1, b2) = rin.as_ref() {
                            // CompLArr
                            if attempt(
                                self,
                                &[
                                    (Type::comp((**b1).clone()), Type::comp((**a1).clone())),
                                    (Type::comp((**a2).clone()), Type::comp((**b2).clone())),
                                ],
                                &mut dep,
                            ) {
                                return (true, dep);
                            }
                        }
                    }
                }
                _ => {}
            },
            _ => {}
        }

        // Right rules with arbitrary left-hand sides.
        match r {
            Type::Ok => {
                // OkR
                for c in value_classes() {
                    if attempt(self, &[(l.clone(), c)], &mut dep) {
                        return (true, dep);
                    }
                }
            }
            Type::Union(ms) => {
                // UnionR
                for m in ms {
                    if attempt(self, &[(l.clone(), m.clone())], &mut dep) {
                        return (true, dep);
                    }
                }
            }
            Type::Comp(inner) => match inner.as_ref() {
                Type::Comp(b) => {
                    // CompRC
                    if attempt(self, &[(l.clone(), (**b).clone())], &mut dep) {
                        return (true, dep);
                    }
                }
                Type::Union(ms) => {
                    // CompRUn
                    let goals: Vec<_> = ms
                        .iter()
                        .map(|m| (l.clone(), Type::comp(m.clone())))
                        .collect();
                    if attempt(self, &goals, &mut dep) {
                        return (true, dep);
                    }
                }
                Type::AtomLit(_) => {
                    // CompRAtom2
                    for c in [Type::Int, Type::pair_any(), Type::fun_any()] {
                        if attempt(self, &[(l.clone(), c)], &mut dep) {
                            return (true, dep);
                        }
                    }
                }
                Type::Int => {
                    // CompRInt
                    for c in [Type::pair_any(), Type::fun_any(), Type::Atoms] {
                        if attempt(self, &[(l.clone(), c)], &mut dep) {
                            return (true, dep);
                        }
                    }
                }
                Type::Pair(_, _) => {
                    // CompRPair
                    for c in [Type::Int, Type::fun_any(), Type::Atoms] {
                        if attempt(self, &[(l.clone(), c)], &mut dep) {
                            return (true, dep);
                        }
                    }
                }
                Type::Arrow(_, _) => {
                    // CompRArr
                    for c in [Type::Int, Type::pair_any(), Type::Atoms] {
                        if attempt(self, &[(l.clone(), c)], &mut dep) {
                            return (true, dep);
                        }
                    }
                }
                Type::Atoms => {
                    // CompRAtoms
                    for c in [Type::Int, Type::pair_any(), Type::fun_any()] {
                        if attempt(self, &[(l.clone(), c)], &mut dep) {
                            return (true, dep);
                        }
                    }
                }
                _ => {}
            },
            _ => {}
        }

        (false, dep)
    }
}

// -------------------------------------------------------------------------
// Legacy derivations (the original axiomatisation).

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LegacyRule {
    Refl,
    Top,
    Ok,
    Disj,
    Atom,
    PairC,
    Pair,
    Fun,
    UnionL,
    UnionR,
    CompL,
    CompR,
    Trans,
}

impl LegacyRule {
    pub fn name(self) -> &'static str {
        match self {
            LegacyRule::Refl => "Refl",
            LegacyRule::Top => "Top",
            LegacyRule::Ok => "Ok",
            LegacyRule::Disj => "Disj",
            LegacyRule::Atom => "Atom",
            LegacyRule::PairC => "PairC",
            LegacyRule::Pair => "Pair",
            LegacyRule::Fun => "Fun",
            LegacyRule::UnionL => "UnionL",
            LegacyRule::UnionR => "UnionR",
            LegacyRule::CompL => "CompL",
            LegacyRule::CompR => "CompR",
            LegacyRule::Trans => "Trans",
        }
    }

    pub fn from_name(s: &str) -> Option<LegacyRule> {
        Some(match s {
            "Refl" => LegacyRule::Refl,
            "Top" => LegacyRule::Top,
            "Ok" => LegacyRule::Ok,
            "Disj" => LegacyRule::Disj,
            "Atom" => LegacyRule::Atom,
            "PairC" => LegacyRule::PairC,
            "Pair" => LegacyRule::Pair,
            "Fun" => LegacyRule::Fun,
            "UnionL" => LegacyRule::UnionL,
            "UnionR" => LegacyRule::UnionR,
            "CompL" => LegacyRule::CompL,
            "CompR" => LegacyRule::CompR,
            "Trans" => LegacyRule::Trans,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubGoal {
    pub lhs: Type,
    pub rhs: Type,
}

impl SubGoal {
    pub fn new(lhs: Type, rhs: Type) -> SubGoal {
        SubGoal {
            lhs: lhs.canon(),
            rhs: rhs.canon(),
        }
    }
}

/// Witnesses for the rules that need them: the midpoint for `Trans`, the
/// chosen member index for `UnionR`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LegacyWitness {
    pub via: Option<Type>,
    pub index: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SubDerivation {
    pub rule: LegacyRule,
    pub conclusion: SubGoal,
    pub witness: LegacyWitness,
    pub premises: Vec<SubDerivation>,
}

#[derive(Clone, Debug)]
pub struct MalformedDerivationError {
    pub path: Vec<usize>,
    pub rule: LegacyRule,
    pub reason: String,
}

impl fmt::Display for MalformedDerivationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node {:?} ({}): {}",
            self.path,
            self.rule.name(),
            self.reason
        )
    }
}

/// The premise goals a legacy rule instance demands, validating the
/// conclusion's shape on the way.  Shared by the checker and the script
/// resolver.
pub fn legacy_premise_goals(
    rule: LegacyRule,
    conclusion: &SubGoal,
    witness: &LegacyWitness,
) -> Result<Vec<SubGoal>, String> {
    let lhs = conclusion.lhs.canon();
    let rhs = conclusion.rhs.canon();
    match rule {
        LegacyRule::Refl => {
            if lhs != rhs {
                return Err("Refl requires both sides equal".into());
            }
            Ok(vec![])
        }
        LegacyRule::Top => {
            if rhs != Type::Top {
                return Err("Top concludes A <= Top".into());
            }
            Ok(vec![])
        }
        LegacyRule::Ok => {
            let want = Type::union(vec![
                Type::Int,
                Type::pair_val(),
                Type::fun_any(),
                Type::Atoms,
            ])
            .canon();
            if lhs != want || rhs != Type::Ok {
                return Err("Ok concludes Int \\/ PairVal \\/ Fun \\/ Atoms <= Ok".into());
            }
            Ok(vec![])
        }
        LegacyRule::Disj => match &rhs {
            Type::Comp(b) => {
                if !disjoint(&lhs, b) {
                    return Err("Disj requires the sides disjoint".into());
                }
                Ok(vec![])
            }
            _ => Err("Disj concludes A <= ~B".into()),
        },
        LegacyRule::Atom => {
            if !matches!(lhs, Type::AtomLit(_)) || rhs != Type::Atoms {
                return Err("Atom concludes 'a <= Atoms".into());
            }
            Ok(vec![])
        }
        LegacyRule::PairC => {
            // (~A, Top) \/ (Ok, ~B) <= ~(A, B), matched modulo canonical order
            let (a, b) = match &rhs {
                Type::Comp(inner) => match inner.as_ref() {
                    Type::Pair(a, b) => ((**a).clone(), (**b).clone()),
                    _ => return Err("PairC concludes ... <= ~(A, B)".into()),
                },
                _ => return Err("PairC concludes ... <= ~(A, B)".into()),
            };
            let want = Type::union(vec![
                Type::pair(Type::comp(a), Type::Top),
                Type::pair(Type::Ok, Type::comp(b)),
            ])
            .canon();
            if lhs != want {
                return Err("PairC left side is (~A, Top) \\/ (Ok, ~B)".into());
            }
            Ok(vec![])
        }
        LegacyRule::Pair => match (&lhs, &rhs) {
            (Type::Pair(a, b), Type::Pair(a2, b2)) => Ok(vec![
                SubGoal::new((**a).clone(), (**a2).clone()),
                SubGoal::new((**b).clone(), (**b2).clone()),
            ]),
            _ => Err("Pair concludes (A,B) <= (A',B')".into()),
        },
        LegacyRule::Fun => match (&lhs, &rhs) {
            (Type::Arrow(a, b), Type::Arrow(a2, b2)) => Ok(vec![
                SubGoal::new((**a2).clone(), (**a).clone()),
                SubGoal::new((**b).clone(), (**b2).clone()),
            ]),
            _ => Err("Fun concludes A -> B <= A' -> B'".into()),
        },
        LegacyRule::UnionL => match &lhs {
            Type::Union(ms) => Ok(ms
                .iter()
                .map(|m| SubGoal::new(m.clone(), rhs.clone()))
                .collect()),
            _ => Err("UnionL requires a union on the left".into()),
        },
        LegacyRule::UnionR => match &rhs {
            Type::Union(ms) => {
                let j = witness.index.ok_or("UnionR needs a member index")?;
                if j >= ms.len() {
                    return Err("UnionR index out of range".into());
                }
                Ok(vec![SubGoal::new(lhs.clone(), ms[j].clone())])
            }
            _ => Err("UnionR requires a union on the right".into()),
        },
        LegacyRule::CompL => match &lhs {
            Type::Comp(a) => Ok(vec![SubGoal::new(Type::comp(rhs.clone()), (**a).clone())]),
            _ => Err("CompL concludes ~A <= B".into()),
        },
        LegacyRule::CompR => match &rhs {
            Type::Comp(b) => Ok(vec![SubGoal::new((**b).clone(), Type::comp(lhs.clone()))]),
            _ => Err("CompR concludes A <= ~B".into()),
        },
        LegacyRule::Trans => {
            let mid = witness
                .via
                .as_ref()
                .ok_or("Trans needs a midpoint witness")?
                .canon();
            Ok(vec![
                SubGoal::new(lhs.clone(), mid.clone()),
                SubGoal::new(mid, rhs.clone()),
            ])
        }
    }
}

/// Checks that every node is a syntactically valid instance of its named
/// rule from the original axiomatisation.
pub fn check_legacy_subderivation(d: &SubDerivation) -> Result<(), MalformedDerivationError> {
    let mut path = Vec::new();
    check_legacy_node(d, &mut path)
}

fn check_legacy_node(
    d: &SubDerivation,
    path: &mut Vec<usize>,
) -> Result<(), MalformedDerivationError> {
    let fail = |path: &[usize], reason: String| MalformedDerivationError {
        path: path.to_vec(),
        rule: d.rule,
        reason,
    };
    let goals = legacy_premise_goals(d.rule, &d.conclusion, &d.witness)
        .map_err(|r| fail(path, r))?;
    if goals.len() != d.premises.len() {
        return Err(fail(
            path,
            format!("expected {} premises, found {}", goals.len(), d.premises.len()),
        ));
    }
    for (i, (want, sub)) in goals.iter().zip(d.premises.iter()).enumerate() {
        let got = SubGoal::new(sub.conclusion.lhs.clone(), sub.conclusion.rhs.clone());
        if got != *want {
            return Err(fail(
                path,
                format!("premise {} concludes {:?}, expected {:?}", i, got, want),
            ));
        }
        path.push(i);
        check_legacy_node(sub, path)?;
        path.pop();
    }
    Ok(())
}
