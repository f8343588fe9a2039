//! The two-sided sequent system: derivation checker, elaboration of derived
//! rules into primitives, the constructive normal-form classifier, and the
//! dynamic soundness probe.
//!
//! Derivation nodes carry the rule name, the principal formula, and any
//! rule-specific witnesses; premise sequents are recomputed from the
//! conclusion on every walk, so a script only states the root sequent.

use crate::reduction::{classify_nf, eval, EvalOutcome, NfClass};
use crate::subtyping::Decider;
use crate::syntax::{free_vars, patterns_disjoint, Ident, Pattern, Term};
use crate::types::{
    instantiate_pattern, pattern_ok_type, PatternTypeSubstitution, Type,
};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypingFormula {
    pub subject: Term,
    pub ty: Type,
}

pub fn formula(subject: Term, ty: Type) -> TypingFormula {
    TypingFormula {
        subject,
        ty: ty.canon(),
    }
}

/// A pair of finite sets of typing formulas.  Duplicates collapse and
/// equality is order-independent.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Sequent {
    pub left: BTreeSet<TypingFormula>,
    pub right: BTreeSet<TypingFormula>,
}

impl Sequent {
    pub fn new(left: Vec<TypingFormula>, right: Vec<TypingFormula>) -> Sequent {
        Sequent {
            left: left.into_iter().collect(),
            right: right.into_iter().collect(),
        }
    }

    pub fn entails(right: Vec<TypingFormula>) -> Sequent {
        Sequent::new(vec![], right)
    }

    pub fn refutes(left: Vec<TypingFormula>) -> Sequent {
        Sequent::new(left, vec![])
    }

    fn with_left(&self, f: TypingFormula) -> Sequent {
        let mut s = self.clone();
        s.left.insert(f);
        s
    }

    fn with_right(&self, f: TypingFormula) -> Sequent {
        let mut s = self.clone();
        s.right.insert(f);
        s
    }

    fn without_left(&self, f: &TypingFormula) -> Sequent {
        let mut s = self.clone();
        s.left.remove(f);
        s
    }

    fn without_right(&self, f: &TypingFormula) -> Sequent {
        let mut s = self.clone();
        s.right.remove(f);
        s
    }

    pub fn free_vars(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        for f in self.left.iter().chain(self.right.iter()) {
            out.extend(free_vars(&f.subject));
        }
        out
    }
}

fn fv_of(formulas: &BTreeSet<TypingFormula>) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    for f in formulas {
        out.extend(free_vars(&f.subject));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleName {
    // primitive two-sided rules
    Var,
    Top,
    Num,
    Atom,
    SubL,
    SubR,
    CompL,
    CompR,
    BinOp,
    RelOp,
    Fix,
    Pair,
    Abs,
    App,
    Match,
    OpE,
    RelOpE,
    AppE,
    MatchE,
    PairE,
    // derived rules, accepted only pre-elaboration
    WeakL,
    WeakR,
    Prj1,
    Prj2,
    PrjE1,
    PrjE2,
    If,
    IfE,
    Match0,
    BotL,
    NumL,
    FunL,
    AtomL,
    PairL1,
    PairLL,
    PairRL,
    PrjL1,
    PrjL2,
    AppL,
    FixL,
    MatchL,
    IfL,
    SwapL,
    SwapR,
    Let,
    LetL,
    CoAbs,
    CoApp,
    AbsL,
}

impl RuleName {
    pub fn is_primitive(self) -> bool {
        use RuleName::*;
        matches!(
            self,
            Var | Top
                | Num
                | Atom
                | SubL
                | SubR
                | CompL
                | CompR
                | BinOp
                | RelOp
                | Fix
                | Pair
                | Abs
                | App
                | Match
                | OpE
                | RelOpE
                | AppE
                | MatchE
                | PairE
        )
    }

    pub fn name(self) -> &'static str {
        use RuleName::*;
        match self {
            Var => "Var",
            Top => "Top",
            Num => "Num",
            Atom => "Atom",
            SubL => "SubL",
            SubR => "SubR",
            CompL => "CompL",
            CompR => "CompR",
            BinOp => "BinOp",
            RelOp => "RelOp",
            Fix => "Fix",
            Pair => "Pair",
            Abs => "Abs",
            App => "App",
            Match => "Match",
            OpE => "OpE",
            RelOpE => "RelOpE",
            AppE => "AppE",
            MatchE => "MatchE",
            PairE => "PairE",
            WeakL => "WeakL",
            WeakR => "WeakR",
            Prj1 => "Prj1",
            Prj2 => "Prj2",
            PrjE1 => "PrjE1",
            PrjE2 => "PrjE2",
            If => "If",
            IfE => "IfE",
            Match0 => "Match0",
            BotL => "BotL",
            NumL => "NumL",
            FunL => "FunL",
            AtomL => "AtomL",
            PairL1 => "PairL1",
            PairLL => "PairLL",
            PairRL => "PairRL",
            PrjL1 => "PrjL1",
            PrjL2 => "PrjL2",
            AppL => "AppL",
            FixL => "FixL",
            MatchL => "MatchL",
            IfL => "IfL",
            SwapL => "SwapL",
            SwapR => "SwapR",
            Let => "Let",
            LetL => "LetL",
            CoAbs => "CoAbs",
            CoApp => "CoApp",
            AbsL => "AbsL",
        }
    }

    pub fn from_name(s: &str) -> Option<RuleName> {
        use RuleName::*;
        Some(match s {
            "Var" => Var,
            "Top" => Top,
            "Num" => Num,
            "Atom" => Atom,
            "SubL" => SubL,
            "SubR" => SubR,
            "CompL" => CompL,
            "CompR" => CompR,
            "BinOp" => BinOp,
            "RelOp" => RelOp,
            "Fix" => Fix,
            "Pair" => Pair,
            "Abs" => Abs,
            "App" => App,
            "Match" => Match,
            "OpE" => OpE,
            "RelOpE" => RelOpE,
            "AppE" => AppE,
            "MatchE" => MatchE,
            "PairE" => PairE,
            "WeakL" => WeakL,
            "WeakR" => WeakR,
            "Prj1" => Prj1,
            "Prj2" => Prj2,
            "PrjE1" => PrjE1,
            "PrjE2" => PrjE2,
            "If" => If,
            "IfE" => IfE,
            "Match0" => Match0,
            "BotL" => BotL,
            "NumL" => NumL,
            "FunL" => FunL,
            "AtomL" => AtomL,
            "PairL1" => PairL1,
            "PairLL" => PairLL,
            "PairRL" => PairRL,
            "PrjL1" => PrjL1,
            "PrjL2" => PrjL2,
            "AppL" => AppL,
            "FixL" => FixL,
            "MatchL" => MatchL,
            "IfL" => IfL,
            "SwapL" => SwapL,
            "SwapR" => SwapR,
            "Let" => Let,
            "LetL" => LetL,
            "CoAbs" => CoAbs,
            "CoApp" => CoApp,
            "AbsL" => AbsL,
            _ => return None,
        })
    }
}

/// Rule-specific payload.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witnesses {
    /// Intermediate type for Sub rules, argument type for App-like rules,
    /// the bound variable's type for Let/LetL.
    pub via: Option<Type>,
    /// The other pair component for the projection rules.
    pub other: Option<Type>,
    /// One pattern type substitution per branch for the match rules.
    pub thetas: Vec<PatternTypeSubstitution>,
    /// The added formula for the weakening rules.
    pub formula: Option<TypingFormula>,
}

impl Witnesses {
    pub fn none() -> Witnesses {
        Witnesses::default()
    }

    pub fn via(t: Type) -> Witnesses {
        Witnesses {
            via: Some(t.canon()),
            ..Witnesses::default()
        }
    }

    pub fn other(t: Type) -> Witnesses {
        Witnesses {
            other: Some(t.canon()),
            ..Witnesses::default()
        }
    }

    pub fn thetas(ts: Vec<PatternTypeSubstitution>) -> Witnesses {
        Witnesses {
            thetas: ts.into_iter().map(|t| t.canon()).collect(),
            ..Witnesses::default()
        }
    }

    pub fn formula(f: TypingFormula) -> Witnesses {
        Witnesses {
            formula: Some(f),
            ..Witnesses::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: RuleName,
    pub principal: Option<TypingFormula>,
    pub witnesses: Witnesses,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn node(
        rule: RuleName,
        principal: TypingFormula,
        witnesses: Witnesses,
        premises: Vec<Derivation>,
    ) -> Derivation {
        Derivation {
            rule,
            principal: Some(principal),
            witnesses,
            premises,
        }
    }

    pub fn count_nodes(&self) -> usize {
        1 + self.premises.iter().map(Derivation::count_nodes).sum::<usize>()
    }

    pub fn uses_only_primitive_rules(&self) -> bool {
        self.rule.is_primitive() && self.premises.iter().all(Derivation::uses_only_primitive_rules)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckFailure {
    pub path: Vec<usize>,
    pub rule: String,
    pub reason: String,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {:?} ({}): {}", self.path, self.rule, self.reason)
    }
}

/// Outcome of checking a derivation against its root sequent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckReport {
    Accepted,
    Rejected(CheckFailure),
}

impl CheckReport {
    pub fn is_accepted(&self) -> bool {
        matches!(self, CheckReport::Accepted)
    }
}

#[derive(Clone, Debug)]
pub struct ElaborationError {
    pub rule: String,
    pub reason: String,
}

impl fmt::Display for ElaborationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot elaborate {}: {}", self.rule, self.reason)
    }
}

fn elab_err(rule: RuleName, reason: impl Into<String>) -> ElaborationError {
    ElaborationError {
        rule: rule.name().to_string(),
        reason: reason.into(),
    }
}

// -------------------------------------------------------------------------
// Premise computation (structural, shared by check and elaborate).

struct NodeErr(String);

fn need_principal(d: &Derivation) -> Result<&TypingFormula, NodeErr> {
    d.principal
        .as_ref()
        .ok_or_else(|| NodeErr("missing principal formula".into()))
}

fn need_via(d: &Derivation) -> Result<&Type, NodeErr> {
    d.witnesses
        .via
        .as_ref()
        .ok_or_else(|| NodeErr("missing :via witness".into()))
}

fn in_left(c: &Sequent, f: &TypingFormula) -> Result<(), NodeErr> {
    if c.left.contains(f) {
        Ok(())
    } else {
        Err(NodeErr("principal formula not in the left context".into()))
    }
}

fn in_right(c: &Sequent, f: &TypingFormula) -> Result<(), NodeErr> {
    if c.right.contains(f) {
        Ok(())
    } else {
        Err(NodeErr("principal formula not in the right context".into()))
    }
}

fn as_comp(t: &Type) -> Result<Type, NodeErr> {
    match t {
        Type::Comp(a) => Ok((**a).clone()),
        _ => Err(NodeErr("expected a complement type".into())),
    }
}

/// (index, scrutinee, first binder, second binder) of a projection.
type ProjectionParts<'a> = (usize, &'a Term, &'a Ident, &'a Ident);

/// Destructures `pi_i(M)`: `match M with (x1, x2) -> xi`.
fn as_projection(t: &Term) -> Option<ProjectionParts<'_>> {
    if let Term::Match(scrut, branches) = t {
        if branches.len() == 1 {
            if let (Pattern::Pair(p1, p2), Term::Var(body)) = (&branches[0].0, &branches[0].1) {
                if let (Pattern::Var(x1), Pattern::Var(x2)) = (p1.as_ref(), p2.as_ref()) {
                    if x1 != x2 {
                        if body == x1 {
                            return Some((1, scrut, x1, x2));
                        }
                        if body == x2 {
                            return Some((2, scrut, x1, x2));
                        }
                    }
                }
            }
        }
    }
    None
}

/// Destructures `if M then N else P`: a match on 'true / 'false.
fn as_if(t: &Term) -> Option<(&Term, &Term, &Term)> {
    if let Term::Match(scrut, branches) = t {
        if branches.len() == 2 {
            if let (Pattern::Atom(a1), Pattern::Atom(a2)) = (&branches[0].0, &branches[1].0) {
                if a1 == "true" && a2 == "false" {
                    return Some((scrut, &branches[0].1, &branches[1].1));
                }
            }
        }
    }
    None
}

/// Destructures `let x = M in N`: the redex `(fun x -> N) M`.
fn as_let(t: &Term) -> Option<(&Ident, &Term, &Term)> {
    if let Term::App(f, m) = t {
        if let Term::Abs(x, n) = f.as_ref() {
            return Some((x, m, n));
        }
    }
    None
}

type MatchParts<'a> = (&'a Term, &'a [(Pattern, Term)]);

fn match_parts(t: &Term) -> Result<MatchParts<'_>, NodeErr> {
    match t {
        Term::Match(s, br) => Ok((s, br)),
        _ => Err(NodeErr("subject is not a match expression".into())),
    }
}

fn instantiated_branches(
    branches: &[(Pattern, Term)],
    thetas: &[PatternTypeSubstitution],
) -> Result<Vec<Type>, NodeErr> {
    if thetas.len() != branches.len() {
        return Err(NodeErr(format!(
            "expected {} pattern type substitutions, found {}",
            branches.len(),
            thetas.len()
        )));
    }
    branches
        .iter()
        .zip(thetas.iter())
        .map(|((p, _), th)| instantiate_pattern(p, th).map_err(|e| NodeErr(e.to_string())))
        .collect()
}

fn ok_union(branches: &[(Pattern, Term)]) -> Type {
    Type::union(branches.iter().map(|(p, _)| pattern_ok_type(p)).collect()).canon()
}

/// Computes the premise sequents demanded by the rule at this node.
fn compute_premises(d: &Derivation, c: &Sequent) -> Result<Vec<Sequent>, NodeErr> {
    use RuleName::*;
    let p = need_principal(d);
    match d.rule {
        Var | Top | Num | Atom | BotL | NumL | FunL | AtomL | PairL1 => Ok(vec![]),
        SubL => {
            let p = p?;
            in_left(c, p)?;
            let b = need_via(d)?.clone();
            Ok(vec![c
                .without_left(p)
                .with_left(formula(p.subject.clone(), b))])
        }
        SubR => {
            let p = p?;
            in_right(c, p)?;
            let b = need_via(d)?.clone();
            Ok(vec![c
                .without_right(p)
                .with_right(formula(p.subject.clone(), b))])
        }
        CompL => {
            let p = p?;
            in_left(c, p)?;
            let a = as_comp(&p.ty)?;
            Ok(vec![c
                .without_left(p)
                .with_right(formula(p.subject.clone(), a))])
        }
        CompR => {
            let p = p?;
            in_right(c, p)?;
            let a = as_comp(&p.ty)?;
            Ok(vec![c
                .without_right(p)
                .with_left(formula(p.subject.clone(), a))])
        }
        BinOp | RelOp => {
            let p = p?;
            in_right(c, p)?;
            let (m, n) = match &p.subject {
                Term::BinOp(_, m, n) if d.rule == BinOp => (m, n),
                Term::RelOp(_, m, n) if d.rule == RelOp => (m, n),
                _ => return Err(NodeErr("subject does not match the rule's operation".into())),
            };
            let base = c.without_right(p);
            Ok(vec![
                base.with_right(formula((**m).clone(), Type::Int)),
                base.with_right(formula((**n).clone(), Type::Int)),
            ])
        }
        Fix => {
            let p = p?;
            in_right(c, p)?;
            let (x, body) = match &p.subject {
                Term::Fix(x, body) => (x, body),
                _ => return Err(NodeErr("subject is not a fix".into())),
            };
            Ok(vec![c
                .without_right(p)
                .with_left(formula(Term::Var(x.clone()), p.ty.clone()))
                .with_right(formula((**body).clone(), p.ty.clone()))])
        }
        Pair => {
            let p = p?;
            in_right(c, p)?;
            let (m, n) = match &p.subject {
                Term::Pair(m, n) => (m, n),
                _ => return Err(NodeErr("subject is not a pair".into())),
            };
            let (a, b) = match &p.ty {
                Type::Pair(a, b) => ((**a).clone(), (**b).clone()),
                _ => return Err(NodeErr("ascription is not a pair type".into())),
            };
            let base = c.without_right(p);
            Ok(vec![
                base.with_right(formula((**m).clone(), a)),
                base.with_right(formula((**n).clone(), b)),
            ])
        }
        Abs => {
            let p = p?;
            in_right(c, p)?;
            let (x, body) = match &p.subject {
                Term::Abs(x, body) => (x, body),
                _ => return Err(NodeErr("subject is not an abstraction".into())),
            };
            let (a, b) = match &p.ty {
                Type::Arrow(a, b) => ((**a).clone(), (**b).clone()),
                _ => return Err(NodeErr("ascription is not an arrow type".into())),
            };
            Ok(vec![c
                .without_right(p)
                .with_left(formula(Term::Var(x.clone()), a))
                .with_right(formula((**body).clone(), b))])
        }
        App => {
            let p = p?;
            in_right(c, p)?;
            let (m, n) = match &p.subject {
                Term::App(m, n) => (m, n),
                _ => return Err(NodeErr("subject is not an application".into())),
            };
            let b = need_via(d)?.clone();
            let base = c.without_right(p);
            Ok(vec![
                base.with_right(formula(
                    (**m).clone(),
                    Type::arrow(b.clone(), p.ty.clone()),
                )),
                base.with_right(formula((**n).clone(), b)),
            ])
        }
        Match => {
            let p = p?;
            in_right(c, p)?;
            let (scrut, branches) = match_parts(&p.subject)?;
            let insts = instantiated_branches(branches, &d.witnesses.thetas)?;
            let base = c.without_right(p);
            let mut out = vec![base.with_right(formula(scrut.clone(), Type::union(insts.clone()).canon()))];
            for (i, (_, body)) in branches.iter().enumerate() {
                let mut s = base.clone();
                for (x, ty) in &d.witnesses.thetas[i].0 {
                    s.left.insert(formula(Term::Var(x.clone()), ty.clone()));
                }
                s.left.insert(formula(scrut.clone(), insts[i].clone()));
                s.right.insert(formula(body.clone(), p.ty.clone()));
                out.push(s);
            }
            Ok(out)
        }
        OpE | RelOpE => {
            let p = p?;
            in_left(c, p)?;
            let (m, n) = match &p.subject {
                Term::BinOp(_, m, n) if d.rule == OpE => (m, n),
                Term::RelOp(_, m, n) if d.rule == RelOpE => (m, n),
                _ => return Err(NodeErr("subject does not match the rule's operation".into())),
            };
            Ok(vec![c
                .without_left(p)
                .with_left(formula((**m).clone(), Type::Int))
                .with_left(formula((**n).clone(), Type::Int))])
        }
        AppE => {
            let p = p?;
            in_left(c, p)?;
            let m = match &p.subject {
                Term::App(m, _) => m,
                _ => return Err(NodeErr("subject is not an application".into())),
            };
            Ok(vec![c
                .without_left(p)
                .with_left(formula((**m).clone(), Type::fun_any()))])
        }
        MatchE => {
            let p = p?;
            in_left(c, p)?;
            let (scrut, branches) = match_parts(&p.subject)?;
            Ok(vec![c
                .without_left(p)
                .with_left(formula(scrut.clone(), ok_union(branches)))])
        }
        PairE => {
            let p = p?;
            in_left(c, p)?;
            let (m, n) = match &p.subject {
                Term::Pair(m, n) => (m, n),
                _ => return Err(NodeErr("subject is not a pair".into())),
            };
            Ok(vec![c
                .without_left(p)
                .with_left(formula((**m).clone(), Type::Ok))
                .with_left(formula((**n).clone(), Type::Ok))])
        }

        // ---- derived rules ----
        WeakL => {
            let f = d
                .witnesses
                .formula
                .clone()
                .ok_or_else(|| NodeErr("missing :formula witness".into()))?;
            in_left(c, &f)?;
            Ok(vec![c.without_left(&f)])
        }
        WeakR => {
            let f = d
                .witnesses
                .formula
                .clone()
                .ok_or_else(|| NodeErr("missing :formula witness".into()))?;
            in_right(c, &f)?;
            Ok(vec![c.without_right(&f)])
        }
        Prj1 | Prj2 => {
            let p = p?;
            in_right(c, p)?;
            let (i, scrut, _, _) = as_projection(&p.subject)
                .ok_or_else(|| NodeErr("subject is not a projection".into()))?;
            let want = if d.rule == Prj1 { 1 } else { 2 };
            if i != want {
                return Err(NodeErr("projection index does not match the rule".into()));
            }
            let other = d
                .witnesses
                .other
                .clone()
                .ok_or_else(|| NodeErr("missing :other witness".into()))?;
            let pair_ty = if i == 1 {
                Type::pair(p.ty.clone(), other)
            } else {
                Type::pair(other, p.ty.clone())
            };
            Ok(vec![c
                .without_right(p)
                .with_right(formula(scrut.clone(), pair_ty))])
        }
        PrjE1 | PrjE2 => {
            let p = p?;
            in_left(c, p)?;
            let (i, scrut, _, _) = as_projection(&p.subject)
                .ok_or_else(|| NodeErr("subject is not a projection".into()))?;
            let want = if d.rule == PrjE1 { 1 } else { 2 };
            if i != want {
                return Err(NodeErr("projection index does not match the rule".into()));
            }
            Ok(vec![c
                .without_left(p)
                .with_left(formula(scrut.clone(), Type::pair_val()))])
        }
        If => {
            let p = p?;
            in_right(c, p)?;
            let (m, n, e) =
                as_if(&p.subject).ok_or_else(|| NodeErr("subject is not an if".into()))?;
            let base = c.without_right(p);
            Ok(vec![
                base.with_right(formula(m.clone(), Type::bool_ty())),
                base.with_right(formula(n.clone(), p.ty.clone())),
                base.with_right(formula(e.clone(), p.ty.clone())),
            ])
        }
        IfE => {
            let p = p?;
            in_left(c, p)?;
            let (m, _, _) =
                as_if(&p.subject).ok_or_else(|| NodeErr("subject is not an if".into()))?;
            Ok(vec![c
                .without_left(p)
                .with_left(formula(m.clone(), Type::bool_ty()))])
        }
        Match0 => {
            let p = p?;
            in_right(c, p)?;
            let (scrut, branches) = match_parts(&p.subject)?;
            let insts = instantiated_branches(branches, &d.witnesses.thetas)?;
            let base = c.without_right(p);
            let mut out =
                vec![base.with_right(formula(scrut.clone(), Type::union(insts).canon()))];
            for (i, (_, body)) in branches.iter().enumerate() {
                let mut s = base.clone();
                for (x, ty) in &d.witnesses.thetas[i].0 {
                    s.left.insert(formula(Term::Var(x.clone()), ty.clone()));
                }
                s.right.insert(formula(body.clone(), p.ty.clone()));
                out.push(s);
            }
            Ok(out)
        }
        PairLL => {
            let p = p?;
            in_left(c, p)?;
            let (m1, _) = match &p.subject {
                Term::Pair(m, n) => (m, n),
                _ => return Err(NodeErr("subject is not a pair".into())),
            };
            let (a1, _) = match &p.ty {
                Type::Pair(a, b) => (a, b),
                _ => return Err(NodeErr("ascription is not a pair type".into())),
            };
            Ok(vec![c
                .without_left(p)
                .with_left(formula((**m1).clone(), (**a1).clone()))])
        }
        PairRL => {
            let p = p?;
            in_left(c, p)?;
            let (m1, m2) = match &p.subject {
                Term::Pair(m, n) => (m, n),
                _ => return Err(NodeErr("subject is not a pair".into())),
            };
            let (_, a2) = match &p.ty {
                Type::Pair(a, b) => (a, b),
                _ => return Err(NodeErr("ascription is not a pair type".into())),
            };
            let base = c.without_left(p);
            Ok(vec![
                base.with_left(formula((**m2).clone(), (**a2).clone())),
                base.with_right(formula((**m1).clone(), Type::Ok)),
            ])
        }
        PrjL1 | PrjL2 => {
            let p = p?;
            in_left(c, p)?;
            let (i, scrut, _, _) = as_projection(&p.subject)
                .ok_or_else(|| NodeErr("subject is not a projection".into()))?;
            let want = if d.rule == PrjL1 { 1 } else { 2 };
            if i != want {
                return Err(NodeErr("projection index does not match the rule".into()));
            }
            let other = d
                .witnesses
                .other
                .clone()
                .ok_or_else(|| NodeErr("missing :other witness".into()))?;
            let pair_ty = if i == 1 {
                Type::pair(Type::comp(p.ty.clone()), other)
            } else {
                Type::pair(other, Type::comp(p.ty.clone()))
            };
            Ok(vec![c
                .without_left(p)
                .with_right(formula(scrut.clone(), pair_ty))])
        }
        AppL => {
            let p = p?;
            in_left(c, p)?;
            let (m, n) = match &p.subject {
                Term::App(m, n) => (m, n),
                _ => return Err(NodeErr("subject is not an application".into())),
            };
            let b = need_via(d)?.clone();
            let base = c.without_left(p);
            Ok(vec![
                base.with_right(formula(
                    (**m).clone(),
                    Type::onlyto(b.clone(), p.ty.clone()),
                )),
                base.with_left(formula((**n).clone(), b)),
            ])
        }
        FixL => {
            let p = p?;
            in_left(c, p)?;
            let (x, body) = match &p.subject {
                Term::Fix(x, body) => (x, body),
                _ => return Err(NodeErr("subject is not a fix".into())),
            };
            Ok(vec![c
                .without_left(p)
                .with_left(formula((**body).clone(), p.ty.clone()))
                .with_right(formula(Term::Var(x.clone()), p.ty.clone()))])
        }
        MatchL => {
            let p = p?;
            in_left(c, p)?;
            let (scrut, branches) = match_parts(&p.subject)?;
            let insts = instantiated_branches(branches, &d.witnesses.thetas)?;
            let base = c.without_left(p);
            let mut out =
                vec![base.with_right(formula(scrut.clone(), Type::union(insts.clone()).canon()))];
            for (i, (_, body)) in branches.iter().enumerate() {
                let mut s = base.clone();
                s.left.insert(formula(scrut.clone(), insts[i].clone()));
                s.left.insert(formula(body.clone(), p.ty.clone()));
                for (x, ty) in &d.witnesses.thetas[i].0 {
                    s.right
                        .insert(formula(Term::Var(x.clone()), Type::comp(ty.clone())));
                }
                out.push(s);
            }
            Ok(out)
        }
        IfL => {
            let p = p?;
            in_left(c, p)?;
            let (m, n, e) =
                as_if(&p.subject).ok_or_else(|| NodeErr("subject is not an if".into()))?;
            let base = c.without_left(p);
            Ok(vec![
                base.with_right(formula(m.clone(), Type::bool_ty())),
                base.with_left(formula(n.clone(), p.ty.clone())),
                base.with_left(formula(e.clone(), p.ty.clone())),
            ])
        }
        SwapL => {
            let p = p?;
            in_left(c, p)?;
            Ok(vec![c
                .without_left(p)
                .with_right(formula(p.subject.clone(), Type::comp(p.ty.clone())))])
        }
        SwapR => {
            let p = p?;
            in_right(c, p)?;
            Ok(vec![c
                .without_right(p)
                .with_left(formula(p.subject.clone(), Type::comp(p.ty.clone())))])
        }
        Let => {
            let p = p?;
            in_right(c, p)?;
            let (x, m, n) =
                as_let(&p.subject).ok_or_else(|| NodeErr("subject is not a let redex".into()))?;
            let b = need_via(d)?.clone();
            let base = c.without_right(p);
            Ok(vec![
                base.with_right(formula(m.clone(), b.clone())),
                base.with_left(formula(Term::Var(x.clone()), b))
                    .with_right(formula(n.clone(), p.ty.clone())),
            ])
        }
        LetL => {
            let p = p?;
            in_left(c, p)?;
            let (x, m, n) =
                as_let(&p.subject).ok_or_else(|| NodeErr("subject is not a let redex".into()))?;
            let b = need_via(d)?.clone();
            let base = c.without_left(p);
            Ok(vec![
                base.with_left(formula(n.clone(), p.ty.clone()))
                    .with_right(formula(Term::Var(x.clone()), b.clone())),
                base.with_left(formula(m.clone(), b)),
            ])
        }
        CoAbs => {
            let p = p?;
            in_left(c, p)?;
            let (x, body) = match &p.subject {
                Term::Abs(x, body) => (x, body),
                _ => return Err(NodeErr("subject is not an abstraction".into())),
            };
            let (b, a) = as_coto(&p.ty)?;
            Ok(vec![c
                .without_left(p)
                .with_left(formula((**body).clone(), a))
                .with_right(formula(Term::Var(x.clone()), b))])
        }
        CoApp => {
            let p = p?;
            in_left(c, p)?;
            let (m, n) = match &p.subject {
                Term::App(m, n) => (m, n),
                _ => return Err(NodeErr("subject is not an application".into())),
            };
            let b = need_via(d)?.clone();
            let base = c.without_left(p);
            Ok(vec![
                base.with_left(formula(
                    (**m).clone(),
                    Type::coto(b.clone(), p.ty.clone()),
                )),
                base.with_left(formula((**n).clone(), b)),
            ])
        }
        AbsL => {
            let p = p?;
            in_left(c, p)?;
            let (x, body) = match &p.subject {
                Term::Abs(x, body) => (x, body),
                _ => return Err(NodeErr("subject is not an abstraction".into())),
            };
            let (a, b) = match &p.ty {
                Type::Comp(inner) => match inner.as_ref() {
                    Type::Arrow(a, b) => ((**a).clone(), (**b).clone()),
                    _ => return Err(NodeErr("ascription is not ~(A -> B)".into())),
                },
                _ => return Err(NodeErr("ascription is not ~(A -> B)".into())),
            };
            Ok(vec![c
                .without_left(p)
                .with_left(formula((**body).clone(), Type::comp(b)))
                .with_right(formula(Term::Var(x.clone()), Type::comp(a)))])
        }
    }
}

/// Computes the premise sequents demanded by a node's rule, for external
/// consumers (the translators and the corpus runner).
pub fn premise_sequents(d: &Derivation, c: &Sequent) -> Result<Vec<Sequent>, String> {
    compute_premises(d, c).map_err(|NodeErr(r)| r)
}

/// Destructures `B coto A = ~(~B -> ~A)`, returning `(B, A)`.
fn as_coto(t: &Type) -> Result<(Type, Type), NodeErr> {
    if let Type::Comp(inner) = t {
        if let Type::Arrow(dom, cod) = inner.as_ref() {
            if let (Type::Comp(b), Type::Comp(a)) = (dom.as_ref(), cod.as_ref()) {
                return Ok(((**b).clone(), (**a).clone()));
            }
        }
    }
    Err(NodeErr("ascription is not a coarrow type".into()))
}

// -------------------------------------------------------------------------
// Side conditions.

fn check_conditions(d: &Derivation, c: &Sequent, dec: &mut Decider) -> Result<(), NodeErr> {
    use RuleName::*;
    let sub_ok = |dec: &mut Decider, a: &Type, b: &Type, what: &str| {
        if dec.subtype(a, b) {
            Ok(())
        } else {
            Err(NodeErr(format!("{}: required subtyping does not hold", what)))
        }
    };
    match d.rule {
        Var => {
            let p = need_principal(d)?;
            if !matches!(p.subject, Term::Var(_)) {
                return Err(NodeErr("Var requires a variable subject".into()));
            }
            in_left(c, p)?;
            in_right(c, p)?;
            Ok(())
        }
        Top => {
            let p = need_principal(d)?;
            in_right(c, p)?;
            if p.ty != Type::Top {
                return Err(NodeErr("Top concludes M : Top".into()));
            }
            Ok(())
        }
        Num => {
            let p = need_principal(d)?;
            in_right(c, p)?;
            if !matches!(p.subject, Term::Num(_)) || p.ty != Type::Int {
                return Err(NodeErr("Num concludes n : Int for a numeral n".into()));
            }
            Ok(())
        }
        Atom => {
            let p = need_principal(d)?;
            in_right(c, p)?;
            match (&p.subject, &p.ty) {
                (Term::Atom(a), Type::AtomLit(b)) if a == b => Ok(()),
                _ => Err(NodeErr("Atom concludes 'a : 'a".into())),
            }
        }
        SubL => {
            let p = need_principal(d)?;
            let b = need_via(d)?;
            sub_ok(dec, &p.ty, b, "SubL needs A <= B")
        }
        SubR => {
            let p = need_principal(d)?;
            let b = need_via(d)?;
            sub_ok(dec, b, &p.ty, "SubR needs B <= A")
        }
        BinOp => {
            let p = need_principal(d)?;
            if p.ty != Type::Int {
                return Err(NodeErr("BinOp concludes Int".into()));
            }
            Ok(())
        }
        RelOp => {
            let p = need_principal(d)?;
            if p.ty != Type::bool_ty() {
                return Err(NodeErr("RelOp concludes Bool".into()));
            }
            Ok(())
        }
        Abs | Fix => {
            let p = need_principal(d)?;
            let x = match &p.subject {
                Term::Abs(x, _) | Term::Fix(x, _) => x.clone(),
                _ => return Err(NodeErr("binder expected".into())),
            };
            let mut ctx_fv = fv_of(&c.left);
            ctx_fv.extend(fv_of(&c.right.iter().filter(|f| *f != p).cloned().collect()));
            if ctx_fv.contains(&x) {
                return Err(NodeErr(format!("binder {} occurs free in the context", x)));
            }
            Ok(())
        }
        Match | Match0 | MatchL => {
            let p = need_principal(d)?;
            let (_, branches) = match_parts(&p.subject)?;
            check_match_conditions(d, c, p, branches, dec)
        }
        OpE | RelOpE | AppE | MatchE | PairE => {
            let p = need_principal(d)?;
            if p.ty != Type::Ok {
                return Err(NodeErr("elimination rules analyse M : Ok".into()));
            }
            Ok(())
        }
        Prj1 | Prj2 => {
            let p = need_principal(d)?;
            let other = d
                .witnesses
                .other
                .as_ref()
                .ok_or_else(|| NodeErr("missing :other witness".into()))?;
            sub_ok(dec, &p.ty, &Type::Ok, "Prj components must be below Ok")?;
            sub_ok(dec, other, &Type::Ok, "Prj components must be below Ok")?;
            projection_binders_fresh(c, p)
        }
        PrjL1 | PrjL2 => {
            let p = need_principal(d)?;
            let other = d
                .witnesses
                .other
                .as_ref()
                .ok_or_else(|| NodeErr("missing :other witness".into()))?;
            sub_ok(
                dec,
                &Type::comp(p.ty.clone()),
                &Type::Ok,
                "Prj components must be below Ok",
            )?;
            sub_ok(dec, other, &Type::Ok, "Prj components must be below Ok")?;
            projection_binders_fresh(c, p)
        }
        PrjE1 | PrjE2 => {
            let p = need_principal(d)?;
            if p.ty != Type::Ok {
                return Err(NodeErr("PrjE analyses pi_i(M) : Ok".into()));
            }
            projection_binders_fresh(c, p)
        }
        IfE => {
            let p = need_principal(d)?;
            if p.ty != Type::Ok {
                return Err(NodeErr("IfE analyses if ... : Ok".into()));
            }
            Ok(())
        }
        BotL => {
            let p = need_principal(d)?;
            in_left(c, p)?;
            if p.ty != Type::bot() {
                return Err(NodeErr("BotL analyses M : Bot".into()));
            }
            Ok(())
        }
        NumL => {
            let p = need_principal(d)?;
            in_left(c, p)?;
            if !matches!(p.subject, Term::Num(_)) || p.ty != Type::comp(Type::Int) {
                return Err(NodeErr("NumL analyses n : ~Int".into()));
            }
            Ok(())
        }
        FunL => {
            let p = need_principal(d)?;
            in_left(c, p)?;
            if !matches!(p.subject, Term::Abs(_, _)) || p.ty != Type::comp(Type::fun_any()) {
                return Err(NodeErr("FunL analyses fun x -> M : ~Fun".into()));
            }
            // the expansion types the abstraction with Abs, so the binder
            // must be fresh for the context
            let x = match &p.subject {
                Term::Abs(x, _) => x.clone(),
                _ => unreachable!(),
            };
            let ctx = c.without_left(p);
            if ctx.free_vars().contains(&x) {
                return Err(NodeErr(format!("binder {} occurs free in the context", x)));
            }
            Ok(())
        }
        AtomL => {
            let p = need_principal(d)?;
            in_left(c, p)?;
            match (&p.subject, &p.ty) {
                (Term::Atom(a), Type::Comp(inner)) => match inner.as_ref() {
                    Type::AtomLit(b) if a == b => Ok(()),
                    _ => Err(NodeErr("AtomL analyses 'a : ~'a".into())),
                },
                _ => Err(NodeErr("AtomL analyses 'a : ~'a".into())),
            }
        }
        PairL1 => {
            let p = need_principal(d)?;
            in_left(c, p)?;
            if !matches!(p.subject, Term::Pair(_, _)) || p.ty != Type::comp(Type::pair_any()) {
                return Err(NodeErr("PairL1 analyses (M, N) : ~Pair".into()));
            }
            Ok(())
        }
        FixL | CoAbs | AbsL => {
            let p = need_principal(d)?;
            let x = match &p.subject {
                Term::Abs(x, _) | Term::Fix(x, _) => x.clone(),
                _ => return Err(NodeErr("binder expected".into())),
            };
            let mut ctx = c.clone();
            ctx.left.remove(p);
            if ctx.free_vars().contains(&x) {
                return Err(NodeErr(format!("binder {} occurs free in the context", x)));
            }
            Ok(())
        }
        Let | LetL => {
            let p = need_principal(d)?;
            let (x, _, _) =
                as_let(&p.subject).ok_or_else(|| NodeErr("subject is not a let redex".into()))?;
            let mut ctx = c.clone();
            ctx.left.remove(p);
            ctx.right.remove(p);
            if ctx.free_vars().contains(x) {
                return Err(NodeErr(format!("binder {} occurs free in the context", x)));
            }
            Ok(())
        }
        IfL | If | WeakL | WeakR | CompL | CompR | Pair | App | AppL | CoApp | SwapL | SwapR
        | PairLL | PairRL => {
            Ok(())
        }
    }
}

fn projection_binders_fresh(c: &Sequent, p: &TypingFormula) -> Result<(), NodeErr> {
    let (_, _, x1, x2) =
        as_projection(&p.subject).ok_or_else(|| NodeErr("subject is not a projection".into()))?;
    let mut ctx = c.clone();
    ctx.left.remove(p);
    ctx.right.remove(p);
    let fv = ctx.free_vars();
    if fv.contains(x1) || fv.contains(x2) {
        return Err(NodeErr(
            "projection pattern variables occur free in the context".into(),
        ));
    }
    Ok(())
}

fn check_match_conditions(
    d: &Derivation,
    c: &Sequent,
    p: &TypingFormula,
    branches: &[(Pattern, Term)],
    dec: &mut Decider,
) -> Result<(), NodeErr> {
    if d.witnesses.thetas.len() != branches.len() {
        return Err(NodeErr("one pattern type substitution per branch required".into()));
    }
    for ((pat, _), theta) in branches.iter().zip(d.witnesses.thetas.iter()) {
        if pat.var_set() != theta.domain() {
            return Err(NodeErr(
                "PatSubst: substitution domain must be exactly the pattern variables".into(),
            ));
        }
        for ty in theta.0.values() {
            if !dec.subtype(ty, &Type::Ok) {
                return Err(NodeErr(
                    "PatSubst: every type in the range must be a subtype of Ok".into(),
                ));
            }
        }
        if !pat.is_linear() {
            return Err(NodeErr("patterns must be linear".into()));
        }
    }
    for i in 0..branches.len() {
        for j in i + 1..branches.len() {
            if !patterns_disjoint(&branches[i].0, &branches[j].0) {
                return Err(NodeErr("branch patterns must be pairwise disjoint".into()));
            }
        }
    }
    let mut ctx = c.clone();
    ctx.left.remove(p);
    ctx.right.remove(p);
    let ctx_fv = ctx.free_vars();
    for (pat, _) in branches {
        for x in pat.vars() {
            if ctx_fv.contains(&x) {
                return Err(NodeErr(format!(
                    "pattern variable {} occurs free in the context",
                    x
                )));
            }
        }
    }
    Ok(())
}

// -------------------------------------------------------------------------
// The checker.

/// Checks a primitive-rule derivation against its root sequent.
pub fn check(root: &Sequent, d: &Derivation) -> CheckReport {
    let mut dec = Decider::new();
    check_with(root, d, &mut dec)
}

/// As [`check`], reusing a caller-supplied subtype decider.
pub fn check_with(root: &Sequent, d: &Derivation, dec: &mut Decider) -> CheckReport {
    let mut path = Vec::new();
    match check_node(root, d, &mut path, dec, true) {
        Ok(()) => CheckReport::Accepted,
        Err(f) => CheckReport::Rejected(f),
    }
}

/// Checks a derivation that may still contain derived rules.  Used by tests
/// and the corpus runner to validate pre-elaboration scripts.
pub fn check_allowing_derived(root: &Sequent, d: &Derivation) -> CheckReport {
    let mut dec = Decider::new();
    let mut path = Vec::new();
    match check_node(root, d, &mut path, &mut dec, false) {
        Ok(()) => CheckReport::Accepted,
        Err(f) => CheckReport::Rejected(f),
    }
}

fn check_node(
    c: &Sequent,
    d: &Derivation,
    path: &mut Vec<usize>,
    dec: &mut Decider,
    primitive_only: bool,
) -> Result<(), CheckFailure> {
    let fail = |path: &[usize], reason: String| CheckFailure {
        path: path.to_vec(),
        rule: d.rule.name().to_string(),
        reason,
    };
    if primitive_only && !d.rule.is_primitive() {
        return Err(fail(
            path,
            "derived rule in a primitive-only derivation; elaborate first".into(),
        ));
    }
    let premises = compute_premises(d, c).map_err(|NodeErr(r)| fail(path, r))?;
    check_conditions(d, c, dec).map_err(|NodeErr(r)| fail(path, r))?;
    if premises.len() != d.premises.len() {
        return Err(fail(
            path,
            format!(
                "rule requires {} premises, found {}",
                premises.len(),
                d.premises.len()
            ),
        ));
    }
    for (i, (want, sub)) in premises.iter().zip(d.premises.iter()).enumerate() {
        path.push(i);
        check_node(want, sub, path, dec, primitive_only)?;
        path.pop();
    }
    Ok(())
}

// -------------------------------------------------------------------------
// Weakening transformers.

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Threads an extra formula through every sequent of a primitive derivation.
/// Fails when a binder in the tree would capture a free variable of the
/// added formula.
fn weaken(
    d: &Derivation,
    c: &Sequent,
    f: &TypingFormula,
    side: Side,
) -> Result<Derivation, ElaborationError> {
    let already = match side {
        Side::Left => c.left.contains(f),
        Side::Right => c.right.contains(f),
    };
    if already {
        return Ok(d.clone());
    }
    let f_fv = free_vars(&f.subject);
    if let Some(p) = &d.principal {
        let binders: Vec<Ident> = match (&d.rule, &p.subject) {
            (RuleName::Abs, Term::Abs(x, _)) | (RuleName::Fix, Term::Fix(x, _)) => vec![x.clone()],
            (RuleName::Match, Term::Match(_, branches)) => {
                branches.iter().flat_map(|(pat, _)| pat.vars()).collect()
            }
            _ => vec![],
        };
        for x in binders {
            if f_fv.contains(&x) {
                return Err(ElaborationError {
                    rule: d.rule.name().to_string(),
                    reason: format!(
                        "weakening formula captures binder {}; rename the binder",
                        x
                    ),
                });
            }
        }
    }
    let old_premises = compute_premises(d, c).map_err(|NodeErr(r)| ElaborationError {
        rule: d.rule.name().to_string(),
        reason: r,
    })?;
    let mut new_children = Vec::with_capacity(d.premises.len());
    for (child, oc) in d.premises.iter().zip(old_premises.iter()) {
        new_children.push(weaken(child, oc, f, side)?);
    }
    Ok(Derivation {
        rule: d.rule,
        principal: d.principal.clone(),
        witnesses: d.witnesses.clone(),
        premises: new_children,
    })
}

/// Weakening on the right: from a derivation of `c`, a derivation of
/// `c` extended with `f` on the right.  The tree shape is preserved.
pub fn weaken_right(
    d: &Derivation,
    c: &Sequent,
    f: &TypingFormula,
) -> Result<Derivation, ElaborationError> {
    weaken(d, c, f, Side::Right)
}

/// Weakening on the left.
pub fn weaken_left(
    d: &Derivation,
    c: &Sequent,
    f: &TypingFormula,
) -> Result<Derivation, ElaborationError> {
    weaken(d, c, f, Side::Left)
}

// -------------------------------------------------------------------------
// Elaboration.

/// Replaces every derived-rule node by its primitive expansion.  The output
/// uses primitive rules only and proves the same root sequent; elaboration
/// is the identity on primitive-only trees.
pub fn elaborate(root: &Sequent, d: &Derivation) -> Result<Derivation, ElaborationError> {
    let d2 = elaborate_node(root, d)?;
    debug_assert!(d2.uses_only_primitive_rules());
    Ok(d2)
}

fn elaborate_node(c: &Sequent, d: &Derivation) -> Result<Derivation, ElaborationError> {
    let premises = compute_premises(d, c).map_err(|NodeErr(r)| ElaborationError {
        rule: d.rule.name().to_string(),
        reason: r,
    })?;
    if premises.len() != d.premises.len() {
        return Err(elab_err(
            d.rule,
            format!(
                "rule requires {} premises, found {}",
                premises.len(),
                d.premises.len()
            ),
        ));
    }
    let mut children = Vec::with_capacity(d.premises.len());
    for (child, pc) in d.premises.iter().zip(premises.iter()) {
        children.push(elaborate_node(pc, child)?);
    }
    if d.rule.is_primitive() {
        return Ok(Derivation {
            rule: d.rule,
            principal: d.principal.clone(),
            witnesses: d.witnesses.clone(),
            premises: children,
        });
    }
    let expanded = expand_derived(c, d, &premises, children)?;
    // expansions may introduce further derived rules (SwapL inside AppL etc.)
    elaborate_node(c, &expanded)
}

fn expand_derived(
    _c: &Sequent,
    d: &Derivation,
    premises: &[Sequent],
    children: Vec<Derivation>,
) -> Result<Derivation, ElaborationError> {
    use RuleName::*;
    let n = |rule, principal, witnesses, prem| Derivation::node(rule, principal, witnesses, prem);
    let p = d.principal.clone();
    match d.rule {
        SwapL => {
            // SubL with ~~A over CompL
            let p = p.ok_or_else(|| elab_err(d.rule, "missing principal"))?;
            let nn = Type::comp(Type::comp(p.ty.clone()));
            let inner = n(
                CompL,
                formula(p.subject.clone(), nn.clone()),
                Witnesses::none(),
                children,
            );
            Ok(n(SubL, p, Witnesses::via(nn), vec![inner]))
        }
        SwapR => {
            let p = p.ok_or_else(|| elab_err(d.rule, "missing principal"))?;
            let nn = Type::comp(Type::comp(p.ty.clone()));
            let inner = n(
                CompR,
                formula(p.subject.clone(), nn.clone()),
                Witnesses::none(),
                children,
            );
            Ok(n(SubR, p, Witnesses::via(nn), vec![inner]))
        }
        WeakL => {
            let f = d.witnesses.formula.clone().unwrap();
            let child = children.into_iter().next().unwrap();
            weaken_left(&child, &premises[0], &f)
        }
        WeakR => {
            let f = d.witnesses.formula.clone().unwrap();
            let child = children.into_iter().next().unwrap();
            weaken_right(&child, &premises[0], &f)
        }
        BotL => {
            let p = p.unwrap();
            let top = n(
                Top,
                formula(p.subject.clone(), Type::Top),
                Witnesses::none(),
                vec![],
            );
            Ok(n(CompL, p, Witnesses::none(), vec![top]))
        }
        NumL => {
            let p = p.unwrap();
            let num = n(
                Num,
                formula(p.subject.clone(), Type::Int),
                Witnesses::none(),
                vec![],
            );
            Ok(n(CompL, p, Witnesses::none(), vec![num]))
        }
        AtomL => {
            let p = p.unwrap();
            let name = match &p.subject {
                Term::Atom(a) => a.clone(),
                _ => unreachable!("checked in compute"),
            };
            let atom = n(
                Atom,
                formula(p.subject.clone(), Type::AtomLit(name)),
                Witnesses::none(),
                vec![],
            );
            Ok(n(CompL, p, Witnesses::none(), vec![atom]))
        }
        FunL => {
            let p = p.unwrap();
            let body = match &p.subject {
                Term::Abs(_, b) => (**b).clone(),
                _ => unreachable!(),
            };
            let top = n(Top, formula(body, Type::Top), Witnesses::none(), vec![]);
            let abs = n(
                Abs,
                formula(p.subject.clone(), Type::fun_any()),
                Witnesses::none(),
                vec![top],
            );
            Ok(n(CompL, p, Witnesses::none(), vec![abs]))
        }
        PairL1 => {
            let p = p.unwrap();
            let (m1, m2) = match &p.subject {
                Term::Pair(a, b) => ((**a).clone(), (**b).clone()),
                _ => unreachable!(),
            };
            let t1 = n(Top, formula(m1, Type::Top), Witnesses::none(), vec![]);
            let t2 = n(Top, formula(m2, Type::Top), Witnesses::none(), vec![]);
            let pair = n(
                Pair,
                formula(p.subject.clone(), Type::pair_any()),
                Witnesses::none(),
                vec![t1, t2],
            );
            Ok(n(CompL, p, Witnesses::none(), vec![pair]))
        }
        PairLL => {
            let p = p.unwrap();
            let (m1, m2) = match &p.subject {
                Term::Pair(a, b) => ((**a).clone(), (**b).clone()),
                _ => unreachable!(),
            };
            let (a1, _) = match &p.ty {
                Type::Pair(a, b) => ((**a).clone(), (**b).clone()),
                _ => unreachable!(),
            };
            let child = children.into_iter().next().unwrap();
            let compr = n(
                CompR,
                formula(m1.clone(), Type::comp(a1.clone())),
                Witnesses::none(),
                vec![child],
            );
            let top = n(Top, formula(m2.clone(), Type::Top), Witnesses::none(), vec![]);
            let pair_ty = Type::pair(Type::comp(a1), Type::Top);
            let pair = n(
                Pair,
                formula(p.subject.clone(), pair_ty.clone()),
                Witnesses::none(),
                vec![compr, top],
            );
            let subr = n(
                SubR,
                formula(p.subject.clone(), Type::comp(p.ty.clone())),
                Witnesses::via(pair_ty),
                vec![pair],
            );
            Ok(n(SwapL, p, Witnesses::none(), vec![subr]))
        }
        PairRL => {
            let p = p.unwrap();
            let (_, m2) = match &p.subject {
                Term::Pair(a, b) => ((**a).clone(), (**b).clone()),
                _ => unreachable!(),
            };
            let (_, a2) = match &p.ty {
                Type::Pair(a, b) => ((**a).clone(), (**b).clone()),
                _ => unreachable!(),
            };
            let mut it = children.into_iter();
            let child_refute = it.next().unwrap();
            let child_value = it.next().unwrap();
            let compr = n(
                CompR,
                formula(m2, Type::comp(a2.clone())),
                Witnesses::none(),
                vec![child_refute],
            );
            let pair_ty = Type::pair(Type::Ok, Type::comp(a2));
            let pair = n(
                Pair,
                formula(p.subject.clone(), pair_ty.clone()),
                Witnesses::none(),
                vec![child_value, compr],
            );
            let subr = n(
                SubR,
                formula(p.subject.clone(), Type::comp(p.ty.clone())),
                Witnesses::via(pair_ty),
                vec![pair],
            );
            Ok(n(SwapL, p, Witnesses::none(), vec![subr]))
        }
        Prj1 | Prj2 => {
            let p = p.unwrap();
            let (i, scrut, x1, x2) = match as_projection(&p.subject) {
                Some((i, s, x1, x2)) => (i, s.clone(), x1.clone(), x2.clone()),
                None => unreachable!(),
            };
            let other = d.witnesses.other.clone().unwrap();
            let (a1, a2) = if i == 1 {
                (p.ty.clone(), other)
            } else {
                (other, p.ty.clone())
            };
            let pair_ty = Type::pair(a1.clone(), a2.clone());
            let child = children.into_iter().next().unwrap();
            let union_ty = Type::union(vec![pair_ty.clone()]).canon();
            let subr = n(
                SubR,
                formula(scrut.clone(), union_ty),
                Witnesses::via(pair_ty),
                vec![child],
            );
            let xi = if i == 1 { x1.clone() } else { x2.clone() };
            let var = n(
                Var,
                formula(Term::Var(xi), p.ty.clone()),
                Witnesses::none(),
                vec![],
            );
            let mut theta = PatternTypeSubstitution::new();
            theta.insert(&x1, a1);
            theta.insert(&x2, a2);
            Ok(n(Match, p, Witnesses::thetas(vec![theta]), vec![subr, var]))
        }
        PrjE1 | PrjE2 => {
            let p = p.unwrap();
            let scrut = match as_projection(&p.subject) {
                Some((_, s, _, _)) => s.clone(),
                None => unreachable!(),
            };
            let child = children.into_iter().next().unwrap();
            let union_ty = Type::union(vec![Type::pair_val()]).canon();
            let subl = n(
                SubL,
                formula(scrut, union_ty),
                Witnesses::via(Type::pair_val()),
                vec![child],
            );
            Ok(n(MatchE, p, Witnesses::none(), vec![subl]))
        }
        PrjL1 | PrjL2 => {
            let p = p.unwrap();
            let i = if d.rule == PrjL1 { 1 } else { 2 };
            let other = d.witnesses.other.clone().unwrap();
            let child = children.into_iter().next().unwrap();
            let prj_rule = if i == 1 { Prj1 } else { Prj2 };
            let prj = n(
                prj_rule,
                formula(p.subject.clone(), Type::comp(p.ty.clone())),
                Witnesses::other(other),
                vec![child],
            );
            Ok(n(SwapL, p, Witnesses::none(), vec![prj]))
        }
        If => {
            let p = p.unwrap();
            let (m, _, _) = match as_if(&p.subject) {
                Some((m, n, e)) => (m.clone(), n.clone(), e.clone()),
                None => unreachable!(),
            };
            let mut it = children.into_iter();
            let guard = it.next().unwrap();
            let then_d = it.next().unwrap();
            let else_d = it.next().unwrap();
            let then_w = weaken_left(&then_d, &premises[1], &formula(m.clone(), Type::atom("true")))?;
            let else_w = weaken_left(&else_d, &premises[2], &formula(m, Type::atom("false")))?;
            let thetas = vec![PatternTypeSubstitution::new(), PatternTypeSubstitution::new()];
            Ok(n(
                Match,
                p,
                Witnesses::thetas(thetas),
                vec![guard, then_w, else_w],
            ))
        }
        IfE => {
            let p = p.unwrap();
            let child = children.into_iter().next().unwrap();
            Ok(n(MatchE, p, Witnesses::none(), vec![child]))
        }
        Match0 => {
            let p = p.unwrap();
            let (scrut, branches) = match &p.subject {
                Term::Match(s, br) => ((**s).clone(), br.clone()),
                _ => unreachable!(),
            };
            let mut it = children.into_iter();
            let guard = it.next().unwrap();
            let mut new_premises = vec![guard];
            for (i, (pat, _)) in branches.iter().enumerate() {
                let inst = instantiate_pattern(pat, &d.witnesses.thetas[i])
                    .map_err(|e| elab_err(d.rule, e.to_string()))?;
                let child = it.next().unwrap();
                new_premises.push(weaken_left(
                    &child,
                    &premises[i + 1],
                    &formula(scrut.clone(), inst),
                )?);
            }
            Ok(n(
                Match,
                p,
                Witnesses::thetas(d.witnesses.thetas.clone()),
                new_premises,
            ))
        }
        AppL => {
            let p = p.unwrap();
            let nn = match &p.subject {
                Term::App(_, nn) => (**nn).clone(),
                _ => unreachable!(),
            };
            let b = d.witnesses.via.clone().unwrap();
            let mut it = children.into_iter();
            let fun_child = it.next().unwrap();
            let arg_child = it.next().unwrap();
            let compr = n(
                CompR,
                formula(nn, Type::comp(b.clone())),
                Witnesses::none(),
                vec![arg_child],
            );
            let app = n(
                App,
                formula(p.subject.clone(), Type::comp(p.ty.clone())),
                Witnesses::via(Type::comp(b)),
                vec![fun_child, compr],
            );
            Ok(n(SwapL, p, Witnesses::none(), vec![app]))
        }
        FixL => {
            let p = p.unwrap();
            let (x, body) = match &p.subject {
                Term::Fix(x, b) => (x.clone(), (**b).clone()),
                _ => unreachable!(),
            };
            let child = children.into_iter().next().unwrap();
            let compr = n(
                CompR,
                formula(body, Type::comp(p.ty.clone())),
                Witnesses::none(),
                vec![child],
            );
            let compl = n(
                CompL,
                formula(Term::Var(x), Type::comp(p.ty.clone())),
                Witnesses::none(),
                vec![compr],
            );
            let fix = n(
                Fix,
                formula(p.subject.clone(), Type::comp(p.ty.clone())),
                Witnesses::none(),
                vec![compl],
            );
            Ok(n(SwapL, p, Witnesses::none(), vec![fix]))
        }
        MatchL => {
            let p = p.unwrap();
            let branches = match &p.subject {
                Term::Match(_, br) => br.clone(),
                _ => unreachable!(),
            };
            let mut it = children.into_iter();
            let guard = it.next().unwrap();
            let mut match_premises = vec![guard];
            for (i, (_, body)) in branches.iter().enumerate() {
                let theta = &d.witnesses.thetas[i];
                let mut child = it.next().unwrap();
                // pull each x : ~B from the right back to the left as x : B
                for (x, ty) in &theta.0 {
                    child = n(
                        SwapL,
                        formula(Term::Var(x.clone()), ty.clone()),
                        Witnesses::none(),
                        vec![child],
                    );
                }
                // then move the body over to the right, complemented
                let compr = n(
                    CompR,
                    formula(body.clone(), Type::comp(p.ty.clone())),
                    Witnesses::none(),
                    vec![child],
                );
                match_premises.push(compr);
            }
            let match_node = n(
                Match,
                formula(p.subject.clone(), Type::comp(p.ty.clone())),
                Witnesses::thetas(d.witnesses.thetas.clone()),
                match_premises,
            );
            Ok(n(SwapL, p, Witnesses::none(), vec![match_node]))
        }
        IfL => {
            let p = p.unwrap();
            let (m, _, _) = match as_if(&p.subject) {
                Some((m, n, e)) => (m.clone(), n.clone(), e.clone()),
                None => unreachable!(),
            };
            let mut it = children.into_iter();
            let guard = it.next().unwrap();
            let then_d = it.next().unwrap();
            let else_d = it.next().unwrap();
            let then_w = weaken_left(&then_d, &premises[1], &formula(m.clone(), Type::atom("true")))?;
            let else_w = weaken_left(&else_d, &premises[2], &formula(m, Type::atom("false")))?;
            let thetas = vec![PatternTypeSubstitution::new(), PatternTypeSubstitution::new()];
            Ok(n(
                MatchL,
                p,
                Witnesses::thetas(thetas),
                vec![guard, then_w, else_w],
            ))
        }
        Let => {
            let p = p.unwrap();
            let (x, nn) = match as_let(&p.subject) {
                Some((x, _, n)) => (x.clone(), n.clone()),
                None => unreachable!(),
            };
            let b = d.witnesses.via.clone().unwrap();
            let mut it = children.into_iter();
            let bound_child = it.next().unwrap();
            let body_child = it.next().unwrap();
            let abs = n(
                Abs,
                formula(Term::abs(&x, nn), Type::arrow(b.clone(), p.ty.clone())),
                Witnesses::none(),
                vec![body_child],
            );
            Ok(n(App, p, Witnesses::via(b), vec![abs, bound_child]))
        }
        LetL => {
            let p = p.unwrap();
            let (x, _, nn) = match as_let(&p.subject) {
                Some((x, m, n)) => (x.clone(), m.clone(), n.clone()),
                None => unreachable!(),
            };
            let b = d.witnesses.via.clone().unwrap();
            let mut it = children.into_iter();
            let body_child = it.next().unwrap();
            let bound_child = it.next().unwrap();
            let compr = n(
                CompR,
                formula(nn.clone(), Type::comp(p.ty.clone())),
                Witnesses::none(),
                vec![body_child],
            );
            let compl = n(
                CompL,
                formula(Term::Var(x.clone()), Type::comp(b.clone())),
                Witnesses::none(),
                vec![compr],
            );
            let abs = n(
                Abs,
                formula(
                    Term::abs(&x, nn),
                    Type::onlyto(b.clone(), p.ty.clone()),
                ),
                Witnesses::none(),
                vec![compl],
            );
            Ok(n(AppL, p, Witnesses::via(b), vec![abs, bound_child]))
        }
        CoAbs => {
            let p = p.unwrap();
            let (x, body) = match &p.subject {
                Term::Abs(x, b) => (x.clone(), (**b).clone()),
                _ => unreachable!(),
            };
            let (b, a) = as_coto(&p.ty).map_err(|NodeErr(r)| elab_err(d.rule, r))?;
            let child = children.into_iter().next().unwrap();
            let compr = n(
                CompR,
                formula(body, Type::comp(a.clone())),
                Witnesses::none(),
                vec![child],
            );
            let compl = n(
                CompL,
                formula(Term::Var(x), Type::comp(b.clone())),
                Witnesses::none(),
                vec![compr],
            );
            let arrow_ty = Type::onlyto(b, a);
            let abs = n(
                Abs,
                formula(p.subject.clone(), arrow_ty.clone()),
                Witnesses::none(),
                vec![compl],
            );
            let subr = n(
                SubR,
                formula(p.subject.clone(), Type::comp(p.ty.clone())),
                Witnesses::via(arrow_ty),
                vec![abs],
            );
            Ok(n(SwapL, p, Witnesses::none(), vec![subr]))
        }
        CoApp => {
            let p = p.unwrap();
            let (m, _) = match &p.subject {
                Term::App(m, nn) => ((**m).clone(), (**nn).clone()),
                _ => unreachable!(),
            };
            let b = d.witnesses.via.clone().unwrap();
            let mut it = children.into_iter();
            let fun_child = it.next().unwrap();
            let arg_child = it.next().unwrap();
            let swapr = n(
                SwapR,
                formula(m, Type::onlyto(b.clone(), p.ty.clone())),
                Witnesses::none(),
                vec![fun_child],
            );
            Ok(n(AppL, p, Witnesses::via(b), vec![swapr, arg_child]))
        }
        AbsL => {
            let p = p.unwrap();
            let (x, body) = match &p.subject {
                Term::Abs(x, b) => (x.clone(), (**b).clone()),
                _ => unreachable!(),
            };
            let (a, b) = match &p.ty {
                Type::Comp(inner) => match inner.as_ref() {
                    Type::Arrow(a, b) => ((**a).clone(), (**b).clone()),
                    _ => unreachable!(),
                },
                _ => unreachable!(),
            };
            let child = children.into_iter().next().unwrap();
            let swapr = n(
                SwapR,
                formula(body, b.clone()),
                Witnesses::none(),
                vec![child],
            );
            let swapl = n(
                SwapL,
                formula(Term::Var(x), a.clone()),
                Witnesses::none(),
                vec![swapr],
            );
            let arrow_ty = Type::arrow(a, b);
            let abs = n(
                Abs,
                formula(p.subject.clone(), arrow_ty.clone()),
                Witnesses::none(),
                vec![swapl],
            );
            let subr = n(
                SubR,
                formula(p.subject.clone(), Type::comp(p.ty.clone())),
                Witnesses::via(arrow_ty),
                vec![abs],
            );
            Ok(n(SwapL, p, Witnesses::none(), vec![subr]))
        }
        _ => Err(elab_err(d.rule, "not a derived rule")),
    }
}

// -------------------------------------------------------------------------
// Complete classification of normal forms.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NfTag {
    Value,
    Stuck,
}

#[derive(Clone, Debug)]
pub struct NotNormalFormError(pub Term);

impl fmt::Display for NotNormalFormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "term is not a closed normal form")
    }
}

/// The natural type of a value: Int for numerals, the literal for atoms,
/// Fun for abstractions, and componentwise for pairs.
fn natural_type(v: &Term) -> Type {
    match v {
        Term::Num(_) => Type::Int,
        Term::Atom(a) => Type::AtomLit(a.clone()),
        Term::Abs(_, _) => Type::fun_any(),
        Term::Pair(a, b) => Type::pair(natural_type(a), natural_type(b)),
        _ => unreachable!("natural_type is only defined on values"),
    }
}

/// Derives `|- v : natural_type(v)` using the value axioms.
fn natural_derivation(v: &Term) -> Derivation {
    match v {
        Term::Num(_) => Derivation::node(
            RuleName::Num,
            formula(v.clone(), Type::Int),
            Witnesses::none(),
            vec![],
        ),
        Term::Atom(a) => Derivation::node(
            RuleName::Atom,
            formula(v.clone(), Type::AtomLit(a.clone())),
            Witnesses::none(),
            vec![],
        ),
        Term::Abs(_, body) => {
            let top = Derivation::node(
                RuleName::Top,
                formula((**body).clone(), Type::Top),
                Witnesses::none(),
                vec![],
            );
            Derivation::node(
                RuleName::Abs,
                formula(v.clone(), Type::fun_any()),
                Witnesses::none(),
                vec![top],
            )
        }
        Term::Pair(a, b) => Derivation::node(
            RuleName::Pair,
            formula(v.clone(), natural_type(v)),
            Witnesses::none(),
            vec![natural_derivation(a), natural_derivation(b)],
        ),
        _ => unreachable!(),
    }
}

/// `|- v : Ok` via the natural type.
fn value_ok_derivation(v: &Term) -> Derivation {
    Derivation::node(
        RuleName::SubR,
        formula(v.clone(), Type::Ok),
        Witnesses::via(natural_type(v)),
        vec![natural_derivation(v)],
    )
}

/// Builds `|- s : ~Ok` with derived rules (elaborated by the caller).
fn stuck_not_ok_derivation(s: &Term) -> Derivation {
    use crate::reduction::is_stuck;
    use RuleName::*;
    let not_ok = |t: &Term| formula(t.clone(), Type::comp(Type::Ok));

    // |- u : ~T via the recursive classification (stuck) or the natural
    // type (value outside T)
    let refute = |u: &Term, target: Type| -> Derivation {
        if is_stuck(u) {
            Derivation::node(
                SubR,
                formula(u.clone(), Type::comp(target)),
                Witnesses::via(Type::comp(Type::Ok)),
                vec![stuck_not_ok_derivation(u)],
            )
        } else {
            Derivation::node(
                SubR,
                formula(u.clone(), Type::comp(target)),
                Witnesses::via(natural_type(u)),
                vec![natural_derivation(u)],
            )
        }
    };

    // the culprit's refutation, swapped to the left; the other operand's
    // context typing is threaded in unless the two formulas coincide
    let swap_in = |culprit: &Term, ty: Type, ctx_formula: TypingFormula, refutation: Derivation| {
        let culprit_formula = formula(culprit.clone(), ty);
        let inner = if ctx_formula == culprit_formula {
            refutation
        } else {
            Derivation::node(
                WeakL,
                culprit_formula.clone(),
                Witnesses::formula(ctx_formula),
                vec![refutation],
            )
        };
        Derivation::node(SwapL, culprit_formula, Witnesses::none(), vec![inner])
    };

    match s {
        Term::Pair(a, b) => {
            let (stuck_side, ctx_formula, stuck_term) = if is_stuck(a) {
                (refute(a, Type::Ok), formula((**b).clone(), Type::Ok), a)
            } else {
                (refute(b, Type::Ok), formula((**a).clone(), Type::Ok), b)
            };
            let swap = swap_in(stuck_term, Type::Ok, ctx_formula, stuck_side);
            let paire = Derivation::node(PairE, formula(s.clone(), Type::Ok), Witnesses::none(), vec![swap]);
            Derivation::node(CompR, not_ok(s), Witnesses::none(), vec![paire])
        }
        Term::BinOp(_, a, b) | Term::RelOp(_, a, b) => {
            let erule = if matches!(s, Term::BinOp(_, _, _)) { OpE } else { RelOpE };
            let (culprit, ctx_formula) = if !(matches!(**a, Term::Num(_))) {
                (a, formula((**b).clone(), Type::Int))
            } else {
                (b, formula((**a).clone(), Type::Int))
            };
            let refutation = refute(culprit, Type::Int);
            let swap = swap_in(culprit, Type::Int, ctx_formula, refutation);
            let e = Derivation::node(erule, formula(s.clone(), Type::Ok), Witnesses::none(), vec![swap]);
            Derivation::node(CompR, not_ok(s), Witnesses::none(), vec![e])
        }
        Term::App(f, _) => {
            let refutation = refute(f, Type::fun_any());
            let swap = Derivation::node(
                SwapL,
                formula((**f).clone(), Type::fun_any()),
                Witnesses::none(),
                vec![refutation],
            );
            let appe = Derivation::node(AppE, formula(s.clone(), Type::Ok), Witnesses::none(), vec![swap]);
            Derivation::node(CompR, not_ok(s), Witnesses::none(), vec![appe])
        }
        Term::Match(scrut, branches) => {
            let big = Type::union(branches.iter().map(|(p, _)| pattern_ok_type(p)).collect()).canon();
            let refutation = refute(scrut, big.clone());
            let swap = Derivation::node(
                SwapL,
                formula((**scrut).clone(), big),
                Witnesses::none(),
                vec![refutation],
            );
            let matche =
                Derivation::node(MatchE, formula(s.clone(), Type::Ok), Witnesses::none(), vec![swap]);
            Derivation::node(CompR, not_ok(s), Witnesses::none(), vec![matche])
        }
        _ => unreachable!("not a stuck term"),
    }
}

/// Classifies a closed normal form and returns an accepted primitive
/// derivation of `|- u : Ok` (value) or `|- u : ~Ok` (stuck).
pub fn classify_and_derive(u: &Term) -> Result<(NfTag, Sequent, Derivation), NotNormalFormError> {
    match classify_nf(u) {
        Ok(NfClass::Value) => {
            let root = Sequent::entails(vec![formula(u.clone(), Type::Ok)]);
            let d = value_ok_derivation(u);
            Ok((NfTag::Value, root, d))
        }
        Ok(NfClass::Stuck) => {
            let root = Sequent::entails(vec![formula(u.clone(), Type::comp(Type::Ok))]);
            let raw = stuck_not_ok_derivation(u);
            let d = elaborate(&root, &raw).map_err(|_| NotNormalFormError(u.clone()))?;
            Ok((NfTag::Stuck, root, d))
        }
        _ => Err(NotNormalFormError(u.clone())),
    }
}

// -------------------------------------------------------------------------
// Dynamic soundness probe.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DynamicVerdict {
    Consistent,
    Violated,
    Inconclusive,
}

/// Confronts an accepted conclusion with the evaluator: a certified
/// `|- M : A` with `A <= Ok` must not go wrong, one with `A <= ~Ok` must not
/// converge, and a refutation `M : Ok |-` must not converge.
pub fn dynamic_soundness_check(root: &Sequent, fuel: usize) -> DynamicVerdict {
    let mut dec = Decider::new();
    if root.left.is_empty() && root.right.len() == 1 {
        let f = root.right.iter().next().unwrap();
        if !f.subject.is_closed() {
            return DynamicVerdict::Inconclusive;
        }
        let below_ok = dec.subtype(&f.ty, &Type::Ok);
        let below_not_ok = dec.subtype(&f.ty, &Type::comp(Type::Ok));
        return match eval(&f.subject, fuel) {
            Ok(EvalOutcome::Converged { .. }) => {
                if below_not_ok {
                    DynamicVerdict::Violated
                } else {
                    DynamicVerdict::Consistent
                }
            }
            Ok(EvalOutcome::WentWrong { .. }) => {
                if below_ok {
                    DynamicVerdict::Violated
                } else {
                    DynamicVerdict::Consistent
                }
            }
            _ => DynamicVerdict::Inconclusive,
        };
    }
    if root.right.is_empty() && root.left.len() == 1 {
        let f = root.left.iter().next().unwrap();
        if !f.subject.is_closed() || f.ty != Type::Ok {
            return DynamicVerdict::Inconclusive;
        }
        return match eval(&f.subject, fuel) {
            Ok(EvalOutcome::Converged { .. }) => DynamicVerdict::Violated,
            Ok(EvalOutcome::WentWrong { .. }) => DynamicVerdict::Consistent,
            _ => DynamicVerdict::Inconclusive,
        };
    }
    DynamicVerdict::Inconclusive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::BinOp as Op;

    fn var(x: &str) -> Term {
        Term::var(x)
    }

    #[test]
    fn var_axiom_checks() {
        let f = formula(var("x"), Type::Int);
        let root = Sequent::new(vec![f.clone()], vec![f.clone()]);
        let d = Derivation::node(RuleName::Var, f, Witnesses::none(), vec![]);
        assert!(check(&root, &d).is_accepted());
    }

    #[test]
    fn num_axiom_rejects_wrong_type() {
        let f = formula(Term::num(3), Type::fun_any());
        let root = Sequent::entails(vec![f.clone()]);
        let d = Derivation::node(RuleName::Num, f, Witnesses::none(), vec![]);
        match check(&root, &d) {
            CheckReport::Rejected(fail) => assert_eq!(fail.rule, "Num"),
            _ => panic!("must reject"),
        }
    }

    #[test]
    fn section_4_ope_display() {
        // 3 * (fun x -> x) : Ok |-
        let idf = Term::abs("x", var("x"));
        let subject = Term::binop(Op::Mul, Term::num(3), idf.clone());
        let root = Sequent::refutes(vec![formula(subject.clone(), Type::Ok)]);

        let top = Derivation::node(
            RuleName::Top,
            formula(var("x"), Type::Top),
            Witnesses::none(),
            vec![],
        );
        let abs = Derivation::node(
            RuleName::Abs,
            formula(idf.clone(), Type::fun_any()),
            Witnesses::none(),
            vec![top],
        );
        let compl = Derivation::node(
            RuleName::CompL,
            formula(idf.clone(), Type::comp(Type::fun_any())),
            Witnesses::none(),
            vec![abs],
        );
        let subl = Derivation::node(
            RuleName::SubL,
            formula(idf.clone(), Type::Int),
            Witnesses::via(Type::comp(Type::fun_any())),
            vec![compl],
        );
        let ope = Derivation::node(
            RuleName::OpE,
            formula(subject, Type::Ok),
            Witnesses::none(),
            vec![subl],
        );
        assert!(check(&root, &ope).is_accepted());
    }

    #[test]
    fn section_4_appe_display() {
        // 3 (1, 2) : Ok |-
        let subject = Term::app(Term::num(3), Term::pair(Term::num(1), Term::num(2)));
        let root = Sequent::refutes(vec![formula(subject.clone(), Type::Ok)]);
        let num = Derivation::node(
            RuleName::Num,
            formula(Term::num(3), Type::Int),
            Witnesses::none(),
            vec![],
        );
        let compl = Derivation::node(
            RuleName::CompL,
            formula(Term::num(3), Type::comp(Type::Int)),
            Witnesses::none(),
            vec![num],
        );
        let subl = Derivation::node(
            RuleName::SubL,
            formula(Term::num(3), Type::fun_any()),
            Witnesses::via(Type::comp(Type::Int)),
            vec![compl],
        );
        let appe = Derivation::node(
            RuleName::AppE,
            formula(subject, Type::Ok),
            Witnesses::none(),
            vec![subl],
        );
        assert!(check(&root, &appe).is_accepted());
    }

    #[test]
    fn swap_elaborates() {
        // from |- 3 : ~~Int conclude 3 : ~Int |-
        let root = Sequent::refutes(vec![formula(Term::num(3), Type::comp(Type::Int))]);
        let num = Derivation::node(
            RuleName::Num,
            formula(Term::num(3), Type::Int),
            Witnesses::none(),
            vec![],
        );
        let subr = Derivation::node(
            RuleName::SubR,
            formula(Term::num(3), Type::comp(Type::comp(Type::Int))),
            Witnesses::via(Type::Int),
            vec![num],
        );
        let swap = Derivation::node(
            RuleName::SwapL,
            formula(Term::num(3), Type::comp(Type::Int)),
            Witnesses::none(),
            vec![subr],
        );
        // derived rules are accepted pre-elaboration, rejected by the
        // primitive checker
        assert!(check_allowing_derived(&root, &swap).is_accepted());
        match check(&root, &swap) {
            CheckReport::Rejected(f) => assert_eq!(f.rule, "SwapL"),
            _ => panic!("primitive checker must reject derived rules"),
        }
        let prim = elaborate(&root, &swap).unwrap();
        assert!(prim.uses_only_primitive_rules());
        assert!(check(&root, &prim).is_accepted());
        // elaborate is the identity on primitive trees
        let again = elaborate(&root, &prim).unwrap();
        assert_eq!(again, prim);
    }

    #[test]
    fn classification_examples() {
        let v = Term::abs("x", Term::app(Term::num(2), var("x")));
        let (tag, root, d) = classify_and_derive(&v).unwrap();
        assert_eq!(tag, NfTag::Value);
        assert!(check(&root, &d).is_accepted());

        let s = Term::app(Term::num(3), Term::pair(Term::num(1), Term::num(2)));
        let (tag, root, d) = classify_and_derive(&s).unwrap();
        assert_eq!(tag, NfTag::Stuck);
        assert!(check(&root, &d).is_accepted());
        assert_eq!(dynamic_soundness_check(&root, 100), DynamicVerdict::Consistent);

        let m = Term::match_term(Term::atom("a"), vec![(Pattern::patom("b"), Term::num(0))]);
        let (tag, root, d) = classify_and_derive(&m).unwrap();
        assert_eq!(tag, NfTag::Stuck);
        assert!(check(&root, &d).is_accepted());

        assert!(classify_and_derive(&Term::div()).is_err());
    }

    #[test]
    fn pairl1_expands_to_pair_top_compl() {
        // (1, 2) : ~Pair |-
        let subject = Term::pair(Term::num(1), Term::num(2));
        let root = Sequent::refutes(vec![formula(
            subject.clone(),
            Type::comp(Type::pair_any()),
        )]);
        let node = Derivation::node(
            RuleName::PairL1,
            formula(subject, Type::comp(Type::pair_any())),
            Witnesses::none(),
            vec![],
        );
        let prim = elaborate(&root, &node).unwrap();
        assert!(check(&root, &prim).is_accepted());
        assert_eq!(prim.rule, RuleName::CompL);
        assert_eq!(prim.premises[0].rule, RuleName::Pair);
        assert_eq!(prim.premises[0].premises[0].rule, RuleName::Top);
    }

    #[test]
    fn match0_expands_through_weakening() {
        // x : Bool |- if-style match over 'true/'false : Int with Match0
        let subject = Term::if_then_else(var("x"), Term::num(1), Term::num(0));
        let root = Sequent::new(
            vec![formula(var("x"), Type::bool_ty())],
            vec![formula(subject.clone(), Type::Int)],
        );
        let guard = Derivation::node(
            RuleName::Var,
            formula(var("x"), Type::bool_ty()),
            Witnesses::none(),
            vec![],
        );
        let one = Derivation::node(
            RuleName::Num,
            formula(Term::num(1), Type::Int),
            Witnesses::none(),
            vec![],
        );
        let zero = Derivation::node(
            RuleName::Num,
            formula(Term::num(0), Type::Int),
            Witnesses::none(),
            vec![],
        );
        let thetas = vec![
            crate::types::PatternTypeSubstitution::new(),
            crate::types::PatternTypeSubstitution::new(),
        ];
        let node = Derivation::node(
            RuleName::Match0,
            formula(subject, Type::Int),
            Witnesses::thetas(thetas),
            vec![guard, one, zero],
        );
        let prim = elaborate(&root, &node).unwrap();
        assert!(check(&root, &prim).is_accepted());
        assert_eq!(prim.rule, RuleName::Match);
    }

    #[test]
    fn weakening_preserves_shape() {
        let v = Term::pair(Term::num(1), Term::atom("a"));
        let (_, root, d) = classify_and_derive(&v).unwrap();
        let extra = formula(var("q"), Type::Int);
        let d2 = weaken_right(&d, &root, &extra).unwrap();
        assert_eq!(d.count_nodes(), d2.count_nodes());
        let root2 = root.with_right(extra);
        assert!(check(&root2, &d2).is_accepted());
    }

    #[test]
    fn dynamic_check_examples() {
        // |- (fun x -> x) 3 : Int is consistent
        let t = Term::app(Term::abs("x", var("x")), Term::num(3));
        let root = Sequent::entails(vec![formula(t, Type::Int)]);
        assert_eq!(dynamic_soundness_check(&root, 100), DynamicVerdict::Consistent);
        // |- div : Int is inconclusive
        let root = Sequent::entails(vec![formula(Term::div(), Type::Int)]);
        assert_eq!(dynamic_soundness_check(&root, 100), DynamicVerdict::Inconclusive);
    }
}
