//! Terms, patterns and capture-avoiding substitution.
//!
//! Terms are identified up to renaming of bound variables only where an
//! operation says so ([`alpha_eq`], reduction); everywhere else equality is
//! structural, so sequents and derivations compare deterministically.

use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub type Ident = String;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }

    pub fn apply(self, n: &BigInt, m: &BigInt) -> BigInt {
        match self {
            BinOp::Add => n + m,
            BinOp::Sub => n - m,
            BinOp::Mul => n * m,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelOp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }

    pub fn apply(self, n: &BigInt, m: &BigInt) -> bool {
        match self {
            RelOp::Eq => n == m,
            RelOp::Lt => n < m,
            RelOp::Le => n <= m,
            RelOp::Gt => n > m,
            RelOp::Ge => n >= m,
        }
    }
}

/// Linear first-order patterns over variables, atoms and pairs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pattern {
    Var(Ident),
    Atom(Ident),
    Pair(Box<Pattern>, Box<Pattern>),
}

impl Pattern {
    pub fn pvar(name: &str) -> Pattern {
        Pattern::Var(name.to_string())
    }

    pub fn patom(name: &str) -> Pattern {
        Pattern::Atom(name.to_string())
    }

    pub fn ppair(a: Pattern, b: Pattern) -> Pattern {
        Pattern::Pair(Box::new(a), Box::new(b))
    }

    /// Pattern variables in left-to-right order.
    pub fn vars(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Ident>) {
        match self {
            Pattern::Var(x) => out.push(x.clone()),
            Pattern::Atom(_) => {}
            Pattern::Pair(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn var_set(&self) -> BTreeSet<Ident> {
        self.vars().into_iter().collect()
    }

    /// No identifier occurs twice within the pattern.
    pub fn is_linear(&self) -> bool {
        let vars = self.vars();
        let set: BTreeSet<_> = vars.iter().collect();
        set.len() == vars.len()
    }

    /// Rename pattern variables according to `map` (non-capture concerns do
    /// not arise: patterns bind, they do not contain binders).
    pub fn rename(&self, map: &BTreeMap<Ident, Ident>) -> Pattern {
        match self {
            Pattern::Var(x) => Pattern::Var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
            Pattern::Atom(a) => Pattern::Atom(a.clone()),
            Pattern::Pair(a, b) => Pattern::ppair(a.rename(map), b.rename(map)),
        }
    }
}

/// True iff no term matches both patterns.  Requires linear inputs.
pub fn patterns_disjoint(p: &Pattern, q: &Pattern) -> bool {
    match (p, q) {
        (Pattern::Var(_), _) | (_, Pattern::Var(_)) => false,
        (Pattern::Atom(a), Pattern::Atom(b)) => a != b,
        (Pattern::Atom(_), Pattern::Pair(_, _)) | (Pattern::Pair(_, _), Pattern::Atom(_)) => true,
        (Pattern::Pair(a1, a2), Pattern::Pair(b1, b2)) => {
            patterns_disjoint(a1, b1) || patterns_disjoint(a2, b2)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Ident),
    Atom(Ident),
    Num(BigInt),
    Pair(Box<Term>, Box<Term>),
    Abs(Ident, Box<Term>),
    App(Box<Term>, Box<Term>),
    Fix(Ident, Box<Term>),
    BinOp(BinOp, Box<Term>, Box<Term>),
    RelOp(RelOp, Box<Term>, Box<Term>),
    Match(Box<Term>, Vec<(Pattern, Term)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermError {
    EmptyMatch,
    NonLinearPattern(Pattern),
    OverlappingPatterns(Pattern, Pattern),
    BadBinder(Ident),
}

impl fmt::Display for TermError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermError::EmptyMatch => write!(f, "match expression has no branches"),
            TermError::NonLinearPattern(p) => write!(f, "pattern {:?} is not linear", p),
            TermError::OverlappingPatterns(p, q) => {
                write!(f, "patterns {:?} and {:?} are not disjoint", p, q)
            }
            TermError::BadBinder(x) => write!(f, "ill-formed binder {:?}", x),
        }
    }
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn atom(name: &str) -> Term {
        Term::Atom(name.to_string())
    }

    pub fn num(n: i64) -> Term {
        Term::Num(BigInt::from(n))
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn abs(x: &str, body: Term) -> Term {
        Term::Abs(x.to_string(), Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn fix(x: &str, body: Term) -> Term {
        Term::Fix(x.to_string(), Box::new(body))
    }

    pub fn binop(op: BinOp, a: Term, b: Term) -> Term {
        Term::BinOp(op, Box::new(a), Box::new(b))
    }

    pub fn relop(op: RelOp, a: Term, b: Term) -> Term {
        Term::RelOp(op, Box::new(a), Box::new(b))
    }

    pub fn match_term(scrutinee: Term, branches: Vec<(Pattern, Term)>) -> Term {
        Term::Match(Box::new(scrutinee), branches)
    }

    /// `div`, the canonical diverging term.
    pub fn div() -> Term {
        Term::fix("x", Term::var("x"))
    }

    /// `let x = m in n`, i.e. the redex `(fun x -> n) m`.
    pub fn let_in(x: &str, m: Term, n: Term) -> Term {
        Term::app(Term::abs(x, n), m)
    }

    /// `if c then t else e` as a match on 'true / 'false.
    pub fn if_then_else(c: Term, t: Term, e: Term) -> Term {
        Term::match_term(
            c,
            vec![(Pattern::patom("true"), t), (Pattern::patom("false"), e)],
        )
    }

    pub fn is_closed(&self) -> bool {
        free_vars(self).is_empty()
    }

    /// Checks the structural invariants: matches are nonempty with linear,
    /// pairwise disjoint patterns, and binders are well formed.
    pub fn validate(&self) -> Result<(), TermError> {
        let check_binder = |x: &Ident| {
            if x.is_empty() || x.chars().any(|c| c.is_whitespace()) {
                Err(TermError::BadBinder(x.clone()))
            } else {
                Ok(())
            }
        };
        match self {
            Term::Var(_) | Term::Atom(_) | Term::Num(_) => Ok(()),
            Term::Pair(a, b) | Term::App(a, b) | Term::BinOp(_, a, b) | Term::RelOp(_, a, b) => {
                a.validate()?;
                b.validate()
            }
            Term::Abs(x, b) | Term::Fix(x, b) => {
                check_binder(x)?;
                b.validate()
            }
            Term::Match(s, branches) => {
                s.validate()?;
                if branches.is_empty() {
                    return Err(TermError::EmptyMatch);
                }
                for (p, n) in branches {
                    if !p.is_linear() {
                        return Err(TermError::NonLinearPattern(p.clone()));
                    }
                    for x in p.vars() {
                        check_binder(&x)?;
                    }
                    n.validate()?;
                }
                for i in 0..branches.len() {
                    for j in i + 1..branches.len() {
                        if !patterns_disjoint(&branches[i].0, &branches[j].0) {
                            return Err(TermError::OverlappingPatterns(
                                branches[i].0.clone(),
                                branches[j].0.clone(),
                            ));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// The set of identifiers with a free occurrence in `t`.  Pattern variables
/// bind in their branch body only.
pub fn free_vars(t: &Term) -> BTreeSet<Ident> {
    fn go(t: &Term, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
        match t {
            Term::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            Term::Atom(_) | Term::Num(_) => {}
            Term::Pair(a, b) | Term::App(a, b) | Term::BinOp(_, a, b) | Term::RelOp(_, a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Term::Abs(x, b) | Term::Fix(x, b) => {
                bound.push(x.clone());
                go(b, bound, out);
                bound.pop();
            }
            Term::Match(s, branches) => {
                go(s, bound, out);
                for (p, n) in branches {
                    let vars = p.vars();
                    for v in &vars {
                        bound.push(v.clone());
                    }
                    go(n, bound, out);
                    for _ in &vars {
                        bound.pop();
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// A finite map from term variables to terms, applied simultaneously and
/// capture-avoidingly.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TermSubstitution(pub BTreeMap<Ident, Term>);

impl TermSubstitution {
    pub fn new() -> Self {
        TermSubstitution(BTreeMap::new())
    }

    pub fn single(x: &str, t: Term) -> Self {
        let mut m = BTreeMap::new();
        m.insert(x.to_string(), t);
        TermSubstitution(m)
    }

    pub fn insert(&mut self, x: &str, t: Term) {
        self.0.insert(x.to_string(), t);
    }

    pub fn get(&self, x: &str) -> Option<&Term> {
        self.0.get(x)
    }

    pub fn domain(&self) -> BTreeSet<Ident> {
        self.0.keys().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn restrict(&self, fv: &BTreeSet<Ident>) -> TermSubstitution {
        TermSubstitution(
            self.0
                .iter()
                .filter(|(k, _)| fv.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }

    fn range_free_vars(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        for t in self.0.values() {
            out.extend(free_vars(t));
        }
        out
    }
}

/// Least numeric suffix on `base` not present in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Ident>) -> Ident {
    let mut k = 1u64;
    loop {
        let cand = format!("{}{}", base, k);
        if !avoid.contains(&cand) {
            return cand;
        }
        k += 1;
    }
}

/// Simultaneous capture-avoiding substitution.
pub fn apply_subst(t: &Term, s: &TermSubstitution) -> Term {
    let live = s.restrict(&free_vars(t));
    if live.is_empty() {
        return t.clone();
    }
    subst_go(t, &live)
}

fn subst_go(t: &Term, s: &TermSubstitution) -> Term {
    match t {
        Term::Var(x) => match s.get(x) {
            Some(u) => u.clone(),
            None => t.clone(),
        },
        Term::Atom(_) | Term::Num(_) => t.clone(),
        Term::Pair(a, b) => Term::pair(subst_go(a, s), subst_go(b, s)),
        Term::App(a, b) => Term::app(subst_go(a, s), subst_go(b, s)),
        Term::BinOp(op, a, b) => Term::binop(*op, subst_go(a, s), subst_go(b, s)),
        Term::RelOp(op, a, b) => Term::relop(*op, subst_go(a, s), subst_go(b, s)),
        Term::Abs(x, body) => {
            let (x2, body2, s2) = subst_under_binder(x, body, s);
            match s2 {
                None => Term::Abs(x2, Box::new(body2)),
                Some(s2) => Term::Abs(x2, Box::new(subst_go(&body2, &s2))),
            }
        }
        Term::Fix(x, body) => {
            let (x2, body2, s2) = subst_under_binder(x, body, s);
            match s2 {
                None => Term::Fix(x2, Box::new(body2)),
                Some(s2) => Term::Fix(x2, Box::new(subst_go(&body2, &s2))),
            }
        }
        Term::Match(scrut, branches) => {
            let scrut2 = subst_go(scrut, s);
            let branches2 = branches
                .iter()
                .map(|(p, n)| subst_branch(p, n, s))
                .collect();
            Term::Match(Box::new(scrut2), branches2)
        }
    }
}

/// Substitution under a single binder.  Returns the (possibly renamed)
/// binder, the (possibly renamed) body and the live substitution, or `None`
/// if nothing remains to substitute.
fn subst_under_binder(
    x: &Ident,
    body: &Term,
    s: &TermSubstitution,
) -> (Ident, Term, Option<TermSubstitution>) {
    let mut live = s.clone();
    live.0.remove(x);
    let body_fv = free_vars(body);
    live = live.restrict(&body_fv);
    if live.is_empty() {
        return (x.clone(), body.clone(), None);
    }
    if live.range_free_vars().contains(x) {
        let mut avoid: BTreeSet<Ident> = body_fv;
        avoid.extend(live.range_free_vars());
        avoid.extend(live.domain());
        avoid.insert(x.clone());
        let x2 = fresh_name(x, &avoid);
        live.0.insert(x.clone(), Term::Var(x2.clone()));
        (x2, body.clone(), Some(live))
    } else {
        (x.clone(), body.clone(), Some(live))
    }
}

fn subst_branch(p: &Pattern, n: &Term, s: &TermSubstitution) -> (Pattern, Term) {
    let pvars = p.var_set();
    let mut live = s.clone();
    for v in &pvars {
        live.0.remove(v);
    }
    let n_fv = free_vars(n);
    live = live.restrict(&n_fv);
    if live.is_empty() {
        return (p.clone(), n.clone());
    }
    let range_fv = live.range_free_vars();
    let clashing: Vec<Ident> = pvars.iter().filter(|v| range_fv.contains(*v)).cloned().collect();
    if clashing.is_empty() {
        return (p.clone(), subst_go(n, &live));
    }
    let mut avoid: BTreeSet<Ident> = n_fv;
    avoid.extend(range_fv);
    avoid.extend(live.domain());
    avoid.extend(pvars.iter().cloned());
    let mut renaming = BTreeMap::new();
    for v in clashing {
        let v2 = fresh_name(&v, &avoid);
        avoid.insert(v2.clone());
        live.0.insert(v.clone(), Term::Var(v2.clone()));
        renaming.insert(v, v2);
    }
    (p.rename(&renaming), subst_go(n, &live))
}

/// True iff the terms differ only in the names of bound variables.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, la: &mut Vec<Ident>, lb: &mut Vec<Ident>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let ia = la.iter().rposition(|v| v == x);
                let ib = lb.iter().rposition(|v| v == y);
                match (ia, ib) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Term::Atom(x), Term::Atom(y)) => x == y,
            (Term::Num(n), Term::Num(m)) => n == m,
            (Term::Pair(a1, a2), Term::Pair(b1, b2)) | (Term::App(a1, a2), Term::App(b1, b2)) => {
                go(a1, b1, la, lb) && go(a2, b2, la, lb)
            }
            (Term::BinOp(o1, a1, a2), Term::BinOp(o2, b1, b2)) => {
                o1 == o2 && go(a1, b1, la, lb) && go(a2, b2, la, lb)
            }
            (Term::RelOp(o1, a1, a2), Term::RelOp(o2, b1, b2)) => {
                o1 == o2 && go(a1, b1, la, lb) && go(a2, b2, la, lb)
            }
            (Term::Abs(x, ba), Term::Abs(y, bb)) | (Term::Fix(x, ba), Term::Fix(y, bb)) => {
                la.push(x.clone());
                lb.push(y.clone());
                let r = go(ba, bb, la, lb);
                la.pop();
                lb.pop();
                r
            }
            (Term::Match(sa, bra), Term::Match(sb, brb)) => {
                if !go(sa, sb, la, lb) || bra.len() != brb.len() {
                    return false;
                }
                bra.iter().zip(brb.iter()).all(|((pa, na), (pb, nb))| {
                    if !pattern_shape_eq(pa, pb) {
                        return false;
                    }
                    let va = pa.vars();
                    let vb = pb.vars();
                    for v in &va {
                        la.push(v.clone());
                    }
                    for v in &vb {
                        lb.push(v.clone());
                    }
                    let r = go(na, nb, la, lb);
                    for _ in &va {
                        la.pop();
                    }
                    for _ in &vb {
                        lb.pop();
                    }
                    r
                })
            }
            _ => false,
        }
    }
    fn pattern_shape_eq(p: &Pattern, q: &Pattern) -> bool {
        match (p, q) {
            (Pattern::Var(_), Pattern::Var(_)) => true,
            (Pattern::Atom(a), Pattern::Atom(b)) => a == b,
            (Pattern::Pair(a1, a2), Pattern::Pair(b1, b2)) => {
                pattern_shape_eq(a1, b1) && pattern_shape_eq(a2, b2)
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new(), &mut Vec::new())
}

/// Renames a free variable throughout a term (capture-avoiding).
pub fn rename_free_var(t: &Term, from: &str, to: &str) -> Term {
    apply_subst(t, &TermSubstitution::single(from, Term::var(to)))
}
