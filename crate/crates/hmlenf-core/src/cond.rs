//! Filtering conditions over data variables.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::value::{Sym, Value};

/// Finite map from data variables to values.
pub type Subst = BTreeMap<Sym, Value>;

/// Variable-to-variable renaming.
pub type Renaming = BTreeMap<Sym, Sym>;

/// One side of an atomic comparison.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Sym),
    Val(Value),
}

impl Term {
    fn resolve(&self, s: &Subst) -> Result<Value, Error> {
        match self {
            Term::Val(v) => Ok(v.clone()),
            Term::Var(x) => s
                .get(x)
                .cloned()
                .ok_or_else(|| Error::OpenCondition(x.clone())),
        }
    }

    fn subst(&self, s: &Subst) -> Term {
        match self {
            Term::Var(x) => match s.get(x) {
                Some(v) => Term::Val(v.clone()),
                None => self.clone(),
            },
            t => t.clone(),
        }
    }

    fn rename(&self, r: &Renaming) -> Term {
        match self {
            Term::Var(x) => Term::Var(r.get(x).cloned().unwrap_or_else(|| x.clone())),
            t => t.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "${x}"),
            Term::Val(v) => v.fmt(f),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn text(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn is_order(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    /// Applies the operator. Orderings hold only between integers.
    pub fn holds(self, a: &Value, b: &Value) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            _ => match (a.as_int(), b.as_int()) {
                (Some(x), Some(y)) => match self {
                    CmpOp::Lt => x < y,
                    CmpOp::Le => x <= y,
                    CmpOp::Gt => x > y,
                    _ => x >= y,
                },
                _ => false,
            },
        }
    }

    /// The operator obtained by swapping operands.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            o => o,
        }
    }
}

/// Boolean condition AST.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cond {
    True,
    False,
    Cmp(Term, CmpOp, Term),
    /// `t in S` or, when the flag is set, `t notin S`. The set is kept sorted.
    Member(Term, Vec<Value>, bool),
    Not(Box<Cond>),
    And(Vec<Cond>),
    Or(Vec<Cond>),
}

impl Cond {
    pub fn cmp_var(x: &Sym, op: CmpOp, v: Value) -> Cond {
        Cond::Cmp(Term::Var(x.clone()), op, Term::Val(v))
    }

    pub fn eq_vars(x: &Sym, y: &Sym) -> Cond {
        Cond::Cmp(Term::Var(x.clone()), CmpOp::Eq, Term::Var(y.clone()))
    }

    pub fn member(t: Term, mut set: Vec<Value>, negated: bool) -> Cond {
        set.sort();
        set.dedup();
        Cond::Member(t, set, negated)
    }

    /// Conjunction that flattens nested conjunctions and drops `tt`.
    pub fn and_all<I: IntoIterator<Item = Cond>>(items: I) -> Cond {
        let mut out = Vec::new();
        for c in items {
            match c {
                Cond::True => {}
                Cond::False => return Cond::False,
                Cond::And(cs) => out.extend(cs),
                c => out.push(c),
            }
        }
        match out.len() {
            0 => Cond::True,
            1 => out.pop().unwrap(),
            _ => Cond::And(out),
        }
    }

    /// Disjunction that flattens nested disjunctions and drops `ff`.
    pub fn or_all<I: IntoIterator<Item = Cond>>(items: I) -> Cond {
        let mut out = Vec::new();
        for c in items {
            match c {
                Cond::False => {}
                Cond::True => return Cond::True,
                Cond::Or(cs) => out.extend(cs),
                c => out.push(c),
            }
        }
        match out.len() {
            0 => Cond::False,
            1 => out.pop().unwrap(),
            _ => Cond::Or(out),
        }
    }

    pub fn negate(self) -> Cond {
        match self {
            Cond::True => Cond::False,
            Cond::False => Cond::True,
            Cond::Not(c) => *c,
            c => Cond::Not(Box::new(c)),
        }
    }

    /// Evaluates the condition under `s`; fails if a variable is unbound.
    pub fn eval(&self, s: &Subst) -> Result<bool, Error> {
        Ok(match self {
            Cond::True => true,
            Cond::False => false,
            Cond::Cmp(a, op, b) => op.holds(&a.resolve(s)?, &b.resolve(s)?),
            Cond::Member(t, set, neg) => set.contains(&t.resolve(s)?) != *neg,
            Cond::Not(c) => !c.eval(s)?,
            Cond::And(cs) => {
                for c in cs {
                    if !c.eval(s)? {
                        return Ok(false);
                    }
                }
                true
            }
            Cond::Or(cs) => {
                for c in cs {
                    if c.eval(s)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    /// Replaces variables bound in `s` by their values.
    pub fn subst(&self, s: &Subst) -> Cond {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Cond::True | Cond::False => self.clone(),
            Cond::Cmp(a, op, b) => Cond::Cmp(a.subst(s), *op, b.subst(s)),
            Cond::Member(t, set, n) => Cond::Member(t.subst(s), set.clone(), *n),
            Cond::Not(c) => Cond::Not(Box::new(c.subst(s))),
            Cond::And(cs) => Cond::And(cs.iter().map(|c| c.subst(s)).collect()),
            Cond::Or(cs) => Cond::Or(cs.iter().map(|c| c.subst(s)).collect()),
        }
    }

    pub fn rename(&self, r: &Renaming) -> Cond {
        match self {
            Cond::True | Cond::False => self.clone(),
            Cond::Cmp(a, op, b) => Cond::Cmp(a.rename(r), *op, b.rename(r)),
            Cond::Member(t, set, n) => Cond::Member(t.rename(r), set.clone(), *n),
            Cond::Not(c) => Cond::Not(Box::new(c.rename(r))),
            Cond::And(cs) => Cond::And(cs.iter().map(|c| c.rename(r)).collect()),
            Cond::Or(cs) => Cond::Or(cs.iter().map(|c| c.rename(r)).collect()),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Sym>) {
        let mut term = |t: &Term| {
            if let Term::Var(x) = t {
                out.insert(x.clone());
            }
        };
        match self {
            Cond::True | Cond::False => {}
            Cond::Cmp(a, _, b) => {
                term(a);
                term(b);
            }
            Cond::Member(t, _, _) => term(t),
            Cond::Not(c) => c.collect_vars(out),
            Cond::And(cs) | Cond::Or(cs) => cs.iter().for_each(|c| c.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_values(&self, out: &mut BTreeSet<Value>) {
        let mut term = |t: &Term| {
            if let Term::Val(v) = t {
                out.insert(v.clone());
            }
        };
        match self {
            Cond::True | Cond::False => {}
            Cond::Cmp(a, _, b) => {
                term(a);
                term(b);
            }
            Cond::Member(t, set, _) => {
                term(t);
                out.extend(set.iter().cloned());
            }
            Cond::Not(c) => c.collect_values(out),
            Cond::And(cs) | Cond::Or(cs) => cs.iter().for_each(|c| c.collect_values(out)),
        }
    }

    /// Folds closed atoms and boolean constants.
    pub fn simplify(&self) -> Cond {
        match self {
            Cond::Cmp(Term::Val(a), op, Term::Val(b)) => bool_cond(op.holds(a, b)),
            Cond::Cmp(Term::Var(x), CmpOp::Eq, Term::Var(y)) if x == y => Cond::True,
            Cond::Cmp(Term::Var(x), CmpOp::Ne, Term::Var(y)) if x == y => Cond::False,
            Cond::Member(Term::Val(v), set, n) => bool_cond(set.contains(v) != *n),
            Cond::Not(c) => c.simplify().negate(),
            Cond::And(cs) => Cond::and_all(cs.iter().map(Cond::simplify)),
            Cond::Or(cs) => Cond::or_all(cs.iter().map(Cond::simplify)),
            c => c.clone(),
        }
    }
}

fn bool_cond(b: bool) -> Cond {
    if b {
        Cond::True
    } else {
        Cond::False
    }
}

fn prec(c: &Cond) -> u8 {
    match c {
        Cond::Or(_) => 0,
        Cond::And(_) => 1,
        _ => 2,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, c: &Cond, min: u8) -> fmt::Result {
    if prec(c) < min {
        write!(f, "({c})")
    } else {
        write!(f, "{c}")
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::True => f.write_str("tt"),
            Cond::False => f.write_str("ff"),
            Cond::Cmp(a, op, b) => write!(f, "{a} {} {b}", op.text()),
            Cond::Member(t, set, n) => {
                write!(f, "{t} {} {{", if *n { "notin" } else { "in" })?;
                for (k, v) in set.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
            Cond::Not(c) => match **c {
                Cond::True | Cond::False | Cond::Not(_) => write!(f, "!{c}"),
                _ => write!(f, "!({c})"),
            },
            Cond::And(cs) | Cond::Or(cs) => {
                let (sep, min) = if matches!(self, Cond::And(_)) {
                    (" && ", 2)
                } else {
                    (" || ", 1)
                };
                for (k, c) in cs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(sep)?;
                    }
                    write_child(f, c, min)?;
                }
                Ok(())
            }
        }
    }
}
