//! Regular CCS process terms and their one-step semantics.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::value::{Action, Sym};

/// A regular CCS term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    Nil,
    Prefix(Action, Box<Process>),
    Choice(Vec<Process>),
    Rec(Sym, Box<Process>),
    Var(Sym),
}

impl Process {
    pub fn prefix(a: impl Into<Action>, p: Process) -> Process {
        Process::Prefix(a.into(), Box::new(p))
    }

    pub fn rec(x: &str, p: Process) -> Process {
        Process::Rec(crate::value::sym(x), Box::new(p))
    }

    /// Checks that the term is closed and every recursion variable is guarded.
    pub fn check(&self) -> Result<()> {
        fn go(p: &Process, bound: &mut Vec<Sym>, unguarded: &BTreeSet<Sym>) -> Result<()> {
            match p {
                Process::Nil => Ok(()),
                Process::Prefix(_, q) => go(q, bound, &BTreeSet::new()),
                Process::Choice(ps) => ps.iter().try_for_each(|q| go(q, bound, unguarded)),
                Process::Rec(x, q) => {
                    let mut ug = unguarded.clone();
                    ug.insert(x.clone());
                    bound.push(x.clone());
                    let r = go(q, bound, &ug);
                    bound.pop();
                    r
                }
                Process::Var(x) => {
                    if !bound.contains(x) {
                        Err(Error::UnboundVariable(x.to_string()))
                    } else if unguarded.contains(x) {
                        Err(Error::Unguarded(x.to_string()))
                    } else {
                        Ok(())
                    }
                }
            }
        }
        go(self, &mut Vec::new(), &BTreeSet::new())
    }

    /// Replaces free occurrences of `x` by the closed term `q`.
    pub fn subst(&self, x: &Sym, q: &Process) -> Process {
        match self {
            Process::Nil => Process::Nil,
            Process::Prefix(a, p) => Process::Prefix(a.clone(), Box::new(p.subst(x, q))),
            Process::Choice(ps) => Process::Choice(ps.iter().map(|p| p.subst(x, q)).collect()),
            Process::Rec(y, _) if y == x => self.clone(),
            Process::Rec(y, p) => Process::Rec(y.clone(), Box::new(p.subst(x, q))),
            Process::Var(y) if y == x => q.clone(),
            Process::Var(_) => self.clone(),
        }
    }

    /// All outgoing transitions, unfolding recursion as needed.
    pub fn transitions(&self) -> Vec<(Action, Process)> {
        let mut out = Vec::new();
        self.collect_transitions(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_transitions(&self, out: &mut Vec<(Action, Process)>) {
        match self {
            Process::Nil | Process::Var(_) => {}
            Process::Prefix(a, p) => out.push((a.clone(), (**p).clone())),
            Process::Choice(ps) => ps.iter().for_each(|p| p.collect_transitions(out)),
            Process::Rec(x, p) => p.subst(x, self).collect_transitions(out),
        }
    }

    /// Actions this term can ever perform.
    pub fn actions(&self) -> BTreeSet<Action> {
        let mut out = BTreeSet::new();
        fn go(p: &Process, out: &mut BTreeSet<Action>) {
            match p {
                Process::Nil | Process::Var(_) => {}
                Process::Prefix(a, q) => {
                    out.insert(a.clone());
                    go(q, out);
                }
                Process::Choice(ps) => ps.iter().for_each(|q| go(q, out)),
                Process::Rec(_, q) => go(q, out),
            }
        }
        go(self, &mut out);
        out
    }

    /// Recursion variables occurring free.
    pub fn free_vars(&self) -> BTreeSet<Sym> {
        fn go(p: &Process, bound: &mut Vec<Sym>, out: &mut BTreeSet<Sym>) {
            match p {
                Process::Nil => {}
                Process::Prefix(_, q) => go(q, bound, out),
                Process::Choice(ps) => ps.iter().for_each(|q| go(q, bound, out)),
                Process::Rec(x, q) => {
                    bound.push(x.clone());
                    go(q, bound, out);
                    bound.pop();
                }
                Process::Var(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// The term with bound recursion variables renamed by binding depth, so that
    /// alpha-equivalent terms become equal.
    pub fn canonical(&self) -> Process {
        fn go(p: &Process, env: &mut BTreeMap<Sym, Sym>, depth: usize) -> Process {
            match p {
                Process::Nil => Process::Nil,
                Process::Prefix(a, q) => Process::Prefix(a.clone(), Box::new(go(q, env, depth))),
                Process::Choice(ps) => {
                    Process::Choice(ps.iter().map(|q| go(q, env, depth)).collect())
                }
                Process::Rec(x, q) => {
                    let name: Sym = Sym::from(format!("#{depth}").as_str());
                    let old = env.insert(x.clone(), name.clone());
                    let body = go(q, env, depth + 1);
                    match old {
                        Some(o) => env.insert(x.clone(), o),
                        None => env.remove(x),
                    };
                    Process::Rec(name, Box::new(body))
                }
                Process::Var(x) => Process::Var(env.get(x).cloned().unwrap_or_else(|| x.clone())),
            }
        }
        go(self, &mut BTreeMap::new(), 0)
    }
}

/// The exact set of `a`-derivatives of `p`.
pub fn step(p: &Process, a: &Action) -> Vec<Process> {
    let mut out: Vec<Process> = p
        .transitions()
        .into_iter()
        .filter(|(b, _)| b == a)
        .map(|(_, q)| q)
        .collect();
    out.dedup();
    out
}

fn ends_open(p: &Process) -> bool {
    match p {
        Process::Rec(..) => true,
        Process::Prefix(_, q) => ends_open(q),
        _ => false,
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Nil => f.write_str("nil"),
            Process::Var(x) => f.write_str(x),
            Process::Prefix(a, q) => match **q {
                Process::Choice(_) => write!(f, "{a}.({q})"),
                _ => write!(f, "{a}.{q}"),
            },
            Process::Rec(x, q) => match **q {
                Process::Choice(_) => write!(f, "rec {x}.({q})"),
                _ => write!(f, "rec {x}.{q}"),
            },
            Process::Choice(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    if matches!(p, Process::Choice(_)) || (ends_open(p) && i + 1 < ps.len()) {
                        write!(f, "({p})")?;
                    } else {
                        write!(f, "{p}")?;
                    }
                }
                Ok(())
            }
        }
    }
}
