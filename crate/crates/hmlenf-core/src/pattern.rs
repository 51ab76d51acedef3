//! Patterns, symbolic events and symbolic transformations.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::cond::{Cond, Renaming, Subst};
use crate::error::{Error, Result};
use crate::value::{Action, Dir, Event, Sym, Value};

/// A pattern slot: a concrete value or a data variable.
///
/// `Tag` wraps a variable in a constructor, as in `err($x)`. It is only accepted in the
/// replacement pattern of a transformation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Val(Value),
    Var(Sym),
    Tag(Sym, Sym),
}

impl Slot {
    pub fn var(&self) -> Option<&Sym> {
        match self {
            Slot::Var(x) | Slot::Tag(_, x) => Some(x),
            Slot::Val(_) => None,
        }
    }

    fn subst(&self, s: &Subst) -> Slot {
        match self {
            Slot::Var(x) => s
                .get(x)
                .map_or_else(|| self.clone(), |v| Slot::Val(v.clone())),
            Slot::Tag(t, x) => match s.get(x).and_then(|v| Value::tagged(t, v.clone())) {
                Some(v) => Slot::Val(v),
                None => self.clone(),
            },
            v => v.clone(),
        }
    }

    fn rename(&self, r: &Renaming) -> Slot {
        let ren = |x: &Sym| r.get(x).cloned().unwrap_or_else(|| x.clone());
        match self {
            Slot::Var(x) => Slot::Var(ren(x)),
            Slot::Tag(t, x) => Slot::Tag(t.clone(), ren(x)),
            v => v.clone(),
        }
    }

    fn resolve(&self, s: &Subst) -> Option<Value> {
        match self {
            Slot::Val(v) => Some(v.clone()),
            Slot::Var(x) => s.get(x).cloned(),
            Slot::Tag(t, x) => Value::tagged(t, s.get(x)?.clone()),
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Val(v) => v.fmt(f),
            Slot::Var(x) => write!(f, "${x}"),
            Slot::Tag(t, x) => write!(f, "{t}(${x})"),
        }
    }
}

/// An event pattern `subject?payload` / `subject!payload` with value or variable slots.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    pub dir: Dir,
    pub subject: Slot,
    pub payload: Slot,
}

impl Pattern {
    pub fn new(dir: Dir, subject: Slot, payload: Slot) -> Pattern {
        Pattern {
            dir,
            subject,
            payload,
        }
    }

    /// The fully closed pattern denoting exactly `e`.
    pub fn of_event(e: &Event) -> Pattern {
        Pattern::new(
            e.dir,
            Slot::Val(e.subject.clone()),
            Slot::Val(e.payload.clone()),
        )
    }

    pub fn slots(&self) -> [&Slot; 2] {
        [&self.subject, &self.payload]
    }

    pub fn vars(&self) -> BTreeSet<Sym> {
        self.slots()
            .iter()
            .filter_map(|s| s.var().cloned())
            .collect()
    }

    pub fn is_fully_open(&self) -> bool {
        self.slots().iter().all(|s| s.var().is_some())
    }

    pub fn is_fully_closed(&self) -> bool {
        self.slots().iter().all(|s| s.var().is_none())
    }

    pub fn subst(&self, s: &Subst) -> Pattern {
        Pattern::new(self.dir, self.subject.subst(s), self.payload.subst(s))
    }

    pub fn rename(&self, r: &Renaming) -> Pattern {
        Pattern::new(self.dir, self.subject.rename(r), self.payload.rename(r))
    }

    /// Builds the concrete event `self σ`, if every slot resolves and the subject is an atom.
    pub fn instantiate(&self, s: &Subst) -> Option<Event> {
        let subject = self.subject.resolve(s)?;
        let payload = self.payload.resolve(s)?;
        subject.is_atom().then_some(Event {
            dir: self.dir,
            subject,
            payload,
        })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}({})", self.subject, self.dir.symbol(), self.payload)
    }
}

fn bind(s: &mut Subst, x: &Sym, v: &Value) -> bool {
    match s.get(x) {
        Some(w) => w == v,
        None => {
            s.insert(x.clone(), v.clone());
            true
        }
    }
}

/// Matches `p` against `e`, binding every variable of `p`.
pub fn match_pattern(p: &Pattern, e: &Event) -> Option<Subst> {
    if p.dir != e.dir {
        return None;
    }
    let mut s = Subst::new();
    for (slot, v) in [(&p.subject, &e.subject), (&p.payload, &e.payload)] {
        match slot {
            Slot::Val(w) if w == v => {}
            Slot::Val(_) => return None,
            Slot::Var(x) => {
                if !bind(&mut s, x, v) {
                    return None;
                }
            }
            Slot::Tag(t, x) => match v {
                Value::Tagged(u, inner) if u == t => {
                    if !bind(&mut s, x, inner) {
                        return None;
                    }
                }
                _ => return None,
            },
        }
    }
    Some(s)
}

/// Returns the bijective renaming `r` with `p2 r = p1`, if one exists.
pub fn pattern_equivalent(p1: &Pattern, p2: &Pattern) -> Option<Renaming> {
    if p1.dir != p2.dir {
        return None;
    }
    let mut fwd = Renaming::new();
    let mut back = Renaming::new();
    for (a, b) in [(&p1.subject, &p2.subject), (&p1.payload, &p2.payload)] {
        match (a, b) {
            (Slot::Val(v), Slot::Val(w)) if v == w => {}
            (Slot::Var(x), Slot::Var(y)) | (Slot::Tag(_, x), Slot::Tag(_, y))
                if same_shape(a, b) =>
            {
                if *fwd.entry(y.clone()).or_insert_with(|| x.clone()) != *x
                    || *back.entry(x.clone()).or_insert_with(|| y.clone()) != *y
                {
                    return None;
                }
            }
            _ => return None,
        }
    }
    Some(fwd)
}

fn same_shape(a: &Slot, b: &Slot) -> bool {
    match (a, b) {
        (Slot::Tag(t, _), Slot::Tag(u, _)) => t == u,
        _ => true,
    }
}

/// A symbolic event `⟨p, c⟩`.
///
/// `binders` records which pattern variables this event introduces. The remaining pattern
/// and condition variables refer to binders of enclosing prefixes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymEvent {
    pub pattern: Pattern,
    pub cond: Cond,
    pub binders: BTreeSet<Sym>,
}

impl SymEvent {
    /// An event whose pattern variables are all binders.
    pub fn new(pattern: Pattern, cond: Cond) -> SymEvent {
        let binders = pattern.vars();
        SymEvent {
            pattern,
            cond,
            binders,
        }
    }

    /// An event whose pattern variables already in `scope` are references.
    pub fn in_scope(pattern: Pattern, cond: Cond, scope: &BTreeSet<Sym>) -> SymEvent {
        let binders = pattern.vars().difference(scope).cloned().collect();
        SymEvent {
            pattern,
            cond,
            binders,
        }
    }

    pub fn of_event(e: &Event) -> SymEvent {
        SymEvent::new(Pattern::of_event(e), Cond::True)
    }

    /// Variables used but not bound here.
    pub fn refs(&self) -> BTreeSet<Sym> {
        let mut all = self.pattern.vars();
        self.cond.collect_vars(&mut all);
        all.retain(|x| !self.binders.contains(x));
        all
    }

    /// Matches `e`; errors if a reference is still unresolved.
    pub fn try_match(&self, e: &Event) -> Result<Option<Subst>> {
        if let Some(x) = self.refs().into_iter().next() {
            return Err(Error::OpenCondition(x));
        }
        let Some(s) = match_pattern(&self.pattern, e) else {
            return Ok(None);
        };
        Ok(self.cond.eval(&s)?.then_some(s))
    }

    /// Applies `s` to the references of this event, leaving its binders alone.
    pub fn subst(&self, s: &Subst) -> SymEvent {
        let s = restrict(s, &self.binders);
        if s.is_empty() {
            return self.clone();
        }
        SymEvent {
            pattern: self.pattern.subst(&s),
            cond: self.cond.subst(&s),
            binders: self.binders.clone(),
        }
    }

    /// Renames every occurrence of a name, binders included.
    pub fn rename(&self, r: &Renaming) -> SymEvent {
        SymEvent {
            pattern: self.pattern.rename(r),
            cond: self.cond.rename(r),
            binders: self
                .binders
                .iter()
                .map(|x| r.get(x).cloned().unwrap_or_else(|| x.clone()))
                .collect(),
        }
    }

    /// Renames only the free references.
    pub fn rename_refs(&self, r: &Renaming) -> SymEvent {
        let r: Renaming = r
            .iter()
            .filter(|(k, _)| !self.binders.contains(*k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        self.rename(&r)
    }
}

impl fmt::Display for SymEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pattern)?;
        if self.cond != Cond::True {
            write!(f, " when {}", self.cond)?;
        }
        Ok(())
    }
}

/// `s` without the entries for `bound`.
pub fn restrict(s: &Subst, bound: &BTreeSet<Sym>) -> Subst {
    if bound.iter().any(|b| s.contains_key(b)) {
        s.iter()
            .filter(|(k, _)| !bound.contains(*k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    } else {
        s.clone()
    }
}

/// `mtchS`: the substitution produced when `e` is in the denotation of `eta`.
pub fn match_symbolic(eta: &SymEvent, e: &Event) -> Option<Subst> {
    eta.try_match(e).ok().flatten()
}

/// A symbolic transformation `⟨p, c, p'⟩`; `replacement = None` stands for suppression.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymTrans {
    pub source: SymEvent,
    pub replacement: Option<Pattern>,
}

impl SymTrans {
    pub fn new(source: SymEvent, replacement: Option<Pattern>) -> SymTrans {
        SymTrans {
            source,
            replacement,
        }
    }

    /// The identity transformation on `source`.
    pub fn identity(source: SymEvent) -> SymTrans {
        let rep = source.pattern.clone();
        SymTrans::new(source, Some(rep))
    }

    pub fn suppress(source: SymEvent) -> SymTrans {
        SymTrans::new(source, None)
    }

    /// Every replacement variable occurs in the source pattern.
    pub fn is_closed(&self) -> bool {
        self.replacement
            .as_ref()
            .is_none_or(|p| p.vars().is_subset(&self.source.pattern.vars()))
    }

    pub fn subst(&self, s: &Subst) -> SymTrans {
        let inner = restrict(s, &self.source.binders);
        SymTrans {
            source: self.source.subst(s),
            replacement: self.replacement.as_ref().map(|p| p.subst(&inner)),
        }
    }

    pub fn rename(&self, r: &Renaming) -> SymTrans {
        SymTrans {
            source: self.source.rename(r),
            replacement: self.replacement.as_ref().map(|p| p.rename(r)),
        }
    }
}

impl fmt::Display for SymTrans {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> ", self.source)?;
        match &self.replacement {
            Some(p) => write!(f, "{p}"),
            None => f.write_str("tau"),
        }
    }
}

/// Applies `t` to `e`, returning the output action and the binding substitution.
pub fn apply_transformation(t: &SymTrans, e: &Event) -> Option<(Action, Subst)> {
    let s = match_symbolic(&t.source, e)?;
    let out = match &t.replacement {
        None => Action::Tau,
        Some(p) => Action::Ev(p.instantiate(&s)?),
    };
    Some((out, s))
}

/// All events over a finite universe: atom subjects, any payload, both directions.
pub fn universe_events(universe: &[Value]) -> Vec<Event> {
    let mut out = Vec::new();
    for dir in [Dir::In, Dir::Out] {
        for subj in universe.iter().filter(|v| v.is_atom()) {
            for pay in universe {
                out.push(Event {
                    dir,
                    subject: subj.clone(),
                    payload: pay.clone(),
                });
            }
        }
    }
    out
}

/// True iff exactly one event of the universe lies in the denotation of `eta`.
pub fn is_singleton(eta: &SymEvent, universe: &[Value]) -> bool {
    universe_events(universe)
        .iter()
        .filter(|e| match_symbolic(eta, e).is_some())
        .take(2)
        .count()
        == 1
}
