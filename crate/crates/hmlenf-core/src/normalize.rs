//! sHML normalization: standard form, systems of equations, pattern opening, uniform
//! naming, condition reformulation, subset construction and reconstruction.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cond::{CmpOp, Cond, Renaming, Term};
use crate::error::{Error, Result};
use crate::formula::{fresh_name, Formula};
use crate::pattern::{pattern_equivalent, Pattern, Slot, SymEvent};
use crate::solver::Solver;
use crate::value::{sym, Dir, Sym};

/// Upper bound on generated states and truth combinations.
pub const NORMALIZE_BUDGET: usize = 100_000;

/// Largest number of distinct sibling conditions split into truth combinations.
const MAX_COMBINED: usize = 12;

/// A system of equations `⟨Eq, X, Y⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSystem {
    /// Equations in creation order.
    pub equations: Vec<(Sym, Formula)>,
    pub principal: Sym,
    /// Logical variables referenced but not defined.
    pub free: BTreeSet<Sym>,
}

/// Sort key placing generated names `X<n>` first, numerically.
fn nat_key(s: &Sym) -> (u8, u64, Sym) {
    match s.strip_prefix('X').and_then(|d| d.parse::<u64>().ok()) {
        Some(n) if !s[1..].starts_with('0') || s.len() == 2 => (0, n, s.clone()),
        _ => (1, 0, s.clone()),
    }
}

fn conjuncts(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::And(fs) => fs.iter().flat_map(conjuncts).collect(),
        _ => vec![f],
    }
}

fn cond_conjuncts(c: &Cond) -> Vec<Cond> {
    match c {
        Cond::And(cs) => cs.iter().flat_map(cond_conjuncts).collect(),
        Cond::True => Vec::new(),
        c => vec![c.clone()],
    }
}

/// Rewrites the necessity conjuncts `[η]X` of an equation right-hand side.
fn map_necs(
    rhs: &Formula,
    mut g: impl FnMut(&SymEvent, &Sym) -> Result<Vec<Formula>>,
) -> Result<Formula> {
    let mut out = Vec::new();
    for c in conjuncts(rhs) {
        match c {
            Formula::Nec(e, t) => match &**t {
                Formula::Var(x) => out.extend(g(e, x)?),
                _ => out.push(c.clone()),
            },
            _ => out.push(c.clone()),
        }
    }
    let mut seen = BTreeSet::new();
    out.retain(|f| seen.insert(f.clone()));
    Ok(Formula::and_all(out))
}

/// Necessity conjuncts `(η, target)` of a right-hand side.
fn necs(rhs: &Formula) -> Vec<(&SymEvent, &Sym)> {
    conjuncts(rhs)
        .into_iter()
        .filter_map(|c| match c {
            Formula::Nec(e, t) => match &**t {
                Formula::Var(x) => Some((e, x)),
                _ => None,
            },
            _ => None,
        })
        .collect()
}

impl EquationSystem {
    pub fn get(&self, x: &Sym) -> Option<&Formula> {
        self.equations.iter().find(|(y, _)| y == x).map(|(_, f)| f)
    }

    fn defined(&self) -> BTreeSet<Sym> {
        self.equations.iter().map(|(x, _)| x.clone()).collect()
    }

    /// Equations ordered with the principal first, then by name.
    pub fn sorted(&self) -> Vec<&(Sym, Formula)> {
        let mut out: Vec<_> = self.equations.iter().collect();
        out.sort_by_key(|(x, _)| (x != &self.principal, nat_key(x)));
        out
    }

    /// Drops equations not reachable from the principal.
    pub fn prune(&mut self) {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.principal.clone()];
        while let Some(x) = stack.pop() {
            if !seen.insert(x.clone()) {
                continue;
            }
            if let Some(f) = self.get(&x) {
                stack.extend(f.free_lvars());
            }
        }
        self.equations.retain(|(x, _)| seen.contains(x));
    }

    /// Every data variable name used by the system.
    pub fn data_names(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        for (_, f) in &self.equations {
            f.data_names(&mut out);
        }
        out
    }

    fn replace(&self, equations: Vec<(Sym, Formula)>) -> EquationSystem {
        EquationSystem {
            equations,
            principal: self.principal.clone(),
            free: self.free.clone(),
        }
    }
}

impl fmt::Display for EquationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "principal: {}", self.principal)?;
        let free: Vec<&str> = self.free.iter().map(|x| &**x).collect();
        writeln!(f, "free: {{{}}}", free.join(", "))?;
        for (x, rhs) in self.sorted() {
            writeln!(f, "{x} = {rhs}")?;
        }
        Ok(())
    }
}

// standard form

/// Free logical variables not guarded by a modality.
pub fn free_unguarded(f: &Formula) -> BTreeSet<Sym> {
    match f {
        Formula::Var(x) => BTreeSet::from([x.clone()]),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().flat_map(free_unguarded).collect(),
        Formula::Max(x, g) | Formula::Min(x, g) => {
            let mut s = free_unguarded(g);
            s.remove(x);
            s
        }
        _ => BTreeSet::new(),
    }
}

fn sf(f: &Formula) -> Result<(Formula, Vec<Sym>)> {
    Ok(match f {
        Formula::Var(x) => (Formula::Tt, vec![x.clone()]),
        Formula::And(fs) => {
            let mut parts = Vec::new();
            let mut ys: Vec<Sym> = Vec::new();
            for g in fs {
                let (psi, zs) = sf(g)?;
                parts.push(psi);
                for z in zs {
                    if !ys.contains(&z) {
                        ys.push(z);
                    }
                }
            }
            (Formula::and_all(parts), ys)
        }
        Formula::Max(x, g) => {
            let (psi, mut ys) = sf(g)?;
            let unfolded = psi.subst_lvar(x, &Formula::Max(x.clone(), Box::new(psi.clone())));
            ys.retain(|y| y != x);
            (unfolded, ys)
        }
        Formula::Tt | Formula::Ff | Formula::Nec(..) => (f.clone(), Vec::new()),
        Formula::Or(_) | Formula::Pos(..) | Formula::Min(..) => return Err(Error::NotShml),
    })
}

/// Lifts free unguarded logical variables to the topmost conjunction.
pub fn standardize(phi: &Formula) -> Result<Formula> {
    let (psi, ys) = sf(phi)?;
    if ys.is_empty() {
        return Ok(psi);
    }
    let mut items = Vec::new();
    if psi != Formula::Tt {
        items.push(psi);
    }
    items.extend(ys.into_iter().map(Formula::Var));
    Ok(if items.len() == 1 {
        items.pop().unwrap()
    } else {
        Formula::And(items)
    })
}

/// Whether `phi` has the shape `ψ ∧ ⋀Y` with no free unguarded variable inside `ψ`.
pub fn is_standard_form(phi: &Formula) -> bool {
    let items = match phi {
        Formula::And(fs) => fs.iter().collect(),
        f => vec![f],
    };
    items
        .iter()
        .all(|f| matches!(f, Formula::Var(_)) || free_unguarded(f).is_empty())
}

// equations

struct EqBuilder {
    next: usize,
    avoid: BTreeSet<Sym>,
    eqs: Vec<(Sym, Formula)>,
}

impl EqBuilder {
    fn alloc(&mut self) -> Sym {
        loop {
            let s = sym(&format!("X{}", self.next));
            self.next += 1;
            if !self.avoid.contains(&s) {
                return s;
            }
        }
    }

    fn rhs(&self, x: &Sym) -> Formula {
        self.eqs
            .iter()
            .rev()
            .find(|(y, _)| y == x)
            .map(|(_, f)| f.clone())
            .unwrap_or(Formula::Tt)
    }

    /// Translates `f` into equations, using `slot` for its principal unless `f` is a
    /// fixpoint, whose principal is its own variable.
    fn tr(&mut self, f: &Formula, slot: Sym) -> Result<(Sym, BTreeSet<Sym>)> {
        Ok(match f {
            Formula::Tt | Formula::Ff => {
                self.eqs.push((slot.clone(), f.clone()));
                (slot, BTreeSet::new())
            }
            Formula::Var(y) => {
                self.eqs.push((slot.clone(), f.clone()));
                (slot, BTreeSet::from([y.clone()]))
            }
            Formula::And(fs) => {
                let slots: Vec<Sym> = fs.iter().map(|_| self.alloc()).collect();
                let mut free = BTreeSet::new();
                let mut parts = Vec::new();
                for (g, s) in fs.iter().zip(slots) {
                    let (p, fr) = self.tr(g, s)?;
                    free.extend(fr);
                    parts.push(self.rhs(&p));
                }
                self.eqs.push((slot.clone(), Formula::and_all(parts)));
                (slot, free)
            }
            Formula::Nec(e, g) => {
                let child = self.alloc();
                let (p, free) = self.tr(g, child)?;
                self.eqs.push((
                    slot.clone(),
                    Formula::Nec(e.clone(), Box::new(Formula::Var(p))),
                ));
                (slot, free)
            }
            Formula::Max(y, g) => {
                let (p, mut free) = self.tr(g, slot)?;
                let body = self.rhs(&p);
                self.eqs.push((y.clone(), body));
                free.remove(y);
                (y.clone(), free)
            }
            Formula::Or(_) | Formula::Pos(..) | Formula::Min(..) => return Err(Error::NotShml),
        })
    }
}

/// Converts a standard-form formula into a system of equations.
pub fn to_equations(phi: &Formula) -> Result<EquationSystem> {
    let mut avoid = BTreeSet::new();
    phi.lvar_names(&mut avoid);
    let mut b = EqBuilder {
        next: 0,
        avoid,
        eqs: Vec::new(),
    };
    let root = b.alloc();
    let (principal, free) = b.tr(phi, root)?;
    let mut sys = EquationSystem {
        equations: b.eqs,
        principal,
        free,
    };
    sys.prune();
    Ok(sys)
}

// opening

fn open_event(e: &SymEvent, avoid: &mut BTreeSet<Sym>) -> SymEvent {
    let mut seen = BTreeSet::new();
    let mut binders = e.binders.clone();
    let mut eqs = Vec::new();
    let mut open_slot = |s: &Slot, eqs: &mut Vec<Cond>| -> Slot {
        match s {
            Slot::Var(b) if e.binders.contains(b) && seen.insert(b.clone()) => s.clone(),
            Slot::Var(r) => {
                let v = fresh_name("v", avoid);
                avoid.insert(v.clone());
                binders.insert(v.clone());
                eqs.push(Cond::eq_vars(&v, r));
                Slot::Var(v)
            }
            Slot::Val(val) => {
                let v = fresh_name("v", avoid);
                avoid.insert(v.clone());
                binders.insert(v.clone());
                eqs.push(Cond::cmp_var(&v, CmpOp::Eq, val.clone()));
                Slot::Var(v)
            }
            Slot::Tag(..) => s.clone(),
        }
    };
    let subject = open_slot(&e.pattern.subject, &mut eqs);
    let payload = open_slot(&e.pattern.payload, &mut eqs);
    if eqs.is_empty() {
        return e.clone();
    }
    eqs.push(e.cond.clone());
    SymEvent {
        pattern: Pattern::new(e.pattern.dir, subject, payload),
        cond: Cond::and_all(eqs),
        binders,
    }
}

/// Replaces every value or reference in a pattern slot by a fresh binder constrained
/// equal to it.
pub fn open_patterns(sys: &EquationSystem) -> EquationSystem {
    let mut avoid = sys.data_names();
    let eqs = sys
        .equations
        .iter()
        .map(|(x, rhs)| {
            let f = map_necs(rhs, |e, t| {
                Ok(vec![Formula::nec(
                    open_event(e, &mut avoid),
                    Formula::Var(t.clone()),
                )])
            })
            .expect("opening is infallible");
            (x.clone(), f)
        })
        .collect();
    sys.replace(eqs)
}

fn is_open(e: &SymEvent) -> bool {
    let vs: Vec<Option<&Sym>> = [&e.pattern.subject, &e.pattern.payload]
        .iter()
        .map(|s| match s {
            Slot::Var(x) if e.binders.contains(x) => Some(x),
            _ => None,
        })
        .collect();
    matches!((vs[0], vs[1]), (Some(a), Some(b)) if a != b)
}

// traversal

/// Breadth-first traversal over sibling levels, never revisiting an equation.
fn traverse<A>(
    sys: &EquationSystem,
    mut acc: A,
    mut proj: impl FnMut(&[Sym], &[Sym], A) -> Result<A>,
) -> Result<A> {
    let mut remaining = sys.defined();
    let mut level = vec![sys.principal.clone()];
    while !remaining.is_empty() && !level.is_empty() {
        level.retain(|x| remaining.contains(x));
        let mut children = Vec::new();
        for j in &level {
            for (_, t) in sys.get(j).map(necs).unwrap_or_default() {
                if t != j && remaining.contains(t) && !children.contains(t) {
                    children.push(t.clone());
                }
            }
        }
        for j in &level {
            remaining.remove(j);
        }
        children.retain(|x| remaining.contains(x));
        children.sort_by_key(nat_key);
        acc = proj(&level, &children, acc)?;
        level = children;
    }
    Ok(acc)
}

struct Fresh {
    next: usize,
    avoid: BTreeSet<Sym>,
}

impl Fresh {
    fn take(&mut self) -> Sym {
        loop {
            self.next += 1;
            let s = sym(&format!("z{}", self.next));
            if self.avoid.insert(s.clone()) {
                return s;
            }
        }
    }
}

/// Renames pattern-equivalent sibling necessities to shared fresh variables and
/// propagates the renaming to references bound by renamed parents.
pub fn uniformize(sys: &EquationSystem) -> EquationSystem {
    let mut fresh = Fresh {
        next: 0,
        avoid: sys.data_names(),
    };
    let omega: BTreeMap<Sym, Renaming> = traverse(sys, BTreeMap::new(), |level, _, mut omega| {
        // sibling necessities of this level: (parent, target, event)
        let mut items: Vec<(Sym, Sym, SymEvent)> = Vec::new();
        for i in level {
            for (e, t) in sys.get(i).map(necs).unwrap_or_default() {
                items.push((i.clone(), t.clone(), e.clone()));
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (k, (_, _, e)) in items.iter().enumerate() {
            if !is_open(e) {
                groups.push(vec![k]);
                continue;
            }
            let g = groups.iter_mut().find(|g| {
                let rep = &items[g[0]].2;
                is_open(rep) && pattern_equivalent(&rep.pattern, &e.pattern).is_some()
            });
            match g {
                Some(g) => g.push(k),
                None => groups.push(vec![k]),
            }
        }
        for g in groups {
            let own: Vec<Renaming> = if g.len() < 2 {
                vec![Renaming::new()]
            } else {
                let rep = &items[g[0]].2.pattern;
                let names: Renaming = [&rep.subject, &rep.payload]
                    .iter()
                    .filter_map(|s| s.var().cloned())
                    .map(|v| (v, fresh.take()))
                    .collect();
                g.iter()
                    .map(|&k| {
                        let to_rep =
                            pattern_equivalent(rep, &items[k].2.pattern).unwrap_or_default();
                        to_rep
                            .iter()
                            .map(|(m, r)| (m.clone(), names[r].clone()))
                            .collect()
                    })
                    .collect()
            };
            for (pos, &k) in g.iter().enumerate() {
                let (i, t, e) = &items[k];
                if omega.contains_key(t) {
                    continue;
                }
                let own = own.get(pos).cloned().unwrap_or_default();
                let mut w: Renaming = omega
                    .get(i)
                    .map(|r: &Renaming| {
                        r.iter()
                            .filter(|(x, _)| !e.binders.contains(*x))
                            .map(|(a, b)| (a.clone(), b.clone()))
                            .collect()
                    })
                    .unwrap_or_default();
                w.extend(own);
                omega.insert(t.clone(), w);
            }
        }
        Ok(omega)
    })
    .expect("partition is infallible");
    let eqs = sys
        .equations
        .iter()
        .map(|(x, rhs)| {
            let f = map_necs(rhs, |e, t| {
                let e2 = omega.get(t).map_or_else(|| e.clone(), |w| e.rename(w));
                Ok(vec![Formula::nec(e2, Formula::Var(t.clone()))])
            })
            .expect("renaming is infallible");
            (x.clone(), f)
        })
        .collect();
    sys.replace(eqs)
}

/// Whether pattern-equivalent sibling necessities use identical patterns.
pub fn is_uniform(sys: &EquationSystem) -> bool {
    sys.equations.iter().all(|(_, rhs)| {
        let ns = necs(rhs);
        ns.iter().enumerate().all(|(a, (e1, _))| {
            ns[a + 1..].iter().all(|(e2, _)| {
                !(is_open(e1) && is_open(e2))
                    || pattern_equivalent(&e1.pattern, &e2.pattern).is_none()
                    || e1.pattern == e2.pattern
            })
        })
    })
}

// condition reformulation

fn combination(conds: &[Cond], mask: usize) -> Cond {
    let n = conds.len();
    Cond::and_all(conds.iter().enumerate().map(|(i, c)| {
        if (mask >> (n - 1 - i)) & 1 == 1 {
            c.clone()
        } else {
            c.clone().negate()
        }
    }))
}

/// Splits every necessity whose pattern is shared by siblings of its level into the
/// truth combinations of the sibling conditions that keep its own condition positive.
pub fn reformulate_conditions(
    sys: &EquationSystem,
    prune: bool,
    solver: &Solver,
) -> Result<EquationSystem> {
    let rewritten: BTreeMap<Sym, Formula> = traverse(sys, BTreeMap::new(), |level, _, mut acc| {
        let mut siblings: Vec<&SymEvent> = Vec::new();
        for i in level {
            siblings.extend(
                sys.get(i)
                    .map(necs)
                    .unwrap_or_default()
                    .into_iter()
                    .map(|(e, _)| e),
            );
        }
        for i in level {
            let rhs = sys.get(i).expect("level members are defined");
            let scope = rhs.free_data();
            let f = map_necs(rhs, |e, t| {
                let mut conds: Vec<Cond> = Vec::new();
                for s in &siblings {
                    // a sibling condition over data this node cannot see is left out
                    let visible = s
                        .cond
                        .vars()
                        .iter()
                        .all(|v| e.binders.contains(v) || scope.contains(v));
                    if visible
                        && s.pattern == e.pattern
                        && s.binders == e.binders
                        && !conds.contains(&s.cond)
                    {
                        conds.push(s.cond.clone());
                    }
                }
                if conds.len() < 2 {
                    return Ok(vec![Formula::nec(e.clone(), Formula::Var(t.clone()))]);
                }
                if conds.len() > MAX_COMBINED {
                    return Err(Error::StateBudget(1 << MAX_COMBINED));
                }
                let own = conds
                    .iter()
                    .position(|c| *c == e.cond)
                    .expect("own condition listed");
                let n = conds.len();
                let mut out = Vec::new();
                for mask in (1..1usize << n).rev() {
                    if (mask >> (n - 1 - own)) & 1 == 0 {
                        continue;
                    }
                    let ev = SymEvent {
                        cond: combination(&conds, mask),
                        ..e.clone()
                    };
                    if prune && !solver.event_sat(&ev)? {
                        continue;
                    }
                    out.push(Formula::nec(ev, Formula::Var(t.clone())));
                }
                Ok(out)
            })?;
            acc.insert(i.clone(), f);
        }
        Ok(acc)
    })?;
    let eqs = sys
        .equations
        .iter()
        .map(|(x, rhs)| {
            (
                x.clone(),
                rewritten.get(x).cloned().unwrap_or_else(|| rhs.clone()),
            )
        })
        .collect();
    Ok(sys.replace(eqs))
}

/// Whether sibling necessities overlap only when syntactically equal.
pub fn is_equi_disjoint(sys: &EquationSystem, solver: &Solver) -> Result<bool> {
    for (_, rhs) in &sys.equations {
        let ns = necs(rhs);
        for (a, (e1, _)) in ns.iter().enumerate() {
            for (e2, _) in &ns[a + 1..] {
                if e1 != e2 && !solver.disjoint(e1, e2)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Whether every equation is `ff`, `tt`, or a conjunction of necessities with pairwise
/// disjoint guards and free variables.
pub fn is_normalized(sys: &EquationSystem, solver: &Solver) -> Result<bool> {
    let defined = sys.defined();
    for (_, rhs) in &sys.equations {
        if conjuncts(rhs)
            .iter()
            .any(|c| matches!(c, Formula::Var(y) if defined.contains(y)) && rhs != *c)
        {
            return Ok(false);
        }
        let ns = necs(rhs);
        for (a, (e1, _)) in ns.iter().enumerate() {
            for (e2, _) in &ns[a + 1..] {
                if !solver.disjoint(e1, e2)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

// subset construction

/// An equation together with the renaming of the outer names it references.
type Member = (Sym, Vec<(Sym, Sym)>);

struct Det<'a> {
    sys: &'a EquationSystem,
    solver: &'a Solver,
    defined: BTreeSet<Sym>,
    /// Equations that hold of every process.
    trivial: BTreeSet<Sym>,
    /// Outer data names each equation depends on, transitively.
    refs: BTreeMap<Sym, BTreeSet<Sym>>,
    pool: Vec<Sym>,
    all_names: BTreeSet<Sym>,
    names: BTreeMap<Vec<Member>, Sym>,
    used_names: BTreeSet<Sym>,
    queue: VecDeque<Vec<Member>>,
    out: Vec<(Sym, Formula)>,
    free: BTreeSet<Sym>,
}

const PLACE_S: &str = "\u{1}s";
const PLACE_P: &str = "\u{1}p";

fn lookup(rho: &[(Sym, Sym)], x: &Sym) -> Sym {
    rho.iter()
        .find(|(a, _)| a == x)
        .map_or_else(|| x.clone(), |(_, b)| b.clone())
}

/// A guard in placeholder form, before the shared binder names are chosen.
struct Item {
    dir: Dir,
    cond: Cond,
    target: Sym,
    /// Continuation renaming with the guard's binders mapped to placeholders.
    rho: Vec<(Sym, Sym)>,
    prefer: [Option<Sym>; 2],
    outer: BTreeSet<Sym>,
}

impl<'a> Det<'a> {
    fn new(sys: &'a EquationSystem, solver: &'a Solver) -> Det<'a> {
        let defined = sys.defined();
        let trivial = trivially_true(sys);
        let mut refs: BTreeMap<Sym, BTreeSet<Sym>> = defined
            .iter()
            .map(|x| (x.clone(), BTreeSet::new()))
            .collect();
        loop {
            let mut changed = false;
            for (x, rhs) in &sys.equations {
                if trivial.contains(x) {
                    continue;
                }
                let mut acc = refs[x].clone();
                for c in conjuncts(rhs) {
                    match c {
                        Formula::Nec(_, t) if matches!(&**t, Formula::Var(t) if trivial.contains(t)) =>
                            {}
                        Formula::Nec(e, t) => {
                            acc.extend(e.refs());
                            if let Formula::Var(t) = &**t {
                                if let Some(r) = refs.get(t) {
                                    acc.extend(
                                        r.iter().filter(|n| !e.binders.contains(*n)).cloned(),
                                    );
                                }
                            }
                        }
                        Formula::Var(y) => {
                            if let Some(r) = refs.get(y) {
                                acc.extend(r.iter().cloned());
                            }
                        }
                        _ => {}
                    }
                }
                if acc.len() != refs[x].len() {
                    refs.insert(x.clone(), acc);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut pool = BTreeSet::new();
        for (_, rhs) in &sys.equations {
            for (e, _) in necs(rhs) {
                pool.extend(e.binders.iter().cloned());
            }
        }
        let all_names = sys.data_names();
        let mut pool: Vec<Sym> = pool.into_iter().collect();
        pool.sort_by_key(nat_key);
        Det {
            sys,
            solver,
            defined,
            trivial,
            refs,
            pool,
            all_names,
            names: BTreeMap::new(),
            used_names: BTreeSet::new(),
            queue: VecDeque::new(),
            out: Vec::new(),
            free: BTreeSet::new(),
        }
    }

    fn rhs(&self, x: &Sym) -> &Formula {
        self.sys.get(x).expect("member equations are defined")
    }

    fn restrict(&self, x: &Sym, rho: impl Fn(&Sym) -> Sym) -> Member {
        let rho = self.refs[x]
            .iter()
            .filter_map(|n| {
                let m = rho(n);
                (m != *n).then(|| (n.clone(), m))
            })
            .collect();
        (x.clone(), rho)
    }

    fn is_pure_ref(&self, x: &Sym) -> bool {
        let cs = conjuncts(self.rhs(x));
        cs.iter()
            .all(|c| matches!(c, Formula::Var(y) if self.defined.contains(y)))
    }

    /// Adds the equations referenced without a guard, then drops members that only
    /// forward to others.
    fn closure(&self, members: Vec<Member>) -> Vec<Member> {
        let mut set: BTreeSet<Member> = BTreeSet::new();
        let mut stack = members;
        while let Some(m) = stack.pop() {
            if !set.insert(m.clone()) {
                continue;
            }
            for c in conjuncts(self.rhs(&m.0)) {
                if let Formula::Var(y) = c {
                    if self.defined.contains(y) {
                        stack.push(self.restrict(y, |n| lookup(&m.1, n)));
                    }
                }
            }
        }
        let mut out: Vec<Member> = set
            .into_iter()
            .filter(|m| !self.is_pure_ref(&m.0))
            .collect();
        out.sort_by(|a, b| nat_key(&a.0).cmp(&nat_key(&b.0)).then(a.1.cmp(&b.1)));
        out
    }

    fn render(ids: &[&Sym]) -> String {
        if let [x] = ids {
            if nat_key(x).0 == 1 {
                return String::from(&***x);
            }
        }
        let parts: Vec<String> = ids
            .iter()
            .map(|x| match nat_key(x) {
                (0, n, _) => format!("{n}"),
                _ => String::from(&***x),
            })
            .collect();
        format!("X_{{{}}}", parts.join(","))
    }

    fn state(&mut self, members: Vec<Member>) -> Result<Sym> {
        if let Some(x) = self.names.get(&members) {
            return Ok(x.clone());
        }
        if self.names.len() >= NORMALIZE_BUDGET {
            return Err(Error::StateBudget(NORMALIZE_BUDGET));
        }
        let mut ids: Vec<&Sym> = members.iter().map(|(x, _)| x).collect();
        ids.dedup();
        let base = Det::render(&ids);
        let mut name = sym(&base);
        let mut k = 1;
        while self.used_names.contains(&name) {
            k += 1;
            let inner = base.strip_prefix("X_{").and_then(|s| s.strip_suffix('}'));
            name = match inner {
                Some(inner) => sym(&format!("X_{{{inner}/{k}}}")),
                None => sym(&format!("X_{{{base}/{k}}}")),
            };
        }
        self.used_names.insert(name.clone());
        self.names.insert(members.clone(), name.clone());
        self.queue.push_back(members);
        Ok(name)
    }

    /// Guard of `e` in placeholder form, with references renamed by `rho`.
    fn item(&self, e: &SymEvent, target: &Sym, rho: &[(Sym, Sym)]) -> Item {
        let mut tmp = Renaming::new();
        for (k, b) in e.binders.iter().enumerate() {
            tmp.insert(b.clone(), sym(&format!("\u{1}b{k}")));
        }
        let mut r = tmp.clone();
        for n in e.refs() {
            r.insert(n.clone(), lookup(rho, &n));
        }
        let e1 = e.rename(&r);
        let mut seen: BTreeMap<Sym, Sym> = BTreeMap::new();
        let mut eqs = Vec::new();
        let mut prefer = [None, None];
        for (k, (slot, place)) in [
            (&e1.pattern.subject, PLACE_S),
            (&e1.pattern.payload, PLACE_P),
        ]
        .into_iter()
        .enumerate()
        {
            let place = sym(place);
            match slot {
                Slot::Var(v) if e1.binders.contains(v) && !seen.contains_key(v) => {
                    seen.insert(v.clone(), place.clone());
                    prefer[k] = tmp.iter().find(|(_, t)| *t == v).map(|(b, _)| b.clone());
                }
                Slot::Var(v) => {
                    let other = seen.get(v).cloned().unwrap_or_else(|| v.clone());
                    eqs.push(Cond::eq_vars(&place, &other));
                }
                Slot::Val(val) => eqs.push(Cond::cmp_var(&place, CmpOp::Eq, val.clone())),
                Slot::Tag(_, v) => eqs.push(Cond::eq_vars(&place, v)),
            }
        }
        eqs.push(e1.cond.rename(&seen));
        let cond = Cond::and_all(eqs);
        let back: Renaming = tmp
            .iter()
            .map(|(b, t)| (b.clone(), seen.get(t).cloned().unwrap_or_else(|| t.clone())))
            .collect();
        let mut cont: Vec<(Sym, Sym)> = rho
            .iter()
            .filter(|(a, _)| !e.binders.contains(a))
            .cloned()
            .collect();
        cont.extend(back);
        let outer = self.refs[target]
            .iter()
            .filter(|n| !e.binders.contains(*n))
            .map(|n| lookup(rho, n))
            .collect();
        Item {
            dir: e.pattern.dir,
            cond,
            target: target.clone(),
            rho: cont,
            prefer,
            outer,
        }
    }

    fn pick(&mut self, prefer: &[Option<Sym>], avoid: &BTreeSet<Sym>) -> Sym {
        for p in prefer.iter().flatten().chain(self.pool.iter()) {
            if !avoid.contains(p) {
                return p.clone();
            }
        }
        let n = fresh_name("c", &self.all_names);
        self.all_names.insert(n.clone());
        self.pool.push(n.clone());
        n
    }

    fn build(&mut self, members: &[Member]) -> Result<Formula> {
        let mut items = Vec::new();
        let mut vars = Vec::new();
        for (x, rho) in members {
            let rhs = self.rhs(x).clone();
            if rhs == Formula::Ff {
                return Ok(Formula::Ff);
            }
            for c in conjuncts(&rhs) {
                match c {
                    Formula::Nec(e, t) => match &**t {
                        Formula::Var(t) if self.trivial.contains(t) => {}
                        Formula::Var(t) => items.push(self.item(e, t, rho)),
                        _ => return Err(Error::NotNormalForm),
                    },
                    Formula::Var(y) if !self.defined.contains(y) => {
                        self.free.insert(y.clone());
                        if !vars.contains(y) {
                            vars.push(y.clone());
                        }
                    }
                    _ => {}
                }
            }
        }
        let mut dirs: Vec<Dir> = Vec::new();
        for it in &items {
            if !dirs.contains(&it.dir) {
                dirs.push(it.dir);
            }
        }
        let mut branches = Vec::new();
        for dir in dirs {
            let group: Vec<&Item> = items.iter().filter(|it| it.dir == dir).collect();
            let mut avoid = BTreeSet::new();
            for it in &group {
                avoid.extend(
                    it.cond
                        .vars()
                        .into_iter()
                        .filter(|v| !v.starts_with('\u{1}')),
                );
                avoid.extend(it.outer.iter().cloned());
            }
            let s = self.pick(&group[0].prefer[..1], &avoid);
            avoid.insert(s.clone());
            let p = self.pick(&group[0].prefer[1..], &avoid);
            let fill = Renaming::from([(sym(PLACE_S), s.clone()), (sym(PLACE_P), p.clone())]);
            let pattern = Pattern::new(dir, Slot::Var(s), Slot::Var(p));
            // distinct conditions with the members they lead to
            let mut conds: Vec<(Cond, Vec<Member>)> = Vec::new();
            for it in &group {
                let cond = it.cond.rename(&fill);
                let target = self.restrict(&it.target, |n| {
                    let m = lookup(&it.rho, n);
                    fill.get(&m).cloned().unwrap_or(m)
                });
                match conds.iter_mut().find(|(c, _)| *c == cond) {
                    Some((_, ts)) => ts.push(target),
                    None => conds.push((cond, vec![target])),
                }
            }
            let event = |c: Cond| SymEvent::new(pattern.clone(), c);
            let mut disjoint = true;
            'outer: for a in 0..conds.len() {
                for b in a + 1..conds.len() {
                    if !self
                        .solver
                        .disjoint(&event(conds[a].0.clone()), &event(conds[b].0.clone()))?
                    {
                        disjoint = false;
                        break 'outer;
                    }
                }
            }
            let split: Vec<(Cond, Vec<Member>)> = if disjoint {
                conds
            } else {
                let n = conds.len();
                if n > MAX_COMBINED {
                    return Err(Error::StateBudget(1 << MAX_COMBINED));
                }
                let cs: Vec<Cond> = conds.iter().map(|(c, _)| c.clone()).collect();
                let mut out = Vec::new();
                for mask in (1..1usize << n).rev() {
                    let c = combination(&cs, mask);
                    if !self.solver.event_sat(&event(c.clone()))? {
                        continue;
                    }
                    let ts = (0..n)
                        .filter(|i| (mask >> (n - 1 - i)) & 1 == 1)
                        .flat_map(|i| conds[i].1.clone())
                        .collect();
                    out.push((c, ts));
                }
                out
            };
            for (c, ts) in split {
                // a binder equal to an outer name is replaced by it in the continuation,
                // which keeps the number of live names bounded
                let mut alias = Renaming::new();
                for a in cond_conjuncts(&c).iter() {
                    if let Cond::Cmp(Term::Var(x), CmpOp::Eq, Term::Var(y)) = a {
                        for (b, o) in [(x, y), (y, x)] {
                            if fill.values().any(|v| v == b) && !fill.values().any(|v| v == o) {
                                alias.entry(b.clone()).or_insert_with(|| o.clone());
                            }
                        }
                    }
                }
                let ts = ts
                    .into_iter()
                    .map(|(x, rho)| {
                        let rho = rho
                            .into_iter()
                            .map(|(n, m)| {
                                let m = alias.get(&m).cloned().unwrap_or(m);
                                (n, m)
                            })
                            .filter(|(n, m)| n != m)
                            .collect();
                        (x, rho)
                    })
                    .collect();
                let target = self.closure(ts);
                let name = self.state(target)?;
                branches.push(Formula::nec(event(c), Formula::Var(name)));
            }
        }
        branches.extend(vars.into_iter().map(Formula::Var));
        Ok(Formula::and_all(branches))
    }
}

/// Greatest set of equations whose conjuncts are all `tt` or guarded references into the set.
fn trivially_true(sys: &EquationSystem) -> BTreeSet<Sym> {
    let mut set = sys.defined();
    loop {
        let before = set.len();
        let keep: BTreeSet<Sym> = set
            .iter()
            .filter(|x| {
                conjuncts(sys.get(x).expect("defined"))
                    .iter()
                    .all(|c| match c {
                        Formula::Tt => true,
                        Formula::Nec(_, t) => match &**t {
                            Formula::Tt => true,
                            Formula::Var(t) => set.contains(t),
                            _ => false,
                        },
                        Formula::Var(y) => set.contains(y),
                        _ => false,
                    })
            })
            .cloned()
            .collect();
        set = keep;
        if set.len() == before {
            return set;
        }
    }
}

/// Subset construction over index sets reachable from the principal.
///
/// Guards of one state are opened and renamed to shared binders; guards that overlap
/// without being equal are split into truth combinations, so the result is normalized
/// even when the input is not equi-disjoint.
pub fn determinize(sys: &EquationSystem, solver: &Solver) -> Result<EquationSystem> {
    let mut det = Det::new(sys, solver);
    let start = det.closure(vec![(sys.principal.clone(), Vec::new())]);
    let principal = det.state(start)?;
    while let Some(members) = det.queue.pop_front() {
        let f = det.build(&members)?;
        let name = det.names[&members].clone();
        det.out.push((name, f));
    }
    let mut free = det.free;
    free.extend(sys.free.iter().cloned());
    Ok(EquationSystem {
        equations: det.out,
        principal,
        free,
    })
}

/// Like [`determinize`], but rejects input that is not equi-disjoint.
pub fn determinize_strict(sys: &EquationSystem, solver: &Solver) -> Result<EquationSystem> {
    for (x, rhs) in &sys.equations {
        let ns = necs(rhs);
        for (a, (e1, _)) in ns.iter().enumerate() {
            for (e2, _) in &ns[a + 1..] {
                if e1 != e2 && !solver.disjoint(e1, e2)? {
                    return Err(Error::NotEquiDisjoint(format!("{x}: [{e1}] and [{e2}]")));
                }
            }
        }
    }
    determinize(sys, solver)
}

// reconstruction

/// Upper bounds on fixpoint binders emitted, in total and nested, when reading a system
/// back as a formula.
const EMBED_BUDGET: usize = 20_000;
const EMBED_DEPTH: usize = 256;

/// Data names an equation depends on, through unguarded and guarded references.
fn equation_refs(sys: &EquationSystem) -> BTreeMap<Sym, BTreeSet<Sym>> {
    fn go(f: &Formula, refs: &BTreeMap<Sym, BTreeSet<Sym>>, out: &mut BTreeSet<Sym>) {
        match f {
            Formula::Var(y) => out.extend(refs.get(y).into_iter().flatten().cloned()),
            Formula::Nec(e, g) | Formula::Pos(e, g) => {
                out.extend(e.refs());
                let mut inner = BTreeSet::new();
                go(g, refs, &mut inner);
                out.extend(inner.into_iter().filter(|n| !e.binders.contains(n)));
            }
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| go(g, refs, out)),
            Formula::Max(_, g) | Formula::Min(_, g) => go(g, refs, out),
            Formula::Tt | Formula::Ff => {}
        }
    }
    let mut refs: BTreeMap<Sym, BTreeSet<Sym>> = sys
        .equations
        .iter()
        .map(|(x, _)| (x.clone(), BTreeSet::new()))
        .collect();
    loop {
        let mut changed = false;
        for (x, rhs) in &sys.equations {
            let mut acc = BTreeSet::new();
            go(rhs, &refs, &mut acc);
            if acc.len() != refs[x].len() {
                refs.insert(x.clone(), acc);
                changed = true;
            }
        }
        if !changed {
            return refs;
        }
    }
}

/// Inlines equations from the principal. Each data binder occurrence gets an id, and a
/// reference to an enclosing fixpoint is kept only when the data names it depends on are
/// bound by the same occurrences as at its definition; otherwise the equation is inlined
/// afresh, so that rebinding a name never changes what an earlier fixpoint refers to.
struct Embed<'a> {
    sys: &'a EquationSystem,
    refs: BTreeMap<Sym, BTreeSet<Sym>>,
    next_binder: usize,
    emitted: usize,
}

type Snapshot = Vec<(Sym, usize)>;

impl Embed<'_> {
    fn snapshot(&self, x: &Sym, env: &BTreeMap<Sym, usize>) -> Snapshot {
        self.refs[x]
            .iter()
            .map(|n| (n.clone(), env.get(n).copied().unwrap_or(0)))
            .collect()
    }

    fn inline(
        &mut self,
        x: &Sym,
        stack: &mut Vec<(Sym, Snapshot)>,
        env: &BTreeMap<Sym, usize>,
    ) -> Result<Formula> {
        let Some(rhs) = self.sys.get(x) else {
            return Ok(Formula::Var(x.clone()));
        };
        let snap = self.snapshot(x, env);
        if let Some((_, s)) = stack.iter().rev().find(|(y, _)| y == x) {
            if *s == snap {
                return Ok(Formula::Var(x.clone()));
            }
        }
        // a fixpoint inlined afresh inside its own copies keeps being rebound on every lap
        if stack.iter().filter(|(y, _)| y == x).count() >= 3 {
            return Err(Error::LoopRebindsData(String::from(&**x)));
        }
        self.emitted += 1;
        if self.emitted > EMBED_BUDGET || stack.len() >= EMBED_DEPTH {
            return Err(Error::StateBudget(EMBED_BUDGET));
        }
        stack.push((x.clone(), snap));
        let body = self.walk(rhs, stack, env);
        stack.pop();
        Ok(Formula::Max(x.clone(), Box::new(body?)))
    }

    fn walk(
        &mut self,
        f: &Formula,
        stack: &mut Vec<(Sym, Snapshot)>,
        env: &BTreeMap<Sym, usize>,
    ) -> Result<Formula> {
        Ok(match f {
            Formula::Var(y) => self.inline(y, stack, env)?,
            Formula::Tt | Formula::Ff => f.clone(),
            Formula::And(fs) => Formula::And(
                fs.iter()
                    .map(|h| self.walk(h, stack, env))
                    .collect::<Result<_>>()?,
            ),
            Formula::Or(fs) => Formula::Or(
                fs.iter()
                    .map(|h| self.walk(h, stack, env))
                    .collect::<Result<_>>()?,
            ),
            Formula::Nec(e, h) | Formula::Pos(e, h) => {
                let mut inner = env.clone();
                for b in &e.binders {
                    self.next_binder += 1;
                    inner.insert(b.clone(), self.next_binder);
                }
                let body = Box::new(self.walk(h, stack, &inner)?);
                match f {
                    Formula::Nec(..) => Formula::Nec(e.clone(), body),
                    _ => Formula::Pos(e.clone(), body),
                }
            }
            Formula::Max(y, h) => Formula::Max(y.clone(), Box::new(self.walk(h, stack, env)?)),
            Formula::Min(y, h) => Formula::Min(y.clone(), Box::new(self.walk(h, stack, env)?)),
        })
    }
}

/// Reads a system back as a formula by substituting `X ↦ max X.F` from the principal.
pub fn to_formula(sys: &EquationSystem) -> Result<Formula> {
    let f = embed(sys)?;
    let free = f.free_lvars();
    if !free.is_empty() {
        let names: Vec<&str> = free.iter().map(|x| &**x).collect();
        return Err(Error::FreeVariables(names.join(", ")));
    }
    Ok(f)
}

/// [`to_formula`] without the closedness check.
pub fn embed(sys: &EquationSystem) -> Result<Formula> {
    let mut em = Embed {
        sys,
        refs: equation_refs(sys),
        next_binder: 0,
        emitted: 0,
    };
    em.inline(&sys.principal, &mut Vec::new(), &BTreeMap::new())
}

/// Removes `max X` binders whose variable does not occur in the body.
pub fn optimize(phi: &Formula) -> Formula {
    match phi {
        Formula::Max(x, g) | Formula::Min(x, g) => {
            let body = optimize(g);
            if body.free_lvars().contains(x) {
                match phi {
                    Formula::Max(..) => Formula::Max(x.clone(), Box::new(body)),
                    _ => Formula::Min(x.clone(), Box::new(body)),
                }
            } else {
                body
            }
        }
        Formula::Tt | Formula::Ff | Formula::Var(_) => phi.clone(),
        Formula::And(fs) => Formula::And(fs.iter().map(optimize).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(optimize).collect()),
        Formula::Nec(e, g) => Formula::Nec(e.clone(), Box::new(optimize(g))),
        Formula::Pos(e, g) => Formula::Pos(e.clone(), Box::new(optimize(g))),
    }
}

fn tidy(c: &Cond) -> Cond {
    let c = c.simplify();
    let mut out: Vec<Cond> = Vec::new();
    for a in cond_conjuncts(&c) {
        let a = match a {
            Cond::Not(inner) => match *inner {
                Cond::Cmp(l, CmpOp::Eq, r) => Cond::Cmp(l, CmpOp::Ne, r),
                Cond::Cmp(l, CmpOp::Ne, r) => Cond::Cmp(l, CmpOp::Eq, r),
                other => Cond::Not(Box::new(other)),
            },
            a => a,
        };
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Cond::and_all(out)
}

/// Whether a free occurrence of `b` in `f` sits under a binder named `r`.
fn captured(f: &Formula, b: &Sym, r: &Sym, under: bool) -> bool {
    match f {
        Formula::Nec(e, g) | Formula::Pos(e, g) => {
            if e.binders.contains(b) {
                return false;
            }
            let used = e.cond.vars().contains(b)
                || e.pattern
                    .slots()
                    .iter()
                    .any(|s| *s == &Slot::Var(b.clone()));
            (under && used) || captured(g, b, r, under || e.binders.contains(r))
        }
        Formula::And(fs) | Formula::Or(fs) => fs.iter().any(|g| captured(g, b, r, under)),
        Formula::Max(_, g) | Formula::Min(_, g) => captured(g, b, r, under),
        _ => false,
    }
}

fn close_event(e: &SymEvent, body: &Formula) -> (SymEvent, Formula) {
    let mut e = e.clone();
    let mut body = body.clone();
    for k in 0..2 {
        let slot = if k == 0 {
            &e.pattern.subject
        } else {
            &e.pattern.payload
        };
        let Slot::Var(b) = slot.clone() else { continue };
        if !e.binders.contains(&b) {
            continue;
        }
        let atoms = cond_conjuncts(&e.cond);
        let found = atoms.iter().enumerate().find_map(|(i, a)| match a {
            Cond::Cmp(Term::Var(x), CmpOp::Eq, t) | Cond::Cmp(t, CmpOp::Eq, Term::Var(x))
                if *x == b =>
            {
                match t {
                    Term::Val(_) => Some((i, t.clone())),
                    Term::Var(r) if !e.binders.contains(r) && !captured(&body, &b, r, false) => {
                        Some((i, t.clone()))
                    }
                    _ => None,
                }
            }
            _ => None,
        });
        let Some((i, t)) = found else { continue };
        let rest: Vec<Cond> = atoms
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, a)| a.clone())
            .collect();
        let new_slot = match &t {
            Term::Val(v) => Slot::Val(v.clone()),
            Term::Var(r) => Slot::Var(r.clone()),
        };
        let mut other = if k == 0 {
            e.pattern.payload.clone()
        } else {
            e.pattern.subject.clone()
        };
        if other == Slot::Var(b.clone()) {
            other = new_slot.clone();
        }
        let (subject, payload) = if k == 0 {
            (new_slot, other)
        } else {
            (other, new_slot)
        };
        let mut cond = Cond::and_all(rest);
        match &t {
            Term::Val(v) => {
                let s = crate::cond::Subst::from([(b.clone(), v.clone())]);
                cond = cond.subst(&s);
                body = body.subst_data(&s);
            }
            Term::Var(r) => {
                let ren = Renaming::from([(b.clone(), r.clone())]);
                cond = cond.rename(&ren);
                body = body.rename_free_data(&ren);
            }
        }
        e.binders.remove(&b);
        e.pattern = Pattern::new(e.pattern.dir, subject, payload);
        e.cond = cond;
    }
    e.cond = tidy(&e.cond);
    (e, body)
}

/// Folds equality constraints on pattern binders back into the pattern.
pub fn close_patterns(phi: &Formula) -> Formula {
    match phi {
        Formula::Nec(e, g) | Formula::Pos(e, g) => {
            let (e2, g2) = close_event(e, g);
            let g3 = Box::new(close_patterns(&g2));
            match phi {
                Formula::Nec(..) if e2.cond == Cond::False => Formula::Tt,
                Formula::Nec(..) => Formula::Nec(e2, g3),
                _ if e2.cond == Cond::False => Formula::Ff,
                _ => Formula::Pos(e2, g3),
            }
        }
        Formula::Tt | Formula::Ff | Formula::Var(_) => phi.clone(),
        Formula::And(fs) => {
            let gs: Vec<Formula> = fs.iter().map(close_patterns).collect();
            if gs.contains(&Formula::Tt) {
                Formula::and_all(gs)
            } else {
                Formula::And(gs)
            }
        }
        Formula::Or(fs) => Formula::Or(fs.iter().map(close_patterns).collect()),
        Formula::Max(x, g) => Formula::Max(x.clone(), Box::new(close_patterns(g))),
        Formula::Min(x, g) => Formula::Min(x.clone(), Box::new(close_patterns(g))),
    }
}

// pipeline

/// Normalization settings.
#[derive(Clone, Debug)]
pub struct NormalizeOptions {
    /// Drop unsatisfiable truth combinations during condition reformulation.
    pub prune: bool,
    pub solver: Solver,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            prune: true,
            solver: Solver::default(),
        }
    }
}

/// Every intermediate object of the pipeline.
#[derive(Clone, Debug)]
pub struct Stages {
    pub sf: Formula,
    pub eq: EquationSystem,
    pub open: EquationSystem,
    pub uni: EquationSystem,
    pub comb: EquationSystem,
    pub nf: EquationSystem,
    pub wf: Formula,
}

pub fn normalize_stages(phi: &Formula, opts: &NormalizeOptions) -> Result<Stages> {
    if !phi.is_shml() {
        return Err(Error::NotShml);
    }
    let sf = standardize(&phi.alpha_unique())?;
    let eq = to_equations(&sf)?;
    let open = open_patterns(&eq);
    let uni = uniformize(&open);
    let comb = reformulate_conditions(&uni, opts.prune, &opts.solver)?;
    let nf = determinize(&comb, &opts.solver)?;
    let wf = close_patterns(&optimize(&to_formula(&nf)?));
    Ok(Stages {
        sf,
        eq,
        open,
        uni,
        comb,
        nf,
        wf,
    })
}

pub fn normalize_with(phi: &Formula, opts: &NormalizeOptions) -> Result<Formula> {
    Ok(normalize_stages(phi, opts)?.wf)
}

/// Normalizes an sHML formula with default settings.
pub fn normalize(phi: &Formula) -> Result<Formula> {
    normalize_with(phi, &NormalizeOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    const PHI2: &str = "max X.([i?(req)][i!(ans)]X & [i?(req)][i?(req)]ff)";

    #[test]
    fn standard_form() {
        let sf = standardize(&f(PHI2)).unwrap();
        let want = f("[i?(req)][i!(ans)](max X.([i?(req)][i!(ans)]X & [i?(req)][i?(req)]ff)) & [i?(req)][i?(req)]ff");
        assert_eq!(sf, want);
        assert_eq!(standardize(&Formula::Tt).unwrap(), Formula::Tt);
        let lifted = standardize(&f("(max Y.([i?(3)]Y & X)) & [i?(3)]ff")).unwrap();
        assert_eq!(lifted, f("([i?(3)](max Y.[i?(3)]Y) & [i?(3)]ff) & X"));
        assert!(is_standard_form(&lifted));
    }

    #[test]
    fn equation_numbering() {
        let sys = to_equations(&standardize(&f(PHI2)).unwrap()).unwrap();
        let mut got: Vec<String> = sys
            .sorted()
            .iter()
            .map(|(x, r)| format!("{x} = {r}"))
            .collect();
        got.sort();
        let mut want = vec![
            "X0 = [i?(req)]X3 & [i?(req)]X11",
            "X3 = [i!(ans)]X",
            "X = [i?(req)]X7 & [i?(req)]X9",
            "X7 = [i!(ans)]X8",
            "X8 = X",
            "X9 = [i?(req)]X10",
            "X10 = ff",
            "X11 = [i?(req)]X12",
            "X12 = ff",
        ];
        want.sort();
        assert_eq!(got, want);
        let t = to_equations(&Formula::Tt).unwrap();
        assert_eq!(t.equations, vec![(sym("X0"), Formula::Tt)]);
        let y = to_equations(&f("Y")).unwrap();
        assert_eq!(y.free, BTreeSet::from([sym("Y")]));
    }

    #[test]
    fn golden_request_response() {
        let got = normalize(&f(PHI2)).unwrap();
        let want =
            f("[i?(req)]([i!(ans)](max X.[i?(req)]([i!(ans)]X & [i?(req)]ff)) & [i?(req)]ff)");
        assert!(got.alpha_eq(&want), "{got}");
        assert_eq!(
            got.classify().unwrap(),
            crate::formula::SubsetTag::ShmlNormalForm
        );
    }

    #[test]
    fn trivial_formulae() {
        assert_eq!(normalize(&Formula::Tt).unwrap(), Formula::Tt);
        assert_eq!(normalize(&Formula::Ff).unwrap(), Formula::Ff);
        assert!(matches!(normalize(&f("X")), Err(Error::FreeVariables(_))));
    }

    #[test]
    fn overlapping_conditions_split_three_ways() {
        let phi =
            f("max X.([$x?(req) when $x != h][$x!(ans)]X & [$x?(req) when $x != j][$x?(req)]ff)");
        let st = normalize_stages(&phi, &NormalizeOptions::default()).unwrap();
        assert!(is_uniform(&st.uni));
        assert!(is_equi_disjoint(&st.comb, &Solver::default()).unwrap());
        assert!(is_normalized(&st.nf, &Solver::default()).unwrap());
        let names: BTreeSet<&str> = st.nf.equations.iter().map(|(x, _)| &**x).collect();
        for x in [
            "X_{0}", "X_{3,11}", "X_{3}", "X_{11}", "X", "X_{7,9}", "X_{7}", "X_{9}",
        ] {
            assert!(names.contains(x), "{x} missing from\n{}", st.nf);
        }
        let body = "max X.[$y?(req) when $y != h && $y != j]([$y!(ans)]X & [$y?(req)]ff) \
            & [$y?(req) when $y != h && $y = j][$y!(ans)]X & [$y?(req) when $y = h && $y != j][$y?(req)]ff";
        let want = f(&format!(
            "[$z?(req) when $z != h && $z != j](([$z!(ans)]({body})) & [$z?(req)]ff) \
             & [$z?(req) when $z != h && $z = j][$z!(ans)]({body}) \
             & [$z?(req) when $z = h && $z != j][$z?(req)]ff"
        ));
        assert!(st.wf.alpha_eq(&want), "{}", st.wf);
    }

    #[test]
    fn mixed_levels_preserve_meaning() {
        use crate::logic::satisfies;
        use crate::parse::parse_process;
        let procs: Vec<_> = [
            "rec x.(i?(a).x + i?(a).i?(a).nil)",
            "i?(a).i?(a).nil",
            "i?(a).nil",
            "rec x.(i?(a).i!(b).x + j?(a).j!(c).nil)",
            "j?(a).j!(b).nil + i?(a).i!(a).nil",
            "i?(j).j?(i).nil",
            "i?(j).i!(j).i?(j).j?(i).nil",
            "rec x.(tau.i?(req).i!(ans).x + i?(cls).nil)",
            "rec x.(i?(req).x + i?(req).i!(ans).x + i?(cls).nil)",
            "h?(req).h?(req).nil + j?(req).j!(ans).j?(req).j!(ans).nil",
        ]
        .iter()
        .map(|p| parse_process(p).unwrap())
        .collect();
        for src in [
            "max X.([i?(a)]X & [i?(a)][i?(a)]ff)",
            "max X1.[$x1!($x2)]([i?($x1)]tt & X1)",
            "[i?(a)]ff & [$x?(a) when $x != j]ff",
            "max X.[$x?($y)]([$x!($y)]X & [$y?($x)]ff)",
            "[$x?($y)](max X.([$x!($y)]X & [$z?($y) when $z != $x]ff))",
            "max X.([$x?(req) when $x != h][$x!(ans)]X & [$x?(req) when $x != j][$x?(req)]ff)",
            PHI2,
        ] {
            let phi = f(src);
            let nf = normalize(&phi).unwrap();
            assert!(
                nf.is_normal_form(&Solver::default()).unwrap(),
                "{src} -> {nf}"
            );
            let again = f(&format!("{nf}"));
            assert!(again.alpha_eq(&nf), "{nf}");
            for p in &procs {
                assert_eq!(
                    satisfies(p, &phi).unwrap(),
                    satisfies(p, &nf).unwrap(),
                    "{src} -> {nf} on {p}"
                );
            }
        }
    }

    #[test]
    fn loops_that_rebind_their_data_have_no_normal_form() {
        for src in [
            "max X.([$x?(a)]X & [$x?(a)][$x!(b)]ff)",
            "max X1.[$x1!($x2)](X1 & [$x3?($x1)]ff)",
            "[j!(ans)]max X1.[j?($x1)]((max X2.[j?($x1)](X1 & X2)) \
             & max X3.[$x1!($x2) when $x2 != req][$x3!(req) when $x3 != i]ff)",
        ] {
            assert!(
                matches!(normalize(&f(src)), Err(Error::LoopRebindsData(_))),
                "{src}"
            );
        }
    }
}
