//! Suppression enforcers: syntax, dynamics, instrumentation and synthesis.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cond::{Renaming, Subst};
use crate::error::{Error, Result};
use crate::formula::{unshadow_prefix, Formula};
use crate::lts::{Lts, STATE_BUDGET};
use crate::monitor::RecNames;
use crate::normalize::optimize;
use crate::pattern::{apply_transformation, SymTrans};
use crate::process::Process;
use crate::solver::Solver;
use crate::value::{sym, Action, Event, Sym};

/// A suppression enforcer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Enforcer {
    Id,
    Prefix(SymTrans, Box<Enforcer>),
    Choice(Vec<Enforcer>),
    Rec(Sym, Box<Enforcer>),
    Var(Sym),
}

impl Enforcer {
    fn map_children(&self, mut g: impl FnMut(&Enforcer) -> Enforcer) -> Enforcer {
        match self {
            Enforcer::Id | Enforcer::Var(_) => self.clone(),
            Enforcer::Prefix(t, e) => Enforcer::Prefix(t.clone(), Box::new(g(e))),
            Enforcer::Choice(es) => Enforcer::Choice(es.iter().map(g).collect()),
            Enforcer::Rec(x, e) => Enforcer::Rec(x.clone(), Box::new(g(e))),
        }
    }

    pub fn subst_data(&self, s: &Subst) -> Enforcer {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Enforcer::Prefix(t, e) => Enforcer::Prefix(
                t.subst(s),
                Box::new(e.subst_data(&crate::pattern::restrict(s, &t.source.binders))),
            ),
            _ => self.map_children(|e| e.subst_data(s)),
        }
    }

    pub fn rename_free_data(&self, r: &Renaming) -> Enforcer {
        match self {
            Enforcer::Prefix(t, e) => {
                let b = &t.source.binders;
                let inner: Renaming = r
                    .iter()
                    .filter(|(k, _)| !b.contains(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                let t2 = SymTrans {
                    source: t.source.rename_refs(r),
                    replacement: t.replacement.as_ref().map(|p| p.rename(&inner)),
                };
                Enforcer::Prefix(t2, Box::new(e.rename_free_data(&inner)))
            }
            _ => self.map_children(|e| e.rename_free_data(r)),
        }
    }

    fn data_names(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Enforcer::Prefix(t, e) => {
                out.extend(t.source.pattern.vars());
                t.source.cond.collect_vars(out);
                e.data_names(out);
            }
            Enforcer::Choice(es) => es.iter().for_each(|e| e.data_names(out)),
            Enforcer::Rec(_, e) => e.data_names(out),
            _ => {}
        }
    }

    /// Replaces free occurrences of the recursion variable `x` by `e`.
    pub fn subst_var(&self, x: &Sym, e: &Enforcer) -> Enforcer {
        match self {
            Enforcer::Var(y) if y == x => e.clone(),
            Enforcer::Rec(y, _) if y == x => self.clone(),
            _ => self.map_children(|n| n.subst_var(x, e)),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Sym> {
        fn go(e: &Enforcer, bound: &mut Vec<Sym>, out: &mut BTreeSet<Sym>) {
            match e {
                Enforcer::Id => {}
                Enforcer::Var(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
                Enforcer::Prefix(_, n) => go(n, bound, out),
                Enforcer::Choice(es) => es.iter().for_each(|n| go(n, bound, out)),
                Enforcer::Rec(x, n) => {
                    bound.push(x.clone());
                    go(n, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn unshadow(&self) -> Enforcer {
        fn go(e: &Enforcer, scope: &BTreeSet<Sym>) -> Enforcer {
            match e {
                Enforcer::Prefix(t, n) => {
                    let both = (t.replacement.clone(), (**n).clone());
                    let (src, (rep, body)) = unshadow_prefix(
                        &t.source,
                        &both,
                        scope,
                        |(rep, body), r| {
                            (rep.as_ref().map(|p| p.rename(r)), body.rename_free_data(r))
                        },
                        |(_, body), out| body.data_names(out),
                    );
                    let mut inner = scope.clone();
                    inner.extend(src.binders.iter().cloned());
                    let body = go(&body, &inner);
                    Enforcer::Prefix(
                        SymTrans {
                            source: src,
                            replacement: rep,
                        },
                        Box::new(body),
                    )
                }
                _ => e.map_children(|n| go(n, scope)),
            }
        }
        go(self, &BTreeSet::new())
    }
}

fn ends_open(e: &Enforcer) -> bool {
    match e {
        Enforcer::Rec(..) => true,
        Enforcer::Prefix(_, n) => ends_open(n),
        _ => false,
    }
}

fn write_raw(e: &Enforcer, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Enforcer::Id => f.write_str("id"),
        Enforcer::Var(x) => f.write_str(x),
        Enforcer::Prefix(_, n) | Enforcer::Rec(_, n) => {
            match e {
                Enforcer::Prefix(t, _) => write!(f, "[{t}].")?,
                Enforcer::Rec(x, _) => write!(f, "rec {x}.")?,
                _ => unreachable!(),
            }
            if matches!(**n, Enforcer::Choice(_)) {
                f.write_str("(")?;
                write_raw(n, f)?;
                f.write_str(")")
            } else {
                write_raw(n, f)
            }
        }
        Enforcer::Choice(es) => {
            for (i, n) in es.iter().enumerate() {
                if i > 0 {
                    f.write_str(" + ")?;
                }
                if matches!(n, Enforcer::Choice(_)) || (ends_open(n) && i + 1 < es.len()) {
                    f.write_str("(")?;
                    write_raw(n, f)?;
                    f.write_str(")")?;
                } else {
                    write_raw(n, f)?;
                }
            }
            Ok(())
        }
    }
}

impl fmt::Display for Enforcer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_raw(&self.unshadow(), f)
    }
}

// dynamics

/// All `(output, derivative)` pairs of a closed enforcer on input `α`; empty when blocked.
pub fn enforcer_step(e: &Enforcer, a: &Event) -> Vec<(Action, Enforcer)> {
    let mut out = match e {
        Enforcer::Id => vec![(Action::Ev(a.clone()), Enforcer::Id)],
        Enforcer::Prefix(t, n) => match apply_transformation(t, a) {
            Some((b, s)) => vec![(b, n.subst_data(&s))],
            None => Vec::new(),
        },
        Enforcer::Choice(es) => es.iter().flat_map(|n| enforcer_step(n, a)).collect(),
        Enforcer::Rec(x, n) => enforcer_step(&n.subst_var(x, e), a),
        Enforcer::Var(_) => Vec::new(),
    };
    out.sort();
    out.dedup();
    out
}

/// An enforcer instrumented over a process.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnforcedSystem {
    pub enforcer: Enforcer,
    pub process: Process,
}

impl EnforcedSystem {
    pub fn new(enforcer: Enforcer, process: Process) -> EnforcedSystem {
        EnforcedSystem { enforcer, process }
    }

    /// Every instrumented transition as `(process action, emitted action, successor)`.
    pub fn moves(&self) -> Vec<(Action, Action, EnforcedSystem)> {
        let mut out = Vec::new();
        for (a, p) in self.process.transitions() {
            for (b, es) in self.follow(&a, p) {
                out.push((a.clone(), b, es));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn follow(&self, a: &Action, p: Process) -> Vec<(Action, EnforcedSystem)> {
        match a {
            Action::Tau => vec![(Action::Tau, EnforcedSystem::new(self.enforcer.clone(), p))],
            Action::Ev(e) => {
                let next = enforcer_step(&self.enforcer, e);
                if next.is_empty() {
                    vec![(a.clone(), EnforcedSystem::new(Enforcer::Id, p))]
                } else {
                    next.into_iter()
                        .map(|(b, n)| (b, EnforcedSystem::new(n, p.clone())))
                        .collect()
                }
            }
        }
    }
}

impl fmt::Display for EnforcedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.enforcer, self.process)
    }
}

/// Successors of an enforced system when the process performs `mu`, with the emitted action.
pub fn enforced_step(es: &EnforcedSystem, mu: &Action) -> Vec<(Action, EnforcedSystem)> {
    let mut out: Vec<(Action, EnforcedSystem)> = es
        .process
        .transitions()
        .into_iter()
        .filter(|(a, _)| a == mu)
        .flat_map(|(a, p)| es.follow(&a, p))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// The reachable LTS of `e[p]`, labelled by emitted actions.
pub fn enforced_lts(
    e: &Enforcer,
    p: &Process,
    budget: usize,
) -> Result<(Lts, Vec<EnforcedSystem>)> {
    p.check()?;
    let init = EnforcedSystem::new(e.clone(), p.canonical());
    Lts::explore(
        init,
        |es: &EnforcedSystem| {
            Ok(es
                .moves()
                .into_iter()
                .map(|(_, b, n)| (b, EnforcedSystem::new(n.enforcer, n.process.canonical())))
                .collect())
        },
        |es: &EnforcedSystem| es.to_string(),
        budget,
    )
}

/// The enforced system as a process term with the same transitions.
pub fn enforced_process(e: &Enforcer, p: &Process) -> Result<Process> {
    Ok(enforced_lts(e, p, STATE_BUDGET)?.0.to_process())
}

/// Every process run along `trace` (with silent moves interleaved) and the actions the
/// enforced system emits for it.
pub fn run_enforced(e: &Enforcer, p: &Process, trace: &[Action]) -> Vec<Vec<Action>> {
    let mut frontier: Vec<(EnforcedSystem, Vec<Action>)> =
        vec![(EnforcedSystem::new(e.clone(), p.clone()), Vec::new())];
    for a in trace {
        let mut next = Vec::new();
        for (es, out) in &frontier {
            for (b, n) in enforced_step(es, a) {
                let mut o = out.clone();
                o.push(b);
                next.push((n, o));
            }
        }
        next.sort();
        next.dedup();
        frontier = next;
    }
    let mut outs: Vec<Vec<Action>> = frontier.into_iter().map(|(_, o)| o).collect();
    outs.sort();
    outs.dedup();
    outs
}

/// All `(output trace, final enforcer)` outcomes of feeding `trace` to `e`.
///
/// A blocked enforcer becomes `id` and lets the event through unchanged, as it would
/// when instrumented.
pub fn transduce(e: &Enforcer, trace: &[Event]) -> BTreeSet<(Vec<Action>, Enforcer)> {
    let mut cur: BTreeSet<(Vec<Action>, Enforcer)> = BTreeSet::from([(Vec::new(), e.clone())]);
    for a in trace {
        let mut next = BTreeSet::new();
        for (out, f) in &cur {
            let steps = enforcer_step(f, a);
            if steps.is_empty() {
                let mut o = out.clone();
                o.push(Action::Ev(a.clone()));
                next.insert((o, Enforcer::Id));
            }
            for (b, g) in steps {
                let mut o = out.clone();
                o.push(b);
                next.insert((o, g));
            }
        }
        cur = next;
    }
    cur
}

/// Observable part of an output trace.
pub fn observable(out: &[Action]) -> Vec<Event> {
    out.iter().filter_map(|a| a.event().cloned()).collect()
}

// synthesis

fn synth(f: &Formula, rho: Option<&Sym>, names: &mut RecNames) -> Result<Enforcer> {
    Ok(match f {
        Formula::Var(x) => Enforcer::Var(names.get(x)),
        Formula::Ff => Enforcer::Var(rho.cloned().ok_or(Error::FfAtTop)?),
        Formula::Tt => Enforcer::Id,
        Formula::Max(x, g) => {
            let name = names.get(x);
            Enforcer::Rec(name, Box::new(synth(g, rho, names)?))
        }
        Formula::Nec(..) | Formula::And(_) => {
            let branches: Vec<&Formula> = match f {
                Formula::And(fs) => fs.iter().collect(),
                _ => vec![f],
            };
            let y = names.fresh("y");
            let mut items = Vec::new();
            for b in branches {
                let Formula::Nec(e, g) = b else {
                    return Err(Error::NotNormalForm);
                };
                let t = if **g == Formula::Ff {
                    SymTrans::suppress(e.clone())
                } else {
                    SymTrans::identity(e.clone())
                };
                items.push(Enforcer::Prefix(t, Box::new(synth(g, Some(&y), names)?)));
            }
            let body = if items.len() == 1 {
                items.pop().unwrap()
            } else {
                Enforcer::Choice(items)
            };
            Enforcer::Rec(y, Box::new(body))
        }
        _ => return Err(Error::NotNormalForm),
    })
}

/// Drops `rec` binders whose variable is never used.
pub fn drop_redundant_recs(e: &Enforcer) -> Enforcer {
    match e {
        Enforcer::Rec(x, b) => {
            let body = drop_redundant_recs(b);
            if body.free_vars().contains(x) {
                Enforcer::Rec(x.clone(), Box::new(body))
            } else {
                body
            }
        }
        _ => e.map_children(drop_redundant_recs),
    }
}

fn rename_recs(e: &Enforcer, r: &BTreeMap<Sym, Sym>) -> Enforcer {
    match e {
        Enforcer::Var(x) => Enforcer::Var(r.get(x).cloned().unwrap_or_else(|| x.clone())),
        Enforcer::Rec(x, b) => Enforcer::Rec(
            r.get(x).cloned().unwrap_or_else(|| x.clone()),
            Box::new(rename_recs(b, r)),
        ),
        _ => e.map_children(|n| rename_recs(n, r)),
    }
}

/// Renumbers surviving conjunction variables `y`, `y1`, … in binding order.
fn renumber(e: &Enforcer, keep: &BTreeSet<Sym>) -> Enforcer {
    fn collect(e: &Enforcer, out: &mut Vec<Sym>) {
        match e {
            Enforcer::Rec(x, b) => {
                out.push(x.clone());
                collect(b, out);
            }
            Enforcer::Prefix(_, b) => collect(b, out),
            Enforcer::Choice(es) => es.iter().for_each(|n| collect(n, out)),
            _ => {}
        }
    }
    let mut binders = Vec::new();
    collect(e, &mut binders);
    let mut r = BTreeMap::new();
    let mut taken: BTreeSet<Sym> = keep.clone();
    let mut k = 0;
    for x in binders.iter().filter(|x| !keep.contains(*x)) {
        let name = loop {
            let n = if k == 0 {
                sym("y")
            } else {
                sym(&format!("y{k}"))
            };
            k += 1;
            if !taken.contains(&n) {
                break n;
            }
        };
        taken.insert(name.clone());
        r.insert(x.clone(), name);
    }
    rename_recs(e, &r)
}

/// Synthesizes a suppression enforcer from a normalized sHML formula.
pub fn synth_enforcer(phi: &Formula) -> Result<Enforcer> {
    synth_enforcer_with(phi, &Solver::default())
}

pub fn synth_enforcer_with(phi: &Formula, solver: &Solver) -> Result<Enforcer> {
    if !phi.is_normal_form(solver)? {
        return Err(Error::NotNormalForm);
    }
    let f = optimize(&phi.alpha_unique());
    let mut names = RecNames::new();
    let mut lvars = BTreeSet::new();
    f.lvar_names(&mut lvars);
    let keep: BTreeSet<Sym> = lvars.iter().map(|x| names.get(x)).collect();
    let e = synth(&f, None, &mut names)?;
    Ok(renumber(&drop_redundant_recs(&e), &keep))
}

// checks

/// Whether every sum consists of prefixes with pairwise disjoint source guards.
pub fn is_well_formed(e: &Enforcer, solver: &Solver) -> Result<bool> {
    match e {
        Enforcer::Id | Enforcer::Var(_) => Ok(true),
        Enforcer::Rec(_, b) | Enforcer::Prefix(_, b) => is_well_formed(b, solver),
        Enforcer::Choice(es) => {
            let mut guards = Vec::new();
            for n in es {
                let Enforcer::Prefix(t, b) = n else {
                    return Ok(false);
                };
                if !is_well_formed(b, solver)? {
                    return Ok(false);
                }
                guards.push(&t.source);
            }
            for i in 0..guards.len() {
                for j in i + 1..guards.len() {
                    if !solver.disjoint(guards[i], guards[j])? {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

/// Traces with more than one outcome, with the outcomes rendered.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeterminismReport {
    pub checked: usize,
    pub failures: Vec<(Vec<Event>, Vec<String>)>,
}

impl DeterminismReport {
    pub fn deterministic(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn render_actions(out: &[Action]) -> String {
    out.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn check_determinism(e: &Enforcer, traces: &[Vec<Event>]) -> DeterminismReport {
    let mut r = DeterminismReport::default();
    for t in traces {
        r.checked += 1;
        let outcomes = transduce(e, t);
        if outcomes.len() != 1 {
            let shown = outcomes
                .iter()
                .map(|(o, f)| format!("{} => {f}", render_actions(o)))
                .collect();
            r.failures.push((t.clone(), shown));
        }
    }
    r
}
