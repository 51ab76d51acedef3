//! Detection monitors: syntax, dynamics, instrumentation and synthesis.

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
use crate::logic::satisfies;
use crate::lts::{Lts, STATE_BUDGET};
use crate::pattern::{match_symbolic, restrict, SymEvent};
use crate::process::Process;
use crate::value::{sym, Action, Event, Sym};

/// Monitor verdicts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Yes,
    No,
    End,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::End => "end",
        }
    }
}

/// A detection monitor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Monitor {
    Verdict(Verdict),
    Prefix(SymEvent, Box<Monitor>),
    Choice(Vec<Monitor>),
    Rec(Sym, Box<Monitor>),
    Var(Sym),
}

impl Monitor {
    pub fn verdict(&self) -> Option<Verdict> {
        match self {
            Monitor::Verdict(v) => Some(*v),
            _ => None,
        }
    }

    fn map_children(&self, mut g: impl FnMut(&Monitor) -> Monitor) -> Monitor {
        match self {
            Monitor::Verdict(_) | Monitor::Var(_) => self.clone(),
            Monitor::Prefix(e, m) => Monitor::Prefix(e.clone(), Box::new(g(m))),
            Monitor::Choice(ms) => Monitor::Choice(ms.iter().map(g).collect()),
            Monitor::Rec(x, m) => Monitor::Rec(x.clone(), Box::new(g(m))),
        }
    }

    pub fn subst_data(&self, s: &Subst) -> Monitor {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Monitor::Prefix(e, m) => {
                Monitor::Prefix(e.subst(s), Box::new(m.subst_data(&restrict(s, &e.binders))))
            }
            _ => self.map_children(|m| m.subst_data(s)),
        }
    }

    pub fn rename_free_data(&self, r: &Renaming) -> Monitor {
        match self {
            Monitor::Prefix(e, m) => {
                let inner: Renaming = r
                    .iter()
                    .filter(|(k, _)| !e.binders.contains(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                Monitor::Prefix(e.rename_refs(r), Box::new(m.rename_free_data(&inner)))
            }
            _ => self.map_children(|m| m.rename_free_data(r)),
        }
    }

    fn data_names(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Monitor::Prefix(e, m) => {
                out.extend(e.pattern.vars());
                e.cond.collect_vars(out);
                m.data_names(out);
            }
            Monitor::Choice(ms) => ms.iter().for_each(|m| m.data_names(out)),
            Monitor::Rec(_, m) => m.data_names(out),
            _ => {}
        }
    }

    /// Replaces free occurrences of the recursion variable `x` by `m`.
    pub fn subst_var(&self, x: &Sym, m: &Monitor) -> Monitor {
        match self {
            Monitor::Var(y) if y == x => m.clone(),
            Monitor::Rec(y, _) if y == x => self.clone(),
            _ => self.map_children(|n| n.subst_var(x, m)),
        }
    }

    /// Every monitor verdict occurring in the term.
    pub fn verdicts(&self) -> BTreeSet<Verdict> {
        let mut out = BTreeSet::new();
        fn go(m: &Monitor, out: &mut BTreeSet<Verdict>) {
            match m {
                Monitor::Verdict(v) => {
                    out.insert(*v);
                }
                Monitor::Prefix(_, n) | Monitor::Rec(_, n) => go(n, out),
                Monitor::Choice(ms) => ms.iter().for_each(|n| go(n, out)),
                Monitor::Var(_) => {}
            }
        }
        go(self, &mut out);
        out
    }

    pub fn unshadow(&self) -> Monitor {
        fn go(m: &Monitor, scope: &BTreeSet<Sym>) -> Monitor {
            match m {
                Monitor::Prefix(e, n) => {
                    let (e2, n2) = unshadow_prefix(
                        e,
                        &**n,
                        scope,
                        |n, r| n.rename_free_data(r),
                        |n, out| n.data_names(out),
                    );
                    let mut inner = scope.clone();
                    inner.extend(e2.binders.iter().cloned());
                    let body = go(&n2, &inner);
                    Monitor::Prefix(e2, Box::new(body))
                }
                _ => m.map_children(|n| go(n, scope)),
            }
        }
        go(self, &BTreeSet::new())
    }
}

fn ends_open(m: &Monitor) -> bool {
    match m {
        Monitor::Rec(..) => true,
        Monitor::Prefix(_, n) => ends_open(n),
        _ => false,
    }
}

fn write_raw(m: &Monitor, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match m {
        Monitor::Verdict(v) => f.write_str(v.name()),
        Monitor::Var(x) => f.write_str(x),
        Monitor::Prefix(_, n) | Monitor::Rec(_, n) => {
            match m {
                Monitor::Prefix(e, _) => write!(f, "<{e}>.")?,
                Monitor::Rec(x, _) => write!(f, "rec {x}.")?,
                _ => unreachable!(),
            }
            if matches!(**n, Monitor::Choice(_)) {
                f.write_str("(")?;
                write_raw(n, f)?;
                f.write_str(")")
            } else {
                write_raw(n, f)
            }
        }
        Monitor::Choice(ms) => {
            for (i, n) in ms.iter().enumerate() {
                if i > 0 {
                    f.write_str(" + ")?;
                }
                if matches!(n, Monitor::Choice(_)) || (ends_open(n) && i + 1 < ms.len()) {
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

impl fmt::Display for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_raw(&self.unshadow(), f)
    }
}

// dynamics

/// All `α`-derivatives of a closed monitor; empty when blocked.
pub fn monitor_step(m: &Monitor, a: &Event) -> Vec<Monitor> {
    let mut out = match m {
        Monitor::Verdict(_) => vec![m.clone()],
        Monitor::Prefix(e, n) => match match_symbolic(e, a) {
            Some(s) => vec![n.subst_data(&s)],
            None => Vec::new(),
        },
        Monitor::Choice(ms) => ms.iter().flat_map(|n| monitor_step(n, a)).collect(),
        Monitor::Rec(x, n) => monitor_step(&n.subst_var(x, m), a),
        Monitor::Var(_) => Vec::new(),
    };
    out.sort();
    out.dedup();
    out
}

/// A monitor instrumented over a process.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonitoredSystem {
    pub monitor: Monitor,
    pub process: Process,
}

impl MonitoredSystem {
    pub fn new(monitor: Monitor, process: Process) -> MonitoredSystem {
        MonitoredSystem { monitor, process }
    }

    /// Every instrumented transition, labelled by the process action.
    pub fn moves(&self) -> Vec<(Action, MonitoredSystem)> {
        let mut out = Vec::new();
        for (a, p) in self.process.transitions() {
            for ms in self.follow(&a, p) {
                out.push((a.clone(), ms));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn follow(&self, a: &Action, p: Process) -> Vec<MonitoredSystem> {
        match a {
            Action::Tau => vec![MonitoredSystem::new(self.monitor.clone(), p)],
            Action::Ev(e) => {
                let next = monitor_step(&self.monitor, e);
                if next.is_empty() {
                    vec![MonitoredSystem::new(Monitor::Verdict(Verdict::End), p)]
                } else {
                    next.into_iter()
                        .map(|m| MonitoredSystem::new(m, p.clone()))
                        .collect()
                }
            }
        }
    }
}

impl fmt::Display for MonitoredSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |> {}", self.monitor, self.process)
    }
}

/// Successors of a monitored system over the process action `mu`.
pub fn instrumented_step(ms: &MonitoredSystem, mu: &Action) -> Vec<MonitoredSystem> {
    let mut out: Vec<MonitoredSystem> = ms
        .process
        .transitions()
        .into_iter()
        .filter(|(a, _)| a == mu)
        .flat_map(|(a, p)| ms.follow(&a, p))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// The reachable monitored-system LTS.
pub fn monitored_lts(
    m: &Monitor,
    p: &Process,
    budget: usize,
) -> Result<(Lts, Vec<MonitoredSystem>)> {
    p.check()?;
    let init = MonitoredSystem::new(m.clone(), p.canonical());
    Lts::explore(
        init,
        |ms: &MonitoredSystem| {
            Ok(ms
                .moves()
                .into_iter()
                .map(|(a, n)| (a, MonitoredSystem::new(n.monitor, n.process.canonical())))
                .collect())
        },
        |ms: &MonitoredSystem| ms.to_string(),
        budget,
    )
}

fn reaches(p: &Process, m: &Monitor, v: Verdict, budget: usize) -> Result<bool> {
    let (_, states) = monitored_lts(m, p, budget)?;
    Ok(states.iter().any(|ms| ms.monitor.verdict() == Some(v)))
}

/// Whether some reachable configuration of `m` over `p` carries `yes`.
pub fn accepts(p: &Process, m: &Monitor, budget: usize) -> Result<bool> {
    reaches(p, m, Verdict::Yes, budget)
}

/// Whether some reachable configuration of `m` over `p` carries `no`.
pub fn rejects(p: &Process, m: &Monitor, budget: usize) -> Result<bool> {
    reaches(p, m, Verdict::No, budget)
}

// synthesis

/// Maps logical variables to recursion variable names accepted by the term parsers.
pub(crate) struct RecNames {
    map: BTreeMap<Sym, Sym>,
    used: BTreeSet<Sym>,
}

impl RecNames {
    pub(crate) fn new() -> RecNames {
        RecNames {
            map: BTreeMap::new(),
            used: BTreeSet::new(),
        }
    }

    pub(crate) fn get(&mut self, x: &Sym) -> Sym {
        if let Some(n) = self.map.get(x) {
            return n.clone();
        }
        let mut base = String::new();
        for c in x.chars() {
            if c.is_ascii_alphanumeric() {
                base.push(if base.is_empty() {
                    c.to_ascii_lowercase()
                } else {
                    c
                });
            } else if !base.is_empty() && !base.ends_with('_') {
                base.push('_');
            }
        }
        let base = base.trim_end_matches('_');
        let base = if base.is_empty() || !base.starts_with(|c: char| c.is_ascii_lowercase()) {
            format!("x{base}")
        } else {
            base.to_string()
        };
        let name = self.fresh(&base);
        self.map.insert(x.clone(), name.clone());
        name
    }

    pub(crate) fn fresh(&mut self, base: &str) -> Sym {
        let mut name = sym(base);
        let mut k = 0;
        while self.used.contains(&name) || crate::parse::is_keyword(&name) {
            k += 1;
            name = sym(&format!("{base}{k}"));
        }
        self.used.insert(name.clone());
        name
    }
}

fn synth(f: &Formula, names: &mut RecNames) -> Monitor {
    let yes = Monitor::Verdict(Verdict::Yes);
    let no = Monitor::Verdict(Verdict::No);
    match f {
        Formula::Tt => yes,
        Formula::Ff => no,
        Formula::Var(x) => Monitor::Var(names.get(x)),
        Formula::Nec(e, g) => match synth(g, names) {
            m if m == yes => yes,
            m => Monitor::Prefix(e.clone(), Box::new(m)),
        },
        Formula::Pos(e, g) => match synth(g, names) {
            m if m == no => no,
            m => Monitor::Prefix(e.clone(), Box::new(m)),
        },
        Formula::And(fs) | Formula::Or(fs) => {
            let (absorb, unit) = if matches!(f, Formula::And(_)) {
                (no, yes)
            } else {
                (yes, no)
            };
            let ms: Vec<Monitor> = fs.iter().map(|g| synth(g, names)).collect();
            if ms.contains(&absorb) {
                return absorb;
            }
            let mut rest: Vec<Monitor> = ms.into_iter().filter(|m| *m != unit).collect();
            match rest.len() {
                0 => unit,
                1 => rest.pop().unwrap(),
                _ => Monitor::Choice(rest),
            }
        }
        Formula::Max(x, g) | Formula::Min(x, g) => {
            let unit = if matches!(f, Formula::Max(..)) {
                yes
            } else {
                no
            };
            let name = names.get(x);
            match synth(g, names) {
                m if m == unit => unit,
                m => Monitor::Rec(name, Box::new(m)),
            }
        }
    }
}

/// Synthesizes a detection monitor from an sHML or cHML formula.
pub fn synth_monitor(phi: &Formula) -> Result<Monitor> {
    if !(phi.is_shml() || phi.is_chml()) {
        return Err(Error::NotMonitorable);
    }
    Ok(synth(&phi.alpha_unique(), &mut RecNames::new()))
}

// corpus checks

/// Results of checking a monitor against a formula over a process corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonitoringReport {
    pub checked: usize,
    /// Processes with a verdict that contradicts satisfaction.
    pub unsound: Vec<String>,
    /// Satisfying processes the monitor never accepts.
    pub missed_satisfactions: Vec<String>,
    /// Violating processes the monitor never rejects.
    pub missed_violations: Vec<String>,
}

impl MonitoringReport {
    pub fn sound(&self) -> bool {
        self.unsound.is_empty()
    }

    pub fn satisfaction_complete(&self) -> bool {
        self.missed_satisfactions.is_empty()
    }

    pub fn violation_complete(&self) -> bool {
        self.missed_violations.is_empty()
    }

    /// Sound and violation-complete on the corpus.
    pub fn negative(&self) -> bool {
        self.sound() && self.violation_complete()
    }

    /// Sound and satisfaction-complete on the corpus.
    pub fn positive(&self) -> bool {
        self.sound() && self.satisfaction_complete()
    }

    /// Sound and partially complete on the corpus.
    pub fn corresponds(&self) -> bool {
        self.negative() || self.positive()
    }
}

pub fn check_monitoring(
    m: &Monitor,
    phi: &Formula,
    corpus: &[Process],
) -> Result<MonitoringReport> {
    let mut r = MonitoringReport::default();
    for p in corpus {
        let (_, states) = monitored_lts(m, p, STATE_BUDGET)?;
        let acc = states
            .iter()
            .any(|ms| ms.monitor.verdict() == Some(Verdict::Yes));
        let rej = states
            .iter()
            .any(|ms| ms.monitor.verdict() == Some(Verdict::No));
        let sat = satisfies(p, phi)?;
        r.checked += 1;
        if (acc && !sat) || (rej && sat) {
            let what = if acc && !sat {
                "accepts a violating process"
            } else {
                "rejects a satisfying process"
            };
            r.unsound.push(format!("{what}: {p}"));
        }
        if sat && !acc {
            r.missed_satisfactions.push(p.to_string());
        }
        if !sat && !rej {
            r.missed_violations.push(p.to_string());
        }
    }
    Ok(r)
}
