//! Reproducible corpora, random formulae, shrinking, and corpus-relative checks of the
//! enforcement and monitoring guarantees.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bisim::{lts_bisim, Side};
use crate::cond::{CmpOp, Cond};
use crate::enforcer::{
    check_determinism, enforced_lts, is_well_formed, synth_enforcer_with, Enforcer,
};
use crate::error::Result;
use crate::formula::Formula;
use crate::logic::{denot, satisfies_at, violation, Valuation};
use crate::lts::{explore_process, reachable_lts, STATE_BUDGET};
use crate::monitor::{monitored_lts, synth_monitor, Verdict};
use crate::normalize::{normalize_with, NormalizeOptions};
use crate::parse::parse_process;
use crate::pattern::{Pattern, Slot, SymEvent};
use crate::process::Process;
use crate::solver::Solver;
use crate::value::{sym, Action, Dir, Event, Sym, Value};

/// The request/response processes used throughout the examples.
pub const NAMED_PROCESSES: [(&str, &str); 4] = [
    ("p1", "rec x.(i?(req).i!(ans).x + i?(cls).nil)"),
    ("q1", "rec x.(i?(req).x + i?(req).i!(ans).x + i?(cls).nil)"),
    (
        "r1",
        "rec x.(i?(req).i!(ans).(i?(req).i!(ans).x + i?(cls).nil) + i?(cls).nil)",
    ),
    ("s1", "rec x.tau.(i?(req).i!(ans).x + i?(cls).nil)"),
];

pub fn named_process(name: &str) -> Option<Process> {
    NAMED_PROCESSES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| parse_process(src).expect("named process parses"))
}

/// Subjects and payloads of the default fuzzing alphabet.
pub const SUBJECTS: [&str; 2] = ["i", "j"];
pub const PAYLOADS: [&str; 3] = ["req", "ans", "cls"];

/// Every event over [`SUBJECTS`] and [`PAYLOADS`] in both directions.
pub fn default_alphabet() -> Vec<Event> {
    let mut out = Vec::new();
    for s in SUBJECTS {
        for p in PAYLOADS {
            for dir in [Dir::In, Dir::Out] {
                out.push(Event::new(dir, s, Value::atom(p)));
            }
        }
    }
    out
}

/// A reproducible set of processes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub seed: u64,
    pub depth: usize,
    pub count: usize,
    pub alphabet: Vec<Event>,
    pub processes: Vec<Process>,
}

impl Corpus {
    pub fn id(&self) -> String {
        format!(
            "seed={},depth={},count={}",
            self.seed, self.depth, self.count
        )
    }

    pub fn from_processes(processes: Vec<Process>) -> Corpus {
        Corpus {
            seed: 0,
            depth: 0,
            count: processes.len(),
            alphabet: Vec::new(),
            processes,
        }
    }
}

fn gen_proc(
    rng: &mut ChaCha8Rng,
    alphabet: &[Event],
    d: usize,
    guarded: &[Sym],
    next: &mut usize,
) -> Process {
    let pick_var = |rng: &mut ChaCha8Rng| guarded[rng.gen_range(0..guarded.len())].clone();
    if d == 0 {
        return if !guarded.is_empty() && rng.gen_bool(0.5) {
            Process::Var(pick_var(rng))
        } else {
            Process::Nil
        };
    }
    let roll = rng.gen_range(0..100);
    match roll {
        0..=11 => Process::Nil,
        12..=59 => {
            let a = if roll < 56 {
                Action::Ev(alphabet[rng.gen_range(0..alphabet.len())].clone())
            } else {
                Action::Tau
            };
            Process::Prefix(a, Box::new(gen_proc(rng, alphabet, d - 1, guarded, next)))
        }
        60..=77 => Process::Choice(vec![
            gen_proc(rng, alphabet, d - 1, guarded, next),
            gen_proc(rng, alphabet, d - 1, guarded, next),
        ]),
        78..=89 => {
            *next += 1;
            let x = sym(&format!("x{next}"));
            // the body starts with a prefix so that x is guarded
            let a = Action::Ev(alphabet[rng.gen_range(0..alphabet.len())].clone());
            let mut inner = guarded.to_vec();
            inner.push(x.clone());
            let body = Process::Prefix(a, Box::new(gen_proc(rng, alphabet, d - 1, &inner, next)));
            let body = if rng.gen_bool(0.5) {
                Process::Choice(vec![body, gen_proc(rng, alphabet, d - 1, guarded, next)])
            } else {
                body
            };
            Process::Rec(x, Box::new(body))
        }
        _ if !guarded.is_empty() => Process::Var(pick_var(rng)),
        _ => Process::Prefix(
            Action::Ev(alphabet[rng.gen_range(0..alphabet.len())].clone()),
            Box::new(gen_proc(rng, alphabet, d - 1, guarded, next)),
        ),
    }
}

/// Deterministic pseudo-random closed guarded processes, led by the named request/response
/// processes whenever the alphabet contains their events.
pub fn gen_processes(alphabet: &[Event], depth: usize, count: usize, seed: u64) -> Corpus {
    let mut processes = Vec::new();
    let needed = ["i?(req)", "i!(ans)", "i?(cls)"];
    let covers = needed
        .iter()
        .all(|n| alphabet.iter().any(|e| e.to_string() == *n));
    if covers && depth > 0 {
        for (name, _) in NAMED_PROCESSES {
            if processes.len() < count {
                processes.push(named_process(name).expect("named"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while processes.len() < count {
        let mut next = 0;
        let p = if alphabet.is_empty() {
            Process::Nil
        } else {
            gen_proc(&mut rng, alphabet, depth, &[], &mut next)
        };
        processes.push(p);
    }
    Corpus {
        seed,
        depth,
        count,
        alphabet: alphabet.to_vec(),
        processes,
    }
}

/// Random input traces of length at most `max_len`.
pub fn gen_traces(alphabet: &[Event], max_len: usize, count: usize, seed: u64) -> Vec<Vec<Event>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(0..=max_len);
            (0..n)
                .map(|_| alphabet[rng.gen_range(0..alphabet.len())].clone())
                .collect()
        })
        .collect()
}

// random formulae

struct FormulaGen<'a> {
    rng: &'a mut ChaCha8Rng,
    lvars: usize,
    dvars: usize,
}

impl FormulaGen<'_> {
    fn atom(&mut self, pool: &[&str]) -> Value {
        Value::atom(pool[self.rng.gen_range(0..pool.len())])
    }

    fn slot(&mut self, pool: &[&str], scope: &[Sym], binders: &mut Vec<Sym>) -> Slot {
        let roll = self.rng.gen_range(0..100);
        if roll < 60 {
            Slot::Val(self.atom(pool))
        } else if roll < 90 || scope.is_empty() {
            self.dvars += 1;
            let b = sym(&format!("x{}", self.dvars));
            binders.push(b.clone());
            Slot::Var(b)
        } else {
            Slot::Var(scope[self.rng.gen_range(0..scope.len())].clone())
        }
    }

    fn event(&mut self, scope: &[Sym]) -> SymEvent {
        let dir = if self.rng.gen_bool(0.5) {
            Dir::In
        } else {
            Dir::Out
        };
        let mut binders = Vec::new();
        let subject = self.slot(&SUBJECTS, scope, &mut binders);
        let payload = self.slot(&PAYLOADS, scope, &mut binders);
        let mut cond = Cond::True;
        if !binders.is_empty() && self.rng.gen_bool(0.4) {
            let b = binders[self.rng.gen_range(0..binders.len())].clone();
            let pool: &[&str] = if Slot::Var(b.clone()) == subject {
                &SUBJECTS
            } else {
                &PAYLOADS
            };
            let op = if self.rng.gen_bool(0.7) {
                CmpOp::Ne
            } else {
                CmpOp::Eq
            };
            cond = Cond::cmp_var(&b, op, self.atom(pool));
        }
        SymEvent {
            pattern: Pattern::new(dir, subject, payload),
            cond,
            binders: binders.into_iter().collect(),
        }
    }

    fn leaf(&mut self, ff: bool, guarded: &[Sym]) -> Formula {
        if !guarded.is_empty() && self.rng.gen_bool(0.5) {
            return Formula::Var(guarded[self.rng.gen_range(0..guarded.len())].clone());
        }
        if ff {
            Formula::Ff
        } else {
            Formula::Tt
        }
    }

    fn formula(&mut self, d: usize, guarded: &[Sym], unguarded: &[Sym], scope: &[Sym]) -> Formula {
        if d == 0 {
            let ff = self.rng.gen_bool(0.5);
            return self.leaf(ff, guarded);
        }
        match self.rng.gen_range(0..100) {
            0..=39 => {
                let e = self.event(scope);
                let mut g: Vec<Sym> = guarded.to_vec();
                g.extend(unguarded.iter().cloned());
                let mut inner = scope.to_vec();
                inner.extend(e.binders.iter().cloned());
                Formula::Nec(e, Box::new(self.formula(d - 1, &g, &[], &inner)))
            }
            40..=64 => Formula::And(vec![
                self.formula(d - 1, guarded, unguarded, scope),
                self.formula(d - 1, guarded, unguarded, scope),
            ]),
            65..=79 => {
                self.lvars += 1;
                let x = sym(&format!("X{}", self.lvars));
                let mut u = unguarded.to_vec();
                u.push(x.clone());
                Formula::Max(x, Box::new(self.formula(d - 1, guarded, &u, scope)))
            }
            80..=89 => self.leaf(true, guarded),
            _ => self.leaf(false, guarded),
        }
    }
}

/// A random closed, guarded sHML formula of depth at most `depth`.
///
/// Operator weights: necessity 40, conjunction 25, greatest fixpoint 15, `ff` 10, `tt` 10.
/// Leaves are replaced by a guarded fixpoint variable half of the time when one is in scope.
pub fn gen_formula(rng: &mut ChaCha8Rng, depth: usize) -> Formula {
    FormulaGen {
        rng,
        lvars: 0,
        dvars: 0,
    }
    .formula(depth, &[], &[], &[])
}

/// Candidate simplifications of `f`, each strictly smaller.
pub fn shrink_candidates(f: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    let fl = f.free_lvars();
    let fd = f.free_data();
    let ok = |g: &Formula| g.free_lvars().is_subset(&fl) && g.free_data().is_subset(&fd);
    if !matches!(f, Formula::Tt | Formula::Ff) {
        out.push(Formula::Tt);
        out.push(Formula::Ff);
    }
    match f {
        Formula::And(fs) => {
            for (i, g) in fs.iter().enumerate() {
                if ok(g) {
                    out.push(g.clone());
                }
                let mut rest = fs.clone();
                rest.remove(i);
                out.push(if rest.len() == 1 {
                    rest.pop().unwrap()
                } else {
                    Formula::And(rest)
                });
                for c in shrink_candidates(g) {
                    let mut v = fs.clone();
                    v[i] = c;
                    out.push(Formula::And(v));
                }
            }
        }
        Formula::Nec(e, g) => {
            if ok(g) {
                out.push((**g).clone());
            }
            if e.cond != Cond::True {
                out.push(Formula::Nec(
                    SymEvent {
                        cond: Cond::True,
                        ..e.clone()
                    },
                    g.clone(),
                ));
            }
            for c in shrink_candidates(g) {
                out.push(Formula::Nec(e.clone(), Box::new(c)));
            }
        }
        Formula::Max(x, g) => {
            if ok(g) {
                out.push((**g).clone());
            }
            for c in shrink_candidates(g) {
                out.push(Formula::Max(x.clone(), Box::new(c)));
            }
        }
        _ => {}
    }
    out.retain(|g| g != f && g.free_lvars().is_subset(&fl));
    out
}

/// Greedily shrinks `f` while `fails` keeps holding.
pub fn minimize(f: &Formula, mut fails: impl FnMut(&Formula) -> bool) -> Formula {
    let mut cur = f.clone();
    let mut rounds = 0;
    'outer: while rounds < 200 {
        rounds += 1;
        for c in shrink_candidates(&cur) {
            if fails(&c) {
                cur = c;
                continue 'outer;
            }
        }
        break;
    }
    cur
}

// reports

/// A replayable witness of a failed check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub process: String,
    pub trace: String,
    pub expected: String,
    pub actual: String,
}

/// Outcome of one corpus-relative check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub check: String,
    pub corpus: String,
    pub checked: usize,
    pub counterexamples: Vec<Counterexample>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(check: &str, corpus: &str) -> CheckReport {
        CheckReport {
            check: check.to_string(),
            corpus: corpus.to_string(),
            checked: 0,
            counterexamples: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }

    fn fail(&mut self, process: &Process, trace: String, expected: &str, actual: &str) {
        self.counterexamples.push(Counterexample {
            process: process.to_string(),
            trace,
            expected: expected.to_string(),
            actual: actual.to_string(),
        });
    }
}

pub fn render_trace(t: &[Event]) -> String {
    t.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Every enforced process satisfies `phi`.
pub fn check_soundness(e: &Enforcer, phi: &Formula, corpus: &Corpus) -> Result<CheckReport> {
    let mut r = CheckReport::new("soundness", &corpus.id());
    for p in &corpus.processes {
        r.checked += 1;
        let (lts, _) = enforced_lts(e, p, STATE_BUDGET)?;
        if let Some(t) = violation(&lts, lts.init, phi)? {
            r.fail(
                p,
                render_trace(&t),
                "enforced system satisfies the formula",
                "enforced system violates it along the trace",
            );
        }
    }
    Ok(r)
}

/// Every satisfying process is strongly bisimilar to its enforced version.
pub fn check_transparency(e: &Enforcer, phi: &Formula, corpus: &Corpus) -> Result<CheckReport> {
    let mut r = CheckReport::new("transparency", &corpus.id());
    let mut satisfying = 0;
    for p in &corpus.processes {
        r.checked += 1;
        let plts = reachable_lts(p)?;
        if !satisfies_at(&plts, plts.init, phi)? {
            continue;
        }
        satisfying += 1;
        let (elts, _) = enforced_lts(e, p, STATE_BUDGET)?;
        let b = lts_bisim(&elts, &plts, false);
        if !b.equivalent {
            let play: Vec<String> = b
                .moves
                .iter()
                .map(|m| {
                    format!(
                        "{}:{}",
                        if m.side == Side::Left {
                            "enforced"
                        } else {
                            "process"
                        },
                        m.action
                    )
                })
                .collect();
            r.fail(
                p,
                play.join(","),
                "enforced system strongly bisimilar to the process",
                "distinguishing play",
            );
        }
    }
    r.notes.push(format!("{satisfying} satisfying processes"));
    Ok(r)
}

/// `phi` and `psi` agree on every corpus process.
pub fn check_equivalence(phi: &Formula, psi: &Formula, corpus: &Corpus) -> Result<CheckReport> {
    let mut r = CheckReport::new("equivalence", &corpus.id());
    for p in &corpus.processes {
        r.checked += 1;
        let lts = reachable_lts(p)?;
        let a = violation(&lts, lts.init, phi)?;
        let b = violation(&lts, lts.init, psi)?;
        match (a, b) {
            (None, Some(t)) => r.fail(
                p,
                render_trace(&t),
                "second formula holds as the first does",
                "only the second is violated",
            ),
            (Some(t), None) => r.fail(
                p,
                render_trace(&t),
                "first formula holds as the second does",
                "only the first is violated",
            ),
            _ => {}
        }
    }
    Ok(r)
}

/// Rejections by the monitor synthesized from `phi` only happen on violating processes.
pub fn check_enf_mon_bridge(phi: &Formula, corpus: &Corpus) -> Result<CheckReport> {
    let mut r = CheckReport::new("bridge", &corpus.id());
    let m = synth_monitor(phi)?;
    let mut unrejected = 0;
    for p in &corpus.processes {
        r.checked += 1;
        let (_, states) = monitored_lts(&m, p, STATE_BUDGET)?;
        let rejected = states
            .iter()
            .any(|s| s.monitor.verdict() == Some(Verdict::No));
        let plts = reachable_lts(p)?;
        let sat = satisfies_at(&plts, plts.init, phi)?;
        if rejected && sat {
            r.fail(
                p,
                String::new(),
                "rejected processes violate the formula",
                "rejected a satisfying process",
            );
        }
        if !sat && !rejected {
            unrejected += 1;
        }
    }
    r.notes.push(format!(
        "{unrejected} violating processes not rejected (completeness, corpus-relative)"
    ));
    Ok(r)
}

/// [`check_determinism`] as a check report.
pub fn determinism_report(e: &Enforcer, traces: &[Vec<Event>]) -> CheckReport {
    let d = check_determinism(e, traces);
    let mut r = CheckReport::new("determinism", &format!("{} traces", traces.len()));
    r.checked = d.checked;
    for (t, outcomes) in d.failures {
        r.counterexamples.push(Counterexample {
            process: e.to_string(),
            trace: render_trace(&t),
            expected: "exactly one outcome".to_string(),
            actual: outcomes.join(" | "),
        });
    }
    r
}

// fuzzing

/// Sizes for [`fuzz`].
#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub seed: u64,
    pub formulas: usize,
    pub formula_depth: usize,
    pub corpus: usize,
    pub process_depth: usize,
    pub traces: usize,
    pub trace_len: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 1,
            formulas: 200,
            formula_depth: 5,
            corpus: 50,
            process_depth: 5,
            traces: 20,
            trace_len: 6,
        }
    }
}

/// One failing formula, before and after shrinking.
#[derive(Clone, Debug)]
pub struct FuzzFailure {
    pub formula: Formula,
    pub minimized: Formula,
    pub check: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct FuzzOutcome {
    pub formulas: usize,
    /// Formulae normalizing to `ff`, which have no enforcer.
    pub unsatisfiable: usize,
    pub processes_checked: usize,
    pub oracle_pairs: usize,
    pub oracle_disagreements: Vec<String>,
    pub failures: Vec<FuzzFailure>,
}

/// Runs the enforcement pipeline on `phi` and returns the first failing check.
pub fn pipeline(
    phi: &Formula,
    corpus: &Corpus,
    traces: &[Vec<Event>],
    solver: &Solver,
) -> Option<(String, String)> {
    let run = || -> Result<Option<(String, String)>> {
        let opts = NormalizeOptions {
            prune: true,
            solver: solver.clone(),
        };
        let nf = normalize_with(phi, &opts)?;
        if nf == Formula::Ff {
            return Ok(None);
        }
        let eq = check_equivalence(phi, &nf, corpus)?;
        if !eq.passed() {
            return Ok(Some((
                "equivalence".into(),
                format!("{:?}", eq.counterexamples[0]),
            )));
        }
        let e = synth_enforcer_with(&nf, solver)?;
        if !is_well_formed(&e, solver)? {
            return Ok(Some(("well-formedness".into(), e.to_string())));
        }
        let det = determinism_report(&e, traces);
        if !det.passed() {
            return Ok(Some((
                "determinism".into(),
                format!("{:?}", det.counterexamples[0]),
            )));
        }
        for rep in [
            check_soundness(&e, phi, corpus)?,
            check_transparency(&e, phi, corpus)?,
        ] {
            if !rep.passed() {
                return Ok(Some((
                    rep.check.clone(),
                    format!("{e}: {:?}", rep.counterexamples[0]),
                )));
            }
        }
        Ok(None)
    };
    match run() {
        Ok(r) => r,
        Err(err) => Some(("error".into(), err.to_string())),
    }
}

/// Random formulae through normalization, synthesis and every enforcement check, with
/// satisfaction cross-checked against fixpoint evaluation.
pub fn fuzz(cfg: &FuzzConfig) -> Result<FuzzOutcome> {
    let solver = Solver::default();
    let alphabet = default_alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = FuzzOutcome::default();
    let mut attempt = 0u64;
    while out.formulas < cfg.formulas && attempt < 20 * cfg.formulas as u64 + 20 {
        attempt += 1;
        let phi = gen_formula(&mut rng, cfg.formula_depth);
        let nf = normalize_with(&phi, &NormalizeOptions::default());
        if nf.as_ref().ok() == Some(&Formula::Ff) {
            out.unsatisfiable += 1;
            continue;
        }
        out.formulas += 1;
        let corpus = gen_processes(
            &alphabet,
            cfg.process_depth,
            cfg.corpus,
            cfg.seed.wrapping_mul(7919).wrapping_add(attempt),
        );
        let traces = gen_traces(
            &alphabet,
            cfg.trace_len,
            cfg.traces,
            cfg.seed.wrapping_mul(104_729).wrapping_add(attempt),
        );
        for p in &corpus.processes {
            let (lts, _) = explore_process(p, STATE_BUDGET)?;
            let by_rules = satisfies_at(&lts, lts.init, &phi)?;
            let by_fixpoint = denot(&phi, &lts, &Valuation::new())?.contains(&lts.init);
            out.oracle_pairs += 1;
            if by_rules != by_fixpoint {
                out.oracle_disagreements.push(format!("{phi} on {p}"));
            }
        }
        out.processes_checked += corpus.processes.len();
        if let Some((check, detail)) = pipeline(&phi, &corpus, &traces, &solver) {
            let minimized = minimize(&phi, |g| {
                pipeline(g, &corpus, &traces, &solver).is_some_and(|(c, _)| c == check)
            });
            out.failures.push(FuzzFailure {
                formula: phi,
                minimized,
                check,
                detail,
            });
        }
    }
    Ok(out)
}

/// Names used by a formula's data binders, for building a finite enumeration universe.
pub fn formula_values(f: &Formula) -> BTreeSet<Value> {
    fn go(f: &Formula, out: &mut BTreeSet<Value>) {
        match f {
            Formula::Nec(e, g) | Formula::Pos(e, g) => {
                for s in e.pattern.slots() {
                    if let Slot::Val(v) = s {
                        out.insert(v.clone());
                    }
                }
                e.cond.collect_values(out);
                go(g, out);
            }
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| go(g, out)),
            Formula::Max(_, g) | Formula::Min(_, g) => go(g, out),
            _ => {}
        }
    }
    let mut out = BTreeSet::new();
    go(f, &mut out);
    out
}

// disjointness oracle

const ORACLE_ATOMS: [&str; 4] = ["h", "i", "j", "req"];

fn oracle_value(rng: &mut ChaCha8Rng, subject: bool) -> Value {
    if subject || rng.gen_bool(0.5) {
        Value::atom(ORACLE_ATOMS[rng.gen_range(0..if subject { 3 } else { 4 })])
    } else {
        Value::Int(rng.gen_range(-2..=4))
    }
}

fn oracle_cond(rng: &mut ChaCha8Rng, vars: &[(Sym, bool)], depth: usize) -> Cond {
    let roll = rng.gen_range(0..100);
    if depth > 0 && roll < 30 {
        let parts = (0..2).map(|_| oracle_cond(rng, vars, depth - 1));
        return if roll < 15 {
            Cond::and_all(parts)
        } else {
            Cond::or_all(parts)
        };
    }
    if depth > 0 && roll < 38 {
        return oracle_cond(rng, vars, depth - 1).negate();
    }
    let (x, subject) = vars[rng.gen_range(0..vars.len())].clone();
    if roll < 48 && vars.len() > 1 {
        let (y, _) = vars[rng.gen_range(0..vars.len())].clone();
        return Cond::eq_vars(&x, &y);
    }
    if roll < 58 {
        let set = (0..rng.gen_range(1..=3))
            .map(|_| oracle_value(rng, subject))
            .collect();
        return Cond::member(crate::cond::Term::Var(x), set, rng.gen_bool(0.5));
    }
    let ops = [
        CmpOp::Eq,
        CmpOp::Ne,
        CmpOp::Lt,
        CmpOp::Le,
        CmpOp::Gt,
        CmpOp::Ge,
    ];
    let op = if subject {
        ops[rng.gen_range(0..2)]
    } else {
        ops[rng.gen_range(0..6)]
    };
    let v = if op.is_order() {
        Value::Int(rng.gen_range(-2..=4))
    } else {
        oracle_value(rng, subject)
    };
    Cond::cmp_var(&x, op, v)
}

/// A random closed symbolic event over a small mixed atom/integer vocabulary.
pub fn gen_sym_event(rng: &mut ChaCha8Rng, tag: &str) -> SymEvent {
    let dir = if rng.gen_bool(0.8) { Dir::In } else { Dir::Out };
    let mut vars = Vec::new();
    let subject = if rng.gen_bool(0.6) {
        let x = sym(&format!("{tag}s"));
        vars.push((x.clone(), true));
        Slot::Var(x)
    } else {
        Slot::Val(oracle_value(rng, true))
    };
    let payload = if rng.gen_bool(0.7) {
        let x = sym(&format!("{tag}p"));
        vars.push((x.clone(), false));
        Slot::Var(x)
    } else {
        Slot::Val(oracle_value(rng, false))
    };
    let cond = if vars.is_empty() || rng.gen_bool(0.2) {
        Cond::True
    } else {
        oracle_cond(rng, &vars, 2)
    };
    SymEvent {
        pattern: Pattern::new(dir, subject, payload),
        cond,
        binders: vars.into_iter().map(|(x, _)| x).collect(),
    }
}

/// Disjointness by brute force over every event built from the mentioned values, the
/// integers -8..=8 and two fresh atoms.
pub fn enumerate_disjoint(a: &SymEvent, b: &SymEvent) -> Result<bool> {
    let mut vals: BTreeSet<Value> = (-8..=8).map(Value::Int).collect();
    for e in [a, b] {
        for s in e.pattern.slots() {
            if let Slot::Val(v) = s {
                vals.insert(v.clone());
            }
        }
        e.cond.collect_values(&mut vals);
    }
    vals.insert(Value::atom("fresh_a"));
    vals.insert(Value::atom("fresh_b"));
    let universe: Vec<Value> = vals.into_iter().collect();
    for ev in crate::pattern::universe_events(&universe) {
        if a.try_match(&ev)?.is_some() && b.try_match(&ev)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Compares the symbolic disjointness decision with enumeration on `count` random pairs and
/// returns the disagreements.
pub fn disjointness_oracle(count: usize, seed: u64) -> Result<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..count {
        let a = gen_sym_event(&mut rng, "a");
        let b = gen_sym_event(&mut rng, "b");
        let sym_answer = crate::solver::symbolic_disjoint(&a, &b)?;
        let brute = enumerate_disjoint(&a, &b)?;
        if sym_answer != brute {
            out.push(format!(
                "{a} / {b}: symbolic {sym_answer}, enumeration {brute}"
            ));
        }
    }
    Ok(out)
}
