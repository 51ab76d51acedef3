//! Formula semantics over finite LTSs: fixpoint evaluation, the safety satisfaction
//! relation and bounded satisfiability.
//!
//! Modalities range over weak visible transitions `s =a=> t`, so silent steps are
//! transparent to the logic.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::bisim::lts_bisim;
use crate::cond::Subst;
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::lts::{reachable_lts, Lts};
use crate::pattern::SymEvent;
use crate::process::Process;
use crate::solver::Solver;
use crate::value::{Action, Event, Sym};

/// Logical variable valuation.
pub type Valuation = BTreeMap<Sym, BTreeSet<usize>>;

struct Eval<'a> {
    moves: &'a [Vec<(Event, usize)>],
    all: BTreeSet<usize>,
}

impl Eval<'_> {
    fn modal(
        &self,
        e: &SymEvent,
        g: &Formula,
        rho: &Valuation,
        forall: bool,
    ) -> Result<BTreeSet<usize>> {
        let mut cache: BTreeMap<Subst, BTreeSet<usize>> = BTreeMap::new();
        let mut out = BTreeSet::new();
        for s in &self.all {
            let mut ok = forall;
            for (a, t) in &self.moves[*s] {
                let Some(sigma) = e.try_match(a)? else {
                    continue;
                };
                if !cache.contains_key(&sigma) {
                    let v = self.eval(&g.subst_data(&sigma), rho)?;
                    cache.insert(sigma.clone(), v);
                }
                let inside = cache[&sigma].contains(t);
                if forall && !inside {
                    ok = false;
                    break;
                }
                if !forall && inside {
                    ok = true;
                    break;
                }
            }
            if ok {
                out.insert(*s);
            }
        }
        Ok(out)
    }

    fn fixpoint(
        &self,
        x: &Sym,
        g: &Formula,
        rho: &Valuation,
        greatest: bool,
    ) -> Result<Vec<BTreeSet<usize>>> {
        let mut cur = if greatest {
            self.all.clone()
        } else {
            BTreeSet::new()
        };
        let mut chain = vec![cur.clone()];
        let mut env = rho.clone();
        loop {
            env.insert(x.clone(), cur.clone());
            let next = self.eval(g, &env)?;
            if next == cur {
                return Ok(chain);
            }
            chain.push(next.clone());
            cur = next;
        }
    }

    fn eval(&self, f: &Formula, rho: &Valuation) -> Result<BTreeSet<usize>> {
        Ok(match f {
            Formula::Tt => self.all.clone(),
            Formula::Ff => BTreeSet::new(),
            Formula::Var(x) => rho
                .get(x)
                .cloned()
                .ok_or_else(|| Error::FreeVariables(x.to_string()))?,
            Formula::And(fs) => {
                let mut acc = self.all.clone();
                for g in fs {
                    if acc.is_empty() {
                        break;
                    }
                    let v = self.eval(g, rho)?;
                    acc.retain(|s| v.contains(s));
                }
                acc
            }
            Formula::Or(fs) => {
                let mut acc = BTreeSet::new();
                for g in fs {
                    acc.extend(self.eval(g, rho)?);
                }
                acc
            }
            Formula::Nec(e, g) => self.modal(e, g, rho, true)?,
            Formula::Pos(e, g) => self.modal(e, g, rho, false)?,
            Formula::Max(x, g) => self.fixpoint(x, g, rho, true)?.pop().unwrap(),
            Formula::Min(x, g) => self.fixpoint(x, g, rho, false)?.pop().unwrap(),
        })
    }
}

/// The set of states of `lts` satisfying `f` under `rho`.
pub fn denot(f: &Formula, lts: &Lts, rho: &Valuation) -> Result<BTreeSet<usize>> {
    let moves = lts.weak_moves();
    let ev = Eval {
        moves: &moves,
        all: (0..lts.len()).collect(),
    };
    ev.eval(f, rho)
}

/// The iteration chain of an outermost fixpoint, ending with its value.
pub fn fixpoint_chain(f: &Formula, lts: &Lts, rho: &Valuation) -> Result<Vec<BTreeSet<usize>>> {
    let moves = lts.weak_moves();
    let ev = Eval {
        moves: &moves,
        all: (0..lts.len()).collect(),
    };
    match f {
        Formula::Max(x, g) => ev.fixpoint(x, g, rho, true),
        Formula::Min(x, g) => ev.fixpoint(x, g, rho, false),
        _ => Ok(vec![ev.eval(f, rho)?]),
    }
}

enum Node {
    Holds,
    Fails,
    All(Vec<usize>),
    Nec(SymEvent, Formula),
}

/// Closure of a safety formula under unfolding and data substitution.
#[derive(Default)]
struct Closure {
    ids: BTreeMap<Formula, usize>,
    nodes: Vec<Node>,
    inst: BTreeMap<(usize, Subst), usize>,
}

impl Closure {
    fn intern(&mut self, f: &Formula) -> Result<usize> {
        if let Some(&i) = self.ids.get(f) {
            return Ok(i);
        }
        let i = self.nodes.len();
        self.ids.insert(f.clone(), i);
        self.nodes.push(Node::Holds);
        let node = match f {
            Formula::Tt => Node::Holds,
            Formula::Ff => Node::Fails,
            Formula::And(fs) => {
                Node::All(fs.iter().map(|g| self.intern(g)).collect::<Result<_>>()?)
            }
            Formula::Max(..) => Node::All(vec![self.intern(&f.unfold())?]),
            Formula::Nec(e, g) => Node::Nec(e.clone(), (**g).clone()),
            Formula::Var(x) => return Err(Error::FreeVariables(x.to_string())),
            _ => return Err(Error::NotShml),
        };
        self.nodes[i] = node;
        Ok(i)
    }

    fn instance(&mut self, i: usize, sigma: &Subst) -> Result<usize> {
        let key = (i, sigma.clone());
        if let Some(&j) = self.inst.get(&key) {
            return Ok(j);
        }
        let Node::Nec(_, g) = &self.nodes[i] else {
            unreachable!()
        };
        let g = g.subst_data(sigma);
        let j = self.intern(&g)?;
        self.inst.insert(key, j);
        Ok(j)
    }
}

/// A (state, formula-instance) pair awaiting a verdict.
type Obligation = (usize, usize);

/// For a safety formula: `None` if state `s` satisfies `f`, otherwise a shortest weak
/// trace from `s` to a state where the formula demands `ff`.
///
/// The satisfaction relation is the largest one closed under the rules; a pair fails
/// exactly when a chain of rule obligations reaches `ff`, which a breadth-first search
/// over (state, formula) pairs finds.
pub fn violation(lts: &Lts, s: usize, f: &Formula) -> Result<Option<Vec<Event>>> {
    let moves = lts.weak_moves();
    violation_with(&moves, s, f)
}

fn violation_with(
    moves: &[Vec<(Event, usize)>],
    s: usize,
    f: &Formula,
) -> Result<Option<Vec<Event>>> {
    let mut cl = Closure::default();
    let root = cl.intern(f)?;
    let mut parent: BTreeMap<Obligation, Option<(Obligation, Option<Event>)>> = BTreeMap::new();
    parent.insert((s, root), None);
    let mut queue = VecDeque::from([(s, root)]);
    while let Some((st, fi)) = queue.pop_front() {
        let mut succ: Vec<((usize, usize), Option<Event>)> = Vec::new();
        match &cl.nodes[fi] {
            Node::Holds => {}
            Node::Fails => {
                let mut trace = Vec::new();
                let mut cur = (st, fi);
                while let Some(Some((prev, ev))) = parent.get(&cur) {
                    if let Some(e) = ev {
                        trace.push(e.clone());
                    }
                    cur = *prev;
                }
                trace.reverse();
                return Ok(Some(trace));
            }
            Node::All(cs) => succ.extend(cs.iter().map(|&c| ((st, c), None))),
            Node::Nec(e, _) => {
                let e = e.clone();
                for (a, t) in &moves[st] {
                    if let Some(sigma) = e.try_match(a)? {
                        let j = cl.instance(fi, &sigma)?;
                        succ.push(((*t, j), Some(a.clone())));
                    }
                }
            }
        }
        for (n, ev) in succ {
            if let alloc::collections::btree_map::Entry::Vacant(v) = parent.entry(n) {
                v.insert(Some(((st, fi), ev)));
                queue.push_back(n);
            }
        }
    }
    Ok(None)
}

/// Whether state `s` of `lts` satisfies the closed formula `f`.
///
/// Safety formulae use the coinductive satisfaction relation; other formulae fall back to
/// fixpoint evaluation.
pub fn satisfies_at(lts: &Lts, s: usize, f: &Formula) -> Result<bool> {
    if let Some(x) = f.free_lvars().into_iter().next() {
        return Err(Error::FreeVariables(x.to_string()));
    }
    if f.is_shml() {
        Ok(violation(lts, s, f)?.is_none())
    } else {
        Ok(denot(f, lts, &Valuation::new())?.contains(&s))
    }
}

/// Whether the process `p` satisfies the closed formula `f`.
pub fn satisfies(p: &Process, f: &Formula) -> Result<bool> {
    let lts = reachable_lts(p)?;
    satisfies_at(&lts, lts.init, f)
}

/// Bound on the number of candidate LTSs examined by [`bounded_sat`].
pub const SAT_CANDIDATES: usize = 200_000;

/// One concrete witness event per symbolic event of `f`, following data bindings.
pub fn witness_alphabet(f: &Formula, solver: &Solver) -> Result<Vec<Event>> {
    fn go(f: &Formula, solver: &Solver, out: &mut BTreeSet<Event>) -> Result<()> {
        match f {
            Formula::Tt | Formula::Ff | Formula::Var(_) => Ok(()),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().try_for_each(|g| go(g, solver, out)),
            Formula::Max(_, g) | Formula::Min(_, g) => go(g, solver, out),
            Formula::Nec(e, g) | Formula::Pos(e, g) => {
                let Some(w) = solver.witness_event(e)? else {
                    return Ok(());
                };
                let sigma = e.try_match(&w)?.unwrap_or_default();
                out.insert(w);
                go(&g.subst_data(&sigma), solver, out)
            }
        }
    }
    let mut out = BTreeSet::new();
    go(f, solver, &mut out)?;
    Ok(out.into_iter().collect())
}

/// Searches deterministic LTSs with at most `k` states over a witness alphabet of `f`.
///
/// Returns a satisfying process with the most transitions found, preferring fewer states,
/// or `None` when the bounded search finds nothing. `None` does not mean unsatisfiable.
pub fn bounded_sat(f: &Formula, k: usize) -> Result<Option<Process>> {
    if let Some(x) = f.free_lvars().into_iter().next() {
        return Err(Error::FreeVariables(x.to_string()));
    }
    let alphabet = witness_alphabet(f, &Solver::default())?;
    let mut best: Option<(usize, Lts)> = None;
    let mut budget = SAT_CANDIDATES;
    for n in 1..=k.max(1) {
        let slots = n * alphabet.len();
        let mut digits = vec![0usize; slots];
        loop {
            if budget == 0 {
                return Ok(best.map(|(_, l)| l.to_process()));
            }
            budget -= 1;
            let lts = candidate(n, &alphabet, &digits);
            let edges = lts.edge_count();
            let better = best.as_ref().is_none_or(|(b, _)| edges > *b);
            if better && all_reachable(&lts) && satisfies_at(&lts, 0, f)? {
                best = Some((edges, lts));
                if edges == slots {
                    break;
                }
            }
            if !advance(&mut digits, n + 1) {
                break;
            }
        }
    }
    Ok(best.map(|(_, l)| {
        let p = l.to_process();
        debug_assert!(satisfies(&p, f).unwrap_or(false));
        p
    }))
}

fn candidate(n: usize, alphabet: &[Event], digits: &[usize]) -> Lts {
    let m = alphabet.len();
    let edges = (0..n)
        .map(|s| {
            (0..m)
                .filter(|a| digits[s * m + a] > 0)
                .map(|a| (Action::Ev(alphabet[a].clone()), digits[s * m + a] - 1))
                .collect()
        })
        .collect();
    Lts {
        labels: (0..n).map(|s| format!("s{s}")).collect(),
        edges,
        init: 0,
    }
}

fn all_reachable(lts: &Lts) -> bool {
    let mut seen = BTreeSet::from([0]);
    let mut stack = vec![0];
    while let Some(s) = stack.pop() {
        for (_, t) in &lts.edges[s] {
            if seen.insert(*t) {
                stack.push(*t);
            }
        }
    }
    seen.len() == lts.len()
}

fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Outcome of checking that strongly bisimilar processes agree on a set of formulae.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HmtReport {
    pub bisimilar: bool,
    /// `(p satisfies, q satisfies)` per formula.
    pub verdicts: Vec<(bool, bool)>,
}

impl HmtReport {
    /// Index of a formula distinguishing the processes.
    pub fn distinguishing(&self) -> Option<usize> {
        self.verdicts.iter().position(|(a, b)| a != b)
    }

    /// Fails only when bisimilar processes are told apart by a formula.
    pub fn pass(&self) -> bool {
        !self.bisimilar || self.distinguishing().is_none()
    }
}

pub fn check_hmt(p: &Process, q: &Process, formulae: &[Formula]) -> Result<HmtReport> {
    let lp = reachable_lts(p)?;
    let lq = reachable_lts(q)?;
    let bisimilar = lts_bisim(&lp, &lq, false).equivalent;
    let verdicts = formulae
        .iter()
        .map(|f| {
            Ok((
                satisfies_at(&lp, lp.init, f)?,
                satisfies_at(&lq, lq.init, f)?,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(HmtReport {
        bisimilar,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_process};

    const P1: &str = "rec x.(i?(req).i!(ans).x + i?(cls).nil)";
    const Q1: &str = "rec x.(i?(req).x + i?(req).i!(ans).x + i?(cls).nil)";
    const PHI1: &str = "max X.[$x?(req) when $x != j]([$x!(ans)]X & [$x?(req)]ff)";

    #[test]
    fn union_evaluation() {
        let p = reachable_lts(&parse_process(P1).unwrap()).unwrap();
        let q = reachable_lts(&parse_process(Q1).unwrap()).unwrap();
        let u = p.disjoint_union(&q);
        let f = parse_formula(PHI1).unwrap();
        let got = denot(&f, &u, &Valuation::new()).unwrap();
        let q1 = p.len();
        let expect: BTreeSet<usize> = (0..u.len()).filter(|&s| s != q1).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn violation_trace() {
        let f = parse_formula(PHI1).unwrap();
        let q = reachable_lts(&parse_process(Q1).unwrap()).unwrap();
        let t = violation(&q, 0, &f).unwrap().unwrap();
        let shown: Vec<_> = t.iter().map(|e| e.to_string()).collect();
        assert_eq!(shown, ["i?(req)", "i?(req)"]);
        assert!(satisfies(&parse_process(P1).unwrap(), &f).unwrap());
    }

    #[test]
    fn silent_steps_are_transparent() {
        let f = parse_formula("[i?(req)][i?(req)]ff").unwrap();
        let p = parse_process("i?(req).tau.i?(req).nil").unwrap();
        assert!(!satisfies(&p, &f).unwrap());
    }

    #[test]
    fn bounded_search() {
        assert_eq!(bounded_sat(&Formula::Ff, 2).unwrap(), None);
        assert_eq!(bounded_sat(&Formula::Tt, 1).unwrap(), Some(Process::Nil));
        let f = parse_formula("max X.([i?(req)][i!(ans)]X & [i?(req)][i?(req)]ff)").unwrap();
        let p = bounded_sat(&f, 3).unwrap().unwrap();
        assert!(satisfies(&p, &f).unwrap());
        assert!(p.to_string().contains("req"));
        let g = parse_formula("<i?(req)>tt").unwrap();
        let p = bounded_sat(&g, 1).unwrap().unwrap();
        assert!(satisfies(&p, &g).unwrap());
    }
}
