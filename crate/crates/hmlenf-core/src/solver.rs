//! Satisfiability of conditions and disjointness of symbolic events.
//!
//! Conditions are expanded to disjunctive normal form. Each clause is decided by merging
//! variable equalities with a union-find, then checking every class against its constant,
//! interval, membership, exclusion and sort constraints. Disequalities between classes are
//! resolved by a small backtracking search over candidate values, which is complete because
//! every class with an unbounded domain is offered more candidates than it has neighbours.
//! Orderings between two variables fall outside this fragment.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::cond::{CmpOp, Cond, Subst, Term};
use crate::error::{Error, Result};
use crate::pattern::{Slot, SymEvent};
use crate::value::{sym, Sort, Sym, Value};

const MAX_CLAUSES: usize = 4096;
const MAX_ENUMERATION: usize = 2_000_000;

/// Atomic constraint of a DNF clause.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Lit {
    Cmp(Term, CmpOp, Term),
    Member(Term, Vec<Value>, bool),
    NotInt(Term),
    IsAtom(Term),
}

/// Negation normal form with literals at the leaves.
enum N {
    True,
    False,
    Lit(Lit),
    And(Vec<N>),
    Or(Vec<N>),
}

fn nnf(c: &Cond, neg: bool) -> N {
    match (c, neg) {
        (Cond::True, false) | (Cond::False, true) => N::True,
        (Cond::True, true) | (Cond::False, false) => N::False,
        (Cond::Not(d), _) => nnf(d, !neg),
        (Cond::And(cs), false) => N::And(cs.iter().map(|d| nnf(d, false)).collect()),
        (Cond::Or(cs), false) => N::Or(cs.iter().map(|d| nnf(d, false)).collect()),
        (Cond::And(cs), true) => N::Or(cs.iter().map(|d| nnf(d, true)).collect()),
        (Cond::Or(cs), true) => N::And(cs.iter().map(|d| nnf(d, true)).collect()),
        (Cond::Member(t, s, n), _) => N::Lit(Lit::Member(t.clone(), s.clone(), *n != neg)),
        (Cond::Cmp(a, op, b), false) => N::Lit(Lit::Cmp(a.clone(), *op, b.clone())),
        (Cond::Cmp(a, op, b), true) => match op {
            CmpOp::Eq => N::Lit(Lit::Cmp(a.clone(), CmpOp::Ne, b.clone())),
            CmpOp::Ne => N::Lit(Lit::Cmp(a.clone(), CmpOp::Eq, b.clone())),
            _ => {
                // not (a < b) holds when either side is not an integer, or a >= b
                let inv = match op {
                    CmpOp::Lt => CmpOp::Ge,
                    CmpOp::Le => CmpOp::Gt,
                    CmpOp::Gt => CmpOp::Le,
                    _ => CmpOp::Lt,
                };
                let mut alts = vec![N::Lit(Lit::Cmp(a.clone(), inv, b.clone()))];
                for t in [a, b] {
                    match t {
                        Term::Val(v) if v.as_int().is_none() => return N::True,
                        Term::Val(_) => {}
                        Term::Var(_) => alts.push(N::Lit(Lit::NotInt(t.clone()))),
                    }
                }
                N::Or(alts)
            }
        },
    }
}

fn too_many(c: &Cond) -> Error {
    Error::FragmentExceeded(format!("{c}: too many clauses"))
}

fn dnf(n: &N, src: &Cond) -> Result<Vec<Vec<Lit>>> {
    Ok(match n {
        N::True => vec![Vec::new()],
        N::False => Vec::new(),
        N::Lit(l) => vec![vec![l.clone()]],
        N::Or(cs) => {
            let mut out = Vec::new();
            for d in cs {
                out.extend(dnf(d, src)?);
                if out.len() > MAX_CLAUSES {
                    return Err(too_many(src));
                }
            }
            out
        }
        N::And(cs) => {
            let mut acc = vec![Vec::new()];
            for d in cs {
                let ds = dnf(d, src)?;
                let mut next = Vec::new();
                for a in &acc {
                    for b in &ds {
                        let mut cl: Vec<Lit> = a.clone();
                        cl.extend(b.iter().cloned());
                        next.push(cl);
                    }
                }
                if next.len() > MAX_CLAUSES {
                    return Err(too_many(src));
                }
                acc = next;
            }
            acc
        }
    })
}

fn eval_lit(l: &Lit, s: &Subst) -> Result<bool> {
    let get = |t: &Term| match t {
        Term::Val(v) => Ok(v.clone()),
        Term::Var(x) => s
            .get(x)
            .cloned()
            .ok_or_else(|| Error::OpenCondition(x.clone())),
    };
    Ok(match l {
        Lit::Cmp(a, op, b) => op.holds(&get(a)?, &get(b)?),
        Lit::Member(t, set, n) => set.contains(&get(t)?) != *n,
        Lit::NotInt(t) => get(t)?.as_int().is_none(),
        Lit::IsAtom(t) => get(t)?.is_atom(),
    })
}

#[derive(Clone, Debug)]
struct Class {
    konst: Option<Value>,
    excluded: BTreeSet<Value>,
    lo: Option<i64>,
    hi: Option<i64>,
    only: Option<BTreeSet<Value>>,
    sorts: [bool; 3],
}

impl Default for Class {
    fn default() -> Class {
        Class {
            konst: None,
            excluded: BTreeSet::new(),
            lo: None,
            hi: None,
            only: None,
            sorts: [true; 3],
        }
    }
}

fn sort_ix(s: Sort) -> usize {
    match s {
        Sort::Atom => 0,
        Sort::Int => 1,
        Sort::Tagged => 2,
    }
}

impl Class {
    fn admits(&self, v: &Value) -> bool {
        if !self.sorts[sort_ix(v.sort())] || self.excluded.contains(v) {
            return false;
        }
        if let Some(k) = &self.konst {
            if k != v {
                return false;
            }
        }
        if let Some(only) = &self.only {
            if !only.contains(v) {
                return false;
            }
        }
        if self.lo.is_some() || self.hi.is_some() {
            let Some(n) = v.as_int() else { return false };
            if self.lo.is_some_and(|lo| n < lo) || self.hi.is_some_and(|hi| n > hi) {
                return false;
            }
        }
        true
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let n = self.parent[y];
            self.parent[y] = r;
            y = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

fn fresh_atoms(avoid: &BTreeSet<Value>, n: usize) -> Vec<Value> {
    let mut out = Vec::new();
    let mut k = 0usize;
    while out.len() < n {
        let name = if k == 0 {
            "k".to_string()
        } else {
            format!("k{k}")
        };
        let v = Value::Atom(sym(&name));
        if !avoid.contains(&v) {
            out.push(v);
        }
        k += 1;
    }
    out
}

fn candidate_ints(c: &Class, n: usize) -> Vec<Value> {
    let mut out = Vec::new();
    let ok = |x: i64| c.admits(&Value::Int(x));
    match (c.lo, c.hi) {
        (Some(lo), hi) => {
            let mut x = lo;
            while out.len() < n && hi.is_none_or(|h| x <= h) {
                if ok(x) {
                    out.push(Value::Int(x));
                }
                x = match x.checked_add(1) {
                    Some(y) => y,
                    None => break,
                };
            }
        }
        (None, Some(hi)) => {
            let mut x = hi;
            while out.len() < n {
                if ok(x) {
                    out.push(Value::Int(x));
                }
                x = match x.checked_sub(1) {
                    Some(y) => y,
                    None => break,
                };
            }
        }
        (None, None) => {
            let mut k: i64 = 0;
            while out.len() < n {
                for x in [k, -k - 1] {
                    if out.len() < n && ok(x) {
                        out.push(Value::Int(x));
                    }
                }
                k += 1;
            }
        }
    }
    out
}

fn solve_clause(lits: &[Lit], mentioned: &BTreeSet<Value>) -> Result<Option<Subst>> {
    let mut names: BTreeMap<Sym, usize> = BTreeMap::new();
    let id = |x: &Sym, names: &mut BTreeMap<Sym, usize>| {
        let n = names.len();
        *names.entry(x.clone()).or_insert(n)
    };
    for l in lits {
        let terms: Vec<&Term> = match l {
            Lit::Cmp(a, _, b) => vec![a, b],
            Lit::Member(t, _, _) | Lit::NotInt(t) | Lit::IsAtom(t) => vec![t],
        };
        for t in terms {
            if let Term::Var(x) = t {
                id(x, &mut names);
            }
        }
    }
    let n = names.len();
    let mut uf = UnionFind {
        parent: (0..n).collect(),
    };
    // merge equalities first
    for l in lits {
        match l {
            Lit::Cmp(Term::Var(x), CmpOp::Eq, Term::Var(y)) => uf.union(names[x], names[y]),
            Lit::Cmp(Term::Var(x), op, Term::Var(y)) if op.is_order() => {
                if x == y {
                    if matches!(op, CmpOp::Lt | CmpOp::Gt) {
                        return Ok(None);
                    }
                    continue;
                }
                return Err(Error::FragmentExceeded(format!("${x} {} ${y}", op.text())));
            }
            _ => {}
        }
    }
    let mut classes: BTreeMap<usize, Class> = BTreeMap::new();
    for i in 0..n {
        classes.entry(uf.find(i)).or_default();
    }
    let mut diseq: BTreeSet<(usize, usize)> = BTreeSet::new();
    for l in lits {
        match l {
            Lit::Cmp(Term::Val(a), op, Term::Val(b)) => {
                if !op.holds(a, b) {
                    return Ok(None);
                }
            }
            Lit::Cmp(Term::Var(x), CmpOp::Eq, Term::Var(_)) => {
                let _ = x;
            }
            Lit::Cmp(Term::Var(x), CmpOp::Ne, Term::Var(y)) => {
                let (a, b) = (uf.find(names[x]), uf.find(names[y]));
                if a == b {
                    return Ok(None);
                }
                diseq.insert((a.min(b), a.max(b)));
            }
            Lit::Cmp(Term::Var(_), _, Term::Var(_)) => {}
            Lit::Cmp(a, op, b) => {
                let (x, op, v) = match (a, b) {
                    (Term::Var(x), Term::Val(v)) => (x, *op, v),
                    (Term::Val(v), Term::Var(x)) => (x, op.flip(), v),
                    _ => unreachable!(),
                };
                let c = classes.get_mut(&uf.find(names[x])).unwrap();
                match op {
                    CmpOp::Eq => {
                        if c.konst.as_ref().is_some_and(|k| k != v) {
                            return Ok(None);
                        }
                        c.konst = Some(v.clone());
                    }
                    CmpOp::Ne => {
                        c.excluded.insert(v.clone());
                    }
                    _ => {
                        let Some(k) = v.as_int() else { return Ok(None) };
                        c.sorts = [false, c.sorts[1], false];
                        let (lo, hi) = match op {
                            CmpOp::Lt => (None, k.checked_sub(1)),
                            CmpOp::Le => (None, Some(k)),
                            CmpOp::Gt => (k.checked_add(1), None),
                            _ => (Some(k), None),
                        };
                        if matches!(op, CmpOp::Lt) && lo.is_none() && hi.is_none() {
                            return Ok(None);
                        }
                        if let Some(lo) = lo {
                            c.lo = Some(c.lo.map_or(lo, |o| o.max(lo)));
                        }
                        if let Some(hi) = hi {
                            c.hi = Some(c.hi.map_or(hi, |o| o.min(hi)));
                        }
                    }
                }
            }
            Lit::Member(Term::Val(v), set, neg) => {
                if set.contains(v) == *neg {
                    return Ok(None);
                }
            }
            Lit::Member(Term::Var(x), set, neg) => {
                let c = classes.get_mut(&uf.find(names[x])).unwrap();
                if *neg {
                    c.excluded.extend(set.iter().cloned());
                } else {
                    let s: BTreeSet<Value> = set.iter().cloned().collect();
                    c.only = Some(match c.only.take() {
                        Some(o) => o.intersection(&s).cloned().collect(),
                        None => s,
                    });
                }
            }
            Lit::NotInt(Term::Val(v)) => {
                if v.as_int().is_some() {
                    return Ok(None);
                }
            }
            Lit::NotInt(Term::Var(x)) => {
                classes.get_mut(&uf.find(names[x])).unwrap().sorts[1] = false
            }
            Lit::IsAtom(Term::Val(v)) => {
                if !v.is_atom() {
                    return Ok(None);
                }
            }
            Lit::IsAtom(Term::Var(x)) => {
                let c = classes.get_mut(&uf.find(names[x])).unwrap();
                c.sorts[1] = false;
                c.sorts[2] = false;
            }
        }
    }

    let keys: Vec<usize> = classes.keys().copied().collect();
    let degree = |k: usize| diseq.iter().filter(|(a, b)| *a == k || *b == k).count();
    let mut avoid = mentioned.clone();
    for c in classes.values() {
        avoid.extend(c.excluded.iter().cloned());
    }
    let mut cands: Vec<Vec<Value>> = Vec::new();
    for &k in &keys {
        let c = &classes[&k];
        let list: Vec<Value> = if let Some(v) = &c.konst {
            if c.admits(v) {
                vec![v.clone()]
            } else {
                Vec::new()
            }
        } else if let Some(only) = &c.only {
            only.iter().filter(|v| c.admits(v)).cloned().collect()
        } else {
            let need = degree(k) + 1;
            let mut list = Vec::new();
            if c.sorts[1] {
                list.extend(candidate_ints(c, need));
            }
            if c.sorts[0] && c.lo.is_none() && c.hi.is_none() {
                list.extend(fresh_atoms(&avoid, need));
            }
            if !c.sorts[0] && !c.sorts[1] && c.sorts[2] {
                for i in 0..need {
                    let v = Value::Tagged(sym("k"), alloc::boxed::Box::new(Value::Int(i as i64)));
                    list.push(v);
                }
                list.retain(|v| c.admits(v));
            }
            list
        };
        if list.is_empty() {
            return Ok(None);
        }
        cands.push(list);
    }
    let pos: BTreeMap<usize, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); keys.len()];
    for (a, b) in &diseq {
        neighbours[pos[a]].push(pos[b]);
        neighbours[pos[b]].push(pos[a]);
    }
    let mut chosen: Vec<Option<usize>> = vec![None; keys.len()];
    if !assign(0, &cands, &neighbours, &mut chosen) {
        return Ok(None);
    }
    let mut witness = Subst::new();
    for (x, &i) in &names {
        let p = pos[&uf.find(i)];
        witness.insert(x.clone(), cands[p][chosen[p].unwrap()].clone());
    }
    Ok(Some(witness))
}

fn assign(
    i: usize,
    cands: &[Vec<Value>],
    nb: &[Vec<usize>],
    chosen: &mut Vec<Option<usize>>,
) -> bool {
    if i == cands.len() {
        return true;
    }
    for (ci, v) in cands[i].iter().enumerate() {
        let clash = nb[i]
            .iter()
            .any(|&j| chosen[j].is_some_and(|cj| &cands[j][cj] == v));
        if clash {
            continue;
        }
        chosen[i] = Some(ci);
        if assign(i + 1, cands, nb, chosen) {
            return true;
        }
    }
    chosen[i] = None;
    false
}

fn mentioned_values(c: &Cond) -> BTreeSet<Value> {
    let mut out = BTreeSet::new();
    c.collect_values(&mut out);
    out
}

fn solve_lits(c: &Cond, extra: &[Lit]) -> Result<Option<Subst>> {
    let mentioned = mentioned_values(c);
    for clause in dnf(&nnf(c, false), c)? {
        let mut lits = clause;
        lits.extend(extra.iter().cloned());
        if let Some(w) = solve_clause(&lits, &mentioned)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Finds an assignment satisfying `c`, or `None` if there is none.
///
/// Every variable of `c` is existentially quantified. The returned witness is validated
/// against `c`.
pub fn solve(c: &Cond) -> Result<Option<Subst>> {
    let w = solve_lits(c, &[])?;
    if let Some(w) = &w {
        debug_assert_eq!(c.eval(w), Ok(true), "witness {w:?} for {c}");
    }
    Ok(w)
}

/// Decides satisfiability of `c`.
///
/// Variables in `outer` are references to enclosing binders. They are treated as
/// constants of unknown value, so satisfiability asks whether some value for them and for
/// the bound variables makes `c` true.
pub fn condition_sat(c: &Cond, outer: &BTreeSet<Sym>) -> Result<bool> {
    let _ = outer;
    Ok(solve(c)?.is_some())
}

/// Finite value universe used by enumeration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Universe {
    pub values: Vec<Value>,
}

impl Universe {
    /// Values mentioned in `c`, the integers -8..=8, `extra`, and one fresh atom per variable.
    pub fn for_condition(c: &Cond, extra: &[Value]) -> Universe {
        let mut vals = mentioned_values(c);
        vals.extend((-8..=8).map(Value::Int));
        vals.extend(extra.iter().cloned());
        let fresh = fresh_atoms(&vals, c.vars().len().max(1));
        vals.extend(fresh);
        Universe {
            values: vals.into_iter().collect(),
        }
    }
}

/// Searches the universe for an assignment of the variables of `c` making it true.
pub fn enumerate_sat(c: &Cond, universe: &Universe) -> Result<Option<Subst>> {
    enumerate_lits(c, &[], universe)
}

fn enumerate_lits(c: &Cond, extra: &[Lit], universe: &Universe) -> Result<Option<Subst>> {
    let vars: Vec<Sym> = c.vars().into_iter().collect();
    let u = &universe.values;
    let total = u.len().checked_pow(vars.len() as u32).unwrap_or(usize::MAX);
    if total > MAX_ENUMERATION || (u.is_empty() && !vars.is_empty()) {
        return Err(Error::FragmentExceeded(format!(
            "{c}: enumeration too large"
        )));
    }
    let mut idx = vec![0usize; vars.len()];
    loop {
        let s: Subst = vars
            .iter()
            .zip(&idx)
            .map(|(x, &i)| (x.clone(), u[i].clone()))
            .collect();
        let mut ok = c.eval(&s)?;
        for l in extra {
            ok = ok && eval_lit(l, &s)?;
        }
        if ok {
            return Ok(Some(s));
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(None);
            }
            idx[k] += 1;
            if idx[k] < u.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Decision with enumeration fallback outside the fragment.
#[derive(Clone, Debug, Default)]
pub struct Solver {
    /// Extra values added to the fallback universe.
    pub extra: Vec<Value>,
}

impl Solver {
    pub fn with_universe(extra: Vec<Value>) -> Solver {
        Solver { extra }
    }

    pub fn solve(&self, c: &Cond) -> Result<Option<Subst>> {
        match solve(c) {
            Err(Error::FragmentExceeded(_)) => {
                enumerate_sat(c, &Universe::for_condition(c, &self.extra))
            }
            r => r,
        }
    }

    pub fn sat(&self, c: &Cond) -> Result<bool> {
        Ok(self.solve(c)?.is_some())
    }

    /// Whether `c1` implies `c2` for all assignments.
    pub fn implies(&self, c1: &Cond, c2: &Cond) -> Result<bool> {
        Ok(!self.sat(&Cond::and_all([c1.clone(), c2.clone().negate()]))?)
    }

    pub fn disjoint(&self, a: &SymEvent, b: &SymEvent) -> Result<bool> {
        match joint(a, b)? {
            None => Ok(true),
            Some((c, extra)) => Ok(self.solve_lits(&c, &extra)?.is_none()),
        }
    }

    /// Whether the denotation of `eta` is nonempty.
    pub fn event_sat(&self, eta: &SymEvent) -> Result<bool> {
        match event_condition(eta) {
            None => Ok(false),
            Some((c, extra)) => Ok(self.solve_lits(&c, &extra)?.is_some()),
        }
    }

    /// A concrete event in the denotation of `eta`, with references chosen freely.
    pub fn witness_event(&self, eta: &SymEvent) -> Result<Option<crate::value::Event>> {
        let Some((c, extra)) = event_condition(eta) else {
            return Ok(None);
        };
        let mut vars_cond = c.clone();
        // make sure pattern variables appear in the enumerated variable set
        for x in eta.pattern.vars() {
            vars_cond = Cond::and_all([vars_cond, Cond::eq_vars(&x, &x)]);
        }
        let w = self.solve_lits(&vars_cond, &extra)?;
        Ok(w.and_then(|w| eta.pattern.instantiate(&w)))
    }

    fn solve_lits(&self, c: &Cond, extra: &[Lit]) -> Result<Option<Subst>> {
        match solve_lits(c, extra) {
            Err(Error::FragmentExceeded(_)) => {
                enumerate_lits(c, extra, &Universe::for_condition(c, &self.extra))
            }
            r => r,
        }
    }
}

/// The condition of `eta` plus the constraint that its subject is an atom.
fn event_condition(eta: &SymEvent) -> Option<(Cond, Vec<Lit>)> {
    let mut extra = Vec::new();
    match &eta.pattern.subject {
        Slot::Var(x) => extra.push(Lit::IsAtom(Term::Var(x.clone()))),
        Slot::Val(v) if v.is_atom() => {}
        _ => return None,
    }
    Some((eta.cond.clone(), extra))
}

fn rename_apart(a: &SymEvent, b: &SymEvent) -> SymEvent {
    let mut used = a.binders.clone();
    used.extend(a.refs());
    used.extend(b.refs());
    let mut r = BTreeMap::new();
    for x in &b.binders {
        if used.contains(x) {
            let mut k = 1;
            let y = loop {
                let y = sym(&format!("{x}_{k}"));
                if !used.contains(&y) && !b.binders.contains(&y) {
                    break y;
                }
                k += 1;
            };
            used.insert(y.clone());
            r.insert(x.clone(), y);
        }
    }
    b.rename(&r)
}

/// The joint condition whose satisfiability means the two events overlap, or `None` if the
/// patterns cannot unify.
fn joint(a: &SymEvent, b: &SymEvent) -> Result<Option<(Cond, Vec<Lit>)>> {
    if a.pattern.dir != b.pattern.dir {
        return Ok(None);
    }
    let b = rename_apart(a, b);
    let mut conj = vec![a.cond.clone(), b.cond.clone()];
    let mut extra = Vec::new();
    for (sa, sb) in [
        (&a.pattern.subject, &b.pattern.subject),
        (&a.pattern.payload, &b.pattern.payload),
    ] {
        match (sa, sb) {
            (Slot::Val(x), Slot::Val(y)) => {
                if x != y {
                    return Ok(None);
                }
            }
            (Slot::Tag(..), _) | (_, Slot::Tag(..)) => {
                return Err(Error::FragmentExceeded(format!(
                    "constructor pattern in {a} or {b}"
                )));
            }
            (Slot::Var(x), Slot::Val(v)) | (Slot::Val(v), Slot::Var(x)) => {
                conj.push(Cond::cmp_var(x, CmpOp::Eq, v.clone()));
            }
            (Slot::Var(x), Slot::Var(y)) => conj.push(Cond::eq_vars(x, y)),
        }
    }
    for s in [&a.pattern.subject, &b.pattern.subject] {
        match s {
            Slot::Var(x) => extra.push(Lit::IsAtom(Term::Var(x.clone()))),
            Slot::Val(v) if v.is_atom() => {}
            _ => return Ok(None),
        }
    }
    Ok(Some((Cond::And(conj), extra)))
}

/// True iff no concrete event lies in both denotations.
pub fn symbolic_disjoint(a: &SymEvent, b: &SymEvent) -> Result<bool> {
    match joint(a, b)? {
        None => Ok(true),
        Some((c, extra)) => Ok(solve_lits(&c, &extra)?.is_none()),
    }
}

/// True iff the denotation of `eta` is nonempty.
pub fn event_sat(eta: &SymEvent) -> Result<bool> {
    match event_condition(eta) {
        None => Ok(false),
        Some((c, extra)) => Ok(solve_lits(&c, &extra)?.is_some()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_cond, parse_sym_event};

    fn sat(s: &str) -> bool {
        let c = parse_cond(s).unwrap();
        condition_sat(&c, &BTreeSet::new()).unwrap()
    }

    #[test]
    fn contradictions() {
        assert!(!sat("$y > 2 && $y <= 2"));
        assert!(sat("($y = req && $x != h) && ($y = req && $x != j)"));
        assert!(!sat("$x = $z && $x != $z"));
        assert!(!sat(
            "$x in {1, 2} && $y in {1, 2} && $z in {1, 2} && $x != $y && $y != $z && $x != $z"
        ));
        assert!(sat(
            "$x in {1, 2, 3} && $y in {1, 2} && $z in {1, 2} && $x != $y && $y != $z && $x != $z"
        ));
        assert!(!sat("$x < 3 && $x = req"));
        assert!(sat("!($x < 3) && $x = req"));
        assert!(!sat("$x > 1 && $x < 2"));
    }

    #[test]
    fn worked_disjointness_examples() {
        let ev = |s| parse_sym_event(s).unwrap();
        assert!(!symbolic_disjoint(&ev("$x?(3) when $x != j"), &ev("i?($y) when $y > 2")).unwrap());
        assert!(symbolic_disjoint(&ev("$x?(3) when $x != j"), &ev("i?($z) when $z <= 2")).unwrap());
        assert!(symbolic_disjoint(&ev("i?($y) when $y > 2"), &ev("i?($z) when $z <= 2")).unwrap());
        // subjects are atoms, so an integer subject constraint is empty
        assert!(symbolic_disjoint(&ev("$x?($y) when $x > 2"), &ev("$a?($b)")).unwrap());
        // a negated ordering admits non-integers, which a later bound must still exclude
        assert!(
            symbolic_disjoint(&ev("i?($a) when !($a > 1)"), &ev("$b?($c) when $c >= 3")).unwrap()
        );
    }

    #[test]
    fn var_var_ordering_falls_back() {
        let c = parse_cond("$x < $y && $y < $x").unwrap();
        assert!(matches!(solve(&c), Err(Error::FragmentExceeded(_))));
        assert!(!Solver::default().sat(&c).unwrap());
        let c = parse_cond("$x < $y && $y < 3").unwrap();
        assert!(Solver::default().sat(&c).unwrap());
    }
}
