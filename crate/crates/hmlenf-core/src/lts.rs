//! Finite labelled transition systems.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::process::Process;
use crate::value::{sym, Action, Event};

/// Default bound on explored states.
pub const STATE_BUDGET: usize = 200_000;

/// A finite LTS with states numbered from zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    pub labels: Vec<String>,
    pub edges: Vec<Vec<(Action, usize)>>,
    pub init: usize,
}

impl Lts {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Explores the states reachable from `init` by breadth-first search.
    pub fn explore<S, F, L>(init: S, mut succ: F, label: L, budget: usize) -> Result<(Lts, Vec<S>)>
    where
        S: Ord + Clone,
        F: FnMut(&S) -> Result<Vec<(Action, S)>>,
        L: Fn(&S) -> String,
    {
        let mut index: BTreeMap<S, usize> = BTreeMap::new();
        let mut states = Vec::new();
        let mut edges = Vec::new();
        let mut queue = VecDeque::new();
        index.insert(init.clone(), 0);
        states.push(init);
        edges.push(Vec::new());
        queue.push_back(0);
        while let Some(i) = queue.pop_front() {
            let mut out = Vec::new();
            for (a, t) in succ(&states[i])? {
                let j = match index.get(&t) {
                    Some(&j) => j,
                    None => {
                        let j = states.len();
                        if j >= budget {
                            return Err(Error::StateBudget(budget));
                        }
                        index.insert(t.clone(), j);
                        states.push(t);
                        edges.push(Vec::new());
                        queue.push_back(j);
                        j
                    }
                };
                out.push((a, j));
            }
            out.sort();
            out.dedup();
            edges[i] = out;
        }
        let labels = states.iter().map(label).collect();
        Ok((
            Lts {
                labels,
                edges,
                init: 0,
            },
            states,
        ))
    }

    /// Disjoint union; the second LTS's states are shifted by `self.len()`.
    pub fn disjoint_union(&self, other: &Lts) -> Lts {
        let off = self.len();
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut edges = self.edges.clone();
        edges.extend(
            other
                .edges
                .iter()
                .map(|es| es.iter().map(|(a, j)| (a.clone(), j + off)).collect()),
        );
        Lts {
            labels,
            edges,
            init: self.init,
        }
    }

    /// States reachable by zero or more silent steps.
    pub fn tau_closure(&self, from: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut seen = from.clone();
        let mut stack: Vec<usize> = from.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for (a, t) in &self.edges[s] {
                if a.is_tau() && seen.insert(*t) {
                    stack.push(*t);
                }
            }
        }
        seen
    }

    /// Weak transition: silent closure, then `a` (unless silent), then silent closure.
    pub fn weak_step(&self, from: &BTreeSet<usize>, a: &Action) -> BTreeSet<usize> {
        let pre = self.tau_closure(from);
        if a.is_tau() {
            return pre;
        }
        let mid: BTreeSet<usize> = pre
            .iter()
            .flat_map(|&s| {
                self.edges[s]
                    .iter()
                    .filter(|(b, _)| b == a)
                    .map(|(_, t)| *t)
            })
            .collect();
        if mid.is_empty() {
            return mid;
        }
        self.tau_closure(&mid)
    }

    /// States reached by the weak trace `t`.
    pub fn run_trace(&self, from: usize, t: &[Event]) -> BTreeSet<usize> {
        let mut cur = BTreeSet::from([from]);
        for e in t {
            cur = self.weak_step(&cur, &Action::Ev(e.clone()));
            if cur.is_empty() {
                break;
            }
        }
        self.tau_closure(&cur)
    }

    /// For every state, its weak visible moves `s =a=> t`, sorted and deduplicated.
    pub fn weak_moves(&self) -> Vec<Vec<(Event, usize)>> {
        let closures: Vec<BTreeSet<usize>> = (0..self.len())
            .map(|s| self.tau_closure(&BTreeSet::from([s])))
            .collect();
        (0..self.len())
            .map(|s| {
                let mut out = BTreeSet::new();
                for &c in &closures[s] {
                    for (a, t) in &self.edges[c] {
                        if let Action::Ev(e) = a {
                            out.extend(closures[*t].iter().map(|&u| (e.clone(), u)));
                        }
                    }
                }
                out.into_iter().collect()
            })
            .collect()
    }

    /// A process term whose reachable LTS is isomorphic to the part of this one reachable
    /// from `init`, up to state merging.
    pub fn to_process(&self) -> Process {
        fn go(lts: &Lts, s: usize, stack: &mut Vec<usize>) -> Process {
            let name = sym(&format!("x{s}"));
            if stack.contains(&s) {
                return Process::Var(name);
            }
            stack.push(s);
            let branches: Vec<Process> = lts.edges[s]
                .iter()
                .map(|(a, t)| Process::Prefix(a.clone(), Box::new(go(lts, *t, stack))))
                .collect();
            stack.pop();
            let body = match branches.len() {
                0 => Process::Nil,
                1 => branches.into_iter().next().unwrap(),
                _ => Process::Choice(branches),
            };
            if body.free_vars().contains(&name) {
                Process::Rec(name, Box::new(body))
            } else {
                body
            }
        }
        go(self, self.init, &mut Vec::new())
    }

    /// Visible actions labelling some edge.
    pub fn alphabet(&self) -> BTreeSet<Action> {
        self.edges
            .iter()
            .flatten()
            .map(|(a, _)| a.clone())
            .collect()
    }
}

/// Explores the reachable states of `p`; alpha-equivalent terms share a state.
pub fn explore_process(p: &Process, budget: usize) -> Result<(Lts, Vec<Process>)> {
    p.check()?;
    let mut canon: BTreeMap<Process, Process> = BTreeMap::new();
    let mut rep = |q: Process| -> Process { canon.entry(q.canonical()).or_insert(q).clone() };
    let init = rep(p.clone());
    Lts::explore(
        init,
        |q: &Process| {
            Ok(q.transitions()
                .into_iter()
                .map(|(a, r)| (a, rep(r)))
                .collect())
        },
        |q: &Process| q.to_string(),
        budget,
    )
}

/// The reachable LTS of `p`, rooted at state 0.
pub fn reachable_lts(p: &Process) -> Result<Lts> {
    Ok(explore_process(p, STATE_BUDGET)?.0)
}

/// Weak `a`-derivatives of `p`.
pub fn weak_step(p: &Process, a: &Action) -> Result<Vec<Process>> {
    let (lts, states) = explore_process(p, STATE_BUDGET)?;
    Ok(lts
        .weak_step(&BTreeSet::from([0]), a)
        .into_iter()
        .map(|i| states[i].clone())
        .collect())
}

/// Processes reached from `p` along the weak trace `t`.
pub fn run_trace(p: &Process, t: &[Event]) -> Result<Vec<Process>> {
    let (lts, states) = explore_process(p, STATE_BUDGET)?;
    Ok(lts
        .run_trace(0, t)
        .into_iter()
        .map(|i| states[i].clone())
        .collect())
}
