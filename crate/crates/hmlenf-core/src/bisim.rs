//! Strong and weak bisimilarity by partition refinement.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::lts::{reachable_lts, Lts};
use crate::process::Process;
use crate::value::Action;

/// Which side the attacker moves on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One attacker move of a distinguishing play.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub side: Side,
    pub action: Action,
    /// Labels of the position after the attacker's move and the defender's first reply,
    /// or `None` for the reply when the defender is stuck.
    pub attacker_to: alloc::string::String,
    pub defender_to: Option<alloc::string::String>,
}

/// Outcome of a bisimilarity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BisimResult {
    pub equivalent: bool,
    /// Related pairs `(left state, right state)` among reachable states, when equivalent.
    pub relation: Vec<(usize, usize)>,
    /// A winning play for the attacker, when not equivalent.
    pub moves: Vec<Move>,
}

/// Block membership after every refinement round; the last round is stable.
fn refine(lts: &Lts) -> Vec<Vec<usize>> {
    let n = lts.len();
    let mut rounds = vec![vec![0usize; n]];
    loop {
        let cur = rounds.last().unwrap();
        let mut sigs: BTreeMap<(usize, BTreeSet<(Action, usize)>), usize> = BTreeMap::new();
        let mut next = vec![0usize; n];
        for s in 0..n {
            let sig: BTreeSet<(Action, usize)> = lts.edges[s]
                .iter()
                .map(|(a, t)| (a.clone(), cur[*t]))
                .collect();
            let k = sigs.len();
            next[s] = *sigs.entry((cur[s], sig)).or_insert(k);
        }
        let count = |v: &Vec<usize>| v.iter().collect::<BTreeSet<_>>().len();
        let done = count(&next) == count(cur);
        rounds.push(next);
        if done {
            return rounds;
        }
    }
}

/// Saturates with weak transitions so that strong bisimilarity on the result is weak
/// bisimilarity on the input.
pub fn saturate(lts: &Lts) -> Lts {
    let mut edges = Vec::with_capacity(lts.len());
    for s in 0..lts.len() {
        let from = BTreeSet::from([s]);
        let mut out: BTreeSet<(Action, usize)> = lts
            .tau_closure(&from)
            .into_iter()
            .map(|t| (Action::Tau, t))
            .collect();
        let visible: BTreeSet<Action> =
            lts.alphabet().into_iter().filter(|a| !a.is_tau()).collect();
        for a in &visible {
            for t in lts.weak_step(&from, a) {
                out.insert((a.clone(), t));
            }
        }
        edges.push(out.into_iter().collect());
    }
    Lts {
        labels: lts.labels.clone(),
        edges,
        init: lts.init,
    }
}

fn reachable(lts: &Lts, from: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([from]);
    let mut stack = vec![from];
    while let Some(s) = stack.pop() {
        for (_, t) in &lts.edges[s] {
            if seen.insert(*t) {
                stack.push(*t);
            }
        }
    }
    seen
}

/// Decides bisimilarity of the initial states of two LTSs.
pub fn lts_bisim(left: &Lts, right: &Lts, weak: bool) -> BisimResult {
    let union = left.disjoint_union(right);
    let graph = if weak { saturate(&union) } else { union };
    let off = left.len();
    let (p, q) = (left.init, right.init + off);
    let rounds = refine(&graph);
    let fin = rounds.last().unwrap();
    if fin[p] == fin[q] {
        let ls = reachable(&graph, p);
        let rs = reachable(&graph, q);
        let relation = ls
            .iter()
            .flat_map(|&s| {
                rs.iter()
                    .filter(move |&&t| fin[s] == fin[t])
                    .map(move |&t| (s, t - off))
            })
            .collect();
        return BisimResult {
            equivalent: true,
            relation,
            moves: Vec::new(),
        };
    }
    let level = |s: usize, t: usize| {
        rounds
            .iter()
            .position(|r| r[s] != r[t])
            .unwrap_or(usize::MAX)
    };
    let mut moves = Vec::new();
    let (mut s, mut t) = (p, q);
    loop {
        let k = level(s, t);
        // an attacker move to a state that no reply matches at level k - 1
        let mut found = None;
        'search: for (side, a_st, d_st) in [(Side::Left, s, t), (Side::Right, t, s)] {
            for (a, a2) in &graph.edges[a_st] {
                let replies: Vec<usize> = graph.edges[d_st]
                    .iter()
                    .filter(|(b, _)| b == a)
                    .map(|(_, d)| *d)
                    .collect();
                if replies
                    .iter()
                    .all(|&d2| rounds[k - 1][*a2] != rounds[k - 1][d2])
                {
                    found = Some((side, a.clone(), *a2, replies));
                    break 'search;
                }
            }
        }
        let Some((side, action, a2, replies)) = found else {
            break;
        };
        let label = |i: usize| graph.labels[i].clone();
        let reply = replies.iter().copied().min_by_key(|&d2| level(a2, d2));
        moves.push(Move {
            side,
            action,
            attacker_to: label(a2),
            defender_to: reply.map(label),
        });
        match reply {
            None => break,
            Some(d2) => {
                (s, t) = match side {
                    Side::Left => (a2, d2),
                    Side::Right => (d2, a2),
                };
            }
        }
    }
    BisimResult {
        equivalent: false,
        relation: Vec::new(),
        moves,
    }
}

/// Strong bisimilarity of two processes.
pub fn strong_bisim(p: &Process, q: &Process) -> Result<BisimResult> {
    Ok(lts_bisim(&reachable_lts(p)?, &reachable_lts(q)?, false))
}

/// Weak bisimilarity of two processes.
pub fn weak_bisim(p: &Process, q: &Process) -> Result<BisimResult> {
    Ok(lts_bisim(&reachable_lts(p)?, &reachable_lts(q)?, true))
}
