use std::collections::BTreeSet;

use hmlenf_core::bisim::{strong_bisim, weak_bisim};
use hmlenf_core::lts::{reachable_lts, run_trace, weak_step};
use hmlenf_core::parse::{parse_action, parse_process, parse_trace};
use hmlenf_core::process::{step, Process};
use hmlenf_core::verify::named_process;

fn p(name: &str) -> Process {
    named_process(name).unwrap()
}

fn set(ps: Vec<Process>) -> BTreeSet<Process> {
    ps.into_iter().map(|q| q.canonical()).collect()
}

#[test]
fn single_steps() {
    let req = parse_action("i?(req)").unwrap();
    assert_eq!(
        step(&parse_process("i?(req).nil").unwrap(), &req),
        vec![Process::Nil]
    );
    let p2 = parse_process("i!(ans).rec x.(i?(req).i!(ans).x + i?(cls).nil)").unwrap();
    assert_eq!(set(step(&p("p1"), &req)), set(vec![p2]));
    let from_q1 = set(step(&p("q1"), &req));
    assert_eq!(from_q1.len(), 2);
    assert!(from_q1.contains(&p("q1").canonical()));
    assert!(step(&Process::Nil, &req).is_empty());
}

#[test]
fn reachable_state_spaces() {
    assert_eq!(reachable_lts(&p("p1")).unwrap().len(), 3);
    assert_eq!(reachable_lts(&p("q1")).unwrap().len(), 3);
    assert_eq!(reachable_lts(&p("r1")).unwrap().len(), 5);
    assert_eq!(reachable_lts(&p("s1")).unwrap().len(), 4);
    let nil = reachable_lts(&Process::Nil).unwrap();
    assert_eq!((nil.len(), nil.edge_count()), (1, 0));
    assert_eq!(
        reachable_lts(&p("q1")).unwrap(),
        reachable_lts(&p("q1")).unwrap()
    );
}

#[test]
fn weak_transitions() {
    let req = parse_action("i?(req)").unwrap();
    let s3 = parse_process("i!(ans).rec x.tau.(i?(req).i!(ans).x + i?(cls).nil)").unwrap();
    assert!(set(weak_step(&p("s1"), &req).unwrap()).contains(&s3.canonical()));
    assert!(weak_step(&Process::Nil, &req).unwrap().is_empty());
    assert!(
        set(weak_step(&p("s1"), &parse_action("tau").unwrap()).unwrap())
            .contains(&p("s1").canonical())
    );
}

#[test]
fn traces() {
    let twice = parse_trace("i?(req),i?(req)").unwrap();
    let q2 = parse_process("i!(ans).rec x.(i?(req).x + i?(req).i!(ans).x + i?(cls).nil)").unwrap();
    assert_eq!(
        set(run_trace(&p("q1"), &twice).unwrap()),
        set(vec![p("q1"), q2])
    );
    assert!(run_trace(&p("p1"), &twice).unwrap().is_empty());
    assert!(set(run_trace(&p("p1"), &[]).unwrap()).contains(&p("p1").canonical()));
}

#[test]
fn bisimilarity_of_the_named_processes() {
    let pr = strong_bisim(&p("p1"), &p("r1")).unwrap();
    assert!(pr.equivalent);
    assert_eq!(pr.relation.len(), 5);
    assert!(!strong_bisim(&p("p1"), &p("s1")).unwrap().equivalent);
    assert!(weak_bisim(&p("p1"), &p("s1")).unwrap().equivalent);
    let pq = weak_bisim(&p("p1"), &p("q1")).unwrap();
    assert!(!pq.equivalent && !pq.moves.is_empty());
    assert!(!strong_bisim(&p("p1"), &p("q1")).unwrap().equivalent);
    assert!(strong_bisim(&p("q1"), &p("q1")).unwrap().equivalent);
}
