use hmlenf_core::enforcer::*;
use hmlenf_core::parse::{parse_enforcer, parse_event, parse_formula, parse_process, parse_trace};
use hmlenf_core::solver::Solver;
use hmlenf_core::value::Action;
use hmlenf_core::Error;

const Q1: &str = "rec x.(i?(req).x + i?(req).i!(ans).x + i?(cls).nil)";
const E1: &str = "rec x.([$x?(req) when $x != j -> tau].x + [$x!(ans) -> $x!(ans)].x)";
const E2: &str = "rec x.[$x?(req) when $x != j -> $x?(req)].rec y.([$x!(ans) -> $x!(ans)].x + [$x?(req) -> tau].y)";
const E3: &str =
    "rec x.([i?(req)->i?(req)].[i!(ans)->i!(ans)].x + [i?(req)->i?(req)].[i?(req)->tau].x)";

fn e(s: &str) -> Enforcer {
    parse_enforcer(s).unwrap()
}

fn acts(s: &str) -> Vec<Action> {
    parse_trace(s)
        .unwrap()
        .into_iter()
        .map(Action::Ev)
        .collect()
}

#[test]
fn single_steps() {
    let a = parse_event("i?(3)").unwrap();
    assert_eq!(
        enforcer_step(&Enforcer::Id, &a),
        vec![(Action::Ev(a.clone()), Enforcer::Id)]
    );
    let req = parse_event("i?(req)").unwrap();
    assert_eq!(enforcer_step(&e(E1), &req), vec![(Action::Tau, e(E1))]);
    assert_eq!(enforcer_step(&e(E3), &req).len(), 2);
}

#[test]
fn enforced_traces() {
    let q = parse_process(Q1).unwrap();
    let t = |s: &str| run_enforced(&e(E2), &q, &acts(s));
    let bad = t("i?(req),i?(req),i!(ans)");
    assert_eq!(
        bad.iter().map(|o| render_actions(o)).collect::<Vec<_>>(),
        vec!["i?(req),tau,i!(ans)"]
    );
    let good = t("i?(req),i!(ans),i?(req)");
    assert_eq!(good, vec![acts("i?(req),i!(ans),i?(req)")]);
    let p = parse_process("i?(a).tau.i!(b).nil").unwrap();
    let trace = vec![
        Action::Ev(parse_event("i?(a)").unwrap()),
        Action::Tau,
        Action::Ev(parse_event("i!(b)").unwrap()),
    ];
    assert_eq!(run_enforced(&Enforcer::Id, &p, &trace), vec![trace.clone()]);
}

#[test]
fn synthesis_reproduces_the_request_enforcer() {
    let phi = parse_formula("max X.[i?(req)]([i!(ans)]X & [i?(req)]ff)").unwrap();
    let got = synth_enforcer(&phi).unwrap();
    assert_eq!(
        got.to_string(),
        "rec x.[i?(req) -> i?(req)].rec y.([i!(ans) -> i!(ans)].x + [i?(req) -> tau].y)"
    );
    assert_eq!(
        synth_enforcer(&parse_formula("tt").unwrap()).unwrap(),
        Enforcer::Id
    );
    assert_eq!(
        synth_enforcer(&parse_formula("max X.tt").unwrap()).unwrap(),
        Enforcer::Id
    );
    assert!(matches!(
        synth_enforcer(&parse_formula("ff").unwrap()),
        Err(Error::FfAtTop)
    ));
    let overlapping = parse_formula("[i?(a)]ff & [$x?(a)]ff").unwrap();
    assert!(matches!(
        synth_enforcer(&overlapping),
        Err(Error::NotNormalForm)
    ));
}

#[test]
fn well_formedness() {
    let s = Solver::default();
    assert!(is_well_formed(&Enforcer::Id, &s).unwrap());
    assert!(is_well_formed(&e(E2), &s).unwrap());
    assert!(!is_well_formed(&e(E3), &s).unwrap());
    assert!(!is_well_formed(
        &e("rec x.rec y.([$x?(req) -> tau].x + [i?(req) -> i?(req)].y)"),
        &s
    )
    .unwrap());
}

#[test]
fn determinism() {
    let traces = vec![
        parse_trace("i?(req),i?(req),i!(ans)").unwrap(),
        parse_trace("i?(req),i!(ans),i?(req)").unwrap(),
    ];
    assert!(check_determinism(&e(E2), &traces).deterministic());
    let r = check_determinism(&e(E3), &[parse_trace("i?(req)").unwrap()]);
    assert_eq!(r.failures.len(), 1);
    assert_eq!(r.failures[0].1.len(), 2);
    assert!(check_determinism(&Enforcer::Id, &traces).deterministic());
}
