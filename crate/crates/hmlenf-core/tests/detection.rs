use hmlenf_core::lts::STATE_BUDGET;
use hmlenf_core::monitor::*;
use hmlenf_core::parse::{parse_event, parse_formula, parse_monitor, parse_process};
use hmlenf_core::process::Process;
use hmlenf_core::value::Action;
use hmlenf_core::Error;

const P1: &str = "rec x.(i?(req).i!(ans).x + i?(cls).nil)";
const Q1: &str = "rec x.(i?(req).x + i?(req).i!(ans).x + i?(cls).nil)";
const M1: &str = "rec x.<$x?(req) when $x != j>.(<$x!(ans)>.x + <$x?(req)>.no)";
const PHI1: &str = "max X.[$x?(req) when $x != j]([$x!(ans)]X & [$x?(req)]ff)";

fn m(s: &str) -> Monitor {
    parse_monitor(s).unwrap()
}

fn p(s: &str) -> Process {
    parse_process(s).unwrap()
}

#[test]
fn synthesis_reproduces_the_request_monitor() {
    let got = synth_monitor(&parse_formula(PHI1).unwrap()).unwrap();
    assert_eq!(got, m(M1));
    assert_eq!(
        got.to_string(),
        "rec x.<$x?(req) when $x != j>.(<$x!(ans)>.x + <$x?(req)>.no)"
    );
}

#[test]
fn synthesis_simplifications() {
    let s = |f: &str| synth_monitor(&parse_formula(f).unwrap()).unwrap();
    assert_eq!(s("tt"), Monitor::Verdict(Verdict::Yes));
    assert_eq!(s("[i?(a)]tt"), Monitor::Verdict(Verdict::Yes));
    assert_eq!(s("<i?(a)>ff"), Monitor::Verdict(Verdict::No));
    assert_eq!(s("ff & [i?(a)]ff"), Monitor::Verdict(Verdict::No));
    assert_eq!(s("tt & [i?(a)]ff"), m("<i?(a)>.no"));
    assert_eq!(s("max X.tt"), Monitor::Verdict(Verdict::Yes));
    assert_eq!(s("min X.ff"), Monitor::Verdict(Verdict::No));
    assert_eq!(s("tt | <i?(a)>tt"), Monitor::Verdict(Verdict::Yes));
    assert!(matches!(
        synth_monitor(&parse_formula("[i?(a)]<i?(b)>tt").unwrap()),
        Err(Error::NotMonitorable)
    ));
}

#[test]
fn step_binds_the_subject() {
    let next = monitor_step(&m(M1), &parse_event("i?(req)").unwrap());
    assert_eq!(next.len(), 1);
    assert_eq!(
        next[0].to_string(),
        format!("(<i!(ans)>.{M1}) + <i?(req)>.no")
    );
    assert!(monitor_step(&m(M1), &parse_event("j?(req)").unwrap()).is_empty());
    let no = Monitor::Verdict(Verdict::No);
    assert_eq!(
        monitor_step(&no, &parse_event("k!(3)").unwrap()),
        vec![no.clone()]
    );
    assert!(monitor_step(&m("<i!(ans)>.yes"), &parse_event("i?(req)").unwrap()).is_empty());
}

#[test]
fn instrumentation_rules() {
    let req = Action::Ev(parse_event("i?(req)").unwrap());
    // iMon twice reaches a rejection
    let start = MonitoredSystem::new(m(M1), p(Q1));
    let after: Vec<MonitoredSystem> = instrumented_step(&start, &req)
        .iter()
        .flat_map(|s| instrumented_step(s, &req))
        .collect();
    assert!(after
        .iter()
        .any(|s| s.monitor == Monitor::Verdict(Verdict::No)));
    // iTer
    let blocked = MonitoredSystem::new(m("<i!(ans)>.yes"), p("i?(req).nil"));
    assert_eq!(
        instrumented_step(&blocked, &req),
        vec![MonitoredSystem::new(
            Monitor::Verdict(Verdict::End),
            Process::Nil
        )]
    );
    // iAsyP
    let silent = MonitoredSystem::new(m(M1), p("tau.nil"));
    assert_eq!(
        instrumented_step(&silent, &Action::Tau),
        vec![MonitoredSystem::new(m(M1), Process::Nil)]
    );
    // verdicts persist
    let yes = MonitoredSystem::new(Monitor::Verdict(Verdict::Yes), p("i?(a).i!(b).nil"));
    let (_, states) = monitored_lts(&yes.monitor, &yes.process, STATE_BUDGET).unwrap();
    assert!(states
        .iter()
        .all(|s| s.monitor == Monitor::Verdict(Verdict::Yes)));
}

#[test]
fn acceptance_and_rejection() {
    assert!(rejects(&p(Q1), &m(M1), STATE_BUDGET).unwrap());
    assert!(!rejects(&p(P1), &m(M1), STATE_BUDGET).unwrap());
    assert!(!accepts(&p(Q1), &m(M1), STATE_BUDGET).unwrap());
}

#[test]
fn corpus_monitoring_report() {
    let phi = parse_formula(PHI1).unwrap();
    let r = check_monitoring(&m(M1), &phi, &[p(P1), p(Q1)]).unwrap();
    assert!(r.sound() && r.violation_complete() && r.negative());
    let bad = check_monitoring(
        &Monitor::Verdict(Verdict::Yes),
        &parse_formula("ff").unwrap(),
        &[Process::Nil],
    )
    .unwrap();
    assert!(!bad.sound());
}
