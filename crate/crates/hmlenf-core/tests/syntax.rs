use std::collections::BTreeSet;

use hmlenf_core::cond::{Renaming, Subst};
use hmlenf_core::parse::{
    parse_cond, parse_event, parse_pattern, parse_sym_event, parse_sym_trans, parse_value,
};
use hmlenf_core::pattern::{
    apply_transformation, is_singleton, match_pattern, match_symbolic, pattern_equivalent,
};
use hmlenf_core::solver::{condition_sat, symbolic_disjoint};
use hmlenf_core::value::{sym, Action, Value};

fn subst(pairs: &[(&str, &str)]) -> Subst {
    pairs
        .iter()
        .map(|(k, v)| (sym(k), parse_value(v).unwrap()))
        .collect()
}

fn values(src: &[&str]) -> Vec<Value> {
    src.iter().map(|v| parse_value(v).unwrap()).collect()
}

#[test]
fn pattern_matching() {
    let open = parse_pattern("$x?($y)").unwrap();
    assert_eq!(
        match_pattern(&open, &parse_event("i?(3)").unwrap()),
        Some(subst(&[("x", "i"), ("y", "3")]))
    );
    let closed = parse_pattern("i?(3)").unwrap();
    assert_eq!(
        match_pattern(&closed, &parse_event("i?(3)").unwrap()),
        Some(Subst::new())
    );
    assert_eq!(match_pattern(&open, &parse_event("i!(3)").unwrap()), None);
    let repeated = parse_pattern("$x?($x)").unwrap();
    assert_eq!(
        match_pattern(&repeated, &parse_event("i?(j)").unwrap()),
        None
    );
    assert_eq!(
        match_pattern(&repeated, &parse_event("i?(i)").unwrap()),
        Some(subst(&[("x", "i")]))
    );
}

#[test]
fn condition_evaluation() {
    let eval = |c: &str, s: &[(&str, &str)]| parse_cond(c).unwrap().eval(&subst(s)).unwrap();
    assert!(eval("$y > 2", &[("y", "3")]));
    assert!(eval("$x = i && $y = req", &[("x", "i"), ("y", "req")]));
    assert!(!eval("$y <= 2", &[("y", "3")]));
    // orderings on non-integers are false, equality is structural across sorts
    assert!(!eval("$y > 2", &[("y", "req")]));
    assert!(eval("$y != 3", &[("y", "req")]));
    assert!(parse_cond("$z > 2").unwrap().eval(&Subst::new()).is_err());
}

#[test]
fn symbolic_matching() {
    let eta = parse_sym_event("$x?($y) when $y > 2").unwrap();
    assert_eq!(
        match_symbolic(&eta, &parse_event("i?(3)").unwrap()),
        Some(subst(&[("x", "i"), ("y", "3")]))
    );
    assert_eq!(match_symbolic(&eta, &parse_event("i?(2)").unwrap()), None);
    let short = parse_sym_event("$x?($y) when $x = i && $y = req").unwrap();
    assert_eq!(
        match_symbolic(&short, &parse_event("i?(req)").unwrap()),
        Some(subst(&[("x", "i"), ("y", "req")]))
    );
}

#[test]
fn transformations() {
    let three = parse_event("i!(3)").unwrap();
    let report = parse_sym_trans("$x!($y) when $y > 2 -> $x!(err($y))").unwrap();
    let (out, s) = apply_transformation(&report, &three).unwrap();
    assert_eq!(out, Action::Ev(parse_event("i!(err(3))").unwrap()));
    assert_eq!(s, subst(&[("x", "i"), ("y", "3")]));
    let suppress = parse_sym_trans("i!($x) when $x > 2 -> tau").unwrap();
    assert_eq!(
        apply_transformation(&suppress, &three),
        Some((Action::Tau, subst(&[("x", "3")])))
    );
    let keep = parse_sym_trans("i!($x) when $x > 2 -> i!($x)").unwrap();
    assert_eq!(
        apply_transformation(&keep, &three),
        Some((Action::Ev(three.clone()), subst(&[("x", "3")])))
    );
    assert_eq!(
        apply_transformation(&keep, &parse_event("i!(1)").unwrap()),
        None
    );
}

#[test]
fn satisfiability_of_conditions() {
    let sat = |c: &str, outer: &[&str]| {
        let outer: BTreeSet<_> = outer.iter().map(|x| sym(x)).collect();
        condition_sat(&parse_cond(c).unwrap(), &outer).unwrap()
    };
    assert!(!sat("$y > 2 && $y <= 2", &[]));
    assert!(sat("($y = req && $x != h) && ($y = req && $x != j)", &[]));
    assert!(!sat("$x = $z && $x != $z", &["z"]));
    assert!(!sat("$x in {1, 2} && $x > 5", &[]));
}

#[test]
fn disjointness() {
    let ev = |s: &str| parse_sym_event(s).unwrap();
    assert!(!symbolic_disjoint(&ev("$x?(3) when $x != j"), &ev("i?($y) when $y > 2")).unwrap());
    assert!(symbolic_disjoint(&ev("$x?(3) when $x != j"), &ev("i?($z) when $z <= 2")).unwrap());
    assert!(symbolic_disjoint(&ev("i?($y) when $y > 2"), &ev("i?($z) when $z <= 2")).unwrap());
    assert!(symbolic_disjoint(&ev("i?($y)"), &ev("i!($y)")).unwrap());
}

#[test]
fn pattern_equivalence() {
    let p = |s: &str| parse_pattern(s).unwrap();
    let rename = |pairs: &[(&str, &str)]| -> Renaming {
        pairs.iter().map(|(a, b)| (sym(a), sym(b))).collect()
    };
    assert_eq!(
        pattern_equivalent(&p("$x?($y)"), &p("$a?($b)")),
        Some(rename(&[("a", "x"), ("b", "y")]))
    );
    assert_eq!(pattern_equivalent(&p("$x?($y)"), &p("i?($y)")), None);
    assert_eq!(
        pattern_equivalent(&p("$x?(5)"), &p("$a?(5)")),
        Some(rename(&[("a", "x")]))
    );
    assert_eq!(pattern_equivalent(&p("$x?($y)"), &p("$a!($b)")), None);
}

#[test]
fn singleton_events() {
    let ev = |s: &str| parse_sym_event(s).unwrap();
    assert!(is_singleton(
        &ev("$x?($y) when $x = i && $y = req"),
        &values(&["i", "j", "req", "ans"])
    ));
    assert!(!is_singleton(
        &ev("$x?($y) when $y = req"),
        &values(&["i", "j", "req"])
    ));
    assert!(!is_singleton(
        &ev("$x?($y) when false"),
        &values(&["i", "j", "req"])
    ));
}
