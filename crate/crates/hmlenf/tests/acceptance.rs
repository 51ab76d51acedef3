//! Acceptance suite: one line per criterion, then a single assertion over all of them.
//!
//! Run with `cargo test -p hmlenf --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use hmlenf_core::bisim::{strong_bisim, weak_bisim};
use hmlenf_core::enforcer::{render_actions, synth_enforcer, transduce, Enforcer};
use hmlenf_core::formula::Formula;
use hmlenf_core::logic::{denot, Valuation};
use hmlenf_core::lts::{reachable_lts, STATE_BUDGET};
use hmlenf_core::monitor::{rejects, synth_monitor};
use hmlenf_core::normalize::{normalize, normalize_stages, NormalizeOptions};
use hmlenf_core::parse::{parse_enforcer, parse_event, parse_formula, parse_monitor, parse_trace};
use hmlenf_core::process::Process;
use hmlenf_core::verify::{
    check_equivalence, check_soundness, check_transparency, default_alphabet, determinism_report,
    disjointness_oracle, fuzz, gen_processes, named_process, Corpus, FuzzConfig,
};

const EVAL_LIMIT: Duration = Duration::from_secs(1);
const BISIM_LIMIT: Duration = Duration::from_secs(1);
const NORMALIZE_LIMIT: Duration = Duration::from_secs(5);
const FUZZ_LIMIT: Duration = Duration::from_secs(120);

const FUZZ_FORMULAS: usize = 200;
const FUZZ_CORPUS: usize = 50;
const EQUIVALENCE_CORPUS: usize = 100;
const DISJOINTNESS_PAIRS: usize = 500;

const PHI1: &str = "max X.[$x?(req) when $x != j]([$x!(ans)]X & [$x?(req)]ff)";
const PHI2: &str = "max X.([i?(req)][i!(ans)]X & [i?(req)][i?(req)]ff)";
const PHI3: &str =
    "max X.([$x?(req) when $x != h][$x!(ans)]X & [$x?(req) when $x != j][$x?(req)]ff)";
const M1: &str = "rec x.<$x?(req) when $x != j>.(<$x!(ans)>.x + <$x?(req)>.no)";
const E1: &str = "rec x.([$x?(req) when $x != j -> tau].x + [$x!(ans) -> $x!(ans)].x)";
const E2: &str = "rec x.[$x?(req) when $x != j -> $x?(req)].rec y.([$x!(ans) -> $x!(ans)].x + [$x?(req) -> tau].y)";
const E3: &str =
    "rec x.([i?(req)->i?(req)].[i!(ans)->i!(ans)].x + [i?(req)->i?(req)].[i?(req)->tau].x)";
const PHI2_NORMAL: &str =
    "[i?(req)]([i!(ans)](max X.[i?(req)]([i!(ans)]X & [i?(req)]ff)) & [i?(req)]ff)";
const PHI2_LOOP: &str = "max X.[i?(req)]([i!(ans)]X & [i?(req)]ff)";
const PHI2_ENFORCER: &str =
    "rec x.[i?(req) -> i?(req)].rec y.([i!(ans) -> i!(ans)].x + [i?(req) -> tau].y)";

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn f(src: &str) -> Formula {
    parse_formula(src).unwrap()
}

fn p(name: &str) -> Process {
    named_process(name).unwrap()
}

fn e(src: &str) -> Enforcer {
    parse_enforcer(src).unwrap()
}

fn timed(limit: Duration, run: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = run();
    let took = start.elapsed();
    let pass = out.pass && took <= limit;
    Outcome::new(
        pass,
        format!("{} ({:.2?}, limit {:.0?})", out.detail, took, limit),
    )
}

fn fixpoint_evaluation() -> Outcome {
    timed(EVAL_LIMIT, || {
        let lp = reachable_lts(&p("p1")).unwrap();
        let lq = reachable_lts(&p("q1")).unwrap();
        let union = lp.disjoint_union(&lq);
        let got = denot(&f(PHI1), &union, &Valuation::new()).unwrap();
        let q1 = lp.len();
        let want: BTreeSet<usize> = (0..union.len()).filter(|&s| s != q1).collect();
        Outcome::new(
            union.len() == 6 && got == want,
            format!(
                "{} of {} union states satisfy, q1 excluded: {}",
                got.len(),
                union.len(),
                !got.contains(&q1)
            ),
        )
    })
}

fn bisimulation() -> Outcome {
    let mut checks = Vec::new();
    let mut pass = true;
    for (label, run, want) in [
        (
            "p1 ~ r1",
            strong_bisim as fn(&Process, &Process) -> _,
            ("p1", "r1", true),
        ),
        ("p1 ≈ s1", weak_bisim, ("p1", "s1", true)),
        ("p1 ≉ q1", weak_bisim, ("p1", "q1", false)),
    ] {
        let out = timed(BISIM_LIMIT, || {
            let r = run(&p(want.0), &p(want.1)).unwrap();
            let related = want.0 != "p1" || want.1 != "r1" || r.relation.len() == 5;
            Outcome::new(
                r.equivalent == want.2 && related,
                format!("{label}: {}", r.equivalent),
            )
        });
        pass &= out.pass;
        checks.push(out.detail);
    }
    Outcome::new(pass, checks.join("; "))
}

fn equivalence_alphabet() -> Vec<hmlenf_core::value::Event> {
    let mut alphabet = default_alphabet();
    for src in ["h?(req)", "h!(ans)", "h?(cls)"] {
        alphabet.push(parse_event(src).unwrap());
    }
    alphabet
}

fn normalization() -> Outcome {
    timed(NORMALIZE_LIMIT, || {
        let n2 = normalize(&f(PHI2)).unwrap();
        let golden = n2.alpha_eq(&f(PHI2_NORMAL));
        let st = normalize_stages(&f(PHI3), &NormalizeOptions::default()).unwrap();
        let body = "max X.[$y?(req) when $y != h && $y != j]([$y!(ans)]X & [$y?(req)]ff) \
            & [$y?(req) when $y != h && $y = j][$y!(ans)]X & [$y?(req) when $y = h && $y != j][$y?(req)]ff";
        let split = f(&format!(
            "[$z?(req) when $z != h && $z != j](([$z!(ans)]({body})) & [$z?(req)]ff) \
             & [$z?(req) when $z != h && $z = j][$z!(ans)]({body}) \
             & [$z?(req) when $z = h && $z != j][$z?(req)]ff"
        ));
        let three_way = st.wf.alpha_eq(&split);
        let corpus = gen_processes(&equivalence_alphabet(), 5, EQUIVALENCE_CORPUS, 1);
        let eq2 = check_equivalence(&f(PHI2), &n2, &corpus).unwrap();
        let eq3 = check_equivalence(&f(PHI3), &st.wf, &corpus).unwrap();
        Outcome::new(
            golden && three_way && eq2.passed() && eq3.passed() && eq2.checked == EQUIVALENCE_CORPUS,
            format!(
                "phi2 golden {golden}, phi3 three-way split {three_way}, equivalence on {} processes {}/{}",
                eq2.checked,
                eq2.passed(),
                eq3.passed()
            ),
        )
    })
}

fn synthesis() -> Outcome {
    let m = synth_monitor(&f(PHI1)).unwrap();
    let monitor = m == parse_monitor(M1).unwrap();
    let en = synth_enforcer(&f(PHI2_LOOP)).unwrap();
    let enforcer = en == e(PHI2_ENFORCER);
    Outcome::new(monitor && enforcer, format!("monitor {m}; enforcer {en}"))
}

fn simulation() -> Outcome {
    let outputs = |t: &str| -> Vec<String> {
        transduce(&e(E2), &parse_trace(t).unwrap())
            .iter()
            .map(|(out, _)| render_actions(out))
            .collect()
    };
    let bad = outputs("i?(req),i?(req),i!(ans)");
    let good = outputs("i?(req),i!(ans),i?(req)");
    let m1 = parse_monitor(M1).unwrap();
    let on_q1 = rejects(&p("q1"), &m1, STATE_BUDGET).unwrap();
    let on_p1 = rejects(&p("p1"), &m1, STATE_BUDGET).unwrap();
    Outcome::new(
        bad == ["i?(req),tau,i!(ans)"] && good == ["i?(req),i!(ans),i?(req)"] && on_q1 && !on_p1,
        format!("e2: {bad:?} / {good:?}; m1 rejects q1 {on_q1}, p1 {on_p1}"),
    )
}

fn property_suite() -> (Outcome, Outcome) {
    let cfg = FuzzConfig {
        formulas: FUZZ_FORMULAS,
        corpus: FUZZ_CORPUS,
        ..FuzzConfig::default()
    };
    let start = Instant::now();
    let out = fuzz(&cfg).unwrap();
    let took = start.elapsed();
    let failures: Vec<String> = out
        .failures
        .iter()
        .map(|x| format!("{}: {} ({})", x.check, x.minimized, x.detail))
        .collect();
    let suite = Outcome::new(
        out.formulas >= FUZZ_FORMULAS && failures.is_empty() && took <= FUZZ_LIMIT,
        format!(
            "{} formulae (depth {}), {} processes, {} unsatisfiable skipped, {} failures {:?} ({:.2?}, limit {:.0?})",
            out.formulas, cfg.formula_depth, out.processes_checked, out.unsatisfiable, failures.len(), failures, took, FUZZ_LIMIT
        ),
    );
    let disjoint = disjointness_oracle(DISJOINTNESS_PAIRS, cfg.seed).unwrap();
    let oracle = Outcome::new(
        out.oracle_disagreements.is_empty() && disjoint.is_empty(),
        format!(
            "satisfaction vs fixpoint: {} disagreements over {} pairs; disjointness: {} disagreements over {} pairs",
            out.oracle_disagreements.len(),
            out.oracle_pairs,
            disjoint.len(),
            DISJOINTNESS_PAIRS
        ),
    );
    (suite, oracle)
}

fn negative_cases() -> Outcome {
    let phi2 = f(PHI2);
    let q1 = Corpus::from_processes(vec![p("q1")]);
    let sound = check_soundness(&e(E3), &phi2, &q1).unwrap();
    let trace = sound
        .counterexamples
        .first()
        .map(|c| c.trace.clone())
        .unwrap_or_default();
    let unsound = !sound.passed() && trace == "i?(req),i?(req)";

    let satisfying = Corpus::from_processes(vec![p("p1"), p("r1"), p("s1")]);
    let tr = check_transparency(&e(E1), &phi2, &satisfying).unwrap();
    let opaque = !tr.passed();

    let det = determinism_report(&e(E3), &[parse_trace("i?(req)").unwrap()]);
    let outcomes = det
        .counterexamples
        .first()
        .map_or(0, |c| c.actual.split(" | ").count());
    Outcome::new(
        unsound && opaque && outcomes == 2,
        format!(
            "e3 unsound on q1 via {trace}; e1 not transparent on {} of {} satisfying; e3 has {outcomes} outcomes on i?(req)",
            tr.counterexamples.len(),
            tr.checked
        ),
    )
}

#[test]
fn acceptance() {
    let (suite, oracle) = property_suite();
    let results = [
        ("1 fixpoint evaluation", fixpoint_evaluation()),
        ("2 bisimulation", bisimulation()),
        ("3 normalization", normalization()),
        ("4 synthesis", synthesis()),
        ("5 simulation", simulation()),
        ("6 property suite", suite),
        ("7 oracle equivalence", oracle),
        ("8 negative cases", negative_cases()),
    ];
    for (name, out) in &results {
        println!(
            "{} criterion {name}: {}",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, o)| !o.pass)
        .map(|(n, _)| *n)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
