use hmlenf_core::bisim::{strong_bisim, weak_bisim};
use hmlenf_core::logic::{check_hmt, satisfies};
use hmlenf_core::normalize::normalize;
use hmlenf_core::parse::{parse_formula, parse_process, parse_sym_event};
use hmlenf_core::process::Process;
use hmlenf_core::solver::{symbolic_disjoint, Solver};
use hmlenf_core::verify::{default_alphabet, gen_formula, gen_processes, gen_sym_event};
use hmlenf_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn processes(seed: u64, count: usize) -> Vec<Process> {
    gen_processes(&default_alphabet(), 4, count, seed).processes
}

/// One unfolding of the outermost recursion, which is strongly bisimilar to the original.
fn unfold(p: &Process) -> Process {
    match p {
        Process::Rec(x, body) => body.subst(x, p),
        Process::Choice(ps) => Process::Choice(ps.iter().map(unfold).collect()),
        other => other.clone(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn formulae_print_and_parse_back(seed in any::<u64>(), depth in 0usize..6) {
        let f = gen_formula(&mut ChaCha8Rng::seed_from_u64(seed), depth);
        let back = parse_formula(&f.to_string()).unwrap();
        prop_assert!(back.alpha_eq(&f), "{} vs {}", f, back);
    }

    #[test]
    fn processes_print_and_parse_back(seed in any::<u64>()) {
        for p in processes(seed, 8) {
            prop_assert_eq!(parse_process(&p.to_string()).unwrap(), p);
        }
    }

    #[test]
    fn unfolding_is_strongly_and_weakly_bisimilar(seed in any::<u64>()) {
        for p in processes(seed, 6) {
            let q = unfold(&p);
            prop_assert!(strong_bisim(&p, &q).unwrap().equivalent, "{} vs {}", p, q);
            prop_assert!(weak_bisim(&p, &q).unwrap().equivalent, "{} vs {}", p, q);
        }
    }

    #[test]
    fn strong_bisimilarity_implies_weak(seed in any::<u64>()) {
        let ps = processes(seed, 6);
        for p in &ps {
            for q in &ps {
                if strong_bisim(p, q).unwrap().equivalent {
                    prop_assert!(weak_bisim(p, q).unwrap().equivalent);
                }
            }
        }
    }

    #[test]
    fn bisimilar_processes_satisfy_the_same_formulae(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let formulae: Vec<_> = (0..6).map(|_| gen_formula(&mut rng, 4)).collect();
        for p in processes(seed, 5) {
            let report = check_hmt(&p, &unfold(&p), &formulae).unwrap();
            prop_assert!(report.bisimilar);
            prop_assert!(report.pass(), "{} distinguishes {}", formulae[report.distinguishing().unwrap()], p);
        }
    }

    #[test]
    fn normal_forms_keep_their_meaning(seed in any::<u64>()) {
        let f = gen_formula(&mut ChaCha8Rng::seed_from_u64(seed), 4);
        match normalize(&f) {
            Ok(nf) => {
                prop_assert!(nf.is_normal_form(&Solver::default()).unwrap(), "{} -> {}", f, nf);
                for p in processes(seed, 10) {
                    prop_assert_eq!(satisfies(&p, &f).unwrap(), satisfies(&p, &nf).unwrap(), "{} -> {} on {}", f, nf, p);
                }
            }
            Err(Error::LoopRebindsData(_)) => {}
            Err(err) => prop_assert!(false, "{}: {}", f, err),
        }
    }

    #[test]
    fn disjointness_is_symmetric_and_irreflexive_on_satisfiable_events(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gen_sym_event(&mut rng, "a");
        let b = gen_sym_event(&mut rng, "b");
        prop_assert_eq!(symbolic_disjoint(&a, &b).unwrap(), symbolic_disjoint(&b, &a).unwrap());
        if hmlenf_core::solver::event_sat(&a).unwrap() {
            prop_assert!(!symbolic_disjoint(&a, &a).unwrap(), "{}", a);
        }
    }
}

#[test]
fn unsatisfiable_events_are_disjoint_from_everything() {
    let never = parse_sym_event("$x?($y) when $y > 3 && $y < 2").unwrap();
    let any = parse_sym_event("$a?($b)").unwrap();
    assert!(symbolic_disjoint(&never, &any).unwrap());
    assert!(symbolic_disjoint(&never, &never).unwrap());
}
