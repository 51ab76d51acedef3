use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use hmlenf_core::bisim::{lts_bisim, Side};
use hmlenf_core::enforcer::{
    enforced_lts, is_well_formed, synth_enforcer_with, transduce, Enforcer,
};
use hmlenf_core::formula::Formula;
use hmlenf_core::logic::{bounded_sat, denot, Valuation};
use hmlenf_core::lts::{explore_process, Lts, STATE_BUDGET};
use hmlenf_core::monitor::{
    check_monitoring, monitor_step, monitored_lts, synth_monitor, Monitor, Verdict,
};
use hmlenf_core::normalize::{normalize_stages, normalize_with, NormalizeOptions};
use hmlenf_core::parse;
use hmlenf_core::process::Process;
use hmlenf_core::solver::Solver;
use hmlenf_core::value::{Action, Value};
use hmlenf_core::verify::{self, CheckReport, Corpus, FuzzConfig};

/// Symbolic formulae, monitors and enforcers over regular CCS processes.
#[derive(Parser)]
#[command(name = "hmlenf", version)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Extra values for finite enumeration, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    universe: Vec<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Formula,
    Process,
    Monitor,
    Enforcer,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stage {
    Sf,
    Eq,
    Open,
    Uni,
    Comb,
    Nf,
    Wf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Soundness,
    Transparency,
    Determinism,
    Equivalence,
    Monitoring,
    Bridge,
}

#[derive(Args, Clone)]
struct CorpusArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long, default_value_t = 5)]
    depth: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the canonical form and classification of a term.
    Parse {
        input: String,
        #[arg(long, value_enum, default_value_t = Kind::Formula)]
        kind: Kind,
    },
    /// Normalize an sHML formula, optionally stopping at an intermediate stage.
    Normalize {
        formula: String,
        #[arg(long, value_enum, default_value_t = Stage::Wf)]
        stage: Stage,
        /// Keep unsatisfiable condition combinations.
        #[arg(long)]
        no_prune: bool,
    },
    /// Synthesize a detection monitor.
    SynthMonitor { formula: String },
    /// Normalize a formula and synthesize its enforcer.
    SynthEnforcer {
        formula: String,
        /// Treat the input as already normalized.
        #[arg(long)]
        normalized: bool,
    },
    /// States of a process satisfying a formula.
    Eval { formula: String, process: String },
    /// Search for a satisfying process of bounded size.
    Sat {
        formula: String,
        #[arg(long, default_value_t = 4)]
        bound: usize,
    },
    /// Run an enforcer or monitor over a trace, or instrument it with a process.
    Simulate {
        #[arg(long, conflicts_with = "monitor")]
        enforcer: Option<String>,
        #[arg(long)]
        monitor: Option<String>,
        #[arg(long)]
        trace: Option<String>,
        #[arg(long)]
        process: Option<String>,
    },
    /// Bisimilarity of two processes.
    Bisim {
        left: String,
        right: String,
        #[arg(long, conflicts_with = "weak")]
        strong: bool,
        #[arg(long)]
        weak: bool,
    },
    /// Corpus-relative checks of synthesized or given monitors and enforcers.
    Check {
        #[arg(value_enum)]
        what: CheckKind,
        #[arg(long)]
        formula: String,
        /// Enforcer to check instead of the synthesized one.
        #[arg(long)]
        enforcer: Option<String>,
        /// Monitor to check instead of the synthesized one.
        #[arg(long)]
        monitor: Option<String>,
        /// Second formula for `equivalence`, defaults to the normal form.
        #[arg(long)]
        other: Option<String>,
        /// Explicit processes, one per occurrence, replacing the generated corpus.
        #[arg(long = "process")]
        processes: Vec<String>,
        /// Explicit traces for `determinism`, one per occurrence.
        #[arg(long = "trace")]
        traces: Vec<String>,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Print a reproducible process corpus.
    GenCorpus {
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Random formulae through the whole enforcement pipeline.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
}

/// Text and JSON renderings of a result, plus whether it counts as a failed check.
struct Output {
    text: String,
    json: Json,
    failed: bool,
}

impl Output {
    fn ok(text: String, json: Json) -> Output {
        Output {
            text,
            json,
            failed: false,
        }
    }
}

/// Reads `arg` as a file when such a file exists, otherwise as inline source.
fn source(arg: &str) -> Result<String> {
    let p = Path::new(arg);
    if p.is_file() {
        std::fs::read_to_string(p).with_context(|| format!("reading {arg}"))
    } else {
        Ok(arg.to_string())
    }
}

fn formula(arg: &str) -> Result<Formula> {
    Ok(parse::parse_formula(source(arg)?.trim())?)
}

fn process(arg: &str) -> Result<Process> {
    Ok(parse::parse_process(source(arg)?.trim())?)
}

fn monitor(arg: &str) -> Result<Monitor> {
    Ok(parse::parse_monitor(source(arg)?.trim())?)
}

fn enforcer(arg: &str) -> Result<Enforcer> {
    Ok(parse::parse_enforcer(source(arg)?.trim())?)
}

fn actions(out: &[Action]) -> String {
    out.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn lts_text(lts: &Lts) -> String {
    let mut s = String::new();
    for (i, label) in lts.labels.iter().enumerate() {
        let mark = if i == lts.init { "*" } else { " " };
        s.push_str(&format!("{mark}{i}: {label}\n"));
        for (a, j) in &lts.edges[i] {
            s.push_str(&format!("    --{a}--> {j}\n"));
        }
    }
    s.pop();
    s
}

fn lts_json(lts: &Lts) -> Json {
    json!({
        "init": lts.init,
        "states": lts.labels,
        "edges": lts.edges.iter().enumerate().flat_map(|(i, es)| {
            es.iter().map(move |(a, j)| json!([i, a.to_string(), j]))
        }).collect::<Vec<_>>(),
    })
}

fn report_output(r: &CheckReport) -> Output {
    let verdict = if r.passed() { "pass on corpus" } else { "fail" };
    let mut text = format!(
        "{}: {verdict} ({} checked, corpus {})",
        r.check, r.checked, r.corpus
    );
    for c in &r.counterexamples {
        text.push_str(&format!(
            "\n  counterexample: process {}\n    trace: {}\n    expected: {}\n    actual: {}",
            c.process, c.trace, c.expected, c.actual
        ));
    }
    for n in &r.notes {
        text.push_str(&format!("\n  note: {n}"));
    }
    let json = json!({
        "check": r.check,
        "corpus": r.corpus,
        "checked": r.checked,
        "verdict": verdict,
        "counterexamples": r.counterexamples.iter().map(|c| json!({
            "process": c.process,
            "trace": c.trace,
            "expected": c.expected,
            "actual": c.actual,
        })).collect::<Vec<_>>(),
        "notes": r.notes,
    });
    Output {
        text,
        json,
        failed: !r.passed(),
    }
}

fn solver(universe: &[String]) -> Result<Solver> {
    let values = universe
        .iter()
        .map(|v| parse::parse_value(v.trim()))
        .collect::<Result<Vec<Value>, _>>()?;
    Ok(Solver::with_universe(values))
}

fn run(cli: &Cli) -> Result<Output> {
    let solver = solver(&cli.universe)?;
    let opts = NormalizeOptions {
        prune: true,
        solver: solver.clone(),
    };
    match &cli.cmd {
        Cmd::Parse { input, kind } => {
            let (canon, class) = match kind {
                Kind::Formula => {
                    let f = formula(input)?;
                    let class = f.classify_with(&solver)?;
                    (f.to_string(), class.to_string())
                }
                Kind::Process => {
                    let p = process(input)?;
                    p.check()?;
                    (p.to_string(), "process".into())
                }
                Kind::Monitor => (monitor(input)?.to_string(), "monitor".into()),
                Kind::Enforcer => {
                    let e = enforcer(input)?;
                    let wf = if is_well_formed(&e, &solver)? {
                        "well-formed enforcer"
                    } else {
                        "enforcer"
                    };
                    (e.to_string(), wf.into())
                }
            };
            Ok(Output::ok(
                format!("{canon} : {class}"),
                json!({ "canonical": canon, "class": class }),
            ))
        }
        Cmd::Normalize {
            formula: f,
            stage,
            no_prune,
        } => {
            let phi = formula(f)?;
            let opts = NormalizeOptions {
                prune: !no_prune,
                ..opts
            };
            let st = normalize_stages(&phi, &opts)?;
            let text = match stage {
                Stage::Sf => st.sf.to_string(),
                Stage::Eq => st.eq.to_string(),
                Stage::Open => st.open.to_string(),
                Stage::Uni => st.uni.to_string(),
                Stage::Comb => st.comb.to_string(),
                Stage::Nf => st.nf.to_string(),
                Stage::Wf => st.wf.to_string(),
            };
            let name = stage
                .to_possible_value()
                .expect("named")
                .get_name()
                .to_string();
            let text = text.trim_end().to_string();
            Ok(Output::ok(
                text.clone(),
                json!({ "stage": name, "output": text }),
            ))
        }
        Cmd::SynthMonitor { formula: f } => {
            let m = synth_monitor(&formula(f)?)?;
            Ok(Output::ok(
                m.to_string(),
                json!({ "monitor": m.to_string() }),
            ))
        }
        Cmd::SynthEnforcer {
            formula: f,
            normalized,
        } => {
            let phi = formula(f)?;
            let nf = if *normalized {
                phi
            } else {
                normalize_with(&phi, &opts)?
            };
            let e = synth_enforcer_with(&nf, &solver)?;
            Ok(Output::ok(
                e.to_string(),
                json!({ "normal_form": nf.to_string(), "enforcer": e.to_string() }),
            ))
        }
        Cmd::Eval {
            formula: f,
            process: p,
        } => {
            let phi = formula(f)?;
            let (lts, _) = explore_process(&process(p)?, STATE_BUDGET)?;
            let set = denot(&phi, &lts, &Valuation::new())?;
            let states: Vec<&String> = set.iter().map(|&i| &lts.labels[i]).collect();
            let holds = set.contains(&lts.init);
            let mut text = format!("initial state satisfies: {holds}");
            for s in &states {
                text.push_str(&format!("\n{s}"));
            }
            Ok(Output::ok(
                text,
                json!({ "satisfied": holds, "states": states }),
            ))
        }
        Cmd::Sat { formula: f, bound } => match bounded_sat(&formula(f)?, *bound)? {
            Some(p) => Ok(Output::ok(
                p.to_string(),
                json!({ "satisfiable": true, "witness": p.to_string() }),
            )),
            None => Ok(Output {
                text: format!("no satisfying process within bound {bound}"),
                json: json!({ "satisfiable": false, "bound": bound }),
                failed: true,
            }),
        },
        Cmd::Simulate {
            enforcer: e,
            monitor: m,
            trace,
            process: p,
        } => simulate(e.as_deref(), m.as_deref(), trace.as_deref(), p.as_deref()),
        Cmd::Bisim {
            left,
            right,
            strong,
            weak,
        } => {
            if !strong && !weak {
                bail!("choose --strong or --weak");
            }
            let (l, _) = explore_process(&process(left)?, STATE_BUDGET)?;
            let (r, _) = explore_process(&process(right)?, STATE_BUDGET)?;
            let res = lts_bisim(&l, &r, *weak);
            let kind = if *weak { "weakly" } else { "strongly" };
            let mut text = format!(
                "{} {kind} bisimilar",
                if res.equivalent { "" } else { "not" }
            )
            .trim()
            .to_string();
            let play: Vec<Json> = res
                .moves
                .iter()
                .map(|mv| {
                    let side = if mv.side == Side::Left { "left" } else { "right" };
                    text.push_str(&format!(
                        "\n  {side} --{}--> {} / {}",
                        mv.action,
                        mv.attacker_to,
                        mv.defender_to.as_deref().unwrap_or("stuck")
                    ));
                    json!({ "side": side, "action": mv.action.to_string(), "attacker_to": mv.attacker_to, "defender_to": mv.defender_to })
                })
                .collect();
            Ok(Output {
                text,
                json: json!({ "bisimilar": res.equivalent, "weak": weak, "play": play }),
                failed: !res.equivalent,
            })
        }
        Cmd::Check {
            what,
            formula: f,
            enforcer: e,
            monitor: m,
            other,
            processes,
            traces,
            corpus,
        } => {
            let phi = formula(f)?;
            let corpus = if processes.is_empty() {
                verify::gen_processes(
                    &verify::default_alphabet(),
                    corpus.depth,
                    corpus.count,
                    corpus.seed,
                )
            } else {
                Corpus::from_processes(
                    processes
                        .iter()
                        .map(|p| process(p))
                        .collect::<Result<_>>()?,
                )
            };
            let the_enforcer = || -> Result<Enforcer> {
                match e {
                    Some(e) => enforcer(e),
                    None => Ok(synth_enforcer_with(&normalize_with(&phi, &opts)?, &solver)?),
                }
            };
            let report = match what {
                CheckKind::Soundness => verify::check_soundness(&the_enforcer()?, &phi, &corpus)?,
                CheckKind::Transparency => {
                    verify::check_transparency(&the_enforcer()?, &phi, &corpus)?
                }
                CheckKind::Determinism => {
                    let ts = if traces.is_empty() {
                        verify::gen_traces(&verify::default_alphabet(), 6, 20, corpus.seed)
                    } else {
                        traces
                            .iter()
                            .map(|t| parse::parse_trace(t))
                            .collect::<Result<_, _>>()?
                    };
                    verify::determinism_report(&the_enforcer()?, &ts)
                }
                CheckKind::Equivalence => {
                    let psi = match other {
                        Some(o) => formula(o)?,
                        None => normalize_with(&phi, &opts)?,
                    };
                    verify::check_equivalence(&phi, &psi, &corpus)?
                }
                CheckKind::Monitoring => {
                    let mon = match m {
                        Some(m) => monitor(m)?,
                        None => synth_monitor(&phi)?,
                    };
                    monitoring_report(&mon, &phi, &corpus)?
                }
                CheckKind::Bridge => verify::check_enf_mon_bridge(&phi, &corpus)?,
            };
            Ok(report_output(&report))
        }
        Cmd::GenCorpus { corpus } => {
            let c = verify::gen_processes(
                &verify::default_alphabet(),
                corpus.depth,
                corpus.count,
                corpus.seed,
            );
            let ps: Vec<String> = c.processes.iter().map(ToString::to_string).collect();
            Ok(Output::ok(
                ps.join("\n"),
                json!({ "corpus": c.id(), "processes": ps }),
            ))
        }
        Cmd::Fuzz { seed, count, depth } => {
            let cfg = FuzzConfig {
                seed: *seed,
                formulas: *count,
                formula_depth: *depth,
                ..FuzzConfig::default()
            };
            let out = verify::fuzz(&cfg)?;
            let failed = !out.failures.is_empty() || !out.oracle_disagreements.is_empty();
            let mut text = format!(
                "{} formulae ({} unsatisfiable skipped), {} processes, {} oracle disagreements, {} failures",
                out.formulas,
                out.unsatisfiable,
                out.processes_checked,
                out.oracle_disagreements.len(),
                out.failures.len()
            );
            for f in &out.failures {
                text.push_str(&format!(
                    "\n  {}: {}\n    minimized: {}\n    {}",
                    f.check, f.formula, f.minimized, f.detail
                ));
            }
            let json = json!({
                "formulas": out.formulas,
                "unsatisfiable": out.unsatisfiable,
                "processes": out.processes_checked,
                "oracle_disagreements": out.oracle_disagreements,
                "failures": out.failures.iter().map(|f| json!({
                    "check": f.check,
                    "formula": f.formula.to_string(),
                    "minimized": f.minimized.to_string(),
                    "detail": f.detail,
                })).collect::<Vec<_>>(),
            });
            Ok(Output { text, json, failed })
        }
    }
}

fn monitoring_report(m: &Monitor, phi: &Formula, corpus: &Corpus) -> Result<CheckReport> {
    let r = check_monitoring(m, phi, &corpus.processes)?;
    let mut notes = vec![
        format!(
            "{} satisfying processes never accepted",
            r.missed_satisfactions.len()
        ),
        format!(
            "{} violating processes never rejected",
            r.missed_violations.len()
        ),
    ];
    if !r.corresponds() {
        notes.push("monitor is neither positively nor negatively complete on the corpus".into());
    }
    Ok(CheckReport {
        check: "monitoring".into(),
        corpus: corpus.id(),
        checked: r.checked,
        counterexamples: r
            .unsound
            .iter()
            .map(|u| verify::Counterexample {
                process: u.split_once(": ").map_or(u.clone(), |(_, p)| p.to_string()),
                trace: String::new(),
                expected: "verdicts agree with satisfaction".into(),
                actual: u.split_once(": ").map_or(u.clone(), |(w, _)| w.to_string()),
            })
            .collect(),
        notes,
    })
}

fn simulate(
    e: Option<&str>,
    m: Option<&str>,
    trace: Option<&str>,
    p: Option<&str>,
) -> Result<Output> {
    match (e, m, trace, p) {
        (Some(e), None, Some(t), None) => {
            let e = enforcer(e)?;
            let t = parse::parse_trace(source(t)?.trim())?;
            let outs = transduce(&e, &t);
            let lines: Vec<String> = outs.iter().map(|(o, _)| actions(o)).collect();
            let json = json!({
                "outcomes": outs.iter().map(|(o, f)| json!({ "output": actions(o), "enforcer": f.to_string() })).collect::<Vec<_>>(),
            });
            Ok(Output::ok(lines.join("\n"), json))
        }
        (Some(e), None, None, Some(p)) => {
            let (lts, _) = enforced_lts(&enforcer(e)?, &process(p)?, STATE_BUDGET)?;
            Ok(Output::ok(lts_text(&lts), lts_json(&lts)))
        }
        (None, Some(m), Some(t), None) => {
            let m = monitor(m)?;
            let t = parse::parse_trace(source(t)?.trim())?;
            let mut cur = vec![m];
            for ev in &t {
                let mut next: Vec<Monitor> = cur.iter().flat_map(|m| monitor_step(m, ev)).collect();
                next.sort();
                next.dedup();
                cur = next;
            }
            let verdicts: Vec<String> = cur
                .iter()
                .filter(|m| m.verdict().is_some())
                .map(ToString::to_string)
                .collect();
            let states: Vec<String> = cur.iter().map(ToString::to_string).collect();
            let text = if states.is_empty() {
                "end".to_string()
            } else {
                states.join("\n")
            };
            Ok(Output::ok(
                text,
                json!({ "monitors": states, "verdicts": verdicts }),
            ))
        }
        (None, Some(m), None, Some(p)) => {
            let (lts, states) = monitored_lts(&monitor(m)?, &process(p)?, STATE_BUDGET)?;
            let has = |v| states.iter().any(|s| s.monitor.verdict() == Some(v));
            let (acc, rej) = (has(Verdict::Yes), has(Verdict::No));
            let text = format!("accepts: {acc}\nrejects: {rej}\n{}", lts_text(&lts));
            Ok(Output::ok(
                text,
                json!({ "accepts": acc, "rejects": rej, "lts": lts_json(&lts) }),
            ))
        }
        _ => Err(anyhow!(
            "give --enforcer or --monitor, and exactly one of --trace or --process"
        )),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            let body = match cli.format {
                Format::Text => out.text,
                Format::Json => serde_json::to_string_pretty(&out.json).expect("serializable"),
            };
            // a closed pipe is not an error worth reporting
            let _ = writeln!(std::io::stdout().lock(), "{body}");
            ExitCode::from(u8::from(out.failed))
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
