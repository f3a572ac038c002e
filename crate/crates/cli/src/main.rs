use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fieldcalc_core::eval::{Evaluator, SensorState};
use fieldcalc_core::json::{tree_from_json, tree_to_json, value_from_json};
use fieldcalc_core::network::selfstab::{check_self_stabilisation, SelfStabOptions, SelfStabOutcome};
use fieldcalc_core::network::{environment_from_json, field_to_json, simulate, Environment};
use fieldcalc_core::oracle::grid::GRID_ENV;
use fieldcalc_core::oracle::{relaxation_fixpoint, verify_prestabilising, verify_stabilising, SampleGrid};
use fieldcalc_core::parser::{parse_sort, parse_sources};
use fieldcalc_core::pipeline::{check_program, Verdict};
use fieldcalc_core::{Diagnostic, Program, SensorCatalog, SignatureRegistry, ValueTree};
use serde_json::{json, Value as J};

const DEFAULT_SEED: u64 = 20_140_101;

#[derive(Parser)]
#[command(name = "fieldcalc", version, about = "Check, evaluate and simulate self-stabilising field programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type, sort and annotation check; exit 0 iff well annotated.
    Check {
        #[command(flatten)]
        src: Sources,
        #[arg(long)]
        emit_derivation: bool,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate `main` on a single device.
    Eval {
        #[command(flatten)]
        src: Sources,
        /// Sensor values as a JSON object.
        #[arg(long, default_value = "{}")]
        sensors: String,
        /// Neighbour value-trees as a JSON array.
        #[arg(long, default_value = "[]")]
        neighbors: String,
    },
    /// Run 1-fair (or k-fair) rounds from the empty network until stable.
    Simulate {
        #[command(flatten)]
        src: Sources,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Write the JSON-lines trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compare stable fields reached from random reachable configurations.
    Selfstab {
        #[command(flatten)]
        src: Sources,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 5)]
        trials: usize,
    },
    /// Check every stabilising and annotated signature on the sample grid.
    VerifySignatures {
        #[command(flatten)]
        src: Sources,
        #[arg(long)]
        json: bool,
    },
    /// Stable field by chaotic relaxation.
    Oracle {
        #[command(flatten)]
        src: Sources,
        #[arg(long)]
        env: PathBuf,
    },
}

#[derive(Args)]
struct Sources {
    /// Program files; `main` may live in any of them.
    files: Vec<PathBuf>,
    #[arg(long)]
    program: Option<PathBuf>,
    /// Library files checked and loaded with the program.
    #[arg(long)]
    include: Vec<PathBuf>,
    /// Sensor sort declaration, `name=sort`.
    #[arg(long = "sensor", value_name = "NAME=SORT")]
    sensor_sorts: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    env: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    max_rounds: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Verdict,
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

struct Loaded {
    program: Program,
    catalog: SensorCatalog,
    parse_diags: Vec<Diagnostic>,
}

fn load(src: &Sources) -> Result<Loaded, Failure> {
    let paths: Vec<&PathBuf> = src.include.iter().chain(&src.files).chain(src.program.iter()).collect();
    if paths.is_empty() {
        return Err(usage("no program files given"));
    }
    let mut units = Vec::new();
    for p in &paths {
        units.push((p.display().to_string(), read(p)?));
    }
    let refs: Vec<(&str, &str)> = units.iter().map(|(n, s)| (n.as_str(), s.as_str())).collect();
    let (program, parse_diags) = parse_sources(&refs);
    let mut catalog = SensorCatalog::default();
    for decl in &src.sensor_sorts {
        let (name, sort) = decl.split_once('=').ok_or_else(|| usage(format!("expected NAME=SORT, got `{decl}`")))?;
        let sort = parse_sort(sort.trim()).ok_or_else(|| usage(format!("unknown sort `{sort}`")))?;
        catalog.declare(name.trim().trim_start_matches('#'), sort);
    }
    Ok(Loaded { program, catalog, parse_diags })
}

fn load_runnable(src: &Sources) -> Result<Loaded, Failure> {
    let l = load(src)?;
    if let Some(d) = l.parse_diags.iter().find(|d| d.is_error()) {
        return Err(usage(d));
    }
    if l.program.main().is_none() {
        return Err(usage("program has no `main`"));
    }
    Ok(l)
}

fn load_env(path: &Path, catalog: &mut SensorCatalog) -> Result<Environment, Failure> {
    let (env, undeclared) = environment_from_json(&read(path)?, catalog).map_err(usage)?;
    for s in undeclared {
        eprintln!("warning: sensor `#{s}` has no declared sort; using the trivial sort");
    }
    Ok(env)
}

fn print_json(j: &J) {
    use std::io::Write;
    // A closed pipe downstream is not an error worth reporting.
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(j).expect("JSON serialises"));
}

fn cmd_check(src: &Sources, emit_derivation: bool, as_json: bool) -> CmdResult {
    let l = load(src)?;
    let library = l.program.main().is_none();
    let report = if l.parse_diags.iter().any(Diagnostic::is_error) {
        None
    } else {
        Some(check_program(l.program, l.catalog, library))
    };
    let (verdict, mut diags, derivations) = match report {
        Some(r) => (r.verdict, r.diagnostics, r.derivations),
        None => (Verdict::ParseError, Vec::new(), Vec::new()),
    };
    let mut all = l.parse_diags;
    all.append(&mut diags);
    if as_json {
        let mut out = json!({ "verdict": verdict.to_string(), "diagnostics": all });
        if emit_derivation {
            out["derivations"] = derivations
                .iter()
                .map(|(f, s, d)| json!({ "function": f, "signature": s, "derivation": d }))
                .collect();
        }
        print_json(&out);
    } else {
        for d in &all {
            println!("{d}");
        }
        if emit_derivation {
            for (f, s, d) in &derivations {
                println!("{f} : {s}");
                print!("{d}");
            }
        }
        println!("verdict: {verdict}");
    }
    if verdict == Verdict::WellAnnotated {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn cmd_eval(src: &Sources, sensors: &str, neighbors: &str) -> CmdResult {
    let l = load_runnable(src)?;
    let sj: J = serde_json::from_str(sensors).map_err(usage)?;
    let J::Object(map) = sj else { return Err(usage("--sensors must be a JSON object")) };
    let mut state = SensorState::new();
    for (k, v) in map {
        state.insert(k, value_from_json(&v).map_err(usage)?);
    }
    let nj: J = serde_json::from_str(neighbors).map_err(usage)?;
    let J::Array(items) = nj else { return Err(usage("--neighbors must be a JSON array")) };
    let trees: Vec<ValueTree> = items.iter().map(tree_from_json).collect::<Result<_, _>>().map_err(usage)?;
    let refs: Vec<&ValueTree> = trees.iter().collect();
    let t = Evaluator::new(&l.program).eval_main(&state, &refs).map_err(usage)?;
    print_json(&json!({ "value": fieldcalc_core::json::value_to_json(&t.root), "tree": tree_to_json(&t), "text": t.to_string() }));
    Ok(())
}

fn cmd_simulate(src: &Sources, run: &RunArgs, k: usize, trace: Option<&Path>) -> CmdResult {
    let mut l = load_runnable(src)?;
    let env = load_env(&run.env, &mut l.catalog)?;
    let (net, out) = simulate(&l.program, env, run.seed, k, run.max_rounds).map_err(usage)?;
    if let Some(path) = trace {
        fs::write(path, net.trace_lines()).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    print_json(&json!({
        "seed": run.seed,
        "k": k,
        "rounds": out.rounds,
        "lastChange": out.last_change,
        "stable": out.stable,
        "field": field_to_json(&net.config.field),
    }));
    if out.stable {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn cmd_selfstab(src: &Sources, run: &RunArgs, trials: usize) -> CmdResult {
    let mut l = load_runnable(src)?;
    let env = load_env(&run.env, &mut l.catalog)?;
    let opts = SelfStabOptions { trials, seed: run.seed, max_rounds: run.max_rounds, ..Default::default() };
    let outcome = check_self_stabilisation(&l.program, &env, &l.catalog, &opts).map_err(usage)?;
    let (verdict, detail, ok) = match &outcome {
        SelfStabOutcome::Unique(f) => ("unique", field_to_json(f), true),
        SelfStabOutcome::Counterexample { trial_a, trial_b, device } => {
            ("counterexample", json!({ "trials": [trial_a, trial_b], "device": device }), false)
        }
        SelfStabOutcome::NoConvergence { trial } => ("no convergence", json!({ "trial": trial }), false),
    };
    print_json(&json!({ "seed": run.seed, "trials": trials, "verdict": verdict, "detail": detail }));
    if ok {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn cmd_verify(src: &Sources, as_json: bool) -> CmdResult {
    let l = load(src)?;
    if let Some(d) = l.parse_diags.iter().find(|d| d.is_error()) {
        return Err(usage(d));
    }
    let grid = SampleGrid::from_env();
    let reg = SignatureRegistry::new(&l.program, l.catalog);
    let ev = Evaluator::new(&l.program);
    let apply = |name: &str| {
        let name = name.to_string();
        move |args: &[fieldcalc_core::Value]| ev.apply(&name, args, &SensorState::new())
    };
    let mut rows = Vec::new();
    let mut failed = 0;
    for e in reg.entries() {
        let stab = e.stab.iter().map(|s| (s.to_string(), verify_stabilising(apply(&e.name), s, &grid)));
        let ann = e.ann.iter().map(|a| (a.to_string(), verify_prestabilising(apply(&e.name), a, &grid)));
        for (sig, v) in stab.chain(ann) {
            let witnesses: Vec<String> = v.witnesses().iter().map(|w| w.to_string()).collect();
            failed += usize::from(!v.passed());
            rows.push((e.name.clone(), sig, v.passed(), witnesses));
        }
    }
    let grid_text: Vec<String> = grid.reals.iter().map(|x| fieldcalc_core::Value::real(*x).to_string()).collect();
    if as_json {
        let entries: Vec<J> = rows
            .iter()
            .map(|(f, s, ok, w)| json!({ "function": f, "signature": s, "passed": ok, "witnesses": w }))
            .collect();
        print_json(&json!({ "grid": grid_text, "entries": entries }));
    } else {
        println!("grid: {} (override with {GRID_ENV})", grid_text.join(","));
        for (f, s, ok, w) in &rows {
            println!("{} {f} {s}", if *ok { "pass" } else { "FAIL" });
            for x in w {
                println!("    {x}");
            }
        }
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn cmd_oracle(src: &Sources, env: &Path) -> CmdResult {
    let mut l = load_runnable(src)?;
    let env = load_env(env, &mut l.catalog)?;
    let r = relaxation_fixpoint(&l.program, &env, 10_000_000).map_err(usage)?;
    print_json(&json!({ "converged": r.converged, "steps": r.steps, "field": field_to_json(&r.field) }));
    if r.converged {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { src, emit_derivation, json } => cmd_check(src, *emit_derivation, *json),
        Command::Eval { src, sensors, neighbors } => cmd_eval(src, sensors, neighbors),
        Command::Simulate { src, run, k, trace } => cmd_simulate(src, run, *k, trace.as_deref()),
        Command::Selfstab { src, run, trials } => cmd_selfstab(src, run, *trials),
        Command::VerifySignatures { src, json } => cmd_verify(src, *json),
        Command::Oracle { src, env } => cmd_oracle(src, env),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
