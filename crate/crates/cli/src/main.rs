//! `nearkit`: check, search, canonicalize and order-convert finite ternary
//! models, and rerun the reproduction checks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use nearkit_core::catalog::{get_system, identity, load_system, SYSTEM_NAMES};
use nearkit_core::model::{canonical_form, profile, Assignment, FiniteModel};
use nearkit_core::order::{from_order_structure, to_order_structure, OrderStructure};
use nearkit_core::search::{count_models, find_models_with_workers, SearchSpec};
use nearkit_core::terms::{parse_identity, Identity};
use nearkit_core::{verify, AxiomSystem};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;

#[derive(Parser)]
#[command(name = "nearkit", version, about = "Finite-model workbench for nearlattice identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check identities against a model file.
    Check {
        model: PathBuf,
        /// Catalog system, comma-separated identity names, identity text, or identity file.
        identities: String,
        /// Print the first failing assignment of each failed identity.
        #[arg(long)]
        counterexample: bool,
        #[arg(long)]
        json: bool,
    },
    /// Enumerate models of a given size.
    Search {
        #[arg(long)]
        size: usize,
        /// Systems, identity names or files, comma-separated.
        #[arg(long)]
        satisfy: String,
        /// Identities every model must fail.
        #[arg(long)]
        violate: Option<String>,
        #[arg(long)]
        limit: Option<usize>,
        /// Keep one model per isomorphism class.
        #[arg(long)]
        dedup: bool,
        /// Wall-clock limit in seconds.
        #[arg(long, default_value_t = 60)]
        timeout: u64,
    },
    /// Count models of a given size.
    Count {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        satisfy: String,
        #[arg(long)]
        dedup: bool,
    },
    /// Print the canonical representative of a model's isomorphism class.
    Canon { model: PathBuf },
    /// Convert a model to its order structure and back.
    Roundtrip { model: PathBuf },
    /// Run the reproduction checks.
    VerifyPaper {
        /// Restrict to one group: examples, basis, hickman, chajda, h8-equivalence, derived, independence, oracle.
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

/// A message for stderr and the exit code to leave with.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

type CliResult = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { model, identities, counterexample, json } => check(&model, &identities, counterexample, json),
        Command::Search { size, satisfy, violate, limit, dedup, timeout } => {
            search(size, &satisfy, violate.as_deref(), limit, dedup, timeout)
        }
        Command::Count { size, satisfy, dedup } => count(size, &satisfy, dedup),
        Command::Canon { model } => canon(&model),
        Command::Roundtrip { model } => roundtrip(&model),
        Command::VerifyPaper { only, json } => verify_paper(only.as_deref(), json),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("nearkit: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn read_model(path: &Path) -> Result<FiniteModel, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    text.parse().map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn workers() -> Result<usize, Failure> {
    match std::env::var("NEARKIT_THREADS") {
        Ok(value) => match value.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(usage(format!("NEARKIT_THREADS must be a positive integer, got `{value}`"))),
        },
        Err(_) => Ok(thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Resolves one list item: catalog system, then catalog identity, then file.
fn resolve_item(item: &str) -> Result<Vec<Identity>, Failure> {
    if SYSTEM_NAMES.contains(&item) {
        return get_system(item).map(|s| s.identities).map_err(|e| usage(e.to_string()));
    }
    if let Ok(id) = identity(item) {
        return Ok(vec![id]);
    }
    if Path::new(item).is_file() {
        return load_system(item).map(|s| s.identities).map_err(|e| usage(e.to_string()));
    }
    Err(usage(format!(
        "`{item}` is not a catalog system ({}), a catalog identity, or a file",
        SYSTEM_NAMES.join(", ")
    )))
}

fn resolve_list(list: &str) -> Result<AxiomSystem, Failure> {
    let mut identities = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        identities.extend(resolve_item(item)?);
    }
    Ok(AxiomSystem::new(list, identities))
}

/// Like [`resolve_list`], but also accepts a single identity written out.
fn resolve_identities(arg: &str) -> Result<AxiomSystem, Failure> {
    if SYSTEM_NAMES.contains(&arg) {
        return get_system(arg).map_err(|e| usage(e.to_string()));
    }
    if arg.contains('=') && !Path::new(arg).is_file() {
        let id = parse_identity(arg).map_err(|e| usage(format!("{arg}: {e}")))?;
        return Ok(AxiomSystem::new("identity", vec![id]));
    }
    resolve_list(arg)
}

fn assignment_json(a: &Assignment) -> Value {
    Value::Object(a.iter().map(|(name, value)| (name.to_string(), json!(value))).collect())
}

fn check(model: &Path, identities: &str, show_counterexample: bool, as_json: bool) -> CliResult {
    let model = read_model(model)?;
    let system = resolve_identities(identities)?;
    let entries = profile(&model, &system);
    let all_hold = entries.iter().all(|e| e.holds);
    if as_json {
        let rows: Vec<Value> = entries
            .iter()
            .map(|e| {
                let mut row = json!({ "identity": e.name, "holds": e.holds });
                if show_counterexample {
                    row["counterexample"] = e.counterexample.as_ref().map_or(Value::Null, assignment_json);
                }
                row
            })
            .collect();
        let doc = json!({ "size": model.size(), "system": system.name, "all_hold": all_hold, "profile": rows });
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        let width = entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
        for e in &entries {
            match (&e.counterexample, show_counterexample) {
                (Some(cx), true) => println!("{:<width$}  fails  {cx}", e.name),
                (Some(_), false) => println!("{:<width$}  fails", e.name),
                (None, _) => println!("{:<width$}  holds", e.name),
            }
        }
        let failed = entries.iter().filter(|e| !e.holds).count();
        println!("{} of {} identities fail", failed, entries.len());
    }
    Ok(status(all_hold))
}

fn search(size: usize, satisfy: &str, violate: Option<&str>, limit: Option<usize>, dedup: bool, timeout: u64) -> CliResult {
    let mut spec = SearchSpec::new(size, resolve_list(satisfy)?).dedup(dedup);
    if let Some(list) = violate {
        spec = spec.violate(resolve_list(list)?.identities);
    }
    if let Some(k) = limit {
        spec = spec.limit(k);
    }
    let workers = workers()?;
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let _ = tx.send(find_models_with_workers(&spec, workers));
    });
    let models = match rx.recv_timeout(Duration::from_secs(timeout)) {
        Ok(result) => result.map_err(|e| usage(e.to_string()))?,
        Err(_) => {
            return Err(Failure { code: EXIT_TIMEOUT, message: format!("search timed out after {timeout}s") });
        }
    };
    let blocks: Vec<String> = models.iter().map(FiniteModel::to_string).collect();
    print!("{}", blocks.join("\n"));
    Ok(status(!models.is_empty()))
}

fn count(size: usize, satisfy: &str, dedup: bool) -> CliResult {
    let n = count_models(size, &resolve_list(satisfy)?, dedup).map_err(|e| usage(e.to_string()))?;
    println!("{n}");
    Ok(ExitCode::SUCCESS)
}

fn canon(path: &Path) -> CliResult {
    let model = read_model(path)?;
    print!("{}", canonical_form(&model).map_err(|e| usage(e.to_string()))?);
    Ok(ExitCode::SUCCESS)
}

fn print_order(order: &OrderStructure) {
    let n = order.size();
    println!("join:");
    for x in 0..n {
        let row: Vec<String> = (0..n).map(|y| order.join(x, y).to_string()).collect();
        println!("  {}", row.join(" "));
    }
    let pairs: Vec<String> =
        (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|&(x, y)| order.leq(x, y)).map(|(x, y)| format!("{x}<={y}")).collect();
    println!("order: {}", pairs.join(" "));
    println!("filters:");
    for a in 0..n {
        let members: Vec<String> = order.filter(a).iter().map(usize::to_string).collect();
        println!("  ({a}] = {{{}}}", members.join(","));
    }
    println!("filter meets (a: x ^ y = v):");
    for (a, x, y, v) in order.meet_records() {
        println!("  {a}: {x} ^ {y} = {v}");
    }
}

fn roundtrip(path: &Path) -> CliResult {
    let model = read_model(path)?;
    let order = match to_order_structure(&model) {
        Ok(order) => order,
        Err(e) => {
            println!("FAIL: {e}");
            return Ok(ExitCode::from(EXIT_FAIL));
        }
    };
    print_order(&order);
    let rebuilt = match from_order_structure(&order) {
        Ok(m) => m,
        Err(e) => {
            println!("FAIL: {e}");
            return Ok(ExitCode::from(EXIT_FAIL));
        }
    };
    println!("reconstructed m:");
    print!("{rebuilt}");
    if rebuilt == model {
        println!("PASS: round trip reproduces the model");
        Ok(ExitCode::SUCCESS)
    } else {
        let cell = (0..model.table().len()).find(|&i| model.table()[i] != rebuilt.table()[i]).expect("tables differ");
        let n = model.size();
        let (a, b, c) = (cell / (n * n), cell / n % n, cell % n);
        println!("FAIL: m({a},{b},{c}) is {} but rebuilds as {}", model.table()[cell], rebuilt.table()[cell]);
        Ok(ExitCode::from(EXIT_FAIL))
    }
}

fn verify_paper(only: Option<&str>, as_json: bool) -> CliResult {
    let report = verify::run(only, 1).map_err(|e| usage(e.to_string()))?;
    if as_json {
        println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    } else {
        print!("{report}");
    }
    Ok(status(report.passed))
}
