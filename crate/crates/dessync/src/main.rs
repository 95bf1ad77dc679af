use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use dessync::{
    annotate_run, build_do_observer, build_initial_estimator, build_reversed_observer, export,
    oracle, replay, verify_csso, verify_iso_via_estimator, verify_iso_via_reversed,
    CompiledModel, CssStructure, ModelFile, StateSet, Verdict,
};

/// Exit codes: 0 success / property holds, 1 usage error, 2 model error,
/// 3 property violated.
#[derive(Parser)]
#[command(name = "dessync", version, about = "State estimation and opacity verification for discrete event systems under synchronizing decentralized observation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Structure {
    Css,
    FeasibleCss,
    Observer,
    Iobserver,
    Reversed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PropertyArg {
    Iso,
    IsoReversed,
    Csso,
}

#[derive(Subcommand)]
enum Command {
    /// Build a structure from a model file and write it as DOT or JSON
    Build {
        /// Path to the JSON model file
        model: PathBuf,
        /// Which structure to build
        #[arg(long, value_enum)]
        structure: Structure,
        /// Seed states for `--structure css` (comma separated; default: all states)
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<String>,
        /// Output path (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
    },
    /// Check an opacity property and print the verdict as JSON
    Verify {
        model: PathBuf,
        #[arg(long, value_enum)]
        property: PropertyArg,
        /// Secret states (comma separated; default: the model's secret list)
        #[arg(long, value_delimiter = ',')]
        secret: Option<Vec<String>>,
    },
    /// Replay an event trace and report each synchronization's estimates
    Replay {
        model: PathBuf,
        /// Whitespace-separated event names, e.g. "a12 lam g3 a12"
        #[arg(long)]
        trace: String,
    },
    /// Evaluate a golden-facts file against a model
    Facts {
        model: PathBuf,
        facts: PathBuf,
    },
}

enum Failure {
    /// Bad command-line arguments (exit 1).
    Usage(String),
    /// Broken model file, unexecutable trace, failed facts, I/O (exit 2).
    Model(String),
}

type CmdResult = Result<u8, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn model_err(err: impl ToString) -> Failure {
    Failure::Model(err.to_string())
}

fn load_model(path: &Path) -> Result<CompiledModel, Failure> {
    let file = ModelFile::from_path(path).map_err(model_err)?;
    let compiled = file.build().map_err(model_err)?;
    for w in compiled.arch.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(compiled)
}

// an explicit empty value ( --secret "" ) denotes the empty set
fn resolve_states(m: &CompiledModel, names: &[String]) -> Result<StateSet, Failure> {
    names
        .iter()
        .filter(|n| !n.is_empty())
        .map(|n| m.nfa.state_named(n))
        .collect::<dessync::Result<_>>()
        .map_err(|e| usage(e.to_string()))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(model_err),
        None => {
            print!("{content}");
            std::io::stdout().flush().map_err(model_err)
        }
    }
}

fn cmd_build(
    model: &Path,
    structure: Structure,
    seeds: &[String],
    out: &Option<PathBuf>,
    format: Format,
) -> CmdResult {
    let m = load_model(model)?;
    if structure != Structure::Css && !seeds.is_empty() {
        return Err(usage("--seeds only applies to --structure css"));
    }
    let content = match structure {
        Structure::Css => {
            let seed_set = if seeds.is_empty() {
                m.nfa.all_states()
            } else {
                let set = resolve_states(&m, seeds)?;
                if set.is_empty() {
                    return Err(usage("seed list is empty"));
                }
                set
            };
            let css = CssStructure::build(&m.nfa, &m.arch, &seed_set).map_err(model_err)?;
            render_css(&m, &css, format)
        }
        Structure::FeasibleCss => {
            let css = CssStructure::build_feasible(&m.nfa, &m.arch).map_err(model_err)?;
            render_css(&m, &css, format)
        }
        Structure::Observer => {
            let css = CssStructure::build_feasible(&m.nfa, &m.arch).map_err(model_err)?;
            let obs = build_do_observer(&m.nfa, &m.arch, &css);
            match format {
                Format::Dot => export::observer_to_dot(&m.nfa, &obs),
                Format::Json => pretty(&export::observer_to_json(&m.nfa, &obs)),
            }
        }
        Structure::Iobserver => {
            let css = CssStructure::build_feasible(&m.nfa, &m.arch).map_err(model_err)?;
            let iobs = build_initial_estimator(&m.nfa, &css);
            match format {
                Format::Dot => export::iobserver_to_dot(&m.nfa, &iobs),
                Format::Json => pretty(&export::iobserver_to_json(&m.nfa, &iobs)),
            }
        }
        Structure::Reversed => {
            let css =
                CssStructure::build(&m.nfa, &m.arch, &m.nfa.all_states()).map_err(model_err)?;
            let robs = build_reversed_observer(&m.nfa, &css);
            match format {
                Format::Dot => export::observer_to_dot(&m.nfa, &robs),
                Format::Json => pretty(&export::observer_to_json(&m.nfa, &robs)),
            }
        }
    };
    emit(out, &content)?;
    Ok(0)
}

fn render_css(m: &CompiledModel, css: &CssStructure, format: Format) -> String {
    match format {
        Format::Dot => export::css_to_dot(&m.nfa, css),
        Format::Json => pretty(&export::css_to_json(&m.nfa, css)),
    }
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("serializes") + "\n"
}

fn cmd_verify(model: &Path, property: PropertyArg, secret: &Option<Vec<String>>) -> CmdResult {
    let m = load_model(model)?;
    let secret_set = match secret {
        Some(names) => resolve_states(&m, names)?,
        None => m.secret.clone(),
    };
    if matches!(property, PropertyArg::Iso | PropertyArg::IsoReversed)
        && !secret_set.is_subset(m.nfa.initial())
    {
        return Err(usage("initial-state opacity expects the secret to be a subset of the initial states"));
    }
    let verdict: Verdict = match property {
        PropertyArg::Iso => {
            let css = CssStructure::build_feasible(&m.nfa, &m.arch).map_err(model_err)?;
            let iobs = build_initial_estimator(&m.nfa, &css);
            verify_iso_via_estimator(&iobs, &secret_set).map_err(model_err)?
        }
        PropertyArg::IsoReversed => {
            let css =
                CssStructure::build(&m.nfa, &m.arch, &m.nfa.all_states()).map_err(model_err)?;
            let robs = build_reversed_observer(&m.nfa, &css);
            verify_iso_via_reversed(&robs, m.nfa.initial(), &secret_set).map_err(model_err)?
        }
        PropertyArg::Csso => {
            let css = CssStructure::build_feasible(&m.nfa, &m.arch).map_err(model_err)?;
            let obs = build_do_observer(&m.nfa, &m.arch, &css);
            verify_csso(&obs, &secret_set).map_err(model_err)?
        }
    };
    println!("{}", pretty(&export::verdict_to_json(&m.nfa, &verdict)).trim_end());
    Ok(if verdict.holds { 0 } else { 3 })
}

fn cmd_replay(model: &Path, trace: &str) -> CmdResult {
    let m = load_model(model)?;
    let events = trace
        .split_whitespace()
        .map(|n| m.nfa.event_named(n))
        .collect::<dessync::Result<Vec<_>>>()
        .map_err(|e| usage(e.to_string()))?;
    let mut run = replay(&m.nfa, &m.arch, &events).map_err(model_err)?;
    let css = CssStructure::build_feasible(&m.nfa, &m.arch).map_err(model_err)?;
    let reports =
        annotate_run(&m.nfa, &m.arch, &css, &mut run, m.nfa.initial()).map_err(model_err)?;

    let start = m.nfa.unobservable_reach(m.arch.observable(), m.nfa.initial());
    println!(
        "current={} initial={}",
        m.nfa.state_set_text(&start),
        m.nfa.state_set_text(m.nfa.initial())
    );
    for (i, r) in reports.iter().enumerate() {
        println!(
            "sync {}: csi={} current={} initial={}",
            i + 1,
            r.csi.text(&m.nfa),
            m.nfa.state_set_text(&r.current),
            m.nfa.state_set_text(&r.initial)
        );
    }
    println!("pending={}", run.pending.text(&m.nfa));
    Ok(0)
}

fn cmd_facts(model: &Path, facts: &Path) -> CmdResult {
    let m = load_model(model)?;
    let text = std::fs::read_to_string(facts).map_err(model_err)?;
    let facts = oracle::GoldenFact::parse_list(&text).map_err(model_err)?;
    let report = oracle::check_golden_facts(&m.nfa, &m.arch, &facts).map_err(model_err)?;
    for o in &report.outcomes {
        if o.pass {
            println!("ok   {}", o.source);
        } else {
            println!("FAIL {} (got {})", o.source, o.detail);
        }
    }
    let failed = report.outcomes.iter().filter(|o| !o.pass).count();
    if failed > 0 {
        return Err(model_err(format!("{failed} golden facts failed")));
    }
    println!("all {} facts hold", report.outcomes.len());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Build { model, structure, seeds, out, format } => {
            cmd_build(model, *structure, seeds, out, *format)
        }
        Command::Verify { model, property, secret } => cmd_verify(model, *property, secret),
        Command::Replay { model, trace } => cmd_replay(model, trace),
        Command::Facts { model, facts } => cmd_facts(model, facts),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Model(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
