mod frames;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use chrvis_core::engine::{self, DEFAULT_FUEL};
use chrvis_core::equiv::{differential_check, load_corpus};
use chrvis_core::syntax::{parse_program, parse_query, pretty_print};
use chrvis_core::transform::transform;
use chrvis_core::vis::{run_vis, VisRunError, VisRunOutcome};

use frames::{frames_jsonl, frames_of};

#[derive(Parser)]
#[command(name = "chrvis", version, about = "Run, animate, transform and check CHR programs")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Semantics {
    /// Plain refined execution.
    Refined,
    /// Annotation-aware execution maintaining the graphical store.
    Vis,
}

#[derive(Subcommand)]
enum Commands {
    /// Execute a program on a query.
    Run {
        /// Program file (.chr)
        program: PathBuf,
        /// Query, e.g. "min(20),min(8),min(1)"
        #[arg(long)]
        query: String,
        #[arg(long, value_enum, default_value = "refined")]
        semantics: Semantics,
        /// Seed for `random` annotation parameters (falls back to
        /// CHRVIS_SEED, then 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Maximum number of transitions.
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// Output directory for emitted files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Emit frames.jsonl (vis semantics only).
        #[arg(long)]
        frames: bool,
        /// Emit one SVG per frame (vis semantics only).
        #[arg(long)]
        svg: bool,
        /// Emit trace.txt with one transition label per line.
        #[arg(long)]
        trace: bool,
    },
    /// Compile an annotated program into plain CHR.
    Transform {
        input: PathBuf,
        output: PathBuf,
    },
    /// Differentially check every program in a corpus directory.
    Check {
        corpus: PathBuf,
        /// Where to write the machine-readable report (JSON lines).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.or_else(|| std::env::var("CHRVIS_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Commands::Run { program, query, semantics, seed, fuel, out, frames, svg, trace } => {
            cmd_run(&program, &query, semantics, resolve_seed(seed), fuel, &out, frames, svg, trace)
        }
        Commands::Transform { input, output } => cmd_transform(&input, &output),
        Commands::Check { corpus, report, fuel, seed } => {
            cmd_check(&corpus, report.as_deref(), fuel, resolve_seed(seed))
        }
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    program_path: &Path,
    query_text: &str,
    semantics: Semantics,
    seed: u64,
    fuel: usize,
    out_dir: &Path,
    emit_frames: bool,
    emit_svg: bool,
    emit_trace: bool,
) -> Result<ExitCode> {
    if semantics == Semantics::Refined && (emit_frames || emit_svg) {
        bail!("frame and SVG emission require --semantics vis");
    }
    let source = fs::read_to_string(program_path)
        .with_context(|| format!("cannot read {}", program_path.display()))?;
    let program = parse_program(&source).map_err(|e| anyhow::anyhow!("{e}"))?;
    let query = parse_query(query_text).map_err(|e| anyhow::anyhow!("{e}"))?;

    if emit_frames || emit_svg || emit_trace {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("cannot create {}", out_dir.display()))?;
    }

    match semantics {
        Semantics::Refined => {
            let (outcome, exhausted) =
                match engine::run(&program, engine::initial_state(&query), fuel) {
                    Ok(outcome) => (outcome, false),
                    Err(engine::RunError::FuelExhausted(partial)) => (*partial, true),
                    Err(engine::RunError::Engine(e)) => return Err(e.into()),
                };
            if emit_trace {
                let text: String =
                    outcome.trace.iter().map(|(l, _)| format!("{l}\n")).collect();
                fs::write(out_dir.join("trace.txt"), text)?;
            }
            report_refined(&outcome, exhausted);
            Ok(ExitCode::from(if exhausted { 2 } else { 0 }))
        }
        Semantics::Vis => {
            let (outcome, exhausted) = match run_vis(&program, &query, fuel, seed) {
                Ok(outcome) => (outcome, false),
                Err(VisRunError::FuelExhausted(partial)) => (*partial, true),
                Err(VisRunError::Vis(e)) => return Err(e.into()),
            };
            if emit_trace {
                let text: String =
                    outcome.trace.iter().map(|(l, _)| format!("{l}\n")).collect();
                fs::write(out_dir.join("trace.txt"), text)?;
            }
            if emit_frames || emit_svg {
                let frames = frames_of(&outcome);
                if emit_frames {
                    fs::write(out_dir.join("frames.jsonl"), frames_jsonl(&frames))?;
                }
                if emit_svg {
                    for frame in &frames {
                        let snapshot = snapshot_objects(&outcome, frame.time);
                        fs::write(
                            out_dir.join(format!("frame_{}.svg", frame.seq)),
                            svg::render_svg(&snapshot),
                        )?;
                    }
                }
            }
            report_vis(&outcome, exhausted);
            Ok(ExitCode::from(if exhausted { 2 } else { 0 }))
        }
    }
}

fn snapshot_objects(
    outcome: &VisRunOutcome,
    time: usize,
) -> Vec<chrvis_core::graphics::GraphicalObject> {
    outcome.trace[time].1.gr.objects().to_vec()
}

fn report_refined(outcome: &engine::RunOutcome, exhausted: bool) {
    if exhausted {
        eprintln!("fuel exhausted after {} transitions", outcome.trace.len());
    }
    if outcome.state.is_failed() {
        println!("derivation failed");
    }
    let store: Vec<String> =
        outcome.state.store_terms().iter().map(|t| t.to_string()).collect();
    println!("final store: {{{}}}", store.join(", "));
    println!("transitions: {}", outcome.trace.len());
}

fn report_vis(outcome: &VisRunOutcome, exhausted: bool) {
    if exhausted {
        eprintln!("fuel exhausted after {} transitions", outcome.trace.len());
    }
    for warning in &outcome.state.warnings {
        eprintln!("warning: {warning}");
    }
    if outcome.state.is_failed() {
        println!("derivation failed");
    }
    let store: Vec<String> =
        outcome.state.store_terms().iter().map(|t| t.to_string()).collect();
    println!("final store: {{{}}}", store.join(", "));
    let objects: Vec<String> = outcome
        .state
        .gr
        .objects()
        .iter()
        .map(|o| format!("{}#{}", o.name, o.id))
        .collect();
    println!("graphical store: {{{}}}", objects.join(", "));
    println!("transitions: {}", outcome.trace.len());
}

fn cmd_transform(input: &Path, output: &Path) -> Result<ExitCode> {
    let source =
        fs::read_to_string(input).with_context(|| format!("cannot read {}", input.display()))?;
    let program = parse_program(&source).map_err(|e| anyhow::anyhow!("{e}"))?;
    let transformed = transform(&program).map_err(|e| anyhow::anyhow!("{e}"))?;
    let printed = pretty_print(&transformed.program);
    fs::write(output, &printed)
        .with_context(|| format!("cannot write {}", output.display()))?;
    println!(
        "wrote {} ({} rules, {} generated)",
        output.display(),
        transformed.program.rules.len(),
        transformed.provenance.len()
    );
    Ok(ExitCode::from(0))
}

fn cmd_check(corpus: &Path, report: Option<&Path>, fuel: usize, seed: u64) -> Result<ExitCode> {
    let entries = load_corpus(corpus).map_err(|e| anyhow::anyhow!("{e}"))?;
    if entries.is_empty() {
        eprintln!("warning: corpus {} contains no .chr programs", corpus.display());
        return Ok(ExitCode::from(0));
    }
    let mut records = Vec::new();
    let mut failures = 0usize;
    let mut total = 0usize;
    for entry in &entries {
        let checks = differential_check(&entry.program, &entry.queries, fuel, seed);
        for check in checks {
            total += 1;
            if !check.verdict {
                failures += 1;
                let reason = check
                    .error
                    .clone()
                    .or_else(|| check.witness.clone())
                    .unwrap_or_default();
                eprintln!("FAIL {} :: {} :: {reason}", entry.name, check.query);
            }
            let mut value = serde_json::to_value(&check)?;
            if let Some(map) = value.as_object_mut() {
                map.insert("program".into(), serde_json::Value::String(entry.name.clone()));
            }
            records.push(value);
        }
    }
    if let Some(path) = report {
        let mut text = String::new();
        for record in &records {
            text.push_str(&serde_json::to_string(record)?);
            text.push('\n');
        }
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    println!("{total} checks across {} programs, {failures} failures", entries.len());
    Ok(ExitCode::from(if failures == 0 { 0 } else { 1 }))
}
