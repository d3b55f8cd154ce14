//! `smm`: validate, evaluate, plan and compare maturity assessments.
//!
//! Exit status is 0 on success, 1 when an input has errors and 2 on a usage
//! error. Results go to stdout; diagnostics go to stderr as
//! `file:line:col: severity[CODE]: message`.

use std::fs;
use std::io::IsTerminal;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use smm_core::diagnostic::has_errors;
use smm_core::planner::{PlanOptions, DEFAULT_EXHAUSTIVE_THRESHOLD};
use smm_core::report::{self, render_json, render_text};
use smm_core::scoring::EvaluationError;
use smm_core::text::{parse_assessment_source, parse_model_source, SourceMap};
use smm_core::{
    evaluate, validate_assessment, validate_model, Assessment, Diagnostic, EvaluationResult,
    MaturityLevel, MaturityModel, Method, PlanMethod,
};

#[derive(Debug, Parser)]
#[command(name = "smm", version, about = "Software maturity model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model, and optionally an assessment against it.
    Validate {
        model: PathBuf,
        assessment: Option<PathBuf>,
    },
    /// Score an assessment.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        assessment: PathBuf,
        #[arg(long, default_value = "both", value_parser = parse_method)]
        method: Method,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Cheapest score increments that lift one KPA to a target level.
    Plan {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        assessment: PathBuf,
        #[arg(long)]
        kpa: String,
        #[arg(long, value_parser = parse_level)]
        target: MaturityLevel,
        #[arg(long, default_value = "compensatory", value_parser = parse_plan_method)]
        method: PlanMethod,
        /// Stop searching after this many milliseconds and return the best
        /// plan found so far.
        #[arg(long)]
        deadline_ms: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_THRESHOLD)]
        exhaustive_threshold: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Compare two assessments of the same model.
    Diff {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        before: PathBuf,
        #[arg(long)]
        after: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "SMM_STORE_ROOT")]
        store: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_THRESHOLD)]
        exhaustive_threshold: usize,
        #[arg(long, default_value_t = smm_service::DEFAULT_BODY_LIMIT)]
        body_limit: usize,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn parse_plan_method(s: &str) -> Result<PlanMethod, String> {
    s.parse()
}

fn parse_level(s: &str) -> Result<MaturityLevel, String> {
    s.parse()
}

/// Failure after the diagnostics have already been printed.
#[derive(Debug)]
struct Reported;

impl std::fmt::Display for Reported {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("input has errors")
    }
}

impl std::error::Error for Reported {}

struct Source<T> {
    value: T,
    map: SourceMap,
    file: String,
}

fn emit(diagnostics: &[Diagnostic], fallback_file: &str) {
    for d in diagnostics {
        if d.location.is_some() {
            eprintln!("{d}");
        } else {
            eprintln!("{fallback_file}: {d}");
        }
    }
}

fn read(path: &Path) -> anyhow::Result<(String, String)> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok((text, path.display().to_string()))
}

fn load_model(path: &Path) -> anyhow::Result<Source<MaturityModel>> {
    let (text, file) = read(path)?;
    match parse_model_source(&text, &file) {
        Ok((value, map)) => Ok(Source { value, map, file }),
        Err(d) => {
            emit(&d, &file);
            Err(Reported.into())
        }
    }
}

fn load_assessment(path: &Path) -> anyhow::Result<Source<Assessment>> {
    let (text, file) = read(path)?;
    match parse_assessment_source(&text, &file) {
        Ok((value, map)) => Ok(Source { value, map, file }),
        Err(d) => {
            emit(&d, &file);
            Err(Reported.into())
        }
    }
}

/// Locates assessment findings in the assessment file first, then in the
/// model file.
fn locate(mut diagnostics: Vec<Diagnostic>, model: &Source<MaturityModel>, a: &Source<Assessment>) -> Vec<Diagnostic> {
    a.map.attach(&mut diagnostics);
    model.map.attach(&mut diagnostics);
    diagnostics
}

fn evaluated(model: &Source<MaturityModel>, a: &Source<Assessment>) -> anyhow::Result<EvaluationResult> {
    match evaluate(&model.value, &a.value) {
        Ok(result) => {
            emit(&locate(result.diagnostics.clone(), model, a), &a.file);
            Ok(result)
        }
        Err(EvaluationError::Invalid(d)) => {
            emit(&locate(d, model, a), &a.file);
            Err(Reported.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn validate(model_path: &Path, assessment_path: Option<&Path>) -> anyhow::Result<()> {
    let model = load_model(model_path)?;
    let mut diagnostics = validate_model(&model.value);
    model.map.attach(&mut diagnostics);
    emit(&diagnostics, &model.file);
    let mut failed = has_errors(&diagnostics);
    if !failed {
        println!(
            "{}: ok ({} parameters, {} KPAs)",
            model.file,
            model.value.parameters.len(),
            model.value.kpas.len()
        );
    }
    if let Some(path) = assessment_path {
        let a = load_assessment(path)?;
        let d = locate(validate_assessment(&a.value, &model.value), &model, &a);
        emit(&d, &a.file);
        if has_errors(&d) {
            failed = true;
        } else {
            println!("{}: ok ({} scores)", a.file, a.value.scores.len());
        }
    }
    if failed {
        Err(Reported.into())
    } else {
        Ok(())
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Validate { model, assessment } => validate(&model, assessment.as_deref()),
        Command::Evaluate {
            model,
            assessment,
            method,
            format,
        } => {
            let model = load_model(&model)?;
            let a = load_assessment(&assessment)?;
            let result = evaluated(&model, &a)?.for_method(method);
            match format {
                Format::Text => print!("{}", render_text(&result)),
                Format::Json => print!("{}", render_json(&result)),
            }
            Ok(())
        }
        Command::Plan {
            model,
            assessment,
            kpa,
            target,
            method,
            deadline_ms,
            exhaustive_threshold,
            format,
        } => {
            let model = load_model(&model)?;
            let a = load_assessment(&assessment)?;
            evaluated(&model, &a)?;
            let options = PlanOptions {
                exhaustive_threshold,
                deadline: deadline_ms.map(|ms| Instant::now() + Duration::from_millis(ms)),
            };
            let plan = smm_core::plan(&model.value, &a.value, &kpa, method, target, &options)
                .with_context(|| format!("cannot plan for {kpa}"))?;
            match format {
                Format::Text => print!("{}", report::render_plan_text(&plan)),
                Format::Json => print_json(&plan)?,
            }
            Ok(())
        }
        Command::Diff {
            model,
            before,
            after,
            format,
        } => {
            let model = load_model(&model)?;
            let before = load_assessment(&before)?;
            let after = load_assessment(&after)?;
            let earlier = evaluated(&model, &before)?;
            let later = evaluated(&model, &after)?;
            let comparison = report::diff(&earlier, &later)?;
            match format {
                Format::Text => print!("{}", report::render_diff_text(&comparison)),
                Format::Json => print_json(&comparison)?,
            }
            Ok(())
        }
        Command::Serve {
            store,
            port,
            bind,
            exhaustive_threshold,
            body_limit,
        } => {
            tracing_subscriber::fmt()
                .with_writer(std::io::stderr)
                .with_ansi(std::io::stderr().is_terminal())
                .init();
            let mut config = smm_service::ServiceConfig::new(store);
            config.bind = SocketAddr::new(bind, port);
            config.exhaustive_threshold = exhaustive_threshold;
            config.body_limit = body_limit;
            tokio::runtime::Runtime::new()?.block_on(smm_service::serve(config))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Reported>() => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
