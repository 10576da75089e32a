use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dslgen::dsl::{parse_named, print};
use dslgen::eval::{self, ExportFormat, OutputIndex, SortMode};
use dslgen::llm::{backend_for, BackendConfig};
use dslgen::pipeline::{load_runs, Pipeline, PipelineConfig, RunLog, StdinReview};
use dslgen::rating::{serve, ServeConfig};
use dslgen::validate::validate;

#[derive(Parser)]
#[command(name = "dslgen", version, about = "Generate, validate and evaluate entity-modeling DSL documents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a data model for one scenario with the retry loop.
    Generate(GenerateArgs),
    /// Parse and validate a DSL file. Exit 0 valid, 1 invalid, 2 parse error.
    Validate {
        file: PathBuf,
        /// Print diagnostics as JSON lines.
        #[arg(long)]
        json: bool,
        /// Print the canonical form of a valid model.
        #[arg(long)]
        print: bool,
    },
    /// Batch evaluation over the registry and scenario corpus.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Run the rating service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[arg(long, default_value = "tasks.json")]
        tasks: PathBuf,
        #[arg(long, default_value = "ratings.jsonl")]
        ratings: PathBuf,
        /// Rater profiles; defaults to <ratings>.raters.jsonl.
        #[arg(long)]
        raters: Option<PathBuf>,
        /// Serve model ids in task details.
        #[arg(long)]
        no_blind: bool,
    },
}

#[derive(Args)]
struct BackendArgs {
    /// OpenAI-compatible base URL; falls back to LLM_BASE_URL.
    #[arg(long)]
    endpoint: Option<String>,
    /// Replay fixture (JSON map of model id to responses) instead of HTTP.
    #[arg(long, conflicts_with = "endpoint")]
    replay: Option<PathBuf>,
    /// Request timeout in seconds.
    #[arg(long, default_value_t = 120)]
    timeout: u64,
}

impl BackendArgs {
    fn config(&self) -> BackendConfig {
        let mut cfg = match &self.replay {
            Some(p) => BackendConfig::replay(p),
            None => {
                let mut c = BackendConfig::from_env();
                if let Some(url) = &self.endpoint {
                    c.base_url = Some(url.clone());
                }
                c
            }
        };
        cfg.timeout_s = self.timeout;
        cfg
    }
}

#[derive(Args)]
struct LoopArgs {
    #[arg(long, default_value_t = 3)]
    max_attempts: u32,
    #[arg(long, default_value_t = 0.8)]
    temp: f64,
    #[arg(long, default_value_t = 0.1)]
    retry_temp: f64,
}

impl LoopArgs {
    fn config(&self, review: bool) -> PipelineConfig {
        PipelineConfig {
            max_attempts: self.max_attempts,
            initial_temperature: self.temp,
            retry_temperature: self.retry_temp,
            review_gate: review,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario text, or a path to a file holding it.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    model: String,
    #[command(flatten)]
    looping: LoopArgs,
    #[command(flatten)]
    backend: BackendArgs,
    /// Pause for approval of the generated model.
    #[arg(long)]
    review: bool,
    /// Append attempts to this run log.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "adhoc")]
    scenario_id: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum SortArg {
    Total,
    Size,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Generate every (model, scenario) pair into a run log.
    Run {
        /// Defaults to the bundled 39-model registry.
        #[arg(long)]
        registry: Option<PathBuf>,
        /// Defaults to the bundled scenarios.
        #[arg(long)]
        scenarios: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        looping: LoopArgs,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
    /// Average ratings per model and export chart-ready rows.
    Aggregate {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        registry: Option<PathBuf>,
        /// Blinding key, for outputs not found in the run log.
        #[arg(long)]
        key: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Keep only models with at most this many billion parameters.
        #[arg(long)]
        max_params: Option<f64>,
        #[arg(long, value_enum, default_value = "total")]
        sort: SortArg,
    },
    /// Export VALID outputs as rating tasks.
    Tasks {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        scenarios: Option<PathBuf>,
        /// Replace model ids with anonymous labels and write a key file.
        #[arg(long)]
        blind: bool,
        /// Key file path; defaults to <out>.key.json.
        #[arg(long)]
        key: Option<PathBuf>,
    },
}

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Validate { file, json, print } => validate_file(&file, json, print),
        Command::Eval(cmd) => run_eval(cmd).map(|_| ExitCode::SUCCESS),
        Command::Serve {
            bind,
            tasks,
            ratings,
            raters,
            no_blind,
        } => serve(&ServeConfig {
            bind,
            tasks,
            ratings,
            raters,
            blind: !no_blind,
        })
        .map(|_| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(3)
    })
}

fn scenario_text(arg: &str) -> Result<String> {
    let p = Path::new(arg);
    if p.is_file() {
        Ok(std::fs::read_to_string(p)?)
    } else {
        Ok(arg.to_string())
    }
}

fn generate(args: GenerateArgs) -> Result<ExitCode> {
    let user_input = scenario_text(&args.scenario)?;
    let backend = backend_for(&args.backend.config())?;
    let log = args.out.as_ref().map(RunLog::open).transpose()?;
    let reviewer = StdinReview::new();
    let mut pipeline = Pipeline::new(args.looping.config(args.review), backend.as_ref());
    pipeline.log = log.as_ref();
    if args.review {
        pipeline.reviewer = Some(&reviewer);
    }
    let result = pipeline.run_two_stage(&args.scenario_id, &user_input, &args.model)?;
    let run = &result.data_run;
    for a in &run.attempts {
        eprintln!(
            "attempt {} (temperature {}): {}",
            a.attempt_no,
            a.temperature,
            if a.succeeded() { "valid".to_string() } else { format!("{} diagnostic(s)", a.diagnostics.len()) }
        );
        for d in &a.diagnostics {
            eprintln!("  {}", d.one_line());
        }
    }
    match &run.final_model {
        Some(model) if result.is_valid() => {
            print!("{}", print(model));
            Ok(ExitCode::SUCCESS)
        }
        _ => {
            eprintln!("run {}: no valid model", run.run_id);
            Ok(ExitCode::from(1))
        }
    }
}

fn validate_file(file: &Path, json: bool, show: bool) -> Result<ExitCode> {
    let source = std::fs::read_to_string(file)?;
    let name = file.display().to_string();
    let report = |diags: &[dslgen::dsl::Diagnostic]| -> Result<()> {
        let mut out = std::io::stdout().lock();
        for d in diags {
            if json {
                writeln!(out, "{}", serde_json::to_string(d)?)?;
            } else {
                writeln!(out, "{name}:{}", d.one_line())?;
            }
        }
        Ok(())
    };
    let model = match parse_named(&source, &name) {
        Ok(m) => m,
        Err(diags) => {
            report(&diags)?;
            return Ok(ExitCode::from(2));
        }
    };
    let result = validate(&model, None);
    report(&result.diagnostics)?;
    if !result.valid {
        return Ok(ExitCode::from(1));
    }
    if show {
        print!("{}", print(&model));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_eval(cmd: EvalCommand) -> Result<()> {
    match cmd {
        EvalCommand::Run {
            registry,
            scenarios,
            out,
            looping,
            backend,
            workers,
        } => {
            let registry = registry.map_or_else(|| Ok(eval::bundled_registry()), eval::load_registry)?;
            let scenarios = scenarios.map_or_else(|| Ok(eval::bundled_scenarios()), eval::load_scenarios)?;
            let backend = backend_for(&backend.config())?;
            let log = RunLog::open(&out)?;
            let cfg = looping.config(false);
            cfg.check()?;
            let report = eval::run_matrix(&registry, &scenarios, &cfg, backend.as_ref(), Some(&log), workers);
            for f in &report.failures {
                eprintln!("{} / {}: {}", f.model_id, f.scenario_id, f.error);
            }
            println!("{}", serde_json::to_string_pretty(&report.summary)?);
            eprintln!(
                "{} of {} models produced at least one valid output",
                report.summary.models_with_valid, report.summary.total_models
            );
        }
        EvalCommand::Aggregate {
            runs,
            ratings,
            registry,
            key,
            csv,
            json,
            max_params,
            sort,
        } => {
            let registry = registry.map_or_else(|| Ok(eval::bundled_registry()), eval::load_registry)?;
            let mut index = OutputIndex::from_runs(&load_runs(&runs)?);
            if let Some(k) = key {
                let from_key = OutputIndex::from_key(&eval::BlindingKey::load(k)?);
                index.output_to_model.extend(from_key.output_to_model);
            }
            let mut rows = eval::aggregate(&eval::load_ratings(&ratings)?, &registry, &index)?;
            if let Some(max) = max_params {
                rows = eval::filter_max_params(&rows, max);
            }
            eval::sort_rows(
                &mut rows,
                match sort {
                    SortArg::Total => SortMode::Total,
                    SortArg::Size => SortMode::Size,
                },
            );
            if let Some(p) = csv {
                eval::export_results(&rows, ExportFormat::Csv, p)?;
            }
            if let Some(p) = json {
                eval::export_results(&rows, ExportFormat::Json, p)?;
            }
            for r in &rows {
                println!("{:<28} {:>7.2}B  total {:>5.2}  (n={})", r.model_id, r.params_billions, r.total, r.n_ratings);
            }
        }
        EvalCommand::Tasks {
            runs,
            out,
            scenarios,
            blind,
            key,
        } => {
            let scenarios = scenarios.map_or_else(|| Ok(eval::bundled_scenarios()), eval::load_scenarios)?;
            let file = eval::export_rating_tasks(&load_runs(&runs)?, &scenarios, blind, &out, key.as_deref())?;
            eprintln!("{} task(s), {} output(s) written to {}", file.tasks.len(), file.total_outputs(), out.display());
        }
    }
    Ok(())
}
