//! `cpcboard` command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use cpcboard_core::query::{run_query, QueryParams, QUERY_NAMES};
use cpcboard_core::runlog::read_run_log;
use cpcboard_core::search::run_id_for;
use cpcboard_core::{
    count_structures, export_svg, parse_expansion, parse_space, run_search, RunHeader,
    RunLogWriter, RunSnapshot, SearchConfig, SearchSpace, SpaceError,
};

use crate::registry::Registry;

#[derive(Debug, Parser)]
#[command(
    name = "cpcboard",
    version,
    about = "Pipeline search runs, queries and CPC rendering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a seeded search and write its JSONL log.
    Run(RunArgs),
    /// Serve the HTTP API over a data directory of run logs.
    Serve(ServeArgs),
    /// Answer a named query against a run log.
    Query(QueryArgs),
    /// Render a run log to SVG.
    Render(RenderArgs),
    /// Check a search space file.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Space file; the bundled default space when omitted.
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 12)]
    pub n_structure: usize,
    #[arg(long, default_value_t = 12)]
    pub n_refine: usize,
    #[arg(long, default_value_t = 3)]
    pub top_k: usize,
    #[arg(long, default_value_t = 0.2)]
    pub step_scale: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Candidates written per second; unpaced when omitted.
    #[arg(long)]
    pub pace: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "CPCBOARD_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "CPCBOARD_DATA_DIR", default_value = "data")]
    pub data: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: std::net::IpAddr,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// One of count_pipelines, count_steps, distinct_components, metric_of,
    /// best_estimator, constrained, frequency, hp_count, influence, spread,
    /// leaderboard.
    pub name: String,
    #[arg(long)]
    pub log: PathBuf,
    /// Query parameters as `key=value`, e.g. `slot="Transformer 1"`.
    #[arg(value_parser = parse_param)]
    pub params: Vec<(String, String)>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub log: PathBuf,
    /// `slot:component(,slot:component)*`
    #[arg(long, default_value = "")]
    pub expanded: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1200)]
    pub width: u32,
    #[arg(long, default_value_t = 600)]
    pub height: u32,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub space: PathBuf,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .ok_or_else(|| format!("expected key=value, got `{s}`"))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(CliError::io(path))
}

fn space_error(path: &Path, e: SpaceError) -> CliError {
    match e {
        SpaceError::Validation(violations) => {
            let lines: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
            CliError::Invalid(format!(
                "{}: invalid space\n{}",
                path.display(),
                lines.join("\n")
            ))
        }
        other => CliError::Invalid(format!("{}: {other}", path.display())),
    }
}

pub fn load_space(path: Option<&Path>) -> Result<SearchSpace, CliError> {
    match path {
        None => Ok(SearchSpace::bundled_default()),
        Some(p) => parse_space(&read(p)?).map_err(|e| space_error(p, e)),
    }
}

pub fn load_log(path: &Path) -> Result<RunSnapshot, CliError> {
    read_run_log(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn run(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let space = load_space(args.space.as_deref())?;
    let config = SearchConfig {
        seed: args.seed,
        n_structure: args.n_structure,
        n_refine: args.n_refine,
        top_k: args.top_k,
        step_scale: args.step_scale,
    };
    config
        .validate()
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    if let Some(rate) = args.pace {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(CliError::Invalid(format!(
                "--pace must be positive, got {rate}"
            )));
        }
    }
    let snapshot =
        run_search(&space, &config, |_| {}).map_err(|e| CliError::Invalid(e.to_string()))?;
    let run_id = run_id_for(&space, &config);
    let file = File::create(&args.out).map_err(CliError::io(&args.out))?;
    let header = RunHeader::new(&run_id, &space, &config);
    let mut writer =
        RunLogWriter::new(BufWriter::new(file), &header).map_err(CliError::io(&args.out))?;
    let gap = args.pace.map(|r| Duration::from_secs_f64(1.0 / r));
    for (i, c) in snapshot.candidates.iter().enumerate() {
        if let (Some(gap), true) = (gap, i > 0) {
            std::thread::sleep(gap);
        }
        writer.append(c).map_err(CliError::io(&args.out))?;
    }
    let _ = writeln!(
        out,
        "{run_id}: {} candidates written to {}",
        writer.written(),
        args.out.display()
    );
    Ok(())
}

fn query(args: &QueryArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !QUERY_NAMES.contains(&args.name.as_str()) {
        return Err(CliError::Invalid(format!(
            "unknown query `{}`; expected one of {}",
            args.name,
            QUERY_NAMES.join(", ")
        )));
    }
    let snapshot = load_log(&args.log)?;
    let params: QueryParams = args.params.iter().cloned().collect();
    let result =
        run_query(&snapshot, &args.name, &params).map_err(|e| CliError::Invalid(e.to_string()))?;
    let _ = writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&result).expect("json value")
    );
    Ok(())
}

fn render(args: &RenderArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let snapshot = load_log(&args.log)?;
    let expansion =
        parse_expansion(&args.expanded).map_err(|e| CliError::Invalid(e.to_string()))?;
    let svg = export_svg(&snapshot, &expansion, args.width, args.height)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    std::fs::write(&args.out, svg).map_err(CliError::io(&args.out))?;
    let _ = writeln!(out, "wrote {}", args.out.display());
    Ok(())
}

fn validate(args: &ValidateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let space = load_space(Some(&args.space))?;
    let _ = writeln!(
        out,
        "ok: {} slots, {} structures",
        space.slots.len(),
        count_structures(&space)
    );
    Ok(())
}

async fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let registry = Registry::new(&args.data).map_err(|e| CliError::Invalid(e.to_string()))?;
    let (loaded, skipped) = registry.load_existing().map_err(CliError::io(&args.data))?;
    for (path, reason) in &skipped {
        tracing::warn!(path = %path.display(), reason, "skipped run log");
    }
    tracing::info!(runs = loaded.len(), data = %args.data.display(), "loaded run logs");
    let addr = SocketAddr::new(args.bind, args.port);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| CliError::Io {
            path: PathBuf::from(addr.to_string()),
            source,
        })?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, crate::api::router(registry))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|source| CliError::Io {
            path: PathBuf::from(addr.to_string()),
            source,
        })
}

/// Runs one command, writing its report to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(a) => run(a, out),
        Command::Query(a) => query(a, out),
        Command::Render(a) => render(a, out),
        Command::Validate(a) => validate(a, out),
        Command::Serve(a) => tokio::runtime::Runtime::new()
            .map_err(|source| CliError::Io {
                path: PathBuf::from("tokio runtime"),
                source,
            })?
            .block_on(serve(a)),
    }
}

pub fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(io::stderr)
        .init();
    let cli = Cli::parse();
    match execute(&cli, &mut io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
