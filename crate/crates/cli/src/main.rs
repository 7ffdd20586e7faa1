use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use skyfilter_api::AppState;
use skyfilter_core::bench::{self, ExperimentPlan};
use skyfilter_core::pipeline::{self, ElectreOverrides, SkylineStage, StageSettings};
use skyfilter_core::{load_catalog_with_schema, save_catalog, Catalog, CatalogFormat, Query, Schema, SelectionResult};

#[derive(Debug, Parser)]
#[command(name = "skyfilter", version, about = "Skyline + ELECTRE IS cloud-service selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FileFormat {
    Jsonl,
    Csv,
}

impl From<FileFormat> for CatalogFormat {
    fn from(f: FileFormat) -> Self {
        match f {
            FileFormat::Jsonl => CatalogFormat::Jsonl,
            FileFormat::Csv => CatalogFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic catalog.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Schema JSON replacing the built-in ten-dimension schema.
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Output format; inferred from the file extension when omitted.
        #[arg(long, value_enum)]
        format: Option<FileFormat>,
    },
    /// Run a full query (filter, skyline, ELECTRE IS).
    Query {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        query_file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Threshold table applied below the query's own overrides.
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
    /// Compute only the skyline stage.
    Skyline {
        #[arg(long)]
        catalog: PathBuf,
        /// Comma-separated dimension ids.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Fixed requirement `attribute=value`; repeatable.
        #[arg(long = "fixed", value_parser = parse_pair)]
        fixed: Vec<(String, String)>,
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Run ELECTRE IS on a skyline produced by `skyline`.
    Electre {
        #[arg(long)]
        skyline_file: PathBuf,
        #[arg(long)]
        settings: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the size-reduction experiment and write a CSV report.
    Bench {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-cell mean/std JSON; defaults to `<out>.summary.json`.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Serve the HTTP API over a catalog.
    Serve {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long, env = "SKYFILTER_PORT")]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
}

fn parse_pair(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
        .ok_or_else(|| format!("expected attribute=value, got `{s}`"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_schema(path: Option<&Path>) -> Result<Schema> {
    match path {
        Some(p) => Schema::from_path(p).with_context(|| format!("reading schema {}", p.display())),
        None => Ok(Schema::default()),
    }
}

fn load(path: &Path, schema: Option<&Path>) -> Result<Catalog> {
    let schema = load_schema(schema)?;
    load_catalog_with_schema(path, CatalogFormat::from_path(path), schema)
        .with_context(|| format!("loading catalog {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate {
            n,
            seed,
            out,
            schema,
            format,
        } => {
            if n == 0 {
                bail!("--n must be positive");
            }
            let schema = load_schema(schema.as_deref())?;
            let catalog = skyfilter_core::generate_synthetic(n, &schema, seed)?;
            let format = format.map_or_else(|| CatalogFormat::from_path(&out), Into::into);
            save_catalog(&catalog, &out, format).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Query {
            catalog,
            query_file,
            out,
            format,
            schema,
            thresholds,
        } => {
            let catalog = load(&catalog, schema.as_deref())?;
            let query: Query = read_json(&query_file)?;
            let table = thresholds.as_deref().map(ElectreOverrides::from_path).transpose()?;
            let result = pipeline::run_query_with(&catalog, &query, table.as_ref())?;
            let text = match format {
                OutputFormat::Json => result.to_json(),
                OutputFormat::Table => render_table(&result, &query),
            };
            write_text(&out, &text)?;
        }
        Command::Skyline {
            catalog,
            dims,
            out,
            fixed,
            schema,
        } => {
            let catalog = load(&catalog, schema.as_deref())?;
            let fixed: BTreeMap<String, String> = fixed.into_iter().collect();
            let stage = pipeline::run_skyline_stage(&catalog, &fixed, &dims)?;
            write_json(&out, &stage)?;
        }
        Command::Electre {
            skyline_file,
            settings,
            out,
        } => {
            let stage: SkylineStage = read_json(&skyline_file)?;
            let settings: StageSettings = read_json(&settings)?;
            let result = pipeline::run_electre_stage(&stage, &settings)?;
            write_json(&out, &result)?;
        }
        Command::Bench {
            plan,
            out,
            summary,
            schema,
        } => {
            let schema = load_schema(schema.as_deref())?;
            let plan = ExperimentPlan::from_path(&plan).with_context(|| format!("reading plan {}", plan.display()))?;
            let report = bench::run_experiment_with_schema(&plan, &schema)?;
            bench::emit_report(&report, &out).with_context(|| format!("writing {}", out.display()))?;
            let summary = summary.unwrap_or_else(|| {
                let mut s = out.clone().into_os_string();
                s.push(".summary.json");
                s.into()
            });
            bench::emit_summary(&report, &summary).with_context(|| format!("writing {}", summary.display()))?;
        }
        Command::Serve {
            catalog,
            port,
            host,
            schema,
            thresholds,
        } => {
            let catalog = load(&catalog, schema.as_deref())?;
            let thresholds = thresholds.as_deref().map(ElectreOverrides::from_path).transpose()?;
            let state = Arc::new(AppState { catalog, thresholds });
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = skyfilter_api::bind(SocketAddr::new(host, port)).await?;
                println!("listening on http://{}", listener.local_addr()?);
                std::io::stdout().flush()?;
                skyfilter_api::serve(listener, state).await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(())
}

fn render_table(result: &SelectionResult, query: &Query) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "filtered  skyline  final");
    let _ = writeln!(
        s,
        "{:>8}  {:>7}  {:>5}",
        result.filtered_count, result.skyline_count, result.final_count
    );
    let _ = writeln!(s);
    let dims: Vec<&str> = query.optimize.iter().map(|o| o.dim.as_str()).collect();
    let id_width = result.final_set.iter().map(|x| x.id.len()).max().unwrap_or(2).max(2);
    let _ = write!(s, "{:<id_width$}", "id");
    for d in &dims {
        let _ = write!(s, "  {d:>14}");
    }
    let _ = writeln!(s);
    for svc in &result.final_set {
        let _ = write!(s, "{:<id_width$}", svc.id);
        for d in &dims {
            let _ = write!(s, "  {:>14.4}", svc.dims.get(*d).copied().unwrap_or(f64::NAN));
        }
        let _ = writeln!(s);
    }
    s
}
