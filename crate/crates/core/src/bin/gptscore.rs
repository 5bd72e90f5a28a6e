use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gptscore::backend::{BackendConfig, BackendKind};
use gptscore::cli::{self, MetaevalArgs, Metric, RunConfig, SignificanceArgs, TestOptions};
use gptscore::{CorrelationKind, Direction, Error, Result, Setting, Strategy, Task};

#[derive(Parser)]
#[command(
    name = "gptscore",
    version,
    about = "Score generated text with LM log-probabilities and meta-evaluate metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every output of a dataset and write JSON-Lines records.
    Score(RunArgs),
    /// Correlate score records with human judgments.
    Metaeval {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        task: Task,
        #[arg(long, default_value = "spearman")]
        kind: CorrelationKind,
        #[arg(long)]
        strategy: Option<Strategy>,
        /// Label for the model column.
        #[arg(long, default_value = "")]
        model: String,
        /// Report JSON destination; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
        /// CSV file the rows are appended to.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Meta-evaluate the first aspect for a grid of demonstration counts.
    AblateDemos {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',')]
        k_grid: Option<Vec<usize>>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evaluate an aspect with other aspect definitions merged in.
    ComposeAspects {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        target: String,
        #[arg(long, value_delimiter = ',')]
        extras: Vec<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// CSV destination for the aspect-order table.
        #[arg(long)]
        order_csv: Option<PathBuf>,
    },
    /// Paired bootstrap test of metric A against metric B.
    Significance {
        #[arg(long)]
        scores_a: PathBuf,
        #[arg(long)]
        scores_b: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        task: Task,
        #[arg(long)]
        aspect: Option<String>,
        #[arg(long, default_value = "spearman")]
        kind: CorrelationKind,
        #[arg(long)]
        strategy: Option<Strategy>,
        #[arg(long, default_value_t = 1000)]
        resamples: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "")]
        model: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render Markdown tables from metaeval CSV rows and significance results.
    Report {
        #[arg(long = "csv", required = true)]
        csvs: Vec<PathBuf>,
        #[arg(long = "significance")]
        significance: Vec<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Inspect or empty a response cache directory.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    Stats { dir: PathBuf },
    Clear { dir: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// JSON run config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    task: Option<Task>,
    #[arg(long = "aspect", value_delimiter = ',')]
    aspects: Vec<String>,
    #[arg(long)]
    direction: Option<Direction>,
    #[arg(long)]
    setting: Option<Setting>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    subsample: Option<usize>,
    #[arg(long)]
    metric: Option<Metric>,
    #[arg(long)]
    kind: Option<CorrelationKind>,
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long)]
    backend: Option<BackendKind>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    max_parallel: Option<usize>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    fixture: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => {
                let missing =
                    |what: &str| Error::Usage(format!("--{what} is required without --config"));
                let kind = self.backend.unwrap_or(BackendKind::Fixture);
                RunConfig {
                    dataset: self.dataset.clone().ok_or_else(|| missing("dataset"))?,
                    task: self.task.ok_or_else(|| missing("task"))?,
                    aspects: Vec::new(),
                    direction: None,
                    setting: Setting::Ist,
                    k: 0,
                    seed: 0,
                    backend: BackendConfig::new(kind, self.model.clone().unwrap_or_default()),
                    output: None,
                    subsample: None,
                    metric: Metric::Gptscore,
                    kind: CorrelationKind::Spearman,
                    strategy: None,
                    templates: None,
                    aspect_registry: None,
                }
            }
        };
        if let Some(v) = self.dataset {
            cfg.dataset = v;
        }
        if let Some(v) = self.task {
            cfg.task = v;
        }
        if !self.aspects.is_empty() {
            cfg.aspects = self.aspects;
        }
        if let Some(v) = self.direction {
            cfg.direction = Some(v);
        }
        if let Some(v) = self.setting {
            cfg.setting = v;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.output {
            cfg.output = Some(v);
        }
        if let Some(v) = self.subsample {
            cfg.subsample = Some(v);
        }
        if let Some(v) = self.metric {
            cfg.metric = v;
        }
        if let Some(v) = self.kind {
            cfg.kind = v;
        }
        if let Some(v) = self.strategy {
            cfg.strategy = Some(v);
        }
        if let Some(v) = self.templates {
            cfg.templates = Some(v);
        }
        let b = &mut cfg.backend;
        if let Some(v) = self.backend {
            b.kind = v;
        }
        if let Some(v) = self.model {
            b.model_id = v;
        }
        if let Some(v) = self.endpoint {
            b.endpoint_url = Some(v);
        }
        if let Some(v) = self.max_parallel {
            b.max_parallel = v;
        }
        if let Some(v) = self.cache_dir {
            b.cache_dir = Some(v);
        }
        if let Some(v) = self.fixture {
            b.fixture_path = Some(v);
        }
        if let Some(v) = self.corpus {
            b.corpus_path = Some(v);
        }
        Ok(cfg)
    }
}

fn emit(text: &str, path: Option<&PathBuf>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn write_csv<T: serde::Serialize>(rows: &[T], path: Option<&PathBuf>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    emit(
        &String::from_utf8(bytes).expect("csv output is utf-8"),
        path,
    )
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Score(args) => {
            let (_, summary) = cli::cmd_score(&args.into_config()?)?;
            eprintln!("{summary}");
        }
        Command::Metaeval {
            scores,
            dataset,
            task,
            kind,
            strategy,
            model,
            output,
            csv,
        } => {
            let entries = cli::cmd_metaeval(&MetaevalArgs {
                scores,
                dataset,
                task,
                kind,
                strategy,
                model,
            })?;
            let json = serde_json::to_string_pretty(&entries)?;
            emit(&(json + "\n"), output.as_ref())?;
            if let Some(p) = csv {
                let rows: Vec<_> = entries.iter().map(|e| e.row()).collect();
                cli::write_rows(p, &rows, true)?;
            }
        }
        Command::AblateDemos { run, k_grid, csv } => {
            let grid = k_grid.unwrap_or_else(|| cli::DEFAULT_K_GRID.to_vec());
            let rows = cli::cmd_ablate_demos(&run.into_config()?, &grid)?;
            write_csv(&rows, csv.as_ref())?;
        }
        Command::ComposeAspects {
            run,
            target,
            extras,
            csv,
            order_csv,
        } => {
            let (rows, order) = cli::cmd_compose_aspects(&run.into_config()?, &target, &extras)?;
            write_csv(&rows, csv.as_ref())?;
            if order_csv.is_some() {
                write_csv(&order, order_csv.as_ref())?;
            }
        }
        Command::Significance {
            scores_a,
            scores_b,
            dataset,
            task,
            aspect,
            kind,
            strategy,
            resamples,
            alpha,
            seed,
            model,
            output,
        } => {
            let out = cli::cmd_significance(&SignificanceArgs {
                scores_a,
                scores_b,
                dataset,
                task,
                options: TestOptions {
                    aspect,
                    kind,
                    strategy,
                    resamples,
                    alpha,
                    seed,
                    model,
                },
            })?;
            emit(
                &(serde_json::to_string_pretty(&out)? + "\n"),
                output.as_ref(),
            )?;
        }
        Command::Report {
            csvs,
            significance,
            output,
        } => {
            let md = cli::cmd_report(&csvs, &significance)?;
            emit(&md, output.as_ref())?;
        }
        Command::Cache { action } => match action {
            CacheAction::Stats { dir } => {
                let s = cli::cmd_cache_stats(&dir)?;
                println!("entries: {}, bytes: {}", s.entries, s.bytes);
            }
            CacheAction::Clear { dir } => {
                let n = cli::cmd_cache_clear(&dir)?;
                println!("removed {n} entries");
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
