use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dismetrics::analysis::{compare, correlate_metrics, entangled_population, Labelled, Representation};
use dismetrics::estimators::{BinStrategy, BinningSpec, ImportanceMethod};
use dismetrics::io::write_atomic;
use dismetrics::metrics::{evaluate_all, EvalConfig, EvalInput, NEEDS_DATASET, NEEDS_ORACLE};
use dismetrics::reproduce::{self, CaseRow, ParametricScores};
use dismetrics::rng::DEFAULT_SEED;
use dismetrics::synth::{oracle_by_name, GeneratorSpec};
use dismetrics::{load_dataset, save_dataset, InformativenessMatrix, Metric, MetricReport, Schema};

mod output;

#[derive(Parser, Debug)]
#[command(name = "dismetrics", version, about = "Disentanglement metrics on factor/latent data")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Bin count for mutual-information estimates
    #[arg(long, global = true, default_value_t = 20)]
    bins: usize,

    /// quantile or equal-width
    #[arg(long, global = true, default_value = "quantile")]
    bin_strategy: BinStrategy,

    /// Feature-importance regressor for DCI: forest or lasso
    #[arg(long, global = true, default_value = "forest")]
    importance_method: String,

    /// Output format (each subcommand has its own default)
    #[arg(long, global = true)]
    format: Option<Format>,

    /// Write the main output here instead of stdout
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate metrics on a dataset, a matrix file or a built-in oracle
    Eval(EvalArgs),
    /// Generate a synthetic dataset plus a metadata sidecar
    Gen {
        /// Generator spec, e.g. entangled:level=0.5,K=5,n=10000
        #[arg(long)]
        spec: String,
    },
    /// Rerun a published counterexample and compare with its expected value
    Reproduce {
        /// Case name or "all"
        case: String,
    },
    /// Score the two-parameter matrix over a grid of (eps, eps1)
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
        eps1: Vec<f64>,
    },
    /// Spearman correlation between metrics over a population of representations
    Correlate(CorrelateArgs),
    /// Which of two representations each metric prefers
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        metrics: Option<String>,
        #[arg(long)]
        schema: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["dataset", "oracle", "matrix"])))]
struct EvalArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Built-in oracle name
    #[arg(long)]
    oracle: Option<String>,
    /// `.matrix` file with a precomputed informativeness matrix
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Column-role sidecar for the dataset
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Comma-separated metrics; default is everything the input supports
    #[arg(long)]
    metrics: Option<String>,
    #[arg(long)]
    train_points: Option<usize>,
    #[arg(long)]
    eval_points: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    reference_points: Option<usize>,
    /// Rows drawn from an oracle for the dataset metrics
    #[arg(long)]
    oracle_samples: Option<usize>,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["family", "datasets"])))]
struct CorrelateArgs {
    /// Generated population family (only "entangled")
    #[arg(long)]
    family: Option<String>,
    /// Dataset files forming the population
    #[arg(long, num_args = 1..)]
    datasets: Vec<PathBuf>,
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// Factors per generated representation
    #[arg(long, default_value_t = 5)]
    factors: usize,
    /// Rows per generated representation
    #[arg(long, default_value_t = 10_000)]
    rows: usize,
    #[arg(long)]
    metrics: Option<String>,
    /// Where to write the raw population scores as JSON
    #[arg(long)]
    population: Option<PathBuf>,
}

fn eval_config(global: &GlobalArgs) -> Result<EvalConfig> {
    let mut cfg = EvalConfig::default().with_seed(global.seed);
    cfg.binning = BinningSpec::new(global.bin_strategy, global.bins)?;
    cfg.importance = ImportanceMethod::parse(&global.importance_method)?;
    Ok(cfg)
}

fn emit(global: &GlobalArgs, text: &str) -> Result<()> {
    match &global.out {
        Some(path) => write_atomic(path, text.as_bytes())
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn is_matrix_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "matrix")
}

fn load_representation(path: &Path, schema: Option<&Schema>) -> Result<Labelled> {
    let label = path.display().to_string();
    let representation = if is_matrix_path(path) {
        Representation::Matrix(InformativenessMatrix::load(path)?)
    } else {
        Representation::Dataset(load_dataset(path, schema)?)
    };
    Ok(Labelled::new(label, representation))
}

fn load_schema(path: &Option<PathBuf>) -> Result<Option<Schema>> {
    path.as_deref().map(Schema::from_path).transpose().map_err(Into::into)
}

fn cmd_eval(global: &GlobalArgs, args: &EvalArgs) -> Result<()> {
    let mut cfg = eval_config(global)?;
    let iv = &mut cfg.intervention;
    iv.train_points = args.train_points.unwrap_or(iv.train_points);
    iv.eval_points = args.eval_points.unwrap_or(iv.eval_points);
    iv.batch_size = args.batch_size.unwrap_or(iv.batch_size);
    iv.reference_points = args.reference_points.unwrap_or(iv.reference_points);
    cfg.oracle_samples = args.oracle_samples.unwrap_or(cfg.oracle_samples);

    let schema = load_schema(&args.schema)?;
    let dataset;
    let oracle;
    let matrix;
    let input = if let Some(path) = &args.dataset {
        dataset = load_dataset(path, schema.as_ref())?;
        EvalInput::Dataset(&dataset)
    } else if let Some(name) = &args.oracle {
        oracle = oracle_by_name(name)?;
        EvalInput::Oracle(&oracle)
    } else {
        let path = args.matrix.as_ref().expect("clap enforces one input");
        matrix = InformativenessMatrix::load(path)?;
        EvalInput::Matrix(&matrix)
    };

    let computable = input.computable();
    let metrics = match &args.metrics {
        Some(list) => {
            let selected = Metric::parse_list(list)?;
            for m in &selected {
                if !computable.contains(m) {
                    let reason = if m.needs_oracle() { NEEDS_ORACLE } else { NEEDS_DATASET };
                    bail!("{m}: {reason}");
                }
            }
            selected
        }
        None => computable,
    };
    let reports = evaluate_all(input, &metrics, &cfg)?;
    if args.metrics.is_some() {
        if let Some(r) = reports.iter().find(|r| r.skipped) {
            bail!(
                "{}: not computable: {}",
                r.metric,
                r.skip_reason.as_deref().unwrap_or("skipped")
            );
        }
    }
    for r in reports.iter().filter(|r| r.skipped) {
        eprintln!("warning: {} skipped: {}", r.metric, r.skip_reason.as_deref().unwrap_or(""));
    }
    emit(global, &render_reports(&reports, global.format.unwrap_or(Format::Json))?)
}

fn render_reports(reports: &[MetricReport], format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(reports)? + "\n",
        Format::Csv => output::reports_csv(reports),
        Format::Table => output::reports_table(reports),
    })
}

fn cmd_gen(global: &GlobalArgs, spec: &str) -> Result<()> {
    let Some(out) = &global.out else {
        bail!("gen needs --out for the dataset file");
    };
    let generated = GeneratorSpec::parse(spec)?.generate(global.seed)?;
    let mut metadata = generated.metadata;
    metadata["spec"] = serde_json::Value::String(spec.to_string());
    save_dataset(&generated.dataset, out)?;
    let sidecar = metadata_path(out);
    write_atomic(&sidecar, (serde_json::to_string_pretty(&metadata)? + "\n").as_bytes())?;
    eprintln!("wrote {} and {}", out.display(), sidecar.display());
    Ok(())
}

fn metadata_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn cmd_reproduce(global: &GlobalArgs, case: &str) -> Result<ExitCode> {
    let rows = reproduce::run(case)?;
    let text = match global.format.unwrap_or(Format::Table) {
        Format::Table => reproduce::render_table(&rows),
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv => output::case_rows_csv(&rows),
    };
    emit(global, &text)?;
    let failed: Vec<&CaseRow> = rows.iter().filter(|r| !r.pass).collect();
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} of {} checks failed", failed.len(), rows.len());
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_sweep(global: &GlobalArgs, eps: &[f64], eps1: &[f64]) -> Result<()> {
    let rows: Vec<ParametricScores> = reproduce::parametric_sweep(eps, eps1)?;
    let text = match global.format.unwrap_or(Format::Csv) {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        _ => output::sweep_csv(&rows),
    };
    emit(global, &text)
}

fn selected_or(list: &Option<String>, default: &[Metric]) -> Result<Vec<Metric>> {
    Ok(match list {
        Some(s) => Metric::parse_list(s)?,
        None => default.to_vec(),
    })
}

fn cmd_correlate(global: &GlobalArgs, args: &CorrelateArgs) -> Result<()> {
    let cfg = eval_config(global)?;
    let population = match &args.family {
        Some(f) if f == "entangled" => {
            entangled_population(args.count, args.factors, args.rows, global.seed)?
        }
        Some(f) => bail!("unknown family {f:?} (available: entangled)"),
        None => args
            .datasets
            .iter()
            .map(|p| load_representation(p, None))
            .collect::<Result<_>>()?,
    };
    let metrics = selected_or(&args.metrics, &Metric::DATASET)?;
    let result = correlate_metrics(&population, &metrics, &cfg)?;
    for d in &result.population.dropped {
        eprintln!("warning: dropped {} ({}: {})", d.metric, d.representation, d.reason);
    }
    let text = match global.format.unwrap_or(Format::Csv) {
        Format::Json => serde_json::to_string_pretty(&result)? + "\n",
        _ => result.to_csv(),
    };
    emit(global, &text)?;
    if let Some(path) = &args.population {
        let json = serde_json::to_string_pretty(&result.population)? + "\n";
        write_atomic(path, json.as_bytes())?;
    }
    Ok(())
}

fn cmd_compare(
    global: &GlobalArgs,
    a: &Path,
    b: &Path,
    metrics: &Option<String>,
    schema: &Option<PathBuf>,
) -> Result<()> {
    let cfg = eval_config(global)?;
    let schema = load_schema(schema)?;
    let ra = load_representation(a, schema.as_ref())?;
    let rb = load_representation(b, schema.as_ref())?;
    let metrics = selected_or(metrics, &[Metric::Mig, Metric::ThreeCharm, Metric::Dci])?;
    let report = compare(&ra, &rb, &metrics, &cfg)?;
    emit(global, &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let g = &cli.global;
    match &cli.command {
        Command::Eval(args) => cmd_eval(g, args)?,
        Command::Gen { spec } => cmd_gen(g, spec)?,
        Command::Reproduce { case } => return cmd_reproduce(g, case),
        Command::Sweep { eps, eps1 } => cmd_sweep(g, eps, eps1)?,
        Command::Correlate(args) => cmd_correlate(g, args)?,
        Command::Compare {
            a,
            b,
            metrics,
            schema,
        } => cmd_compare(g, a, b, metrics, schema)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
