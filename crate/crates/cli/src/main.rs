use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gridtask_core::benchmark::{self, max_dims, PredictionRecord};
use gridtask_core::generator::{sample_transformations, TaskGenerator};
use gridtask_core::io::{self, TaskRecord};
use gridtask_core::object::SizeRange;
use gridtask_core::render::{self, Format, DEFAULT_CELL_SIZE};
use gridtask_core::{
    build_experiment, generate_catalog, CatalogConfig, GenerationParams, Grid, ObjectCatalog, ObjectConstraints,
    Scale, SeededRng, Setting, Transformation, TransformationSequence,
};

#[derive(Parser)]
#[command(name = "gridtask", version, about = "Generate object-centric grid transformation tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Object catalog commands.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Generate tasks for one transformation sequence or a random pool.
    Gen(GenArgs),
    /// Benchmark dataset commands.
    Bench {
        #[command(subcommand)]
        action: BenchAction,
    },
    /// Render one record of a JSONL file.
    Render(RenderArgs),
    /// Grid accuracy of predictions against targets.
    Eval(EvalArgs),
    /// Timing presets.
    Stats(StatsArgs),
}

#[derive(Args)]
struct SeedArg {
    /// Master seed; falls back to COGITAO_SEED, then 0.
    #[arg(long, env = "COGITAO_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CatalogArg {
    /// Catalog file; the default catalog is built in memory when absent.
    #[arg(long)]
    catalog: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CatalogAction {
    /// Generate a catalog file.
    Build {
        #[arg(long, default_value_t = 15)]
        max_dim: usize,
        #[arg(long, default_value_t = 23_000)]
        count: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GenArgs {
    /// Grid size `RxC` or range `RxC:RxC`.
    #[arg(long, default_value = "20x20")]
    grid: String,
    /// Object count `N` or range `N:M`.
    #[arg(long, default_value = "2")]
    objects: String,
    /// Object side length `N` or range `N:M`.
    #[arg(long, default_value = "1:5")]
    object_dims: String,
    /// Comma-separated sequence applied to every task.
    #[arg(long, conflicts_with = "pool")]
    transforms: Option<String>,
    /// Comma-separated pool to draw a sequence from per task (`all` for every atomic).
    #[arg(long)]
    pool: Option<String>,
    /// Sequence depth when drawing from --pool.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Number of tasks.
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// Output JSONL file; `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
    #[command(flatten)]
    catalog: CatalogArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Full,
}

#[derive(Subcommand)]
enum BenchAction {
    /// Build the five splits of one experiment.
    Build {
        /// C1, C2, C3, G1, G2, G3, G4 or G5.
        #[arg(long)]
        setting: String,
        #[arg(long)]
        experiment: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = ScaleArg::Full)]
        scale: ScaleArg,
        /// Worker threads; output does not depend on it.
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        catalog: CatalogArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Input,
    Output,
    Both,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// ansi, ppm or svg.
    #[arg(long, default_value = "ansi")]
    format: String,
    #[arg(long, value_enum, default_value_t = Which::Both)]
    which: Which,
    /// Pixels per cell for ppm and svg.
    #[arg(long, default_value_t = DEFAULT_CELL_SIZE)]
    cell_size: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// JSONL of `{task_id, grid}` predictions or task records (their outputs).
    #[arg(long)]
    pred: PathBuf,
    /// JSONL task records.
    #[arg(long)]
    target: PathBuf,
    /// Padding size `RxC`; defaults to the largest grid present.
    #[arg(long)]
    pad_to: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    PaperThroughput,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long, value_enum)]
    preset: Preset,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    catalog: CatalogArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e)
            if e.chain()
                .filter_map(|c| c.downcast_ref::<std::io::Error>())
                .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Catalog {
            action: CatalogAction::Build {
                max_dim,
                count,
                seed,
                out,
            },
        } => {
            let catalog = generate_catalog(&CatalogConfig {
                max_dim,
                target_count: count,
                seed: seed.seed,
            })?;
            catalog.save(&out).with_context(|| format!("writing {}", out.display()))?;
            println!("{} objects, sha256 {}", catalog.len(), catalog.content_hash());
            Ok(())
        }
        Command::Gen(args) => gen(args),
        Command::Bench {
            action:
                BenchAction::Build {
                    setting,
                    experiment,
                    seed,
                    out_dir,
                    scale,
                    workers,
                    catalog,
                },
        } => {
            let setting: Setting = setting.parse()?;
            let scale = match scale {
                ScaleArg::Desk => Scale::Desk,
                ScaleArg::Full => Scale::Full,
            };
            let spec = build_experiment(setting, experiment)?.with_sizes(scale.sizes());
            let catalog = load_catalog(&catalog)?;
            let splits = benchmark::generate_splits(&spec, &catalog, seed.seed, workers)?;
            io::write_dataset(&out_dir, &splits)?;
            println!(
                "{}: wrote {} samples to {}",
                spec.name(),
                spec.split_sizes.total(),
                out_dir.display()
            );
            Ok(())
        }
        Command::Render(args) => render_cmd(args),
        Command::Eval(args) => eval(args),
        Command::Stats(args) => {
            let Preset::PaperThroughput = args.preset;
            let catalog = load_catalog(&args.catalog)?;
            let t = gridtask_core::stats::measure_throughput(&catalog, args.n, args.seed.seed)?;
            println!(
                "paper-throughput: mean {:.3} ms ± {:.3} ms per sample over {} samples",
                t.mean_ms, t.sd_ms, t.samples
            );
            Ok(())
        }
    }
}

fn load_catalog(arg: &CatalogArg) -> Result<ObjectCatalog> {
    match &arg.catalog {
        Some(path) => ObjectCatalog::load(path).with_context(|| format!("loading catalog {}", path.display())),
        None => Ok(generate_catalog(&CatalogConfig::default())?),
    }
}

fn parse_range(s: &str) -> Result<SizeRange> {
    let (lo, hi) = s.split_once(':').unwrap_or((s, s));
    let lo: usize = lo.trim().parse().with_context(|| format!("bad range `{s}`"))?;
    let hi: usize = hi.trim().parse().with_context(|| format!("bad range `{s}`"))?;
    Ok(SizeRange::new(lo, hi))
}

fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .with_context(|| format!("expected RxC, got `{s}`"))?;
    Ok((
        r.trim().parse().with_context(|| format!("bad size `{s}`"))?,
        c.trim().parse().with_context(|| format!("bad size `{s}`"))?,
    ))
}

fn parse_grid_range(s: &str) -> Result<(SizeRange, SizeRange)> {
    let (lo, hi) = s.split_once(':').unwrap_or((s, s));
    let (lo, hi) = (parse_dims(lo)?, parse_dims(hi)?);
    Ok((SizeRange::new(lo.0, hi.0), SizeRange::new(lo.1, hi.1)))
}

fn parse_pool(s: &str) -> Result<Vec<Transformation>> {
    if s.trim() == "all" {
        return Ok(Transformation::atomics().to_vec());
    }
    let pool = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.parse::<Transformation>())
        .collect::<Result<Vec<_>, _>>()?;
    if pool.is_empty() {
        bail!("empty transformation pool");
    }
    Ok(pool)
}

fn gen(args: GenArgs) -> Result<()> {
    let (rows, cols) = parse_grid_range(&args.grid)?;
    let side = parse_range(&args.object_dims)?;
    let params = GenerationParams {
        grid_rows_range: rows,
        grid_cols_range: cols,
        n_objects_range: parse_range(&args.objects)?,
        ..GenerationParams::fixed(rows.min, cols.min, 1)
    }
    .with_constraints(ObjectConstraints {
        rows: Some(side),
        cols: Some(side),
        ..ObjectConstraints::none()
    });
    params.validate()?;
    let fixed = args.transforms.as_deref().map(TransformationSequence::parse).transpose()?;
    let pool = match (&fixed, &args.pool) {
        (Some(_), _) => None,
        (None, Some(p)) => Some(parse_pool(p)?),
        (None, None) => bail!("one of --transforms or --pool is required"),
    };
    let catalog = load_catalog(&args.catalog)?;
    let mut rng = SeededRng::new(args.seed.seed);
    let mut records = Vec::with_capacity(args.n);
    for i in 0..args.n {
        let seq = match (&fixed, &pool) {
            (Some(s), _) => s.clone(),
            (None, Some(p)) => sample_transformations(p, args.depth, &mut rng)?,
            _ => unreachable!(),
        };
        let sample = TaskGenerator::new(&params, &seq, &catalog)?.generate(rng.next_u64())?;
        records.push(TaskRecord::from_sample(format!("gen-{i:06}"), &sample));
    }
    if args.out == "-" {
        io::write_jsonl_to(&records, std::io::stdout().lock())?;
    } else {
        io::write_jsonl(&records, Path::new(&args.out))?;
    }
    Ok(())
}

fn render_cmd(args: RenderArgs) -> Result<()> {
    let format: Format = args.format.parse().map_err(anyhow::Error::msg)?;
    if args.cell_size == 0 {
        bail!("--cell-size must be at least 1");
    }
    let records = io::read_jsonl(&args.input)?;
    let rec = records
        .get(args.index)
        .with_context(|| format!("index {} out of range ({} records)", args.index, records.len()))?;
    let grids: Vec<Grid> = match args.which {
        Which::Input => vec![rec.input_grid()],
        Which::Output => vec![rec.output_grid()],
        Which::Both => vec![rec.input_grid(), rec.output_grid()],
    };
    let bytes = match format {
        Format::Ansi => {
            let mut text = format!("{} [{}]\n", rec.task_id, rec.transformations.join(", "));
            for (k, g) in grids.iter().enumerate() {
                if grids.len() > 1 {
                    text.push_str(if k == 0 { "input\n" } else { "output\n" });
                }
                text.push_str(&render::to_ansi(g));
            }
            text.into_bytes()
        }
        _ => render::render(&side_by_side(&grids), format, args.cell_size),
    };
    match args.out {
        Some(path) => std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

/// Grids next to each other with one background column between them.
fn side_by_side(grids: &[Grid]) -> Grid {
    if grids.len() == 1 {
        return grids[0].clone();
    }
    let rows = grids.iter().map(Grid::rows).max().unwrap_or(1);
    let mut out: Vec<Vec<u8>> = vec![Vec::new(); rows];
    for (k, g) in grids.iter().enumerate() {
        for (r, line) in out.iter_mut().enumerate() {
            if k > 0 {
                line.push(0);
            }
            line.extend((0..g.cols()).map(|c| if r < g.rows() { g.get(r, c) } else { 0 }));
        }
    }
    Grid::from_rows(&out).unwrap_or_else(|_| grids[0].clone())
}

fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let value: serde_json::Value =
            serde_json::from_str(line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        let rec = if value.get("grid").is_some() {
            serde_json::from_value::<PredictionRecord>(value)
        } else {
            serde_json::from_value::<TaskRecord>(value).map(|r| PredictionRecord {
                task_id: r.task_id.clone(),
                grid: Grid::from_rows(&r.output).unwrap_or_else(|_| Grid::new(1, 1).expect("1x1")),
            })
        }
        .with_context(|| format!("{}:{}", path.display(), i + 1))?;
        out.push(rec);
    }
    Ok(out)
}

fn eval(args: EvalArgs) -> Result<()> {
    let preds = read_predictions(&args.pred)?;
    let targets: Vec<PredictionRecord> = io::read_jsonl(&args.target)?.iter().map(TaskRecord::target).collect();
    let pad_to = match &args.pad_to {
        Some(s) => parse_dims(s)?,
        None => max_dims(targets.iter().chain(&preds).map(|p| &p.grid)),
    };
    let acc = benchmark::grid_accuracy(&preds, &targets, pad_to)?;
    println!("{acc:.3}");
    Ok(())
}
