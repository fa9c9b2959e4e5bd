use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use incpers::io::load_manifest;
use incpers::pipeline::{default_strategies, load_dataset, run_matrix, MatrixResult, MatrixSpec};
use incpers::report::{emit_reports, feature_catalog_csv, RunConfig};
use incpers::synth::{write_dataset, SynthConfig};
use incpers_core::classifiers::BaseKind;
use incpers_core::features::{FeatureCatalog, WindowSpec};
use incpers_core::harness::STRATEGY_VARIANTS;
use incpers_core::personalization::LabelingStrategy;
use incpers_core::BodyPosition;

#[derive(Parser)]
#[command(name = "incpers", version, about = "Incremental personalization of activity recognition ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Leave-one-subject-out runs for one position, classifier and strategy.
    Run(RunArgs),
    /// Every position, classifier and strategy.
    Matrix(MatrixArgs),
    /// Print the feature catalog as CSV.
    Catalog {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the synthetic dataset and its manifest.
    Synth(SynthArgs),
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    /// Defaults to `<data>/manifest.toml`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct RecipeArgs {
    #[arg(long)]
    sampling_fraction: Option<f64>,
    #[arg(long)]
    noise_copies: Option<usize>,
    #[arg(long)]
    noise_scale: Option<f64>,
    #[arg(long)]
    sfs_max_features: Option<usize>,
    #[arg(long)]
    sfs_validation_fraction: Option<f64>,
    #[arg(long)]
    shrinkage: Option<f64>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
}

impl RecipeArgs {
    fn apply(&self, spec: &mut MatrixSpec) {
        let r = &mut spec.recipe;
        r.sampling_fraction = self.sampling_fraction.unwrap_or(r.sampling_fraction);
        r.noise_copies = self.noise_copies.unwrap_or(r.noise_copies);
        r.noise_scale = self.noise_scale.unwrap_or(r.noise_scale);
        r.sfs_max_features = self.sfs_max_features.unwrap_or(r.sfs_max_features);
        r.sfs_validation_fraction = self.sfs_validation_fraction.unwrap_or(r.sfs_validation_fraction);
        let p = &mut spec.params;
        p.shrinkage = self.shrinkage.unwrap_or(p.shrinkage);
        p.max_depth = self.max_depth.unwrap_or(p.max_depth);
        p.min_leaf_size = self.min_leaf.unwrap_or(p.min_leaf_size);
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Nonsup,
    Semi,
    Sup,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    position: BodyPosition,
    #[arg(long)]
    classifier: BaseKind,
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 0.95)]
    threshold: f64,
    #[command(flatten)]
    recipe: RecipeArgs,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    recipe: RecipeArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    subjects: usize,
    #[arg(long, default_value_t = 36.0)]
    seconds_per_activity: f64,
}

fn execute(data: &DataArgs, spec: MatrixSpec) -> Result<MatrixResult> {
    let manifest_path = data.manifest.clone().unwrap_or_else(|| data.data.join("manifest.toml"));
    let manifest = load_manifest(&manifest_path)?;
    for p in &spec.positions {
        if !manifest.positions.contains(p) {
            bail!("position {} is not listed in {}", p.name(), manifest_path.display());
        }
    }
    let catalog = FeatureCatalog::standard();
    let window = WindowSpec::standard();
    let started = Instant::now();
    let subjects = load_dataset(&data.data, &manifest, &spec.positions, &catalog, &window, spec.master_seed)?;
    eprintln!("features ready in {:.1?}", started.elapsed());
    let result = run_matrix(&subjects, &spec);
    eprintln!("{} runs, {} failures in {:.1?}", result.runs.len(), result.failures.len(), started.elapsed());
    let config = RunConfig::new(&spec, window, &catalog, &manifest);
    for path in emit_reports(&result, &catalog, &config, &data.out)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(result)
}

fn print_summary(result: &MatrixResult) {
    let fmt = |v: Option<f64>| v.map_or("   -  ".to_string(), |x| format!("{x:6.2}"));
    print!("{:<16}", "");
    for v in STRATEGY_VARIANTS {
        print!("{:>18}", v.column());
    }
    println!();
    let rows = result.summary.rows.iter().map(|r| (format!("{}/{}", r.position.name(), r.base_kind.name()), &r.cells));
    for (label, cells) in rows.chain(std::iter::once(("mean".to_string(), &result.summary.mean))) {
        print!("{label:<16}");
        for (c, cell) in cells.iter().enumerate() {
            let q = if (2..4).contains(&c) { format!(" ({})", fmt(cell.queried).trim()) } else { String::new() };
            print!("{:>18}", format!("{}{q}", fmt(cell.error)));
        }
        println!();
    }
}

fn report_failures(result: &MatrixResult) -> ExitCode {
    for f in &result.failures {
        eprintln!(
            "failed: {} {}/{} {}: {}",
            f.subject_id,
            f.position.name(),
            f.base_kind.name(),
            f.strategy.map_or("step1", |s| s.name()),
            f.error
        );
    }
    if result.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn write_or_print(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run(args) => {
            let mut spec = MatrixSpec::full(args.data.seed);
            spec.positions = vec![args.position];
            spec.classifiers = vec![args.classifier];
            spec.strategies = vec![match args.strategy {
                StrategyArg::Nonsup => LabelingStrategy::NonSupervised,
                StrategyArg::Semi => LabelingStrategy::SemiSupervised { threshold: args.threshold },
                StrategyArg::Sup => LabelingStrategy::Supervised,
            }];
            args.recipe.apply(&mut spec);
            let result = execute(&args.data, spec)?;
            for run in &result.runs {
                let q = run.query_stats();
                println!(
                    "{} user-independent {:.4} final {:.4} queried {:.3} replaced {:.3}",
                    run.subject_id,
                    run.user_independent_error(result.spec.models_per_step).unwrap_or(f64::NAN),
                    run.curve.final_error().unwrap_or(f64::NAN),
                    q.queried_fraction(),
                    q.replaced_fraction()
                );
            }
            Ok(report_failures(&result))
        }
        Command::Matrix(args) => {
            let mut spec = MatrixSpec::full(args.data.seed);
            spec.strategies = default_strategies();
            args.recipe.apply(&mut spec);
            let result = execute(&args.data, spec)?;
            print_summary(&result);
            Ok(report_failures(&result))
        }
        Command::Catalog { out } => {
            write_or_print(out.as_deref(), &feature_catalog_csv(&FeatureCatalog::standard())?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth(args) => {
            let config = SynthConfig {
                subjects: args.subjects,
                seconds_per_activity: args.seconds_per_activity,
                seed: args.seed,
                anomalous: args.subjects.checked_sub(1),
                ..SynthConfig::default()
            };
            let manifest = write_dataset(&args.out, &config)?;
            eprintln!(
                "wrote {} subjects ({} included) to {}",
                config.subjects,
                manifest.included_subjects.len(),
                args.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
