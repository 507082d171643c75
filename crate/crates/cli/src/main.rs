use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use hullbay::dataset::{load_split, DEFAULT_THRESHOLD};
use hullbay::mlp::{MlpModel, TrainConfig};
use hullbay::pipeline::{self, PipelineError, TABLE_HIDDEN_DIMS};

/// Convex-hull bay features + MLP digit classifier.
#[derive(Parser, Debug)]
#[command(name = "hullbay", version)]
struct Cli {
    /// Optional TOML file with defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Threshold an IDX image/label pair and write the 125-feature matrix.
    Extract {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Gray levels strictly above this are object pixels.
        #[arg(long)]
        threshold: Option<u8>,
        /// Keep only the first N samples in file order.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit scaling and train an MLP on a feature matrix.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[command(flatten)]
        hyper: HyperArgs,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long)]
        model_out: PathBuf,
        /// Per-epoch metrics, `epoch,mse,train_accuracy`.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Score a model on a feature matrix.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Write the text report here (it is always printed).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        confusion: Option<PathBuf>,
    },
    /// Train and score one model per hidden-layer size.
    Sweep {
        #[arg(long)]
        train_features: PathBuf,
        #[arg(long)]
        test_features: PathBuf,
        /// Comma-separated hidden sizes [default: 80,85,...,120]
        #[arg(long, value_delimiter = ',')]
        hidden_dims: Option<Vec<usize>>,
        #[command(flatten)]
        hyper: HyperArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct HyperArgs {
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Visit samples in file order every epoch.
    #[arg(long)]
    no_shuffle: bool,
    /// Samples averaged per weight update (1 = online).
    #[arg(long)]
    batch_size: Option<usize>,
    /// Stop after this many epochs without training-accuracy improvement.
    #[arg(long)]
    early_stop: Option<usize>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    threshold: Option<u8>,
    limit: Option<usize>,
    learning_rate: Option<f64>,
    momentum: Option<f64>,
    epochs: Option<usize>,
    seed: Option<u64>,
    shuffle: Option<bool>,
    batch_size: Option<usize>,
    early_stop_patience: Option<usize>,
    hidden: Option<usize>,
    hidden_dims: Option<Vec<usize>>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    fn train_config(&self, hyper: &HyperArgs, hidden: Option<usize>) -> TrainConfig {
        let d = TrainConfig::default();
        TrainConfig {
            learning_rate: hyper.learning_rate.or(self.learning_rate).unwrap_or(d.learning_rate),
            momentum: hyper.momentum.or(self.momentum).unwrap_or(d.momentum),
            epochs: hyper.epochs.or(self.epochs).unwrap_or(d.epochs),
            hidden_dim: hidden.or(self.hidden).unwrap_or(d.hidden_dim),
            seed: hyper.seed.or(self.seed).unwrap_or(d.seed),
            shuffle: !hyper.no_shuffle && self.shuffle.unwrap_or(d.shuffle),
            batch_size: hyper.batch_size.or(self.batch_size).unwrap_or(d.batch_size),
            early_stop_patience: hyper.early_stop.or(self.early_stop_patience),
        }
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path).unwrap_or_else(|e| {
            eprintln!("error: config {e}");
            std::process::exit(2);
        }),
        None => FileConfig::default(),
    };

    match cli.command {
        Command::Extract { images, labels, threshold, limit, out } => {
            let threshold = threshold.or(file.threshold).unwrap_or(DEFAULT_THRESHOLD);
            let split = load_split(&images, &labels, threshold, limit.or(file.limit))?;
            log::info!("loaded {} samples (threshold {threshold})", split.samples.len());
            let (matrix, stats) = pipeline::extract_split(&split);
            pipeline::write_features(&out, &matrix)?;
            println!(
                "wrote {} rows to {} (degenerate images {}, zero blocks {})",
                matrix.len(),
                out.display(),
                stats.degenerate_images,
                stats.degenerate_blocks
            );
        }
        Command::Train { features, hyper, hidden, model_out, log } => {
            let config = file.train_config(&hyper, hidden);
            let matrix = pipeline::read_features(&features)?;
            let (model, metrics) = pipeline::train(&matrix, &config)?;
            model.save(&model_out)?;
            if let Some(path) = log {
                pipeline::write_text(&path, &pipeline::training_log_csv(&metrics))?;
            }
            if let Some(last) = metrics.last() {
                println!("trained {} epochs, final mse {:.6}, train accuracy {:.2}%", metrics.len(), last.mse, 100.0 * last.accuracy);
            }
        }
        Command::Eval { model, features, report, confusion } => {
            let model = MlpModel::load(&model)?;
            let matrix = pipeline::read_features(&features)?;
            let result = pipeline::evaluate(&model, &matrix);
            let text = result.to_text();
            print!("{text}");
            if let Some(path) = report {
                pipeline::write_text(&path, &text)?;
            }
            if let Some(path) = confusion {
                pipeline::write_text(&path, &result.confusion_csv())?;
            }
        }
        Command::Sweep { train_features, test_features, hidden_dims, hyper, out } => {
            let base = file.train_config(&hyper, None);
            let dims = hidden_dims.or(file.hidden_dims).unwrap_or_else(|| TABLE_HIDDEN_DIMS.to_vec());
            let train = pipeline::read_features(&train_features)?;
            let test = pipeline::read_features(&test_features)?;
            let result = pipeline::sweep(&train, &test, &dims, &base)?;
            let csv = result.to_csv();
            pipeline::write_text(&out, &csv)?;
            print!("{csv}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
