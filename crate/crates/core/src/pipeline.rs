//! extract -> train -> eval -> sweep, with the artifact files each step
//! reads and writes. Everything is deterministic for a fixed seed; timing
//! goes to the log, never into artifacts.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::dataset::{DatasetError, DatasetSplit};
use crate::eval::EvalReport;
use crate::features::{extract_batch, FeatureFileError, FeatureMatrix, FeatureVector};
use crate::mlp::{fit, EpochMetrics, MlpModel, ModelError, TrainConfig};
use crate::par;

/// Hidden-layer sizes of the reference sweep.
pub const TABLE_HIDDEN_DIMS: [usize; 9] = [80, 85, 90, 95, 100, 105, 110, 115, 120];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{path}: {source}")]
    Features {
        path: PathBuf,
        #[source]
        source: FeatureFileError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

impl PipelineError {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Io { .. } => 3,
            PipelineError::Dataset(DatasetError::Io { .. }) => 3,
            PipelineError::Dataset(_) => 4,
            PipelineError::Features { source: FeatureFileError::LayoutVersionMismatch { .. }, .. } => 5,
            PipelineError::Features { source: FeatureFileError::Io(_), .. } => 3,
            PipelineError::Features { .. } => 4,
            PipelineError::Model(ModelError::VersionMismatch(_)) => 5,
            PipelineError::Model(ModelError::CorruptFile(_)) => 6,
            PipelineError::Model(ModelError::Io(_)) => 3,
            PipelineError::Model(_) | PipelineError::InvalidSweep(_) => 7,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExtractStats {
    pub samples: usize,
    /// Samples whose whole-image hull was degenerate.
    pub degenerate_images: usize,
    /// Zero-filled blocks over all samples (global and quadrant).
    pub degenerate_blocks: usize,
    /// Blank images, written as all-zero rows.
    pub empty_images: usize,
}

pub fn extract_split(split: &DatasetSplit) -> (FeatureMatrix, ExtractStats) {
    let start = Instant::now();
    let images: Vec<_> = split.samples.iter().map(|s| s.image.clone()).collect();
    let results = extract_batch(&images);
    let mut matrix = FeatureMatrix::default();
    let mut stats = ExtractStats { samples: results.len(), ..Default::default() };
    for (sample, r) in split.samples.iter().zip(results) {
        match r {
            Ok(e) => {
                stats.degenerate_blocks += usize::from(e.degenerate_blocks);
                stats.degenerate_images += usize::from(e.degenerate_blocks == 5);
                matrix.push(sample.label, e.features);
            }
            Err(_) => {
                stats.empty_images += 1;
                matrix.push(sample.label, FeatureVector::zeros());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    log::info!(
        "extracted {} samples in {:.2}s ({:.0}/s, parallel={}); degenerate images {}, zero blocks {}, blank images {}",
        stats.samples,
        secs,
        stats.samples as f64 / secs.max(1e-9),
        par::is_parallel(),
        stats.degenerate_images,
        stats.degenerate_blocks,
        stats.empty_images
    );
    (matrix, stats)
}

pub fn write_features(path: &Path, matrix: &FeatureMatrix) -> Result<(), PipelineError> {
    let file = File::create(path).map_err(io_err(path))?;
    matrix.write_to(BufWriter::new(file)).map_err(io_err(path))
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix, PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    FeatureMatrix::read_from(BufReader::new(file)).map_err(|source| PipelineError::Features { path: path.to_path_buf(), source })
}

pub fn train(features: &FeatureMatrix, config: &TrainConfig) -> Result<(MlpModel, Vec<EpochMetrics>), PipelineError> {
    let start = Instant::now();
    let out = fit(features, config)?;
    log::info!(
        "trained hidden={} on {} samples for {} epochs in {:.2}s",
        config.hidden_dim,
        features.len(),
        out.1.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(out)
}

/// `epoch,mse,train_accuracy` with 1-based epochs.
pub fn training_log_csv(metrics: &[EpochMetrics]) -> String {
    let mut s = String::from("epoch,mse,train_accuracy\n");
    for m in metrics {
        let _ = writeln!(s, "{},{},{}", m.epoch + 1, m.mse, m.accuracy);
    }
    s
}

pub fn evaluate(model: &MlpModel, features: &FeatureMatrix) -> EvalReport {
    EvalReport::from_predictions(&features.labels, &model.predict_batch(&features.rows))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    fs::write(path, text).map_err(io_err(path))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub hidden_dim: usize,
    pub test_accuracy: f64,
    pub train_accuracy: f64,
    pub epochs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("hidden_dim,test_accuracy_percent,train_accuracy_percent,epochs,seed\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{:.4},{:.4},{},{}", r.hidden_dim, r.test_accuracy, r.train_accuracy, r.epochs, r.seed);
        }
        s
    }

    pub fn best(&self) -> Option<&SweepRow> {
        self.rows.iter().max_by(|a, b| a.test_accuracy.total_cmp(&b.test_accuracy))
    }
}

/// Trains one model per hidden size, seeded `base.seed + hidden_dim`, and
/// scores it on both splits. Runs the sizes in parallel under the
/// `parallel` feature; rows come back in ascending `hidden_dim`.
pub fn sweep(
    train_set: &FeatureMatrix,
    test_set: &FeatureMatrix,
    hidden_dims: &[usize],
    base: &TrainConfig,
) -> Result<SweepResult, PipelineError> {
    let mut dims = hidden_dims.to_vec();
    dims.sort_unstable();
    if dims.is_empty() {
        return Err(PipelineError::InvalidSweep("no hidden sizes given".into()));
    }
    if dims.windows(2).any(|w| w[0] == w[1]) {
        return Err(PipelineError::InvalidSweep("hidden sizes must be unique".into()));
    }
    let runs = par::map(&dims, |&hidden_dim| -> Result<SweepRow, PipelineError> {
        let config = TrainConfig { hidden_dim, seed: base.seed.wrapping_add(hidden_dim as u64), ..*base };
        let (model, log) = train(train_set, &config)?;
        let test_accuracy = evaluate(&model, test_set).accuracy();
        let train_accuracy = evaluate(&model, train_set).accuracy();
        log::info!("sweep hidden={hidden_dim}: test {test_accuracy:.2}% train {train_accuracy:.2}%");
        Ok(SweepRow { hidden_dim, test_accuracy, train_accuracy, epochs: log.len(), seed: config.seed })
    });
    Ok(SweepResult { rows: runs.into_iter().collect::<Result<_, _>>()? })
}
