//! Training, evaluation, ablations, checkpoints and CAM export.

use std::path::{Path, PathBuf};

mod ablation;
mod cams;
mod checkpoint;
mod config;
mod eval;
mod objective;
mod train;

pub use ablation::{
    plan_ablation, run_ablation, AblationRow, AblationSuite, AblationTable, AblationVariant, BranchAccuracy,
};
pub use cams::{export_cams, write_pgm};
pub use checkpoint::{checkpoint_load, checkpoint_save, read_checkpoint_config, CHECKPOINT_INDEX};
pub use config::{AugmentConfig, B2ilcConfig, LrDecay, OptimizerConfig, RunConfig, Task, TrainConfig};
pub use eval::{evaluate, evaluate_head, evaluate_predictions, predict, predict_dataset, EvalReport, Head};
pub use objective::{Objective, Target};
pub use train::{batch_loss_and_grad, train, train_from, train_with_observer, Adam, EpochLog, TrainOutcome};

use crate::avedata::DataError;
use crate::edrnet::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("non-finite loss {value} at epoch {epoch}, step {step}, video {video}")]
    NonFiniteLoss {
        epoch: usize,
        step: usize,
        video: String,
        value: f64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
    #[error("checkpoint config differs in: {}", fields.join(", "))]
    ConfigMismatch { fields: Vec<String> },
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
