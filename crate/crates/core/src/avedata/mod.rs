//! Video records, datasets and their on-disk representation.

use std::fmt;
use std::path::PathBuf;

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

mod blob;
mod manifest;
mod split;
mod synth;
mod validate;

pub use blob::TensorBlob;
pub use manifest::{load_dataset, save_dataset, Manifest, ManifestRecord, MANIFEST_FILE};
pub use split::{split_dataset, SplitFractions};
pub use synth::{synth_dataset, SynthConfig};
pub use validate::{validate_record, Modality, Violation};

/// Segments per video.
pub const NUM_SEGMENTS: usize = 10;
/// Event classes including background.
pub const NUM_CLASSES: usize = 29;
/// Index of the background class.
pub const BACKGROUND: usize = NUM_CLASSES - 1;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed tensor blob {}: {reason}", path.display())]
    BlobHeader { path: PathBuf, reason: String },
    #[error("malformed manifest {}: {source}", path.display())]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("record {record}: {detail}")]
    DimensionMismatch { record: String, detail: String },
    #[error("record {record}: label {label} out of range [0, {classes})")]
    LabelOutOfRange {
        record: String,
        label: usize,
        classes: usize,
    },
    #[error("record {record} failed validation: {}", violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidRecord { record: String, violations: Vec<Violation> },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Val,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

/// One video: per-segment audio embeddings, visual feature maps and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoRecord {
    pub id: String,
    /// `N × d_a`
    pub audio: Array2<f32>,
    /// `N × S × d_v`, row-major.
    pub visual: Array3<f32>,
    pub seg_labels: Vec<usize>,
    pub video_label: usize,
}

impl VideoRecord {
    pub fn num_segments(&self) -> usize {
        self.seg_labels.len()
    }

    pub fn dims(&self) -> FeatureDims {
        let (segments, audio) = self.audio.dim();
        let (_, spatial, visual) = self.visual.dim();
        FeatureDims {
            segments,
            audio,
            visual,
            spatial,
        }
    }

    pub fn is_background_only(&self) -> bool {
        self.seg_labels.iter().all(|&l| l == BACKGROUND)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDims {
    pub segments: usize,
    pub audio: usize,
    pub visual: usize,
    pub spatial: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<VideoRecord>,
    pub class_names: Vec<String>,
    pub split: Split,
}

impl Dataset {
    pub fn new(records: Vec<VideoRecord>, class_names: Vec<String>, split: Split) -> Self {
        Dataset {
            records,
            class_names,
            split,
        }
    }

    pub fn empty(split: Split) -> Self {
        Dataset::new(Vec::new(), default_class_names(), split)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Shared feature dims, `None` for an empty dataset.
    pub fn dims(&self) -> Option<FeatureDims> {
        self.records.first().map(VideoRecord::dims)
    }

    pub fn num_segments(&self) -> usize {
        self.records.iter().map(VideoRecord::num_segments).sum()
    }
}

/// `class_0 .. class_27` followed by `background`.
pub fn default_class_names() -> Vec<String> {
    (0..BACKGROUND)
        .map(|c| format!("class_{c}"))
        .chain(std::iter::once("background".to_string()))
        .collect()
}
