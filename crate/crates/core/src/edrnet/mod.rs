//! Event decomposition/recomposition network.
//!
//! Three temporal-convolution branches (audio, visual, audio-visual) compress
//! the segment sequence; two transpose-convolution branches (audio, visual)
//! expand it back to `N` segments with residuals from the compression layers
//! of matching length. A sigmoid gate mixes the two expanded sequences before
//! the per-segment classifier.
//!
//! All arithmetic is `f64`. Gradients are written by hand in [`backward`].

use std::fmt;

use serde::{Deserialize, Serialize};

mod backward;
mod cam;
mod config;
mod encoding;
mod forward;
pub mod ops;
mod params;

pub use backward::backward;
pub use cam::{cam_extract, cam_extract_raw, normalize_map, CamSource};
pub use config::{max_layers, Branches, EdrConfig};
pub use encoding::positional_encoding;
pub use forward::{
    branch_probs, classify, decompose, forward, fuse_gated, gate, mil_pool, recompose, spatial_encode, Activations,
    ModelInput, Recomposition,
};
pub use params::{Affine, ModelParams};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("{0} branch is disabled")]
    BranchDisabled(Branch),
    #[error("gating needs both the audio and the visual branch")]
    GatingUnavailable,
    #[error("input shape: {0}")]
    InputShape(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("spatial size {0} is not a perfect square")]
    NonSquareSpatial(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "A")]
    Audio,
    #[serde(rename = "V")]
    Visual,
    #[serde(rename = "AV")]
    AudioVisual,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Audio, Branch::Visual, Branch::AudioVisual];
    /// Branches that own a recomposition path.
    pub const MODAL: [Branch; 2] = [Branch::Audio, Branch::Visual];

    pub fn tag(self) -> &'static str {
        match self {
            Branch::Audio => "A",
            Branch::Visual => "V",
            Branch::AudioVisual => "AV",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One optional slot per [`Branch`].
#[derive(Debug, Clone, PartialEq)]
pub struct PerBranch<T> {
    pub audio: Option<T>,
    pub visual: Option<T>,
    pub audio_visual: Option<T>,
}

impl<T> Default for PerBranch<T> {
    fn default() -> Self {
        PerBranch {
            audio: None,
            visual: None,
            audio_visual: None,
        }
    }
}

impl<T> PerBranch<T> {
    pub fn get(&self, b: Branch) -> Option<&T> {
        match b {
            Branch::Audio => self.audio.as_ref(),
            Branch::Visual => self.visual.as_ref(),
            Branch::AudioVisual => self.audio_visual.as_ref(),
        }
    }

    pub fn get_mut(&mut self, b: Branch) -> Option<&mut T> {
        match b {
            Branch::Audio => self.audio.as_mut(),
            Branch::Visual => self.visual.as_mut(),
            Branch::AudioVisual => self.audio_visual.as_mut(),
        }
    }

    pub fn set(&mut self, b: Branch, value: T) {
        match b {
            Branch::Audio => self.audio = Some(value),
            Branch::Visual => self.visual = Some(value),
            Branch::AudioVisual => self.audio_visual = Some(value),
        }
    }

    /// Present slots in `A, V, AV` order.
    pub fn iter(&self) -> impl Iterator<Item = (Branch, &T)> {
        Branch::ALL.into_iter().filter_map(move |b| self.get(b).map(|v| (b, v)))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (Branch, &mut T)> {
        [
            (Branch::Audio, self.audio.as_mut()),
            (Branch::Visual, self.visual.as_mut()),
            (Branch::AudioVisual, self.audio_visual.as_mut()),
        ]
        .into_iter()
        .filter_map(|(b, v)| v.map(|v| (b, v)))
    }

    pub fn map<U>(&self, mut f: impl FnMut(Branch, &T) -> U) -> PerBranch<U> {
        PerBranch {
            audio: self.audio.as_ref().map(|v| f(Branch::Audio, v)),
            visual: self.visual.as_ref().map(|v| f(Branch::Visual, v)),
            audio_visual: self.audio_visual.as_ref().map(|v| f(Branch::AudioVisual, v)),
        }
    }
}
