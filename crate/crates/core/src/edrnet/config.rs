use serde::{Deserialize, Serialize};

use super::{Branch, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Branches {
    #[serde(rename = "A")]
    pub audio: bool,
    #[serde(rename = "V")]
    pub visual: bool,
    #[serde(rename = "AV")]
    pub audio_visual: bool,
}

impl Branches {
    pub const ALL: Branches = Branches {
        audio: true,
        visual: true,
        audio_visual: true,
    };

    pub fn new(audio: bool, visual: bool, audio_visual: bool) -> Self {
        Branches {
            audio,
            visual,
            audio_visual,
        }
    }

    pub fn enabled(&self, b: Branch) -> bool {
        match b {
            Branch::Audio => self.audio,
            Branch::Visual => self.visual,
            Branch::AudioVisual => self.audio_visual,
        }
    }

    pub fn gated(&self) -> bool {
        self.audio && self.visual
    }
}

impl Default for Branches {
    fn default() -> Self {
        Branches::ALL
    }
}

/// Architecture hyperparameters. Serialized keys follow the usual symbols
/// (`k`, `L`, `d`, `N`, `C`, `d_a`, `d_v`, `S`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EdrConfig {
    /// Temporal kernel size.
    #[serde(rename = "k")]
    pub kernel: usize,
    /// Layers per phase.
    #[serde(rename = "L")]
    pub layers: usize,
    /// Width of every hidden layer.
    #[serde(rename = "d")]
    pub width: usize,
    #[serde(rename = "N")]
    pub segments: usize,
    #[serde(rename = "C")]
    pub classes: usize,
    #[serde(rename = "d_a")]
    pub audio_dim: usize,
    #[serde(rename = "d_v")]
    pub visual_dim: usize,
    /// Spatial positions of each visual map, a perfect square.
    #[serde(rename = "S")]
    pub spatial: usize,
    pub branches: Branches,
    /// Side of the 2-D spatial kernel; odd.
    pub spatial_kernel: usize,
    pub positional_encoding: bool,
    pub seed: u64,
}

impl Default for EdrConfig {
    fn default() -> Self {
        EdrConfig {
            kernel: 3,
            layers: 4,
            width: 768,
            segments: 10,
            classes: 29,
            audio_dim: 128,
            visual_dim: 512,
            spatial: 49,
            branches: Branches::ALL,
            spatial_kernel: 3,
            positional_encoding: true,
            seed: 0,
        }
    }
}

impl EdrConfig {
    pub fn background(&self) -> usize {
        self.classes - 1
    }

    pub fn grid_side(&self) -> Option<usize> {
        let side = (self.spatial as f64).sqrt().round() as usize;
        (side * side == self.spatial).then_some(side)
    }

    /// Temporal length after `l` decomposition layers.
    pub fn dec_len(&self, l: usize) -> usize {
        self.segments - l * (self.kernel - 1)
    }

    /// Temporal length after `l` recomposition layers.
    pub fn rec_len(&self, l: usize) -> usize {
        self.dec_len(self.layers) + l * (self.kernel - 1)
    }

    /// Raw input width of a branch before the first projection.
    pub fn branch_input_dim(&self, b: Branch) -> usize {
        match b {
            Branch::Audio => self.audio_dim,
            Branch::Visual => self.visual_dim,
            Branch::AudioVisual => self.audio_dim + self.visual_dim,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidConfig(m));
        if self.width == 0 || self.audio_dim == 0 || self.visual_dim == 0 {
            return bad("d, d_a and d_v must be positive".into());
        }
        if self.classes < 2 {
            return bad(format!("C must be at least 2, got {}", self.classes));
        }
        let l_max = max_layers(self.kernel, self.segments)?;
        if self.layers == 0 || self.layers > l_max {
            return bad(format!(
                "L = {} outside [1, {l_max}] for k = {}, N = {}",
                self.layers, self.kernel, self.segments
            ));
        }
        if !(self.branches.audio || self.branches.visual) {
            return bad("at least one of the A and V branches must be enabled".into());
        }
        if self.grid_side().is_none() {
            return Err(ModelError::NonSquareSpatial(self.spatial));
        }
        if self.spatial_kernel.is_multiple_of(2) {
            return bad(format!("spatial kernel must be odd, got {}", self.spatial_kernel));
        }
        Ok(())
    }
}

/// Largest layer count whose final length lies in `(0, k)` under
/// `N_{l+1} = N_l - k + 1`.
pub fn max_layers(k: usize, n: usize) -> Result<usize, ModelError> {
    if k < 2 || k > n {
        return Err(ModelError::InvalidConfig(format!("kernel size {k} outside [2, {n}]")));
    }
    let mut len = n;
    let mut layers = 0;
    while len >= k {
        len = len - k + 1;
        layers += 1;
    }
    Ok(layers)
}
