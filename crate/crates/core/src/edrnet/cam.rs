//! Class activation maps from first-layer decomposition kernels.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Activations, Branch, EdrConfig, ModelError, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CamSource {
    /// Visual branch.
    V,
    /// Visual slice of the audio-visual branch (audio-guided).
    AV,
}

impl CamSource {
    pub fn branch(self) -> Branch {
        match self {
            CamSource::V => Branch::Visual,
            CamSource::AV => Branch::AudioVisual,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            CamSource::V => "V",
            CamSource::AV => "AV",
        }
    }
}

/// `(time, channel)` of the largest entry of `D^1`, ties to the lowest
/// channel and then the lowest time.
fn peak(d1: &Array2<f64>) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_v = f64::NEG_INFINITY;
    for c in 0..d1.ncols() {
        for t in 0..d1.nrows() {
            if d1[[t, c]] > best_v {
                best_v = d1[[t, c]];
                best = (t, c);
            }
        }
    }
    best
}

/// Unnormalized maps, one per window position (`N - k + 1` of them), each
/// `side × side`. Each is the `1/k`-scaled sum over taps and visual input
/// channels of the peak channel's kernel times the pre-pooling maps.
pub fn cam_extract_raw(
    acts: &Activations,
    params: &ModelParams,
    cfg: &EdrConfig,
    source: CamSource,
) -> Result<Vec<Array2<f64>>, ModelError> {
    let branch = source.branch();
    let dec = acts
        .decomposition
        .get(branch)
        .ok_or(ModelError::BranchDisabled(branch))?;
    let layer = &params
        .decomposition
        .get(branch)
        .ok_or(ModelError::BranchDisabled(branch))?[0];
    let side = cfg.grid_side().ok_or(ModelError::NonSquareSpatial(cfg.spatial))?;
    let (_, channel) = peak(&dec[1]);

    let k = cfg.kernel;
    let in_width = cfg.branch_input_dim(branch);
    let offset = match source {
        CamSource::V => 0,
        CamSource::AV => cfg.audio_dim,
    };
    let sp = cfg.spatial;
    let dv = cfg.visual_dim;
    let windows = cfg.segments + 1 - k;
    let mut out = Vec::with_capacity(windows);
    for w in 0..windows {
        let mut cam = Array2::zeros((side, side));
        for j in 0..k {
            for i in 0..dv {
                let coef = layer.weight[[j * in_width + offset + i, channel]];
                if coef == 0.0 {
                    continue;
                }
                for p in 0..sp {
                    cam[[p / side, p % side]] += coef * acts.visual_maps[[(w + j) * sp + p, i]];
                }
            }
        }
        cam /= k as f64;
        out.push(cam);
    }
    Ok(out)
}

/// Min-max scales to `[0, 1]`; a constant map becomes all zeros.
pub fn normalize_map(map: &Array2<f64>) -> Array2<f64> {
    let lo = map.fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = map.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let range = hi - lo;
    if range.is_nan() || range <= 0.0 {
        return Array2::zeros(map.raw_dim());
    }
    map.mapv(|v| (v - lo) / range)
}

/// Normalized class activation maps for one video.
pub fn cam_extract(
    acts: &Activations,
    params: &ModelParams,
    cfg: &EdrConfig,
    source: CamSource,
) -> Result<Vec<Array2<f64>>, ModelError> {
    Ok(cam_extract_raw(acts, params, cfg, source)?
        .iter()
        .map(normalize_map)
        .collect())
}
