//! Class-conditional Gaussian feature sequences for desk-scale experiments.

use ndarray::{Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::validate::MIN_EVENT_LEN;
use super::{default_class_names, DataError, Dataset, Split, VideoRecord, BACKGROUND, NUM_SEGMENTS};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Foreground classes, drawn as `0..classes`.
    pub classes: usize,
    pub videos_per_class: usize,
    /// Additional videos with no event at all.
    #[serde(default)]
    pub background_videos: usize,
    pub audio_dim: usize,
    pub visual_dim: usize,
    pub spatial: usize,
    /// Norm of each class mean; noise is unit variance.
    pub separation: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            classes: 5,
            videos_per_class: 40,
            background_videos: 40,
            audio_dim: 8,
            visual_dim: 16,
            spatial: 4,
            separation: 3.0,
            seed: 0,
        }
    }
}

fn unit_direction(rng: &mut ChaCha8Rng, dim: usize) -> Array1<f64> {
    loop {
        let v: Array1<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.dot(&v).sqrt();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

struct ClassMeans {
    audio: Vec<Array1<f64>>,
    visual: Vec<Array1<f64>>,
}

impl ClassMeans {
    /// Index `classes` holds the background mean.
    fn draw(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Self {
        let mut audio = Vec::new();
        let mut visual = Vec::new();
        for _ in 0..=cfg.classes {
            audio.push(unit_direction(rng, cfg.audio_dim) * cfg.separation);
            visual.push(unit_direction(rng, cfg.visual_dim) * cfg.separation);
        }
        ClassMeans { audio, visual }
    }
}

fn make_record(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    means: &ClassMeans,
    id: String,
    class: Option<usize>,
) -> VideoRecord {
    let n = NUM_SEGMENTS;
    let mut labels = vec![BACKGROUND; n];
    if let Some(c) = class {
        let len = rng.random_range(MIN_EVENT_LEN..=n);
        let start = rng.random_range(0..=n - len);
        labels[start..start + len].fill(c);
    }
    let mut audio = Array2::<f32>::zeros((n, cfg.audio_dim));
    let mut visual = Array3::<f32>::zeros((n, cfg.spatial, cfg.visual_dim));
    for t in 0..n {
        let m = if labels[t] == BACKGROUND {
            cfg.classes
        } else {
            labels[t]
        };
        for i in 0..cfg.audio_dim {
            let z: f64 = StandardNormal.sample(rng);
            audio[[t, i]] = (means.audio[m][i] + z) as f32;
        }
        for s in 0..cfg.spatial {
            for i in 0..cfg.visual_dim {
                let z: f64 = StandardNormal.sample(rng);
                visual[[t, s, i]] = (means.visual[m][i] + z) as f32;
            }
        }
    }
    VideoRecord {
        id,
        audio,
        visual,
        seg_labels: labels,
        video_label: class.unwrap_or(BACKGROUND),
    }
}

/// Generates a dataset where every foreground video carries one contiguous
/// event whose features are shifted toward a class-specific mean.
pub fn synth_dataset(cfg: &SynthConfig) -> Result<Dataset, DataError> {
    if cfg.classes > BACKGROUND {
        return Err(DataError::InvalidConfig(format!(
            "at most {BACKGROUND} foreground classes, got {}",
            cfg.classes
        )));
    }
    if !(cfg.separation.is_finite() && cfg.separation >= 0.0) {
        return Err(DataError::InvalidConfig(format!(
            "separation must be finite and non-negative, got {}",
            cfg.separation
        )));
    }
    if cfg.audio_dim == 0 || cfg.visual_dim == 0 || cfg.spatial == 0 {
        return Err(DataError::InvalidConfig("feature dims must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let means = ClassMeans::draw(&mut rng, cfg);
    let mut records = Vec::with_capacity(cfg.classes * cfg.videos_per_class + cfg.background_videos);
    for c in 0..cfg.classes {
        for i in 0..cfg.videos_per_class {
            records.push(make_record(&mut rng, cfg, &means, format!("synth_{c}_{i}"), Some(c)));
        }
    }
    for i in 0..cfg.background_videos {
        records.push(make_record(&mut rng, cfg, &means, format!("synth_bg_{i}"), None));
    }
    Ok(Dataset::new(records, default_class_names(), Split::Train))
}
