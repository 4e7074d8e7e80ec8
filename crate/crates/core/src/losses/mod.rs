//! Training objectives.
//!
//! Segment-level supervision combines cross-entropy with the land/sea/shore
//! patch losses on the fused features; video-level supervision applies
//! cross-entropy to the mean-pooled prediction.

use serde::{Deserialize, Serialize};

mod lss;
mod objectives;
mod patches;

pub use lss::{
    land_loss, land_loss_grad, lss_loss, lss_loss_grad, sea_loss, sea_loss_grad, shore_loss, shore_loss_grad,
};
pub use objectives::{seg_ce_grad, seg_ce_loss, sel_grad, sel_objective, wsel_grad, wsel_objective, LOG_EPS};
pub use patches::{partition_patches, PatchPartition, Shore, Span};

/// Weights of the supervised objective `λ1·CE + λ2·LSS` and the shore margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub margin: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda1: 1.0,
            lambda2: 0.1,
            margin: 0.2,
        }
    }
}

impl LossWeights {
    pub fn is_valid(&self) -> bool {
        [self.lambda1, self.lambda2, self.margin]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
    }
}
