//! Forward, loss and backward for one video.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::edrnet::{backward, forward, Activations, EdrConfig, ModelError, ModelInput, ModelParams};
use crate::losses::{
    land_loss_grad, partition_patches, sea_loss_grad, seg_ce_grad, sel_grad, shore_loss_grad, wsel_grad, LossWeights,
};

/// Scalar loss of one forward pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Objective {
    SegCe,
    Land,
    Sea,
    Shore { margin: f64 },
    Sel(LossWeights),
    Wsel,
}

/// Supervision of one video.
#[derive(Debug, Clone, Copy)]
pub struct Target<'a> {
    pub seg_labels: &'a [usize],
    pub video_label: usize,
}

impl Objective {
    /// Loss value and its gradients w.r.t. the probabilities and the fused
    /// features.
    pub fn value_and_grads(
        &self,
        acts: &Activations,
        target: Target<'_>,
        background: usize,
    ) -> (f64, Array2<f64>, Option<Array2<f64>>) {
        let probs = acts.probs.view();
        let feats = acts.fused.view();
        let zeros = || Array2::zeros(acts.probs.raw_dim());
        let patches = || partition_patches(target.seg_labels, background);
        match *self {
            Objective::SegCe => {
                let (v, g) = seg_ce_grad(probs, target.seg_labels);
                (v, g, None)
            }
            Objective::Land => {
                let (v, g) = land_loss_grad(feats, &patches());
                (v, zeros(), Some(g))
            }
            Objective::Sea => {
                let (v, g) = sea_loss_grad(feats, &patches());
                (v, zeros(), Some(g))
            }
            Objective::Shore { margin } => {
                let (v, g) = shore_loss_grad(feats, &patches(), margin);
                (v, zeros(), Some(g))
            }
            Objective::Sel(w) => {
                let (v, gp, gf) = sel_grad(probs, target.seg_labels, feats, &w);
                (v, gp, Some(gf))
            }
            Objective::Wsel => {
                let (v, g) = wsel_grad(probs, target.video_label);
                (v, g, None)
            }
        }
    }

    pub fn loss(
        &self,
        input: &ModelInput,
        target: Target<'_>,
        cfg: &EdrConfig,
        params: &ModelParams,
    ) -> Result<f64, ModelError> {
        let acts = forward(input, cfg, params)?;
        Ok(self.value_and_grads(&acts, target, cfg.background()).0)
    }

    /// Loss and parameter gradients.
    pub fn loss_and_grad(
        &self,
        input: &ModelInput,
        target: Target<'_>,
        cfg: &EdrConfig,
        params: &ModelParams,
    ) -> Result<(f64, ModelParams), ModelError> {
        let acts = forward(input, cfg, params)?;
        let (value, d_probs, d_feats) = self.value_and_grads(&acts, target, cfg.background());
        let grads = backward(
            input,
            cfg,
            params,
            &acts,
            d_probs.view(),
            d_feats.as_ref().map(|g| g.view()),
        )?;
        Ok((value, grads))
    }
}
