use ndarray::{Array2, ArrayView1, ArrayView2};

use super::{lss_loss_grad, partition_patches, LossWeights};

/// Lower clamp applied to probabilities inside logarithms.
pub const LOG_EPS: f64 = 1e-12;

/// Mean over segments of `-log p_t[y_t]`; returns the gradient w.r.t. `probs`.
pub fn seg_ce_grad(probs: ArrayView2<'_, f64>, labels: &[usize]) -> (f64, Array2<f64>) {
    let n = probs.nrows();
    let mut grad = Array2::zeros(probs.raw_dim());
    let mut total = 0.0;
    for (t, &y) in labels.iter().enumerate() {
        let p = probs[[t, y]];
        if p > LOG_EPS {
            total -= p.ln();
            grad[[t, y]] = -1.0 / (p * n as f64);
        } else {
            total -= LOG_EPS.ln();
        }
    }
    (total / n as f64, grad)
}

pub fn seg_ce_loss(probs: ArrayView2<'_, f64>, labels: &[usize]) -> f64 {
    seg_ce_grad(probs, labels).0
}

/// `-log ŷ[y]` for the pooled prediction.
pub fn wsel_objective(video_probs: ArrayView1<'_, f64>, label: usize) -> f64 {
    -video_probs[label].max(LOG_EPS).ln()
}

/// Video-level loss through mean pooling, with the gradient w.r.t. the
/// per-segment probabilities.
pub fn wsel_grad(probs: ArrayView2<'_, f64>, label: usize) -> (f64, Array2<f64>) {
    let n = probs.nrows() as f64;
    let pooled = probs.column(label).sum() / n;
    let mut grad = Array2::zeros(probs.raw_dim());
    if pooled > LOG_EPS {
        grad.column_mut(label).fill(-1.0 / (pooled * n));
    }
    (-pooled.max(LOG_EPS).ln(), grad)
}

/// `λ1·CE + λ2·LSS` with patches taken from the labels; background is the
/// last class.
pub fn sel_objective(
    probs: ArrayView2<'_, f64>,
    labels: &[usize],
    features: ArrayView2<'_, f64>,
    weights: &LossWeights,
) -> f64 {
    sel_grad(probs, labels, features, weights).0
}

/// Returns `(value, d/dprobs, d/dfeatures)`.
pub fn sel_grad(
    probs: ArrayView2<'_, f64>,
    labels: &[usize],
    features: ArrayView2<'_, f64>,
    weights: &LossWeights,
) -> (f64, Array2<f64>, Array2<f64>) {
    let (ce, mut d_probs) = seg_ce_grad(probs, labels);
    d_probs *= weights.lambda1;
    let mut value = weights.lambda1 * ce;
    let mut d_features = Array2::zeros(features.raw_dim());
    if weights.lambda2 != 0.0 {
        let background = probs.ncols() - 1;
        let partition = partition_patches(labels, background);
        let (lss, g) = lss_loss_grad(features, &partition, weights.margin);
        value += weights.lambda2 * lss;
        d_features.scaled_add(weights.lambda2, &g);
    }
    (value, d_probs, d_features)
}
