use ndarray::{concatenate, s, Array2, ArrayView2, Axis};

use super::forward::residual_depth;
use super::ops::{
    conv1d_same_backward, conv1d_transpose_backward, conv1d_valid_backward, relu_backward, softmax_backward,
    spatial_im2col,
};
use super::{Activations, Branch, EdrConfig, ModelError, ModelInput, ModelParams, PerBranch};

/// Reverse-mode pass over one forward.
///
/// `grad_probs` is the loss gradient w.r.t. the per-segment probabilities
/// and `grad_features` an optional extra gradient w.r.t. [`Activations::fused`]
/// (the patch losses act there). Returns gradients shaped like `params`.
pub fn backward(
    input: &ModelInput,
    cfg: &EdrConfig,
    params: &ModelParams,
    acts: &Activations,
    grad_probs: ArrayView2<'_, f64>,
    grad_features: Option<ArrayView2<'_, f64>>,
) -> Result<ModelParams, ModelError> {
    if grad_probs.dim() != acts.probs.dim() {
        return Err(ModelError::ShapeMismatch(format!(
            "probability gradient {:?} vs {:?}",
            grad_probs.dim(),
            acts.probs.dim()
        )));
    }
    let k = cfg.kernel;
    let big_l = cfg.layers;
    let mut grads = params.zeros_like();

    // classifier
    let dlogits = softmax_backward(acts.probs.view(), grad_probs);
    grads.classifier.weight = acts.fused.t().dot(&dlogits);
    grads.classifier.bias = dlogits.sum_axis(Axis(0));
    let mut dfused = dlogits.dot(&params.classifier.weight.t());
    if let Some(extra) = grad_features {
        if extra.dim() != dfused.dim() {
            return Err(ModelError::ShapeMismatch(format!(
                "feature gradient {:?} vs {:?}",
                extra.dim(),
                dfused.dim()
            )));
        }
        dfused += &extra;
    }

    // gate and convex mix
    let mut d_rec_out: PerBranch<Array2<f64>> = PerBranch::default();
    match (&acts.recomposition.audio, &acts.recomposition.visual, &acts.gate) {
        (Some(ra), Some(rv), Some(g)) => {
            let (ra, rv) = (ra.last(), rv.last());
            let mut d_ra = &dfused * g;
            let mut d_rv = &dfused * &g.mapv(|v| 1.0 - v);
            let mut dz = &dfused * &(ra - rv);
            dz.zip_mut_with(g, |d, &g| *d *= g * (1.0 - g));
            let cat = concatenate(Axis(1), &[ra.view(), rv.view()]).expect("equal lengths");
            let layer = params.gate.as_ref().ok_or(ModelError::GatingUnavailable)?;
            let (dcat, g_grad) = conv1d_same_backward(cat.view(), layer, k, dz.view());
            grads.gate = Some(g_grad);
            let d = cfg.width;
            d_ra += &dcat.slice(s![.., ..d]);
            d_rv += &dcat.slice(s![.., d..]);
            d_rec_out.audio = Some(d_ra);
            d_rec_out.visual = Some(d_rv);
        }
        (Some(_), None, None) => d_rec_out.audio = Some(dfused),
        (None, Some(_), None) => d_rec_out.visual = Some(dfused),
        _ => return Err(ModelError::InvalidConfig("activations do not match config".into())),
    }

    // residual gradients into decomposition depths 0..=L
    let mut d_dec: PerBranch<Vec<Array2<f64>>> = acts
        .decomposition
        .map(|_, ds| ds.iter().map(|d| Array2::zeros(d.raw_dim())).collect());

    for b in Branch::MODAL {
        let (Some(rec), Some(mut d_out)) = (acts.recomposition.get(b), d_rec_out.get(b).cloned()) else {
            continue;
        };
        let layers = params.recomposition.get(b).ok_or(ModelError::BranchDisabled(b))?;
        for l_rec in (1..=big_l).rev() {
            let dz = relu_backward(rec.outputs[l_rec - 1].view(), d_out.view());
            let (d_in, g) = conv1d_transpose_backward(rec.inputs[l_rec - 1].view(), &layers[l_rec - 1], k, dz.view());
            grads.recomposition.get_mut(b).expect("same structure")[l_rec - 1] = g;
            let j = if l_rec == 1 { big_l } else { residual_depth(cfg, l_rec) };
            d_dec.get_mut(b).expect("modal branch decomposed")[j] += &d_in;
            if let Some(av) = d_dec.get_mut(Branch::AudioVisual) {
                av[j] += &d_in;
            }
            d_out = d_in;
        }
    }

    // decomposition
    let mut d_inputs: PerBranch<Array2<f64>> = PerBranch::default();
    for b in Branch::ALL {
        let (Some(dec), Some(d_res)) = (acts.decomposition.get(b), d_dec.get(b)) else {
            continue;
        };
        let layers = params.decomposition.get(b).ok_or(ModelError::BranchDisabled(b))?;
        let mut d_cur = d_res[big_l].clone();
        for l in (1..=big_l).rev() {
            let dz = relu_backward(dec[l].view(), d_cur.view());
            let (d_prev, g) = conv1d_valid_backward(dec[l - 1].view(), &layers[l - 1], k, dz.view());
            grads.decomposition.get_mut(b).expect("same structure")[l - 1] = g;
            d_cur = d_prev + &d_res[l - 1];
        }
        d_inputs.set(b, d_cur);
    }

    // pooled visual features feed V directly and AV after the audio columns
    let mut d_pooled: Option<Array2<f64>> = d_inputs.visual.take();
    if let Some(d_av) = &d_inputs.audio_visual {
        let part = d_av.slice(s![.., cfg.audio_dim..]);
        match &mut d_pooled {
            Some(d) => *d += &part,
            None => d_pooled = Some(part.to_owned()),
        }
    }
    if let Some(d_pooled) = d_pooled {
        let (n, sp, dv) = input.visual.dim();
        let mut d_maps = Array2::zeros((n * sp, dv));
        for t in 0..n {
            for p in 0..sp {
                d_maps.row_mut(t * sp + p).assign(&(&d_pooled.row(t) / sp as f64));
            }
        }
        let dz = relu_backward(acts.visual_maps.view(), d_maps.view());
        let flat = input
            .visual
            .to_shape((n * sp, dv))
            .map_err(|e| ModelError::InputShape(e.to_string()))?;
        let side = cfg.grid_side().ok_or(ModelError::NonSquareSpatial(sp))?;
        let cols = spatial_im2col(flat.view(), side, cfg.spatial_kernel);
        grads.spatial.weight = cols.t().dot(&dz);
        grads.spatial.bias = dz.sum_axis(Axis(0));
    }

    Ok(grads)
}
