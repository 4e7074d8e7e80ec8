use ndarray::{concatenate, Array1, Array2, Array3, ArrayView2, ArrayView3, Axis};

use super::ops::{conv1d_same, conv1d_transpose, conv1d_valid, relu, sigmoid, softmax_rows, spatial_im2col};
use super::{positional_encoding, Branch, EdrConfig, ModelError, ModelParams, PerBranch};
use crate::avedata::VideoRecord;

/// Network input in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInput {
    /// `N × d_a`
    pub audio: Array2<f64>,
    /// `N × S × d_v`
    pub visual: Array3<f64>,
}

impl From<&VideoRecord> for ModelInput {
    fn from(r: &VideoRecord) -> Self {
        ModelInput {
            audio: r.audio.mapv(f64::from),
            visual: r.visual.mapv(f64::from),
        }
    }
}

impl ModelInput {
    fn check(&self, cfg: &EdrConfig) -> Result<(), ModelError> {
        let want_a = (cfg.segments, cfg.audio_dim);
        let want_v = (cfg.segments, cfg.spatial, cfg.visual_dim);
        if self.audio.dim() != want_a || self.visual.dim() != want_v {
            return Err(ModelError::InputShape(format!(
                "audio {:?} / visual {:?}, config expects {want_a:?} / {want_v:?}",
                self.audio.dim(),
                self.visual.dim()
            )));
        }
        Ok(())
    }
}

/// Recomposition outputs of one modal branch.
#[derive(Debug, Clone, PartialEq)]
pub struct Recomposition {
    /// Summed inputs of layers `1..=L`.
    pub inputs: Vec<Array2<f64>>,
    /// Outputs `R^1..=R^L`.
    pub outputs: Vec<Array2<f64>>,
}

impl Recomposition {
    pub fn last(&self) -> &Array2<f64> {
        self.outputs.last().expect("at least one layer")
    }
}

/// Every intermediate of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    /// Post-ReLU spatial convolution output before pooling, `(N·S) × d_v`.
    pub visual_maps: Array2<f64>,
    /// Pooled visual features, `N × d_v`.
    pub visual_pooled: Array2<f64>,
    /// Per enabled branch, `D^0..=D^L`; `D^0` includes the positional encoding.
    pub decomposition: PerBranch<Vec<Array2<f64>>>,
    pub recomposition: PerBranch<Recomposition>,
    /// Present when both modal branches are enabled.
    pub gate: Option<Array2<f64>>,
    /// Gated features, or the sole modal branch's `R^L`.
    pub fused: Array2<f64>,
    pub logits: Array2<f64>,
    /// Per-segment class probabilities.
    pub probs: Array2<f64>,
    /// Mean of the per-segment probabilities.
    pub video_probs: Array1<f64>,
}

/// Same-padded 2-D convolution with ReLU on every segment's map, then the
/// spatial mean. Returns `(maps, pooled)`.
pub fn spatial_encode(
    visual: ArrayView3<'_, f64>,
    cfg: &EdrConfig,
    params: &ModelParams,
) -> Result<(Array2<f64>, Array2<f64>), ModelError> {
    let (n, s, dv) = visual.dim();
    let side = cfg.grid_side().ok_or(ModelError::NonSquareSpatial(s))?;
    if side * side != s {
        return Err(ModelError::NonSquareSpatial(s));
    }
    let flat = visual
        .to_shape((n * s, dv))
        .map_err(|e| ModelError::InputShape(e.to_string()))?;
    let cols = spatial_im2col(flat.view(), side, cfg.spatial_kernel);
    let mut z = cols.dot(&params.spatial.weight);
    z += &params.spatial.bias.view().insert_axis(Axis(0));
    let maps = relu(z);
    let pooled = maps
        .view()
        .into_shape_with_order((n, s, dv))
        .expect("contiguous")
        .mean_axis(Axis(1))
        .expect("non-empty spatial axis");
    Ok((maps, pooled))
}

/// `D^0 = x0`, `D^l = ReLU(conv(D^{l-1}))`.
pub fn decompose(
    x0: Array2<f64>,
    branch: Branch,
    cfg: &EdrConfig,
    params: &ModelParams,
) -> Result<Vec<Array2<f64>>, ModelError> {
    let layers = params
        .decomposition
        .get(branch)
        .ok_or(ModelError::BranchDisabled(branch))?;
    if layers.len() < cfg.layers {
        return Err(ModelError::InvalidConfig(format!(
            "{} decomposition layers for L = {}",
            layers.len(),
            cfg.layers
        )));
    }
    if cfg.dec_len(0) < 1 + cfg.layers * (cfg.kernel - 1) {
        return Err(ModelError::InvalidConfig("L exceeds L_max".into()));
    }
    let mut out = Vec::with_capacity(cfg.layers + 1);
    out.push(x0);
    for layer in &layers[..cfg.layers] {
        let next = relu(conv1d_valid(out.last().unwrap().view(), layer, cfg.kernel));
        out.push(next);
    }
    Ok(out)
}

fn add_same_shape(a: &mut Array2<f64>, b: &Array2<f64>, what: &str) -> Result<(), ModelError> {
    if a.dim() != b.dim() {
        return Err(ModelError::ShapeMismatch(format!(
            "{what}: {:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    *a += b;
    Ok(())
}

/// Residual partner depth of recomposition layer `l_rec >= 2`.
pub(crate) fn residual_depth(cfg: &EdrConfig, l_rec: usize) -> usize {
    cfg.layers + 1 - l_rec
}

/// Expands `D^L` of each enabled modal branch back to `N` steps. Layer 1
/// reads `D_b^L + D_AV^L`; layer `l >= 2` reads `R^{l-1} + D_b^j + D_AV^j`
/// with `j = L - l + 1`. The AV terms are dropped when that branch is off.
pub fn recompose(
    decomposition: &PerBranch<Vec<Array2<f64>>>,
    cfg: &EdrConfig,
    params: &ModelParams,
) -> Result<PerBranch<Recomposition>, ModelError> {
    let big_l = cfg.layers;
    let av = decomposition.audio_visual.as_ref();
    let mut out = PerBranch::default();
    for b in Branch::MODAL {
        let (Some(dec), Some(layers)) = (decomposition.get(b), params.recomposition.get(b)) else {
            continue;
        };
        let mut inputs = Vec::with_capacity(big_l);
        let mut outputs: Vec<Array2<f64>> = Vec::with_capacity(big_l);
        for l_rec in 1..=big_l {
            let mut input = if l_rec == 1 {
                dec[big_l].clone()
            } else {
                let mut x = outputs[l_rec - 2].clone();
                let j = residual_depth(cfg, l_rec);
                add_same_shape(&mut x, &dec[j], "recomposition residual")?;
                x
            };
            if let Some(av) = av {
                let j = if l_rec == 1 { big_l } else { residual_depth(cfg, l_rec) };
                add_same_shape(&mut input, &av[j], "audio-visual residual")?;
            }
            let r = relu(conv1d_transpose(input.view(), &layers[l_rec - 1], cfg.kernel));
            inputs.push(input);
            outputs.push(r);
        }
        out.set(b, Recomposition { inputs, outputs });
    }
    Ok(out)
}

/// `sigmoid(conv_same([R_A ‖ R_V]))`.
pub fn gate(
    audio: ArrayView2<'_, f64>,
    visual: ArrayView2<'_, f64>,
    cfg: &EdrConfig,
    params: &ModelParams,
) -> Result<Array2<f64>, ModelError> {
    let layer = params.gate.as_ref().ok_or(ModelError::GatingUnavailable)?;
    if audio.dim() != visual.dim() {
        return Err(ModelError::ShapeMismatch(format!(
            "gate inputs {:?} vs {:?}",
            audio.dim(),
            visual.dim()
        )));
    }
    let cat = concatenate(Axis(1), &[audio, visual]).expect("equal lengths");
    Ok(conv1d_same(cat.view(), layer, cfg.kernel).mapv_into(sigmoid))
}

/// `G ⊙ R_A + (1 - G) ⊙ R_V`.
pub fn fuse_gated(
    audio: ArrayView2<'_, f64>,
    visual: ArrayView2<'_, f64>,
    g: ArrayView2<'_, f64>,
) -> Result<Array2<f64>, ModelError> {
    if audio.dim() != visual.dim() || audio.dim() != g.dim() {
        return Err(ModelError::ShapeMismatch(format!(
            "fuse inputs {:?}, {:?}, gate {:?}",
            audio.dim(),
            visual.dim(),
            g.dim()
        )));
    }
    let mut out = Array2::zeros(audio.raw_dim());
    ndarray::Zip::from(&mut out)
        .and(&audio)
        .and(&visual)
        .and(&g)
        .for_each(|o, &a, &v, &g| *o = g * a + (1.0 - g) * v);
    Ok(out)
}

/// Per-segment logits and softmax probabilities.
pub fn classify(features: ArrayView2<'_, f64>, params: &ModelParams) -> (Array2<f64>, Array2<f64>) {
    let mut logits = features.dot(&params.classifier.weight);
    logits += &params.classifier.bias.view().insert_axis(Axis(0));
    let probs = softmax_rows(logits.view());
    (logits, probs)
}

/// Mean over segments.
pub fn mil_pool(probs: ArrayView2<'_, f64>) -> Array1<f64> {
    probs.mean_axis(Axis(0)).expect("at least one segment")
}

fn branch_input(b: Branch, audio: &Array2<f64>, pooled: &Array2<f64>, cfg: &EdrConfig) -> Array2<f64> {
    let mut x = match b {
        Branch::Audio => audio.clone(),
        Branch::Visual => pooled.clone(),
        Branch::AudioVisual => concatenate(Axis(1), &[audio.view(), pooled.view()]).expect("N rows"),
    };
    if cfg.positional_encoding {
        x += &positional_encoding(cfg.segments, x.ncols());
    }
    x
}

pub fn forward(input: &ModelInput, cfg: &EdrConfig, params: &ModelParams) -> Result<Activations, ModelError> {
    cfg.validate()?;
    input.check(cfg)?;
    let (visual_maps, visual_pooled) = spatial_encode(input.visual.view(), cfg, params)?;

    let mut decomposition = PerBranch::default();
    for b in Branch::ALL.into_iter().filter(|&b| cfg.branches.enabled(b)) {
        let x0 = branch_input(b, &input.audio, &visual_pooled, cfg);
        decomposition.set(b, decompose(x0, b, cfg, params)?);
    }
    let recomposition = recompose(&decomposition, cfg, params)?;

    let (gate_out, fused) = match (&recomposition.audio, &recomposition.visual) {
        (Some(a), Some(v)) => {
            let g = gate(a.last().view(), v.last().view(), cfg, params)?;
            let fused = fuse_gated(a.last().view(), v.last().view(), g.view())?;
            (Some(g), fused)
        }
        (Some(only), None) | (None, Some(only)) => (None, only.last().clone()),
        (None, None) => unreachable!("validated config enables A or V"),
    };

    let (logits, probs) = classify(fused.view(), params);
    let video_probs = mil_pool(probs.view());
    Ok(Activations {
        visual_maps,
        visual_pooled,
        decomposition,
        recomposition,
        gate: gate_out,
        fused,
        logits,
        probs,
        video_probs,
    })
}

/// Classifies a modal branch's `R^L` with the shared head; `None` when the
/// branch is disabled.
pub fn branch_probs(acts: &Activations, params: &ModelParams, branch: Branch) -> Option<Array2<f64>> {
    acts.recomposition
        .get(branch)
        .map(|r| classify(r.last().view(), params).1)
}
