use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Branch, EdrConfig, ModelError, PerBranch};

/// A weight matrix and bias. Convolutions use the unrolled layouts described
/// in [`super::ops`].
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Affine {
    pub fn zeros(rows: usize, cols: usize, bias: usize) -> Self {
        Affine {
            weight: Array2::zeros((rows, cols)),
            bias: Array1::zeros(bias),
        }
    }

    fn uniform(rows: usize, cols: usize, bias: usize, bound: f64, rng: &mut ChaCha8Rng) -> Self {
        let weight = Array2::from_shape_fn((rows, cols), |_| {
            // parameters are kept f32-representable so checkpoints round-trip exactly
            rng.random_range(-bound..bound) as f32 as f64
        });
        Affine {
            weight,
            bias: Array1::zeros(bias),
        }
    }

    pub fn len(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn zeros_like(&self) -> Self {
        Affine {
            weight: Array2::zeros(self.weight.raw_dim()),
            bias: Array1::zeros(self.bias.raw_dim()),
        }
    }
}

/// Every learnable tensor of the network; also used as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// `(s·s·d_v) × d_v` spatial kernel.
    pub spatial: Affine,
    /// Per branch, layers `1..=L`; layer weights are `(k·in) × d`.
    pub decomposition: PerBranch<Vec<Affine>>,
    /// A and V only; layer weights are `d × (k·d)`.
    pub recomposition: PerBranch<Vec<Affine>>,
    /// `(k·2d) × d`, present when both A and V are enabled.
    pub gate: Option<Affine>,
    /// `d × C`.
    pub classifier: Affine,
}

enum Init {
    /// Variance `2/fan_in`, for layers followed by a ReLU.
    He,
    /// Variance `1/fan_in`.
    Lecun,
}

impl ModelParams {
    /// Deterministic initialization from `cfg.seed`.
    pub fn init(cfg: &EdrConfig) -> Result<Self, ModelError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Self::build(cfg, |rows, cols, bias, fan_in, init| {
            let scale = match init {
                Init::He => 6.0,
                Init::Lecun => 3.0,
            };
            Affine::uniform(rows, cols, bias, (scale / fan_in as f64).sqrt(), &mut rng)
        }))
    }

    pub fn zeros(cfg: &EdrConfig) -> Result<Self, ModelError> {
        cfg.validate()?;
        Ok(Self::build(cfg, |rows, cols, bias, _, _| {
            Affine::zeros(rows, cols, bias)
        }))
    }

    fn build(cfg: &EdrConfig, mut make: impl FnMut(usize, usize, usize, usize, Init) -> Affine) -> Self {
        let k = cfg.kernel;
        let d = cfg.width;
        let ks = cfg.spatial_kernel;
        let spatial_rows = ks * ks * cfg.visual_dim;
        let spatial = make(spatial_rows, cfg.visual_dim, cfg.visual_dim, spatial_rows, Init::He);

        let mut decomposition = PerBranch::default();
        for b in Branch::ALL.into_iter().filter(|&b| cfg.branches.enabled(b)) {
            let layers = (1..=cfg.layers)
                .map(|l| {
                    let input = if l == 1 { cfg.branch_input_dim(b) } else { d };
                    make(k * input, d, d, k * input, Init::He)
                })
                .collect();
            decomposition.set(b, layers);
        }
        let mut recomposition = PerBranch::default();
        for b in Branch::MODAL.into_iter().filter(|&b| cfg.branches.enabled(b)) {
            let layers = (1..=cfg.layers).map(|_| make(d, k * d, d, k * d, Init::He)).collect();
            recomposition.set(b, layers);
        }
        let gate = cfg
            .branches
            .gated()
            .then(|| make(k * 2 * d, d, d, k * 2 * d, Init::Lecun));
        let classifier = make(d, cfg.classes, cfg.classes, d, Init::Lecun);
        ModelParams {
            spatial,
            decomposition,
            recomposition,
            gate,
            classifier,
        }
    }

    /// Named layers in a fixed order.
    pub fn affines(&self) -> Vec<(String, &Affine)> {
        let mut out = vec![("spatial".to_string(), &self.spatial)];
        for (b, layers) in self.decomposition.iter() {
            for (l, a) in layers.iter().enumerate() {
                out.push((format!("dec.{b}.{}", l + 1), a));
            }
        }
        for (b, layers) in self.recomposition.iter() {
            for (l, a) in layers.iter().enumerate() {
                out.push((format!("rec.{b}.{}", l + 1), a));
            }
        }
        if let Some(g) = &self.gate {
            out.push(("gate".to_string(), g));
        }
        out.push(("classifier".to_string(), &self.classifier));
        out
    }

    pub fn affines_mut(&mut self) -> Vec<(String, &mut Affine)> {
        let mut out = vec![("spatial".to_string(), &mut self.spatial)];
        for (b, layers) in self.decomposition.iter_mut() {
            for (l, a) in layers.iter_mut().enumerate() {
                out.push((format!("dec.{b}.{}", l + 1), a));
            }
        }
        for (b, layers) in self.recomposition.iter_mut() {
            for (l, a) in layers.iter_mut().enumerate() {
                out.push((format!("rec.{b}.{}", l + 1), a));
            }
        }
        if let Some(g) = &mut self.gate {
            out.push(("gate".to_string(), g));
        }
        out.push(("classifier".to_string(), &mut self.classifier));
        out
    }

    /// `<layer>.weight` / `<layer>.bias` views in a fixed order.
    pub fn tensors(&self) -> Vec<(String, ArrayViewD<'_, f64>)> {
        self.affines()
            .into_iter()
            .flat_map(|(name, a)| {
                [
                    (format!("{name}.weight"), a.weight.view().into_dyn()),
                    (format!("{name}.bias"), a.bias.view().into_dyn()),
                ]
            })
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, f64>)> {
        self.affines_mut()
            .into_iter()
            .flat_map(|(name, a)| {
                [
                    (format!("{name}.weight"), a.weight.view_mut().into_dyn()),
                    (format!("{name}.bias"), a.bias.view_mut().into_dyn()),
                ]
            })
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.affines().iter().map(|(_, a)| a.len()).sum()
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.scale(0.0);
        z
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, mut t) in self.tensors_mut() {
            t.mapv_inplace(|v| v * factor);
        }
    }

    /// Elementwise `self += other`; both must come from the same config.
    pub fn add_assign(&mut self, other: &ModelParams) {
        for ((_, mut a), (_, b)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a += &b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }

    pub fn max_abs_diff(&self, other: &ModelParams) -> f64 {
        self.tensors()
            .iter()
            .zip(other.tensors())
            .flat_map(|((_, a), (_, b))| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }
}
