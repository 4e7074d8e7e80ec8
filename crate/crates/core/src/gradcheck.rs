//! Central finite-difference checks of analytic parameter gradients.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::edrnet::ModelParams;

#[derive(Debug, Clone)]
pub struct GradCheckConfig {
    /// Perturbation applied on each side of a coordinate.
    pub step: f64,
    /// Coordinates sampled uniformly without replacement across all tensors.
    pub samples: usize,
    pub rel_tolerance: f64,
    /// Floor of the relative-error denominator, so that two vanishing
    /// gradients compare as equal.
    pub denominator_floor: f64,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            step: 1e-4,
            samples: 500,
            rel_tolerance: 1e-3,
            denominator_floor: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoordinateCheck {
    pub tensor: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub checks: Vec<CoordinateCheck>,
    pub rel_tolerance: f64,
}

impl GradCheckReport {
    pub fn pass_fraction(&self) -> f64 {
        if self.checks.is_empty() {
            return 1.0;
        }
        let ok = self.checks.iter().filter(|c| c.rel_error < self.rel_tolerance).count();
        ok as f64 / self.checks.len() as f64
    }

    pub fn worst(&self) -> Option<&CoordinateCheck> {
        self.checks.iter().max_by(|a, b| a.rel_error.total_cmp(&b.rel_error))
    }
}

pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Compares `analytic` against `(f(θ + h e_i) - f(θ - h e_i)) / 2h` on
/// sampled coordinates of `params`.
pub fn check_gradients(
    params: &ModelParams,
    analytic: &ModelParams,
    mut loss: impl FnMut(&ModelParams) -> f64,
    cfg: &GradCheckConfig,
) -> GradCheckReport {
    let sizes: Vec<(String, usize)> = params.tensors().iter().map(|(n, t)| (n.clone(), t.len())).collect();
    let total: usize = sizes.iter().map(|s| s.1).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut picks: Vec<usize> = sample(&mut rng, total, cfg.samples.min(total)).into_vec();
    picks.sort_unstable();

    let analytic_flat: Vec<f64> = analytic
        .tensors()
        .iter()
        .flat_map(|(_, t)| t.iter().copied().collect::<Vec<_>>())
        .collect();

    let mut probe = params.clone();
    let mut checks = Vec::with_capacity(picks.len());
    for flat in picks {
        let (mut tensor_idx, mut offset) = (0, flat);
        while offset >= sizes[tensor_idx].1 {
            offset -= sizes[tensor_idx].1;
            tensor_idx += 1;
        }
        let set = |p: &mut ModelParams, v: f64| {
            let mut tensors = p.tensors_mut();
            let t = &mut tensors[tensor_idx].1;
            *t.iter_mut().nth(offset).expect("index in range") = v;
        };
        let orig = params.tensors()[tensor_idx].1.iter().nth(offset).copied().unwrap();
        set(&mut probe, orig + cfg.step);
        let plus = loss(&probe);
        set(&mut probe, orig - cfg.step);
        let minus = loss(&probe);
        set(&mut probe, orig);
        let numeric = (plus - minus) / (2.0 * cfg.step);
        let a = analytic_flat[flat];
        checks.push(CoordinateCheck {
            tensor: sizes[tensor_idx].0.clone(),
            index: offset,
            analytic: a,
            numeric,
            rel_error: relative_error(a, numeric, cfg.denominator_floor),
        });
    }
    GradCheckReport {
        checks,
        rel_tolerance: cfg.rel_tolerance,
    }
}
