//! Compare backpropagated parameter gradients with central differences.
//!
//! cargo run --release --example gradient_check

use avel::edrnet::{EdrConfig, ModelInput, ModelParams};
use avel::gradcheck::{check_gradients, GradCheckConfig};
use avel::harness::{Objective, Target};
use avel::losses::LossWeights;
use ndarray::{Array2, Array3};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = EdrConfig {
        width: 8,
        classes: 5,
        audio_dim: 4,
        visual_dim: 4,
        spatial: 4,
        ..EdrConfig::default()
    };
    let params = ModelParams::init(&cfg)?;
    let input = ModelInput {
        audio: Array2::from_shape_fn((10, 4), |(t, i)| ((t * 7 + i * 3) % 11) as f64 / 5.0 - 1.0),
        visual: Array3::from_shape_fn((10, 4, 4), |(t, s, i)| ((t + 2 * s + 5 * i) % 9) as f64 / 4.0 - 1.0),
    };
    let labels = [4, 4, 1, 1, 1, 1, 4, 4, 4, 4];
    let target = Target {
        seg_labels: &labels,
        video_label: 1,
    };

    for obj in [
        Objective::SegCe,
        Objective::Sel(LossWeights {
            lambda1: 1.0,
            lambda2: 0.5,
            margin: 5.0,
        }),
        Objective::Wsel,
    ] {
        let (loss, grads) = obj.loss_and_grad(&input, target, &cfg, &params)?;
        let report = check_gradients(
            &params,
            &grads,
            |p| obj.loss(&input, target, &cfg, p).unwrap(),
            &GradCheckConfig::default(),
        );
        let worst = report.worst().unwrap();
        println!(
            "{obj:?}: loss {loss:.4}, {:.1}% of {} coordinates within 1e-3, worst {} [{}] rel {:.2e}",
            100.0 * report.pass_fraction(),
            report.checks.len(),
            worst.tensor,
            worst.index,
            worst.rel_error
        );
    }
    Ok(())
}
