//! Train briefly, then write class activation maps of a few test videos as
//! PGM images.
//!
//! cargo run --release --example cam_export -- [out_dir]

use std::path::PathBuf;

use avel::avedata::{split_dataset, synth_dataset, SplitFractions, SynthConfig};
use avel::edrnet::CamSource;
use avel::harness::{export_cams, train, OptimizerConfig, TrainConfig};
use avel::EdrConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "cams".into()));
    let data = synth_dataset(&SynthConfig {
        spatial: 9,
        seed: 4,
        ..SynthConfig::default()
    })?;
    let (tr, va, te) = split_dataset(&data, SplitFractions::default(), 0)?;
    let cfg = EdrConfig {
        width: 16,
        audio_dim: 8,
        visual_dim: 16,
        spatial: 9,
        ..EdrConfig::default()
    };
    let tcfg = TrainConfig {
        epochs: 10,
        batch_size: 16,
        optimizer: OptimizerConfig {
            lr: 3e-3,
            ..Default::default()
        },
        ..TrainConfig::default()
    };
    let model = train(&tr, &va, &cfg, &tcfg)?;

    let files = export_cams(
        &te.records[..2],
        &model.params,
        &cfg,
        &[CamSource::V, CamSource::AV],
        &out,
    )?;
    println!(
        "{} maps ({} per video and source) in {}",
        files.len(),
        cfg.segments - cfg.kernel + 1,
        out.display()
    );
    Ok(())
}
