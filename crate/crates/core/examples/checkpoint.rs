//! Save parameters as tensor blobs with a JSON index and load them back.
//!
//! cargo run --example checkpoint

use avel::harness::{checkpoint_load, checkpoint_save, HarnessError};
use avel::{EdrConfig, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let cfg = EdrConfig {
        width: 32,
        audio_dim: 8,
        visual_dim: 16,
        spatial: 4,
        ..EdrConfig::default()
    };
    let params = ModelParams::init(&cfg)?;
    let index = checkpoint_save(&params, &cfg, dir.path())?;
    println!(
        "{} tensors, {} parameters -> {}",
        params.tensors().len(),
        params.param_count(),
        index.display()
    );

    let loaded = checkpoint_load(dir.path(), &cfg)?;
    println!("bit-exact: {}", loaded == params);

    let wider = EdrConfig { width: 64, ..cfg };
    match checkpoint_load(dir.path(), &wider) {
        Err(e @ HarnessError::ConfigMismatch { .. }) => println!("rejected: {e}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
