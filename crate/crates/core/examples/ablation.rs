//! Run an ablation suite on synthetic data and print the comparison table.
//!
//! cargo run --release --example ablation -- [suite]
//! suites: components, branches, k, L, d:8,16,32, augment:0,20,50, pe

use avel::avedata::{split_dataset, synth_dataset, SplitFractions, SynthConfig};
use avel::harness::{run_ablation, AblationSuite, RunConfig};
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let suite: AblationSuite = std::env::args().nth(1).unwrap_or_else(|| "branches".into()).parse()?;
    let data = synth_dataset(&SynthConfig {
        seed: 1,
        ..SynthConfig::default()
    })?;
    let (tr, va, te) = split_dataset(&data, SplitFractions::default(), 1)?;
    let base = RunConfig::from_value(json!({
        "d": 16, "d_a": 8, "d_v": 16, "S": 4, "k": 2, "L": 1,
        "epochs": 20, "batch_size": 16, "lr": 0.003, "augment_per_class": 50, "seed": 3
    }))?;
    let table = run_ablation(&suite, &base, &tr, &va, &te)?;
    print!("{}", table.render());
    Ok(())
}
