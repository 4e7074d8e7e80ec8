//! Supervised training on segment labels with cross-entropy plus the
//! land/sea/shore feature loss, scored before and after label correction.
//!
//! cargo run --release --example train_sel -- ['{"lr": 0.003, "L": 2}']

use avel::avedata::{split_dataset, synth_dataset, SplitFractions, SynthConfig};
use avel::harness::{evaluate, train_with_observer, RunConfig};
use serde_json::{json, Value};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut settings = json!({
        "k": 2, "L": 1, "d": 16, "d_a": 8, "d_v": 16, "S": 4,
        "epochs": 50, "batch_size": 16, "lr": 0.003, "patience": 0, "seed": 3
    });
    if let Some(extra) = std::env::args().nth(1) {
        let extra: Value = serde_json::from_str(&extra)?;
        for (k, v) in extra.as_object().ok_or("overrides must be a JSON object")? {
            settings[k] = v.clone();
        }
    }
    let run = RunConfig::from_value(settings)?;

    let data = synth_dataset(&SynthConfig {
        seed: 1,
        ..SynthConfig::default()
    })?;
    let (train, val, test) = split_dataset(&data, SplitFractions::default(), 1)?;

    let out = train_with_observer(&train, &val, &run.model, &run.train, |e| {
        if e.epoch % 10 == 9 {
            println!(
                "epoch {:>3}  loss {:.4}  val {:.3}",
                e.epoch + 1,
                e.train_loss,
                e.val_acc.unwrap_or(0.0)
            );
        }
        Ok(())
    })?;
    let plain = evaluate(&test, &out.params, &run.model, None)?;
    let corrected = evaluate(&test, &out.params, &run.model, Some(0.5))?;
    println!("best epoch {}", out.best_epoch + 1);
    println!(
        "test accuracy {:.3}, with label correction {:.3}",
        plain.segment_accuracy, corrected.segment_accuracy
    );
    Ok(())
}
