//! Build the state databases of one class, draw state sequences and stitch
//! new videos from them.
//!
//! cargo run --example smb_fusion

use avel::avedata::{synth_dataset, validate_record, SynthConfig, BACKGROUND};
use avel::smbfuse::{augment_dataset, build_databases, fuse_video, generate_state_sequence, StateMachine};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = synth_dataset(&SynthConfig {
        classes: 3,
        videos_per_class: 8,
        seed: 2,
        ..SynthConfig::default()
    })?;
    let dbs = build_databases(&data, 1, BACKGROUND);
    for (state, n) in dbs.counts() {
        println!("{:<11} {n:>4} clips", state.to_string());
    }

    let machine = StateMachine::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for i in 0..3 {
        let seq = generate_state_sequence(&machine, 10, &dbs.available(), 1, &mut rng)?;
        let names: Vec<String> = seq.states.iter().map(|s| s.to_string()).collect();
        let (video, provenance) = fuse_video(&seq, &dbs, &mut rng, format!("demo_{i}"), BACKGROUND)?;
        println!("\n{}", names.join(" -> "));
        println!(
            "labels {:?} valid={}",
            video.seg_labels,
            validate_record(&video).is_empty()
        );
        for p in provenance {
            println!(
                "  {:<11} from {} segments {}..={}",
                p.state.to_string(),
                p.source_video,
                p.seg_range.start,
                p.seg_range.end
            );
        }
    }

    let aug = augment_dataset(&data, 250, 0);
    println!(
        "\naugmentation: {} fused videos, {} classes skipped",
        aug.dataset.len(),
        aug.skipped.len()
    );
    Ok(())
}
