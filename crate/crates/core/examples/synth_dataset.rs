//! Generate a synthetic dataset, write it as a manifest plus tensor blobs,
//! read it back and split it.
//!
//! cargo run --example synth_dataset -- [out_dir]

use std::path::PathBuf;

use avel::avedata::{
    load_dataset, save_dataset, split_dataset, synth_dataset, validate_record, SplitFractions, SynthConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp;
    let dir = match std::env::args().nth(1) {
        Some(d) => PathBuf::from(d),
        None => {
            tmp = tempfile::tempdir()?;
            tmp.path().to_path_buf()
        }
    };

    let cfg = SynthConfig {
        classes: 3,
        videos_per_class: 10,
        background_videos: 10,
        seed: 7,
        ..SynthConfig::default()
    };
    let data = synth_dataset(&cfg)?;
    let first = &data.records[0];
    println!("{} records, dims {:?}", data.len(), data.dims().unwrap());
    println!(
        "{}: labels {:?}, video label {}",
        first.id, first.seg_labels, first.video_label
    );

    let manifest = save_dataset(&data, &dir)?;
    let loaded = load_dataset(&manifest)?;
    assert_eq!(loaded.records, data.records);
    println!("round trip through {} is exact", manifest.display());

    let invalid = loaded.records.iter().filter(|r| !validate_record(r).is_empty()).count();
    println!("{invalid} invalid records");

    let (train, val, test) = split_dataset(&loaded, SplitFractions::default(), 0)?;
    println!("split {} / {} / {}", train.len(), val.len(), test.len());
    Ok(())
}
