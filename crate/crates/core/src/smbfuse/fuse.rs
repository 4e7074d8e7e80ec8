use std::collections::BTreeSet;

use ndarray::{concatenate, Array2, Array3, Axis};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    build_databases, generate_state_sequence, FusionError, State, StateDatabases, StateMachine, StateSequence,
};
use crate::avedata::{Dataset, Split, VideoRecord, BACKGROUND, NUM_SEGMENTS};
use crate::losses::Span;

/// Where a fused slot's segments came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub state: State,
    pub source_video: String,
    pub seg_range: Span,
}

/// Concatenates one uniformly drawn clip per state of `seq`.
pub fn fuse_video<R: Rng + ?Sized>(
    seq: &StateSequence,
    dbs: &StateDatabases,
    rng: &mut R,
    new_id: String,
    background: usize,
) -> Result<(VideoRecord, Vec<Provenance>), FusionError> {
    let mut audio = Vec::with_capacity(seq.states.len());
    let mut visual = Vec::with_capacity(seq.states.len());
    let mut provenance = Vec::with_capacity(seq.states.len());
    for &state in &seq.states {
        let clip = dbs.get(state).choose(rng).ok_or(FusionError::EmptyDatabase(state))?;
        audio.push(clip.audio.view());
        visual.push(clip.visual.view());
        provenance.push(Provenance {
            state,
            source_video: clip.source_video.clone(),
            seg_range: clip.seg_range,
        });
    }
    let audio: Array2<f32> = concatenate(Axis(0), &audio).expect("clips share d_a");
    let visual: Array3<f32> = concatenate(Axis(0), &visual).expect("clips share S and d_v");
    let record = VideoRecord {
        id: new_id,
        audio,
        visual,
        seg_labels: seq.labels(background),
        video_label: seq.event_class,
    };
    Ok((record, provenance))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedClass {
    pub class: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Augmentation {
    /// Fused records only, in class order.
    pub dataset: Dataset,
    /// Slot provenance per fused record, aligned with `dataset.records`.
    pub provenance: Vec<Vec<Provenance>>,
    pub skipped: Vec<SkippedClass>,
}

fn class_stream(seed: u64, class: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(class as u64 + 1);
    rng
}

type Fused = (VideoRecord, Vec<Provenance>);

/// Generates `samples_per_class` fused videos for every foreground class in
/// `train`. Classes whose clips cannot form a valid sequence are skipped
/// and reported. Each class draws from its own stream of `seed`.
pub fn augment_dataset(train: &Dataset, samples_per_class: usize, seed: u64) -> Augmentation {
    let classes: BTreeSet<usize> = train
        .records
        .iter()
        .map(|r| r.video_label)
        .filter(|&c| c != BACKGROUND)
        .collect();
    let machine = StateMachine::standard();

    let per_class: Vec<Result<Vec<Fused>, SkippedClass>> = classes
        .par_iter()
        .map(|&class| {
            let dbs = build_databases(train, class, BACKGROUND);
            let available = dbs.available();
            let mut rng = class_stream(seed, class);
            (0..samples_per_class)
                .map(|n| {
                    let seq = generate_state_sequence(&machine, NUM_SEGMENTS, &available, class, &mut rng)?;
                    fuse_video(&seq, &dbs, &mut rng, format!("fused_{class}_{n}"), BACKGROUND)
                })
                .collect::<Result<Vec<_>, FusionError>>()
                .map_err(|e| SkippedClass {
                    class,
                    reason: e.to_string(),
                })
        })
        .collect();

    let mut records = Vec::new();
    let mut provenance = Vec::new();
    let mut skipped = Vec::new();
    for result in per_class {
        match result {
            Ok(videos) => {
                for (r, p) in videos {
                    records.push(r);
                    provenance.push(p);
                }
            }
            Err(skip) => {
                log::warn!("skipping class {}: {}", skip.class, skip.reason);
                skipped.push(skip);
            }
        }
    }
    Augmentation {
        dataset: Dataset::new(records, train.class_names.clone(), Split::Train),
        provenance,
        skipped,
    }
}
