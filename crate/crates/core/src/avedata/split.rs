use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, Split};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitFractions {
    pub fn new(train: f64, val: f64, test: f64) -> Self {
        SplitFractions { train, val, test }
    }
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions::new(0.8, 0.1, 0.1)
    }
}

/// Class-stratified split on `video_label`. Within each class the records
/// are shuffled with the seed and cut at `round(f * n)`; each output keeps
/// the input's record order.
pub fn split_dataset(
    dataset: &Dataset,
    fractions: SplitFractions,
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset), DataError> {
    let SplitFractions { train, val, test } = fractions;
    let all = [train, val, test];
    if all.iter().any(|f| !f.is_finite() || *f < 0.0) || ((train + val + test) - 1.0).abs() > 1e-9 {
        return Err(DataError::InvalidConfig(format!(
            "split fractions must be non-negative and sum to 1, got ({train}, {val}, {test})"
        )));
    }

    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, r) in dataset.records.iter().enumerate() {
        by_class.entry(r.video_label).or_default().push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![Split::Train; dataset.len()];
    for indices in by_class.values_mut() {
        indices.shuffle(&mut rng);
        let n = indices.len();
        let n_train = ((train * n as f64).round() as usize).min(n);
        let n_val = ((val * n as f64).round() as usize).min(n - n_train);
        for (rank, &i) in indices.iter().enumerate() {
            assignment[i] = if rank < n_train {
                Split::Train
            } else if rank < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
        }
    }

    let pick = |split: Split| {
        let records = dataset
            .records
            .iter()
            .zip(&assignment)
            .filter(|(_, &s)| s == split)
            .map(|(r, _)| r.clone())
            .collect();
        Dataset::new(records, dataset.class_names.clone(), split)
    };
    Ok((pick(Split::Train), pick(Split::Val), pick(Split::Test)))
}
