use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::avedata::{Dataset, VideoRecord};
use crate::b2ilc::{correct_in_place, PredictionSequence};
use crate::edrnet::{branch_probs, forward, Branch, EdrConfig, ModelInput, ModelParams};

/// Segment-level accuracy summary. `confusion[truth][predicted]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub segment_accuracy: f64,
    /// Accuracy per ground-truth class that occurs at least once.
    pub per_class_accuracy: BTreeMap<usize, f64>,
    pub confusion: Vec<Vec<u64>>,
    pub n_segments: u64,
}

impl EvalReport {
    pub fn from_labels<'a, I>(pairs: I, classes: usize) -> Self
    where
        I: IntoIterator<Item = (&'a [usize], &'a [usize])>,
    {
        let mut confusion = vec![vec![0u64; classes]; classes];
        for (truth, pred) in pairs {
            assert_eq!(truth.len(), pred.len(), "prediction length differs from labels");
            for (&t, &p) in truth.iter().zip(pred) {
                confusion[t][p] += 1;
            }
        }
        let n_segments: u64 = confusion.iter().flatten().sum();
        let correct: u64 = (0..classes).map(|c| confusion[c][c]).sum();
        let per_class_accuracy = confusion
            .iter()
            .enumerate()
            .filter_map(|(c, row)| {
                let n: u64 = row.iter().sum();
                (n > 0).then(|| (c, row[c] as f64 / n as f64))
            })
            .collect();
        EvalReport {
            segment_accuracy: if n_segments == 0 {
                0.0
            } else {
                correct as f64 / n_segments as f64
            },
            per_class_accuracy,
            confusion,
            n_segments,
        }
    }
}

/// Which classifier input produces the predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    /// The model output: gated features, or the sole modal branch.
    Fused,
    /// A modal branch's final recomposition features.
    Branch(Branch),
}

pub fn predict(
    record: &VideoRecord,
    params: &ModelParams,
    cfg: &EdrConfig,
    head: Head,
) -> Result<PredictionSequence, HarnessError> {
    let acts = forward(&ModelInput::from(record), cfg, params)?;
    let probs = match head {
        Head::Fused => acts.probs,
        Head::Branch(b) => branch_probs(&acts, params, b).ok_or(crate::edrnet::ModelError::BranchDisabled(b))?,
    };
    Ok(PredictionSequence::from_probs(probs))
}

/// Scores hard predictions against the dataset's segment labels, optionally
/// after label correction with the given witness-rate threshold.
pub fn evaluate_predictions(
    dataset: &Dataset,
    predictions: &[Vec<usize>],
    classes: usize,
    b2ilc: Option<f64>,
) -> Result<EvalReport, HarnessError> {
    if predictions.len() != dataset.len() {
        return Err(HarnessError::Config(format!(
            "{} prediction sequences for {} records",
            predictions.len(),
            dataset.len()
        )));
    }
    let background = classes - 1;
    let mut preds = predictions.to_vec();
    for (p, r) in preds.iter_mut().zip(&dataset.records) {
        if p.len() != r.seg_labels.len() || p.iter().any(|&c| c >= classes) {
            return Err(HarnessError::Config(format!("malformed predictions for {}", r.id)));
        }
        if let Some(wr) = b2ilc {
            correct_in_place(p, wr, background);
        }
    }
    Ok(EvalReport::from_labels(
        dataset
            .records
            .iter()
            .zip(&preds)
            .map(|(r, p)| (r.seg_labels.as_slice(), p.as_slice())),
        classes,
    ))
}

pub fn predict_dataset(
    dataset: &Dataset,
    params: &ModelParams,
    cfg: &EdrConfig,
    head: Head,
) -> Result<Vec<PredictionSequence>, HarnessError> {
    dataset
        .records
        .par_iter()
        .map(|r| predict(r, params, cfg, head))
        .collect()
}

/// Argmax predictions of the model, optionally corrected, scored per segment.
pub fn evaluate(
    dataset: &Dataset,
    params: &ModelParams,
    cfg: &EdrConfig,
    b2ilc: Option<f64>,
) -> Result<EvalReport, HarnessError> {
    evaluate_head(dataset, params, cfg, Head::Fused, b2ilc)
}

pub fn evaluate_head(
    dataset: &Dataset,
    params: &ModelParams,
    cfg: &EdrConfig,
    head: Head,
    b2ilc: Option<f64>,
) -> Result<EvalReport, HarnessError> {
    let hard: Vec<Vec<usize>> = predict_dataset(dataset, params, cfg, head)?
        .into_iter()
        .map(|p| p.hard)
        .collect();
    evaluate_predictions(dataset, &hard, cfg.classes, b2ilc)
}
