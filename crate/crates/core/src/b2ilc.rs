//! Bag-to-instance label correction.
//!
//! Every maximal run of non-background hard predictions forms a bag. When one
//! class holds a strict majority above the witness-rate threshold, the whole
//! bag is relabelled to it. Background predictions are never touched.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::losses::Span;

pub const DEFAULT_WR_THRESHOLD: f64 = 0.5;

/// Per-segment predictions for one video.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSequence {
    pub probs: Option<Array2<f64>>,
    pub hard: Vec<usize>,
}

impl PredictionSequence {
    pub fn from_hard(hard: Vec<usize>) -> Self {
        PredictionSequence { probs: None, hard }
    }

    /// Hard labels are the row argmax, lowest index on ties.
    pub fn from_probs(probs: Array2<f64>) -> Self {
        let hard = argmax_rows(probs.view());
        PredictionSequence {
            probs: Some(probs),
            hard,
        }
    }

    pub fn len(&self) -> usize {
        self.hard.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hard.is_empty()
    }
}

pub fn argmax_rows(probs: ArrayView2<'_, f64>) -> Vec<usize> {
    probs
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bag {
    pub span: Span,
    pub counts: BTreeMap<usize, usize>,
}

impl Bag {
    pub fn len(&self) -> usize {
        self.span.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn form_bags(hard: &[usize], background: usize) -> Vec<Bag> {
    let mut bags = Vec::new();
    let mut t = 0;
    while t < hard.len() {
        if hard[t] == background {
            t += 1;
            continue;
        }
        let start = t;
        let mut counts = BTreeMap::new();
        while t < hard.len() && hard[t] != background {
            *counts.entry(hard[t]).or_insert(0) += 1;
            t += 1;
        }
        bags.push(Bag {
            span: Span::new(start, t - 1),
            counts,
        });
    }
    bags
}

/// Modal class and its share of the bag. A tie for the top count reports
/// no dominant class together with the tied share.
pub fn witness_rate(bag: &Bag) -> (Option<usize>, f64) {
    let top = bag.counts.values().copied().max().unwrap_or(0);
    let mut leaders = bag.counts.iter().filter(|&(_, &n)| n == top).map(|(&c, _)| c);
    let first = leaders.next();
    let dominant = if leaders.next().is_some() { None } else { first };
    (dominant, top as f64 / bag.len() as f64)
}

pub fn correct(preds: &PredictionSequence, wr_threshold: f64, background: usize) -> PredictionSequence {
    let mut out = preds.clone();
    correct_in_place(&mut out.hard, wr_threshold, background);
    out
}

pub fn correct_in_place(hard: &mut [usize], wr_threshold: f64, background: usize) {
    for bag in form_bags(hard, background) {
        if let (Some(class), wr) = witness_rate(&bag) {
            if wr > wr_threshold {
                hard[bag.span.indices()].fill(class);
            }
        }
    }
}
