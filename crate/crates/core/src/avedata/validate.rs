use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{VideoRecord, BACKGROUND, NUM_CLASSES, NUM_SEGMENTS};

/// Minimum length of a foreground run, in segments.
pub const MIN_EVENT_LEN: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modality {
    Audio,
    Visual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    SegmentCount {
        expected: usize,
        found: usize,
    },
    FeatureRows {
        modality: Modality,
        expected: usize,
        found: usize,
    },
    LabelOutOfRange {
        segment: usize,
        label: usize,
    },
    VideoLabelOutOfRange {
        label: usize,
    },
    MultipleEventClasses {
        classes: Vec<usize>,
    },
    VideoLabelMismatch {
        expected: usize,
        found: usize,
    },
    ShortEvent {
        start: usize,
        len: usize,
    },
    NonFinite {
        modality: Modality,
        segment: usize,
        index: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SegmentCount { expected, found } => {
                write!(f, "segment count: expected {expected}, found {found}")
            }
            Violation::FeatureRows {
                modality,
                expected,
                found,
            } => {
                write!(f, "{modality:?} feature rows: expected {expected}, found {found}")
            }
            Violation::LabelOutOfRange { segment, label } => {
                write!(f, "label range: segment {segment} has label {label}")
            }
            Violation::VideoLabelOutOfRange { label } => {
                write!(f, "label range: video label {label}")
            }
            Violation::MultipleEventClasses { classes } => {
                write!(f, "single event: foreground classes {classes:?}")
            }
            Violation::VideoLabelMismatch { expected, found } => {
                write!(f, "video label: expected {expected}, found {found}")
            }
            Violation::ShortEvent { start, len } => {
                write!(f, "min event length: run at {start} has length {len}")
            }
            Violation::NonFinite {
                modality,
                segment,
                index,
            } => {
                write!(f, "finiteness: {modality:?} value at segment {segment}, index {index}")
            }
        }
    }
}

/// Checks every record invariant; an empty list means the record is valid.
pub fn validate_record(record: &VideoRecord) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = record.seg_labels.len();
    if n != NUM_SEGMENTS {
        out.push(Violation::SegmentCount {
            expected: NUM_SEGMENTS,
            found: n,
        });
    }
    let audio_rows = record.audio.nrows();
    if audio_rows != n {
        out.push(Violation::FeatureRows {
            modality: Modality::Audio,
            expected: n,
            found: audio_rows,
        });
    }
    let visual_rows = record.visual.dim().0;
    if visual_rows != n {
        out.push(Violation::FeatureRows {
            modality: Modality::Visual,
            expected: n,
            found: visual_rows,
        });
    }

    for (t, &label) in record.seg_labels.iter().enumerate() {
        if label >= NUM_CLASSES {
            out.push(Violation::LabelOutOfRange { segment: t, label });
        }
    }
    if record.video_label >= NUM_CLASSES {
        out.push(Violation::VideoLabelOutOfRange {
            label: record.video_label,
        });
    }

    let foreground: BTreeSet<usize> = record
        .seg_labels
        .iter()
        .copied()
        .filter(|&l| l != BACKGROUND && l < NUM_CLASSES)
        .collect();
    match foreground.len() {
        0 if record.video_label != BACKGROUND => out.push(Violation::VideoLabelMismatch {
            expected: BACKGROUND,
            found: record.video_label,
        }),
        1 => {
            let expected = *foreground.iter().next().unwrap();
            if record.video_label != expected {
                out.push(Violation::VideoLabelMismatch {
                    expected,
                    found: record.video_label,
                });
            }
        }
        0 => {}
        _ => out.push(Violation::MultipleEventClasses {
            classes: foreground.into_iter().collect(),
        }),
    }

    let mut t = 0;
    while t < n {
        if record.seg_labels[t] == BACKGROUND {
            t += 1;
            continue;
        }
        let start = t;
        while t < n && record.seg_labels[t] != BACKGROUND {
            t += 1;
        }
        if t - start < MIN_EVENT_LEN {
            out.push(Violation::ShortEvent { start, len: t - start });
        }
    }

    for ((t, i), v) in record.audio.indexed_iter() {
        if !v.is_finite() {
            out.push(Violation::NonFinite {
                modality: Modality::Audio,
                segment: t,
                index: i,
            });
        }
    }
    let d = record.visual.dim().2;
    for ((t, p, c), v) in record.visual.indexed_iter() {
        if !v.is_finite() {
            out.push(Violation::NonFinite {
                modality: Modality::Visual,
                segment: t,
                index: p * d + c,
            });
        }
    }
    out
}
