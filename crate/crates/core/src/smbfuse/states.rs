use std::collections::BTreeMap;
use std::fmt;

use ndarray::{s, Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::avedata::{Dataset, VideoRecord};
use crate::losses::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegKind {
    Bg,
    Fg,
}

/// Clip states, each one or two segments long.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum State {
    BG_1,
    BG_2,
    START_1,
    START_2,
    CONTINUE_1,
    CONTINUE_2,
    END_1,
    END_2,
}

impl State {
    pub const ALL: [State; 8] = [
        State::BG_1,
        State::BG_2,
        State::START_1,
        State::START_2,
        State::CONTINUE_1,
        State::CONTINUE_2,
        State::END_1,
        State::END_2,
    ];

    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> usize {
        self.pattern().len()
    }

    /// Labels of the extracted segments.
    pub fn pattern(self) -> &'static [SegKind] {
        use SegKind::*;
        match self {
            State::BG_1 => &[Bg],
            State::BG_2 => &[Bg, Bg],
            State::START_1 => &[Fg],
            State::START_2 => &[Bg, Fg],
            State::CONTINUE_1 => &[Fg],
            State::CONTINUE_2 => &[Fg, Fg],
            State::END_1 => &[Fg],
            State::END_2 => &[Fg, Bg],
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Segments of one source video matching a state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateClip {
    pub state: State,
    pub source_video: String,
    pub seg_range: Span,
    pub audio: Array2<f32>,
    pub visual: Array3<f32>,
    pub labels: Vec<usize>,
}

/// Start indices of every occurrence of `state` in a foreground mask.
fn occurrences(state: State, fg: &[bool]) -> Vec<usize> {
    let n = fg.len();
    let at = |t: usize| fg[t];
    match state {
        State::BG_1 => (0..n).filter(|&t| !at(t)).collect(),
        State::BG_2 => (0..n.saturating_sub(1)).filter(|&t| !at(t) && !at(t + 1)).collect(),
        State::START_1 => (n > 0 && at(0)).then_some(0).into_iter().collect(),
        State::START_2 => (0..n.saturating_sub(1)).filter(|&t| !at(t) && at(t + 1)).collect(),
        State::CONTINUE_1 => (1..n.saturating_sub(1))
            .filter(|&t| at(t - 1) && at(t) && at(t + 1))
            .collect(),
        State::CONTINUE_2 => (1..n.saturating_sub(2))
            .filter(|&t| at(t - 1) && at(t) && at(t + 1) && at(t + 2))
            .collect(),
        State::END_1 => (n > 0 && at(n - 1)).then_some(n - 1).into_iter().collect(),
        State::END_2 => (0..n.saturating_sub(1)).filter(|&t| at(t) && !at(t + 1)).collect(),
    }
}

/// Every (possibly overlapping) clip of every state, grouped by state in
/// declaration order and by position within a state.
pub fn extract_states(record: &VideoRecord, background: usize) -> Vec<StateClip> {
    let fg: Vec<bool> = record.seg_labels.iter().map(|&l| l != background).collect();
    let mut out = Vec::new();
    for state in State::ALL {
        for start in occurrences(state, &fg) {
            let end = start + state.len() - 1;
            out.push(StateClip {
                state,
                source_video: record.id.clone(),
                seg_range: Span::new(start, end),
                audio: record.audio.slice(s![start..=end, ..]).to_owned(),
                visual: record.visual.slice(s![start..=end, .., ..]).to_owned(),
                labels: record.seg_labels[start..=end].to_vec(),
            });
        }
    }
    out
}

/// Clips of one event class keyed by state.
#[derive(Debug, Clone, Default)]
pub struct StateDatabases {
    pub event_class: usize,
    pub clips: BTreeMap<State, Vec<StateClip>>,
}

impl StateDatabases {
    pub fn get(&self, state: State) -> &[StateClip] {
        self.clips.get(&state).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn count(&self, state: State) -> usize {
        self.get(state).len()
    }

    /// States with at least one clip.
    pub fn available(&self) -> Vec<State> {
        State::ALL.into_iter().filter(|&s| self.count(s) > 0).collect()
    }

    pub fn counts(&self) -> BTreeMap<State, usize> {
        State::ALL.into_iter().map(|s| (s, self.count(s))).collect()
    }
}

pub fn build_databases(dataset: &Dataset, event_class: usize, background: usize) -> StateDatabases {
    let mut db = StateDatabases {
        event_class,
        clips: BTreeMap::new(),
    };
    for record in dataset.records.iter().filter(|r| r.video_label == event_class) {
        for clip in extract_states(record, background) {
            db.clips.entry(clip.state).or_default().push(clip);
        }
    }
    db
}
