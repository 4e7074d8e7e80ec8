//! State-machine-based video fusion.
//!
//! Every foreground video of a class is scanned for eight one- or
//! two-segment clip patterns (background, start, continue and end of the
//! event). A state machine then draws a new sequence of those states that
//! spans exactly `N` segments with a single event of at least two segments,
//! and each slot is filled with a random clip of that state from the class's
//! database.

mod fuse;
mod machine;
mod states;

pub use fuse::{augment_dataset, fuse_video, Augmentation, Provenance, SkippedClass};
pub use machine::{generate_state_sequence, Phase, StateMachine, StateSequence};
pub use states::{build_databases, extract_states, SegKind, State, StateClip, StateDatabases};

#[derive(Debug, thiserror::Error)]
pub enum FusionError {
    #[error("no {0} clips in the database")]
    EmptyDatabase(State),
    #[error("no valid {segments}-segment state sequence from states {available:?}")]
    NoValidSequence { segments: usize, available: Vec<State> },
    #[error("state sequence spans {found} segments, expected {expected}")]
    SequenceLength { expected: usize, found: usize },
}
