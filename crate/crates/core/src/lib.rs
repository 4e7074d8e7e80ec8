//! Audio-visual event localization on precomputed segment features.
//!
//! The crate is organised around the pieces of the localization pipeline:
//!
//! * [`avedata`]: video records, the `AVET` tensor blob format, JSON manifests,
//!   validation, synthetic data and stratified splits.
//! * [`edrnet`]: the event decomposition/recomposition network with its
//!   hand-written backward pass and class activation maps.
//! * [`losses`]: segment cross-entropy, the land/sea/shore patch losses and the
//!   supervised and weakly-supervised objectives.
//! * [`smbfuse`]: state-machine driven stitching of event clips into new
//!   training videos.
//! * [`b2ilc`]: bag-to-instance label correction of hard predictions.
//! * [`harness`]: training, evaluation, ablations, checkpoints and CAM export.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod avedata;
pub mod b2ilc;
pub mod edrnet;
pub mod gradcheck;
pub mod harness;
pub mod losses;
pub mod smbfuse;

pub use avedata::{Dataset, Split, VideoRecord};
pub use edrnet::{Activations, EdrConfig, ModelParams};
