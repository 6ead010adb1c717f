//! Speech emotion diarization toolkit: scoring, transition analysis,
//! inter-annotator agreement, and training-corpus simulation.
//!
//! The task: given an utterance, find which of the three emotional
//! events (happy, sad, angry) occur and the time intervals where each
//! appears; everything outside those intervals is the neutral state.
//! This crate evaluates such annotations and builds fine-grained
//! training data from utterance-level corpora:
//!
//! - [`timeline`] — exact tick-based interval timelines and the region
//!   sweep shared by all scoring.
//! - [`metrics`] — the emotion diarization error rate
//!   (false alarm + miss + confusion + overlap over duration) and
//!   corpus aggregation.
//! - [`framing`] — interval/frame conversion, confidence masking, and
//!   transition-pattern analysis.
//! - [`agreement`] — frame-wise Fleiss' kappa across annotators.
//! - [`sim`] — seeded same-speaker clip concatenation with exact
//!   ground-truth boundaries, plus silence screening.
//! - [`io`] — interval JSON, frame-hypothesis JSON, RTTM, manifests;
//!   canonical byte-stable writing.
//! - [`report`] — dataset statistics and text/CSV/JSON rendering.
//! - [`cli`] — the `emodia` command-line frontend.
//!
//! Time is held as integer ticks of 100 µs ([`tick::Tick`]), so sweep
//! arithmetic is exact and file round-trips are lossless at 4-decimal
//! second formatting.

pub mod agreement;
pub mod cli;
pub mod error;
pub mod framing;
pub mod io;
pub mod metrics;
pub mod prng;
pub mod report;
pub mod sim;
pub mod tick;
pub mod timeline;

pub use error::{Error, ExitClass, Result};
pub use tick::Tick;
pub use timeline::{EmotionLabel, LabelSet, ParseMode, Segment, Timeline, TimelineKind};
