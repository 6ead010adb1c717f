//! Error type shared by every module, with the exit classification used
//! by the command-line frontend.

use crate::tick::Tick;

/// How an error maps onto a process exit code.
///
/// `Domain` errors are validation failures in otherwise readable input
/// (exit 1); `Input` errors mean a file could not be read or parsed at
/// all (exit 2); `Usage` errors are bad invocations (exit 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Domain,
    Input,
    Usage,
}

impl ExitClass {
    pub fn code(self) -> i32 {
        match self {
            ExitClass::Domain => 1,
            ExitClass::Input => 2,
            ExitClass::Usage => 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    // ---- timeline validation ----
    #[error("utterance {utterance_id:?}: reference segments {first} and {second} overlap")]
    OverlapInReference {
        utterance_id: String,
        first: usize,
        second: usize,
    },
    #[error("utterance {utterance_id:?}: segment {index} lies outside [0, {duration}]")]
    OutOfRange {
        utterance_id: String,
        index: usize,
        duration: Tick,
    },
    #[error("utterance {utterance_id:?} has zero duration")]
    EmptyTimelineDuration { utterance_id: String },
    #[error("utterance {utterance_id:?}: segment {index} has start >= end")]
    DegenerateSegment { utterance_id: String, index: usize },
    #[error("utterance {utterance_id:?}: segment {index} has confidence outside [0, 1]")]
    BadConfidence { utterance_id: String, index: usize },
    #[error("instant {t} is at or past the utterance duration {duration}")]
    InstantOutOfRange { t: Tick, duration: Tick },
    #[error("durations differ: {left:?} is {left_duration}, {right:?} is {right_duration}")]
    DurationMismatch {
        left: String,
        left_duration: Tick,
        right: String,
        right_duration: Tick,
    },
    #[error("operation requires a reference timeline, got hypothesis {utterance_id:?}")]
    ReferenceKindRequired { utterance_id: String },

    // ---- scoring / corpus ----
    #[error("empty corpus: {0}")]
    EmptyCorpus(String),
    #[error("no hypothesis for utterance {0:?}")]
    MissingHypothesis(String),
    #[error("no reference for utterance {0:?}")]
    MissingReference(String),

    // ---- framing ----
    #[error("frame sequence for {utterance_id:?} carries no posteriors")]
    MissingPosteriors { utterance_id: String },
    #[error("utterance {utterance_id:?} does not follow a single-event transition pattern")]
    InvalidReferencePattern { utterance_id: String },
    #[error(
        "frame count {frames} at stride {stride} cannot cover duration {duration} of {utterance_id:?}"
    )]
    FrameCountMismatch {
        utterance_id: String,
        frames: usize,
        stride: Tick,
        duration: Tick,
    },

    // ---- agreement ----
    #[error("Fleiss' kappa needs at least two raters, got {0}")]
    TooFewRaters(usize),
    #[error("rating table has no items")]
    EmptyRatingTable,

    // ---- simulation ----
    #[error("speaker {speaker_id:?} cannot fill pattern {pattern} after {retries} draws")]
    InsufficientClips {
        speaker_id: String,
        pattern: String,
        retries: u32,
    },
    #[error("{path}: {detail}")]
    BadWavFormat { path: String, detail: String },
    #[error("{path}: sample rate {actual} Hz, expected {expected} Hz")]
    SampleRateMismatch {
        path: String,
        expected: u32,
        actual: u32,
    },
    #[error("{path}: {actual} channels, expected mono")]
    ChannelCountMismatch { path: String, actual: u16 },
    #[error("audio signal is empty")]
    EmptyAudio,
    #[error("clip {clip_id:?}: declared duration {declared} differs from WAV header {actual}")]
    DurationHeaderMismatch {
        clip_id: String,
        declared: Tick,
        actual: Tick,
    },
    #[error("clip {clip_id:?}: file {path} not found")]
    MissingFile { clip_id: String, path: String },
    #[error("clip {clip_id:?}: sample rate {actual} Hz, manifest requires 16000 Hz")]
    BadSampleRate { clip_id: String, actual: u32 },
    #[error("simulation config: {0}")]
    BadConfig(String),

    // ---- parsing ----
    #[error("{path}:{line}: {detail}")]
    ParseError {
        path: String,
        line: usize,
        detail: String,
    },
    #[error("{context}: unknown label {label:?}")]
    UnknownLabel { context: String, label: String },
    #[error("{path}: {detail}")]
    SchemaError { path: String, detail: String },
    #[error("{utterance_id:?}: posterior row {row} sums to {sum}, expected 1")]
    PosteriorSumError {
        utterance_id: String,
        row: usize,
        sum: f64,
    },
    #[error("no duration supplied for RTTM file id {0:?}")]
    MissingDuration(String),

    // ---- I/O ----
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Classify for process exit purposes.
    pub fn exit_class(&self) -> ExitClass {
        use Error::*;
        match self {
            OverlapInReference { .. }
            | OutOfRange { .. }
            | EmptyTimelineDuration { .. }
            | DegenerateSegment { .. }
            | BadConfidence { .. }
            | InstantOutOfRange { .. }
            | DurationMismatch { .. }
            | ReferenceKindRequired { .. }
            | EmptyCorpus(_)
            | MissingHypothesis(_)
            | MissingReference(_)
            | MissingPosteriors { .. }
            | InvalidReferencePattern { .. }
            | FrameCountMismatch { .. }
            | TooFewRaters(_)
            | EmptyRatingTable
            | InsufficientClips { .. }
            | EmptyAudio
            | BadConfig(_) => ExitClass::Domain,
            BadWavFormat { .. }
            | SampleRateMismatch { .. }
            | ChannelCountMismatch { .. }
            | DurationHeaderMismatch { .. }
            | MissingFile { .. }
            | BadSampleRate { .. }
            | ParseError { .. }
            | UnknownLabel { .. }
            | SchemaError { .. }
            | PosteriorSumError { .. }
            | MissingDuration(_)
            | Io { .. } => ExitClass::Input,
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
