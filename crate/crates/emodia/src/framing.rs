//! Conversion between interval timelines and fixed-stride frame-label
//! sequences, confidence masking, and emotion-transition patterns.

use crate::error::{Error, Result};
use crate::tick::Tick;
use crate::timeline::{EmotionLabel, ParseMode, Segment, Timeline, TimelineKind};

/// Frame geometry. The stride is the hop between adjacent frame
/// labels; the receptive field is informational (how much signal the
/// upstream classifier saw per frame) and plays no role in conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSpec {
    pub stride: Tick,
    pub receptive_field: Tick,
}

impl Default for FrameSpec {
    fn default() -> FrameSpec {
        FrameSpec {
            stride: Tick::from_millis(20),
            receptive_field: Tick::from_millis(25),
        }
    }
}

impl FrameSpec {
    pub fn with_stride(stride: Tick) -> FrameSpec {
        FrameSpec {
            stride,
            ..FrameSpec::default()
        }
    }
}

/// Per-class posterior vector in the fixed order (happy, sad, angry, null).
pub type Posteriors = [f64; 4];

const POSTERIOR_SUM_TOLERANCE: f64 = 1e-6;

/// A fixed-stride sequence of per-frame labels; `None` is the null
/// state. The final frame may cover less than one stride.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    utterance_id: String,
    spec: FrameSpec,
    duration: Tick,
    labels: Vec<Option<EmotionLabel>>,
    posteriors: Option<Vec<Posteriors>>,
}

impl FrameSequence {
    pub fn new(
        utterance_id: impl Into<String>,
        spec: FrameSpec,
        duration: Tick,
        labels: Vec<Option<EmotionLabel>>,
        posteriors: Option<Vec<Posteriors>>,
    ) -> Result<FrameSequence> {
        let utterance_id = utterance_id.into();
        if spec.stride.is_zero() {
            return Err(Error::BadConfig("frame stride must be positive".to_owned()));
        }
        let expected = duration.frames_at(spec.stride) as usize;
        if labels.len() != expected {
            return Err(Error::FrameCountMismatch {
                utterance_id,
                frames: labels.len(),
                stride: spec.stride,
                duration,
            });
        }
        if let Some(p) = &posteriors {
            if p.len() != labels.len() {
                return Err(Error::FrameCountMismatch {
                    utterance_id,
                    frames: p.len(),
                    stride: spec.stride,
                    duration,
                });
            }
            for (row, v) in p.iter().enumerate() {
                let sum: f64 = v.iter().sum();
                if (sum - 1.0).abs() > POSTERIOR_SUM_TOLERANCE {
                    return Err(Error::PosteriorSumError {
                        utterance_id,
                        row,
                        sum,
                    });
                }
            }
        }
        Ok(FrameSequence {
            utterance_id,
            spec,
            duration,
            labels,
            posteriors,
        })
    }

    pub fn utterance_id(&self) -> &str {
        &self.utterance_id
    }

    pub fn spec(&self) -> FrameSpec {
        self.spec
    }

    pub fn duration(&self) -> Tick {
        self.duration
    }

    pub fn labels(&self) -> &[Option<EmotionLabel>] {
        &self.labels
    }

    pub fn posteriors(&self) -> Option<&[Posteriors]> {
        self.posteriors.as_deref()
    }

    /// Re-anchor to an externally known duration (frame-hypothesis
    /// files carry no duration of their own, only a frame count). The
    /// target must need exactly this many frames at the stride.
    pub fn with_duration(mut self, duration: Tick) -> Result<FrameSequence> {
        let expected = duration.frames_at(self.spec.stride) as usize;
        if self.labels.len() != expected {
            return Err(Error::FrameCountMismatch {
                utterance_id: self.utterance_id,
                frames: self.labels.len(),
                stride: self.spec.stride,
                duration,
            });
        }
        self.duration = duration;
        Ok(self)
    }
}

/// A maximal run of one label (`None` = null). The length counts
/// frames or ticks depending on the producer; pattern classification
/// ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub label: Option<EmotionLabel>,
    pub len: u64,
}

/// The shape of an utterance containing a single emotional event:
/// the event spans the whole utterance, starts it, ends it, or sits in
/// the middle. Everything else is `Invalid`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionPattern {
    Emo(EmotionLabel),
    NullEmo(EmotionLabel),
    EmoNull(EmotionLabel),
    NullEmoNull(EmotionLabel),
    Invalid,
}

impl TransitionPattern {
    pub fn emotion(self) -> Option<EmotionLabel> {
        match self {
            TransitionPattern::Emo(e)
            | TransitionPattern::NullEmo(e)
            | TransitionPattern::EmoNull(e)
            | TransitionPattern::NullEmoNull(e) => Some(e),
            TransitionPattern::Invalid => None,
        }
    }

    /// Position among the four valid shapes, in the fixed reporting
    /// order: emo, null-emo, emo-null, null-emo-null.
    pub fn shape_index(self) -> Option<usize> {
        match self {
            TransitionPattern::Emo(_) => Some(0),
            TransitionPattern::NullEmo(_) => Some(1),
            TransitionPattern::EmoNull(_) => Some(2),
            TransitionPattern::NullEmoNull(_) => Some(3),
            TransitionPattern::Invalid => None,
        }
    }

    /// All twelve valid patterns in reporting order (emotion-major).
    pub fn all_valid() -> impl Iterator<Item = TransitionPattern> {
        EmotionLabel::ALL.into_iter().flat_map(|e| {
            [
                TransitionPattern::Emo(e),
                TransitionPattern::NullEmo(e),
                TransitionPattern::EmoNull(e),
                TransitionPattern::NullEmoNull(e),
            ]
        })
    }
}

impl std::fmt::Display for TransitionPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransitionPattern::Emo(e) => write!(f, "{e}"),
            TransitionPattern::NullEmo(e) => write!(f, "null-{e}"),
            TransitionPattern::EmoNull(e) => write!(f, "{e}-null"),
            TransitionPattern::NullEmoNull(e) => write!(f, "null-{e}-null"),
            TransitionPattern::Invalid => f.write_str("invalid"),
        }
    }
}

/// Contiguous (label, start, end) spans covering `[0, duration)`,
/// gaps included as null spans. Rejects overlapping timelines.
fn spans(timeline: &Timeline) -> Result<Vec<(Option<EmotionLabel>, Tick, Tick)>> {
    let mut out = Vec::new();
    let mut cursor = Tick::ZERO;
    for (i, seg) in timeline.segments().iter().enumerate() {
        if seg.start < cursor {
            return Err(Error::OverlapInReference {
                utterance_id: timeline.utterance_id().to_owned(),
                first: i.saturating_sub(1),
                second: i,
            });
        }
        if seg.start > cursor {
            out.push((None, cursor, seg.start));
        }
        out.push((Some(seg.label), seg.start, seg.end));
        cursor = seg.end;
    }
    if cursor < timeline.duration() {
        out.push((None, cursor, timeline.duration()));
    }
    Ok(out)
}

/// Label each frame with the candidate (emotion or null) covering the
/// most time inside it. Exact ties go to the candidate appearing
/// earliest in the frame, then to the lexicographically smaller name.
/// The final partial frame is labeled over its actual extent.
pub fn intervals_to_frames(timeline: &Timeline, spec: FrameSpec) -> Result<FrameSequence> {
    if spec.stride.is_zero() {
        return Err(Error::BadConfig("frame stride must be positive".to_owned()));
    }
    let duration = timeline.duration();
    let stride = spec.stride.get();
    let n_frames = duration.frames_at(spec.stride) as usize;

    // Candidate index 0..3 = emotions, 3 = null.
    const NULL: usize = 3;
    let candidate_name =
        |c: usize| -> &'static str { EmotionLabel::from_index(c).map_or("null", |l| l.name()) };

    let mut coverage = vec![[0u64; 4]; n_frames];
    let mut onset = vec![[u64::MAX; 4]; n_frames];

    for (label, start, end) in spans(timeline)? {
        let c = label.map_or(NULL, |l| l.index());
        let first_frame = (start.get() / stride) as usize;
        let last_frame = ((end.get() - 1) / stride) as usize;
        for frame in first_frame..=last_frame {
            let f_start = frame as u64 * stride;
            let f_end = (f_start + stride).min(duration.get());
            let lo = start.get().max(f_start);
            let hi = end.get().min(f_end);
            if hi > lo {
                coverage[frame][c] += hi - lo;
                onset[frame][c] = onset[frame][c].min(lo);
            }
        }
    }

    let labels = (0..n_frames)
        .map(|frame| {
            let best = (0..4)
                .filter(|&c| coverage[frame][c] > 0)
                .max_by(|&a, &b| {
                    coverage[frame][a]
                        .cmp(&coverage[frame][b])
                        .then(onset[frame][b].cmp(&onset[frame][a]))
                        .then(candidate_name(b).cmp(candidate_name(a)))
                })
                .expect("every frame has at least one covering candidate");
            EmotionLabel::from_index(best)
        })
        .collect();

    FrameSequence::new(timeline.utterance_id(), spec, duration, labels, None)
}

/// Maximal runs of identical non-null frame labels become hypothesis
/// segments; null runs become gaps.
pub fn frames_to_intervals(frames: &FrameSequence) -> Result<Timeline> {
    let stride = frames.spec().stride.get();
    let duration = frames.duration();
    let mut segments = Vec::new();
    let mut run_start = 0usize;
    let labels = frames.labels();
    for i in 0..=labels.len() {
        let run_over = i == labels.len() || labels[i] != labels[run_start];
        if run_over {
            if let Some(label) = labels[run_start] {
                let start = Tick::new(run_start as u64 * stride);
                let end = Tick::new((i as u64 * stride).min(duration.get()));
                segments.push(Segment::new(label, start, end));
            }
            if i == labels.len() {
                break;
            }
            run_start = i;
        }
    }
    Timeline::normalize(
        frames.utterance_id(),
        segments,
        duration,
        TimelineKind::Hypothesis,
        ParseMode::Strict,
    )
}

/// Run-length encoding of the frame labels. Concatenating the runs
/// reproduces the input.
pub fn collapse_runs(frames: &FrameSequence) -> Vec<Run> {
    collapse_labels(frames.labels().iter().copied().map(|l| (l, 1)))
}

/// Maximal constant-label spans of a non-overlapping timeline, with
/// lengths in ticks.
pub fn timeline_runs(timeline: &Timeline) -> Result<Vec<Run>> {
    Ok(collapse_labels(
        spans(timeline)?
            .into_iter()
            .map(|(label, start, end)| (label, (end - start).get())),
    ))
}

fn collapse_labels(items: impl IntoIterator<Item = (Option<EmotionLabel>, u64)>) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for (label, len) in items {
        match runs.last_mut() {
            Some(run) if run.label == label => run.len += len,
            _ => runs.push(Run { label, len }),
        }
    }
    runs
}

/// Map a run sequence onto one of the four single-event shapes.
/// Anything else (no event, two emotions, event split by null, more
/// than three runs) is `Invalid` — a value, not an error.
pub fn classify_transition(runs: &[Run]) -> TransitionPattern {
    // Coalesce adjacent equal labels so the result depends only on the
    // label sequence.
    let seq: Vec<Option<EmotionLabel>> = collapse_labels(runs.iter().map(|r| (r.label, r.len)))
        .into_iter()
        .filter(|r| r.len > 0)
        .map(|r| r.label)
        .collect();
    match seq.as_slice() {
        [Some(e)] => TransitionPattern::Emo(*e),
        [None, Some(e)] => TransitionPattern::NullEmo(*e),
        [Some(e), None] => TransitionPattern::EmoNull(*e),
        [None, Some(e), None] => TransitionPattern::NullEmoNull(*e),
        _ => TransitionPattern::Invalid,
    }
}

/// Null out frames whose top-class posterior falls below the
/// threshold. Posteriors are preserved.
pub fn apply_confidence_mask(frames: &FrameSequence, threshold: f64) -> Result<FrameSequence> {
    let Some(posteriors) = frames.posteriors() else {
        return Err(Error::MissingPosteriors {
            utterance_id: frames.utterance_id().to_owned(),
        });
    };
    let labels = frames
        .labels()
        .iter()
        .zip(posteriors)
        .map(|(&label, p)| {
            let top = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if top < threshold {
                None
            } else {
                label
            }
        })
        .collect();
    FrameSequence::new(
        frames.utterance_id(),
        frames.spec(),
        frames.duration(),
        labels,
        Some(posteriors.to_vec()),
    )
}

/// One row of the transition-prediction table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionRow {
    pub pattern: TransitionPattern,
    /// Utterances whose reference follows this pattern.
    pub tn: u64,
    /// Of those, utterances whose hypothesis pattern matches exactly
    /// (same shape and same emotion).
    pub cn: u64,
}

impl TransitionRow {
    pub fn accuracy(&self) -> Option<f64> {
        (self.tn > 0).then(|| self.cn as f64 / self.tn as f64)
    }
}

/// The full 12-row pattern table plus totals.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    pub rows: Vec<TransitionRow>,
    pub total_tn: u64,
    pub total_cn: u64,
}

impl TransitionTable {
    pub fn total_accuracy(&self) -> Option<f64> {
        (self.total_tn > 0).then(|| self.total_cn as f64 / self.total_tn as f64)
    }
}

/// Score transition predictions: a hypothesis counts as correct only
/// when its collapsed pattern equals the reference pattern exactly.
/// Reference patterns come from framing the reference at `spec`.
pub fn transition_accuracy(
    pairs: &[(Timeline, FrameSequence)],
    spec: FrameSpec,
) -> Result<TransitionTable> {
    let mut rows: Vec<TransitionRow> = TransitionPattern::all_valid()
        .map(|pattern| TransitionRow {
            pattern,
            tn: 0,
            cn: 0,
        })
        .collect();

    for (reference, hyp_frames) in pairs {
        let ref_frames = intervals_to_frames(reference, spec)?;
        let ref_pattern = classify_transition(&collapse_runs(&ref_frames));
        if ref_pattern == TransitionPattern::Invalid {
            return Err(Error::InvalidReferencePattern {
                utterance_id: reference.utterance_id().to_owned(),
            });
        }
        let hyp_pattern = classify_transition(&collapse_runs(hyp_frames));
        let row = rows
            .iter_mut()
            .find(|r| r.pattern == ref_pattern)
            .expect("all valid patterns are present");
        row.tn += 1;
        if hyp_pattern == ref_pattern {
            row.cn += 1;
        }
    }

    let total_tn = rows.iter().map(|r| r.tn).sum();
    let total_cn = rows.iter().map(|r| r.cn).sum();
    Ok(TransitionTable {
        rows,
        total_tn,
        total_cn,
    })
}
