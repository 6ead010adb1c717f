//! Labeled interval timelines over an utterance of known duration.
//!
//! Segments use the half-open convention `[start, end)`: adjacent
//! segments partition time without double counting. The neutral state
//! is the absence of a segment, never a stored label, so a gap in a
//! timeline means "null". References never overlap; hypotheses may.

use crate::error::{Error, Result};
use crate::tick::Tick;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

/// One of the three emotional events. Neutral is not a label: it is
/// the absence of any segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmotionLabel {
    Happy,
    Sad,
    Angry,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 3] =
        [EmotionLabel::Happy, EmotionLabel::Sad, EmotionLabel::Angry];

    pub fn name(self) -> &'static str {
        match self {
            EmotionLabel::Happy => "happy",
            EmotionLabel::Sad => "sad",
            EmotionLabel::Angry => "angry",
        }
    }

    /// Fixed class index used for posterior vectors: (happy, sad, angry, null).
    pub fn index(self) -> usize {
        match self {
            EmotionLabel::Happy => 0,
            EmotionLabel::Sad => 1,
            EmotionLabel::Angry => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<EmotionLabel> {
        EmotionLabel::ALL.get(index).copied()
    }
}

// Ordered by label name so that sorting matches the documented
// (start, end, label name) segment order.
impl Ord for EmotionLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.name().cmp(other.name())
    }
}

impl PartialOrd for EmotionLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmotionLabel {
    type Err = Error;

    /// The label set is closed; unknown names are parse errors.
    fn from_str(s: &str) -> Result<EmotionLabel> {
        match s {
            "happy" => Ok(EmotionLabel::Happy),
            "sad" => Ok(EmotionLabel::Sad),
            "angry" => Ok(EmotionLabel::Angry),
            other => Err(Error::UnknownLabel {
                context: "emotion label".to_owned(),
                label: other.to_owned(),
            }),
        }
    }
}

/// A small set of emotion labels, as returned by instant-wise queries.
/// Iteration order is the fixed class order (happy, sad, angry).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LabelSet(u8);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn singleton(label: EmotionLabel) -> LabelSet {
        let mut s = LabelSet::EMPTY;
        s.insert(label);
        s
    }

    pub fn insert(&mut self, label: EmotionLabel) {
        self.0 |= 1 << label.index();
    }

    pub fn remove(&mut self, label: EmotionLabel) {
        self.0 &= !(1 << label.index());
    }

    pub fn contains(self, label: EmotionLabel) -> bool {
        self.0 & (1 << label.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = EmotionLabel> {
        EmotionLabel::ALL
            .into_iter()
            .filter(move |l| self.contains(*l))
    }
}

impl FromIterator<EmotionLabel> for LabelSet {
    fn from_iter<I: IntoIterator<Item = EmotionLabel>>(iter: I) -> LabelSet {
        let mut s = LabelSet::EMPTY;
        for l in iter {
            s.insert(l);
        }
        s
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// Whether a timeline is a ground-truth annotation or a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimelineKind {
    Reference,
    Hypothesis,
}

/// How much repair `normalize` may apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Any out-of-range, degenerate, or (for references) overlapping
    /// segment is an error.
    #[default]
    Strict,
    /// Segments extending past the duration are clipped, degenerate
    /// segments are dropped, and touching or overlapping same-label
    /// segments are merged.
    Lenient,
}

/// A labeled half-open time interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub label: EmotionLabel,
    pub start: Tick,
    pub end: Tick,
    pub confidence: Option<f64>,
}

impl Segment {
    pub fn new(label: EmotionLabel, start: Tick, end: Tick) -> Segment {
        Segment {
            label,
            start,
            end,
            confidence: None,
        }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Segment {
        self.confidence = Some(confidence);
        self
    }

    pub fn length(&self) -> Tick {
        self.end.saturating_sub(self.start)
    }

    fn sort_key(&self) -> (Tick, Tick, &'static str) {
        (self.start, self.end, self.label.name())
    }
}

/// A validated, ordered set of labeled segments over an utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    utterance_id: String,
    duration: Tick,
    segments: Vec<Segment>,
    kind: TimelineKind,
}

impl Timeline {
    /// Validate raw segments into a timeline. This is the only way to
    /// construct one, so every `Timeline` upholds the ordering,
    /// in-range, and (for references) non-overlap invariants.
    pub fn normalize(
        utterance_id: impl Into<String>,
        raw_segments: Vec<Segment>,
        duration: Tick,
        kind: TimelineKind,
        mode: ParseMode,
    ) -> Result<Timeline> {
        let utterance_id = utterance_id.into();
        if duration.is_zero() {
            return Err(Error::EmptyTimelineDuration { utterance_id });
        }

        let mut segments = Vec::with_capacity(raw_segments.len());
        for (index, mut seg) in raw_segments.into_iter().enumerate() {
            if seg.start >= seg.end {
                match mode {
                    ParseMode::Strict => {
                        return Err(Error::DegenerateSegment {
                            utterance_id,
                            index,
                        })
                    }
                    ParseMode::Lenient => continue,
                }
            }
            if seg.end > duration {
                match mode {
                    ParseMode::Strict => {
                        return Err(Error::OutOfRange {
                            utterance_id,
                            index,
                            duration,
                        })
                    }
                    ParseMode::Lenient => {
                        if seg.start >= duration {
                            continue;
                        }
                        seg.end = duration;
                    }
                }
            }
            if let Some(c) = seg.confidence {
                if !(0.0..=1.0).contains(&c) {
                    match mode {
                        ParseMode::Strict => {
                            return Err(Error::BadConfidence {
                                utterance_id,
                                index,
                            })
                        }
                        ParseMode::Lenient => {
                            seg.confidence = if c.is_nan() {
                                None
                            } else {
                                Some(c.clamp(0.0, 1.0))
                            };
                        }
                    }
                }
            }
            segments.push(seg);
        }

        segments.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

        if mode == ParseMode::Lenient {
            segments = merge_same_label(segments);
        }

        if kind == TimelineKind::Reference {
            // Sorted by start, so any overlap shows up between neighbours.
            for i in 1..segments.len() {
                if segments[i].start < segments[i - 1].end {
                    return Err(Error::OverlapInReference {
                        utterance_id,
                        first: i - 1,
                        second: i,
                    });
                }
            }
        }

        Ok(Timeline {
            utterance_id,
            duration,
            segments,
            kind,
        })
    }

    /// An empty timeline (all null) of the given duration.
    pub fn empty(
        utterance_id: impl Into<String>,
        duration: Tick,
        kind: TimelineKind,
    ) -> Result<Timeline> {
        Timeline::normalize(utterance_id, Vec::new(), duration, kind, ParseMode::Strict)
    }

    pub fn utterance_id(&self) -> &str {
        &self.utterance_id
    }

    pub fn duration(&self) -> Tick {
        self.duration
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn kind(&self) -> TimelineKind {
        self.kind
    }

    /// Reinterpret as a hypothesis (used when a reference serves as its
    /// own perfect hypothesis).
    pub fn as_hypothesis(&self) -> Timeline {
        Timeline {
            kind: TimelineKind::Hypothesis,
            ..self.clone()
        }
    }

    /// Total time covered by at least one segment.
    pub fn emotional_duration(&self) -> Tick {
        // Segments are sorted by start; walk a coverage cursor so that
        // overlapping hypothesis segments are not double counted.
        let mut covered = Tick::ZERO;
        let mut cursor = Tick::ZERO;
        for seg in &self.segments {
            let from = seg.start.max(cursor);
            if seg.end > from {
                covered = covered + (seg.end - from);
                cursor = seg.end;
            }
        }
        covered
    }

    /// All labels whose segment contains instant `t` (half-open).
    /// The empty set denotes the null state.
    pub fn label_at(&self, t: Tick) -> Result<LabelSet> {
        if t >= self.duration {
            return Err(Error::InstantOutOfRange {
                t,
                duration: self.duration,
            });
        }
        let mut set = LabelSet::EMPTY;
        for seg in &self.segments {
            if seg.start > t {
                break;
            }
            if t < seg.end {
                set.insert(seg.label);
            }
        }
        Ok(set)
    }
}

/// Merge touching or overlapping same-label segments (lenient repair).
/// Input must be sorted; output is re-sorted.
fn merge_same_label(segments: Vec<Segment>) -> Vec<Segment> {
    let mut merged: Vec<Segment> = Vec::with_capacity(segments.len());
    for label in [EmotionLabel::Angry, EmotionLabel::Happy, EmotionLabel::Sad] {
        let mut run: Option<Segment> = None;
        for seg in segments.iter().filter(|s| s.label == label) {
            match &mut run {
                Some(cur) if seg.start <= cur.end => {
                    cur.end = cur.end.max(seg.end);
                    if cur.confidence != seg.confidence {
                        cur.confidence = None;
                    }
                }
                Some(cur) => {
                    merged.push(*cur);
                    run = Some(*seg);
                }
                None => run = Some(*seg),
            }
        }
        if let Some(cur) = run {
            merged.push(cur);
        }
    }
    merged.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    merged
}

/// One maximal homogeneous region of a reference/hypothesis pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub start: Tick,
    pub end: Tick,
    pub ref_label: Option<EmotionLabel>,
    pub hyp_labels: LabelSet,
}

impl Region {
    pub fn length(&self) -> Tick {
        self.end - self.start
    }
}

/// Partition `[0, duration)` into regions where both the reference
/// label and the hypothesis label set are constant. Region boundaries
/// are exactly the union of all segment endpoints plus 0 and the
/// duration, so the result is exact: no discretization is involved.
pub fn boundary_sweep(reference: &Timeline, hypothesis: &Timeline) -> Result<Vec<Region>> {
    if reference.kind() != TimelineKind::Reference {
        return Err(Error::ReferenceKindRequired {
            utterance_id: reference.utterance_id().to_owned(),
        });
    }
    if reference.duration() != hypothesis.duration() {
        return Err(Error::DurationMismatch {
            left: reference.utterance_id().to_owned(),
            left_duration: reference.duration(),
            right: hypothesis.utterance_id().to_owned(),
            right_duration: hypothesis.duration(),
        });
    }
    let duration = reference.duration();

    let mut boundaries = BTreeSet::new();
    boundaries.insert(Tick::ZERO);
    boundaries.insert(duration);
    for seg in reference.segments().iter().chain(hypothesis.segments()) {
        boundaries.insert(seg.start);
        boundaries.insert(seg.end);
    }

    // Labels are constant inside a region, so sampling each region's
    // start instant is exact. label_at scans sorted segments with an
    // early break; segment counts per utterance are small.
    let mut regions = Vec::with_capacity(boundaries.len().saturating_sub(1));
    let mut iter = boundaries.into_iter().peekable();
    while let Some(start) = iter.next() {
        let Some(&end) = iter.peek() else { break };

        let ref_set = reference.label_at(start)?;
        debug_assert!(
            ref_set.len() <= 1,
            "reference overlap slipped past validation"
        );
        let ref_label = ref_set.iter().next();
        let hyp_labels = hypothesis.label_at(start)?;

        regions.push(Region {
            start,
            end,
            ref_label,
            hyp_labels,
        });
    }

    Ok(regions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn secs(s: f64) -> Tick {
        Tick::from_seconds(s).unwrap()
    }

    fn seg(label: EmotionLabel, start: f64, end: f64) -> Segment {
        Segment::new(label, secs(start), secs(end))
    }

    #[test]
    fn strict_accepts_well_formed_input() {
        let tl = Timeline::normalize(
            "u",
            vec![seg(EmotionLabel::Happy, 2.0, 5.0)],
            secs(10.0),
            TimelineKind::Reference,
            ParseMode::Strict,
        )
        .unwrap();
        assert_eq!(tl.segments().len(), 1);
        assert_eq!(tl.segments()[0].start, secs(2.0));
        assert_eq!(tl.segments()[0].end, secs(5.0));
    }

    #[test]
    fn lenient_merges_touching_same_label() {
        let tl = Timeline::normalize(
            "u",
            vec![
                seg(EmotionLabel::Happy, 2.0, 4.0),
                seg(EmotionLabel::Happy, 4.0, 5.0),
            ],
            secs(10.0),
            TimelineKind::Reference,
            ParseMode::Lenient,
        )
        .unwrap();
        assert_eq!(tl.segments().len(), 1);
        assert_eq!(tl.segments()[0].start, secs(2.0));
        assert_eq!(tl.segments()[0].end, secs(5.0));
    }

    #[test]
    fn strict_rejects_reference_overlap() {
        let err = Timeline::normalize(
            "u",
            vec![
                seg(EmotionLabel::Happy, 2.0, 5.0),
                seg(EmotionLabel::Sad, 4.0, 6.0),
            ],
            secs(10.0),
            TimelineKind::Reference,
            ParseMode::Strict,
        )
        .unwrap_err();
        assert!(matches!(err, Error::OverlapInReference { .. }));
    }

    #[test]
    fn lenient_rejects_cross_label_reference_overlap() {
        let err = Timeline::normalize(
            "u",
            vec![
                seg(EmotionLabel::Happy, 2.0, 5.0),
                seg(EmotionLabel::Sad, 4.0, 6.0),
            ],
            secs(10.0),
            TimelineKind::Reference,
            ParseMode::Lenient,
        )
        .unwrap_err();
        assert!(matches!(err, Error::OverlapInReference { .. }));
    }

    #[test]
    fn hypothesis_may_overlap() {
        let tl = Timeline::normalize(
            "u",
            vec![
                seg(EmotionLabel::Happy, 2.0, 5.0),
                seg(EmotionLabel::Sad, 3.0, 4.0),
            ],
            secs(10.0),
            TimelineKind::Hypothesis,
            ParseMode::Strict,
        )
        .unwrap();
        assert_eq!(tl.segments().len(), 2);
    }

    #[test]
    fn strict_rejects_out_of_range_and_degenerate() {
        let err = Timeline::normalize(
            "u",
            vec![seg(EmotionLabel::Happy, 8.0, 12.0)],
            secs(10.0),
            TimelineKind::Reference,
            ParseMode::Strict,
        )
        .unwrap_err();
        assert!(matches!(err, Error::OutOfRange { index: 0, .. }));

        let err = Timeline::normalize(
            "u",
            vec![seg(EmotionLabel::Happy, 3.0, 3.0)],
            secs(10.0),
            TimelineKind::Reference,
            ParseMode::Strict,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateSegment { index: 0, .. }));
    }

    #[test]
    fn lenient_clips_and_drops() {
        let tl = Timeline::normalize(
            "u",
            vec![
                seg(EmotionLabel::Happy, 8.0, 12.0),
                seg(EmotionLabel::Sad, 3.0, 3.0),
                seg(EmotionLabel::Angry, 11.0, 12.0),
            ],
            secs(10.0),
            TimelineKind::Reference,
            ParseMode::Lenient,
        )
        .unwrap();
        assert_eq!(tl.segments().len(), 1);
        assert_eq!(tl.segments()[0].end, secs(10.0));
    }

    #[test]
    fn zero_duration_rejected() {
        let err = Timeline::normalize(
            "u",
            vec![],
            Tick::ZERO,
            TimelineKind::Reference,
            ParseMode::Strict,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyTimelineDuration { .. }));
    }

    #[test]
    fn label_at_half_open() {
        let tl = Timeline::normalize(
            "u",
            vec![seg(EmotionLabel::Happy, 2.0, 5.0)],
            secs(10.0),
            TimelineKind::Reference,
            ParseMode::Strict,
        )
        .unwrap();
        assert_eq!(
            tl.label_at(secs(3.0)).unwrap(),
            LabelSet::singleton(EmotionLabel::Happy)
        );
        assert!(tl.label_at(secs(5.0)).unwrap().is_empty());
        assert!(tl
            .label_at(secs(2.0))
            .unwrap()
            .contains(EmotionLabel::Happy));
        assert!(matches!(
            tl.label_at(secs(10.0)),
            Err(Error::InstantOutOfRange { .. })
        ));
    }

    #[test]
    fn label_at_sees_hypothesis_overlap() {
        let tl = Timeline::normalize(
            "u",
            vec![
                seg(EmotionLabel::Happy, 2.0, 5.0),
                seg(EmotionLabel::Sad, 3.0, 4.0),
            ],
            secs(10.0),
            TimelineKind::Hypothesis,
            ParseMode::Strict,
        )
        .unwrap();
        let at = tl.label_at(secs(3.5)).unwrap();
        assert!(at.contains(EmotionLabel::Happy) && at.contains(EmotionLabel::Sad));
        assert_eq!(at.len(), 2);
    }

    #[test]
    fn sweep_empty_hypothesis() {
        let r = Timeline::normalize(
            "u",
            vec![seg(EmotionLabel::Happy, 2.0, 5.0)],
            secs(10.0),
            TimelineKind::Reference,
            ParseMode::Strict,
        )
        .unwrap();
        let h = Timeline::empty("u", secs(10.0), TimelineKind::Hypothesis).unwrap();
        let regions = boundary_sweep(&r, &h).unwrap();
        assert_eq!(regions.len(), 3);
        assert_eq!(regions[0].ref_label, None);
        assert_eq!(regions[1].ref_label, Some(EmotionLabel::Happy));
        assert_eq!(regions[1].start, secs(2.0));
        assert_eq!(regions[1].end, secs(5.0));
        assert_eq!(regions[2].ref_label, None);
        assert!(regions.iter().all(|r| r.hyp_labels.is_empty()));
    }

    #[test]
    fn sweep_boundaries_are_endpoint_union() {
        let r = Timeline::normalize(
            "u",
            vec![seg(EmotionLabel::Happy, 2.0, 5.0)],
            secs(10.0),
            TimelineKind::Reference,
            ParseMode::Strict,
        )
        .unwrap();
        let h = Timeline::normalize(
            "u",
            vec![
                seg(EmotionLabel::Happy, 2.0, 5.0),
                seg(EmotionLabel::Sad, 3.0, 4.0),
            ],
            secs(10.0),
            TimelineKind::Hypothesis,
            ParseMode::Strict,
        )
        .unwrap();
        let regions = boundary_sweep(&r, &h).unwrap();
        assert_eq!(regions.len(), 5);
        let bounds: Vec<Tick> = regions
            .iter()
            .map(|r| r.start)
            .chain(std::iter::once(secs(10.0)))
            .collect();
        assert_eq!(
            bounds,
            vec![
                secs(0.0),
                secs(2.0),
                secs(3.0),
                secs(4.0),
                secs(5.0),
                secs(10.0)
            ]
        );
    }

    #[test]
    fn sweep_rejects_duration_mismatch() {
        let r = Timeline::empty("a", secs(10.0), TimelineKind::Reference).unwrap();
        let h = Timeline::empty("a", secs(9.0), TimelineKind::Hypothesis).unwrap();
        assert!(matches!(
            boundary_sweep(&r, &h),
            Err(Error::DurationMismatch { .. })
        ));
    }

    #[test]
    fn emotional_duration_ignores_overlap() {
        let tl = Timeline::normalize(
            "u",
            vec![
                seg(EmotionLabel::Happy, 2.0, 5.0),
                seg(EmotionLabel::Sad, 3.0, 4.0),
            ],
            secs(10.0),
            TimelineKind::Hypothesis,
            ParseMode::Strict,
        )
        .unwrap();
        assert_eq!(tl.emotional_duration(), secs(3.0));
    }
}
