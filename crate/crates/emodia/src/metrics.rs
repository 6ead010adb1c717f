//! Emotion diarization error rate.
//!
//! The error rate of a hypothesis against a reference is the summed
//! duration of false-alarm, missed, confused, and overlapped time,
//! divided by the utterance duration. Every instant of the utterance
//! falls into exactly one category, so the five component durations
//! partition the utterance exactly and the rate always lands in [0, 1].
//!
//! Scoring runs on the exact region sweep, never on a sampled grid, so
//! results carry no discretization error.

use crate::error::{Error, Result};
use crate::tick::Tick;
use crate::timeline::{boundary_sweep, EmotionLabel, LabelSet, Timeline};

/// The mutually exclusive classification of one instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstantCategory {
    Correct,
    /// Null time predicted as emotional.
    FalseAlarm,
    /// Emotional time predicted as null.
    MissedEmotion,
    /// Emotional time assigned only to wrong emotions.
    Confusion,
    /// Emotional time where the correct emotion is predicted together
    /// with extra overlapped emotions.
    Overlap,
}

/// Classify one instant from the reference label (`None` = null) and
/// the set of hypothesis labels (empty = null). Total over all inputs.
pub fn classify_instant(ref_label: Option<EmotionLabel>, hyp_labels: LabelSet) -> InstantCategory {
    match ref_label {
        None => {
            if hyp_labels.is_empty() {
                InstantCategory::Correct
            } else {
                InstantCategory::FalseAlarm
            }
        }
        Some(e) => {
            if hyp_labels.is_empty() {
                InstantCategory::MissedEmotion
            } else if !hyp_labels.contains(e) {
                InstantCategory::Confusion
            } else if hyp_labels.len() == 1 {
                InstantCategory::Correct
            } else {
                InstantCategory::Overlap
            }
        }
    }
}

/// Per-utterance component durations and the resulting error rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EderBreakdown {
    pub fa: Tick,
    pub me: Tick,
    pub cf: Tick,
    pub ol: Tick,
    pub correct: Tick,
    pub duration: Tick,
}

impl EderBreakdown {
    pub fn error_ticks(&self) -> Tick {
        self.fa + self.me + self.cf + self.ol
    }

    /// (fa + me + cf + ol) / duration, in [0, 1].
    pub fn eder(&self) -> f64 {
        self.error_ticks().get() as f64 / self.duration.get() as f64
    }
}

/// Score one hypothesis against one reference. Exact in ticks.
pub fn eder(reference: &Timeline, hypothesis: &Timeline) -> Result<EderBreakdown> {
    let regions = boundary_sweep(reference, hypothesis)?;
    let mut b = EderBreakdown {
        fa: Tick::ZERO,
        me: Tick::ZERO,
        cf: Tick::ZERO,
        ol: Tick::ZERO,
        correct: Tick::ZERO,
        duration: reference.duration(),
    };
    for region in regions {
        let len = region.length();
        let slot = match classify_instant(region.ref_label, region.hyp_labels) {
            InstantCategory::Correct => &mut b.correct,
            InstantCategory::FalseAlarm => &mut b.fa,
            InstantCategory::MissedEmotion => &mut b.me,
            InstantCategory::Confusion => &mut b.cf,
            InstantCategory::Overlap => &mut b.ol,
        };
        *slot = *slot + len;
    }
    debug_assert_eq!(
        b.fa + b.me + b.cf + b.ol + b.correct,
        b.duration,
        "component durations must partition the utterance"
    );
    Ok(b)
}

/// Summed component durations over a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComponentTotals {
    pub fa: Tick,
    pub me: Tick,
    pub cf: Tick,
    pub ol: Tick,
}

/// Corpus-level scores. Macro averages per-utterance rates; micro
/// divides total error time by total duration. The two agree whenever
/// all utterances share one duration.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub per_utterance: Vec<(String, EderBreakdown)>,
    pub macro_eder: f64,
    pub micro_eder: f64,
    /// Population standard deviation of the per-utterance rates.
    pub macro_eder_std: f64,
    pub component_totals: ComponentTotals,
    pub total_duration: Tick,
}

/// Aggregate per-utterance scores. The input order is preserved in the
/// report; callers sort by utterance id beforehand for stable output.
pub fn aggregate(reports: Vec<(String, EderBreakdown)>) -> Result<AggregateReport> {
    if reports.is_empty() {
        return Err(Error::EmptyCorpus("no utterances to aggregate".to_owned()));
    }
    let n = reports.len() as f64;
    let macro_eder = reports.iter().map(|(_, b)| b.eder()).sum::<f64>() / n;
    let variance = reports
        .iter()
        .map(|(_, b)| (b.eder() - macro_eder).powi(2))
        .sum::<f64>()
        / n;
    let macro_eder_std = variance.sqrt();

    let mut totals = ComponentTotals::default();
    let mut error_ticks = Tick::ZERO;
    let mut total_duration = Tick::ZERO;
    for (_, b) in &reports {
        totals.fa = totals.fa + b.fa;
        totals.me = totals.me + b.me;
        totals.cf = totals.cf + b.cf;
        totals.ol = totals.ol + b.ol;
        error_ticks = error_ticks + b.error_ticks();
        total_duration = total_duration + b.duration;
    }
    let micro_eder = error_ticks.get() as f64 / total_duration.get() as f64;

    Ok(AggregateReport {
        per_utterance: reports,
        macro_eder,
        micro_eder,
        macro_eder_std,
        component_totals: totals,
        total_duration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeline::{ParseMode, Segment, TimelineKind};

    fn secs(s: f64) -> Tick {
        Tick::from_seconds(s).unwrap()
    }

    fn timeline(kind: TimelineKind, duration: f64, segs: &[(EmotionLabel, f64, f64)]) -> Timeline {
        Timeline::normalize(
            "u",
            segs.iter()
                .map(|&(l, s, e)| Segment::new(l, secs(s), secs(e)))
                .collect(),
            secs(duration),
            kind,
            ParseMode::Strict,
        )
        .unwrap()
    }

    #[test]
    fn classify_instant_covers_all_cases() {
        use EmotionLabel::*;
        use InstantCategory::*;
        let set = |labels: &[EmotionLabel]| labels.iter().copied().collect::<LabelSet>();

        assert_eq!(classify_instant(None, set(&[])), Correct);
        assert_eq!(classify_instant(None, set(&[Happy])), FalseAlarm);
        assert_eq!(classify_instant(None, set(&[Happy, Sad])), FalseAlarm);
        assert_eq!(classify_instant(Some(Happy), set(&[])), MissedEmotion);
        assert_eq!(classify_instant(Some(Happy), set(&[Sad])), Confusion);
        assert_eq!(classify_instant(Some(Happy), set(&[Sad, Angry])), Confusion);
        assert_eq!(classify_instant(Some(Happy), set(&[Happy])), Correct);
        assert_eq!(classify_instant(Some(Happy), set(&[Happy, Sad])), Overlap);
    }

    #[test]
    fn perfect_hypothesis_scores_zero() {
        let r = timeline(
            TimelineKind::Reference,
            10.0,
            &[(EmotionLabel::Happy, 2.0, 5.0)],
        );
        let b = eder(&r, &r.as_hypothesis()).unwrap();
        assert_eq!(b.error_ticks(), Tick::ZERO);
        assert_eq!(b.eder(), 0.0);
        assert_eq!(b.correct, secs(10.0));
    }

    #[test]
    fn empty_hypothesis_misses_everything() {
        let r = timeline(
            TimelineKind::Reference,
            10.0,
            &[(EmotionLabel::Happy, 2.0, 5.0)],
        );
        let h = timeline(TimelineKind::Hypothesis, 10.0, &[]);
        let b = eder(&r, &h).unwrap();
        assert_eq!(b.me, secs(3.0));
        assert_eq!(b.fa, Tick::ZERO);
        assert!((b.eder() - 0.30).abs() < 1e-12);
    }

    #[test]
    fn overlapped_extra_emotion_counts_as_overlap() {
        let r = timeline(
            TimelineKind::Reference,
            10.0,
            &[(EmotionLabel::Happy, 2.0, 5.0)],
        );
        let h = timeline(
            TimelineKind::Hypothesis,
            10.0,
            &[
                (EmotionLabel::Happy, 2.0, 5.0),
                (EmotionLabel::Sad, 3.0, 4.0),
            ],
        );
        let b = eder(&r, &h).unwrap();
        assert_eq!(b.ol, secs(1.0));
        assert_eq!(b.fa + b.me + b.cf, Tick::ZERO);
        assert!((b.eder() - 0.10).abs() < 1e-12);
    }

    #[test]
    fn aggregate_single_report() {
        let r = timeline(
            TimelineKind::Reference,
            10.0,
            &[(EmotionLabel::Happy, 2.0, 5.0)],
        );
        let h = timeline(TimelineKind::Hypothesis, 10.0, &[]);
        let b = eder(&r, &h).unwrap();
        let agg = aggregate(vec![("u".to_owned(), b)]).unwrap();
        assert!((agg.macro_eder - 0.30).abs() < 1e-12);
        assert!((agg.micro_eder - 0.30).abs() < 1e-12);
    }

    #[test]
    fn aggregate_equal_durations() {
        let r1 = timeline(
            TimelineKind::Reference,
            10.0,
            &[(EmotionLabel::Happy, 2.0, 5.0)],
        );
        let b1 = eder(&r1, &r1.as_hypothesis()).unwrap();
        let r2 = timeline(
            TimelineKind::Reference,
            10.0,
            &[(EmotionLabel::Sad, 0.0, 4.0)],
        );
        let h2 = timeline(TimelineKind::Hypothesis, 10.0, &[]);
        let b2 = eder(&r2, &h2).unwrap();
        let agg = aggregate(vec![("a".to_owned(), b1), ("b".to_owned(), b2)]).unwrap();
        assert!((agg.macro_eder - 0.20).abs() < 1e-12);
        assert!((agg.micro_eder - 0.20).abs() < 1e-12);
    }

    // macro = (0.0 + 0.4) / 2 = 0.20; micro = (0 + 12 s) / 40 s = 0.30.
    #[test]
    fn aggregate_mixed_durations() {
        let r1 = timeline(
            TimelineKind::Reference,
            10.0,
            &[(EmotionLabel::Happy, 2.0, 5.0)],
        );
        let b1 = eder(&r1, &r1.as_hypothesis()).unwrap();
        let r2 = timeline(
            TimelineKind::Reference,
            30.0,
            &[(EmotionLabel::Sad, 0.0, 12.0)],
        );
        let h2 = timeline(TimelineKind::Hypothesis, 30.0, &[]);
        let b2 = eder(&r2, &h2).unwrap();
        assert!((b2.eder() - 0.4).abs() < 1e-12);
        let agg = aggregate(vec![("a".to_owned(), b1), ("b".to_owned(), b2)]).unwrap();
        assert!((agg.macro_eder - 0.20).abs() < 1e-12);
        assert!((agg.micro_eder - 0.30).abs() < 1e-12);
    }

    #[test]
    fn aggregate_rejects_empty() {
        assert!(matches!(aggregate(vec![]), Err(Error::EmptyCorpus(_))));
    }

    #[test]
    fn mismatched_durations_rejected() {
        let r = timeline(TimelineKind::Reference, 10.0, &[]);
        let h = timeline(TimelineKind::Hypothesis, 9.0, &[]);
        assert!(matches!(eder(&r, &h), Err(Error::DurationMismatch { .. })));
    }
}
