//! Frame-wise inter-annotator agreement.
//!
//! Annotator timelines are discretized into short frames (10 ms by
//! default), each frame becomes one rated item, and agreement is
//! summarized with Fleiss' kappa over the four categories
//! (happy, sad, angry, null).

use crate::error::{Error, Result};
use crate::framing::{intervals_to_frames, FrameSpec};
use crate::tick::Tick;
use crate::timeline::Timeline;

pub const DEFAULT_AGREEMENT_FRAME: Tick = Tick::new(100); // 0.01 s

/// Per-item category tallies. Every item was rated by the same number
/// of raters, so each row sums to `n_raters`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingTable {
    n_raters: usize,
    counts: Vec<[u32; 4]>,
}

impl RatingTable {
    pub fn new(n_raters: usize, counts: Vec<[u32; 4]>) -> Result<RatingTable> {
        if n_raters < 2 {
            return Err(Error::TooFewRaters(n_raters));
        }
        for (i, row) in counts.iter().enumerate() {
            let sum: u32 = row.iter().sum();
            if sum as usize != n_raters {
                return Err(Error::BadConfig(format!(
                    "rating row {i} sums to {sum}, expected {n_raters}"
                )));
            }
        }
        Ok(RatingTable { n_raters, counts })
    }

    pub fn n_raters(&self) -> usize {
        self.n_raters
    }

    pub fn n_items(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[[u32; 4]] {
        &self.counts
    }

    /// Append another table rated by the same panel size (used to pool
    /// frames across utterances).
    pub fn extend(&mut self, other: RatingTable) -> Result<()> {
        if other.n_raters != self.n_raters {
            return Err(Error::BadConfig(format!(
                "annotator panels differ in size: {} vs {}",
                self.n_raters, other.n_raters
            )));
        }
        self.counts.extend(other.counts);
        Ok(())
    }
}

/// Discretize one utterance's annotator timelines into a rating table,
/// one item per frame. Each annotator's vote for a frame is the
/// majority label from the same rule used for scoring alignment;
/// trailing partial frames are included.
pub fn build_rating_table(annotations: &[Timeline], frame: Tick) -> Result<RatingTable> {
    if annotations.len() < 2 {
        return Err(Error::TooFewRaters(annotations.len()));
    }
    let first = &annotations[0];
    for other in &annotations[1..] {
        if other.duration() != first.duration() {
            return Err(Error::DurationMismatch {
                left: first.utterance_id().to_owned(),
                left_duration: first.duration(),
                right: other.utterance_id().to_owned(),
                right_duration: other.duration(),
            });
        }
    }

    let spec = FrameSpec::with_stride(frame);
    let n_items = first.duration().frames_at(frame) as usize;
    let mut counts = vec![[0u32; 4]; n_items];
    for annotation in annotations {
        let frames = intervals_to_frames(annotation, spec)?;
        for (item, label) in counts.iter_mut().zip(frames.labels()) {
            let class = label.map_or(3, |l| l.index());
            item[class] += 1;
        }
    }
    RatingTable::new(annotations.len(), counts)
}

/// Fleiss' kappa. Unanimous agreement on every item returns exactly
/// 1.0 even when a single category dominates (the chance-agreement
/// denominator would otherwise vanish).
pub fn fleiss_kappa(table: &RatingTable) -> Result<f64> {
    let n = table.n_raters();
    if n < 2 {
        return Err(Error::TooFewRaters(n));
    }
    let items = table.n_items();
    if items == 0 {
        return Err(Error::EmptyRatingTable);
    }

    let n_f = n as f64;
    let items_f = items as f64;

    let mut category_totals = [0u64; 4];
    let mut p_sum = 0.0;
    for row in table.counts() {
        let mut pairs = 0u64;
        for (c, &count) in row.iter().enumerate() {
            pairs += count as u64 * count as u64;
            category_totals[c] += count as u64;
        }
        p_sum += (pairs as f64 - n_f) / (n_f * (n_f - 1.0));
    }
    let p_bar = p_sum / items_f;

    if p_bar >= 1.0 {
        return Ok(1.0);
    }

    let total_votes = items_f * n_f;
    let p_e: f64 = category_totals
        .iter()
        .map(|&t| {
            let p = t as f64 / total_votes;
            p * p
        })
        .sum();

    Ok((p_bar - p_e) / (1.0 - p_e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeline::{EmotionLabel, ParseMode, Segment, TimelineKind};

    fn secs(s: f64) -> Tick {
        Tick::from_seconds(s).unwrap()
    }

    fn annotation(duration: f64, segs: &[(EmotionLabel, f64, f64)]) -> Timeline {
        Timeline::normalize(
            "u",
            segs.iter()
                .map(|&(l, s, e)| Segment::new(l, secs(s), secs(e)))
                .collect(),
            secs(duration),
            TimelineKind::Reference,
            ParseMode::Strict,
        )
        .unwrap()
    }

    #[test]
    fn identical_annotators_agree_everywhere() {
        let a = annotation(1.0, &[(EmotionLabel::Happy, 0.0, 0.5)]);
        let table =
            build_rating_table(&[a.clone(), a.clone(), a], DEFAULT_AGREEMENT_FRAME).unwrap();
        assert_eq!(table.n_items(), 100);
        assert!(table.counts().iter().all(|row| row.contains(&3)));
        assert_eq!(fleiss_kappa(&table).unwrap(), 1.0);
    }

    #[test]
    fn half_length_disagreement_table() {
        let a = annotation(1.0, &[(EmotionLabel::Happy, 0.0, 1.0)]);
        let b = annotation(1.0, &[(EmotionLabel::Happy, 0.0, 0.5)]);
        let table = build_rating_table(&[a, b], DEFAULT_AGREEMENT_FRAME).unwrap();
        assert_eq!(table.n_items(), 100);
        let happy = EmotionLabel::Happy.index();
        for (i, row) in table.counts().iter().enumerate() {
            if i < 50 {
                assert_eq!(row[happy], 2, "item {i}");
            } else {
                assert_eq!(row[happy], 1, "item {i}");
                assert_eq!(row[3], 1, "item {i}");
            }
        }
    }

    #[test]
    fn even_split_of_two_raters_is_minus_one() {
        // Every item splits a 2-rater panel between two categories:
        // observed agreement 0, chance 0.5, kappa -1.
        let counts = vec![[1, 1, 0, 0]; 10];
        let table = RatingTable::new(2, counts).unwrap();
        assert!((fleiss_kappa(&table).unwrap() - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_single_rater_and_duration_mismatch() {
        let a = annotation(1.0, &[]);
        assert!(matches!(
            build_rating_table(std::slice::from_ref(&a), DEFAULT_AGREEMENT_FRAME),
            Err(Error::TooFewRaters(1))
        ));
        let b = annotation(2.0, &[]);
        assert!(matches!(
            build_rating_table(&[a, b], DEFAULT_AGREEMENT_FRAME),
            Err(Error::DurationMismatch { .. })
        ));
    }

    #[test]
    fn partial_trailing_frame_is_rated() {
        let a = annotation(0.015, &[(EmotionLabel::Sad, 0.0, 0.015)]);
        let table = build_rating_table(&[a.clone(), a], DEFAULT_AGREEMENT_FRAME).unwrap();
        assert_eq!(table.n_items(), 2);
    }
}
