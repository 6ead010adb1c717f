//! Seeded random generators shared by the integration and acceptance
//! suites. Everything here goes through the crate's own deterministic
//! generator so failures replay exactly.

#![allow(dead_code)]

use emodia::prng::SplitMix64;
use emodia::{EmotionLabel, ParseMode, Segment, Tick, Timeline, TimelineKind};

pub fn random_label(rng: &mut SplitMix64) -> EmotionLabel {
    EmotionLabel::ALL[rng.next_below(3) as usize]
}

/// A duration between 1 and 5 seconds, tick-aligned by construction.
pub fn random_duration(rng: &mut SplitMix64) -> Tick {
    Tick::new(10_000 + rng.next_below(40_001))
}

/// Distinct sorted ticks strictly inside (0, duration).
fn distinct_interior_points(rng: &mut SplitMix64, duration: Tick, n: usize) -> Vec<Tick> {
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let t = Tick::new(1 + rng.next_below(duration.get() - 1));
        if !points.contains(&t) {
            points.push(t);
        }
    }
    points.sort();
    points
}

/// A non-overlapping reference with 0..=3 emotional events.
pub fn random_reference(rng: &mut SplitMix64, id: &str, duration: Tick) -> Timeline {
    let n_events = rng.next_below(4) as usize;
    let bounds = distinct_interior_points(rng, duration, n_events * 2);
    let segments = bounds
        .chunks(2)
        .map(|pair| Segment::new(random_label(rng), pair[0], pair[1]))
        .collect();
    Timeline::normalize(
        id,
        segments,
        duration,
        TimelineKind::Reference,
        ParseMode::Strict,
    )
    .expect("constructed reference is valid")
}

/// An arbitrary hypothesis: up to 4 segments, overlaps allowed.
pub fn random_hypothesis(rng: &mut SplitMix64, id: &str, duration: Tick) -> Timeline {
    let n = rng.next_below(5) as usize;
    let segments = (0..n)
        .map(|_| {
            let start = Tick::new(rng.next_below(duration.get() - 1));
            let max_len = duration.get() - start.get();
            let end = Tick::new(start.get() + 1 + rng.next_below(max_len));
            Segment::new(random_label(rng), start, end)
        })
        .collect();
    Timeline::normalize(
        id,
        segments,
        duration,
        TimelineKind::Hypothesis,
        ParseMode::Strict,
    )
    .expect("constructed hypothesis is valid")
}

pub fn random_pair(rng: &mut SplitMix64, id: &str) -> (Timeline, Timeline) {
    let duration = random_duration(rng);
    (
        random_reference(rng, id, duration),
        random_hypothesis(rng, id, duration),
    )
}

/// Instant-by-instant brute force: paint every 100 µs tick of both
/// timelines, classify each instant, and sum. Never touches the sweep.
pub fn grid_breakdown(
    reference: &Timeline,
    hypothesis: &Timeline,
) -> emodia::metrics::EderBreakdown {
    use emodia::metrics::{classify_instant, InstantCategory};
    use emodia::LabelSet;

    let duration = reference.duration().get() as usize;
    let mut ref_grid: Vec<Option<EmotionLabel>> = vec![None; duration];
    for seg in reference.segments() {
        for cell in &mut ref_grid[seg.start.get() as usize..seg.end.get() as usize] {
            *cell = Some(seg.label);
        }
    }
    let mut hyp_grid: Vec<LabelSet> = vec![LabelSet::EMPTY; duration];
    for seg in hypothesis.segments() {
        for cell in &mut hyp_grid[seg.start.get() as usize..seg.end.get() as usize] {
            cell.insert(seg.label);
        }
    }

    let mut tallies = [0u64; 5];
    for t in 0..duration {
        let slot = match classify_instant(ref_grid[t], hyp_grid[t]) {
            InstantCategory::FalseAlarm => 0,
            InstantCategory::MissedEmotion => 1,
            InstantCategory::Confusion => 2,
            InstantCategory::Overlap => 3,
            InstantCategory::Correct => 4,
        };
        tallies[slot] += 1;
    }
    emodia::metrics::EderBreakdown {
        fa: Tick::new(tallies[0]),
        me: Tick::new(tallies[1]),
        cf: Tick::new(tallies[2]),
        ol: Tick::new(tallies[3]),
        correct: Tick::new(tallies[4]),
        duration: reference.duration(),
    }
}

/// Straight-formula Fleiss' kappa, independent of the library path.
pub fn kappa_oracle(counts: &[[u32; 4]], n_raters: usize) -> f64 {
    let big_n = counts.len() as f64;
    let n = n_raters as f64;
    let p_bar = counts
        .iter()
        .map(|row| {
            let pairs: f64 = row.iter().map(|&c| c as f64 * c as f64).sum();
            (pairs - n) / (n * (n - 1.0))
        })
        .sum::<f64>()
        / big_n;
    let mut column_totals = [0.0f64; 4];
    for row in counts {
        for (c, &count) in row.iter().enumerate() {
            column_totals[c] += count as f64;
        }
    }
    let p_e: f64 = column_totals
        .iter()
        .map(|t| {
            let p = t / (big_n * n);
            p * p
        })
        .sum();
    if p_bar >= 1.0 {
        1.0
    } else {
        (p_bar - p_e) / (1.0 - p_e)
    }
}

/// A random rating table: each item distributes `n_raters` votes over
/// the four categories.
pub fn random_rating_table(rng: &mut SplitMix64, n_items: usize, n_raters: usize) -> Vec<[u32; 4]> {
    (0..n_items)
        .map(|_| {
            let mut row = [0u32; 4];
            for _ in 0..n_raters {
                row[rng.next_below(4) as usize] += 1;
            }
            row
        })
        .collect()
}
