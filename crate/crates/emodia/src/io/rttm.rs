//! RTTM bridge for interoperability with diarization tooling.
//!
//! Standard 10-field SPEAKER lines; the speaker-name field carries the
//! emotion label. RTTM has no notion of file duration, so durations
//! are supplied per file id.

use crate::error::{Error, Result};
use crate::tick::Tick;
use crate::timeline::{EmotionLabel, ParseMode, Segment, Timeline, TimelineKind};
use std::collections::HashMap;
use std::path::Path;

/// Parse one RTTM file into one timeline per file id, sorted by id.
/// Onset + duration convert to half-open `[start, end)` segments.
pub fn read_rttm(
    path: &Path,
    duration_map: &HashMap<String, Tick>,
    kind: TimelineKind,
    mode: ParseMode,
) -> Result<Vec<Timeline>> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;

    // Group segments by file id, preserving first-appearance order of ids.
    let mut order: Vec<String> = Vec::new();
    let mut by_file: HashMap<String, Vec<Segment>> = HashMap::new();

    for (line_index, line) in text.lines().enumerate() {
        let line_no = line_index + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |detail: String| Error::ParseError {
            path: display.clone(),
            line: line_no,
            detail,
        };
        if fields.len() != 10 {
            return Err(parse_err(format!(
                "expected 10 fields, got {}",
                fields.len()
            )));
        }
        if fields[0] != "SPEAKER" {
            return Err(parse_err(format!(
                "expected SPEAKER record, got {:?}",
                fields[0]
            )));
        }
        let file_id = fields[1].to_owned();
        let onset: f64 = fields[3]
            .parse()
            .map_err(|_| parse_err(format!("bad onset {:?}", fields[3])))?;
        let dur: f64 = fields[4]
            .parse()
            .map_err(|_| parse_err(format!("bad duration {:?}", fields[4])))?;
        let label: EmotionLabel = fields[7].parse().map_err(|_| Error::UnknownLabel {
            context: format!("{display}:{line_no}"),
            label: fields[7].to_owned(),
        })?;
        let start =
            Tick::from_seconds(onset).ok_or_else(|| parse_err(format!("bad onset {onset}")))?;
        let length =
            Tick::from_seconds(dur).ok_or_else(|| parse_err(format!("bad duration {dur}")))?;
        let end = start
            .checked_add(length)
            .ok_or_else(|| parse_err("onset + duration overflows".to_owned()))?;
        let mut segment = Segment::new(label, start, end);
        if fields[8] != "<NA>" {
            let confidence: f64 = fields[8]
                .parse()
                .map_err(|_| parse_err(format!("bad confidence {:?}", fields[8])))?;
            segment.confidence = Some(confidence);
        }

        if !by_file.contains_key(&file_id) {
            order.push(file_id.clone());
        }
        by_file.entry(file_id).or_default().push(segment);
    }

    let mut timelines = Vec::with_capacity(order.len());
    for file_id in order {
        let duration = *duration_map
            .get(&file_id)
            .ok_or_else(|| Error::MissingDuration(file_id.clone()))?;
        let segments = by_file.remove(&file_id).unwrap_or_default();
        timelines.push(Timeline::normalize(
            file_id, segments, duration, kind, mode,
        )?);
    }
    timelines.sort_by(|a, b| a.utterance_id().cmp(b.utterance_id()));
    Ok(timelines)
}
