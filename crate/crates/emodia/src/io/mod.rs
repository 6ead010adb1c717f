//! Exchange formats: interval JSON (references and hypotheses),
//! frame-hypothesis JSON, RTTM segment files, and canonical writing.
//!
//! Files carry seconds; everything in memory is ticks. Written JSON is
//! canonical — sorted keys, 4-decimal seconds — so identical values
//! always produce identical bytes, and the 4-decimal formatting is
//! lossless at tick resolution.

pub mod canon;
pub mod rttm;

use crate::error::{Error, Result};
use crate::framing::{FrameSequence, FrameSpec, Posteriors};
use crate::tick::Tick;
use crate::timeline::{EmotionLabel, ParseMode, Segment, Timeline, TimelineKind};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// One utterance's interval annotation as it appears on disk.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct UtteranceRecord {
    pub utterance_id: String,
    pub duration_s: f64,
    #[serde(default)]
    pub speaker: Option<String>,
    #[serde(default)]
    pub transcript: Option<String>,
    pub segments: Vec<SegmentRecord>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SegmentRecord {
    pub label: String,
    pub start_s: f64,
    pub end_s: f64,
    #[serde(default)]
    pub confidence: Option<f64>,
}

impl UtteranceRecord {
    pub fn from_timeline(timeline: &Timeline) -> UtteranceRecord {
        UtteranceRecord {
            utterance_id: timeline.utterance_id().to_owned(),
            duration_s: timeline.duration().to_seconds(),
            speaker: None,
            transcript: None,
            segments: timeline
                .segments()
                .iter()
                .map(|s| SegmentRecord {
                    label: s.label.name().to_owned(),
                    start_s: s.start.to_seconds(),
                    end_s: s.end.to_seconds(),
                    confidence: s.confidence,
                })
                .collect(),
        }
    }

    pub fn to_timeline(&self, kind: TimelineKind, mode: ParseMode) -> Result<Timeline> {
        let context = || format!("utterance {:?}", self.utterance_id);
        let duration = Tick::from_seconds(self.duration_s).ok_or_else(|| Error::SchemaError {
            path: context(),
            detail: format!("bad duration_s {}", self.duration_s),
        })?;
        let mut segments = Vec::with_capacity(self.segments.len());
        for (i, seg) in self.segments.iter().enumerate() {
            let label: EmotionLabel = seg.label.parse().map_err(|_| Error::UnknownLabel {
                context: format!("{} segment {i}", context()),
                label: seg.label.clone(),
            })?;
            let start = Tick::from_seconds(seg.start_s).ok_or_else(|| Error::SchemaError {
                path: context(),
                detail: format!("segment {i}: bad start_s {}", seg.start_s),
            })?;
            let end = Tick::from_seconds(seg.end_s).ok_or_else(|| Error::SchemaError {
                path: context(),
                detail: format!("segment {i}: bad end_s {}", seg.end_s),
            })?;
            let mut segment = Segment::new(label, start, end);
            segment.confidence = seg.confidence;
            segments.push(segment);
        }
        Timeline::normalize(self.utterance_id.clone(), segments, duration, kind, mode)
    }
}

/// One utterance's frame-label hypothesis as it appears on disk.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct FrameHypothesisRecord {
    pub utterance_id: String,
    #[serde(default = "default_stride_s")]
    pub frame_stride_s: f64,
    pub labels: Vec<String>,
    #[serde(default)]
    pub posteriors: Option<Vec<Posteriors>>,
}

fn default_stride_s() -> f64 {
    0.02
}

impl FrameHypothesisRecord {
    pub fn to_frame_sequence(&self) -> Result<FrameSequence> {
        if self.labels.is_empty() {
            return Err(Error::SchemaError {
                path: format!("utterance {:?}", self.utterance_id),
                detail: "labels must not be empty".to_owned(),
            });
        }
        let stride = Tick::from_seconds(self.frame_stride_s)
            .filter(|s| !s.is_zero())
            .ok_or_else(|| Error::SchemaError {
                path: format!("utterance {:?}", self.utterance_id),
                detail: format!("bad frame_stride_s {}", self.frame_stride_s),
            })?;
        let mut labels = Vec::with_capacity(self.labels.len());
        for (i, raw) in self.labels.iter().enumerate() {
            let label = match raw.as_str() {
                "null" => None,
                other => Some(
                    other
                        .parse::<EmotionLabel>()
                        .map_err(|_| Error::UnknownLabel {
                            context: format!("utterance {:?} frame {i}", self.utterance_id),
                            label: other.to_owned(),
                        })?,
                ),
            };
            labels.push(label);
        }
        // The file format carries no duration; until the caller anchors
        // the sequence to a known utterance duration, it spans exactly
        // frame_count * stride.
        let duration = Tick::new(stride.get() * labels.len() as u64);
        FrameSequence::new(
            self.utterance_id.clone(),
            FrameSpec::with_stride(stride),
            duration,
            labels,
            self.posteriors.clone(),
        )
    }
}

fn parse_json<'a, T: Deserialize<'a>>(path: &Path, text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        let offset = byte_offset(text, e.line(), e.column());
        Error::SchemaError {
            path: path.display().to_string(),
            detail: format!(
                "byte {offset} (line {}, column {}): {e}",
                e.line(),
                e.column()
            ),
        }
    })
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let preceding: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    preceding + column.saturating_sub(1)
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Parse an in-memory interval JSON document.
pub fn parse_utterance_record(json: &str) -> Result<UtteranceRecord> {
    parse_json(Path::new("<string>"), json)
}

pub fn read_reference(path: &Path, mode: ParseMode) -> Result<Timeline> {
    read_interval_file(path, TimelineKind::Reference, mode)
}

pub fn read_hypothesis(path: &Path, mode: ParseMode) -> Result<Timeline> {
    read_interval_file(path, TimelineKind::Hypothesis, mode)
}

fn read_interval_file(path: &Path, kind: TimelineKind, mode: ParseMode) -> Result<Timeline> {
    let text = read_to_string(path)?;
    let record: UtteranceRecord = parse_json(path, &text)?;
    record.to_timeline(kind, mode)
}

pub fn read_frame_hypothesis(path: &Path) -> Result<FrameSequence> {
    let text = read_to_string(path)?;
    let record: FrameHypothesisRecord = parse_json(path, &text)?;
    record.to_frame_sequence()
}

/// Write a timeline as canonical interval JSON.
pub fn write_reference(timeline: &Timeline, path: &Path) -> Result<()> {
    let record = UtteranceRecord::from_timeline(timeline);
    write_bytes(path, canon::utterance_record(&record).as_bytes())
}

/// Write a rendered report. Rendering is already canonical, so
/// identical values produce identical bytes.
pub fn write_report(rendered: &str, path: &Path) -> Result<()> {
    write_bytes(path, rendered.as_bytes())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Load timelines from a single JSON file or every `*.json` in a
/// directory. The result is sorted by utterance id; duplicate ids are
/// an error.
pub fn load_timelines(path: &Path, kind: TimelineKind, mode: ParseMode) -> Result<Vec<Timeline>> {
    let mut timelines = Vec::new();
    for file in json_files(path)? {
        timelines.push(read_interval_file(&file, kind, mode)?);
    }
    sort_unique(timelines, |t| t.utterance_id().to_owned(), path)
}

/// Load frame hypotheses from a file or a directory of `*.json`.
pub fn load_frame_hypotheses(path: &Path) -> Result<Vec<FrameSequence>> {
    let mut sequences = Vec::new();
    for file in json_files(path)? {
        sequences.push(read_frame_hypothesis(&file)?);
    }
    sort_unique(sequences, |s| s.utterance_id().to_owned(), path)
}

fn sort_unique<T>(mut items: Vec<T>, id: impl Fn(&T) -> String, path: &Path) -> Result<Vec<T>> {
    items.sort_by_key(&id);
    for pair in items.windows(2) {
        if id(&pair[0]) == id(&pair[1]) {
            return Err(Error::SchemaError {
                path: path.display().to_string(),
                detail: format!("duplicate utterance id {:?}", id(&pair[0])),
            });
        }
    }
    Ok(items)
}

/// A file as-is, or every file with the given extension in a
/// directory, sorted by name.
pub fn files_with_extension(path: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let entries =
            std::fs::read_dir(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut files = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(path.display().to_string(), e))?;
            let p = entry.path();
            if p.extension().and_then(|e| e.to_str()) == Some(extension) && p.is_file() {
                files.push(p);
            }
        }
        files.sort();
        Ok(files)
    } else if path.is_file() {
        Ok(vec![path.to_path_buf()])
    } else {
        Err(Error::io(
            path.display().to_string(),
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ))
    }
}

fn json_files(path: &Path) -> Result<Vec<PathBuf>> {
    files_with_extension(path, "json")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_reference_file_parses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u1.json");
        std::fs::write(
            &path,
            r#"{"utterance_id":"u1","duration_s":10.0,"segments":[{"label":"happy","start_s":2.0,"end_s":5.0}]}"#,
        )
        .unwrap();
        let tl = read_reference(&path, ParseMode::Strict).unwrap();
        assert_eq!(tl.utterance_id(), "u1");
        assert_eq!(tl.duration(), Tick::from_seconds(10.0).unwrap());
        assert_eq!(tl.segments()[0].start, Tick::new(20_000));
        assert_eq!(tl.segments()[0].end, Tick::new(50_000));
    }

    #[test]
    fn out_of_range_segment_strict_vs_lenient() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u1.json");
        std::fs::write(
            &path,
            r#"{"utterance_id":"u1","duration_s":4.0,"segments":[{"label":"sad","start_s":2.0,"end_s":5.0}]}"#,
        )
        .unwrap();
        let err = read_reference(&path, ParseMode::Strict).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { index: 0, .. }));

        let tl = read_reference(&path, ParseMode::Lenient).unwrap();
        assert_eq!(tl.segments()[0].end, Tick::from_seconds(4.0).unwrap());
    }

    #[test]
    fn schema_error_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\n  \"utterance_id\": 3,\n}").unwrap();
        let err = read_reference(&path, ParseMode::Strict).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("byte "), "{msg}");
        assert!(msg.contains("line "), "{msg}");
    }

    #[test]
    fn frame_hypothesis_parses_with_default_stride() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        std::fs::write(&path, r#"{"utterance_id":"u1","labels":["null","happy"]}"#).unwrap();
        let frames = read_frame_hypothesis(&path).unwrap();
        assert_eq!(frames.labels(), &[None, Some(EmotionLabel::Happy)]);
        assert_eq!(frames.spec().stride, Tick::from_millis(20));
        assert_eq!(frames.duration(), Tick::from_millis(40));
    }

    #[test]
    fn frame_hypothesis_rejects_bad_rows() {
        let dir = tempfile::tempdir().unwrap();

        let empty = dir.path().join("empty.json");
        std::fs::write(&empty, r#"{"utterance_id":"u1","labels":[]}"#).unwrap();
        assert!(matches!(
            read_frame_hypothesis(&empty),
            Err(Error::SchemaError { .. })
        ));

        let unknown = dir.path().join("unknown.json");
        std::fs::write(&unknown, r#"{"utterance_id":"u1","labels":["bored"]}"#).unwrap();
        assert!(matches!(
            read_frame_hypothesis(&unknown),
            Err(Error::UnknownLabel { .. })
        ));

        let bad_sum = dir.path().join("sum.json");
        std::fs::write(
            &bad_sum,
            r#"{"utterance_id":"u1","labels":["null"],"posteriors":[[0.2,0.2,0.2,0.2]]}"#,
        )
        .unwrap();
        assert!(matches!(
            read_frame_hypothesis(&bad_sum),
            Err(Error::PosteriorSumError { .. })
        ));
    }

    #[test]
    fn write_then_read_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.json");
        let tl = Timeline::normalize(
            "u",
            vec![
                Segment::new(EmotionLabel::Happy, Tick::new(20_000), Tick::new(50_000)),
                Segment::new(EmotionLabel::Sad, Tick::new(60_001), Tick::new(70_003))
                    .with_confidence(0.25),
            ],
            Tick::new(100_000),
            TimelineKind::Reference,
            ParseMode::Strict,
        )
        .unwrap();
        write_reference(&tl, &path).unwrap();
        let back = read_reference(&path, ParseMode::Strict).unwrap();
        assert_eq!(back, tl);

        // Writing the same value twice produces identical bytes.
        let again = dir.path().join("u2.json");
        write_reference(&tl, &again).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&again).unwrap()
        );
    }

    #[test]
    fn directory_loading_sorts_and_rejects_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        for (file, id) in [("b.json", "u2"), ("a.json", "u1")] {
            std::fs::write(
                dir.path().join(file),
                format!(r#"{{"utterance_id":"{id}","duration_s":1.0,"segments":[]}}"#),
            )
            .unwrap();
        }
        let tls = load_timelines(dir.path(), TimelineKind::Reference, ParseMode::Strict).unwrap();
        assert_eq!(
            tls.iter().map(|t| t.utterance_id()).collect::<Vec<_>>(),
            vec!["u1", "u2"]
        );

        std::fs::write(
            dir.path().join("c.json"),
            r#"{"utterance_id":"u1","duration_s":2.0,"segments":[]}"#,
        )
        .unwrap();
        assert!(matches!(
            load_timelines(dir.path(), TimelineKind::Reference, ParseMode::Strict),
            Err(Error::SchemaError { .. })
        ));
    }
}
