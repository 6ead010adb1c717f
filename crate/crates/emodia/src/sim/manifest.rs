//! Clip manifest ingestion.
//!
//! A manifest is a UTF-8 CSV with the header
//! `clip_id,path,speaker_id,label,duration_s,sample_rate`; label is one
//! of happy, sad, angry, neutral. Paths are resolved relative to the
//! manifest file. With verification on, each clip's WAV header must
//! exist and agree with the declared duration to within one tick.

use super::{ClipLabel, ClipMeta};
use crate::error::{Error, Result};
use crate::tick::{Tick, TICKS_PER_SECOND};
use std::collections::HashSet;
use std::path::Path;

const EXPECTED_SAMPLE_RATE: u32 = 16_000;

pub fn load_manifest(path: &Path, verify_files: bool) -> Result<Vec<ClipMeta>> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(&display, std::io::Error::other(e.to_string())),
            _ => Error::ParseError {
                path: display.clone(),
                line: 0,
                detail: e.to_string(),
            },
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::ParseError {
            path: display.clone(),
            line: 1,
            detail: e.to_string(),
        })?
        .clone();
    let expected = [
        "clip_id",
        "path",
        "speaker_id",
        "label",
        "duration_s",
        "sample_rate",
    ];
    let actual: Vec<&str> = headers.iter().collect();
    if actual != expected {
        return Err(Error::ParseError {
            path: display,
            line: 1,
            detail: format!("header must be {}", expected.join(",")),
        });
    }

    let base_dir = path.parent().unwrap_or(Path::new("."));
    let mut clips = Vec::new();
    let mut seen_ids = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::ParseError {
            path: display.clone(),
            line: e.position().map_or(0, |p| p.line() as usize),
            detail: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let row_error = |detail: String| Error::ParseError {
            path: display.clone(),
            line,
            detail,
        };

        if record.len() != expected.len() {
            return Err(row_error(format!(
                "expected {} fields, got {}",
                expected.len(),
                record.len()
            )));
        }
        let clip_id = field(0).to_owned();
        if clip_id.is_empty() {
            return Err(row_error("empty clip_id".to_owned()));
        }
        if !seen_ids.insert(clip_id.clone()) {
            return Err(row_error(format!("duplicate clip_id {clip_id:?}")));
        }
        let label = ClipLabel::parse(field(3)).map_err(|_| Error::UnknownLabel {
            context: format!("{display}:{line} clip {clip_id:?}"),
            label: field(3).to_owned(),
        })?;
        let duration_s: f64 = field(4)
            .parse()
            .map_err(|_| row_error(format!("bad duration_s {:?}", field(4))))?;
        let duration = Tick::from_seconds(duration_s)
            .filter(|d| !d.is_zero())
            .ok_or_else(|| row_error(format!("duration_s must be positive, got {duration_s}")))?;
        let sample_rate: u32 = field(5)
            .parse()
            .map_err(|_| row_error(format!("bad sample_rate {:?}", field(5))))?;
        if sample_rate != EXPECTED_SAMPLE_RATE {
            return Err(Error::BadSampleRate {
                clip_id,
                actual: sample_rate,
            });
        }

        let clip = ClipMeta {
            clip_id,
            path: field(1).to_owned(),
            speaker_id: field(2).to_owned(),
            label,
            duration,
            sample_rate,
        };
        if verify_files {
            verify_against_header(base_dir, &clip)?;
        }
        clips.push(clip);
    }

    Ok(clips)
}

/// Resolve a clip path against the manifest directory.
pub fn resolve_clip_path(base_dir: &Path, clip: &ClipMeta) -> std::path::PathBuf {
    let p = Path::new(&clip.path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

fn verify_against_header(base_dir: &Path, clip: &ClipMeta) -> Result<()> {
    let path = resolve_clip_path(base_dir, clip);
    if !path.is_file() {
        return Err(Error::MissingFile {
            clip_id: clip.clip_id.clone(),
            path: path.display().to_string(),
        });
    }
    let reader = hound::WavReader::open(&path).map_err(|e| Error::BadWavFormat {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let spec = reader.spec();
    if spec.sample_rate != EXPECTED_SAMPLE_RATE {
        return Err(Error::BadSampleRate {
            clip_id: clip.clip_id.clone(),
            actual: spec.sample_rate,
        });
    }
    let frames = reader.duration() as u64; // samples per channel
    let actual = Tick::new((frames * TICKS_PER_SECOND).div_ceil(spec.sample_rate as u64));
    let diff = actual.get().abs_diff(clip.duration.get());
    if diff > 1 {
        return Err(Error::DurationHeaderMismatch {
            clip_id: clip.clip_id.clone(),
            declared: clip.duration,
            actual,
        });
    }
    Ok(())
}
