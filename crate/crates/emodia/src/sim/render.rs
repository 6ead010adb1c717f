//! Sample-accurate rendering of planned utterances, plus the WAV
//! helpers shared with validation. All audio is RIFF PCM, 16-bit
//! little-endian, mono, 16 kHz — in and out.

use super::{ClipMeta, PlannedUtterance};
use crate::error::{Error, Result};
use crate::timeline::Timeline;
use std::collections::HashMap;
use std::path::Path;

const SAMPLE_RATE: u32 = 16_000;

/// Read a mono 16 kHz 16-bit PCM WAV in full.
pub fn read_wav_mono16(path: &Path) -> Result<Vec<i16>> {
    let display = path.display().to_string();
    let mut reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(&display, io),
        other => Error::BadWavFormat {
            path: display.clone(),
            detail: other.to_string(),
        },
    })?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::ChannelCountMismatch {
            path: display,
            actual: spec.channels,
        });
    }
    if spec.sample_rate != SAMPLE_RATE {
        return Err(Error::SampleRateMismatch {
            path: display,
            expected: SAMPLE_RATE,
            actual: spec.sample_rate,
        });
    }
    if spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(Error::BadWavFormat {
            path: display,
            detail: format!(
                "expected 16-bit integer PCM, got {}-bit {:?}",
                spec.bits_per_sample, spec.sample_format
            ),
        });
    }
    reader
        .samples::<i16>()
        .collect::<std::result::Result<Vec<i16>, _>>()
        .map_err(|e| Error::BadWavFormat {
            path: path.display().to_string(),
            detail: e.to_string(),
        })
}

/// Write a mono 16 kHz 16-bit PCM WAV. Output bytes depend only on the
/// samples.
pub fn write_wav_mono16(path: &Path, samples: &[i16]) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: SAMPLE_RATE,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let display = path.display().to_string();
    let as_io = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(&display, io),
        other => Error::BadWavFormat {
            path: display.clone(),
            detail: other.to_string(),
        },
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(as_io)?;
    {
        let mut w16 = writer.get_i16_writer(samples.len() as u32);
        for &s in samples {
            w16.write_sample(s);
        }
        w16.flush().map_err(as_io)?;
    }
    writer.finalize().map_err(as_io)
}

/// Concatenate the planned clips in slot order. The emitted reference
/// is the plan's expected timeline; sample counts add up exactly.
pub fn render_utterance(
    planned: &PlannedUtterance,
    clips_by_id: &HashMap<&str, &ClipMeta>,
    base_dir: &Path,
) -> Result<(Vec<i16>, Timeline)> {
    let mut samples = Vec::new();
    for slot in &planned.slot_clips {
        for clip_id in slot {
            let clip = clips_by_id
                .get(clip_id.as_str())
                .ok_or_else(|| Error::MissingFile {
                    clip_id: clip_id.clone(),
                    path: "<not in manifest>".to_owned(),
                })?;
            let path = super::manifest::resolve_clip_path(base_dir, clip);
            samples.extend(read_wav_mono16(&path)?);
        }
    }
    Ok((samples, planned.reference.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{plan_simulation, ClipLabel, SimulationConfig};
    use crate::tick::Tick;

    fn tone(n: usize, period: usize) -> Vec<i16> {
        (0..n)
            .map(|i| {
                if (i / period).is_multiple_of(2) {
                    12_000
                } else {
                    -12_000
                }
            })
            .collect()
    }

    #[test]
    fn wav_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        let samples = tone(48_000, 20);
        write_wav_mono16(&path, &samples).unwrap();
        assert_eq!(read_wav_mono16(&path).unwrap(), samples);
    }

    #[test]
    fn write_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.wav");
        let b = dir.path().join("b.wav");
        let samples = tone(16_000, 33);
        write_wav_mono16(&a, &samples).unwrap();
        write_wav_mono16(&b, &samples).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }

    #[test]
    fn rejects_wrong_rate_and_channels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.wav");
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 44_100,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for _ in 0..100 {
            w.write_sample(0i16).unwrap();
            w.write_sample(0i16).unwrap();
        }
        w.finalize().unwrap();
        assert!(matches!(
            read_wav_mono16(&path),
            Err(Error::ChannelCountMismatch { actual: 2, .. })
        ));
    }

    #[test]
    fn concatenation_is_sample_exact() {
        let dir = tempfile::tempdir().unwrap();
        // 3.0 s neutral + 2.0 s happy.
        let n1 = tone(48_000, 40);
        let h1 = tone(32_000, 25);
        write_wav_mono16(&dir.path().join("n1.wav"), &n1).unwrap();
        write_wav_mono16(&dir.path().join("h1.wav"), &h1).unwrap();

        let corpus = vec![
            ClipMeta {
                clip_id: "n1".into(),
                path: "n1.wav".into(),
                speaker_id: "A".into(),
                label: ClipLabel::Neutral,
                duration: Tick::from_seconds(3.0).unwrap(),
                sample_rate: 16_000,
            },
            ClipMeta {
                clip_id: "h1".into(),
                path: "h1.wav".into(),
                speaker_id: "A".into(),
                label: ClipLabel::parse("happy").unwrap(),
                duration: Tick::from_seconds(2.0).unwrap(),
                sample_rate: 16_000,
            },
        ];
        let cfg = SimulationConfig {
            pattern_probs: [0.0, 1.0, 0.0, 0.0],
            target_count: 1,
            seed: 3,
            ..SimulationConfig::default()
        };
        let plan = plan_simulation(&corpus, &cfg).unwrap();
        let by_id: HashMap<&str, &ClipMeta> =
            corpus.iter().map(|c| (c.clip_id.as_str(), c)).collect();
        let (samples, reference) =
            render_utterance(&plan.utterances[0], &by_id, dir.path()).unwrap();
        assert_eq!(samples.len(), 80_000);
        assert_eq!(&samples[..48_000], n1.as_slice());
        assert_eq!(&samples[48_000..], h1.as_slice());
        assert_eq!(reference, plan.utterances[0].reference);
        // 5.0 s of ticks at 16 samples per millisecond.
        assert_eq!(samples.len() as u64 * 10, reference.duration().get() * 16);
    }
}
