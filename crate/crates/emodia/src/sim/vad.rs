//! Energy-threshold voice activity detection used to screen recordings
//! for long in-utterance silences.
//!
//! A frame is silent when its RMS level, in dB relative to full scale,
//! falls below the floor. Silence runs are maximal stretches of silent
//! frames, reported as tick intervals anchored at frame hops.

use crate::error::{Error, Result};
use crate::tick::{Tick, TICKS_PER_SECOND};

const SAMPLE_RATE: u64 = 16_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VadParams {
    pub frame: Tick,
    pub hop: Tick,
    pub floor_dbfs: f64,
}

impl Default for VadParams {
    fn default() -> VadParams {
        VadParams {
            frame: Tick::from_millis(25),
            hop: Tick::from_millis(10),
            floor_dbfs: -45.0,
        }
    }
}

fn ticks_to_samples(t: Tick) -> u64 {
    t.get() * SAMPLE_RATE / TICKS_PER_SECOND
}

fn samples_to_ticks_ceil(samples: u64) -> Tick {
    Tick::new((samples * TICKS_PER_SECOND).div_ceil(SAMPLE_RATE))
}

/// Maximal silent runs as `(start, end)` tick intervals.
pub fn detect_silence_runs(samples: &[i16], params: &VadParams) -> Result<Vec<(Tick, Tick)>> {
    if samples.is_empty() {
        return Err(Error::EmptyAudio);
    }
    if params.frame.is_zero() || params.hop.is_zero() {
        return Err(Error::BadConfig(
            "VAD frame and hop must be positive".to_owned(),
        ));
    }
    let frame_samples = ticks_to_samples(params.frame) as usize;
    let hop_samples = ticks_to_samples(params.hop) as usize;
    if frame_samples == 0 || hop_samples == 0 {
        return Err(Error::BadConfig(
            "VAD frame and hop are below one sample".to_owned(),
        ));
    }
    let total = samples_to_ticks_ceil(samples.len() as u64);

    let mut runs = Vec::new();
    let mut run_start: Option<u64> = None; // frame index
    let mut frame_index = 0u64;
    let mut start_sample = 0usize;
    while start_sample < samples.len() {
        let end_sample = (start_sample + frame_samples).min(samples.len());
        let window = &samples[start_sample..end_sample];
        let energy: f64 = window
            .iter()
            .map(|&s| {
                let x = s as f64 / 32_768.0;
                x * x
            })
            .sum();
        let rms = (energy / window.len() as f64).sqrt();
        let dbfs = 20.0 * rms.log10(); // rms 0 -> -inf, always silent
        let silent = dbfs < params.floor_dbfs;

        if silent {
            run_start.get_or_insert(frame_index);
        } else if let Some(first) = run_start.take() {
            runs.push(run_interval(first, frame_index - 1, params, total));
        }

        frame_index += 1;
        start_sample += hop_samples;
    }
    if let Some(first) = run_start {
        runs.push(run_interval(first, frame_index - 1, params, total));
    }
    Ok(runs)
}

fn run_interval(
    first_frame: u64,
    last_frame: u64,
    params: &VadParams,
    total: Tick,
) -> (Tick, Tick) {
    let start = Tick::new(first_frame * params.hop.get());
    let end = Tick::new((last_frame * params.hop.get() + params.frame.get()).min(total.get()));
    (start, end)
}

/// Outcome of screening one recording.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordingValidation {
    pub accepted: bool,
    /// The longest silent run found, if any.
    pub longest_run: Option<(Tick, Tick)>,
}

/// Reject a recording iff some silent run is strictly longer than
/// `max_silence`.
pub fn validate_recording(
    samples: &[i16],
    max_silence: Tick,
    params: &VadParams,
) -> Result<RecordingValidation> {
    let runs = detect_silence_runs(samples, params)?;
    let longest_run = runs
        .iter()
        .copied()
        .max_by_key(|(start, end)| (*end - *start, std::cmp::Reverse(*start)));
    let accepted = longest_run.is_none_or(|(start, end)| end - start <= max_silence);
    Ok(RecordingValidation {
        accepted,
        longest_run,
    })
}
