//! Training-corpus simulation: seeded, same-speaker concatenation of
//! utterance-level emotion clips into the four single-event transition
//! patterns, with exact ground-truth boundaries.
//!
//! Planning is fully determined by (manifest order, config, seed): the
//! generator is [`crate::prng::SplitMix64`] and every draw is documented
//! in `plan_simulation`, so the same inputs produce an identical plan on
//! any machine.

mod manifest;
mod render;
mod vad;

pub use manifest::load_manifest;
pub use render::{read_wav_mono16, render_utterance, write_wav_mono16};
pub use vad::{detect_silence_runs, validate_recording, RecordingValidation, VadParams};

use crate::error::{Error, Result};
use crate::framing::TransitionPattern;
use crate::prng::SplitMix64;
use crate::tick::Tick;
use crate::timeline::{EmotionLabel, ParseMode, Segment, Timeline, TimelineKind};
use std::collections::HashMap;

/// Category of a source clip. Unlike scored timelines, neutral clips
/// are explicit here: they fill the null slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClipLabel {
    Emotion(EmotionLabel),
    Neutral,
}

impl ClipLabel {
    pub fn name(self) -> &'static str {
        match self {
            ClipLabel::Emotion(e) => e.name(),
            ClipLabel::Neutral => "neutral",
        }
    }

    pub fn parse(s: &str) -> Result<ClipLabel> {
        match s {
            "neutral" => Ok(ClipLabel::Neutral),
            "happy" | "sad" | "angry" => Ok(ClipLabel::Emotion(s.parse()?)),
            other => Err(Error::UnknownLabel {
                context: "clip label".to_owned(),
                label: other.to_owned(),
            }),
        }
    }
}

/// One source clip from the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipMeta {
    pub clip_id: String,
    pub path: String,
    pub speaker_id: String,
    pub label: ClipLabel,
    pub duration: Tick,
    pub sample_rate: u32,
}

/// How many clips fill one slot (inclusive range, default exactly 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClipsPerSlot {
    pub min: u32,
    pub max: u32,
}

impl Default for ClipsPerSlot {
    fn default() -> ClipsPerSlot {
        ClipsPerSlot { min: 1, max: 1 }
    }
}

/// Simulation parameters. `pattern_probs` is ordered
/// (emo, null-emo, emo-null, null-emo-null).
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub pattern_probs: [f64; 4],
    pub clips_per_slot: ClipsPerSlot,
    pub seed: u64,
    pub max_silence: Tick,
    pub target_count: usize,
    /// Clips are never reused inside one utterance; across utterances
    /// they are, unless this is false.
    pub reuse_across_utterances: bool,
}

impl Default for SimulationConfig {
    fn default() -> SimulationConfig {
        SimulationConfig {
            pattern_probs: [0.25; 4],
            clips_per_slot: ClipsPerSlot::default(),
            seed: 0,
            max_silence: Tick::from_millis(200),
            target_count: 0,
            reuse_across_utterances: true,
        }
    }
}

const PROB_SUM_TOLERANCE: f64 = 1e-12;

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self
            .pattern_probs
            .iter()
            .any(|p| !p.is_finite() || *p < 0.0)
        {
            return Err(Error::BadConfig(
                "pattern probabilities must be non-negative".to_owned(),
            ));
        }
        let sum: f64 = self.pattern_probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::BadConfig(format!(
                "pattern probabilities sum to {sum}, expected 1"
            )));
        }
        if self.clips_per_slot.min == 0 || self.clips_per_slot.min > self.clips_per_slot.max {
            return Err(Error::BadConfig(
                "clips_per_slot must satisfy 1 <= min <= max".to_owned(),
            ));
        }
        Ok(())
    }
}

/// The four shapes in probability order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PatternShape {
    Emo,
    NullEmo,
    EmoNull,
    NullEmoNull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SlotKind {
    Null,
    Emo,
}

impl PatternShape {
    const ALL: [PatternShape; 4] = [
        PatternShape::Emo,
        PatternShape::NullEmo,
        PatternShape::EmoNull,
        PatternShape::NullEmoNull,
    ];

    fn slots(self) -> &'static [SlotKind] {
        match self {
            PatternShape::Emo => &[SlotKind::Emo],
            PatternShape::NullEmo => &[SlotKind::Null, SlotKind::Emo],
            PatternShape::EmoNull => &[SlotKind::Emo, SlotKind::Null],
            PatternShape::NullEmoNull => &[SlotKind::Null, SlotKind::Emo, SlotKind::Null],
        }
    }

    fn name(self) -> &'static str {
        match self {
            PatternShape::Emo => "emo",
            PatternShape::NullEmo => "null-emo",
            PatternShape::EmoNull => "emo-null",
            PatternShape::NullEmoNull => "null-emo-null",
        }
    }

    fn null_slots(self) -> u32 {
        self.slots()
            .iter()
            .filter(|s| **s == SlotKind::Null)
            .count() as u32
    }

    fn with_emotion(self, e: EmotionLabel) -> TransitionPattern {
        match self {
            PatternShape::Emo => TransitionPattern::Emo(e),
            PatternShape::NullEmo => TransitionPattern::NullEmo(e),
            PatternShape::EmoNull => TransitionPattern::EmoNull(e),
            PatternShape::NullEmoNull => TransitionPattern::NullEmoNull(e),
        }
    }
}

/// One planned utterance: which clips to concatenate and the exact
/// reference annotation the concatenation will produce.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedUtterance {
    pub utterance_id: String,
    pub speaker_id: String,
    pub pattern: TransitionPattern,
    /// Clip ids per slot, in concatenation order.
    pub slot_clips: Vec<Vec<String>>,
    pub reference: Timeline,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationPlan {
    pub utterances: Vec<PlannedUtterance>,
}

/// Per-speaker pools of clip indices, corpus order preserved.
struct SpeakerPool {
    speaker_id: String,
    neutral: Vec<usize>,
    emotional: [Vec<usize>; 3],
}

impl SpeakerPool {
    fn can_fill(&self, shape: PatternShape, per_slot_min: u32) -> bool {
        let neutral_needed = shape.null_slots() * per_slot_min;
        if (self.neutral.len() as u32) < neutral_needed {
            return false;
        }
        self.emotional
            .iter()
            .any(|pool| pool.len() as u32 >= per_slot_min)
    }
}

const MAX_DRAW_RETRIES: u32 = 100;

/// Draw `target_count` utterances.
///
/// Draw order per utterance, using one SplitMix64 stream seeded with
/// `config.seed`:
///   1. a speaker, uniform over speakers that can fill some positive-
///      probability shape;
///   2. a shape from `pattern_probs` (one `next_f64`);
///   3. per slot, the clip count (only when min < max), then each clip
///      without replacement inside the utterance; the emotional slot
///      first draws the emotion uniformly over those with enough clips.
///
/// A speaker that cannot fill the drawn shape costs one retry; after
/// 100 failed draws for one utterance the plan errors out.
pub fn plan_simulation(corpus: &[ClipMeta], config: &SimulationConfig) -> Result<SimulationPlan> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus("manifest has no clips".to_owned()));
    }

    let mut pools: Vec<SpeakerPool> = Vec::new();
    let mut pool_index: HashMap<&str, usize> = HashMap::new();
    for (i, clip) in corpus.iter().enumerate() {
        let at = *pool_index.entry(&clip.speaker_id).or_insert_with(|| {
            pools.push(SpeakerPool {
                speaker_id: clip.speaker_id.clone(),
                neutral: Vec::new(),
                emotional: [Vec::new(), Vec::new(), Vec::new()],
            });
            pools.len() - 1
        });
        match clip.label {
            ClipLabel::Neutral => pools[at].neutral.push(i),
            ClipLabel::Emotion(e) => pools[at].emotional[e.index()].push(i),
        }
    }

    let min_per_slot = config.clips_per_slot.min;
    let shapes_in_play: Vec<PatternShape> = PatternShape::ALL
        .into_iter()
        .zip(config.pattern_probs)
        .filter(|(_, p)| *p > 0.0)
        .map(|(s, _)| s)
        .collect();

    let mut rng = SplitMix64::new(config.seed);
    let mut plan = SimulationPlan::default();

    for utterance_index in 0..config.target_count {
        let planned = draw_utterance(
            utterance_index,
            corpus,
            &mut pools,
            &shapes_in_play,
            config,
            min_per_slot,
            &mut rng,
        )?;
        plan.utterances.push(planned);
    }

    Ok(plan)
}

fn draw_utterance(
    utterance_index: usize,
    corpus: &[ClipMeta],
    pools: &mut [SpeakerPool],
    shapes_in_play: &[PatternShape],
    config: &SimulationConfig,
    min_per_slot: u32,
    rng: &mut SplitMix64,
) -> Result<PlannedUtterance> {
    let mut last_failure: Option<(String, PatternShape)> = None;

    for _ in 0..MAX_DRAW_RETRIES {
        let eligible: Vec<usize> = (0..pools.len())
            .filter(|&i| {
                shapes_in_play
                    .iter()
                    .any(|&s| pools[i].can_fill(s, min_per_slot))
            })
            .collect();
        if eligible.is_empty() {
            break;
        }
        let pool_at = eligible[rng.next_below(eligible.len() as u64) as usize];
        let shape = draw_shape(rng, &config.pattern_probs);

        match fill_slots(corpus, &pools[pool_at], shape, config.clips_per_slot, rng) {
            Some(slot_clips) => {
                let planned =
                    assemble(utterance_index, corpus, &pools[pool_at], shape, &slot_clips)?;
                if !config.reuse_across_utterances {
                    let used: Vec<usize> = slot_clips.iter().flatten().copied().collect();
                    let pool = &mut pools[pool_at];
                    pool.neutral.retain(|i| !used.contains(i));
                    for e in &mut pool.emotional {
                        e.retain(|i| !used.contains(i));
                    }
                }
                return Ok(planned);
            }
            None => {
                last_failure = Some((pools[pool_at].speaker_id.clone(), shape));
            }
        }
    }

    let (speaker_id, shape) = last_failure.unwrap_or_else(|| {
        (
            "<none eligible>".to_owned(),
            shapes_in_play.first().copied().unwrap_or(PatternShape::Emo),
        )
    });
    Err(Error::InsufficientClips {
        speaker_id,
        pattern: shape.name().to_owned(),
        retries: MAX_DRAW_RETRIES,
    })
}

fn draw_shape(rng: &mut SplitMix64, probs: &[f64; 4]) -> PatternShape {
    let r = rng.next_f64();
    let mut acc = 0.0;
    let mut last = None;
    for (shape, &p) in PatternShape::ALL.into_iter().zip(probs) {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = Some(shape);
        if r < acc {
            return shape;
        }
    }
    last.expect("validated config has a positive-probability shape")
}

/// Pick clip indices for every slot, or None when the speaker cannot
/// fill the drawn shape.
fn fill_slots(
    corpus: &[ClipMeta],
    pool: &SpeakerPool,
    shape: PatternShape,
    per_slot: ClipsPerSlot,
    rng: &mut SplitMix64,
) -> Option<Vec<Vec<usize>>> {
    let mut used: Vec<usize> = Vec::new();
    let mut slots = Vec::with_capacity(shape.slots().len());

    for kind in shape.slots() {
        let k = if per_slot.min == per_slot.max {
            per_slot.min
        } else {
            per_slot.min + rng.next_below((per_slot.max - per_slot.min + 1) as u64) as u32
        };
        let candidates: Vec<usize> = match kind {
            SlotKind::Null => pool
                .neutral
                .iter()
                .copied()
                .filter(|i| !used.contains(i))
                .collect(),
            SlotKind::Emo => {
                let available: Vec<&Vec<usize>> = pool
                    .emotional
                    .iter()
                    .filter(|p| p.iter().filter(|i| !used.contains(i)).count() as u32 >= k)
                    .collect();
                if available.is_empty() {
                    return None;
                }
                let chosen = available[rng.next_below(available.len() as u64) as usize];
                chosen
                    .iter()
                    .copied()
                    .filter(|i| !used.contains(i))
                    .collect()
            }
        };
        if (candidates.len() as u32) < k {
            return None;
        }
        let mut remaining = candidates;
        let mut picked = Vec::with_capacity(k as usize);
        for _ in 0..k {
            let at = rng.next_below(remaining.len() as u64) as usize;
            picked.push(remaining.remove(at));
        }
        used.extend(&picked);
        slots.push(picked);
    }

    debug_assert!(slots
        .iter()
        .flatten()
        .all(|&i| corpus[i].speaker_id == pool.speaker_id));
    Some(slots)
}

fn assemble(
    utterance_index: usize,
    corpus: &[ClipMeta],
    pool: &SpeakerPool,
    shape: PatternShape,
    slot_clips: &[Vec<usize>],
) -> Result<PlannedUtterance> {
    let utterance_id = format!("sim_{utterance_index:06}");

    let mut cursor = Tick::ZERO;
    let mut segments = Vec::new();
    let mut emotion = None;
    for (kind, clips) in shape.slots().iter().zip(slot_clips) {
        let slot_len: Tick = clips.iter().map(|&i| corpus[i].duration).sum();
        if *kind == SlotKind::Emo {
            let e = match corpus[clips[0]].label {
                ClipLabel::Emotion(e) => e,
                ClipLabel::Neutral => unreachable!("emo slot filled with a neutral clip"),
            };
            emotion = Some(e);
            segments.push(Segment::new(e, cursor, cursor + slot_len));
        }
        cursor = cursor + slot_len;
    }
    let reference = Timeline::normalize(
        utterance_id.clone(),
        segments,
        cursor,
        TimelineKind::Reference,
        ParseMode::Strict,
    )?;

    let pattern = shape.with_emotion(emotion.expect("every shape has an emo slot"));
    debug_assert_eq!(
        crate::framing::classify_transition(&crate::framing::timeline_runs(&reference)?),
        pattern,
        "planned reference must classify to the drawn pattern"
    );

    Ok(PlannedUtterance {
        utterance_id,
        speaker_id: pool.speaker_id.clone(),
        pattern,
        slot_clips: slot_clips
            .iter()
            .map(|slot| slot.iter().map(|&i| corpus[i].clip_id.clone()).collect())
            .collect(),
        reference,
    })
}
