//! Canonical JSON emission.
//!
//! serde_json would be the obvious writer, but byte-stable files need
//! a fixed key order and fixed decimal formatting for seconds, so the
//! few record shapes we write are emitted by hand: keys sorted
//! alphabetically, two-space indent, seconds with exactly four
//! decimals, a trailing newline.

use crate::sim::SimulationPlan;
use crate::tick::Tick;
use crate::timeline::Timeline;

use super::UtteranceRecord;

/// Exact at tick resolution.
pub fn seconds(t: Tick) -> String {
    format!("{:.4}", t.to_seconds())
}

pub fn seconds_f64(s: f64) -> String {
    format!("{s:.4}")
}

/// Shortest representation that parses back to the same f64.
pub fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "null".to_owned()
    }
}

pub fn string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Canonical interval JSON for one utterance. Optional fields are
/// omitted when absent.
pub fn utterance_record(record: &UtteranceRecord) -> String {
    let mut out = String::new();
    utterance_record_indented(record, 0, &mut out);
    out.push('\n');
    out
}

fn utterance_record_indented(record: &UtteranceRecord, level: usize, out: &mut String) {
    let pad = "  ".repeat(level);
    let inner = "  ".repeat(level + 1);
    out.push_str("{\n");
    out.push_str(&format!(
        "{inner}\"duration_s\": {},\n",
        seconds_f64(record.duration_s)
    ));
    out.push_str(&format!("{inner}\"segments\": "));
    if record.segments.is_empty() {
        out.push_str("[]");
    } else {
        let seg_pad = "  ".repeat(level + 2);
        out.push_str("[\n");
        for (i, seg) in record.segments.iter().enumerate() {
            out.push_str(&format!("{seg_pad}{{"));
            if let Some(c) = seg.confidence {
                out.push_str(&format!("\"confidence\": {}, ", float(c)));
            }
            out.push_str(&format!(
                "\"end_s\": {}, \"label\": {}, \"start_s\": {}}}",
                seconds_f64(seg.end_s),
                string(&seg.label),
                seconds_f64(seg.start_s)
            ));
            out.push_str(if i + 1 < record.segments.len() {
                ",\n"
            } else {
                "\n"
            });
        }
        out.push_str(&format!("{inner}]"));
    }
    out.push_str(",\n");
    if let Some(speaker) = &record.speaker {
        out.push_str(&format!("{inner}\"speaker\": {},\n", string(speaker)));
    }
    if let Some(transcript) = &record.transcript {
        out.push_str(&format!("{inner}\"transcript\": {},\n", string(transcript)));
    }
    out.push_str(&format!(
        "{inner}\"utterance_id\": {}\n",
        string(&record.utterance_id)
    ));
    out.push_str(&format!("{pad}}}"));
}

fn timeline_record(timeline: &Timeline, speaker: Option<&str>) -> UtteranceRecord {
    let mut record = UtteranceRecord::from_timeline(timeline);
    record.speaker = speaker.map(str::to_owned);
    record
}

/// Canonical plan JSON: an array of planned utterances with stable
/// field order.
pub fn simulation_plan(plan: &SimulationPlan) -> String {
    let mut out = String::new();
    if plan.utterances.is_empty() {
        out.push_str("[]\n");
        return out;
    }
    out.push_str("[\n");
    for (i, u) in plan.utterances.iter().enumerate() {
        out.push_str("  {\n");
        out.push_str(&format!(
            "    \"pattern\": {},\n",
            string(&u.pattern.to_string())
        ));
        out.push_str("    \"reference\": ");
        utterance_record_indented(
            &timeline_record(&u.reference, Some(&u.speaker_id)),
            2,
            &mut out,
        );
        out.push_str(",\n");
        out.push_str("    \"slot_clips\": [");
        for (j, slot) in u.slot_clips.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            out.push('[');
            for (k, clip) in slot.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                out.push_str(&string(clip));
            }
            out.push(']');
        }
        out.push_str("],\n");
        out.push_str(&format!("    \"speaker_id\": {},\n", string(&u.speaker_id)));
        out.push_str(&format!(
            "    \"utterance_id\": {}\n",
            string(&u.utterance_id)
        ));
        out.push_str(if i + 1 < plan.utterances.len() {
            "  },\n"
        } else {
            "  }\n"
        });
    }
    out.push_str("]\n");
    out
}

/// Canonical per-utterance reference emitted alongside rendered audio.
pub fn rendered_reference(timeline: &Timeline, speaker: &str) -> String {
    let mut out = String::new();
    utterance_record_indented(&timeline_record(timeline, Some(speaker)), 0, &mut out);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeline::{EmotionLabel, ParseMode, Segment, TimelineKind};

    #[test]
    fn seconds_formatting_is_fixed_width() {
        assert_eq!(seconds(Tick::new(0)), "0.0000");
        assert_eq!(seconds(Tick::new(1)), "0.0001");
        assert_eq!(seconds(Tick::new(123_456)), "12.3456");
    }

    #[test]
    fn strings_are_escaped() {
        assert_eq!(string("a\"b\\c\n"), r#""a\"b\\c\n""#);
    }

    #[test]
    fn record_emission_is_stable_and_parseable() {
        let tl = Timeline::normalize(
            "utt \"quoted\"",
            vec![Segment::new(
                EmotionLabel::Angry,
                Tick::new(1),
                Tick::new(2),
            )],
            Tick::new(10_000),
            TimelineKind::Reference,
            ParseMode::Strict,
        )
        .unwrap();
        let record = UtteranceRecord::from_timeline(&tl);
        let a = utterance_record(&record);
        let b = utterance_record(&record);
        assert_eq!(a, b);
        let parsed: UtteranceRecord = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed.utterance_id, "utt \"quoted\"");
        assert_eq!(parsed.segments.len(), 1);
    }
}
