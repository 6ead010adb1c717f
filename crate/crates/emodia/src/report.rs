//! Dataset statistics and report rendering.
//!
//! All rendering is deterministic and locale-independent: fixed key
//! order, fixed decimal separators, percentages to one decimal place,
//! seconds to four. JSON keeps ratios at full precision.

use crate::error::{Error, Result};
use crate::framing::{classify_transition, timeline_runs, TransitionTable};
use crate::io::canon;
use crate::metrics::{AggregateReport, EderBreakdown};
use crate::tick::Tick;
use crate::timeline::{EmotionLabel, Timeline};
use std::collections::HashMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

/// Whether emotion proportions count utterances or weigh them by
/// duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProportionWeighting {
    #[default]
    ByCount,
    ByDuration,
}

/// Which corpus-level summaries to print.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AggregateChoice {
    Macro,
    Micro,
    #[default]
    Both,
}

impl AggregateChoice {
    fn wants_macro(self) -> bool {
        matches!(self, AggregateChoice::Macro | AggregateChoice::Both)
    }
    fn wants_micro(self) -> bool {
        matches!(self, AggregateChoice::Micro | AggregateChoice::Both)
    }
}

/// Corpus-level reference statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub n_utterances: usize,
    pub total_duration: Tick,
    pub n_speakers: Option<usize>,
    /// Fraction of single-event utterances per emotion, in class order.
    pub emotion_proportions: [f64; 3],
    /// (bucket start in whole seconds, count); non-empty buckets only.
    pub duration_histogram: Vec<(u64, usize)>,
    /// Utterances excluded from the proportions because they do not
    /// contain exactly one emotional event.
    pub invalid_utterances: Vec<String>,
}

/// Compute corpus statistics over reference timelines.
pub fn dataset_stats(
    references: &[Timeline],
    speaker_map: Option<&HashMap<String, String>>,
    weighting: ProportionWeighting,
) -> Result<DatasetStats> {
    if references.is_empty() {
        return Err(Error::EmptyCorpus("no reference utterances".to_owned()));
    }

    let mut total_duration = Tick::ZERO;
    let mut weights = [0.0f64; 3];
    let mut weight_sum = 0.0;
    let mut histogram: HashMap<u64, usize> = HashMap::new();
    let mut invalid = Vec::new();

    for reference in references {
        total_duration = total_duration + reference.duration();
        *histogram
            .entry(reference.duration().get() / crate::tick::TICKS_PER_SECOND)
            .or_default() += 1;

        let pattern = classify_transition(&timeline_runs(reference)?);
        match pattern.emotion() {
            Some(e) => {
                let w = match weighting {
                    ProportionWeighting::ByCount => 1.0,
                    ProportionWeighting::ByDuration => reference.duration().get() as f64,
                };
                weights[e.index()] += w;
                weight_sum += w;
            }
            None => invalid.push(reference.utterance_id().to_owned()),
        }
    }

    let emotion_proportions = if weight_sum > 0.0 {
        [
            weights[0] / weight_sum,
            weights[1] / weight_sum,
            weights[2] / weight_sum,
        ]
    } else {
        [0.0; 3]
    };

    let n_speakers = speaker_map.map(|map| {
        let mut speakers: Vec<&String> = references
            .iter()
            .filter_map(|r| map.get(r.utterance_id()))
            .collect();
        speakers.sort();
        speakers.dedup();
        speakers.len()
    });

    let mut duration_histogram: Vec<(u64, usize)> = histogram.into_iter().collect();
    duration_histogram.sort();

    Ok(DatasetStats {
        n_utterances: references.len(),
        total_duration,
        n_speakers,
        emotion_proportions,
        duration_histogram,
        invalid_utterances: {
            invalid.sort();
            invalid
        },
    })
}

fn percent(ratio: f64) -> String {
    format!("{:.1}%", ratio * 100.0)
}

// ---- aggregate EDER reports ----

pub fn render_aggregate(
    report: &AggregateReport,
    format: Format,
    choice: AggregateChoice,
) -> String {
    match format {
        Format::Text => aggregate_text(report, choice),
        Format::Csv => aggregate_csv(report, choice),
        Format::Json => aggregate_json(report, choice),
    }
}

fn aggregate_text(report: &AggregateReport, choice: AggregateChoice) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:>10} {:>9} {:>9} {:>9} {:>9} {:>8}",
        "Utterance", "Dur(s)", "FA(s)", "ME(s)", "CF(s)", "OL(s)", "EDER"
    );
    for (id, b) in &report.per_utterance {
        let _ = writeln!(
            out,
            "{:<24} {:>10} {:>9} {:>9} {:>9} {:>9} {:>8}",
            id,
            canon::seconds(b.duration),
            canon::seconds(b.fa),
            canon::seconds(b.me),
            canon::seconds(b.cf),
            canon::seconds(b.ol),
            percent(b.eder()),
        );
    }
    let t = &report.component_totals;
    let _ = writeln!(
        out,
        "Component totals: FA {} s, ME {} s, CF {} s, OL {} s over {} s",
        canon::seconds(t.fa),
        canon::seconds(t.me),
        canon::seconds(t.cf),
        canon::seconds(t.ol),
        canon::seconds(report.total_duration),
    );
    if choice.wants_macro() {
        let _ = writeln!(
            out,
            "Macro EDER: {} (per-utterance std {})",
            percent(report.macro_eder),
            percent(report.macro_eder_std),
        );
    }
    if choice.wants_micro() {
        let _ = writeln!(out, "Micro EDER: {}", percent(report.micro_eder));
    }
    out
}

fn breakdown_csv_row(id: &str, b: &EderBreakdown) -> String {
    format!(
        "{id},{},{},{},{},{},{},{:.4}\n",
        canon::seconds(b.duration),
        canon::seconds(b.fa),
        canon::seconds(b.me),
        canon::seconds(b.cf),
        canon::seconds(b.ol),
        canon::seconds(b.correct),
        b.eder(),
    )
}

fn aggregate_csv(report: &AggregateReport, choice: AggregateChoice) -> String {
    let mut out = String::from("utterance_id,duration_s,fa_s,me_s,cf_s,ol_s,correct_s,eder\n");
    for (id, b) in &report.per_utterance {
        out.push_str(&breakdown_csv_row(id, b));
    }
    let t = &report.component_totals;
    if choice.wants_macro() {
        let _ = writeln!(out, "__macro__,,,,,,,{:.4}", report.macro_eder);
    }
    if choice.wants_micro() {
        let _ = writeln!(
            out,
            "__micro__,{},{},{},{},{},,{:.4}",
            canon::seconds(report.total_duration),
            canon::seconds(t.fa),
            canon::seconds(t.me),
            canon::seconds(t.cf),
            canon::seconds(t.ol),
            report.micro_eder,
        );
    }
    out
}

fn breakdown_json(b: &EderBreakdown, id: Option<&str>) -> String {
    let mut out = String::from("{");
    let _ = write!(
        out,
        "\"cf_s\": {}, \"correct_s\": {}, \"duration_s\": {}, \"eder\": {}, \"fa_s\": {}, \"me_s\": {}, \"ol_s\": {}",
        canon::seconds(b.cf),
        canon::seconds(b.correct),
        canon::seconds(b.duration),
        canon::float(b.eder()),
        canon::seconds(b.fa),
        canon::seconds(b.me),
        canon::seconds(b.ol),
    );
    if let Some(id) = id {
        let _ = write!(out, ", \"utterance_id\": {}", canon::string(id));
    }
    out.push('}');
    out
}

fn aggregate_json(report: &AggregateReport, choice: AggregateChoice) -> String {
    let mut out = String::from("{\n");
    let t = &report.component_totals;
    let _ = writeln!(
        out,
        "  \"component_totals\": {{\"cf_s\": {}, \"fa_s\": {}, \"me_s\": {}, \"ol_s\": {}}},",
        canon::seconds(t.cf),
        canon::seconds(t.fa),
        canon::seconds(t.me),
        canon::seconds(t.ol),
    );
    if choice.wants_macro() {
        let _ = writeln!(
            out,
            "  \"macro_eder\": {},",
            canon::float(report.macro_eder)
        );
        let _ = writeln!(
            out,
            "  \"macro_eder_std\": {},",
            canon::float(report.macro_eder_std)
        );
    }
    if choice.wants_micro() {
        let _ = writeln!(
            out,
            "  \"micro_eder\": {},",
            canon::float(report.micro_eder)
        );
    }
    out.push_str("  \"per_utterance\": [\n");
    for (i, (id, b)) in report.per_utterance.iter().enumerate() {
        out.push_str("    ");
        out.push_str(&breakdown_json(b, Some(id)));
        out.push_str(if i + 1 < report.per_utterance.len() {
            ",\n"
        } else {
            "\n"
        });
    }
    out.push_str("  ],\n");
    let _ = writeln!(
        out,
        "  \"total_duration_s\": {}",
        canon::seconds(report.total_duration)
    );
    out.push_str("}\n");
    out
}

/// A single utterance's breakdown on its own.
pub fn render_breakdown(utterance_id: &str, b: &EderBreakdown, format: Format) -> String {
    match format {
        Format::Text => format!(
            "{utterance_id}: EDER {} (FA {} s, ME {} s, CF {} s, OL {} s, correct {} s of {} s)\n",
            percent(b.eder()),
            canon::seconds(b.fa),
            canon::seconds(b.me),
            canon::seconds(b.cf),
            canon::seconds(b.ol),
            canon::seconds(b.correct),
            canon::seconds(b.duration),
        ),
        Format::Csv => {
            let mut out =
                String::from("utterance_id,duration_s,fa_s,me_s,cf_s,ol_s,correct_s,eder\n");
            out.push_str(&breakdown_csv_row(utterance_id, b));
            out
        }
        Format::Json => {
            let mut out = breakdown_json(b, Some(utterance_id));
            out.push('\n');
            out
        }
    }
}

// ---- transition tables ----

pub fn render_transitions(table: &TransitionTable, format: Format) -> String {
    match format {
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:<18} {:>6} {:>6} {:>8}",
                "Transition", "TN", "CN", "ACC"
            );
            for row in &table.rows {
                let acc = row.accuracy().map_or("-".to_owned(), percent);
                let _ = writeln!(
                    out,
                    "{:<18} {:>6} {:>6} {:>8}",
                    row.pattern.to_string(),
                    row.tn,
                    row.cn,
                    acc
                );
            }
            let total_acc = table.total_accuracy().map_or("-".to_owned(), percent);
            let _ = writeln!(
                out,
                "{:<18} {:>6} {:>6} {:>8}",
                "Total", table.total_tn, table.total_cn, total_acc
            );
            out
        }
        Format::Csv => {
            let mut out = String::from("pattern,tn,cn,acc\n");
            for row in &table.rows {
                let acc = row.accuracy().map_or(String::new(), |a| format!("{a:.4}"));
                let _ = writeln!(out, "{},{},{},{}", row.pattern, row.tn, row.cn, acc);
            }
            let acc = table
                .total_accuracy()
                .map_or(String::new(), |a| format!("{a:.4}"));
            let _ = writeln!(out, "total,{},{},{}", table.total_tn, table.total_cn, acc);
            out
        }
        Format::Json => {
            let mut out = String::from("{\n  \"rows\": [\n");
            for (i, row) in table.rows.iter().enumerate() {
                let acc = row.accuracy().map_or("null".to_owned(), canon::float);
                let _ = write!(
                    out,
                    "    {{\"acc\": {acc}, \"cn\": {}, \"pattern\": {}, \"tn\": {}}}",
                    row.cn,
                    canon::string(&row.pattern.to_string()),
                    row.tn
                );
                out.push_str(if i + 1 < table.rows.len() {
                    ",\n"
                } else {
                    "\n"
                });
            }
            let total_acc = table
                .total_accuracy()
                .map_or("null".to_owned(), canon::float);
            let _ = writeln!(
                out,
                "  ],\n  \"total\": {{\"acc\": {total_acc}, \"cn\": {}, \"tn\": {}}}",
                table.total_cn, table.total_tn
            );
            out.push_str("}\n");
            out
        }
    }
}

// ---- dataset statistics ----

pub fn render_stats(stats: &DatasetStats, format: Format) -> String {
    match format {
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "Number of utterances  {}", stats.n_utterances);
            let _ = writeln!(
                out,
                "Total duration        {} s",
                canon::seconds(stats.total_duration)
            );
            if let Some(n) = stats.n_speakers {
                let _ = writeln!(out, "Number of speakers    {n}");
            }
            for e in EmotionLabel::ALL {
                let _ = writeln!(
                    out,
                    "% {:<19} {}",
                    e.name(),
                    percent(stats.emotion_proportions[e.index()])
                );
            }
            let _ = writeln!(out, "Duration histogram (1 s buckets)");
            for (bucket, count) in &stats.duration_histogram {
                let _ = writeln!(out, "  [{},{}) s  {}", bucket, bucket + 1, count);
            }
            if !stats.invalid_utterances.is_empty() {
                let _ = writeln!(
                    out,
                    "Excluded (not single-event): {}",
                    stats.invalid_utterances.join(", ")
                );
            }
            out
        }
        Format::Csv => {
            let mut out = String::from("metric,value\n");
            let _ = writeln!(out, "n_utterances,{}", stats.n_utterances);
            let _ = writeln!(
                out,
                "total_duration_s,{}",
                canon::seconds(stats.total_duration)
            );
            if let Some(n) = stats.n_speakers {
                let _ = writeln!(out, "n_speakers,{n}");
            }
            for e in EmotionLabel::ALL {
                let _ = writeln!(
                    out,
                    "proportion_{},{:.4}",
                    e.name(),
                    stats.emotion_proportions[e.index()]
                );
            }
            for (bucket, count) in &stats.duration_histogram {
                let _ = writeln!(out, "histogram_{bucket},{count}");
            }
            let _ = writeln!(out, "n_invalid,{}", stats.invalid_utterances.len());
            out
        }
        Format::Json => {
            let mut out = String::from("{\n");
            out.push_str("  \"duration_histogram\": [");
            for (i, (bucket, count)) in stats.duration_histogram.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "[{bucket}, {count}]");
            }
            out.push_str("],\n");
            let _ = writeln!(
                out,
                "  \"emotion_proportions\": {{\"angry\": {}, \"happy\": {}, \"sad\": {}}},",
                canon::float(stats.emotion_proportions[EmotionLabel::Angry.index()]),
                canon::float(stats.emotion_proportions[EmotionLabel::Happy.index()]),
                canon::float(stats.emotion_proportions[EmotionLabel::Sad.index()]),
            );
            out.push_str("  \"invalid_utterances\": [");
            for (i, id) in stats.invalid_utterances.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&canon::string(id));
            }
            out.push_str("],\n");
            if let Some(n) = stats.n_speakers {
                let _ = writeln!(out, "  \"n_speakers\": {n},");
            }
            let _ = writeln!(out, "  \"n_utterances\": {},", stats.n_utterances);
            let _ = writeln!(
                out,
                "  \"total_duration_s\": {}",
                canon::seconds(stats.total_duration)
            );
            out.push_str("}\n");
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framing::{transition_accuracy, FrameSpec};
    use crate::metrics::{aggregate, eder};
    use crate::timeline::{ParseMode, Segment, TimelineKind};

    fn secs(s: f64) -> Tick {
        Tick::from_seconds(s).unwrap()
    }

    fn reference(id: &str, duration: f64, segs: &[(EmotionLabel, f64, f64)]) -> Timeline {
        Timeline::normalize(
            id,
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
    fn proportions_by_count() {
        let refs = vec![
            reference("a", 4.0, &[(EmotionLabel::Happy, 0.0, 4.0)]),
            reference("b", 6.0, &[(EmotionLabel::Sad, 1.0, 2.0)]),
        ];
        let stats = dataset_stats(&refs, None, ProportionWeighting::ByCount).unwrap();
        assert_eq!(stats.n_utterances, 2);
        assert_eq!(stats.total_duration, secs(10.0));
        assert_eq!(stats.emotion_proportions[EmotionLabel::Happy.index()], 0.5);
        assert_eq!(stats.emotion_proportions[EmotionLabel::Sad.index()], 0.5);
        assert!(stats.invalid_utterances.is_empty());
        assert_eq!(stats.duration_histogram, vec![(4, 1), (6, 1)]);
    }

    #[test]
    fn proportions_by_duration() {
        let refs = vec![
            reference("a", 4.0, &[(EmotionLabel::Happy, 0.0, 4.0)]),
            reference("b", 6.0, &[(EmotionLabel::Sad, 1.0, 2.0)]),
        ];
        let stats = dataset_stats(&refs, None, ProportionWeighting::ByDuration).unwrap();
        assert!((stats.emotion_proportions[EmotionLabel::Happy.index()] - 0.4).abs() < 1e-12);
        assert!((stats.emotion_proportions[EmotionLabel::Sad.index()] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn invalid_utterances_are_excluded_and_reported() {
        let refs = vec![
            reference("ok", 4.0, &[(EmotionLabel::Happy, 0.0, 4.0)]),
            reference(
                "double",
                10.0,
                &[
                    (EmotionLabel::Happy, 0.0, 2.0),
                    (EmotionLabel::Happy, 4.0, 6.0),
                ],
            ),
        ];
        let stats = dataset_stats(&refs, None, ProportionWeighting::ByCount).unwrap();
        assert_eq!(stats.invalid_utterances, vec!["double".to_owned()]);
        assert_eq!(stats.emotion_proportions[EmotionLabel::Happy.index()], 1.0);
    }

    #[test]
    fn speaker_count_from_map() {
        let refs = vec![
            reference("a", 4.0, &[(EmotionLabel::Happy, 0.0, 4.0)]),
            reference("b", 6.0, &[(EmotionLabel::Sad, 1.0, 2.0)]),
        ];
        let map: HashMap<String, String> = [("a", "spk1"), ("b", "spk1")]
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v.to_owned()))
            .collect();
        let stats = dataset_stats(&refs, Some(&map), ProportionWeighting::ByCount).unwrap();
        assert_eq!(stats.n_speakers, Some(1));
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(
            dataset_stats(&[], None, ProportionWeighting::ByCount),
            Err(Error::EmptyCorpus(_))
        ));
    }

    #[test]
    fn aggregate_render_contains_rows_and_is_stable() {
        let r = reference("u1", 10.0, &[(EmotionLabel::Happy, 2.0, 5.0)]);
        let h = Timeline::empty("u1", secs(10.0), TimelineKind::Hypothesis).unwrap();
        let b = eder(&r, &h).unwrap();
        let report = aggregate(vec![("u1".to_owned(), b)]).unwrap();

        let text = render_aggregate(&report, Format::Text, AggregateChoice::Both);
        assert!(text.contains("EDER"));
        assert!(text.contains("u1"));
        assert!(text.contains("30.0%"));
        assert_eq!(
            text,
            render_aggregate(&report, Format::Text, AggregateChoice::Both)
        );

        let csv = render_aggregate(&report, Format::Csv, AggregateChoice::Both);
        assert!(csv.contains("u1,10.0000,0.0000,3.0000,0.0000,0.0000,7.0000,0.3000"));

        let json = render_aggregate(&report, Format::Json, AggregateChoice::Both);
        assert!(json.contains("\"macro_eder\": 0.3"));
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["per_utterance"][0]["eder"], 0.3);
    }

    #[test]
    fn transition_render_has_twelve_rows_and_total() {
        let r = reference("u1", 4.0, &[(EmotionLabel::Sad, 2.0, 4.0)]);
        let frames = crate::framing::intervals_to_frames(&r, FrameSpec::default()).unwrap();
        let table = transition_accuracy(&[(r, frames)], FrameSpec::default()).unwrap();
        let text = render_transitions(&table, Format::Text);
        assert_eq!(text.lines().count(), 14); // header + 12 rows + total
        assert!(text.contains("null-sad"));
        assert!(text.lines().last().unwrap().starts_with("Total"));
        assert!(text.contains("100.0%"));

        let json = render_transitions(&table, Format::Json);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["rows"].as_array().unwrap().len(), 12);
        assert_eq!(parsed["total"]["tn"], 1);
    }

    #[test]
    fn stats_render_formats() {
        let refs = vec![reference("a", 4.0, &[(EmotionLabel::Happy, 0.0, 4.0)])];
        let stats = dataset_stats(&refs, None, ProportionWeighting::ByCount).unwrap();
        let text = render_stats(&stats, Format::Text);
        assert!(text.contains("Number of utterances  1"));
        assert!(text.contains("% happy"));
        let json = render_stats(&stats, Format::Json);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["n_utterances"], 1);
        let csv = render_stats(&stats, Format::Csv);
        assert!(csv.starts_with("metric,value\n"));
    }
}
