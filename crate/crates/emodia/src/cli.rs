//! Command-line frontend.
//!
//! Results go to stdout; diagnostics go to stderr and never interleave
//! into machine-readable output. Exit codes: 0 success, 1 validation or
//! domain error, 2 I/O or parse error, 3 usage error. Every command is
//! deterministic for identical inputs and flags; `--jobs` changes wall
//! time, never output bytes.

use crate::error::{Error, Result};
use crate::framing::{self, FrameSequence, FrameSpec};
use crate::io;
use crate::metrics::{self, EderBreakdown};
use crate::report::{self, AggregateChoice, Format, ProportionWeighting};
use crate::sim::{self, SimulationConfig, VadParams};
use crate::tick::Tick;
use crate::timeline::{ParseMode, Timeline, TimelineKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const JOBS_ENV_VAR: &str = "EMODIA_JOBS";

#[derive(Debug, Parser)]
#[command(
    name = "emodia",
    version,
    about = "Speech emotion diarization scoring, agreement, and dataset simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score hypothesis annotations against references (emotion diarization error rate).
    Score(ScoreArgs),
    /// Tabulate emotion-transition prediction accuracy.
    Transitions(TransitionsArgs),
    /// Frame-wise Fleiss' kappa across annotators.
    Agreement(AgreementArgs),
    /// Build a simulated fine-grained corpus from utterance-level clips.
    Simulate(SimulateArgs),
    /// Screen recordings for over-long silences.
    Validate(ValidateArgs),
    /// Reference corpus statistics.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HypFormat {
    Intervals,
    Frames,
    Rttm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Strict,
    Lenient,
}

impl From<ModeArg> for ParseMode {
    fn from(m: ModeArg) -> ParseMode {
        match m {
            ModeArg::Strict => ParseMode::Strict,
            ModeArg::Lenient => ParseMode::Lenient,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregateArg {
    Macro,
    Micro,
    Both,
}

impl From<AggregateArg> for AggregateChoice {
    fn from(a: AggregateArg) -> AggregateChoice {
        match a {
            AggregateArg::Macro => AggregateChoice::Macro,
            AggregateArg::Micro => AggregateChoice::Micro,
            AggregateArg::Both => AggregateChoice::Both,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Reference interval JSON (file or directory).
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Hypothesis file or directory.
    #[arg(long = "hyp")]
    pub hypothesis: PathBuf,
    #[arg(long = "hyp-format", value_enum, default_value = "intervals")]
    pub hyp_format: HypFormat,
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "both")]
    pub aggregate: AggregateArg,
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatArg,
    /// Worker threads (default: EMODIA_JOBS or available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TransitionsArgs {
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long = "hyp")]
    pub hypothesis: PathBuf,
    /// frames: frame-hypothesis JSON; intervals: interval JSON framed
    /// at --stride.
    #[arg(long = "hyp-format", value_enum, default_value = "frames")]
    pub hyp_format: HypFormat,
    /// Frame stride in seconds for reference framing.
    #[arg(long, default_value_t = 0.02)]
    pub stride: f64,
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct AgreementArgs {
    /// One fileset (file or directory) per annotator; repeat at least twice.
    #[arg(long = "annotator", required = true)]
    pub annotators: Vec<PathBuf>,
    /// Agreement frame length in seconds.
    #[arg(long, default_value_t = 0.01)]
    pub frame: f64,
    /// Also print one kappa per utterance.
    #[arg(long = "per-utterance")]
    pub per_utterance: bool,
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: ModeArg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Clip manifest CSV.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Number of utterances to draw (overrides the config file).
    #[arg(long)]
    pub count: Option<usize>,
    /// Plan seed (overrides the config file).
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON config mirroring the simulation parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the plan only; skip audio rendering.
    #[arg(long = "plan-only")]
    pub plan_only: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// WAV file or directory of WAVs.
    #[arg(long)]
    pub wav: PathBuf,
    /// Longest tolerated silence in seconds (strictly longer rejects).
    #[arg(long = "max-silence", default_value_t = 0.2)]
    pub max_silence: f64,
    /// Silence floor in dBFS.
    #[arg(long = "floor-dbfs", default_value_t = -45.0, allow_hyphen_values = true)]
    pub floor_dbfs: f64,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// CSV mapping utterance_id,speaker_id.
    #[arg(long)]
    pub speakers: Option<PathBuf>,
    /// Weigh emotion proportions by duration instead of by count.
    #[arg(long = "by-duration")]
    pub by_duration: bool,
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatArg,
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: ModeArg,
}

/// Run a parsed command, writing results to `stdout`. Returns the
/// process exit code.
pub fn run(command: Command, stdout: &mut impl Write) -> i32 {
    let outcome = match command {
        Command::Score(args) => cmd_score(&args, stdout),
        Command::Transitions(args) => cmd_transitions(&args, stdout),
        Command::Agreement(args) => cmd_agreement(&args, stdout),
        Command::Simulate(args) => cmd_simulate(&args, stdout),
        Command::Validate(args) => cmd_validate(&args, stdout),
        Command::Stats(args) => cmd_stats(&args, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_class().code()
        }
    }
}

fn effective_jobs(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var(JOBS_ENV_VAR)
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .filter(|&n| n > 0)
    .unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

fn parse_seconds(value: f64, what: &str) -> Result<Tick> {
    Tick::from_seconds(value)
        .filter(|t| !t.is_zero())
        .ok_or_else(|| Error::BadConfig(format!("{what} must be a positive number of seconds")))
}

fn write_out(stdout: &mut impl Write, s: &str) -> Result<()> {
    stdout
        .write_all(s.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

// ---- score ----

fn cmd_score(args: &ScoreArgs, stdout: &mut impl Write) -> Result<i32> {
    let mode: ParseMode = args.mode.into();
    let references = io::load_timelines(&args.reference, TimelineKind::Reference, mode)?;
    if references.is_empty() {
        return Err(Error::EmptyCorpus(args.reference.display().to_string()));
    }
    let pairs = match args.hyp_format {
        HypFormat::Intervals => {
            let hyps = io::load_timelines(&args.hypothesis, TimelineKind::Hypothesis, mode)?;
            pair_by_id(references, hyps)?
        }
        HypFormat::Rttm => {
            let durations: HashMap<String, Tick> = references
                .iter()
                .map(|r| (r.utterance_id().to_owned(), r.duration()))
                .collect();
            let mut hyps = Vec::new();
            for file in io::files_with_extension(&args.hypothesis, "rttm")? {
                hyps.extend(io::rttm::read_rttm(
                    &file,
                    &durations,
                    TimelineKind::Hypothesis,
                    mode,
                )?);
            }
            hyps.sort_by(|a, b| a.utterance_id().cmp(b.utterance_id()));
            pair_by_id(references, hyps)?
        }
        HypFormat::Frames => {
            let sequences = io::load_frame_hypotheses(&args.hypothesis)?;
            let by_id: HashMap<&str, &FrameSequence> =
                sequences.iter().map(|s| (s.utterance_id(), s)).collect();
            let mut pairs = Vec::with_capacity(references.len());
            for reference in references {
                let frames = by_id
                    .get(reference.utterance_id())
                    .ok_or_else(|| Error::MissingHypothesis(reference.utterance_id().to_owned()))?;
                let anchored = (*frames).clone().with_duration(reference.duration())?;
                let hypothesis = framing::frames_to_intervals(&anchored)?;
                pairs.push((reference, hypothesis));
            }
            if sequences.len() > pairs.len() {
                let ref_ids: Vec<&str> = pairs.iter().map(|(r, _)| r.utterance_id()).collect();
                for s in &sequences {
                    if !ref_ids.contains(&s.utterance_id()) {
                        return Err(Error::MissingReference(s.utterance_id().to_owned()));
                    }
                }
            }
            pairs
        }
    };

    let scored = score_pairs(pairs, effective_jobs(args.jobs))?;
    let aggregate = metrics::aggregate(scored)?;
    write_out(
        stdout,
        &report::render_aggregate(&aggregate, args.format.into(), args.aggregate.into()),
    )?;
    Ok(0)
}

fn pair_by_id(
    references: Vec<Timeline>,
    hypotheses: Vec<Timeline>,
) -> Result<Vec<(Timeline, Timeline)>> {
    let mut hyp_by_id: HashMap<String, Timeline> = hypotheses
        .into_iter()
        .map(|h| (h.utterance_id().to_owned(), h))
        .collect();
    let mut pairs = Vec::with_capacity(references.len());
    for reference in references {
        let hypothesis = hyp_by_id
            .remove(reference.utterance_id())
            .ok_or_else(|| Error::MissingHypothesis(reference.utterance_id().to_owned()))?;
        pairs.push((reference, hypothesis));
    }
    if let Some(stray) = hyp_by_id.into_keys().min() {
        return Err(Error::MissingReference(stray));
    }
    Ok(pairs)
}

/// Fan scoring out over a thread pool. Input order (sorted by id) is
/// preserved, so the output is byte-identical for any job count.
fn score_pairs(
    pairs: Vec<(Timeline, Timeline)>,
    jobs: usize,
) -> Result<Vec<(String, EderBreakdown)>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::BadConfig(format!("cannot build thread pool: {e}")))?;
    pool.install(|| {
        pairs
            .par_iter()
            .map(|(reference, hypothesis)| {
                let b = metrics::eder(reference, hypothesis)?;
                Ok((reference.utterance_id().to_owned(), b))
            })
            .collect()
    })
}

// ---- transitions ----

fn cmd_transitions(args: &TransitionsArgs, stdout: &mut impl Write) -> Result<i32> {
    let mode: ParseMode = args.mode.into();
    let stride = parse_seconds(args.stride, "--stride")?;
    let spec = FrameSpec::with_stride(stride);
    let references = io::load_timelines(&args.reference, TimelineKind::Reference, mode)?;
    if references.is_empty() {
        return Err(Error::EmptyCorpus(args.reference.display().to_string()));
    }

    let sequences: Vec<FrameSequence> = match args.hyp_format {
        HypFormat::Frames => io::load_frame_hypotheses(&args.hypothesis)?,
        HypFormat::Intervals => {
            let hyps = io::load_timelines(&args.hypothesis, TimelineKind::Hypothesis, mode)?;
            hyps.iter()
                .map(|h| framing::intervals_to_frames(h, spec))
                .collect::<Result<_>>()?
        }
        HypFormat::Rttm => {
            return Err(Error::BadConfig(
                "transitions does not take RTTM hypotheses; convert to intervals first".to_owned(),
            ))
        }
    };
    let by_id: HashMap<&str, &FrameSequence> =
        sequences.iter().map(|s| (s.utterance_id(), s)).collect();

    let mut pairs = Vec::with_capacity(references.len());
    for reference in references {
        let frames = by_id
            .get(reference.utterance_id())
            .ok_or_else(|| Error::MissingHypothesis(reference.utterance_id().to_owned()))?;
        pairs.push((reference, (*frames).clone()));
    }

    let table = framing::transition_accuracy(&pairs, spec)?;
    write_out(
        stdout,
        &report::render_transitions(&table, args.format.into()),
    )?;
    Ok(0)
}

// ---- agreement ----

fn cmd_agreement(args: &AgreementArgs, stdout: &mut impl Write) -> Result<i32> {
    if args.annotators.len() < 2 {
        // Usage-level error: the flag must be repeated.
        eprintln!("error: --annotator must be given at least twice");
        return Ok(3);
    }
    let mode: ParseMode = args.mode.into();
    let frame = parse_seconds(args.frame, "--frame")?;

    let mut filesets: Vec<HashMap<String, Timeline>> = Vec::with_capacity(args.annotators.len());
    for path in &args.annotators {
        let timelines = io::load_timelines(path, TimelineKind::Reference, mode)?;
        filesets.push(
            timelines
                .into_iter()
                .map(|t| (t.utterance_id().to_owned(), t))
                .collect(),
        );
    }

    let mut ids: Vec<String> = filesets[0].keys().cloned().collect();
    ids.sort();
    if ids.is_empty() {
        return Err(Error::EmptyCorpus(args.annotators[0].display().to_string()));
    }
    for (i, fs) in filesets.iter().enumerate() {
        for id in &ids {
            if !fs.contains_key(id) {
                return Err(Error::MissingReference(format!(
                    "{id} (annotator {})",
                    args.annotators[i].display()
                )));
            }
        }
        if fs.len() != ids.len() {
            let mut other: Vec<&String> = fs.keys().filter(|k| !ids.contains(k)).collect();
            other.sort();
            return Err(Error::MissingReference(format!(
                "{} (only in annotator {})",
                other.first().map(|s| s.as_str()).unwrap_or("?"),
                args.annotators[i].display()
            )));
        }
    }

    let mut pooled: Option<crate::agreement::RatingTable> = None;
    let mut per_utterance = Vec::new();
    for id in &ids {
        let annotations: Vec<Timeline> = filesets.iter().map(|fs| fs[id].clone()).collect();
        let table = crate::agreement::build_rating_table(&annotations, frame)?;
        if args.per_utterance {
            per_utterance.push((id.clone(), crate::agreement::fleiss_kappa(&table)?));
        }
        match &mut pooled {
            Some(p) => p.extend(table)?,
            None => pooled = Some(table),
        }
    }
    let pooled = pooled.expect("ids is non-empty");
    let kappa = crate::agreement::fleiss_kappa(&pooled)?;

    let mut out = String::new();
    for (id, k) in per_utterance {
        out.push_str(&format!("{id}\t{k:.4}\n"));
    }
    out.push_str(&format!(
        "pooled\t{kappa:.4}\t({} raters, {} items, frame {})\n",
        pooled.n_raters(),
        pooled.n_items(),
        io::canon::seconds(frame)
    ));
    write_out(stdout, &out)?;
    Ok(0)
}

// ---- simulate ----

/// On-disk mirror of the simulation parameters.
#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulationConfigFile {
    pattern_probs: Option<[f64; 4]>,
    clips_per_slot: Option<ClipsPerSlotFile>,
    seed: Option<u64>,
    max_silence_s: Option<f64>,
    target_count: Option<usize>,
    reuse_across_utterances: Option<bool>,
}

#[derive(Debug, serde::Deserialize)]
struct ClipsPerSlotFile {
    min: u32,
    max: u32,
}

fn load_simulation_config(args: &SimulateArgs) -> Result<SimulationConfig> {
    let mut config = SimulationConfig::default();
    if let Some(path) = &args.config {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let file: SimulationConfigFile =
            serde_json::from_str(&text).map_err(|e| Error::SchemaError {
                path: path.display().to_string(),
                detail: e.to_string(),
            })?;
        if let Some(p) = file.pattern_probs {
            config.pattern_probs = p;
        }
        if let Some(c) = file.clips_per_slot {
            config.clips_per_slot = sim::ClipsPerSlot {
                min: c.min,
                max: c.max,
            };
        }
        if let Some(s) = file.seed {
            config.seed = s;
        }
        if let Some(ms) = file.max_silence_s {
            config.max_silence = parse_seconds(ms, "max_silence_s")?;
        }
        if let Some(t) = file.target_count {
            config.target_count = t;
        }
        if let Some(r) = file.reuse_across_utterances {
            config.reuse_across_utterances = r;
        }
    }
    if let Some(count) = args.count {
        config.target_count = count;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if config.target_count == 0 {
        return Err(Error::BadConfig(
            "target count must be positive (--count or config target_count)".to_owned(),
        ));
    }
    Ok(config)
}

fn cmd_simulate(args: &SimulateArgs, stdout: &mut impl Write) -> Result<i32> {
    let config = load_simulation_config(args)?;
    let corpus = sim::load_manifest(&args.manifest, !args.plan_only)?;
    let plan = sim::plan_simulation(&corpus, &config)?;

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(args.out.display().to_string(), e))?;
    io::write_bytes(
        &args.out.join("plan.json"),
        io::canon::simulation_plan(&plan).as_bytes(),
    )?;

    let mut total_duration = Tick::ZERO;
    let mut pattern_counts: HashMap<String, usize> = HashMap::new();
    for u in &plan.utterances {
        total_duration = total_duration + u.reference.duration();
        *pattern_counts.entry(u.pattern.to_string()).or_default() += 1;
    }

    if !args.plan_only {
        let base_dir = args.manifest.parent().unwrap_or(Path::new("."));
        let by_id: HashMap<&str, &sim::ClipMeta> =
            corpus.iter().map(|c| (c.clip_id.as_str(), c)).collect();
        // Rendering is pure per utterance; fan out, then write in order.
        let rendered: Result<Vec<(Vec<i16>, Timeline)>> = plan
            .utterances
            .par_iter()
            .map(|u| sim::render_utterance(u, &by_id, base_dir))
            .collect();
        let vad = VadParams::default();
        for (u, (samples, reference)) in plan.utterances.iter().zip(rendered?) {
            // Concatenating silence-clean clips can still create an
            // over-long run across a clip boundary; flag those.
            let screened = sim::validate_recording(&samples, config.max_silence, &vad)?;
            if !screened.accepted {
                let (start, end) = screened.longest_run.expect("rejection carries a run");
                eprintln!(
                    "warning: {} contains a {} silence at [{}, {}]",
                    u.utterance_id,
                    io::canon::seconds(end - start),
                    io::canon::seconds(start),
                    io::canon::seconds(end),
                );
            }
            sim::write_wav_mono16(&args.out.join(format!("{}.wav", u.utterance_id)), &samples)?;
            io::write_bytes(
                &args.out.join(format!("{}.json", u.utterance_id)),
                io::canon::rendered_reference(&reference, &u.speaker_id).as_bytes(),
            )?;
        }
    }

    let mut out = String::new();
    out.push_str(&format!("utterances\t{}\n", plan.utterances.len()));
    out.push_str(&format!(
        "total_duration_s\t{}\n",
        io::canon::seconds(total_duration)
    ));
    let mut patterns: Vec<(String, usize)> = pattern_counts.into_iter().collect();
    patterns.sort();
    for (pattern, count) in patterns {
        out.push_str(&format!("pattern\t{pattern}\t{count}\n"));
    }
    write_out(stdout, &out)?;
    Ok(0)
}

// ---- validate ----

fn cmd_validate(args: &ValidateArgs, stdout: &mut impl Write) -> Result<i32> {
    let max_silence = parse_seconds(args.max_silence, "--max-silence")?;
    let params = VadParams {
        floor_dbfs: args.floor_dbfs,
        ..VadParams::default()
    };
    let files = io::files_with_extension(&args.wav, "wav")?;
    if files.is_empty() {
        return Err(Error::EmptyCorpus(args.wav.display().to_string()));
    }

    let mut any_rejected = false;
    let mut out = String::new();
    for file in files {
        let samples = sim::read_wav_mono16(&file)?;
        let v = sim::validate_recording(&samples, max_silence, &params)?;
        let status = if v.accepted { "accept" } else { "reject" };
        any_rejected |= !v.accepted;
        match v.longest_run {
            Some((start, end)) => {
                out.push_str(&format!(
                    "{status}\t{}\tlongest_silence={} [{}, {}]\n",
                    file.display(),
                    io::canon::seconds(end - start),
                    io::canon::seconds(start),
                    io::canon::seconds(end),
                ));
            }
            None => out.push_str(&format!("{status}\t{}\tno_silence\n", file.display())),
        }
    }
    write_out(stdout, &out)?;
    Ok(if any_rejected { 1 } else { 0 })
}

// ---- stats ----

fn load_speaker_map(path: &Path) -> Result<HashMap<String, String>> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::ParseError {
            path: display.clone(),
            line: 0,
            detail: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::ParseError {
            path: display.clone(),
            line: 1,
            detail: e.to_string(),
        })?
        .clone();
    let actual: Vec<&str> = headers.iter().collect();
    if actual != ["utterance_id", "speaker_id"] {
        return Err(Error::ParseError {
            path: display,
            line: 1,
            detail: "header must be utterance_id,speaker_id".to_owned(),
        });
    }
    let mut map = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::ParseError {
            path: display.clone(),
            line: e.position().map_or(0, |p| p.line() as usize),
            detail: e.to_string(),
        })?;
        map.insert(
            record.get(0).unwrap_or("").to_owned(),
            record.get(1).unwrap_or("").to_owned(),
        );
    }
    Ok(map)
}

fn cmd_stats(args: &StatsArgs, stdout: &mut impl Write) -> Result<i32> {
    let references =
        io::load_timelines(&args.reference, TimelineKind::Reference, args.mode.into())?;
    let speaker_map = args.speakers.as_deref().map(load_speaker_map).transpose()?;
    let weighting = if args.by_duration {
        ProportionWeighting::ByDuration
    } else {
        ProportionWeighting::ByCount
    };
    let stats = report::dataset_stats(&references, speaker_map.as_ref(), weighting)?;
    write_out(stdout, &report::render_stats(&stats, args.format.into()))?;
    Ok(0)
}
