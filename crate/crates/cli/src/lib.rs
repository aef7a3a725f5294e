//! `instrument-eval` command-line front end.
//!
//! [`run`] is the whole program; `main` only forwards the process arguments
//! and exit code, so tests drive it in-process.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use instrument_eval::dsp::{FeatureExtractor, ScaleConfig, Window};
use instrument_eval::instrument::{
    format_nsynth_name, load_instrument_with, load_wav, write_wav, LengthPolicy, LoadOptions,
    ManifestEntry, MANIFEST_FILE,
};
use instrument_eval::pitch::{
    hz_to_midi, mad_report, median_pitch, MadMode, PitchReport, Yin, YinConfig,
};
use instrument_eval::synth::{synth_instrument, SynthMode, SynthProfile};
use instrument_eval::tc::{tc_measure, tc_pair_matrix_export, Normalization, TcConfig, TcResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "instrument-eval";
pub const THREADS_ENV: &str = "INSTRUMENT_EVAL_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "instrument-eval",
    version,
    about = "Evaluate sample-based instruments"
)]
struct Cli {
    /// Worker threads (0 = one per core). Falls back to $INSTRUMENT_EVAL_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print the fully resolved configuration as JSON and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Timbral consistency of an instrument directory.
    Tc(TcArgs),
    /// Median YIN pitch of a file or of every WAV file in a directory.
    Pitch(PitchArgs),
    /// Pitch deviation of an instrument against its metadata.
    Mad(MadArgs),
    /// Timbral consistency and pitch deviation in one report.
    Report(ReportArgs),
    /// Liftered log-mel matrix of one file as CSV.
    Liftergram(LiftergramArgs),
    /// Write a synthetic instrument directory.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct FeatureFlags {
    #[arg(long, default_value_t = 2048)]
    fft: usize,
    #[arg(long, default_value_t = 512)]
    hop: usize,
    /// Mel bands.
    #[arg(long, default_value_t = 80)]
    mel: usize,
    /// Retained cepstral coefficients.
    #[arg(long, default_value_t = 13)]
    mfcc: usize,
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    /// JSON array of scale objects; replaces the single-scale flags.
    #[arg(long, value_name = "FILE")]
    scales: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = NormArg::Mean)]
    normalize: NormArg,
    /// Keep cepstral coefficients 1..=m instead of 0..m.
    #[arg(long)]
    exclude_dc: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormArg {
    Mean,
    None,
}

#[derive(Debug, Args)]
struct YinFlags {
    #[arg(long, default_value_t = 4096)]
    frame: usize,
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    #[arg(long, default_value_t = 25.0)]
    fmin: f64,
    #[arg(long, default_value_t = 4400.0)]
    fmax: f64,
}

#[derive(Debug, Args)]
struct LoadFlags {
    /// `pad` (to the longest sample), `truncate` (to the shortest) or a
    /// fixed duration in seconds.
    #[arg(long, default_value = "pad", value_parser = parse_length)]
    length: LengthArg,
    /// Reject multichannel files instead of averaging channels.
    #[arg(long)]
    no_downmix: bool,
    /// Require pitches 21..=108 and velocities 25/50/75/100/127.
    #[arg(long)]
    validate_grid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum LengthArg {
    Pad,
    Truncate,
    Seconds(f64),
}

fn parse_length(s: &str) -> Result<LengthArg, String> {
    match s {
        "pad" => Ok(LengthArg::Pad),
        "truncate" => Ok(LengthArg::Truncate),
        other => match other.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(LengthArg::Seconds(v)),
            _ => Err(format!(
                "expected pad, truncate or seconds > 0, got {other:?}"
            )),
        },
    }
}

#[derive(Debug, Args)]
struct TcArgs {
    dir: PathBuf,
    #[command(flatten)]
    features: FeatureFlags,
    #[command(flatten)]
    load: LoadFlags,
    /// Also write the K×K pair distance matrix as CSV.
    #[arg(long, value_name = "OUT.csv")]
    pair_matrix: Option<PathBuf>,
    #[arg(short, long, value_name = "OUT.json")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PitchArgs {
    path: PathBuf,
    #[command(flatten)]
    yin: YinFlags,
    #[arg(long, default_value_t = 1024)]
    hop: usize,
    #[arg(long)]
    no_downmix: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Mean,
    Median,
}

impl From<ModeArg> for MadMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Mean => MadMode::MeanAbs,
            ModeArg::Median => MadMode::MedianAbs,
        }
    }
}

#[derive(Debug, Args)]
struct MadArgs {
    dir: PathBuf,
    #[command(flatten)]
    yin: YinFlags,
    #[arg(long, default_value_t = 1024)]
    hop: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Mean)]
    mode: ModeArg,
    #[command(flatten)]
    load: LoadFlags,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    dir: PathBuf,
    #[command(flatten)]
    features: FeatureFlags,
    #[command(flatten)]
    yin: YinFlags,
    /// YIN hop size (`--hop` is the STFT hop here).
    #[arg(long, default_value_t = 1024)]
    yin_hop: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Mean)]
    mode: ModeArg,
    #[command(flatten)]
    load: LoadFlags,
    #[arg(long, value_name = "OUT.csv")]
    pair_matrix: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LiftergramArgs {
    file: PathBuf,
    /// Retained cepstral coefficients.
    #[arg(long = "m", visible_alias = "mfcc", default_value_t = 13)]
    m: usize,
    #[arg(long, default_value_t = 2048)]
    fft: usize,
    #[arg(long, default_value_t = 512)]
    hop: usize,
    #[arg(long, default_value_t = 80)]
    mel: usize,
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    #[arg(long)]
    exclude_dc: bool,
    #[arg(long)]
    no_downmix: bool,
    #[arg(short, long, value_name = "OUT.csv")]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SynthModeArg {
    Consistent,
    Inconsistent,
    Detuned,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    mode: SynthModeArg,
    /// `lo:hi` (inclusive) or a comma-separated list of MIDI notes.
    #[arg(long, default_value = "48:72", value_parser = parse_notes)]
    pitches: NoteList,
    #[arg(long, default_value = "25,50,75,100,127", value_parser = parse_notes)]
    velocities: NoteList,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    #[arg(long, default_value_t = 44100)]
    rate: u32,
    #[arg(long, default_value_t = SynthProfile::default().n_harmonics)]
    harmonics: usize,
    /// Decay time constant in seconds.
    #[arg(long, default_value_t = 1.0)]
    decay: f64,
    /// Detune in semitones (detuned mode only).
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    detune: f64,
}

#[derive(Debug, Clone)]
struct NoteList(Vec<u8>);

fn parse_notes(s: &str) -> Result<NoteList, String> {
    let note = |t: &str| {
        t.trim()
            .parse::<u8>()
            .ok()
            .filter(|&n| n <= 127)
            .ok_or_else(|| format!("{t:?} is not a MIDI value"))
    };
    if let Some((lo, hi)) = s.split_once(':') {
        let (lo, hi) = (note(lo)?, note(hi)?);
        if lo > hi {
            return Err(format!("empty range {s:?}"));
        }
        return Ok(NoteList((lo..=hi).collect()));
    }
    s.split(',')
        .map(note)
        .collect::<Result<_, _>>()
        .map(NoteList)
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Eval(instrument_eval::Error),
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl From<instrument_eval::Error> for Failure {
    fn from(e: instrument_eval::Error) -> Self {
        Failure::Eval(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            _ => 1,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Failure::Usage(msg) => json!({ "error": "Usage", "message": msg }),
            Failure::Eval(e) => json!({ "error": e.kind(), "message": e.to_string() }),
            Failure::Output { path, source } => json!({
                "error": "Output",
                "message": format!("cannot write {}: {source}", path.display()),
            }),
        }
    }
}

/// Runs the CLI; `argv[0]` is the program name. Returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.to_json());
            f.exit_code()
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if v == "auto" || v.is_empty() => Ok(0),
        Ok(v) => v
            .parse()
            .map_err(|_| Failure::Usage(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    let threads = thread_count(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {threads} threads: {e}")))?;
    let print_config = cli.print_config;
    let mut buf = Vec::new();
    pool.install(|| {
        let out: &mut dyn Write = &mut buf;
        match cli.command {
            Command::Tc(args) => cmd_tc(args, print_config, out),
            Command::Pitch(args) => cmd_pitch(args, print_config, out),
            Command::Mad(args) => cmd_mad(args, print_config, out),
            Command::Report(args) => cmd_report(args, print_config, out),
            Command::Liftergram(args) => cmd_liftergram(args, print_config, out),
            Command::Synth(args) => cmd_synth(args, print_config, out),
        }
    })?;
    stdout.write_all(&buf).map_err(|source| Failure::Output {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn tc_config(flags: &FeatureFlags) -> Result<TcConfig, Failure> {
    let scales = match &flags.scales {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<Vec<ScaleConfig>>(&text).map_err(|e| {
                Failure::Usage(format!("invalid scales file {}: {e}", path.display()))
            })?
        }
        None => vec![ScaleConfig {
            fft_size: flags.fft,
            hop_size: flags.hop,
            window: Window::Hann,
            mel_bands: flags.mel,
            lifter_order: flags.mfcc,
            power: flags.power,
            log_floor: flags.eps,
        }],
    };
    let cfg = TcConfig {
        scales,
        normalization: match flags.normalize {
            NormArg::Mean => Normalization::Mean,
            NormArg::None => Normalization::None,
        },
        exclude_dc: flags.exclude_dc,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn yin_config(flags: &YinFlags, hop: usize) -> YinConfig {
    YinConfig {
        frame_size: flags.frame,
        hop_size: hop,
        threshold: flags.threshold,
        f_min: flags.fmin,
        f_max: flags.fmax,
    }
}

/// Resolves `--length`; fixed durations need the sample rate, which is only
/// known after reading the first file.
fn load_options(flags: &LoadFlags, dir: &Path) -> Result<LoadOptions, Failure> {
    let policy = match flags.length {
        LengthArg::Pad => LengthPolicy::PadToMax,
        LengthArg::Truncate => LengthPolicy::TruncateToMin,
        LengthArg::Seconds(secs) => {
            let listing = instrument_eval::instrument::list_samples(dir, false)?;
            let (first, _) = listing
                .first()
                .ok_or(instrument_eval::Error::EmptyInstrument {
                    required: 2,
                    found: 0,
                })?;
            let rate = load_wav(first, true)?.sample_rate;
            LengthPolicy::Fixed((secs * f64::from(rate)).round() as usize)
        }
    };
    Ok(LoadOptions {
        policy,
        downmix: !flags.no_downmix,
        validate_grid: flags.validate_grid,
    })
}

#[derive(Serialize)]
struct TcJson<'a> {
    schema: u32,
    tc: f64,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "S")]
    s: usize,
    normalization: &'a str,
    exclude_dc: bool,
    per_scale: &'a [f64],
    pair_matrix_file: Option<String>,
}

fn tc_json(res: &TcResult, pair_matrix: Option<&Path>) -> Value {
    serde_json::to_value(TcJson {
        schema: SCHEMA_VERSION,
        tc: res.tc,
        k: res.k(),
        s: res.scales(),
        normalization: res.normalization.as_str(),
        exclude_dc: res.exclude_dc,
        per_scale: &res.per_scale,
        pair_matrix_file: pair_matrix.map(|p| p.display().to_string()),
    })
    .expect("plain data")
}

fn pitch_json(report: &PitchReport) -> Value {
    let per_sample: Vec<Value> = report
        .per_sample
        .iter()
        .map(|s| {
            json!({
                "pitch": s.key.pitch,
                "velocity": s.key.velocity,
                "f0_hz": s.f0_hz,
                "midi_est": s.midi_est,
                "deviation": s.deviation,
            })
        })
        .collect();
    json!({
        "schema": SCHEMA_VERSION,
        "mad": report.mad,
        "mode": report.mode.as_str(),
        "voiced": report.voiced,
        "unvoiced": report.unvoiced,
        "per_sample": per_sample,
    })
}

fn emit_text(text: &str, output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| Failure::Output {
            path: path.to_owned(),
            source,
        }),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| Failure::Output {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn emit_json(value: &Value, output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data");
    text.push('\n');
    emit_text(&text, output, stdout)
}

fn tool_header() -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA_VERSION));
    m.insert("tool".into(), json!(TOOL));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m
}

fn config_json(entries: &[(&str, Value)]) -> Value {
    let mut m = tool_header();
    let mut cfg = Map::new();
    for (k, v) in entries {
        cfg.insert((*k).to_owned(), v.clone());
    }
    m.insert("config".into(), Value::Object(cfg));
    Value::Object(m)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data")
}

fn write_pair_matrix(res: &TcResult, path: Option<&Path>) -> Result<(), Failure> {
    if let Some(path) = path {
        std::fs::write(path, tc_pair_matrix_export(res)).map_err(|source| Failure::Output {
            path: path.to_owned(),
            source,
        })?;
    }
    Ok(())
}

fn cmd_tc(args: TcArgs, print_config: bool, stdout: &mut dyn Write) -> Result<(), Failure> {
    let cfg = tc_config(&args.features)?;
    let load = load_options(&args.load, &args.dir)?;
    if print_config {
        let value = config_json(&[("tc", to_value(&cfg)), ("load", to_value(&load))]);
        return emit_json(&value, None, stdout);
    }
    let inst = load_instrument_with(&args.dir, &load)?;
    let res = tc_measure(&inst, &cfg)?;
    write_pair_matrix(&res, args.pair_matrix.as_deref())?;
    emit_json(
        &tc_json(&res, args.pair_matrix.as_deref()),
        args.output.as_deref(),
        stdout,
    )
}

fn cmd_mad(args: MadArgs, print_config: bool, stdout: &mut dyn Write) -> Result<(), Failure> {
    let yin = yin_config(&args.yin, args.hop);
    let mode = MadMode::from(args.mode);
    let load = load_options(&args.load, &args.dir)?;
    if print_config {
        let value = config_json(&[
            ("yin", to_value(&yin)),
            ("mode", json!(mode.as_str())),
            ("load", to_value(&load)),
        ]);
        return emit_json(&value, None, stdout);
    }
    let inst = load_instrument_with(&args.dir, &load)?;
    let report = mad_report(&inst, &yin, mode)?;
    emit_json(&pitch_json(&report), args.output.as_deref(), stdout)
}

fn cmd_report(args: ReportArgs, print_config: bool, stdout: &mut dyn Write) -> Result<(), Failure> {
    let tc_cfg = tc_config(&args.features)?;
    let yin = yin_config(&args.yin, args.yin_hop);
    let mode = MadMode::from(args.mode);
    let load = load_options(&args.load, &args.dir)?;
    let config = config_json(&[
        ("tc", to_value(&tc_cfg)),
        ("yin", to_value(&yin)),
        ("mode", json!(mode.as_str())),
        ("load", to_value(&load)),
    ]);
    if print_config {
        return emit_json(&config, None, stdout);
    }
    let inst = load_instrument_with(&args.dir, &load)?;
    let tc = tc_measure(&inst, &tc_cfg)?;
    let pitch = mad_report(&inst, &yin, mode)?;
    write_pair_matrix(&tc, args.pair_matrix.as_deref())?;

    let mut out = match config {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    out.insert("instrument".into(), json!(inst.name()));
    for part in [
        tc_json(&tc, args.pair_matrix.as_deref()),
        pitch_json(&pitch),
    ] {
        if let Value::Object(m) = part {
            out.extend(m);
        }
    }
    emit_json(&Value::Object(out), args.output.as_deref(), stdout)
}

fn cmd_pitch(args: PitchArgs, print_config: bool, stdout: &mut dyn Write) -> Result<(), Failure> {
    let yin = yin_config(&args.yin, args.hop);
    if print_config {
        return emit_json(&config_json(&[("yin", to_value(&yin))]), None, stdout);
    }
    let files = if args.path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(&args.path)
            .map_err(|e| instrument_eval::Error::Io {
                path: args.path.clone(),
                source: e,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "wav"))
            .collect();
        files.sort();
        files
    } else {
        vec![args.path.clone()]
    };

    let estimate = |path: &PathBuf| -> Result<(Value, Vec<Option<f64>>), Failure> {
        let wav = load_wav(path, !args.no_downmix)?;
        let frames = Yin::new(&yin, wav.sample_rate)?
            .track(&wav.samples)
            .map_err(Failure::Eval)?;
        let f0 = median_pitch(&frames);
        let midi = f0.map(hz_to_midi).transpose()?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned());
        Ok((
            json!({ "file": name, "sample_rate": wav.sample_rate, "f0_hz": f0, "midi_est": midi }),
            frames,
        ))
    };

    let mut out = tool_header();
    if args.path.is_dir() {
        let entries = files
            .iter()
            .map(|p| estimate(p).map(|(v, _)| v))
            .collect::<Result<Vec<_>, _>>()?;
        out.insert("per_file".into(), Value::Array(entries));
    } else {
        let (value, frames) = estimate(&files[0])?;
        if let Value::Object(m) = value {
            out.extend(m);
        }
        out.insert("frames".into(), to_value(&frames));
    }
    emit_json(&Value::Object(out), args.output.as_deref(), stdout)
}

/// CSV rendering of a liftered feature: a `#` header line, then one row per
/// mel band with one column per frame.
pub fn liftergram_csv(y: &instrument_eval::dsp::Matrix, cfg: &ScaleConfig, rate: u32) -> String {
    let mut out = format!(
        "# bands={} frames={} m={} fft={} hop={} rate={}\n",
        y.rows(),
        y.cols(),
        cfg.lifter_order,
        cfg.fft_size,
        cfg.hop_size,
        rate
    );
    for r in 0..y.rows() {
        for (c, v) in y.row(r).iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn cmd_liftergram(
    args: LiftergramArgs,
    print_config: bool,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let cfg = ScaleConfig {
        fft_size: args.fft,
        hop_size: args.hop,
        window: Window::Hann,
        mel_bands: args.mel,
        lifter_order: args.m,
        power: args.power,
        log_floor: args.eps,
    };
    cfg.validate()?;
    if print_config {
        let value = config_json(&[
            ("scale", to_value(&cfg)),
            ("exclude_dc", json!(args.exclude_dc)),
        ]);
        return emit_json(&value, None, stdout);
    }
    let wav = load_wav(&args.file, !args.no_downmix)?;
    let feature =
        FeatureExtractor::new(&cfg, wav.sample_rate, args.exclude_dc)?.extract(&wav.samples)?;
    emit_text(
        &liftergram_csv(&feature.y, &cfg, wav.sample_rate),
        args.output.as_deref(),
        stdout,
    )
}

fn cmd_synth(args: SynthArgs, print_config: bool, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mode = match args.mode {
        SynthModeArg::Consistent => SynthMode::Consistent,
        SynthModeArg::Inconsistent => SynthMode::Inconsistent,
        SynthModeArg::Detuned => SynthMode::Detuned,
    };
    let profile = SynthProfile {
        mode,
        n_harmonics: args.harmonics,
        envelope: Vec::new(),
        decay_s: args.decay,
        detune_semitones: if mode == SynthMode::Detuned {
            args.detune
        } else {
            0.0
        },
        seed: args.seed,
        duration_s: args.duration,
        sample_rate: args.rate,
        pitch_set: args.pitches.0.clone(),
        velocity_set: args.velocities.0.clone(),
        drop_aliased: true,
    };
    if print_config {
        let value = config_json(&[("synth", to_value(&profile)), ("out", json!(args.out))]);
        return emit_json(&value, None, stdout);
    }
    let inst = synth_instrument(&profile)?;
    let io_err = |path: &Path, source| Failure::Output {
        path: path.to_owned(),
        source,
    };
    std::fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;
    let mut manifest = Vec::with_capacity(inst.len());
    for sample in inst.samples() {
        let name = format_nsynth_name(&sample.meta);
        write_wav(args.out.join(&name), &sample.samples, sample.sample_rate)?;
        manifest.push(ManifestEntry::from_meta(name, &sample.meta));
    }
    let manifest_path = args.out.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("plain data");
    std::fs::write(&manifest_path, text).map_err(|e| io_err(&manifest_path, e))?;

    let mut out = tool_header();
    out.insert("out".into(), json!(args.out));
    out.insert("K".into(), json!(inst.len()));
    out.insert("sample_rate".into(), json!(inst.sample_rate()));
    out.insert("samples_per_file".into(), json!(inst.sample_len()));
    emit_json(&Value::Object(out), None, stdout)
}
