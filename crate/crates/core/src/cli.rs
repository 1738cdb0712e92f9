//! Command-line front end: synthesize, train, detect, recognize, evaluate.
//!
//! Exit codes: 0 success, 1 a metric below a requested minimum, 2 usage
//! or data error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::dataset::write_dataset;
use crate::error::{Error, Result};
use crate::evalkit::{evaluate, read_annotations, write_annotations, AnnotatedBox, EvaluationReport, FrameAnnotation};
use crate::glyphfeat::read_feature_csv;
use crate::localizer::{mlp_train_with_report, read_band_csv, MlpModel};
use crate::mfi::{integrate_frames, FrameWindow};
use crate::pipeline::{crop_box, detect_window, dump_detection, dump_line, recognize_region, train_recognizer};
use crate::pixelcore::io::{is_frame_file, list_frames, read_frame, read_gray};
use crate::pixelcore::Rect;
use crate::recognizer::{load_lexicon, PrototypeSet};
use crate::synth::SyntheticSpec;

#[derive(Debug, Parser)]
#[command(name = "vtext", version, about = "Caption detection and Arabic glyph recognition for frame sequences")]
pub struct Cli {
    /// TOML configuration file; every key is optional.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for synthesis and training.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for per-window processing.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Directory for per-stage debug images.
    #[arg(long, global = true, value_name = "DIR")]
    pub debug_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate caption clips with ground truth, band and glyph tables.
    Synthesize(SynthesizeArgs),
    /// Train the band classifier or build the glyph prototype base.
    Train(TrainArgs),
    /// Detect caption boxes in a frame directory.
    Detect(DetectArgs),
    /// Detect and transcribe captions, or transcribe region images.
    Recognize(RecognizeArgs),
    /// Score predictions against ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Base spec as JSON or TOML; flags below override it.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub clips: Option<usize>,
    #[arg(long)]
    pub frames: Option<usize>,
    /// Fixed caption text for every clip.
    #[arg(long)]
    pub caption: Option<String>,
    /// Restrict random captions to words written with these letters.
    #[arg(long)]
    pub alphabet: Option<String>,
    /// Fixed caption font size in pixels.
    #[arg(long)]
    pub font_px: Option<f64>,
    /// Salt-and-pepper fraction per frame.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub blur: Option<f64>,
    /// Background motion in pixels per frame.
    #[arg(long)]
    pub motion: Option<f64>,
    #[arg(long)]
    pub glyph_renders: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Localizer,
    Recognizer,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub kind: ModelKind,
    /// Band CSV for the localizer, glyph CSV for the recognizer.
    #[arg(long, value_name = "CSV")]
    pub data: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Directory of frames, or of clip directories holding frames.
    #[arg(long, value_name = "DIR")]
    pub frames: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Localizer model; defaults to `paths.localizer_model`.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecognizeArgs {
    #[arg(long, value_name = "DIR", conflicts_with = "regions", required_unless_present = "regions")]
    pub frames: Option<PathBuf>,
    /// Caption region images, each read as one text line.
    #[arg(long, value_name = "IMAGE", num_args = 1..)]
    pub regions: Vec<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub localizer: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub recognizer: Option<PathBuf>,
    /// Word list for correction; adds a `corrected` field.
    #[arg(long, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub truth: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub iou: f64,
    /// Also write the JSON report here.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub min_recall: Option<f64>,
    #[arg(long)]
    pub min_precision: Option<f64>,
    /// Minimum character rate, in percent.
    #[arg(long)]
    pub min_cr: Option<f64>,
    /// Minimum word rate, in percent.
    #[arg(long)]
    pub min_wr: Option<f64>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Data(Error),
    Threshold(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Threshold(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Data(e) => write!(f, "{e}"),
            Failure::Threshold(m) => write!(f, "{m}"),
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> std::result::Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(d) = &cli.debug_dir {
        cfg.paths.debug_dir = Some(d.clone());
    }
    if cli.jobs == 0 {
        return Err(Error::Argument("--jobs must be at least 1".into()).into());
    }
    match &cli.command {
        Command::Synthesize(a) => cmd_synthesize(a, cli.seed, &cfg),
        Command::Train(a) => cmd_train(a, cli.seed, &cfg),
        Command::Detect(a) => cmd_detect(a, &cfg, cli.jobs),
        Command::Recognize(a) => cmd_recognize(a, &cfg, cli.jobs),
        Command::Evaluate(a) => cmd_evaluate(a),
    }
}

fn read_spec(path: &Path) -> Result<SyntheticSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| e.to_string())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|message| Error::Format {
        path: path.to_path_buf(),
        message,
    })
}

pub fn cmd_synthesize(a: &SynthesizeArgs, seed: Option<u64>, cfg: &PipelineConfig) -> std::result::Result<(), Failure> {
    let mut spec = match &a.spec {
        Some(p) => read_spec(p)?,
        None => SyntheticSpec::default(),
    };
    if let Some(v) = a.clips {
        spec.clips = v;
    }
    if let Some(v) = a.frames {
        spec.frames_per_clip = v;
    }
    if let Some(v) = &a.caption {
        spec.caption = Some(v.clone());
    }
    if let Some(v) = &a.alphabet {
        spec.alphabet = v.clone();
    }
    if let Some(v) = a.font_px {
        spec.font_px = (v, v);
    }
    if let Some(v) = a.noise {
        spec.salt_pepper = v;
    }
    if let Some(v) = a.blur {
        spec.blur_sigma = v;
    }
    if let Some(v) = a.motion {
        spec.motion = v;
    }
    if let Some(v) = a.glyph_renders {
        spec.glyph_renders = v;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    let summary = write_dataset(&spec, cfg, &a.out)?;
    println!(
        "wrote {} clips, {} frames, {} truth records, {} bands ({} text), {} glyph rows to {}",
        summary.clips,
        summary.frames,
        summary.truth_records,
        summary.band_rows,
        summary.text_bands,
        summary.glyph_rows,
        a.out.display()
    );
    Ok(())
}

pub fn cmd_train(a: &TrainArgs, seed: Option<u64>, cfg: &PipelineConfig) -> std::result::Result<(), Failure> {
    match a.kind {
        ModelKind::Localizer => {
            let rows = read_band_csv(&a.data)?;
            let params = cfg.localizer.train_params(seed.unwrap_or(crate::localizer::TrainParams::default().seed));
            let (model, report) = mlp_train_with_report(&rows, &params)?;
            model.save(&a.out)?;
            let text = rows.iter().filter(|r| r.1).count();
            println!(
                "localizer: {} rows ({} text), {} epochs, final loss {:.6}, training accuracy {:.2}%",
                rows.len(),
                text,
                params.epochs,
                report.epoch_losses.last().copied().unwrap_or(f64::NAN),
                100.0 * report.accuracy
            );
        }
        ModelKind::Recognizer => {
            let rows = read_feature_csv(&a.data)?;
            if let Some(i) = rows.iter().position(|r| r.label.is_none()) {
                return Err(Error::Data {
                    path: a.data.clone(),
                    line: i + 2,
                    message: "row has no label".into(),
                }
                .into());
            }
            let base = train_recognizer(&rows, cfg)?;
            base.save(&a.out)?;
            println!(
                "recognizer: {} prototypes over {} classes ({:?} memberships)",
                base.len(),
                base.classes.len(),
                cfg.recognizer.membership_mode
            );
        }
    }
    Ok(())
}

/// Frames of one sequence, keyed relative to the directory given on the
/// command line.
#[derive(Clone, Debug)]
pub struct Sequence {
    pub paths: Vec<PathBuf>,
    pub keys: Vec<String>,
}

/// Frames directly in `root` form one sequence; otherwise every
/// subdirectory holding frames is a sequence of its own.
pub fn discover_sequences(root: &Path) -> Result<Vec<Sequence>> {
    if !root.is_dir() {
        return Err(Error::Argument(format!("{} is not a directory", root.display())));
    }
    let key_of = |p: &Path| {
        p.strip_prefix(root)
            .unwrap_or(p)
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/")
    };
    let direct = list_frames(root)?;
    let mut dirs: Vec<PathBuf> = if direct.is_empty() {
        std::fs::read_dir(root)
            .map_err(|e| Error::io(root, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect()
    } else {
        Vec::new()
    };
    dirs.sort();
    let mut groups = vec![direct];
    for d in dirs {
        groups.push(list_frames(&d)?);
    }
    let seqs: Vec<Sequence> = groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|paths| Sequence {
            keys: paths.iter().map(|p| key_of(p)).collect(),
            paths,
        })
        .collect();
    if seqs.is_empty() {
        return Err(Error::Argument(format!("no frames found in {}", root.display())));
    }
    Ok(seqs)
}

/// One window to process: frame paths and the key of its representative.
#[derive(Clone, Debug)]
struct WindowJob {
    paths: Vec<PathBuf>,
    first_index: usize,
    key: String,
}

fn window_jobs(seqs: &[Sequence], length: usize) -> Vec<WindowJob> {
    let mut jobs = Vec::new();
    for s in seqs {
        for start in (0..s.paths.len()).step_by(length.max(1)) {
            let end = (start + length).min(s.paths.len());
            jobs.push(WindowJob {
                paths: s.paths[start..end].to_vec(),
                first_index: start,
                key: s.keys[start + (end - start - 1) / 2].clone(),
            });
        }
    }
    jobs
}

fn load_window(job: &WindowJob) -> Result<FrameWindow> {
    let frames = job
        .paths
        .iter()
        .enumerate()
        .map(|(i, p)| read_frame(p, job.first_index + i))
        .collect::<Result<Vec<_>>>()?;
    FrameWindow::new(frames)
}

fn stem_of(key: &str) -> String {
    let k = key.rsplit_once('.').map_or(key, |(s, _)| s);
    k.replace('/', "_")
}

fn run_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Argument(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(f))
}

fn require_model(flag: &Option<PathBuf>, configured: &Option<PathBuf>, what: &str, key: &str) -> Result<PathBuf> {
    let p = flag
        .clone()
        .or_else(|| configured.clone())
        .ok_or_else(|| Error::Argument(format!("no {what} model given (flag or paths.{key})")))?;
    if !p.is_file() {
        return Err(Error::Argument(format!("{what} model {} not found", p.display())));
    }
    Ok(p)
}

pub fn cmd_detect(a: &DetectArgs, cfg: &PipelineConfig, jobs: usize) -> std::result::Result<(), Failure> {
    let model_path = require_model(&a.model, &cfg.paths.localizer_model, "localizer", "localizer_model")?;
    let model = MlpModel::load(&model_path)?;
    let seqs = discover_sequences(&a.frames)?;
    let work = window_jobs(&seqs, cfg.mfi.window_length);
    let debug = cfg.paths.debug_dir.clone();
    let records = run_pool(jobs, || {
        work.par_iter()
            .map(|job| {
                let window = load_window(job)?;
                let det = detect_window(&window, &model, cfg)?;
                if let Some(dir) = &debug {
                    dump_detection(dir, &stem_of(&job.key), &det)?;
                }
                let boxes = det
                    .boxes
                    .iter()
                    .map(|b| AnnotatedBox {
                        score: Some(b.score),
                        ..AnnotatedBox::new(b.rect(), "")
                    })
                    .collect();
                Ok(FrameAnnotation {
                    frame: job.key.clone(),
                    boxes,
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    write_annotations(&a.out, &records)?;
    let n: usize = records.iter().map(|r| r.boxes.len()).sum();
    println!("{} windows, {} boxes -> {}", records.len(), n, a.out.display());
    Ok(())
}

pub fn cmd_recognize(a: &RecognizeArgs, cfg: &PipelineConfig, jobs: usize) -> std::result::Result<(), Failure> {
    let rec_path = require_model(&a.recognizer, &cfg.paths.recognizer_model, "recognizer", "recognizer_model")?;
    let base = PrototypeSet::load(&rec_path)?;
    let lexicon = match a.lexicon.as_ref().or(cfg.paths.lexicon.as_ref()) {
        Some(p) => Some(load_lexicon(p)?),
        None => None,
    };
    let lex = lexicon.as_deref();
    let debug = cfg.paths.debug_dir.clone();

    let records: Vec<FrameAnnotation> = if let Some(root) = &a.frames {
        let loc_path = require_model(&a.localizer, &cfg.paths.localizer_model, "localizer", "localizer_model")?;
        let model = MlpModel::load(&loc_path)?;
        let seqs = discover_sequences(root)?;
        let work = window_jobs(&seqs, cfg.mfi.window_length);
        let per_window = run_pool(jobs, || {
            work.par_iter()
                .map(|job| {
                    let window = load_window(job)?;
                    let det = detect_window(&window, &model, cfg)?;
                    let integrated = integrate_frames(&window);
                    let stem = stem_of(&job.key);
                    if let Some(dir) = &debug {
                        dump_detection(dir, &stem, &det)?;
                    }
                    let mut boxes = Vec::new();
                    for (i, b) in det.boxes.iter().enumerate() {
                        let region = crop_box(&integrated, b.rect(), cfg)?;
                        let (r, analysis) = recognize_region(&region, &base, cfg, lex)?;
                        if let (Some(dir), Some(an)) = (&debug, &analysis) {
                            dump_line(dir, &format!("{stem}_box{i}"), an)?;
                        }
                        if r.text.is_empty() {
                            continue;
                        }
                        boxes.push(AnnotatedBox {
                            score: Some(b.score),
                            corrected: r.corrected,
                            glyphs: Some(r.glyphs),
                            ..AnnotatedBox::new(b.rect(), r.text)
                        });
                    }
                    Ok(FrameAnnotation {
                        frame: job.key.clone(),
                        boxes,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })??;
        per_window.into_iter().filter(|r| !r.boxes.is_empty()).collect()
    } else {
        let mut out = Vec::new();
        for p in &a.regions {
            if !is_frame_file(p) {
                return Err(Error::Argument(format!("{} is not a PNG/PNM image", p.display())).into());
            }
            let region = read_gray(p)?;
            let (r, analysis) = recognize_region(&region, &base, cfg, lex)?;
            let name = p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
            if let (Some(dir), Some(an)) = (&debug, &analysis) {
                dump_line(dir, &stem_of(&name), an)?;
            }
            if r.text.is_empty() {
                continue;
            }
            out.push(FrameAnnotation {
                frame: name,
                boxes: vec![AnnotatedBox {
                    corrected: r.corrected,
                    glyphs: Some(r.glyphs),
                    ..AnnotatedBox::new(Rect::new(0, 0, region.width(), region.height()), r.text)
                }],
            });
        }
        out
    };
    write_annotations(&a.out, &records)?;
    let n: usize = records.iter().map(|r| r.boxes.len()).sum();
    println!("{} records, {} text boxes -> {}", records.len(), n, a.out.display());
    Ok(())
}

/// Metrics under a requested minimum, or undefined while a minimum is set.
pub fn threshold_failures(report: &EvaluationReport, a: &EvaluateArgs) -> Vec<String> {
    let checks = [
        ("recall", report.recall, a.min_recall),
        ("precision", report.precision, a.min_precision),
        ("CR", report.cr, a.min_cr),
        ("WR", report.wr, a.min_wr),
    ];
    checks
        .iter()
        .filter_map(|&(name, value, min)| {
            let min = min?;
            match value {
                Some(v) if v >= min => None,
                Some(v) => Some(format!("{name} {v:.4} below {min}")),
                None => Some(format!("{name} undefined (minimum {min})")),
            }
        })
        .collect()
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> std::result::Result<(), Failure> {
    if !(a.iou > 0.0 && a.iou <= 1.0) {
        return Err(Error::Argument(format!("IoU threshold {} outside (0, 1]", a.iou)).into());
    }
    let pred = read_annotations(&a.pred)?;
    let truth = read_annotations(&a.truth)?;
    let report = evaluate(&pred, &truth, a.iou);
    let json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    print!("{}", report.table());
    println!("{json}");
    if let Some(p) = &a.json {
        std::fs::write(p, &json).map_err(|e| Error::io(p, e))?;
    }
    let failed = threshold_failures(&report, a);
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Threshold(failed.join("; ")))
    }
}
