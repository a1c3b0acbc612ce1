use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use firesal::clipio::{self, load_frame_sequence, save_frame_sequence};
use firesal::imaging::Frame;
use firesal::pipeline::{
    evaluate, evaluate_video, extract_features, load_results, load_truth_masks, run_detect,
    BlockLabeling, DetectRequest, GroundTruth, PipelineConfig,
};
use firesal::svm::{kfold_cv, load_model, save_model, train_detailed, KernelSpec, LabeledVector, TrainParams};
use firesal::texture::{read_features, write_features, BlockLabel};
use firesal::{synth, Error, Result};

#[derive(Parser)]
#[command(name = "firesal", version, about = "Video fire detection on numbered PPM/PGM frame directories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the detector and write one JSON record per frame.
    Detect {
        frames_dir: PathBuf,
        /// Model file; falls back to `model.path` in the config.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "results.jsonl")]
        out: PathBuf,
        /// Write frames with the detected region highlighted.
        #[arg(long)]
        overlay_dir: Option<PathBuf>,
        #[arg(long, default_value = "*.p[pg]m")]
        pattern: String,
    },
    /// Dump LBP-TOP features of salient blocks as CSV.
    Features {
        frames_dir: PathBuf,
        /// Directory of per-frame truth masks (nonzero marks fire).
        #[arg(long, conflicts_with = "label")]
        mask_truth: Option<PathBuf>,
        /// Give every block the same label.
        #[arg(long)]
        label: Option<LabelArg>,
        /// Keep every block, not only the salient ones.
        #[arg(long)]
        all_blocks: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "blocks.csv")]
        out: PathBuf,
        #[arg(long, default_value = "*.p[pg]m")]
        pattern: String,
    },
    /// Train an SVM on labeled feature CSVs.
    Train {
        #[arg(required = true)]
        blocks: Vec<PathBuf>,
        /// linear, polyN or rbfSIGMA
        #[arg(long, default_value = "poly2")]
        kernel: KernelSpec,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = firesal::svm::DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Fit a per-feature min-max scaler and store it in the model.
        #[arg(long)]
        scale: bool,
        #[arg(long, default_value = "model.txt")]
        out: PathBuf,
    },
    /// Stratified k-fold cross-validation.
    Cv {
        #[arg(required = true)]
        blocks: Vec<PathBuf>,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "poly2")]
        kernel: KernelSpec,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        scale: bool,
        #[arg(long)]
        json: bool,
    },
    /// Score detector output against ground truth. Takes one or more
    /// `results.jsonl truth.txt` pairs.
    Evaluate {
        #[arg(required = true, num_args = 2..)]
        files: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Write a synthetic clip as numbered PPM frames (truth masks as PGM).
    Synth {
        kind: SynthKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60)]
        frames: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelArg {
    Fire,
    Nonfire,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Flame,
    Rectangle,
    Gray,
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    path.map_or_else(|| Ok(PipelineConfig::default()), |p| at(p, PipelineConfig::load(p)))
}

fn load_training(paths: &[PathBuf]) -> Result<Vec<LabeledVector>> {
    let mut out = Vec::new();
    for path in paths {
        let file = at(path, fs::File::open(path).map_err(Error::from))?;
        for rec in read_features(BufReader::new(file))? {
            let label = rec.label.ok_or_else(|| {
                Error::MalformedFeatures(format!(
                    "{}: unlabeled block at window {} ({}, {})",
                    path.display(),
                    rec.window_start,
                    rec.block_col,
                    rec.block_row
                ))
            })?;
            out.push(LabeledVector::new(rec.feature.to_vec(), label));
        }
    }
    Ok(out)
}

/// Names the file in I/O errors.
fn at<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("config")
}

fn run(cli: Cli) -> Result<()> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Detect {
            frames_dir,
            model,
            config,
            out,
            overlay_dir,
            pattern,
        } => {
            let cfg = load_config(config.as_deref())?;
            let model_path = model.or_else(|| cfg.model_path.clone()).ok_or_else(|| {
                Error::Config("no model given; pass --model or set model.path".into())
            })?;
            let model = at(&model_path, load_model(&model_path))?;
            let records = run_detect(&DetectRequest {
                frames_dir: &frames_dir,
                pattern: &pattern,
                model: &model,
                config: &cfg,
                out: &out,
                overlay_dir: overlay_dir.as_deref(),
            })?;
            let effective = PipelineConfig {
                model_path: Some(model_path),
                ..cfg
            };
            fs::write(sidecar_path(&out), effective.to_text())?;
            let raw = records.iter().filter(|r| r.raw_fire).count();
            let refined = records.iter().filter(|r| r.refined_fire).count();
            eprintln!(
                "{} frames, {raw} raw positive, {refined} after persistence -> {}",
                records.len(),
                out.display()
            );
        }
        Command::Features {
            frames_dir,
            mask_truth,
            label,
            all_blocks,
            config,
            out,
            pattern,
        } => {
            let cfg = load_config(config.as_deref())?;
            let clip = load_frame_sequence(&frames_dir, &pattern)?;
            let masks = match &mask_truth {
                Some(dir) => Some(load_truth_masks(dir, &pattern, &cfg)?),
                None => None,
            };
            let labeling = match (&masks, label) {
                (Some(m), _) => BlockLabeling::Masks(m),
                (None, Some(LabelArg::Fire)) => BlockLabeling::Uniform(BlockLabel::Fire),
                (None, Some(LabelArg::Nonfire)) => BlockLabeling::Uniform(BlockLabel::NonFire),
                (None, None) => BlockLabeling::None,
            };
            let records = extract_features(&clip, &cfg, labeling, all_blocks)?;
            let mut w = BufWriter::new(fs::File::create(&out)?);
            write_features(&mut w, &records)?;
            w.flush()?;
            eprintln!("{} blocks -> {}", records.len(), out.display());
        }
        Command::Train {
            blocks,
            kernel,
            c,
            tol,
            max_iter,
            scale,
            out,
        } => {
            let data = load_training(&blocks)?;
            let params = TrainParams {
                c,
                tol,
                max_iter,
                scale,
            };
            let outcome = train_detailed(&data, kernel, params)?;
            save_model(&out, &outcome.model)?;
            eprintln!(
                "{} samples, {} support vectors, {} iterations -> {}",
                data.len(),
                outcome.model.support_vectors.len(),
                outcome.iterations,
                out.display()
            );
        }
        Command::Cv {
            blocks,
            k,
            seed,
            kernel,
            c,
            scale,
            json,
        } => {
            let data = load_training(&blocks)?;
            let params = TrainParams {
                c,
                scale,
                ..Default::default()
            };
            let cv = kfold_cv(&data, k, kernel, params, seed)?;
            if json {
                let doc = serde_json::json!({
                    "k": k,
                    "seed": seed,
                    "kernel": kernel.to_string(),
                    "c": c,
                    "confusion": cv.confusion,
                    "metrics": cv.report,
                });
                writeln!(stdout, "{doc}")?;
            } else {
                let (m, cc) = (cv.report, cv.confusion);
                writeln!(stdout, "kernel {kernel}, C {c}, {k} folds, seed {seed}")?;
                writeln!(stdout, "TP {} TN {} FP {} FN {}", cc.tp, cc.tn, cc.fp, cc.fn_)?;
                writeln!(
                    stdout,
                    "sensitivity {:.4}  specificity {:.4}  accuracy {:.4}  error {:.4}",
                    m.sensitivity, m.specificity, m.accuracy, m.error
                )?;
            }
        }
        Command::Evaluate { files, json } => {
            if files.len() % 2 != 0 {
                return Err(Error::InvalidParameter(
                    "evaluate takes results/truth pairs".into(),
                ));
            }
            let mut videos = Vec::new();
            for pair in files.chunks(2) {
                let rows = at(&pair[0], load_results(&pair[0]))?;
                let truth = at(&pair[1], GroundTruth::load(&pair[1]))?;
                let id = pair[0]
                    .file_stem()
                    .map_or_else(|| pair[0].display().to_string(), |s| s.to_string_lossy().into_owned());
                videos.push(evaluate_video(&id, &rows, &truth)?);
            }
            let report = evaluate(videos);
            if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                write!(stdout, "{}", report.to_table())?;
            }
        }
        Command::Synth {
            kind,
            out,
            frames,
            seed,
        } => {
            let (clip, truth) = match kind {
                SynthKind::Flame => {
                    let (c, t) = synth::flame_clip(frames, seed)?;
                    (c, Some(t))
                }
                SynthKind::Rectangle => {
                    let (c, t) = synth::orange_rectangle_clip(frames, seed)?;
                    (c, Some(t))
                }
                SynthKind::Gray => (synth::gray_noise_clip(frames, seed)?, None),
            };
            save_frame_sequence(&out, &clip)?;
            if let Some(masks) = truth {
                let dir = out.join("truth");
                fs::create_dir_all(&dir)?;
                for (i, m) in masks.iter().enumerate() {
                    let data = m.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
                    let frame = Frame::new(m.width(), m.height(), 1, data)?;
                    clipio::write_frame(&dir.join(format!("mask_{i:05}.pgm")), &frame)?;
                }
            }
            eprintln!("{} frames -> {}", clip.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
