//! End-to-end detector.
//!
//! Per frame: saliency map, thresholded candidate mask, quick-shift growth,
//! HSV gate, and the AND of the two masks. Per window: luma blocks, salient
//! block selection, LBP-TOP features and SVM classification. A frame is a
//! raw positive when any window covering it holds a fire block; positives
//! then latch forward for `persistence` frames.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clipio::{self, Clip, ClipWindow, DEFAULT_STRIDE, DEFAULT_WINDOW, WORK_HEIGHT, WORK_WIDTH};
use crate::colormodel::{channel_thresholds, combine_with_saliency, fire_color_mask, ColorPriors};
use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::imaging::{luma_plane, rgb_to_hsv, BinaryMask, Frame};
use crate::saliency::{compute_saliency, SaliencyBackend};
use crate::segmentation::{
    grow_regions, quickshift, saliency_segment, QuickShiftParams, DEFAULT_BLOCK_SIZE,
    DEFAULT_MIN_OVERLAP,
};
use crate::svm::{predict, SvmModel};
use crate::texture::{
    lbp_top, partition_planes, salient_voxels, BlockLabel, FeatureRecord, DEFAULT_BLOCK,
    DEFAULT_SALIENT_FRACTION,
};

pub const DEFAULT_PERSISTENCE: usize = 15;

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub saliency_backend: SaliencyBackend,
    pub segment_block_size: usize,
    pub quickshift: QuickShiftParams,
    pub min_overlap: Fraction,
    pub color: ColorPriors,
    pub block_size: usize,
    pub window_length: usize,
    pub window_stride: usize,
    pub salient_fraction: Fraction,
    pub model_path: Option<PathBuf>,
    pub persistence: usize,
    pub frame_width: usize,
    pub frame_height: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            saliency_backend: SaliencyBackend::default(),
            segment_block_size: DEFAULT_BLOCK_SIZE,
            quickshift: QuickShiftParams::default(),
            min_overlap: DEFAULT_MIN_OVERLAP,
            color: ColorPriors::default(),
            block_size: DEFAULT_BLOCK,
            window_length: DEFAULT_WINDOW,
            window_stride: DEFAULT_STRIDE,
            salient_fraction: DEFAULT_SALIENT_FRACTION,
            model_path: None,
            persistence: DEFAULT_PERSISTENCE,
            frame_width: WORK_WIDTH,
            frame_height: WORK_HEIGHT,
        }
    }
}

/// Keys accepted in a config file, in the order they are written back.
pub const CONFIG_KEYS: &[&str] = &[
    "saliency.backend",
    "segment.block_size",
    "quickshift.sigma",
    "quickshift.tau",
    "quickshift.ratio",
    "grow.min_overlap",
    "color.hue_max",
    "color.sat_min",
    "color.val_min",
    "color.clamp_hue",
    "texture.block_size",
    "window.length",
    "window.stride",
    "select.fraction",
    "model.path",
    "persistence.length",
    "frame.width",
    "frame.height",
];

impl PipelineConfig {
    /// Parses flat `key = value` lines; `#` starts a comment. Unknown keys
    /// and malformed values are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
        }
        match key {
            "saliency.backend" => self.saliency_backend = value.parse()?,
            "segment.block_size" => self.segment_block_size = num(key, value)?,
            "quickshift.sigma" => self.quickshift.sigma = num(key, value)?,
            "quickshift.tau" => self.quickshift.tau = num(key, value)?,
            "quickshift.ratio" => self.quickshift.ratio = num(key, value)?,
            "grow.min_overlap" => self.min_overlap = value.parse()?,
            "color.hue_max" => self.color.hue_max = num(key, value)?,
            "color.sat_min" => self.color.sat_min = num(key, value)?,
            "color.val_min" => self.color.val_min = num(key, value)?,
            "color.clamp_hue" => self.color.clamp_hue = num(key, value)?,
            "texture.block_size" => self.block_size = num(key, value)?,
            "window.length" => self.window_length = num(key, value)?,
            "window.stride" => self.window_stride = num(key, value)?,
            "select.fraction" => self.salient_fraction = value.parse()?,
            "model.path" => self.model_path = Some(PathBuf::from(value)),
            "persistence.length" => self.persistence = num(key, value)?,
            "frame.width" => self.frame_width = num(key, value)?,
            "frame.height" => self.frame_height = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        self.quickshift
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.segment_block_size == 0 {
            return fail("segment.block_size must be positive".into());
        }
        if self.block_size < 3 {
            return fail(format!("texture.block_size {} is below 3", self.block_size));
        }
        if self.window_length < 3 || self.window_stride == 0 {
            return fail("window.length must be >= 3 and window.stride > 0".into());
        }
        if self.frame_width == 0 || self.frame_height == 0 {
            return fail("frame dimensions must be positive".into());
        }
        if !self.frame_width.is_multiple_of(self.block_size) || !self.frame_height.is_multiple_of(self.block_size) {
            return fail(format!(
                "frame {}x{} is not divisible by texture.block_size {}",
                self.frame_width, self.frame_height, self.block_size
            ));
        }
        for (name, v) in [
            ("color.hue_max", self.color.hue_max),
            ("color.sat_min", self.color.sat_min),
            ("color.val_min", self.color.val_min),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} = {v} outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// The effective configuration in the same `key = value` syntax.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            let value = match *key {
                "saliency.backend" => self.saliency_backend.to_string(),
                "segment.block_size" => self.segment_block_size.to_string(),
                "quickshift.sigma" => self.quickshift.sigma.to_string(),
                "quickshift.tau" => self.quickshift.tau.to_string(),
                "quickshift.ratio" => self.quickshift.ratio.to_string(),
                "grow.min_overlap" => self.min_overlap.to_string(),
                "color.hue_max" => self.color.hue_max.to_string(),
                "color.sat_min" => self.color.sat_min.to_string(),
                "color.val_min" => self.color.val_min.to_string(),
                "color.clamp_hue" => self.color.clamp_hue.to_string(),
                "texture.block_size" => self.block_size.to_string(),
                "window.length" => self.window_length.to_string(),
                "window.stride" => self.window_stride.to_string(),
                "select.fraction" => self.salient_fraction.to_string(),
                "model.path" => match &self.model_path {
                    Some(p) => p.display().to_string(),
                    None => continue,
                },
                "persistence.length" => self.persistence.to_string(),
                "frame.width" => self.frame_width.to_string(),
                "frame.height" => self.frame_height.to_string(),
                _ => unreachable!(),
            };
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }
}

/// Per-frame masks and the luma plane used for texture blocks.
#[derive(Clone, Debug)]
pub struct FrameAnalysis {
    /// Saliency mask after superpixel growth.
    pub saliency_mask: BinaryMask,
    pub color_mask: BinaryMask,
    /// `saliency_mask ∧ color_mask`.
    pub region_mask: BinaryMask,
    pub luma: Vec<u8>,
}

pub fn analyze_frame(frame: &Frame, cfg: &PipelineConfig) -> Result<FrameAnalysis> {
    let rgb = frame.to_rgb();
    let saliency = compute_saliency(&rgb, cfg.saliency_backend)?;
    let candidate = saliency_segment(&saliency, &rgb, cfg.segment_block_size)?;
    // Growing an empty mask cannot add anything.
    let saliency_mask = if candidate.count() == 0 {
        candidate
    } else {
        grow_regions(&candidate, &quickshift(&rgb, cfg.quickshift)?, cfg.min_overlap)?
    };
    let hsv = rgb_to_hsv(&rgb)?;
    let thresholds = channel_thresholds(&hsv, &cfg.color)?;
    let color_mask = fire_color_mask(&hsv, &thresholds);
    let region_mask = combine_with_saliency(&color_mask, &saliency_mask)?;
    Ok(FrameAnalysis {
        saliency_mask,
        color_mask,
        region_mask,
        luma: luma_plane(&rgb),
    })
}

/// Blocks of one window that passed selection, and which of them the
/// classifier called fire. Coordinates are `(col, row)` on the block grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowOutcome {
    pub start_index: usize,
    pub length: usize,
    pub selected_blocks: Vec<(usize, usize)>,
    pub positive_blocks: Vec<(usize, usize)>,
}

/// Classifies one window given the analyses of its frames.
pub fn classify_window(
    start_index: usize,
    analyses: &[FrameAnalysis],
    width: usize,
    height: usize,
    model: &SvmModel,
    cfg: &PipelineConfig,
) -> Result<WindowOutcome> {
    let planes: Vec<&[u8]> = analyses.iter().map(|a| a.luma.as_slice()).collect();
    let masks: Vec<BinaryMask> = analyses.iter().map(|a| a.region_mask.clone()).collect();
    let blocks = partition_planes(&planes, width, height, start_index, cfg.block_size)?;
    let mut selected = Vec::new();
    for b in blocks {
        let salient = salient_voxels(&b, &masks)?;
        if cfg
            .salient_fraction
            .exceeded_by(salient as u64, b.voxel_count() as u64)
        {
            selected.push(b);
        }
    }
    let verdicts = selected
        .par_iter()
        .map(|b| -> Result<bool> {
            let feature = lbp_top(b)?.to_vec();
            Ok(predict(model, &feature)?.0 == BlockLabel::Fire)
        })
        .collect::<Result<Vec<_>>>()?;
    let positive_blocks = selected
        .iter()
        .zip(&verdicts)
        .filter(|(_, &fire)| fire)
        .map(|(b, _)| b.grid_pos())
        .collect();
    Ok(WindowOutcome {
        start_index,
        length: analyses.len(),
        selected_blocks: selected.iter().map(|b| b.grid_pos()).collect(),
        positive_blocks,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionRecord {
    pub frame_index: usize,
    pub raw_fire: bool,
    pub refined_fire: bool,
    pub region_mask: BinaryMask,
    pub positive_blocks: Vec<(usize, usize)>,
}

/// Runs one window on its own. Records carry `refined_fire == raw_fire`;
/// the persistence latch needs the whole timeline.
pub fn process_window(
    window: &ClipWindow<'_>,
    model: &SvmModel,
    cfg: &PipelineConfig,
) -> Result<Vec<DetectionRecord>> {
    if window.length != cfg.window_length {
        return Err(Error::InvalidParameter(format!(
            "window of {} frames, config expects {}",
            window.length, cfg.window_length
        )));
    }
    let analyses = window
        .frames()
        .par_iter()
        .map(|f| analyze_frame(f, cfg))
        .collect::<Result<Vec<_>>>()?;
    let (w, h) = window.dims();
    let outcome = classify_window(window.start_index, &analyses, w, h, model, cfg)?;
    let raw = !outcome.positive_blocks.is_empty();
    Ok(analyses
        .into_iter()
        .enumerate()
        .map(|(i, a)| DetectionRecord {
            frame_index: window.start_index + i,
            raw_fire: raw,
            refined_fire: raw,
            region_mask: a.region_mask,
            positive_blocks: outcome.positive_blocks.clone(),
        })
        .collect())
}

/// Forward latch: `refined[t] = raw[t] || raw[s]` for some `s` in
/// `[t - persistence, t - 1]`.
pub fn refine_timeline(raw: &[bool], persistence: usize) -> Vec<bool> {
    let mut out = Vec::with_capacity(raw.len());
    let mut last_positive: Option<usize> = None;
    for (t, &r) in raw.iter().enumerate() {
        let latched = last_positive.is_some_and(|s| t - s <= persistence);
        out.push(r || latched);
        if r {
            last_positive = Some(t);
        }
    }
    out
}

/// Runs the detector over a clip. The clip is rescaled to the configured
/// working resolution first.
pub fn detect_clip(clip: &Clip, model: &SvmModel, cfg: &PipelineConfig) -> Result<Vec<DetectionRecord>> {
    cfg.validate()?;
    let clip = clip.rescaled(cfg.frame_width, cfg.frame_height)?;
    let starts = clipio::window_starts(clip.len(), cfg.window_length, cfg.window_stride)?;
    let analyses = clip
        .frames()
        .par_iter()
        .map(|f| analyze_frame(f, cfg))
        .collect::<Result<Vec<_>>>()?;
    let outcomes = starts
        .par_iter()
        .map(|&s| {
            classify_window(
                s,
                &analyses[s..s + cfg.window_length],
                cfg.frame_width,
                cfg.frame_height,
                model,
                cfg,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let n = clip.len();
    let mut raw = vec![false; n];
    let mut positives: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); n];
    for o in &outcomes {
        for t in o.start_index..o.start_index + o.length {
            raw[t] |= !o.positive_blocks.is_empty();
            positives[t].extend(o.positive_blocks.iter().copied());
        }
    }
    let refined = refine_timeline(&raw, cfg.persistence);
    Ok(analyses
        .into_iter()
        .enumerate()
        .map(|(t, a)| DetectionRecord {
            frame_index: t,
            raw_fire: raw[t],
            refined_fire: refined[t],
            region_mask: a.region_mask,
            positive_blocks: positives[t].iter().copied().collect(),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// results.jsonl

/// One line of `results.jsonl`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRow {
    pub frame: usize,
    pub raw_fire: bool,
    pub refined_fire: bool,
    pub positive_block_count: usize,
    pub mask_area: usize,
}

impl From<&DetectionRecord> for ResultRow {
    fn from(r: &DetectionRecord) -> Self {
        Self {
            frame: r.frame_index,
            raw_fire: r.raw_fire,
            refined_fire: r.refined_fire,
            positive_block_count: r.positive_blocks.len(),
            mask_area: r.region_mask.count(),
        }
    }
}

pub fn write_results<W: Write>(mut out: W, records: &[DetectionRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, &ResultRow::from(r))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_results<R: BufRead>(input: R) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line)?);
    }
    Ok(rows)
}

/// Copy of `frame` with region pixels blended toward green.
pub fn overlay(frame: &Frame, mask: &BinaryMask) -> Frame {
    let mut out = frame.to_rgb();
    for y in 0..out.height() {
        for x in 0..out.width() {
            if mask.get(x, y) {
                let p = out.pixel(x, y);
                let blended = [p[0] / 2, p[1] / 2 + 128, p[2] / 2];
                out.set_pixel(x, y, &blended);
            }
        }
    }
    out
}

pub struct DetectRequest<'a> {
    pub frames_dir: &'a Path,
    pub pattern: &'a str,
    pub model: &'a SvmModel,
    pub config: &'a PipelineConfig,
    pub out: &'a Path,
    pub overlay_dir: Option<&'a Path>,
}

/// Loads a frame directory, runs the detector and writes `results.jsonl`
/// (plus overlays when requested).
pub fn run_detect(req: &DetectRequest<'_>) -> Result<Vec<DetectionRecord>> {
    let clip = clipio::load_frame_sequence(req.frames_dir, req.pattern)?;
    let records = detect_clip(&clip, req.model, req.config)?;
    let mut w = BufWriter::new(fs::File::create(req.out)?);
    write_results(&mut w, &records)?;
    w.flush()?;
    if let Some(dir) = req.overlay_dir {
        fs::create_dir_all(dir)?;
        let work = clip.rescaled(req.config.frame_width, req.config.frame_height)?;
        for (f, r) in work.frames().iter().zip(&records) {
            clipio::write_frame(
                &dir.join(format!("overlay_{:05}.ppm", r.frame_index)),
                &overlay(f, &r.region_mask),
            )?;
        }
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Feature extraction for training

/// How blocks are labeled when dumping features.
#[derive(Clone, Debug)]
pub enum BlockLabeling<'a> {
    None,
    /// Every block gets the same label.
    Uniform(BlockLabel),
    /// Per-frame truth masks; a block is fire when its truth voxel count
    /// exceeds the salient fraction.
    Masks(&'a [BinaryMask]),
}

/// Extracts LBP-TOP records for every window of a clip. With `all_blocks`
/// unset only salient blocks are kept, as in detection.
pub fn extract_features(
    clip: &Clip,
    cfg: &PipelineConfig,
    labeling: BlockLabeling<'_>,
    all_blocks: bool,
) -> Result<Vec<FeatureRecord>> {
    cfg.validate()?;
    let clip = clip.rescaled(cfg.frame_width, cfg.frame_height)?;
    if let BlockLabeling::Masks(m) = labeling {
        if m.len() != clip.len() {
            return Err(Error::LabelMismatch(format!(
                "{} truth masks for {} frames",
                m.len(),
                clip.len()
            )));
        }
    }
    let starts = clipio::window_starts(clip.len(), cfg.window_length, cfg.window_stride)?;
    let analyses: Vec<FrameAnalysis> = if all_blocks {
        Vec::new()
    } else {
        clip.frames()
            .par_iter()
            .map(|f| analyze_frame(f, cfg))
            .collect::<Result<Vec<_>>>()?
    };
    let lumas: Vec<Vec<u8>> = if all_blocks {
        clip.frames().iter().map(luma_plane).collect()
    } else {
        analyses.iter().map(|a| a.luma.clone()).collect()
    };

    let mut records = Vec::new();
    for s in starts {
        let range = s..s + cfg.window_length;
        let planes: Vec<&[u8]> = lumas[range.clone()].iter().map(Vec::as_slice).collect();
        let blocks = partition_planes(&planes, cfg.frame_width, cfg.frame_height, s, cfg.block_size)?;
        let masks: Vec<BinaryMask> = if all_blocks {
            Vec::new()
        } else {
            analyses[range.clone()].iter().map(|a| a.region_mask.clone()).collect()
        };
        let mut kept = Vec::new();
        for b in blocks {
            if all_blocks
                || cfg
                    .salient_fraction
                    .exceeded_by(salient_voxels(&b, &masks)? as u64, b.voxel_count() as u64)
            {
                kept.push(b);
            }
        }
        let feats = kept.par_iter().map(lbp_top).collect::<Result<Vec<_>>>()?;
        for (b, feature) in kept.iter().zip(feats) {
            let label = match labeling {
                BlockLabeling::None => None,
                BlockLabeling::Uniform(l) => Some(l),
                BlockLabeling::Masks(m) => {
                    let truth = salient_voxels(b, &m[range.clone()])?;
                    Some(
                        if cfg
                            .salient_fraction
                            .exceeded_by(truth as u64, b.voxel_count() as u64)
                        {
                            BlockLabel::Fire
                        } else {
                            BlockLabel::NonFire
                        },
                    )
                }
            };
            let (block_col, block_row) = b.grid_pos();
            records.push(FeatureRecord {
                window_start: s,
                block_col,
                block_row,
                label,
                feature,
            });
        }
    }
    Ok(records)
}

/// Loads truth masks (any nonzero sample marks fire) and rescales them to
/// the working resolution.
pub fn load_truth_masks(dir: &Path, pattern: &str, cfg: &PipelineConfig) -> Result<Vec<BinaryMask>> {
    let clip = clipio::load_frame_sequence(dir, pattern)?;
    clip.frames()
        .iter()
        .map(|f| {
            let f = clipio::rescale(f, cfg.frame_width, cfg.frame_height)?;
            let ch = f.channels();
            BinaryMask::new(
                f.width(),
                f.height(),
                f.data().chunks_exact(ch).map(|p| p.iter().any(|&v| v > 0)).collect(),
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Evaluation

/// Per-frame ground truth of one video.
///
/// Text format, one range per line: `<first>-<last> fire|nonfire` (or a
/// single frame index). Ranges are inclusive; `#` starts a comment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruth {
    pub labels: Vec<Option<bool>>,
}

impl GroundTruth {
    pub fn parse(text: &str) -> Result<Self> {
        let mut labels: Vec<Option<bool>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| Error::LabelMismatch(format!("truth line {}: {m}", lineno + 1));
            let mut parts = line.split_whitespace();
            let range = parts.next().ok_or_else(|| bad("empty"))?;
            let fire = match parts.next() {
                Some("fire") => true,
                Some("nonfire") => false,
                _ => return Err(bad("expected 'fire' or 'nonfire'")),
            };
            if parts.next().is_some() {
                return Err(bad("trailing fields"));
            }
            let (a, b) = range.split_once('-').unwrap_or((range, range));
            let a: usize = a.parse().map_err(|_| bad("bad frame index"))?;
            let b: usize = b.parse().map_err(|_| bad("bad frame index"))?;
            if b < a {
                return Err(bad("descending range"));
            }
            if labels.len() <= b {
                labels.resize(b + 1, None);
            }
            for slot in &mut labels[a..=b] {
                if slot.is_some_and(|v| v != fire) {
                    return Err(bad("conflicts with an earlier range"));
                }
                *slot = Some(fire);
            }
        }
        Ok(Self { labels })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn label(&self, frame: usize) -> Option<bool> {
        self.labels.get(frame).copied().flatten()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VideoVerdict {
    pub video_id: String,
    pub frames: usize,
    pub fire_frames: usize,
    pub nonfire_frames: usize,
    pub detected_fire_frames: usize,
    pub flagged_nonfire_frames: usize,
    /// Fraction of fire frames flagged; `None` without fire frames.
    pub frame_detection_rate: Option<f64>,
    /// Fraction of non-fire frames flagged; `None` without non-fire frames.
    pub false_frame_rate: Option<f64>,
    /// Video-level call: any refined positive.
    pub video_flagged: bool,
}

pub fn evaluate_video(video_id: &str, rows: &[ResultRow], truth: &GroundTruth) -> Result<VideoVerdict> {
    let mut v = VideoVerdict {
        video_id: video_id.to_string(),
        frames: rows.len(),
        fire_frames: 0,
        nonfire_frames: 0,
        detected_fire_frames: 0,
        flagged_nonfire_frames: 0,
        frame_detection_rate: None,
        false_frame_rate: None,
        video_flagged: false,
    };
    for r in rows {
        let fire = truth.label(r.frame).ok_or_else(|| {
            Error::LabelMismatch(format!("{video_id}: no ground truth for frame {}", r.frame))
        })?;
        v.video_flagged |= r.refined_fire;
        if fire {
            v.fire_frames += 1;
            v.detected_fire_frames += usize::from(r.refined_fire);
        } else {
            v.nonfire_frames += 1;
            v.flagged_nonfire_frames += usize::from(r.refined_fire);
        }
    }
    if v.fire_frames > 0 {
        v.frame_detection_rate = Some(v.detected_fire_frames as f64 / v.fire_frames as f64);
    }
    if v.nonfire_frames > 0 {
        v.false_frame_rate = Some(v.flagged_nonfire_frames as f64 / v.nonfire_frames as f64);
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub videos: Vec<VideoVerdict>,
    /// Mean of per-video detection rates over videos that contain fire.
    pub mean_detection_rate: Option<f64>,
    /// Mean of per-video false rates over videos with non-fire frames.
    pub mean_false_rate: Option<f64>,
    /// Fraction of videos with fire frames that were flagged at all.
    pub fire_video_detection_rate: Option<f64>,
    /// Fraction of fire-free videos that were flagged at all.
    pub nonfire_video_false_rate: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn evaluate(videos: Vec<VideoVerdict>) -> EvaluationReport {
    let fire_videos = || videos.iter().filter(|v| v.fire_frames > 0);
    let clean_videos = || videos.iter().filter(|v| v.fire_frames == 0);
    EvaluationReport {
        mean_detection_rate: mean(videos.iter().filter_map(|v| v.frame_detection_rate)),
        mean_false_rate: mean(videos.iter().filter_map(|v| v.false_frame_rate)),
        fire_video_detection_rate: mean(fire_videos().map(|v| f64::from(u8::from(v.video_flagged)))),
        nonfire_video_false_rate: mean(clean_videos().map(|v| f64::from(u8::from(v.video_flagged)))),
        videos,
    }
}

impl EvaluationReport {
    pub fn to_table(&self) -> String {
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{:.2}%", 100.0 * v));
        let mut s = format!(
            "{:<24} {:>7} {:>7} {:>7} {:>10} {:>10} {:>8}\n",
            "video", "frames", "fire", "clean", "detection", "false", "flagged"
        );
        for v in &self.videos {
            s.push_str(&format!(
                "{:<24} {:>7} {:>7} {:>7} {:>10} {:>10} {:>8}\n",
                v.video_id,
                v.frames,
                v.fire_frames,
                v.nonfire_frames,
                pct(v.frame_detection_rate),
                pct(v.false_frame_rate),
                if v.video_flagged { "yes" } else { "no" }
            ));
        }
        s.push_str(&format!(
            "mean frame detection {}, mean frame false rate {}, fire videos flagged {}, clean videos flagged {}\n",
            pct(self.mean_detection_rate),
            pct(self.mean_false_rate),
            pct(self.fire_video_detection_rate),
            pct(self.nonfire_video_false_rate)
        ));
        s
    }
}

/// Reads a `results.jsonl` file.
pub fn load_results(path: &Path) -> Result<Vec<ResultRow>> {
    read_results(BufReader::new(fs::File::open(path)?))
}
