//! Frame-sequence input: binary PPM/PGM codec, numbered-directory loading,
//! nearest-neighbor rescaling and fixed-length window scheduling.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::imaging::Frame;

/// Working resolution of the detector.
pub const WORK_WIDTH: usize = 320;
pub const WORK_HEIGHT: usize = 240;

pub const DEFAULT_WINDOW: usize = 30;
pub const DEFAULT_STRIDE: usize = 15;

/// An ordered run of equally sized frames.
#[derive(Clone, Debug)]
pub struct Clip {
    frames: Vec<Frame>,
    /// Informational only; never used by detection.
    pub frame_rate: Option<f64>,
    pub source_id: String,
}

impl Clip {
    pub fn new(frames: Vec<Frame>, source_id: impl Into<String>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidDimensions("clip needs at least one frame".into()))?;
        let (dims, channels) = (first.dims(), first.channels());
        for f in &frames[1..] {
            if f.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    found: f.dims(),
                });
            }
            if f.channels() != channels {
                return Err(Error::InvalidChannelCount {
                    expected: channels,
                    found: f.channels(),
                });
            }
        }
        Ok(Self {
            frames,
            frame_rate: None,
            source_id: source_id.into(),
        })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }

    /// Rescales every frame to `width`×`height`.
    pub fn rescaled(&self, width: usize, height: usize) -> Result<Clip> {
        let frames = self
            .frames
            .iter()
            .map(|f| rescale(f, width, height))
            .collect::<Result<Vec<_>>>()?;
        Ok(Clip {
            frames,
            frame_rate: self.frame_rate,
            source_id: self.source_id.clone(),
        })
    }
}

/// A view of `length` consecutive frames of a clip.
#[derive(Clone, Copy, Debug)]
pub struct ClipWindow<'a> {
    clip: &'a Clip,
    pub start_index: usize,
    pub length: usize,
}

impl<'a> ClipWindow<'a> {
    pub fn new(clip: &'a Clip, start_index: usize, length: usize) -> Result<Self> {
        if length == 0 || start_index + length > clip.len() {
            return Err(Error::InvalidParameter(format!(
                "window [{start_index}, {}) outside clip of {} frames",
                start_index + length,
                clip.len()
            )));
        }
        Ok(Self {
            clip,
            start_index,
            length,
        })
    }

    pub fn frames(&self) -> &'a [Frame] {
        &self.clip.frames[self.start_index..self.start_index + self.length]
    }

    pub fn frame_range(&self) -> std::ops::Range<usize> {
        self.start_index..self.start_index + self.length
    }

    pub fn dims(&self) -> (usize, usize) {
        self.clip.dims()
    }
}

/// Start offsets of all full windows: `0, stride, 2·stride, …`. A trailing
/// remainder shorter than `length` is dropped.
pub fn window_starts(frames: usize, length: usize, stride: usize) -> Result<Vec<usize>> {
    if length == 0 || stride == 0 {
        return Err(Error::InvalidParameter(
            "window length and stride must be positive".into(),
        ));
    }
    if frames < length {
        return Err(Error::EmptySchedule {
            frames,
            window: length,
        });
    }
    Ok((0..=frames - length).step_by(stride).collect())
}

pub fn windows(clip: &Clip, length: usize, stride: usize) -> Result<Vec<ClipWindow<'_>>> {
    window_starts(clip.len(), length, stride)?
        .into_iter()
        .map(|s| ClipWindow::new(clip, s, length))
        .collect()
}

/// Nearest-neighbor resampling: output `(x, y)` takes source
/// `(⌊x·sw/tw⌋, ⌊y·sh/th⌋)`.
pub fn rescale(frame: &Frame, width: usize, height: usize) -> Result<Frame> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions(format!(
            "rescale target {width}x{height}"
        )));
    }
    if frame.dims() == (width, height) {
        return Ok(frame.clone());
    }
    let (sw, sh) = frame.dims();
    let ch = frame.channels();
    let src = frame.data();
    let xmap: Vec<usize> = (0..width).map(|x| x * sw / width).collect();
    let mut data = Vec::with_capacity(width * height * ch);
    for y in 0..height {
        let sy = y * sh / height;
        let row = &src[sy * sw * ch..(sy + 1) * sw * ch];
        for &sx in &xmap {
            data.extend_from_slice(&row[sx * ch..(sx + 1) * ch]);
        }
    }
    Frame::new(width, height, ch, data)
}

// ---------------------------------------------------------------------------
// Netpbm

/// Decodes a binary PPM (`P6`) or PGM (`P5`) image with maxval 255.
pub fn decode_pnm(bytes: &[u8]) -> std::result::Result<Frame, String> {
    let mut cur = HeaderCursor { bytes, pos: 0 };
    let magic = cur.token()?;
    let channels = match magic {
        b"P6" => 3,
        b"P5" => 1,
        other => {
            return Err(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(other)
            ))
        }
    };
    let width = cur.number()?;
    let height = cur.number()?;
    let maxval = cur.number()?;
    if maxval != 255 {
        return Err(format!("maxval {maxval} unsupported (need 255)"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err("missing whitespace after header".into()),
    }
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or("image dimensions overflow")?;
    let raster = &bytes[cur.pos..];
    if raster.len() < need {
        return Err(format!(
            "truncated raster: need {need} bytes, found {}",
            raster.len()
        ));
    }
    Frame::new(width, height, channels, raster[..need].to_vec()).map_err(|e| e.to_string())
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> std::result::Result<&'a [u8], String> {
        self.skip_space_and_comments();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err("unexpected end of header".into());
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self) -> std::result::Result<usize, String> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad header number {:?}", String::from_utf8_lossy(tok)))
    }
}

/// Encodes a frame as binary PPM (RGB) or PGM (gray).
pub fn encode_pnm(frame: &Frame) -> Vec<u8> {
    let magic = if frame.channels() == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.data());
    out
}

pub fn read_frame(path: &Path) -> Result<Frame> {
    let bytes = fs::read(path)?;
    decode_pnm(&bytes).map_err(|reason| Error::Decode {
        path: path.to_path_buf(),
        reason,
    })
}

pub fn write_frame(path: &Path, frame: &Frame) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_pnm(frame))?;
    Ok(())
}

/// Files in `dir` whose names match the glob `pattern`, in frame order.
pub fn list_frames(dir: &Path, pattern: &str) -> Result<Vec<PathBuf>> {
    let pat = glob::Pattern::new(pattern)
        .map_err(|e| Error::InvalidParameter(format!("bad pattern {pattern:?}: {e}")))?;
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if !entry.file_type()?.is_file() {
            continue;
        }
        let name = entry.file_name();
        if pat.matches(&name.to_string_lossy()) {
            paths.push(entry.path());
        }
    }
    if paths.is_empty() {
        return Err(Error::NoFiles {
            dir: dir.to_path_buf(),
            pattern: pattern.to_string(),
        });
    }
    paths.sort_by_cached_key(|p| frame_sort_key(p));
    Ok(paths)
}

/// Orders by the last run of digits in the file stem (numerically), then by
/// name. For zero-padded numbering this equals plain lexicographic order.
fn frame_sort_key(path: &Path) -> (u128, String) {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = path
        .file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let digits: String = stem
        .chars()
        .rev()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(|c| c.is_ascii_digit())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    (digits.parse().unwrap_or(0), name)
}

/// Loads a numbered PPM/PGM sequence from `dir`.
pub fn load_frame_sequence(dir: &Path, pattern: &str) -> Result<Clip> {
    let paths = list_frames(dir, pattern)?;
    let mut frames = Vec::with_capacity(paths.len());
    for p in &paths {
        let f = read_frame(p)?;
        if let Some(first) = frames.first() {
            let first: &Frame = first;
            if f.dims() != first.dims() {
                return Err(Error::DimensionMismatch {
                    expected: first.dims(),
                    found: f.dims(),
                });
            }
        }
        frames.push(f);
    }
    Clip::new(frames, dir.display().to_string())
}

/// Writes `clip` as `frame_00000.ppm`, `frame_00001.ppm`, … into `dir`.
pub fn save_frame_sequence(dir: &Path, clip: &Clip) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, f) in clip.frames().iter().enumerate() {
        let ext = if f.channels() == 3 { "ppm" } else { "pgm" };
        write_frame(&dir.join(format!("frame_{i:05}.{ext}")), f)?;
    }
    Ok(())
}
