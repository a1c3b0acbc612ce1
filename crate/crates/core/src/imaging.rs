//! Pixel-buffer primitives shared by every stage of the detector.
//!
//! Frames hold 8-bit samples; derived maps (grayscale, saliency, HSV
//! channels) hold `f64` values normalized to `[0, 1]`. Everything here is a
//! pure function over immutable values.

use crate::error::{Error, Result};

/// An 8-bit raster, either RGB (3 channels) or gray (1 channel), stored
/// row-major with interleaved channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions(format!(
                "frame must be non-empty, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidChannelCount {
                expected: 3,
                found: channels,
            });
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidDimensions(format!(
                "{width}x{height}x{channels} frame needs {} samples, got {}",
                width * height * channels,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// A frame filled with one RGB color.
    pub fn filled_rgb(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width * height * 3)
            .collect();
        Self::new(width, height, 3, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Samples of the pixel at `(x, y)`; one element for gray frames.
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, value: &[u8]) {
        let i = (y * self.width + x) * self.channels;
        self.data[i..i + self.channels].copy_from_slice(value);
    }

    /// Returns an RGB frame, replicating the gray channel when needed.
    pub fn to_rgb(&self) -> Frame {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        Frame {
            width: self.width,
            height: self.height,
            channels: 3,
            data,
        }
    }

    fn require_rgb(&self) -> Result<()> {
        if self.channels != 3 {
            return Err(Error::InvalidChannelCount {
                expected: 3,
                found: self.channels,
            });
        }
        Ok(())
    }

    /// Iterator over RGB triples in scan order. Panics on gray frames.
    pub fn rgb_pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        assert_eq!(self.channels, 3, "rgb_pixels on a gray frame");
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }
}

/// Hue, saturation and value planes, each normalized to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HsvFrame {
    pub width: usize,
    pub height: usize,
    pub hue: Vec<f64>,
    pub saturation: Vec<f64>,
    pub value: Vec<f64>,
}

impl HsvFrame {
    pub fn hue_map(&self) -> GrayMap {
        GrayMap::from_raw(self.width, self.height, self.hue.clone())
    }

    pub fn saturation_map(&self) -> GrayMap {
        GrayMap::from_raw(self.width, self.height, self.saturation.clone())
    }

    pub fn value_map(&self) -> GrayMap {
        GrayMap::from_raw(self.width, self.height, self.value.clone())
    }
}

/// A real-valued single-channel map with values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidDimensions(format!(
                "{width}x{height} map with {} values",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "map value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Internal constructor for values already known to be in range.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

/// Inclusive-exclusive pixel rectangle `[x, x + width) × [y, y + height)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }
}

/// Per-pixel boolean mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InvalidDimensions(format!(
                "{width}x{height} mask with {} bits",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    pub(crate) fn from_fn(width: usize, height: usize, f: impl Fn(usize) -> bool) -> Self {
        Self {
            width,
            height,
            bits: (0..width * height).map(f).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True when every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

/// 256-bin histogram of quantized levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram256 {
    pub counts: [u64; 256],
}

impl Default for Histogram256 {
    fn default() -> Self {
        Self { counts: [0; 256] }
    }
}

impl Histogram256 {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Hexcone RGB → HSV with every channel normalized to `[0, 1]`.
/// Achromatic pixels get hue 0 and saturation 0.
pub fn rgb_to_hsv(frame: &Frame) -> Result<HsvFrame> {
    frame.require_rgb()?;
    let n = frame.width * frame.height;
    let mut hue = Vec::with_capacity(n);
    let mut saturation = Vec::with_capacity(n);
    let mut value = Vec::with_capacity(n);
    for [r, g, b] in frame.rgb_pixels() {
        let (h, s, v) = hsv_of(r, g, b);
        hue.push(h);
        saturation.push(s);
        value.push(v);
    }
    Ok(HsvFrame {
        width: frame.width,
        height: frame.height,
        hue,
        saturation,
        value,
    })
}

pub(crate) fn hsv_of(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = f64::from(max) / 255.0;
    if max == min {
        return (0.0, 0.0, v);
    }
    let delta = f64::from(max - min);
    let s = delta / f64::from(max);
    let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
    let sector = if max as f64 == r {
        (g - b) / delta
    } else if max as f64 == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut h = sector / 6.0;
    if h < 0.0 {
        h += 1.0;
    }
    (h, s, v)
}

pub(crate) const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// ITU-601 luma, normalized to `[0, 1]`.
pub fn to_grayscale(frame: &Frame) -> Result<GrayMap> {
    frame.require_rgb()?;
    let data = frame
        .rgb_pixels()
        .map(|p| (luma(p) / 255.0).clamp(0.0, 1.0))
        .collect();
    Ok(GrayMap::from_raw(frame.width, frame.height, data))
}

pub(crate) fn luma([r, g, b]: [u8; 3]) -> f64 {
    LUMA_WEIGHTS[0] * f64::from(r) + LUMA_WEIGHTS[1] * f64::from(g) + LUMA_WEIGHTS[2] * f64::from(b)
}

/// 8-bit luma plane (rounded), used as voxel data for texture blocks.
/// Gray frames are passed through unchanged.
pub fn luma_plane(frame: &Frame) -> Vec<u8> {
    if frame.channels == 1 {
        return frame.data.clone();
    }
    frame
        .rgb_pixels()
        .map(|p| luma(p).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Bin index `floor(v * 255 + 0.5)` of a normalized value.
pub fn quantize(v: f64) -> usize {
    ((v * 255.0 + 0.5).floor() as i64).clamp(0, 255) as usize
}

pub fn quantize_histogram(map: &GrayMap) -> Histogram256 {
    histogram_of(map.data())
}

pub(crate) fn histogram_of(values: &[f64]) -> Histogram256 {
    let mut hist = Histogram256::default();
    for &v in values {
        hist.counts[quantize(v)] += 1;
    }
    hist
}

/// Otsu's threshold: the level `k` maximizing the between-class variance of
/// the split `{0..=k}` vs `{k+1..=255}`. Ties go to the smallest `k`; a
/// histogram with all mass in one bin returns that bin.
pub fn otsu_threshold(hist: &Histogram256) -> Result<u8> {
    let total = hist.total();
    if total == 0 {
        return Err(Error::DegenerateInput("Otsu on an empty histogram".into()));
    }
    let occupied: Vec<usize> = (0..256).filter(|&i| hist.counts[i] > 0).collect();
    if occupied.len() == 1 {
        return Ok(occupied[0] as u8);
    }

    let total_sum: u128 = hist
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u128 * u128::from(c))
        .sum();
    let n = u128::from(total);

    let mut best: Option<(usize, Score)> = None;
    let mut n0: u128 = 0;
    let mut s0: u128 = 0;
    for k in 0..255 {
        n0 += u128::from(hist.counts[k]);
        s0 += k as u128 * u128::from(hist.counts[k]);
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        // Between-class variance is D^2 / (n0 * n1 * N^2) with
        // D = s0 * N - S * n0; the N^2 factor is common to every split.
        let d = (s0 * n).abs_diff(total_sum * n0);
        let score = Score {
            num: d,
            den: n0 * n1,
        };
        match &best {
            Some((_, b)) if !score.greater_than(b) => {}
            _ => best = Some((k, score)),
        }
    }
    // At least two occupied bins guarantee a split with both classes present.
    Ok(best.map(|(k, _)| k as u8).unwrap_or(0))
}

/// `num^2 / den`, compared exactly where `u128` permits.
struct Score {
    num: u128,
    den: u128,
}

impl Score {
    fn greater_than(&self, other: &Score) -> bool {
        let lhs = self
            .num
            .checked_mul(self.num)
            .and_then(|v| v.checked_mul(other.den));
        let rhs = other
            .num
            .checked_mul(other.num)
            .and_then(|v| v.checked_mul(self.den));
        match (lhs, rhs) {
            (Some(l), Some(r)) => l > r,
            _ => {
                let l = (self.num as f64).powi(2) / self.den as f64;
                let r = (other.num as f64).powi(2) / other.den as f64;
                l > r
            }
        }
    }
}

/// Otsu threshold of a normalized map, rescaled to `[0, 1]`.
pub fn otsu_level(map: &GrayMap) -> Result<f64> {
    Ok(f64::from(otsu_threshold(&quantize_histogram(map))?) / 255.0)
}

fn require_same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

pub(crate) fn check_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    require_same_dims(a, b)
}

pub fn mask_and(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    require_same_dims(a.dims(), b.dims())?;
    Ok(BinaryMask {
        width: a.width,
        height: a.height,
        bits: a.bits.iter().zip(&b.bits).map(|(&x, &y)| x && y).collect(),
    })
}

pub fn mask_or(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    require_same_dims(a.dims(), b.dims())?;
    Ok(BinaryMask {
        width: a.width,
        height: a.height,
        bits: a.bits.iter().zip(&b.bits).map(|(&x, &y)| x || y).collect(),
    })
}

/// Number of set bits inside `region`.
pub fn mask_count(mask: &BinaryMask, region: Rect) -> Result<usize> {
    if region.x + region.width > mask.width || region.y + region.height > mask.height {
        return Err(Error::OutOfBounds {
            region: (region.x, region.y, region.width, region.height),
            width: mask.width,
            height: mask.height,
        });
    }
    Ok((region.y..region.y + region.height)
        .map(|y| {
            let row = &mask.bits[y * mask.width + region.x..y * mask.width + region.x + region.width];
            row.iter().filter(|&&b| b).count()
        })
        .sum())
}

// sRGB (D65) → CIELAB. Reference white Xn = 0.95047, Yn = 1.0, Zn = 1.08883.
const WHITE_D65: [f64; 3] = [0.950_47, 1.0, 1.088_83];

fn srgb_to_linear(c: u8) -> f64 {
    let c = f64::from(c) / 255.0;
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const EPS: f64 = 216.0 / 24389.0;
    const KAPPA: f64 = 24389.0 / 27.0;
    if t > EPS {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

/// CIELAB coordinates of an sRGB pixel under a D65 white point.
pub fn srgb_to_lab([r, g, b]: [u8; 3]) -> [f64; 3] {
    let (r, g, b) = (srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b));
    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;
    let fx = lab_f(x / WHITE_D65[0]);
    let fy = lab_f(y / WHITE_D65[1]);
    let fz = lab_f(z / WHITE_D65[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Per-pixel Lab planes of an RGB frame, interleaved `[L, a, b]`.
pub fn lab_image(frame: &Frame) -> Result<Vec<[f64; 3]>> {
    frame.require_rgb()?;
    Ok(frame.rgb_pixels().map(srgb_to_lab).collect())
}
