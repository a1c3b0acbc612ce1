//! Per-frame saliency maps.
//!
//! Two backends share one contract: the raw map is a squared CIELAB
//! distance, min-max normalized to `[0, 1]`, and a constant raw map yields
//! all zeros.
//!
//! * `frequency_tuned`: distance from the binomially smoothed color at each
//!   pixel to the mean image color.
//! * `max_symmetric_surround`: distance from the smoothed color to the mean
//!   smoothed color over the largest square window centered on the pixel
//!   that still fits inside the image.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imaging::{lab_image, Frame, GrayMap};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SaliencyBackend {
    #[default]
    FrequencyTuned,
    MaxSymmetricSurround,
}

impl FromStr for SaliencyBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frequency_tuned" => Ok(Self::FrequencyTuned),
            "max_symmetric_surround" => Ok(Self::MaxSymmetricSurround),
            other => Err(Error::Config(format!("unknown saliency backend {other:?}"))),
        }
    }
}

impl fmt::Display for SaliencyBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FrequencyTuned => "frequency_tuned",
            Self::MaxSymmetricSurround => "max_symmetric_surround",
        })
    }
}

/// Raw maps whose range is below this are treated as constant.
const FLAT_RANGE: f64 = 1e-9;

pub fn compute_saliency(frame: &Frame, backend: SaliencyBackend) -> Result<GrayMap> {
    let lab = lab_image(frame)?;
    let (w, h) = frame.dims();
    let smooth = binomial_smooth(&lab, w, h);
    let raw = match backend {
        SaliencyBackend::FrequencyTuned => frequency_tuned(&lab, &smooth),
        SaliencyBackend::MaxSymmetricSurround => symmetric_surround(&smooth, w, h),
    };
    Ok(normalize(w, h, raw))
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

fn frequency_tuned(lab: &[[f64; 3]], smooth: &[[f64; 3]]) -> Vec<f64> {
    let n = lab.len() as f64;
    let mut mean = [0.0; 3];
    for p in lab {
        for c in 0..3 {
            mean[c] += p[c];
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    smooth.iter().map(|p| dist2(p, &mean)).collect()
}

fn symmetric_surround(smooth: &[[f64; 3]], w: usize, h: usize) -> Vec<f64> {
    // Summed-area table with a zero guard row/column.
    let stride = w + 1;
    let mut sat = vec![[0.0f64; 3]; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = [0.0; 3];
        for x in 0..w {
            let p = smooth[y * w + x];
            for c in 0..3 {
                row[c] += p[c];
                sat[(y + 1) * stride + x + 1][c] = sat[y * stride + x + 1][c] + row[c];
            }
        }
    }
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let r = x.min(y).min(w - 1 - x).min(h - 1 - y);
            let (x0, y0, x1, y1) = (x - r, y - r, x + r + 1, y + r + 1);
            let area = ((2 * r + 1) * (2 * r + 1)) as f64;
            let mut mean = [0.0; 3];
            for c in 0..3 {
                let s = sat[y1 * stride + x1][c] - sat[y0 * stride + x1][c]
                    - sat[y1 * stride + x0][c]
                    + sat[y0 * stride + x0][c];
                mean[c] = s / area;
            }
            let p = smooth[y * w + x];
            out.push(if r == 0 { 0.0 } else { dist2(&p, &mean) });
        }
    }
    out
}

/// Separable 5×5 binomial filter `[1 4 6 4 1] / 16` with replicated borders.
fn binomial_smooth(img: &[[f64; 3]], w: usize, h: usize) -> Vec<[f64; 3]> {
    const K: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];
    let clampi = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;
    let mut tmp = vec![[0.0; 3]; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (k, wt) in K.iter().enumerate() {
                let sx = clampi(x as isize + k as isize - 2, w);
                let p = img[y * w + sx];
                for c in 0..3 {
                    acc[c] += wt * p[c];
                }
            }
            tmp[y * w + x] = acc.map(|v| v / 16.0);
        }
    }
    let mut out = vec![[0.0; 3]; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (k, wt) in K.iter().enumerate() {
                let sy = clampi(y as isize + k as isize - 2, h);
                let p = tmp[sy * w + x];
                for c in 0..3 {
                    acc[c] += wt * p[c];
                }
            }
            out[y * w + x] = acc.map(|v| v / 16.0);
        }
    }
    out
}

fn normalize(w: usize, h: usize, raw: Vec<f64>) -> GrayMap {
    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi - lo <= FLAT_RANGE {
        return GrayMap::from_raw(w, h, vec![0.0; w * h]);
    }
    let span = hi - lo;
    let data = raw
        .into_iter()
        .map(|v| ((v - lo) / span).clamp(0.0, 1.0))
        .collect();
    GrayMap::from_raw(w, h, data)
}
