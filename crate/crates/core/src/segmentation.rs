//! Saliency-map segmentation and superpixel repair.
//!
//! A frame's candidate mask keeps every pixel whose saliency reaches
//! `max_block_mean - GT`, where `GT` is the Otsu level of the frame's luma.
//! Quick-shift superpixels then extend the mask over any segment it already
//! covers by more than a fixed fraction.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::imaging::{check_dims, lab_image, otsu_level, to_grayscale, BinaryMask, Frame, GrayMap};

pub const DEFAULT_BLOCK_SIZE: usize = 32;
pub const DEFAULT_MIN_OVERLAP: Fraction = Fraction::new(1, 3);

/// Per-block mean and variance of a map over a `block_size` grid. Edge
/// blocks are clipped to the map.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockStats {
    pub grid_cols: usize,
    pub grid_rows: usize,
    pub block_size: usize,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

pub fn block_stats(map: &GrayMap, block_size: usize) -> Result<BlockStats> {
    let (w, h) = map.dims();
    if block_size == 0 || w < block_size || h < block_size {
        return Err(Error::InvalidDimensions(format!(
            "{w}x{h} map is smaller than one {block_size}x{block_size} block"
        )));
    }
    let grid_cols = w.div_ceil(block_size);
    let grid_rows = h.div_ceil(block_size);
    let mut means = Vec::with_capacity(grid_cols * grid_rows);
    let mut variances = Vec::with_capacity(grid_cols * grid_rows);
    let data = map.data();
    for by in 0..grid_rows {
        for bx in 0..grid_cols {
            let (x0, y0) = (bx * block_size, by * block_size);
            let (x1, y1) = ((x0 + block_size).min(w), (y0 + block_size).min(h));
            let n = ((x1 - x0) * (y1 - y0)) as f64;
            let mut sum = 0.0;
            for y in y0..y1 {
                sum += data[y * w + x0..y * w + x1].iter().sum::<f64>();
            }
            let mean = sum / n;
            let mut ss = 0.0;
            for y in y0..y1 {
                ss += data[y * w + x0..y * w + x1]
                    .iter()
                    .map(|v| (v - mean).powi(2))
                    .sum::<f64>();
            }
            means.push(mean.clamp(0.0, 1.0));
            variances.push(ss / n);
        }
    }
    Ok(BlockStats {
        grid_cols,
        grid_rows,
        block_size,
        means,
        variances,
    })
}

pub fn max_local_mean(stats: &BlockStats) -> f64 {
    stats.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Candidate mask using the Otsu level of `input_frame`'s luma as `GT`.
pub fn saliency_segment(map: &GrayMap, input_frame: &Frame, block_size: usize) -> Result<BinaryMask> {
    check_dims(map.dims(), input_frame.dims())?;
    let gt = otsu_level(&to_grayscale(&input_frame.to_rgb())?)?;
    segment_with_threshold(map, gt, block_size)
}

/// `map(x, y) >= max(Max_mean - gt, 0)`. A map that is zero everywhere has no
/// salient content and yields an empty mask.
pub fn segment_with_threshold(map: &GrayMap, gt: f64, block_size: usize) -> Result<BinaryMask> {
    let (w, h) = map.dims();
    if map.data().iter().all(|&v| v == 0.0) {
        return Ok(BinaryMask::empty(w, h));
    }
    let stats = block_stats(map, block_size)?;
    let threshold = (max_local_mean(&stats) - gt).max(0.0);
    let data = map.data();
    Ok(BinaryMask::from_fn(w, h, |i| data[i] >= threshold))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuickShiftParams {
    pub sigma: f64,
    pub tau: f64,
    pub ratio: f64,
}

impl Default for QuickShiftParams {
    fn default() -> Self {
        Self {
            sigma: 2.0,
            tau: 8.0,
            ratio: 0.5,
        }
    }
}

impl QuickShiftParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !(self.tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quick-shift sigma and tau must be positive (sigma={}, tau={})",
                self.sigma, self.tau
            )));
        }
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(Error::InvalidParameter(format!(
                "quick-shift ratio {} outside [0, 1]",
                self.ratio
            )));
        }
        Ok(())
    }
}

/// A partition of the image into segments `0..segment_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperpixelLabels {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub segment_count: usize,
}

impl SuperpixelLabels {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.segment_count];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

/// Full quick-shift result: the parent forest, the densities it was built
/// from, and the resulting labels. `parents[p] == p` marks a root.
#[derive(Clone, Debug)]
pub struct QuickShiftForest {
    pub parents: Vec<usize>,
    pub density: Vec<f64>,
    pub labels: SuperpixelLabels,
}

/// Largest tie-break offset added to a density. Earlier pixels in scan order
/// get the larger offset, so equal raw densities (flat plateaus) still have a
/// single mode.
const DENSITY_TIE_BREAK: f64 = 1e-6;

pub fn quickshift(frame: &Frame, params: QuickShiftParams) -> Result<SuperpixelLabels> {
    Ok(quickshift_forest(frame, params)?.labels)
}

pub fn quickshift_forest(frame: &Frame, params: QuickShiftParams) -> Result<QuickShiftForest> {
    params.validate()?;
    let (w, h) = frame.dims();
    let n = w * h;
    let lab = lab_image(frame)?;
    let feat: Vec<[f64; 5]> = lab
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            [params.ratio * x, params.ratio * y, c[0], c[1], c[2]]
        })
        .collect();
    let d2 = |a: &[f64; 5], b: &[f64; 5]| -> f64 {
        a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
    };

    let radius = (3.0 * params.sigma).ceil() as isize;
    let inv = 1.0 / (2.0 * params.sigma * params.sigma);
    let density: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|p| {
            let (px, py) = ((p % w) as isize, (p / w) as isize);
            let mut e = 0.0;
            for qy in (py - radius).max(0)..=(py + radius).min(h as isize - 1) {
                for qx in (px - radius).max(0)..=(px + radius).min(w as isize - 1) {
                    let q = qy as usize * w + qx as usize;
                    e += (-d2(&feat[p], &feat[q]) * inv).exp();
                }
            }
            e + DENSITY_TIE_BREAK * (n - p) as f64 / n as f64
        })
        .collect();

    // Any q with feature distance <= tau lies within tau / ratio pixels.
    let reach = if params.ratio > 0.0 {
        ((params.tau / params.ratio).floor() as usize).min(w.max(h))
    } else {
        w.max(h)
    } as isize;
    let tau2 = params.tau * params.tau;
    let r2 = params.ratio * params.ratio;
    let parents: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|p| {
            let (px, py) = ((p % w) as isize, (p / w) as isize);
            // Nearest higher-density q, ties to the smaller index. Rings of
            // growing Chebyshev radius r sit at feature distance >= ratio·r,
            // so the search stops once that bound passes the best match.
            let mut best: Option<(f64, usize)> = None;
            let consider = |best: &mut Option<(f64, usize)>, qx: isize, qy: isize| {
                if qx < 0 || qy < 0 || qx >= w as isize || qy >= h as isize {
                    return;
                }
                let q = qy as usize * w + qx as usize;
                if density[q] <= density[p] {
                    return;
                }
                let d = d2(&feat[p], &feat[q]);
                if d > tau2 {
                    return;
                }
                match *best {
                    Some((bd, bq)) if (bd, bq) <= (d, q) => {}
                    _ => *best = Some((d, q)),
                }
            };
            for r in 1..=reach {
                if let Some((bd, _)) = best {
                    if r2 * (r * r) as f64 > bd {
                        break;
                    }
                }
                for qx in px - r..=px + r {
                    consider(&mut best, qx, py - r);
                    consider(&mut best, qx, py + r);
                }
                for qy in py - r + 1..py + r {
                    consider(&mut best, px - r, qy);
                    consider(&mut best, px + r, qy);
                }
            }
            best.map_or(p, |(_, q)| q)
        })
        .collect();

    let labels = label_forest(&parents, w, h);
    Ok(QuickShiftForest {
        parents,
        density,
        labels,
    })
}

/// Numbers the trees of a parent forest by first occurrence in scan order.
fn label_forest(parents: &[usize], w: usize, h: usize) -> SuperpixelLabels {
    let n = parents.len();
    let mut root = vec![usize::MAX; n];
    let mut path = Vec::new();
    for p in 0..n {
        let mut cur = p;
        while root[cur] == usize::MAX && parents[cur] != cur {
            path.push(cur);
            cur = parents[cur];
        }
        let r = if root[cur] == usize::MAX { cur } else { root[cur] };
        root[cur] = r;
        for q in path.drain(..) {
            root[q] = r;
        }
    }
    let mut id_of_root = vec![u32::MAX; n];
    let mut next = 0u32;
    let labels = root
        .iter()
        .map(|&r| {
            if id_of_root[r] == u32::MAX {
                id_of_root[r] = next;
                next += 1;
            }
            id_of_root[r]
        })
        .collect();
    SuperpixelLabels {
        width: w,
        height: h,
        labels,
        segment_count: next as usize,
    }
}

/// Fills every segment whose covered fraction strictly exceeds `min_overlap`.
pub fn grow_regions(
    mask: &BinaryMask,
    labels: &SuperpixelLabels,
    min_overlap: Fraction,
) -> Result<BinaryMask> {
    check_dims(mask.dims(), labels.dims())?;
    let sizes = labels.sizes();
    let mut covered = vec![0u64; labels.segment_count];
    for (&l, &b) in labels.labels.iter().zip(mask.bits()) {
        if b {
            covered[l as usize] += 1;
        }
    }
    let fill: Vec<bool> = covered
        .iter()
        .zip(&sizes)
        .map(|(&c, &s)| min_overlap.exceeded_by(c, s as u64))
        .collect();
    let bits = mask.bits();
    let (w, h) = mask.dims();
    Ok(BinaryMask::from_fn(w, h, |i| {
        bits[i] || fill[labels.labels[i] as usize]
    }))
}
