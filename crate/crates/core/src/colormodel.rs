//! HSV flame-color gate.
//!
//! Each channel gets its own Otsu threshold over the whole frame. A pixel is
//! flame-colored when `H <= gt_hue`, `S >= gt_saturation` and
//! `V >= gt_value`, all on closed intervals inside `[0, 1]`. Hue is treated
//! as a linear axis, so reds that wrap around near 1.0 are rejected.
//!
//! The hue test is made on 256-level quantized values, the same levels Otsu
//! split: every pixel in the threshold bin belongs to the lower (flame)
//! class, including those a hair above `gt_hue`.

use crate::error::Result;
use crate::imaging::{histogram_of, mask_and, otsu_threshold, quantize, BinaryMask, HsvFrame};

/// Flame-pixel ranges observed offline: hue in `[0, 0.2]`, saturation and
/// value in `[0.6, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorPriors {
    pub hue_max: f64,
    pub sat_min: f64,
    pub val_min: f64,
    /// Cap the hue threshold at `hue_max`.
    pub clamp_hue: bool,
}

impl Default for ColorPriors {
    fn default() -> Self {
        Self {
            hue_max: 0.2,
            sat_min: 0.6,
            val_min: 0.6,
            clamp_hue: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorThresholds {
    pub gt_hue: f64,
    pub gt_saturation: f64,
    pub gt_value: f64,
}

impl ColorThresholds {
    /// Fixed thresholds taken straight from the priors.
    pub fn from_priors(priors: &ColorPriors) -> Self {
        Self {
            gt_hue: priors.hue_max,
            gt_saturation: priors.sat_min,
            gt_value: priors.val_min,
        }
    }
}

fn channel_otsu(values: &[f64]) -> Result<f64> {
    Ok(f64::from(otsu_threshold(&histogram_of(values))?) / 255.0)
}

pub fn channel_thresholds(hsv: &HsvFrame, priors: &ColorPriors) -> Result<ColorThresholds> {
    let otsu_h = channel_otsu(&hsv.hue)?;
    let gt_hue = if priors.clamp_hue {
        otsu_h.min(priors.hue_max)
    } else {
        otsu_h
    };
    Ok(ColorThresholds {
        gt_hue,
        gt_saturation: channel_otsu(&hsv.saturation)?,
        gt_value: channel_otsu(&hsv.value)?,
    })
}

fn hue_passes(h: f64, gt_hue: f64) -> bool {
    (0.0..=1.0).contains(&h) && (h <= gt_hue || quantize(h) <= quantize(gt_hue))
}

pub fn hue_mask(hsv: &HsvFrame, gt_hue: f64) -> BinaryMask {
    BinaryMask::from_fn(hsv.width, hsv.height, |i| hue_passes(hsv.hue[i], gt_hue))
}

pub fn saturation_mask(hsv: &HsvFrame, gt_saturation: f64) -> BinaryMask {
    BinaryMask::from_fn(hsv.width, hsv.height, |i| {
        (gt_saturation..=1.0).contains(&hsv.saturation[i])
    })
}

pub fn value_mask(hsv: &HsvFrame, gt_value: f64) -> BinaryMask {
    BinaryMask::from_fn(hsv.width, hsv.height, |i| {
        (gt_value..=1.0).contains(&hsv.value[i])
    })
}

pub fn fire_color_mask(hsv: &HsvFrame, t: &ColorThresholds) -> BinaryMask {
    BinaryMask::from_fn(hsv.width, hsv.height, |i| {
        hue_passes(hsv.hue[i], t.gt_hue)
            && (t.gt_saturation..=1.0).contains(&hsv.saturation[i])
            && (t.gt_value..=1.0).contains(&hsv.value[i])
    })
}

pub fn combine_with_saliency(color_mask: &BinaryMask, saliency_mask: &BinaryMask) -> Result<BinaryMask> {
    mask_and(color_mask, saliency_mask)
}
