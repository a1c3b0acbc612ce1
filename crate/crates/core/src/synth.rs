//! Synthetic clips and block sets for tests, demos and smoke training.
//!
//! All generators are seeded and deterministic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clipio::{Clip, WORK_HEIGHT, WORK_WIDTH};
use crate::error::Result;
use crate::fraction::Fraction;
use crate::imaging::{luma_plane, BinaryMask, Frame};
use crate::svm::LabeledVector;
use crate::texture::{lbp_top, partition_planes, salient_voxels, BlockLabel, DEFAULT_BLOCK};

pub const BACKGROUND: [u8; 3] = [15, 45, 55];

/// Dark teal background with a fixed per-pixel jitter of up to ±`amp`.
fn background(w: usize, h: usize, amp: i16, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut data = Vec::with_capacity(w * h * 3);
    for _ in 0..w * h {
        let j: i16 = rng.gen_range(-amp..=amp);
        for c in BACKGROUND {
            data.push((c as i16 + j).clamp(0, 255) as u8);
        }
    }
    data
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
}

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (u, v) = ((x - self.cx) / self.rx, (y - self.cy) / self.ry);
        u * u + v * v <= 1.0
    }
}

/// Flame pixel color for intensity `f` in `[0, 1]`. Hue stays below 0.13 and
/// saturation and value above 0.8.
pub fn flame_color(f: f64) -> [u8; 3] {
    let f = f.clamp(0.0, 1.0);
    [
        (230.0 + 25.0 * f).round() as u8,
        (60.0 + 120.0 * f).round() as u8,
        (10.0 + 30.0 * f).round() as u8,
    ]
}

/// A flickering flame: an ellipse whose outline wobbles per frame, filled
/// with an upward-drifting turbulent intensity pattern plus per-frame noise,
/// over a static noisy background.
pub fn flame_clip(frames: usize, seed: u64) -> Result<(Clip, Vec<BinaryMask>)> {
    let (w, h) = (WORK_WIDTH, WORK_HEIGHT);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bg = background(w, h, 6, &mut rng);
    let base = Ellipse {
        cx: rng.gen_range(130.0..190.0),
        cy: rng.gen_range(120.0..140.0),
        rx: rng.gen_range(55.0..70.0),
        ry: rng.gen_range(75.0..90.0),
    };
    let phase: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let mut out = Vec::with_capacity(frames);
    let mut truth = Vec::with_capacity(frames);
    for t in 0..frames {
        let tf = t as f64;
        let shape = Ellipse {
            rx: base.rx * (1.0 + 0.08 * (0.7 * tf + 6.0 * phase[0]).sin()),
            ry: base.ry * (1.0 + 0.1 * (0.9 * tf + 6.0 * phase[1]).sin()),
            ..base
        };
        let mut data = bg.clone();
        let mut mask = BinaryMask::empty(w, h);
        for y in 0..h {
            for x in 0..w {
                let (xf, yf) = (x as f64, y as f64);
                // Tongues narrow towards the top.
                let wobble = 6.0 * ((yf * 0.15 + 1.3 * tf + 6.0 * phase[2]).sin());
                if !shape.contains(xf + wobble * (1.0 - (yf - shape.cy + shape.ry) / (2.0 * shape.ry)), yf) {
                    continue;
                }
                let swirl = (0.21 * xf + 0.33 * (yf + 4.0 * tf)).sin()
                    * (0.17 * xf - 0.11 * (yf + 3.0 * tf)).cos();
                let f = 0.5 + 0.3 * swirl + rng.gen_range(-0.3..0.3);
                let i = (y * w + x) * 3;
                data[i..i + 3].copy_from_slice(&flame_color(f));
                mask.set(x, y, true);
            }
        }
        let gain: f64 = rng.gen_range(0.92..1.0);
        for y in 0..h {
            for x in 0..w {
                if mask.get(x, y) {
                    let i = (y * w + x) * 3;
                    data[i] = (data[i] as f64 * gain).round().max(220.0) as u8;
                }
            }
        }
        out.push(Frame::new(w, h, 3, data)?);
        truth.push(mask);
    }
    Ok((Clip::new(out, format!("flame-{seed}"))?, truth))
}

/// A perfectly still orange rectangle on the noisy background.
pub fn orange_rectangle_clip(frames: usize, seed: u64) -> Result<(Clip, Vec<BinaryMask>)> {
    let (w, h) = (WORK_WIDTH, WORK_HEIGHT);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = background(w, h, 6, &mut rng);
    let (rw, rh) = (rng.gen_range(90..140), rng.gen_range(70..110));
    let (x0, y0) = (rng.gen_range(20..w - rw - 20), rng.gen_range(20..h - rh - 20));
    let color = [rng.gen_range(235..=250), rng.gen_range(100..=140), rng.gen_range(15..=30)];
    let mut mask = BinaryMask::empty(w, h);
    for y in y0..y0 + rh {
        for x in x0..x0 + rw {
            let i = (y * w + x) * 3;
            data[i..i + 3].copy_from_slice(&color);
            mask.set(x, y, true);
        }
    }
    let frame = Frame::new(w, h, 3, data)?;
    Ok((
        Clip::new(vec![frame; frames], format!("rectangle-{seed}"))?,
        vec![mask; frames],
    ))
}

/// Still gray noise, every frame identical.
pub fn gray_noise_clip(frames: usize, seed: u64) -> Result<Clip> {
    let (w, h) = (WORK_WIDTH, WORK_HEIGHT);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..w * h)
        .flat_map(|_| {
            let v: u8 = rng.gen_range(96..=160);
            [v, v, v]
        })
        .collect();
    let frame = Frame::new(w, h, 3, data)?;
    Clip::new(vec![frame; frames], format!("gray-{seed}"))
}

/// Feature vectors of the blocks in the first `length` frames of a clip
/// whose truth coverage exceeds `fraction`; all blocks when `truth` is
/// `None`.
fn blocks_of(
    clip: &Clip,
    truth: Option<&[BinaryMask]>,
    length: usize,
    fraction: Fraction,
) -> Result<Vec<Vec<f64>>> {
    let lumas: Vec<Vec<u8>> = clip.frames()[..length].iter().map(luma_plane).collect();
    let planes: Vec<&[u8]> = lumas.iter().map(Vec::as_slice).collect();
    let (w, h) = clip.dims();
    let mut out = Vec::new();
    for b in partition_planes(&planes, w, h, 0, DEFAULT_BLOCK)? {
        let keep = match truth {
            Some(m) => fraction.exceeded_by(salient_voxels(&b, &m[..length])? as u64, b.voxel_count() as u64),
            None => true,
        };
        if keep {
            out.push(lbp_top(&b)?.to_vec());
        }
    }
    Ok(out)
}

/// Balanced training set of 16×16×30 blocks: fire blocks from flame clips,
/// non-fire blocks from still orange rectangles (half) and still gray noise.
pub fn training_blocks(per_class: usize, seed: u64) -> Result<Vec<LabeledVector>> {
    const DEPTH: usize = 30;
    let fraction = Fraction::new(1, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut fire = Vec::new();
    while fire.len() < per_class {
        let (clip, truth) = flame_clip(DEPTH, rng.gen())?;
        fire.extend(blocks_of(&clip, Some(&truth), DEPTH, fraction)?);
    }
    let mut rect = Vec::new();
    while rect.len() < per_class / 2 {
        let (clip, truth) = orange_rectangle_clip(DEPTH, rng.gen())?;
        rect.extend(blocks_of(&clip, Some(&truth), DEPTH, fraction)?);
    }
    let mut gray = Vec::new();
    while gray.len() < per_class - per_class / 2 {
        gray.extend(blocks_of(&gray_noise_clip(DEPTH, rng.gen())?, None, DEPTH, fraction)?);
    }

    let mut pick = |mut v: Vec<Vec<f64>>, n: usize| -> Vec<Vec<f64>> {
        for i in 0..n {
            let j = rng.gen_range(i..v.len());
            v.swap(i, j);
        }
        v.truncate(n);
        v
    };
    let mut out: Vec<LabeledVector> = pick(fire, per_class)
        .into_iter()
        .map(|f| LabeledVector::new(f, BlockLabel::Fire))
        .collect();
    for f in pick(rect, per_class / 2)
        .into_iter()
        .chain(pick(gray, per_class - per_class / 2))
    {
        out.push(LabeledVector::new(f, BlockLabel::NonFire));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::rgb_to_hsv;

    #[test]
    fn flame_pixels_in_color_priors() {
        for i in 0..=100 {
            let c = flame_color(i as f64 / 100.0);
            let hsv = rgb_to_hsv(&Frame::new(1, 1, 3, c.to_vec()).unwrap()).unwrap();
            assert!(hsv.hue[0] < 0.2 && hsv.saturation[0] > 0.6 && hsv.value[0] > 0.6);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let (a, ma) = flame_clip(3, 9).unwrap();
        let (b, mb) = flame_clip(3, 9).unwrap();
        assert_eq!(a.frames(), b.frames());
        assert_eq!(ma, mb);
        assert!(ma[0].count() > 5000);
        assert_ne!(a.frames()[0], a.frames()[1]);
        let (r, _) = orange_rectangle_clip(2, 1).unwrap();
        assert_eq!(r.frames()[0], r.frames()[1]);
    }

    #[test]
    fn training_set_is_balanced() {
        let set = training_blocks(20, 5).unwrap();
        assert_eq!(set.len(), 40);
        assert_eq!(set.iter().filter(|v| v.label == BlockLabel::Fire).count(), 20);
        assert!(set.iter().all(|v| v.features.len() == 768));
    }
}
