//! LBP-TOP dynamic texture over spatio-temporal blocks.
//!
//! A window of frames is tiled into non-overlapping `s×s×depth` luma
//! volumes. Each volume is described by three 256-bin LBP histograms taken
//! on its XY, XT and YT slices (8 neighbors at radius 1, square sampling,
//! bit set when `neighbor >= center`), concatenated into 768 raw counts.

use std::fmt;
use std::io::{BufRead, Write};

use crate::clipio::ClipWindow;
use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::imaging::{luma_plane, mask_count, BinaryMask, Rect};

pub const DEFAULT_BLOCK: usize = 16;
pub const DEFAULT_SALIENT_FRACTION: Fraction = Fraction::new(1, 8);
pub const FEATURE_LEN: usize = 3 * 256;

/// Neighbor offsets `(dcol, drow)` clockwise from the top-left; entry `i`
/// drives bit `i` of the code.
pub const NEIGHBOR_OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

/// A luma volume cut from a window; `data` is indexed `[t][y][x]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block3D {
    pub x0: usize,
    pub y0: usize,
    pub t0: usize,
    pub width: usize,
    pub height: usize,
    pub depth: usize,
    pub data: Vec<u8>,
}

impl Block3D {
    pub fn new(width: usize, height: usize, depth: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * depth {
            return Err(Error::InvalidDimensions(format!(
                "{width}x{height}x{depth} block with {} voxels",
                data.len()
            )));
        }
        Ok(Self {
            x0: 0,
            y0: 0,
            t0: 0,
            width,
            height,
            depth,
            data,
        })
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, t: usize) -> u8 {
        self.data[(t * self.height + y) * self.width + x]
    }

    /// Grid coordinates `(col, row)` of this block's footprint.
    pub fn grid_pos(&self) -> (usize, usize) {
        (self.x0 / self.width, self.y0 / self.height)
    }

    pub fn footprint(&self) -> Rect {
        Rect::new(self.x0, self.y0, self.width, self.height)
    }

    pub fn voxel_count(&self) -> usize {
        self.width * self.height * self.depth
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockLabel {
    Fire,
    NonFire,
}

impl BlockLabel {
    pub fn value(self) -> i8 {
        match self {
            Self::Fire => 1,
            Self::NonFire => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Self::Fire),
            -1 => Some(Self::NonFire),
            _ => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }
}

impl fmt::Display for BlockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Concatenated XY / XT / YT histograms of one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LbpTopFeature {
    pub xy_hist: [u32; 256],
    pub xt_hist: [u32; 256],
    pub yt_hist: [u32; 256],
}

impl Default for LbpTopFeature {
    fn default() -> Self {
        Self {
            xy_hist: [0; 256],
            xt_hist: [0; 256],
            yt_hist: [0; 256],
        }
    }
}

impl LbpTopFeature {
    pub fn counts(&self) -> impl Iterator<Item = u32> + '_ {
        self.xy_hist
            .iter()
            .chain(&self.xt_hist)
            .chain(&self.yt_hist)
            .copied()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.counts().map(f64::from).collect()
    }

    pub fn from_counts(counts: &[u32]) -> Result<Self> {
        if counts.len() != FEATURE_LEN {
            return Err(Error::MalformedFeatures(format!(
                "expected {FEATURE_LEN} counts, got {}",
                counts.len()
            )));
        }
        let mut f = Self::default();
        f.xy_hist.copy_from_slice(&counts[..256]);
        f.xt_hist.copy_from_slice(&counts[256..512]);
        f.yt_hist.copy_from_slice(&counts[512..]);
        Ok(f)
    }
}

/// Tiles luma planes (one per frame, each `width×height`) into blocks.
pub fn partition_planes(
    planes: &[&[u8]],
    width: usize,
    height: usize,
    t0: usize,
    block: usize,
) -> Result<Vec<Block3D>> {
    if block == 0 || !width.is_multiple_of(block) || !height.is_multiple_of(block) {
        return Err(Error::IndivisibleDimensions {
            width,
            height,
            block,
        });
    }
    let depth = planes.len();
    let mut blocks = Vec::with_capacity((width / block) * (height / block));
    for by in 0..height / block {
        for bx in 0..width / block {
            let (x0, y0) = (bx * block, by * block);
            let mut data = Vec::with_capacity(block * block * depth);
            for plane in planes {
                for y in y0..y0 + block {
                    data.extend_from_slice(&plane[y * width + x0..y * width + x0 + block]);
                }
            }
            blocks.push(Block3D {
                x0,
                y0,
                t0,
                width: block,
                height: block,
                depth,
                data,
            });
        }
    }
    Ok(blocks)
}

pub fn partition_blocks(window: &ClipWindow<'_>, block: usize) -> Result<Vec<Block3D>> {
    let (w, h) = window.dims();
    if block == 0 || w % block != 0 || h % block != 0 {
        return Err(Error::IndivisibleDimensions {
            width: w,
            height: h,
            block,
        });
    }
    let planes: Vec<Vec<u8>> = window.frames().iter().map(luma_plane).collect();
    let refs: Vec<&[u8]> = planes.iter().map(Vec::as_slice).collect();
    partition_planes(&refs, w, h, window.start_index, block)
}

/// LBP code: bit `i` is set when `neighbors[i] >= center`.
#[inline]
pub fn lbp_code(center: u8, neighbors: [u8; 8]) -> u8 {
    neighbors
        .iter()
        .enumerate()
        .fold(0u8, |code, (i, &n)| if n >= center { code | (1 << i) } else { code })
}

pub fn lbp_top(block: &Block3D) -> Result<LbpTopFeature> {
    let (w, h, d) = (block.width, block.height, block.depth);
    if w < 3 || h < 3 || d < 3 {
        return Err(Error::InvalidDimensions(format!(
            "LBP-TOP needs at least 3x3x3 voxels, got {w}x{h}x{d}"
        )));
    }
    let mut f = LbpTopFeature::default();
    let code = |center: u8, sample: &dyn Fn(isize, isize) -> u8| -> usize {
        let mut n = [0u8; 8];
        for (slot, &(dc, dr)) in n.iter_mut().zip(&NEIGHBOR_OFFSETS) {
            *slot = sample(dc, dr);
        }
        usize::from(lbp_code(center, n))
    };

    // XY: columns x, rows y, every frame.
    for t in 0..d {
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let c = block.at(x, y, t);
                let k = code(c, &|dc, dr| {
                    block.at((x as isize + dc) as usize, (y as isize + dr) as usize, t)
                });
                f.xy_hist[k] += 1;
            }
        }
    }
    // XT: columns x, rows t, every y.
    for y in 0..h {
        for t in 1..d - 1 {
            for x in 1..w - 1 {
                let c = block.at(x, y, t);
                let k = code(c, &|dc, dr| {
                    block.at((x as isize + dc) as usize, y, (t as isize + dr) as usize)
                });
                f.xt_hist[k] += 1;
            }
        }
    }
    // YT: columns y, rows t, every x.
    for x in 0..w {
        for t in 1..d - 1 {
            for y in 1..h - 1 {
                let c = block.at(x, y, t);
                let k = code(c, &|dc, dr| {
                    block.at(x, (y as isize + dc) as usize, (t as isize + dr) as usize)
                });
                f.yt_hist[k] += 1;
            }
        }
    }
    Ok(f)
}

/// Expected histogram totals `(xy, xt, yt)` for a block shape.
pub fn interior_counts(w: usize, h: usize, d: usize) -> (usize, usize, usize) {
    (
        (w - 2) * (h - 2) * d,
        (w - 2) * h * (d - 2),
        w * (h - 2) * (d - 2),
    )
}

/// Salient voxel count of a block: set mask bits inside its footprint summed
/// over the frames of its depth. `masks[i]` belongs to frame `t0 + i`.
pub fn salient_voxels(block: &Block3D, masks: &[BinaryMask]) -> Result<usize> {
    if masks.len() != block.depth {
        return Err(Error::InvalidParameter(format!(
            "{} masks for a block spanning {} frames",
            masks.len(),
            block.depth
        )));
    }
    masks.iter().map(|m| mask_count(m, block.footprint())).sum()
}

/// Keeps blocks whose salient voxel fraction strictly exceeds `fraction`,
/// preserving input order.
pub fn select_blocks(
    blocks: &[Block3D],
    masks: &[BinaryMask],
    fraction: Fraction,
) -> Result<Vec<Block3D>> {
    let mut kept = Vec::new();
    for b in blocks {
        if fraction.exceeded_by(salient_voxels(b, masks)? as u64, b.voxel_count() as u64) {
            kept.push(b.clone());
        }
    }
    Ok(kept)
}

// ---------------------------------------------------------------------------
// Feature dump (CSV)

/// One row of a feature dump.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureRecord {
    pub window_start: usize,
    pub block_col: usize,
    pub block_row: usize,
    pub label: Option<BlockLabel>,
    pub feature: LbpTopFeature,
}

/// `window_start,block_col,block_row,label,xy_000..xy_255,xt_000..,yt_000..`
pub fn feature_csv_header() -> String {
    let mut cols = vec![
        "window_start".to_string(),
        "block_col".into(),
        "block_row".into(),
        "label".into(),
    ];
    for plane in ["xy", "xt", "yt"] {
        cols.extend((0..256).map(|i| format!("{plane}_{i:03}")));
    }
    cols.join(",")
}

pub fn write_features<W: Write>(mut out: W, records: &[FeatureRecord]) -> Result<()> {
    writeln!(out, "{}", feature_csv_header())?;
    for r in records {
        let label = r.label.map(|l| l.to_string()).unwrap_or_default();
        write!(
            out,
            "{},{},{},{}",
            r.window_start, r.block_col, r.block_row, label
        )?;
        for c in r.feature.counts() {
            write!(out, ",{c}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_features<R: BufRead>(input: R) -> Result<Vec<FeatureRecord>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedFeatures("empty file".into()))??;
    if header.trim_end() != feature_csv_header() {
        return Err(Error::MalformedFeatures("unexpected header".into()));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::MalformedFeatures(format!("row {}: {what}", i + 2));
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != 4 + FEATURE_LEN {
            return Err(bad(&format!("{} columns", fields.len())));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad(&format!("bad number {s:?}")));
        let label = match fields[3] {
            "" => None,
            s => Some(
                s.parse::<i64>()
                    .ok()
                    .and_then(BlockLabel::from_value)
                    .ok_or_else(|| bad(&format!("bad label {s:?}")))?,
            ),
        };
        let counts = fields[4..]
            .iter()
            .map(|s| s.parse::<u32>().map_err(|_| bad(&format!("bad count {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        records.push(FeatureRecord {
            window_start: num(fields[0])?,
            block_col: num(fields[1])?,
            block_row: num(fields[2])?,
            label,
            feature: LbpTopFeature::from_counts(&counts)?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clipio::Clip;
    use crate::imaging::Frame;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_block(rng: &mut ChaCha8Rng, w: usize, h: usize, d: usize, max: u8) -> Block3D {
        Block3D::new(w, h, d, (0..w * h * d).map(|_| rng.gen_range(0..=max)).collect()).unwrap()
    }

    #[test]
    fn code_examples() {
        assert_eq!(lbp_code(7, [7; 8]), 255);
        assert_eq!(lbp_code(5, [1, 2, 3, 4, 5, 6, 7, 8]), 240);
        assert_eq!(lbp_code(0, [0; 8]), 255);
        assert_eq!(lbp_code(9, [0; 8]), 0);
    }

    #[test]
    fn constant_block_all_in_bin_255() {
        let b = Block3D::new(16, 16, 30, vec![80; 16 * 16 * 30]).unwrap();
        let f = lbp_top(&b).unwrap();
        assert_eq!(f.xy_hist[255], 5880);
        assert_eq!(f.xt_hist[255], 6272);
        assert_eq!(f.yt_hist[255], 6272);
        assert_eq!(f.counts().sum::<u32>(), 5880 + 6272 + 6272);
    }

    #[test]
    fn sums_match_interior_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (w, h, d) in [(16, 16, 30), (8, 8, 30), (5, 7, 4), (3, 3, 3)] {
            let b = random_block(&mut rng, w, h, d, 255);
            let f = lbp_top(&b).unwrap();
            let (xy, xt, yt) = interior_counts(w, h, d);
            assert_eq!(f.xy_hist.iter().sum::<u32>() as usize, xy);
            assert_eq!(f.xt_hist.iter().sum::<u32>() as usize, xt);
            assert_eq!(f.yt_hist.iter().sum::<u32>() as usize, yt);
        }
        assert!(lbp_top(&Block3D::new(2, 5, 5, vec![0; 50]).unwrap()).is_err());
    }

    #[test]
    fn single_bright_voxel_touches_nine_xy_codes() {
        let mut data = vec![50u8; 16 * 16 * 30];
        let (cx, cy, ct) = (8, 8, 15);
        data[(ct * 16 + cy) * 16 + cx] = 200;
        let b = Block3D::new(16, 16, 30, data).unwrap();
        let f = lbp_top(&b).unwrap();
        // Oracle: recompute the affected frame's codes by hand.
        let mut expected = [0u32; 256];
        expected[255] = 14 * 14 * 30;
        for y in cy - 1..=cy + 1 {
            for x in cx - 1..=cx + 1 {
                let center = if (x, y) == (cx, cy) { 200 } else { 50 };
                let mut n = [0u8; 8];
                for (i, &(dx, dy)) in NEIGHBOR_OFFSETS.iter().enumerate() {
                    let (nx, ny) = ((x as isize + dx) as usize, (y as isize + dy) as usize);
                    n[i] = if (nx, ny) == (cx, cy) { 200 } else { 50 };
                }
                expected[255] -= 1;
                expected[usize::from(lbp_code(center, n))] += 1;
            }
        }
        assert_eq!(f.xy_hist, expected);
        // Neighbors of the bright voxel keep code 255, its own code is 0.
        assert_eq!(f.xy_hist[0], 1);
        assert_eq!(f.xy_hist[255], 14 * 14 * 30 - 1);
    }

    #[test]
    fn monotone_gray_shift_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let b = random_block(&mut rng, 10, 9, 6, 245);
            let mut shifted = b.clone();
            for v in &mut shifted.data {
                *v += 10;
            }
            assert_eq!(lbp_top(&b).unwrap(), lbp_top(&shifted).unwrap());
        }
    }

    #[test]
    fn transposition_swaps_temporal_planes() {
        // Transposing swaps (dx, dy), which permutes neighbor slots.
        let perm = [0usize, 7, 6, 5, 4, 3, 2, 1];
        let remap = |code: usize| -> usize {
            (0..8).filter(|&i| code & (1 << i) != 0).map(|i| 1 << perm[i]).sum()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let (w, h, d) = (9, 7, 5);
            let b = random_block(&mut rng, w, h, d, 255);
            let mut data = vec![0u8; w * h * d];
            for t in 0..d {
                for y in 0..h {
                    for x in 0..w {
                        data[(t * w + x) * h + y] = b.at(x, y, t);
                    }
                }
            }
            let tb = Block3D::new(h, w, d, data).unwrap();
            let (f, g) = (lbp_top(&b).unwrap(), lbp_top(&tb).unwrap());
            assert_eq!(f.xt_hist, g.yt_hist);
            assert_eq!(f.yt_hist, g.xt_hist);
            let mut mapped = [0u32; 256];
            for (code, &c) in f.xy_hist.iter().enumerate() {
                mapped[remap(code)] += c;
            }
            assert_eq!(mapped, g.xy_hist);
        }
    }

    fn gray_clip(w: usize, h: usize, n: usize) -> Clip {
        Clip::new(vec![Frame::filled_rgb(w, h, [90, 90, 90]).unwrap(); n], "g").unwrap()
    }

    #[test]
    fn partition_counts() {
        let clip = gray_clip(320, 240, 30);
        let win = ClipWindow::new(&clip, 0, 30).unwrap();
        let b16 = partition_blocks(&win, 16).unwrap();
        assert_eq!(b16.len(), 300);
        assert!(b16.iter().all(|b| b.depth == 30));
        assert_eq!(b16[21].grid_pos(), (1, 1));
        assert_eq!(partition_blocks(&win, 8).unwrap().len(), 1200);
        assert!(matches!(
            partition_blocks(&win, 7),
            Err(Error::IndivisibleDimensions { .. })
        ));
    }

    #[test]
    fn selection_threshold_is_strict() {
        let b = Block3D::new(16, 16, 30, vec![0; 7680]).unwrap();
        let masks_with = |count: usize| -> Vec<BinaryMask> {
            let mut left = count;
            (0..30)
                .map(|_| {
                    let take = left.min(256);
                    left -= take;
                    BinaryMask::new(16, 16, (0..256).map(|i| i < take).collect()).unwrap()
                })
                .collect()
        };
        let blocks = [b];
        assert_eq!(select_blocks(&blocks, &masks_with(961), DEFAULT_SALIENT_FRACTION).unwrap().len(), 1);
        assert_eq!(select_blocks(&blocks, &masks_with(960), DEFAULT_SALIENT_FRACTION).unwrap().len(), 0);
        assert_eq!(select_blocks(&blocks, &masks_with(0), DEFAULT_SALIENT_FRACTION).unwrap().len(), 0);
        assert!(select_blocks(&blocks, &masks_with(0)[..29], DEFAULT_SALIENT_FRACTION).is_err());
    }

    #[test]
    fn selection_preserves_order() {
        let clip = gray_clip(64, 32, 4);
        let win = ClipWindow::new(&clip, 0, 4).unwrap();
        let blocks = partition_blocks(&win, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let masks: Vec<BinaryMask> = (0..4)
            .map(|_| BinaryMask::new(64, 32, (0..64 * 32).map(|_| rng.gen_bool(0.15)).collect()).unwrap())
            .collect();
        let kept = select_blocks(&blocks, &masks, DEFAULT_SALIENT_FRACTION).unwrap();
        let mut it = blocks.iter();
        for k in &kept {
            assert!(it.any(|b| b == k));
        }
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let recs: Vec<FeatureRecord> = (0..3)
            .map(|i| FeatureRecord {
                window_start: 15 * i,
                block_col: i,
                block_row: 2,
                label: [Some(BlockLabel::Fire), None, Some(BlockLabel::NonFire)][i],
                feature: lbp_top(&random_block(&mut rng, 6, 6, 5, 255)).unwrap(),
            })
            .collect();
        let mut buf = Vec::new();
        write_features(&mut buf, &recs).unwrap();
        assert_eq!(read_features(buf.as_slice()).unwrap(), recs);

        let text = String::from_utf8(buf).unwrap();
        let truncated = &text[..text.len() - 10];
        assert!(read_features(truncated.as_bytes()).is_err());
        assert!(read_features("a,b\n".as_bytes()).is_err());
    }
}
