//! Acceptance suite. Runs every criterion in order and prints one
//! PASS/FAIL line each; exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use firesal::clipio::{self, Clip, ClipWindow};
use firesal::fraction::Fraction;
use firesal::imaging::{otsu_threshold, BinaryMask, Frame, GrayMap, Histogram256};
use firesal::pipeline::{self, detect_clip, refine_timeline, DetectRequest, PipelineConfig};
use firesal::segmentation::{
    grow_regions, quickshift, quickshift_forest, segment_with_threshold, QuickShiftParams,
};
use firesal::svm::{
    dual_objective, kernel_eval, metrics, train, train_detailed, ConfusionCounts, KernelSpec,
    LabeledVector, TrainParams,
};
use firesal::synth;
use firesal::texture::{lbp_top, partition_blocks, Block3D, BlockLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> std::result::Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

// 1 --------------------------------------------------------------------------

/// Exhaustive between-class variance scan in floating point. Ties keep the
/// smallest level; a histogram with one occupied bin returns that bin.
fn otsu_oracle(counts: &[u64; 256]) -> u8 {
    let total: f64 = counts.iter().map(|&c| c as f64).sum();
    let sum_all: f64 = counts.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let mut best: Option<(f64, usize)> = None;
    for k in 0..256 {
        let n0: f64 = counts[..=k].iter().map(|&c| c as f64).sum();
        let s0: f64 = counts[..=k].iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
        let n1 = total - n0;
        if n0 == 0.0 || n1 == 0.0 {
            continue;
        }
        let (m0, m1) = (s0 / n0, (sum_all - s0) / n1);
        let var = (n0 / total) * (n1 / total) * (m0 - m1) * (m0 - m1);
        if best.is_none_or(|(b, _)| var > b) {
            best = Some((var, k));
        }
    }
    match best {
        Some((_, k)) => k as u8,
        None => counts.iter().position(|&c| c > 0).unwrap() as u8,
    }
}

fn random_histogram(rng: &mut ChaCha8Rng, family: usize) -> [u64; 256] {
    let mut c = [0u64; 256];
    match family {
        0 => c.iter_mut().for_each(|v| *v = rng.gen_range(0..1000)),
        1 => {
            for _ in 0..rng.gen_range(1..6) {
                c[rng.gen_range(0..256)] += rng.gen_range(1..100_000);
            }
        }
        2 => {
            let (a, b) = (rng.gen_range(10.0..120.0), rng.gen_range(130.0..245.0));
            for _ in 0..76_800 {
                let centre = if rng.gen_bool(0.6) { a } else { b };
                let v: f64 = centre + rng.gen_range(-25.0..25.0) * rng.gen::<f64>();
                c[v.round().clamp(0.0, 255.0) as usize] += 1;
            }
        }
        _ => {
            for v in c.iter_mut() {
                if rng.gen_bool(0.1) {
                    *v = rng.gen_range(1..5_000_000);
                }
            }
            if c.iter().all(|&v| v == 0) {
                c[rng.gen_range(0..256)] = 1;
            }
        }
    }
    c
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let hists: Vec<[u64; 256]> = (0..1000).map(|i| random_histogram(&mut rng, i % 4)).collect();
    let start = Instant::now();
    for (i, counts) in hists.iter().enumerate() {
        let got = otsu_threshold(&Histogram256 { counts: *counts }).map_err(|e| e.to_string())?;
        let want = otsu_oracle(counts);
        ensure(got == want, format!("histogram {i}: otsu {got}, oracle {want}"))?;
    }
    let took = within(start, Duration::from_secs(5))?;
    Ok(format!("1000 histograms agree exactly in {took:.2?}"))
}

// 2 --------------------------------------------------------------------------

fn criterion_2() -> Check {
    let m = metrics(&ConfusionCounts::new(6267, 6554, 446, 733)).map_err(|e| e.to_string())?;
    for (name, got, want) in [
        ("sensitivity", m.sensitivity, 0.895),
        ("specificity", m.specificity, 0.936),
        ("accuracy", m.accuracy, 0.916),
        ("error", m.error, 0.084),
    ] {
        ensure((got - want).abs() <= 0.0005, format!("{name} = {got}, want {want}"))?;
    }
    Ok(format!(
        "sens {:.4} spec {:.4} acc {:.4} err {:.4}",
        m.sensitivity, m.specificity, m.accuracy, m.error
    ))
}

// 3 --------------------------------------------------------------------------

fn criterion_3() -> Check {
    let clip = Clip::new(vec![Frame::filled_rgb(320, 240, [90, 60, 30]).unwrap(); 30], "flat")
        .map_err(|e| e.to_string())?;
    let window = ClipWindow::new(&clip, 0, 30).map_err(|e| e.to_string())?;
    let n16 = partition_blocks(&window, 16).map_err(|e| e.to_string())?.len();
    let n8 = partition_blocks(&window, 8).map_err(|e| e.to_string())?.len();
    ensure(n16 == 300, format!("block 16 gave {n16}"))?;
    ensure(n8 == 1200, format!("block 8 gave {n8}"))?;
    Ok("300 blocks of 16, 1200 blocks of 8".into())
}

// 4 --------------------------------------------------------------------------

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..100 {
        let data = (0..16 * 16 * 30).map(|_| rng.gen()).collect();
        let f = lbp_top(&Block3D::new(16, 16, 30, data).unwrap()).map_err(|e| e.to_string())?;
        let sums = [
            f.xy_hist.iter().sum::<u32>(),
            f.xt_hist.iter().sum::<u32>(),
            f.yt_hist.iter().sum::<u32>(),
        ];
        ensure(sums == [5880, 6272, 6272], format!("block {i}: sums {sums:?}"))?;
    }
    for v in [0u8, 77, 255] {
        let f = lbp_top(&Block3D::new(16, 16, 30, vec![v; 16 * 16 * 30]).unwrap())
            .map_err(|e| e.to_string())?;
        for (plane, h, total) in [("xy", &f.xy_hist, 5880), ("xt", &f.xt_hist, 6272), ("yt", &f.yt_hist, 6272)] {
            ensure(h[255] == total, format!("constant {v}: {plane} bin 255 holds {}", h[255]))?;
        }
    }
    Ok("sums 5880/6272/6272 on 100 random blocks; constant blocks all in bin 255".into())
}

// 5 --------------------------------------------------------------------------

/// Solves `a x = b` by Gaussian elimination with partial pivoting; `None`
/// when the matrix is numerically singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Exact maximum of the SVM dual by active-set enumeration: every variable
/// is pinned at 0, pinned at C, or free; the free block is solved from its
/// equality-constrained stationarity system. Some optimum always lies on a
/// face whose system is non-singular.
fn dual_oracle(data: &[LabeledVector], kernel: &KernelSpec, c: f64) -> f64 {
    let n = data.len();
    let y: Vec<f64> = data.iter().map(|d| d.label.as_f64()).collect();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| y[i] * y[j] * kernel_eval(&data[i].features, &data[j].features, kernel).unwrap())
                .collect()
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    for code in 0..3usize.pow(n as u32) {
        let state: Vec<usize> = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        if !free.is_empty() {
            let m = free.len();
            let mut a = vec![vec![0.0; m + 1]; m + 1];
            let mut b = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[r][s] = q[i][j];
                }
                a[r][m] = y[i];
                a[m][r] = y[i];
                b[r] = 1.0 - (0..n).filter(|&j| state[j] == 1).map(|j| q[i][j] * c).sum::<f64>();
            }
            b[m] = -(0..n).filter(|&j| state[j] == 1).map(|j| y[j] * c).sum::<f64>();
            let Some(x) = solve_linear(a, b) else { continue };
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = x[r];
            }
        }
        let feasible = alpha.iter().all(|&a| (-1e-12..=c + 1e-12).contains(&a))
            && alpha.iter().zip(&y).map(|(a, y)| a * y).sum::<f64>().abs() <= 1e-9;
        if feasible {
            best = best.max(dual_objective(data, &alpha, kernel));
        }
    }
    best
}

fn fixture(i: usize) -> (Vec<LabeledVector>, KernelSpec, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(500 + i as u64);
    let n = 2 + i % 5;
    let mut data: Vec<LabeledVector> = (0..n)
        .map(|j| {
            let label = if j % 2 == 0 { BlockLabel::Fire } else { BlockLabel::NonFire };
            let shift = if label == BlockLabel::Fire { 0.7 } else { -0.7 };
            let x = vec![rng.gen_range(-1.5..1.5) + shift, rng.gen_range(-1.5..1.5)];
            LabeledVector::new(x, label)
        })
        .collect();
    if i % 7 == 3 {
        // Overlapping classes.
        let copy = data[0].features.clone();
        data[1].features = copy;
    }
    let kernel = match i % 3 {
        0 => KernelSpec::Linear,
        1 => KernelSpec::polynomial(2),
        _ => KernelSpec::Rbf { sigma: 0.8 },
    };
    let c = [0.5, 1.0, 10.0][i / 3 % 3];
    (data, kernel, c)
}

/// Largest violation of the KKT conditions of the trained dual.
fn kkt_violation(data: &[LabeledVector], alphas: &[f64], bias: f64, kernel: &KernelSpec, c: f64) -> f64 {
    let mut worst: f64 = alphas.iter().zip(data).map(|(a, d)| a * d.label.as_f64()).sum::<f64>().abs();
    for (i, di) in data.iter().enumerate() {
        let f: f64 = data
            .iter()
            .zip(alphas)
            .map(|(dj, a)| a * dj.label.as_f64() * kernel_eval(&dj.features, &di.features, kernel).unwrap())
            .sum::<f64>()
            + bias;
        let margin = di.label.as_f64() * f;
        let a = alphas[i];
        let v = if a <= 1e-12 {
            (1.0 - margin).max(0.0)
        } else if a >= c - 1e-12 {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(v).max((-a).max(a - c));
    }
    worst
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let mut worst_obj: f64 = 0.0;
    let mut worst_kkt: f64 = 0.0;
    for i in 0..20 {
        let (data, kernel, c) = fixture(i);
        let oracle = dual_oracle(&data, &kernel, c);
        let tight = train_detailed(&data, kernel, TrainParams { c, tol: 1e-9, ..Default::default() })
            .map_err(|e| format!("fixture {i}: {e}"))?;
        let obj = dual_objective(&data, &tight.alphas, &kernel);
        let diff = (obj - oracle).abs();
        ensure(diff <= 1e-6, format!("fixture {i}: objective {obj}, oracle {oracle}"))?;
        worst_obj = worst_obj.max(diff);

        let params = TrainParams { c, tol: 1e-3, ..Default::default() };
        let out = train_detailed(&data, kernel, params).map_err(|e| format!("fixture {i}: {e}"))?;
        let v = kkt_violation(&data, &out.alphas, out.model.bias, &kernel, c);
        ensure(v <= 1e-3, format!("fixture {i}: KKT violation {v}"))?;
        worst_kkt = worst_kkt.max(v);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut sep = Vec::new();
    while sep.len() < 200 {
        let (x, y): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let s = 2.0 * x - y + 0.3;
        if s.abs() < 0.2 {
            continue;
        }
        let label = if s > 0.0 { BlockLabel::Fire } else { BlockLabel::NonFire };
        sep.push(LabeledVector::new(vec![x, y], label));
    }
    let model = train(&sep, KernelSpec::Linear, TrainParams { c: 100.0, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let correct = sep
        .iter()
        .filter(|d| firesal::svm::predict(&model, &d.features).unwrap().0 == d.label)
        .count();
    ensure(correct == 200, format!("separable set: {correct}/200 correct"))?;
    let took = within(start, Duration::from_secs(30))?;
    Ok(format!(
        "20 fixtures: max objective gap {worst_obj:.1e}, max KKT violation {worst_kkt:.1e}; 200/200 separable; {took:.2?}"
    ))
}

// 6 --------------------------------------------------------------------------

fn random_map(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayMap {
    let (cx, cy, r) = (rng.gen_range(0.0..w as f64), rng.gen_range(0.0..h as f64), rng.gen_range(5.0..20.0));
    let data = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            let blob = (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * r * r)).exp();
            (0.7 * blob + 0.3 * rng.gen::<f64>()).clamp(0.0, 1.0)
        })
        .collect();
    GrayMap::new(w, h, data).unwrap()
}

fn random_frame(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Frame {
    // Piecewise-flat patches so the superpixels are non-trivial.
    let colors: Vec<[u8; 3]> = (0..4).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
    let (sx, sy) = (rng.gen_range(4..w - 4), rng.gen_range(4..h - 4));
    let mut data = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let c = colors[usize::from(x >= sx) + 2 * usize::from(y >= sy)];
            for ch in c {
                data.push(ch.saturating_add(rng.gen_range(0..12)));
            }
        }
    }
    Frame::new(w, h, 3, data).unwrap()
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (w, h) = (48, 40);
    let gts = [0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0];
    let overlap = Fraction::new(1, 3);
    for i in 0..100 {
        let map = random_map(&mut rng, w, h);
        let masks: Vec<BinaryMask> = gts
            .iter()
            .map(|&gt| segment_with_threshold(&map, gt, 32).unwrap())
            .collect();
        for pair in masks.windows(2) {
            ensure(pair[0].is_subset_of(&pair[1]), format!("map {i}: masks not nested"))?;
        }
        let labels = quickshift(&random_frame(&mut rng, w, h), QuickShiftParams::default())
            .map_err(|e| e.to_string())?;
        for m in &masks {
            let grown = grow_regions(m, &labels, overlap).map_err(|e| e.to_string())?;
            ensure(m.is_subset_of(&grown), format!("map {i}: growth dropped pixels"))?;
            let again = grow_regions(&grown, &labels, overlap).map_err(|e| e.to_string())?;
            ensure(again == grown, format!("map {i}: growth not idempotent"))?;
        }
    }
    Ok("100 maps: nested under rising GT; growth is a superset and idempotent".into())
}

// 7 --------------------------------------------------------------------------

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (w, h) = (32, 32);
    for i in 0..50 {
        let data = (0..w * h * 3).map(|_| rng.gen()).collect();
        let frame = Frame::new(w, h, 3, data).unwrap();
        let f = quickshift_forest(&frame, QuickShiftParams::default()).map_err(|e| e.to_string())?;
        let labels = &f.labels;
        ensure(labels.labels.len() == w * h, format!("image {i}: label count"))?;
        let mut seen = vec![false; labels.segment_count];
        for &l in &labels.labels {
            ensure((l as usize) < labels.segment_count, format!("image {i}: label {l} out of range"))?;
            seen[l as usize] = true;
        }
        ensure(seen.iter().all(|&s| s), format!("image {i}: unused label"))?;
        let root = |mut p: usize| {
            while f.parents[p] != p {
                p = f.parents[p];
            }
            p
        };
        for p in 0..w * h {
            let q = f.parents[p];
            if q != p {
                ensure(f.density[q] > f.density[p], format!("image {i}: parent of {p} not denser"))?;
            }
            ensure(
                labels.labels[p] == labels.labels[root(p)],
                format!("image {i}: pixel {p} labelled apart from its root"),
            )?;
        }
        let roots = (0..w * h).filter(|&p| f.parents[p] == p).count();
        ensure(roots == labels.segment_count, format!("image {i}: {roots} roots, {} labels", labels.segment_count))?;
    }
    let halves: Vec<u8> = (0..32 * 32)
        .flat_map(|i| if i % 32 < 16 { [0u8; 3] } else { [255u8; 3] })
        .collect();
    let two = quickshift(&Frame::new(32, 32, 3, halves).unwrap(), QuickShiftParams::default())
        .map_err(|e| e.to_string())?;
    ensure(two.segment_count == 2, format!("halves image gave {} segments", two.segment_count))?;
    Ok("50 random images partitioned with denser parents; halves image gives 2 segments".into())
}

// 8 --------------------------------------------------------------------------

fn criterion_8() -> Check {
    let start = Instant::now();
    let data = synth::training_blocks(200, 8).map_err(|e| e.to_string())?;
    let model = train(&data, KernelSpec::polynomial(2), TrainParams { c: 1.0, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let cfg = PipelineConfig::default();
    let flagged = |clip: &Clip| -> std::result::Result<(usize, usize), String> {
        let recs = detect_clip(clip, &model, &cfg).map_err(|e| e.to_string())?;
        Ok((recs.iter().filter(|r| r.refined_fire).count(), recs.len()))
    };
    let (flame, _) = synth::flame_clip(45, 80_001).map_err(|e| e.to_string())?;
    let (fire_hits, fire_n) = flagged(&flame)?;
    let (gray_hits, gray_n) = flagged(&synth::gray_noise_clip(45, 80_002).map_err(|e| e.to_string())?)?;
    let (rect, _) = synth::orange_rectangle_clip(45, 80_003).map_err(|e| e.to_string())?;
    let (rect_hits, rect_n) = flagged(&rect)?;
    ensure(
        fire_hits * 10 >= fire_n * 9,
        format!("flame clip: {fire_hits}/{fire_n} frames flagged"),
    )?;
    ensure(gray_hits == 0, format!("gray clip: {gray_hits}/{gray_n} frames flagged"))?;
    ensure(rect_hits == 0, format!("rectangle clip: {rect_hits}/{rect_n} frames flagged"))?;
    let took = within(start, Duration::from_secs(120))?;
    Ok(format!(
        "flame {fire_hits}/{fire_n}, gray {gray_hits}/{gray_n}, rectangle {rect_hits}/{rect_n} in {took:.1?}"
    ))
}

// 9 --------------------------------------------------------------------------

fn criterion_9() -> Check {
    for (len, k) in [(200, 100), (200, 0), (40, 30), (16, 0), (120, 104)] {
        let mut raw = vec![false; len];
        raw[k] = true;
        let refined = refine_timeline(&raw, 15);
        let on: Vec<usize> = (0..len).filter(|&t| refined[t]).collect();
        let want: Vec<usize> = (k..=(k + 15).min(len - 1)).collect();
        ensure(on == want, format!("k = {k} of {len}: refined {on:?}"))?;
    }
    Ok("isolated positive at k latches exactly k..k+15".into())
}

// 10 -------------------------------------------------------------------------

fn criterion_10() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let frames = dir.path().join("frames");
    let (clip, _) = synth::flame_clip(30, 10).map_err(|e| e.to_string())?;
    clipio::save_frame_sequence(&frames, &clip).map_err(|e| e.to_string())?;
    let model = train(
        &synth::training_blocks(30, 10).map_err(|e| e.to_string())?,
        KernelSpec::polynomial(2),
        TrainParams::default(),
    )
    .map_err(|e| e.to_string())?;
    let cfg = PipelineConfig::default();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("results_{run}.jsonl"));
        pipeline::run_detect(&DetectRequest {
            frames_dir: &frames,
            pattern: "*.ppm",
            model: &model,
            config: &cfg,
            out: &out,
            overlay_dir: None,
        })
        .map_err(|e| e.to_string())?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(!outputs[0].is_empty(), "empty results")?;
    ensure(outputs[0] == outputs[1], "results differ between runs")?;
    Ok(format!("two runs byte-identical ({} bytes)", outputs[0].len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("otsu oracle equivalence", criterion_1),
        ("metric reproduction", criterion_2),
        ("block-count contract", criterion_3),
        ("lbp-top counting contract", criterion_4),
        ("smo correctness", criterion_5),
        ("segmentation monotonicity", criterion_6),
        ("quick-shift structure", criterion_7),
        ("end-to-end synthetic discrimination", criterion_8),
        ("persistence rule", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
