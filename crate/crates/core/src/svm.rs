//! Binary kernel SVM: SMO training, prediction, k-fold cross-validation and
//! the sensitivity / specificity / accuracy / error report.
//!
//! Training minimizes the soft-margin dual
//! `½ αᵀQα − Σα` subject to `0 ≤ α ≤ C`, `Σ yα = 0`, with
//! `Q_ij = y_i y_j K(x_i, x_j)`. Each step updates the maximal violating
//! pair: the index in the up-set with the largest `−y_t G_t` and the index
//! in the low-set with the smallest, i.e. the pair with the widest error
//! gap. Training stops once that gap drops below `tol`.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::texture::BlockLabel;

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MODEL_MAGIC: &str = "firesal-svm";
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
const MIN_CURVATURE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelSpec {
    Linear,
    Polynomial { degree: u32, coef0: f64 },
    Rbf { sigma: f64 },
}

impl KernelSpec {
    pub fn polynomial(degree: u32) -> Self {
        Self::Polynomial { degree, coef0: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Polynomial { degree, coef0 } if degree == 0 || !coef0.is_finite() => Err(
                Error::InvalidParameter(format!("polynomial degree {degree}, coef0 {coef0}")),
            ),
            Self::Rbf { sigma } if !(sigma > 0.0) || !sigma.is_finite() => {
                Err(Error::InvalidParameter(format!("rbf sigma {sigma}")))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    fn apply(&self, u: &[f64], v: &[f64]) -> f64 {
        match *self {
            Self::Linear => dot(u, v),
            Self::Polynomial { degree, coef0 } => (dot(u, v) + coef0).powi(degree as i32),
            Self::Rbf { sigma } => {
                let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

/// Short names: `linear`, `poly<d>` (coef0 = 1), `rbf<sigma>`.
impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown kernel {s:?}"));
        let spec = if s == "linear" {
            Self::Linear
        } else if let Some(d) = s.strip_prefix("poly") {
            Self::polynomial(d.parse().map_err(|_| bad())?)
        } else if let Some(sig) = s.strip_prefix("rbf") {
            Self::Rbf {
                sigma: sig.parse().map_err(|_| bad())?,
            }
        } else {
            return Err(bad());
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear => write!(f, "linear"),
            Self::Polynomial { degree, coef0 } => write!(f, "poly {degree} {coef0}"),
            Self::Rbf { sigma } => write!(f, "rbf {sigma}"),
        }
    }
}

#[inline]
fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn kernel_eval(u: &[f64], v: &[f64], k: &KernelSpec) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: (u.len(), 1),
            found: (v.len(), 1),
        });
    }
    Ok(k.apply(u, v))
}

/// Symmetric Gram matrix, row-major.
pub fn kernel_matrix(xs: &[Vec<f64>], k: &KernelSpec) -> Vec<f64> {
    let n = xs.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| if j < i { 0.0 } else { k.apply(&xs[i], &xs[j]) }).collect())
        .collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            m[i * n + j] = rows[i][j];
            m[j * n + i] = rows[i][j];
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledVector {
    pub features: Vec<f64>,
    pub label: BlockLabel,
}

impl LabeledVector {
    pub fn new(features: Vec<f64>, label: BlockLabel) -> Self {
        Self { features, label }
    }
}

/// Per-feature min-max scaler onto `[0, 1]`; constant features map to 0.
#[derive(Clone, Debug, PartialEq)]
pub struct MinMaxScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(xs: &[&[f64]]) -> Self {
        let dim = xs.first().map_or(0, |x| x.len());
        let mut mins = vec![f64::INFINITY; dim];
        let mut maxs = vec![f64::NEG_INFINITY; dim];
        for x in xs {
            for (d, &v) in x.iter().enumerate() {
                mins[d] = mins[d].min(v);
                maxs[d] = maxs[d].max(v);
            }
        }
        Self { mins, maxs }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mins.iter().zip(&self.maxs))
            .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainParams {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Fit a min-max scaler on the training data and store it in the model.
    pub scale: bool,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            max_iter: DEFAULT_MAX_ITER,
            scale: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvmModel {
    pub kernel: KernelSpec,
    pub c: f64,
    pub scaler: Option<MinMaxScaler>,
    /// Stored in scaled space when a scaler is present.
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i · y_i` for each support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: (self.dim(), 1),
                found: (x.len(), 1),
            });
        }
        let scaled;
        let x = match &self.scaler {
            Some(s) => {
                scaled = s.transform(x);
                scaled.as_slice()
            }
            None => x,
        };
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, &a)| a * self.kernel.apply(sv, x))
            .sum::<f64>()
            + self.bias)
    }
}

/// Decision score and sign label; a zero score counts as fire.
pub fn predict(model: &SvmModel, x: &[f64]) -> Result<(BlockLabel, f64)> {
    let score = model.decision(x)?;
    let label = if score >= 0.0 {
        BlockLabel::Fire
    } else {
        BlockLabel::NonFire
    };
    Ok((label, score))
}

/// Everything SMO produced, including the full dual vector.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: SvmModel,
    pub alphas: Vec<f64>,
    pub iterations: usize,
    /// Final maximal KKT violation.
    pub gap: f64,
    /// Dual objective `Σα − ½ αᵀQα` (to be maximized).
    pub objective: f64,
}

pub fn train(data: &[LabeledVector], kernel: KernelSpec, params: TrainParams) -> Result<SvmModel> {
    Ok(train_detailed(data, kernel, params)?.model)
}

pub fn train_detailed(
    data: &[LabeledVector],
    kernel: KernelSpec,
    params: TrainParams,
) -> Result<TrainOutcome> {
    kernel.validate()?;
    if !(params.c > 0.0) || !(params.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "C = {} and tol = {} must be positive",
            params.c, params.tol
        )));
    }
    let dim = data.first().map_or(0, |d| d.features.len());
    if data.iter().any(|d| d.features.len() != dim) {
        return Err(Error::InvalidDimensions(
            "training vectors differ in length".into(),
        ));
    }
    let has = |l| data.iter().any(|d| d.label == l);
    if !has(BlockLabel::Fire) || !has(BlockLabel::NonFire) {
        return Err(Error::SingleClass);
    }

    let scaler = params
        .scale
        .then(|| MinMaxScaler::fit(&data.iter().map(|d| d.features.as_slice()).collect::<Vec<_>>()));
    let xs: Vec<Vec<f64>> = data
        .iter()
        .map(|d| match &scaler {
            Some(s) => s.transform(&d.features),
            None => d.features.clone(),
        })
        .collect();
    let y: Vec<f64> = data.iter().map(|d| d.label.as_f64()).collect();
    let gram = kernel_matrix(&xs, &kernel);

    let solution = solve_dual(&gram, &y, params.c, params.tol, params.max_iter)?;

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for (i, &a) in solution.alphas.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(xs[i].clone());
            dual_coefs.push(a * y[i]);
        }
    }
    Ok(TrainOutcome {
        model: SvmModel {
            kernel,
            c: params.c,
            scaler,
            support_vectors,
            dual_coefs,
            bias: solution.bias,
        },
        alphas: solution.alphas,
        iterations: solution.iterations,
        gap: solution.gap,
        objective: solution.objective,
    })
}

struct DualSolution {
    alphas: Vec<f64>,
    bias: f64,
    iterations: usize,
    gap: f64,
    objective: f64,
}

fn solve_dual(gram: &[f64], y: &[f64], c: f64, tol: f64, max_iter: usize) -> Result<DualSolution> {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * gram[i * n + j];
    let mut alpha = vec![0.0; n];
    // Gradient of ½αᵀQα − Σα.
    let mut grad = vec![-1.0; n];

    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    let gap = loop {
        let mut i = usize::MAX;
        let mut j = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > g_max {
                g_max = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < g_min {
                g_min = v;
                j = t;
            }
        }
        let gap = g_max - g_min;
        if i == usize::MAX || j == usize::MAX || gap < tol {
            break gap.max(0.0);
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence { iterations, gap });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(MIN_CURVATURE);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(MIN_CURVATURE);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        if di != 0.0 || dj != 0.0 {
            for (t, g) in grad.iter_mut().enumerate() {
                *g += q(i, t) * di + q(j, t) * dj;
            }
        }
    };

    // Bias: mean of −y_t G_t over free vectors, else midpoint of the
    // feasible interval.
    let mut free_sum = 0.0;
    let mut free_n = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += yg;
            free_n += 1;
        } else if (alpha[t] >= c && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if free_n > 0 {
        free_sum / free_n as f64
    } else {
        (ub + lb) / 2.0
    };

    let objective = alpha.iter().sum::<f64>()
        - 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g + 1.0)).sum::<f64>();
    Ok(DualSolution {
        alphas: alpha,
        bias: -rho,
        iterations,
        gap,
        objective,
    })
}

/// Dual objective `Σα − ½ Σ α_i α_j y_i y_j K_ij` of an arbitrary dual vector.
pub fn dual_objective(data: &[LabeledVector], alphas: &[f64], kernel: &KernelSpec) -> f64 {
    let mut quad = 0.0;
    for (i, a) in data.iter().enumerate() {
        for (j, b) in data.iter().enumerate() {
            quad += alphas[i]
                * alphas[j]
                * a.label.as_f64()
                * b.label.as_f64()
                * kernel.apply(&a.features, &b.features);
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    pub fn record(&mut self, truth: BlockLabel, predicted: BlockLabel) {
        match (truth, predicted) {
            (BlockLabel::Fire, BlockLabel::Fire) => self.tp += 1,
            (BlockLabel::NonFire, BlockLabel::NonFire) => self.tn += 1,
            (BlockLabel::NonFire, BlockLabel::Fire) => self.fp += 1,
            (BlockLabel::Fire, BlockLabel::NonFire) => self.fn_ += 1,
        }
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.tn += other.tn;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub sensitivity: f64,
    pub specificity: f64,
    pub accuracy: f64,
    pub error: f64,
}

pub fn metrics(c: &ConfusionCounts) -> Result<MetricReport> {
    if c.tp + c.fn_ == 0 {
        return Err(Error::UndefinedMetric("sensitivity without positive samples"));
    }
    if c.tn + c.fp == 0 {
        return Err(Error::UndefinedMetric("specificity without negative samples"));
    }
    let accuracy = (c.tp + c.tn) as f64 / c.total() as f64;
    Ok(MetricReport {
        sensitivity: c.tp as f64 / (c.tp + c.fn_) as f64,
        specificity: c.tn as f64 / (c.tn + c.fp) as f64,
        accuracy,
        error: 1.0 - accuracy,
    })
}

#[derive(Clone, Debug)]
pub struct CvOutcome {
    /// Held-out sample indices of each fold.
    pub folds: Vec<Vec<usize>>,
    pub confusion: ConfusionCounts,
    pub report: MetricReport,
}

/// Stratified fold assignment: each class is shuffled with `seed` and dealt
/// round-robin, continuing the deal across classes, so fold sizes differ by
/// at most one and so do per-fold class counts.
pub fn stratified_folds(labels: &[BlockLabel], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {k}; need at least 2 folds")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut slot = 0;
    for class in [BlockLabel::Fire, BlockLabel::NonFire] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < k {
            return Err(Error::ClassTooSmall {
                label: class.value(),
                count: idx.len(),
                folds: k,
            });
        }
        idx.shuffle(&mut rng);
        for i in idx {
            folds[slot % k].push(i);
            slot += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

pub fn kfold_cv(
    data: &[LabeledVector],
    k: usize,
    kernel: KernelSpec,
    params: TrainParams,
    seed: u64,
) -> Result<CvOutcome> {
    let labels: Vec<BlockLabel> = data.iter().map(|d| d.label).collect();
    let folds = stratified_folds(&labels, k, seed)?;
    let per_fold = folds
        .par_iter()
        .map(|held| -> Result<ConfusionCounts> {
            let mut is_held = vec![false; data.len()];
            for &i in held {
                is_held[i] = true;
            }
            let train_set: Vec<LabeledVector> = data
                .iter()
                .zip(&is_held)
                .filter(|(_, &h)| !h)
                .map(|(d, _)| d.clone())
                .collect();
            let model = train(&train_set, kernel, params)?;
            let mut counts = ConfusionCounts::default();
            for &i in held {
                let (pred, _) = predict(&model, &data[i].features)?;
                counts.record(data[i].label, pred);
            }
            Ok(counts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut confusion = ConfusionCounts::default();
    for c in &per_fold {
        confusion.merge(c);
    }
    Ok(CvOutcome {
        folds,
        confusion,
        report: metrics(&confusion)?,
    })
}

// ---------------------------------------------------------------------------
// Model file

fn join_floats(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn write_model<W: Write>(mut out: W, model: &SvmModel) -> Result<()> {
    writeln!(out, "{MODEL_MAGIC} {MODEL_FORMAT_VERSION}")?;
    writeln!(out, "kernel {}", model.kernel)?;
    writeln!(out, "c {}", model.c)?;
    writeln!(out, "dim {}", model.dim())?;
    match &model.scaler {
        None => writeln!(out, "scaler none")?,
        Some(s) => {
            writeln!(out, "scaler minmax")?;
            writeln!(out, "scale_min {}", join_floats(&s.mins))?;
            writeln!(out, "scale_max {}", join_floats(&s.maxs))?;
        }
    }
    writeln!(out, "support_vectors {}", model.support_vectors.len())?;
    for (sv, coef) in model.support_vectors.iter().zip(&model.dual_coefs) {
        writeln!(out, "{coef} {}", join_floats(sv))?;
    }
    writeln!(out, "bias {}", model.bias)?;
    Ok(())
}

pub fn read_model<R: BufRead>(input: R) -> Result<SvmModel> {
    let mut lines = input.lines();
    let mut next = |what: &str| -> Result<String> {
        match lines.next() {
            Some(l) => Ok(l?),
            None => Err(Error::MalformedModel(format!("missing {what}"))),
        }
    };
    let bad = |msg: String| Error::MalformedModel(msg);
    let float = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| Error::MalformedModel(format!("bad number {s:?}")))
    };
    let keyed = |line: &str, key: &str| -> Result<String> {
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| Error::MalformedModel(format!("expected {key:?}, found {line:?}")))
    };

    let header = next("header")?;
    let version = keyed(&header, MODEL_MAGIC)?
        .trim()
        .parse::<u32>()
        .map_err(|_| bad(format!("bad version in {header:?}")))?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            supported: MODEL_FORMAT_VERSION,
        });
    }

    let kernel_line = keyed(&next("kernel")?, "kernel")?;
    let parts: Vec<&str> = kernel_line.split_whitespace().collect();
    let kernel = match parts.as_slice() {
        ["linear"] => KernelSpec::Linear,
        ["poly", d, c0] => KernelSpec::Polynomial {
            degree: d.parse().map_err(|_| bad(format!("bad degree {d:?}")))?,
            coef0: float(c0)?,
        },
        ["rbf", s] => KernelSpec::Rbf { sigma: float(s)? },
        _ => return Err(bad(format!("bad kernel {kernel_line:?}"))),
    };
    kernel
        .validate()
        .map_err(|e| bad(format!("invalid kernel: {e}")))?;
    let c = float(keyed(&next("c")?, "c")?.trim())?;
    let dim: usize = keyed(&next("dim")?, "dim")?
        .trim()
        .parse()
        .map_err(|_| bad("bad dim".into()))?;
    let floats_of = |s: &str| -> Result<Vec<f64>> {
        let v = s.split_whitespace().map(float).collect::<Result<Vec<_>>>()?;
        if v.len() != dim {
            return Err(Error::MalformedModel(format!(
                "expected {dim} values, found {}",
                v.len()
            )));
        }
        Ok(v)
    };
    let scaler = match keyed(&next("scaler")?, "scaler")?.trim() {
        "none" => None,
        "minmax" => {
            let mins = floats_of(&keyed(&next("scale_min")?, "scale_min")?)?;
            let maxs = floats_of(&keyed(&next("scale_max")?, "scale_max")?)?;
            Some(MinMaxScaler { mins, maxs })
        }
        other => return Err(bad(format!("unknown scaler {other:?}"))),
    };
    let count: usize = keyed(&next("support_vectors")?, "support_vectors")?
        .trim()
        .parse()
        .map_err(|_| bad("bad support vector count".into()))?;
    if count == 0 {
        return Err(bad("model has no support vectors".into()));
    }
    let mut support_vectors = Vec::with_capacity(count);
    let mut dual_coefs = Vec::with_capacity(count);
    for i in 0..count {
        let line = next(&format!("support vector {i}"))?;
        let (coef, rest) = line
            .split_once(' ')
            .ok_or_else(|| bad(format!("support vector {i} is empty")))?;
        dual_coefs.push(float(coef)?);
        support_vectors.push(floats_of(rest)?);
    }
    let bias = float(keyed(&next("bias")?, "bias")?.trim())?;
    Ok(SvmModel {
        kernel,
        c,
        scaler,
        support_vectors,
        dual_coefs,
        bias,
    })
}

pub fn save_model(path: &std::path::Path, model: &SvmModel) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_model(&mut w, model)?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &std::path::Path) -> Result<SvmModel> {
    let f = std::fs::File::open(path)?;
    read_model(std::io::BufReader::new(f))
}
