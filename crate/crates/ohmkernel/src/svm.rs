//! Soft-margin SVM on precomputed kernel matrices, and the repeated-split
//! benchmark protocol.
//!
//! Training runs SMO-style coordinate ascent on the dual with a cached
//! decision function, Platt's working-pair heuristics, and a seeded fallback
//! pair choice, so a fixed seed gives a fixed model. [`run_protocol`] wraps
//! it in the evaluation loop used for the accuracy tables: 10 seeded
//! stratified 80/20 splits, shared across every C in the grid, best C picked
//! by mean test accuracy.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

use crate::kernel::{self, FeatureMode, GramMatrix, KernelError};
use crate::rng::{self, Domain};
use crate::tudata::Dataset;

/// Regularization grid of the benchmark protocol. 10^1 is deliberately
/// absent; override via [`ProtocolConfig::c_grid`] to add it.
pub const DEFAULT_C_GRID: [f64; 6] = [1e-3, 1e-2, 1e-1, 1.0, 1e2, 1e3];

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_PASSES: usize = 10;
pub const DEFAULT_SPLITS: usize = 10;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

/// Hard cap on optimization passes; unreachable in practice, guards against
/// cycling on degenerate kernels.
const PASS_SAFETY_CAP: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum SvmError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("Gram dimension {gram} does not match label count {labels}")]
    SizeMismatch { gram: usize, labels: usize },
    #[error("label {value} is not in {{-1, +1}}")]
    BadLabel { value: i32 },
    #[error("C must be a positive finite number, got {c}")]
    InvalidC { c: f64 },
    #[error("kernel row has {got} entries for {expected} training graphs")]
    RowLength { expected: usize, got: usize },
    #[error("dataset has {distinct} distinct labels, need exactly 2")]
    NonBinaryLabels { distinct: usize },
    #[error("protocol needs at least 10 graphs, got {n}")]
    TooFewGraphs { n: usize },
    #[error("split {split} left the training set single-class")]
    DegenerateSplit { split: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Trained soft-margin SVM over a fixed training kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    alpha: Vec<f64>,
    /// alpha_i * y_i, the predict-time weights.
    coef: Vec<f64>,
    b: f64,
    support: Vec<usize>,
    c: f64,
}

impl SvmModel {
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn bias(&self) -> f64 {
        self.b
    }

    /// Training indices with alpha > 0.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn training_size(&self) -> usize {
        self.alpha.len()
    }

    /// sum_i alpha_i y_i k_row[i] + b for one test point's kernel row
    /// against the training set.
    pub fn decision_value(&self, k_row: &[f64]) -> Result<f64, SvmError> {
        if k_row.len() != self.coef.len() {
            return Err(SvmError::RowLength {
                expected: self.coef.len(),
                got: k_row.len(),
            });
        }
        let sum: f64 = self.coef.iter().zip(k_row).map(|(&w, &k)| w * k).sum();
        Ok(sum + self.b)
    }

    /// Predicted label; an exact zero decision value resolves to +1.
    pub fn predict(&self, k_row: &[f64]) -> Result<i32, SvmError> {
        Ok(if self.decision_value(k_row)? >= 0.0 { 1 } else { -1 })
    }
}

/// Train by SMO on the dual: examine KKT violators, pair each with the
/// max-|E1 - E2| partner (falling back to seeded scans), and ascend until a
/// full pass finds no violation or `max_passes` consecutive passes make no
/// progress.
pub fn train(
    k: &GramMatrix,
    y: &[i32],
    c: f64,
    tol: f64,
    max_passes: usize,
    seed: u64,
) -> Result<SvmModel, SvmError> {
    let n = y.len();
    if k.dim() != n {
        return Err(SvmError::SizeMismatch { gram: k.dim(), labels: n });
    }
    if let Some(&bad) = y.iter().find(|&&l| l != 1 && l != -1) {
        return Err(SvmError::BadLabel { value: bad });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(SvmError::InvalidC { c });
    }
    if y.iter().all(|&l| l == y[0]) {
        return Err(SvmError::SingleClass);
    }

    let mut smo = Smo {
        k,
        y: y.iter().map(|&l| l as f64).collect(),
        c,
        tol: tol.max(1e-12),
        alpha: vec![0.0; n],
        b: 0.0,
        u: vec![0.0; n],
        rng: rng::seeded(seed),
    };
    smo.optimize(max_passes.max(1));

    let support: Vec<usize> = (0..n).filter(|&i| smo.alpha[i] > 0.0).collect();
    let coef = smo.alpha.iter().zip(&smo.y).map(|(&a, &yi)| a * yi).collect();
    Ok(SvmModel {
        alpha: smo.alpha,
        coef,
        b: smo.b,
        support,
        c,
    })
}

struct Smo<'a> {
    k: &'a GramMatrix,
    y: Vec<f64>,
    c: f64,
    tol: f64,
    alpha: Vec<f64>,
    b: f64,
    /// Cached sum_j alpha_j y_j K_ij, kept current after every step.
    u: Vec<f64>,
    rng: rand_chacha::ChaCha8Rng,
}

impl Smo<'_> {
    const STEP_EPS: f64 = 1e-12;

    fn error(&self, i: usize) -> f64 {
        self.u[i] + self.b - self.y[i]
    }

    fn non_bound(&self, i: usize) -> bool {
        self.alpha[i] > 0.0 && self.alpha[i] < self.c
    }

    fn optimize(&mut self, max_passes: usize) {
        let n = self.y.len();
        let mut examine_all = true;
        let mut stalled = 0usize;
        for _ in 0..PASS_SAFETY_CAP {
            let mut changed = 0usize;
            for i in 0..n {
                if (examine_all || self.non_bound(i)) && self.examine(i) {
                    changed += 1;
                }
            }
            if changed == 0 {
                stalled += 1;
                if examine_all || stalled >= max_passes {
                    break;
                }
                examine_all = true;
            } else {
                stalled = 0;
                examine_all = false;
            }
        }
    }

    fn examine(&mut self, i2: usize) -> bool {
        let n = self.y.len();
        let e2 = self.error(i2);
        let r2 = e2 * self.y[i2];
        let violates = (r2 < -self.tol && self.alpha[i2] < self.c)
            || (r2 > self.tol && self.alpha[i2] > 0.0);
        if !violates {
            return false;
        }

        // Best partner: largest |E1 - E2| among non-bound points.
        let mut best: Option<(usize, f64)> = None;
        for i1 in 0..n {
            if i1 != i2 && self.non_bound(i1) {
                let gap = (self.error(i1) - e2).abs();
                if best.map_or(true, |(_, g)| gap > g) {
                    best = Some((i1, gap));
                }
            }
        }
        if let Some((i1, _)) = best {
            if self.take_step(i1, i2) {
                return true;
            }
        }

        // Fallbacks: non-bound then all, from a seeded offset.
        for pass in 0..2 {
            let start = self.rng.gen_range(0..n);
            for off in 0..n {
                let i1 = (start + off) % n;
                if i1 == i2 || (pass == 0 && !self.non_bound(i1)) {
                    continue;
                }
                if self.take_step(i1, i2) {
                    return true;
                }
            }
        }
        false
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let s = y1 * y2;
        let (e1, e2) = (self.error(i1), self.error(i2));
        let (lo, hi) = if s < 0.0 {
            ((a2 - a1).max(0.0), (self.c + a2 - a1).min(self.c))
        } else {
            ((a1 + a2 - self.c).max(0.0), (a1 + a2).min(self.c))
        };
        if lo >= hi {
            return false;
        }
        let k11 = self.k.get(i1, i1);
        let k22 = self.k.get(i2, i2);
        let k12 = self.k.get(i1, i2);
        let eta = k11 + k22 - 2.0 * k12;
        let a2_new = if eta > 0.0 {
            (a2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // Flat direction: evaluate the objective at both clip bounds.
            let f1 = y1 * (e1 + self.b) - a1 * k11 - s * a2 * k12;
            let f2 = y2 * (e2 + self.b) - s * a1 * k12 - a2 * k22;
            let l1 = a1 + s * (a2 - lo);
            let h1 = a1 + s * (a2 - hi);
            let psi_lo = l1 * f1 + lo * f2
                + 0.5 * l1 * l1 * k11
                + 0.5 * lo * lo * k22
                + s * lo * l1 * k12;
            let psi_hi = h1 * f1 + hi * f2
                + 0.5 * h1 * h1 * k11
                + 0.5 * hi * hi * k22
                + s * hi * h1 * k12;
            if psi_lo < psi_hi - Self::STEP_EPS {
                lo
            } else if psi_hi < psi_lo - Self::STEP_EPS {
                hi
            } else {
                return false;
            }
        };
        if (a2_new - a2).abs() < Self::STEP_EPS * (a2_new + a2 + Self::STEP_EPS) {
            return false;
        }
        let a1_new = (a1 + s * (a2 - a2_new)).clamp(0.0, self.c);

        let d1 = y1 * (a1_new - a1);
        let d2 = y2 * (a2_new - a2);
        let b1 = self.b - e1 - d1 * k11 - d2 * k12;
        let b2 = self.b - e2 - d1 * k12 - d2 * k22;
        self.b = if a1_new > 0.0 && a1_new < self.c {
            b1
        } else if a2_new > 0.0 && a2_new < self.c {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        for i in 0..self.y.len() {
            self.u[i] += d1 * self.k.get(i1, i) + d2 * self.k.get(i2, i);
        }
        self.alpha[i1] = a1_new;
        self.alpha[i2] = a2_new;
        true
    }
}

/// One row of the accuracy grid: per-split test accuracies (percent) for a
/// single C, with their mean and population standard deviation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridRow {
    #[serde(rename = "C")]
    pub c: f64,
    pub mean: f64,
    pub std: f64,
    pub splits: Vec<f64>,
}

/// Wall-clock stage timings in milliseconds. Excluded from the
/// deterministic serialization.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Timings {
    pub features_ms: u64,
    pub gram_ms: u64,
    pub train_eval_ms: u64,
}

/// Full benchmark outcome for one dataset and mode.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BenchmarkReport {
    pub dataset: String,
    pub mode: FeatureMode,
    pub gamma: f64,
    pub seed: u64,
    pub grid: Vec<GridRow>,
    /// Grid row with the highest mean accuracy; ties go to the smallest C.
    pub best: GridRow,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// JSON with the timing field stripped: byte-identical across runs with
    /// equal inputs and master seed.
    pub fn deterministic_json(&self) -> String {
        let mut copy = self.clone();
        copy.timings = None;
        serde_json::to_string_pretty(&copy).expect("report serialization cannot fail")
    }
}

/// Protocol knobs; the default reproduces the benchmark tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub c_grid: Vec<f64>,
    pub splits: usize,
    pub train_fraction: f64,
    pub tol: f64,
    pub max_passes: usize,
    /// Per-class 80/20 splitting; switching it off risks single-class
    /// training sets on imbalanced data.
    pub stratified: bool,
    /// Record wall-clock stage timings in the report.
    pub timings: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            c_grid: DEFAULT_C_GRID.to_vec(),
            splits: DEFAULT_SPLITS,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            tol: DEFAULT_TOL,
            max_passes: DEFAULT_MAX_PASSES,
            stratified: true,
            timings: true,
        }
    }
}

/// Seeded train/test index splits, shared across the whole C grid.
///
/// Stratified: each class keeps max(1, floor(fraction * class size))
/// training members, so the total training size is floor(fraction * N)
/// within +-1 per class rounding. Unstratified: one shuffle of all indices
/// with a floor(fraction * N) cut.
pub fn make_splits(
    labels: &[i32],
    cfg: &ProtocolConfig,
    master_seed: u64,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    let base = rng::domain_seed(master_seed, Domain::Splits);
    (0..cfg.splits)
        .map(|s| {
            let mut rng = rng::seeded(rng::derive_seed(base, s as u64));
            let mut train = Vec::new();
            let mut test = Vec::new();
            if cfg.stratified {
                let mut classes: Vec<i32> = labels.to_vec();
                classes.sort_unstable();
                classes.dedup();
                for class in classes {
                    let mut idx: Vec<usize> = (0..labels.len())
                        .filter(|&i| labels[i] == class)
                        .collect();
                    idx.shuffle(&mut rng);
                    let cut = ((cfg.train_fraction * idx.len() as f64).floor() as usize)
                        .clamp(1, idx.len());
                    train.extend_from_slice(&idx[..cut]);
                    test.extend_from_slice(&idx[cut..]);
                }
            } else {
                let mut idx: Vec<usize> = (0..labels.len()).collect();
                idx.shuffle(&mut rng);
                let cut = ((cfg.train_fraction * idx.len() as f64).floor() as usize)
                    .clamp(1, idx.len());
                train.extend_from_slice(&idx[..cut]);
                test.extend_from_slice(&idx[cut..]);
            }
            train.sort_unstable();
            test.sort_unstable();
            (train, test)
        })
        .collect()
}

/// Run the benchmark protocol with default configuration.
pub fn run_protocol(
    ds: &Dataset,
    mode: FeatureMode,
    gamma: f64,
    master_seed: u64,
) -> Result<BenchmarkReport, SvmError> {
    run_protocol_with(ds, mode, gamma, master_seed, &ProtocolConfig::default())
}

/// Full protocol: features once, Gram once, then per split and per C a
/// train/evaluate round on the restricted matrices.
pub fn run_protocol_with(
    ds: &Dataset,
    mode: FeatureMode,
    gamma: f64,
    master_seed: u64,
    cfg: &ProtocolConfig,
) -> Result<BenchmarkReport, SvmError> {
    if ds.len() < 10 {
        return Err(SvmError::TooFewGraphs { n: ds.len() });
    }
    let classes = ds.label_set();
    if classes.len() != 2 {
        return Err(SvmError::NonBinaryLabels { distinct: classes.len() });
    }
    let labels: Vec<i32> = ds
        .labels()
        .iter()
        .map(|&l| if l == classes[0] { -1 } else { 1 })
        .collect();

    let t0 = Instant::now();
    let features = kernel::extract_features(ds.graphs(), mode, master_seed)?;
    let features_ms = t0.elapsed().as_millis() as u64;

    let t1 = Instant::now();
    let g = kernel::gram(&features, gamma);
    let gram_ms = t1.elapsed().as_millis() as u64;

    let t2 = Instant::now();
    let splits = make_splits(&labels, cfg, master_seed);
    let solver_base = rng::domain_seed(master_seed, Domain::Solver);
    let grid_len = cfg.c_grid.len();

    // One job per (C, split); seeds pre-derived so scheduling cannot matter.
    let jobs: Vec<(usize, usize)> = (0..grid_len)
        .flat_map(|ci| (0..cfg.splits).map(move |s| (ci, s)))
        .collect();
    let results: Result<Vec<f64>, SvmError> = jobs
        .par_iter()
        .map(|&(ci, s)| {
            let (train_idx, test_idx) = &splits[s];
            let y_train: Vec<i32> = train_idx.iter().map(|&i| labels[i]).collect();
            if y_train.iter().all(|&l| l == y_train[0]) {
                return Err(SvmError::DegenerateSplit { split: s });
            }
            let k_train = g.restrict(train_idx);
            let seed = rng::derive_seed(solver_base, (s * grid_len + ci) as u64);
            let model = train(
                &k_train,
                &y_train,
                cfg.c_grid[ci],
                cfg.tol,
                cfg.max_passes,
                seed,
            )?;
            let rows = g.rows_against(test_idx, train_idx);
            let mut correct = 0usize;
            for (row, &ti) in rows.iter().zip(test_idx.iter()) {
                if model.predict(row)? == labels[ti] {
                    correct += 1;
                }
            }
            Ok(100.0 * correct as f64 / test_idx.len() as f64)
        })
        .collect();
    let accuracies = results?;
    let train_eval_ms = t2.elapsed().as_millis() as u64;

    let grid: Vec<GridRow> = (0..grid_len)
        .map(|ci| {
            let splits_acc: Vec<f64> =
                (0..cfg.splits).map(|s| accuracies[ci * cfg.splits + s]).collect();
            let mean = splits_acc.iter().sum::<f64>() / splits_acc.len() as f64;
            let var = splits_acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>()
                / splits_acc.len() as f64;
            GridRow { c: cfg.c_grid[ci], mean, std: var.sqrt(), splits: splits_acc }
        })
        .collect();
    let best = grid
        .iter()
        .cloned()
        .reduce(|best, row| {
            let better = row.mean > best.mean
                || (row.mean == best.mean && row.c < best.c);
            if better { row } else { best }
        })
        .expect("grid is non-empty");

    Ok(BenchmarkReport {
        dataset: ds.name().to_string(),
        mode,
        gamma,
        seed: master_seed,
        grid,
        best,
        timings: cfg
            .timings
            .then_some(Timings { features_ms, gram_ms, train_eval_ms }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::kernel::{extract_features, feature_full, gram, kernel_value, DEFAULT_GAMMA};

    fn block_gram() -> GramMatrix {
        GramMatrix::from_rows(vec![
            vec![1.0, 0.9, 0.1, 0.1],
            vec![0.9, 1.0, 0.1, 0.1],
            vec![0.1, 0.1, 1.0, 0.9],
            vec![0.1, 0.1, 0.9, 1.0],
        ])
    }

    fn training_accuracy(model: &SvmModel, k: &GramMatrix, y: &[i32]) -> f64 {
        let n = y.len();
        let correct = (0..n)
            .filter(|&i| {
                let row: Vec<f64> = (0..n).map(|j| k.get(i, j)).collect();
                model.predict(&row).unwrap() == y[i]
            })
            .count();
        correct as f64 / n as f64
    }

    #[test]
    fn separable_blocks_reach_full_training_accuracy() {
        let k = block_gram();
        let y = [1, 1, -1, -1];
        // Separability witness: alpha = (1,1,1,1), b = 0 gives functional
        // margins y_i f_i = 1.7 > 0 for every point, so a perfect classifier
        // exists in the induced feature space.
        for i in 0..4 {
            let f: f64 = (0..4).map(|j| y[j] as f64 * k.get(i, j)).sum();
            assert!(y[i] as f64 * f >= 1.7 - 1e-12);
        }
        let model = train(&k, &y, 1.0, DEFAULT_TOL, DEFAULT_MAX_PASSES, 0).unwrap();
        assert_eq!(training_accuracy(&model, &k, &y), 1.0);
    }

    #[test]
    fn dual_feasibility_after_training() {
        let k = block_gram();
        let y = [1, 1, -1, -1];
        for c in [0.1, 1.0, 10.0] {
            let model = train(&k, &y, c, DEFAULT_TOL, DEFAULT_MAX_PASSES, 3).unwrap();
            let mut sum = 0.0;
            for (i, &a) in model.alpha().iter().enumerate() {
                assert!((0.0..=c).contains(&a), "alpha[{i}] = {a} outside [0, {c}]");
                sum += a * y[i] as f64;
            }
            assert!(sum.abs() <= 1e-8, "constraint drift {sum:.3e}");
        }
    }

    #[test]
    fn interior_support_vectors_sit_on_the_margin() {
        let k = block_gram();
        let y = [1, 1, -1, -1];
        let model = train(&k, &y, 1.0, DEFAULT_TOL, DEFAULT_MAX_PASSES, 0).unwrap();
        let mut interior = 0;
        for i in 0..4 {
            let a = model.alpha()[i];
            if a > 0.0 && a < model.c() {
                let row: Vec<f64> = (0..4).map(|j| k.get(i, j)).collect();
                let f = model.decision_value(&row).unwrap();
                assert!(
                    (y[i] as f64 * f - 1.0).abs() <= 0.05,
                    "interior SV {i}: y*f = {}",
                    y[i] as f64 * f
                );
                assert_eq!(model.predict(&row).unwrap(), y[i]);
                interior += 1;
            }
        }
        assert!(interior > 0, "expected at least one interior support vector");
    }

    #[test]
    fn single_class_labels_rejected() {
        let k = block_gram();
        assert_eq!(
            train(&k, &[1, 1, 1, 1], 1.0, DEFAULT_TOL, DEFAULT_MAX_PASSES, 0),
            Err(SvmError::SingleClass)
        );
    }

    #[test]
    fn size_and_label_validation() {
        let k = block_gram();
        assert_eq!(
            train(&k, &[1, -1], 1.0, DEFAULT_TOL, DEFAULT_MAX_PASSES, 0),
            Err(SvmError::SizeMismatch { gram: 4, labels: 2 })
        );
        assert_eq!(
            train(&k, &[1, 1, -1, 2], 1.0, DEFAULT_TOL, DEFAULT_MAX_PASSES, 0),
            Err(SvmError::BadLabel { value: 2 })
        );
        assert_eq!(
            train(&k, &[1, 1, -1, -1], 0.0, DEFAULT_TOL, DEFAULT_MAX_PASSES, 0),
            Err(SvmError::InvalidC { c: 0.0 })
        );
    }

    #[test]
    fn conflicting_duplicates_cap_at_half_accuracy() {
        // Identical rows with opposite labels: at most one of the two can be
        // classified correctly.
        let k = GramMatrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        let y = [1, -1];
        let model = train(&k, &y, 0.01, DEFAULT_TOL, DEFAULT_MAX_PASSES, 1).unwrap();
        assert!(training_accuracy(&model, &k, &y) <= 0.5);
    }

    #[test]
    fn zero_row_predicts_bias_sign() {
        let k = block_gram();
        let y = [1, 1, -1, -1];
        let model = train(&k, &y, 1.0, DEFAULT_TOL, DEFAULT_MAX_PASSES, 0).unwrap();
        let d = model.decision_value(&[0.0; 4]).unwrap();
        assert_eq!(d, model.bias());
        let want = if model.bias() >= 0.0 { 1 } else { -1 };
        assert_eq!(model.predict(&[0.0; 4]).unwrap(), want);
    }

    #[test]
    fn predict_rejects_wrong_row_length() {
        let k = block_gram();
        let model = train(&k, &[1, 1, -1, -1], 1.0, DEFAULT_TOL, DEFAULT_MAX_PASSES, 0).unwrap();
        assert_eq!(
            model.predict(&[0.0; 3]),
            Err(SvmError::RowLength { expected: 4, got: 3 })
        );
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        // A kernel messy enough that fallback pair choices fire.
        let graphs: Vec<Graph> = (0..12)
            .map(|i| Graph::erdos_renyi(10, 0.2 + 0.05 * (i % 3) as f64, i).unwrap())
            .collect();
        let feats = extract_features(&graphs, FeatureMode::Full, 0).unwrap();
        let k = gram(&feats, DEFAULT_GAMMA);
        let y: Vec<i32> = (0..12).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let m1 = train(&k, &y, 10.0, DEFAULT_TOL, DEFAULT_MAX_PASSES, 7).unwrap();
        let m2 = train(&k, &y, 10.0, DEFAULT_TOL, DEFAULT_MAX_PASSES, 7).unwrap();
        assert_eq!(m1, m2);
    }

    fn two_class_dataset() -> Dataset {
        // 20 paths and 20 complete graphs: two distinct constant feature
        // vectors, hence a separable Gram.
        let mut graphs = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..20 {
            graphs.push(Graph::path(6));
            labels.push(-1);
            graphs.push(Graph::complete(6));
            labels.push(1);
        }
        Dataset::new("toy-two-class", graphs, labels).unwrap()
    }

    #[test]
    fn protocol_separates_two_distinct_graph_classes() {
        let ds = two_class_dataset();
        // Direct Gram inspection: the two class feature vectors differ, so
        // within-class kernel is 1 and cross-class kernel is strictly less.
        let fp = feature_full(&Graph::path(6)).unwrap();
        let fk = feature_full(&Graph::complete(6)).unwrap();
        assert!(kernel_value(&fp, &fk, DEFAULT_GAMMA) < 1.0);

        let report = run_protocol(&ds, FeatureMode::Full, DEFAULT_GAMMA, 11).unwrap();
        assert_eq!(report.best.mean, 100.0);
        assert!(report.grid.iter().any(|row| row.mean == 100.0));
    }

    #[test]
    fn protocol_rejects_small_or_nonbinary_datasets() {
        let ds = Dataset::new(
            "tiny",
            vec![Graph::path(3); 4],
            vec![1, -1, 1, -1],
        )
        .unwrap();
        assert!(matches!(
            run_protocol(&ds, FeatureMode::Full, DEFAULT_GAMMA, 0),
            Err(SvmError::TooFewGraphs { n: 4 })
        ));

        let ds = Dataset::new("tri", vec![Graph::path(3); 12], vec![0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2])
            .unwrap();
        assert!(matches!(
            run_protocol(&ds, FeatureMode::Full, DEFAULT_GAMMA, 0),
            Err(SvmError::NonBinaryLabels { distinct: 3 })
        ));
    }

    #[test]
    fn splits_are_disjoint_exhaustive_and_sized() {
        let labels: Vec<i32> = (0..43).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
        let cfg = ProtocolConfig::default();
        let splits = make_splits(&labels, &cfg, 5);
        assert_eq!(splits.len(), 10);
        let floor = (0.8 * 43.0f64).floor() as usize;
        for (train, test) in &splits {
            let mut all: Vec<usize> = train.iter().chain(test.iter()).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..43).collect::<Vec<_>>());
            assert!(
                (train.len() as i64 - floor as i64).abs() <= 1,
                "train size {} vs floor {floor}",
                train.len()
            );
            let classes: std::collections::HashSet<i32> =
                train.iter().map(|&i| labels[i]).collect();
            assert_eq!(classes.len(), 2, "training set lost a class");
        }
        assert_eq!(splits, make_splits(&labels, &cfg, 5));
        assert_ne!(splits, make_splits(&labels, &cfg, 6));
    }

    #[test]
    fn protocol_reports_are_deterministic() {
        let ds = two_class_dataset();
        let a = run_protocol(&ds, FeatureMode::Reduced, DEFAULT_GAMMA, 21).unwrap();
        let b = run_protocol(&ds, FeatureMode::Reduced, DEFAULT_GAMMA, 21).unwrap();
        assert_eq!(a.deterministic_json(), b.deterministic_json());
        // Mean and std are recomputable from the per-split accuracies.
        for row in &a.grid {
            let mean = row.splits.iter().sum::<f64>() / row.splits.len() as f64;
            assert!((mean - row.mean).abs() < 1e-12);
            assert!(row.splits.iter().all(|&acc| (0.0..=100.0).contains(&acc)));
        }
    }

    #[test]
    fn report_json_shape() {
        let ds = two_class_dataset();
        let report = run_protocol(&ds, FeatureMode::Full, DEFAULT_GAMMA, 2).unwrap();
        let json = report.to_json();
        for field in ["\"dataset\"", "\"mode\"", "\"gamma\"", "\"seed\"", "\"grid\"", "\"C\"", "\"best\"", "\"timings\""] {
            assert!(json.contains(field), "missing {field} in {json}");
        }
        assert!(!report.deterministic_json().contains("timings"));
        let back: BenchmarkReport =
            serde_json::from_str(&report.deterministic_json()).unwrap();
        assert_eq!(back.grid, report.grid);
    }

    #[test]
    fn best_row_ties_resolve_to_smallest_c() {
        let ds = two_class_dataset();
        let report = run_protocol(&ds, FeatureMode::Full, DEFAULT_GAMMA, 4).unwrap();
        let top = report
            .grid
            .iter()
            .filter(|row| row.mean == report.best.mean)
            .map(|row| row.c)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(report.best.c, top);
    }

    #[test]
    fn shuffled_labels_fall_to_majority_rate() {
        use rand::seq::SliceRandom;
        // Structure uncorrelated with labels: accuracy should sit near the
        // majority-class share.
        let graphs: Vec<Graph> = (0..40)
            .map(|i| Graph::erdos_renyi(12, if i % 2 == 0 { 0.3 } else { 0.6 }, i as u64).unwrap())
            .collect();
        let mut labels = vec![-1; 16];
        labels.extend(vec![1; 24]);
        labels.shuffle(&mut crate::rng::seeded(8));
        let ds = Dataset::new("noise", graphs, labels.clone()).unwrap();
        let report = run_protocol(&ds, FeatureMode::Full, DEFAULT_GAMMA, 13).unwrap();
        // Chance level is the majority share of the test sets themselves;
        // stratified rounding makes that differ slightly from the
        // population share (here 5/9 per test set, not 24/40).
        let splits = make_splits(&labels, &ProtocolConfig::default(), 13);
        let majority: f64 = splits
            .iter()
            .map(|(_, test)| {
                let pos = test.iter().filter(|&&i| labels[i] == 1).count();
                100.0 * pos.max(test.len() - pos) as f64 / test.len() as f64
            })
            .sum::<f64>()
            / splits.len() as f64;
        let sigma = report.best.std.max(2.0);
        assert!(
            (report.best.mean - majority).abs() <= 3.0 * sigma,
            "best mean {} vs test majority {majority} (std {})",
            report.best.mean,
            report.best.std
        );
    }
}
