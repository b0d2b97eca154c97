//! Resistance feature vectors and the RBF graph kernel.
//!
//! A graph is summarized by the ascending-sorted list of effective
//! resistances over vertex pairs: all n(n-1)/2 pairs in full mode, or
//! min(ceil(sqrt(n)), n(n-1)/2) seeded random pairs in reduced mode. Two
//! graphs are compared with k = exp(-gamma ||v1 - v2||^2) after padding the
//! shorter vector with trailing zeros, and [`gram`] assembles the pairwise
//! kernel matrix for a collection.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::graph::Graph;
use crate::resistance::{
    self, pseudoinverse, resistance_from_pinv, resistance_solve, PseudoinverseMatrix,
    ResistanceError,
};
use crate::rng::{self, Domain};

/// Default RBF width; the benchmark protocol fixes gamma = 1.
pub const DEFAULT_GAMMA: f64 = 1.0;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("reduced features require at least 2 vertices, got {n}")]
    TooFewVertices { n: usize },
    #[error(transparent)]
    Resistance(#[from] ResistanceError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error("graph id count {ids} does not match matrix dimension {dim}")]
    IdCountMismatch { ids: usize, dim: usize },
    #[error("class separation needs at least one graph per class")]
    EmptyClass,
}

/// Which pair set backs a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    /// All n(n-1)/2 vertex pairs, resistances from the pseudoinverse.
    Full,
    /// min(ceil(sqrt(n)), n(n-1)/2) sampled pairs, resistances from the
    /// per-pair solver.
    Reduced,
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureMode::Full => write!(f, "full"),
            FeatureMode::Reduced => write!(f, "reduced"),
        }
    }
}

impl FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(FeatureMode::Full),
            "reduced" => Ok(FeatureMode::Reduced),
            other => Err(format!("unknown mode {other:?}, expected full or reduced")),
        }
    }
}

/// Ascending-sorted effective resistances of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    mode: FeatureMode,
    /// Vertex count of the source graph.
    n: usize,
}

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode(&self) -> FeatureMode {
        self.mode
    }

    pub fn source_vertex_count(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Number of reduced-mode samples for an n-vertex graph.
pub fn reduced_pair_count(n: usize) -> usize {
    let all = n * n.saturating_sub(1) / 2;
    ((n as f64).sqrt().ceil() as usize).min(all)
}

/// Feature vector over all vertex pairs, via the pseudoinverse backend.
/// A single-vertex graph yields the empty vector.
pub fn feature_full(g: &Graph) -> Result<FeatureVector, ResistanceError> {
    let n = g.vertex_count();
    let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    if n >= 2 {
        let lp = pseudoinverse(&g.laplacian())?;
        for a in 0..n {
            for b in (a + 1)..n {
                values.push(resistance_from_pinv(&lp, a, b)?);
            }
        }
    }
    values.sort_unstable_by(f64::total_cmp);
    Ok(FeatureVector { values, mode: FeatureMode::Full, n })
}

/// Feature vector over seeded random pairs, via the per-pair solver.
///
/// Samples distinct unordered pairs uniformly without replacement. A pair
/// spanning two components has no finite resistance; its entry falls back to
/// the pseudoinverse quadratic form so full and reduced modes agree on how
/// disconnection is represented.
pub fn feature_reduced(g: &Graph, seed: u64) -> Result<FeatureVector, KernelError> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(KernelError::TooFewVertices { n });
    }
    let k = reduced_pair_count(n);
    let comps = g.connected_components();
    let mut lp: Option<PseudoinverseMatrix> = None;
    let mut values = Vec::with_capacity(k);
    for idx in sample_pair_indices(n, k, seed) {
        let (a, b) = decode_pair(n, idx);
        let r = if comps.same_component(a, b) {
            resistance_solve(g, a, b, resistance::DEFAULT_SOLVE_TOL)?
        } else {
            if lp.is_none() {
                lp = Some(pseudoinverse(&g.laplacian())?);
            }
            resistance_from_pinv(lp.as_ref().unwrap(), a, b)?
        };
        values.push(r);
    }
    values.sort_unstable_by(f64::total_cmp);
    Ok(FeatureVector { values, mode: FeatureMode::Reduced, n })
}

/// Floyd's sampling: k distinct values from [0, n(n-1)/2), uniform over
/// k-subsets.
fn sample_pair_indices(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let total = n * (n - 1) / 2;
    debug_assert!(k <= total);
    let mut rng = rng::seeded(seed);
    let mut chosen: HashSet<usize> = HashSet::with_capacity(k);
    for t in (total - k)..total {
        let r = rng.gen_range(0..=t);
        if !chosen.insert(r) {
            chosen.insert(t);
        }
    }
    let mut out: Vec<usize> = chosen.into_iter().collect();
    out.sort_unstable();
    out
}

/// Inverse of the lexicographic pair enumeration (0,1), (0,2), ..., (n-2,n-1).
fn decode_pair(n: usize, idx: usize) -> (usize, usize) {
    // Pairs with first vertex < a number a*(2n - a - 1)/2.
    let offset = |a: usize| a * (2 * n - a - 1) / 2;
    let mut lo = 0usize;
    let mut hi = n - 1;
    // Largest a with offset(a) <= idx.
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if offset(mid) <= idx {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let a = lo;
    let b = a + 1 + (idx - offset(a));
    (a, b)
}

/// RBF kernel between two feature vectors: the shorter is padded with
/// trailing zeros, then k = exp(-gamma ||v1 - v2||^2). Always in (0, 1],
/// exactly 1 for identical vectors.
pub fn kernel_value(v1: &FeatureVector, v2: &FeatureVector, gamma: f64) -> f64 {
    let a = v1.values();
    let b = v2.values();
    let len = a.len().max(b.len());
    let mut sq = 0.0f64;
    for i in 0..len {
        let d = a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0);
        sq += d * d;
    }
    (-gamma * sq).exp()
}

/// Dense symmetric kernel matrix over a graph collection. Entries lie in
/// (0, 1], the diagonal is exactly 1, and eigenvalues are non-negative
/// within floating-point tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    m: DMatrix<f64>,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Principal submatrix on the given indices, in the given order.
    pub fn restrict(&self, idx: &[usize]) -> GramMatrix {
        let k = idx.len();
        let m = DMatrix::from_fn(k, k, |i, j| self.m[(idx[i], idx[j])]);
        GramMatrix { m }
    }

    /// Kernel values of each `rows` element against every `cols` element.
    pub fn rows_against(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|&i| cols.iter().map(|&j| self.m[(i, j)]).collect())
            .collect()
    }

    /// Smallest and largest eigenvalue. Dense eigendecomposition; intended
    /// for validity checks on matrices up to a few hundred rows.
    pub fn eigen_extrema(&self) -> (f64, f64) {
        if self.dim() == 0 {
            return (0.0, 0.0);
        }
        let eig = nalgebra::SymmetricEigen::new(self.m.clone());
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &l in eig.eigenvalues.iter() {
            min = min.min(l);
            max = max.max(l);
        }
        (min, max)
    }

    /// CSV with a header row of graph ids, then one row per graph.
    pub fn to_csv(&self, ids: &[String]) -> Result<String, KernelError> {
        let n = self.dim();
        if ids.len() != n {
            return Err(KernelError::IdCountMismatch { ids: ids.len(), dim: n });
        }
        let mut out = String::new();
        out.push_str(&ids.join(","));
        out.push('\n');
        for i in 0..n {
            for j in 0..n {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{}", self.m[(i, j)]));
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.m[(i, j)]).collect())
            .collect()
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> GramMatrix {
        let n = rows.len();
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        GramMatrix { m }
    }
}

/// JSON envelope for a Gram matrix artifact.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GramEnvelope {
    pub gamma: f64,
    pub mode: FeatureMode,
    pub seed: u64,
    pub dataset: String,
    pub matrix: Vec<Vec<f64>>,
}

/// Pairwise kernel matrix of a feature collection. Each unordered pair is
/// evaluated once; the diagonal is pinned to exactly 1.
pub fn gram(features: &[FeatureVector], gamma: f64) -> GramMatrix {
    let n = features.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| kernel_value(&features[i], &features[j], gamma))
                .collect()
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 1.0;
        for (off, &v) in rows[i].iter().enumerate() {
            let j = i + 1 + off;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    GramMatrix { m }
}

/// Block statistics of a two-class Gram matrix: the first `class_sizes.0`
/// rows form class one, the rest class two.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SeparationStats {
    /// Mean off-diagonal kernel value inside the two diagonal blocks.
    pub within_mean: f64,
    /// Mean kernel value in the off-diagonal block.
    pub between_mean: f64,
    /// within_mean / between_mean; above 1 means the classes form visible
    /// blocks.
    pub separation_ratio: f64,
}

/// Within-class versus between-class Gram block means.
pub fn class_separation(
    g: &GramMatrix,
    class_sizes: (usize, usize),
) -> Result<SeparationStats, KernelError> {
    let (n1, n2) = class_sizes;
    if n1 == 0 || n2 == 0 || n1 + n2 != g.dim() {
        return Err(KernelError::EmptyClass);
    }
    let mut within_sum = 0.0;
    let mut within_count = 0usize;
    for (lo, hi) in [(0, n1), (n1, n1 + n2)] {
        for i in lo..hi {
            for j in (i + 1)..hi {
                within_sum += g.get(i, j);
                within_count += 1;
            }
        }
    }
    let mut between_sum = 0.0;
    for i in 0..n1 {
        for j in n1..(n1 + n2) {
            between_sum += g.get(i, j);
        }
    }
    // Single-member classes contribute no within pairs; n1 = n2 = 1 leaves
    // the within mean undefined and is reported as NaN.
    let within_mean = within_sum / within_count.max(1) as f64;
    let within_mean = if within_count == 0 { f64::NAN } else { within_mean };
    let between_mean = between_sum / (n1 * n2) as f64;
    Ok(SeparationStats {
        within_mean,
        between_mean,
        separation_ratio: within_mean / between_mean,
    })
}

/// Two seeded classes of Erdos-Renyi graphs: `count_per_class` instances of
/// G(n, p1) then of G(n, p2), with per-graph seeds derived from the master
/// seed.
pub fn er_two_class(
    n: usize,
    p1: f64,
    p2: f64,
    count_per_class: usize,
    master_seed: u64,
) -> Result<Vec<Graph>, KernelError> {
    let base = rng::domain_seed(master_seed, Domain::Generation);
    let mut graphs = Vec::with_capacity(2 * count_per_class);
    for (class, p) in [p1, p2].into_iter().enumerate() {
        for i in 0..count_per_class {
            let seed = rng::derive_seed(base, (class * count_per_class + i) as u64);
            graphs.push(Graph::erdos_renyi(n, p, seed)?);
        }
    }
    Ok(graphs)
}

/// One edge-density discrimination experiment: generate the two classes,
/// extract features in the given mode, and measure Gram block separation.
pub fn er_experiment(
    n: usize,
    p1: f64,
    p2: f64,
    count_per_class: usize,
    mode: FeatureMode,
    gamma: f64,
    master_seed: u64,
) -> Result<(GramMatrix, SeparationStats), KernelError> {
    let graphs = er_two_class(n, p1, p2, count_per_class, master_seed)?;
    let features = extract_features(&graphs, mode, master_seed)?;
    let g = gram(&features, gamma);
    let stats = class_separation(&g, (count_per_class, count_per_class))?;
    Ok((g, stats))
}

/// Feature vectors for a whole collection, in parallel.
///
/// Reduced-mode sampling seeds are derived per graph index from the master
/// seed, so results do not depend on scheduling or collection order.
pub fn extract_features(
    graphs: &[Graph],
    mode: FeatureMode,
    master_seed: u64,
) -> Result<Vec<FeatureVector>, KernelError> {
    let base = rng::domain_seed(master_seed, Domain::FeatureSampling);
    graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| match mode {
            FeatureMode::Full => feature_full(g).map_err(KernelError::from),
            FeatureMode::Reduced => feature_reduced(g, rng::derive_seed(base, i as u64)),
        })
        .collect()
}
