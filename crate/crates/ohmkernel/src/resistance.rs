//! Effective resistance between vertex pairs.
//!
//! Two interchangeable backends compute R(a, b) = (e_a - e_b)^T L+ (e_a - e_b):
//!
//! * [`pseudoinverse`] + [`resistance_from_pinv`]: exact path via a symmetric
//!   eigendecomposition of the Laplacian, good for all pairs at once;
//! * [`resistance_solve`]: per-pair conjugate-gradient solve of
//!   `L x = e_a - e_b` with the Laplacian null space deflated, never forming
//!   the pseudoinverse.
//!
//! [`mc_commute_time`] estimates the commute time C(a, b) by simulating
//! random walks; `C(a, b) = 2 m R(a, b)` ties it to the resistance and makes
//! it an independent statistical check on both backends.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use thiserror::Error;

use crate::graph::{Graph, LaplacianMatrix};
use crate::rng;

/// Relative cutoff for treating a Laplacian eigenvalue as an exact zero:
/// eigenvalues with magnitude at most `TAU * lambda_max * n` do not
/// contribute to the pseudoinverse.
pub const ZERO_EIGENVALUE_TAU: f64 = 1e-12;

/// Default relative-residual stopping tolerance of [`resistance_solve`].
pub const DEFAULT_SOLVE_TOL: f64 = 1e-10;

/// Iteration cap of [`resistance_solve`], as a multiple of the vertex count.
pub const SOLVE_ITERATION_CAP_FACTOR: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum ResistanceError {
    #[error("vertex {v} out of range for graph with {n} vertices")]
    IndexOutOfRange { v: usize, n: usize },
    #[error("vertices {a} and {b} lie in different connected components")]
    DisconnectedPair { a: usize, b: usize },
    #[error("pair ({v}, {v}) is degenerate: endpoints must differ")]
    SameVertex { v: usize },
    #[error(
        "solver did not converge within {iterations} iterations \
         (relative residual {residual:.3e})"
    )]
    NoConvergence { residual: f64, iterations: usize },
    #[error("symmetric eigendecomposition failed for {dim}x{dim} matrix")]
    EigenFailure { dim: usize },
    #[error("walk count must be at least 1")]
    NoWalks,
}

/// Moore-Penrose pseudoinverse L+ of a graph Laplacian.
///
/// Symmetric, satisfies the four Penrose conditions within `1e-8 * ||L||`
/// (infinity norm), and has zero row sums when the graph is connected.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoinverseMatrix(DMatrix<f64>);

impl PseudoinverseMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Max-entry residuals of the four Penrose conditions, in order:
    /// `L L+ L = L`, `L+ L L+ = L+`, `(L L+)^T = L L+`, `(L+ L)^T = L+ L`.
    pub fn penrose_residuals(&self, l: &LaplacianMatrix) -> [f64; 4] {
        let lm = l.as_matrix();
        let lp = &self.0;
        let l_lp = lm * lp;
        let lp_l = lp * lm;
        let max_abs = |m: &DMatrix<f64>| m.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        [
            max_abs(&(&l_lp * lm - lm)),
            max_abs(&(&lp_l * lp - lp)),
            max_abs(&(l_lp.transpose() - &l_lp)),
            max_abs(&(lp_l.transpose() - &lp_l)),
        ]
    }
}

/// Moore-Penrose pseudoinverse of a Laplacian via symmetric
/// eigendecomposition.
///
/// Eigenvalues with magnitude at most [`ZERO_EIGENVALUE_TAU`]` * lambda_max * n`
/// are treated as exact zeros and their reciprocals set to 0.
pub fn pseudoinverse(l: &LaplacianMatrix) -> Result<PseudoinverseMatrix, ResistanceError> {
    let n = l.dim();
    if n == 0 {
        return Ok(PseudoinverseMatrix(DMatrix::zeros(0, 0)));
    }
    let eig = nalgebra::SymmetricEigen::try_new(l.as_matrix().clone(), f64::EPSILON, 100 * n)
        .ok_or(ResistanceError::EigenFailure { dim: n })?;
    let lambda_max = eig.eigenvalues.iter().fold(0.0f64, |acc, &x| acc.max(x));
    let cutoff = ZERO_EIGENVALUE_TAU * lambda_max * n as f64;
    let recip = DVector::from_iterator(
        n,
        eig.eigenvalues
            .iter()
            .map(|&lam| if lam.abs() <= cutoff { 0.0 } else { 1.0 / lam }),
    );
    let q = &eig.eigenvectors;
    let mut lp = q * DMatrix::from_diagonal(&recip) * q.transpose();
    // Symmetrize away eigendecomposition roundoff.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (lp[(i, j)] + lp[(j, i)]);
            lp[(i, j)] = v;
            lp[(j, i)] = v;
        }
    }
    Ok(PseudoinverseMatrix(lp))
}

/// R(a, b) = L+_aa - 2 L+_ab + L+_bb. Zero when `a == b`; bitwise equal
/// under argument swap (the quadratic form is evaluated in canonical index
/// order).
pub fn resistance_from_pinv(
    lp: &PseudoinverseMatrix,
    a: usize,
    b: usize,
) -> Result<f64, ResistanceError> {
    let n = lp.dim();
    for v in [a, b] {
        if v >= n {
            return Err(ResistanceError::IndexOutOfRange { v, n });
        }
    }
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let m = lp.as_matrix();
    let r = m[(lo, lo)] - 2.0 * m[(lo, hi)] + m[(hi, hi)];
    Ok(r.max(0.0))
}

/// Effective resistance by conjugate gradients on `L x = e_a - e_b`.
///
/// The iteration is restricted to the orthogonal complement of the
/// component indicator vectors (the Laplacian null space) by projecting the
/// residual every step. Stops when the residual drops below `tol` relative
/// to the right-hand side, capped at [`SOLVE_ITERATION_CAP_FACTOR`]` * n`
/// iterations.
pub fn resistance_solve(
    g: &Graph,
    a: usize,
    b: usize,
    tol: f64,
) -> Result<f64, ResistanceError> {
    let n = g.vertex_count();
    for v in [a, b] {
        if v >= n {
            return Err(ResistanceError::IndexOutOfRange { v, n });
        }
    }
    if a == b {
        return Err(ResistanceError::SameVertex { v: a });
    }
    let comps = g.connected_components();
    if !comps.same_component(a, b) {
        return Err(ResistanceError::DisconnectedPair { a, b });
    }

    let tol = tol.max(1e-14);
    let cap = SOLVE_ITERATION_CAP_FACTOR * n;

    // Per-component sizes for the deflation projector.
    let mut comp_size = vec![0usize; comps.count];
    for &c in &comps.labels {
        comp_size[c] += 1;
    }
    let deflate = |v: &mut [f64]| {
        let mut mean = vec![0.0f64; comps.count];
        for (i, &c) in comps.labels.iter().enumerate() {
            mean[c] += v[i];
        }
        for (m, &s) in mean.iter_mut().zip(&comp_size) {
            *m /= s as f64;
        }
        for (i, &c) in comps.labels.iter().enumerate() {
            v[i] -= mean[c];
        }
    };
    let apply_laplacian = |x: &[f64], out: &mut [f64]| {
        for v in 0..n {
            let mut acc = g.degree(v) as f64 * x[v];
            for &w in g.neighbors(v) {
                acc -= x[w];
            }
            out[v] = acc;
        }
    };

    let mut rhs = vec![0.0f64; n];
    rhs[a] = 1.0;
    rhs[b] = -1.0;
    let rhs_norm = 2.0f64.sqrt();

    let mut x = vec![0.0f64; n];
    let mut r = rhs;
    let mut p = r.clone();
    let mut ap = vec![0.0f64; n];
    let mut rs_old: f64 = r.iter().map(|&v| v * v).sum();

    for _ in 0..cap {
        if rs_old.sqrt() <= tol * rhs_norm {
            return Ok((x[a] - x[b]).max(0.0));
        }
        apply_laplacian(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(&pi, &api)| pi * api).sum();
        if pap <= 0.0 {
            // p fell into the null space; cannot make further progress.
            break;
        }
        let alpha = rs_old / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        deflate(&mut r);
        let rs_new: f64 = r.iter().map(|&v| v * v).sum();
        let beta = rs_new / rs_old;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs_old = rs_new;
    }
    if rs_old.sqrt() <= tol * rhs_norm {
        return Ok((x[a] - x[b]).max(0.0));
    }
    Err(ResistanceError::NoConvergence {
        residual: rs_old.sqrt() / rhs_norm,
        iterations: cap,
    })
}

/// Monte-Carlo estimate of the commute time between two vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommuteEstimate {
    /// Mean round-trip step count over all walks.
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub walks: usize,
}

/// Estimate the expected a -> b -> a round-trip length of a simple random
/// walk by direct simulation. Test oracle for the commute-time identity
/// `C(a, b) = 2 m R(a, b)`.
pub fn mc_commute_time(
    g: &Graph,
    a: usize,
    b: usize,
    walks: usize,
    seed: u64,
) -> Result<CommuteEstimate, ResistanceError> {
    let n = g.vertex_count();
    for v in [a, b] {
        if v >= n {
            return Err(ResistanceError::IndexOutOfRange { v, n });
        }
    }
    if walks == 0 {
        return Err(ResistanceError::NoWalks);
    }
    if !g.connected_components().same_component(a, b) {
        return Err(ResistanceError::DisconnectedPair { a, b });
    }
    if a == b {
        return Ok(CommuteEstimate { mean: 0.0, std_error: 0.0, walks });
    }

    let mut rng = rng::seeded(seed);
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..walks {
        let mut steps = 0u64;
        let mut cur = a;
        for target in [b, a] {
            while cur != target {
                let nbrs = g.neighbors(cur);
                cur = nbrs[rng.gen_range(0..nbrs.len())];
                steps += 1;
            }
        }
        let s = steps as f64;
        sum += s;
        sum_sq += s * s;
    }
    let mean = sum / walks as f64;
    let var = (sum_sq / walks as f64 - mean * mean).max(0.0);
    Ok(CommuteEstimate {
        mean,
        std_error: (var / walks as f64).sqrt(),
        walks,
    })
}
