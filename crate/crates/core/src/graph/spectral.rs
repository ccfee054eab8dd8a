//! Non-trivial spectral radius of a regular graph's adjacency matrix.
//!
//! Lanczos with full reorthogonalisation on the subspace orthogonal to the
//! trivial eigenvectors: the all-ones vector (eigenvalue `d`) and, for
//! bipartite graphs, the signed colouring vector (eigenvalue `-d`). The
//! result is `max(|θ_min|, |θ_max|)` over the converged extreme Ritz values.

use super::Graph;
use crate::error::{Error, Result};

pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-6;

/// Largest Krylov basis kept in memory before a restart.
const MAX_BASIS: usize = 600;
/// Ritz values are extracted every this many Lanczos steps.
const CHECK_EVERY: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub lambda: f64,
    /// Residual norm bound of the dominant Ritz pair.
    pub residual: f64,
    pub matvecs: usize,
}

/// Measures `max{|λ_2|, |λ_n|}` of `g` to relative accuracy `tol`.
pub fn spectral_bound(g: &Graph, tol: f64) -> Result<f64> {
    Ok(measure(g, tol)?.lambda)
}

/// [`spectral_bound`] with the convergence diagnostics attached.
pub fn spectral_estimate(g: &Graph, tol: f64) -> Result<SpectralEstimate> {
    measure(g, tol)
}

fn matvec(g: &Graph, x: &[f64], y: &mut [f64]) {
    for (i, out) in y.iter_mut().enumerate() {
        *out = g.neighbors(i).iter().map(|&j| x[j]).sum();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // Two passes of classical Gram-Schmidt.
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
}

struct Ritz {
    theta: f64,
    residual: f64,
    /// Coordinates in the Lanczos basis.
    coords: Vec<f64>,
}

impl Ritz {
    fn vector(&self, basis: &[Vec<f64>]) -> Vec<f64> {
        let mut v = vec![0.0; basis[0].len()];
        for (c, b) in self.coords.iter().zip(basis) {
            axpy(*c, b, &mut v);
        }
        v
    }
}

/// Number of eigenvalues of the tridiagonal `(alphas, betas)` below `x`
/// (Sturm sequence count).
fn sturm_count(alphas: &[f64], betas: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for k in 0..alphas.len() {
        let off = if k == 0 { 0.0 } else { betas[k - 1] * betas[k - 1] };
        q = alphas[k] - x - if k == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (alphas[k].abs() + x.abs()).max(1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue by bisection.
fn bisect(alphas: &[f64], betas: &[f64], k: usize) -> f64 {
    let m = alphas.len();
    let radius = (0..m)
        .map(|i| {
            let left = if i > 0 { betas[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < m { betas[i].abs() } else { 0.0 };
            alphas[i].abs() + left + right
        })
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if sturm_count(alphas, betas, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T - shift·I) y = rhs` by Gaussian elimination with partial
/// pivoting on the band (the `gttrf`/`gtts2` scheme).
fn tridiagonal_solve(alphas: &[f64], betas: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let m = alphas.len();
    let mut diag: Vec<f64> = alphas.iter().map(|a| a - shift).collect();
    let mut upper: Vec<f64> = betas[..m - 1].to_vec();
    let mut lower: Vec<f64> = betas[..m - 1].to_vec();
    let mut upper2 = vec![0.0; m.saturating_sub(2)];
    let mut b = rhs.to_vec();
    let tiny = f64::EPSILON * alphas.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for i in 0..m.saturating_sub(1) {
        if diag[i].abs() >= lower[i].abs() {
            if diag[i] == 0.0 {
                diag[i] = tiny;
            }
            let fact = lower[i] / diag[i];
            diag[i + 1] -= fact * upper[i];
            b[i + 1] -= fact * b[i];
        } else {
            let fact = diag[i] / lower[i];
            diag[i] = lower[i];
            let below = diag[i + 1];
            diag[i + 1] = upper[i] - fact * below;
            if i + 2 < m {
                upper2[i] = upper[i + 1];
                upper[i + 1] *= -fact;
            }
            upper[i] = below;
            let (bi, bn) = (b[i], b[i + 1]);
            b[i] = bn;
            b[i + 1] = bi - fact * bn;
        }
        lower[i] = 0.0;
    }
    if diag[m - 1] == 0.0 {
        diag[m - 1] = tiny;
    }
    let mut y = vec![0.0; m];
    for i in (0..m).rev() {
        let mut acc = b[i];
        if i + 1 < m {
            acc -= upper[i] * y[i + 1];
        }
        if i + 2 < m {
            acc -= upper2[i] * y[i + 2];
        }
        y[i] = acc / diag[i];
    }
    y
}

/// Ritz pair for the `k`-th smallest eigenvalue of the tridiagonal.
fn ritz_pair(alphas: &[f64], betas: &[f64], beta_next: f64, k: usize) -> Ritz {
    let m = alphas.len();
    let theta = bisect(alphas, betas, k);
    let scale = alphas.iter().chain(betas).fold(1.0f64, |a, v| a.max(v.abs()));
    let shift = theta + 1e-10 * scale;
    let mut s = vec![1.0 / (m as f64).sqrt(); m];
    for _ in 0..3 {
        let y = tridiagonal_solve(alphas, betas, shift, &s);
        let ny = norm(&y);
        s = y.into_iter().map(|v| v / ny).collect();
    }
    Ritz {
        theta,
        residual: (beta_next * s[m - 1]).abs(),
        coords: s,
    }
}

/// Extreme Ritz pairs (smallest, largest) of the current tridiagonal.
fn extreme_ritz(alphas: &[f64], betas: &[f64], beta_next: f64) -> (Ritz, Ritz) {
    let m = alphas.len();
    (
        ritz_pair(alphas, betas, beta_next, 0),
        ritz_pair(alphas, betas, beta_next, m - 1),
    )
}

pub(super) fn measure(g: &Graph, tol: f64) -> Result<SpectralEstimate> {
    measure_with_basis(g, tol, MAX_BASIS)
}

fn measure_with_basis(g: &Graph, tol: f64, max_basis: usize) -> Result<SpectralEstimate> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::validation(format!("tolerance {tol} outside (0, 1)")));
    }
    let n = g.n();
    let scale = 1.0 / (n as f64).sqrt();
    let mut trivial = vec![vec![scale; n]];
    if let Some(color) = g.two_coloring() {
        trivial.push(color.iter().map(|&c| c as f64 * scale).collect());
    }
    let dim = n - trivial.len();
    if dim == 0 {
        // K_2: the only eigenvalues are ±1, both trivial.
        return Ok(SpectralEstimate {
            lambda: 0.0,
            residual: 0.0,
            matvecs: 0,
        });
    }
    let budget = (10.0 * n as f64 * (n as f64).ln().max(1.0)).ceil() as usize;

    // Deterministic pseudo-random start vector.
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let mut start: Vec<f64> = (0..n)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
        .collect();

    let mut matvecs = 0;
    let mut best = (0.0f64, f64::INFINITY);
    loop {
        orthogonalize(&mut start, &trivial);
        let nv = norm(&start);
        if nv == 0.0 {
            return Err(Error::Numerical {
                message: "start vector collapsed".into(),
                residual: f64::INFINITY,
            });
        }
        start.iter_mut().for_each(|x| *x /= nv);

        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas = Vec::new();
        let mut betas = Vec::new();
        let mut w = vec![0.0; n];
        let max_steps = dim.min(max_basis);
        let mut restart_vector = None;
        for step in 0..max_steps {
            matvec(g, &basis[step], &mut w);
            matvecs += 1;
            let alpha = dot(&w, &basis[step]);
            alphas.push(alpha);
            orthogonalize(&mut w, &trivial);
            orthogonalize(&mut w, &basis);
            let beta = norm(&w);
            let exhausted = beta <= 1e-10 * (g.degree() as f64) || step + 1 == dim;
            let last = step + 1 == max_steps;
            if exhausted || last || (step + 1) % CHECK_EVERY == 0 {
                let beta_next = if exhausted { 0.0 } else { beta };
                let (lo, hi) = extreme_ritz(&alphas, &betas, beta_next);
                let lambda = lo.theta.abs().max(hi.theta.abs());
                let dominant = if hi.theta.abs() >= lo.theta.abs() { &hi } else { &lo };
                let other = if hi.theta.abs() >= lo.theta.abs() { &lo } else { &hi };
                let limit = tol * lambda.max(1e-12);
                // The non-dominant end only matters if it could still overtake.
                let other_settled =
                    other.residual <= limit || other.theta.abs() + other.residual < lambda;
                if dominant.residual <= limit && other_settled {
                    return Ok(SpectralEstimate {
                        lambda,
                        residual: dominant.residual,
                        matvecs,
                    });
                }
                if dominant.residual < best.1 {
                    best = (lambda, dominant.residual);
                }
                if exhausted {
                    // Invariant subspace found: Ritz values are exact.
                    return Ok(SpectralEstimate {
                        lambda,
                        residual: dominant.residual,
                        matvecs,
                    });
                }
                if last {
                    // Restart from the sum of both extreme Ritz vectors so
                    // neither end of the spectrum is lost.
                    let mut v = dominant.vector(&basis);
                    axpy(1.0, &other.vector(&basis), &mut v);
                    restart_vector = Some(v);
                }
            }
            if restart_vector.is_some() {
                break;
            }
            betas.push(beta);
            w.iter_mut().for_each(|x| *x /= beta);
            basis.push(std::mem::replace(&mut w, vec![0.0; n]));
        }
        if matvecs >= budget {
            return Err(Error::Numerical {
                message: format!(
                    "spectral bound did not converge within {budget} matrix-vector products (best estimate {})",
                    best.0
                ),
                residual: best.1,
            });
        }
        start = restart_vector.expect("restart vector set when basis is full");
    }
}
