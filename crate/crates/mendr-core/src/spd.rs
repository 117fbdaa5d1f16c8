//! Geometry of symmetric positive definite matrices under the Log-Euclidean
//! metric: eigendecomposition, matrix log/exp, distances and means, trace
//! normalization, Riemannian residuals, and ellipsoid extraction.
//!
//! All operations are pure functions on immutable inputs. Matrices in this
//! system are small (n <= 19), so the eigensolver is a dependency-free cyclic
//! Jacobi iteration rather than a LAPACK binding.

use ndarray::{Array1, Array2};

use crate::error::{MendrError, Result};

/// Diagonal jitter and trace-normalization epsilon shared by `scm` and
/// `batch_trace_norm`.
pub const TRACE_EPS: f64 = 1e-5;

/// Off-diagonal Frobenius threshold at which the Jacobi sweep stops.
pub const JACOBI_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 64;

/// A dense real matrix with `entries[i][j] == entries[j][i]` enforced by
/// construction: any input is replaced by `(X + X^T) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    m: Array2<f64>,
}

impl SymmetricMatrix {
    /// Symmetrizes `raw` and wraps it. Errors if `raw` is not square.
    pub fn new(raw: Array2<f64>) -> Result<Self> {
        let (r, c) = raw.dim();
        if r != c {
            return Err(MendrError::ShapeError(format!(
                "symmetric matrix must be square, got {r}x{c}"
            )));
        }
        let mut m = raw;
        for i in 0..r {
            for j in (i + 1)..r {
                let v = 0.5 * (m[[i, j]] + m[[j, i]]);
                m[[i, j]] = v;
                m[[j, i]] = v;
            }
        }
        Ok(Self { m })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: Array2::eye(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.m
    }

    pub fn into_array(self) -> Array2<f64> {
        self.m
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|v| v.is_finite())
    }
}

/// A symmetric matrix with strictly positive eigenvalues. Positive
/// definiteness is checked on construction via a Cholesky factorization
/// (which succeeds iff the minimum eigenvalue is positive).
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    base: SymmetricMatrix,
}

impl SpdMatrix {
    pub fn new(base: SymmetricMatrix) -> Result<Self> {
        if !base.is_finite() {
            return Err(MendrError::InvalidInput(
                "SPD candidate has non-finite entries".into(),
            ));
        }
        if cholesky(base.as_array()).is_none() {
            // Report the offending eigenvalue for diagnostics.
            let min_eig = sym_eig(&base)
                .map(|d| *d.eigenvalues.last().unwrap_or(&f64::NAN))
                .unwrap_or(f64::NAN);
            return Err(MendrError::NotPositiveDefinite { min_eig });
        }
        Ok(Self { base })
    }

    pub fn from_array(raw: Array2<f64>) -> Result<Self> {
        Self::new(SymmetricMatrix::new(raw)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            base: SymmetricMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn as_sym(&self) -> &SymmetricMatrix {
        &self.base
    }

    pub fn as_array(&self) -> &Array2<f64> {
        self.base.as_array()
    }

    pub fn trace(&self) -> f64 {
        self.base.as_array().diag().sum()
    }
}

/// Result of `sym_eig`: eigenvalues sorted descending, eigenvectors as
/// columns of an orthogonal matrix, each column's first nonzero entry made
/// non-negative so decompositions are deterministic.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Recomposes `U diag(f(lambda)) U^T` for an eigenvalue map `f`.
    pub fn recompose(&self, f: impl Fn(f64) -> f64) -> Array2<f64> {
        let n = self.dim();
        let u = &self.eigenvectors;
        let mut scaled = Array2::zeros((n, n));
        for j in 0..n {
            let fj = f(self.eigenvalues[j]);
            for i in 0..n {
                scaled[[i, j]] = u[[i, j]] * fj;
            }
        }
        scaled.dot(&u.t())
    }
}

/// Top-k principal axes of the ellipsoid `{x : x^T A x = 1}`, ordered by
/// descending eigenvalue; `axis_lengths[i]^2 * lambda_i == 4`.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    /// Full axis lengths `2 / sqrt(lambda_i)`, one per retained axis.
    pub axis_lengths: Vec<f64>,
    /// Unit axis directions as columns, paired with `axis_lengths`.
    pub axis_directions: Array2<f64>,
    /// Eigenvalues the retained axes correspond to, descending.
    pub eigenvalues: Vec<f64>,
    pub top_k: usize,
}

pub(crate) fn frobenius(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn off_diag_frobenius(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[[i, j]] * m[[i, j]];
            }
        }
    }
    s.sqrt()
}

/// Plain Cholesky factorization; `None` when a pivot fails to be strictly
/// positive, which is exactly the not-positive-definite case.
pub(crate) fn cholesky(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    let mut l: Array2<f64> = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[[i, j]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Some(l)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps rotate away every off-diagonal pair until the off-diagonal
/// Frobenius norm falls below `JACOBI_TOL` (scaled up for matrices with
/// Frobenius norm above one, since an absolute 1e-12 is unreachable in f64
/// for large-norm inputs). Converges quadratically for every real symmetric
/// matrix at these sizes.
pub fn sym_eig(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    if !a.is_finite() {
        return Err(MendrError::InvalidInput(
            "eigendecomposition input has non-finite entries".into(),
        ));
    }
    let n = a.dim();
    let mut m = a.as_array().clone();
    let mut v: Array2<f64> = Array2::eye(n);
    let tol = JACOBI_TOL * frobenius(&m).max(1.0);

    let mut sweeps = 0;
    while off_diag_frobenius(&m) > tol {
        if sweeps >= JACOBI_MAX_SWEEPS {
            let off = off_diag_frobenius(&m);
            // Remaining off-diagonal mass at the round-off floor is fine;
            // anything larger is a genuine failure.
            if off <= 1e-9 * frobenius(&m).max(1.0) {
                break;
            }
            return Err(MendrError::ConvergenceFailed { sweeps, off });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].total_cmp(&m[[i, i]]));

    let mut eigenvalues = Array1::zeros(n);
    let mut eigenvectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues[dst] = m[[src, src]];
        let mut flip = 1.0;
        for i in 0..n {
            let entry = v[[i, src]];
            if entry != 0.0 {
                flip = if entry < 0.0 { -1.0 } else { 1.0 };
                break;
            }
        }
        for i in 0..n {
            eigenvectors[[i, dst]] = flip * v[[i, src]];
        }
    }

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Matrix logarithm of an SPD matrix via its orthogonal diagonalization.
pub fn spd_log(a: &SpdMatrix) -> Result<SymmetricMatrix> {
    let decomp = sym_eig(a.as_sym())?;
    if let Some(&min) = decomp.eigenvalues.iter().find(|v| **v <= 0.0) {
        return Err(MendrError::NotPositiveDefinite { min_eig: min });
    }
    SymmetricMatrix::new(decomp.recompose(f64::ln))
}

/// Matrix exponential of a symmetric matrix; the result is always SPD.
pub fn spd_exp(s: &SymmetricMatrix) -> Result<SpdMatrix> {
    let decomp = sym_eig(s)?;
    SpdMatrix::new(SymmetricMatrix::new(decomp.recompose(f64::exp))?)
}

/// Log-Euclidean metric `||log A - log B||_F`, the surrogate geodesic
/// distance used throughout.
pub fn lem_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(MendrError::ShapeError(format!(
            "lem_distance dims {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let la = spd_log(a)?;
    let lb = spd_log(b)?;
    Ok(frobenius(&(la.as_array() - lb.as_array())))
}

/// Log-Euclidean mean `exp((1/k) sum log A_l)`.
///
/// Summands are accumulated in a canonical order (bytewise-lexicographic on
/// the log matrices) so the result is bit-identical under any permutation of
/// the input list.
pub fn log_euclidean_mean(ms: &[SpdMatrix]) -> Result<SpdMatrix> {
    if ms.is_empty() {
        return Err(MendrError::InvalidInput(
            "log_euclidean_mean of an empty list".into(),
        ));
    }
    let dim = ms[0].dim();
    let mut logs = Vec::with_capacity(ms.len());
    for m in ms {
        if m.dim() != dim {
            return Err(MendrError::ShapeError(format!(
                "log_euclidean_mean dims {} vs {}",
                dim,
                m.dim()
            )));
        }
        logs.push(spd_log(m)?.into_array());
    }
    logs.sort_by(|x, y| {
        for (a, b) in x.iter().zip(y.iter()) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    });
    let mut acc: Array2<f64> = Array2::zeros((dim, dim));
    for l in &logs {
        acc += l;
    }
    acc.mapv_inplace(|v| v / ms.len() as f64);
    spd_exp(&SymmetricMatrix::new(acc)?)
}

/// Sample covariance matrix `X X^T / (T-1)` with a diagonal `TRACE_EPS`
/// jitter, then trace normalization. SPD even for rank-deficient `X`.
pub fn scm(x: &Array2<f64>) -> Result<SpdMatrix> {
    let (c, t) = x.dim();
    if t < 2 {
        return Err(MendrError::InvalidInput(format!(
            "scm needs at least 2 samples, got {t}"
        )));
    }
    let mut cov = x.dot(&x.t());
    cov.mapv_inplace(|v| v / (t - 1) as f64);
    for i in 0..c {
        cov[[i, i]] += TRACE_EPS;
    }
    batch_trace_norm(&SpdMatrix::new(SymmetricMatrix::new(cov)?)?)
}

/// Trace normalization `A / (tr(A) + eps) + eps I`, the manifold analogue of
/// layer normalization here.
pub fn batch_trace_norm(a: &SpdMatrix) -> Result<SpdMatrix> {
    let n = a.dim();
    let denom = a.trace() + TRACE_EPS;
    let mut out = a.as_array().mapv(|v| v / denom);
    for i in 0..n {
        out[[i, i]] += TRACE_EPS;
    }
    SpdMatrix::new(SymmetricMatrix::new(out)?)
}

/// Riemannian residual connection `exp(log A + log B)`: addition in the
/// tangent space, re-projected onto the manifold. Commutative in (A, B).
pub fn riemannian_residual(a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    if a.dim() != b.dim() {
        return Err(MendrError::ShapeError(format!(
            "riemannian_residual dims {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let sum = spd_log(a)?.into_array() + spd_log(b)?.into_array();
    spd_exp(&SymmetricMatrix::new(sum)?)
}

/// Similarity `1 / (1 + log(1 + d_L(A, B)))`, a strictly decreasing function
/// of Log-Euclidean distance with range (0, 1].
pub fn manifold_sim(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    let d = lem_distance(a, b)?;
    Ok(sim_from_distance(d))
}

pub fn sim_from_distance(d: f64) -> f64 {
    1.0 / (1.0 + (1.0 + d).ln())
}

/// Extracts the top-k ellipsoid axes of `{x : x^T A x = 1}`, descending by
/// eigenvalue; the axis paired with eigenvalue `lambda` has full length
/// `2 / sqrt(lambda)`.
pub fn ellipsoid_axes(a: &SpdMatrix, k: usize) -> Result<Ellipsoid> {
    let n = a.dim();
    if k > n {
        return Err(MendrError::InvalidInput(format!(
            "ellipsoid_axes k={k} exceeds dim {n}"
        )));
    }
    let decomp = sym_eig(a.as_sym())?;
    let mut axis_lengths = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    let mut axis_directions = Array2::zeros((n, k));
    for j in 0..k {
        let lambda = decomp.eigenvalues[j];
        if lambda <= 0.0 {
            return Err(MendrError::NotPositiveDefinite { min_eig: lambda });
        }
        axis_lengths.push(2.0 / lambda.sqrt());
        eigenvalues.push(lambda);
        for i in 0..n {
            axis_directions[[i, j]] = decomp.eigenvectors[[i, j]];
        }
    }
    Ok(Ellipsoid {
        axis_lengths,
        axis_directions,
        eigenvalues,
        top_k: k,
    })
}
