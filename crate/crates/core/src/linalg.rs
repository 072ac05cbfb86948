//! Tolerance-aware dense linear algebra.
//!
//! Everything here works on `nalgebra::DMatrix<f64>`; decompositions are
//! delegated to `faer`. Rank decisions use a
//! singular-value cutoff relative to a scale (by default the largest singular
//! value of the matrix itself); callers that form a matrix as a difference of
//! larger terms pass the scale of those terms instead, so that cancellation
//! noise is not mistaken for rank.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;

/// Rank cutoff and residual threshold shared by every numerical decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative singular-value cutoff factor. A singular value is treated as
    /// zero when it is at most `rel * max(rows, cols) * scale`.
    pub rel: f64,
    /// Absolute threshold for residual verification (max-norm).
    pub abs_residual: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-10,
            abs_residual: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs_residual: f64) -> Result<Self> {
        if !(rel.is_finite() && rel > 0.0 && abs_residual.is_finite() && abs_residual > 0.0) {
            return Err(Error::PreconditionViolated(format!(
                "tolerances must be positive and finite (rel={rel}, abs_residual={abs_residual})"
            )));
        }
        Ok(Tolerance { rel, abs_residual })
    }

    pub fn cutoff(&self, rows: usize, cols: usize, scale: f64) -> f64 {
        self.rel * rows.max(cols).max(1) as f64 * scale
    }
}

pub fn max_norm(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn all_finite(m: &RealMatrix) -> bool {
    m.iter().all(|v| v.is_finite())
}

pub fn symmetrize(m: &RealMatrix) -> RealMatrix {
    (m + m.transpose()) * 0.5
}

/// Largest entry of `|M - Mᵀ|`.
pub fn asymmetry(m: &RealMatrix) -> f64 {
    max_norm(&(m - m.transpose()))
}

pub(crate) fn to_faer(m: &RealMatrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub(crate) fn from_faer(m: faer::MatRef<'_, f64>) -> RealMatrix {
    RealMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD that tolerates empty matrices. Singular values come back in
/// nonincreasing order.
fn svd_parts(m: &RealMatrix) -> (RealMatrix, DVector<f64>, RealMatrix) {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return (
            RealMatrix::zeros(r, 0),
            DVector::zeros(0),
            RealMatrix::zeros(0, c),
        );
    }
    let svd = to_faer(m).thin_svd().expect("SVD did not converge");
    let s = svd.S().column_vector();
    (
        from_faer(svd.U()),
        DVector::from_fn(k, |i, _| s[i]),
        from_faer(svd.V()).transpose(),
    )
}

/// The `count` right singular vectors of `m` belonging to its smallest
/// singular values, as columns.
pub(crate) fn trailing_right_singular_vectors(m: &RealMatrix, count: usize) -> RealMatrix {
    let c = m.ncols();
    let square = if m.nrows() < c {
        let mut p = RealMatrix::zeros(c, c);
        p.view_mut((0, 0), m.shape()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (_, _, v_t) = svd_parts(&square);
    v_t.rows(c - count, count).transpose()
}

/// Eigenvalues of a general real square matrix as `(re, im)` pairs.
pub fn eigenvalues(m: &RealMatrix) -> Vec<(f64, f64)> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    to_faer(m)
        .eigenvalues()
        .expect("eigensolver did not converge")
        .into_iter()
        .map(|z| (z.re, z.im))
        .collect()
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &RealMatrix) -> f64 {
    eigenvalues(m)
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .fold(0.0, f64::max)
}

pub fn singular_values(m: &RealMatrix) -> Vec<f64> {
    if m.nrows().min(m.ncols()) == 0 {
        return Vec::new();
    }
    to_faer(m).singular_values().expect("SVD did not converge")
}

pub fn spectral_norm(m: &RealMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn rank(m: &RealMatrix, tol: &Tolerance) -> usize {
    rank_scaled(m, spectral_norm(m), tol)
}

/// Rank with the cutoff taken relative to an explicit `scale`.
pub fn rank_scaled(m: &RealMatrix, scale: f64, tol: &Tolerance) -> usize {
    let cut = tol.cutoff(m.nrows(), m.ncols(), scale);
    singular_values(m).iter().filter(|&&s| s > cut).count()
}

/// Moore-Penrose pseudo-inverse via SVD.
pub fn pinv(m: &RealMatrix, tol: &Tolerance) -> RealMatrix {
    pinv_scaled(m, spectral_norm(m), tol)
}

pub fn pinv_scaled(m: &RealMatrix, scale: f64, tol: &Tolerance) -> RealMatrix {
    let (r, c) = m.shape();
    let (u, s, v_t) = svd_parts(m);
    let cut = tol.cutoff(r, c, scale);
    let mut out = RealMatrix::zeros(c, r);
    for (i, &sv) in s.iter().enumerate() {
        if sv > cut {
            out += v_t.row(i).transpose() * u.column(i).transpose() / sv;
        }
    }
    out
}

/// Orthonormal basis of `ker M`, one column per kernel dimension.
///
/// The returned basis is canonical for the subspace: it only depends on the
/// orthogonal projector onto `ker M`, so two matrices with the same kernel
/// yield the same basis.
pub fn kernel_basis(m: &RealMatrix, tol: &Tolerance) -> RealMatrix {
    kernel_basis_scaled(m, spectral_norm(m), tol)
}

pub fn kernel_basis_scaled(m: &RealMatrix, scale: f64, tol: &Tolerance) -> RealMatrix {
    let (r, c) = m.shape();
    if c == 0 {
        return RealMatrix::zeros(0, 0);
    }
    // Pad wide matrices so the thin SVD carries a full right basis.
    let square = if r < c {
        let mut p = RealMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let cut = tol.cutoff(r, c, scale);
    let (_, s, v_t) = svd_parts(&square);
    let null: Vec<DVector<f64>> = s
        .iter()
        .enumerate()
        .filter(|(_, &sv)| sv <= cut)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if null.is_empty() {
        return RealMatrix::zeros(c, 0);
    }
    let k = RealMatrix::from_columns(&null);
    canonical_basis(&(&k * k.transpose()), null.len())
}

/// Orthonormal basis of `im M` after rank truncation.
pub fn range_basis(m: &RealMatrix, tol: &Tolerance) -> RealMatrix {
    range_basis_scaled(m, spectral_norm(m), tol)
}

pub fn range_basis_scaled(m: &RealMatrix, scale: f64, tol: &Tolerance) -> RealMatrix {
    let (r, c) = m.shape();
    let cut = tol.cutoff(r, c, scale);
    let (u, s, _) = svd_parts(m);
    let cols: Vec<DVector<f64>> = s
        .iter()
        .enumerate()
        .filter(|(_, &sv)| sv > cut)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        return RealMatrix::zeros(r, 0);
    }
    let k = RealMatrix::from_columns(&cols);
    canonical_basis(&(&k * k.transpose()), cols.len())
}

/// Deterministic orthonormal basis of the range of an orthogonal projector.
///
/// Columns of the projector are orthogonalized greedily (largest residual
/// first, ties to the lower index), then sorted by the coordinate axis that
/// generated them. Axis-aligned subspaces therefore come back as unit vectors.
fn canonical_basis(projector: &RealMatrix, dim: usize) -> RealMatrix {
    let n = projector.nrows();
    let mut picked: Vec<(usize, DVector<f64>)> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for i in 0..n {
            if picked.iter().any(|(j, _)| *j == i) {
                continue;
            }
            let mut v: DVector<f64> = projector.column(i).into_owned();
            for _ in 0..2 {
                for (_, q) in &picked {
                    let d = q.dot(&v);
                    v.axpy(-d, q, 1.0);
                }
            }
            let norm = v.norm();
            let better = match &best {
                None => true,
                Some((_, _, bn)) => norm > bn * (1.0 + 1e-9),
            };
            if better {
                best = Some((i, v, norm));
            }
        }
        let (i, v, norm) = best.expect("projector rank below requested dimension");
        picked.push((i, v / norm));
    }
    picked.sort_by_key(|(i, _)| *i);
    if picked.is_empty() {
        return RealMatrix::zeros(n, 0);
    }
    let cols: Vec<DVector<f64>> = picked.into_iter().map(|(_, v)| v).collect();
    RealMatrix::from_columns(&cols)
}

/// Deviation of `WᵀW` from the identity in max-norm.
pub fn orthonormality_defect(w: &RealMatrix) -> f64 {
    let k = w.ncols();
    max_norm(&(w.transpose() * w - RealMatrix::identity(k, k)))
}

/// Completes orthonormal columns `W` to a square orthogonal `[W₁ | W]`.
///
/// The given columns sit last.
pub fn orthonormal_extension(w: &RealMatrix, tol: &Tolerance) -> Result<RealMatrix> {
    let (n, k) = w.shape();
    if k > n {
        return Err(Error::DimensionMismatch(format!(
            "cannot extend {k} columns in dimension {n}"
        )));
    }
    let defect = orthonormality_defect(w);
    if defect > tol.abs_residual {
        return Err(Error::NotOrthonormal(defect));
    }
    let complement_proj = RealMatrix::identity(n, n) - w * w.transpose();
    let w1 = canonical_basis(&complement_proj, n - k);
    let mut out = RealMatrix::zeros(n, n);
    out.view_mut((0, 0), (n, n - k)).copy_from(&w1);
    out.view_mut((0, n - k), (n, k)).copy_from(w);
    Ok(out)
}

/// `ker A ⊆ ker B`, tested as `‖B(I − A†A)‖_max ≤ abs_residual`.
pub fn ker_included(a: &RealMatrix, b: &RealMatrix, tol: &Tolerance) -> Result<bool> {
    ker_included_scaled(a, b, spectral_norm(a), tol)
}

/// Like [`ker_included`] but with the rank cutoff for `A†` taken relative to
/// `scale`.
pub fn ker_included_scaled(
    a: &RealMatrix,
    b: &RealMatrix,
    scale: f64,
    tol: &Tolerance,
) -> Result<bool> {
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "ker_included: A has {} columns, B has {}",
            a.ncols(),
            b.ncols()
        )));
    }
    let q = a.ncols();
    let proj = RealMatrix::identity(q, q) - pinv_scaled(a, scale, tol) * a;
    Ok(max_norm(&(b * proj)) <= tol.abs_residual)
}

/// Smallest eigenvalue of the symmetric part of a square matrix.
pub fn min_sym_eigenvalue(m: &RealMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    to_faer(&symmetrize(m))
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("symmetric eigensolver did not converge")
        .first()
        .copied()
        .unwrap_or(0.0)
}

pub fn is_psd(m: &RealMatrix, tol: &Tolerance) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::NotSquare(format!("{}x{}", m.nrows(), m.ncols())));
    }
    Ok(min_sym_eigenvalue(m) >= -tol.abs_residual)
}

/// Solves `A X = B` by LU; `None` when `A` is singular.
pub fn solve(a: &RealMatrix, b: &RealMatrix) -> Option<RealMatrix> {
    if a.nrows() == 0 {
        return Some(RealMatrix::zeros(0, b.ncols()));
    }
    a.clone().lu().solve(b)
}

/// Block of `m` starting at `(r, c)` with the given shape, as an owned matrix.
pub fn block(m: &RealMatrix, r: usize, c: usize, rows: usize, cols: usize) -> RealMatrix {
    m.view((r, c), (rows, cols)).into_owned()
}

/// Places `blocks` (row-major grid) into one matrix.
pub fn assemble(blocks: &[&[&RealMatrix]]) -> RealMatrix {
    let rows: usize = blocks.iter().map(|row| row[0].nrows()).sum();
    let cols: usize = blocks[0].iter().map(|b| b.ncols()).sum();
    let mut out = RealMatrix::zeros(rows, cols);
    let mut r0 = 0;
    for row in blocks {
        let mut c0 = 0;
        let h = row[0].nrows();
        for b in row.iter() {
            debug_assert_eq!(b.nrows(), h);
            out.view_mut((r0, c0), b.shape()).copy_from(*b);
            c0 += b.ncols();
        }
        r0 += h;
    }
    out
}
