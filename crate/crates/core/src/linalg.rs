//! Dense kernel: SVD, tolerance-based rank, Moore-Penrose inverse,
//! full-rank factorization, subspace bases and oblique projectors.
//!
//! The SVD is a one-sided (Hestenes) Jacobi iteration on the taller of
//! `A` and `A*`. It is slow compared to bidiagonalization but delivers
//! small singular values to high relative accuracy, and every
//! rank decision in the crate is made from its output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c64, CMatrix, C64};

const MAX_SWEEPS: usize = 80;

/// Two subspaces are treated as equal when their gap is at most this.
pub const GAP_THRESHOLD: f64 = 1e-8;

/// Rank-decision policy.
///
/// A singular value `σ` counts toward the rank iff
/// `σ > max(rel · σ_max, abs)`. When `rel` is `None` it defaults to
/// `max(rows, cols) · ε` for the matrix being ranked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: Option<f64>,
    pub abs: f64,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel >= 0.0 && rel.is_finite() && abs >= 0.0 && abs.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "bad tolerance rel={rel} abs={abs}"
            )));
        }
        Ok(Self {
            rel: Some(rel),
            abs,
        })
    }

    pub fn with_abs(self, abs: f64) -> Self {
        Self { abs, ..self }
    }

    /// Effective relative factor for a `rows × cols` matrix.
    pub fn rel_for(&self, rows: usize, cols: usize) -> f64 {
        self.rel
            .unwrap_or_else(|| rows.max(cols) as f64 * f64::EPSILON)
    }

    pub fn threshold(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        (self.rel_for(rows, cols) * sigma_max).max(self.abs)
    }

    /// Counts singular values (sorted nonincreasing) above the threshold.
    pub fn rank_of(&self, singular_values: &[f64], rows: usize, cols: usize) -> usize {
        let smax = singular_values.first().copied().unwrap_or(0.0);
        let thr = self.threshold(rows, cols, smax);
        singular_values.iter().take_while(|&&s| s > thr).count()
    }
}

/// Full singular value decomposition `A = U · diag(S) · V*`.
#[derive(Debug, Clone)]
pub struct SvdTriple {
    /// Unitary, `rows × rows`.
    pub u: CMatrix,
    /// Nonincreasing, length `min(rows, cols)`.
    pub s: Vec<f64>,
    /// Unitary, `cols × cols`.
    pub v: CMatrix,
}

impl SvdTriple {
    pub fn sigma_max(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self, tol: &Tolerance) -> usize {
        tol.rank_of(&self.s, self.u.rows(), self.v.rows())
    }

    pub fn threshold(&self, tol: &Tolerance) -> f64 {
        tol.threshold(self.u.rows(), self.v.rows(), self.sigma_max())
    }

    /// `U · diag(S) · V*`.
    pub fn reconstruct(&self) -> CMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut us = CMatrix::zeros(m, n);
        for (j, &sj) in self.s.iter().enumerate() {
            for i in 0..m {
                us[(i, j)] = self.u[(i, j)] * sj;
            }
        }
        &us * &self.v.adjoint()
    }
}

/// Column-major work copy used by the Jacobi sweeps.
fn columns_of(a: &CMatrix) -> Vec<Vec<C64>> {
    (0..a.cols()).map(|j| a.column(j)).collect()
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

fn rotate(x: &mut [C64], y: &mut [C64], c: f64, s_conj_phase: C64, s_phase: C64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = (*xi, *yi);
        *xi = a * c - s_conj_phase * b;
        *yi = s_phase * a + b * c;
    }
}

/// One-sided Jacobi on a matrix with `rows >= cols`.
fn jacobi_tall(a: &CMatrix) -> SvdTriple {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut cols = columns_of(a);
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) })
                .collect()
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = norm_sqr(&cols[p]);
                let beta = norm_sqr(&cols[q]);
                let g = dot(&cols[p], &cols[q]);
                let gabs = g.norm();
                if gabs == 0.0 || gabs <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = g / gabs;
                let zeta = (beta - alpha) / (2.0 * gabs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (sp, sc) = (phase * s, phase.conj() * s);
                let (lo, hi) = cols.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, sc, sp);
                let (lo, hi) = v.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, sc, sp);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(f64, usize)> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (norm_sqr(c).sqrt(), j))
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

    let s: Vec<f64> = order.iter().map(|&(sv, _)| sv).collect();
    let mut v_out = CMatrix::zeros(n, n);
    let mut u_cols: Vec<Vec<C64>> = Vec::with_capacity(m);
    for (k, &(_, j)) in order.iter().enumerate() {
        v_out.set_column(k, &v[j]);
    }
    for &(sv, j) in &order {
        if sv > 0.0 && sv.is_normal() {
            let inv = 1.0 / sv;
            let col: Vec<C64> = cols[j].iter().map(|z| z * inv).collect();
            if col.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                u_cols.push(col);
                continue;
            }
        }
        // Direction is undefined for a zero column; stop here and let the
        // completion step supply the rest of U.
        break;
    }
    complete_columns(&mut u_cols, m);
    let mut u = CMatrix::zeros(m, m);
    for (j, col) in u_cols.iter().enumerate() {
        u.set_column(j, col);
    }
    SvdTriple { u, s, v: v_out }
}

/// Extends orthonormal columns of length `dim` to a full orthonormal basis.
fn complete_columns(cols: &mut Vec<Vec<C64>>, dim: usize) {
    let mut used = vec![false; dim];
    while cols.len() < dim {
        // Pick the coordinate axis least represented by the current span.
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, &u) in used.iter().enumerate() {
            if u {
                continue;
            }
            let captured: f64 = cols.iter().map(|c| c[i].norm_sqr()).sum();
            let residual = 1.0 - captured;
            if residual > best.0 {
                best = (residual, i);
            }
        }
        let axis = best.1;
        used[axis] = true;
        let mut w = vec![c64(0.0, 0.0); dim];
        w[axis] = c64(1.0, 0.0);
        for _ in 0..2 {
            for c in cols.iter() {
                let h = dot(c, &w);
                for (wi, ci) in w.iter_mut().zip(c) {
                    *wi -= h * ci;
                }
            }
        }
        let nrm = norm_sqr(&w).sqrt();
        if nrm < 1e-8 {
            continue;
        }
        cols.push(w.into_iter().map(|z| z / nrm).collect());
    }
}

/// Full SVD of a finite matrix.
pub fn svd(a: &CMatrix) -> Result<SvdTriple> {
    a.ensure_finite("matrix")?;
    Ok(svd_unchecked(a))
}

pub(crate) fn svd_unchecked(a: &CMatrix) -> SvdTriple {
    if a.rows() >= a.cols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.adjoint());
        SvdTriple {
            u: t.v,
            s: t.s,
            v: t.u,
        }
    }
}

/// Singular values only, nonincreasing.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    svd_unchecked(a).s
}

/// Largest singular value (0 for empty matrices).
pub fn spectral_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Numerical rank at the given tolerance.
pub fn rank_tol(a: &CMatrix, tol: &Tolerance) -> Result<usize> {
    a.ensure_finite("matrix")?;
    Ok(tol.rank_of(&singular_values(a), a.rows(), a.cols()))
}

/// Numerical rank with the threshold additionally floored at `floor`,
/// for matrices whose own `σ_max` may be pure round-off.
pub fn rank_with_floor(a: &CMatrix, tol: &Tolerance, floor: f64) -> Result<usize> {
    a.ensure_finite("matrix")?;
    let s = singular_values(a);
    let thr = tol
        .threshold(a.rows(), a.cols(), s.first().copied().unwrap_or(0.0))
        .max(floor);
    Ok(s.iter().take_while(|&&v| v > thr).count())
}

/// Moore-Penrose inverse `V_r Σ_r⁻¹ U_r*`.
pub fn mp_inverse(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let t = svd(a)?;
    let r = t.rank(tol);
    let (m, n) = a.shape();
    let mut vs = CMatrix::zeros(n, r);
    for j in 0..r {
        let inv = 1.0 / t.s[j];
        for i in 0..n {
            vs[(i, j)] = t.v[(i, j)] * inv;
        }
    }
    let x = &vs * &t.u.columns(0, r).adjoint();
    debug_assert_eq!(x.shape(), (n, m));
    Ok(x)
}

/// `H = F·G` with `F` of full column rank and `G` of full row rank.
#[derive(Debug, Clone)]
pub struct FullRankFactorization {
    pub f: CMatrix,
    pub g: CMatrix,
    pub r: usize,
}

/// Compact-SVD factorization: `F = U_r` (orthonormal columns) and
/// `G = Σ_r V_r*`.
pub fn full_rank_factorization(a: &CMatrix, tol: &Tolerance) -> Result<FullRankFactorization> {
    let t = svd(a)?;
    let r = t.rank(tol);
    if r == 0 {
        return Err(Error::RankZero);
    }
    let f = t.u.columns(0, r);
    let mut g = t.v.columns(0, r).adjoint();
    for i in 0..r {
        for j in 0..g.cols() {
            g[(i, j)] *= t.s[i];
        }
    }
    Ok(FullRankFactorization { f, g, r })
}

/// Orthonormal basis of the column space (`rows × r`).
pub fn range_basis(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let t = svd(a)?;
    let r = t.rank(tol);
    Ok(t.u.columns(0, r))
}

/// Orthonormal basis of the null space (`cols × (cols − r)`).
pub fn null_basis(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let t = svd(a)?;
    let r = t.rank(tol);
    Ok(t.v.columns(r, a.cols() - r))
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// (orthonormal) columns of `q`.
pub fn orthogonal_complement(q: &CMatrix) -> CMatrix {
    let dim = q.rows();
    let mut cols = columns_of(q);
    let k = cols.len();
    complete_columns(&mut cols, dim);
    let mut out = CMatrix::zeros(dim, dim - k);
    for (j, c) in cols[k..].iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Sine of the largest principal angle between the spans of two
/// orthonormal bases. Subspaces of different dimension have gap 1.
pub fn subspace_gap(q1: &CMatrix, q2: &CMatrix) -> f64 {
    assert_eq!(
        q1.rows(),
        q2.rows(),
        "bases live in different ambient spaces"
    );
    if q1.cols() != q2.cols() {
        return 1.0;
    }
    if q1.cols() == 0 {
        return 0.0;
    }
    let residual = q1 - &(q2 * &(&q2.adjoint() * q1));
    spectral_norm(&residual).min(1.0)
}

/// LU factorization with partial pivoting, stored in place.
struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(format!(
                "LU of a {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let floor = a.max_abs() * f64::EPSILON * n as f64;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if pmax <= floor || pmax == 0.0 {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let l = lu[(i, k)] / pivot;
                lu[(i, k)] = l;
                if l != c64(0.0, 0.0) {
                    for j in (k + 1)..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= l * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    fn solve(&self, b: &CMatrix) -> CMatrix {
        let n = self.lu.rows();
        let mut x = CMatrix::from_fn(n, b.cols(), |i, j| b[(self.perm[i], j)]);
        for c in 0..b.cols() {
            for i in 0..n {
                let mut acc = x[(i, c)];
                for k in 0..i {
                    acc -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = x[(i, c)];
                for k in (i + 1)..n {
                    acc -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = acc / self.lu[(i, i)];
            }
        }
        x
    }
}

/// Solves `A·X = B` for square `A`.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::Shape(format!(
            "solve with {}x{} system and {} right-hand rows",
            a.rows(),
            a.cols(),
            b.rows()
        )));
    }
    Ok(Lu::factor(a)?.solve(b))
}

/// Solves `X·A = B` for square `A`.
pub fn solve_right(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    Ok(solve(&a.transpose(), &b.transpose())?.transpose())
}

/// Inverse of a square matrix.
pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    solve(a, &CMatrix::identity(a.rows()))
}

/// Oblique projector `P_{M,N}` onto `span(M)` along `span(N)`.
///
/// Computed as `M · (first block rows of [M N]⁻¹)`.
pub fn oblique_projector(m_basis: &CMatrix, n_basis: &CMatrix) -> Result<CMatrix> {
    let d = m_basis.rows();
    if n_basis.rows() != d {
        return Err(Error::Shape(format!(
            "bases live in C^{} and C^{}",
            m_basis.rows(),
            n_basis.rows()
        )));
    }
    if m_basis.cols() + n_basis.cols() != d {
        return Err(Error::NotComplementary);
    }
    if d == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let stacked = m_basis.hstack(n_basis)?;
    if rank_tol(&stacked, &Tolerance::default())? < d {
        return Err(Error::NotComplementary);
    }
    let y = inverse(&stacked).map_err(|_| Error::NotComplementary)?;
    let k = m_basis.cols();
    Ok(m_basis * &y.row_block(0, k))
}
