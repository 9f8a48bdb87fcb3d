//! Slow, SVD-free reference constructions used to cross-examine the
//! production algorithms.
//!
//! Bases come from modified Gram-Schmidt with re-orthogonalization and the
//! linear systems from textbook Gaussian elimination, so none of this shares
//! code with [`crate::linalg`].

use crate::matrix::{CMatrix, C64};

fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn norm(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal vectors spanning the given candidates, dropping any whose
/// residual after projection is at most `drop` times its original norm.
fn gram_schmidt(basis: &mut Vec<Vec<C64>>, candidates: impl Iterator<Item = Vec<C64>>, drop: f64) {
    for mut v in candidates {
        let original = norm(&v);
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in basis.iter() {
                let c = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let left = norm(&v);
        if left > drop * original {
            basis.push(v.into_iter().map(|z| z / left).collect());
        }
    }
}

fn from_columns(dim: usize, cols: &[Vec<C64>]) -> CMatrix {
    CMatrix::from_fn(dim, cols.len(), |i, j| cols[j][i])
}

/// Orthonormal basis of the column space, built column by column.
pub fn column_space(h: &CMatrix, drop: f64) -> CMatrix {
    let mut basis = Vec::new();
    gram_schmidt(&mut basis, (0..h.cols()).map(|j| h.column(j)), drop);
    from_columns(h.rows(), &basis)
}

/// Orthonormal basis of the kernel: the complement of the row space.
pub fn kernel(h: &CMatrix, drop: f64) -> CMatrix {
    let n = h.cols();
    let mut basis = Vec::new();
    gram_schmidt(
        &mut basis,
        (0..h.rows()).map(|i| (0..n).map(|j| h[(i, j)].conj()).collect()),
        drop,
    );
    let row_rank = basis.len();
    let axes = (0..n).map(|k| {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[k] = C64::new(1.0, 0.0);
        e
    });
    gram_schmidt(&mut basis, axes, 0.5);
    from_columns(n, &basis[row_rank..])
}

/// Solves `M x = b` for square `M` by Gaussian elimination with partial
/// pivoting; `None` if a pivot vanishes.
pub fn gauss_solve(m: &CMatrix, b: &[C64]) -> Option<Vec<C64>> {
    let n = m.rows();
    assert!(m.is_square() && b.len() == n);
    let mut aug: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| m[(i, j)])
                .chain(std::iter::once(b[i]))
                .collect()
        })
        .collect();
    let scale = m.max_abs();
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| aug[x][k].norm().total_cmp(&aug[y][k].norm()))?;
        if aug[p][k].norm() <= 1e-13 * scale {
            return None;
        }
        aug.swap(k, p);
        for i in k + 1..n {
            let f = aug[i][k] / aug[k][k];
            for j in k..=n {
                let t = aug[k][j];
                aug[i][j] -= f * t;
            }
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let s: C64 = (i + 1..n).map(|j| aug[i][j] * x[j]).sum();
        x[i] = (aug[i][n] - s) / aug[i][i];
    }
    Some(x)
}

/// The (D,E)-inverse assembled from its prescribed action: `X(Av) = v` for
/// `v` in `R(D)` and `Xw = 0` for `w` in `K(E)`. Each row of `X` is solved
/// separately. `None` when the prescribed action is inconsistent.
pub fn column_wise_inverse(a: &CMatrix, d: &CMatrix, e: &CMatrix, drop: f64) -> Option<CMatrix> {
    let n = a.rows();
    let v = column_space(d, drop);
    let w = kernel(e, drop);
    if v.cols() + w.cols() != n {
        return None;
    }
    let av = a * &v;
    // Row i of X solves  x_i · [Av w] = [v_i 0],  i.e.  [Av w]ᵀ x_iᵀ = [v_i 0]ᵀ.
    let system = CMatrix::from_fn(n, n, |i, j| {
        if i < v.cols() {
            av[(j, i)]
        } else {
            w[(j, i - v.cols())]
        }
    });
    let mut x = CMatrix::zeros(d.rows(), n);
    for i in 0..d.rows() {
        let mut rhs = vec![C64::new(0.0, 0.0); n];
        for k in 0..v.cols() {
            rhs[k] = v[(i, k)];
        }
        let row = gauss_solve(&system, &rhs)?;
        for (j, val) in row.into_iter().enumerate() {
            x[(i, j)] = val;
        }
    }
    Some(x)
}
