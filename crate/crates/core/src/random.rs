//! Seeded generators for matrices and (D,E)-invertible instances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::existence::existence_report;
use crate::linalg::{singular_values, Tolerance};
use crate::matrix::{c64, CMatrix};

/// A problem triple: `A` is `n × m`, `D` and `E` are `m × n`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub a: CMatrix,
    pub d: CMatrix,
    pub e: CMatrix,
}

/// Deterministic source of random complex matrices.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn seeded(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        use rand::Rng;
        self.rng.random_range(lo..hi)
    }

    /// Entries with independent standard normal real and imaginary parts.
    pub fn matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            let re = self.normal();
            let im = self.normal();
            c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
    }

    pub fn real_matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| c64(self.normal(), 0.0))
    }

    /// Matrix of exact rank `r` with singular values drawn from `[1, 2]`.
    pub fn matrix_of_rank(&mut self, rows: usize, cols: usize, r: usize) -> CMatrix {
        assert!(r <= rows.min(cols));
        let left = self.orthonormal(rows, r);
        let right = self.orthonormal(cols, r);
        let mut scaled = left;
        for j in 0..r {
            let s = self.uniform(1.0, 2.0);
            for i in 0..rows {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * &right.adjoint()
    }

    /// `dim × k` matrix with orthonormal columns (Haar-like).
    pub fn orthonormal(&mut self, dim: usize, k: usize) -> CMatrix {
        assert!(k <= dim);
        let g = self.matrix(dim, k);
        crate::linalg::svd_unchecked(&g).u.columns(0, k)
    }

    /// Square matrix with singular values in `[1, cond]`.
    pub fn well_conditioned(&mut self, n: usize, cond: f64) -> CMatrix {
        let u = self.orthonormal(n, n);
        let v = self.orthonormal(n, n);
        let mut s = Vec::with_capacity(n);
        for _ in 0..n {
            s.push(self.uniform(1.0, cond));
        }
        &(&u * &CMatrix::diag_real(&s)) * &v.adjoint()
    }

    /// Hermitian positive definite with eigenvalues in `[1, cond]`.
    pub fn spd(&mut self, n: usize, cond: f64) -> CMatrix {
        let u = self.orthonormal(n, n);
        let mut s = Vec::with_capacity(n);
        for _ in 0..n {
            s.push(self.uniform(1.0, cond));
        }
        &(&u * &CMatrix::diag_real(&s)) * &u.adjoint()
    }

    /// `S · (B ⊕ N) · S⁻¹` with `B` nonsingular of size `n − nil` and `N`
    /// a single nilpotent Jordan block of size `nil`; the index is `nil`.
    /// `unitary` picks `S` unitary.
    pub fn similar_to_block(&mut self, n: usize, nil: usize, unitary: bool) -> CMatrix {
        assert!(nil <= n);
        let core = n - nil;
        let b = self.well_conditioned(core, 4.0);
        let mut inner = CMatrix::zeros(n, n);
        inner.set_block(0, 0, &b);
        for k in core..n.saturating_sub(1) {
            inner[(k, k + 1)] = c64(1.0, 0.0);
        }
        if unitary {
            let u = self.orthonormal(n, n);
            &(&u * &inner) * &u.adjoint()
        } else {
            let s = self.well_conditioned(n, 4.0);
            let s_inv = crate::linalg::inverse(&s).expect("well-conditioned matrix is invertible");
            &(&s * &inner) * &s_inv
        }
    }

    /// EP matrix of rank `r`: `U (B ⊕ 0) U*` with `U` unitary.
    pub fn ep_matrix(&mut self, n: usize, r: usize) -> CMatrix {
        let b = self.well_conditioned(r, 4.0);
        let mut inner = CMatrix::zeros(n, n);
        inner.set_block(0, 0, &b);
        let u = self.orthonormal(n, n);
        &(&u * &inner) * &u.adjoint()
    }

    /// Group-invertible but not EP, rank `r < n`: `S (B ⊕ 0) S⁻¹` with
    /// a generic nonsingular `S`.
    pub fn index_one_non_ep(&mut self, n: usize, r: usize) -> CMatrix {
        assert!(r < n);
        let b = self.well_conditioned(r, 4.0);
        let mut inner = CMatrix::zeros(n, n);
        inner.set_block(0, 0, &b);
        let s = self.well_conditioned(n, 4.0);
        let s_inv = crate::linalg::inverse(&s).expect("well-conditioned matrix is invertible");
        &(&s * &inner) * &s_inv
    }

    /// Existing instance with `rk(A) = rk(D) = rk(E) = r`: `A` has rank `r`
    /// and `D = A*WA*`, `E = A*W'A*` for generic `n × m` weights.
    pub fn inner_instance(&mut self, n: usize, m: usize, r: usize) -> Instance {
        let tol = Tolerance::default();
        loop {
            let a = self.matrix_of_rank(n, m, r);
            let w = self.matrix(n, m);
            let w2 = self.matrix(n, m);
            let star = a.adjoint();
            let d = &(&star * &w) * &star;
            let e = &(&star * &w2) * &star;
            let ok = existence_report(&a, &d, &e, &tol)
                .map(|rep| rep.two_sided && rep.rk_d == r)
                .unwrap_or(false);
            if ok {
                return Instance { a, d, e };
            }
        }
    }

    /// Random `(A, D, E)` with `rk(D) = rk(E) = rk(EAD) = r`, `A` of
    /// shape `n × m`, and `cond(EAD) ≤ max_cond`. Rejection sampled.
    pub fn existing_instance(&mut self, n: usize, m: usize, r: usize, max_cond: f64) -> Instance {
        let tol = Tolerance::default();
        loop {
            let a = self.matrix(n, m);
            let d = self.matrix_of_rank(m, n, r);
            let e = self.matrix_of_rank(m, n, r);
            let ead = &(&e * &a) * &d;
            let s = singular_values(&ead);
            if r > 0 && !(s[0] / s[r - 1] <= max_cond) {
                continue;
            }
            // Product round-off must stay well below the rank threshold.
            let rough = crate::linalg::spectral_norm(&a) * 4.0;
            if r > 0 && s[0] * 20.0 < rough {
                continue;
            }
            if existence_report(&a, &d, &e, &tol)
                .map(|rep| rep.two_sided)
                .unwrap_or(false)
            {
                return Instance { a, d, e };
            }
        }
    }
}
