//! The (D,E)-inverse, the inverse along `D`, and the one-sided families.
//!
//! `X = A^{‖(D,E)}` is the unique `m × n` matrix with
//! `XAD = D`, `EAX = E`, `R(X) ⊆ R(D)` and `K(E) ⊆ K(X)`. Five independent
//! algorithms are provided; [`bc_inverse`] dispatches between them and by
//! default cross-checks the SVD route against the Moore-Penrose formula.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::existence::{along_report, check_shapes, existence_report, ExistenceReport};
use crate::linalg::{self, Tolerance};
use crate::matrix::{CMatrix, C64};

/// Acceptance bound on defining-equation residuals, relative to [`problem_scale`].
pub const RESIDUAL_BOUND: f64 = 1e-9;
/// Looser residual bound for the elimination route.
pub const ELIMINATION_RESIDUAL_BOUND: f64 = 1e-8;
/// Maximal allowed disagreement between the default method and its cross-check.
pub const CROSS_CHECK_BOUND: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// `D (EAD)† E`.
    #[serde(rename = "mp")]
    MpFormula,
    /// `D₁ (E₂AD₁)⁻¹ E₂` from full-rank factorizations.
    #[serde(rename = "frf")]
    FrfFormula,
    /// `[v 0] [Av w]⁻¹` from bases of `R(D)` and `K(E)`.
    #[serde(rename = "basis")]
    BasisMethod,
    /// `PEADQ = I_r ⊕ 0` with `P`, `Q` from the SVD of `EAD`.
    #[serde(rename = "svdpq")]
    SvdPQ,
    /// Same normal form, reached by Gauss-Jordan elimination.
    #[serde(rename = "elim")]
    Elimination,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::MpFormula,
        Method::FrfFormula,
        Method::BasisMethod,
        Method::SvdPQ,
        Method::Elimination,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::MpFormula => "mp",
            Method::FrfFormula => "frf",
            Method::BasisMethod => "basis",
            Method::SvdPQ => "svdpq",
            Method::Elimination => "elim",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method `{s}`")))
    }
}

/// Frobenius residuals of the four defining conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖XAD − D‖_F`
    pub xad_d: f64,
    /// `‖EAX − E‖_F`
    pub eax_e: f64,
    /// `‖(I − P_{R(D)}) X‖_F`
    pub range_gap: f64,
    /// `‖X · null_basis(E)‖_F`
    pub kernel_gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.xad_d
            .max(self.eax_e)
            .max(self.range_gap)
            .max(self.kernel_gap)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InverseResult {
    pub x: CMatrix,
    pub method: Method,
    /// Effective rank `r = rk(D) = rk(E) = rk(EAD)`.
    pub r: usize,
    pub residuals: Residuals,
    /// `max(1, σ_max(A)·σ_max(D), σ_max(E))`; all bounds are relative to it.
    pub scale: f64,
}

/// `max(1, σ_max(A)·σ_max(D), σ_max(E))`.
pub fn problem_scale(a: &CMatrix, d: &CMatrix, e: &CMatrix) -> f64 {
    let sa = linalg::spectral_norm(a);
    let sd = linalg::spectral_norm(d);
    let se = linalg::spectral_norm(e);
    1.0_f64.max(sa * sd).max(se)
}

/// Residuals of the defining conditions for an arbitrary candidate `X`.
pub fn residuals(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    x: &CMatrix,
    tol: &Tolerance,
) -> Result<Residuals> {
    check_shapes(a, d, e)?;
    if x.shape() != d.shape() {
        return Err(Error::Shape(format!(
            "candidate is {}x{}, expected {}x{}",
            x.rows(),
            x.cols(),
            d.rows(),
            d.cols()
        )));
    }
    x.ensure_finite("X")?;
    let xa = x * a;
    let ax = a * x;
    let q = linalg::range_basis(d, tol)?;
    let off_range = x - &(&q * &(&q.adjoint() * x));
    let kernel = linalg::null_basis(e, tol)?;
    Ok(Residuals {
        xad_d: (&xa * d).distance(d),
        eax_e: (e * &ax).distance(e),
        range_gap: off_range.frobenius_norm(),
        kernel_gap: (x * &kernel).frobenius_norm(),
    })
}

fn finish(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    x: CMatrix,
    method: Method,
    r: usize,
    tol: &Tolerance,
) -> Result<InverseResult> {
    let residuals = residuals(a, d, e, &x, tol)?;
    Ok(InverseResult {
        x,
        method,
        r,
        residuals,
        scale: problem_scale(a, d, e),
    })
}

fn require_two_sided(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
) -> Result<ExistenceReport> {
    let rep = existence_report(a, d, e, tol)?;
    if rep.two_sided {
        Ok(rep)
    } else {
        Err(Error::NotInvertible(Box::new(rep)))
    }
}

/// `X = D (EAD)† E`.
pub fn bc_inverse_mp(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
) -> Result<InverseResult> {
    let rep = require_two_sided(a, d, e, tol)?;
    let ead = &(e * a) * d;
    let pinv = linalg::mp_inverse(&ead, tol)?;
    let x = &(d * &pinv) * e;
    finish(a, d, e, x, Method::MpFormula, rep.rk_ead, tol)
}

/// `X = D₁ (E₂AD₁)⁻¹ E₂` with `D = D₁D₂`, `E = E₁E₂` full-rank factorizations.
pub fn bc_inverse_frf(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
) -> Result<InverseResult> {
    check_shapes(a, d, e)?;
    let not_invertible = || -> Error {
        match existence_report(a, d, e, tol) {
            Ok(rep) => Error::NotInvertible(Box::new(rep)),
            Err(err) => err,
        }
    };
    let rd = linalg::rank_tol(d, tol)?;
    let re = linalg::rank_tol(e, tol)?;
    if rd != re {
        return Err(not_invertible());
    }
    if rd == 0 {
        return Err(Error::RankZero);
    }
    let dfac = linalg::full_rank_factorization(d, tol)?;
    let efac = linalg::full_rank_factorization(e, tol)?;
    let core = &(&efac.g * a) * &dfac.f;
    if linalg::rank_tol(&core, tol)? != rd {
        return Err(not_invertible());
    }
    let core_inv = linalg::inverse(&core).map_err(|_| not_invertible())?;
    let x = &(&dfac.f * &core_inv) * &efac.g;
    finish(a, d, e, x, Method::FrfFormula, rd, tol)
}

/// Same formula as [`bc_inverse_frf`], read as the unique member of the
/// coinciding left and right families when `rk(E₂) = rk(D₁) = rk(E₂AD₁)`.
pub fn unique_onesided_frf(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
) -> Result<InverseResult> {
    bc_inverse_frf(a, d, e, tol)
}

/// `X = [v₁…v_r 0…0] · [Av₁…Av_r w₁…w_{n−s}]⁻¹`, where `{vᵢ}` spans
/// `R(D)` and `{wⱼ}` spans `K(E)`. Singularity of the assembled matrix
/// is itself the non-existence verdict.
pub fn bc_inverse_basis(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
) -> Result<InverseResult> {
    check_shapes(a, d, e)?;
    let n = a.rows();
    let v = linalg::range_basis(d, tol)?;
    let w = linalg::null_basis(e, tol)?;
    let r = v.cols();
    let not_invertible = || -> Error {
        match existence_report(a, d, e, tol) {
            Ok(rep) => Error::NotInvertible(Box::new(rep)),
            Err(err) => err,
        }
    };
    if r + w.cols() != n {
        return Err(not_invertible());
    }
    let assembled = (a * &v).hstack(&w)?;
    if linalg::rank_tol(&assembled, tol)? < n {
        return Err(not_invertible());
    }
    let padded = v.hstack(&CMatrix::zeros(d.rows(), n - r))?;
    let x = linalg::solve_right(&assembled, &padded).map_err(|_| not_invertible())?;
    finish(a, d, e, x, Method::BasisMethod, r, tol)
}

/// Nonsingular `P` (`m × m`) and `Q` (`n × n`) with `P·EAD·Q = I_r ⊕ 0`.
#[derive(Debug, Clone)]
pub struct PQDecomposition {
    pub p: CMatrix,
    pub q: CMatrix,
    pub r: usize,
}

impl PQDecomposition {
    /// `‖P·EAD·Q − (I_r ⊕ 0)‖_F`.
    pub fn normal_form_residual(&self, ead: &CMatrix) -> f64 {
        let pq = &(&self.p * ead) * &self.q;
        let mut target = CMatrix::zeros(pq.rows(), pq.cols());
        for i in 0..self.r {
            target[(i, i)] = C64::new(1.0, 0.0);
        }
        pq.distance(&target)
    }
}

/// `P = (Σ^{-1/2} ⊕ I) U*`, `Q = V (Σ^{-1/2} ⊕ I)` from `EAD = U S V*`.
pub fn svd_pq_decomposition(ead: &CMatrix, tol: &Tolerance) -> Result<PQDecomposition> {
    let t = linalg::svd(ead)?;
    let r = t.rank(tol);
    let (m, n) = ead.shape();
    let mut p = t.u.adjoint();
    let mut q = t.v.clone();
    for k in 0..r {
        let w = 1.0 / t.s[k].sqrt();
        for j in 0..m {
            p[(k, j)] *= w;
        }
        for i in 0..n {
            q[(i, k)] *= w;
        }
    }
    Ok(PQDecomposition { p, q, r })
}

/// SVD route: `X = (DQ)[:, ..r] · (PE)[..r, :]`. Also returns `(P, Q)`.
pub fn bc_inverse_svd_pq(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
) -> Result<(InverseResult, PQDecomposition)> {
    let rep = require_two_sided(a, d, e, tol)?;
    let ead = &(e * a) * d;
    let pq = svd_pq_decomposition(&ead, tol)?;
    if pq.r != rep.rk_ead {
        return Err(Error::NotInvertible(Box::new(rep)));
    }
    let r = pq.r;
    let y = (d * &pq.q).columns(0, r);
    let xr = (&pq.p * e).row_block(0, r);
    let x = &y * &xr;
    Ok((finish(a, d, e, x, Method::SvdPQ, r, tol)?, pq))
}

/// Elimination route on the block matrix `[[EAD, E], [D, 0]]`.
///
/// Row operations (complete pivoting) bring the top block to
/// `[[W, X], [0, 0]]` with `W` in reduced echelon form; column operations
/// that move the pivot columns of `W` to the front and clear the rest turn
/// `W` into `[I_r 0]` and `D` into `[Y 0]`. The result is `Y·X`.
pub fn bc_inverse_elim(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
) -> Result<InverseResult> {
    let rep = require_two_sided(a, d, e, tol)?;
    let r = rep.rk_ead;
    let (m, n) = d.shape();
    let ead = &(e * a) * d;
    let floor = tol.threshold(m, n, linalg::spectral_norm(&ead));
    let mut top = ead.hstack(e)?;
    let mut pivot_cols: Vec<usize> = Vec::with_capacity(r);
    let mut is_pivot = vec![false; n];

    for k in 0..r {
        let mut best = (0.0, k, 0);
        for i in k..m {
            for j in (0..n).filter(|&j| !is_pivot[j]) {
                let v = top[(i, j)].norm();
                if v > best.0 {
                    best = (v, i, j);
                }
            }
        }
        let (pmag, pi, pj) = best;
        if pmag <= floor {
            return Err(Error::NotInvertible(Box::new(rep)));
        }
        if pi != k {
            for j in 0..2 * n {
                let tmp = top[(k, j)];
                top[(k, j)] = top[(pi, j)];
                top[(pi, j)] = tmp;
            }
        }
        let inv = C64::new(1.0, 0.0) / top[(k, pj)];
        for j in 0..2 * n {
            top[(k, j)] *= inv;
        }
        for i in (0..m).filter(|&i| i != k) {
            let f = top[(i, pj)];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..2 * n {
                let t = top[(k, j)];
                top[(i, j)] -= f * t;
            }
            top[(i, pj)] = C64::new(0.0, 0.0);
        }
        top[(k, pj)] = C64::new(1.0, 0.0);
        pivot_cols.push(pj);
        is_pivot[pj] = true;
    }

    // Column phase: the first r columns of DQ are the pivot columns of D;
    // the remaining columns of DQ vanish when the inverse exists.
    let x_block = top.block(0, n, r, n);
    let y = CMatrix::from_fn(m, r, |i, k| d[(i, pivot_cols[k])]);
    let x = &y * &x_block;
    finish(a, d, e, x, Method::Elimination, r, tol)
}

/// Runs a single method without acceptance checks.
pub fn compute_with(
    method: Method,
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
) -> Result<InverseResult> {
    match method {
        Method::MpFormula => bc_inverse_mp(a, d, e, tol),
        Method::FrfFormula => bc_inverse_frf(a, d, e, tol),
        Method::BasisMethod => bc_inverse_basis(a, d, e, tol),
        Method::SvdPQ => bc_inverse_svd_pq(a, d, e, tol).map(|(res, _)| res),
        Method::Elimination => bc_inverse_elim(a, d, e, tol),
    }
}

/// Dispatcher settings. Bounds are relative to [`problem_scale`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputeOptions {
    /// `None` selects [`Method::SvdPQ`] cross-checked against [`Method::MpFormula`].
    pub method: Option<Method>,
    pub residual_bound: f64,
    pub elimination_bound: f64,
    pub cross_check_bound: f64,
}

impl Default for ComputeOptions {
    fn default() -> Self {
        Self {
            method: None,
            residual_bound: RESIDUAL_BOUND,
            elimination_bound: ELIMINATION_RESIDUAL_BOUND,
            cross_check_bound: CROSS_CHECK_BOUND,
        }
    }
}

impl ComputeOptions {
    pub fn with_method(method: Method) -> Self {
        Self {
            method: Some(method),
            ..Self::default()
        }
    }
}

/// Computes `A^{‖(D,E)}` and rejects results whose defining residuals
/// exceed the configured bound.
pub fn bc_inverse(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
    opts: &ComputeOptions,
) -> Result<InverseResult> {
    let res = match opts.method {
        Some(method) => compute_with(method, a, d, e, tol)?,
        None => {
            let (primary, check) = rayon::join(
                || compute_with(Method::SvdPQ, a, d, e, tol),
                || compute_with(Method::MpFormula, a, d, e, tol),
            );
            let (primary, check) = (primary?, check?);
            let disagreement = primary.x.distance(&check.x);
            let bound = opts.cross_check_bound * primary.scale;
            if disagreement > bound {
                return Err(Error::CrossCheckFailed {
                    disagreement,
                    bound,
                });
            }
            primary
        }
    };
    let rel = if res.method == Method::Elimination {
        opts.elimination_bound
    } else {
        opts.residual_bound
    };
    let bound = rel * res.scale;
    if res.residuals.max() > bound {
        return Err(Error::ResidualCheckFailed {
            residuals: res.residuals,
            bound,
        });
    }
    Ok(res)
}

/// `A^{‖D}`, the (D,D)-inverse.
pub fn inverse_along(
    a: &CMatrix,
    d: &CMatrix,
    tol: &Tolerance,
    opts: &ComputeOptions,
) -> Result<InverseResult> {
    let rep = along_report(a, d, tol)?;
    if !rep.two_sided {
        return Err(Error::NotInvertible(Box::new(rep)));
    }
    bc_inverse(a, d, d, tol, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            _ => Err(Error::InvalidInput(format!("unknown side `{s}`"))),
        }
    }
}

/// Parameterization of all left or right (D,E)-inverses.
///
/// * Right: `member(Z) = D[(EAD)†E + (I_n − (EAD)†EAD) Z]`, `Z` is `n × n`.
/// * Left: `member(Z) = [D(EAD)† + Z(I_m − EAD(EAD)†)] E`, `Z` is `m × m`.
///
/// Stored as `base + anchor·projector·Z` (right) or
/// `base + Z·projector·anchor` (left), with `base = D(EAD)†E`.
#[derive(Debug, Clone)]
pub struct OneSidedFamily {
    pub side: Side,
    pub base: CMatrix,
    pub projector: CMatrix,
    pub anchor: CMatrix,
}

impl OneSidedFamily {
    /// Shape of the free parameter `Z`.
    pub fn parameter_shape(&self) -> (usize, usize) {
        let k = self.projector.rows();
        (k, k)
    }

    pub fn member(&self, z: &CMatrix) -> Result<CMatrix> {
        if z.shape() != self.parameter_shape() {
            let (k, _) = self.parameter_shape();
            return Err(Error::Shape(format!(
                "parameter must be {k}x{k}, got {}x{}",
                z.rows(),
                z.cols()
            )));
        }
        z.ensure_finite("Z")?;
        let free = match self.side {
            Side::Right => &self.anchor * &(&self.projector * z),
            Side::Left => &(z * &self.projector) * &self.anchor,
        };
        Ok(&self.base + &free)
    }
}

pub fn onesided_family(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
    side: Side,
) -> Result<OneSidedFamily> {
    let rep = existence_report(a, d, e, tol)?;
    let ok = match side {
        Side::Left => rep.left,
        Side::Right => rep.right,
    };
    if !ok {
        return Err(Error::NotOneSidedInvertible(Box::new(rep)));
    }
    let ead = &(e * a) * d;
    let pinv = linalg::mp_inverse(&ead, tol)?;
    let base = &(d * &pinv) * e;
    let (projector, anchor) = match side {
        Side::Right => {
            let n = ead.cols();
            (&CMatrix::identity(n) - &(&pinv * &ead), d.clone())
        }
        Side::Left => {
            let m = ead.rows();
            (&CMatrix::identity(m) - &(&ead * &pinv), e.clone())
        }
    };
    Ok(OneSidedFamily {
        side,
        base,
        projector,
        anchor,
    })
}

/// Residuals of the one-sided defining conditions for a candidate `X`:
/// right: `(‖EAX − E‖, ‖(I − P_{R(D)})X‖)`; left: `(‖XAD − D‖, ‖X·null_basis(E)‖)`.
pub fn onesided_residuals(
    side: Side,
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    x: &CMatrix,
    tol: &Tolerance,
) -> Result<(f64, f64)> {
    let r = residuals(a, d, e, x, tol)?;
    Ok(match side {
        Side::Right => (r.eax_e, r.range_gap),
        Side::Left => (r.xad_d, r.kernel_gap),
    })
}
