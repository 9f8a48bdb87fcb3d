//! Verification and representation experiments around the (D,E)-inverse:
//! projector structure, prescribed range and kernel, group-inverse and
//! limit representations, perturbation and differentiation along curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::existence::{check_shapes, existence_report};
use crate::inverse::{
    bc_inverse, problem_scale, residuals, ComputeOptions, InverseResult, Residuals,
};
use crate::linalg::{self, oblique_projector, subspace_gap, Tolerance, GAP_THRESHOLD};
use crate::matrix::CMatrix;
use crate::random::Sampler;
use crate::special::group_inverse;

/// `‖AXA − A‖` below this multiple of the problem scale counts as inner.
pub const INNER_BOUND: f64 = 1e-8;

/// Residuals of the four defining conditions for an arbitrary candidate.
pub fn verify_definition(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    x: &CMatrix,
    tol: &Tolerance,
) -> Result<Residuals> {
    residuals(a, d, e, x, tol)
}

fn default_inverse(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
) -> Result<InverseResult> {
    bc_inverse(a, d, e, tol, &ComputeOptions::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectorReport {
    /// `‖(XA)² − XA‖_F`
    pub xa_idempotent: f64,
    /// `‖(AX)² − AX‖_F`
    pub ax_idempotent: f64,
    #[serde(rename = "range_xa_eq_RD")]
    pub range_xa_eq_rd: f64,
    #[serde(rename = "kernel_ax_eq_KE")]
    pub kernel_ax_eq_ke: f64,
    #[serde(rename = "kernel_xa_eq_KEA")]
    pub kernel_xa_eq_kea: f64,
    #[serde(rename = "range_ax_eq_RAD")]
    pub range_ax_eq_rad: f64,
    /// `R(AD) = R(E*)`, i.e. `AX` is an orthogonal projector.
    pub ax_orthogonal: bool,
    /// `R(D) = R(A*E*)`, i.e. `XA` is an orthogonal projector.
    pub xa_orthogonal: bool,
    /// `rk(A) = rk(D)`.
    pub inner: bool,
    /// `‖XAX − X‖_F`
    pub outer_residual: f64,
    /// `‖AXA − A‖_F`
    pub inner_residual: f64,
    /// `‖AX − (AX)*‖_F`
    pub ax_hermitian_defect: f64,
    /// `‖XA − (XA)*‖_F`
    pub xa_hermitian_defect: f64,
    pub scale: f64,
}

pub fn outer_inner_report(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
) -> Result<ProjectorReport> {
    let res = default_inverse(a, d, e, tol)?;
    let x = &res.x;
    let ax = a * x;
    let xa = x * a;
    let ad = a * d;
    let ea = e * a;
    let range = |h: &CMatrix| linalg::range_basis(h, tol);
    let kernel = |h: &CMatrix| linalg::null_basis(h, tol);
    let rank_a = linalg::rank_tol(a, tol)?;
    let rank_d = linalg::rank_tol(d, tol)?;
    let ea_star = ea.adjoint();
    Ok(ProjectorReport {
        xa_idempotent: (&xa * &xa).distance(&xa),
        ax_idempotent: (&ax * &ax).distance(&ax),
        range_xa_eq_rd: subspace_gap(&range(&xa)?, &range(d)?),
        kernel_ax_eq_ke: subspace_gap(&kernel(&ax)?, &kernel(e)?),
        kernel_xa_eq_kea: subspace_gap(&kernel(&xa)?, &kernel(&ea)?),
        range_ax_eq_rad: subspace_gap(&range(&ax)?, &range(&ad)?),
        ax_orthogonal: subspace_gap(&range(&ad)?, &range(&e.adjoint())?) <= GAP_THRESHOLD,
        xa_orthogonal: subspace_gap(&range(d)?, &range(&ea_star)?) <= GAP_THRESHOLD,
        inner: rank_a == rank_d,
        outer_residual: (&xa * x).distance(x),
        inner_residual: (&ax * a).distance(a),
        ax_hermitian_defect: ax.hermitian_defect(),
        xa_hermitian_defect: xa.hermitian_defect(),
        scale: res.scale,
    })
}

/// `(rk A, rk D, rk(AXA − A))`; the first equals the sum of the others.
/// Singular values of `AXA − A` at most `INNER_BOUND · scale` are
/// treated as round-off.
pub fn rank_defect_identity(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
) -> Result<(usize, usize, usize)> {
    let res = default_inverse(a, d, e, tol)?;
    let defect = &(&(a * &res.x) * a) - a;
    let rk_defect = linalg::rank_with_floor(&defect, tol, INNER_BOUND * res.scale)?;
    Ok((
        linalg::rank_tol(a, tol)?,
        linalg::rank_tol(d, tol)?,
        rk_defect,
    ))
}

/// Carrier pair `(D̂, Ê)` with `R(D̂) = T` and `K(Ê) = S`, for `A: n × m`,
/// `T ⊆ ℂ^m`, `S ⊆ ℂ^n`. Fails unless `A(T) ⊕ S = ℂ^n`.
pub fn prescribed_pair(
    a: &CMatrix,
    t_basis: &CMatrix,
    s_basis: &CMatrix,
    tol: &Tolerance,
) -> Result<(CMatrix, CMatrix)> {
    let (n, m) = a.shape();
    if t_basis.rows() != m || s_basis.rows() != n {
        return Err(Error::Shape(format!(
            "A is {n}x{m}; T needs {m} rows and S needs {n} rows, got {} and {}",
            t_basis.rows(),
            s_basis.rows()
        )));
    }
    let t = linalg::range_basis(t_basis, tol)?;
    let s = linalg::range_basis(s_basis, tol)?;
    if t.cols() + s.cols() != n {
        return Err(Error::NotComplementary);
    }
    let image = (a * &t).hstack(&s)?;
    if linalg::rank_tol(&image, tol)? != n {
        return Err(Error::NotComplementary);
    }
    let mut d_hat = CMatrix::zeros(m, n);
    d_hat.set_block(0, 0, &t);
    let mut e_hat = CMatrix::zeros(m, n);
    e_hat.set_block(0, 0, &linalg::orthogonal_complement(&s).adjoint());
    Ok((d_hat, e_hat))
}

/// The outer inverse of `A` with range `T` and kernel `S`.
pub fn prescribed_outer(
    a: &CMatrix,
    t_basis: &CMatrix,
    s_basis: &CMatrix,
    tol: &Tolerance,
) -> Result<CMatrix> {
    let (d_hat, e_hat) = prescribed_pair(a, t_basis, s_basis, tol)?;
    Ok(default_inverse(a, &d_hat, &e_hat, tol)?.x)
}

/// `(‖AX − P_{R(AD),K(E)}‖_F, ‖XA − P_{R(D),K(EA)}‖_F)`.
pub fn projector_identities(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
) -> Result<(f64, f64)> {
    let x = default_inverse(a, d, e, tol)?.x;
    let ad = a * d;
    let ea = e * a;
    let p_left = oblique_projector(
        &linalg::range_basis(&ad, tol)?,
        &linalg::null_basis(e, tol)?,
    )?;
    let p_right = oblique_projector(
        &linalg::range_basis(d, tol)?,
        &linalg::null_basis(&ea, tol)?,
    )?;
    Ok(((a * &x).distance(&p_left), (&x * a).distance(&p_right)))
}

/// `G = D₁E₂` from full-rank factorizations `D = D₁D₂`, `E = E₁E₂`;
/// it has `R(G) = R(D)` and `K(G) = K(E)`.
pub fn default_carrier(d: &CMatrix, e: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let df = linalg::full_rank_factorization(d, tol)?;
    let ef = linalg::full_rank_factorization(e, tol)?;
    if df.r != ef.r {
        return Err(Error::SubspaceMismatch(format!(
            "rk(D)={} but rk(E)={}",
            df.r, ef.r
        )));
    }
    Ok(&df.f * &ef.g)
}

fn check_carrier(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    g: &CMatrix,
    tol: &Tolerance,
) -> Result<()> {
    check_shapes(a, d, e)?;
    if g.shape() != d.shape() {
        return Err(Error::Shape(format!("G must be {}x{}", d.rows(), d.cols())));
    }
    g.ensure_finite("G")?;
    let range_gap = subspace_gap(&linalg::range_basis(g, tol)?, &linalg::range_basis(d, tol)?);
    if range_gap > GAP_THRESHOLD {
        return Err(Error::SubspaceMismatch(format!(
            "R(G) differs from R(D) (gap {range_gap:.3e})"
        )));
    }
    let kernel_gap = subspace_gap(&linalg::null_basis(g, tol)?, &linalg::null_basis(e, tol)?);
    if kernel_gap > GAP_THRESHOLD {
        return Err(Error::SubspaceMismatch(format!(
            "K(G) differs from K(E) (gap {kernel_gap:.3e})"
        )));
    }
    let rep = existence_report(a, d, e, tol)?;
    if !rep.two_sided {
        return Err(Error::NotInvertible(Box::new(rep)));
    }
    Ok(())
}

/// `G(AG)#` for a carrier `G` with `R(G) = R(D)` and `K(G) = K(E)`.
pub fn along_via_group(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    g: &CMatrix,
    tol: &Tolerance,
) -> Result<CMatrix> {
    check_carrier(a, d, e, g, tol)?;
    Ok(g * &group_inverse(&(a * g), tol)?)
}

/// `(GA)#G`, the mirrored form of [`along_via_group`].
pub fn along_via_group_mirrored(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    g: &CMatrix,
    tol: &Tolerance,
) -> Result<CMatrix> {
    check_carrier(a, d, e, g, tol)?;
    Ok(&group_inverse(&(g * a), tol)? * g)
}

/// One row of a convergence table. `error` is `None` when the inverse
/// does not exist at this point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub delta_or_eps: f64,
    pub error: Option<f64>,
    pub existed: bool,
}

/// CSV with header `delta_or_eps,error,existed`.
pub fn to_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("delta_or_eps,error,existed\n");
    for row in rows {
        let error = row.error.map(|v| format!("{v:.16e}")).unwrap_or_default();
        out.push_str(&format!(
            "{:.16e},{},{}\n",
            row.delta_or_eps, error, row.existed
        ));
    }
    out
}

/// `1e-1, 1e-2, …, 1e-6`.
pub fn default_eps_schedule() -> Vec<f64> {
    (1..=6).map(|k| 10f64.powi(-k)).collect()
}

/// `‖(GA − εI)⁻¹G − X‖_F` for each `ε`. A shift that makes the resolvent
/// singular yields a row with `existed = false`.
pub fn limit_representation(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    g: &CMatrix,
    eps_schedule: &[f64],
    tol: &Tolerance,
) -> Result<Vec<ConvergenceRow>> {
    check_carrier(a, d, e, g, tol)?;
    if let Some(bad) = eps_schedule.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "shift {bad} is not a positive real"
        )));
    }
    let x = default_inverse(a, d, e, tol)?.x;
    let ga = g * a;
    let m = ga.rows();
    Ok(eps_schedule
        .par_iter()
        .map(|&eps| {
            let shifted = &ga - &CMatrix::identity(m).scale_real(eps);
            match shifted_resolvent(&shifted, g, eps) {
                Ok(approx) => ConvergenceRow {
                    delta_or_eps: eps,
                    error: Some(approx.distance(&x)),
                    existed: true,
                },
                Err(_) => ConvergenceRow {
                    delta_or_eps: eps,
                    error: None,
                    existed: false,
                },
            }
        })
        .collect())
}

fn shifted_resolvent(shifted: &CMatrix, g: &CMatrix, eps: f64) -> Result<CMatrix> {
    linalg::solve(shifted, g).map_err(|_| Error::SingularShift(eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRow {
    pub delta: f64,
    /// `‖X_δ − X‖_F`
    pub error: Option<f64>,
    pub existed: bool,
    /// Frobenius gap between `X_δ − X` and its three-term decomposition.
    pub identity_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationTable {
    pub rows: Vec<PerturbationRow>,
    pub scale: f64,
}

impl PerturbationTable {
    pub fn convergence(&self) -> Vec<ConvergenceRow> {
        self.rows
            .iter()
            .map(|r| ConvergenceRow {
                delta_or_eps: r.delta,
                error: r.error,
                existed: r.existed,
            })
            .collect()
    }
}

/// Right side of the three-term decomposition of `Y − X`, where
/// `X = A^{‖(D,E)}`, `Y = B^{‖(F,G)}` and inner inverses are taken as
/// Moore-Penrose inverses:
/// `Y(G†G − E†E)(I − AX) + Y(A − B)X + (I − YB)(FF† − DD†)X`.
pub fn three_term_decomposition(
    (a, d, e, x): (&CMatrix, &CMatrix, &CMatrix, &CMatrix),
    (b, f, g, y): (&CMatrix, &CMatrix, &CMatrix, &CMatrix),
    tol: &Tolerance,
) -> Result<CMatrix> {
    let pinv = |h: &CMatrix| linalg::mp_inverse(h, tol);
    let (n, m) = a.shape();
    let i_n = CMatrix::identity(n);
    let i_m = CMatrix::identity(m);
    let row_proj_g = &pinv(g)? * g;
    let row_proj_e = &pinv(e)? * e;
    let col_proj_f = f * &pinv(f)?;
    let col_proj_d = d * &pinv(d)?;
    let t1 = &(y * &(&row_proj_g - &row_proj_e)) * &(&i_n - &(a * x));
    let t2 = &(y * &(a - b)) * x;
    let t3 = &(&(&i_m - &(y * b)) * &(&col_proj_f - &col_proj_d)) * x;
    Ok(&(&t1 + &t2) + &t3)
}

fn unit_direction(s: &mut Sampler, rows: usize, cols: usize) -> CMatrix {
    let r = s.matrix(rows, cols);
    let norm = linalg::spectral_norm(&r);
    r.scale_real(1.0 / norm)
}

/// Perturbs `A ↦ A + δR_A`, `D ↦ D(I + δR)`, `E ↦ (I + δR')E` along fixed
/// seeded unit directions and tabulates `‖X_δ − X‖` for each `δ`.
/// Rows keep the order of `deltas`.
pub fn perturbation_experiment(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    deltas: &[f64],
    seed: u64,
    tol: &Tolerance,
) -> Result<PerturbationTable> {
    let base = default_inverse(a, d, e, tol)?;
    let (n, m) = a.shape();
    let mut s = Sampler::seeded(seed);
    let r_a = unit_direction(&mut s, n, m);
    let r_d = unit_direction(&mut s, n, n);
    let r_e = unit_direction(&mut s, m, m);
    let i_n = CMatrix::identity(n);
    let i_m = CMatrix::identity(m);
    let rows = deltas
        .par_iter()
        .map(|&delta| -> Result<PerturbationRow> {
            let b = a + &r_a.scale_real(delta);
            let f = d * &(&i_n + &r_d.scale_real(delta));
            let g = &(&i_m + &r_e.scale_real(delta)) * e;
            match default_inverse(&b, &f, &g, tol) {
                Ok(y) => {
                    let diff = &y.x - &base.x;
                    let rhs =
                        three_term_decomposition((a, d, e, &base.x), (&b, &f, &g, &y.x), tol)?;
                    Ok(PerturbationRow {
                        delta,
                        error: Some(diff.frobenius_norm()),
                        existed: true,
                        identity_residual: Some(diff.distance(&rhs)),
                    })
                }
                Err(Error::NotInvertible(_)) => Ok(PerturbationRow {
                    delta,
                    error: None,
                    existed: false,
                    identity_residual: None,
                }),
                Err(err) => Err(err),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PerturbationTable {
        rows,
        scale: base.scale,
    })
}

pub type MatrixCurve = Box<dyn Fn(f64) -> CMatrix + Send + Sync>;

/// Smooth curves `t ↦ (A(t), D(t), E(t))` sampled at `t0` and `t0 ± h`.
pub struct CurveSpec {
    pub a: MatrixCurve,
    pub d: MatrixCurve,
    pub e: MatrixCurve,
    pub t0: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub analytic: CMatrix,
    pub numeric: CMatrix,
    /// `‖analytic − numeric‖_F`
    pub gap: f64,
    pub scale: f64,
}

fn central(plus: &CMatrix, minus: &CMatrix, h: f64) -> CMatrix {
    (plus - minus).scale_real(0.5 / h)
}

/// Compares the closed-form derivative of `t ↦ A(t)^{‖(D(t),E(t))}` at `t0`
/// with a central difference of the inverse itself. Derivatives of the
/// data and of `D†`, `E†` are central differences.
pub fn derivative_along_curve(curve: &CurveSpec, tol: &Tolerance) -> Result<DerivativeCheck> {
    if !(curve.h > 0.0 && curve.h.is_finite() && curve.t0.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "bad sampling point t0={} h={}",
            curve.t0, curve.h
        )));
    }
    let ts = [curve.t0 - curve.h, curve.t0, curve.t0 + curve.h];
    let samples: Vec<(CMatrix, CMatrix, CMatrix)> = ts
        .iter()
        .map(|&t| ((curve.a)(t), (curve.d)(t), (curve.e)(t)))
        .collect();
    for (t, (a, d, e)) in ts.iter().zip(&samples) {
        check_shapes(a, d, e).map_err(|err| Error::InvalidInput(format!("at t={t}: {err}")))?;
    }
    let ranks = |pick: fn(&(CMatrix, CMatrix, CMatrix)) -> &CMatrix| -> Result<Vec<usize>> {
        samples
            .iter()
            .map(|s| linalg::rank_tol(pick(s), tol))
            .collect()
    };
    for (name, r) in [("D", ranks(|s| &s.1)?), ("E", ranks(|s| &s.2)?)] {
        if r.iter().any(|&k| k != r[0]) {
            return Err(Error::RankDrift(format!(
                "rank of {name} is {r:?} at t = {ts:?}"
            )));
        }
    }
    let xs = samples
        .iter()
        .map(|(a, d, e)| default_inverse(a, d, e, tol).map(|r| r.x))
        .collect::<Result<Vec<_>>>()?;
    let (a, d, e) = &samples[1];
    let x = &xs[1];
    let h = curve.h;
    let (lo, hi) = (&samples[0], &samples[2]);
    let da = central(&hi.0, &lo.0, h);
    let dd = central(&hi.1, &lo.1, h);
    let de = central(&hi.2, &lo.2, h);
    let pinv = |m: &CMatrix| linalg::mp_inverse(m, tol);
    let f = pinv(d)?;
    let g = pinv(e)?;
    let df = central(&pinv(&hi.1)?, &pinv(&lo.1)?, h);
    let dg = central(&pinv(&hi.2)?, &pinv(&lo.2)?, h);
    let (n, m) = a.shape();
    let i_n = CMatrix::identity(n);
    let i_m = CMatrix::identity(m);
    let t1 = &(x * &(&(&dg * e) + &(&g * &de))) * &(&i_n - &(a * x));
    let t2 = &(&(&i_m - &(x * a)) * &(&(&dd * &f) + &(d * &df))) * x;
    let t3 = &(x * &da) * x;
    let analytic = &(&t1 + &t2) - &t3;
    let numeric = central(&xs[2], &xs[0], h);
    let gap = analytic.distance(&numeric);
    Ok(DerivativeCheck {
        analytic,
        numeric,
        gap,
        scale: problem_scale(a, d, e),
    })
}
