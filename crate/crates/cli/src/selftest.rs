//! Built-in example suite run by `bcinv selftest`.

use bcinv_core::analysis::{
    along_via_group, default_eps_schedule, limit_representation, outer_inner_report,
    prescribed_outer, projector_identities, rank_defect_identity,
};
use bcinv_core::inverse::{compute_with, onesided_family, Side};
use bcinv_core::linalg::{self, inverse};
use bcinv_core::{
    c64, existence_report, inverse_along, CMatrix, ComputeOptions, Error, Method, Tolerance,
};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn detail_suffix(&self) -> String {
        if self.detail.is_empty() {
            String::new()
        } else {
            format!(" ({})", self.detail)
        }
    }
}

fn e11() -> CMatrix {
    CMatrix::diag_real(&[1.0, 0.0])
}

fn swap() -> CMatrix {
    CMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]])
}

fn check(name: &'static str, body: impl FnOnce() -> Result<(bool, String), Error>) -> Check {
    match body() {
        Ok((passed, detail)) => Check {
            name,
            passed,
            detail,
        },
        Err(err) => Check {
            name,
            passed: false,
            detail: err.to_string(),
        },
    }
}

/// Runs every example and reports each outcome.
pub fn run_all() -> Vec<Check> {
    let tol = Tolerance::default();
    let opts = ComputeOptions::default();
    let tol = &tol;
    let opts = &opts;
    vec![
        check("vanishing product has no inverse", || {
            let rep = existence_report(&swap(), &e11(), &e11(), tol)?;
            let ok = !rep.two_sided && rep.rk_ead == 0 && rep.rk_ad == 1 && rep.rk_ea == 1;
            Ok((
                ok,
                format!(
                    "rk_EAD={} rk_AD={} rk_EA={}",
                    rep.rk_ead, rep.rk_ad, rep.rk_ea
                ),
            ))
        }),
        check("every method returns D on the identity instance", || {
            let mut worst = 0.0f64;
            for m in Method::ALL {
                let res = compute_with(m, &CMatrix::identity(2), &e11(), &e11(), tol)?;
                worst = worst.max(res.x.distance(&e11()));
            }
            Ok((worst <= 1e-14, format!("max error {worst:.1e}")))
        }),
        check("basis method detects the singular assembled matrix", || {
            let err = compute_with(Method::BasisMethod, &swap(), &e11(), &e11(), tol);
            Ok((matches!(err, Err(Error::NotInvertible(_))), String::new()))
        }),
        check("rank-one carriers give the scaled outer product", || {
            let d1 = CMatrix::from_rows(&[[1.0], [2.0]]);
            let d2 = CMatrix::from_rows(&[[1.0], [-1.0]]);
            let e1 = CMatrix::from_rows(&[[3.0], [1.0]]);
            let e2 = CMatrix::from_rows(&[[0.0], [1.0]]);
            let a = CMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
            let d = &d1 * &d2.adjoint();
            let e = &e1 * &e2.adjoint();
            let denom = (&(&e2.adjoint() * &a) * &d1)[(0, 0)];
            let expect = (&d1 * &e2.adjoint()).scale(c64(1.0, 0.0) / denom);
            let x = compute_with(Method::FrfFormula, &a, &d, &e, tol)?.x;
            let err = x.distance(&expect);
            Ok((err <= 1e-14, format!("error {err:.1e}")))
        }),
        check("rank-one inverse along is D over the trace", || {
            let a = CMatrix::from_rows(&[[2.0, 1.0], [0.0, 3.0]]);
            let d = CMatrix::from_rows(&[[1.0, 2.0], [1.0, 2.0]]);
            let tr = (&a * &d).trace();
            let x = inverse_along(&a, &d, tol, opts)?.x;
            let err = x.distance(&d.scale(c64(1.0, 0.0) / tr));
            Ok((err <= 1e-14, format!("error {err:.1e}")))
        }),
        check("full column rank inverse along is D(AD)^-1", || {
            let a = CMatrix::from_rows(&[[1.0, 0.0, 2.0], [0.0, 1.0, 1.0]]);
            let d = CMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
            let expect = &d * &inverse(&(&a * &d))?;
            let err = inverse_along(&a, &d, tol, opts)?.x.distance(&expect);
            Ok((err <= 1e-14, format!("error {err:.1e}")))
        }),
        check("one-sided families collapse when ranks agree", || {
            let mut ok = true;
            for side in [Side::Left, Side::Right] {
                let fam = onesided_family(&CMatrix::identity(2), &e11(), &e11(), tol, side)?;
                let z = CMatrix::from_rows(&[[1.0, -2.0], [0.5, 3.0]]);
                ok &= fam.member(&z)?.distance(&e11()) <= 1e-14;
            }
            Ok((ok, String::new()))
        }),
        check("outer but not inner on the identity instance", || {
            let rep = outer_inner_report(&CMatrix::identity(2), &e11(), &e11(), tol)?;
            let ranks = rank_defect_identity(&CMatrix::identity(2), &e11(), &e11(), tol)?;
            let ok = rep.outer_residual <= 1e-15 && !rep.inner && ranks == (2, 1, 1);
            Ok((ok, format!("ranks {ranks:?}")))
        }),
        check("AX and XA are the expected projectors", || {
            let (p, q) = projector_identities(&CMatrix::identity(2), &e11(), &e11(), tol)?;
            Ok((
                p <= 1e-15 && q <= 1e-15,
                format!("residuals {p:.1e} {q:.1e}"),
            ))
        }),
        check("group-inverse representation with G = D", || {
            let x = along_via_group(&CMatrix::identity(2), &e11(), &e11(), &e11(), tol)?;
            Ok((x.distance(&e11()) <= 1e-15, String::new()))
        }),
        check("prescribed range and kernel reproduce the inverse", || {
            let t = linalg::range_basis(&e11(), tol)?;
            let s = linalg::null_basis(&e11(), tol)?;
            let z = prescribed_outer(&CMatrix::identity(2), &t, &s, tol)?;
            Ok((z.distance(&e11()) <= 1e-15, String::new()))
        }),
        check("shifted resolvent errors decrease", || {
            let rows = limit_representation(
                &CMatrix::identity(2),
                &e11(),
                &e11(),
                &e11(),
                &default_eps_schedule(),
                tol,
            )?;
            let errs: Vec<f64> = rows.iter().filter_map(|r| r.error).collect();
            let ok = errs.len() == rows.len() && errs.windows(2).all(|w| w[1] < w[0]);
            Ok((ok, String::new()))
        }),
    ]
}
