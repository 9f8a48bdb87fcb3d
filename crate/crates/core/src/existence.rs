//! Existence of left, right and two-sided (D,E)-inverses.
//!
//! Verdicts come from rank equalities: `A` is right (D,E)-invertible iff
//! `rk(E) = rk(EAD)`, left (D,E)-invertible iff `rk(D) = rk(EAD)`, and
//! both iff `rk(D) = rk(E) = rk(EAD)`. The map
//! `φ: R(D) → X, x ↦ P_{X,K(E)}(Ax)` provides an independent check:
//! it is injective exactly in the left case and surjective exactly in the
//! right case.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, oblique_projector, Tolerance};
use crate::matrix::CMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub left: bool,
    pub right: bool,
    pub two_sided: bool,
    #[serde(rename = "rk_D")]
    pub rk_d: usize,
    #[serde(rename = "rk_E")]
    pub rk_e: usize,
    #[serde(rename = "rk_EAD")]
    pub rk_ead: usize,
    #[serde(rename = "rk_AD")]
    pub rk_ad: usize,
    #[serde(rename = "rk_EA")]
    pub rk_ea: usize,
    pub unique_onesided: bool,
    /// Smallest distance between the rank threshold and the singular
    /// values on either side of the cut, over `D`, `E` and `EAD`.
    /// A value near zero flags a borderline verdict.
    pub margin: f64,
}

/// Checks `A: n × m` against `D, E: m × n`.
pub(crate) fn check_shapes(a: &CMatrix, d: &CMatrix, e: &CMatrix) -> Result<()> {
    let (n, m) = a.shape();
    if d.shape() != (m, n) || e.shape() != (m, n) {
        return Err(Error::Shape(format!(
            "A is {n}x{m}; D and E must be {m}x{n}, got {}x{} and {}x{}",
            d.rows(),
            d.cols(),
            e.rows(),
            e.cols()
        )));
    }
    a.ensure_finite("A")?;
    d.ensure_finite("D")?;
    e.ensure_finite("E")
}

struct RankInfo {
    rank: usize,
    margin: f64,
}

fn rank_info(h: &CMatrix, tol: &Tolerance) -> RankInfo {
    let s = linalg::singular_values(h);
    let rank = tol.rank_of(&s, h.rows(), h.cols());
    let thr = tol.threshold(h.rows(), h.cols(), s.first().copied().unwrap_or(0.0));
    let above = rank.checked_sub(1).map(|k| s[k] - thr);
    let below = s.get(rank).map(|&sv| thr - sv);
    let margin = match (above, below) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => f64::MAX,
    };
    RankInfo { rank, margin }
}

fn report_from_products(
    d: &CMatrix,
    e: &CMatrix,
    ead: &CMatrix,
    ad: &CMatrix,
    ea: &CMatrix,
    tol: &Tolerance,
) -> ExistenceReport {
    let rd = rank_info(d, tol);
    let re = rank_info(e, tol);
    let rx = rank_info(ead, tol);
    let rk_ad = linalg::rank_tol(ad, tol).unwrap_or(0);
    let rk_ea = linalg::rank_tol(ea, tol).unwrap_or(0);
    let left = rd.rank == rx.rank;
    let right = re.rank == rx.rank;
    ExistenceReport {
        left,
        right,
        two_sided: left && right,
        rk_d: rd.rank,
        rk_e: re.rank,
        rk_ead: rx.rank,
        rk_ad,
        rk_ea,
        unique_onesided: rd.rank == re.rank && re.rank == rx.rank,
        margin: rd.margin.min(re.margin).min(rx.margin),
    }
}

/// Rank-based verdicts for `A`'s one- and two-sided (D,E)-invertibility.
pub fn existence_report(
    a: &CMatrix,
    d: &CMatrix,
    e: &CMatrix,
    tol: &Tolerance,
) -> Result<ExistenceReport> {
    check_shapes(a, d, e)?;
    let ad = a * d;
    let ea = e * a;
    let ead = e * &ad;
    Ok(report_from_products(d, e, &ead, &ad, &ea, tol))
}

/// Report for invertibility along `D` (the `E = D` case).
pub fn along_report(a: &CMatrix, d: &CMatrix, tol: &Tolerance) -> Result<ExistenceReport> {
    let rep = existence_report(a, d, d, tol)?;
    debug_assert_eq!(rep.left, rep.right);
    Ok(rep)
}

/// Injectivity and surjectivity of the map `φ(x) = P_{X,K(E)}(Ax)` on
/// `R(D)`, with `X = K(E)^⊥`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiVerdict {
    pub injective: bool,
    pub surjective: bool,
}

pub fn phi_oracle(a: &CMatrix, d: &CMatrix, e: &CMatrix, tol: &Tolerance) -> Result<PhiVerdict> {
    check_shapes(a, d, e)?;
    let rd = linalg::range_basis(d, tol)?;
    let complement = linalg::range_basis(&e.adjoint(), tol)?;
    let kernel = linalg::null_basis(e, tol)?;
    let proj = oblique_projector(&complement, &kernel)?;
    // Coordinates of φ(v_i) in the orthonormal basis of X.
    let phi = &(&complement.adjoint() * &proj) * &(a * &rd);
    let rank = if phi.rows() == 0 || phi.cols() == 0 {
        0
    } else {
        // The operator is compared against ‖A‖ so that a φ which is tiny
        // relative to A counts as degenerate.
        let s = linalg::singular_values(&phi);
        let floor = tol.threshold(a.rows(), a.cols(), linalg::spectral_norm(a));
        let thr = tol.threshold(phi.rows(), phi.cols(), s[0]).max(floor);
        s.iter().take_while(|&&v| v > thr).count()
    };
    Ok(PhiVerdict {
        injective: rank == rd.cols(),
        surjective: rank == complement.cols(),
    })
}

/// Whether some `A` is left (resp. right) (D,E)-invertible:
/// `rk(D) ≤ rk(E)` (resp. `rk(E) ≤ rk(D)`).
pub fn family_nonempty(d: &CMatrix, e: &CMatrix, tol: &Tolerance) -> Result<(bool, bool)> {
    if d.shape() != e.shape() {
        return Err(Error::Shape(format!(
            "D is {}x{} but E is {}x{}",
            d.rows(),
            d.cols(),
            e.rows(),
            e.cols()
        )));
    }
    let rd = linalg::rank_tol(d, tol)?;
    let re = linalg::rank_tol(e, tol)?;
    Ok((rd <= re, re <= rd))
}
