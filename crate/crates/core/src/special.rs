//! Classical generalized inverses from a full-rank factorization `A = FG`.
//!
//! Each one is also a (D,E)-inverse for a suitable pair: the Moore-Penrose
//! inverse for `(A*, A*)`, the group inverse for `(A, A)`, the core inverse
//! for `(A, A*)`, the dual core inverse for `(A*, A)`, and the weighted
//! Moore-Penrose inverse for `(N⁻¹A*M, N⁻¹A*M)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::existence::existence_report;
use crate::inverse::{inverse_along, ComputeOptions};
use crate::linalg::{self, Tolerance, GAP_THRESHOLD};
use crate::matrix::CMatrix;

fn require_square(a: &CMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    a.ensure_finite("A")
}

/// Whether the `r × r` matrix `h` is nonsingular, judged against `reference`
/// (the norm of the matrix it was derived from) as well as its own size.
fn nonsingular_against(h: &CMatrix, tol: &Tolerance, reference: f64) -> Result<bool> {
    let floor = tol.threshold(h.rows(), h.cols(), reference);
    Ok(linalg::rank_with_floor(h, tol, floor)? == h.rows())
}

/// `A = FG`, or `None` for the zero matrix.
fn factor(a: &CMatrix, tol: &Tolerance) -> Result<Option<linalg::FullRankFactorization>> {
    match linalg::full_rank_factorization(a, tol) {
        Ok(frf) => Ok(Some(frf)),
        Err(Error::RankZero) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `GF⁻¹` for a group-invertible `A`.
fn core_block_inverse(
    a: &CMatrix,
    frf: &linalg::FullRankFactorization,
    tol: &Tolerance,
) -> Result<CMatrix> {
    let gf = &frf.g * &frf.f;
    if !nonsingular_against(&gf, tol, linalg::spectral_norm(a))? {
        return Err(Error::NoGroupInverse);
    }
    linalg::inverse(&gf).map_err(|_| Error::NoGroupInverse)
}

/// `A† = G*(F*AG*)⁻¹F*`.
pub fn moore_penrose_frf(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let frf = linalg::full_rank_factorization(a, tol)?;
    let (fa, ga) = (frf.f.adjoint(), frf.g.adjoint());
    let inner = &(&fa * a) * &ga;
    let inv = linalg::inverse(&inner)?;
    Ok(&(&ga * &inv) * &fa)
}

/// `A# = F(GF)⁻²G`; the zero matrix is its own group inverse.
pub fn group_inverse(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    require_square(a)?;
    let Some(frf) = factor(a, tol)? else {
        return Ok(CMatrix::zeros(a.rows(), a.cols()));
    };
    let k = core_block_inverse(a, &frf, tol)?;
    Ok(&(&frf.f * &(&k * &k)) * &frf.g)
}

/// Core inverse `F(GF)⁻¹F†`.
pub fn core_inverse(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    require_square(a)?;
    let Some(frf) = factor(a, tol)? else {
        return Ok(CMatrix::zeros(a.rows(), a.cols()));
    };
    let k = core_block_inverse(a, &frf, tol)?;
    let f_pinv = linalg::mp_inverse(&frf.f, tol)?;
    Ok(&(&frf.f * &k) * &f_pinv)
}

/// Dual core inverse `G†(GF)⁻¹G`.
pub fn dual_core_inverse(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    require_square(a)?;
    let Some(frf) = factor(a, tol)? else {
        return Ok(CMatrix::zeros(a.rows(), a.cols()));
    };
    let k = core_block_inverse(a, &frf, tol)?;
    let g_pinv = linalg::mp_inverse(&frf.g, tol)?;
    Ok(&(&g_pinv * &k) * &frf.g)
}

/// Positive definite Hermitian weights for `A: n × m`: `M` is `n × n`,
/// `N` is `m × m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPair {
    pub m: CMatrix,
    pub n: CMatrix,
}

fn check_weight(w: &CMatrix, name: &str, tol: &Tolerance) -> Result<()> {
    if !w.is_square() {
        return Err(Error::InvalidWeights(format!(
            "{name} is {}x{}, not square",
            w.rows(),
            w.cols()
        )));
    }
    w.ensure_finite(name)?;
    let smax = linalg::spectral_norm(w);
    if w.hermitian_defect() > 1e-10 * smax {
        return Err(Error::InvalidWeights(format!("{name} is not Hermitian")));
    }
    let k = w.rows();
    if k == 0 {
        return Ok(());
    }
    // λ_min(H) = σ_max(H) − ‖σ_max(H)·I − H‖₂ for Hermitian H.
    let h = &(w + &w.adjoint()).scale_real(0.5);
    let shift = &CMatrix::identity(k).scale_real(smax) - h;
    let lambda_min = smax - linalg::spectral_norm(&shift);
    let thr = tol.threshold(k, k, smax);
    if !(lambda_min > thr) {
        return Err(Error::InvalidWeights(format!(
            "{name} is not positive definite (smallest eigenvalue {lambda_min:.3e})"
        )));
    }
    Ok(())
}

impl WeightPair {
    pub fn new(m: CMatrix, n: CMatrix, tol: &Tolerance) -> Result<Self> {
        let pair = Self { m, n };
        pair.validate(tol)?;
        Ok(pair)
    }

    pub fn identity(n: usize, m: usize) -> Self {
        Self {
            m: CMatrix::identity(n),
            n: CMatrix::identity(m),
        }
    }

    pub fn validate(&self, tol: &Tolerance) -> Result<()> {
        check_weight(&self.m, "M", tol)?;
        check_weight(&self.n, "N", tol)
    }

    /// `N⁻¹A*M`, the carrier for which the weighted inverse is the
    /// inverse along it.
    pub fn carrier(&self, a: &CMatrix) -> Result<CMatrix> {
        let n_inv = linalg::inverse(&self.n)?;
        Ok(&(&n_inv * &a.adjoint()) * &self.m)
    }
}

/// Weighted Moore-Penrose inverse `N⁻¹G*(F*MAN⁻¹G*)⁻¹F*M`.
pub fn weighted_mp(a: &CMatrix, weights: &WeightPair, tol: &Tolerance) -> Result<CMatrix> {
    a.ensure_finite("A")?;
    let (rows, cols) = a.shape();
    if weights.m.shape() != (rows, rows) || weights.n.shape() != (cols, cols) {
        return Err(Error::Shape(format!(
            "A is {rows}x{cols}; weights must be {rows}x{rows} and {cols}x{cols}"
        )));
    }
    weights.validate(tol)?;
    let Some(frf) = factor(a, tol)? else {
        return Ok(CMatrix::zeros(cols, rows));
    };
    let n_inv =
        linalg::inverse(&weights.n).map_err(|_| Error::InvalidWeights("N is singular".into()))?;
    let left = &n_inv * &frf.g.adjoint();
    let right = &frf.f.adjoint() * &weights.m;
    let inner = &(&right * a) * &left;
    let reference = linalg::spectral_norm(a)
        * linalg::spectral_norm(&weights.m)
        * linalg::spectral_norm(&n_inv);
    let singular = || -> Error {
        let carrier = weights
            .carrier(a)
            .unwrap_or_else(|_| CMatrix::zeros(cols, rows));
        match existence_report(a, &carrier, &carrier, tol) {
            Ok(rep) => Error::NotInvertible(Box::new(rep)),
            Err(e) => e,
        }
    };
    if !nonsingular_against(&inner, tol, reference)? {
        return Err(singular());
    }
    let inv = linalg::inverse(&inner).map_err(|_| singular())?;
    Ok(&(&left * &inv) * &right)
}

/// Index of `A`: the first `k` with `rk(A^{k+1}) = rk(A^k)`.
pub fn index(a: &CMatrix, tol: &Tolerance) -> Result<u32> {
    require_square(a)?;
    let n = a.rows();
    let norm = linalg::spectral_norm(a);
    let rel = tol.rel_for(n, n);
    let mut power = CMatrix::identity(n);
    let mut rank = n;
    for k in 0..=n as u32 {
        let next = &power * a;
        let next_rank = linalg::rank_with_floor(&next, tol, rel * norm.powi(k as i32 + 1))?;
        if next_rank == rank {
            return Ok(k);
        }
        power = next;
        rank = next_rank;
    }
    Ok(n as u32)
}

/// Drazin inverse, computed as the inverse of `A` along `A^k` with `k`
/// the index.
pub fn drazin_inverse(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    require_square(a)?;
    let n = a.rows();
    let k = index(a, tol)?;
    let carrier = a.pow(k);
    // A^k·A·A^k is of order ‖A‖^{2k+1}; noise below that floor is not rank.
    let floor = tol.rel_for(n, n) * linalg::spectral_norm(a).powi(2 * k as i32 + 1);
    let along_tol = tol.with_abs(tol.abs.max(floor));
    Ok(inverse_along(a, &carrier, &along_tol, &ComputeOptions::default())?.x)
}

/// `R(A) = R(A*)`, decided by the principal-angle gap.
pub fn is_ep(a: &CMatrix, tol: &Tolerance) -> Result<bool> {
    require_square(a)?;
    let ra = linalg::range_basis(a, tol)?;
    let rs = linalg::range_basis(&a.adjoint(), tol)?;
    Ok(linalg::subspace_gap(&ra, &rs) <= GAP_THRESHOLD)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpecialKind {
    Mp,
    Group,
    Drazin,
    Core,
    DualCore,
    WeightedMp,
}

impl SpecialKind {
    pub const ALL: [SpecialKind; 6] = [
        SpecialKind::Mp,
        SpecialKind::Group,
        SpecialKind::Drazin,
        SpecialKind::Core,
        SpecialKind::DualCore,
        SpecialKind::WeightedMp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpecialKind::Mp => "mp",
            SpecialKind::Group => "group",
            SpecialKind::Drazin => "drazin",
            SpecialKind::Core => "core",
            SpecialKind::DualCore => "dualcore",
            SpecialKind::WeightedMp => "wmp",
        }
    }
}

impl fmt::Display for SpecialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpecialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SpecialKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown inverse `{s}`")))
    }
}

/// Computes the requested inverse. `weights` is only read for
/// [`SpecialKind::WeightedMp`], where it defaults to identities.
pub fn special_inverse(
    kind: SpecialKind,
    a: &CMatrix,
    weights: Option<&WeightPair>,
    tol: &Tolerance,
) -> Result<CMatrix> {
    match kind {
        SpecialKind::Mp => moore_penrose_frf(a, tol),
        SpecialKind::Group => group_inverse(a, tol),
        SpecialKind::Drazin => drazin_inverse(a, tol),
        SpecialKind::Core => core_inverse(a, tol),
        SpecialKind::DualCore => dual_core_inverse(a, tol),
        SpecialKind::WeightedMp => match weights {
            Some(w) => weighted_mp(a, w, tol),
            None => weighted_mp(a, &WeightPair::identity(a.rows(), a.cols()), tol),
        },
    }
}

fn herm(h: &CMatrix) -> f64 {
    h.hermitian_defect()
}

/// Largest Frobenius residual over the defining equations of `kind`:
///
/// * mp: `AXA=A, XAX=X, (AX)*=AX, (XA)*=XA`
/// * group: `AXA=A, XAX=X, AX=XA`
/// * drazin: `XAX=X, AX=XA, A^{k+1}X=A^k`
/// * core: `AXA=A, (AX)*=AX, AX²=X, XA²=A`
/// * dualcore: `AXA=A, (XA)*=XA, X²A=X, A²X=A`
/// * wmp: `AXA=A, XAX=X, (MAX)*=MAX, (NXA)*=NXA`
pub fn defining_residual(
    kind: SpecialKind,
    a: &CMatrix,
    x: &CMatrix,
    weights: Option<&WeightPair>,
    tol: &Tolerance,
) -> Result<f64> {
    if x.shape() != (a.cols(), a.rows()) {
        return Err(Error::Shape(format!(
            "candidate is {}x{}, expected {}x{}",
            x.rows(),
            x.cols(),
            a.cols(),
            a.rows()
        )));
    }
    let ax = a * x;
    let xa = x * a;
    let axa = (&ax * a).distance(a);
    let xax = (&xa * x).distance(x);
    let parts = match kind {
        SpecialKind::Mp => vec![axa, xax, herm(&ax), herm(&xa)],
        SpecialKind::Group => vec![axa, xax, ax.distance(&xa)],
        SpecialKind::Drazin => {
            let k = index(a, tol)?;
            let ak = a.pow(k);
            vec![xax, ax.distance(&xa), (&(&ak * a) * x).distance(&ak)]
        }
        SpecialKind::Core => vec![axa, herm(&ax), (&ax * x).distance(x), (&xa * a).distance(a)],
        SpecialKind::DualCore => vec![
            axa,
            herm(&xa),
            (&(x * x) * a).distance(x),
            (&(a * a) * x).distance(a),
        ],
        SpecialKind::WeightedMp => {
            let default = WeightPair::identity(a.rows(), a.cols());
            let w = weights.unwrap_or(&default);
            vec![axa, xax, herm(&(&w.m * &ax)), herm(&(&w.n * &xa))]
        }
    };
    Ok(parts.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c64;
    use crate::random::Sampler;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn group_examples() {
        let x = group_inverse(&CMatrix::diag_real(&[2.0, 0.0]), &tol()).unwrap();
        assert!(x.distance(&CMatrix::diag_real(&[0.5, 0.0])) < 1e-15);
        let nil = CMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(
            group_inverse(&nil, &tol()),
            Err(Error::NoGroupInverse)
        ));
        let p = CMatrix::from_rows(&[[1.0, 1.0], [0.0, 0.0]]);
        assert!(group_inverse(&p, &tol()).unwrap().distance(&p) < 1e-14);
        assert_eq!(
            group_inverse(&CMatrix::zeros(2, 2), &tol()).unwrap(),
            CMatrix::zeros(2, 2)
        );
    }

    #[test]
    fn mp_examples() {
        let x = moore_penrose_frf(&CMatrix::diag_real(&[2.0, 0.0]), &tol()).unwrap();
        assert!(x.distance(&CMatrix::diag_real(&[0.5, 0.0])) < 1e-15);
        assert!(matches!(
            moore_penrose_frf(&CMatrix::zeros(2, 3), &tol()),
            Err(Error::RankZero)
        ));

        let mut s = Sampler::seeded(11);
        let a = s.matrix(5, 3);
        let normal = &linalg::inverse(&(&a.adjoint() * &a)).unwrap() * &a.adjoint();
        assert!(moore_penrose_frf(&a, &tol()).unwrap().distance(&normal) < 1e-9);

        let u = s.matrix(4, 1);
        let v = s.matrix(3, 1);
        let a = &u * &v.adjoint();
        let nn = u.frobenius_norm().powi(2) * v.frobenius_norm().powi(2);
        let expect = (&v * &u.adjoint()).scale_real(1.0 / nn);
        assert!(moore_penrose_frf(&a, &tol()).unwrap().distance(&expect) < 1e-14);
    }

    #[test]
    fn core_examples() {
        let h = CMatrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]);
        let inv = linalg::inverse(&h).unwrap();
        assert!(core_inverse(&h, &tol()).unwrap().distance(&inv) < 1e-14);
        assert!(dual_core_inverse(&h, &tol()).unwrap().distance(&inv) < 1e-14);

        let p = CMatrix::diag_real(&[1.0, 0.0]);
        assert!(core_inverse(&p, &tol()).unwrap().distance(&p) < 1e-15);
        assert!(dual_core_inverse(&p, &tol()).unwrap().distance(&p) < 1e-15);

        let a = CMatrix::from_rows(&[[1.0, 1.0], [0.0, 0.0]]);
        let c = core_inverse(&a, &tol()).unwrap();
        let dc = dual_core_inverse(&a, &tol()).unwrap();
        assert!(c.distance(&dc) > 1e-6);
        assert!(defining_residual(SpecialKind::Core, &a, &c, None, &tol()).unwrap() < 1e-14);
        assert!(defining_residual(SpecialKind::DualCore, &a, &dc, None, &tol()).unwrap() < 1e-14);
        assert!(!is_ep(&a, &tol()).unwrap());
    }

    #[test]
    fn weighted_examples() {
        let mut s = Sampler::seeded(12);
        let a = s.matrix_of_rank(4, 3, 2);
        let mp = linalg::mp_inverse(&a, &tol()).unwrap();
        let x = weighted_mp(&a, &WeightPair::identity(4, 3), &tol()).unwrap();
        assert!(x.distance(&mp) < 1e-12);
        let scaled = WeightPair::new(
            CMatrix::identity(4).scale_real(2.0),
            CMatrix::identity(3).scale_real(3.0),
            &tol(),
        )
        .unwrap();
        assert!(weighted_mp(&a, &scaled, &tol()).unwrap().distance(&mp) < 1e-12);

        let b = s.matrix(4, 4);
        let c = s.matrix(3, 3);
        let w = WeightPair::new(
            &(&b * &b.adjoint()) + &CMatrix::identity(4),
            &(&c * &c.adjoint()) + &CMatrix::identity(3),
            &tol(),
        )
        .unwrap();
        let a = s.matrix(4, 3);
        let x = weighted_mp(&a, &w, &tol()).unwrap();
        let r = defining_residual(SpecialKind::WeightedMp, &a, &x, Some(&w), &tol()).unwrap();
        assert!(r < 1e-9 * linalg::spectral_norm(&a).max(1.0));
    }

    #[test]
    fn weight_validation() {
        let bad = CMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]);
        assert!(matches!(
            WeightPair::new(bad, CMatrix::identity(2), &tol()),
            Err(Error::InvalidWeights(_))
        ));
        let indefinite = CMatrix::diag_real(&[1.0, -1.0]);
        assert!(matches!(
            WeightPair::new(CMatrix::identity(2), indefinite, &tol()),
            Err(Error::InvalidWeights(_))
        ));
        let mut herm = CMatrix::identity(2);
        herm[(0, 1)] = c64(0.0, 0.5);
        herm[(1, 0)] = c64(0.0, -0.5);
        assert!(WeightPair::new(herm, CMatrix::identity(3), &tol()).is_ok());
    }

    #[test]
    fn drazin_examples() {
        let nil = CMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert_eq!(index(&nil, &tol()).unwrap(), 2);
        assert_eq!(drazin_inverse(&nil, &tol()).unwrap(), CMatrix::zeros(2, 2));

        let a = CMatrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]]);
        assert_eq!(index(&a, &tol()).unwrap(), 0);
        assert!(
            drazin_inverse(&a, &tol())
                .unwrap()
                .distance(&linalg::inverse(&a).unwrap())
                < 1e-13
        );

        let mut block = CMatrix::zeros(4, 4);
        block.set_block(0, 0, &a);
        block[(2, 3)] = c64(1.0, 0.0);
        let mut expect = CMatrix::zeros(4, 4);
        expect.set_block(0, 0, &linalg::inverse(&a).unwrap());
        assert_eq!(index(&block, &tol()).unwrap(), 2);
        let got = drazin_inverse(&block, &tol()).unwrap();
        assert!(got.distance(&expect) < 1e-11);
    }

    #[test]
    fn ep_examples() {
        let h = CMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]);
        assert!(is_ep(&h, &tol()).unwrap());
        let nil = CMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert!(!is_ep(&nil, &tol()).unwrap());
        let u = Sampler::seeded(3).orthonormal(3, 3);
        assert!(is_ep(&u, &tol()).unwrap());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in SpecialKind::ALL {
            assert_eq!(k.name().parse::<SpecialKind>().unwrap(), k);
        }
    }
}
