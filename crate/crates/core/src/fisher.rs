//! Symmetric logarithmic derivatives, quantum and classical Fisher
//! information, and the Uhlmann (mean-commutator) matrix.
//!
//! Everything is computed in the eigenbasis of the state:
//! `[L]_{μν} = 2⟨e_μ|∂ρ|e_ν⟩ / (λ_μ + λ_ν)`, with elements whose eigenvalue sum
//! falls below [`SUPPORT_CUTOFF`] set to zero.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, EigenPair2, Mat2, HERMITIAN_TOL};
use crate::povm::EncodedFamily;

/// Eigenvalue sums below this are treated as outside the support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Tolerance on `Tr ∂ρ`, relative to `max(1, ‖∂ρ‖)`.
pub const TRACELESS_TOL: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Uhlmann entries below this (relative to `max(1, √(F_ii F_jj))`) count as zero.
pub const TOL_UHLMANN: f64 = 1e-9;
/// Singularity threshold on `σ_min/σ_max` of the QFIM (absolute for `m = 1`).
pub const TOL_SINGULAR: f64 = 1e-10;
/// Probability below which a detection outcome is ignored.
pub const CFI_ZERO_PROBABILITY: f64 = 1e-14;
/// Derivative below which a vanishing-probability outcome carries no information.
pub const CFI_ZERO_DERIVATIVE: f64 = 1e-10;

/// Fisher information that may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Information {
    Finite(f64),
    Unbounded,
}

impl Information {
    pub fn finite(self) -> Option<f64> {
        match self {
            Information::Finite(v) => Some(v),
            Information::Unbounded => None,
        }
    }
}

pub(crate) fn validate_state(rho: &Mat2) -> Result<()> {
    if !rho.is_finite() {
        return Err(Error::NonFinite);
    }
    let herm = rho.hermiticity_error();
    if herm > HERMITIAN_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let (_, low) = rho.hermitian_eigenvalues();
    if low < -HERMITIAN_TOL {
        return Err(Error::NotPositive(low));
    }
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::NotDensity(format!("trace {tr}")));
    }
    Ok(())
}

pub(crate) fn validate_derivative(drho: &Mat2) -> Result<()> {
    if !drho.is_finite() {
        return Err(Error::NonFinite);
    }
    let scale = drho.frobenius_norm().max(1.0);
    let herm = drho.hermiticity_error();
    if herm > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(herm));
    }
    let tr = drho.trace().re;
    if tr.abs() > TRACELESS_TOL * scale {
        return Err(Error::NotTraceless(tr));
    }
    Ok(())
}

fn sld_in_basis(eig: &EigenPair2, drho: &Mat2) -> Mat2 {
    let v = eig.vectors();
    let lam = eig.values();
    let mut l = Mat2::zero();
    for mu in 0..2 {
        for nu in 0..2 {
            let s = lam[mu] + lam[nu];
            if s < SUPPORT_CUTOFF {
                continue;
            }
            let el = drho.sandwich(&v[mu], &v[nu]) * (2.0 / s);
            l = l + Mat2::outer(&v[mu], &v[nu]).scale_c(el);
        }
    }
    l
}

/// Symmetric logarithmic derivative `L` with `∂ρ = (Lρ + ρL)/2`.
pub fn sld(rho: &Mat2, drho: &Mat2) -> Result<Mat2> {
    validate_state(rho)?;
    validate_derivative(drho)?;
    Ok(sld_in_basis(&eig_hermitian(rho)?, drho))
}

/// Quantum Fisher information `Tr[ρL²]`.
pub fn qfi(rho: &Mat2, drho: &Mat2) -> Result<f64> {
    let l = sld(rho, drho)?;
    Ok((*rho * l * l).trace().re.max(0.0))
}

/// QFIM, Uhlmann matrix and SLDs of one family at one point.
#[derive(Debug, Clone)]
pub struct FisherReport {
    pub state: Mat2,
    pub derivatives: Vec<Mat2>,
    pub eigen: EigenPair2,
    pub slds: Vec<Mat2>,
    /// `½Tr[ρ{L_i, L_j}]`
    pub qfim: DMatrix<f64>,
    /// `Im Tr[ρ L_i L_j]`, the imaginary coefficient of `½Tr[ρ[L_i, L_j]]`.
    pub uhlmann: DMatrix<f64>,
    pub qfim_det: f64,
    /// `σ_min/σ_max` of the QFIM (0 for the zero matrix).
    pub conditioning: f64,
    pub achievable: bool,
    pub singular: bool,
}

impl FisherReport {
    pub fn dim(&self) -> usize {
        self.slds.len()
    }

    pub fn max_uhlmann(&self) -> f64 {
        self.uhlmann.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Scalar QFI of a one-parameter report.
    pub fn scalar(&self) -> f64 {
        self.qfim[(0, 0)]
    }
}

/// Build a [`FisherReport`] from a state and its parameter derivatives.
pub fn qfim_from_jet(rho: &Mat2, derivatives: &[Mat2]) -> Result<FisherReport> {
    validate_state(rho)?;
    for d in derivatives {
        validate_derivative(d)?;
    }
    let m = derivatives.len();
    if m == 0 {
        return Err(Error::Dimension {
            expected: 1,
            got: 0,
        });
    }
    let eigen = eig_hermitian(rho)?;
    let slds: Vec<Mat2> = derivatives
        .iter()
        .map(|d| sld_in_basis(&eigen, d))
        .collect();
    let rl: Vec<Mat2> = slds.iter().map(|l| *rho * *l).collect();

    let mut qfim = DMatrix::zeros(m, m);
    let mut uhlmann = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let t: Complex64 = (rl[i] * slds[j]).trace();
            qfim[(i, j)] = t.re;
            qfim[(j, i)] = t.re;
            if i != j {
                uhlmann[(i, j)] = t.im;
                uhlmann[(j, i)] = -t.im;
            }
        }
    }

    let achievable = (0..m).all(|i| {
        (i + 1..m).all(|j| {
            let scale = (qfim[(i, i)] * qfim[(j, j)]).max(0.0).sqrt().max(1.0);
            uhlmann[(i, j)].abs() <= TOL_UHLMANN * scale
        })
    });
    let (conditioning, singular) = if m == 1 {
        let f = qfim[(0, 0)];
        (if f > 0.0 { 1.0 } else { 0.0 }, f <= TOL_SINGULAR)
    } else {
        let ev = qfim.clone().symmetric_eigenvalues();
        let hi = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let lo = ev.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
        (ratio, ratio <= TOL_SINGULAR)
    };
    let qfim_det = qfim.determinant();

    Ok(FisherReport {
        state: *rho,
        derivatives: derivatives.to_vec(),
        eigen,
        slds,
        qfim,
        uhlmann,
        qfim_det,
        conditioning,
        achievable,
        singular,
    })
}

/// QFIM of an encoded family at `x`.
pub fn qfim(family: &EncodedFamily, x: &[f64]) -> Result<FisherReport> {
    let (rho, ds) = family.jet(x)?;
    qfim_from_jet(&rho, &ds)
}

/// Classical Fisher information `Σ_y Tr[Π_y ∂ρ]² / Tr[Π_y ρ]`.
pub fn cfi(rho: &Mat2, drho: &Mat2, measurement: &[Mat2]) -> Result<Information> {
    validate_state(rho)?;
    validate_derivative(drho)?;
    if measurement.is_empty() {
        return Err(Error::IncompleteMeasurement(1.0));
    }
    let mut total = Mat2::zero();
    for e in measurement {
        if !e.is_psd() {
            let (_, low) = e.hermitian_eigenvalues();
            return Err(Error::NotPositive(low));
        }
        total = total + *e;
    }
    let dev = total.max_abs_diff(&Mat2::identity());
    if dev > HERMITIAN_TOL {
        return Err(Error::IncompleteMeasurement(dev));
    }
    let mut acc = 0.0;
    for e in measurement {
        let p = (*e * *rho).trace().re;
        let dp = (*e * *drho).trace().re;
        if p < CFI_ZERO_PROBABILITY {
            if dp.abs() < CFI_ZERO_DERIVATIVE {
                continue;
            }
            return Ok(Information::Unbounded);
        }
        acc += dp * dp / p;
    }
    Ok(Information::Finite(acc))
}

/// Projective measurement onto the eigenvectors of the SLD.
pub fn sld_eigenbasis_measurement(rho: &Mat2, drho: &Mat2) -> Result<[Mat2; 2]> {
    let l = sld(rho, drho)?;
    let e = eig_hermitian(&l.hermitian_part())?;
    Ok([Mat2::outer(&e.e0, &e.e0), Mat2::outer(&e.e1, &e.e1)])
}

/// QFI with respect to `z = f(x)` given the QFI with respect to `x`.
pub fn qfi_reparametrize(f_q: f64, dz_dx: f64) -> Result<f64> {
    if dz_dx == 0.0 || !dz_dx.is_finite() {
        return Err(Error::ZeroJacobian);
    }
    Ok(f_q / (dz_dx * dz_dx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{bloch_to_matrix, commutator};

    #[test]
    fn sld_examples() {
        let rho = Mat2::diag(0.7, 0.3);
        assert_eq!(sld(&rho, &Mat2::zero()).unwrap(), Mat2::zero());

        let pure = Mat2::diag(1.0, 0.0);
        let l = sld(&pure, &Mat2::sigma_x().scale(0.5)).unwrap();
        assert!(l.max_abs_diff(&Mat2::sigma_x()) < 1e-15);

        let mixed = Mat2::identity().scale(0.5);
        let c = 0.37;
        let l = sld(&mixed, &Mat2::sigma_z().scale(c)).unwrap();
        assert!(l.max_abs_diff(&Mat2::sigma_z().scale(2.0 * c)) < 1e-15);
    }

    #[test]
    fn sld_rejects_traced_derivative() {
        let rho = Mat2::diag(0.7, 0.3);
        assert!(matches!(
            sld(&rho, &Mat2::diag(0.1, 0.0)),
            Err(Error::NotTraceless(_))
        ));
        assert!(sld(&Mat2::diag(0.7, 0.4), &Mat2::zero()).is_err());
    }

    #[test]
    fn qfi_maximally_mixed_static() {
        assert_eq!(
            qfi(&Mat2::identity().scale(0.5), &Mat2::zero()).unwrap(),
            0.0
        );
    }

    #[test]
    fn uhlmann_matches_eigenbasis_form() {
        let rho = bloch_to_matrix(&[0.0, 0.0, 0.6]).unwrap();
        let d1 = Mat2::sigma_x().scale(0.3);
        let d2 = Mat2::sigma_y().scale(0.2) + Mat2::sigma_x().scale(0.1);
        let rep = qfim_from_jet(&rho, &[d1, d2]).unwrap();
        let e = rep.eigen;
        let s1 = d1.sandwich(&e.e0, &e.e1);
        let s2 = d2.sandwich(&e.e0, &e.e1);
        // Im Tr[ρL₁L₂] = 4(λ₀−λ₁) Im(s₁ s₂*)
        let expect = 4.0 * (e.lambda0 - e.lambda1) * (s1 * s2.conj()).im;
        assert!((rep.uhlmann[(0, 1)] - expect).abs() < 1e-12);
        assert!(!rep.achievable);
        assert!(rep.uhlmann[(0, 1)] == -rep.uhlmann[(1, 0)]);
        assert!(commutator(&d1, &d2).frobenius_norm() > 0.1);
    }

    #[test]
    fn cfi_trivial_measurement_is_zero() {
        let rho = bloch_to_matrix(&[0.3, 0.1, 0.2]).unwrap();
        let d = Mat2::sigma_x().scale(0.4);
        assert_eq!(
            cfi(&rho, &d, &[Mat2::identity()]).unwrap(),
            Information::Finite(0.0)
        );
    }

    #[test]
    fn cfi_unbounded_flag() {
        let rho = Mat2::diag(1.0, 0.0);
        let d = Mat2::diag(-0.1, 0.1);
        let m = [Mat2::diag(1.0, 0.0), Mat2::diag(0.0, 1.0)];
        assert_eq!(cfi(&rho, &d, &m).unwrap(), Information::Unbounded);
    }

    #[test]
    fn cfi_rejects_incomplete_measurement() {
        let rho = Mat2::diag(0.6, 0.4);
        let m = [Mat2::diag(1.0, 0.0), Mat2::diag(0.0, 0.9)];
        assert!(matches!(
            cfi(&rho, &Mat2::zero(), &m),
            Err(Error::IncompleteMeasurement(_))
        ));
    }

    #[test]
    fn reparametrize() {
        assert_eq!(qfi_reparametrize(3.5, 1.0).unwrap(), 3.5);
        assert_eq!(qfi_reparametrize(4.0, 2.0).unwrap(), 1.0);
        assert!(matches!(
            qfi_reparametrize(1.0, 0.0),
            Err(Error::ZeroJacobian)
        ));
    }

    #[test]
    fn one_parameter_report_is_scalar_qfi() {
        let rho = bloch_to_matrix(&[0.2, 0.4, 0.1]).unwrap();
        let d = Mat2::from_pauli(0.0, &[0.1, -0.3, 0.2]);
        let rep = qfim_from_jet(&rho, &[d]).unwrap();
        assert!((rep.scalar() - qfi(&rho, &d).unwrap()).abs() < 1e-15);
        assert!(rep.achievable && !rep.singular);
    }
}
