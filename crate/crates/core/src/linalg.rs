//! Closed-form 2×2 complex linear algebra for qubit states and effects.
//!
//! Every matrix here is a 2×2 complex matrix. Hermitian matrices are handled
//! through their Pauli decomposition `M = a·I + b·σ`, which gives exact
//! eigenvalues `a ± |b|`, eigenvectors along `±b̂` and square roots without any
//! iteration.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance for Hermiticity and positivity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A real 3-vector (Bloch vectors, measurement axes).
pub type Vec3 = [f64; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn axpy(s: f64, x: &Vec3, y: &Vec3) -> Vec3 {
    [s * x[0] + y[0], s * x[1] + y[1], s * x[2] + y[2]]
}

/// A 2×2 complex matrix stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: [[Complex64; 2]; 2],
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.a[0][0], self.a[0][1], self.a[1][0], self.a[1][1]
        )
    }
}

impl Mat2 {
    pub const fn new(a00: Complex64, a01: Complex64, a10: Complex64, a11: Complex64) -> Self {
        Mat2 {
            a: [[a00, a01], [a10, a11]],
        }
    }

    /// Matrix with real entries.
    pub const fn real(a00: f64, a01: f64, a10: f64, a11: f64) -> Self {
        Mat2::new(
            Complex64::new(a00, 0.0),
            Complex64::new(a01, 0.0),
            Complex64::new(a10, 0.0),
            Complex64::new(a11, 0.0),
        )
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn sigma_x() -> Self {
        Mat2::new(ZERO, ONE, ONE, ZERO)
    }

    pub const fn sigma_y() -> Self {
        Mat2::new(
            ZERO,
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            ZERO,
        )
    }

    pub const fn sigma_z() -> Self {
        Mat2::real(1.0, 0.0, 0.0, -1.0)
    }

    pub fn diag(d0: f64, d1: f64) -> Self {
        Mat2::real(d0, 0.0, 0.0, d1)
    }

    /// `a·I + v·σ`.
    pub fn from_pauli(a: f64, v: &Vec3) -> Self {
        Mat2::new(
            Complex64::new(a + v[2], 0.0),
            Complex64::new(v[0], -v[1]),
            Complex64::new(v[0], v[1]),
            Complex64::new(a - v[2], 0.0),
        )
    }

    /// `σ_n̂ = n̂·σ`.
    pub fn sigma(n: &Vec3) -> Self {
        Mat2::from_pauli(0.0, n)
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[Complex64; 2], v: &[Complex64; 2]) -> Self {
        Mat2::new(
            u[0] * v[0].conj(),
            u[0] * v[1].conj(),
            u[1] * v[0].conj(),
            u[1] * v[1].conj(),
        )
    }

    pub fn trace(&self) -> Complex64 {
        self.a[0][0] + self.a[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }

    pub fn adjoint(&self) -> Self {
        Mat2::new(
            self.a[0][0].conj(),
            self.a[1][0].conj(),
            self.a[0][1].conj(),
            self.a[1][1].conj(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_c(Complex64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        Mat2::new(
            self.a[0][0] * s,
            self.a[0][1] * s,
            self.a[1][0] * s,
            self.a[1][1] * s,
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.a
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.a
            .iter()
            .flatten()
            .zip(other.a.iter().flatten())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// `⟨u|M|v⟩`.
    pub fn sandwich(&self, u: &[Complex64; 2], v: &[Complex64; 2]) -> Complex64 {
        let mv0 = self.a[0][0] * v[0] + self.a[0][1] * v[1];
        let mv1 = self.a[1][0] * v[0] + self.a[1][1] * v[1];
        u[0].conj() * mv0 + u[1].conj() * mv1
    }

    pub fn is_finite(&self) -> bool {
        self.a
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let d0 = self.a[0][0].im.abs();
        let d1 = self.a[1][1].im.abs();
        let off = (self.a[0][1] - self.a[1][0].conj()).norm();
        d0.max(d1).max(off)
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_finite() && self.hermiticity_error() <= HERMITIAN_TOL
    }

    /// Hermitian part `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale(0.5)
    }

    /// True when every entry has a vanishing imaginary part.
    pub fn is_real(&self, tol: f64) -> bool {
        self.a.iter().flatten().all(|z| z.im.abs() <= tol)
    }

    /// Pauli coefficients `(a, b)` of a Hermitian matrix `a·I + b·σ`.
    pub fn pauli_coefficients(&self) -> (f64, Vec3) {
        let a = 0.5 * (self.a[0][0].re + self.a[1][1].re);
        let bz = 0.5 * (self.a[0][0].re - self.a[1][1].re);
        let off = 0.5 * (self.a[0][1] + self.a[1][0].conj());
        (a, [off.re, -off.im, bz])
    }

    /// Eigenvalues `(λ₀, λ₁)` of a Hermitian matrix, descending.
    pub fn hermitian_eigenvalues(&self) -> (f64, f64) {
        let (a, b) = self.pauli_coefficients();
        let nb = norm(&b);
        (a + nb, a - nb)
    }

    pub fn is_psd(&self) -> bool {
        self.is_hermitian() && self.hermitian_eigenvalues().1 >= -HERMITIAN_TOL
    }

    pub fn is_density(&self, trace_tol: f64) -> bool {
        self.is_psd() && (self.trace().re - 1.0).abs() <= trace_tol
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a[0][0] + o.a[0][0],
            self.a[0][1] + o.a[0][1],
            self.a[1][0] + o.a[1][0],
            self.a[1][1] + o.a[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a[0][0] - o.a[0][0],
            self.a[0][1] - o.a[0][1],
            self.a[1][0] - o.a[1][0],
            self.a[1][1] - o.a[1][1],
        )
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.a;
        let b = &o.a;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        self.scale(s)
    }
}

/// Spectral decomposition of a 2×2 Hermitian matrix.
#[derive(Debug, Clone, Copy)]
pub struct EigenPair2 {
    pub lambda0: f64,
    pub lambda1: f64,
    pub e0: [Complex64; 2],
    pub e1: [Complex64; 2],
}

impl EigenPair2 {
    /// `λ₀|e₀⟩⟨e₀| + λ₁|e₁⟩⟨e₁|`.
    pub fn reconstruct(&self) -> Mat2 {
        Mat2::outer(&self.e0, &self.e0).scale(self.lambda0)
            + Mat2::outer(&self.e1, &self.e1).scale(self.lambda1)
    }

    pub fn vectors(&self) -> [[Complex64; 2]; 2] {
        [self.e0, self.e1]
    }

    pub fn values(&self) -> [f64; 2] {
        [self.lambda0, self.lambda1]
    }
}

fn require_hermitian(m: &Mat2) -> Result<()> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let err = m.hermiticity_error();
    if err > HERMITIAN_TOL {
        return Err(Error::NotHermitian(err));
    }
    Ok(())
}

/// Closed-form eigendecomposition of a Hermitian 2×2 matrix.
///
/// Eigenvalues are returned in descending order. A degenerate spectrum returns
/// the computational basis.
pub fn eig_hermitian(m: &Mat2) -> Result<EigenPair2> {
    require_hermitian(m)?;
    let (a, b) = m.pauli_coefficients();
    let nb = norm(&b);
    if nb == 0.0 {
        return Ok(EigenPair2 {
            lambda0: a,
            lambda1: a,
            e0: [ONE, ZERO],
            e1: [ZERO, ONE],
        });
    }
    // Eigenvector of b̂·σ with eigenvalue +1, built from whichever column of
    // (|b|·I + b·σ) is better conditioned.
    let raw = if b[2] >= 0.0 {
        [Complex64::new(nb + b[2], 0.0), Complex64::new(b[0], b[1])]
    } else {
        [Complex64::new(b[0], -b[1]), Complex64::new(nb - b[2], 0.0)]
    };
    let len = (raw[0].norm_sqr() + raw[1].norm_sqr()).sqrt();
    let e0 = [raw[0] / len, raw[1] / len];
    let e1 = [-e0[1].conj(), e0[0].conj()];
    Ok(EigenPair2 {
        lambda0: a + nb,
        lambda1: a - nb,
        e0,
        e1,
    })
}

/// Positive semidefinite square root of a PSD matrix.
pub fn psd_sqrt(m: &Mat2) -> Result<Mat2> {
    require_hermitian(m)?;
    let (a, b) = m.pauli_coefficients();
    let nb = norm(&b);
    let low = a - nb;
    if low < -HERMITIAN_TOL {
        return Err(Error::NotPositive(low));
    }
    let hi = (a + nb).max(0.0).sqrt();
    let lo = low.max(0.0).sqrt();
    let p = 0.5 * (hi + lo);
    if nb == 0.0 {
        return Ok(Mat2::identity().scale(p));
    }
    let q = 0.5 * (hi - lo) / nb;
    Ok(Mat2::from_pauli(p, &scale(&b, q)))
}

/// `AB − BA`.
pub fn commutator(a: &Mat2, b: &Mat2) -> Mat2 {
    *a * *b - *b * *a
}

/// `(I + v·σ)/2`.
pub fn bloch_to_matrix(v: &Vec3) -> Result<Mat2> {
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = norm(v);
    if n > 1.0 + HERMITIAN_TOL {
        return Err(Error::BlochOutsideBall(n));
    }
    Ok(Mat2::from_pauli(0.5, &scale(v, 0.5)))
}

/// Bloch vector `Tr[ρσ]` of a Hermitian matrix.
pub fn matrix_to_bloch(m: &Mat2) -> Result<Vec3> {
    require_hermitian(m)?;
    let (_, b) = m.pauli_coefficients();
    Ok(scale(&b, 2.0))
}

/// Qubit state in spherical Bloch coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub r: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl QubitState {
    pub fn new(r: f64, phi1: f64, phi2: f64) -> Result<Self> {
        if !(r.is_finite() && phi1.is_finite() && phi2.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(-HERMITIAN_TOL..=1.0 + HERMITIAN_TOL).contains(&r) {
            return Err(Error::BlochOutsideBall(r));
        }
        Ok(QubitState {
            r: r.clamp(0.0, 1.0),
            phi1,
            phi2,
        })
    }

    pub fn maximally_mixed() -> Self {
        QubitState {
            r: 0.0,
            phi1: 0.0,
            phi2: 0.0,
        }
    }

    /// The `|+⟩` state.
    pub fn plus() -> Self {
        QubitState {
            r: 1.0,
            phi1: std::f64::consts::FRAC_PI_2,
            phi2: 0.0,
        }
    }

    /// Canonical coordinates `r ∈ [0,1]`, `φ₁ ∈ [0,π]`, `φ₂ ∈ [0,2π)` of a Bloch vector.
    pub fn from_bloch(v: &Vec3) -> Result<Self> {
        let r = norm(v);
        if !r.is_finite() {
            return Err(Error::NonFinite);
        }
        if r > 1.0 + HERMITIAN_TOL {
            return Err(Error::BlochOutsideBall(r));
        }
        if r == 0.0 {
            return Ok(QubitState::maximally_mixed());
        }
        let phi1 = (v[2] / r).clamp(-1.0, 1.0).acos();
        let mut phi2 = v[1].atan2(v[0]);
        if phi2 < 0.0 {
            phi2 += 2.0 * std::f64::consts::PI;
        }
        Ok(QubitState {
            r: r.min(1.0),
            phi1,
            phi2,
        })
    }

    pub fn unit_direction(&self) -> Vec3 {
        let (s1, c1) = self.phi1.sin_cos();
        let (s2, c2) = self.phi2.sin_cos();
        [s1 * c2, s1 * s2, c1]
    }

    pub fn bloch(&self) -> Vec3 {
        scale(&self.unit_direction(), self.r)
    }

    pub fn to_matrix(&self) -> Mat2 {
        Mat2::from_pauli(0.5, &scale(&self.bloch(), 0.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eig_diagonal() {
        let e = eig_hermitian(&Mat2::diag(0.5, 0.3)).unwrap();
        assert!((e.lambda0 - 0.5).abs() < 1e-15);
        assert!((e.lambda1 - 0.3).abs() < 1e-15);
        assert!((e.e0[0] - ONE).norm() < 1e-15 && e.e0[1].norm() < 1e-15);
        assert!(e.e1[0].norm() < 1e-15 && (e.e1[1] - ONE).norm() < 1e-15);
    }

    #[test]
    fn eig_plus_projector() {
        let m = (Mat2::identity() + Mat2::sigma_x()).scale(0.5);
        let e = eig_hermitian(&m).unwrap();
        assert!((e.lambda0 - 1.0).abs() < 1e-15 && e.lambda1.abs() < 1e-15);
        // overall phase is fixed by the construction (real positive first entry)
        assert!((e.e0[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((e.e0[1] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eig_unit_bloch_matches_characteristic_polynomial() {
        let m = Mat2::from_pauli(0.5, &[0.3, 0.0, 0.4]);
        let e = eig_hermitian(&m).unwrap();
        // roots of λ² − Tr(M)λ + det(M)
        let tr = m.trace().re;
        let det = m.det().re;
        let disc = (tr * tr - 4.0 * det).sqrt();
        assert!((e.lambda0 - (tr + disc) / 2.0).abs() < 1e-14);
        assert!((e.lambda1 - (tr - disc) / 2.0).abs() < 1e-14);
        assert!((e.lambda0 - 1.0).abs() < 1e-14 && e.lambda1.abs() < 1e-14);
        // M|e₀⟩ = λ₀|e₀⟩
        let v0 = m.a[0][0] * e.e0[0] + m.a[0][1] * e.e0[1];
        let v1 = m.a[1][0] * e.e0[0] + m.a[1][1] * e.e0[1];
        assert!((v0 - e.e0[0]).norm() < 1e-14 && (v1 - e.e0[1]).norm() < 1e-14);
    }

    #[test]
    fn eig_degenerate_is_computational_basis() {
        let e = eig_hermitian(&Mat2::identity().scale(0.5)).unwrap();
        assert_eq!(e.e0, [ONE, ZERO]);
        assert_eq!(e.e1, [ZERO, ONE]);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = Mat2::new(ONE, c(0.2, 0.0), c(0.1, 0.0), ONE);
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn sqrt_examples() {
        let id = psd_sqrt(&Mat2::identity()).unwrap();
        assert!(id.max_abs_diff(&Mat2::identity()) < 1e-15);

        let m = Mat2::from_pauli(0.4, &[0.0, 0.0, 0.1]);
        let s = psd_sqrt(&m).unwrap();
        assert!(s.max_abs_diff(&Mat2::diag(0.5f64.sqrt(), 0.3f64.sqrt())) < 1e-15);
        let (p, q) = s.pauli_coefficients();
        assert!((p - 0.62741).abs() < 1e-5 && (q[2] - 0.07969).abs() < 1e-5);

        let plus = (Mat2::identity() + Mat2::sigma_x()).scale(0.5);
        assert!(psd_sqrt(&plus).unwrap().max_abs_diff(&plus) < 1e-15);
    }

    #[test]
    fn sqrt_rejects_negative() {
        let m = Mat2::from_pauli(0.1, &[0.0, 0.0, 0.2]);
        assert!(matches!(psd_sqrt(&m), Err(Error::NotPositive(_))));
    }

    #[test]
    fn commutator_pauli_algebra() {
        let x = Mat2::sigma_x();
        let y = Mat2::sigma_y();
        assert_eq!(commutator(&x, &x), Mat2::zero());
        let xy = commutator(&x, &y);
        assert!(xy.max_abs_diff(&Mat2::sigma_z().scale_c(c(0.0, 2.0))) < 1e-15);
        let a = Mat2::new(c(0.3, 0.1), c(-1.0, 2.0), c(0.5, 0.5), c(2.0, -1.0));
        assert_eq!(commutator(&a, &Mat2::identity()), Mat2::zero());
        assert_eq!(commutator(&a, &x), -commutator(&x, &a));
    }

    #[test]
    fn bloch_examples() {
        let m = bloch_to_matrix(&[0.0, 0.0, 0.0]).unwrap();
        assert!(m.max_abs_diff(&Mat2::identity().scale(0.5)) < 1e-15);
        let m = bloch_to_matrix(&[0.0, 0.0, 1.0]).unwrap();
        assert!(m.max_abs_diff(&Mat2::diag(1.0, 0.0)) < 1e-15);
        assert!(matches!(
            bloch_to_matrix(&[0.8, 0.0, 0.8]),
            Err(Error::BlochOutsideBall(_))
        ));
    }

    #[test]
    fn qubit_state_round_trip() {
        let s = QubitState::new(0.7, 1.1, 4.0).unwrap();
        let back = QubitState::from_bloch(&matrix_to_bloch(&s.to_matrix()).unwrap()).unwrap();
        assert!((back.r - 0.7).abs() < 1e-12);
        assert!((back.phi1 - 1.1).abs() < 1e-12);
        assert!((back.phi2 - 4.0).abs() < 1e-12);
        assert!(QubitState::new(1.2, 0.0, 0.0).is_err());
        let plus = QubitState::plus().bloch();
        assert!((plus[0] - 1.0).abs() < 1e-15 && plus[2].abs() < 1e-15);
        let _ = (FRAC_PI_2, PI);
    }

    fn arb_psd() -> impl Strategy<Value = Mat2> {
        (
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
        )
            .prop_map(|(a, b, c_, d, e, f, g, h)| {
                let x = Mat2::new(c(a, b), c(c_, d), c(e, f), c(g, h));
                x * x.adjoint()
            })
    }

    fn arb_ball() -> impl Strategy<Value = Vec3> {
        (0.0f64..=1.0, 0.0f64..PI, 0.0f64..2.0 * PI).prop_map(|(r, p1, p2)| {
            QubitState {
                r,
                phi1: p1,
                phi2: p2,
            }
            .bloch()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn sqrt_squares_back(m in arb_psd()) {
            let s = psd_sqrt(&m).unwrap();
            prop_assert!(s.is_psd());
            prop_assert!((s * s - m).frobenius_norm() <= 1e-12 * m.frobenius_norm().max(1.0));
        }

        #[test]
        fn eig_reconstructs(m in arb_psd()) {
            let e = eig_hermitian(&m).unwrap();
            let ip = e.e0[0].conj() * e.e1[0] + e.e0[1].conj() * e.e1[1];
            prop_assert!(ip.norm() <= 1e-12);
            prop_assert!(e.lambda0 >= e.lambda1);
            prop_assert!((e.reconstruct() - m).frobenius_norm() <= 1e-12 * m.frobenius_norm().max(1.0));
        }

        #[test]
        fn density_eigenvalues_sum_to_one(v in arb_ball()) {
            let e = eig_hermitian(&bloch_to_matrix(&v).unwrap()).unwrap();
            prop_assert!((e.lambda0 + e.lambda1 - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn bloch_round_trip(v in arb_ball()) {
            let m = bloch_to_matrix(&v).unwrap();
            prop_assert!((m.trace().re - 1.0).abs() <= 1e-15);
            prop_assert!(m.is_psd());
            let back = matrix_to_bloch(&m).unwrap();
            for i in 0..3 {
                prop_assert!((back[i] - v[i]).abs() <= 1e-12);
            }
            let st = QubitState::from_bloch(&v).unwrap();
            prop_assert!((norm(&matrix_to_bloch(&st.to_matrix()).unwrap()) - st.r).abs() <= 1e-12);
        }
    }
}
