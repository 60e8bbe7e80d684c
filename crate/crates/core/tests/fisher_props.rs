use num_complex::Complex64;
use proptest::prelude::*;
use qmeasure::fisher::sld_eigenbasis_measurement;
use qmeasure::{cfi, qfi, qfim_from_jet, sld, Information, Mat2};
use std::f64::consts::{PI, TAU};

fn pauli(a: f64, v: [f64; 3]) -> Mat2 {
    Mat2::new(
        Complex64::new(a + v[2], 0.0),
        Complex64::new(v[0], -v[1]),
        Complex64::new(v[0], v[1]),
        Complex64::new(a - v[2], 0.0),
    )
}

fn state(r: [f64; 3]) -> Mat2 {
    pauli(0.5, [0.5 * r[0], 0.5 * r[1], 0.5 * r[2]])
}

fn tangent(d: [f64; 3]) -> Mat2 {
    pauli(0.0, [0.5 * d[0], 0.5 * d[1], 0.5 * d[2]])
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn unit(t: f64, p: f64) -> [f64; 3] {
    [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
}

/// `|ṙ|² + (r·ṙ)²/(1−|r|²)`, or `|ṙ|²` on the surface with `ṙ ⊥ r`.
fn bloch_qfi(r: [f64; 3], d: [f64; 3]) -> f64 {
    let rr = dot(r, r);
    if (1.0 - rr).abs() < 1e-14 {
        dot(d, d)
    } else {
        dot(d, d) + dot(r, d).powi(2) / (1.0 - rr)
    }
}

prop_compose! {
    /// A state and a derivative; every fifth draw is pure with a tangent derivative.
    fn jet()(pure in 0usize..5, len in 0.0..0.97f64, t in 0.0..PI, p in 0.0..TAU,
             dl in 0.05..3.0f64, dt in 0.0..PI, dp in 0.0..TAU)
        -> ([f64; 3], [f64; 3]) {
        let n = unit(t, p);
        let mut d = unit(dt, dp).map(|c| c * dl);
        if pure == 0 {
            let k = dot(n, d);
            d = [d[0] - k * n[0], d[1] - k * n[1], d[2] - k * n[2]];
            (n, d)
        } else {
            (n.map(|c| c * len), d)
        }
    }
}

fn max_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut m = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a.a[i][j] - b.a[i][j]).norm());
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn sld_solves_its_equation((r, d) in jet()) {
        let (rho, drho) = (state(r), tangent(d));
        let l = sld(&rho, &drho).unwrap();
        let lhs = (rho * l + l * rho).scale(0.5);
        prop_assert!(max_diff(&lhs, &drho) <= 1e-10);
        prop_assert!(max_diff(&l, &l.adjoint()) <= 1e-10);
    }

    #[test]
    fn spectral_qfi_matches_bloch_formula((r, d) in jet()) {
        let f = qfi(&state(r), &tangent(d)).unwrap();
        let want = bloch_qfi(r, d);
        prop_assert!((f - want).abs() <= 1e-9 * want.max(1.0), "{} vs {}", f, want);
    }

    #[test]
    fn sld_eigenbasis_saturates_qfi((r, d) in jet()) {
        let (rho, drho) = (state(r), tangent(d));
        let f = qfi(&rho, &drho).unwrap();
        let meas = sld_eigenbasis_measurement(&rho, &drho).unwrap();
        let Information::Finite(c) = cfi(&rho, &drho, &meas).unwrap() else {
            return Err(TestCaseError::fail("unbounded CFI"));
        };
        prop_assert!((c - f).abs() <= 1e-8 * f.max(1.0), "{} vs {}", c, f);
    }

    #[test]
    fn projective_cfi_never_exceeds_qfi((r, d) in jet(), mt in 0.0..PI, mp in 0.0..TAU) {
        let (rho, drho) = (state(r), tangent(d));
        let f = qfi(&rho, &drho).unwrap();
        let m = unit(mt, mp);
        let meas = [pauli(0.5, m.map(|c| 0.5 * c)), pauli(0.5, m.map(|c| -0.5 * c))];
        match cfi(&rho, &drho, &meas).unwrap() {
            Information::Finite(c) => prop_assert!(c <= f + 1e-9 * f.max(1.0), "{} > {}", c, f),
            Information::Unbounded => prop_assert!(false, "unbounded CFI"),
        }
    }

    #[test]
    fn real_families_have_zero_uhlmann(
        len in 0.0..0.97f64, t in 0.0..TAU,
        d1 in (-2.0..2.0f64, -2.0..2.0f64), d2 in (-2.0..2.0f64, -2.0..2.0f64),
    ) {
        let r = [len * t.sin(), 0.0, len * t.cos()];
        let ds = [tangent([d1.0, 0.0, d1.1]), tangent([d2.0, 0.0, d2.1])];
        let rep = qfim_from_jet(&state(r), &ds).unwrap();
        prop_assert!(rep.max_uhlmann() <= 1e-9);
        prop_assert!(rep.achievable);
        for (i, d) in ds.iter().enumerate() {
            let want = qfi(&state(r), d).unwrap();
            prop_assert!((rep.qfim[(i, i)] - want).abs() <= 1e-9 * want.max(1.0));
        }
        prop_assert!((rep.qfim[(0, 1)] - rep.qfim[(1, 0)]).abs() <= 1e-12);
    }
}

#[test]
fn orthogonal_rotations_are_incompatible() {
    // ρ = ½(I + r σ_z) rotated about x and about y
    let r = 0.6;
    let rho = state([0.0, 0.0, r]);
    let rep = qfim_from_jet(&rho, &[tangent([0.0, r, 0.0]), tangent([r, 0.0, 0.0])]).unwrap();
    assert!(!rep.achievable);
    assert!((rep.qfim[(0, 0)] - r * r).abs() < 1e-12);
    assert!(rep.qfim[(0, 1)].abs() < 1e-12);
    // Im Tr[ρ L_1 L_2] with L_k = ṙ_k·σ gives r³ up to sign
    assert!((rep.uhlmann[(0, 1)].abs() - r.powi(3)).abs() < 1e-12);
}
