use nalgebra::DMatrix;
use proptest::prelude::*;
use qmeasure::criteria::{CaseConfig, CaseId, OutcomeMode, ProbeSpec};
use qmeasure::povm::{MeasurementFamily, Outcome, ParamFn};
use qmeasure::{
    of_error, optimize_probe, or_error, ErrorStatus, Objective, OptimizerBudget, QubitState,
    WeightMatrix,
};
use std::f64::consts::{FRAC_PI_2, PI};

fn budget() -> OptimizerBudget {
    OptimizerBudget {
        r_points: 9,
        phi1_points: 13,
        phi2_points: 13,
        max_iterations: 200,
        shrink_tolerance: 1e-10,
    }
}

/// Σ_i √(p_i² − q_i²)(p_i + q_i cos φ)² / (p_i sin φ) for a pure probe, with
/// (p, q) = (α, β) and (1−α, −β).
fn or_pure_oracle(alpha: f64, beta: f64, phi1: f64) -> f64 {
    [(alpha, beta), (1.0 - alpha, -beta)]
        .iter()
        .map(|&(p, q)| (p * p - q * q).sqrt() * (p + q * phi1.cos()).powi(2) / (p * phi1.sin()))
        .sum()
}

prop_compose! {
    fn interior()(alpha in 0.1..0.9f64, t in 0.05..0.9f64, sign in prop::bool::ANY) -> (f64, f64) {
        let b = t * alpha.min(1.0 - alpha);
        (alpha, if sign { b } else { -b })
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn optimum_beats_random_probes((alpha, beta) in interior(), which in 0usize..3, seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let (mf, x) = match which {
            0 => (MeasurementFamily::beta_estimation(alpha), beta),
            1 => (MeasurementFamily::alpha_estimation(beta), alpha),
            _ => (MeasurementFamily::theta_beta_estimation(alpha), (beta / alpha).acos().min(1.5)),
        };
        let w = WeightMatrix::identity(1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for obj in [Objective::Or, Objective::Of] {
            let Ok(opt) = optimize_probe(obj, &mf, &[x], &w, &budget()) else { continue };
            let Some(best) = opt.best_value.finite() else { continue };
            for _ in 0..50 {
                let p = QubitState::new(
                    rng.random_range(0.0..=1.0),
                    rng.random_range(0.0..=PI),
                    rng.random_range(0.0..2.0 * PI),
                ).unwrap();
                let r = match obj {
                    Objective::Or => or_error(&mf, &p, &[x], &w),
                    Objective::Of => of_error(&mf, &p, &[x], &w),
                };
                if let Ok(r) = r {
                    if let Some(v) = r.value.finite() {
                        prop_assert!(best <= v * (1.0 + 1e-9), "{:?}: {} > {}", obj, best, v);
                    }
                }
            }
        }
    }

    #[test]
    fn rescaling_the_parameter_rescales_the_error(
        (alpha, beta) in interior(),
        c in prop::sample::select(vec![0.5, 2.0, -2.0]),
        phi1 in 0.2..2.9f64, r in 0.2..1.0f64,
    ) {
        // β = c·x, so Δx = Δβ/|c|
        let direct = MeasurementFamily::beta_estimation(alpha);
        let scaled = MeasurementFamily::new(
            1,
            ParamFn::Const(alpha),
            ParamFn::Linear { index: 0, scale: c, offset: 0.0 },
            ParamFn::Const(0.0),
        ).unwrap();
        let p = QubitState::new(r, phi1, 0.3).unwrap();
        let w = WeightMatrix::identity(1);
        let a = of_error(&direct, &p, &[beta], &w).unwrap().value.value();
        let b = of_error(&scaled, &p, &[beta / c], &w).unwrap().value.value();
        prop_assert!((b - a / c.abs()).abs() <= 1e-9 * a.max(1.0), "{} vs {}", b, a / c.abs());
        let a = or_error(&direct, &p, &[beta], &w).unwrap().value.value();
        let b = or_error(&scaled, &p, &[beta / c], &w).unwrap().value.value();
        prop_assert!((b - a / c.abs()).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn heavier_weights_never_lower_the_error(
        alpha in 0.2..0.8f64, t in 0.1..0.8f64, theta in 0.1..3.0f64, r in 0.1..0.9f64,
        extra in (0.0..2.0f64, 0.0..2.0f64, -1.0..1.0f64),
    ) {
        let beta = t * alpha.min(1.0 - alpha);
        let cfg = CaseConfig::new(
            CaseId::II, alpha, beta, theta,
            ProbeSpec::Orthogonal { r, sign: 1.0 },
            OutcomeMode::Remembered(Outcome::First),
        );
        let mf = cfg.measurement_family();
        let probe = cfg.probe_state().unwrap();
        let x = cfg.point();
        let w1 = WeightMatrix::identity(2);
        // W2 = I + LLᵀ ⪰ W1
        let (a, b, c) = extra;
        let p = DMatrix::from_row_slice(2, 2, &[a * a, a * c, a * c, c * c + b * b]);
        let w2 = WeightMatrix::new(DMatrix::identity(2, 2) + p).unwrap();
        for f in [or_error, of_error] {
            let e1 = f(&mf, &probe, &x, &w1).unwrap();
            let e2 = f(&mf, &probe, &x, &w2).unwrap();
            if e1.status == ErrorStatus::Ok && e2.status == ErrorStatus::Ok {
                prop_assert!(e2.value.value() >= e1.value.value() * (1.0 - 1e-12));
            }
        }
    }
}

#[test]
fn pure_probe_or_error_matches_formula() {
    let w = WeightMatrix::identity(1);
    for &alpha in &[0.15, 0.3, 0.4, 0.6, 0.85] {
        let mf = MeasurementFamily::beta_estimation(alpha);
        for k in 1..12 {
            let beta = alpha.min(1.0 - alpha) * (k as f64 / 12.0 - 0.45);
            for j in 1..10 {
                let phi1 = PI * j as f64 / 10.0;
                let p = QubitState::new(1.0, phi1, 0.0).unwrap();
                let got = or_error(&mf, &p, &[beta], &w).unwrap().value.value();
                let want = or_pure_oracle(alpha, beta, phi1);
                assert!(
                    (got - want).abs() <= 1e-9 * want,
                    "alpha {alpha} beta {beta} phi1 {phi1}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn equatorial_pure_probe_gives_forgotten_minimum() {
    // 1/Δ² = h_β²/(1−h²) for the β family, h_α²/(1−h²) for the α family
    let w = WeightMatrix::identity(1);
    let plus = QubitState::new(1.0, FRAC_PI_2, 0.0).unwrap();
    for &(alpha, beta) in &[(0.4f64, 0.1f64), (0.25, -0.2), (0.7, 0.25)] {
        let s1 = (alpha * alpha - beta * beta).sqrt();
        let s2 = ((1.0 - alpha) * (1.0 - alpha) - beta * beta).sqrt();
        let h = s1 + s2;
        let hb = -beta / s1 - beta / s2;
        let ha = alpha / s1 - (1.0 - alpha) / s2;
        let db = of_error(
            &MeasurementFamily::beta_estimation(alpha),
            &plus,
            &[beta],
            &w,
        )
        .unwrap();
        let da = of_error(
            &MeasurementFamily::alpha_estimation(beta),
            &plus,
            &[alpha],
            &w,
        )
        .unwrap();
        let want_b = ((1.0 - h * h) / (hb * hb)).sqrt();
        let want_a = ((1.0 - h * h) / (ha * ha)).sqrt();
        assert!((db.value.value() - want_b).abs() <= 1e-9 * want_b);
        assert!((da.value.value() - want_a).abs() <= 1e-9 * want_a);
    }
}

#[test]
fn reference_point_values() {
    let w = WeightMatrix::identity(1);
    let plus = QubitState::plus();
    let or = or_error(&MeasurementFamily::alpha_estimation(0.1), &plus, &[0.4], &w).unwrap();
    assert!((or.value.value() - 2.74947).abs() < 1e-4);
    let of = optimize_probe(
        Objective::Of,
        &MeasurementFamily::alpha_estimation(0.1),
        &[0.4],
        &w,
        &OptimizerBudget::default(),
    )
    .unwrap();
    assert!((of.best_value.value() - 10.978).abs() < 1e-3);
    assert!(or.value.value() < of.best_value.value());
}
