//! Checkers for QCRB achievability and QFIM invertibility of two-outcome
//! measurement encodings, the four multiparameter cases, and the OR versus OF
//! comparison scans.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{
    optimize_probe, ErrorStatus, Objective, OptimizerBudget, ProbeOptimum, WeightMatrix,
};
use crate::fisher::{qfim_from_jet, FisherReport};
use crate::linalg::{commutator, scale, QubitState, Vec3};
use crate::povm::{
    family_nonselective, family_selective, AxisConvention, EncodedFamily, MeasurementFamily,
    Outcome, ParamFn,
};

/// Pairwise `|Im(s_i s̄_j)| / (|s_i||s_j|)` threshold.
pub const TOL_ACHIEVABLE: f64 = 1e-9;
/// Commutator threshold, relative to `‖∂_iρ‖‖∂_jρ‖`.
pub const TOL_COMMUTATOR: f64 = 1e-10;
/// Eigenvalue gap below which the state counts as maximally mixed.
pub const TOL_DEGENERATE: f64 = 1e-12;
/// A difference below this is a violation of "OR never beats OF".
pub const TOL_NONNEGATIVE: f64 = 1e-9;
/// A difference below this counts as a genuine OR advantage.
pub const TOL_ADVANTAGE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct CriterionVerdict {
    pub achievable: bool,
    pub qfim_invertible: bool,
    /// Largest `‖[∂_iρ, ∂_jρ]‖_F` over parameter pairs.
    pub derivative_commutator_norm: f64,
    /// Commutator norm divided by `‖∂_iρ‖‖∂_jρ‖`; 0 when either vanishes.
    pub commutator_relative: f64,
    /// Largest pairwise `|Im(s_i s̄_j)| / (|s_i||s_j|)`.
    pub offdiag_ratio_imag: f64,
    /// `s_i = ⟨e₀|∂_iρ|e₁⟩` in the eigenbasis of `ρ`.
    pub offdiag: Vec<Complex64>,
    /// Maximally mixed state: achievability holds trivially.
    pub degenerate: bool,
    pub max_uhlmann: f64,
    /// The off-diagonal test and the Uhlmann matrix agree.
    pub uhlmann_consistent: bool,
    pub conditioning: f64,
    pub qfim_det: f64,
    /// Given achievability: singular ⟺ vanishing commutator. `None` when the
    /// QCRB is not achievable or `m ≠ 2`.
    pub biconditional: Option<bool>,
}

impl CriterionVerdict {
    pub fn singular(&self) -> bool {
        !self.qfim_invertible
    }

    pub fn commuting(&self) -> bool {
        self.commutator_relative <= TOL_COMMUTATOR
    }
}

fn offdiag_ratio(s: &[Complex64]) -> f64 {
    let big = s.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let floor = 1e-12 * big.max(1e-300);
    let mut worst = 0.0f64;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let (a, b) = (s[i].norm(), s[j].norm());
            if a <= floor || b <= floor {
                continue;
            }
            worst = worst.max((s[i] * s[j].conj()).im.abs() / (a * b));
        }
    }
    worst
}

/// Evaluate every check on a precomputed report.
pub fn verdict_from_report(report: &FisherReport) -> CriterionVerdict {
    let e = &report.eigen;
    let degenerate = (e.lambda0 - e.lambda1).abs() < TOL_DEGENERATE;
    let offdiag: Vec<Complex64> = report
        .derivatives
        .iter()
        .map(|d| d.sandwich(&e.e0, &e.e1))
        .collect();
    let ratio = offdiag_ratio(&offdiag);
    let achievable = degenerate || ratio <= TOL_ACHIEVABLE;

    let m = report.derivatives.len();
    let mut comm = 0.0f64;
    let mut comm_rel = 0.0f64;
    for i in 0..m {
        for j in i + 1..m {
            let (a, b) = (&report.derivatives[i], &report.derivatives[j]);
            let c = commutator(a, b).frobenius_norm();
            comm = comm.max(c);
            let (na, nb) = (a.frobenius_norm(), b.frobenius_norm());
            // a derivative at rounding level is zero and commutes with anything
            let null = TOL_DEGENERATE * na.max(nb).max(1.0);
            if na > null && nb > null {
                comm_rel = comm_rel.max(c / (na * nb));
            }
        }
    }
    let qfim_invertible = !report.singular;
    let biconditional = if m == 2 && achievable {
        Some(report.singular == (comm_rel <= TOL_COMMUTATOR))
    } else {
        None
    };
    CriterionVerdict {
        achievable,
        qfim_invertible,
        derivative_commutator_norm: comm,
        commutator_relative: comm_rel,
        offdiag_ratio_imag: ratio,
        offdiag,
        degenerate,
        max_uhlmann: report.max_uhlmann(),
        uhlmann_consistent: degenerate || achievable == report.achievable,
        conditioning: report.conditioning,
        qfim_det: report.qfim_det,
        biconditional,
    }
}

fn report_for(family: &EncodedFamily, x: &[f64]) -> Result<FisherReport> {
    let (rho, ds) = family.jet(x)?;
    qfim_from_jet(&rho, &ds)
}

/// Real-ratio test on the eigenbasis off-diagonals of `∂_iρ`.
pub fn check_achievability(family: &EncodedFamily, x: &[f64]) -> Result<CriterionVerdict> {
    if family.dim() < 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: family.dim(),
        });
    }
    Ok(verdict_from_report(&report_for(family, x)?))
}

/// Two-parameter invertibility check with the biconditional audit filled in.
pub fn check_invertibility(family: &EncodedFamily, x: &[f64]) -> Result<CriterionVerdict> {
    if family.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: family.dim(),
        });
    }
    Ok(verdict_from_report(&report_for(family, x)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    /// `x = (α, β)`
    I,
    /// `x = (α, θ)`
    II,
    /// `x = (β, θ)`
    III,
    /// `x = (α, β, θ)`
    IV,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [CaseId::I, CaseId::II, CaseId::III, CaseId::IV];

    pub fn dim(self) -> usize {
        match self {
            CaseId::IV => 3,
            _ => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::I => "I",
            CaseId::II => "II",
            CaseId::III => "III",
            CaseId::IV => "IV",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(CaseId::I),
            "II" | "2" => Ok(CaseId::II),
            "III" | "3" => Ok(CaseId::III),
            "IV" | "4" => Ok(CaseId::IV),
            _ => Err(Error::Config(format!("unknown case '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeMode {
    Remembered(Outcome),
    Forgotten,
}

impl OutcomeMode {
    pub const ALL: [OutcomeMode; 3] = [
        OutcomeMode::Remembered(Outcome::First),
        OutcomeMode::Remembered(Outcome::Second),
        OutcomeMode::Forgotten,
    ];

    pub fn label(self) -> &'static str {
        match self {
            OutcomeMode::Remembered(Outcome::First) => "branch1",
            OutcomeMode::Remembered(Outcome::Second) => "branch2",
            OutcomeMode::Forgotten => "forgotten",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeSpec {
    State(QubitState),
    /// Bloch vector `r · r̂` with `r̂ = −sign·∂n̂/∂θ`, orthogonal to the axis.
    Orthogonal {
        r: f64,
        sign: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseConfig {
    pub case: CaseId,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub probe: ProbeSpec,
    pub mode: OutcomeMode,
    pub convention: AxisConvention,
}

impl CaseConfig {
    pub fn new(
        case: CaseId,
        alpha: f64,
        beta: f64,
        theta: f64,
        probe: ProbeSpec,
        mode: OutcomeMode,
    ) -> Self {
        CaseConfig {
            case,
            alpha,
            beta,
            theta,
            probe,
            mode,
            convention: AxisConvention::default(),
        }
    }

    pub fn with_convention(mut self, convention: AxisConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn measurement_family(&self) -> MeasurementFamily {
        let param = ParamFn::param;
        use ParamFn::Const;
        let (a, b, t) = match self.case {
            CaseId::I => (param(0), param(1), Const(self.theta)),
            CaseId::II => (param(0), Const(self.beta), param(1)),
            CaseId::III => (Const(self.alpha), param(0), param(1)),
            CaseId::IV => (param(0), param(1), param(2)),
        };
        MeasurementFamily::new(self.case.dim(), a, b, t)
            .expect("case families are well formed")
            .with_convention(self.convention)
    }

    pub fn point(&self) -> Vec<f64> {
        match self.case {
            CaseId::I => vec![self.alpha, self.beta],
            CaseId::II => vec![self.alpha, self.theta],
            CaseId::III => vec![self.beta, self.theta],
            CaseId::IV => vec![self.alpha, self.beta, self.theta],
        }
    }

    pub fn probe_state(&self) -> Result<QubitState> {
        match self.probe {
            ProbeSpec::State(s) => Ok(s),
            ProbeSpec::Orthogonal { r, sign } => {
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::BlochOutsideBall(r));
                }
                let t = self.convention.axis_derivative(self.theta);
                QubitState::from_bloch(&scale(&t, -sign.signum() * r))
            }
        }
    }

    pub fn family(&self) -> Result<EncodedFamily> {
        let mf = self.measurement_family();
        // validates the parameter point
        mf.povm(&self.point())?;
        let probe = self.probe_state()?;
        Ok(match self.mode {
            OutcomeMode::Remembered(o) => family_selective(&mf, &probe, o),
            OutcomeMode::Forgotten => family_nonselective(&mf, &probe),
        })
    }
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub config: CaseConfig,
    pub verdict: CriterionVerdict,
    pub report: FisherReport,
}

/// Build the family of the configured case and run both checkers.
pub fn run_case(cfg: &CaseConfig) -> Result<CaseReport> {
    let family = cfg.family()?;
    let report = report_for(&family, &cfg.point())?;
    let verdict = verdict_from_report(&report);
    Ok(CaseReport {
        config: *cfg,
        verdict,
        report,
    })
}

/// A random valid measurement point and probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Instance {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub probe: QubitState,
}

/// Margin kept from the positivity boundary when sampling.
pub const SAMPLE_MARGIN: f64 = 0.05;
/// Mixed probes are drawn with `r ≤` this; every fifth instance is pure.
pub const SAMPLE_MAX_MIXED_R: f64 = 0.95;

fn random_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

/// Seeded instances with `SAMPLE_MARGIN` from the positivity boundary.
pub fn random_instances(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let alpha = rng.random_range(2.0 * SAMPLE_MARGIN..=1.0 - 2.0 * SAMPLE_MARGIN);
            let lim = alpha.min(1.0 - alpha) - SAMPLE_MARGIN;
            let beta = rng.random_range(-lim..=lim);
            let theta = rng.random_range(0.0..2.0 * PI);
            let r = if k % 5 == 4 {
                1.0
            } else {
                rng.random_range(0.0..=SAMPLE_MAX_MIXED_R)
            };
            let dir = random_direction(&mut rng);
            let probe = QubitState::from_bloch(&scale(&dir, r)).expect("inside the ball");
            Instance {
                alpha,
                beta,
                theta,
                probe,
            }
        })
        .collect()
}

/// Outcome of checking one case over a set of instances.
#[derive(Debug, Clone)]
pub struct CaseAudit {
    pub case: CaseId,
    pub rows: Vec<CaseReport>,
    pub passed: usize,
    pub total: usize,
}

impl CaseAudit {
    pub fn holds(&self) -> bool {
        self.passed == self.total
    }
}

/// The property a case is claimed to satisfy for one report.
pub fn case_claim(r: &CaseReport) -> bool {
    let v = &r.verdict;
    match r.config.case {
        CaseId::I | CaseId::IV => v.singular(),
        CaseId::II | CaseId::III => match r.config.probe {
            // orthogonal probes: achievable, and invertible iff mixed
            ProbeSpec::Orthogonal { r: norm, .. } => {
                let pure = (norm - 1.0).abs() < 1e-12;
                let needs_mixed = matches!(r.config.mode, OutcomeMode::Remembered(_));
                v.achievable && (!needs_mixed || v.qfim_invertible != pure)
            }
            ProbeSpec::State(_) => v.biconditional.unwrap_or(true),
        },
    }
}

/// Run a case over random instances: every outcome mode for cases I and IV,
/// orthogonal probes with the instance purity for II and III.
pub fn audit_case(case: CaseId, seed: u64, count: usize) -> Result<CaseAudit> {
    let instances = random_instances(seed, count);
    let mut configs = Vec::new();
    for inst in &instances {
        for mode in OutcomeMode::ALL {
            let probe = match case {
                CaseId::I | CaseId::IV => ProbeSpec::State(inst.probe),
                CaseId::II | CaseId::III => ProbeSpec::Orthogonal {
                    r: inst.probe.r,
                    sign: 1.0,
                },
            };
            configs.push(CaseConfig::new(
                case, inst.alpha, inst.beta, inst.theta, probe, mode,
            ));
        }
    }
    let rows: Vec<CaseReport> = configs
        .par_iter()
        .map(run_case)
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().filter(|r| case_claim(r)).count();
    Ok(CaseAudit {
        case,
        total: rows.len(),
        passed,
        rows,
    })
}

/// One instance of the singular ⟺ commuting audit.
#[derive(Debug, Clone)]
pub struct AuditRow {
    pub label: String,
    pub verdict: CriterionVerdict,
}

#[derive(Debug, Clone)]
pub struct BiconditionalAudit {
    pub rows: Vec<AuditRow>,
    pub agree: usize,
    pub singular: usize,
    /// Instances drawn but skipped because the QCRB was not achievable.
    pub skipped: usize,
}

impl BiconditionalAudit {
    pub fn holds(&self) -> bool {
        self.agree == self.rows.len()
    }
}

fn affine(c0: f64, g: [f64; 2]) -> ParamFn {
    ParamFn::Custom(Arc::new(move |x: &[f64]| {
        (c0 + g[0] * x[0] + g[1] * x[1], g.to_vec())
    }))
}

/// Draw two-parameter measurement families until `target` have an achievable
/// QCRB, alternating structured cases I–III with random affine couplings of
/// `(α, β, θ)` to `(x₁, x₂)`. Half the probes lie in the x–z plane.
pub fn biconditional_audit(seed: u64, target: usize) -> Result<BiconditionalAudit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(target);
    let mut skipped = 0;
    let mut k = 0usize;
    let max_draws = 100 * target.max(1);
    while rows.len() < target && k < max_draws {
        let mut inst = random_instances(rng.random(), 1)[0];
        if rng.random::<bool>() {
            // real encodings: achievable by construction
            inst.probe.phi2 = if rng.random::<bool>() { 0.0 } else { PI };
        }
        let mode = OutcomeMode::ALL[rng.random_range(0..3)];
        let (family, x, label) = if k.is_multiple_of(2) {
            let case = [CaseId::I, CaseId::II, CaseId::III][(k / 2) % 3];
            let cfg = CaseConfig::new(
                case,
                inst.alpha,
                inst.beta,
                inst.theta,
                ProbeSpec::State(inst.probe),
                mode,
            );
            (
                cfg.family()?,
                cfg.point(),
                format!("case-{case}/{}", mode.label()),
            )
        } else {
            let mut grad = || [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
            let (ga, gb, gt) = (grad(), grad(), grad());
            let mf = MeasurementFamily::new(
                2,
                affine(inst.alpha, ga),
                affine(inst.beta, gb),
                affine(inst.theta, gt),
            )?;
            let fam = match mode {
                OutcomeMode::Remembered(o) => family_selective(&mf, &inst.probe, o),
                OutcomeMode::Forgotten => family_nonselective(&mf, &inst.probe),
            };
            (fam, vec![0.0, 0.0], format!("affine/{}", mode.label()))
        };
        k += 1;
        let verdict = check_invertibility(&family, &x)?;
        if !verdict.achievable {
            skipped += 1;
            continue;
        }
        rows.push(AuditRow { label, verdict });
    }
    let agree = rows
        .iter()
        .filter(|r| r.verdict.biconditional == Some(true))
        .count();
    let singular = rows.iter().filter(|r| r.verdict.singular()).count();
    Ok(BiconditionalAudit {
        rows,
        agree,
        singular,
        skipped,
    })
}

/// Case II outcome-forgotten family with a probe `r(sin φ₁, 0, cos φ₁)` and
/// axis `(sin x₂, 0, cos x₂)`.
pub fn case2_forgotten(alpha: f64, beta: f64, r: f64, phi1: f64, x2: f64) -> Result<CaseReport> {
    let probe = QubitState::new(r, phi1, 0.0)?;
    let cfg = CaseConfig::new(
        CaseId::II,
        alpha,
        beta,
        x2,
        ProbeSpec::State(probe),
        OutcomeMode::Forgotten,
    );
    run_case(&cfg)
}

/// The stated commutation condition `tan x₂ = tan(φ₁ − 2x₂)`, tested as
/// `sin(3x₂ − φ₁) = 0` to stay finite at the poles of tan.
pub fn stated_commutation_condition(phi1: f64, x2: f64, tol: f64) -> bool {
    (3.0 * x2 - phi1).sin().abs() <= tol
}

/// The condition the derivatives actually obey: the probe lies along the axis.
pub fn axis_aligned_condition(phi1: f64, x2: f64, tol: f64) -> bool {
    (phi1 - x2).sin().abs() <= tol
}

#[derive(Debug, Clone)]
pub struct CommutationRow {
    pub phi1: f64,
    pub x2: f64,
    pub commutator: f64,
    pub commuting: bool,
    pub stated: bool,
    pub aligned: bool,
}

/// Fixed audit pairs: a third on `φ₁ = 3x₂`, a third on `φ₁ = x₂`, the rest generic.
pub fn commutation_pairs(count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|k| {
            let t = (k / 3) as f64 / (count / 3).max(1) as f64;
            let x2 = 0.12 + 0.9 * t;
            match k % 3 {
                0 => (3.0 * x2, x2),
                1 => (x2, x2),
                _ => (0.5 * x2 + 0.7, x2),
            }
        })
        .filter(|(p, _)| *p <= PI)
        .collect()
}

/// Evaluate the commutator of the Case II forgotten family on `pairs`.
pub fn commutation_audit(
    alpha: f64,
    beta: f64,
    r: f64,
    pairs: &[(f64, f64)],
) -> Result<Vec<CommutationRow>> {
    pairs
        .iter()
        .map(|&(phi1, x2)| {
            let rep = case2_forgotten(alpha, beta, r, phi1, x2)?;
            Ok(CommutationRow {
                phi1,
                x2,
                commutator: rep.verdict.derivative_commutator_norm,
                commuting: rep.verdict.commuting(),
                stated: stated_commutation_condition(phi1, x2, 1e-9),
                aligned: axis_aligned_condition(phi1, x2, 1e-9),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// `x₁ = β`, fixed `α`, axis ẑ.
    BetaEstimation,
    /// `x₁ = α`, fixed `β`, axis ẑ.
    AlphaEstimation,
    /// `θ = x₁`, `β = α cos x₁`.
    ThetaBetaEstimation,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::BetaEstimation => "beta-est",
            Scenario::AlphaEstimation => "alpha-est",
            Scenario::ThetaBetaEstimation => "theta-beta-est",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta-est" | "beta" | "1a" => Ok(Scenario::BetaEstimation),
            "alpha-est" | "alpha" | "1b" => Ok(Scenario::AlphaEstimation),
            "theta-beta-est" | "theta-beta" | "2" => Ok(Scenario::ThetaBetaEstimation),
            _ => Err(Error::Config(format!("unknown scenario '{s}'"))),
        }
    }
}

/// Sweep specification for [`advantage_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub alphas: Vec<f64>,
    /// Points on the swept axis: `β/min(α, 1−α)` for the first two scenarios,
    /// `θ` for the third.
    pub points: usize,
    /// Fixed margin from both ends of the swept axis.
    pub margin: f64,
    /// Additional margin as a fraction of the axis range.
    pub relative_margin: f64,
    pub budget: OptimizerBudget,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            alphas: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            points: 60,
            margin: 5e-3,
            relative_margin: 1e-4,
            budget: OptimizerBudget::default(),
        }
    }
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.points == 0 {
            return Err(Error::Config("scan grid is empty".into()));
        }
        for &a in &self.alphas {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Config(format!("alpha {a} outside (0, 1)")));
            }
        }
        if !(self.margin >= 0.0 && self.relative_margin >= 0.0) {
            return Err(Error::Config("margins must be non-negative".into()));
        }
        self.budget.validate()
    }

    /// Points on `[lo, hi]` shrunk by the margins at both ends.
    pub fn axis(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let m = self.margin + self.relative_margin * (hi - lo);
        let (a, b) = (lo + m, hi - m);
        if a > b {
            return Err(Error::Config("margins leave an empty axis".into()));
        }
        Ok(if self.points == 1 {
            vec![0.5 * (a + b)]
        } else {
            (0..self.points)
                .map(|k| a + (b - a) * k as f64 / (self.points - 1) as f64)
                .collect()
        })
    }
}

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    /// The estimated parameter's value.
    pub x: f64,
    pub or: ProbeOptimum,
    pub of: ProbeOptimum,
    /// `Δ̄_OR − Δ̄_OF` when both are finite.
    pub difference: Option<f64>,
    pub status: ErrorStatus,
}

impl ScanRow {
    pub fn beta_over_alpha(&self) -> f64 {
        self.beta / self.alpha
    }

    pub fn alpha_over_beta(&self) -> f64 {
        self.alpha / self.beta
    }
}

#[derive(Debug, Clone)]
pub struct ScanSummary {
    pub scenario: Scenario,
    pub min_difference: f64,
    pub all_nonnegative: bool,
    pub has_negative: bool,
    pub smallest_alpha_has_negative: bool,
    pub ok_rows: usize,
}

impl ScanSummary {
    /// Whether the scenario's stated qualitative claim held on this grid.
    pub fn claim_holds(&self) -> bool {
        match self.scenario {
            Scenario::BetaEstimation | Scenario::ThetaBetaEstimation => {
                self.ok_rows > 0 && self.all_nonnegative
            }
            Scenario::AlphaEstimation => self.has_negative && !self.smallest_alpha_has_negative,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scan {
    pub rows: Vec<ScanRow>,
    pub summary: ScanSummary,
}

/// The family, point and `(α, β, θ)` of one scan grid point.
pub fn scan_point(
    scenario: Scenario,
    alpha: f64,
    t: f64,
) -> (MeasurementFamily, f64, (f64, f64, f64)) {
    match scenario {
        Scenario::BetaEstimation => {
            let beta = t * alpha.min(1.0 - alpha);
            (
                MeasurementFamily::beta_estimation(alpha),
                beta,
                (alpha, beta, 0.0),
            )
        }
        Scenario::AlphaEstimation => {
            let beta = t * alpha.min(1.0 - alpha);
            (
                MeasurementFamily::alpha_estimation(beta),
                alpha,
                (alpha, beta, 0.0),
            )
        }
        Scenario::ThetaBetaEstimation => (
            MeasurementFamily::theta_beta_estimation(alpha),
            t,
            (alpha, alpha * t.cos(), t),
        ),
    }
}

/// Optimized OR and OF errors over the scenario grid.
pub fn advantage_scan(scenario: Scenario, grid: &ScanGrid) -> Result<Scan> {
    grid.validate()?;
    let axis = match scenario {
        Scenario::ThetaBetaEstimation => grid.axis(0.0, FRAC_PI_2)?,
        _ => grid.axis(0.0, 1.0)?,
    };
    let points: Vec<(f64, f64)> = grid
        .alphas
        .iter()
        .flat_map(|&a| axis.iter().map(move |&t| (a, t)))
        .collect();
    let w = WeightMatrix::identity(1);
    let rows: Vec<ScanRow> = points
        .par_iter()
        .map(|&(a, t)| {
            let (mf, x, (alpha, beta, theta)) = scan_point(scenario, a, t);
            let or = optimize_probe(Objective::Or, &mf, &[x], &w, &grid.budget)?;
            let of = optimize_probe(Objective::Of, &mf, &[x], &w, &grid.budget)?;
            let status = if or.status != ErrorStatus::Ok {
                or.status
            } else {
                of.status
            };
            let difference = match (or.best_value.finite(), of.best_value.finite()) {
                (Some(a), Some(b)) => Some(a - b),
                _ => None,
            };
            Ok(ScanRow {
                alpha,
                beta,
                theta,
                x,
                or,
                of,
                difference,
                status,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let smallest = grid.alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let ok: Vec<&ScanRow> = rows
        .iter()
        .filter(|r| r.status == ErrorStatus::Ok && r.difference.is_some())
        .collect();
    let min_difference = ok
        .iter()
        .filter_map(|r| r.difference)
        .fold(f64::INFINITY, f64::min);
    let summary = ScanSummary {
        scenario,
        min_difference,
        all_nonnegative: min_difference >= -TOL_NONNEGATIVE,
        has_negative: min_difference < -TOL_ADVANTAGE,
        smallest_alpha_has_negative: ok
            .iter()
            .any(|r| r.alpha == smallest && r.difference.unwrap() < -TOL_ADVANTAGE),
        ok_rows: ok.len(),
    };
    Ok(Scan { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat2;
    use approx::assert_relative_eq;

    fn custom_pair(d1: Mat2, d2: Mat2, rho: Mat2) -> EncodedFamily {
        EncodedFamily::custom(2, move |_| Ok(rho)).with_derivative(move |_| Ok(vec![d1, d2]))
    }

    #[test]
    fn xy_derivatives_on_z_state_not_achievable() {
        let rho = Mat2::from_pauli(0.5, &[0.0, 0.0, 0.3]);
        let f = custom_pair(Mat2::sigma_x().scale(0.1), Mat2::sigma_y().scale(0.1), rho);
        let v = check_achievability(&f, &[0.0, 0.0]).unwrap();
        assert!(!v.achievable);
        assert!(v.uhlmann_consistent);
        assert!(v.offdiag_ratio_imag > 0.99);
    }

    #[test]
    fn real_family_is_achievable() {
        let rho = Mat2::from_pauli(0.5, &[0.2, 0.0, 0.3]);
        let f = custom_pair(Mat2::sigma_x().scale(0.1), Mat2::sigma_z().scale(0.2), rho);
        let v = check_invertibility(&f, &[0.0, 0.0]).unwrap();
        assert!(v.achievable);
        assert!(v.qfim_invertible);
        assert_eq!(v.biconditional, Some(true));
    }

    #[test]
    fn maximally_mixed_is_degenerate_achievable() {
        let f = custom_pair(
            Mat2::sigma_x().scale(0.1),
            Mat2::sigma_y().scale(0.1),
            Mat2::identity().scale(0.5),
        );
        let v = check_achievability(&f, &[0.0, 0.0]).unwrap();
        assert!(v.degenerate && v.achievable);
    }

    #[test]
    fn vanishing_offdiagonal_does_not_break_ratio() {
        let rho = Mat2::from_pauli(0.5, &[0.0, 0.0, 0.3]);
        let f = custom_pair(Mat2::sigma_z().scale(0.1), Mat2::sigma_y().scale(0.1), rho);
        let v = check_achievability(&f, &[0.0, 0.0]).unwrap();
        assert!(v.achievable);
        assert_eq!(v.offdiag_ratio_imag, 0.0);
    }

    #[test]
    fn one_parameter_rejected() {
        let mf = MeasurementFamily::beta_estimation(0.4);
        let f = family_nonselective(&mf, &QubitState::plus());
        assert!(check_achievability(&f, &[0.1]).is_err());
    }

    #[test]
    fn case_one_always_singular() {
        let audit = audit_case(CaseId::I, 11, 20).unwrap();
        assert_eq!(audit.total, 60);
        assert!(audit.holds());
    }

    #[test]
    fn case_one_proportionality() {
        let (a, b) = (0.35, 0.12);
        let probe = QubitState::new(0.7, 1.1, 0.4).unwrap();
        let fit = |mode| {
            let cfg = CaseConfig::new(CaseId::I, a, b, 0.3, ProbeSpec::State(probe), mode);
            let r = run_case(&cfg).unwrap().report;
            let (d1, d2) = (r.derivatives[0], r.derivatives[1]);
            let inner = |p: &Mat2, q: &Mat2| (p.adjoint() * *q).trace().re;
            let c = inner(&d2, &d1) / inner(&d2, &d2);
            assert!((d1 - d2.scale(c)).frobenius_norm() < 1e-12);
            c
        };
        // branch 1 depends on β/α only
        assert_relative_eq!(
            fit(OutcomeMode::Remembered(Outcome::First)),
            -b / a,
            max_relative = 1e-9
        );
        // branch 2 on β/(1−α)
        assert_relative_eq!(
            fit(OutcomeMode::Remembered(Outcome::Second)),
            b / (1.0 - a),
            max_relative = 1e-9
        );
        // forgotten on h(α, β)
        let ha = a / (a * a - b * b).sqrt() - (1.0 - a) / ((1.0 - a).powi(2) - b * b).sqrt();
        let hb = -b / (a * a - b * b).sqrt() - b / ((1.0 - a).powi(2) - b * b).sqrt();
        assert_relative_eq!(fit(OutcomeMode::Forgotten), ha / hb, max_relative = 1e-9);
    }

    #[test]
    fn case_two_orthogonal_probe() {
        for mode in [
            OutcomeMode::Remembered(Outcome::First),
            OutcomeMode::Remembered(Outcome::Second),
        ] {
            for sign in [1.0, -1.0] {
                let mixed = CaseConfig::new(
                    CaseId::II,
                    0.35,
                    0.1,
                    0.7,
                    ProbeSpec::Orthogonal { r: 0.6, sign },
                    mode,
                );
                let v = run_case(&mixed).unwrap().verdict;
                assert!(v.achievable && v.qfim_invertible && v.max_uhlmann < 1e-12);
                let pure = CaseConfig {
                    probe: ProbeSpec::Orthogonal { r: 1.0, sign },
                    ..mixed
                };
                let v = run_case(&pure).unwrap().verdict;
                assert!(v.achievable && v.singular() && v.commuting());
            }
        }
    }

    #[test]
    fn case_two_forgotten_is_achievable() {
        for inst in random_instances(5, 30) {
            let cfg = CaseConfig::new(
                CaseId::II,
                inst.alpha,
                inst.beta,
                inst.theta,
                ProbeSpec::State(QubitState::new(inst.probe.r, inst.probe.phi1, 0.0).unwrap()),
                OutcomeMode::Forgotten,
            );
            assert!(run_case(&cfg).unwrap().verdict.achievable);
        }
    }

    #[test]
    fn case_three_inherits_invertibility() {
        let cfg = CaseConfig::new(
            CaseId::III,
            0.35,
            0.1,
            0.7,
            ProbeSpec::Orthogonal { r: 0.6, sign: 1.0 },
            OutcomeMode::Remembered(Outcome::First),
        );
        let v = run_case(&cfg).unwrap().verdict;
        assert!(v.achievable && v.qfim_invertible);
    }

    #[test]
    fn case_four_always_singular() {
        let audit = audit_case(CaseId::IV, 3, 20).unwrap();
        assert!(audit.holds());
        assert!(audit.rows.iter().all(|r| r.report.qfim.nrows() == 3));
    }

    #[test]
    fn axis_aligned_probe_commutes() {
        for &(phi1, x2) in &[(0.4, 0.4), (1.0, 1.0), (0.3, 0.1), (1.2, 0.4)] {
            let rep = case2_forgotten(0.3, 0.1, 0.8, phi1, x2).unwrap();
            let commuting = rep.verdict.commuting();
            assert_eq!(
                commuting,
                axis_aligned_condition(phi1, x2, 1e-9),
                "{phi1} {x2}"
            );
        }
    }

    #[test]
    fn convention_relabeling_preserves_verdicts() {
        for (k, inst) in random_instances(21, 10).into_iter().enumerate() {
            let case = CaseId::ALL[k % 4];
            for mode in OutcomeMode::ALL {
                let a = CaseConfig::new(
                    case,
                    inst.alpha,
                    inst.beta,
                    inst.theta,
                    ProbeSpec::State(inst.probe),
                    mode,
                );
                let b = CaseConfig {
                    theta: FRAC_PI_2 - inst.theta,
                    ..a
                }
                .with_convention(AxisConvention::CosSin);
                let (va, vb) = (run_case(&a).unwrap().verdict, run_case(&b).unwrap().verdict);
                assert_eq!(va.achievable, vb.achievable);
                assert_eq!(va.qfim_invertible, vb.qfim_invertible);
                assert_eq!(va.commuting(), vb.commuting());
            }
        }
    }

    #[test]
    fn audit_small() {
        let a = biconditional_audit(9, 40).unwrap();
        assert_eq!(a.rows.len(), 40);
        assert!(a.holds());
        assert!(
            a.singular > 0 && a.singular < 40,
            "{} {}",
            a.singular,
            a.skipped
        );
    }

    #[test]
    fn scan_axis_margins() {
        let g = ScanGrid::default();
        let ax = g.axis(0.0, 1.0).unwrap();
        assert_eq!(ax.len(), 60);
        assert_relative_eq!(ax[0], 5.1e-3, max_relative = 1e-12);
        assert_relative_eq!(ax[59], 1.0 - 5.1e-3, max_relative = 1e-12);
    }

    #[test]
    fn small_alpha_scan() {
        let grid = ScanGrid {
            alphas: vec![0.1, 0.4],
            points: 6,
            ..ScanGrid::default()
        };
        let s = advantage_scan(Scenario::AlphaEstimation, &grid).unwrap();
        assert_eq!(s.rows.len(), 12);
        assert!(s.summary.has_negative);
        assert!(!s.summary.smallest_alpha_has_negative);
        assert!(s.summary.claim_holds());
    }
}
