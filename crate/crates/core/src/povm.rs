//! Two-outcome qubit POVMs `E₁ = αI + βσ_n̂`, `E₂ = (1−α)I − βσ_n̂`, their
//! parametrized families and the encoded-state families they induce.
//!
//! A [`MeasurementFamily`] maps a parameter vector `x` to `(α(x), β(x), θ(x))`
//! with the axis `n̂(θ)` in the x–z plane. Combined with a probe it yields an
//! [`EncodedFamily`]: either the state conditioned on one outcome or the
//! non-selective state. Derivatives with respect to `x` are obtained by the
//! chain rule through the closed-form square roots of the effects, with a
//! finite-difference fallback.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, QubitState, Vec3};

/// Branches whose probability falls below this carry no state.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// Slack allowed on `|β| ≤ min(α, 1−α)` and `0 ≤ α ≤ 1`.
pub const POVM_TOL: f64 = 1e-12;

const FD_STEP: f64 = 1e-6;

/// Outcome label of a two-outcome measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    First,
    Second,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::First, Outcome::Second];

    pub fn index(self) -> usize {
        match self {
            Outcome::First => 0,
            Outcome::Second => 1,
        }
    }

    /// 1-based label.
    pub fn label(self) -> usize {
        self.index() + 1
    }

    /// Pauli coefficients `(a, b)` of this outcome's effect `aI + bσ_n̂` and
    /// the signs of `∂a/∂α`, `∂b/∂β`.
    fn coefficients(self, alpha: f64, beta: f64) -> (f64, f64, f64) {
        match self {
            Outcome::First => (alpha, beta, 1.0),
            Outcome::Second => (1.0 - alpha, -beta, -1.0),
        }
    }
}

/// `(p, q)` with `√(aI + bσ_n̂) = pI + qσ_n̂`, for `a ≥ |b|`.
fn sqrt_coefficients(a: f64, b: f64) -> (f64, f64) {
    let plus = (a + b).max(0.0).sqrt();
    let minus = (a - b).max(0.0).sqrt();
    (0.5 * (plus + minus), 0.5 * (plus - minus))
}

/// A two-outcome qubit POVM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoOutcomePovm {
    alpha: f64,
    beta: f64,
    n_hat: Vec3,
}

impl TwoOutcomePovm {
    pub fn new(alpha: f64, beta: f64, n_hat: Vec3) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && n_hat.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite);
        }
        if !(-POVM_TOL..=1.0 + POVM_TOL).contains(&alpha)
            || beta.abs() > alpha.min(1.0 - alpha) + POVM_TOL
        {
            return Err(Error::InvalidPovm { alpha, beta });
        }
        let len = linalg::norm(&n_hat);
        if (len - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "measurement axis must be a unit vector (length {len})"
            )));
        }
        Ok(TwoOutcomePovm {
            alpha,
            beta,
            n_hat: linalg::scale(&n_hat, 1.0 / len),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn axis(&self) -> Vec3 {
        self.n_hat
    }

    pub fn effect(&self, outcome: Outcome) -> Mat2 {
        let (a, b, _) = outcome.coefficients(self.alpha, self.beta);
        Mat2::from_pauli(a, &linalg::scale(&self.n_hat, b))
    }

    /// Closed-form `√E_i`.
    pub fn sqrt_effect(&self, outcome: Outcome) -> Mat2 {
        let (a, b, _) = outcome.coefficients(self.alpha, self.beta);
        let (p, q) = sqrt_coefficients(a, b);
        Mat2::from_pauli(p, &linalg::scale(&self.n_hat, q))
    }
}

/// One branch of a selective measurement.
#[derive(Debug, Clone, Copy)]
pub struct BranchOutcome {
    pub outcome: Outcome,
    pub probability: f64,
    /// `None` when the branch has vanishing probability.
    pub state: Option<Mat2>,
}

/// Outcome probabilities `Tr[E_i ρ]` and conditional states `√E_i ρ √E_i / Q_i`.
pub fn encode_selective(povm: &TwoOutcomePovm, probe: &QubitState) -> Vec<BranchOutcome> {
    let rho = probe.to_matrix();
    Outcome::ALL
        .iter()
        .map(|&outcome| {
            let s = povm.sqrt_effect(outcome);
            let k = s * rho * s;
            let probability = k.trace().re;
            let state = (probability >= ZERO_PROBABILITY).then(|| k.scale(1.0 / probability));
            BranchOutcome {
                outcome,
                probability,
                state,
            }
        })
        .collect()
}

/// Non-selective post-measurement state `Σ_i √E_i ρ √E_i`.
pub fn encode_nonselective(povm: &TwoOutcomePovm, probe: &QubitState) -> Mat2 {
    let rho = probe.to_matrix();
    Outcome::ALL.iter().fold(Mat2::zero(), |acc, &o| {
        let s = povm.sqrt_effect(o);
        acc + s * rho * s
    })
}

type GradFn = Arc<dyn Fn(&[f64]) -> (f64, Vec<f64>) + Send + Sync>;

/// A scalar coefficient as a function of the parameter vector.
#[derive(Clone)]
pub enum ParamFn {
    Const(f64),
    /// `offset + scale · x[index]`
    Linear {
        index: usize,
        scale: f64,
        offset: f64,
    },
    /// `amplitude · cos(x[index])`
    ScaledCos {
        index: usize,
        amplitude: f64,
    },
    /// Value and gradient supplied by the caller.
    Custom(GradFn),
}

impl fmt::Debug for ParamFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamFn::Const(v) => write!(f, "Const({v})"),
            ParamFn::Linear {
                index,
                scale,
                offset,
            } => write!(f, "{offset} + {scale}*x[{index}]"),
            ParamFn::ScaledCos { index, amplitude } => write!(f, "{amplitude}*cos(x[{index}])"),
            ParamFn::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl ParamFn {
    /// The identity map onto `x[index]`.
    pub fn param(index: usize) -> Self {
        ParamFn::Linear {
            index,
            scale: 1.0,
            offset: 0.0,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, ParamFn::Const(_))
    }

    fn max_index(&self) -> Option<usize> {
        match self {
            ParamFn::Linear { index, .. } | ParamFn::ScaledCos { index, .. } => Some(*index),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; x.len()];
        let value = match self {
            ParamFn::Const(v) => *v,
            ParamFn::Linear {
                index,
                scale,
                offset,
            } => {
                grad[*index] = *scale;
                offset + scale * x[*index]
            }
            ParamFn::ScaledCos { index, amplitude } => {
                let (s, c) = x[*index].sin_cos();
                grad[*index] = -amplitude * s;
                amplitude * c
            }
            ParamFn::Custom(f) => {
                let (v, g) = f(x);
                grad[..g.len().min(x.len())].copy_from_slice(&g[..g.len().min(x.len())]);
                v
            }
        };
        (value, grad)
    }
}

/// Parametrization of the measurement axis by the angle θ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AxisConvention {
    /// `n̂(θ) = (sin θ, 0, cos θ)`
    #[default]
    SinCos,
    /// `n̂(θ) = (cos θ, 0, sin θ)`
    CosSin,
}

impl AxisConvention {
    pub fn axis(self, theta: f64) -> Vec3 {
        let (s, c) = theta.sin_cos();
        match self {
            AxisConvention::SinCos => [s, 0.0, c],
            AxisConvention::CosSin => [c, 0.0, s],
        }
    }

    pub fn axis_derivative(self, theta: f64) -> Vec3 {
        let (s, c) = theta.sin_cos();
        match self {
            AxisConvention::SinCos => [c, 0.0, -s],
            AxisConvention::CosSin => [-s, 0.0, c],
        }
    }
}

/// `(α, β, θ)` and their gradients at one parameter point.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub d_alpha: Vec<f64>,
    pub d_beta: Vec<f64>,
    pub d_theta: Vec<f64>,
}

/// Map `x ↦ {E₁(x), E₂(x)}` through `(α(x), β(x), θ(x))`.
#[derive(Debug, Clone)]
pub struct MeasurementFamily {
    dim: usize,
    pub alpha: ParamFn,
    pub beta: ParamFn,
    pub theta: ParamFn,
    pub convention: AxisConvention,
}

impl MeasurementFamily {
    pub fn new(dim: usize, alpha: ParamFn, beta: ParamFn, theta: ParamFn) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config(
                "measurement family needs at least one parameter".into(),
            ));
        }
        for f in [&alpha, &beta, &theta] {
            if let Some(i) = f.max_index() {
                if i >= dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        got: i + 1,
                    });
                }
            }
        }
        Ok(MeasurementFamily {
            dim,
            alpha,
            beta,
            theta,
            convention: AxisConvention::default(),
        })
    }

    pub fn with_convention(mut self, convention: AxisConvention) -> Self {
        self.convention = convention;
        self
    }

    /// `x₁ = α` with fixed `β` and axis ẑ.
    pub fn alpha_estimation(beta: f64) -> Self {
        MeasurementFamily::new(
            1,
            ParamFn::param(0),
            ParamFn::Const(beta),
            ParamFn::Const(0.0),
        )
        .expect("valid preset")
    }

    /// `x₁ = β` with fixed `α` and axis ẑ.
    pub fn beta_estimation(alpha: f64) -> Self {
        MeasurementFamily::new(
            1,
            ParamFn::Const(alpha),
            ParamFn::param(0),
            ParamFn::Const(0.0),
        )
        .expect("valid preset")
    }

    /// `θ = x₁`, `β = α cos x₁` with fixed `α`.
    pub fn theta_beta_estimation(alpha: f64) -> Self {
        MeasurementFamily::new(
            1,
            ParamFn::Const(alpha),
            ParamFn::ScaledCos {
                index: 0,
                amplitude: alpha,
            },
            ParamFn::param(0),
        )
        .expect("valid preset")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when the measurement axis does not depend on `x`.
    pub fn axis_fixed(&self) -> bool {
        self.theta.is_const()
    }

    pub fn coefficients(&self, x: &[f64]) -> Result<Coefficients> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let (alpha, d_alpha) = self.alpha.eval(x);
        let (beta, d_beta) = self.beta.eval(x);
        let (theta, d_theta) = self.theta.eval(x);
        Ok(Coefficients {
            alpha,
            beta,
            theta,
            d_alpha,
            d_beta,
            d_theta,
        })
    }

    pub fn povm(&self, x: &[f64]) -> Result<TwoOutcomePovm> {
        let c = self.coefficients(x)?;
        TwoOutcomePovm::new(c.alpha, c.beta, self.convention.axis(c.theta))
    }
}

/// Unnormalized branch operator `K = √E ρ √E` and its parameter derivatives.
struct BranchJet {
    kraus: Mat2,
    d_kraus: Vec<Mat2>,
}

fn branch_jet(
    mf: &MeasurementFamily,
    rho: &Mat2,
    outcome: Outcome,
    x: &[f64],
    with_derivatives: bool,
) -> Result<BranchJet> {
    let c = mf.coefficients(x)?;
    let n = mf.convention.axis(c.theta);
    // validates positivity
    TwoOutcomePovm::new(c.alpha, c.beta, n)?;
    let (a, b, sign) = outcome.coefficients(c.alpha, c.beta);
    let (p, q) = sqrt_coefficients(a, b);
    let sigma_n = Mat2::sigma(&n);
    let s = Mat2::from_pauli(p, &linalg::scale(&n, q));
    let kraus = s * *rho * s;
    if !with_derivatives {
        return Ok(BranchJet {
            kraus,
            d_kraus: Vec::new(),
        });
    }

    let plus = a + b;
    let minus = a - b;
    if plus <= 0.0 || minus <= 0.0 {
        return Err(Error::PositivityBoundary {
            alpha: c.alpha,
            beta: c.beta,
        });
    }
    let ip = 0.25 / plus.sqrt();
    let im = 0.25 / minus.sqrt();
    // ∂√E/∂α and ∂√E/∂β; `sign` carries ∂a/∂α = ∂b/∂β = ∓1 for the second effect
    let ds_alpha = (Mat2::identity().scale(ip + im) + sigma_n.scale(ip - im)).scale(sign);
    let ds_beta = (Mat2::identity().scale(ip - im) + sigma_n.scale(ip + im)).scale(sign);
    let ds_theta = Mat2::sigma(&mf.convention.axis_derivative(c.theta)).scale(q);

    let dk = |ds: &Mat2| *ds * *rho * s + s * *rho * *ds;
    let dk_alpha = dk(&ds_alpha);
    let dk_beta = dk(&ds_beta);
    let dk_theta = dk(&ds_theta);

    let d_kraus = (0..mf.dim)
        .map(|j| {
            let mut acc = Mat2::zero();
            if c.d_alpha[j] != 0.0 {
                acc = acc + dk_alpha.scale(c.d_alpha[j]);
            }
            if c.d_beta[j] != 0.0 {
                acc = acc + dk_beta.scale(c.d_beta[j]);
            }
            if c.d_theta[j] != 0.0 {
                acc = acc + dk_theta.scale(c.d_theta[j]);
            }
            acc
        })
        .collect();
    Ok(BranchJet { kraus, d_kraus })
}

/// `Q_i(x) = Tr[E_i(x) ρ]`.
pub fn branch_probability(
    mf: &MeasurementFamily,
    probe: &QubitState,
    outcome: Outcome,
    x: &[f64],
) -> Result<f64> {
    let povm = mf.povm(x)?;
    Ok((povm.effect(outcome) * probe.to_matrix()).trace().re)
}

/// `∂Q_i/∂x_j = Tr[(∂E_i/∂x_j) ρ]`.
pub fn branch_probability_derivative(
    mf: &MeasurementFamily,
    probe: &QubitState,
    outcome: Outcome,
    x: &[f64],
) -> Result<Vec<f64>> {
    let c = mf.coefficients(x)?;
    let rho = probe.to_matrix();
    let sign = match outcome {
        Outcome::First => 1.0,
        Outcome::Second => -1.0,
    };
    let n = mf.convention.axis(c.theta);
    let dn = mf.convention.axis_derivative(c.theta);
    let along_n = (Mat2::sigma(&n) * rho).trace().re;
    let along_dn = (Mat2::sigma(&dn) * rho).trace().re;
    Ok((0..mf.dim)
        .map(|j| sign * (c.d_alpha[j] + c.d_beta[j] * along_n + c.beta * c.d_theta[j] * along_dn))
        .collect())
}

/// Which encoded state a family produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// State conditioned on one recorded outcome.
    Selective(Outcome),
    /// Outcomes forgotten.
    NonSelective,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeMode {
    #[default]
    Analytic,
    FiniteDifference,
}

type StateFn = Arc<dyn Fn(&[f64]) -> Result<Mat2> + Send + Sync>;
type DerivativeFn = Arc<dyn Fn(&[f64]) -> Result<Vec<Mat2>> + Send + Sync>;

#[derive(Clone)]
enum Source {
    Measurement {
        family: MeasurementFamily,
        probe: Mat2,
    },
    Custom {
        eval: StateFn,
        derivative: Option<DerivativeFn>,
    },
}

/// A differentiable family of qubit states `x ↦ ρ(x)`.
#[derive(Clone)]
pub struct EncodedFamily {
    dim: usize,
    kind: FamilyKind,
    mode: DerivativeMode,
    source: Source,
}

impl fmt::Debug for EncodedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EncodedFamily")
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .field("mode", &self.mode)
            .finish_non_exhaustive()
    }
}

/// Family of states conditioned on `outcome`.
pub fn family_selective(
    mf: &MeasurementFamily,
    probe: &QubitState,
    outcome: Outcome,
) -> EncodedFamily {
    EncodedFamily {
        dim: mf.dim(),
        kind: FamilyKind::Selective(outcome),
        mode: DerivativeMode::Analytic,
        source: Source::Measurement {
            family: mf.clone(),
            probe: probe.to_matrix(),
        },
    }
}

/// Family of non-selective post-measurement states.
pub fn family_nonselective(mf: &MeasurementFamily, probe: &QubitState) -> EncodedFamily {
    EncodedFamily {
        dim: mf.dim(),
        kind: FamilyKind::NonSelective,
        mode: DerivativeMode::Analytic,
        source: Source::Measurement {
            family: mf.clone(),
            probe: probe.to_matrix(),
        },
    }
}

impl EncodedFamily {
    /// A user-supplied family; derivatives fall back to finite differences.
    pub fn custom<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Mat2> + Send + Sync + 'static,
    {
        EncodedFamily {
            dim,
            kind: FamilyKind::Custom,
            mode: DerivativeMode::FiniteDifference,
            source: Source::Custom {
                eval: Arc::new(eval),
                derivative: None,
            },
        }
    }

    /// Attach an analytic derivative to a custom family.
    pub fn with_derivative<G>(mut self, derivative: G) -> Self
    where
        G: Fn(&[f64]) -> Result<Vec<Mat2>> + Send + Sync + 'static,
    {
        if let Source::Custom { eval, .. } = self.source {
            self.source = Source::Custom {
                eval,
                derivative: Some(Arc::new(derivative)),
            };
            self.mode = DerivativeMode::Analytic;
        }
        self
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn measurement_state(
        &self,
        family: &MeasurementFamily,
        probe: &Mat2,
        x: &[f64],
        with_derivatives: bool,
    ) -> Result<(Mat2, Vec<Mat2>)> {
        match self.kind {
            FamilyKind::Selective(outcome) => {
                let jet = branch_jet(family, probe, outcome, x, with_derivatives)?;
                let q = jet.kraus.trace().re;
                if q < ZERO_PROBABILITY {
                    return Err(Error::ZeroProbability {
                        outcome: outcome.label(),
                        probability: q,
                    });
                }
                let state = jet.kraus.scale(1.0 / q);
                let ds = jet
                    .d_kraus
                    .iter()
                    .map(|dk| (*dk - state.scale(dk.trace().re)).scale(1.0 / q))
                    .collect();
                Ok((state, ds))
            }
            _ => {
                let j1 = branch_jet(family, probe, Outcome::First, x, with_derivatives)?;
                let j2 = branch_jet(family, probe, Outcome::Second, x, with_derivatives)?;
                let ds = j1
                    .d_kraus
                    .iter()
                    .zip(&j2.d_kraus)
                    .map(|(a, b)| *a + *b)
                    .collect();
                Ok((j1.kraus + j2.kraus, ds))
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Mat2> {
        self.check_dim(x)?;
        match &self.source {
            Source::Measurement { family, probe } => {
                Ok(self.measurement_state(family, probe, x, false)?.0)
            }
            Source::Custom { eval, .. } => eval(x),
        }
    }

    /// Analytic derivatives when the family has them.
    pub fn analytic_derivatives(&self, x: &[f64]) -> Option<Result<Vec<Mat2>>> {
        if let Err(e) = self.check_dim(x) {
            return Some(Err(e));
        }
        match &self.source {
            Source::Measurement { family, probe } => Some(
                self.measurement_state(family, probe, x, true)
                    .map(|(_, d)| d),
            ),
            Source::Custom { derivative, .. } => derivative.as_ref().map(|d| d(x)),
        }
    }

    /// Central differences with step `1e-6·max(1, |x_i|)`, falling back to a
    /// one-sided three-point stencil when a neighbouring point is invalid.
    pub fn finite_difference(&self, x: &[f64]) -> Result<Vec<Mat2>> {
        self.check_dim(x)?;
        let f0 = self.eval(x)?;
        let mut out = Vec::with_capacity(self.dim);
        let mut xs = x.to_vec();
        for i in 0..self.dim {
            let h = FD_STEP * x[i].abs().max(1.0);
            let mut at = |offset: f64| {
                xs[i] = x[i] + offset;
                let v = self.eval(&xs);
                xs[i] = x[i];
                v
            };
            let d = match (at(h), at(-h)) {
                (Ok(p), Ok(m)) => (p - m).scale(0.5 / h),
                (Ok(p), Err(_)) => {
                    let p2 = at(2.0 * h)?;
                    (p.scale(4.0) - f0.scale(3.0) - p2).scale(0.5 / h)
                }
                (Err(_), Ok(m)) => {
                    let m2 = at(-2.0 * h)?;
                    (f0.scale(3.0) - m.scale(4.0) + m2).scale(0.5 / h)
                }
                (Err(e), Err(_)) => return Err(e),
            };
            // the exact derivative of a density family is Hermitian and traceless
            let d = d.hermitian_part();
            let tr = d.trace().re;
            out.push(d - Mat2::identity().scale(0.5 * tr));
        }
        Ok(out)
    }

    /// Derivatives according to the configured mode.
    pub fn derivatives(&self, x: &[f64]) -> Result<Vec<Mat2>> {
        match self.mode {
            DerivativeMode::Analytic => match self.analytic_derivatives(x) {
                Some(r) => r,
                None => self.finite_difference(x),
            },
            DerivativeMode::FiniteDifference => self.finite_difference(x),
        }
    }

    /// `ρ(x)` together with `∂ρ/∂x_i`.
    pub fn jet(&self, x: &[f64]) -> Result<(Mat2, Vec<Mat2>)> {
        self.check_dim(x)?;
        match (&self.source, self.mode) {
            (Source::Measurement { family, probe }, DerivativeMode::Analytic) => {
                self.measurement_state(family, probe, x, true)
            }
            _ => Ok((self.eval(x)?, self.derivatives(x)?)),
        }
    }
}
