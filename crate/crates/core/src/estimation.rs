//! Outcome-remembered (OR) and outcome-forgotten (OF) estimation errors and
//! their minimization over probe states.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fisher::{qfim, FisherReport};
use crate::linalg::{axpy, norm, scale, QubitState};
use crate::povm::{
    branch_probability, family_nonselective, family_selective, MeasurementFamily, Outcome,
    ZERO_PROBABILITY,
};
use crate::simplex::{self, SimplexConfig};

/// QFI below this is treated as carrying no information.
pub const ZERO_INFORMATION: f64 = 1e-12;

/// Symmetric positive-definite cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(DMatrix<f64>);

impl WeightMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidWeight);
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = m.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if (&m - m.transpose()).iter().any(|v| v.abs() > 1e-12 * scale) {
            return Err(Error::InvalidWeight);
        }
        let min_ev = m
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, &v| a.min(v));
        if min_ev <= 0.0 {
            return Err(Error::InvalidWeight);
        }
        Ok(WeightMatrix(m))
    }

    pub fn identity(m: usize) -> Self {
        WeightMatrix(DMatrix::identity(m, m))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(d),
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorStatus {
    Ok,
    SingularQfim,
    UnachievableQcrb,
    ZeroInformation,
}

impl ErrorStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorStatus::Ok => "ok",
            ErrorStatus::SingularQfim => "singular-qfim",
            ErrorStatus::UnachievableQcrb => "unachievable-qcrb",
            ErrorStatus::ZeroInformation => "zero-information",
        }
    }
}

impl fmt::Display for ErrorStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorValue {
    Finite(f64),
    Unbounded,
}

impl ErrorValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            ErrorValue::Finite(v) => Some(v),
            ErrorValue::Unbounded => None,
        }
    }

    /// The value as a float, `+∞` when unbounded.
    pub fn value(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ErrorValue::Finite(_))
    }
}

impl fmt::Display for ErrorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorValue::Finite(v) => write!(f, "{v}"),
            ErrorValue::Unbounded => f.write_str("inf"),
        }
    }
}

/// One measurement branch's share of the OR error.
#[derive(Debug, Clone)]
pub struct BranchContribution {
    pub outcome: Outcome,
    pub probability: f64,
    /// `√Tr[W F⁻¹]` of the conditional state; `None` when the branch was skipped.
    pub bound: Option<ErrorValue>,
    pub contribution: ErrorValue,
    pub status: ErrorStatus,
}

#[derive(Debug, Clone)]
pub struct ErrorResult {
    pub value: ErrorValue,
    pub status: ErrorStatus,
    /// Empty for the OF error.
    pub branches: Vec<BranchContribution>,
}

fn check_weight(mf: &MeasurementFamily, x: &[f64], w: &WeightMatrix) -> Result<()> {
    if x.len() != mf.dim() {
        return Err(Error::Dimension {
            expected: mf.dim(),
            got: x.len(),
        });
    }
    if w.dim() != mf.dim() {
        return Err(Error::Dimension {
            expected: mf.dim(),
            got: w.dim(),
        });
    }
    Ok(())
}

/// `√Tr[W F⁻¹]` for one state family, or the reason it is undefined.
fn bound_from_report(report: &FisherReport, w: &WeightMatrix) -> (ErrorValue, ErrorStatus) {
    let f = &report.qfim;
    if report.dim() == 1 {
        let fq = f[(0, 0)];
        if fq < ZERO_INFORMATION {
            return (ErrorValue::Unbounded, ErrorStatus::ZeroInformation);
        }
        return (
            ErrorValue::Finite((w.matrix()[(0, 0)] / fq).sqrt()),
            ErrorStatus::Ok,
        );
    }
    if f.trace() < ZERO_INFORMATION {
        return (ErrorValue::Unbounded, ErrorStatus::ZeroInformation);
    }
    if !report.achievable {
        return (ErrorValue::Unbounded, ErrorStatus::UnachievableQcrb);
    }
    if report.singular {
        return (ErrorValue::Unbounded, ErrorStatus::SingularQfim);
    }
    match f.clone().try_inverse() {
        Some(inv) => {
            let t = (w.matrix() * inv).trace();
            if t.is_finite() && t >= 0.0 {
                (ErrorValue::Finite(t.sqrt()), ErrorStatus::Ok)
            } else {
                (ErrorValue::Unbounded, ErrorStatus::SingularQfim)
            }
        }
        None => (ErrorValue::Unbounded, ErrorStatus::SingularQfim),
    }
}

/// `Δ_OR = Σ_i Q_i √Tr[W F_Q(ρ_{f_i})⁻¹]`.
pub fn or_error(
    mf: &MeasurementFamily,
    probe: &QubitState,
    x: &[f64],
    w: &WeightMatrix,
) -> Result<ErrorResult> {
    check_weight(mf, x, w)?;
    let mut branches = Vec::with_capacity(2);
    let mut total = 0.0;
    let mut status = ErrorStatus::Ok;
    for outcome in Outcome::ALL {
        let q = branch_probability(mf, probe, outcome, x)?;
        if q < ZERO_PROBABILITY {
            branches.push(BranchContribution {
                outcome,
                probability: q,
                bound: None,
                contribution: ErrorValue::Finite(0.0),
                status: ErrorStatus::Ok,
            });
            continue;
        }
        let report = qfim(&family_selective(mf, probe, outcome), x)?;
        let (bound, st) = bound_from_report(&report, w);
        let contribution = match bound {
            ErrorValue::Finite(b) => {
                total += q * b;
                ErrorValue::Finite(q * b)
            }
            ErrorValue::Unbounded => ErrorValue::Unbounded,
        };
        if status == ErrorStatus::Ok {
            status = st;
        }
        branches.push(BranchContribution {
            outcome,
            probability: q,
            bound: Some(bound),
            contribution,
            status: st,
        });
    }
    let value = if status == ErrorStatus::Ok {
        ErrorValue::Finite(total)
    } else {
        ErrorValue::Unbounded
    };
    Ok(ErrorResult {
        value,
        status,
        branches,
    })
}

/// `Δ_OF = √Tr[W F_Q(ρ_F)⁻¹]`.
pub fn of_error(
    mf: &MeasurementFamily,
    probe: &QubitState,
    x: &[f64],
    w: &WeightMatrix,
) -> Result<ErrorResult> {
    check_weight(mf, x, w)?;
    let report = qfim(&family_nonselective(mf, probe), x)?;
    let (value, status) = bound_from_report(&report, w);
    Ok(ErrorResult {
        value,
        status,
        branches: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Outcome remembered.
    Or,
    /// Outcome forgotten.
    Of,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Or => "or",
            Objective::Of => "of",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "or" => Ok(Objective::Or),
            "of" => Ok(Objective::Of),
            other => Err(Error::Config(format!(
                "unknown objective '{other}', expected 'or' or 'of'"
            ))),
        }
    }
}

pub fn evaluate(
    objective: Objective,
    mf: &MeasurementFamily,
    probe: &QubitState,
    x: &[f64],
    w: &WeightMatrix,
) -> Result<ErrorResult> {
    match objective {
        Objective::Or => or_error(mf, probe, x, w),
        Objective::Of => of_error(mf, probe, x, w),
    }
}

/// Grid resolution and refinement limits for [`optimize_probe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerBudget {
    pub r_points: usize,
    pub phi1_points: usize,
    pub phi2_points: usize,
    pub max_iterations: usize,
    pub shrink_tolerance: f64,
}

impl Default for OptimizerBudget {
    fn default() -> Self {
        OptimizerBudget {
            r_points: 21,
            phi1_points: 25,
            phi2_points: 25,
            max_iterations: 300,
            shrink_tolerance: 1e-10,
        }
    }
}

impl OptimizerBudget {
    pub fn validate(&self) -> Result<()> {
        if self.r_points == 0 || self.phi1_points == 0 || self.phi2_points == 0 {
            return Err(Error::Config(
                "optimizer grid needs at least one point per axis".into(),
            ));
        }
        if !(self.shrink_tolerance.is_finite() && self.shrink_tolerance >= 0.0) {
            return Err(Error::Config(
                "shrink tolerance must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for OptimizerBudget {
    /// `RxPxQ:ITER`, the form accepted by `FromStr`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{}x{}:{}",
            self.r_points, self.phi1_points, self.phi2_points, self.max_iterations
        )
    }
}

impl FromStr for OptimizerBudget {
    type Err = Error;

    /// Accepts `RxPxQ`, `RxPxQ:ITER` or a bare iteration count.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid budget '{s}', expected RxPxQ[:ITER]"));
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let mut b = OptimizerBudget::default();
        let (grid, iters) = match s.split_once(':') {
            Some((g, i)) => (Some(g), Some(i)),
            None if s.contains('x') => (Some(s), None),
            None => (None, Some(s)),
        };
        if let Some(g) = grid {
            let dims: Vec<&str> = g.split('x').collect();
            if dims.len() != 3 {
                return Err(bad());
            }
            b.r_points = parse(dims[0])?;
            b.phi1_points = parse(dims[1])?;
            b.phi2_points = parse(dims[2])?;
        }
        if let Some(i) = iters {
            b.max_iterations = parse(i)?;
        }
        b.validate()?;
        Ok(b)
    }
}

#[derive(Debug, Clone)]
pub struct ProbeOptimum {
    pub best_probe: QubitState,
    pub best_value: ErrorValue,
    pub status: ErrorStatus,
    /// Total objective evaluations, grid and refinement.
    pub evaluations: usize,
    pub grid_points: usize,
}

/// `n` points spanning the closed interval; one point sits at the midpoint.
fn closed_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// The coarse probe grid. When the measurement axis stays in the x–z plane the
/// error depends on `φ₂` only through reflection, so `{0, π}` suffices.
pub fn probe_grid(budget: &OptimizerBudget, axis_fixed: bool) -> Vec<QubitState> {
    let rs = closed_grid(0.0, 1.0, budget.r_points);
    let p1 = closed_grid(0.0, PI, budget.phi1_points);
    let p2: Vec<f64> = if axis_fixed {
        if budget.phi2_points >= 2 {
            vec![0.0, PI]
        } else {
            vec![0.0]
        }
    } else {
        (0..budget.phi2_points)
            .map(|k| 2.0 * PI * k as f64 / budget.phi2_points as f64)
            .collect()
    };
    let mut out = Vec::with_capacity(rs.len() * p1.len() * p2.len());
    for &r in &rs {
        for &a in &p1 {
            for &b in &p2 {
                out.push(QubitState {
                    r,
                    phi1: a,
                    phi2: b,
                });
            }
        }
    }
    out
}

fn lower(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

/// Minimize the OR or OF error over probe states: coarse grid, then simplex
/// refinement from the best grid point.
pub fn optimize_probe(
    objective: Objective,
    mf: &MeasurementFamily,
    x: &[f64],
    w: &WeightMatrix,
    budget: &OptimizerBudget,
) -> Result<ProbeOptimum> {
    budget.validate()?;
    check_weight(mf, x, w)?;
    let axis_fixed = mf.axis_fixed();
    let grid = probe_grid(budget, axis_fixed);

    let values: Vec<Result<f64>> = grid
        .par_iter()
        .map(|p| evaluate(objective, mf, p, x, w).map(|e| e.value.value()))
        .collect();
    let mut scored = Vec::with_capacity(values.len());
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        scored.push((if v.is_nan() { f64::INFINITY } else { v }, i));
    }
    let (grid_value, grid_index) = scored
        .par_iter()
        .copied()
        .reduce(|| (f64::INFINITY, usize::MAX), lower);
    let grid_index = grid_index.min(grid.len() - 1);
    let start = grid[grid_index];
    let mut evaluations = grid.len();

    let mut best_probe = start;
    let mut best_value = grid_value;

    if budget.max_iterations > 0 && grid_value.is_finite() {
        let step = |n: usize, span: f64, fallback: f64| {
            if n > 1 {
                span / (n - 1) as f64
            } else {
                fallback
            }
        };
        let mut r_step = step(budget.r_points, 1.0, 0.25);
        if start.r + r_step > 1.0 {
            r_step = -r_step;
        }
        let angle_step = step(budget.phi1_points, PI, PI / 4.0).min(1.0);
        // Gnomonic chart around the best grid direction: regular at the poles,
        // where (φ₁, φ₂) degenerate.
        let u = start.unit_direction();
        let (s1, c1) = start.phi1.sin_cos();
        let (s2, c2) = start.phi2.sin_cos();
        let t1 = [c1 * c2, c1 * s2, -s1];
        let t2 = [-s2, c2, 0.0];
        let to_probe = |v: &[f64]| -> Option<QubitState> {
            let b = if axis_fixed { 0.0 } else { v[2] };
            let d = axpy(b, &t2, &axpy(v[1], &t1, &u));
            let len = norm(&d);
            if !(len.is_finite() && len > 0.0) {
                return None;
            }
            QubitState::from_bloch(&scale(&d, v[0].clamp(0.0, 1.0) / len)).ok()
        };
        let objective_fn = |v: &[f64]| match to_probe(v) {
            Some(p) => evaluate(objective, mf, &p, x, w)
                .map(|e| e.value.value())
                .unwrap_or(f64::INFINITY),
            None => f64::INFINITY,
        };
        let (x0, steps) = if axis_fixed {
            (vec![start.r, 0.0], vec![r_step, angle_step])
        } else {
            (
                vec![start.r, 0.0, 0.0],
                vec![r_step, angle_step, angle_step],
            )
        };
        let cfg = SimplexConfig {
            max_iterations: budget.max_iterations,
            shrink_tolerance: budget.shrink_tolerance,
        };
        let res = simplex::minimize(objective_fn, &x0, &steps, &cfg);
        evaluations += res.evaluations;
        if res.value < best_value {
            if let Some(p) = to_probe(&res.x) {
                let v = evaluate(objective, mf, &p, x, w)?.value.value();
                evaluations += 1;
                if v < best_value {
                    best_probe = p;
                    best_value = v;
                }
            }
        }
    }

    let result = evaluate(objective, mf, &best_probe, x, w)?;
    let best_value = if best_value.is_finite() {
        ErrorValue::Finite(best_value)
    } else {
        ErrorValue::Unbounded
    };
    Ok(ProbeOptimum {
        best_probe,
        best_value,
        status: result.status,
        evaluations,
        grid_points: grid.len(),
    })
}
