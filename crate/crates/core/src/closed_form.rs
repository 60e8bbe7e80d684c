//! Closed-form error expressions for single-parameter estimation with the
//! axis fixed at ẑ. These serve as reference values for the numerical
//! pipeline; nothing in the pipeline calls them.

/// `h(α, β) = √(α²−β²) + √((1−α)²−β²)`, the transverse Bloch shrink factor
/// of the non-selective state.
pub fn h_factor(alpha: f64, beta: f64) -> f64 {
    (alpha * alpha - beta * beta).sqrt() + ((1.0 - alpha).powi(2) - beta * beta).sqrt()
}

/// `∂h/∂α`.
pub fn h_alpha(alpha: f64, beta: f64) -> f64 {
    alpha / (alpha * alpha - beta * beta).sqrt()
        - (1.0 - alpha) / ((1.0 - alpha).powi(2) - beta * beta).sqrt()
}

/// `∂h/∂β`.
pub fn h_beta(alpha: f64, beta: f64) -> f64 {
    -beta / (alpha * alpha - beta * beta).sqrt()
        - beta / ((1.0 - alpha).powi(2) - beta * beta).sqrt()
}

/// Minimum outcome-forgotten error for estimating `β`, attained by a pure
/// probe orthogonal to the axis.
pub fn beta_estimation_min_of(alpha: f64, beta: f64) -> f64 {
    let h = h_factor(alpha, beta);
    (alpha * alpha - beta * beta).sqrt()
        * ((1.0 - alpha).powi(2) - beta * beta).sqrt()
        * (1.0 - h * h).sqrt()
        / (beta * h).abs()
}

/// Minimum outcome-forgotten error for estimating `α`.
pub fn alpha_estimation_min_of(alpha: f64, beta: f64) -> f64 {
    let h = h_factor(alpha, beta);
    (1.0 - h * h).sqrt() / h_alpha(alpha, beta).abs()
}

/// Outcome-remembered error for estimating `α` with the `|+⟩` probe.
pub fn alpha_estimation_or_plus(alpha: f64, beta: f64) -> f64 {
    (alpha * alpha * (alpha * alpha - beta * beta).sqrt()
        + (1.0 - alpha).powi(2) * ((1.0 - alpha).powi(2) - beta * beta).sqrt())
        / beta.abs()
}

/// Outcome-remembered error for estimating `β` with a pure probe at polar
/// angle `φ₁` from the axis.
pub fn beta_estimation_or_pure(alpha: f64, beta: f64, phi1: f64) -> f64 {
    let (s, c) = phi1.sin_cos();
    (alpha * alpha - beta * beta).sqrt() * (alpha + beta * c).powi(2) / (alpha * s)
        + ((1.0 - alpha).powi(2) - beta * beta).sqrt() * (1.0 - alpha - beta * c).powi(2)
            / ((1.0 - alpha) * s)
}
