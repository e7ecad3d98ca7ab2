//! Convergence checking for a single (λ, ρ) pair under Gaussian-approximated
//! density evolution, and the noise-threshold search built on top of it.
//!
//! The four single-code constraints:
//!   C1 — rate consistency: `Σ λ_i/i = (1/(1-R)) Σ ρ_j/j`;
//!   C2 — normalization of both distributions;
//!   C3 — decoder convergence: the fixed-point iteration `r_0 = φ(s)`,
//!        `r_l = h(s, r_{l-1})` drives the residual below a small epsilon;
//!   C4 — stability of the zero-error fixed point:
//!        `λ_2 < e^{1/(2σ²)} / Σ_j ρ_j (j-1)`.

use crate::analysis::{de_update, DeKernel};
use crate::degdist::{DegreeDistribution, Kind, Perspective};
use crate::error::{Error, Result};

/// Stopping rule and kernel selection for the fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeParams {
    /// The iteration has converged once `r_l` drops below this value.
    pub convergence_epsilon: f64,
    /// Hard cap on fixed-point iterations.
    pub max_iterations: usize,
    /// Declare a stall (non-convergence) when an iteration improves `r` by
    /// less than this while still above `convergence_epsilon`.
    pub stall_epsilon: f64,
    /// φ/φ⁻¹ evaluation strategy.
    pub kernel: DeKernel,
    /// Which algebraic arrangement of the stability inequality to evaluate.
    pub stability_form: StabilityForm,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams {
            convergence_epsilon: 1e-7,
            max_iterations: 5000,
            stall_epsilon: 1e-10,
            kernel: DeKernel::default(),
            stability_form: StabilityForm::default(),
        }
    }
}

/// The stability condition can be arranged as `λ_2 < cap / Σρ_j(j-1)` (the
/// form used throughout this crate's reference material) or as the product
/// form `λ_2 · Σρ_j(j-1) < cap` common elsewhere. With `cap = e^{1/(2σ²)}`
/// the two are algebraically identical; both are kept selectable so reports
/// can show each arrangement explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StabilityForm {
    #[default]
    Quotient,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintId {
    C1,
    C2,
    C3,
    C4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceVerdict {
    pub converged: bool,
    pub iterations_used: usize,
    pub final_r: f64,
    pub violated_constraint: Option<ConstraintId>,
}

/// `e^{1/(2σ²)} / Σ_j ρ_j (j-1)` — the strict upper bound on λ_2.
pub fn stability_cap(rho: &DegreeDistribution, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    if rho.perspective() != Perspective::Edge || rho.kind() != Kind::Check {
        return Err(Error::validation("stability_cap requires an edge-perspective ρ"));
    }
    let slope: f64 = rho.coeffs().iter().map(|(&j, &w)| w * (j - 1) as f64).sum();
    if slope <= 0.0 {
        return Err(Error::validation("ρ has nonpositive derivative at 1"));
    }
    Ok((0.5 / sigma2).exp() / slope)
}

/// Evaluate the stability condition in the requested arrangement.
pub fn stability_satisfied(
    lambda: &DegreeDistribution,
    rho: &DegreeDistribution,
    sigma2: f64,
    form: StabilityForm,
) -> Result<bool> {
    let lambda2 = lambda.weight(2);
    match form {
        StabilityForm::Quotient => Ok(lambda2 < stability_cap(rho, sigma2)?),
        StabilityForm::Product => {
            let slope: f64 = rho.coeffs().iter().map(|(&j, &w)| w * (j - 1) as f64).sum();
            Ok(lambda2 * slope < (0.5 / sigma2).exp())
        }
    }
}

fn validate_pair(lambda: &DegreeDistribution, rho: &DegreeDistribution) -> Result<()> {
    if lambda.perspective() != Perspective::Edge || lambda.kind() != Kind::Variable {
        return Err(Error::validation("expected an edge-perspective variable distribution λ"));
    }
    if rho.perspective() != Perspective::Edge || rho.kind() != Kind::Check {
        return Err(Error::validation("expected an edge-perspective check distribution ρ"));
    }
    Ok(())
}

/// Check C1 (within 1e-9) and C2 (within 1e-12) for a pair at a target rate.
fn rate_and_normalization(
    lambda: &DegreeDistribution,
    rho: &DegreeDistribution,
    target_rate: f64,
) -> Result<Option<ConstraintId>> {
    let sum_l: f64 = lambda.coeffs().values().sum();
    let sum_r: f64 = rho.coeffs().values().sum();
    if (sum_l - 1.0).abs() > 1e-12 || (sum_r - 1.0).abs() > 1e-12 {
        return Ok(Some(ConstraintId::C2));
    }
    if !(target_rate > 0.0 && target_rate < 1.0) {
        return Err(Error::domain(format!("target rate must be in (0,1), got {target_rate}")));
    }
    let lhs = lambda.sum_inv_degree();
    let rhs = rho.sum_inv_degree() / (1.0 - target_rate);
    if (lhs - rhs).abs() > 1e-9 {
        return Ok(Some(ConstraintId::C1));
    }
    Ok(None)
}

/// Run the fixed-point iteration; returns `(converged, iterations, final_r)`.
fn fixed_point(
    s: f64,
    lambda: &DegreeDistribution,
    rho: &DegreeDistribution,
    params: &DeParams,
) -> Result<(bool, usize, f64)> {
    let mut r = params.kernel.phi(s);
    if r < params.convergence_epsilon {
        return Ok((true, 0, r));
    }
    for l in 1..=params.max_iterations {
        let next = de_update(s, r, lambda, rho, params.kernel)?;
        if next < params.convergence_epsilon {
            return Ok((true, l, next));
        }
        if r - next < params.stall_epsilon {
            return Ok((false, l, next));
        }
        r = next;
    }
    Ok((false, params.max_iterations, r))
}

/// Evaluate C1–C4 for `(λ, ρ)` at noise variance `σ²` and the given design
/// rate. Checks are ordered cheapest first; the verdict reports the first
/// violated constraint, so a stability (C4) failure is reported without
/// running the fixed-point iteration.
pub fn check_constraints(
    lambda: &DegreeDistribution,
    rho: &DegreeDistribution,
    target_rate: f64,
    sigma2: f64,
    params: &DeParams,
) -> Result<ConvergenceVerdict> {
    validate_pair(lambda, rho)?;
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    let s = 2.0 / sigma2;
    if let Some(c) = rate_and_normalization(lambda, rho, target_rate)? {
        return Ok(ConvergenceVerdict {
            converged: false,
            iterations_used: 0,
            final_r: params.kernel.phi(s),
            violated_constraint: Some(c),
        });
    }
    if !stability_satisfied(lambda, rho, sigma2, params.stability_form)? {
        return Ok(ConvergenceVerdict {
            converged: false,
            iterations_used: 0,
            final_r: params.kernel.phi(s),
            violated_constraint: Some(ConstraintId::C4),
        });
    }
    let (converged, iterations_used, final_r) = fixed_point(s, lambda, rho, params)?;
    Ok(ConvergenceVerdict {
        converged,
        iterations_used,
        final_r,
        violated_constraint: if converged { None } else { Some(ConstraintId::C3) },
    })
}

/// Largest noise variance `σ²*` at which C1–C4 hold, found by bisection to
/// absolute tolerance 1e-5.
///
/// The default bracket is `σ² ∈ [0.1, 4.0]`. If the pair converges across
/// the whole bracket the upper end is doubled (up to three times, reaching
/// 32.0) before bisecting; if it converges nowhere on the bracket a
/// no-threshold error is returned.
pub fn threshold(
    lambda: &DegreeDistribution,
    rho: &DegreeDistribution,
    target_rate: f64,
    params: &DeParams,
) -> Result<f64> {
    threshold_in_bracket(lambda, rho, target_rate, params, 0.1, 4.0)
}

pub(crate) fn threshold_in_bracket(
    lambda: &DegreeDistribution,
    rho: &DegreeDistribution,
    target_rate: f64,
    params: &DeParams,
    bracket_lo: f64,
    bracket_hi: f64,
) -> Result<f64> {
    validate_pair(lambda, rho)?;
    if let Some(c) = rate_and_normalization(lambda, rho, target_rate)? {
        return Err(Error::validation(format!(
            "distribution pair violates {c:?} at rate {target_rate}; threshold undefined"
        )));
    }
    const TOL: f64 = 1e-5;
    let converges = |sigma2: f64| -> Result<bool> {
        Ok(check_constraints(lambda, rho, target_rate, sigma2, params)?.converged)
    };
    let mut lo = bracket_lo;
    let mut hi = bracket_hi;
    if !converges(lo)? {
        return Err(Error::no_threshold(format!(
            "constraints already fail at sigma2 = {lo}; no threshold in bracket"
        )));
    }
    let mut expansions = 0;
    while converges(hi)? {
        if expansions == 3 {
            return Err(Error::no_threshold(format!(
                "constraints still hold at sigma2 = {hi}; threshold beyond expanded bracket"
            )));
        }
        lo = hi;
        hi *= 2.0;
        expansions += 1;
    }
    while hi - lo > TOL {
        let mid = 0.5 * (lo + hi);
        if converges(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Convert a noise-variance threshold to an E_b/N₀ threshold in dB at code
/// rate `R`: `γ = 1/σ²`, `E_b/N₀ = γ/(2R)`.
pub fn sigma2_to_ebn0_db(sigma2: f64, rate: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::domain(format!("rate must be in (0,1), got {rate}")));
    }
    Ok(10.0 * (1.0 / (2.0 * rate * sigma2)).log10())
}
