//! Scalar numerical kernels shared by the design and evaluation layers:
//! binary-input AWGN capacity, the density-evolution function φ with its
//! inverse, and the one-step density-evolution update.

pub mod quad;
pub mod table;

use crate::degdist::{DegreeDistribution, Kind, Perspective};
use crate::error::{Error, Result};
use table::{phi_series, phi_tail, tail_inv, PHI_TABLE, X_MIN};

const LN2: f64 = std::f64::consts::LN_2;

/// SNR descriptor carrying E_b/N₀ (dB, with its reference rate), the noise
/// variance σ² and the per-symbol SNR γ under unit-energy BPSK symbols.
///
/// Conversion convention: `γ = 2 · rate_ref · 10^(ebn0_db/10)` and
/// `γ = 1/σ²`, where `rate_ref` is the rate of the code whose decoder is
/// under test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    pub ebn0_db: f64,
    pub rate_ref: f64,
    pub sigma2: f64,
    pub gamma: f64,
}

impl SnrPoint {
    pub fn from_ebn0(ebn0_db: f64, rate_ref: f64) -> Result<Self> {
        if !(rate_ref > 0.0 && rate_ref < 1.0) {
            return Err(Error::domain(format!(
                "reference rate must be in (0,1), got {rate_ref}"
            )));
        }
        if !ebn0_db.is_finite() {
            return Err(Error::domain("E_b/N_0 must be finite"));
        }
        let gamma = 2.0 * rate_ref * 10f64.powf(ebn0_db / 10.0);
        Ok(SnrPoint { ebn0_db, rate_ref, sigma2: 1.0 / gamma, gamma })
    }

    pub fn from_sigma2(sigma2: f64, rate_ref: f64) -> Result<Self> {
        if !(rate_ref > 0.0 && rate_ref < 1.0) {
            return Err(Error::domain(format!(
                "reference rate must be in (0,1), got {rate_ref}"
            )));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::domain(format!("sigma2 must be positive, got {sigma2}")));
        }
        let gamma = 1.0 / sigma2;
        let ebn0_db = 10.0 * (gamma / (2.0 * rate_ref)).log10();
        Ok(SnrPoint { ebn0_db, rate_ref, sigma2, gamma })
    }

    /// The same physical channel described with a different reference rate.
    pub fn with_rate_ref(&self, rate_ref: f64) -> Result<Self> {
        SnrPoint::from_sigma2(self.sigma2, rate_ref)
    }
}

fn softplus_log2(t: f64) -> f64 {
    // log2(1 + e^t), stable for any t.
    if t > 0.0 {
        (t + (-t).exp().ln_1p()) / LN2
    } else {
        t.exp().ln_1p() / LN2
    }
}

/// Capacity of the binary-input AWGN channel at per-symbol SNR γ, in bits
/// per channel use:
/// `C(γ) = 1 - (1/√(2π)) ∫ e^{-(y-√γ)²/2} · log₂(1 + e^{-2y√γ}) dy`.
///
/// Monotone nondecreasing in γ; absolute quadrature error below 1e-9.
pub fn biawgn_capacity(gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::domain(format!("gamma must be nonnegative, got {gamma}")));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let sq = gamma.sqrt();
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let f = |y: f64| {
        let w = norm * (-0.5 * (y - sq) * (y - sq)).exp();
        w * softplus_log2(-2.0 * y * sq)
    };
    // The Gaussian envelope is below 1e-21 outside ±10 standard deviations.
    let (integral, _) = quad::integrate(&f, sq - 10.0, sq + 10.0, 1e-15, 1e-12);
    Ok((1.0 - integral).clamp(0.0, 1.0))
}

/// φ(x) by adaptive quadrature, written in the cancellation-free form
/// `φ(x) = E_u[ 2/(1+e^u) ]` with `u ~ N(x, 2x)`, which equals
/// `1 - (1/√(4πx)) ∫ tanh(u/2) e^{-(u-x)²/(4x)} du`.
pub(crate) fn phi_exact(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < X_MIN {
        return phi_series(x);
    }
    let sd = (2.0 * x).sqrt();
    let norm = 1.0 / (4.0 * std::f64::consts::PI * x).sqrt();
    let f = |u: f64| {
        let w = norm * (-(u - x) * (u - x) / (4.0 * x)).exp();
        let g = if u > 36.0 { 2.0 * (-u).exp() } else { 2.0 / (1.0 + u.exp()) };
        w * g
    };
    // 15 standard deviations: for large x the value is dominated by the left
    // Gaussian tail (u < 0, where the integrand saturates near 2·weight), so
    // the window must reach far enough for relative — not absolute — accuracy.
    let (integral, _) = quad::integrate(&f, x - 15.0 * sd, x + 15.0 * sd, 1e-30, 1e-12);
    integral.clamp(0.0, 1.0)
}

/// dφ/dx by differentiating under the integral sign (used to build the
/// interpolation table with O(h⁴) accuracy).
pub(crate) fn phi_prime_exact(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let sd = (2.0 * x).sqrt();
    let norm = 1.0 / (4.0 * std::f64::consts::PI * x).sqrt();
    let f = |u: f64| {
        let d = u - x;
        let w = norm * (-d * d / (4.0 * x)).exp();
        let g = if u > 36.0 { 2.0 * (-u).exp() } else { 2.0 / (1.0 + u.exp()) };
        // ∂/∂x ln N(u; x, 2x) — both the mean and the variance carry x.
        let score = d / (2.0 * x) + d * d / (4.0 * x * x) - 0.5 / x;
        w * g * score
    };
    let (integral, _) = quad::integrate(&f, x - 15.0 * sd, x + 15.0 * sd, 1e-30, 1e-12);
    integral.min(0.0)
}

/// The density-evolution function φ. Exact-quadrature reference evaluation;
/// the table-backed fast path used inside optimization loops is reached
/// through [`DeKernel::Quadrature`].
pub fn phi(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("phi requires x >= 0, got {x}")));
    }
    Ok(phi_exact(x))
}

/// φ⁻¹(y) for y ∈ (0, 1]: bisection on the monotone interpolant followed by
/// one Newton refinement step against the quadrature-exact φ.
pub fn phi_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::domain(format!("phi_inv requires y in (0,1], got {y}")));
    }
    let x0 = PHI_TABLE.phi_inv(y);
    if x0 == 0.0 {
        return Ok(0.0);
    }
    let fx = phi_exact(x0) - y;
    let dfx = phi_prime_exact(x0);
    let refined = if dfx < 0.0 { x0 - fx / dfx } else { x0 };
    Ok(if refined.is_finite() && refined > 0.0 { refined } else { x0 })
}

/// Closed-form surrogate for φ: an exponential body below x = 10 and the
/// classical exponential tail above. This two-piece form is in widespread
/// use for Gaussian-approximation threshold computations and reproduces
/// published working-point tables; the quadrature kernel is the numerically
/// exact default.
pub fn phi_closed_form(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < 10.0 {
        (-0.4527 * x.powf(0.86) + 0.0218).exp().min(1.0)
    } else {
        phi_tail(x)
    }
}

/// Value of the closed-form body as it approaches the x = 10 seam.
fn closed_form_seam() -> f64 {
    (-0.4527 * 10f64.powf(0.86) + 0.0218).exp()
}

/// Inverse of [`phi_closed_form`].
pub fn phi_closed_form_inv(y: f64) -> f64 {
    if y >= 1.0 {
        0.0
    } else if y > closed_form_seam() {
        ((0.0218 - y.ln()) / 0.4527).powf(1.0 / 0.86)
    } else {
        tail_inv(y)
    }
}

/// Selects the φ/φ⁻¹ pair used by density evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeKernel {
    /// Exact integral φ, served from the precomputed monotone cubic table.
    #[default]
    Quadrature,
    /// Two-piece closed-form surrogate (see [`phi_closed_form`]); matches
    /// published threshold tables computed with that approximation.
    ClosedForm,
}

impl DeKernel {
    #[inline]
    pub fn phi(self, x: f64) -> f64 {
        match self {
            DeKernel::Quadrature => PHI_TABLE.phi(x),
            DeKernel::ClosedForm => phi_closed_form(x),
        }
    }

    #[inline]
    pub fn phi_inv(self, y: f64) -> f64 {
        match self {
            DeKernel::Quadrature => PHI_TABLE.phi_inv(y),
            DeKernel::ClosedForm => phi_closed_form_inv(y),
        }
    }
}

fn require_edge(d: &DegreeDistribution, kind: Kind, what: &str) -> Result<()> {
    if d.perspective() != Perspective::Edge || d.kind() != kind {
        return Err(Error::validation(format!(
            "{what} must be an edge-perspective {kind:?} distribution, got {:?}/{:?}",
            d.perspective(),
            d.kind()
        )));
    }
    Ok(())
}

/// The check-side inner sum `Σ_j ρ_j φ⁻¹(1 - (1-r)^{j-1})` of the
/// density-evolution update.
pub(crate) fn de_inner(r: f64, rho: &DegreeDistribution, kernel: DeKernel) -> f64 {
    let omr = 1.0 - r;
    let mut inner = 0.0;
    for (&j, &w) in rho.coeffs() {
        let arg = 1.0 - omr.powi(j as i32 - 1);
        inner += w * kernel.phi_inv(arg.clamp(0.0, 1.0));
    }
    inner
}

/// One step of Gaussian-approximation density evolution:
/// `h(s, r) = Σ_i λ_i φ(s + (i-1) · Σ_j ρ_j φ⁻¹(1 - (1-r)^{j-1}))`.
///
/// `s = 2/σ²` and `r` is the evolving message statistic, starting from
/// `r₀ = φ(s)`.
pub fn de_update(
    s: f64,
    r: f64,
    lambda: &DegreeDistribution,
    rho: &DegreeDistribution,
    kernel: DeKernel,
) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain(format!("de_update requires s > 0, got {s}")));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::domain(format!("de_update requires r in (0,1], got {r}")));
    }
    require_edge(lambda, Kind::Variable, "lambda")?;
    require_edge(rho, Kind::Check, "rho")?;
    let inner = de_inner(r, rho, kernel);
    let mut h = 0.0;
    for (&i, &w) in lambda.coeffs() {
        h += w * kernel.phi(s + (i as f64 - 1.0) * inner);
    }
    Ok(h.clamp(0.0, 1.0))
}
