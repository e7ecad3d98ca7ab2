//! Secrecy metrics: the equivocation-rate lower bound, the secrecy-capacity
//! benchmark, and report assembly tying the jammed receiver's measured error
//! rate to the eavesdropper's channel capacity.
//!
//! The bound charges the eavesdropper the classical mutual-information cap
//! `I(Xⁿ; Zⁿ) ≤ n·C_E` and the Fano term `H(Xⁿ | M, Zⁿ) ≤ 1 + k_r·η`, which
//! together give
//!
//! ```text
//! R_e* = R_c − C_E − (R_c − R_s)·η − 1/n
//! ```
//!
//! with `R_c` the overall codeword rate and `η` the jammed receiver's
//! codeword error rate at the eavesdropper's SNR. The asymptotic variant
//! drops the `1/n` term and evaluates at the decoding threshold with `η = 0`.

use crate::analysis::{biawgn_capacity, SnrPoint};
use crate::degdist::WiretapCodeSpec;
use crate::error::{Error, Result};

/// Signed bound value plus its clamped-to-zero companion; the bound can go
/// negative at high eavesdropper SNR, and both views are kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivocationBound {
    pub signed: f64,
    pub clamped: f64,
}

fn bound_from_terms(r_c: f64, r_s: f64, eta: f64, c_e: f64, inv_n: f64) -> EquivocationBound {
    let signed = r_c - c_e - (r_c - r_s) * eta - inv_n;
    EquivocationBound { signed, clamped: signed.max(0.0) }
}

fn check_probability(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(Error::domain(format!("{name} must lie in [0, 1], got {value}")));
    }
    Ok(())
}

/// Finite-length equivocation-rate lower bound for a concrete code.
pub fn equivocation_bound(spec: &WiretapCodeSpec, eta: f64, c_e: f64) -> Result<EquivocationBound> {
    check_probability("eta", eta)?;
    check_probability("c_e", c_e)?;
    Ok(bound_from_terms(spec.r_b(), spec.r_s(), eta, c_e, 1.0 / spec.n as f64))
}

/// Asymptotic form of the bound: the `1/n` term vanishes. Rates are taken
/// as real numbers since no block length is involved.
pub fn equivocation_bound_asymptotic(
    r_s: f64,
    r_b: f64,
    eta: f64,
    c_e: f64,
) -> Result<EquivocationBound> {
    if !(r_s > 0.0 && r_s <= r_b && r_b < 1.0) {
        return Err(Error::domain(format!(
            "rates must satisfy 0 < r_s <= r_b < 1, got r_s = {r_s}, r_b = {r_b}"
        )));
    }
    check_probability("eta", eta)?;
    check_probability("c_e", c_e)?;
    Ok(bound_from_terms(r_b, r_s, eta, c_e, 0.0))
}

/// Secrecy capacity of the pair of binary-input channels implied by the
/// code partition, together with its fraction of the secret rate:
/// `C_s = R_B − R_F = R_s·(1 − R_B)/(1 − R_s)`.
pub fn secrecy_capacity(spec: &WiretapCodeSpec) -> (f64, f64) {
    // Integer-count form keeps the fraction exact: (n − k)/(n − k_s).
    let frac = (spec.n - spec.k_s - spec.k_r) as f64 / (spec.n - spec.k_s) as f64;
    (spec.r_s() * frac, frac)
}

/// Which series of the fractional-equivocation picture a report belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Threshold SNR, η = 0, no finite-length penalty.
    Asymptotic,
    /// A measured working point of a finite code.
    Finite,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Asymptotic => "asymptotic",
            Regime::Finite => "finite",
        }
    }
}

/// Full secrecy report at one eavesdropper working point.
#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyReport {
    pub spec: WiretapCodeSpec,
    pub regime: Regime,
    /// Eavesdropper SNR point (the jammed receiver's working point).
    pub eve_snr: SnrPoint,
    /// Jammed receiver's codeword error rate at that point.
    pub eta: f64,
    /// Eavesdropper channel capacity C(γ_E).
    pub c_e: f64,
    /// Signed equivocation lower bound.
    pub r_e_star: f64,
    pub r_e_star_clamped: f64,
    pub c_s: f64,
    /// R_e*/R_s (signed).
    pub frac_r_e_star: f64,
    /// C_s/R_s = (1 − R_B)/(1 − R_s).
    pub frac_c_s: f64,
}

/// The ideal-coding benchmark tolerance: the measured-point fraction may
/// exceed the capacity fraction only by numerical noise.
pub const BENCHMARK_TOLERANCE: f64 = 1e-9;

impl SecrecyReport {
    /// A fractional equivocation above 1 means the inputs were not
    /// physically consistent (η below what any code could achieve at that
    /// SNR). Reported as a warning, never an error.
    pub fn consistency_warning(&self) -> Option<String> {
        if self.frac_r_e_star > 1.0 + BENCHMARK_TOLERANCE {
            Some(format!(
                "fractional equivocation {:.6} exceeds 1; eta = {:.3e} and C_E = {:.6} \
                 are inconsistent with any achievable working point",
                self.frac_r_e_star, self.eta, self.c_e
            ))
        } else {
            None
        }
    }
}

fn assemble(
    spec: &WiretapCodeSpec,
    regime: Regime,
    eve_snr: SnrPoint,
    eta: f64,
    bound: EquivocationBound,
    c_e: f64,
) -> SecrecyReport {
    let (c_s, frac_c_s) = secrecy_capacity(spec);
    let r_s = spec.r_s();
    SecrecyReport {
        spec: spec.clone(),
        regime,
        eve_snr,
        eta,
        c_e,
        r_e_star: bound.signed,
        r_e_star_clamped: bound.clamped,
        c_s,
        frac_r_e_star: bound.signed / r_s,
        frac_c_s,
    }
}

fn check_rate_ref(spec: &WiretapCodeSpec, snr: &SnrPoint) -> Result<()> {
    if (snr.rate_ref - spec.r_f()).abs() > 1e-6 {
        return Err(Error::validation(format!(
            "working point carries rate {} but the jammed receiver's rate is {}",
            snr.rate_ref,
            spec.r_f()
        )));
    }
    Ok(())
}

/// Finite-length report: `eta` is the jammed receiver's measured CER at
/// `frank_working_point`, and the eavesdropper capacity is evaluated at
/// the same physical SNR.
pub fn build_report(
    spec: &WiretapCodeSpec,
    frank_working_point: &SnrPoint,
    eta: f64,
) -> Result<SecrecyReport> {
    check_rate_ref(spec, frank_working_point)?;
    let c_e = biawgn_capacity(frank_working_point.gamma)?;
    let bound = equivocation_bound(spec, eta, c_e)?;
    Ok(assemble(spec, Regime::Finite, *frank_working_point, eta, bound, c_e))
}

/// Asymptotic report: evaluated at the decoding threshold with η = 0 and
/// the finite-length `1/n` penalty dropped.
pub fn build_asymptotic_report(
    spec: &WiretapCodeSpec,
    frank_threshold: &SnrPoint,
) -> Result<SecrecyReport> {
    check_rate_ref(spec, frank_threshold)?;
    let c_e = biawgn_capacity(frank_threshold.gamma)?;
    let bound = equivocation_bound_asymptotic(spec.r_s(), spec.r_b(), 0.0, c_e)?;
    Ok(assemble(spec, Regime::Asymptotic, *frank_threshold, 0.0, bound, c_e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row7_spec() -> WiretapCodeSpec {
        WiretapCodeSpec::from_rates(10_000, 0.725, 0.75).unwrap()
    }

    #[test]
    fn bound_with_zeroed_terms_equals_codeword_rate() {
        let b = equivocation_bound_asymptotic(0.5, 0.75, 0.0, 0.0).unwrap();
        assert_eq!(b.signed, 0.75);
        assert_eq!(b.clamped, 0.75);
    }

    #[test]
    fn bound_at_full_error_and_ideal_eve_capacity() {
        // eta = 1 with c_e = R_F leaves R_s − R_F − 1/n.
        let spec = WiretapCodeSpec::from_rates(1000, 0.5, 0.75).unwrap();
        let r_f = spec.r_f();
        let b = equivocation_bound(&spec, 1.0, r_f).unwrap();
        let expect = spec.r_s() - r_f - 1.0 / 1000.0;
        assert!((b.signed - expect).abs() < 1e-15);
    }

    #[test]
    fn bound_strong_noise_half_error_substitution() {
        let spec = WiretapCodeSpec::from_rates(2000, 0.4, 0.5).unwrap();
        let b = equivocation_bound(&spec, 0.5, 0.0).unwrap();
        let expect = spec.r_b() - (spec.r_b() - spec.r_s()) * 0.5 - 1.0 / 2000.0;
        assert!((b.signed - expect).abs() < 1e-15);
    }

    #[test]
    fn bound_decreases_in_eta_and_capacity() {
        let spec = WiretapCodeSpec::from_rates(5000, 0.45, 0.5).unwrap();
        let base = equivocation_bound(&spec, 0.3, 0.2).unwrap().signed;
        for k in 1..=5 {
            let d = k as f64 * 0.05;
            assert!(equivocation_bound(&spec, 0.3 + d, 0.2).unwrap().signed < base);
            assert!(equivocation_bound(&spec, 0.3, 0.2 + d).unwrap().signed < base);
        }
    }

    #[test]
    fn negative_bound_is_kept_signed_and_clamped() {
        let spec = WiretapCodeSpec::from_rates(1000, 0.1, 0.5).unwrap();
        let b = equivocation_bound(&spec, 1.0, 0.9).unwrap();
        assert!(b.signed < 0.0);
        assert_eq!(b.clamped, 0.0);
    }

    #[test]
    fn secrecy_capacity_matches_rate_difference_identity() {
        // C_s = R_B − R_F must agree with R_s(1 − R_B)/(1 − R_s).
        for &(n, r_s, r_b) in
            &[(10_000, 0.725, 0.75), (10_000, 0.5, 0.75), (4000, 0.4, 0.5), (4000, 0.33, 0.35)]
        {
            let spec = WiretapCodeSpec::from_rates(n, r_s, r_b).unwrap();
            let (c_s, frac) = secrecy_capacity(&spec);
            let direct = spec.r_b() - spec.r_f();
            assert!((c_s - direct).abs() < 1e-12, "c_s {c_s} vs {direct}");
            assert!((c_s - spec.r_s() * frac).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&frac));
        }
    }

    #[test]
    fn fractional_capacity_of_highest_rate_pair() {
        let (_, frac) = secrecy_capacity(&row7_spec());
        assert!((frac - 0.25 / 0.275).abs() < 1e-12, "frac {frac}");
    }

    #[test]
    fn equal_rates_give_unit_fraction_and_zero_then_zero_rate_gives_zero() {
        let spec = WiretapCodeSpec::new(1000, 500, 0).unwrap();
        let (c_s, frac) = secrecy_capacity(&spec);
        assert_eq!(frac, 1.0);
        assert!((c_s - 0.5).abs() < 1e-15);
        // R_s → 0 end: the smallest representable secret block.
        let tiny = WiretapCodeSpec::new(10_000, 1, 4999).unwrap();
        let (c_s, _) = secrecy_capacity(&tiny);
        assert!(c_s < 1e-4);
    }

    #[test]
    fn highest_rate_pair_reaches_published_fractional_equivocation() {
        // η = 1e-2 at the jammed receiver's 2.11 dB working point with
        // R_F = 1/11 lands the fractional bound close to 0.8.
        let spec = row7_spec();
        let wp = SnrPoint::from_ebn0(2.11, spec.r_f()).unwrap();
        let report = build_report(&spec, &wp, 1e-2).unwrap();
        assert!(
            (report.frac_r_e_star - 0.8).abs() < 0.05,
            "frac {}",
            report.frac_r_e_star
        );
        // Regression-pinned value from the first validated run.
        assert!(
            (report.frac_r_e_star - 0.77689).abs() < 5e-5,
            "frac {}",
            report.frac_r_e_star
        );
        assert!(report.consistency_warning().is_none());
        assert!(report.frac_r_e_star <= report.frac_c_s + BENCHMARK_TOLERANCE);
    }

    #[test]
    fn report_arithmetic_is_exact() {
        let spec = WiretapCodeSpec::from_rates(10_000, 0.5, 0.75).unwrap();
        let wp = SnrPoint::from_ebn0(1.17, spec.r_f()).unwrap();
        let report = build_report(&spec, &wp, 3.4e-3).unwrap();
        let by_hand = spec.r_b()
            - report.c_e
            - (spec.r_b() - spec.r_s()) * 3.4e-3
            - 1.0 / spec.n as f64;
        assert_eq!(report.r_e_star, by_hand);
        assert_eq!(report.r_e_star_clamped, by_hand.max(0.0));
        assert_eq!(report.regime, Regime::Finite);
    }

    #[test]
    fn asymptotic_report_drops_length_penalty_and_dominates_finite() {
        let spec = row7_spec();
        let wp = SnrPoint::from_ebn0(2.11, spec.r_f()).unwrap();
        let finite = build_report(&spec, &wp, 1e-2).unwrap();
        let asym = build_asymptotic_report(&spec, &wp).unwrap();
        assert_eq!(asym.eta, 0.0);
        assert_eq!(asym.regime, Regime::Asymptotic);
        let by_hand = spec.r_b() - asym.c_e;
        assert_eq!(asym.r_e_star, by_hand);
        // Same SNR, zero error term, no 1/n: strictly larger bound.
        assert!(asym.frac_r_e_star > finite.frac_r_e_star);
    }

    #[test]
    fn longer_code_at_same_point_gives_larger_fraction() {
        // The three-regime ordering: asymptotic ≥ long code ≥ short code
        // when evaluated with the same η and SNR.
        let short = WiretapCodeSpec::from_rates(10_000, 0.725, 0.75).unwrap();
        let long = WiretapCodeSpec::from_rates(50_000, 0.725, 0.75).unwrap();
        let wp = SnrPoint::from_ebn0(2.11, short.r_f()).unwrap();
        let f_short = build_report(&short, &wp, 1e-2).unwrap();
        let f_long = build_report(&long, &wp, 1e-2).unwrap();
        let asym = build_asymptotic_report(&short, &wp).unwrap();
        assert!(asym.frac_r_e_star >= f_long.frac_r_e_star);
        assert!(f_long.frac_r_e_star >= f_short.frac_r_e_star);
    }

    #[test]
    fn inconsistent_inputs_warn_but_do_not_fail() {
        let spec = WiretapCodeSpec::from_rates(10_000, 0.5, 0.75).unwrap();
        // Absurdly quiet eavesdropper channel claim: c_e ≈ 0 at high SNR
        // cannot happen; feed a hand-built bound through the report path
        // by using a very low working point instead.
        let wp = SnrPoint::from_ebn0(-20.0, spec.r_f()).unwrap();
        let report = build_report(&spec, &wp, 0.0).unwrap();
        assert!(report.frac_r_e_star > 1.0);
        assert!(report.consistency_warning().is_some());
    }

    #[test]
    fn rate_mismatch_in_working_point_is_rejected() {
        let spec = WiretapCodeSpec::from_rates(10_000, 0.5, 0.75).unwrap();
        let wp = SnrPoint::from_ebn0(1.17, spec.r_b()).unwrap();
        assert!(build_report(&spec, &wp, 1e-2).is_err());
    }

    #[test]
    fn out_of_range_inputs_are_rejected() {
        let spec = WiretapCodeSpec::from_rates(1000, 0.4, 0.5).unwrap();
        assert!(equivocation_bound(&spec, -0.1, 0.2).is_err());
        assert!(equivocation_bound(&spec, 0.1, 1.2).is_err());
        assert!(equivocation_bound_asymptotic(0.6, 0.5, 0.0, 0.0).is_err());
    }
}
