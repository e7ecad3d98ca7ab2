//! Degree distributions of Tanner graphs in edge and node perspective,
//! the wiretap code rate bookkeeping, and the concentrated check-degree
//! constructor.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perspective {
    Edge,
    Node,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Variable,
    Check,
}

/// A polynomial over node degrees: the weight at degree `i` is the fraction
/// of edges (edge perspective) or nodes (node perspective) incident to
/// degree-`i` nodes. Weights are nonnegative, degrees are at least 2, and the
/// weights sum to one within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    perspective: Perspective,
    kind: Kind,
    coeffs: BTreeMap<u32, f64>,
    max_degree: u32,
}

impl DegreeDistribution {
    /// Build a distribution from `(degree, weight)` pairs. Zero weights are
    /// dropped; the remaining weights must sum to one within 1e-12.
    pub fn new(
        perspective: Perspective,
        kind: Kind,
        pairs: impl IntoIterator<Item = (u32, f64)>,
    ) -> Result<Self> {
        Self::build(perspective, kind, pairs, 1e-12)
    }

    /// Build from possibly rounded coefficients (e.g. values printed to four
    /// decimals): accepts a sum-to-one deviation up to `tol` and renormalizes
    /// exactly.
    pub fn new_renormalized(
        perspective: Perspective,
        kind: Kind,
        pairs: impl IntoIterator<Item = (u32, f64)>,
        tol: f64,
    ) -> Result<Self> {
        Self::build(perspective, kind, pairs, tol)
    }

    fn build(
        perspective: Perspective,
        kind: Kind,
        pairs: impl IntoIterator<Item = (u32, f64)>,
        tol: f64,
    ) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (deg, w) in pairs {
            if deg < 2 {
                return Err(Error::validation(format!("degree {deg} below minimum of 2")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::validation(format!(
                    "weight {w} at degree {deg} must be finite and nonnegative"
                )));
            }
            if w > 0.0 {
                *coeffs.entry(deg).or_insert(0.0) += w;
            }
        }
        if coeffs.is_empty() {
            return Err(Error::validation("empty degree distribution"));
        }
        let sum: f64 = coeffs.values().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::validation(format!(
                "degree distribution weights sum to {sum}, expected 1 within {tol}"
            )));
        }
        if (sum - 1.0).abs() > 1e-15 {
            for w in coeffs.values_mut() {
                *w /= sum;
            }
        }
        let max_degree = *coeffs.keys().next_back().unwrap();
        Ok(DegreeDistribution { perspective, kind, coeffs, max_degree })
    }

    pub fn perspective(&self) -> Perspective {
        self.perspective
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn coeffs(&self) -> &BTreeMap<u32, f64> {
        &self.coeffs
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn weight(&self, degree: u32) -> f64 {
        self.coeffs.get(&degree).copied().unwrap_or(0.0)
    }

    /// `Σ_i w_i / i` — for an edge-perspective distribution this is the
    /// node-per-edge ratio that appears in the rate formula.
    pub fn sum_inv_degree(&self) -> f64 {
        self.coeffs.iter().map(|(&d, &w)| w / d as f64).sum()
    }

    /// `Σ_i w_i · i` — for a node-perspective distribution this is the mean
    /// node degree.
    pub fn mean_degree(&self) -> f64 {
        self.coeffs.iter().map(|(&d, &w)| w * d as f64).sum()
    }

    /// Edge perspective → node perspective: `w̃_i = (w_i/i) / Σ_k (w_k/k)`.
    pub fn to_node_perspective(&self) -> Result<Self> {
        if self.perspective != Perspective::Edge {
            return Err(Error::validation(
                "to_node_perspective requires an edge-perspective distribution",
            ));
        }
        let total = self.sum_inv_degree();
        if total <= 0.0 {
            return Err(Error::validation("degenerate distribution: Σ w_i/i is zero"));
        }
        let pairs = self.coeffs.iter().map(|(&d, &w)| (d, (w / d as f64) / total));
        DegreeDistribution::new(Perspective::Node, self.kind, pairs)
    }

    /// Node perspective → edge perspective: `w_i = (w̃_i · i) / Σ_k (w̃_k · k)`.
    pub fn to_edge_perspective(&self) -> Result<Self> {
        if self.perspective != Perspective::Node {
            return Err(Error::validation(
                "to_edge_perspective requires a node-perspective distribution",
            ));
        }
        let total = self.mean_degree();
        if total <= 0.0 {
            return Err(Error::validation("degenerate distribution: Σ w_i·i is zero"));
        }
        let pairs = self.coeffs.iter().map(|(&d, &w)| (d, w * d as f64 / total));
        DegreeDistribution::new(Perspective::Edge, self.kind, pairs)
    }

    /// Serialize to the plain-text interchange form: a header declaring
    /// perspective and kind, then one `degree weight` line per coefficient.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let p = match self.perspective {
            Perspective::Edge => "edge",
            Perspective::Node => "node",
        };
        let k = match self.kind {
            Kind::Variable => "variable",
            Kind::Check => "check",
        };
        let _ = writeln!(out, "perspective {p}");
        let _ = writeln!(out, "kind {k}");
        for (&d, &w) in &self.coeffs {
            let _ = writeln!(out, "{d} {w:.17e}");
        }
        out
    }

    /// Parse the plain-text interchange form. `line_offset` is added to
    /// reported line numbers so callers embedding blocks in larger files can
    /// point at the right line.
    pub fn from_text(text: &str, line_offset: usize) -> Result<Self> {
        let mut perspective = None;
        let mut kind = None;
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = line_offset + idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let a = it.next().unwrap();
            let b = it
                .next()
                .ok_or_else(|| Error::parse(lineno, "expected two fields"))?;
            if it.next().is_some() {
                return Err(Error::parse(lineno, "expected exactly two fields"));
            }
            match a {
                "perspective" => {
                    perspective = Some(match b {
                        "edge" => Perspective::Edge,
                        "node" => Perspective::Node,
                        _ => return Err(Error::parse(lineno, format!("unknown perspective `{b}`"))),
                    })
                }
                "kind" => {
                    kind = Some(match b {
                        "variable" => Kind::Variable,
                        "check" => Kind::Check,
                        _ => return Err(Error::parse(lineno, format!("unknown kind `{b}`"))),
                    })
                }
                _ => {
                    let deg: u32 = a
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad degree `{a}`")))?;
                    let w: f64 = b
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad weight `{b}`")))?;
                    pairs.push((deg, w));
                }
            }
        }
        let perspective =
            perspective.ok_or_else(|| Error::parse(line_offset + 1, "missing `perspective` header"))?;
        let kind = kind.ok_or_else(|| Error::parse(line_offset + 1, "missing `kind` header"))?;
        // Printed tables typically carry four decimals; accept that rounding.
        DegreeDistribution::new_renormalized(perspective, kind, pairs, 1e-3)
    }
}

/// Design rate `1 - (Σ_i ρ_i/i) / (Σ_j λ_j/j)` of an edge-perspective pair.
pub fn design_rate(lambda: &DegreeDistribution, rho: &DegreeDistribution) -> Result<f64> {
    if lambda.perspective() != Perspective::Edge || rho.perspective() != Perspective::Edge {
        return Err(Error::validation("design_rate requires edge-perspective distributions"));
    }
    if lambda.kind() != Kind::Variable || rho.kind() != Kind::Check {
        return Err(Error::validation(
            "design_rate requires a variable distribution and a check distribution",
        ));
    }
    let denom = lambda.sum_inv_degree();
    if denom <= 0.0 {
        return Err(Error::validation("zero denominator in rate formula"));
    }
    Ok(1.0 - rho.sum_inv_degree() / denom)
}

/// Concentrated check-degree distribution in node perspective: the two
/// adjacent integer degrees around the mean
/// `c_m = (Σ_j λ̃_j · j) / (1 - rate)`, with weights
/// `a = ⌈c_m⌉ - c_m` at `⌊c_m⌋` and `b = c_m - ⌊c_m⌋` at `⌈c_m⌉`.
/// An integer `c_m` yields the single degree `c_m` with weight one.
pub fn concentrated_rho(lambda_node: &DegreeDistribution, rate: f64) -> Result<DegreeDistribution> {
    if lambda_node.perspective() != Perspective::Node {
        return Err(Error::validation("concentrated_rho requires a node-perspective λ̃"));
    }
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::domain(format!("rate must be in (0,1), got {rate}")));
    }
    let c_m = lambda_node.mean_degree() / (1.0 - rate);
    concentrated_rho_from_mean(c_m)
}

/// The concentrated distribution for a directly specified mean check degree.
pub fn concentrated_rho_from_mean(c_m: f64) -> Result<DegreeDistribution> {
    if !(c_m >= 2.0 && c_m.is_finite()) {
        return Err(Error::domain(format!("mean check degree {c_m} must be at least 2")));
    }
    let lo = c_m.floor();
    let hi = c_m.ceil();
    let pairs: Vec<(u32, f64)> = if lo == hi {
        vec![(lo as u32, 1.0)]
    } else {
        vec![(lo as u32, hi - c_m), (hi as u32, c_m - lo)]
    };
    DegreeDistribution::new_renormalized(Perspective::Node, Kind::Check, pairs, 1e-9)
}

/// Code-length bookkeeping for the partitioned wiretap code: an `n`-bit
/// codeword `[M | R | P]` carries a `k_s`-bit secret message, a `k_r`-bit
/// random message and `r` redundancy bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WiretapCodeSpec {
    pub n: usize,
    pub k_s: usize,
    pub k_r: usize,
    pub r: usize,
}

impl WiretapCodeSpec {
    pub fn new(n: usize, k_s: usize, k_r: usize) -> Result<Self> {
        if k_s < 1 {
            return Err(Error::validation("k_s must be at least 1"));
        }
        if k_s + k_r > n {
            return Err(Error::validation(format!(
                "k_s + k_r = {} exceeds n = {n}",
                k_s + k_r
            )));
        }
        Ok(WiretapCodeSpec { n, k_s, k_r, r: n - k_s - k_r })
    }

    /// Realize a rate pair at block length `n`; `r_s·n` and `r_b·n` must land
    /// on integers within rounding noise.
    pub fn from_rates(n: usize, r_s: f64, r_b: f64) -> Result<Self> {
        if !(r_s > 0.0 && r_s < r_b && r_b < 1.0) {
            return Err(Error::validation(format!(
                "rates must satisfy 0 < R_s < R_B < 1, got R_s={r_s}, R_B={r_b}"
            )));
        }
        let k_s = (r_s * n as f64).round() as usize;
        let k = (r_b * n as f64).round() as usize;
        if k_s == 0 || k <= k_s || k >= n {
            return Err(Error::validation(format!(
                "rates ({r_s}, {r_b}) degenerate at n = {n}"
            )));
        }
        WiretapCodeSpec::new(n, k_s, k - k_s)
    }

    /// Total message length `k = k_s + k_r`.
    pub fn k(&self) -> usize {
        self.k_s + self.k_r
    }

    /// Bob's code rate `R_B = (k_s + k_r)/n`.
    pub fn r_b(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    /// Secret message rate `R_s = k_s/n`.
    pub fn r_s(&self) -> f64 {
        self.k_s as f64 / self.n as f64
    }

    /// Frank's code rate `R_F = k_r/(k_r + r) = (R_B - R_s)/(1 - R_s)`.
    pub fn r_f(&self) -> f64 {
        self.k_r as f64 / (self.k_r + self.r) as f64
    }

    /// Length of the codeword part Frank decodes (`[R | P]`).
    pub fn n_frank(&self) -> usize {
        self.k_r + self.r
    }
}

/// `R_F` computed from the rate pair alone, `(R_B - R_s)/(1 - R_s)`.
pub fn frank_rate(r_s: f64, r_b: f64) -> f64 {
    (r_b - r_s) / (1.0 - r_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn edge_var(pairs: &[(u32, f64)]) -> DegreeDistribution {
        DegreeDistribution::new(Perspective::Edge, Kind::Variable, pairs.iter().copied()).unwrap()
    }

    #[test]
    fn single_degree_node_perspective_is_identity() {
        let d = edge_var(&[(2, 1.0)]);
        let n = d.to_node_perspective().unwrap();
        assert_eq!(n.weight(2), 1.0);
        assert_eq!(n.perspective(), Perspective::Node);
    }

    #[test]
    fn two_degree_node_perspective_values() {
        // λ = {2: 0.5, 4: 0.5} → λ̃ = {2: 2/3, 4: 1/3}.
        let d = edge_var(&[(2, 0.5), (4, 0.5)]);
        let n = d.to_node_perspective().unwrap();
        assert!((n.weight(2) - 2.0 / 3.0).abs() < 1e-15);
        assert!((n.weight(4) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn edge_perspective_inverse_values() {
        let n = DegreeDistribution::new(
            Perspective::Node,
            Kind::Variable,
            [(2, 2.0 / 3.0), (4, 1.0 / 3.0)],
        )
        .unwrap();
        let e = n.to_edge_perspective().unwrap();
        assert!((e.weight(2) - 0.5).abs() < 1e-15);
        assert!((e.weight(4) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn design_rate_regular_codes() {
        let r = design_rate(
            &edge_var(&[(3, 1.0)]),
            &DegreeDistribution::new(Perspective::Edge, Kind::Check, [(6, 1.0)]).unwrap(),
        )
        .unwrap();
        assert!((r - 0.5).abs() < 1e-15);
        let r = design_rate(
            &edge_var(&[(2, 1.0)]),
            &DegreeDistribution::new(Perspective::Edge, Kind::Check, [(4, 1.0)]).unwrap(),
        )
        .unwrap();
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn concentrated_rho_integer_mean() {
        let lam = DegreeDistribution::new(Perspective::Node, Kind::Variable, [(3, 1.0)]).unwrap();
        let rho = concentrated_rho(&lam, 0.5).unwrap();
        assert_eq!(rho.coeffs().len(), 1);
        assert_eq!(rho.weight(6), 1.0);
    }

    #[test]
    fn concentrated_rho_integer_mean_mixed() {
        // λ̃ = {2: 0.5, 3: 0.5} at rate 0.5 → mean 2.5, c_m = 5.
        let lam =
            DegreeDistribution::new(Perspective::Node, Kind::Variable, [(2, 0.5), (3, 0.5)])
                .unwrap();
        let rho = concentrated_rho(&lam, 0.5).unwrap();
        assert_eq!(rho.weight(5), 1.0);
    }

    #[test]
    fn concentrated_rho_fractional_mean() {
        // Mean node degree 3.25 at rate 0.5 → c_m = 6.5 → {6: 0.5, 7: 0.5}.
        let lam = DegreeDistribution::new(
            Perspective::Node,
            Kind::Variable,
            [(3, 0.75), (4, 0.25)],
        )
        .unwrap();
        let rho = concentrated_rho(&lam, 0.5).unwrap();
        assert!((rho.weight(6) - 0.5).abs() < 1e-12);
        assert!((rho.weight(7) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn concentrated_rho_rejects_bad_rate() {
        let lam = DegreeDistribution::new(Perspective::Node, Kind::Variable, [(3, 1.0)]).unwrap();
        assert!(matches!(concentrated_rho(&lam, 0.0), Err(Error::Domain(_))));
        assert!(matches!(concentrated_rho(&lam, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn wiretap_spec_rates() {
        let spec = WiretapCodeSpec::from_rates(10000, 0.5, 0.75).unwrap();
        assert_eq!((spec.k_s, spec.k_r, spec.r), (5000, 2500, 2500));
        assert!((spec.r_f() - 0.5).abs() < 1e-15);
        // The identity R_F = (R_B - R_s)/(1 - R_s) is exact.
        let alt = frank_rate(spec.r_s(), spec.r_b());
        assert!((spec.r_f() - alt).abs() < 1e-12);
        assert_eq!(spec.n_frank(), 5000);
    }

    #[test]
    fn wiretap_spec_validation() {
        assert!(WiretapCodeSpec::new(10, 0, 5).is_err());
        assert!(WiretapCodeSpec::new(10, 6, 5).is_err());
        assert!(WiretapCodeSpec::from_rates(1000, 0.5, 0.5).is_err());
    }

    #[test]
    fn distribution_rejects_invalid_inputs() {
        assert!(DegreeDistribution::new(Perspective::Edge, Kind::Variable, [(1, 1.0)]).is_err());
        assert!(DegreeDistribution::new(Perspective::Edge, Kind::Variable, [(2, 0.9)]).is_err());
        assert!(DegreeDistribution::new(Perspective::Edge, Kind::Variable, [(2, -0.1), (3, 1.1)])
            .is_err());
        let empty: [(u32, f64); 0] = [];
        assert!(DegreeDistribution::new(Perspective::Edge, Kind::Variable, empty).is_err());
    }

    #[test]
    fn text_round_trip() {
        let d = edge_var(&[(2, 0.4208), (3, 0.1656), (4, 0.1192), (8, 0.0057), (10, 0.2877), (50, 0.0010)]);
        let text = d.to_text();
        let back = DegreeDistribution::from_text(&text, 0).unwrap();
        for (&deg, &w) in d.coeffs() {
            assert!((back.weight(deg) - w).abs() < 1e-15);
        }
    }

    #[test]
    fn text_parse_reports_line_numbers() {
        let bad = "perspective edge\nkind variable\n2 0.5\nthree 0.5\n";
        match DegreeDistribution::from_text(bad, 10) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 14),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn perspective_round_trip(seed_pairs in proptest::collection::btree_map(2u32..=50, 0.05f64..1.0, 1..8)) {
            let total: f64 = seed_pairs.values().sum();
            let pairs: Vec<(u32, f64)> = seed_pairs.iter().map(|(&d, &w)| (d, w / total)).collect();
            let d = DegreeDistribution::new_renormalized(Perspective::Edge, Kind::Variable, pairs, 1e-9).unwrap();
            let back = d.to_node_perspective().unwrap().to_edge_perspective().unwrap();
            for (&deg, &w) in d.coeffs() {
                prop_assert!((back.weight(deg) - w).abs() < 1e-12);
            }
        }

        #[test]
        fn concentrated_rho_structure(seed_pairs in proptest::collection::btree_map(2u32..=50, 0.05f64..1.0, 1..8),
                                      rate in 0.05f64..0.95) {
            let total: f64 = seed_pairs.values().sum();
            let pairs: Vec<(u32, f64)> = seed_pairs.iter().map(|(&d, &w)| (d, w / total)).collect();
            let node = DegreeDistribution::new_renormalized(Perspective::Node, Kind::Variable, pairs, 1e-9).unwrap();
            let rho = concentrated_rho(&node, rate).unwrap();
            // At most two degrees, adjacent, weights summing to one.
            let degs: Vec<u32> = rho.coeffs().keys().copied().collect();
            prop_assert!(degs.len() <= 2);
            if degs.len() == 2 {
                prop_assert_eq!(degs[1], degs[0] + 1);
            }
            let sum: f64 = rho.coeffs().values().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            // The rate identity: design_rate(λ, ρ) recovers the requested rate.
            let lam_edge = node.to_edge_perspective().unwrap();
            let rho_edge = rho.to_edge_perspective().unwrap();
            let got = design_rate(&lam_edge, &rho_edge).unwrap();
            prop_assert!((got - rate).abs() < 1e-9, "rate {} vs requested {}", got, rate);
        }
    }
}
