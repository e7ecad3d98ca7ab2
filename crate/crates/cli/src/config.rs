//! Declarative experiment configuration. One TOML file drives the whole
//! pipeline; every knob has a default, and [`default_config_doc`] emits a
//! fully commented reference copy (kept in sync with the code by a test).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wiretap_ldpc::analysis::DeKernel;
use wiretap_ldpc::jointopt::{LpOptions, SearchOptions};
use wiretap_ldpc::simulate::StopRule;
use wiretap_ldpc::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Rate pairs `[r_s, r_b]` forming the experiment grid.
    #[serde(default = "d_rates")]
    pub rates: Vec<[f64; 2]>,
    /// Block lengths constructed and simulated per rate pair.
    #[serde(default = "d_lengths")]
    pub lengths: Vec<usize>,
    #[serde(default = "d_dv")]
    pub dv_b: u32,
    #[serde(default = "d_dv")]
    pub dv_f: u32,
    /// Root seed; all randomness in a run flows from it.
    #[serde(default = "d_seed")]
    pub seed: u64,
    /// Density-evolution kernel: "closed-form" or "quadrature".
    #[serde(default = "d_kernel")]
    pub kernel: String,
    /// Codeword error rate defining the working points.
    #[serde(default = "d_target_cer")]
    pub target_cer: f64,
    /// Resolution of the working-point search in dB.
    #[serde(default = "d_tolerance_db")]
    pub tolerance_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default = "d_ratios")]
    pub ratios: usize,
    #[serde(default = "d_ratio_lo")]
    pub ratio_lo: f64,
    #[serde(default = "d_ratio_hi")]
    pub ratio_hi: f64,
    #[serde(default = "d_refine_rounds")]
    pub refine_rounds: usize,
    #[serde(default = "d_c_tol")]
    pub c_tol: f64,
    #[serde(default = "d_c_max")]
    pub c_max: f64,
    #[serde(default = "d_back_pass")]
    pub back_pass: bool,
    #[serde(default = "d_cm_probes")]
    pub cm_probes: usize,
    #[serde(default = "d_cm_fine")]
    pub cm_fine: bool,
    #[serde(default = "d_verify_fallbacks")]
    pub verify_fallbacks: usize,
    #[serde(default = "d_n_grid")]
    pub n_grid: usize,
    #[serde(default = "d_grid_floor")]
    pub grid_floor: f64,
    #[serde(default = "d_max_refinements")]
    pub max_refinements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    /// Stop a measurement after this many frame errors …
    #[serde(default = "d_min_errors")]
    pub min_errors: u64,
    /// … or after this many frames, whichever comes first.
    #[serde(default = "d_max_frames")]
    pub max_frames: u64,
}

fn d_rates() -> Vec<[f64; 2]> {
    vec![[0.4, 0.5]]
}
fn d_lengths() -> Vec<usize> {
    vec![1200]
}
fn d_dv() -> u32 {
    50
}
fn d_seed() -> u64 {
    1
}
fn d_kernel() -> String {
    "closed-form".into()
}
fn d_target_cer() -> f64 {
    1e-2
}
fn d_tolerance_db() -> f64 {
    0.05
}
fn d_ratios() -> usize {
    17
}
fn d_ratio_lo() -> f64 {
    0.1
}
fn d_ratio_hi() -> f64 {
    0.9
}
fn d_refine_rounds() -> usize {
    2
}
fn d_c_tol() -> f64 {
    4e-3
}
fn d_c_max() -> f64 {
    64.0
}
fn d_back_pass() -> bool {
    true
}
fn d_cm_probes() -> usize {
    10
}
fn d_cm_fine() -> bool {
    true
}
fn d_verify_fallbacks() -> usize {
    3
}
fn d_n_grid() -> usize {
    500
}
fn d_grid_floor() -> f64 {
    1e-6
}
fn d_max_refinements() -> usize {
    3
}
fn d_min_errors() -> u64 {
    100
}
fn d_max_frames() -> u64 {
    1_000_000
}

impl Default for ExperimentSection {
    fn default() -> Self {
        toml::from_str("").expect("empty section deserializes to defaults")
    }
}
impl Default for OptimizerSection {
    fn default() -> Self {
        toml::from_str("").expect("empty section deserializes to defaults")
    }
}
impl Default for SimulationSection {
    fn default() -> Self {
        toml::from_str("").expect("empty section deserializes to defaults")
    }
}

pub fn parse_kernel(name: &str) -> Result<DeKernel> {
    match name {
        "closed-form" => Ok(DeKernel::ClosedForm),
        "quadrature" => Ok(DeKernel::Quadrature),
        other => Err(Error::validation(format!(
            "unknown kernel `{other}` (expected `closed-form` or `quadrature`)"
        ))),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::validation(format!("config parse failure: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.rates.is_empty() {
            return Err(Error::validation("config lists no rate pairs"));
        }
        for &[r_s, r_b] in &e.rates {
            if !(0.0 < r_s && r_s < r_b && r_b < 1.0) {
                return Err(Error::validation(format!(
                    "rate pair ({r_s}, {r_b}) must satisfy 0 < r_s < r_b < 1"
                )));
            }
        }
        if e.lengths.is_empty() || e.lengths.iter().any(|&n| n == 0) {
            return Err(Error::validation("lengths must be a nonempty list of positive sizes"));
        }
        if !(e.target_cer > 0.0 && e.target_cer <= 1.0) {
            return Err(Error::validation(format!(
                "target_cer {} outside (0, 1]",
                e.target_cer
            )));
        }
        if !(e.tolerance_db > 0.0) {
            return Err(Error::validation("tolerance_db must be positive"));
        }
        if self.simulation.max_frames == 0 {
            return Err(Error::validation("max_frames must be positive"));
        }
        parse_kernel(&e.kernel)?;
        Ok(())
    }

    pub fn kernel(&self) -> DeKernel {
        parse_kernel(&self.experiment.kernel).expect("validated at load time")
    }

    pub fn search_options(&self) -> SearchOptions {
        let o = &self.optimizer;
        SearchOptions {
            ratios: o.ratios,
            ratio_lo: o.ratio_lo,
            ratio_hi: o.ratio_hi,
            refine_rounds: o.refine_rounds,
            c_tol: o.c_tol,
            c_max: o.c_max,
            back_pass: o.back_pass,
            cm_probes: o.cm_probes,
            cm_fine: o.cm_fine,
            verify_fallbacks: o.verify_fallbacks,
        }
    }

    pub fn lp_options(&self) -> LpOptions {
        let o = &self.optimizer;
        LpOptions {
            n_grid: o.n_grid,
            grid_floor: o.grid_floor,
            max_refinements: o.max_refinements,
        }
    }

    pub fn stop_rule(&self) -> StopRule {
        StopRule {
            min_errors: self.simulation.min_errors,
            max_frames: self.simulation.max_frames,
        }
    }

    /// Hash of the fully resolved configuration (defaults filled in), so
    /// two files spelling the same experiment hash identically.
    pub fn semantic_hash(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        format!("{:x}", h.finalize())
    }
}

/// A complete reference config: every key at its default, with comments.
pub fn default_config_doc() -> String {
    "\
# Experiment configuration reference. Every key is optional; the values
# below are the defaults.

[experiment]
# Rate pairs [r_s, r_b] forming the experiment grid.
rates = [[0.4, 0.5]]
# Block lengths constructed and simulated per rate pair.
lengths = [1200]
# Maximum variable-node degree allowed on each side.
dv_b = 50
dv_f = 50
# Root seed; all randomness in a run flows from it.
seed = 1
# Density-evolution kernel: \"closed-form\" or \"quadrature\".
kernel = \"closed-form\"
# Codeword error rate defining the working points.
target_cer = 0.01
# Resolution of the working-point search in dB.
tolerance_db = 0.05

[optimizer]
# Split-ratio samples in the first sweep of the joint search.
ratios = 17
ratio_lo = 0.1
ratio_hi = 0.9
# Ratio-refinement rounds around the incumbent.
refine_rounds = 2
# Bisection tolerance and cap for the summed noise budget.
c_tol = 0.004
c_max = 64.0
# Re-solve the jammed side once with containment caps from the other.
back_pass = true
# Candidates examined in the coarse mean-check-degree scan.
cm_probes = 10
# Refine the mean check degree on a fractional grid.
cm_fine = true
# How many ranked candidates get the expensive exact verification.
verify_fallbacks = 3
# Residual-grid size and floor for the inner linear program.
n_grid = 500
grid_floor = 0.000001
# Grid-doubling rounds when exact verification rejects an LP solution.
max_refinements = 3

[simulation]
# Stop a measurement after this many frame errors ...
min_errors = 100
# ... or after this many frames, whichever comes first.
max_frames = 1000000
"
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.experiment.seed, 1);
        assert_eq!(cfg.optimizer.n_grid, 500);
        assert_eq!(cfg.simulation.min_errors, 100);
        assert_eq!(cfg.kernel(), DeKernel::ClosedForm);
    }

    #[test]
    fn reference_doc_matches_the_defaults() {
        let from_doc = ExperimentConfig::from_toml(&default_config_doc()).unwrap();
        assert_eq!(from_doc, ExperimentConfig::default());
        assert_eq!(from_doc.semantic_hash(), ExperimentConfig::default().semantic_hash());
    }

    #[test]
    fn semantic_hash_ignores_spelling_but_not_meaning() {
        let a = ExperimentConfig::from_toml("[experiment]\nseed = 1\n").unwrap();
        let b = ExperimentConfig::from_toml("# comment\n[experiment]\n\nseed   =  1\n").unwrap();
        let c = ExperimentConfig::from_toml("[experiment]\nseed = 2\n").unwrap();
        assert_eq!(a.semantic_hash(), b.semantic_hash());
        assert_ne!(a.semantic_hash(), c.semantic_hash());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig::from_toml("[experiment]\nrates = [[0.5, 0.4]]\n").is_err());
        assert!(ExperimentConfig::from_toml("[experiment]\nlengths = []\n").is_err());
        assert!(ExperimentConfig::from_toml("[experiment]\nkernel = \"magic\"\n").is_err());
        assert!(ExperimentConfig::from_toml("[experiment]\nunknown_key = 3\n").is_err());
        assert!(ExperimentConfig::from_toml("[experiment]\ntarget_cer = 0.0\n").is_err());
    }
}
