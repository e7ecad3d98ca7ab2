//! Reference designs and benchmark working points shipped with the crate.
//!
//! The distribution file carries only the variable-node sides of each rate
//! pair (printed to four decimals). A full [`JointDesign`] is reconstructed
//! from a pair by deriving each code's concentrated check-node distribution
//! from its rate and locating both decoding thresholds by density evolution,
//! which lets every downstream stage (construction, simulation, secrecy
//! reports) run on the reference designs without re-running the optimizer.

use crate::degdist::{concentrated_rho, frank_rate, DegreeDistribution};
use crate::densevo::{threshold, DeParams};
use crate::error::{Error, Result};
use crate::jointopt::JointDesign;

/// Reference degree-distribution pairs (edge perspective, four decimals).
pub const REFERENCE_DESIGNS: &str = include_str!("../data/reference_designs.txt");

/// Benchmark E_b/N₀ working points (dB) for the same rate pairs: density
/// evolution thresholds plus measured finite-length points at both block
/// lengths.
pub const REFERENCE_WORKING_POINTS: &str = include_str!("../data/reference_working_points.csv");

/// Block lengths used for the finite-length columns of the benchmark table.
pub const N_SHORT: usize = 10_000;
pub const N_LONG: usize = 50_000;

/// One rate pair from the reference table: both variable-node distributions
/// in edge perspective.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePair {
    pub r_s: f64,
    pub r_b: f64,
    pub lambda_f: DegreeDistribution,
    pub lambda_b: DegreeDistribution,
}

impl ReferencePair {
    pub fn r_f(&self) -> f64 {
        frank_rate(self.r_s, self.r_b)
    }
}

fn parse_rate(token: &str, key: &str, lineno: usize) -> Result<f64> {
    let value = token
        .strip_prefix(key)
        .and_then(|v| v.strip_prefix('='))
        .ok_or_else(|| Error::parse(lineno, format!("expected `{key}=<rate>`, got `{token}`")))?;
    let rate: f64 = value
        .parse()
        .map_err(|_| Error::parse(lineno, format!("bad rate `{value}`")))?;
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::parse(lineno, format!("rate {rate} outside (0, 1)")));
    }
    Ok(rate)
}

/// Parse the multi-pair distribution file format: `pair r_s=… r_b=…`
/// headers, each followed by `begin lambda_f` / `begin lambda_b` blocks in
/// the plain-text distribution form.
pub fn parse_reference_pairs(text: &str) -> Result<Vec<ReferencePair>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut pairs = Vec::new();
    let mut current: Option<(f64, f64, Option<DegreeDistribution>, Option<DegreeDistribution>)> =
        None;
    let mut i = 0usize;
    let flush = |c: Option<(f64, f64, Option<DegreeDistribution>, Option<DegreeDistribution>)>,
                 out: &mut Vec<ReferencePair>,
                 lineno: usize|
     -> Result<()> {
        if let Some((r_s, r_b, lf, lb)) = c {
            let lambda_f = lf.ok_or_else(|| {
                Error::parse(lineno, format!("pair r_s={r_s} is missing its lambda_f block"))
            })?;
            let lambda_b = lb.ok_or_else(|| {
                Error::parse(lineno, format!("pair r_s={r_s} is missing its lambda_b block"))
            })?;
            out.push(ReferencePair { r_s, r_b, lambda_f, lambda_b });
        }
        Ok(())
    };
    while i < lines.len() {
        let lineno = i + 1;
        let line = lines[i].trim();
        if line.is_empty() || line.starts_with('#') {
            i += 1;
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next().unwrap() {
            "pair" => {
                flush(current.take(), &mut pairs, lineno)?;
                let a = tok
                    .next()
                    .ok_or_else(|| Error::parse(lineno, "pair header needs r_s and r_b"))?;
                let b = tok
                    .next()
                    .ok_or_else(|| Error::parse(lineno, "pair header needs r_s and r_b"))?;
                let r_s = parse_rate(a, "r_s", lineno)?;
                let r_b = parse_rate(b, "r_b", lineno)?;
                if r_s > r_b {
                    return Err(Error::parse(lineno, format!("r_s={r_s} exceeds r_b={r_b}")));
                }
                current = Some((r_s, r_b, None, None));
                i += 1;
            }
            "begin" => {
                let which = tok
                    .next()
                    .ok_or_else(|| Error::parse(lineno, "begin needs a block name"))?;
                let slot = current
                    .as_mut()
                    .ok_or_else(|| Error::parse(lineno, "block outside of a pair"))?;
                let start = i + 1;
                let end = (start..lines.len())
                    .find(|&j| lines[j].trim() == "end")
                    .ok_or_else(|| Error::parse(lineno, format!("unterminated block `{which}`")))?;
                let body = lines[start..end].join("\n");
                let dist = DegreeDistribution::from_text(&body, start)?;
                match which {
                    "lambda_f" => slot.2 = Some(dist),
                    "lambda_b" => slot.3 = Some(dist),
                    other => {
                        return Err(Error::parse(lineno, format!("unknown block `{other}`")))
                    }
                }
                i = end + 1;
            }
            other => return Err(Error::parse(lineno, format!("unexpected directive `{other}`"))),
        }
    }
    flush(current.take(), &mut pairs, lines.len())?;
    if pairs.is_empty() {
        return Err(Error::validation("no distribution pairs found"));
    }
    Ok(pairs)
}

/// The pairs shipped in [`REFERENCE_DESIGNS`].
pub fn reference_pairs() -> Result<Vec<ReferencePair>> {
    parse_reference_pairs(REFERENCE_DESIGNS)
}

/// One row of the benchmark working-point table (all values in dB).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkingPointRow {
    pub r_s: f64,
    pub r_b: f64,
    pub bob_threshold_db: f64,
    pub frank_threshold_db: f64,
    pub bob_n1_db: f64,
    pub frank_n1_db: f64,
    pub bob_n2_db: f64,
    pub frank_n2_db: f64,
}

/// Parse the working-point CSV (fixed eight-column header).
pub fn parse_working_points(text: &str) -> Result<Vec<WorkingPointRow>> {
    const HEADER: &str = "r_s,r_b,bob_threshold_db,frank_threshold_db,bob_n1_db,frank_n1_db,bob_n2_db,frank_n2_db";
    let mut rows = Vec::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        Some((_, h)) => {
            return Err(Error::parse(1, format!("unexpected header `{}`", h.trim())))
        }
        None => return Err(Error::parse(1, "empty working-point table")),
    }
    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::parse(
                lineno,
                format!("expected 8 fields, got {}", fields.len()),
            ));
        }
        let mut vals = [0.0f64; 8];
        for (k, f) in fields.iter().enumerate() {
            vals[k] = f
                .trim()
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad number `{f}`")))?;
        }
        rows.push(WorkingPointRow {
            r_s: vals[0],
            r_b: vals[1],
            bob_threshold_db: vals[2],
            frank_threshold_db: vals[3],
            bob_n1_db: vals[4],
            frank_n1_db: vals[5],
            bob_n2_db: vals[6],
            frank_n2_db: vals[7],
        });
    }
    if rows.is_empty() {
        return Err(Error::validation("no working-point rows found"));
    }
    Ok(rows)
}

/// The rows shipped in [`REFERENCE_WORKING_POINTS`].
pub fn working_points() -> Result<Vec<WorkingPointRow>> {
    parse_working_points(REFERENCE_WORKING_POINTS)
}

/// Reconstruct a full design from a reference pair: concentrated check
/// distributions at each code's rate, decoding thresholds by density
/// evolution under `params`. Search metadata (margins, seed) is zeroed —
/// these designs did not come out of this crate's optimizer.
pub fn design_from_reference(pair: &ReferencePair, params: &DeParams) -> Result<JointDesign> {
    let r_f = pair.r_f();
    let rho_b = concentrated_rho(&pair.lambda_b.to_node_perspective()?, pair.r_b)?
        .to_edge_perspective()?;
    let rho_f =
        concentrated_rho(&pair.lambda_f.to_node_perspective()?, r_f)?.to_edge_perspective()?;
    let sigma2_b = threshold(&pair.lambda_b, &rho_b, pair.r_b, params)?;
    let sigma2_f = threshold(&pair.lambda_f, &rho_f, r_f, params)?;
    Ok(JointDesign {
        r_s: pair.r_s,
        r_b: pair.r_b,
        r_f,
        lambda_b: pair.lambda_b.clone(),
        lambda_f: pair.lambda_f.clone(),
        rho_b,
        rho_f,
        sigma2_b,
        sigma2_f,
        c_star: sigma2_f / sigma2_b,
        margin_b: 0.0,
        margin_f: 0.0,
        nu: 1.0 - pair.r_s,
        seed: 0,
    })
}
