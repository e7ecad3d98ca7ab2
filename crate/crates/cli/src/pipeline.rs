//! End-to-end experiment runs: optimize each rate pair, construct matrices
//! at every requested length, locate and measure both receivers' working
//! points, assemble secrecy reports, and tie every artifact together in a
//! deterministic manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use sha2::{Digest, Sha256};
use wiretap_ldpc::analysis::SnrPoint;
use wiretap_ldpc::construct::{build_wiretap_matrix_with_report, write_alist};
use wiretap_ldpc::densevo::DeParams;
use wiretap_ldpc::jointopt::{joint_optimize, JointDesign};
use wiretap_ldpc::secrecy::{build_asymptotic_report, build_report};
use wiretap_ldpc::simulate::{find_operating_snr, measure_cer, Role};

use crate::commands::{csv_string, secrecy_csv_rows, sim_csv_rows};
use crate::config::ExperimentConfig;

pub struct PipelineOutcome {
    pub points_ok: usize,
    pub points_failed: usize,
    pub manifest_path: PathBuf,
}

/// One grid point: everything derived from a single `(r_s, r_b)` pair.
fn run_point(
    cfg: &ExperimentConfig,
    point_dir: &Path,
    r_s: f64,
    r_b: f64,
) -> anyhow::Result<()> {
    let seed = cfg.experiment.seed;
    let params = DeParams { kernel: cfg.kernel(), ..DeParams::default() };
    let stop = cfg.stop_rule();
    let design: JointDesign = joint_optimize(
        r_s,
        r_b,
        cfg.experiment.dv_b,
        cfg.experiment.dv_f,
        seed,
        &params,
        &cfg.lp_options(),
        &cfg.search_options(),
    )?;
    fs::write(point_dir.join("design.txt"), design.to_text())?;

    for &n in &cfg.experiment.lengths {
        let n_dir = point_dir.join(format!("n{n}"));
        fs::create_dir_all(&n_dir)?;
        let spec = design.code_spec(n)?;
        let (h, report) = build_wiretap_matrix_with_report(&spec, &design, seed)?;
        write_alist(&h, &n_dir.join("code.alist"))?;
        if !report.repairs.is_empty() || report.row_target_deviation > 0 {
            let mut notes = report.repairs.join("\n");
            if !notes.is_empty() {
                notes.push('\n');
            }
            notes.push_str(&format!(
                "row_target_deviation={}\n",
                report.row_target_deviation
            ));
            fs::write(n_dir.join("construct_notes.txt"), notes)?;
        }

        let bob_point = find_operating_snr(
            &h,
            Role::Bob,
            cfg.experiment.target_cer,
            cfg.experiment.tolerance_db,
            stop,
            seed,
        )?;
        let frank_point = find_operating_snr(
            &h,
            Role::Frank,
            cfg.experiment.target_cer,
            cfg.experiment.tolerance_db,
            stop,
            seed,
        )?;
        let bob_res = measure_cer(&h, Role::Bob, bob_point, stop, seed)?;
        let frank_res = measure_cer(&h, Role::Frank, frank_point, stop, seed)?;
        fs::write(
            n_dir.join("sim.csv"),
            csv_string(&sim_csv_rows(&[(Role::Bob, &bob_res), (Role::Frank, &frank_res)]))?,
        )?;

        // Secrecy: the eavesdropper sits at the jammed receiver's measured
        // working point; the asymptotic row uses the design threshold.
        let threshold_point = SnrPoint::from_sigma2(design.sigma2_f, design.r_f)?;
        let asym = build_asymptotic_report(&spec, &threshold_point)?;
        let finite = build_report(&spec, &frank_point, frank_res.cer)?;
        fs::write(
            n_dir.join("secrecy.csv"),
            csv_string(&secrecy_csv_rows(&[(0, &asym), (n, &finite)]))?,
        )?;
    }
    Ok(())
}

fn collect_files(dir: &Path, base: &Path, out: &mut Vec<String>) -> anyhow::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(&path, base, out)?;
        } else {
            let rel = path
                .strip_prefix(base)
                .expect("walk stays under base")
                .to_string_lossy()
                .replace('\\', "/");
            out.push(rel);
        }
    }
    Ok(())
}

fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    let mut h = Sha256::new();
    h.update(&bytes);
    Ok(format!("{:x}", h.finalize()))
}

/// Run the full grid. Failures are recorded per point (`error.txt` in the
/// point's directory) and do not stop the other points. The manifest is
/// written last and covers every file in the output tree.
pub fn run_pipeline(cfg: &ExperimentConfig, out_dir: &Path) -> anyhow::Result<PipelineOutcome> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    // Persist the fully resolved config so a rerun needs nothing else.
    let canonical =
        toml::to_string(cfg).map_err(|e| anyhow::anyhow!("serializing config: {e}"))?;
    fs::write(out_dir.join("config.toml"), &canonical)?;

    let mut ok = 0usize;
    let mut failed = 0usize;
    for &[r_s, r_b] in &cfg.experiment.rates {
        let point_dir = out_dir.join(format!("rs{r_s}_rb{r_b}"));
        fs::create_dir_all(&point_dir)?;
        match run_point(cfg, &point_dir, r_s, r_b) {
            Ok(()) => ok += 1,
            Err(e) => {
                failed += 1;
                fs::write(point_dir.join("error.txt"), format!("{e:#}\n"))?;
                eprintln!("point ({r_s}, {r_b}) failed: {e:#}");
            }
        }
    }

    let mut files = Vec::new();
    collect_files(out_dir, out_dir, &mut files)?;
    files.sort();
    let mut manifest = String::new();
    manifest.push_str(&format!("config_hash {}\n", cfg.semantic_hash()));
    manifest.push_str(&format!("seed {}\n", cfg.experiment.seed));
    for rel in &files {
        let digest = sha256_file(&out_dir.join(rel))?;
        manifest.push_str(&format!("{digest}  {rel}\n"));
    }
    let manifest_path = out_dir.join("manifest.txt");
    fs::write(&manifest_path, manifest)?;
    Ok(PipelineOutcome { points_ok: ok, points_failed: failed, manifest_path })
}
