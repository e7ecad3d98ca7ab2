//! Implementations of the individual subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use wiretap_ldpc::analysis::{biawgn_capacity, DeKernel, SnrPoint};
use wiretap_ldpc::construct::{build_wiretap_matrix_with_report, read_alist, write_alist, SparseParityCheck};
use wiretap_ldpc::densevo::{sigma2_to_ebn0_db, threshold, DeParams};
use wiretap_ldpc::jointopt::{joint_optimize, verify_containment, JointDesign};
use wiretap_ldpc::reference::{design_from_reference, parse_reference_pairs, reference_pairs};
use wiretap_ldpc::secrecy::{build_asymptotic_report, build_report, SecrecyReport};
use wiretap_ldpc::simulate::{find_operating_snr, measure_cer, Role, SimResult, StopRule};

use crate::config::ExperimentConfig;

/// Write `content` to `out`, or to stdout when no path was given.
pub fn emit(out: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

pub fn load_design(path: &Path) -> anyhow::Result<JointDesign> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(JointDesign::from_text(&text)?)
}

fn de_params(kernel: DeKernel) -> DeParams {
    DeParams { kernel, ..DeParams::default() }
}

pub fn csv_string(records: &[Vec<String>]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for rec in records {
        w.write_record(rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn run_capacity(
    gamma_lo: f64,
    gamma_hi: f64,
    points: usize,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    if !(gamma_lo > 0.0 && gamma_hi > gamma_lo) {
        bail!(wiretap_ldpc::Error::validation(format!(
            "need 0 < gamma_lo < gamma_hi, got {gamma_lo} and {gamma_hi}"
        )));
    }
    if points < 2 {
        bail!(wiretap_ldpc::Error::validation("need at least 2 sweep points"));
    }
    let mut rows = vec![vec!["gamma".to_string(), "capacity".to_string()]];
    let step = (gamma_hi / gamma_lo).ln() / (points - 1) as f64;
    for k in 0..points {
        let gamma = gamma_lo * (step * k as f64).exp();
        let c = biawgn_capacity(gamma)?;
        rows.push(vec![format!("{gamma}"), format!("{c}")]);
    }
    emit(out, &csv_string(&rows)?)
}

/// Threshold rows for one design: `(side, sigma2, ebn0_db)` per receiver.
fn design_threshold_rows(
    design: &JointDesign,
    params: &DeParams,
) -> anyhow::Result<[(f64, f64); 2]> {
    let s2_b = threshold(&design.lambda_b, &design.rho_b, design.r_b, params)?;
    let s2_f = threshold(&design.lambda_f, &design.rho_f, design.r_f, params)?;
    Ok([
        (s2_b, sigma2_to_ebn0_db(s2_b, design.r_b)?),
        (s2_f, sigma2_to_ebn0_db(s2_f, design.r_f)?),
    ])
}

pub fn run_threshold(
    design_path: Option<&Path>,
    kernel: DeKernel,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let params = de_params(kernel);
    let designs: Vec<JointDesign> = match design_path {
        Some(path) => vec![load_design(path)?],
        None => {
            // No design given: sweep the built-in reference pairs.
            reference_pairs()?
                .iter()
                .map(|p| design_from_reference(p, &params))
                .collect::<Result<_, _>>()?
        }
    };
    let mut rows = vec![
        ["r_s", "r_b", "side", "sigma2", "ebn0_db"].map(String::from).to_vec(),
    ];
    for d in &designs {
        let [(s2b, dbb), (s2f, dbf)] = design_threshold_rows(d, &params)?;
        rows.push(vec![
            format!("{}", d.r_s),
            format!("{}", d.r_b),
            "bob".into(),
            format!("{s2b}"),
            format!("{dbb}"),
        ]);
        rows.push(vec![
            format!("{}", d.r_s),
            format!("{}", d.r_b),
            "frank".into(),
            format!("{s2f}"),
            format!("{dbf}"),
        ]);
    }
    emit(out, &csv_string(&rows)?)
}

pub fn run_optimize(
    r_s: f64,
    r_b: f64,
    dv_b: u32,
    dv_f: u32,
    seed: u64,
    cfg: &ExperimentConfig,
    kernel: DeKernel,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let design = joint_optimize(
        r_s,
        r_b,
        dv_b,
        dv_f,
        seed,
        &de_params(kernel),
        &cfg.lp_options(),
        &cfg.search_options(),
    )?;
    emit(out, &design.to_text())
}

pub fn run_construct(
    design_path: &Path,
    n: usize,
    seed: u64,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let design = load_design(design_path)?;
    let spec = design.code_spec(n)?;
    let (h, report) = build_wiretap_matrix_with_report(&spec, &design, seed)?;
    let out = out.ok_or_else(|| {
        wiretap_ldpc::Error::validation("construct needs --out <file.alist> for the matrix")
    })?;
    write_alist(&h, out)?;
    println!(
        "n={} k_s={} k_r={} rows={} edges={} girth={}",
        h.n(),
        h.k_s(),
        h.k_r(),
        h.rows(),
        h.edge_count(),
        match h.girth_report() {
            Some(g) => format!("{g:?}"),
            None => "unchecked".into(),
        }
    );
    for line in &report.repairs {
        println!("repair: {line}");
    }
    println!("row_target_deviation={}", report.row_target_deviation);
    Ok(())
}

pub fn sim_csv_rows(entries: &[(Role, &SimResult)]) -> Vec<Vec<String>> {
    let mut rows = vec![[
        "role",
        "ebn0_db",
        "sigma2",
        "frames",
        "frame_errors",
        "message_errors",
        "cer",
        "ci_lo",
        "ci_hi",
        "ber",
        "avg_iters",
    ]
    .map(String::from)
    .to_vec()];
    for (role, r) in entries {
        rows.push(vec![
            role.as_str().into(),
            format!("{}", r.snr.ebn0_db),
            format!("{}", r.snr.sigma2),
            format!("{}", r.frames),
            format!("{}", r.frame_errors),
            format!("{}", r.message_errors),
            format!("{}", r.cer),
            format!("{}", r.ci_lo),
            format!("{}", r.ci_hi),
            format!("{}", r.ber),
            format!("{}", r.avg_iterations),
        ]);
    }
    rows
}

pub fn role_rate(h: &SparseParityCheck, role: Role) -> f64 {
    match role {
        Role::Bob => (h.k_s() + h.k_r()) as f64 / h.n() as f64,
        Role::Frank => h.k_r() as f64 / (h.n() - h.k_s()) as f64,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_simulate(
    alist: &Path,
    role: Role,
    ebn0_db: &[f64],
    target_cer: Option<f64>,
    tolerance_db: f64,
    stop: StopRule,
    seed: u64,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let h = read_alist(alist)?;
    let rate = role_rate(&h, role);
    let mut results = Vec::new();
    if let Some(target) = target_cer {
        let point = find_operating_snr(&h, role, target, tolerance_db, stop, seed)?;
        results.push(measure_cer(&h, role, point, stop, seed)?);
    } else {
        if ebn0_db.is_empty() {
            bail!(wiretap_ldpc::Error::validation(
                "simulate needs --ebn0-db points or --target-cer"
            ));
        }
        for &db in ebn0_db {
            let point = SnrPoint::from_ebn0(db, rate)?;
            results.push(measure_cer(&h, role, point, stop, seed)?);
        }
    }
    let entries: Vec<(Role, &SimResult)> = results.iter().map(|r| (role, r)).collect();
    emit(out, &csv_string(&sim_csv_rows(&entries))?)
}

pub fn secrecy_csv_rows(reports: &[(usize, &SecrecyReport)]) -> Vec<Vec<String>> {
    let mut rows = vec![[
        "r_s",
        "r_b",
        "n",
        "regime",
        "ebn0_db",
        "gamma",
        "eta",
        "c_e",
        "r_e_star",
        "r_e_star_clamped",
        "c_s",
        "frac_r_e_star",
        "frac_c_s",
    ]
    .map(String::from)
    .to_vec()];
    for (n, rep) in reports {
        rows.push(vec![
            format!("{}", rep.spec.r_s()),
            format!("{}", rep.spec.r_b()),
            format!("{n}"),
            rep.regime.as_str().into(),
            format!("{}", rep.eve_snr.ebn0_db),
            format!("{}", rep.eve_snr.gamma),
            format!("{}", rep.eta),
            format!("{}", rep.c_e),
            format!("{}", rep.r_e_star),
            format!("{}", rep.r_e_star_clamped),
            format!("{}", rep.c_s),
            format!("{}", rep.frac_r_e_star),
            format!("{}", rep.frac_c_s),
        ]);
    }
    rows
}

pub fn run_secrecy(
    design_path: &Path,
    n: usize,
    frank_ebn0_db: f64,
    eta: f64,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let design = load_design(design_path)?;
    let spec = design.code_spec(n)?;
    let wp = SnrPoint::from_ebn0(frank_ebn0_db, design.r_f)?;
    let threshold_point = SnrPoint::from_sigma2(design.sigma2_f, design.r_f)?;
    let asym = build_asymptotic_report(&spec, &threshold_point)?;
    let finite = build_report(&spec, &wp, eta)?;
    for rep in [&asym, &finite] {
        if let Some(w) = rep.consistency_warning() {
            eprintln!("warning: {w}");
        }
    }
    // The asymptotic row carries n = 0: no finite length is involved.
    emit(out, &csv_string(&secrecy_csv_rows(&[(0, &asym), (n, &finite)]))?)
}

pub fn run_ingest(
    file: Option<&Path>,
    kernel: DeKernel,
    out_dir: Option<&Path>,
) -> anyhow::Result<()> {
    let pairs = match file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            parse_reference_pairs(&text)?
        }
        None => reference_pairs()?,
    };
    let params = de_params(kernel);
    for p in &pairs {
        let containment = verify_containment(&p.lambda_b, &p.lambda_f, 1.0 - p.r_s)?;
        let status = if containment.ok {
            "containment ok".to_string()
        } else {
            let worst = containment
                .slacks
                .iter()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(d, s)| format!("degree {d} short by {:.4}", -s))
                .unwrap_or_default();
            format!("containment VIOLATED ({worst})")
        };
        println!(
            "pair r_s={} r_b={} (r_f={:.5}): lambda_f has {} degrees, lambda_b has {} degrees; {status}",
            p.r_s,
            p.r_b,
            p.r_f(),
            p.lambda_f.coeffs().len(),
            p.lambda_b.coeffs().len(),
        );
        if let Some(dir) = out_dir {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let design = design_from_reference(p, &params)?;
            let path: PathBuf = dir.join(format!("design_rs{}_rb{}.txt", p.r_s, p.r_b));
            fs::write(&path, design.to_text())
                .with_context(|| format!("writing {}", path.display()))?;
            println!("  wrote {}", path.display());
        }
    }
    Ok(())
}
