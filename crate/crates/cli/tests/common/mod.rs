#![allow(dead_code)]

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_wiretap");

/// Search schedule small enough that a full pipeline run takes seconds.
pub const QUICK_CONFIG: &str = r#"
[experiment]
rates = [[0.4, 0.5]]
lengths = [900]
dv_b = 12
dv_f = 12
seed = 7
kernel = "closed-form"
target_cer = 1e-2
tolerance_db = 0.5

[optimizer]
ratios = 3
ratio_lo = 0.15
ratio_hi = 0.35
refine_rounds = 0
c_tol = 0.05
back_pass = false
cm_probes = 5
cm_fine = false
verify_fallbacks = 2
n_grid = 150
max_refinements = 2

[simulation]
min_errors = 15
max_frames = 250
"#;

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

pub fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: status {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header: Vec<String> =
        lines.next().expect("csv header").split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

pub fn tree_files(root: &Path) -> Vec<String> {
    fn walk(dir: &Path, base: &Path, out: &mut Vec<String>) {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(&p, base, out);
            } else {
                out.push(p.strip_prefix(base).unwrap().to_string_lossy().into_owned());
            }
        }
    }
    let mut v = Vec::new();
    walk(root, root, &mut v);
    v.sort();
    v
}
