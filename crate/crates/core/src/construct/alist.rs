//! Sparse-matrix interchange in the standard alist format, plus a sidecar
//! `.meta` file carrying the column-partition sizes and the construction
//! seed (alist itself has no room for them).

use super::SparseParityCheck;
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Serialize `h` to `path` in alist format and write the partition
/// metadata (k_s, k_r, r, seed) to `path + ".meta"`.
pub fn write_alist(h: &SparseParityCheck, path: &Path) -> Result<()> {
    let n = h.n();
    let m = h.rows();
    let row_adj = h.full_view().row_adjacency();
    let dv_max = (0..n).map(|v| h.col(v).len()).max().unwrap_or(0);
    let dc_max = row_adj.iter().map(Vec::len).max().unwrap_or(0);

    let mut out = String::new();
    let _ = writeln!(out, "{n} {m}");
    let _ = writeln!(out, "{dv_max} {dc_max}");
    let col_degs: Vec<String> = (0..n).map(|v| h.col(v).len().to_string()).collect();
    let _ = writeln!(out, "{}", col_degs.join(" "));
    let row_degs: Vec<String> = row_adj.iter().map(|r| r.len().to_string()).collect();
    let _ = writeln!(out, "{}", row_degs.join(" "));
    for v in 0..n {
        let mut entries: Vec<String> = h.col(v).iter().map(|&r| (r + 1).to_string()).collect();
        entries.resize(dv_max, "0".to_string());
        let _ = writeln!(out, "{}", entries.join(" "));
    }
    for adj in &row_adj {
        let mut entries: Vec<String> = adj.iter().map(|&v| (v + 1).to_string()).collect();
        entries.resize(dc_max, "0".to_string());
        let _ = writeln!(out, "{}", entries.join(" "));
    }
    std::fs::write(path, out)?;

    let meta = format!(
        "k_s={}\nk_r={}\nr={}\nseed={}\n",
        h.k_s(),
        h.k_r(),
        h.r_block(),
        h.seed()
    );
    std::fs::write(meta_path(path), meta)?;
    Ok(())
}

fn meta_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".meta");
    std::path::PathBuf::from(os)
}

/// Read an alist file (and its `.meta` sidecar when present) back into a
/// [`SparseParityCheck`]. Without a sidecar the matrix is treated as an
/// ordinary code: no secret block.
pub fn read_alist(path: &Path) -> Result<SparseParityCheck> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let mut next_tokens = |expect: &str| -> Result<(usize, Vec<i64>)> {
        for (idx, line) in lines.by_ref() {
            if line.trim().is_empty() {
                continue;
            }
            let mut vals = Vec::new();
            for tok in line.split_whitespace() {
                let v: i64 = tok.parse().map_err(|_| {
                    Error::parse(idx + 1, format!("bad integer `{tok}` while reading {expect}"))
                })?;
                vals.push(v);
            }
            return Ok((idx + 1, vals));
        }
        Err(Error::parse(0, format!("unexpected end of file while reading {expect}")))
    };

    let (ln, dims) = next_tokens("dimensions")?;
    if dims.len() != 2 || dims.iter().any(|&v| v <= 0) {
        return Err(Error::parse(ln, "expected `cols rows` with positive values"));
    }
    let (n, m) = (dims[0] as usize, dims[1] as usize);
    let (_, _max_degs) = next_tokens("maximum degrees")?;
    let (ln, col_degs) = next_tokens("column degrees")?;
    if col_degs.len() != n {
        return Err(Error::parse(ln, format!("expected {n} column degrees")));
    }
    let (ln, row_degs) = next_tokens("row degrees")?;
    if row_degs.len() != m {
        return Err(Error::parse(ln, format!("expected {m} row degrees")));
    }
    let mut cols: Vec<Vec<u32>> = Vec::with_capacity(n);
    for v in 0..n {
        let (ln, entries) = next_tokens("column entries")?;
        let mut col: Vec<u32> = Vec::new();
        for &e in &entries {
            if e == 0 {
                continue; // padding
            }
            if e < 1 || e > m as i64 {
                return Err(Error::parse(ln, format!("row index {e} out of range 1..={m}")));
            }
            col.push((e - 1) as u32);
        }
        if col.len() != col_degs[v] as usize {
            return Err(Error::parse(
                ln,
                format!("column {v} lists {} entries, declared {}", col.len(), col_degs[v]),
            ));
        }
        col.sort_unstable();
        cols.push(col);
    }
    // Row entry lines are redundant with the column lists; consume and
    // cross-check the degrees when present.
    for r in 0..m {
        match next_tokens("row entries") {
            Ok((ln, entries)) => {
                let nonzero = entries.iter().filter(|&&e| e != 0).count();
                if nonzero != row_degs[r] as usize {
                    return Err(Error::parse(
                        ln,
                        format!("row {r} lists {nonzero} entries, declared {}", row_degs[r]),
                    ));
                }
            }
            Err(_) => break, // some writers omit the row block
        }
    }

    let (mut k_s, mut k_r, mut seed) = (0usize, n.saturating_sub(m), 0u64);
    let mp = meta_path(path);
    if mp.exists() {
        let meta = std::fs::read_to_string(&mp)?;
        for (idx, line) in meta.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, format!("bad metadata line `{line}`")))?;
            let parse_usize = |v: &str| -> Result<usize> {
                v.trim()
                    .parse()
                    .map_err(|_| Error::parse(idx + 1, format!("bad metadata value `{v}`")))
            };
            match k.trim() {
                "k_s" => k_s = parse_usize(v)?,
                "k_r" => k_r = parse_usize(v)?,
                "r" => {
                    let r = parse_usize(v)?;
                    if r != m {
                        return Err(Error::validation(format!(
                            "metadata says r = {r} but the matrix has {m} rows"
                        )));
                    }
                }
                "seed" => {
                    seed = v.trim().parse().map_err(|_| {
                        Error::parse(idx + 1, format!("bad metadata value `{v}`"))
                    })?
                }
                other => {
                    return Err(Error::validation(format!("unknown metadata key `{other}`")))
                }
            }
        }
    }
    SparseParityCheck::new(m, k_s, k_r, cols, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::peg_construct;

    #[test]
    fn round_trip_preserves_matrix_and_partition() {
        let h = peg_construct(&[3; 30], 15, 77).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("code.alist");
        write_alist(&h, &path).unwrap();
        let back = read_alist(&path).unwrap();
        assert_eq!(back.rows(), h.rows());
        assert_eq!(back.k_s(), h.k_s());
        assert_eq!(back.k_r(), h.k_r());
        assert_eq!(back.seed(), h.seed());
        for v in 0..h.n() {
            assert_eq!(back.col(v), h.col(v));
        }
    }

    #[test]
    fn missing_sidecar_defaults_to_no_secret_block() {
        let h = peg_construct(&[3; 20], 10, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("code.alist");
        write_alist(&h, &path).unwrap();
        std::fs::remove_file(path.with_extension("alist.meta")).unwrap();
        let back = read_alist(&path).unwrap();
        assert_eq!(back.k_s(), 0);
        assert_eq!(back.n(), 20);
        for v in 0..back.n() {
            assert_eq!(back.col(v), h.col(v));
        }
    }

    #[test]
    fn rejects_out_of_range_row_index() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.alist");
        std::fs::write(&path, "2 2\n2 2\n2 2\n2 2\n1 3\n1 2\n1 2\n1 2\n").unwrap();
        assert!(read_alist(&path).is_err());
    }

    #[test]
    fn rejects_degree_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.alist");
        // Column 0 declares degree 2 but lists one entry.
        std::fs::write(&path, "2 2\n2 2\n2 2\n2 2\n1 0\n1 2\n1 2\n1 2\n").unwrap();
        assert!(read_alist(&path).is_err());
    }
}
