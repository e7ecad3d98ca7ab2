//! Systematic encoder for the partitioned code: given the secret block M
//! and the random block R, solve `C · Pᵀ = [A|B] · [M|R]ᵀ` for the parity
//! block P. The parity submatrix C is inverted once over GF(2) by dense
//! bitset elimination; encoding is then a sparse accumulate plus one dense
//! matrix–vector product per frame, and the `[M | R | P]` layout is
//! preserved exactly.

use super::SparseParityCheck;
use crate::error::{Error, Result};

pub struct WiretapEncoder {
    k_s: usize,
    k_r: usize,
    r: usize,
    n: usize,
    /// Sparse columns of the information part `[A | B]`.
    info_cols: Vec<Vec<u32>>,
    /// Dense C⁻¹, row-major bitsets over the r parity positions.
    c_inv: Vec<Vec<u64>>,
    words: usize,
}

impl WiretapEncoder {
    pub fn new(h: &SparseParityCheck) -> Result<Self> {
        let n = h.n();
        let r = h.rows();
        let p_off = n - r;
        let words = r.div_ceil(64);
        // Dense parity block: row i holds bit j when H[i][p_off + j] = 1.
        let mut c_rows = vec![vec![0u64; words]; r];
        for j in 0..r {
            for &row in h.col(p_off + j) {
                c_rows[row as usize][j / 64] |= 1u64 << (j % 64);
            }
        }
        let mut c_inv: Vec<Vec<u64>> = (0..r)
            .map(|i| {
                let mut row = vec![0u64; words];
                row[i / 64] |= 1u64 << (i % 64);
                row
            })
            .collect();
        // Gauss–Jordan to the identity; the same row operations applied to
        // the identity yield C⁻¹.
        for j in 0..r {
            let (w, b) = (j / 64, j % 64);
            let Some(src) = (j..r).find(|&i| c_rows[i][w] >> b & 1 == 1) else {
                return Err(Error::construction(
                    "parity block is singular; rebuild the matrix with a different seed",
                ));
            };
            c_rows.swap(j, src);
            c_inv.swap(j, src);
            let pivot_row = c_rows[j].clone();
            let pivot_inv = c_inv[j].clone();
            for i in 0..r {
                if i != j && c_rows[i][w] >> b & 1 == 1 {
                    for (a, p) in c_rows[i].iter_mut().zip(&pivot_row) {
                        *a ^= p;
                    }
                    for (a, p) in c_inv[i].iter_mut().zip(&pivot_inv) {
                        *a ^= p;
                    }
                }
            }
        }
        let info_cols: Vec<Vec<u32>> = (0..p_off).map(|v| h.col(v).to_vec()).collect();
        Ok(WiretapEncoder { k_s: h.k_s(), k_r: h.k_r(), r, n, info_cols, c_inv, words })
    }

    pub fn k_s(&self) -> usize {
        self.k_s
    }

    pub fn k_r(&self) -> usize {
        self.k_r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Encode into `codeword` (length n, bits as 0/1 bytes).
    pub fn encode_into(&self, secret: &[u8], random: &[u8], codeword: &mut [u8]) -> Result<()> {
        if secret.len() != self.k_s || random.len() != self.k_r {
            return Err(Error::validation(format!(
                "message block lengths ({}, {}) do not match the partition ({}, {})",
                secret.len(),
                random.len(),
                self.k_s,
                self.k_r
            )));
        }
        if codeword.len() != self.n {
            return Err(Error::validation("codeword buffer length mismatch"));
        }
        codeword[..self.k_s].copy_from_slice(secret);
        codeword[self.k_s..self.k_s + self.k_r].copy_from_slice(random);
        // Syndrome of the information part.
        let mut syn = vec![0u64; self.words];
        for (v, col) in self.info_cols.iter().enumerate() {
            if codeword[v] & 1 == 1 {
                for &row in col {
                    syn[row as usize / 64] ^= 1u64 << (row as usize % 64);
                }
            }
        }
        // P = C⁻¹ · syn.
        let p_off = self.k_s + self.k_r;
        for j in 0..self.r {
            let mut acc = 0u64;
            for (a, s) in self.c_inv[j].iter().zip(&syn) {
                acc ^= a & s;
            }
            codeword[p_off + j] = (acc.count_ones() & 1) as u8;
        }
        Ok(())
    }

    pub fn encode(&self, secret: &[u8], random: &[u8]) -> Result<Vec<u8>> {
        let mut cw = vec![0u8; self.n];
        self.encode_into(secret, random, &mut cw)?;
        Ok(cw)
    }
}

/// Parity check `H · cᵀ` over GF(2), returned as one bit per row.
pub fn syndrome_of(h: &SparseParityCheck, codeword: &[u8]) -> Vec<u8> {
    let mut syn = vec![0u8; h.rows()];
    for v in 0..h.n() {
        if codeword[v] & 1 == 1 {
            for &row in h.col(v) {
                syn[row as usize] ^= 1;
            }
        }
    }
    syn
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_wiretap_matrix, testutil};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn wiretap_instance(n: usize, seed: u64) -> (SparseParityCheck, WiretapEncoder) {
        let design = &testutil::QUICK_DESIGN;
        let spec = design.code_spec(n).unwrap();
        let h = build_wiretap_matrix(&spec, design, seed).unwrap();
        let enc = WiretapEncoder::new(&h).expect("wiretap build guarantees an invertible parity block");
        (h, enc)
    }

    #[test]
    fn encoded_word_satisfies_all_checks() {
        let (h, enc) = wiretap_instance(400, 21);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let m: Vec<u8> = (0..h.k_s()).map(|_| rng.gen_range(0..2u8)).collect();
            let r: Vec<u8> = (0..h.k_r()).map(|_| rng.gen_range(0..2u8)).collect();
            let cw = enc.encode(&m, &r).unwrap();
            assert_eq!(&cw[..h.k_s()], &m[..]);
            assert_eq!(&cw[h.k_s()..h.k_s() + h.k_r()], &r[..]);
            assert!(syndrome_of(&h, &cw).iter().all(|&b| b == 0));
        }
    }

    #[test]
    fn coset_identity_links_secret_block_to_frank_syndrome() {
        // H'·[R|P]ᵀ must equal A·Mᵀ: Frank's decoder uses exactly this
        // syndrome relation.
        let (h, enc) = wiretap_instance(600, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let m: Vec<u8> = (0..h.k_s()).map(|_| rng.gen_range(0..2u8)).collect();
            let r: Vec<u8> = (0..h.k_r()).map(|_| rng.gen_range(0..2u8)).collect();
            let cw = enc.encode(&m, &r).unwrap();
            // A·Mᵀ
            let mut s_a = vec![0u8; h.rows()];
            for v in 0..h.k_s() {
                if cw[v] == 1 {
                    for &row in h.col(v) {
                        s_a[row as usize] ^= 1;
                    }
                }
            }
            // H'·[R|P]ᵀ over the view.
            let view = h.frank_view();
            let mut s_f = vec![0u8; h.rows()];
            for v in 0..view.n() {
                if cw[h.k_s() + v] == 1 {
                    for &row in view.col(v) {
                        s_f[row as usize] ^= 1;
                    }
                }
            }
            assert_eq!(s_a, s_f);
        }
    }

    #[test]
    fn singular_parity_block_is_rejected() {
        // Two identical parity columns make C singular.
        let cols = vec![
            vec![0, 1],
            vec![1, 2],
            vec![0, 2],
            vec![0, 1, 2],
            vec![0, 1],
            vec![0, 1],
        ];
        let h = SparseParityCheck::new(3, 2, 1, cols, 0).unwrap();
        assert!(WiretapEncoder::new(&h).is_err());
    }

    #[test]
    fn zero_messages_encode_to_zero() {
        let (h, enc) = wiretap_instance(400, 4);
        let cw = enc.encode(&vec![0; h.k_s()], &vec![0; h.k_r()]).unwrap();
        assert!(cw.iter().all(|&b| b == 0));
    }
}
