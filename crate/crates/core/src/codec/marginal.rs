//! Single-kernel symbol marginals.
//!
//! For input `a` of one kernel, with inputs `s_0..s_{a-1}` already decided,
//!
//! ```text
//! p(s_a = eta)  ∝  sum_{s_{a+1..q-1}} prod_j P_j((s G)_j)
//! ```
//!
//! The codeword splits into the decided prefix contribution and
//! `eta g_a + sum v_j g_j`; the latter is tabulated per `a` when `q^q` is small.

use crate::channel::{normalize, SymbolPosterior};
use crate::error::{Error, Result};
use crate::galois::Symbol;
use crate::kernel::{odometer_step, RsKernel};

/// Largest `q^q` for which coset tables are precomputed.
const TABLE_LIMIT: usize = 1 << 16;

/// Per-input tables of `eta g_a + sum_{j>a} v_j g_j`.
#[derive(Clone, Debug)]
pub struct MarginalTables {
    q: usize,
    /// `tables[a][(eta * tails + tail) * q + col]`, or empty when untabulated.
    tables: Vec<Vec<u8>>,
    /// Kernel rows, kept for the untabulated path.
    rows: Vec<u8>,
    mul: Vec<u8>,
}

impl MarginalTables {
    pub fn new(kernel: &RsKernel) -> Self {
        let q = kernel.q();
        let rows: Vec<u8> = kernel.matrix().iter().map(|s| s.0).collect();
        let mul = kernel.field().mul_table().to_vec();
        let tabulate = (q as u64).checked_pow(q as u32).is_some_and(|n| n as usize <= TABLE_LIMIT);
        let mut tables = Vec::with_capacity(q);
        for a in 0..q {
            if !tabulate {
                tables.push(Vec::new());
                continue;
            }
            let tails = q.pow((q - 1 - a) as u32);
            let mut tab = vec![0u8; q * tails * q];
            let mut digits = vec![0usize; q - 1 - a];
            for eta in 0..q {
                digits.iter_mut().for_each(|d| *d = 0);
                for tail in 0..tails {
                    let out = &mut tab[(eta * tails + tail) * q..(eta * tails + tail + 1) * q];
                    for (col, o) in out.iter_mut().enumerate() {
                        let mut acc = mul[eta * q + rows[a * q + col] as usize];
                        for (off, &d) in digits.iter().enumerate() {
                            acc ^= mul[d * q + rows[(a + 1 + off) * q + col] as usize];
                        }
                        *o = acc;
                    }
                    odometer_step(&mut digits, q);
                }
            }
            tables.push(tab);
        }
        MarginalTables { q, tables, rows, mul }
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    fn row_entry(&self, r: usize, c: usize) -> u8 {
        self.rows[r * self.q + c]
    }

    #[inline]
    fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }

    /// Contribution of the decided inputs to column `col`.
    #[inline]
    pub(crate) fn prefix_symbol(&self, decided: impl Iterator<Item = u8>, col: usize) -> u8 {
        let mut acc = 0u8;
        for (b, s) in decided.enumerate() {
            acc ^= self.mul(s, self.row_entry(b, col));
        }
        acc
    }

    /// Unnormalized marginal of input `a`. `probs` holds `q` posteriors
    /// (column-major: `probs[col * q + sym]`), `prefix` the decided prefix
    /// codeword contribution. Returns the total mass.
    #[inline]
    pub(crate) fn marginal_raw(&self, probs: &[f64], prefix: &[u8], a: usize, out: &mut [f64]) -> f64 {
        let q = self.q;
        let table = &self.tables[a];
        if table.is_empty() {
            return self.marginal_enumerate(probs, prefix, a, out);
        }
        let tails = table.len() / (q * q);
        let mut total = 0.0;
        for (eta, slot) in out.iter_mut().enumerate().take(q) {
            let block = &table[eta * tails * q..(eta + 1) * tails * q];
            let mut acc = 0.0;
            if q == 4 {
                let (p0, p1, p2, p3) = (&probs[0..4], &probs[4..8], &probs[8..12], &probs[12..16]);
                let (c0, c1, c2, c3) = (prefix[0], prefix[1], prefix[2], prefix[3]);
                for v in block.chunks_exact(4) {
                    acc += p0[(c0 ^ v[0]) as usize]
                        * p1[(c1 ^ v[1]) as usize]
                        * p2[(c2 ^ v[2]) as usize]
                        * p3[(c3 ^ v[3]) as usize];
                }
            } else {
                for v in block.chunks_exact(q) {
                    let mut prod = 1.0;
                    for col in 0..q {
                        prod *= probs[col * q + (prefix[col] ^ v[col]) as usize];
                    }
                    acc += prod;
                }
            }
            *slot = acc;
            total += acc;
        }
        total
    }

    fn marginal_enumerate(&self, probs: &[f64], prefix: &[u8], a: usize, out: &mut [f64]) -> f64 {
        let q = self.q;
        let mut digits = vec![0usize; q - 1 - a];
        let mut cw = vec![0u8; q];
        let mut total = 0.0;
        for (eta, slot) in out.iter_mut().enumerate().take(q) {
            digits.iter_mut().for_each(|d| *d = 0);
            let mut acc = 0.0;
            loop {
                for (col, c) in cw.iter_mut().enumerate() {
                    let mut x = prefix[col] ^ self.mul(eta as u8, self.row_entry(a, col));
                    for (off, &d) in digits.iter().enumerate() {
                        x ^= self.mul(d as u8, self.row_entry(a + 1 + off, col));
                    }
                    *c = x;
                }
                acc += cw.iter().enumerate().map(|(col, &c)| probs[col * q + c as usize]).product::<f64>();
                if !odometer_step(&mut digits, q) {
                    break;
                }
            }
            *slot = acc;
            total += acc;
        }
        total
    }
}

/// Posterior of input `i` of one kernel given the `q` output posteriors and
/// the decided inputs `s_0..s_{i-1}`.
pub fn kernel_marginal(
    posteriors: &[SymbolPosterior],
    decided: &[Symbol],
    i: usize,
    kernel: &RsKernel,
) -> Result<SymbolPosterior> {
    let q = kernel.q();
    if i >= q {
        return Err(Error::OutOfRange { index: i, limit: q });
    }
    if posteriors.len() != q {
        return Err(Error::Length { expected: q, actual: posteriors.len() });
    }
    if decided.len() != i {
        return Err(Error::Length { expected: i, actual: decided.len() });
    }
    let tables = MarginalTables::new(kernel);
    let mut probs = Vec::with_capacity(q * q);
    for p in posteriors {
        if p.q() != q {
            return Err(Error::Length { expected: q, actual: p.q() });
        }
        probs.extend_from_slice(p.probs());
    }
    let prefix: Vec<u8> =
        (0..q).map(|col| tables.prefix_symbol(decided.iter().map(|s| s.0), col)).collect();
    let mut out = vec![0.0; q];
    tables.marginal_raw(&probs, &prefix, i, &mut out);
    normalize(&mut out)?;
    SymbolPosterior::from_weights(out)
}
