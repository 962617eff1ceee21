//! Reed-Solomon kernels and the Kronecker-power transform.
//!
//! Row `r` of the `q x q` kernel evaluates the monomial `x^{(q-1-r) mod (q-1)}`
//! at the points `x_j = alpha^{q-2-j}`, `j in [0, q-2]`; the last column is
//! zero except for `gamma` in the bottom-right corner. With q = 4 and
//! `gamma = alpha` this gives
//!
//! ```text
//! 1   1   1  0
//! a   a^2 1  0
//! a^2 a   1  0
//! 1   1   1  a
//! ```

use crate::error::{Error, Result};
use crate::galois::{FieldSpec, Symbol};

/// Largest kernel whose partial distances are enumerated exhaustively.
pub const EXHAUSTIVE_PARTIAL_DISTANCE_MAX_Q: usize = 8;

#[derive(Clone, Debug)]
pub struct RsKernel {
    field: FieldSpec,
    matrix: Vec<Symbol>,
    gamma: Symbol,
    partial_distances: Vec<usize>,
    /// Minimum-weight representative of `g_i + span(g_{i+1}, .., g_{q-1})`.
    min_weight_rows: Option<Vec<Vec<Symbol>>>,
}

impl RsKernel {
    /// Kernel with `gamma = alpha`.
    pub fn new(field: &FieldSpec) -> Result<Self> {
        Self::build(field, field.alpha())
    }

    pub fn build(field: &FieldSpec, gamma: Symbol) -> Result<Self> {
        if gamma.is_zero() || !field.contains(gamma) {
            return Err(Error::Config(format!("kernel gamma {gamma} must be a nonzero field element")));
        }
        let q = field.q();
        let mut matrix = vec![Symbol::ZERO; q * q];
        let order = (q - 1) as u64;
        for r in 0..q {
            let e = (q as u64 - 1 - r as u64) % order;
            for j in 0..q - 1 {
                let x = field.alpha_pow((q - 2 - j) as i64);
                matrix[r * q + j] = field.pow(x, e);
            }
        }
        matrix[q * q - 1] = gamma;
        if rank(field, &matrix, q, q) != q {
            return Err(Error::Config("kernel matrix is singular".into()));
        }

        let mut kernel = RsKernel {
            field: field.clone(),
            matrix,
            gamma,
            partial_distances: Vec::new(),
            min_weight_rows: None,
        };
        if q <= EXHAUSTIVE_PARTIAL_DISTANCE_MAX_Q {
            let mut dists = Vec::with_capacity(q);
            let mut rows = Vec::with_capacity(q);
            for i in 0..q {
                let (d, row) = kernel.coset_min_weight(i);
                dists.push(d);
                rows.push(row);
            }
            kernel.partial_distances = dists;
            kernel.min_weight_rows = Some(rows);
        } else {
            // Too large to enumerate; RS kernels are MDS so D_i = i + 1.
            kernel.partial_distances = (1..=q).collect();
        }
        Ok(kernel)
    }

    #[inline]
    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.field.q()
    }

    pub fn gamma(&self) -> Symbol {
        self.gamma
    }

    #[inline]
    pub fn entry(&self, r: usize, c: usize) -> Symbol {
        self.matrix[r * self.q() + c]
    }

    pub fn row(&self, r: usize) -> &[Symbol] {
        let q = self.q();
        &self.matrix[r * q..(r + 1) * q]
    }

    /// Row-major `q x q` entries.
    pub fn matrix(&self) -> &[Symbol] {
        &self.matrix
    }

    pub fn partial_distances(&self) -> &[usize] {
        &self.partial_distances
    }

    /// Whether `partial_distances` came from enumeration (q <= 8).
    pub fn partial_distances_verified(&self) -> bool {
        self.min_weight_rows.is_some()
    }

    /// `g'_i`: a minimum-weight vector of `g_i + span(g_{i+1}, .., g_{q-1})`.
    pub fn min_weight_row(&self, i: usize) -> Option<&[Symbol]> {
        self.min_weight_rows.as_ref().and_then(|rows| rows.get(i)).map(Vec::as_slice)
    }

    /// Brute-force partial distance of row `i`.
    pub fn partial_distance(&self, i: usize) -> Result<usize> {
        let q = self.q();
        if i >= q {
            return Err(Error::OutOfRange { index: i, limit: q });
        }
        if q > EXHAUSTIVE_PARTIAL_DISTANCE_MAX_Q {
            return Err(Error::SizeGuard { size: q, limit: EXHAUSTIVE_PARTIAL_DISTANCE_MAX_Q });
        }
        Ok(self.coset_min_weight(i).0)
    }

    /// Minimum Hamming weight of `g_i + u`, `u` ranging over the span of the
    /// rows below `i`. Scaling by a nonzero `x - x'` does not change weights,
    /// so this is the minimum of `d(g(.., x, v), g(.., x', w))` over all
    /// `x != x'` and tails.
    fn coset_min_weight(&self, i: usize) -> (usize, Vec<Symbol>) {
        let q = self.q();
        let f = &self.field;
        let tail_len = q - 1 - i;
        let mut digits = vec![0usize; tail_len];
        let mut best = (usize::MAX, Vec::new());
        let mut v = vec![Symbol::ZERO; q];
        loop {
            v.copy_from_slice(self.row(i));
            for (off, &d) in digits.iter().enumerate() {
                if d != 0 {
                    let coef = Symbol(d as u8);
                    for (slot, &g) in v.iter_mut().zip(self.row(i + 1 + off)) {
                        *slot = f.add(*slot, f.mul(coef, g));
                    }
                }
            }
            let w = v.iter().filter(|s| !s.is_zero()).count();
            if w < best.0 {
                best = (w, v.clone());
            }
            if !odometer_step(&mut digits, q) {
                break;
            }
        }
        best
    }

    /// `out = input * G` for one length-q block.
    #[inline]
    pub fn apply(&self, input: &[Symbol], out: &mut [Symbol]) {
        let q = self.q();
        let mt = self.field.mul_table();
        for (j, o) in out.iter_mut().enumerate().take(q) {
            let mut acc = 0u8;
            for (r, s) in input.iter().enumerate().take(q) {
                acc ^= mt[s.value() * q + self.matrix[r * q + j].value()];
            }
            *o = Symbol(acc);
        }
    }

    /// `s * G^{(x)m}` via `m` butterfly stages; `s.len()` must be `q^m`.
    pub fn encode(&self, s: &[Symbol], m: usize) -> Result<Vec<Symbol>> {
        let n = self.block_length(m)?;
        if s.len() != n {
            return Err(Error::Length { expected: n, actual: s.len() });
        }
        let mut x = s.to_vec();
        self.encode_in_place(&mut x);
        Ok(x)
    }

    /// In-place transform; the length must be a power of q.
    pub fn encode_in_place(&self, x: &mut [Symbol]) {
        let q = self.q();
        let mut inp = vec![Symbol::ZERO; q];
        let mut out = vec![Symbol::ZERO; q];
        let mut stride = 1;
        while stride < x.len() {
            let span = stride * q;
            for base in (0..x.len()).step_by(span) {
                for off in 0..stride {
                    for d in 0..q {
                        inp[d] = x[base + off + d * stride];
                    }
                    self.apply(&inp, &mut out);
                    for d in 0..q {
                        x[base + off + d * stride] = out[d];
                    }
                }
            }
            stride = span;
        }
    }

    /// `q^m`, guarding against overflow.
    pub fn block_length(&self, m: usize) -> Result<usize> {
        (self.q() as u64)
            .checked_pow(m as u32)
            .filter(|&n| n <= (1 << 26))
            .map(|n| n as usize)
            .ok_or(Error::SizeGuard { size: usize::MAX, limit: 1 << 26 })
    }
}

/// `ln(q!) / (q ln q)`.
pub fn kernel_exponent(q: usize) -> f64 {
    assert!(q >= 2, "kernel exponent needs q >= 2");
    let ln_fact: f64 = (2..=q).map(|k| (k as f64).ln()).sum();
    ln_fact / (q as f64 * (q as f64).ln())
}

/// Advances a little-endian base-`q` counter; false once it wraps to zero.
pub(crate) fn odometer_step(digits: &mut [usize], q: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < q {
            return true;
        }
        *d = 0;
    }
    false
}

/// Rank of a `rows x cols` row-major matrix over GF(q).
pub fn rank(field: &FieldSpec, matrix: &[Symbol], rows: usize, cols: usize) -> usize {
    let mut a = matrix.to_vec();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i * cols + c].is_zero()) else {
            continue;
        };
        for k in 0..cols {
            a.swap(r * cols + k, p * cols + k);
        }
        let inv = field.inv(a[r * cols + c]).expect("pivot is nonzero");
        for k in 0..cols {
            a[r * cols + k] = field.mul(a[r * cols + k], inv);
        }
        for i in 0..rows {
            if i != r && !a[i * cols + c].is_zero() {
                let f = a[i * cols + c];
                for k in 0..cols {
                    let t = field.mul(f, a[r * cols + k]);
                    a[i * cols + k] = field.sub(a[i * cols + k], t);
                }
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf4() -> (FieldSpec, RsKernel) {
        let f = FieldSpec::new(2).unwrap();
        let k = RsKernel::new(&f).unwrap();
        (f, k)
    }

    #[test]
    fn g4_matches_reference_matrix() {
        let (f, k) = gf4();
        let a = f.alpha();
        let a2 = f.pow(a, 2);
        let (o, z) = (Symbol::ONE, Symbol::ZERO);
        let expected = [o, o, o, z, a, a2, o, z, a2, a, o, z, o, o, o, a];
        assert_eq!(k.matrix(), &expected);
    }

    #[test]
    fn first_row_is_ones_then_zero() {
        for t in 2..=4 {
            let f = FieldSpec::new(t).unwrap();
            let k = RsKernel::new(&f).unwrap();
            let q = f.q();
            assert!(k.row(0)[..q - 1].iter().all(|&s| s == Symbol::ONE));
            assert_eq!(k.row(0)[q - 1], Symbol::ZERO);
        }
    }

    #[test]
    fn q2_kernel_is_arikan() {
        let f = FieldSpec::new(1).unwrap();
        let k = RsKernel::new(&f).unwrap();
        assert_eq!(k.matrix(), &[Symbol(1), Symbol(0), Symbol(1), Symbol(1)]);
        assert_eq!(k.partial_distances(), &[1, 2]);
    }

    #[test]
    fn zero_gamma_rejected() {
        let f = FieldSpec::new(2).unwrap();
        assert!(matches!(RsKernel::build(&f, Symbol::ZERO), Err(Error::Config(_))));
    }

    #[test]
    fn g4_is_invertible() {
        let (f, k) = gf4();
        assert_eq!(rank(&f, k.matrix(), 4, 4), 4);
    }

    #[test]
    fn partial_distances_are_index_plus_one() {
        for t in [2, 3] {
            let f = FieldSpec::new(t).unwrap();
            let k = RsKernel::new(&f).unwrap();
            let expected: Vec<usize> = (1..=f.q()).collect();
            assert_eq!(k.partial_distances(), expected.as_slice());
            for i in 0..f.q() {
                assert_eq!(k.partial_distance(i).unwrap(), i + 1);
                let row = k.min_weight_row(i).unwrap();
                assert_eq!(row.iter().filter(|s| !s.is_zero()).count(), i + 1);
            }
        }
        let (_, k) = gf4();
        assert!(matches!(k.partial_distance(4), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn partial_distance_by_input_pairs() {
        // Def.-level oracle: min distance over x != x' and arbitrary tails,
        // with a fixed all-zero prefix (distance is prefix-invariant).
        let (_, k) = gf4();
        let all: Vec<Vec<Symbol>> = (0..256)
            .map(|v| (0..4).map(|d| Symbol(((v >> (2 * d)) & 3) as u8)).collect())
            .collect();
        let enc: Vec<Vec<Symbol>> = all.iter().map(|s| k.encode(s, 1).unwrap()).collect();
        for i in 0..4 {
            let mut best = usize::MAX;
            for (a, ca) in all.iter().zip(&enc) {
                for (b, cb) in all.iter().zip(&enc) {
                    let prefix_ok = (0..i).all(|p| a[p].is_zero() && b[p].is_zero());
                    if prefix_ok && a[i] != b[i] {
                        best = best.min(ca.iter().zip(cb).filter(|(x, y)| x != y).count());
                    }
                }
            }
            assert_eq!(best, i + 1);
        }
    }

    #[test]
    fn kernel_exponent_values() {
        assert_eq!(kernel_exponent(2), 0.5);
        assert!((kernel_exponent(4) - 0.57312).abs() < 1e-5);
        assert!((kernel_exponent(3) - 6f64.ln() / (3.0 * 3f64.ln())).abs() < 1e-15);
        assert!((kernel_exponent(3) - 0.54364).abs() < 1e-5);
    }

    #[test]
    fn encode_unit_vector_gives_bottom_row() {
        let (f, k) = gf4();
        let s = [Symbol(0), Symbol(0), Symbol(0), Symbol(1)];
        let c = k.encode(&s, 1).unwrap();
        assert_eq!(c, vec![Symbol::ONE, Symbol::ONE, Symbol::ONE, f.alpha()]);
    }

    #[test]
    fn encode_zero_is_zero() {
        let (_, k) = gf4();
        for m in 0..4 {
            let n = 4usize.pow(m as u32);
            let c = k.encode(&vec![Symbol::ZERO; n], m).unwrap();
            assert!(c.iter().all(|s| s.is_zero()));
        }
    }

    #[test]
    fn encode_rejects_bad_length() {
        let (_, k) = gf4();
        assert!(matches!(k.encode(&[Symbol::ZERO; 5], 1), Err(Error::Length { .. })));
    }
}
