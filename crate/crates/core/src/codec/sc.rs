//! Successive-cancellation tree state for `c = u G^{(x)m}`.
//!
//! Level `r` nodes span `q^r` coded positions. Writing a node's input as
//! `q` child blocks `V_0..V_{q-1}` (each the encoding of `q^{r-1}` inputs),
//! its codeword is `c[jt * q^{r-1} + j] = sum_b G[b][jt] V_b[j]`, so every
//! child position `j` sees one kernel across the `q` parent positions
//! `jt * q^{r-1} + j`. Leaf `i` descends through child `i_{r-1}` at level `r`.

use super::marginal::MarginalTables;
use crate::channel::argmax;

/// Shape of the tree plus the kernel tables; shared by every path.
pub(crate) struct Tree<'a> {
    pub tables: &'a MarginalTables,
    pub q: usize,
    pub shift: u32,
    pub m: usize,
}

impl<'a> Tree<'a> {
    pub fn new(tables: &'a MarginalTables, m: usize) -> Self {
        let q = tables.q();
        Tree { tables, q, shift: q.trailing_zeros(), m }
    }

    #[inline]
    pub fn n(&self) -> usize {
        1 << (self.shift as usize * self.m)
    }

    #[inline]
    fn digit(&self, i: usize, k: usize) -> usize {
        (i >> (self.shift as usize * k)) & (self.q - 1)
    }

    #[inline]
    fn pow(&self, r: usize) -> usize {
        1 << (self.shift as usize * r)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct ScState {
    /// `prob[r]`: posteriors of the current level-`r` node, `q` per position.
    prob: Vec<Vec<f64>>,
    /// `cw[r]`: re-encoded child blocks of the current level-`r` node.
    cw: Vec<Vec<u8>>,
    pub decided: Vec<u8>,
    /// Some marginal along this path had zero mass.
    pub dead: bool,
}

impl ScState {
    pub fn new(tree: &Tree) -> Self {
        let q = tree.q;
        let prob = (0..tree.m).map(|r| vec![0.0; tree.pow(r) * q]).collect();
        let cw = (0..=tree.m).map(|r| if r == 0 { Vec::new() } else { vec![0u8; tree.pow(r)] }).collect();
        ScState { prob, cw, decided: vec![0u8; tree.n()], dead: false }
    }

    /// Posterior of input `i`; leaves must be visited in order.
    pub fn leaf_posterior(&mut self, tree: &Tree, channel: &[f64], i: usize) -> &[f64] {
        let q = tree.q;
        let m = tree.m;
        let start = if i == 0 {
            m
        } else {
            let mut k = 0;
            while tree.digit(i, k) == 0 {
                k += 1;
            }
            k + 1
        };
        let mut buf = [0.0f64; 64];
        let mut prefix = [0u8; 8];
        let big = q > 8;
        let mut big_buf = if big { vec![0.0; q * q] } else { Vec::new() };
        let mut big_prefix = if big { vec![0u8; q] } else { Vec::new() };

        for r in (1..=start).rev() {
            let a = tree.digit(i, r - 1);
            let np = tree.pow(r - 1);
            let (lower, upper) = self.prob.split_at_mut(r);
            let parent: &[f64] = if r == m { channel } else { &upper[0] };
            let child = &mut lower[r - 1];
            let cw = &self.cw[r];
            for j in 0..np {
                let (probs, pre): (&mut [f64], &mut [u8]) = if big {
                    (&mut big_buf[..], &mut big_prefix[..])
                } else {
                    (&mut buf[..q * q], &mut prefix[..q])
                };
                for jt in 0..q {
                    let src = (jt * np + j) * q;
                    probs[jt * q..(jt + 1) * q].copy_from_slice(&parent[src..src + q]);
                    pre[jt] = tree.tables.prefix_symbol((0..a).map(|b| cw[b * np + j]), jt);
                }
                let out = &mut child[j * q..(j + 1) * q];
                let mass = tree.tables.marginal_raw(probs, pre, a, out);
                if mass > 0.0 && mass.is_finite() {
                    // Divide rather than scale by 1 / mass, which overflows
                    // for subnormal masses.
                    out.iter_mut().for_each(|v| *v /= mass);
                } else {
                    self.dead = true;
                    out.iter_mut().for_each(|v| *v = 1.0 / q as f64);
                }
            }
        }
        &self.prob[0][..q]
    }

    /// Fixes input `i` to `u` and folds completed nodes into their parents.
    pub fn decide(&mut self, tree: &Tree, i: usize, u: u8) {
        let q = tree.q;
        self.decided[i] = u;
        self.cw[1][tree.digit(i, 0)] = u;
        let mut r = 1;
        while r < tree.m && tree.digit(i, r - 1) == q - 1 {
            let np = tree.pow(r - 1);
            let nr = tree.pow(r);
            let slot = tree.digit(i, r);
            let (lo, hi) = self.cw.split_at_mut(r + 1);
            let src = &lo[r];
            let dst = &mut hi[0][slot * nr..(slot + 1) * nr];
            for j in 0..np {
                for jt in 0..q {
                    dst[jt * np + j] = tree.tables.prefix_symbol((0..q).map(|b| src[b * np + j]), jt);
                }
            }
            r += 1;
        }
    }
}

/// Plain SC: frozen inputs are zero, the rest take the most likely symbol.
pub(crate) fn sc_pass(tree: &Tree, channel: &[f64], frozen: &[bool]) -> Vec<u8> {
    let mut st = ScState::new(tree);
    for (i, &fz) in frozen.iter().enumerate() {
        let p = st.leaf_posterior(tree, channel, i);
        let u = if fz { 0 } else { argmax(p) as u8 };
        st.decide(tree, i, u);
    }
    st.decided
}

/// Genie-aided SC: records whether the most likely symbol at each input was
/// wrong, then continues with the true symbol.
pub(crate) fn genie_pass(tree: &Tree, channel: &[f64], truth: &[u8], errors: &mut [u64], soft: &mut [f64]) {
    let mut st = ScState::new(tree);
    for (i, &u) in truth.iter().enumerate() {
        let p = st.leaf_posterior(tree, channel, i);
        if argmax(p) != u as usize {
            errors[i] += 1;
        }
        soft[i] += 1.0 - p[u as usize];
        st.decide(tree, i, u);
    }
}
