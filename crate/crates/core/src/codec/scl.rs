//! CRC-aided successive-cancellation list decoding.
//!
//! Path metrics are sums of log leaf posteriors, i.e. `log P(u_0..u_i | y)`.
//! At an information input each path forks into `q` children and the best
//! `L` survive; ties go to the lower path index, then the smaller symbol.

use super::sc::{ScState, Tree};
use super::{CodeSpec, DecodeOutcome};
use crate::channel::Posteriors;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct DecoderPath {
    state: ScState,
    metric: f64,
}

impl DecoderPath {
    pub fn metric(&self) -> f64 {
        self.metric
    }

    /// Inputs decided so far (later entries are zero).
    pub fn decided(&self) -> &[u8] {
        &self.state.decided
    }
}

/// Step-wise list decoder over one received block.
pub struct ListDecoder<'a> {
    spec: &'a CodeSpec,
    tree: Tree<'a>,
    channel: &'a [f64],
    paths: Vec<DecoderPath>,
    next: usize,
    leaves: Vec<f64>,
}

impl<'a> ListDecoder<'a> {
    pub fn new(spec: &'a CodeSpec, posteriors: &'a Posteriors) -> Result<Self> {
        spec.check_posteriors(posteriors)?;
        let tree = Tree::new(spec.tables(), spec.m());
        let root = DecoderPath { state: ScState::new(&tree), metric: 0.0 };
        Ok(ListDecoder {
            spec,
            tree,
            channel: posteriors.as_slice(),
            paths: vec![root],
            next: 0,
            leaves: Vec::new(),
        })
    }

    pub fn paths(&self) -> &[DecoderPath] {
        &self.paths
    }

    pub fn position(&self) -> usize {
        self.next
    }

    pub fn is_done(&self) -> bool {
        self.next == self.spec.n()
    }

    /// Decides the next input on every path. Returns false once all inputs
    /// are decided.
    pub fn advance(&mut self) -> bool {
        if self.is_done() {
            return false;
        }
        let i = self.next;
        let q = self.spec.q();
        self.leaves.clear();
        for p in self.paths.iter_mut() {
            let leaf = p.state.leaf_posterior(&self.tree, self.channel, i);
            self.leaves.extend_from_slice(leaf);
        }
        if self.spec.is_frozen(i) {
            for (k, p) in self.paths.iter_mut().enumerate() {
                p.metric += path_term(self.leaves[k * q], p.state.dead);
                p.state.decide(&self.tree, i, 0);
            }
        } else {
            self.fork(i);
        }
        self.next += 1;
        true
    }

    fn fork(&mut self, i: usize) {
        let q = self.spec.q();
        let mut cands: Vec<(f64, usize, u8)> = Vec::with_capacity(self.paths.len() * q);
        for (k, p) in self.paths.iter().enumerate() {
            for eta in 0..q {
                cands.push((p.metric + path_term(self.leaves[k * q + eta], p.state.dead), k, eta as u8));
            }
        }
        cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        cands.truncate(self.spec.list_size());

        let mut uses = vec![0usize; self.paths.len()];
        for c in &cands {
            uses[c.1] += 1;
        }
        let mut olds: Vec<Option<DecoderPath>> = std::mem::take(&mut self.paths).into_iter().map(Some).collect();
        let mut next = Vec::with_capacity(cands.len());
        for (metric, k, eta) in cands {
            uses[k] -= 1;
            let mut path = if uses[k] == 0 {
                olds[k].take().expect("parent consumed once")
            } else {
                olds[k].as_ref().expect("parent alive").clone()
            };
            path.metric = metric;
            path.state.decide(&self.tree, i, eta);
            next.push(path);
        }
        self.paths = next;
    }

    /// Best-metric path that passes the CRC, else the best path flagged.
    pub fn finish(mut self) -> DecodeOutcome {
        while self.advance() {}
        let mut order: Vec<usize> = (0..self.paths.len()).collect();
        order.sort_by(|&a, &b| self.paths[b].metric.total_cmp(&self.paths[a].metric).then(a.cmp(&b)));
        let mut first = None;
        for &k in &order {
            let p = &self.paths[k];
            let info_bits = self.spec.info_bits_of(&p.state.decided);
            let ok = self.spec.crc().is_none_or(|crc| crc.check(&info_bits));
            let outcome = DecodeOutcome {
                symbols: p.state.decided.iter().map(|&s| crate::galois::Symbol(s)).collect(),
                info_bits,
                crc_passed: ok,
                metric: p.metric,
            };
            if ok {
                return outcome;
            }
            first.get_or_insert(outcome);
        }
        first.expect("list is never empty")
    }
}

#[inline]
fn path_term(p: f64, dead: bool) -> f64 {
    if dead {
        f64::NEG_INFINITY
    } else {
        p.ln()
    }
}

/// CA-SCL decoding with the code's list size and CRC.
pub fn ca_scl_decode(posteriors: &Posteriors, spec: &CodeSpec) -> Result<DecodeOutcome> {
    if spec.list_size() == 0 {
        return Err(Error::Config("list size must be at least 1".into()));
    }
    Ok(ListDecoder::new(spec, posteriors)?.finish())
}
