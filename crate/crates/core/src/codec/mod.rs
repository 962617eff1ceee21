//! Symbol-level encoding, SC and CA-SCL decoding.
//!
//! Information bits (payload followed by the CRC) are packed `t` at a time
//! into symbols and placed on the information set in increasing index
//! order, so the CRC lands on the last information symbols. Frozen inputs
//! are zero.

mod crc;
mod marginal;
mod sc;
mod scl;

use std::sync::Arc;

pub use crc::Crc;
pub use marginal::{kernel_marginal, MarginalTables};
pub use scl::{ca_scl_decode, DecoderPath, ListDecoder};

use crate::channel::Posteriors;
use crate::error::{Error, Result};
use crate::galois::{FieldSpec, Symbol};
use crate::kernel::RsKernel;

/// One concrete code: kernel, length, information set, CRC and list size.
#[derive(Clone, Debug)]
pub struct CodeSpec {
    kernel: Arc<RsKernel>,
    tables: Arc<MarginalTables>,
    m: usize,
    n: usize,
    info_set: Vec<usize>,
    frozen: Vec<bool>,
    crc: Option<Crc>,
    list_size: usize,
}

impl CodeSpec {
    pub fn new(kernel: RsKernel, m: usize, info_set: &[usize], crc: Option<Crc>, list_size: usize) -> Result<Self> {
        let tables = MarginalTables::new(&kernel);
        Self::with_tables(Arc::new(kernel), Arc::new(tables), m, info_set, crc, list_size)
    }

    /// Shares already-built kernel tables.
    pub fn with_tables(
        kernel: Arc<RsKernel>,
        tables: Arc<MarginalTables>,
        m: usize,
        info_set: &[usize],
        crc: Option<Crc>,
        list_size: usize,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("code needs at least one kernel stage (m >= 1)".into()));
        }
        if list_size == 0 {
            return Err(Error::Config("list size must be at least 1".into()));
        }
        let n = kernel.block_length(m)?;
        let mut frozen = vec![true; n];
        for &i in info_set {
            if i >= n {
                return Err(Error::OutOfRange { index: i, limit: n });
            }
            if !frozen[i] {
                return Err(Error::Config(format!("information index {i} listed twice")));
            }
            frozen[i] = false;
        }
        let info_set: Vec<usize> = (0..n).filter(|&i| !frozen[i]).collect();
        let t = kernel.field().t() as usize;
        if let Some(c) = crc {
            if c.width() > info_set.len() * t {
                return Err(Error::Infeasible(format!(
                    "{} information bits cannot hold a {}-bit CRC",
                    info_set.len() * t,
                    c.width()
                )));
            }
        }
        Ok(CodeSpec { kernel, tables, m, n, info_set, frozen, crc, list_size })
    }

    pub fn kernel(&self) -> &RsKernel {
        &self.kernel
    }

    pub fn field(&self) -> &FieldSpec {
        self.kernel.field()
    }

    pub(crate) fn tables(&self) -> &MarginalTables {
        &self.tables
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.kernel.q()
    }

    pub fn t(&self) -> usize {
        self.field().t() as usize
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Symbol length `q^m`.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Bit length `t q^m`.
    pub fn n_bits(&self) -> usize {
        self.n * self.t()
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.frozen[i]).collect()
    }

    #[inline]
    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    /// `K_b = t |I|`, CRC included.
    pub fn info_bits(&self) -> usize {
        self.info_set.len() * self.t()
    }

    /// Payload bits, CRC excluded.
    pub fn payload_bits(&self) -> usize {
        self.info_bits() - self.crc.map_or(0, |c| c.width())
    }

    pub fn crc(&self) -> Option<Crc> {
        self.crc
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    pub fn with_list_size(&self, list_size: usize) -> Result<Self> {
        if list_size == 0 {
            return Err(Error::Config("list size must be at least 1".into()));
        }
        Ok(CodeSpec { list_size, ..self.clone() })
    }

    /// Appends the CRC (if any) to a payload.
    pub fn attach_crc(&self, payload: &[u8]) -> Result<Vec<u8>> {
        if payload.len() != self.payload_bits() {
            return Err(Error::Length { expected: self.payload_bits(), actual: payload.len() });
        }
        Ok(match self.crc {
            Some(c) => c.attach(payload),
            None => payload.to_vec(),
        })
    }

    /// Input vector `u`: information symbols on `I`, zeros elsewhere.
    pub fn place_info(&self, info_bits: &[u8]) -> Result<Vec<Symbol>> {
        if info_bits.len() != self.info_bits() {
            return Err(Error::Length { expected: self.info_bits(), actual: info_bits.len() });
        }
        let syms = self.field().pack_bits(info_bits)?;
        let mut u = vec![Symbol::ZERO; self.n];
        for (&i, s) in self.info_set.iter().zip(syms) {
            u[i] = s;
        }
        Ok(u)
    }

    /// Information bits carried by an input vector.
    pub fn info_bits_of(&self, u: &[u8]) -> Vec<u8> {
        let t = self.t();
        let mut out = vec![0u8; self.info_bits()];
        for (&i, chunk) in self.info_set.iter().zip(out.chunks_mut(t)) {
            self.field().write_symbol_bits(Symbol(u[i]), chunk);
        }
        out
    }

    pub(crate) fn check_posteriors(&self, p: &Posteriors) -> Result<()> {
        if p.q() != self.q() {
            return Err(Error::Length { expected: self.q(), actual: p.q() });
        }
        if p.len() != self.n {
            return Err(Error::Length { expected: self.n, actual: p.len() });
        }
        Ok(())
    }
}

/// Result of one list decode.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutcome {
    /// Decoded input vector `u`.
    pub symbols: Vec<Symbol>,
    /// Information bits, CRC included.
    pub info_bits: Vec<u8>,
    pub crc_passed: bool,
    pub metric: f64,
}

impl DecodeOutcome {
    /// Information bits with the CRC stripped.
    pub fn payload<'a>(&'a self, spec: &CodeSpec) -> &'a [u8] {
        &self.info_bits[..spec.payload_bits()]
    }
}

/// Encodes `t |I|` information bits (CRC already attached) into `t q^m`
/// coded bits.
pub fn encode_codeword(info_bits: &[u8], spec: &CodeSpec) -> Result<Vec<u8>> {
    let mut u = spec.place_info(info_bits)?;
    spec.kernel().encode_in_place(&mut u);
    Ok(spec.field().unpack_symbols(&u))
}

/// Attaches the CRC and encodes.
pub fn encode_payload(payload: &[u8], spec: &CodeSpec) -> Result<Vec<u8>> {
    encode_codeword(&spec.attach_crc(payload)?, spec)
}

/// Successive-cancellation decoding; returns the decided input vector.
pub fn sc_decode(posteriors: &Posteriors, spec: &CodeSpec) -> Result<Vec<Symbol>> {
    spec.check_posteriors(posteriors)?;
    let tree = sc::Tree::new(spec.tables(), spec.m());
    Ok(sc::sc_pass(&tree, posteriors.as_slice(), &spec.frozen).into_iter().map(Symbol).collect())
}

/// Per-input error tallies from genie-aided SC.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GenieTally {
    pub errors: Vec<u64>,
    /// Sum over trials of `1 - P(true symbol)`.
    pub soft_errors: Vec<f64>,
}

impl GenieTally {
    pub fn new(n: usize) -> Self {
        GenieTally { errors: vec![0; n], soft_errors: vec![0.0; n] }
    }

    pub fn merge(&mut self, other: &GenieTally) {
        for (a, b) in self.errors.iter_mut().zip(&other.errors) {
            *a += b;
        }
        for (a, b) in self.soft_errors.iter_mut().zip(&other.soft_errors) {
            *a += b;
        }
    }
}

/// Genie-aided SC over the full transform (no frozen set): every input is
/// decided by maximum posterior, tallied against `truth`, then replaced by
/// the true symbol.
pub fn genie_sc_decode(
    posteriors: &Posteriors,
    truth: &[Symbol],
    tables: &MarginalTables,
    m: usize,
    tally: &mut GenieTally,
) -> Result<()> {
    let tree = sc::Tree::new(tables, m);
    let n = tree.n();
    if posteriors.len() != n || truth.len() != n || tally.errors.len() != n {
        return Err(Error::Length { expected: n, actual: posteriors.len().min(truth.len()) });
    }
    let truth: Vec<u8> = truth.iter().map(|s| s.0).collect();
    sc::genie_pass(&tree, posteriors.as_slice(), &truth, &mut tally.errors, &mut tally.soft_errors);
    Ok(())
}

#[cfg(test)]
mod tests;
