//! Table-driven arithmetic over GF(q = 2^t), 1 <= t <= 8.
//!
//! Elements are stored in polynomial basis as integers in `[0, q)`; addition
//! is XOR and multiplication goes through exp/log tables (plus a dense
//! product table for the decoder's inner loops).
//!
//! The bit mapping used at the modulation boundary sends the tuple
//! `(b_0, .., b_{t-1})` (b_0 most significant) read as the integer `k` to
//! `0` when `k == 0` and to `alpha^k` otherwise. For t = 2 this is
//! `(0,0) -> 0, (0,1) -> alpha, (1,0) -> alpha^2, (1,1) -> alpha^3 = 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of GF(q), polynomial basis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(pub u8);

impl Symbol {
    pub const ZERO: Symbol = Symbol(0);
    pub const ONE: Symbol = Symbol(1);

    #[inline]
    pub fn value(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Default primitive polynomials (bit masks including the x^t term).
const DEFAULT_PRIM_POLY: [u32; 9] = [
    0,
    0b11,        // x + 1
    0b111,       // x^2 + x + 1
    0b1011,      // x^3 + x + 1
    0b1_0011,    // x^4 + x + 1
    0b10_0101,   // x^5 + x^2 + 1
    0b100_0011,  // x^6 + x + 1
    0b1000_1001, // x^7 + x^3 + 1
    0x11d,       // x^8 + x^4 + x^3 + x^2 + 1
];

/// Default primitive polynomial for `t` bits per symbol.
pub fn default_prim_poly(t: u32) -> Result<u32> {
    if !(1..=8).contains(&t) {
        return Err(Error::Config(format!("bits per symbol t = {t} outside [1, 8]")));
    }
    Ok(DEFAULT_PRIM_POLY[t as usize])
}

/// GF(2^t) with its exp/log tables. Immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldSpec {
    t: u32,
    q: usize,
    prim_poly: u32,
    /// `exp_table[k] = alpha^k` for `k` in `[0, q-1)`.
    exp_table: Vec<u8>,
    /// `log_table[x]` for nonzero `x`; entry 0 is unused.
    log_table: Vec<u16>,
    mul_table: Vec<u8>,
    inv_table: Vec<u8>,
    /// Bit-tuple integer `k` -> symbol.
    sym_of_bits: Vec<u8>,
    /// Symbol -> bit-tuple integer `k`.
    bits_of_sym: Vec<u8>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("t", &self.t)
            .field("q", &self.q)
            .field("prim_poly", &format_args!("{:#x}", self.prim_poly))
            .finish()
    }
}

impl FieldSpec {
    /// GF(2^t) with the default primitive polynomial.
    pub fn new(t: u32) -> Result<Self> {
        Self::build(t, default_prim_poly(t)?)
    }

    /// GF(2^t) reduced by `prim_poly`, which must be primitive of degree `t`.
    pub fn build(t: u32, prim_poly: u32) -> Result<Self> {
        if !(1..=8).contains(&t) {
            return Err(Error::Config(format!("bits per symbol t = {t} outside [1, 8]")));
        }
        if prim_poly >> t != 1 {
            return Err(Error::Config(format!(
                "polynomial {prim_poly:#b} does not have degree {t}"
            )));
        }
        let q = 1usize << t;
        let order = q - 1;

        let mut exp_table = vec![0u8; order];
        let mut log_table = vec![0u16; q];
        let mut seen = vec![false; q];
        let mut e: u32 = 1;
        for (k, slot) in exp_table.iter_mut().enumerate() {
            if seen[e as usize] {
                return Err(Error::Config(format!(
                    "polynomial {prim_poly:#b} is not primitive: x has order {k} != {order}"
                )));
            }
            seen[e as usize] = true;
            *slot = e as u8;
            log_table[e as usize] = k as u16;
            e <<= 1;
            if e & (q as u32) != 0 {
                e ^= prim_poly;
            }
        }
        if e != 1 {
            return Err(Error::Config(format!(
                "polynomial {prim_poly:#b} is not primitive: exp cycle does not close"
            )));
        }

        let mut mul_table = vec![0u8; q * q];
        for a in 1..q {
            for b in 1..q {
                let k = (log_table[a] as usize + log_table[b] as usize) % order;
                mul_table[a * q + b] = exp_table[k];
            }
        }
        let mut inv_table = vec![0u8; q];
        for a in 1..q {
            inv_table[a] = exp_table[(order - log_table[a] as usize) % order];
        }

        let mut sym_of_bits = vec![0u8; q];
        let mut bits_of_sym = vec![0u8; q];
        for k in 1..q {
            let s = exp_table[k % order];
            sym_of_bits[k] = s;
            bits_of_sym[s as usize] = k as u8;
        }

        Ok(FieldSpec {
            t,
            q,
            prim_poly,
            exp_table,
            log_table,
            mul_table,
            inv_table,
            sym_of_bits,
            bits_of_sym,
        })
    }

    #[inline]
    pub fn t(&self) -> u32 {
        self.t
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn prim_poly(&self) -> u32 {
        self.prim_poly
    }

    /// The primitive element alpha (the class of x).
    pub fn alpha(&self) -> Symbol {
        Symbol(self.exp_table[1 % self.exp_table.len()])
    }

    pub fn exp_table(&self) -> &[u8] {
        &self.exp_table
    }

    pub fn log_table(&self) -> &[u16] {
        &self.log_table
    }

    /// alpha^k for any integer `k` (reduced mod q-1).
    pub fn alpha_pow(&self, k: i64) -> Symbol {
        let order = (self.q - 1) as i64;
        Symbol(self.exp_table[k.rem_euclid(order) as usize])
    }

    pub fn contains(&self, a: Symbol) -> bool {
        a.value() < self.q
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        Symbol(a.0 ^ b.0)
    }

    /// Same as `add` in characteristic 2.
    #[inline]
    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        Symbol(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        Symbol(self.mul_table[a.value() * self.q + b.value()])
    }

    pub fn inv(&self, a: Symbol) -> Result<Symbol> {
        if a.is_zero() {
            return Err(Error::Domain("inverse of zero in GF(q)".into()));
        }
        Ok(Symbol(self.inv_table[a.value()]))
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `x^e` with `0^0 = 1`.
    pub fn pow(&self, x: Symbol, e: u64) -> Symbol {
        if e == 0 {
            return Symbol::ONE;
        }
        if x.is_zero() {
            return Symbol::ZERO;
        }
        let order = (self.q - 1) as u64;
        let k = (self.log_table[x.value()] as u64 * (e % order)) % order;
        Symbol(self.exp_table[k as usize])
    }

    /// Dense `q x q` product table, row-major.
    #[inline]
    pub fn mul_table(&self) -> &[u8] {
        &self.mul_table
    }

    /// Packs `t` bits (first bit most significant) into a symbol.
    pub fn bits_to_symbol(&self, bits: &[u8]) -> Result<Symbol> {
        if bits.len() != self.t as usize {
            return Err(Error::Length { expected: self.t as usize, actual: bits.len() });
        }
        let mut k = 0usize;
        for &b in bits {
            if b > 1 {
                return Err(Error::Domain(format!("bit value {b} is not 0 or 1")));
            }
            k = (k << 1) | b as usize;
        }
        Ok(Symbol(self.sym_of_bits[k]))
    }

    /// Unpacks a symbol into `t` bits, first bit most significant.
    pub fn symbol_to_bits(&self, s: Symbol) -> Vec<u8> {
        let mut out = vec![0u8; self.t as usize];
        self.write_symbol_bits(s, &mut out);
        out
    }

    #[inline]
    pub(crate) fn write_symbol_bits(&self, s: Symbol, out: &mut [u8]) {
        let k = self.bits_of_sym[s.value()] as usize;
        let t = self.t as usize;
        for (b, slot) in out.iter_mut().enumerate().take(t) {
            *slot = ((k >> (t - 1 - b)) & 1) as u8;
        }
    }

    /// Bit `b` (0 = first) of symbol `s` under the modulation mapping.
    #[inline]
    pub fn symbol_bit(&self, s: Symbol, b: usize) -> u8 {
        let k = self.bits_of_sym[s.value()] as usize;
        ((k >> (self.t as usize - 1 - b)) & 1) as u8
    }

    /// Packs a bit stream whose length is a multiple of `t`.
    pub fn pack_bits(&self, bits: &[u8]) -> Result<Vec<Symbol>> {
        let t = self.t as usize;
        if bits.len() % t != 0 {
            return Err(Error::Length { expected: bits.len().div_ceil(t) * t, actual: bits.len() });
        }
        bits.chunks(t).map(|c| self.bits_to_symbol(c)).collect()
    }

    pub fn unpack_symbols(&self, symbols: &[Symbol]) -> Vec<u8> {
        let t = self.t as usize;
        let mut out = vec![0u8; symbols.len() * t];
        for (s, chunk) in symbols.iter().zip(out.chunks_mut(t)) {
            self.write_symbol_bits(*s, chunk);
        }
        out
    }
}
