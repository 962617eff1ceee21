//! Bit-serial CRC: MSB first, zero initial register, no reflection, no
//! final XOR. The default is CRC-8 with generator x^8 + x^2 + x + 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crc {
    /// Register width in bits, 1..=32.
    pub width: u32,
    /// Generator without the leading x^width term.
    pub poly: u32,
}

impl Default for Crc {
    fn default() -> Self {
        Crc::CRC8
    }
}

impl Crc {
    pub const CRC8: Crc = Crc { width: 8, poly: 0x07 };

    pub fn new(width: u32, poly: u32) -> Result<Self> {
        if !(1..=32).contains(&width) {
            return Err(Error::Config(format!("CRC width {width} outside [1, 32]")));
        }
        if width < 32 && poly >> width != 0 {
            return Err(Error::Config(format!("CRC polynomial {poly:#x} wider than {width} bits")));
        }
        Ok(Crc { width, poly })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width as usize
    }

    fn mask(&self) -> u64 {
        (1u64 << self.width) - 1
    }

    /// Register contents after shifting in `bits`.
    pub fn remainder(&self, bits: &[u8]) -> u32 {
        let mask = self.mask();
        let top = self.width - 1;
        let mut reg: u64 = 0;
        for &b in bits {
            let fb = ((reg >> top) & 1) ^ (b as u64 & 1);
            reg = (reg << 1) & mask;
            if fb == 1 {
                reg ^= self.poly as u64;
            }
        }
        reg as u32
    }

    /// `bits` followed by the `width` remainder bits, most significant first.
    pub fn attach(&self, bits: &[u8]) -> Vec<u8> {
        let rem = self.remainder(bits);
        let mut out = Vec::with_capacity(bits.len() + self.width());
        out.extend_from_slice(bits);
        out.extend((0..self.width).rev().map(|k| ((rem >> k) & 1) as u8));
        out
    }

    /// True when the trailing `width` bits are the CRC of the rest.
    pub fn check(&self, bits: &[u8]) -> bool {
        bits.len() >= self.width() && self.remainder(bits) == 0
    }
}
