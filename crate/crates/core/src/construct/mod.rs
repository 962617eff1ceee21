//! Reliability construction: partial-distance polarization weights (PDPW)
//! and the genie-aided Monte-Carlo baseline.
//!
//! The weight of input `i` with base-`q` digits `i_{m-1} .. i_0` is
//!
//! ```text
//! w(i) = sum_k zeta(i_k) beta^k log2 D_{i_k}
//! ```
//!
//! where `D_d` is the kernel's partial distance of row `d`, `zeta` corrects
//! for the gap between a kernel sub-channel and its genie-aided version, and
//! `beta > 1` weights deeper layers.

mod beta;
mod mc;
mod sequence;
mod zeta;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::RsKernel;

pub use beta::{beta_threshold, fit_beta, midpoint, BetaFit, BetaSet, PairConstraint, PairVotes, ReliabilityReference};
pub use mc::{mc_construct, GenieStats};
pub use sequence::{build_sequence, select_info_set, Method, ReliabilitySequence, SequenceSource};
pub use zeta::{estimate_zeta, estimate_zeta_detailed, GenieMode, ZetaConfig, ZetaEstimate};

/// Intra-layer correction factors `zeta(0..q-1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaTable {
    values: Vec<f64>,
    design_eb_n0_db: f64,
    /// Trials behind the estimate; 0 for tabulated defaults.
    n_samples: u64,
}

impl ZetaTable {
    pub fn new(values: Vec<f64>, design_eb_n0_db: f64, n_samples: u64) -> Result<Self> {
        if values.len() < 2 || !values.len().is_power_of_two() {
            return Err(Error::Config(format!("zeta needs q = 2^t >= 2 entries, got {}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Config(format!("zeta value {v} outside [0, 1]")));
        }
        Ok(ZetaTable { values, design_eb_n0_db, n_samples })
    }

    /// Tabulated defaults at -1.8 dB. Only GF(2) and GF(4) have one.
    pub fn default_for(q: usize) -> Result<Self> {
        match q {
            2 => Self::new(vec![0.0, 1.0], -1.8, 0),
            4 => Self::new(vec![0.0, 0.710, 0.878, 1.0], -1.8, 0),
            _ => Err(Error::Config(format!("no default zeta for q = {q}; estimate one"))),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, d: usize) -> f64 {
        self.values[d]
    }

    pub fn q(&self) -> usize {
        self.values.len()
    }

    pub fn design_eb_n0_db(&self) -> f64 {
        self.design_eb_n0_db
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    /// Non-decreasing in the input index. Not enforced.
    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Everything needed to evaluate PDPW weights.
#[derive(Clone, Debug)]
pub struct PdpwConfig {
    beta: f64,
    zeta: ZetaTable,
    kernel: RsKernel,
    /// `zeta(d) log2 D_d`.
    layer: Vec<f64>,
}

impl PdpwConfig {
    pub fn new(kernel: RsKernel, zeta: ZetaTable, beta: f64) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(Error::Config(format!("beta must be a finite value > 1, got {beta}")));
        }
        let layer = layer_terms(&kernel, &zeta)?;
        Ok(PdpwConfig { beta, zeta, kernel, layer })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn zeta(&self) -> &ZetaTable {
        &self.zeta
    }

    pub fn kernel(&self) -> &RsKernel {
        &self.kernel
    }

    pub fn q(&self) -> usize {
        self.kernel.q()
    }

    /// `zeta(d) log2 D_d`.
    pub fn layer_term(&self, d: usize) -> f64 {
        self.layer[d]
    }

    pub fn weight(&self, i: usize, m: usize) -> f64 {
        weight_from_terms(&self.layer, self.beta, i, m)
    }

    /// Weights of all `q^m` inputs.
    pub fn weights(&self, m: usize) -> Result<Vec<f64>> {
        let n = self.kernel.block_length(m)?;
        Ok((0..n).map(|i| self.weight(i, m)).collect())
    }
}

pub(crate) fn layer_terms(kernel: &RsKernel, zeta: &ZetaTable) -> Result<Vec<f64>> {
    if zeta.q() != kernel.q() {
        return Err(Error::Length { expected: kernel.q(), actual: zeta.q() });
    }
    Ok(kernel.partial_distances().iter().enumerate().map(|(d, &dist)| zeta.get(d) * (dist as f64).log2()).collect())
}

#[inline]
pub(crate) fn weight_from_terms(layer: &[f64], beta: f64, mut i: usize, m: usize) -> f64 {
    let q = layer.len();
    let mut w = 0.0;
    let mut pow = 1.0;
    for _ in 0..m {
        w += layer[i % q] * pow;
        pow *= beta;
        i /= q;
    }
    w
}

/// PDPW weight of input `i` at length `q^m`.
pub fn pdpw_weight(i: usize, config: &PdpwConfig, m: usize) -> f64 {
    config.weight(i, m)
}
