//! Genie-aided Monte-Carlo reliability estimate.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::channel::{AwgnChannel, Posteriors};
use crate::codec::{genie_sc_decode, GenieTally, MarginalTables};
use crate::error::{Error, Result};
use crate::galois::Symbol;
use crate::kernel::RsKernel;
use crate::seed::{chunked, trial_rng};
use rand::Rng;

const MC_STREAM: u64 = 0x6d63;
const CHUNK: u64 = 64;

/// Per-input error counts from genie-aided SC.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenieStats {
    q: usize,
    m: usize,
    trials: u64,
    errors: Vec<u64>,
    /// Sum of `1 - P(true symbol)`; separates inputs with equal counts.
    soft_errors: Vec<f64>,
    design_ebn0_db: Option<f64>,
    seed: u64,
}

impl GenieStats {
    pub fn from_counts(
        q: usize,
        m: usize,
        trials: u64,
        errors: Vec<u64>,
        soft_errors: Vec<f64>,
        design_ebn0_db: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        let n = q.checked_pow(m as u32).ok_or(Error::SizeGuard { size: usize::MAX, limit: 1 << 26 })?;
        if errors.len() != n || soft_errors.len() != n {
            return Err(Error::Length { expected: n, actual: errors.len().min(soft_errors.len()) });
        }
        if let Some(&e) = errors.iter().find(|&&e| e > trials) {
            return Err(Error::Config(format!("error count {e} exceeds {trials} trials")));
        }
        Ok(GenieStats { q, m, trials, errors, soft_errors, design_ebn0_db, seed })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn errors(&self) -> &[u64] {
        &self.errors
    }

    pub fn soft_errors(&self) -> &[f64] {
        &self.soft_errors
    }

    pub fn design_ebn0_db(&self) -> Option<f64> {
        self.design_ebn0_db
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn error_rate(&self, i: usize) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.errors[i] as f64 / self.trials as f64
    }

    pub fn soft_error_rate(&self, i: usize) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.soft_errors[i] / self.trials as f64
    }

    /// Two-proportion test at two standard errors: `Greater` when `i` has a
    /// significantly lower error rate than `j`.
    pub fn significantly_better(&self, i: usize, j: usize) -> Option<Ordering> {
        if i >= self.len() || j >= self.len() || self.trials == 0 {
            return None;
        }
        let t = self.trials as f64;
        let (pi, pj) = (self.error_rate(i), self.error_rate(j));
        let se = (pi * (1.0 - pi) / t + pj * (1.0 - pj) / t).sqrt();
        if se == 0.0 || (pi - pj).abs() <= 2.0 * se {
            return None;
        }
        Some(if pi < pj { Ordering::Greater } else { Ordering::Less })
    }
}

/// Genie-aided SC over `trials` random input vectors. Every input is
/// information; each decision is scored and then replaced by the truth.
pub fn mc_construct(kernel: &RsKernel, m: usize, channel: &AwgnChannel, trials: u64, seed: u64) -> Result<GenieStats> {
    let n = kernel.block_length(m)?;
    if m == 0 {
        return Err(Error::Config("Monte-Carlo construction needs m >= 1".into()));
    }
    let q = kernel.q();
    let tables = MarginalTables::new(kernel);
    let field = kernel.field();
    let parts = chunked(trials, CHUNK, |range| {
        let mut tally = GenieTally::new(n);
        let mut u = vec![Symbol::ZERO; n];
        let mut y = Vec::new();
        for trial in range {
            let mut rng = trial_rng(seed, MC_STREAM + m as u64, trial);
            for s in u.iter_mut() {
                *s = Symbol(rng.random_range(0..q) as u8);
            }
            let mut c = u.clone();
            kernel.encode_in_place(&mut c);
            channel.transmit_into(&field.unpack_symbols(&c), &mut rng, &mut y);
            let post = Posteriors::from_channel(field, channel, &y)?;
            genie_sc_decode(&post, &u, &tables, m, &mut tally)?;
        }
        Ok::<_, Error>(tally)
    });
    let mut total = GenieTally::new(n);
    for part in parts {
        total.merge(&part?);
    }
    GenieStats::from_counts(q, m, trials, total.errors, total.soft_errors, channel.eb_n0_db(), seed)
}
