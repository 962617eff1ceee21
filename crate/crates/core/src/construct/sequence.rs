//! Reliability sequences and information-set selection.

use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GenieStats, PdpwConfig};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pdpw,
    Mc,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Pdpw => "pdpw",
            Method::Mc => "mc",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pdpw" => Ok(Method::Pdpw),
            "mc" => Ok(Method::Mc),
            _ => Err(Error::Config(format!("unknown construction method {s:?} (pdpw | mc)"))),
        }
    }
}

fn default_crc_placement() -> String {
    "tail".into()
}

/// Inputs ranked from most to least reliable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilitySequence {
    pub q: usize,
    pub m: usize,
    pub method: Method,
    pub beta: Option<f64>,
    pub zeta: Option<Vec<f64>>,
    pub design_ebn0_db: Option<f64>,
    pub seed: Option<u64>,
    /// Larger is more reliable. For Monte-Carlo sequences this is the
    /// negated error rate.
    pub weights: Vec<f64>,
    pub order: Vec<usize>,
    /// Where CRC bits sit among the information symbols.
    #[serde(default = "default_crc_placement")]
    pub crc_placement: String,
}

impl ReliabilitySequence {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.q.checked_pow(self.m as u32).ok_or(Error::SizeGuard { size: usize::MAX, limit: 1 << 26 })?;
        if self.weights.len() != n {
            return Err(Error::Length { expected: n, actual: self.weights.len() });
        }
        if self.order.len() != n {
            return Err(Error::Length { expected: n, actual: self.order.len() });
        }
        let mut seen = vec![false; n];
        for &i in &self.order {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Config(format!("order is not a permutation of 0..{n} (at {i})")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|source| Error::Json { path: "<sequence>".into(), source })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let seq: Self =
            serde_json::from_str(text).map_err(|source| Error::Json { path: "<sequence>".into(), source })?;
        seq.validate()?;
        Ok(seq)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        let seq: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.display().to_string(),
            source,
        })?;
        seq.validate()?;
        Ok(seq)
    }

    /// Most reliable `k` inputs, ascending.
    pub fn info_set(&self, k: usize) -> Result<Vec<usize>> {
        select_info_set(self, k)
    }
}

pub enum SequenceSource<'a> {
    Pdpw(&'a PdpwConfig),
    Mc(&'a GenieStats),
}

/// Ranks all `n = q^m` inputs. Equal weights go to the larger index, which
/// is also the order the partial order would impose since a dominating
/// input always has the larger index.
pub fn build_sequence(n: usize, source: SequenceSource<'_>) -> Result<ReliabilitySequence> {
    let (q, tie): (usize, Option<&GenieStats>) = match &source {
        SequenceSource::Pdpw(c) => (c.q(), None),
        SequenceSource::Mc(s) => (s.q(), Some(*s)),
    };
    let mut m = 0;
    let mut len = 1usize;
    while len < n {
        len = len.checked_mul(q).ok_or(Error::SizeGuard { size: n, limit: 1 << 26 })?;
        m += 1;
    }
    if len != n || n == 1 {
        return Err(Error::Config(format!("length {n} is not a positive power of q = {q}")));
    }
    let weights = match &source {
        SequenceSource::Pdpw(c) => c.weights(m)?,
        SequenceSource::Mc(s) => {
            if s.len() != n {
                return Err(Error::Length { expected: n, actual: s.len() });
            }
            (0..n).map(|i| -s.error_rate(i)).collect()
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let primary = weights[b].total_cmp(&weights[a]);
        let soft = match tie {
            Some(s) => s.soft_error_rate(a).total_cmp(&s.soft_error_rate(b)),
            None => Ordering::Equal,
        };
        primary.then(soft).then(b.cmp(&a))
    });
    let seq = match source {
        SequenceSource::Pdpw(c) => ReliabilitySequence {
            q,
            m,
            method: Method::Pdpw,
            beta: Some(c.beta()),
            zeta: Some(c.zeta().values().to_vec()),
            design_ebn0_db: Some(c.zeta().design_eb_n0_db()),
            seed: None,
            weights,
            order,
            crc_placement: default_crc_placement(),
        },
        SequenceSource::Mc(s) => ReliabilitySequence {
            q,
            m,
            method: Method::Mc,
            beta: None,
            zeta: None,
            design_ebn0_db: s.design_ebn0_db(),
            seed: Some(s.seed()),
            weights,
            order,
            crc_placement: default_crc_placement(),
        },
    };
    Ok(seq)
}

/// First `k` entries of the order, returned ascending.
pub fn select_info_set(seq: &ReliabilitySequence, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > seq.len() {
        return Err(Error::OutOfRange { index: k, limit: seq.len() });
    }
    let mut set = seq.order[..k].to_vec();
    set.sort_unstable();
    Ok(set)
}
