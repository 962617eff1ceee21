//! Monte-Carlo estimate of `zeta(i) = I(W^(i)) / I(W_g^(i))` on one kernel.
//!
//! `W^(i)` is the kernel sub-channel seen by SC: the posterior of `s_i`
//! given the channel output and the true `s_0..s_{i-1}`. `W_g^(i)` adds a
//! genie that also reveals `s_{i+1}..s_{q-1}`. The genie channel transmits
//! through `G'`, which is `G` with row `i` replaced by a minimum-weight
//! vector of its coset, so `s_i` reaches exactly `D_i` outputs.

use serde::{Deserialize, Serialize};

use super::ZetaTable;
use crate::channel::{normalize, posterior_from_llrs, AwgnChannel, InformationAccumulator};
use crate::codec::MarginalTables;
use crate::error::{Error, Result};
use crate::galois::Symbol;
use crate::kernel::RsKernel;
use crate::seed::{chunked, trial_rng};
use rand::Rng;

const ZETA_STREAM: u64 = 0x7a65_7461;
const CHUNK: u64 = 1024;

/// How the genie-aided mutual information is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenieMode {
    /// Simulate the genie channel through the minimum-weight coset row.
    #[default]
    MinWeightRow,
    /// Use `I(W^(q-1))` for every genie channel.
    LastSubchannel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZetaConfig {
    pub eb_n0_db: f64,
    /// Rate used to turn Eb/N0 into a noise variance. All `q` inputs are
    /// information in a single-kernel transmission, so this defaults to 1.
    pub rate: f64,
    pub trials: u64,
    pub seed: u64,
    pub mode: GenieMode,
}

impl Default for ZetaConfig {
    fn default() -> Self {
        ZetaConfig { eb_n0_db: -1.8, rate: 1.0, trials: 100_000, seed: 0, mode: GenieMode::MinWeightRow }
    }
}

/// Estimate plus the raw mutual informations behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct ZetaEstimate {
    pub table: ZetaTable,
    /// `I(W^(i))` in bits.
    pub actual: Vec<f64>,
    /// `I(W_g^(i))` in bits.
    pub genie: Vec<f64>,
    /// Unpinned, clamped ratios.
    pub raw: Vec<f64>,
}

pub fn estimate_zeta(kernel: &RsKernel, config: &ZetaConfig) -> Result<ZetaTable> {
    Ok(estimate_zeta_detailed(kernel, config)?.table)
}

pub fn estimate_zeta_detailed(kernel: &RsKernel, config: &ZetaConfig) -> Result<ZetaEstimate> {
    if config.trials == 0 {
        return Err(Error::Config("zeta estimation needs at least one trial".into()));
    }
    let q = kernel.q();
    let channel = AwgnChannel::from_eb_n0(config.eb_n0_db, config.rate)?;
    let genie_rows: Option<Vec<Vec<u8>>> = match config.mode {
        GenieMode::LastSubchannel => None,
        GenieMode::MinWeightRow => Some(
            (0..q)
                .map(|i| {
                    kernel.min_weight_row(i).map(|r| r.iter().map(|s| s.0).collect()).ok_or_else(|| {
                        Error::Domain(format!("no minimum-weight coset rows for q = {q}; use the last-subchannel mode"))
                    })
                })
                .collect::<Result<_>>()?,
        ),
    };
    let tables = MarginalTables::new(kernel);

    let parts = chunked(config.trials, CHUNK, |range| {
        let mut sim = Sim::new(kernel, &tables, &channel, genie_rows.as_deref());
        for trial in range {
            let mut rng = trial_rng(config.seed, ZETA_STREAM, trial);
            sim.trial(&mut rng)?;
        }
        Ok::<_, Error>((sim.actual, sim.genie))
    });
    let mut actual = vec![InformationAccumulator::new(q); q];
    let mut genie = vec![InformationAccumulator::new(q); q];
    for part in parts {
        let (a, g) = part?;
        for i in 0..q {
            actual[i].merge(&a[i]);
            genie[i].merge(&g[i]);
        }
    }

    let actual: Vec<f64> = actual.iter().map(InformationAccumulator::mean).collect::<Result<_>>()?;
    let genie: Vec<f64> = match config.mode {
        GenieMode::LastSubchannel => vec![actual[q - 1]; q],
        GenieMode::MinWeightRow => genie.iter().map(InformationAccumulator::mean).collect::<Result<_>>()?,
    };
    let mut raw = Vec::with_capacity(q);
    for i in 0..q {
        if genie[i] < 1e-9 {
            return Err(Error::Estimation(format!(
                "genie mutual information of input {i} is {:.3e} bits at {} dB; raise the design SNR",
                genie[i], config.eb_n0_db
            )));
        }
        raw.push((actual[i] / genie[i]).clamp(0.0, 1.0));
    }
    let mut values = raw.clone();
    values[0] = 0.0;
    values[q - 1] = 1.0;
    let table = ZetaTable::new(values, config.eb_n0_db, config.trials)?;
    Ok(ZetaEstimate { table, actual, genie, raw })
}

/// Scratch space for one worker.
struct Sim<'a> {
    kernel: &'a RsKernel,
    tables: &'a MarginalTables,
    channel: &'a AwgnChannel,
    genie_rows: Option<&'a [Vec<u8>]>,
    q: usize,
    s: Vec<Symbol>,
    c: Vec<Symbol>,
    bits: Vec<u8>,
    y: Vec<f64>,
    probs: Vec<f64>,
    out: Vec<f64>,
    actual: Vec<InformationAccumulator>,
    genie: Vec<InformationAccumulator>,
}

impl<'a> Sim<'a> {
    fn new(
        kernel: &'a RsKernel,
        tables: &'a MarginalTables,
        channel: &'a AwgnChannel,
        genie_rows: Option<&'a [Vec<u8>]>,
    ) -> Self {
        let q = kernel.q();
        Sim {
            kernel,
            tables,
            channel,
            genie_rows,
            q,
            s: vec![Symbol::ZERO; q],
            c: vec![Symbol::ZERO; q],
            bits: Vec::new(),
            y: Vec::new(),
            probs: vec![0.0; q * q],
            out: vec![0.0; q],
            actual: vec![InformationAccumulator::new(q); q],
            genie: vec![InformationAccumulator::new(q); q],
        }
    }

    /// Sends `c` and fills `probs` with per-position posteriors.
    fn send(&mut self, rng: &mut impl Rng) -> Result<()> {
        let field = self.kernel.field();
        let t = field.t() as usize;
        self.bits = field.unpack_symbols(&self.c);
        self.channel.transmit_into(&self.bits, rng, &mut self.y);
        for (j, chunk) in self.y.chunks(t).enumerate() {
            let llrs: Vec<f64> = chunk.iter().map(|&v| self.channel.llr(v)).collect();
            posterior_from_llrs(field, &llrs, &mut self.probs[j * self.q..(j + 1) * self.q])?;
        }
        Ok(())
    }

    fn trial(&mut self, rng: &mut impl Rng) -> Result<()> {
        let q = self.q;
        for s in self.s.iter_mut() {
            *s = Symbol(rng.random_range(0..q) as u8);
        }
        self.kernel.apply(&self.s, &mut self.c);
        self.send(rng)?;
        let mut prefix = vec![0u8; q];
        for i in 0..q {
            for (col, p) in prefix.iter_mut().enumerate() {
                *p = self.tables.prefix_symbol(self.s[..i].iter().map(|s| s.0), col);
            }
            let mass = self.tables.marginal_raw(&self.probs, &prefix, i, &mut self.out);
            if !(mass > 0.0) {
                return Err(Error::Numerical(format!("zero marginal mass at input {i}")));
            }
            normalize(&mut self.out)?;
            self.actual[i].push(&self.out);
        }
        if let Some(rows) = self.genie_rows {
            for (i, row) in rows.iter().enumerate() {
                self.genie_trial(i, row, rng)?;
            }
        }
        Ok(())
    }

    /// Transmits `s G'` with row `i` of `G'` equal to `row`, then computes the
    /// posterior of `s_i` with every other input known.
    fn genie_trial(&mut self, i: usize, row: &[u8], rng: &mut impl Rng) -> Result<()> {
        let q = self.q;
        let f = self.kernel.field();
        let mut known = vec![Symbol::ZERO; q];
        for (b, &sb) in self.s.iter().enumerate() {
            if b == i {
                continue;
            }
            for (j, k) in known.iter_mut().enumerate() {
                *k = f.add(*k, f.mul(sb, self.kernel.entry(b, j)));
            }
        }
        for j in 0..q {
            self.c[j] = f.add(known[j], f.mul(self.s[i], Symbol(row[j])));
        }
        self.send(rng)?;
        for eta in 0..q {
            let mut p = 1.0;
            for j in 0..q {
                let x = f.add(known[j], f.mul(Symbol(eta as u8), Symbol(row[j])));
                p *= self.probs[j * q + x.value()];
            }
            self.out[eta] = p;
        }
        normalize(&mut self.out)?;
        self.genie[i].push(&self.out);
        Ok(())
    }
}
