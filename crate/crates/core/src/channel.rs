//! BPSK over AWGN, per-symbol posteriors, and Monte-Carlo estimators for
//! mutual information and the Bhattacharyya parameter.
//!
//! Bit 0 is sent as +1 and bit 1 as -1. A received value `y` carries the bit
//! LLR `2y / sigma^2`; a symbol's log-likelihood is the sum of
//! `(1 - 2 b) * llr / 2` over its bits, so an LLR of zero (an erased or
//! punctured bit) contributes nothing.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::galois::{FieldSpec, Symbol};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AwgnChannel {
    noise_variance: f64,
    eb_n0_db: Option<f64>,
    rate: Option<f64>,
}

impl AwgnChannel {
    /// `sigma^2 = 1 / (2 R 10^{EbN0/10})`, with `R` the transmitted bit rate.
    pub fn from_eb_n0(eb_n0_db: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::Config(format!("code rate {rate} outside (0, 1]")));
        }
        if !eb_n0_db.is_finite() {
            return Err(Error::Config(format!("Eb/N0 {eb_n0_db} dB is not finite")));
        }
        let noise_variance = 1.0 / (2.0 * rate * 10f64.powf(eb_n0_db / 10.0));
        Ok(AwgnChannel { noise_variance, eb_n0_db: Some(eb_n0_db), rate: Some(rate) })
    }

    pub fn with_noise_variance(noise_variance: f64) -> Result<Self> {
        if !(noise_variance > 0.0) || noise_variance.is_nan() {
            return Err(Error::Config(format!("noise variance {noise_variance} must be positive")));
        }
        Ok(AwgnChannel { noise_variance, eb_n0_db: None, rate: None })
    }

    #[inline]
    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn eb_n0_db(&self) -> Option<f64> {
        self.eb_n0_db
    }

    pub fn rate(&self) -> Option<f64> {
        self.rate
    }

    /// `y_j = (1 - 2 bit_j) + n_j`.
    pub fn transmit<R: Rng + ?Sized>(&self, bits: &[u8], rng: &mut R) -> Vec<f64> {
        let mut y = Vec::with_capacity(bits.len());
        self.transmit_into(bits, rng, &mut y);
        y
    }

    pub fn transmit_into<R: Rng + ?Sized>(&self, bits: &[u8], rng: &mut R, out: &mut Vec<f64>) {
        let sigma = self.noise_variance.sqrt();
        out.clear();
        out.extend(bits.iter().map(|&b| {
            let n: f64 = StandardNormal.sample(rng);
            (1.0 - 2.0 * b as f64) + sigma * n
        }));
    }

    #[inline]
    pub fn llr(&self, y: f64) -> f64 {
        2.0 * y / self.noise_variance
    }

    pub fn llrs(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|&v| self.llr(v)).collect()
    }
}

/// Probability vector over the `q` symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolPosterior {
    probs: Vec<f64>,
}

impl SymbolPosterior {
    /// Normalizes nonnegative weights.
    pub fn from_weights(mut probs: Vec<f64>) -> Result<Self> {
        normalize(&mut probs)?;
        Ok(SymbolPosterior { probs })
    }

    pub fn uniform(q: usize) -> Self {
        SymbolPosterior { probs: vec![1.0 / q as f64; q] }
    }

    pub fn one_hot(q: usize, s: Symbol) -> Self {
        let mut probs = vec![0.0; q];
        probs[s.value()] = 1.0;
        SymbolPosterior { probs }
    }

    /// Posterior from the `t` bit LLRs of one symbol.
    pub fn from_bit_llrs(field: &FieldSpec, llrs: &[f64]) -> Result<Self> {
        if llrs.len() != field.t() as usize {
            return Err(Error::Length { expected: field.t() as usize, actual: llrs.len() });
        }
        let mut probs = vec![0.0; field.q()];
        posterior_from_llrs(field, llrs, &mut probs)?;
        Ok(SymbolPosterior { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn q(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, s: Symbol) -> f64 {
        self.probs[s.value()]
    }

    /// Most likely symbol; ties go to the smaller symbol value.
    pub fn argmax(&self) -> Symbol {
        Symbol(argmax(&self.probs) as u8)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// `N` posteriors stored contiguously, `q` entries each.
#[derive(Clone, Debug, PartialEq)]
pub struct Posteriors {
    q: usize,
    data: Vec<f64>,
}

impl Posteriors {
    pub fn new(q: usize, data: Vec<f64>) -> Result<Self> {
        if q == 0 || data.len() % q != 0 {
            return Err(Error::Length { expected: data.len().div_ceil(q.max(1)) * q, actual: data.len() });
        }
        Ok(Posteriors { q, data })
    }

    pub fn uniform(q: usize, n: usize) -> Self {
        Posteriors { q, data: vec![1.0 / q as f64; q * n] }
    }

    pub fn from_symbols(items: &[SymbolPosterior]) -> Result<Self> {
        let q = items.first().map(|p| p.q()).unwrap_or(1);
        let mut data = Vec::with_capacity(q * items.len());
        for p in items {
            if p.q() != q {
                return Err(Error::Length { expected: q, actual: p.q() });
            }
            data.extend_from_slice(p.probs());
        }
        Ok(Posteriors { q, data })
    }

    /// Posteriors from one LLR per coded bit (`t` consecutive bits per symbol).
    pub fn from_bit_llrs(field: &FieldSpec, llrs: &[f64]) -> Result<Self> {
        let t = field.t() as usize;
        if llrs.len() % t != 0 {
            return Err(Error::Length { expected: llrs.len().div_ceil(t) * t, actual: llrs.len() });
        }
        let q = field.q();
        let mut data = vec![0.0; llrs.len() / t * q];
        for (chunk, out) in llrs.chunks(t).zip(data.chunks_mut(q)) {
            posterior_from_llrs(field, chunk, out)?;
        }
        Ok(Posteriors { q, data })
    }

    /// Channel output for a whole codeword, no puncturing.
    pub fn from_channel(field: &FieldSpec, channel: &AwgnChannel, y: &[f64]) -> Result<Self> {
        Self::from_bit_llrs(field, &channel.llrs(y))
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.q
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn symbol(&self, i: usize) -> &[f64] {
        &self.data[i * self.q..(i + 1) * self.q]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_symbol_posteriors(&self) -> Vec<SymbolPosterior> {
        self.data.chunks(self.q).map(|c| SymbolPosterior { probs: c.to_vec() }).collect()
    }
}

/// Received values of one symbol -> posterior under uniform prior.
pub fn symbol_posteriors(y_bits: &[f64], channel: &AwgnChannel, field: &FieldSpec) -> Result<SymbolPosterior> {
    if y_bits.len() != field.t() as usize {
        return Err(Error::Length { expected: field.t() as usize, actual: y_bits.len() });
    }
    SymbolPosterior::from_bit_llrs(field, &channel.llrs(y_bits))
}

/// Writes the normalized symbol posterior for one symbol's bit LLRs.
#[inline]
pub(crate) fn posterior_from_llrs(field: &FieldSpec, llrs: &[f64], out: &mut [f64]) -> Result<()> {
    let q = field.q();
    for (eta, slot) in out.iter_mut().enumerate().take(q) {
        let s = Symbol(eta as u8);
        let mut ll = 0.0;
        for (b, &l) in llrs.iter().enumerate() {
            if field.symbol_bit(s, b) == 0 {
                ll += 0.5 * l;
            } else {
                ll -= 0.5 * l;
            }
        }
        *slot = ll;
    }
    let max = out[..q].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Numerical(format!("non-finite symbol log-likelihood {max}")));
    }
    for v in out[..q].iter_mut() {
        *v = (*v - max).exp();
    }
    normalize(&mut out[..q])
}

pub(crate) fn normalize(p: &mut [f64]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if !(sum > 0.0) || !sum.is_finite() {
        return Err(Error::Numerical(format!("posterior mass {sum} cannot be normalized")));
    }
    p.iter_mut().for_each(|v| *v /= sum);
    Ok(())
}

/// Index of the largest entry; first one wins ties.
#[inline]
pub(crate) fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// `log2 q + sum_eta p log2 p` for one posterior (0 log 0 = 0).
#[inline]
pub fn information_sample(probs: &[f64]) -> f64 {
    let mut v = (probs.len() as f64).log2();
    for &p in probs {
        if p > 0.0 {
            v += p * p.log2();
        }
    }
    v
}

/// Streaming mean of [`information_sample`].
#[derive(Clone, Debug, Default)]
pub struct InformationAccumulator {
    sum: f64,
    count: u64,
    q: usize,
}

impl InformationAccumulator {
    pub fn new(q: usize) -> Self {
        InformationAccumulator { sum: 0.0, count: 0, q }
    }

    pub fn push(&mut self, probs: &[f64]) {
        self.sum += information_sample(probs);
        self.count += 1;
    }

    pub fn merge(&mut self, other: &InformationAccumulator) {
        self.sum += other.sum;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Mean over samples, clamped to `[0, log2 q]`.
    pub fn mean(&self) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::Estimation("mutual information of an empty sample set".into()));
        }
        Ok((self.sum / self.count as f64).clamp(0.0, (self.q as f64).log2()))
    }
}

/// Monte-Carlo mutual information estimate from posterior samples.
pub fn estimate_i(samples: &[SymbolPosterior]) -> Result<f64> {
    let q = samples.first().map(SymbolPosterior::q).unwrap_or(0);
    let mut acc = InformationAccumulator::new(q);
    for s in samples {
        if s.q() != q {
            return Err(Error::Length { expected: q, actual: s.q() });
        }
        acc.push(s.probs());
    }
    acc.mean()
}

/// `ln W(y | x)` up to a term that does not depend on `x`.
fn symbol_log_likelihoods(field: &FieldSpec, channel: &AwgnChannel, y: &[f64], out: &mut [f64]) {
    for (x, slot) in out.iter_mut().enumerate() {
        let s = Symbol(x as u8);
        *slot = y
            .iter()
            .enumerate()
            .map(|(b, &v)| if field.symbol_bit(s, b) == 0 { v } else { -v })
            .sum::<f64>()
            / channel.noise_variance();
    }
}

/// Bhattacharyya parameter of the symbol channel, estimated as
/// `E[sqrt(W(y|x') / W(y|x))]` with `y` drawn under a uniform input `x`,
/// averaged over all `x' != x`.
pub fn estimate_z<R: Rng + ?Sized>(
    channel: &AwgnChannel,
    field: &FieldSpec,
    n_samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::Estimation("Bhattacharyya estimate needs at least one sample".into()));
    }
    let q = field.q();
    let mut ll = vec![0.0; q];
    let mut total = 0.0;
    for _ in 0..n_samples {
        let x = Symbol(rng.random_range(0..q) as u8);
        let y = channel.transmit(&field.symbol_to_bits(x), rng);
        symbol_log_likelihoods(field, channel, &y, &mut ll);
        let lx = ll[x.value()];
        let s: f64 = (0..q).filter(|&x2| x2 != x.value()).map(|x2| (0.5 * (ll[x2] - lx)).exp()).sum();
        total += s / (q - 1) as f64;
    }
    Ok(total / n_samples as f64)
}

/// Pairwise `Z_{x,x'}` (row-major `q x q`, zero diagonal); every sample
/// draws one output per input.
pub fn estimate_z_pairwise<R: Rng + ?Sized>(
    channel: &AwgnChannel,
    field: &FieldSpec,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n_samples == 0 {
        return Err(Error::Estimation("Bhattacharyya estimate needs at least one sample".into()));
    }
    let q = field.q();
    let mut ll = vec![0.0; q];
    let mut acc = vec![0.0; q * q];
    for _ in 0..n_samples {
        for x in 0..q {
            let y = channel.transmit(&field.symbol_to_bits(Symbol(x as u8)), rng);
            symbol_log_likelihoods(field, channel, &y, &mut ll);
            for x2 in (0..q).filter(|&x2| x2 != x) {
                acc[x * q + x2] += (0.5 * (ll[x2] - ll[x])).exp();
            }
        }
    }
    acc.iter_mut().for_each(|v| *v /= n_samples as f64);
    Ok(acc)
}

/// `P_e(W) <= (q - 1) Z(W)`.
pub fn pe_bound(z: f64, q: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("Bhattacharyya parameter {z} outside [0, 1]")));
    }
    Ok((q - 1) as f64 * z)
}
