//! Rate matching by puncturing coded bits.
//!
//! Removing `d = N_b - M_b` bits touches `l = ceil(d / t)` coded symbols:
//! `l - 1` (or `l` when `t | d`) are dropped whole and the last loses
//! `sigma = d mod t` bits. The chosen symbols must be frozen at the encoder
//! input, which is checked against the information set. Minimum-weight
//! puncturing takes the least reliable frozen symbols; the smallest-index
//! baseline takes the lowest frozen indices.

use serde::{Deserialize, Serialize};

use crate::channel::Posteriors;
use crate::construct::ReliabilitySequence;
use crate::error::{Error, Result};
use crate::galois::FieldSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialSymbol {
    pub index: usize,
    /// Punctured bits in `[1, t)`, taken from the end of the symbol's bit
    /// tuple.
    pub sigma: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuncturePattern {
    /// Symbols not transmitted at all.
    pub full_symbols: Vec<usize>,
    pub partial: Option<PartialSymbol>,
    /// Punctured bit positions, ascending.
    pub bits: Vec<usize>,
    pub n_bits: usize,
    pub m_bits: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Mpwp,
    Sip,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mpwp" => Ok(Scheme::Mpwp),
            "sip" => Ok(Scheme::Sip),
            _ => Err(Error::Config(format!("unknown puncturing scheme {s:?} (mpwp | sip)"))),
        }
    }
}

impl PuncturePattern {
    /// Nothing punctured.
    pub fn none(n_bits: usize) -> Self {
        PuncturePattern { full_symbols: Vec::new(), partial: None, bits: Vec::new(), n_bits, m_bits: n_bits }
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Symbols touched by the pattern; all of them are frozen inputs.
    pub fn frozen_additions(&self) -> Vec<usize> {
        let mut v = self.full_symbols.clone();
        v.extend(self.partial.map(|p| p.index));
        v.sort_unstable();
        v
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|source| Error::Json { path: "<pattern>".into(), source })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Json { path: "<pattern>".into(), source })
    }
}

/// Builds the pattern from symbols ranked by puncturing preference.
fn pattern_from_ranked(ranked: &[usize], n_bits: usize, m_bits: usize, t: usize) -> Result<PuncturePattern> {
    let d = n_bits - m_bits;
    if d == 0 {
        return Ok(PuncturePattern::none(n_bits));
    }
    let l = d.div_ceil(t);
    if l > ranked.len() {
        return Err(Error::Infeasible(format!(
            "puncturing {d} bits needs {l} frozen symbols, only {} available",
            ranked.len()
        )));
    }
    let sigma = d % t;
    let chosen = &ranked[..l];
    let (full, partial) = if sigma > 0 {
        (&chosen[..l - 1], Some(PartialSymbol { index: chosen[l - 1], sigma }))
    } else {
        (chosen, None)
    };
    let mut bits: Vec<usize> = full.iter().flat_map(|&r| r * t..(r + 1) * t).collect();
    if let Some(p) = partial {
        bits.extend(p.index * t + t - p.sigma..(p.index + 1) * t);
    }
    bits.sort_unstable();
    Ok(PuncturePattern { full_symbols: full.to_vec(), partial, bits, n_bits, m_bits })
}

fn check_lengths(n: usize, n_bits: usize, m_bits: usize, t: usize) -> Result<()> {
    if n * t != n_bits {
        return Err(Error::Length { expected: n * t, actual: n_bits });
    }
    if m_bits > n_bits {
        return Err(Error::Config(format!("M_b = {m_bits} exceeds N_b = {n_bits}")));
    }
    if m_bits == 0 {
        return Err(Error::Config("M_b must be positive".into()));
    }
    Ok(())
}

fn frozen_mask(n: usize, info_set: &[usize]) -> Result<Vec<bool>> {
    let mut frozen = vec![true; n];
    for &i in info_set {
        if i >= n {
            return Err(Error::OutOfRange { index: i, limit: n });
        }
        frozen[i] = false;
    }
    Ok(frozen)
}

/// Minimum-weight puncturing: frozen symbols in increasing reliability.
pub fn mpwp_pattern(
    seq: &ReliabilitySequence,
    info_set: &[usize],
    n_bits: usize,
    m_bits: usize,
    t: usize,
) -> Result<PuncturePattern> {
    let n = seq.len();
    check_lengths(n, n_bits, m_bits, t)?;
    let frozen = frozen_mask(n, info_set)?;
    let ranked: Vec<usize> = seq.order.iter().rev().copied().filter(|&i| frozen[i]).collect();
    pattern_from_ranked(&ranked, n_bits, m_bits, t)
}

/// Smallest-index puncturing over the frozen set.
pub fn sip_pattern(info_set: &[usize], n_bits: usize, m_bits: usize, t: usize) -> Result<PuncturePattern> {
    if t == 0 || n_bits % t != 0 {
        return Err(Error::Length { expected: n_bits.div_ceil(t.max(1)) * t.max(1), actual: n_bits });
    }
    let n = n_bits / t;
    check_lengths(n, n_bits, m_bits, t)?;
    let frozen = frozen_mask(n, info_set)?;
    let ranked: Vec<usize> = (0..n).filter(|&i| frozen[i]).collect();
    pattern_from_ranked(&ranked, n_bits, m_bits, t)
}

/// Drops the punctured positions, keeping order.
pub fn apply_puncture(code_bits: &[u8], pattern: &PuncturePattern) -> Result<Vec<u8>> {
    if code_bits.len() != pattern.n_bits {
        return Err(Error::Length { expected: pattern.n_bits, actual: code_bits.len() });
    }
    let mut out = Vec::with_capacity(pattern.m_bits);
    let mut skip = pattern.bits.iter().peekable();
    for (pos, &b) in code_bits.iter().enumerate() {
        if skip.peek() == Some(&&pos) {
            skip.next();
        } else {
            out.push(b);
        }
    }
    Ok(out)
}

/// Reinserts zero LLRs at punctured positions.
pub fn pad_llrs(received: &[f64], pattern: &PuncturePattern) -> Result<Vec<f64>> {
    if received.len() != pattern.m_bits {
        return Err(Error::Length { expected: pattern.m_bits, actual: received.len() });
    }
    let mut out = Vec::with_capacity(pattern.n_bits);
    let mut skip = pattern.bits.iter().peekable();
    let mut src = received.iter();
    for pos in 0..pattern.n_bits {
        if skip.peek() == Some(&&pos) {
            skip.next();
            out.push(0.0);
        } else {
            out.push(*src.next().expect("length checked"));
        }
    }
    Ok(out)
}

/// Symbol posteriors for the full codeword from received LLRs; punctured
/// bits are uninformative.
pub fn pad_posteriors(received: &[f64], pattern: &PuncturePattern, field: &FieldSpec) -> Result<Posteriors> {
    Posteriors::from_bit_llrs(field, &pad_llrs(received, pattern)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_sequence, select_info_set, PdpwConfig, SequenceSource, ZetaTable};
    use crate::galois::Symbol;
    use crate::kernel::RsKernel;
    use proptest::prelude::*;

    fn seq(t: u32, m: usize) -> ReliabilitySequence {
        let k = RsKernel::new(&FieldSpec::new(t).unwrap()).unwrap();
        let q = k.q();
        let zeta = ZetaTable::default_for(q).unwrap_or_else(|_| {
            ZetaTable::new((0..q).map(|d| d as f64 / (q - 1) as f64).collect(), 0.0, 0).unwrap()
        });
        let cfg = PdpwConfig::new(k, zeta, 1.512).unwrap();
        build_sequence(q.pow(m as u32), SequenceSource::Pdpw(&cfg)).unwrap()
    }

    #[test]
    fn no_puncturing_is_empty() {
        let s = seq(2, 2);
        let info = select_info_set(&s, 8).unwrap();
        let p = mpwp_pattern(&s, &info, 32, 32, 2).unwrap();
        assert!(p.is_empty());
        assert!(sip_pattern(&info, 32, 32, 2).unwrap().is_empty());
        let bits: Vec<u8> = (0..32).map(|i| (i % 3 == 0) as u8).collect();
        assert_eq!(apply_puncture(&bits, &p).unwrap(), bits);
        let llr: Vec<f64> = (0..32).map(|i| i as f64).collect();
        assert_eq!(pad_llrs(&llr, &p).unwrap(), llr);
    }

    #[test]
    fn shapes_for_n16() {
        let s = seq(2, 2);
        let info = select_info_set(&s, 8).unwrap();
        let p = mpwp_pattern(&s, &info, 32, 27, 2).unwrap();
        assert_eq!(p.full_symbols.len(), 2);
        let part = p.partial.unwrap();
        assert_eq!(part.sigma, 1);
        assert_eq!(p.bits.len(), 5);
        assert!(p.bits.contains(&(part.index * 2 + 1)));
        assert!(!p.bits.contains(&(part.index * 2)));

        let p = mpwp_pattern(&s, &info, 32, 26, 2).unwrap();
        assert_eq!((p.full_symbols.len(), p.partial, p.bits.len()), (3, None, 6));
    }

    #[test]
    fn mpwp_takes_least_reliable_frozen() {
        let s = seq(2, 2);
        let info = select_info_set(&s, 8).unwrap();
        let p = mpwp_pattern(&s, &info, 32, 25, 2).unwrap();
        let touched = p.frozen_additions();
        let frozen: Vec<usize> = (0..16).filter(|i| !info.contains(i)).collect();
        for &r in &touched {
            assert!(!info.contains(&r));
            for &f in frozen.iter().filter(|f| !touched.contains(f)) {
                assert!(s.weights[r] <= s.weights[f]);
            }
        }
        // Ranked ascending by weight, so the partial symbol is the heaviest.
        let part = p.partial.unwrap().index;
        assert!(p.full_symbols.iter().all(|&r| s.weights[r] <= s.weights[part]));
    }

    #[test]
    fn sip_takes_smallest_indices() {
        let info: Vec<usize> = (8..16).collect();
        let p = sip_pattern(&info, 32, 28, 2).unwrap();
        assert_eq!(p.full_symbols, vec![0, 1]);
        assert_eq!(p.bits, vec![0, 1, 2, 3]);
        let info = [0usize, 2, 9, 15];
        let p = sip_pattern(&info, 32, 27, 2).unwrap();
        assert_eq!(p.full_symbols, vec![1, 3]);
        assert_eq!(p.partial, Some(PartialSymbol { index: 4, sigma: 1 }));
    }

    #[test]
    fn mpwp_differs_from_sip_when_orders_differ() {
        let s = seq(2, 2);
        let info = select_info_set(&s, 8).unwrap();
        let a = mpwp_pattern(&s, &info, 32, 28, 2).unwrap();
        let b = sip_pattern(&info, 32, 28, 2).unwrap();
        let frozen: Vec<usize> = (0..16).filter(|i| !info.contains(i)).collect();
        let by_weight: Vec<usize> = s.order.iter().rev().copied().filter(|i| frozen.contains(i)).take(2).collect();
        let mut by_weight_sorted = by_weight.clone();
        by_weight_sorted.sort();
        if by_weight_sorted != frozen[..2] {
            assert_ne!(a.frozen_additions(), b.frozen_additions());
        }
        assert_eq!(a.full_symbols, by_weight);
    }

    #[test]
    fn infeasible_and_bad_lengths() {
        let s = seq(2, 2);
        let info = select_info_set(&s, 14).unwrap();
        assert!(mpwp_pattern(&s, &info, 32, 27, 2).is_err());
        assert!(mpwp_pattern(&s, &info, 32, 33, 2).is_err());
        assert!(mpwp_pattern(&s, &info, 30, 27, 2).is_err());
        assert!(sip_pattern(&info, 32, 0, 2).is_err());
        let p = sip_pattern(&[15], 32, 30, 2).unwrap();
        assert!(apply_puncture(&[0; 31], &p).is_err());
        assert!(pad_llrs(&[0.0; 31], &p).is_err());
    }

    #[test]
    fn punctured_symbol_posteriors() {
        let f = FieldSpec::new(2).unwrap();
        let p = sip_pattern(&[3], 8, 5, 2).unwrap();
        // Symbol 0 fully punctured, symbol 1 loses its last bit.
        assert_eq!(p.full_symbols, vec![0]);
        assert_eq!(p.partial, Some(PartialSymbol { index: 1, sigma: 1 }));
        let received = [40.0, 40.0, 40.0, 40.0, 40.0];
        let post = pad_posteriors(&received, &p, &f).unwrap();
        assert!(post.symbol(0).iter().all(|&v| (v - 0.25).abs() < 1e-12));
        let s1 = post.symbol(1);
        let zero_first: Vec<usize> =
            (0..4).filter(|&v| f.symbol_bit(Symbol(v as u8), 0) == 0).collect();
        assert_eq!(zero_first.len(), 2);
        for v in 0..4 {
            let want = if zero_first.contains(&v) { 0.5 } else { 0.0 };
            assert!((s1[v] - want).abs() < 1e-12, "{s1:?}");
        }
        assert!(post.symbol(2)[0] > 1.0 - 1e-12);
    }

    #[test]
    fn pattern_json_shape() {
        let p = sip_pattern(&[3], 8, 5, 2).unwrap();
        let text = p.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["full_symbols"], serde_json::json!([0]));
        assert_eq!(v["partial"], serde_json::json!({"index": 1, "sigma": 1}));
        assert_eq!(v["bits"], serde_json::json!([0, 1, 3]));
        assert_eq!(PuncturePattern::from_json(&text).unwrap(), p);
        let e = PuncturePattern::none(8).to_json().unwrap();
        assert!(e.contains("\"partial\": null"));
    }

    #[test]
    fn bit_counts_exhaustive_small() {
        for (t, m) in [(1u32, 1usize), (1, 3), (1, 7), (2, 1), (2, 2), (2, 3), (3, 1)] {
            let s = seq(t, m);
            let n = s.len();
            let nb = n * t as usize;
            let info = select_info_set(&s, 1).unwrap();
            for mb in 1..=nb {
                let d = nb - mb;
                let feasible = d.div_ceil(t as usize) <= n - 1;
                for p in [mpwp_pattern(&s, &info, nb, mb, t as usize), sip_pattern(&info, nb, mb, t as usize)] {
                    match p {
                        Ok(p) => {
                            assert!(feasible);
                            assert_eq!(p.bits.len(), d);
                            let tx = apply_puncture(&vec![0u8; nb], &p).unwrap();
                            assert_eq!(tx.len(), mb);
                        }
                        Err(_) => assert!(!feasible, "t={t} m={m} mb={mb}"),
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn pad_inverts_puncture(seed in any::<u64>(), mb in 17usize..=32) {
            let info: Vec<usize> = (8..16).collect();
            let p = sip_pattern(&info, 32, mb, 2).unwrap();
            let bits: Vec<u8> = (0..32).map(|i| ((seed >> (i % 64)) & 1) as u8).collect();
            let tx = apply_puncture(&bits, &p).unwrap();
            prop_assert_eq!(tx.len(), mb);
            let llr: Vec<f64> = tx.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect();
            let padded = pad_llrs(&llr, &p).unwrap();
            for (pos, (&b, &l)) in bits.iter().zip(&padded).enumerate() {
                if p.bits.contains(&pos) {
                    prop_assert_eq!(l, 0.0);
                } else {
                    prop_assert_eq!(l, if b == 0 { 1.0 } else { -1.0 });
                }
            }
        }
    }
}
