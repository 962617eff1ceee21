use super::sc::{ScState, Tree};
use super::*;
use crate::channel::{AwgnChannel, Posteriors, SymbolPosterior};
use crate::galois::FieldSpec;
use crate::seed::trial_rng;
use proptest::prelude::*;
use rand::Rng;

fn kernel(t: u32) -> RsKernel {
    RsKernel::new(&FieldSpec::new(t).unwrap()).unwrap()
}

fn spec(t: u32, m: usize, info: &[usize], crc: Option<Crc>, l: usize) -> CodeSpec {
    CodeSpec::new(kernel(t), m, info, crc, l).unwrap()
}

fn noiseless(field: &FieldSpec, bits: &[u8]) -> Posteriors {
    let llrs: Vec<f64> = bits.iter().map(|&b| if b == 0 { 40.0 } else { -40.0 }).collect();
    Posteriors::from_bit_llrs(field, &llrs).unwrap()
}

fn noisy(spec: &CodeSpec, bits: &[u8], ebn0: f64, rng: &mut impl Rng) -> Posteriors {
    let rate = spec.info_bits() as f64 / spec.n_bits() as f64;
    let ch = AwgnChannel::from_eb_n0(ebn0, rate).unwrap();
    let y = ch.transmit(bits, rng);
    Posteriors::from_channel(spec.field(), &ch, &y).unwrap()
}

fn random_posteriors(rng: &mut impl Rng, q: usize, n: usize) -> Posteriors {
    let items: Vec<SymbolPosterior> = (0..n)
        .map(|_| SymbolPosterior::from_weights((0..q).map(|_| rng.random::<f64>() + 1e-3).collect()).unwrap())
        .collect();
    Posteriors::from_symbols(&items).unwrap()
}

/// `sum over completions of prod_j P_j(c_j)`, the unnormalized leaf posterior.
fn brute_leaf(k: &RsKernel, m: usize, p: &Posteriors, prefix: &[u8]) -> Vec<f64> {
    let q = k.q();
    let n = k.block_length(m).unwrap();
    let i = prefix.len();
    let free = n - i - 1;
    let mut out = vec![0.0; q];
    for a in 0..q {
        for tail in 0..q.pow(free as u32) {
            let mut u: Vec<Symbol> = prefix.iter().map(|&s| Symbol(s)).collect();
            u.push(Symbol(a as u8));
            let mut rest = tail;
            for _ in 0..free {
                u.push(Symbol((rest % q) as u8));
                rest /= q;
            }
            let c = k.encode(&u, m).unwrap();
            out[a] += c.iter().enumerate().map(|(j, s)| p.symbol(j)[s.value()]).product::<f64>();
        }
    }
    let total: f64 = out.iter().sum();
    out.iter().map(|v| v / total).collect()
}

fn check_leaves_against_brute(t: u32, m: usize, from: usize, seed: u64) {
    let k = kernel(t);
    let tables = MarginalTables::new(&k);
    let tree = Tree::new(&tables, m);
    let n = tree.n();
    let mut rng = trial_rng(seed, 0, 0);
    let p = random_posteriors(&mut rng, k.q(), n);
    let truth: Vec<u8> = (0..n).map(|_| rng.random_range(0..k.q()) as u8).collect();
    let mut st = ScState::new(&tree);
    for i in 0..n {
        let got = st.leaf_posterior(&tree, p.as_slice(), i).to_vec();
        if i >= from {
            let want = brute_leaf(&k, m, &p, &truth[..i]);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-10, "leaf {i}: {got:?} vs {want:?}");
            }
        }
        st.decide(&tree, i, truth[i]);
    }
}

#[test]
fn leaf_posteriors_match_brute_force_binary() {
    check_leaves_against_brute(1, 3, 0, 1);
    check_leaves_against_brute(1, 4, 0, 2);
}

#[test]
fn leaf_posteriors_match_brute_force_gf4() {
    check_leaves_against_brute(2, 1, 0, 3);
    check_leaves_against_brute(2, 2, 12, 4);
}

#[test]
fn leaf_posteriors_match_brute_force_gf8() {
    check_leaves_against_brute(3, 1, 0, 5);
}

#[test]
fn exhaustive_noiseless_roundtrip_n16() {
    let s = spec(2, 2, &[7, 11, 13, 14, 15], None, 1);
    for word in 0..(1u32 << s.info_bits()) {
        let bits: Vec<u8> = (0..s.info_bits()).rev().map(|b| ((word >> b) & 1) as u8).collect();
        let cw = encode_codeword(&bits, &s).unwrap();
        let u = s.place_info(&bits).unwrap();
        assert_eq!(s.field().pack_bits(&cw).unwrap(), s.kernel().encode(&u, 2).unwrap());
        let post = noiseless(s.field(), &cw);
        assert_eq!(sc_decode(&post, &s).unwrap(), u);
        let out = ca_scl_decode(&post, &s.with_list_size(4).unwrap()).unwrap();
        assert_eq!(out.info_bits, bits);
    }
}

#[test]
fn random_noiseless_roundtrip_n256() {
    let info: Vec<usize> = (128..256).collect();
    let s = spec(2, 4, &info, Some(Crc::CRC8), 4);
    let mut rng = trial_rng(9, 0, 0);
    for _ in 0..20 {
        let payload: Vec<u8> = (0..s.payload_bits()).map(|_| rng.random_range(0..2)).collect();
        let cw = encode_payload(&payload, &s).unwrap();
        let out = ca_scl_decode(&noiseless(s.field(), &cw), &s).unwrap();
        assert!(out.crc_passed);
        assert_eq!(out.payload(&s), &payload[..]);
    }
}

#[test]
fn confident_input_keeps_metrics_finite() {
    // Losing paths here reach subnormal node masses.
    use crate::construct::{build_sequence, PdpwConfig, SequenceSource, ZetaTable};
    let cfg = PdpwConfig::new(kernel(2), ZetaTable::default_for(4).unwrap(), 1.512).unwrap();
    let info = build_sequence(256, SequenceSource::Pdpw(&cfg)).unwrap().info_set(128).unwrap();
    let s = spec(2, 4, &info, Some(Crc::CRC8), 4);
    let ch = AwgnChannel::with_noise_variance(0.05).unwrap();
    let mut rng = trial_rng(10, 0, 0);
    for _ in 0..20 {
        let payload: Vec<u8> = (0..s.payload_bits()).map(|_| rng.random_range(0..2)).collect();
        let cw = encode_payload(&payload, &s).unwrap();
        let y: Vec<f64> = cw.iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect();
        let out = ca_scl_decode(&Posteriors::from_channel(s.field(), &ch, &y).unwrap(), &s).unwrap();
        assert!(out.metric.is_finite(), "metric {}", out.metric);
        assert!(out.crc_passed);
        assert_eq!(out.payload(&s), &payload[..]);
    }
}

#[test]
fn full_list_is_maximum_likelihood() {
    let k = kernel(2);
    let info = [2usize, 3];
    let s = CodeSpec::new(k.clone(), 1, &info, None, 16).unwrap();
    let mut rng = trial_rng(11, 0, 0);
    for _ in 0..50 {
        let p = random_posteriors(&mut rng, 4, 4);
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for a in 0..4u8 {
            for b in 0..4u8 {
                let c = k.encode(&[Symbol(0), Symbol(0), Symbol(a), Symbol(b)], 1).unwrap();
                let like: f64 = c.iter().enumerate().map(|(j, s)| p.symbol(j)[s.value()]).product();
                if like > best.0 {
                    best = (like, a, b);
                }
            }
        }
        let out = ca_scl_decode(&p, &s).unwrap();
        assert_eq!(out.symbols[2..], [Symbol(best.1), Symbol(best.2)]);
    }
}

#[test]
fn list_of_one_equals_sc() {
    let info: Vec<usize> = (20..64).collect();
    let s = spec(2, 3, &info, None, 1);
    let mut rng = trial_rng(13, 0, 0);
    for _ in 0..50 {
        let bits: Vec<u8> = (0..s.info_bits()).map(|_| rng.random_range(0..2)).collect();
        let cw = encode_codeword(&bits, &s).unwrap();
        let post = noisy(&s, &cw, 0.5, &mut rng);
        assert_eq!(ca_scl_decode(&post, &s).unwrap().symbols, sc_decode(&post, &s).unwrap());
    }
}

#[test]
fn metric_is_log_probability_of_path() {
    let info: Vec<usize> = (8..16).collect();
    let s = spec(2, 2, &info, None, 4);
    let mut rng = trial_rng(17, 0, 0);
    let post = random_posteriors(&mut rng, 4, 16);
    let mut dec = ListDecoder::new(&s, &post).unwrap();
    let mut last = 0.0;
    while dec.advance() {
        let best = dec.paths().iter().map(|p| p.metric()).fold(f64::NEG_INFINITY, f64::max);
        assert!(best <= last + 1e-12);
        last = best;
    }
    let out = dec.finish();
    // ln P(u | y) by brute force; u ranges over all of F^n, so the
    // normalizer is the product of the per-position sums.
    let sym: Vec<Symbol> = out.symbols.clone();
    let c = s.kernel().encode(&sym, 2).unwrap();
    let num: f64 = c.iter().enumerate().map(|(j, x)| post.symbol(j)[x.value()]).product();
    let total: f64 = (0..16).map(|j| post.symbol(j).iter().sum::<f64>()).product();
    assert!((out.metric - (num / total).ln()).abs() < 1e-9, "{} vs {}", out.metric, (num / total).ln());
}

#[test]
fn larger_list_does_not_hurt() {
    let info: Vec<usize> = (28..64).collect();
    let s1 = spec(2, 3, &info, Some(Crc::CRC8), 1);
    let s4 = s1.with_list_size(4).unwrap();
    let mut rng = trial_rng(19, 0, 0);
    let (mut e1, mut e4) = (0, 0);
    for _ in 0..400 {
        let payload: Vec<u8> = (0..s1.payload_bits()).map(|_| rng.random_range(0..2)).collect();
        let cw = encode_payload(&payload, &s1).unwrap();
        let post = noisy(&s1, &cw, 1.0, &mut rng);
        let o1 = ca_scl_decode(&post, &s1).unwrap();
        let o4 = ca_scl_decode(&post, &s4).unwrap();
        e1 += usize::from(o1.payload(&s1) != &payload[..] || !o1.crc_passed);
        e4 += usize::from(o4.payload(&s4) != &payload[..] || !o4.crc_passed);
    }
    assert!(e1 > 0, "operating point too clean to compare");
    assert!(e4 <= e1, "L=4: {e4}, L=1: {e1}");
}

#[test]
fn genie_counts_no_errors_when_noiseless() {
    let k = kernel(2);
    let tables = MarginalTables::new(&k);
    let mut rng = trial_rng(23, 0, 0);
    let u: Vec<Symbol> = (0..64).map(|_| Symbol(rng.random_range(0..4))).collect();
    let c = k.encode(&u, 3).unwrap();
    let bits = k.field().unpack_symbols(&c);
    let post = noiseless(k.field(), &bits);
    let mut tally = GenieTally::new(64);
    genie_sc_decode(&post, &u, &tables, 3, &mut tally).unwrap();
    assert!(tally.errors.iter().all(|&e| e == 0));
    assert!(tally.soft_errors.iter().all(|&e| e < 1e-9));
}

#[test]
fn rejects_bad_configuration() {
    assert!(CodeSpec::new(kernel(2), 0, &[], None, 1).is_err());
    assert!(CodeSpec::new(kernel(2), 2, &[16], None, 1).is_err());
    assert!(CodeSpec::new(kernel(2), 2, &[3, 3], None, 1).is_err());
    assert!(CodeSpec::new(kernel(2), 2, &[15], Some(Crc::CRC8), 1).is_err());
    assert!(CodeSpec::new(kernel(2), 2, &[15], None, 0).is_err());
    let s = spec(2, 2, &[15], None, 1);
    assert!(sc_decode(&Posteriors::uniform(4, 8), &s).is_err());
    assert!(encode_codeword(&[0, 1, 0], &s).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn noiseless_sc_recovers_any_input(seed in any::<u64>(), k in 1usize..16) {
        let info: Vec<usize> = (16 - k..16).collect();
        let s = spec(2, 2, &info, None, 1);
        let mut rng = trial_rng(seed, 0, 0);
        let bits: Vec<u8> = (0..s.info_bits()).map(|_| rng.random_range(0..2)).collect();
        let cw = encode_codeword(&bits, &s).unwrap();
        let u = sc_decode(&noiseless(s.field(), &cw), &s).unwrap();
        let raw: Vec<u8> = u.iter().map(|x| x.0).collect();
        prop_assert_eq!(s.info_bits_of(&raw), bits);
    }
}
