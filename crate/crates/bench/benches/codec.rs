use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rspolar::construct::{build_sequence, PdpwConfig, SequenceSource};
use rspolar::{
    ca_scl_decode, encode_codeword, sc_decode, AwgnChannel, CodeSpec, Crc, FieldSpec, Posteriors, RsKernel, ZetaTable,
};

fn spec(m: usize, list: usize) -> CodeSpec {
    let kernel = RsKernel::new(&FieldSpec::new(2).unwrap()).unwrap();
    let cfg = PdpwConfig::new(kernel.clone(), ZetaTable::default_for(4).unwrap(), 1.512).unwrap();
    let seq = build_sequence(4usize.pow(m as u32), SequenceSource::Pdpw(&cfg)).unwrap();
    let info = seq.info_set(seq.len() / 2).unwrap();
    CodeSpec::new(kernel, m, &info, Some(Crc::CRC8), list).unwrap()
}

fn received(spec: &CodeSpec, rng: &mut ChaCha8Rng) -> Posteriors {
    let info: Vec<u8> = (0..spec.info_bits()).map(|_| rng.random_range(0..2)).collect();
    let code = encode_codeword(&info, spec).unwrap();
    let channel = AwgnChannel::from_eb_n0(2.0, 0.5).unwrap();
    let y = channel.transmit(&code, rng);
    Posteriors::from_channel(spec.field(), &channel, &y).unwrap()
}

fn bench_encode(c: &mut Criterion) {
    let mut group = c.benchmark_group("encode");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in [3, 4, 5] {
        let spec = spec(m, 1);
        let info: Vec<u8> = (0..spec.info_bits()).map(|_| rng.random_range(0..2)).collect();
        group.throughput(Throughput::Elements(spec.n_bits() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(spec.n_bits()), &info, |b, info| {
            b.iter(|| encode_codeword(info, &spec).unwrap())
        });
    }
    group.finish();
}

fn bench_sc(c: &mut Criterion) {
    let mut group = c.benchmark_group("sc_decode");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in [3, 4, 5] {
        let spec = spec(m, 1);
        let post = received(&spec, &mut rng);
        group.throughput(Throughput::Elements(spec.n_bits() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(spec.n_bits()), &post, |b, post| {
            b.iter(|| sc_decode(post, &spec).unwrap())
        });
    }
    group.finish();
}

fn bench_scl(c: &mut Criterion) {
    let mut group = c.benchmark_group("ca_scl_decode");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for list in [1, 2, 4, 8] {
        let spec = spec(4, list);
        let post = received(&spec, &mut rng);
        group.bench_with_input(BenchmarkId::new("n512", list), &post, |b, post| {
            b.iter(|| ca_scl_decode(post, &spec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_encode, bench_sc, bench_scl);
criterion_main!(benches);
