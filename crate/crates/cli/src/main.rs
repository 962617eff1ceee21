use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rspolar::construct::{
    build_sequence, estimate_zeta, fit_beta, mc_construct, select_info_set, GenieMode, Method, PdpwConfig,
    ReliabilitySequence, SequenceSource, ZetaConfig, ZetaTable,
};
use rspolar::harness::{emit, run_bler, OutputFormat, SimConfig};
use rspolar::ratematch::{apply_puncture, mpwp_pattern, pad_posteriors, sip_pattern, PuncturePattern};
use rspolar::{ca_scl_decode, encode_payload, AwgnChannel, CodeSpec, Crc, FieldSpec, PartialOrder, RsKernel};

#[derive(Parser, Debug)]
#[command(name = "rspolar", version, about = "Polar codes with Reed-Solomon kernels over GF(2^t)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a reliability sequence.
    Construct(ConstructArgs),
    /// Encode a payload (hex, MSB-first bits) into coded bits.
    Encode(EncodeArgs),
    /// Decode received BPSK values into a payload.
    Decode(DecodeArgs),
    /// Compute a puncturing pattern.
    Ratematch(RatematchArgs),
    /// Query or verify the partial order of input indices.
    PoCheck(PoCheckArgs),
    /// Run a BLER simulation from a JSON config.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Pdpw,
    Mc,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long, default_value_t = 4)]
    q: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value = "pdpw")]
    method: MethodArg,
    /// Inter-layer base; ignored when --fit-beta is given.
    #[arg(long, default_value_t = 1.512)]
    beta: f64,
    /// Comma-separated zeta values; defaults to the tabulated ones.
    #[arg(long, value_delimiter = ',')]
    zeta: Option<Vec<f64>>,
    /// Estimate zeta by simulation instead of using defaults.
    #[arg(long)]
    estimate_zeta: bool,
    /// Fit beta against Monte-Carlo references up to length q^M.
    #[arg(long, value_name = "M")]
    fit_beta: Option<usize>,
    /// Design Eb/N0 for zeta estimation and Monte-Carlo runs.
    #[arg(long, default_value_t = -1.8, allow_hyphen_values = true)]
    design_ebn0: f64,
    /// Code rate used to set the Monte-Carlo noise level.
    #[arg(long, default_value_t = 0.5)]
    rate: f64,
    #[arg(long, default_value_t = 20_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CodeArgs {
    /// Reliability sequence JSON.
    #[arg(long)]
    seq: PathBuf,
    /// Information bits including the CRC.
    #[arg(long)]
    k_bits: usize,
    /// CRC width: 8 or 0.
    #[arg(long, default_value_t = 8)]
    crc: usize,
    #[arg(long, default_value_t = 2)]
    list: usize,
    /// Puncturing pattern JSON.
    #[arg(long)]
    pattern: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Payload bits as hex, MSB first, zero-padded to whole bytes.
    #[arg(long)]
    payload: String,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long)]
    noise_var: f64,
    /// Whitespace-separated received values, one per transmitted bit;
    /// stdin when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Mpwp,
    Sip,
}

#[derive(Args, Debug)]
struct RatematchArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long)]
    seq: PathBuf,
    #[arg(long)]
    k_bits: usize,
    #[arg(long)]
    nb: usize,
    #[arg(long)]
    mb: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PoCheckArgs {
    #[arg(long, default_value_t = 4)]
    q: usize,
    #[arg(long)]
    m: usize,
    /// Test whether J dominates I (J at least as reliable).
    #[arg(long, num_args = 2, value_names = ["J", "I"])]
    pair: Option<Vec<usize>>,
    /// Count partial-order violations in a sequence.
    #[arg(long)]
    seq: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Overrides worker_count from the config.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Construct(a) => construct(a),
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Ratematch(a) => ratematch(a),
        Command::PoCheck(a) => po_check(a),
        Command::Simulate(a) => simulate(a),
    }
}

fn kernel_for(q: usize) -> Result<RsKernel> {
    if q < 2 || !q.is_power_of_two() {
        bail!("q = {q} is not a power of two >= 2");
    }
    Ok(RsKernel::new(&FieldSpec::new(q.trailing_zeros())?)?)
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn construct(a: ConstructArgs) -> Result<()> {
    let kernel = kernel_for(a.q)?;
    let n = kernel.block_length(a.m)?;
    let seq = match a.method {
        MethodArg::Mc => {
            let channel = AwgnChannel::from_eb_n0(a.design_ebn0, a.rate)?;
            let stats = mc_construct(&kernel, a.m, &channel, a.trials, a.seed)?;
            build_sequence(n, SequenceSource::Mc(&stats))?
        }
        MethodArg::Pdpw => {
            let zeta = if a.estimate_zeta {
                let cfg = ZetaConfig {
                    eb_n0_db: a.design_ebn0,
                    trials: a.trials,
                    seed: a.seed,
                    mode: GenieMode::MinWeightRow,
                    ..ZetaConfig::default()
                };
                let z = estimate_zeta(&kernel, &cfg)?;
                if !z.is_monotone() {
                    eprintln!("warning: estimated zeta is not monotone: {:?}", z.values());
                }
                z
            } else {
                match a.zeta {
                    Some(v) => ZetaTable::new(v, a.design_ebn0, 0)?,
                    None => ZetaTable::default_for(a.q)?,
                }
            };
            let beta = match a.fit_beta {
                None => a.beta,
                Some(m_max) => {
                    let channel = AwgnChannel::from_eb_n0(a.design_ebn0, a.rate)?;
                    let refs = (2..=m_max)
                        .map(|m| mc_construct(&kernel, m, &channel, a.trials, a.seed))
                        .collect::<rspolar::Result<Vec<_>>>()?;
                    let fit = fit_beta(&zeta, &kernel, m_max, &refs)?;
                    eprintln!(
                        "beta interval ({:.4}, {:.4}) from {} pairs, {} conflicting; using {:.4}",
                        fit.lo,
                        fit.hi,
                        fit.constraints.len(),
                        fit.conflicts.len(),
                        fit.beta
                    );
                    fit.beta
                }
            };
            let cfg = PdpwConfig::new(kernel, zeta, beta)?;
            build_sequence(n, SequenceSource::Pdpw(&cfg))?
        }
    };
    write_or_print(&seq.to_json()?, a.out.as_deref())
}

fn load_code(a: &CodeArgs) -> Result<(CodeSpec, PuncturePattern)> {
    let seq = ReliabilitySequence::load(&a.seq)?;
    let kernel = kernel_for(seq.q)?;
    let t = kernel.field().t() as usize;
    if a.k_bits == 0 || a.k_bits % t != 0 {
        bail!("--k-bits {} must be a positive multiple of t = {t}", a.k_bits);
    }
    let crc = match a.crc {
        0 => None,
        8 => Some(Crc::CRC8),
        w => bail!("unsupported CRC width {w} (0 or 8)"),
    };
    let info = select_info_set(&seq, a.k_bits / t)?;
    let spec = CodeSpec::new(kernel, seq.m, &info, crc, a.list)?;
    let pattern = match &a.pattern {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let pat = PuncturePattern::from_json(&text)?;
            if pat.n_bits != spec.n_bits() {
                bail!("pattern is for {} coded bits, code has {}", pat.n_bits, spec.n_bits());
            }
            if let Some(&r) = pat.frozen_additions().iter().find(|&&r| !spec.is_frozen(r)) {
                bail!("pattern punctures symbol {r}, which carries information");
            }
            pat
        }
        None => PuncturePattern::none(spec.n_bits()),
    };
    Ok((spec, pattern))
}

/// Packs bits MSB-first into bytes, zero-padding the last one.
fn bits_to_hex(bits: &[u8]) -> String {
    let bytes: Vec<u8> = bits.chunks(8).map(|c| c.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | (b << (7 - k)))).collect();
    hex::encode(bytes)
}

fn hex_to_bits(text: &str, n: usize) -> Result<Vec<u8>> {
    let bytes = hex::decode(text.trim().trim_start_matches("0x")).context("payload is not valid hex")?;
    if bytes.len() != n.div_ceil(8) {
        bail!("payload needs {} hex digits for {n} bits, got {}", 2 * n.div_ceil(8), 2 * bytes.len());
    }
    let bits: Vec<u8> = bytes.iter().flat_map(|&b| (0..8).map(move |k| (b >> (7 - k)) & 1)).collect();
    if bits[n..].iter().any(|&b| b != 0) {
        bail!("padding bits after the first {n} must be zero");
    }
    Ok(bits[..n].to_vec())
}

fn encode(a: EncodeArgs) -> Result<()> {
    let (spec, pattern) = load_code(&a.code)?;
    let payload = hex_to_bits(&a.payload, spec.payload_bits())?;
    let code = encode_payload(&payload, &spec)?;
    let tx = apply_puncture(&code, &pattern)?;
    eprintln!("{} payload bits -> {} transmitted bits", payload.len(), tx.len());
    println!("{}", bits_to_hex(&tx));
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let (spec, pattern) = load_code(&a.code)?;
    let text = match &a.input {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    let y: Vec<f64> = text
        .split_whitespace()
        .map(|v| v.parse::<f64>().with_context(|| format!("bad received value {v:?}")))
        .collect::<Result<_>>()?;
    let channel = AwgnChannel::with_noise_variance(a.noise_var)?;
    let post = pad_posteriors(&channel.llrs(&y), &pattern, spec.field())?;
    let out = ca_scl_decode(&post, &spec)?;
    let report = serde_json::json!({
        "payload": bits_to_hex(out.payload(&spec)),
        "payload_bits": spec.payload_bits(),
        "crc_passed": out.crc_passed,
        "metric": out.metric,
    });
    println!("{report}");
    if !out.crc_passed {
        eprintln!("warning: no list candidate passed the CRC");
    }
    Ok(())
}

fn ratematch(a: RatematchArgs) -> Result<()> {
    let seq = ReliabilitySequence::load(&a.seq)?;
    let t = seq.q.trailing_zeros() as usize;
    if a.k_bits == 0 || a.k_bits % t != 0 {
        bail!("--k-bits {} must be a positive multiple of t = {t}", a.k_bits);
    }
    let info = select_info_set(&seq, a.k_bits / t)?;
    let pattern = match a.scheme {
        SchemeArg::Mpwp => mpwp_pattern(&seq, &info, a.nb, a.mb, t)?,
        SchemeArg::Sip => sip_pattern(&info, a.nb, a.mb, t)?,
    };
    write_or_print(&pattern.to_json()?, a.out.as_deref())
}

fn po_check(a: PoCheckArgs) -> Result<()> {
    if let Some(pair) = &a.pair {
        let (j, i) = (pair[0], pair[1]);
        let d = rspolar::po_dominates(j, i, a.q, a.m)?;
        println!("{j} {} {i}", if d { "dominates" } else { "does not dominate" });
        return Ok(());
    }
    let order = PartialOrder::build(a.q, a.m)?;
    let n = order.len();
    let pairs = order.pairs();
    let mut bad_antisym = 0usize;
    for &(i, j) in &pairs {
        if i != j && order.dominates(i, j) {
            bad_antisym += 1;
        }
    }
    let reflexive = (0..n).all(|i| order.dominates(i, i));
    println!("indices: {n}");
    println!("strict comparable pairs: {}", pairs.len());
    println!("incomparable pairs: {}", order.incomparable_pairs().len());
    println!("reflexive: {reflexive}");
    println!("antisymmetry violations: {bad_antisym}");
    if let Some(path) = &a.seq {
        let seq = ReliabilitySequence::load(path)?;
        if seq.q != a.q || seq.m != a.m {
            bail!("sequence is for q = {}, m = {}", seq.q, seq.m);
        }
        let violations = pairs.iter().filter(|&&(i, j)| seq.weights[j] < seq.weights[i]).count();
        let method = match seq.method {
            Method::Pdpw => "pdpw",
            Method::Mc => "mc",
        };
        println!("{method} sequence weight violations: {violations}");
        if violations > 0 && seq.method == Method::Pdpw {
            bail!("PDPW weights contradict the partial order on {violations} pairs");
        }
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut config = SimConfig::load(&a.config)?;
    if let Some(w) = a.workers {
        config.worker_count = w;
    }
    let format: OutputFormat = a.format.parse()?;
    let result = run_bler(&config)?;
    for p in &result.points {
        eprintln!("{:>6.2} dB  {:>8} trials  {:>6} errors  bler {:.3e}", p.eb_n0_db, p.trials, p.block_errors, p.bler);
    }
    emit(&result, format, &a.out)?;
    Ok(())
}
