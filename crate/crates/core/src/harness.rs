//! End-to-end BLER simulation.
//!
//! Every trial draws from a generator keyed by `(master_seed, grid index,
//! trial index)`. Trials run in fixed-size batches; within a batch they run
//! in parallel, and the early-stop cutoff is found by scanning the batch in
//! trial order, so the counts never depend on the worker count.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::AwgnChannel;
use crate::codec::{ca_scl_decode, encode_payload, CodeSpec, Crc, MarginalTables};
use crate::construct::{
    build_sequence, mc_construct, select_info_set, PdpwConfig, ReliabilitySequence, SequenceSource, ZetaTable,
};
use crate::error::{Error, Result};
use crate::galois::FieldSpec;
use crate::kernel::RsKernel;
use crate::ratematch::{apply_puncture, mpwp_pattern, pad_posteriors, sip_pattern, PuncturePattern, Scheme};
use crate::seed::trial_rng;

/// Trials per scheduling batch. Fixed so that results do not depend on the
/// pool size.
const BATCH: u64 = 256;

/// How the reliability sequence is obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Construction {
    Pdpw {
        #[serde(default = "default_beta")]
        beta: f64,
        /// Defaults to the tabulated values for the field.
        #[serde(default)]
        zeta: Option<Vec<f64>>,
    },
    Mc {
        design_ebn0_db: f64,
        #[serde(default = "default_mc_trials")]
        trials: u64,
        #[serde(default)]
        seed: u64,
    },
    /// A sequence saved earlier.
    Sequence { path: String },
}

fn default_beta() -> f64 {
    1.512
}

fn default_mc_trials() -> u64 {
    20_000
}

impl Construction {
    pub fn label(&self) -> String {
        match self {
            Construction::Pdpw { beta, .. } => format!("pdpw(beta={beta})"),
            Construction::Mc { design_ebn0_db, trials, .. } => format!("mc({design_ebn0_db}dB,T={trials})"),
            Construction::Sequence { path } => format!("sequence({path})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateMatch {
    pub scheme: Scheme,
    /// Transmitted bits `M_b`.
    pub m_bits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub q: usize,
    pub m: usize,
    /// Information bits including the CRC; a multiple of `t`.
    pub k_bits: usize,
    /// 0 disables the CRC.
    #[serde(default = "default_crc_width")]
    pub crc_width: usize,
    #[serde(default = "default_list_size")]
    pub list_size: usize,
    pub construction: Construction,
    #[serde(default)]
    pub rate_match: Option<RateMatch>,
    pub eb_n0_grid: Vec<f64>,
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    #[serde(default = "default_max_block_errors")]
    pub max_block_errors: u64,
    #[serde(default)]
    pub master_seed: u64,
    /// 0 uses every available core.
    #[serde(default)]
    pub worker_count: usize,
}

fn default_crc_width() -> usize {
    8
}

fn default_list_size() -> usize {
    2
}

fn default_max_trials() -> u64 {
    100_000
}

fn default_max_block_errors() -> u64 {
    100
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Json { path: "<config>".into(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.display().to_string(), source })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|source| Error::Json { path: "<config>".into(), source })
    }

    pub fn t(&self) -> Result<usize> {
        if self.q < 2 || !self.q.is_power_of_two() {
            return Err(Error::Config(format!("q = {} is not a power of two >= 2", self.q)));
        }
        Ok(self.q.trailing_zeros() as usize)
    }

    pub fn n_bits(&self) -> Result<usize> {
        let n = self.q.checked_pow(self.m as u32).ok_or(Error::SizeGuard { size: usize::MAX, limit: 1 << 26 })?;
        Ok(n * self.t()?)
    }

    /// Transmitted bits after rate matching.
    pub fn m_bits(&self) -> Result<usize> {
        Ok(match &self.rate_match {
            Some(rm) => rm.m_bits,
            None => self.n_bits()?,
        })
    }

    /// `R = K_b / M_b`, CRC bits included.
    pub fn rate(&self) -> Result<f64> {
        Ok(self.k_bits as f64 / self.m_bits()? as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.t()?;
        let nb = self.n_bits()?;
        let mb = self.m_bits()?;
        if self.m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.k_bits == 0 || self.k_bits % t != 0 {
            return Err(Error::Infeasible(format!("K_b = {} must be a positive multiple of t = {t}", self.k_bits)));
        }
        if self.k_bits <= self.crc_width {
            return Err(Error::Infeasible(format!("K_b = {} leaves no payload next to the CRC", self.k_bits)));
        }
        if mb == 0 || mb > nb {
            return Err(Error::Infeasible(format!("M_b = {mb} outside [1, N_b = {nb}]")));
        }
        if self.k_bits > mb {
            return Err(Error::Infeasible(format!("K_b = {} exceeds the {mb} transmitted bits", self.k_bits)));
        }
        if self.list_size == 0 {
            return Err(Error::Config("list size must be at least 1".into()));
        }
        if self.eb_n0_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("Eb/N0 grid must be strictly increasing".into()));
        }
        if self.crc_width > 32 {
            return Err(Error::Config("CRC wider than 32 bits".into()));
        }
        Ok(())
    }
}

fn crc_for_width(width: usize) -> Result<Option<Crc>> {
    Ok(match width {
        0 => None,
        8 => Some(Crc::CRC8),
        w => {
            return Err(Error::Config(format!("only CRC widths 0 and 8 are configurable here, got {w}")));
        }
    })
}

/// Code, puncturing pattern and sequence derived from a configuration.
#[derive(Clone, Debug)]
pub struct Link {
    pub spec: CodeSpec,
    pub pattern: PuncturePattern,
    pub sequence: ReliabilitySequence,
}

/// Builds the reliability sequence the configuration asks for.
pub fn build_reliability(config: &SimConfig, kernel: &RsKernel) -> Result<ReliabilitySequence> {
    let n = kernel.block_length(config.m)?;
    let seq = match &config.construction {
        Construction::Pdpw { beta, zeta } => {
            let zeta = match zeta {
                Some(v) => ZetaTable::new(v.clone(), f64::NAN, 0)?,
                None => ZetaTable::default_for(kernel.q())?,
            };
            let cfg = PdpwConfig::new(kernel.clone(), zeta, *beta)?;
            build_sequence(n, SequenceSource::Pdpw(&cfg))?
        }
        Construction::Mc { design_ebn0_db, trials, seed } => {
            let channel = AwgnChannel::from_eb_n0(*design_ebn0_db, config.rate()?)?;
            let stats = mc_construct(kernel, config.m, &channel, *trials, *seed)?;
            build_sequence(n, SequenceSource::Mc(&stats))?
        }
        Construction::Sequence { path } => ReliabilitySequence::load(Path::new(path))?,
    };
    if seq.q != kernel.q() || seq.len() != n {
        return Err(Error::Config(format!(
            "sequence is for q = {}, N = {}; configuration needs q = {}, N = {n}",
            seq.q,
            seq.len(),
            kernel.q()
        )));
    }
    Ok(seq)
}

/// Builds the code and puncturing pattern for a configuration.
pub fn build_link(config: &SimConfig) -> Result<Link> {
    config.validate()?;
    let t = config.t()?;
    let field = FieldSpec::new(t as u32)?;
    let kernel = RsKernel::new(&field)?;
    let sequence = build_reliability(config, &kernel)?;
    link_from_sequence(config, kernel, sequence)
}

/// Like [`build_link`] with the sequence supplied.
pub fn link_from_sequence(config: &SimConfig, kernel: RsKernel, sequence: ReliabilitySequence) -> Result<Link> {
    config.validate()?;
    let t = config.t()?;
    let nb = config.n_bits()?;
    let info_set = select_info_set(&sequence, config.k_bits / t)?;
    let pattern = match &config.rate_match {
        None => PuncturePattern::none(nb),
        Some(rm) => match rm.scheme {
            Scheme::Mpwp => mpwp_pattern(&sequence, &info_set, nb, rm.m_bits, t)?,
            Scheme::Sip => sip_pattern(&info_set, nb, rm.m_bits, t)?,
        },
    };
    let tables = MarginalTables::new(&kernel);
    let spec = CodeSpec::with_tables(
        Arc::new(kernel),
        Arc::new(tables),
        config.m,
        &info_set,
        crc_for_width(config.crc_width)?,
        config.list_size,
    )?;
    Ok(Link { spec, pattern, sequence })
}

/// One transmitted block; true on a block error.
pub fn run_trial(link: &Link, channel: &AwgnChannel, rng: &mut impl Rng) -> Result<bool> {
    let spec = &link.spec;
    let payload: Vec<u8> = (0..spec.payload_bits()).map(|_| rng.random_range(0..2u8)).collect();
    let code = encode_payload(&payload, spec)?;
    let tx = apply_puncture(&code, &link.pattern)?;
    let y = channel.transmit(&tx, rng);
    let post = pad_posteriors(&channel.llrs(&y), &link.pattern, spec.field())?;
    let out = ca_scl_decode(&post, spec)?;
    Ok(!out.crc_passed || out.payload(spec) != &payload[..])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub eb_n0_db: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub version: String,
    pub seed: u64,
    /// `K_b / M_b`.
    pub rate: f64,
    pub points: Vec<SimPoint>,
}

impl SimResult {
    /// Trial and error counts only, for determinism checks.
    pub fn counts(&self) -> Vec<(u64, u64)> {
        self.points.iter().map(|p| (p.trials, p.block_errors)).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Json { path: "<result>".into(), source })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|source| Error::Json { path: "<result>".into(), source })
    }
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Simulates one grid point.
pub fn simulate_point(link: &Link, config: &SimConfig, grid_index: usize, eb_n0_db: f64) -> Result<SimPoint> {
    let channel = AwgnChannel::from_eb_n0(eb_n0_db, config.rate()?)?;
    let start = Instant::now();
    let mut trials = 0u64;
    let mut errors = 0u64;
    'outer: while trials < config.max_trials {
        let end = (trials + BATCH).min(config.max_trials);
        let outcomes: Vec<bool> = (trials..end)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(config.master_seed, grid_index as u64, trial);
                run_trial(link, &channel, &mut rng)
            })
            .collect::<Result<_>>()?;
        for e in outcomes {
            trials += 1;
            errors += u64::from(e);
            if config.max_block_errors > 0 && errors >= config.max_block_errors {
                break 'outer;
            }
        }
    }
    let bler = if trials == 0 { 0.0 } else { errors as f64 / trials as f64 };
    Ok(SimPoint { eb_n0_db, trials, block_errors: errors, bler, wall_time_s: start.elapsed().as_secs_f64() })
}

/// BLER over the configured grid.
pub fn run_bler(config: &SimConfig) -> Result<SimResult> {
    let link = with_pool(config.worker_count, || build_link(config))??;
    run_bler_with(config, &link)
}

/// BLER over the grid for an already built link.
pub fn run_bler_with(config: &SimConfig, link: &Link) -> Result<SimResult> {
    config.validate()?;
    let points = with_pool(config.worker_count, || {
        config
            .eb_n0_grid
            .iter()
            .enumerate()
            .map(|(g, &db)| simulate_point(link, config, g, db))
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(SimResult {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.master_seed,
        rate: config.rate()?,
        points,
    })
}

/// Eb/N0 at which the BLER curve crosses `target`, interpolating linearly
/// in log BLER between the first bracketing pair of grid points.
pub fn required_eb_n0(points: &[SimPoint], target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Config(format!("target BLER {target} outside (0, 1)")));
    }
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.bler >= target && b.bler <= target {
            if b.bler == target {
                return Ok(b.eb_n0_db);
            }
            if b.bler == 0.0 {
                return Err(Error::Infeasible(format!(
                    "no errors at {} dB; cannot interpolate log BLER to {target}",
                    b.eb_n0_db
                )));
            }
            let (la, lb, lt) = (a.bler.log10(), b.bler.log10(), target.log10());
            return Ok(a.eb_n0_db + (lt - la) / (lb - la) * (b.eb_n0_db - a.eb_n0_db));
        }
    }
    Err(Error::Infeasible(format!("target BLER {target} is not bracketed by the grid")))
}

/// One row per method: label, result, required Eb/N0 (if bracketed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub target_bler: f64,
    pub labels: Vec<String>,
    pub results: Vec<SimResult>,
    pub required_eb_n0_db: Vec<Option<f64>>,
}

/// Runs `config` once per construction with the same seeds.
pub fn compare_constructions(config: &SimConfig, methods: &[Construction], target_bler: f64) -> Result<Comparison> {
    if methods.len() < 2 {
        return Err(Error::Config("comparison needs at least two methods".into()));
    }
    let configs: Vec<SimConfig> =
        methods.iter().map(|m| SimConfig { construction: m.clone(), ..config.clone() }).collect();
    let labels = methods.iter().map(Construction::label).collect();
    compare_configs(&configs, labels, target_bler)
}

/// Runs each configuration and reports the Eb/N0 needed for `target_bler`.
pub fn compare_configs(configs: &[SimConfig], labels: Vec<String>, target_bler: f64) -> Result<Comparison> {
    let results = configs.iter().map(run_bler).collect::<Result<Vec<_>>>()?;
    let required = results.iter().map(|r| required_eb_n0(&r.points, target_bler).ok()).collect();
    Ok(Comparison { target_bler, labels, results, required_eb_n0_db: required })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown output format {s:?} (csv | json)"))),
        }
    }
}

/// CSV with columns `eb_n0_db,trials,block_errors,bler`.
pub fn write_csv<W: std::io::Write>(result: &SimResult, out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eb_n0_db", "trials", "block_errors", "bler"])?;
    for p in &result.points {
        w.write_record([p.eb_n0_db.to_string(), p.trials.to_string(), p.block_errors.to_string(), p.bler.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit(result: &SimResult, format: OutputFormat, path: &Path) -> Result<()> {
    let shown = path.display().to_string();
    let file = std::fs::File::create(path).map_err(|source| Error::Io { path: shown.clone(), source })?;
    match format {
        OutputFormat::Csv => write_csv(result, file).map_err(|source| Error::Csv { path: shown, source }),
        OutputFormat::Json => {
            serde_json::to_writer_pretty(file, result).map_err(|source| Error::Json { path: shown, source })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(grid: Vec<f64>) -> SimConfig {
        SimConfig {
            q: 4,
            m: 2,
            k_bits: 16,
            crc_width: 8,
            list_size: 2,
            construction: Construction::Pdpw { beta: 1.512, zeta: None },
            rate_match: None,
            eb_n0_grid: grid,
            max_trials: 400,
            max_block_errors: 0,
            master_seed: 7,
            worker_count: 1,
        }
    }

    #[test]
    fn noiseless_limit_has_no_errors() {
        let cfg = SimConfig { max_trials: 1000, ..small(vec![40.0]) };
        let r = run_bler(&cfg).unwrap();
        assert_eq!(r.counts(), vec![(1000, 0)]);
        assert_eq!(r.rate, 0.5);
    }

    #[test]
    fn worker_count_does_not_change_counts() {
        let a = run_bler(&SimConfig { max_block_errors: 20, ..small(vec![0.0, 2.0]) }).unwrap();
        let b = run_bler(&SimConfig { max_block_errors: 20, worker_count: 3, ..small(vec![0.0, 2.0]) }).unwrap();
        assert_eq!(a.counts(), b.counts());
        assert!(a.points[0].block_errors > 0);
    }

    #[test]
    fn early_stop_uses_actual_trials() {
        let r = run_bler(&SimConfig { max_block_errors: 10, max_trials: 100_000, ..small(vec![-2.0]) }).unwrap();
        let p = &r.points[0];
        assert_eq!(p.block_errors, 10);
        assert!(p.trials < 100_000);
        assert_eq!(p.bler, 10.0 / p.trials as f64);
    }

    #[test]
    fn infeasible_configs_are_rejected() {
        assert!(run_bler(&SimConfig { k_bits: 15, ..small(vec![0.0]) }).is_err());
        assert!(run_bler(&SimConfig { k_bits: 34, ..small(vec![0.0]) }).is_err());
        assert!(run_bler(&SimConfig { k_bits: 8, ..small(vec![0.0]) }).is_err());
        assert!(run_bler(&small(vec![1.0, 0.0])).is_err());
        let rm = Some(RateMatch { scheme: Scheme::Mpwp, m_bits: 12 });
        assert!(run_bler(&SimConfig { rate_match: rm, ..small(vec![0.0]) }).is_err());
        let rm = Some(RateMatch { scheme: Scheme::Sip, m_bits: 33 });
        assert!(run_bler(&SimConfig { rate_match: rm, ..small(vec![0.0]) }).is_err());
    }

    #[test]
    fn interpolation() {
        let pt = |db, bler| SimPoint { eb_n0_db: db, trials: 1, block_errors: 0, bler, wall_time_s: 0.0 };
        let pts = [pt(0.0, 1e-1), pt(1.0, 1e-3)];
        assert!((required_eb_n0(&pts, 1e-2).unwrap() - 0.5).abs() < 1e-12);
        assert!(required_eb_n0(&pts, 1e-4).is_err());
        assert!(required_eb_n0(&[pt(0.0, 1e-1), pt(1.0, 0.0)], 1e-2).is_err());
        assert!(required_eb_n0(&[], 1e-2).is_err());
    }

    #[test]
    fn same_method_twice_is_identical() {
        let cfg = small(vec![0.0, 1.0]);
        let m = cfg.construction.clone();
        let c = compare_constructions(&cfg, &[m.clone(), m], 0.1).unwrap();
        assert_eq!(c.results[0].counts(), c.results[1].counts());
        assert!(compare_constructions(&cfg, &[cfg.construction.clone()], 0.1).is_err());
    }

    #[test]
    fn csv_and_json_output() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_bler(&small(vec![0.0, 1.0, 2.0])).unwrap();
        let csv_path = dir.path().join("out.csv");
        emit(&r, OutputFormat::Csv, &csv_path).unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "eb_n0_db,trials,block_errors,bler");
        assert_eq!(lines.len(), 4);

        let empty = SimResult { points: Vec::new(), ..r.clone() };
        emit(&empty, OutputFormat::Csv, &csv_path).unwrap();
        assert_eq!(std::fs::read_to_string(&csv_path).unwrap().trim(), "eb_n0_db,trials,block_errors,bler");

        let json_path = dir.path().join("out.json");
        emit(&r, OutputFormat::Json, &json_path).unwrap();
        assert_eq!(SimResult::from_json(&std::fs::read_to_string(&json_path).unwrap()).unwrap(), r);
        assert!(emit(&r, OutputFormat::Csv, &dir.path().join("no/such/dir.csv")).is_err());
    }

    #[test]
    fn config_json_defaults() {
        let cfg = SimConfig::from_json(
            r#"{"q":4,"m":2,"k_bits":16,"construction":{"method":"pdpw"},"eb_n0_grid":[1.0]}"#,
        )
        .unwrap();
        assert_eq!(cfg.crc_width, 8);
        assert_eq!(cfg.list_size, 2);
        assert_eq!(cfg.max_trials, 100_000);
        assert_eq!(cfg.max_block_errors, 100);
        assert_eq!(cfg.construction, Construction::Pdpw { beta: 1.512, zeta: None });
        assert_eq!(SimConfig::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn unpunctured_rate_match_equals_plain_pipeline() {
        let plain = small(vec![0.0, 1.0]);
        let rm = SimConfig { rate_match: Some(RateMatch { scheme: Scheme::Mpwp, m_bits: 32 }), ..plain.clone() };
        assert_eq!(run_bler(&plain).unwrap().counts(), run_bler(&rm).unwrap().counts());
    }
}
