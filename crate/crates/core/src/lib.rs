//! Polar codes over GF(2^t) built from Reed-Solomon kernels.
//!
//! The crate covers field arithmetic, the kernel, the binary-input AWGN
//! channel seen at symbol level, the universal partial order of kernel
//! indices, reliability construction, SC and CA-SCL decoding, rate matching
//! by puncturing, and a BLER simulation harness.

pub mod channel;
pub mod codec;
pub mod construct;
pub mod error;
pub mod galois;
pub mod harness;
pub mod kernel;
pub mod porder;
pub mod ratematch;
pub mod seed;

pub use channel::{AwgnChannel, Posteriors, SymbolPosterior};
pub use codec::{
    ca_scl_decode, encode_codeword, encode_payload, kernel_marginal, sc_decode, CodeSpec, Crc, DecodeOutcome,
};
pub use construct::{
    build_sequence, estimate_zeta, fit_beta, mc_construct, pdpw_weight, select_info_set, GenieStats, PdpwConfig,
    ReliabilitySequence, ZetaTable,
};
pub use error::{Error, Result};
pub use galois::{FieldSpec, Symbol};
pub use harness::{compare_constructions, emit, run_bler, SimConfig, SimResult};
pub use kernel::RsKernel;
pub use porder::{po_dominates, po_pairs, PartialOrder, QaryIndex};
pub use ratematch::{apply_puncture, mpwp_pattern, pad_posteriors, sip_pattern, PuncturePattern};
