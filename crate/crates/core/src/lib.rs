//! Toolkit for linear network error correction MDS codes on single-source
//! multicast DAGs over prime fields.
//!
//! The crate covers the full pipeline: network modelling with min-cut and
//! error-pattern rank queries ([`topology`]), code representation with
//! extended global encoding kernels and per-sink decoding matrices
//! ([`nec_code`]), distance/MDS verification ([`metrics`]), derivation of
//! variable-rate MDS code families that share all internal local encoding
//! kernels ([`variable_rate`]), randomized construction with success
//! probability bounds ([`randomized`]), and an error-injecting transmission
//! simulator with minimum-weight decoding ([`decoder`]).

pub mod decoder;
pub mod ff;
pub mod metrics;
pub mod nec_code;
pub mod randomized;
pub mod samples;
pub mod topology;
pub mod variable_rate;

pub use ff::{FieldElement, FieldMatrix, FieldSpec};
pub use metrics::DistanceReport;
pub use nec_code::NecCode;
pub use topology::{ErrorPattern, Network};
pub use variable_rate::CodeFamily;
