//! Secure cell-free ISAC with finite-capacity fronthaul.
//!
//! - [`scenario`]: geometry and channel draws
//! - [`model`]: closed-form evaluators for power, SINR, secrecy and fronthaul rates
//! - [`optimizer`]: fractional transform, MM surrogates and the SDR beamforming loop
//! - [`detection`]: Gaussian likelihood-ratio detection and ROC estimation
//! - [`baselines`]: random beamforming and distributed sensing reference schemes
//! - [`harness`]: presets, Monte Carlo orchestration, CSV/JSON/SVG output

// NaN must fail validation, so checks are written as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod detection;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod optimizer;
pub mod scenario;

pub use error::{IsacError, Result};
