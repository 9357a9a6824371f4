//! Noise-aware zero-noise extrapolation for small superconducting devices.
//!
//! Pipeline: parse a [`Circuit`], map it onto a calibrated [`NoiseModel`]
//! ([`mapper`]), accumulate the per-pair [`ErrorRateMatrix`], scale noise by
//! unitary [`folding`], simulate under depolarizing noise ([`simulator`]) and
//! extrapolate to zero noise ([`extrapolation`]). [`runner`] ties the stages
//! together for the `zne` binary.

pub mod accumulation;
pub mod circuit;
pub mod error;
pub mod extrapolation;
pub mod folding;
pub mod mapper;
pub mod noise_model;
pub mod runner;
pub mod simulator;

pub use accumulation::{accumulate, ErrorRateMatrix};
pub use circuit::{Circuit, Gate, Instruction};
pub use error::{Result, ZneError};
pub use extrapolation::{ExtrapolationFit, ExtrapolationInput, FitMethod};
pub use folding::{fold, FoldMethod, FoldOptions};
pub use mapper::{map_circuit, MappedCircuit};
pub use noise_model::NoiseModel;
pub use simulator::{Counts, Distribution};
pub use runner::{run, sweep, RunConfig, RunResult};
