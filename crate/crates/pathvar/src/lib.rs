//! Numerical pathwise calculus for continuous paths of arbitrary roughness.
//!
//! The library estimates p-th variation along partition sequences, evaluates
//! compensated Riemann-sum integrals and their change-of-variable residuals
//! (for functions and for path-dependent functionals), accumulates order-p
//! pathwise local times with an exact Tanaka-type identity, and exposes a
//! higher-order reduced-rough-path layer with a sewing integral. Everything
//! operates on paths sampled on a uniform grid with linear interpolation as
//! the continuous-time semantics, in 64-bit floating point.

pub mod calculus;
pub mod ensemble;
pub mod error;
pub mod fbm;
pub mod fft;
pub mod functional;
pub mod functions;
pub mod localtime;
pub mod partitions;
pub mod paths;
pub mod report;
pub mod roughpath;
pub mod tensors;
pub mod variation;

pub use error::{Error, ErrorClass, Result};
pub use paths::{generate_analytic, piecewise_constant_approx, AnalyticKind, SampledPath, StepPath};
pub use fbm::generate_fbm;
pub use partitions::{
    crossing_counts, lebesgue_dyadic, lebesgue_dyadic_unchecked, oscillation, uniform_dyadic,
    Partition, PartitionSequence, Scheme,
};
pub use tensors::{GradedTensor, SymTensor};
