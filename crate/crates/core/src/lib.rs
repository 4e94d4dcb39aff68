//! Covariant quantum kernels for group-structured data, evaluated by
//! classical statevector simulation at desk scale.
//!
//! The crate covers the full pipeline: fiducial-state preparation over a
//! coupling graph, the labeling-cosets-with-error benchmark generator,
//! exact and shot-sampled kernel estimation with a depolarizing noise
//! model and zero-noise extrapolation, a from-scratch dual SVM solver,
//! SPSA-driven kernel alignment, and diagnostics (geometry metrics and
//! the non-Abelian Fourier decomposition for small finite groups).

pub mod analysis;
pub mod error;
pub mod group;
pub mod kernel;
pub mod lce;
pub mod rng;
pub mod statevector;
pub mod svm;

pub mod align;

pub use align::{AlignmentObjective, AlignmentTrace, SpsaConfig};
pub use error::{Error, Result};
pub use kernel::{InvarianceSide, KernelConfig, KernelMatrix, KernelMode};
pub use lce::{DataPoint, Dataset, LceProblem};
pub use statevector::{CouplingGraph, Gate1Q, QuantumState};
pub use svm::{QpReport, SvmModel};
