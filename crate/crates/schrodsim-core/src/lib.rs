//! Classical emulation of Schrödingerized linear dynamics.
//!
//! A linear system du/dt = Au with non-Hermitian A is lifted by the warped
//! phase transformation v(t,p) = e^{-p}u(t) into unitary dynamics in one
//! extra dimension, evolved spectrally in p, and projected back. The crate
//! covers the conservation and heat-equation forms of the Fokker-Planck
//! equation, solution recovery with unstable-mode thresholds, first-order
//! time-splitting propagators with their exactness verifiers, and a small
//! statevector emulator for the shift-operator/QFT circuit constructions.
//!
//! The `parallel` feature (on by default) runs mode loops, eigenvalue scans
//! and gate kernels on the rayon thread pool; disabling it yields the same
//! results sequentially.

pub mod circuit;
pub mod convergence;
pub mod error;
mod exec;
pub mod fokker_planck;
pub mod grid;
pub mod instances;
pub mod linalg;
pub mod linear_core;
pub mod recovery;
pub mod schrod;
pub mod splitting;

pub use error::{CoreError, Result};
pub use grid::{choose_domain, PGrid};
pub use linalg::{CMat, CVec};
pub use linear_core::{hermitian_split, reference_evolve, spectral_data, stabilize, HermitianSplit, SpectralData};
pub use schrod::{evolve, warp_initial, Representation, SchrodState};
