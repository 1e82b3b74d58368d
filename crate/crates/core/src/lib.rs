//! Ribbon-graph amplitudes of the spectral action matrix model: graph
//! combinatorics, divided differences, amplitude sums and power counting.

pub mod amplitude;
pub mod dd;
pub mod divdiff;
pub mod powercount;
pub mod random;
pub mod real;
pub mod ribbon;
pub mod scaling;
pub mod spectra;

pub use dd::Dd;
pub use real::{Backend, Real};
