//! Numerical laboratory for the quantized baker's map on the torus.
//!
//! The crate builds the Balazs-Voros unitary B_N = F_N^{-1} diag(F_{N/2},
//! F_{N/2}) and its Walsh (tensor-product) counterpart, computes spectral
//! projectors onto arcs of the unit circle, checks windowed Weyl-law
//! quantities and Beurling-Selberg sandwich bounds, and samples random
//! band-limited waves and Haar-random eigenbases for their value statistics.
//!
//! Modules follow the pipeline:
//! - [`torus`]: DFT, phase translations, Weyl quantization, coherent states,
//!   classical baker dynamics;
//! - [`baker`]: the quantized map, fast powers, spectral decomposition;
//! - [`exclusion`]: discontinuity/classical coordinate sets and the
//!   parameter schedule;
//! - [`selberg`]: Beurling function and Selberg polynomial functional
//!   calculus;
//! - [`spectral`]: projectors, windowed Weyl law, quantum variance, Egorov
//!   and coherent-evolution defects;
//! - [`waves`]: random band-limited waves and their statistics;
//! - [`walsh`]: the Walsh-quantized D-baker map end to end.
//!
//! Data-parallel loops run on rayon when the default `parallel` feature is
//! enabled and fall back to sequential iteration otherwise; results are
//! bit-identical either way (see [`par`]).

// indexed loops are kept where they mirror the matrix/digit index algebra
#![allow(clippy::needless_range_loop)]

pub mod baker;
pub mod exclusion;
pub mod interval;
pub mod linalg;
pub mod par;
pub mod rng;
pub mod selberg;
pub mod spectral;
pub mod torus;
pub mod walsh;
pub mod waves;

pub use interval::AngleInterval;
pub use linalg::{CMat, C64};
