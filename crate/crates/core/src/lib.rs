//! Constructive machinery for Bochner–Riesz means at critical indices:
//! exact exponent geometry, moment-cancelling bump construction, layered
//! multiplier/kernel decompositions with decay verification, dyadic sparse
//! forms, a recursive Calderón–Zygmund sparse-domination engine, and
//! Muckenhoupt-weight experiments on periodic grids.

pub mod bump;
pub mod cz;
pub mod dyadic;
pub mod engine;
pub mod exponents;
pub mod fft;
pub mod gauge;
pub mod grid;
pub mod mask;
pub mod maximal;
pub mod multiplier;
pub mod quad;
pub mod rng;
pub mod sample;
pub mod spectral;
pub mod weights;

pub use bump::{AnnularBump, CancellingBump};
pub use dyadic::{CubeCollection, DyadicCube, SparseFamily};
pub use exponents::{ExponentContext, Rational, TrapezoidSpec};
pub use gauge::{GaugeConstants, MinkowskiGauge};
pub use grid::GridFunction;
pub use mask::GridMask;
pub use multiplier::{LayerProfile, RieszSymbol};
pub use spectral::KernelReport;
pub use weights::{WeightGrid, WeightReport};
