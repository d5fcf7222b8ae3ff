//! Periodic grids, transforms, Fourier multipliers and dealiased products.

mod field;
mod grid;
pub mod snapshot;

pub use field::SpectralField;
pub use grid::Grid;
