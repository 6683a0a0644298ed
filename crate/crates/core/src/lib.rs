//! Spectral solver for Sturm–Liouville problems in impedance form,
//! `−(κu′)′ = λκu` on `[0, L]`, built on Neumann series of spherical Bessel
//! functions.

pub mod error;
pub mod nsbf;
pub mod problem;
pub mod quadrature;
pub mod spectral;
pub mod specfun;
pub mod spps;
pub mod weyl;

#[cfg(test)]
mod properties;

pub use error::{Error, Result};
pub use nsbf::{compute_coefficients, DarbouxPair, NsbfCoefficientTable};
pub use problem::{BuiltinProfile, ConductivityProfile, PiecewisePolynomial};
pub use quadrature::{build_mesh, MeshFunction, UniformMesh};
pub use spectral::{BoundaryCondition, SpectralDataset};

/// Formats a real with 14 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.13e}")
}
