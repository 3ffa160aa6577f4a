//! Pseudo-spectral simulation of the incompressible Navier–Stokes equations
//! with horizontal-only viscosity, together with an anisotropic
//! Littlewood–Paley / Besov toolkit.

pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod heat;
pub mod io;
pub mod analyticity;
pub mod besov;
pub mod littlewood_paley;
pub mod random;
pub mod solver;
pub mod spectral;
pub mod verifier;

pub use error::{AnsError, Result};
pub use field::{SpectralField, VectorField};
pub use grid::Grid;
