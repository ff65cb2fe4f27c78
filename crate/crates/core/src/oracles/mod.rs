//! Closed-form and exact-arithmetic reference computations.

pub mod ck;
pub mod halfspace;
pub mod mie;
pub mod poly;
pub mod pushforward;
pub mod sector;
pub mod weiss;

use thiserror::Error;

pub use ck::{cauchy_kowalevski_halfspace, check_cauchy_kowalevski, CkChecks};
pub use halfspace::{
    distributional_residual, fullplane_blowup_solution, halfspace_blowup_solution, boundary_pairing_scale,
    ClosedFormField, Support,
};
pub use mie::{mie_disk_farfield, MieError};
pub use pushforward::{pushforward_scattered_eval, pushforward_scattered_field};
pub use sector::{corrected_sector_system, sector_neumann_kernel_dim, sector_system, sector_system_determinant};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("polynomial is not harmonic")]
    NotHarmonic,
    #[error("expected degree {expected}, got {got}")]
    Degree { expected: u32, got: u32 },
    #[error("dimension {0} not supported (need n >= 2)")]
    Dimension(usize),
    #[error("the half-space formula needs m >= 1")]
    ZeroOrder,
    #[error("constant must be finite, got {0}")]
    Constant(f64),
    #[error("sector angles ({0}, {1}) invalid")]
    Sector(f64, f64),
    #[error("adaptive quadrature did not converge")]
    Quadrature,
}
