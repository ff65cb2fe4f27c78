//! Two-dimensional Helmholtz transmission scattering with anisotropic media,
//! with tools for studying the scattered field at boundary corners:
//! rescalings, decay traces, Weiss energies, blowup fits and closed-form
//! blowup solutions.

pub mod blowup;
pub mod coefficients;
pub mod experiment;
pub mod farfield;
pub mod geometry;
pub mod oracles;
pub mod quadrature;
pub mod solver;
pub mod waves;
