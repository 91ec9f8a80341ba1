//! Simulation and analysis toolkit for photonic-crystal nanocavity QED.
//!
//! The crate is organised along the processing chain:
//!
//! - [`geometry`]: hexagonal-lattice slab cavities (L3, L4/3) and their
//!   rasterisation to a permittivity grid.
//! - [`fdtd`]: a 3D Yee-grid solver with convolutional PML, mirror-symmetry
//!   planes, dipole sources, probes and running-DFT field snapshots.
//! - [`modes`]: harmonic inversion of probe signals (matrix pencil), Purcell
//!   mode volume, periodograms and Q/linewidth conversions.
//! - [`cqed`]: quantum-dot/cavity polaritons, vacuum Rabi splitting,
//!   synthetic emission spectra and coupling-strength scaling.
//! - [`specfit`]: Voigt line shapes and multi-peak Levenberg-Marquardt fits.
//!
//! [`cavity`] strings the first three together into a single resonance,
//! Q and mode-volume characterisation of a design.

pub mod cavity;
pub mod cqed;
pub mod error;
pub mod fdtd;
pub mod geometry;
pub mod modes;
pub mod specfit;
pub mod units;

pub use error::{Error, Result};
pub use geometry::{CavityDesign, CavityKind, Hole, LatticeSpec, ModulationSpec, PermittivityGrid, ShiftSet};
pub use modes::{QFactor, ResonantMode};
pub use specfit::{FitResult, Spectrum, VoigtPeak};

/// Crate version, recorded in every generated artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
