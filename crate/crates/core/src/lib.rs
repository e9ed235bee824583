//! Numerical laboratory for non-Abelian, non-Hermitian Aubry-André-Harper
//! quasicrystals.
//!
//! The crate builds the three SU(2) lattice models (unidirectional hopping,
//! nonreciprocal hopping, complex onsite phase), diagonalizes them with a
//! biorthogonal eigensolver and derives the usual family of diagnostics:
//!
//! - spectral realness: `E_I^max`, `E_I^min` and the complex fraction `rho`
//!   ([`spectrum`]),
//! - localization: IPR / NPR extrema and the critical-phase indicator `eta`
//!   ([`localization`]),
//! - spectral winding numbers from flux-threaded log-determinants
//!   ([`topology`]),
//! - biorthogonal entanglement spectra and entropy ([`entanglement`]),
//! - adjacent-gap-ratio level statistics ([`levels`]),
//!
//! and sweeps any of them over one- or two-dimensional parameter grids
//! with checkpointing ([`sweep`]).
//!
//! ```no_run
//! use nhqc::model::{ModelKind, ModelSpec};
//! use nhqc::spectrum::{decompose, realness, default_tol_imag};
//! use nhqc::localization::profile;
//!
//! let spec = ModelSpec::fibonacci(ModelKind::Model1, 15)
//!     .with_j(0.5)
//!     .with_v(1.0)
//!     .with_phi(std::f64::consts::PI / 10.0);
//! let h = nhqc::model::build_hamiltonian(&spec).unwrap();
//! let dec = decompose(&h).unwrap();
//! let real = realness(&dec, default_tol_imag(&dec));
//! let loc = profile(&dec);
//! println!("rho = {}, eta = {}", real.rho, loc.eta);
//! ```

pub mod entanglement;
pub mod error;
pub mod levels;
pub mod localization;
pub mod model;
pub mod spectrum;
pub mod sweep;
pub mod topology;
pub mod validate;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
