//! Spectra of a quantum particle confined to an elliptical path.
//!
//! Two dimensionless Hamiltonians share the deformation parameter
//! `xi = (b^2 - a^2) / a^2` and the D2 symmetry of the ellipse:
//!
//! * the non-Hermitian operator `-g^{-1/2} d g^{-1/2} d`, similar to a
//!   Hermitian one and therefore with a real spectrum, whose levels satisfy
//!   `E_n = n^2 E_1` to all computed digits;
//! * the Hermitian operator `-d g^{-1} d`, whose two-fold degeneracies split.
//!
//! [`matrix`] and [`solver`] compute Rayleigh-Ritz eigenvalues block by block,
//! [`perturbation`] produces exact rational series in `xi`, and [`analysis`]
//! cross-checks the two.
//!
//! ```
//! use ellipse_spectra::{build_system, solve, ModelKind, SymmetryClass};
//!
//! let system = build_system(ModelKind::PathNonHermitian, SymmetryClass::PM, 1.0, 10).unwrap();
//! let spectrum = solve(&system, 1).unwrap();
//! assert!((spectrum.eigenvalues[0] - 0.6762823414).abs() < 1e-10);
//! ```

pub mod analysis;
pub mod error;
pub mod exec;
pub mod matrix;
pub mod model;
pub mod perturbation;
pub mod precise;
pub mod quadrature;
pub mod solver;

pub use analysis::{hft_derivative, isospectral_check, scan, ScanGrid, ScanRow};
pub use error::{Error, Result};
pub use exec::Execution;
pub use matrix::{build_system, RitzSystem};
pub use model::{BasisKind, ModelKind, SymmetryClass};
pub use perturbation::{eigenvalue_series, splitting_order, Rational, RationalSeries, SplitOrder};
pub use solver::{
    conjecture_check, convergence_scan, merged_spectrum, solve, ConvergenceTable, MergedSpectrum,
    Spectrum,
};
