//! Quaternion tensor linear algebra built on the z-block circulant representation.
//!
//! A third-order quaternion tensor is stored as a list of frontal slices, each a
//! quaternion matrix held as a pair of complex matrices through the split
//! `a = c1 + j c2`. The tensor product used throughout is the one induced by the
//! z-block circulant matrix of the slices: `A * B = fold(bcirc_z(A) · unfold(B))`.
//! Every spectral routine (SVD, Moore-Penrose, Drazin, norms, radii) reduces to
//! complex dense linear algebra through two layers:
//!
//! * a DFT conjugation that block-diagonalizes `bcirc_z` in quaternion arithmetic,
//! * the complex adjoint map `chi` that turns an m x n quaternion matrix into a
//!   structured 2m x 2n complex matrix.
//!
//! The [`perturb`] module certifies Drazin-inverse perturbation bounds for
//! core perturbations and produces machine- and human-readable reports.
//!
//! Numerical routines cross-check themselves when [`Options::paranoid`] is set
//! (the library default): expensive second routes are computed and compared, and
//! disagreement surfaces as [`Error::Inconsistency`] rather than silent output.

pub mod error;
pub mod io;
pub mod perturb;
pub mod qmat;
pub mod qtensor;
pub mod quat;
pub mod random;
pub mod spectral;

pub use error::{Error, Hypothesis, Result};
pub use qmat::QMat;
pub use qtensor::QTensor;
pub use quat::Quat;

/// Machine epsilon for f64, the unit used by every rank tolerance.
pub const EPS: f64 = 2.2204460492503131e-16;

/// Knobs shared by the higher level routines.
///
/// `paranoid` turns on dual-route cross checks inside the spectral and
/// perturbation layers. `atol`/`rtol` feed tensor approximate equality and the
/// CLI verification thresholds; the internal cross-check tolerances are fixed
/// constants, not user knobs.
#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub paranoid: bool,
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self { paranoid: true, atol: 1e-10, rtol: 1e-8 }
    }
}

impl Options {
    /// Like `default()` but with the cross checks off, the CLI entry state.
    pub fn fast() -> Self {
        Self { paranoid: false, ..Self::default() }
    }
}
