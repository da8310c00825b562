//! Exact arithmetic for modular functions of level N.
//!
//! The crate builds truncated q-expansions with coefficients in cyclotomic
//! fields Q(zeta_M) and uses them to:
//!
//! - construct the classical level-N function families (Fricke functions,
//!   powers of Siegel functions, and differences f_v - f_{av}),
//! - certify that a family is primitive or totally primitive by exhibiting,
//!   for every pair of index classes, a coefficient where the two expansions
//!   (or their ratio) provably differ,
//! - compute the affine plane model f_N(x, y) of the modular curve X(N) from
//!   the conjugate orbit of a Siegel-function generator, and
//! - evaluate family members at CM points numerically and check the
//!   reciprocity-group conjugate values for distinctness and near-integrality.
//!
//! Everything upstream of the CM evaluation is exact: rationals are
//! arbitrary-precision, cyclotomic elements are coefficient vectors modulo the
//! M-th cyclotomic polynomial, and series carry an explicit truncation order so
//! that "zero to precision" is distinguishable from "provably nonzero".

pub mod cm;
pub mod cyclo;
pub mod error;
pub mod famgroup;
pub mod modelcurve;
pub mod modforms;
pub mod numeric;
pub mod primitivity;
pub mod qseries;
pub mod rational;

pub use cyclo::CycloElem;
pub use error::{Error, Result};
pub use famgroup::{FamilyDescriptor, MatModN};
pub use modforms::{IndexVector, SiegelSymbol};
pub use qseries::{FracQSeries, QOrder};
