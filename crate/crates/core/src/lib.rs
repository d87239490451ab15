//! Modulars, norms and dual norms on variable-exponent Lebesgue spaces, the
//! mixed Lebesgue-sequence spaces built from them, and variable Besov spaces.
//!
//! Everything lives on a uniform periodic grid over `[-L, L)`; integrals are
//! left Riemann sums.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod bisect;
pub mod domain;
pub mod duality;
pub mod error;
pub mod exponents;
pub mod io;
pub mod lebesgue;
pub mod mixed;
pub mod rng;
pub mod verify;

pub use besov::{analyze, besov_norm, build_filter_pair, synthesize, FilterPair};
pub use domain::{integrate, FuncSequence, FunctionKind, Grid, GridFunction};
pub use duality::{dual_tail_norm, kothe_dual_norm, norming_check, pairing, DualNormResult, Method};
pub use error::{Error, Result};
pub use exponents::{check_normability, conjugate, Exponent, ExponentClass, ExponentField, ExponentSpec};
pub use lebesgue::{luxemburg_norm, modular_lp, NormResult};
pub use mixed::{mixed_modular_p1, mixed_modular_p1a, mixed_norm, MixedOptions};
