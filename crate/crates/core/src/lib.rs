//! Finite-temperature states of one-dimensional spin chains as matrix
//! product purifications.
//!
//! The thermal state `exp(-beta H) / Z` of a nearest-neighbour chain is
//! prepared by imaginary-time evolution of the infinite-temperature
//! purification ([`thermal::build_thermal_purification`]), compressed by
//! uniform Schmidt truncation ([`mps::PurifiedMPS::truncate_uniform`]) and
//! read out as a matrix product operator ([`mpo::ThermalMPO`]). The
//! [`exact`] module supplies dense reference values for short chains, and
//! [`harness`] turns both into accuracy and scaling experiments.

// `!(x > 0.0)` style checks are deliberate: NaN must fail every validity test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod harness;
pub mod model;
pub mod mpo;
pub mod mps;
pub mod observable;
pub mod serialize;
pub mod tensor;
pub mod thermal;

pub use error::{Error, Result};
pub use model::{build_model, ChainModel, ModelFamily, Params};
pub use mpo::ThermalMPO;
pub use mps::{PurifiedMPS, SchmidtSpectrum};
pub use observable::LocalObservable;
pub use tensor::{Tensor, C64};
pub use thermal::{build_thermal_purification, BuildConfig, BuildReport};
