//! Frequency-comb driven multimode cavity coupled to a cold atomic ensemble.
//!
//! Units: frequencies that describe spectra (line positions, FSR, comb
//! offsets, collective shifts) are in Hz; rates entering dynamics (`kappa`,
//! `gamma`, `g0`, detunings) are angular, in rad/s. Helpers in [`units`]
//! convert between the two.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod fit;
pub mod meanfield;
pub mod model;
pub mod quantum;
pub mod spectrum;
pub mod susceptibility;
pub mod units;

pub use error::{Error, Result};
pub use model::{AtomEnsembleSpec, CavitySpec, CombSpec, DetuningSet, ModeIndex};
