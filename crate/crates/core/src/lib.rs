//! Instantaneous energy levels and the transient spontaneous-emission
//! spectrum of a one-dimensional charged oscillator driven by the field of
//! a passing relativistic charge cluster, evaluated in the Lorentz,
//! Coulomb, and multipolar gauges.
//!
//! The crate is organized as a pipeline:
//!
//! * [`units`] — physical constants and the internal unit system,
//! * [`potentials`] — gauge-dependent scalar potentials, instantaneous
//!   equilibrium, and harmonic parameters along the cluster transit,
//! * [`oscillator`] — instantaneous eigensystem and adiabaticity
//!   diagnostics,
//! * [`dynamics`] — excited-state decay, photon-mode amplitudes, and the
//!   accumulated emission spectrum,
//! * [`oracle`] — brute-force validators (grid eigensolves, finite
//!   differences, discrete-mode integration) for every approximation
//!   layer used by the production path.

// Negated float comparisons are the fail-closed idiom here: `!(x > 0)`
// also rejects NaN, which `x <= 0` would wave through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod filon;
pub mod oracle;
pub mod oscillator;
pub mod potentials;
pub mod report;
pub mod roots;
pub mod spline;
pub mod units;

pub use crate::error::CoreError;
pub use crate::potentials::{GaugeChoice, HarmonicParams, SystemConfig};
pub use crate::dynamics::{BackgroundGaugeChoice, SpectrumResult};
