//! Delay-domain beam-pair selection for hybrid analog/digital antenna
//! arrays, with a Monte Carlo harness that evaluates it.
//!
//! A transmitter and receiver each steer one analog beam per RF chain out of
//! a codebook; picking good beam pairs needs an estimate of how much channel
//! energy every pair couples. This crate implements the whole estimation
//! chain in the delay domain and quantifies its accuracy:
//!
//! * [`dsp`] — complex sequences, DFT helpers, circulant convolution and its
//!   inverse;
//! * [`airlink`] — steering vectors, beam codebooks, sparse multipath
//!   channels, and exact noise-free coupled energies;
//! * [`sounding`] — constant-amplitude training generation (full-length or
//!   periodic blocks) and received-signal synthesis;
//! * [`estimation`] — training removal, block averaging, delay-power
//!   profiles, and thresholded delay-support estimation;
//! * [`selection`] — per-pair energy matrices and greedy without-replacement
//!   pair selection;
//! * [`theory`] — the exact error decomposition of every estimate and
//!   closed-form bounds on its mean absolute error;
//! * [`harness`] — deterministic Monte Carlo sweeps over an SNR grid, with
//!   CSV/manifest emission and fixed-channel moment validation.

pub mod airlink;
pub mod dsp;
pub mod estimation;
pub mod harness;
pub mod selection;
pub mod sounding;
pub mod theory;
