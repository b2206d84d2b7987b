//! Coherent dipolar dynamics of a dilute nuclear spin bath coupled to a
//! central spin, computed with the cluster correlation expansion, plus the
//! bump-wavelet and synchrosqueezed time-frequency tools used to read beat
//! patterns out of the resulting Overhauser-field correlation function.
//!
//! Module map:
//!
//! * [`lattice`]: diamond-structure crystal, spinful-site sampling, hyperfine
//!   couplings and pair geometry relative to the hyperfine axis.
//! * [`spinops`]: spin-I matrices, tensor embedding and a Hermitian eigensolver.
//! * [`hamiltonian`]: per-cluster effective Hamiltonians built from the
//!   dipolar alphabet with per-term masks.
//! * [`cce`]: cluster enumeration, per-cluster correlations, the CCE
//!   recursion and a whole-bath exact reference.
//! * [`tfa`]: normalization, periodogram, bump CWT, synchrosqueezing and band
//!   amplitudes.
//!
//! Energies are angular frequencies in rad/s with ħ = 1; lengths are meters.

pub mod cce;
pub mod constants;
mod error;
pub mod hamiltonian;
pub mod lattice;
pub mod spinops;
pub mod tfa;

pub use error::{Error, Result};
