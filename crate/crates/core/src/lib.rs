//! Limiting spectral moments of banded sample covariance matrices.
//!
//! The exact side enumerates canonical plane trees and restricted
//! compositions to build the limiting moments as polynomials in
//! `gamma = d/n`. The empirical side simulates band-masked Gram matrices,
//! computes their spectra with a band eigensolver and compares the
//! resulting distributions and moments against theory.

pub mod combinatorics;
pub mod linalg;
pub mod metrics;
pub mod moments;
pub mod oracle;
mod par;
pub mod simulate;
pub mod verify;
