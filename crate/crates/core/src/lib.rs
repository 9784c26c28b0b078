//! Spectral analysis of the transfer operator of a beta-map.
//!
//! The crate computes greedy/quasi-greedy digit expansions, locates the
//! isolated eigenvalues of the transfer operator as reciprocals of zeros of
//! an explicit analytic function, evaluates the associated eigenfunctional
//! on indicators, drives the exact transfer action on step functions, and
//! probes the regularity of eigenvalue curves in the base parameter.

pub mod algebraic;
pub mod beta;
pub mod continuity;
pub mod dd;
pub mod error;
pub mod expansion;
pub mod functional;
pub mod poly;
pub mod quartic;
pub mod series;
pub mod spectra;
pub mod transfer;

pub use beta::{BetaSpec, Point, Precision};
pub use error::{Error, Result};
pub use expansion::{DigitSequence, OrbitOfOne, Simplicity};
pub use spectra::{Eigenvalue, EigenvalueKind, SpectrumReport};
