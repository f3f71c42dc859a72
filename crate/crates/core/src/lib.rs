//! Numerical bridge between quantum propagators and diffusion processes.
//!
//! The crate implements both sides of the imaginary-time correspondence as
//! executable, mutually cross-checking code paths:
//!
//! - [`closed_form`]: analytic transition amplitudes and probabilities
//!   (free particle, harmonic oscillator, Brownian, Ornstein-Uhlenbeck);
//! - [`wick`]: the special/general Wick rotations as transforms on system
//!   specifications, with the induced constants and Euclidean Lagrangians;
//! - [`lattice`]: the time-sliced path integral as a transfer-matrix
//!   propagator, plus split-operator quantum propagation;
//! - [`master`]: Crank-Nicolson integration of the Fokker-Planck and
//!   Smoluchowski equations;
//! - [`mc`]: Euler-Maruyama trajectory sampling and a Feynman-Kac
//!   bridge-sampling estimator of the Euclidean kernel;
//! - [`observables`]: moments, drift velocities and the harmonic partition
//!   function;
//! - [`verify`]: named acceptance scenarios tying all of the above together.

pub mod closed_form;
pub mod error;
pub mod grid;
pub mod lattice;
pub mod master;
pub mod mc;
pub mod observables;
pub mod verify;
pub mod wick;

pub use error::{Error, Result};
