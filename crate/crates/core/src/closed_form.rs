//! Closed-form transition amplitudes and transition probabilities.
//!
//! These are the ground-truth oracles the lattice, PDE and Monte Carlo
//! modules are checked against: the free-particle and harmonic-oscillator
//! quantum kernels, and the Brownian, drifted-Brownian, harmonic-Euclidean
//! and Ornstein-Uhlenbeck probability kernels.
//!
//! Quantum kernels accept complex time so that Wick continuation t = -i*tau
//! can be evaluated directly; Euclidean kernels are real-time, real-valued.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const CAUSTIC_TOL: f64 = 1e-12;

/// Quantum system with a closed-form transition amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum QuantumKernelSpec {
    FreeParticle { mass: f64, hbar: f64 },
    Harmonic { mass: f64, hbar: f64, omega: f64 },
}

impl QuantumKernelSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            QuantumKernelSpec::FreeParticle { mass, hbar } => mass > 0.0 && hbar > 0.0,
            QuantumKernelSpec::Harmonic { mass, hbar, omega } => {
                mass > 0.0 && hbar > 0.0 && omega > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("quantum spec parameters must be positive".into()))
        }
    }

    /// Transition amplitude `<x_b, t | x_a, 0>` at (possibly complex) time `t`.
    pub fn kernel(&self, x_b: f64, x_a: f64, t: Complex64) -> Result<Complex64> {
        match *self {
            QuantumKernelSpec::FreeParticle { mass, hbar } => {
                quantum_free_kernel(mass, hbar, x_b, x_a, t)
            }
            QuantumKernelSpec::Harmonic { mass, hbar, omega } => {
                quantum_harmonic_kernel(mass, hbar, omega, x_b, x_a, t)
            }
        }
    }
}

/// Euclidean (diffusion) system with a closed-form transition probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum EuclideanKernelSpec {
    Brown { d: f64 },
    DriftBrown { d: f64, v: f64 },
    HarmonicEuclid { mu: f64, omega: f64 },
    Ou { d: f64, eta: f64 },
}

impl EuclideanKernelSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            EuclideanKernelSpec::Brown { d } => d > 0.0,
            EuclideanKernelSpec::DriftBrown { d, .. } => d > 0.0,
            EuclideanKernelSpec::HarmonicEuclid { mu, omega } => mu > 0.0 && omega > 0.0,
            EuclideanKernelSpec::Ou { d, eta } => d > 0.0 && eta > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("euclidean spec parameters must be positive".into()))
        }
    }

    /// Transition probability kernel `P(x_b, t | x_a, 0)`.
    pub fn kernel(&self, x_b: f64, x_a: f64, t: f64) -> Result<f64> {
        match *self {
            EuclideanKernelSpec::Brown { d } => brown_kernel(d, x_b, x_a, t),
            EuclideanKernelSpec::DriftBrown { d, v } => {
                // kernel form: Gaussian centered at x_a + v t
                check_t(t)?;
                Ok(gaussian_pdf(x_b - x_a - v * t, 2.0 * d * t))
            }
            EuclideanKernelSpec::HarmonicEuclid { mu, omega } => {
                harmonic_euclid_kernel(mu, omega, x_b, x_a, t)
            }
            EuclideanKernelSpec::Ou { d, eta } => ou_kernel(d, eta, x_b, x_a, t),
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("diffusion kernel needs t > 0, got t = {t}")))
    }
}

fn gaussian_pdf(dx: f64, variance: f64) -> f64 {
    (2.0 * PI * variance).sqrt().recip() * (-dx * dx / (2.0 * variance)).exp()
}

/// Free-particle amplitude `sqrt(m/(2 pi i hbar t)) exp(i m (x_b-x_a)^2/(2 hbar t))`,
/// principal branch of the complex square root.
pub fn quantum_free_kernel(
    mass: f64,
    hbar: f64,
    x_b: f64,
    x_a: f64,
    t: Complex64,
) -> Result<Complex64> {
    if t.norm() == 0.0 {
        return Err(Error::Singularity("free-particle kernel at t = 0".into()));
    }
    let i = Complex64::i();
    let d = x_b - x_a;
    let prefactor = (Complex64::from(mass / (2.0 * PI * hbar)) / (i * t)).sqrt();
    let phase = (i * mass * d * d / (2.0 * hbar * t)).exp();
    Ok(prefactor * phase)
}

/// Harmonic-oscillator amplitude, complex arithmetic throughout; errors on a
/// caustic (`|sin(omega t)| < 1e-12`).
pub fn quantum_harmonic_kernel(
    mass: f64,
    hbar: f64,
    omega: f64,
    x_b: f64,
    x_a: f64,
    t: Complex64,
) -> Result<Complex64> {
    let s = (omega * t).sin();
    if s.norm() < CAUSTIC_TOL {
        return Err(Error::Caustic { sin_abs: s.norm() });
    }
    let i = Complex64::i();
    let c = (omega * t).cos();
    let prefactor = (Complex64::from(mass * omega / (2.0 * PI * hbar)) / (i * s)).sqrt();
    let exponent =
        i * mass * omega / (2.0 * hbar * s) * ((x_b * x_b + x_a * x_a) * c - 2.0 * x_a * x_b);
    Ok(prefactor * exponent.exp())
}

/// Brownian transition probability `(4 pi D t)^(-1/2) exp(-(x_b-x_a)^2/(4 D t))`.
pub fn brown_kernel(d: f64, x_b: f64, x_a: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(gaussian_pdf(x_b - x_a, 2.0 * d * t))
}

/// Absolute PDF of drifted Brownian motion started at the origin.
pub fn drift_brown_pdf(d: f64, v: f64, x: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(gaussian_pdf(x - v * t, 2.0 * d * t))
}

/// Harmonic Euclidean kernel in the mu-parameterization:
/// `sqrt(mu w / (2 pi sinh wt)) exp(-(mu w/(2 sinh wt)) [(x_b^2+x_a^2) cosh wt - 2 x_a x_b])`.
pub fn harmonic_euclid_kernel(mu: f64, omega: f64, x_b: f64, x_a: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    if mu <= 0.0 || omega <= 0.0 {
        return Err(Error::Domain("harmonic euclid kernel needs mu, omega > 0".into()));
    }
    let sh = (omega * t).sinh();
    let ch = (omega * t).cosh();
    let a = mu * omega / (2.0 * sh);
    Ok((a / PI).sqrt() * (-a * ((x_b * x_b + x_a * x_a) * ch - 2.0 * x_a * x_b)).exp())
}

/// Relaxed mean of the OU process, `x_a e^{-eta t}`.
pub fn ou_mean(x_a: f64, eta: f64, t: f64) -> f64 {
    x_a * (-eta * t).exp()
}

/// OU variance `(D/eta)(1 - e^{-2 eta t})`, computed via `exp_m1` so the
/// small-eta limit `2 D t` is reached without cancellation.
pub fn ou_variance(d: f64, eta: f64, t: f64) -> f64 {
    -d / eta * (-2.0 * eta * t).exp_m1()
}

/// Ornstein-Uhlenbeck transition kernel: Gaussian with exponentially relaxing
/// mean and saturating variance.
pub fn ou_kernel(d: f64, eta: f64, x_b: f64, x_a: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    if d <= 0.0 || eta <= 0.0 {
        return Err(Error::Domain("ou kernel needs D, eta > 0".into()));
    }
    Ok(gaussian_pdf(x_b - ou_mean(x_a, eta, t), ou_variance(d, eta, t)))
}

/// Brownian absolute PDF started at the origin (kernel with x_a = 0).
pub fn brown_absolute_pdf(d: f64, x: f64, t: f64) -> Result<f64> {
    brown_kernel(d, x, 0.0, t)
}

/// OU absolute PDF started at the origin.
pub fn ou_absolute_pdf(d: f64, eta: f64, x: f64, t: f64) -> Result<f64> {
    ou_kernel(d, eta, x, 0.0, t)
}

/// Free evolution of the normalized Gaussian packet
/// `(2 pi sigma^2)^(-1/4) exp(-(x-x0)^2/(4 sigma^2) + i k0 (x-x0))`,
/// obtained by Gaussian integration of its convolution with the free kernel.
///
/// With `a = 1/(4 sigma^2)` and `b = m/(2 hbar t)`:
/// `psi(x,t) = N sqrt(b/(i pi)) sqrt(pi/(a-ib))
///             exp(i b X^2 + (i k0 - 2 i b X)^2 / (4(a-ib)))`, `X = x - x0`.
pub fn quantum_free_packet(
    mass: f64,
    hbar: f64,
    x0: f64,
    sigma: f64,
    k0: f64,
    x: f64,
    t: f64,
) -> Result<Complex64> {
    if mass <= 0.0 || hbar <= 0.0 || sigma <= 0.0 {
        return Err(Error::Domain("free packet needs mass, hbar, sigma > 0".into()));
    }
    if t < 0.0 {
        return Err(Error::Domain("free packet evolution needs t >= 0".into()));
    }
    let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
    let xx = x - x0;
    if t == 0.0 {
        return Ok(norm
            * Complex64::new(-xx * xx / (4.0 * sigma * sigma), k0 * xx).exp());
    }
    let i = Complex64::i();
    let a = 1.0 / (4.0 * sigma * sigma);
    let b = mass / (2.0 * hbar * t);
    let amb = Complex64::new(a, -b); // a - ib, positive real part
    let lin = i * (k0 - 2.0 * b * xx);
    let exponent = i * b * xx * xx + lin * lin / (4.0 * amb);
    Ok(norm * (-i * b / PI).sqrt() * (Complex64::from(PI) / amb).sqrt() * exponent.exp())
}
