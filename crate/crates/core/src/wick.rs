//! Wick rotations as explicit transforms on system specifications.
//!
//! The special rotation (imaginary time only) maps a quantum Hamiltonian to
//! the generator of an induced micro diffusion with identical parameters; the
//! general rotation additionally shifts the inverse-diffusion mass and the
//! potential, or produces the drift form of the strongly damped regime. The
//! operator-level content of the rotation is not manipulated symbolically;
//! it is verified numerically by [`continuation_check`] and by the lattice
//! propagator module.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closed_form::{
    brown_kernel, harmonic_euclid_kernel, EuclideanKernelSpec, QuantumKernelSpec,
};
use crate::error::{Error, Result};
use crate::grid::{position_fn, PositionFn, Units};

/// Scalar potential in the reduced form `u(x) = V(x)/m`, carried with its
/// derivative so the strong-damping drift `V'(x) = m u'(x)` is exact.
#[derive(Clone)]
pub enum Potential {
    Zero,
    /// `u(x) = omega^2 x^2 / 2`
    Harmonic { omega: f64 },
    Custom { u: PositionFn, du: PositionFn },
}

impl Potential {
    pub fn u(&self, x: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Harmonic { omega } => 0.5 * omega * omega * x * x,
            Potential::Custom { u, .. } => u(x),
        }
    }

    pub fn du(&self, x: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Harmonic { omega } => omega * omega * x,
            Potential::Custom { du, .. } => du(x),
        }
    }
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Potential::Zero => write!(f, "Zero"),
            Potential::Harmonic { omega } => write!(f, "Harmonic {{ omega: {omega} }}"),
            Potential::Custom { .. } => write!(f, "Custom {{ .. }}"),
        }
    }
}

/// Quantum side of the bridge: `mu_h = m/hbar` and the reduced potential,
/// so that `V_h(x) = mu_h * u(x)`.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    pub mass: f64,
    pub hbar: f64,
    pub potential: Potential,
    pub time_dependent: bool,
}

impl HamiltonianSpec {
    pub fn new(mass: f64, hbar: f64, potential: Potential) -> Result<Self> {
        if mass <= 0.0 || hbar <= 0.0 {
            return Err(Error::Domain("hamiltonian needs mass, hbar > 0".into()));
        }
        Ok(HamiltonianSpec { mass, hbar, potential, time_dependent: false })
    }

    pub fn free(mass: f64, hbar: f64) -> Result<Self> {
        Self::new(mass, hbar, Potential::Zero)
    }

    pub fn harmonic(mass: f64, hbar: f64, omega: f64) -> Result<Self> {
        if omega <= 0.0 {
            return Err(Error::Domain("harmonic potential needs omega > 0".into()));
        }
        Self::new(mass, hbar, Potential::Harmonic { omega })
    }

    /// Inverse-diffusion mass `mu_h = m / hbar`.
    pub fn mu_h(&self) -> f64 {
        self.mass / self.hbar
    }

    /// Reduced potential `V_h(x) = V(x)/hbar = mu_h u(x)`.
    pub fn v_h(&self, x: f64) -> f64 {
        self.mu_h() * self.potential.u(x)
    }

    /// Physical potential gradient `V'(x) = m u'(x)`.
    pub fn v_prime(&self, x: f64) -> f64 {
        self.mass * self.potential.du(x)
    }
}

/// Euclidean generator `G = kappa^2/(2 mu) - W` in one of its two forms.
#[derive(Clone)]
pub enum WForm {
    /// `W(x)` entering the generator as an Euclidean potential.
    PotentialLike { w: PositionFn },
    /// Drift form of the strongly damped regime: the short-time kernel is a
    /// Gaussian around `x - V'(x) dt / (m gamma)`.
    DriftForm { v_prime: PositionFn, m_gamma: f64 },
}

#[derive(Clone)]
pub struct GeneratorSpec {
    pub mu: f64,
    pub form: WForm,
}

impl GeneratorSpec {
    pub fn potential_like(mu: f64, w: PositionFn) -> Result<Self> {
        if mu <= 0.0 {
            return Err(Error::Domain("generator needs mu > 0".into()));
        }
        Ok(GeneratorSpec { mu, form: WForm::PotentialLike { w } })
    }

    pub fn drift_form(mu: f64, v_prime: PositionFn, m_gamma: f64) -> Result<Self> {
        if mu <= 0.0 || m_gamma <= 0.0 {
            return Err(Error::Domain("generator needs mu, m_gamma > 0".into()));
        }
        Ok(GeneratorSpec { mu, form: WForm::DriftForm { v_prime, m_gamma } })
    }

    /// Free diffusion with coefficient `D` (`mu = 1/(2D)`, `W = 0`).
    pub fn brown(d: f64) -> Result<Self> {
        if d <= 0.0 {
            return Err(Error::Domain("diffusion needs D > 0".into()));
        }
        Self::potential_like(1.0 / (2.0 * d), position_fn(|_| 0.0))
    }

    /// Harmonic Euclidean generator `W(x) = mu omega^2 x^2 / 2`.
    pub fn harmonic(mu: f64, omega: f64) -> Result<Self> {
        let w = move |x: f64| 0.5 * mu * omega * omega * x * x;
        Self::potential_like(mu, position_fn(w))
    }

    /// Ornstein-Uhlenbeck process in drift form: relaxation `V'(x)/(m gamma) = eta x`.
    pub fn ou(d: f64, eta: f64) -> Result<Self> {
        if d <= 0.0 || eta <= 0.0 {
            return Err(Error::Domain("ou generator needs D, eta > 0".into()));
        }
        Self::drift_form(1.0 / (2.0 * d), position_fn(move |x| eta * x), 1.0)
    }

    /// Effective diffusion coefficient `D = 1/(2 mu)`.
    pub fn diffusion_coefficient(&self) -> f64 {
        1.0 / (2.0 * self.mu)
    }

    /// Euclidean potential term `W(x)` (zero for the drift form, whose
    /// potential content lives in the drift instead).
    pub fn w(&self, x: f64) -> f64 {
        match &self.form {
            WForm::PotentialLike { w } => w(x),
            WForm::DriftForm { .. } => 0.0,
        }
    }
}

impl std::fmt::Debug for GeneratorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let form = match self.form {
            WForm::PotentialLike { .. } => "PotentialLike",
            WForm::DriftForm { m_gamma, .. } => {
                return write!(
                    f,
                    "GeneratorSpec {{ mu: {}, form: DriftForm {{ m_gamma: {m_gamma} }} }}",
                    self.mu
                )
            }
        };
        write!(f, "GeneratorSpec {{ mu: {}, form: {form} }}", self.mu)
    }
}

/// Which Wick rotation to apply and with which target parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WickMode {
    /// Imaginary-time rotation only: identical parameters, induced micro diffusion.
    SwrMicro,
    /// Macro diffusion: `mu -> mu_D = 1/(2D)`, `W = mu_D u`.
    GwrMacro { d: f64 },
    /// Strongly damped regime: drift form with `V'` and the given `m gamma`.
    GwrStrongDamping { d: f64, m_gamma: f64 },
}

/// Special Wick Rotation: same `mu`, same potential function, sign structure
/// fixed by `G = kappa^2/(2 mu_h) - W`.
pub fn swr_map(h: &HamiltonianSpec) -> GeneratorSpec {
    let mu = h.mu_h();
    let pot = h.potential.clone();
    GeneratorSpec {
        mu,
        form: WForm::PotentialLike { w: position_fn(move |x| mu * pot.u(x)) },
    }
}

/// General Wick Rotation in one of the three modes.
pub fn gwr_map(h: &HamiltonianSpec, mode: WickMode) -> Result<GeneratorSpec> {
    match mode {
        WickMode::SwrMicro => Ok(swr_map(h)),
        WickMode::GwrMacro { d } => {
            if d <= 0.0 {
                return Err(Error::Domain("GWR macro mode needs D > 0".into()));
            }
            let mu_d = 1.0 / (2.0 * d);
            let pot = h.potential.clone();
            Ok(GeneratorSpec {
                mu: mu_d,
                form: WForm::PotentialLike { w: position_fn(move |x| mu_d * pot.u(x)) },
            })
        }
        WickMode::GwrStrongDamping { d, m_gamma } => {
            if d <= 0.0 || m_gamma <= 0.0 {
                return Err(Error::Domain("strong damping mode needs D, m_gamma > 0".into()));
            }
            let mass = h.mass;
            let pot = h.potential.clone();
            GeneratorSpec::drift_form(
                1.0 / (2.0 * d),
                position_fn(move |x| mass * pot.du(x)),
                m_gamma,
            )
        }
    }
}

/// Induced micro diffusion coefficient `D_h = hbar / (2m)`.
pub fn micro_diffusion_coefficient(mass: f64, hbar: f64) -> f64 {
    hbar / (2.0 * mass)
}

/// Microscopic friction coefficient `gamma = 2 k_B T / hbar`.
pub fn micro_friction(temperature: f64, units: &Units) -> Result<f64> {
    if temperature <= 0.0 {
        return Err(Error::Domain("temperature must be positive".into()));
    }
    Ok(2.0 * units.k_b * temperature / units.hbar)
}

/// Macroscopic diffusion coefficient `D = k_B T / (m gamma)`.
pub fn macro_diffusion_coefficient(temperature: f64, m_gamma: f64, units: &Units) -> f64 {
    units.k_b * temperature / m_gamma
}

/// Relaxation rate of the strongly damped harmonic oscillator, `eta = omega^2/gamma`.
pub fn ou_relaxation_rate(omega: f64, gamma: f64) -> f64 {
    omega * omega / gamma
}

/// Euclidean Lagrangian of a generator as a function of `(x, xdot)`.
///
/// Potential form: `L_e = (mu/2) xdot^2 + W(x)`; drift form:
/// `L_e = (mu/2) [xdot + V'(x)/(m gamma)]^2` (a perfect square, so
/// non-negative everywhere).
pub fn euclid_lagrangian(g: &GeneratorSpec) -> impl Fn(f64, f64) -> f64 + Send + Sync {
    let mu = g.mu;
    let form = g.form.clone();
    move |x: f64, xdot: f64| match &form {
        WForm::PotentialLike { w } => 0.5 * mu * xdot * xdot + w(x),
        WForm::DriftForm { v_prime, m_gamma } => {
            let s = xdot + v_prime(x) / m_gamma;
            0.5 * mu * s * s
        }
    }
}

/// Result of evaluating a quantum kernel at `t = -i tau` against the
/// SWR-mapped Euclidean kernel at `tau`.
#[derive(Debug, Clone, Copy)]
pub struct ContinuationCheck {
    pub quantum_at_imag_t: Complex64,
    pub euclid: f64,
    pub abs_error: f64,
}

/// Evaluate both sides of the analytic-continuation identity.
pub fn continuation_check(
    qspec: &QuantumKernelSpec,
    x_b: f64,
    x_a: f64,
    tau: f64,
) -> Result<ContinuationCheck> {
    if tau <= 0.0 {
        return Err(Error::Domain("continuation check needs tau > 0".into()));
    }
    qspec.validate()?;
    let t = Complex64::new(0.0, -tau);
    let quantum = qspec.kernel(x_b, x_a, t)?;
    let euclid = match *qspec {
        QuantumKernelSpec::FreeParticle { mass, hbar } => {
            brown_kernel(micro_diffusion_coefficient(mass, hbar), x_b, x_a, tau)?
        }
        QuantumKernelSpec::Harmonic { mass, hbar, omega } => {
            harmonic_euclid_kernel(mass / hbar, omega, x_b, x_a, tau)?
        }
    };
    let abs_error = (quantum - Complex64::from(euclid)).norm();
    Ok(ContinuationCheck { quantum_at_imag_t: quantum, euclid, abs_error })
}

/// Serializable system description: the CLI's JSON document format. Each
/// variant mirrors one of the library's parametric specifications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SystemDoc {
    Free { mass: f64, hbar: f64 },
    Qho { mass: f64, hbar: f64, omega: f64 },
    Brown { d: f64 },
    DriftBrown { d: f64, v: f64 },
    HarmonicEuclid { mu: f64, omega: f64 },
    Ou { d: f64, eta: f64 },
}

impl SystemDoc {
    pub fn as_quantum(&self) -> Option<QuantumKernelSpec> {
        match *self {
            SystemDoc::Free { mass, hbar } => Some(QuantumKernelSpec::FreeParticle { mass, hbar }),
            SystemDoc::Qho { mass, hbar, omega } => {
                Some(QuantumKernelSpec::Harmonic { mass, hbar, omega })
            }
            _ => None,
        }
    }

    pub fn as_euclidean(&self) -> Option<EuclideanKernelSpec> {
        match *self {
            SystemDoc::Brown { d } => Some(EuclideanKernelSpec::Brown { d }),
            SystemDoc::DriftBrown { d, v } => Some(EuclideanKernelSpec::DriftBrown { d, v }),
            SystemDoc::HarmonicEuclid { mu, omega } => {
                Some(EuclideanKernelSpec::HarmonicEuclid { mu, omega })
            }
            SystemDoc::Ou { d, eta } => Some(EuclideanKernelSpec::Ou { d, eta }),
            _ => None,
        }
    }

    pub fn as_hamiltonian(&self) -> Option<HamiltonianSpec> {
        match *self {
            SystemDoc::Free { mass, hbar } => HamiltonianSpec::free(mass, hbar).ok(),
            SystemDoc::Qho { mass, hbar, omega } => {
                HamiltonianSpec::harmonic(mass, hbar, omega).ok()
            }
            _ => None,
        }
    }

    pub fn as_generator(&self) -> Option<GeneratorSpec> {
        match *self {
            SystemDoc::Brown { d } => GeneratorSpec::brown(d).ok(),
            SystemDoc::HarmonicEuclid { mu, omega } => GeneratorSpec::harmonic(mu, omega).ok(),
            SystemDoc::Ou { d, eta } => GeneratorSpec::ou(d, eta).ok(),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(q) = self.as_quantum() {
            return q.validate();
        }
        if let Some(e) = self.as_euclidean() {
            return e.validate();
        }
        Ok(())
    }
}
