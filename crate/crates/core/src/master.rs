//! Finite-difference integration of the Fokker-Planck / Smoluchowski master
//! equations: the PDE-side oracle, independent of the lattice path integral.
//!
//! The spatial operator is discretized in conservative flux form (difference
//! of interface fluxes), which keeps the discrete interior mass exactly
//! conserved under zero-flux boundaries. Time stepping is Crank-Nicolson with
//! a tridiagonal solve per step; time-dependent coefficients are evaluated at
//! the half step.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{integrate, Grid1D, PositionFn, RealField};

/// Drift/diffusion-modulation coefficient as a function of `(x, t)`.
pub type CoeffFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub fn coeff_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> CoeffFn {
    Arc::new(f)
}

/// General 1-D Fokker-Planck system
/// `dP/dt = -d/dx{[A + D B B_x] P} + D d^2/dx^2 [B^2 P]`.
#[derive(Clone)]
pub struct FokkerPlanckSpec {
    pub d: f64,
    pub a: CoeffFn,
    pub b: CoeffFn,
}

impl FokkerPlanckSpec {
    pub fn new(d: f64, a: CoeffFn, b: CoeffFn) -> Result<Self> {
        if d <= 0.0 {
            return Err(Error::Domain("fokker-planck needs D > 0".into()));
        }
        Ok(FokkerPlanckSpec { d, a, b })
    }

    /// Pure diffusion: `A = 0`, `B = 1`.
    pub fn diffusion(d: f64) -> Result<Self> {
        Self::new(d, coeff_fn(|_, _| 0.0), coeff_fn(|_, _| 1.0))
    }
}

/// Over-damped system `dP/dt = D d^2 P/dx^2 + (1/(m gamma)) d/dx [V'(x) P]`.
#[derive(Clone)]
pub struct SmoluchowskiSpec {
    pub d: f64,
    pub v_prime: PositionFn,
    pub m_gamma: f64,
}

impl SmoluchowskiSpec {
    pub fn new(d: f64, v_prime: PositionFn, m_gamma: f64) -> Result<Self> {
        if d <= 0.0 || m_gamma <= 0.0 {
            return Err(Error::Domain("smoluchowski needs D, m_gamma > 0".into()));
        }
        Ok(SmoluchowskiSpec { d, v_prime, m_gamma })
    }

    /// Equivalent Fokker-Planck form: `A = -V'/(m gamma)`, `B = 1`.
    pub fn to_fokker_planck(&self) -> FokkerPlanckSpec {
        let v_prime = self.v_prime.clone();
        let m_gamma = self.m_gamma;
        FokkerPlanckSpec {
            d: self.d,
            a: coeff_fn(move |x, _| -v_prime(x) / m_gamma),
            b: coeff_fn(|_, _| 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    ZeroFlux,
    Dirichlet0,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub dt: f64,
    pub boundary: Boundary,
}

impl SolverConfig {
    pub fn new(dt: f64, boundary: Boundary) -> Result<Self> {
        if dt <= 0.0 {
            return Err(Error::Domain("solver needs dt > 0".into()));
        }
        Ok(SolverConfig { dt, boundary })
    }
}

/// Tridiagonal spatial operator: `(L P)_i = lower_i P_{i-1} + diag_i P_i + upper_i P_{i+1}`.
struct Tridiag {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiag {
    fn apply(&self, p: &[f64]) -> Vec<f64> {
        let n = p.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * p[i];
                if i > 0 {
                    v += self.lower[i] * p[i - 1];
                }
                if i + 1 < n {
                    v += self.upper[i] * p[i + 1];
                }
                v
            })
            .collect()
    }
}

/// Build the flux-form operator at time `t`. Interface fluxes
/// `J_{i+1/2} = A_eff (P_i + P_{i+1})/2 - (D/dx)(B^2_{i+1} P_{i+1} - B^2_i P_i)`
/// with `A_eff = A + D B dB/dx` evaluated at the interface.
fn build_operator(grid: Grid1D, spec: &FokkerPlanckSpec, t: f64, boundary: Boundary) -> Tridiag {
    let n = grid.n;
    let dx = grid.dx();
    let d = spec.d;
    let b_sq: Vec<f64> = grid.nodes().map(|x| (spec.b)(x, t).powi(2)).collect();
    let b_node: Vec<f64> = grid.nodes().map(|x| (spec.b)(x, t)).collect();
    // a_eff at interface i+1/2, i = 0..n-2
    let a_eff: Vec<f64> = (0..n - 1)
        .map(|i| {
            let xm = 0.5 * (grid.node(i) + grid.node(i + 1));
            let b_mid = 0.5 * (b_node[i] + b_node[i + 1]);
            let db = (b_node[i + 1] - b_node[i]) / dx;
            (spec.a)(xm, t) + d * b_mid * db
        })
        .collect();

    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    // contribution of J_{i+1/2} in terms of (P_i, P_{i+1}):
    //   c_self = a_eff/2 + D b_sq_i / dx ;  c_next = a_eff/2 - D b_sq_{i+1} / dx
    for i in 0..n {
        // flux out through the right interface
        if i + 1 < n {
            let c_self = 0.5 * a_eff[i] + d * b_sq[i] / dx;
            let c_next = 0.5 * a_eff[i] - d * b_sq[i + 1] / dx;
            diag[i] -= c_self / dx;
            upper[i] -= c_next / dx;
        }
        // flux in through the left interface
        if i > 0 {
            let c_prev = 0.5 * a_eff[i - 1] + d * b_sq[i - 1] / dx;
            let c_self = 0.5 * a_eff[i - 1] - d * b_sq[i] / dx;
            lower[i] += c_prev / dx;
            diag[i] += c_self / dx;
        }
    }
    if boundary == Boundary::Dirichlet0 {
        lower[0] = 0.0;
        diag[0] = 0.0;
        upper[0] = 0.0;
        lower[n - 1] = 0.0;
        diag[n - 1] = 0.0;
        upper[n - 1] = 0.0;
    }
    Tridiag { lower, diag, upper }
}

/// Right-hand side of the Fokker-Planck equation at time `t` (zero-flux
/// boundary treatment).
pub fn fp_rhs(p: &RealField, spec: &FokkerPlanckSpec, t: f64) -> RealField {
    let op = build_operator(p.grid, spec, t, Boundary::ZeroFlux);
    RealField { grid: p.grid, values: op.apply(&p.values) }
}

/// Right-hand side of the Smoluchowski equation.
pub fn smoluchowski_rhs(p: &RealField, spec: &SmoluchowskiSpec) -> RealField {
    fp_rhs(p, &spec.to_fokker_planck(), 0.0)
}

/// Thomas algorithm for `(lower, diag, upper) x = rhs`.
fn solve_tridiag(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Final-state report of a Crank-Nicolson run.
#[derive(Debug, Clone, Serialize)]
pub struct CnReport {
    pub steps: usize,
    pub mass_initial: f64,
    pub mass_final: f64,
    pub mass_drift: f64,
    pub min_value: f64,
}

/// Crank-Nicolson evolution of `init` under the Fokker-Planck spec up to
/// `t_final`, invoking `snapshot` after every step with
/// `(step index, time, node values)`.
pub fn evolve_with_snapshots(
    init: &RealField,
    spec: &FokkerPlanckSpec,
    t_final: f64,
    config: &SolverConfig,
    mut snapshot: impl FnMut(usize, f64, &[f64]),
) -> Result<(RealField, CnReport)> {
    if t_final < 0.0 {
        return Err(Error::Domain("t_final must be >= 0".into()));
    }
    let grid = init.grid;
    let mass_initial = integrate(init);
    let mut p = init.values.clone();
    let mut t = 0.0;
    let mut step = 0usize;
    while t < t_final - 1e-12 * t_final.max(1.0) {
        let dt = config.dt.min(t_final - t);
        let op = build_operator(grid, spec, t + 0.5 * dt, config.boundary);
        // (I - dt/2 L) p_new = (I + dt/2 L) p_old
        let half = 0.5 * dt;
        let rhs: Vec<f64> = op
            .apply(&p)
            .iter()
            .zip(&p)
            .map(|(lp, pi)| pi + half * lp)
            .collect();
        let lower: Vec<f64> = op.lower.iter().map(|v| -half * v).collect();
        let diag: Vec<f64> = op.diag.iter().map(|v| 1.0 - half * v).collect();
        let upper: Vec<f64> = op.upper.iter().map(|v| -half * v).collect();
        p = solve_tridiag(&lower, &diag, &upper, &rhs);
        t += dt;
        step += 1;
        snapshot(step, t, &p);
    }
    let out = RealField { grid, values: p };
    let mass_final = integrate(&out);
    let report = CnReport {
        steps: step,
        mass_initial,
        mass_final,
        mass_drift: (mass_final - mass_initial).abs(),
        min_value: out.values.iter().copied().fold(f64::INFINITY, f64::min),
    };
    Ok((out, report))
}

/// Crank-Nicolson evolution without snapshot output.
pub fn evolve_crank_nicolson(
    init: &RealField,
    spec: &FokkerPlanckSpec,
    t_final: f64,
    config: &SolverConfig,
) -> Result<(RealField, CnReport)> {
    evolve_with_snapshots(init, spec, t_final, config, |_, _, _| {})
}

/// Delta initial data mollified to a normalized Gaussian of width `3 dx`
/// (single-node spikes excite spurious oscillations under Crank-Nicolson).
pub fn mollified_delta(grid: Grid1D, x0: f64) -> Result<RealField> {
    if !grid.contains(x0) {
        return Err(Error::Domain(format!("x0 = {x0} outside grid")));
    }
    Ok(RealField::gaussian(grid, x0, 3.0 * grid.dx()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{ou_mean, ou_variance};
    use crate::grid::{expectation, position_fn};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sup(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn diffusion_rhs_matches_analytic_second_derivative() {
        let grid = Grid1D::new(-8.0, 8.0, 801).unwrap();
        let spec = FokkerPlanckSpec::diffusion(0.7).unwrap();
        let p = RealField::gaussian(grid, 0.0, 1.0);
        let rhs = fp_rhs(&p, &spec, 0.0);
        let analytic: Vec<f64> = grid
            .nodes()
            .map(|x| 0.7 * (x * x - 1.0) * (-(x * x) / 2.0).exp() / (2.0 * PI).sqrt())
            .collect();
        // interior nodes; boundary rows feel the zero-flux closure
        let s = sup(&rhs.values[5..796], &analytic[5..796]);
        assert!(s <= 5.0 * grid.dx().powi(2), "sup = {s}");
    }

    #[test]
    fn zero_field_maps_to_zero() {
        let grid = Grid1D::new(-4.0, 4.0, 101).unwrap();
        let spec = FokkerPlanckSpec::diffusion(1.0).unwrap();
        let rhs = fp_rhs(&RealField::zeros(grid), &spec, 0.0);
        assert!(rhs.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn drifted_gaussian_rhs_matches_time_derivative() {
        // A = v, B = 1 on the self-similar drifted profile: rhs = dP/dt analytically
        let (d, v, t) = (1.0, 2.0, 0.5);
        let grid = Grid1D::new(-10.0, 12.0, 1101).unwrap();
        let spec =
            FokkerPlanckSpec::new(d, coeff_fn(move |_, _| v), coeff_fn(|_, _| 1.0)).unwrap();
        let p = RealField::from_fn(grid, |x| {
            crate::closed_form::drift_brown_pdf(d, v, x, t).unwrap()
        });
        let rhs = fp_rhs(&p, &spec, t);
        // dP/dt of the drifted Gaussian by differentiating in t
        let var = 2.0 * d * t;
        let analytic: Vec<f64> = grid
            .nodes()
            .map(|x| {
                let z = x - v * t;
                let pdf = (2.0 * PI * var).sqrt().recip() * (-z * z / (2.0 * var)).exp();
                pdf * (-d / var + v * z / var + d * z * z / (var * var))
            })
            .collect();
        let s = sup(&rhs.values[5..1096], &analytic[5..1096]);
        assert!(s <= 10.0 * grid.dx().powi(2), "sup = {s}");
    }

    #[test]
    fn smoluchowski_reduces_to_diffusion_and_has_ou_stationary_state() {
        let grid = Grid1D::new(-8.0, 8.0, 801).unwrap();
        let free = SmoluchowskiSpec::new(1.0, position_fn(|_| 0.0), 1.0).unwrap();
        let p = RealField::gaussian(grid, 0.0, 1.0);
        let a = smoluchowski_rhs(&p, &free);
        let b = fp_rhs(&p, &FokkerPlanckSpec::diffusion(1.0).unwrap(), 0.0);
        assert!(sup(&a.values, &b.values) <= 1e-14);

        // stationary Gaussian of the OU process annihilates the rhs
        let (d, eta) = (1.0, 0.5);
        let ou = SmoluchowskiSpec::new(d, position_fn(move |x| eta * x), 1.0).unwrap();
        let stationary = RealField::from_fn(grid, |x| {
            (eta / (2.0 * PI * d)).sqrt() * (-eta * x * x / (2.0 * d)).exp()
        });
        let rhs = smoluchowski_rhs(&stationary, &ou);
        let s = rhs.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(s <= 5.0 * grid.dx().powi(2), "sup = {s}");
    }

    #[test]
    fn smoluchowski_harmonic_equals_expanded_ou_form() {
        // V' = m omega^2 x with eta = omega^2/gamma: D d2P + eta d/dx (x P)
        let grid = Grid1D::new(-6.0, 6.0, 601).unwrap();
        let (m, omega, gamma, d) = (2.0, 1.5, 3.0, 1.0);
        let eta = omega * omega / gamma;
        let spec =
            SmoluchowskiSpec::new(d, position_fn(move |x| m * omega * omega * x), m * gamma)
                .unwrap();
        let equivalent = SmoluchowskiSpec::new(d, position_fn(move |x| eta * x), 1.0).unwrap();
        let p = RealField::gaussian(grid, 0.5, 0.8);
        let a = smoluchowski_rhs(&p, &spec);
        let b = smoluchowski_rhs(&p, &equivalent);
        assert!(sup(&a.values, &b.values) <= 1e-12);
    }

    #[test]
    fn cn_pure_diffusion_variance_growth() {
        let grid = Grid1D::new(-10.0, 10.0, 1001).unwrap();
        let spec = FokkerPlanckSpec::diffusion(1.0).unwrap();
        let sigma0 = 0.5;
        let init = RealField::gaussian(grid, 0.0, sigma0);
        let config = SolverConfig::new(1e-3, Boundary::ZeroFlux).unwrap();
        let (out, report) = evolve_crank_nicolson(&init, &spec, 1.0, &config).unwrap();
        let var = expectation(&out, |x| x * x);
        assert_abs_diff_eq!(var, sigma0 * sigma0 + 2.0 * 1.0 * 1.0, epsilon = 1e-4);
        assert!(report.mass_drift <= 1e-10, "mass drift {}", report.mass_drift);
    }

    #[test]
    fn cn_zero_time_returns_init() {
        let grid = Grid1D::new(-5.0, 5.0, 201).unwrap();
        let spec = FokkerPlanckSpec::diffusion(1.0).unwrap();
        let init = RealField::gaussian(grid, 0.3, 0.7);
        let config = SolverConfig::new(1e-3, Boundary::ZeroFlux).unwrap();
        let (out, report) = evolve_crank_nicolson(&init, &spec, 0.0, &config).unwrap();
        assert_eq!(out.values, init.values);
        assert_eq!(report.steps, 0);
    }

    #[test]
    fn cn_ou_matches_analytically_evolved_gaussian() {
        // gaussian-initial OU stays gaussian: mean x0 e^{-eta t},
        // variance s0^2 e^{-2 eta t} + (D/eta)(1 - e^{-2 eta t})
        let grid = Grid1D::new(-10.0, 10.0, 1001).unwrap();
        let (d, eta, t, x0) = (1.0, 0.5, 1.0, 1.0);
        let spec = SmoluchowskiSpec::new(d, position_fn(move |x| eta * x), 1.0)
            .unwrap()
            .to_fokker_planck();
        let init = mollified_delta(grid, x0).unwrap();
        let sigma0 = 3.0 * grid.dx();
        let config = SolverConfig::new(1e-4, Boundary::ZeroFlux).unwrap();
        let (out, report) = evolve_crank_nicolson(&init, &spec, t, &config).unwrap();
        let mean_t = ou_mean(x0, eta, t);
        let var_t = sigma0 * sigma0 * (-2.0 * eta * t).exp() + ou_variance(d, eta, t);
        let analytic: Vec<f64> = grid
            .nodes()
            .map(|x| {
                (2.0 * PI * var_t).sqrt().recip()
                    * (-(x - mean_t).powi(2) / (2.0 * var_t)).exp()
            })
            .collect();
        let s = sup(&out.values, &analytic);
        assert!(s <= 1e-4, "sup = {s}");
        assert!(report.mass_drift <= 1e-10);
        // Crank-Nicolson may undershoot slightly but not beyond 1e-8 of peak
        let peak = out.values.iter().copied().fold(0.0, f64::max);
        assert!(report.min_value >= -1e-8 * peak, "min {}", report.min_value);
    }

    #[test]
    fn cn_ou_long_time_reaches_stationary_state() {
        // dx must be fine enough that the discrete stationary state sits
        // within 1e-6 of the continuum Gaussian (offset scales as dx^2)
        let grid = Grid1D::new(-10.0, 10.0, 2501).unwrap();
        let (d, eta) = (1.0, 0.5);
        let spec = SmoluchowskiSpec::new(d, position_fn(move |x| eta * x), 1.0)
            .unwrap()
            .to_fokker_planck();
        let stationary: Vec<f64> = grid
            .nodes()
            .map(|x| (eta / (2.0 * PI * d)).sqrt() * (-eta * x * x / (2.0 * d)).exp())
            .collect();
        let init = RealField::gaussian(grid, 2.0, 0.5);
        let config = SolverConfig::new(1e-3, Boundary::ZeroFlux).unwrap();
        let mut distances = Vec::new();
        let horizon = 20.0 / eta;
        let (_, _) = evolve_with_snapshots(&init, &spec, horizon, &config, |step, _, values| {
            if step % 5000 == 0 {
                distances.push(sup(values, &stationary));
            }
        })
        .unwrap();
        // monotone decay after the initial transient, and tight by t = 20/eta
        assert!(distances.windows(2).skip(1).all(|w| w[1] <= w[0] * 1.01));
        let last = *distances.last().unwrap();
        assert!(last <= 1e-6, "final distance {last}");
    }
}
