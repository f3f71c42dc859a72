//! Physical quantities computed from kernels and densities: moments, drift
//! velocity in two inequivalent readings, and the harmonic partition
//! function.

use serde::Serialize;

use crate::closed_form::harmonic_euclid_kernel;
use crate::error::{Error, Result};
use crate::grid::{expectation, integrate, trapezoid, Grid1D, RealField};

/// Quadrature mass, mean, and central variance of a density.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentReport {
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn moments(field: &RealField) -> Result<MomentReport> {
    let mass = integrate(field);
    if mass < 1e-12 {
        return Err(Error::DegenerateField(format!(
            "field mass {mass:.3e} too small for moments"
        )));
    }
    let mean = expectation(field, |x| x) / mass;
    let variance = (expectation(field, |x| (x - mean).powi(2)) / mass).max(0.0);
    Ok(MomentReport { mass, mean, variance })
}

/// Drift velocity as the centered time derivative of the mean position:
/// `(mean(t + delta) - mean(t - delta)) / (2 delta)`.
pub fn velocity_via_mean_drift(
    before: &RealField,
    after: &RealField,
    delta: f64,
) -> Result<f64> {
    if delta <= 0.0 {
        return Err(Error::Domain("velocity stencil needs delta > 0".into()));
    }
    let m0 = moments(before)?;
    let m1 = moments(after)?;
    Ok((m1.mean - m0.mean) / (2.0 * delta))
}

/// Literal expectation of the scaled gradient operator: quadrature of
/// `-(1/mu) dP/dx` over the grid.
///
/// For any density that decays at the grid edges this is a total-derivative
/// integral and evaluates to 0 up to quadrature error — including for a
/// drifting Gaussian, where the mean-drift reading gives `v`. The two
/// readings genuinely differ; verification reports print both.
pub fn velocity_operator_literal(density: &RealField, mu: f64) -> Result<f64> {
    if mu <= 0.0 {
        return Err(Error::Domain("velocity operator needs mu > 0".into()));
    }
    let dx = density.grid.dx();
    let n = density.grid.n;
    let v = &density.values;
    // centered differences inside, one-sided at the edges
    let grad: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                (v[1] - v[0]) / dx
            } else if i == n - 1 {
                (v[n - 1] - v[n - 2]) / dx
            } else {
                (v[i + 1] - v[i - 1]) / (2.0 * dx)
            }
        })
        .collect();
    Ok(-trapezoid(dx, &grad) / mu)
}

/// Harmonic partition function by diagonal quadrature of the closed-form
/// Euclidean kernel over imaginary-time extent `beta_hbar`:
/// `Z = int dx K(x, x, beta_hbar)`, exactly `1/(2 sinh(beta hbar omega / 2))`.
pub fn partition_function(mu: f64, omega: f64, beta_hbar: f64, grid: Grid1D) -> Result<f64> {
    if beta_hbar <= 0.0 {
        return Err(Error::Domain("partition function needs beta_hbar > 0".into()));
    }
    let diag: Result<Vec<f64>> = grid
        .nodes()
        .map(|x| harmonic_euclid_kernel(mu, omega, x, x, beta_hbar))
        .collect();
    Ok(trapezoid(grid.dx(), &diag?))
}

/// Closed-form partition value `1/(2 sinh(beta hbar omega / 2))` for
/// reference in comparisons.
pub fn partition_exact(omega: f64, beta_hbar: f64) -> f64 {
    0.5 / (0.5 * beta_hbar * omega).sinh()
}

/// Partition function from a lattice kernel's diagonal (trace of the
/// transfer-matrix propagator at the kernel's time extent).
pub fn partition_from_lattice(kernel: &crate::lattice::KernelMatrix) -> f64 {
    let diag: Vec<f64> = (0..kernel.grid.n).map(|i| kernel.entries[(i, i)]).collect();
    trapezoid(kernel.grid.dx(), &diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{drift_brown_pdf, ou_absolute_pdf, ou_mean, ou_variance};
    use crate::grid::recommended_half_width;
    use crate::lattice::{euclid_kernel_matrix, TimeSlicing};
    use crate::wick::GeneratorSpec;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn drifted_brownian_moments() {
        let (d, v, t) = (1.0, 2.0, 0.8);
        let half = recommended_half_width(v * t, (2.0 * d * t).sqrt());
        let grid = Grid1D::new(v * t - half, v * t + half, 4001).unwrap();
        let p = RealField::from_fn(grid, |x| drift_brown_pdf(d, v, x, t).unwrap());
        let m = moments(&p).unwrap();
        assert_abs_diff_eq!(m.mass, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m.mean, v * t, epsilon = 1e-8);
        assert_abs_diff_eq!(m.variance, 2.0 * d * t, epsilon = 1e-8);
    }

    #[test]
    fn ou_density_moments() {
        let (d, eta, x_a, t) = (1.0, 0.5, 1.0, 1.0);
        let grid = Grid1D::new(-14.0, 14.0, 7001).unwrap();
        let p = RealField::from_fn(grid, |x| {
            crate::closed_form::ou_kernel(d, eta, x, x_a, t).unwrap()
        });
        let m = moments(&p).unwrap();
        assert_abs_diff_eq!(m.mean, ou_mean(x_a, eta, t), epsilon = 1e-8);
        assert_abs_diff_eq!(m.variance, ou_variance(d, eta, t), epsilon = 1e-8);
    }

    #[test]
    fn symmetric_field_has_zero_mean_and_empty_field_errors() {
        let grid = Grid1D::new(-5.0, 5.0, 501).unwrap();
        let p = RealField::gaussian(grid, 0.0, 1.0);
        let m = moments(&p).unwrap();
        assert_abs_diff_eq!(m.mean, 0.0, epsilon = 1e-12);

        let zero = RealField::zeros(grid);
        assert!(matches!(moments(&zero), Err(Error::DegenerateField(_))));
    }

    #[test]
    fn mean_drift_velocity_readings() {
        let (d, v, t, delta) = (1.0, 2.0, 1.0, 1e-3);
        let grid = Grid1D::new(-12.0, 16.0, 7001).unwrap();
        let at = |tt: f64| RealField::from_fn(grid, |x| drift_brown_pdf(d, v, x, tt).unwrap());
        let vel = velocity_via_mean_drift(&at(t - delta), &at(t + delta), delta).unwrap();
        assert_abs_diff_eq!(vel, v, epsilon = 1e-8);

        // pure diffusion: zero drift
        let at0 = |tt: f64| RealField::from_fn(grid, |x| drift_brown_pdf(d, 0.0, x, tt).unwrap());
        let vel0 = velocity_via_mean_drift(&at0(t - delta), &at0(t + delta), delta).unwrap();
        assert_abs_diff_eq!(vel0, 0.0, epsilon = 1e-10);

        // relaxing mean: d<x>/dt = -eta <x>
        let (eta, x_a) = (0.5, 1.0);
        let at_ou = |tt: f64| {
            RealField::from_fn(grid, |x| crate::closed_form::ou_kernel(d, eta, x, x_a, tt).unwrap())
        };
        let vel_ou = velocity_via_mean_drift(&at_ou(t - delta), &at_ou(t + delta), delta).unwrap();
        assert_abs_diff_eq!(vel_ou, -eta * ou_mean(x_a, eta, t), epsilon = 1e-6);
    }

    #[test]
    fn literal_operator_vanishes_on_decaying_densities() {
        let grid = Grid1D::new(-12.0, 16.0, 2001).unwrap();
        // drifting Gaussian: literal reading gives 0, not the drift speed
        let p = RealField::from_fn(grid, |x| drift_brown_pdf(1.0, 2.0, x, 1.0).unwrap());
        let lit = velocity_operator_literal(&p, 1.0).unwrap();
        assert!(lit.abs() <= grid.dx().powi(2), "literal velocity {lit}");

        let sym = RealField::gaussian(grid, 2.0, 1.0);
        let lit = velocity_operator_literal(&sym, 2.0).unwrap();
        assert!(lit.abs() <= grid.dx().powi(2));
    }

    #[test]
    fn partition_value_and_limits() {
        let grid = Grid1D::new(-8.0, 8.0, 1601).unwrap();
        // beta hbar omega = 2: exact value 1/(2 sinh 1)
        let z = partition_function(1.0, 1.0, 2.0, grid).unwrap();
        assert_abs_diff_eq!(z, 0.425_459_138_5, epsilon = 1e-6);
        assert_abs_diff_eq!(z, partition_exact(1.0, 2.0), epsilon = 1e-9);

        // ground-state dominance at large extent
        let z = partition_function(1.0, 1.0, 30.0, Grid1D::new(-6.0, 6.0, 1201).unwrap()).unwrap();
        assert_relative_eq!(z, (-15.0_f64).exp(), max_relative = 1e-6);

        // classical limit: Z -> 1/(beta hbar omega). The diagonal spreads as
        // 1/sqrt(beta) so the grid must widen accordingly.
        let beta_hbar = 0.01;
        let wide = Grid1D::new(-250.0, 250.0, 50_001).unwrap();
        let z = partition_function(1.0, 1.0, beta_hbar, wide).unwrap();
        assert_relative_eq!(z, 1.0 / beta_hbar, max_relative = 1e-3);
    }

    #[test]
    fn lattice_partition_converges_first_order() {
        let (mu, omega, beta_hbar) = (1.0, 1.0, 2.0);
        let g = GeneratorSpec::harmonic(mu, omega).unwrap();
        let grid = Grid1D::new(-8.0, 8.0, 401).unwrap();
        let exact = partition_exact(omega, beta_hbar);
        let z_at = |steps: usize| {
            let slicing = TimeSlicing::over(beta_hbar, steps).unwrap();
            let k = euclid_kernel_matrix(&g, grid, slicing).unwrap();
            partition_from_lattice(&k)
        };
        let e1 = (z_at(100) - exact).abs();
        let e2 = (z_at(200) - exact).abs();
        let order = (e1 / e2).log2();
        // the trace is cyclically invariant, which symmetrizes the kinetic/
        // potential splitting: the diagonal sum converges at second order,
        // better than the first-order rate of the off-diagonal entries
        assert!(order >= 0.8, "order {order} ({e1} vs {e2})");
        assert!((1.7..=2.3).contains(&order), "order {order} ({e1} vs {e2})");
    }
}
