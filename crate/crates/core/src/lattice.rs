//! Time-sliced path integrals as executable propagators.
//!
//! Euclidean side: the short-time kernel obtained from the Gaussian
//! wave-number integration is discretized into a transfer matrix over grid
//! nodes and composed by matrix multiplication. Quantum side: split-operator
//! propagation with the kinetic factor applied as a Fourier multiplier.
//!
//! The transfer matrix implicitly imposes absorbing truncation (paths leaving
//! the grid are lost); split-step propagation is periodic by construction of
//! the discrete Fourier transform. Both are controlled error sources under
//! the domain-truncation policy. Column-sum defects of transfer matrices are
//! a measured diagnostic and are never silently corrected.

use std::f64::consts::PI;
use std::io::Write;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid1D, RealField};
use crate::wick::{GeneratorSpec, HamiltonianSpec, WForm};

/// Division of `[t_a, t_b]` into `N + 1` equal steps (`N` interior slices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSlicing {
    pub t_a: f64,
    pub t_b: f64,
    pub n_interior: usize,
}

impl TimeSlicing {
    pub fn new(t_a: f64, t_b: f64, n_interior: usize) -> Result<Self> {
        if !(t_b > t_a) {
            return Err(Error::Domain(format!("slicing needs t_b > t_a, got [{t_a}, {t_b}]")));
        }
        Ok(TimeSlicing { t_a, t_b, n_interior })
    }

    /// Convenience: slicing of `[0, t]` with the given number of steps.
    pub fn over(t: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Domain("slicing needs at least one step".into()));
        }
        Self::new(0.0, t, steps - 1)
    }

    pub fn dt(&self) -> f64 {
        (self.t_b - self.t_a) / (self.n_interior + 1) as f64
    }

    pub fn steps(&self) -> usize {
        self.n_interior + 1
    }
}

/// Short-time Euclidean kernel, potential and drift terms evaluated at the
/// post-point `x_to`.
pub fn short_time_euclid_kernel(x_to: f64, x_from: f64, dt: f64, g: &GeneratorSpec) -> Result<f64> {
    if dt <= 0.0 {
        return Err(Error::Domain("short-time kernel needs dt > 0".into()));
    }
    let mu = g.mu;
    let pre = (mu / (2.0 * PI * dt)).sqrt();
    let vel = (x_to - x_from) / dt;
    let exponent = match &g.form {
        WForm::PotentialLike { w } => -0.5 * mu * dt * vel * vel - w(x_to) * dt,
        WForm::DriftForm { v_prime, m_gamma } => {
            let s = vel + v_prime(x_to) / m_gamma;
            // post-point convention carries a Jacobian term exp(+dt V''/(m gamma)):
            // without it each step loses mass at rate V''/(m gamma) and the
            // composed kernel cannot satisfy the drift-form master equation,
            // whose generator is D d^2 + (1/(m gamma)) d(V' .) = ... + V''/(m gamma)
            let h = 1e-5 * x_to.abs().max(1.0);
            let v2 = (v_prime(x_to + h) - v_prime(x_to - h)) / (2.0 * h);
            -0.5 * mu * dt * s * s + dt * v2 / m_gamma
        }
    };
    Ok(pre * exponent.exp())
}

/// Discretized short-time propagator: `T[i][j] = kernel(x_i <- x_j, dt) * dx`.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub grid: Grid1D,
    pub dt: f64,
    pub entries: Array2<f64>,
}

pub fn build_transfer_matrix(grid: Grid1D, dt: f64, g: &GeneratorSpec) -> Result<TransferMatrix> {
    let dx = grid.dx();
    let n = grid.n;
    let mut entries = Array2::zeros((n, n));
    for j in 0..n {
        let x_from = grid.node(j);
        for i in 0..n {
            entries[(i, j)] = short_time_euclid_kernel(grid.node(i), x_from, dt, g)? * dx;
        }
    }
    Ok(TransferMatrix { grid, dt, entries })
}

impl TransferMatrix {
    /// Largest deviation of a column sum from 1 (probability lost to
    /// truncation plus the potential-weight defect of the step).
    pub fn column_sum_defect(&self) -> f64 {
        let n = self.grid.n;
        (0..n)
            .map(|j| ((0..n).map(|i| self.entries[(i, j)]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Finite-time kernel over the grid, `K[i][j] ~ P(x_i, t_b | x_j, t_a)`.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub grid: Grid1D,
    pub t_a: f64,
    pub t_b: f64,
    pub entries: Array2<f64>,
}

impl KernelMatrix {
    /// Sample a closed-form kernel on the grid.
    pub fn from_kernel_fn(
        grid: Grid1D,
        t_a: f64,
        t_b: f64,
        kernel: impl Fn(f64, f64) -> Result<f64>,
    ) -> Result<Self> {
        let n = grid.n;
        let mut entries = Array2::zeros((n, n));
        for j in 0..n {
            let x_from = grid.node(j);
            for i in 0..n {
                entries[(i, j)] = kernel(grid.node(i), x_from)?;
            }
        }
        Ok(KernelMatrix { grid, t_a, t_b, entries })
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Sup-norm distance to another kernel matrix on the same grid.
    pub fn sup_distance(&self, other: &KernelMatrix) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("sup_distance over different grids".into()));
        }
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Sup-norm distance restricted to nodes with `|x| <= half_width` in both
    /// indices (used when the outermost columns are truncation-dominated).
    pub fn sup_distance_within(&self, other: &KernelMatrix, half_width: f64) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("sup_distance over different grids".into()));
        }
        let mut sup = 0.0_f64;
        for j in 0..self.grid.n {
            if self.grid.node(j).abs() > half_width {
                continue;
            }
            for i in 0..self.grid.n {
                if self.grid.node(i).abs() > half_width {
                    continue;
                }
                sup = sup.max((self.entries[(i, j)] - other.entries[(i, j)]).abs());
            }
        }
        Ok(sup)
    }

    /// Column `j` as a density field (the kernel started from `x_j`).
    pub fn column_field(&self, j: usize) -> RealField {
        RealField {
            grid: self.grid,
            values: self.entries.column(j).to_vec(),
        }
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "x_to,x_from,value")?;
        for j in 0..self.grid.n {
            for i in 0..self.grid.n {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e}",
                    self.grid.node(i),
                    self.grid.node(j),
                    self.entries[(i, j)]
                )?;
            }
        }
        Ok(())
    }

    pub fn summary(&self) -> KernelSummary {
        let n = self.grid.n;
        let dx = self.grid.dx();
        let max_col_mass_defect = (0..n)
            .map(|j| {
                let col = self.entries.column(j);
                let mass =
                    dx * (col.sum() - 0.5 * col[0] - 0.5 * col[n - 1]);
                (mass - 1.0).abs()
            })
            .fold(0.0, f64::max);
        KernelSummary {
            x_min: self.grid.x_min,
            x_max: self.grid.x_max,
            n: self.grid.n,
            t_a: self.t_a,
            t_b: self.t_b,
            min_entry: self.min_entry(),
            max_entry: self.entries.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            max_col_mass_defect,
        }
    }
}

/// Binary-free JSON summary of a kernel matrix.
#[derive(Debug, Clone, Serialize)]
pub struct KernelSummary {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub t_a: f64,
    pub t_b: f64,
    pub min_entry: f64,
    pub max_entry: f64,
    pub max_col_mass_defect: f64,
}

/// Evolve a density by applying the transfer matrix `N + 1` times.
pub fn euclid_propagate(
    init: &RealField,
    g: &GeneratorSpec,
    slicing: TimeSlicing,
) -> Result<RealField> {
    let t = build_transfer_matrix(init.grid, slicing.dt(), g)?;
    let mut v = Array1::from_vec(init.values.clone());
    for _ in 0..slicing.steps() {
        v = t.entries.dot(&v);
    }
    Ok(RealField { grid: init.grid, values: v.to_vec() })
}

/// Finite-time lattice kernel `(T)^(N+1) / dx`.
pub fn euclid_kernel_matrix(
    g: &GeneratorSpec,
    grid: Grid1D,
    slicing: TimeSlicing,
) -> Result<KernelMatrix> {
    let t = build_transfer_matrix(grid, slicing.dt(), g)?;
    let powered = matrix_power(&t.entries, slicing.steps());
    Ok(KernelMatrix {
        grid,
        t_a: slicing.t_a,
        t_b: slicing.t_b,
        entries: powered / grid.dx(),
    })
}

fn matrix_power(m: &Array2<f64>, p: usize) -> Array2<f64> {
    assert!(p >= 1);
    let mut base = m.clone();
    let mut acc: Option<Array2<f64>> = None;
    let mut p = p;
    loop {
        if p & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => a.dot(&base),
            });
        }
        p >>= 1;
        if p == 0 {
            break;
        }
        base = base.dot(&base);
    }
    acc.unwrap()
}

/// Quadrature composition of two kernel matrices (`k1` applied after `k2`).
pub fn chapman_compose(k1: &KernelMatrix, k2: &KernelMatrix) -> Result<KernelMatrix> {
    if k1.grid != k2.grid {
        return Err(Error::GridMismatch("chapman_compose over different grids".into()));
    }
    if (k1.t_a - k2.t_b).abs() > 1e-12 {
        return Err(Error::GridMismatch(format!(
            "chapman_compose needs k1.t_a = k2.t_b, got {} and {}",
            k1.t_a, k2.t_b
        )));
    }
    Ok(KernelMatrix {
        grid: k1.grid,
        t_a: k2.t_a,
        t_b: k1.t_b,
        entries: k1.entries.dot(&k2.entries) * k1.grid.dx(),
    })
}

/// Trotter factorization order of the split-step propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplittingOrder {
    /// `exp(-i V dt) exp(-i T dt)` per step.
    First,
    /// Symmetrized `exp(-i V dt/2) exp(-i T dt) exp(-i V dt/2)`.
    Strang,
}

/// Per-step phase factors of the split-operator scheme. Both factor sets are
/// unit-modulus by construction, so each step is unitary.
#[derive(Clone)]
pub struct SplitStepPlan {
    pub grid: Grid1D,
    pub dt: f64,
    pub kinetic_phase: Vec<Complex64>,
    pub potential_phase: Vec<Complex64>,
    pub order: SplittingOrder,
}

impl SplitStepPlan {
    pub fn new(grid: Grid1D, dt: f64, h: &HamiltonianSpec, order: SplittingOrder) -> Result<Self> {
        if dt <= 0.0 {
            return Err(Error::Domain("split-step plan needs dt > 0".into()));
        }
        let n = grid.n;
        // periodic wrap: FFT period is n*dx, wave numbers 2 pi f/(n dx)
        let period = n as f64 * grid.dx();
        let kinetic_phase = (0..n)
            .map(|j| {
                let f = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                let k = 2.0 * PI * f / period;
                Complex64::from_polar(1.0, -h.hbar * k * k / (2.0 * h.mass) * dt)
            })
            .collect();
        let vdt = match order {
            SplittingOrder::First => dt,
            SplittingOrder::Strang => 0.5 * dt,
        };
        let potential_phase = grid
            .nodes()
            .map(|x| {
                // physical potential V = m u(x); phase exp(-i V dt / hbar)
                Complex64::from_polar(1.0, -h.mass * h.potential.u(x) * vdt / h.hbar)
            })
            .collect();
        Ok(SplitStepPlan { grid, dt, kinetic_phase, potential_phase, order })
    }
}

/// Split-operator quantum propagation over the slicing.
///
/// The initial packet must stay far from the grid edges; wrap-around is the
/// caller's responsibility under the truncation policy.
pub fn splitstep_quantum_propagate(
    init: &ComplexField,
    h: &HamiltonianSpec,
    slicing: TimeSlicing,
    order: SplittingOrder,
) -> Result<ComplexField> {
    let plan = SplitStepPlan::new(init.grid, slicing.dt(), h, order)?;
    let n = init.grid.n;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let inv_n = 1.0 / n as f64;

    let mut psi: Vec<Complex64> = init.values.clone();
    let apply_kinetic = |psi: &mut Vec<Complex64>| {
        fft.process(psi);
        for (p, k) in psi.iter_mut().zip(&plan.kinetic_phase) {
            *p *= k * inv_n;
        }
        ifft.process(psi);
    };
    for _ in 0..slicing.steps() {
        match order {
            SplittingOrder::First => {
                apply_kinetic(&mut psi);
                for (p, v) in psi.iter_mut().zip(&plan.potential_phase) {
                    *p *= v;
                }
            }
            SplittingOrder::Strang => {
                for (p, v) in psi.iter_mut().zip(&plan.potential_phase) {
                    *p *= v;
                }
                apply_kinetic(&mut psi);
                for (p, v) in psi.iter_mut().zip(&plan.potential_phase) {
                    *p *= v;
                }
            }
        }
    }
    ComplexField::new(init.grid, psi)
}

/// Squared overlap `|<a|b>|^2 / (|a|^2 |b|^2)` by trapezoid quadrature.
pub fn fidelity(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch("fidelity over different grids".into()));
    }
    let dx = a.grid.dx();
    let n = a.grid.n;
    let mut overlap = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        overlap += w * a.values[i].conj() * b.values[i];
    }
    overlap *= dx;
    let na = crate::grid::l2_norm_sq(a);
    let nb = crate::grid::l2_norm_sq(b);
    Ok(overlap.norm_sqr() / (na * nb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{brown_kernel, harmonic_euclid_kernel, ou_kernel};
    use crate::grid::{delta_on_grid, position_fn};
    use crate::wick::GeneratorSpec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn short_time_free_kernel_is_exact_brown() {
        let g = GeneratorSpec::brown(0.5).unwrap();
        for &(xt, xf, dt) in &[(0.3, 0.1, 0.01), (0.0, 0.0, 0.2), (-1.0, 1.0, 0.5)] {
            assert_abs_diff_eq!(
                short_time_euclid_kernel(xt, xf, dt, &g).unwrap(),
                brown_kernel(0.5, xt, xf, dt).unwrap(),
                epsilon = 1e-15
            );
        }
        // gaussian peak height at x_to = x_from
        let g2 = GeneratorSpec::brown(0.25).unwrap(); // mu = 2
        assert_abs_diff_eq!(
            short_time_euclid_kernel(0.4, 0.4, 0.1, &g2).unwrap(),
            (2.0 / (2.0 * PI * 0.1)).sqrt(),
            epsilon = 1e-14
        );
        assert!(short_time_euclid_kernel(0.0, 0.0, 0.0, &g).is_err());
    }

    #[test]
    fn short_time_drift_peak_shifts() {
        // constant V' = c: peak at x_to = x_from - c dt / (m gamma)
        let (c, m_gamma, dt) = (2.0, 4.0, 0.05);
        let g = GeneratorSpec::drift_form(1.0, position_fn(move |_| c), m_gamma).unwrap();
        let x_from = 0.3;
        let peak_expect = x_from - c * dt / m_gamma;
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut x = x_from - 0.2;
        while x < x_from + 0.2 {
            let k = short_time_euclid_kernel(x, x_from, dt, &g).unwrap();
            if k > best.0 {
                best = (k, x);
            }
            x += 1e-5;
        }
        assert_abs_diff_eq!(best.1, peak_expect, epsilon = 2e-5);
    }

    #[test]
    fn transfer_matrix_columns_normalize_for_free_diffusion() {
        let grid = Grid1D::new(-8.0, 8.0, 401).unwrap();
        let g = GeneratorSpec::brown(0.5).unwrap();
        let t = build_transfer_matrix(grid, 0.01, &g).unwrap();
        assert!(t.min_entry() >= 0.0);
        // interior columns only: edge columns lose half their Gaussian
        let n = grid.n;
        let defect = (n / 4..3 * n / 4)
            .map(|j| ((0..n).map(|i| t.entries[(i, j)]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(defect <= 1e-8, "defect = {defect}");
        // Brown transfer matrix is symmetric
        for (i, j) in [(3, 80), (100, 200), (0, 400)] {
            assert_abs_diff_eq!(t.entries[(i, j)], t.entries[(j, i)], epsilon = 1e-15);
        }
    }

    #[test]
    fn euclid_propagate_delta_reproduces_brown_kernel() {
        let grid = Grid1D::new(-8.0, 8.0, 401).unwrap();
        let g = GeneratorSpec::brown(0.5).unwrap();
        let init = delta_on_grid(grid, 0.0).unwrap();
        let slicing = TimeSlicing::over(0.5, 10).unwrap();
        let out = euclid_propagate(&init, &g, slicing).unwrap();
        let sup = grid
            .nodes()
            .zip(&out.values)
            .map(|(x, &v)| (v - brown_kernel(0.5, x, 0.0, 0.5).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 1e-6, "sup = {sup}");
    }

    #[test]
    fn euclid_propagate_zero_is_zero() {
        let grid = Grid1D::new(-4.0, 4.0, 101).unwrap();
        let g = GeneratorSpec::harmonic(1.0, 1.0).unwrap();
        let init = RealField::zeros(grid);
        let out = euclid_propagate(&init, &g, TimeSlicing::over(0.3, 5).unwrap()).unwrap();
        assert!(out.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn harmonic_lattice_error_halves_with_dt() {
        let grid = Grid1D::new(-8.0, 8.0, 321).unwrap();
        let g = GeneratorSpec::harmonic(1.0, 1.0).unwrap();
        let closed = KernelMatrix::from_kernel_fn(grid, 0.0, 0.7, |xb, xa| {
            harmonic_euclid_kernel(1.0, 1.0, xb, xa, 0.7)
        })
        .unwrap();
        let err = |steps: usize| {
            let k = euclid_kernel_matrix(&g, grid, TimeSlicing::over(0.7, steps).unwrap()).unwrap();
            k.sup_distance(&closed).unwrap()
        };
        let (e1, e2) = (err(50), err(100));
        let ratio = e1 / e2;
        assert!((1.7..2.3).contains(&ratio), "ratio = {ratio}, e1 = {e1}, e2 = {e2}");
    }

    #[test]
    fn brown_kernel_matrix_matches_closed_form() {
        let grid = Grid1D::new(-8.0, 8.0, 321).unwrap();
        let g = GeneratorSpec::brown(0.5).unwrap();
        let k = euclid_kernel_matrix(&g, grid, TimeSlicing::over(0.5, 25).unwrap()).unwrap();
        let closed = KernelMatrix::from_kernel_fn(grid, 0.0, 0.5, |xb, xa| {
            brown_kernel(0.5, xb, xa, 0.5)
        })
        .unwrap();
        // free kernel is slicing-exact; the residual is grid truncation
        let sup = k.sup_distance_within(&closed, 5.0).unwrap();
        assert!(sup <= 1e-6, "sup = {sup}");
        assert!(k.min_entry() >= -1e-12);
    }

    #[test]
    fn ou_drift_form_kernel_matches_closed_form() {
        let grid = Grid1D::new(-10.0, 10.0, 501).unwrap();
        let g = GeneratorSpec::ou(1.0, 0.5).unwrap();
        let k = euclid_kernel_matrix(&g, grid, TimeSlicing::over(0.5, 500).unwrap()).unwrap();
        let closed = KernelMatrix::from_kernel_fn(grid, 0.0, 0.5, |xb, xa| {
            ou_kernel(1.0, 0.5, xb, xa, 0.5)
        })
        .unwrap();
        let sup = k.sup_distance_within(&closed, 6.0).unwrap();
        assert!(sup <= 2e-3, "sup = {sup}");
    }

    #[test]
    fn chapman_composition_of_closed_form_kernels() {
        let grid = Grid1D::new(-12.0, 12.0, 601).unwrap();
        let at = |t0: f64, t1: f64| {
            KernelMatrix::from_kernel_fn(grid, t0, t1, |xb, xa| {
                brown_kernel(0.5, xb, xa, t1 - t0)
            })
            .unwrap()
        };
        let k1 = at(0.5, 1.0);
        let k2 = at(0.0, 0.5);
        let composed = chapman_compose(&k1, &k2).unwrap();
        let direct = at(0.0, 1.0);
        let sup = composed.sup_distance_within(&direct, 6.0).unwrap();
        assert!(sup <= 1e-7, "sup = {sup}");

        // grid mismatch is a usage error
        let other = Grid1D::new(-8.0, 8.0, 401).unwrap();
        let k3 = KernelMatrix::from_kernel_fn(other, 0.0, 0.5, |xb, xa| {
            brown_kernel(0.5, xb, xa, 0.5)
        })
        .unwrap();
        assert!(chapman_compose(&k1, &k3).is_err());
    }

    #[test]
    fn compose_with_near_delta_is_identity() {
        let grid = Grid1D::new(-6.0, 6.0, 241).unwrap();
        let t = 0.4;
        let k = KernelMatrix::from_kernel_fn(grid, 0.0, t, |xb, xa| {
            brown_kernel(0.5, xb, xa, t)
        })
        .unwrap();
        // dt -> 0 limit transfer matrix is identity/dx
        let delta = KernelMatrix {
            grid,
            t_a: t,
            t_b: t,
            entries: Array2::eye(grid.n) / grid.dx(),
        };
        let composed = chapman_compose(&delta, &k).unwrap();
        let sup = composed.sup_distance(&k).unwrap();
        assert!(sup <= 1e-12, "sup = {sup}");
    }

    #[test]
    fn ou_closed_form_kernels_compose() {
        let grid = Grid1D::new(-12.0, 12.0, 601).unwrap();
        let at = |t0: f64, t1: f64| {
            KernelMatrix::from_kernel_fn(grid, t0, t1, |xb, xa| {
                ou_kernel(1.0, 0.5, xb, xa, t1 - t0)
            })
            .unwrap()
        };
        let composed = chapman_compose(&at(0.5, 1.0), &at(0.0, 0.5)).unwrap();
        let sup = composed.sup_distance_within(&at(0.0, 1.0), 6.0).unwrap();
        assert!(sup <= 1e-7, "sup = {sup}");
    }
}
