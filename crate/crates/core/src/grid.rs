//! Uniform 1-D spatial grids, real/complex fields on them, trapezoid
//! quadrature and grid-delta initial conditions.
//!
//! Real fields carry probability densities (units 1/length), complex fields
//! carry wavefunction amplitudes (units 1/sqrt(length)). All types are
//! immutable values after construction and safe to share across threads.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid of `n` nodes on `[x_min, x_max]`, spacing `dx = (x_max - x_min)/(n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("grid needs n >= 2 nodes, got {n}")));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Domain(format!(
                "grid needs finite x_max > x_min, got [{x_min}, {x_max}]"
            )));
        }
        Ok(Grid1D { x_min, x_max, n })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Index of the node nearest to `x`. Errors if `x` lies off the grid.
    pub fn nearest_node(&self, x: f64) -> Result<usize> {
        if x < self.x_min || x > self.x_max {
            return Err(Error::Domain(format!(
                "x = {x} outside grid [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        let i = ((x - self.x_min) / self.dx()).round() as usize;
        Ok(i.min(self.n - 1))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }
}

/// Recommended half-width for truncating a Gaussian-type density so that the
/// boundary values fall below ~1e-12 of the peak: `L = |mean| + 8 * std`.
pub fn recommended_half_width(mean: f64, std: f64) -> f64 {
    mean.abs() + 8.0 * std
}

/// Physical constants. Everything in the crate defaults to natural units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
    pub k_b: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units { hbar: 1.0, mass: 1.0, k_b: 1.0 }
    }
}

impl Units {
    pub fn validate(&self) -> Result<()> {
        if self.hbar > 0.0 && self.mass > 0.0 && self.k_b > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain("units must all be strictly positive".into()))
        }
    }
}

/// Real-valued density samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    pub grid: Grid1D,
    pub values: Vec<f64>,
}

/// Complex amplitude samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
}

impl RealField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch(format!(
                "field has {} values for a {}-node grid",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("field contains non-finite values".into()));
        }
        Ok(RealField { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        RealField { values: vec![0.0; grid.n], grid }
    }

    /// Sample `f(x)` at every node.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        RealField { values: grid.nodes().map(f).collect(), grid }
    }

    /// Normalized Gaussian density centered at `mean` with standard deviation `std`.
    pub fn gaussian(grid: Grid1D, mean: f64, std: f64) -> Self {
        let norm = 1.0 / (std * (2.0 * std::f64::consts::PI).sqrt());
        Self::from_fn(grid, |x| norm * (-(x - mean).powi(2) / (2.0 * std * std)).exp())
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "x,value")?;
        for (x, v) in self.grid.nodes().zip(&self.values) {
            writeln!(w, "{:.16e},{:.16e}", x, v)?;
        }
        Ok(())
    }
}

impl ComplexField {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch(format!(
                "field has {} values for a {}-node grid",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("field contains non-finite values".into()));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        ComplexField { values: grid.nodes().map(f).collect(), grid }
    }

    /// Normalized Gaussian packet `(2 pi s^2)^(-1/4) exp(-(x-x0)^2/(4 s^2) + i k0 (x-x0))`.
    pub fn gaussian_packet(grid: Grid1D, x0: f64, sigma: f64, k0: f64) -> Self {
        let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
        Self::from_fn(grid, |x| {
            let d = x - x0;
            norm * (Complex64::new(-d * d / (4.0 * sigma * sigma), k0 * d)).exp()
        })
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "x,re,im")?;
        for (x, v) in self.grid.nodes().zip(&self.values) {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", x, v.re, v.im)?;
        }
        Ok(())
    }
}

/// Trapezoid-rule quadrature of a real field over its grid.
pub fn integrate(field: &RealField) -> f64 {
    trapezoid(field.grid.dx(), &field.values)
}

/// Trapezoid quadrature of |psi(x)|^2.
pub fn l2_norm_sq(field: &ComplexField) -> f64 {
    let dx = field.grid.dx();
    let sq: Vec<f64> = field.values.iter().map(|v| v.norm_sqr()).collect();
    trapezoid(dx, &sq)
}

pub(crate) fn trapezoid(dx: f64, values: &[f64]) -> f64 {
    let n = values.len();
    let interior: f64 = values[1..n - 1].iter().sum();
    dx * (0.5 * values[0] + interior + 0.5 * values[n - 1])
}

/// Quadrature expectation of `f(x)` under the density `field`.
///
/// The field is expected to be normalized; a defect above 1e-6 is reported on
/// stderr but the integral is still taken as-is (never silently renormalized).
pub fn expectation(field: &RealField, observable: impl Fn(f64) -> f64) -> f64 {
    let mass = integrate(field);
    if (mass - 1.0).abs() > 1e-6 {
        eprintln!(
            "warning: expectation over a field with mass {mass:.6} (|mass - 1| > 1e-6)"
        );
    }
    let weighted: Vec<f64> = field
        .grid
        .nodes()
        .zip(&field.values)
        .map(|(x, p)| observable(x) * p)
        .collect();
    trapezoid(field.grid.dx(), &weighted)
}

/// Grid delta: a single-node spike of height 1/dx at the node nearest `x0`.
///
/// For interior nodes the trapezoid integral of the result is exactly 1.
pub fn delta_on_grid(grid: Grid1D, x0: f64) -> Result<RealField> {
    let i = grid.nearest_node(x0)?;
    let mut values = vec![0.0; grid.n];
    values[i] = 1.0 / grid.dx();
    Ok(RealField { grid, values })
}

/// Shared real function of position, used for potentials and drift terms.
pub type PositionFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Wrap a closure as a shareable position function.
pub fn position_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> PositionFn {
    Arc::new(f)
}
