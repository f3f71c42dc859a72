//! Trajectory-level Monte Carlo: Euler-Maruyama integration of the Langevin
//! equation and a Feynman-Kac bridge-sampling estimator of the Euclidean
//! kernel.
//!
//! Every sampling operation is a pure function of its inputs and an explicit
//! seed; per-path randomness comes from deterministic substreams so ensembles
//! are bit-reproducible regardless of how paths are scheduled.

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::closed_form::brown_kernel;
use crate::error::{Error, Result};
use crate::grid::{Grid1D, RealField};
use crate::wick::{GeneratorSpec, WForm};

/// Drift/diffusion-modulation coefficient of the Langevin equation as a
/// function of `(y, t)`.
pub type SdeCoeffFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub fn sde_coeff(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> SdeCoeffFn {
    Arc::new(f)
}

/// Langevin equation `dy = A(y,t) dt + B(y,t) xi(t) dt` with noise law
/// `<xi(t1) xi(t2)> = 2 D delta(t1 - t2)`.
#[derive(Clone)]
pub struct LangevinSpec {
    pub d: f64,
    pub a: SdeCoeffFn,
    pub b: SdeCoeffFn,
}

impl LangevinSpec {
    pub fn new(d: f64, a: SdeCoeffFn, b: SdeCoeffFn) -> Result<Self> {
        if d <= 0.0 {
            return Err(Error::Domain("langevin spec needs D > 0".into()));
        }
        Ok(LangevinSpec { d, a, b })
    }

    /// Free diffusion: `A = 0`, `B = 1`.
    pub fn free(d: f64) -> Result<Self> {
        Self::new(d, sde_coeff(|_, _| 0.0), sde_coeff(|_, _| 1.0))
    }

    /// Constant drift `v` with unit modulation.
    pub fn drifted(d: f64, v: f64) -> Result<Self> {
        Self::new(d, sde_coeff(move |_, _| v), sde_coeff(|_, _| 1.0))
    }

    /// Ornstein-Uhlenbeck: `A = -eta y`, `B = 1`.
    pub fn ou(d: f64, eta: f64) -> Result<Self> {
        if eta <= 0.0 {
            return Err(Error::Domain("ou spec needs eta > 0".into()));
        }
        Self::new(d, sde_coeff(move |y, _| -eta * y), sde_coeff(|_, _| 1.0))
    }
}

/// One Euler-Maruyama step: `y + A dt + B sqrt(2 D dt) xi` with `xi` a
/// standard normal draw. The `sqrt(2D)` factor matches the `2 D delta` noise
/// normalization.
pub fn euler_maruyama_step(y: f64, t: f64, dt: f64, spec: &LangevinSpec, xi: f64) -> f64 {
    y + (spec.a)(y, t) * dt + (spec.b)(y, t) * (2.0 * spec.d * dt).sqrt() * xi
}

/// Simulated trajectory bundle. `positions[path][step]` for
/// `step = 0..=n_steps`; bit-identical for identical `(spec, inputs, seed)`.
pub struct PathEnsemble {
    pub n_paths: usize,
    pub n_steps: usize,
    pub dt: f64,
    pub seed: u64,
    pub positions: Vec<Vec<f64>>,
}

impl PathEnsemble {
    /// Positions of every path at a given step index.
    pub fn at_step(&self, step: usize) -> Vec<f64> {
        self.positions.iter().map(|p| p[step]).collect()
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "path_id,step,x")?;
        for (id, path) in self.positions.iter().enumerate() {
            for (step, x) in path.iter().enumerate() {
                writeln!(w, "{id},{step},{x:.16e}")?;
            }
        }
        Ok(())
    }
}

/// Per-path generator: one seeded cipher, stream index = path index, so paths
/// are independent and insensitive to execution order.
fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Integrate `n_paths` Euler-Maruyama trajectories from `y0` to `t_final`.
pub fn simulate_ensemble(
    spec: &LangevinSpec,
    y0: f64,
    t_final: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    if t_final <= 0.0 || n_steps == 0 || n_paths == 0 {
        return Err(Error::Domain(
            "ensemble needs t_final > 0, n_steps >= 1, n_paths >= 1".into(),
        ));
    }
    let dt = t_final / n_steps as f64;
    let mut positions = Vec::with_capacity(n_paths);
    for path in 0..n_paths {
        let mut rng = path_rng(seed, path as u64);
        let mut traj = Vec::with_capacity(n_steps + 1);
        let mut y = y0;
        traj.push(y);
        for step in 0..n_steps {
            let xi: f64 = rng.sample(StandardNormal);
            y = euler_maruyama_step(y, step as f64 * dt, dt, spec, xi);
            traj.push(y);
        }
        positions.push(traj);
    }
    Ok(PathEnsemble { n_paths, n_steps, dt, seed, positions })
}

/// Histogram density with off-grid accounting.
pub struct Histogram {
    pub density: RealField,
    pub n_dropped: usize,
    /// Set when more than 1% of the samples fell outside the grid.
    pub coverage_warning: bool,
}

/// Bin ensemble positions at `step_index` into a density on `grid` (bins are
/// centered on nodes, width `dx`). Off-grid samples are dropped, not clamped,
/// so the result integrates to at most 1.
pub fn empirical_pdf(ensemble: &PathEnsemble, grid: Grid1D, step_index: usize) -> Result<Histogram> {
    if step_index > ensemble.n_steps {
        return Err(Error::Domain(format!(
            "step index {step_index} beyond n_steps = {}",
            ensemble.n_steps
        )));
    }
    let dx = grid.dx();
    let mut counts = vec![0usize; grid.n];
    let mut dropped = 0usize;
    for path in &ensemble.positions {
        let x = path[step_index];
        match grid.nearest_node(x) {
            Ok(i) => counts[i] += 1,
            Err(_) => dropped += 1,
        }
    }
    let norm = 1.0 / (ensemble.n_paths as f64 * dx);
    let density = RealField {
        grid,
        values: counts.iter().map(|&c| c as f64 * norm).collect(),
    };
    Ok(Histogram {
        density,
        n_dropped: dropped,
        coverage_warning: dropped as f64 > 0.01 * ensemble.n_paths as f64,
    })
}

/// Sample a pinned diffusion path from `x_a` at time 0 to `x_b` at time
/// `tau`, with `n_steps` intervals. Sequential conditional sampling with the
/// exact bridge marginals: given the current point with `r + dt` time left,
/// the next point is
/// `Normal(x + (x_b - x) dt/(r + dt), 2 D dt r/(r + dt))`,
/// so there is no discretization bias in the sampler itself.
pub fn sample_brownian_bridge(
    x_a: f64,
    x_b: f64,
    tau: f64,
    n_steps: usize,
    d: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if tau <= 0.0 || n_steps == 0 || d < 0.0 {
        return Err(Error::Domain("bridge needs tau > 0, n_steps >= 1, D >= 0".into()));
    }
    let dt = tau / n_steps as f64;
    let mut path = Vec::with_capacity(n_steps + 1);
    let mut x = x_a;
    path.push(x);
    for n in 1..n_steps {
        let left = tau - (n - 1) as f64 * dt; // time left before this step
        let r = left - dt; // time left after it
        let mean = x + (x_b - x) * dt / left;
        let var = 2.0 * d * dt * r / left;
        let xi: f64 = rng.sample(StandardNormal);
        x = mean + var.sqrt() * xi;
        path.push(x);
    }
    path.push(x_b);
    Ok(path)
}

/// Monte Carlo kernel estimate.
#[derive(Debug, Clone, Serialize)]
pub struct FKEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n_samples: usize,
    pub n_steps: usize,
    pub seed: u64,
}

/// Feynman-Kac estimate of the Euclidean kernel for a potential-like
/// generator: free kernel times the bridge average of
/// `exp(-sum_{n=1}^{N} W(x_n) dt)` with post-point weights (the start point
/// `x_0 = x_a` carries no weight, the endpoint does).
///
/// Drift-form generators have no Feynman-Kac weight decomposition here; use
/// the lattice propagator or the master-equation solver for those.
pub fn feynman_kac_estimate(
    x_a: f64,
    x_b: f64,
    tau: f64,
    g: &GeneratorSpec,
    n_steps: usize,
    n_samples: usize,
    seed: u64,
) -> Result<FKEstimate> {
    let w = match &g.form {
        WForm::PotentialLike { w } => w.clone(),
        WForm::DriftForm { .. } => {
            return Err(Error::UnsupportedSpec(
                "feynman-kac needs a potential-like generator; \
                 drift-form systems go through the lattice or master solver"
                    .into(),
            ))
        }
    };
    if tau <= 0.0 || n_steps == 0 || n_samples == 0 {
        return Err(Error::Domain(
            "feynman-kac needs tau > 0, n_steps >= 1, n_samples >= 1".into(),
        ));
    }
    let d = g.diffusion_coefficient();
    let dt = tau / n_steps as f64;
    let free = brown_kernel(d, x_b, x_a, tau)?;
    let mut weights = Vec::with_capacity(n_samples);
    for sample in 0..n_samples {
        let mut rng = path_rng(seed, sample as u64);
        let path = sample_brownian_bridge(x_a, x_b, tau, n_steps, d, &mut rng)?;
        let action: f64 = path[1..].iter().map(|&x| w(x) * dt).sum();
        weights.push((-action).exp());
    }
    let n = n_samples as f64;
    let mean = weights.iter().sum::<f64>() / n;
    // two-pass variance: the naive sum-of-squares form cancels catastrophically
    // for near-constant weights
    let var = weights.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n * (n - 1.0).max(1.0));
    Ok(FKEstimate {
        value: free * mean,
        std_err: free * var.sqrt(),
        n_samples,
        n_steps,
        seed,
    })
}
