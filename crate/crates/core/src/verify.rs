//! Named verification scenarios: every cross-check between the closed forms,
//! the lattice propagator, the PDE solver and the Monte Carlo estimators,
//! registered as data so the CLI can list and run them individually.
//!
//! Scenarios are deterministic (stochastic ones carry a fixed seed) and emit
//! machine-readable reports. Convention for `measured_error`:
//! single-quantity scenarios report the raw error against a physical
//! tolerance; scenarios bundling several checks report the worst deviation in
//! units of its allowance, with tolerance 1 and the raw numbers in `notes`.

use std::time::Instant;

use ndarray::Array1;
use serde::Serialize;

use crate::closed_form::{
    brown_kernel, drift_brown_pdf, harmonic_euclid_kernel, ou_kernel, ou_mean, ou_variance,
    quantum_free_packet, QuantumKernelSpec,
};
use crate::error::{Error, Result};
use crate::grid::{integrate, position_fn, ComplexField, Grid1D, RealField};
use crate::lattice::{
    chapman_compose, euclid_kernel_matrix, euclid_propagate, fidelity,
    splitstep_quantum_propagate, KernelMatrix, SplittingOrder, TimeSlicing,
};
use crate::master::{evolve_crank_nicolson, mollified_delta, Boundary, SmoluchowskiSpec,
    SolverConfig};
use crate::mc::{feynman_kac_estimate, simulate_ensemble, LangevinSpec};
use crate::observables::{
    partition_exact, partition_from_lattice, partition_function, velocity_operator_literal,
    velocity_via_mean_drift,
};
use crate::wick::{continuation_check, GeneratorSpec, HamiltonianSpec};

/// Seed shared by all stochastic scenarios. Fixed and published: a failure
/// under this seed is a real failure, not a flake.
pub const SCENARIO_SEED: u64 = 20260823;

/// Registered scenario descriptor.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    /// Identities or bounds the scenario exercises, in plain language.
    pub checks: &'static [&'static str],
    pub tolerance: f64,
    pub seed: Option<u64>,
}

/// Outcome of one scenario run.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub measured_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub runtime_seconds: f64,
    pub artifacts: Vec<String>,
    pub notes: Vec<String>,
}

pub fn scenarios() -> &'static [Scenario] {
    &[
        Scenario {
            name: "swr-free-continuation",
            description: "free-particle quantum kernel at imaginary time equals the Brownian kernel",
            checks: &["|K_quantum(-i tau) - K_brown(tau)| <= 1e-13 over a 5x5x3 point lattice"],
            tolerance: 1e-13,
            seed: None,
        },
        Scenario {
            name: "swr-harmonic-continuation",
            description: "harmonic quantum kernel at imaginary time equals the Euclidean harmonic kernel",
            checks: &["|K_quantum(-i tau) - K_euclid(tau)| <= 1e-12 over a 5x5x3 point lattice"],
            tolerance: 1e-12,
            seed: None,
        },
        Scenario {
            name: "lattice-harmonic-convergence",
            description: "transfer-matrix kernel for the harmonic generator converges to the closed form at first order",
            checks: &[
                "sup error <= 2e-3 at dt = 1.75e-3",
                "measured order 1.0 +/- 0.15 over dt in {7e-3, 3.5e-3, 1.75e-3}",
            ],
            tolerance: 1.0,
            seed: None,
        },
        Scenario {
            name: "ou-triangle",
            description: "lattice propagation, Crank-Nicolson, and the closed-form kernel agree pairwise for the OU process",
            checks: &["all three pairwise sup distances <= 2e-3"],
            tolerance: 2e-3,
            seed: None,
        },
        Scenario {
            name: "partition-closed",
            description: "diagonal quadrature of the closed-form harmonic kernel gives 1/(2 sinh 1) at unit frequency and extent 2",
            checks: &["|Z - 0.4254590| <= 1e-6"],
            tolerance: 1e-6,
            seed: None,
        },
        Scenario {
            name: "partition-lattice-order",
            description: "lattice-diagonal partition function converges to the closed value at least at first order in dt",
            checks: &["measured order >= 0.8 over a dt halving"],
            tolerance: 1e-6,
            seed: None,
        },
        Scenario {
            name: "chapman-kolmogorov",
            description: "quadrature self-composition of closed-form kernels at (t, t) reproduces the kernel at 2t",
            checks: &["sup error <= 1e-7 for Brownian, harmonic-Euclidean, and OU kernels"],
            tolerance: 1e-7,
            seed: None,
        },
        Scenario {
            name: "kernel-normalization",
            description: "probability-conserving kernel columns integrate to 1 (closed form and lattice)",
            checks: &["max inner-column mass defect <= 1e-6"],
            tolerance: 1e-6,
            seed: None,
        },
        Scenario {
            name: "lattice-positivity",
            description: "Euclidean lattice kernels have no negative entries",
            checks: &["min entry >= -1e-12 for Brownian, harmonic, and OU lattice kernels"],
            tolerance: 1e-12,
            seed: None,
        },
        Scenario {
            name: "cn-ou",
            description: "Crank-Nicolson evolution of a mollified delta matches the analytically evolved Gaussian",
            checks: &["L-infinity error <= 1e-4 at t = 1", "mass drift <= 1e-10"],
            tolerance: 1.0,
            seed: None,
        },
        Scenario {
            name: "langevin-ou",
            description: "Euler-Maruyama ensembles reproduce the OU mean/variance and the drifted-Brownian mean",
            checks: &[
                "OU mean and variance within 4 standard errors at t in {0.5, 1, 2}",
                "drifted mean within 4 standard errors of v t",
            ],
            tolerance: 1.0,
            seed: Some(SCENARIO_SEED),
        },
        Scenario {
            name: "feynman-kac-harmonic",
            description: "bridge-sampling estimator reproduces the closed-form harmonic kernel value",
            checks: &["|estimate - 0.28372| <= 3 std_err + first-order dt bias"],
            tolerance: 1.0,
            seed: Some(SCENARIO_SEED),
        },
        Scenario {
            name: "splitstep-free",
            description: "split-operator free-packet propagation matches the analytic dispersion formula",
            checks: &["fidelity >= 1 - 1e-10"],
            tolerance: 1e-10,
            seed: None,
        },
        Scenario {
            name: "splitstep-unitarity",
            description: "split-operator steps conserve the wavefunction norm",
            checks: &["per-step norm drift <= 1e-12, both splitting orders"],
            tolerance: 1e-12,
            seed: None,
        },
        Scenario {
            name: "splitstep-harmonic-orders",
            description: "one-period harmonic return infidelity converges at least at order 1 (plain) and order 2 (Strang)",
            checks: &["measured order >= 0.85 (plain split)", "measured order >= 1.8 (Strang)"],
            tolerance: 1e-6,
            seed: None,
        },
        Scenario {
            name: "limit-identities",
            description: "harmonic-Euclidean and OU kernels reduce to the Brownian kernel as the restoring force vanishes",
            checks: &["relative error <= 1e-6 at omega = 1e-6 (and the corresponding relaxation rate)"],
            tolerance: 1e-6,
            seed: None,
        },
        Scenario {
            name: "velocity-discrepancy",
            description: "the two drift-velocity readings disagree as documented: mean drift gives v, the literal gradient expectation gives 0",
            checks: &[
                "mean-drift reading equals v within 1e-8",
                "literal gradient reading equals 0 within O(dx^2)",
            ],
            tolerance: 1.0,
            seed: None,
        },
    ]
}

pub fn run_scenario(name: &str) -> Result<VerificationReport> {
    let scenario = scenarios()
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))?;
    let start = Instant::now();
    let (measured_error, notes) = match scenario.name {
        "swr-free-continuation" => run_swr_continuation(false)?,
        "swr-harmonic-continuation" => run_swr_continuation(true)?,
        "lattice-harmonic-convergence" => run_lattice_harmonic()?,
        "ou-triangle" => run_ou_triangle()?,
        "partition-closed" => run_partition_closed()?,
        "partition-lattice-order" => run_partition_lattice()?,
        "chapman-kolmogorov" => run_chapman()?,
        "kernel-normalization" => run_kernel_normalization()?,
        "lattice-positivity" => run_lattice_positivity()?,
        "cn-ou" => run_cn_ou()?,
        "langevin-ou" => run_langevin_ou()?,
        "feynman-kac-harmonic" => run_feynman_kac()?,
        "splitstep-free" => run_splitstep_free()?,
        "splitstep-unitarity" => run_splitstep_unitarity()?,
        "splitstep-harmonic-orders" => run_splitstep_orders()?,
        "limit-identities" => run_limit_identities()?,
        "velocity-discrepancy" => run_velocity_discrepancy()?,
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok(VerificationReport {
        scenario: scenario.name.to_string(),
        measured_error,
        tolerance: scenario.tolerance,
        passed: measured_error <= scenario.tolerance,
        runtime_seconds: start.elapsed().as_secs_f64(),
        artifacts: Vec::new(),
        notes,
    })
}

/// Run the whole registry in order.
pub fn run_all() -> Result<Vec<VerificationReport>> {
    scenarios().iter().map(|s| run_scenario(s.name)).collect()
}

fn point_lattice() -> Vec<(f64, f64, f64)> {
    let xs: Vec<f64> = (0..5).map(|i| -2.0 + i as f64).collect();
    let mut pts = Vec::new();
    for &xa in &xs {
        for &xb in &xs {
            for &tau in &[0.1, 0.7, 2.0] {
                pts.push((xa, xb, tau));
            }
        }
    }
    pts
}

fn run_swr_continuation(harmonic: bool) -> Result<(f64, Vec<String>)> {
    let specs: Vec<QuantumKernelSpec> = if harmonic {
        vec![QuantumKernelSpec::Harmonic { mass: 1.0, hbar: 1.0, omega: 1.0 }]
    } else {
        vec![
            QuantumKernelSpec::FreeParticle { mass: 1.0, hbar: 1.0 },
            QuantumKernelSpec::FreeParticle { mass: 2.0, hbar: 0.7 },
        ]
    };
    let mut worst = 0.0_f64;
    for spec in &specs {
        for &(xa, xb, tau) in &point_lattice() {
            let check = continuation_check(spec, xb, xa, tau)?;
            worst = worst.max(check.abs_error);
        }
    }
    let mut notes = vec![format!("max |quantum(-i tau) - euclid(tau)| = {worst:.3e}")];
    if harmonic {
        notes.push(
            "normalization note: an alternative printed form of the harmonic Euclidean kernel \
             scales the hyperbolic prefactor and exponent by the diffusion constant instead of \
             the reduced mass mu; that variant fails this identity and the composition law, so \
             the mu-scaled form is used throughout"
                .to_string(),
        );
    }
    Ok((worst, notes))
}

fn run_lattice_harmonic() -> Result<(f64, Vec<String>)> {
    let grid = Grid1D::new(-8.0, 8.0, 801)?;
    let g = GeneratorSpec::harmonic(1.0, 1.0)?;
    let horizon = 0.7;
    let closed = KernelMatrix::from_kernel_fn(grid, 0.0, horizon, |xb, xa| {
        harmonic_euclid_kernel(1.0, 1.0, xb, xa, horizon)
    })?;
    let mut errs = Vec::new();
    for &steps in &[100usize, 200, 400] {
        let k = euclid_kernel_matrix(&g, grid, TimeSlicing::over(horizon, steps)?)?;
        errs.push(k.sup_distance(&closed)?);
    }
    let order = 0.5 * ((errs[0] / errs[1]).log2() + (errs[1] / errs[2]).log2());
    let measured = (errs[2] / 2e-3).max((order - 1.0).abs() / 0.15);
    let notes = vec![
        format!("sup errors over dt halvings: {:.3e}, {:.3e}, {:.3e}", errs[0], errs[1], errs[2]),
        format!("measured convergence order {order:.3} (allowance 1.0 +/- 0.15)"),
        format!("finest-dt sup error {:.3e} (allowance 2e-3)", errs[2]),
    ];
    Ok((measured, notes))
}

fn run_ou_triangle() -> Result<(f64, Vec<String>)> {
    let grid = Grid1D::new(-10.0, 10.0, 1001)?;
    let (d, eta, t) = (1.0, 0.5, 0.5);
    let init = RealField::gaussian(grid, 1.0, 0.5);

    let lattice = euclid_propagate(
        &init,
        &GeneratorSpec::ou(d, eta)?,
        TimeSlicing::over(t, 500)?,
    )?;

    let smolu = SmoluchowskiSpec::new(d, position_fn(move |x| eta * x), 1.0)?;
    let config = SolverConfig::new(1e-4, Boundary::ZeroFlux)?;
    let (cn, _) = evolve_crank_nicolson(&init, &smolu.to_fokker_planck(), t, &config)?;

    let kernel = KernelMatrix::from_kernel_fn(grid, 0.0, t, |xb, xa| ou_kernel(d, eta, xb, xa, t))?;
    let closed_values = kernel.entries.dot(&Array1::from_vec(init.values.clone())) * grid.dx();

    let sup = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0_f64, f64::max)
    };
    let closed = closed_values.to_vec();
    let d_lc = sup(&lattice.values, &closed);
    let d_cc = sup(&cn.values, &closed);
    let d_lcn = sup(&lattice.values, &cn.values);
    let measured = d_lc.max(d_cc).max(d_lcn);
    let notes = vec![
        format!("lattice vs closed sup = {d_lc:.3e}"),
        format!("crank-nicolson vs closed sup = {d_cc:.3e}"),
        format!("lattice vs crank-nicolson sup = {d_lcn:.3e}"),
    ];
    Ok((measured, notes))
}

fn run_partition_closed() -> Result<(f64, Vec<String>)> {
    let grid = Grid1D::new(-8.0, 8.0, 1601)?;
    let z = partition_function(1.0, 1.0, 2.0, grid)?;
    let exact = partition_exact(1.0, 2.0);
    Ok((
        (z - exact).abs(),
        vec![format!("Z = {z:.9} vs closed value {exact:.9}")],
    ))
}

fn run_partition_lattice() -> Result<(f64, Vec<String>)> {
    let (mu, omega, beta_hbar) = (1.0, 1.0, 2.0);
    let g = GeneratorSpec::harmonic(mu, omega)?;
    let grid = Grid1D::new(-8.0, 8.0, 401)?;
    let exact = partition_exact(omega, beta_hbar);
    let mut errs = Vec::new();
    for &steps in &[100usize, 200] {
        let k = euclid_kernel_matrix(&g, grid, TimeSlicing::over(beta_hbar, steps)?)?;
        errs.push((partition_from_lattice(&k) - exact).abs());
    }
    let order = (errs[0] / errs[1]).log2();
    let notes = vec![
        format!(
            "lattice partition errors {:.3e} -> {:.3e}, order {order:.3}",
            errs[0], errs[1]
        ),
        "the trace is cyclically invariant, which symmetrizes the splitting: the measured \
         rate is second order, exceeding the first-order floor asserted here"
            .to_string(),
    ];
    Ok(((0.8 - order).max(0.0), notes))
}

fn run_chapman() -> Result<(f64, Vec<String>)> {
    let grid = Grid1D::new(-12.0, 12.0, 601)?;
    let t = 0.5;
    let mut worst = 0.0_f64;
    let mut notes = Vec::new();
    let kernels: Vec<(&str, Box<dyn Fn(f64, f64, f64) -> Result<f64>>)> = vec![
        ("brownian", Box::new(|xb, xa, tt| brown_kernel(0.5, xb, xa, tt))),
        ("harmonic-euclid", Box::new(|xb, xa, tt| harmonic_euclid_kernel(1.0, 1.0, xb, xa, tt))),
        ("ou", Box::new(|xb, xa, tt| ou_kernel(1.0, 0.5, xb, xa, tt))),
    ];
    for (label, kernel) in &kernels {
        let at = |t0: f64, t1: f64| {
            KernelMatrix::from_kernel_fn(grid, t0, t1, |xb, xa| kernel(xb, xa, t1 - t0))
        };
        let composed = chapman_compose(&at(t, 2.0 * t)?, &at(0.0, t)?)?;
        let sup = composed.sup_distance_within(&at(0.0, 2.0 * t)?, 6.0)?;
        notes.push(format!("{label} composition sup = {sup:.3e}"));
        worst = worst.max(sup);
    }
    Ok((worst, notes))
}

fn inner_column_mass_defect(k: &KernelMatrix, half_width: f64) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..k.grid.n {
        if k.grid.node(j).abs() > half_width {
            continue;
        }
        worst = worst.max((integrate(&k.column_field(j)) - 1.0).abs());
    }
    worst
}

fn run_kernel_normalization() -> Result<(f64, Vec<String>)> {
    let mut worst = 0.0_f64;
    let mut notes = Vec::new();

    let grid = Grid1D::new(-12.0, 12.0, 601)?;
    let cases: Vec<(&str, KernelMatrix)> = vec![
        (
            "closed brownian",
            KernelMatrix::from_kernel_fn(grid, 0.0, 0.5, |xb, xa| brown_kernel(0.5, xb, xa, 0.5))?,
        ),
        (
            "closed drifted brownian",
            KernelMatrix::from_kernel_fn(grid, 0.0, 0.5, |xb, xa| {
                drift_brown_pdf(0.5, 1.0, xb - xa, 0.5)
            })?,
        ),
        (
            "closed ou",
            KernelMatrix::from_kernel_fn(grid, 0.0, 0.5, |xb, xa| {
                ou_kernel(1.0, 0.5, xb, xa, 0.5)
            })?,
        ),
        (
            "lattice brownian",
            euclid_kernel_matrix(
                &GeneratorSpec::brown(0.5)?,
                Grid1D::new(-10.0, 10.0, 501)?,
                TimeSlicing::over(0.5, 100)?,
            )?,
        ),
        (
            "lattice ou",
            euclid_kernel_matrix(
                &GeneratorSpec::ou(1.0, 0.1)?,
                Grid1D::new(-10.0, 10.0, 1001)?,
                TimeSlicing::over(0.25, 625)?,
            )?,
        ),
    ];
    for (label, kernel) in &cases {
        let defect = inner_column_mass_defect(kernel, 4.0);
        notes.push(format!("{label}: max inner-column mass defect {defect:.3e}"));
        worst = worst.max(defect);
    }
    notes.push(
        "potential-form kernels (harmonic-Euclidean) are statistical weight kernels, not \
         stochastic transition kernels; their columns are intentionally not normalized and \
         are excluded from this check"
            .to_string(),
    );
    Ok((worst, notes))
}

fn run_lattice_positivity() -> Result<(f64, Vec<String>)> {
    let grid = Grid1D::new(-8.0, 8.0, 401)?;
    let kernels = vec![
        ("brownian", euclid_kernel_matrix(&GeneratorSpec::brown(0.5)?, grid, TimeSlicing::over(0.5, 50)?)?),
        ("harmonic", euclid_kernel_matrix(&GeneratorSpec::harmonic(1.0, 1.0)?, grid, TimeSlicing::over(0.7, 100)?)?),
        ("ou", euclid_kernel_matrix(&GeneratorSpec::ou(1.0, 0.5)?, grid, TimeSlicing::over(0.5, 125)?)?),
    ];
    let mut worst = 0.0_f64;
    let mut notes = Vec::new();
    for (label, kernel) in &kernels {
        let min = kernel.min_entry();
        notes.push(format!("{label} lattice kernel min entry = {min:.3e}"));
        worst = worst.max((-min).max(0.0));
    }
    Ok((worst, notes))
}

fn run_cn_ou() -> Result<(f64, Vec<String>)> {
    let grid = Grid1D::new(-10.0, 10.0, 1001)?;
    let (d, eta, t, x0) = (1.0, 0.5, 1.0, 1.0);
    let spec = SmoluchowskiSpec::new(d, position_fn(move |x| eta * x), 1.0)?.to_fokker_planck();
    let init = mollified_delta(grid, x0)?;
    let sigma0 = 3.0 * grid.dx();
    let config = SolverConfig::new(1e-4, Boundary::ZeroFlux)?;
    let (out, report) = evolve_crank_nicolson(&init, &spec, t, &config)?;
    let mean_t = ou_mean(x0, eta, t);
    let var_t = sigma0 * sigma0 * (-2.0 * eta * t).exp() + ou_variance(d, eta, t);
    let sup = grid
        .nodes()
        .zip(&out.values)
        .map(|(x, &v)| {
            let exact = (2.0 * std::f64::consts::PI * var_t).sqrt().recip()
                * (-(x - mean_t).powi(2) / (2.0 * var_t)).exp();
            (v - exact).abs()
        })
        .fold(0.0_f64, f64::max);
    let measured = (sup / 1e-4).max(report.mass_drift / 1e-10);
    let notes = vec![
        format!("L-infinity error vs evolved Gaussian = {sup:.3e} (allowance 1e-4)"),
        format!("mass drift = {:.3e} (allowance 1e-10)", report.mass_drift),
    ];
    Ok((measured, notes))
}

fn run_langevin_ou() -> Result<(f64, Vec<String>)> {
    let (d, eta, x0) = (1.0, 0.5, 1.0);
    let n_paths = 100_000usize;
    let n_steps = 200usize;
    let spec = LangevinSpec::ou(d, eta)?;
    let ens = simulate_ensemble(&spec, x0, 2.0, n_steps, n_paths, SCENARIO_SEED)?;
    let mut measured = 0.0_f64;
    let mut notes = Vec::new();
    for &(step, t) in &[(50usize, 0.5), (100, 1.0), (200, 2.0)] {
        let xs = ens.at_step(step);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let target_mean = ou_mean(x0, eta, t);
        let target_var = ou_variance(d, eta, t);
        let se_mean = (target_var / n).sqrt();
        let se_var = target_var * (2.0 / n).sqrt();
        let dev_mean = (mean - target_mean).abs() / (4.0 * se_mean);
        let dev_var = (var - target_var).abs() / (4.0 * se_var);
        notes.push(format!(
            "t = {t}: mean {mean:.5} vs {target_mean:.5} ({:.2} of band), \
             variance {var:.5} vs {target_var:.5} ({:.2} of band)",
            dev_mean, dev_var
        ));
        measured = measured.max(dev_mean).max(dev_var);
    }
    // drifted Brownian: sample mean reaches v t
    let (dv, v, tv) = (1.0, 2.0, 1.0);
    let drift = simulate_ensemble(&LangevinSpec::drifted(dv, v)?, 0.0, tv, 100, n_paths, SCENARIO_SEED)?;
    let xs = drift.at_step(100);
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let se = (2.0 * dv * tv / xs.len() as f64).sqrt();
    let dev = (mean - v * tv).abs() / (4.0 * se);
    notes.push(format!(
        "drifted mean {mean:.5} vs {} ({dev:.2} of band)",
        v * tv
    ));
    Ok((measured.max(dev), notes))
}

fn run_feynman_kac() -> Result<(f64, Vec<String>)> {
    let (mu, omega, tau, x_a, x_b) = (1.0, 1.0, 0.7, 0.3, -0.5);
    let (n_steps, n_samples) = (200usize, 100_000usize);
    let g = GeneratorSpec::harmonic(mu, omega)?;
    let est = feynman_kac_estimate(x_a, x_b, tau, &g, n_steps, n_samples, SCENARIO_SEED)?;
    let exact = harmonic_euclid_kernel(mu, omega, x_b, x_a, tau)?;
    let bias = exact * omega * omega * tau * (tau / n_steps as f64);
    let allowance = 3.0 * est.std_err + bias;
    let notes = vec![format!(
        "estimate {:.6} +/- {:.6} vs closed value {exact:.6} (allowance {allowance:.2e})",
        est.value, est.std_err
    )];
    Ok(((est.value - exact).abs() / allowance, notes))
}

fn run_splitstep_free() -> Result<(f64, Vec<String>)> {
    let grid = Grid1D::new(-20.0, 20.0, 512)?;
    let (mass, hbar, x0, sigma, k0, t) = (1.0, 1.0, -2.0, 1.0, 1.0, 1.0);
    let h = HamiltonianSpec::free(mass, hbar)?;
    let init = ComplexField::gaussian_packet(grid, x0, sigma, k0);
    let out = splitstep_quantum_propagate(&init, &h, TimeSlicing::over(t, 50)?, SplittingOrder::First)?;
    let exact = ComplexField::new(
        grid,
        grid.nodes()
            .map(|x| quantum_free_packet(mass, hbar, x0, sigma, k0, x, t))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let f = fidelity(&out, &exact)?;
    Ok((1.0 - f, vec![format!("free-packet fidelity = {f:.14}")]))
}

fn run_splitstep_unitarity() -> Result<(f64, Vec<String>)> {
    let grid = Grid1D::new(-12.0, 12.0, 256)?;
    let h = HamiltonianSpec::harmonic(1.0, 1.0, 1.0)?;
    let mut worst = 0.0_f64;
    let mut notes = Vec::new();
    for (label, order) in [("plain", SplittingOrder::First), ("strang", SplittingOrder::Strang)] {
        let mut psi = ComplexField::gaussian_packet(grid, 1.0, 0.5_f64.sqrt(), 0.0);
        let mut prev = crate::grid::l2_norm_sq(&psi);
        let mut drift = 0.0_f64;
        for _ in 0..100 {
            psi = splitstep_quantum_propagate(&psi, &h, TimeSlicing::over(0.05, 1)?, order)?;
            let norm = crate::grid::l2_norm_sq(&psi);
            drift = drift.max((norm - prev).abs());
            prev = norm;
        }
        notes.push(format!("{label} split: max per-step norm drift {drift:.3e}"));
        worst = worst.max(drift);
    }
    Ok((worst, notes))
}

fn run_splitstep_orders() -> Result<(f64, Vec<String>)> {
    let grid = Grid1D::new(-12.0, 12.0, 256)?;
    let h = HamiltonianSpec::harmonic(1.0, 1.0, 1.0)?;
    let init = ComplexField::gaussian_packet(grid, 1.0, 0.5_f64.sqrt(), 0.0);
    let period = 2.0 * std::f64::consts::PI;
    let infidelity = |order: SplittingOrder, steps: usize| -> Result<f64> {
        let out = splitstep_quantum_propagate(&init, &h, TimeSlicing::over(period, steps)?, order)?;
        Ok(1.0 - fidelity(&out, &init)?)
    };
    let mut notes = Vec::new();
    let mut orders = Vec::new();
    for (label, order) in [("plain", SplittingOrder::First), ("strang", SplittingOrder::Strang)] {
        let errs: Vec<f64> = [32usize, 64, 128]
            .iter()
            .map(|&s| infidelity(order, s))
            .collect::<Result<_>>()?;
        let measured = 0.5 * ((errs[0] / errs[1]).log2() + (errs[1] / errs[2]).log2());
        notes.push(format!(
            "{label} split: infidelities {:.3e}, {:.3e}, {:.3e}; order {measured:.3}",
            errs[0], errs[1], errs[2]
        ));
        orders.push(measured);
    }
    notes.push(
        "the return-test infidelity actually converges faster than the stated floor (second \
         difference of the overlap); the check asserts at-least-order thresholds 0.85 and 1.8"
            .to_string(),
    );
    let deficiency = (0.85 - orders[0]).max(1.8 - orders[1]).max(0.0);
    Ok((deficiency, notes))
}

fn run_limit_identities() -> Result<(f64, Vec<String>)> {
    let points = [(-1.5, 0.6), (0.3, -0.5), (1.8, 1.2), (-0.3, -1.7)];
    let taus = [0.3, 1.0];
    let mut worst_h = 0.0_f64;
    let mut worst_ou = 0.0_f64;
    for &(xa, xb) in &points {
        for &tau in &taus {
            // vanishing frequency: mu = 1 so D = 1/(2 mu) = 0.5
            let h = harmonic_euclid_kernel(1.0, 1e-6, xb, xa, tau)?;
            let b = brown_kernel(0.5, xb, xa, tau)?;
            worst_h = worst_h.max((h - b).abs() / b);
            // vanishing relaxation rate: eta = omega^2/gamma = 1e-12 at gamma = 1
            let o = ou_kernel(1.0, 1e-12, xb, xa, tau)?;
            let b2 = brown_kernel(1.0, xb, xa, tau)?;
            worst_ou = worst_ou.max((o - b2).abs() / b2);
        }
    }
    let notes = vec![
        format!("harmonic -> brownian max relative error {worst_h:.3e} at omega = 1e-6"),
        format!("ou -> brownian max relative error {worst_ou:.3e} at eta = 1e-12"),
    ];
    Ok((worst_h.max(worst_ou), notes))
}

fn run_velocity_discrepancy() -> Result<(f64, Vec<String>)> {
    let grid = Grid1D::new(-12.0, 16.0, 2001)?;
    let (d, v, t, delta, mu) = (1.0, 2.0, 1.0, 1e-3, 1.0);
    let at = |tt: f64| RealField::from_fn(grid, |x| drift_brown_pdf(d, v, x, tt).unwrap());
    let drift_reading = velocity_via_mean_drift(&at(t - delta), &at(t + delta), delta)?;
    let literal_reading = velocity_operator_literal(&at(t), mu)?;
    let dx2 = grid.dx().powi(2);
    let measured = ((drift_reading - v).abs() / 1e-8).max(literal_reading.abs() / dx2);
    let notes = vec![
        format!("mean-drift reading = {drift_reading:.10} (drift speed v = {v})"),
        format!("literal gradient-expectation reading = {literal_reading:.3e} (exactly 0 in the continuum)"),
        "the literal reading integrates a total derivative of a decaying density and is \
         therefore 0 for every drift speed; the mean-drift reading recovers v. Both are \
         reported because the two definitions are often conflated"
            .to_string(),
    ];
    Ok((measured, notes))
}
