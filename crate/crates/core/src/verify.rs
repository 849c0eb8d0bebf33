//! Self-check suite: the time-domain oracle against the closed-form spectrum,
//! plus structural invariants of the decomposition on a small grid.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{dsi_closed_form, dsi_numeric, integrate_amplitudes, DriveParams, PULSE_HALF_SPAN};
use crate::error::Result;
use crate::grid::FrequencyGrid;
use crate::schmidt::{decompose, entropy, kernel_eigenvalues, KernelSide};
use crate::spectral::{build_joint_spectrum, eval_single, MultiplexConfig, PhysicalParams};

pub const SCAN_HALF_WIDTH: f64 = 20.0;
pub const SCAN_POINTS: usize = 11;
pub const ORACLE_TOL: f64 = 1e-5;
pub const INVARIANT_GRID_N: usize = 256;

const ODE_STEP: f64 = 5e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `value < tolerance`, or `value > tolerance` for lower bounds.
    pub lower_bound: bool,
    pub passed: bool,
}

impl Check {
    fn below(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, lower_bound: false, passed: value < tolerance }
    }

    fn above(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, lower_bound: true, passed: value > tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub status: &'static str,
    pub max_oracle_deviation: f64,
    pub adiabatic_ok: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn scan_axis() -> Vec<f64> {
    let step = 2.0 * SCAN_HALF_WIDTH / (SCAN_POINTS - 1) as f64;
    (0..SCAN_POINTS).map(|k| -SCAN_HALF_WIDTH + k as f64 * step).collect()
}

/// Largest pointwise relative deviation of the quadrature amplitude from its
/// closed form, and of the origin-normalized moduli from the spectral model.
pub fn oracle_deviations(params: &PhysicalParams, drive: &DriveParams) -> Result<(f64, f64)> {
    let axis = scan_axis();
    let d0 = dsi_numeric(params, drive, 0.0, 0.0)?;
    let f0 = eval_single(params, 0.0, 0.0);
    let mut closed: f64 = 0.0;
    let mut modulus: f64 = 0.0;
    for &s in &axis {
        for &i in &axis {
            let num = dsi_numeric(params, drive, s, i)?;
            let cf = dsi_closed_form(params, drive, s, i);
            closed = closed.max((num - cf).norm() / cf.norm());
            let a = num.norm() / d0.norm();
            let b = eval_single(params, s, i).norm() / f0.norm();
            modulus = modulus.max((a - b).abs() / b);
        }
    }
    Ok((closed, modulus))
}

pub fn run_verification(params: &PhysicalParams, drive: &DriveParams, grid_bounds: (f64, f64)) -> Result<VerifyReport> {
    let drive = drive.matched_to(params);
    let mut checks = Vec::new();

    let (closed, modulus) = oracle_deviations(params, &drive)?;
    checks.push(Check::below("dsi_vs_closed_form", closed, ORACLE_TOL));
    checks.push(Check::below("normalized_modulus_vs_spectrum", modulus, ORACLE_TOL));

    let d0 = dsi_numeric(params, &drive, 0.0, 0.0)?;
    let ridge = [-15.0, -5.0, 5.0, 15.0]
        .iter()
        .map(|&x| -> Result<f64> {
            let r = dsi_numeric(params, &drive, x, -x)? / d0;
            let half = Complex64::new(0.5 * params.gamma3_n(), 0.0);
            let want = half / Complex64::new(half.re, x);
            Ok((r - want).norm() / want.norm())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::below("ridge_lorentzian_ratio", ridge, 1e-6));

    let doubled = DriveParams { omega_a_area: 2.0 * drive.omega_a_area, omega_b_area: 2.0 * drive.omega_b_area, ..drive };
    let a = dsi_numeric(params, &drive, 3.0, -7.0)?;
    let b = dsi_numeric(params, &doubled, 3.0, -7.0)?;
    checks.push(Check::below("area_scaling", (b - a * 4.0).norm() / b.norm(), 1e-10));

    let span = PULSE_HALF_SPAN * params.tau();
    let traj = integrate_amplitudes(&drive, (-span, span), ODE_STEP)?;
    checks.push(Check::below("adiabatic_upper_state", traj.adiabatic_deviation(&drive), 0.05));
    checks.push(Check::above("ground_population", traj.min_ground_population(), 0.99));
    checks.push(Check::below("norm_excess", traj.max_norm_sqr() - 1.0, 1e-6));

    let g = FrequencyGrid::midpoint(grid_bounds.0, grid_bounds.1, INVARIANT_GRID_N)?;
    let cfg = MultiplexConfig::single();
    let js = build_joint_spectrum(params, &cfg, &g, &g, true)?;
    checks.push(Check::below("normalization", (js.weighted_norm_sqr() - 1.0).abs(), 1e-10));
    let full = decompose(&js, INVARIANT_GRID_N)?;
    let total: f64 = full.eigenvalues.iter().sum();
    checks.push(Check::below("eigenvalue_sum", (total - 1.0).abs(), 1e-10));
    checks.push(Check::below("orthonormality", full.orthonormality_error(), 1e-8));
    checks.push(Check::below("full_rank_reconstruction", full.reconstruction_error, 1e-8));
    let k1 = kernel_eigenvalues(params, &cfg, &g, &g, KernelSide::Signal)?;
    let k2 = kernel_eigenvalues(params, &cfg, &g, &g, KernelSide::Idler)?;
    let clip = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|x| x.max(0.0)).collect() };
    let (s1, s2) = (entropy(&clip(k1))?, entropy(&clip(k2))?);
    checks.push(Check::below("kernel_entropy_agreement", (s1 - s2).abs(), 1e-8));
    checks.push(Check::below("kernel_vs_svd_entropy", (s1 - full.entropy_bits).abs(), 1e-8));

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        status: if passed { "pass" } else { "fail" },
        max_oracle_deviation: closed.max(modulus),
        adiabatic_ok: drive.adiabatic_ok(),
        checks,
    })
}
