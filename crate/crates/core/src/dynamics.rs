//! Time-domain oracle for the pair amplitude.
//!
//! Two independent checks of the closed-form spectrum:
//! * the three-level amplitude equations (ground `E`, intermediate `A`,
//!   upper `B`, one collective mode) integrated with fixed-step RK4, to
//!   confirm the adiabatic solution `B ~ Oa Ob / (4 D1 D2)`;
//! * the double time integral for the two-photon amplitude evaluated by
//!   composite Gauss–Legendre quadrature and compared with its closed form.
//!
//! Drives are area-normalized Gaussians `O(t) = area exp(-t^2/tau^2) / (sqrt(pi) tau)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{composite_gauss_legendre, gauss_legendre_rule, GAUSS_LEGENDRE_ORDER};
use crate::spectral::PhysicalParams;

/// Allowed norm drift of the amplitude integration, per unit time.
pub const MAX_NORM_DRIFT_RATE: f64 = 1e-6;

/// Largest tolerated residual decay factor `exp(-G t_final / 2)`.
pub const MAX_TAIL_FACTOR: f64 = 1e-8;

/// Drives are treated as zero beyond this many pulse widths.
pub const PULSE_HALF_SPAN: f64 = 6.0;

/// Residual decay factor used by [`DsiWindow::for_params`].
const DEFAULT_TAIL_FACTOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveParams {
    pub omega_a_area: f64,
    pub omega_b_area: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub tau: f64,
}

impl Default for DriveParams {
    fn default() -> Self {
        Self { omega_a_area: 0.1, omega_b_area: 0.1, delta1: 200.0, delta2: 200.0, tau: 0.25 }
    }
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.omega_a_area, self.omega_b_area, self.delta1, self.delta2, self.tau];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("drive parameters must be finite".into()));
        }
        if self.tau <= 0.0 {
            return Err(Error::InvalidParams(format!("tau must be > 0, got {}", self.tau)));
        }
        if self.delta1 == 0.0 || self.delta2 == 0.0 {
            return Err(Error::InvalidParams("detunings must be nonzero".into()));
        }
        Ok(())
    }

    /// Same drive with the pulse width of `params`.
    pub fn matched_to(mut self, params: &PhysicalParams) -> Self {
        self.tau = params.tau();
        self
    }

    /// Whether the detuning dominates the pulse Rabi scale (recorded only).
    pub fn adiabatic_ok(&self) -> bool {
        self.omega_a_area == 0.0 || self.delta1.abs() * self.tau * PI.sqrt() / self.omega_a_area.abs() >= 50.0
    }

    fn envelope(&self, t: f64) -> f64 {
        (-t * t / (self.tau * self.tau)).exp() / (PI.sqrt() * self.tau)
    }

    pub fn omega_a(&self, t: f64) -> f64 {
        self.omega_a_area * self.envelope(t)
    }

    pub fn omega_b(&self, t: f64) -> f64 {
        self.omega_b_area * self.envelope(t)
    }

    /// Adiabatic upper-state amplitude `Oa(t) Ob(t) / (4 D1 D2)`.
    pub fn adiabatic_b(&self, t: f64) -> f64 {
        self.omega_a(t) * self.omega_b(t) / (4.0 * self.delta1 * self.delta2)
    }
}

#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    pub times: Vec<f64>,
    pub e: Vec<Complex64>,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl AmplitudeTrajectory {
    pub fn norm_sqr(&self, k: usize) -> f64 {
        self.e[k].norm_sqr() + self.a[k].norm_sqr() + self.b[k].norm_sqr()
    }

    pub fn max_norm_sqr(&self) -> f64 {
        (0..self.times.len()).map(|k| self.norm_sqr(k)).fold(0.0, f64::max)
    }

    pub fn min_ground_population(&self) -> f64 {
        self.e.iter().map(|z| z.norm_sqr()).fold(f64::INFINITY, f64::min)
    }

    /// `max_t |B(t) - B_ad(t)| / max_t |B(t)|`
    pub fn adiabatic_deviation(&self, drive: &DriveParams) -> f64 {
        let peak = self.b.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let worst = self
            .times
            .iter()
            .zip(&self.b)
            .map(|(&t, b)| (b - drive.adiabatic_b(t)).norm())
            .fold(0.0, f64::max);
        if peak > 0.0 {
            worst / peak
        } else {
            worst
        }
    }
}

type State = [Complex64; 3];

fn rhs(drive: &DriveParams, t: f64, y: &State) -> State {
    let i = Complex64::i();
    let (oa, ob) = (drive.omega_a(t), drive.omega_b(t));
    let [e, a, b] = *y;
    [
        i * (0.5 * oa) * a,
        i * (0.5 * oa * e + 0.5 * ob * b + drive.delta1 * a),
        i * (0.5 * ob * a + drive.delta2 * b),
    ]
}

fn axpy(y: &State, h: f64, k: &State) -> State {
    [y[0] + k[0] * h, y[1] + k[1] * h, y[2] + k[2] * h]
}

/// Integrates the three-level amplitude equations from the ground state at
/// `t_span.0` with fixed-step RK4.
pub fn integrate_amplitudes(drive: &DriveParams, t_span: (f64, f64), dt: f64) -> Result<AmplitudeTrajectory> {
    drive.validate()?;
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::InvalidParams(format!("bad time span [{t0}, {t1}]")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParams(format!("dt must be > 0, got {dt}")));
    }
    let steps = ((t1 - t0) / dt).ceil() as usize;
    let h = (t1 - t0) / steps as f64;
    let mut y: State = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    let mut out = AmplitudeTrajectory {
        times: Vec::with_capacity(steps + 1),
        e: Vec::with_capacity(steps + 1),
        a: Vec::with_capacity(steps + 1),
        b: Vec::with_capacity(steps + 1),
    };
    let mut push = |t: f64, y: &State| {
        out.times.push(t);
        out.e.push(y[0]);
        out.a.push(y[1]);
        out.b.push(y[2]);
    };
    push(t0, &y);
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let k1 = rhs(drive, t, &y);
        let k2 = rhs(drive, t + 0.5 * h, &axpy(&y, 0.5 * h, &k1));
        let k3 = rhs(drive, t + 0.5 * h, &axpy(&y, 0.5 * h, &k2));
        let k4 = rhs(drive, t + h, &axpy(&y, h, &k3));
        for c in 0..3 {
            y[c] += (k1[c] + k2[c] * 2.0 + k3[c] * 2.0 + k4[c]) * (h / 6.0);
        }
        push(t0 + (k + 1) as f64 * h, &y);
    }
    let drift = (0..out.times.len())
        .map(|k| (out.norm_sqr(k) - 1.0).abs())
        .fold(0.0, f64::max);
    let drift_per_time = drift / (t1 - t0);
    if drift_per_time > MAX_NORM_DRIFT_RATE {
        return Err(Error::StepTooCoarse { drift_per_time });
    }
    Ok(out)
}

/// Integration limits for the two-photon amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsiWindow {
    pub t_start: f64,
    pub t_final: f64,
}

impl DsiWindow {
    /// Drives covered from `-6 tau`; the idler decay integrated until its
    /// envelope has fallen to 1e-14.
    pub fn for_params(params: &PhysicalParams) -> Self {
        let t_start = -PULSE_HALF_SPAN * params.tau();
        let t_final = PULSE_HALF_SPAN * params.tau() - 2.0 * DEFAULT_TAIL_FACTOR.ln() / params.gamma3_n();
        Self { t_start, t_final }
    }

    fn check(&self, params: &PhysicalParams) -> Result<()> {
        let need_start = -PULSE_HALF_SPAN * params.tau();
        if self.t_start > need_start {
            return Err(Error::WindowTooShort(format!(
                "start {} must be at or before {need_start}",
                self.t_start
            )));
        }
        let tail = (-0.5 * params.gamma3_n() * self.t_final).exp();
        if !(tail < MAX_TAIL_FACTOR) || self.t_final <= -self.t_start {
            return Err(Error::WindowTooShort(format!(
                "final time {} leaves decay factor {tail:e}",
                self.t_final
            )));
        }
        Ok(())
    }
}

fn check_matched(params: &PhysicalParams, drive: &DriveParams) -> Result<()> {
    drive.validate()?;
    if (drive.tau - params.tau()).abs() > 1e-12 * params.tau() {
        return Err(Error::InvalidParams(format!(
            "drive pulse width {} differs from tau = {}",
            drive.tau,
            params.tau()
        )));
    }
    Ok(())
}

/// Closed form of the two-photon amplitude (common phase-matching and
/// coupling factors set to one).
pub fn dsi_closed_form(params: &PhysicalParams, drive: &DriveParams, dws: f64, dwi: f64) -> Complex64 {
    let tau = params.tau();
    let pref = drive.omega_a_area * drive.omega_b_area / (4.0 * drive.delta1 * drive.delta2) / ((2.0 * PI).sqrt() * tau);
    let sum = dws + dwi;
    let gauss = (-sum * sum * tau * tau / 8.0).exp();
    pref * gauss / Complex64::new(0.5 * params.gamma3_n(), -dwi)
}

pub fn dsi_numeric(params: &PhysicalParams, drive: &DriveParams, dws: f64, dwi: f64) -> Result<Complex64> {
    dsi_numeric_in(params, drive, &DsiWindow::for_params(params), dws, dwi)
}

/// Evaluates
///
/// ```text
/// int dt'' b(t'') e^{i dws t''} int_{t''}^{t_final} dt' e^{i dwi t'} e^{-G (t' - t'') / 2}
/// ```
///
/// with composite Gauss–Legendre panels fine enough to resolve both the pulse
/// and the oscillation frequencies.
pub fn dsi_numeric_in(
    params: &PhysicalParams,
    drive: &DriveParams,
    window: &DsiWindow,
    dws: f64,
    dwi: f64,
) -> Result<Complex64> {
    check_matched(params, drive)?;
    window.check(params)?;
    let tau = params.tau();
    let half_g = 0.5 * params.gamma3_n();
    let rate = Complex64::new(-half_g, dwi);

    // t'' beyond the pulse span contributes below double precision
    let lo = window.t_start.max(-PULSE_HALF_SPAN * tau);
    let hi = PULSE_HALF_SPAN * tau;
    let outer_width = (tau / 8.0).min(1.0 / (dws + dwi).abs().max(1.0));
    let outer_panels = ((hi - lo) / outer_width).ceil() as usize;
    let (outer_t, outer_w) = composite_gauss_legendre(lo, hi, outer_panels, GAUSS_LEGENDRE_ORDER);

    // Cumulative inner integral I(L) = int_0^L e^{rate u} du over whole
    // panels, completed per node by one partial panel.
    let l_max = window.t_final - lo;
    let inner_width = 0.1f64.min(1.0 / rate.norm());
    let inner_panels = (l_max / inner_width).ceil() as usize;
    let inner_width = l_max / inner_panels as f64;
    let (x, w) = gauss_legendre_rule(GAUSS_LEGENDRE_ORDER);
    let panel = |a: f64, b: f64| -> Complex64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        x.iter().zip(&w).map(|(xi, wi)| (rate * (mid + half * xi)).exp() * (wi * half)).sum()
    };
    let mut cumulative = Vec::with_capacity(inner_panels + 1);
    cumulative.push(Complex64::new(0.0, 0.0));
    for p in 0..inner_panels {
        let a = p as f64 * inner_width;
        let next = cumulative[p] + panel(a, a + inner_width);
        cumulative.push(next);
    }
    let inner = |l: f64| -> Complex64 {
        let p = ((l / inner_width).floor() as usize).min(inner_panels);
        let a = p as f64 * inner_width;
        if l > a {
            cumulative[p] + panel(a, l)
        } else {
            cumulative[p]
        }
    };

    let total: Complex64 = outer_t
        .iter()
        .zip(&outer_w)
        .map(|(&t, &wt)| {
            let b = drive.adiabatic_b(t);
            let phase = Complex64::cis((dws + dwi) * t);
            phase * inner(window.t_final - t) * (b * wt)
        })
        .sum();
    Ok(total)
}
