//! Temporal mode functions.
//!
//! A spectral mode `m(w)` sampled on a quadrature grid maps to
//!
//! ```text
//! m(t) = (2 pi)^(-1/2) sum_j w_j m(w_j) exp(-i w_j t)
//! ```
//!
//! and back through the adjoint sum over time samples. On an equally spaced
//! grid with spacing `h` the transform is periodic with period `2 pi / h`; a
//! window covering exactly one period makes the discrete transform unitary,
//! so norms and inner products carry over between domains.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::schmidt::SchmidtResult;

pub const DEFAULT_OVERSAMPLE: usize = 8;

/// Fourier peaks below this fraction of the mean component are ignored.
const PEAK_FLOOR: f64 = 1e-3;

/// Equally spaced time samples `start + k dt`, `k = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeWindow {
    pub start: f64,
    pub dt: f64,
    pub n: usize,
}

impl TimeWindow {
    pub fn new(start: f64, dt: f64, n: usize) -> Result<Self> {
        if !(start.is_finite() && dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("bad time window start {start}, dt {dt}")));
        }
        if n < 2 {
            return Err(Error::InsufficientPoints { got: n, need: 2 });
        }
        Ok(Self { start, dt, n })
    }

    /// One full alias-free period of the coarser grid, sampled `oversample`
    /// times as densely as the larger grid. The default start is a quarter
    /// period before zero.
    pub fn alias_free(
        signal: &FrequencyGrid,
        idler: &FrequencyGrid,
        oversample: usize,
        start: Option<f64>,
    ) -> Result<Self> {
        if oversample == 0 {
            return Err(Error::InvalidGrid("oversample must be at least 1".into()));
        }
        let h = signal.max_spacing().max(idler.max_spacing());
        let period = 2.0 * PI / h;
        let n = oversample * signal.len().max(idler.len());
        Self::new(start.unwrap_or(-0.25 * period), period / n as f64, n)
    }

    pub fn length(&self) -> f64 {
        self.dt * self.n as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.start + k as f64 * self.dt).collect()
    }

    /// Rejects windows longer than the alias-free period of `grid` or sampled
    /// too coarsely to resolve its frequency span.
    pub fn check(&self, grid: &FrequencyGrid) -> Result<()> {
        let period = 2.0 * PI / grid.max_spacing();
        if self.length() > period * (1.0 + 1e-12) {
            return Err(Error::NyquistViolated(format!(
                "window length {} exceeds the alias-free period {period}",
                self.length()
            )));
        }
        let dt_max = 2.0 * PI / grid.span();
        if self.dt > dt_max * (1.0 + 1e-12) {
            return Err(Error::NyquistViolated(format!("dt {} exceeds {dt_max}", self.dt)));
        }
        Ok(())
    }
}

/// Samples one spectral mode on the time window.
pub fn to_time(grid: &FrequencyGrid, mode: ArrayView1<'_, Complex64>, window: &TimeWindow) -> Result<Vec<Complex64>> {
    window.check(grid)?;
    let scale = (2.0 * PI).sqrt().recip();
    let weighted: Vec<Complex64> = grid.weights().iter().zip(mode.iter()).map(|(w, m)| m * *w).collect();
    let out = window
        .times()
        .par_iter()
        .map(|&t| {
            let acc: Complex64 = grid
                .nodes()
                .iter()
                .zip(&weighted)
                .map(|(&w, m)| m * Complex64::cis(-w * t))
                .sum();
            acc * scale
        })
        .collect();
    Ok(out)
}

/// Inverse of [`to_time`]: projects time samples back onto the grid nodes.
pub fn to_frequency(grid: &FrequencyGrid, samples: &[Complex64], window: &TimeWindow) -> Result<Vec<Complex64>> {
    window.check(grid)?;
    if samples.len() != window.n {
        return Err(Error::InsufficientPoints { got: samples.len(), need: window.n });
    }
    let scale = window.dt / (2.0 * PI).sqrt();
    let times = window.times();
    let out = grid
        .nodes()
        .par_iter()
        .map(|&w| {
            let acc: Complex64 = times
                .iter()
                .zip(samples)
                .map(|(&t, s)| s * Complex64::cis(w * t))
                .sum();
            acc * scale
        })
        .collect();
    Ok(out)
}

/// `sum_k dt |x_k|^2`
pub fn time_norm_sqr(samples: &[Complex64], window: &TimeWindow) -> f64 {
    samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * window.dt
}

#[derive(Debug, Clone)]
pub struct TimeModes {
    pub window: TimeWindow,
    /// Column `n` holds signal mode `n` at the window's times.
    pub signal: Array2<Complex64>,
    pub idler: Array2<Complex64>,
}

impl TimeModes {
    pub fn times(&self) -> Vec<f64> {
        self.window.times()
    }

    pub fn signal_density(&self, n: usize) -> Vec<f64> {
        self.signal.column(n).iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn idler_density(&self, n: usize) -> Vec<f64> {
        self.idler.column(n).iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Time-domain versions of every mode in a decomposition.
pub fn time_modes(result: &SchmidtResult, window: &TimeWindow) -> Result<TimeModes> {
    let r = result.rank();
    let mut signal = Array2::zeros((window.n, r));
    let mut idler = Array2::zeros((window.n, r));
    for n in 0..r {
        let s = to_time(&result.signal_grid, result.signal_mode(n), window)?;
        let i = to_time(&result.idler_grid, result.idler_mode(n), window)?;
        signal.column_mut(n).assign(&ArrayView1::from(&s));
        idler.column_mut(n).assign(&ArrayView1::from(&i));
    }
    Ok(TimeModes { window: *window, signal, idler })
}

/// Period of the strongest oscillation in an equally sampled density.
///
/// Looks for local maxima of the Fourier magnitude away from zero frequency
/// that exceed a small fraction of the mean component, takes the largest, and
/// refines its position by a parabola through the neighbouring bins.
pub fn dominant_period(density: &[f64], dt: f64) -> Result<f64> {
    let n = density.len();
    if n < 8 {
        return Err(Error::InsufficientPoints { got: n, need: 8 });
    }
    let mut buf: Vec<Complex64> = density.iter().map(|&d| Complex64::new(d, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..n / 2 + 1].iter().map(|z| z.norm()).collect();
    let floor = PEAK_FLOOR * mag[0];
    let mut best: Option<usize> = None;
    for k in 1..mag.len() - 1 {
        if mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] > floor && best.map_or(true, |b| mag[k] > mag[b]) {
            best = Some(k);
        }
    }
    let k = best.ok_or(Error::NoOscillationFound)?;
    let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let freq = (k as f64 + shift) / (n as f64 * dt);
    Ok(1.0 / freq)
}

/// Exponential decay rate from a least-squares line through `ln(density)`
/// over samples with `t` in `[t_lo, t_hi]`.
pub fn fit_decay_rate(times: &[f64], density: &[f64], t_lo: f64, t_hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(density)
        .filter(|(&t, &d)| t >= t_lo && t <= t_hi && d > 0.0)
        .map(|(&t, &d)| (t, d.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientPoints { got: pts.len(), need: 3 });
    }
    let m = pts.len() as f64;
    let (mt, my) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t / m, b + y / m));
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, y)| (a + (t - mt) * (y - my), b + (t - mt) * (t - mt)));
    Ok(-sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian_mode(g: &FrequencyGrid, center: f64, width: f64) -> Vec<Complex64> {
        let raw: Vec<Complex64> = g
            .nodes()
            .iter()
            .map(|w| Complex64::new((-(w - center) * (w - center) / (2.0 * width * width)).exp(), 0.0))
            .collect();
        let norm: f64 = g.integrate(&raw.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()).sqrt();
        raw.into_iter().map(|z| z / norm).collect()
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = FrequencyGrid::midpoint(-40.0, 40.0, 256).unwrap();
        let width = 2.0;
        let m = gaussian_mode(&g, 0.0, width);
        let win = TimeWindow::alias_free(&g, &g, 2, None).unwrap();
        let t = to_time(&g, ArrayView1::from(&m), &win).unwrap();
        // |m(t)|^2 of a unit Gaussian: width/sqrt(pi) exp(-t^2 width^2)
        for (k, &tk) in win.times().iter().enumerate().step_by(37) {
            let want = width / PI.sqrt() * (-tk * tk * width * width).exp();
            assert!((t[k].norm_sqr() - want).abs() < 1e-12, "{tk}");
        }
    }

    #[test]
    fn unitary_round_trip() {
        let g = FrequencyGrid::midpoint(-50.0, 30.0, 128).unwrap();
        let m: Vec<Complex64> = g.nodes().iter().map(|w| Complex64::new(1.0 / (2.5 + w * w), 0.3 * w.sin())).collect();
        let win = TimeWindow::alias_free(&g, &g, 4, Some(-1.3)).unwrap();
        let t = to_time(&g, ArrayView1::from(&m), &win).unwrap();
        let back = to_frequency(&g, &t, &win).unwrap();
        let err = m.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        let freq_norm: f64 = g.integrate(&m.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
        assert_relative_eq!(time_norm_sqr(&t, &win), freq_norm, max_relative = 1e-12);
    }

    #[test]
    fn nyquist_checks() {
        let g = FrequencyGrid::midpoint(-300.0, 300.0, 1024).unwrap();
        let period = 2.0 * PI / g.max_spacing();
        assert!(TimeWindow::new(0.0, period / 4096.0, 4096).unwrap().check(&g).is_ok());
        let too_long = TimeWindow::new(0.0, 1.1 * period / 4096.0, 4096).unwrap();
        assert!(matches!(too_long.check(&g), Err(Error::NyquistViolated(_))));
        let too_coarse = TimeWindow::new(0.0, 0.02, 16).unwrap();
        assert!(matches!(too_coarse.check(&g), Err(Error::NyquistViolated(_))));
    }

    #[test]
    fn dominant_period_of_beating_envelope() {
        let dt = 1e-3;
        let period = 0.0523;
        let d: Vec<f64> = (0..4096)
            .map(|k| {
                let t = k as f64 * dt;
                (-t).exp() * (1.0 + (2.0 * PI * t / period).cos())
            })
            .collect();
        let got = dominant_period(&d, dt).unwrap();
        assert_relative_eq!(got, period, max_relative = 2e-2);
    }

    #[test]
    fn no_oscillation_in_pure_decay() {
        let d: Vec<f64> = (0..1024).map(|k| (-(k as f64) * 0.01).exp()).collect();
        assert!(matches!(dominant_period(&d, 0.01), Err(Error::NoOscillationFound)));
        assert!(matches!(dominant_period(&[1.0; 4], 0.1), Err(Error::InsufficientPoints { .. })));
    }

    #[test]
    fn decay_rate_fit() {
        let times: Vec<f64> = (0..100).map(|k| k as f64 * 0.05).collect();
        let d: Vec<f64> = times.iter().map(|t| 3.0 * (-5.0 * t).exp()).collect();
        assert_relative_eq!(fit_decay_rate(&times, &d, 1.0, 4.0).unwrap(), 5.0, max_relative = 1e-10);
        assert!(fit_decay_rate(&times, &d, 10.0, 20.0).is_err());
    }
}
