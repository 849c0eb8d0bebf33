//! Schmidt decomposition of a discretized joint spectrum.
//!
//! With quadrature weights `ws`, `wi`, the weight-symmetrized matrix
//! `M[j][k] = sqrt(ws[j]) f[j][k] sqrt(wi[k])` has singular values `sigma_n`
//! whose squares are the Schmidt eigenvalues. Its left and right singular
//! vectors, divided by the square-root weights, are the signal and idler mode
//! functions, orthonormal under the grid inner product. The same eigenvalues
//! solve the one-photon kernel problems; [`kernel_eigenvalues`] evaluates
//! that route independently for cross-checking.
//!
//! Conventions for reproducible output:
//! * each signal mode is rotated so that its largest-modulus sample is real
//!   and positive, the idler mode carrying the compensating phase;
//! * clusters of eigenvalues closer than [`UNRESOLVED_GAP`] (relative) cannot
//!   be told apart in double precision, so the backend's basis inside such a
//!   cluster is arbitrary. These clusters are rotated onto eigenvectors of the
//!   signal-frequency operator, which localizes the modes in frequency, and
//!   ordered by the grid index of each mode's largest sample.

use faer::Mat;
use ndarray::{s, Array2, ArrayView1};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::spectral::{eval_multiplexed, JointSpectrum, MultiplexConfig, PhysicalParams};

/// Eigenvalues at or below this are numerical zeros.
pub const EIGENVALUE_FLOOR: f64 = 1e-15;

pub const DEFAULT_PAIR_TOL: f64 = 1e-2;

/// Relative eigenvalue gap below which two modes count as numerically
/// degenerate.
pub const UNRESOLVED_GAP: f64 = 1e-9;

const PROBABILITY_SUM_TOL: f64 = 1e-8;

/// Two consecutive eigenvalues (0-based indices) flagged as degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModePair {
    pub first: usize,
    pub second: usize,
    /// `(lambda_first - lambda_second) / lambda_first`
    pub gap: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pairing {
    pub pairs: Vec<ModePair>,
    pub singles: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SchmidtResult {
    /// Leading eigenvalues, nonincreasing, truncated at the requested rank.
    pub eigenvalues: Vec<f64>,
    /// Signal modes as columns, sampled on `signal_grid`.
    pub signal_modes: Array2<Complex64>,
    /// Idler modes as columns, sampled on `idler_grid`.
    pub idler_modes: Array2<Complex64>,
    /// Entropy of the full eigenvalue spectrum, in bits.
    pub entropy_bits: f64,
    /// Schmidt number of the full eigenvalue spectrum.
    pub schmidt_number: f64,
    pub pairs: Vec<ModePair>,
    /// Weighted L2 distance between the rank-truncated expansion and the input.
    pub reconstruction_error: f64,
    /// Eigenvalue mass beyond the truncation rank.
    pub tail_mass: f64,
    pub signal_grid: FrequencyGrid,
    pub idler_grid: FrequencyGrid,
}

impl SchmidtResult {
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn signal_mode(&self, n: usize) -> ArrayView1<'_, Complex64> {
        self.signal_modes.column(n)
    }

    pub fn idler_mode(&self, n: usize) -> ArrayView1<'_, Complex64> {
        self.idler_modes.column(n)
    }

    /// Largest deviation of the signal and idler Gram matrices from identity.
    pub fn orthonormality_error(&self) -> f64 {
        gram_error(&self.signal_grid, &self.signal_modes).max(gram_error(&self.idler_grid, &self.idler_modes))
    }
}

/// Weighted inner product `sum_j w[j] conj(a[j]) b[j]`.
pub fn weighted_inner(grid: &FrequencyGrid, a: ArrayView1<'_, Complex64>, b: ArrayView1<'_, Complex64>) -> Complex64 {
    grid.weights()
        .iter()
        .zip(a.iter().zip(b.iter()))
        .map(|(w, (x, y))| x.conj() * y * *w)
        .sum()
}

/// `max |<m_a, m_b> - delta_ab|` over all mode pairs.
pub fn gram_error(grid: &FrequencyGrid, modes: &Array2<Complex64>) -> f64 {
    let r = modes.ncols();
    let mut worst: f64 = 0.0;
    for a in 0..r {
        for b in a..r {
            let g = weighted_inner(grid, modes.column(a), modes.column(b));
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

/// `sum_j w[j] min(|a[j]|^2, |b[j]|^2)`: shared probability of two densities.
pub fn density_overlap(grid: &FrequencyGrid, a: ArrayView1<'_, Complex64>, b: ArrayView1<'_, Complex64>) -> f64 {
    grid.weights()
        .iter()
        .zip(a.iter().zip(b.iter()))
        .map(|(w, (x, y))| w * x.norm_sqr().min(y.norm_sqr()))
        .sum()
}

fn check_probability_vector(lambdas: &[f64]) -> Result<()> {
    if let Some(bad) = lambdas.iter().find(|l| !l.is_finite() || **l < -EIGENVALUE_FLOOR) {
        return Err(Error::NotAProbabilityVector(format!("entry {bad} is negative or not finite")));
    }
    let total: f64 = lambdas.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(Error::NotAProbabilityVector(format!("entries sum to {total}")));
    }
    Ok(())
}

/// `-sum lambda log2 lambda` over eigenvalues above [`EIGENVALUE_FLOOR`].
pub fn entropy(lambdas: &[f64]) -> Result<f64> {
    check_probability_vector(lambdas)?;
    Ok(entropy_unchecked(lambdas))
}

fn entropy_unchecked(lambdas: &[f64]) -> f64 {
    let s: f64 = lambdas
        .iter()
        .filter(|&&l| l > EIGENVALUE_FLOOR)
        .map(|&l| -l * l.log2())
        .sum();
    s.max(0.0)
}

/// `1 / sum lambda^2`.
pub fn schmidt_number(lambdas: &[f64]) -> Result<f64> {
    check_probability_vector(lambdas)?;
    Ok(schmidt_number_unchecked(lambdas))
}

fn schmidt_number_unchecked(lambdas: &[f64]) -> f64 {
    let p: f64 = lambdas.iter().filter(|&&l| l > EIGENVALUE_FLOOR).map(|l| l * l).sum();
    p.recip()
}

/// Greedily pairs consecutive eigenvalues whose relative gap is below
/// `rel_tol`. Expects nonincreasing input; numerical zeros stay single.
pub fn pair_degeneracies(lambdas: &[f64], rel_tol: f64) -> Pairing {
    let mut out = Pairing::default();
    let mut n = 0;
    while n < lambdas.len() {
        if n + 1 < lambdas.len() && lambdas[n] > EIGENVALUE_FLOOR {
            let gap = (lambdas[n] - lambdas[n + 1]).abs() / lambdas[n];
            if gap < rel_tol {
                out.pairs.push(ModePair { first: n, second: n + 1, gap });
                n += 2;
                continue;
            }
        }
        out.singles.push(n);
        n += 1;
    }
    out
}

fn check_decomposable(js: &JointSpectrum) -> Result<()> {
    if !js.normalized {
        return Err(Error::NotNormalized);
    }
    Ok(())
}

fn symmetrized(js: &JointSpectrum) -> Mat<Complex64> {
    let ws: Vec<f64> = js.signal_grid.weights().iter().map(|w| w.sqrt()).collect();
    let wi: Vec<f64> = js.idler_grid.weights().iter().map(|w| w.sqrt()).collect();
    Mat::from_fn(js.amplitude.nrows(), js.amplitude.ncols(), |j, k| {
        js.amplitude[[j, k]] * (ws[j] * wi[k])
    })
}

/// All Schmidt eigenvalues, nonincreasing, without mode functions.
pub fn schmidt_eigenvalues(js: &JointSpectrum) -> Result<Vec<f64>> {
    check_decomposable(js)?;
    let m = symmetrized(js);
    Ok(linalg::singular_values(&m)?.into_iter().map(|s| s * s).collect())
}

/// Entropy and Schmidt number of a normalized spectrum.
pub fn entanglement_metrics(js: &JointSpectrum) -> Result<(f64, f64, Vec<f64>)> {
    let lambdas = schmidt_eigenvalues(js)?;
    Ok((entropy_unchecked(&lambdas), schmidt_number_unchecked(&lambdas), lambdas))
}

pub fn decompose(js: &JointSpectrum, rank: usize) -> Result<SchmidtResult> {
    decompose_with(js, rank, DEFAULT_PAIR_TOL)
}

pub fn decompose_with(js: &JointSpectrum, rank: usize, pair_tol: f64) -> Result<SchmidtResult> {
    check_decomposable(js)?;
    let max = js.amplitude.nrows().min(js.amplitude.ncols());
    if rank == 0 {
        return Err(Error::ZeroRank);
    }
    if rank > max {
        return Err(Error::RankTooLarge { rank, max });
    }

    let m = symmetrized(js);
    let linalg::Svd { s: sigma, mut u, mut v } = linalg::thin_svd(&m)?;
    let lambdas: Vec<f64> = sigma.iter().map(|s| s * s).collect();

    localize_unresolved_clusters(&mut u, &mut v, &lambdas, js.signal_grid.nodes(), rank)?;

    let mut u = u.slice(s![.., ..rank]).to_owned();
    let mut v = v.slice(s![.., ..rank]).to_owned();
    for n in 0..rank {
        let mut col = u.column_mut(n);
        let peak = argmax_modulus(col.view());
        let z = col[peak];
        if z.norm() > 0.0 {
            let rot = (z / z.norm()).conj();
            col.mapv_inplace(|x| x * rot);
            col[peak] = Complex64::new(z.norm(), 0.0);
            v.column_mut(n).mapv_inplace(|x| x * rot);
        }
    }

    let reconstruction_error = residual_norm(&m, &u, &sigma[..rank], &v);

    let sqrt_ws: Vec<f64> = js.signal_grid.weights().iter().map(|w| w.sqrt()).collect();
    let sqrt_wi: Vec<f64> = js.idler_grid.weights().iter().map(|w| w.sqrt()).collect();
    let signal_modes = Array2::from_shape_fn(u.raw_dim(), |(j, n)| u[[j, n]] / sqrt_ws[j]);
    let idler_modes = Array2::from_shape_fn(v.raw_dim(), |(k, n)| v[[k, n]].conj() / sqrt_wi[k]);

    let eigenvalues = lambdas[..rank].to_vec();
    let tail_mass = lambdas[rank..].iter().sum::<f64>().max(0.0);
    let pairs = pair_degeneracies(&eigenvalues, pair_tol).pairs;

    Ok(SchmidtResult {
        entropy_bits: entropy_unchecked(&lambdas),
        schmidt_number: schmidt_number_unchecked(&lambdas),
        eigenvalues,
        signal_modes,
        idler_modes,
        pairs,
        reconstruction_error,
        tail_mass,
        signal_grid: js.signal_grid.clone(),
        idler_grid: js.idler_grid.clone(),
    })
}

fn argmax_modulus(col: ArrayView1<'_, Complex64>) -> usize {
    let mut best = 0;
    let mut best_val = -1.0;
    for (j, z) in col.iter().enumerate() {
        let v = z.norm_sqr();
        if v > best_val {
            best = j;
            best_val = v;
        }
    }
    best
}

/// `|| M - U diag(s) V^H ||_F`
fn residual_norm(m: &Mat<Complex64>, u: &Array2<Complex64>, sigma: &[f64], v: &Array2<Complex64>) -> f64 {
    let us = Mat::<Complex64>::from_fn(u.nrows(), u.ncols(), |j, n| (u[[j, n]] * sigma[n]).into());
    let vf = linalg::to_faer(v);
    let approx = &us * vf.adjoint();
    let diff = m - &approx;
    diff.norm_l2()
}

fn localize_unresolved_clusters(
    u: &mut Array2<Complex64>,
    v: &mut Array2<Complex64>,
    lambdas: &[f64],
    signal_nodes: &[f64],
    rank: usize,
) -> Result<()> {
    let mut start = 0;
    while start < rank.min(lambdas.len()) {
        let mut end = start + 1;
        while end < lambdas.len()
            && lambdas[end - 1] > EIGENVALUE_FLOOR
            && (lambdas[end - 1] - lambdas[end]) / lambdas[end - 1] < UNRESOLVED_GAP
        {
            end += 1;
        }
        if end - start > 1 {
            localize_cluster(u, v, start..end, signal_nodes)?;
        }
        start = end;
    }
    Ok(())
}

fn localize_cluster(
    u: &mut Array2<Complex64>,
    v: &mut Array2<Complex64>,
    cols: std::ops::Range<usize>,
    signal_nodes: &[f64],
) -> Result<()> {
    let k = cols.len();
    let uc = u.slice(s![.., cols.clone()]).to_owned();
    let vc = v.slice(s![.., cols.clone()]).to_owned();
    // The weights cancel: u already carries sqrt(w) from the symmetrization.
    let position = Array2::from_shape_fn((k, k), |(a, b)| {
        uc.column(a)
            .iter()
            .zip(uc.column(b).iter())
            .zip(signal_nodes)
            .map(|((x, y), w)| x.conj() * y * *w)
            .sum::<Complex64>()
    });
    let (_, rot) = linalg::hermitian_eigen(&position)?;
    let ur = uc.dot(&rot);
    let vr = vc.dot(&rot);
    let mut order: Vec<usize> = (0..k).collect();
    let peaks: Vec<usize> = (0..k).map(|c| argmax_modulus(ur.column(c))).collect();
    order.sort_by_key(|&c| peaks[c]);
    for (dst, &src) in cols.zip(&order) {
        u.column_mut(dst).assign(&ur.column(src));
        v.column_mut(dst).assign(&vr.column(src));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSide {
    /// `K1(w, w') = int f(w, x) conj(f(w', x)) dx`
    Signal,
    /// `K2(w, w') = int f(x, w) conj(f(x, w')) dx`
    Idler,
}

/// Eigenvalues of a one-photon correlation kernel built by direct quadrature.
///
/// The kernel is sampled on `outer` and its defining integral is evaluated on
/// `inner`; eigenvalues come from a Hermitian eigensolve of the weighted
/// kernel, normalized to unit trace. This shares no code path with
/// [`decompose`] beyond evaluating the amplitude.
pub fn kernel_eigenvalues(
    params: &PhysicalParams,
    cfg: &MultiplexConfig,
    outer: &FrequencyGrid,
    inner: &FrequencyGrid,
    side: KernelSide,
) -> Result<Vec<f64>> {
    let n = outer.len();
    let ni = inner.len();
    let amp = Mat::<Complex64>::from_fn(n, ni, |j, x| {
        let (w, y) = (outer.nodes()[j], inner.nodes()[x]);
        let f = match side {
            KernelSide::Signal => eval_multiplexed(params, cfg, w, y),
            KernelSide::Idler => eval_multiplexed(params, cfg, y, w),
        };
        f * (outer.weights()[j] * inner.weights()[x]).sqrt()
    });
    let kernel = &amp * amp.adjoint();
    let trace: f64 = (0..n).map(|j| kernel[(j, j)].re).sum();
    if !(trace.is_finite() && trace > 0.0) {
        return Err(Error::NormIsZero { captured: trace, reference: 0.0 });
    }
    let mut lambdas = linalg::hermitian_eigenvalues(&kernel)?;
    for l in &mut lambdas {
        *l /= trace;
    }
    Ok(lambdas)
}
