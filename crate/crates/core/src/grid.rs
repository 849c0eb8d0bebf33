//! Discretized frequency axes with quadrature weights.
//!
//! A [`FrequencyGrid`] pairs nodes with positive weights so that
//! `sum(w[j] * g(x[j]))` approximates the integral of `g` over `[lo, hi]`.
//! Everything downstream (normalization, inner products, the Schmidt
//! decomposition) goes through these weights, so any rule satisfying the
//! contract can be swapped in.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points per Gauss–Legendre panel.
pub const GAUSS_LEGENDRE_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    /// Cell centres of `n` equal cells, each weighted by the cell width.
    #[default]
    Midpoint,
    /// `n` equally spaced nodes including both endpoints.
    Trapezoid,
    /// `n / 8` equal panels with 8-point Gauss–Legendre nodes each.
    GaussLegendre,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    lo: f64,
    hi: f64,
    rule: QuadratureRule,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(lo: f64, hi: f64, n: usize, rule: QuadratureRule) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidGrid(format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {n}")));
        }
        let (nodes, weights) = match rule {
            QuadratureRule::Midpoint => {
                let h = (hi - lo) / n as f64;
                let nodes = (0..n).map(|j| lo + (j as f64 + 0.5) * h).collect();
                (nodes, vec![h; n])
            }
            QuadratureRule::Trapezoid => {
                let h = (hi - lo) / (n - 1) as f64;
                let nodes = (0..n)
                    .map(|j| if j + 1 == n { hi } else { lo + j as f64 * h })
                    .collect();
                let mut weights = vec![h; n];
                weights[0] = 0.5 * h;
                weights[n - 1] = 0.5 * h;
                (nodes, weights)
            }
            QuadratureRule::GaussLegendre => {
                if n % GAUSS_LEGENDRE_ORDER != 0 {
                    return Err(Error::InvalidGrid(format!(
                        "Gauss-Legendre grids need a multiple of {GAUSS_LEGENDRE_ORDER} nodes, got {n}"
                    )));
                }
                let panels = n / GAUSS_LEGENDRE_ORDER;
                composite_gauss_legendre(lo, hi, panels, GAUSS_LEGENDRE_ORDER)
            }
        };
        Ok(Self { lo, hi, rule, nodes, weights })
    }

    pub fn midpoint(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(lo, hi, n, QuadratureRule::Midpoint)
    }

    pub fn trapezoid(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(lo, hi, n, QuadratureRule::Trapezoid)
    }

    pub fn gauss_legendre(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(lo, hi, n, QuadratureRule::GaussLegendre)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn span(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Node spacing for the equally spaced rules.
    pub fn uniform_spacing(&self) -> Option<f64> {
        match self.rule {
            QuadratureRule::Midpoint => Some(self.span() / self.len() as f64),
            QuadratureRule::Trapezoid => Some(self.span() / (self.len() - 1) as f64),
            QuadratureRule::GaussLegendre => None,
        }
    }

    /// Largest gap between consecutive nodes.
    pub fn max_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Same rule and node count on `[lo + offset, hi + offset]`.
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        Self::new(self.lo + offset, self.hi + offset, self.len(), self.rule)
    }

    /// `sum_j w[j] * values[j]`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Serializable description of a grid, as it appears in run configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    #[serde(default)]
    pub rule: QuadratureRule,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { lo: -300.0, hi: 300.0, n: 1024, rule: QuadratureRule::Midpoint }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::new(self.lo, self.hi, self.n, self.rule)
    }
}

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre_rule(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let half = order.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre nodes and weights on `[lo, hi]` with `panels`
/// equal panels.
pub fn composite_gauss_legendre(lo: f64, hi: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre_rule(order);
    let width = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let mid = a + 0.5 * width;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + 0.5 * width * xi);
            weights.push(0.5 * width * wi);
        }
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn check_contract(g: &FrequencyGrid) {
        assert!(g.weights().iter().all(|&w| w > 0.0));
        assert_relative_eq!(g.weights().iter().sum::<f64>(), g.span(), max_relative = 1e-12);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!(g.nodes()[0] >= g.lo() && *g.nodes().last().unwrap() <= g.hi());
    }

    #[test]
    fn all_rules_satisfy_contract() {
        for rule in [QuadratureRule::Midpoint, QuadratureRule::Trapezoid, QuadratureRule::GaussLegendre] {
            for n in [8, 64, 1024] {
                check_contract(&FrequencyGrid::new(-300.0, 300.0, n, rule).unwrap());
            }
        }
        check_contract(&FrequencyGrid::trapezoid(0.0, 1.0, 2).unwrap());
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(FrequencyGrid::midpoint(1.0, 1.0, 10).is_err());
        assert!(FrequencyGrid::midpoint(2.0, 1.0, 10).is_err());
        assert!(FrequencyGrid::midpoint(0.0, f64::INFINITY, 10).is_err());
        assert!(FrequencyGrid::midpoint(0.0, 1.0, 1).is_err());
        assert!(FrequencyGrid::gauss_legendre(0.0, 1.0, 12).is_err());
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre_rule(8);
        // degree 15 is the highest integrated exactly
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert_relative_eq!(integral, 2.0 / 15.0, max_relative = 1e-14);
        let odd: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(15)).sum();
        assert!(odd.abs() < 1e-15);
    }

    #[test]
    fn gaussian_integral() {
        let exact = PI.sqrt();
        for rule in [QuadratureRule::Midpoint, QuadratureRule::Trapezoid, QuadratureRule::GaussLegendre] {
            let g = FrequencyGrid::new(-10.0, 10.0, 128, rule).unwrap();
            let v: Vec<f64> = g.nodes().iter().map(|x| (-x * x).exp()).collect();
            assert_relative_eq!(g.integrate(&v), exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn spacing_queries() {
        let g = FrequencyGrid::midpoint(-300.0, 300.0, 1024).unwrap();
        assert_relative_eq!(g.uniform_spacing().unwrap(), 600.0 / 1024.0);
        assert_relative_eq!(g.max_spacing(), 600.0 / 1024.0, max_relative = 1e-9);
        let t = FrequencyGrid::trapezoid(0.0, 1.0, 11).unwrap();
        assert_relative_eq!(t.uniform_spacing().unwrap(), 0.1);
        assert!(FrequencyGrid::gauss_legendre(0.0, 1.0, 16).unwrap().uniform_spacing().is_none());
    }
}
