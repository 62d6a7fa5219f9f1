//! Deterministic panel-based Gauss–Legendre integration.
//!
//! Integrands in this crate are piecewise smooth with jumps at analytically
//! known locations (the faces of test-functional supports), so every routine
//! accepts explicit breakpoints and never lets a panel straddle one. Panel
//! contributions are reduced with a fixed-order pairwise tree so identical
//! inputs give bit-identical results.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("invalid integration bounds [{0}, {1}]")]
    InvalidBounds(f64, f64),
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error("tensor cubature supports at most 4 dimensions, got {0}")]
    DimensionTooLarge(usize),
}

/// Knobs shared by every integration routine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    /// Gauss–Legendre nodes per panel.
    pub points_per_panel: usize,
    /// Panel budget per axis (per integral in 1D).
    pub max_panels_per_axis: usize,
    pub abs_tol: f64,
    /// Axis coordinates where integrands may jump. Applied to every axis of a cube.
    pub breakpoints: Vec<f64>,
    /// Upper bound on the width of an initial panel; a quarter period of `e^{iu}` by default.
    pub max_panel_width: f64,
    /// Evaluation budget for a single tensor cubature refinement level.
    pub max_cube_evals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            points_per_panel: 16,
            max_panels_per_axis: 4096,
            abs_tol: 1e-10,
            breakpoints: Vec::new(),
            max_panel_width: PI / 2.0,
            max_cube_evals: 1 << 23,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_points(mut self, points_per_panel: usize) -> Self {
        self.points_per_panel = points_per_panel;
        self
    }

    /// Replaces the breakpoint list, sorting and deduplicating it.
    pub fn with_breakpoints(mut self, mut breakpoints: Vec<f64>) -> Self {
        breakpoints.retain(|b| b.is_finite());
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        self.breakpoints = breakpoints;
        self
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        if self.points_per_panel < 2 {
            return Err(QuadError::InvalidConfig(format!(
                "points_per_panel must be >= 2, got {}",
                self.points_per_panel
            )));
        }
        if self.max_panels_per_axis == 0 || self.max_cube_evals == 0 {
            return Err(QuadError::InvalidConfig("panel and evaluation budgets must be positive".into()));
        }
        if !(self.abs_tol > 0.0) {
            return Err(QuadError::InvalidConfig(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if !(self.max_panel_width > 0.0) {
            return Err(QuadError::InvalidConfig("max_panel_width must be > 0".into()));
        }
        if self.breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(QuadError::InvalidConfig("breakpoints must be sorted and distinct".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: Complex64,
    /// Difference between successive refinement levels, summed over panels.
    pub err_est: f64,
    pub panels_used: usize,
    pub converged: bool,
}

/// Result of integrating a vector-valued integrand in one pass.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadResultVec {
    pub values: Vec<Complex64>,
    pub err_est: f64,
    pub panels_used: usize,
    pub converged: bool,
}

impl QuadResultVec {
    pub fn component(&self, j: usize) -> QuadResult {
        QuadResult {
            value: self.values[j],
            err_est: self.err_est,
            panels_used: self.panels_used,
            converged: self.converged,
        }
    }

    fn zero(dim: usize) -> Self {
        Self { values: vec![Complex64::new(0.0, 0.0); dim], err_est: 0.0, panels_used: 0, converged: true }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the Legendre recurrence, started from the Tricomi estimate.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Cached rule for `n` nodes.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static RULES: OnceLock<RwLock<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let rules = RULES.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(rule) = rules.read().expect("rule cache poisoned").get(&n) {
            return rule.clone();
        }
        let mut guard = rules.write().expect("rule cache poisoned");
        guard.entry(n).or_insert_with(|| Arc::new(GaussLegendre::new(n))).clone()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Pairwise (cascade) summation in index order.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        len if len <= 8 => values.iter().fold(Complex64::new(0.0, 0.0), |acc, v| acc + v),
        len => {
            let mid = len / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Real-valued variant of [`pairwise_sum`].
pub fn pairwise_sum_real(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len if len <= 8 => values.iter().sum(),
        len => {
            let mid = len / 2;
            pairwise_sum_real(&values[..mid]) + pairwise_sum_real(&values[mid..])
        }
    }
}

/// Initial panel edges on `[a, b]`: the bounds, interior breakpoints, then uniform
/// subdivision of anything wider than `max_width`.
pub(crate) fn initial_edges(a: f64, b: f64, breakpoints: &[f64], max_width: f64) -> Vec<f64> {
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    let mut edges = Vec::with_capacity(cuts.len());
    edges.push(a);
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        let pieces = (((r - l) / max_width).ceil() as usize).max(1);
        for j in 1..pieces {
            edges.push(l + (r - l) * j as f64 / pieces as f64);
        }
        edges.push(r);
    }
    edges
}

fn panel_rule<F>(f: &F, rule: &GaussLegendre, l: f64, r: f64, out: &mut [Complex64], scratch: &mut [Complex64])
where
    F: Fn(f64, &mut [Complex64]) + ?Sized,
{
    let half = 0.5 * (r - l);
    let mid = 0.5 * (r + l);
    out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        f(mid + half * x, scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o += s * (w * half);
        }
    }
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Adaptive bisection of `[a, b]` for a vector-valued integrand with `dim` outputs.
///
/// Each initial panel is compared against the sum of its halves; a panel is
/// accepted once the difference is below its share of `abs_tol`.
pub fn integrate_interval_vec<F>(f: F, dim: usize, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResultVec, QuadError>
where
    F: Fn(f64, &mut [Complex64]),
{
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadError::InvalidBounds(a, b));
    }
    if a == b {
        return Ok(QuadResultVec::zero(dim));
    }
    let rule = GaussLegendre::cached(cfg.points_per_panel);
    let edges = initial_edges(a, b, &cfg.breakpoints, cfg.max_panel_width);
    let total = b - a;
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];

    // Depth-first, left before right, so accepted panels come out in axis order.
    let mut stack: Vec<(f64, f64, Vec<Complex64>)> = Vec::new();
    for w in edges.windows(2).rev() {
        let mut est = vec![Complex64::new(0.0, 0.0); dim];
        panel_rule(&f, &rule, w[0], w[1], &mut est, &mut scratch);
        stack.push((w[0], w[1], est));
    }
    let mut live = stack.len();
    let mut accepted: Vec<Vec<Complex64>> = Vec::new();
    let mut err_est = 0.0;
    let mut converged = true;
    let mut left = vec![Complex64::new(0.0, 0.0); dim];
    let mut right = vec![Complex64::new(0.0, 0.0); dim];

    while let Some((l, r, est)) = stack.pop() {
        let m = 0.5 * (l + r);
        panel_rule(&f, &rule, l, m, &mut left, &mut scratch);
        panel_rule(&f, &rule, m, r, &mut right, &mut scratch);
        let refined: Vec<Complex64> = left.iter().zip(&right).map(|(x, y)| x + y).collect();
        let diff = max_abs_diff(&refined, &est);
        let local_tol = cfg.abs_tol * (r - l) / total;
        let too_narrow = (r - l) <= 1e-13 * total.max(1.0);
        if diff <= local_tol || diff == 0.0 {
            err_est += diff;
            accepted.push(refined);
            live -= 1;
        } else if live + 1 > cfg.max_panels_per_axis || too_narrow {
            converged = false;
            err_est += diff;
            accepted.push(refined);
            live -= 1;
        } else {
            live += 1;
            stack.push((m, r, right.clone()));
            stack.push((l, m, left.clone()));
        }
    }

    let panels_used = accepted.len();
    let values = (0..dim)
        .map(|j| {
            let column: Vec<Complex64> = accepted.iter().map(|v| v[j]).collect();
            pairwise_sum(&column)
        })
        .collect();
    Ok(QuadResultVec { values, err_est, panels_used, converged })
}

/// Adaptive integration of a scalar complex integrand over `[a, b]`.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> Complex64,
{
    integrate_interval_vec(|x, out: &mut [Complex64]| out[0] = f(x), 1, a, b, cfg).map(|r| r.component(0))
}

/// Axis-aligned box given by lower and upper corners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Cube {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Self { lo, hi }
    }

    pub fn centered(center: &[f64], half_widths: &[f64]) -> Self {
        let lo = center.iter().zip(half_widths).map(|(c, h)| c - h).collect();
        let hi = center.iter().zip(half_widths).map(|(c, h)| c + h).collect();
        Self { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l).max(0.0)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| h <= l)
    }

    pub fn intersect(&self, other: &Cube) -> Cube {
        let lo = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        Cube { lo, hi }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v >= *l && *v <= *h)
    }
}

/// Tensor-product Gauss–Legendre over a box for a vector-valued integrand.
///
/// Every initial axis panel is split into `2^level` equal pieces; levels are
/// increased until two successive levels agree to `abs_tol` (max over outputs).
pub fn integrate_cube_vec<F>(f: F, dim: usize, cube: &Cube, cfg: &QuadConfig) -> Result<QuadResultVec, QuadError>
where
    F: Fn(&[f64], &mut [Complex64]),
{
    cfg.validate()?;
    let n = cube.dim();
    if n == 0 {
        return Err(QuadError::InvalidConfig("cube of dimension 0".into()));
    }
    if n > 4 {
        return Err(QuadError::DimensionTooLarge(n));
    }
    for (l, h) in cube.lo.iter().zip(&cube.hi) {
        if !(l.is_finite() && h.is_finite()) || l > h {
            return Err(QuadError::InvalidBounds(*l, *h));
        }
    }
    if cube.is_empty() {
        return Ok(QuadResultVec::zero(dim));
    }
    let rule = GaussLegendre::cached(cfg.points_per_panel);
    let base: Vec<Vec<f64>> = (0..n)
        .map(|j| initial_edges(cube.lo[j], cube.hi[j], &cfg.breakpoints, cfg.max_panel_width))
        .collect();

    let mut previous = tensor_level(&f, dim, &rule, &base, 0);
    let mut err_est = f64::INFINITY;
    let mut level = 1;
    let mut converged = false;
    let mut panels_used = base.iter().map(|e| e.len() - 1).product::<usize>();
    loop {
        let per_axis: Vec<usize> = base.iter().map(|e| (e.len() - 1) << level).collect();
        let evals = per_axis.iter().product::<usize>().saturating_mul(cfg.points_per_panel.pow(n as u32));
        if per_axis.iter().any(|&p| p > cfg.max_panels_per_axis) || evals > cfg.max_cube_evals {
            break;
        }
        let current = tensor_level(&f, dim, &rule, &base, level);
        err_est = max_abs_diff(&current, &previous);
        panels_used = per_axis.iter().product();
        previous = current;
        if err_est <= cfg.abs_tol {
            converged = true;
            break;
        }
        level += 1;
    }
    Ok(QuadResultVec { values: previous, err_est, panels_used, converged })
}

/// Scalar wrapper around [`integrate_cube_vec`].
pub fn integrate_cube<F>(f: F, cube: &Cube, cfg: &QuadConfig) -> Result<QuadResult, QuadError>
where
    F: Fn(&[f64]) -> Complex64,
{
    integrate_cube_vec(|x: &[f64], out: &mut [Complex64]| out[0] = f(x), 1, cube, cfg).map(|r| r.component(0))
}

fn tensor_level<F>(f: &F, dim: usize, rule: &GaussLegendre, base: &[Vec<f64>], level: usize) -> Vec<Complex64>
where
    F: Fn(&[f64], &mut [Complex64]),
{
    let n = base.len();
    let q = rule.nodes.len();
    // Per-axis node coordinates and weights, grouped by panel.
    let axes: Vec<(Vec<f64>, Vec<f64>)> = base
        .iter()
        .map(|edges| {
            let mut xs = Vec::new();
            let mut ws = Vec::new();
            for w in edges.windows(2) {
                let pieces = 1usize << level;
                for p in 0..pieces {
                    let l = w[0] + (w[1] - w[0]) * p as f64 / pieces as f64;
                    let r = w[0] + (w[1] - w[0]) * (p + 1) as f64 / pieces as f64;
                    let half = 0.5 * (r - l);
                    let mid = 0.5 * (r + l);
                    for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                        xs.push(mid + half * x);
                        ws.push(wt * half);
                    }
                }
            }
            (xs, ws)
        })
        .collect();
    let panels: Vec<usize> = axes.iter().map(|(xs, _)| xs.len() / q).collect();
    let n_panels: usize = panels.iter().product();

    let mut contributions: Vec<Vec<Complex64>> = Vec::with_capacity(n_panels);
    let mut panel_idx = vec![0usize; n];
    let mut node_idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..n_panels {
        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        node_idx.iter_mut().for_each(|v| *v = 0);
        loop {
            let mut weight = 1.0;
            for j in 0..n {
                let idx = panel_idx[j] * q + node_idx[j];
                x[j] = axes[j].0[idx];
                weight *= axes[j].1[idx];
            }
            f(&x, &mut out);
            for (a, o) in acc.iter_mut().zip(&out) {
                *a += o * weight;
            }
            if !odometer(&mut node_idx, q) {
                break;
            }
        }
        contributions.push(acc);
        odometer_mixed(&mut panel_idx, &panels);
    }
    (0..dim)
        .map(|j| {
            let column: Vec<Complex64> = contributions.iter().map(|c| c[j]).collect();
            pairwise_sum(&column)
        })
        .collect()
}

/// Advances a uniform-radix counter; returns false on wrap-around.
fn odometer(idx: &mut [usize], radix: usize) -> bool {
    for v in idx.iter_mut().rev() {
        *v += 1;
        if *v < radix {
            return true;
        }
        *v = 0;
    }
    false
}

fn odometer_mixed(idx: &mut [usize], radices: &[usize]) -> bool {
    for (v, r) in idx.iter_mut().zip(radices).rev() {
        *v += 1;
        if *v < *r {
            return true;
        }
        *v = 0;
    }
    false
}

/// Integrates over `[0, ∞)` through the map `y = t/(1-t)`.
///
/// `cfg.breakpoints` are interpreted as y-coordinates and mapped onto `(0, 1)`;
/// `max_panel_width` does not apply in the mapped variable.
pub fn integrate_semi_infinite<F>(f: F, cfg: &QuadConfig) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> Complex64,
{
    let mapped_breaks: Vec<f64> = cfg
        .breakpoints
        .iter()
        .filter(|&&y| y > 0.0)
        .map(|&y| y / (1.0 + y))
        .collect();
    let mapped = QuadConfig { max_panel_width: 1.0, ..cfg.clone() }.with_breakpoints(mapped_breaks);
    integrate_interval(
        |t| {
            let s = 1.0 - t;
            let y = t / s;
            let v = f(y);
            if v == Complex64::new(0.0, 0.0) {
                v
            } else {
                v / (s * s)
            }
        },
        0.0,
        1.0,
        &mapped,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn gauss_legendre_low_orders() {
        let r = GaussLegendre::new(2);
        assert_abs_diff_eq!(r.nodes[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights[0], 1.0, epsilon = 1e-15);
        let r = GaussLegendre::new(3);
        assert_abs_diff_eq!(r.nodes[2], (0.6f64).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights[1], 8.0 / 9.0, epsilon = 1e-15);
        let r = GaussLegendre::new(16);
        assert_abs_diff_eq!(r.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        // Exact for x^30.
        let m: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(30)).sum();
        assert_abs_diff_eq!(m, 2.0 / 31.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_on_interval() {
        let r = integrate_interval(|_| c(1.0), 0.0, 2.0, &QuadConfig::default()).unwrap();
        assert_abs_diff_eq!(r.value.re, 2.0, epsilon = 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn complex_exponential_antiderivative() {
        let eps = 0.3;
        let r = integrate_interval(|x| Complex64::new(0.0, x).exp(), -eps, eps, &QuadConfig::default()).unwrap();
        assert_abs_diff_eq!(r.value.re, 2.0 * eps.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(r.value.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn step_split_at_breakpoint_is_exact() {
        let cfg = QuadConfig::default().with_breakpoints(vec![0.0]);
        // Exact up to the rounding of the Gauss weights; no panel straddles the jump.
        for points in [2, 5, 16, 31] {
            let r = integrate_interval(|x| c(if x > 0.0 { 1.0 } else { 0.0 }), -1.0, 1.0, &cfg.clone().with_points(points)).unwrap();
            assert!((r.value.re - 1.0).abs() <= 4.0 * f64::EPSILON, "{points}: {}", r.value.re);
            assert_eq!(r.panels_used, 2);
        }
    }

    #[test]
    fn oscillation_resolution() {
        for omega in [1.0, 7.0, 32.0, 64.0] {
            let r = integrate_interval(|x| Complex64::new(0.0, omega * x).exp(), 0.0, 2.0 * PI, &QuadConfig::default())
                .unwrap();
            // Exact value is zero for integer omega; measure against the L1 mass 2π.
            assert!(r.value.norm() / (2.0 * PI) <= 1e-10, "omega {omega}: {}", r.value);
        }
        let omega: f64 = 63.5;
        let exact = (Complex64::new(0.0, omega * 2.0 * PI).exp() - 1.0) / Complex64::new(0.0, omega);
        let r = integrate_interval(|x| Complex64::new(0.0, omega * x).exp(), 0.0, 2.0 * PI, &QuadConfig::default()).unwrap();
        assert!((r.value - exact).norm() / exact.norm() <= 1e-10);
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(matches!(
            integrate_interval(|_| c(1.0), 1.0, 0.0, &QuadConfig::default()),
            Err(QuadError::InvalidBounds(..))
        ));
        let bad = QuadConfig { points_per_panel: 1, ..QuadConfig::default() };
        assert!(matches!(integrate_interval(|_| c(1.0), 0.0, 1.0, &bad), Err(QuadError::InvalidConfig(_))));
    }

    #[test]
    fn panel_cap_flags_unconverged() {
        let cfg = QuadConfig { max_panels_per_axis: 2, ..QuadConfig::default() };
        let r = integrate_interval(|x| Complex64::new(0.0, 400.0 * x * x).exp(), 0.0, 10.0, &cfg).unwrap();
        assert!(!r.converged);
        assert!(r.err_est > 0.0);
    }

    #[test]
    fn cube_volume_and_separability() {
        let eps = 0.2;
        let cube = Cube::centered(&[0.0; 3], &[eps; 3]);
        let r = integrate_cube(|_| c(1.0), &cube, &QuadConfig::default()).unwrap();
        assert_abs_diff_eq!(r.value.re, (2.0 * eps).powi(3), epsilon = 1e-14);

        let bump = |t: f64| (-t * t * 4.0).exp() * (1.0 + t);
        let cube = Cube::new(vec![-1.0, 0.0], vec![0.5, 2.0]);
        let r = integrate_cube(|x| c(bump(x[0]) * bump(x[1])), &cube, &QuadConfig::default()).unwrap();
        let ax = integrate_interval(|t| c(bump(t)), -1.0, 0.5, &QuadConfig::default()).unwrap();
        let ay = integrate_interval(|t| c(bump(t)), 0.0, 2.0, &QuadConfig::default()).unwrap();
        assert_abs_diff_eq!(r.value.re, ax.value.re * ay.value.re, epsilon = 1e-12);
    }

    #[test]
    fn cube_exponential_in_one_dimension() {
        let eps = std::f64::consts::PI / 12.0;
        let cube = Cube::centered(&[0.5], &[eps]);
        let r = integrate_cube(|x| Complex64::new(0.0, x[0] - 0.5).exp(), &cube, &QuadConfig::default()).unwrap();
        assert_abs_diff_eq!(r.value.re, 2.0 * eps.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(r.value.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn cube_dimension_cap() {
        let cube = Cube::centered(&[0.0; 5], &[1.0; 5]);
        assert_eq!(
            integrate_cube(|_| c(1.0), &cube, &QuadConfig::default()).unwrap_err(),
            QuadError::DimensionTooLarge(5)
        );
    }

    #[test]
    fn semi_infinite_known_integrals() {
        let cfg = QuadConfig::default();
        let r = integrate_semi_infinite(|y| c((-y).exp()), &cfg).unwrap();
        assert_abs_diff_eq!(r.value.re, 1.0, epsilon = 1e-10);
        let r = integrate_semi_infinite(|y| c((-y * y).exp()), &cfg).unwrap();
        assert_abs_diff_eq!(r.value.re, PI.sqrt() / 2.0, epsilon = 1e-10);
        let r = integrate_semi_infinite(|y| c((-y.powi(3)).exp()), &cfg).unwrap();
        assert_abs_diff_eq!(r.value.re, 0.892_979_511_569_249_2, epsilon = 1e-10);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_inputs() {
        let v: Vec<Complex64> = (0..100).map(|i| c(i as f64)).collect();
        assert_eq!(pairwise_sum(&v).re, 4950.0);
        assert_eq!(pairwise_sum_real(&[1.0, 2.0, 3.0]), 6.0);
    }
}
