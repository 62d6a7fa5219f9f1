//! Special functions behind the test functionals.
//!
//! `g(x, y) = exp(-y^a e^{iax})` integrates in `y` to `h(x) = Γ(1/a + 1) e^{-ix}`
//! on the window `|x| < π/(2a)`. For level `k` the scale is `a_k = 3·2^{k-1}`
//! and the half-width `ε_k = π/(4 a_k)`. The windowed exponential `ξ_k` built
//! from these pieces is the one-dimensional factor of every test functional.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::indexing::TestFunctionalSpec;
use crate::quadrature::{integrate_interval, integrate_semi_infinite, QuadConfig, QuadError, QuadResult};

/// Levels above this are computed on demand instead of cached.
pub const MAX_CACHED_LEVEL: u32 = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integral diverges at x = {x} for a = {a}: cos(ax) <= 0")]
    Divergent { x: f64, a: f64 },
    #[error("quadrature did not reach tolerance: value {value}, estimated error {err_est:e}")]
    Unconverged { value: Complex64, err_est: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Scale constants for one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesParams {
    pub k: u32,
    pub a: f64,
    pub eps: f64,
}

impl JonesParams {
    pub fn new(k: u32) -> Result<Self, KernelError> {
        if k == 0 {
            return Err(KernelError::Domain("level k must be >= 1".into()));
        }
        let a = 3.0 * 2f64.powi(k as i32 - 1);
        Ok(Self { k, a, eps: PI / (4.0 * a) })
    }

    /// Half-width of the window `(-π/(2a), π/(2a))` on which `h` is nonzero.
    pub fn window_half_width(&self) -> f64 {
        2.0 * self.eps
    }
}

/// Γ(x) by the Lanczos approximation (g = 7, nine coefficients), with reflection below 1/2.
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

fn check_scale(a: f64) -> Result<(), KernelError> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(KernelError::Domain(format!("scale a must satisfy a > 1, got {a}")));
    }
    Ok(())
}

/// `g(x, y) = exp(-y^a e^{iax})`.
pub fn eval_g(x: f64, y: f64, a: f64) -> Result<Complex64, KernelError> {
    check_scale(a)?;
    if !(y >= 0.0) {
        return Err(KernelError::Domain(format!("y must be >= 0, got {y}")));
    }
    Ok(g_unchecked(x, y, a))
}

#[inline]
fn g_unchecked(x: f64, y: f64, a: f64) -> Complex64 {
    let ya = y.powf(a);
    let (s, c) = (a * x).sin_cos();
    let log_modulus = -ya * c;
    // exp(-745) underflows; skip the phase, which would be inf·0 there.
    if log_modulus < -745.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(log_modulus.exp(), -ya * s)
}

/// Closed form `h(x) = Γ(1/a + 1) e^{-ix}` on the open window, 0 elsewhere.
pub fn eval_h_closed(x: f64, a: f64) -> Result<Complex64, KernelError> {
    check_scale(a)?;
    Ok(h_closed_unchecked(x, a))
}

#[inline]
fn h_closed_unchecked(x: f64, a: f64) -> Complex64 {
    if x.abs() < PI / (2.0 * a) {
        Complex64::from_polar(gamma(1.0 / a + 1.0), -x)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// `h(x) = ∫_0^∞ g(x, y) dy` by quadrature on the half line.
///
/// Breakpoints in `y` are placed at quarter periods of the phase `y^a sin(ax)`
/// up to where the envelope `exp(-y^a cos(ax))` is negligible.
pub fn eval_h_quad(x: f64, a: f64, tol: f64) -> Result<QuadResult, KernelError> {
    check_scale(a)?;
    if !(tol > 0.0) {
        return Err(KernelError::Domain(format!("tol must be > 0, got {tol}")));
    }
    let (s, c) = (a * x).sin_cos();
    if !(c > 0.0) || x.abs() >= PI / (2.0 * a) {
        return Err(KernelError::Divergent { x, a });
    }
    // Envelope below e^-40 past y_max.
    let y_max = (40.0 / c).powf(1.0 / a);
    let mut breaks = vec![1.0, y_max];
    let phase_max = y_max.powf(a) * s.abs();
    let quarter = PI / 2.0;
    let count = ((phase_max / quarter) as usize).min(4000);
    for j in 1..=count {
        breaks.push((j as f64 * quarter / s.abs()).powf(1.0 / a));
    }
    let cfg = QuadConfig { abs_tol: tol * 0.1, max_panels_per_axis: 1 << 16, ..QuadConfig::default() }
        .with_breakpoints(breaks);
    let r = integrate_semi_infinite(|y| g_unchecked(x, y, a), &cfg)?;
    if !r.converged || r.err_est > tol {
        return Err(KernelError::Unconverged { value: r.value, err_est: r.err_est });
    }
    Ok(r)
}

/// Normalized bump `c_k exp(ε_k²/(u² - ε_k²))` on `|u| < ε_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierSpec {
    pub k: u32,
    pub eps: f64,
    pub c_k: f64,
}

/// `∫_{-1}^{1} exp(1/(s² - 1)) ds`, integrated once to 1e-12 relative.
fn unit_bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let cfg = QuadConfig::default().with_tol(1e-14).with_breakpoints(vec![0.0]);
        let r = integrate_interval(|s| Complex64::new(unit_bump(s), 0.0), -1.0, 1.0, &cfg)
            .expect("unit bump quadrature");
        r.value.re
    })
}

#[inline]
fn unit_bump(s: f64) -> f64 {
    let d = s * s - 1.0;
    if d >= 0.0 {
        0.0
    } else {
        (1.0 / d).exp()
    }
}

impl MollifierSpec {
    pub fn new(k: u32) -> Result<Self, KernelError> {
        let p = JonesParams::new(k)?;
        Ok(Self { k, eps: p.eps, c_k: 1.0 / (p.eps * unit_bump_mass()) })
    }

    /// Cached spec for `k <= MAX_CACHED_LEVEL`.
    pub fn cached(k: u32) -> Result<Self, KernelError> {
        static CACHE: OnceLock<Vec<MollifierSpec>> = OnceLock::new();
        if k == 0 || k > MAX_CACHED_LEVEL {
            return Self::new(k);
        }
        let cache = CACHE.get_or_init(|| (1..=MAX_CACHED_LEVEL).map(|k| Self::new(k).expect("valid level")).collect());
        Ok(cache[k as usize - 1])
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        if u.abs() >= self.eps {
            0.0
        } else {
            self.c_k * unit_bump(u / self.eps)
        }
    }
}

/// `f_k(u)`; zero outside `(-ε_k, ε_k)`.
pub fn mollifier_eval(k: u32, u: f64) -> Result<f64, KernelError> {
    Ok(MollifierSpec::cached(k)?.eval(u))
}

/// `α_k = ∫ e^{iz} f_k(z) dz` over the mollifier support.
pub fn alpha(k: u32, tol: f64) -> Result<Complex64, KernelError> {
    let m = MollifierSpec::cached(k)?;
    let cfg = QuadConfig::default().with_tol(tol).with_breakpoints(vec![0.0]);
    let r = integrate_interval(|z| Complex64::from_polar(m.eval(z), z), -m.eps, m.eps, &cfg)?;
    if !r.converged {
        return Err(KernelError::Unconverged { value: r.value, err_est: r.err_est });
    }
    Ok(r.value)
}

fn alpha_cached(k: u32) -> Result<Complex64, KernelError> {
    static CACHE: OnceLock<Vec<Complex64>> = OnceLock::new();
    if k == 0 || k > MAX_CACHED_LEVEL {
        return alpha(k, 1e-15);
    }
    let cache = CACHE.get_or_init(|| (1..=MAX_CACHED_LEVEL).map(|k| alpha(k, 1e-15).expect("alpha quadrature")).collect());
    Ok(cache[k as usize - 1])
}

/// Windowed exponential `(1/n) e^{iu}` for `|u| <= ε_k`, else 0.
#[inline]
pub fn xi_closed(u: f64, k: u32, n: usize) -> Complex64 {
    let eps = PI / (12.0 * 2f64.powi(k as i32 - 1));
    if u.abs() <= eps {
        Complex64::from_polar(1.0 / n as f64, u)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Smooth counterpart of [`xi_closed`]:
/// `conj((f_k * h_k)(u)) / (n h_k(0) conj(α_k))`.
///
/// Coincides with the closed form on `|u| <= ε_k` and vanishes for `|u| >= 3ε_k`.
pub fn xi_mollified(u: f64, k: u32, n: usize, tol: f64) -> Result<Complex64, KernelError> {
    if n == 0 {
        return Err(KernelError::Domain("dimension n must be >= 1".into()));
    }
    let p = JonesParams::new(k)?;
    let m = MollifierSpec::cached(k)?;
    let eps = p.eps;
    if u.abs() >= 3.0 * eps {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let lo = (-eps).max(u - 2.0 * eps);
    let hi = eps.min(u + 2.0 * eps);
    if hi <= lo {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let breaks = if lo < 0.0 && hi > 0.0 { vec![0.0] } else { Vec::new() };
    let cfg = QuadConfig::default().with_tol(tol * 0.1).with_breakpoints(breaks);
    let r = integrate_interval(|z| h_closed_unchecked(u - z, p.a) * m.eval(z), lo, hi, &cfg)?;
    if !r.converged || r.err_est > tol {
        return Err(KernelError::Unconverged { value: r.value, err_est: r.err_est });
    }
    let h0 = gamma(1.0 / p.a + 1.0);
    Ok(r.value.conj() / (n as f64 * h0 * alpha_cached(k)?.conj()))
}

/// Vector test function `E(x)` of a spec: component `j` is `ξ_k(x_j - c_j)`.
pub fn eval_e(spec: &TestFunctionalSpec, x: &[f64]) -> Result<Vec<Complex64>, KernelError> {
    let n = spec.dim();
    if x.len() != n {
        return Err(KernelError::DimensionMismatch { expected: n, got: x.len() });
    }
    let inside = x.iter().zip(&spec.center_f64).all(|(xj, cj)| (xj - cj).abs() <= spec.eps);
    if !inside {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    Ok(x.iter()
        .zip(&spec.center_f64)
        .map(|(xj, cj)| Complex64::from_polar(1.0 / n as f64, xj - cj))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const GAMMA_3_2: f64 = 0.886_226_925_452_758_0;
    const GAMMA_4_3: f64 = 0.892_979_511_569_249_2;
    const GAMMA_7_6: f64 = 0.927_719_333_630_039_2;

    #[test]
    fn params_for_first_levels() {
        let p = JonesParams::new(1).unwrap();
        assert_eq!(p.a, 3.0);
        assert_abs_diff_eq!(p.eps, PI / 12.0, epsilon = 1e-16);
        assert_abs_diff_eq!(p.window_half_width(), PI / 6.0, epsilon = 1e-16);
        assert_eq!(JonesParams::new(4).unwrap().a, 24.0);
        assert!(JonesParams::new(0).is_err());
    }

    #[test]
    fn gamma_reference_values() {
        assert_abs_diff_eq!(gamma(1.5), GAMMA_3_2, epsilon = 1e-14);
        assert_abs_diff_eq!(gamma(4.0 / 3.0), GAMMA_4_3, epsilon = 1e-14);
        assert_abs_diff_eq!(gamma(7.0 / 6.0), GAMMA_7_6, epsilon = 1e-14);
        assert_abs_diff_eq!(gamma(5.0), 24.0, epsilon = 1e-11);
        assert_abs_diff_eq!(gamma(0.5), PI.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn g_examples() {
        let v = eval_g(0.0, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(v.re, (-1f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        assert_eq!(eval_g(1.234, 0.0, 2.0).unwrap(), Complex64::new(1.0, 0.0));

        // Separate real/imaginary expansion of exp(-(cos θ + i sin θ)) at θ = π/4.
        let v = eval_g(PI / 8.0, 1.0, 2.0).unwrap();
        let r = (-(PI / 4.0).cos()).exp();
        let phase = (PI / 4.0).sin();
        assert_abs_diff_eq!(v.re, r * phase.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, -r * phase.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(v.norm(), r, epsilon = 1e-15);

        assert!(eval_g(0.0, 1.0, 1.0).is_err());
        assert!(eval_g(0.0, -1.0, 2.0).is_err());
    }

    #[test]
    fn h_closed_examples() {
        assert_abs_diff_eq!(eval_h_closed(0.0, 2.0).unwrap().re, GAMMA_3_2, epsilon = 1e-14);
        assert_eq!(eval_h_closed(PI, 2.0).unwrap(), Complex64::new(0.0, 0.0));
        let v = eval_h_closed(PI / 8.0, 2.0).unwrap();
        assert_abs_diff_eq!(v.re, GAMMA_3_2 * (PI / 8.0).cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, -GAMMA_3_2 * (PI / 8.0).sin(), epsilon = 1e-14);
    }

    #[test]
    fn h_quad_matches_gamma_oracle() {
        let v = eval_h_quad(0.0, 2.0, 1e-10).unwrap().value;
        assert_abs_diff_eq!(v.re, PI.sqrt() / 2.0, epsilon = 1e-10);
        let v = eval_h_quad(0.0, 3.0, 1e-10).unwrap().value;
        assert_abs_diff_eq!(v.re, GAMMA_4_3, epsilon = 1e-10);
        let v = eval_h_quad(0.0, 6.0, 1e-10).unwrap().value;
        assert_abs_diff_eq!(v.re, GAMMA_7_6, epsilon = 1e-10);
        let q = eval_h_quad(PI / 8.0, 2.0, 1e-8).unwrap().value;
        let c = eval_h_closed(PI / 8.0, 2.0).unwrap();
        assert!((q - c).norm() <= 1e-8);
    }

    #[test]
    fn h_quad_rejects_window_boundary() {
        assert!(matches!(eval_h_quad(PI / 4.0, 2.0, 1e-8), Err(KernelError::Divergent { .. })));
        assert!(matches!(eval_h_quad(1.0, 2.0, 1e-8), Err(KernelError::Divergent { .. })));
    }

    #[test]
    fn mollifier_examples() {
        let m = MollifierSpec::cached(1).unwrap();
        assert_eq!(mollifier_eval(1, m.eps).unwrap(), 0.0);
        assert_abs_diff_eq!(mollifier_eval(1, 0.0).unwrap(), m.c_k * (-1f64).exp(), epsilon = 1e-14);
        for k in 1..=10 {
            let m = MollifierSpec::cached(k).unwrap();
            let cfg = QuadConfig::default().with_tol(1e-13).with_breakpoints(vec![0.0]);
            let r = integrate_interval(|u| Complex64::new(m.eval(u), 0.0), -m.eps, m.eps, &cfg).unwrap();
            assert_abs_diff_eq!(r.value.re, 1.0, epsilon = 1e-12);
            assert!(m.c_k > 0.0);
        }
    }

    #[test]
    fn alpha_is_real_bracketed_and_increasing() {
        let mut prev = 0.0;
        for k in 1..=12 {
            let a = alpha(k, 1e-14).unwrap();
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-14);
            let eps = JonesParams::new(k).unwrap().eps;
            assert!(a.re > eps.cos() && a.re < 1.0, "k={k} alpha={}", a.re);
            assert!(a.re > prev);
            prev = a.re;
        }
        // mpmath reference values.
        assert_abs_diff_eq!(alpha(1, 1e-14).unwrap().re, 0.994_591_891_074_398_3, epsilon = 1e-13);
        assert_abs_diff_eq!(alpha(12, 1e-14).unwrap().re, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn xi_closed_examples() {
        assert_eq!(xi_closed(0.0, 1, 3), Complex64::new(1.0 / 3.0, 0.0));
        let eps1 = PI / 12.0;
        assert_eq!(xi_closed(2.0 * eps1, 1, 1), Complex64::new(0.0, 0.0));
        for u in [-eps1, -0.1, 0.05, eps1 * 0.999] {
            assert_abs_diff_eq!(xi_closed(u, 1, 4).norm(), 0.25, epsilon = 1e-16);
        }
    }

    #[test]
    fn xi_mollified_examples() {
        let v = xi_mollified(0.0, 1, 1, 1e-8).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() <= 1e-8);
        let eps1 = PI / 12.0;
        assert_eq!(xi_mollified(3.0 * eps1, 1, 1, 1e-8).unwrap(), Complex64::new(0.0, 0.0));
        let eps2 = PI / 24.0;
        let u = eps2 / 2.0;
        let v = xi_mollified(u, 2, 2, 1e-8).unwrap();
        assert!((v - xi_closed(u, 2, 2)).norm() <= 1e-8);
        // Transition region is nonzero and bounded by the inner modulus.
        let v = xi_mollified(2.0 * eps1, 1, 1, 1e-8).unwrap();
        assert!(v.norm() > 0.0 && v.norm() < 1.0);
    }
}
