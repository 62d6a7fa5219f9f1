//! Evaluatable scalar and vector fields on `R^n`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SdError;
use crate::quadrature::Cube;

pub type EvalFn = dyn Fn(&[f64], &mut [Complex64]) + Send + Sync;
/// `(alpha, x, out)`: writes `D^alpha` of every component at `x`.
pub type DerivFn = dyn Fn(&[usize], &[f64], &mut [Complex64]) + Send + Sync;

/// Axis-aligned box outside of which a field vanishes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub center: Vec<f64>,
    pub half_widths: Vec<f64>,
}

impl SupportBox {
    pub fn cube(center: Vec<f64>, half_width: f64) -> Self {
        let n = center.len();
        Self { center, half_widths: vec![half_width; n] }
    }

    pub fn as_cube(&self) -> Cube {
        Cube::centered(&self.center, &self.half_widths)
    }

    /// Euclidean radius of the smallest centered ball containing the box.
    pub fn radius(&self) -> f64 {
        self.half_widths.iter().map(|h| h * h).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.center).zip(&self.half_widths).all(|((x, c), h)| (x - c).abs() <= *h)
    }

    /// Bounding box of two supports.
    pub fn hull(&self, other: &SupportBox) -> SupportBox {
        let a = self.as_cube();
        let b = other.as_cube();
        let lo: Vec<f64> = a.lo.iter().zip(&b.lo).map(|(x, y)| x.min(*y)).collect();
        let hi: Vec<f64> = a.hi.iter().zip(&b.hi).map(|(x, y)| x.max(*y)).collect();
        from_corners(&lo, &hi)
    }

    pub fn intersect(&self, other: &SupportBox) -> Option<SupportBox> {
        let c = self.as_cube().intersect(&other.as_cube());
        if c.is_empty() {
            None
        } else {
            Some(from_corners(&c.lo, &c.hi))
        }
    }
}

pub(crate) fn from_corners(lo: &[f64], hi: &[f64]) -> SupportBox {
    SupportBox {
        center: lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
        half_widths: lo.iter().zip(hi).map(|(l, h)| 0.5 * (h - l)).collect(),
    }
}

/// Scalar (`components == 1`) or vector (`components == n`) field on `R^n`.
///
/// Evaluators must be pure; they are called concurrently.
#[derive(Clone)]
pub struct FieldSampler {
    n: usize,
    components: usize,
    eval: Arc<EvalFn>,
    derivative: Option<Arc<DerivFn>>,
    support: Option<SupportBox>,
    /// Length scale used for finite-difference steps.
    scale: f64,
    label: String,
}

impl fmt::Debug for FieldSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSampler")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("components", &self.components)
            .field("support", &self.support)
            .field("derivative_provider", &self.derivative.is_some())
            .finish()
    }
}

impl FieldSampler {
    pub fn new<F>(n: usize, components: usize, label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[f64], &mut [Complex64]) + Send + Sync + 'static,
    {
        assert!((1..=4).contains(&n), "dimension must be in 1..=4");
        assert!(components == 1 || components == n, "components must be 1 or n");
        Self {
            n,
            components,
            eval: Arc::new(eval),
            derivative: None,
            support: None,
            scale: 1.0,
            label: label.into(),
        }
    }

    /// Scalar field from a closure returning one value.
    pub fn scalar<F>(n: usize, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(n, 1, label, move |x, out| out[0] = f(x))
    }

    pub fn zero(n: usize, components: usize) -> Self {
        Self::new(n, components, "zero", |_, out| out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0)))
            .with_support(SupportBox::cube(vec![0.0; n], 0.0))
            .with_derivative(|_, _, out| out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0)))
    }

    pub fn with_support(mut self, support: SupportBox) -> Self {
        assert_eq!(support.center.len(), self.n);
        self.support = Some(support);
        self
    }

    pub fn without_support(mut self) -> Self {
        self.support = None;
        self
    }

    pub fn with_derivative<D>(mut self, d: D) -> Self
    where
        D: Fn(&[usize], &[f64], &mut [Complex64]) + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn is_scalar(&self) -> bool {
        self.components == 1
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support(&self) -> Option<&SupportBox> {
        self.support.as_ref()
    }

    /// `None` for unbounded support.
    pub fn support_radius(&self) -> Option<f64> {
        self.support.as_ref().map(SupportBox::radius)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn has_derivative_provider(&self) -> bool {
        self.derivative.is_some()
    }

    #[inline]
    pub fn eval_into(&self, x: &[f64], out: &mut [Complex64]) {
        (self.eval)(x, out)
    }

    pub fn eval(&self, x: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.components];
        self.eval_into(x, &mut out);
        out
    }

    /// Writes `D^alpha` of each component, through the provider when present and
    /// nested central differences otherwise.
    pub fn derivative_into(&self, alpha: &[usize], x: &[f64], out: &mut [Complex64]) {
        debug_assert_eq!(alpha.len(), self.n);
        if alpha.iter().all(|&a| a == 0) {
            return self.eval_into(x, out);
        }
        match &self.derivative {
            Some(d) => d(alpha, x, out),
            None => self.finite_difference(alpha, x, out),
        }
    }

    pub fn derivative(&self, alpha: &[usize], x: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.components];
        self.derivative_into(alpha, x, &mut out);
        out
    }

    /// Step `h = ε^{1/(|α|+2)}·scale`; for first derivatives this is the usual `ε^{1/3}`.
    pub fn finite_difference_step(&self, order: usize) -> f64 {
        f64::EPSILON.powf(1.0 / (order as f64 + 2.0)) * self.scale
    }

    fn finite_difference(&self, alpha: &[usize], x: &[f64], out: &mut [Complex64]) {
        let order: usize = alpha.iter().sum();
        let h = self.finite_difference_step(order);
        let mut alpha = alpha.to_vec();
        let mut xp = x.to_vec();
        fd_recursive(self, &mut alpha, &mut xp, h, out);
    }

    /// `D^alpha` of this field as a new field (provider-backed when available).
    pub fn differentiate(&self, alpha: &[usize]) -> FieldSampler {
        assert_eq!(alpha.len(), self.n);
        let base = self.clone();
        let a0 = alpha.to_vec();
        let mut out = FieldSampler::new(self.n, self.components, format!("D{:?} {}", alpha, self.label), {
            let base = base.clone();
            let a0 = a0.clone();
            move |x, out| base.derivative_into(&a0, x, out)
        })
        .with_scale(self.scale);
        if self.derivative.is_some() {
            let base = base.clone();
            out = out.with_derivative(move |beta, x, o| {
                let sum: Vec<usize> = beta.iter().zip(&a0).map(|(b, a)| a + b).collect();
                base.derivative_into(&sum, x, o)
            });
        }
        if let Some(s) = &self.support {
            out = out.with_support(s.clone());
        }
        out
    }

    /// `c · f`.
    pub fn scaled(&self, c: Complex64) -> FieldSampler {
        let base = self.clone();
        let dbase = self.clone();
        let mut out = FieldSampler::new(self.n, self.components, format!("({c})*{}", self.label), move |x, o| {
            base.eval_into(x, o);
            o.iter_mut().for_each(|v| *v *= c);
        })
        .with_scale(self.scale);
        if self.derivative.is_some() {
            out = out.with_derivative(move |a, x, o| {
                dbase.derivative_into(a, x, o);
                o.iter_mut().for_each(|v| *v *= c);
            });
        }
        if let Some(s) = &self.support {
            out = out.with_support(s.clone());
        }
        out
    }

    /// `f + g`; the support is the hull of both (unbounded if either is).
    pub fn sum(&self, other: &FieldSampler) -> Result<FieldSampler, SdError> {
        if self.n != other.n || self.components != other.components {
            return Err(SdError::DimensionMismatch { expected: self.n, got: other.n });
        }
        let (a, b) = (self.clone(), other.clone());
        let comps = self.components;
        let mut out = FieldSampler::new(self.n, comps, format!("{}+{}", self.label, other.label), move |x, o| {
            let mut tmp = [Complex64::new(0.0, 0.0); 4];
            a.eval_into(x, o);
            b.eval_into(x, &mut tmp[..comps]);
            o.iter_mut().zip(&tmp[..comps]).for_each(|(v, t)| *v += t);
        })
        .with_scale(self.scale.min(other.scale));
        if self.derivative.is_some() && other.derivative.is_some() {
            let (a, b) = (self.clone(), other.clone());
            out = out.with_derivative(move |al, x, o| {
                let mut tmp = [Complex64::new(0.0, 0.0); 4];
                a.derivative_into(al, x, o);
                b.derivative_into(al, x, &mut tmp[..comps]);
                o.iter_mut().zip(&tmp[..comps]).for_each(|(v, t)| *v += t);
            });
        }
        if let (Some(s), Some(t)) = (&self.support, &other.support) {
            out = out.with_support(s.hull(t));
        }
        Ok(out)
    }

    /// Replicates a scalar field into all `n` components.
    pub fn promote_scalar(&self) -> Result<FieldSampler, SdError> {
        if !self.is_scalar() {
            return Err(SdError::AlreadyVector(self.label.clone()));
        }
        if self.n == 1 {
            return Ok(self.clone());
        }
        let base = self.clone();
        let dbase = self.clone();
        let mut out = FieldSampler::new(self.n, self.n, self.label.clone(), move |x, o| {
            let mut v = [Complex64::new(0.0, 0.0)];
            base.eval_into(x, &mut v);
            o.iter_mut().for_each(|c| *c = v[0]);
        })
        .with_scale(self.scale);
        if self.derivative.is_some() {
            out = out.with_derivative(move |a, x, o| {
                let mut v = [Complex64::new(0.0, 0.0)];
                dbase.derivative_into(a, x, &mut v);
                o.iter_mut().for_each(|c| *c = v[0]);
            });
        }
        if let Some(s) = &self.support {
            out = out.with_support(s.clone());
        }
        Ok(out)
    }

    /// `f · 1_{[-r, r]^n}`; derivatives are those of `f` inside the cube.
    pub fn truncated(&self, r: f64) -> FieldSampler {
        let cube = SupportBox::cube(vec![0.0; self.n], r);
        let support = match &self.support {
            Some(s) => s.intersect(&cube).unwrap_or_else(|| SupportBox::cube(vec![0.0; self.n], 0.0)),
            None => cube.clone(),
        };
        let base = self.clone();
        let inner = cube.clone();
        let mut out = FieldSampler::new(self.n, self.components, format!("{}·1[{}]", self.label, r), move |x, o| {
            if inner.contains(x) {
                base.eval_into(x, o)
            } else {
                o.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0))
            }
        })
        .with_scale(self.scale)
        .with_support(support);
        if self.derivative.is_some() {
            let base = self.clone();
            out = out.with_derivative(move |a, x, o| {
                if cube.contains(x) {
                    base.derivative_into(a, x, o)
                } else {
                    o.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0))
                }
            });
        }
        out
    }

    /// `u_λ(x) = λ u(λx)`; `D^α u_λ(x) = λ^{1+|α|} (D^α u)(λx)`.
    pub fn dilated(&self, lambda: f64) -> FieldSampler {
        assert!(lambda > 0.0);
        let base = self.clone();
        let mut out = FieldSampler::new(self.n, self.components, format!("{}_λ={lambda}", self.label), move |x, o| {
            let y: Vec<f64> = x.iter().map(|v| v * lambda).collect();
            base.eval_into(&y, o);
            o.iter_mut().for_each(|v| *v *= lambda);
        })
        .with_scale(self.scale / lambda);
        if self.derivative.is_some() {
            let base = self.clone();
            out = out.with_derivative(move |a, x, o| {
                let y: Vec<f64> = x.iter().map(|v| v * lambda).collect();
                base.derivative_into(a, &y, o);
                let order: usize = a.iter().sum();
                let factor = lambda.powi(1 + order as i32);
                o.iter_mut().for_each(|v| *v *= factor);
            });
        }
        if let Some(s) = &self.support {
            out = out.with_support(SupportBox {
                center: s.center.iter().map(|c| c / lambda).collect(),
                half_widths: s.half_widths.iter().map(|h| h / lambda).collect(),
            });
        }
        out
    }

    /// Sampled sup of the Euclidean norm of the promoted vector over `region`
    /// on a uniform grid with `per_axis` points per axis.
    pub fn sampled_sup(&self, region: &Cube, per_axis: usize) -> f64 {
        let n = self.n;
        let per_axis = per_axis.max(2);
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        let mut v = vec![Complex64::new(0.0, 0.0); self.components];
        let promote = if self.is_scalar() { (n as f64).sqrt() } else { 1.0 };
        let mut sup: f64 = 0.0;
        loop {
            for j in 0..n {
                let t = idx[j] as f64 / (per_axis - 1) as f64;
                x[j] = region.lo[j] + t * (region.hi[j] - region.lo[j]);
            }
            self.eval_into(&x, &mut v);
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() * promote;
            sup = sup.max(norm);
            let mut carry = true;
            for d in idx.iter_mut().rev() {
                if !carry {
                    break;
                }
                *d += 1;
                if *d < per_axis {
                    carry = false;
                } else {
                    *d = 0;
                }
            }
            if carry {
                break;
            }
        }
        sup
    }
}

fn fd_recursive(f: &FieldSampler, alpha: &mut [usize], x: &mut [f64], h: f64, out: &mut [Complex64]) {
    let Some(j) = alpha.iter().position(|&a| a > 0) else {
        return f.eval_into(x, out);
    };
    alpha[j] -= 1;
    let xj = x[j];
    let mut plus = vec![Complex64::new(0.0, 0.0); out.len()];
    x[j] = xj + h;
    fd_recursive(f, alpha, x, h, &mut plus);
    x[j] = xj - h;
    fd_recursive(f, alpha, x, h, out);
    x[j] = xj;
    alpha[j] += 1;
    for (o, p) in out.iter_mut().zip(&plus) {
        *o = (p - *o) / (2.0 * h);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gaussian_1d() -> FieldSampler {
        FieldSampler::scalar(1, "g", |x| Complex64::new((-x[0] * x[0]).exp(), 0.0))
    }

    #[test]
    fn finite_differences_fallback() {
        let g = gaussian_1d();
        let x = [0.3];
        let exact1 = -2.0 * 0.3 * (-0.09f64).exp();
        assert_abs_diff_eq!(g.derivative(&[1], &x)[0].re, exact1, epsilon = 1e-9);
        let exact2 = (4.0 * 0.09 - 2.0) * (-0.09f64).exp();
        assert_abs_diff_eq!(g.derivative(&[2], &x)[0].re, exact2, epsilon = 1e-6);
    }

    #[test]
    fn promotion_replicates_components() {
        let f = FieldSampler::scalar(3, "s", |x| Complex64::new(x[0] + 2.0 * x[1], x[2]));
        let v = f.promote_scalar().unwrap();
        assert_eq!(v.components(), 3);
        let out = v.eval(&[1.0, 1.0, 0.5]);
        assert!(out.iter().all(|c| *c == Complex64::new(3.0, 0.5)));
        assert!(v.promote_scalar().is_err());
        let one = gaussian_1d();
        let same = one.promote_scalar().unwrap();
        assert_eq!(same.eval(&[0.2]), one.eval(&[0.2]));
    }

    #[test]
    fn zero_field_is_zero_everywhere() {
        let z = FieldSampler::zero(2, 2);
        assert!(z.eval(&[0.1, -3.0]).iter().all(|c| c.norm() == 0.0));
        assert!(z.promote_scalar().is_err());
    }

    #[test]
    fn dilation_scales_values_and_support() {
        let f = gaussian_1d().with_support(SupportBox::cube(vec![0.0], 2.0));
        let d = f.dilated(2.0);
        assert_abs_diff_eq!(d.eval(&[0.25])[0].re, 2.0 * (-0.25f64).exp(), epsilon = 1e-15);
        assert_eq!(d.support().unwrap().half_widths, vec![1.0]);
    }

    #[test]
    fn truncation_zeroes_outside() {
        let f = gaussian_1d().truncated(1.0);
        assert_eq!(f.eval(&[1.5])[0], Complex64::new(0.0, 0.0));
        assert!(f.eval(&[0.5])[0].re > 0.0);
        assert_eq!(f.support().unwrap().half_widths, vec![1.0]);
    }

    #[test]
    fn sampled_sup_of_promoted_scalar() {
        let f = FieldSampler::scalar(2, "one", |_| Complex64::new(1.0, 0.0));
        let s = f.sampled_sup(&Cube::centered(&[0.0, 0.0], &[1.0, 1.0]), 5);
        assert_abs_diff_eq!(s, 2f64.sqrt(), epsilon = 1e-15);
    }
}
