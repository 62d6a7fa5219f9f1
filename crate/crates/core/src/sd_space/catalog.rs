//! Built-in field families.
//!
//! Separable families (gaussian, bump, oscillating-pack) carry closed-form
//! derivative providers built from Taylor jets; the others fall back to finite
//! differences.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{FieldSampler, SupportBox};
use super::jet::{Jet, ORDER};
use super::SdError;

/// One-dimensional factor of a separable field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `exp(-1/(1 - s²))`, `s = (t - center)/radius`, zero for `|s| >= 1`.
    Bump { center: f64, radius: f64 },
    /// `exp(-((t - center)/sigma)²)`.
    Gauss { center: f64, sigma: f64 },
    /// `sin(freq·t)`.
    Sin { freq: f64 },
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Profile::Bump { center, radius } => {
                let s = (t - center) / radius;
                let w = 1.0 - s * s;
                if w <= 0.0 {
                    0.0
                } else {
                    (-1.0 / w).exp()
                }
            }
            Profile::Gauss { center, sigma } => {
                let s = (t - center) / sigma;
                (-s * s).exp()
            }
            Profile::Sin { freq } => (freq * t).sin(),
        }
    }

    pub fn jet(&self, t: f64) -> Jet {
        match *self {
            Profile::Bump { center, radius } => {
                let s = Jet::variable(t).add_const(-center).scale(1.0 / radius);
                let w = s.mul(s).scale(-1.0).add_const(1.0);
                if w.value() <= 0.0 {
                    Jet::constant(0.0)
                } else {
                    w.recip().scale(-1.0).exp()
                }
            }
            Profile::Gauss { center, sigma } => {
                let s = Jet::variable(t).add_const(-center).scale(1.0 / sigma);
                s.mul(s).scale(-1.0).exp()
            }
            Profile::Sin { freq } => Jet::variable(t).scale(freq).sin_cos().0,
        }
    }

    /// Interval outside of which the profile vanishes, if any.
    fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Profile::Bump { center, radius } => Some((center - radius, center + radius)),
            _ => None,
        }
    }
}

/// `amplitude · Π_j Π_{p ∈ axes[j]} p(x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableField {
    pub amplitude: f64,
    pub axes: Vec<Vec<Profile>>,
}

impl SeparableField {
    pub fn value(&self, x: &[f64]) -> f64 {
        let mut v = self.amplitude;
        for (xj, profiles) in x.iter().zip(&self.axes) {
            for p in profiles {
                v *= p.value(*xj);
                if v == 0.0 {
                    return 0.0;
                }
            }
        }
        v
    }

    pub fn derivative(&self, alpha: &[usize], x: &[f64]) -> f64 {
        let mut v = self.amplitude;
        for ((xj, profiles), &a) in x.iter().zip(&self.axes).zip(alpha) {
            assert!(a <= ORDER, "closed-form derivatives are available up to order {ORDER} per axis");
            let jet = profiles.iter().fold(Jet::constant(1.0), |acc, p| acc.mul(p.jet(*xj)));
            v *= jet.derivative(a);
            if v == 0.0 {
                return 0.0;
            }
        }
        v
    }

    fn support(&self) -> Option<SupportBox> {
        let mut lo = Vec::with_capacity(self.axes.len());
        let mut hi = Vec::with_capacity(self.axes.len());
        for profiles in &self.axes {
            let (l, h) = profiles
                .iter()
                .filter_map(Profile::support)
                .reduce(|a, b| (a.0.max(b.0), a.1.min(b.1)))?;
            lo.push(l);
            hi.push(h);
        }
        Some(super::field::from_corners(&lo, &hi))
    }

    /// Scalar sampler with a closed-form derivative provider.
    pub fn into_sampler(self, label: impl Into<String>, scale: f64) -> FieldSampler {
        let n = self.axes.len();
        let support = self.support();
        let eval = self.clone();
        let deriv = self;
        let out = FieldSampler::new(n, 1, label, move |x, o| o[0] = Complex64::new(eval.value(x), 0.0))
            .with_derivative(move |a, x, o| o[0] = Complex64::new(deriv.derivative(a, x), 0.0))
            .with_scale(scale);
        match support {
            Some(s) => out.with_support(s),
            None => out,
        }
    }
}

/// Product bump of half-width `radius` about `center`.
pub fn product_bump(center: &[f64], radius: f64, amplitude: f64) -> FieldSampler {
    SeparableField {
        amplitude,
        axes: center.iter().map(|&c| vec![Profile::Bump { center: c, radius }]).collect(),
    }
    .into_sampler(format!("bump(r={radius})"), radius)
}

pub fn gaussian(n: usize, center: f64, sigma: f64, amplitude: f64) -> FieldSampler {
    SeparableField { amplitude, axes: vec![vec![Profile::Gauss { center, sigma }]; n] }
        .into_sampler(format!("gaussian(σ={sigma})"), sigma)
}

/// `sin(freq·x_1) · bump(x)` with the bump centered at the origin.
pub fn oscillating_pack(n: usize, freq: f64, radius: f64) -> FieldSampler {
    let mut axes = vec![vec![Profile::Bump { center: 0.0, radius }]; n];
    axes[0].push(Profile::Sin { freq });
    let scale = if freq > 0.0 { radius.min(1.0 / freq) } else { radius };
    SeparableField { amplitude: 1.0, axes }.into_sampler(format!("oscillating-pack(m={freq})"), scale)
}

/// `Π_j sinc(x_j / scale)`.
pub fn sinc(n: usize, scale: f64) -> FieldSampler {
    FieldSampler::scalar(n, format!("sinc(s={scale})"), move |x| {
        let v: f64 = x
            .iter()
            .map(|&t| {
                let u = t / scale;
                if u.abs() < 1e-8 {
                    1.0 - u * u / 6.0
                } else {
                    u.sin() / u
                }
            })
            .product();
        Complex64::new(v, 0.0)
    })
    .with_scale(scale)
}

/// `exp(i·rate·|x|²)`.
pub fn fresnel_chirp(n: usize, rate: f64) -> FieldSampler {
    FieldSampler::scalar(n, format!("fresnel-chirp(c={rate})"), move |x| {
        let r2: f64 = x.iter().map(|t| t * t).sum();
        Complex64::from_polar(1.0, rate * r2)
    })
    .with_scale(1.0 / rate.abs().max(1.0).sqrt())
}

/// `amplitude / sqrt(softening² + |x|²)`.
pub fn coulomb_tail(n: usize, softening: f64, amplitude: f64) -> FieldSampler {
    FieldSampler::scalar(n, format!("coulomb-tail(a={softening})"), move |x| {
        let r2: f64 = x.iter().map(|t| t * t).sum();
        Complex64::new(amplitude / (softening * softening + r2).sqrt(), 0.0)
    })
    .with_scale(softening)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaussianParams {
    pub sigma: f64,
    pub center: f64,
    pub amplitude: f64,
}

impl Default for GaussianParams {
    fn default() -> Self {
        Self { sigma: 1.0, center: 0.0, amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BumpParams {
    pub radius: f64,
    pub center: f64,
    pub amplitude: f64,
}

impl Default for BumpParams {
    fn default() -> Self {
        Self { radius: 2.0, center: 0.0, amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SincParams {
    pub scale: f64,
}

impl Default for SincParams {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChirpParams {
    pub rate: f64,
}

impl Default for ChirpParams {
    fn default() -> Self {
        Self { rate: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PackParams {
    pub frequency: f64,
    pub radius: f64,
}

impl Default for PackParams {
    fn default() -> Self {
        Self { frequency: 1.0, radius: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoulombParams {
    pub softening: f64,
    pub amplitude: f64,
}

impl Default for CoulombParams {
    fn default() -> Self {
        Self { softening: 1.0, amplitude: 1.0 }
    }
}

/// Parameters of every built-in family; the `[catalog]` section of a run config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CatalogConfig {
    pub gaussian: GaussianParams,
    pub bump: BumpParams,
    pub sinc: SincParams,
    #[serde(rename = "fresnel-chirp")]
    pub fresnel_chirp: ChirpParams,
    #[serde(rename = "oscillating-pack")]
    pub oscillating_pack: PackParams,
    #[serde(rename = "coulomb-tail")]
    pub coulomb_tail: CoulombParams,
}

/// Family names in listing order.
pub const FAMILIES: [&str; 6] = ["gaussian", "bump", "sinc", "fresnel-chirp", "oscillating-pack", "coulomb-tail"];

impl CatalogConfig {
    pub fn validate(&self) -> Result<(), SdError> {
        let positive = [
            ("gaussian.sigma", self.gaussian.sigma),
            ("bump.radius", self.bump.radius),
            ("sinc.scale", self.sinc.scale),
            ("oscillating-pack.radius", self.oscillating_pack.radius),
            ("coulomb-tail.softening", self.coulomb_tail.softening),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SdError::InvalidParameter(format!("catalog.{name} must be positive, got {v}")));
            }
        }
        if !self.fresnel_chirp.rate.is_finite() || !(self.oscillating_pack.frequency >= 0.0) {
            return Err(SdError::InvalidParameter("catalog.fresnel-chirp.rate and oscillating-pack.frequency must be finite, frequency >= 0".into()));
        }
        Ok(())
    }

    pub fn build(&self, family: &str, n: usize) -> Result<FieldSampler, SdError> {
        let field = match family {
            "gaussian" => gaussian(n, self.gaussian.center, self.gaussian.sigma, self.gaussian.amplitude),
            "bump" => product_bump(&vec![self.bump.center; n], self.bump.radius, self.bump.amplitude),
            "sinc" => sinc(n, self.sinc.scale),
            "fresnel-chirp" => fresnel_chirp(n, self.fresnel_chirp.rate),
            "oscillating-pack" => oscillating_pack(n, self.oscillating_pack.frequency, self.oscillating_pack.radius),
            "coulomb-tail" => coulomb_tail(n, self.coulomb_tail.softening, self.coulomb_tail.amplitude),
            "zero" => FieldSampler::zero(n, 1),
            other => return Err(SdError::UnknownField(other.to_string())),
        };
        Ok(field.with_label(family))
    }

    /// Human-readable listing, one family per line.
    pub fn listing(&self) -> String {
        let rows = [
            ("gaussian", format!("sigma={} center={} amplitude={}", self.gaussian.sigma, self.gaussian.center, self.gaussian.amplitude), "amplitude·exp(-|x-center|²/sigma²)"),
            ("bump", format!("radius={} center={} amplitude={}", self.bump.radius, self.bump.center, self.bump.amplitude), "product of exp(-1/(1-s²)) bumps, s=(x_j-center)/radius"),
            ("sinc", format!("scale={}", self.sinc.scale), "Π_j sin(x_j/scale)/(x_j/scale)"),
            ("fresnel-chirp", format!("rate={}", self.fresnel_chirp.rate), "exp(i·rate·|x|²)"),
            ("oscillating-pack", format!("frequency={} radius={}", self.oscillating_pack.frequency, self.oscillating_pack.radius), "sin(frequency·x_1)·bump(x)"),
            ("coulomb-tail", format!("softening={} amplitude={}", self.coulomb_tail.softening, self.coulomb_tail.amplitude), "amplitude/sqrt(softening²+|x|²)"),
        ];
        let mut s = String::new();
        for (name, params, formula) in rows {
            s.push_str(&format!("{name:<18}{params:<40}{formula}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let b = product_bump(&[0.1], 0.5, 1.0);
        let fd = b.clone().with_label("fd");
        let fd = FieldSampler::new(1, 1, "fd", move |x, o| fd.eval_into(x, o)).with_scale(0.5);
        for &x in &[-0.3, 0.0, 0.2, 0.45] {
            for a in 1..=2 {
                let exact = b.derivative(&[a], &[x])[0].re;
                let approx = fd.derivative(&[a], &[x])[0].re;
                assert_abs_diff_eq!(exact, approx, epsilon = 1e-5 * (1.0 + exact.abs()));
            }
        }
        assert_eq!(b.eval(&[0.7])[0].re, 0.0);
        assert_eq!(b.derivative(&[3], &[-0.5])[0].re, 0.0);
    }

    #[test]
    fn pack_is_product_and_supported() {
        let f = oscillating_pack(2, 3.0, 1.0);
        let x = [0.3, -0.2];
        let expect = (3.0 * 0.3f64).sin() * Profile::Bump { center: 0.0, radius: 1.0 }.value(0.3) * Profile::Bump { center: 0.0, radius: 1.0 }.value(-0.2);
        assert_abs_diff_eq!(f.eval(&x)[0].re, expect, epsilon = 1e-15);
        assert_eq!(f.support().unwrap().half_widths, vec![1.0, 1.0]);
        // d/dx1 of sin(3x)b(x) = 3cos(3x)b + sin(3x)b'
        let b = Profile::Bump { center: 0.0, radius: 1.0 };
        let j = b.jet(0.3);
        let d = 3.0 * (0.9f64).cos() * j.value() + (0.9f64).sin() * j.derivative(1);
        assert_abs_diff_eq!(f.derivative(&[1, 0], &x)[0].re, d * b.value(-0.2), epsilon = 1e-14);
    }

    #[test]
    fn catalog_builds_every_family() {
        let cfg = CatalogConfig::default();
        for name in FAMILIES {
            for n in 1..=3 {
                let f = cfg.build(name, n).unwrap();
                assert_eq!(f.dim(), n);
                assert!(f.eval(&vec![0.25; n])[0].norm().is_finite());
            }
        }
        assert!(cfg.build("nope", 1).is_err());
        assert!(cfg.listing().contains("oscillating-pack"));
        assert!(cfg.listing().contains("sinc"));
    }

    #[test]
    fn sinc_near_zero_is_smooth() {
        let f = sinc(1, 1.0);
        assert_abs_diff_eq!(f.eval(&[0.0])[0].re, 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(f.eval(&[1e-9])[0].re, 1.0, epsilon = 1e-15);
    }
}
