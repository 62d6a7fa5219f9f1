//! Truncated Taylor arithmetic in one variable, used for closed-form
//! derivatives of the separable catalog profiles.

/// Highest derivative order carried.
pub const ORDER: usize = 5;

const FACTORIAL: [f64; ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];

/// Taylor coefficients `c_k = f^{(k)}(x0) / k!`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [f64; ORDER + 1]);

impl Jet {
    pub fn constant(c: f64) -> Self {
        let mut v = [0.0; ORDER + 1];
        v[0] = c;
        Jet(v)
    }

    /// The identity function expanded at `x`.
    pub fn variable(x: f64) -> Self {
        let mut v = [0.0; ORDER + 1];
        v[0] = x;
        v[1] = 1.0;
        Jet(v)
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// `f^{(k)}(x0)`.
    pub fn derivative(&self, k: usize) -> f64 {
        assert!(k <= ORDER, "derivative order {k} exceeds jet order {ORDER}");
        self.0[k] * FACTORIAL[k]
    }

    pub fn scale(self, s: f64) -> Self {
        Jet(self.0.map(|c| c * s))
    }

    pub fn add(self, other: Jet) -> Self {
        let mut v = self.0;
        v.iter_mut().zip(other.0).for_each(|(a, b)| *a += b);
        Jet(v)
    }

    pub fn add_const(mut self, c: f64) -> Self {
        self.0[0] += c;
        self
    }

    pub fn mul(self, other: Jet) -> Self {
        let mut v = [0.0; ORDER + 1];
        for (k, out) in v.iter_mut().enumerate() {
            *out = (0..=k).map(|j| self.0[j] * other.0[k - j]).sum();
        }
        Jet(v)
    }

    pub fn recip(self) -> Self {
        let u = self.0;
        let mut y = [0.0; ORDER + 1];
        y[0] = 1.0 / u[0];
        for k in 1..=ORDER {
            let s: f64 = (1..=k).map(|j| u[j] * y[k - j]).sum();
            y[k] = -s * y[0];
        }
        Jet(y)
    }

    pub fn exp(self) -> Self {
        let u = self.0;
        let mut y = [0.0; ORDER + 1];
        y[0] = u[0].exp();
        for k in 1..=ORDER {
            let s: f64 = (1..=k).map(|j| j as f64 * u[j] * y[k - j]).sum();
            y[k] = s / k as f64;
        }
        Jet(y)
    }

    pub fn sin_cos(self) -> (Self, Self) {
        let u = self.0;
        let mut s = [0.0; ORDER + 1];
        let mut c = [0.0; ORDER + 1];
        (s[0], c[0]) = u[0].sin_cos();
        for k in 1..=ORDER {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for j in 1..=k {
                ss += j as f64 * u[j] * c[k - j];
                cc += j as f64 * u[j] * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = -cc / k as f64;
        }
        (Jet(s), Jet(c))
    }
}
