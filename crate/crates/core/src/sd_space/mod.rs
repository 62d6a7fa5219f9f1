//! Fields, the functionals `F_m(f) = ∫ E_m · f`, and the weighted SD^p norms
//! and SD² inner product built from them.
//!
//! Scalar fields are paired by replicating them into every component, so
//! `E·f = Σ_j ξ(x_j - c_j) f(x)`.

pub mod catalog;
pub mod field;
pub mod grid;
pub mod jet;

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::indexing::{functional_specs, IndexError, TestFunctionalSpec};
use crate::jones_kernel::{eval_e, KernelError, MAX_CACHED_LEVEL};
use crate::quadrature::{
    integrate_cube_vec, integrate_interval_vec, pairwise_sum, pairwise_sum_real, Cube, QuadConfig, QuadError,
};

pub use field::{FieldSampler, SupportBox};

#[derive(Debug, Error)]
pub enum SdError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("field `{0}` is already vector-valued")]
    AlreadyVector(String),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid file: {0}")]
    Grid(String),
    #[error("io: {0}")]
    Io(String),
    #[error("truncation produced no functionals")]
    EmptySpecs,
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// Norm exponent `1 <= p <= ∞`. Serialized as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self, SdError> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p >= 1.0 && p.is_finite() {
            Ok(Exponent::Finite(p))
        } else {
            Err(SdError::InvalidParameter(format!("exponent must satisfy 1 <= p <= inf, got {p}")))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = SdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => {
                let p: f64 = other.parse().map_err(|_| SdError::InvalidParameter(format!("cannot parse exponent `{s}`")))?;
                Exponent::new(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::new(p).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Which functionals enter a norm: levels `k <= k_max`, the first `m_max` of
/// them in pairing order, centers in `[-box_radius, box_radius]^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationConfig {
    pub k_max: u32,
    pub m_max: usize,
    pub box_radius: f64,
    pub quad: QuadConfig,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self { k_max: 12, m_max: 2000, box_radius: 8.0, quad: QuadConfig::default() }
    }
}

type SpecKey = (usize, u64, u32, usize);

fn spec_cache() -> &'static Mutex<HashMap<SpecKey, Arc<Vec<TestFunctionalSpec>>>> {
    static CACHE: OnceLock<Mutex<HashMap<SpecKey, Arc<Vec<TestFunctionalSpec>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl TruncationConfig {
    pub fn validate(&self) -> Result<(), SdError> {
        if self.k_max == 0 || self.k_max > MAX_CACHED_LEVEL {
            return Err(SdError::InvalidParameter(format!("k_max must be in 1..={MAX_CACHED_LEVEL}, got {}", self.k_max)));
        }
        if self.m_max == 0 {
            return Err(SdError::InvalidParameter("m_max must be >= 1".into()));
        }
        if !(self.box_radius > 0.0 && self.box_radius.is_finite()) {
            return Err(SdError::InvalidParameter(format!("box_radius must be positive, got {}", self.box_radius)));
        }
        self.quad.validate()?;
        Ok(())
    }

    /// Functional specs for dimension `n`, shared across calls.
    pub fn specs(&self, n: usize) -> Result<Arc<Vec<TestFunctionalSpec>>, SdError> {
        self.validate()?;
        let key = (n, self.box_radius.to_bits(), self.k_max, self.m_max);
        if let Some(s) = spec_cache().lock().expect("spec cache poisoned").get(&key) {
            return Ok(Arc::clone(s));
        }
        let specs = Arc::new(functional_specs(n, self.box_radius, self.k_max, self.m_max)?);
        if specs.is_empty() {
            return Err(SdError::EmptySpecs);
        }
        spec_cache().lock().expect("spec cache poisoned").insert(key, Arc::clone(&specs));
        Ok(specs)
    }

    /// The box `[-R - ε_1, R + ε_1]^n` that every functional support lies in.
    pub fn lattice_box(&self, n: usize) -> Cube {
        let r = self.box_radius + std::f64::consts::PI / 12.0;
        Cube::centered(&vec![0.0; n], &vec![r; n])
    }
}

/// Finite list of point masses with complex vector weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub n: usize,
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Vec<f64>,
    pub weight: Vec<Complex64>,
}

impl AtomicMeasure {
    pub fn new(n: usize) -> Self {
        Self { n, atoms: Vec::new() }
    }

    pub fn with_atom(mut self, point: Vec<f64>, weight: Vec<Complex64>) -> Result<Self, SdError> {
        if point.len() != self.n {
            return Err(SdError::DimensionMismatch { expected: self.n, got: point.len() });
        }
        if weight.len() != self.n {
            return Err(SdError::DimensionMismatch { expected: self.n, got: weight.len() });
        }
        if point.iter().any(|v| !v.is_finite()) || weight.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(SdError::InvalidParameter("atoms must be finite".into()));
        }
        self.atoms.push(Atom { point, weight });
        Ok(self)
    }

    /// Vector delta at `point`: one unit atom per coordinate direction.
    pub fn vector_delta(point: &[f64]) -> Self {
        let n = point.len();
        let atoms = (0..n)
            .map(|j| {
                let mut w = vec![Complex64::new(0.0, 0.0); n];
                w[j] = Complex64::new(1.0, 0.0);
                Atom { point: point.to_vec(), weight: w }
            })
            .collect();
        Self { n, atoms }
    }

    /// Largest Euclidean weight norm; the sup-type size used for tail bounds.
    fn max_weight(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// `F_m` of one object at one spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub m: u64,
    pub k: u32,
    pub i: u64,
    pub value: Complex64,
    pub err_est: f64,
    pub converged: bool,
}

impl FunctionalValue {
    fn exact(spec: &TestFunctionalSpec, value: Complex64) -> Self {
        Self { m: spec.m, k: spec.k, i: spec.i, value, err_est: 0.0, converged: true }
    }
}

/// `F_m(f) = ∫ E_m · f` over the spec support intersected with the field support.
pub fn functional_f(spec: &TestFunctionalSpec, f: &FieldSampler, quad: &QuadConfig) -> Result<FunctionalValue, SdError> {
    let n = spec.dim();
    if f.dim() != n {
        return Err(SdError::DimensionMismatch { expected: n, got: f.dim() });
    }
    let mut domain = spec.support();
    if let Some(s) = f.support() {
        domain = domain.intersect(&s.as_cube());
    }
    if domain.is_empty() {
        return Ok(FunctionalValue::exact(spec, Complex64::new(0.0, 0.0)));
    }
    let comps = f.components();
    let inv_n = 1.0 / n as f64;
    let center = &spec.center_f64;
    let integrand = |x: &[f64], out: &mut [Complex64]| {
        let mut v = [Complex64::new(0.0, 0.0); 4];
        f.eval_into(x, &mut v[..comps]);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let e = Complex64::from_polar(inv_n, x[j] - center[j]);
            acc += e * if comps == 1 { v[0] } else { v[j] };
        }
        out[0] = acc;
    };
    let r = if n == 1 {
        integrate_interval_vec(|t, out: &mut [Complex64]| integrand(&[t], out), 1, domain.lo[0], domain.hi[0], quad)?
    } else {
        integrate_cube_vec(integrand, 1, &domain, quad)?
    };
    Ok(FunctionalValue { m: spec.m, k: spec.k, i: spec.i, value: r.values[0], err_est: r.err_est, converged: r.converged })
}

/// `Σ_atoms E_m(point) · weight`.
pub fn functional_f_measure(spec: &TestFunctionalSpec, mu: &AtomicMeasure) -> Result<FunctionalValue, SdError> {
    if mu.n != spec.dim() {
        return Err(SdError::DimensionMismatch { expected: spec.dim(), got: mu.n });
    }
    let mut terms = Vec::with_capacity(mu.atoms.len());
    for atom in &mu.atoms {
        let e = eval_e(spec, &atom.point)?;
        terms.push(e.iter().zip(&atom.weight).map(|(a, b)| a * b).sum::<Complex64>());
    }
    Ok(FunctionalValue::exact(spec, pairwise_sum(&terms)))
}

/// Anything the functionals can be applied to.
pub trait Pairable: Sync {
    fn dim(&self) -> usize;
    fn label(&self) -> String;
    fn functional(&self, spec: &TestFunctionalSpec, quad: &QuadConfig) -> Result<FunctionalValue, SdError>;
    /// Size estimate entering [`tail_bound`]: `sup |f|` (promoted) or the largest atom weight.
    fn sup_estimate(&self, trunc: &TruncationConfig) -> f64;
    /// Whether contributions of levels past the truncation are controlled by a volume factor.
    fn is_measure(&self) -> bool {
        false
    }
}

/// Sample count per axis for sup estimates.
fn sup_samples(n: usize) -> usize {
    match n {
        1 => 8001,
        2 => 301,
        3 => 61,
        _ => 21,
    }
}

impl Pairable for FieldSampler {
    fn dim(&self) -> usize {
        FieldSampler::dim(self)
    }

    fn label(&self) -> String {
        FieldSampler::label(self).to_string()
    }

    fn functional(&self, spec: &TestFunctionalSpec, quad: &QuadConfig) -> Result<FunctionalValue, SdError> {
        functional_f(spec, self, quad)
    }

    fn sup_estimate(&self, trunc: &TruncationConfig) -> f64 {
        let n = FieldSampler::dim(self);
        let mut region = trunc.lattice_box(n);
        if let Some(s) = self.support() {
            region = region.intersect(&s.as_cube());
        }
        if region.is_empty() {
            return 0.0;
        }
        self.sampled_sup(&region, sup_samples(n))
    }
}

impl Pairable for AtomicMeasure {
    fn dim(&self) -> usize {
        self.n
    }

    fn label(&self) -> String {
        format!("atomic({} atoms)", self.atoms.len())
    }

    fn functional(&self, spec: &TestFunctionalSpec, _quad: &QuadConfig) -> Result<FunctionalValue, SdError> {
        functional_f_measure(spec, self)
    }

    fn sup_estimate(&self, _trunc: &TruncationConfig) -> f64 {
        self.max_weight() * self.atoms.len() as f64
    }

    fn is_measure(&self) -> bool {
        true
    }
}

/// All functional values of one object over one truncation, in spec order.
#[derive(Debug, Clone)]
pub struct FunctionalTable {
    pub specs: Arc<Vec<TestFunctionalSpec>>,
    pub values: Vec<FunctionalValue>,
}

impl FunctionalTable {
    /// Evaluates every functional (in parallel; results keep spec order).
    pub fn compute<T: Pairable + ?Sized>(f: &T, specs: Arc<Vec<TestFunctionalSpec>>, quad: &QuadConfig) -> Result<Self, SdError> {
        if specs.is_empty() {
            return Err(SdError::EmptySpecs);
        }
        let values = specs.par_iter().map(|s| f.functional(s, quad)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { specs, values })
    }

    pub fn for_truncation<T: Pairable + ?Sized>(f: &T, trunc: &TruncationConfig) -> Result<Self, SdError> {
        let specs = trunc.specs(f.dim())?;
        Self::compute(f, specs, &trunc.quad)
    }

    pub fn quad_err(&self) -> f64 {
        pairwise_sum_real(&self.values.iter().map(|v| v.err_est).collect::<Vec<_>>())
    }

    pub fn converged(&self) -> bool {
        self.values.iter().all(|v| v.converged)
    }

    /// `t_k |F_m|^p` per spec (or `|F_m|` for `p = ∞`).
    pub fn contributions(&self, p: Exponent) -> Vec<Contribution> {
        self.specs
            .iter()
            .zip(&self.values)
            .map(|(s, v)| {
                let term = match p {
                    Exponent::Finite(p) => s.t_k * v.value.norm().powf(p),
                    Exponent::Infinity => v.value.norm(),
                };
                Contribution { m: s.m, k: s.k, i: s.i, term }
            })
            .collect()
    }

    /// Norm over the table alone (no tail).
    pub fn norm(&self, p: Exponent) -> f64 {
        reduce_contributions(&self.contributions(p), p)
    }

    /// `Σ t_k F_m(self) conj(F_m(other))`.
    pub fn inner(&self, other: &FunctionalTable) -> Result<Complex64, SdError> {
        if self.specs.len() != other.specs.len() || self.specs.iter().zip(other.specs.iter()).any(|(a, b)| a.m != b.m) {
            return Err(SdError::InvalidParameter("functional tables were built on different truncations".into()));
        }
        let terms: Vec<Complex64> = self
            .specs
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(s, (a, b))| a.value * b.value.conj() * s.t_k)
            .collect();
        Ok(pairwise_sum(&terms))
    }

    /// Sum of the weights `t_k` over the table.
    pub fn weight_mass(&self) -> f64 {
        pairwise_sum_real(&self.specs.iter().map(|s| s.t_k).collect::<Vec<_>>())
    }

    /// Number of distinct centers used (largest center index).
    pub fn center_count(&self) -> u64 {
        self.specs.iter().map(|s| s.i).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub m: u64,
    pub k: u32,
    pub i: u64,
    pub term: f64,
}

fn reduce_contributions(c: &[Contribution], p: Exponent) -> f64 {
    match p {
        Exponent::Finite(p) => {
            let s = pairwise_sum_real(&c.iter().map(|c| c.term).collect::<Vec<_>>());
            s.powf(1.0 / p)
        }
        Exponent::Infinity => c.iter().map(|c| c.term).fold(0.0, f64::max),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SDNormResult {
    pub value: f64,
    pub p: Exponent,
    pub k_max: u32,
    pub m_max: usize,
    pub contributions: Vec<Contribution>,
    pub tail_bound: f64,
    pub quad_err: f64,
    pub converged: bool,
    /// True for `p = ∞`, where the value is a sup over the enumerated functionals only.
    pub lower_bound: bool,
}

impl SDNormResult {
    /// Norm recomputed from the contributions with level `k <= level`.
    pub fn partial(&self, level: u32) -> f64 {
        let kept: Vec<Contribution> = self.contributions.iter().filter(|c| c.k <= level).copied().collect();
        reduce_contributions(&kept, self.p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("norm result serializes")
    }

    pub fn write_contributions_csv<W: Write>(&self, out: W) -> Result<(), SdError> {
        let mut w = csv::Writer::from_writer(out);
        for c in &self.contributions {
            w.serialize(c).map_err(|e| SdError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| SdError::Io(e.to_string()))?;
        Ok(())
    }
}

/// Bound on what levels `k > level` would add, given `center_count` centers per level:
/// `{Σ_{k>level} 2^{-k} N [(2ε_k)^n S/√n]^p}^{1/p}`, `S` the sup estimate.
/// For `p = ∞` it is the largest single term `(2ε_{level+1})^n S/√n`.
pub fn tail_bound(sup: f64, n: usize, level: u32, center_count: u64, p: Exponent) -> f64 {
    if sup == 0.0 || center_count == 0 {
        return 0.0;
    }
    let per_functional = |k: u32| {
        let eps = std::f64::consts::PI / (12.0 * 2f64.powi(k as i32 - 1));
        (2.0 * eps).powi(n as i32) * sup / (n as f64).sqrt()
    };
    match p {
        Exponent::Infinity => per_functional(level + 1),
        Exponent::Finite(p) => {
            let mut terms = Vec::new();
            let mut k = level + 1;
            loop {
                let t = 2f64.powi(-(k as i32)) * center_count as f64 * per_functional(k).powf(p);
                if t == 0.0 || !t.is_finite() || k > level + 1100 {
                    break;
                }
                terms.push(t);
                if t < 1e-30 * terms[0] {
                    break;
                }
                k += 1;
            }
            pairwise_sum_real(&terms).powf(1.0 / p)
        }
    }
}

/// Tail bound for a measure: each functional is at most `|μ| / √n` regardless of level.
fn measure_tail_bound(total: f64, n: usize, level: u32, center_count: u64, p: Exponent) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    let per = total / (n as f64).sqrt();
    match p {
        Exponent::Infinity => per,
        Exponent::Finite(p) => (2f64.powi(-(level as i32)) * center_count as f64 * per.powf(p)).powf(1.0 / p),
    }
}

/// `‖f‖_{SD^p}` over the truncation, with its tail bound.
pub fn sd_norm<T: Pairable + ?Sized>(f: &T, p: Exponent, trunc: &TruncationConfig) -> Result<SDNormResult, SdError> {
    let table = FunctionalTable::for_truncation(f, trunc)?;
    Ok(norm_from_table(&table, f, p, trunc))
}

/// Same as [`sd_norm`] but reusing already computed functionals.
pub fn norm_from_table<T: Pairable + ?Sized>(table: &FunctionalTable, f: &T, p: Exponent, trunc: &TruncationConfig) -> SDNormResult {
    let contributions = table.contributions(p);
    let value = reduce_contributions(&contributions, p);
    let sup = f.sup_estimate(trunc);
    let tail = if f.is_measure() {
        measure_tail_bound(sup, f.dim(), trunc.k_max, table.center_count(), p)
    } else {
        tail_bound(sup, f.dim(), trunc.k_max, table.center_count(), p)
    };
    SDNormResult {
        value,
        p,
        k_max: trunc.k_max,
        m_max: trunc.m_max,
        contributions,
        tail_bound: tail,
        quad_err: table.quad_err(),
        converged: table.converged(),
        lower_bound: p == Exponent::Infinity,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnerResult {
    pub value: Complex64,
    pub quad_err: f64,
    pub converged: bool,
}

/// `(f, g)_{SD²} = Σ t_k F_m(f) conj(F_m(g))`.
pub fn sd_inner<A: Pairable + ?Sized, B: Pairable + ?Sized>(f: &A, g: &B, trunc: &TruncationConfig) -> Result<InnerResult, SdError> {
    if f.dim() != g.dim() {
        return Err(SdError::DimensionMismatch { expected: f.dim(), got: g.dim() });
    }
    let a = FunctionalTable::for_truncation(f, trunc)?;
    let b = FunctionalTable::for_truncation(g, trunc)?;
    Ok(InnerResult { value: a.inner(&b)?, quad_err: a.quad_err() + b.quad_err(), converged: a.converged() && b.converged() })
}

/// `L^q` norm of a field over `region` by quadrature (`q = ∞`: sampled sup).
///
/// Scalar fields use `|f|`, vector fields the Euclidean norm.
pub fn lq_norm(f: &FieldSampler, q: Exponent, region: &Cube, quad: &QuadConfig) -> Result<(f64, bool), SdError> {
    let comps = f.components();
    let modulus = |x: &[f64]| {
        let mut v = [Complex64::new(0.0, 0.0); 4];
        f.eval_into(x, &mut v[..comps]);
        v[..comps].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    };
    match q {
        Exponent::Infinity => {
            // sampled_sup measures the promoted vector; undo the √n for scalars.
            let n = f.dim();
            let promoted = f.sampled_sup(region, sup_samples(n));
            let s = if f.is_scalar() { promoted / (n as f64).sqrt() } else { promoted };
            Ok((s, true))
        }
        Exponent::Finite(q) => {
            let n = f.dim();
            let r = if n == 1 {
                integrate_interval_vec(|t, out: &mut [Complex64]| out[0] = Complex64::new(modulus(&[t]).powf(q), 0.0), 1, region.lo[0], region.hi[0], quad)?
            } else {
                integrate_cube_vec(|x, out: &mut [Complex64]| out[0] = Complex64::new(modulus(x).powf(q), 0.0), 1, region, quad)?
            };
            Ok((r.values[0].re.max(0.0).powf(1.0 / q), r.converged))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn small_trunc() -> TruncationConfig {
        TruncationConfig { k_max: 6, m_max: 60, box_radius: 4.0, ..Default::default() }
    }

    fn one_spec(n: usize, k: u32) -> TestFunctionalSpec {
        let center = crate::indexing::enumerate_centers(n, 1.0, 1).unwrap().remove(0);
        TestFunctionalSpec::new(1, k, 1, center)
    }

    #[test]
    fn exponent_parsing_and_conjugates() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("2".parse::<Exponent>().unwrap(), Exponent::Finite(2.0));
        assert!("0.5".parse::<Exponent>().is_err());
        assert_eq!(Exponent::Finite(3.0).conjugate(), Exponent::Finite(1.5));
        assert_eq!(Exponent::Finite(1.0).conjugate(), Exponent::Infinity);
        let json = serde_json::to_string(&Exponent::Infinity).unwrap();
        assert_eq!(serde_json::from_str::<Exponent>(&json).unwrap(), Exponent::Infinity);
    }

    #[test]
    fn functional_of_constant_and_unit_integrand() {
        let q = QuadConfig::default();
        for k in 1..=4 {
            let spec = one_spec(1, k);
            let one = FieldSampler::scalar(1, "one", |_| Complex64::new(1.0, 0.0));
            let v = functional_f(&spec, &one, &q).unwrap().value;
            assert_abs_diff_eq!(v.re, 2.0 * spec.eps.sin(), epsilon = 1e-13);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-13);
            let unit = FieldSampler::scalar(1, "unit", |x| Complex64::from_polar(1.0, -x[0]));
            let v = functional_f(&spec, &unit, &q).unwrap().value;
            assert_abs_diff_eq!(v.re, 2.0 * spec.eps, epsilon = 1e-13);
        }
    }

    #[test]
    fn promoted_functional_matches_direct_sum() {
        let spec = one_spec(2, 1);
        let g = catalog::gaussian(2, 0.0, 1.0, 1.0);
        let q = QuadConfig::default();
        let via_scalar = functional_f(&spec, &g, &q).unwrap().value;
        let via_vector = functional_f(&spec, &g.promote_scalar().unwrap(), &q).unwrap().value;
        assert_abs_diff_eq!((via_scalar - via_vector).norm(), 0.0, epsilon = 1e-15);
        // Σ_j ∫ ξ(x_j) e^{-|x|²}: both terms equal ∫e^{iu}e^{-u²}du · ∫e^{-v²}dv / 2.
        let eps = spec.eps;
        let a = crate::quadrature::integrate_interval(|u| Complex64::from_polar((-u * u).exp(), u), -eps, eps, &q).unwrap().value;
        let b = crate::quadrature::integrate_interval(|u| Complex64::new((-u * u).exp(), 0.0), -eps, eps, &q).unwrap().value;
        assert_abs_diff_eq!((via_scalar - a * b).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn measure_functionals() {
        let spec = one_spec(3, 2);
        let mu = AtomicMeasure::new(3).with_atom(vec![0.0; 3], vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(functional_f_measure(&spec, &mu).unwrap().value.re, 1.0 / 3.0, epsilon = 1e-15);
        let far = AtomicMeasure::new(3).with_atom(vec![1.0; 3], vec![Complex64::new(1.0, 0.0); 3]).unwrap();
        assert_eq!(functional_f_measure(&spec, &far).unwrap().value, Complex64::new(0.0, 0.0));
        let d = 0.05;
        let w = vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let sym = AtomicMeasure::new(3)
            .with_atom(vec![d, 0.0, 0.0], w.clone())
            .unwrap()
            .with_atom(vec![-d, 0.0, 0.0], w)
            .unwrap();
        let v = functional_f_measure(&spec, &sym).unwrap().value;
        assert_abs_diff_eq!(v.re, 2.0 * (1.0 / 3.0) * d.cos() * 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_field_has_zero_norm_and_tail() {
        let z = FieldSampler::zero(1, 1);
        for p in [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinity] {
            let r = sd_norm(&z, p, &small_trunc()).unwrap();
            assert_eq!(r.value, 0.0);
            assert_eq!(r.tail_bound, 0.0);
        }
    }

    #[test]
    fn norm_reproduces_contributions_and_inner() {
        let g = catalog::gaussian(1, 0.0, 1.0, 1.0);
        let t = small_trunc();
        let r = sd_norm(&g, Exponent::Finite(2.0), &t).unwrap();
        let s: f64 = r.contributions.iter().map(|c| c.term).sum();
        assert_abs_diff_eq!(r.value * r.value, s, epsilon = 1e-12);
        let ip = sd_inner(&g, &g, &t).unwrap().value;
        assert_abs_diff_eq!(ip.re, r.value * r.value, epsilon = 1e-12);
        assert_eq!(ip.im, 0.0);
        let inf = sd_norm(&g, Exponent::Infinity, &t).unwrap();
        let sup = r.contributions.iter().zip(&inf.contributions).map(|(_, c)| c.term).fold(0.0, f64::max);
        assert_eq!(inf.value, sup);
        assert!(inf.lower_bound);
    }

    #[test]
    fn tail_bound_geometric_decay() {
        for p in [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Finite(4.0), Exponent::Infinity] {
            for n in 1..=3 {
                let a = tail_bound(1.0, n, 10, 100, p);
                let b = tail_bound(1.0, n, 11, 100, p);
                let factor = match p {
                    Exponent::Finite(p) => 2f64.powf(-1.0 / p),
                    Exponent::Infinity => 1.0,
                };
                assert!(b <= a * factor * (1.0 + 1e-12), "p={p} n={n}: {b} vs {a}");
            }
        }
        assert_eq!(tail_bound(0.0, 1, 3, 10, Exponent::Finite(2.0)), 0.0);
        let e = PI / (12.0 * 2f64.powi(10));
        assert_abs_diff_eq!(tail_bound(1.0, 1, 10, 1, Exponent::Infinity), 2.0 * e, epsilon = 1e-18);
    }

    #[test]
    fn lq_norms_of_simple_fields() {
        let one = FieldSampler::scalar(1, "one", |_| Complex64::new(1.0, 0.0));
        let cube = Cube::centered(&[0.0], &[2.0]);
        let q = QuadConfig::default();
        assert_abs_diff_eq!(lq_norm(&one, Exponent::Finite(1.0), &cube, &q).unwrap().0, 4.0, epsilon = 1e-13);
        assert_abs_diff_eq!(lq_norm(&one, Exponent::Finite(2.0), &cube, &q).unwrap().0, 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(lq_norm(&one, Exponent::Infinity, &cube, &q).unwrap().0, 1.0, epsilon = 0.0);
    }
}
