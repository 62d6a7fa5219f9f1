//! Measurement suites. Each suite returns a [`VerificationReport`] whose cases
//! are either asserted against a tolerance or only reported.

mod derivative;
mod hk;
mod kernel_checks;
mod norms;
mod ns;

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::QuadConfig;
use crate::sd_space::catalog::CatalogConfig;
use crate::sd_space::{FieldSampler, SdError, TruncationConfig};

pub use derivative::derivative_residual;
pub use hk::{alexiewicz_norm, hk_bound_check, vitali_variation};
pub use norms::{compactness_sweep, embedding_report, nonabsolute_sweep, sdp_monotonicity_check};
pub use ns::{convective_field, curl_field, e_field, neg_laplacian, ns_ratio_report, stokes_identity_residual, trilinear_b, vector_potential};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("missing derivative provider for `{0}`")]
    MissingDerivative(String),
    #[error("zero norm input: {0}")]
    ZeroNorm(String),
    #[error(transparent)]
    Sd(#[from] SdError),
    #[error("io: {0}")]
    Io(String),
}

impl From<crate::quadrature::QuadError> for VerifyError {
    fn from(e: crate::quadrature::QuadError) -> Self {
        VerifyError::Sd(e.into())
    }
}

impl From<crate::indexing::IndexError> for VerifyError {
    fn from(e: crate::indexing::IndexError) -> Self {
        VerifyError::Sd(e.into())
    }
}

impl From<crate::jones_kernel::KernelError> for VerifyError {
    fn from(e: crate::jones_kernel::KernelError) -> Self {
        VerifyError::Sd(e.into())
    }
}

/// One measured relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub ratio: Option<f64>,
    /// `None` for reported-only cases.
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Case {
    /// Asserts `|lhs - rhs| <= tol`.
    pub fn within(label: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::residual(label, lhs, rhs, (lhs - rhs).abs(), tol)
    }

    /// Asserts `residual <= tol` for an externally computed residual.
    pub fn residual(label: impl Into<String>, lhs: f64, rhs: f64, residual: f64, tol: f64) -> Self {
        Self { label: label.into(), lhs, rhs, residual, ratio: None, tolerance: Some(tol), pass: residual <= tol }
    }

    /// Asserts `lhs <= rhs + slack`; the residual is the excess.
    pub fn at_most(label: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let ratio = if rhs != 0.0 { Some(lhs / rhs) } else { None };
        Self {
            label: label.into(),
            lhs,
            rhs,
            residual: (lhs - rhs).max(0.0),
            ratio,
            tolerance: Some(slack),
            pass: lhs <= rhs + slack,
        }
    }

    /// Asserts `lhs >= rhs - slack`; the residual is the shortfall.
    pub fn at_least(label: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let ratio = if rhs != 0.0 { Some(lhs / rhs) } else { None };
        Self {
            label: label.into(),
            lhs,
            rhs,
            residual: (rhs - lhs).max(0.0),
            ratio,
            tolerance: Some(slack),
            pass: lhs >= rhs - slack,
        }
    }

    /// Records a measurement without asserting anything.
    pub fn reported(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let ratio = if rhs != 0.0 { Some(lhs / rhs) } else { None };
        Self { label: label.into(), lhs, rhs, residual: (lhs - rhs).abs(), ratio, tolerance: None, pass: true }
    }

    pub fn with_ratio(mut self, ratio: f64) -> Self {
        self.ratio = Some(ratio);
        self
    }

    pub fn is_assertable(&self) -> bool {
        self.tolerance.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub cases: Vec<Case>,
    pub empirical_constant: Option<f64>,
    pub notes: Vec<String>,
    /// False if any quadrature inside the suite hit its budget.
    pub converged: bool,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self { suite: suite.into(), cases: Vec::new(), empirical_constant: None, notes: Vec::new(), converged: true }
    }

    pub fn push(&mut self, case: Case) {
        self.cases.push(case);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.pass)
    }

    pub fn case(&self, label: &str) -> Option<&Case> {
        self.cases.iter().find(|c| c.label == label)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), VerifyError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["suite", "label", "lhs", "rhs", "residual", "ratio", "tolerance", "assertable", "pass"])
            .map_err(|e| VerifyError::Io(e.to_string()))?;
        for c in &self.cases {
            let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
            w.write_record([
                self.suite.clone(),
                c.label.clone(),
                format!("{:e}", c.lhs),
                format!("{:e}", c.rhs),
                format!("{:e}", c.residual),
                opt(c.ratio),
                opt(c.tolerance),
                c.is_assertable().to_string(),
                c.pass.to_string(),
            ])
            .map_err(|e| VerifyError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| VerifyError::Io(e.to_string()))
    }

    /// Writes `<dir>/<suite>.json` and `<dir>/<suite>.csv`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<(), VerifyError> {
        std::fs::create_dir_all(dir).map_err(|e| VerifyError::Io(format!("{}: {e}", dir.display())))?;
        let json = dir.join(format!("{}.json", self.suite));
        std::fs::write(&json, self.to_json() + "\n").map_err(|e| VerifyError::Io(format!("{}: {e}", json.display())))?;
        let csv_path = dir.join(format!("{}.csv", self.suite));
        let file = std::fs::File::create(&csv_path).map_err(|e| VerifyError::Io(format!("{}: {e}", csv_path.display())))?;
        self.write_csv(file)
    }
}

/// Axis-aligned box `Π [a_i, b_i]` with `a_i < b_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BVBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BVBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, VerifyError> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(VerifyError::InvalidBox("corner dimensions differ or are empty".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(VerifyError::InvalidBox(format!("need a_i < b_i, got {lo:?} / {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn as_cube(&self) -> crate::quadrature::Cube {
        crate::quadrature::Cube::new(self.lo.clone(), self.hi.clone())
    }
}

/// Per-suite tolerances and thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub jones_identity: f64,
    pub jones_derivative: f64,
    pub mollifier_mass: f64,
    pub xi_agreement: f64,
    pub homogeneity: f64,
    pub triangle: f64,
    pub monotonicity: f64,
    pub derivative: f64,
    pub stokes: f64,
    pub vitali: f64,
    pub hk: f64,
    pub ns_spread: f64,
    pub compactness_decay: f64,
    pub compactness_l2: f64,
    pub nonabsolute_growth: f64,
    pub nonabsolute_last: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            jones_identity: 1e-8,
            jones_derivative: 1e-6,
            mollifier_mass: 1e-10,
            xi_agreement: 1e-8,
            homogeneity: 1e-12,
            triangle: 1e-12,
            monotonicity: 1e-12,
            derivative: 1e-6,
            stokes: 1e-6,
            vitali: 1e-10,
            hk: 1e-9,
            ns_spread: 10.0,
            compactness_decay: 0.2,
            compactness_l2: 0.05,
            nonabsolute_growth: 2.0,
            nonabsolute_last: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormAxiomParams {
    pub pairs: usize,
    pub p_values: Vec<crate::sd_space::Exponent>,
    /// Exponent of the Hölder pairing check.
    pub holder_p: f64,
}

impl Default for NormAxiomParams {
    fn default() -> Self {
        use crate::sd_space::Exponent::{Finite, Infinity};
        Self { pairs: 20, p_values: vec![Finite(1.0), Finite(2.0), Finite(4.0), Infinity], holder_p: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompactnessParams {
    pub m_values: Vec<f64>,
    pub p: crate::sd_space::Exponent,
}

impl Default for CompactnessParams {
    fn default() -> Self {
        Self { m_values: vec![0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0], p: crate::sd_space::Exponent::Finite(2.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonabsoluteParams {
    pub radii: Vec<f64>,
}

impl Default for NonabsoluteParams {
    fn default() -> Self {
        Self { radii: vec![10.0, 100.0, 1000.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DerivativeParams {
    /// Radius of the interior-supported test bump.
    pub bump_radius: f64,
    pub max_order: usize,
}

impl Default for DerivativeParams {
    fn default() -> Self {
        Self { bump_radius: 0.05, max_order: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HkParams {
    /// Grid points per axis for the Alexiewicz sup.
    pub grid: usize,
}

impl Default for HkParams {
    fn default() -> Self {
        Self { grid: 257 }
    }
}

/// Lattice and field sizes for the three-dimensional suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowParams {
    pub truncation: TruncationConfig,
    /// Radius of the interior-supported potential in the Stokes check.
    pub interior_radius: f64,
    /// Radius of the potential whose curl spans several boxes in the Stokes check.
    pub spanning_radius: f64,
    /// Radius of the potentials used for the ratio sweep.
    pub sweep_radius: f64,
    pub lambdas: Vec<f64>,
    pub divergence_samples: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            truncation: TruncationConfig {
                k_max: 6,
                m_max: 120,
                box_radius: 2.0,
                quad: QuadConfig { points_per_panel: 10, abs_tol: 1e-9, ..QuadConfig::default() },
            },
            interior_radius: 0.1,
            spanning_radius: 1.5,
            sweep_radius: 1.5,
            lambdas: vec![0.5, 1.0, 2.0, 4.0],
            divergence_samples: 1000,
        }
    }
}

/// Everything a suite may read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub seed: u64,
    pub dimension: usize,
    pub truncation: TruncationConfig,
    pub catalog: CatalogConfig,
    pub tolerances: Tolerances,
    pub norm_axioms: NormAxiomParams,
    pub compactness: CompactnessParams,
    pub nonabsolute: NonabsoluteParams,
    pub derivative: DerivativeParams,
    pub hk: HkParams,
    pub flow: FlowParams,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_607,
            dimension: 1,
            truncation: TruncationConfig::default(),
            catalog: CatalogConfig::default(),
            tolerances: Tolerances::default(),
            norm_axioms: NormAxiomParams::default(),
            compactness: CompactnessParams::default(),
            nonabsolute: NonabsoluteParams::default(),
            derivative: DerivativeParams::default(),
            hk: HkParams::default(),
            flow: FlowParams::default(),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<(), VerifyError> {
        if !(1..=3).contains(&self.dimension) {
            return Err(SdError::InvalidParameter(format!("dimension must be 1, 2 or 3, got {}", self.dimension)).into());
        }
        self.truncation.validate()?;
        self.flow.truncation.validate()?;
        self.catalog.validate()?;
        if self.norm_axioms.holder_p <= 1.0 || !self.norm_axioms.holder_p.is_finite() {
            return Err(SdError::InvalidParameter("norm_axioms.holder_p must be in (1, inf)".into()).into());
        }
        if self.nonabsolute.radii.len() < 2 || self.nonabsolute.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(SdError::InvalidParameter("nonabsolute.radii needs at least two positive radii".into()).into());
        }
        if self.compactness.m_values.is_empty() {
            return Err(SdError::InvalidParameter("compactness.m_values is empty".into()).into());
        }
        if self.flow.lambdas.is_empty() || self.flow.lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(SdError::InvalidParameter("flow.lambdas must be positive".into()).into());
        }
        let radii = [self.flow.interior_radius, self.flow.spanning_radius, self.flow.sweep_radius];
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(SdError::InvalidParameter("flow radii must be positive".into()).into());
        }
        if self.hk.grid < 2 {
            return Err(SdError::InvalidParameter("hk.grid must be >= 2".into()).into());
        }
        Ok(())
    }
}

/// Suite names in run order.
pub const SUITES: [&str; 12] = [
    "jones_kernel",
    "indexing",
    "norm_axioms",
    "embedding",
    "compactness",
    "nonabsolute",
    "derivative",
    "hk_bv",
    "sdp_monotonicity",
    "stokes",
    "ns_ratio",
    "duality",
];

/// Expands `all` and rejects unknown names; the result is sorted and deduplicated.
pub fn resolve_suites(names: &[String]) -> Result<Vec<&'static str>, VerifyError> {
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            out.extend(SUITES);
            continue;
        }
        let found = SUITES.iter().find(|s| **s == name.as_str()).ok_or_else(|| VerifyError::UnknownSuite(name.clone()))?;
        out.push(*found);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<VerificationReport, VerifyError> {
    match name {
        "jones_kernel" => kernel_checks::jones_suite(cfg),
        "indexing" => kernel_checks::indexing_suite(cfg),
        "norm_axioms" => norms::norm_axioms_suite(cfg),
        "duality" => norms::duality_suite(cfg),
        "embedding" => norms::embedding_suite(cfg),
        "compactness" => norms::compactness_suite(cfg),
        "nonabsolute" => norms::nonabsolute_suite(cfg),
        "sdp_monotonicity" => norms::monotonicity_suite(cfg),
        "derivative" => derivative::derivative_suite(cfg),
        "hk_bv" => hk::hk_suite(cfg),
        "stokes" => ns::stokes_suite(cfg),
        "ns_ratio" => ns::ns_suite(cfg),
        other => Err(VerifyError::UnknownSuite(other.to_string())),
    }
}

/// `trunc` with its absolute quadrature tolerance multiplied by the sampled
/// sup of `|f|` (at least 1), so large-valued fields are held to the same
/// relative accuracy as unit-scale ones.
pub(crate) fn magnitude_scaled(f: &FieldSampler, trunc: &TruncationConfig) -> TruncationConfig {
    const SAMPLES: usize = 17;
    let n = f.dim();
    let (lo, hi): (Vec<f64>, Vec<f64>) = match f.support() {
        Some(s) => s.center.iter().zip(&s.half_widths).map(|(c, h)| (c - h, c + h)).unzip(),
        None => {
            let cube = trunc.lattice_box(n);
            (cube.lo, cube.hi)
        }
    };
    let mut sup: f64 = 0.0;
    let mut x = vec![0.0; n];
    let mut out = vec![Complex64::new(0.0, 0.0); f.components()];
    for idx in 0..SAMPLES.pow(n as u32) {
        let mut rest = idx;
        for j in 0..n {
            // Cell midpoints, which avoid the support's edges.
            let t = (rest % SAMPLES) as f64 + 0.5;
            rest /= SAMPLES;
            x[j] = lo[j] + (hi[j] - lo[j]) * t / SAMPLES as f64;
        }
        f.eval_into(&x, &mut out);
        sup = out.iter().fold(sup, |m, v| m.max(v.norm()));
    }
    let factor = if sup.is_finite() { sup.max(1.0) } else { 1.0 };
    TruncationConfig { quad: trunc.quad.clone().with_tol(trunc.quad.abs_tol * factor), ..trunc.clone() }
}
