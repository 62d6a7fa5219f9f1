//! Command-line front end: `norm`, `inner`, `verify` and `catalog`.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 unconverged
//! quadrature, 3 failed assertion.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jones_kernel::KernelError;
use crate::quadrature::QuadConfig;
use crate::sd_space::catalog::CatalogConfig;
use crate::sd_space::grid::GridField;
use crate::sd_space::{sd_inner, sd_norm, Exponent, FieldSampler, SdError, TruncationConfig};
use crate::verifier::{
    resolve_suites, run_suite, CompactnessParams, DerivativeParams, FlowParams, HkParams, NonabsoluteParams, NormAxiomParams, Tolerances,
    VerificationReport, VerifyConfig, VerifyError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_UNCONVERGED: i32 = 2;
pub const EXIT_ASSERTION: i32 = 3;

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "SDSPACE_OUT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("quadrature did not converge: {0}")]
    Unconverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Unconverged(_) => EXIT_UNCONVERGED,
        }
    }
}

fn is_unconverged(e: &SdError) -> bool {
    matches!(e, SdError::Kernel(KernelError::Unconverged { .. }))
}

impl From<SdError> for CliError {
    fn from(e: SdError) -> Self {
        match e {
            SdError::Io(m) => CliError::Io(m),
            e if is_unconverged(&e) => CliError::Unconverged(e.to_string()),
            e => CliError::Config(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Sd(e) => e.into(),
            VerifyError::Io(m) => CliError::Io(m),
            e => CliError::Config(e.to_string()),
        }
    }
}

/// Truncation parameters; quadrature is configured in its own section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationSection {
    pub k_max: u32,
    pub m_max: usize,
    pub box_radius: f64,
}

impl Default for TruncationSection {
    fn default() -> Self {
        let t = TruncationConfig::default();
        Self { k_max: t.k_max, m_max: t.m_max, box_radius: t.box_radius }
    }
}

/// Contents of the TOML config file. Every key is optional; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dimension: usize,
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    pub output_dir: PathBuf,
    pub suites: Vec<String>,
    pub truncation: TruncationSection,
    pub quadrature: QuadConfig,
    pub catalog: CatalogConfig,
    pub tolerances: Tolerances,
    pub norm_axioms: NormAxiomParams,
    pub compactness: CompactnessParams,
    pub nonabsolute: NonabsoluteParams,
    pub derivative: DerivativeParams,
    pub hk: HkParams,
    pub flow: FlowParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        let v = VerifyConfig::default();
        Self {
            dimension: v.dimension,
            seed: v.seed,
            workers: 0,
            output_dir: PathBuf::from("sdspace-out"),
            suites: vec!["all".to_string()],
            truncation: TruncationSection::default(),
            quadrature: QuadConfig::default(),
            catalog: v.catalog,
            tolerances: v.tolerances,
            norm_axioms: v.norm_axioms,
            compactness: v.compactness,
            nonabsolute: v.nonabsolute,
            derivative: v.derivative,
            hk: v.hk,
            flow: v.flow,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.verify_config()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn truncation(&self) -> TruncationConfig {
        TruncationConfig {
            k_max: self.truncation.k_max,
            m_max: self.truncation.m_max,
            box_radius: self.truncation.box_radius,
            quad: self.quadrature.clone(),
        }
    }

    /// The validated suite configuration.
    pub fn verify_config(&self) -> Result<VerifyConfig, CliError> {
        let v = VerifyConfig {
            seed: self.seed,
            dimension: self.dimension,
            truncation: self.truncation(),
            catalog: self.catalog.clone(),
            tolerances: self.tolerances.clone(),
            norm_axioms: self.norm_axioms.clone(),
            compactness: self.compactness.clone(),
            nonabsolute: self.nonabsolute.clone(),
            derivative: self.derivative.clone(),
            hk: self.hk.clone(),
            flow: self.flow.clone(),
        };
        v.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(v)
    }

    /// `--out`, then `SDSPACE_OUT`, then the config value.
    pub fn resolve_out(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        match std::env::var_os(OUT_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output_dir.clone(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sdspace", version, about = "SD^p norms and verification suites")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config and SDSPACE_OUT).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// SD^p norm of a field: a catalog name, `zero`, or `grid:PATH`.
    Norm {
        field: String,
        #[arg(long, default_value = "2")]
        p: String,
        /// Also write per-functional contributions to `<out>/contributions.csv`.
        #[arg(long)]
        contributions: bool,
    },
    /// SD² inner product of two fields.
    Inner { a: String, b: String },
    /// Run verification suites and write JSON and CSV reports.
    Verify {
        #[arg(long = "suite", num_args = 1..)]
        suites: Vec<String>,
    },
    /// List the built-in field families.
    Catalog,
}

/// Resolves a field reference: catalog family, `zero`, or `grid:PATH`.
pub fn resolve_field(reference: &str, cfg: &RunConfig) -> Result<FieldSampler, CliError> {
    if let Some(path) = reference.strip_prefix("grid:") {
        let grid = GridField::from_path(Path::new(path))?;
        if grid.n != cfg.dimension {
            return Err(CliError::Config(format!("grid `{path}` has n={}, config dimension is {}", grid.n, cfg.dimension)));
        }
        return Ok(grid.into_sampler(reference));
    }
    Ok(cfg.catalog.build(reference, cfg.dimension)?)
}

fn init_workers(workers: usize) {
    if workers > 0 {
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn cmd_norm(cfg: &RunConfig, out_flag: Option<&Path>, field: &str, p: &str, contributions: bool, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let p: Exponent = p.parse().map_err(|e: SdError| CliError::Config(e.to_string()))?;
    let f = resolve_field(field, cfg)?;
    let result = sd_norm(&f, p, &cfg.truncation())?;
    writeln!(stdout, "{}", result.to_json()).map_err(|e| CliError::Io(e.to_string()))?;
    if contributions {
        let dir = cfg.resolve_out(out_flag);
        ensure_dir(&dir)?;
        let path = dir.join("contributions.csv");
        let file = std::fs::File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        result.write_contributions_csv(file)?;
    }
    Ok(if result.converged { EXIT_OK } else { EXIT_UNCONVERGED })
}

#[derive(Serialize)]
struct InnerOutput {
    a: String,
    b: String,
    re: f64,
    im: f64,
    modulus: f64,
    quad_err: f64,
    converged: bool,
    norm_a: f64,
    norm_b: f64,
    /// `|(a, b)| <= ‖a‖ ‖b‖`.
    holder_bound_holds: bool,
}

fn cmd_inner(cfg: &RunConfig, a: &str, b: &str, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let trunc = cfg.truncation();
    let (fa, fb) = (resolve_field(a, cfg)?, resolve_field(b, cfg)?);
    let r = sd_inner(&fa, &fb, &trunc)?;
    let two = Exponent::Finite(2.0);
    let na = sd_norm(&fa, two, &trunc)?.value;
    let nb = sd_norm(&fb, two, &trunc)?.value;
    let bound = na * nb;
    let out = InnerOutput {
        a: a.to_string(),
        b: b.to_string(),
        re: r.value.re,
        im: r.value.im,
        modulus: r.value.norm(),
        quad_err: r.quad_err,
        converged: r.converged,
        norm_a: na,
        norm_b: nb,
        holder_bound_holds: r.value.norm() <= bound * (1.0 + 1e-12) + r.quad_err,
    };
    let json = serde_json::to_string_pretty(&out).expect("inner output serializes");
    writeln!(stdout, "{json}").map_err(|e| CliError::Io(e.to_string()))?;
    Ok(if r.converged { EXIT_OK } else { EXIT_UNCONVERGED })
}

#[derive(Serialize)]
struct SuiteSummary {
    suite: String,
    cases: usize,
    assertable: usize,
    failed: usize,
    converged: bool,
}

#[derive(Serialize)]
struct RunMeta {
    started_unix_seconds: u64,
    elapsed_seconds: f64,
}

fn summarize(r: &VerificationReport) -> SuiteSummary {
    SuiteSummary {
        suite: r.suite.clone(),
        cases: r.cases.len(),
        assertable: r.cases.iter().filter(|c| c.is_assertable()).count(),
        failed: r.failures().count(),
        converged: r.converged,
    }
}

fn cmd_verify(cfg: &RunConfig, out_flag: Option<&Path>, requested: &[String], stdout: &mut dyn Write) -> Result<i32, CliError> {
    let names = if requested.is_empty() { cfg.suites.clone() } else { requested.to_vec() };
    let suites = resolve_suites(&names)?;
    let vcfg = cfg.verify_config()?;
    let dir = cfg.resolve_out(out_flag);
    ensure_dir(&dir)?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let mut summaries = Vec::new();
    for name in suites {
        let report = run_suite(name, &vcfg)?;
        report.write_to_dir(&dir)?;
        summaries.push(summarize(&report));
    }
    let summary_json = serde_json::to_string_pretty(&summaries).expect("summary serializes");
    write_file(&dir.join("summary.json"), &(summary_json + "\n"))?;
    // Wall-clock data lives in its own file so the reports stay reproducible.
    let meta = RunMeta { started_unix_seconds: started, elapsed_seconds: clock.elapsed().as_secs_f64() };
    write_file(&dir.join("run_meta.json"), &(serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n"))?;

    let io = |e: std::io::Error| CliError::Io(e.to_string());
    writeln!(stdout, "{:<18} {:>6} {:>10} {:>7} {:>10}", "suite", "cases", "assertable", "failed", "converged").map_err(io)?;
    for s in &summaries {
        writeln!(stdout, "{:<18} {:>6} {:>10} {:>7} {:>10}", s.suite, s.cases, s.assertable, s.failed, s.converged).map_err(io)?;
    }
    writeln!(stdout, "reports written to {}", dir.display()).map_err(io)?;
    if summaries.iter().any(|s| s.failed > 0) {
        Ok(EXIT_ASSERTION)
    } else if summaries.iter().any(|s| !s.converged) {
        Ok(EXIT_UNCONVERGED)
    } else {
        Ok(EXIT_OK)
    }
}

/// Parses `args` and runs the command, writing normal output to `stdout` and
/// diagnostics to `stderr`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            if code == EXIT_OK {
                let _ = write!(stdout, "{e}");
            } else {
                let _ = write!(stderr, "{e}");
            }
            return code;
        }
    };
    let result = (|| {
        let cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        init_workers(cfg.workers);
        let out = cli.out.as_deref();
        match &cli.command {
            Command::Norm { field, p, contributions } => cmd_norm(&cfg, out, field, p, *contributions, stdout),
            Command::Inner { a, b } => cmd_inner(&cfg, a, b, stdout),
            Command::Verify { suites } => cmd_verify(&cfg, out, suites, stdout),
            Command::Catalog => {
                write!(stdout, "{}", cfg.catalog.listing()).map_err(|e| CliError::Io(e.to_string()))?;
                Ok(EXIT_OK)
            }
        }
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
