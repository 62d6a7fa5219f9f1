//! Fields sampled on a uniform grid, read from CSV.
//!
//! Layout:
//!
//! ```text
//! n,components,spacing,origin
//! 2,1,0.5,-2
//! 0.0
//! 0.1,0.0
//! ...
//! ```
//!
//! The second line holds the values; `spacing` and `origin` are either one number
//! or `;`-separated per axis. The remaining rows are samples in row-major order
//! (last axis fastest), one row per grid point with `components` values, each a
//! real part optionally followed by its imaginary part. The number of points per
//! axis is inferred from the row count, which must be a perfect `n`-th power.
//! The field is multilinear between nodes and zero outside the grid.

use std::path::Path;

use num_complex::Complex64;

use super::field::{FieldSampler, SupportBox};
use super::SdError;

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub n: usize,
    pub components: usize,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
    pub points_per_axis: usize,
    /// Row-major, `components` values per node.
    pub samples: Vec<Complex64>,
}

fn parse_axis_list(field: &str, n: usize, what: &str) -> Result<Vec<f64>, SdError> {
    let parts: Vec<f64> = field
        .split(';')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| SdError::Grid(format!("{what}: {e}")))?;
    match parts.len() {
        1 => Ok(vec![parts[0]; n]),
        len if len == n => Ok(parts),
        len => Err(SdError::Grid(format!("{what} has {len} entries, expected 1 or {n}"))),
    }
}

impl GridField {
    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self, SdError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| SdError::Grid(e.to_string()))?.clone();
        let expected = ["n", "components", "spacing", "origin"];
        if headers.len() != 4 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(SdError::Grid(format!("header must be `n,components,spacing,origin`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut records = rdr.records();
        let meta = records
            .next()
            .ok_or_else(|| SdError::Grid("missing metadata row".into()))?
            .map_err(|e| SdError::Grid(e.to_string()))?;
        if meta.len() != 4 {
            return Err(SdError::Grid("metadata row must have 4 fields".into()));
        }
        let n: usize = meta[0].parse().map_err(|e| SdError::Grid(format!("n: {e}")))?;
        let components: usize = meta[1].parse().map_err(|e| SdError::Grid(format!("components: {e}")))?;
        if !(1..=4).contains(&n) || !(components == 1 || components == n) {
            return Err(SdError::Grid(format!("unsupported n={n}, components={components}")));
        }
        let spacing = parse_axis_list(&meta[2], n, "spacing")?;
        let origin = parse_axis_list(&meta[3], n, "origin")?;
        if spacing.iter().any(|h| !(*h > 0.0)) {
            return Err(SdError::Grid("spacing must be positive".into()));
        }
        let mut samples = Vec::new();
        let mut rows = 0usize;
        for rec in records {
            let rec = rec.map_err(|e| SdError::Grid(e.to_string()))?;
            let values: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| SdError::Grid(format!("row {}: {e}", rows + 1)))?;
            if values.len() == components {
                samples.extend(values.iter().map(|&v| Complex64::new(v, 0.0)));
            } else if values.len() == 2 * components {
                samples.extend(values.chunks(2).map(|c| Complex64::new(c[0], c[1])));
            } else {
                return Err(SdError::Grid(format!("row {} has {} values, expected {components} or {}", rows + 1, values.len(), 2 * components)));
            }
            rows += 1;
        }
        let per_axis = (rows as f64).powf(1.0 / n as f64).round() as usize;
        if per_axis < 2 || per_axis.pow(n as u32) != rows {
            return Err(SdError::Grid(format!("{rows} rows is not a perfect {n}-th power of at least 2")));
        }
        Ok(Self { n, components, spacing, origin, points_per_axis: per_axis, samples })
    }

    pub fn from_path(path: &Path) -> Result<Self, SdError> {
        let file = std::fs::File::open(path).map_err(|e| SdError::Io(format!("{}: {e}", path.display())))?;
        Self::from_reader(file)
    }

    fn extent(&self) -> SupportBox {
        let last = (self.points_per_axis - 1) as f64;
        let lo = self.origin.clone();
        let hi: Vec<f64> = self.origin.iter().zip(&self.spacing).map(|(o, h)| o + h * last).collect();
        super::field::from_corners(&lo, &hi)
    }

    /// Multilinear interpolation; zero outside the grid.
    pub fn interpolate(&self, x: &[f64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        let p = self.points_per_axis;
        let mut base = [0usize; 4];
        let mut frac = [0.0f64; 4];
        for j in 0..self.n {
            let s = (x[j] - self.origin[j]) / self.spacing[j];
            if !(s >= 0.0 && s <= (p - 1) as f64) {
                return;
            }
            let b = (s.floor() as usize).min(p - 2);
            base[j] = b;
            frac[j] = s - b as f64;
        }
        for corner in 0..(1usize << self.n) {
            let mut weight = 1.0;
            let mut idx = 0usize;
            for j in 0..self.n {
                let bit = (corner >> (self.n - 1 - j)) & 1;
                weight *= if bit == 1 { frac[j] } else { 1.0 - frac[j] };
                idx = idx * p + base[j] + bit;
            }
            if weight == 0.0 {
                continue;
            }
            let row = &self.samples[idx * self.components..(idx + 1) * self.components];
            for (o, v) in out.iter_mut().zip(row) {
                *o += v * weight;
            }
        }
    }

    pub fn into_sampler(self, label: impl Into<String>) -> FieldSampler {
        let support = self.extent();
        let scale = self.spacing.iter().copied().fold(f64::INFINITY, f64::min);
        let (n, c) = (self.n, self.components);
        FieldSampler::new(n, c, label, move |x, o| self.interpolate(x, o)).with_support(support).with_scale(scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bilinear_grid_reproduces_bilinear_function() {
        let mut csv = String::from("n,components,spacing,origin\n2,1,0.5,-1\n");
        for i in 0..5 {
            for j in 0..5 {
                let (x, y) = (-1.0 + 0.5 * i as f64, -1.0 + 0.5 * j as f64);
                csv.push_str(&format!("{}\n", 1.0 + 2.0 * x - y + 0.5 * x * y));
            }
        }
        let g = GridField::from_reader(csv.as_bytes()).unwrap();
        assert_eq!(g.points_per_axis, 5);
        let f = g.into_sampler("grid");
        let (x, y) = (0.3, -0.7);
        assert_abs_diff_eq!(f.eval(&[x, y])[0].re, 1.0 + 2.0 * x - y + 0.5 * x * y, epsilon = 1e-14);
        assert_eq!(f.eval(&[1.5, 0.0])[0], Complex64::new(0.0, 0.0));
        assert_eq!(f.support().unwrap().half_widths, vec![1.0, 1.0]);
    }

    #[test]
    fn complex_samples_and_bad_shapes() {
        let csv = "n,components,spacing,origin\n1,1,1,0\n1,2\n3,4\n";
        let g = GridField::from_reader(csv.as_bytes()).unwrap();
        let mut out = [Complex64::new(0.0, 0.0)];
        g.interpolate(&[0.5], &mut out);
        assert_eq!(out[0], Complex64::new(2.0, 3.0));
        let bad = "n,components,spacing,origin\n2,1,1,0\n1\n2\n3\n";
        assert!(GridField::from_reader(bad.as_bytes()).is_err());
        let bad_header = "a,b\n1,1\n";
        assert!(GridField::from_reader(bad_header.as_bytes()).is_err());
    }
}
