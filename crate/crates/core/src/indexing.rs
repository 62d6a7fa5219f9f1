//! Rational centers, the pairing order `N×N → N`, and test-functional specs.
//!
//! The pairing order walks anti-diagonals `d = k + i` in alternating
//! direction. Its first ten terms are fixed:
//! `(1,1) (2,1) (1,2) (1,3) (2,2) (3,1) (3,2) (2,3) (1,4) (4,1)`; diagonal 5
//! is entered at `(3,2)` and closed by `(4,1)`. From diagonal 6 on, even
//! diagonals run in increasing `k`, odd ones in decreasing `k`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("index must be >= 1")]
    ZeroIndex,
    #[error("box of radius {radius} yields only {found} centers within depth {depth}, {wanted} requested")]
    BoxTooSmall { radius: f64, found: usize, wanted: usize, depth: u64 },
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),
    #[error("csv export failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Cell order of diagonal 5 as fixed by the listed prefix.
const DIAGONAL_FIVE: [(u64, u64); 4] = [(3, 2), (2, 3), (1, 4), (4, 1)];

fn diagonal_cell(d: u64, pos: u64) -> (u64, u64) {
    // pos is 0-based within diagonal d, which has d - 1 cells.
    if d == 5 {
        return DIAGONAL_FIVE[pos as usize];
    }
    let k = if d % 2 == 0 { 1 + pos } else { d - 1 - pos };
    (k, d - k)
}

fn diagonal_position(k: u64, i: u64) -> u64 {
    let d = k + i;
    if d == 5 {
        return DIAGONAL_FIVE.iter().position(|&c| c == (k, i)).expect("cell on diagonal 5") as u64;
    }
    if d % 2 == 0 {
        k - 1
    } else {
        d - 1 - k
    }
}

/// Number of cells on diagonals `2..d`.
#[inline]
fn cells_before(d: u64) -> u64 {
    (d - 2) * (d - 1) / 2
}

/// Flat index `m >= 1` to `(k, i)`.
pub fn serpentine_index(m: u64) -> Result<(u64, u64), IndexError> {
    if m == 0 {
        return Err(IndexError::ZeroIndex);
    }
    // Largest d with cells_before(d) < m.
    let mut d = ((((8 * m) as f64).sqrt() + 1.0) / 2.0).floor() as u64 + 1;
    d = d.max(2);
    while cells_before(d) >= m {
        d -= 1;
    }
    while cells_before(d + 1) < m {
        d += 1;
    }
    Ok(diagonal_cell(d, m - 1 - cells_before(d)))
}

/// Inverse of [`serpentine_index`].
pub fn inverse_serpentine(k: u64, i: u64) -> Result<u64, IndexError> {
    if k == 0 || i == 0 {
        return Err(IndexError::ZeroIndex);
    }
    let d = k + i;
    Ok(cells_before(d) + diagonal_position(k, i) + 1)
}

/// Splits a flat index into `n` per-axis indices by nesting the pairing.
fn product_index(mut m: u64, n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    for _ in 1..n {
        let (a, rest) = serpentine_index(m).expect("m >= 1");
        out.push(a);
        m = rest;
    }
    out.push(m);
    out
}

/// A point of `Q^n`, coordinates kept as reduced fractions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalPoint {
    pub coords: Vec<Rational64>,
}

impl RationalPoint {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|q| q.to_f64().expect("finite rational")).collect()
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, q) in self.coords.iter().enumerate() {
            if j > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, ")")
    }
}

/// One-dimensional enumeration of `Q`: `0`, then each Calkin–Wilf term `q` followed by `-q`.
#[derive(Debug, Clone)]
pub struct RationalLine {
    terms: Vec<Rational64>,
    cw: Rational64,
}

impl Default for RationalLine {
    fn default() -> Self {
        Self { terms: vec![Rational64::zero()], cw: Rational64::from_integer(1) }
    }
}

impl RationalLine {
    /// Term with 1-based index `j`.
    pub fn get(&mut self, j: u64) -> Rational64 {
        let idx = (j - 1) as usize;
        while self.terms.len() <= idx {
            let q = self.cw;
            self.terms.push(q);
            self.terms.push(-q);
            // Calkin–Wilf successor 1/(2⌊q⌋ - q + 1).
            let next = (Rational64::from_integer(2) * q.floor() - q + Rational64::from_integer(1)).recip();
            self.cw = next;
        }
        self.terms[idx]
    }
}

/// Default scan depth multiplier for [`enumerate_centers`].
const SCAN_FACTOR: u64 = 4096;

/// First `count` points of the product enumeration of `Q^n` lying in `[-r, r]^n`.
pub fn enumerate_centers(n: usize, box_radius: f64, count: usize) -> Result<Vec<RationalPoint>, IndexError> {
    if n == 0 {
        return Err(IndexError::InvalidTruncation("dimension must be >= 1".into()));
    }
    let depth = (count as u64).saturating_mul(SCAN_FACTOR).max(1 << 16);
    let mut line = RationalLine::default();
    let mut out = Vec::with_capacity(count);
    let mut m = 0u64;
    while out.len() < count {
        m += 1;
        if m > depth {
            return Err(IndexError::BoxTooSmall { radius: box_radius, found: out.len(), wanted: count, depth });
        }
        let axes = product_index(m, n);
        let coords: Vec<Rational64> = axes.iter().map(|&j| line.get(j)).collect();
        let inside = coords.iter().all(|q| q.to_f64().map(|v| v.abs() <= box_radius).unwrap_or(false));
        if inside {
            out.push(RationalPoint { coords });
        }
    }
    Ok(out)
}

/// One test functional: level `k`, center index `i`, and derived constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunctionalSpec {
    pub m: u64,
    pub k: u32,
    pub i: u64,
    #[serde(skip)]
    pub center: RationalPoint,
    pub center_f64: Vec<f64>,
    pub a_k: f64,
    pub eps: f64,
    pub t_k: f64,
    /// Edge `π/a_k` of the cube `B_k(x^i)`.
    pub cube_edge: f64,
}

impl TestFunctionalSpec {
    pub fn new(m: u64, k: u32, i: u64, center: RationalPoint) -> Self {
        let a_k = 3.0 * 2f64.powi(k as i32 - 1);
        let center_f64 = center.to_f64();
        Self {
            m,
            k,
            i,
            center,
            center_f64,
            a_k,
            eps: PI / (4.0 * a_k),
            t_k: level_weight(k),
            cube_edge: PI / a_k,
        }
    }

    pub fn dim(&self) -> usize {
        self.center_f64.len()
    }

    /// Support box of the test function: half-width `ε_k` about the center.
    pub fn support(&self) -> crate::quadrature::Cube {
        crate::quadrature::Cube::centered(&self.center_f64, &vec![self.eps; self.dim()])
    }
}

/// `t_k = 2^{-k}`.
#[inline]
pub fn level_weight(k: u32) -> f64 {
    2f64.powi(-(k as i32))
}

/// `Σ_{k=1}^{K} 2^{-k}`, summed in order.
pub fn weight_sum(k_max: u32) -> f64 {
    (1..=k_max).map(level_weight).sum()
}

/// First `m_max` specs in pairing order with level `k <= k_max`; center `i` is the
/// `i`-th enumerated point of `Q^n ∩ [-r, r]^n`.
pub fn functional_specs(n: usize, box_radius: f64, k_max: u32, m_max: usize) -> Result<Vec<TestFunctionalSpec>, IndexError> {
    if k_max == 0 || m_max == 0 {
        return Err(IndexError::InvalidTruncation("k_max and m_max must be >= 1".into()));
    }
    let mut pairs = Vec::with_capacity(m_max);
    let mut m = 0u64;
    while pairs.len() < m_max {
        m += 1;
        let (k, i) = serpentine_index(m)?;
        if k <= k_max as u64 {
            pairs.push((m, k as u32, i));
        }
    }
    let max_i = pairs.iter().map(|p| p.2).max().unwrap_or(1) as usize;
    let centers = enumerate_centers(n, box_radius, max_i)?;
    Ok(pairs
        .into_iter()
        .map(|(m, k, i)| TestFunctionalSpec::new(m, k, i, centers[i as usize - 1].clone()))
        .collect())
}

/// Writes `m,k,i,center numerators/denominators,eps,t` rows.
pub fn write_specs_csv<W: Write>(specs: &[TestFunctionalSpec], out: W) -> Result<(), IndexError> {
    let mut w = csv::Writer::from_writer(out);
    let n = specs.first().map(|s| s.dim()).unwrap_or(0);
    let mut header = vec!["m".to_string(), "k".into(), "i".into()];
    for j in 1..=n {
        header.push(format!("num{j}"));
        header.push(format!("den{j}"));
    }
    header.push("eps".into());
    header.push("t".into());
    w.write_record(&header)?;
    for s in specs {
        let mut row = vec![s.m.to_string(), s.k.to_string(), s.i.to_string()];
        for q in &s.center.coords {
            row.push(q.numer().to_string());
            row.push(q.denom().to_string());
        }
        row.push(format!("{:e}", s.eps));
        row.push(format!("{:e}", s.t_k));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Independent walk: emits cells diagonal by diagonal, hard-coding the
    /// listed prefix for diagonals up to 5.
    fn diagonal_walk(limit: usize) -> Vec<(u64, u64)> {
        let mut out = vec![(1, 1), (2, 1), (1, 2), (1, 3), (2, 2), (3, 1), (3, 2), (2, 3), (1, 4), (4, 1)];
        let mut d = 6;
        while out.len() < limit {
            let ks: Vec<u64> = if d % 2 == 0 { (1..d).collect() } else { (1..d).rev().collect() };
            out.extend(ks.into_iter().map(|k| (k, d - k)));
            d += 1;
        }
        out.truncate(limit);
        out
    }

    #[test]
    fn listed_prefix() {
        let listed = [(1, 1), (2, 1), (1, 2), (1, 3), (2, 2), (3, 1), (3, 2), (2, 3)];
        for (m, cell) in listed.iter().enumerate() {
            assert_eq!(serpentine_index(m as u64 + 1).unwrap(), *cell);
        }
        assert_eq!(serpentine_index(9).unwrap(), (1, 4));
        assert_eq!(inverse_serpentine(1, 1).unwrap(), 1);
        assert_eq!(inverse_serpentine(2, 2).unwrap(), 5);
        assert_eq!(inverse_serpentine(4, 1).unwrap(), 10);
    }

    #[test]
    fn matches_diagonal_walk() {
        for (m, cell) in diagonal_walk(5000).into_iter().enumerate() {
            assert_eq!(serpentine_index(m as u64 + 1).unwrap(), cell, "m = {}", m + 1);
        }
    }

    #[test]
    fn round_trip_to_1e5() {
        let mut seen = HashSet::new();
        for m in 1..=100_000u64 {
            let (k, i) = serpentine_index(m).unwrap();
            assert_eq!(inverse_serpentine(k, i).unwrap(), m);
            assert!(seen.insert((k, i)));
        }
    }

    #[test]
    fn zero_index_rejected() {
        assert!(serpentine_index(0).is_err());
        assert!(inverse_serpentine(0, 3).is_err());
    }

    #[test]
    fn one_dimensional_centers() {
        let c = enumerate_centers(1, 8.0, 5).unwrap();
        let want = [(0, 1), (1, 1), (-1, 1), (1, 2), (-1, 2)];
        for (p, (n, d)) in c.iter().zip(want) {
            assert_eq!(p.coords[0], Rational64::new(n, d));
        }
    }

    #[test]
    fn dyadics_appear_once() {
        let c = enumerate_centers(1, 1e9, 4000).unwrap();
        let mut seen = HashSet::new();
        for p in &c {
            assert!(seen.insert(p.coords[0]), "duplicate {}", p);
        }
        // Every p/2^j with |p/2^j| <= 1 and j <= 3 shows up within the first 4000 terms.
        for j in 0..=3u32 {
            let den = 1i64 << j;
            for p in -den..=den {
                assert!(seen.contains(&Rational64::new(p, den)), "missing {p}/{den}");
            }
        }
    }

    #[test]
    fn two_dimensional_first_point_is_origin() {
        let c = enumerate_centers(2, 8.0, 3).unwrap();
        assert_eq!(c[0].coords, vec![Rational64::zero(), Rational64::zero()]);
        let c3 = enumerate_centers(3, 8.0, 1).unwrap();
        assert!(c3[0].coords.iter().all(|q| q.is_zero()));
    }

    #[test]
    fn box_too_small_is_an_error() {
        assert!(matches!(enumerate_centers(1, -1.0, 1), Err(IndexError::BoxTooSmall { .. })));
    }

    #[test]
    fn specs_carry_derived_constants() {
        let s = functional_specs(1, 8.0, 12, 1).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].k, s[0].i, s[0].t_k), (1, 1, 0.5));
        assert!(s[0].center.coords[0].is_zero());

        let specs = functional_specs(2, 8.0, 5, 300).unwrap();
        assert_eq!(specs.len(), 300);
        let mut per_level = [0usize; 6];
        for s in &specs {
            assert!(s.k <= 5);
            assert_eq!(s.eps, PI / (4.0 * 3.0 * 2f64.powi(s.k as i32 - 1)));
            assert_eq!(s.cube_edge, 4.0 * s.eps);
            assert!(s.center_f64.iter().all(|c| c.abs() <= 8.0));
            per_level[s.k as usize] += 1;
        }
        let total: f64 = specs.iter().map(|s| s.t_k).sum();
        let bound: f64 = (1..=5).map(|k| per_level[k] as f64 * level_weight(k as u32)).sum();
        assert!(total <= bound + 1e-12);
    }

    #[test]
    fn weights_sum_exactly() {
        for k in 1..=30 {
            assert_eq!(weight_sum(k), 1.0 - 2f64.powi(-(k as i32)));
        }
    }

    #[test]
    fn enumeration_is_stable() {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let digest = || {
            let mut h = DefaultHasher::new();
            enumerate_centers(2, 8.0, 500).unwrap().hash(&mut h);
            h.finish()
        };
        assert_eq!(digest(), digest());
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let specs = functional_specs(2, 8.0, 3, 4).unwrap();
        let mut buf = Vec::new();
        write_specs_csv(&specs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "m,k,i,num1,den1,num2,den2,eps,t");
        assert_eq!(lines.count(), 4);
    }
}
