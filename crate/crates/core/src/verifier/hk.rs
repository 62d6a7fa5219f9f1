//! Vitali variation, the Alexiewicz norm and the multiplier bound
//! `|∫ f g| <= ‖f‖_D V(g)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{BVBox, Case, VerificationReport, VerifyConfig, VerifyError};
use crate::quadrature::{integrate_cube_vec, integrate_interval_vec, Cube, QuadConfig};
use crate::sd_space::catalog::{product_bump, FAMILIES};
use crate::sd_space::FieldSampler;

/// Largest grid used per axis in two dimensions, where the sup runs over all
/// `O(G^4)` sub-boxes.
const MAX_GRID_2D: usize = 65;

fn integrate_box<F>(f: F, b: &Cube, quad: &QuadConfig) -> Result<(Complex64, f64, bool), VerifyError>
where
    F: Fn(&[f64]) -> Complex64,
{
    let r = if b.dim() == 1 {
        integrate_interval_vec(|t, out: &mut [Complex64]| out[0] = f(&[t]), 1, b.lo[0], b.hi[0], quad)?
    } else {
        integrate_cube_vec(|x, out: &mut [Complex64]| out[0] = f(x), 1, b, quad)?
    };
    Ok((r.values[0], r.err_est, r.converged))
}

/// `∫_box |∂ⁿ g / ∂x_1…∂x_n|` for scalar `g`. Returns the value and whether the
/// quadrature converged.
pub fn vitali_variation(g: &FieldSampler, bx: &BVBox, quad: &QuadConfig) -> Result<(f64, bool), VerifyError> {
    if !g.is_scalar() || g.dim() != bx.dim() {
        return Err(crate::sd_space::SdError::DimensionMismatch { expected: bx.dim(), got: g.dim() }.into());
    }
    let alpha = vec![1usize; g.dim()];
    let (v, _, conv) = integrate_box(
        |x| {
            let mut o = [Complex64::new(0.0, 0.0)];
            g.derivative_into(&alpha, x, &mut o);
            Complex64::new(o[0].norm(), 0.0)
        },
        &bx.as_cube(),
        quad,
    )?;
    Ok((v.re, conv))
}

/// `sup |∫_I f|` over all grid-aligned sub-boxes `I` of the box, with `grid` points
/// per axis (at most 65 in two dimensions). A lower bound of the true sup.
///
/// Cell integrals are taken by quadrature and combined through prefix sums.
pub fn alexiewicz_norm(f: &FieldSampler, bx: &BVBox, grid: usize, quad: &QuadConfig) -> Result<(f64, bool), VerifyError> {
    if !f.is_scalar() || f.dim() != bx.dim() {
        return Err(crate::sd_space::SdError::DimensionMismatch { expected: bx.dim(), got: f.dim() }.into());
    }
    let n = bx.dim();
    let value = |x: &[f64]| f.eval(x)[0];
    let node = |j: usize, i: usize, g: usize| bx.lo[j] + (bx.hi[j] - bx.lo[j]) * i as f64 / (g - 1) as f64;
    match n {
        1 => {
            let g = grid.max(2);
            let mut prefix = vec![Complex64::new(0.0, 0.0); g];
            let mut conv = true;
            for i in 1..g {
                let cell = Cube::new(vec![node(0, i - 1, g)], vec![node(0, i, g)]);
                let (v, _, c) = integrate_box(value, &cell, quad)?;
                conv &= c;
                prefix[i] = prefix[i - 1] + v;
            }
            let mut sup: f64 = 0.0;
            for i in 0..g {
                for j in i + 1..g {
                    sup = sup.max((prefix[j] - prefix[i]).norm());
                }
            }
            Ok((sup, conv))
        }
        2 => {
            let g = grid.clamp(2, MAX_GRID_2D);
            let mut prefix = vec![vec![Complex64::new(0.0, 0.0); g]; g];
            let mut conv = true;
            for a in 1..g {
                for b in 1..g {
                    let cell = Cube::new(vec![node(0, a - 1, g), node(1, b - 1, g)], vec![node(0, a, g), node(1, b, g)]);
                    let (v, _, c) = integrate_box(value, &cell, quad)?;
                    conv &= c;
                    prefix[a][b] = v + prefix[a - 1][b] + prefix[a][b - 1] - prefix[a - 1][b - 1];
                }
            }
            let mut sup: f64 = 0.0;
            for a0 in 0..g {
                for a1 in a0 + 1..g {
                    for b0 in 0..g {
                        for b1 in b0 + 1..g {
                            let s = prefix[a1][b1] - prefix[a0][b1] - prefix[a1][b0] + prefix[a0][b0];
                            sup = sup.max(s.norm());
                        }
                    }
                }
            }
            Ok((sup, conv))
        }
        _ => Err(VerifyError::InvalidBox(format!("Alexiewicz norm implemented for n <= 2, got {n}"))),
    }
}

/// Largest `|g|` on the lower faces `{x_j = a_j}`, sampled on a grid.
fn lower_face_sup(g: &FieldSampler, bx: &BVBox) -> f64 {
    let n = bx.dim();
    let samples: usize = 33;
    let mut worst: f64 = 0.0;
    for face in 0..n {
        let count = if n == 1 { 1 } else { samples.pow(n as u32 - 1) };
        for idx in 0..count {
            let mut x = bx.lo.clone();
            let mut rest = idx;
            for j in (0..n).filter(|&j| j != face) {
                let t = (rest % samples) as f64 / (samples - 1) as f64;
                rest /= samples;
                x[j] = bx.lo[j] + t * (bx.hi[j] - bx.lo[j]);
            }
            worst = worst.max(g.eval(&x)[0].norm());
        }
    }
    worst
}

/// `|∫_box f g| <= ‖f‖_D V(g) (1 + tol)` together with the precondition that `g`
/// vanishes on the lower faces of the box.
pub fn hk_bound_check(f: &FieldSampler, g: &FieldSampler, bx: &BVBox, grid: usize, quad: &QuadConfig, tol: f64) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new("hk_bv");
    let label = format!("{} x {} on {:?}..{:?}", f.label(), g.label(), bx.lo, bx.hi);
    let corner = lower_face_sup(g, bx);
    report.push(Case::at_most(format!("{label}: g on lower faces"), corner, 0.0, 1e-12));
    let (lhs, _, c1) = integrate_box(|x| f.eval(x)[0] * g.eval(x)[0], &bx.as_cube(), quad)?;
    let (norm_d, c2) = alexiewicz_norm(f, bx, grid, quad)?;
    let (var, c3) = vitali_variation(g, bx, quad)?;
    report.converged &= c1 && c2 && c3;
    let rhs = norm_d * var;
    report.push(Case::at_most(format!("{label}: |int f g| <= |f|_D V(g)"), lhs.norm(), rhs, tol * rhs + quad.abs_tol));
    Ok(report)
}

fn ramp(lo: f64) -> FieldSampler {
    FieldSampler::scalar(1, "x-a", move |x| Complex64::new(x[0] - lo, 0.0)).with_derivative(move |a, x, o| {
        o[0] = Complex64::new(
            match a[0] {
                0 => x[0] - lo,
                1 => 1.0,
                _ => 0.0,
            },
            0.0,
        )
    })
}

fn quadratic(lo: f64) -> FieldSampler {
    FieldSampler::scalar(1, "(x-a)^2", move |x| Complex64::new((x[0] - lo).powi(2), 0.0)).with_derivative(move |a, x, o| {
        o[0] = Complex64::new(
            match a[0] {
                0 => (x[0] - lo).powi(2),
                1 => 2.0 * (x[0] - lo),
                2 => 2.0,
                _ => 0.0,
            },
            0.0,
        )
    })
}

fn half_angle(lo: f64) -> FieldSampler {
    FieldSampler::scalar(1, "sin^2((x-a)/2)", move |x| Complex64::new(((x[0] - lo) / 2.0).sin().powi(2), 0.0)).with_derivative(move |a, x, o| {
        // sin²(t/2) = (1 - cos t)/2.
        let t = x[0] - lo;
        let d = match a[0] % 4 {
            0 => t.cos(),
            1 => -t.sin(),
            2 => -t.cos(),
            _ => t.sin(),
        };
        o[0] = Complex64::new(if a[0] == 0 { (1.0 - d) / 2.0 } else { -d / 2.0 }, 0.0)
    })
}

/// `(x - a_1)(y - a_2)`.
fn bilinear(lo: [f64; 2]) -> FieldSampler {
    FieldSampler::scalar(2, "(x-a)(y-b)", move |x| Complex64::new((x[0] - lo[0]) * (x[1] - lo[1]), 0.0)).with_derivative(move |a, x, o| {
        let fx = match a[0] {
            0 => x[0] - lo[0],
            1 => 1.0,
            _ => 0.0,
        };
        let fy = match a[1] {
            0 => x[1] - lo[1],
            1 => 1.0,
            _ => 0.0,
        };
        o[0] = Complex64::new(fx * fy, 0.0);
    })
}

fn sin_field() -> FieldSampler {
    FieldSampler::scalar(1, "sin", |x| Complex64::new(x[0].sin(), 0.0))
}

pub(super) fn hk_suite(cfg: &VerifyConfig) -> Result<VerificationReport, VerifyError> {
    let quad = &cfg.truncation.quad;
    let tol = &cfg.tolerances;
    let grid = cfg.hk.grid;
    let mut report = VerificationReport::new("hk_bv");

    // Vitali variation.
    let unit = BVBox::new(vec![0.0, 0.0], vec![1.0, 1.0])?;
    let (v, c) = vitali_variation(&bilinear([0.0, 0.0]).with_label("xy"), &unit, quad)?;
    report.converged &= c;
    report.push(Case::within("vitali xy on [0,1]^2", v, 1.0, tol.vitali));
    let constant = FieldSampler::scalar(2, "const", |_| Complex64::new(3.0, 0.0)).with_derivative(|a, _, o| {
        o[0] = Complex64::new(if a.iter().all(|&k| k == 0) { 3.0 } else { 0.0 }, 0.0)
    });
    let (v, _) = vitali_variation(&constant, &unit, quad)?;
    report.push(Case::within("vitali constant", v, 0.0, 0.0));
    let wave = FieldSampler::scalar(2, "sin(x+y)", |x| Complex64::new((x[0] + x[1]).sin(), 0.0)).with_derivative(|a, x, o| {
        let s = x[0] + x[1];
        let order: usize = a.iter().sum();
        let v = match order % 4 {
            0 => s.sin(),
            1 => s.cos(),
            2 => -s.sin(),
            _ => -s.cos(),
        };
        o[0] = Complex64::new(v, 0.0)
    });
    let quarter = BVBox::new(vec![0.0, 0.0], vec![PI / 2.0, PI / 2.0])?;
    let (v, c) = vitali_variation(&wave, &quarter, quad)?;
    report.converged &= c;
    // ∫∫ sin(x+y) over [0,π/2]² = ∫ (cos x + sin x) dx = 2.
    report.push(Case::within("vitali sin(x+y) on [0,pi/2]^2", v, 2.0, tol.vitali));

    // Alexiewicz norm.
    let long = BVBox::new(vec![0.0], vec![4.0 * PI])?;
    let (a, _) = alexiewicz_norm(&FieldSampler::zero(1, 1), &long, grid, quad)?;
    report.push(Case::within("alexiewicz zero", a, 0.0, 0.0));
    let gauss = crate::sd_space::catalog::gaussian(1, 0.0, 1.0, 1.0);
    let two = BVBox::new(vec![0.0], vec![2.0])?;
    let (a, _) = alexiewicz_norm(&gauss, &two, grid, quad)?;
    let (total, _, _) = integrate_box(|x| gauss.eval(x)[0], &two.as_cube(), quad)?;
    report.push(Case::within("alexiewicz nonnegative f equals its integral", a, total.re, 1e-12));
    // The sup is |1 - cos x| = 2 at x = π, a grid node whenever 4 divides G - 1.
    let (a, _) = alexiewicz_norm(&sin_field(), &long, grid, quad)?;
    report.push(Case::within("alexiewicz sin on [0,4pi]", a, 2.0, 1e-9));

    // Multiplier bound over the pair catalog.
    let mut checks: Vec<VerificationReport> = Vec::new();
    let circle = BVBox::new(vec![0.0], vec![2.0 * PI])?;
    checks.push(hk_bound_check(&sin_field(), &ramp(0.0), &circle, grid, quad, tol.hk)?);
    let zero_g = FieldSampler::zero(1, 1);
    let zero_report = hk_bound_check(&sin_field(), &zero_g, &circle, grid, quad, tol.hk)?;
    if let Some(c) = zero_report.cases.last() {
        report.push(Case::within("hk g = 0: lhs", c.lhs, 0.0, 0.0));
        report.push(Case::within("hk g = 0: rhs", c.rhs, 0.0, 0.0));
    }
    let steps = BVBox::new(vec![0.0], vec![4.0])?;
    let step = FieldSampler::scalar(1, "alternating step", |x| Complex64::new(if (x[0].floor() as i64) % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
    let step_quad = quad.clone().with_breakpoints(vec![1.0, 2.0, 3.0]);
    let step_grid = 4 * ((grid.max(5) - 1) / 4) + 1;
    let step_report = hk_bound_check(&step, &ramp(0.0), &steps, step_grid, &step_quad, tol.hk)?;
    if let Some(c) = step_report.cases.last() {
        report.push(Case::at_least("hk step x ramp strict", c.rhs - c.lhs, f64::MIN_POSITIVE, 0.0));
    }
    checks.push(step_report);

    let wide = BVBox::new(vec![-4.0], vec![4.0])?;
    let multipliers = [ramp(-4.0), quadratic(-4.0), half_angle(-4.0), product_bump(&[0.0], 2.0, 1.0)];
    for family in FAMILIES {
        let f = cfg.catalog.build(family, 1)?;
        for g in &multipliers {
            checks.push(hk_bound_check(&f, g, &wide, grid, quad, tol.hk)?);
        }
    }

    let sq = BVBox::new(vec![0.0, 0.0], vec![2.0, 2.0])?;
    let sc = FieldSampler::scalar(2, "sin(x)cos(y)", |x| Complex64::new(x[0].sin() * x[1].cos(), 0.0));
    checks.push(hk_bound_check(&sc, &bilinear([0.0, 0.0]), &sq, grid, quad, tol.hk)?);
    let sq2 = BVBox::new(vec![-1.0, -1.0], vec![1.0, 1.0])?;
    let g2 = crate::sd_space::catalog::gaussian(2, 0.0, 1.0, 1.0);
    checks.push(hk_bound_check(&g2, &bilinear([-1.0, -1.0]), &sq2, grid, quad, tol.hk)?);

    for r in checks {
        report.converged &= r.converged;
        report.cases.extend(r.cases);
    }
    report.note(format!("Alexiewicz norm: sup over all grid-aligned sub-boxes, grid {grid} per axis in 1D and at most {MAX_GRID_2D} in 2D; a lower bound of the sup"));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alexiewicz_of_sin_over_two_pi() {
        let b = BVBox::new(vec![0.0], vec![2.0 * PI]).unwrap();
        let (a, _) = alexiewicz_norm(&sin_field(), &b, 129, &QuadConfig::default()).unwrap();
        assert!((a - 2.0).abs() < 1e-9, "{a}");
    }

    #[test]
    fn sin_times_ramp_bound() {
        let b = BVBox::new(vec![0.0], vec![2.0 * PI]).unwrap();
        let r = hk_bound_check(&sin_field(), &ramp(0.0), &b, 129, &QuadConfig::default(), 1e-9).unwrap();
        assert!(r.passed());
        let c = r.cases.last().unwrap();
        assert!((c.lhs - 2.0 * PI).abs() < 1e-9);
        assert!((c.rhs - 4.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn precondition_flags_nonvanishing_multiplier() {
        let b = BVBox::new(vec![0.0], vec![1.0]).unwrap();
        let g = ramp(-1.0);
        let r = hk_bound_check(&sin_field(), &g, &b, 33, &QuadConfig::default(), 1e-9).unwrap();
        assert!(!r.cases[0].pass);
    }
}
