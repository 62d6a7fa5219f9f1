//! Kernel identities and lattice bookkeeping.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Case, VerificationReport, VerifyConfig, VerifyError};
use crate::indexing::{inverse_serpentine, level_weight, serpentine_index, weight_sum, TestFunctionalSpec};
use crate::jones_kernel::{alpha, eval_e, eval_h_closed, eval_h_quad, gamma, mollifier_eval, xi_closed, xi_mollified, JonesParams};
use crate::quadrature::{integrate_interval, QuadConfig};

const WINDOW_SCALES: [f64; 3] = [2.0, 3.0, 6.0];

/// Listed opening of the pairing order.
pub(crate) const LISTED_PREFIX: [(u64, u64); 8] = [(1, 1), (2, 1), (1, 2), (1, 3), (2, 2), (3, 1), (3, 2), (2, 3)];

pub(super) fn jones_suite(cfg: &VerifyConfig) -> Result<VerificationReport, VerifyError> {
    let tol = &cfg.tolerances;
    let mut report = VerificationReport::new("jones_kernel");

    // h by quadrature against the closed form on 25 points strictly inside each window.
    for a in WINDOW_SCALES {
        let w = PI / (2.0 * a);
        for j in -12i32..=12 {
            let x = w * j as f64 / 13.0;
            let q = eval_h_quad(x, a, 1e-11)?;
            let closed = Complex64::from_polar(gamma(1.0 / a + 1.0), -x);
            report.push(Case::residual(
                format!("h_quad a={a} x={x:.6}"),
                q.value.norm(),
                closed.norm(),
                (q.value - closed).norm(),
                tol.jones_identity,
            ));
        }
    }

    // h' = -i h by central differences of the quadrature.
    let step = 1e-3;
    for a in WINDOW_SCALES {
        let w = PI / (2.0 * a);
        for j in -4i32..=4 {
            let x = 0.8 * w * j as f64 / 5.0;
            let plus = eval_h_quad(x + step, a, 1e-11)?.value;
            let minus = eval_h_quad(x - step, a, 1e-11)?.value;
            let h = eval_h_quad(x, a, 1e-11)?.value;
            let fd = (plus - minus) / (2.0 * step);
            let target = -Complex64::i() * h;
            report.push(Case::residual(format!("h' = -ih a={a} x={x:.6}"), fd.norm(), target.norm(), (fd - target).norm(), tol.jones_derivative));
        }
    }

    // Closed form vanishes outside the open window.
    for a in WINDOW_SCALES {
        let edge = PI / (2.0 * a);
        let v = eval_h_closed(edge, a)?.norm();
        report.push(Case::within(format!("h_closed at window edge a={a}"), v, 0.0, 0.0));
    }

    let quad = QuadConfig::default().with_tol(1e-13).with_breakpoints(vec![0.0]);
    for k in 1..=10u32 {
        let p = JonesParams::new(k)?;
        let mass = integrate_interval(|u| Complex64::new(mollifier_eval(k, u).unwrap_or(0.0), 0.0), -p.eps, p.eps, &quad)?;
        report.push(Case::within(format!("mollifier mass k={k}"), mass.value.re, 1.0, tol.mollifier_mass));
    }

    // α_k is real and increases to 1 as the window shrinks.
    let mut prev = 0.0;
    for k in 1..=12u32 {
        let a = alpha(k, 1e-15)?;
        let eps = JonesParams::new(k)?.eps;
        report.push(Case::within(format!("alpha imaginary part k={k}"), a.im, 0.0, 1e-14));
        report.push(Case::at_most(format!("alpha increasing k={k}"), prev, a.re, 0.0));
        report.push(Case::at_most(format!("alpha between cos(eps) and 1 k={k}"), eps.cos(), a.re, 0.0));
        report.push(Case::at_most(format!("alpha at most 1 k={k}"), a.re, 1.0, 0.0));
        prev = a.re;
    }

    // Mollified and closed windows agree on |u| <= ε_k.
    for k in 1..=6u32 {
        let eps = JonesParams::new(k)?.eps;
        let mut worst: f64 = 0.0;
        for j in -20i32..=20 {
            let u = eps * j as f64 / 20.0;
            for n in 1..=3usize {
                let m = xi_mollified(u, k, n, 1e-13)?;
                worst = worst.max((m - xi_closed(u, k, n)).norm());
            }
        }
        report.push(Case::residual(format!("xi mollified vs closed, inner region k={k}"), worst, 0.0, worst, tol.xi_agreement));
    }

    // Support radius 3ε_k = π/2^{k+1}, and the mollified window vanishes there.
    for k in 1..=12u32 {
        let eps = JonesParams::new(k)?.eps;
        let radius = 3.0 * eps;
        let exact = PI / 2f64.powi(k as i32 + 1);
        report.push(Case::within(format!("support radius k={k}"), radius, exact, 2.0 * f64::EPSILON * exact));
        let at_edge = xi_mollified(exact, k, 1, 1e-13)?.norm();
        report.push(Case::within(format!("xi_mollified at 3eps k={k}"), at_edge, 0.0, 0.0));
        let beyond = xi_mollified(exact * (1.0 + 1e-12), k, 1, 1e-13)?.norm();
        report.push(Case::within(format!("xi_mollified beyond 3eps k={k}"), beyond, 0.0, 0.0));
    }
    for k in 1..=4u32 {
        let eps = JonesParams::new(k)?.eps;
        let inside = xi_mollified(3.0 * eps * (1.0 - 1e-3), k, 1, 1e-13)?.norm();
        report.push(Case::reported(format!("xi_mollified just inside 3eps k={k}"), inside, 0.0));
    }

    // |E_m(x)| <= 1/sqrt(n) everywhere.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for n in 1..=3usize {
        let center = crate::indexing::enumerate_centers(n, 1.0, 1)?.remove(0);
        let mut worst: f64 = 0.0;
        for k in 1..=6u32 {
            let spec = TestFunctionalSpec::new(1, k, 1, center.clone());
            for _ in 0..2000 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.6..0.6)).collect();
                let e = eval_e(&spec, &x)?;
                worst = worst.max(e.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
            }
        }
        let bound = 1.0 / (n as f64).sqrt();
        report.push(Case::at_most(format!("|E| <= 1/sqrt(n) n={n}"), worst, bound, 1e-15));
    }

    report.note("h_quad uses tol 1e-11 on the half line; the derivative check uses a central step of 1e-3");
    Ok(report)
}

pub(super) fn indexing_suite(cfg: &VerifyConfig) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new("indexing");
    for (pos, &(k, i)) in LISTED_PREFIX.iter().enumerate() {
        let m = pos as u64 + 1;
        let got = serpentine_index(m)?;
        let hit = if got == (k, i) { 0.0 } else { 1.0 };
        report.push(Case::residual(format!("prefix m={m} -> ({k},{i})"), got.0 as f64 * 1000.0 + got.1 as f64, k as f64 * 1000.0 + i as f64, hit, 0.0));
    }
    let nine = serpentine_index(9)?;
    report.push(Case::residual("m=9 -> (1,4)", nine.0 as f64, 1.0, if nine == (1, 4) { 0.0 } else { 1.0 }, 0.0));
    let ten = inverse_serpentine(4, 1)?;
    report.push(Case::within("(4,1) -> m=10", ten as f64, 10.0, 0.0));

    for k_max in 1..=30u32 {
        let s = weight_sum(k_max);
        let exact = 1.0 - level_weight(k_max);
        report.push(Case::within(format!("weight sum K={k_max}"), s, exact, 0.0));
    }

    let mut mismatches = 0u64;
    for m in 1..=100_000u64 {
        let (k, i) = serpentine_index(m)?;
        if inverse_serpentine(k, i)? != m {
            mismatches += 1;
        }
    }
    report.push(Case::within("round trip m <= 1e5 (mismatch count)", mismatches as f64, 0.0, 0.0));

    // Enumeration is a pure function of its arguments.
    for n in 1..=3usize {
        let trunc = &cfg.truncation;
        let a = crate::indexing::functional_specs(n, trunc.box_radius, trunc.k_max, trunc.m_max.min(500))?;
        let b = crate::indexing::functional_specs(n, trunc.box_radius, trunc.k_max, trunc.m_max.min(500))?;
        let same = a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.center == y.center && x.m == y.m);
        report.push(Case::within(format!("enumeration repeatable n={n}"), if same { 0.0 } else { 1.0 }, 0.0, 0.0));
        let eps_ok = a.iter().all(|s| s.eps == PI / (4.0 * s.a_k) && s.cube_edge == 4.0 * s.eps);
        report.push(Case::within(format!("spec constants consistent n={n}"), if eps_ok { 0.0 } else { 1.0 }, 0.0, 0.0));
    }
    Ok(report)
}
