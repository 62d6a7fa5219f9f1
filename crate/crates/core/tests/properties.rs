//! Randomized invariants across the public API.

use num_complex::Complex64;
use proptest::prelude::*;
use sdspace::indexing::{inverse_serpentine, serpentine_index, weight_sum};
use sdspace::jones_kernel::{eval_h_closed, gamma, xi_closed};
use sdspace::quadrature::{integrate_interval, pairwise_sum_real, QuadConfig};
use sdspace::sd_space::catalog::product_bump;
use sdspace::sd_space::{sd_inner, sd_norm, Exponent, FieldSampler, TruncationConfig};

fn small() -> TruncationConfig {
    TruncationConfig { k_max: 4, m_max: 40, box_radius: 3.0, ..Default::default() }
}

fn bump(c: f64, r: f64, re: f64, im: f64) -> FieldSampler {
    let amp = Complex64::new(re, im);
    let base = product_bump(&[c], r, 1.0);
    let support = base.support().cloned().unwrap();
    FieldSampler::new(1, 1, "bump", move |x, out| out[0] = amp * base.eval(x)[0]).with_support(support)
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![Just(Exponent::Finite(1.0)), Just(Exponent::Finite(2.0)), Just(Exponent::Finite(3.5)), Just(Exponent::Infinity)]
}

proptest! {
    #[test]
    fn serpentine_round_trips(m in 1u64..5_000_000) {
        let (k, i) = serpentine_index(m).unwrap();
        prop_assert!(k >= 1 && i >= 1);
        prop_assert_eq!(inverse_serpentine(k, i).unwrap(), m);
    }

    #[test]
    fn weight_sums_are_exact_and_increasing(k in 1u32..52) {
        prop_assert_eq!(weight_sum(k), 1.0 - 2f64.powi(-(k as i32)));
        prop_assert!(weight_sum(k + 1) > weight_sum(k));
    }

    #[test]
    fn xi_closed_has_modulus_one_over_n_inside_the_window(k in 1u32..20, n in 1usize..5, t in -1.0f64..1.0) {
        let eps = std::f64::consts::PI / (12.0 * 2f64.powi(k as i32 - 1));
        let inside = xi_closed(t * eps, k, n);
        prop_assert!((inside.norm() - 1.0 / n as f64).abs() <= 1e-15);
        let outside = eps * (1.0 + 1e-9) * (1.0 + t.abs()) * if t < 0.0 { -1.0 } else { 1.0 };
        prop_assert_eq!(xi_closed(outside, k, n), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn h_closed_has_gamma_modulus(a in prop::sample::select(vec![2.0, 3.0, 6.0]), t in -0.99f64..0.99) {
        let x = t * std::f64::consts::PI / (2.0 * a);
        let h = eval_h_closed(x, a).unwrap();
        prop_assert!((h.norm() - gamma(1.0 / a + 1.0)).abs() <= 1e-14);
    }

    #[test]
    fn quadrature_integrates_cubics_exactly(c0 in -2.0f64..2.0, c3 in -2.0f64..2.0, a in -3.0f64..0.0, b in 0.0f64..3.0) {
        let r = integrate_interval(|x| Complex64::new(c0 + c3 * x * x * x, 0.0), a, b, &QuadConfig::default()).unwrap();
        let exact = c0 * (b - a) + c3 * (b.powi(4) - a.powi(4)) / 4.0;
        prop_assert!((r.value.re - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn pairwise_sum_is_order_stable_for_exact_values(v in prop::collection::vec(-1000i32..1000, 0..200)) {
        let xs: Vec<f64> = v.iter().map(|&x| x as f64).collect();
        prop_assert_eq!(pairwise_sum_real(&xs), v.iter().map(|&x| x as f64).sum::<f64>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn norm_is_nonnegative_and_homogeneous(c in -2.0f64..2.0, r in 0.2f64..1.0, s in 0.25f64..4.0, p in exponent()) {
        let trunc = small();
        let f = bump(c, r, 1.0, 0.0);
        let g = bump(c, r, s, 0.0);
        let scaled = TruncationConfig { quad: trunc.quad.clone().with_tol(trunc.quad.abs_tol * s), ..trunc.clone() };
        let nf = sd_norm(&f, p, &trunc).unwrap().value;
        let ng = sd_norm(&g, p, &scaled).unwrap().value;
        prop_assert!(nf >= 0.0);
        prop_assert!((ng - s * nf).abs() <= 1e-12 * s * nf + 1e-15);
    }

    #[test]
    fn triangle_inequality(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, r in 0.2f64..1.0, im in -1.0f64..1.0, p in exponent()) {
        let trunc = small();
        let f = bump(c1, r, 1.0, 0.0);
        let g = bump(c2, r, 0.5, im);
        let sum = f.sum(&g).unwrap();
        let lhs = sd_norm(&sum, p, &trunc).unwrap();
        let a = sd_norm(&f, p, &trunc).unwrap();
        let b = sd_norm(&g, p, &trunc).unwrap();
        prop_assert!(lhs.value <= a.value + b.value + 1e-9);
    }

    #[test]
    fn inner_product_is_hermitian_and_bounded(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, im in -1.0f64..1.0) {
        let trunc = small();
        let f = bump(c1, 0.5, 1.0, 0.0);
        let g = bump(c2, 0.7, 0.3, im);
        let fg = sd_inner(&f, &g, &trunc).unwrap().value;
        let gf = sd_inner(&g, &f, &trunc).unwrap().value;
        prop_assert_eq!(fg, gf.conj());
        let two = Exponent::Finite(2.0);
        let bound = sd_norm(&f, two, &trunc).unwrap().value * sd_norm(&g, two, &trunc).unwrap().value;
        prop_assert!(fg.norm() <= bound * (1.0 + 1e-12) + 1e-15);
    }
}
