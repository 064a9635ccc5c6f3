use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;
use tqm_core::heisenberg::{max_abs, product_cocycle};
use tqm_core::maps::IntMatrix;
use tqm_core::propagate::kronecker_obstruction;
use tqm_core::quantize::unitarize;
use tqm_core::*;

fn fv(m: i64, n: i64) -> FrequencyVector {
    FrequencyVector::new(m, n)
}

fn symbol_strategy(max_modes: usize, max_freq: i64) -> impl Strategy<Value = FourierSymbol> {
    prop::collection::vec(((-max_freq..=max_freq), (-max_freq..=max_freq), -1.0f64..1.0, -1.0f64..1.0), 1..=max_modes)
        .prop_map(|modes| FourierSymbol::from_modes(modes.into_iter().map(|(m, n, re, im)| (fv(m, n), Complex64::new(re, im)))))
}

fn sl2_strategy() -> impl Strategy<Value = IntMatrix> {
    prop::sample::select(vec![
        [[1, 0], [0, 1]],
        [[2, 1], [3, 2]],
        [[2, 1], [1, 1]],
        [[0, -1], [1, 0]],
        [[1, 1], [0, 1]],
        [[1, 0], [1, 1]],
        [[3, 2], [4, 3]],
        [[-1, 0], [0, -1]],
        [[5, 2], [2, 1]],
    ])
}

fn map_strategy() -> impl Strategy<Value = AffineTorusMap> {
    (sl2_strategy(), 0i64..12, 1i64..12, 0i64..12, 1i64..12).prop_map(|(g, a, b, c, d)| {
        AffineTorusMap::new(g, [Rational64::new(a, b), Rational64::new(c, d)]).unwrap()
    })
}

fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn product_law_exhaustive_small_levels() {
    for n in 1..=16usize {
        let r = n as i64;
        let mut worst = 0.0_f64;
        for m1 in -r..=r {
            for n1 in -r..=r {
                let v = fv(m1, n1);
                let tv = Translation::new(n, v);
                for m2 in -r..=r {
                    for n2 in -r..=r {
                        let w = fv(m2, n2);
                        let tw = Translation::new(n, w);
                        let tvw = Translation::new(n, v + w);
                        let c = product_cocycle(n, v, w);
                        for row in 0..n {
                            let (mid, a) = tv.entry(row);
                            let (col, b) = tw.entry(mid);
                            let (col2, z) = tvw.entry(row);
                            assert_eq!(col, col2);
                            worst = worst.max((a * b - c * z).norm());
                        }
                    }
                }
            }
        }
        assert!(worst <= 1e-13, "N={n}: {worst}");
    }
}

#[test]
fn generators_have_order_n() {
    for n in 1..=16usize {
        let id = CMatrix::identity(n, n);
        assert!(max_abs(&(rep_u1(n).unwrap().pow(n as u64).into_matrix() - &id)) <= 1e-13);
        assert!(max_abs(&(rep_u2(n).unwrap().pow(n as u64).into_matrix() - &id)) <= 1e-13);
    }
}

proptest! {
    #[test]
    fn translations_are_unitary(n in 1usize..24, m in -60i64..60, s in -60i64..60) {
        let t = translation(n, fv(m, s)).unwrap();
        prop_assert!(t.unitarity_defect() <= 1e-13);
    }

    #[test]
    fn translations_have_period_two_n(n in 1usize..24, m in -30i64..30, s in -30i64..30) {
        let p = 2 * n as i64;
        let base = translation(n, fv(m, s)).unwrap().into_matrix();
        prop_assert_eq!(&translation(n, fv(m + p, s)).unwrap().into_matrix(), &base);
        prop_assert_eq!(&translation(n, fv(m, s + p)).unwrap().into_matrix(), &base);
    }

    #[test]
    fn adjoint_is_negation(n in 1usize..20, m in -30i64..30, s in -30i64..30) {
        let t = translation(n, fv(m, s)).unwrap();
        let neg = translation(n, fv(-m, -s)).unwrap();
        prop_assert!(max_abs(&(t.adjoint().into_matrix() - neg.into_matrix())) <= 1e-14);
    }

    #[test]
    fn symbol_automorphism_is_multiplicative(chi in map_strategy(), f in symbol_strategy(4, 3), g in symbol_strategy(4, 3)) {
        let lhs = symbol_automorphism(&chi, &f.multiply(&g));
        let rhs = symbol_automorphism(&chi, &f).multiply(&symbol_automorphism(&chi, &g));
        prop_assert!(lhs.max_coefficient_distance(&rhs) <= 1e-12);
    }

    #[test]
    fn kronecker_quantizable_iff_lattice_shift(n in 1usize..13, a in 0i64..8, b in 1i64..8, c in 0i64..8, d in 1i64..8) {
        let t = [Rational64::new(a, b), Rational64::new(c, d)];
        let integral = (t[0] * n as i64).is_integer() && (t[1] * n as i64).is_integer();
        let built = kronecker_propagator(n, t);
        prop_assert_eq!(built.is_ok(), integral);
        match kronecker_obstruction(n, t) {
            None => prop_assert!(integral),
            Some((_, phase)) => {
                prop_assert!(!integral);
                prop_assert!(phase != Rational64::from_integer(0));
            }
        }
    }

    #[test]
    fn form_factor_identity_random_unitaries(seed in 0u64..1000, n in 2usize..9, ell in 0u64..12) {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = CMatrix::from_fn(n, n, |_, _| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)));
        let u = unitarize(&WeylMatrix::general(m).unwrap()).unwrap();
        let a = form_factor(&u, ell).unwrap();
        let b = form_factor_via_automorphism(&u, ell);
        prop_assert!((a - b).abs() <= 1e-8 * a.max(1.0));
    }

    #[test]
    fn star_product_is_associative(n in 4usize..64, f in symbol_strategy(3, 2), g in symbol_strategy(3, 2), h in symbol_strategy(3, 2)) {
        let a = star_compose(n, &star_compose(n, &f, &g), &h);
        let b = star_compose(n, &f, &star_compose(n, &g, &h));
        let scale = 1.0 + a.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        prop_assert!(a.max_coefficient_distance(&b) <= 1e-10 * scale);
    }

    #[test]
    fn weyl_egorov_exact_for_level_quantizable_maps(chi in map_strategy(), f in symbol_strategy(3, 2)) {
        let n = (1..=24usize).find(|&n| is_quantizable_at_level(&chi, n as u64) && n >= 4);
        if let Some(n) = n {
            let p = toeplitz_propagator(n, &chi).unwrap();
            prop_assert!(egorov_residual(n, &p, &f, QuantizationScheme::Weyl).unwrap() <= 1e-9);
        }
    }
}

#[test]
fn weyl_and_toeplitz_converge_at_rate_one_over_n() {
    let f = &FourierSymbol::cosine(fv(1, 0)) + &FourierSymbol::sine(fv(1, 1));
    let levels = [32usize, 64, 128, 256];
    let diffs: Vec<f64> = levels
        .iter()
        .map(|&n| {
            let w = op_quantize(n, &f, QuantizationScheme::Weyl).unwrap().into_matrix();
            let t = op_quantize(n, &f, QuantizationScheme::Toeplitz).unwrap().into_matrix();
            max_abs(&(w - t))
        })
        .collect();
    let xs: Vec<f64> = levels.iter().map(|&n| n as f64).collect();
    let slope = log_log_slope(&xs, &diffs);
    assert!((slope + 1.0).abs() <= 0.1, "slope {slope}");
    let c = FourierSymbol::constant(Complex64::new(0.7, 0.0));
    let w = op_quantize(16, &c, QuantizationScheme::Weyl).unwrap();
    let t = op_quantize(16, &c, QuantizationScheme::Toeplitz).unwrap();
    assert_eq!(w.matrix(), t.matrix());
}

#[test]
fn toeplitz_spectral_inclusion() {
    let f = &FourierSymbol::cosine(fv(1, 0)) + &FourierSymbol::cosine(fv(1, 1)).scale(Complex64::new(0.5, 0.0));
    let grid = 512;
    let values: Vec<f64> = (0..grid * grid)
        .map(|i| evaluate(&f, [(i / grid) as f64 / grid as f64, (i % grid) as f64 / grid as f64]).re)
        .collect();
    let fmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let fmax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut previous = f64::INFINITY;
    for n in [64usize, 128] {
        let a = op_quantize(n, &f, QuantizationScheme::Toeplitz).unwrap().into_matrix();
        let eig = a.symmetric_eigen().eigenvalues;
        let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let eps = (fmin - lo).max(hi - fmax).max(0.0);
        assert!(eps <= 1e-3, "N={n} eps={eps}");
        assert!(eps <= previous);
        previous = eps;
    }
}

#[test]
fn normalized_clock_has_order_n() {
    for n in [4usize, 8, 16, 32] {
        let a = op_quantize(n, &FourierSymbol::exponential(fv(1, 0)), QuantizationScheme::Toeplitz).unwrap();
        let scaled = a.into_matrix() / Complex64::from(toeplitz_weight(n, fv(1, 0)));
        let w = WeylMatrix::general(scaled).unwrap();
        assert!(max_abs(&(w.pow(n as u64).into_matrix() - CMatrix::identity(n, n))) <= 1e-9);
    }
}

#[test]
fn toeplitz_egorov_decays_like_one_over_n() {
    let f = FourierSymbol::cosine(fv(1, 0));
    let levels = [32usize, 64, 128];
    let res: Vec<f64> = levels
        .iter()
        .map(|&n| {
            let p = cat_propagator(n, [[2, 1], [3, 2]], 0).unwrap();
            egorov_residual(n, &p, &f, QuantizationScheme::Toeplitz).unwrap()
        })
        .collect();
    let xs: Vec<f64> = levels.iter().map(|&n| n as f64).collect();
    let slope = log_log_slope(&xs, &res);
    assert!((slope + 1.0).abs() <= 0.15, "slope {slope}");
    // Leading term: the pulled-back mode (2,1) has weight ratio 1 − e^{−π(|v|²−|gᵀv|²)/(2N)} ≈ 2π/N.
    let predicted = 1.0 - (-PI * (5.0 - 1.0) / (2.0 * 128.0)).exp();
    assert!((res[2] - predicted).abs() <= 0.05 * predicted, "{} vs {predicted}", res[2]);
}
