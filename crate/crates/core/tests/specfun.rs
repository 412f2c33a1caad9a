//! Special-function values checked against 40-digit reference values.

use fracrisk::quad::{integrate, integrate_to_infinity, QuadOptions};
use fracrisk::specfun::*;
use fracrisk::Tolerance;
use proptest::prelude::*;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn close(a: f64, b: f64, eps: f64) -> bool {
    (a - b).abs() <= eps
}

#[test]
fn ml_reference_values() {
    let t = tol();
    let cases = [
        (0.5, -1.0, 0.427_583_576_155_807_004_41),
        (0.6, -2.0, 0.235_571_031_111_824_968_85),
        (0.5, 1.0, 5.008_980_080_762_283_466_3),
    ];
    for (a, z, v) in cases {
        let got = mittag_leffler(a, z, &t).unwrap();
        assert!(close(got, v, 1e-12), "E_{a}({z}) = {got}, want {v}");
    }
}

#[test]
fn ml_half_order_equals_e_erfc_one() {
    let e_erfc = std::f64::consts::E * statrs::function::erf::erfc(1.0);
    assert!(close(
        mittag_leffler(0.5, -1.0, &tol()).unwrap(),
        e_erfc,
        1e-8
    ));
}

#[test]
fn near_unit_order() {
    let t = tol();
    let a = mittag_leffler(0.999, -8.0, &t).unwrap();
    assert!(close(a, 5.119_669_014_045_613_428_1e-4, 1e-14), "{a}");
    let b = mittag_leffler(0.99, -20.0, &t).unwrap();
    assert!(close(b, 5.616_234_836_749_524_490_4e-4, 1e-14), "{b}");
    for eps in [1e-6, 1e-9, 1e-13] {
        let v = mittag_leffler(1.0 - eps, -8.0, &t).unwrap();
        assert!(close(v, (-8f64).exp(), eps + 1e-13), "eps={eps}: {v}");
    }
}

#[test]
fn generalized_ml_reference_values() {
    let t = tol();
    let p = MLParams::new(0.5, 2.0, 2.0).unwrap();
    assert!(close(
        generalized_ml(&p, -1.0, &t).unwrap(),
        0.299_204_409_060_294_430_51,
        1e-13
    ));
    let p = MLParams::new(0.5, 1.5, 2.0).unwrap();
    assert!(close(
        generalized_ml(&p, -1.0, &t).unwrap(),
        0.273_212_014_783_898_565_07,
        1e-13
    ));
    let p = MLParams::new(0.6, 1.0, 1.0).unwrap();
    assert_eq!(
        generalized_ml(&p, -2.0, &t).unwrap(),
        mittag_leffler(0.6, -2.0, &t).unwrap()
    );
    let p = MLParams::new(1.0, 1.0, 1.0).unwrap();
    assert!(close(
        generalized_ml(&p, 0.5, &t).unwrap(),
        0.5f64.exp(),
        1e-15
    ));
}

#[test]
fn derivative_matches_prabhakar_identity() {
    let t = tol();
    assert_eq!(
        ml_derivative(0.5, 0, -1.0, &t).unwrap(),
        mittag_leffler(0.5, -1.0, &t).unwrap()
    );
    assert!(close(
        ml_derivative(1.0, 3, 1.0, &t).unwrap(),
        std::f64::consts::E,
        1e-15
    ));
    let d1 = ml_derivative(0.5, 1, -1.0, &t).unwrap();
    assert!(close(d1, 0.273_212_014_783_898_565_07, 1e-12));
    // E^{(k)}_α(z) = k! E^{k+1}_{α, αk+1}(z)
    for k in 1..5u32 {
        let a = 0.7;
        let lhs = ml_derivative(a, k, -0.8, &t).unwrap();
        let p = MLParams::new(a, a * k as f64 + 1.0, k as f64 + 1.0).unwrap();
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let rhs = fact * generalized_ml(&p, -0.8, &t).unwrap();
        assert!(
            close(lhs, rhs, 1e-11 * rhs.abs().max(1.0)),
            "k={k}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn laplace_transform_of_ml() {
    let t = tol();
    for &a in &[0.5, 0.8] {
        for &s in &[0.5, 1.0, 2.0] {
            let f = |x: f64| (-s * x).exp() * mittag_leffler(a, -x.powf(a), &t).unwrap();
            let got = integrate_to_infinity(f, 0.0, QuadOptions::with_tol(1e-10, 1e-10))
                .unwrap()
                .value;
            let want = s.powf(a - 1.0) / (1.0 + s.powf(a));
            assert!(close(got, want, 1e-5), "alpha={a} s={s}: {got} vs {want}");
        }
    }
}

#[test]
fn laplace_transform_of_renewal_function() {
    for &a in &[0.3, 0.7] {
        for &s in &[0.5, 1.0, 2.0] {
            let f = |x: f64| (-s * x).exp() * renewal_function(a, x).unwrap();
            let got = integrate_to_infinity(f, 0.0, QuadOptions::default())
                .unwrap()
                .value;
            assert!(close(got, 1.0 / (s * s.powf(a)), 1e-6));
        }
    }
}

#[test]
fn stable_density_values() {
    let t = tol();
    assert!(close(
        stable_density(0.5, 1.0, &t).unwrap(),
        0.219_695_644_733_861_198_52,
        1e-12
    ));
    // leading tail term Γ(1+α) sin(πα)/(π x^{1+α})
    let x: f64 = 1e6;
    let lead = gamma(1.5) / (std::f64::consts::PI * x.powf(1.5));
    assert!(((stable_density(0.5, x, &t).unwrap() - lead) / lead).abs() < 1e-5);
}

#[test]
fn stable_density_normalised() {
    let t = tol();
    for &a in &[0.3, 0.5, 0.8] {
        // Substitute y = x^{-α}; dx = y^{-1/α-1}/α dy keeps both ends tame.
        let f = |y: f64| {
            let x = y.powf(-1.0 / a);
            stable_density(a, x, &t).unwrap() * y.powf(-1.0 / a - 1.0) / a
        };
        let total = integrate_to_infinity(f, 0.0, QuadOptions::with_tol(1e-10, 1e-10))
            .unwrap()
            .value;
        assert!(close(total, 1.0, 1e-6), "alpha={a}: {total}");
    }
}

#[test]
fn inverse_density_values_and_normalisation() {
    let t = tol();
    assert!(close(
        inverse_subordinator_density(0.5, 1.0, 0.0, &t).unwrap(),
        1.0 / std::f64::consts::PI.sqrt(),
        1e-14
    ));
    // Y_{1/2}(t) is half-normal with density exp(-x²/(4t))/sqrt(πt).
    for &x in &[0.1f64, 0.7, 2.0, 5.0] {
        let want = (-x * x / 4.0).exp() / std::f64::consts::PI.sqrt();
        assert!(close(
            inverse_subordinator_density(0.5, 1.0, x, &t).unwrap(),
            want,
            1e-11
        ));
    }
    for &a in &[0.3, 0.5, 0.8] {
        for &tt in &[0.5, 1.0, 5.0] {
            let f = |x: f64| inverse_subordinator_density(a, tt, x, &t).unwrap();
            let mass = integrate_to_infinity(f, 0.0, QuadOptions::with_tol(1e-10, 1e-10))
                .unwrap()
                .value;
            assert!(close(mass, 1.0, 1e-6), "alpha={a} t={tt}: {mass}");
        }
        let m = integrate_to_infinity(
            |x: f64| x * inverse_subordinator_density(a, 1.0, x, &t).unwrap(),
            0.0,
            QuadOptions::with_tol(1e-10, 1e-10),
        )
        .unwrap()
        .value;
        assert!(close(m, 1.0 / gamma(1.0 + a), 1e-5));
    }
}

#[test]
fn caputo_eigenfunction_residual() {
    let t = tol();
    let n = 1 << 12;
    for &a in &[0.5, 0.7] {
        let v: Vec<f64> = (0..=n)
            .map(|i| mittag_leffler(a, -(i as f64 / n as f64).powf(a), &t).unwrap())
            .collect();
        let d = caputo_derivative(&v, a, 1.0).unwrap();
        let residual = d + v[n];
        assert!(residual.abs() < 5e-3, "alpha={a}: residual {residual}");
        assert!(
            residual.abs() < 1e-5,
            "L1 scheme should be far better than required: {residual}"
        );
    }
}

#[test]
fn moment_and_covariance_values() {
    assert!(close(
        inv_sub_moment(0.5, 1.0, 1.0).unwrap(),
        std::f64::consts::FRAC_2_SQRT_PI,
        1e-14
    ));
    assert!(close(
        inv_sub_moment(0.9, 1.0, 3.0).unwrap(),
        2.794_729_538_469_519_936_9,
        1e-13
    ));
    assert!(close(d_alpha(0.5), 0.726_760_455_264_837_313_85, 1e-14));
    assert!(close(
        inv_sub_cov(0.5, 1.0, 2.0).unwrap(),
        0.835_987_140_053_369_203_97,
        1e-12
    ));
    assert!(close(
        inv_sub_cov(0.7, 1.4, 0.3).unwrap(),
        0.107_560_134_476_555_781_85,
        1e-12
    ));
}

#[test]
fn covariance_matches_direct_quadrature() {
    // First line of the covariance derivation: Cov = E[Y(s)Y(t)] - EY(s)EY(t) with
    // E[Y(s)Y(t)] = (1/(Γ(α)Γ(1+α))) ∫_0^s [(t-τ)^α + (s-τ)^α] τ^{α-1} dτ.
    let (a, s, t) = (0.6, 0.8, 2.5);
    let g = gamma(a) * gamma(1.0 + a);
    let f = |tau: f64| ((t - tau).powf(a) + (s - tau).powf(a)) * tau.powf(a - 1.0) / g;
    let cross = integrate(f, 0.0, s, QuadOptions::default()).unwrap().value;
    let direct = cross - (s * t).powf(a) / gamma(1.0 + a).powi(2);
    assert!(close(inv_sub_cov(a, s, t).unwrap(), direct, 1e-9));
}

#[test]
fn covariance_asymptotics() {
    let a: f64 = 0.5;
    let s: f64 = 1.0;
    let b = statrs::function::beta::beta(1.0 + a, a);
    // Cov(Y(s), Y(t)) tends to s^{2α} B(1+α, α) / (Γ(α)Γ(1+α)).
    let limit = s.powf(2.0 * a) * b / (gamma(a) * gamma(1.0 + a));
    let far = inv_sub_cov(a, s, 1e8).unwrap();
    assert!(((far - limit) / limit).abs() < 1e-3);
    // Correlation times t^α approaches s^α B(1+α, α)/(Γ(α)Γ(1+α) d(α)).
    let t = 1e3 * s;
    let corr = inv_sub_cov(a, s, t).unwrap()
        / (d_alpha(a) * s.powf(2.0 * a) * d_alpha(a) * t.powf(2.0 * a)).sqrt();
    let want = s.powf(a) * b / (gamma(a) * gamma(1.0 + a) * d_alpha(a));
    assert!(((corr * t.powf(a) - want) / want).abs() < 0.02);
}

#[test]
fn crossover_continuity_grid() {
    let t = tol();
    for i in 3..=9 {
        let a = i as f64 / 10.0;
        let z = ml_crossover(a, &t);
        let s = ml_series(a, -z, &t).unwrap();
        let q = ml_integral(a, z, &t).unwrap();
        assert!((s - q).abs() < 10.0 * t.abs_tol);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ml_is_a_survival_function(a in 0.05f64..1.0, x in 0.0f64..200.0, dx in 1e-3f64..5.0) {
        let t = tol();
        let e1 = mittag_leffler(a, -x, &t).unwrap();
        let e2 = mittag_leffler(a, -(x + dx), &t).unwrap();
        prop_assert!(e1 > 0.0 && e1 <= 1.0);
        prop_assert!(e2 < e1);
    }

    #[test]
    fn inverse_density_scaling(a in 0.2f64..0.9, tt in 0.1f64..10.0, x in 0.01f64..5.0) {
        let t = tol();
        let lhs = inverse_subordinator_density(a, tt, x, &t).unwrap();
        let rhs = tt.powf(-a) * inverse_subordinator_density(a, 1.0, x * tt.powf(-a), &t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1e-12));
    }

    #[test]
    fn covariance_is_symmetric_and_bounded(a in 0.1f64..1.0, s in 0.0f64..10.0, t in 0.0f64..10.0) {
        let c = inv_sub_cov(a, s, t).unwrap();
        prop_assert_eq!(c, inv_sub_cov(a, t, s).unwrap());
        let bound = (d_alpha(a) * s.powf(2.0 * a) * d_alpha(a) * t.powf(2.0 * a)).sqrt();
        prop_assert!(c <= bound * (1.0 + 1e-9) + 1e-12);
        prop_assert!(c >= -1e-12);
    }
}
