use fracrisk::processes::RateFunction;
use fracrisk::risk::*;
use fracrisk::sampling::RngStream;
use fracrisk::specfun::gamma;
use fracrisk::stats::{covariance, Summary};
use fracrisk::McConfig;
use proptest::prelude::*;

fn exp_model(u: f64, rho: f64, lambda: f64, alpha: f64) -> RiskModel {
    RiskModel::new(
        u,
        1.0,
        rho,
        lambda,
        alpha,
        ClaimLaw::exponential(1.0).unwrap(),
    )
    .unwrap()
}

fn paths(m: &RiskModel, grid: &[f64], n: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            simulate_risk_path(m, grid, None, &mut RngStream::new(seed, i as u64).rng()).unwrap()
        })
        .collect()
}

#[test]
fn classical_formula() {
    assert!(
        (classical_ruin_exponential(0.0, 0.1, 1.0) - 0.909_090_909_090_909_090_91).abs() < 1e-15
    );
    assert!(classical_ruin_exponential(1e4, 0.1, 1.0) < 1e-300);
    assert_eq!(classical_ruin_exponential(3.0, 0.0, 1.0), 1.0);
}

#[test]
fn capital_formulas() {
    assert!((bailout_capital_limit(0.0, 0.1, 1.0, 2.0).unwrap() - 10.0).abs() < 1e-12);
    assert!((bailout_capital_limit(-3.0, 0.1, 1.0, 2.0).unwrap() - 13.0).abs() < 1e-12);
    assert!((proportional_hazard_capital(0.5, 0.1, 1.0, 2.0).unwrap() - 20.0).abs() < 1e-12);
    assert!(proportional_hazard_capital(1.5, 0.1, 1.0, 2.0).is_err());
    assert!(bailout_capital_limit(0.0, 0.0, 1.0, 2.0).is_err());
    assert!((diffusion_drift(0.1, 1.0, 2.0) - 0.05).abs() < 1e-15);
    assert_eq!(diffusion_drift(0.0, 1.0, 2.0), 0.0);
}

#[test]
fn early_time_premium_stress() {
    assert!((mean_clock(0.5, 0.1) - 0.356_824_823_230_554_222_91).abs() < 1e-15);
    assert!(mean_clock(0.5, 0.1) > 0.1);
    let t = clock_crossing_time(0.5).unwrap();
    // Γ(1.5)^{-2} = 4/π
    assert!((t - 1.273_239_544_735_162_686_15).abs() < 1e-14);
    assert!((mean_clock(0.5, t) - t).abs() < 1e-14);
    assert!(mean_clock(0.5, 0.785_398_163_397_448_309_62) > 0.785_398_163_397_448_309_62);
    assert!(mean_clock(0.5, 2.0) < 2.0);
}

#[test]
fn covariance_closed_forms() {
    let m = exp_model(0.0, 0.1, 1.0, 1.0);
    assert!((risk_cov(&m, 1.0, 1.0).unwrap() - 2.0).abs() < 1e-14);
    let m = exp_model(0.0, 0.0, 1.5, 0.6);
    let want = 1.5 * 2.0 * 0.7f64.powf(0.6) / gamma(1.6);
    assert!((risk_cov(&m, 0.7, 3.0).unwrap() - want).abs() < 1e-13);
    let m = exp_model(0.0, 0.2, 1.0, 0.5);
    assert!((risk_cov(&m, 1.0, 2.0).unwrap() - 2.290_197_819_793_159_915_95).abs() < 1e-12);
    assert_eq!(
        risk_cov(&m, 2.0, 1.0).unwrap(),
        risk_cov(&m, 1.0, 2.0).unwrap()
    );
    assert_eq!(risk_var(&m, 2.0).unwrap(), risk_cov(&m, 2.0, 2.0).unwrap());
}

#[test]
fn claim_law_mgf_by_quadrature() {
    let ln = ClaimLaw::lognormal(0.0, 0.5).unwrap();
    assert!((ln.mgf(-1.0).unwrap() - 0.369_873_840_565_377_482_34).abs() < 1e-10);
    let p = ClaimLaw::pareto(3.0, 1.0).unwrap();
    assert!((p.mgf(-0.5).unwrap() - 0.495_728_477_575_044_194_92).abs() < 1e-10);
    let r = ClaimLaw::point(1.0)
        .unwrap()
        .adjustment_coefficient(0.2)
        .unwrap();
    assert!((r - 0.354_199_262_289_134_525_42).abs() < 1e-12);
    let e = ClaimLaw::exponential(2.0).unwrap();
    assert!((e.adjustment_coefficient(0.1).unwrap() - 0.1 / 2.2).abs() < 1e-15);
}

#[test]
fn martingale_drift_sign_pattern() {
    let n = 100_000;
    for &rho in &[-0.1, 0.0, 0.2] {
        let m = exp_model(3.0, rho, 1.0, 0.7);
        let r: Vec<f64> = paths(&m, &[2.0], n, 11)
            .iter()
            .map(|p| p[0] - m.u)
            .collect();
        let s = Summary::of(&r);
        let want = risk_mean(&m, 2.0).unwrap() - m.u;
        assert!(
            (s.mean - want).abs() < 3.0 * s.se(),
            "rho={rho}: {} vs {want}",
            s.mean
        );
        assert_eq!(want.partial_cmp(&0.0), rho.partial_cmp(&0.0));
    }
}

#[test]
fn grid_clock_path_agrees_on_mean() {
    let m = exp_model(0.0, 0.2, 1.0, 0.7);
    let r: Vec<f64> = (0..20_000)
        .map(|i| {
            simulate_risk_path(&m, &[2.0], Some(1e-3), &mut RngStream::new(12, i).rng()).unwrap()[0]
        })
        .collect();
    let s = Summary::of(&r);
    assert!((s.mean - risk_mean(&m, 2.0).unwrap()).abs() < 3.0 * s.se() + 1e-3);
}

#[test]
fn classical_clock_variance() {
    let m = exp_model(0.0, 0.3, 2.0, 1.0);
    let r: Vec<f64> = paths(&m, &[1.5], 100_000, 13)
        .iter()
        .map(|p| p[0])
        .collect();
    let s = Summary::of(&r);
    assert!((s.var - 2.0 * 2.0 * 1.5).abs() < 3.0 * Summary::var_se(&r));
    // Simplified and coupled surplus coincide in law at alpha = 1.
    let simple: Vec<f64> = (0..100_000)
        .map(|i| simulate_simplified_path(&m, &[1.5], &mut RngStream::new(14, i).rng()).unwrap()[0])
        .collect();
    let t = Summary::of(&simple);
    assert!((t.mean - s.mean).abs() < 3.0 * (t.se().powi(2) + s.se().powi(2)).sqrt());
}

#[test]
fn risk_covariance_by_simulation() {
    let m = exp_model(0.0, 0.2, 1.0, 0.5);
    let p = paths(&m, &[1.0, 2.0], 100_000, 15);
    let a: Vec<f64> = p.iter().map(|v| v[0]).collect();
    let b: Vec<f64> = p.iter().map(|v| v[1]).collect();
    let want = risk_cov(&m, 1.0, 2.0).unwrap();
    assert!((covariance(&a, &b) / want - 1.0).abs() < 0.05);
}

#[test]
fn compound_claims_moments() {
    // The simplified surplus has a deterministic premium, so its fluctuations are the claims.
    let m = exp_model(0.0, 0.0, 1.0, 0.5);
    let grid = [1.0, 2.0];
    let p: Vec<Vec<f64>> = (0..100_000)
        .map(|i| simulate_simplified_path(&m, &grid, &mut RngStream::new(16, i).rng()).unwrap())
        .collect();
    let claims = |j: usize| -> Vec<f64> {
        let prem = m.premium_rate() * mean_clock(0.5, grid[j]);
        p.iter().map(|v| prem - v[j]).collect()
    };
    let s2 = Summary::of(&claims(1));
    assert!((s2.mean - mean_clock(0.5, 2.0)).abs() < 3.0 * s2.se());
    let cov = covariance(&claims(0), &claims(1));
    assert!((cov / compound_claims_cov(&m, 1.0, 2.0).unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn lrd_of_the_surplus() {
    let t_list = [100.0, 300.0, 1000.0, 3000.0, 10_000.0];
    let m = exp_model(0.0, 1.0, 10.0, 0.5);
    let r = lrd_check(&m, 1.0, &t_list, 20_000, &McConfig::new(17)).unwrap();
    assert!(
        (r.closed_form_slope + 0.5).abs() < 0.03,
        "{}",
        r.closed_form_slope
    );
    assert!((r.slope + 0.5).abs() < 0.15, "{}", r.slope);
}

#[test]
fn ruin_matches_classical_for_both_clocks() {
    let cfg = McConfig::new(18);
    for &a in &[1.0, 0.6] {
        let m = exp_model(0.0, 0.1, 1.0, a);
        let curve = ruin_curve(
            &m,
            &[0.0, 2.0, 5.0],
            0.0,
            Horizon::Finite(1e8),
            30_000,
            &cfg,
        )
        .unwrap();
        for (est, u) in curve.iter().zip([0.0, 2.0, 5.0]) {
            assert!(
                (est.probability - classical_ruin_exponential(u, 0.1, 1.0)).abs() < 0.015,
                "alpha={a} u={u}"
            );
            assert_eq!(est.truncation_bound, LUNDBERG_EPS);
        }
    }
    let far = ruin_probability(
        &exp_model(200.0, 0.1, 1.0, 0.6),
        0.0,
        Horizon::Infinite,
        2000,
        &cfg,
    )
    .unwrap();
    assert_eq!(far.probability, 0.0);
}

#[test]
fn point_claims_use_the_block_path() {
    let law = ClaimLaw::point(1.0).unwrap();
    let r = law.adjustment_coefficient(0.2).unwrap();
    let m = RiskModel::with_claims(0.0, 0.2, 1.0, 1.0, law).unwrap();
    let s = simulate_minima(&m, Horizon::Infinite, 40_000, &McConfig::new(19)).unwrap();
    // psi(0) = 1/(1 + rho) for every claim law; Lundberg bounds the rest.
    let p0 = s.ruin(0.0, 0.0, None).unwrap();
    assert!((p0.probability - 1.0 / 1.2).abs() < 3.0 * p0.std_error() + LUNDBERG_EPS);
    for u in [2.0, 5.0] {
        assert!(s.ruin(u, 0.0, None).unwrap().probability <= (-r * u).exp());
    }
}

#[test]
fn monotone_in_capital_and_horizon() {
    let m = exp_model(0.0, 0.1, 1.0, 0.7);
    let s = simulate_minima(&m, Horizon::Finite(500.0), 5000, &McConfig::new(21)).unwrap();
    let mut prev = 1.0;
    for u in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let p = s.ruin(u, 0.0, None).unwrap().probability;
        assert!(p <= prev);
        prev = p;
    }
    let mut prev = 0.0;
    for t in [1.0, 10.0, 100.0, 500.0] {
        let p = s.ruin(1.0, 0.0, Some(t)).unwrap().probability;
        assert!(p >= prev);
        prev = p;
    }
    assert!(matches!(
        s.ruin(1.0, 0.0, Some(600.0)),
        Err(fracrisk::Error::Horizon { .. })
    ));
}

#[test]
fn infinite_horizon_preconditions() {
    let cfg = McConfig::new(22);
    let m = exp_model(0.0, 0.0, 1.0, 1.0);
    assert!(matches!(
        ruin_probability(&m, 0.0, Horizon::Infinite, 10, &cfg),
        Err(fracrisk::Error::Precondition(_))
    ));
    let heavy =
        RiskModel::with_claims(0.0, 0.2, 1.0, 1.0, ClaimLaw::lognormal(0.0, 1.0).unwrap()).unwrap();
    assert!(ruin_probability(&heavy, 0.0, Horizon::Infinite, 10, &cfg).is_err());
    let r = ruin_probability(&heavy, 0.0, Horizon::Finite(50.0), 2000, &cfg).unwrap();
    assert!(r.probability > 0.0 && r.truncation_bound == 0.0);
    assert!(RiskModel::new(0.0, 2.0, 0.1, 1.0, 1.0, ClaimLaw::exponential(1.0).unwrap()).is_err());
}

#[test]
fn bailout_capital_diffusion_regime() {
    let m = exp_model(0.0, 0.1, 1.0, 1.0)
        .diffusion_scaled(200.0)
        .unwrap();
    let s = simulate_minima(&m, Horizon::Infinite, 20_000, &McConfig::new(23)).unwrap();
    let k0 = s.capital(0.0, 0.0).unwrap();
    let k5 = s.capital(5.0, 0.0).unwrap();
    assert!((k0.kappa / 10.0 - 1.0).abs() < 0.05, "{}", k0.kappa);
    assert!(
        (k5.kappa - k0.kappa).abs() < 3.0 * (k0.std_error.powi(2) + k5.std_error.powi(2)).sqrt()
    );
    for k in [k0, k5] {
        assert!((k.kappa_integral / k.kappa - 1.0).abs() < 1e-3);
        assert!((k.kappa_avar / k.kappa - 1.0).abs() < 1e-9);
    }
    let shortfalls = s.shortfalls(0.0, 0.0);
    assert_eq!(shortfalls.len(), k0.n_ruined);
    let ph = proportional_hazard_empirical(&shortfalls, 0.5).unwrap();
    assert!((ph / (2.0 * k0.kappa) - 1.0).abs() < 0.05);
}

#[test]
fn capital_needs_ruined_paths() {
    let m = exp_model(1e3, 0.5, 1.0, 1.0);
    let err = bailout_capital(&m, 0.0, Horizon::Finite(10.0), 100, &McConfig::new(24)).unwrap_err();
    assert!(matches!(err, fracrisk::Error::Conditioning(_)));
}

#[test]
fn brownian_infimum_law() {
    let cfg = McConfig::new(25);
    let p = brownian_inf_law_check(0.05, 1.0, 0.0, 20_000, 1.0, 800.0, &cfg).unwrap();
    assert!(
        (p - brownian_inf_probability(0.05, 1.0, 0.0)).abs() < 0.01,
        "{p}"
    );
    assert_eq!(
        brownian_inf_law_check(0.05, 1.0, 1.0, 10, 1.0, 8.0, &cfg).unwrap(),
        1.0
    );
    let strong = brownian_inf_law_check(20.0, 1.0, 0.0, 2000, 0.01, 10.0, &cfg).unwrap();
    assert!(strong < 0.01);
}

#[test]
fn diffusion_limit_tightens() {
    let m = exp_model(0.0, 0.1, 1.0, 1.0);
    let d = diffusion_limit_check(&m, &[10.0, 100.0, 1000.0], 1.0, 200_000, &McConfig::new(26))
        .unwrap();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert!(diffusion_limit_check(
        &exp_model(0.0, 0.1, 1.0, 0.5),
        &[10.0],
        1.0,
        10,
        &McConfig::new(26)
    )
    .is_err());
}

#[test]
fn nonhomogeneous_reduction() {
    let cfg = McConfig::new(27);
    let m = exp_model(0.0, 0.1, 1.0, 0.7);
    let close = |r: &ReductionReport| {
        let se = (r.direct.std_error().powi(2) + r.reduced.std_error().powi(2)).sqrt();
        (r.direct.probability - r.reduced.probability).abs() < 3.0 * se
    };
    // Λ(t) = 2t is the homogeneous process at rate 2.
    let lin = nonhomogeneous_ruin_reduction(
        &m,
        &RateFunction::constant(2.0).unwrap(),
        0.0,
        1.0,
        40_000,
        &cfg,
    )
    .unwrap();
    assert!(close(&lin) && lin.warning.is_none());
    let hom = exp_model(0.0, 0.1, 2.0, 0.7);
    let h = simulate_minima(&hom, Horizon::Finite(1.0), 40_000, &cfg.derived(1))
        .unwrap()
        .ruin(0.0, 0.0, None)
        .unwrap();
    assert!(
        (h.probability - lin.direct.probability).abs()
            < 3.0 * (h.std_error().powi(2) + lin.direct.std_error().powi(2)).sqrt()
    );

    let sq = nonhomogeneous_ruin_reduction(
        &m,
        &RateFunction::power(1.0, 2.0).unwrap(),
        0.0,
        1.0,
        40_000,
        &cfg,
    )
    .unwrap();
    assert!(close(&sq), "{sq:?}");
    let m1 = exp_model(0.0, 0.1, 1.0, 1.0);
    let sq1 = nonhomogeneous_ruin_reduction(
        &m1,
        &RateFunction::power(1.0, 2.0).unwrap(),
        0.0,
        1.0,
        40_000,
        &cfg,
    )
    .unwrap();
    assert!(close(&sq1));

    let bounded = nonhomogeneous_ruin_reduction(
        &m,
        &RateFunction::saturating(3.0, 1.0).unwrap(),
        0.0,
        2.0,
        2000,
        &cfg,
    )
    .unwrap();
    assert!(bounded.warning.is_some());
}

#[test]
fn thread_count_does_not_matter() {
    let m = exp_model(0.0, 0.1, 1.0, 0.6);
    let a = ruin_curve(
        &m,
        &[0.0, 1.0],
        0.0,
        Horizon::Finite(1e6),
        3000,
        &McConfig::new(28).with_threads(1),
    )
    .unwrap();
    let b = ruin_curve(
        &m,
        &[0.0, 1.0],
        0.0,
        Horizon::Finite(1e6),
        3000,
        &McConfig::new(28).with_threads(3),
    )
    .unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ruin_nonincreasing_in_u(seed in 0u64..1000, rho in 0.05f64..1.0, alpha in 0.3f64..1.0) {
        let m = exp_model(0.0, rho, 1.0, alpha);
        let s = simulate_minima(&m, Horizon::Finite(200.0), 300, &McConfig::new(seed).with_threads(1)).unwrap();
        let ps: Vec<f64> = [0.0, 0.5, 1.0, 3.0].iter().map(|&u| s.ruin(u, 0.0, None).unwrap().probability).collect();
        prop_assert!(ps.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn half_width_formula(seed in 0u64..1000) {
        let m = exp_model(1.0, 0.3, 1.0, 1.0);
        let r = ruin_probability(&m, 0.0, Horizon::Infinite, 200, &McConfig::new(seed).with_threads(1)).unwrap();
        let p = r.probability;
        prop_assert!((r.half_width_95 - 1.96 * (p * (1.0 - p) / 200.0).sqrt()).abs() < 1e-15);
        let (lo, hi) = r.interval();
        prop_assert!(lo >= 0.0 && hi <= 1.0);
    }

    #[test]
    fn scaling_claims(mean in 0.1f64..10.0, c in 0.01f64..100.0) {
        let law = ClaimLaw::exponential(mean).unwrap().scaled(c).unwrap();
        prop_assert!((law.mean() - mean * c).abs() < 1e-12 * mean * c);
        let ln = ClaimLaw::lognormal(0.3, 0.7).unwrap();
        let s = ln.scaled(c).unwrap();
        prop_assert!((s.ex2() / ln.ex2() - c * c).abs() < 1e-9 * c * c);
    }

    #[test]
    fn diffusion_scaling_keeps_drift_and_variance(n in 1.0f64..1e4) {
        let m = exp_model(0.0, 0.1, 2.0, 1.0);
        let s = m.diffusion_scaled(n).unwrap();
        prop_assert!((s.lambda * s.mu * s.rho - m.lambda * m.mu * m.rho).abs() < 1e-12);
        prop_assert!((s.lambda * s.claims.ex2() - m.lambda * m.claims.ex2()).abs() < 1e-12);
    }
}
