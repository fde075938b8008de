mod common;

use std::f64::consts::{E, LN_2};

use cesaro::bounds::{
    berry_esseen_detail, berry_esseen_margin, erf, exp_poly_integral, exp_poly_integral_bound,
    normal_cdf, normal_quantile, normal_sf, NormalApprox, TailBoundParams,
};
use cesaro::Error;
use proptest::prelude::*;

use common::{gauss_kronrod, integrate_to_infinity};

fn reference() -> TailBoundParams {
    TailBoundParams {
        c0: 1.0,
        c1: 1.0,
        c2: 1.0,
        beta: 0.5,
        gamma: 1.0,
        delta: 0.75,
    }
}

fn quad_oracle(q: u32, a: f64, c: f64) -> f64 {
    let f = |u: f64| (-c * u).exp() * u.powi(q as i32);
    let cut = a + 40.0 / c;
    gauss_kronrod(&f, a, cut, 1e-14) + integrate_to_infinity(&f, cut, 1e-10)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn integral_small_cases() {
    assert!(rel(exp_poly_integral(0, 1.0, 1.0).unwrap(), 1.0 / E) < 1e-15);
    assert!(rel(exp_poly_integral(1, 1.0, 1.0).unwrap(), 2.0 / E) < 1e-15);
    let want = quad_oracle(2, 1.0, 0.5);
    assert!(rel(exp_poly_integral(2, 1.0, 0.5).unwrap(), want) < 1e-12);
}

#[test]
fn integral_grid_against_quadrature() {
    for q in 0..=5 {
        for a in [1.0, 2.0, 10.0] {
            for c in [0.5, 1.0, 2.0] {
                let got = exp_poly_integral(q, a, c).unwrap();
                let want = quad_oracle(q, a, c);
                assert!(rel(got, want) <= 1e-8, "I_{q}({a},{c}) = {got} vs {want}");
                assert!(exp_poly_integral_bound(q, a, c).unwrap() >= got);
            }
        }
    }
}

#[test]
fn integral_bound_examples() {
    assert!(rel(exp_poly_integral_bound(1, 1.0, 1.0).unwrap(), 2.0 / E) < 1e-15);
    assert!(rel(exp_poly_integral_bound(2, 2.0, 1.0).unwrap(), 24.0 * (-2.0f64).exp()) < 1e-15);
    assert!(
        exp_poly_integral_bound(3, 1.5, 0.5).unwrap() >= exp_poly_integral(3, 1.5, 0.5).unwrap()
    );
}

#[test]
fn integral_domain_errors() {
    assert!(matches!(exp_poly_integral(1, 0.5, 1.0), Err(Error::Domain(_))));
    assert!(matches!(exp_poly_integral(1, 1.0, 0.0), Err(Error::Domain(_))));
    assert!(exp_poly_integral_bound(1, 0.99, 1.0).is_err());
}

#[test]
fn param_validation_messages() {
    assert!(reference().validate().is_ok());
    let err = TailBoundParams { gamma: 2.5, ..reference() }.validate().unwrap_err();
    assert!(err.to_string().contains("gamma must be < 1/beta"), "{err}");
    let err = TailBoundParams { delta: 0.5, ..reference() }.validate().unwrap_err();
    assert!(err.to_string().contains("delta must exceed beta"), "{err}");
}

#[test]
fn alpha_exponent_examples() {
    let a = |gamma: f64, delta: f64| {
        TailBoundParams { gamma, delta, beta: 0.4, ..reference() }
            .validate()
            .unwrap()
            .alpha_exponent()
    };
    assert!((a(1.0, 0.5) - 0.5).abs() < 1e-15);
    assert!((a(0.5, 0.5) - 0.25).abs() < 1e-15);
    assert!((a(1.0, 0.75) - 0.5).abs() < 1e-15);
}

#[test]
fn premise_tail_examples() {
    let tb = reference().validate().unwrap();
    assert!((tb.premise_tail(1, LN_2).unwrap() - 0.5).abs() < 1e-15);
    let loose = TailBoundParams { c1: 10.0, ..reference() }.validate().unwrap();
    assert_eq!(loose.premise_tail(10, 0.01).unwrap(), 1.0);
    let p = TailBoundParams { c2: 2.0, gamma: 0.5, delta: 0.9, ..reference() };
    let v = p.validate().unwrap().premise_tail(100, 4.0).unwrap();
    assert!(rel(v, (-400.0f64).exp()) < 1e-12);
    assert!(tb.premise_tail(1, 0.0).is_err());
}

#[test]
fn uniform_bound_example() {
    let tb = reference().validate().unwrap();
    let c3 = tb.derived().c3;
    let want = c3 * 16.0 * (-(16f64.powf(0.25)) * 2.0).exp();
    assert!(rel(tb.uniform_tail_bound_unclamped(16.0, 2.0).unwrap(), want) < 1e-13);
    assert!(tb.uniform_tail_bound(1, 0.5).is_err());
    // decays to zero in y
    let mut prev = f64::INFINITY;
    for y in [1.0, 10.0, 100.0, 1000.0] {
        let v = tb.uniform_tail_bound(1, y).unwrap();
        assert!(v <= prev);
        prev = v;
    }
    assert!(prev < 1e-100);
}

#[test]
fn cesaro_bound_examples() {
    let tb = reference().validate().unwrap();
    let b = tb.cesaro_tail_bound(256, 1.0).unwrap();
    let want = 2.0 * 256f64.powf(-0.5) + 12.0 * 256f64.powf(-0.75);
    assert!(rel(b.threshold, want) < 1e-15);
    let d = tb.derived();
    let p_want = (d.c4 * 256f64.powf(0.5) * (-(256f64.powf(0.5 * 0.25))).exp()).min(1.0);
    assert!((b.prob_bound - p_want).abs() <= 1e-15);

    let zero = TailBoundParams { c0: 0.0, ..reference() }.validate().unwrap();
    let z = zero.cesaro_tail_bound(100, 3.0).unwrap();
    assert_eq!(z.threshold, 3.0 / 0.25 * 100f64.powf(-0.75) * 3.0);

    let mut prev = 1.0;
    for y in [1.0, 2.0, 4.0, 8.0] {
        let p = tb.cesaro_tail_bound(1024, y).unwrap().prob_bound;
        assert!(p <= prev);
        prev = p;
    }
    assert!(tb.cesaro_tail_bound(10, 0.5).is_err());
}

#[test]
fn derived_constants_formula() {
    let tb = reference().validate().unwrap();
    let d = tb.derived();
    // κ = 4, q = 3, (q+1)! = 24, max{1, 1} = 1
    assert_eq!(d.q, 3);
    assert!((d.kappa - 4.0).abs() < 1e-15);
    assert!((d.c3 - (4.0 * 24.0 + 1.0)).abs() < 1e-12);
    assert!((d.c4 - (2.0 * d.c3 + 1.0)).abs() < 1e-12);
}

#[test]
fn series_dominated_by_uniform_bound() {
    // Σ_{k ≥ m+1} C₁ exp(−C₂ k^{1−γδ} y^γ) ≤ uniform bound at (m, y).
    for p in [
        reference(),
        TailBoundParams { c1: 2.0, c2: 0.5, beta: 0.3, gamma: 1.5, delta: 0.5, ..reference() },
        TailBoundParams { c2: 3.0, gamma: 0.5, delta: 0.9, ..reference() },
    ] {
        let tb = p.validate().unwrap();
        let s = 1.0 - p.gamma * p.delta;
        for m in [1u64, 4, 16, 64] {
            for y in [1.0f64, 2.0, 5.0] {
                let term = |k: f64| p.c1 * (-p.c2 * k.powf(s) * y.powf(p.gamma)).exp();
                let big_k = 1_000_000u64;
                let head: f64 = ((m + 1)..=big_k).map(|k| term(k as f64)).sum();
                let tail = integrate_to_infinity(&term, big_k as f64, 1e-8);
                let bound = tb.uniform_tail_bound_unclamped(m as f64, y).unwrap();
                assert!(head + tail <= bound, "m={m} y={y}: {} > {bound}", head + tail);
            }
        }
    }
}

#[test]
fn normal_examples() {
    assert_eq!(normal_cdf(0.0), 0.5);
    assert!((normal_cdf(1.959964) - 0.975).abs() <= 1e-6);
    assert!(normal_cdf(-8.0) < 1e-14);
    assert!(normal_cdf(-8.0) > 0.0);
    // high-precision reference values
    assert!(rel(erf(0.5), 0.520_499_877_813_046_5) < 1e-15);
    assert!(rel(normal_sf(5.0), 2.866_515_718_791_939e-7) < 1e-13);
    assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
}

#[test]
fn berry_esseen_examples() {
    let m16 = berry_esseen_margin(1 << 16, 0.4, 0.6, 1.0).unwrap();
    assert!((0.979..=1.0).contains(&m16));
    let d = berry_esseen_detail(1 << 16, 0.4, 0.6, 1.0, &NormalApprox::default()).unwrap();
    assert!(d.z < -8.0);
    let mut prev = 0.0;
    for k in 10..=16 {
        let v = berry_esseen_margin(1 << k, 0.4, 0.6, 1.0).unwrap();
        assert!(v >= prev);
        prev = v;
    }
    assert_eq!(berry_esseen_margin(1 << 10, 0.4, 0.6, 1e6).unwrap(), 0.0);
    assert!(berry_esseen_margin(1000, 0.4, 0.6, 1.0).is_err());
    assert!(berry_esseen_margin(2, 0.4, 0.6, 1.0).is_err());
}

fn valid_params() -> impl Strategy<Value = TailBoundParams> {
    (0.0f64..3.0, 0.1f64..5.0, 0.1f64..5.0, 0.05f64..0.95, 0.1f64..1.0, 0.0f64..1.0, 0.0f64..1.0)
        .prop_filter_map("beta*gamma < 1", |(c0, c1, c2, beta, g_frac, d_frac, _)| {
            let gamma = g_frac / beta; // βγ = g_frac < 1
            let upper = (1.0 / gamma).min(1.0);
            if upper <= beta + 1e-6 {
                return None;
            }
            let delta = beta + (upper - beta) * (0.01 + 0.98 * d_frac);
            Some(TailBoundParams { c0, c1, c2, beta, gamma, delta })
        })
}

proptest! {
    #[test]
    fn valid_params_accepted(p in valid_params()) {
        let tb = p.validate().unwrap();
        let a = tb.alpha_exponent();
        prop_assert!(a > 0.0 && a < 1.0);
        prop_assert!(tb.derived().kappa > 1.0);
        prop_assert!(tb.derived().q >= 1);
    }

    #[test]
    fn delta_at_or_below_beta_rejected(p in valid_params(), shrink in 0.0f64..1.0) {
        let bad = TailBoundParams { delta: p.beta * shrink, ..p };
        prop_assert!(bad.validate().is_err());
    }

    #[test]
    fn probabilities_clamped(p in valid_params(), n in 1u64..1_000_000, y in 1.0f64..100.0, x in 1e-6f64..10.0) {
        let tb = p.validate().unwrap();
        let c = tb.cesaro_tail_bound(n, y).unwrap();
        prop_assert!((0.0..=1.0).contains(&c.prob_bound));
        prop_assert!(c.threshold > 0.0);
        let u = tb.uniform_tail_bound(n, y).unwrap();
        prop_assert!((0.0..=1.0).contains(&u));
        let t = tb.premise_tail(n, x).unwrap();
        prop_assert!((0.0..=1.0).contains(&t));
    }

    #[test]
    fn cesaro_bound_monotone_in_y(p in valid_params(), n in 1u64..100_000, y in 1.0f64..50.0, dy in 0.0f64..50.0) {
        let tb = p.validate().unwrap();
        let a = tb.cesaro_tail_bound(n, y).unwrap();
        let b = tb.cesaro_tail_bound(n, y + dy).unwrap();
        prop_assert!(b.prob_bound <= a.prob_bound);
        prop_assert!(b.threshold >= a.threshold);
    }

    #[test]
    fn cesaro_bound_monotone_in_n_past_n0(p in valid_params(), y in 1.0f64..10.0, step in 1u64..1000) {
        let tb = p.validate().unwrap();
        let n0 = tb.monotone_from();
        prop_assume!(n0 < 1_000_000_000);
        let a = tb.cesaro_tail_bound(n0, y).unwrap().prob_bound;
        let b = tb.cesaro_tail_bound(n0 + step, y).unwrap().prob_bound;
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn integral_recursion(q in 1u32..8, a in 1.0f64..20.0, c in 0.1f64..5.0) {
        let lhs = exp_poly_integral(q, a, c).unwrap();
        let rhs = (-c * a).exp() * a.powi(q as i32) / c
            + f64::from(q) / c * exp_poly_integral(q - 1, a, c).unwrap();
        prop_assume!(lhs > 1e-300);
        prop_assert!(rel(lhs, rhs) <= 1e-12);
        prop_assert!(exp_poly_integral_bound(q, a, c).unwrap() >= lhs);
    }

    #[test]
    fn normal_symmetry(z in -30.0f64..30.0) {
        prop_assert!((normal_cdf(z) + normal_cdf(-z) - 1.0).abs() <= 1e-15);
        prop_assert!((normal_sf(z) - normal_cdf(-z)).abs() <= 1e-300f64.max(1e-15 * normal_sf(z)));
    }

    #[test]
    fn quantile_inverts_cdf(p in 1e-12f64..(1.0 - 1e-12)) {
        let z = normal_quantile(p);
        prop_assert!((normal_cdf(z) - p).abs() <= 1e-14f64.max(1e-12 * p.min(1.0 - p)));
    }

    #[test]
    fn margin_in_unit_interval(k in 2u32..30, alpha in 0.05f64..0.9, gap in 0.01f64..0.09, m in 0.01f64..100.0) {
        let beta = alpha + gap;
        let v = berry_esseen_margin(1u64 << k, alpha, beta, m).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }
}
