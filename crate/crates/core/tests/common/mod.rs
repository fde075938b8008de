//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// Adaptive Gauss–Kronrod (7/15) quadrature on `[a, b]`.
pub fn gauss_kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    const XGK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_728_8,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];
    fn rule(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WGK[7] * fc;
        let mut g = WG[3] * fc;
        for j in 0..7 {
            let s = f(c - h * XGK[j]) + f(c + h * XGK[j]);
            k += WGK[j] * s;
            if j % 2 == 1 {
                g += WG[j / 2] * s;
            }
        }
        (k * h, ((k - g) * h).abs())
    }
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (left, el) = rule(f, a, m);
        let (right, er) = rule(f, m, b);
        let halves = left + right;
        // Kronrod error estimates are pessimistic; accept when both the
        // embedded estimate and the refinement agree within tolerance.
        let floor = 4.0 * f64::EPSILON * halves.abs();
        if depth == 0 || (halves - whole).abs() <= tol.max(floor) || el + er <= floor {
            return halves;
        }
        recurse(f, a, m, left, tol / 2.0, depth - 1) + recurse(f, m, b, right, tol / 2.0, depth - 1)
    }
    let (whole, _) = rule(f, a, b);
    recurse(f, a, b, whole, rel_tol * whole.abs().max(1e-300), 30)
}

/// `∫_a^∞ f` via `u = a + t/(1−t)`.
pub fn integrate_to_infinity(f: &dyn Fn(f64) -> f64, a: f64, rel_tol: f64) -> f64 {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let u = a + t / (1.0 - t);
        let v = f(u) / ((1.0 - t) * (1.0 - t));
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    gauss_kronrod(&g, 0.0, 1.0, rel_tol)
}

/// Exact sum of finite doubles in 2⁻⁸⁰ fixed point, rounded once at the end.
///
/// Panics if an input is not a multiple of 2⁻⁸⁰ or the sum overflows.
pub fn exact_sum(xs: &[f64]) -> f64 {
    const SCALE: f64 = 1_208_925_819_614_629_174_706_176.0; // 2^80
    let mut acc: i128 = 0;
    for &x in xs {
        let scaled = x * SCALE;
        assert!(scaled.fract() == 0.0 && scaled.abs() < 2f64.powi(120), "{x} not representable");
        acc = acc.checked_add(scaled as i128).expect("fixed-point overflow");
    }
    acc as f64 / SCALE
}

/// `√(se₁² + se₂²)`.
pub fn pooled(se1: f64, se2: f64) -> f64 {
    (se1 * se1 + se2 * se2).sqrt()
}

/// Binomial standard error.
pub fn binom_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
