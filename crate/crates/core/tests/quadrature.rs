use std::f64::consts::PI;

use proptest::prelude::*;
use yukawa_sphere::geometry::{families, SpherePoint};
use yukawa_sphere::quadrature::*;
use yukawa_sphere::Error;

/// Modified Bessel I_m(1) from its power series.
fn bessel_i1(m: u32) -> f64 {
    let mut term = 0.5f64.powi(m as i32) / (1..=m).map(f64::from).product::<f64>();
    let mut sum = 0.0;
    for k in 0..40u32 {
        sum += term;
        term *= 0.25 / (f64::from(k + 1) * f64::from(k + 1 + m));
    }
    sum
}

/// ∫₀^{2π} e^{cos α} log|2 sin((α - β)/2)| dα from the Fourier series of both
/// factors.
fn log_model_exact(beta: f64) -> f64 {
    -2.0 * PI * (1..60).map(|m| bessel_i1(m) * (m as f64 * beta).cos() / m as f64).sum::<f64>()
}

/// ∫₀^{2π} log|2 sin((α - β)/2)| / (c - cos α) dα, summing the geometric
/// Fourier series of the rational factor in closed form.
fn rational_log_exact(c: f64, beta: f64) -> f64 {
    let r = c - (c * c - 1.0).sqrt();
    PI / (c * c - 1.0).sqrt() * (1.0 - 2.0 * r * beta.cos() + r * r).ln()
}

#[test]
fn bessel_oracle_sanity() {
    assert!((bessel_i1(0) - 1.266_065_877_752_008_4).abs() < 1e-15);
    assert!((bessel_i1(1) - 0.565_159_103_992_485).abs() < 1e-15);
}

#[test]
fn trapezoid_constant_and_length() {
    let c = families::latitude(1.0, 64).unwrap();
    let v = trapezoid_integrate(&vec![1.0; 64], &c).unwrap();
    assert!((v - 2.0 * PI * 1f64.sin()).abs() < 1e-13);
    assert!(matches!(
        trapezoid_integrate(&[1.0; 3], &c),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn trapezoid_kills_low_modes() {
    // on a great circle ds = dα
    let c = families::latitude(PI / 2.0, 32).unwrap();
    for m in 1..32 {
        let s: Vec<f64> = (0..32).map(|j| (m as f64 * c.h() * j as f64).cos()).collect();
        assert!(trapezoid_integrate(&s, &c).unwrap().abs() < 1e-13);
    }
}

#[test]
fn trapezoid_exp_cos() {
    let c = families::latitude(PI / 2.0, 32).unwrap();
    let s: Vec<f64> = (0..32).map(|j| (c.h() * j as f64).cos().exp()).collect();
    let want = 2.0 * PI * bessel_i1(0);
    assert!((trapezoid_integrate(&s, &c).unwrap() - want).abs() < 1e-13);
}

#[test]
fn interpolation_reproduces_grid_and_band_limited_functions() {
    let n = 32;
    let h = 2.0 * PI / n as f64;
    let f = |a: f64| 0.3 + (3.0 * a).sin() - 0.5 * (7.0 * a).cos() + (15.0 * a).cos();
    let s: Vec<f64> = (0..n).map(|j| f(h * j as f64)).collect();
    let grid: Vec<f64> = (0..n).map(|j| h * j as f64).collect();
    for (a, b) in trig_interpolate(&s, &grid).iter().zip(&s) {
        assert!((a - b).abs() < 1e-13);
    }
    let off: Vec<f64> = (0..50).map(|i| 0.123 + 0.13 * i as f64).collect();
    for (v, a) in trig_interpolate(&s, &off).iter().zip(&off) {
        assert!((v - f(*a)).abs() < 1e-12, "{a}");
    }
}

#[test]
fn interpolation_converges_on_midpoints() {
    let f = |a: f64| 1.0 / (1.5 - a.cos());
    let err = |n: usize| {
        let h = 2.0 * PI / n as f64;
        let s: Vec<f64> = (0..n).map(|j| f(h * j as f64)).collect();
        let mids: Vec<f64> = (0..n).map(|j| h * (j as f64 + 0.5)).collect();
        trig_interpolate(&s, &mids)
            .iter()
            .zip(&mids)
            .map(|(v, a)| (v - f(*a)).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(16), err(32));
    assert!(e2 < e1 * 1e-3, "{e1} {e2}");
}

#[test]
fn correction_moments() {
    // the end correction integrates x^0 and x^1 exactly against the
    // omitted trapezoid nodes: Σw = -ζ(0, a), Σwx = -ζ(-1, a)
    let a = ALPERT_LOG16_SKIP as f64;
    let s0: f64 = ALPERT_LOG16.iter().map(|p| p.1).sum();
    let s1: f64 = ALPERT_LOG16.iter().map(|p| p.0 * p.1).sum();
    assert!((s0 - (a - 0.5)).abs() < 1e-14);
    let b2 = a * a - a + 1.0 / 6.0;
    assert!((s1 - b2 / 2.0).abs() < 1e-13, "{s1}");
}

#[test]
fn hybrid_rule_row_sum_is_two_pi() {
    for n in [32, 64, 100] {
        let st = AlpertStencil::new(n).unwrap();
        for i in [0, 1, n / 2, n - 1] {
            let w: f64 = st.row(i).folded().iter().sum();
            assert!((w - 2.0 * PI).abs() < 1e-12);
        }
    }
}

#[test]
fn hybrid_rule_on_smooth_integrands_matches_trapezoid() {
    let c0 = SpherePoint::from_spherical(0.2, 1.3);
    let c = families::star_cap(&c0, 0.6, 0.25, 3, 0.0, 128).unwrap();
    let st = AlpertStencil::new(128).unwrap();
    for i in [0, 17, 127] {
        let w = st.row(i).folded();
        let v: f64 = w.iter().zip(&c.speed).map(|(a, b)| a * b).sum();
        assert!((v - c.length()).abs() < 1e-10);
        let g = |a: f64| (a.sin() + 0.3 * (2.0 * a).cos()).exp();
        let s: Vec<f64> = (0..128).map(|j| g(c.h() * j as f64)).collect();
        let trap: f64 = s.iter().sum::<f64>() * c.h();
        let hyb: f64 = w.iter().zip(&s).map(|(a, b)| a * b).sum();
        assert!((trap - hyb).abs() < 1e-12);
    }
}

#[test]
fn hybrid_rule_log_model_high_order() {
    let c = 1.1;
    let err = |n: usize, i: usize| {
        let row = singular_row_weights(QuadratureRule::Alpert16, i, n).unwrap();
        let beta = 2.0 * PI * i as f64 / n as f64;
        let f = |a: f64| (2.0 * ((a - beta) / 2.0).sin()).abs().ln() / (c - a.cos());
        (row.integrate(f) - rational_log_exact(c, beta)).abs()
    };
    let (e1, e2) = (err(24, 6), err(48, 12));
    let order = (e1 / e2).log2();
    assert!(order >= 12.0, "order {order}: {e1} {e2}");
    assert!(err(80, 20) < 1e-13);
    let e = err(100, 7);
    assert!(e < 1e-12, "{e}");
    // folding the interpolation onto the grid gives the same answer
    let n = 64;
    let row = singular_row_weights(QuadratureRule::Alpert16, 0, n).unwrap();
    let h = 2.0 * PI / n as f64;
    let smooth: Vec<f64> = (0..n).map(|j| (h * j as f64).cos().exp()).collect();
    let logs: Vec<f64> = row.aux.iter().map(|a| (2.0 * (a.offset / 2.0).sin()).abs().ln()).collect();
    let w = row.fold(&logs);
    let mut v = 0.0;
    for &(j, _) in &row.regular {
        v += h * smooth[j] * (2.0 * (h * j as f64 / 2.0).sin()).abs().ln();
    }
    // fold puts the regular weights on the grid too; remove them and use
    // the singular product for those nodes instead
    for (j, wj) in w.iter().enumerate() {
        let reg = row.regular.iter().any(|&(r, _)| r == j);
        v += (wj - if reg { h } else { 0.0 }) * smooth[j];
    }
    assert!((v - log_model_exact(0.0)).abs() < 1e-13);
}

#[test]
fn hybrid_rule_rejects_small_grids() {
    assert!(matches!(AlpertStencil::new(16), Err(Error::Quadrature(_))));
    assert!(AlpertStencil::new(41).is_err());
    assert!(singular_row_weights(QuadratureRule::Trapezoid, 0, 64).is_err());
    assert!(singular_row_weights(QuadratureRule::Alpert16, 64, 64).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sinc_partition_of_unity(n in prop::sample::select(vec![16usize, 32, 64]), t in -3.0f64..3.0) {
        let h = 2.0 * PI / n as f64;
        let s: f64 = (0..n).map(|m| periodic_sinc(n, t - h * m as f64)).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }
}
