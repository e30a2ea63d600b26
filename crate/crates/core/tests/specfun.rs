use std::f64::consts::PI;

use proptest::prelude::*;
use yukawa_sphere::specfun::*;
use yukawa_sphere::Error;

fn pol() -> SeriesPolicy {
    SeriesPolicy::default()
}

fn deg(k: f64) -> YukawaDegree {
    YukawaDegree::new(k).unwrap()
}

/// Partial sum of the hypergeometric series with each coefficient formed
/// as an explicit product, independent of the library's ratio recurrence.
fn series_oracle(tau: f64, w: f64, terms: usize) -> f64 {
    let mut total = 0.0;
    for n in 0..terms {
        let mut c = 1.0;
        for j in 0..n {
            let a = j as f64 + 0.5;
            let d = (j + 1) as f64;
            c *= (a * a + tau * tau) / (d * d);
        }
        total += c * w.powi(n as i32);
    }
    total
}

#[test]
fn degree_constants() {
    for k in [0.51, 1.0, 4.0, 64.0] {
        let d = deg(k);
        assert!((d.tau() * d.tau() + 0.25 - k * k).abs() <= 4.0 * f64::EPSILON * k * k);
        let want = 1.0 / (4.0 * ((PI / 2.0) * (4.0 * k * k - 1.0).sqrt()).cosh());
        assert!((d.c_k() - want).abs() <= 1e-15 * want);
        assert_eq!(d.nu_real(), -0.5);
        assert_eq!(d.nu_imag(), d.tau());
    }
}

#[test]
fn value_at_one_is_one() {
    for k in [0.51, 1.0, 4.0, 64.0] {
        let p = conical_p(deg(k), 1.0, pol()).unwrap();
        assert!((p - 1.0).abs() < 1e-13, "k = {k}: {p}");
    }
}

#[test]
fn small_angle_series() {
    // sin(t/2) = 0.1  =>  w = 0.01
    let x = 1.0 - 2.0 * 0.01;
    let d = deg(1.0);
    let p = conical_p(d, x, pol()).unwrap();
    assert!((p - 1.01).abs() < 2e-4);
    let oracle = series_oracle(d.tau(), 0.01, 10);
    assert!((p - oracle).abs() < 1e-14, "{p} vs {oracle}");
}

#[test]
fn direct_series_matches_product_oracle() {
    for k in [0.51, 1.0, 4.0, 10.0] {
        let d = deg(k);
        for w in [0.05, 0.3, 0.6] {
            let p = conical_p(d, 1.0 - 2.0 * w, pol()).unwrap();
            let o = series_oracle(d.tau(), w, 200);
            assert!((p / o - 1.0).abs() < 1e-13, "k = {k}, w = {w}");
        }
    }
}

#[test]
fn log_singularity_slope_near_antipode() {
    // P ≈ (sin νπ / π) log(1 + x) + const, sin νπ = -cosh πτ
    let d = deg(1.0);
    let x1 = -1.0 + 1e-4;
    let x2 = -1.0 + 1e-6;
    let p1 = conical_p(d, x1, pol()).unwrap();
    let p2 = conical_p(d, x2, pol()).unwrap();
    let slope = (p1 - p2) / ((1e-4f64).ln() - (1e-6f64).ln());
    let want = -(PI * d.tau()).cosh() / PI;
    assert!((slope / want - 1.0).abs() < 1e-3, "{slope} vs {want}");
}

#[test]
fn rejects_antipode() {
    let d = deg(1.0);
    assert!(matches!(conical_p(d, -1.0, pol()), Err(Error::Domain { .. })));
    assert!(matches!(conical_p(d, -1.5, pol()), Err(Error::Domain { .. })));
    assert!(matches!(
        conical_p_deriv(d, -1.0 + 1e-13, pol()),
        Err(Error::Domain { .. })
    ));
}

#[test]
fn derivative_at_one() {
    for k in [1.0, 3.0] {
        let dp = conical_p_deriv(deg(k), 1.0, pol()).unwrap();
        assert!((dp + k * k / 2.0).abs() < 1e-14);
    }
}

#[test]
fn derivative_matches_finite_difference() {
    for k in [0.51, 1.0, 2.0, 4.0, 64.0] {
        let d = deg(k);
        let c = Conical::new(d, pol()).unwrap();
        for i in 0..19 {
            let x = -0.9 + 0.1 * i as f64;
            // truncation of the centred difference scales like (h d ln P/dx)²
            let hstep = 1e-6;
            let fd = (c.p(x + hstep).unwrap() - c.p(x - hstep).unwrap()) / (2.0 * hstep);
            let dp = c.p_deriv(x).unwrap();
            assert!(
                ((dp - fd) / dp).abs() < 1e-7,
                "k = {k}, x = {x}: {dp} vs {fd}"
            );
        }
    }
}

#[test]
fn legendre_ode_residual() {
    for k in [0.51, 1.0, 4.0, 64.0] {
        let d = deg(k);
        let c = Conical::new(d, pol()).unwrap();
        for i in 0..39 {
            let x = -0.95 + 0.05 * i as f64;
            // 1e-4, reduced for large τ where P varies on a scale ~1/τ
            let h = 1e-4 * (4.0 / d.tau()).min(1.0);
            let p = c.p(x).unwrap();
            let dp = c.p_deriv(x).unwrap();
            let d2 = (c.p_deriv(x + h).unwrap() - c.p_deriv(x - h).unwrap()) / (2.0 * h);
            let res = (1.0 - x * x) * d2 - 2.0 * x * dp - k * k * p;
            let scale = p.abs().max(dp.abs()).max(d2.abs());
            assert!(res.abs() / scale < 1e-6, "k = {k}, x = {x}: {res}");
        }
    }
}

#[test]
fn branches_agree_across_switch() {
    let policy = pol();
    for k in [0.51, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0] {
        let c = Conical::new(deg(k), policy).unwrap();
        for i in 0..=20 {
            let w = policy.switch_w - 0.1 + 0.01 * i as f64;
            let s = 1.0 - w;
            let far = c.branch(policy.switch_w + 0.01, 1.0 - policy.switch_w - 0.01);
            let (a, da) = c.eval_with(w, s, Branch::Direct).unwrap();
            let (b, db) = c.eval_with(w, s, far).unwrap();
            assert!(((a - b) / a).abs() < 1e-12, "k = {k}, w = {w}: {a} vs {b}");
            assert!(((da - db) / da).abs() < 1e-12, "k = {k}, w = {w}");
        }
    }
}

#[test]
fn log_case_and_continuation_agree() {
    // the handover between the two branches near τ²s = 1
    for k in [4.0, 16.0, 64.0] {
        let c = Conical::new(deg(k), pol()).unwrap();
        let t2 = c.degree().tau().powi(2);
        for f in [0.6, 0.8, 1.0, 1.2, 1.5] {
            let s = f / t2;
            let (a, _) = c.eval_with(1.0 - s, s, Branch::LogCase).unwrap();
            let (b, _) = c.eval_with(1.0 - s, s, Branch::Continuation).unwrap();
            assert!(((a - b) / a).abs() < 1e-12, "k = {k}, τ²s = {f}");
        }
    }
}

#[test]
fn digamma_half() {
    let v = digamma_conjugate_sum(0.0, 0);
    assert!((v + 1.963_510_026_021_423_5).abs() < 1e-13);
}

#[test]
fn digamma_against_defining_series() {
    // Re ψ(1/2 + iτ) = -γ + Σ (1/(m+1) - Re 1/(m + 1/2 + iτ)), tail summed
    // to 10^7 terms and closed by its 1/M asymptotics
    let tau = 3f64.sqrt() / 2.0;
    let gamma = 0.577_215_664_901_532_9;
    let m_max = 10_000_000usize;
    let mut acc = 0.0;
    for m in (0..m_max).rev() {
        let a = m as f64 + 0.5;
        acc += 1.0 / (m as f64 + 1.0) - a / (a * a + tau * tau);
    }
    // remainder Σ_{m >= M} ≈ -(1/2) / M
    acc -= 0.5 / m_max as f64;
    let want = -gamma + acc;
    assert!((digamma_conjugate_sum(tau, 0) - want).abs() < 1e-12);
}

#[test]
fn digamma_large_argument() {
    for tau in [0.0, 0.7, 5.0] {
        for n in [50usize, 200, 1000] {
            let v = digamma_conjugate_sum(tau, n);
            assert!((v - (n as f64).ln()).abs() < 1.0 / n as f64 + tau * tau / (n * n) as f64);
        }
    }
}

#[test]
fn digamma_recurrence() {
    for tau in [0.2, 2.0, 40.0] {
        for n in 0..5 {
            let a = n as f64 + 0.5;
            let step = digamma_conjugate_sum(tau, n + 1) - digamma_conjugate_sum(tau, n);
            assert!((step - a / (a * a + tau * tau)).abs() < 1e-14);
        }
    }
}

#[test]
fn fundamental_solution_antipode() {
    let d = deg(1.0);
    let g = fundamental_solution(d, -1.0, pol()).unwrap();
    let want = 1.0 / (4.0 * (PI * 3f64.sqrt() / 2.0).cosh());
    assert!((g - want).abs() < 1e-16);
    assert!((g - 0.032772344).abs() < 1e-9);
}

#[test]
fn fundamental_solution_log_slope() {
    let d = deg(1.0);
    let g_at = |r: f64| fundamental_solution(d, 1.0 - r * r / 2.0, pol()).unwrap();
    let (r1, r2) = (1e-3, 1e-5);
    let slope = (g_at(r1) - g_at(r2)) / (r1.ln() - r2.ln());
    let want = -1.0 / (2.0 * PI);
    assert!((slope / want - 1.0).abs() < 1e-3);
}

#[test]
fn fundamental_solution_rejects_coincidence() {
    assert!(matches!(
        fundamental_solution(deg(2.0), 1.0, pol()),
        Err(Error::Singularity(_))
    ));
}

#[test]
fn fundamental_solution_positive() {
    let d = deg(4.0);
    assert!(fundamental_solution(d, 0.0, pol()).unwrap() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conical_is_positive_and_at_least_one_on_direct_branch(
        k in 0.51f64..80.0,
        x in -0.999f64..1.0,
    ) {
        let c = Conical::new(deg(k), pol()).unwrap();
        let p = c.p(x).unwrap();
        prop_assert!(p > 0.0);
        let w = 0.5 * (1.0 - x);
        if w <= pol().switch_w {
            prop_assert!(p >= 1.0 - pol().rel_tol);
        }
    }

    #[test]
    fn conical_is_monotone_toward_antipode(k in 0.51f64..40.0, x in -0.99f64..0.99) {
        let c = Conical::new(deg(k), pol()).unwrap();
        prop_assert!(c.p_deriv(x).unwrap() < 0.0);
    }

    #[test]
    fn green_depends_only_on_chord(k in 0.51f64..20.0, c in -0.99f64..0.99) {
        let con = Conical::new(deg(k), pol()).unwrap();
        let a = con.green(c).unwrap();
        let b = con.green_r2(2.0 - 2.0 * c).unwrap();
        prop_assert!(((a - b) / a).abs() < 1e-12);
    }
}
