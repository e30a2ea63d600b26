use std::f64::consts::PI;

use proptest::prelude::*;
use yukawa_sphere::geometry::*;
use yukawa_sphere::Error;

#[test]
fn solid_angle_trivial_cases() {
    let n = SpherePoint::north();
    let s = SpherePoint::new(Vec3::new(0.0, 0.0, -1.0)).unwrap();
    assert_eq!(solid_angle_cos(&n, &n), 1.0);
    assert_eq!(solid_angle_cos(&n, &s), -1.0);
}

#[test]
fn sphere_point_validation() {
    assert!(SpherePoint::new(Vec3::zeros()).is_err());
    assert!(SpherePoint::from_unit(Vec3::new(1.0, 1.0, 0.0)).is_err());
    let p = SpherePoint::new(Vec3::new(3.0, 4.0, 0.0)).unwrap();
    assert!((p.coords().norm() - 1.0).abs() < 1e-15);
    let q = SpherePoint::from_spherical(0.7, 1.1);
    let (phi, theta) = q.spherical();
    assert!((phi - 0.7).abs() < 1e-14 && (theta - 1.1).abs() < 1e-14);
}

#[test]
fn latitude_circle_speed_and_tangent() {
    let theta0 = 1.1;
    let c = families::latitude(theta0, 64).unwrap();
    for j in 0..64 {
        assert!((c.speed[j] - theta0.sin()).abs() < 1e-12);
        let a = c.h() * j as f64;
        let e_phi = Vec3::new(-a.sin(), a.cos(), 0.0);
        assert!((c.tangent[j] - e_phi).norm() < 1e-12);
    }
}

#[test]
fn latitude_arclength() {
    for n in [32, 64, 128] {
        for theta0 in [0.3, 1.0, 2.5] {
            let c = families::latitude(theta0, n).unwrap();
            assert!((c.length() - 2.0 * PI * theta0.sin()).abs() < 1e-10);
        }
    }
}

#[test]
fn round_ellipse_is_a_latitude_circle() {
    let c = families::ellipse(&SpherePoint::north(), 0.8, 0.8, 0.0, 512).unwrap();
    // colatitude asin(0.8): geodesic curvature cot θ₀ = 0.75, bending left
    for j in 0..c.len() {
        assert!((c.geodesic_curvature(j) + 0.75).abs() < 1e-10);
        assert!((c.speed[j] - 0.8).abs() < 1e-12);
    }
}

#[test]
fn thin_ellipse_has_large_curvature_variation() {
    let c = families::ellipse(&SpherePoint::north(), 0.8, 0.05, 0.0, 512).unwrap();
    let k: Vec<f64> = (0..c.len()).map(|j| c.geodesic_curvature(j).abs()).collect();
    let max = k.iter().cloned().fold(0.0, f64::max);
    let min = k.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min > 1000.0);
}

#[test]
fn equator_has_zero_diagonal_limit() {
    let c = families::latitude(PI / 2.0, 64).unwrap();
    for j in 0..64 {
        assert!(diag_kernel_limit(&c, j).abs() < 1e-14);
    }
}

#[test]
fn diagonal_limit_constant_on_latitude() {
    let c = families::latitude(PI / 3.0, 64).unwrap();
    // cot(π/3) / (4π) with the cap on the left
    let want = -(1.0 / 3f64.sqrt()) / (4.0 * PI);
    for j in 0..64 {
        assert!((diag_kernel_limit(&c, j) - want).abs() < 1e-13);
    }
}

#[test]
fn diagonal_limit_self_converges() {
    let c0 = SpherePoint::from_spherical(0.4, 1.2);
    let a = families::star_cap(&c0, 0.5, 0.2, 3, 0.3, 128).unwrap();
    let b = families::star_cap(&c0, 0.5, 0.2, 3, 0.3, 256).unwrap();
    for j in 0..128 {
        assert!((diag_kernel_limit(&a, j) - diag_kernel_limit(&b, 2 * j)).abs() < 1e-8);
    }
}

#[test]
fn spectral_derivatives_match_closed_form() {
    // latitude circle: x' = sin θ₀ (-sin α, cos α, 0), x'' = -sin θ₀ (cos α, sin α, 0)
    let t0: f64 = 0.9;
    let c = families::latitude(t0, 32).unwrap();
    for j in 0..32 {
        let a = c.h() * j as f64;
        let d1 = Vec3::new(-a.sin(), a.cos(), 0.0) * t0.sin();
        let d2 = Vec3::new(-a.cos(), -a.sin(), 0.0) * t0.sin();
        assert!((c.d1[j] - d1).norm() < 1e-12);
        assert!((c.d2[j] - d2).norm() < 1e-12);
    }
}

#[test]
fn reversal_flips_frame_and_diagonal() {
    let c0 = SpherePoint::from_spherical(1.0, 0.8);
    let c = families::star_cap(&c0, 0.4, 0.3, 2, 0.0, 64).unwrap();
    let r = c.reversed();
    assert_eq!(r.orientation, -1);
    for j in 0..64 {
        let k = (64 - j) % 64;
        assert!((r.nodes[j] - c.nodes[k]).norm() == 0.0);
        assert!((r.tangent[j] + c.tangent[k]).norm() < 1e-15);
        assert!((r.normal[j] + c.normal[k]).norm() < 1e-15);
        assert!((diag_kernel_limit(&r, j) + diag_kernel_limit(&c, k)).abs() < 1e-14);
    }
    // reversing the sampled parametrisation agrees with sampling α ↦ x(-α)
    let f = build_curve(
        |a| {
            let (e1, e2) = tangent_frame(c0.coords());
            let rr = 0.4 * (1.0 + 0.3 * (2.0 * a).cos());
            c0.coords() * rr.cos() + (e1 * a.cos() + e2 * a.sin()) * rr.sin()
        },
        64,
        -1,
    )
    .unwrap();
    for j in 0..64 {
        assert!((f.tangent[j] - r.tangent[j]).norm() < 1e-12);
    }
}

#[test]
fn build_curve_errors() {
    let off = build_curve(|a| Vec3::new(a.cos(), a.sin(), 0.1), 32, 1);
    assert!(matches!(off, Err(Error::Geometry(_))));
    let stuck = build_curve(|_| Vec3::z(), 32, 1);
    assert!(matches!(stuck, Err(Error::Geometry(_))));
    assert!(build_curve(|a| Vec3::new(a.cos(), a.sin(), 0.0), 32, 0).is_err());
}

#[test]
fn explicit_nodes_match_family() {
    let c = families::latitude(0.7, 48).unwrap();
    let e = SphereCurve::from_nodes(c.nodes.clone(), 1).unwrap();
    for j in 0..48 {
        assert!((c.normal[j] - e.normal[j]).norm() < 1e-14);
    }
}

#[test]
fn cap_area_and_indicator() {
    let c0 = SpherePoint::from_spherical(-0.5, 2.0);
    let rho = 0.6;
    let c = families::cap_circle(&c0, rho, 64).unwrap();
    assert!((c.left_area() - 2.0 * PI * (1.0 - rho.cos())).abs() < 1e-12);
    assert!((c.left_indicator(c0.coords()) - 1.0).abs() < 1e-10);
    assert!(c.left_indicator(&(-c0.coords())).abs() < 1e-10);
}

#[test]
fn boundary_orients_islands_on_the_left() {
    let c0 = SpherePoint::north();
    let island = families::cap_circle(&c0, 0.5, 64).unwrap().reversed();
    assert!(island.left_area() > 2.0 * PI);
    let g = BoundaryGeometry::new(vec![island], DomainSide::Exterior).unwrap();
    let c = &g.curves()[0];
    assert!(c.left_area() < 2.0 * PI);
    assert!(!g.contains(c0.coords()));
    assert!(g.contains(&Vec3::new(0.0, 0.0, -1.0)));
    // Ω on the right: n points away from the island centre
    for j in 0..c.len() {
        assert!(c.normal[j].dot(c0.coords()) < 0.0);
    }
}

#[test]
fn boundary_rejects_touching_curves() {
    let a = families::latitude(1.0, 32).unwrap();
    let b = families::latitude(1.0, 32).unwrap();
    assert!(BoundaryGeometry::new(vec![a, b], DomainSide::Exterior).is_err());
    assert!(BoundaryGeometry::new(vec![], DomainSide::Exterior).is_err());
}

#[test]
fn presets_have_expected_sizes() {
    let g = presets::two_ply(64).unwrap();
    assert_eq!(g.size(), 128);
    assert_eq!(g.offsets(), &[0, 64, 128]);
    let g = presets::thirty_six_ply(32).unwrap();
    assert_eq!(g.curves().len(), 36);
    assert_eq!(g.size(), 1152);
    for c in g.curves() {
        assert!(c.left_area() < 2.0 * PI);
    }
}

fn unit(v: (f64, f64, f64)) -> Option<SpherePoint> {
    SpherePoint::new(Vec3::new(v.0, v.1, v.2)).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solid_angle_matches_chord_and_is_symmetric(
        a in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
        b in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
    ) {
        if let (Some(a), Some(b)) = (unit(a), unit(b)) {
            let c = solid_angle_cos(&a, &b);
            prop_assert_eq!(c, solid_angle_cos(&b, &a));
            let chord = (a.coords() - b.coords()).norm_squared();
            prop_assert!((c - (1.0 - chord / 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn frames_are_orthonormal(
        phi in -3.0f64..3.0,
        theta in 0.2f64..2.9,
        rho in 0.1f64..1.2,
        eps in 0.0f64..0.3,
        m in 1u32..5,
        n in prop::sample::select(vec![32usize, 64, 128]),
    ) {
        let c0 = SpherePoint::from_spherical(phi, theta);
        let c = families::star_cap(&c0, rho, eps, m, 0.0, n).unwrap();
        for j in 0..n {
            let x = c.nodes[j];
            prop_assert!((x.norm() - 1.0).abs() < 1e-14);
            prop_assert!(c.tangent[j].dot(&x).abs() < 1e-10);
            prop_assert!(c.normal[j].dot(&x).abs() < 1e-10);
            prop_assert!(c.normal[j].dot(&c.tangent[j]).abs() < 1e-10);
            prop_assert!(c.speed[j] > 0.0);
        }
    }
}
