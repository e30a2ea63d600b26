//! Points, closed curves and multiply-connected domains on the unit sphere.
//!
//! Curves are stored as `N` samples at uniform parameter values
//! `α_j = 2πj/N`; first and second parameter derivatives come from the
//! trigonometric interpolant (FFT differentiation).  Each node carries the
//! unit tangent `t`, the speed `|dx/dα|` and the in-surface normal
//! `n = t × x`, which points to the right of the direction of travel.
//!
//! A [`BoundaryGeometry`] orients every curve so that the solution domain
//! `Ω` lies on the right of `t`; `n` then points into `Ω`.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint(Vec3);

impl SpherePoint {
    /// Normalises `v`; rejects zero and non-finite vectors.
    pub fn new(v: Vec3) -> Result<Self> {
        let r = v.norm();
        if !r.is_finite() || r == 0.0 {
            return Err(Error::Geometry(format!("cannot normalise {v:?}")));
        }
        Ok(Self(v / r))
    }

    /// Accepts `v` only if it already has unit length within `1e-12`.
    pub fn from_unit(v: Vec3) -> Result<Self> {
        if ((v.norm() - 1.0).abs()) > 1e-12 {
            return Err(Error::Geometry(format!(
                "point {v:?} is off the unit sphere by {:e}",
                (v.norm() - 1.0).abs()
            )));
        }
        Ok(Self(v))
    }

    /// Azimuth `φ`, colatitude `θ`.
    pub fn from_spherical(phi: f64, theta: f64) -> Self {
        Self(Vec3::new(
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ))
    }

    pub fn north() -> Self {
        Self(Vec3::z())
    }

    pub fn coords(&self) -> &Vec3 {
        &self.0
    }

    /// `(φ, θ)` with `φ ∈ (-π, π]`.
    pub fn spherical(&self) -> (f64, f64) {
        let v = self.0;
        (v.y.atan2(v.x), v.z.clamp(-1.0, 1.0).acos())
    }
}

/// `⟨a, b⟩`, the cosine of the geodesic angle; equals `1 - ‖a-b‖²/2`.
pub fn solid_angle_cos(a: &SpherePoint, b: &SpherePoint) -> f64 {
    a.0.dot(&b.0)
}

/// Two unit vectors completing `c` to a right-handed frame `(e1, e2, c)`.
pub fn tangent_frame(c: &Vec3) -> (Vec3, Vec3) {
    let seed = if c.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (seed - c * c.dot(&seed)).normalize();
    let e2 = c.cross(&e1);
    (e1, e2)
}

/// A closed curve on the sphere sampled at `N` uniform parameter values.
#[derive(Debug, Clone)]
pub struct SphereCurve {
    pub nodes: Vec<Vec3>,
    pub d1: Vec<Vec3>,
    pub d2: Vec<Vec3>,
    pub speed: Vec<f64>,
    pub tangent: Vec<Vec3>,
    pub normal: Vec<Vec3>,
    pub orientation: i8,
}

/// Samples `param` at `N` uniform points of `[0, 2π)` and differentiates
/// spectrally.  `orientation = -1` traverses the curve as `α ↦ param(-α)`.
pub fn build_curve<F>(param: F, n: usize, orientation: i8) -> Result<SphereCurve>
where
    F: Fn(f64) -> Vec3,
{
    if orientation != 1 && orientation != -1 {
        return Err(Error::Geometry(format!(
            "orientation must be +1 or -1, got {orientation}"
        )));
    }
    check_size(n)?;
    let h = 2.0 * PI / n as f64;
    let mut nodes = Vec::with_capacity(n);
    for j in 0..n {
        let alpha = f64::from(orientation) * h * j as f64;
        let x = param(alpha);
        let r = x.norm();
        if !r.is_finite() || (r - 1.0).abs() > 1e-8 {
            return Err(Error::Geometry(format!(
                "node {j} at distance {r} from the origin is off the sphere"
            )));
        }
        nodes.push(x / r);
    }
    SphereCurve::from_nodes(nodes, orientation)
}

fn check_size(n: usize) -> Result<()> {
    if n < 16 || n % 2 != 0 {
        return Err(Error::Geometry(format!(
            "node count must be even and at least 16, got {n}"
        )));
    }
    Ok(())
}

/// First and second derivatives of the trigonometric interpolant of
/// periodic samples.  The unpaired Nyquist mode is dropped for the first
/// derivative and kept (real) for the second.
pub fn spectral_derivatives(samples: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut spec: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut spec);
    let mut s1 = spec.clone();
    let mut s2 = spec;
    for (m, (a, b)) in s1.iter_mut().zip(s2.iter_mut()).enumerate() {
        let freq = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        if n % 2 == 0 && m == n / 2 {
            *a = Complex64::new(0.0, 0.0);
        } else {
            *a *= Complex64::new(0.0, freq);
        }
        *b *= -freq * freq;
    }
    inv.process(&mut s1);
    inv.process(&mut s2);
    let scale = 1.0 / n as f64;
    (
        s1.iter().map(|c| c.re * scale).collect(),
        s2.iter().map(|c| c.re * scale).collect(),
    )
}

impl SphereCurve {
    /// Builds frames from explicit unit nodes at uniform parameter values.
    pub fn from_nodes(nodes: Vec<Vec3>, orientation: i8) -> Result<Self> {
        let n = nodes.len();
        check_size(n)?;
        for (j, x) in nodes.iter().enumerate() {
            if (x.norm() - 1.0).abs() > 1e-8 {
                return Err(Error::Geometry(format!("node {j} is off the sphere")));
            }
        }
        let nodes: Vec<Vec3> = nodes.into_iter().map(|x| x.normalize()).collect();
        let mut d1 = vec![Vec3::zeros(); n];
        let mut d2 = vec![Vec3::zeros(); n];
        for c in 0..3 {
            let comp: Vec<f64> = nodes.iter().map(|x| x[c]).collect();
            let (a, b) = spectral_derivatives(&comp);
            for j in 0..n {
                d1[j][c] = a[j];
                d2[j][c] = b[j];
            }
        }
        let mut speed = Vec::with_capacity(n);
        let mut tangent = Vec::with_capacity(n);
        let mut normal = Vec::with_capacity(n);
        let max_speed = d1.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for j in 0..n {
            let x = nodes[j];
            let v = d1[j] - x * x.dot(&d1[j]);
            let sp = v.norm();
            if !(sp > 1e-10 * max_speed.max(1e-300)) {
                return Err(Error::Geometry(format!(
                    "degenerate parametrization: vanishing speed at node {j}"
                )));
            }
            let t = v / sp;
            speed.push(d1[j].norm());
            tangent.push(t);
            normal.push(t.cross(&x));
        }
        Ok(Self {
            nodes,
            d1,
            d2,
            speed,
            tangent,
            normal,
            orientation,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Parameter spacing `2π/N`.
    pub fn h(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    pub fn point(&self, j: usize) -> SpherePoint {
        SpherePoint(self.nodes[j])
    }

    /// Same point set traversed the other way: node `j` becomes node `-j`.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        let idx = |j: usize| (n - j) % n;
        Self {
            nodes: (0..n).map(|j| self.nodes[idx(j)]).collect(),
            d1: (0..n).map(|j| -self.d1[idx(j)]).collect(),
            d2: (0..n).map(|j| self.d2[idx(j)]).collect(),
            speed: (0..n).map(|j| self.speed[idx(j)]).collect(),
            tangent: (0..n).map(|j| -self.tangent[idx(j)]).collect(),
            normal: (0..n).map(|j| -self.normal[idx(j)]).collect(),
            orientation: -self.orientation,
        }
    }

    /// Resamples the trigonometric interpolant of the nodes on a grid
    /// `factor` times finer; node `j` of `self` is node `factor·j` of the
    /// result.
    pub fn upsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidParameter("upsampling factor must be positive".into()));
        }
        let m = factor * self.len();
        let targets: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
        let comps: Vec<Vec<f64>> = (0..3)
            .map(|c| {
                let s: Vec<f64> = self.nodes.iter().map(|x| x[c]).collect();
                crate::quadrature::trig_interpolate(&s, &targets)
            })
            .collect();
        let nodes = (0..m)
            .map(|j| Vec3::new(comps[0][j], comps[1][j], comps[2][j]).normalize())
            .collect();
        Self::from_nodes(nodes, self.orientation)
    }

    /// `x''(s)·n` at node `j`: the geodesic curvature, positive when the
    /// curve bends toward `n` (to the right).
    pub fn geodesic_curvature(&self, j: usize) -> f64 {
        self.d2[j].dot(&self.normal[j]) / (self.speed[j] * self.speed[j])
    }

    pub fn length(&self) -> f64 {
        self.h() * self.speed.iter().sum::<f64>()
    }

    /// Area of the region on the left of the tangent, from Gauss-Bonnet:
    /// `2π + ∮ x''·n ds`.
    pub fn left_area(&self) -> f64 {
        let turning: f64 = (0..self.len())
            .map(|j| self.geodesic_curvature(j) * self.speed[j])
            .sum::<f64>()
            * self.h();
        2.0 * PI + turning
    }

    /// Indicator of the left region at `p`, from the solid-angle identity
    /// `1_L(p) = |L|/4π - ∮ (p·n) / (4π (1 - p·y)) ds_y`.  Reliable for
    /// `p` several node spacings away from the curve.
    pub fn left_indicator(&self, p: &Vec3) -> f64 {
        let h = self.h();
        let mut acc = 0.0;
        for j in 0..self.len() {
            let y = &self.nodes[j];
            let r2 = (p - y).norm_squared();
            acc += self.speed[j] * p.dot(&self.normal[j]) / (2.0 * PI * r2);
        }
        self.left_area() / (4.0 * PI) - h * acc
    }

    /// Minimum 3-space distance from `p` to the nodes.
    pub fn node_distance(&self, p: &Vec3) -> f64 {
        self.nodes
            .iter()
            .map(|y| (p - y).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Normalised mean of the nodes.
    pub fn centroid(&self) -> Result<SpherePoint> {
        let sum: Vec3 = self.nodes.iter().sum();
        SpherePoint::new(sum)
    }
}

/// Diagonal value of the double-layer kernel, `-(1/4π) x'(s)·(x''(s) × x)`,
/// which equals `(1/4π) x''(s)·n`.
pub fn diag_kernel_limit(curve: &SphereCurve, j: usize) -> f64 {
    curve.geodesic_curvature(j) / (4.0 * PI)
}

/// Which side of each curve the solution domain occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DomainSide {
    /// `Ω` is the sphere minus the smaller region enclosed by each curve.
    /// Curves are reversed where needed so `Ω` lies on their right.
    #[default]
    Exterior,
    /// `Ω` lies on the right of every curve as given.
    AsOriented,
}

/// An oriented set of disjoint curves bounding `Ω`.
#[derive(Debug, Clone)]
pub struct BoundaryGeometry {
    curves: Vec<SphereCurve>,
    side: DomainSide,
    offsets: Vec<usize>,
}

impl BoundaryGeometry {
    pub fn new(curves: Vec<SphereCurve>, side: DomainSide) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::Geometry("no boundary curves".into()));
        }
        let curves: Vec<SphereCurve> = match side {
            DomainSide::AsOriented => curves,
            DomainSide::Exterior => curves
                .into_iter()
                .map(|c| if c.left_area() > 2.0 * PI { c.reversed() } else { c })
                .collect(),
        };
        for a in 0..curves.len() {
            for b in a + 1..curves.len() {
                let d = curves[a]
                    .nodes
                    .iter()
                    .map(|p| curves[b].node_distance(p))
                    .fold(f64::INFINITY, f64::min);
                if !(d > 0.0) {
                    return Err(Error::Geometry(format!("curves {a} and {b} intersect")));
                }
            }
        }
        let mut offsets = Vec::with_capacity(curves.len() + 1);
        let mut acc = 0;
        for c in &curves {
            offsets.push(acc);
            acc += c.len();
        }
        offsets.push(acc);
        Ok(Self {
            curves,
            side,
            offsets,
        })
    }

    pub fn curves(&self) -> &[SphereCurve] {
        &self.curves
    }

    pub fn side(&self) -> DomainSide {
        self.side
    }

    /// Total number of nodes.
    pub fn size(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Global index of node 0 of each curve, plus the total at the end.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Vec3> {
        self.curves.iter().flat_map(|c| c.nodes.iter())
    }

    /// Whether `p` lies in `Ω`, i.e. to the right of every curve.
    pub fn contains(&self, p: &Vec3) -> bool {
        self.curves.iter().all(|c| c.left_indicator(p) < 0.5)
    }

    pub fn distance_to_boundary(&self, p: &Vec3) -> f64 {
        self.curves
            .iter()
            .map(|c| c.node_distance(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Built-in curve families.
pub mod families {
    use super::*;

    /// Circle of geodesic radius `rho` about `center`, counterclockwise
    /// when seen from outside the sphere.
    pub fn cap_circle(center: &SpherePoint, rho: f64, n: usize) -> Result<SphereCurve> {
        star_cap(center, rho, 0.0, 0, 0.0, n)
    }

    /// Circle of colatitude `theta0`.
    pub fn latitude(theta0: f64, n: usize) -> Result<SphereCurve> {
        if !(theta0 > 0.0 && theta0 < PI) {
            return Err(Error::Geometry(format!(
                "colatitude must lie in (0, π), got {theta0}"
            )));
        }
        build_curve(
            |a| {
                Vec3::new(
                    theta0.sin() * a.cos(),
                    theta0.sin() * a.sin(),
                    theta0.cos(),
                )
            },
            n,
            1,
        )
    }

    /// Ellipse lifted to the hemisphere about `center`:
    /// `x = a cos α e1' + b sin α e2' + √(1 - x² - y²) c`, with the local
    /// axes rotated by `angle` about `c`.
    pub fn ellipse(
        center: &SpherePoint,
        a: f64,
        b: f64,
        angle: f64,
        n: usize,
    ) -> Result<SphereCurve> {
        if !(a > 0.0 && b > 0.0 && a < 1.0 && b < 1.0) {
            return Err(Error::Geometry(format!(
                "ellipse semi-axes must lie in (0, 1), got a = {a}, b = {b}"
            )));
        }
        let c = *center.coords();
        let (f1, f2) = tangent_frame(&c);
        let e1 = f1 * angle.cos() + f2 * angle.sin();
        let e2 = c.cross(&e1);
        build_curve(
            |al| {
                let u = a * al.cos();
                let v = b * al.sin();
                e1 * u + e2 * v + c * (1.0 - u * u - v * v).sqrt()
            },
            n,
            1,
        )
    }

    /// Star-shaped cap: geodesic radius `rho (1 + eps cos(m α + phase))`
    /// about `center`.
    pub fn star_cap(
        center: &SpherePoint,
        rho: f64,
        eps: f64,
        m: u32,
        phase: f64,
        n: usize,
    ) -> Result<SphereCurve> {
        if !(rho > 0.0) || rho * (1.0 + eps.abs()) >= PI || eps.abs() >= 1.0 {
            return Err(Error::Geometry(format!(
                "star cap radius {rho} with perturbation {eps} is out of range"
            )));
        }
        let c = *center.coords();
        let (e1, e2) = tangent_frame(&c);
        build_curve(
            |al| {
                let r = rho * (1.0 + eps * (f64::from(m) * al + phase).cos());
                c * r.cos() + (e1 * al.cos() + e2 * al.sin()) * r.sin()
            },
            n,
            1,
        )
    }
}

/// Default domains used by the experiments.  The exact island shapes of
/// the reference computations are not published; these are stand-ins of
/// comparable size and smoothness.
pub mod presets {
    use super::*;

    /// Two islands: a three-lobed star cap and a tilted ellipse.
    pub fn two_ply(n: usize) -> Result<BoundaryGeometry> {
        let c1 = SpherePoint::from_spherical(0.3, 0.9);
        let c2 = SpherePoint::from_spherical(2.6, 1.9);
        let a = families::star_cap(&c1, 0.35, 0.25, 3, 0.0, n)?;
        let b = families::ellipse(&c2, 0.315, 0.21, 0.4, n)?;
        BoundaryGeometry::new(vec![a, b], DomainSide::Exterior)
    }

    /// Centres and shape parameters `(center, rho, eps, m, phase)` of the
    /// 36 islands: Fibonacci-lattice centres, radii within ±10% of 0.15.
    pub fn thirty_six_ply_islands() -> Vec<(SpherePoint, f64, f64, u32, f64)> {
        let m = 36;
        let golden = PI * (3.0 - 5f64.sqrt());
        (0..m)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
                let c = SpherePoint::from_spherical(golden * i as f64, z.acos());
                let rho = 0.15 * (1.0 + 0.2 * ((i * 7 % 5) as f64 / 4.0 - 0.5));
                (c, rho, 0.2, 2 + (i % 3) as u32, i as f64)
            })
            .collect()
    }

    pub fn thirty_six_ply(n: usize) -> Result<BoundaryGeometry> {
        let curves = thirty_six_ply_islands()
            .iter()
            .map(|(c, rho, eps, m, phase)| families::star_cap(c, *rho, *eps, *m, *phase, n))
            .collect::<Result<Vec<_>>>()?;
        BoundaryGeometry::new(curves, DomainSide::Exterior)
    }

    /// Ellipse `a cos α, b sin α` lifted to the upper hemisphere, `Ω` its
    /// exterior.
    pub fn polar_ellipse(a: f64, b: f64, n: usize) -> Result<BoundaryGeometry> {
        let c = families::ellipse(&SpherePoint::north(), a, b, 0.0, n)?;
        BoundaryGeometry::new(vec![c], DomainSide::Exterior)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_sampled_trig_polynomial() {
        let n = 32;
        let s: Vec<f64> = (0..n)
            .map(|j| (3.0 * 2.0 * PI * j as f64 / n as f64).sin())
            .collect();
        let (d1, d2) = spectral_derivatives(&s);
        for j in 0..n {
            let a = 2.0 * PI * j as f64 / n as f64;
            assert!((d1[j] - 3.0 * (3.0 * a).cos()).abs() < 1e-12);
            assert!((d2[j] + 9.0 * (3.0 * a).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_odd_and_small_sizes() {
        assert!(families::latitude(1.0, 15).is_err());
        assert!(families::latitude(1.0, 8).is_err());
        assert!(families::latitude(1.0, 18).is_ok());
    }
}
