//! Off-boundary evaluation, manufactured solutions and verification
//! checks.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::bie::{Density, DlpKernel};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryGeometry, DomainSide, SpherePoint, Vec3};
use crate::specfun::{Conical, SeriesPolicy, YukawaDegree};

/// Default minimum 3-space distance between targets and boundary nodes.
pub const DEFAULT_MIN_DISTANCE: f64 = 0.2;

/// Points in `Ω` kept away from the boundary.
#[derive(Debug, Clone)]
pub struct TargetSet {
    points: Vec<SpherePoint>,
    min_distance: f64,
}

impl TargetSet {
    pub fn new(
        points: Vec<SpherePoint>,
        geometry: &BoundaryGeometry,
        min_distance: f64,
    ) -> Result<Self> {
        for (index, p) in points.iter().enumerate() {
            let distance = geometry.distance_to_boundary(p.coords());
            if distance < min_distance {
                return Err(Error::TargetTooClose {
                    index,
                    distance,
                    min: min_distance,
                });
            }
            if !geometry.contains(p.coords()) {
                return Err(Error::Geometry(format!("target {index} lies outside the domain")));
            }
        }
        Ok(Self {
            points,
            min_distance,
        })
    }

    /// Keeps the admissible points of a Fibonacci lattice with `candidates`
    /// points, at most `count` of them.
    pub fn lattice(
        geometry: &BoundaryGeometry,
        candidates: usize,
        count: usize,
        min_distance: f64,
    ) -> Result<Self> {
        let golden = PI * (3.0 - 5f64.sqrt());
        let mut pts = Vec::new();
        for i in 0..candidates {
            if pts.len() == count {
                break;
            }
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / candidates as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            let p = Vec3::new(r * phi.cos(), r * phi.sin(), z);
            if geometry.distance_to_boundary(&p) >= min_distance && geometry.contains(&p) {
                pts.push(SpherePoint::new(p)?);
            }
        }
        if pts.is_empty() {
            return Err(Error::Geometry("no admissible target points".into()));
        }
        Self::new(pts, geometry, min_distance)
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `u = Σ wᵢ G_k(·, cᵢ)` with every source outside `Ω̄`.
#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    pub deg: YukawaDegree,
    pub sources: Vec<SpherePoint>,
    pub weights: Vec<f64>,
}

impl ManufacturedSolution {
    pub fn new(
        deg: YukawaDegree,
        sources: Vec<SpherePoint>,
        weights: Vec<f64>,
        geometry: &BoundaryGeometry,
    ) -> Result<Self> {
        if sources.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: sources.len(),
                got: weights.len(),
            });
        }
        for (i, s) in sources.iter().enumerate() {
            if geometry.distance_to_boundary(s.coords()) == 0.0 || geometry.contains(s.coords()) {
                return Err(Error::Geometry(format!(
                    "source {i} does not lie strictly outside the domain"
                )));
            }
        }
        Ok(Self {
            deg,
            sources,
            weights,
        })
    }

    /// One unit source at the normalised node centroid of each curve.
    pub fn at_centroids(deg: YukawaDegree, geometry: &BoundaryGeometry) -> Result<Self> {
        let sources = geometry
            .curves()
            .iter()
            .map(|c| c.centroid())
            .collect::<Result<Vec<_>>>()?;
        let weights = vec![1.0; sources.len()];
        Self::new(deg, sources, weights, geometry)
    }

    /// Boundary data at the nodes of `geometry`.
    pub fn boundary_data(&self, geometry: &BoundaryGeometry) -> Result<Vec<f64>> {
        let con = Conical::new(self.deg, SeriesPolicy::default())?;
        geometry
            .nodes()
            .map(|x| self.eval_with(&con, x))
            .collect()
    }

    fn eval_with(&self, con: &Conical, x: &Vec3) -> Result<f64> {
        let mut u = 0.0;
        for (s, w) in self.sources.iter().zip(&self.weights) {
            let r2 = (x - s.coords()).norm_squared();
            u += w * con.green_r2(r2)?;
        }
        Ok(u)
    }
}

/// `u(x) = Σ wᵢ G_k(⟨x, cᵢ⟩)`.
pub fn exact_solution_eval(ms: &ManufacturedSolution, x: &SpherePoint) -> Result<f64> {
    let con = Conical::new(ms.deg, SeriesPolicy::default())?;
    ms.eval_with(&con, x.coords())
}

/// Trapezoid evaluation of the double-layer potential at arbitrary points
/// off the boundary (no distance checks).
pub fn eval_dlp_points(
    deg: YukawaDegree,
    geometry: &BoundaryGeometry,
    density: &Density,
    points: &[Vec3],
) -> Result<Vec<f64>> {
    if density.values.len() != geometry.size() {
        return Err(Error::LengthMismatch {
            expected: geometry.size(),
            got: density.values.len(),
        });
    }
    let kernel = DlpKernel::new(deg, SeriesPolicy::default())?;
    points
        .par_iter()
        .map(|x| {
            let mut acc = 0.0;
            let mut g = 0;
            for c in geometry.curves() {
                let h = c.h();
                for j in 0..c.len() {
                    acc += h
                        * c.speed[j]
                        * density.values[g]
                        * kernel.eval(x, &c.nodes[j], &c.normal[j])?;
                    g += 1;
                }
            }
            Ok(acc)
        })
        .collect()
}

/// `u(x) = ∫_Γ ∂_n G_k(x, y) μ(y) ds_y` at the targets.
pub fn eval_dlp(
    deg: YukawaDegree,
    geometry: &BoundaryGeometry,
    density: &Density,
    targets: &TargetSet,
) -> Result<Vec<f64>> {
    for (index, p) in targets.points().iter().enumerate() {
        let distance = geometry.distance_to_boundary(p.coords());
        if distance < targets.min_distance() {
            return Err(Error::TargetTooClose {
                index,
                distance,
                min: targets.min_distance(),
            });
        }
    }
    let pts: Vec<Vec3> = targets.points().iter().map(|p| *p.coords()).collect();
    eval_dlp_points(deg, geometry, density, &pts)
}

/// `|-∫ G ∂_n u ds + ∫ u ∂_n G ds - u(x₀)|` inside `Ω`, and the magnitude
/// of the boundary integrals outside (where they vanish).
pub fn representation_check(
    deg: YukawaDegree,
    geometry: &BoundaryGeometry,
    ms: &ManufacturedSolution,
    x0: &SpherePoint,
) -> Result<f64> {
    let kernel = DlpKernel::new(deg, SeriesPolicy::default())?;
    let x0v = x0.coords();
    let mut acc = 0.0;
    for c in geometry.curves() {
        let h = c.h();
        for j in 0..c.len() {
            let y = &c.nodes[j];
            let n = &c.normal[j];
            let mut u = 0.0;
            let mut dudn = 0.0;
            for (s, w) in ms.sources.iter().zip(&ms.weights) {
                u += w * kernel.green(y, s.coords())?;
                // ∂_n G(c, y) at y, by symmetry of G
                dudn += w * kernel.eval(s.coords(), y, n)?;
            }
            let g = kernel.green(x0v, y)?;
            let dg = kernel.eval(x0v, y, n)?;
            acc += h * c.speed[j] * (u * dg - g * dudn);
        }
    }
    let expected = if geometry.contains(x0v) {
        exact_solution_eval(ms, x0)?
    } else {
        0.0
    };
    Ok((acc - expected).abs())
}

/// Finite-difference residual `|(-Δ_S + k²) G_k(·, source)|` at `x0`, using
/// the second-order stencil in spherical coordinates `(φ, θ)`.
pub fn pde_residual_check(
    deg: YukawaDegree,
    source: &SpherePoint,
    x0: &SpherePoint,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    let dist = (x0.coords() - source.coords()).norm();
    if dist < 10.0 * h {
        return Err(Error::Singularity(dist));
    }
    let (phi, theta) = x0.spherical();
    if theta.sin() < 10.0 * h {
        return Err(Error::InvalidParameter(
            "stencil too close to a coordinate pole".into(),
        ));
    }
    let con = Conical::new(deg, SeriesPolicy::default())?;
    let g = |p: f64, t: f64| -> Result<f64> {
        let x = SpherePoint::from_spherical(p, t);
        con.green_r2((x.coords() - source.coords()).norm_squared())
    };
    let f0 = g(phi, theta)?;
    let ftp = g(phi, theta + h)?;
    let ftm = g(phi, theta - h)?;
    let fpp = g(phi + h, theta)?;
    let fpm = g(phi - h, theta)?;
    let st = theta.sin();
    let lap_t = ((theta + 0.5 * h).sin() * (ftp - f0) - (theta - 0.5 * h).sin() * (f0 - ftm))
        / (h * h * st);
    let lap_p = (fpp - 2.0 * f0 + fpm) / (h * h * st * st);
    let k = deg.k();
    Ok((-(lap_t + lap_p) + k * k * f0).abs())
}

/// Largest deviation of the jump `u(y + δn) - u(y - δn)` of the double-layer
/// potential from `μ(y)` over the boundary nodes.  The potential is
/// evaluated with geometry and density resampled `upsample` times finer and
/// the jump is extrapolated to `δ = 0` by polynomial interpolation through
/// the offsets.
pub fn jump_residual(
    deg: YukawaDegree,
    geometry: &BoundaryGeometry,
    density: &Density,
    deltas: &[f64],
    upsample: usize,
) -> Result<f64> {
    if deltas.len() < 2 || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidParameter(
            "need at least two positive offsets".into(),
        ));
    }
    if density.values.len() != geometry.size() {
        return Err(Error::LengthMismatch {
            expected: geometry.size(),
            got: density.values.len(),
        });
    }
    let mut fine_curves = Vec::new();
    let mut fine_mu = Vec::new();
    for (c, w) in geometry.curves().iter().zip(geometry.offsets().windows(2)) {
        let f = c.upsample(upsample)?;
        let targets: Vec<f64> = (0..f.len()).map(|j| f.h() * j as f64).collect();
        fine_mu.extend(crate::quadrature::trig_interpolate(
            &density.values[w[0]..w[1]],
            &targets,
        ));
        fine_curves.push(f);
    }
    let fine = BoundaryGeometry::new(fine_curves, DomainSide::AsOriented)?;
    let fine_density = Density::new(fine_mu, &fine)?;

    let m = deltas.len();
    let mut points = Vec::with_capacity(2 * m * geometry.size());
    for c in geometry.curves() {
        for j in 0..c.len() {
            for &d in deltas {
                for sign in [1.0, -1.0] {
                    points.push((c.nodes[j] + c.normal[j] * (sign * d)).normalize());
                }
            }
        }
    }
    let u = eval_dlp_points(deg, &fine, &fine_density, &points)?;
    // Lagrange weights for the value at δ = 0
    let l: Vec<f64> = (0..m)
        .map(|q| {
            (0..m)
                .filter(|&r| r != q)
                .map(|r| deltas[r] / (deltas[r] - deltas[q]))
                .product()
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (i, mu) in density.values.iter().enumerate() {
        let jump: f64 = (0..m)
            .map(|q| l[q] * (u[2 * m * i + 2 * q] - u[2 * m * i + 2 * q + 1]))
            .sum();
        worst = worst.max((jump - mu).abs());
    }
    Ok(worst)
}
