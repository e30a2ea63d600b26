//! Nyström discretization of `μ/2 + Kμ = g` and its dense solution.
//!
//! `K` is the double-layer operator with kernel `∂G_k(x₀, y)/∂n_y`, where
//! `n = t × y` points into `Ω`.  Away from the diagonal the kernel is
//! `(C_k/2) F_w(w) (x₀ - y)·n` with `w = 1 - ‖x₀ - y‖²/4`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{diag_kernel_limit, BoundaryGeometry, SphereCurve, SpherePoint, Vec3};
use crate::quadrature::{AlpertStencil, QuadratureRule};
use crate::specfun::{Conical, SeriesPolicy, YukawaDegree};

/// Separation below which the kernel refuses to evaluate.
pub const KERNEL_MIN_DISTANCE: f64 = 1e-10;

/// Density values at the boundary nodes, curve by curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub values: Vec<f64>,
}

impl Density {
    pub fn new(values: Vec<f64>, geometry: &BoundaryGeometry) -> Result<Self> {
        if values.len() != geometry.size() {
            return Err(Error::LengthMismatch {
                expected: geometry.size(),
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn zeros(geometry: &BoundaryGeometry) -> Self {
        Self {
            values: vec![0.0; geometry.size()],
        }
    }
}

/// Double-layer kernel evaluator for a fixed degree.
#[derive(Debug, Clone)]
pub struct DlpKernel {
    conical: Conical,
}

impl DlpKernel {
    pub fn new(deg: YukawaDegree, policy: SeriesPolicy) -> Result<Self> {
        Ok(Self {
            conical: Conical::new(deg, policy)?,
        })
    }

    pub fn degree(&self) -> YukawaDegree {
        self.conical.degree()
    }

    pub fn conical(&self) -> &Conical {
        &self.conical
    }

    /// `∂G_k(x₀, y)/∂n` for a source `y` with in-surface normal `n`.
    pub fn eval(&self, target: &Vec3, source: &Vec3, normal: &Vec3) -> Result<f64> {
        let d = target - source;
        let r2 = d.norm_squared();
        if !(r2 >= KERNEL_MIN_DISTANCE * KERNEL_MIN_DISTANCE) {
            return Err(Error::Singularity(r2.sqrt()));
        }
        let s = 0.25 * r2;
        let (_, fw) = self.conical.eval(1.0 - s, s)?;
        Ok(0.5 * self.degree().c_k() * fw * d.dot(normal))
    }

    /// `G_k(x, y)` from the chordal distance.
    pub fn green(&self, x: &Vec3, y: &Vec3) -> Result<f64> {
        let r2 = (x - y).norm_squared();
        if !(r2 >= KERNEL_MIN_DISTANCE * KERNEL_MIN_DISTANCE) {
            return Err(Error::Singularity(r2.sqrt()));
        }
        self.conical.green_r2(r2)
    }
}

/// `curl_S G_k(target, y)·t(y)` for the source node `(y, n)`.
pub fn dlp_kernel(
    deg: YukawaDegree,
    target: &SpherePoint,
    source: &SpherePoint,
    normal: &Vec3,
) -> Result<f64> {
    DlpKernel::new(deg, SeriesPolicy::default())?.eval(target.coords(), source.coords(), normal)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub gmres_iterations: usize,
    pub gmres_relres: f64,
    pub residual_history: Vec<f64>,
    pub condition_2norm: Option<f64>,
    pub eigenvalues: Option<Vec<(f64, f64)>>,
}

/// Dense system `(I/2 + K) μ = g`.
#[derive(Debug, Clone)]
pub struct NystromSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: Vec<f64>,
    pub solution: Option<Density>,
    pub diagnostics: Diagnostics,
}

impl NystromSystem {
    pub fn new(matrix: DMatrix<f64>, rhs: Vec<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::LengthMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        if rhs.len() != matrix.nrows() {
            return Err(Error::LengthMismatch {
                expected: matrix.nrows(),
                got: rhs.len(),
            });
        }
        Ok(Self {
            matrix,
            rhs,
            solution: None,
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Interpolated geometry at the auxiliary nodes of every singular row of a
/// curve: `points[i * naux + q]`.
struct AuxGeometry {
    naux: usize,
    points: Vec<Vec3>,
    normals: Vec<Vec3>,
    speeds: Vec<f64>,
}

impl AuxGeometry {
    fn new(curve: &SphereCurve, stencil: &AlpertStencil) -> Self {
        let n = curve.len();
        let naux = stencil.aux.len();
        let mut points = Vec::with_capacity(n * naux);
        let mut normals = Vec::with_capacity(n * naux);
        let mut speeds = Vec::with_capacity(n * naux);
        for i in 0..n {
            for node in &stencil.aux {
                let mut x = Vec3::zeros();
                let mut d = Vec3::zeros();
                for (m, c) in node.interp.iter().enumerate() {
                    let j = (i + m) % n;
                    x += curve.nodes[j] * *c;
                    d += curve.d1[j] * *c;
                }
                let x = x.normalize();
                let v = d - x * x.dot(&d);
                let t = v / v.norm();
                points.push(x);
                normals.push(t.cross(&x));
                speeds.push(d.norm());
            }
        }
        Self {
            naux,
            points,
            normals,
            speeds,
        }
    }
}

/// Assembles `I/2 + K`.  Same-curve blocks use the chosen rule (trapezoid
/// with the diagonal limit, or the hybrid rule with interpolation folded
/// in); blocks coupling different curves use the trapezoid rule.
pub fn assemble(
    deg: YukawaDegree,
    geometry: &BoundaryGeometry,
    rule: QuadratureRule,
    policy: SeriesPolicy,
) -> Result<DMatrix<f64>> {
    let kernel = DlpKernel::new(deg, policy)?;
    let curves = geometry.curves();
    let offsets = geometry.offsets();
    let dim = geometry.size();

    for c in curves {
        if c.len() < rule.min_nodes() {
            return Err(Error::Quadrature(format!(
                "curve with {} nodes is too coarse for {rule:?}",
                c.len()
            )));
        }
    }
    let stencils: Vec<Option<(AlpertStencil, AuxGeometry)>> = match rule {
        QuadratureRule::Trapezoid => curves.iter().map(|_| None).collect(),
        QuadratureRule::Alpert16 => curves
            .iter()
            .map(|c| {
                let st = AlpertStencil::new(c.len())?;
                let aux = AuxGeometry::new(c, &st);
                Ok(Some((st, aux)))
            })
            .collect::<Result<_>>()?,
    };

    // (curve, local index) of every global row
    let owners: Vec<(usize, usize)> = curves
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| (0..c.len()).map(move |i| (ci, i)))
        .collect();

    let rows: Vec<Vec<f64>> = owners
        .par_iter()
        .map(|&(ci, i)| -> Result<Vec<f64>> {
            let mut row = vec![0.0; dim];
            let x0 = &curves[ci].nodes[i];
            for (cj, src) in curves.iter().enumerate() {
                let base = offsets[cj];
                let h = src.h();
                if cj != ci {
                    for j in 0..src.len() {
                        row[base + j] =
                            h * src.speed[j] * kernel.eval(x0, &src.nodes[j], &src.normal[j])?;
                    }
                    continue;
                }
                match &stencils[cj] {
                    None => {
                        for j in 0..src.len() {
                            row[base + j] = if j == i {
                                h * src.speed[j] * diag_kernel_limit(src, j)
                            } else {
                                h * src.speed[j]
                                    * kernel.eval(x0, &src.nodes[j], &src.normal[j])?
                            };
                        }
                    }
                    Some((st, aux)) => {
                        let n = src.len();
                        for m in st.regular_offsets() {
                            let j = (i + m) % n;
                            row[base + j] +=
                                h * src.speed[j] * kernel.eval(x0, &src.nodes[j], &src.normal[j])?;
                        }
                        for (q, node) in st.aux.iter().enumerate() {
                            let k = i * aux.naux + q;
                            let val = node.weight
                                * aux.speeds[k]
                                * kernel.eval(x0, &aux.points[k], &aux.normals[k])?;
                            for (m, c) in node.interp.iter().enumerate() {
                                row[base + (i + m) % n] += val * c;
                            }
                        }
                    }
                }
            }
            row[offsets[ci] + i] += 0.5;
            Ok(row)
        })
        .collect::<Result<_>>()?;

    Ok(DMatrix::from_fn(dim, dim, |r, c| rows[r][c]))
}

/// Output of [`gmres`].
#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relres: f64,
    /// Relative residual after each iteration, starting with 1.
    pub history: Vec<f64>,
}

/// Unrestarted GMRES from a zero initial guess, modified Gram-Schmidt with
/// one reorthogonalisation pass, Givens rotations on the Hessenberg matrix.
pub fn gmres(a: &DMatrix<f64>, b: &[f64], tol: f64, max_iter: usize) -> Result<GmresOutcome> {
    let n = a.nrows();
    if b.len() != n || a.ncols() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let bv = DVector::from_column_slice(b);
    let beta = bv.norm();
    if beta == 0.0 {
        return Ok(GmresOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relres: 0.0,
            history: vec![0.0],
        });
    }
    let max_iter = max_iter.min(n);
    let mut basis: Vec<DVector<f64>> = vec![&bv / beta];
    // column-wise upper Hessenberg after rotation
    let mut hess: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<(f64, f64)> = Vec::new();
    let mut g = vec![beta];
    let mut history = vec![1.0];
    let mut iterations = 0;

    for k in 0..max_iter {
        let mut w = a * &basis[k];
        let mut col = vec![0.0; k + 2];
        for _pass in 0..2 {
            for (j, v) in basis.iter().enumerate() {
                let c = v.dot(&w);
                col[j] += c;
                w.axpy(-c, v, 1.0);
            }
        }
        let hn = w.norm();
        col[k + 1] = hn;
        for (j, &(c, s)) in cs.iter().enumerate() {
            let t = c * col[j] + s * col[j + 1];
            col[j + 1] = -s * col[j] + c * col[j + 1];
            col[j] = t;
        }
        let rho = col[k].hypot(col[k + 1]);
        let (c, s) = if rho == 0.0 {
            (1.0, 0.0)
        } else {
            (col[k] / rho, col[k + 1] / rho)
        };
        col[k] = rho;
        col[k + 1] = 0.0;
        cs.push((c, s));
        g.push(-s * g[k]);
        g[k] *= c;
        hess.push(col);
        iterations = k + 1;
        let est = g[k + 1].abs() / beta;
        history.push(est);
        if est <= tol || hn <= f64::EPSILON * beta * 1e-3 {
            break;
        }
        basis.push(w / hn);
    }

    // back substitution
    let m = iterations;
    let mut y = vec![0.0; m];
    for i in (0..m).rev() {
        let mut acc = g[i];
        for j in i + 1..m {
            acc -= hess[j][i] * y[j];
        }
        y[i] = acc / hess[i][i];
    }
    let mut x = DVector::zeros(n);
    for (j, yj) in y.iter().enumerate() {
        x.axpy(*yj, &basis[j], 1.0);
    }
    let relres = (&bv - a * &x).norm() / beta;
    if let Some(last) = history.last_mut() {
        *last = relres;
    }
    let out = GmresOutcome {
        x: x.as_slice().to_vec(),
        iterations,
        relres,
        history,
    };
    if relres > tol {
        return Err(Error::Solver {
            iterations: out.iterations,
            relres: out.relres,
            history: out.history,
        });
    }
    Ok(out)
}

/// Solves the system in place, recording iterations and residuals.
pub fn gmres_solve(system: &mut NystromSystem, tol: f64, max_iter: usize) -> Result<&Density> {
    let out = gmres(&system.matrix, &system.rhs, tol, max_iter)?;
    system.diagnostics.gmres_iterations = out.iterations;
    system.diagnostics.gmres_relres = out.relres;
    system.diagnostics.residual_history = out.history;
    system.solution = Some(Density { values: out.x });
    Ok(system.solution.as_ref().unwrap())
}

/// `σ_max / σ_min` of a square matrix.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// All eigenvalues `(re, im)` via Hessenberg reduction and shifted QR
/// (real Schur form).
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<(f64, f64)>> {
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 1000 * a.nrows().max(1))
        .ok_or(Error::Eigen)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect())
}

/// Fills the condition number and, when asked, the spectrum.
pub fn condition_and_spectrum(system: &mut NystromSystem, want_eigs: bool) -> Result<&Diagnostics> {
    system.diagnostics.condition_2norm = Some(condition_number(&system.matrix));
    if want_eigs {
        system.diagnostics.eigenvalues = Some(eigenvalues(&system.matrix)?);
    }
    Ok(&system.diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gmres_scaled_identity_one_step() {
        let a = DMatrix::<f64>::identity(5, 5) * 0.5;
        let b = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        let out = gmres(&a, &b, 1e-11, 50).unwrap();
        assert_eq!(out.iterations, 1);
        for (x, bb) in out.x.iter().zip(&b) {
            assert!((x - 2.0 * bb).abs() < 1e-14);
        }
    }

    #[test]
    fn gmres_zero_rhs() {
        let a = DMatrix::<f64>::identity(3, 3);
        let out = gmres(&a, &[0.0; 3], 1e-11, 10).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.x.iter().all(|v| *v == 0.0));
    }
}
