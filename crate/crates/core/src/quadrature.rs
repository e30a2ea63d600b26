//! Periodic trapezoid rule, trigonometric interpolation, and the
//! 16th-order hybrid Gauss-trapezoidal rule for logarithmic singularities.
//!
//! The hybrid rule integrates `f(α) = φ(α) log|α - α_i| + ψ(α)` over a
//! period with `φ`, `ψ` smooth.  It keeps the trapezoid weight `h` on
//! regular nodes at offsets `a..=N-a` from the singular node and replaces
//! the `2a - 1` nodes nearest the singularity by `j = 15` auxiliary nodes on
//! each side, at offsets `±x_p h` with weights `w_p h`.  Densities at
//! auxiliary nodes come from the trigonometric interpolant of the grid
//! samples.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::SphereCurve;

/// Auxiliary node offsets `x_p` (units of `h`) and weights `w_p` of the
/// logarithmic end-correction with 15 nodes and 10 skipped regular nodes.
/// They solve the 30 moment conditions
/// `Σ w_p x_p^g = -ζ(-g, a)` and `Σ w_p x_p^g ln x_p = ζ'(-g, a)`,
/// `g = 0..14`, `a = 10` (regenerate with `scripts/alpert_log_rule.py`).
pub const ALPERT_LOG16: [(f64, f64); 15] = include!("alpert_log16.in");

/// Regular nodes skipped on each side of the singular node, counting it.
pub const ALPERT_LOG16_SKIP: usize = 10;

/// `(2π/N) Σ samples_j · speed_j`, the arclength integral on a curve.
pub fn trapezoid_integrate(samples: &[f64], curve: &SphereCurve) -> Result<f64> {
    if samples.len() != curve.len() {
        return Err(Error::LengthMismatch {
            expected: curve.len(),
            got: samples.len(),
        });
    }
    let sum: f64 = samples.iter().zip(&curve.speed).map(|(f, s)| f * s).sum();
    Ok(curve.h() * sum)
}

/// Periodic cardinal function of the `N`-point trigonometric interpolant
/// (even `N`): `sin(Nθ/2) cot(θ/2) / N`, equal to 1 at `θ ≡ 0`.
pub fn periodic_sinc(n: usize, theta: f64) -> f64 {
    let half = 0.5 * (theta - 2.0 * PI * (theta / (2.0 * PI)).round());
    let sh = half.sin();
    if sh.abs() < 1e-14 {
        // θ ≡ 0 mod 2π from either side
        return 1.0;
    }
    (n as f64 * half).sin() * half.cos() / (sh * n as f64)
}

/// Evaluates the trigonometric interpolant of `samples` (taken at
/// `α_j = 2πj/N`) at each target parameter.
pub fn trig_interpolate(samples: &[f64], targets: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let h = 2.0 * PI / n as f64;
    targets
        .iter()
        .map(|&t| {
            let pos = t.rem_euclid(2.0 * PI) / h;
            let nearest = pos.round();
            if (pos - nearest).abs() < 1e-13 {
                return samples[(nearest as usize) % n];
            }
            samples
                .iter()
                .enumerate()
                .map(|(j, f)| f * periodic_sinc(n, t - h * j as f64))
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    Trapezoid,
    Alpert16,
}

impl QuadratureRule {
    /// Smallest `N` the rule supports.
    pub fn min_nodes(&self) -> usize {
        match self {
            QuadratureRule::Trapezoid => 16,
            QuadratureRule::Alpert16 => 2 * ALPERT_LOG16_SKIP,
        }
    }
}

/// An off-grid node of a singular row.
#[derive(Debug, Clone)]
pub struct AuxNode {
    /// Parameter offset from the singular node.
    pub offset: f64,
    /// Parameter weight (already scaled by `h`).
    pub weight: f64,
    /// Interpolation weights: the value at the node is
    /// `Σ_m interp[m] f(α_{i+m})`, `m` taken mod `N`.
    pub interp: Vec<f64>,
}

/// Hybrid rule for a singularity at node `i` of an `N`-point grid.
#[derive(Debug, Clone)]
pub struct SingularRow {
    pub target: usize,
    pub n: usize,
    /// `(node index, parameter weight)` for the retained regular nodes.
    pub regular: Vec<(usize, f64)>,
    pub aux: Vec<AuxNode>,
}

impl SingularRow {
    /// Weights acting on the `N` grid samples of a function whose product
    /// with `factor(aux node)` is integrated; `factor` multiplies each
    /// auxiliary contribution before the interpolation is folded in.
    pub fn fold(&self, aux_factor: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.n];
        for &(j, wt) in &self.regular {
            w[j] += wt;
        }
        for (node, f) in self.aux.iter().zip(aux_factor) {
            let c = node.weight * f;
            for (m, d) in node.interp.iter().enumerate() {
                w[(self.target + m) % self.n] += c * d;
            }
        }
        w
    }

    /// Row acting on grid samples of the full integrand (no separate
    /// singular factor).
    pub fn folded(&self) -> Vec<f64> {
        self.fold(&vec![1.0; self.aux.len()])
    }

    /// Applies the rule to a function that can be evaluated anywhere;
    /// `f` receives the absolute parameter.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let h = 2.0 * PI / self.n as f64;
        let base = h * self.target as f64;
        let reg: f64 = self
            .regular
            .iter()
            .map(|&(j, w)| w * f(h * j as f64))
            .sum();
        let aux: f64 = self.aux.iter().map(|a| a.weight * f(base + a.offset)).sum();
        reg + aux
    }
}

/// Per-`N` precomputation of the hybrid rule: offsets, weights and
/// interpolation rows of the 30 auxiliary nodes relative to the singular
/// node, shared by every target index.
#[derive(Debug, Clone)]
pub struct AlpertStencil {
    pub n: usize,
    pub aux: Vec<AuxNode>,
}

impl AlpertStencil {
    pub fn new(n: usize) -> Result<Self> {
        let a = ALPERT_LOG16_SKIP;
        if n < 2 * a || n % 2 != 0 {
            return Err(Error::Quadrature(format!(
                "hybrid rule needs an even N >= {}, got {n}",
                2 * a
            )));
        }
        let h = 2.0 * PI / n as f64;
        let mut aux = Vec::with_capacity(2 * ALPERT_LOG16.len());
        for &(x, w) in ALPERT_LOG16.iter() {
            for sign in [1.0, -1.0] {
                let offset = sign * x * h;
                // phase in grid units first: the outer nodes sit within 1e-6
                // of a grid point, so subtracting after scaling by h loses digits
                let interp = (0..n)
                    .map(|m| {
                        let mut u = sign * x - m as f64;
                        if u < -(n as f64) / 2.0 {
                            u += n as f64;
                        }
                        periodic_sinc(n, u * h)
                    })
                    .collect();
                aux.push(AuxNode {
                    offset,
                    weight: w * h,
                    interp,
                });
            }
        }
        Ok(Self { n, aux })
    }

    /// Regular node offsets kept by the rule.
    pub fn regular_offsets(&self) -> std::ops::RangeInclusive<usize> {
        ALPERT_LOG16_SKIP..=self.n - ALPERT_LOG16_SKIP
    }

    pub fn row(&self, target: usize) -> SingularRow {
        let h = 2.0 * PI / self.n as f64;
        SingularRow {
            target,
            n: self.n,
            regular: self
                .regular_offsets()
                .map(|m| ((target + m) % self.n, h))
                .collect(),
            aux: self.aux.clone(),
        }
    }
}

/// Composite rule for a logarithmic singularity at `target_index`.
pub fn singular_row_weights(
    rule: QuadratureRule,
    target_index: usize,
    n: usize,
) -> Result<SingularRow> {
    if rule != QuadratureRule::Alpert16 {
        return Err(Error::Quadrature(
            "singular rows exist only for the hybrid rule".into(),
        ));
    }
    if target_index >= n {
        return Err(Error::Quadrature(format!(
            "target index {target_index} out of range for N = {n}"
        )));
    }
    Ok(AlpertStencil::new(n)?.row(target_index))
}
