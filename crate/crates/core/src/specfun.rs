//! Conical (Mehler) functions `P_{-1/2+iτ}` in real arithmetic.
//!
//! With `w = (1-x)/2` the conical function is the Gauss series
//! `₂F₁(1/2-iτ, 1/2+iτ; 1; w)`.  The two upper parameters are complex
//! conjugates, so every coefficient is real and positive:
//!
//! ```text
//! c_{n+1} / c_n = ((n + 1/2)² + τ²) / (n + 1)²,   c_0 = 1.
//! ```
//!
//! Three evaluation branches cover `(-1, 1]`:
//!
//! * `Direct`: the series in `w`, used for `w <= switch_w`.
//! * `LogCase`: the `c = a + b` expansion about `w = 1` in powers of
//!   `s = 1 - w`, with digamma coefficients.  For large `τ` its terms behave
//!   like the power series of `K₀(2τ√s)` and cancel catastrophically once
//!   `2τ√s` grows, so it is only used while `τ²s <= 1`.
//! * `Continuation`: Taylor steps of the hypergeometric ODE from cached
//!   anchors placed at `s_0·2^{-i}`, seeded by the direct series at
//!   `w = switch_w - 0.1`.  Steps always move toward `w = 1`, where `P` is
//!   the dominant solution, so errors are not amplified.
//!
//! All evaluators return the pair `(F, dF/dw)`; `dP/dx = -F_w / 2`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest `τ` accepted; beyond it `cosh(πτ)` and the function values
/// near the antipode leave the range of `f64`.
pub const TAU_MAX: f64 = 220.0;

/// Parameters `k`, `τ = √(4k²-1)/2`, `ν = -1/2 + iτ` and the normalising
/// constant `C_k = 1 / (4 cosh πτ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YukawaDegree {
    k: f64,
    tau: f64,
    c_k: f64,
}

impl YukawaDegree {
    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() || k <= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "k must satisfy k > 1/2, got {k}"
            )));
        }
        let tau = (4.0 * k * k - 1.0).sqrt() / 2.0;
        if tau > TAU_MAX {
            return Err(Error::InvalidParameter(format!(
                "k = {k} too large (tau = {tau} exceeds {TAU_MAX})"
            )));
        }
        let c_k = 1.0 / (4.0 * (PI * tau).cosh());
        Ok(Self { k, tau, c_k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn c_k(&self) -> f64 {
        self.c_k
    }

    pub fn nu_real(&self) -> f64 {
        -0.5
    }

    pub fn nu_imag(&self) -> f64 {
        self.tau
    }

    /// `ab = (1/2)² + τ² = k²`.
    fn ab(&self) -> f64 {
        self.k * self.k
    }

    /// `c_{n+1} / c_n`.
    #[inline]
    fn coef_ratio(&self, n: usize) -> f64 {
        let a = n as f64 + 0.5;
        let d = n as f64 + 1.0;
        (a * a + self.tau * self.tau) / (d * d)
    }
}

/// Truncation controls shared by the series branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPolicy {
    pub rel_tol: f64,
    pub max_terms: usize,
    pub switch_w: f64,
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            max_terms: 1000,
            switch_w: 0.75,
        }
    }
}

impl SeriesPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1e-10) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must lie in (0, 1e-10), got {}",
                self.rel_tol
            )));
        }
        if self.max_terms < 50 {
            return Err(Error::InvalidParameter(format!(
                "max_terms must be at least 50, got {}",
                self.max_terms
            )));
        }
        if !(self.switch_w >= 0.5 && self.switch_w < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "switch_w must lie in [0.5, 1), got {}",
                self.switch_w
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Direct,
    LogCase,
    Continuation,
}

#[derive(Debug, Clone, Copy)]
struct Anchor {
    s: f64,
    f: f64,
    fw: f64,
}

/// Evaluator for `F(w) = P_ν(1 - 2w)` and `dF/dw` at a fixed degree.
///
/// Construction caches the continuation anchors, so build one per degree
/// and reuse it for many evaluations.
#[derive(Debug, Clone)]
pub struct Conical {
    deg: YukawaDegree,
    policy: SeriesPolicy,
    /// `-2γ - 2 Re ψ(1/2 + iτ)`.
    h0: f64,
    anchors: Vec<Anchor>,
}

impl Conical {
    pub fn new(deg: YukawaDegree, policy: SeriesPolicy) -> Result<Self> {
        policy.validate()?;
        let h0 = -2.0 * EULER_GAMMA - 2.0 * digamma_conjugate_sum(deg.tau, 0);
        let mut me = Self {
            deg,
            policy,
            h0,
            anchors: Vec::new(),
        };
        // seeded below the switch so every continuation step, including
        // the overlap checks around switch_w, moves toward w = 1
        let w_seed = policy.switch_w - 0.1;
        let s_top = 1.0 - w_seed;
        let t2 = deg.tau * deg.tau;
        if t2 * (1.0 - policy.switch_w) > 1.0 {
            let (f, fw) = me.direct(w_seed)?;
            let mut a = Anchor { s: s_top, f, fw };
            me.anchors.push(a);
            // one anchor beyond the first s below 1/τ², so every s handled
            // by continuation lies in (s_{i+1}, s_i] for some anchor i
            while a.s * t2 > 0.5 {
                let s = a.s / 2.0;
                let (f, fw) = me.taylor(&a, s)?;
                a = Anchor { s, f, fw };
                me.anchors.push(a);
            }
        }
        Ok(me)
    }

    pub fn degree(&self) -> YukawaDegree {
        self.deg
    }

    pub fn policy(&self) -> SeriesPolicy {
        self.policy
    }

    /// Branch chosen for the point `w = 1 - s`.
    pub fn branch(&self, w: f64, s: f64) -> Branch {
        if w <= self.policy.switch_w {
            Branch::Direct
        } else if self.deg.tau * self.deg.tau * s <= 1.0 || self.anchors.is_empty() {
            Branch::LogCase
        } else {
            Branch::Continuation
        }
    }

    /// `(F, dF/dw)` at `w = 1 - s`.  Both coordinates are passed so that
    /// callers can supply whichever is known without cancellation.
    pub fn eval(&self, w: f64, s: f64) -> Result<(f64, f64)> {
        self.eval_with(w, s, self.branch(w, s))
    }

    pub fn eval_with(&self, w: f64, s: f64, branch: Branch) -> Result<(f64, f64)> {
        if !(s > 0.0) || !w.is_finite() {
            return Err(Error::Domain {
                what: "conical function",
                x: 2.0 * s - 1.0,
            });
        }
        match branch {
            Branch::Direct => self.direct(w),
            Branch::LogCase => self.log_case(s),
            Branch::Continuation => {
                let a = self.anchor_for(s)?;
                self.taylor(a, s)
            }
        }
    }

    /// `P_ν(x)`.
    pub fn p(&self, x: f64) -> Result<f64> {
        if !(x > -1.0 && x <= 1.0) {
            return Err(Error::Domain {
                what: "conical_p",
                x,
            });
        }
        Ok(self.eval(0.5 * (1.0 - x), 0.5 * (1.0 + x))?.0)
    }

    /// `dP_ν/dx`.
    pub fn p_deriv(&self, x: f64) -> Result<f64> {
        if !(1.0 + x >= 1e-12 && x <= 1.0) {
            return Err(Error::Domain {
                what: "conical_p_deriv",
                x,
            });
        }
        Ok(-0.5 * self.eval(0.5 * (1.0 - x), 0.5 * (1.0 + x))?.1)
    }

    fn direct(&self, w: f64) -> Result<(f64, f64)> {
        let tol = self.policy.rel_tol;
        // a_n = c_n w^n, d_n = n c_n w^{n-1}
        let mut a = 1.0;
        let mut f = 1.0;
        let mut fw = 0.0;
        for n in 0..self.policy.max_terms {
            let g = self.deg.coef_ratio(n);
            let d = (n as f64 + 1.0) * g * a;
            a *= g * w;
            f += a;
            fw += d;
            let q = w * g.max(1.0) * (n as f64 + 2.0) / (n as f64 + 1.0);
            if q < 1.0 {
                let room = 1.0 - q;
                if a <= tol * f * room && d <= tol * fw * room {
                    return Ok((f, fw));
                }
            }
        }
        Err(Error::Convergence {
            terms: self.policy.max_terms,
            last_term: a,
        })
    }

    fn log_case(&self, s: f64) -> Result<(f64, f64)> {
        let tol = self.policy.rel_tol;
        let tau2 = self.deg.tau * self.deg.tau;
        let ls = s.ln();
        let pref = (PI * self.deg.tau).cosh() / PI;
        // P   = pref Σ c_n s^n (h_n - ln s)
        // P_s = pref Σ c_n s^{n-1} (n (h_n - ln s) - 1)
        let mut h = self.h0;
        let mut cs = 1.0; // c_n s^n
        let mut p = h - ls;
        let mut mag = p.abs();
        let mut ps = -1.0 / s;
        let mut mag_s = ps.abs();
        for n in 0..self.policy.max_terms {
            let g = self.deg.coef_ratio(n);
            let m = n as f64 + 0.5;
            h += 2.0 / (n as f64 + 1.0) - 2.0 * m / (m * m + tau2);
            let e = cs * g; // c_{n+1} s^n
            cs = e * s;
            let tp = cs * (h - ls);
            let tps = e * ((n as f64 + 1.0) * (h - ls) - 1.0);
            p += tp;
            ps += tps;
            mag += tp.abs();
            mag_s += tps.abs();
            let q = s * g.max(1.0) * (n as f64 + 2.0) / (n as f64 + 1.0);
            if q < 1.0 {
                let room = 1.0 - q;
                if tp.abs() <= tol * mag * room && tps.abs() <= tol * mag_s * room {
                    return Ok((pref * p, -pref * ps));
                }
            }
        }
        Err(Error::Convergence {
            terms: self.policy.max_terms,
            last_term: cs,
        })
    }

    fn anchor_for(&self, s: f64) -> Result<&Anchor> {
        let first = self.anchors.first().ok_or(Error::Domain {
            what: "conical continuation",
            x: 2.0 * s - 1.0,
        })?;
        if s > first.s {
            return Err(Error::Domain {
                what: "conical continuation",
                x: 2.0 * s - 1.0,
            });
        }
        let i = ((first.s / s).log2().floor() as usize).min(self.anchors.len() - 1);
        let a = &self.anchors[i];
        Ok(a)
    }

    /// Taylor step of `w(1-w)F'' + (1-2w)F' - k²F = 0` from an anchor.
    fn taylor(&self, a: &Anchor, s: f64) -> Result<(f64, f64)> {
        let tol = self.policy.rel_tol;
        let k2 = self.deg.ab();
        let big_a = (1.0 - a.s) * a.s;
        let big_b = 2.0 * a.s - 1.0;
        let t = a.s - s;
        // g_m = d_m t^{m-1}; F = d_0 + Σ g_m t, F' = Σ m g_m
        let mut g_prev = a.fw;
        let mut g = (k2 * a.f - big_b * a.fw) * t / (2.0 * big_a);
        let mut f = a.f + g_prev * t + g * t;
        let mut fw = g_prev + 2.0 * g;
        let mut mag = a.f.abs() + (g_prev * t).abs() + (g * t).abs();
        let mut mag_w = g_prev.abs() + 2.0 * g.abs();
        let mut small = 0;
        for m in 1..self.policy.max_terms {
            let mf = m as f64;
            let next = ((mf * mf + mf + k2) * g_prev * t * t
                - big_b * (mf + 1.0) * (mf + 1.0) * g * t)
                / (big_a * (mf + 1.0) * (mf + 2.0));
            g_prev = g;
            g = next;
            let tf = g * t;
            let tw = (mf + 2.0) * g;
            f += tf;
            fw += tw;
            mag += tf.abs();
            mag_w += tw.abs();
            if tf.abs() <= tol * mag && tw.abs() <= tol * mag_w {
                small += 1;
                if small >= 2 {
                    return Ok((f, fw));
                }
            } else {
                small = 0;
            }
        }
        Err(Error::Convergence {
            terms: self.policy.max_terms,
            last_term: g,
        })
    }
}

/// `P_ν(x)` for `-1 < x <= 1`.
pub fn conical_p(deg: YukawaDegree, x: f64, policy: SeriesPolicy) -> Result<f64> {
    Conical::new(deg, policy)?.p(x)
}

/// `dP_ν/dx` for `-1 + 10⁻¹² <= x <= 1`.
pub fn conical_p_deriv(deg: YukawaDegree, x: f64, policy: SeriesPolicy) -> Result<f64> {
    Conical::new(deg, policy)?.p_deriv(x)
}

/// Complex digamma: upward recurrence to `|z| > 10`, then the asymptotic
/// series through `z^{-12}`.
pub fn digamma(mut z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    while z.norm() <= 10.0 {
        acc -= z.inv();
        z += 1.0;
    }
    let r = z.inv();
    let r2 = r * r;
    let tail = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0 - r2 * (1.0 / 132.0 - r2 * (691.0 / 32760.0))))));
    acc + z.ln() - 0.5 * r - tail
}

/// `Re ψ(1/2 + iτ + n)`, the mean of `ψ(a+n)` and `ψ(b+n)` for the conjugate
/// pair `a, b = 1/2 ± iτ`.
pub fn digamma_conjugate_sum(tau: f64, n: usize) -> f64 {
    digamma(Complex64::new(n as f64 + 0.5, tau)).re
}

/// `G_k = C_k P_ν(-c)` with `c = ⟨x, x₀⟩`.
pub fn fundamental_solution(deg: YukawaDegree, c: f64, policy: SeriesPolicy) -> Result<f64> {
    Conical::new(deg, policy)?.green(c)
}

impl Conical {
    /// `G_k` as a function of the solid-angle cosine.
    pub fn green(&self, c: f64) -> Result<f64> {
        if c >= 1.0 - 1e-12 {
            return Err(Error::Singularity((2.0 - 2.0 * c).max(0.0).sqrt()));
        }
        if c < -1.0 {
            return Err(Error::Domain {
                what: "fundamental_solution",
                x: c,
            });
        }
        Ok(self.deg.c_k * self.eval(0.5 * (1.0 + c), 0.5 * (1.0 - c))?.0)
    }

    /// `G_k` as a function of the chordal distance squared `r² = ‖x - x₀‖²`,
    /// which avoids the cancellation in `1 - c` for nearby points.
    pub fn green_r2(&self, r2: f64) -> Result<f64> {
        if !(r2 > 0.0) {
            return Err(Error::Singularity(r2.max(0.0).sqrt()));
        }
        let s = 0.25 * r2;
        Ok(self.deg.c_k * self.eval(1.0 - s, s)?.0)
    }

    /// `dG_k/d(r²)`; the 3-space gradient in `x` is `2 (x - x₀) dG/d(r²)`.
    pub fn green_dr2(&self, r2: f64) -> Result<f64> {
        if !(r2 > 0.0) {
            return Err(Error::Singularity(r2.max(0.0).sqrt()));
        }
        let s = 0.25 * r2;
        // dF/d(r²) = dF/dw · dw/d(r²) = -F_w / 4
        Ok(-0.25 * self.deg.c_k * self.eval(1.0 - s, s)?.1)
    }
}
