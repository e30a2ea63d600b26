//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "schema": "yukawa-sphere/1",
//!   "k": 4.0,
//!   "quadrature": "alpert16",
//!   "geometry": {
//!     "n": 128,
//!     "curves": [
//!       { "family": "star_cap", "center": { "phi": 0.3, "theta": 0.9 },
//!         "rho": 0.35, "eps": 0.25, "m": 3 }
//!     ]
//!   },
//!   "boundary_data": { "kind": "manufactured" },
//!   "targets": { "count": 40 },
//!   "sweep": { "n": [32, 64, 128] }
//! }
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use evalexpr::{DefaultNumericTypes, EvalexprError, Function, HashMapContext, Value};
use evalexpr::{ContextWithMutableFunctions, ContextWithMutableVariables, Node};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use yukawa_sphere::geometry::{
    families, BoundaryGeometry, DomainSide, SphereCurve, SpherePoint, Vec3,
};
use yukawa_sphere::postproc::{ManufacturedSolution, TargetSet};
use yukawa_sphere::quadrature::QuadratureRule;
use yukawa_sphere::specfun::YukawaDegree;

use crate::{CliError, Result};

pub const SCHEMA: &str = "yukawa-sphere/1";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub k: f64,
    #[serde(default)]
    pub quadrature: QuadratureName,
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub boundary_data: BoundaryDataSpec,
    #[serde(default)]
    pub targets: TargetSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureName {
    Trapezoid,
    #[default]
    Alpert16,
}

impl QuadratureName {
    pub fn rule(self) -> QuadratureRule {
        match self {
            Self::Trapezoid => QuadratureRule::Trapezoid,
            Self::Alpert16 => QuadratureRule::Alpert16,
        }
    }
}

/// A point given either in Cartesian form (normalised on use) or by
/// azimuth and colatitude.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Center {
    Cartesian([f64; 3]),
    Spherical { phi: f64, theta: f64 },
}

impl Center {
    pub fn point(&self) -> Result<SpherePoint> {
        match *self {
            Self::Cartesian(v) => Ok(SpherePoint::new(Vec3::new(v[0], v[1], v[2]))?),
            Self::Spherical { phi, theta } => Ok(SpherePoint::from_spherical(phi, theta)),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideName {
    /// Every curve bounds an island; `Ω` is the rest of the sphere.
    #[default]
    Exterior,
    /// Curves are used as given, with `Ω` on the right of each.
    AsOriented,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(default)]
    pub side: SideName,
    /// Nodes per curve unless a curve overrides it.
    #[serde(default = "default_n")]
    pub n: usize,
    pub curves: Vec<CurveSpec>,
}

fn default_n() -> usize {
    128
}

#[derive(Debug, Clone, Deserialize)]
pub struct CurveSpec {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default)]
    pub n: Option<usize>,
    /// `-1` traverses the curve backwards.
    #[serde(default)]
    pub orientation: Option<i8>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Shape {
    Cap {
        center: Center,
        rho: f64,
    },
    Latitude {
        theta: f64,
    },
    Ellipse {
        center: Center,
        a: f64,
        b: f64,
        #[serde(default)]
        angle: f64,
    },
    StarCap {
        center: Center,
        rho: f64,
        eps: f64,
        m: u32,
        #[serde(default)]
        phase: f64,
    },
    Nodes {
        points: Vec<[f64; 3]>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryDataSpec {
    /// `Σ wᵢ G_k(·, cᵢ)`; one unit source per curve centroid by default.
    Manufactured {
        #[serde(default)]
        sources: Option<Vec<Center>>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    Constant {
        value: f64,
    },
    /// Expression in `phi` and `theta`.
    Expression {
        expr: String,
    },
}

impl Default for BoundaryDataSpec {
    fn default() -> Self {
        Self::Manufactured {
            sources: None,
            weights: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetSpec {
    pub count: usize,
    /// Fibonacci-lattice size the deterministic targets are drawn from.
    pub candidates: usize,
    pub min_distance: f64,
    /// Explicit targets; overrides `count`.
    pub points: Option<Vec<Center>>,
}

impl Default for TargetSpec {
    fn default() -> Self {
        Self {
            count: 40,
            candidates: 400,
            min_distance: yukawa_sphere::postproc::DEFAULT_MIN_DISTANCE,
            points: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub n: Option<Vec<usize>>,
    #[serde(default)]
    pub k: Option<Vec<f64>>,
    /// Aspect ratios `a/b` of the single ellipse of the geometry.
    #[serde(default)]
    pub ratios: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iter: usize,
    /// Also report the 2-norm condition number for `solve`.
    pub condition: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 1000,
            condition: false,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// Which command a config is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Convergence,
    KSweep,
    Curvature,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self, command: Command) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.schema != SCHEMA {
            return bad(format!("schema must be \"{SCHEMA}\", got \"{}\"", self.schema));
        }
        check_k(self.k)?;
        check_n(self.geometry.n)?;
        if self.geometry.curves.is_empty() {
            return bad("geometry needs at least one curve".into());
        }
        for (i, c) in self.geometry.curves.iter().enumerate() {
            if let Some(n) = c.n {
                check_n(n)?;
            }
            if let Some(o) = c.orientation {
                if o != 1 && o != -1 {
                    return bad(format!("curve {i}: orientation must be 1 or -1"));
                }
            }
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return bad("solver needs tol > 0 and max_iter >= 1".into());
        }
        if !(self.targets.min_distance >= 0.0) {
            return bad("targets.min_distance must be non-negative".into());
        }
        match command {
            Command::Solve => {}
            Command::Convergence => {
                let ns = nonempty(&self.sweep.n, "sweep.n")?;
                for &n in ns {
                    check_n(n)?;
                }
                if !matches!(self.boundary_data, BoundaryDataSpec::Manufactured { .. }) {
                    return bad("the convergence study needs manufactured boundary data".into());
                }
            }
            Command::KSweep => {
                for &k in nonempty(&self.sweep.k, "sweep.k")? {
                    check_k(k)?;
                }
            }
            Command::Curvature => {
                for &r in nonempty(&self.sweep.ratios, "sweep.ratios")? {
                    if !(r > 0.0 && r.is_finite()) {
                        return bad(format!("aspect ratios must be positive, got {r}"));
                    }
                }
                self.base_ellipse()?;
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> Result<YukawaDegree> {
        check_k(self.k)?;
        Ok(YukawaDegree::new(self.k)?)
    }

    /// Builds the boundary; `n` replaces every curve's node count.
    pub fn build_geometry(&self, n: Option<usize>) -> Result<BoundaryGeometry> {
        let curves = self
            .geometry
            .curves
            .iter()
            .map(|c| build_curve(c, n.or(c.n).unwrap_or(self.geometry.n)))
            .collect::<Result<Vec<_>>>()?;
        let side = match self.geometry.side {
            SideName::Exterior => DomainSide::Exterior,
            SideName::AsOriented => DomainSide::AsOriented,
        };
        Ok(BoundaryGeometry::new(curves, side)?)
    }

    /// Semi-axis `a` of the single ellipse the curvature sweep deforms,
    /// with the rest of its parameters.
    fn base_ellipse(&self) -> Result<(&CurveSpec, f64)> {
        match self.geometry.curves.as_slice() {
            [c @ CurveSpec {
                shape: Shape::Ellipse { a, .. },
                ..
            }] => Ok((c, *a)),
            _ => Err(CliError::Config(
                "the curvature sweep needs a geometry with exactly one ellipse".into(),
            )),
        }
    }

    /// The ellipse with `b = a / ratio`.
    pub fn ellipse_geometry(&self, ratio: f64) -> Result<(BoundaryGeometry, f64)> {
        let (c, a) = self.base_ellipse()?;
        let b = a / ratio;
        let mut spec = c.clone();
        if let Shape::Ellipse { b: ref mut bb, .. } = spec.shape {
            *bb = b;
        }
        let n = c.n.unwrap_or(self.geometry.n);
        let curve = build_curve(&spec, n)?;
        let side = match self.geometry.side {
            SideName::Exterior => DomainSide::Exterior,
            SideName::AsOriented => DomainSide::AsOriented,
        };
        Ok((BoundaryGeometry::new(vec![curve], side)?, b))
    }

    /// Boundary data at the nodes, with the exact solution when manufactured.
    pub fn boundary_values(
        &self,
        deg: YukawaDegree,
        geometry: &BoundaryGeometry,
    ) -> Result<(Vec<f64>, Option<ManufacturedSolution>)> {
        match &self.boundary_data {
            BoundaryDataSpec::Manufactured { sources, weights } => {
                let ms = match sources {
                    None => ManufacturedSolution::at_centroids(deg, geometry)?,
                    Some(s) => {
                        let pts = s.iter().map(Center::point).collect::<Result<Vec<_>>>()?;
                        let w = weights.clone().unwrap_or_else(|| vec![1.0; pts.len()]);
                        ManufacturedSolution::new(deg, pts, w, geometry)?
                    }
                };
                Ok((ms.boundary_data(geometry)?, Some(ms)))
            }
            BoundaryDataSpec::Constant { value } => Ok((vec![*value; geometry.size()], None)),
            BoundaryDataSpec::Expression { expr } => {
                let f = BoundaryExpression::parse(expr)?;
                let v = geometry
                    .nodes()
                    .map(|x| {
                        let (phi, theta) = SpherePoint::new(*x)?.spherical();
                        f.eval(phi, theta)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((v, None))
            }
        }
    }

    /// Evaluation targets: explicit points, a Fibonacci lattice, or with a
    /// seed, uniformly scattered admissible points.
    pub fn targets(&self, geometry: &BoundaryGeometry, seed: Option<u64>) -> Result<TargetSet> {
        let spec = &self.targets;
        if let Some(points) = &spec.points {
            let pts = points.iter().map(Center::point).collect::<Result<Vec<_>>>()?;
            return Ok(TargetSet::new(pts, geometry, spec.min_distance)?);
        }
        if spec.count == 0 {
            return Err(CliError::Config("targets.count must be positive".into()));
        }
        match seed {
            None => Ok(TargetSet::lattice(
                geometry,
                spec.candidates,
                spec.count,
                spec.min_distance,
            )?),
            Some(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut pts = Vec::with_capacity(spec.count);
                let mut tries = 0;
                while pts.len() < spec.count {
                    tries += 1;
                    if tries > 1000 * spec.count {
                        return Err(CliError::Config(
                            "could not place the requested number of random targets".into(),
                        ));
                    }
                    let z: f64 = rng.gen_range(-1.0..1.0);
                    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
                    let r = (1.0 - z * z).sqrt();
                    let p = Vec3::new(r * phi.cos(), r * phi.sin(), z);
                    if geometry.contains(&p) && geometry.distance_to_boundary(&p) >= spec.min_distance
                    {
                        pts.push(SpherePoint::new(p)?);
                    }
                }
                Ok(TargetSet::new(pts, geometry, spec.min_distance)?)
            }
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.5 && k.is_finite()) {
        return Err(CliError::Config(format!("k must satisfy k > 1/2, got {k}")));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n < 16 || n % 2 != 0 {
        return Err(CliError::Config(format!(
            "N must be even and at least 16, got {n}"
        )));
    }
    Ok(())
}

fn nonempty<'a, T>(v: &'a Option<Vec<T>>, name: &str) -> Result<&'a [T]> {
    match v {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::Config(format!("{name} must be a nonempty list"))),
    }
}

fn build_curve(spec: &CurveSpec, n: usize) -> Result<SphereCurve> {
    check_n(n)?;
    let mut c = match &spec.shape {
        Shape::Cap { center, rho } => families::cap_circle(&center.point()?, *rho, n)?,
        Shape::Latitude { theta } => families::latitude(*theta, n)?,
        Shape::Ellipse {
            center,
            a,
            b,
            angle,
        } => families::ellipse(&center.point()?, *a, *b, *angle, n)?,
        Shape::StarCap {
            center,
            rho,
            eps,
            m,
            phase,
        } => families::star_cap(&center.point()?, *rho, *eps, *m, *phase, n)?,
        Shape::Nodes { points } => {
            let nodes = points
                .iter()
                .map(|p| Vec3::new(p[0], p[1], p[2]))
                .collect();
            SphereCurve::from_nodes(nodes, 1)?
        }
    };
    if spec.orientation == Some(-1) {
        c = c.reversed();
    }
    Ok(c)
}

/// Boundary data from an arithmetic expression in `phi` and `theta`, with
/// `sin cos tan exp ln sqrt abs` and the constant `pi`.  Integer literals
/// divide as integers: write `0.5`, not `1/2`.
pub struct BoundaryExpression {
    tree: Node<DefaultNumericTypes>,
    context: HashMapContext<DefaultNumericTypes>,
}

impl BoundaryExpression {
    pub fn parse(expr: &str) -> Result<Self> {
        let tree = evalexpr::build_operator_tree::<DefaultNumericTypes>(expr)
            .map_err(|e| CliError::Config(format!("expression \"{expr}\": {e}")))?;
        let mut context = HashMapContext::<DefaultNumericTypes>::new();
        let unary: [(&str, fn(f64) -> f64); 7] = [
            ("sin", f64::sin),
            ("cos", f64::cos),
            ("tan", f64::tan),
            ("exp", f64::exp),
            ("ln", f64::ln),
            ("sqrt", f64::sqrt),
            ("abs", f64::abs),
        ];
        for (name, f) in unary {
            context
                .set_function(
                    name.into(),
                    Function::new(move |v: &Value<DefaultNumericTypes>| {
                        Ok(Value::Float(f(v.as_number()?)))
                    }),
                )
                .map_err(expr_err)?;
        }
        context
            .set_value("pi".into(), Value::Float(PI))
            .map_err(expr_err)?;
        let out = Self { tree, context };
        out.eval(0.1, 0.2)?;
        Ok(out)
    }

    pub fn eval(&self, phi: f64, theta: f64) -> Result<f64> {
        let mut ctx = self.context.clone();
        ctx.set_value("phi".into(), Value::Float(phi))
            .map_err(expr_err)?;
        ctx.set_value("theta".into(), Value::Float(theta))
            .map_err(expr_err)?;
        self.tree.eval_number_with_context(&ctx).map_err(expr_err)
    }
}

fn expr_err(e: EvalexprError<DefaultNumericTypes>) -> CliError {
    CliError::Config(format!("expression: {e}"))
}
