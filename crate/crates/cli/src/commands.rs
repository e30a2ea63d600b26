//! The four subcommands.  Each has a pure driver returning its table and
//! a `cmd_*` wrapper that writes the files.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use yukawa_sphere::bie::{self, condition_and_spectrum, NystromSystem};
use yukawa_sphere::geometry::BoundaryGeometry;
use yukawa_sphere::postproc::{eval_dlp, exact_solution_eval, ManufacturedSolution, TargetSet};
use yukawa_sphere::quadrature::QuadratureRule;
use yukawa_sphere::specfun::{SeriesPolicy, YukawaDegree};
use yukawa_sphere::Error;

use crate::config::{Command, ExperimentConfig, SolverSpec};
use crate::output::{fmt_f, write_csv, write_eigenvalues, write_json};
use crate::Result;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub eigenvalues: bool,
    pub seed: Option<u64>,
}

/// What a command produced; `converged` is false if any solve missed the
/// GMRES tolerance.
#[derive(Debug, Clone)]
pub struct Report {
    pub converged: bool,
    pub files: Vec<PathBuf>,
}

/// Assembled system after a GMRES attempt.
pub struct Solved {
    pub system: NystromSystem,
    pub converged: bool,
}

/// Assembles and solves; a missed tolerance is recorded, not returned as
/// an error.
pub fn assemble_and_solve(
    deg: YukawaDegree,
    geometry: &BoundaryGeometry,
    rule: QuadratureRule,
    rhs: Vec<f64>,
    solver: &SolverSpec,
) -> Result<Solved> {
    let a = bie::assemble(deg, geometry, rule, SeriesPolicy::default())?;
    let mut system = NystromSystem::new(a, rhs)?;
    let converged = match bie::gmres_solve(&mut system, solver.tol, solver.max_iter) {
        Ok(_) => true,
        Err(Error::Solver {
            iterations,
            relres,
            history,
        }) => {
            system.diagnostics.gmres_iterations = iterations;
            system.diagnostics.gmres_relres = relres;
            system.diagnostics.residual_history = history;
            false
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Solved { system, converged })
}

fn max_error(
    deg: YukawaDegree,
    geometry: &BoundaryGeometry,
    solved: &Solved,
    ms: &ManufacturedSolution,
    targets: &TargetSet,
) -> Result<f64> {
    let Some(mu) = solved.system.solution.as_ref() else {
        return Ok(f64::NAN);
    };
    let u = eval_dlp(deg, geometry, mu, targets)?;
    let mut worst: f64 = 0.0;
    for (p, v) in targets.points().iter().zip(&u) {
        worst = worst.max((v - exact_solution_eval(ms, p)?).abs());
    }
    Ok(worst)
}

fn sorted(mut e: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    e.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    e
}

// ---------------------------------------------------------------- solve

#[derive(Debug, Clone, Serialize)]
pub struct SolveDiagnostics {
    pub schema: &'static str,
    pub k: f64,
    pub quadrature: String,
    pub curves: usize,
    pub unknowns: usize,
    pub iterations: usize,
    pub relres: f64,
    pub converged: bool,
    pub tolerance: f64,
    pub condition_number: Option<f64>,
    pub targets: usize,
    pub max_error: Option<f64>,
    pub residual_history: Vec<f64>,
}

pub struct SolveResult {
    pub geometry: BoundaryGeometry,
    pub solved: Solved,
    pub targets: TargetSet,
    pub values: Vec<f64>,
    pub diagnostics: SolveDiagnostics,
}

pub fn run_solve(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SolveResult> {
    cfg.validate(Command::Solve)?;
    let deg = cfg.degree()?;
    let geometry = cfg.build_geometry(None)?;
    let (rhs, ms) = cfg.boundary_values(deg, &geometry)?;
    let mut solved = assemble_and_solve(deg, &geometry, cfg.quadrature.rule(), rhs, &cfg.solver)?;
    if cfg.solver.condition || opts.eigenvalues {
        condition_and_spectrum(&mut solved.system, opts.eigenvalues)?;
    }
    let targets = cfg.targets(&geometry, opts.seed)?;
    let values = match &solved.system.solution {
        Some(mu) => eval_dlp(deg, &geometry, mu, &targets)?,
        None => vec![f64::NAN; targets.len()],
    };
    let max_error = match &ms {
        Some(ms) => Some(max_error(deg, &geometry, &solved, ms, &targets)?),
        None => None,
    };
    let d = &solved.system.diagnostics;
    let diagnostics = SolveDiagnostics {
        schema: crate::config::SCHEMA,
        k: cfg.k,
        quadrature: format!("{:?}", cfg.quadrature).to_lowercase(),
        curves: geometry.curves().len(),
        unknowns: geometry.size(),
        iterations: d.gmres_iterations,
        relres: d.gmres_relres,
        converged: solved.converged,
        tolerance: cfg.solver.tol,
        condition_number: d.condition_2norm,
        targets: targets.len(),
        max_error,
        residual_history: d.residual_history.clone(),
    };
    Ok(SolveResult {
        geometry,
        solved,
        targets,
        values,
        diagnostics,
    })
}

/// Writes `density.csv` (curve, index, x, y, z, mu), `values.csv`
/// (x, y, z, u), `diagnostics.json` and, with `--eigenvalues`,
/// `eigenvalues.csv`.
pub fn cmd_solve(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report> {
    let r = run_solve(cfg, opts)?;
    std::fs::create_dir_all(&opts.out)?;
    let mut files = Vec::new();

    let mut rows = Vec::with_capacity(r.geometry.size());
    let mu = r.solved.system.solution.as_ref().map(|d| &d.values);
    let mut g = 0;
    for (ci, c) in r.geometry.curves().iter().enumerate() {
        for j in 0..c.len() {
            let x = c.nodes[j];
            let m = mu.map_or(f64::NAN, |m| m[g]);
            rows.push(vec![
                ci.to_string(),
                j.to_string(),
                fmt_f(x[0]),
                fmt_f(x[1]),
                fmt_f(x[2]),
                fmt_f(m),
            ]);
            g += 1;
        }
    }
    files.push(write_to(&opts.out, "density.csv", |p| {
        write_csv(p, &["curve", "index", "x", "y", "z", "mu"], &rows)
    })?);

    let rows: Vec<Vec<String>> = r
        .targets
        .points()
        .iter()
        .zip(&r.values)
        .map(|(p, u)| {
            let x = p.coords();
            vec![fmt_f(x[0]), fmt_f(x[1]), fmt_f(x[2]), fmt_f(*u)]
        })
        .collect();
    files.push(write_to(&opts.out, "values.csv", |p| {
        write_csv(p, &["x", "y", "z", "u"], &rows)
    })?);
    files.push(write_to(&opts.out, "diagnostics.json", |p| {
        write_json(p, &r.diagnostics)
    })?);
    if let Some(e) = &r.solved.system.diagnostics.eigenvalues {
        let e = sorted(e.clone());
        files.push(write_to(&opts.out, "eigenvalues.csv", |p| write_eigenvalues(p, &e))?);
    }
    Ok(Report {
        converged: r.solved.converged,
        files,
    })
}

fn write_to(dir: &Path, name: &str, f: impl FnOnce(&Path) -> Result<()>) -> Result<PathBuf> {
    let p = dir.join(name);
    f(&p)?;
    Ok(p)
}

// ---------------------------------------------------------- convergence

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// GMRES iterations of the hybrid-rule solve.
    pub iterations: usize,
    pub trapezoid_error: f64,
    pub hybrid_error: f64,
    pub converged: bool,
}

/// Both rules at every `N`, errors measured against the manufactured
/// solution on one target set (chosen for the finest grid).
pub fn run_convergence(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<ConvergenceRow>> {
    cfg.validate(Command::Convergence)?;
    let deg = cfg.degree()?;
    let ns = cfg.sweep.n.clone().unwrap_or_default();
    let finest = *ns.iter().max().unwrap();
    let fine = cfg.build_geometry(Some(finest))?;
    let targets = cfg.targets(&fine, opts.seed)?;
    ns.par_iter()
        .map(|&n| {
            let geometry = cfg.build_geometry(Some(n))?;
            let (rhs, ms) = cfg.boundary_values(deg, &geometry)?;
            let ms = ms.expect("validated as manufactured");
            let mut errs = [0.0; 2];
            let mut iterations = 0;
            let mut converged = true;
            for (i, rule) in [QuadratureRule::Trapezoid, QuadratureRule::Alpert16]
                .into_iter()
                .enumerate()
            {
                let s = assemble_and_solve(deg, &geometry, rule, rhs.clone(), &cfg.solver)?;
                errs[i] = max_error(deg, &geometry, &s, &ms, &targets)?;
                converged &= s.converged;
                if rule == QuadratureRule::Alpert16 {
                    iterations = s.system.diagnostics.gmres_iterations;
                }
            }
            Ok(ConvergenceRow {
                n,
                iterations,
                trapezoid_error: errs[0],
                hybrid_error: errs[1],
                converged,
            })
        })
        .collect()
}

/// `log2(e_prev / e)` scaled by the actual ratio of consecutive `N`.
pub fn observed_order(prev: (usize, f64), cur: (usize, f64)) -> f64 {
    (prev.1 / cur.1).ln() / (cur.0 as f64 / prev.0 as f64).ln()
}

pub fn convergence_table(rows: &[ConvergenceRow]) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let with_order = rows.len() > 1;
    let mut header = vec!["n", "iterations", "trapezoid_error", "hybrid_error"];
    if with_order {
        header.extend(["trapezoid_order", "hybrid_order"]);
    }
    let table = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut line = vec![
                r.n.to_string(),
                r.iterations.to_string(),
                fmt_f(r.trapezoid_error),
                fmt_f(r.hybrid_error),
            ];
            if with_order {
                if i == 0 {
                    line.extend([String::new(), String::new()]);
                } else {
                    let p = &rows[i - 1];
                    line.push(fmt_f(observed_order(
                        (p.n, p.trapezoid_error),
                        (r.n, r.trapezoid_error),
                    )));
                    line.push(fmt_f(observed_order(
                        (p.n, p.hybrid_error),
                        (r.n, r.hybrid_error),
                    )));
                }
            }
            line
        })
        .collect();
    (header, table)
}

pub fn cmd_convergence(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report> {
    let rows = run_convergence(cfg, opts)?;
    std::fs::create_dir_all(&opts.out)?;
    let (header, table) = convergence_table(&rows);
    let f = write_to(&opts.out, "convergence.csv", |p| write_csv(p, &header, &table))?;
    Ok(Report {
        converged: rows.iter().all(|r| r.converged),
        files: vec![f],
    })
}

// --------------------------------------------------------------- ksweep

#[derive(Debug, Clone, PartialEq)]
pub struct KSweepRow {
    pub k: f64,
    pub condition: f64,
    pub iterations: usize,
    pub converged: bool,
    pub eigenvalues: Option<Vec<(f64, f64)>>,
}

impl KSweepRow {
    /// Largest distance of an eigenvalue from 1/2.
    pub fn spread(&self) -> Option<f64> {
        self.eigenvalues.as_ref().map(|e| {
            e.iter()
                .map(|&(r, i)| (r - 0.5).hypot(i))
                .fold(0.0, f64::max)
        })
    }
}

pub fn run_ksweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<KSweepRow>> {
    cfg.validate(Command::KSweep)?;
    let geometry = cfg.build_geometry(None)?;
    let ks = cfg.sweep.k.clone().unwrap_or_default();
    ks.par_iter()
        .map(|&k| {
            let deg = YukawaDegree::new(k)?;
            let (rhs, _) = cfg.boundary_values(deg, &geometry)?;
            let mut s = assemble_and_solve(deg, &geometry, cfg.quadrature.rule(), rhs, &cfg.solver)?;
            let d = condition_and_spectrum(&mut s.system, opts.eigenvalues)?;
            Ok(KSweepRow {
                k,
                condition: d.condition_2norm.unwrap(),
                iterations: d.gmres_iterations,
                converged: s.converged,
                eigenvalues: d.eigenvalues.clone().map(sorted),
            })
        })
        .collect()
}

/// `ksweep.csv` (k, condition, iterations) and, with `--eigenvalues`,
/// `eigenvalues_k<k>.csv` per sweep value.
pub fn cmd_ksweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report> {
    let rows = run_ksweep(cfg, opts)?;
    std::fs::create_dir_all(&opts.out)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![fmt_f(r.k), fmt_f(r.condition), r.iterations.to_string()])
        .collect();
    let mut files = vec![write_to(&opts.out, "ksweep.csv", |p| {
        write_csv(p, &["k", "condition", "iterations"], &table)
    })?];
    for r in &rows {
        if let Some(e) = &r.eigenvalues {
            files.push(write_to(&opts.out, &format!("eigenvalues_k{}.csv", r.k), |p| {
                write_eigenvalues(p, e)
            })?);
        }
    }
    Ok(Report {
        converged: rows.iter().all(|r| r.converged),
        files,
    })
}

// ------------------------------------------------------------ curvature

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureRow {
    pub ratio: f64,
    pub b: f64,
    pub condition: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn run_curvature(cfg: &ExperimentConfig, _opts: &RunOptions) -> Result<Vec<CurvatureRow>> {
    cfg.validate(Command::Curvature)?;
    let deg = cfg.degree()?;
    let ratios = cfg.sweep.ratios.clone().unwrap_or_default();
    ratios
        .par_iter()
        .map(|&ratio| {
            let (geometry, b) = cfg.ellipse_geometry(ratio)?;
            let (rhs, _) = cfg.boundary_values(deg, &geometry)?;
            let mut s = assemble_and_solve(deg, &geometry, cfg.quadrature.rule(), rhs, &cfg.solver)?;
            let d = condition_and_spectrum(&mut s.system, false)?;
            Ok(CurvatureRow {
                ratio,
                b,
                condition: d.condition_2norm.unwrap(),
                iterations: d.gmres_iterations,
                converged: s.converged,
            })
        })
        .collect()
}

/// `curvature.csv` (ratio, b, condition, iterations).
pub fn cmd_curvature(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report> {
    let rows = run_curvature(cfg, opts)?;
    std::fs::create_dir_all(&opts.out)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f(r.ratio),
                fmt_f(r.b),
                fmt_f(r.condition),
                r.iterations.to_string(),
            ]
        })
        .collect();
    let f = write_to(&opts.out, "curvature.csv", |p| {
        write_csv(p, &["ratio", "b", "condition", "iterations"], &table)
    })?;
    Ok(Report {
        converged: rows.iter().all(|r| r.converged),
        files: vec![f],
    })
}
