//! Real solutions of the design system: enumeration by total-degree homotopy,
//! Newton refinement and validation.

mod export;
mod homotopy;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{condition_of_f, convexity_margin, select_regular_indices, Objective};
use crate::error::{Error, Result};
use crate::numkernel::{eig_with, DenseMatrix};
use crate::polysys::{system_k, DesignSpec, FloatSystem, Formulation, PolySystem};
use crate::tolerances::Tolerances;
use homotopy::{inf_norm, solve, track, NewtonHomotopy, PathStatus, TotalDegree, TrackSettings};

pub use export::{solutions_csv, write_solutions_csv};

/// One real design: `k_i = c_i / c`, `f_i = 1 / k_i`, `scaled = n^2 k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSolution {
    pub k: Vec<f64>,
    pub f: Vec<f64>,
    pub scaled: Vec<f64>,
    /// `max |q_i(k)|` on the raw k-system.
    pub residual_inf: f64,
    /// Same, in scaled unknowns with each equation normalized to unit
    /// largest coefficient.
    pub residual_normalized: f64,
    pub eig_error: f64,
    pub condition: f64,
    pub valid: bool,
    pub regular: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStats {
    pub total: usize,
    pub tracked: usize,
    pub converged: usize,
    pub diverged: usize,
    pub failed: usize,
    /// Distinct non-real finite endpoints.
    pub complex: usize,
    /// Distinct real finite endpoints.
    pub real: usize,
    /// Paths tracked again after landing on an endpoint already reached.
    pub retracked: usize,
    /// Accepted and rejected predictor steps over all final path runs.
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub spec: DesignSpec,
    pub seed: u64,
    pub solutions: Vec<DesignSolution>,
    pub path_stats: PathStats,
    /// False when the path budget stopped enumeration early.
    pub complete: bool,
}

impl SolutionSet {
    pub fn regular(&self) -> impl Iterator<Item = &DesignSolution> {
        self.solutions.iter().filter(|s| s.regular)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Track at most this many start paths.
    pub max_paths: Option<usize>,
    pub max_steps_per_path: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_paths: None,
            max_steps_per_path: 20_000,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EnumerateOptions {
    pub seed: u64,
    pub budget: Budget,
    pub tolerances: Tolerances,
}

/// The matrix `BF`.
pub fn bf_matrix(f: &[f64]) -> Result<DenseMatrix> {
    let n = f.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty f vector".into()));
    }
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 2.0 * f[i];
        if i + 1 < n {
            m[(i, i + 1)] = -f[i];
            m[(i + 1, i)] = -f[i + 1];
        }
    }
    m[(n - 1, n - 1)] = (n as f64 + 1.0) / n as f64 * f[n - 1];
    Ok(m)
}

/// `sqrt(F) B sqrt(F)`, symmetric and similar to `BF`.
pub fn symmetric_bf_matrix(f: &[f64]) -> Result<DenseMatrix> {
    let mut m = bf_matrix(&vec![1.0; f.len()])?;
    for i in 0..f.len() {
        for j in 0..f.len() {
            m[(i, j)] *= (f[i] * f[j]).sqrt();
        }
    }
    Ok(m)
}

fn gamma_from_seed(seed: u64) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(1.0, theta)
}

fn scale_of(n: usize) -> f64 {
    (n * n) as f64
}

fn complexify(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Damped Newton on a real root of `fs`, to a residual of `tol`.
fn damped_newton(fs: &FloatSystem, y0: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, f64)> {
    let mut y = complexify(y0);
    let mut r = inf_norm(&fs.eval(&y));
    if !r.is_finite() {
        return Err(Error::NonFinite);
    }
    for it in 0..max_iter {
        if r <= tol {
            return Ok((y.iter().map(|z| z.re).collect(), r));
        }
        let dy = solve(fs.jacobian(&y), fs.eval(&y)).ok_or(Error::SingularJacobian)?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<Complex64> = y.iter().zip(&dy).map(|(a, d)| a - d * lambda).collect();
            let rt = inf_norm(&fs.eval(&trial));
            if rt < (1.0 - lambda / 4.0) * r || (rt <= r && lambda < 1e-3) {
                y = trial;
                r = rt;
                break;
            }
            lambda /= 2.0;
            if lambda < 1e-6 {
                // no decrease left: accept if already at rounding level
                if r <= tol {
                    return Ok((y.iter().map(|z| z.re).collect(), r));
                }
                return Err(Error::Divergence {
                    iterations: it + 1,
                    residual: r,
                });
            }
        }
    }
    if r <= tol {
        Ok((y.iter().map(|z| z.re).collect(), r))
    } else {
        Err(Error::Divergence {
            iterations: max_iter,
            residual: r,
        })
    }
}

/// Plain Newton at `t = 1` on a complex endpoint.
fn polish_complex(fs: &FloatSystem, mut y: Vec<Complex64>) -> Vec<Complex64> {
    for _ in 0..6 {
        let Some(dy) = solve(fs.jacobian(&y), fs.eval(&y)) else {
            break;
        };
        for (a, d) in y.iter_mut().zip(&dy) {
            *a -= d;
        }
        if inf_norm(&dy) <= 1e-15 * inf_norm(&y).max(1.0) {
            break;
        }
    }
    y
}

/// Builds a full solution record from a real `k` that is already a root.
pub fn design_solution(spec: &DesignSpec, k: Vec<f64>, tol: &Tolerances) -> Result<DesignSolution> {
    let n = spec.n();
    if k.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: k.len(),
        });
    }
    let system = system_k(spec)?;
    let raw = system.evaluate_f64(&k)?;
    let s = scale_of(n);
    let scaled: Vec<f64> = k.iter().map(|v| v * s).collect();
    let normalized = FloatSystem::new(&system).rescaled(s).eval_real(&scaled);
    let f: Vec<f64> = k.iter().map(|v| 1.0 / v).collect();
    let condition = condition_of_f(&f, tol).map(|r| r.max_condition).unwrap_or(f64::NAN);
    let mut sol = DesignSolution {
        residual_inf: raw.iter().fold(0.0, |m, v| m.max(v.abs())),
        residual_normalized: normalized.iter().fold(0.0, |m, v| m.max(v.abs())),
        k,
        f,
        scaled,
        eig_error: f64::NAN,
        condition,
        valid: false,
        regular: false,
    };
    let report = validate_with(&sol, spec, tol)?;
    sol.eig_error = report.eig_error;
    sol.valid = report.passed();
    sol.regular = convexity_margin(&sol.k) >= -tol.convexity;
    Ok(sol)
}

/// Refines a guess (in the system's own unknowns) to a real root.
///
/// Damped Newton first; if that stalls, a Newton homotopy from the guess.
/// `regular` is set from the convexity constraints alone, since there is no
/// solution set to compare against.
pub fn refine(system: &PolySystem, guess: &[f64]) -> Result<DesignSolution> {
    refine_with(system, guess, &Tolerances::default())
}

pub fn refine_with(system: &PolySystem, guess: &[f64], tol: &Tolerances) -> Result<DesignSolution> {
    let spec = system.spec();
    let n = spec.n();
    if guess.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: guess.len(),
        });
    }
    let k0: Vec<f64> = match system.formulation() {
        Formulation::KForm => guess.to_vec(),
        Formulation::FForm => guess.iter().map(|f| 1.0 / f).collect(),
    };
    if k0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let s = scale_of(n);
    let fs = FloatSystem::new(&system_k(spec)?).rescaled(s);
    let y0: Vec<f64> = k0.iter().map(|v| v * s).collect();
    let y = match damped_newton(&fs, &y0, tol.polish_residual, tol.newton_max_iter) {
        Ok((y, _)) => y,
        Err(first) => {
            let h = NewtonHomotopy {
                target: &fs,
                offset: fs.eval(&complexify(&y0)),
            };
            let settings = TrackSettings {
                divergence_norm: tol.divergence_norm,
                ..TrackSettings::default()
            };
            let path = track(&h, complexify(&y0), &settings);
            if path.status != PathStatus::Finished {
                return Err(first);
            }
            let start: Vec<f64> = path.endpoint.iter().map(|z| z.re).collect();
            damped_newton(&fs, &start, tol.polish_residual, tol.newton_max_iter)?.0
        }
    };
    design_solution(spec, y.iter().map(|v| v / s).collect(), tol)
}

/// Outcome of the spectral, positivity and box checks on one solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub eig_error: f64,
    pub spectrum: Vec<f64>,
    pub symmetric_deviation: f64,
    pub residual_ok: bool,
    pub f_positive: bool,
    pub k_in_box: bool,
    pub k_sum_below_one: bool,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn validate(solution: &DesignSolution, spec: &DesignSpec) -> Result<ValidationReport> {
    validate_with(solution, spec, &Tolerances::default())
}

pub fn validate_with(solution: &DesignSolution, spec: &DesignSpec, tol: &Tolerances) -> Result<ValidationReport> {
    let n = spec.n();
    if solution.k.len() != n || solution.f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: solution.k.len(),
        });
    }
    let mut failures = Vec::new();
    let residual_ok = solution.residual_inf <= 1e-8;
    if !residual_ok {
        failures.push(format!("residual {:e} exceeds 1e-8", solution.residual_inf));
    }
    let f_positive = solution.f.iter().all(|&v| v > 0.0);
    if !f_positive {
        failures.push("f has a non-positive entry".into());
    }
    let k_in_box = solution.k.iter().all(|&v| v > 0.0 && v < 1.0);
    if !k_in_box {
        failures.push("k leaves (0, 1)".into());
    }
    let k_sum_below_one = solution.k.iter().sum::<f64>() < 1.0;
    if !k_sum_below_one {
        failures.push("sum of k is not below 1".into());
    }

    let mut targets = spec.targets_f64();
    targets.sort_by(f64::total_cmp);
    let (spectrum, eig_error) = if solution.f.iter().all(|v| v.is_finite()) {
        let sp = eig_with(&bf_matrix(&solution.f)?, tol, false)?;
        let mut ev = sp.eigenvalues.clone();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        let err = ev
            .iter()
            .zip(&targets)
            .map(|(z, t)| (z - t).norm())
            .fold(0.0, f64::max);
        (ev.iter().map(|z| z.re).collect::<Vec<_>>(), err)
    } else {
        (vec![f64::NAN; n], f64::INFINITY)
    };
    if !(eig_error <= tol.eig_error) {
        failures.push(format!("spectral error {eig_error:e} exceeds {:e}", tol.eig_error));
    }

    let symmetric_deviation = if f_positive {
        let sym = eig_with(&symmetric_bf_matrix(&solution.f)?, tol, false)?.sorted_real();
        sym.iter().zip(&spectrum).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    if !(symmetric_deviation <= tol.symmetric_agreement) {
        failures.push(format!(
            "symmetrized spectrum differs by {symmetric_deviation:e}"
        ));
    }

    Ok(ValidationReport {
        eig_error,
        spectrum,
        symmetric_deviation,
        residual_ok,
        f_positive,
        k_in_box,
        k_sum_below_one,
        failures,
    })
}

struct Endpoint {
    status: PathStatus,
    y: Vec<Complex64>,
    steps: usize,
}

fn run_paths(td: &TotalDegree, fs: &FloatSystem, paths: &[usize], settings: &TrackSettings) -> Vec<Endpoint> {
    paths
        .par_iter()
        .map(|&p| {
            let r = track(td, td.start(p), settings);
            let y = if r.status == PathStatus::Finished {
                polish_complex(fs, r.endpoint)
            } else {
                r.endpoint
            };
            Endpoint {
                status: r.status,
                y,
                steps: r.steps,
            }
        })
        .collect()
}

/// Indices of finished endpoints that coincide with an earlier one.
fn collisions(ends: &[Endpoint], tol: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..ends.len() {
        if ends[i].status != PathStatus::Finished {
            continue;
        }
        for j in 0..i {
            if ends[j].status == PathStatus::Finished && max_diff(&ends[i].y, &ends[j].y) <= tol {
                if !out.contains(&j) {
                    out.push(j);
                }
                out.push(i);
                break;
            }
        }
    }
    out.sort_unstable();
    out
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// All real solutions of the k-system for `spec`, by tracking every path of a
/// total-degree homotopy.
pub fn enumerate(spec: &DesignSpec, options: &EnumerateOptions) -> Result<SolutionSet> {
    let tol = &options.tolerances;
    let n = spec.n();
    let s = scale_of(n);
    let system = system_k(spec)?;
    let fs = FloatSystem::new(&system).rescaled(s);
    let td = TotalDegree {
        target: &fs,
        degrees: fs.degrees(),
        gamma: gamma_from_seed(options.seed),
    };
    let total = td.path_count();
    let tracked = options.budget.max_paths.map_or(total, |m| m.min(total));
    let mut settings = TrackSettings {
        max_steps: options.budget.max_steps_per_path,
        divergence_norm: tol.divergence_norm * s,
        ..TrackSettings::default()
    };
    let paths: Vec<usize> = (0..tracked).collect();
    let mut ends = run_paths(&td, &fs, &paths, &settings);

    // Simple roots cannot share a path endpoint: coinciding or failed paths
    // are tracked again with shorter steps.
    let dedup_y = tol.dedup * s;
    let mut retracked = 0;
    for _ in 0..3 {
        let mut redo = collisions(&ends, dedup_y);
        redo.extend(
            ends.iter()
                .enumerate()
                .filter(|(_, e)| e.status == PathStatus::Failed)
                .map(|(i, _)| i),
        );
        redo.sort_unstable();
        redo.dedup();
        if redo.is_empty() {
            break;
        }
        retracked += redo.len();
        settings.h_max /= 4.0;
        settings.h_init /= 4.0;
        settings.max_steps *= 4;
        let again = run_paths(&td, &fs, &redo.iter().map(|&i| paths[i]).collect::<Vec<_>>(), &settings);
        for (i, e) in redo.into_iter().zip(again) {
            ends[i] = e;
        }
    }

    let mut stats = PathStats {
        total,
        tracked,
        retracked,
        ..PathStats::default()
    };
    let mut distinct: Vec<&Endpoint> = Vec::new();
    for e in &ends {
        stats.steps += e.steps;
        match e.status {
            PathStatus::Finished => {
                stats.converged += 1;
                if !distinct.iter().any(|d| max_diff(&d.y, &e.y) <= dedup_y) {
                    distinct.push(e);
                }
            }
            PathStatus::Diverged => stats.diverged += 1,
            PathStatus::Failed => stats.failed += 1,
        }
    }
    let real_y = tol.real_imag * s;
    let mut solutions = Vec::new();
    for e in distinct {
        if e.y.iter().all(|z| z.im.abs() <= real_y) {
            let y0: Vec<f64> = e.y.iter().map(|z| z.re).collect();
            let y = damped_newton(&fs, &y0, tol.polish_residual, tol.newton_max_iter)
                .map(|(y, _)| y)
                .unwrap_or(y0);
            solutions.push(design_solution(spec, y.iter().map(|v| v / s).collect(), tol)?);
        } else {
            stats.complex += 1;
        }
    }
    solutions.sort_by(|a, b| {
        a.scaled
            .iter()
            .zip(&b.scaled)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    solutions.dedup_by(|a, b| {
        a.k.iter().zip(&b.k).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) <= tol.dedup
    });
    stats.real = solutions.len();

    let regular = select_regular_indices(&solutions, &Objective::Flatness, tol);
    for (i, sol) in solutions.iter_mut().enumerate() {
        sol.regular = regular.contains(&i);
    }

    Ok(SolutionSet {
        spec: spec.clone(),
        seed: options.seed,
        solutions,
        path_stats: stats,
        complete: tracked == total,
    })
}

/// Number of real solutions, with default options.
pub fn solution_count(spec: &DesignSpec) -> Result<usize> {
    Ok(enumerate(spec, &EnumerateOptions::default())?.solutions.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bf_matrix_two_stages() {
        let m = bf_matrix(&[6.3371, 3.5505]).unwrap();
        assert!((m.trace() - 18.0).abs() < 1e-3);
        assert!((m.determinant() - 45.0).abs() < 1e-2);
        let sp = eig_with(&m, &Tolerances::default(), false).unwrap().sorted_real();
        assert!((sp[0] - 3.0).abs() < 1e-3 && (sp[1] - 15.0).abs() < 1e-3);
    }

    #[test]
    fn refine_exact_scalar_root() {
        let spec = DesignSpec::standard(1).unwrap();
        let sys = system_k(&spec).unwrap();
        let sol = refine(&sys, &[2.0 / 3.0]).unwrap();
        assert_eq!(sol.k, vec![2.0 / 3.0]);
        assert_eq!(sol.residual_inf, 0.0);
        assert_eq!(sol.condition, 1.0);
        assert!(sol.valid);
    }

    #[test]
    fn refine_accepts_f_form_guess() {
        let spec = DesignSpec::standard(2).unwrap();
        let sys = crate::polysys::system_f(&spec).unwrap();
        let sol = refine(&sys, &[4.0 / 0.63120, 4.0 / 1.12660]).unwrap();
        assert!((sol.scaled[0] - 0.63120).abs() < 1e-4);
        assert!(sol.residual_normalized <= 1e-12);
    }

    #[test]
    fn validate_flags_perturbation() {
        let spec = DesignSpec::standard(2).unwrap();
        let sys = system_k(&spec).unwrap();
        let sol = refine(&sys, &[0.1578, 0.28165]).unwrap();
        assert!(validate(&sol, &spec).unwrap().passed());
        let mut bad = sol.clone();
        bad.k[0] += 0.01;
        bad.f[0] = 1.0 / bad.k[0];
        let r = validate(&bad, &spec).unwrap();
        assert!(r.eig_error > 1e-6);
        assert!(!r.passed());
    }

    #[test]
    fn enumerate_two_stages() {
        let spec = DesignSpec::standard(2).unwrap();
        let set = enumerate(&spec, &EnumerateOptions::default()).unwrap();
        assert_eq!(set.solutions.len(), 2);
        assert!(set.complete);
        assert_eq!(set.path_stats.converged, 2);
        assert!(set.solutions.iter().all(|s| s.valid));
        assert_eq!(set.regular().count(), 1);
        assert!((set.regular().next().unwrap().scaled[0] - 0.63120).abs() < 1e-4);
    }

    #[test]
    fn budget_marks_incomplete() {
        let spec = DesignSpec::standard(3).unwrap();
        let opts = EnumerateOptions {
            budget: Budget {
                max_paths: Some(2),
                ..Budget::default()
            },
            ..EnumerateOptions::default()
        };
        let set = enumerate(&spec, &opts).unwrap();
        assert!(!set.complete);
        assert_eq!(set.path_stats.tracked, 2);
        assert_eq!(set.path_stats.total, 6);
    }
}
