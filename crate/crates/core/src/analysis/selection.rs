use crate::error::{Error, Result};
use crate::polysys::RationalPolynomial;
use crate::solver::{DesignSolution, SolutionSet};
use crate::tolerances::Tolerances;

/// Score to minimize over the convex solutions.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `q0(k) = sum_{i,j} (k_i - k_j)^2`.
    Flatness,
    /// Any polynomial in `k`, evaluated at each candidate.
    Polynomial(RationalPolynomial),
}

impl Objective {
    pub fn eval(&self, k: &[f64]) -> Result<f64> {
        match self {
            Objective::Flatness => Ok(flatness(k)),
            Objective::Polynomial(p) => p.eval_f64(k),
        }
    }
}

/// `sum_{i,j} (k_i - k_j)^2` by the double sum.
pub fn flatness(k: &[f64]) -> f64 {
    k.iter()
        .flat_map(|a| k.iter().map(move |b| (a - b) * (a - b)))
        .sum()
}

/// The same quantity as the quadratic form `2n |k|^2 - 2 (sum k)^2`.
pub fn flatness_quadratic_form(k: &[f64]) -> f64 {
    let n = k.len() as f64;
    let sq: f64 = k.iter().map(|v| v * v).sum();
    let s: f64 = k.iter().sum();
    2.0 * n * sq - 2.0 * s * s
}

/// Second differences `g_j = k_j - 2 k_{j+1} + k_{j+2}`.
pub fn convexity_constraints(k: &[f64]) -> Vec<f64> {
    k.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect()
}

/// Smallest `g_j`, or `+inf` when there are fewer than three stages.
pub fn convexity_margin(k: &[f64]) -> f64 {
    convexity_constraints(k).into_iter().fold(f64::INFINITY, f64::min)
}

/// Positions of the convex solutions minimizing `objective`, ties included.
pub fn select_regular_indices(solutions: &[DesignSolution], objective: &Objective, tol: &Tolerances) -> Vec<usize> {
    let scored: Vec<(usize, f64)> = solutions
        .iter()
        .enumerate()
        .filter(|(_, s)| convexity_margin(&s.k) >= -tol.convexity)
        .filter_map(|(i, s)| objective.eval(&s.k).ok().map(|v| (i, v)))
        .filter(|(_, v)| v.is_finite())
        .collect();
    let Some(best) = scored.iter().map(|s| s.1).reduce(f64::min) else {
        return Vec::new();
    };
    scored
        .into_iter()
        .filter(|(_, v)| *v <= best + tol.objective_tie)
        .map(|(i, _)| i)
        .collect()
}

/// The regular solution(s): convex `k` profile, minimal flatness objective.
pub fn select_regular(set: &SolutionSet) -> Result<Vec<DesignSolution>> {
    select_regular_by(set, &Objective::Flatness, &Tolerances::default())
}

pub fn select_regular_by(set: &SolutionSet, objective: &Objective, tol: &Tolerances) -> Result<Vec<DesignSolution>> {
    let idx = select_regular_indices(&set.solutions, objective, tol);
    if idx.is_empty() {
        return Err(Error::EmptySelection);
    }
    Ok(idx.into_iter().map(|i| set.solutions[i].clone()).collect())
}
