//! Predictor-corrector path tracking for square polynomial homotopies.

use num_complex::Complex64;

use crate::polysys::FloatSystem;

/// `H(y, t)` with its partial derivatives.
pub(crate) trait Homotopy: Sync {
    /// Returns `(H, dH/dy, dH/dt)`.
    fn eval(&self, y: &[Complex64], t: f64) -> (Vec<Complex64>, Vec<Vec<Complex64>>, Vec<Complex64>);
}

/// `(1 - t) gamma G(y) + t Q(y)` with `G_i = y_i^{d_i} - 1`.
pub(crate) struct TotalDegree<'a> {
    pub target: &'a FloatSystem,
    pub degrees: Vec<u32>,
    pub gamma: Complex64,
}

impl TotalDegree<'_> {
    /// Number of start solutions.
    pub fn path_count(&self) -> usize {
        self.degrees.iter().map(|&d| d as usize).product()
    }

    /// Start root number `index`, in mixed radix over the degrees.
    pub fn start(&self, mut index: usize) -> Vec<Complex64> {
        self.degrees
            .iter()
            .map(|&d| {
                let m = index % d as usize;
                index /= d as usize;
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / f64::from(d))
            })
            .collect()
    }
}

impl Homotopy for TotalDegree<'_> {
    fn eval(&self, y: &[Complex64], t: f64) -> (Vec<Complex64>, Vec<Vec<Complex64>>, Vec<Complex64>) {
        let q = self.target.eval(y);
        let mut jac = self.target.jacobian(y);
        let s = 1.0 - t;
        let mut h = Vec::with_capacity(q.len());
        let mut ht = Vec::with_capacity(q.len());
        for (i, &d) in self.degrees.iter().enumerate() {
            let g = self.gamma * (y[i].powu(d) - 1.0);
            let dg = self.gamma * f64::from(d) * y[i].powu(d - 1);
            h.push(q[i] * t + g * s);
            ht.push(q[i] - g);
            for (j, v) in jac[i].iter_mut().enumerate() {
                *v *= t;
                if j == i {
                    *v += dg * s;
                }
            }
        }
        (h, jac, ht)
    }
}

/// `Q(y) - (1 - t) Q(y0)`, a Newton homotopy from a fixed guess.
pub(crate) struct NewtonHomotopy<'a> {
    pub target: &'a FloatSystem,
    pub offset: Vec<Complex64>,
}

impl Homotopy for NewtonHomotopy<'_> {
    fn eval(&self, y: &[Complex64], t: f64) -> (Vec<Complex64>, Vec<Vec<Complex64>>, Vec<Complex64>) {
        let q = self.target.eval(y);
        let h = q.iter().zip(&self.offset).map(|(a, b)| a - b * (1.0 - t)).collect();
        (h, self.target.jacobian(y), self.offset.clone())
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TrackSettings {
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
    pub divergence_norm: f64,
    pub corrector_tol: f64,
}

impl Default for TrackSettings {
    fn default() -> Self {
        Self {
            h_init: 0.01,
            h_max: 0.05,
            h_min: 1e-14,
            max_steps: 20_000,
            divergence_norm: 1e8,
            corrector_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PathStatus {
    Finished,
    Diverged,
    Failed,
}

#[derive(Debug, Clone)]
pub(crate) struct PathResult {
    pub status: PathStatus,
    pub endpoint: Vec<Complex64>,
    pub steps: usize,
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub(crate) fn solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[piv][col].norm() == 0.0 || !a[piv][col].norm().is_finite() {
            return None;
        }
        a.swap(piv, col);
        b.swap(piv, col);
        for r in col + 1..n {
            let m = a[r][col] / a[col][col];
            if m == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= m * v;
            }
            let v = b[col];
            b[r] -= m * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

pub(crate) fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn velocity<H: Homotopy>(h: &H, y: &[Complex64], t: f64) -> Option<Vec<Complex64>> {
    let (_, hy, ht) = h.eval(y, t);
    let rhs = ht.iter().map(|v| -v).collect();
    solve(hy, rhs)
}

fn axpy(y: &[Complex64], a: f64, v: &[Complex64]) -> Vec<Complex64> {
    y.iter().zip(v).map(|(y, v)| y + v * a).collect()
}

fn rk4<H: Homotopy>(h: &H, y: &[Complex64], t: f64, dt: f64) -> Option<Vec<Complex64>> {
    let k1 = velocity(h, y, t)?;
    let k2 = velocity(h, &axpy(y, dt / 2.0, &k1), t + dt / 2.0)?;
    let k3 = velocity(h, &axpy(y, dt / 2.0, &k2), t + dt / 2.0)?;
    let k4 = velocity(h, &axpy(y, dt, &k3), t + dt)?;
    Some(
        (0..y.len())
            .map(|i| y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0))
            .collect(),
    )
}

/// Newton at fixed `t`. Fails unless the first correction is small and the
/// iteration contracts within `max_iter` steps.
fn correct<H: Homotopy>(h: &H, mut y: Vec<Complex64>, t: f64, tol: f64, max_iter: usize) -> Option<Vec<Complex64>> {
    let mut last = f64::INFINITY;
    for it in 0..max_iter {
        let (val, jac, _) = h.eval(&y, t);
        let dy = solve(jac, val)?;
        let step = inf_norm(&dy);
        let scale = inf_norm(&y).max(1.0);
        if it == 0 && step > 1e-3 * scale {
            return None;
        }
        if it > 0 && step > 0.5 * last {
            return None;
        }
        for (yi, d) in y.iter_mut().zip(&dy) {
            *yi -= d;
        }
        if step <= tol * scale {
            return Some(y);
        }
        last = step;
    }
    None
}

/// Tracks one path from `t = 0` to `t = 1`.
pub(crate) fn track<H: Homotopy>(h: &H, start: Vec<Complex64>, s: &TrackSettings) -> PathResult {
    let mut y = start;
    let mut t = 0.0;
    let mut dt = s.h_init;
    let mut streak = 0;
    let mut steps = 0;
    while t < 1.0 {
        if steps >= s.max_steps {
            return PathResult {
                status: PathStatus::Failed,
                endpoint: y,
                steps,
            };
        }
        steps += 1;
        // Endgame: smaller steps as t approaches 1.
        let cap = if t > 0.9 { s.h_max * 0.2 } else { s.h_max };
        let step = dt.min(cap).min(1.0 - t);
        let t_next = if step >= 1.0 - t { 1.0 } else { t + step };
        let corrected = rk4(h, &y, t, t_next - t).and_then(|p| correct(h, p, t_next, s.corrector_tol, 4));
        match corrected {
            Some(next) => {
                y = next;
                t = t_next;
                streak += 1;
                if streak >= 3 {
                    dt = (dt * 2.0).min(s.h_max);
                    streak = 0;
                }
                if inf_norm(&y) > s.divergence_norm {
                    return PathResult {
                        status: PathStatus::Diverged,
                        endpoint: y,
                        steps,
                    };
                }
            }
            None => {
                streak = 0;
                dt /= 2.0;
                if dt < s.h_min {
                    let status = if inf_norm(&y) > s.divergence_norm.sqrt() {
                        PathStatus::Diverged
                    } else {
                        PathStatus::Failed
                    };
                    return PathResult {
                        status,
                        endpoint: y,
                        steps,
                    };
                }
            }
        }
    }
    PathResult {
        status: PathStatus::Finished,
        endpoint: y,
        steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysys::{system_k, DesignSpec};

    #[test]
    fn solve_small_system() {
        let a = vec![
            vec![Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)],
            vec![Complex64::new(1.0, 1.0), Complex64::new(1.0, 0.0)],
        ];
        let b = vec![Complex64::new(2.0, 0.0), Complex64::new(2.0, 1.0)];
        let x = solve(a, b).unwrap();
        assert!((x[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let singular = vec![vec![Complex64::new(1.0, 0.0); 2]; 2];
        assert!(solve(singular, vec![Complex64::new(1.0, 0.0); 2]).is_none());
    }

    #[test]
    fn start_roots_cover_all_combinations() {
        let spec = DesignSpec::standard(3).unwrap();
        let fs = FloatSystem::new(&system_k(&spec).unwrap());
        let td = TotalDegree {
            target: &fs,
            degrees: vec![1, 2, 3],
            gamma: Complex64::new(0.6, 0.8),
        };
        assert_eq!(td.path_count(), 6);
        for p in 0..6 {
            let y = td.start(p);
            let (h, _, _) = td.eval(&y, 0.0);
            assert!(inf_norm(&h) < 1e-14);
        }
        assert_ne!(td.start(1), td.start(2));
    }

    #[test]
    fn tracks_two_stage_paths() {
        let spec = DesignSpec::standard(2).unwrap();
        let fs = FloatSystem::new(&system_k(&spec).unwrap()).rescaled(4.0);
        let td = TotalDegree {
            target: &fs,
            degrees: vec![1, 2],
            gamma: Complex64::from_polar(1.0, 0.7),
        };
        for p in 0..2 {
            let r = track(&td, td.start(p), &TrackSettings::default());
            assert_eq!(r.status, PathStatus::Finished);
            assert!(inf_norm(&fs.eval(&r.endpoint)) < 1e-9);
        }
    }
}
