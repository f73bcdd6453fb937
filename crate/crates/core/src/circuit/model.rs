use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{eig_with, singular_values, DenseMatrix};
use crate::polysys::DesignSpec;
use crate::solver::bf_matrix;
use crate::tolerances::Tolerances;

/// Linear model `x' = A0 x` of the ladder. State order:
/// `[v_c1..v_cn, v_1..v_n, v_{n+1}, i_1..i_n, i_L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateModel {
    pub a0: DenseMatrix,
    /// Diagonal of the scaling `T0` that makes `T0 A0 T0^-1` skew-symmetric.
    pub t0: Vec<f64>,
    pub omega0: f64,
    pub transfer_time: f64,
    pub spec: DesignSpec,
    pub f: Vec<f64>,
}

/// Index helpers for the state vector.
pub fn idx_vc(k: usize) -> usize {
    k
}

pub fn idx_v(n: usize, k: usize) -> usize {
    n + k
}

pub fn idx_i(n: usize, k: usize) -> usize {
    2 * n + 1 + k
}

pub fn idx_load_voltage(n: usize) -> usize {
    2 * n
}

pub fn idx_load_current(n: usize) -> usize {
    3 * n + 1
}

pub fn state_labels(n: usize) -> Vec<String> {
    let mut out: Vec<String> = (1..=n).map(|k| format!("vc{k}")).collect();
    out.extend((1..=n + 1).map(|k| format!("v{k}")));
    out.extend((1..=n).map(|k| format!("i{k}")));
    out.push("iL".into());
    out
}

/// Right-hand side written out equation by equation.
fn scalar_rhs(n: usize, c: f64, ell: f64, f: &[f64], x: &[f64]) -> Vec<f64> {
    let vc = |k: usize| if k == 0 { 0.0 } else { x[idx_vc(k - 1)] };
    let v = |k: usize| x[idx_v(n, k - 1)];
    let i = |k: usize| x[idx_i(n, k - 1)];
    let vl = x[idx_load_voltage(n)];
    let il = x[idx_load_current(n)];
    let mut dx = vec![0.0; 3 * n + 2];
    for k in 1..=n {
        let ck = c / f[k - 1];
        dx[idx_vc(k - 1)] = if k < n { (i(k + 1) - i(k)) / ck } else { (-il - i(n)) / ck };
        dx[idx_v(n, k - 1)] = i(k) / c;
        dx[idx_i(n, k - 1)] = (vc(k) - vc(k - 1) - v(k)) / ell;
    }
    dx[idx_load_voltage(n)] = il / c;
    dx[idx_load_current(n)] = (vc(n) - n as f64 * vl) / (n as f64 * ell);
    dx
}

/// Assembles `A0` from its blocks and checks it against the circuit
/// equations column by column.
pub fn build_a0(spec: &DesignSpec, f: &[f64]) -> Result<StateModel> {
    let n = spec.n();
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.len(),
        });
    }
    if let Some((index, &value)) = f.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositive { index, value });
    }
    let (c, ell) = (spec.c(), spec.ell());
    let m = n + 1;
    let dim = 3 * n + 2;

    let sigma = DenseMatrix::from_fn(n, m, |r, col| {
        if col == r {
            1.0
        } else if col == r + 1 {
            -1.0
        } else {
            0.0
        }
    });
    let j_minus = DenseMatrix::from_diagonal(&nalgebra::DVector::from_fn(m, |i, _| if i == n { -1.0 } else { 1.0 }));
    let j_inv = DenseMatrix::from_diagonal(&nalgebra::DVector::from_fn(m, |i, _| if i == n { 1.0 / n as f64 } else { 1.0 }));
    let fmat = DenseMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(f));

    let top = -(&fmat * &sigma * &j_minus) / c;
    let bottom = (&j_inv * &j_minus * sigma.transpose()) / ell;

    let mut a0 = DenseMatrix::zeros(dim, dim);
    let right = 2 * n + 1;
    a0.view_mut((0, right), (n, m)).copy_from(&top);
    a0.view_mut((n, right), (m, m)).copy_from(&(DenseMatrix::identity(m, m) / c));
    a0.view_mut((right, 0), (m, n)).copy_from(&bottom);
    a0.view_mut((right, n), (m, m)).copy_from(&(-DenseMatrix::identity(m, m) / ell));

    for col in 0..dim {
        let mut e = vec![0.0; dim];
        e[col] = 1.0;
        let dx = scalar_rhs(n, c, ell, f, &e);
        for (row, want) in dx.iter().enumerate() {
            let got = a0[(row, col)];
            if (got - want).abs() > 1e-12 * (1.0 + want.abs()) {
                return Err(Error::ModelAssembly { row });
            }
        }
    }

    let mut t0 = Vec::with_capacity(dim);
    t0.extend(f.iter().map(|fi| -(c / ell / fi).sqrt()));
    t0.extend((0..m).map(|i| (c / ell * if i == n { n as f64 } else { 1.0 }).sqrt()));
    t0.extend((0..m).map(|i| if i == n { (n as f64).sqrt() } else { 1.0 }));

    Ok(StateModel {
        a0,
        t0,
        omega0: spec.omega0(),
        transfer_time: spec.transfer_time(),
        spec: spec.clone(),
        f: f.to_vec(),
    })
}

impl StateModel {
    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn dim(&self) -> usize {
        self.a0.nrows()
    }

    /// Stored energy `(ell / 2) |T0 x|^2`.
    pub fn energy(&self, x: &[f64]) -> f64 {
        0.5 * self.spec.ell() * self.t0.iter().zip(x).map(|(t, v)| (t * v) * (t * v)).sum::<f64>()
    }

    /// `T0 A0 T0^-1`.
    pub fn scaled_a0(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.dim(), self.dim(), |i, j| self.t0[i] * self.a0[(i, j)] / self.t0[j])
    }

    /// Largest entry of `A1 + A1^T` for `A1 = T0 A0 T0^-1`.
    pub fn skew_residual(&self) -> f64 {
        let a1 = self.scaled_a0();
        (&a1 + a1.transpose()).amax()
    }

    /// Storage capacitors charged to `v0`, everything else at rest.
    pub fn initial_state(&self, v0: f64) -> Vec<f64> {
        let n = self.n();
        let mut x = vec![0.0; self.dim()];
        for k in 0..n {
            x[idx_v(n, k)] = v0;
        }
        x
    }

    /// All energy on the load: only `v_{n+1} = v0`.
    pub fn target_state(&self, v0: f64) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        x[idx_load_voltage(self.n())] = v0;
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalReport {
    /// `a_k = sqrt(eig(I + BF))`, ascending.
    pub a: Vec<f64>,
    /// Distance of `sigma(A0)` from `{0 (x n)} U {+-j w0 a_k, k = 0..n}`.
    pub structure_deviation: f64,
    /// Distance of `sigma(A0)` from the same set with `a_k = alpha_k`.
    pub design_deviation: f64,
    pub rank: usize,
    pub passed: bool,
}

fn sort_by_imag(v: &mut [num_complex::Complex64]) {
    v.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
}

fn expected_spectrum(n: usize, omega0: f64, a: &[f64]) -> Vec<num_complex::Complex64> {
    let mut out = vec![num_complex::Complex64::new(0.0, 0.0); n];
    for &ak in std::iter::once(&1.0).chain(a) {
        out.push(num_complex::Complex64::new(0.0, omega0 * ak));
        out.push(num_complex::Complex64::new(0.0, -omega0 * ak));
    }
    sort_by_imag(&mut out);
    out
}

fn deviation(actual: &[num_complex::Complex64], expected: &[num_complex::Complex64]) -> f64 {
    actual.iter().zip(expected).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

/// Eigenstructure of `A0` against the resonance prediction.
pub fn modal_report(model: &StateModel, tol: &Tolerances) -> Result<ModalReport> {
    let n = model.n();
    let mut ipbf = bf_matrix(&model.f)?;
    for i in 0..n {
        ipbf[(i, i)] += 1.0;
    }
    let a: Vec<f64> = eig_with(&ipbf, tol, false)?.sorted_real().iter().map(|v| v.max(0.0).sqrt()).collect();
    let mut alpha: Vec<f64> = model.spec.alpha().iter().map(|&v| f64::from(v)).collect();
    alpha.sort_by(f64::total_cmp);

    let mut sigma = eig_with(&model.a0, tol, false)?.eigenvalues;
    sort_by_imag(&mut sigma);
    let structure_deviation = deviation(&sigma, &expected_spectrum(n, model.omega0, &a));
    let design_deviation = deviation(&sigma, &expected_spectrum(n, model.omega0, &alpha));

    let sv = singular_values(&model.a0)?;
    let cutoff = 1e-9 * sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    let passed = structure_deviation <= tol.modal && design_deviation <= tol.modal && rank == 2 * n + 2;
    Ok(ModalReport {
        a,
        structure_deviation,
        design_deviation,
        rank,
        passed,
    })
}

/// As [`modal_report`], rejecting the design when the check fails.
pub fn modal_check(model: &StateModel) -> Result<ModalReport> {
    let tol = Tolerances::default();
    let r = modal_report(model, &tol)?;
    if !r.passed {
        return Err(Error::ModalMismatch {
            deviation: r.structure_deviation.max(r.design_deviation),
            tolerance: tol.modal,
        });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_stage() -> StateModel {
        let spec = DesignSpec::standard(2).unwrap();
        let f = [4.0 / 0.6312003, 4.0 / 1.1266];
        build_a0(&spec, &f).unwrap()
    }

    #[test]
    fn single_stage_rows() {
        let spec = DesignSpec::standard(1).unwrap();
        let m = build_a0(&spec, &[1.5]).unwrap();
        assert_eq!(m.dim(), 5);
        // vc1' = -(3/2)(i1 + iL)
        assert_eq!(m.a0[(0, 3)], -1.5);
        assert_eq!(m.a0[(0, 4)], -1.5);
        let x = vec![0.0; 5];
        assert!((&m.a0 * nalgebra::DVector::from_vec(x)).amax() == 0.0);
    }

    #[test]
    fn rejects_non_positive_f() {
        let spec = DesignSpec::standard(2).unwrap();
        assert!(matches!(build_a0(&spec, &[1.0, -1.0]), Err(Error::NonPositive { index: 1, .. })));
    }

    #[test]
    fn scaling_is_skew() {
        assert!(two_stage().skew_residual() <= 1e-12);
    }

    #[test]
    fn energy_of_initial_state() {
        let m = two_stage();
        assert!((m.energy(&m.initial_state(1.0)) - 1.0).abs() < 1e-15);
        assert!((m.energy(&m.target_state(1.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn labels_cover_state() {
        assert_eq!(state_labels(2), vec!["vc1", "vc2", "v1", "v2", "v3", "i1", "i2", "iL"]);
    }
}
