//! Dense linear-algebra kernel sized for the small matrices of the design
//! problem (at most a few dozen rows): eigenvalues and eigenvectors of real
//! nonsymmetric matrices, smallest singular values and the matrix exponential.
//!
//! Everything here is a pure function of its inputs.

mod hqr;

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;
use hqr::RealEigen;

pub type DenseMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

/// Eigenvalues of a square matrix, optionally with paired unit-norm right and
/// left eigenvectors (`left[i]` satisfies `A^T w = lambda_i w`).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub right: Option<Vec<DVector<Complex64>>>,
    pub left: Option<Vec<DVector<Complex64>>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Real parts in ascending order. Meaningful when the spectrum is real.
    pub fn sorted_real(&self) -> Vec<f64> {
        let mut re: Vec<f64> = self.eigenvalues.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        re
    }

    /// Largest imaginary part in absolute value.
    pub fn max_imag(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }
}

fn check_square<T: nalgebra::Scalar>(a: &DMatrix<T>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(())
}

fn check_finite(a: &DenseMatrix) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Eigenvalues of `a`.
pub fn eig(a: &DenseMatrix) -> Result<Spectrum> {
    eig_with(a, &Tolerances::default(), false)
}

/// Eigenvalues with unit right and left eigenvectors.
pub fn eig_vectors(a: &DenseMatrix) -> Result<Spectrum> {
    eig_with(a, &Tolerances::default(), true)
}

pub fn eig_with(a: &DenseMatrix, tol: &Tolerances, vectors: bool) -> Result<Spectrum> {
    check_square(a)?;
    check_finite(a)?;
    let right = RealEigen::compute(a, tol.eig_max_sweeps)?;
    let eigenvalues: Vec<Complex64> = right
        .re
        .iter()
        .zip(&right.im)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    if !vectors {
        return Ok(Spectrum {
            eigenvalues,
            right: None,
            left: None,
        });
    }

    let left = RealEigen::compute(&a.transpose(), tol.eig_max_sweeps)?;
    let right_vecs = unpack_vectors(&right);
    let left_vecs = unpack_vectors(&left);
    let left_vals: Vec<Complex64> = left
        .re
        .iter()
        .zip(&left.im)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();

    // pair by eigenvalue proximity, ties to the lower index
    let mut used = vec![false; left_vals.len()];
    let mut paired = Vec::with_capacity(eigenvalues.len());
    for lambda in &eigenvalues {
        let mut best: Option<(usize, f64)> = None;
        for (j, mu) in left_vals.iter().enumerate() {
            if used[j] {
                continue;
            }
            let dist = (lambda - mu).norm();
            if best.is_none_or(|(_, d)| dist < d) {
                best = Some((j, dist));
            }
        }
        let (j, _) = best.expect("left and right spectra have equal length");
        used[j] = true;
        paired.push(left_vecs[j].clone());
    }

    Ok(Spectrum {
        eigenvalues,
        right: Some(right_vecs),
        left: Some(paired),
    })
}

fn unpack_vectors(e: &RealEigen) -> Vec<DVector<Complex64>> {
    let n = e.re.len();
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    while j < n {
        if e.im[j] == 0.0 {
            out.push(normalize(e.vectors.column(j).map(|x| Complex64::new(x, 0.0))));
            j += 1;
        } else {
            let v = DVector::from_fn(n, |i, _| {
                Complex64::new(e.vectors[(i, j)], e.vectors[(i, j + 1)])
            });
            let v = normalize(v);
            let conj = v.map(|z| z.conj());
            // im[j] > 0 belongs to re + i im, its partner is the conjugate
            if e.im[j] > 0.0 {
                out.push(v);
                out.push(conj);
            } else {
                out.push(conj);
                out.push(v);
            }
            j += 2;
        }
    }
    out
}

fn normalize(v: DVector<Complex64>) -> DVector<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.map(|z| z / norm)
    } else {
        v
    }
}

/// Smallest singular value of a real or complex matrix.
pub fn smallest_singular_value<T>(a: &DMatrix<T>) -> Result<f64>
where
    T: ComplexField<RealField = f64>,
{
    if a.iter().any(|z| !z.clone().is_finite()) {
        return Err(Error::NonFinite);
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let svd = a.clone().svd(false, false);
    Ok(svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min))
}

/// All singular values in descending order.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    check_finite(a)?;
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// `exp(A t)`.
pub fn expm(a: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
    check_square(a)?;
    check_finite(a)?;
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    let at = a * t;
    let norm = one_norm(&at);
    let out = at.exp();
    if out.iter().all(|x| x.is_finite()) {
        Ok(out)
    } else {
        Err(Error::ExpmOverflow { norm })
    }
}

pub fn one_norm(a: &DenseMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn identity_spectrum() {
        let s = eig(&DenseMatrix::identity(3, 3)).unwrap();
        for z in &s.eigenvalues {
            assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(
            eig(&DenseMatrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
        assert!(matches!(expm(&DenseMatrix::zeros(3, 2), 1.0), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn non_finite_rejected() {
        let mut a = DenseMatrix::identity(2, 2);
        a[(0, 1)] = f64::NAN;
        assert!(matches!(eig(&a), Err(Error::NonFinite)));
    }

    #[test]
    fn rotation_has_conjugate_pair_and_vectors() {
        let a = DenseMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let s = eig_vectors(&a).unwrap();
        let mut ims: Vec<f64> = s.eigenvalues.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(ims[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ims[1], 1.0, epsilon = 1e-14);
        let ac = a.map(|x| Complex64::new(x, 0.0));
        for (lambda, v) in s.eigenvalues.iter().zip(s.right.as_ref().unwrap()) {
            let r = &ac * v - v * *lambda;
            assert!(r.norm() < 1e-14);
        }
    }

    #[test]
    fn eigenpairs_of_random_matrix() {
        // fixed pseudo-random 7x7, mixes real and complex eigenvalues
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let a = DenseMatrix::from_fn(7, 7, |_, _| next());
        let s = eig_vectors(&a).unwrap();
        let ac = a.map(|x| Complex64::new(x, 0.0));
        let at = ac.transpose();
        let norm = a.norm();
        for i in 0..7 {
            let lambda = s.eigenvalues[i];
            let v = &s.right.as_ref().unwrap()[i];
            let w = &s.left.as_ref().unwrap()[i];
            assert!((&ac * v - v * lambda).norm() <= 1e-10 * norm);
            assert!((&at * w - w * lambda).norm() <= 1e-10 * norm);
            assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
        }
        let trace: Complex64 = s.eigenvalues.iter().sum();
        assert_abs_diff_eq!(trace.re, a.trace(), epsilon = 1e-12);
        assert_abs_diff_eq!(trace.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_matrix_eigenvalues() {
        let s = eig(&DenseMatrix::zeros(4, 4)).unwrap();
        assert!(s.eigenvalues.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn singular_values_basic() {
        assert_abs_diff_eq!(
            smallest_singular_value(&DenseMatrix::identity(4, 4)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let a = DenseMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(smallest_singular_value(&a).unwrap() < 1e-15);
    }

    #[test]
    fn smallest_singular_value_matches_gram_route() {
        let a = DenseMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, -1.0, 3.0, 0.2, 0.3, 0.1, 2.0]);
        let gram = a.transpose() * &a;
        let lmin = gram.symmetric_eigen().eigenvalues.min();
        let smin = smallest_singular_value(&a).unwrap();
        assert!((smin - lmin.sqrt()).abs() <= 1e-8 * smin);
    }

    #[test]
    fn expm_trivial_cases() {
        let z = expm(&DenseMatrix::zeros(3, 3), 2.0).unwrap();
        assert_abs_diff_eq!(z, DenseMatrix::identity(3, 3), epsilon = 1e-15);
        let d = DenseMatrix::from_diagonal(&DVector::from_vec(vec![0.5, -2.0]));
        let e = expm(&d, 1.0).unwrap();
        assert_abs_diff_eq!(e[(0, 0)], 0.5f64.exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(e[(1, 1)], (-2.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(e[(0, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn expm_rotation_half_turn() {
        let a = DenseMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let e = expm(&a, PI).unwrap();
        assert_abs_diff_eq!(e, -DenseMatrix::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn expm_overflow_is_reported() {
        let a = DenseMatrix::from_element(2, 2, 1.0);
        assert!(matches!(expm(&a, 1e6), Err(Error::ExpmOverflow { .. })));
    }
}
