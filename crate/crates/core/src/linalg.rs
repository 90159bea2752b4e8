//! Dense LU solves with a 1-norm condition estimate.

use nalgebra::{ComplexField, DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("singular system (size {0})")]
    Singular(usize),
}

/// LU factors of a square matrix, kept for repeated right-hand sides.
pub struct Lu<T: ComplexField<RealField = f64>> {
    lu: nalgebra::linalg::LU<T, nalgebra::Dyn, nalgebra::Dyn>,
    adjoint: nalgebra::linalg::LU<T, nalgebra::Dyn, nalgebra::Dyn>,
    norm1: f64,
    n: usize,
}

fn norm1<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|x| x.clone().modulus()).sum::<f64>()).fold(0.0, f64::max)
}

impl<T: ComplexField<RealField = f64>> Lu<T> {
    pub fn new(a: DMatrix<T>) -> Result<Self, LinalgError> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "square system expected");
        let norm1 = norm1(&a);
        let adjoint = a.adjoint().lu();
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(LinalgError::Singular(n));
        }
        Ok(Lu { lu, adjoint, norm1, n })
    }

    pub fn solve(&self, b: &DVector<T>) -> Result<DVector<T>, LinalgError> {
        self.lu.solve(b).ok_or(LinalgError::Singular(self.n))
    }

    /// Hager–Higham estimate of ‖A‖₁‖A⁻¹‖₁.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = DVector::<T>::from_element(n, T::from_real(1.0 / n as f64));
        let mut est = 0.0;
        for iter in 0..5 {
            let Some(y) = self.lu.solve(&x) else { return f64::INFINITY };
            let ny: f64 = y.iter().map(|v| v.clone().modulus()).sum();
            if iter > 0 && ny <= est {
                break;
            }
            est = ny;
            let xi = y.map(|v| {
                let m = v.clone().modulus();
                if m == 0.0 { T::one() } else { v.unscale(m) }
            });
            let Some(z) = self.adjoint.solve(&xi) else { return f64::INFINITY };
            let (j, zj) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.clone().modulus()))
                .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
            let ztx = z.dotc(&x).real();
            if iter > 0 && zj <= ztx {
                break;
            }
            x = DVector::<T>::zeros(n);
            x[j] = T::one();
        }
        est * self.norm1
    }
}

/// Relative residual ‖Ax − b‖₂ / ‖b‖₂.
pub fn relative_residual<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, x: &DVector<T>, b: &DVector<T>) -> f64 {
    let r = a * x - b;
    let nb = b.norm();
    if nb == 0.0 { r.norm() } else { r.norm() / nb }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64 as C64;

    #[test]
    fn condition_of_diagonal() {
        let a = DMatrix::<f64>::from_diagonal(&DVector::from_vec(vec![1.0, 10.0, 1e-3]));
        let lu = Lu::new(a).unwrap();
        assert_relative_eq!(lu.condition_estimate(), 1e4, max_relative = 1e-12);
    }

    #[test]
    fn complex_solve_roundtrip() {
        let n = 6;
        let a = DMatrix::<C64>::from_fn(n, n, |i, j| {
            C64::new(1.0 / (1.0 + i as f64 + j as f64), if i == j { 2.0 } else { 0.1 * (i as f64 - j as f64) })
        });
        let x = DVector::<C64>::from_fn(n, |i, _| C64::new(i as f64, 1.0 - i as f64));
        let b = &a * &x;
        let lu = Lu::new(a.clone()).unwrap();
        let y = lu.solve(&b).unwrap();
        assert!((y - &x).norm() < 1e-12);
        let inv = a.clone().try_inverse().unwrap();
        let exact = norm1(&a) * norm1(&inv);
        let est = lu.condition_estimate();
        assert!(est <= exact * (1.0 + 1e-10) && est >= exact / 10.0, "{est} vs {exact}");
    }

    #[test]
    fn singular_is_reported() {
        let a = DMatrix::<f64>::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(Lu::new(a), Err(LinalgError::Singular(2))));
    }
}
