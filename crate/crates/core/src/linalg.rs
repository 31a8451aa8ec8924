//! Small dense linear-algebra helpers shared by the model and corridor code.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) const SYMMETRY_TOL: f64 = 1e-9;

/// Square roots, inverse and log-determinant of a symmetric positive-definite
/// matrix, all taken from one eigendecomposition.
#[derive(Debug, Clone)]
pub struct SpdRoots {
    pub sqrt: DMatrix<f64>,
    pub inv_sqrt: DMatrix<f64>,
    pub inv: DMatrix<f64>,
    pub log_det: f64,
    pub min_eigenvalue: f64,
}

impl SpdRoots {
    /// Eigenvalues below `floor` are raised to it; a non-positive spectrum
    /// after flooring is reported as singular.
    pub fn new(matrix: &DMatrix<f64>, floor: f64) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::SingularCovariance);
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("covariance"));
        }
        let sym = (matrix + matrix.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let mut values = eig.eigenvalues.clone();
        for v in values.iter_mut() {
            if *v < floor {
                *v = floor;
            }
        }
        let min_eigenvalue = values.min();
        if !(min_eigenvalue > 0.0) {
            return Err(Error::SingularCovariance);
        }
        let v = &eig.eigenvectors;
        let build = |f: &dyn Fn(f64) -> f64| {
            let d = DMatrix::from_diagonal(&values.map(f));
            let m = v * d * v.transpose();
            (&m + m.transpose()) * 0.5
        };
        Ok(SpdRoots {
            sqrt: build(&|x| x.sqrt()),
            inv_sqrt: build(&|x| 1.0 / x.sqrt()),
            inv: build(&|x| 1.0 / x),
            log_det: values.iter().map(|x| x.ln()).sum(),
            min_eigenvalue,
        })
    }
}

pub(crate) fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    let n = m.nrows();
    if m.ncols() != n {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return false;
            }
        }
    }
    true
}

pub(crate) fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_are_consistent() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let r = SpdRoots::new(&m, 0.0).unwrap();
        assert!((&r.sqrt * &r.sqrt - &m).norm() < 1e-12);
        assert!((&r.inv_sqrt * &r.inv_sqrt - &r.inv).norm() < 1e-12);
        assert!((&r.inv * &m - DMatrix::identity(3, 3)).norm() < 1e-12);
        assert!((r.log_det - m.determinant().ln()).abs() < 1e-12);
    }

    #[test]
    fn singular_without_floor_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(SpdRoots::new(&m, 0.0), Err(Error::SingularCovariance)));
        let r = SpdRoots::new(&m, 1e-6).unwrap();
        assert!((r.min_eigenvalue - 1e-6).abs() < 1e-12);
    }
}
