use nalgebra::DMatrix;

use crate::error::{GeomError, Result};

/// Matrix exponential by scaling and squaring with a Taylor tail. Terms are
/// added until the running term falls below 1e-14 of the partial sum, so the
/// truncation error sits well under the group-membership tolerances used on
/// the result.
pub fn matrix_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), a.ncols(), "exponential of a non-square matrix");
    let d = a.nrows();
    let norm = a.iter().map(|x| x.abs()).fold(0.0f64, f64::max) * d as f64;
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = a / 2f64.powi(s as i32);
    let mut sum = DMatrix::identity(d, d);
    let mut term = DMatrix::identity(d, d);
    for k in 1..200 {
        term = &term * &b / k as f64;
        sum += &term;
        let tn = term.norm();
        if tn <= 1e-14 * sum.norm() {
            break;
        }
    }
    let mut out = sum;
    for _ in 0..s {
        out = &out * &out;
    }
    out
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues ascending, matching orthonormal eigenvectors as columns. For
/// the small dimensions used here Jacobi delivers eigenvectors at machine
/// precision even when the matrix is a tiny perturbation of a diagonal,
/// where faster tridiagonalization codes can mix well-separated pairs.
pub fn jacobi_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let d = m.nrows();
    assert_eq!(d, m.ncols(), "jacobi eigen of a non-square matrix");
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(d, d);
    for _ in 0..64 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in p + 1..d {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        let diag = a.diagonal().norm();
        if off.sqrt() <= f64::EPSILON * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vecs = DMatrix::zeros(d, d);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &v.column(i));
    }
    (values, vecs)
}

/// Solve the symmetric-definite pencil `a v = lambda b v` with `b` positive
/// definite, via the Cholesky factor of `b`. Eigenvalues come back ascending;
/// the matching eigenvectors are the columns of the returned matrix and are
/// b-orthonormal.
pub fn sym_generalized_eigen(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let d = a.nrows();
    if a.ncols() != d || b.nrows() != d || b.ncols() != d {
        return Err(GeomError::DimensionMismatch { expected: d, got: b.nrows() });
    }
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| GeomError::Degenerate("metric not positive definite".into()))?;
    let l = chol.l();
    // C = L^{-1} A L^{-T}, symmetrized against roundoff.
    let s1 = l
        .solve_lower_triangular(a)
        .ok_or_else(|| GeomError::Degenerate("singular Cholesky factor".into()))?;
    let c_t = l
        .solve_lower_triangular(&s1.transpose())
        .ok_or_else(|| GeomError::Degenerate("singular Cholesky factor".into()))?;
    let c = (&c_t + c_t.transpose()) * 0.5;
    let (values, y) = jacobi_symmetric_eigen(&c);
    let mut vecs = DMatrix::zeros(d, d);
    let lt = l.transpose();
    for col in 0..d {
        let v = lt
            .solve_upper_triangular(&y.column(col).clone_owned())
            .ok_or_else(|| GeomError::Degenerate("singular Cholesky factor".into()))?;
        vecs.set_column(col, &v);
    }
    Ok((values, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_zero_is_identity() {
        let z = DMatrix::zeros(4, 4);
        assert_eq!(matrix_exp(&z), DMatrix::identity(4, 4));
    }

    #[test]
    fn exp_of_rotation_generator() {
        let th = 0.7f64;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -th, th, 0.0]);
        let e = matrix_exp(&a);
        let expect =
            DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        assert!((e - expect).norm() < 1e-14);
    }

    #[test]
    fn exp_inverse_consistency() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[0.3, -1.2, 0.5, 0.9, 0.1, -0.4, -0.7, 0.6, 0.2],
        );
        let p = matrix_exp(&a) * matrix_exp(&(-&a));
        assert!((p - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn generalized_eigen_diagonal_case() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        let b = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let (vals, vecs) = sym_generalized_eigen(&a, &b).unwrap();
        assert!((vals[0] - 0.5).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
        for k in 0..2 {
            let v = vecs.column(k).clone_owned();
            let res = &a * &v - &b * &v * vals[k];
            assert!(res.norm() < 1e-12);
        }
    }

    #[test]
    fn generalized_eigen_rejects_indefinite_metric() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(sym_generalized_eigen(&a, &b).is_err());
    }
}
