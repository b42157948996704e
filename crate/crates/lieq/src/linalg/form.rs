use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};

/// Which diagonal form a computation runs against.
///
/// Both are diagonal with entries +-1. `Lie` acts on R^{n+3} and has two
/// negative axes, the first and the last coordinate. `Lorentz` acts on
/// R^{n+2} with a single negative axis, the first coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    Lie,
    Lorentz,
}

/// A fixed diagonal bilinear form tied to the sphere dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BilinearForm {
    kind: FormKind,
    n: usize,
}

/// Sign class of a vector under an indefinite form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalType {
    Spacelike,
    Timelike,
    Lightlike,
}

impl BilinearForm {
    pub fn lie(n: usize) -> Self {
        BilinearForm { kind: FormKind::Lie, n }
    }

    pub fn lorentz(n: usize) -> Self {
        BilinearForm { kind: FormKind::Lorentz, n }
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            FormKind::Lie => self.n + 3,
            FormKind::Lorentz => self.n + 2,
        }
    }

    /// Diagonal entry at coordinate `i`.
    pub fn sign(&self, i: usize) -> f64 {
        let d = self.dim();
        debug_assert!(i < d);
        match self.kind {
            FormKind::Lie => {
                if i == 0 || i == d - 1 {
                    -1.0
                } else {
                    1.0
                }
            }
            FormKind::Lorentz => {
                if i == 0 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| if i == j { self.sign(i) } else { 0.0 })
    }

    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let d = self.dim();
        assert_eq!(x.len(), d, "form/vector dimension mismatch");
        assert_eq!(y.len(), d, "form/vector dimension mismatch");
        let mut acc = 0.0;
        for i in 0..d {
            acc += self.sign(i) * x[i] * y[i];
        }
        acc
    }

    pub fn norm2(&self, x: &DVector<f64>) -> f64 {
        self.apply(x, x)
    }

    /// Multiply componentwise by the diagonal, i.e. the matrix-vector product
    /// G x without materializing G.
    pub fn conjugate(&self, x: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        assert_eq!(x.len(), d, "form/vector dimension mismatch");
        DVector::from_fn(d, |i, _| self.sign(i) * x[i])
    }

    /// Classify `v`; the lightlike band is |<v,v>| <= tol * |v|^2 so the test
    /// scales with the representative.
    pub fn causal_type(&self, v: &DVector<f64>, tol: f64) -> Result<CausalType> {
        let e = v.norm_squared();
        if e == 0.0 {
            return Err(GeomError::ZeroVector);
        }
        let q = self.norm2(v);
        if q.abs() <= tol * e {
            Ok(CausalType::Lightlike)
        } else if q < 0.0 {
            Ok(CausalType::Timelike)
        } else {
            Ok(CausalType::Spacelike)
        }
    }

    /// Gram matrix of a spanning set under this form.
    pub fn gram(&self, basis: &[DVector<f64>]) -> DMatrix<f64> {
        let k = basis.len();
        let mut g = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = self.apply(&basis[i], &basis[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }
}
