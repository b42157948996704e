use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{GeomError, Result};
use crate::linalg::form::BilinearForm;

/// Nonzero homogeneous coordinates; representatives are stored as given and
/// only normalized inside comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    coords: DVector<f64>,
}

impl ProjectivePoint {
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        if coords.norm_squared() == 0.0 {
            return Err(GeomError::ZeroVector);
        }
        Ok(ProjectivePoint { coords })
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn normalized(&self) -> DVector<f64> {
        unit(&self.coords)
    }
}

pub fn unit(v: &DVector<f64>) -> DVector<f64> {
    v / v.norm()
}

/// Equality in projective space: stack the unit representatives as two rows
/// and test whether the second singular value vanishes.
pub fn projective_equal(x: &ProjectivePoint, y: &ProjectivePoint, tol: f64) -> bool {
    assert_eq!(x.dim(), y.dim(), "projective points in different spaces");
    let a = x.normalized();
    let b = y.normalized();
    let m = DMatrix::from_fn(2, a.len(), |i, j| if i == 0 { a[j] } else { b[j] });
    let svd = SVD::new(m, false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|p, q| q.partial_cmp(p).unwrap());
    sv[1] < tol
}

/// Sine of the angle between the lines spanned by `x` and `y`; the natural
/// drift metric for tracking curvature spheres.
pub fn projective_sin_distance(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let c = unit(x).dot(&unit(y));
    (1.0 - c * c).max(0.0).sqrt()
}

/// A linear subspace recorded by a spanning, linearly independent basis;
/// geometrically the projectivization is what matters.
#[derive(Debug, Clone)]
pub struct ProjectiveSubspace {
    basis: Vec<DVector<f64>>,
    ambient: usize,
}

impl ProjectiveSubspace {
    pub fn new(basis: Vec<DVector<f64>>) -> Result<Self> {
        if basis.is_empty() {
            return Err(GeomError::InvalidInput("empty basis".into()));
        }
        let ambient = basis[0].len();
        for b in &basis {
            if b.len() != ambient {
                return Err(GeomError::DimensionMismatch { expected: ambient, got: b.len() });
            }
        }
        let ortho = orthonormalize(&basis, 1e-12);
        if ortho.len() != basis.len() {
            return Err(GeomError::Degenerate(
                "basis is numerically dependent".into(),
            ));
        }
        Ok(ProjectiveSubspace { basis, ambient })
    }

    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Dimension as a linear space (projective dimension + 1).
    pub fn linear_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn orthonormal_basis(&self) -> Vec<DVector<f64>> {
        orthonormalize(&self.basis, 1e-12)
    }

    /// Euclidean-orthogonal projection residual of `v` against the span,
    /// relative to |v|. Zero means containment.
    pub fn containment_residual(&self, v: &DVector<f64>) -> f64 {
        let mut r = unit(v);
        for b in self.orthonormal_basis() {
            let c = r.dot(&b);
            r -= b * c;
        }
        r.norm()
    }
}

/// Modified Gram-Schmidt; directions whose remainder falls below `tol` of the
/// original length are dropped.
pub fn orthonormalize(vectors: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut r = v.clone();
        for b in &out {
            let c = r.dot(b);
            r -= b * c;
        }
        // Second pass for numerical hygiene on near-dependent input.
        for b in &out {
            let c = r.dot(b);
            r -= b * c;
        }
        let rn = r.norm();
        if rn > tol * scale {
            out.push(r / rn);
        }
    }
    out
}

/// Orthogonal complement (Euclidean) of a set of rows, returned as an
/// orthonormal basis. Rows are orthonormalized first so the Gram spectrum
/// splits cleanly at 1/2.
fn euclidean_nullspace(rows: &[DVector<f64>], ambient: usize) -> Vec<DVector<f64>> {
    let ortho = orthonormalize(rows, 1e-12);
    if ortho.is_empty() {
        return (0..ambient)
            .map(|i| DVector::from_fn(ambient, |j, _| if i == j { 1.0 } else { 0.0 }))
            .collect();
    }
    let mut a = DMatrix::zeros(ambient, ambient);
    for b in &ortho {
        a += b * b.transpose();
    }
    let (vals, vecs) = crate::linalg::jacobi_symmetric_eigen(&a);
    let mut out = Vec::new();
    for (i, &lam) in vals.iter().enumerate() {
        if lam < 0.5 {
            out.push(vecs.column(i).clone_owned());
        }
    }
    out
}

/// Polar (orthogonal complement with respect to `form`) of a subspace. The
/// polar of a k-dimensional span is (dim - k)-dimensional since the form is
/// nondegenerate.
pub fn polar_subspace(s: &ProjectiveSubspace, form: &BilinearForm) -> Result<ProjectiveSubspace> {
    if s.ambient() != form.dim() {
        return Err(GeomError::DimensionMismatch { expected: form.dim(), got: s.ambient() });
    }
    let rows: Vec<DVector<f64>> = s
        .orthonormal_basis()
        .iter()
        .map(|b| form.conjugate(b))
        .collect();
    let basis = euclidean_nullspace(&rows, form.dim());
    ProjectiveSubspace::new(basis)
}

/// Signature of the form restricted to the span: counts of positive,
/// negative, and near-zero eigenvalues of the Gram matrix of the given basis.
/// Near-zero means |lambda| <= tol * max|lambda|.
pub fn subspace_signature(
    s: &ProjectiveSubspace,
    form: &BilinearForm,
    tol: f64,
) -> Result<(usize, usize, usize)> {
    if s.ambient() != form.dim() {
        return Err(GeomError::DimensionMismatch { expected: form.dim(), got: s.ambient() });
    }
    let gram = form.gram(s.basis());
    let (vals, _) = crate::linalg::jacobi_symmetric_eigen(&gram);
    let scale = vals.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let (mut p, mut m, mut z) = (0usize, 0usize, 0usize);
    for &l in vals.iter() {
        if scale == 0.0 || l.abs() <= tol * scale {
            z += 1;
        } else if l > 0.0 {
            p += 1;
        } else {
            m += 1;
        }
    }
    Ok((p, m, z))
}

/// Singular value analysis of a stack of sample rows: descending singular
/// values plus a full set of right singular vectors. Tall stacks are strided
/// down to keep the decomposition cheap; the span estimate is unaffected for
/// the sample counts used here.
pub struct RowSpanSvd {
    pub singular_values: Vec<f64>,
    /// Right singular vectors as rows, aligned with `singular_values`;
    /// trailing rows (beyond the rank) complete an orthonormal basis.
    pub right_vectors: Vec<DVector<f64>>,
}

impl RowSpanSvd {
    pub fn new(rows: &[DVector<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(GeomError::InvalidInput("empty row stack".into()));
        }
        let ambient = rows[0].len();
        const MAX_ROWS: usize = 4096;
        let stride = rows.len().div_ceil(MAX_ROWS);
        let kept: Vec<&DVector<f64>> = rows.iter().step_by(stride.max(1)).collect();
        let k = kept.len();
        let m = DMatrix::from_fn(k, ambient, |i, j| kept[i][j]);
        let svd = SVD::new(m, false, true);
        let vt = svd.v_t.expect("right singular vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[b]
                .partial_cmp(&svd.singular_values[a])
                .unwrap()
        });
        let mut singular_values = Vec::with_capacity(order.len());
        let mut right_vectors = Vec::with_capacity(order.len());
        for &i in &order {
            singular_values.push(svd.singular_values[i]);
            right_vectors.push(DVector::from_fn(ambient, |j, _| vt[(i, j)]));
        }
        // Thin SVD of a wide-enough stack already yields `ambient` right
        // vectors; if the stack had fewer rows than columns, complete the
        // basis so nullspace extraction stays available.
        if right_vectors.len() < ambient {
            let missing = euclidean_nullspace(&right_vectors, ambient);
            for v in missing {
                singular_values.push(0.0);
                right_vectors.push(v);
            }
        }
        Ok(RowSpanSvd { singular_values, right_vectors })
    }

    /// Number of singular values above `tol * sigma_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        self.singular_values.iter().filter(|&&s| s > tol * smax).count()
    }

    pub fn span(&self, rank: usize) -> Result<ProjectiveSubspace> {
        ProjectiveSubspace::new(self.right_vectors[..rank].to_vec())
    }

    pub fn complement(&self, rank: usize) -> Result<ProjectiveSubspace> {
        ProjectiveSubspace::new(self.right_vectors[rank..].to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn v(s: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(s)
    }

    fn e(i: usize, d: usize) -> DVector<f64> {
        DVector::from_fn(d, |j, _| if i == j { 1.0 } else { 0.0 })
    }

    #[test]
    fn projective_equality_ignores_scale() {
        let x = ProjectivePoint::new(v(&[1.0, -2.0, 3.0])).unwrap();
        let y = ProjectivePoint::new(v(&[-2.0, 4.0, -6.0])).unwrap();
        assert!(projective_equal(&x, &y, 1e-12));
        let z = ProjectivePoint::new(v(&[1.0, -2.0, 3.0 + 1e-3])).unwrap();
        assert!(!projective_equal(&x, &z, 1e-6));
    }

    #[test]
    fn signature_of_null_plane() {
        let g = BilinearForm::lie(3);
        let s = ProjectiveSubspace::new(vec![
            v(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
            v(&[1.0, -1.0, 0.0, 0.0, 0.0, 0.0]),
        ])
        .unwrap();
        assert_eq!(subspace_signature(&s, &g, 1e-8).unwrap(), (1, 1, 0));
    }

    #[test]
    fn signature_invariant_under_recombination() {
        let g = BilinearForm::lie(3);
        let mut rng = StdRng::seed_from_u64(7);
        let base: Vec<DVector<f64>> = (0..3)
            .map(|_| DVector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0)))
            .collect();
        let s = ProjectiveSubspace::new(base.clone()).unwrap();
        let sig = subspace_signature(&s, &g, 1e-8).unwrap();
        for _ in 0..100 {
            let mut mixed = Vec::new();
            loop {
                mixed.clear();
                for _ in 0..3 {
                    let c: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let mut w = DVector::zeros(6);
                    for (ci, b) in c.iter().zip(&base) {
                        w += b * *ci;
                    }
                    mixed.push(w);
                }
                if ProjectiveSubspace::new(mixed.clone()).is_ok() {
                    break;
                }
            }
            let t = ProjectiveSubspace::new(mixed).unwrap();
            assert_eq!(subspace_signature(&t, &g, 1e-8).unwrap(), sig);
        }
    }

    #[test]
    fn polar_of_timelike_plane() {
        let g = BilinearForm::lie(3);
        let s = ProjectiveSubspace::new(vec![e(0, 6), e(5, 6)]).unwrap();
        let p = polar_subspace(&s, &g).unwrap();
        assert_eq!(p.linear_dim(), 4);
        assert_eq!(subspace_signature(&p, &g, 1e-8).unwrap(), (4, 0, 0));
        let back = polar_subspace(&p, &g).unwrap();
        assert_eq!(back.linear_dim(), 2);
        for b in back.basis() {
            assert!(s.containment_residual(b) < 1e-10);
        }
    }

    #[test]
    fn row_span_rank_and_complement() {
        let rows = vec![
            v(&[1.0, 0.0, 0.0, 1.0]),
            v(&[2.0, 0.0, 0.0, 2.0]),
            v(&[0.0, 1.0, 0.0, 0.0]),
            v(&[1.0, 1.0, 0.0, 1.0]),
        ];
        let svd = RowSpanSvd::new(&rows).unwrap();
        assert_eq!(svd.rank(1e-8), 2);
        let comp = svd.complement(2).unwrap();
        assert_eq!(comp.linear_dim(), 2);
        for b in comp.basis() {
            for r in &rows {
                assert!(b.dot(r).abs() < 1e-10);
            }
        }
    }
}
