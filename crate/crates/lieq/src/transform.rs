//! The transformation groups of the two quadric models.
//!
//! A sphere transformation is a projective map preserving the quadric, i.e.
//! the projectivization of a linear map preserving the indefinite form on
//! R^{n+3}. These take oriented spheres to oriented spheres and preserve
//! oriented contact; the subgroup fixing the orientation axis is the
//! conformal (Moebius) group acting on unoriented spheres, and the
//! one-parameter rotation mixing the two timelike axes shifts all signed
//! spherical radii by a constant (parallel transformations).

use nalgebra::DMatrix;

use crate::coords::{mobius_representative, EuclideanSphereObject, LieCoord};
use crate::error::{GeomError, Result};
use crate::linalg::{matrix_exp, BilinearForm};
use crate::pencil::PencilLine;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn orthogonality_residual(b: &DMatrix<f64>, form: &BilinearForm) -> f64 {
    let g = form.matrix();
    let lhs = b.transpose() * &g * b;
    (lhs - &g).norm() / g.norm()
}

/// An element of the sphere-geometry group: B^T G B = G for the form with
/// two timelike axes. B and -B induce the same projective map; comparisons
/// account for that, storage does not.
#[derive(Debug, Clone)]
pub struct LieTransform {
    b: DMatrix<f64>,
    n: usize,
}

/// An element of the conformal group of S^n: A^T G A = G for the Lorentz
/// form on R^{n+2}.
#[derive(Debug, Clone)]
pub struct MobiusTransform {
    a: DMatrix<f64>,
    n: usize,
}

impl LieTransform {
    /// Accept a matrix whose orthogonality residual (Frobenius, relative to
    /// |G|) is below `tol`.
    pub fn validate(b: DMatrix<f64>, tol: f64) -> Result<Self> {
        let d = b.nrows();
        if b.ncols() != d || d < 4 {
            return Err(GeomError::DimensionMismatch { expected: d.max(4), got: b.ncols() });
        }
        let n = d - 3;
        let residual = orthogonality_residual(&b, &BilinearForm::lie(n));
        if residual > tol {
            return Err(GeomError::NotOrthogonal { residual });
        }
        Ok(LieTransform { b, n })
    }

    pub fn identity(n: usize) -> Self {
        LieTransform { b: DMatrix::identity(n + 3, n + 3), n }
    }

    /// Embed a conformal transformation, acting trivially on the orientation
    /// axis. The other linear lift of the same conformal map is this one
    /// composed with `orientation_flip`.
    pub fn from_mobius(m: &MobiusTransform) -> Self {
        let d = m.a.nrows() + 1;
        let mut b = DMatrix::zeros(d, d);
        for i in 0..m.a.nrows() {
            for j in 0..m.a.ncols() {
                b[(i, j)] = m.a[(i, j)];
            }
        }
        b[(d - 1, d - 1)] = 1.0;
        LieTransform { b, n: m.n }
    }

    /// Rotation by `t` in the plane of the two timelike axes: adds `t` to
    /// every signed spherical radius (with the usual wrap past +-pi/2 into
    /// the antipodal representative).
    pub fn parallel(n: usize, t: f64) -> Self {
        let d = n + 3;
        let mut b = DMatrix::identity(d, d);
        b[(0, 0)] = t.cos();
        b[(0, d - 1)] = -t.sin();
        b[(d - 1, 0)] = t.sin();
        b[(d - 1, d - 1)] = t.cos();
        LieTransform { b, n }
    }

    /// Reverses all orientations: negates the orientation coordinate.
    pub fn orientation_flip(n: usize) -> Self {
        let d = n + 3;
        let mut b = DMatrix::identity(d, d);
        b[(d - 1, d - 1)] = -1.0;
        LieTransform { b, n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn residual(&self) -> f64 {
        orthogonality_residual(&self.b, &BilinearForm::lie(self.n))
    }

    /// Group inverse, using B^{-1} = G B^T G.
    pub fn inverse(&self) -> Self {
        let g = BilinearForm::lie(self.n);
        let d = self.n + 3;
        let mut inv = self.b.transpose();
        for i in 0..d {
            for j in 0..d {
                inv[(i, j)] *= g.sign(i) * g.sign(j);
            }
        }
        LieTransform { b: inv, n: self.n }
    }

    pub fn compose(&self, other: &LieTransform) -> Result<Self> {
        if self.n != other.n {
            return Err(GeomError::DimensionMismatch { expected: self.n, got: other.n });
        }
        Ok(LieTransform { b: &self.b * &other.b, n: self.n })
    }

    pub fn apply_coord(&self, x: &LieCoord) -> Result<LieCoord> {
        if x.n() != self.n {
            return Err(GeomError::DimensionMismatch { expected: self.n, got: x.n() });
        }
        Ok(LieCoord::new_unchecked(&self.b * x.coords(), self.n))
    }

    /// Image of a pencil line: the line through the images of any spanning
    /// pair. Oriented contact is preserved exactly, so no re-validation.
    pub fn apply_pencil(&self, line: &PencilLine) -> Result<PencilLine> {
        let (k1, k2) = line.spanning();
        let j1 = self.apply_coord(k1)?;
        let j2 = self.apply_coord(k2)?;
        crate::pencil::line_on_quadric(&j1, &j2, &crate::config::Tolerances::default())
    }

    /// Projective equality: B matches +-C entrywise within `tol` (relative).
    pub fn approx_eq(&self, other: &LieTransform, tol: f64) -> bool {
        if self.n != other.n {
            return false;
        }
        let scale = self.b.norm().max(other.b.norm());
        let d1 = (&self.b - &other.b).norm();
        let d2 = (&self.b + &other.b).norm();
        d1.min(d2) <= tol * scale
    }
}

impl MobiusTransform {
    pub fn validate(a: DMatrix<f64>, tol: f64) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d || d < 3 {
            return Err(GeomError::DimensionMismatch { expected: d.max(3), got: a.ncols() });
        }
        let n = d - 2;
        let residual = orthogonality_residual(&a, &BilinearForm::lorentz(n));
        if residual > tol {
            return Err(GeomError::NotOrthogonal { residual });
        }
        Ok(MobiusTransform { a, n })
    }

    pub fn identity(n: usize) -> Self {
        MobiusTransform { a: DMatrix::identity(n + 2, n + 2), n }
    }

    /// Inversion in a sphere (or reflection in a plane), as the Lorentz
    /// reflection in the object's spacelike representative.
    pub fn reflection_in(obj: &EuclideanSphereObject) -> Result<Self> {
        let n = obj.n();
        let form = BilinearForm::lorentz(n);
        let xi = mobius_representative(obj);
        let q = form.norm2(xi.coords());
        if q <= 1e-12 * xi.coords().norm_squared() {
            return Err(GeomError::Degenerate(
                "cannot invert in a point sphere".into(),
            ));
        }
        let d = n + 2;
        let gxi = form.conjugate(xi.coords());
        let mut a = DMatrix::identity(d, d);
        // v - 2 <v, xi> xi / <xi, xi> as a matrix: I - 2 xi (G xi)^T / q.
        a -= xi.coords() * gxi.transpose() * (2.0 / q);
        Ok(MobiusTransform { a, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn compose(&self, other: &MobiusTransform) -> Result<Self> {
        if self.n != other.n {
            return Err(GeomError::DimensionMismatch { expected: self.n, got: other.n });
        }
        Ok(MobiusTransform { a: &self.a * &other.a, n: self.n })
    }
}

/// The scale factor of a map that preserves the form only up to a constant:
/// A^T G A = lambda G. Rejected when no scalar fits within `tol` (relative
/// Frobenius residual). Negative factors occur; they swap the two rulings in
/// split signature.
pub fn conformal_factor(a: &DMatrix<f64>, form: &BilinearForm, tol: f64) -> Result<f64> {
    let d = form.dim();
    if a.nrows() != d || a.ncols() != d {
        return Err(GeomError::DimensionMismatch { expected: d, got: a.nrows() });
    }
    let g = form.matrix();
    let m = a.transpose() * &g * a;
    // Least-squares fit of lambda against the diagonal form.
    let mut lambda = 0.0;
    for i in 0..d {
        lambda += m[(i, i)] * form.sign(i);
    }
    lambda /= d as f64;
    let residual = (&m - &g * lambda).norm() / m.norm().max(g.norm());
    if residual > tol {
        return Err(GeomError::Precondition(format!(
            "matrix does not scale the form: best factor {lambda:.6e}, residual {residual:.3e}"
        )));
    }
    Ok(lambda)
}

/// Deterministic random group element: the exponential of a random element
/// of the Lie algebra, X = G W with W antisymmetric and entries uniform in
/// [-magnitude, magnitude].
pub fn random_lie_transform(n: usize, seed: u64, magnitude: f64) -> LieTransform {
    let d = n + 3;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            let x = rng.gen_range(-magnitude..magnitude);
            w[(i, j)] = x;
            w[(j, i)] = -x;
        }
    }
    let form = BilinearForm::lie(n);
    let mut x = w;
    for i in 0..d {
        let s = form.sign(i);
        for j in 0..d {
            x[(i, j)] *= s;
        }
    }
    LieTransform { b: matrix_exp(&x), n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tolerances;
    use nalgebra::DVector;
    use crate::coords::{
        euclidean_to_lie, lie_to_euclidean, lie_to_spherical, spherical_to_lie,
        SphericalSphere,
    };
    use crate::pencil::{contact_element_to_pencil, oriented_contact, ContactElement};

    fn v(s: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(s)
    }

    fn random_unit(rng: &mut StdRng, d: usize) -> DVector<f64> {
        loop {
            let x = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            let len = x.norm();
            if len > 1e-2 {
                return x / len;
            }
        }
    }

    #[test]
    fn identity_validates_and_stretch_does_not() {
        assert!(LieTransform::validate(DMatrix::identity(6, 6), 1e-10).is_ok());
        let mut m = DMatrix::identity(6, 6);
        m[(5, 5)] = 2.0;
        assert!(matches!(
            LieTransform::validate(m, 1e-10),
            Err(GeomError::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn parallel_adds_to_spherical_radius() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let c = random_unit(&mut rng, 4);
            let rho = rng.gen_range(-1.2..1.2);
            let t = rng.gen_range(-2.0..2.0);
            let s = SphericalSphere::new(c.clone(), rho).unwrap();
            let x = spherical_to_lie(&s).unwrap();
            let pt = LieTransform::parallel(3, t);
            assert!(pt.residual() < 1e-14);
            let y = pt.apply_coord(&x).unwrap();
            let got = lie_to_spherical(&y, &Tolerances::default()).unwrap();
            // Wrap rho + t into the canonical band by flipping the center.
            let mut target = rho + t;
            let mut center = c;
            while target > std::f64::consts::FRAC_PI_2 {
                target -= std::f64::consts::PI;
                center = -center;
            }
            while target < -std::f64::consts::FRAC_PI_2 {
                target += std::f64::consts::PI;
                center = -center;
            }
            let expect = SphericalSphere::new(center, target).unwrap();
            assert!(got.same_sphere(&expect, 1e-10));
            assert!((got.signed_radius - target).abs() < 1e-10);
        }
    }

    #[test]
    fn parallel_composes_additively() {
        let a = LieTransform::parallel(2, 0.4);
        let b = LieTransform::parallel(2, -1.1);
        let c = LieTransform::parallel(2, -0.7);
        assert!(a.compose(&b).unwrap().approx_eq(&c, 1e-14));
    }

    #[test]
    fn orientation_flip_negates_radius() {
        let s = euclidean_to_lie(&EuclideanSphereObject::sphere(v(&[1.0, -1.0, 2.0]), 1.5));
        let flipped = LieTransform::orientation_flip(3).apply_coord(&s).unwrap();
        let back = lie_to_euclidean(&flipped, &Tolerances::default());
        let expect = EuclideanSphereObject::sphere(v(&[1.0, -1.0, 2.0]), -1.5);
        assert!(back.approx_eq(&expect, 1e-12));
    }

    #[test]
    fn mobius_embedding_fixes_point_spheres() {
        let refl = MobiusTransform::reflection_in(
            &EuclideanSphereObject::sphere(v(&[0.0, 0.0, 0.0]), 1.0),
        )
        .unwrap();
        assert!(
            orthogonality_residual(refl.matrix(), &BilinearForm::lorentz(3)) < 1e-12
        );
        let b = LieTransform::from_mobius(&refl);
        assert!(b.residual() < 1e-12);
        // Unit-sphere inversion sends the point at distance 2 to distance 1/2.
        let p = euclidean_to_lie(&EuclideanSphereObject::point(v(&[2.0, 0.0, 0.0])));
        let q = b.apply_coord(&p).unwrap();
        let back = lie_to_euclidean(&q, &Tolerances::default());
        let expect = EuclideanSphereObject::point(v(&[0.5, 0.0, 0.0]));
        assert!(back.approx_eq(&expect, 1e-12), "{back:?}");
        // Double inversion is the identity.
        let sq = b.compose(&b).unwrap();
        assert!(sq.approx_eq(&LieTransform::identity(3), 1e-12));
    }

    #[test]
    fn random_elements_live_in_the_group() {
        for seed in 0..20 {
            let b = random_lie_transform(3, seed, 0.4);
            assert!(b.residual() < 1e-12, "seed {seed}: residual {}", b.residual());
            let inv = b.inverse();
            let prod = b.compose(&inv).unwrap();
            assert!(prod.approx_eq(&LieTransform::identity(3), 1e-10));
        }
        // Determinism.
        let b1 = random_lie_transform(3, 7, 0.4);
        let b2 = random_lie_transform(3, 7, 0.4);
        assert_eq!(b1.matrix(), b2.matrix());
    }

    #[test]
    fn contact_is_invariant() {
        let mut rng = StdRng::seed_from_u64(41);
        let b = random_lie_transform(3, 99, 0.5);
        for _ in 0..100 {
            let p = random_unit(&mut rng, 4);
            let mut xi = random_unit(&mut rng, 4);
            let c = p.dot(&xi);
            xi -= &p * c;
            xi /= xi.norm();
            let line = contact_element_to_pencil(&ContactElement::new(p, xi).unwrap());
            let s1 = line.sphere_at(0.3).unwrap();
            let s2 = line.sphere_at(-0.9).unwrap();
            assert!(oriented_contact(&s1, &s2, 1e-9).unwrap());
            let t1 = b.apply_coord(&s1).unwrap();
            let t2 = b.apply_coord(&s2).unwrap();
            assert!(oriented_contact(&t1, &t2, 1e-9).unwrap());
            // The image line matches the line through the images.
            let img = b.apply_pencil(&line).unwrap();
            let rebuilt =
                crate::pencil::line_on_quadric(&t1, &t2, &Tolerances::default()).unwrap();
            assert!(img.approx_eq(&rebuilt, 1e-9).unwrap());
        }
    }

    #[test]
    fn conformal_factor_of_scaled_mobius() {
        let refl = MobiusTransform::reflection_in(
            &EuclideanSphereObject::sphere(v(&[1.0, 0.0, 0.0]), 2.0),
        )
        .unwrap();
        let lorentz = BilinearForm::lorentz(3);
        let a3 = refl.matrix() * 3.0;
        let lam = conformal_factor(&a3, &lorentz, 1e-10).unwrap();
        assert!((lam - 9.0).abs() < 1e-10);
        // Swapping the two coordinates of the split plane reverses the form.
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let split = BilinearForm::lorentz(0);
        let lam = conformal_factor(&swap, &split, 1e-10).unwrap();
        assert!((lam + 1.0).abs() < 1e-14);
        // A shear fits no factor.
        let shear = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(conformal_factor(&shear, &split, 1e-6).is_err());
    }

    #[test]
    fn sign_ambiguity_in_comparisons() {
        let b = random_lie_transform(2, 5, 0.3);
        let neg = LieTransform::validate(-b.matrix().clone(), 1e-10).unwrap();
        assert!(b.approx_eq(&neg, 1e-14));
    }
}
