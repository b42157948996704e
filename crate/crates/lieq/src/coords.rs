//! Coordinate models for oriented spheres.
//!
//! An oriented hypersphere of S^n or R^n (with points and planes as limiting
//! cases) is a point on the quadric <x,x> = 0 in P^{n+2}. This module holds
//! the three concrete models and the conversions between them:
//!
//! * Euclidean data: points, spheres with signed radius, oriented planes,
//!   plus the single improper point that compactifies R^n;
//! * spherical data: center on S^n plus signed spherical radius, where
//!   positive radius means the normal points toward the center;
//! * quadric coordinates in R^{n+3}.

use nalgebra::DVector;

use crate::config::Tolerances;
use crate::error::{GeomError, Result};
use crate::linalg::{projective_equal, BilinearForm, ProjectivePoint};

/// An oriented sphere-like object of R^n. Radii are signed: positive radius
/// means the orientation normal points into the ball (toward the center).
#[derive(Debug, Clone, PartialEq)]
pub enum EuclideanSphereObject {
    ProperPoint { point: DVector<f64> },
    Sphere { center: DVector<f64>, signed_radius: f64 },
    Plane { unit_normal: DVector<f64>, offset: f64 },
    ImproperPoint { n: usize },
}

impl EuclideanSphereObject {
    pub fn point(point: DVector<f64>) -> Self {
        EuclideanSphereObject::ProperPoint { point }
    }

    /// Zero radius collapses to the center point.
    pub fn sphere(center: DVector<f64>, signed_radius: f64) -> Self {
        if signed_radius == 0.0 {
            EuclideanSphereObject::ProperPoint { point: center }
        } else {
            EuclideanSphereObject::Sphere { center, signed_radius }
        }
    }

    /// The normal is normalized here; a zero normal has no plane.
    pub fn plane(normal: DVector<f64>, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if len == 0.0 {
            return Err(GeomError::ZeroVector);
        }
        Ok(EuclideanSphereObject::Plane { unit_normal: normal / len, offset })
    }

    pub fn improper(n: usize) -> Self {
        EuclideanSphereObject::ImproperPoint { n }
    }

    pub fn n(&self) -> usize {
        match self {
            EuclideanSphereObject::ProperPoint { point } => point.len(),
            EuclideanSphereObject::Sphere { center, .. } => center.len(),
            EuclideanSphereObject::Plane { unit_normal, .. } => unit_normal.len(),
            EuclideanSphereObject::ImproperPoint { n } => *n,
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        use EuclideanSphereObject::*;
        match (self, other) {
            (ProperPoint { point: a }, ProperPoint { point: b }) => (a - b).norm() <= tol,
            (
                Sphere { center: a, signed_radius: ra },
                Sphere { center: b, signed_radius: rb },
            ) => (a - b).norm() <= tol && (ra - rb).abs() <= tol,
            (
                Plane { unit_normal: a, offset: ha },
                Plane { unit_normal: b, offset: hb },
            ) => (a - b).norm() <= tol && (ha - hb).abs() <= tol,
            (ImproperPoint { n: a }, ImproperPoint { n: b }) => a == b,
            _ => false,
        }
    }
}

/// An oriented sphere of S^n: unit center and signed spherical radius in
/// (-pi, pi). Radius pi/2 is a great sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSphere {
    pub center: DVector<f64>,
    pub signed_radius: f64,
}

impl SphericalSphere {
    pub fn new(center: DVector<f64>, signed_radius: f64) -> Result<Self> {
        let len = center.norm();
        if (len - 1.0).abs() > 1e-12 {
            return Err(GeomError::InvalidInput(format!(
                "spherical center must be unit, |p| = {len}"
            )));
        }
        if !(-std::f64::consts::PI..std::f64::consts::PI).contains(&signed_radius)
            || !signed_radius.is_finite()
        {
            return Err(GeomError::InvalidInput(format!(
                "spherical radius {signed_radius} outside (-pi, pi)"
            )));
        }
        Ok(SphericalSphere { center: center / len, signed_radius })
    }

    pub fn n(&self) -> usize {
        self.center.len() - 1
    }

    /// Same oriented sphere test, tolerant of the antipodal-center
    /// representation (p, rho) ~ (-p, rho - sign(rho) * pi).
    pub fn same_sphere(&self, other: &Self, tol: f64) -> bool {
        let a = spherical_to_lie(self).expect("valid sphere");
        let b = spherical_to_lie(other).expect("valid sphere");
        a.approx_eq(&b, tol)
    }
}

/// Homogeneous coordinates of an oriented sphere on the quadric.
#[derive(Debug, Clone)]
pub struct LieCoord {
    x: DVector<f64>,
    n: usize,
}

impl LieCoord {
    /// Accepts any representative whose quadric residual is below `tol`
    /// relative to |x|^2.
    pub fn with_tol(x: DVector<f64>, tol: f64) -> Result<Self> {
        if x.len() < 4 {
            return Err(GeomError::DimensionMismatch { expected: 4, got: x.len() });
        }
        let n = x.len() - 3;
        let e = x.norm_squared();
        if e == 0.0 {
            return Err(GeomError::ZeroVector);
        }
        let q = BilinearForm::lie(n).norm2(&x);
        let residual = q.abs() / e;
        if residual > tol {
            return Err(GeomError::NotOnQuadric { residual, tol });
        }
        Ok(LieCoord { x, n })
    }

    pub fn new(x: DVector<f64>) -> Result<Self> {
        Self::with_tol(x, Tolerances::default().quadric)
    }

    /// For coordinates produced by exact constructions; only debug builds
    /// re-check the quadric residual.
    pub(crate) fn new_unchecked(x: DVector<f64>, n: usize) -> Self {
        debug_assert_eq!(x.len(), n + 3);
        debug_assert!(
            BilinearForm::lie(n).norm2(&x).abs() <= 1e-7 * x.norm_squared(),
            "constructed point far from the quadric"
        );
        LieCoord { x, n }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 3
    }

    pub fn projective(&self) -> ProjectivePoint {
        ProjectivePoint::new(self.x.clone()).expect("nonzero by construction")
    }

    /// Scale-fixed representative: the first of (x1 + x2, x_{n+3}, x1) that is
    /// nonzero relative to |x| is set to 1. Every quadric point matches one of
    /// the three cases.
    pub fn canonicalized(&self) -> DVector<f64> {
        let x = &self.x;
        let scale = x.norm();
        let m = self.n + 2;
        let s = x[0] + x[1];
        let pivot = if s.abs() > 1e-12 * scale {
            s
        } else if x[m].abs() > 1e-12 * scale {
            x[m]
        } else {
            x[0]
        };
        x / pivot
    }

    pub fn approx_eq(&self, other: &LieCoord, tol: f64) -> bool {
        self.n == other.n && projective_equal(&self.projective(), &other.projective(), tol)
    }

    pub fn quadric_residual(&self) -> f64 {
        BilinearForm::lie(self.n).norm2(&self.x).abs() / self.x.norm_squared()
    }
}

/// Inverse stereographic projection R^n -> S^n minus the south pole; the
/// origin maps to the north pole (1, 0, ..., 0).
pub fn stereographic(u: &DVector<f64>) -> DVector<f64> {
    let s = 1.0 + u.norm_squared();
    let mut x = DVector::zeros(u.len() + 1);
    x[0] = 2.0 / s - 1.0;
    for i in 0..u.len() {
        x[i + 1] = 2.0 * u[i] / s;
    }
    x
}

/// Projection S^n -> R^n from the south pole (-1, 0, ..., 0); the pole itself
/// has no image.
pub fn stereographic_inverse(x: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
    let len = x.norm();
    if (len - 1.0).abs() > 1e-8 {
        return Err(GeomError::InvalidInput(format!(
            "not a unit vector: |x| = {len}"
        )));
    }
    let d = 1.0 + x[0] / len;
    if d <= tol {
        return Err(GeomError::Precondition(
            "south pole has no stereographic image".into(),
        ));
    }
    Ok(DVector::from_fn(x.len() - 1, |i, _| x[i + 1] / len / d))
}

/// Quadric coordinates of a Euclidean object. The representative follows the
/// affine chart x1 + x2 = 1 except for planes and the improper point, where
/// that combination vanishes identically.
pub fn euclidean_to_lie(obj: &EuclideanSphereObject) -> LieCoord {
    let n = obj.n();
    let mut x = DVector::zeros(n + 3);
    match obj {
        EuclideanSphereObject::ProperPoint { point } => {
            let uu = point.norm_squared();
            x[0] = (1.0 + uu) / 2.0;
            x[1] = (1.0 - uu) / 2.0;
            for i in 0..n {
                x[i + 2] = point[i];
            }
        }
        EuclideanSphereObject::Sphere { center, signed_radius } => {
            let pp = center.norm_squared();
            let r2 = signed_radius * signed_radius;
            x[0] = (1.0 + pp - r2) / 2.0;
            x[1] = (1.0 - pp + r2) / 2.0;
            for i in 0..n {
                x[i + 2] = center[i];
            }
            x[n + 2] = *signed_radius;
        }
        EuclideanSphereObject::Plane { unit_normal, offset } => {
            x[0] = *offset;
            x[1] = -offset;
            for i in 0..n {
                x[i + 2] = unit_normal[i];
            }
            x[n + 2] = 1.0;
        }
        EuclideanSphereObject::ImproperPoint { .. } => {
            x[0] = 1.0;
            x[1] = -1.0;
        }
    }
    LieCoord::new_unchecked(x, n)
}

/// Euclidean object behind a quadric point. The case split keys on x1 + x2
/// (zero for planes and the improper point) and then on the last coordinate.
pub fn lie_to_euclidean(lc: &LieCoord, tols: &Tolerances) -> EuclideanSphereObject {
    let n = lc.n();
    let m = n + 2;
    let x = lc.coords();
    let scale = x.norm();
    let s = x[0] + x[1];
    if s.abs() > tols.quadric.sqrt() * scale {
        // Affine chart: scale to x1 + x2 = 1.
        let y = x / s;
        let center = DVector::from_fn(n, |i, _| y[i + 2]);
        let r = y[m];
        if r.abs() <= 1e-12 * (1.0 + center.norm()) {
            EuclideanSphereObject::ProperPoint { point: center }
        } else {
            EuclideanSphereObject::Sphere { center, signed_radius: r }
        }
    } else if x[m].abs() > tols.quadric.sqrt() * scale {
        let y = x / x[m];
        let normal = DVector::from_fn(n, |i, _| y[i + 2]);
        let len = normal.norm();
        EuclideanSphereObject::Plane { unit_normal: normal / len, offset: y[0] }
    } else {
        EuclideanSphereObject::ImproperPoint { n }
    }
}

/// Quadric coordinates (cos rho, p, sin rho) of an oriented sphere of S^n.
pub fn spherical_to_lie(s: &SphericalSphere) -> Result<LieCoord> {
    let n = s.n();
    let mut x = DVector::zeros(n + 3);
    x[0] = s.signed_radius.cos();
    for i in 0..=n {
        x[i + 1] = s.center[i];
    }
    x[n + 2] = s.signed_radius.sin();
    Ok(LieCoord::new_unchecked(x, n))
}

/// Center and signed radius on S^n. The representative is sign-normalized to
/// x1 >= 0 first, so the radius lands in [-pi/2, pi/2] with the center
/// flipped when needed; x1 = 0 yields a great sphere with radius +pi/2.
pub fn lie_to_spherical(lc: &LieCoord, tols: &Tolerances) -> Result<SphericalSphere> {
    let n = lc.n();
    let m = n + 2;
    let scale = lc.coords().norm();
    let mut x = lc.coords().clone();
    if x[0].abs() <= tols.quadric.sqrt() * scale {
        // Great sphere: fix the sign with the last coordinate instead.
        if x[m] < 0.0 {
            x = -x;
        }
    } else if x[0] < 0.0 {
        x = -x;
    }
    // On the quadric, |spatial part|^2 = x1^2 + x_{n+3}^2.
    let lambda = x[0].hypot(x[m]);
    if lambda <= tols.quadric.sqrt() * scale {
        return Err(GeomError::Degenerate(
            "spatial part vanishes; not a sphere of the round model".into(),
        ));
    }
    let center = DVector::from_fn(n + 1, |i, _| x[i + 1] / lambda);
    let rho = x[m].atan2(x[0]);
    SphericalSphere::new(center, rho)
}

/// Representative of the unoriented object in the one-lower projective space
/// R^{n+2} (drop the orientation coordinate). Points are admitted; their
/// representatives are lightlike.
pub fn mobius_representative(obj: &EuclideanSphereObject) -> ProjectivePoint {
    let n = obj.n();
    let mut x = DVector::zeros(n + 2);
    match obj {
        EuclideanSphereObject::ProperPoint { point } => {
            let uu = point.norm_squared();
            x[0] = (1.0 + uu) / 2.0;
            x[1] = (1.0 - uu) / 2.0;
            for i in 0..n {
                x[i + 2] = point[i];
            }
        }
        EuclideanSphereObject::Sphere { center, signed_radius } => {
            let pp = center.norm_squared();
            let r2 = signed_radius * signed_radius;
            x[0] = (1.0 + pp - r2) / 2.0;
            x[1] = (1.0 - pp + r2) / 2.0;
            for i in 0..n {
                x[i + 2] = center[i];
            }
        }
        EuclideanSphereObject::Plane { unit_normal, offset } => {
            x[0] = *offset;
            x[1] = -offset;
            for i in 0..n {
                x[i + 2] = unit_normal[i];
            }
        }
        EuclideanSphereObject::ImproperPoint { .. } => {
            x[0] = 1.0;
            x[1] = -1.0;
        }
    }
    ProjectivePoint::new(x).expect("representative is nonzero")
}

/// Unoriented perpendicular intersection test. Spheres and planes only: a
/// point's representative pairs to zero length, so the angle is undefined.
pub fn mobius_orthogonal(
    a: &EuclideanSphereObject,
    b: &EuclideanSphereObject,
    tol: f64,
) -> Result<bool> {
    if a.n() != b.n() {
        return Err(GeomError::DimensionMismatch { expected: a.n(), got: b.n() });
    }
    let form = BilinearForm::lorentz(a.n());
    let ra = mobius_representative(a);
    let rb = mobius_representative(b);
    for (name, r) in [("first", &ra), ("second", &rb)] {
        let q = form.norm2(r.coords());
        if q <= tol.max(1e-12) * r.coords().norm_squared() {
            return Err(GeomError::Degenerate(format!(
                "{name} object is a point sphere; orthogonality undefined"
            )));
        }
    }
    let pairing = form.apply(ra.coords(), rb.coords());
    Ok(pairing.abs() <= tol * ra.coords().norm() * rb.coords().norm())
}
