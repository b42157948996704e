//! Oriented contact and the lines on the quadric.
//!
//! Two oriented spheres touch with matching normals exactly when their
//! quadric representatives pair to zero, and the projective line joining two
//! such points lies entirely on the quadric. Those lines are the parabolic
//! pencils of spheres sharing a contact element (point plus unit normal);
//! they are the points of the contact-geometry picture and the fibers of the
//! Legendre lifts built downstream.

use std::sync::OnceLock;

use nalgebra::DVector;

use crate::config::Tolerances;
use crate::coords::LieCoord;
use crate::error::{GeomError, Result};
use crate::linalg::{unit, BilinearForm, CausalType};

/// Normalized pairing of two quadric points.
fn unit_pairing(a: &LieCoord, b: &LieCoord) -> f64 {
    let g = BilinearForm::lie(a.n());
    g.apply(&unit(a.coords()), &unit(b.coords()))
}

/// Oriented contact test: first-order tangency with matching orientation.
/// The pairing of unit representatives must vanish within `tol`.
pub fn oriented_contact(a: &LieCoord, b: &LieCoord, tol: f64) -> Result<bool> {
    if a.n() != b.n() {
        return Err(GeomError::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(unit_pairing(a, b).abs() <= tol)
}

/// A projective line on the quadric: the parabolic pencil of all oriented
/// spheres through one contact element.
#[derive(Debug, Clone)]
pub struct PencilLine {
    k1: LieCoord,
    k2: LieCoord,
    canonical: OnceLock<Result<(LieCoord, LieCoord)>>,
}

/// Construct the line through two distinct, contacting quadric points and
/// verify it stays on the quadric at interior parameters.
pub fn line_on_quadric(a: &LieCoord, b: &LieCoord, tols: &Tolerances) -> Result<PencilLine> {
    if a.n() != b.n() {
        return Err(GeomError::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let pairing = unit_pairing(a, b);
    if pairing.abs() > tols.contact {
        return Err(GeomError::NotInContact { pairing });
    }
    if a.approx_eq(b, 1e-10) {
        return Err(GeomError::Degenerate(
            "coincident spheres span no line".into(),
        ));
    }
    let g = BilinearForm::lie(a.n());
    let ua = unit(a.coords());
    let ub = unit(b.coords());
    for t in [0.2, 0.35, 0.5, 0.65, 0.8] {
        let x = &ua * (1.0 - t) + &ub * t;
        let res = g.norm2(&x).abs() / x.norm_squared();
        if res > tols.contact {
            return Err(GeomError::NotOnQuadric { residual: res, tol: tols.contact });
        }
    }
    Ok(PencilLine { k1: a.clone(), k2: b.clone(), canonical: OnceLock::new() })
}

impl PencilLine {
    pub fn n(&self) -> usize {
        self.k1.n()
    }

    pub fn spanning(&self) -> (&LieCoord, &LieCoord) {
        (&self.k1, &self.k2)
    }

    /// The distinguished basis: the pencil's unique point sphere scaled to
    /// (1, p, 0) and its unique great sphere scaled to (0, xi, 1). Each is
    /// the line's intersection with the polar of a timelike axis, so both
    /// exist; near-zero extractions are reported, not normalized away.
    pub fn canonical_basis(&self) -> Result<(LieCoord, LieCoord)> {
        self.canonical
            .get_or_init(|| compute_canonical(&self.k1, &self.k2))
            .clone()
    }

    /// Sphere at pencil parameter `t`: spherical center cos(t) p + sin(t) xi
    /// and signed radius t. Parameter zero is the point sphere.
    pub fn sphere_at(&self, t: f64) -> Result<LieCoord> {
        let (p, g) = self.canonical_basis()?;
        let x = p.coords() * t.cos() + g.coords() * t.sin();
        Ok(LieCoord::new_unchecked(x, self.n()))
    }

    /// Lines are equal when their canonical bases agree projectively.
    pub fn approx_eq(&self, other: &PencilLine, tol: f64) -> Result<bool> {
        if self.n() != other.n() {
            return Ok(false);
        }
        let (p1, g1) = self.canonical_basis()?;
        let (p2, g2) = other.canonical_basis()?;
        Ok(p1.approx_eq(&p2, tol) && g1.approx_eq(&g2, tol))
    }

    pub(crate) fn from_canonical(point: LieCoord, great: LieCoord) -> Self {
        let line = PencilLine {
            k1: point.clone(),
            k2: great.clone(),
            canonical: OnceLock::new(),
        };
        let _ = line.canonical.set(Ok((point, great)));
        line
    }
}

fn compute_canonical(k1: &LieCoord, k2: &LieCoord) -> Result<(LieCoord, LieCoord)> {
    let n = k1.n();
    let m = n + 2;
    let a = unit(k1.coords());
    let b = unit(k2.coords());

    // The line's intersection with x_{n+3} = 0; the last coordinate cancels
    // exactly.
    let point_raw = &a * b[m] - &b * a[m];
    // The intersection with x_1 = 0.
    let great_raw = &a * b[0] - &b * a[0];
    if point_raw.norm() < 1e-8 || great_raw.norm() < 1e-8 {
        return Err(GeomError::Degenerate(format!(
            "ill-conditioned pencil basis: point sphere scale {:.3e}, great sphere scale {:.3e}",
            point_raw.norm(),
            great_raw.norm()
        )));
    }
    if point_raw[0].abs() < 1e-10 * point_raw.norm()
        || great_raw[m].abs() < 1e-10 * great_raw.norm()
    {
        return Err(GeomError::Degenerate(
            "pencil basis normalization pivot vanished".into(),
        ));
    }

    let mut p = DVector::from_fn(n + 1, |i, _| point_raw[i + 1] / point_raw[0]);
    p /= p.norm();
    let mut xi = DVector::from_fn(n + 1, |i, _| great_raw[i + 1] / great_raw[m]);
    // The contact pairing of the two canonical members forces p . xi = 0;
    // re-impose it exactly.
    let c = p.dot(&xi);
    xi -= &p * c;
    xi /= xi.norm();

    let mut kp = DVector::zeros(n + 3);
    kp[0] = 1.0;
    for i in 0..=n {
        kp[i + 1] = p[i];
    }
    let mut kg = DVector::zeros(n + 3);
    for i in 0..=n {
        kg[i + 1] = xi[i];
    }
    kg[m] = 1.0;
    Ok((LieCoord::new_unchecked(kp, n), LieCoord::new_unchecked(kg, n)))
}

/// A point of the unit tangent bundle of S^n: base point and unit tangent,
/// stored as two orthonormal vectors of R^{n+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactElement {
    p: DVector<f64>,
    xi: DVector<f64>,
}

impl ContactElement {
    pub fn new(p: DVector<f64>, xi: DVector<f64>) -> Result<Self> {
        if p.len() != xi.len() {
            return Err(GeomError::DimensionMismatch { expected: p.len(), got: xi.len() });
        }
        if (p.norm() - 1.0).abs() > 1e-12 || (xi.norm() - 1.0).abs() > 1e-12 {
            return Err(GeomError::InvalidInput(
                "contact element vectors must be unit length".into(),
            ));
        }
        if p.dot(&xi).abs() > 1e-12 {
            return Err(GeomError::InvalidInput(format!(
                "contact element not orthogonal: p . xi = {:.3e}",
                p.dot(&xi)
            )));
        }
        Ok(ContactElement { p, xi })
    }

    pub fn base(&self) -> &DVector<f64> {
        &self.p
    }

    pub fn normal(&self) -> &DVector<f64> {
        &self.xi
    }

    pub fn n(&self) -> usize {
        self.p.len() - 1
    }
}

/// Read the contact element off a pencil's canonical basis.
pub fn pencil_to_contact_element(line: &PencilLine) -> Result<ContactElement> {
    let (kp, kg) = line.canonical_basis()?;
    let n = line.n();
    let p = DVector::from_fn(n + 1, |i, _| kp.coords()[i + 1]);
    let xi = DVector::from_fn(n + 1, |i, _| kg.coords()[i + 1]);
    ContactElement::new(p, xi)
}

/// Span the pencil of a contact element directly from its point sphere and
/// great sphere.
pub fn contact_element_to_pencil(ce: &ContactElement) -> PencilLine {
    let n = ce.n();
    let mut kp = DVector::zeros(n + 3);
    kp[0] = 1.0;
    for i in 0..=n {
        kp[i + 1] = ce.p[i];
    }
    let mut kg = DVector::zeros(n + 3);
    for i in 0..=n {
        kg[i + 1] = ce.xi[i];
    }
    kg[n + 2] = 1.0;
    PencilLine::from_canonical(
        LieCoord::new_unchecked(kp, n),
        LieCoord::new_unchecked(kg, n),
    )
}

/// Every timelike direction's polar hyperplane meets a pencil line exactly
/// once; used as a structural sanity check on constructed lines.
pub fn meets_polar_once(line: &PencilLine, z: &DVector<f64>, tol: f64) -> Result<bool> {
    let g = BilinearForm::lie(line.n());
    if g.causal_type(z, 1e-12)? != CausalType::Timelike {
        return Err(GeomError::Precondition("axis must be timelike".into()));
    }
    let (a, b) = line.spanning();
    let ca = g.apply(&unit(a.coords()), &unit(z));
    let cb = g.apply(&unit(b.coords()), &unit(z));
    // One projective root of cos(t) ca + sin(t) cb unless both vanish.
    Ok(ca.hypot(cb) > tol)
}
