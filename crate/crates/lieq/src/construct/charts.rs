//! Analytic charts behind the generators: hypersphere coordinates, product
//! tori, cylinders, revolutions, tubes, cones, and the extraction of a
//! Euclidean chart from a transformed lift.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::legendre::{contact_jet_from_lift, ChartJet, LiftChart, SurfaceChart};

/// Point of S^k and its Jacobian in hyperspherical angles: the first k-1
/// angles are polar (interior of (0, pi)), the last is azimuthal.
pub fn hypersphere_jet(theta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let k = theta.len();
    assert!(k >= 1, "need at least one angle");
    if k == 1 {
        let (s, c) = theta[0].sin_cos();
        return (
            DVector::from_row_slice(&[c, s]),
            DMatrix::from_column_slice(2, 1, &[-s, c]),
        );
    }
    let (w, jw) = hypersphere_jet(&theta[1..]);
    let (s, c) = theta[0].sin_cos();
    let mut omega = DVector::zeros(k + 1);
    omega[0] = c;
    for i in 0..k {
        omega[i + 1] = s * w[i];
    }
    let mut j = DMatrix::zeros(k + 1, k);
    j[(0, 0)] = -s;
    for i in 0..k {
        j[(i + 1, 0)] = c * w[i];
    }
    for m in 1..k {
        for i in 0..k {
            j[(i + 1, m)] = s * jw[(i, m - 1)];
        }
    }
    (omega, j)
}

/// Grid axes for a k-sphere patch: polar angles bounded away from the poles,
/// azimuthal angle periodic.
pub fn sphere_axes(k: usize, bounded_nodes: usize, periodic_nodes: usize) -> SphereAxes {
    let margin = 0.35;
    let mut dims = Vec::with_capacity(k);
    let mut periodic = Vec::with_capacity(k);
    let mut ranges = Vec::with_capacity(k);
    for _ in 0..k.saturating_sub(1) {
        dims.push(bounded_nodes);
        periodic.push(false);
        ranges.push((margin, std::f64::consts::PI - margin));
    }
    dims.push(periodic_nodes);
    periodic.push(true);
    ranges.push((0.0, std::f64::consts::TAU));
    SphereAxes { dims, periodic, ranges }
}

pub struct SphereAxes {
    pub dims: Vec<usize>,
    pub periodic: Vec<bool>,
    pub ranges: Vec<(f64, f64)>,
}

/// S^q(r) x S^p(s) inside S^{p+q+1}: the first q parameters sweep the
/// q-sphere factor, the rest the p-sphere factor. Principal values s/r
/// (multiplicity q) and -r/s (multiplicity p).
pub struct ProductSpheresChart {
    pub p: usize,
    pub q: usize,
    pub r: f64,
    pub s: f64,
}

impl SurfaceChart for ProductSpheresChart {
    fn params(&self) -> usize {
        self.p + self.q
    }

    fn ambient(&self) -> usize {
        self.p + self.q + 2
    }

    fn jet(&self, u: &[f64]) -> ChartJet {
        let (q, p) = (self.q, self.p);
        let (wq, jq) = hypersphere_jet(&u[..q]);
        let (wp, jp) = hypersphere_jet(&u[q..]);
        let dim = p + q + 2;
        let d = p + q;
        let mut f = DVector::zeros(dim);
        let mut xi = DVector::zeros(dim);
        for i in 0..=q {
            f[i] = self.r * wq[i];
            xi[i] = -self.s * wq[i];
        }
        for i in 0..=p {
            f[q + 1 + i] = self.s * wp[i];
            xi[q + 1 + i] = self.r * wp[i];
        }
        let mut jf = DMatrix::zeros(dim, d);
        let mut jxi = DMatrix::zeros(dim, d);
        for m in 0..q {
            for i in 0..=q {
                jf[(i, m)] = self.r * jq[(i, m)];
                jxi[(i, m)] = -self.s * jq[(i, m)];
            }
        }
        for m in 0..p {
            for i in 0..=p {
                jf[(q + 1 + i, q + m)] = self.s * jp[(i, m)];
                jxi[(q + 1 + i, q + m)] = self.r * jp[(i, m)];
            }
        }
        ChartJet { f, xi, jf, jxi }
    }
}

/// Torus of revolution in R^3 with outward normal; u sweeps the axis circle,
/// v the profile circle. Principal values cos v / (a + b cos v) and 1/b.
pub struct TorusChart {
    pub a: f64,
    pub b: f64,
}

impl SurfaceChart for TorusChart {
    fn params(&self) -> usize {
        2
    }

    fn ambient(&self) -> usize {
        3
    }

    fn jet(&self, u: &[f64]) -> ChartJet {
        let (su, cu) = u[0].sin_cos();
        let (sv, cv) = u[1].sin_cos();
        let r = self.a + self.b * cv;
        let f = DVector::from_row_slice(&[r * cu, r * su, self.b * sv]);
        let xi = DVector::from_row_slice(&[cv * cu, cv * su, sv]);
        let jf = DMatrix::from_columns(&[
            DVector::from_row_slice(&[-r * su, r * cu, 0.0]),
            DVector::from_row_slice(&[-self.b * sv * cu, -self.b * sv * su, self.b * cv]),
        ]);
        let jxi = DMatrix::from_columns(&[
            DVector::from_row_slice(&[-cv * su, cv * cu, 0.0]),
            DVector::from_row_slice(&[-sv * cu, -sv * su, cv]),
        ]);
        ChartJet { f, xi, jf, jxi }
    }
}

/// Round sphere patch of radius `radius` about `center` in R^{k+1}, outward
/// normal; the single curvature sphere is the sphere itself.
pub struct SpherePatchChart {
    pub center: DVector<f64>,
    pub radius: f64,
}

impl SurfaceChart for SpherePatchChart {
    fn params(&self) -> usize {
        self.center.len() - 1
    }

    fn ambient(&self) -> usize {
        self.center.len()
    }

    fn jet(&self, u: &[f64]) -> ChartJet {
        let (w, jw) = hypersphere_jet(u);
        let f = &self.center + &w * self.radius;
        let xi = w;
        let jf = &jw * self.radius;
        ChartJet { f, xi, jf: jf.clone(), jxi: jw }
    }
}

/// Product with a flat factor: base in R^j, output in R^{j+m}. The extra
/// parameters translate along the new coordinates; the normal gains zeros.
pub struct CylinderChart {
    pub base: Arc<dyn SurfaceChart>,
    pub m: usize,
}

impl SurfaceChart for CylinderChart {
    fn params(&self) -> usize {
        self.base.params() + self.m
    }

    fn ambient(&self) -> usize {
        self.base.ambient() + self.m
    }

    fn jet(&self, u: &[f64]) -> ChartJet {
        let db = self.base.params();
        let jb = self.base.jet(&u[..db]);
        let amb = self.base.ambient();
        let dim = amb + self.m;
        let d = db + self.m;
        let mut f = DVector::zeros(dim);
        let mut xi = DVector::zeros(dim);
        for i in 0..amb {
            f[i] = jb.f[i];
            xi[i] = jb.xi[i];
        }
        for w in 0..self.m {
            f[amb + w] = u[db + w];
        }
        let mut jf = DMatrix::zeros(dim, d);
        let mut jxi = DMatrix::zeros(dim, d);
        for k in 0..db {
            for i in 0..amb {
                jf[(i, k)] = jb.jf[(i, k)];
                jxi[(i, k)] = jb.jxi[(i, k)];
            }
        }
        for w in 0..self.m {
            jf[(amb + w, db + w)] = 1.0;
        }
        ChartJet { f, xi, jf, jxi }
    }
}

/// Rotational sweep into one more dimension. The base must keep its last
/// coordinate positive; that coordinate becomes the distance from the
/// codimension-two axis {x_j = x_{j+1} = 0}.
pub struct RevolveChart {
    pub base: Arc<dyn SurfaceChart>,
}

impl SurfaceChart for RevolveChart {
    fn params(&self) -> usize {
        self.base.params() + 1
    }

    fn ambient(&self) -> usize {
        self.base.ambient() + 1
    }

    fn jet(&self, u: &[f64]) -> ChartJet {
        let db = self.base.params();
        let jb = self.base.jet(&u[..db]);
        let amb = self.base.ambient();
        let (sp, cp) = u[db].sin_cos();
        let last = amb - 1;
        let rot = |v: &DVector<f64>| {
            let mut out = DVector::zeros(amb + 1);
            for i in 0..last {
                out[i] = v[i];
            }
            out[last] = v[last] * cp;
            out[amb] = v[last] * sp;
            out
        };
        let f = rot(&jb.f);
        let xi = rot(&jb.xi);
        let d = db + 1;
        let mut jf = DMatrix::zeros(amb + 1, d);
        let mut jxi = DMatrix::zeros(amb + 1, d);
        for k in 0..db {
            let fc = rot(&jb.jf.column(k).clone_owned());
            let xc = rot(&jb.jxi.column(k).clone_owned());
            for i in 0..=amb {
                jf[(i, k)] = fc[i];
                jxi[(i, k)] = xc[i];
            }
        }
        jf[(last, db)] = -jb.f[last] * sp;
        jf[(amb, db)] = jb.f[last] * cp;
        jxi[(last, db)] = -jb.xi[last] * sp;
        jxi[(amb, db)] = jb.xi[last] * cp;
        ChartJet { f, xi, jf, jxi }
    }
}

/// Tube of radius `eps` around a hypersurface of R^j viewed inside R^{j+m}:
/// the normal sphere at each base point is spanned by the base normal and
/// the m new coordinate directions. The trailing m parameters are the
/// normal-sphere angles.
pub struct TubeChart {
    pub base: Arc<dyn SurfaceChart>,
    pub eps: f64,
    pub m: usize,
}

impl SurfaceChart for TubeChart {
    fn params(&self) -> usize {
        self.base.params() + self.m
    }

    fn ambient(&self) -> usize {
        self.base.ambient() + self.m
    }

    fn jet(&self, u: &[f64]) -> ChartJet {
        let db = self.base.params();
        let jb = self.base.jet(&u[..db]);
        let amb = self.base.ambient();
        let dim = amb + self.m;
        let d = db + self.m;
        // w on S^m: first component weights the base normal, the rest the
        // flat normal directions.
        let (w, jw) = hypersphere_jet(&u[db..]);
        let mut f = DVector::zeros(dim);
        let mut xi = DVector::zeros(dim);
        for i in 0..amb {
            f[i] = jb.f[i] + self.eps * w[0] * jb.xi[i];
            xi[i] = w[0] * jb.xi[i];
        }
        for t in 0..self.m {
            f[amb + t] = self.eps * w[t + 1];
            xi[amb + t] = w[t + 1];
        }
        let mut jf = DMatrix::zeros(dim, d);
        let mut jxi = DMatrix::zeros(dim, d);
        for k in 0..db {
            for i in 0..amb {
                jf[(i, k)] = jb.jf[(i, k)] + self.eps * w[0] * jb.jxi[(i, k)];
                jxi[(i, k)] = w[0] * jb.jxi[(i, k)];
            }
        }
        for a in 0..self.m {
            let col = d - self.m + a;
            for i in 0..amb {
                jf[(i, col)] = self.eps * jw[(0, a)] * jb.xi[i];
                jxi[(i, col)] = jw[(0, a)] * jb.xi[i];
            }
            for t in 0..self.m {
                jf[(amb + t, col)] = self.eps * jw[(t + 1, a)];
                jxi[(amb + t, col)] = jw[(t + 1, a)];
            }
        }
        ChartJet { f, xi, jf, jxi }
    }
}

/// Tube of spherical radius `eps` around a hypersurface of S^j viewed inside
/// S^{j+m}: the sweep follows normal great circles, cos(eps) f + sin(eps)
/// zeta with zeta on the unit normal sphere.
pub struct SphericalTubeChart {
    pub base: Arc<dyn SurfaceChart>,
    pub eps: f64,
    pub m: usize,
}

impl SurfaceChart for SphericalTubeChart {
    fn params(&self) -> usize {
        self.base.params() + self.m
    }

    fn ambient(&self) -> usize {
        self.base.ambient() + self.m
    }

    fn jet(&self, u: &[f64]) -> ChartJet {
        let db = self.base.params();
        let jb = self.base.jet(&u[..db]);
        let amb = self.base.ambient();
        let dim = amb + self.m;
        let d = db + self.m;
        let (se, ce) = self.eps.sin_cos();
        let (w, jw) = hypersphere_jet(&u[db..]);
        let mut f = DVector::zeros(dim);
        let mut xi = DVector::zeros(dim);
        for i in 0..amb {
            let zeta = w[0] * jb.xi[i];
            f[i] = ce * jb.f[i] + se * zeta;
            xi[i] = -se * jb.f[i] + ce * zeta;
        }
        for t in 0..self.m {
            f[amb + t] = se * w[t + 1];
            xi[amb + t] = ce * w[t + 1];
        }
        let mut jf = DMatrix::zeros(dim, d);
        let mut jxi = DMatrix::zeros(dim, d);
        for k in 0..db {
            for i in 0..amb {
                let dzeta = w[0] * jb.jxi[(i, k)];
                jf[(i, k)] = ce * jb.jf[(i, k)] + se * dzeta;
                jxi[(i, k)] = -se * jb.jf[(i, k)] + ce * dzeta;
            }
        }
        for a in 0..self.m {
            let col = db + a;
            for i in 0..amb {
                let dzeta = jw[(0, a)] * jb.xi[i];
                jf[(i, col)] = se * dzeta;
                jxi[(i, col)] = ce * dzeta;
            }
            for t in 0..self.m {
                jf[(amb + t, col)] = se * jw[(t + 1, a)];
                jxi[(amb + t, col)] = ce * jw[(t + 1, a)];
            }
        }
        ChartJet { f, xi, jf, jxi }
    }
}

/// Radial cone over a hypersurface of the unit sphere; the last parameter is
/// the distance from the vertex. The normal is carried unchanged along rays.
pub struct ConeChart {
    pub base: Arc<dyn SurfaceChart>,
}

impl SurfaceChart for ConeChart {
    fn params(&self) -> usize {
        self.base.params() + 1
    }

    fn ambient(&self) -> usize {
        self.base.ambient()
    }

    fn jet(&self, u: &[f64]) -> ChartJet {
        let db = self.base.params();
        let jb = self.base.jet(&u[..db]);
        let amb = self.base.ambient();
        let t = u[db];
        let f = &jb.f * t;
        let xi = jb.xi.clone();
        let d = db + 1;
        let mut jf = DMatrix::zeros(amb, d);
        let mut jxi = DMatrix::zeros(amb, d);
        for k in 0..db {
            for i in 0..amb {
                jf[(i, k)] = t * jb.jf[(i, k)];
                jxi[(i, k)] = jb.jxi[(i, k)];
            }
        }
        for i in 0..amb {
            jf[(i, db)] = jb.f[i];
        }
        ChartJet { f, xi, jf, jxi }
    }
}

/// Euclidean chart recovered pointwise from a lift: pencil extraction
/// followed by stereographic projection, with the chain rule carried through
/// both steps. The lift must stay clear of the projection pole on its
/// domain; generator constructors check this on the grid before wrapping.
pub struct EuclideanFromLiftChart {
    pub lift: Arc<dyn LiftChart>,
}

impl SurfaceChart for EuclideanFromLiftChart {
    fn params(&self) -> usize {
        self.lift.params()
    }

    fn ambient(&self) -> usize {
        self.lift.n()
    }

    fn jet(&self, u: &[f64]) -> ChartJet {
        let lj = self.lift.jet(u);
        let cj = contact_jet_from_lift(&lj)
            .expect("lift admits pointwise extraction on its domain");
        let n = self.lift.n();
        let d = self.lift.params();
        let denom = 1.0 + cj.f[0];
        assert!(
            denom.abs() > 1e-12,
            "lift meets the stereographic pole inside its domain"
        );
        let mut f = DVector::zeros(n);
        for i in 0..n {
            f[i] = cj.f[i + 1] / denom;
        }
        let mut xi = DVector::zeros(n);
        for i in 0..n {
            xi[i] = cj.xi[i + 1] - cj.xi[0] * f[i];
        }
        let mut jf = DMatrix::zeros(n, d);
        let mut jxi = DMatrix::zeros(n, d);
        for k in 0..d {
            let d0 = cj.jf[(0, k)];
            for i in 0..n {
                let dfi = (cj.jf[(i + 1, k)] - f[i] * d0) / denom;
                jf[(i, k)] = dfi;
                jxi[(i, k)] = cj.jxi[(i + 1, k)] - cj.jxi[(0, k)] * f[i] - cj.xi[0] * dfi;
            }
        }
        ChartJet { f, xi, jf, jxi }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::Grid;

    /// Small circle in S^2 at polar angle rho, with its tangent normal.
    struct SmallCircle {
        rho: f64,
    }

    impl SurfaceChart for SmallCircle {
        fn params(&self) -> usize {
            1
        }
        fn ambient(&self) -> usize {
            3
        }
        fn jet(&self, u: &[f64]) -> ChartJet {
            let (sr, cr) = (self.rho.sin(), self.rho.cos());
            let (s, c) = u[0].sin_cos();
            let f = DVector::from_row_slice(&[sr * c, sr * s, cr]);
            let xi = DVector::from_row_slice(&[cr * c, cr * s, -sr]);
            let jf = DMatrix::from_column_slice(3, 1, &[-sr * s, sr * c, 0.0]);
            let jxi = DMatrix::from_column_slice(3, 1, &[-cr * s, cr * c, 0.0]);
            ChartJet { f, xi, jf, jxi }
        }
    }

    fn fd_check(chart: &dyn SurfaceChart, u: &[f64]) {
        let jet = chart.jet(u);
        let d = chart.params();
        let amb = jet.f.len();
        assert!((jet.xi.norm() - 1.0).abs() < 1e-12, "normal not unit");
        let h = 1e-6;
        for k in 0..d {
            let mut up = u.to_vec();
            let mut um = u.to_vec();
            up[k] += h;
            um[k] -= h;
            let jp = chart.jet(&up);
            let jm = chart.jet(&um);
            for i in 0..amb {
                let df = (jp.f[i] - jm.f[i]) / (2.0 * h);
                let dx = (jp.xi[i] - jm.xi[i]) / (2.0 * h);
                assert!(
                    (df - jet.jf[(i, k)]).abs() < 1e-7,
                    "jf mismatch at ({i},{k}): {df} vs {}",
                    jet.jf[(i, k)]
                );
                assert!(
                    (dx - jet.jxi[(i, k)]).abs() < 1e-7,
                    "jxi mismatch at ({i},{k}): {dx} vs {}",
                    jet.jxi[(i, k)]
                );
            }
        }
        // Normal orthogonal to the tangent space.
        for k in 0..d {
            let dot: f64 = (0..amb).map(|i| jet.xi[i] * jet.jf[(i, k)]).sum();
            assert!(dot.abs() < 1e-10, "normal not orthogonal to column {k}");
        }
    }

    #[test]
    fn hypersphere_jet_matches_differences() {
        for k in 1..=4 {
            let theta: Vec<f64> = (0..k).map(|i| 0.6 + 0.31 * i as f64).collect();
            let (w, jw) = hypersphere_jet(&theta);
            assert!((w.norm() - 1.0).abs() < 1e-14);
            let h = 1e-6;
            for m in 0..k {
                let mut tp = theta.clone();
                let mut tm = theta.clone();
                tp[m] += h;
                tm[m] -= h;
                let (wp, _) = hypersphere_jet(&tp);
                let (wm, _) = hypersphere_jet(&tm);
                for i in 0..=k {
                    let fd = (wp[i] - wm[i]) / (2.0 * h);
                    assert!((fd - jw[(i, m)]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn generator_charts_have_exact_jacobians() {
        let torus = TorusChart { a: 2.0, b: 1.0 };
        fd_check(&torus, &[0.7, 1.1]);

        let prod = ProductSpheresChart {
            p: 2,
            q: 1,
            r: 0.6,
            s: 0.8,
        };
        fd_check(&prod, &[0.9, 1.2, 2.3]);
        let jet = prod.jet(&[0.9, 1.2, 2.3]);
        assert!((jet.f.norm() - 1.0).abs() < 1e-12);
        assert!(jet.f.dot(&jet.xi).abs() < 1e-12);

        let cyl = CylinderChart { base: Arc::new(TorusChart { a: 2.0, b: 1.0 }), m: 2 };
        fd_check(&cyl, &[0.7, 1.1, 0.3, -0.4]);

        let rev = RevolveChart { base: Arc::new(TorusChart { a: 2.0, b: 0.5 }) };
        fd_check(&rev, &[0.7, 1.1, 2.0]);

        let tube = TubeChart { base: Arc::new(TorusChart { a: 2.0, b: 1.0 }), eps: 0.25, m: 1 };
        fd_check(&tube, &[0.7, 1.1, 0.9]);
        let tj = tube.jet(&[0.7, 1.1, 0.9]);
        // Distance from the base surface is exactly eps.
        let base = TorusChart { a: 2.0, b: 1.0 }.jet(&[0.7, 1.1]);
        let mut dist2 = 0.0;
        for i in 0..3 {
            dist2 += (tj.f[i] - base.f[i]).powi(2);
        }
        dist2 += tj.f[3] * tj.f[3];
        assert!((dist2.sqrt() - 0.25).abs() < 1e-12);

        let stube = SphericalTubeChart { base: Arc::new(SmallCircle { rho: 0.8 }), eps: 0.3, m: 1 };
        fd_check(&stube, &[0.9, 1.3]);
        let sj = stube.jet(&[0.9, 1.3]);
        assert!((sj.f.norm() - 1.0).abs() < 1e-12, "spherical tube leaves the sphere");
        // Spherical distance from the base point is exactly eps.
        let bj = SmallCircle { rho: 0.8 }.jet(&[0.9]);
        let mut dot = 0.0;
        for i in 0..3 {
            dot += sj.f[i] * bj.f[i];
        }
        assert!((dot.acos() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn cone_normal_is_constant_along_rays() {
        let cone = ConeChart { base: Arc::new(SmallCircle { rho: 0.8 }) };
        fd_check(&cone, &[1.3, 1.7]);
        let j1 = cone.jet(&[1.3, 0.5]);
        let j2 = cone.jet(&[1.3, 2.5]);
        assert!((&j1.xi - &j2.xi).norm() < 1e-14);
        // Rays pass through the origin.
        assert!((&j1.f / 0.5 - &j2.f / 2.5).norm() < 1e-13);
    }

    #[test]
    fn euclidean_chart_from_canonical_lift_round_trips() {
        use crate::legendre::{legendre_lift, SampledHypersurface};
        let torus = Arc::new(TorusChart { a: 2.0, b: 1.0 });
        let grid = Grid::periodic_angles(vec![16, 16]);
        let h = SampledHypersurface::from_euclidean_chart(torus.clone(), grid).unwrap();
        let map = legendre_lift(&h).unwrap();
        let lift_chart = map.chart().unwrap().clone();
        let recovered = EuclideanFromLiftChart { lift: lift_chart };
        fd_check(&recovered, &[0.7, 1.1]);
        let direct = torus.jet(&[0.7, 1.1]);
        let via_lift = recovered.jet(&[0.7, 1.1]);
        assert!((&direct.f - &via_lift.f).norm() < 1e-10);
        assert!((&direct.xi - &via_lift.xi).norm() < 1e-10);
        assert!((&direct.jf - &via_lift.jf).norm() < 1e-9);
        assert!((&direct.jxi - &via_lift.jxi).norm() < 1e-9);
    }
}
