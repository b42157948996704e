use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::legendre::grid::Grid;

/// First-order data of an immersion-with-normal at one parameter point:
/// position, unit normal, and their Jacobians (columns indexed by parameter).
#[derive(Debug, Clone)]
pub struct ChartJet {
    pub f: DVector<f64>,
    pub xi: DVector<f64>,
    pub jf: DMatrix<f64>,
    pub jxi: DMatrix<f64>,
}

/// Analytic surface patch: position and unit normal with exact derivatives.
/// Spherical charts emit unit vectors in R^{n+1}; Euclidean charts emit
/// points of R^n and get conjugated on entry.
pub trait SurfaceChart: Send + Sync {
    fn params(&self) -> usize;
    /// Length of the emitted position vector.
    fn ambient(&self) -> usize;
    fn jet(&self, u: &[f64]) -> ChartJet;
}

/// First-order data of a lift: the two spanning curves of the pencil line
/// and their Jacobians.
#[derive(Debug, Clone)]
pub struct LiftJet {
    pub z1: DVector<f64>,
    pub z2: DVector<f64>,
    pub dz1: DMatrix<f64>,
    pub dz2: DMatrix<f64>,
}

/// Analytic lift patch into the quadric coordinates.
pub trait LiftChart: Send + Sync {
    fn params(&self) -> usize;
    /// Sphere dimension; coordinates live in R^{n+3}.
    fn n(&self) -> usize;
    fn jet(&self, u: &[f64]) -> LiftJet;
}

/// Conjugation of a Euclidean chart into the round model. The position maps
/// under inverse stereographic projection and the normal is carried along by
/// the conformal factor, staying unit and tangent to the sphere.
pub struct StereographicChart {
    pub inner: Arc<dyn SurfaceChart>,
}

impl SurfaceChart for StereographicChart {
    fn params(&self) -> usize {
        self.inner.params()
    }

    fn ambient(&self) -> usize {
        self.inner.ambient() + 1
    }

    fn jet(&self, u: &[f64]) -> ChartJet {
        let jet = self.inner.jet(u);
        let n = self.inner.ambient();
        let d = self.inner.params();
        let fv = &jet.f;
        let eta = &jet.xi;
        let s = 1.0 + fv.norm_squared();
        let a = 2.0 * fv.dot(eta) / s;

        let mut f = DVector::zeros(n + 1);
        f[0] = 2.0 / s - 1.0;
        for i in 0..n {
            f[i + 1] = 2.0 * fv[i] / s;
        }
        let mut xi = DVector::zeros(n + 1);
        xi[0] = -a;
        for i in 0..n {
            xi[i + 1] = eta[i] - a * fv[i];
        }

        let mut jf = DMatrix::zeros(n + 1, d);
        let mut jxi = DMatrix::zeros(n + 1, d);
        for k in 0..d {
            let df = jet.jf.column(k);
            let deta = jet.jxi.column(k);
            let ds = 2.0 * fv.dot(&df);
            let da = 2.0 * (df.dot(eta) + fv.dot(&deta)) / s - a * ds / s;
            jf[(0, k)] = -2.0 * ds / (s * s);
            jxi[(0, k)] = -da;
            for i in 0..n {
                jf[(i + 1, k)] = 2.0 * df[i] / s - 2.0 * fv[i] * ds / (s * s);
                jxi[(i + 1, k)] = deta[i] - da * fv[i] - a * df[i];
            }
        }
        ChartJet { f, xi, jf, jxi }
    }
}

/// Recover the Euclidean position and normal behind a conjugated pair; exact
/// inverse of the transport used by `StereographicChart`.
pub fn euclidean_from_spherical(
    f: &DVector<f64>,
    xi: &DVector<f64>,
    tol: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let u = crate::coords::stereographic_inverse(f, tol)?;
    let n = u.len();
    let eta = DVector::from_fn(n, |i, _| xi[i + 1] - xi[0] * u[i]);
    Ok((u, eta))
}

/// The canonical lift of a spherical chart: point spheres (1, f, 0) and
/// great spheres (0, xi, 1).
pub struct HypersurfaceLiftChart {
    pub inner: Arc<dyn SurfaceChart>,
}

impl LiftChart for HypersurfaceLiftChart {
    fn params(&self) -> usize {
        self.inner.params()
    }

    // f lives in R^{n+1}, so the sphere dimension is one less.
    fn n(&self) -> usize {
        self.inner.ambient() - 1
    }

    fn jet(&self, u: &[f64]) -> LiftJet {
        let jet = self.inner.jet(u);
        let np1 = jet.f.len();
        let d = self.params();
        let dim = np1 + 2;
        let mut z1 = DVector::zeros(dim);
        let mut z2 = DVector::zeros(dim);
        z1[0] = 1.0;
        z2[dim - 1] = 1.0;
        for i in 0..np1 {
            z1[i + 1] = jet.f[i];
            z2[i + 1] = jet.xi[i];
        }
        let mut dz1 = DMatrix::zeros(dim, d);
        let mut dz2 = DMatrix::zeros(dim, d);
        for k in 0..d {
            for i in 0..np1 {
                dz1[(i + 1, k)] = jet.jf[(i, k)];
                dz2[(i + 1, k)] = jet.jxi[(i, k)];
            }
        }
        LiftJet { z1, z2, dz1, dz2 }
    }
}

/// Linear action of a group element on a lift.
pub struct TransformedLiftChart {
    pub inner: Arc<dyn LiftChart>,
    pub b: DMatrix<f64>,
}

impl LiftChart for TransformedLiftChart {
    fn params(&self) -> usize {
        self.inner.params()
    }

    fn n(&self) -> usize {
        self.inner.n()
    }

    fn jet(&self, u: &[f64]) -> LiftJet {
        let jet = self.inner.jet(u);
        LiftJet {
            z1: &self.b * &jet.z1,
            z2: &self.b * &jet.z2,
            dz1: &self.b * &jet.dz1,
            dz2: &self.b * &jet.dz2,
        }
    }
}

/// Rotates a lift in the plane of the two timelike axes and re-extracts the
/// canonical spanning pair, giving the lift of the parallel map in normal
/// form.
pub struct ParallelCanonicalChart {
    pub inner: Arc<dyn LiftChart>,
    pub rotation: DMatrix<f64>,
}

impl LiftChart for ParallelCanonicalChart {
    fn params(&self) -> usize {
        self.inner.params()
    }

    fn n(&self) -> usize {
        self.inner.n()
    }

    fn jet(&self, u: &[f64]) -> LiftJet {
        let jet = self.inner.jet(u);
        let rotated = LiftJet {
            z1: &self.rotation * &jet.z1,
            z2: &self.rotation * &jet.z2,
            dz1: &self.rotation * &jet.dz1,
            dz2: &self.rotation * &jet.dz2,
        };
        let cj = contact_jet_from_lift(&rotated)
            .expect("parallel rotation keeps the pencil nondegenerate");
        canonical_lift_jet(&cj)
    }
}

/// Assemble the canonical lift jet from contact data.
pub fn canonical_lift_jet(cj: &ContactJet) -> LiftJet {
    let np1 = cj.f.len();
    let d = cj.jf.ncols();
    let dim = np1 + 2;
    let mut z1 = DVector::zeros(dim);
    let mut z2 = DVector::zeros(dim);
    z1[0] = 1.0;
    z2[dim - 1] = 1.0;
    for i in 0..np1 {
        z1[i + 1] = cj.f[i];
        z2[i + 1] = cj.xi[i];
    }
    let mut dz1 = DMatrix::zeros(dim, d);
    let mut dz2 = DMatrix::zeros(dim, d);
    for k in 0..d {
        for i in 0..np1 {
            dz1[(i + 1, k)] = cj.jf[(i, k)];
            dz2[(i + 1, k)] = cj.jxi[(i, k)];
        }
    }
    LiftJet { z1, z2, dz1, dz2 }
}

/// Contact data carried by a lift at one point: the spherical projection's
/// position, normal, and their Jacobians.
pub type ContactJet = ChartJet;

/// Extract the spherical projection and its derivatives from an arbitrary
/// spanning pair of the pencil. The point sphere is the line's intersection
/// with the hyperplane killing the orientation coordinate, the great sphere
/// the one killing the first; both are then scale-fixed and unit-normalized
/// with the chain rule carried through.
pub fn contact_jet_from_lift(jet: &LiftJet) -> Result<ContactJet> {
    let dim = jet.z1.len();
    let m = dim - 1;
    let d = jet.dz1.ncols();
    let scale = jet.z1.norm() * jet.z2.norm();

    let extract = |pivot_out: usize, pivot_in: usize| -> Result<(DVector<f64>, DMatrix<f64>)> {
        // raw = z2[pivot_out] z1 - z1[pivot_out] z2 has raw[pivot_out] = 0.
        let raw = &jet.z1 * jet.z2[pivot_out] - &jet.z2 * jet.z1[pivot_out];
        if raw.norm_squared() <= 1e-20 * scale * scale {
            return Err(GeomError::Degenerate(
                "pencil basis extraction collapsed".into(),
            ));
        }
        let a0 = raw[pivot_in];
        if a0.abs() <= 1e-12 * raw.norm() {
            return Err(GeomError::Degenerate(
                "pencil basis normalization pivot vanished".into(),
            ));
        }
        let mut draw = DMatrix::zeros(dim, d);
        for k in 0..d {
            for i in 0..dim {
                draw[(i, k)] = jet.dz1[(i, k)] * jet.z2[pivot_out]
                    + jet.z1[i] * jet.dz2[(pivot_out, k)]
                    - jet.dz2[(i, k)] * jet.z1[pivot_out]
                    - jet.z2[i] * jet.dz1[(pivot_out, k)];
            }
        }
        // Spatial part divided by the pivot coordinate.
        let np1 = dim - 2;
        let w = DVector::from_fn(np1, |i, _| raw[i + 1] / a0);
        let mut dw = DMatrix::zeros(np1, d);
        for k in 0..d {
            let da0 = draw[(pivot_in, k)];
            for i in 0..np1 {
                dw[(i, k)] = (draw[(i + 1, k)] * a0 - raw[i + 1] * da0) / (a0 * a0);
            }
        }
        Ok(unit_with_jacobian(&w, &dw))
    };

    let (f, jf) = extract(m, 0)?;
    let (xi0, jxi0) = extract(0, m)?;
    // Re-impose orthogonality to the position before normalizing. Exact
    // chart data already satisfies it; interpolated pairs only do so to
    // truncation error, and the frame must be orthonormal for everything
    // built from it (curvature spheres in particular) to sit on the quadric.
    let np1 = dim - 2;
    let c = f.dot(&xi0);
    let w = &xi0 - &f * c;
    if w.norm() <= 1e-8 {
        return Err(GeomError::Degenerate(
            "normal collapsed onto the position".into(),
        ));
    }
    let mut dw = jxi0.clone();
    for k in 0..d {
        let dc = xi0.dot(&jf.column(k).clone_owned()) + f.dot(&jxi0.column(k).clone_owned());
        for i in 0..np1 {
            dw[(i, k)] -= dc * f[i] + c * jf[(i, k)];
        }
    }
    let (xi, jxi) = unit_with_jacobian(&w, &dw);
    Ok(ContactJet { f, xi, jf, jxi })
}

/// Normalize a nonvanishing vector field given its Jacobian, carrying the
/// chain rule through (the derivative loses its radial component).
fn unit_with_jacobian(w: &DVector<f64>, dw: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let (rows, cols) = dw.shape();
    let len = w.norm();
    let v = w / len;
    let mut dv = DMatrix::zeros(rows, cols);
    for k in 0..cols {
        let col = dw.column(k);
        let radial = v.dot(&col.clone_owned());
        for i in 0..rows {
            dv[(i, k)] = (col[i] - radial * v[i]) / len;
        }
    }
    (v, dv)
}

/// Catmull-Rom weights on the unit cell, nodes at -1, 0, 1, 2.
fn cr_weights(t: f64) -> ([f64; 4], [f64; 4]) {
    let t2 = t * t;
    let t3 = t2 * t;
    let w = [
        0.5 * (-t + 2.0 * t2 - t3),
        0.5 * (2.0 - 5.0 * t2 + 3.0 * t3),
        0.5 * (t + 4.0 * t2 - 3.0 * t3),
        0.5 * (-t2 + t3),
    ];
    let dw = [
        0.5 * (-1.0 + 4.0 * t - 3.0 * t2),
        0.5 * (-10.0 * t + 9.0 * t2),
        0.5 * (1.0 + 8.0 * t - 9.0 * t2),
        0.5 * (-2.0 * t + 3.0 * t2),
    ];
    (w, dw)
}

/// Tensor-product Catmull-Rom interpolation of vector fields sampled on a
/// grid, with analytic derivatives of the interpolant. At grid nodes the
/// value is the sample and the derivative reduces to a one-cell central
/// difference.
pub struct GridInterpolator<'a> {
    grid: &'a Grid,
    fields: Vec<&'a [DVector<f64>]>,
}

impl<'a> GridInterpolator<'a> {
    pub fn new(grid: &'a Grid, fields: Vec<&'a [DVector<f64>]>) -> Self {
        for f in &fields {
            debug_assert_eq!(f.len(), grid.len());
        }
        GridInterpolator { grid, fields }
    }

    /// Value and Jacobian of every field at `u` (which must lie in the
    /// domain; periodic coordinates are wrapped).
    pub fn eval(&self, u: &[f64]) -> Result<Vec<(DVector<f64>, DMatrix<f64>)>> {
        let d = self.grid.d();
        let mut uu = u.to_vec();
        if !self.grid.normalize_point(&mut uu) {
            return Err(GeomError::Precondition(format!(
                "evaluation point {uu:?} outside the sampled domain"
            )));
        }
        // Per-axis stencil nodes and weights.
        let mut nodes = vec![[0usize; 4]; d];
        let mut wts = vec![[0.0f64; 4]; d];
        let mut dwts = vec![[0.0f64; 4]; d];
        for k in 0..d {
            let h = self.grid.spacing(k);
            let (a, _) = self.grid.ranges()[k];
            let dimk = self.grid.dims()[k];
            let s = (uu[k] - a) / h;
            let mut c = s.floor() as isize;
            let max_cell = if self.grid.periodic()[k] {
                dimk as isize - 1
            } else {
                dimk as isize - 2
            };
            c = c.clamp(0, max_cell);
            let t = s - c as f64;
            let (w, dw) = cr_weights(t);
            for (j, off) in (-1isize..=2).enumerate() {
                let raw = c + off;
                nodes[k][j] = if self.grid.periodic()[k] {
                    raw.rem_euclid(dimk as isize) as usize
                } else {
                    raw.clamp(0, dimk as isize - 1) as usize
                };
                wts[k][j] = w[j];
                dwts[k][j] = dw[j] / h;
            }
        }

        let vec_len: Vec<usize> = self.fields.iter().map(|f| f[0].len()).collect();
        let mut out: Vec<(DVector<f64>, DMatrix<f64>)> = vec_len
            .iter()
            .map(|&l| (DVector::zeros(l), DMatrix::zeros(l, d)))
            .collect();

        // Walk the 4^d stencil.
        let count = 4usize.pow(d as u32);
        let mut multi = vec![0usize; d];
        for idx in 0..count {
            let mut rem = idx;
            for k in (0..d).rev() {
                multi[k] = rem % 4;
                rem /= 4;
            }
            let mut w = 1.0;
            for k in 0..d {
                w *= wts[k][multi[k]];
            }
            let mut grad = vec![0.0; d];
            for g in 0..d {
                let mut p = 1.0;
                for k in 0..d {
                    p *= if k == g { dwts[k][multi[k]] } else { wts[k][multi[k]] };
                }
                grad[g] = p;
            }
            let node: Vec<usize> = (0..d).map(|k| nodes[k][multi[k]]).collect();
            let flat = self.grid.flat(&node);
            for (fi, field) in self.fields.iter().enumerate() {
                let sample = &field[flat];
                let (val, jac) = &mut out[fi];
                if w != 0.0 {
                    val.axpy(w, sample, 1.0);
                }
                for g in 0..d {
                    if grad[g] != 0.0 {
                        for i in 0..sample.len() {
                            jac[(i, g)] += grad[g] * sample[i];
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct CircleChart;

    impl SurfaceChart for CircleChart {
        fn params(&self) -> usize {
            1
        }
        fn ambient(&self) -> usize {
            2
        }
        fn jet(&self, u: &[f64]) -> ChartJet {
            let (s, c) = u[0].sin_cos();
            ChartJet {
                f: DVector::from_row_slice(&[c, s]),
                xi: DVector::from_row_slice(&[-c, -s]),
                jf: DMatrix::from_row_slice(2, 1, &[-s, c]),
                jxi: DMatrix::from_row_slice(2, 1, &[s, -c]),
            }
        }
    }

    #[test]
    fn interpolator_reproduces_samples_and_slopes() {
        let chart = CircleChart;
        let errors: Vec<(f64, f64)> = [32usize, 128]
            .iter()
            .map(|&nodes| {
                let grid = Grid::periodic_angles(vec![nodes]);
                let samples: Vec<DVector<f64>> = (0..nodes)
                    .map(|i| chart.jet(&grid.point(&[i])).f)
                    .collect();
                let interp = GridInterpolator::new(&grid, vec![&samples]);
                let got = interp.eval(&grid.point(&[nodes / 3])).unwrap();
                assert!((&got[0].0 - &samples[nodes / 3]).norm() < 1e-14);
                let mut val = 0.0f64;
                let mut jac = 0.0f64;
                for &u in &[0.13, 1.9, 5.77] {
                    let got = interp.eval(&[u]).unwrap();
                    let jet = chart.jet(&[u]);
                    val = val.max((&got[0].0 - &jet.f).norm());
                    jac = jac.max((&got[0].1 - &jet.jf).norm());
                }
                (val, jac)
            })
            .collect();
        // Third-order values, second-order slopes: refining 4x must shrink
        // errors by well over 20x and 5x respectively.
        assert!(errors[1].0 < errors[0].0 / 20.0, "{errors:?}");
        assert!(errors[1].1 < errors[0].1 / 5.0, "{errors:?}");
        assert!(errors[1].0 < 1e-4);
        assert!(errors[1].1 < 1e-2);
    }

    #[test]
    fn stereographic_transport_keeps_contact_frame() {
        struct LineChart;
        impl SurfaceChart for LineChart {
            fn params(&self) -> usize {
                1
            }
            fn ambient(&self) -> usize {
                2
            }
            fn jet(&self, u: &[f64]) -> ChartJet {
                // The line y = 1 with upward normal.
                ChartJet {
                    f: DVector::from_row_slice(&[u[0], 1.0]),
                    xi: DVector::from_row_slice(&[0.0, 1.0]),
                    jf: DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
                    jxi: DMatrix::from_row_slice(2, 1, &[0.0, 0.0]),
                }
            }
        }
        let chart = StereographicChart { inner: Arc::new(LineChart) };
        for &u in &[-2.0, -0.3, 0.0, 1.7] {
            let jet = chart.jet(&[u]);
            assert!((jet.f.norm() - 1.0).abs() < 1e-12);
            assert!((jet.xi.norm() - 1.0).abs() < 1e-12);
            assert!(jet.f.dot(&jet.xi).abs() < 1e-12);
            // Jacobians agree with finite differences.
            let h = 1e-6;
            let jp = chart.jet(&[u + h]);
            let jm = chart.jet(&[u - h]);
            let dfd = (&jp.f - &jm.f) / (2.0 * h);
            let dxid = (&jp.xi - &jm.xi) / (2.0 * h);
            assert!((jet.jf.column(0).clone_owned() - dfd).norm() < 1e-8);
            assert!((jet.jxi.column(0).clone_owned() - dxid).norm() < 1e-8);
            // Tangency of the derivative frame.
            assert!(jet.jf.column(0).dot(&jet.xi).abs() < 1e-12);
        }
    }

    #[test]
    fn euclidean_recovery_inverts_transport() {
        struct ArcChart;
        impl SurfaceChart for ArcChart {
            fn params(&self) -> usize {
                1
            }
            fn ambient(&self) -> usize {
                2
            }
            fn jet(&self, u: &[f64]) -> ChartJet {
                let (s, c) = u[0].sin_cos();
                let r = 2.0;
                ChartJet {
                    f: DVector::from_row_slice(&[1.0 + r * c, -0.5 + r * s]),
                    xi: DVector::from_row_slice(&[-c, -s]),
                    jf: DMatrix::from_row_slice(2, 1, &[-r * s, r * c]),
                    jxi: DMatrix::from_row_slice(2, 1, &[s, -c]),
                }
            }
        }
        let inner = Arc::new(ArcChart);
        let chart = StereographicChart { inner: inner.clone() };
        for &u in &[0.0, 0.9, 2.2] {
            let sph = chart.jet(&[u]);
            let (fe, eta) = euclidean_from_spherical(&sph.f, &sph.xi, 1e-10).unwrap();
            let base = inner.jet(&[u]);
            assert!((fe - &base.f).norm() < 1e-12);
            assert!((eta - &base.xi).norm() < 1e-12);
        }
    }

    #[test]
    fn contact_extraction_recovers_canonical_data() {
        // Small circle in S^2 at spherical radius 0.6 from the first axis.
        struct SmallCircleChart;
        impl SurfaceChart for SmallCircleChart {
            fn params(&self) -> usize {
                1
            }
            fn ambient(&self) -> usize {
                3
            }
            fn jet(&self, u: &[f64]) -> ChartJet {
                let rho = 0.6f64;
                let (sr, cr) = rho.sin_cos();
                let (s, c) = u[0].sin_cos();
                let om = DVector::from_row_slice(&[0.0, c, s]);
                let dom = DVector::from_row_slice(&[0.0, -s, c]);
                let p0 = DVector::from_row_slice(&[1.0, 0.0, 0.0]);
                ChartJet {
                    f: &p0 * cr + &om * sr,
                    xi: &p0 * sr - &om * cr,
                    jf: DMatrix::from_fn(3, 1, |i, _| sr * dom[i]),
                    jxi: DMatrix::from_fn(3, 1, |i, _| -cr * dom[i]),
                }
            }
        }
        // Build the canonical lift and recombine the basis with a
        // parameter-dependent invertible mix; extraction must undo it.
        let chart = Arc::new(SmallCircleChart);
        let lift = HypersurfaceLiftChart { inner: chart.clone() };
        for &u in &[0.2, 1.1, 4.0] {
            let jet = lift.jet(&[u]);
            let (s, c) = (2.0 + u.sin(), u.cos());
            // Mixed pair: w1 = s z1 + c z2, w2 = -c z1 + s z2 plus the chain
            // rule for the parameter dependence.
            let mixed = LiftJet {
                z1: &jet.z1 * s + &jet.z2 * c,
                z2: &jet.z1 * -c + &jet.z2 * s,
                dz1: &jet.dz1 * s + &jet.dz2 * c
                    + DMatrix::from_fn(jet.z1.len(), 1, |i, _| {
                        jet.z1[i] * u.cos() - jet.z2[i] * u.sin()
                    }),
                dz2: &jet.dz1 * -c + &jet.dz2 * s
                    + DMatrix::from_fn(jet.z1.len(), 1, |i, _| {
                        jet.z1[i] * u.sin() + jet.z2[i] * u.cos()
                    }),
            };
            let cj = contact_jet_from_lift(&mixed).unwrap();
            let base = chart.jet(&[u]);
            assert!((&cj.f - &base.f).norm() < 1e-12);
            assert!((&cj.xi - &base.xi).norm() < 1e-12);
            assert!((&cj.jf - &base.jf).norm() < 1e-10);
            assert!((&cj.jxi - &base.jxi).norm() < 1e-10);
        }
    }
}
