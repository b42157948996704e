//! Legendre lifts: hypersurfaces and submanifolds of the sphere encoded as
//! line congruences on the quadric.
//!
//! An immersed oriented hypersurface of S^n determines, at each point, the
//! pencil line of its contact element; the resulting map into the space of
//! lines is the Legendre lift. Submanifolds of higher codimension lift
//! through their unit normal bundles. All curvature analysis downstream
//! (principal curvatures, curvature spheres, parallels, focal sets) is
//! phrased in terms of these lifts, which is what makes it invariant under
//! the full sphere-transformation group rather than just isometries.

pub mod chart;
pub mod grid;
pub mod shape;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::config::Tolerances;
use crate::coords::LieCoord;
use crate::error::{GeomError, Result};
use crate::linalg::{orthonormalize, BilinearForm};
use crate::transform::LieTransform;

pub use chart::{
    canonical_lift_jet, contact_jet_from_lift, euclidean_from_spherical, ChartJet, ContactJet,
    GridInterpolator, HypersurfaceLiftChart, LiftChart, LiftJet, ParallelCanonicalChart,
    StereographicChart, SurfaceChart, TransformedLiftChart,
};
pub use grid::Grid;
pub use shape::{CurvatureSphere, CurvatureSphereSet, ShapeData};

/// Where the sampled data originally lived. Euclidean data is conjugated
/// into the round model on entry and analyzed there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbientModel {
    Spherical,
    EuclideanStereographic,
}

/// A sampled oriented hypersurface patch (or, when `base_axes < d`, a
/// parametrized unit normal bundle of a lower-dimensional submanifold).
/// Storage is always spherical: unit positions and unit normals in R^{n+1},
/// orthogonal to each other at every sample.
pub struct SampledHypersurface {
    grid: Grid,
    n: usize,
    f: Vec<DVector<f64>>,
    xi: Vec<DVector<f64>>,
    chart: Option<Arc<dyn SurfaceChart>>,
    euclid_chart: Option<Arc<dyn SurfaceChart>>,
    ambient: AmbientModel,
    base_axes: usize,
}

fn validate_frame(f: &DVector<f64>, xi: &DVector<f64>, idx: usize) -> Result<()> {
    if (f.norm() - 1.0).abs() > 1e-10 || (xi.norm() - 1.0).abs() > 1e-10 {
        return Err(GeomError::InvalidInput(format!(
            "sample {idx}: position/normal not unit length"
        )));
    }
    if f.dot(xi).abs() > 1e-10 {
        return Err(GeomError::InvalidInput(format!(
            "sample {idx}: normal not orthogonal to position (dot = {:.3e})",
            f.dot(xi)
        )));
    }
    Ok(())
}

impl SampledHypersurface {
    pub fn from_spherical_chart(chart: Arc<dyn SurfaceChart>, grid: Grid) -> Result<Self> {
        if chart.params() != grid.d() {
            return Err(GeomError::DimensionMismatch { expected: chart.params(), got: grid.d() });
        }
        let n = chart.ambient() - 1;
        let mut f = Vec::with_capacity(grid.len());
        let mut xi = Vec::with_capacity(grid.len());
        for flat in 0..grid.len() {
            let u = grid.point(&grid.multi(flat));
            let jet = chart.jet(&u);
            validate_frame(&jet.f, &jet.xi, flat)?;
            f.push(jet.f);
            xi.push(jet.xi);
        }
        Ok(SampledHypersurface {
            base_axes: grid.d(),
            grid,
            n,
            f,
            xi,
            chart: Some(chart),
            euclid_chart: None,
            ambient: AmbientModel::Spherical,
        })
    }

    pub fn from_euclidean_chart(chart: Arc<dyn SurfaceChart>, grid: Grid) -> Result<Self> {
        let spherical: Arc<dyn SurfaceChart> =
            Arc::new(StereographicChart { inner: chart.clone() });
        let mut out = Self::from_spherical_chart(spherical, grid)?;
        out.euclid_chart = Some(chart);
        out.ambient = AmbientModel::EuclideanStereographic;
        Ok(out)
    }

    /// A unit normal bundle parametrization: the first `base_axes` grid axes
    /// move along the submanifold, the rest sweep the normal fibers, so the
    /// position is constant along fiber axes.
    pub fn from_normal_bundle_chart(
        chart: Arc<dyn SurfaceChart>,
        grid: Grid,
        base_axes: usize,
    ) -> Result<Self> {
        if base_axes >= grid.d() {
            return Err(GeomError::InvalidInput(
                "normal bundle needs at least one fiber axis".into(),
            ));
        }
        let mut out = Self::from_spherical_chart(chart, grid)?;
        out.base_axes = base_axes;
        Ok(out)
    }

    /// Raw samples. Euclidean input carries positions in R^n and unit
    /// normals; it is conjugated into the round model here.
    pub fn from_samples(
        grid: Grid,
        f: Vec<DVector<f64>>,
        xi: Vec<DVector<f64>>,
        ambient: AmbientModel,
        base_axes: Option<usize>,
    ) -> Result<Self> {
        if f.len() != grid.len() || xi.len() != grid.len() {
            return Err(GeomError::InvalidInput(format!(
                "expected {} samples, got {} positions / {} normals",
                grid.len(),
                f.len(),
                xi.len()
            )));
        }
        let base_axes = base_axes.unwrap_or(grid.d());
        if base_axes > grid.d() {
            return Err(GeomError::InvalidInput("base_axes exceeds grid rank".into()));
        }
        let (n, fs, xs) = match ambient {
            AmbientModel::Spherical => {
                let n = f[0].len() - 1;
                (n, f, xi)
            }
            AmbientModel::EuclideanStereographic => {
                let n = f[0].len();
                let mut fs = Vec::with_capacity(f.len());
                let mut xs = Vec::with_capacity(f.len());
                for (i, (fe, eta)) in f.iter().zip(xi.iter()).enumerate() {
                    if (eta.norm() - 1.0).abs() > 1e-10 {
                        return Err(GeomError::InvalidInput(format!(
                            "sample {i}: Euclidean normal not unit"
                        )));
                    }
                    let s = 1.0 + fe.norm_squared();
                    let a = 2.0 * fe.dot(eta) / s;
                    let mut fv = DVector::zeros(n + 1);
                    fv[0] = 2.0 / s - 1.0;
                    let mut xv = DVector::zeros(n + 1);
                    xv[0] = -a;
                    for j in 0..n {
                        fv[j + 1] = 2.0 * fe[j] / s;
                        xv[j + 1] = eta[j] - a * fe[j];
                    }
                    fs.push(fv);
                    xs.push(xv);
                }
                (n, fs, xs)
            }
        };
        for (i, (fv, xv)) in fs.iter().zip(xs.iter()).enumerate() {
            if fv.len() != n + 1 || xv.len() != n + 1 {
                return Err(GeomError::DimensionMismatch { expected: n + 1, got: fv.len() });
            }
            validate_frame(fv, xv, i)?;
        }
        Ok(SampledHypersurface {
            grid,
            n,
            f: fs,
            xi: xs,
            chart: None,
            euclid_chart: None,
            ambient,
            base_axes,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.grid.d()
    }

    pub fn ambient(&self) -> AmbientModel {
        self.ambient
    }

    pub fn base_axes(&self) -> usize {
        self.base_axes
    }

    pub fn is_hypersurface(&self) -> bool {
        self.base_axes == self.grid.d()
    }

    pub fn positions(&self) -> &[DVector<f64>] {
        &self.f
    }

    pub fn normals(&self) -> &[DVector<f64>] {
        &self.xi
    }

    pub fn spherical_chart(&self) -> Option<&Arc<dyn SurfaceChart>> {
        self.chart.as_ref()
    }

    pub fn euclidean_chart(&self) -> Option<&Arc<dyn SurfaceChart>> {
        self.euclid_chart.as_ref()
    }

    /// Euclidean positions and unit normals recovered sample by sample;
    /// fails if the patch meets the projection pole.
    pub fn euclidean_samples(&self) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>)> {
        let mut fs = Vec::with_capacity(self.f.len());
        let mut es = Vec::with_capacity(self.f.len());
        for (fv, xv) in self.f.iter().zip(self.xi.iter()) {
            let (fe, eta) = euclidean_from_spherical(fv, xv, 1e-10)?;
            fs.push(fe);
            es.push(eta);
        }
        Ok((fs, es))
    }

    /// Re-sample onto a different grid; needs the analytic chart.
    pub fn resample(&self, grid: Grid) -> Result<Self> {
        let chart = self.chart.clone().ok_or_else(|| {
            GeomError::Precondition("resampling needs an analytic chart".into())
        })?;
        let mut out = Self::from_spherical_chart(chart, grid)?;
        out.base_axes = self.base_axes.min(out.grid.d());
        out.euclid_chart = self.euclid_chart.clone();
        out.ambient = self.ambient;
        Ok(out)
    }
}

/// How a lift came to be; drives the curvature-sphere strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftKind {
    Hypersurface,
    NormalBundle { base_axes: usize },
    Parallel,
    Transformed,
}

/// A sampled Legendre lift: at each grid node, a spanning pair of the
/// contact pencil line, plus an optional analytic chart.
pub struct LegendreMap {
    grid: Grid,
    n: usize,
    z1: Vec<DVector<f64>>,
    z2: Vec<DVector<f64>>,
    chart: Option<Arc<dyn LiftChart>>,
    kind: LiftKind,
}

/// Evaluation handle: analytic chart when available, Catmull-Rom
/// interpolation of the samples otherwise.
pub struct LiftEvaluator<'a> {
    chart: Option<&'a dyn LiftChart>,
    interp: Option<GridInterpolator<'a>>,
}

impl LiftEvaluator<'_> {
    pub fn analytic(&self) -> bool {
        self.chart.is_some()
    }

    pub fn jet(&self, u: &[f64]) -> Result<LiftJet> {
        if let Some(chart) = self.chart {
            return Ok(chart.jet(u));
        }
        let fields = self.interp.as_ref().expect("sampled evaluator").eval(u)?;
        Ok(LiftJet {
            z1: fields[0].0.clone(),
            z2: fields[1].0.clone(),
            dz1: fields[0].1.clone(),
            dz2: fields[1].1.clone(),
        })
    }
}

/// Lift a sampled patch to its Legendre map. Hypersurface data must be
/// immersed (spot-checked); normal bundle data must hold the position fixed
/// along fiber axes and keep the normal orthogonal to the base tangents.
pub fn legendre_lift(h: &SampledHypersurface) -> Result<LegendreMap> {
    if h.d() != h.n() - 1 {
        return Err(GeomError::Precondition(format!(
            "a lift of S^{} needs {} parameters, grid has {}",
            h.n(),
            h.n() - 1,
            h.d()
        )));
    }
    let dim = h.n() + 3;
    let mut z1 = Vec::with_capacity(h.grid.len());
    let mut z2 = Vec::with_capacity(h.grid.len());
    for (fv, xv) in h.f.iter().zip(h.xi.iter()) {
        let mut a = DVector::zeros(dim);
        a[0] = 1.0;
        let mut b = DVector::zeros(dim);
        b[dim - 1] = 1.0;
        for i in 0..=h.n() {
            a[i + 1] = fv[i];
            b[i + 1] = xv[i];
        }
        z1.push(a);
        z2.push(b);
    }
    let chart: Option<Arc<dyn LiftChart>> = h
        .chart
        .clone()
        .map(|inner| Arc::new(HypersurfaceLiftChart { inner }) as Arc<dyn LiftChart>);
    let kind = if h.is_hypersurface() {
        LiftKind::Hypersurface
    } else {
        LiftKind::NormalBundle { base_axes: h.base_axes }
    };
    let map = LegendreMap { grid: h.grid.clone(), n: h.n(), z1, z2, chart, kind };

    // Spot-check the defining rank conditions on a subset of the interior.
    let eval = map.evaluator();
    let interior = map.grid.interior_flats(1);
    let stride = interior.len().div_ceil(512).max(1);
    for &flat in interior.iter().step_by(stride) {
        let u = map.grid.point(&map.grid.multi(flat));
        let jet = eval.jet(&u)?;
        let cj = contact_jet_from_lift(&jet)?;
        match kind {
            LiftKind::Hypersurface => {
                let svd = nalgebra::SVD::new(cj.jf.clone(), false, false);
                let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
                let smin =
                    svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
                if smax == 0.0 || smin < 1e-8 * smax {
                    return Err(GeomError::Precondition(format!(
                        "patch is not immersed near sample {flat} (rank margin {:.3e})",
                        if smax == 0.0 { 0.0 } else { smin / smax }
                    )));
                }
            }
            LiftKind::NormalBundle { base_axes } => {
                let scale = cj.jf.norm().max(1.0);
                for k in base_axes..map.grid.d() {
                    if cj.jf.column(k).norm() > 1e-8 * scale {
                        return Err(GeomError::Precondition(format!(
                            "position varies along fiber axis {k} near sample {flat}"
                        )));
                    }
                }
                for k in 0..base_axes {
                    let t = cj.jf.column(k).dot(&cj.xi).abs();
                    if t > 1e-8 * cj.jf.column(k).norm().max(1e-12) {
                        return Err(GeomError::Precondition(format!(
                            "normal field not orthogonal to the base tangents near sample {flat}"
                        )));
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(map)
}

impl LegendreMap {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.grid.d()
    }

    pub fn kind(&self) -> LiftKind {
        self.kind
    }

    pub fn chart(&self) -> Option<&Arc<dyn LiftChart>> {
        self.chart.as_ref()
    }

    pub fn z1_samples(&self) -> &[DVector<f64>] {
        &self.z1
    }

    pub fn z2_samples(&self) -> &[DVector<f64>] {
        &self.z2
    }

    pub fn has_chart(&self) -> bool {
        self.chart.is_some()
    }

    pub fn evaluator(&self) -> LiftEvaluator<'_> {
        match &self.chart {
            Some(c) => LiftEvaluator { chart: Some(c.as_ref()), interp: None },
            None => LiftEvaluator {
                chart: None,
                interp: Some(GridInterpolator::new(&self.grid, vec![&self.z1, &self.z2])),
            },
        }
    }

    /// Pencil line at a grid node.
    pub fn line_at_flat(&self, flat: usize) -> Result<crate::pencil::PencilLine> {
        let a = LieCoord::with_tol(self.z1[flat].clone(), 1e-8)?;
        let b = LieCoord::with_tol(self.z2[flat].clone(), 1e-8)?;
        crate::pencil::line_on_quadric(&a, &b, &Tolerances::default())
    }

    pub fn contact_jet_at(&self, u: &[f64]) -> Result<ContactJet> {
        let jet = self.evaluator().jet(u)?;
        contact_jet_from_lift(&jet)
    }

    /// Linear image under a group element.
    pub fn transformed(&self, b: &LieTransform) -> Result<LegendreMap> {
        if b.n() != self.n {
            return Err(GeomError::DimensionMismatch { expected: self.n, got: b.n() });
        }
        let m = b.matrix();
        let z1 = self.z1.iter().map(|z| m * z).collect();
        let z2 = self.z2.iter().map(|z| m * z).collect();
        let chart = self.chart.clone().map(|inner| {
            Arc::new(TransformedLiftChart { inner, b: m.clone() }) as Arc<dyn LiftChart>
        });
        Ok(LegendreMap { grid: self.grid.clone(), n: self.n, z1, z2, chart, kind: LiftKind::Transformed })
    }

    /// The lift of the parallel map at parameter `t`: the rotation mixing
    /// the timelike axes is applied and the spanning pair re-extracted into
    /// normal form, so the new point spheres trace cos(t) f - sin(t) xi.
    /// Principal curvatures obey kappa_t = cot(arccot kappa + t).
    pub fn parallel_submanifold(&self, t: f64) -> Result<LegendreMap> {
        let rot = LieTransform::parallel(self.n, t);
        let m = rot.matrix();
        let dim = self.n + 3;
        let mut z1 = Vec::with_capacity(self.z1.len());
        let mut z2 = Vec::with_capacity(self.z2.len());
        for (a, b) in self.z1.iter().zip(self.z2.iter()) {
            let (f, xi) = contact_point_from_pair(&(m * a), &(m * b))?;
            let mut na = DVector::zeros(dim);
            na[0] = 1.0;
            let mut nb = DVector::zeros(dim);
            nb[dim - 1] = 1.0;
            for i in 0..f.len() {
                na[i + 1] = f[i];
                nb[i + 1] = xi[i];
            }
            z1.push(na);
            z2.push(nb);
        }
        let chart = self.chart.clone().map(|inner| {
            Arc::new(ParallelCanonicalChart { inner, rotation: m.clone() })
                as Arc<dyn LiftChart>
        });
        Ok(LegendreMap { grid: self.grid.clone(), n: self.n, z1, z2, chart, kind: LiftKind::Parallel })
    }

    /// Spherical projection: position and unit normal at every sample.
    pub fn spherical_projection(&self) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>)> {
        let mut fs = Vec::with_capacity(self.z1.len());
        let mut xs = Vec::with_capacity(self.z1.len());
        for (a, b) in self.z1.iter().zip(self.z2.iter()) {
            let (f, xi) = contact_point_from_pair(a, b)?;
            fs.push(f);
            xs.push(xi);
        }
        Ok((fs, xs))
    }

    /// Euclidean projection. Samples whose point sphere is the improper
    /// point have no position; their indices are reported.
    pub fn euclidean_projection(&self) -> Result<EuclideanProjection> {
        let m = self.n + 2;
        let mut points = Vec::with_capacity(self.z1.len());
        let mut normals = Vec::with_capacity(self.z1.len());
        let mut improper = Vec::new();
        for (flat, (a, b)) in self.z1.iter().zip(self.z2.iter()).enumerate() {
            // Point sphere member.
            let p = a * b[m] - b * a[m];
            let denom = p[0] + p[1];
            if denom.abs() <= 1e-10 * p.norm() {
                improper.push(flat);
                points.push(None);
                normals.push(None);
                continue;
            }
            let point = DVector::from_fn(self.n, |i, _| p[i + 2] / denom);
            // Plane member: combination with vanishing first-two sum.
            let q = a * (b[0] + b[1]) - b * (a[0] + a[1]);
            if q[m].abs() <= 1e-10 * q.norm() {
                improper.push(flat);
                points.push(Some(point));
                normals.push(None);
                continue;
            }
            let eta = DVector::from_fn(self.n, |i, _| q[i + 2] / q[m]);
            let len = eta.norm();
            points.push(Some(point));
            normals.push(Some(eta / len));
        }
        Ok(EuclideanProjection { points, normals, improper })
    }

    /// Curvature spheres at an arbitrary parameter point.
    pub fn curvature_spheres_at(
        &self,
        u: &[f64],
        tols: &Tolerances,
    ) -> Result<CurvatureSphereSet> {
        let eval = self.evaluator();
        curvature_spheres_impl(self, &eval, u, tols, true)
    }

    pub fn curvature_spheres_at_flat(
        &self,
        flat: usize,
        tols: &Tolerances,
    ) -> Result<CurvatureSphereSet> {
        let u = self.grid.point(&self.grid.multi(flat));
        self.curvature_spheres_at(&u, tols)
    }

    /// Curvature spheres at every interior node.
    pub fn curvature_field(&self, tols: &Tolerances) -> Result<CurvatureField> {
        let eval = self.evaluator();
        let interior = self.grid.interior_flats(1);
        let mut sets: Vec<Option<CurvatureSphereSet>> = vec![None; self.grid.len()];
        let mut failed = Vec::new();
        for &flat in &interior {
            let u = self.grid.point(&self.grid.multi(flat));
            match curvature_spheres_impl(self, &eval, &u, tols, true) {
                Ok(set) => sets[flat] = Some(set),
                Err(_) => failed.push(flat),
            }
        }
        if failed.len() * 20 > interior.len() {
            return Err(GeomError::Inconclusive(format!(
                "curvature extraction failed at {} of {} interior samples",
                failed.len(),
                interior.len()
            )));
        }
        Ok(CurvatureField { sets, interior, failed })
    }
}

/// Euclidean shadow of a lift.
pub struct EuclideanProjection {
    pub points: Vec<Option<DVector<f64>>>,
    pub normals: Vec<Option<DVector<f64>>>,
    pub improper: Vec<usize>,
}

/// Per-node curvature spheres over a lift's grid.
pub struct CurvatureField {
    pub sets: Vec<Option<CurvatureSphereSet>>,
    pub interior: Vec<usize>,
    pub failed: Vec<usize>,
}

impl CurvatureField {
    pub fn interior_sets(&self) -> impl Iterator<Item = (usize, &CurvatureSphereSet)> {
        self.interior
            .iter()
            .filter_map(move |&flat| self.sets[flat].as_ref().map(|s| (flat, s)))
    }
}

/// Pointwise canonical extraction (no derivatives): the spherical position
/// and normal of a pencil given by an arbitrary spanning pair.
pub fn contact_point_from_pair(
    z1: &DVector<f64>,
    z2: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let dim = z1.len();
    let m = dim - 1;
    let scale = z1.norm() * z2.norm();
    let p = z1 * z2[m] - z2 * z1[m];
    if p.norm_squared() <= 1e-20 * scale * scale || p[0].abs() <= 1e-12 * p.norm() {
        return Err(GeomError::Degenerate("point sphere extraction collapsed".into()));
    }
    let g = z1 * z2[0] - z2 * z1[0];
    if g.norm_squared() <= 1e-20 * scale * scale || g[m].abs() <= 1e-12 * g.norm() {
        return Err(GeomError::Degenerate("great sphere extraction collapsed".into()));
    }
    let mut f = DVector::from_fn(dim - 2, |i, _| p[i + 1] / p[0]);
    f /= f.norm();
    let mut xi = DVector::from_fn(dim - 2, |i, _| g[i + 1] / g[m]);
    let c = f.dot(&xi);
    xi -= &f * c;
    xi /= xi.norm();
    Ok((f, xi))
}

fn curvature_spheres_impl(
    map: &LegendreMap,
    eval: &LiftEvaluator,
    u: &[f64],
    tols: &Tolerances,
    allow_fallback: bool,
) -> Result<CurvatureSphereSet> {
    let jet = eval.jet(u)?;
    if let LiftKind::NormalBundle { base_axes } = map.kind {
        return bundle_curvature(&jet, base_axes, tols);
    }
    let cj = contact_jet_from_lift(&jet)?;
    match shape::shape_from_contact_jet(&cj) {
        Ok(shape_data) => {
            let mut set = shape::spheres_from_shape(&cj, &shape_data, tols);
            shape::sort_spheres(&mut set);
            Ok(set)
        }
        Err(_) if allow_fallback => displaced_curvature(map, &jet, tols),
        Err(e) => Err(e),
    }
}

/// Curvature spheres of a normal bundle lift: the finite ones come from the
/// shape operator of the base restricted to the chosen normal, and the point
/// sphere itself is a curvature sphere whose principal space is the fiber.
fn bundle_curvature(
    jet: &LiftJet,
    base_axes: usize,
    tols: &Tolerances,
) -> Result<CurvatureSphereSet> {
    let cj = contact_jet_from_lift(jet)?;
    let d = cj.jf.ncols();
    let np1 = cj.f.len();
    let n = np1 - 1;
    let jf_base = cj.jf.columns(0, base_axes).clone_owned();
    let jxi_base = cj.jxi.columns(0, base_axes).clone_owned();
    let base_cj = ContactJet {
        f: cj.f.clone(),
        xi: cj.xi.clone(),
        jf: jf_base,
        jxi: jxi_base,
    };
    let shape_data = shape::shape_from_contact_jet(&base_cj)?;
    let mut set = shape::spheres_from_shape(&base_cj, &shape_data, tols);
    // Widen direction matrices to the full parameter space.
    for s in &mut set.spheres {
        let mut dirs = DMatrix::zeros(d, s.multiplicity);
        for c in 0..s.multiplicity {
            for r in 0..base_axes {
                dirs[(r, c)] = s.directions[(r, c)];
            }
        }
        s.directions = dirs;
    }
    // The point sphere family along the fibers.
    let mut k = DVector::zeros(np1 + 2);
    k[0] = 1.0;
    for i in 0..np1 {
        k[i + 1] = cj.f[i];
    }
    let mut dirs = DMatrix::zeros(d, d - base_axes);
    for (c, axis) in (base_axes..d).enumerate() {
        dirs[(axis, c)] = 1.0;
    }
    let scale = k.norm();
    set.spheres.push(CurvatureSphere {
        pair: (1.0 / scale, 0.0),
        multiplicity: d - base_axes,
        directions: dirs,
        k: LieCoord::new_unchecked(k / scale, n),
    });
    shape::sort_spheres(&mut set);
    Ok(set)
}

/// Fallback for points where the spherical projection is singular: rotate by
/// a parallel transformation until the displaced projection is immersive,
/// compute there, and rotate the spheres back. Principal spaces and
/// multiplicities are unchanged by the displacement.
fn displaced_curvature(
    map: &LegendreMap,
    jet: &LiftJet,
    tols: &Tolerances,
) -> Result<CurvatureSphereSet> {
    let n = map.n;
    for k in 1..=16 {
        let t = k as f64 * std::f64::consts::PI / 17.0;
        let back = LieTransform::parallel(n, t);
        let fwd = LieTransform::parallel(n, -t);
        let fm = fwd.matrix();
        let rotated = LiftJet {
            z1: fm * &jet.z1,
            z2: fm * &jet.z2,
            dz1: fm * &jet.dz1,
            dz2: fm * &jet.dz2,
        };
        let Ok(cj) = contact_jet_from_lift(&rotated) else { continue };
        let Ok(shape_data) = shape::shape_from_contact_jet(&cj) else { continue };
        let mut set = shape::spheres_from_shape(&cj, &shape_data, tols);
        let bm = back.matrix();
        for s in &mut set.spheres {
            let kc = bm * s.k.coords();
            let m = kc.len() - 1;
            s.pair = (kc[0], kc[m]);
            s.k = LieCoord::new_unchecked(kc, n);
        }
        shape::sort_spheres(&mut set);
        return Ok(set);
    }
    Err(GeomError::Inconclusive(
        "no parallel displacement produced an immersive projection".into(),
    ))
}

/// Residuals of the three defining conditions of a Legendre lift, maximized
/// (or minimized, for the rank margin) over a spread of interior samples.
#[derive(Debug, Clone)]
pub struct ContactConditionReport {
    /// Max normalized pairing among <z1,z1>, <z2,z2>, <z1,z2>: the span must
    /// be a line on the quadric.
    pub span_residual: f64,
    /// Min relative smallest singular value of the projected differential:
    /// no tangent direction may kill both dz1 and dz2 modulo the span.
    pub immersion_margin: f64,
    /// Max normalized <dz1(X), z2>: the contact (Legendre) condition.
    pub contact_residual: f64,
    pub samples_checked: usize,
    pub span_ok: bool,
    pub immersion_ok: bool,
    pub contact_ok: bool,
}

impl ContactConditionReport {
    pub fn pass(&self) -> bool {
        self.span_ok && self.immersion_ok && self.contact_ok
    }
}

/// Check the lift conditions over the interior (strided to at most ~4000
/// samples). Thresholds come from the rank tolerance.
pub fn check_contact_conditions(
    map: &LegendreMap,
    tols: &Tolerances,
) -> Result<ContactConditionReport> {
    let g = BilinearForm::lie(map.n());
    let eval = map.evaluator();
    let interior = map.grid().interior_flats(1);
    let stride = interior.len().div_ceil(4000).max(1);
    let mut span_residual = 0.0f64;
    let mut immersion_margin = f64::INFINITY;
    let mut contact_residual = 0.0f64;
    let mut checked = 0;
    for &flat in interior.iter().step_by(stride) {
        let u = map.grid().point(&map.grid().multi(flat));
        let jet = eval.jet(&u)?;
        checked += 1;
        let n1 = jet.z1.norm();
        let n2 = jet.z2.norm();
        span_residual = span_residual
            .max(g.norm2(&jet.z1).abs() / (n1 * n1))
            .max(g.norm2(&jet.z2).abs() / (n2 * n2))
            .max(g.apply(&jet.z1, &jet.z2).abs() / (n1 * n2));

        // Project the differentials off the span (Euclidean projection is
        // enough to detect a common kernel).
        let basis = orthonormalize(&[jet.z1.clone(), jet.z2.clone()], 1e-12);
        let d = jet.dz1.ncols();
        let dim = jet.z1.len();
        let mut stacked = DMatrix::zeros(2 * dim, d);
        let mut colscale = 0.0f64;
        for k in 0..d {
            let mut c1 = jet.dz1.column(k).clone_owned();
            let mut c2 = jet.dz2.column(k).clone_owned();
            for b in &basis {
                let a1 = c1.dot(b);
                c1 -= b * a1;
                let a2 = c2.dot(b);
                c2 -= b * a2;
            }
            for i in 0..dim {
                stacked[(i, k)] = c1[i];
                stacked[(dim + i, k)] = c2[i];
            }
            colscale = colscale.max(c1.norm()).max(c2.norm());

            let raw = jet.dz1.column(k).clone_owned();
            let denom = n2 * raw.norm().max(1e-6 * colscale.max(1.0));
            contact_residual =
                contact_residual.max(g.apply(&raw, &jet.z2).abs() / denom);
        }
        let svd = nalgebra::SVD::new(stacked, false, false);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        immersion_margin = immersion_margin.min(if smax == 0.0 { 0.0 } else { smin / smax });
    }
    let thr = tols.rank;
    Ok(ContactConditionReport {
        span_residual,
        immersion_margin,
        contact_residual,
        samples_checked: checked,
        span_ok: span_residual < thr,
        immersion_ok: immersion_margin > thr,
        contact_ok: contact_residual < thr,
    })
}

/// The immersion and contact conditions under their usual name.
pub fn check_pinkall_conditions(
    map: &LegendreMap,
    tols: &Tolerances,
) -> Result<ContactConditionReport> {
    check_contact_conditions(map, tols)
}

/// Result of scanning a pencil of parallel projections for singularities.
#[derive(Debug, Clone)]
pub struct FocalScan {
    /// Parameters t in [0, pi) where the projection of the parallel map at t
    /// is singular at this point.
    pub locations: Vec<f64>,
    /// Relative smallest singular value at each location.
    pub values: Vec<f64>,
}

impl FocalScan {
    pub fn count(&self) -> usize {
        self.locations.len()
    }
}

fn sigma_min(m: &DMatrix<f64>) -> f64 {
    let svd = nalgebra::SVD::new(m.clone(), false, false);
    svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Count the singular parallel projections through one point: the zeros in
/// t of the smallest singular value of cos(t) Jf - sin(t) Jxi over [0, pi).
/// Theory bounds the count by n - 1 for a Legendre lift.
pub fn focal_singularity_count(
    map: &LegendreMap,
    u: &[f64],
    scan: usize,
) -> Result<FocalScan> {
    let cj = map.contact_jet_at(u)?;
    let scan = scan.max(32);
    let step = std::f64::consts::PI / scan as f64;
    let gfun = |t: f64| {
        let m = &cj.jf * t.cos() - &cj.jxi * t.sin();
        sigma_min(&m)
    };
    let mut vals = Vec::with_capacity(scan);
    let mut scale = 0.0f64;
    for i in 0..scan {
        let t = i as f64 * step;
        let m = &cj.jf * t.cos() - &cj.jxi * t.sin();
        let svd = nalgebra::SVD::new(m, false, false);
        scale = scale.max(svd.singular_values.iter().cloned().fold(0.0f64, f64::max));
        vals.push(svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    if scale == 0.0 {
        return Err(GeomError::Degenerate("zero differential".into()));
    }
    // Local minima on the circle (t and t + pi give the same kernel).
    let mut locations = Vec::new();
    let mut values = Vec::new();
    for i in 0..scan {
        let prev = vals[(i + scan - 1) % scan];
        let next = vals[(i + 1) % scan];
        if vals[i] <= prev && vals[i] < next {
            // Ternary refinement on the bracket.
            let mut a = i as f64 * step - step;
            let mut b = i as f64 * step + step;
            for _ in 0..100 {
                let m1 = a + (b - a) / 3.0;
                let m2 = b - (b - a) / 3.0;
                if gfun(m1) < gfun(m2) {
                    b = m2;
                } else {
                    a = m1;
                }
            }
            let t = 0.5 * (a + b);
            let v = gfun(t) / scale;
            if v < 1e-6 {
                // The pencil has period pi; fold hits that refine to just
                // below the wrap back to zero.
                let mut tt = t.rem_euclid(std::f64::consts::PI);
                if std::f64::consts::PI - tt < 1e-9 {
                    tt = 0.0;
                }
                locations.push(tt);
                values.push(v);
            } else if v < 1e-3 {
                return Err(GeomError::Inconclusive(format!(
                    "near-singular projection at t = {t:.6} (relative sigma {v:.3e}); scan too coarse to resolve"
                )));
            }
        }
    }
    // Merge duplicates across the wrap.
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (&t, &v) in locations.iter().zip(values.iter()) {
        let dup = merged.iter().any(|&(mt, _)| {
            let d = (t - mt).abs();
            d < step || (std::f64::consts::PI - d) < step
        });
        if !dup {
            merged.push((t, v));
        }
    }
    merged.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let out = FocalScan {
        locations: merged.iter().map(|p| p.0).collect(),
        values: merged.iter().map(|p| p.1).collect(),
    };
    if out.count() > map.n() - 1 {
        return Err(GeomError::Inconclusive(format!(
            "{} singular projections exceed the bound {}",
            out.count(),
            map.n() - 1
        )));
    }
    Ok(out)
}
