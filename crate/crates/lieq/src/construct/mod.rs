//! Hypersurface generators: sphere products, cylinders, revolutions, tubes,
//! cones, sphere inversions, the prescribed-multiplicity pipeline, and the
//! constant-Psi principal-curvature profiles.

pub mod charts;

use std::sync::Arc;

use nalgebra::DVector;

use crate::config::Tolerances;
use crate::coords::EuclideanSphereObject;
use crate::dupin::{certify_dupin, DupinOptions, DupinReport};
use crate::error::{GeomError, Result};
use crate::legendre::{
    legendre_lift, AmbientModel, CurvatureField, Grid, SampledHypersurface, SurfaceChart,
};
use crate::transform::{LieTransform, MobiusTransform};

use charts::{
    hypersphere_jet, sphere_axes, ConeChart, CylinderChart, EuclideanFromLiftChart,
    ProductSpheresChart, RevolveChart, SpherePatchChart, SphericalTubeChart, TorusChart,
    TubeChart,
};

/// Node counts per axis kind. Flat cylinder axes carry no curvature
/// variation and get by with far fewer nodes.
#[derive(Debug, Clone, Copy)]
pub struct Resolution {
    pub periodic: usize,
    pub bounded: usize,
    pub flat: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { periodic: 64, bounded: 33, flat: 9 }
    }
}

/// A generated patch plus any non-fatal observations about it.
pub struct ConstructionOutput {
    pub surface: SampledHypersurface,
    pub warnings: Vec<String>,
}

impl ConstructionOutput {
    fn clean(surface: SampledHypersurface) -> Self {
        ConstructionOutput { surface, warnings: Vec::new() }
    }
}

/// The standard product S^q(r) x S^p(s) in S^{p+q+1}; an isoparametric
/// hypersurface with two constant principal values s/r and -r/s.
pub fn product_of_spheres(
    p: usize,
    q: usize,
    r: f64,
    s: f64,
    res: Resolution,
) -> Result<ConstructionOutput> {
    if p == 0 || q == 0 {
        return Err(GeomError::InvalidInput("sphere factors need dimension >= 1".into()));
    }
    if !(r > 0.0 && s > 0.0) || (r * r + s * s - 1.0).abs() > 1e-12 {
        return Err(GeomError::InvalidInput(format!(
            "radii must satisfy r^2 + s^2 = 1 with r, s > 0; got r = {r}, s = {s}"
        )));
    }
    let aq = sphere_axes(q, res.bounded, res.periodic);
    let ap = sphere_axes(p, res.bounded, res.periodic);
    let grid = Grid::new(
        [aq.dims, ap.dims].concat(),
        [aq.periodic, ap.periodic].concat(),
        [aq.ranges, ap.ranges].concat(),
    )?;
    let chart = Arc::new(ProductSpheresChart { p, q, r, s });
    let surface = SampledHypersurface::from_spherical_chart(chart, grid)?;
    Ok(ConstructionOutput::clean(surface))
}

fn require_hypersurface(h: &SampledHypersurface) -> Result<()> {
    if h.is_hypersurface() {
        Ok(())
    } else {
        Err(GeomError::Precondition("construction needs a hypersurface base".into()))
    }
}

fn require_euclidean(h: &SampledHypersurface) -> Result<()> {
    if h.ambient() == AmbientModel::EuclideanStereographic {
        Ok(())
    } else {
        Err(GeomError::Precondition("construction needs a Euclidean base".into()))
    }
}

/// Sweep a sampled base over appended grid axes. The closure receives the
/// base position/normal pair and the full parameter point and returns the
/// new sample.
fn sweep_samples(
    base_grid: &Grid,
    grid: &Grid,
    points: &[DVector<f64>],
    normals: &[DVector<f64>],
    mut node: impl FnMut(&DVector<f64>, &DVector<f64>, &[f64]) -> (DVector<f64>, DVector<f64>),
) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let bd = base_grid.d();
    let mut f = Vec::with_capacity(grid.len());
    let mut xi = Vec::with_capacity(grid.len());
    for flat in 0..grid.len() {
        let multi = grid.multi(flat);
        let bflat = base_grid.flat(&multi[..bd]);
        let u = grid.point(&multi);
        let (fv, xv) = node(&points[bflat], &normals[bflat], &u);
        f.push(fv);
        xi.push(xv);
    }
    (f, xi)
}

/// Fraction of interior samples carrying a flat-chart principal value
/// inside the given band around zero, over the field of the base.
fn zero_value_fraction(field: &CurvatureField, band: f64, tols: &Tolerances) -> f64 {
    let mut with_zero = 0usize;
    let mut total = 0usize;
    for (_, set) in field.interior_sets() {
        total += 1;
        let zero = set.spheres.iter().any(|s| {
            let v = s.euclidean_value(tols);
            v.is_finite() && v.abs() < band
        });
        if zero {
            with_zero += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        with_zero as f64 / total as f64
    }
}

/// Product with R^m. Adds the principal value zero with multiplicity m; the
/// result is proper Dupin only when zero was not already a sporadic
/// principal value of the base.
pub fn cylinder(
    base: &SampledHypersurface,
    m: usize,
    extent: f64,
    res: Resolution,
    tols: &Tolerances,
) -> Result<ConstructionOutput> {
    if m == 0 {
        return Err(GeomError::InvalidInput("cylinder needs m >= 1".into()));
    }
    if !(extent > 0.0) {
        return Err(GeomError::InvalidInput("cylinder extent must be positive".into()));
    }
    require_hypersurface(base)?;
    require_euclidean(base)?;
    let mut warnings = Vec::new();
    let lift = legendre_lift(base)?;
    let field = lift.curvature_field(tols)?;
    let zero_frac = zero_value_fraction(&field, 0.04, tols);
    if zero_frac > 0.0 && zero_frac < 0.99 {
        warnings.push(format!(
            "zero is a principal value on {:.1}% of the base; the cylinder will not be proper Dupin",
            100.0 * zero_frac
        ));
    }
    let g = base.grid();
    let mut dims = g.dims().to_vec();
    let mut periodic = g.periodic().to_vec();
    let mut ranges = g.ranges().to_vec();
    for _ in 0..m {
        dims.push(res.flat);
        periodic.push(false);
        ranges.push((-extent, extent));
    }
    let grid = Grid::new(dims, periodic, ranges)?;
    let surface = match base.euclidean_chart() {
        Some(chart) => SampledHypersurface::from_euclidean_chart(
            Arc::new(CylinderChart { base: chart.clone(), m }),
            grid,
        )?,
        None => {
            let (points, normals) = base.euclidean_samples()?;
            let bd = base.d();
            let n = base.n();
            let (f, xi) = sweep_samples(base.grid(), &grid, &points, &normals, |p, nu, u| {
                let mut fv = DVector::zeros(n + m);
                let mut xv = DVector::zeros(n + m);
                for i in 0..n {
                    fv[i] = p[i];
                    xv[i] = nu[i];
                }
                for w in 0..m {
                    fv[n + w] = u[bd + w];
                }
                (fv, xv)
            });
            SampledHypersurface::from_samples(
                grid,
                f,
                xi,
                AmbientModel::EuclideanStereographic,
                None,
            )?
        }
    };
    Ok(ConstructionOutput { surface, warnings })
}

/// Rotational sweep of a base whose last coordinate is positive, around the
/// codimension-two axis where the last two output coordinates vanish.
pub fn revolve(
    base: &SampledHypersurface,
    res: Resolution,
) -> Result<ConstructionOutput> {
    require_hypersurface(base)?;
    require_euclidean(base)?;
    let (points, normals) = base.euclidean_samples()?;
    let last = points[0].len() - 1;
    let min_dist = points.iter().map(|x| x[last]).fold(f64::INFINITY, f64::min);
    if min_dist <= 1e-8 {
        return Err(GeomError::Precondition(format!(
            "base touches the axis of revolution (min distance {min_dist:.3e})"
        )));
    }
    let g = base.grid();
    let mut dims = g.dims().to_vec();
    let mut periodic = g.periodic().to_vec();
    let mut ranges = g.ranges().to_vec();
    dims.push(res.periodic);
    periodic.push(true);
    ranges.push((0.0, std::f64::consts::TAU));
    let grid = Grid::new(dims, periodic, ranges)?;
    let surface = match base.euclidean_chart() {
        Some(chart) => SampledHypersurface::from_euclidean_chart(
            Arc::new(RevolveChart { base: chart.clone() }),
            grid,
        )?,
        None => {
            let n = base.n();
            let (f, xi) = sweep_samples(base.grid(), &grid, &points, &normals, |p, nu, u| {
                let (sp, cp) = u[u.len() - 1].sin_cos();
                let rot = |v: &DVector<f64>| {
                    let mut out = DVector::zeros(n + 1);
                    for i in 0..last {
                        out[i] = v[i];
                    }
                    out[last] = v[last] * cp;
                    out[n] = v[last] * sp;
                    out
                };
                (rot(p), rot(nu))
            });
            SampledHypersurface::from_samples(
                grid,
                f,
                xi,
                AmbientModel::EuclideanStereographic,
                None,
            )?
        }
    };
    Ok(ConstructionOutput::clean(surface))
}

/// Smallest focal distance over the field: the reciprocal of the largest
/// flat-chart |principal value| for a Euclidean base, the closest cotangent
/// root in either normal direction for a spherical one. Point spheres give
/// distance zero.
fn min_focal_distance(field: &CurvatureField, ambient: AmbientModel, tols: &Tolerances) -> f64 {
    let mut dist = f64::INFINITY;
    for (_, set) in field.interior_sets() {
        for s in &set.spheres {
            let d = match ambient {
                AmbientModel::EuclideanStereographic => {
                    let v = s.euclidean_value(tols);
                    if v == 0.0 { f64::INFINITY } else { 1.0 / v.abs() }
                }
                AmbientModel::Spherical => {
                    let v = s.value();
                    if v.is_finite() {
                        f64::atan2(1.0, v.abs())
                    } else {
                        0.0
                    }
                }
            };
            dist = dist.min(d);
        }
    }
    dist
}

/// Tube of radius `eps` around a hypersurface patch, adding m flat normal
/// directions (Euclidean input) or m tangent great-circle directions
/// (spherical input). Adds the principal value -1/eps, respectively
/// -cot(eps), with multiplicity m.
pub fn tube(
    base: &SampledHypersurface,
    eps: f64,
    m: usize,
    res: Resolution,
    tols: &Tolerances,
) -> Result<ConstructionOutput> {
    if m == 0 {
        return Err(GeomError::InvalidInput("tube needs m >= 1".into()));
    }
    if !(eps > 0.0) {
        return Err(GeomError::InvalidInput("tube radius must be positive".into()));
    }
    require_hypersurface(base)?;
    let lift = legendre_lift(base)?;
    let field = lift.curvature_field(tols)?;
    let focal = min_focal_distance(&field, base.ambient(), tols);
    if eps >= focal {
        return Err(GeomError::Precondition(format!(
            "tube radius {eps} reaches the focal set at distance {focal:.4}"
        )));
    }
    let g = base.grid();
    let mut dims = g.dims().to_vec();
    let mut periodic = g.periodic().to_vec();
    let mut ranges = g.ranges().to_vec();
    // One full normal circle when m = 1; hypersphere axes otherwise.
    let axes = sphere_axes(m, res.bounded, res.periodic);
    dims.extend(axes.dims);
    periodic.extend(axes.periodic);
    ranges.extend(axes.ranges);
    let grid = Grid::new(dims, periodic, ranges)?;
    let bd = base.d();
    let surface = match base.ambient() {
        AmbientModel::EuclideanStereographic => match base.euclidean_chart() {
            Some(chart) => SampledHypersurface::from_euclidean_chart(
                Arc::new(TubeChart { base: chart.clone(), eps, m }),
                grid,
            )?,
            None => {
                let (points, normals) = base.euclidean_samples()?;
                let n = base.n();
                let (f, xi) = sweep_samples(base.grid(), &grid, &points, &normals, |p, nu, u| {
                    let (w, _) = hypersphere_jet(&u[bd..]);
                    let mut fv = DVector::zeros(n + m);
                    let mut xv = DVector::zeros(n + m);
                    for i in 0..n {
                        fv[i] = p[i] + eps * w[0] * nu[i];
                        xv[i] = w[0] * nu[i];
                    }
                    for t in 0..m {
                        fv[n + t] = eps * w[t + 1];
                        xv[n + t] = w[t + 1];
                    }
                    (fv, xv)
                });
                SampledHypersurface::from_samples(
                    grid,
                    f,
                    xi,
                    AmbientModel::EuclideanStereographic,
                    None,
                )?
            }
        },
        AmbientModel::Spherical => {
            if eps >= std::f64::consts::FRAC_PI_2 {
                return Err(GeomError::InvalidInput(
                    "spherical tube radius must stay below pi/2".into(),
                ));
            }
            match base.spherical_chart() {
                Some(chart) => SampledHypersurface::from_spherical_chart(
                    Arc::new(SphericalTubeChart { base: chart.clone(), eps, m }),
                    grid,
                )?,
                None => {
                    let (se, ce) = eps.sin_cos();
                    let amb = base.n() + 1;
                    let (f, xi) = sweep_samples(
                        base.grid(),
                        &grid,
                        base.positions(),
                        base.normals(),
                        |p, nu, u| {
                            let (w, _) = hypersphere_jet(&u[bd..]);
                            let mut fv = DVector::zeros(amb + m);
                            let mut xv = DVector::zeros(amb + m);
                            for i in 0..amb {
                                let zeta = w[0] * nu[i];
                                fv[i] = ce * p[i] + se * zeta;
                                xv[i] = -se * p[i] + ce * zeta;
                            }
                            for t in 0..m {
                                fv[amb + t] = se * w[t + 1];
                                xv[amb + t] = ce * w[t + 1];
                            }
                            (fv, xv)
                        },
                    );
                    SampledHypersurface::from_samples(grid, f, xi, AmbientModel::Spherical, None)?
                }
            }
        }
    };
    Ok(ConstructionOutput::clean(surface))
}

/// Cone over a hypersurface of the unit sphere, swept radially between t0
/// and t1. The vertex stays outside the domain.
pub fn cone(
    base: &SampledHypersurface,
    t0: f64,
    t1: f64,
    res: Resolution,
) -> Result<ConstructionOutput> {
    if base.ambient() != AmbientModel::Spherical {
        return Err(GeomError::Precondition("cone base must live on the unit sphere".into()));
    }
    if !(t0 > 0.0 && t1 > t0) {
        return Err(GeomError::InvalidInput(format!(
            "radial window must satisfy 0 < t0 < t1; got [{t0}, {t1}]"
        )));
    }
    require_hypersurface(base)?;
    let g = base.grid();
    let mut dims = g.dims().to_vec();
    let mut periodic = g.periodic().to_vec();
    let mut ranges = g.ranges().to_vec();
    dims.push(res.bounded);
    periodic.push(false);
    ranges.push((t0, t1));
    let grid = Grid::new(dims, periodic, ranges)?;
    let surface = match base.spherical_chart() {
        Some(chart) => SampledHypersurface::from_euclidean_chart(
            Arc::new(ConeChart { base: chart.clone() }),
            grid,
        )?,
        None => {
            let (f, xi) = sweep_samples(
                base.grid(),
                &grid,
                base.positions(),
                base.normals(),
                |p, nu, u| (p * u[u.len() - 1], nu.clone()),
            );
            SampledHypersurface::from_samples(
                grid,
                f,
                xi,
                AmbientModel::EuclideanStereographic,
                None,
            )?
        }
    };
    Ok(ConstructionOutput::clean(surface))
}

/// Conformal inversion in the sphere |x - center| = radius, realized as the
/// corresponding Möbius reflection acting on the Legendre lift followed by
/// projection. Analytic charts are carried through the transform.
pub fn sphere_inversion(
    h: &SampledHypersurface,
    center: &DVector<f64>,
    radius: f64,
) -> Result<ConstructionOutput> {
    if !(radius > 0.0) {
        return Err(GeomError::InvalidInput("inversion radius must be positive".into()));
    }
    if center.len() != h.n() {
        return Err(GeomError::DimensionMismatch { expected: h.n(), got: center.len() });
    }
    let (points, _) = h.euclidean_samples()?;
    let min_dist = points
        .iter()
        .map(|x| (x - center).norm())
        .fold(f64::INFINITY, f64::min);
    if min_dist < 1e-6 * (1.0 + center.norm()) {
        return Err(GeomError::Precondition(format!(
            "inversion center lies on the hypersurface (distance {min_dist:.3e})"
        )));
    }
    let mob = MobiusTransform::reflection_in(&EuclideanSphereObject::sphere(
        center.clone(),
        radius,
    ))?;
    let b = LieTransform::from_mobius(&mob);
    let lift = legendre_lift(h)?;
    let moved = lift.transformed(&b)?;
    let grid = h.grid().clone();
    let surface = match moved.chart() {
        Some(chart) => SampledHypersurface::from_euclidean_chart(
            Arc::new(EuclideanFromLiftChart { lift: chart.clone() }),
            grid,
        )?,
        None => {
            let proj = moved.euclidean_projection()?;
            if !proj.improper.is_empty() {
                return Err(GeomError::Degenerate(
                    "inverted patch passes through the point at infinity".into(),
                ));
            }
            let points: Vec<_> = proj.points.into_iter().map(Option::unwrap).collect();
            let normals: Vec<_> = proj.normals.into_iter().map(Option::unwrap).collect();
            SampledHypersurface::from_samples(
                grid,
                points,
                normals,
                AmbientModel::EuclideanStereographic,
                Some(h.base_axes()),
            )?
        }
    };
    Ok(ConstructionOutput::clean(surface))
}

/// A tube in R^4 around the torus of
/// revolution in R^3. Dupin but not proper: the curvature count drops from
/// three to two where the tube's normal angle aligns with the fourth axis.
pub fn tube_over_torus(eps: f64, res: Resolution, tols: &Tolerances) -> Result<ConstructionOutput> {
    let grid = Grid::periodic_angles(vec![res.periodic, res.periodic]);
    let base = SampledHypersurface::from_euclidean_chart(
        Arc::new(TorusChart { a: 2.0, b: 1.0 }),
        grid,
    )?;
    tube(&base, eps, 1, res, tols)
}

/// Outcome of the prescribed-multiplicity pipeline, with its own
/// certification attached.
pub struct PinkallOutput {
    pub surface: SampledHypersurface,
    pub report: DupinReport,
    /// Observed multiplicities in ascending principal-value order.
    pub multiplicities: Vec<usize>,
    pub inversion_centers: Vec<DVector<f64>>,
    pub warnings: Vec<String>,
}

/// Smallest flat-chart |principal value| over a field, point spheres
/// excluded (an infinite principal value is not a vanishing one).
fn min_abs_kappa(field: &CurvatureField, tols: &Tolerances) -> f64 {
    let mut kmin = f64::INFINITY;
    for (_, set) in field.interior_sets() {
        for s in &set.spheres {
            let v = s.euclidean_value(tols);
            if v.is_finite() {
                kmin = kmin.min(v.abs());
            }
        }
    }
    kmin
}

/// Coarse copy for candidate scoring; keeps ranges, drops resolution.
fn coarse_copy(h: &SampledHypersurface, cap: usize) -> Result<SampledHypersurface> {
    let g = h.grid();
    let dims: Vec<usize> = g.dims().iter().map(|&d| d.min(cap).max(4)).collect();
    h.resample(Grid::new(dims, g.periodic().to_vec(), g.ranges().to_vec())?)
}

/// Find an inversion making every principal value bounded away from zero on
/// the patch. Candidates sit on rays from the sample cloud center; the
/// first hit wins.
fn invert_to_nonvanishing(
    h: &SampledHypersurface,
    tols: &Tolerances,
) -> Result<(SampledHypersurface, DVector<f64>)> {
    let n = h.n();
    let (points, _) = h.euclidean_samples()?;
    let mut center = DVector::zeros(n);
    for x in &points {
        center += x;
    }
    center /= points.len() as f64;
    let spread = points
        .iter()
        .map(|x| (x - &center).norm())
        .fold(0.0f64, f64::max)
        .max(1e-3);

    let mut dirs: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        for sgn in [1.0, -1.0] {
            let mut e = DVector::zeros(n);
            e[i] = sgn;
            dirs.push(e);
        }
    }
    for i in 0..n.min(3) {
        for j in i + 1..n.min(3) {
            let mut e = DVector::zeros(n);
            e[i] = std::f64::consts::FRAC_1_SQRT_2;
            e[j] = std::f64::consts::FRAC_1_SQRT_2;
            dirs.push(e);
        }
    }

    let coarse = coarse_copy(h, 9)?;
    for scale in [1.8, 2.8, 4.5, 7.0] {
        let dist = scale * spread;
        for dir in &dirs {
            let c = &center + dir * dist;
            let min_gap = points.iter().map(|x| (x - &c).norm()).fold(f64::INFINITY, f64::min);
            if min_gap < 0.3 * dist {
                continue;
            }
            let Ok(trial) = sphere_inversion(&coarse, &c, dist) else { continue };
            let Ok(lift) = legendre_lift(&trial.surface) else { continue };
            let Ok(field) = lift.curvature_field(tols) else { continue };
            if min_abs_kappa(&field, tols) > 0.05 {
                let full = sphere_inversion(h, &c, dist)?;
                return Ok((full.surface, c));
            }
        }
    }
    Err(GeomError::Inconclusive(
        "no inversion center found making all principal values nonvanishing".into(),
    ))
}

/// Build a proper Dupin hypersurface in R^{1 + sum(m)} with the requested
/// curvature-sphere multiplicities, by the inductive cylinder/inversion
/// recipe, and certify it.
pub fn pinkall_generator(mults: &[usize], tols: &Tolerances) -> Result<PinkallOutput> {
    if mults.is_empty() || mults.iter().any(|&m| m == 0) {
        return Err(GeomError::InvalidInput(
            "multiplicities must be nonempty and positive".into(),
        ));
    }
    let g = mults.len();
    let res = Resolution { periodic: 48, bounded: 17, flat: 9 };
    let mut warnings = Vec::new();
    let mut centers = Vec::new();

    // Base surface with the first family (or first two) in place; zero may
    // be a principal value only right after a cylinder step.
    let (mut surface, mut has_zero, next) = if g >= 2 && mults[0] == 1 && mults[1] == 1 {
        // Torus window with both principal values bounded away from zero.
        let grid = Grid::new(
            vec![res.periodic, res.bounded],
            vec![true, false],
            vec![(0.0, std::f64::consts::TAU), (-1.35, 1.35)],
        )?;
        let s = SampledHypersurface::from_euclidean_chart(
            Arc::new(TorusChart { a: 2.0, b: 1.0 }),
            grid,
        )?;
        (s, false, 2)
    } else {
        let axes = sphere_axes(mults[0], res.bounded, res.periodic);
        let grid = Grid::new(axes.dims, axes.periodic, axes.ranges)?;
        let s = SampledHypersurface::from_euclidean_chart(
            Arc::new(SpherePatchChart {
                center: DVector::zeros(mults[0] + 1),
                radius: 1.0,
            }),
            grid,
        )?;
        (s, false, 1)
    };

    for &m in &mults[next..] {
        if has_zero {
            let (inverted, c) = invert_to_nonvanishing(&surface, tols)?;
            centers.push(c);
            surface = inverted;
        }
        let out = cylinder(&surface, m, 0.7, res, tols)?;
        warnings.extend(out.warnings);
        surface = out.surface;
        has_zero = true;
    }

    let lift = legendre_lift(&surface)?;
    let field = lift.curvature_field(tols)?;
    let report = certify_dupin(&lift, &field, &DupinOptions::default(), tols)?;
    let mut want = mults.to_vec();
    want.sort_unstable();
    let mut got = report.multiplicities.clone();
    got.sort_unstable();
    if got != want {
        return Err(GeomError::Inconclusive(format!(
            "pipeline produced multiplicities {:?}, requested {:?}",
            report.multiplicities, mults
        )));
    }
    if !report.proper {
        return Err(GeomError::Inconclusive(format!(
            "pipeline output failed proper-Dupin certification: residuals {:?}",
            report.family_residuals
        )));
    }
    let multiplicities = report.multiplicities.clone();
    Ok(PinkallOutput { surface, report, multiplicities, inversion_centers: centers, warnings })
}

/// Principal-curvature profile of the tube construction over a g = 3
/// isoparametric hypersurface: three finite values plus the tube value at
/// infinity, with the Lie curvature pinned by theta alone.
#[derive(Debug, Clone)]
pub struct PsiProfile {
    pub theta: f64,
    /// mu_i = cot(theta + (3 - i) pi / 3), ascending.
    pub mu: [f64; 3],
    /// Psi = 1/2 + (sqrt 3 / 2) tan(theta - pi/6).
    pub psi: f64,
}

impl PsiProfile {
    /// Finite principal values at normal angle alpha, plus the infinite
    /// fourth value.
    pub fn kappas(&self, alpha: f64) -> [f64; 4] {
        let c = alpha.cos();
        [c * self.mu[0], c * self.mu[1], c * self.mu[2], f64::INFINITY]
    }
}

pub fn constant_psi_profile(theta: f64) -> Result<PsiProfile> {
    let third = std::f64::consts::FRAC_PI_3;
    if !(theta > 0.0 && theta < third) {
        return Err(GeomError::InvalidInput(format!(
            "theta = {theta} outside (0, pi/3)"
        )));
    }
    let mu = [
        1.0 / (theta + 2.0 * third).tan(),
        1.0 / (theta + third).tan(),
        1.0 / theta.tan(),
    ];
    let psi = 0.5 + (3.0f64.sqrt() / 2.0) * (theta - std::f64::consts::FRAC_PI_6).tan();
    Ok(PsiProfile { theta, mu, psi })
}
