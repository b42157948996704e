//! Curvature-sphere invariants and certification: Lie and Möbius curvatures,
//! the Dupin and proper-Dupin certifier, the timelike-line isoparametric
//! criterion, Münzner's radius spacing, and reducibility detection through
//! polar signatures of curvature-sphere spans.

use nalgebra::{DMatrix, DVector};

use crate::config::Tolerances;
use crate::coords::LieCoord;
use crate::error::{GeomError, Result};
use crate::legendre::shape::{CurvatureSphere, CurvatureSphereSet};
use crate::legendre::{CurvatureField, LegendreMap};
use crate::linalg::{
    jacobi_symmetric_eigen, orthonormalize, polar_subspace, projective_sin_distance,
    subspace_signature, BilinearForm, ProjectivePoint, ProjectiveSubspace, RowSpanSvd,
};

/// Cross-ratio [a,b; c,d] of four points of a projective line given as
/// homogeneous pairs, via 2x2 determinants. Infinity is the pair (1, 0) and
/// needs no special casing; on finite values (x, 1) this reduces to
/// (a-b)(d-c) / ((a-c)(d-b)).
pub fn cross_ratio(
    a: (f64, f64),
    b: (f64, f64),
    c: (f64, f64),
    d: (f64, f64),
) -> Result<f64> {
    let norm = |p: (f64, f64)| -> Result<(f64, f64)> {
        let len = p.0.hypot(p.1);
        if len == 0.0 {
            return Err(GeomError::ZeroVector);
        }
        Ok((p.0 / len, p.1 / len))
    };
    let pts = [norm(a)?, norm(b)?, norm(c)?, norm(d)?];
    let det = |x: (f64, f64), y: (f64, f64)| x.0 * y.1 - x.1 * y.0;
    for i in 0..4 {
        for j in i + 1..4 {
            if det(pts[i], pts[j]).abs() < 1e-12 {
                return Err(GeomError::Degenerate(format!(
                    "cross-ratio needs pairwise distinct points; arguments {i} and {j} coincide"
                )));
            }
        }
    }
    Ok(det(pts[0], pts[1]) * det(pts[3], pts[2])
        / (det(pts[0], pts[2]) * det(pts[3], pts[1])))
}

/// Cross-ratio of four extended reals; `f64::INFINITY` (either sign) maps to
/// the pair (1, 0).
pub fn cross_ratio_of_values(a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    let pair = |x: f64| if x.is_finite() { (x, 1.0) } else { (1.0, 0.0) };
    cross_ratio(pair(a), pair(b), pair(c), pair(d))
}

/// Lie curvatures of one curvature-sphere set: the cross-ratio of every
/// 4-subset of spheres in ascending order (infinite sphere last). Empty for
/// g < 4; for g = 4 the single entry is the classical Psi.
pub fn lie_curvatures(set: &CurvatureSphereSet) -> Result<Vec<([usize; 4], f64)>> {
    let g = set.g();
    let mut out = Vec::new();
    if g < 4 {
        return Ok(out);
    }
    for h in 0..g {
        for i in h + 1..g {
            for j in i + 1..g {
                for k in j + 1..g {
                    let psi = cross_ratio(
                        set.spheres[h].pair,
                        set.spheres[i].pair,
                        set.spheres[j].pair,
                        set.spheres[k].pair,
                    )?;
                    out.push(([h, i, j, k], psi));
                }
            }
        }
    }
    Ok(out)
}

/// Lie curvatures at each interior sample of a curvature field. Samples
/// where extraction failed are skipped.
pub fn lie_curvature_profile(field: &CurvatureField) -> Vec<(usize, Vec<([usize; 4], f64)>)> {
    field
        .interior_sets()
        .filter_map(|(flat, set)| lie_curvatures(set).ok().map(|psi| (flat, psi)))
        .collect()
}

/// Moebius curvature Phi = (kh - ki) / (kh - kj) of three distinct finite
/// principal values. Unlike the Lie curvature this is only a Moebius
/// invariant: parallel transformations change it.
pub fn mobius_curvature(kh: f64, ki: f64, kj: f64) -> Result<f64> {
    for v in [kh, ki, kj] {
        if !v.is_finite() {
            return Err(GeomError::InvalidInput(
                "Moebius curvature needs finite principal values".into(),
            ));
        }
    }
    let scale = kh.abs().max(ki.abs()).max(kj.abs()).max(1.0);
    if (kh - ki).abs() < 1e-12 * scale
        || (kh - kj).abs() < 1e-12 * scale
        || (ki - kj).abs() < 1e-12 * scale
    {
        return Err(GeomError::Degenerate(
            "Moebius curvature needs three distinct values".into(),
        ));
    }
    Ok((kh - ki) / (kh - kj))
}

/// Radii and principal values of an isoparametric hypersurface with g
/// curvature spheres: the radii are equally spaced by pi/g.
#[derive(Debug, Clone)]
pub struct MunznerData {
    /// rho_i = rho_1 + (i-1) pi / g, all in (0, pi).
    pub radii: Vec<f64>,
    /// kappa_i = cot(rho_i), descending.
    pub values: Vec<f64>,
    /// False when g is outside {1, 2, 3, 4, 6}, the only counts that occur
    /// for isoparametric hypersurfaces in spheres. Reported, not enforced.
    pub standard_g: bool,
}

pub fn munzner_radii(g: usize, rho1: f64) -> Result<MunznerData> {
    if g == 0 {
        return Err(GeomError::InvalidInput("need g >= 1".into()));
    }
    let step = std::f64::consts::PI / g as f64;
    if rho1 <= 0.0 || rho1 >= step {
        return Err(GeomError::InvalidInput(format!(
            "rho_1 = {rho1} outside (0, pi/{g})"
        )));
    }
    let radii: Vec<f64> = (0..g).map(|i| rho1 + i as f64 * step).collect();
    let values = radii.iter().map(|r| 1.0 / r.tan()).collect();
    Ok(MunznerData { radii, values, standard_g: matches!(g, 1 | 2 | 3 | 4 | 6) })
}

/// Options for the Dupin certifier.
#[derive(Debug, Clone)]
pub struct DupinOptions {
    /// Curvature-line leaves traced per multiplicity-one family.
    pub leaves_per_family: usize,
    /// Leaf length in units of the smallest grid cell.
    pub leaf_cells: usize,
    /// Nodes sampled per family for directional-derivative checks.
    pub fd_nodes_per_family: usize,
}

impl Default for DupinOptions {
    fn default() -> Self {
        DupinOptions { leaves_per_family: 6, leaf_cells: 8, fd_nodes_per_family: 64 }
    }
}

/// Outcome of the Dupin certification.
#[derive(Debug, Clone)]
pub struct DupinReport {
    /// Count of distinct curvature spheres per grid node (interior only).
    pub g_per_sample: Vec<Option<usize>>,
    /// The dominant g among interior samples.
    pub modal_g: usize,
    /// Fraction of interior samples showing the modal g.
    pub modal_fraction: f64,
    /// Interior nodes where g differs from the modal value.
    pub locus: Vec<usize>,
    /// Max projective drift of the curvature sphere per unit leaf length
    /// (multiplicity one) or per directional derivative (multiplicity > 1),
    /// per family, ascending family order.
    pub family_residuals: Vec<f64>,
    /// Multiplicities of the modal families.
    pub multiplicities: Vec<usize>,
    pub dupin: bool,
    pub proper: bool,
    /// Drift tolerance actually applied (analytic vs sampled data).
    pub tol_used: f64,
    pub leaves_traced: usize,
    pub continuation_failures: usize,
}

fn modal_g(field: &CurvatureField) -> Result<(usize, f64, Vec<usize>)> {
    let mut counts: Vec<(usize, usize)> = Vec::new();
    let mut total = 0usize;
    for (_, set) in field.interior_sets() {
        total += 1;
        let g = set.g();
        match counts.iter_mut().find(|(gg, _)| *gg == g) {
            Some((_, c)) => *c += 1,
            None => counts.push((g, 1)),
        }
    }
    if total == 0 {
        return Err(GeomError::Precondition("no interior curvature data".into()));
    }
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let (g, c) = counts[0];
    let locus = field
        .interior_sets()
        .filter(|(_, set)| set.g() != g)
        .map(|(flat, _)| flat)
        .collect();
    Ok((g, c as f64 / total as f64, locus))
}

/// Nearest sphere of `set` to `k` in projective distance.
fn match_family<'a>(set: &'a CurvatureSphereSet, k: &LieCoord) -> (usize, &'a CurvatureSphere, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, s) in set.spheres.iter().enumerate() {
        let d = projective_sin_distance(k.coords(), s.k.coords());
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    (best, &set.spheres[best], best_d)
}

/// Unit principal direction of a multiplicity-one match, sign-aligned with
/// `prev`. None when the family cannot be continued at `u`.
fn leaf_direction(
    map: &LegendreMap,
    u: &[f64],
    k_ref: &LieCoord,
    prev: Option<&DVector<f64>>,
    tols: &Tolerances,
) -> Option<(DVector<f64>, LieCoord)> {
    let set = map.curvature_spheres_at(u, tols).ok()?;
    let (_, sphere, dist) = match_family(&set, k_ref);
    if dist > 0.3 || sphere.multiplicity != 1 {
        return None;
    }
    let mut dir = sphere.directions.column(0).clone_owned();
    let len = dir.norm();
    if len == 0.0 {
        return None;
    }
    dir /= len;
    if let Some(p) = prev {
        if dir.dot(p) < 0.0 {
            dir = -dir;
        }
    }
    Some((dir, sphere.k.clone()))
}

struct LeafOutcome {
    rate: f64,
    completed: bool,
}

/// Trace one curvature line of a multiplicity-one family by fourth-order
/// stepping of the normalized principal direction field, measuring the
/// projective drift of the curvature sphere relative to the leaf start.
fn trace_leaf(
    map: &LegendreMap,
    start: &[f64],
    k_start: &LieCoord,
    steps: usize,
    h: f64,
    tols: &Tolerances,
) -> Option<LeafOutcome> {
    let d = start.len();
    let mut u = start.to_vec();
    let Some((mut dir, mut k_ref)) = leaf_direction(map, &u, k_start, None, tols) else {
        return None;
    };
    let mut max_drift = 0.0f64;
    let mut len = 0.0f64;
    let mut done = 0usize;
    for _ in 0..steps {
        let eval = |point: &[f64], align: &DVector<f64>| -> Option<DVector<f64>> {
            let mut p = point.to_vec();
            if !map.grid().normalize_point(&mut p) {
                return None;
            }
            leaf_direction(map, &p, &k_ref, Some(align), tols).map(|(v, _)| v)
        };
        let k1 = dir.clone();
        let at = |base: &[f64], step_dir: &DVector<f64>, scale: f64| -> Vec<f64> {
            (0..d).map(|i| base[i] + scale * step_dir[i]).collect()
        };
        let Some(k2) = eval(&at(&u, &k1, 0.5 * h), &k1) else { break };
        let Some(k3) = eval(&at(&u, &k2, 0.5 * h), &k2) else { break };
        let Some(k4) = eval(&at(&u, &k3, h), &k3) else { break };
        for i in 0..d {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !map.grid().normalize_point(&mut u) {
            break;
        }
        let Some((ndir, nk)) = leaf_direction(map, &u, &k_ref, Some(&k4), tols) else {
            break;
        };
        dir = ndir;
        k_ref = nk;
        len += h;
        done += 1;
        let drift = projective_sin_distance(k_ref.coords(), k_start.coords());
        max_drift = max_drift.max(drift);
    }
    if done == 0 {
        return None;
    }
    Some(LeafOutcome { rate: max_drift / len, completed: done == steps })
}

/// Euclidean-orthonormal basis of a family's principal space.
fn principal_basis(s: &CurvatureSphere) -> Vec<DVector<f64>> {
    let cols: Vec<DVector<f64>> =
        (0..s.directions.ncols()).map(|c| s.directions.column(c).clone_owned()).collect();
    orthonormalize(&cols, 1e-10)
}

/// Certify the Dupin and proper-Dupin properties of a lift over its sampled
/// curvature field. Multiplicity-one families are checked by integrating
/// their curvature lines and watching the curvature sphere; higher
/// multiplicities by directional derivatives into the principal space
/// (exact grid differences along aligned axes, small offsets otherwise).
pub fn certify_dupin(
    map: &LegendreMap,
    field: &CurvatureField,
    opts: &DupinOptions,
    tols: &Tolerances,
) -> Result<DupinReport> {
    let grid = map.grid();
    let (modal, fraction, locus) = modal_g(field)?;
    let mut g_per_sample: Vec<Option<usize>> = vec![None; grid.len()];
    for (flat, set) in field.interior_sets() {
        g_per_sample[flat] = Some(set.g());
    }
    let modal_flats: Vec<usize> = field
        .interior_sets()
        .filter(|(_, set)| set.g() == modal)
        .map(|(flat, _)| flat)
        .collect();
    if modal_flats.is_empty() {
        return Err(GeomError::Precondition("no samples with the modal g".into()));
    }
    let multiplicities = field.sets[modal_flats[0]].as_ref().unwrap().multiplicities();

    let analytic = map.has_chart();
    let tol = if analytic { tols.dupin_drift } else { tols.dupin_drift_fd };
    let h = grid.min_spacing() / 4.0;
    let steps = opts.leaf_cells * 4;
    let mut family_residuals = vec![0.0f64; modal];
    let mut leaves_traced = 0usize;
    let mut continuation_failures = 0usize;

    for fam in 0..modal {
        if multiplicities[fam] == 1 {
            let stride = modal_flats.len().div_ceil(opts.leaves_per_family).max(1);
            let mut usable = 0usize;
            for &flat in modal_flats.iter().step_by(stride) {
                let start = grid.point(&grid.multi(flat));
                let k_start = field.sets[flat].as_ref().unwrap().spheres[fam].k.clone();
                match trace_leaf(map, &start, &k_start, steps, h, tols) {
                    Some(out) => {
                        if !out.completed {
                            continuation_failures += 1;
                        }
                        family_residuals[fam] = family_residuals[fam].max(out.rate);
                        usable += 1;
                        leaves_traced += 1;
                    }
                    None => continuation_failures += 1,
                }
            }
            if usable == 0 {
                return Err(GeomError::Inconclusive(format!(
                    "no curvature line of family {fam} could be traced"
                )));
            }
        } else {
            let stride = modal_flats.len().div_ceil(opts.fd_nodes_per_family).max(1);
            let mut checked = 0usize;
            for &flat in modal_flats.iter().step_by(stride) {
                let set = field.sets[flat].as_ref().unwrap();
                let sphere = &set.spheres[fam];
                if sphere.multiplicity != multiplicities[fam] {
                    continue;
                }
                let basis = principal_basis(sphere);
                if basis.is_empty() {
                    continue;
                }
                let multi = grid.multi(flat);
                let mut covered = 0usize;
                // Axes lying in the principal space: exact node differences.
                for axis in 0..grid.d() {
                    let inside: f64 = basis.iter().map(|b| b[axis] * b[axis]).sum();
                    if inside < 0.98 {
                        continue;
                    }
                    let sm = grid
                        .neighbor(&multi, axis, -1)
                        .and_then(|p| field.sets[grid.flat(&p)].as_ref());
                    let sp = grid
                        .neighbor(&multi, axis, 1)
                        .and_then(|p| field.sets[grid.flat(&p)].as_ref());
                    // One-sided difference when the axis meets the sampled
                    // boundary; central otherwise.
                    let (dist, span) = match (sm, sp) {
                        (Some(sm), Some(sp)) => {
                            let (_, km, _) = match_family(sm, &sphere.k);
                            let (_, kp, _) = match_family(sp, &sphere.k);
                            (
                                projective_sin_distance(kp.k.coords(), km.k.coords()),
                                2.0 * grid.spacing(axis),
                            )
                        }
                        (Some(sn), None) | (None, Some(sn)) => {
                            let (_, kn, _) = match_family(sn, &sphere.k);
                            (
                                projective_sin_distance(kn.k.coords(), sphere.k.coords()),
                                grid.spacing(axis),
                            )
                        }
                        (None, None) => continue,
                    };
                    let rate = dist / span;
                    family_residuals[fam] = family_residuals[fam].max(rate);
                    covered += 1;
                    checked += 1;
                }
                if covered >= multiplicities[fam] {
                    continue;
                }
                // Remaining directions: small parameter offsets.
                let delta = if analytic { 1e-4 } else { grid.min_spacing() / 2.0 };
                let u = grid.point(&multi);
                for b in &basis {
                    let up: Vec<f64> = (0..grid.d()).map(|i| u[i] + delta * b[i]).collect();
                    let um: Vec<f64> = (0..grid.d()).map(|i| u[i] - delta * b[i]).collect();
                    let (mut up, mut um) = (up, um);
                    if !grid.normalize_point(&mut up) || !grid.normalize_point(&mut um) {
                        continue;
                    }
                    let (Ok(setp), Ok(setm)) = (
                        map.curvature_spheres_at(&up, tols),
                        map.curvature_spheres_at(&um, tols),
                    ) else {
                        continuation_failures += 1;
                        continue;
                    };
                    let (_, kp, dp) = match_family(&setp, &sphere.k);
                    let (_, km, dm) = match_family(&setm, &sphere.k);
                    if dp > 0.3 || dm > 0.3 {
                        continuation_failures += 1;
                        continue;
                    }
                    let dist = projective_sin_distance(kp.k.coords(), km.k.coords());
                    family_residuals[fam] = family_residuals[fam].max(dist / (2.0 * delta));
                    checked += 1;
                }
            }
            if checked == 0 {
                return Err(GeomError::Inconclusive(format!(
                    "no directional checks possible for family {fam}"
                )));
            }
        }
    }

    let dupin = family_residuals.iter().all(|&r| r < tol);
    let proper = dupin && fraction >= tols.proper_fraction;
    Ok(DupinReport {
        g_per_sample,
        modal_g: modal,
        modal_fraction: fraction,
        locus,
        family_residuals,
        multiplicities,
        dupin,
        proper,
        tol_used: tol,
        leaves_traced,
        continuation_failures,
    })
}

/// Outcome of the timelike-line isoparametric criterion.
#[derive(Debug, Clone)]
pub struct IsoparametricReport {
    /// Per-family pole orthogonal to every sampled curvature sphere, when a
    /// unique timelike direction exists in the family's orthogonal
    /// complement.
    pub poles: Vec<Option<ProjectivePoint>>,
    /// Dimension of each family's sampled-span complement.
    pub complement_dims: Vec<usize>,
    /// Max |<K_i, P_i>| over samples, per family (unit vectors).
    pub pole_residuals: Vec<f64>,
    /// Third-to-first singular value ratio of the stacked poles (0 when
    /// g = 2): the poles must lie on a projective line.
    pub plane_residual: f64,
    /// The fitted plane carries a negative-definite form (a timelike line).
    pub timelike: bool,
    /// Curvature-sphere radii when the line is the span of the first and
    /// last coordinate axes (the standard position of Muenzner's formulas).
    pub radii: Option<Vec<f64>>,
    pub accepted: bool,
}

/// Stack of unit K-vectors of one family over the modal samples.
fn family_rows(field: &CurvatureField, fam: usize, modal: usize) -> Vec<DVector<f64>> {
    let mut rows = Vec::new();
    for (_, set) in field.interior_sets() {
        if set.g() != modal {
            continue;
        }
        let k = set.spheres[fam].k.coords();
        rows.push(k / k.norm());
    }
    rows
}

/// Pole of one family: the unique timelike direction Lie-orthogonal to all
/// sampled spheres, if it exists.
fn family_pole(
    rows: &[DVector<f64>],
    form: &BilinearForm,
    tols: &Tolerances,
) -> Result<(Option<DVector<f64>>, usize, f64)> {
    let svd = RowSpanSvd::new(rows)?;
    let rank = svd.rank(tols.rank);
    let dim = rows[0].len();
    let sv = &svd.singular_values;
    if rank < dim.min(sv.len()) && rank > 0 && sv[rank - 1] / sv[rank].max(f64::MIN_POSITIVE) < 10.0
    {
        return Err(GeomError::Inconclusive(format!(
            "family span rank ambiguous: consecutive singular values {:.3e}, {:.3e}",
            sv[rank - 1],
            sv[rank]
        )));
    }
    if rank >= dim {
        return Ok((None, 0, f64::INFINITY));
    }
    let comp = svd.complement(rank)?;
    let comp = comp.basis();
    let cdim = comp.len();
    // <K, P> = 0 for all K in the span means G P lies in the Euclidean
    // complement; the form restricted to the candidate space G C has Gram
    // c_a^T G c_b. A pole must be timelike, hence corresponds to a negative
    // eigenvalue; acceptance needs it unique.
    let mut gram = DMatrix::zeros(cdim, cdim);
    for a in 0..cdim {
        for b in 0..cdim {
            gram[(a, b)] = form.apply(&comp[a], &comp[b]);
        }
    }
    let (evals, evecs) = jacobi_symmetric_eigen(&gram);
    let max_abs = evals.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let neg: Vec<usize> = (0..cdim)
        .filter(|&i| evals[i] < -1e-10 * max_abs.max(1e-300))
        .collect();
    match neg.len() {
        0 => Ok((None, cdim, f64::INFINITY)),
        1 => {
            let y = evecs.column(neg[0]);
            let mut p = DVector::zeros(dim);
            for a in 0..cdim {
                p += &(form.conjugate(&comp[a]) * y[a]);
            }
            p /= p.norm();
            let resid = rows
                .iter()
                .map(|k| form.apply(k, &p).abs())
                .fold(0.0f64, f64::max);
            Ok((Some(p), cdim, resid))
        }
        _ => Err(GeomError::Inconclusive(format!(
            "{} independent timelike directions annihilate family samples",
            neg.len()
        ))),
    }
}

/// Test Lie equivalence to an isoparametric hypersurface: every curvature
/// sphere family must be orthogonal to a pole, with all poles on one
/// timelike line.
pub fn isoparametric_criterion(
    field: &CurvatureField,
    tols: &Tolerances,
) -> Result<IsoparametricReport> {
    let (modal, fraction, _) = modal_g(field)?;
    if fraction < tols.proper_fraction {
        return Err(GeomError::Precondition(format!(
            "curvature sphere count not constant: modal fraction {fraction:.3}"
        )));
    }
    let some_set = field
        .interior_sets()
        .find(|(_, s)| s.g() == modal)
        .map(|(_, s)| s)
        .expect("modal fraction positive");
    let dim = some_set.spheres[0].k.coords().len();
    let n = dim - 3;
    let form = BilinearForm::lie(n);

    let mut poles = Vec::with_capacity(modal);
    let mut complement_dims = Vec::with_capacity(modal);
    let mut pole_residuals = Vec::with_capacity(modal);
    for fam in 0..modal {
        let rows = family_rows(field, fam, modal);
        let (p, cdim, resid) = family_pole(&rows, &form, tols)?;
        poles.push(p);
        complement_dims.push(cdim);
        pole_residuals.push(resid);
    }

    let found: Vec<&DVector<f64>> = poles.iter().flatten().collect();
    if found.len() < modal || modal < 2 {
        return Ok(IsoparametricReport {
            poles: poles
                .iter()
                .map(|p| p.as_ref().map(|v| ProjectivePoint::new(v.clone()).unwrap()))
                .collect(),
            complement_dims,
            pole_residuals,
            plane_residual: f64::INFINITY,
            timelike: false,
            radii: None,
            accepted: false,
        });
    }

    // Fit the projective line through the poles.
    let rows: Vec<DVector<f64>> = found.iter().map(|p| (*p).clone()).collect();
    let svd = RowSpanSvd::new(&rows)?;
    let sv = &svd.singular_values;
    let plane_residual = if modal == 2 {
        // Two poles span at most a plane; they must be independent.
        if sv[1] / sv[0] < 1e-8 {
            return Err(GeomError::Degenerate("the two poles coincide".into()));
        }
        0.0
    } else {
        sv[2] / sv[0]
    };
    let plane = svd.span(2)?;
    let gram = form.gram(plane.basis());
    let (evals, _) = jacobi_symmetric_eigen(&gram);
    let timelike = evals.iter().all(|&l| l < 0.0);
    let plane_ok = plane_residual < tols.timelike_plane;
    let accepted = timelike && plane_ok;

    // Radii only in standard position: plane spanned by the first and last
    // axes. <K, P> = 0 with P = (a, 0, .., 0, b) forces tan(rho) = -a/b.
    let mut radii = None;
    if accepted {
        let canonical = plane.basis().iter().all(|v| {
            let mut off = 0.0;
            for i in 1..dim - 1 {
                off += v[i] * v[i];
            }
            off.sqrt() < 1e-8
        });
        if canonical {
            let mut rs: Vec<f64> = found
                .iter()
                .map(|p| p[0].atan2(-p[dim - 1]).rem_euclid(std::f64::consts::PI))
                .collect();
            rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            radii = Some(rs);
        }
    }

    Ok(IsoparametricReport {
        poles: poles
            .iter()
            .map(|p| p.as_ref().map(|v| ProjectivePoint::new(v.clone()).unwrap()))
            .collect(),
        complement_dims,
        pole_residuals,
        plane_residual,
        timelike,
        radii,
        accepted,
    })
}

/// Construction detected from a curvature-sphere family's polar signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructionLabel {
    Revolution,
    Cylinder,
    Tube,
    None,
}

impl std::fmt::Display for ConstructionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConstructionLabel::Revolution => "revolution",
            ConstructionLabel::Cylinder => "cylinder",
            ConstructionLabel::Tube => "tube",
            ConstructionLabel::None => "none",
        };
        f.write_str(s)
    }
}

/// Outcome of the reducibility check for one family.
#[derive(Debug, Clone)]
pub struct ReducibilityReport {
    pub family: usize,
    /// Numerical rank of the sampled family span.
    pub rank: usize,
    /// Linear codimension of the span in R^{n+3}.
    pub codimension: usize,
    /// Signature (positive, negative, null) of the form on the polar of the
    /// span.
    pub signature: (usize, usize, usize),
    pub label: ConstructionLabel,
    /// The fitted span, absent when the stack is full rank.
    pub span: Option<ProjectiveSubspace>,
    pub singular_values: Vec<f64>,
}

/// Classify a family span stack directly (rows = unit curvature spheres).
pub fn reducibility_from_rows(
    rows: &[DVector<f64>],
    family: usize,
    tols: &Tolerances,
) -> Result<ReducibilityReport> {
    if rows.is_empty() {
        return Err(GeomError::InvalidInput("no samples".into()));
    }
    let dim = rows[0].len();
    let n = dim - 3;
    let form = BilinearForm::lie(n);
    let svd = RowSpanSvd::new(rows)?;
    let rank = svd.rank(tols.rank);
    let sv = svd.singular_values.clone();
    if rank < dim.min(sv.len()) && rank > 0 && sv[rank - 1] / sv[rank].max(f64::MIN_POSITIVE) < 10.0
    {
        return Err(GeomError::Inconclusive(format!(
            "family span rank ambiguous near {rank}: singular values {:.3e}, {:.3e}",
            sv[rank - 1],
            sv[rank]
        )));
    }
    let span = if rank < dim { Some(svd.span(rank)?) } else { None };
    let codimension = dim - rank;
    let mut signature = (0, 0, 0);
    let mut label = ConstructionLabel::None;
    if codimension >= 2 {
        let polar = polar_subspace(span.as_ref().unwrap(), &form)?;
        signature = subspace_signature(&polar, &form, 1e-10)?;
        label = match signature {
            (2, 0, 0) => ConstructionLabel::Revolution,
            (1, 0, 1) => ConstructionLabel::Cylinder,
            (1, 1, 0) => ConstructionLabel::Tube,
            _ => ConstructionLabel::None,
        };
    }
    Ok(ReducibilityReport {
        family,
        rank,
        codimension,
        signature,
        label,
        span,
        singular_values: sv,
    })
}

/// Reducibility check of one curvature-sphere family of a field: does the
/// family lie in a projective subspace of codimension two whose polar
/// signature identifies a revolution, cylinder, or tube construction?
pub fn reducibility_check(
    field: &CurvatureField,
    family: usize,
    tols: &Tolerances,
) -> Result<ReducibilityReport> {
    let (modal, _, _) = modal_g(field)?;
    if family >= modal {
        return Err(GeomError::InvalidInput(format!(
            "family {family} out of range: g = {modal}"
        )));
    }
    let rows = family_rows(field, family, modal);
    reducibility_from_rows(&rows, family, tols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::{euclidean_to_lie, EuclideanSphereObject};
    use crate::legendre::chart::{ChartJet, SurfaceChart};
    use crate::legendre::grid::Grid;
    use crate::legendre::{legendre_lift, SampledHypersurface};
    use std::f64::consts::PI;
    use std::sync::Arc;

    const INF: (f64, f64) = (1.0, 0.0);

    /// Flat torus in S^3 at equal radii; principal values +1 and -1.
    struct CliffordChart;

    impl SurfaceChart for CliffordChart {
        fn params(&self) -> usize {
            2
        }
        fn ambient(&self) -> usize {
            4
        }
        fn jet(&self, u: &[f64]) -> ChartJet {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let (su, cu) = u[0].sin_cos();
            let (sv, cv) = u[1].sin_cos();
            let f = DVector::from_row_slice(&[r * cu, r * su, r * cv, r * sv]);
            let xi = DVector::from_row_slice(&[-r * cu, -r * su, r * cv, r * sv]);
            let jf = DMatrix::from_columns(&[
                DVector::from_row_slice(&[-r * su, r * cu, 0.0, 0.0]),
                DVector::from_row_slice(&[0.0, 0.0, -r * sv, r * cv]),
            ]);
            let jxi = DMatrix::from_columns(&[
                DVector::from_row_slice(&[r * su, -r * cu, 0.0, 0.0]),
                DVector::from_row_slice(&[0.0, 0.0, -r * sv, r * cv]),
            ]);
            ChartJet { f, xi, jf, jxi }
        }
    }

    fn clifford_lift() -> crate::legendre::LegendreMap {
        let grid = Grid::new(
            vec![24, 24],
            vec![true, true],
            vec![(0.0, 2.0 * PI), (0.0, 2.0 * PI)],
        )
        .unwrap();
        let h = SampledHypersurface::from_spherical_chart(Arc::new(CliffordChart), grid).unwrap();
        legendre_lift(&h).unwrap()
    }

    /// Spherical cap in S^3: totally umbilic, one curvature sphere of
    /// multiplicity two.
    struct CapChart {
        rho: f64,
    }

    impl SurfaceChart for CapChart {
        fn params(&self) -> usize {
            2
        }
        fn ambient(&self) -> usize {
            4
        }
        fn jet(&self, u: &[f64]) -> ChartJet {
            let (cr, sr) = (self.rho.cos(), self.rho.sin());
            let (su, cu) = u[0].sin_cos();
            let (sv, cv) = u[1].sin_cos();
            let w = [su * cv, su * sv, cu];
            let wu = [cu * cv, cu * sv, -su];
            let wv = [-su * sv, su * cv, 0.0];
            let f = DVector::from_row_slice(&[cr, sr * w[0], sr * w[1], sr * w[2]]);
            let xi = DVector::from_row_slice(&[sr, -cr * w[0], -cr * w[1], -cr * w[2]]);
            let jf = DMatrix::from_columns(&[
                DVector::from_row_slice(&[0.0, sr * wu[0], sr * wu[1], sr * wu[2]]),
                DVector::from_row_slice(&[0.0, sr * wv[0], sr * wv[1], sr * wv[2]]),
            ]);
            let jxi = DMatrix::from_columns(&[
                DVector::from_row_slice(&[0.0, -cr * wu[0], -cr * wu[1], -cr * wu[2]]),
                DVector::from_row_slice(&[0.0, -cr * wv[0], -cr * wv[1], -cr * wv[2]]),
            ]);
            ChartJet { f, xi, jf, jxi }
        }
    }

    /// Surface of revolution in R^3 with a noncircular profile: the profile
    /// family's curvature sphere varies along its own curvature lines.
    struct WobblyRevolutionChart;

    impl WobblyRevolutionChart {
        fn profile(v: f64) -> (f64, f64, f64, f64, f64, f64) {
            let r = 2.0 + 0.7 * v.cos() + 0.25 * (2.0 * v).cos();
            let rp = -0.7 * v.sin() - 0.5 * (2.0 * v).sin();
            let rpp = -0.7 * v.cos() - (2.0 * v).cos();
            let z = 0.7 * v.sin();
            let zp = 0.7 * v.cos();
            let zpp = -0.7 * v.sin();
            (r, rp, rpp, z, zp, zpp)
        }
    }

    impl SurfaceChart for WobblyRevolutionChart {
        fn params(&self) -> usize {
            2
        }
        fn ambient(&self) -> usize {
            3
        }
        fn jet(&self, uu: &[f64]) -> ChartJet {
            let (u, v) = (uu[0], uu[1]);
            let (su, cu) = u.sin_cos();
            let (r, rp, rpp, z, zp, zpp) = Self::profile(v);
            let l = rp.hypot(zp);
            let lp = (rp * rpp + zp * zpp) / l;
            let (p, q) = (zp / l, rp / l);
            let pp = zpp / l - zp * lp / (l * l);
            let qp = rpp / l - rp * lp / (l * l);
            let f = DVector::from_row_slice(&[r * cu, r * su, z]);
            let xi = DVector::from_row_slice(&[p * cu, p * su, -q]);
            let jf = DMatrix::from_columns(&[
                DVector::from_row_slice(&[-r * su, r * cu, 0.0]),
                DVector::from_row_slice(&[rp * cu, rp * su, zp]),
            ]);
            let jxi = DMatrix::from_columns(&[
                DVector::from_row_slice(&[-p * su, p * cu, 0.0]),
                DVector::from_row_slice(&[pp * cu, pp * su, -qp]),
            ]);
            ChartJet { f, xi, jf, jxi }
        }
    }

    #[test]
    fn cross_ratio_matches_finite_formula() {
        let p = |x: f64| (x, 1.0);
        // [-1, 0; 1, inf] = 1/2.
        let v = cross_ratio(p(-1.0), p(0.0), p(1.0), INF).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        // [a, b; c, inf] = (a - b)/(a - c).
        let (a, b, c) = (0.37, -1.95, 2.21);
        let v = cross_ratio(p(a), p(b), p(c), INF).unwrap();
        assert!((v - (a - b) / (a - c)).abs() < 1e-12);
        // Finite four-point formula.
        let (d0, d1, d2, d3) = (-0.8, 0.15, 1.3, 4.0);
        let v = cross_ratio(p(d0), p(d1), p(d2), p(d3)).unwrap();
        let direct = (d0 - d1) * (d3 - d2) / ((d0 - d2) * (d3 - d1));
        assert!((v - direct).abs() < 1e-12);
    }

    #[test]
    fn cross_ratio_of_cotangent_quadruple() {
        let k: Vec<f64> = [1.0f64, 3.0, 5.0, 7.0]
            .iter()
            .map(|m| 1.0 / (m * PI / 8.0).tan())
            .collect();
        // Ascending order.
        let v = cross_ratio_of_values(k[3], k[2], k[1], k[0]).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cross_ratio_rejects_coincident_points() {
        let p = |x: f64| (x, 1.0);
        assert!(matches!(
            cross_ratio(p(1.0), p(1.0), p(2.0), p(3.0)),
            Err(GeomError::Degenerate(_))
        ));
        // Scaled copies coincide projectively.
        assert!(cross_ratio((2.0, 2.0), (-1.0, -1.0), p(2.0), p(3.0)).is_err());
    }

    #[test]
    fn mobius_curvature_examples() {
        let s3 = 3.0f64.sqrt();
        assert!((mobius_curvature(-s3, 0.0, s3).unwrap() - 0.5).abs() < 1e-15);
        assert!(mobius_curvature(1.0, 2.0, 2.0).is_err());
        assert!(mobius_curvature(1.0, f64::INFINITY, 2.0).is_err());
    }

    #[test]
    fn munzner_radii_numerology() {
        let m = munzner_radii(4, PI / 8.0).unwrap();
        assert!(m.standard_g);
        let expect = [2.414213562373095, 0.4142135623730949, -0.41421356237309515, -2.414213562373095];
        for (got, want) in m.values.iter().zip(expect.iter()) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let m3 = munzner_radii(3, PI / 6.0).unwrap();
        let s3 = 3.0f64.sqrt();
        assert!((m3.values[0] - s3).abs() < 1e-12);
        assert!(m3.values[1].abs() < 1e-12);
        assert!((m3.values[2] + s3).abs() < 1e-12);
        // Spacing is exactly pi/g.
        for g in [1usize, 2, 3, 4, 5, 6, 7] {
            let rho1 = 0.31 * PI / g as f64;
            let m = munzner_radii(g, rho1).unwrap();
            for w in m.radii.windows(2) {
                assert!((w[1] - w[0] - PI / g as f64).abs() < 1e-15);
            }
            assert_eq!(m.standard_g, matches!(g, 1 | 2 | 3 | 4 | 6));
        }
        assert!(munzner_radii(4, PI / 3.0).is_err());
        assert!(munzner_radii(4, 0.0).is_err());
    }

    #[test]
    fn munzner_psi_is_one_half() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let rho1: f64 = rng.gen_range(1e-3..(PI / 4.0 - 1e-3));
            let m = munzner_radii(4, rho1).unwrap();
            let mut vals = m.values.clone();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let psi = cross_ratio_of_values(vals[0], vals[1], vals[2], vals[3]).unwrap();
            assert!((psi - 0.5).abs() < 1e-12, "rho1 = {rho1}, psi = {psi}");
        }
    }

    #[test]
    fn clifford_torus_is_proper_dupin() {
        let tols = Tolerances::default();
        let map = clifford_lift();
        let field = map.curvature_field(&tols).unwrap();
        let rep = certify_dupin(&map, &field, &DupinOptions::default(), &tols).unwrap();
        assert_eq!(rep.modal_g, 2);
        assert!(rep.modal_fraction > 0.999);
        assert!(rep.locus.is_empty());
        assert_eq!(rep.multiplicities, vec![1, 1]);
        assert!(rep.dupin, "residuals: {:?}", rep.family_residuals);
        assert!(rep.proper);
        assert!(rep.family_residuals.iter().all(|&r| r < 1e-8));
    }

    #[test]
    fn clifford_torus_is_isoparametric_with_quarter_radii() {
        let tols = Tolerances::default();
        let map = clifford_lift();
        let field = map.curvature_field(&tols).unwrap();
        let rep = isoparametric_criterion(&field, &tols).unwrap();
        assert!(rep.accepted, "plane residual {}", rep.plane_residual);
        assert!(rep.timelike);
        let radii = rep.radii.expect("line in standard position");
        assert_eq!(radii.len(), 2);
        assert!((radii[0] - PI / 4.0).abs() < 1e-8, "{radii:?}");
        assert!((radii[1] - 3.0 * PI / 4.0).abs() < 1e-8, "{radii:?}");
    }

    #[test]
    fn clifford_families_are_irreducible() {
        let tols = Tolerances::default();
        let map = clifford_lift();
        let field = map.curvature_field(&tols).unwrap();
        for fam in 0..2 {
            let rep = reducibility_check(&field, fam, &tols).unwrap();
            assert_eq!(rep.rank, 3);
            assert_eq!(rep.label, ConstructionLabel::None, "family {fam}: {rep:?}");
        }
    }

    #[test]
    fn umbilic_cap_is_dupin_via_directional_checks() {
        let tols = Tolerances::default();
        let grid = Grid::new(
            vec![17, 24],
            vec![false, true],
            vec![(0.45, PI - 0.45), (0.0, 2.0 * PI)],
        )
        .unwrap();
        let h =
            SampledHypersurface::from_spherical_chart(Arc::new(CapChart { rho: 0.8 }), grid)
                .unwrap();
        let map = legendre_lift(&h).unwrap();
        let field = map.curvature_field(&tols).unwrap();
        let rep = certify_dupin(&map, &field, &DupinOptions::default(), &tols).unwrap();
        assert_eq!(rep.modal_g, 1);
        assert_eq!(rep.multiplicities, vec![2]);
        assert!(rep.dupin, "residuals: {:?}", rep.family_residuals);
        assert!(rep.proper);
    }

    #[test]
    fn noncircular_profile_is_not_dupin() {
        let tols = Tolerances::default();
        let grid = Grid::new(
            vec![24, 32],
            vec![true, true],
            vec![(0.0, 2.0 * PI), (0.0, 2.0 * PI)],
        )
        .unwrap();
        let h = SampledHypersurface::from_euclidean_chart(
            Arc::new(WobblyRevolutionChart),
            grid,
        )
        .unwrap();
        let map = legendre_lift(&h).unwrap();
        let field = map.curvature_field(&tols).unwrap();
        let rep = certify_dupin(&map, &field, &DupinOptions::default(), &tols).unwrap();
        assert!(!rep.dupin, "residuals: {:?}", rep.family_residuals);
        let worst = rep.family_residuals.iter().cloned().fold(0.0f64, f64::max);
        assert!(worst > 1e-2, "non-Dupin drift should be far from threshold: {worst}");
    }

    #[test]
    fn synthetic_revolution_family_is_labeled() {
        // Spheres with centers on the x3-axis of R^3 and varying radii: the
        // classic revolution family. Polar of the span must be spatial.
        let mut rows = Vec::new();
        for j in 0..40 {
            let c = -1.5 + 0.07 * j as f64;
            let r = 0.4 + 0.31 * ((j * j) % 7) as f64 / 7.0;
            let obj = EuclideanSphereObject::sphere(DVector::from_row_slice(&[0.0, 0.0, c]), r);
            let k = euclidean_to_lie(&obj);
            rows.push(k.coords() / k.coords().norm());
        }
        let rep = reducibility_from_rows(&rows, 0, &Tolerances::default()).unwrap();
        assert_eq!(rep.rank, 4);
        assert_eq!(rep.codimension, 2);
        assert_eq!(rep.signature, (2, 0, 0));
        assert_eq!(rep.label, ConstructionLabel::Revolution);
    }

    #[test]
    fn synthetic_plane_family_is_labeled_cylinder() {
        // Planes whose normals avoid one fixed spatial direction (normals in
        // the x1-x2 plane of R^3): the cylinder family.
        let mut rows = Vec::new();
        for j in 0..40 {
            let t = 0.15 * j as f64;
            let n = DVector::from_row_slice(&[t.cos(), t.sin(), 0.0]);
            let obj = EuclideanSphereObject::plane(n, -2.0 + 0.1 * j as f64).unwrap();
            let k = euclidean_to_lie(&obj);
            rows.push(k.coords() / k.coords().norm());
        }
        let rep = reducibility_from_rows(&rows, 0, &Tolerances::default()).unwrap();
        assert_eq!(rep.codimension, 2);
        assert_eq!(rep.signature, (1, 0, 1));
        assert_eq!(rep.label, ConstructionLabel::Cylinder);
    }

    #[test]
    fn synthetic_constant_radius_family_is_labeled_tube() {
        // Spheres of one fixed radius centered on a plane curve: the tube
        // family over a core inside the hyperplane x3 = 0.
        let mut rows = Vec::new();
        let r = 0.35;
        for j in 0..60 {
            let t = j as f64;
            let c = DVector::from_row_slice(&[
                (0.3 * t).sin(),
                (0.17 * t).cos() * 1.3,
                0.0,
            ]);
            let obj = EuclideanSphereObject::sphere(c, r);
            let k = euclidean_to_lie(&obj);
            rows.push(k.coords() / k.coords().norm());
        }
        let rep = reducibility_from_rows(&rows, 0, &Tolerances::default()).unwrap();
        assert_eq!(rep.codimension, 2);
        assert_eq!(rep.signature, (1, 1, 0));
        assert_eq!(rep.label, ConstructionLabel::Tube);
    }

    #[test]
    fn full_rank_family_gets_no_label() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let mut rows = Vec::new();
        for _ in 0..80 {
            let c = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            let r: f64 = rng.gen_range(0.2..1.5);
            let obj = EuclideanSphereObject::sphere(c, r);
            let k = euclidean_to_lie(&obj);
            rows.push(k.coords() / k.coords().norm());
        }
        let rep = reducibility_from_rows(&rows, 0, &Tolerances::default()).unwrap();
        assert_eq!(rep.codimension, 0);
        assert_eq!(rep.label, ConstructionLabel::None);
    }
}
