//! JSON file formats for spheres, pencils, transforms, sampled
//! hypersurfaces, and certification reports.
//!
//! Output is deterministic: struct fields serialize in declaration order, no
//! maps are used, and every float is written with 17 significant digits so a
//! double round-trips exactly. Readers reject unknown keys.

use std::io::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::coords::{
    euclidean_to_lie, lie_to_euclidean, lie_to_spherical, spherical_to_lie,
    EuclideanSphereObject, LieCoord, SphericalSphere,
};
use crate::dupin::{DupinReport, IsoparametricReport, ReducibilityReport};
use crate::error::{GeomError, Result};
use crate::legendre::{
    AmbientModel, ContactConditionReport, CurvatureField, Grid, LegendreMap,
    SampledHypersurface,
};
use crate::pencil::PencilLine;
use crate::transform::LieTransform;

/// Serializer writing every f64 as `d.dddddddddddddddde[-]x` (17 significant
/// digits); non-finite values become null, as in the default formatter.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17);
    value
        .serialize(&mut ser)
        .map_err(|e| GeomError::InvalidInput(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| GeomError::InvalidInput(e.to_string()))
}

pub fn from_json_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| GeomError::InvalidInput(format!("bad JSON: {e}")))
}

pub fn read_json_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        GeomError::InvalidInput(format!("cannot read {}: {e}", path.display()))
    })?;
    from_json_str(&text)
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = to_json_string(value)?;
    std::fs::write(path, text).map_err(|e| {
        GeomError::InvalidInput(format!("cannot write {}: {e}", path.display()))
    })
}

/// An oriented sphere in one of the three coordinate models. Exactly the
/// fields of the active variant may be present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereFile {
    /// "euclidean", "spherical", or "lie".
    pub model: String,
    pub n: usize,
    /// Euclidean variants: "point", "sphere", "plane", or "improper".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    /// Signed: positive radius orients the normal toward the center.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    /// Quadric coordinates, length n + 3.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

/// A parsed sphere file.
#[derive(Debug, Clone)]
pub enum SphereInput {
    Euclidean(EuclideanSphereObject),
    Spherical(SphericalSphere),
    Lie(LieCoord),
}

fn empty_file(model: &str, n: usize) -> SphereFile {
    SphereFile {
        model: model.to_string(),
        n,
        kind: None,
        point: None,
        center: None,
        radius: None,
        normal: None,
        offset: None,
        coords: None,
    }
}

impl SphereFile {
    pub fn from_euclidean(obj: &EuclideanSphereObject) -> Self {
        let mut f = empty_file("euclidean", obj.n());
        match obj {
            EuclideanSphereObject::ProperPoint { point } => {
                f.kind = Some("point".into());
                f.point = Some(point.as_slice().to_vec());
            }
            EuclideanSphereObject::Sphere { center, signed_radius } => {
                f.kind = Some("sphere".into());
                f.center = Some(center.as_slice().to_vec());
                f.radius = Some(*signed_radius);
            }
            EuclideanSphereObject::Plane { unit_normal, offset } => {
                f.kind = Some("plane".into());
                f.normal = Some(unit_normal.as_slice().to_vec());
                f.offset = Some(*offset);
            }
            EuclideanSphereObject::ImproperPoint { .. } => {
                f.kind = Some("improper".into());
            }
        }
        f
    }

    pub fn from_spherical(s: &SphericalSphere) -> Self {
        let mut f = empty_file("spherical", s.n());
        f.center = Some(s.center.as_slice().to_vec());
        f.radius = Some(s.signed_radius);
        f
    }

    /// Writes the scale-fixed representative, so equal spheres produce equal
    /// files.
    pub fn from_lie(lc: &LieCoord) -> Self {
        let mut f = empty_file("lie", lc.n());
        f.coords = Some(lc.canonicalized().as_slice().to_vec());
        f
    }

    pub fn parse(&self, tols: &Tolerances) -> Result<SphereInput> {
        let fields = [
            self.kind.is_some(),
            self.point.is_some(),
            self.center.is_some(),
            self.radius.is_some(),
            self.normal.is_some(),
            self.offset.is_some(),
            self.coords.is_some(),
        ];
        let allow = |mask: [bool; 7]| -> Result<()> {
            for (i, (&have, &ok)) in fields.iter().zip(mask.iter()).enumerate() {
                if have && !ok {
                    let name =
                        ["kind", "point", "center", "radius", "normal", "offset", "coords"][i];
                    return Err(GeomError::InvalidInput(format!(
                        "field {name} does not belong to this variant"
                    )));
                }
            }
            Ok(())
        };
        let need = |name: &str| GeomError::InvalidInput(format!("missing field {name}"));
        let vec = |v: &[f64]| DVector::from_row_slice(v);
        match self.model.as_str() {
            "euclidean" => {
                let kind = self.kind.as_deref().ok_or_else(|| need("kind"))?;
                let obj = match kind {
                    "point" => {
                        allow([true, true, false, false, false, false, false])?;
                        let p = self.point.as_deref().ok_or_else(|| need("point"))?;
                        EuclideanSphereObject::point(vec(p))
                    }
                    "sphere" => {
                        allow([true, false, true, true, false, false, false])?;
                        let c = self.center.as_deref().ok_or_else(|| need("center"))?;
                        let r = self.radius.ok_or_else(|| need("radius"))?;
                        EuclideanSphereObject::sphere(vec(c), r)
                    }
                    "plane" => {
                        allow([true, false, false, false, true, true, false])?;
                        let nu = self.normal.as_deref().ok_or_else(|| need("normal"))?;
                        let h = self.offset.ok_or_else(|| need("offset"))?;
                        EuclideanSphereObject::plane(vec(nu), h)?
                    }
                    "improper" => {
                        allow([true, false, false, false, false, false, false])?;
                        EuclideanSphereObject::improper(self.n)
                    }
                    other => {
                        return Err(GeomError::InvalidInput(format!(
                            "unknown euclidean kind {other:?}"
                        )))
                    }
                };
                if obj.n() != self.n {
                    return Err(GeomError::DimensionMismatch { expected: self.n, got: obj.n() });
                }
                Ok(SphereInput::Euclidean(obj))
            }
            "spherical" => {
                allow([false, false, true, true, false, false, false])?;
                let c = self.center.as_deref().ok_or_else(|| need("center"))?;
                let r = self.radius.ok_or_else(|| need("radius"))?;
                if c.len() != self.n + 1 {
                    return Err(GeomError::DimensionMismatch {
                        expected: self.n + 1,
                        got: c.len(),
                    });
                }
                Ok(SphereInput::Spherical(SphericalSphere::new(vec(c), r)?))
            }
            "lie" => {
                allow([false, false, false, false, false, false, true])?;
                let x = self.coords.as_deref().ok_or_else(|| need("coords"))?;
                if x.len() != self.n + 3 {
                    return Err(GeomError::DimensionMismatch {
                        expected: self.n + 3,
                        got: x.len(),
                    });
                }
                Ok(SphereInput::Lie(LieCoord::with_tol(vec(x), tols.quadric)?))
            }
            other => Err(GeomError::InvalidInput(format!("unknown model {other:?}"))),
        }
    }

    /// Quadric coordinates of the object in any model.
    pub fn to_lie(&self, tols: &Tolerances) -> Result<LieCoord> {
        match self.parse(tols)? {
            SphereInput::Euclidean(o) => Ok(euclidean_to_lie(&o)),
            SphereInput::Spherical(s) => spherical_to_lie(&s),
            SphereInput::Lie(lc) => Ok(lc),
        }
    }

    /// Re-express in another model ("euclidean", "spherical", "lie").
    pub fn converted(&self, model: &str, tols: &Tolerances) -> Result<SphereFile> {
        let lc = self.to_lie(tols)?;
        match model {
            "euclidean" => Ok(SphereFile::from_euclidean(&lie_to_euclidean(&lc, tols))),
            "spherical" => Ok(SphereFile::from_spherical(&lie_to_spherical(&lc, tols)?)),
            "lie" => Ok(SphereFile::from_lie(&lc)),
            other => Err(GeomError::InvalidInput(format!("unknown model {other:?}"))),
        }
    }
}

/// Two quadric points, the data of a sphere pair or the line through them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PencilFile {
    pub n: usize,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
}

impl PencilFile {
    pub fn from_coords(k1: &LieCoord, k2: &LieCoord) -> Self {
        PencilFile {
            n: k1.n(),
            k1: k1.canonicalized().as_slice().to_vec(),
            k2: k2.canonicalized().as_slice().to_vec(),
        }
    }

    pub fn coords(&self, tols: &Tolerances) -> Result<(LieCoord, LieCoord)> {
        let parse = |v: &[f64], name: &str| -> Result<LieCoord> {
            if v.len() != self.n + 3 {
                return Err(GeomError::InvalidInput(format!(
                    "{name} must have length n + 3 = {}",
                    self.n + 3
                )));
            }
            LieCoord::with_tol(DVector::from_row_slice(v), tols.quadric)
        };
        Ok((parse(&self.k1, "k1")?, parse(&self.k2, "k2")?))
    }

    pub fn to_line(&self, tols: &Tolerances) -> Result<PencilLine> {
        let (a, b) = self.coords(tols)?;
        crate::pencil::line_on_quadric(&a, &b, tols)
    }
}

/// A Lie sphere transformation as its matrix on R^{n+3}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformFile {
    pub n: usize,
    /// Row-major, (n+3) x (n+3).
    pub matrix: Vec<f64>,
}

impl TransformFile {
    pub fn from_transform(b: &LieTransform) -> Self {
        let m = b.matrix();
        let dim = m.nrows();
        let mut rows = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                rows.push(m[(i, j)]);
            }
        }
        TransformFile { n: b.n(), matrix: rows }
    }

    pub fn to_transform(&self, tol: f64) -> Result<LieTransform> {
        let dim = self.n + 3;
        if self.matrix.len() != dim * dim {
            return Err(GeomError::InvalidInput(format!(
                "matrix must have {} entries, got {}",
                dim * dim,
                self.matrix.len()
            )));
        }
        let m = DMatrix::from_row_slice(dim, dim, &self.matrix);
        LieTransform::validate(m, tol)
    }
}

/// A sampled hypersurface patch. Positions and normals are stored in the
/// model named by `ambient`: rows of length n for "euclidean" (normals
/// unit), rows of length n + 1 for "spherical" (both unit, orthogonal).
/// Rows are flattened node-major in grid order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypersurfaceFile {
    pub n: usize,
    pub d: usize,
    pub grid_dims: Vec<usize>,
    pub periodic: Vec<bool>,
    pub ranges: Vec<(f64, f64)>,
    pub ambient: String,
    /// Present only for normal-bundle parametrizations (base_axes < d).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_axes: Option<usize>,
    pub f: Vec<f64>,
    pub xi: Vec<f64>,
}

fn flatten(rows: &[DVector<f64>]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows.len() * rows.first().map_or(0, |r| r.len()));
    for r in rows {
        out.extend_from_slice(r.as_slice());
    }
    out
}

fn unflatten(data: &[f64], width: usize, count: usize, name: &str) -> Result<Vec<DVector<f64>>> {
    if data.len() != width * count {
        return Err(GeomError::InvalidInput(format!(
            "{name} must hold {count} rows of {width} entries, got {} values",
            data.len()
        )));
    }
    Ok(data.chunks_exact(width).map(DVector::from_row_slice).collect())
}

impl HypersurfaceFile {
    pub fn from_surface(h: &SampledHypersurface) -> Result<Self> {
        let (f, xi, ambient) = match h.ambient() {
            AmbientModel::EuclideanStereographic => {
                let (f, xi) = h.euclidean_samples()?;
                (f, xi, "euclidean")
            }
            AmbientModel::Spherical => {
                (h.positions().to_vec(), h.normals().to_vec(), "spherical")
            }
        };
        let g = h.grid();
        Ok(HypersurfaceFile {
            n: h.n(),
            d: h.d(),
            grid_dims: g.dims().to_vec(),
            periodic: g.periodic().to_vec(),
            ranges: g.ranges().to_vec(),
            ambient: ambient.to_string(),
            base_axes: (h.base_axes() < h.d()).then_some(h.base_axes()),
            f: flatten(&f),
            xi: flatten(&xi),
        })
    }

    pub fn to_surface(&self) -> Result<SampledHypersurface> {
        if self.grid_dims.len() != self.d {
            return Err(GeomError::InvalidInput(format!(
                "grid_dims has {} axes but d = {}",
                self.grid_dims.len(),
                self.d
            )));
        }
        let grid = Grid::new(
            self.grid_dims.clone(),
            self.periodic.clone(),
            self.ranges.clone(),
        )?;
        let (ambient, width) = match self.ambient.as_str() {
            "euclidean" => (AmbientModel::EuclideanStereographic, self.n),
            "spherical" => (AmbientModel::Spherical, self.n + 1),
            other => {
                return Err(GeomError::InvalidInput(format!("unknown ambient {other:?}")))
            }
        };
        let f = unflatten(&self.f, width, grid.len(), "f")?;
        let xi = unflatten(&self.xi, width, grid.len(), "xi")?;
        SampledHypersurface::from_samples(grid, f, xi, ambient, self.base_axes)
    }
}

/// A Legendre lift as its two frame vectors per node, flattened node-major
/// with rows of length n + 3.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftFile {
    pub n: usize,
    pub d: usize,
    pub grid_dims: Vec<usize>,
    pub periodic: Vec<bool>,
    pub ranges: Vec<(f64, f64)>,
    pub z1: Vec<f64>,
    pub z2: Vec<f64>,
}

impl LiftFile {
    pub fn from_map(map: &LegendreMap) -> Self {
        let g = map.grid();
        LiftFile {
            n: map.n(),
            d: map.d(),
            grid_dims: g.dims().to_vec(),
            periodic: g.periodic().to_vec(),
            ranges: g.ranges().to_vec(),
            z1: flatten(map.z1_samples()),
            z2: flatten(map.z2_samples()),
        }
    }
}

/// Curvature spheres over the interior nodes: per node the homogeneous
/// principal values (r, s) meaning [r Y1 + s Y2], their multiplicities, and
/// the sphere coordinates (flattened, rows of length n + 3).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureSampleFile {
    pub node: usize,
    pub pairs: Vec<(f64, f64)>,
    pub multiplicities: Vec<usize>,
    pub spheres: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureFieldFile {
    pub n: usize,
    pub modal_g: usize,
    pub samples: Vec<CurvatureSampleFile>,
}

impl CurvatureFieldFile {
    pub fn from_field(field: &CurvatureField, n: usize) -> Self {
        let mut counts: Vec<(usize, usize)> = Vec::new();
        let mut samples = Vec::new();
        for (node, set) in field.interior_sets() {
            match counts.iter_mut().find(|(g, _)| *g == set.g()) {
                Some((_, c)) => *c += 1,
                None => counts.push((set.g(), 1)),
            }
            let mut spheres = Vec::new();
            for s in &set.spheres {
                spheres.extend_from_slice(s.k.canonicalized().as_slice());
            }
            samples.push(CurvatureSampleFile {
                node,
                pairs: set.spheres.iter().map(|s| s.pair).collect(),
                multiplicities: set.multiplicities(),
                spheres,
            });
        }
        counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let modal_g = counts.first().map_or(0, |(g, _)| *g);
        CurvatureFieldFile { n, modal_g, samples }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DupinReportFile {
    pub modal_g: usize,
    pub modal_fraction: f64,
    pub multiplicities: Vec<usize>,
    pub family_residuals: Vec<f64>,
    pub tol_used: f64,
    pub leaves_traced: usize,
    pub continuation_failures: usize,
    /// Interior nodes where the sphere count differs from the modal count.
    pub locus: Vec<usize>,
    pub dupin: bool,
    pub proper: bool,
}

impl DupinReportFile {
    pub fn from_report(r: &DupinReport) -> Self {
        DupinReportFile {
            modal_g: r.modal_g,
            modal_fraction: r.modal_fraction,
            multiplicities: r.multiplicities.clone(),
            family_residuals: r.family_residuals.clone(),
            tol_used: r.tol_used,
            leaves_traced: r.leaves_traced,
            continuation_failures: r.continuation_failures,
            locus: r.locus.clone(),
            dupin: r.dupin,
            proper: r.proper,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoparametricReportFile {
    /// Unit pole vector per family, null when no unique timelike direction
    /// exists in the family's complement.
    pub poles: Vec<Option<Vec<f64>>>,
    pub complement_dims: Vec<usize>,
    pub pole_residuals: Vec<f64>,
    /// Third-to-first singular value ratio of the pole stack; null when no
    /// line could be fitted.
    pub plane_residual: Option<f64>,
    pub timelike: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    pub accepted: bool,
}

impl IsoparametricReportFile {
    pub fn from_report(r: &IsoparametricReport) -> Self {
        IsoparametricReportFile {
            poles: r
                .poles
                .iter()
                .map(|p| p.as_ref().map(|v| v.coords().as_slice().to_vec()))
                .collect(),
            complement_dims: r.complement_dims.clone(),
            pole_residuals: r.pole_residuals.clone(),
            plane_residual: r.plane_residual.is_finite().then_some(r.plane_residual),
            timelike: r.timelike,
            radii: r.radii.clone(),
            accepted: r.accepted,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducibilityFamilyFile {
    pub family: usize,
    pub rank: usize,
    pub codimension: usize,
    /// (positive, negative, null) inertia of the span's polar space.
    pub signature: (usize, usize, usize),
    /// "revolution", "cylinder", "tube", or "none".
    pub label: String,
    pub singular_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducibilityReportFile {
    pub families: Vec<ReducibilityFamilyFile>,
}

impl ReducibilityReportFile {
    pub fn from_reports(reports: &[ReducibilityReport]) -> Self {
        ReducibilityReportFile {
            families: reports
                .iter()
                .map(|r| ReducibilityFamilyFile {
                    family: r.family,
                    rank: r.rank,
                    codimension: r.codimension,
                    signature: r.signature,
                    label: r.label.to_string(),
                    singular_values: r.singular_values.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactConditionReportFile {
    pub span_residual: f64,
    pub immersion_margin: f64,
    pub contact_residual: f64,
    pub samples_checked: usize,
    pub span_ok: bool,
    pub immersion_ok: bool,
    pub contact_ok: bool,
    pub pass: bool,
}

impl ContactConditionReportFile {
    pub fn from_report(r: &ContactConditionReport) -> Self {
        ContactConditionReportFile {
            span_residual: r.span_residual,
            immersion_margin: r.immersion_margin,
            contact_residual: r.contact_residual,
            samples_checked: r.samples_checked,
            span_ok: r.span_ok,
            immersion_ok: r.immersion_ok,
            contact_ok: r.contact_ok,
            pass: r.pass(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn v(s: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(s)
    }

    #[test]
    fn sphere_files_round_trip_each_model() {
        let tols = Tolerances::default();
        let objs = [
            EuclideanSphereObject::point(v(&[0.25, -1.5, 2.0])),
            EuclideanSphereObject::sphere(v(&[1.0, 2.0, 3.0]), -2.0),
            EuclideanSphereObject::plane(v(&[0.0, 0.0, 1.0]), 2.0).unwrap(),
            EuclideanSphereObject::improper(3),
        ];
        for obj in &objs {
            let file = SphereFile::from_euclidean(obj);
            let text = to_json_string(&file).unwrap();
            let back: SphereFile = from_json_str(&text).unwrap();
            match back.parse(&tols).unwrap() {
                SphereInput::Euclidean(o) => assert!(o.approx_eq(obj, 1e-12)),
                other => panic!("wrong variant: {other:?}"),
            }
            // Through the quadric and back.
            let lie = file.converted("lie", &tols).unwrap();
            let eu = lie.converted("euclidean", &tols).unwrap();
            match eu.parse(&tols).unwrap() {
                SphereInput::Euclidean(o) => assert!(o.approx_eq(obj, 1e-10)),
                other => panic!("wrong variant: {other:?}"),
            }
        }
    }

    #[test]
    fn plane_converts_to_a_sphere_through_the_pole() {
        let tols = Tolerances::default();
        let file = SphereFile::from_euclidean(
            &EuclideanSphereObject::plane(v(&[0.0, 0.0, 1.0]), 0.0).unwrap(),
        );
        let sph = file.converted("spherical", &tols).unwrap();
        match sph.parse(&tols).unwrap() {
            SphereInput::Spherical(s) => {
                assert!((s.signed_radius - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
            }
            other => panic!("wrong variant: {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_misplaced_fields_are_rejected() {
        let bad: Result<SphereFile> =
            from_json_str(r#"{"model":"lie","n":3,"coords":[1,0,0,0,0,1],"extra":1}"#);
        assert!(matches!(bad, Err(GeomError::InvalidInput(_))));

        let file: SphereFile = from_json_str(
            r#"{"model":"euclidean","n":2,"kind":"point","point":[0.0,0.0],"radius":1.0}"#,
        )
        .unwrap();
        assert!(matches!(
            file.parse(&Tolerances::default()),
            Err(GeomError::InvalidInput(_))
        ));
    }

    #[test]
    fn floats_carry_seventeen_digits() {
        let file = SphereFile::from_euclidean(&EuclideanSphereObject::point(v(&[
            std::f64::consts::PI,
        ])));
        let text = to_json_string(&file).unwrap();
        assert!(text.contains("3.1415926535897931e0"), "{text}");
        let back: SphereFile = from_json_str(&text).unwrap();
        assert_eq!(back.point.unwrap()[0], std::f64::consts::PI);
    }

    #[test]
    fn hypersurface_files_round_trip_both_ambients() {
        use crate::construct::charts::TorusChart;
        let grid = Grid::new(
            vec![12, 7],
            vec![true, false],
            vec![(0.0, std::f64::consts::TAU), (0.2, 1.1)],
        )
        .unwrap();
        let torus = SampledHypersurface::from_euclidean_chart(
            Arc::new(TorusChart { a: 2.0, b: 1.0 }),
            grid,
        )
        .unwrap();
        let file = HypersurfaceFile::from_surface(&torus).unwrap();
        let text = to_json_string(&file).unwrap();
        let back: HypersurfaceFile = from_json_str(&text).unwrap();
        let surf = back.to_surface().unwrap();
        assert_eq!(surf.n(), torus.n());
        assert_eq!(surf.grid(), torus.grid());
        for (a, b) in surf.positions().iter().zip(torus.positions()) {
            assert!((a - b).norm() < 1e-12);
        }
        for (a, b) in surf.normals().iter().zip(torus.normals()) {
            assert!((a - b).norm() < 1e-12);
        }

        let spherical = crate::construct::product_of_spheres(
            1,
            1,
            0.6,
            0.8,
            crate::construct::Resolution { periodic: 10, bounded: 7, flat: 5 },
        )
        .unwrap()
        .surface;
        let file = HypersurfaceFile::from_surface(&spherical).unwrap();
        let back: HypersurfaceFile = from_json_str(&to_json_string(&file).unwrap()).unwrap();
        let surf = back.to_surface().unwrap();
        assert_eq!(surf.ambient(), AmbientModel::Spherical);
        for (a, b) in surf.positions().iter().zip(spherical.positions()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn serialization_is_byte_stable() {
        let file = PencilFile { n: 3, k1: vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0], k2: vec![0.5; 6] };
        let a = to_json_string(&file).unwrap();
        let b = to_json_string(&from_json_str::<PencilFile>(&a).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn transform_file_round_trips_the_matrix() {
        let b = crate::transform::random_lie_transform(3, 11, 0.7);
        let file = TransformFile::from_transform(&b);
        let back: TransformFile = from_json_str(&to_json_string(&file).unwrap()).unwrap();
        let b2 = back.to_transform(1e-8).unwrap();
        assert!(b.approx_eq(&b2, 1e-12));
    }
}
