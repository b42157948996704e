use nalgebra::{DMatrix, DVector};

use crate::config::Tolerances;
use crate::coords::{lie_to_euclidean, EuclideanSphereObject, LieCoord};
use crate::error::{GeomError, Result};
use crate::linalg::sym_generalized_eigen;

use super::chart::ContactJet;

/// Fundamental forms and the principal decomposition at one point of an
/// immersed hypersurface patch.
#[derive(Debug, Clone)]
pub struct ShapeData {
    pub first: DMatrix<f64>,
    pub second: DMatrix<f64>,
    /// Principal values, ascending.
    pub values: Vec<f64>,
    /// Matching principal directions in parameter space (columns,
    /// first-form-orthonormal).
    pub directions: DMatrix<f64>,
}

/// Shape data from contact-frame derivatives. Fails when the position
/// Jacobian is rank-deficient (the projection is not an immersion there).
pub fn shape_from_contact_jet(cj: &ContactJet) -> Result<ShapeData> {
    let jf = &cj.jf;
    let svd = nalgebra::SVD::new(jf.clone(), false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 || smin < 1e-8 * smax {
        return Err(GeomError::Degenerate(format!(
            "projection not immersive: singular value ratio {:.3e}",
            if smax == 0.0 { 0.0 } else { smin / smax }
        )));
    }
    let first = jf.transpose() * jf;
    let second_raw = -(jf.transpose() * &cj.jxi);
    let second = (&second_raw + second_raw.transpose()) * 0.5;
    let (values, directions) = sym_generalized_eigen(&second, &first)?;
    Ok(ShapeData { first, second, values, directions })
}

/// One curvature sphere at a point: the homogeneous pair is read in the
/// canonical point-sphere/great-sphere basis, so pair.0 / pair.1 is the
/// cotangent of the sphere's signed spherical radius.
#[derive(Debug, Clone)]
pub struct CurvatureSphere {
    pub pair: (f64, f64),
    pub multiplicity: usize,
    /// Principal space basis, columns in parameter coordinates.
    pub directions: DMatrix<f64>,
    pub k: LieCoord,
}

impl CurvatureSphere {
    pub fn is_infinite(&self) -> bool {
        let (r, s) = self.pair;
        s.abs() <= 1e-9 * r.abs().max(s.abs())
    }

    /// Principal value r/s; infinite spheres report f64::INFINITY.
    pub fn value(&self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            self.pair.0 / self.pair.1
        }
    }

    /// Signed curvature of this sphere read through the flat chart: 1/r for
    /// a proper sphere of signed radius r, zero for oriented planes,
    /// infinite at point spheres.
    pub fn euclidean_value(&self, tols: &Tolerances) -> f64 {
        match lie_to_euclidean(&self.k, tols) {
            EuclideanSphereObject::Sphere { signed_radius, .. } => 1.0 / signed_radius,
            EuclideanSphereObject::Plane { .. } => 0.0,
            EuclideanSphereObject::ProperPoint { .. }
            | EuclideanSphereObject::ImproperPoint { .. } => f64::INFINITY,
        }
    }
}

/// The distinct curvature spheres at one parameter point, ascending by
/// value with any infinite sphere last. Multiplicities sum to the parameter
/// dimension.
#[derive(Debug, Clone)]
pub struct CurvatureSphereSet {
    pub spheres: Vec<CurvatureSphere>,
}

impl CurvatureSphereSet {
    pub fn g(&self) -> usize {
        self.spheres.len()
    }

    pub fn values(&self) -> Vec<f64> {
        self.spheres.iter().map(|s| s.value()).collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.spheres.iter().map(|s| s.multiplicity).collect()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.spheres.iter().map(|s| s.multiplicity).sum()
    }
}

/// A group of principal values that agree projectively, with the mean
/// position on the pencil circle.
pub(crate) struct ValueCluster {
    pub indices: Vec<usize>,
    pub angle: f64,
}

/// Group principal values by their position on the pencil circle: kappa is
/// the point (kappa : 1) of the line spanned by the point sphere and great
/// sphere, sitting at angle atan2(1, kappa) in (0, pi). Values merge when
/// their circular separation (mod pi) stays below `gap` radians. On this
/// circle +inf and -inf are the same curvature sphere, which keeps
/// clustering sane across focal points.
pub(crate) fn cluster_on_circle(values: &[f64], gap: f64) -> Vec<ValueCluster> {
    use std::f64::consts::PI;
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let theta: Vec<f64> = values.iter().map(|&v| 1.0f64.atan2(v)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| theta[a].partial_cmp(&theta[b]).unwrap());
    // Arc lengths between circularly consecutive values; the last entry
    // wraps from the largest angle back to the smallest.
    let mut cut = vec![false; n];
    let mut first_cut = None;
    for i in 0..n {
        let arc = if i + 1 < n {
            theta[order[i + 1]] - theta[order[i]]
        } else {
            theta[order[0]] + PI - theta[order[n - 1]]
        };
        if arc > gap {
            cut[i] = true;
            first_cut.get_or_insert(i);
        }
    }
    let mut clusters = Vec::new();
    match first_cut {
        None => {
            // Everything within gap of its neighbors around the ring.
            clusters.push(order.clone());
        }
        Some(fc) => {
            let mut run = Vec::new();
            for k in 1..=n {
                let pos = (fc + k) % n;
                run.push(order[pos]);
                if cut[pos] {
                    clusters.push(std::mem::take(&mut run));
                }
            }
        }
    }
    clusters
        .into_iter()
        .map(|indices| {
            let base = theta[indices[0]];
            let mean_dev = indices
                .iter()
                .map(|&i| (theta[i] - base + PI / 2.0).rem_euclid(PI) - PI / 2.0)
                .sum::<f64>()
                / indices.len() as f64;
            ValueCluster { indices, angle: base + mean_dev }
        })
        .collect()
}

/// Build the curvature-sphere list of an immersed point from its shape data
/// and contact frame.
pub(crate) fn spheres_from_shape(
    cj: &ContactJet,
    shape: &ShapeData,
    tols: &Tolerances,
) -> CurvatureSphereSet {
    let d = shape.directions.nrows();
    let np1 = cj.f.len();
    let n = np1 - 1;
    let mut spheres = Vec::new();
    for cluster in cluster_on_circle(&shape.values, tols.cluster_gap) {
        // K = cos(theta) (1, f, 0) + sin(theta) (0, xi, 1), built from the
        // circle angle so focal points (theta near 0 mod pi) are exact.
        let (s, c) = cluster.angle.sin_cos();
        let mut k = DVector::zeros(np1 + 2);
        k[0] = c;
        for i in 0..np1 {
            k[i + 1] = c * cj.f[i] + s * cj.xi[i];
        }
        k[np1 + 1] = s;
        k /= std::f64::consts::SQRT_2;
        let mut dirs = DMatrix::zeros(d, cluster.indices.len());
        for (col, &idx) in cluster.indices.iter().enumerate() {
            dirs.set_column(col, &shape.directions.column(idx));
        }
        spheres.push(CurvatureSphere {
            pair: (k[0], k[np1 + 1]),
            multiplicity: cluster.indices.len(),
            directions: dirs,
            k: LieCoord::new_unchecked(k, n),
        });
    }
    CurvatureSphereSet { spheres }
}

/// Sort spheres ascending by value, infinite last, in place.
pub(crate) fn sort_spheres(set: &mut CurvatureSphereSet) {
    set.spheres.sort_by(|a, b| {
        match (a.is_infinite(), b.is_infinite()) {
            (true, true) => std::cmp::Ordering::Equal,
            (true, false) => std::cmp::Ordering::Greater,
            (false, true) => std::cmp::Ordering::Less,
            (false, false) => a.value().partial_cmp(&b.value()).unwrap(),
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clustering_respects_gaps() {
        let vals = [-2.0000001, -2.0, 0.5, 0.5000002, 30.0];
        let c = cluster_on_circle(&vals, 1e-6);
        assert_eq!(c.len(), 3);
        let mut groups: Vec<Vec<usize>> = c
            .iter()
            .map(|cl| {
                let mut v = cl.indices.clone();
                v.sort();
                v
            })
            .collect();
        groups.sort();
        assert_eq!(groups, vec![vec![0, 1], vec![2, 3], vec![4]]);
        let tight = cluster_on_circle(&vals, 1e-12);
        assert_eq!(tight.len(), 5);
    }

    #[test]
    fn clustering_merges_across_infinity() {
        // Opposite near-infinite values are the same curvature sphere.
        let vals = [-3.0e15, 0.7, 2.9e15];
        let c = cluster_on_circle(&vals, 1e-6);
        assert_eq!(c.len(), 2);
        let big = c.iter().find(|cl| cl.indices.len() == 2).unwrap();
        let mut idx = big.indices.clone();
        idx.sort();
        assert_eq!(idx, vec![0, 2]);
        // Mean angle is at the point sphere (0 mod pi).
        assert!(big.angle.sin().abs() < 1e-9);
    }

    #[test]
    fn infinite_pair_detection() {
        let k = LieCoord::new(DVector::from_row_slice(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]))
            .unwrap();
        let s = CurvatureSphere {
            pair: (1.0, 0.0),
            multiplicity: 1,
            directions: DMatrix::zeros(2, 1),
            k,
        };
        assert!(s.is_infinite());
        assert_eq!(s.value(), f64::INFINITY);
    }
}
