/// Numerical thresholds shared across the engine. All bounds are relative to
/// the scale of the data they test unless stated otherwise.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Quadric membership: |<x,x>| <= quadric * |x|^2.
    pub quadric: f64,
    /// Singular values below rank * sigma_max count as zero.
    pub rank: f64,
    /// Oriented-contact pairing bound on unit representatives.
    pub contact: f64,
    /// Principal values closer than cluster_gap * (1 + |kappa|) merge into one
    /// curvature sphere.
    pub cluster_gap: f64,
    /// Curvature-sphere drift per unit parameter length along a leaf, when
    /// analytic derivatives are available.
    pub dupin_drift: f64,
    /// Same bound when derivatives come from finite differences.
    pub dupin_drift_fd: f64,
    /// Residual bound for the common timelike 2-plane fit.
    pub timelike_plane: f64,
    /// Fraction of interior samples that must share the modal number of
    /// distinct curvature spheres for a "proper" verdict.
    pub proper_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quadric: 1e-10,
            rank: 1e-8,
            contact: 1e-9,
            cluster_gap: 1e-6,
            dupin_drift: 1e-6,
            dupin_drift_fd: 1e-4,
            timelike_plane: 1e-6,
            proper_fraction: 0.99,
        }
    }
}

impl Tolerances {
    /// Override the user-facing predicate tolerance (contact pairing). Other
    /// thresholds keep their defaults; pass a struct literal to change them.
    pub fn with_contact(mut self, tol: f64) -> Self {
        self.contact = tol;
        self
    }
}
